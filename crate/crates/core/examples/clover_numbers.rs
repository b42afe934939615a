//! Clover numbers of the unfolded clover family at eps = 1/20, delta = 19/20.
use std::time::Instant;

use ntk_curves::geometry::{builtin_geometry, clover_number, injectivity_radius, BuiltinName, BuiltinOptions};

fn main() -> ntk_curves::Result<()> {
    let samples: usize = std::env::args().nth(1).map_or(2048, |s| s.parse().expect("samples"));
    let opts = BuiltinOptions { samples, ..Default::default() };
    for k in (1..=4).rev() {
        let start = Instant::now();
        let inst = builtin_geometry(BuiltinName::Clover(k), &opts)?;
        let cn = clover_number(&inst, 1.0 / 20.0, 19.0 / 20.0)?;
        let de = injectivity_radius(&inst, 1.0 / 20.0)?;
        println!(
            "clover({k}): len+ {:.5} len- {:.5} kappa {:.3} clover {} (base {}) Delta_eps {:.4e} cap {:.4e} [{:.2?}]",
            inst.plus.length,
            inst.minus.length,
            inst.kappa(),
            cn.value,
            cn.base,
            de.value,
            de.cap,
            start.elapsed()
        );
    }
    Ok(())
}
