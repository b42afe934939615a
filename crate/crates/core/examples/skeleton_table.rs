//! Tabulate the DC-subtracted skeleton at large depth and compare with direct evaluation.
use std::time::Instant;

use ntk_curves::kernel::{skeleton_dc, KernelParams, SkeletonTable};

fn main() -> ntk_curves::Result<()> {
    let depth: usize = std::env::args().nth(1).map_or(100_000, |s| s.parse().expect("depth"));
    let params = KernelParams::with_depth(depth)?;
    let start = Instant::now();
    let table = SkeletonTable::with_default_grid(params)?;
    println!("built {} knots in {:.2?}", table.grid().len(), start.elapsed());
    let peak = table.eval(0.0);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let t = std::f64::consts::PI * ((i as f64 * 0.754_877_666) % 1.0);
        worst = worst.max((table.eval(t) - skeleton_dc(t, &params)).abs());
    }
    println!("psi°(0) = {peak:.6}, psi(pi) = {:.6}", table.psi_at_pi());
    println!("max |table - direct| / psi°(0) = {:.3e}", worst / peak);
    println!("refinement check = {:.3e}", table.refinement_error() / peak);
    Ok(())
}
