//! Pseudoinverse certificates on fig1_like at increasing depth.
//!
//! Deeper kernels localize more, and the certificate magnitude drops.
use ntk_curves::certificate::{assemble_kernel, discretize, solve_certificate_pinv, Weighting};
use ntk_curves::geometry::{builtin_geometry, BuiltinName, BuiltinOptions};
use ntk_curves::kernel::KernelParams;

fn main() -> ntk_curves::Result<()> {
    let m: usize = std::env::args().nth(1).map_or(200, |s| s.parse().expect("grid size"));
    let inst = builtin_geometry(BuiltinName::Fig1Like, &BuiltinOptions::default())?;
    let grid = discretize(&inst, m, Weighting::PaperUniformT)?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>6}", "L", "|g|", "max|g|", "residual", "rank");
    for depth in [5, 10, 25, 50, 100, 200] {
        let kernel = assemble_kernel(&grid, &KernelParams::with_depth(depth)?, false)?;
        let cert = solve_certificate_pinv(&kernel, &grid, &grid.labels, None)?;
        println!(
            "{depth:>5} {:>12.4} {:>12.4} {:>12.3e} {:>6}",
            cert.norm,
            cert.max_abs(),
            cert.residual_norm,
            cert.rank.unwrap_or(0)
        );
    }
    Ok(())
}
