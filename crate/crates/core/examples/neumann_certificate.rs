//! Neumann-series certificate on the low-frequency subspace for two circles at large depth.
use std::time::Instant;

use ntk_curves::certificate::{arc_norm, discretize, ConstructiveSolver, Weighting, DEFAULT_BAND};
use ntk_curves::geometry::{builtin_geometry, BuiltinName, BuiltinOptions};
use ntk_curves::kernel::KernelParams;

fn main() -> ntk_curves::Result<()> {
    let mut args = std::env::args().skip(1);
    let depth: usize = args.next().map_or(100_000, |s| s.parse().expect("depth"));
    let m: usize = args.next().map_or(2048, |s| s.parse().expect("nodes"));
    let band: usize = args.next().map_or(DEFAULT_BAND, |s| s.parse().expect("band"));
    let eps = 1.0 / 20.0;
    let start = Instant::now();
    let inst = builtin_geometry(BuiltinName::TwoCircles, &BuiltinOptions::default())?;
    let grid = discretize(&inst, m, Weighting::Riemannian)?;
    let params = KernelParams::with_depth(depth)?;
    let solver = ConstructiveSolver::new(&grid, params, band)?;
    println!("operator assembled in {:.2?}", start.elapsed());
    let sub = solver.subspace(eps)?;
    println!(
        "S_eps: r = {:.5}, K = {:?}, dim = {}, eigenvalues {:?}",
        sub.spec.r,
        sub.spec.k,
        sub.dimension(),
        sub.eigenvalues
    );
    let zeta = sub.project(&grid.labels);
    let out = solver.neumann_in(&sub, &zeta, 500, 1e-12)?;
    println!("contraction = {:.4}, terms = {}", out.contraction, out.terms);
    if let Some(cert) = &out.certificate {
        let diff: Vec<f64> = cert.values.iter().zip(&out.direct).map(|(a, b)| a - b).collect();
        println!(
            "|g| = {:.6e}, P_S residual / |zeta| = {:.3e}, |g - direct| / |g| = {:.3e}",
            cert.norm,
            out.projected_residual / arc_norm(&zeta, &grid),
            arc_norm(&diff, &grid) / cert.norm
        );
    }
    println!("total {:.2?}", start.elapsed());
    Ok(())
}
