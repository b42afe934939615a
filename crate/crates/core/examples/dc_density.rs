//! DC plus density certificate for a non-constant target at large depth.
use ntk_curves::certificate::{discretize, ConstructiveSolver, Weighting, DEFAULT_BAND};
use ntk_curves::geometry::{builtin_geometry, BuiltinName, BuiltinOptions};
use ntk_curves::kernel::KernelParams;

fn main() -> ntk_curves::Result<()> {
    let depth: usize = std::env::args().nth(1).map_or(100_000, |s| s.parse().expect("depth"));
    let inst = builtin_geometry(BuiltinName::TwoCircles, &BuiltinOptions::default())?;
    let grid = discretize(&inst, 2048, Weighting::Riemannian)?;
    let solver = ConstructiveSolver::new(&grid, KernelParams::with_depth(depth)?, DEFAULT_BAND)?;
    // labels plus a ripple, projected onto the low-frequency subspace
    let raw: Vec<f64> = (0..grid.len())
        .map(|i| grid.labels[i] + 0.3 * (std::f64::consts::TAU * grid.s[i] / grid.lengths[grid.component[i]]).cos())
        .collect();
    let sub = solver.subspace(1.0 / 20.0)?;
    println!("subspace frequencies per curve {:?}", sub.spec.k);
    let zeta = sub.project(&raw);
    let out = solver.dc_density(&zeta, 1.0 / 20.0, 0.3, 3, 500, 1e-12)?;
    println!("alpha {:.6}, mass of g1 {:.6}", out.alpha, out.g1_mass);
    for (round, r) in out.residual_history.iter().enumerate() {
        println!("round {round}: |Theta[h] - zeta| = {r:.4e}");
    }
    println!("|h| = {:.6}", out.certificate.norm);
    Ok(())
}
