//! Nominal kernel gradient descent on two_circles, eigen path against explicit steps.
use ntk_curves::certificate::{assemble_kernel, discretize, Weighting};
use ntk_curves::dynamics::{lambda_max, nominal_evolve, EvolveMethod, EvolveOptions};
use ntk_curves::geometry::{builtin_geometry, BuiltinName, BuiltinOptions};
use ntk_curves::kernel::KernelParams;

fn main() -> ntk_curves::Result<()> {
    let depth: usize = std::env::args().nth(1).map_or(50, |s| s.parse().expect("depth"));
    let inst = builtin_geometry(BuiltinName::TwoCircles, &BuiltinOptions::default())?;
    let grid = discretize(&inst, 400, Weighting::PaperUniformT)?;
    let kernel = assemble_kernel(&grid, &KernelParams::with_depth(depth)?, false)?;
    let lmax = lambda_max(&kernel, &grid)?;
    let tau = 0.5 / lmax;
    let zeta0: Vec<f64> = grid.labels.iter().map(|y| -y).collect();
    let run = |method| {
        let opts = EvolveOptions { method, monotone: true, target: Some(&grid.labels) };
        nominal_evolve(&grid, &kernel, &zeta0, tau, 500, opts)
    };
    let eigen = run(EvolveMethod::Eigen)?;
    let explicit = run(EvolveMethod::Explicit)?;
    println!("lambda_max {lmax:.4}, tau {tau:.4e}, separated from iteration {:?}", eigen.first_separated());
    for k in [0, 1, 10, 100, 500] {
        let (a, b) = (&eigen.records[k], &explicit.records[k]);
        println!("k {k:>4}  |zeta| {:.6e}  explicit {:.6e}  margin {:+.4}", a.error_norm, b.error_norm, a.margin);
    }
    Ok(())
}
