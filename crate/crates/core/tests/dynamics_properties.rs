use ntk_curves::certificate::{
    assemble_kernel, discretize, solve_certificate_pinv, weighted_norm, DiscretizedManifold, KernelMatrix, Weighting,
};
use ntk_curves::dynamics::{nominal_evolve, EvolveMethod, EvolveOptions, WeightedSpectrum};
use ntk_curves::geometry::{builtin_geometry, BuiltinName, BuiltinOptions};
use ntk_curves::kernel::KernelParams;
use proptest::prelude::*;

fn setup(name: BuiltinName, m: usize, depth: usize, mode: Weighting) -> (DiscretizedManifold, KernelMatrix) {
    let inst = builtin_geometry(name, &BuiltinOptions { samples: 512, ..Default::default() }).unwrap();
    let grid = discretize(&inst, m, mode).unwrap();
    let kernel = assemble_kernel(&grid, &KernelParams::with_depth(depth).unwrap(), false).unwrap();
    (grid, kernel)
}

fn opts(method: EvolveMethod) -> EvolveOptions<'static> {
    EvolveOptions { method, monotone: true, target: None }
}

#[test]
fn eigen_path_matches_explicit_iteration() {
    for (name, mode) in [(BuiltinName::TwoCircles, Weighting::PaperUniformT), (BuiltinName::Fig1Like, Weighting::Riemannian)] {
        let (grid, kernel) = setup(name, 256, 20, mode);
        let spec = WeightedSpectrum::new(&kernel, &grid).unwrap();
        let tau = 0.9 / spec.lambda_max();
        let zeta0: Vec<f64> = grid.labels.iter().map(|v| -v).collect();
        let a = nominal_evolve(&grid, &kernel, &zeta0, tau, 1000, opts(EvolveMethod::Eigen)).unwrap();
        let b = nominal_evolve(&grid, &kernel, &zeta0, tau, 1000, opts(EvolveMethod::Explicit)).unwrap();
        // relative to the initial norm: late iterates sit at the roundoff floor of the explicit path
        let scale = a.records[0].error_norm;
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!((x.error_norm - y.error_norm).abs() <= 1e-8 * scale, "{name} k {}: {} vs {}", x.iter, x.error_norm, y.error_norm);
        }
        let diff: Vec<f64> = a.final_error.iter().zip(&b.final_error).map(|(x, y)| x - y).collect();
        assert!(weighted_norm(&diff, &grid) <= 1e-8 * scale);
        // one-shot evolution agrees with the recorded endpoint
        let jump = spec.evolve(&zeta0, tau, 1000);
        let diff: Vec<f64> = jump.iter().zip(&a.final_error).map(|(x, y)| x - y).collect();
        assert!(weighted_norm(&diff, &grid) <= 1e-10);
    }
}

#[test]
fn top_eigenvector_decays_geometrically() {
    let (grid, kernel) = setup(BuiltinName::TwoCircles, 128, 10, Weighting::PaperUniformT);
    let spec = WeightedSpectrum::new(&kernel, &grid).unwrap();
    let top = spec.eigenvalues().imax();
    let lambda = spec.eigenvalues()[top];
    let v = spec.eigenvector(top);
    let tau = 0.5 / lambda;
    let traj = nominal_evolve(&grid, &kernel, &v, tau, 50, opts(EvolveMethod::Explicit)).unwrap();
    let n0 = traj.records[0].error_norm;
    for r in &traj.records {
        let expect = (1.0 - tau * lambda).powi(r.iter as i32) * n0;
        assert!((r.error_norm - expect).abs() <= 1e-9 * n0, "k {}", r.iter);
    }
}

#[test]
fn large_steps_rejected_in_monotone_mode() {
    let (grid, kernel) = setup(BuiltinName::TwoCircles, 64, 10, Weighting::PaperUniformT);
    let lmax = WeightedSpectrum::new(&kernel, &grid).unwrap().lambda_max();
    let err = nominal_evolve(&grid, &kernel, &grid.labels, 2.0 / lmax, 10, opts(EvolveMethod::Eigen)).unwrap_err();
    assert!(err.is_config());
}

#[test]
fn error_floor_bounded_by_certificate_residual() {
    let (grid, kernel) = setup(BuiltinName::Fig1Like, 200, 10, Weighting::PaperUniformT);
    let zeta0: Vec<f64> = grid.labels.iter().map(|v| -v).collect();
    let cert = solve_certificate_pinv(&kernel, &grid, &zeta0, Some(1e-6)).unwrap();
    let r = cert.residual_norm;
    let spec = WeightedSpectrum::new(&kernel, &grid).unwrap();
    let tau = 0.5 / spec.lambda_max();
    let floor = weighted_norm(&spec.evolve(&zeta0, tau, 200_000_000), &grid);
    let z0 = weighted_norm(&zeta0, &grid);
    assert!(floor <= 1.1 * (r + 1e-8 * z0), "floor {floor:e}, residual {r:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_norm_nonincreasing(frac in 0.01f64..0.999, depth in 3usize..60, seed in 0u64..1000) {
        let (grid, kernel) = setup(BuiltinName::Clover(3), 64, depth, Weighting::PaperUniformT);
        let lmax = WeightedSpectrum::new(&kernel, &grid).unwrap().lambda_max();
        // pseudo-random initial error from the seed
        let zeta0: Vec<f64> = (0..grid.len()).map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
        let traj = nominal_evolve(&grid, &kernel, &zeta0, frac / lmax, 200, opts(EvolveMethod::Eigen)).unwrap();
        for w in traj.records.windows(2) {
            prop_assert!(w[1].error_norm <= w[0].error_norm * (1.0 + 1e-12));
        }
    }
}
