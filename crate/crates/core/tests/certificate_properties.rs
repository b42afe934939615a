use ntk_curves::certificate::{
    arc_norm, assemble_kernel, discretize, invariant_operator_eigs, solve_certificate_pinv, weighted_norm,
    ConstructiveSolver, DiscretizedManifold, Weighting, DEFAULT_BAND,
};
use ntk_curves::geometry::{builtin_geometry, BuiltinName, BuiltinOptions};
use ntk_curves::kernel::KernelParams;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(name: BuiltinName, m: usize, mode: Weighting) -> DiscretizedManifold {
    let inst = builtin_geometry(name, &BuiltinOptions { samples: 512, ..Default::default() }).unwrap();
    discretize(&inst, m, mode).unwrap()
}

#[test]
fn pinv_is_locally_optimal() {
    let grid = grid(BuiltinName::Fig1Like, 100, Weighting::PaperUniformT);
    let kernel = assemble_kernel(&grid, &KernelParams::with_depth(10).unwrap(), false).unwrap();
    // a truncated solve leaves a visible least-squares residual
    let cert = solve_certificate_pinv(&kernel, &grid, &grid.labels, Some(1e-6)).unwrap();
    let mu = grid.mu_weights();
    let residual = |g: &[f64]| {
        let r: Vec<f64> = (0..grid.len())
            .map(|i| (0..grid.len()).map(|j| kernel.matrix[(i, j)] * mu[j] * g[j]).sum::<f64>() - grid.labels[i])
            .collect();
        weighted_norm(&r, &grid)
    };
    let base = residual(&cert.values);
    assert!((base - cert.residual_norm).abs() <= 1e-9 * (1.0 + base));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let i = rng.random_range(0..grid.len());
        for step in [1e-3, -1e-3] {
            let mut g = cert.values.clone();
            g[i] += step;
            assert!(residual(&g) >= base - 1e-12 * (1.0 + base), "coordinate {i}");
        }
    }
}

#[test]
fn projector_idempotent_and_self_adjoint() {
    let grid = grid(BuiltinName::TwoCircles, 256, Weighting::Riemannian);
    let solver = ConstructiveSolver::new(&grid, KernelParams::with_depth(2000).unwrap(), DEFAULT_BAND).unwrap();
    let sub = solver.subspace(0.05).unwrap();
    let p = sub.projector();
    assert!((&p * &p - &p).amax() <= 1e-10 * p.amax().max(1.0));
    // <Pu, v>_w = <u, Pv>_w
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let u: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (pu, pv) = (sub.project(&u), sub.project(&v));
        let ip = |a: &[f64], b: &[f64]| (0..a.len()).map(|i| a[i] * b[i] * grid.weights[i]).sum::<f64>();
        assert!((ip(&pu, &v) - ip(&u, &pv)).abs() <= 1e-10 * arc_norm(&u, &grid) * arc_norm(&v, &grid));
    }
}

#[test]
fn neumann_equals_direct_restricted_solve() {
    for (m, depth) in [(128, 2000), (256, 5000)] {
        let grid = grid(BuiltinName::TwoCircles, m, Weighting::Riemannian);
        let solver = ConstructiveSolver::new(&grid, KernelParams::with_depth(depth).unwrap(), DEFAULT_BAND).unwrap();
        let sub = solver.subspace(0.05).unwrap();
        let zeta = sub.project(&grid.labels);
        let tol = 1e-12;
        let out = solver.neumann_in(&sub, &zeta, 1000, tol).unwrap();
        let g = out.certificate.expect("series converges").values;
        // brute-force oracle: invert the restricted operator built column by column
        let n = sub.dimension();
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for k in 0..n {
            let mut e = nalgebra::DVector::zeros(n);
            e[k] = 1.0;
            let col = sub.coefficients(&solver.operator().apply_dc(&sub.synthesize(&e)));
            a.set_column(k, &col);
        }
        let c = a.lu().solve(&sub.coefficients(&zeta)).unwrap();
        let direct = sub.synthesize(&c);
        let diff: Vec<f64> = g.iter().zip(&direct).map(|(x, y)| x - y).collect();
        assert!(arc_norm(&diff, &grid) <= 10.0 * tol * arc_norm(&direct, &grid), "M = {m}");
    }
}

#[test]
fn operator_matches_invariant_eigenvalue_locally() {
    let depth = 2000;
    let params = KernelParams::with_depth(depth).unwrap();
    let grid = grid(BuiltinName::TwoCircles, 2048, Weighting::Riemannian);
    let solver = ConstructiveSolver::new(&grid, params, DEFAULT_BAND).unwrap();
    let sub = solver.subspace(0.05).unwrap();
    let r = sub.spec.r;
    for c in 0..2 {
        let len = grid.lengths[c];
        let m0 = invariant_operator_eigs(0.05, &params, len).unwrap()[0];
        let range = grid.range(c);
        let i = range.start;
        let a = &solver.operator().matrix;
        // same-component action on the constant mode, cut off at intrinsic distance r
        let local: f64 = range
            .clone()
            .filter(|&j| {
                let d = (grid.s[j] - grid.s[i]).rem_euclid(len);
                d.min(len - d) <= r
            })
            .map(|j| a[(i, j)])
            .sum();
        assert!((local - m0).abs() <= 0.02 * m0, "component {c}: {local} vs {m0}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pinv_scale_equivariant(c in -50.0f64..50.0) {
        prop_assume!(c.abs() > 1e-3);
        let grid = grid(BuiltinName::Clover(2), 64, Weighting::PaperUniformT);
        let kernel = assemble_kernel(&grid, &KernelParams::with_depth(20).unwrap(), false).unwrap();
        let a = solve_certificate_pinv(&kernel, &grid, &grid.labels, None).unwrap();
        let scaled: Vec<f64> = grid.labels.iter().map(|v| c * v).collect();
        let b = solve_certificate_pinv(&kernel, &grid, &scaled, None).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((c * x - y).abs() <= 1e-10 * (c * x).abs().max(a.max_abs() * c.abs()));
        }
        prop_assert!((b.residual_norm - c.abs() * a.residual_norm).abs() <= 1e-10 * c.abs() * a.norm.max(1.0));
    }

    #[test]
    fn neumann_scale_equivariant(c in -50.0f64..50.0) {
        prop_assume!(c.abs() > 1e-3);
        let grid = grid(BuiltinName::TwoCircles, 128, Weighting::Riemannian);
        let solver = ConstructiveSolver::new(&grid, KernelParams::with_depth(2000).unwrap(), DEFAULT_BAND).unwrap();
        let sub = solver.subspace(0.05).unwrap();
        let zeta = sub.project(&grid.labels);
        let scaled: Vec<f64> = zeta.iter().map(|v| c * v).collect();
        let a = solver.neumann_in(&sub, &zeta, 1000, 1e-14).unwrap().certificate.unwrap();
        let b = solver.neumann_in(&sub, &scaled, 1000, 1e-14).unwrap().certificate.unwrap();
        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| c * x - y).collect();
        prop_assert!(arc_norm(&diff, &grid) <= 1e-10 * c.abs() * a.norm);
        prop_assert!((b.residual_norm - c.abs() * a.residual_norm).abs() <= 1e-10 * c.abs() * arc_norm(&zeta, &grid));
    }
}

#[test]
fn dc_density_refinement_halves_residual() {
    let grid = grid(BuiltinName::TwoCircles, 2048, Weighting::Riemannian);
    let solver = ConstructiveSolver::new(&grid, KernelParams::with_depth(100_000).unwrap(), DEFAULT_BAND).unwrap();
    let out = solver.dc_density(&grid.labels, 1.0 / 20.0, 0.3, 3, 500, 1e-12).unwrap();
    let first = out.residual_history[0];
    assert!(out.certificate.residual_norm <= 0.5 * first, "{:?}", out.residual_history);
    assert!(out.g1_mass > 0.0);
    assert!(out.residual_history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn dc_density_without_dc_level_is_plain_neumann() {
    let grid = grid(BuiltinName::TwoCircles, 256, Weighting::Riemannian);
    let solver = ConstructiveSolver::new(&grid, KernelParams::with_depth(100_000).unwrap(), DEFAULT_BAND)
        .unwrap()
        .with_psi_pi(0.0);
    let sub = solver.subspace(0.05).unwrap();
    let zeta = sub.project(&grid.labels);
    let out = solver.dc_density(&zeta, 0.05, 0.3, 0, 500, 1e-12).unwrap();
    assert_eq!(out.alpha, 0.0);
    let g = solver.neumann_in(&sub, &zeta, 500, 1e-12).unwrap().certificate.unwrap();
    let diff: Vec<f64> = out.certificate.values.iter().zip(&g.values).map(|(a, b)| a - b).collect();
    assert!(arc_norm(&diff, &grid) <= 1e-12 * g.norm);
}

#[test]
fn infeasible_scale_names_depth_bound() {
    let grid = grid(BuiltinName::TwoCircles, 128, Weighting::Riemannian);
    let solver = ConstructiveSolver::new(&grid, KernelParams::with_depth(100_000).unwrap(), DEFAULT_BAND).unwrap();
    let err = solver.subspace(0.51).unwrap_err();
    assert!(err.is_config());
    assert!(err.to_string().contains("needs L >="));
}
