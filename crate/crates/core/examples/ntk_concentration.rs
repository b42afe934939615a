//! Sup relative deviation of the empirical tangent kernel from the limiting kernel.
use ntk_curves::empirical::{cap_grid, Network};
use ntk_curves::geometry::chord_angle;
use ntk_curves::kernel::{skeleton, KernelParams};

fn main() -> ntk_curves::Result<()> {
    let mut args = std::env::args().skip(1);
    let radius: f64 = args.next().map_or(0.5, |s| s.parse().expect("radius"));
    let depth: usize = args.next().map_or(4, |s| s.parse().expect("depth"));
    let dim = 4;
    let points = cap_grid(dim, 16, radius);
    for width in [128usize, 512, 2048] {
        let params = KernelParams::new(depth, width as f64)?;
        let mut errs: Vec<f64> = (0..10u64)
            .map(|seed| {
                let net = Network::gaussian(depth, width, dim, seed)?;
                let gram = net.ntk_gram(&points)?;
                let mut worst: f64 = 0.0;
                for i in 0..points.len() {
                    for j in 0..points.len() {
                        let t = chord_angle(&points[i], &points[j]);
                        worst = worst.max((gram[(i, j)] - skeleton(t, &params)).abs());
                    }
                }
                Ok(worst / params.peak())
            })
            .collect::<ntk_curves::Result<_>>()?;
        errs.sort_by(f64::total_cmp);
        println!("n = {width:5}: median sup relative error {:.4} (min {:.4}, max {:.4})", 0.5 * (errs[4] + errs[5]), errs[0], errs[9]);
    }
    Ok(())
}
