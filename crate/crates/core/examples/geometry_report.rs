//! Geometric summary of each builtin instance, plus a curve CSV for one of them.
use ntk_curves::geometry::{builtin_geometry, write_curves_csv, BuiltinName, BuiltinOptions, GeometryReport};

fn main() -> ntk_curves::Result<()> {
    let opts = BuiltinOptions::default();
    let names = [
        BuiltinName::TwoCircles,
        BuiltinName::Fig1Like,
        BuiltinName::Clover(1),
        BuiltinName::Clover(4),
    ];
    for name in names {
        let inst = builtin_geometry(name, &opts)?;
        let r = GeometryReport::compute(&inst, 1.0 / 20.0, 19.0 / 20.0)?;
        println!(
            "{:<11} len {:8.4} kappa {:9.3} Delta_eps {:.4e} clover {} min cross angle {:.4} max angle {:.4}",
            r.name, r.length, r.kappa, r.delta_eps, r.clover, r.cross_min_angle, r.max_angle
        );
    }
    let path = std::env::temp_dir().join("fig1_like_curves.csv");
    let inst = builtin_geometry(BuiltinName::Fig1Like, &opts)?;
    write_curves_csv(&inst, std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
