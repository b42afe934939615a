//! Runs a subcommand from a config string, the same path the binary takes.
use ntk_curves::experiment::{run, ExperimentConfig, Subcommand};

const CONFIG: &str = "
# pseudoinverse certificate on the two-fold clover
geometry = clover(2)
depth = 50
grid = 200
weighting = paper_uniform_t
";

fn main() -> ntk_curves::Result<()> {
    let mut config = ExperimentConfig::default();
    config.apply_text(CONFIG, "inline")?;
    let out = std::env::temp_dir().join("ntk_curves_config_run");
    let report = run(Subcommand::Certificate, &config, &out)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    println!("{}", std::fs::read_to_string(out.join("summary.json"))?);
    Ok(())
}
