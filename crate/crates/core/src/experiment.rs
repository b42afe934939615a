//! Configuration-driven experiment runner behind the `ntk-curves` binary.
//!
//! Configuration is a flat `key = value` file (with `#` comments) plus overrides.
//! Every output file gets a `<file>.meta.json` sidecar echoing the full
//! configuration and the library version.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::certificate::{
    arc_norm, assemble_kernel, discretize, solve_certificate_pinv, weighted_norm, Certificate, ConstructiveSolver,
    DiscretizedManifold, Weighting,
};
use crate::dynamics::{lambda_max, nominal_evolve, EvolveMethod, EvolveOptions};
use crate::empirical::{cap_grid, sampled_zeta0, Network};
use crate::error::{Error, Result};
use crate::geometry::{
    builtin_geometry, chord_angle, clover_number_with, injectivity_radius, CoverCenters, write_curves_csv, BuiltinName, BuiltinOptions,
    GeometryReport, TwoCurveInstance,
};
use crate::kernel::{skeleton, skeleton_derivative, KernelParams, SkeletonTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Geometry,
    KernelTable,
    Certificate,
    Neumann,
    Dynamics,
    NtkCompare,
    CloverSweep,
    DepthSweep,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::Geometry,
        Subcommand::KernelTable,
        Subcommand::Certificate,
        Subcommand::Neumann,
        Subcommand::Dynamics,
        Subcommand::NtkCompare,
        Subcommand::CloverSweep,
        Subcommand::DepthSweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Geometry => "geometry",
            Subcommand::KernelTable => "kernel-table",
            Subcommand::Certificate => "certificate",
            Subcommand::Neumann => "neumann",
            Subcommand::Dynamics => "dynamics",
            Subcommand::NtkCompare => "ntk-compare",
            Subcommand::CloverSweep => "clover-sweep",
            Subcommand::DepthSweep => "depth-sweep",
        }
    }
}

impl std::str::FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| config_error("subcommand", format!("unknown subcommand '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructiveMethod {
    Neumann,
    DcDensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialError {
    /// zeta_0 = -f*
    Target,
    /// zeta_0 = f_theta - f* for a sampled network
    Network,
}

/// All experiment settings; see `ExperimentConfig::keys` for the accepted names.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub geometry: String,
    pub geometry_samples: usize,
    pub delta_sep: f64,
    pub scale: f64,
    pub gap: f64,
    pub polar: f64,
    pub depth: usize,
    pub width: f64,
    pub grid: usize,
    pub weighting: Weighting,
    pub dc: bool,
    pub eps: f64,
    pub delta: f64,
    pub cover_centers: CoverCenters,
    pub eps1: f64,
    pub solver: ConstructiveMethod,
    pub rank_tol: Option<f64>,
    pub band: usize,
    pub max_terms: usize,
    pub tol: f64,
    pub refine_steps: usize,
    pub tau: Option<f64>,
    pub iterations: usize,
    pub evolve_method: EvolveMethod,
    pub zeta0: InitialError,
    pub network_width: usize,
    pub ntk_widths: Vec<usize>,
    pub ntk_seeds: u64,
    pub ntk_depth: usize,
    pub ntk_dim: usize,
    pub ntk_points: usize,
    pub ntk_radius: f64,
    pub depths: Vec<usize>,
    pub clovers: Vec<u8>,
    pub table_grid: usize,
    pub table_rows: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            geometry: "two_circles".into(),
            geometry_samples: 2048,
            delta_sep: 0.05,
            scale: 0.01,
            gap: 0.3,
            polar: 0.4,
            depth: 50,
            width: 2.0,
            grid: 200,
            weighting: Weighting::PaperUniformT,
            dc: false,
            eps: 0.05,
            delta: 0.95,
            cover_centers: CoverCenters::Unrestricted,
            eps1: 0.51,
            solver: ConstructiveMethod::Neumann,
            rank_tol: None,
            band: crate::certificate::DEFAULT_BAND,
            max_terms: 500,
            tol: 1e-12,
            refine_steps: 3,
            tau: None,
            iterations: 1000,
            evolve_method: EvolveMethod::Eigen,
            zeta0: InitialError::Target,
            network_width: 1024,
            ntk_widths: vec![128, 512, 2048],
            ntk_seeds: 10,
            ntk_depth: 4,
            ntk_dim: 4,
            ntk_points: 16,
            ntk_radius: 0.5,
            depths: vec![10, 25, 50, 100],
            clovers: vec![1, 2, 3, 4],
            table_grid: SkeletonTable::DEFAULT_GRID,
            table_rows: 513,
            seed: 0,
        }
    }
}

fn config_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { location: location.into(), message: message.into() }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| format!("cannot parse list item '{}'", s.trim())))
        .collect()
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected a boolean, got '{v}'")),
    }
}

fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("cannot parse '{v}'"))
}

impl ExperimentConfig {
    pub fn keys() -> &'static [&'static str] {
        &[
            "geometry", "geometry_samples", "delta_sep", "scale", "gap", "polar", "depth", "width", "grid",
            "weighting", "dc", "eps", "delta", "cover_centers", "eps1", "solver", "rank_tol", "band", "max_terms", "tol",
            "refine_steps", "tau", "iterations", "evolve_method", "zeta0", "network_width", "ntk_widths",
            "ntk_seeds", "ntk_depth", "ntk_dim", "ntk_points", "ntk_radius", "depths", "clovers", "table_grid",
            "table_rows", "seed",
        ]
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "geometry" => {
                v.parse::<BuiltinName>().map_err(|e| e.to_string())?;
                self.geometry = v.to_string();
            }
            "geometry_samples" => self.geometry_samples = num(v)?,
            "delta_sep" => self.delta_sep = num(v)?,
            "scale" => self.scale = num(v)?,
            "gap" => self.gap = num(v)?,
            "polar" => self.polar = num(v)?,
            "depth" => self.depth = num(v)?,
            "width" => self.width = num(v)?,
            "grid" => self.grid = num(v)?,
            "weighting" => self.weighting = v.parse().map_err(|e: Error| e.to_string())?,
            "dc" => self.dc = parse_bool(v)?,
            "eps" => self.eps = num(v)?,
            "delta" => self.delta = num(v)?,
            "cover_centers" => self.cover_centers = v.parse().map_err(|e: Error| e.to_string())?,
            "eps1" => self.eps1 = num(v)?,
            "solver" => {
                self.solver = match v {
                    "neumann" => ConstructiveMethod::Neumann,
                    "dc_density" => ConstructiveMethod::DcDensity,
                    _ => return Err(format!("unknown solver '{v}'; expected neumann or dc_density")),
                }
            }
            "rank_tol" => self.rank_tol = if v == "auto" { None } else { Some(num(v)?) },
            "band" => self.band = num(v)?,
            "max_terms" => self.max_terms = num(v)?,
            "tol" => self.tol = num(v)?,
            "refine_steps" => self.refine_steps = num(v)?,
            "tau" => self.tau = if v == "auto" { None } else { Some(num(v)?) },
            "iterations" => self.iterations = num(v)?,
            "evolve_method" => {
                self.evolve_method = match v {
                    "eigen" => EvolveMethod::Eigen,
                    "explicit" => EvolveMethod::Explicit,
                    _ => return Err(format!("unknown evolve_method '{v}'; expected eigen or explicit")),
                }
            }
            "zeta0" => {
                self.zeta0 = match v {
                    "target" => InitialError::Target,
                    "network" => InitialError::Network,
                    _ => return Err(format!("unknown zeta0 '{v}'; expected target or network")),
                }
            }
            "network_width" => self.network_width = num(v)?,
            "ntk_widths" => self.ntk_widths = parse_list(v)?,
            "ntk_seeds" => self.ntk_seeds = num(v)?,
            "ntk_depth" => self.ntk_depth = num(v)?,
            "ntk_dim" => self.ntk_dim = num(v)?,
            "ntk_points" => self.ntk_points = num(v)?,
            "ntk_radius" => self.ntk_radius = num(v)?,
            "depths" => self.depths = parse_list(v)?,
            "clovers" => self.clovers = parse_list(v)?,
            "table_grid" => self.table_grid = num(v)?,
            "table_rows" => self.table_rows = num(v)?,
            "seed" => self.seed = num(v)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Parses a config file body; `origin` names it in diagnostics.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = format!("{origin}:{}", n + 1);
            let Some((k, v)) = line.split_once('=') else {
                return Err(config_error(location, format!("expected key = value, got '{line}'")));
            };
            self.set(k, v).map_err(|m| config_error(format!("{location} ({})", k.trim()), m))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(config_error("--set", format!("expected key=value, got '{kv}'")));
        };
        self.set(k, v).map_err(|m| config_error(format!("--set {}", k.trim()), m))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(config_error(key.to_string(), msg));
        if self.depth < 2 {
            return bad("depth", format!("depth must be at least 2, got {}", self.depth));
        }
        if !(self.width > 0.0) {
            return bad("width", "width must be positive".into());
        }
        if self.grid < 16 {
            return bad("grid", format!("grid must be at least 16, got {}", self.grid));
        }
        if self.geometry_samples < 64 {
            return bad("geometry_samples", "at least 64 samples per curve are needed".into());
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps", "eps must lie in (0, 1)".into());
        }
        if !(self.eps1 > 0.0 && self.eps1 < 1.0) {
            return bad("eps1", "eps1 must lie in (0, 1)".into());
        }
        if !(self.delta > 0.0 && self.delta <= 1.0 - self.eps + 1e-12) {
            return bad("delta", "delta must lie in (0, 1 - eps]".into());
        }
        if self.ntk_widths.is_empty() || self.ntk_widths.contains(&0) {
            return bad("ntk_widths", "widths must be positive".into());
        }
        if self.ntk_dim < 3 || self.ntk_points < 2 {
            return bad("ntk_dim", "need dimension >= 3 and at least 2 points".into());
        }
        if self.depths.iter().any(|&l| l < 2) || self.depths.is_empty() {
            return bad("depths", "every depth must be at least 2".into());
        }
        if self.clovers.iter().any(|&k| !(1..=4).contains(&k)) {
            return bad("clovers", "clover indices must lie in 1..=4".into());
        }
        if self.table_grid < 64 || self.table_rows < 2 {
            return bad("table_grid", "table needs at least 64 knots and 2 rows".into());
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0) {
                return bad("tau", "tau must be nonnegative".into());
            }
        }
        Ok(())
    }

    fn builtin_options(&self) -> BuiltinOptions {
        BuiltinOptions {
            delta_sep: self.delta_sep,
            scale: self.scale,
            gap: self.gap,
            polar: self.polar,
            samples: self.geometry_samples,
        }
    }

    fn params(&self, depth: usize) -> Result<KernelParams> {
        KernelParams::new(depth, self.width)
    }

    /// All settings as strings, in key order.
    pub fn echo(&self) -> BTreeMap<String, serde_json::Value> {
        let v = serde_json::to_value(self).expect("config serializes");
        v.as_object().expect("object").clone().into_iter().collect()
    }
}

/// Files written by one run.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

struct Writer<'a> {
    dir: &'a Path,
    subcommand: Subcommand,
    config: &'a ExperimentConfig,
    report: RunReport,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, body: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        let meta = json!({
            "file": name,
            "subcommand": self.subcommand.name(),
            "library": "ntk-curves",
            "version": VERSION,
            "config": self.config.echo(),
        });
        fs::write(self.dir.join(format!("{name}.meta.json")), serde_json::to_vec_pretty(&meta)?)?;
        self.report.files.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_vec_pretty(value)?;
        body.push(b'\n');
        self.write(name, &body)
    }
}

/// Runs one subcommand, writing its artifacts into `out`.
pub fn run(subcommand: Subcommand, config: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    config.validate()?;
    fs::create_dir_all(out)?;
    let mut w = Writer { dir: out, subcommand, config, report: RunReport::default() };
    match subcommand {
        Subcommand::Geometry => run_geometry(&mut w)?,
        Subcommand::KernelTable => run_kernel_table(&mut w)?,
        Subcommand::Certificate => run_certificate(&mut w)?,
        Subcommand::Neumann => run_neumann(&mut w)?,
        Subcommand::Dynamics => run_dynamics(&mut w)?,
        Subcommand::NtkCompare => run_ntk_compare(&mut w)?,
        Subcommand::CloverSweep => run_clover_sweep(&mut w)?,
        Subcommand::DepthSweep => run_depth_sweep(&mut w)?,
    }
    Ok(w.report)
}

fn instance(config: &ExperimentConfig) -> Result<TwoCurveInstance> {
    let name: BuiltinName = config.geometry.parse()?;
    builtin_geometry(name, &config.builtin_options())
}

fn run_geometry(w: &mut Writer) -> Result<()> {
    let inst = instance(w.config)?;
    let report = GeometryReport::compute_with(&inst, w.config.eps, w.config.delta, w.config.cover_centers)?;
    w.write_json("geometry.json", &report)?;
    let mut buf = Vec::new();
    write_curves_csv(&inst, &mut buf)?;
    w.write("curves.csv", &buf)
}

fn run_kernel_table(w: &mut Writer) -> Result<()> {
    let params = w.config.params(w.config.depth)?;
    let table = SkeletonTable::new(params, w.config.table_grid)?;
    let rows = w.config.table_rows;
    let mut body = String::from("t,psi,psi_dc,dpsi\n");
    for i in 0..rows {
        let t = std::f64::consts::PI * i as f64 / (rows - 1) as f64;
        let d = if params.depth() <= crate::certificate::TABLE_DEPTH {
            skeleton_derivative(t, 1, &params)?.value
        } else {
            f64::NAN
        };
        let psi = if params.depth() <= crate::certificate::TABLE_DEPTH { skeleton(t, &params) } else { table.eval_full(t) };
        writeln!(body, "{},{},{},{}", fmt_f64(t), fmt_f64(psi), fmt_f64(table.eval(t)), fmt_f64(d)).unwrap();
    }
    w.write("kernel_table.csv", body.as_bytes())?;
    w.write_json(
        "kernel_table.json",
        &json!({
            "L": params.depth(),
            "n": params.width(),
            "knots": table.grid().len(),
            "psi_pi": table.psi_at_pi(),
            "psi_dc_peak": table.eval(0.0),
            "refinement_error": table.refinement_error(),
        }),
    )
}

fn certificate_csv(grid: &DiscretizedManifold, cert: &Certificate, zeta: &[f64]) -> String {
    let mut body = String::from("component,t,s,g,zeta,residual\n");
    for i in 0..grid.len() {
        writeln!(
            body,
            "{},{},{},{},{},{}",
            grid.labels[i] as i32,
            fmt_f64(grid.t[i]),
            fmt_f64(grid.s[i]),
            fmt_f64(cert.values[i]),
            fmt_f64(zeta[i]),
            fmt_f64(cert.residual[i])
        )
        .unwrap();
    }
    body
}

#[derive(Serialize)]
struct Summary {
    #[serde(rename = "L")]
    l: usize,
    n: f64,
    #[serde(rename = "M")]
    m: usize,
    mode: String,
    cert_norm: f64,
    residual_norm: f64,
    contraction: Option<f64>,
    clover: usize,
    delta_eps: f64,
    kappa: f64,
    method: String,
    measure: crate::certificate::Measure,
    max_abs_g: f64,
}

fn geometry_numbers(inst: &TwoCurveInstance, config: &ExperimentConfig) -> Result<(usize, f64, f64)> {
    let clover = clover_number_with(inst, config.eps, config.delta, config.cover_centers)?.value;
    let delta_eps = injectivity_radius(inst, config.eps)?.value;
    Ok((clover, delta_eps, inst.kappa()))
}

fn pinv_certificate(
    inst: &TwoCurveInstance,
    config: &ExperimentConfig,
    depth: usize,
) -> Result<(DiscretizedManifold, Certificate)> {
    let grid = discretize(inst, config.grid, config.weighting)?;
    let kernel = assemble_kernel(&grid, &config.params(depth)?, config.dc)?;
    let cert = solve_certificate_pinv(&kernel, &grid, &grid.labels, config.rank_tol)?;
    Ok((grid, cert))
}

fn run_certificate(w: &mut Writer) -> Result<()> {
    let inst = instance(w.config)?;
    let (grid, cert) = pinv_certificate(&inst, w.config, w.config.depth)?;
    w.write("certificate.csv", certificate_csv(&grid, &cert, &grid.labels).as_bytes())?;
    let (clover, delta_eps, kappa) = geometry_numbers(&inst, w.config)?;
    w.write_json(
        "summary.json",
        &Summary {
            l: w.config.depth,
            n: w.config.width,
            m: w.config.grid,
            mode: grid.mode.to_string(),
            cert_norm: cert.norm,
            residual_norm: cert.residual_norm,
            contraction: None,
            clover,
            delta_eps,
            kappa,
            method: cert.method.clone(),
            measure: cert.measure,
            max_abs_g: cert.max_abs(),
        },
    )
}

fn run_neumann(w: &mut Writer) -> Result<()> {
    let config = w.config;
    let inst = instance(config)?;
    let grid = discretize(&inst, config.grid, Weighting::Riemannian)?;
    let params = config.params(config.depth)?;
    let solver = ConstructiveSolver::new(&grid, params, config.band)?;
    let (cert, zeta, contraction, extra) = match config.solver {
        ConstructiveMethod::Neumann => {
            let sub = solver.subspace(config.eps)?;
            let zeta = sub.project(&grid.labels);
            let out = solver.neumann_in(&sub, &zeta, config.max_terms, config.tol)?;
            let Some(cert) = out.certificate.clone() else {
                return Err(Error::Numeric(format!(
                    "Neumann series diverges: contraction estimate {:.6}",
                    out.contraction
                )));
            };
            let extra = json!({ "terms": out.terms, "dimension": out.dimension, "projected_residual": out.projected_residual });
            (cert, zeta, Some(out.contraction), extra)
        }
        ConstructiveMethod::DcDensity => {
            let out = solver.dc_density(&grid.labels, config.eps, config.eps1, config.refine_steps, config.max_terms, config.tol)?;
            let extra = json!({ "alpha": out.alpha, "g1_mass": out.g1_mass, "residual_history": out.residual_history });
            (out.certificate, grid.labels.clone(), None, extra)
        }
    };
    w.write("certificate.csv", certificate_csv(&grid, &cert, &zeta).as_bytes())?;
    let (clover, delta_eps, kappa) = geometry_numbers(&inst, config)?;
    let summary = Summary {
        l: config.depth,
        n: config.width,
        m: config.grid,
        mode: grid.mode.to_string(),
        cert_norm: cert.norm,
        residual_norm: cert.residual_norm,
        contraction,
        clover,
        delta_eps,
        kappa,
        method: cert.method.clone(),
        measure: cert.measure,
        max_abs_g: cert.max_abs(),
    };
    let mut value = serde_json::to_value(&summary)?;
    value["details"] = extra;
    value["zeta_norm"] = json!(arc_norm(&zeta, &grid));
    w.write_json("summary.json", &value)
}

fn run_dynamics(w: &mut Writer) -> Result<()> {
    let config = w.config;
    let inst = instance(config)?;
    let grid = discretize(&inst, config.grid, config.weighting)?;
    let kernel = assemble_kernel(&grid, &config.params(config.depth)?, config.dc)?;
    let lmax = lambda_max(&kernel, &grid)?;
    let tau = config.tau.unwrap_or(0.5 / lmax);
    let fstar = grid.labels.clone();
    let zeta0: Vec<f64> = match config.zeta0 {
        InitialError::Target => fstar.iter().map(|v| -v).collect(),
        InitialError::Network => {
            let net = Network::gaussian(config.depth, config.network_width, inst.dim(), config.seed)?;
            sampled_zeta0(&net, &grid.points, &fstar, &grid.mu_weights())?.zeta0
        }
    };
    let traj = nominal_evolve(
        &grid,
        &kernel,
        &zeta0,
        tau,
        config.iterations,
        EvolveOptions { method: config.evolve_method, monotone: true, target: Some(&fstar) },
    )?;
    let mut body = String::from("iter,error_norm,margin,separated\n");
    for r in &traj.records {
        writeln!(body, "{},{},{},{}", r.iter, fmt_f64(r.error_norm), fmt_f64(r.margin), r.separated).unwrap();
    }
    w.write("dynamics.csv", body.as_bytes())?;
    w.write_json(
        "dynamics.json",
        &json!({
            "tau": tau,
            "lambda_max": lmax,
            "first_separated": traj.first_separated(),
            "final_error_norm": weighted_norm(&traj.final_error, &grid),
            "note": "nominal kernel dynamics in place of finite-width training",
        }),
    )
}

/// Sup over grid pairs of |empirical - analytic| / Theta(x, x) for one seed.
pub fn ntk_sup_relative_error(points: &[Vec<f64>], depth: usize, width: usize, seed: u64) -> Result<f64> {
    let dim = points[0].len();
    let params = KernelParams::new(depth, width as f64)?;
    let net = Network::gaussian(depth, width, dim, seed)?;
    let gram = net.ntk_gram(points)?;
    let mut worst: f64 = 0.0;
    for i in 0..points.len() {
        for j in 0..points.len() {
            let t = chord_angle(&points[i], &points[j]);
            worst = worst.max((gram[(i, j)] - skeleton(t, &params)).abs());
        }
    }
    Ok(worst / params.peak())
}

fn run_ntk_compare(w: &mut Writer) -> Result<()> {
    let config = w.config;
    let points = cap_grid(config.ntk_dim, config.ntk_points, config.ntk_radius);
    let mut body = String::from("n,seed,sup_rel_err\n");
    let mut medians = Vec::new();
    for &width in &config.ntk_widths {
        let mut errs = Vec::new();
        for k in 0..config.ntk_seeds {
            let seed = config.seed.wrapping_add(k);
            let e = ntk_sup_relative_error(&points, config.ntk_depth, width, seed)?;
            writeln!(body, "{width},{seed},{}", fmt_f64(e)).unwrap();
            errs.push(e);
        }
        medians.push(json!({ "n": width, "median": median(&mut errs) }));
    }
    w.write("ntk_compare.csv", body.as_bytes())?;
    w.write_json("ntk_compare.json", &json!({ "medians": medians }))
}

/// Shortest round-trip float text, switching to exponent form for very small or large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn run_clover_sweep(w: &mut Writer) -> Result<()> {
    let config = w.config;
    let mut body = String::from("k,clover,cert_norm,residual_norm,max_abs_g,delta_eps,kappa\n");
    for &k in &config.clovers {
        let inst = builtin_geometry(BuiltinName::Clover(k), &config.builtin_options())?;
        let (grid, cert) = pinv_certificate(&inst, config, config.depth)?;
        let (clover, delta_eps, kappa) = geometry_numbers(&inst, config)?;
        writeln!(
            body,
            "{k},{clover},{},{},{},{},{}",
            fmt_f64(cert.norm),
            fmt_f64(cert.residual_norm),
            fmt_f64(cert.max_abs()),
            fmt_f64(delta_eps),
            fmt_f64(kappa)
        )
        .unwrap();
        w.write(&format!("certificate_clover{k}.csv"), certificate_csv(&grid, &cert, &grid.labels).as_bytes())?;
        let mut curves = Vec::new();
        write_curves_csv(&inst, &mut curves)?;
        w.write(&format!("curves_clover{k}.csv"), &curves)?;
    }
    w.write("clover_sweep.csv", body.as_bytes())
}

fn run_depth_sweep(w: &mut Writer) -> Result<()> {
    let config = w.config;
    let inst = instance(config)?;
    let mut body = String::from("L,cert_norm,residual_norm,max_abs_g\n");
    for &depth in &config.depths {
        let (grid, cert) = pinv_certificate(&inst, config, depth)?;
        writeln!(body, "{depth},{},{},{}", fmt_f64(cert.norm), fmt_f64(cert.residual_norm), fmt_f64(cert.max_abs())).unwrap();
        w.write(&format!("certificate_L{depth}.csv"), certificate_csv(&grid, &cert, &grid.labels).as_bytes())?;
    }
    w.write("depth_sweep.csv", body.as_bytes())?;
    let mut curves = Vec::new();
    write_curves_csv(&inst, &mut curves)?;
    w.write("curves.csv", &curves)
}

/// Builds a configuration from an optional file, overrides and a seed.
pub fn load_config(path: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    if let Some(p) = path {
        let text = fs::read_to_string(p)
            .map_err(|e| config_error(p.display().to_string(), format!("cannot read config: {e}")))?;
        config.apply_text(&text, &p.display().to_string())?;
    }
    for kv in overrides {
        config.apply_override(kv)?;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_overrides() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# comment\ndepth = 12\ndepths = 4, 8\nweighting = riemannian\n", "cfg").unwrap();
        assert_eq!(c.depth, 12);
        assert_eq!(c.depths, vec![4, 8]);
        assert_eq!(c.weighting, Weighting::Riemannian);
        c.apply_override("tau=0.25").unwrap();
        assert_eq!(c.tau, Some(0.25));
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let mut c = ExperimentConfig::default();
        let e = c.apply_text("depth = 4\nbogus = 1\n", "cfg").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("cfg:2") && msg.contains("bogus"), "{msg}");
        assert!(e.is_config());
        let e = c.apply_text("depth = four\n", "cfg").unwrap_err();
        assert!(e.to_string().contains("cfg:1 (depth)"));
        let mut bad = ExperimentConfig::default();
        bad.depth = 1;
        assert!(bad.validate().unwrap_err().is_config());
    }

    #[test]
    fn every_key_is_settable() {
        let c = ExperimentConfig::default();
        let echo = c.echo();
        for key in ExperimentConfig::keys() {
            assert!(echo.contains_key(*key), "{key}");
        }
        assert_eq!(echo.len(), ExperimentConfig::keys().len());
    }
}
