//! The `shockpolar` command-line tool.
//!
//! Every subcommand reads the same upstream description, either from flags or
//! from a JSON file given with `--config` (flags win). Data files are written
//! to `--out`, falling back to `$SHOCKPOLAR_OUT_DIR` and then `.`. Data files
//! depend only on the configuration; run metadata goes to `manifest.json`.
//!
//! Exit codes: `0` success, `2` invalid configuration, `3` physical-domain
//! error, `4` numerical failure. Failures print one JSON line on stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::duct::{self, DuctError, DuctProblem, DuctStatus, InitialFront};
use crate::gas::{self, GasConstants};
use crate::lagrangian;
use crate::mach::{self, MachError};
use crate::polar::{self, Branch, PolarError, UpstreamState};
use crate::svg::{Marker, Plot, Series};

pub const OUT_DIR_ENV: &str = "SHOCKPOLAR_OUT_DIR";

/// Version of the CSV and JSON layouts described in `docs/formats.md`.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Physical(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) => 2,
            CliError::Physical(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::InvalidConfig(_) => "invalid-config",
            CliError::Physical(_) => "physical-domain",
            CliError::Numerical(_) => "numerical-failure",
        }
    }

    /// One-line JSON diagnostic.
    pub fn diagnostic(&self) -> String {
        json!({
            "level": "error",
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl From<PolarError> for CliError {
    fn from(e: PolarError) -> Self {
        match e {
            PolarError::Bracket(_) | PolarError::Degenerate(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Physical(e.to_string()),
        }
    }
}

impl From<MachError> for CliError {
    fn from(e: MachError) -> Self {
        match e {
            MachError::Polar(p) => p.into(),
            _ => CliError::Physical(e.to_string()),
        }
    }
}

impl From<DuctError> for CliError {
    fn from(e: DuctError) -> Self {
        match e {
            DuctError::InvalidProblem(_) => CliError::InvalidConfig(e.to_string()),
            DuctError::ExitNotSubsonic { .. } => CliError::Physical(e.to_string()),
            DuctError::Polar(p) => p.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Polar,
    Normal,
    Oblique,
    Mach,
    Coeffs,
    Duct,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Polar => "polar",
            Command::Normal => "normal",
            Command::Oblique => "oblique",
            Command::Mach => "mach",
            Command::Coeffs => "coeffs",
            Command::Duct => "duct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpstreamSpec {
    pub mach0: f64,
    pub p0: f64,
    pub rho0: f64,
    #[serde(default)]
    pub theta0_deg: f64,
}

impl Default for UpstreamSpec {
    fn default() -> Self {
        Self {
            mach0: 2.0,
            p0: 1.0,
            rho0: 1.0,
            theta0_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuctSpec {
    /// Defaults to the normal-shock pressure.
    pub p_exit: Option<f64>,
    pub anchor: f64,
    pub nx: usize,
    pub ny: usize,
    pub omega: f64,
    pub max_iters: usize,
    pub tol_front: f64,
    pub tol_field: f64,
    pub amplitude: f64,
    pub mode: u32,
}

impl Default for DuctSpec {
    fn default() -> Self {
        Self {
            p_exit: None,
            anchor: 0.0,
            nx: 64,
            ny: 64,
            omega: 0.5,
            max_iters: 500,
            tol_front: 1e-8,
            tol_field: 1e-8,
            amplitude: 0.0,
            mode: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec![Format::Csv, Format::Json, Format::Svg],
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub gas: GasConstants,
    pub upstream: UpstreamSpec,
    pub points: usize,
    pub theta_w_deg: Option<f64>,
    pub p1: Option<f64>,
    pub duct: DuctSpec,
    pub output: OutputSpec,
}

/// Same shape as [`RunConfig`] with every field optional, as read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    command: Option<Command>,
    gas: Option<GasFile>,
    upstream: Option<UpstreamFile>,
    points: Option<usize>,
    theta_w_deg: Option<f64>,
    p1: Option<f64>,
    duct: Option<DuctFile>,
    output: Option<OutputFile>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GasFile {
    gamma: Option<f64>,
    tol_state: Option<f64>,
    tol_alg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct UpstreamFile {
    mach0: Option<f64>,
    p0: Option<f64>,
    rho0: Option<f64>,
    theta0_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DuctFile {
    p_exit: Option<f64>,
    anchor: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
    omega: Option<f64>,
    max_iters: Option<usize>,
    tol_front: Option<f64>,
    tol_field: Option<f64>,
    amplitude: Option<f64>,
    mode: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    dir: Option<PathBuf>,
    formats: Option<Vec<Format>>,
}

#[derive(Debug, Parser)]
#[command(
    name = "shockpolar",
    version,
    about = "Shock polars, Mach configurations and transonic duct shocks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Sample both branches of the shock polar.
    Polar {
        #[command(flatten)]
        common: CommonArgs,
        /// Points per branch.
        #[arg(long)]
        points: Option<usize>,
    },
    /// State behind the normal shock.
    Normal {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Weak and strong shocks on a wedge.
    Oblique {
        #[command(flatten)]
        common: CommonArgs,
        /// Wedge half-angle in degrees.
        #[arg(long = "theta-deg")]
        theta_deg: Option<f64>,
    },
    /// Flat Mach configuration for an incident shock of pressure p1.
    Mach {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        p1: Option<f64>,
    },
    /// Elliptic coefficients along the subsonic arc of the polar.
    Coeffs {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Free-boundary shock in a straight duct.
    Duct {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        duct: DuctArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mach0: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Upstream flow angle in degrees.
    #[arg(long = "theta0-deg", allow_hyphen_values = true)]
    pub theta0_deg: Option<f64>,
    /// Output directory [default: $SHOCKPOLAR_OUT_DIR or .]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DuctArgs {
    #[arg(long = "p-exit")]
    pub p_exit: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    #[arg(long = "tol-front")]
    pub tol_front: Option<f64>,
    #[arg(long = "tol-field")]
    pub tol_field: Option<f64>,
    /// Amplitude of the initial sinusoidal front perturbation.
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub mode: Option<u32>,
}

fn read_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::InvalidConfig(format!("{}: {e}", path.display())))
}

/// Merges defaults, the config file and flags, in increasing priority.
pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, common, points, theta, p1, duct_args) = match cli.command {
        CliCommand::Polar { common, points } => (Command::Polar, common, points, None, None, None),
        CliCommand::Normal { common } => (Command::Normal, common, None, None, None, None),
        CliCommand::Oblique { common, theta_deg } => (Command::Oblique, common, None, theta_deg, None, None),
        CliCommand::Mach { common, p1 } => (Command::Mach, common, None, None, p1, None),
        CliCommand::Coeffs { common, points } => (Command::Coeffs, common, points, None, None, None),
        CliCommand::Duct { common, duct } => (Command::Duct, common, None, None, None, Some(duct)),
    };
    let file = match &common.config {
        Some(path) => read_config_file(path)?,
        None => ConfigFile::default(),
    };
    if let Some(c) = file.command {
        if c != command {
            return Err(CliError::InvalidConfig(format!(
                "config file is for '{}' but '{}' was requested",
                c.as_str(),
                command.as_str()
            )));
        }
    }

    let gf = file.gas.unwrap_or_default();
    let air = GasConstants::air();
    let gas = GasConstants {
        gamma: common.gamma.or(gf.gamma).unwrap_or(air.gamma),
        tol_state: gf.tol_state.unwrap_or(air.tol_state),
        tol_alg: gf.tol_alg.unwrap_or(air.tol_alg),
    };

    let uf = file.upstream.unwrap_or_default();
    let ud = UpstreamSpec::default();
    let upstream = UpstreamSpec {
        mach0: common.mach0.or(uf.mach0).unwrap_or(ud.mach0),
        p0: common.p0.or(uf.p0).unwrap_or(ud.p0),
        rho0: common.rho0.or(uf.rho0).unwrap_or(ud.rho0),
        theta0_deg: common.theta0_deg.or(uf.theta0_deg).unwrap_or(ud.theta0_deg),
    };

    let df = file.duct.unwrap_or_default();
    let da = duct_args.unwrap_or_default();
    let dd = DuctSpec::default();
    let duct = DuctSpec {
        p_exit: da.p_exit.or(df.p_exit),
        anchor: da.anchor.or(df.anchor).unwrap_or(dd.anchor),
        nx: da.nx.or(df.nx).unwrap_or(dd.nx),
        ny: da.ny.or(df.ny).unwrap_or(dd.ny),
        omega: da.omega.or(df.omega).unwrap_or(dd.omega),
        max_iters: da.max_iters.or(df.max_iters).unwrap_or(dd.max_iters),
        tol_front: da.tol_front.or(df.tol_front).unwrap_or(dd.tol_front),
        tol_field: da.tol_field.or(df.tol_field).unwrap_or(dd.tol_field),
        amplitude: da.amplitude.or(df.amplitude).unwrap_or(dd.amplitude),
        mode: da.mode.or(df.mode).unwrap_or(dd.mode),
    };

    let of = file.output.unwrap_or_default();
    let dir = common
        .out
        .or(of.dir)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    let mut formats = common
        .formats
        .or(of.formats)
        .unwrap_or_else(|| OutputSpec::default().formats);
    formats.sort();
    formats.dedup();

    let config = RunConfig {
        command,
        gas,
        upstream,
        points: points.or(file.points).unwrap_or(201),
        theta_w_deg: theta.or(file.theta_w_deg),
        p1: p1.or(file.p1),
        duct,
        output: OutputSpec { dir, formats },
    };
    validate(&config)?;
    Ok(config)
}

/// Checks everything that can be checked before computing.
pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::InvalidConfig(m));
    cfg.gas.validate().map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let u = &cfg.upstream;
    if !(u.mach0.is_finite() && u.mach0 > 1.0) {
        return bad(format!("mach0 must exceed 1, got {}", u.mach0));
    }
    if !(u.p0 > 0.0 && u.p0.is_finite() && u.rho0 > 0.0 && u.rho0.is_finite()) {
        return bad("p0 and rho0 must be positive".into());
    }
    if !(u.theta0_deg.is_finite() && u.theta0_deg.abs() < 60.0) {
        return bad(format!("theta0_deg must lie in (-60, 60), got {}", u.theta0_deg));
    }
    if cfg.output.formats.is_empty() {
        return bad("no output formats selected".into());
    }
    match cfg.command {
        Command::Polar | Command::Coeffs => {
            if cfg.points < 2 || cfg.points > 1_000_000 {
                return bad(format!("points must lie in [2, 1e6], got {}", cfg.points));
            }
        }
        Command::Oblique => match cfg.theta_w_deg {
            Some(t) if t.is_finite() && t > 0.0 && t < 90.0 => {}
            Some(t) => return bad(format!("theta-deg must lie in (0, 90), got {t}")),
            None => return bad("oblique needs --theta-deg".into()),
        },
        Command::Mach => match cfg.p1 {
            Some(p1) if p1.is_finite() && p1 >= u.p0 => {}
            Some(p1) => return bad(format!("p1 must be at least p0 = {}, got {p1}", u.p0)),
            None => return bad("mach needs --p1".into()),
        },
        Command::Duct => {
            let d = &cfg.duct;
            if u.theta0_deg != 0.0 {
                return bad("the duct requires theta0_deg = 0".into());
            }
            if d.nx < 8 || d.ny < 8 || d.nx > 1024 || d.ny > 1024 {
                return bad(format!("duct grid {}x{} outside [8, 1024]^2", d.nx, d.ny));
            }
            if !(d.omega > 0.0 && d.omega <= 1.0) {
                return bad(format!("omega must lie in (0, 1], got {}", d.omega));
            }
            if !(d.anchor.abs() + d.amplitude.abs() < 1.0) {
                return bad("initial front must lie inside (-1, 1)".into());
            }
            if d.max_iters == 0 || !(d.tol_front > 0.0 && d.tol_field > 0.0) {
                return bad("max_iters and tolerances must be positive".into());
            }
            if let Some(p) = d.p_exit {
                if !(p.is_finite() && p > 0.0) {
                    return bad(format!("p-exit must be positive, got {p}"));
                }
            }
        }
        Command::Normal => {}
    }
    Ok(())
}

impl RunConfig {
    pub fn upstream_state(&self) -> Result<UpstreamState, CliError> {
        let u = &self.upstream;
        UpstreamState::from_mach(u.mach0, u.p0, u.rho0, u.theta0_deg.to_radians(), &self.gas)
            .map_err(|e| CliError::InvalidConfig(e.to_string()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Files produced by one run, in memory.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    /// Set when the computation finished but did not succeed.
    pub failure: Option<CliError>,
}

impl Outputs {
    fn add(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }
}

/// Fixed float format used in every CSV file.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_text(v: &Value) -> String {
    let mut v = v.clone();
    if let Value::Object(map) = &mut v {
        map.insert("format_version".into(), FORMAT_VERSION.into());
    }
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn csv(header: &str, rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::with_capacity(rows.len() * 64));
    w.write_record(header.split(',')).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii fields")
}

fn upstream_json(up: &UpstreamState, gas: &GasConstants) -> Value {
    json!({
        "p0": up.p0,
        "u0": up.u0,
        "rho0": up.rho0,
        "theta0": up.theta0,
        "mach0": up.mach(gas),
    })
}

fn state_json(s: &gas::FlowState, g: &GasConstants) -> Value {
    json!({
        "p": s.p,
        "u": s.u,
        "v": s.v,
        "rho": s.rho,
        "mach": gas::mach(s, g).unwrap_or(f64::NAN),
        "entropy": gas::entropy_measure(s, g),
        "bernoulli": gas::bernoulli(s, g),
    })
}

fn shock_json(sol: &polar::ShockSolution, g: &GasConstants) -> Value {
    json!({
        "branch": sol.point.branch,
        "p": sol.point.p,
        "w": sol.point.w,
        "alpha": sol.alpha,
        "front_slope": sol.front_slope,
        "kind": sol.kind,
        "downstream": state_json(&sol.downstream, g),
    })
}

/// Runs one command and renders its files without touching the disk.
pub fn compute(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let up = cfg.upstream_state()?;
    let g = &cfg.gas;
    let mut out = Outputs::default();
    match cfg.command {
        Command::Polar => polar_outputs(cfg, &up, g, &mut out)?,
        Command::Normal => normal_outputs(cfg, &up, g, &mut out)?,
        Command::Oblique => oblique_outputs(cfg, &up, g, &mut out)?,
        Command::Mach => mach_outputs(cfg, &up, g, &mut out)?,
        Command::Coeffs => coeffs_outputs(cfg, &up, g, &mut out)?,
        Command::Duct => duct_outputs(cfg, &up, g, &mut out)?,
    }
    Ok(out)
}

fn polar_series(up: &UpstreamState, g: &GasConstants, n: usize, label: &str) -> Result<Vec<Series>, CliError> {
    let pts = polar::sample_polar(up, g, n)?;
    let (plus, minus) = pts.split_at(n);
    let mut loop_pts: Vec<(f64, f64)> = plus.iter().map(|p| (p.w, p.p)).collect();
    loop_pts.extend(minus.iter().rev().map(|p| (p.w, p.p)));
    Ok(vec![Series {
        label: label.to_string(),
        colour: "steelblue",
        points: loop_pts,
    }])
}

fn polar_outputs(cfg: &RunConfig, up: &UpstreamState, g: &GasConstants, out: &mut Outputs) -> Result<(), CliError> {
    let n = cfg.points;
    let pts = polar::sample_polar(up, g, n)?;
    let cp = polar::critical_points(up, g)?;
    if cfg.wants(Format::Csv) {
        let mut rows = Vec::with_capacity(pts.len());
        for pt in &pts {
            let sol = polar::downstream_state_or_identity(pt.p, up, g, pt.branch)?;
            let m = gas::mach(&sol.downstream, g).map_err(PolarError::from)?;
            rows.push(vec![
                pt.branch.as_str().to_string(),
                fmt(pt.p),
                fmt(pt.w),
                fmt(sol.downstream.u),
                fmt(sol.downstream.rho),
                fmt(m),
                fmt(sol.alpha),
            ]);
        }
        out.add("polar.csv", csv("branch,p,w,u,rho,M,alpha", &rows));
    }
    if cfg.wants(Format::Json) {
        let v = json!({
            "command": "polar",
            "gamma": g.gamma,
            "upstream": upstream_json(up, g),
            "points_per_branch": n,
            "critical_points": cp,
            "max_deflection_deg": cp.w_star.atan().to_degrees(),
        });
        out.add("polar.json", json_text(&v));
    }
    if cfg.wants(Format::Svg) {
        let w_at = |p: f64, b: Branch| polar::deflected_polar_w(p, up, g, b);
        let markers = vec![
            Marker {
                label: "C".into(),
                x: w_at(up.p0, Branch::Plus)?,
                y: up.p0,
            },
            Marker {
                label: "A".into(),
                x: w_at(cp.p_plus, Branch::Plus)?,
                y: cp.p_plus,
            },
            Marker {
                label: "B".into(),
                x: w_at(cp.p_star, Branch::Plus)?,
                y: cp.p_star,
            },
            Marker {
                label: "B'".into(),
                x: w_at(cp.p_star, Branch::Minus)?,
                y: cp.p_star,
            },
            Marker {
                label: "S".into(),
                x: w_at(cp.p_sonic, Branch::Plus)?,
                y: cp.p_sonic,
            },
            Marker {
                label: "S'".into(),
                x: w_at(cp.p_sonic, Branch::Minus)?,
                y: cp.p_sonic,
            },
        ];
        let plot = Plot {
            title: format!("Shock polar, M0 = {}, gamma = {}", up.mach(g), g.gamma),
            x_label: "w = v/u".into(),
            y_label: "p".into(),
            series: polar_series(up, g, n, "polar")?,
            markers,
        };
        out.add("polar.svg", plot.render());
    }
    Ok(())
}

fn normal_outputs(cfg: &RunConfig, up: &UpstreamState, g: &GasConstants, out: &mut Outputs) -> Result<(), CliError> {
    let p_plus = polar::normal_shock_pressure(up, g);
    let sol = polar::downstream_state(p_plus, up, g, Branch::Plus)?;
    let s = &sol.downstream;
    let m = gas::mach(s, g).map_err(PolarError::from)?;
    if cfg.wants(Format::Csv) {
        let row = vec![
            fmt(s.p),
            fmt(s.u),
            fmt(s.v),
            fmt(s.rho),
            fmt(m),
            fmt(gas::entropy_measure(s, g)),
        ];
        out.add("normal.csv", csv("p,u,v,rho,M,entropy", &[row]));
    }
    if cfg.wants(Format::Json) {
        let v = json!({
            "command": "normal",
            "gamma": g.gamma,
            "upstream": upstream_json(up, g),
            "shock": shock_json(&sol, g),
        });
        out.add("normal.json", json_text(&v));
    }
    Ok(())
}

fn oblique_outputs(cfg: &RunConfig, up: &UpstreamState, g: &GasConstants, out: &mut Outputs) -> Result<(), CliError> {
    let theta_deg = cfg.theta_w_deg.expect("validated");
    let pair = polar::oblique_solutions(theta_deg.to_radians(), up, g)?;
    if cfg.wants(Format::Csv) {
        let mut rows = Vec::new();
        for (name, sol) in [("weak", &pair.weak), ("strong", &pair.strong)] {
            let s = &sol.downstream;
            rows.push(vec![
                name.to_string(),
                fmt(s.p),
                fmt(sol.point.w),
                fmt(s.u),
                fmt(s.v),
                fmt(s.rho),
                fmt(gas::mach(s, g).map_err(PolarError::from)?),
                fmt(sol.alpha),
                fmt(sol.front_slope),
                serde_json::to_value(sol.kind)
                    .expect("kind")
                    .as_str()
                    .unwrap_or("")
                    .to_string(),
            ]);
        }
        out.add("oblique.csv", csv("root,p,w,u,v,rho,M,alpha,front_slope,kind", &rows));
    }
    if cfg.wants(Format::Json) {
        let v = json!({
            "command": "oblique",
            "gamma": g.gamma,
            "upstream": upstream_json(up, g),
            "theta_w_deg": theta_deg,
            "weak": shock_json(&pair.weak, g),
            "strong": shock_json(&pair.strong, g),
        });
        out.add("oblique.json", json_text(&v));
    }
    Ok(())
}

fn mach_outputs(cfg: &RunConfig, up: &UpstreamState, g: &GasConstants, out: &mut Outputs) -> Result<(), CliError> {
    let p1 = cfg.p1.expect("validated");
    let conf = mach::build_configuration(up, p1, g)?;
    let report = mach::validate_configuration(&conf, g);
    if cfg.wants(Format::Csv) {
        let mut rows = Vec::new();
        for (k, s) in [&conf.state0, &conf.state1, &conf.state2, &conf.state3]
            .into_iter()
            .enumerate()
        {
            rows.push(vec![
                k.to_string(),
                fmt(s.p),
                fmt(s.u),
                fmt(s.v),
                fmt(s.rho),
                fmt(gas::mach(s, g).map_err(PolarError::from)?),
                fmt(gas::entropy_measure(s, g)),
            ]);
        }
        out.add("mach.csv", csv("region,p,u,v,rho,M,entropy", &rows));
    }
    if cfg.wants(Format::Json) {
        let v = json!({
            "command": "mach",
            "gamma": g.gamma,
            "upstream": upstream_json(up, g),
            "p1": p1,
            "configuration": conf,
            "validation": report,
        });
        out.add("mach.json", json_text(&v));
    }
    if cfg.wants(Format::Svg) {
        let n = cfg.points.max(64);
        let mut series = polar_series(up, g, n, "polar at C")?;
        let mut markers = vec![Marker {
            label: "C".into(),
            x: up.theta0.tan(),
            y: up.p0,
        }];
        if !conf.degenerate {
            let up1 = UpstreamState::from_flow_state(&conf.state1, g)?;
            let mut reflected = polar_series(&up1, g, n, "polar at I1")?;
            reflected[0].colour = "firebrick";
            series.append(&mut reflected);
            markers.push(Marker {
                label: "I1".into(),
                x: conf.state1.w(),
                y: conf.state1.p,
            });
        }
        markers.push(Marker {
            label: "I23".into(),
            x: conf.wm_pm.0,
            y: conf.wm_pm.1,
        });
        let plot = Plot {
            title: format!("Mach configuration, p1 = {p1}"),
            x_label: "w = v/u".into(),
            y_label: "p".into(),
            series,
            markers,
        };
        out.add("mach.svg", plot.render());
    }
    if !report.passed {
        out.failure = Some(CliError::Numerical("Mach configuration failed validation".into()));
    }
    Ok(())
}

fn coeffs_outputs(cfg: &RunConfig, up: &UpstreamState, g: &GasConstants, out: &mut Outputs) -> Result<(), CliError> {
    let cp = polar::critical_points(up, g)?;
    let n = cfg.points;
    let mut rows = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    // Skip the sonic end point itself, where ellipticity degenerates.
    for k in 1..=n {
        let p = cp.p_sonic + (cp.p_plus - cp.p_sonic) * k as f64 / n as f64;
        let sol = polar::downstream_state(p, up, g, Branch::Plus)?;
        let s = &sol.downstream;
        let c = lagrangian::coefficients(s, g).map_err(|e| CliError::Physical(e.to_string()))?;
        let det = lagrangian::matrix_w(&c).det();
        let delta = 4.0 * c.beta2 / c.beta1;
        let m = gas::mach(s, g).map_err(PolarError::from)?;
        rows.push(vec![
            fmt(p),
            fmt(sol.point.w),
            fmt(m),
            fmt(c.lambda_r),
            fmt(c.beta1),
            fmt(c.beta2),
            fmt(det),
            fmt(delta),
        ]);
        records.push(json!({
            "p": p, "w": sol.point.w, "mach": m,
            "lambda_r": c.lambda_r, "beta1": c.beta1, "beta2": c.beta2,
            "det_w": det, "ellipticity": delta,
        }));
    }
    if cfg.wants(Format::Csv) {
        out.add("coeffs.csv", csv("p,w,M,lambda_r,beta1,beta2,det_w,delta", &rows));
    }
    if cfg.wants(Format::Json) {
        let v = json!({
            "command": "coeffs",
            "gamma": g.gamma,
            "upstream": upstream_json(up, g),
            "p_sonic": cp.p_sonic,
            "p_plus": cp.p_plus,
            "rows": records,
        });
        out.add("coeffs.json", json_text(&v));
    }
    Ok(())
}

fn duct_outputs(cfg: &RunConfig, up: &UpstreamState, g: &GasConstants, out: &mut Outputs) -> Result<(), CliError> {
    let d = &cfg.duct;
    let p_plus = polar::normal_shock_pressure(up, g);
    let problem = DuctProblem {
        up: *up,
        p_exit: d.p_exit.unwrap_or(p_plus),
        front_anchor_xi: d.anchor,
        nx: d.nx,
        ny: d.ny,
        omega_relax: d.omega,
        max_iters: d.max_iters,
        tol_front: d.tol_front,
        tol_field: d.tol_field,
        initial_front: InitialFront {
            amplitude: d.amplitude,
            mode: d.mode,
        },
    };
    let result = duct::solve_duct(&problem, g)?;
    let report = duct::residual_report(&result, &problem, g);
    let (nx, ny) = (result.nx, result.ny);

    if cfg.wants(Format::Csv) {
        let mut field = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let psi = result.front[j];
            let eta = result.eta0 * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let s = i as f64 / (nx - 1) as f64;
                let k = j * nx + i;
                field.push(vec![
                    i.to_string(),
                    j.to_string(),
                    fmt(s),
                    fmt(psi + s * (1.0 - psi)),
                    fmt(eta),
                    fmt(result.p_field[k]),
                    fmt(result.w_field[k]),
                ]);
            }
        }
        out.add("duct_field.csv", csv("i,j,s,xi,eta,p,w", &field));

        let rows: Vec<Vec<String>> = (0..ny)
            .map(|j| {
                vec![
                    j.to_string(),
                    fmt(result.eta0 * j as f64 / (ny - 1) as f64),
                    fmt(result.front[j]),
                    fmt(result.front_slope[j]),
                ]
            })
            .collect();
        out.add("duct_front.csv", csv("j,eta,psi,dpsi", &rows));

        let rows: Vec<Vec<String>> = result
            .history
            .iter()
            .map(|h| {
                vec![
                    h.iter.to_string(),
                    serde_json::to_value(h.wall)
                        .expect("wall")
                        .as_str()
                        .unwrap_or("")
                        .to_string(),
                    fmt(h.field_change),
                    fmt(h.front_change),
                    fmt(h.pde_residual),
                    fmt(h.wall_mismatch),
                    fmt(h.front_offset),
                ]
            })
            .collect();
        out.add(
            "duct_history.csv",
            csv(
                "iter,wall,field_change,front_change,pde_residual,wall_mismatch,front_offset",
                &rows,
            ),
        );
    }
    if cfg.wants(Format::Json) {
        let last = result.history.last();
        let v = json!({
            "command": "duct",
            "gamma": g.gamma,
            "upstream": upstream_json(up, g),
            "problem": problem,
            "status": result.status,
            "iters": result.iters,
            "p_plus": result.p_plus,
            "max_pressure_deviation": result.max_pressure_deviation(),
            "max_front_deviation": result.max_front_deviation(problem.front_anchor_xi),
            "final_front_change": last.map(|h| h.front_change),
            "final_front_offset": last.map(|h| h.front_offset),
            "residuals": report,
        });
        out.add("duct.json", json_text(&v));
    }
    if cfg.wants(Format::Svg) {
        let front: Vec<(f64, f64)> = (0..ny)
            .map(|j| (result.front[j], result.eta0 * j as f64 / (ny - 1) as f64))
            .collect();
        let plot = Plot {
            title: format!("Shock front, p_exit = {}, {}", problem.p_exit, result.status.as_str()),
            x_label: "xi".into(),
            y_label: "eta".into(),
            series: vec![Series {
                label: "front".into(),
                colour: "steelblue",
                points: front,
            }],
            markers: vec![Marker {
                label: "t".into(),
                x: problem.front_anchor_xi,
                y: 0.0,
            }],
        };
        out.add("duct.svg", plot.render());
    }
    if result.status != DuctStatus::Converged {
        out.failure = Some(CliError::Numerical(format!(
            "duct iteration ended with status {} after {} iterations",
            result.status.as_str(),
            result.iters
        )));
    }
    Ok(())
}

/// Writes data files plus `manifest.json`; returns the failure, if any.
pub fn write_outputs(cfg: &RunConfig, outputs: &Outputs) -> Result<(), CliError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| CliError::InvalidConfig(format!("cannot create {}: {e}", dir.display())))?;
    let mut listed = Vec::new();
    for (name, body) in &outputs.files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
        listed.push(json!({ "name": name, "bytes": body.len() }));
    }
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "tool": "shockpolar",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command,
        "config": cfg,
        "files": listed,
        "status": outputs.failure.as_ref().map_or("ok", |e| e.kind()),
        "created_unix": created,
    });
    let path = dir.join("manifest.json");
    fs::write(&path, json_text(&manifest))
        .map_err(|e| CliError::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Resolves, computes and writes; the error carries the exit code.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    let outputs = compute(&cfg)?;
    write_outputs(&cfg, &outputs)?;
    match outputs.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::InvalidConfig(first.to_string()).diagnostic());
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        let mut full = vec!["shockpolar"];
        full.extend_from_slice(args);
        resolve(Cli::try_parse_from(full).map_err(|e| CliError::InvalidConfig(e.to_string()))?)
    }

    #[test]
    fn defaults_and_overrides() {
        let cfg = parse(&["polar", "--gamma", "1.4", "--mach0", "3", "--out", "x"]).unwrap();
        assert_eq!(cfg.command, Command::Polar);
        assert_eq!(cfg.upstream.mach0, 3.0);
        assert_eq!(cfg.points, 201);
        assert_eq!(cfg.output.dir, Some(PathBuf::from("x")));
        assert_eq!(cfg.output.formats, vec![Format::Csv, Format::Json, Format::Svg]);
    }

    #[test]
    fn invalid_inputs_map_to_exit_two() {
        for args in [
            &["polar", "--mach0", "0.8"][..],
            &["oblique", "--theta-deg", "-5"],
            &["oblique"],
            &["mach", "--p1", "0.5"],
            &["duct", "--omega", "1.5"],
            &["polar", "--gamma", "1.0"],
        ] {
            assert_eq!(parse(args).unwrap_err().exit_code(), 2, "{args:?}");
        }
    }

    #[test]
    fn detachment_maps_to_exit_three() {
        let cfg = parse(&["oblique", "--theta-deg", "30"]).unwrap();
        let err = compute(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let line = err.diagnostic();
        assert!(!line.contains('\n'));
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["kind"], "physical-domain");
    }

    #[test]
    fn polar_csv_endpoints_vanish() {
        let cfg = parse(&["polar", "--points", "11", "--formats", "csv"]).unwrap();
        let out = compute(&cfg).unwrap();
        assert_eq!(out.files.len(), 1);
        let text = &out.files[0].1;
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "branch,p,w,u,rho,M,alpha");
        for k in [1, 11, 12, 22] {
            let w: f64 = lines[k].split(',').nth(2).unwrap().parse().unwrap();
            assert!(w.abs() < 1e-12, "row {k}: {}", lines[k]);
        }
    }

    #[test]
    fn config_command_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"command": "mach", "p1": 1.5}"#).unwrap();
        let p = path.to_str().unwrap();
        assert!(parse(&["mach", "--config", p]).is_ok());
        assert_eq!(parse(&["polar", "--config", p]).unwrap_err().exit_code(), 2);
        fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        assert_eq!(parse(&["polar", "--config", p]).unwrap_err().exit_code(), 2);
    }
}
