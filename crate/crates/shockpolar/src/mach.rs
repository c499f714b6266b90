//! Flat Mach configurations: an incident shock `S1`, a Mach stem `S2`, a
//! reflected shock `S3` and a contact line `D`, all meeting at a triple point.
//!
//! Regions are numbered as usual: `0` upstream, `1` behind `S1`, `2` behind
//! the stem, `3` behind the reflected shock. The states behind `S2` and `S3`
//! follow from intersecting the polar rooted at the upstream state with the
//! polar rooted at state `1`, restricted to the subsonic arcs of both.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::{self, FlowRegime, FlowState, GasConstants};
use crate::numeric;
use crate::polar::{self, Branch, PolarError, ShockSolution, UpstreamState};

/// Sampling density used to bracket polar crossings before bisection.
const CROSSING_SAMPLES: usize = 4000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MachError {
    #[error("incident shock with p1 = {p1} is not supersonic behind (p_sonic = {p_sonic})")]
    NotSupersonic { p1: f64, p_sonic: f64 },
    #[error("no flat configuration: subsonic arcs do not cross on [{lo}, {hi}]")]
    NoIntersection { lo: f64, hi: f64 },
    #[error(transparent)]
    Polar(#[from] PolarError),
}

/// One crossing of the two subsonic polar arcs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub w: f64,
    pub p: f64,
    /// Branch of the polar rooted at the upstream state (gives the stem).
    pub base_branch: Branch,
    /// Branch of the polar rooted at state 1 (gives the reflected shock).
    pub reflected_branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarIntersection {
    pub w_m: f64,
    pub p_m: f64,
    pub base_branch: Branch,
    pub reflected_branch: Branch,
    /// Every crossing found on the arcs, the selected one included.
    pub crossings: Vec<Crossing>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachConfiguration {
    pub state0: FlowState,
    pub state1: FlowState,
    pub state2: FlowState,
    pub state3: FlowState,
    /// Front slopes `dx/dy` of the three shocks.
    pub slope_s1: f64,
    pub slope_s2: f64,
    pub slope_s3: f64,
    /// Contact-line slope `dy/dx`.
    pub slope_d: f64,
    pub origin: (f64, f64),
    pub wm_pm: (f64, f64),
    pub base_branch: Branch,
    pub reflected_branch: Branch,
    /// Number of crossings found; more than one is flagged by validation.
    pub multiplicity: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
    pub multiplicity: usize,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// The incident shock `S1` on the minus branch.
pub fn incident_shock(up0: &UpstreamState, p1: f64, gas: &GasConstants) -> Result<ShockSolution, MachError> {
    let cp = polar::critical_points(up0, gas)?;
    if p1 >= cp.p_sonic {
        return Err(MachError::NotSupersonic {
            p1,
            p_sonic: cp.p_sonic,
        });
    }
    let sol = polar::downstream_state(p1, up0, gas, Branch::Minus)?;
    if gas::classify(&sol.downstream, gas).map_err(PolarError::from)? != FlowRegime::Supersonic {
        return Err(MachError::NotSupersonic {
            p1,
            p_sonic: cp.p_sonic,
        });
    }
    Ok(sol)
}

/// State behind `S1`; requires `p0 < p1 < p_sonic`.
pub fn incident_downstream(up0: &UpstreamState, p1: f64, gas: &GasConstants) -> Result<FlowState, MachError> {
    Ok(incident_shock(up0, p1, gas)?.downstream)
}

/// As [`incident_downstream`], but `p1 == p0` returns the upstream state.
pub fn incident_downstream_or_identity(
    up0: &UpstreamState,
    p1: f64,
    gas: &GasConstants,
) -> Result<FlowState, MachError> {
    if p1 == up0.p0 {
        up0.validate(gas)?;
        return Ok(up0.flow_state());
    }
    incident_downstream(up0, p1, gas)
}

fn same_state(a: &FlowState, b: &FlowState, tol: f64) -> bool {
    let scale = |x: f64, y: f64| tol * x.abs().max(y.abs()).max(1.0);
    (a.p - b.p).abs() <= scale(a.p, b.p)
        && (a.u - b.u).abs() <= scale(a.u, b.u)
        && (a.v - b.v).abs() <= scale(a.v, b.v)
        && (a.rho - b.rho).abs() <= scale(a.rho, b.rho)
}

/// Finds where the subsonic arcs of the two polars cross.
///
/// All four branch pairs are scanned; when several crossings exist the one
/// with smallest `|w_m|` is selected and all are reported. If `state1` is the
/// upstream state itself the polars coincide and the crossing is the normal
/// shock point `(tan theta0, p⁺)`.
pub fn intersect_polars(
    up0: &UpstreamState,
    state1: &FlowState,
    gas: &GasConstants,
) -> Result<PolarIntersection, MachError> {
    up0.validate(gas)?;
    if same_state(state1, &up0.flow_state(), gas.tol_alg) {
        let p_m = polar::normal_shock_pressure(up0, gas);
        let w_m = up0.theta0.tan();
        let only = Crossing {
            w: w_m,
            p: p_m,
            base_branch: Branch::Plus,
            reflected_branch: Branch::Plus,
        };
        return Ok(PolarIntersection {
            w_m,
            p_m,
            base_branch: Branch::Plus,
            reflected_branch: Branch::Plus,
            crossings: vec![only],
            degenerate: true,
        });
    }

    let up1 = UpstreamState::from_flow_state(state1, gas)?;
    let cp0 = polar::critical_points(up0, gas)?;
    let cp1 = polar::critical_points(&up1, gas)?;
    let lo = cp0.p_sonic.max(cp1.p_sonic);
    let hi = cp0.p_plus.min(cp1.p_plus);
    if !(lo < hi) {
        return Err(MachError::NoIntersection { lo, hi });
    }

    let mut crossings: Vec<Crossing> = Vec::new();
    for base_branch in Branch::BOTH {
        for reflected_branch in Branch::BOTH {
            let gap = |p: f64| {
                let a = polar::deflected_polar_w(p, up0, gas, base_branch);
                let b = polar::deflected_polar_w(p, &up1, gas, reflected_branch);
                match (a, b) {
                    (Ok(a), Ok(b)) => a - b,
                    _ => f64::NAN,
                }
            };
            for p in bracketed_roots(&gap, lo, hi)? {
                let w = polar::deflected_polar_w(p, up0, gas, base_branch)?;
                let duplicate = crossings
                    .iter()
                    .any(|c| (c.p - p).abs() <= 1e-9 * hi && (c.w - w).abs() <= 1e-9);
                if !duplicate {
                    crossings.push(Crossing {
                        w,
                        p,
                        base_branch,
                        reflected_branch,
                    });
                }
            }
        }
    }

    let best = crossings
        .iter()
        .min_by(|a, b| a.w.abs().total_cmp(&b.w.abs()))
        .copied()
        .ok_or(MachError::NoIntersection { lo, hi })?;
    Ok(PolarIntersection {
        w_m: best.w,
        p_m: best.p,
        base_branch: best.base_branch,
        reflected_branch: best.reflected_branch,
        crossings,
        degenerate: false,
    })
}

fn bracketed_roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Vec<f64>, MachError> {
    let n = CROSSING_SAMPLES;
    let xs: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            }
        })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        let (fa, fb) = (fs[i], fs[i + 1]);
        if !(fa.is_finite() && fb.is_finite()) {
            continue;
        }
        if fa == 0.0 {
            roots.push(xs[i]);
        } else if fb != 0.0 && fa.signum() != fb.signum() {
            let root = numeric::bisect(f, xs[i], xs[i + 1], 0.0).map_err(PolarError::from)?;
            roots.push(root);
        }
    }
    if fs[n] == 0.0 {
        roots.push(hi);
    }
    Ok(roots)
}

/// Builds the full configuration for an incident shock of strength `p1`.
///
/// `p1 == p0` gives the degenerate configuration: a single normal shock with
/// `S1` reduced to a Mach line.
pub fn build_configuration(up0: &UpstreamState, p1: f64, gas: &GasConstants) -> Result<MachConfiguration, MachError> {
    let s1 = if p1 == up0.p0 {
        polar::downstream_state_or_identity(p1, up0, gas, Branch::Minus)?
    } else {
        incident_shock(up0, p1, gas)?
    };
    let state1 = s1.downstream;
    let hit = intersect_polars(up0, &state1, gas)?;

    let up1 = if hit.degenerate {
        *up0
    } else {
        UpstreamState::from_flow_state(&state1, gas)?
    };
    let s2 = polar::downstream_state(hit.p_m, up0, gas, hit.base_branch)?;
    let s3 = polar::downstream_state(hit.p_m, &up1, gas, hit.reflected_branch)?;

    Ok(MachConfiguration {
        state0: up0.flow_state(),
        state1,
        state2: s2.downstream,
        state3: s3.downstream,
        slope_s1: s1.front_slope,
        slope_s2: s2.front_slope,
        slope_s3: s3.front_slope,
        slope_d: hit.w_m,
        origin: (0.0, 0.0),
        wm_pm: (hit.w_m, hit.p_m),
        base_branch: hit.base_branch,
        reflected_branch: hit.reflected_branch,
        multiplicity: hit.crossings.len(),
        degenerate: hit.degenerate,
    })
}

/// Re-checks every invariant of a configuration, including hand-edited ones.
pub fn validate_configuration(cfg: &MachConfiguration, gas: &GasConstants) -> ValidationReport {
    let tol = gas.tol_alg;
    let mut checks = Vec::new();
    let mut push = |name: &str, residual: f64, tolerance: f64| {
        checks.push(Check {
            name: name.to_string(),
            passed: residual.is_finite() && residual <= tolerance,
            residual,
            tolerance,
        });
    };

    let states = [&cfg.state0, &cfg.state1, &cfg.state2, &cfg.state3];
    let mach: Vec<f64> = states.iter().map(|s| gas::mach(s, gas).unwrap_or(f64::NAN)).collect();
    // Residual is the distance into the wrong side of the sonic band.
    let band = gas.tol_state;
    push("region0_supersonic", (1.0 + band - mach[0]).max(0.0), 0.0);
    push("region1_supersonic", (1.0 + band - mach[1]).max(0.0), 0.0);
    push("region2_subsonic", (mach[2] - 1.0 + band).max(0.0), 0.0);
    push("region3_subsonic", (mach[3] - 1.0 + band).max(0.0), 0.0);

    let (w_m, p_m) = cfg.wm_pm;
    let p_jump = (cfg.state2.p - cfg.state3.p).abs().max((cfg.state2.p - p_m).abs());
    let w_jump = (cfg.state2.w() - cfg.state3.w())
        .abs()
        .max((cfg.state2.w() - w_m).abs());
    push("contact_pressure", p_jump, tol * p_m.abs().max(1.0));
    push("contact_flow_angle", w_jump, tol);
    push("contact_streamline", (cfg.slope_d - w_m).abs(), tol);

    let rh = |a: &FlowState, b: &FlowState, slope: f64| polar::max_norm(&polar::rh_residual(a, b, slope, gas));
    push("rankine_hugoniot_s1", rh(&cfg.state0, &cfg.state1, cfg.slope_s1), tol);
    push("rankine_hugoniot_s2", rh(&cfg.state0, &cfg.state2, cfg.slope_s2), tol);
    push("rankine_hugoniot_s3", rh(&cfg.state1, &cfg.state3, cfg.slope_s3), tol);

    let b0 = gas::bernoulli(&cfg.state0, gas);
    let b_dev = states
        .iter()
        .map(|s| (gas::bernoulli(s, gas) - b0).abs())
        .fold(0.0, f64::max);
    push("bernoulli", b_dev, tol * b0.abs().max(1.0));

    // Shocks only compress; S1 may degenerate to a Mach line.
    let compress = (cfg.state0.p - cfg.state1.p)
        .max(cfg.state0.p - cfg.state2.p)
        .max(cfg.state1.p - cfg.state3.p)
        .max(0.0);
    push("entropy_condition", compress, 0.0);

    push("single_crossing", (cfg.multiplicity as f64 - 1.0).abs(), 0.0);

    let passed = checks.iter().all(|c| c.passed);
    ValidationReport {
        checks,
        passed,
        multiplicity: cfg.multiplicity,
    }
}
