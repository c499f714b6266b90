//! The pressure–flow-angle shock polar of a uniform supersonic stream.
//!
//! For an upstream state with Mach number `M0`, every admissible straight
//! shock produces a downstream pair `(w, p)` with `w = v/u` the tangent of the
//! downstream flow angle. The locus is the closed loop
//!
//! ```text
//!          (p/p0 - 1)              2γ/(γ+1) (M0² - 1) - (p/p0 - 1)
//! w = ± ─────────────────── · sqrt( ─────────────────────────────── )
//!        γ M0² - (p/p0 - 1)            p/p0 + (γ-1)/(γ+1)
//! ```
//!
//! for `p0 <= p <= p⁺`. The loop is symmetric in `w`; [`Branch`] selects the
//! sign. The lower endpoint `C = (0, p0)` is the unshocked stream, the upper
//! endpoint `A = (0, p⁺)` is the normal shock. Points below `C` violate the
//! entropy condition and cannot be constructed here.
//!
//! Upstream states may be rotated by `theta0`; the local relations are then
//! evaluated in the frame aligned with the upstream velocity and rotated back.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::{self, FlowRegime, FlowState, GasConstants, StateError};
use crate::numeric::{self, RootError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarError {
    #[error("upstream Mach number {0} is not supersonic")]
    SubsonicUpstream(f64),
    #[error("pressure {p} outside the polar range [{p0}, {p_plus}]")]
    Domain { p: f64, p0: f64, p_plus: f64 },
    #[error("entropy condition violated: p = {p} does not exceed p0 = {p0}")]
    Entropy { p: f64, p0: f64 },
    #[error("degenerate polar: denominator gamma*M0^2 - (p/p0 - 1) = {0}")]
    Degenerate(f64),
    #[error("detached shock: tan(theta_w) = {tan_theta} exceeds w* = {w_star}")]
    Detached { tan_theta: f64, w_star: f64 },
    #[error("wedge angle must be positive, got {0} rad")]
    InvalidWedge(f64),
    #[error("internal bracketing failure: {0}")]
    Bracket(#[from] RootError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Uniform upstream stream: pressure, speed, density and flow angle.
///
/// `u0` is the speed along the direction `theta0`; for the horizontal stream
/// of a duct or wedge `theta0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpstreamState {
    pub p0: f64,
    pub u0: f64,
    pub rho0: f64,
    #[serde(default)]
    pub theta0: f64,
}

impl UpstreamState {
    pub fn new(p0: f64, u0: f64, rho0: f64, theta0: f64, gas: &GasConstants) -> Result<Self, PolarError> {
        let up = Self { p0, u0, rho0, theta0 };
        up.validate(gas)?;
        Ok(up)
    }

    /// Upstream stream with prescribed Mach number.
    pub fn from_mach(mach0: f64, p0: f64, rho0: f64, theta0: f64, gas: &GasConstants) -> Result<Self, PolarError> {
        let c0 = (gas.gamma * p0 / rho0).sqrt();
        Self::new(p0, mach0 * c0, rho0, theta0, gas)
    }

    /// Re-roots a polar at an arbitrary supersonic state.
    pub fn from_flow_state(state: &FlowState, gas: &GasConstants) -> Result<Self, PolarError> {
        Self::new(state.p, state.speed(), state.rho, state.flow_angle(), gas)
    }

    pub fn validate(&self, gas: &GasConstants) -> Result<(), PolarError> {
        let ok = [self.p0, self.u0, self.rho0, self.theta0].iter().all(|x| x.is_finite());
        if !ok || self.p0 <= 0.0 || self.u0 <= 0.0 || self.rho0 <= 0.0 {
            return Err(StateError::NonPhysical(format!("invalid upstream state {self:?}")).into());
        }
        let m = self.mach(gas);
        if !(m > 1.0) {
            return Err(PolarError::SubsonicUpstream(m));
        }
        Ok(())
    }

    pub fn sound_speed(&self, gas: &GasConstants) -> f64 {
        (gas.gamma * self.p0 / self.rho0).sqrt()
    }

    pub fn mach(&self, gas: &GasConstants) -> f64 {
        self.u0 / self.sound_speed(gas)
    }

    pub fn flow_state(&self) -> FlowState {
        let (s, c) = self.theta0.sin_cos();
        FlowState {
            p: self.p0,
            u: self.u0 * c,
            v: self.u0 * s,
            rho: self.rho0,
        }
    }

    /// The same stream turned counter-clockwise by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            theta0: self.theta0 + angle,
            ..*self
        }
    }
}

/// Sign choice of the polar; `Plus` deflects the flow counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }

    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub w: f64,
    pub p: f64,
    pub branch: Branch,
}

/// Character of the flow behind a shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShockKind {
    SupersonicDownstream,
    Transonic,
    Sonic,
}

impl From<FlowRegime> for ShockKind {
    fn from(r: FlowRegime) -> Self {
        match r {
            FlowRegime::Subsonic => ShockKind::Transonic,
            FlowRegime::Sonic => ShockKind::Sonic,
            FlowRegime::Supersonic => ShockKind::SupersonicDownstream,
        }
    }
}

/// A straight shock and the uniform state behind it.
///
/// `alpha` is the angle between the front and the x axis in the fixed frame;
/// `front_slope = cot(alpha) = dx/dy` along the front `x = f(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockSolution {
    pub point: PolarPoint,
    pub downstream: FlowState,
    pub alpha: f64,
    pub front_slope: f64,
    pub kind: ShockKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    /// Normal-shock pressure (point A).
    pub p_plus: f64,
    /// Pressure at maximal deflection (point B).
    pub p_star: f64,
    pub w_star: f64,
    /// Pressure at which the downstream state is exactly sonic (point S).
    pub p_sonic: f64,
    pub w_sonic: f64,
}

/// Weak and strong attached shocks for one wedge angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObliquePair {
    pub weak: ShockSolution,
    pub strong: ShockSolution,
}

fn hugoniot_ratio(gamma: f64) -> f64 {
    (gamma - 1.0) / (gamma + 1.0)
}

/// `p⁺ = p0 (1 + 2γ/(γ+1) (M0² - 1))`.
pub fn normal_shock_pressure(up: &UpstreamState, gas: &GasConstants) -> f64 {
    let g = gas.gamma;
    let m = up.mach(gas);
    up.p0 * (1.0 + 2.0 * g / (g + 1.0) * (m * m - 1.0))
}

/// Unsigned deflection tangent `|w|` in the frame of the upstream velocity.
fn deflection_tangent(p: f64, up: &UpstreamState, gas: &GasConstants) -> Result<f64, PolarError> {
    let g = gas.gamma;
    let m2 = up.mach(gas).powi(2);
    if !(m2 > 1.0) {
        return Err(PolarError::SubsonicUpstream(m2.sqrt()));
    }
    let p_plus = normal_shock_pressure(up, gas);
    let slack = 8.0 * f64::EPSILON * p_plus;
    if !p.is_finite() || p < up.p0 || p > p_plus + slack {
        return Err(PolarError::Domain { p, p0: up.p0, p_plus });
    }
    let jump = p / up.p0 - 1.0;
    // Equals `2γ/(γ+1)(M0² - 1) - jump`, but vanishes exactly at p⁺.
    let numer = ((p_plus - p) / up.p0).max(0.0);
    let denom = g * m2 - jump;
    if !(denom > 0.0) {
        return Err(PolarError::Degenerate(denom));
    }
    let radicand = numer / (p / up.p0 + hugoniot_ratio(g));
    Ok(jump / denom * radicand.sqrt())
}

/// Evaluates the polar relation for the chosen branch.
///
/// `w` is the tangent of the deflection measured from the upstream velocity;
/// for a horizontal upstream stream this is the downstream `v/u`.
pub fn polar_w(p: f64, up: &UpstreamState, gas: &GasConstants, branch: Branch) -> Result<f64, PolarError> {
    Ok(branch.sign() * deflection_tangent(p, up, gas)?)
}

/// Downstream flow angle in the fixed frame for a polar rooted at a rotated state.
pub fn deflected_polar_angle(
    p: f64,
    up: &UpstreamState,
    gas: &GasConstants,
    branch: Branch,
) -> Result<f64, PolarError> {
    let delta = deflection_tangent(p, up, gas)?.atan();
    Ok(up.theta0 + branch.sign() * delta)
}

/// Tangent of the downstream flow angle in the fixed frame.
///
/// Coincides with [`polar_w`] when `theta0 == 0`.
pub fn deflected_polar_w(p: f64, up: &UpstreamState, gas: &GasConstants, branch: Branch) -> Result<f64, PolarError> {
    if up.theta0 == 0.0 {
        return polar_w(p, up, gas, branch);
    }
    Ok(deflected_polar_angle(p, up, gas, branch)?.tan())
}

/// Downstream state and front geometry for the shock with downstream pressure `p`.
///
/// Requires `p0 < p <= p⁺`. The minus branch reflects the front angle,
/// `alpha -> pi - alpha`, so that its slope changes sign.
pub fn downstream_state(
    p: f64,
    up: &UpstreamState,
    gas: &GasConstants,
    branch: Branch,
) -> Result<ShockSolution, PolarError> {
    if !(p > up.p0) {
        return Err(PolarError::Entropy { p, p0: up.p0 });
    }
    shock_relations(p, up, gas, branch)
}

/// As [`downstream_state`], but `p == p0` yields the zero-strength limit:
/// the upstream state itself behind a Mach line.
pub fn downstream_state_or_identity(
    p: f64,
    up: &UpstreamState,
    gas: &GasConstants,
    branch: Branch,
) -> Result<ShockSolution, PolarError> {
    if p < up.p0 {
        return Err(PolarError::Entropy { p, p0: up.p0 });
    }
    shock_relations(p, up, gas, branch)
}

fn shock_relations(
    p: f64,
    up: &UpstreamState,
    gas: &GasConstants,
    branch: Branch,
) -> Result<ShockSolution, PolarError> {
    up.validate(gas)?;
    let g = gas.gamma;
    let m0 = up.mach(gas);
    let w_local = polar_w(p, up, gas, branch)?;

    let u_local = up.u0 - (p - up.p0) / (up.rho0 * up.u0);
    let rho = up.rho0 * ((g + 1.0) * p + (g - 1.0) * up.p0) / ((g - 1.0) * p + (g + 1.0) * up.p0);
    let sin_alpha = ((g + 1.0) / (2.0 * g) * (p / up.p0 + hugoniot_ratio(g))).sqrt() / m0;
    // cos² alpha = (γ+1)/(2γ M0²) (p⁺ - p)/p0, so the normal shock is exactly upright.
    let p_plus = normal_shock_pressure(up, gas);
    let cos_alpha = ((g + 1.0) / (2.0 * g * m0 * m0) * ((p_plus - p) / up.p0).max(0.0)).sqrt();
    let (sin_alpha, mut cos_alpha) = (sin_alpha.min(1.0), cos_alpha.min(1.0));
    if branch == Branch::Minus {
        cos_alpha = -cos_alpha;
    }
    let alpha_local = sin_alpha.atan2(cos_alpha);

    let local = FlowState {
        p,
        u: u_local,
        v: u_local * w_local,
        rho,
    };
    let downstream = if up.theta0 == 0.0 {
        local
    } else {
        local.rotated(up.theta0)
    };
    downstream.validate()?;

    let alpha = up.theta0 + alpha_local;
    let front_slope = if up.theta0 == 0.0 {
        cos_alpha / sin_alpha
    } else {
        alpha.cos() / alpha.sin()
    };
    let kind = gas::classify(&downstream, gas)?.into();
    let w = if up.theta0 == 0.0 { w_local } else { downstream.w() };

    Ok(ShockSolution {
        point: PolarPoint { w, p, branch },
        downstream,
        alpha,
        front_slope,
        kind,
    })
}

/// Jumps of mass, x-momentum, y-momentum and Bernoulli constant across a
/// front `x = f(y)` with slope `front_slope = f'(y)`.
///
/// All four components vanish for a genuine shock (or for identical states).
pub fn rh_residual(up: &FlowState, down: &FlowState, front_slope: f64, gas: &GasConstants) -> [f64; 4] {
    let jump = |f: &dyn Fn(&FlowState) -> f64| f(down) - f(up);
    let mass = jump(&|s| s.rho * s.u) - front_slope * jump(&|s| s.rho * s.v);
    let x_mom = jump(&|s| s.rho * s.u * s.u + s.p) - front_slope * jump(&|s| s.rho * s.u * s.v);
    let y_mom = jump(&|s| s.rho * s.u * s.v) - front_slope * jump(&|s| s.rho * s.v * s.v + s.p);
    let energy = gas::bernoulli(down, gas) - gas::bernoulli(up, gas);
    [mass, x_mom, y_mom, energy]
}

pub fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// `ln(A/A0)` across the shock with downstream pressure `p`, where `A = p/rho^γ`.
///
/// Written with `ln_1p` so that the third-order growth near `p0` stays
/// resolvable; differencing [`gas::entropy_measure`] loses it below
/// `p - p0 ~ 1e-5`.
pub fn hugoniot_entropy_jump(p: f64, up: &UpstreamState, gas: &GasConstants) -> f64 {
    let g = gas.gamma;
    let jump = (p - up.p0) / up.p0;
    let pi = p / up.p0;
    let density_jump = 2.0 * jump / ((g - 1.0) * pi + (g + 1.0));
    jump.ln_1p() - g * density_jump.ln_1p()
}

/// Locates the normal-shock point, the maximal deflection and the sonic point.
pub fn critical_points(up: &UpstreamState, gas: &GasConstants) -> Result<CriticalPoints, PolarError> {
    up.validate(gas)?;
    let p_plus = normal_shock_pressure(up, gas);
    let w_of = |p: f64| deflection_tangent(p, up, gas).unwrap_or(f64::NEG_INFINITY);
    let (p_star, w_star) = numeric::golden_max(w_of, up.p0, p_plus, 1e-12);

    let mach_excess = |p: f64| match shock_relations(p, up, gas, Branch::Plus) {
        Ok(sol) => gas::mach(&sol.downstream, gas).map(|m| m - 1.0).unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    };
    let lo = up.p0 + (p_plus - up.p0) * 1e-12;
    let p_sonic = numeric::bisect(mach_excess, lo, p_plus, 1e-12)?;
    let w_sonic = deflection_tangent(p_sonic, up, gas)?;

    Ok(CriticalPoints {
        p_plus,
        p_star,
        w_star,
        p_sonic,
        w_sonic,
    })
}

/// Weak and strong attached shocks for a wedge of half-angle `theta_w`.
///
/// The weak root lies on `(p0, p*]`, the strong root on `[p*, p⁺)`; both are
/// found by bisection. The entropy-violating intersection below `p0` is never
/// considered.
pub fn oblique_solutions(theta_w: f64, up: &UpstreamState, gas: &GasConstants) -> Result<ObliquePair, PolarError> {
    if !(theta_w > 0.0 && theta_w < std::f64::consts::FRAC_PI_2) {
        return Err(PolarError::InvalidWedge(theta_w));
    }
    let tan_theta = theta_w.tan();
    let cp = critical_points(up, gas)?;
    if tan_theta > cp.w_star * (1.0 + 4.0 * f64::EPSILON) {
        return Err(PolarError::Detached {
            tan_theta,
            w_star: cp.w_star,
        });
    }

    let gap = |p: f64| {
        deflection_tangent(p, up, gas)
            .map(|w| w - tan_theta)
            .unwrap_or(f64::NAN)
    };
    let (p_weak, p_strong) = if gap(cp.p_star) <= 0.0 {
        // Tangent line touches the polar at B.
        (cp.p_star, cp.p_star)
    } else {
        let weak = numeric::bisect(gap, up.p0, cp.p_star, 1e-12)?;
        let strong = numeric::bisect(gap, cp.p_star, cp.p_plus, 1e-12)?;
        (weak, strong)
    };

    Ok(ObliquePair {
        weak: downstream_state(p_weak, up, gas, Branch::Plus)?,
        strong: downstream_state(p_strong, up, gas, Branch::Plus)?,
    })
}

/// `n` points per branch with cosine-clustered pressures on `[p0, p⁺]`.
///
/// Plus branch first, each branch ordered by increasing pressure. `w` is
/// reported in the fixed frame.
pub fn sample_polar(up: &UpstreamState, gas: &GasConstants, n: usize) -> Result<Vec<PolarPoint>, PolarError> {
    if n < 2 {
        return Err(PolarError::Domain {
            p: f64::NAN,
            p0: up.p0,
            p_plus: f64::NAN,
        });
    }
    up.validate(gas)?;
    let pressures = numeric::cosine_spaced(up.p0, normal_shock_pressure(up, gas), n);
    let mut out = Vec::with_capacity(2 * n);
    for branch in Branch::BOTH {
        for &p in &pressures {
            out.push(PolarPoint {
                w: deflected_polar_w(p, up, gas, branch)?,
                p,
                branch,
            });
        }
    }
    Ok(out)
}
