//! Polytropic gas states and the pointwise relations of steady 2-D Euler flow.
//!
//! Everything here is nondimensional. The usual normalization takes the
//! upstream state to `p0 = rho0 = 1`, but nothing in this module relies on it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("adiabatic exponent must exceed 1, got {0}")]
    Gamma(f64),
    #[error("tolerance {name} = {value} outside its admissible range")]
    Tolerance { name: &'static str, value: f64 },
    #[error("non-physical state: {0}")]
    NonPhysical(String),
}

/// Adiabatic exponent plus the two tolerances shared by the whole crate.
///
/// `tol_state` is the half-width of the sonic band used by [`classify`];
/// `tol_alg` bounds algebraic residuals such as the Rankine–Hugoniot defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConstants {
    pub gamma: f64,
    #[serde(default = "default_tol_state")]
    pub tol_state: f64,
    #[serde(default = "default_tol_alg")]
    pub tol_alg: f64,
}

fn default_tol_state() -> f64 {
    1e-9
}

fn default_tol_alg() -> f64 {
    1e-10
}

impl GasConstants {
    pub fn new(gamma: f64) -> Result<Self, StateError> {
        Self::with_tolerances(gamma, default_tol_state(), default_tol_alg())
    }

    pub fn with_tolerances(gamma: f64, tol_state: f64, tol_alg: f64) -> Result<Self, StateError> {
        let gas = Self {
            gamma,
            tol_state,
            tol_alg,
        };
        gas.validate()?;
        Ok(gas)
    }

    pub fn validate(&self) -> Result<(), StateError> {
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(StateError::Gamma(self.gamma));
        }
        if !(self.tol_state > 0.0 && self.tol_state < 1e-3) {
            return Err(StateError::Tolerance {
                name: "tol_state",
                value: self.tol_state,
            });
        }
        if !(self.tol_alg > 0.0 && self.tol_alg < 1e-6) {
            return Err(StateError::Tolerance {
                name: "tol_alg",
                value: self.tol_alg,
            });
        }
        Ok(())
    }

    /// Air, `gamma = 1.4`, default tolerances.
    pub fn air() -> Self {
        Self {
            gamma: 1.4,
            tol_state: default_tol_state(),
            tol_alg: default_tol_alg(),
        }
    }
}

/// Primitive state `(p, u, v, rho)` of one flow region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub p: f64,
    pub u: f64,
    pub v: f64,
    pub rho: f64,
}

impl FlowState {
    pub fn new(p: f64, u: f64, v: f64, rho: f64) -> Result<Self, StateError> {
        let s = Self { p, u, v, rho };
        s.validate()?;
        Ok(s)
    }

    /// Checks `p > 0`, `rho > 0`, `u > 0` and finiteness.
    pub fn validate(&self) -> Result<(), StateError> {
        let finite = [self.p, self.u, self.v, self.rho].iter().all(|x| x.is_finite());
        if !finite {
            return Err(StateError::NonPhysical(format!("non-finite component in {self:?}")));
        }
        if self.p <= 0.0 || self.rho <= 0.0 {
            return Err(StateError::NonPhysical(format!(
                "pressure and density must be positive (p = {}, rho = {})",
                self.p, self.rho
            )));
        }
        if self.u <= 0.0 {
            return Err(StateError::NonPhysical(format!(
                "horizontal velocity must be positive (u = {})",
                self.u
            )));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// Tangent of the flow angle, `w = v / u`.
    pub fn w(&self) -> f64 {
        self.v / self.u
    }

    pub fn flow_angle(&self) -> f64 {
        self.v.atan2(self.u)
    }

    /// Same thermodynamic state with the velocity rotated counter-clockwise by `angle`.
    pub fn rotated(&self, angle: f64) -> FlowState {
        let (s, c) = angle.sin_cos();
        FlowState {
            p: self.p,
            u: self.u * c - self.v * s,
            v: self.u * s + self.v * c,
            rho: self.rho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowRegime {
    Subsonic,
    Sonic,
    Supersonic,
}

/// `c = sqrt(gamma p / rho)`.
pub fn sound_speed(state: &FlowState, gas: &GasConstants) -> Result<f64, StateError> {
    let c = (gas.gamma * state.p / state.rho).sqrt();
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(StateError::NonPhysical(format!("sound speed undefined for {state:?}")))
    }
}

pub fn mach(state: &FlowState, gas: &GasConstants) -> Result<f64, StateError> {
    Ok(state.speed() / sound_speed(state, gas)?)
}

/// Sonic band is `|M - 1| <= tol_state`.
pub fn classify_mach(m: f64, gas: &GasConstants) -> FlowRegime {
    if m < 1.0 - gas.tol_state {
        FlowRegime::Subsonic
    } else if m > 1.0 + gas.tol_state {
        FlowRegime::Supersonic
    } else {
        FlowRegime::Sonic
    }
}

pub fn classify(state: &FlowState, gas: &GasConstants) -> Result<FlowRegime, StateError> {
    Ok(classify_mach(mach(state, gas)?, gas))
}

/// Bernoulli constant `b0 = (u^2 + v^2)/2 + c^2/(gamma - 1)`.
pub fn bernoulli(state: &FlowState, gas: &GasConstants) -> f64 {
    0.5 * (state.u * state.u + state.v * state.v) + gas.gamma * state.p / ((gas.gamma - 1.0) * state.rho)
}

/// Entropy function `A = p / rho^gamma`.
pub fn entropy_measure(state: &FlowState, gas: &GasConstants) -> f64 {
    state.p / state.rho.powf(gas.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn air() -> GasConstants {
        GasConstants::air()
    }

    #[test]
    fn sound_speed_examples() {
        let g = air();
        let s = FlowState::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(sound_speed(&s, &g).unwrap(), 1.4f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(sound_speed(&s, &g).unwrap(), 1.183_215_956_619_923_2, epsilon = 1e-15);

        let unit = FlowState::new(1.0, 1.0, 0.0, 1.4).unwrap();
        assert_eq!(sound_speed(&unit, &g).unwrap(), 1.0);

        let down = FlowState::new(4.5, 1.0, 0.0, 8.0 / 3.0).unwrap();
        // sqrt(1.4 * 4.5 * 3 / 8) = sqrt(2.3625)
        assert_relative_eq!(sound_speed(&down, &g).unwrap(), 2.3625f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(sound_speed(&down, &g).unwrap(), 1.537_042_614_5, epsilon = 1e-9);
    }

    #[test]
    fn mach_and_classification() {
        let g = air();
        let c = 1.4f64.sqrt();
        let s = FlowState::new(1.0, 2.0 * c, 0.0, 1.0).unwrap();
        assert_relative_eq!(mach(&s, &g).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(classify(&s, &g).unwrap(), FlowRegime::Supersonic);

        let sonic = FlowState::new(1.0, c, 0.0, 1.0).unwrap();
        assert_eq!(classify(&sonic, &g).unwrap(), FlowRegime::Sonic);

        let sub = FlowState::new(1.0, 0.5 * c, 0.0, 1.0).unwrap();
        assert_eq!(classify(&sub, &g).unwrap(), FlowRegime::Subsonic);
    }

    #[test]
    fn bernoulli_examples() {
        let g = air();
        // c = 1 with p = 1 requires rho = gamma.
        let s = FlowState::new(1.0, 1.0, 0.0, 1.4).unwrap();
        assert_relative_eq!(bernoulli(&s, &g), 3.0, epsilon = 1e-14);

        let u0 = 2.0 * 1.4f64.sqrt();
        let up = FlowState::new(1.0, u0, 0.0, 1.0).unwrap();
        assert_relative_eq!(bernoulli(&up, &g), 6.3, epsilon = 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let g = air();
        let s = FlowState::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(entropy_measure(&s, &g), 1.0);
        let down = FlowState::new(4.5, 1.0, 0.0, 8.0 / 3.0).unwrap();
        let expected = 4.5 / (8.0f64 / 3.0).powf(1.4);
        assert_relative_eq!(entropy_measure(&down, &g), expected, epsilon = 1e-15);
        assert!((entropy_measure(&down, &g) - 1.139_873).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GasConstants::new(1.0).is_err());
        assert!(GasConstants::with_tolerances(1.4, 1e-2, 1e-10).is_err());
        assert!(GasConstants::with_tolerances(1.4, 1e-9, 1e-5).is_err());
        assert!(FlowState::new(-1.0, 1.0, 0.0, 1.0).is_err());
        assert!(FlowState::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(FlowState::new(1.0, -0.1, 0.0, 1.0).is_err());
        assert!(FlowState::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn bernoulli_rotation_invariant(
            p in 0.1f64..10.0, rho in 0.1f64..10.0, q in 0.01f64..5.0, angle in -1.5f64..1.5
        ) {
            let g = air();
            let aligned = FlowState { p, u: q, v: 0.0, rho };
            let turned = aligned.rotated(angle);
            let b0 = bernoulli(&aligned, &g);
            prop_assert!((bernoulli(&turned, &g) - b0).abs() <= 1e-13 * b0);
        }

        #[test]
        fn classification_stable_under_small_perturbation(
            offset in -5.0f64..5.0, frac in -1.0f64..1.0
        ) {
            let g = air();
            // Sample around the sonic band, in units of tol_state.
            let m = 1.0 + offset * g.tol_state;
            let lo = 1.0 - g.tol_state;
            let hi = 1.0 + g.tol_state;
            let gap = (m - lo).abs().min((m - hi).abs());
            prop_assume!(gap > 0.2 * g.tol_state);
            let perturbed = m + frac * 0.1 * g.tol_state;
            prop_assert_eq!(classify_mach(m, &g), classify_mach(perturbed, &g));
        }
    }
}
