//! Elliptic structure of subsonic flow in Lagrangian coordinates `(xi, eta)`.
//!
//! With `xi = x` and `eta` the stream function, the linearization about a
//! uniform state reduces to the first-order system `Dw = W Dp`, where
//!
//! ```text
//! W = -1/b1 [[ l, b1 b2 + l^2 ],
//!            [ -1,        -l  ]]
//! ```
//!
//! with `l = lambda_r`, `b1 = beta1`, `b2 = beta2`. Eliminating `w` gives the
//! divergence-form equation
//!
//! ```text
//! d_xi (p_xi/b1 + l p_eta/b1) + d_eta (l p_xi/b1 + (b2 + l^2/b1) p_eta) = 0.
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::{self, FlowRegime, FlowState, GasConstants, StateError};
use crate::polar::UpstreamState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticityError {
    #[error("state is not subsonic (M = {0})")]
    NotSubsonic(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticCoefficients {
    pub lambda_r: f64,
    pub beta1: f64,
    pub beta2: f64,
}

/// Entries of `W`, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixW {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl MatrixW {
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn mul(&self, other: &MatrixW) -> MatrixW {
        MatrixW {
            a11: self.a11 * other.a11 + self.a12 * other.a21,
            a12: self.a11 * other.a12 + self.a12 * other.a22,
            a21: self.a21 * other.a11 + self.a22 * other.a21,
            a22: self.a21 * other.a12 + self.a22 * other.a22,
        }
    }

    pub fn scaled(&self, k: f64) -> MatrixW {
        MatrixW {
            a11: k * self.a11,
            a12: k * self.a12,
            a21: k * self.a21,
            a22: k * self.a22,
        }
    }

    /// `(x, y) -> W (x, y)^T`.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)
    }
}

/// `lambda_r`, `beta1`, `beta2` at a subsonic state.
pub fn coefficients(state: &FlowState, gas: &GasConstants) -> Result<EllipticCoefficients, EllipticityError> {
    state.validate()?;
    let m = gas::mach(state, gas)?;
    if gas::classify_mach(m, gas) != FlowRegime::Subsonic {
        return Err(EllipticityError::NotSubsonic(m));
    }
    let c2 = gas.gamma * state.p / state.rho;
    let (u, rho) = (state.u, state.rho);
    let w = state.w();
    let gap = u * u - c2;
    Ok(EllipticCoefficients {
        lambda_r: rho * c2 * u * w / gap,
        beta1: -rho * rho * c2 * u.powi(3) / gap,
        beta2: (m * m - 1.0) * c2 / (u * gap),
    })
}

pub fn matrix_w(c: &EllipticCoefficients) -> MatrixW {
    let k = -1.0 / c.beta1;
    MatrixW {
        a11: k * c.lambda_r,
        a12: k * (c.beta1 * c.beta2 + c.lambda_r * c.lambda_r),
        a21: -k,
        a22: -k * c.lambda_r,
    }
}

/// `W^-1 = -(beta1/beta2) W`.
pub fn matrix_w_inverse(c: &EllipticCoefficients) -> MatrixW {
    matrix_w(c).scaled(-c.beta1 / c.beta2)
}

/// Closed form of `tau W n^T` with `tau = (psi', 1)`, `n = (1, -psi')`.
pub fn boundary_sign(c: &EllipticCoefficients, psi_prime: f64) -> f64 {
    let a = c.lambda_r * psi_prime - 1.0;
    (a * a + c.beta1 * c.beta2 * psi_prime * psi_prime) / c.beta1
}

/// The same quadratic form evaluated by matrix products.
pub fn boundary_sign_direct(c: &EllipticCoefficients, psi_prime: f64) -> f64 {
    let (wx, wy) = matrix_w(c).apply(1.0, -psi_prime);
    psi_prime * wx + wy
}

/// Discriminant `4 beta2 / beta1 = 4 (1 - M^2) / (rho^2 u^4)`.
pub fn ellipticity(state: &FlowState, gas: &GasConstants) -> Result<f64, EllipticityError> {
    let c = coefficients(state, gas)?;
    Ok(4.0 * c.beta2 / c.beta1)
}

/// Closed form `(1 - M^2) / (rho^2 u^4)` of `det W`.
pub fn det_w_closed_form(state: &FlowState, gas: &GasConstants) -> Result<f64, EllipticityError> {
    let m = gas::mach(state, gas)?;
    Ok((1.0 - m * m) / (state.rho * state.rho * state.u.powi(4)))
}

/// Height of the Lagrangian duct, `eta0 = rho0 u0`.
pub fn duct_mass_flux(up: &UpstreamState) -> f64 {
    up.rho0 * up.u0
}

/// Symmetric coefficient tensor of the divergence-form equation.
pub fn divergence_tensor(c: &EllipticCoefficients) -> [[f64; 2]; 2] {
    let off = c.lambda_r / c.beta1;
    [[1.0 / c.beta1, off], [off, c.beta2 + c.lambda_r * c.lambda_r / c.beta1]]
}

/// Smaller eigenvalue of a symmetric 2x2 matrix.
pub fn min_eigenvalue(a: &[[f64; 2]; 2]) -> f64 {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half_diff = 0.5 * (a[0][0] - a[1][1]);
    mean - half_diff.hypot(a[0][1])
}
