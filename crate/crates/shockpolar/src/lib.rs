//! Steady two-dimensional transonic shocks for a polytropic gas.
//!
//! * [`gas`]: states, sound speed, Bernoulli constant, entropy.
//! * [`polar`]: the shock polar, oblique and normal shocks, jump residuals.
//! * [`mach`]: flat Mach configurations from two intersecting polars.
//! * [`lagrangian`]: coefficients of the elliptic system behind a shock.
//! * [`duct`]: the free-boundary duct problem solved by Picard iteration.
//! * [`cli`]: the `shockpolar` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod duct;
pub mod gas;
pub mod lagrangian;
pub mod mach;
pub mod numeric;
pub mod polar;
pub mod stencil;
pub mod svg;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polar.md")]
    mod polar {}
    #[doc = include_str!("../../../book/src/mach.md")]
    mod mach {}
    #[doc = include_str!("../../../book/src/elliptic.md")]
    mod elliptic {}
    #[doc = include_str!("../../../book/src/duct.md")]
    mod duct {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
