//! Exact-arithmetic toolkit for single-facility location on the real line
//! when every agent has double-peaked preferences.
//!
//! An agent at `x` is happiest when the facility sits at one of its two
//! peaks, `x - b_left` or `x + b_right`, where it pays the base cost `c`.
//! Away from the peaks the cost grows with unit slope. On top of that cost
//! model the crate provides:
//!
//! * [`model`]: cost parameters, normalized instances, lotteries, and the
//!   social / maximum cost objectives,
//! * [`optimal`]: exact minimizers of both objectives by breakpoint
//!   enumeration, plus a grid scan used as an independent oracle,
//! * [`mechanisms`]: the median-peak lottery, the fixed-peak rules, the
//!   k-th order statistic family and the optimal rules seen as mechanisms,
//! * [`verification`]: black-box searches for manipulations and axiom
//!   violations, with exact re-checking of every certificate,
//! * [`experiments`]: adversarial instance families and ratio sweeps.
//!
//! Everything is computed with arbitrary-precision rationals. The crate is
//! `no_std` and only needs `alloc`.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

mod error;
pub mod experiments;
pub mod mechanisms;
pub mod model;
pub mod optimal;
pub mod rational;
pub mod verification;

pub use error::{Error, Result};
pub use mechanisms::{BuiltinMechanism, Mechanism, Side};
pub use model::{CostParams, Instance, Lottery, Objective};
pub use optimal::OptResult;
pub use rational::Rational;
pub use verification::ViolationReport;
