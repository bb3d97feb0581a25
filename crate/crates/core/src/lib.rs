//! # riccati-escape
//!
//! Escape times of matrix Riccati differential equations
//!
//! ```text
//! dY/dt = A21 + A22·Y − Y·A11 − Y·A12·Y
//! ```
//!
//! and mean escape times when the right-hand side is switched between two
//! such equations by a Poisson signal.
//!
//! - [`flow`]: the linear-flow solution `Y = V·U⁻¹`, the guaranteed-existence
//!   step `Δ` (via the Lambert W function) and the escape time as the limit
//!   of `t_{n+1} = t_n + Δ(t_n)`.
//! - [`profile`]: escape time as a function of the initial state, labelling
//!   a whole trajectory per computation.
//! - [`chart`]: the canonical Grassmannian chart, the projection metric and
//!   ε-nets of the projective line.
//! - [`mean_escape`]: the power-series solution of the coupled integral
//!   equations for `T_A`, `T_B`, and the finite transfer-matrix solve.
//! - [`monte_carlo`]: an exact event-driven simulator used as an independent
//!   estimator.
//! - [`job`]: JSON job configs and CSV/JSON artifacts behind the
//!   `riccati-escape` binary.
//!
//! ```
//! use riccati_escape::{escape_time, EscapeOptions, Matrix, RiccatiSystem};
//!
//! // dy/dt = y² + 2y from y(0) = 1 escapes at ln(3)/2.
//! let sys = RiccatiSystem::new(Matrix::from_rows(&[[-1.0, -1.0], [0.0, 1.0]])?, 1)?;
//! let res = escape_time(&sys, &Matrix::scalar(1.0)?, &EscapeOptions::default())?;
//! assert!((res.time().unwrap() - 3f64.ln() / 2.0).abs() < 1e-8);
//! # Ok::<(), riccati_escape::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
mod error;
pub mod flow;
pub mod job;
pub mod mean_escape;
pub mod monte_carlo;
pub mod numerics;
pub mod profile;

pub use chart::{
    build_net, chart_embed, chart_retract, grassmann_distance, ProjectiveAngle, Retraction, SubspacePoint,
};
pub use error::{Error, Result};
pub use flow::{
    delta_step, escape_time, flow, flow_state, rde_rhs, EscapeOptions, EscapeOutcome, EscapeResult,
    FlowOutcome, FlowState, RiccatiSystem,
};
pub use mean_escape::{
    apply_m, build_transfer_matrices, check_bounded, solve_power_series, BoundedReport, ChartGrid, Mode,
    PoissonLaw, SeriesOptions, SwitchedSystem, TransferMatrices,
};
pub use monte_carlo::{estimate_mean_escape, simulate_escape, EscapeSample, EstimatorReport};
pub use numerics::{lambert_w0, matrix_exp, min_singular_value, spectral_norm, Matrix};
pub use profile::{escape_profile, ProfileOptions, ProfilePoint, Sampler};
