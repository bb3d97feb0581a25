//! Mean escape times of an RDE switched between two subsystems by a Poisson
//! signal.
//!
//! With `T_A`, `T_B` the mean escape times from mode A and B, the renewal
//! argument on the first switching time gives
//!
//! ```text
//! T_A = g_A + M_A T_B,    (M_A T)(Y) = ∫_0^{t_A(Y)} f(τ) T(e^{Aτ}.Y) dτ
//! T_B = g_B + M_B T_A
//! ```
//!
//! and, when both deterministic escape times are bounded by `t0`, the block
//! operator `M = [0 M_A; M_B 0]` has norm at most `F(t0) < 1`, so
//! `[T_A; T_B] = Σ_k M^k [g_A; g_B]`.
//!
//! Two discretizations are provided on a grid of the projective line:
//! [`solve_power_series`] (Simpson quadrature with linear interpolation in
//! angle) and [`build_transfer_matrices`] (left-point time cells with
//! nearest-net-point quantization, solved as one linear system).

mod grid;
mod law;
mod series;
mod transfer;

use serde::{Deserialize, Serialize};

pub use grid::{check_bounded, BoundedReport, ChartGrid};
pub use law::PoissonLaw;
pub use series::{apply_m, solve_power_series, QuadraturePlan, SeriesOptions};
pub use transfer::{build_transfer_matrices, default_time_step, TransferMatrices};

use crate::error::{dim_err, Result};
use crate::flow::RiccatiSystem;

/// Active subsystem of the switched equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    pub fn toggle(self) -> Self {
        match self {
            Mode::A => Mode::B,
            Mode::B => Mode::A,
        }
    }
}

/// Two Riccati systems on the same Grassmannian, switched at rate `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedSystem {
    sys_a: RiccatiSystem,
    sys_b: RiccatiSystem,
    law: PoissonLaw,
}

impl SwitchedSystem {
    pub fn new(sys_a: RiccatiSystem, sys_b: RiccatiSystem, lambda: f64) -> Result<Self> {
        if (sys_a.dim(), sys_a.k()) != (sys_b.dim(), sys_b.k()) {
            return Err(dim_err(
                "SwitchedSystem",
                format!("(d, k) = ({}, {})", sys_a.dim(), sys_a.k()),
                format!("({}, {})", sys_b.dim(), sys_b.k()),
            ));
        }
        Ok(Self {
            sys_a,
            sys_b,
            law: PoissonLaw::new(lambda)?,
        })
    }

    /// Counter-clockwise rotation at speed `omega` switched with a clockwise
    /// rotation at speed `gamma`: `dy = [z·ω(1+y²) − (1−z)·γ(1+y²)]dt`.
    pub fn rotations(omega: f64, gamma: f64, lambda: f64) -> Result<Self> {
        Self::new(
            RiccatiSystem::rotation(omega)?,
            RiccatiSystem::rotation(-gamma)?,
            lambda,
        )
    }

    pub fn system(&self, mode: Mode) -> &RiccatiSystem {
        match mode {
            Mode::A => &self.sys_a,
            Mode::B => &self.sys_b,
        }
    }

    pub fn sys_a(&self) -> &RiccatiSystem {
        &self.sys_a
    }

    pub fn sys_b(&self) -> &RiccatiSystem {
        &self.sys_b
    }

    pub fn law(&self) -> PoissonLaw {
        self.law
    }

    pub fn lambda(&self) -> f64 {
        self.law.rate()
    }

    pub(crate) fn require_projective_line(&self, op: &'static str) -> Result<()> {
        if (self.sys_a.dim(), self.sys_a.k()) != (2, 1) {
            return Err(dim_err(
                op,
                "d = 2, k = 1 (projective line)",
                format!("d = {}, k = {}", self.sys_a.dim(), self.sys_a.k()),
            ));
        }
        Ok(())
    }
}
