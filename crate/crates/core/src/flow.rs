//! Deterministic Riccati differential equations
//!
//! ```text
//! dY/dt = A21 + A22·Y − Y·A11 − Y·A12·Y
//! ```
//!
//! solved through the linear flow `[U; V] = e^{At}[I; Y0]`, `Y = V·U⁻¹`. The
//! solution escapes exactly when `U(t)` first becomes singular. The escape
//! time is found with the step sequence `t_{n+1} = t_n + Δ(t_n)`, where
//!
//! ```text
//! Δ = W(‖A‖ / (‖[I 0]A‖·‖[I; Y(t_n)]‖)) / ‖A‖
//! ```
//!
//! guarantees that the solution still exists on `[t_n, t_n + Δ]`.

use serde::{Deserialize, Serialize};

use crate::chart::SubspacePoint;
use crate::error::{dim_err, Error, Result};
use crate::numerics::{expm, lambert_w0, singular_values, spectral_norm, Matrix, SINGULAR_RTOL};

/// Matrix `A` (d×d) together with the block size `k` of the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSystem {
    a: Matrix,
    k: usize,
    norm_a: f64,
    norm_top: f64,
}

impl RiccatiSystem {
    pub fn new(a: Matrix, k: usize) -> Result<Self> {
        if !a.is_square() {
            return Err(dim_err("RiccatiSystem", "square A", format!("{:?}", a.shape())));
        }
        let d = a.rows();
        if k == 0 || k >= d {
            return Err(dim_err("RiccatiSystem", format!("0 < k < {d}"), k));
        }
        a.ensure_finite("RiccatiSystem")?;
        let norm_a = spectral_norm(&a);
        let norm_top = spectral_norm(&a.block(0, 0, k, d));
        Ok(Self {
            a,
            k,
            norm_a,
            norm_top,
        })
    }

    /// Rotation of the plane with angular speed `omega`, giving
    /// `dy/dt = ω(1 + y²)` in the chart. Negative `omega` rotates clockwise.
    pub fn rotation(omega: f64) -> Result<Self> {
        Self::new(Matrix::from_rows(&[[0.0, -omega], [omega, 0.0]])?, 1)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// Subspace dimension `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Shape of the chart states, `(d − k, k)`.
    pub fn state_shape(&self) -> (usize, usize) {
        (self.dim() - self.k, self.k)
    }

    pub fn a11(&self) -> Matrix {
        self.a.block(0, 0, self.k, self.k)
    }

    pub fn a12(&self) -> Matrix {
        self.a.block(0, self.k, self.k, self.dim() - self.k)
    }

    pub fn a21(&self) -> Matrix {
        self.a.block(self.k, 0, self.dim() - self.k, self.k)
    }

    pub fn a22(&self) -> Matrix {
        let m = self.dim() - self.k;
        self.a.block(self.k, self.k, m, m)
    }

    /// ‖A‖₂.
    pub fn norm(&self) -> f64 {
        self.norm_a
    }

    /// ‖[I 0]A‖₂, the norm of the top block-row.
    pub fn top_row_norm(&self) -> f64 {
        self.norm_top
    }

    pub(crate) fn check_state(&self, y: &Matrix, op: &'static str) -> Result<()> {
        if y.shape() != self.state_shape() {
            return Err(dim_err(
                op,
                format!("{:?}", self.state_shape()),
                format!("{:?}", y.shape()),
            ));
        }
        y.ensure_finite(op)
    }

    /// `[I; Y]`.
    pub(crate) fn lift(&self, y: &Matrix) -> Matrix {
        Matrix::vstack(&Matrix::identity(self.k), y).expect("state shape checked")
    }
}

/// Right-hand side `A21 + A22·Y − Y·A11 − Y·A12·Y`.
pub fn rde_rhs(sys: &RiccatiSystem, y: &Matrix) -> Result<Matrix> {
    sys.check_state(y, "rde_rhs")?;
    let quad = &(y * &sys.a12()) * y;
    Ok(&(&(&sys.a21() + &(&sys.a22() * y)) - &(y * &sys.a11())) - &quad)
}

/// `[U(t); V(t)] = e^{At}[I; Y0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub u: Matrix,
    pub v: Matrix,
    pub t: f64,
}

impl FlowState {
    /// The spanned subspace is numerically off the chart.
    ///
    /// After orthonormalizing `[U; V]` the smallest singular value of the top
    /// block is `1/sqrt(1 + ‖Y‖²)`, which ignores how the linear flow scales
    /// individual columns. A scalar `U` is singular only at zero (its sign
    /// change locates the escape).
    pub fn is_singular(&self) -> bool {
        if self.u.rows() == 1 {
            return !(self.u[(0, 0)].abs() > 0.0);
        }
        self.on_chart_basis().is_none()
    }

    /// `V·U⁻¹`, or `None` if `U` is numerically singular.
    pub fn chart_value(&self) -> Option<Matrix> {
        if self.u.rows() == 1 {
            let u = self.u[(0, 0)];
            return (u.abs() > 0.0).then(|| self.v.scale(1.0 / u));
        }
        let (top, bottom) = self.on_chart_basis()?;
        top.solve_right(&bottom).ok()
    }

    /// Orthonormal basis of the span split into its `U` and `V` blocks, when
    /// the top block is well conditioned.
    fn on_chart_basis(&self) -> Option<(Matrix, Matrix)> {
        let k = self.u.rows();
        let w = Matrix::vstack(&self.u, &self.v).ok()?;
        let basis = SubspacePoint::from_spanning(&w).ok()?.basis().clone();
        let top = basis.block(0, 0, k, k);
        let sv = singular_values(&top);
        (sv[k - 1] >= SINGULAR_RTOL).then(|| (top, basis.block(k, 0, basis.rows() - k, k)))
    }
}

pub fn flow_state(sys: &RiccatiSystem, y0: &Matrix, t: f64) -> Result<FlowState> {
    sys.check_state(y0, "flow_state")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("flow_state time"));
    }
    Ok(linear_flow(sys, &sys.lift(y0), t))
}

fn linear_flow(sys: &RiccatiSystem, lifted: &Matrix, t: f64) -> FlowState {
    let w = &expm(&sys.a.scale(t)) * lifted;
    let (k, m) = (sys.k, sys.dim() - sys.k);
    FlowState {
        u: w.block(0, 0, k, k),
        v: w.block(k, 0, m, k),
        t,
    }
}

/// True when `U` has reached (or passed) the singular set: `det U` has
/// changed sign from `det U(0) = 1`, or `U` is numerically singular.
///
/// Gram–Schmidt writes `[U; V] = Q·R` with `R` having a positive diagonal, so
/// the top block of `Q` has the sign of `det U` at a sane scale.
fn u_singular(state: &FlowState) -> bool {
    if state.u.rows() == 1 {
        return !(state.u[(0, 0)] > 0.0);
    }
    match state.on_chart_basis() {
        Some((top, _)) => !(top.determinant().unwrap_or(0.0) > 0.0),
        None => true,
    }
}

/// Result of [`flow`].
#[derive(Debug, Clone, PartialEq)]
pub enum FlowOutcome {
    /// `Y(t; Y0)`.
    State(Matrix),
    /// The solution escaped at time `at`, no later than the requested time.
    Escaped { at: f64 },
}

/// `Y(t; Y0)`, with existence on `[0, t]` certified by the Δ-step sequence.
pub fn flow(sys: &RiccatiSystem, y0: &Matrix, t: f64) -> Result<FlowOutcome> {
    flow_with(sys, y0, t, &EscapeOptions::default())
}

pub fn flow_with(sys: &RiccatiSystem, y0: &Matrix, t: f64, opts: &EscapeOptions) -> Result<FlowOutcome> {
    sys.check_state(y0, "flow")?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            op: "flow",
            name: "t",
            value: t,
        });
    }
    if t == 0.0 {
        return Ok(FlowOutcome::State(y0.clone()));
    }
    if sys.norm_top == 0.0 {
        // U ≡ I.
        let state = linear_flow(sys, &sys.lift(y0), t).chart_value();
        return Ok(FlowOutcome::State(state.expect("U is the identity")));
    }
    let capped = EscapeOptions { t_cap: t, ..*opts };
    let (res, t_n, y_n) = step_sequence(sys, y0, &capped)?;
    let evaluate = || {
        let anchor = Anchor {
            lifted: sys.lift(&y_n),
            t: t_n,
        };
        let state = anchor.state(sys, t).chart_value();
        Ok(state.map_or(FlowOutcome::Escaped { at: t }, FlowOutcome::State))
    };
    match res.outcome {
        EscapeOutcome::NotBefore { horizon } if horizon >= t => evaluate(),
        EscapeOutcome::Finite { time } if time > t => evaluate(),
        EscapeOutcome::Finite { time } => Ok(FlowOutcome::Escaped { at: time }),
        EscapeOutcome::NotBefore { horizon } => Err(Error::Numerical(format!(
            "step budget exhausted at t = {horizon} before certifying the flow up to {t}"
        ))),
    }
}

/// `Y(t; Y0)` without certifying existence on `[0, t]`. Callers must know
/// that `t` is below the escape time; returns `None` if `U(t)` is singular.
///
/// Long horizons are split into pieces with `‖A‖·h` bounded and the basis of
/// the span is re-orthonormalized between pieces, so a dominant growth
/// direction cannot swamp the other columns (or overflow).
pub fn flow_unchecked(sys: &RiccatiSystem, y0: &Matrix, t: f64) -> Option<Matrix> {
    let reach = if sys.k == 1 { 200.0 } else { 2.0 };
    let pieces = (t.abs() * sys.norm_a / reach).ceil().max(1.0);
    if pieces == 1.0 {
        return linear_flow(sys, &sys.lift(y0), t).chart_value();
    }
    let step = expm(&sys.a.scale(t / pieces));
    let mut basis = sys.lift(y0);
    for _ in 0..pieces as usize {
        let w = &step * &basis;
        basis = SubspacePoint::from_spanning(&w).ok()?.basis().clone();
    }
    let k = sys.k;
    FlowState {
        u: basis.block(0, 0, k, k),
        v: basis.block(k, 0, basis.rows() - k, k),
        t,
    }
    .chart_value()
}

/// Guaranteed-existence step `Δ` from state `Y`.
pub fn delta_step(sys: &RiccatiSystem, y: &Matrix) -> Result<f64> {
    sys.check_state(y, "delta_step")?;
    delta_unchecked(sys, y)
}

fn delta_unchecked(sys: &RiccatiSystem, y: &Matrix) -> Result<f64> {
    if sys.norm_top == 0.0 {
        return Err(Error::NoEscapePossibleFromLinearPart);
    }
    // ‖[I; Y]‖² = 1 + ‖Y‖² since [I; Y]ᵀ[I; Y] = I + YᵀY.
    let ny = spectral_norm(y);
    let lifted_norm = ny.hypot(1.0);
    let x = sys.norm_a / (sys.norm_top * lifted_norm);
    Ok(lambert_w0(x)? / sys.norm_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscapeOptions {
    /// Stop iterating once `Δ(t_n)` drops below this; also the width of the
    /// final bisection bracket.
    pub tol: f64,
    /// Report "no escape before `t_cap`" once the sequence passes it.
    pub t_cap: f64,
    /// Maximum number of Δ-steps.
    pub n_max: usize,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            t_cap: 50.0,
            n_max: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EscapeOutcome {
    /// The solution escapes at `time`.
    Finite { time: f64 },
    /// The solution certainly exists on `[0, horizon]`; nothing is claimed
    /// beyond. `horizon` is `t_cap` unless the step budget ran out first.
    NotBefore { horizon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeResult {
    pub outcome: EscapeOutcome,
    /// Iterates `t_0 = 0 < t_1 < …`; every one lies before the escape time.
    pub steps: Vec<f64>,
    /// `deltas[n] = Δ(t_n)`; one shorter than `steps`, except when the last
    /// Δ fell below the resolution of `t` and produced no new iterate.
    pub deltas: Vec<f64>,
}

impl EscapeResult {
    pub fn time(&self) -> Option<f64> {
        match self.outcome {
            EscapeOutcome::Finite { time } => Some(time),
            EscapeOutcome::NotBefore { .. } => None,
        }
    }

    /// Escape time, with `+∞` for the capped outcome.
    pub fn time_or_inf(&self) -> f64 {
        self.time().unwrap_or(f64::INFINITY)
    }
}

// Bracket search multiplies Δ by up to 2^BRACKET_DOUBLINGS when looking for
// the sign change of det U past the last certified iterate.
const BRACKET_DOUBLINGS: u32 = 10;

/// Escape time of the RDE started at `Y0`.
///
/// Runs the Δ-step sequence from `t_0 = 0`. When `Δ(t_n) < tol`, the
/// first sign change of `det U` is bracketed just past `t_n + Δ(t_n)` and
/// bisected to a width below `tol`. A bracket that cannot be found (the
/// trajectory only grazes the chart boundary) lets the iteration continue.
pub fn escape_time(sys: &RiccatiSystem, y0: &Matrix, opts: &EscapeOptions) -> Result<EscapeResult> {
    sys.check_state(y0, "escape_time")?;
    if sys.norm_top == 0.0 {
        return Err(Error::NoEscapePossibleFromLinearPart);
    }
    if !(opts.tol > 0.0) || !(opts.t_cap > 0.0) {
        return Err(Error::Domain {
            op: "escape_time",
            name: "tol/t_cap",
            value: opts.tol.min(opts.t_cap),
        });
    }
    Ok(step_sequence(sys, y0, opts)?.0)
}

/// The Δ-step iteration behind [`escape_time`], also returning the last
/// certified iterate `(t_n, Y(t_n))`.
///
/// Each step propagates from the previous iterate rather than from `t = 0`:
/// over long horizons the dominant direction of `e^{At}` swamps the others
/// and `e^{At}[I; Y0]` loses the subspace to cancellation.
fn step_sequence(
    sys: &RiccatiSystem,
    y0: &Matrix,
    opts: &EscapeOptions,
) -> Result<(EscapeResult, f64, Matrix)> {
    let mut steps = vec![0.0];
    let mut deltas = Vec::new();
    let mut t = 0.0;
    let mut y = y0.clone();
    let finish = |outcome, steps, deltas, t, y| {
        Ok((
            EscapeResult {
                outcome,
                steps,
                deltas,
            },
            t,
            y,
        ))
    };
    for _ in 0..opts.n_max {
        let delta = delta_unchecked(sys, &y)?;
        deltas.push(delta);
        let next = t + delta;
        if next == t {
            // Δ below the resolution of t: escape is at t to machine precision.
            return finish(EscapeOutcome::Finite { time: t }, steps, deltas, t, y);
        }
        steps.push(next);
        if next > opts.t_cap {
            let horizon = opts.t_cap;
            return finish(EscapeOutcome::NotBefore { horizon }, steps, deltas, t, y);
        }
        let anchor = Anchor {
            lifted: sys.lift(&y),
            t,
        };
        if delta < opts.tol {
            if let Some(time) = refine(sys, &anchor, next, delta, opts.tol) {
                return finish(EscapeOutcome::Finite { time }, steps, deltas, t, y);
            }
        }
        match anchor.state(sys, next).chart_value() {
            Some(next_y) => {
                y = next_y;
                t = next;
            }
            None => {
                // U(t) is already numerically singular at a certified iterate:
                // the escape is within rounding of it.
                let time = refine(sys, &anchor, next, delta.max(opts.tol), opts.tol).unwrap_or(next);
                return finish(EscapeOutcome::Finite { time }, steps, deltas, t, y);
            }
        }
    }
    finish(EscapeOutcome::NotBefore { horizon: t }, steps, deltas, t, y)
}

/// A certified point `(t, [I; Y(t)])` to propagate the linear flow from.
struct Anchor {
    lifted: Matrix,
    t: f64,
}

impl Anchor {
    fn state(&self, sys: &RiccatiSystem, t: f64) -> FlowState {
        FlowState {
            t,
            ..linear_flow(sys, &self.lifted, t - self.t)
        }
    }
}

/// Brackets the singular time of `U` in `(lo, lo + 2^j·delta]` and bisects it.
fn refine(sys: &RiccatiSystem, anchor: &Anchor, lo: f64, delta: f64, tol: f64) -> Option<f64> {
    let singular_at = |t: f64| u_singular(&anchor.state(sys, t));
    let mut lo = lo;
    let mut width = delta.max(f64::EPSILON * lo.abs().max(1.0));
    let mut hi = None;
    for _ in 0..=BRACKET_DOUBLINGS {
        let cand = lo + width;
        if singular_at(cand) {
            hi = Some(cand);
            break;
        }
        width *= 2.0;
    }
    let mut hi = hi?;
    // Keep the certified end of the bracket strictly regular.
    while hi - lo > 0.5 * tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if singular_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
