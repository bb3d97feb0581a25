use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponential holding-time law of a rate-`λ` Poisson process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonLaw {
    lambda: f64,
}

impl PoissonLaw {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain {
                op: "PoissonLaw",
                name: "lambda",
                value: lambda,
            });
        }
        Ok(Self { lambda })
    }

    pub fn rate(&self) -> f64 {
        self.lambda
    }

    /// `f(t) = λe^{−λt}`.
    pub fn density(&self, t: f64) -> f64 {
        self.lambda * (-self.lambda * t).exp()
    }

    /// `F(t) = 1 − e^{−λt}`.
    pub fn cdf(&self, t: f64) -> f64 {
        -(-self.lambda * t).exp_m1()
    }

    /// `∫_a^b f(τ) dτ`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        (-self.lambda * a).exp() * -(-self.lambda * (b - a)).exp_m1()
    }

    /// Expected escape time without switching from a state whose deterministic
    /// escape time is `t_escape`:
    ///
    /// ```text
    /// g(T) = ∫_0^T τ f(τ) dτ + T (1 − F(T)) = (1 − e^{−λT}) / λ
    /// ```
    ///
    /// `T = +∞` gives the mean `1/λ` of the holding time.
    pub fn g_value(&self, t_escape: f64) -> Result<f64> {
        if t_escape.is_nan() || t_escape < 0.0 {
            return Err(Error::Domain {
                op: "g_value",
                name: "t_escape",
                value: t_escape,
            });
        }
        Ok(self.cdf(t_escape) / self.lambda)
    }

    /// Nodes and weights for `∫_0^{t_end} f(τ) φ(τ) dτ ≈ Σ w_j φ(τ_j)`.
    ///
    /// Composite Simpson in the smooth factor `φ` only: `φ` is interpolated
    /// quadratically on each pair of panels and the density is integrated
    /// against the interpolant exactly, so the weights sum to `F(t_end)`
    /// whatever `λ·t_end` is. `panels` is rounded up to an even count ≥ 2.
    pub fn simpson_weights(&self, t_end: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let n = panels.max(2) + panels % 2;
        let h = t_end / n as f64;
        let [m0, m1, m2] = self.moments(2.0 * h);
        let hh = h * h;
        let local = [
            (m2 - 3.0 * h * m1 + 2.0 * hh * m0) / (2.0 * hh),
            -(m2 - 2.0 * h * m1) / hh,
            (m2 - h * m1) / (2.0 * hh),
        ];
        let nodes = (0..=n).map(|i| h * i as f64).collect();
        let mut weights = vec![0.0; n + 1];
        for p in 0..n / 2 {
            let decay = (-self.lambda * 2.0 * h * p as f64).exp();
            for (q, w) in local.iter().enumerate() {
                weights[2 * p + q] += decay * w;
            }
        }
        (nodes, weights)
    }

    /// `∫_0^b s^k f(s) ds` for `k = 0, 1, 2`.
    fn moments(&self, b: f64) -> [f64; 3] {
        let x = self.lambda * b;
        if x < 0.1 {
            // λ·b^{k+1} Σ_i (−x)^i / (i! (i + k + 1)), free of cancellation.
            let mut out = [0.0; 3];
            for (k, m) in out.iter_mut().enumerate() {
                let (mut term, mut sum) = (1.0, 0.0);
                for i in 0..30 {
                    sum += term / (i + k + 1) as f64;
                    term *= -x / (i + 1) as f64;
                }
                *m = self.lambda * b.powi(k as i32 + 1) * sum;
            }
            return out;
        }
        let e = (-x).exp();
        let m0 = -(-x).exp_m1();
        let m1 = -b * e + m0 / self.lambda;
        let m2 = -b * b * e + 2.0 * m1 / self.lambda;
        [m0, m1, m2]
    }
}
