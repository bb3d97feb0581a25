//! Event-driven simulation of the Poisson-switched equation.
//!
//! Between switches the state follows one deterministic flow exactly, so a
//! sample only needs the holding time `τ ~ Exp(λ)` and the deterministic
//! escape time of the active subsystem: if `τ` exceeds it the sample
//! escapes, otherwise the state is advanced by `τ` and the mode toggles.

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{escape_time, flow_unchecked, EscapeOptions, EscapeOutcome};
use crate::mean_escape::{Mode, SwitchedSystem};
use crate::numerics::{pairwise_sum, Matrix};
use crate::profile::indexed_rng;

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeSample {
    /// Switching times, strictly increasing.
    pub jump_times: Vec<f64>,
    /// Active mode on each segment; `modes.len() == jump_times.len() + 1`.
    pub modes: Vec<Mode>,
    /// Escape time, or the time at which the sample was censored.
    pub escape_time: f64,
    /// No escape was observed before the cap.
    pub capped: bool,
}

/// Simulates one trajectory from `(y0, z0)` with its own seed.
///
/// `opts.t_cap` bounds the total simulated time. A mode whose linear part
/// cannot produce an escape is treated as having infinite escape time.
pub fn simulate_escape(
    sw: &SwitchedSystem,
    y0: &Matrix,
    z0: Mode,
    rng_seed: u64,
    opts: &EscapeOptions,
) -> Result<EscapeSample> {
    simulate_indexed(sw, y0, z0, rng_seed, 0, opts)
}

fn simulate_indexed(
    sw: &SwitchedSystem,
    y0: &Matrix,
    z0: Mode,
    seed: u64,
    index: u64,
    opts: &EscapeOptions,
) -> Result<EscapeSample> {
    sw.system(z0).check_state(y0, "simulate_escape")?;
    let mut rng = indexed_rng(seed, index);
    let holding = Exp::new(sw.lambda()).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut y = y0.clone();
    let mut mode = z0;
    let mut elapsed = 0.0;
    let mut sample = EscapeSample {
        jump_times: Vec::new(),
        modes: vec![mode],
        escape_time: 0.0,
        capped: false,
    };
    loop {
        let remaining = opts.t_cap - elapsed;
        let sys = sw.system(mode);
        let tau: f64 = holding.sample(&mut rng);
        // `horizon`: the flow certainly exists on [0, horizon].
        let horizon = match escape_time(
            sys,
            &y,
            &EscapeOptions {
                t_cap: remaining,
                ..*opts
            },
        ) {
            Ok(res) => match res.outcome {
                EscapeOutcome::Finite { time } => {
                    if tau >= time {
                        sample.escape_time = elapsed + time;
                        return Ok(sample);
                    }
                    time
                }
                EscapeOutcome::NotBefore { horizon } => horizon,
            },
            Err(Error::NoEscapePossibleFromLinearPart) => remaining,
            Err(e) => return Err(e),
        };
        if tau >= horizon {
            sample.escape_time = elapsed + horizon;
            sample.capped = true;
            return Ok(sample);
        }
        y = flow_unchecked(sys, &y, tau).ok_or_else(|| {
            Error::Numerical(format!("flow singular before escape at t = {}", elapsed + tau))
        })?;
        elapsed += tau;
        mode = mode.toggle();
        sample.jump_times.push(elapsed);
        sample.modes.push(mode);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    /// Mean escape time over uncapped samples.
    pub mean: f64,
    /// Sample standard deviation over `√n_escaped`; zero for one sample.
    pub stderr: f64,
    /// Number of trials.
    pub n: usize,
    pub n_escaped: usize,
    pub capped_fraction: f64,
}

/// Averages `n_trials` independent samples; trial `i` uses stream `i` of
/// `rng_seed`, so the report does not depend on scheduling.
pub fn estimate_mean_escape(
    sw: &SwitchedSystem,
    y0: &Matrix,
    z0: Mode,
    n_trials: usize,
    rng_seed: u64,
    opts: &EscapeOptions,
) -> Result<EstimatorReport> {
    if n_trials == 0 {
        return Err(Error::Domain {
            op: "estimate_mean_escape",
            name: "n_trials",
            value: 0.0,
        });
    }
    let samples: Vec<EscapeSample> = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| simulate_indexed(sw, y0, z0, rng_seed, i, opts))
        .collect::<Result<_>>()?;
    let times: Vec<f64> = samples
        .iter()
        .filter(|s| !s.capped)
        .map(|s| s.escape_time)
        .collect();
    let n_escaped = times.len();
    let capped_fraction = (n_trials - n_escaped) as f64 / n_trials as f64;
    if n_escaped == 0 {
        return Ok(EstimatorReport {
            mean: f64::NAN,
            stderr: f64::NAN,
            n: n_trials,
            n_escaped,
            capped_fraction,
        });
    }
    let mean = pairwise_sum(&times) / n_escaped as f64;
    let stderr = if n_escaped > 1 {
        let sq: Vec<f64> = times.iter().map(|t| (t - mean) * (t - mean)).collect();
        (pairwise_sum(&sq) / (n_escaped - 1) as f64).sqrt() / (n_escaped as f64).sqrt()
    } else {
        0.0
    };
    Ok(EstimatorReport {
        mean,
        stderr,
        n: n_trials,
        n_escaped,
        capped_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn fixed_seed_is_deterministic() {
        let sw = SwitchedSystem::rotations(1.0, 1.0, 1.0).unwrap();
        let y0 = Matrix::scalar(0.0).unwrap();
        let opts = EscapeOptions::default();
        let a = simulate_escape(&sw, &y0, Mode::A, 9, &opts).unwrap();
        let b = simulate_escape(&sw, &y0, Mode::A, 9, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.modes.len(), a.jump_times.len() + 1);
        assert!(a.modes.windows(2).all(|w| w[0] != w[1]));
        assert!(a.jump_times.windows(2).all(|w| w[0] < w[1]));
        assert!(a.escape_time > a.jump_times.last().copied().unwrap_or(0.0));
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let sw = SwitchedSystem::rotations(1.0, 1.0, 1.0).unwrap();
        let y0 = Matrix::scalar(0.0).unwrap();
        let r = estimate_mean_escape(&sw, &y0, Mode::A, 1, 3, &EscapeOptions::default()).unwrap();
        let s = simulate_escape(&sw, &y0, Mode::A, 3, &EscapeOptions::default()).unwrap();
        assert_eq!(r.mean, s.escape_time);
        assert_eq!(r.stderr, 0.0);
        assert!(estimate_mean_escape(&sw, &y0, Mode::A, 0, 3, &EscapeOptions::default()).is_err());
    }

    #[test]
    fn identical_subsystems_hide_the_switching() {
        let sys = crate::flow::RiccatiSystem::rotation(1.0).unwrap();
        let sw = SwitchedSystem::new(sys.clone(), sys, 5.0).unwrap();
        let y0 = Matrix::scalar(0.0).unwrap();
        let r = estimate_mean_escape(&sw, &y0, Mode::A, 200, 1, &EscapeOptions::default()).unwrap();
        assert!((r.mean - FRAC_PI_2).abs() < 1e-7);
        assert!(r.stderr < 1e-7);
    }
}
