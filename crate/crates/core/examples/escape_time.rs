//! Escape time of `dy/dt = y² + 2y` from `y(0) = 1`.
//!
//! The exact answer is `ln(3)/2`. The step sequence `t_{n+1} = t_n + Δ(t_n)`
//! creeps up on it from below; every `t_n` is a certified lower bound.

use riccati_escape::{escape_time, EscapeOptions, EscapeOutcome, Matrix, RiccatiSystem};

fn main() -> riccati_escape::Result<()> {
    let sys = RiccatiSystem::new(Matrix::from_rows(&[[-1.0, -1.0], [0.0, 1.0]])?, 1)?;
    let res = escape_time(&sys, &Matrix::scalar(1.0)?, &EscapeOptions::default())?;

    for (n, t) in res.steps.iter().enumerate().take(12) {
        println!("t_{n:<2} = {t:.8}");
    }
    match res.outcome {
        EscapeOutcome::Finite { time } => {
            println!("escape at {time:.10} (exact {:.10})", 3f64.ln() / 2.0);
        }
        EscapeOutcome::NotBefore { horizon } => println!("no escape before {horizon}"),
    }

    // From y(0) = -1 the solution settles at -2 and never escapes.
    let stuck = escape_time(&sys, &Matrix::scalar(-1.0)?, &EscapeOptions::default())?;
    println!(
        "from -1: {:?} after {} steps",
        stuck.outcome,
        stuck.steps.len() - 1
    );
    Ok(())
}
