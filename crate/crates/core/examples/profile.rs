//! Escape-time profile over the initial state.
//!
//! Each seed's step sequence labels a whole backward trajectory, so a handful
//! of escape-time computations covers the state axis. Non-escaping states sit
//! on the `π/2` plateau of the `atan`-rescaled time.

use riccati_escape::profile::rescale_time;
use riccati_escape::{escape_profile, Matrix, ProfileOptions, RiccatiSystem, Sampler};

fn main() -> riccati_escape::Result<()> {
    let sys = RiccatiSystem::new(Matrix::from_rows(&[[-1.0, -1.0], [0.0, 1.0]])?, 1)?;
    let opts = ProfileOptions {
        n_seeds: 20,
        ..ProfileOptions::default()
    };
    let mut points = escape_profile(&sys, &Sampler::UniformBox { half_width: 5.0 }, &opts)?;
    points.sort_by(|a, b| a.state[(0, 0)].total_cmp(&b.state[(0, 0)]));

    // Coarse histogram: one line per unit interval of the state.
    for lo in -5..5 {
        let bucket: Vec<_> = points
            .iter()
            .filter(|p| (lo as f64..(lo + 1) as f64).contains(&p.state[(0, 0)]))
            .collect();
        if let (Some(first), Some(last)) = (bucket.first(), bucket.last()) {
            println!(
                "y in [{lo:>2}, {:>2}): {:>4} points, atan(T) from {:.4} to {:.4}",
                lo + 1,
                bucket.len(),
                rescale_time(first.escape_time),
                rescale_time(last.escape_time),
            );
        }
    }
    Ok(())
}
