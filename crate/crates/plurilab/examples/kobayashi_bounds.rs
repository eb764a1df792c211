//! Upper and lower bounds for the Kobayashi metric of the unit ball in C^2,
//! compared with its closed form.

use std::sync::Arc;

use num_complex::Complex64;
use plurilab::cli::ball_kobayashi_metric;
use plurilab::kobayashi::{graham_bounds, sibony_lower, upper_disc, PshCertificate, ALPHA_UNIVERSAL_DEFAULT};
use plurilab::numerics::{c, norm};
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let ball = DomainSpec::ball(2, 1.0)?;
    let cert = PshCertificate::new(Arc::new(|z: &[Complex64]| norm(z).powi(2) - 1.0), 1.0)?;
    for t in [0.0, 0.5, 0.9, 0.99] {
        let z = [c(t, 0.0), c(0.0, 0.0)];
        for (label, v) in [("radial", [c(1.0, 0.0), c(0.0, 0.0)]), ("tangent", [c(0.0, 0.0), c(1.0, 0.0)])] {
            let disc = upper_disc(&ball, &z, &v)?;
            let graham = graham_bounds(&ball, &z, &v)?;
            let sibony = sibony_lower(&ball, &z, &v, &cert, ALPHA_UNIVERSAL_DEFAULT)?;
            println!(
                "|z|={t:<5} {label:<8} sibony ≥ {:.4}  graham ∈ [{:.4}, {:.4}]  disc ≤ {:.4}  exact {:.4}",
                sibony.lower,
                graham.lower,
                graham.upper,
                disc.upper,
                ball_kobayashi_metric(1.0, &z, &v)
            );
        }
    }
    Ok(())
}
