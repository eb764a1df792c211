//! Ball geodesic through two points: isometry defect, boundary-distance
//! sandwich, Dini checks, and Hardy–Littlewood radial extension of a
//! continuous but non-Lipschitz disc function.

use std::f64::consts::TAU;

use num_complex::Complex64;
use plurilab::geodesics::{ball_geodesic, dini_check, hl_extend, isometry_defect, log_test_function, mercer_fit, Majorant};
use plurilab::kobayashi::ModulusOfContinuity;
use plurilab::numerics::c;
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let ball = DomainSpec::ball(2, 1.0)?;
    let disc = ball_geodesic(&[c(0.1, 0.2), c(-0.1, 0.0)], &[c(0.5, 0.0), c(0.0, 0.3)])?;
    let pairs = [(c(0.0, 0.0), c(0.5, 0.1)), (c(-0.4, 0.2), c(0.7, -0.5))];
    println!("isometry defect ≤ {:.2e}", isometry_defect(&disc, &ball, &pairs)?.upper);
    let radii: Vec<f64> = (2..=12).map(|k| 1.0 - 2f64.powi(-k)).collect();
    let fit = mercer_fit(&disc, &ball, &radii, 16)?;
    println!("C₁ = {:.4}, C₂ = {:.4}, β = {:.4}", fit.c1, fit.c2, fit.beta);
    for (label, modulus) in [
        ("r^0.25", ModulusOfContinuity::power(1.0, 0.25)?),
        ("r", ModulusOfContinuity::power(1.0, 1.0)?),
        ("log(1/r)^-2", ModulusOfContinuity::power_log(1.0, 2.0)?),
    ] {
        let report = dini_check(&modulus, fit.c2, 1.0 / fit.beta, 1.0)?;
        println!("Dini {label:<12} passes: {:<5} integral {:?}", report.passes, report.integral);
    }
    let g = log_test_function();
    let angles: Vec<f64> = (0..8).map(|k| TAU * k as f64 / 8.0).collect();
    let table = hl_extend(&g, &Majorant::Log { c: 2.5 }, &angles, 0.5, 1e-10)?;
    for (theta, value) in angles.iter().zip(&table.values) {
        let zeta = Complex64::from_polar(1.0, *theta);
        let exact = if theta == &0.0 { zeta } else { (1.0 - zeta) * (1.0 - zeta).ln() + zeta };
        println!("θ = {theta:.3}: {value:.10} (closed form {exact:.10})");
    }
    Ok(())
}
