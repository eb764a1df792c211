//! Canonical function of the flat convex domain by the envelope solver, its
//! invariants, boundary moduli and local Hölder estimates at `(0, −1)`.

use plurilab::monge_ampere::{canonical_data, holder_fit, reinhardt_envelope_solve, EnvelopeConfig};
use plurilab::numerics::c;
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let dom = DomainSpec::flat_convex(2)?;
    let solution = reinhardt_envelope_solve(&dom, canonical_data(), &EnvelopeConfig::default())?;
    println!("invariants: {:?}", solution.check_invariants());
    for z in [[c(0.0, 0.0), c(0.0, 0.0)], [c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.9, 0.0)]] {
        println!("u({:.2}, {:.2}) = {:.6}", z[0], z[1], solution.eval(&z));
    }
    let scales: Vec<f64> = (3..=12).map(|k| 2f64.powi(-k)).collect();
    let fit = holder_fit(&|z| solution.eval(z), &dom, &[c(0.0, 0.0), c(-1.0, 0.0)], &scales, &[0.5], 2)?;
    println!("{:>12} {:>12} {:>8}", "scale", "oscillation", "α̂");
    for ((r, osc), a) in fit.scales.iter().zip(&fit.oscillation).zip(&fit.alpha_hat) {
        println!("{r:>12.3e} {osc:>12.4e} {a:>8.3}");
    }
    Ok(())
}
