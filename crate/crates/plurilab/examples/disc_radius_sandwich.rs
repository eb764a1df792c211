//! Flat disc radius in the direction `e_1` at `z_ε = (0, ε)` of the flat
//! convex domain, compared with the sandwich `[√φ⁻¹(δ), 2√φ⁻¹(δ)]`.

use plurilab::domains::{boundary_distance, disc_radius_with, flat_profile_inverse, DiscConfig};
use plurilab::numerics::c;
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let dom = DomainSpec::flat_convex(2)?;
    let cfg = DiscConfig { tol: 1e-8, ..Default::default() };
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "ε", "δ", "r", "lower", "upper");
    for eps in [-0.9, -0.8, -0.75, -0.7, -0.6, -0.55] {
        let z = [c(0.0, 0.0), c(eps, 0.0)];
        let delta = boundary_distance(&dom, &z)?;
        let r = disc_radius_with(&dom, &z, &[c(1.0, 0.0), c(0.0, 0.0)], &cfg)?.disc_radius;
        let lower = flat_profile_inverse(delta).sqrt();
        println!("{eps:>6} {delta:>10.6} {r:>10.6} {lower:>10.6} {:>10.6}", 2.0 * lower);
    }
    Ok(())
}
