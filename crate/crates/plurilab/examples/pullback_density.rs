//! Pullback of the Levi form of the cone target by the square-root lift:
//! coefficients, Monge–Ampère density and the Jacobian L^p check.

use plurilab::mappings::{jacobian_lp_check, HoloMap};
use plurilab::monge_ampere::{ma_density, pullback_field, HermitianField};
use plurilab::numerics;
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let source = DomainSpec::cone_source();
    let map = HoloMap::sqrt_lift();
    let field = HermitianField::cone_target_levi();
    for z in source.sample_interior(&mut numerics::seeded_rng(3), 5) {
        let a = pullback_field(&map, &field, &z)?;
        let v = z[1].im;
        println!(
            "z = ({:.3}, {:.3})  a = diag({:.6}, {:.6})  expected diag(1, {:.6})  density {:.6}",
            z[0],
            z[1],
            a[(0, 0)].re,
            a[(1, 1)].re,
            0.5 + 3.0 * v * v,
            ma_density(&a)
        );
    }
    let lp = jacobian_lp_check(&map, &source, 3.0, 4000, 13)?;
    println!("L^3 check over {} Jacobian products: pass = {}", lp.products.len(), lp.pass);
    for q in lp.products.iter().filter(|q| q.estimate.fine > 0.0) {
        println!("  ∂F{}/∂z{} · conj ∂F{}/∂z{}: {:.5} (ratio {:.4})", q.mu + 1, q.j + 1, q.nu + 1, q.k + 1, q.estimate.fine, q.estimate.ratio);
    }
    Ok(())
}
