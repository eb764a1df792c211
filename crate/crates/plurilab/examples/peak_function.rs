//! Plurisubharmonic peak function at the leftmost point of the lens, built
//! from the complex shadow and a numerical Riemann map.

use plurilab::domains::first_exit;
use plurilab::numerics::{self, c};
use plurilab::peaks::{peak_function, PeakConfig};
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let lens = DomainSpec::lens(2)?;
    let witness = lens.interior_witness().to_vec();
    let left = [c(-1.0, 0.0), c(0.0, 0.0)];
    let p = numerics::along(&witness, c(first_exit(&lens, &witness, &left, 1e-15)?, 0.0), &left);
    let pf = peak_function(&lens, &p, &PeakConfig::default())?;
    println!("p = ({:.4}, {:.4}), normal = ({:.4}, {:.4})", p[0], p[1], pf.frame.normal[0], pf.frame.normal[1]);
    println!("shadow: {} vertices, map quality {:?}", pf.map.shadow.vertices.len(), pf.map.quality);
    println!("u(p) = {:.2e}, η = {:.5}, η (doubled samples) = {:.5}", pf.value_at_peak, pf.eta, pf.eta_doubled);
    for z in lens.sample_boundary(&mut numerics::seeded_rng(9), 6)? {
        println!("u({:.3}, {:.3}) = {:.5}", z[0], z[1], pf.u(&z));
    }
    Ok(())
}
