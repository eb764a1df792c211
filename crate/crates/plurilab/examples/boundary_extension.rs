//! Exponent chain of the square-root lift and its radial boundary extension
//! near the conical point, compared with the closed-form boundary values.

use plurilab::mappings::{
    boundary_extend, boundary_layer_samples, default_target_exponent, exponent_chain, hopf_fit, kappa_for, BoundaryPatch,
    HoloMap,
};
use plurilab::numerics::{self, c};
use plurilab::DomainSpec;

fn main() -> plurilab::Result<()> {
    let map = HoloMap::sqrt_lift();
    let (source, target) = (DomainSpec::cone_source(), DomainSpec::cone_target());
    let rho = |w: &[num_complex::Complex64]| target.defining(w);
    let hopf = hopf_fit(
        &rho,
        &target,
        &boundary_layer_samples(&target, 100, 1e-4, 2e-2, 1)?,
        &boundary_layer_samples(&target, 100, 1e-4, 2e-2, 2)?,
        0.5,
    )?;
    let chain = exponent_chain(
        &map,
        &source,
        &target,
        &rho,
        default_target_exponent(3),
        &hopf,
        &boundary_layer_samples(&source, 100, 1e-4, 2e-2, 3)?,
        &boundary_layer_samples(&source, 100, 1e-4, 2e-2, 4)?,
        1.0,
        2.0,
    )?;
    println!("{:#?}", chain.constants);
    println!("held-out pass rate {:.3}", chain.validation.pass_rate);
    println!("κ(ε = 0.1) = {:.3e}", kappa_for(0.1, chain.constants.m_star, chain.constants.s_tilde)?);
    let patch = BoundaryPatch::cone_source(5, 0.05, 5)?;
    for xi in &patch.points {
        let ext = boundary_extend(&map, xi, &patch.inward, 0.1, chain.constants.s_tilde)?;
        let exact = [(xi[0] + 1.0).sqrt(), xi[1], c(0.0, 0.0)];
        let err = numerics::norm(&numerics::sub(&ext.value, &exact));
        println!("ξ = ({:.4}, {:.4})  F•₁(ξ) = {:.8}  error {err:.2e}", xi[0], xi[1], ext.value[0]);
    }
    Ok(())
}
