//! Upper and lower bounds for the Kobayashi metric `k_Ω(z; v)` and the
//! Hölder-failure divergence diagnostic.
//!
//! Upper bounds come from embedding the largest flat disc through `z`. Lower
//! bounds come from Graham's estimate on convex domains, Sibony's estimate
//! from a negative plurisubharmonic function with Hessian bounded below, and
//! an estimate from the modulus of continuity of the canonical function.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::domains::{boundary_distance, disc_radius_with, DiscConfig, DomainSpec};
use crate::error::{Error, Result};
use crate::monge_ampere::{complex_hessian, min_eigenvalue, HESSIAN_STEP};
use crate::numerics::{self, c, fit_line, norm, CVec};

/// Default for the universal constant in Sibony's estimate, calibrated by
/// [`calibrate_alpha_universal`].
pub const ALPHA_UNIVERSAL_DEFAULT: f64 = 1.0;
/// Default for the non-constructive constant of the modulus estimate.
pub const C_MODULUS_DEFAULT: f64 = 1.0;
/// Least-squares slope above which a ratio sequence counts as diverging.
pub const DIVERGENCE_SLOPE: f64 = 0.05;
/// Minimum number of sequence terms for a divergence verdict.
pub const DIVERGENCE_MIN_TERMS: usize = 12;

/// Which estimate produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DiscEmbedding,
    Graham,
    Sibony,
    MaModulus,
}

/// Constants that entered a bound; `None` when not used.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BoundConstants {
    pub c_hessian: Option<f64>,
    pub alpha_universal: Option<f64>,
    pub epsilon: Option<f64>,
    pub c_modulus: Option<f64>,
}

/// A `(lower, upper)` pair for `k_Ω(z; v)`; `lower = 0` means no lower bound
/// and `upper = ∞` no upper bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KobayashiBound {
    pub lower: f64,
    pub upper: f64,
    pub provenance: Provenance,
    pub constants: BoundConstants,
}

impl KobayashiBound {
    pub fn is_consistent(&self) -> bool {
        self.lower <= self.upper
    }
}

fn unit_direction(v: &[Complex64]) -> Result<(f64, CVec)> {
    let len = norm(v);
    if len == 0.0 {
        return Err(Error::ZeroDirection);
    }
    Ok((len, numerics::scale(v, c(1.0 / len, 0.0))))
}

fn flat_radius(dom: &DomainSpec, z: &[Complex64], u: &[Complex64]) -> Result<f64> {
    let cfg = DiscConfig { with_delta: false, ..DiscConfig::default() };
    Ok(disc_radius_with(dom, z, u, &cfg)?.disc_radius)
}

/// `k ≤ ∥v∥ / r_Ω(z; v/∥v∥)` by contractivity under the affine disc embedding.
pub fn upper_disc(dom: &DomainSpec, z: &[Complex64], v: &[Complex64]) -> Result<KobayashiBound> {
    let (len, u) = unit_direction(v)?;
    let r = flat_radius(dom, z, &u)?;
    Ok(KobayashiBound { lower: 0.0, upper: len / r, provenance: Provenance::DiscEmbedding, constants: BoundConstants::default() })
}

/// Graham's two-sided estimate on convex domains:
/// `∥v∥ / (2r) ≤ k ≤ ∥v∥ / r` with `r = r_Ω(z; v/∥v∥)`.
pub fn graham_bounds(dom: &DomainSpec, z: &[Complex64], v: &[Complex64]) -> Result<KobayashiBound> {
    if !dom.flags().convex {
        return Err(Error::NotConvex(dom.name().to_string()));
    }
    let (len, u) = unit_direction(v)?;
    let r = flat_radius(dom, z, &u)?;
    Ok(KobayashiBound { lower: len / (2.0 * r), upper: len / r, provenance: Provenance::Graham, constants: BoundConstants::default() })
}

/// Real function on a domain, used as a plurisubharmonic certificate.
pub type RealFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

/// A negative plurisubharmonic function `u` whose complex Hessian is claimed
/// to dominate `c_hessian` times the identity.
#[derive(Clone)]
pub struct PshCertificate {
    pub u: RealFn,
    pub c_hessian: f64,
}

/// Sampled verification of a [`PshCertificate`].
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub samples: usize,
    /// Largest sampled value of `u` (must be negative).
    pub max_value: f64,
    /// Smallest sampled Hessian eigenvalue.
    pub min_eigenvalue: f64,
    pub ok: bool,
}

impl PshCertificate {
    pub fn new(u: RealFn, c_hessian: f64) -> Result<Self> {
        if !(c_hessian > 0.0) {
            return Err(Error::InvalidArgument(format!("Hessian lower bound must be positive, got {c_hessian}")));
        }
        Ok(PshCertificate { u, c_hessian })
    }

    /// Tolerance granted to the finite-difference eigenvalues.
    pub fn tolerance(&self) -> f64 {
        1e-5 * self.c_hessian.max(1.0)
    }

    pub fn check(&self, points: &[CVec]) -> CertificateReport {
        let mut max_value = f64::NEG_INFINITY;
        let mut min_eig = f64::INFINITY;
        for z in points {
            max_value = max_value.max((self.u)(z));
            min_eig = min_eig.min(min_eigenvalue(&complex_hessian(&*self.u, z, HESSIAN_STEP)));
        }
        CertificateReport {
            samples: points.len(),
            max_value,
            min_eigenvalue: min_eig,
            ok: max_value < 0.0 && min_eig >= self.c_hessian - self.tolerance(),
        }
    }
}

/// Sibony's lower bound `(c/α)^{1/2} ∥v∥ / |u(z)|^{1/2}`. The certificate is
/// checked at `z` first.
pub fn sibony_lower(
    dom: &DomainSpec,
    z: &[Complex64],
    v: &[Complex64],
    cert: &PshCertificate,
    alpha_universal: f64,
) -> Result<KobayashiBound> {
    dom.require_interior(z)?;
    if !(alpha_universal > 0.0) {
        return Err(Error::InvalidArgument("alpha_universal must be positive".into()));
    }
    let report = cert.check(&[z.to_vec()]);
    if !(report.max_value < 0.0) {
        return Err(Error::Certificate(format!("u(z) = {} is not negative", report.max_value)));
    }
    if !report.ok {
        return Err(Error::Certificate(format!(
            "Hessian eigenvalue {} below claimed bound {}",
            report.min_eigenvalue, cert.c_hessian
        )));
    }
    let lower = (cert.c_hessian / alpha_universal).sqrt() * norm(v) / report.max_value.abs().sqrt();
    Ok(KobayashiBound {
        lower,
        upper: f64::INFINITY,
        provenance: Provenance::Sibony,
        constants: BoundConstants { c_hessian: Some(cert.c_hessian), alpha_universal: Some(alpha_universal), ..Default::default() },
    })
}

/// Smallest `α` for which Sibony's bound with `u = |z|² − 1` stays below the
/// exact Poincaré metric `1/(1−|z|²)` of the unit disc, over `samples` points
/// (the origin included).
pub fn calibrate_alpha_universal(samples: usize, seed: u64) -> Result<f64> {
    let disc = DomainSpec::ball(1, 1.0)?;
    let cert = PshCertificate::new(Arc::new(|z: &[Complex64]| z[0].norm_sqr() - 1.0), 1.0)?;
    let mut rng = numerics::seeded_rng(seed);
    let mut points = vec![vec![c(0.0, 0.0)]];
    while points.len() < samples.max(1) {
        points.push(numerics::random_in_ball(&mut rng, &[c(0.0, 0.0)], 0.99));
    }
    let mut alpha: f64 = 0.0;
    for z in &points {
        let lower = sibony_lower(&disc, z, &[c(1.0, 0.0)], &cert, 1.0)?.lower;
        let exact = 1.0 / (1.0 - z[0].norm_sqr());
        alpha = alpha.max((lower / exact).powi(2));
    }
    Ok(alpha)
}

/// Modulus of continuity `ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModulusOfContinuity {
    /// `C r^α`.
    Power { c: f64, alpha: f64 },
    /// `C (log 1/r)^{−γ}` for `r < 1/e`, constant `C` beyond.
    PowerLog { c: f64, gamma: f64 },
    /// Piecewise linear through `(0, 0)` and the table, constant after the
    /// last node.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
    /// Constant `C` (the zero modulus for `C = 0`).
    Constant { c: f64 },
}

impl ModulusOfContinuity {
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        if !(c >= 0.0 && alpha > 0.0) {
            return Err(Error::MalformedModulus(format!("power modulus needs c ≥ 0 and α > 0, got c={c}, α={alpha}")));
        }
        Ok(ModulusOfContinuity::Power { c, alpha })
    }

    pub fn power_log(c: f64, gamma: f64) -> Result<Self> {
        if !(c >= 0.0 && gamma > 0.0) {
            return Err(Error::MalformedModulus(format!("log modulus needs c ≥ 0 and γ > 0, got c={c}, γ={gamma}")));
        }
        Ok(ModulusOfContinuity::PowerLog { c, gamma })
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::MalformedModulus("table must be non-empty with matching lengths".into()));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::MalformedModulus("radii must be positive and strictly increasing".into()));
        }
        if values[0] < 0.0 || values.windows(2).any(|w| w[1] < w[0]) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedModulus("values must be finite, non-negative and nondecreasing".into()));
        }
        Ok(ModulusOfContinuity::Tabulated { radii, values })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::MalformedModulus(format!("constant modulus must be finite and non-negative, got {c}")));
        }
        Ok(ModulusOfContinuity::Constant { c })
    }

    /// `ω(r)` for `r ≥ 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match self {
            ModulusOfContinuity::Power { c, alpha } => c * r.powf(*alpha),
            ModulusOfContinuity::PowerLog { c, gamma } => {
                if r == 0.0 {
                    0.0
                } else if r >= (-1.0f64).exp() {
                    *c
                } else {
                    c * (-r.ln()).powf(-gamma)
                }
            }
            ModulusOfContinuity::Tabulated { radii, values } => {
                let k = radii.partition_point(|x| *x < r);
                if k == radii.len() {
                    return *values.last().expect("non-empty");
                }
                let (r0, w0) = if k == 0 { (0.0, 0.0) } else { (radii[k - 1], values[k - 1]) };
                w0 + (values[k] - w0) * (r - r0) / (radii[k] - r0)
            }
            ModulusOfContinuity::Constant { c } => *c,
        }
    }
}

/// Lower bound `c √ε ∥v∥ / ω(δ_Ω(z))^{1/2}` from the modulus of continuity
/// of the canonical function.
pub fn ma_lower(
    dom: &DomainSpec,
    z: &[Complex64],
    v: &[Complex64],
    modulus: &ModulusOfContinuity,
    epsilon: f64,
    c_modulus: f64,
) -> Result<KobayashiBound> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let delta = boundary_distance(dom, z)?;
    let w = modulus.eval(delta);
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::MalformedModulus(format!("ω(δ) = {w} at an interior point (δ = {delta})")));
    }
    Ok(KobayashiBound {
        lower: c_modulus * epsilon.sqrt() * norm(v) / w.sqrt(),
        upper: f64::INFINITY,
        provenance: Provenance::MaModulus,
        constants: BoundConstants { epsilon: Some(epsilon), c_modulus: Some(c_modulus), ..Default::default() },
    })
}

/// One term `(z_ν, u_ν)` of an approach sequence.
#[derive(Debug, Clone)]
pub struct SequenceTerm {
    pub nu: f64,
    pub point: CVec,
    pub direction: CVec,
}

/// Approach sequence `z_ν = (0, −1 + 1/(ν+2))`, `u_ν = e_1` towards the
/// flat boundary point of `omega_phi`, for `ν = 2^k`.
pub fn flat_point_sequence(n: usize, exponents: std::ops::RangeInclusive<u32>) -> Vec<SequenceTerm> {
    exponents
        .map(|k| {
            let nu = 2f64.powi(k as i32);
            let mut z = vec![c(0.0, 0.0); n];
            z[1] = c(-1.0 + 1.0 / (nu + 2.0), 0.0);
            SequenceTerm { nu, point: z, direction: numerics::basis(n, 0) }
        })
        .collect()
}

/// One row of a divergence table.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRow {
    pub nu: f64,
    pub delta: f64,
    pub radius: f64,
    /// `r / δ^α` per requested α.
    pub ratios: Vec<f64>,
    /// `r / δ^{α/2}` per requested α.
    pub half_ratios: Vec<f64>,
}

/// Growth verdict for one exponent.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceVerdict {
    pub alpha: f64,
    /// Least-squares slope of `log(r/δ^α)` against `log ν`.
    pub slope: f64,
    /// Same for `r/δ^{α/2}`.
    pub half_slope: f64,
    pub strictly_increasing: bool,
    pub diverges: bool,
}

/// Ratios `r_Ω(z_ν; u_ν) / δ_Ω(z_ν)^α` with verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceTable {
    pub alphas: Vec<f64>,
    pub rows: Vec<DivergenceRow>,
    pub verdicts: Vec<DivergenceVerdict>,
}

impl DivergenceTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["nu".to_string(), "delta".into(), "r".into()];
        header.extend(self.alphas.iter().map(|a| format!("ratio_{a}")));
        header.extend(self.alphas.iter().map(|a| format!("half_ratio_{a}")));
        out.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.nu.to_string(), row.delta.to_string(), row.radius.to_string()];
            rec.extend(row.ratios.iter().map(|x| x.to_string()));
            rec.extend(row.half_ratios.iter().map(|x| x.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn verdict(&self, alpha: f64) -> Option<&DivergenceVerdict> {
        self.verdicts.iter().find(|v| v.alpha == alpha)
    }
}

/// Tabulates `r/δ^α` and `r/δ^{α/2}` along an approach sequence.
pub fn holder_divergence(dom: &DomainSpec, seq: &[SequenceTerm], alphas: &[f64]) -> Result<DivergenceTable> {
    if alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
        return Err(Error::InvalidArgument("exponents must lie in (0, 1]".into()));
    }
    let cfg = DiscConfig { with_delta: true, ..DiscConfig::default() };
    let rows: Vec<DivergenceRow> = seq
        .iter()
        .map(|term| {
            let probe = disc_radius_with(dom, &term.point, &term.direction, &cfg)?;
            Ok(DivergenceRow {
                nu: term.nu,
                delta: probe.delta,
                radius: probe.disc_radius,
                ratios: alphas.iter().map(|a| probe.disc_radius / probe.delta.powf(*a)).collect(),
                half_ratios: alphas.iter().map(|a| probe.disc_radius / probe.delta.powf(0.5 * a)).collect(),
            })
        })
        .collect::<Result<_>>()?;
    let log_nu: Vec<f64> = rows.iter().map(|r| r.nu.ln()).collect();
    let verdicts = alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let series: Vec<f64> = rows.iter().map(|r| r.ratios[k]).collect();
            let slope_of = |ys: Vec<f64>| fit_line(&log_nu, &ys.iter().map(|y| y.ln()).collect::<Vec<_>>()).map_or(0.0, |f| f.slope);
            let slope = slope_of(series.clone());
            let half_slope = slope_of(rows.iter().map(|r| r.half_ratios[k]).collect());
            let strictly_increasing = series.len() >= 2 && series.windows(2).all(|w| w[1] > w[0]);
            DivergenceVerdict {
                alpha,
                slope,
                half_slope,
                strictly_increasing,
                diverges: rows.len() >= DIVERGENCE_MIN_TERMS && slope > DIVERGENCE_SLOPE,
            }
        })
        .collect();
    Ok(DivergenceTable { alphas: alphas.to_vec(), rows, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::flat_profile_inverse;

    fn poincare(z: f64) -> f64 {
        1.0 / (1.0 - z * z)
    }

    #[test]
    fn disc_embedding_on_the_unit_disc() {
        let disc = DomainSpec::ball(1, 1.0).unwrap();
        let b = upper_disc(&disc, &[c(0.5, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!((b.upper - 2.0).abs() < 1e-8);
        assert!(poincare(0.5) <= b.upper);
        let b0 = upper_disc(&disc, &[c(0.0, 0.0)], &[c(0.0, 3.0)]).unwrap();
        assert!((b0.upper - 3.0).abs() < 1e-8);
    }

    #[test]
    fn graham_brackets_poincare_metric() {
        let disc = DomainSpec::ball(1, 1.0).unwrap();
        for x in [0.0, 0.5, 0.9] {
            let b = graham_bounds(&disc, &[c(x, 0.0)], &[c(1.0, 0.0)]).unwrap();
            assert!(b.lower <= poincare(x) && poincare(x) <= b.upper, "{x}: {b:?}");
            assert!((b.upper / b.lower - 2.0).abs() < 1e-12);
        }
        assert!(matches!(graham_bounds(&DomainSpec::cone_source(), &[c(0.0, 0.0), c(0.0, 0.5)], &[c(1.0, 0.0), c(0.0, 0.0)]), Err(Error::NotConvex(_))));
    }

    #[test]
    fn sibony_bound_at_ball_center() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let cert = PshCertificate::new(Arc::new(|z: &[Complex64]| norm(z).powi(2) - 1.0), 1.0).unwrap();
        let v = [c(0.3, 0.4), c(0.0, 1.2)];
        let b = sibony_lower(&ball, &[c(0.0, 0.0); 2], &v, &cert, 1.0).unwrap();
        assert!((b.lower - norm(&v)).abs() < 1e-12);
        let zero = sibony_lower(&ball, &[c(0.0, 0.0); 2], &[c(0.0, 0.0); 2], &cert, 1.0).unwrap();
        assert_eq!(zero.lower, 0.0);
        let bad = PshCertificate::new(Arc::new(|z: &[Complex64]| norm(z).powi(2) - 1.0), 2.0).unwrap();
        assert!(matches!(sibony_lower(&ball, &[c(0.0, 0.0); 2], &v, &bad, 1.0), Err(Error::Certificate(_))));
    }

    #[test]
    fn calibrated_alpha_is_one() {
        let alpha = calibrate_alpha_universal(100, 3).unwrap();
        assert!((alpha - ALPHA_UNIVERSAL_DEFAULT).abs() < 1e-6, "{alpha}");
    }

    #[test]
    fn modulus_lower_bound_trivial_and_tabulated() {
        let ball = DomainSpec::ball(1, 1.0).unwrap();
        let identity = ModulusOfContinuity::power(1.0, 1.0).unwrap();
        let b = ma_lower(&ball, &[c(0.0, 0.0)], &[c(1.0, 0.0)], &identity, 1.0, 1.0).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-8);
        let radii: Vec<f64> = (1..=200).map(|k| k as f64 / 200.0).collect();
        let values: Vec<f64> = radii.iter().map(|r| r * (2.0 - r)).collect();
        let table = ModulusOfContinuity::tabulated(radii, values).unwrap();
        for k in 0..20 {
            let x = -0.95 + 1.9 * k as f64 / 19.0;
            let b = ma_lower(&ball, &[c(x, 0.0)], &[c(1.0, 0.0)], &table, 1.0, 1.0).unwrap();
            assert!(b.lower <= poincare(x) + 1e-9, "{x}");
        }
        let zero = ModulusOfContinuity::constant(0.0).unwrap();
        assert!(matches!(ma_lower(&ball, &[c(0.0, 0.0)], &[c(1.0, 0.0)], &zero, 1.0, 1.0), Err(Error::MalformedModulus(_))));
    }

    #[test]
    fn modulus_validation_and_families() {
        assert!(ModulusOfContinuity::tabulated(vec![0.1, 0.2], vec![0.3, 0.1]).is_err());
        let m = ModulusOfContinuity::power_log(1.0, 2.0).unwrap();
        assert_eq!(m.eval(0.0), 0.0);
        assert!((m.eval(1e-4) - 1.0 / (1e-4f64).ln().powi(2)).abs() < 1e-15);
        assert_eq!(m.eval(0.9), 1.0);
    }

    #[test]
    fn flat_direction_ratios_beat_the_explicit_bound() {
        let dom = DomainSpec::flat_convex(2).unwrap();
        let seq = flat_point_sequence(2, 2..=7);
        let table = holder_divergence(&dom, &seq, &[0.5, 1.0]).unwrap();
        for row in &table.rows {
            let explicit = flat_profile_inverse(row.delta).sqrt();
            assert!(row.radius >= explicit - 1e-8 && row.radius <= 2.0 * explicit + 1e-8);
            assert!(row.ratios[1] >= row.delta.powi(-1) / (2.0 - (3.0 * row.delta).ln()).sqrt() - 1e-6);
        }
        assert!(table.verdicts.iter().all(|v| v.strictly_increasing));
    }

    #[test]
    fn radial_ball_sequence_does_not_diverge() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let seq: Vec<SequenceTerm> = (2..=13)
            .map(|k| {
                let nu = 2f64.powi(k);
                SequenceTerm { nu, point: vec![c(1.0 - 1.0 / (nu + 2.0), 0.0), c(0.0, 0.0)], direction: numerics::basis(2, 0) }
            })
            .collect();
        let table = holder_divergence(&ball, &seq, &[1.0]).unwrap();
        for row in &table.rows {
            assert!((row.radius - row.delta).abs() < 1e-7);
        }
        assert!(!table.verdicts[0].diverges);
        let constant: Vec<SequenceTerm> = (0..12)
            .map(|k| SequenceTerm { nu: (k + 1) as f64, point: vec![c(0.2, 0.0), c(0.0, 0.1)], direction: numerics::basis(2, 1) })
            .collect();
        let table = holder_divergence(&ball, &constant, &[0.5]).unwrap();
        assert!(table.rows.windows(2).all(|w| (w[0].ratios[0] - w[1].ratios[0]).abs() < 1e-9));
        assert!(!table.verdicts[0].diverges);
    }
}
