//! Analytic discs and complex geodesics: closed-form geodesics of the ball,
//! isometry defects, boundary-distance fits along discs, Dini-type
//! integrability of moduli of continuity and radial boundary extension of
//! holomorphic functions on the disc.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::domains::{boundary_distance, first_exit, nearest_boundary, DistanceConfig, DomainParams, DomainSpec, Ellipsoid};
use crate::error::{Error, Result};
use crate::kobayashi::{graham_bounds, ModulusOfContinuity};
use crate::numerics::{self, c, fit_line, inner, integrate, integrate_real, norm, CVec};

/// Depth from the boundary circle used for in-domain checks of discs.
pub const DISC_EDGE: f64 = 1e-6;
/// Upper end of all Dini integrals.
pub const DINI_EPSILON: f64 = 0.1;

/// Vector-valued map of the unit disc.
pub type DiscMap = Arc<dyn Fn(Complex64) -> CVec + Send + Sync>;
/// Scalar function on the unit disc.
pub type DiscFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Holomorphic map `ψ` of the unit disc into `C^n` with its derivative.
#[derive(Clone)]
pub struct AnalyticDisc {
    name: String,
    dim: usize,
    map: DiscMap,
    derivative: DiscMap,
    coefficients: Option<Vec<CVec>>,
}

impl std::fmt::Debug for AnalyticDisc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AnalyticDisc({} in C^{})", self.name, self.dim)
    }
}

impl AnalyticDisc {
    pub fn new(name: impl Into<String>, dim: usize, map: DiscMap, derivative: DiscMap) -> Self {
        AnalyticDisc { name: name.into(), dim, map, derivative, coefficients: None }
    }

    /// `ζ ↦ Σ_k a_k ζ^k`. Fails if the root test on the coefficient tail
    /// gives a radius of convergence below 1.
    pub fn power_series(name: impl Into<String>, coefficients: Vec<CVec>) -> Result<Self> {
        let dim = coefficients.first().map(|a| a.len()).ok_or_else(|| Error::InvalidArgument("no coefficients".into()))?;
        if coefficients.iter().any(|a| a.len() != dim) {
            return Err(Error::InvalidArgument("coefficients of different lengths".into()));
        }
        let radius = convergence_radius(&coefficients);
        if radius < 1.0 {
            return Err(Error::InvalidArgument(format!("radius of convergence {radius:.4} is below 1")));
        }
        let a = Arc::new(coefficients.clone());
        let a2 = a.clone();
        let map: DiscMap = Arc::new(move |z| {
            let mut out = vec![c(0.0, 0.0); dim];
            for coeff in a.iter().rev() {
                for (o, ck) in out.iter_mut().zip(coeff) {
                    *o = *o * z + ck;
                }
            }
            out
        });
        let derivative: DiscMap = Arc::new(move |z| {
            let mut out = vec![c(0.0, 0.0); dim];
            for (k, coeff) in a2.iter().enumerate().skip(1).rev() {
                for (o, ck) in out.iter_mut().zip(coeff) {
                    *o = *o * z + ck * k as f64;
                }
            }
            out
        });
        Ok(AnalyticDisc { name: name.into(), dim, map, derivative, coefficients: Some(coefficients) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> Option<&[CVec]> {
        self.coefficients.as_deref()
    }

    pub fn eval(&self, zeta: Complex64) -> CVec {
        (self.map)(zeta)
    }

    pub fn derivative(&self, zeta: Complex64) -> CVec {
        (self.derivative)(zeta)
    }

    /// Component `j` as a scalar function with its derivative.
    pub fn component(&self, j: usize) -> DiscFunction {
        let (map, derivative) = (self.map.clone(), self.derivative.clone());
        DiscFunction { value: Arc::new(move |z| map(z)[j]), derivative: Arc::new(move |z| derivative(z)[j]) }
    }

    /// Checks `ψ(ζ) ∈ Ω` on a polar grid of `|ζ| ≤ 1 − DISC_EDGE`.
    pub fn check_inside(&self, dom: &DomainSpec, radial: usize, angular: usize) -> Result<()> {
        if dom.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: dom.dim(), found: self.dim });
        }
        for i in 0..=radial {
            let r = (1.0 - DISC_EDGE) * i as f64 / radial.max(1) as f64;
            for k in 0..angular {
                let zeta = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / angular as f64);
                let w = self.eval(zeta);
                if !dom.contains(&w) {
                    return Err(Error::NotInterior { rho: dom.defining(&w) });
                }
            }
        }
        Ok(())
    }
}

/// Root-test estimate `1 / max |a_k|^{1/k}` over the non-zero coefficients
/// with `k ≥ max(len/2, 8)`; infinite for short or vanishing tails.
pub fn convergence_radius(coefficients: &[CVec]) -> f64 {
    let tail = (coefficients.len() / 2).max(8);
    let growth = coefficients
        .iter()
        .enumerate()
        .skip(tail)
        .filter_map(|(k, a)| {
            let m = norm(a);
            (m > 0.0).then(|| m.powf(1.0 / k as f64))
        })
        .fold(0.0, f64::max);
    if growth == 0.0 {
        f64::INFINITY
    } else {
        1.0 / growth
    }
}

/// Involutive automorphism of the unit ball exchanging `a` and 0.
pub fn ball_automorphism(a: &[Complex64], z: &[Complex64]) -> CVec {
    let aa = inner(a, a).re;
    if aa == 0.0 {
        return numerics::scale(z, c(-1.0, 0.0));
    }
    let za = inner(z, a);
    let s = (1.0 - aa).sqrt();
    let proj = numerics::scale(a, za / aa);
    let perp = numerics::sub(z, &proj);
    let num: CVec = a.iter().zip(&proj).zip(&perp).map(|((ai, pi), qi)| ai - pi - qi * s).collect();
    numerics::scale(&num, 1.0 / (1.0 - za))
}

/// Kobayashi distance of the unit disc.
pub fn disc_distance(a: Complex64, b: Complex64) -> f64 {
    ((a - b) / (1.0 - a.conj() * b)).norm().atanh()
}

/// Kobayashi distance of the ball of radius `radius` centred at 0.
pub fn ball_distance(radius: f64, z: &[Complex64], w: &[Complex64]) -> f64 {
    let (z, w) = (numerics::scale(z, c(1.0 / radius, 0.0)), numerics::scale(w, c(1.0 / radius, 0.0)));
    norm(&ball_automorphism(&z, &w)).min(1.0).atanh()
}

/// Complex geodesic of the unit ball through `p` and `q`: the linear disc
/// through 0 and `φ_p(q)` carried back by `φ_p`. Satisfies `ψ(0) = p` and
/// `ψ(∥φ_p(q)∥) = q`.
pub fn ball_geodesic(p: &[Complex64], q: &[Complex64]) -> Result<AnalyticDisc> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    for z in [p, q] {
        let r = norm(z);
        if r >= 1.0 {
            return Err(Error::NotInterior { rho: r * r - 1.0 });
        }
    }
    let q_image = ball_automorphism(p, q);
    let e = numerics::normalized(&q_image).ok_or_else(|| Error::InvalidArgument("the two points coincide".into()))?;
    if norm(&q_image) < 1e-14 {
        return Err(Error::InvalidArgument("the two points coincide".into()));
    }
    let a = p.to_vec();
    let aa = inner(&a, &a).re;
    let beta = inner(&e, &a);
    let w: CVec = if aa == 0.0 {
        numerics::scale(&e, c(-1.0, 0.0))
    } else {
        let s = (1.0 - aa).sqrt();
        let proj = numerics::scale(&a, beta / aa);
        proj.iter().zip(&e).map(|(pi, ei)| pi + (ei - pi) * s).collect()
    };
    let (a1, e1) = (a.clone(), e.clone());
    let map: DiscMap = Arc::new(move |zeta| ball_automorphism(&a1, &numerics::scale(&e1, zeta)));
    let derivative: DiscMap = if aa == 0.0 {
        Arc::new(move |_| w.clone())
    } else {
        let numerator: CVec = a.iter().zip(&w).map(|(ai, wi)| beta * ai - wi).collect();
        Arc::new(move |zeta| numerics::scale(&numerator, 1.0 / (1.0 - zeta * beta).powi(2)))
    };
    Ok(AnalyticDisc::new("ball_geodesic", p.len(), map, derivative))
}

/// Interval for a Kobayashi distance; `lower == upper` when exact.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistanceBracket {
    pub lower: f64,
    pub upper: f64,
}

/// Kobayashi distance on the ball (exact) or bracketed on convex domains:
/// the upper bound integrates the Graham upper metric bound along the
/// segment, the lower bound is the largest half-plane distance over
/// supporting half-spaces at nearby boundary points.
pub fn kobayashi_distance(dom: &DomainSpec, z: &[Complex64], w: &[Complex64]) -> Result<DistanceBracket> {
    dom.require_interior(z)?;
    dom.require_interior(w)?;
    if let Some(DomainParams::Ball { radius, .. }) = dom.params() {
        let d = ball_distance(*radius, z, w);
        return Ok(DistanceBracket { lower: d, upper: d });
    }
    if !dom.flags().convex {
        return Err(Error::NotConvex(format!("{}: no distance bracket without convexity", dom.name())));
    }
    let diff = numerics::sub(w, z);
    let len = norm(&diff);
    if len == 0.0 {
        return Ok(DistanceBracket { lower: 0.0, upper: 0.0 });
    }
    let (upper, _) = integrate_real(
        |t| graham_bounds(dom, &numerics::along(z, c(t, 0.0), &diff), &diff).map_or(f64::NAN, |b| b.upper),
        0.0,
        1.0,
        1e-6 * len,
        400,
    )?;
    let cfg = DistanceConfig::default();
    let unit = numerics::scale(&diff, c(1.0 / len, 0.0));
    let mut contacts = Vec::new();
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        contacts.push(nearest_boundary(dom, &numerics::along(z, c(t, 0.0), &diff), &cfg)?.point);
    }
    for (base, dir) in [(z, numerics::scale(&unit, c(-1.0, 0.0))), (w, unit.clone())] {
        let t = first_exit(dom, base, &dir, 1e-12)?;
        contacts.push(numerics::along(base, c(t, 0.0), &dir));
    }
    let lower = contacts
        .iter()
        .filter_map(|p| {
            let normal = numerics::normalized(&dom.gradient(p))?;
            let (lz, lw) = (inner(&numerics::sub(z, p), &normal), inner(&numerics::sub(w, p), &normal));
            (lz.re < 0.0 && lw.re < 0.0).then(|| ((lz - lw) / (lz + lw.conj())).norm().atanh())
        })
        .fold(0.0, f64::max);
    Ok(DistanceBracket { lower: lower.min(upper), upper })
}

/// Defect of `ψ` as a Kobayashi isometry; an interval when distances are
/// only bracketed.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryDefect {
    pub exact: bool,
    pub lower: f64,
    pub upper: f64,
    /// `(a, b, d_disc(a,b), bracket for d_Ω(ψ(a), ψ(b)))`.
    pub pairs: Vec<(Complex64, Complex64, f64, DistanceBracket)>,
}

/// `sup |d_Ω(ψ(a), ψ(b)) − d_disc(a, b)|` over the given pairs.
pub fn isometry_defect(disc: &AnalyticDisc, dom: &DomainSpec, pairs: &[(Complex64, Complex64)]) -> Result<IsometryDefect> {
    let mut out = IsometryDefect { exact: true, lower: 0.0, upper: 0.0, pairs: Vec::with_capacity(pairs.len()) };
    for &(a, b) in pairs {
        if a.norm() >= 1.0 || b.norm() >= 1.0 {
            return Err(Error::InvalidArgument("pair outside the open unit disc".into()));
        }
        let reference = disc_distance(a, b);
        let bracket = kobayashi_distance(dom, &disc.eval(a), &disc.eval(b))?;
        out.exact &= bracket.lower == bracket.upper;
        let low = if reference < bracket.lower {
            bracket.lower - reference
        } else if reference > bracket.upper {
            reference - bracket.upper
        } else {
            0.0
        };
        let high = (reference - bracket.lower).abs().max((reference - bracket.upper).abs());
        out.lower = out.lower.max(low);
        out.upper = out.upper.max(high);
        out.pairs.push((a, b, reference, bracket));
    }
    Ok(out)
}

fn distance_to_boundary(dom: &DomainSpec, z: &[Complex64]) -> Result<f64> {
    if let Some(DomainParams::Ball { radius, .. }) = dom.params() {
        let d = radius - norm(z);
        if d <= 0.0 {
            return Err(Error::NotInterior { rho: norm(z).powi(2) - radius * radius });
        }
        return Ok(d);
    }
    boundary_distance(dom, z)
}

/// Boundary-distance sandwich `C₁(1−|ζ|) ≤ δ_Ω(ψ(ζ)) ≤ C₂(1−|ζ|)^{1/β}`.
#[derive(Debug, Clone, Serialize)]
pub struct MercerFit {
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
    /// `1 / slope` of the log-log regression before clamping to `β ≥ 1`.
    pub beta_raw: f64,
    pub rms_residual: f64,
    pub validation_samples: usize,
    pub validation_violations: usize,
}

/// Fits the sandwich on `radii` (increasing to 1) at `angles` equally spaced
/// angles and validates it at the geometric midpoints of consecutive radii.
pub fn mercer_fit(disc: &AnalyticDisc, dom: &DomainSpec, radii: &[f64], angles: usize) -> Result<MercerFit> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 || *radii.last().expect("non-empty") >= 1.0 {
        return Err(Error::InvalidArgument("radii must increase strictly inside (0, 1)".into()));
    }
    let sample = |r: f64| -> Result<Vec<(f64, f64)>> {
        (0..angles)
            .map(|k| {
                let zeta = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / angles as f64);
                let w = disc.eval(zeta);
                if !dom.contains(&w) {
                    return Err(Error::NotInterior { rho: dom.defining(&w) });
                }
                Ok((1.0 - r, distance_to_boundary(dom, &w)?))
            })
            .collect()
    };
    let mut train = Vec::new();
    for &r in radii {
        train.extend(sample(r)?);
    }
    let c1 = train.iter().map(|(x, d)| d / x).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = train.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = train.iter().map(|(_, d)| d.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::Numerical("degenerate Mercer fit".into()))?;
    let beta_raw = 1.0 / fit.slope;
    let beta = if beta_raw.is_finite() && beta_raw > 1.0 { beta_raw } else { 1.0 };
    let c2 = train.iter().map(|(x, d)| d / x.powf(1.0 / beta)).fold(0.0, f64::max);
    let mut held = Vec::new();
    for w in radii.windows(2) {
        held.extend(sample(1.0 - ((1.0 - w[0]) * (1.0 - w[1])).sqrt())?);
    }
    let slack = 1e-9;
    let violations = held
        .iter()
        .filter(|(x, d)| *d < c1 * x * (1.0 - slack) || *d > c2 * x.powf(1.0 / beta) * (1.0 + slack))
        .count();
    Ok(MercerFit {
        c1,
        c2,
        beta,
        beta_raw,
        rms_residual: fit.rms_residual,
        validation_samples: held.len(),
        validation_violations: violations,
    })
}

/// Outcome of [`dini_check`].
#[derive(Debug, Clone, Serialize)]
pub struct DiniReport {
    pub modulus: ModulusOfContinuity,
    /// Hölder exponent `s = 1/β`.
    pub s: f64,
    pub c2: f64,
    pub c: f64,
    pub epsilon: f64,
    /// `∫₀^ε τ`, `None` when divergent.
    pub integral: Option<f64>,
    pub passes: bool,
    /// `"analytic"` or `"graded-quadrature"`.
    pub method: &'static str,
    /// Set when `ω` is an empirical table rather than a proven modulus.
    pub note: Option<String>,
}

impl DiniReport {
    /// `τ(x) = √ω(C₂ x^s) / (c x)`.
    pub fn tau(&self, x: f64) -> f64 {
        dini_integrand(&self.modulus, self.c2, self.s, self.c, x)
    }
}

fn dini_integrand(modulus: &ModulusOfContinuity, c2: f64, s: f64, c: f64, x: f64) -> f64 {
    modulus.eval(c2 * x.powf(s)).sqrt() / (c * x)
}

/// Integrability of `τ(x) = √ω(C₂ x^s)/(c x)` on `(0, DINI_EPSILON)`:
/// closed forms for the power, power-log and constant families; for tables
/// the linear initial segment is integrated in closed form and the rest by
/// quadrature in `log x`.
pub fn dini_check(modulus: &ModulusOfContinuity, c2: f64, s: f64, c: f64) -> Result<DiniReport> {
    if !(c2 > 0.0 && c > 0.0) || !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!("need C₂ > 0, c > 0, s ∈ (0,1]; got C₂={c2}, c={c}, s={s}")));
    }
    let eps = DINI_EPSILON;
    let mut method = "analytic";
    let mut note = None;
    let integral = match modulus {
        ModulusOfContinuity::Power { c: k, alpha } => {
            let e = alpha * s / 2.0;
            Some(k.sqrt() * c2.powf(alpha / 2.0) / c * eps.powf(e) / e)
        }
        ModulusOfContinuity::Constant { c: k } => (*k == 0.0).then_some(0.0),
        ModulusOfContinuity::PowerLog { c: k, gamma } => {
            if *k == 0.0 {
                Some(0.0)
            } else if *gamma <= 2.0 {
                None
            } else {
                // ω(C₂x^s) = k L^{−γ} with L = −ln(C₂) − s ln x while C₂x^s < 1/e.
                let knee = (1.0 / (std::f64::consts::E * c2)).powf(1.0 / s);
                let b = knee.min(eps);
                let l_b = -c2.ln() - s * b.ln();
                let half = gamma / 2.0;
                let singular = k.sqrt() / c * l_b.powf(1.0 - half) / (s * (half - 1.0));
                let flat = if knee < eps { k.sqrt() / c * (eps / knee).ln() } else { 0.0 };
                Some(singular + flat)
            }
        }
        ModulusOfContinuity::Tabulated { radii, values } => {
            method = "graded-quadrature";
            note = Some("tabulated modulus is an empirical estimate, not a proven bound".into());
            let slope = values[0] / radii[0];
            let linear_end = (radii[0] / c2).powf(1.0 / s).min(eps);
            let head = (slope * c2).sqrt() / c * linear_end.powf(s / 2.0) / (s / 2.0);
            let rest = if linear_end < eps {
                integrate_real(|t| dini_integrand(modulus, c2, s, c, t.exp()) * t.exp(), linear_end.ln(), eps.ln(), 1e-12, 2000)?.0
            } else {
                0.0
            };
            Some(head + rest)
        }
    };
    Ok(DiniReport { modulus: modulus.clone(), s, c2, c, epsilon: eps, passes: integral.is_some(), integral, method, note })
}

/// One radial sample of [`geodesic_derivative_bound`].
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeRow {
    pub radius: f64,
    /// `max_θ ∥ψ′(r e^{iθ})∥`.
    pub derivative: f64,
    /// `√ω(C₂(1−r)^{1/β}) / (1−r)`, the bound for `c = 1`.
    pub bound_at_unit_c: f64,
}

/// Verification of `∥ψ′(ζ)∥ ≤ (1/c) √ω(C₂(1−|ζ|)^{1/β}) / (1−|ζ|)`.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeBoundTable {
    pub rows: Vec<DerivativeRow>,
    /// Largest `c` for which every row holds.
    pub calibrated_c: f64,
    /// Verdict for the supplied `c`, if any.
    pub passes: Option<bool>,
}

pub fn geodesic_derivative_bound(
    disc: &AnalyticDisc,
    dom: &DomainSpec,
    modulus: &ModulusOfContinuity,
    fit: &MercerFit,
    c: Option<f64>,
    radii: &[f64],
    angles: usize,
) -> Result<DerivativeBoundTable> {
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut derivative: f64 = 0.0;
        for k in 0..angles {
            let zeta = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / angles as f64);
            let w = disc.eval(zeta);
            if !dom.contains(&w) {
                return Err(Error::NotInterior { rho: dom.defining(&w) });
            }
            let d = norm(&disc.derivative(zeta));
            if !d.is_finite() {
                return Err(Error::Numerical(format!("ψ′ is not finite at |ζ| = {r}")));
            }
            derivative = derivative.max(d);
        }
        let bound_at_unit_c = modulus.eval(fit.c2 * (1.0 - r).powf(1.0 / fit.beta)).sqrt() / (1.0 - r);
        rows.push(DerivativeRow { radius: r, derivative, bound_at_unit_c });
    }
    let calibrated_c = rows
        .iter()
        .map(|row| if row.derivative == 0.0 { f64::INFINITY } else { row.bound_at_unit_c / row.derivative })
        .fold(f64::INFINITY, f64::min);
    Ok(DerivativeBoundTable { passes: c.map(|c| c <= calibrated_c * (1.0 + 1e-12)), rows, calibrated_c })
}

/// Holomorphic function on the unit disc with its derivative.
#[derive(Clone)]
pub struct DiscFunction {
    pub value: DiscFn,
    pub derivative: DiscFn,
}

impl DiscFunction {
    pub fn new(value: DiscFn, derivative: DiscFn) -> Self {
        DiscFunction { value, derivative }
    }
}

/// Integrable majorant `m(x)` of `|g′|` at distance `x = 1 − r` from the
/// circle.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Majorant {
    /// `c x^{−s}`, `0 ≤ s < 1`.
    Power { c: f64, s: f64 },
    /// `c (1 + ln(1/x))`.
    Log { c: f64 },
}

impl Majorant {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Majorant::Power { c, s } => c * x.powf(-s),
            Majorant::Log { c } => c * (1.0 - x.ln()),
        }
    }

    /// `∫₀^x m`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        match *self {
            Majorant::Power { c, s } if (0.0..1.0).contains(&s) => Ok(c * x.powf(1.0 - s) / (1.0 - s)),
            Majorant::Power { s, .. } => Err(Error::InvalidArgument(format!("majorant x^(-{s}) is not integrable at 0"))),
            Majorant::Log { c } => Ok(c * x * (2.0 - x.ln())),
        }
    }

    /// Exponent of the substitution `x = y^p` that makes the pulled-back
    /// majorant bounded.
    fn substitution_power(&self) -> f64 {
        match *self {
            Majorant::Power { s, .. } => 1.0 / (1.0 - s),
            Majorant::Log { .. } => 2.0,
        }
    }
}

/// Boundary values produced by [`hl_extend`].
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryTable {
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Quadrature error plus the majorant tail below the cut-off.
    pub error_bound: f64,
}

/// Smallest distance to the circle resolved by [`hl_extend`]; the rest is
/// covered by the majorant tail.
const HL_CUTOFF: f64 = 1e-24;

/// `g(e^{iθ}) = g(r₀e^{iθ}) + ∫_{r₀}^1 g′(te^{iθ}) e^{iθ} dt` at the given
/// angles, after checking `|g′(re^{iθ})| ≤ m(1−r)` on sampled radii.
pub fn hl_extend(g: &DiscFunction, majorant: &Majorant, angles: &[f64], r0: f64, tol: f64) -> Result<BoundaryTable> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidArgument(format!("r₀ must lie in (0,1), got {r0}")));
    }
    let tail = majorant.tail(HL_CUTOFF)?;
    for &theta in angles {
        for k in 1..=40 {
            let x = (1.0 - r0) * 2f64.powf(-0.75 * k as f64);
            let d = (g.derivative)(Complex64::from_polar(1.0 - x, theta)).norm();
            if !(d <= majorant.eval(x) * (1.0 + 1e-12)) {
                return Err(Error::Certificate(format!("|g′| = {d:.6e} exceeds the majorant {:.6e} at x = {x:.3e}, θ = {theta}", majorant.eval(x))));
            }
        }
    }
    let p = majorant.substitution_power();
    let (y_lo, y_hi) = (HL_CUTOFF.powf(1.0 / p), (1.0 - r0).powf(1.0 / p));
    let mut values = Vec::with_capacity(angles.len());
    let mut error_bound: f64 = 0.0;
    for &theta in angles {
        let e = Complex64::from_polar(1.0, theta);
        let q = integrate(
            |y| {
                let x = y.powf(p);
                (g.derivative)(e * (1.0 - x)) * e * (p * y.powf(p - 1.0))
            },
            y_lo,
            y_hi,
            tol,
            4000,
        )?;
        values.push((g.value)(e * r0) + q.value);
        error_bound = error_bound.max(q.error + tail);
    }
    Ok(BoundaryTable { angles: angles.to_vec(), values, error_bound })
}

/// `g(ζ) = (1−ζ) log(1−ζ) + ζ` with `g′ = −log(1−ζ)`, continuous but not
/// Lipschitz on the closed disc.
pub fn log_test_function() -> DiscFunction {
    DiscFunction::new(
        Arc::new(|z| {
            let w = 1.0 - z;
            if w.norm() == 0.0 {
                z
            } else {
                w * w.ln() + z
            }
        }),
        Arc::new(|z| -(1.0 - z).ln()),
    )
}

/// Domain `max_j ρ_j < 0` for the given ellipsoids.
pub fn intersection_domain(ellipsoids: &[Ellipsoid]) -> Result<DomainSpec> {
    DomainSpec::intersection(ellipsoids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_ball_point<R: Rng>(rng: &mut R, n: usize) -> CVec {
        numerics::random_in_ball(rng, &vec![c(0.0, 0.0); n], 0.95)
    }

    #[test]
    fn automorphism_is_an_involution_swapping_a_and_zero() {
        let mut rng = numerics::seeded_rng(1);
        for _ in 0..20 {
            let a = random_ball_point(&mut rng, 3);
            let z = random_ball_point(&mut rng, 3);
            assert!(norm(&ball_automorphism(&a, &a)) < 1e-14);
            assert!(norm(&numerics::sub(&ball_automorphism(&a, &[c(0.0, 0.0); 3]), &a)) < 1e-14);
            assert!(norm(&numerics::sub(&ball_automorphism(&a, &ball_automorphism(&a, &z)), &z)) < 1e-12);
            let closed = (1.0 - (1.0 - norm(&a).powi(2)) * (1.0 - norm(&z).powi(2)) / (1.0 - inner(&z, &a)).norm_sqr()).sqrt();
            assert!((norm(&ball_automorphism(&a, &z)) - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_geodesic_is_linear() {
        let disc = ball_geodesic(&[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.4, 0.0), c(0.0, 0.0)]).unwrap();
        let z = c(0.3, -0.2);
        assert!(norm(&numerics::sub(&disc.eval(z), &[z, c(0.0, 0.0)])) < 1e-15);
        assert!(norm(&numerics::sub(&disc.derivative(z), &[c(1.0, 0.0), c(0.0, 0.0)])) < 1e-15);
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        assert!((distance_to_boundary(&ball, &disc.eval(z)).unwrap() - (1.0 - z.norm())).abs() < 1e-15);
        assert!((ball_distance(1.0, &[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.6, 0.0), c(0.0, 0.0)]) - disc_distance(c(0.0, 0.0), c(0.6, 0.0))).abs() < 1e-15);
        let d = isometry_defect(&disc, &ball, &[(c(0.1, 0.2), c(-0.5, 0.3)), (c(0.9, 0.0), c(0.0, -0.95))]).unwrap();
        assert!(d.exact && d.upper < 1e-10);
    }

    #[test]
    fn geodesics_through_random_pairs_are_isometric() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let mut rng = numerics::seeded_rng(7);
        for _ in 0..10 {
            let (p, q) = (random_ball_point(&mut rng, 2), random_ball_point(&mut rng, 2));
            let disc = ball_geodesic(&p, &q).unwrap();
            assert!(norm(&numerics::sub(&disc.eval(c(0.0, 0.0)), &p)) < 1e-12);
            let t = norm(&ball_automorphism(&p, &q));
            assert!(norm(&numerics::sub(&disc.eval(c(t, 0.0)), &q)) < 1e-12);
            let pairs: Vec<_> = (0..5).map(|_| (numerics::random_in_ball(&mut rng, &[c(0.0, 0.0)], 0.99)[0], numerics::random_in_ball(&mut rng, &[c(0.0, 0.0)], 0.99)[0])).collect();
            assert!(isometry_defect(&disc, &ball, &pairs).unwrap().upper < 1e-8);
            let zeta = c(0.2, 0.5);
            let h = 1e-5;
            let numeric = numerics::scale(&numerics::sub(&disc.eval(zeta + h), &disc.eval(zeta - h)), c(0.5 / h, 0.0));
            assert!(norm(&numerics::sub(&numeric, &disc.derivative(zeta))) < 1e-8);
        }
        assert!(ball_geodesic(&[c(0.1, 0.0)], &[c(0.1, 0.0)]).is_err());
        assert!(matches!(ball_geodesic(&[c(1.1, 0.0)], &[c(0.1, 0.0)]), Err(Error::NotInterior { .. })));
    }

    #[test]
    fn squared_disc_is_not_a_geodesic() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let disc = AnalyticDisc::power_series("square", vec![vec![c(0.0, 0.0); 2], vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let d = isometry_defect(&disc, &ball, &[(c(0.0, 0.0), c(0.5, 0.0))]).unwrap();
        assert!((d.lower - (0.5f64.atanh() - 0.25f64.atanh())).abs() < 1e-12);
    }

    #[test]
    fn bracketed_distances_on_a_polydisc() {
        let poly = DomainSpec::polydisc(2).unwrap();
        let disc = AnalyticDisc::power_series("diagonal", vec![vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let d = isometry_defect(&disc, &poly, &[(c(0.0, 0.0), c(0.5, 0.0))]).unwrap();
        assert!(!d.exact);
        let bracket = d.pairs[0].3;
        let exact = 0.5f64.atanh();
        assert!(bracket.lower <= exact + 1e-9 && exact <= bracket.upper + 1e-9, "{bracket:?}");
        assert!((bracket.lower - (1.0f64 / 3.0).atanh()).abs() < 1e-6, "{bracket:?}");
        let cone = DomainSpec::cone_source();
        assert!(matches!(kobayashi_distance(&cone, &[c(0.0, 0.0), c(0.0, 0.5)], &[c(0.0, 0.0), c(0.0, 0.6)]), Err(Error::NotConvex(_))));
    }

    #[test]
    fn mercer_fit_of_the_radial_disc() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let disc = ball_geodesic(&[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        let radii: Vec<f64> = (1..=12).map(|k| 1.0 - 2f64.powi(-k)).collect();
        let fit = mercer_fit(&disc, &ball, &radii, 8).unwrap();
        assert!((fit.c1 - 1.0).abs() < 1e-12 && (fit.c2 - 1.0).abs() < 1e-9 && (fit.beta - 1.0).abs() < 1e-9, "{fit:?}");
        assert_eq!(fit.validation_violations, 0);
        let table = geodesic_derivative_bound(&disc, &ball, &ModulusOfContinuity::power(1.0, 2.0).unwrap(), &fit, Some(1.0), &radii, 8).unwrap();
        assert!((table.calibrated_c - 1.0).abs() < 1e-9 && table.passes == Some(true));
        let table = geodesic_derivative_bound(&disc, &ball, &ModulusOfContinuity::power(1.0, 1.0).unwrap(), &fit, None, &radii, 8).unwrap();
        assert!((table.calibrated_c - (1.0 - radii[0]).sqrt().recip()).abs() < 1e-9);
    }

    #[test]
    fn dini_closed_forms() {
        let p = dini_check(&ModulusOfContinuity::power(1.0, 1.0).unwrap(), 1.0, 1.0, 1.0).unwrap();
        assert!(p.passes && (p.integral.unwrap() - 2.0 * 0.1f64.sqrt()).abs() < 1e-14);
        let quarter = dini_check(&ModulusOfContinuity::power(1.0, 0.25).unwrap(), 1.0, 1.0, 1.0).unwrap();
        assert!(quarter.passes);
        assert!(!dini_check(&ModulusOfContinuity::power_log(1.0, 2.0).unwrap(), 1.0, 1.0, 1.0).unwrap().passes);
        assert!(dini_check(&ModulusOfContinuity::constant(0.0).unwrap(), 1.0, 1.0, 1.0).unwrap().passes);
        assert!(!dini_check(&ModulusOfContinuity::constant(0.5).unwrap(), 1.0, 1.0, 1.0).unwrap().passes);
        let log3 = dini_check(&ModulusOfContinuity::power_log(1.0, 3.0).unwrap(), 1.0, 0.5, 1.0).unwrap();
        let (numeric, _) = integrate_real(|t| log3.tau(t.exp()) * t.exp(), -700.0, 0.1f64.ln(), 1e-12, 4000).unwrap();
        let tail = 2.0 / 0.5 * (0.5 * 700.0f64).powf(-0.5);
        assert!((log3.integral.unwrap() - numeric - tail).abs() < 1e-6, "{:?} vs {numeric}", log3.integral);
        let table = ModulusOfContinuity::tabulated(vec![0.01, 0.1, 1.0], vec![0.01, 0.1, 1.0]).unwrap();
        let t = dini_check(&table, 1.0, 1.0, 1.0).unwrap();
        assert!((t.integral.unwrap() - p.integral.unwrap()).abs() < 1e-9 && t.note.is_some());
        assert!(dini_check(&table, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn hl_extension_of_entire_and_log_functions() {
        let square = DiscFunction::new(Arc::new(|z| z * z), Arc::new(|z| z * 2.0));
        let angles: Vec<f64> = (0..16).map(|k| std::f64::consts::TAU * k as f64 / 16.0).collect();
        let t = hl_extend(&square, &Majorant::Power { c: 2.0, s: 0.0 }, &angles, 0.5, 1e-13).unwrap();
        for (theta, v) in angles.iter().zip(&t.values) {
            assert!((v - Complex64::from_polar(1.0, 2.0 * theta)).norm() < 1e-10);
        }
        let g = log_test_function();
        let majorant = Majorant::Log { c: 2.5 };
        let a = hl_extend(&g, &majorant, &angles, 0.5, 1e-11).unwrap();
        let b = hl_extend(&g, &majorant, &angles, 0.75, 1e-11).unwrap();
        for ((theta, x), y) in angles.iter().zip(&a.values).zip(&b.values) {
            let exact = (g.value)(Complex64::from_polar(1.0, *theta));
            assert!((x - exact).norm() < 1e-8, "θ={theta}: {x} vs {exact}");
            assert!((x - y).norm() < 1e-9);
        }
        assert!(matches!(hl_extend(&g, &Majorant::Power { c: 1.0, s: 0.0 }, &angles, 0.5, 1e-11), Err(Error::Certificate(_))));
        assert!(hl_extend(&g, &Majorant::Power { c: 1.0, s: 1.0 }, &angles, 0.5, 1e-11).is_err());
    }

    #[test]
    fn power_series_radius() {
        let geometric: Vec<CVec> = (0..40).map(|k| vec![c(0.5f64.powi(k), 0.0)]).collect();
        assert!((convergence_radius(&geometric) - 2.0).abs() < 0.05);
        let divergent: Vec<CVec> = (0..40).map(|k| vec![c(1.5f64.powi(k), 0.0)]).collect();
        assert!(AnalyticDisc::power_series("bad", divergent).is_err());
    }

    #[test]
    fn lens_intersection() {
        let e = [Ellipsoid::ball(vec![c(0.0, 0.0), c(0.0, 0.0)], 1.0), Ellipsoid::ball(vec![c(0.5, 0.0), c(0.0, 0.0)], 1.0)];
        let lens = intersection_domain(&e).unwrap();
        assert!(lens.flags().convex && lens.contains(&[c(0.25, 0.0), c(0.0, 0.0)]));
        assert!(!lens.contains(&[c(-0.6, 0.0), c(0.0, 0.0)]));
    }
}
