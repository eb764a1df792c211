//! Proper holomorphic maps `F: D → Ω` between domains of different
//! dimension and the machinery that extends them continuously to the
//! boundary: properness probes, L^p checks on Jacobian products, Hopf and
//! Hölder exponent fits, the radial extension operator and its
//! uniform-continuity scan, Lipschitz boundary charts and cone probes.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::domains::{boundary_distance, first_exit, nearest_boundary, DistanceConfig, DomainSpec};
use crate::error::{Error, Result};
use crate::monge_ampere::{lp_norm_estimate, LpEstimate};
use crate::numerics::{self, c, fit_line, integrate, norm, CVec, I};

/// Evaluable map `C^m → C^n`.
pub type MapFn = Arc<dyn Fn(&[Complex64]) -> CVec + Send + Sync>;
/// Complex Jacobian `∂F_μ/∂z_j` as an `n × m` matrix.
pub type JacobianFn = Arc<dyn Fn(&[Complex64]) -> DMatrix<Complex64> + Send + Sync>;

/// Holomorphic map with an optional analytic Jacobian.
#[derive(Clone)]
pub struct HoloMap {
    name: String,
    source_dim: usize,
    target_dim: usize,
    map: MapFn,
    jacobian: Option<JacobianFn>,
}

impl std::fmt::Debug for HoloMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HoloMap({}: C^{} → C^{})", self.name, self.source_dim, self.target_dim)
    }
}

impl HoloMap {
    pub fn new(name: impl Into<String>, source_dim: usize, target_dim: usize, map: MapFn) -> Self {
        HoloMap { name: name.into(), source_dim, target_dim, map, jacobian: None }
    }

    pub fn with_jacobian(mut self, jacobian: JacobianFn) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn identity(m: usize) -> Self {
        Self::new("identity", m, m, Arc::new(|z| z.to_vec())).with_jacobian(Arc::new(move |_| DMatrix::identity(m, m)))
    }

    /// `z ↦ A z` for an `n × m` matrix `A`.
    pub fn linear(a: DMatrix<Complex64>) -> Self {
        let (n, m) = a.shape();
        let a2 = a.clone();
        Self::new("linear", m, n, Arc::new(move |z| (&a2 * nalgebra::DVector::from_column_slice(z)).iter().cloned().collect()))
            .with_jacobian(Arc::new(move |_| a.clone()))
    }

    /// `ζ ↦ (ζ, 0, …, 0)` from the unit disc into C^n.
    pub fn disc_embedding(n: usize) -> Self {
        let mut a = DMatrix::zeros(n, 1);
        a[(0, 0)] = c(1.0, 0.0);
        Self::linear(a)
    }

    /// Constant map.
    pub fn constant(m: usize, value: CVec) -> Self {
        let n = value.len();
        Self::new("constant", m, n, Arc::new(move |_| value.clone())).with_jacobian(Arc::new(move |_| DMatrix::zeros(n, m)))
    }

    /// `z ↦ (z_1², …, z_m², 0)` into C^{m+1}.
    pub fn squares(m: usize) -> Self {
        Self::new(
            "squares",
            m,
            m + 1,
            Arc::new(move |z| z.iter().map(|w| w * w).chain(std::iter::once(c(0.0, 0.0))).collect()),
        )
        .with_jacobian(Arc::new(move |z| DMatrix::from_fn(m + 1, m, |mu, j| if mu == j { z[j] * 2.0 } else { c(0.0, 0.0) })))
    }

    /// The square-root lift `(z_1, z_2) ↦ (√(z_1 + 1), z_2, 0)` from
    /// `example_D` onto `example_Omega` (principal branch).
    pub fn sqrt_lift() -> Self {
        Self::new("sqrt_lift", 2, 3, Arc::new(|z| vec![(z[0] + 1.0).sqrt(), z[1], c(0.0, 0.0)])).with_jacobian(Arc::new(|z| {
            let mut j = DMatrix::zeros(3, 2);
            j[(0, 0)] = 0.5 / (z[0] + 1.0).sqrt();
            j[(1, 1)] = c(1.0, 0.0);
            j
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<CVec> {
        if z.len() != self.source_dim {
            return Err(Error::DimensionMismatch { expected: self.source_dim, found: z.len() });
        }
        let w = (self.map)(z);
        if w.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::Numerical(format!("{} is not finite at {z:?}", self.name)));
        }
        Ok(w)
    }

    /// Complex Jacobian; analytic when available, otherwise
    /// Richardson-extrapolated central differences along the real axes.
    pub fn jacobian(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
        if z.len() != self.source_dim {
            return Err(Error::DimensionMismatch { expected: self.source_dim, found: z.len() });
        }
        if let Some(j) = &self.jacobian {
            return Ok(j(z));
        }
        Ok(self.numeric_jacobian(z, c(1.0, 0.0)))
    }

    fn numeric_jacobian(&self, z: &[Complex64], axis: Complex64) -> DMatrix<Complex64> {
        let mut jac = DMatrix::zeros(self.target_dim, self.source_dim);
        for k in 0..self.source_dim {
            let h = 1e-4 * (1.0 + z[k].norm());
            let diff = |step: f64| {
                let mut zp = z.to_vec();
                let mut zm = z.to_vec();
                zp[k] += axis * step;
                zm[k] -= axis * step;
                let (fp, fm) = ((self.map)(&zp), (self.map)(&zm));
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (axis * 2.0 * step)).collect::<Vec<_>>()
            };
            let (d1, d2) = (diff(h), diff(0.5 * h));
            for mu in 0..self.target_dim {
                jac[(mu, k)] = (d2[mu] * 4.0 - d1[mu]) / 3.0;
            }
        }
        jac
    }

    /// Directional derivative `F'(z)v`.
    pub fn derivative(&self, z: &[Complex64], v: &[Complex64]) -> Result<CVec> {
        let j = self.jacobian(z)?;
        Ok((j * nalgebra::DVector::from_column_slice(v)).iter().cloned().collect())
    }

    /// Operator norm of `F'(z)`.
    pub fn derivative_norm(&self, z: &[Complex64]) -> Result<f64> {
        let j = self.jacobian(z)?;
        Ok(j.singular_values().iter().cloned().fold(0.0, f64::max))
    }

    /// Cauchy–Riemann residual: difference between the derivatives taken
    /// along the real and the imaginary axes.
    pub fn cauchy_riemann_residual(&self, z: &[Complex64]) -> f64 {
        let along_real = self.numeric_jacobian(z, c(1.0, 0.0));
        let along_imag = self.numeric_jacobian(z, I);
        (along_real - along_imag).iter().map(|e| e.norm()).fold(0.0, f64::max)
    }
}

/// Builds a map from its identifier (`sqrt_lift`, alias `example25`;
/// `identity`; `squares`).
pub fn make_map(name: &str, m: usize) -> Result<HoloMap> {
    match name {
        "sqrt_lift" | "example25" => Ok(HoloMap::sqrt_lift()),
        "identity" => Ok(HoloMap::identity(m)),
        "squares" => Ok(HoloMap::squares(m)),
        other => Err(Error::UnknownMap(other.to_string())),
    }
}

/// Points approaching the boundary of a domain: boundary points reached from
/// the interior witness, pulled back towards it by geometrically graded
/// distances in `[min_depth, max_depth]`.
pub fn boundary_layer_samples(dom: &DomainSpec, count: usize, min_depth: f64, max_depth: f64, seed: u64) -> Result<Vec<CVec>> {
    let mut rng = numerics::seeded_rng(seed);
    let witness = dom.interior_witness().to_vec();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 50 * count.max(1) {
            return Err(Error::Numerical("could not place boundary-layer samples".into()));
        }
        let u = numerics::random_unit(&mut rng, dom.dim());
        let t = first_exit(dom, &witness, &u, 1e-12)?;
        let depth = min_depth * (max_depth / min_depth).powf(rng.random::<f64>());
        if depth >= t {
            continue;
        }
        let z = numerics::along(&witness, c(t - depth, 0.0), &u);
        if dom.contains(&z) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Properness verdict for one approach sequence.
#[derive(Debug, Clone, Serialize)]
pub struct ProperRow {
    /// `(δ_D(z_ν), δ_Ω(F(z_ν)))`.
    pub table: Vec<(f64, f64)>,
    pub decays: bool,
}

/// Tabulates `δ_Ω(F(z_ν))` along sequences approaching `∂D`. A sequence
/// passes if it has at least 8 terms, its last value is below a tenth of the
/// first and at least 80% of the steps decrease.
pub fn properness_probe(map: &HoloMap, source: &DomainSpec, target: &DomainSpec, seqs: &[Vec<CVec>]) -> Result<Vec<ProperRow>> {
    seqs.iter()
        .map(|seq| {
            let table: Vec<(f64, f64)> = seq
                .iter()
                .map(|z| {
                    let w = map.eval(z)?;
                    target.require_interior(&w)?;
                    Ok((boundary_distance(source, z)?, boundary_distance(target, &w)?))
                })
                .collect::<Result<_>>()?;
            let decreasing = table.windows(2).filter(|w| w[1].1 < w[0].1).count();
            let decays = table.len() >= 8
                && table.last().expect("non-empty").1 < table[0].1 / 10.0
                && decreasing as f64 >= 0.8 * (table.len() - 1) as f64;
            Ok(ProperRow { table, decays })
        })
        .collect()
}

/// Approach sequences of `example_D`: towards the conical point along
/// `(0, i 2^{-ν})` and towards the top along `(0, i(1 − 2^{-ν}))`.
pub fn cone_source_sequences(terms: u32) -> Vec<Vec<CVec>> {
    let down = (1..=terms).map(|k| vec![c(0.0, 0.0), c(0.0, 2f64.powi(-(k as i32)))]).collect();
    let up = (1..=terms).map(|k| vec![c(0.0, 0.0), c(0.0, 1.0 - 2f64.powi(-(k as i32)))]).collect();
    vec![down, up]
}

/// L^p estimate of one Jacobian product `∂F_μ/∂z_j · conj(∂F_ν/∂z_k)`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductNorm {
    pub mu: usize,
    pub nu: usize,
    pub j: usize,
    pub k: usize,
    pub estimate: LpEstimate,
}

/// Outcome of [`jacobian_lp_check`].
#[derive(Debug, Clone, Serialize)]
pub struct LpReport {
    pub p: f64,
    pub budget: usize,
    pub products: Vec<ProductNorm>,
    pub pass: bool,
}

/// L^p norms of all `m²n²` Jacobian products, each estimated at two budgets;
/// passes if every estimate is finite and the ratio lies in `[0.8, 1.25]`.
pub fn jacobian_lp_check(map: &HoloMap, dom: &DomainSpec, p: f64, budget: usize, seed: u64) -> Result<LpReport> {
    let (m, n) = (map.source_dim(), map.target_dim());
    if !(p > m as f64) {
        return Err(Error::InvalidArgument(format!("exponent {p} must exceed the source dimension {m}")));
    }
    let mut products = Vec::with_capacity(m * m * n * n);
    for mu in 0..n {
        for nu in 0..n {
            for j in 0..m {
                for k in 0..m {
                    let g = |z: &[Complex64]| match map.jacobian(z) {
                        Ok(jac) => (jac[(mu, j)] * jac[(nu, k)].conj()).norm(),
                        Err(_) => f64::NAN,
                    };
                    let estimate = lp_norm_estimate(&g, dom, p, budget, seed)?;
                    products.push(ProductNorm { mu, nu, j, k, estimate });
                }
            }
        }
    }
    let pass = products.iter().all(|q| q.estimate.fine.is_finite() && q.estimate.is_stable());
    Ok(LpReport { p, budget, products, pass })
}

/// Hopf-type decay fit `ρ ≤ −c₀ δ^α`.
#[derive(Debug, Clone, Serialize)]
pub struct HopfFit {
    /// Least-squares slope of `log(−ρ)` against `log δ`.
    pub alpha_raw: f64,
    /// `max(alpha_raw, 1)`.
    pub alpha_hopf: f64,
    /// `exp(intercept)` of the fit.
    pub c0_fit: f64,
    /// Certified constant: `margin · min (−ρ)/δ^α` over training samples.
    pub c0: f64,
    pub training: usize,
    pub validation: usize,
    /// Fraction of validation samples with `ρ ≤ −c₀ δ^α`.
    pub pass_rate: f64,
}

/// Fits `c₀, α` on training samples and validates `ρ ≤ −c₀ δ^α` on held-out
/// samples.
pub fn hopf_fit(rho: &dyn Fn(&[Complex64]) -> f64, dom: &DomainSpec, training: &[CVec], validation: &[CVec], margin: f64) -> Result<HopfFit> {
    let measure = |pts: &[CVec]| -> Result<Vec<(f64, f64)>> {
        pts.iter()
            .map(|z| {
                let r = rho(z);
                if !(r < 0.0) {
                    return Err(Error::InvalidArgument(format!("ρ = {r} is not negative at a sample")));
                }
                Ok((boundary_distance(dom, z)?, -r))
            })
            .collect()
    };
    let train = measure(training)?;
    let xs: Vec<f64> = train.iter().map(|(d, _)| d.ln()).collect();
    let ys: Vec<f64> = train.iter().map(|(_, r)| r.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::Numerical("degenerate Hopf fit: samples at a single scale".into()))?;
    let alpha_hopf = fit.slope.max(1.0);
    let c0 = margin * train.iter().map(|(d, r)| r / d.powf(alpha_hopf)).fold(f64::INFINITY, f64::min);
    let held = measure(validation)?;
    let passed = held.iter().filter(|(d, r)| -r <= -c0 * d.powf(alpha_hopf)).count();
    Ok(HopfFit {
        alpha_raw: fit.slope,
        alpha_hopf,
        c0_fit: fit.intercept.exp(),
        c0,
        training: train.len(),
        validation: held.len(),
        pass_rate: if held.is_empty() { 1.0 } else { passed as f64 / held.len() as f64 },
    })
}

/// Default target-domain Hölder exponent: the midpoint of `(0, 1/(n+1))`.
pub fn default_target_exponent(n: usize) -> f64 {
    0.5 / (n as f64 + 1.0)
}

/// Constants of the boundary-extension argument.
#[derive(Debug, Clone, Serialize)]
pub struct ChainConstants {
    /// Hölder exponent of the target canonical data (input).
    pub s: f64,
    /// Fitted Hölder exponent of `ρ_Ω ∘ F` near `∂D`.
    pub s0: f64,
    pub alpha_hopf: f64,
    pub c0: f64,
    /// `s0 / α`.
    pub s_star: f64,
    /// `1 − s·s_*/2`.
    pub s_tilde: f64,
    /// `∥F'(z)∥ ≤ (1/M) δ_Ω(F(z))^{s/2} / δ_D(z)`.
    pub m: f64,
    /// `−ρ_Ω(F(z)) ≤ C₀ δ_D(z)^{s0}`.
    pub c0_source: f64,
    /// `δ_Ω(F(z)) ≤ C₁ δ_D(z)^{s_*}`.
    pub c1: f64,
    /// `∥F'(z)∥ ≤ M* / δ_D(z)^{s̃}`.
    pub m_star: f64,
}

/// Held-out validation of a [`ChainConstants`] record.
#[derive(Debug, Clone, Serialize)]
pub struct ChainValidation {
    pub samples: usize,
    pub distance_violations: usize,
    pub derivative_violations: usize,
    pub pass_rate: f64,
}

/// A map with its fitted constants and cached boundary values.
#[derive(Debug, Clone, Serialize)]
pub struct HoloMapAnalysis {
    #[serde(skip)]
    pub map: Option<HoloMap>,
    pub constants: ChainConstants,
    pub validation: ChainValidation,
    /// `(ξ, F•(ξ))`.
    pub extensions: Vec<(CVec, CVec)>,
}

/// Fits the exponent chain: `s0` from the decay of `ρ_Ω∘F` against `δ_D`,
/// then `s_*`, `s̃`, `M`, `C₀`, `C₁`, `M*` on training samples (with safety
/// factor `margin`) and validates the distance and derivative bounds on
/// held-out samples. `chart_constant` is the Lipschitz-chart constant `C`
/// (1 without a chart).
#[allow(clippy::too_many_arguments)]
pub fn exponent_chain(
    map: &HoloMap,
    source: &DomainSpec,
    target: &DomainSpec,
    rho_target: &dyn Fn(&[Complex64]) -> f64,
    s: f64,
    hopf: &HopfFit,
    training: &[CVec],
    validation: &[CVec],
    chart_constant: f64,
    margin: f64,
) -> Result<HoloMapAnalysis> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("s must lie in (0,1), got {s}")));
    }
    struct Row {
        delta_d: f64,
        delta_o: f64,
        minus_rho: f64,
        deriv: f64,
    }
    let measure = |pts: &[CVec]| -> Result<Vec<Row>> {
        pts.iter()
            .map(|z| {
                let w = map.eval(z)?;
                target.require_interior(&w)?;
                Ok(Row {
                    delta_d: boundary_distance(source, z)?,
                    delta_o: boundary_distance(target, &w)?,
                    minus_rho: -rho_target(&w),
                    deriv: map.derivative_norm(z)?,
                })
            })
            .collect()
    };
    let train = measure(training)?;
    let xs: Vec<f64> = train.iter().map(|r| r.delta_d.ln()).collect();
    let ys: Vec<f64> = train.iter().map(|r| r.minus_rho.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::Numerical("degenerate exponent fit: samples at a single scale".into()))?;
    let s0 = fit.slope.min(1.0);
    if !(s0 > 0.0) {
        return Err(Error::Numerical(format!("fitted exponent s0 = {} is not positive", fit.slope)));
    }
    let s_star = s0 / hopf.alpha_hopf;
    let s_tilde = 1.0 - s * s_star / 2.0;
    let sup = |f: &dyn Fn(&Row) -> f64| train.iter().map(f).fold(0.0, f64::max);
    let c0_source = margin * sup(&|r| r.minus_rho / r.delta_d.powf(s0));
    let c1 = (c0_source / hopf.c0).powf(1.0 / hopf.alpha_hopf).max(margin * sup(&|r| r.delta_o / r.delta_d.powf(s_star)));
    let inv_m = margin * sup(&|r| r.deriv * r.delta_d / r.delta_o.powf(s / 2.0));
    let m = 1.0 / inv_m.max(1e-300);
    let m_star = (chart_constant.powf(s_tilde) * c1.powf(s / 2.0) / m).max(margin * sup(&|r| r.deriv * r.delta_d.powf(s_tilde)));
    let constants = ChainConstants { s, s0, alpha_hopf: hopf.alpha_hopf, c0: hopf.c0, s_star, s_tilde, m, c0_source, c1, m_star };
    let held = measure(validation)?;
    let distance_violations = held.iter().filter(|r| r.delta_o > c1 * r.delta_d.powf(s_star)).count();
    let derivative_violations = held.iter().filter(|r| r.deriv > m_star / r.delta_d.powf(s_tilde)).count();
    let failures = held.iter().filter(|r| r.delta_o > c1 * r.delta_d.powf(s_star) || r.deriv > m_star / r.delta_d.powf(s_tilde)).count();
    let validation = ChainValidation {
        samples: held.len(),
        distance_violations,
        derivative_violations,
        pass_rate: if held.is_empty() { 1.0 } else { 1.0 - failures as f64 / held.len() as f64 },
    };
    Ok(HoloMapAnalysis { map: Some(map.clone()), constants, validation, extensions: Vec::new() })
}

/// Boundary value produced by [`boundary_extend`].
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionValue {
    pub value: CVec,
    pub error: f64,
}

/// `F•(ξ) = F(ξ + t′v₀) − lim_{t→0⁺} ∫_t^{t′} F'(ξ + x v₀) v₀ dx`, all
/// components at once. The substitution `x = y^{1/(1−s̃)}` removes the
/// integrable endpoint singularity of order `x^{−s̃}` before adaptive
/// quadrature.
pub fn boundary_extend(map: &HoloMap, xi: &[Complex64], v0: &[Complex64], t_prime: f64, s_tilde: f64) -> Result<ExtensionValue> {
    if !(0.0..1.0).contains(&s_tilde) {
        return Err(Error::InvalidArgument(format!("s̃ must lie in [0,1), got {s_tilde}")));
    }
    if !(t_prime > 0.0) {
        return Err(Error::InvalidArgument("t′ must be positive".into()));
    }
    let speed = |x: f64| -> f64 {
        map.derivative(&numerics::along(xi, c(x, 0.0), v0), v0).map_or(f64::INFINITY, |d| norm(&d))
    };
    let probe: Vec<f64> = (10..=30).step_by(5).map(|k| t_prime * 2f64.powi(-k)).collect();
    let growth: Vec<f64> = probe.iter().map(|x| speed(*x) * x).collect();
    if growth.iter().any(|g| !g.is_finite()) || growth.last().expect("non-empty") > &(10.0 * growth[0].max(1e-300)) && growth.last().expect("non-empty") > &1e-8 {
        return Err(Error::Numerical("derivative grows faster than 1/x at the boundary point".into()));
    }
    let power = 1.0 / (1.0 - s_tilde);
    let y_max = t_prime.powf(1.0 - s_tilde);
    let start = map.eval(&numerics::along(xi, c(t_prime, 0.0), v0))?;
    let mut value = Vec::with_capacity(start.len());
    let mut error: f64 = 0.0;
    for (j, f_start) in start.iter().enumerate() {
        let q = integrate(
            |y| {
                let x = y.powf(power);
                let dx = power * y.powf(power - 1.0);
                match map.derivative(&numerics::along(xi, c(x, 0.0), v0), v0) {
                    Ok(d) => d[j] * dx,
                    Err(_) => c(f64::NAN, f64::NAN),
                }
            },
            0.0,
            y_max,
            1e-10,
            4000,
        )?;
        error = error.max(q.error);
        value.push(f_start - q.value);
    }
    Ok(ExtensionValue { value, error })
}

/// Boundary points sharing an inward direction.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPatch {
    pub points: Vec<CVec>,
    pub inward: CVec,
}

impl BoundaryPatch {
    /// Boundary points of `example_D` near the conical point: the first
    /// exits downwards from `(z_1, u + i·lift)` with `|z_1|, |u| ≤ radius`.
    pub fn cone_source(count: usize, radius: f64, seed: u64) -> Result<Self> {
        let dom = DomainSpec::cone_source();
        let mut rng = numerics::seeded_rng(seed);
        let down = vec![c(0.0, 0.0), c(0.0, -1.0)];
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let z1 = c(radius * (2.0 * rng.random::<f64>() - 1.0), radius * (2.0 * rng.random::<f64>() - 1.0));
            let u = radius * (2.0 * rng.random::<f64>() - 1.0);
            let start = vec![z1, c(u, 0.5)];
            if !dom.contains(&start) {
                continue;
            }
            let t = first_exit(&dom, &start, &down, 1e-13)?;
            points.push(numerics::along(&start, c(t, 0.0), &down));
        }
        Ok(BoundaryPatch { points, inward: vec![c(0.0, 0.0), c(0.0, 1.0)] })
    }
}

/// One row of the uniform-continuity scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub epsilon: f64,
    /// `∫₀^κ M*/x^{s̃} dx = ε/3`.
    pub kappa: f64,
    /// Sampled modulus: boundary points closer than `r` have pushed-in
    /// images closer than `ε/3`.
    pub r: f64,
    /// Largest sampled `∥F•(ξ₁) − F•(ξ₂)∥` over pairs closer than `r`.
    pub max_extension_gap: f64,
}

/// `κ` with `∫₀^κ M* x^{−s̃} dx = ε/3`.
pub fn kappa_for(epsilon: f64, m_star: f64, s_tilde: f64) -> Result<f64> {
    if !(s_tilde < 1.0) {
        return Err(Error::InvalidArgument(format!("s̃ = {s_tilde} makes the majorant non-integrable")));
    }
    Ok(((1.0 - s_tilde) * epsilon / (3.0 * m_star)).powf(1.0 / (1.0 - s_tilde)))
}

/// For each `ε`, the push-in depth `κ` and a sampled modulus `r(ε)` of `F`
/// on the pushed-in patch, together with the largest observed gap of the
/// boundary extension over pairs closer than `r`.
pub fn extension_continuity_scan(map: &HoloMap, constants: &ChainConstants, patch: &BoundaryPatch, epsilons: &[f64]) -> Result<Vec<ScanRow>> {
    let extended: Vec<CVec> = patch
        .points
        .iter()
        .map(|xi| Ok(boundary_extend(map, xi, &patch.inward, 0.1, constants.s_tilde)?.value))
        .collect::<Result<_>>()?;
    let diameter = patch
        .points
        .iter()
        .flat_map(|a| patch.points.iter().map(move |b| norm(&numerics::sub(a, b))))
        .fold(0.0, f64::max);
    epsilons
        .iter()
        .map(|&epsilon| {
            let kappa = kappa_for(epsilon, constants.m_star, constants.s_tilde)?;
            let pushed: Vec<CVec> = patch
                .points
                .iter()
                .map(|xi| map.eval(&numerics::along(xi, c(kappa, 0.0), &patch.inward)))
                .collect::<Result<_>>()?;
            let mut r = diameter;
            for a in 0..pushed.len() {
                for b in 0..a {
                    if norm(&numerics::sub(&pushed[a], &pushed[b])) >= epsilon / 3.0 {
                        r = r.min(norm(&numerics::sub(&patch.points[a], &patch.points[b])));
                    }
                }
            }
            let mut gap: f64 = 0.0;
            for a in 0..extended.len() {
                for b in 0..a {
                    if norm(&numerics::sub(&patch.points[a], &patch.points[b])) < r {
                        gap = gap.max(norm(&numerics::sub(&extended[a], &extended[b])));
                    }
                }
            }
            Ok(ScanRow { epsilon, kappa, r, max_extension_gap: gap })
        })
        .collect()
}

/// Local graph representation of a boundary near `p`:
/// in coordinates `w = Uᴴ(z − p)`, the domain is `Im w_m > ψ(w′, Re w_m)`.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzChart {
    pub base: CVec,
    /// Columns of the unitary frame; the last is `−i` times the inward normal.
    pub frame: Vec<CVec>,
    pub radius: f64,
    /// Sampled graph `((w′, Re w_m), ψ)` in real coordinates.
    pub graph: Vec<(Vec<f64>, f64)>,
    pub lipschitz: f64,
    /// `√(1 + L²)`.
    pub constant: f64,
    /// Samples where `δ ≤ y ≤ C δ` held, out of the checked ones.
    pub sandwich_passed: usize,
    pub sandwich_checked: usize,
    #[serde(skip)]
    dom: Option<DomainSpec>,
}

impl LipschitzChart {
    fn to_chart(&self, z: &[Complex64]) -> CVec {
        let d = numerics::sub(z, &self.base);
        self.frame.iter().map(|col| numerics::inner(&d, col)).collect()
    }

    fn chart_to_ambient(&self, w: &[Complex64]) -> CVec {
        let mut z = self.base.clone();
        for (col, wk) in self.frame.iter().zip(w) {
            for (zi, ci) in z.iter_mut().zip(col) {
                *zi += wk * ci;
            }
        }
        z
    }

    /// `ψ` at real chart coordinates `(w′, Re w_m)`.
    pub fn graph_height(&self, horizontal: &[f64]) -> Result<f64> {
        let dom = self.dom.as_ref().expect("chart carries its domain");
        graph_height(dom, self, horizontal)
    }

    /// `y(z) = Im w_m − ψ(w′, Re w_m)`.
    pub fn height(&self, z: &[Complex64]) -> Result<f64> {
        let w = self.to_chart(z);
        let m = w.len();
        let mut horizontal = numerics::to_real(&w[..m - 1]);
        horizontal.push(w[m - 1].re);
        Ok(w[m - 1].im - self.graph_height(&horizontal)?)
    }
}

fn graph_height(dom: &DomainSpec, chart: &LipschitzChart, horizontal: &[f64]) -> Result<f64> {
    let m = chart.frame.len();
    let mut w = numerics::from_real(&horizontal[..2 * (m - 1)]);
    let re = horizontal[2 * (m - 1)];
    let reach = 3.0 * chart.radius;
    let point = |im: f64, w: &mut CVec| {
        w.truncate(m - 1);
        w.push(c(re, im));
        chart.chart_to_ambient(w)
    };
    if dom.contains(&point(-reach, &mut w)) || !dom.contains(&point(reach, &mut w)) {
        return Err(Error::Numerical("boundary is not a graph over the chart".into()));
    }
    Ok(numerics::bisect_transition(|im| !dom.contains(&point(im, &mut w.clone())), -reach, reach, 1e-12))
}

/// Unitary frame whose last column is `−i n`.
fn frame_from_normal(n: &[Complex64]) -> Vec<CVec> {
    let m = n.len();
    let last = numerics::scale(n, c(0.0, -1.0));
    let mut cols: Vec<CVec> = vec![last.clone()];
    for k in 0..m {
        let mut e = numerics::basis(m, k);
        for col in &cols {
            let p = numerics::inner(&e, col);
            e = numerics::along(&e, -p, col);
        }
        if let Some(u) = numerics::normalized(&e) {
            if norm(&e) > 1e-6 {
                cols.push(u);
            }
        }
        if cols.len() == m {
            break;
        }
    }
    cols.remove(0);
    cols.push(last);
    cols
}

/// Fits a Lipschitz graph chart at a boundary point `p`. The inward normal is
/// `−∇ρ/|∇ρ|`, or the direction to the centroid of nearby interior points
/// where the gradient degenerates; a rotated frame is tried once if the
/// boundary is not a graph. The Lipschitz constant is the largest sampled
/// slope enlarged by 5%, and the sandwich `δ ≤ y ≤ C δ` is checked at
/// `checks` interior points.
pub fn lipschitz_chart_fit(dom: &DomainSpec, p: &[Complex64], radius: f64, checks: usize, seed: u64) -> Result<LipschitzChart> {
    let rho = dom.defining(p);
    if rho.abs() > 1e-10 {
        return Err(Error::NotOnBoundary { rho });
    }
    let m = dom.dim();
    let mut rng = numerics::seeded_rng(seed);
    let grad = dom.gradient(p);
    let normal = if norm(&grad) > 1e-6 {
        numerics::normalized(&numerics::scale(&grad, c(-1.0, 0.0))).expect("non-zero gradient")
    } else {
        let mut sum = vec![c(0.0, 0.0); m];
        let mut hits = 0;
        for _ in 0..20_000 {
            let z = numerics::random_in_ball(&mut rng, p, radius);
            if dom.contains(&z) {
                sum = numerics::add(&sum, &numerics::sub(&z, p));
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(Error::Numerical("no interior points near the chart base".into()));
        }
        numerics::normalized(&sum).ok_or_else(|| Error::Numerical("degenerate inward direction".into()))?
    };
    let attempts = [normal.clone(), {
        let tilt = numerics::random_unit(&mut rng, m);
        numerics::normalized(&numerics::along(&normal, c(0.1, 0.0), &tilt)).expect("non-zero")
    }];
    let mut last_err = None;
    for n in attempts {
        let mut chart = LipschitzChart {
            base: p.to_vec(),
            frame: frame_from_normal(&n),
            radius,
            graph: Vec::new(),
            lipschitz: 0.0,
            constant: 1.0,
            sandwich_passed: 0,
            sandwich_checked: 0,
            dom: Some(dom.clone()),
        };
        match fill_chart(dom, &mut chart, checks, &mut rng) {
            Ok(()) => return Ok(chart),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn fill_chart<R: Rng>(dom: &DomainSpec, chart: &mut LipschitzChart, checks: usize, rng: &mut R) -> Result<()> {
    let m = chart.frame.len();
    let dim = 2 * m - 1;
    let mut graph = vec![(vec![0.0; dim], graph_height(dom, chart, &vec![0.0; dim])?)];
    for _ in 0..200 {
        let h: Vec<f64> = (0..dim).map(|_| chart.radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let psi = graph_height(dom, chart, &h)?;
        graph.push((h, psi));
    }
    let mut lip: f64 = 0.0;
    for a in 0..graph.len() {
        for b in 0..a {
            let dist = graph[a].0.iter().zip(&graph[b].0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            if dist > 1e-9 {
                lip = lip.max((graph[a].1 - graph[b].1).abs() / dist);
            }
        }
    }
    chart.lipschitz = 1.05 * lip;
    chart.constant = (1.0 + chart.lipschitz.powi(2)).sqrt();
    chart.graph = graph;
    let mut passed = 0;
    let cfg = DistanceConfig::default();
    for _ in 0..checks {
        let h: Vec<f64> = (0..dim).map(|_| 0.25 * chart.radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let psi = graph_height(dom, chart, &h)?;
        let y = 0.25 * chart.radius * rng.random::<f64>().max(1e-3);
        let mut w = numerics::from_real(&h[..2 * (m - 1)]);
        w.push(c(h[2 * (m - 1)], psi + y));
        let z = chart.chart_to_ambient(&w);
        if !dom.contains(&z) {
            continue;
        }
        let delta = nearest_boundary(dom, &z, &cfg)?.distance;
        let tol = 1e-7;
        if delta <= y + tol && y <= chart.constant * delta + tol {
            passed += 1;
        }
        chart.sandwich_checked += 1;
    }
    chart.sandwich_passed = passed;
    Ok(())
}

/// Interior cone condition found by [`cone_probe`].
#[derive(Debug, Clone, Serialize)]
pub struct ConeCondition {
    /// Full opening angle, the minimum over samples.
    pub aperture: f64,
    pub reach: f64,
    /// Samples within this distance of the boundary were probed; deeper
    /// points form the exceptional compact set.
    pub layer_depth: f64,
    /// `(sample, nearest boundary point, aperture found there)`.
    pub per_sample: Vec<(CVec, CVec, f64)>,
}

/// Tuning for [`cone_probe`].
#[derive(Debug, Clone, Copy)]
pub struct ConeConfig {
    pub reach: f64,
    pub membership_samples: usize,
    pub bisection_steps: usize,
    pub seed: u64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        ConeConfig { reach: 0.05, membership_samples: 200, bisection_steps: 24, seed: 0xc0e }
    }
}

/// Largest aperture `θ` such that the truncated cone with apex at the
/// nearest boundary point, axis towards the sample and length `reach` lies
/// in the domain (membership sampling), minimised over samples.
pub fn cone_probe(dom: &DomainSpec, samples: &[CVec], cfg: &ConeConfig) -> Result<ConeCondition> {
    let mut per_sample = Vec::with_capacity(samples.len());
    let mut layer: f64 = 0.0;
    let dcfg = DistanceConfig::default();
    for z in samples {
        let hit = nearest_boundary(dom, z, &dcfg)?;
        layer = layer.max(hit.distance);
        let axis = numerics::scale(&hit.direction, c(-1.0, 0.0));
        let axis_r = numerics::to_real(&axis);
        let mut rng = numerics::seeded_rng(cfg.seed);
        let offsets: Vec<(f64, f64, Vec<f64>)> = (0..cfg.membership_samples)
            .map(|k| {
                let mut perp = numerics::to_real(&numerics::random_unit(&mut rng, dom.dim()));
                let d: f64 = perp.iter().zip(&axis_r).map(|(a, b)| a * b).sum();
                for (p, a) in perp.iter_mut().zip(&axis_r) {
                    *p -= d * a;
                }
                let len = perp.iter().map(|x| x * x).sum::<f64>().sqrt();
                perp.iter_mut().for_each(|x| *x /= len);
                let frac = if k % 2 == 0 { 1.0 } else { rng.random::<f64>() };
                let s = cfg.reach * (0.01 + 0.99 * rng.random::<f64>());
                (frac, s, perp)
            })
            .collect();
        let apex = &hit.point;
        let inside = |theta: f64| {
            offsets.iter().all(|(frac, s, perp)| {
                let phi = 0.5 * theta * frac;
                let dir: Vec<f64> = axis_r.iter().zip(perp).map(|(a, p)| phi.cos() * a + phi.sin() * p).collect();
                let w = numerics::along(apex, c(*s, 0.0), &numerics::from_real(&dir));
                dom.contains(&w)
            })
        };
        let theta = if !inside(0.0) {
            0.0
        } else if inside(std::f64::consts::PI) {
            std::f64::consts::PI
        } else {
            let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
            for _ in 0..cfg.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if inside(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if theta == 0.0 {
            return Err(Error::Numerical(format!("no interior cone found at sample {z:?}")));
        }
        per_sample.push((z.clone(), hit.point.clone(), theta));
    }
    let aperture = per_sample.iter().map(|s| s.2).fold(std::f64::consts::PI, f64::min);
    Ok(ConeCondition { aperture, reach: cfg.reach, layer_depth: layer, per_sample })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_are_holomorphic_and_jacobians_agree() {
        let f = HoloMap::sqrt_lift();
        let z = [c(0.1, -0.05), c(0.02, 0.4)];
        assert!(f.cauchy_riemann_residual(&z) < 1e-8);
        let analytic = f.jacobian(&z).unwrap();
        let numeric = HoloMap::new("numeric", 2, 3, f.map.clone()).jacobian(&z).unwrap();
        assert!((analytic - numeric).iter().all(|e| e.norm() < 1e-9));
        let w = f.eval(&z).unwrap();
        assert!((w[0] * w[0] - (z[0] + 1.0)).norm() < 1e-14 && w[0].re > 0.0);
        assert!(matches!(make_map("nope", 2), Err(Error::UnknownMap(_))));
        assert_eq!(make_map("example25", 2).unwrap().name(), "sqrt_lift");
    }

    #[test]
    fn identity_and_constant_properness() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let seq: Vec<CVec> = (1..=10).map(|k| vec![c(1.0 - 2f64.powi(-k), 0.0), c(0.0, 0.0)]).collect();
        let rows = properness_probe(&HoloMap::identity(2), &ball, &ball, std::slice::from_ref(&seq)).unwrap();
        assert!(rows[0].decays);
        assert!(rows[0].table.iter().all(|(a, b)| (a - b).abs() < 1e-8));
        let constant = HoloMap::constant(2, vec![c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(!properness_probe(&constant, &ball, &ball, &[seq]).unwrap()[0].decays);
    }

    #[test]
    fn sqrt_lift_is_proper_along_both_sequences() {
        let rows = properness_probe(&HoloMap::sqrt_lift(), &DomainSpec::cone_source(), &DomainSpec::cone_target(), &cone_source_sequences(10)).unwrap();
        assert!(rows.iter().all(|r| r.decays), "{rows:?}");
    }

    #[test]
    fn hopf_fit_on_the_ball() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let train = boundary_layer_samples(&ball, 60, 1e-4, 0.3, 1).unwrap();
        let hold = boundary_layer_samples(&ball, 60, 1e-4, 0.3, 2).unwrap();
        let rho = |z: &[Complex64]| norm(z).powi(2) - 1.0;
        let fit = hopf_fit(&rho, &ball, &train, &hold, 0.5).unwrap();
        assert!((fit.alpha_raw - 1.0).abs() < 0.05 && fit.alpha_hopf >= 1.0);
        assert!((1.0..=2.0).contains(&fit.c0_fit), "{fit:?}");
        assert_eq!(fit.pass_rate, 1.0);
        let dist = |z: &[Complex64]| -(1.0 - norm(z));
        let fit = hopf_fit(&dist, &ball, &train, &hold, 0.5).unwrap();
        assert!((fit.alpha_raw - 1.0).abs() < 1e-6 && (fit.c0_fit - 1.0).abs() < 1e-5);
    }

    #[test]
    fn identity_chain_on_the_ball() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let train = boundary_layer_samples(&ball, 40, 1e-4, 0.3, 3).unwrap();
        let hold = boundary_layer_samples(&ball, 40, 1e-4, 0.3, 4).unwrap();
        let dist = |z: &[Complex64]| -(1.0 - norm(z));
        let hopf = hopf_fit(&dist, &ball, &train, &hold, 1.0).unwrap();
        let chain = exponent_chain(&HoloMap::identity(2), &ball, &ball, &dist, 0.3, &hopf, &train, &hold, 1.0, 1.0).unwrap();
        assert!((chain.constants.s0 - 1.0).abs() < 1e-6);
        assert!((chain.constants.s_star - 1.0).abs() < 1e-6);
        assert!((chain.constants.c1 - 1.0).abs() < 1e-5);
        assert_eq!(chain.validation.pass_rate, 1.0);
    }

    #[test]
    fn disc_into_ball_has_unit_distance_exponent() {
        let disc = DomainSpec::ball(1, 1.0).unwrap();
        let ball = DomainSpec::ball(3, 1.0).unwrap();
        let train = boundary_layer_samples(&disc, 40, 1e-4, 0.3, 5).unwrap();
        let hold = boundary_layer_samples(&disc, 40, 1e-4, 0.3, 6).unwrap();
        let dist_ball = |w: &[Complex64]| -(1.0 - norm(w));
        let hopf = HopfFit { alpha_raw: 1.0, alpha_hopf: 1.0, c0_fit: 1.0, c0: 1.0, training: 0, validation: 0, pass_rate: 1.0 };
        let chain = exponent_chain(&HoloMap::disc_embedding(3), &disc, &ball, &dist_ball, 0.3, &hopf, &train, &hold, 1.0, 2.0).unwrap();
        assert!((chain.constants.s_star - 1.0).abs() < 1e-6);
    }

    #[test]
    fn extension_of_polynomial_map_is_evaluation() {
        let map = HoloMap::squares(2);
        let xi = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let v0 = numerics::scale(&xi, c(-1.0, 0.0));
        for t in [0.05, 0.1] {
            let ext = boundary_extend(&map, &xi, &v0, t, 0.5).unwrap();
            let direct = map.eval(&xi).unwrap();
            assert!(ext.value.iter().zip(&direct).all(|(a, b)| (a - b).norm() < 1e-10));
        }
    }

    #[test]
    fn extension_rejects_non_integrable_derivative() {
        let map = HoloMap::new("log", 1, 1, Arc::new(|z| vec![z[0].ln()]))
            .with_jacobian(Arc::new(|z| DMatrix::from_element(1, 1, 1.0 / z[0])));
        assert!(boundary_extend(&map, &[c(0.0, 0.0)], &[c(1.0, 0.0)], 0.1, 0.5).is_err());
        let inverse = HoloMap::new("inv", 1, 1, Arc::new(|z| vec![1.0 / z[0]]))
            .with_jacobian(Arc::new(|z| DMatrix::from_element(1, 1, -1.0 / (z[0] * z[0]))));
        assert!(boundary_extend(&inverse, &[c(0.0, 0.0)], &[c(1.0, 0.0)], 0.1, 0.5).is_err());
    }

    #[test]
    fn kappa_is_the_power_integral_inverse() {
        let k = kappa_for(0.3, 2.0, 0.5).unwrap();
        assert!((2.0 * 2.0 * k.sqrt() - 0.1).abs() < 1e-14);
        let doubled = kappa_for(0.3, 4.0, 0.5).unwrap();
        assert!((doubled.powf(0.5) - 0.5 * k.powf(0.5)).abs() < 1e-15);
        assert!(kappa_for(0.3, 2.0, 1.0).is_err());
    }

    #[test]
    fn chart_of_a_half_space_model_is_flat() {
        let rho: crate::domains::DefiningFn = Arc::new(|z| (-z[1].im).max(norm(z) - 10.0));
        let dom = DomainSpec::custom("half_ball", 2, rho, Default::default(), vec![c(0.0, 0.0), c(0.0, 1.0)], 11.0).unwrap();
        let chart = lipschitz_chart_fit(&dom, &[c(0.0, 0.0), c(0.0, 0.0)], 0.2, 20, 1).unwrap();
        assert!(chart.lipschitz < 1e-6 && (chart.constant - 1.0).abs() < 1e-9);
        assert!(chart.graph.iter().all(|(_, psi)| psi.abs() < 1e-9));
        assert_eq!(chart.sandwich_passed, chart.sandwich_checked);
    }

    #[test]
    fn ball_cone_is_nearly_flat() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let samples = boundary_layer_samples(&ball, 6, 1e-3, 1e-2, 9).unwrap();
        let cone = cone_probe(&ball, &samples, &ConeConfig { reach: 0.01, ..Default::default() }).unwrap();
        assert!(cone.aperture > 0.9 * std::f64::consts::PI, "{}", cone.aperture);
    }
}
