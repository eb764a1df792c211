//! Complex Hessians, pullback fields and Monge–Ampère densities, together
//! with the homogeneous complex Monge–Ampère Dirichlet problem for
//! Reinhardt data in C².
//!
//! For a Reinhardt domain in C² and rotation-invariant data, the maximal
//! plurisubharmonic extension is `u(z) = U(log|z_1|, log|z_2|)` where `U` is
//! the largest convex, coordinatewise nondecreasing function lying below the
//! data on the boundary of the logarithmic image. [`reinhardt_envelope_solve`]
//! computes `U` as a Legendre–Fenchel biconjugate over nonnegative slopes.
//! [`perron_oracle`] is an independent brute-force solver enforcing the
//! sub-mean-value property on sampled complex discs.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::domains::{first_exit, DomainSpec};
use crate::error::{Error, Result};
use crate::mappings::HoloMap;
use crate::numerics::{self, c, golden_max, halton_point, norm, CVec};

/// Default finite-difference step for complex Hessians.
pub const HESSIAN_STEP: f64 = 1e-3;

/// Complex Hessian `∂²u/∂z_j∂z̄_k` by central differences of the real
/// Hessian, `O(h²)` accurate for smooth `u`.
pub fn complex_hessian(u: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h: f64) -> DMatrix<Complex64> {
    let x = numerics::to_real(z);
    let d = x.len();
    let f = |y: &[f64]| u(&numerics::from_real(y));
    let f0 = f(&x);
    let mut real = DMatrix::<f64>::zeros(d, d);
    let mut y = x.clone();
    for a in 0..d {
        y[a] = x[a] + h;
        let fp = f(&y);
        y[a] = x[a] - h;
        let fm = f(&y);
        y[a] = x[a];
        real[(a, a)] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in 0..a {
            let mut corner = |sa: f64, sb: f64| {
                y[a] = x[a] + sa * h;
                y[b] = x[b] + sb * h;
                let v = f(&y);
                y[a] = x[a];
                y[b] = x[b];
                v
            };
            let mixed = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h * h);
            real[(a, b)] = mixed;
            real[(b, a)] = mixed;
        }
    }
    let n = z.len();
    DMatrix::from_fn(n, n, |j, k| {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        c(real[(xj, xk)] + real[(yj, yk)], real[(xj, yk)] - real[(yj, xk)]) * 0.25
    })
}

/// Richardson-extrapolated complex Hessian and the gap between the steps
/// `h` and `h/2`.
#[derive(Debug, Clone)]
pub struct HessianEstimate {
    pub matrix: DMatrix<Complex64>,
    pub richardson_gap: f64,
}

pub fn complex_hessian_checked(u: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h: f64) -> HessianEstimate {
    let coarse = complex_hessian(u, z, h);
    let fine = complex_hessian(u, z, 0.5 * h);
    let richardson_gap = (&fine - &coarse).iter().map(|e| e.norm()).fold(0.0, f64::max);
    HessianEstimate { matrix: (fine * c(4.0, 0.0) - coarse) / c(3.0, 0.0), richardson_gap }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &DMatrix<Complex64>) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Monge–Ampère density `m!·det(a)` of a Hermitian coefficient matrix, in
/// the normalisation where `u = ∥z∥²` has density `m!`.
pub fn ma_density(a: &DMatrix<Complex64>) -> f64 {
    factorial(a.nrows()) * a.determinant().re
}

/// Evaluable Hermitian matrix field.
pub type MatrixFn = Arc<dyn Fn(&[Complex64]) -> DMatrix<Complex64> + Send + Sync>;

/// Hermitian coefficient field `b_{μν̄}(w)` with a claimed essential bound.
#[derive(Clone)]
pub struct HermitianField {
    pub n: usize,
    pub entries: MatrixFn,
    pub essential_bound: f64,
    /// Where the field is defined; `None` for all of C^n.
    pub domain: Option<DomainSpec>,
}

/// Result of [`HermitianField::check`].
#[derive(Debug, Clone, Serialize)]
pub struct FieldReport {
    pub max_asymmetry: f64,
    pub max_entry: f64,
    pub ok: bool,
}

impl HermitianField {
    pub fn new(n: usize, entries: MatrixFn, essential_bound: f64) -> Self {
        HermitianField { n, entries, essential_bound, domain: None }
    }

    pub fn on(mut self, dom: DomainSpec) -> Self {
        self.domain = Some(dom);
        self
    }

    /// Constant identity field.
    pub fn identity(n: usize) -> Self {
        Self::new(n, Arc::new(move |_| DMatrix::identity(n, n)), 1.0)
    }

    /// Field of complex Hessians of a real potential.
    pub fn from_potential(n: usize, u: crate::kobayashi::RealFn, essential_bound: f64) -> Self {
        Self::new(n, Arc::new(move |w| complex_hessian_checked(&*u, w, HESSIAN_STEP).matrix), essential_bound)
    }

    /// Closed-form Levi form of the defining function of `example_Omega`:
    /// `diag(4|w_1|², 1 − sgn(Im w_2)/2 + 3(Im w_2)², 1)`.
    pub fn cone_target_levi() -> Self {
        let dom = DomainSpec::cone_target();
        Self::new(
            3,
            Arc::new(|w| {
                let v = w[1].im;
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    c(4.0 * w[0].norm_sqr(), 0.0),
                    c(1.0 - 0.5 * v.signum() + 3.0 * v * v, 0.0),
                    c(1.0, 0.0),
                ]))
            }),
            8.0,
        )
        .on(dom)
    }

    pub fn at(&self, w: &[Complex64]) -> Result<DMatrix<Complex64>> {
        if w.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: w.len() });
        }
        if let Some(dom) = &self.domain {
            let r = dom.defining(w);
            if !(r < 0.0) {
                return Err(Error::NotInterior { rho: r });
            }
        }
        Ok((self.entries)(w))
    }

    pub fn check(&self, points: &[CVec]) -> FieldReport {
        let mut max_asymmetry: f64 = 0.0;
        let mut max_entry: f64 = 0.0;
        for w in points {
            let b = (self.entries)(w);
            max_asymmetry = max_asymmetry.max((&b - b.adjoint()).iter().map(|e| e.norm()).fold(0.0, f64::max));
            max_entry = max_entry.max(b.iter().map(|e| e.norm()).fold(0.0, f64::max));
        }
        FieldReport { max_asymmetry, max_entry, ok: max_asymmetry <= 1e-10 && max_entry <= self.essential_bound }
    }
}

/// Pullback coefficients `a_{jk̄}(z) = Σ b_{μν̄}(F(z)) ∂F_μ/∂z_j conj(∂F_ν/∂z_k)`.
pub fn pullback_field(map: &HoloMap, b: &HermitianField, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
    if b.n != map.target_dim() {
        return Err(Error::DimensionMismatch { expected: map.target_dim(), found: b.n });
    }
    let w = map.eval(z)?;
    let bw = b.at(&w)?;
    let jac = map.jacobian(z)?;
    Ok(jac.transpose() * bw * jac.map(|e| e.conj()))
}

/// Pullback of a Hermitian field through a holomorphic map, with the
/// integrability exponent carried along for the L^p hypothesis.
#[derive(Clone)]
pub struct PullbackField {
    pub map: HoloMap,
    pub field: HermitianField,
    pub exponent: f64,
}

impl PullbackField {
    pub fn coefficients(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
        pullback_field(&self.map, &self.field, z)
    }

    pub fn density(&self, z: &[Complex64]) -> Result<f64> {
        Ok(ma_density(&self.coefficients(z)?))
    }
}

/// Two-level estimate of `(∫_Ω |g|^p dm)^{1/p}`.
#[derive(Debug, Clone, Serialize)]
pub struct LpEstimate {
    pub p: f64,
    /// Estimate with the requested budget.
    pub coarse: f64,
    /// Estimate with four times the budget.
    pub fine: f64,
    /// `fine / coarse` (1 when both vanish).
    pub ratio: f64,
    pub volume: f64,
    pub nonfinite_fraction: f64,
}

impl LpEstimate {
    pub fn value(&self) -> f64 {
        self.fine
    }

    pub fn is_stable(&self) -> bool {
        (0.8..=1.25).contains(&self.ratio)
    }
}

/// Stratified quasi-Monte Carlo estimate of the L^p norm of `g` on a
/// domain. The bounding box is split into cells filled with shifted Halton
/// points; cells whose samples straddle the boundary receive as many extra
/// samples again.
pub fn lp_norm_estimate(g: &dyn Fn(&[Complex64]) -> f64, dom: &DomainSpec, p: f64, budget: usize, seed: u64) -> Result<LpEstimate> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be at least 1, got {p}")));
    }
    if budget < 1000 {
        return Err(Error::InvalidArgument(format!("budget must be at least 1000, got {budget}")));
    }
    let coarse = stratified_integral(g, dom, p, budget, seed)?;
    let fine = stratified_integral(g, dom, p, 4 * budget, seed.wrapping_add(1))?;
    let norm_of = |s: f64| s.max(0.0).powf(1.0 / p);
    let (cn, fn_) = (norm_of(coarse.0), norm_of(fine.0));
    let ratio = if cn == 0.0 && fn_ == 0.0 { 1.0 } else { fn_ / cn };
    Ok(LpEstimate { p, coarse: cn, fine: fn_, ratio, volume: fine.1, nonfinite_fraction: fine.2.max(coarse.2) })
}

/// Returns `(∫|g|^p, volume, non-finite fraction)`.
fn stratified_integral(g: &dyn Fn(&[Complex64]) -> f64, dom: &DomainSpec, p: f64, budget: usize, seed: u64) -> Result<(f64, f64, f64)> {
    use rand::Rng;
    let bbox = dom.bounding_box();
    let d = bbox.len();
    let per_axis: usize = if d >= 4 { 2 } else { 4 };
    let cells = per_axis.pow(d as u32);
    let mut rng = numerics::seeded_rng(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let cell_width: Vec<f64> = bbox.iter().map(|(lo, hi)| (hi - lo) / per_axis as f64).collect();
    let cell_volume: f64 = cell_width.iter().product();
    let first = (budget / 2 / cells).max(1);
    let mut total_samples = 0usize;
    let mut nonfinite = 0usize;
    struct Cell {
        origin: Vec<f64>,
        sum: f64,
        hits: usize,
        count: usize,
        next: u64,
    }
    let mut state: Vec<Cell> = (0..cells)
        .map(|idx| {
            let mut rem = idx;
            let origin = (0..d)
                .map(|a| {
                    let k = rem % per_axis;
                    rem /= per_axis;
                    bbox[a].0 + k as f64 * cell_width[a]
                })
                .collect();
            Cell { origin, sum: 0.0, hits: 0, count: 0, next: 0 }
        })
        .collect();
    let draw = |cell: &mut Cell, k: usize, total: &mut usize, bad: &mut usize| {
        for _ in 0..k {
            let u = halton_point(cell.next, d, &shift);
            cell.next += 1;
            let x: Vec<f64> = (0..d).map(|a| cell.origin[a] + u[a] * cell_width[a]).collect();
            let z = numerics::from_real(&x);
            *total += 1;
            cell.count += 1;
            if dom.contains(&z) {
                cell.hits += 1;
                let v = g(&z).abs().powf(p);
                if v.is_finite() {
                    cell.sum += v;
                } else {
                    *bad += 1;
                }
            }
        }
    };
    for cell in state.iter_mut() {
        draw(cell, first, &mut total_samples, &mut nonfinite);
    }
    let mixed: Vec<usize> = (0..cells).filter(|&k| state[k].hits > 0 && state[k].hits < state[k].count).collect();
    let targets: Vec<usize> = if mixed.is_empty() { (0..cells).collect() } else { mixed };
    let extra = (budget.saturating_sub(total_samples) / targets.len()).max(1);
    for k in targets {
        draw(&mut state[k], extra, &mut total_samples, &mut nonfinite);
    }
    let fraction = nonfinite as f64 / total_samples as f64;
    if fraction > 1e-6 {
        return Err(Error::Numerical(format!("{nonfinite} non-finite integrand samples out of {total_samples}")));
    }
    let integral = state.iter().map(|s| cell_volume * s.sum / s.count as f64).sum();
    let volume = state.iter().map(|s| cell_volume * s.hits as f64 / s.count as f64).sum();
    Ok((integral, volume, fraction))
}

/// Boundary data `g` on C^n.
pub type BoundaryData = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

/// `−2∥z∥²`, the data of the canonical function.
pub fn canonical_data() -> BoundaryData {
    Arc::new(|z| -2.0 * z.iter().map(|w| w.norm_sqr()).sum::<f64>())
}

/// Largest rotation defect `|g(z) − g(e^{iθ}z)|` over sampled boundary points.
pub fn rotation_defect(dom: &DomainSpec, g: &BoundaryData, samples: usize, seed: u64) -> Result<f64> {
    use rand::Rng;
    let mut rng = numerics::seeded_rng(seed);
    let pts = dom.sample_boundary(&mut rng, samples)?;
    let mut defect: f64 = 0.0;
    for z in pts {
        let rotated: CVec = z.iter().map(|w| w * Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>())).collect();
        defect = defect.max((g(&z) - g(&rotated)).abs());
    }
    Ok(defect)
}

/// Tuning for [`reinhardt_envelope_solve`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeConfig {
    /// Log-grid spacing.
    pub spacing: f64,
    /// Grid covers `[−x_max, x_max_top]` per axis, truncated at the domain.
    pub x_max: f64,
    /// Nonzero slopes per axis, geometric between `slope_min` and `slope_max`.
    pub slopes_per_axis: usize,
    pub slope_min: f64,
    pub slope_max: f64,
    /// Boundary samples per family (fixed `x_1`, fixed `x_2`, angular).
    pub boundary_per_family: usize,
    /// Dyadic radii `2^{-k}`, `k = 1..=modulus_levels`, of the modulus table.
    pub modulus_levels: u32,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            spacing: 0.1,
            x_max: 12.0,
            slopes_per_axis: 160,
            slope_min: 1e-3,
            slope_max: 1e4,
            boundary_per_family: 300,
            modulus_levels: 12,
        }
    }
}

impl EnvelopeConfig {
    /// Cheap settings for sweeps and property tests.
    pub fn coarse() -> Self {
        EnvelopeConfig { spacing: 0.5, slopes_per_axis: 48, boundary_per_family: 80, modulus_levels: 6, ..Default::default() }
    }
}

/// Boundary sample in log coordinates; `−∞` marks a point on a coordinate
/// axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogSample {
    pub x: [f64; 2],
    pub value: f64,
}

/// `a·x` with the convention `0·(−∞) = 0`.
fn pairing(a: [f64; 2], x: [f64; 2]) -> f64 {
    let term = |s: f64, t: f64| if s == 0.0 { 0.0 } else { s * t };
    term(a[0], x[0]) + term(a[1], x[1])
}

/// Homogeneous Monge–Ampère solution for Reinhardt data in log coordinates.
#[derive(Clone)]
pub struct EnvelopeSolution {
    dom: DomainSpec,
    data: BoundaryData,
    /// Grid abscissae shared by both axes.
    pub axis: Vec<f64>,
    /// `U` at `(axis[i], axis[j])`, row-major in `i`; NaN outside the log image.
    pub values: Vec<f64>,
    pub spacing: f64,
    pub boundary: Vec<LogSample>,
    slopes: Vec<f64>,
    conjugate: Vec<f64>,
    /// `(r, ω̂(r))` estimated modulus of continuity.
    pub modulus: Vec<(f64, f64)>,
}

impl std::fmt::Debug for EnvelopeSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnvelopeSolution")
            .field("domain", &self.dom.name())
            .field("grid", &self.axis.len())
            .field("boundary", &self.boundary.len())
            .finish()
    }
}

/// Sampled invariants of an [`EnvelopeSolution`].
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    /// `max (U − g)` over boundary samples (must be ≤ 0).
    pub max_data_excess: f64,
    /// Smallest discrete second difference along grid lines.
    pub min_second_difference: f64,
    /// Smallest forward difference along grid lines.
    pub min_forward_difference: f64,
    pub ok: bool,
}

impl EnvelopeSolution {
    pub fn domain(&self) -> &DomainSpec {
        &self.dom
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    fn conjugate_at(&self, a: [f64; 2]) -> f64 {
        self.boundary.iter().map(|b| pairing(a, b.x) - b.value).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Coarse value: maximum over the tabulated slopes.
    pub fn eval_log_coarse(&self, x: [f64; 2]) -> f64 {
        self.coarse_argmax(x).2
    }

    fn coarse_argmax(&self, x: [f64; 2]) -> (usize, usize, f64) {
        let k = self.slopes.len();
        let mut best = (0, 0, f64::NEG_INFINITY);
        for i in 0..k {
            let ti = if self.slopes[i] == 0.0 { 0.0 } else { self.slopes[i] * x[0] };
            if ti == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..k {
                let tj = if self.slopes[j] == 0.0 { 0.0 } else { self.slopes[j] * x[1] };
                let v = ti + tj - self.conjugate[i * k + j];
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        best
    }

    /// `U(x)`: the coarse maximiser refined by nested golden section over the
    /// neighbouring slope box.
    pub fn eval_log(&self, x: [f64; 2]) -> f64 {
        let (i, j, coarse) = self.coarse_argmax(x);
        let k = self.slopes.len();
        let bracket = |m: usize, coord: f64| -> (f64, f64) {
            if coord == f64::NEG_INFINITY {
                (0.0, 0.0)
            } else {
                (self.slopes[m.saturating_sub(1)], self.slopes[(m + 1).min(k - 1)])
            }
        };
        let (a_lo, a_hi) = bracket(i, x[0]);
        let (b_lo, b_hi) = bracket(j, x[1]);
        let objective = |a: f64, b: f64| pairing([a, b], x) - self.conjugate_at([a, b]);
        let inner = |a: f64| if b_hi > b_lo { golden_max(|b| objective(a, b), b_lo, b_hi, 1e-10 * b_hi.max(1.0)).1 } else { objective(a, b_lo) };
        let refined = if a_hi > a_lo { golden_max(inner, a_lo, a_hi, 1e-10 * a_hi.max(1.0)).1 } else { inner(a_lo) };
        coarse.max(refined)
    }

    /// `u(z) = U(log|z_1|, log|z_2|)`.
    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.eval_log([z[0].norm().ln(), z[1].norm().ln()])
    }

    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis.len() + j]
    }

    pub fn check_invariants(&self) -> EnvelopeReport {
        let max_data_excess = self
            .boundary
            .iter()
            .map(|b| self.eval_log_coarse(b.x) - b.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let m = self.axis.len();
        let mut min_second: f64 = f64::INFINITY;
        let mut min_forward: f64 = f64::INFINITY;
        for i in 0..m {
            for j in 0..m {
                let here = self.value_at(i, j);
                if here.is_nan() {
                    continue;
                }
                for (di, dj) in [(1usize, 0usize), (0, 1)] {
                    if i + di < m && j + dj < m {
                        let next = self.value_at(i + di, j + dj);
                        if !next.is_nan() {
                            min_forward = min_forward.min(next - here);
                        }
                        if i >= di && j >= dj {
                            let prev = self.value_at(i - di, j - dj);
                            if !next.is_nan() && !prev.is_nan() {
                                min_second = min_second.min(next - 2.0 * here + prev);
                            }
                        }
                    }
                }
            }
        }
        let tol = 1e-9;
        EnvelopeReport {
            max_data_excess,
            min_second_difference: min_second,
            min_forward_difference: min_forward,
            ok: max_data_excess <= tol && min_second >= -tol && min_forward >= -tol,
        }
    }

    /// CSV with columns `x1, x2, U` over interior grid nodes.
    pub fn write_csv_log<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x1", "x2", "U"])?;
        for (i, x1) in self.axis.iter().enumerate() {
            for (j, x2) in self.axis.iter().enumerate() {
                let v = self.value_at(i, j);
                if !v.is_nan() {
                    out.write_record([x1.to_string(), x2.to_string(), v.to_string()])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// CSV with columns `abs_z1, abs_z2, u` over interior grid nodes.
    pub fn write_csv_moduli<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["abs_z1", "abs_z2", "u"])?;
        for (i, x1) in self.axis.iter().enumerate() {
            for (j, x2) in self.axis.iter().enumerate() {
                let v = self.value_at(i, j);
                if !v.is_nan() {
                    out.write_record([x1.exp().to_string(), x2.exp().to_string(), v.to_string()])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Estimated modulus of continuity as a tabulated modulus.
    pub fn modulus_of_continuity(&self) -> Result<crate::kobayashi::ModulusOfContinuity> {
        let (radii, values): (Vec<f64>, Vec<f64>) = self.modulus.iter().cloned().unzip();
        crate::kobayashi::ModulusOfContinuity::tabulated(radii, values)
    }
}

fn require_reinhardt_pair(dom: &DomainSpec) -> Result<()> {
    if !dom.flags().reinhardt || dom.dim() != 2 {
        return Err(Error::NotReinhardt(dom.name().to_string()));
    }
    Ok(())
}

/// Boundary samples of the log image: axis points, graded fixed-`x_1` and
/// fixed-`x_2` families, and rays from the origin in the modulus quadrant.
fn log_boundary_samples(dom: &DomainSpec, g: &BoundaryData, per_family: usize) -> Result<Vec<LogSample>> {
    let tol = 1e-12;
    let zero = [c(0.0, 0.0), c(0.0, 0.0)];
    let axis_exit = |k: usize| first_exit(dom, &zero, &numerics::basis(2, k), tol);
    let ends = [axis_exit(0)?, axis_exit(1)?];
    let mut out = Vec::new();
    let push = |t: [f64; 2], out: &mut Vec<LogSample>| {
        let z = [c(t[0], 0.0), c(t[1], 0.0)];
        out.push(LogSample { x: [t[0].ln(), t[1].ln()], value: g(&z) });
    };
    push([ends[0], 0.0], &mut out);
    push([0.0, ends[1]], &mut out);
    let depth = 40.0;
    for fixed in 0..2 {
        let free = 1 - fixed;
        let top = ends[fixed].ln();
        let half = per_family / 2;
        let mut levels: Vec<f64> = (0..half).map(|k| top - depth * (k as f64 + 0.5) / half as f64).collect();
        levels.extend((0..per_family - half).map(|k| top - 10f64.powf(-12.0 + 11.0 * k as f64 / (per_family - half) as f64)));
        for x in levels {
            let mut base = [c(0.0, 0.0), c(0.0, 0.0)];
            base[fixed] = c(x.exp(), 0.0);
            if !dom.contains(&base) {
                continue;
            }
            let t = first_exit(dom, &base, &numerics::basis(2, free), tol)?;
            let mut moduli = [0.0, 0.0];
            moduli[fixed] = x.exp();
            moduli[free] = t;
            push(moduli, &mut out);
        }
    }
    for k in 0..per_family {
        let s = (k as f64 + 0.5) / per_family as f64;
        let angle = std::f64::consts::FRAC_PI_2 * s;
        let dir = [c(angle.cos(), 0.0), c(angle.sin(), 0.0)];
        let t = first_exit(dom, &zero, &dir, tol)?;
        push([t * angle.cos(), t * angle.sin()], &mut out);
    }
    Ok(out)
}

/// Solves the homogeneous Monge–Ampère problem for rotation-invariant data on
/// a Reinhardt domain in C² containing its coordinate axes' slices.
///
/// `U(x) = max_{a ≥ 0} (a·x − g*(a))` with `g*(a) = max_b (a·b − g(b))` over
/// boundary samples `b` of the log image: the largest convex nondecreasing
/// function below the sampled data. The slope set is `{0}` together with a
/// geometric range; grid values use the tabulated slopes, point values are
/// refined.
pub fn reinhardt_envelope_solve(dom: &DomainSpec, g: BoundaryData, cfg: &EnvelopeConfig) -> Result<EnvelopeSolution> {
    require_reinhardt_pair(dom)?;
    let defect = rotation_defect(dom, &g, 64, 0x0dd)?;
    if defect > 1e-10 {
        return Err(Error::NonInvariantData(defect));
    }
    let boundary = log_boundary_samples(dom, &g, cfg.boundary_per_family)?;
    let mut slopes = vec![0.0];
    let k = cfg.slopes_per_axis.max(2);
    let ratio = (cfg.slope_max / cfg.slope_min).ln() / (k - 1) as f64;
    slopes.extend((0..k).map(|i| cfg.slope_min * (ratio * i as f64).exp()));
    let ns = slopes.len();
    let mut conjugate = vec![0.0; ns * ns];
    for i in 0..ns {
        for j in 0..ns {
            conjugate[i * ns + j] = boundary.iter().map(|b| pairing([slopes[i], slopes[j]], b.x) - b.value).fold(f64::NEG_INFINITY, f64::max);
        }
    }
    let top = [dom.bounding_box()[0].1.abs().max(dom.bounding_box()[0].0.abs()), dom.bounding_box()[2].1.abs().max(dom.bounding_box()[2].0.abs())];
    let x_top = top[0].max(top[1]).ln();
    let count = ((x_top + cfg.x_max) / cfg.spacing).floor() as usize + 1;
    let axis: Vec<f64> = (0..count).map(|i| -cfg.x_max + i as f64 * cfg.spacing).collect();
    let mut sol = EnvelopeSolution { dom: dom.clone(), data: g, axis, values: Vec::new(), spacing: cfg.spacing, boundary, slopes, conjugate, modulus: Vec::new() };
    let m = sol.axis.len();
    let mut values = vec![f64::NAN; m * m];
    for i in 0..m {
        for j in 0..m {
            let z = [c(sol.axis[i].exp(), 0.0), c(sol.axis[j].exp(), 0.0)];
            if dom.contains(&z) {
                values[i * m + j] = sol.eval_log_coarse([sol.axis[i], sol.axis[j]]);
            }
        }
    }
    sol.values = values;
    sol.modulus = estimate_modulus(&sol, cfg.modulus_levels);
    Ok(sol)
}

/// `ω̂(r)`: largest deviation `|u(z) − g(ξ)|` over anchors `ξ` on the
/// boundary and moves of length `r` into the domain, made nondecreasing.
fn estimate_modulus(sol: &EnvelopeSolution, levels: u32) -> Vec<(f64, f64)> {
    let finite: Vec<&LogSample> = sol.boundary.iter().collect();
    let stride = (finite.len() / 32).max(1);
    let anchors: Vec<&LogSample> = finite.iter().step_by(stride).cloned().collect();
    let mut table: Vec<(f64, f64)> = (1..=levels)
        .rev()
        .map(|k| {
            let r = 2f64.powi(-(k as i32));
            let mut worst: f64 = 0.0;
            for b in &anchors {
                let t = [b.x[0].exp(), b.x[1].exp()];
                for q in 0..8 {
                    let angle = std::f64::consts::FRAC_PI_4 * q as f64;
                    let p = [t[0] + r * angle.cos(), t[1] + r * angle.sin()];
                    if p[0] < 0.0 || p[1] < 0.0 || !sol.dom.contains(&[c(p[0], 0.0), c(p[1], 0.0)]) {
                        continue;
                    }
                    let u = sol.eval_log_coarse([p[0].ln(), p[1].ln()]);
                    worst = worst.max((u - b.value).abs());
                }
            }
            (r, worst)
        })
        .collect();
    let mut running: f64 = 0.0;
    for entry in table.iter_mut() {
        running = running.max(entry.1);
        entry.1 = running;
    }
    table
}

/// Tuning for [`perron_oracle`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerronConfig {
    /// Nodes per grid axis (at most 21).
    pub nodes: usize,
    pub directions: usize,
    pub radii: usize,
    /// Samples on each disc boundary.
    pub angles: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for PerronConfig {
    fn default() -> Self {
        PerronConfig { nodes: 11, directions: 8, radii: 8, angles: 16, tol: 1e-9, max_sweeps: 20_000, seed: 0x9e77 }
    }
}

/// Discrete maximal plurisubharmonic minorant on a tensor grid. For
/// Reinhardt input the grid lives in the modulus quadrant `(|z_1|, |z_2|)`;
/// otherwise in the real coordinates of the bounding box.
#[derive(Debug, Clone, Serialize)]
pub struct PerronGrid {
    pub reduced: bool,
    /// Node abscissae per grid axis.
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Nodes updated by the iteration (the rest carry boundary data).
    pub free: Vec<bool>,
    pub sweeps: usize,
    pub residual: f64,
}

impl PerronGrid {
    pub fn spacing(&self) -> f64 {
        self.axes.iter().map(|a| a[1] - a[0]).fold(0.0, f64::max)
    }

    /// Node coordinates for a flat index.
    pub fn node(&self, mut flat: usize) -> Vec<f64> {
        let mut coords = vec![0.0; self.axes.len()];
        for (d, a) in self.axes.iter().enumerate().rev() {
            coords[d] = a[flat % a.len()];
            flat /= a.len();
        }
        coords
    }

    /// Point of C^n represented by a node.
    pub fn node_point(&self, flat: usize) -> CVec {
        let x = self.node(flat);
        if self.reduced {
            x.iter().map(|t| c(*t, 0.0)).collect()
        } else {
            numerics::from_real(&x)
        }
    }

    /// Grid coordinates of a point.
    pub fn coords_of(&self, z: &[Complex64]) -> Vec<f64> {
        if self.reduced {
            z.iter().map(|w| w.norm()).collect()
        } else {
            numerics::to_real(z)
        }
    }

    /// Multilinear interpolation of the grid function.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        interpolate(&self.axes, &self.values, x)
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.interpolate(&self.coords_of(z))
    }
}

fn interpolate(axes: &[Vec<f64>], values: &[f64], x: &[f64]) -> f64 {
    let mut total = 0.0;
    interpolation_stencil(axes, x, |flat, weight| total += weight * values[flat]);
    total
}

/// Calls `visit(flat_index, weight)` for the nonzero multilinear weights of
/// `x`; coordinates outside the grid are clamped.
fn interpolation_stencil(axes: &[Vec<f64>], x: &[f64], mut visit: impl FnMut(usize, f64)) {
    let d = axes.len();
    let mut base = [0usize; 8];
    let mut frac = [0.0f64; 8];
    for k in 0..d {
        let a = &axes[k];
        let h = a[1] - a[0];
        let s = ((x[k] - a[0]) / h).clamp(0.0, (a.len() - 1) as f64);
        let i = (s.floor() as usize).min(a.len() - 2);
        base[k] = i;
        frac[k] = s - i as f64;
    }
    for corner in 0..(1usize << d) {
        let mut weight = 1.0;
        let mut flat = 0;
        for k in 0..d {
            let bit = (corner >> k) & 1;
            weight *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            flat = flat * axes[k].len() + base[k] + bit;
        }
        if weight != 0.0 {
            visit(flat, weight);
        }
    }
}

struct DiscSample {
    node: usize,
    /// Per sampled disc: the averaging weights over grid nodes.
    stencils: Vec<Vec<(usize, f64)>>,
}

/// Brute-force maximal plurisubharmonic minorant of boundary data on a small
/// grid. Starting below the data, each free node is raised to the smallest
/// sampled disc average of the current grid function (Gauss–Seidel) until
/// the sweep changes less than `tol`.
pub fn perron_oracle(dom: &DomainSpec, g: &BoundaryData, cfg: &PerronConfig) -> Result<PerronGrid> {
    if dom.dim() != 2 {
        return Err(Error::InvalidDimension(dom.dim(), 2));
    }
    if !(3..=21).contains(&cfg.nodes) {
        return Err(Error::InvalidArgument(format!("oracle grid needs 3..=21 nodes per axis, got {}", cfg.nodes)));
    }
    let reduced = dom.flags().reinhardt && rotation_defect(dom, g, 64, cfg.seed)? <= 1e-10;
    let bbox = dom.bounding_box();
    let axes: Vec<Vec<f64>> = if reduced {
        (0..2)
            .map(|j| {
                let top = bbox[2 * j].0.abs().max(bbox[2 * j].1.abs()).max(bbox[2 * j + 1].0.abs()).max(bbox[2 * j + 1].1.abs());
                (0..cfg.nodes).map(|k| top * k as f64 / (cfg.nodes - 1) as f64).collect()
            })
            .collect()
    } else {
        bbox.iter().map(|(lo, hi)| (0..cfg.nodes).map(|k| lo + (hi - lo) * k as f64 / (cfg.nodes - 1) as f64).collect()).collect()
    };
    let total: usize = axes.iter().map(|a| a.len()).product();
    let mut grid = PerronGrid { reduced, axes, values: vec![0.0; total], free: vec![false; total], sweeps: 0, residual: f64::INFINITY };
    let directions: Vec<CVec> = if reduced {
        (0..cfg.directions)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 * k as f64 / (cfg.directions.max(2) - 1) as f64;
                vec![c(a.cos(), 0.0), c(a.sin(), 0.0)]
            })
            .collect()
    } else {
        let mut rng = numerics::seeded_rng(cfg.seed);
        let mut dirs = vec![numerics::basis(2, 0), numerics::basis(2, 1)];
        while dirs.len() < cfg.directions {
            dirs.push(numerics::random_unit(&mut rng, 2));
        }
        dirs
    };
    let rotations: Vec<Complex64> = (0..cfg.angles).map(|q| Complex64::from_polar(1.0, std::f64::consts::TAU * q as f64 / cfg.angles as f64)).collect();
    let mut floor = f64::INFINITY;
    let mut samples = Vec::new();
    for flat in 0..total {
        let z = grid.node_point(flat);
        grid.values[flat] = g(&z);
        if dom.defining(&z) < -1e-12 {
            grid.free[flat] = true;
            let mut stencils = Vec::with_capacity(directions.len() * cfg.radii);
            for v in &directions {
                let mut reach = f64::INFINITY;
                for rot in &rotations {
                    reach = reach.min(first_exit(dom, &z, &numerics::scale(v, *rot), 1e-10)?);
                }
                for m in 1..=cfg.radii {
                    let radius = reach * m as f64 / cfg.radii as f64;
                    let mut weights: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
                    for rot in &rotations {
                        let w = numerics::along(&z, rot * radius, v);
                        interpolation_stencil(&grid.axes, &grid.coords_of(&w), |i, wt| *weights.entry(i).or_insert(0.0) += wt / cfg.angles as f64);
                    }
                    stencils.push(weights.into_iter().collect());
                }
            }
            samples.push(DiscSample { node: flat, stencils });
        } else {
            floor = floor.min(grid.values[flat]);
        }
    }
    let boundary_min = dom
        .sample_boundary(&mut numerics::seeded_rng(cfg.seed), 256)?
        .iter()
        .map(|z| g(z))
        .fold(floor, f64::min);
    for s in &samples {
        grid.values[s.node] = boundary_min;
    }
    for sweep in 1..=cfg.max_sweeps {
        let mut change: f64 = 0.0;
        for s in &samples {
            let best = s
                .stencils
                .iter()
                .map(|st| st.iter().map(|(i, w)| w * grid.values[*i]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            change = change.max((best - grid.values[s.node]).abs());
            grid.values[s.node] = best;
        }
        grid.sweeps = sweep;
        grid.residual = change;
        if change < cfg.tol {
            return Ok(grid);
        }
    }
    Err(Error::NoConvergence { what: "Perron iteration".into(), residual: grid.residual })
}

/// Which solver [`canonical_function`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalSolver {
    Envelope,
    Oracle,
}

/// Canonical function from either solver.
#[derive(Debug, Clone)]
pub enum CanonicalSolution {
    Envelope(Box<EnvelopeSolution>),
    Oracle(PerronGrid),
}

impl CanonicalSolution {
    pub fn eval(&self, z: &[Complex64]) -> f64 {
        match self {
            CanonicalSolution::Envelope(s) => s.eval(z),
            CanonicalSolution::Oracle(g) => g.eval(z),
        }
    }
}

/// Homogeneous Monge–Ampère solution with boundary data `−2∥z∥²`.
pub fn canonical_function(dom: &DomainSpec, solver: CanonicalSolver) -> Result<CanonicalSolution> {
    match solver {
        CanonicalSolver::Envelope => Ok(CanonicalSolution::Envelope(Box::new(reinhardt_envelope_solve(dom, canonical_data(), &EnvelopeConfig::default())?))),
        CanonicalSolver::Oracle => Ok(CanonicalSolution::Oracle(perron_oracle(dom, &canonical_data(), &PerronConfig::default())?)),
    }
}

/// Local Hölder diagnostics of a function at a boundary point.
#[derive(Debug, Clone, Serialize)]
pub struct HolderFit {
    pub xi: CVec,
    pub value_at_xi: f64,
    pub scales: Vec<f64>,
    /// `sup_{∥z−ξ∥ ≤ r} |u(z) − u(ξ)|` per scale.
    pub oscillation: Vec<f64>,
    /// Windowed log-log slope per scale (NaN where undefined).
    pub alpha_hat: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `oscillation / r^α` per scale, per requested α.
    pub quotients: Vec<Vec<f64>>,
}

/// Local Hölder exponent estimates of `u` at `ξ`. The oscillation over the
/// ball of radius `r` is sampled along coordinate and random directions at
/// four radii up to `r`; `α̂` at a scale is the least-squares slope of
/// `log oscillation` against `log r` over `window` consecutive scales
/// starting there (scales sorted decreasingly).
pub fn holder_fit(
    u: &dyn Fn(&[Complex64]) -> f64,
    dom: &DomainSpec,
    xi: &[Complex64],
    scales: &[f64],
    alphas: &[f64],
    window: usize,
) -> Result<HolderFit> {
    if xi.len() != dom.dim() {
        return Err(Error::DimensionMismatch { expected: dom.dim(), found: xi.len() });
    }
    let rho = dom.defining(xi);
    if rho.abs() > 1e-8 {
        return Err(Error::NotOnBoundary { rho });
    }
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    if scales.last().is_some_and(|r| *r < 1e-9) {
        return Err(Error::InvalidArgument("smallest scale is below the resolution of the solution".into()));
    }
    let n = dom.dim();
    let mut dirs: Vec<CVec> = Vec::new();
    for k in 0..n {
        for s in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)] {
            dirs.push(numerics::scale(&numerics::basis(n, k), s));
        }
    }
    let mut rng = numerics::seeded_rng(0x401d);
    dirs.extend((0..32).map(|_| numerics::random_unit(&mut rng, n)));
    let base = u(xi);
    let oscillation: Vec<f64> = scales
        .iter()
        .map(|&r| {
            let mut worst: f64 = 0.0;
            for d in &dirs {
                for q in 1..=4 {
                    let z = numerics::along(xi, c(r * q as f64 / 4.0, 0.0), d);
                    if dom.contains(&z) {
                        worst = worst.max((u(&z) - base).abs());
                    }
                }
            }
            worst
        })
        .collect();
    let window = window.max(2);
    let alpha_hat = (0..scales.len())
        .map(|i| {
            if i + window > scales.len() {
                return f64::NAN;
            }
            let xs: Vec<f64> = scales[i..i + window].iter().map(|r| r.ln()).collect();
            let ys: Vec<f64> = oscillation[i..i + window].iter().map(|s| s.ln()).collect();
            if ys.iter().any(|y| !y.is_finite()) {
                return f64::NAN;
            }
            numerics::fit_line(&xs, &ys).map_or(f64::NAN, |f| f.slope)
        })
        .collect();
    let quotients = alphas.iter().map(|a| scales.iter().zip(&oscillation).map(|(r, s)| s / r.powf(*a)).collect()).collect();
    Ok(HolderFit { xi: xi.to_vec(), value_at_xi: base, scales, oscillation, alpha_hat, alphas: alphas.to_vec(), quotients })
}

/// Euclidean norm of `z`, convenient as a synthetic Hölder field.
pub fn distance_field(xi: CVec, power: f64) -> impl Fn(&[Complex64]) -> f64 {
    move |z| norm(&numerics::sub(z, &xi)).powf(power)
}
