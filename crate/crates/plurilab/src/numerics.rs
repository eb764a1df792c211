//! Shared numerical building blocks: complex vector helpers, root bracketing,
//! golden-section search, adaptive Gauss–Kronrod quadrature, line fits and
//! low-discrepancy sequences.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A point or vector in C^n.
pub type CVec = Vec<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Hermitian inner product `Σ a_j conj(b_j)`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> CVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> CVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> CVec {
    a.iter().map(|x| x * s).collect()
}

/// `z + t v` for a complex scalar `t`.
pub fn along(z: &[Complex64], t: Complex64, v: &[Complex64]) -> CVec {
    z.iter().zip(v).map(|(a, b)| a + t * b).collect()
}

pub fn normalized(a: &[Complex64]) -> Option<CVec> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, Complex64::from(1.0 / n)))
}

/// Unit vector `e_k` in C^n.
pub fn basis(n: usize, k: usize) -> CVec {
    let mut v = vec![Complex64::from(0.0); n];
    v[k] = Complex64::from(1.0);
    v
}

/// Real coordinates `(x_1, y_1, …, x_n, y_n)` of a point in C^n.
pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|w| [w.re, w.im]).collect()
}

pub fn from_real(x: &[f64]) -> CVec {
    x.chunks(2).map(|p| c(p[0], p[1])).collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit vector in C^n.
pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> CVec {
    loop {
        let v: CVec = (0..n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// Uniformly distributed point of the ball of radius `r` about `center`.
pub fn random_in_ball<R: Rng>(rng: &mut R, center: &[Complex64], r: f64) -> CVec {
    let n = center.len();
    let u = random_unit(rng, n);
    let s = r * rng.random::<f64>().powf(1.0 / (2 * n) as f64);
    along(center, Complex64::from(s), &u)
}

/// Locates the transition of a predicate on `[lo, hi]` by bisection, given
/// `inside(lo)` true and `inside(hi)` false. Returns the midpoint of the final
/// bracket.
pub fn bisect_transition(mut inside: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of a monotone increasing function on `[lo, hi]` by bisection.
pub fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    bisect_transition(|x| f(x) < target, lo, hi, tol)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section maximisation of a unimodal function on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), a, b, tol);
    (x, -v)
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let center = f(mid);
    let mut kronrod = center * GK_WEIGHTS[7];
    let mut gauss = center * GAUSS_WEIGHTS[3];
    for k in 0..7 {
        let dx = half * GK_NODES[k];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += pair * GK_WEIGHTS[k];
        if k % 2 == 1 {
            gauss += pair * GAUSS_WEIGHTS[k / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of a complex-valued integrand
/// with absolute tolerance `abs_tol`. Endpoints are never evaluated.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: Complex64::from(0.0), error: 0.0, intervals: 0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        let total: Complex64 = pieces.iter().map(|p| p.2).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if total_err <= abs_tol {
            return Ok(Quadrature { value: total, error: total_err, intervals: pieces.len() });
        }
        if pieces.len() >= max_intervals {
            return Err(Error::NoConvergence { what: "adaptive quadrature".into(), residual: total_err });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::NoConvergence { what: "adaptive quadrature (interval underflow)".into(), residual: total_err });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Adaptive quadrature of a real integrand.
pub fn integrate_real(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<(f64, f64)> {
    let q = integrate(|x| Complex64::from(f(x)), a, b, abs_tol, max_intervals)?;
    Ok((q.value.re, q.error))
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len() as f64;
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Some(LineFit { slope, intercept, rms_residual: (rss / n).sqrt() })
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in the given base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// Point `index` of the Halton sequence in `[0,1)^dim`, rotated by `shift`
/// (Cranley–Patterson randomisation).
pub fn halton_point(index: u64, dim: usize, shift: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|d| {
            let x = radical_inverse(index + 1, PRIMES[d % PRIMES.len()]) + shift.get(d).copied().unwrap_or(0.0);
            x - x.floor()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_of_polynomial_is_exact() {
        let q = integrate(|x| c(x.powi(5), 0.0), 0.0, 2.0, 1e-12, 100).unwrap();
        assert!((q.value.re - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_handles_integrable_endpoint_singularity() {
        let (v, _) = integrate_real(|x| x.powf(-0.5), 0.0, 1.0, 1e-9, 2000).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_min(|t| (t - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx < 1e-18);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12 && (fit.intercept + 1.0).abs() < 1e-12);
    }

    #[test]
    fn halton_is_in_unit_cube() {
        for i in 0..100 {
            let p = halton_point(i, 4, &[0.3, 0.7, 0.1, 0.9]);
            assert!(p.iter().all(|x| (0.0..1.0).contains(x)));
        }
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn bisection_locates_threshold() {
        let t = bisect_transition(|x| x * x < 2.0, 0.0, 2.0, 1e-12);
        assert!((t - 2f64.sqrt()).abs() < 1e-11);
    }
}
