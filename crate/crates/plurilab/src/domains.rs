//! Bounded domains in C^n given by defining functions, together with the two
//! Euclidean measurements everything else is built on: the distance to the
//! boundary and the radius of the largest flat analytic disc through a point.
//!
//! A domain is `{ρ < 0}` for an evaluable `ρ`. Built-ins cover balls,
//! polydiscs, the infinitely flat convex domain `omega_phi`, the pair of
//! non-smooth domains `example_D` / `example_Omega` related by the square-root
//! lift, and finite intersections of complex ellipsoids.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, along, bisect_transition, c, golden_min, norm, CVec};

/// Evaluable defining function `ρ: C^n → R`.
pub type DefiningFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

/// Geometric flags carried by a domain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainFlags {
    pub convex: bool,
    pub reinhardt: bool,
}

/// Complex ellipsoid `Σ |z_j − c_j|² / a_j² < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: Vec<Complex64>,
    pub semi_axes: Vec<f64>,
}

impl Ellipsoid {
    pub fn ball(center: Vec<Complex64>, radius: f64) -> Self {
        let n = center.len();
        Ellipsoid { center, semi_axes: vec![radius; n] }
    }

    pub fn defining(&self, z: &[Complex64]) -> f64 {
        z.iter()
            .zip(&self.center)
            .zip(&self.semi_axes)
            .map(|((w, c0), a)| (w - c0).norm_sqr() / (a * a))
            .sum::<f64>()
            - 1.0
    }

    fn validate(&self) -> Result<()> {
        if self.center.is_empty() || self.center.len() != self.semi_axes.len() {
            return Err(Error::InvalidArgument("ellipsoid center and semi-axes must have equal positive length".into()));
        }
        if self.semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument("ellipsoid semi-axes must be positive".into()));
        }
        Ok(())
    }
}

/// Normalised description of a built-in domain; round-trips through the
/// key-value config format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain")]
pub enum DomainParams {
    #[serde(rename = "ball")]
    Ball { n: usize, radius: f64 },
    #[serde(rename = "polydisc")]
    Polydisc { n: usize },
    #[serde(rename = "omega_phi")]
    FlatConvex { n: usize },
    #[serde(rename = "example_D")]
    ConeSource,
    #[serde(rename = "example_Omega")]
    ConeTarget,
    #[serde(rename = "strongly_convex_intersection")]
    Intersection { ellipsoids: Vec<Ellipsoid> },
}

impl DomainParams {
    pub fn to_config(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_config(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<DomainSpec> {
        match self {
            DomainParams::Ball { n, radius } => DomainSpec::ball(*n, *radius),
            DomainParams::Polydisc { n } => DomainSpec::polydisc(*n),
            DomainParams::FlatConvex { n } => DomainSpec::flat_convex(*n),
            DomainParams::ConeSource => Ok(DomainSpec::cone_source()),
            DomainParams::ConeTarget => Ok(DomainSpec::cone_target()),
            DomainParams::Intersection { ellipsoids } => DomainSpec::intersection(ellipsoids),
        }
    }
}

/// Loose parameter record accepted by [`make_builtin`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParamRecord {
    pub n: Option<usize>,
    pub radius: Option<f64>,
    pub ellipsoids: Option<Vec<Ellipsoid>>,
}

/// Builds a domain from its identifier: `ball`, `polydisc`, `omega_phi`,
/// `example_D`, `example_Omega`, `strongly_convex_intersection`, or `lens`
/// (two unit balls centred at 0 and `(0.5, 0, …)`).
pub fn make_builtin(name: &str, params: &ParamRecord) -> Result<DomainSpec> {
    let n = params.n.unwrap_or(2);
    match name {
        "ball" => DomainSpec::ball(n, params.radius.unwrap_or(1.0)),
        "polydisc" => DomainSpec::polydisc(n),
        "omega_phi" => DomainSpec::flat_convex(n),
        "example_D" => Ok(DomainSpec::cone_source()),
        "example_Omega" => Ok(DomainSpec::cone_target()),
        "strongly_convex_intersection" => {
            let list = params.ellipsoids.as_deref().unwrap_or(&[]);
            DomainSpec::intersection(list)
        }
        "lens" => DomainSpec::lens(n),
        other => Err(Error::UnknownDomain(other.to_string())),
    }
}

/// The convex, increasing profile that is flat to infinite order at 0:
/// `e²·exp(−1/x)/3` on `(0, 1/2)` and `(4x − 1)/3` from `1/2` on (C¹ at the
/// junction, where both pieces equal 1/3).
pub fn flat_profile(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 0.5 {
        (2.0 - 1.0 / x).exp() / 3.0
    } else {
        (4.0 * x - 1.0) / 3.0
    }
}

/// Inverse of [`flat_profile`] on `[0, ∞)` by monotone bisection.
pub fn flat_profile_inverse(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let hi = 1.0f64.max((3.0 * y + 1.0) / 4.0 + 1.0);
    numerics::bisect_increasing(flat_profile, y, 0.0, hi, 1e-15)
}

fn cone_height(z: Complex64) -> f64 {
    let (u, v) = (z.re, z.im);
    2.0 * u * u - v * v.abs() + v.powi(4)
}

/// A bounded domain `{ρ < 0}` in C^n.
#[derive(Clone)]
pub struct DomainSpec {
    name: String,
    dim: usize,
    rho: DefiningFn,
    flags: DomainFlags,
    witness: CVec,
    bounding_radius: f64,
    bounding_box: Vec<(f64, f64)>,
    pieces: Vec<DefiningFn>,
    params: Option<DomainParams>,
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("flags", &self.flags)
            .field("bounding_radius", &self.bounding_radius)
            .field("pieces", &self.pieces.len())
            .finish()
    }
}

impl DomainSpec {
    /// User-defined domain. Validates the witness and the bounding radius on
    /// a sample sphere.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        rho: DefiningFn,
        flags: DomainFlags,
        witness: CVec,
        bounding_radius: f64,
    ) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension(dim, 1));
        }
        if witness.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: witness.len() });
        }
        let dom = DomainSpec {
            name: name.into(),
            dim,
            rho,
            flags,
            witness,
            bounding_radius,
            bounding_box: vec![(-bounding_radius, bounding_radius); 2 * dim],
            pieces: Vec::new(),
            params: None,
        };
        let r = dom.defining(&dom.witness);
        if !(r < 0.0) {
            return Err(Error::EmptyDomain { best: r });
        }
        Ok(dom)
    }

    pub fn with_bounding_box(mut self, bbox: Vec<(f64, f64)>) -> Self {
        assert_eq!(bbox.len(), 2 * self.dim, "bounding box needs one interval per real coordinate");
        self.bounding_box = bbox;
        self
    }

    /// Euclidean ball `∥z∥ < r` in C^n.
    pub fn ball(n: usize, r: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n, 1));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
        }
        let rho: DefiningFn = Arc::new(move |z| z.iter().map(|w| w.norm_sqr()).sum::<f64>() / (r * r) - 1.0);
        let mut dom = Self::custom(format!("ball({n},{r})"), n, rho, DomainFlags { convex: true, reinhardt: true }, vec![c(0.0, 0.0); n], r)?;
        dom.params = Some(DomainParams::Ball { n, radius: r });
        Ok(dom)
    }

    /// Unit polydisc `max_j |z_j| < 1`.
    pub fn polydisc(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n, 1));
        }
        let rho: DefiningFn = Arc::new(|z| z.iter().map(|w| w.norm_sqr()).fold(0.0, f64::max) - 1.0);
        let mut dom = Self::custom(format!("polydisc({n})"), n, rho, DomainFlags { convex: true, reinhardt: true }, vec![c(0.0, 0.0); n], (n as f64).sqrt())?;
        dom.bounding_box = vec![(-1.0, 1.0); 2 * n];
        dom.params = Some(DomainParams::Polydisc { n });
        Ok(dom)
    }

    /// `omega_phi`: `φ(|z_1|²) + Σ_{j≥2} |z_j|² < 1` with φ the
    /// [`flat_profile`]. Convex and Reinhardt; the boundary is flat to
    /// infinite order in the `z_1` direction at the points `(0, z')`,
    /// `∥z'∥ = 1`.
    pub fn flat_convex(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n, 1));
        }
        let rho: DefiningFn = Arc::new(|z| flat_profile(z[0].norm_sqr()) + z[1..].iter().map(|w| w.norm_sqr()).sum::<f64>() - 1.0);
        let radius = if n > 1 { 2f64.sqrt() } else { 1.0 };
        let mut dom = Self::custom(format!("omega_phi({n})"), n, rho, DomainFlags { convex: true, reinhardt: true }, vec![c(0.0, 0.0); n], radius)?;
        dom.bounding_box = vec![(-1.0, 1.0); 2 * n];
        dom.params = Some(DomainParams::FlatConvex { n });
        Ok(dom)
    }

    /// `example_D ⊂ C²`: `|z_1|² + h(z_2) < 0` with
    /// `h(u + iv) = 2u² − v|v| + v⁴`. Lies in `{Im z_2 > 0}`; the boundary has
    /// a conical point at the origin.
    pub fn cone_source() -> Self {
        let rho: DefiningFn = Arc::new(|z| z[0].norm_sqr() + cone_height(z[1]));
        let mut dom = Self::custom("example_D", 2, rho, DomainFlags::default(), vec![c(0.0, 0.0), c(0.0, 0.5)], 1.2).expect("valid built-in");
        dom.bounding_box = vec![(-0.5, 0.5), (-0.5, 0.5), (-0.36, 0.36), (0.0, 1.0)];
        dom.params = Some(DomainParams::ConeSource);
        dom
    }

    /// `example_Omega ⊂ C³`: the component of
    /// `|w_1² − 1|² + h(w_2) + |w_3|² < 0` containing `(1, i/2, 0)`, i.e. the
    /// one with `Re w_1 > 0`. On `Re w_1 ≤ 0` the defining function is
    /// clamped to at least 1/2; the two expressions agree on `Re w_1 = 0`,
    /// where the polynomial is already at least 3/4.
    pub fn cone_target() -> Self {
        let rho: DefiningFn = Arc::new(|w| {
            let sq = w[0] * w[0] - 1.0;
            let value = sq.norm_sqr() + cone_height(w[1]) + w[2].norm_sqr();
            if w[0].re > 0.0 {
                value
            } else {
                value.max(0.5)
            }
        });
        let mut dom = Self::custom("example_Omega", 3, rho, DomainFlags::default(), vec![c(1.0, 0.0), c(0.0, 0.5), c(0.0, 0.0)], 1.7).expect("valid built-in");
        dom.bounding_box = vec![(0.6, 1.3), (-0.35, 0.35), (-0.36, 0.36), (0.0, 1.0), (-0.5, 0.5), (-0.5, 0.5)];
        dom.params = Some(DomainParams::ConeTarget);
        dom
    }

    /// Intersection of complex ellipsoids with defining function
    /// `max_j ρ_j`. Fails if no interior witness is found.
    pub fn intersection(ellipsoids: &[Ellipsoid]) -> Result<Self> {
        let first = ellipsoids.first().ok_or_else(|| Error::InvalidArgument("ellipsoid list is empty".into()))?;
        let n = first.center.len();
        for e in ellipsoids {
            e.validate()?;
            if e.center.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.center.len() });
            }
        }
        let pieces: Vec<DefiningFn> = ellipsoids
            .iter()
            .map(|e| {
                let e = e.clone();
                Arc::new(move |z: &[Complex64]| e.defining(z)) as DefiningFn
            })
            .collect();
        let list: Vec<Ellipsoid> = ellipsoids.to_vec();
        let rho: DefiningFn = Arc::new(move |z| list.iter().map(|e| e.defining(z)).fold(f64::NEG_INFINITY, f64::max));
        let witness = intersection_witness(ellipsoids, &rho)?;
        let bounding_radius = ellipsoids
            .iter()
            .map(|e| norm(&e.center) + e.semi_axes.iter().cloned().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        let mut bbox = vec![(f64::NEG_INFINITY, f64::INFINITY); 2 * n];
        for e in ellipsoids {
            for j in 0..n {
                let a = e.semi_axes[j];
                let (cr, ci) = (e.center[j].re, e.center[j].im);
                bbox[2 * j] = (bbox[2 * j].0.max(cr - a), bbox[2 * j].1.min(cr + a));
                bbox[2 * j + 1] = (bbox[2 * j + 1].0.max(ci - a), bbox[2 * j + 1].1.min(ci + a));
            }
        }
        let name = if ellipsoids.len() == 1 { "ellipsoid".to_string() } else { format!("intersection({})", ellipsoids.len()) };
        let mut dom = Self::custom(name, n, rho, DomainFlags { convex: true, reinhardt: false }, witness, bounding_radius)?;
        dom.bounding_box = bbox;
        dom.pieces = pieces;
        dom.params = Some(DomainParams::Intersection { ellipsoids: ellipsoids.to_vec() });
        Ok(dom)
    }

    /// Two unit balls centred at 0 and `(0.5, 0, …)`.
    pub fn lens(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n, 1));
        }
        let mut shifted = vec![c(0.0, 0.0); n];
        shifted[0] = c(0.5, 0.0);
        let mut dom = Self::intersection(&[Ellipsoid::ball(vec![c(0.0, 0.0); n], 1.0), Ellipsoid::ball(shifted, 1.0)])?;
        dom.name = format!("lens({n})");
        Ok(dom)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flags(&self) -> DomainFlags {
        self.flags
    }

    pub fn interior_witness(&self) -> &[Complex64] {
        &self.witness
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Per real coordinate `(x_1, y_1, …)` bounds enclosing the domain.
    pub fn bounding_box(&self) -> &[(f64, f64)] {
        &self.bounding_box
    }

    pub fn params(&self) -> Option<&DomainParams> {
        self.params.as_ref()
    }

    pub fn pieces(&self) -> &[DefiningFn] {
        &self.pieces
    }

    pub fn defining_fn(&self) -> DefiningFn {
        self.rho.clone()
    }

    /// `ρ(z)`.
    pub fn defining(&self, z: &[Complex64]) -> f64 {
        (self.rho)(z)
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        self.defining(z) < 0.0
    }

    /// Gradient of ρ packed as the complex vector `∂ρ/∂x_j + i ∂ρ/∂y_j`
    /// (the outward normal direction where ρ is smooth). For intersections
    /// the active piece is differentiated.
    pub fn gradient(&self, z: &[Complex64]) -> CVec {
        let f: &DefiningFn = if self.pieces.is_empty() {
            &self.rho
        } else {
            self.pieces
                .iter()
                .max_by(|a, b| a(z).total_cmp(&b(z)))
                .expect("non-empty pieces")
        };
        let h = 1e-6 * (1.0 + norm(z));
        let mut w = z.to_vec();
        (0..self.dim)
            .map(|j| {
                let mut partial = |dir: Complex64| {
                    w[j] = z[j] + dir * h;
                    let fp = f(&w);
                    w[j] = z[j] - dir * h;
                    let fm = f(&w);
                    w[j] = z[j];
                    (fp - fm) / (2.0 * h)
                };
                c(partial(c(1.0, 0.0)), partial(c(0.0, 1.0)))
            })
            .collect()
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        Ok(())
    }

    /// Verifies that `z` is interior and not numerically on the boundary.
    pub fn require_interior(&self, z: &[Complex64]) -> Result<f64> {
        self.check_point(z)?;
        let r = self.defining(z);
        if r.abs() < 1e-14 {
            return Err(Error::OnBoundary { rho: r });
        }
        if !(r < 0.0) {
            return Err(Error::NotInterior { rho: r });
        }
        Ok(r)
    }

    /// Uniform samples of the domain by rejection from the bounding box.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<CVec> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count && attempts < 10_000 * count.max(1) {
            attempts += 1;
            let x: Vec<f64> = self.bounding_box.iter().map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect();
            let z = numerics::from_real(&x);
            if self.defining(&z) < -1e-12 {
                out.push(z);
            }
        }
        out
    }

    /// Boundary points reached by first exit from the interior witness along
    /// random directions.
    pub fn sample_boundary<R: Rng>(&self, rng: &mut R, count: usize) -> Result<Vec<CVec>> {
        (0..count)
            .map(|_| {
                let u = numerics::random_unit(rng, self.dim);
                let t = first_exit(self, &self.witness, &u, 1e-12)?;
                Ok(along(&self.witness, c(t, 0.0), &u))
            })
            .collect()
    }

    /// Sampled checks of the domain invariants.
    pub fn check_invariants(&self, seed: u64) -> InvariantReport {
        let mut rng = numerics::seeded_rng(seed);
        let witness_value = self.defining(&self.witness);
        let sphere_min = (0..200)
            .map(|_| {
                let u = numerics::random_unit(&mut rng, self.dim);
                self.defining(&numerics::scale(&u, c(2.0 * self.bounding_radius, 0.0)))
            })
            .fold(f64::INFINITY, f64::min);
        let pts = self.sample_interior(&mut rng, 60);
        let mut convexity_violations = 0;
        if self.flags.convex {
            for a in &pts {
                for b in pts.iter().take(20) {
                    for k in 1..8 {
                        let t = k as f64 / 8.0;
                        let m: CVec = a.iter().zip(b).map(|(x, y)| x * t + y * (1.0 - t)).collect();
                        if !(self.defining(&m) < 0.0) {
                            convexity_violations += 1;
                        }
                    }
                }
            }
        }
        let mut rotation_defect: f64 = 0.0;
        if self.flags.reinhardt {
            for z in &pts {
                let rotated: CVec = z.iter().map(|w| w * Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)).collect();
                rotation_defect = rotation_defect.max((self.defining(z) - self.defining(&rotated)).abs());
            }
        }
        InvariantReport {
            witness_value,
            sphere_min,
            convexity_violations,
            rotation_defect,
            ok: witness_value < 0.0 && sphere_min > 0.0 && convexity_violations == 0 && rotation_defect <= 1e-10,
        }
    }
}

/// Outcome of [`DomainSpec::check_invariants`].
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub witness_value: f64,
    pub sphere_min: f64,
    pub convexity_violations: usize,
    pub rotation_defect: f64,
    pub ok: bool,
}

fn intersection_witness(ellipsoids: &[Ellipsoid], rho: &DefiningFn) -> Result<CVec> {
    let n = ellipsoids[0].center.len();
    let mut mean = vec![c(0.0, 0.0); n];
    for e in ellipsoids {
        for (m, x) in mean.iter_mut().zip(&e.center) {
            *m += x / ellipsoids.len() as f64;
        }
    }
    if rho(&mean) < 0.0 {
        return Ok(mean);
    }
    let mut starts = vec![mean];
    starts.extend(ellipsoids.iter().map(|e| e.center.clone()));
    let mut best = (f64::INFINITY, Vec::new());
    for start in starts {
        let mut x = numerics::to_real(&start);
        let mut fx = rho(&numerics::from_real(&x));
        let mut step = ellipsoids.iter().flat_map(|e| e.semi_axes.iter()).cloned().fold(0.0, f64::max);
        while step > 1e-9 && fx >= 0.0 {
            let mut improved = false;
            for k in 0..x.len() {
                for sgn in [1.0, -1.0] {
                    x[k] += sgn * step;
                    let f = rho(&numerics::from_real(&x));
                    if f < fx {
                        fx = f;
                        improved = true;
                    } else {
                        x[k] -= sgn * step;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if fx < best.0 {
            best = (fx, x);
        }
        if best.0 < 0.0 {
            return Ok(numerics::from_real(&best.1));
        }
    }
    Err(Error::EmptyDomain { best: best.0 })
}

/// First parameter `t > 0` with `ρ(z + t·dir) ≥ 0`, located to `tol`.
///
/// Convex domains cross the boundary once along any ray, so a single
/// bisection on `[0, T]` suffices. Otherwise the ray is scanned on a uniform
/// grid first and the first sign change is bisected; exits and re-entries
/// between two scan nodes are not resolved.
pub fn first_exit(dom: &DomainSpec, z: &[Complex64], dir: &[Complex64], tol: f64) -> Result<f64> {
    let dir_norm = norm(dir);
    if dir_norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let reach = (dom.bounding_radius + norm(z)) / dir_norm * (1.0 + 1e-9) + 1e-12;
    let outside = |t: f64| dom.defining(&along(z, c(t, 0.0), dir)) >= 0.0;
    if !outside(reach) {
        return Err(Error::Bracket(format!("ray from interior does not leave the bounding ball of `{}`", dom.name)));
    }
    if dom.flags.convex {
        return Ok(bisect_transition(|t| !outside(t), 0.0, reach, tol));
    }
    const SCAN: usize = 32;
    let mut lo = 0.0;
    for k in 1..=SCAN {
        let t = reach * k as f64 / SCAN as f64;
        if outside(t) {
            return Ok(bisect_transition(|s| !outside(s), lo, t, tol));
        }
        lo = t;
    }
    Err(Error::Bracket("no exit found along ray".into()))
}

/// Tuning for [`nearest_boundary`].
#[derive(Debug, Clone, Copy)]
pub struct DistanceConfig {
    /// Number of local refinements started from the best seed rays.
    pub multistarts: usize,
    /// Random seed rays in addition to the `4n` coordinate rays.
    pub seed_rays: usize,
    /// Target accuracy of the distance.
    pub tol: f64,
    /// Bisection tolerance for individual rays.
    pub ray_tol: f64,
    pub seed: u64,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig { multistarts: 16, seed_rays: 64, tol: 1e-8, ray_tol: 1e-10, seed: 0x5eed }
    }
}

/// Nearest boundary point found by [`nearest_boundary`].
#[derive(Debug, Clone)]
pub struct BoundaryHit {
    pub distance: f64,
    pub point: CVec,
    /// Unit direction from the query point to `point`.
    pub direction: CVec,
    /// `|ρ(point)|`.
    pub residual: f64,
}

/// Nearest boundary point of an interior `z`, by multistart minimisation of
/// the first-exit distance over unit directions. Seeds are the coordinate
/// rays and random rays; the best `multistarts` are refined by a pattern
/// search on the sphere.
pub fn nearest_boundary(dom: &DomainSpec, z: &[Complex64], cfg: &DistanceConfig) -> Result<BoundaryHit> {
    dom.require_interior(z)?;
    let n = dom.dim;
    let mut rng = numerics::seeded_rng(cfg.seed);
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for k in 0..2 * n {
        for sgn in [1.0, -1.0] {
            let mut e = vec![0.0; 2 * n];
            e[k] = sgn;
            seeds.push(e);
        }
    }
    for _ in 0..cfg.seed_rays {
        seeds.push(numerics::to_real(&numerics::random_unit(&mut rng, n)));
    }
    let exit = |u: &[f64]| first_exit(dom, z, &numerics::from_real(u), cfg.ray_tol);
    let mut scored: Vec<(f64, Vec<f64>)> = seeds.into_iter().map(|u| Ok((exit(&u)?, u))).collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    for (t, u) in scored {
        if starts.len() >= cfg.multistarts {
            break;
        }
        if starts.iter().all(|(_, s)| s.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>() > 1e-6) {
            starts.push((t, u));
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (t0, u0) in starts {
        let (t, u) = refine_on_sphere(&exit, t0, u0, cfg.tol)?;
        if best.as_ref().is_none_or(|b| t < b.0) {
            best = Some((t, u));
        }
    }
    let (distance, u) = best.expect("at least one start");
    let direction = numerics::from_real(&u);
    let point = along(z, c(distance, 0.0), &direction);
    let residual = dom.defining(&point).abs();
    Ok(BoundaryHit { distance, point, direction, residual })
}

fn refine_on_sphere(exit: &impl Fn(&[f64]) -> Result<f64>, mut t: f64, mut u: Vec<f64>, tol: f64) -> Result<(f64, Vec<f64>)> {
    let dim = u.len();
    let mut step = 0.25;
    let min_step = (tol / t.max(1e-300)).clamp(1e-10, 1e-6);
    let mut iterations = 0;
    while step > min_step {
        iterations += 1;
        if iterations > 20_000 {
            return Err(Error::NoConvergence { what: "boundary distance search".into(), residual: step });
        }
        let frame = tangent_frame(&u);
        let mut improved = false;
        'dirs: for e in frame.iter().take(dim - 1) {
            for sgn in [1.0, -1.0] {
                let cand: Vec<f64> = u.iter().zip(e).map(|(a, b)| a + sgn * step * b).collect();
                let len = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
                let cand: Vec<f64> = cand.iter().map(|x| x / len).collect();
                let tc = exit(&cand)?;
                if tc < t {
                    t = tc;
                    u = cand;
                    improved = true;
                    break 'dirs;
                }
            }
        }
        step = if improved { (1.5 * step).min(0.25) } else { 0.5 * step };
    }
    Ok((t, u))
}

/// Orthonormal basis of the tangent space of the unit sphere at `u`.
fn tangent_frame(u: &[f64]) -> Vec<Vec<f64>> {
    let dim = u.len();
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        for b in &basis {
            let d: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in e.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let len = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-8 {
            basis.push(e.iter().map(|x| x / len).collect());
        }
        if basis.len() == dim {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Distance from an interior point to the boundary.
pub fn boundary_distance(dom: &DomainSpec, z: &[Complex64]) -> Result<f64> {
    Ok(nearest_boundary(dom, z, &DistanceConfig::default())?.distance)
}

/// Tuning for [`disc_radius_with`].
#[derive(Debug, Clone, Copy)]
pub struct DiscConfig {
    pub theta_samples: usize,
    pub tol: f64,
    /// Also compute the boundary distance of the base point.
    pub with_delta: bool,
}

impl Default for DiscConfig {
    fn default() -> Self {
        DiscConfig { theta_samples: 256, tol: 1e-10, with_delta: true }
    }
}

/// Radius of the largest flat disc `z + ζv`, `|ζ| < r`, inside a domain,
/// with the exit radii it was computed from.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionProbe {
    pub base: CVec,
    pub direction: CVec,
    /// Boundary distance of `base` (NaN when not requested).
    pub delta: f64,
    pub disc_radius: f64,
    /// `(θ, t_θ)` first-exit radii along `z + t e^{iθ} v`.
    pub exit_radii: Vec<(f64, f64)>,
}

impl DirectionProbe {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["theta", "t_theta"])?;
        for (theta, t) in &self.exit_radii {
            out.write_record([theta.to_string(), t.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Disc radius with default tuning.
pub fn disc_radius(dom: &DomainSpec, z: &[Complex64], v: &[Complex64]) -> Result<DirectionProbe> {
    disc_radius_with(dom, z, v, &DiscConfig::default())
}

/// Disc radius as the minimum over θ of the first-exit radius along
/// `z + t e^{iθ} v`: sampled on a uniform θ grid and refined by golden
/// section around the smallest sample.
pub fn disc_radius_with(dom: &DomainSpec, z: &[Complex64], v: &[Complex64], cfg: &DiscConfig) -> Result<DirectionProbe> {
    dom.require_interior(z)?;
    if v.len() != dom.dim {
        return Err(Error::DimensionMismatch { expected: dom.dim, found: v.len() });
    }
    let vn = norm(v);
    if (vn - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitDirection { norm: vn });
    }
    let exit_at = |theta: f64| first_exit(dom, z, &numerics::scale(v, Complex64::from_polar(1.0, theta)), cfg.tol);
    let m = cfg.theta_samples.max(3);
    let step = std::f64::consts::TAU / m as f64;
    let mut table = Vec::with_capacity(m + 1);
    for k in 0..m {
        let theta = k as f64 * step;
        table.push((theta, exit_at(theta)?));
    }
    let (k_min, &(theta_min, t_min)) = table.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).expect("non-empty");
    let _ = k_min;
    let (theta_ref, t_ref) = golden_min(|th| exit_at(th).unwrap_or(f64::INFINITY), theta_min - step, theta_min + step, 1e-9);
    let radius = if t_ref < t_min {
        table.push((theta_ref.rem_euclid(std::f64::consts::TAU), t_ref));
        t_ref
    } else {
        t_min
    };
    let delta = if cfg.with_delta { boundary_distance(dom, z)? } else { f64::NAN };
    Ok(DirectionProbe { base: z.to_vec(), direction: v.to_vec(), delta, disc_radius: radius, exit_radii: table })
}
