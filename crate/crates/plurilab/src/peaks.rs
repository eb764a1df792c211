//! Plurisubharmonic peak functions at boundary points of convex domains:
//! a supporting complex line, the planar shadow of the domain on it, a
//! numerical Riemann map of the shadow onto the unit disc and the
//! composite `u = Re ψ(π(z)) − 1`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::domains::{first_exit, DomainSpec};
use crate::error::{Error, Result};
use crate::monge_ampere::{complex_hessian, min_eigenvalue, HESSIAN_STEP};
use crate::numerics::{self, c, inner, norm, CVec};

/// Supporting real hyperplane at a boundary point `p` with outward unit
/// normal `v`; `π(z) = ⟨z − p, v⟩` is the coordinate on `p + C v`.
#[derive(Debug, Clone, Serialize)]
pub struct SupportFrame {
    pub point: CVec,
    pub normal: CVec,
    /// Largest `Re π(z)` over the interior samples used to validate the frame.
    pub separation: f64,
}

impl SupportFrame {
    pub fn project(&self, z: &[Complex64]) -> Complex64 {
        inner(&numerics::sub(z, &self.point), &self.normal)
    }
}

/// Builds the supporting frame at `p` from the gradient of the active
/// defining piece, or from the direction away from the interior centroid if
/// the gradient degenerates, and checks `Re π < 0` on 200 interior samples.
pub fn support_frame(dom: &DomainSpec, p: &[Complex64], seed: u64) -> Result<SupportFrame> {
    if !dom.flags().convex {
        return Err(Error::NotConvex(dom.name().to_string()));
    }
    let rho = dom.defining(p);
    if rho.abs() > 1e-8 {
        return Err(Error::NotOnBoundary { rho });
    }
    let mut rng = numerics::seeded_rng(seed);
    let interior = dom.sample_interior(&mut rng, 200);
    if interior.len() < 200 {
        return Err(Error::Numerical("could not sample the interior".into()));
    }
    let grad = dom.gradient(p);
    let normal = if norm(&grad) > 1e-8 {
        numerics::normalized(&grad).expect("non-zero gradient")
    } else {
        let mut centroid = vec![c(0.0, 0.0); dom.dim()];
        for z in &interior {
            centroid = numerics::add(&centroid, &numerics::scale(z, c(1.0 / interior.len() as f64, 0.0)));
        }
        numerics::normalized(&numerics::sub(p, &centroid)).ok_or_else(|| Error::Certificate("no separating direction at p".into()))?
    };
    let frame = SupportFrame { point: p.to_vec(), normal, separation: f64::NEG_INFINITY };
    let separation = interior.iter().map(|z| frame.project(z).re).fold(f64::NEG_INFINITY, f64::max);
    if separation >= 0.0 {
        return Err(Error::Certificate(format!("normal does not separate: Re π = {separation:.3e} at an interior sample")));
    }
    Ok(SupportFrame { separation, ..frame })
}

/// Convex polygon in the plane, counter-clockwise.
#[derive(Debug, Clone, Serialize)]
pub struct PlanarLoop {
    pub vertices: Vec<Complex64>,
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a - o).re * (b - o).im - (a - o).im * (b - o).re
}

impl PlanarLoop {
    /// Convex hull (monotone chain), counter-clockwise, collinear points
    /// dropped.
    pub fn hull(points: &[Complex64]) -> Result<Self> {
        let mut pts: Vec<Complex64> = points.to_vec();
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        pts.dedup_by(|a, b| (*a - *b).norm() < 1e-15);
        if pts.len() < 3 {
            return Err(Error::InvalidArgument("hull needs at least three distinct points".into()));
        }
        let mut lower: Vec<Complex64> = Vec::new();
        for &q in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
                lower.pop();
            }
            lower.push(q);
        }
        let mut upper: Vec<Complex64> = Vec::new();
        for &q in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
                upper.pop();
            }
            upper.push(q);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() < 3 {
            return Err(Error::InvalidArgument("points are collinear".into()));
        }
        Ok(PlanarLoop { vertices: lower })
    }

    /// Polygon through the given counter-clockwise boundary points.
    pub fn from_vertices(vertices: Vec<Complex64>) -> Result<Self> {
        let l = PlanarLoop { vertices };
        if l.vertices.len() < 3 || l.signed_area() <= 0.0 {
            return Err(Error::InvalidArgument("loop must be counter-clockwise with positive area".into()));
        }
        Ok(l)
    }

    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        (0..v.len()).map(|k| (v[k].conj() * v[(k + 1) % v.len()]).im).sum::<f64>() / 2.0
    }

    pub fn centroid(&self) -> Complex64 {
        let v = &self.vertices;
        let mut acc = c(0.0, 0.0);
        for k in 0..v.len() {
            let (a, b) = (v[k], v[(k + 1) % v.len()]);
            acc += (a + b) * (a.conj() * b).im;
        }
        acc / (6.0 * self.signed_area())
    }

    pub fn perimeter(&self) -> f64 {
        let v = &self.vertices;
        (0..v.len()).map(|k| (v[(k + 1) % v.len()] - v[k]).norm()).sum()
    }

    /// Smallest signed distance from `w` to the edge lines, positive inside.
    pub fn inset(&self, w: Complex64) -> f64 {
        let v = &self.vertices;
        (0..v.len())
            .map(|k| {
                let (a, b) = (v[k], v[(k + 1) % v.len()]);
                cross(a, b, w) / (b - a).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `anchor` to the loop along the ray through `w`.
    pub fn radial_extent(&self, anchor: Complex64, w: Complex64) -> f64 {
        let d = (w - anchor) / (w - anchor).norm();
        let v = &self.vertices;
        let mut best = f64::INFINITY;
        for k in 0..v.len() {
            let (a, b) = (v[k] - anchor, v[(k + 1) % v.len()] - anchor);
            let e = b - a;
            let den = d.re * e.im - d.im * e.re;
            if den.abs() < 1e-300 {
                continue;
            }
            let t = (a.re * e.im - a.im * e.re) / den;
            let s = (a.re * d.im - a.im * d.re) / den;
            if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                best = best.min(t);
            }
        }
        best
    }

    /// Rotates the vertex list to start at `0`, inserting it on an edge if
    /// needed. Fails if `0` is not on the loop.
    fn starting_at_origin(&self) -> Result<Self> {
        let v = &self.vertices;
        let inset = self.inset(c(0.0, 0.0));
        if inset > 1e-9 {
            return Err(Error::Certificate(format!("0 lies inside the shadow (inset {inset:.3e})")));
        }
        if inset < -1e-9 {
            return Err(Error::Certificate(format!("0 lies outside the shadow (inset {inset:.3e})")));
        }
        if let Some(k) = v.iter().position(|z| z.norm() < 1e-12) {
            let mut out = v[k..].to_vec();
            out.extend_from_slice(&v[..k]);
            out[0] = c(0.0, 0.0);
            return Ok(PlanarLoop { vertices: out });
        }
        let k = (0..v.len())
            .min_by(|&i, &j| {
                let dist = |k: usize| {
                    let (a, b) = (v[k], v[(k + 1) % v.len()]);
                    (cross(a, b, c(0.0, 0.0)) / (b - a).norm()).abs()
                };
                dist(i).total_cmp(&dist(j))
            })
            .expect("non-empty");
        let mut out = vec![c(0.0, 0.0)];
        out.extend_from_slice(&v[k + 1..]);
        out.extend_from_slice(&v[..=k]);
        Ok(PlanarLoop { vertices: out })
    }

    /// Point at arclength `s` from the first vertex and the unit tangent there.
    fn at_arclength(&self, s: f64) -> (Complex64, Complex64) {
        let v = &self.vertices;
        let mut rest = s;
        for k in 0..v.len() {
            let (a, b) = (v[k], v[(k + 1) % v.len()]);
            let len = (b - a).norm();
            if rest <= len || k + 1 == v.len() {
                let t = (b - a) / len;
                return (a + t * rest.min(len), t);
            }
            rest -= len;
        }
        unreachable!("loop has vertices")
    }
}

/// Spot-check that the complex tangent hyperplane at `p` leaves the closure:
/// fails on flat complex faces.
fn check_complex_tangent(dom: &DomainSpec, frame: &SupportFrame) -> Result<()> {
    let n = dom.dim();
    let v = &frame.normal;
    for k in 0..n {
        let mut w = numerics::basis(n, k);
        let proj = inner(&w, v);
        w = numerics::along(&w, -proj, v);
        let Some(w) = numerics::normalized(&w).filter(|_| norm(&w) > 1e-6) else { continue };
        for phase in [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)] {
            for eps in [1e-3, 1e-2] {
                let q = numerics::along(&frame.point, phase * eps, &w);
                if dom.defining(&q) <= 1e-14 {
                    return Err(Error::Certificate(format!(
                        "complex tangent hyperplane at p meets the closure at distance {eps} (flat complex face)"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Boundary point of a convex domain maximising `Re⟨z, w⟩`, by pattern
/// search over first-exit directions from the interior witness.
fn support_point(dom: &DomainSpec, w: &[Complex64]) -> Result<CVec> {
    let base = dom.interior_witness().to_vec();
    let objective = |u: &[f64]| -> Result<(f64, CVec)> {
        let dir = numerics::from_real(u);
        let t = first_exit(dom, &base, &dir, 1e-13)?;
        let x = numerics::along(&base, c(t, 0.0), &dir);
        Ok((inner(&x, w).re, x))
    };
    let mut u = numerics::to_real(&numerics::normalized(w).ok_or(Error::ZeroDirection)?);
    let (mut best, mut point) = objective(&u)?;
    let dim = u.len();
    let mut step = 0.25;
    let mut iterations = 0;
    while step > 1e-7 && iterations < 5000 {
        iterations += 1;
        let mut improved = false;
        'dirs: for k in 0..dim {
            for sgn in [1.0, -1.0] {
                let mut cand = u.clone();
                cand[k] += sgn * step;
                let len = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
                cand.iter_mut().for_each(|x| *x /= len);
                let (val, x) = objective(&cand)?;
                if val > best {
                    best = val;
                    point = x;
                    u = cand;
                    improved = true;
                    break 'dirs;
                }
            }
        }
        step = if improved { (1.5 * step).min(0.25) } else { 0.5 * step };
    }
    Ok(point)
}

/// Tuning for the peak-function pipeline.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeakConfig {
    /// Directions of exact support points defining the shadow.
    pub support_directions: usize,
    /// Random boundary samples added to the shadow and used for checks.
    pub boundary_samples: usize,
    pub nodes: usize,
    pub tol: f64,
    pub max_iterations: usize,
    /// Separation is measured at distance `separation_fraction · diam` from p.
    pub separation_fraction: f64,
    pub seed: u64,
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig {
            support_directions: 512,
            boundary_samples: 2000,
            nodes: 512,
            tol: 1e-6,
            max_iterations: 200,
            separation_fraction: 0.1,
            seed: 0x9ea4,
        }
    }
}

/// The planar image `π(Ω)` as a convex loop with `0` as first vertex.
pub fn complex_shadow(dom: &DomainSpec, frame: &SupportFrame, cfg: &PeakConfig) -> Result<PlanarLoop> {
    check_complex_tangent(dom, frame)?;
    let mut images = vec![c(0.0, 0.0)];
    for k in 0..cfg.support_directions {
        let phase = Complex64::from_polar(1.0, TAU * k as f64 / cfg.support_directions as f64);
        let x = support_point(dom, &numerics::scale(&frame.normal, phase))?;
        images.push(frame.project(&x));
    }
    let mut rng = numerics::seeded_rng(cfg.seed);
    for x in dom.sample_boundary(&mut rng, cfg.boundary_samples)? {
        images.push(frame.project(&x));
    }
    PlanarLoop::hull(&images)?.starting_at_origin()
}

/// Quality of a computed Riemann map.
#[derive(Debug, Clone, Serialize)]
pub struct MapQuality {
    pub iterations: usize,
    pub residual: f64,
    /// `max ||ψ| − 1|` at boundary points between nodes.
    pub unimodularity: f64,
    pub winding: f64,
    /// `|ψ(anchor)|` relative to the normalisation; 0 for an exact map.
    pub anchor_residual: f64,
}

/// Conformal map `ψ` of a convex loop onto the unit disc with `ψ(0) = 1`
/// and `ψ(anchor) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct RiemannMapData {
    pub shadow: PlanarLoop,
    pub anchor: Complex64,
    pub nodes: Vec<Complex64>,
    /// `dz` weights of the periodic trapezoidal rule.
    #[serde(skip)]
    weights: Vec<Complex64>,
    /// Boundary values at the nodes.
    pub values: Vec<Complex64>,
    pub quality: MapQuality,
}

impl RiemannMapData {
    /// `ψ(w)`; points outside the loop are first moved radially onto it.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let w = if self.shadow.inset(w) < 0.0 && w != self.anchor {
            let r = self.shadow.radial_extent(self.anchor, w);
            self.anchor + (w - self.anchor) / (w - self.anchor).norm() * r
        } else {
            w
        };
        self.barycentric(w)
    }

    /// Barycentric Cauchy formula on the boundary values.
    fn barycentric(&self, w: Complex64) -> Complex64 {
        let mut num = c(0.0, 0.0);
        let mut den = c(0.0, 0.0);
        for ((z, dz), f) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = z - w;
            if d.norm() < 1e-14 {
                return *f;
            }
            num += f * dz / d;
            den += dz / d;
        }
        num / den
    }
}

/// Riemann map of a convex loop with `0` on it. The Green function with pole
/// at the centroid `a` gives `f = (z − a) exp(−h)` with `Re h = log|z − a|` on
/// the loop; `h` is a Cauchy integral of a real density solved by fixed-point
/// iteration of its Nyström discretisation on `nodes` corner-graded
/// nodes. Interior values use the barycentric Cauchy formula; `ψ = f/f(0)`.
pub fn riemann_map(shadow: &PlanarLoop, nodes: usize, tol: f64, max_iterations: usize) -> Result<RiemannMapData> {
    let shadow = shadow.starting_at_origin()?;
    let anchor = shadow.centroid();
    let grading = Grading::new(&shadow);
    let (pts, weights): (Vec<Complex64>, Vec<Complex64>) = (0..nodes).map(|j| grading.node(j as f64 / nodes as f64, nodes)).unzip();
    let midpoints: Vec<Complex64> = (0..nodes).map(|j| grading.node((j as f64 + 0.5) / nodes as f64, nodes).0).collect();
    let g: Vec<f64> = pts.iter().map(|z| (z - anchor).norm().ln()).collect();
    let kernel: Vec<Vec<f64>> = (0..nodes)
        .map(|i| (0..nodes).map(|j| if i == j { 0.0 } else { (weights[j] / (pts[j] - pts[i])).im / TAU }).collect())
        .collect();
    let mut mu = g.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let next: Vec<f64> = (0..nodes)
            .map(|i| g[i] - kernel[i].iter().zip(&mu).map(|(k, m)| k * (m - mu[i])).sum::<f64>())
            .collect();
        residual = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        mu = next;
        if residual <= tol {
            break;
        }
    }
    if residual > tol {
        return Err(Error::NoConvergence { what: "Riemann map density iteration".into(), residual });
    }
    let h: Vec<Complex64> = (0..nodes)
        .map(|i| {
            let mut s = c(0.0, 0.0);
            for j in 0..nodes {
                if j != i {
                    s += weights[j] * (mu[j] - mu[i]) / (pts[j] - pts[i]);
                }
            }
            let derivative = (mu[(i + 1) % nodes] - mu[(i + nodes - 1) % nodes]) / 2.0;
            c(mu[i], 0.0) + (s + derivative) / c(0.0, TAU)
        })
        .collect();
    let raw: Vec<Complex64> = pts.iter().zip(&h).map(|(z, hz)| (z - anchor) * (-hz).exp()).collect();
    let rotation = raw[0] / raw[0].norm();
    let values: Vec<Complex64> = raw.iter().map(|f| f / rotation).collect();
    let mut data = RiemannMapData {
        shadow,
        anchor,
        nodes: pts,
        weights,
        values,
        quality: MapQuality { iterations, residual, unimodularity: 0.0, winding: 0.0, anchor_residual: 0.0 },
    };
    data.values[0] = c(1.0, 0.0);
    let winding = (0..nodes).map(|j| (data.values[(j + 1) % nodes] / data.values[j]).arg()).sum::<f64>() / TAU;
    let unimodularity = midpoints.iter().map(|mid| (data.barycentric(*mid).norm() - 1.0).abs()).fold(0.0, f64::max);
    data.quality.winding = winding;
    data.quality.unimodularity = unimodularity;
    data.quality.anchor_residual = data.barycentric(anchor).norm();
    Ok(data)
}

/// Arclength reparametrisation concentrating nodes near corners: the node
/// density is `1 + Σ A exp(−(d/w)²)` over vertices turning by more than
/// `CORNER_ANGLE`, with `d` the periodic arclength distance.
struct Grading<'a> {
    shadow: &'a PlanarLoop,
    /// `(s, G(s))` on a fine grid, `G` the cumulative density.
    table: Vec<(f64, f64)>,
    corners: Vec<f64>,
    length: f64,
}

const CORNER_ANGLE: f64 = 0.2;
const CORNER_BOOST: f64 = 15.0;
const CORNER_WIDTH: f64 = 0.02;
const GRADING_GRID: usize = 20_000;

impl<'a> Grading<'a> {
    fn new(shadow: &'a PlanarLoop) -> Self {
        let v = &shadow.vertices;
        let length = shadow.perimeter();
        let mut corners = Vec::new();
        let mut s = 0.0;
        for k in 0..v.len() {
            let prev = v[k] - v[(k + v.len() - 1) % v.len()];
            let next = v[(k + 1) % v.len()] - v[k];
            if (next / prev).arg().abs() > CORNER_ANGLE {
                corners.push(s);
            }
            s += next.norm();
        }
        let mut g = Grading { shadow, table: Vec::with_capacity(GRADING_GRID + 1), corners, length };
        let ds = length / GRADING_GRID as f64;
        let mut acc = 0.0;
        g.table.push((0.0, 0.0));
        for i in 1..=GRADING_GRID {
            let (a, b) = ((i - 1) as f64 * ds, i as f64 * ds);
            acc += 0.5 * ds * (g.density(a) + g.density(b));
            g.table.push((b, acc));
        }
        g
    }

    fn density(&self, s: f64) -> f64 {
        let w = CORNER_WIDTH * self.length;
        1.0 + self
            .corners
            .iter()
            .map(|sc| {
                let d = (s - sc).abs();
                let d = d.min(self.length - d);
                CORNER_BOOST * (-(d / w).powi(2)).exp()
            })
            .sum::<f64>()
    }

    /// Point and trapezoidal weight `z′(t)/nodes` at parameter `t ∈ [0, 1)`.
    fn node(&self, t: f64, nodes: usize) -> (Complex64, Complex64) {
        let total = self.table.last().expect("non-empty").1;
        let target = t * total;
        let k = self.table.partition_point(|(_, g)| *g < target).clamp(1, self.table.len() - 1);
        let ((s0, g0), (s1, g1)) = (self.table[k - 1], self.table[k]);
        let s = if g1 > g0 { s0 + (s1 - s0) * (target - g0) / (g1 - g0) } else { s0 };
        let step = total / self.density(s) / nodes as f64;
        let wrap = |x: f64| x.rem_euclid(self.length);
        let (z, _) = self.shadow.at_arclength(s);
        let half = 0.5 * step;
        let chord = (self.shadow.at_arclength(wrap(s + half)).0 - self.shadow.at_arclength(wrap(s - half)).0) / (2.0 * half);
        (z, chord * step)
    }
}

/// Peak function `u(z) = Re ψ(π(z)) − 1` with holomorphic peak
/// `g = exp(ψ∘π − 1)`.
#[derive(Debug, Clone, Serialize)]
pub struct PeakFunction {
    pub frame: SupportFrame,
    pub map: RiemannMapData,
    pub diameter: f64,
    /// `−max u` over boundary samples at distance `≥ separation_fraction·diam`
    /// from `p`, for the configured sample count.
    pub eta: f64,
    /// The same with twice as many samples.
    pub eta_doubled: f64,
    /// `max u` over all samples other than `p`.
    pub max_off_peak: f64,
    pub value_at_peak: f64,
    /// Smallest Hessian eigenvalue of `u` at interior samples.
    pub hessian_min: f64,
}

impl PeakFunction {
    pub fn u(&self, z: &[Complex64]) -> f64 {
        self.map.eval(self.frame.project(z)).re - 1.0
    }

    pub fn holomorphic_peak(&self, z: &[Complex64]) -> Complex64 {
        (self.map.eval(self.frame.project(z)) - 1.0).exp()
    }

    /// `|η_doubled / η − 1|`.
    pub fn eta_drift(&self) -> f64 {
        (self.eta_doubled / self.eta - 1.0).abs()
    }
}

/// `−sup u` over boundary points at distance `≥ radius` from `p`: the best
/// samples are refined by pattern search over exit directions from the
/// interior witness, rejecting candidates closer than `radius`.
fn separation(pf: &PeakFunction, dom: &DomainSpec, samples: &[CVec], radius: f64) -> Result<f64> {
    let p = &pf.frame.point;
    let far = |x: &[Complex64]| norm(&numerics::sub(x, p)) >= radius;
    let mut ranked: Vec<(f64, &CVec)> = samples.iter().filter(|x| far(x)).map(|x| (pf.u(x), x)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let base = dom.interior_witness().to_vec();
    let mut best = f64::NEG_INFINITY;
    for (value, start) in ranked.into_iter().take(SEPARATION_STARTS) {
        let mut dir = numerics::to_real(&numerics::normalized(&numerics::sub(start, &base)).ok_or(Error::ZeroDirection)?);
        let mut current = value;
        let mut step = 0.05;
        let mut iterations = 0;
        while step > 1e-6 && iterations < 2000 {
            iterations += 1;
            let mut improved = false;
            'dirs: for k in 0..dir.len() {
                for sgn in [1.0, -1.0] {
                    let mut cand = dir.clone();
                    cand[k] += sgn * step;
                    let len = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
                    cand.iter_mut().for_each(|x| *x /= len);
                    let u = numerics::from_real(&cand);
                    let t = first_exit(dom, &base, &u, 1e-13)?;
                    let x = numerics::along(&base, c(t, 0.0), &u);
                    let v = pf.u(&x);
                    if far(&x) && v > current {
                        current = v;
                        dir = cand;
                        improved = true;
                        break 'dirs;
                    }
                }
            }
            step = if improved { (1.5 * step).min(0.05) } else { 0.5 * step };
        }
        best = best.max(current);
    }
    Ok(-best)
}

const SEPARATION_STARTS: usize = 8;

/// Runs the full pipeline at `p` and validates the peak properties.
pub fn peak_function(dom: &DomainSpec, p: &[Complex64], cfg: &PeakConfig) -> Result<PeakFunction> {
    let frame = support_frame(dom, p, cfg.seed)?;
    let shadow = complex_shadow(dom, &frame, cfg)?;
    let map = riemann_map(&shadow, cfg.nodes, cfg.tol, cfg.max_iterations)?;
    if map.quality.unimodularity > 1e-3 || (map.quality.winding - 1.0).abs() > 1e-6 {
        return Err(Error::Certificate(format!("Riemann map quality too low: {:?}", map.quality)));
    }
    let mut rng = numerics::seeded_rng(cfg.seed ^ 0x5eed);
    let boundary = dom.sample_boundary(&mut rng, 2 * cfg.boundary_samples)?;
    let interior = dom.sample_interior(&mut rng, cfg.boundary_samples);
    let diameter = boundary
        .iter()
        .step_by(4)
        .flat_map(|a| boundary.iter().step_by(4).map(move |b| norm(&numerics::sub(a, b))))
        .fold(0.0, f64::max);
    let mut pf = PeakFunction {
        frame,
        map,
        diameter,
        eta: 0.0,
        eta_doubled: 0.0,
        max_off_peak: 0.0,
        value_at_peak: 0.0,
        hessian_min: 0.0,
    };
    pf.value_at_peak = pf.u(p);
    let radius = cfg.separation_fraction * diameter;
    pf.eta = separation(&pf, dom, &boundary[..cfg.boundary_samples], radius)?;
    pf.eta_doubled = separation(&pf, dom, &boundary, radius)?;
    pf.max_off_peak = boundary
        .iter()
        .chain(&interior)
        .filter(|x| norm(&numerics::sub(x, p)) > 1e-9)
        .map(|x| pf.u(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let u = |z: &[Complex64]| pf.u(z);
    pf.hessian_min = interior
        .iter()
        .take(20)
        .filter(|z| dom.defining(z) < -0.05)
        .map(|z| min_eigenvalue(&complex_hessian(&u, z, HESSIAN_STEP)))
        .fold(f64::INFINITY, f64::min);
    if pf.value_at_peak.abs() > 1e-6 {
        return Err(Error::Certificate(format!("u(p) = {:.3e} is not 0", pf.value_at_peak)));
    }
    if !(pf.eta > 0.0) || !(pf.max_off_peak < 0.0) {
        return Err(Error::Certificate(format!(
            "no strict peak: separation η = {:.3e}, max u off p = {:.3e}",
            pf.eta, pf.max_off_peak
        )));
    }
    Ok(pf)
}

/// Explicit map of the upper half-disc onto the unit disc:
/// `z ↦ ((1+z)/(1−z))²` onto the upper half-plane, then the Cayley map.
pub fn half_disc_map(z: Complex64) -> Complex64 {
    let s = ((1.0 + z) / (1.0 - z)).powi(2);
    (s - Complex64::i()) / (s + Complex64::i())
}

/// Boundary polygon of the upper half-disc with `arc_points` points on the
/// arc, counter-clockwise, containing `0`.
pub fn half_disc_loop(arc_points: usize) -> PlanarLoop {
    let mut v: Vec<Complex64> = (0..=arc_points).map(|k| Complex64::from_polar(1.0, PI * k as f64 / arc_points as f64)).collect();
    v.push(c(0.0, 0.0));
    PlanarLoop { vertices: v }
}

/// Random point of the unit disc.
pub fn random_disc_point<R: Rng>(rng: &mut R) -> Complex64 {
    numerics::random_in_ball(rng, &[c(0.0, 0.0)], 1.0)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc_loop(center: Complex64, radius: f64, count: usize) -> PlanarLoop {
        PlanarLoop::from_vertices((0..count).map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / count as f64)).collect()).unwrap()
    }

    #[test]
    fn hull_and_polygon_geometry() {
        let square = PlanarLoop::hull(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.5, 0.5), c(0.5, 0.0)]).unwrap();
        assert_eq!(square.vertices.len(), 4);
        assert!((square.signed_area() - 1.0).abs() < 1e-15);
        assert!((square.centroid() - c(0.5, 0.5)).norm() < 1e-15);
        assert!((square.inset(c(0.5, 0.25)) - 0.25).abs() < 1e-15);
        assert!((square.radial_extent(c(0.5, 0.5), c(0.9, 0.5)) - 0.5).abs() < 1e-15);
        let shifted = PlanarLoop::from_vertices(vec![c(-1.0, -1.0), c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 1.0)]).unwrap();
        let s = shifted.starting_at_origin().unwrap();
        assert_eq!(s.vertices[0], c(0.0, 0.0));
        assert_eq!(s.vertices.len(), 5);
        assert!(matches!(square.starting_at_origin().map(|_| ()), Ok(())));
        assert!(disc_loop(c(0.0, 0.0), 1.0, 64).starting_at_origin().is_err());
    }

    #[test]
    fn shifted_disc_maps_by_translation() {
        let map = riemann_map(&disc_loop(c(-1.0, 0.0), 1.0, 2048), 512, 1e-10, 200).unwrap();
        assert_eq!(map.eval(c(0.0, 0.0)), c(1.0, 0.0));
        assert!((map.quality.winding - 1.0).abs() < 1e-9 && map.quality.unimodularity < 1e-4, "{:?}", map.quality);
        let mut rng = numerics::seeded_rng(3);
        for _ in 0..200 {
            let w = random_disc_point(&mut rng) - 1.0;
            assert!((map.eval(w) - (w + 1.0)).norm() < 1e-4, "{w}: {}", map.eval(w));
        }
    }

    #[test]
    fn half_disc_matches_the_explicit_map() {
        let map = riemann_map(&half_disc_loop(2048), 512, 1e-10, 200).unwrap();
        let anchor = half_disc_map(map.anchor);
        let at_zero = half_disc_map(c(0.0, 0.0));
        let moebius = |s: Complex64| (s - anchor) / (1.0 - anchor.conj() * s);
        let lambda = moebius(at_zero).conj();
        let mut rng = numerics::seeded_rng(4);
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let w = random_disc_point(&mut rng);
            let w = c(w.re, w.im.abs());
            worst = worst.max((map.eval(w) - lambda * moebius(half_disc_map(w))).norm());
        }
        assert!(worst < 1e-3, "{worst}");
        assert!(map.quality.unimodularity < 1e-3 && (map.quality.winding - 1.0).abs() < 1e-9, "{:?}", map.quality);
    }

    #[test]
    fn ellipse_map_meets_quality_bounds() {
        let ellipse = PlanarLoop::from_vertices((0..1024).map(|k| {
            let t = TAU * k as f64 / 1024.0;
            c(-2.0 + 2.0 * t.cos(), 0.6 * t.sin())
        }).collect()).unwrap();
        let map = riemann_map(&ellipse, 512, 1e-10, 200).unwrap();
        assert!(map.quality.unimodularity < 1e-3 && (map.quality.winding - 1.0).abs() < 1e-9 && map.quality.anchor_residual < 1e-6, "{:?}", map.quality);
    }

    #[test]
    fn ball_peak_is_real_part() {
        let ball = DomainSpec::ball(2, 1.0).unwrap();
        let p = [c(1.0, 0.0), c(0.0, 0.0)];
        let frame = support_frame(&ball, &p, 1).unwrap();
        assert!(norm(&numerics::sub(&frame.normal, &p)) < 1e-8);
        let cfg = PeakConfig { boundary_samples: 500, ..Default::default() };
        let pf = peak_function(&ball, &p, &cfg).unwrap();
        let mut rng = numerics::seeded_rng(11);
        for z in ball.sample_interior(&mut rng, 200) {
            assert!((pf.u(&z) - (z[0].re - 1.0)).abs() < 1e-3);
        }
        assert!(pf.value_at_peak.abs() < 1e-12 && pf.hessian_min > -1e-6, "{} {}", pf.value_at_peak, pf.hessian_min);
    }

    #[test]
    fn flat_face_is_rejected() {
        let poly = DomainSpec::polydisc(2).unwrap();
        let p = [c(1.0, 0.0), c(0.0, 0.0)];
        let err = peak_function(&poly, &p, &PeakConfig { support_directions: 16, boundary_samples: 100, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::Certificate(_)), "{err:?}");
        assert!(matches!(support_frame(&DomainSpec::cone_source(), &[c(0.0, 0.0), c(0.0, 0.0)], 1), Err(Error::NotConvex(_))));
    }

    #[test]
    fn lens_peaks_are_strict_and_stable() {
        let lens = DomainSpec::lens(2).unwrap();
        for p in [[c(-0.5, 0.0), c(0.0, 0.0)], [c(0.3, 0.0), c(0.0, (1.0f64 - 0.09).sqrt())]] {
            let pf = peak_function(&lens, &p, &PeakConfig::default()).unwrap();
            assert!(pf.value_at_peak.abs() < 1e-6 && pf.eta > 0.0 && pf.max_off_peak < 0.0);
            assert!(pf.eta_drift() < 0.2, "η = {} vs {}", pf.eta, pf.eta_doubled);
            assert!(pf.hessian_min > -1e-6, "{}", pf.hessian_min);
        }
    }
}
