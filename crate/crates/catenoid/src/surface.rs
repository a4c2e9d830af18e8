//! Surface realization: evaluating Weierstrass data into points of the
//! minimal immersion, contour-integration oracles (flux, residue weights,
//! period closure), the induced metric, and mesh export.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fluxmodel::{inverse_stereographic, ExtComplex};
use crate::residues::WeierstrassData;

/// Absolute tolerance for adaptive path quadrature.
const QUAD_TOL: f64 = 1e-10;
/// Recursion depth cap for segment subdivision.
const QUAD_MAX_DEPTH: usize = 24;
/// Recursion depth cap for obstacle-avoiding path planning.
const PATH_MAX_DEPTH: usize = 16;
/// A point this close to a puncture counts as sitting on it.
const PUNCTURE_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("evaluation point coincides with puncture {0}")]
    AtPuncture(usize),
    #[error("no puncture-avoiding integration path found")]
    PathBlocked,
    #[error("end {0} is at infinity")]
    InfiniteEnd(usize),
    #[error("invalid sampling configuration: {0}")]
    BadConfig(String),
    #[error("mesh sink failure")]
    SinkFailure(#[from] std::io::Error),
}

fn default_contour_samples() -> usize {
    1024
}

/// Sampling parameters for mesh construction and the contour oracles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Integration base point; the immersion is translated so it maps to
    /// the origin. Must stay clear of all punctures.
    #[serde(with = "crate::polyalg::serde_complex")]
    pub base_point: Complex64,
    /// Log-polar depth of each end patch: the annulus spans radii
    /// `r_out * exp(-end_truncation) ..= r_out`.
    pub end_truncation: f64,
    pub radial_steps: usize,
    pub angular_steps: usize,
    pub grid_steps: usize,
    #[serde(default = "default_contour_samples")]
    pub contour_samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            base_point: Complex64::new(0.73, 0.21),
            end_truncation: 2.0,
            radial_steps: 6,
            angular_steps: 24,
            grid_steps: 16,
            contour_samples: 1024,
        }
    }
}

/// Triangulated truncated image of the immersion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// End index for vertices inside an end patch, `None` in the bulk.
    pub end_labels: Vec<Option<usize>>,
    /// Unit normals from the Gauss map.
    pub gauss_values: Vec<[f64; 3]>,
}

// --- evaluation ---------------------------------------------------------------

fn finite_punctures(w: &WeierstrassData) -> Vec<(usize, Complex64)> {
    w.punctures
        .iter()
        .enumerate()
        .filter_map(|(j, q)| q.as_finite().map(|z| (j, z)))
        .collect()
}

fn check_not_puncture(w: &WeierstrassData, z: Complex64) -> Result<(), SurfaceError> {
    for (j, q) in finite_punctures(w) {
        if (z - q).norm() < PUNCTURE_EPS * (1.0 + q.norm()) {
            return Err(SurfaceError::AtPuncture(j));
        }
    }
    Ok(())
}

/// The Gauss map and the density of the height differential at `z`.
pub fn eval_weierstrass(
    w: &WeierstrassData,
    z: Complex64,
) -> Result<(ExtComplex, Complex64), SurfaceError> {
    check_not_puncture(w, z)?;
    let num = w.p.eval(z);
    let den = w.q.eval(z);
    let g = if den.norm() <= 1e-14 * num.norm() {
        ExtComplex::Infinity
    } else {
        ExtComplex::Finite(num / den)
    };
    let ratio = den / w.r.eval(z);
    Ok((g, -(ratio * ratio)))
}

/// Densities of the three coordinate differentials
/// `((1 - g^2) omega, i (1 + g^2) omega, 2 g omega)`, computed from the
/// defining polynomials so poles of `g` never meet zeros of `omega`
/// head-on.
fn coordinate_densities(w: &WeierstrassData, z: Complex64) -> [Complex64; 3] {
    let p = w.p.eval(z);
    let q = w.q.eval(z);
    let r2 = {
        let r = w.r.eval(z);
        r * r
    };
    let i = Complex64::new(0.0, 1.0);
    [
        (p * p - q * q) / r2,
        -i * (p * p + q * q) / r2,
        -2.0 * p * q / r2,
    ]
}

// --- quadrature ---------------------------------------------------------------

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
const K15_NODES: [f64; 15] = [
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];
const K15_WEIGHTS: [f64; 15] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];
// Gauss-7 shares every second Kronrod node (indices 1, 3, ..., 13).
const G7_WEIGHTS: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

type Triple = [Complex64; 3];

fn triple_add(a: Triple, b: Triple) -> Triple {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// One Gauss-Kronrod panel over the straight segment; returns the Kronrod
/// value and the embedded-Gauss error estimate.
fn gk_panel<F: Fn(Complex64) -> Triple>(f: &F, za: Complex64, zb: Complex64) -> (Triple, f64) {
    let mid = (za + zb) / 2.0;
    let half = (zb - za) / 2.0;
    let mut k = [Complex64::default(); 3];
    let mut g = [Complex64::default(); 3];
    for (i, (&x, &wk)) in K15_NODES.iter().zip(&K15_WEIGHTS).enumerate() {
        let v = f(mid + half * x);
        for c in 0..3 {
            k[c] += wk * v[c];
        }
        if i % 2 == 1 {
            let wg = G7_WEIGHTS[i / 2];
            for c in 0..3 {
                g[c] += wg * v[c];
            }
        }
    }
    let mut err = 0.0;
    for c in 0..3 {
        k[c] *= half;
        g[c] *= half;
        err += (k[c] - g[c]).norm();
    }
    (k, err)
}

fn integrate_segment<F: Fn(Complex64) -> Triple>(
    f: &F,
    za: Complex64,
    zb: Complex64,
    tol: f64,
    depth: usize,
) -> Triple {
    let (k, err) = gk_panel(f, za, zb);
    if err <= tol || depth == 0 {
        return k;
    }
    let mid = (za + zb) / 2.0;
    triple_add(
        integrate_segment(f, za, mid, tol / 2.0, depth - 1),
        integrate_segment(f, mid, zb, tol / 2.0, depth - 1),
    )
}

// --- path planning ------------------------------------------------------------

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Piecewise-linear path from `from` to `to` keeping clear of the
/// obstacle disks, built by recursive perpendicular detours.
fn plan_path(
    from: Complex64,
    to: Complex64,
    obstacles: &[(Complex64, f64)],
    depth: usize,
) -> Result<Vec<Complex64>, SurfaceError> {
    for &(c, r) in obstacles {
        if point_segment_distance(c, from, to) < r {
            if depth == 0 {
                return Err(SurfaceError::PathBlocked);
            }
            // Detour perpendicular to the segment past the disk; search
            // both sides and several offsets for a waypoint clear of all
            // obstacle disks.
            let dir = to - from;
            let len2 = dir.norm_sqr().max(f64::MIN_POSITIVE);
            let t = (((c - from) * dir.conj()).re / len2).clamp(0.0, 1.0);
            let proj = from + dir * t;
            let normal = Complex64::new(0.0, 1.0) * dir / dir.norm();
            let clearance = |m: Complex64| {
                obstacles
                    .iter()
                    .map(|&(oc, or)| (m - oc).norm() - or)
                    .fold(f64::INFINITY, f64::min)
            };
            let mut mid = proj + normal * (1.8 * r);
            let mut best = clearance(mid);
            for &scale in &[1.8, 2.6, 3.6, 5.0] {
                for &sign in &[1.0, -1.0] {
                    let m = proj + normal * (scale * r * sign);
                    let score = clearance(m);
                    if score > best {
                        best = score;
                        mid = m;
                    }
                }
            }
            if best <= 0.0 {
                return Err(SurfaceError::PathBlocked);
            }
            let mut left = plan_path(from, mid, obstacles, depth - 1)?;
            let right = plan_path(mid, to, obstacles, depth - 1)?;
            left.extend_from_slice(&right[1..]);
            return Ok(left);
        }
    }
    Ok(vec![from, to])
}

fn obstacle_disks(w: &WeierstrassData, endpoints: &[Complex64]) -> Vec<(Complex64, f64)> {
    let finite = finite_punctures(w);
    finite
        .iter()
        .map(|&(_, q)| {
            let mut r = finite
                .iter()
                .filter(|&&(_, other)| (other - q).norm() > PUNCTURE_EPS)
                .map(|&(_, other)| (other - q).norm() / 2.0)
                .fold(f64::INFINITY, f64::min);
            if !r.is_finite() {
                r = 1.0 + q.norm();
            }
            // Shrink so neither endpoint is swallowed by its disk.
            for &e in endpoints {
                r = r.min(0.9 * (e - q).norm());
            }
            (q, r)
        })
        .collect()
}

/// A point of the immersion: the real part of the path integral of the
/// coordinate differentials from the base point, along a puncture-avoiding
/// polyline. The image of the base point is the origin.
pub fn integrate_point(
    w: &WeierstrassData,
    z: Complex64,
    cfg: &SamplingConfig,
) -> Result<[f64; 3], SurfaceError> {
    check_not_puncture(w, z)?;
    check_not_puncture(w, cfg.base_point)?;
    let obstacles = obstacle_disks(w, &[cfg.base_point, z]);
    let path = plan_path(cfg.base_point, z, &obstacles, PATH_MAX_DEPTH)?;
    let f = |z| coordinate_densities(w, z);
    let mut total = [Complex64::default(); 3];
    for seg in path.windows(2) {
        total = triple_add(total, integrate_segment(&f, seg[0], seg[1], QUAD_TOL, QUAD_MAX_DEPTH));
    }
    Ok([total[0].re, total[1].re, total[2].re])
}

/// Contour radius around end `j`: half the distance to the nearest other
/// puncture, capped by the configured end truncation.
fn contour_radius(w: &WeierstrassData, q: Complex64, cfg: &SamplingConfig) -> f64 {
    let finite = finite_punctures(w);
    let mut r = finite
        .iter()
        .filter(|&&(_, other)| (other - q).norm() > PUNCTURE_EPS)
        .map(|&(_, other)| (other - q).norm() / 2.0)
        .fold(f64::INFINITY, f64::min);
    if !r.is_finite() {
        r = 1.0 + q.norm();
    }
    r.min(cfg.end_truncation)
}

/// Trapezoid quadrature of `f` around the circle `|z - c| = r`,
/// counterclockwise. Spectrally accurate for integrands analytic on the
/// circle.
fn contour_integral<F: Fn(Complex64) -> Triple>(
    f: &F,
    c: Complex64,
    r: f64,
    samples: usize,
) -> Triple {
    let mut acc = [Complex64::default(); 3];
    let step = std::f64::consts::TAU / samples as f64;
    for k in 0..samples {
        let w = Complex64::from_polar(r, k as f64 * step);
        let dz = Complex64::new(0.0, 1.0) * w * step;
        let v = f(c + w);
        for i in 0..3 {
            acc[i] += v[i] * dz;
        }
    }
    acc
}

/// Flux vector of end `j` by direct contour quadrature of the coordinate
/// differentials. The end at infinity is enclosed by a large circle
/// traversed with reversed orientation.
pub fn contour_flux(w: &WeierstrassData, j: usize, cfg: &SamplingConfig) -> [f64; 3] {
    let f = |z| coordinate_densities(w, z);
    let loop_integral = match w.punctures[j] {
        ExtComplex::Finite(q) => {
            contour_integral(&f, q, contour_radius(w, q, cfg), cfg.contour_samples)
        }
        ExtComplex::Infinity => {
            let rad = 2.0
                + 2.0
                    * finite_punctures(w)
                        .iter()
                        .map(|&(_, q)| q.norm())
                        .fold(0.0, f64::max);
            let big = contour_integral(&f, Complex64::default(), rad, cfg.contour_samples);
            [-big[0], -big[1], -big[2]]
        }
    };
    [
        -loop_integral[0].im,
        -loop_integral[1].im,
        -loop_integral[2].im,
    ]
}

/// Residue triple `(1/2pi i) (∮omega, ∮g omega, ∮g^2 omega)` around a
/// finite end, by contour quadrature; the numerical counterpart of the
/// closed-form residues.
pub fn contour_residues(
    w: &WeierstrassData,
    j: usize,
    cfg: &SamplingConfig,
) -> Result<(Complex64, Complex64, Complex64), SurfaceError> {
    let q = w.punctures[j]
        .as_finite()
        .ok_or(SurfaceError::InfiniteEnd(j))?;
    let f = |z: Complex64| {
        let p = w.p.eval(z);
        let qq = w.q.eval(z);
        let r2 = {
            let r = w.r.eval(z);
            r * r
        };
        [-qq * qq / r2, -p * qq / r2, -p * p / r2]
    };
    let acc = contour_integral(&f, q, contour_radius(w, q, cfg), cfg.contour_samples);
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
    Ok((acc[0] / two_pi_i, acc[1] / two_pi_i, acc[2] / two_pi_i))
}

/// The second-order Laurent coefficient of `omega dg` at end `j`: the
/// end's weight. Extracted as `(1/2pi i) ∮ (z - q_j) omega g'(z) dz`.
pub fn hopf_weight(
    w: &WeierstrassData,
    j: usize,
    cfg: &SamplingConfig,
) -> Result<f64, SurfaceError> {
    let q = w.punctures[j]
        .as_finite()
        .ok_or(SurfaceError::InfiniteEnd(j))?;
    let dp = w.p.derivative();
    let dq = w.q.derivative();
    // omega g' = -(P'Q - PQ') / R^2
    let f = |z: Complex64| {
        let r2 = {
            let r = w.r.eval(z);
            r * r
        };
        let h = -(dp.eval(z) * w.q.eval(z) - w.p.eval(z) * dq.eval(z)) / r2;
        [(z - q) * h, Complex64::default(), Complex64::default()]
    };
    let acc = contour_integral(&f, q, contour_radius(w, q, cfg), cfg.contour_samples);
    let coeff = acc[0] / Complex64::new(0.0, std::f64::consts::TAU);
    Ok(coeff.re)
}

/// Density of the induced metric, `(|P|^2 + |Q|^2)^2 / |R|^4`; the
/// polynomial form stays finite across poles of the Gauss map.
pub fn metric_density(w: &WeierstrassData, z: Complex64) -> Result<f64, SurfaceError> {
    check_not_puncture(w, z)?;
    let p = w.p.eval(z).norm_sqr();
    let q = w.q.eval(z).norm_sqr();
    let r = w.r.eval(z).norm_sqr();
    Ok((p + q) * (p + q) / (r * r))
}

// --- meshing ------------------------------------------------------------------

fn gauss_normal(w: &WeierstrassData, z: Complex64) -> [f64; 3] {
    let num = w.p.eval(z);
    let den = w.q.eval(z);
    let g = if den.norm() <= 1e-14 * num.norm() {
        ExtComplex::Infinity
    } else {
        ExtComplex::Finite(num / den)
    };
    inverse_stereographic(g)
}

struct MeshBuilder<'a> {
    w: &'a WeierstrassData,
    cfg: &'a SamplingConfig,
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    end_labels: Vec<Option<usize>>,
    gauss_values: Vec<[f64; 3]>,
}

impl<'a> MeshBuilder<'a> {
    fn push_vertex(
        &mut self,
        z: Complex64,
        base: [f64; 3],
        label: Option<usize>,
    ) -> usize {
        self.vertices.push(base);
        self.end_labels.push(label);
        self.gauss_values.push(gauss_normal(self.w, z));
        self.vertices.len() - 1
    }

    /// Log-polar annulus patch around a finite puncture. Vertex values
    /// are integrated incrementally along a tree: one anchored spoke from
    /// the base point, then ring and radial steps — each a short segment
    /// clear of the puncture.
    fn end_patch(&mut self, j: usize, q: Complex64) -> Result<(), SurfaceError> {
        let cfg = self.cfg;
        let r_out = contour_radius(self.w, q, cfg);
        let nr = cfg.radial_steps;
        let na = cfg.angular_steps;
        let anchor_z = q + Complex64::from_polar(r_out, 0.0);
        let anchor_x = integrate_point(self.w, anchor_z, cfg)?;
        let f = |z| coordinate_densities(self.w, z);
        let mut ring_ids: Vec<usize> = Vec::with_capacity(na);
        let mut prev_ring: Vec<(Complex64, [f64; 3])> = Vec::with_capacity(na);
        // Outermost ring, walked around from the anchor.
        let mut x = anchor_x;
        let mut z_prev = anchor_z;
        for k in 0..na {
            let theta = k as f64 * std::f64::consts::TAU / na as f64;
            let z = q + Complex64::from_polar(r_out, theta);
            if k > 0 {
                let seg = integrate_segment(&f, z_prev, z, QUAD_TOL, QUAD_MAX_DEPTH);
                for c in 0..3 {
                    x[c] += seg[c].re;
                }
            }
            ring_ids.push(self.push_vertex(z, x, Some(j)));
            prev_ring.push((z, x));
            z_prev = z;
        }
        let mut prev_ids = ring_ids;
        // Inner rings, each vertex stepped radially from the ring above.
        for step in 1..=nr {
            let r = r_out * (-(step as f64) * cfg.end_truncation / nr as f64).exp();
            let mut ids = Vec::with_capacity(na);
            let mut ring = Vec::with_capacity(na);
            for k in 0..na {
                let theta = k as f64 * std::f64::consts::TAU / na as f64;
                let z = q + Complex64::from_polar(r, theta);
                let (z_up, x_up) = prev_ring[k];
                let seg = integrate_segment(&f, z_up, z, QUAD_TOL, QUAD_MAX_DEPTH);
                let mut x = x_up;
                for c in 0..3 {
                    x[c] += seg[c].re;
                }
                ids.push(self.push_vertex(z, x, Some(j)));
                ring.push((z, x));
            }
            for k in 0..na {
                let k1 = (k + 1) % na;
                self.triangles.push([prev_ids[k], prev_ids[k1], ids[k]]);
                self.triangles.push([prev_ids[k1], ids[k1], ids[k]]);
            }
            prev_ids = ids;
            prev_ring = ring;
        }
        Ok(())
    }

    /// Annulus patch for the end at infinity, laid out in the coordinate
    /// u = 1/z around u = 0.
    fn infinity_patch(&mut self, j: usize) -> Result<(), SurfaceError> {
        let cfg = self.cfg;
        let max_q = finite_punctures(self.w)
            .iter()
            .map(|&(_, q)| q.norm())
            .fold(0.0, f64::max);
        let r_in_z = 2.0 + 2.0 * max_q; // innermost circle in z
        let u_out = 1.0 / r_in_z;
        let nr = cfg.radial_steps;
        let na = cfg.angular_steps;
        let f = |z| coordinate_densities(self.w, z);
        let anchor_z = Complex64::from_polar(r_in_z, 0.0);
        let anchor_x = integrate_point(self.w, anchor_z, cfg)?;
        let mut x = anchor_x;
        let mut z_prev = anchor_z;
        let mut prev_ring: Vec<(Complex64, [f64; 3])> = Vec::with_capacity(na);
        let mut prev_ids: Vec<usize> = Vec::with_capacity(na);
        for k in 0..na {
            let theta = k as f64 * std::f64::consts::TAU / na as f64;
            let u = Complex64::from_polar(u_out, theta);
            let z = 1.0 / u;
            if k > 0 {
                // Walk along the circle in z (|z| constant).
                let seg = integrate_segment(&f, z_prev, z, QUAD_TOL, QUAD_MAX_DEPTH);
                for c in 0..3 {
                    x[c] += seg[c].re;
                }
            }
            prev_ids.push(self.push_vertex(z, x, Some(j)));
            prev_ring.push((z, x));
            z_prev = z;
        }
        for step in 1..=nr {
            let u_r = u_out * (-(step as f64) * cfg.end_truncation / nr as f64).exp();
            let mut ids = Vec::with_capacity(na);
            let mut ring = Vec::with_capacity(na);
            for k in 0..na {
                let theta = k as f64 * std::f64::consts::TAU / na as f64;
                let u = Complex64::from_polar(u_r, theta);
                let z = 1.0 / u;
                let (z_up, x_up) = prev_ring[k];
                let seg = integrate_segment(&f, z_up, z, QUAD_TOL, QUAD_MAX_DEPTH);
                let mut x = x_up;
                for c in 0..3 {
                    x[c] += seg[c].re;
                }
                ids.push(self.push_vertex(z, x, Some(j)));
                ring.push((z, x));
            }
            for k in 0..na {
                let k1 = (k + 1) % na;
                self.triangles.push([prev_ids[k], prev_ids[k1], ids[k]]);
                self.triangles.push([prev_ids[k1], ids[k1], ids[k]]);
            }
            prev_ids = ids;
            prev_ring = ring;
        }
        Ok(())
    }

    /// Regular bulk grid over the puncture hull, with holes cut at the
    /// end patches.
    fn bulk(&mut self) -> Result<(), SurfaceError> {
        let cfg = self.cfg;
        let finite = finite_punctures(self.w);
        let extent = 1.5
            * (1.0
                + finite
                    .iter()
                    .map(|&(_, q)| q.norm())
                    .fold(cfg.base_point.norm(), f64::max));
        let ng = cfg.grid_steps;
        if ng < 2 {
            return Ok(());
        }
        let keep = |z: Complex64| {
            finite
                .iter()
                .all(|&(_, q)| (z - q).norm() > 1.02 * contour_radius(self.w, q, cfg))
        };
        let mut ids: Vec<Option<usize>> = vec![None; ng * ng];
        for iy in 0..ng {
            for ix in 0..ng {
                let z = Complex64::new(
                    -extent + 2.0 * extent * ix as f64 / (ng - 1) as f64,
                    -extent + 2.0 * extent * iy as f64 / (ng - 1) as f64,
                );
                if !keep(z) {
                    continue;
                }
                let x = integrate_point(self.w, z, cfg)?;
                ids[iy * ng + ix] = Some(self.push_vertex(z, x, None));
            }
        }
        for iy in 0..ng - 1 {
            for ix in 0..ng - 1 {
                let corners = [
                    ids[iy * ng + ix],
                    ids[iy * ng + ix + 1],
                    ids[(iy + 1) * ng + ix + 1],
                    ids[(iy + 1) * ng + ix],
                ];
                if let [Some(a), Some(b), Some(c), Some(d)] = corners {
                    self.triangles.push([a, b, c]);
                    self.triangles.push([a, c, d]);
                }
            }
        }
        Ok(())
    }
}

/// Builds a truncated mesh of the immersion: a log-polar patch per end
/// stitched value-wise through incremental path integration, plus a bulk
/// grid, all translated so the base point maps to the origin.
pub fn sample_surface(
    w: &WeierstrassData,
    cfg: &SamplingConfig,
) -> Result<SurfaceMesh, SurfaceError> {
    for (j, q) in finite_punctures(w) {
        let _ = j;
        if ExtComplex::Finite(cfg.base_point).chordal_distance(&ExtComplex::Finite(q)) < 1e-3 {
            return Err(SurfaceError::BadConfig(
                "base point too close to a puncture".into(),
            ));
        }
    }
    if cfg.radial_steps == 0 || cfg.angular_steps < 3 {
        return Err(SurfaceError::BadConfig(
            "need radial_steps >= 1 and angular_steps >= 3".into(),
        ));
    }
    let mut builder = MeshBuilder {
        w,
        cfg,
        vertices: Vec::new(),
        triangles: Vec::new(),
        end_labels: Vec::new(),
        gauss_values: Vec::new(),
    };
    for (j, q) in finite_punctures(w) {
        builder.end_patch(j, q)?;
    }
    if let Some(j) = w
        .punctures
        .iter()
        .position(|q| q.is_infinite())
    {
        builder.infinity_patch(j)?;
    }
    builder.bulk()?;
    Ok(SurfaceMesh {
        vertices: builder.vertices,
        triangles: builder.triangles,
        end_labels: builder.end_labels,
        gauss_values: builder.gauss_values,
    })
}

/// Writes the mesh as ASCII OBJ: vertices, normals, then 1-based faces.
pub fn export_obj<W: Write>(m: &SurfaceMesh, sink: &mut W) -> Result<(), SurfaceError> {
    for v in &m.vertices {
        writeln!(sink, "v {} {} {}", v[0], v[1], v[2])?;
    }
    for n in &m.gauss_values {
        writeln!(sink, "vn {} {} {}", n[0], n[1], n[2])?;
    }
    for t in &m.triangles {
        writeln!(sink, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}
