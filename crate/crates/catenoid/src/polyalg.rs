//! Dense complex univariate polynomials: arithmetic, Aberth–Ehrlich root
//! finding, Sylvester resultants and approximate Euclidean gcd.
//!
//! Everything downstream (the quartic `Phi`, the Weierstrass polynomials
//! `P`, `Q`, `R`, the branch-point resultant `Psi`) is degree <= 6, so the
//! representation is a plain ascending coefficient vector.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Serde adapters representing `Complex64` as a `[re, im]` pair, matching
/// the JSON interchange convention used throughout the crate.
pub mod serde_complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde adapters for `Vec<Complex64>` as a list of `[re, im]` pairs.
pub mod serde_complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Iteration cap for the simultaneous root iteration.
const ABERTH_MAX_ITER: usize = 500;
/// All corrections below `1e-13 * (1 + |root|)` counts as converged.
const ABERTH_CORRECTION_TOL: f64 = 1e-13;
/// Roots closer than `1e-7 * scale` are merged into a multiplicity cluster.
const ROOT_CLUSTER_TOL: f64 = 1e-7;
/// Backward-error acceptance for stagnating iterates (double roots stall
/// near sqrt(eps) but their residual is already at rounding level).
const ROOT_RESIDUAL_TOL: f64 = 1e-11;
/// A Sylvester determinant counts as zero below `1e-9 * prod(row max-norms)`.
const DET_ZERO_TOL: f64 = 1e-9;
/// Euclidean remainders below `1e-10 * max-norm of the inputs` are dropped.
const GCD_TRUNCATION_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("root iteration did not converge within {ABERTH_MAX_ITER} iterations")]
    NonConvergence,
    #[error("operation requires a nonzero polynomial")]
    ZeroPolynomial,
    #[error("root finding requires degree >= 1")]
    DegreeTooLow,
}

/// Dense complex polynomial, coefficients in ascending degree order.
/// The zero polynomial is the empty vector; otherwise the leading
/// coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexPoly {
    #[serde(with = "serde_complex_vec")]
    coeffs: Vec<Complex64>,
}

impl<'de> Deserialize<'de> for ComplexPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            coeffs: Vec<[f64; 2]>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(ComplexPoly::new(
            raw.coeffs
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
        ))
    }
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while let Some(c) = coeffs.last() {
            if c.norm() == 0.0 {
                coeffs.pop();
            } else {
                break;
            }
        }
        ComplexPoly { coeffs }
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic product `lc * prod (z - r_i)`.
    pub fn from_roots(lc: Complex64, roots: &[Complex64]) -> Self {
        let mut p = Self::constant(lc);
        for &r in roots {
            p = p.mul(&Self::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients below `tol` relative to the largest one; useful
    /// after arithmetic that cancels a leading term only up to roundoff.
    pub fn truncate_small(&self, tol: f64) -> ComplexPoly {
        let cut = tol * self.max_norm();
        ComplexPoly::new(
            self.coeffs
                .iter()
                .map(|&c| if c.norm() <= cut { Complex64::default() } else { c })
                .collect(),
        )
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::default();
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Evaluates p and p' in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::default();
        let mut dp = Complex64::default();
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> ComplexPoly {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::default(); n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(k) + other.coeff(k);
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &ComplexPoly) -> ComplexPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> ComplexPoly {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::default(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn monic(&self) -> ComplexPoly {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(self.leading().inv())
    }

    /// Euclidean division; panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &ComplexPoly) -> (ComplexPoly, ComplexPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let qn = rem.len() - dd;
        let mut quot = vec![Complex64::default(); qn];
        for k in (0..qn).rev() {
            let c = rem[k + dd] / lead;
            quot[k] = c;
            for (i, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= c * dc;
            }
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }
}

/// All roots with multiplicity via Aberth–Ehrlich simultaneous iteration.
///
/// Double roots stall the per-root corrections near sqrt(eps); the iterate
/// cloud is accepted once every point has a rounding-level backward error,
/// then merged into multiplicity clusters at the centroid.
pub fn poly_roots(p: &ComplexPoly) -> Result<Vec<Complex64>, PolyError> {
    let deg = p.degree().ok_or(PolyError::DegreeTooLow)?;
    if deg < 1 {
        return Err(PolyError::DegreeTooLow);
    }

    // Factor out exact roots at the origin first.
    let mut zeros_at_origin = 0usize;
    while zeros_at_origin < deg && p.coeff(zeros_at_origin).norm() == 0.0 {
        zeros_at_origin += 1;
    }
    let reduced = ComplexPoly::new(p.coeffs[zeros_at_origin..].to_vec());
    let mut roots = vec![Complex64::default(); zeros_at_origin];
    let rdeg = reduced.degree().unwrap();
    if rdeg == 0 {
        return Ok(roots);
    }
    if rdeg == 1 {
        roots.push(-reduced.coeff(0) / reduced.coeff(1));
        return Ok(cluster_roots(roots));
    }

    // Initial guesses on a circle at the Cauchy bound.
    let lead = reduced.leading();
    let cauchy = 1.0
        + reduced.coeffs[..rdeg]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let max_coeff = reduced.max_norm();
    let mut z: Vec<Complex64> = (0..rdeg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / rdeg as f64 + 0.4;
            Complex64::from_polar(cauchy, theta)
        })
        .collect();

    let mut converged = false;
    for iter in 0..ABERTH_MAX_ITER {
        let mut max_correction = 0.0f64;
        for i in 0..rdeg {
            let (pv, dpv) = reduced.eval_with_derivative(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let newton = if dpv.norm() == 0.0 {
                Complex64::new(1e-8 * (1.0 + z[i].norm()), 0.0)
            } else {
                pv / dpv
            };
            let mut repulsion = Complex64::default();
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let d = z[i] - zj;
                    if d.norm() > 0.0 {
                        repulsion += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let w = if denom.norm() < 1e-300 { newton } else { newton / denom };
            z[i] -= w;
            max_correction = max_correction.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_correction < ABERTH_CORRECTION_TOL {
            converged = true;
            break;
        }
        if iter > 30 {
            let all_backward_stable = z.iter().all(|&zi| {
                reduced.eval(zi).norm()
                    <= ROOT_RESIDUAL_TOL * max_coeff * zi.norm().max(1.0).powi(rdeg as i32)
            });
            if all_backward_stable {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(PolyError::NonConvergence);
    }

    roots.extend(z);
    Ok(cluster_roots(roots))
}

/// Merges near-coincident roots into multiplicity clusters at their centroid.
fn cluster_roots(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let tol = ROOT_CLUSTER_TOL * scale;
    let n = roots.len();
    let mut group = (0..n).collect::<Vec<usize>>();
    // Transitive closure by repeated merging; n <= 6 so brute force is fine.
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if (roots[i] - roots[j]).norm() < tol && group[i] != group[j] {
                    let (a, b) = (group[i].min(group[j]), group[i].max(group[j]));
                    for g in group.iter_mut() {
                        if *g == b {
                            *g = a;
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for gid in 0..n {
        let members: Vec<usize> = (0..n).filter(|&i| group[i] == gid).collect();
        if members.len() > 1 {
            let centroid =
                members.iter().map(|&i| roots[i]).sum::<Complex64>() / members.len() as f64;
            for &i in &members {
                roots[i] = centroid;
            }
        }
    }
    roots
}

/// LU determinant with partial pivoting; also returns the product of the
/// initial row max-norms, the scale against which "zero" is judged.
/// Lagrange interpolation through distinct nodes; the result has degree
/// at most `points.len() - 1`.
pub fn interpolate(points: &[(Complex64, Complex64)]) -> ComplexPoly {
    let mut acc = ComplexPoly::zero();
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let others: Vec<Complex64> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(xj, _))| xj)
            .collect();
        let mut denom = Complex64::new(1.0, 0.0);
        for &xj in &others {
            denom *= xi - xj;
        }
        acc = acc.add(&ComplexPoly::from_roots(yi / denom, &others));
    }
    acc
}

pub(crate) fn det_with_scale(mut m: Vec<Vec<Complex64>>) -> (Complex64, f64) {
    let n = m.len();
    let mut scale = 1.0f64;
    for row in &m {
        scale *= row.iter().map(|c| c.norm()).fold(0.0, f64::max);
    }
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&a, &b| m[a][k].norm().partial_cmp(&m[b][k].norm()).unwrap())
            .unwrap();
        if m[pivot_row][k].norm() == 0.0 {
            return (Complex64::default(), scale);
        }
        if pivot_row != k {
            m.swap(pivot_row, k);
            det = -det;
        }
        det *= m[k][k];
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let sub = f * m[k][j];
                m[i][j] -= sub;
            }
        }
    }
    (det, scale)
}

/// Resultant of `p` and `q` as the Sylvester matrix determinant.
pub fn resultant(p: &ComplexPoly, q: &ComplexPoly) -> Result<Complex64, PolyError> {
    Ok(resultant_with_scale(p, q)?.0)
}

/// Resultant together with its zero-test scale (product of Sylvester row
/// max-norms).
pub fn resultant_with_scale(
    p: &ComplexPoly,
    q: &ComplexPoly,
) -> Result<(Complex64, f64), PolyError> {
    let dp = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    let dq = q.degree().ok_or(PolyError::ZeroPolynomial)?;
    if dp == 0 && dq == 0 {
        return Ok((Complex64::new(1.0, 0.0), 1.0));
    }
    if dp == 0 {
        return Ok((p.coeff(0).powu(dq as u32), p.coeff(0).norm().powi(dq as i32)));
    }
    if dq == 0 {
        return Ok((q.coeff(0).powu(dp as u32), q.coeff(0).norm().powi(dp as i32)));
    }
    let n = dp + dq;
    let mut m = vec![vec![Complex64::default(); n]; n];
    for r in 0..dq {
        for (k, &c) in p.coeffs.iter().enumerate() {
            m[r][r + dp - k] = c;
        }
    }
    for r in 0..dp {
        for (k, &c) in q.coeffs.iter().enumerate() {
            m[dq + r][r + dq - k] = c;
        }
    }
    Ok(det_with_scale(m))
}

/// Scale-relative zero test for the resultant: shared roots within the
/// working tolerance make the Sylvester determinant collapse below
/// `DET_ZERO_TOL` times its row-norm scale.
pub fn resultant_is_zero(p: &ComplexPoly, q: &ComplexPoly) -> Result<bool, PolyError> {
    let (det, scale) = resultant_with_scale(p, q)?;
    Ok(det.norm() < DET_ZERO_TOL * scale.max(f64::MIN_POSITIVE))
}

/// Monic approximate gcd by Euclidean remainders with scale-relative
/// truncation. A degree-0 result certifies coprimality.
pub fn poly_gcd(p: &ComplexPoly, q: &ComplexPoly) -> Result<ComplexPoly, PolyError> {
    if p.is_zero() || q.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let threshold = GCD_TRUNCATION_TOL * p.max_norm().max(q.max_norm());
    let (mut a, mut b) = if p.degree() >= q.degree() {
        (p.clone(), q.clone())
    } else {
        (q.clone(), p.clone())
    };
    loop {
        let (_, mut r) = a.div_rem(&b);
        // Truncate rounding debris so exact common factors terminate.
        let trimmed: Vec<Complex64> = r
            .coeffs
            .iter()
            .map(|&c| if c.norm() < threshold { Complex64::default() } else { c })
            .collect();
        r = ComplexPoly::new(trimmed);
        if r.is_zero() || r.max_norm() < threshold {
            return Ok(b.monic());
        }
        a = b;
        b = r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_roots_of_unity() {
        // z^2 + 1 at i
        let p = ComplexPoly::from_real(&[1.0, 0.0, 1.0]);
        assert!(p.eval(c(0.0, 1.0)).norm() < 1e-15);
        // zero polynomial evaluates to zero everywhere
        assert_eq!(ComplexPoly::zero().eval(c(3.0, 4.0)), c(0.0, 0.0));
    }

    #[test]
    fn eval_tetrahedral_quartic_root() {
        // 3/8 (t - 1/sqrt2)^2 (t + sqrt2)^2 vanishes at 1/sqrt2
        let s = std::f64::consts::SQRT_2;
        let p = ComplexPoly::from_roots(
            c(3.0 / 8.0, 0.0),
            &[c(1.0 / s, 0.0), c(1.0 / s, 0.0), c(-s, 0.0), c(-s, 0.0)],
        );
        assert!(p.eval(c(1.0 / s, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_quadratic() {
        let p = ComplexPoly::from_real(&[1.0, 0.0, 1.0]);
        let mut roots = poly_roots(&p).unwrap();
        roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((roots[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((roots[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_with_double_roots() {
        let s = std::f64::consts::SQRT_2;
        let p = ComplexPoly::from_roots(
            c(3.0 / 8.0, 0.0),
            &[c(1.0 / s, 0.0), c(1.0 / s, 0.0), c(-s, 0.0), c(-s, 0.0)],
        );
        let roots = poly_roots(&p).unwrap();
        assert_eq!(roots.len(), 4);
        let near_a = roots.iter().filter(|r| (*r - c(1.0 / s, 0.0)).norm() < 1e-6).count();
        let near_b = roots.iter().filter(|r| (*r + c(s, 0.0)).norm() < 1e-6).count();
        assert_eq!(near_a, 2);
        assert_eq!(near_b, 2);
    }

    #[test]
    fn roots_construct_then_solve() {
        let known = [c(1.5, 0.3), c(-0.7, 1.1), c(0.2, -2.0), c(3.0, 0.0)];
        let p = ComplexPoly::from_roots(c(0.5, -1.0), &known);
        let roots = poly_roots(&p).unwrap();
        for k in &known {
            assert!(
                roots.iter().any(|r| (r - k).norm() < 1e-9),
                "missing root {k}"
            );
        }
    }

    #[test]
    fn resultant_shared_root_is_zero() {
        let p = ComplexPoly::from_roots(c(1.0, 0.0), &[c(1.0, 0.0), c(2.0, 0.0)]);
        let q = ComplexPoly::from_roots(c(1.0, 0.0), &[c(1.0, 0.0)]);
        assert!(resultant(&p, &q).unwrap().norm() < 1e-12);
        assert!(resultant_is_zero(&p, &q).unwrap());
    }

    #[test]
    fn resultant_coprime_value() {
        // res(z^2-2, z^2-3) = prod over roots a of p of q(a) = (2-3)^2... = 1
        let p = ComplexPoly::from_real(&[-2.0, 0.0, 1.0]);
        let q = ComplexPoly::from_real(&[-3.0, 0.0, 1.0]);
        let r = resultant(&p, &q).unwrap();
        assert!((r - c(1.0, 0.0)).norm() < 1e-12, "got {r}");
        assert!(!resultant_is_zero(&p, &q).unwrap());
    }

    #[test]
    fn resultant_matches_root_product() {
        let pr = [c(0.4, 0.7), c(-1.3, 0.2), c(2.0, -0.5)];
        let qr = [c(1.1, 1.1), c(-0.2, -0.9)];
        let lp = c(2.0, 1.0);
        let lq = c(-0.5, 0.3);
        let p = ComplexPoly::from_roots(lp, &pr);
        let q = ComplexPoly::from_roots(lq, &qr);
        // res(p, q) = lc(p)^deg q * prod q(alpha_i)
        let mut expect = lp.powu(qr.len() as u32);
        for a in &pr {
            expect *= q.eval(*a);
        }
        let got = resultant(&p, &q).unwrap();
        assert!((got - expect).norm() < 1e-9 * expect.norm());
    }

    #[test]
    fn resultant_zero_polynomial_rejected() {
        let p = ComplexPoly::zero();
        let q = ComplexPoly::from_real(&[1.0, 1.0]);
        assert!(matches!(resultant(&p, &q), Err(PolyError::ZeroPolynomial)));
    }

    #[test]
    fn gcd_common_factor() {
        let p = ComplexPoly::from_roots(c(1.0, 0.0), &[c(1.0, 0.0), c(-2.0, 0.0)]);
        let q = ComplexPoly::from_roots(c(1.0, 0.0), &[c(1.0, 0.0), c(5.0, 0.0)]);
        let g = poly_gcd(&p, &q).unwrap();
        assert_eq!(g.degree(), Some(1));
        assert!(g.eval(c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn gcd_coprime_cubic_vs_square() {
        // z^3 - sqrt2 against z^2: coprime
        let s = std::f64::consts::SQRT_2;
        let p = ComplexPoly::from_real(&[-s, 0.0, 0.0, 1.0]);
        let q = ComplexPoly::from_real(&[0.0, 0.0, 1.0]);
        let g = poly_gcd(&p, &q).unwrap();
        assert_eq!(g.degree(), Some(0));
    }

    #[test]
    fn gcd_of_equal_inputs() {
        let p = ComplexPoly::from_roots(c(2.0, 1.0), &[c(1.0, 2.0), c(-0.5, 0.0)]);
        let g = poly_gcd(&p, &p).unwrap();
        let diff = g.sub(&p.monic());
        assert!(diff.max_norm() < 1e-10);
    }

    #[test]
    fn reconstruction_from_roots_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let deg = rng.gen_range(1..=6);
            let roots: Vec<Complex64> = (0..deg)
                .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let lc = c(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
            let p = ComplexPoly::from_roots(lc, &roots);
            let found = poly_roots(&p).unwrap();
            let rebuilt = ComplexPoly::from_roots(lc, &found);
            let err = p.sub(&rebuilt).max_norm();
            assert!(err < 1e-8 * p.max_norm(), "err {err}");
        }
    }

    #[test]
    fn resultant_gcd_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let shared = trial % 2 == 0;
            let mut pr: Vec<Complex64> = (0..rng.gen_range(1..=3))
                .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let mut qr: Vec<Complex64> = (0..rng.gen_range(1..=3))
                .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            if shared {
                let s = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                pr.push(s);
                qr.push(s);
            }
            let p = ComplexPoly::from_roots(c(1.0, 0.0), &pr);
            let q = ComplexPoly::from_roots(c(1.0, 0.0), &qr);
            let res_zero = resultant_is_zero(&p, &q).unwrap();
            let gcd_deg = poly_gcd(&p, &q).unwrap().degree().unwrap();
            assert_eq!(res_zero, gcd_deg >= 1, "trial {trial}");
        }
    }

    #[test]
    fn resultant_swap_sign() {
        let p = ComplexPoly::from_roots(c(1.0, 0.5), &[c(0.3, 0.1), c(-1.0, 2.0), c(0.9, 0.0)]);
        let q = ComplexPoly::from_roots(c(-0.4, 1.0), &[c(1.7, -0.3), c(0.0, 1.2)]);
        let r1 = resultant(&p, &q).unwrap();
        let r2 = resultant(&q, &p).unwrap();
        let sign = if (3 * 2) % 2 == 0 { 1.0 } else { -1.0 };
        assert!((r1 - r2 * sign).norm() < 1e-10 * r1.norm());
    }

    #[test]
    fn horner_matches_power_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let deg = rng.gen_range(0..=8usize);
            let coeffs: Vec<Complex64> = (0..=deg)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let p = ComplexPoly::new(coeffs.clone());
            let z = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let naive: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, &ck)| ck * z.powu(k as u32))
                .sum();
            assert!((p.eval(z) - naive).norm() <= 1e-12 * (1.0 + naive.norm()));
        }
    }

    fn arb_coeff() -> impl proptest::strategy::Strategy<Value = Complex64> {
        use proptest::prelude::*;
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
    }

    proptest::proptest! {
        #[test]
        fn roots_reconstruct_polynomial(
            coeffs in proptest::collection::vec(arb_coeff(), 2..=7),
        ) {
            let p = ComplexPoly::new(coeffs);
            proptest::prop_assume!(p.degree().is_some_and(|d| d >= 1));
            proptest::prop_assume!(p.leading().norm() > 0.05);
            let roots = poly_roots(&p).unwrap();
            let rebuilt = ComplexPoly::from_roots(p.leading(), &roots);
            let scale = p.max_norm();
            for k in 0..p.coeffs().len() {
                let d = (rebuilt.coeff(k) - p.coeff(k)).norm();
                proptest::prop_assert!(d < 1e-8 * scale, "coefficient {k} off by {d:.3e}");
            }
        }

        #[test]
        fn div_rem_identity(
            pc in proptest::collection::vec(arb_coeff(), 1..=7),
            dc in proptest::collection::vec(arb_coeff(), 1..=5),
        ) {
            let p = ComplexPoly::new(pc);
            let d = ComplexPoly::new(dc);
            proptest::prop_assume!(!d.is_zero() && d.leading().norm() > 0.05);
            let (quo, rem) = p.div_rem(&d);
            let rebuilt = quo.mul(&d).add(&rem);
            let scale = p.max_norm().max(1.0);
            let deg = p.degree().unwrap_or(0).max(rebuilt.degree().unwrap_or(0));
            for k in 0..=deg {
                let err = (rebuilt.coeff(k) - p.coeff(k)).norm();
                proptest::prop_assert!(err < 1e-9 * scale, "coefficient {k} off by {err:.3e}");
            }
            if let (Some(rd), Some(dd)) = (rem.degree(), d.degree()) {
                proptest::prop_assert!(rd < dd || dd == 0);
            }
        }
    }
}
