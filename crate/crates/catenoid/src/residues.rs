//! Verification core: the coefficient matrix of the puncture/residue
//! system, closed-form end residues, the full algebraic residual report,
//! and assembly of Weierstrass data from a solution candidate.
//!
//! Convention for an end at infinity: at most one puncture may be infinite,
//! it must sit at the *last* index, and its normal must be infinite too
//! (the north pole). All formulas then switch to the infinity-normalized
//! variants rather than taking limits of the finite forms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fluxmodel::{inverse_stereographic, ExtComplex, StereoPoint};
use crate::polyalg::{resultant_is_zero, ComplexPoly};

/// Minimum chordal separation between punctures.
const PUNCTURE_SEP_TOL: f64 = 1e-10;
/// Residual threshold deciding the `single_valued` flag.
const SINGLE_VALUED_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ResidueError {
    #[error("punctures {0} and {1} coincide")]
    CoincidentPunctures(usize, usize),
    #[error("end {0} is at infinity; use the normalized forms")]
    InfinityEnd(usize),
    #[error("denominator polynomial of the Gauss map vanishes identically")]
    DegenerateData,
    #[error("malformed candidate: {0}")]
    BadCandidate(String),
}

/// Orientation bookkeeping: the rotation and index permutation that carried
/// the original flux data into the normalized frame of the candidate.
/// `rotation` maps original vectors to normalized ones; `index_map[j]` is
/// the original index of normalized end `j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frame {
    pub rotation: [[f64; 3]; 3],
    pub index_map: Vec<usize>,
}

impl Frame {
    pub fn identity(n: usize) -> Self {
        Frame {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            index_map: (0..n).collect(),
        }
    }
}

/// A proposed solution of the puncture/residue system: punctures `q`,
/// residue parameters `b`, stereographic end normals `p`, and weights `a`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionCandidate {
    pub n: usize,
    pub q: Vec<ExtComplex>,
    #[serde(with = "crate::polyalg::serde_complex_vec")]
    pub b: Vec<Complex64>,
    pub p: Vec<StereoPoint>,
    pub a: Vec<f64>,
    pub frame: Frame,
}

impl SolutionCandidate {
    pub fn new(
        q: Vec<ExtComplex>,
        b: Vec<Complex64>,
        p: Vec<StereoPoint>,
        a: Vec<f64>,
        frame: Frame,
    ) -> Result<Self, ResidueError> {
        let n = q.len();
        if b.len() != n || p.len() != n || a.len() != n {
            return Err(ResidueError::BadCandidate(
                "q, b, p, a must have equal length".into(),
            ));
        }
        if n < 2 {
            return Err(ResidueError::BadCandidate("need at least 2 ends".into()));
        }
        for j in 0..n {
            for k in (j + 1)..n {
                if q[j].chordal_distance(&q[k]) <= PUNCTURE_SEP_TOL {
                    return Err(ResidueError::CoincidentPunctures(j, k));
                }
            }
        }
        for (j, qj) in q.iter().enumerate() {
            if qj.is_infinite() && j != n - 1 {
                return Err(ResidueError::BadCandidate(
                    "infinite puncture must be the last end".into(),
                ));
            }
        }
        if q[n - 1].is_infinite() != p[n - 1].is_infinite() {
            return Err(ResidueError::BadCandidate(
                "infinite puncture and infinite normal must share the last index".into(),
            ));
        }
        for (j, pj) in p.iter().enumerate().take(n - 1) {
            if pj.is_infinite() {
                return Err(ResidueError::BadCandidate(format!(
                    "infinite normal at non-final index {j}"
                )));
            }
        }
        Ok(SolutionCandidate { n, q, b, p, a, frame })
    }

    pub fn has_infinite_end(&self) -> bool {
        self.q[self.n - 1].is_infinite()
    }

    /// Finite punctures (all of `q` except a trailing infinity).
    pub fn finite_punctures(&self) -> Vec<Complex64> {
        self.q.iter().filter_map(|q| q.as_finite()).collect()
    }

    /// Per-end flux vectors `4 pi a_j nu(p_j)` in the candidate's frame.
    pub fn flux_vectors(&self) -> Vec<[f64; 3]> {
        self.p
            .iter()
            .zip(&self.a)
            .map(|(p, &a)| {
                let v = inverse_stereographic(*p);
                [
                    4.0 * std::f64::consts::PI * a * v[0],
                    4.0 * std::f64::consts::PI * a * v[1],
                    4.0 * std::f64::consts::PI * a * v[2],
                ]
            })
            .collect()
    }

    /// Flux vectors rotated back to the frame of the original input data,
    /// ordered by the original end indices.
    pub fn flux_vectors_input_frame(&self) -> Vec<[f64; 3]> {
        use crate::fluxmodel::{mat_apply, mat_transpose};
        let rt = mat_transpose(&self.frame.rotation);
        let local = self.flux_vectors();
        let mut out = vec![[0.0; 3]; self.n];
        for (j, f) in local.iter().enumerate() {
            out[self.frame.index_map[j]] = mat_apply(&rt, *f);
        }
        out
    }
}

/// Weierstrass data `g = P/Q`, `omega = -(Q/R)^2 dz` assembled from a
/// candidate, with the Gauss-map degree and branch status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeierstrassData {
    pub p: ComplexPoly,
    pub q: ComplexPoly,
    pub r: ComplexPoly,
    pub punctures: Vec<ExtComplex>,
    pub gauss_degree: usize,
    pub branched: bool,
}

impl WeierstrassData {
    /// Gauss map value at `z` (extended complex).
    pub fn gauss(&self, z: Complex64) -> ExtComplex {
        let num = self.p.eval(z);
        let den = self.q.eval(z);
        if den.norm() == 0.0 {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(num / den)
        }
    }
}

/// Numerical residuals of the full algebraic system for one candidate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Max scaled residual over all 2n equations of the primary system.
    pub reduction2_residual: f64,
    /// Max scaled residual of the equivalent residue-form system.
    pub red_residual: f64,
    /// Per-end deviation of the implied weight from the prescribed one
    /// (complex modulus; an imaginary part counts as error).
    pub weight_errors: Vec<f64>,
    /// Per-end deviation of the residue-derived flux vector from
    /// `4 pi a_j nu(p_j)`.
    pub flux_vector_errors: Vec<f64>,
    /// Norm of the total flux `sum_j 4 pi a_j nu(p_j)`.
    pub flux_sum_norm: f64,
    pub single_valued: bool,
}

impl VerificationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.reduction2_residual < tol
    }
}

/// The n x n coefficient matrix with zero diagonal and entries
/// `(conj(p_j) p_k + 1)/(q_k - q_j)` at (j,k). An infinite last end uses
/// the normalized form: last column `conj(p_j)`, last row `-p_k`.
pub fn build_matrix_a(
    p: &[StereoPoint],
    q: &[ExtComplex],
) -> Result<DMatrix<Complex64>, ResidueError> {
    let n = p.len();
    assert_eq!(n, q.len(), "p and q must have equal length");
    for j in 0..n {
        for k in (j + 1)..n {
            if q[j].chordal_distance(&q[k]) <= PUNCTURE_SEP_TOL {
                return Err(ResidueError::CoincidentPunctures(j, k));
            }
        }
    }
    let inf = q[n - 1].is_infinite();
    let m = n - if inf { 1 } else { 0 };
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..m {
        let pj = p[j].as_finite().ok_or(ResidueError::InfinityEnd(j))?;
        let qj = q[j].as_finite().ok_or(ResidueError::InfinityEnd(j))?;
        for k in 0..m {
            if k == j {
                continue;
            }
            let pk = p[k].as_finite().ok_or(ResidueError::InfinityEnd(k))?;
            let qk = q[k].as_finite().ok_or(ResidueError::InfinityEnd(k))?;
            a[(j, k)] = (pj.conj() * pk + 1.0) / (qk - qj);
        }
        if inf {
            a[(j, n - 1)] = pj.conj();
            a[(n - 1, j)] = -p[j].as_finite().unwrap();
        }
    }
    Ok(a)
}

/// The three residues `(Res omega, Res g omega, Res g^2 omega)` of one end.
pub type ResidueTriple = (Complex64, Complex64, Complex64);

/// Closed-form residue triple at finite end `j`. Fails with `InfinityEnd`
/// when `j` is the infinite end; use [`end_residues`] for the full list.
pub fn residue_triple(c: &SolutionCandidate, j: usize) -> Result<ResidueTriple, ResidueError> {
    let n = c.n;
    let qj = c.q[j].as_finite().ok_or(ResidueError::InfinityEnd(j))?;
    let pj = c.p[j].as_finite().ok_or(ResidueError::InfinityEnd(j))?;
    let bj = c.b[j];
    let inf = c.has_infinite_end();
    let m = n - if inf { 1 } else { 0 };
    let mut s0 = Complex64::default(); // sum b_k / (q_j - q_k)
    let mut s1 = Complex64::default(); // sum (p_j + p_k) b_k / (q_j - q_k)
    let mut s2 = Complex64::default(); // sum p_k b_k / (q_j - q_k)
    for k in 0..m {
        if k == j {
            continue;
        }
        let qk = c.q[k].as_finite().unwrap();
        let pk = c.p[k].as_finite().unwrap();
        let d = qj - qk;
        s0 += c.b[k] / d;
        s1 += (pj + pk) * c.b[k] / d;
        s2 += pk * c.b[k] / d;
    }
    if inf {
        let bn = c.b[n - 1];
        s1 -= bn;
        s2 -= bn;
    }
    Ok((-2.0 * bj * s0, -bj * s1, -2.0 * pj * bj * s2))
}

/// Residue triples for all ends. The forms `omega`, `g omega`, `g^2 omega`
/// have poles only at the punctures, so an infinite end's triple is the
/// negative of the sum over the finite ends.
pub fn end_residues(c: &SolutionCandidate) -> Result<Vec<ResidueTriple>, ResidueError> {
    let n = c.n;
    let inf = c.has_infinite_end();
    let m = n - if inf { 1 } else { 0 };
    let mut out = Vec::with_capacity(n);
    let mut total = (Complex64::default(), Complex64::default(), Complex64::default());
    for j in 0..m {
        let t = residue_triple(c, j)?;
        total.0 += t.0;
        total.1 += t.1;
        total.2 += t.2;
        out.push(t);
    }
    if inf {
        out.push((-total.0, -total.1, -total.2));
    }
    Ok(out)
}

/// Flux vector of an end from its residue triple
/// `(r0, r1, r2) = (Res omega, Res g omega, Res g^2 omega)`.
pub fn flux_from_residues(r: ResidueTriple) -> [f64; 3] {
    use std::f64::consts::PI;
    let (r0, r1, r2) = r;
    [
        -2.0 * PI * (r0 - r2).re,
        2.0 * PI * (r0 + r2).im,
        -4.0 * PI * r1.re,
    ]
}

fn scaled_residual(diff: f64, scale: f64) -> f64 {
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Evaluates the primary 2n-equation system, the equivalent residue-form
/// system, the implied weights, and the per-end flux vectors, producing a
/// residual report. A failing candidate yields large residuals rather than
/// an error.
pub fn verify_solution(c: &SolutionCandidate) -> VerificationReport {
    let n = c.n;
    let inf = c.has_infinite_end();
    let m = n - if inf { 1 } else { 0 };

    let mut reduction2 = 0.0f64;
    let mut weight_errors = vec![0.0; n];

    // Rows for finite ends: the weight equation and the kernel equation.
    for j in 0..m {
        let qj = c.q[j].as_finite().unwrap();
        let pj = c.p[j].as_finite().unwrap();
        let bj = c.b[j];
        let mut e1 = Complex64::default();
        let mut e2 = Complex64::default();
        let mut scale1 = 0.0f64;
        let mut scale2 = 0.0f64;
        for k in 0..m {
            if k == j {
                continue;
            }
            let qk = c.q[k].as_finite().unwrap();
            let pk = c.p[k].as_finite().unwrap();
            let t1 = bj * c.b[k] * (pk - pj) / (qk - qj);
            let t2 = bj * c.b[k] * (pj.conj() * pk + 1.0) / (qk - qj);
            e1 += t1;
            e2 += t2;
            scale1 = scale1.max(t1.norm());
            scale2 = scale2.max(t2.norm());
        }
        if inf {
            let t1 = bj * c.b[n - 1];
            let t2 = pj.conj() * bj * c.b[n - 1];
            e1 += t1;
            e2 += t2;
            scale1 = scale1.max(t1.norm());
            scale2 = scale2.max(t2.norm());
        }
        scale1 = scale1.max(c.a[j].abs());
        weight_errors[j] = (e1 - c.a[j]).norm();
        reduction2 = reduction2.max(scaled_residual(weight_errors[j], scale1));
        reduction2 = reduction2.max(scaled_residual(e2.norm(), scale2));
    }

    // Rows for an infinite last end.
    if inf {
        let bn = c.b[n - 1];
        let mut sb = Complex64::default();
        let mut spb = Complex64::default();
        let mut scale = 0.0f64;
        for k in 0..m {
            let pk = c.p[k].as_finite().unwrap();
            sb += c.b[k];
            spb += pk * c.b[k];
            scale = scale.max((bn * c.b[k]).norm().max((bn * pk * c.b[k]).norm()));
        }
        scale = scale.max(c.a[n - 1].abs());
        weight_errors[n - 1] = (bn * sb - c.a[n - 1]).norm();
        reduction2 = reduction2.max(scaled_residual(weight_errors[n - 1], scale));
        reduction2 = reduction2.max(scaled_residual((bn * spb).norm(), scale));
    }

    // Residue-form system: for finite ends, the residues of omega and
    // g omega must equal their weight-determined values.
    let mut red = 0.0f64;
    let residues = end_residues(c).unwrap_or_else(|_| {
        vec![(Complex64::default(), Complex64::default(), Complex64::default()); n]
    });
    for j in 0..m {
        let pj = c.p[j].as_finite().unwrap();
        let d = pj.norm_sqr() + 1.0;
        let (r0, r1, _) = residues[j];
        let want0 = -2.0 * c.a[j] * pj.conj() / d;
        let want1 = Complex64::new(-c.a[j] * (pj.norm_sqr() - 1.0) / d, 0.0);
        let s0 = r0.norm().max(want0.norm()).max(c.a[j].abs());
        let s1 = r1.norm().max(want1.norm()).max(c.a[j].abs());
        red = red.max(scaled_residual((r0 - want0).norm(), s0));
        red = red.max(scaled_residual((r1 - want1).norm(), s1));
    }
    if inf {
        // Infinite end: flux points to the north pole, which forces
        // Res g omega = -a_n and Res omega = Res g^2 omega = 0,
        // expressed through the summed residues.
        let (r0, r1, r2) = residues[n - 1];
        let scale = c.a[n - 1]
            .abs()
            .max(r0.norm())
            .max(r1.norm())
            .max(r2.norm());
        red = red.max(scaled_residual((r1 + c.a[n - 1]).norm(), scale));
        red = red.max(scaled_residual(r0.norm().max(r2.norm()), scale));
    }

    // Flux vectors from residues against 4 pi a_j nu(p_j).
    let expected = c.flux_vectors();
    let mut flux_vector_errors = vec![0.0; n];
    let mut flux_sum = [0.0f64; 3];
    for j in 0..n {
        let got = flux_from_residues(residues[j]);
        flux_vector_errors[j] = ((got[0] - expected[j][0]).powi(2)
            + (got[1] - expected[j][1]).powi(2)
            + (got[2] - expected[j][2]).powi(2))
        .sqrt();
        for i in 0..3 {
            flux_sum[i] += expected[j][i];
        }
    }
    let flux_sum_norm = (flux_sum[0].powi(2) + flux_sum[1].powi(2) + flux_sum[2].powi(2)).sqrt();

    VerificationReport {
        reduction2_residual: reduction2,
        red_residual: red,
        weight_errors,
        flux_vector_errors,
        flux_sum_norm,
        single_valued: reduction2 < SINGLE_VALUED_TOL,
    }
}

/// Builds `P`, `Q`, `R` from a candidate. With all punctures finite:
/// `R = prod (z - q_k)`, `Q = sum b_j R_j`, `P = sum p_j b_j R_j` where
/// `R_j = R/(z - q_j)`. With the last end at infinity the product runs
/// over the finite punctures and `P` gains the term `-b_n R`.
pub fn weierstrass_from_solution(
    c: &SolutionCandidate,
) -> Result<WeierstrassData, ResidueError> {
    let n = c.n;
    let inf = c.has_infinite_end();
    let m = n - if inf { 1 } else { 0 };
    let one = Complex64::new(1.0, 0.0);
    let finite_q = c.finite_punctures();
    let r = ComplexPoly::from_roots(one, &finite_q);
    let mut qpoly = ComplexPoly::zero();
    let mut ppoly = ComplexPoly::zero();
    for j in 0..m {
        let others: Vec<Complex64> = (0..m).filter(|&k| k != j).map(|k| finite_q[k]).collect();
        let rj = ComplexPoly::from_roots(one, &others);
        let pj = c.p[j].as_finite().unwrap();
        qpoly = qpoly.add(&rj.scale(c.b[j]));
        ppoly = ppoly.add(&rj.scale(pj * c.b[j]));
    }
    if inf {
        ppoly = ppoly.sub(&r.scale(c.b[n - 1]));
    }
    if qpoly.is_zero() {
        return Err(ResidueError::DegenerateData);
    }
    let gauss_degree = ppoly.degree().unwrap_or(0).max(qpoly.degree().unwrap_or(0));
    let branched = gauss_degree < n - 1 || resultant_is_zero(&ppoly, &qpoly).unwrap_or(true);
    Ok(WeierstrassData {
        p: ppoly,
        q: qpoly,
        r,
        punctures: c.q.clone(),
        gauss_degree,
        branched,
    })
}

/// The tetrahedrally symmetric 4-end candidate: normals at the cube
/// roots of unity scaled by 1/sqrt2 plus the north pole, all weights 1,
/// punctures equal to the normals, all b_j = 1/sqrt3.
#[cfg(test)]
pub(crate) fn tetrahedral_candidate() -> SolutionCandidate {
    use std::f64::consts::SQRT_2;
    let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let p1 = Complex64::new(1.0 / SQRT_2, 0.0);
    let p2 = zeta / SQRT_2;
    let p3 = zeta * zeta / SQRT_2;
    let b = Complex64::new(1.0 / 3.0f64.sqrt(), 0.0);
    SolutionCandidate::new(
        vec![
            ExtComplex::Finite(p1),
            ExtComplex::Finite(p2),
            ExtComplex::Finite(p3),
            ExtComplex::Infinity,
        ],
        vec![b; 4],
        vec![
            ExtComplex::Finite(p1),
            ExtComplex::Finite(p2),
            ExtComplex::Finite(p3),
            ExtComplex::Infinity,
        ],
        vec![1.0; 4],
        Frame::identity(4),
    )
    .unwrap()
}

/// The 2-end catenoid: normals at the poles, punctures {0, inf}.
#[cfg(test)]
pub(crate) fn catenoid_candidate() -> SolutionCandidate {
    SolutionCandidate::new(
        vec![ExtComplex::finite(0.0, 0.0), ExtComplex::Infinity],
        vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![ExtComplex::finite(0.0, 0.0), ExtComplex::Infinity],
        vec![1.0, 1.0],
        Frame::identity(2),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluxmodel::ExtComplex;
    use std::f64::consts::SQRT_2;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matrix_a_infinity_normalized_entries() {
        let p = vec![
            ExtComplex::finite(0.3, -0.2),
            ExtComplex::finite(-1.1, 0.4),
            ExtComplex::Infinity,
        ];
        let q = vec![
            ExtComplex::finite(0.0, 0.0),
            ExtComplex::finite(1.0, 0.0),
            ExtComplex::Infinity,
        ];
        let a = build_matrix_a(&p, &q).unwrap();
        for j in 0..3 {
            assert_eq!(a[(j, j)], Complex64::default());
        }
        let p1 = cx(0.3, -0.2);
        let p2 = cx(-1.1, 0.4);
        assert!((a[(0, 1)] - (p1.conj() * p2 + 1.0) / cx(1.0, 0.0)).norm() < 1e-15);
        assert!((a[(0, 2)] - p1.conj()).norm() < 1e-15);
        assert!((a[(1, 2)] - p2.conj()).norm() < 1e-15);
        assert!((a[(2, 0)] + p1).norm() < 1e-15);
        assert!((a[(2, 1)] + p2).norm() < 1e-15);
    }

    #[test]
    fn matrix_a_rejects_coincident_punctures() {
        let p = vec![ExtComplex::finite(0.0, 0.0), ExtComplex::finite(1.0, 0.0)];
        let q = vec![ExtComplex::finite(0.5, 0.0), ExtComplex::finite(0.5, 0.0)];
        assert!(matches!(
            build_matrix_a(&p, &q),
            Err(ResidueError::CoincidentPunctures(0, 1))
        ));
    }

    #[test]
    fn det_a_matches_square_symmetric_product_formula() {
        // Four ends with a quarter-turn symmetry: normals at
        // (p, -p, i/p, -i/p), punctures at (q, -q, i/q, -i/q). The
        // determinant factors into the displayed product of two brackets.
        for &(pv, qv) in &[(1.2f64, 1.0976f64), (0.8, 0.7), (1.5, 2.3)] {
            let p = vec![
                ExtComplex::finite(pv, 0.0),
                ExtComplex::finite(-pv, 0.0),
                ExtComplex::finite(0.0, 1.0 / pv),
                ExtComplex::finite(0.0, -1.0 / pv),
            ];
            let q = vec![
                ExtComplex::finite(qv, 0.0),
                ExtComplex::finite(-qv, 0.0),
                ExtComplex::finite(0.0, 1.0 / qv),
                ExtComplex::finite(0.0, -1.0 / qv),
            ];
            let a = build_matrix_a(&p, &q).unwrap();
            let det = a.determinant();
            let u = 2.0 * qv * (qv * qv - 1.0) / (qv.powi(4) + 1.0);
            let w = 2.0 * qv * (qv * qv + 1.0) / (qv.powi(4) + 1.0);
            let s = (pv * pv - 1.0) / (2.0 * pv);
            let want = (u * u - s * s) * (w * w + s * s);
            assert!(
                (det.re - want).abs() < 1e-10 * want.abs().max(1.0) && det.im.abs() < 1e-10,
                "det {det} vs {want}"
            );
        }
    }

    #[test]
    fn zero_b_gives_zero_residue_triple() {
        let mut c = tetrahedral_candidate();
        c.b[1] = Complex64::default();
        let t = residue_triple(&c, 1).unwrap();
        assert_eq!(t, (Complex64::default(), Complex64::default(), Complex64::default()));
    }

    #[test]
    fn tetrahedral_residue_structure() {
        // Res g omega real and Res omega = -conj(Res g^2 omega) per end.
        let c = tetrahedral_candidate();
        for t in end_residues(&c).unwrap().iter().take(3) {
            assert!(t.1.im.abs() < 1e-12, "Res g omega not real: {}", t.1);
            assert!((t.0 + t.2.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn tetrahedral_candidate_verifies() {
        let c = tetrahedral_candidate();
        let rep = verify_solution(&c);
        assert!(rep.reduction2_residual < 1e-9, "{}", rep.reduction2_residual);
        assert!(rep.red_residual < 1e-9, "{}", rep.red_residual);
        assert!(rep.single_valued);
        assert!(rep.flux_sum_norm < 1e-8);
        for e in &rep.flux_vector_errors {
            assert!(*e < 1e-8);
        }
    }

    #[test]
    fn negated_b_gives_identical_report() {
        let c = tetrahedral_candidate();
        let mut neg = c.clone();
        for b in &mut neg.b {
            *b = -*b;
        }
        let r1 = verify_solution(&c);
        let r2 = verify_solution(&neg);
        assert_eq!(r1.reduction2_residual, r2.reduction2_residual);
        assert_eq!(r1.red_residual, r2.red_residual);
        assert_eq!(r1.weight_errors, r2.weight_errors);
    }

    #[test]
    fn perturbed_b_fails_loudly() {
        let mut c = tetrahedral_candidate();
        c.b[0] += 1e-3;
        let rep = verify_solution(&c);
        assert!(rep.reduction2_residual > 1e-4, "{}", rep.reduction2_residual);
        assert!(rep.red_residual > 1e-4);
        assert!(!rep.single_valued);
    }

    #[test]
    fn reduction_and_residue_systems_agree() {
        // Residuals of the two systems are small or large together.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut c = tetrahedral_candidate();
            if rng.gen_bool(0.5) {
                let j = rng.gen_range(0..4);
                c.b[j] += cx(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
            }
            let rep = verify_solution(&c);
            let small1 = rep.reduction2_residual < 1e-8;
            let small2 = rep.red_residual < 1e-7;
            assert_eq!(small1, small2, "{} vs {}", rep.reduction2_residual, rep.red_residual);
        }
    }

    #[test]
    fn kernel_equation_in_matrix_form() {
        // A b = 0 for a verified candidate.
        let c = tetrahedral_candidate();
        let a = build_matrix_a(&c.p, &c.q).unwrap();
        let b = nalgebra::DVector::from_vec(c.b.clone());
        let prod = &a * &b;
        let scale = a.norm() * b.norm();
        assert!(prod.norm() < 1e-9 * scale);
    }

    #[test]
    fn tetrahedral_weierstrass_closed_form() {
        let c = tetrahedral_candidate();
        let w = weierstrass_from_solution(&c).unwrap();
        // P proportional to z^3 - sqrt2, Q to z^2, R = z^3 - 1/(2 sqrt2).
        let scale = w.p.coeff(3);
        let want_p = [cx(-SQRT_2, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)];
        for (i, &wc) in want_p.iter().enumerate() {
            assert!((w.p.coeff(i) - scale * wc).norm() < 1e-10);
        }
        assert_eq!(w.q.degree(), Some(2));
        assert!(w.q.coeff(0).norm() < 1e-12 && w.q.coeff(1).norm() < 1e-12);
        let want_r = [cx(-1.0 / (2.0 * SQRT_2), 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)];
        for (i, &wc) in want_r.iter().enumerate() {
            assert!((w.r.coeff(i) - wc).norm() < 1e-10);
        }
        assert_eq!(w.gauss_degree, 3);
        assert!(!w.branched);
    }

    #[test]
    fn catenoid_candidate_weierstrass() {
        let c = catenoid_candidate();
        let rep = verify_solution(&c);
        assert!(rep.reduction2_residual < 1e-12);
        let w = weierstrass_from_solution(&c).unwrap();
        assert_eq!(w.gauss_degree, 1);
        assert!(!w.branched);
        // g = P/Q = -z, R = z
        assert_eq!(w.q.degree(), Some(0));
        assert_eq!(w.p.degree(), Some(1));
        let g = w.p.coeff(1) / w.q.coeff(0);
        assert!((g + 1.0).norm() < 1e-14);
    }

    #[test]
    fn flux_sum_vanishes_for_passing_candidates() {
        for c in [tetrahedral_candidate(), catenoid_candidate()] {
            let rep = verify_solution(&c);
            let total: f64 = c.a.iter().map(|a| a.abs()).sum();
            assert!(rep.flux_sum_norm < 1e-8 * total);
        }
    }

    #[test]
    fn report_serializes_round_trip() {
        let rep = verify_solution(&tetrahedral_candidate());
        let text = serde_json::to_string(&rep).unwrap();
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.reduction2_residual, rep.reduction2_residual);
        assert_eq!(back.single_valued, rep.single_valued);
    }
}
