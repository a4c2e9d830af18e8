//! Solution construction: the 4-end algorithm for spatial (TYPE III) flux,
//! the coplanar (TYPE II) solver, the parallel-end (TYPE I) one-parameter
//! families, and the named closed-form examples.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fluxmodel::{
    check_balance, classify_type, detect_obstructions, inverse_stereographic, mat_apply, mat_mul,
    norm3, rotation_about, rotation_to_north, stereographic, sub3, ExtComplex, FluxData,
    ObstructionKind, StereoPoint, TypeKind,
};
use crate::polyalg::{det_with_scale, interpolate, poly_roots, ComplexPoly, PolyError};
use crate::residues::{
    verify_solution, weierstrass_from_solution, Frame, ResidueError, SolutionCandidate,
    VerificationReport, WeierstrassData,
};

/// Residual threshold for accepting a constructed candidate.
const CANDIDATE_RESIDUAL_TOL: f64 = 1e-8;
/// Relative threshold for rejecting a quartic root whose kernel data
/// cannot carry nonzero weights.
const ROOT_REJECT_TOL: f64 = 1e-8;
/// Relative imbalance tolerance on input flux data.
const BALANCE_TOL: f64 = 1e-6;
/// Eqf residual bound for a parallel-end family.
const EQF_TOL: f64 = 1e-10;
/// Weight-pattern tolerance for the parallel-end compatibility condition.
const PAIR_SUM_TOL: f64 = 1e-10;
/// Rotation-alignment tolerance in the congruence test.
const CONGRUENCE_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("degenerate configuration: leading coefficient vanishes")]
    DegenerateConfiguration,
    #[error("root rejected: kernel data cannot carry nonzero weights")]
    RejectedRoot,
    #[error("no solution exists for the given flux data")]
    NoSolution,
    #[error("input hits a non-existence pattern: {0}")]
    ObstructedInput(ObstructionKind),
    #[error("puncture iteration failed after the restart budget")]
    NewtonFailure,
    #[error("unknown example name {0:?}")]
    UnknownName(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("solver expects {expected} flux data with n = {n_expected}, got {got} with n = {n}")]
    WrongType {
        expected: TypeKind,
        n_expected: usize,
        got: TypeKind,
        n: usize,
    },
    #[error("flux data is not balanced (weighted normal sum has norm {0:.3e})")]
    Unbalanced(f64),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Residue(#[from] ResidueError),
}

/// Flux data carried into the normalized frame: rotated so the selected
/// end sits at the north pole (stereographic image infinity) at the last
/// index.
#[derive(Debug, Clone)]
pub struct NormalizedProblem {
    pub rotation: [[f64; 3]; 3],
    pub index_map: Vec<usize>,
    pub p: Vec<StereoPoint>,
    pub a: Vec<f64>,
}

/// Kernel generator of the coefficient matrix at a parameter value `t`.
#[derive(Debug, Clone)]
pub struct KernelVector {
    pub b: [Complex64; 4],
}

/// A verified solution: candidate, its Weierstrass data, and the
/// residual report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolvedCatenoid {
    pub candidate: SolutionCandidate,
    pub weierstrass: WeierstrassData,
    pub report: VerificationReport,
}

/// One-parameter family of parallel-end catenoids: punctures solving the
/// critical-point system, with the opposed end normalized to the north
/// pole at the last index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySolution {
    /// Punctures of the finite (downward) ends.
    #[serde(with = "crate::polyalg::serde_complex_vec")]
    pub punctures: Vec<Complex64>,
    /// Weights in the normalized order: finite ends first, the opposed
    /// end (equal to the sum of the others) last.
    pub weights: Vec<f64>,
    pub frame: Frame,
    /// Max residual of the critical-point system at the punctures.
    pub eqf_residual: f64,
}

/// Output of [`named_example`]: isolated solutions, a family at a chosen
/// parameter, or flat-end degenerate data (all weights zero).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ExampleOutput {
    Candidates(Vec<SolvedCatenoid>),
    Family {
        family: FamilySolution,
        #[serde(with = "crate::polyalg::serde_complex")]
        t: Complex64,
    },
    FlatEnds(WeierstrassData),
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);

// --- the quartic and its kernel ---------------------------------------------

/// The cleared 4x4 coefficient matrix as a function of `t`, with the
/// denominators `(p_2 - p_3)`, `(t - p_2)`, `(t - p_3)` multiplied through
/// so every entry is polynomial in `t`.
fn cleared_matrix(t: Complex64, p1: Complex64, p2: Complex64, p3: Complex64) -> Vec<Vec<Complex64>> {
    let d23 = p2 - p3;
    let t2 = t - p2;
    let t3 = t - p3;
    vec![
        vec![
            Complex64::default(),
            -(p1.conj() * p2 + 1.0) * t3,
            -(p1.conj() * p3 + 1.0) * t2,
            p1.conj() * t2 * t3,
        ],
        vec![
            (p2.conj() * p1 + 1.0) * d23,
            Complex64::default(),
            -(p2.conj() * p3 + 1.0) * t2,
            p2.conj() * d23 * t2,
        ],
        vec![
            (p3.conj() * p1 + 1.0) * d23,
            (p3.conj() * p2 + 1.0) * t3,
            Complex64::default(),
            p3.conj() * d23 * t3,
        ],
        vec![-p1, -p2, -p3, Complex64::default()],
    ]
}

/// The degree-4 polynomial `Phi(t)` whose roots are the admissible first
/// punctures: the determinant of the cleared matrix, recovered by
/// evaluation at 5 Chebyshev-spaced points and interpolation. The leading
/// coefficient is `|p_1|^2 |conj(p_2) p_3 + 1|^2`; it vanishes only on
/// degenerate (non-spatial) data.
pub fn phi_quartic(
    p1: Complex64,
    p2: Complex64,
    p3: Complex64,
) -> Result<ComplexPoly, SolverError> {
    let s = 1.0 + p2.norm().max(p3.norm());
    let mut pts = Vec::with_capacity(5);
    for k in 0..5 {
        let t = cx(s * ((2 * k + 1) as f64 * std::f64::consts::PI / 10.0).cos(), 0.0);
        let (det, _) = det_with_scale(cleared_matrix(t, p1, p2, p3));
        pts.push((t, det));
    }
    let phi = interpolate(&pts);
    let expected_lead = p1.norm_sqr() * (p2.conj() * p3 + 1.0).norm_sqr();
    if expected_lead < 1e-10 * phi.max_norm().max(1e-300) {
        return Err(SolverError::DegenerateConfiguration);
    }
    Ok(phi)
}

/// The kernel generator `(B_1, ..., B_4)(t)` of the cleared matrix,
/// valid wherever the determinant vanishes and `B_1(t)` is nonzero.
pub fn kernel_b(t: Complex64, p1: Complex64, p2: Complex64, p3: Complex64) -> KernelVector {
    let d23 = p2 - p3;
    let t2 = t - p2;
    let t3 = t - p3;
    let b1 = (p3.conj() * p2 - p2.conj() * p3) * d23 * t2 * t3;
    let a_prime = [
        [
            -p3.norm_sqr() * d23,
            p2.conj() * p3 * d23,
            p3.conj() * (p2.conj() * p3 + 1.0) * d23,
        ],
        [
            p3.conj() * p2 * d23,
            -p2.norm_sqr() * d23,
            -p2.conj() * (p3.conj() * p2 + 1.0) * d23,
        ],
        [
            p3 * (p3.conj() * p2 + 1.0),
            -p2 * (p2.conj() * p3 + 1.0),
            -(p2.conj() * p3 + 1.0).norm_sqr() * ONE,
        ],
    ];
    let rhs = [
        (p2.conj() * p1 + 1.0) * d23 * t3,
        (p3.conj() * p1 + 1.0) * d23 * t2,
        -p1 * t2 * t3,
    ];
    let mut rest = [Complex64::default(); 3];
    for (i, row) in a_prime.iter().enumerate() {
        rest[i] = row[0] * rhs[0] + row[1] * rhs[1] + row[2] * rhs[2];
    }
    KernelVector {
        b: [b1, rest[0], rest[1], rest[2]],
    }
}

/// Residue parameters from a root of `Phi`: scales the kernel vector so
/// the last weight equation `b_4 (b_1 + b_2 + b_3) = a_4` holds. Rejects
/// roots whose kernel has a structural zero (those carry no solution with
/// all weights nonzero).
pub fn assemble_b(
    t_root: Complex64,
    p1: Complex64,
    p2: Complex64,
    p3: Complex64,
    a4: f64,
) -> Result<[Complex64; 4], SolverError> {
    let kv = kernel_b(t_root, p1, p2, p3);
    let [b1, b2, b3, b4] = kv.b;
    let s = kv.b.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if s == 0.0 || b1.norm() < ROOT_REJECT_TOL * s {
        return Err(SolverError::RejectedRoot);
    }
    if (b2 * b3 * b4).norm() < ROOT_REJECT_TOL * s.powi(3) {
        return Err(SolverError::RejectedRoot);
    }
    let sum = b1 + b2 + b3;
    if sum.norm() < ROOT_REJECT_TOL * s {
        return Err(SolverError::RejectedRoot);
    }
    let lambda = (cx(a4, 0.0) / (b4 * sum)).sqrt();
    Ok([b1 * lambda, b2 * lambda, b3 * lambda, b4 * lambda])
}

// --- TYPE III ----------------------------------------------------------------

/// Rotates the end at `inf_index` to the north pole and reindexes it last.
fn normalize_with_inf_index(d: &FluxData, inf_index: usize) -> NormalizedProblem {
    let rot = rotation_to_north(d.vectors[inf_index]);
    let mut index_map: Vec<usize> = (0..d.n()).filter(|&j| j != inf_index).collect();
    index_map.push(inf_index);
    let p = index_map
        .iter()
        .map(|&j| stereographic(mat_apply(&rot, d.vectors[j])))
        .collect();
    let a = index_map.iter().map(|&j| d.weights[j]).collect();
    NormalizedProblem {
        rotation: rot,
        index_map,
        p,
        a,
    }
}

/// Chooses which end goes to infinity: the one maximizing the minimum
/// pairwise distance to the others, for conditioning of the normalized
/// problem.
pub fn normalize_problem(d: &FluxData) -> NormalizedProblem {
    let n = d.n();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for m in 0..n {
        let score = (0..n)
            .filter(|&k| k != m)
            .map(|k| norm3(sub3(d.vectors[m], d.vectors[k])))
            .fold(f64::INFINITY, f64::min);
        if score > best_score {
            best_score = score;
            best = m;
        }
    }
    normalize_with_inf_index(d, best)
}

fn check_preconditions(d: &FluxData, want: TypeKind, n: usize) -> Result<(), SolverError> {
    let class = classify_type(d);
    if d.n() != n || class.kind != want {
        return Err(SolverError::WrongType {
            expected: want,
            n_expected: n,
            got: class.kind,
            n: d.n(),
        });
    }
    let imbalance = check_balance(d);
    let scale: f64 = d.weights.iter().map(|a| a.abs()).sum();
    if imbalance > BALANCE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(SolverError::Unbalanced(imbalance));
    }
    Ok(())
}

/// Unscaled residual vector of the full 2n-equation system at punctures
/// `q` (finite ends only) and residue parameters `b`, with the normals
/// and weights held fixed.
fn system_residual(
    p: &[Complex64],
    a: &[f64],
    inf: bool,
    pinned: &[Complex64],
    x: &DVector<Complex64>,
) -> DVector<Complex64> {
    let m = p.len();
    let n = m + usize::from(inf);
    let free = m - pinned.len();
    let mut q: Vec<Complex64> = x.as_slice()[..free].to_vec();
    q.extend_from_slice(pinned);
    let b = &x.as_slice()[free..];
    let mut f = DVector::<Complex64>::zeros(2 * n);
    for j in 0..m {
        let mut e1 = -cx(a[j], 0.0);
        let mut e2 = Complex64::default();
        for k in 0..m {
            if k == j {
                continue;
            }
            let d = q[k] - q[j];
            e1 += b[j] * b[k] * (p[k] - p[j]) / d;
            e2 += b[j] * b[k] * (p[j].conj() * p[k] + 1.0) / d;
        }
        if inf {
            e1 += b[j] * b[n - 1];
            e2 += p[j].conj() * b[j] * b[n - 1];
        }
        f[2 * j] = e1;
        f[2 * j + 1] = e2;
    }
    if inf {
        let bn = b[n - 1];
        let sb: Complex64 = b[..m].iter().sum();
        let spb: Complex64 = (0..m).map(|k| p[k] * b[k]).sum();
        f[2 * n - 2] = bn * sb - a[n - 1];
        f[2 * n - 1] = bn * spb;
    }
    f
}

/// Damped Gauss-Newton refinement of a candidate on the full system. The
/// equations are holomorphic in the punctures and residue parameters, so
/// a central complex difference gives the Jacobian. Returns the input
/// unchanged when no strictly better iterate is found.
fn polish_candidate(cand: SolutionCandidate) -> SolutionCandidate {
    let n = cand.n;
    let inf = cand.has_infinite_end();
    let m = n - usize::from(inf);
    let p: Vec<Complex64> = match (0..m).map(|j| cand.p[j].as_finite()).collect() {
        Some(p) => p,
        None => return cand,
    };
    // Pin three puncture values (an infinite end counts as one) so the
    // Mobius reparametrization freedom cannot drift the iterate along the
    // solution orbit.
    let free = m.saturating_sub(3 - usize::from(inf));
    let finite_q: Vec<Complex64> = match (0..m).map(|j| cand.q[j].as_finite()).collect() {
        Some(q) => q,
        None => return cand,
    };
    let pinned = finite_q[free..].to_vec();
    let dim = free + n;
    let mut x = DVector::<Complex64>::zeros(dim);
    x.as_mut_slice()[..free].copy_from_slice(&finite_q[..free]);
    for j in 0..n {
        x[free + j] = cand.b[j];
    }
    let start = x.clone();
    let mut f = system_residual(&p, &cand.a, inf, &pinned, &x);
    let f0 = f.norm();
    for _ in 0..8 {
        if f.norm() < 1e-15 * (1.0 + f0) {
            break;
        }
        let jac = DMatrix::from_fn(2 * n, dim, |r, c| {
            let h = 1e-7 * (1.0 + x[c].norm());
            let mut hi = x.clone();
            let mut lo = x.clone();
            hi[c] += h;
            lo[c] -= h;
            (system_residual(&p, &cand.a, inf, &pinned, &hi)[r]
                - system_residual(&p, &cand.a, inf, &pinned, &lo)[r])
                / (2.0 * h)
        });
        let svd = jac.svd(true, true);
        let step = match svd.solve(&f, 1e-13) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial = &x - &step * cx(lambda, 0.0);
            let trial_q: Vec<Complex64> = trial.as_slice()[..free]
                .iter()
                .copied()
                .chain(pinned.iter().copied())
                .collect();
            let separated = (0..m).all(|j| {
                (0..j).all(|k| (trial_q[j] - trial_q[k]).norm() > 1e-9)
            });
            if separated {
                let tf = system_residual(&p, &cand.a, inf, &pinned, &trial);
                if tf.norm() < f.norm() {
                    x = trial;
                    f = tf;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    // Refinement only: a polished iterate that left the neighborhood of
    // the input has wandered to a different solution (or none at all).
    if x == start || (&x - &start).norm() > 1e-3 * (1.0 + start.norm()) {
        return cand;
    }
    let mut q = cand.q.clone();
    for j in 0..free {
        q[j] = ExtComplex::Finite(x[j]);
    }
    let b: Vec<Complex64> = (0..n).map(|j| x[free + j]).collect();
    match SolutionCandidate::new(q, b, cand.p.clone(), cand.a.clone(), cand.frame.clone()) {
        Ok(refined) => refined,
        Err(_) => cand,
    }
}

fn candidates_from_normalization(np: &NormalizedProblem) -> Result<Vec<SolvedCatenoid>, SolverError> {
    let p1 = np.p[0].as_finite().ok_or(SolverError::DegenerateConfiguration)?;
    let p2 = np.p[1].as_finite().ok_or(SolverError::DegenerateConfiguration)?;
    let p3 = np.p[2].as_finite().ok_or(SolverError::DegenerateConfiguration)?;
    let phi = phi_quartic(p1, p2, p3)?;
    let roots = poly_roots(&phi)?;
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let mut distinct: Vec<Complex64> = Vec::new();
    for r in roots {
        if !distinct.iter().any(|d| (d - r).norm() < 1e-6 * scale) {
            distinct.push(r);
        }
    }
    let mut out = Vec::new();
    for t in distinct {
        let b = match assemble_b(t, p1, p2, p3, np.a[3]) {
            Ok(b) => b,
            Err(SolverError::RejectedRoot) => continue,
            Err(e) => return Err(e),
        };
        let frame = Frame {
            rotation: np.rotation,
            index_map: np.index_map.clone(),
        };
        let cand = match SolutionCandidate::new(
            vec![
                ExtComplex::Finite(t),
                ExtComplex::Finite(p2),
                ExtComplex::Finite(p3),
                ExtComplex::Infinity,
            ],
            b.to_vec(),
            np.p.clone(),
            np.a.clone(),
            frame,
        ) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let cand = polish_candidate(cand);
        let report = verify_solution(&cand);
        if report.reduction2_residual >= CANDIDATE_RESIDUAL_TOL {
            continue;
        }
        let weierstrass = weierstrass_from_solution(&cand)?;
        out.push(SolvedCatenoid {
            candidate: cand,
            weierstrass,
            report,
        });
    }
    Ok(out)
}

/// Solves 4-end spatial (TYPE III) flux data. Returns up to four verified
/// candidates sorted by the first puncture.
pub fn solve_type3(d: &FluxData) -> Result<Vec<SolvedCatenoid>, SolverError> {
    check_preconditions(d, TypeKind::TypeIII, 4)?;
    // Preferred normalization first; fall back to the other infinity
    // choices if the first is degenerate (e.g. a finite end at the south
    // pole makes the quartic drop degree).
    let preferred = normalize_problem(d);
    let mut attempts = vec![preferred.index_map[3]];
    for m in 0..4 {
        if !attempts.contains(&m) {
            attempts.push(m);
        }
    }
    let mut last_err = SolverError::NoSolution;
    for m in attempts {
        let np = normalize_with_inf_index(d, m);
        match candidates_from_normalization(&np) {
            Ok(mut cands) => {
                sort_candidates(&mut cands);
                return Ok(cands);
            }
            Err(e @ SolverError::DegenerateConfiguration) => {
                last_err = e;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

fn sort_candidates(cands: &mut [SolvedCatenoid]) {
    cands.sort_by(|x, y| {
        let qx = x.candidate.q[0].as_finite().unwrap_or_default();
        let qy = y.candidate.q[0].as_finite().unwrap_or_default();
        (qx.re, qx.im)
            .partial_cmp(&(qy.re, qy.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

// --- TYPE II -----------------------------------------------------------------

/// Rotation carrying the span plane of coplanar normals onto the
/// x1x3-plane, then turned about the x2-axis so no normal sits near the
/// north pole (keeping all stereographic images finite and real).
fn type2_rotation(d: &FluxData) -> [[f64; 3]; 3] {
    let n = d.n();
    let m = DMatrix::from_fn(3, n, |r, c| d.vectors[c][r]);
    let svd = m.svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    // Normal of the span plane: least-significant left singular vector.
    let normal = [u[(0, 2)], u[(1, 2)], u[(2, 2)]];
    // Send the plane normal to the x2-axis.
    let to_x2 = {
        let r_to_north = rotation_to_north(normal);
        // north -> x2 axis: rotate by -pi/2 about x1
        let north_to_x2 = rotation_about([1.0, 0.0, 0.0], -std::f64::consts::FRAC_PI_2);
        mat_mul(&north_to_x2, &r_to_north)
    };
    // Scan turns about x2 for the one keeping all normals farthest from
    // the north pole.
    let mut best_angle = 0.0;
    let mut best_score = f64::NEG_INFINITY;
    for k in 0..720 {
        let angle = k as f64 * std::f64::consts::TAU / 720.0;
        let rot = mat_mul(&rotation_about([0.0, 1.0, 0.0], angle), &to_x2);
        let score = d
            .vectors
            .iter()
            .map(|v| {
                let w = mat_apply(&rot, *v);
                norm3(sub3(w, [0.0, 0.0, 1.0]))
            })
            .fold(f64::INFINITY, f64::min);
        if score > best_score {
            best_score = score;
            best_angle = angle;
        }
    }
    mat_mul(&rotation_about([0.0, 1.0, 0.0], best_angle), &to_x2)
}

/// All ways to order 4 indices into two pairs `(0,1),(2,3)` up to the
/// symmetries that leave the normalized system invariant.
fn pair_assignments() -> Vec<[usize; 4]> {
    vec![
        [0, 1, 2, 3],
        [0, 1, 3, 2],
        [0, 2, 1, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
        [0, 3, 2, 1],
    ]
}

/// Solves 4-end coplanar (TYPE II) flux data. Returns up to four verified
/// candidates.
pub fn solve_type2(d: &FluxData) -> Result<Vec<SolvedCatenoid>, SolverError> {
    check_preconditions(d, TypeKind::TypeII, 4)?;
    let obstructions = detect_obstructions(d);
    if let Some(hit) = obstructions.hits.first() {
        return Err(SolverError::ObstructedInput(hit.kind));
    }

    let rot = type2_rotation(d);
    let mut p_real = [0.0f64; 4];
    for j in 0..4 {
        let w = mat_apply(&rot, d.vectors[j]);
        match stereographic(w) {
            ExtComplex::Finite(z) => p_real[j] = z.re,
            ExtComplex::Infinity => return Err(SolverError::DegenerateConfiguration),
        }
    }

    // Choose the pairing with the best-conditioned normalization.
    let mut best: Option<([usize; 4], f64)> = None;
    for assign in pair_assignments() {
        let [i, j, k, l] = assign;
        let p12 = p_real[i] * p_real[j] + 1.0;
        let p34 = p_real[k] * p_real[l] + 1.0;
        let score = (p12 * p34 * (p_real[i] - p_real[j]) * (p_real[k] - p_real[l])).abs();
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((assign, score));
        }
    }
    let (assign, score) = best.unwrap();
    if score < 1e-12 {
        return Err(SolverError::DegenerateConfiguration);
    }
    let p: Vec<f64> = assign.iter().map(|&j| p_real[j]).collect();
    let a: Vec<f64> = assign.iter().map(|&j| d.weights[j]).collect();
    let pjk = |x: usize, y: usize| p[x] * p[y] + 1.0;
    let (p12, p13, p14, p23, p24, p34) =
        (pjk(0, 1), pjk(0, 2), pjk(0, 3), pjk(1, 2), pjk(1, 3), pjk(2, 3));

    // Quadratic in s = q1 + 1/q1 locating the conformal classes.
    let phi2 = ComplexPoly::from_real(&[
        8.0 * (p13 * p24 + p14 * p23) - 4.0 * p12 * p34,
        4.0 * (p13 * p24 - p14 * p23),
        p12 * p34,
    ]);
    if phi2.is_zero() {
        return Err(SolverError::DegenerateConfiguration);
    }
    let s_roots = if phi2.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        poly_roots(&phi2)?
    };

    let frame = Frame {
        rotation: rot,
        index_map: assign.to_vec(),
    };
    let mut out: Vec<SolvedCatenoid> = Vec::new();
    for s in s_roots {
        // q1 from q1 + 1/q1 = s; the two roots are equivalent classes,
        // take the one outside the unit circle.
        let disc = (s * s - 4.0).sqrt();
        let mut q1 = (s + disc) / 2.0;
        if q1.norm() < 1.0 {
            q1 = (s - disc) / 2.0;
        }
        if q1.norm() < 1e-9 || (q1 - 1.0).norm() < 1e-9 || (q1 + 1.0).norm() < 1e-9 {
            continue;
        }
        for bb in type2_b_solutions(q1, &p, &a, (p12, p13, p14, p23, p24, p34))? {
            let cand = match SolutionCandidate::new(
                vec![
                    ExtComplex::Finite(q1),
                    ExtComplex::Finite(-q1),
                    ExtComplex::finite(1.0, 0.0),
                    ExtComplex::finite(-1.0, 0.0),
                ],
                bb,
                p.iter().map(|&x| ExtComplex::finite(x, 0.0)).collect(),
                a.clone(),
                frame.clone(),
            ) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let cand = polish_candidate(cand);
            let report = verify_solution(&cand);
            if report.reduction2_residual >= CANDIDATE_RESIDUAL_TOL {
                continue;
            }
            if out.iter().any(|other| same_candidate(&other.candidate, &cand)) {
                continue;
            }
            let weierstrass = weierstrass_from_solution(&cand)?;
            out.push(SolvedCatenoid {
                candidate: cand,
                weierstrass,
                report,
            });
        }
    }
    sort_candidates(&mut out);
    Ok(out)
}

/// Candidates are duplicates when punctures agree and residue parameters
/// agree up to the global sign (which yields the same surface).
fn same_candidate(x: &SolutionCandidate, y: &SolutionCandidate) -> bool {
    let tol = 1e-6;
    for j in 0..x.n {
        if x.q[j].chordal_distance(&y.q[j]) > tol {
            return false;
        }
    }
    let plus = x
        .b
        .iter()
        .zip(&y.b)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let minus = x
        .b
        .iter()
        .zip(&y.b)
        .map(|(a, b)| (a + b).norm())
        .fold(0.0, f64::max);
    let scale = x.b.iter().map(|b| b.norm()).fold(0.0, f64::max).max(1e-300);
    plus < tol * scale || minus < tol * scale
}

/// Solves the two-conic system in `(b_1, b_2)` by eliminating `b_2`
/// through the resultant of the two quadratics, then recovers
/// `(b_3, b_4)` from the linear relations. Returns de-duplicated
/// solutions with `b_1 b_2 != 0`.
fn type2_b_solutions(
    q1: Complex64,
    p: &[f64],
    a: &[f64],
    pk: (f64, f64, f64, f64, f64, f64),
) -> Result<Vec<Vec<Complex64>>, SolverError> {
    let (_p12, p13, p14, p23, p24, p34) = pk;
    let qm = q1 - 1.0;
    let qp = q1 + 1.0;
    let qpm = qp * qm;
    let k = cx(p34 * p34 / 2.0, 0.0);

    // Conic 1 (from the third weight equation), coefficients of
    // b1^2, b1 b2, b2^2.
    let c3 = (p[2] * p[2] + 1.0) / a[2];
    let alpha1 = -c3 * p14 * (p[0] - p[3]) / qpm;
    let beta1 = c3 * (p24 * (p[0] - p[3]) / (qm * qm) + p14 * (p[1] - p[3]) / (qp * qp));
    let gamma1 = -c3 * p24 * (p[1] - p[3]) / qpm;
    // Conic 2 (from the fourth weight equation).
    let c4 = -(p[3] * p[3] + 1.0) / a[3];
    let alpha2 = -c4 * p13 * (p[0] - p[2]) / qpm;
    let beta2 = c4 * (p13 * (p[1] - p[2]) / (qm * qm) + p23 * (p[0] - p[2]) / (qp * qp));
    let gamma2 = -c4 * p23 * (p[1] - p[2]) / qpm;

    // Eliminate b2: resultant in b2 of the two quadratics, a degree-8
    // even polynomial in b1, recovered by sampled determinants.
    let coef_scale = [alpha1, beta1, gamma1, alpha2, beta2, gamma2]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let sb = (k.norm() / coef_scale).sqrt().max(1e-6);
    let mut pts = Vec::with_capacity(9);
    for r in 0..3 {
        for m in 0..3 {
            let b1 = Complex64::from_polar(
                sb * (0.7 + 0.3 * r as f64),
                0.3 + m as f64 * std::f64::consts::PI / 5.0,
            );
            let e1 = alpha1 * b1 * b1 - k;
            let e2 = alpha2 * b1 * b1 - k;
            let m4 = vec![
                vec![gamma1, beta1 * b1, e1, Complex64::default()],
                vec![Complex64::default(), gamma1, beta1 * b1, e1],
                vec![gamma2, beta2 * b1, e2, Complex64::default()],
                vec![Complex64::default(), gamma2, beta2 * b1, e2],
            ];
            let (det, _) = det_with_scale(m4);
            pts.push((b1, det));
        }
    }
    let res_poly = interpolate(&pts);
    if res_poly.is_zero() || res_poly.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let b1_roots = poly_roots(&res_poly)?;

    let mut sols: Vec<Vec<Complex64>> = Vec::new();
    for b1 in b1_roots {
        if b1.norm() < 1e-9 * sb {
            continue;
        }
        // Back-substitute: solve conic 1 for b2.
        let aa = gamma1;
        let bbq = beta1 * b1;
        let cc = alpha1 * b1 * b1 - k;
        let b2_opts: Vec<Complex64> = if aa.norm() < 1e-14 * coef_scale {
            if bbq.norm() < 1e-14 * coef_scale {
                continue;
            }
            vec![-cc / bbq]
        } else {
            let disc = (bbq * bbq - 4.0 * aa * cc).sqrt();
            vec![(-bbq + disc) / (2.0 * aa), (-bbq - disc) / (2.0 * aa)]
        };
        for b2 in b2_opts {
            if b2.norm() < 1e-9 * sb {
                continue;
            }
            // Check the second conic.
            let r2 = alpha2 * b1 * b1 + beta2 * b1 * b2 + gamma2 * b2 * b2 - k;
            if r2.norm() > 1e-6 * k.norm().max(coef_scale * sb * sb) {
                continue;
            }
            let b3 = (2.0 / p34) * (-p14 * b1 / qp + p24 * b2 / qm);
            let b4 = -(2.0 / p34) * (-p13 * b1 / qm + p23 * b2 / qp);
            let mut b = vec![b1, b2, b3, b4];
            // Fix the global sign deterministically.
            let lead = b[0];
            if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
                for v in &mut b {
                    *v = -*v;
                }
            }
            let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !sols.iter().any(|s| {
                s.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max)
                    < 1e-6 * scale
            }) {
                sols.push(b);
            }
        }
    }
    Ok(sols)
}

// --- TYPE I ------------------------------------------------------------------

/// Max residual of the critical-point system at punctures `q` with
/// weights `a` (both indexed over the finite ends only).
pub fn eqf_residual(q: &[Complex64], a: &[f64]) -> f64 {
    let n = q.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut sum = Complex64::default();
        let mut scale = 0.0f64;
        for k in 0..n {
            if k == j {
                continue;
            }
            let term = cx(a[k], 0.0) / (q[k] - q[j]);
            sum += term;
            scale = scale.max(term.norm());
        }
        if n > 1 {
            worst = worst.max(sum.norm() / scale.max(f64::MIN_POSITIVE));
        }
    }
    worst
}

impl FamilySolution {
    /// Number of ends.
    pub fn n(&self) -> usize {
        self.punctures.len() + 1
    }

    /// The candidate at family parameter `t != 0`: residue parameters
    /// `sqrt(t) a_j` at the finite ends and `1/sqrt(t)` at the opposed
    /// end.
    pub fn candidate_at(&self, t: Complex64) -> Result<SolutionCandidate, SolverError> {
        if t.norm() == 0.0 {
            return Err(SolverError::ParamOutOfRange("family parameter t = 0".into()));
        }
        let m = self.punctures.len();
        let st = t.sqrt();
        let mut q: Vec<ExtComplex> = self.punctures.iter().map(|&z| ExtComplex::Finite(z)).collect();
        q.push(ExtComplex::Infinity);
        let mut b: Vec<Complex64> = (0..m).map(|j| st * self.weights[j]).collect();
        b.push(ONE / st);
        let mut p: Vec<StereoPoint> = vec![ExtComplex::finite(0.0, 0.0); m];
        p.push(ExtComplex::Infinity);
        Ok(SolutionCandidate::new(
            q,
            b,
            p,
            self.weights.clone(),
            self.frame.clone(),
        )?)
    }

    pub fn weierstrass_at(&self, t: Complex64) -> Result<WeierstrassData, SolverError> {
        Ok(weierstrass_from_solution(&self.candidate_at(t)?)?)
    }
}

/// Solves parallel-end (TYPE I) flux data into a one-parameter family.
/// The data must have exactly one end opposed to all the others and the
/// remaining weights must satisfy the vanishing pair-sum condition; every
/// other parallel pattern is obstructed.
pub fn solve_type1_family(d: &FluxData, seed: u64) -> Result<FamilySolution, SolverError> {
    let n = d.n();
    let class = classify_type(d);
    if class.kind != TypeKind::TypeI {
        return Err(SolverError::WrongType {
            expected: TypeKind::TypeI,
            n_expected: n,
            got: class.kind,
            n,
        });
    }
    let imbalance = check_balance(d);
    let scale: f64 = d.weights.iter().map(|a| a.abs()).sum();
    if imbalance > BALANCE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(SolverError::Unbalanced(imbalance));
    }

    // Split the ends by direction along the common axis.
    let axis = d.vectors[0];
    let group0: Vec<usize> = (0..n)
        .filter(|&j| crate::fluxmodel::dot3(d.vectors[j], axis) > 0.0)
        .collect();
    let group1: Vec<usize> = (0..n).filter(|&j| !group0.contains(&j)).collect();
    if group0.is_empty() || group1.is_empty() {
        return Err(SolverError::ObstructedInput(ObstructionKind::AllEqual));
    }
    let (opposed, rest) = match (group0.len(), group1.len()) {
        (1, _) => (group0[0], group1),
        (_, 1) => (group1[0], group0),
        _ => {
            return Err(SolverError::ObstructedInput(
                ObstructionKind::TwoAgainstRest,
            ))
        }
    };

    // Pair-sum compatibility over the non-opposed ends.
    let mut pair_sum = 0.0;
    let mut pair_scale = 0.0f64;
    for (i, &j) in rest.iter().enumerate() {
        for &k in &rest[i + 1..] {
            pair_sum += d.weights[j] * d.weights[k];
            pair_scale = pair_scale.max((d.weights[j] * d.weights[k]).abs());
        }
    }
    if pair_sum.abs() > PAIR_SUM_TOL * pair_scale.max(f64::MIN_POSITIVE) && n > 2 {
        return Err(SolverError::ObstructedInput(
            ObstructionKind::OneOpposedNonzeroPairSum,
        ));
    }

    // Normalized frame: opposed end to the north pole, reindexed last.
    let rot = rotation_to_north(d.vectors[opposed]);
    let mut index_map = rest.clone();
    index_map.push(opposed);
    let weights: Vec<f64> = index_map.iter().map(|&j| d.weights[j]).collect();
    let frame = Frame {
        rotation: rot,
        index_map,
    };
    let rest_a: Vec<f64> = rest.iter().map(|&j| d.weights[j]).collect();

    let punctures = match n {
        2 => vec![Complex64::default()],
        4 => vec![
            Complex64::default(),
            ONE,
            cx(-rest_a[2] / rest_a[1], 0.0),
        ],
        5 => {
            let zeta6 = cx(0.5, 0.5 * 3.0f64.sqrt());
            let (a2, a3, a4, a5) = (rest_a[0], rest_a[1], rest_a[2], rest_a[3]);
            vec![
                Complex64::default(),
                ONE,
                (a2 + a5 * zeta6) / (a2 + a3 + a5),
                (a2 + a4 * zeta6.conj()) / (a2 + a3 + a4),
            ]
        }
        _ => newton_punctures(&rest_a, seed)?,
    };
    let residual = eqf_residual(&punctures, &rest_a);
    if residual > EQF_TOL {
        return Err(SolverError::NewtonFailure);
    }
    Ok(FamilySolution {
        punctures,
        weights,
        frame,
        eqf_residual: residual,
    })
}

/// Damped Gauss-Newton for the critical-point system with the gauge
/// `q_1 = 0`, `q_2 = 1`, randomized restarts.
fn newton_punctures(a: &[f64], seed: u64) -> Result<Vec<Complex64>, SolverError> {
    let m = a.len();
    assert!(m >= 3);
    let free = m - 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let residual_vec = |q: &[Complex64]| -> DVector<Complex64> {
        DVector::from_fn(m, |j, _| {
            let mut s = Complex64::default();
            for k in 0..m {
                if k != j {
                    s += cx(a[k], 0.0) / (q[k] - q[j]);
                }
            }
            s
        })
    };
    for _ in 0..50 {
        let mut q: Vec<Complex64> = vec![Complex64::default(), ONE];
        for _ in 0..free {
            q.push(cx(rng.gen_range(-2.0..3.0), rng.gen_range(-2.5..2.5)));
        }
        let mut f = residual_vec(&q);
        let mut ok = true;
        for _ in 0..200 {
            if f.norm() < 1e-14 * a.iter().map(|x| x.abs()).sum::<f64>() {
                break;
            }
            // Jacobian with respect to the free punctures q_3..q_m.
            let jac = DMatrix::from_fn(m, free, |j, c| {
                let i = c + 2;
                if i == j {
                    let mut s = Complex64::default();
                    for k in 0..m {
                        if k != j {
                            s += cx(a[k], 0.0) / (q[k] - q[j]).powi(2);
                        }
                    }
                    s
                } else {
                    -cx(a[i], 0.0) / (q[i] - q[j]).powi(2)
                }
            });
            let svd = jac.svd(true, true);
            let step = match svd.solve(&f, 1e-13) {
                Ok(s) => s,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            // Damped update: halve until the residual decreases.
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let mut trial = q.clone();
                for c in 0..free {
                    trial[c + 2] -= lambda * step[c];
                }
                if trial
                    .iter()
                    .enumerate()
                    .any(|(i, z)| trial[..i].iter().any(|w| (z - w).norm() < 1e-9))
                {
                    lambda *= 0.5;
                    continue;
                }
                let tf = residual_vec(&trial);
                if tf.norm() < f.norm() {
                    q = trial;
                    f = tf;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if ok && eqf_residual(&q, a) < EQF_TOL {
            return Ok(q);
        }
    }
    Err(SolverError::NewtonFailure)
}

// --- named examples ----------------------------------------------------------

fn param(params: &HashMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64, SolverError> {
    match params.get(key) {
        Some(&v) => Ok(v),
        None => default.ok_or_else(|| {
            SolverError::ParamOutOfRange(format!("missing required parameter {key:?}"))
        }),
    }
}

/// The threshold `(sqrt6 + sqrt2)/2` between real and complex puncture
/// regimes of the square-flux family.
pub fn square_flux_threshold() -> f64 {
    (6.0f64.sqrt() + 2.0f64.sqrt()) / 2.0
}

fn tetrahedral_points() -> (Complex64, Complex64, Complex64) {
    let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let s = std::f64::consts::SQRT_2;
    (cx(1.0 / s, 0.0), zeta / s, zeta * zeta / s)
}

fn tetrahedral_example() -> Result<SolvedCatenoid, SolverError> {
    let (p1, p2, p3) = tetrahedral_points();
    let sq = std::f64::consts::SQRT_2;
    let b = cx(1.0 / 3.0f64.sqrt(), 0.0);
    let cand = SolutionCandidate::new(
        vec![
            ExtComplex::finite(1.0 / sq, 0.0),
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
    )?;
    let report = verify_solution(&cand);
    let weierstrass = weierstrass_from_solution(&cand)?;
    Ok(SolvedCatenoid {
        candidate: cand,
        weierstrass,
        report,
    })
}

/// Flat-end degenerate data at the rejected root `t = -sqrt2` of the
/// tetrahedral quartic: all weights vanish, so this is not a catenoid.
fn tetrahedral_flat_example() -> WeierstrassData {
    let (p1, p2, p3) = tetrahedral_points();
    let t = cx(-std::f64::consts::SQRT_2, 0.0);
    let kv = kernel_b(t, p1, p2, p3);
    let [b1, b2, b3, b4] = kv.b;
    let lin = |r: Complex64| ComplexPoly::new(vec![-r, ONE]);
    let zt = lin(t);
    let z2 = lin(p2);
    let z3 = lin(p3);
    let p_poly = z2
        .mul(&z3)
        .scale(p1 * b1)
        .add(&zt.mul(&z3).scale(p2 * b2))
        .add(&zt.mul(&z2).scale(p3 * b3))
        .sub(&zt.mul(&z2).mul(&z3).scale(b4));
    let q_poly = z2
        .mul(&z3)
        .scale(b1)
        .add(&zt.mul(&z3).scale(b2))
        .add(&zt.mul(&z2).scale(b3));
    let r_poly = zt.mul(&z2).mul(&z3);
    // The kernel components sum to zero at this root, so the leading
    // terms cancel; drop the roundoff remnants.
    let p_poly = p_poly.truncate_small(1e-12);
    let q_poly = q_poly.truncate_small(1e-12);
    let gauss_degree = p_poly
        .degree()
        .unwrap_or(0)
        .max(q_poly.degree().unwrap_or(0));
    let branched = gauss_degree < 3
        || crate::polyalg::resultant_is_zero(&p_poly, &q_poly).unwrap_or(true);
    WeierstrassData {
        p: p_poly,
        q: q_poly,
        r: r_poly,
        punctures: vec![
            ExtComplex::Finite(t),
            ExtComplex::Finite(p2),
            ExtComplex::Finite(p3),
            ExtComplex::Infinity,
        ],
        gauss_degree,
        branched,
    }
}

/// The square-symmetric family: normals at `(p, -p, i/p, -i/p)` on the
/// sphere with unit weights; punctures `(q, -q, i/q, -i/q)` for each
/// admissible root `q` of the cleared quartic, residue parameters
/// `(rq, rq, rp, rp)`.
pub fn square_flux_candidates(pv: f64) -> Result<Vec<SolvedCatenoid>, SolverError> {
    if !(pv > 0.0) || !pv.is_finite() {
        return Err(SolverError::ParamOutOfRange(format!(
            "square-flux needs p > 0, got {pv}"
        )));
    }
    // (p^2 - 1) q^4 - 4 p q^3 + 4 p q + (p^2 - 1) = 0
    let quartic = ComplexPoly::from_real(&[
        pv * pv - 1.0,
        4.0 * pv,
        0.0,
        -4.0 * pv,
        pv * pv - 1.0,
    ]);
    let roots = poly_roots(&quartic)?;
    let mut out = Vec::new();
    for q in roots {
        if q.norm() < 1e-9 || (q.powi(4) + 1.0).norm() < 1e-9 {
            continue;
        }
        let den = q * (pv * (q.powi(4) + 1.0) + 2.0 * q * (pv * pv * q * q + 1.0));
        if den.norm() < 1e-9 * (1.0 + q.norm().powi(5)) {
            // Flat-end degeneration (the residue scale blows up).
            continue;
        }
        let r = ((q.powi(4) + 1.0) / den).sqrt();
        let cand = match SolutionCandidate::new(
            vec![
                ExtComplex::Finite(q),
                ExtComplex::Finite(-q),
                ExtComplex::Finite(cx(0.0, 1.0) / q),
                ExtComplex::Finite(-cx(0.0, 1.0) / q),
            ],
            vec![r * q, r * q, r * pv, r * pv],
            vec![
                ExtComplex::finite(pv, 0.0),
                ExtComplex::finite(-pv, 0.0),
                ExtComplex::finite(0.0, 1.0 / pv),
                ExtComplex::finite(0.0, -1.0 / pv),
            ],
            vec![1.0; 4],
            Frame::identity(4),
        ) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let cand = polish_candidate(cand);
        let report = verify_solution(&cand);
        if report.reduction2_residual >= CANDIDATE_RESIDUAL_TOL {
            continue;
        }
        let weierstrass = weierstrass_from_solution(&cand)?;
        out.push(SolvedCatenoid {
            candidate: cand,
            weierstrass,
            report,
        });
    }
    sort_candidates(&mut out);
    Ok(out)
}

/// Axis-aligned parallel flux data: one end up with weight `sum(rest)`,
/// the others down with the given weights.
fn parallel_flux_data(rest: &[f64]) -> Result<FluxData, SolverError> {
    let a1: f64 = rest.iter().sum();
    if a1 == 0.0 {
        return Err(SolverError::ParamOutOfRange(
            "parallel weights must not sum to zero".into(),
        ));
    }
    let mut vectors = vec![[0.0, 0.0, 1.0]];
    let mut weights = vec![a1];
    for &a in rest {
        vectors.push([0.0, 0.0, -1.0]);
        weights.push(a);
    }
    FluxData::new(vectors, weights)
        .map_err(|e| SolverError::ParamOutOfRange(e.to_string()))
}

/// Builds a named closed-form example. Names: `tetrahedral`,
/// `tetrahedral-flat`, `square-flux` (p), `jorge-meeks`, `parallel4` (t),
/// `parallel5` (t, sign), `zm` (m, t).
pub fn named_example(
    name: &str,
    params: &HashMap<String, f64>,
) -> Result<ExampleOutput, SolverError> {
    match name {
        "tetrahedral" => Ok(ExampleOutput::Candidates(vec![tetrahedral_example()?])),
        "tetrahedral-flat" => Ok(ExampleOutput::FlatEnds(tetrahedral_flat_example())),
        "square-flux" => {
            let p = param(params, "p", None)?;
            Ok(ExampleOutput::Candidates(square_flux_candidates(p)?))
        }
        "jorge-meeks" => {
            // The p = 1 member at the root q = 1.
            let cands = square_flux_candidates(1.0)?;
            let jm: Vec<SolvedCatenoid> = cands
                .into_iter()
                .filter(|c| {
                    c.candidate.q[0]
                        .as_finite()
                        .is_some_and(|q| (q - 1.0).norm() < 1e-9)
                })
                .collect();
            if jm.is_empty() {
                return Err(SolverError::NoSolution);
            }
            Ok(ExampleOutput::Candidates(jm))
        }
        "parallel4" => {
            let t = param(params, "t", Some(1.0))?;
            if t == 0.0 {
                return Err(SolverError::ParamOutOfRange("t must be nonzero".into()));
            }
            let d = parallel_flux_data(&[-1.0, 2.0, 2.0])?;
            let family = solve_type1_family(&d, 0)?;
            Ok(ExampleOutput::Family {
                family,
                t: cx(t, 0.0),
            })
        }
        "parallel5" => {
            let t = param(params, "t", Some(1.0))?;
            let sign = param(params, "sign", Some(1.0))?;
            if t == 0.0 {
                return Err(SolverError::ParamOutOfRange("t must be nonzero".into()));
            }
            let d = parallel_flux_data(&[1.0, 1.0, 1.0, -1.0])?;
            let mut family = solve_type1_family(&d, 0)?;
            if sign < 0.0 {
                // The mirror family across the x1x3-plane.
                for q in &mut family.punctures {
                    *q = q.conj();
                }
            }
            Ok(ExampleOutput::Family {
                family,
                t: cx(t, 0.0),
            })
        }
        "zm" => {
            let m = param(params, "m", None)? as i64;
            let t = param(params, "t", Some(1.0))?;
            if m < 2 {
                return Err(SolverError::ParamOutOfRange("zm needs m >= 2".into()));
            }
            if t == 0.0 {
                return Err(SolverError::ParamOutOfRange("t must be nonzero".into()));
            }
            let m = m as usize;
            let mut punctures = vec![Complex64::default()];
            let mut weights = vec![1.0 - m as f64];
            for k in 0..m {
                punctures.push(Complex64::from_polar(
                    1.0,
                    k as f64 * std::f64::consts::TAU / m as f64,
                ));
                weights.push(2.0);
            }
            weights.push(m as f64 + 1.0);
            let rest_a: Vec<f64> = weights[..m + 1].to_vec();
            let family = FamilySolution {
                eqf_residual: eqf_residual(&punctures, &rest_a),
                punctures,
                weights,
                frame: Frame::identity(m + 2),
            };
            Ok(ExampleOutput::Family {
                family,
                t: cx(t, 0.0),
            })
        }
        other => Err(SolverError::UnknownName(other.to_string())),
    }
}

// --- congruence --------------------------------------------------------------

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    fn heap(k: usize, arr: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(arr.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, arr, out);
            if k % 2 == 0 {
                arr.swap(i, k - 1);
            } else {
                arr.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut idx, &mut out);
    out
}

/// Best orthogonal map aligning vector sets (Kabsch), with the
/// orientation of the result forced by `improper`.
fn align_orthogonal(xs: &[[f64; 3]], ys: &[[f64; 3]], improper: bool) -> [[f64; 3]; 3] {
    let mut h = Matrix3::<f64>::zeros();
    for (x, y) in xs.iter().zip(ys) {
        for i in 0..3 {
            for j in 0..3 {
                h[(i, j)] += y[i] * x[j];
            }
        }
    }
    let svd = h.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut r = u * vt;
    let want_neg = improper;
    if (r.determinant() < 0.0) != want_neg {
        let mut u2 = u;
        for i in 0..3 {
            u2[(i, 2)] = -u2[(i, 2)];
        }
        r = u2 * vt;
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = r[(i, j)];
        }
    }
    out
}

/// Fractional-linear transformation acting on the extended plane via
/// homogeneous coordinates.
#[derive(Debug, Clone, Copy)]
struct Moebius {
    m: [[Complex64; 2]; 2],
}

impl Moebius {
    /// The map sending the three distinct points to `0`, `1`, `infinity`.
    fn to_standard(z1: ExtComplex, z2: ExtComplex, z3: ExtComplex) -> Moebius {
        use ExtComplex::{Finite, Infinity};
        let zero = Complex64::default();
        let m = match (z1, z2, z3) {
            (Finite(a), Finite(b), Finite(c)) => [[b - c, -a * (b - c)], [b - a, -c * (b - a)]],
            (Infinity, Finite(b), Finite(c)) => [[zero, b - c], [ONE, -c]],
            (Finite(a), Infinity, Finite(c)) => [[ONE, -a], [ONE, -c]],
            (Finite(a), Finite(b), Infinity) => [[ONE, -a], [zero, b - a]],
            _ => unreachable!("triple with repeated infinity"),
        };
        Moebius { m }
    }

    fn inverse(&self) -> Moebius {
        let [[a, b], [c, d]] = self.m;
        Moebius {
            m: [[d, -b], [-c, a]],
        }
    }

    fn compose(&self, other: &Moebius) -> Moebius {
        let x = &self.m;
        let y = &other.m;
        Moebius {
            m: [
                [
                    x[0][0] * y[0][0] + x[0][1] * y[1][0],
                    x[0][0] * y[0][1] + x[0][1] * y[1][1],
                ],
                [
                    x[1][0] * y[0][0] + x[1][1] * y[1][0],
                    x[1][0] * y[0][1] + x[1][1] * y[1][1],
                ],
            ],
        }
    }

    fn apply(&self, z: ExtComplex) -> ExtComplex {
        let [[a, b], [c, d]] = self.m;
        let (num, den) = match z {
            ExtComplex::Finite(z) => (a * z + b, c * z + d),
            ExtComplex::Infinity => (a, c),
        };
        if den.norm() <= 1e-14 * num.norm() {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(num / den)
        }
    }
}

fn conj_ext(z: ExtComplex) -> ExtComplex {
    match z {
        ExtComplex::Finite(z) => ExtComplex::Finite(z.conj()),
        ExtComplex::Infinity => ExtComplex::Infinity,
    }
}

/// Gauss map value of Weierstrass data at an extended point; `None` when
/// the evaluation is numerically indeterminate.
fn gauss_at(w: &WeierstrassData, z: ExtComplex) -> Option<ExtComplex> {
    match z {
        ExtComplex::Finite(z) => {
            let num = w.p.eval(z);
            let den = w.q.eval(z);
            let scale = (w.p.max_norm() + w.q.max_norm())
                * (1.0 + z.norm()).powi(w.gauss_degree as i32);
            if num.norm() + den.norm() < 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return None;
            }
            if den.norm() <= 1e-14 * num.norm() {
                Some(ExtComplex::Infinity)
            } else {
                Some(ExtComplex::Finite(num / den))
            }
        }
        ExtComplex::Infinity => {
            let dp = w.p.degree()?;
            let dq = w.q.degree().unwrap_or(0);
            Some(match dp.cmp(&dq) {
                std::cmp::Ordering::Greater => ExtComplex::Infinity,
                std::cmp::Ordering::Equal => ExtComplex::Finite(w.p.leading() / w.q.leading()),
                std::cmp::Ordering::Less => ExtComplex::finite(0.0, 0.0),
            })
        }
    }
}

/// The sphere map induced by an orthogonal matrix, read through
/// stereographic projection.
fn induced_sphere_map(o: &[[f64; 3]; 3], w: ExtComplex) -> ExtComplex {
    stereographic(mat_apply(o, inverse_stereographic(w)))
}

/// Congruence test: the candidates describe congruent surfaces when some
/// end relabelling admits an isometry of space aligning the weighted flux
/// configurations together with a (possibly orientation-reversing)
/// reparameterization of the domain sphere matching punctures and Gauss
/// maps. Both orientations of the isometry are tried, so mirror images
/// count as congruent.
pub fn congruent(x: &SolutionCandidate, y: &SolutionCandidate) -> bool {
    congruent_impl(x, y).unwrap_or(false)
}

fn congruent_impl(x: &SolutionCandidate, y: &SolutionCandidate) -> Option<bool> {
    if x.n != y.n {
        return Some(false);
    }
    let n = x.n;
    let wx = weierstrass_from_solution(x).ok()?;
    let wy = weierstrass_from_solution(y).ok()?;
    let vx: Vec<[f64; 3]> = x.p.iter().map(|p| inverse_stereographic(*p)).collect();
    let vy: Vec<[f64; 3]> = y.p.iter().map(|p| inverse_stereographic(*p)).collect();

    // Domain sample points on a circle clear of the punctures.
    let rad = 1.7
        + 2.0
            * x.q
                .iter()
                .filter_map(|q| q.as_finite())
                .map(|q| q.norm())
                .fold(0.0, f64::max);
    let samples: Vec<Complex64> = (0..12)
        .map(|k| Complex64::from_polar(rad, 0.37 + k as f64 * std::f64::consts::TAU / 12.0))
        .collect();

    for perm in permutations(n) {
        let weights_ok = (0..n)
            .all(|j| (x.a[j] - y.a[perm[j]]).abs() < CONGRUENCE_TOL * (1.0 + x.a[j].abs()));
        if !weights_ok {
            continue;
        }
        let vy_p: Vec<[f64; 3]> = perm.iter().map(|&j| vy[j]).collect();
        for improper in [false, true] {
            let o = align_orthogonal(&vx, &vy_p, improper);
            let worst = vx
                .iter()
                .zip(&vy_p)
                .map(|(a, b)| norm3(sub3(mat_apply(&o, *a), *b)))
                .fold(0.0, f64::max);
            if worst > CONGRUENCE_TOL {
                continue;
            }
            // Domain identification from the first three punctures; an
            // orientation-reversing isometry needs an anti-holomorphic
            // one, realized by pre-conjugation.
            let src: Vec<ExtComplex> = x
                .q
                .iter()
                .map(|&q| if improper { conj_ext(q) } else { q })
                .collect();
            let dst: Vec<ExtComplex> = perm.iter().map(|&j| y.q[j]).collect();
            let m1 = Moebius::to_standard(src[0], src[1], src[2]);
            let m2 = Moebius::to_standard(dst[0], dst[1], dst[2]);
            let m = m2.inverse().compose(&m1);
            if (3..n).any(|j| m.apply(src[j]).chordal_distance(&dst[j]) > 1e-6) {
                continue;
            }
            // The Gauss maps must correspond under the induced sphere map.
            let mut good = 0usize;
            let mut ok = true;
            for &z in &samples {
                let Some(gx) = gauss_at(&wx, ExtComplex::Finite(z)) else {
                    continue;
                };
                let target = induced_sphere_map(&o, gx);
                let zz = if improper {
                    ExtComplex::Finite(z.conj())
                } else {
                    ExtComplex::Finite(z)
                };
                let Some(gy) = gauss_at(&wy, m.apply(zz)) else {
                    continue;
                };
                good += 1;
                if gy.chordal_distance(&target) > 1e-6 {
                    ok = false;
                    break;
                }
            }
            if ok && good >= 6 {
                return Some(true);
            }
        }
    }
    Some(false)
}

/// Re-derives residue parameters for given normals/punctures by extracting
/// the kernel of the coefficient matrix and scaling it to match one weight
/// equation. Used to probe reparameterization invariance.
pub fn rederive_b(
    p: &[StereoPoint],
    q: &[ExtComplex],
    a: &[f64],
) -> Option<Vec<Complex64>> {
    let mat = crate::residues::build_matrix_a(p, q).ok()?;
    let svd = mat.clone().svd(false, true);
    let v_t = svd.v_t.as_ref()?;
    let n = p.len();
    // Kernel direction: adjoint row of the smallest singular value.
    let v: Vec<Complex64> = (0..n).map(|i| v_t[(n - 1, i)].conj()).collect();
    // Scale so the best-conditioned weight equation holds.
    let frame = Frame::identity(n);
    let cand = SolutionCandidate::new(p.to_vec().into_iter().zip(q).map(|(_, &qq)| qq).collect(), v.clone(), p.to_vec(), a.to_vec(), frame).ok()?;
    let mut best: Option<(f64, Complex64)> = None;
    for j in 0..n {
        // implied weight with b = v
        let w = implied_weight(&cand, j)?;
        if best.as_ref().map_or(true, |(s, _)| w.norm() > *s) {
            best = Some((w.norm(), w));
        }
    }
    let (_, w) = best?;
    if w.norm() == 0.0 {
        return None;
    }
    // a_j scales quadratically in b.
    let j_best = (0..n)
        .max_by(|&i, &j| {
            let wi = implied_weight(&cand, i).unwrap().norm();
            let wj = implied_weight(&cand, j).unwrap().norm();
            wi.partial_cmp(&wj).unwrap()
        })
        .unwrap();
    let wj = implied_weight(&cand, j_best)?;
    let lambda = (cx(a[j_best], 0.0) / wj).sqrt();
    Some(v.iter().map(|&b| b * lambda).collect())
}

/// The left-hand side of end `j`'s weight equation for the candidate's
/// current residue parameters.
fn implied_weight(c: &SolutionCandidate, j: usize) -> Option<Complex64> {
    let n = c.n;
    let inf = c.has_infinite_end();
    let m = n - if inf { 1 } else { 0 };
    if j == n - 1 && inf {
        let mut s = Complex64::default();
        for k in 0..m {
            s += c.b[k];
        }
        return Some(c.b[n - 1] * s);
    }
    let qj = c.q[j].as_finite()?;
    let pj = c.p[j].as_finite()?;
    let mut s = Complex64::default();
    for k in 0..m {
        if k == j {
            continue;
        }
        let qk = c.q[k].as_finite()?;
        let pk = c.p[k].as_finite()?;
        s += c.b[k] * (pk - pj) / (qk - qj);
    }
    if inf {
        s += c.b[n - 1];
    }
    Some(c.b[j] * s)
}
