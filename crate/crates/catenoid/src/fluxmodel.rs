//! Flux data: unit end-normal vectors with real weights, stereographic
//! projection both ways, the balancing check, TYPE classification by the
//! span of the normals, and screening of the known non-existence patterns.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Unit-length acceptance window on input vectors; anything inside is
/// normalized on load, anything outside is rejected.
const UNIT_LOAD_TOL: f64 = 1e-6;
/// Chordal tolerance for matching vectors in obstruction patterns.
const OBSTRUCTION_VEC_TOL: f64 = 1e-9;
/// Relative tolerance for the weight sum in obstruction pattern (c).
const OBSTRUCTION_SUM_TOL: f64 = 1e-10;
/// Singular values below this fraction of the largest do not count
/// towards the span dimension.
const SPAN_SV_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FluxError {
    #[error("need at least 2 end vectors, got {0}")]
    TooFewEnds(usize),
    #[error("vectors and weights disagree in length ({vectors} vs {weights})")]
    LengthMismatch { vectors: usize, weights: usize },
    #[error("vector {index} has norm {norm}, farther than {UNIT_LOAD_TOL} from unit length")]
    NotUnit { index: usize, norm: f64 },
    #[error("weight {index} is zero")]
    ZeroWeight { index: usize },
}

/// Extended complex number: a finite value or the point at infinity.
///
/// Serializes as `[re, im]` or `null` for infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

/// Stereographic image of an end normal; infinity is the north pole.
pub type StereoPoint = ExtComplex;

impl ExtComplex {
    pub fn finite(re: f64, im: f64) -> Self {
        ExtComplex::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            ExtComplex::Finite(z) => Some(*z),
            ExtComplex::Infinity => None,
        }
    }

    /// Chordal distance on the Riemann sphere (diameter-2 normalization).
    pub fn chordal_distance(&self, other: &ExtComplex) -> f64 {
        match (self, other) {
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
            (ExtComplex::Finite(a), ExtComplex::Infinity)
            | (ExtComplex::Infinity, ExtComplex::Finite(a)) => 2.0 / (1.0 + a.norm_sqr()).sqrt(),
            (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
        }
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtComplex::Finite(z) => write!(f, "{z}"),
            ExtComplex::Infinity => write!(f, "inf"),
        }
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        ExtComplex::Finite(z)
    }
}

impl Serialize for ExtComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtComplex::Finite(z) => Some([z.re, z.im]).serialize(s),
            ExtComplex::Infinity => None::<[f64; 2]>.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ExtComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Option::<[f64; 2]>::deserialize(d)?;
        match v {
            Some([re, im]) => {
                if !re.is_finite() || !im.is_finite() {
                    return Err(D::Error::custom("non-finite complex component"));
                }
                Ok(ExtComplex::finite(re, im))
            }
            None => Ok(ExtComplex::Infinity),
        }
    }
}

/// The inverse-flux problem input: n unit vectors and n nonzero weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluxData {
    pub vectors: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl FluxData {
    /// Validates and normalizes; vectors within `1e-6` of unit length are
    /// normalized, anything farther is rejected.
    pub fn new(vectors: Vec<[f64; 3]>, weights: Vec<f64>) -> Result<Self, FluxError> {
        if vectors.len() != weights.len() {
            return Err(FluxError::LengthMismatch {
                vectors: vectors.len(),
                weights: weights.len(),
            });
        }
        if vectors.len() < 2 {
            return Err(FluxError::TooFewEnds(vectors.len()));
        }
        let mut out = Vec::with_capacity(vectors.len());
        for (index, v) in vectors.iter().enumerate() {
            let norm = norm3(*v);
            if (norm - 1.0).abs() > UNIT_LOAD_TOL {
                return Err(FluxError::NotUnit { index, norm });
            }
            out.push([v[0] / norm, v[1] / norm, v[2] / norm]);
        }
        for (index, &a) in weights.iter().enumerate() {
            if a == 0.0 {
                return Err(FluxError::ZeroWeight { index });
            }
        }
        Ok(FluxData { vectors: out, weights })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: FluxData = serde_json::from_str(text).map_err(|e| e.to_string())?;
        FluxData::new(raw.vectors, raw.weights).map_err(|e| e.to_string())
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeKind {
    TypeI,
    TypeII,
    TypeIII,
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeKind::TypeI => write!(f, "TYPE_I"),
            TypeKind::TypeII => write!(f, "TYPE_II"),
            TypeKind::TypeIII => write!(f, "TYPE_III"),
        }
    }
}

/// Span classification of the end normals, with the nondegeneracy
/// determinant `D` exposed as a diagnostic for n = 4.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypeClass {
    pub kind: TypeKind,
    pub span_dim: usize,
    pub d_diagnostic: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObstructionKind {
    /// (1) all end normals equal.
    AllEqual,
    /// (2) two normals equal, the remaining n-2 equal to their negation.
    TwoAgainstRest,
    /// (3) one normal opposite to all others with nonzero pair weight sum.
    OneOpposedNonzeroPairSum,
    /// (4) n = 4: two opposite normals plus an equal pair off the axis.
    FourEndOpposedPlusPair,
}

impl fmt::Display for ObstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObstructionKind::AllEqual => write!(f, "all-equal"),
            ObstructionKind::TwoAgainstRest => write!(f, "two-against-rest"),
            ObstructionKind::OneOpposedNonzeroPairSum => {
                write!(f, "one-opposed-nonzero-pair-sum")
            }
            ObstructionKind::FourEndOpposedPlusPair => write!(f, "four-end-opposed-plus-pair"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstructionHit {
    pub kind: ObstructionKind,
    /// Indices that realize the pattern (pattern-specific ordering).
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub hits: Vec<ObstructionHit>,
}

impl ObstructionReport {
    pub fn is_clear(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn has(&self, kind: ObstructionKind) -> bool {
        self.hits.iter().any(|h| h.kind == kind)
    }
}

// --- small vector helpers -------------------------------------------------

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn mat_apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

pub(crate) fn mat_transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub(crate) fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, brow) in b.iter().enumerate() {
                out[i][j] += a[i][k] * brow[j];
            }
        }
    }
    out
}

/// Rodrigues rotation by `angle` about the unit `axis`.
pub(crate) fn rotation_about(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let [x, y, z] = axis;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// Rotation taking `v` to the north pole (0,0,1); identity when `v` is
/// already there, and a half-turn about the x1-axis when `v` is the south
/// pole.
pub fn rotation_to_north(v: [f64; 3]) -> [[f64; 3]; 3] {
    let north = [0.0, 0.0, 1.0];
    let c = dot3(v, north);
    if c > 1.0 - 1e-14 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    if c < -1.0 + 1e-14 {
        return rotation_about([1.0, 0.0, 0.0], std::f64::consts::PI);
    }
    let axis_raw = cross3(v, north);
    let axis = scale3(axis_raw, 1.0 / norm3(axis_raw));
    rotation_about(axis, c.clamp(-1.0, 1.0).acos())
}

// --- stereographic projection ----------------------------------------------

/// Stereographic projection from the north pole: `sigma(v) = (x + iy)/(1-z)`;
/// the north pole itself maps to infinity.
pub fn stereographic(v: [f64; 3]) -> StereoPoint {
    let [x, y, z] = v;
    if (1.0 - z).abs() < 1e-15 {
        return ExtComplex::Infinity;
    }
    ExtComplex::Finite(Complex64::new(x / (1.0 - z), y / (1.0 - z)))
}

/// Inverse stereographic projection:
/// `p -> (2 Re p, 2 Im p, |p|^2 - 1) / (|p|^2 + 1)`; infinity maps to the
/// north pole.
pub fn inverse_stereographic(p: StereoPoint) -> [f64; 3] {
    match p {
        ExtComplex::Infinity => [0.0, 0.0, 1.0],
        ExtComplex::Finite(z) => {
            let d = z.norm_sqr() + 1.0;
            [2.0 * z.re / d, 2.0 * z.im / d, (z.norm_sqr() - 1.0) / d]
        }
    }
}

/// Euclidean norm of the weighted normal sum; zero for balanced data.
pub fn check_balance(d: &FluxData) -> f64 {
    let mut sum = [0.0; 3];
    for (v, &a) in d.vectors.iter().zip(&d.weights) {
        sum = add3(sum, scale3(*v, a));
    }
    norm3(sum)
}

/// Nondegeneracy determinant for 4-end data: the product of the
/// purely-imaginary pair brackets, nonzero exactly on TYPE III data.
/// Computed after rotating the last vector to the north pole.
fn d_diagnostic(d: &FluxData) -> Option<f64> {
    if d.n() != 4 {
        return None;
    }
    let rot = rotation_to_north(d.vectors[3]);
    let mut p = [Complex64::default(); 3];
    for j in 0..3 {
        match stereographic(mat_apply(&rot, d.vectors[j])) {
            ExtComplex::Finite(z) => p[j] = z,
            ExtComplex::Infinity => return None,
        }
    }
    let bracket = |a: Complex64, b: Complex64| a.conj() * b - a * b.conj();
    let b23 = bracket(p[1], p[2]);
    let b31 = bracket(p[2], p[0]);
    let b12 = bracket(p[0], p[1]);
    let tail = (p[0].norm_sqr() - 1.0) * b23
        + (p[1].norm_sqr() - 1.0) * b31
        + (p[2].norm_sqr() - 1.0) * b12;
    Some((b23 * b31 * b12 * tail).re)
}

/// Span dimension of the end normals from the singular values of the
/// 3 x n matrix, with the TYPE III determinant diagnostic for n = 4.
pub fn classify_type(d: &FluxData) -> TypeClass {
    let n = d.n();
    let m = DMatrix::from_fn(3, n, |r, c| d.vectors[c][r]);
    let svd = m.svd(false, false);
    let top = svd.singular_values.max();
    let span_dim = svd
        .singular_values
        .iter()
        .filter(|&&s| s > SPAN_SV_TOL * top)
        .count();
    let kind = match span_dim {
        1 => TypeKind::TypeI,
        2 => TypeKind::TypeII,
        _ => TypeKind::TypeIII,
    };
    TypeClass {
        kind,
        span_dim,
        d_diagnostic: d_diagnostic(d),
    }
}

/// Screens the four non-existence patterns, up to index permutation.
/// Every reindexing that matches is reported.
pub fn detect_obstructions(d: &FluxData) -> ObstructionReport {
    let n = d.n();
    let v = &d.vectors;
    let a = &d.weights;
    let tol = OBSTRUCTION_VEC_TOL;
    let same = |x: [f64; 3], y: [f64; 3]| norm3(sub3(x, y)) < tol;
    let opposed = |x: [f64; 3], y: [f64; 3]| norm3(add3(x, y)) < tol;
    let mut hits = Vec::new();

    // (1) all equal
    if (1..n).all(|j| same(v[0], v[j])) {
        hits.push(ObstructionHit {
            kind: ObstructionKind::AllEqual,
            indices: (0..n).collect(),
        });
    }

    // (2) an equal pair with all remaining ends opposed to it
    for i in 0..n {
        for j in (i + 1)..n {
            if same(v[i], v[j])
                && (0..n)
                    .filter(|&k| k != i && k != j)
                    .all(|k| opposed(v[i], v[k]))
                && n > 2
            {
                hits.push(ObstructionHit {
                    kind: ObstructionKind::TwoAgainstRest,
                    indices: vec![i, j],
                });
            }
        }
    }

    // (3) one end opposed to all others, nonzero pair sum over the rest.
    // Every admissible choice of the odd index is checked.
    for m in 0..n {
        if (0..n).filter(|&k| k != m).all(|k| opposed(v[m], v[k])) {
            let rest: Vec<usize> = (0..n).filter(|&k| k != m).collect();
            let mut pair_sum = 0.0;
            let mut pair_scale = 0.0f64;
            for (ri, &j) in rest.iter().enumerate() {
                for &k in &rest[ri + 1..] {
                    pair_sum += a[j] * a[k];
                    pair_scale = pair_scale.max((a[j] * a[k]).abs());
                }
            }
            if pair_sum.abs() > OBSTRUCTION_SUM_TOL * pair_scale.max(f64::MIN_POSITIVE) {
                hits.push(ObstructionHit {
                    kind: ObstructionKind::OneOpposedNonzeroPairSum,
                    indices: vec![m],
                });
            }
        }
    }

    // (4) n = 4: -v_i = v_j and v_k = v_l off the +-v_i axis
    if n == 4 {
        for i in 0..4 {
            for j in (i + 1)..4 {
                if !opposed(v[i], v[j]) {
                    continue;
                }
                let rest: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
                let (k, l) = (rest[0], rest[1]);
                if same(v[k], v[l]) && !same(v[k], v[i]) && !opposed(v[k], v[i]) {
                    hits.push(ObstructionHit {
                        kind: ObstructionKind::FourEndOpposedPlusPair,
                        indices: vec![i, j, k, l],
                    });
                }
            }
        }
    }

    ObstructionReport { hits }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereographic_poles() {
        assert!(stereographic([0.0, 0.0, 1.0]).is_infinite());
        let south = stereographic([0.0, 0.0, -1.0]).as_finite().unwrap();
        assert!(south.norm() < 1e-15);
    }

    #[test]
    fn inverse_stereographic_basics() {
        assert_eq!(inverse_stereographic(ExtComplex::finite(0.0, 0.0)), [0.0, 0.0, -1.0]);
        assert_eq!(inverse_stereographic(ExtComplex::Infinity), [0.0, 0.0, 1.0]);
        let e = inverse_stereographic(ExtComplex::finite(0.0, 1.0));
        assert!(norm3(sub3(e, [0.0, 1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn roundtrip_example_value() {
        // sigma^{-1}(1/sqrt2) = (2 sqrt2 / 3, 0, -1/3)
        let p = ExtComplex::finite(1.0 / std::f64::consts::SQRT_2, 0.0);
        let v = inverse_stereographic(p);
        assert!(norm3(sub3(v, [2.0 * std::f64::consts::SQRT_2 / 3.0, 0.0, -1.0 / 3.0])) < 1e-14);
        let back = stereographic(v);
        assert!(back.chordal_distance(&p) < 1e-12);
    }

    #[test]
    fn roundtrip_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = ExtComplex::finite(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let back = stereographic(inverse_stereographic(p));
            assert!(back.chordal_distance(&p) < 1e-12);
        }
        let back = stereographic(inverse_stereographic(ExtComplex::Infinity));
        assert!(back.is_infinite());
    }

    #[test]
    fn balance_catenoid_and_violation() {
        let d = FluxData::new(
            vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(check_balance(&d) < 1e-15);
        let bad = FluxData::new(vec![[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]], vec![1.0, 1.0]).unwrap();
        assert!((check_balance(&bad) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn balance_square_flux_data() {
        // p_j in {p, -p, i/p, -i/p} on the sphere, unit weights
        let p = 1.3;
        let pts = [
            ExtComplex::finite(p, 0.0),
            ExtComplex::finite(-p, 0.0),
            ExtComplex::finite(0.0, 1.0 / p),
            ExtComplex::finite(0.0, -1.0 / p),
        ];
        let d = FluxData::new(
            pts.iter().map(|q| inverse_stereographic(*q)).collect(),
            vec![1.0; 4],
        )
        .unwrap();
        assert!(check_balance(&d) < 1e-14);
    }

    #[test]
    fn classify_axis_plane_space() {
        let axis = FluxData::new(
            vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.0, 0.0, -1.0]],
            vec![2.0, 1.0, 1.0],
        )
        .unwrap();
        assert_eq!(classify_type(&axis).kind, TypeKind::TypeI);

        let s = 1.0 / std::f64::consts::SQRT_2;
        let planar = FluxData::new(
            vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [s, 0.0, s], [-s, 0.0, -s]],
            vec![1.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        let t = classify_type(&planar);
        assert_eq!(t.kind, TypeKind::TypeII);
        assert_eq!(t.span_dim, 2);

        let p = 1.3;
        let pts = [
            ExtComplex::finite(p, 0.0),
            ExtComplex::finite(-p, 0.0),
            ExtComplex::finite(0.0, 1.0 / p),
            ExtComplex::finite(0.0, -1.0 / p),
        ];
        let spatial = FluxData::new(
            pts.iter().map(|q| inverse_stereographic(*q)).collect(),
            vec![1.0; 4],
        )
        .unwrap();
        let t3 = classify_type(&spatial);
        assert_eq!(t3.kind, TypeKind::TypeIII);
        assert!(t3.d_diagnostic.unwrap().abs() > 1e-12);
    }

    #[test]
    fn classification_rotation_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = 1.3;
        let pts = [
            ExtComplex::finite(p, 0.0),
            ExtComplex::finite(-p, 0.0),
            ExtComplex::finite(0.0, 1.0 / p),
            ExtComplex::finite(0.0, -1.0 / p),
        ];
        let base: Vec<[f64; 3]> = pts.iter().map(|q| inverse_stereographic(*q)).collect();
        for _ in 0..100 {
            let axis_raw = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let nrm = norm3(axis_raw);
            if nrm < 1e-3 {
                continue;
            }
            let rot = rotation_about(scale3(axis_raw, 1.0 / nrm), rng.gen_range(0.0..6.28));
            let d = FluxData::new(
                base.iter().map(|v| mat_apply(&rot, *v)).collect(),
                vec![1.0; 4],
            )
            .unwrap();
            assert_eq!(classify_type(&d).kind, TypeKind::TypeIII);
        }
    }

    #[test]
    fn obstruction_all_equal() {
        let u = [0.6, 0.0, 0.8];
        let d = FluxData::new(vec![u; 4], vec![1.0; 4]).unwrap();
        let rep = detect_obstructions(&d);
        assert!(rep.has(ObstructionKind::AllEqual));
    }

    #[test]
    fn obstruction_one_opposed_pair_sum() {
        let u = [0.0, 0.0, 1.0];
        let nu = [0.0, 0.0, -1.0];
        // a = {3,1,1,1}: pair sum over the rest is 3 != 0
        let hit = FluxData::new(vec![nu, u, u, u], vec![3.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(detect_obstructions(&hit).has(ObstructionKind::OneOpposedNonzeroPairSum));
        // a = {3,-1,2,2}: -2 - 2 + 4 = 0, the exceptional family case
        let miss = FluxData::new(vec![nu, u, u, u], vec![3.0, -1.0, 2.0, 2.0]).unwrap();
        assert!(!detect_obstructions(&miss).has(ObstructionKind::OneOpposedNonzeroPairSum));
    }

    #[test]
    fn obstruction_four_end_pattern() {
        let u = [0.0, 0.0, 1.0];
        let nu = [0.0, 0.0, -1.0];
        let w = [1.0, 0.0, 0.0];
        let d = FluxData::new(vec![u, nu, w, w], vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        assert!(detect_obstructions(&d).has(ObstructionKind::FourEndOpposedPlusPair));
    }

    #[test]
    fn obstructions_permutation_invariant() {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let u = [0.0, 0.0, 1.0];
        let nu = [0.0, 0.0, -1.0];
        let w = [1.0, 0.0, 0.0];
        let base: Vec<([f64; 3], f64)> =
            vec![(u, 1.0), (nu, 1.0), (w, 1.0), (w, -1.0)];
        for _ in 0..20 {
            let mut shuffled = base.clone();
            shuffled.shuffle(&mut rng);
            let d = FluxData::new(
                shuffled.iter().map(|x| x.0).collect(),
                shuffled.iter().map(|x| x.1).collect(),
            )
            .unwrap();
            assert!(detect_obstructions(&d).has(ObstructionKind::FourEndOpposedPlusPair));
        }
    }

    #[test]
    fn load_rejects_bad_vectors() {
        assert!(FluxData::new(vec![[0.0, 0.0, 1.1], [0.0, 0.0, -1.0]], vec![1.0, 1.0]).is_err());
        assert!(FluxData::new(vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], vec![1.0, 0.0]).is_err());
        // within 1e-6 of unit: normalized on load
        let d = FluxData::new(
            vec![[0.0, 0.0, 1.0 + 5e-7], [0.0, 0.0, -1.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!((norm3(d.vectors[0]) - 1.0).abs() < 1e-15);
    }
}
