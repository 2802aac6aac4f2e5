//! The residue field `F_inf` at the archimedean place.
//!
//! `F_inf(n)` is the set of faces of the `n`-octahedron, encoded as sign
//! vectors in `{-1, 0, +1}^n` with the zero vector as basepoint. A point of
//! the unit ball represents the open face containing it when it lies on the
//! boundary, and the basepoint when it lies in the interior. Every operation
//! lifts faces barycentrically (`1/|support|` on the support), computes over
//! `Q`, and reduces back to a face.
//!
//! Because each column of a lifted matrix has norm one, the reduction of
//! `A * v` is non-zero exactly when no cancellation occurs, which depends only
//! on sign patterns. The result is therefore the same for every lift of norm
//! one, not only the barycentric one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::abelian::{cokernel_descriptor, AbGroupDescriptor};
use crate::error::{Error, ParseError, Result};
use crate::field::{Element, FieldDescriptor, Scalar};
use crate::omod::Vector;

type Q = Ratio<i64>;

pub const MAX_FACE_DIM: usize = 12;

/// A face of the `n`-octahedron.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    signs: Vec<i8>,
}

impl Face {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::WitnessFailure(format!("{signs:?} is not a sign vector")));
        }
        Ok(Face { signs })
    }

    pub fn zero(n: usize) -> Self {
        Face { signs: vec![0; n] }
    }

    /// `sign * e_i`.
    pub fn vertex(n: usize, i: usize, sign: i8) -> Self {
        let mut signs = vec![0; n];
        signs[i] = sign;
        Face { signs }
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_zero(&self) -> bool {
        self.signs.iter().all(|&s| s == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.signs[i] != 0).collect()
    }

    pub fn negate(&self) -> Self {
        Face { signs: self.signs.iter().map(|s| -s).collect() }
    }

    fn lift_q(&self) -> Vec<Q> {
        let k = self.support().len() as i64;
        self.signs
            .iter()
            .map(|&s| if s == 0 { Q::zero() } else { Q::new(s as i64, k) })
            .collect()
    }

    /// `lambda_i = 1/|support|` on the support, with the face's signs.
    pub fn barycentric_lift<T: Scalar>(&self) -> Vector<T> {
        let entries = self
            .lift_q()
            .into_iter()
            .map(|q| Element::rational(Ratio::new(int::<T>(*q.numer()), int::<T>(*q.denom()))))
            .collect();
        Vector::new(FieldDescriptor::Rationals, entries).expect("barycentric lift lies on the unit sphere")
    }

    fn delete(&self, r: usize) -> Self {
        let mut signs = self.signs.clone();
        signs.remove(r);
        Face { signs }
    }

    fn times_signs(&self, p: &[i8]) -> Self {
        Face { signs: self.signs.iter().zip(p).map(|(a, b)| a * b).collect() }
    }
}

fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("small integer fits every scalar type")
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(match s {
                1 => "+",
                -1 => "-",
                _ => "0",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Face {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let mut signs = Vec::new();
        for (k, c) in s.char_indices() {
            signs.push(match c {
                '+' => 1,
                '-' => -1,
                '0' => 0,
                _ => return Err(ParseError::at(s, k, format!("unexpected `{c}` in sign vector"))),
            });
        }
        Ok(Face { signs })
    }
}

/// Componentwise sign of a point of `O(n)` over `Q`.
pub fn project<T: Scalar>(v: &Vector<T>) -> Face {
    Face {
        signs: v
            .entries()
            .iter()
            .map(|x| {
                let a = x.a();
                if a.is_positive() {
                    1
                } else if a.is_negative() {
                    -1
                } else {
                    0
                }
            })
            .collect(),
    }
}

/// The face represented by a point of the unit ball: the basepoint for
/// interior points, the componentwise sign on the boundary.
pub fn reduce<T: Scalar>(v: &Vector<T>) -> Face {
    let norm = v.entries().iter().fold(Ratio::<T>::zero(), |acc, x| acc + x.a().abs());
    if norm < Ratio::from_integer(T::one()) {
        Face::zero(v.len())
    } else {
        project(v)
    }
}

fn reduce_q(v: &[Q]) -> Face {
    let norm: Q = v.iter().map(|x| x.abs()).sum();
    if norm < Q::from_integer(1) {
        Face::zero(v.len())
    } else {
        Face { signs: v.iter().map(|x| x.numer().signum() as i8).collect() }
    }
}

/// All `3^n` faces in lexicographic order (`-` < `0` < `+`).
pub fn enumerate_faces(n: usize) -> Result<Vec<Face>> {
    if n > MAX_FACE_DIM {
        return Err(Error::BudgetExceeded { needed: 3u128.pow(n as u32), budget: 3u128.pow(MAX_FACE_DIM as u32) });
    }
    let mut out = vec![Face::zero(0)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|f| {
                [-1i8, 0, 1].into_iter().map(move |s| {
                    let mut signs = f.signs.clone();
                    signs.push(s);
                    Face { signs }
                })
            })
            .collect();
    }
    Ok(out)
}

/// A sign-pattern matrix; column `j` is the face `a_j`, realised by its
/// barycentric lift.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    /// row-major
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        if entries.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::WitnessFailure("entries must be signs".into()));
        }
        Ok(SignMatrix { rows, cols, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        SignMatrix { rows: n, cols: n, entries }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        SignMatrix { rows, cols, entries: vec![0; rows * cols] }
    }

    /// The `n x 1` matrix whose column is `f`.
    pub fn column_of(f: &Face) -> Self {
        SignMatrix { rows: f.n(), cols: 1, entries: f.signs.clone() }
    }

    /// The projection `F_inf(n) -> F_inf(n-1)` forgetting coordinate `r`.
    pub fn forget(n: usize, r: usize) -> Self {
        let mut m = SignMatrix::zero(n - 1, n);
        for (i, j) in (0..n).filter(|&j| j != r).enumerate() {
            m.entries[i * n + j] = 1;
        }
        m
    }

    /// The paper's projector pattern `(1/2 0; 1/2 1)`.
    pub fn p_projector() -> Self {
        SignMatrix { rows: 2, cols: 2, entries: vec![1, 0, 1, 1] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Face {
        Face { signs: (0..self.rows).map(|i| self.get(i, j)).collect() }
    }

    /// `J_j`, the support of column `j`.
    pub fn column_support(&self, j: usize) -> Vec<usize> {
        self.column(j).support()
    }

    pub fn row_nonzeros(&self, i: usize) -> usize {
        (0..self.cols).filter(|&j| self.get(i, j) != 0).count()
    }

    fn lifted_columns(&self) -> Vec<Vec<Q>> {
        (0..self.cols).map(|j| self.column(j).lift_q()).collect()
    }

    /// Evaluate on a face through barycentric lifts.
    pub fn apply(&self, f: &Face) -> Result<Face> {
        if f.n() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: f.n() });
        }
        Ok(self.apply_lifted(&self.lifted_columns(), f))
    }

    fn apply_lifted(&self, cols: &[Vec<Q>], f: &Face) -> Face {
        let lift = f.lift_q();
        let mut out = vec![Q::zero(); self.rows];
        for (j, c) in cols.iter().enumerate() {
            if lift[j].is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(c) {
                *o += lift[j] * x;
            }
        }
        reduce_q(&out)
    }

    /// `P A P` for the diagonal sign matrix `P = diag(signs)`.
    pub fn conjugate(&self, signs: &[i8]) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.entries[i * self.cols + j] = signs[i] * self.get(i, j) * signs[j];
            }
        }
        m
    }

    /// Delete row and column `r` of a square matrix.
    pub fn minor(&self, r: usize) -> Self {
        let n = self.rows;
        let keep: Vec<usize> = (0..n).filter(|&k| k != r).collect();
        let entries = keep.iter().flat_map(|&i| keep.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        SignMatrix { rows: n - 1, cols: n - 1, entries }
    }

    pub fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
}

impl fmt::Display for SignMatrix {
    /// Rows as sign strings joined by commas, e.g. `+0,++`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| Face { signs: (0..self.cols).map(|j| self.get(i, j)).collect() }.to_string())
            .collect();
        write!(f, "{}", rows.join(","))
    }
}

impl FromStr for SignMatrix {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Ok(SignMatrix::zero(0, 0));
        }
        let base = s.len() - s.trim_start().len();
        let mut rows = Vec::new();
        let mut offset = base;
        for part in trimmed.split(',') {
            let lead = part.len() - part.trim_start().len();
            let face: Face = part.trim().parse().map_err(|e: ParseError| {
                ParseError::at(s, offset + lead + e.column - 1, e.message)
            })?;
            if let Some(first) = rows.first().map(|r: &Face| r.n()) {
                if face.n() != first {
                    return Err(ParseError::at(s, offset + lead, format!("row has {} signs, expected {first}", face.n())));
                }
            }
            rows.push(face);
            offset += part.len() + 1;
        }
        let cols = rows[0].n();
        let entries = rows.iter().flat_map(|r| r.signs.iter().copied()).collect();
        Ok(SignMatrix { rows: rows.len(), cols, entries })
    }
}

/// `a_i = A(a_i)` for every column face `a_i`.
pub fn is_idempotent_projector(a: &SignMatrix) -> bool {
    if a.rows != a.cols {
        return false;
    }
    let cols = a.lifted_columns();
    (0..a.cols).all(|i| {
        let ai = a.column(i);
        a.apply_lifted(&cols, &ai) == ai
    })
}

pub fn apply_projector(a: &SignMatrix, f: &Face) -> Result<Face> {
    a.apply(f)
}

/// A finite `F_inf`-submodule of some `F_inf(n)`, carried as a set of faces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaceModule {
    n: usize,
    elements: BTreeSet<Face>,
}

impl FaceModule {
    pub fn new(n: usize, elements: BTreeSet<Face>) -> Result<Self> {
        if elements.iter().any(|f| f.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: elements.iter().map(Face::n).find(|&k| k != n).unwrap() });
        }
        let m = FaceModule { n, elements };
        if !m.contains(&Face::zero(n)) {
            return Err(Error::WitnessFailure("module does not contain the basepoint".into()));
        }
        Ok(m)
    }

    pub fn free(n: usize) -> Result<Self> {
        Ok(FaceModule { n, elements: enumerate_faces(n)?.into_iter().collect() })
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &BTreeSet<Face> {
        &self.elements
    }

    pub fn contains(&self, f: &Face) -> bool {
        self.elements.contains(f)
    }

    /// Closed under every binary operation `lambda in F_inf(2)`.
    pub fn is_submodule(&self) -> bool {
        let ops = binary_operations();
        self.elements.iter().all(|x| {
            self.elements.iter().all(|y| ops.iter().all(|l| self.contains(&binary_op(l, x, y))))
        })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.elements.iter().map(|f| Value::String(f.to_string())).collect())
    }
}

fn binary_operations() -> Vec<Face> {
    enumerate_faces(2).expect("n = 2 is in budget").into_iter().filter(|f| !f.is_zero()).collect()
}

/// `lambda(x, y)`: lift everything, combine over `Q`, reduce.
pub fn binary_op(lambda: &Face, x: &Face, y: &Face) -> Face {
    let l = lambda.lift_q();
    let (xl, yl) = (x.lift_q(), y.lift_q());
    let v: Vec<Q> = xl.iter().zip(&yl).map(|(a, b)| l[0] * a + l[1] * b).collect();
    reduce_q(&v)
}

/// `{A(f) : f in F_inf(n)}` for an idempotent pattern.
pub fn module_image(a: &SignMatrix) -> Result<FaceModule> {
    if !is_idempotent_projector(a) {
        return Err(Error::NotIdempotent);
    }
    let cols = a.lifted_columns();
    let elements = enumerate_faces(a.cols)?.iter().map(|f| a.apply_lifted(&cols, f)).collect();
    FaceModule::new(a.rows, elements)
}

/// Why a candidate short exact sequence was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SesFailure {
    Shape(String),
    MonoLeavesTarget { x: Face, image: Face },
    MonoNotInjective { x: Face, y: Face },
    EpiLeavesTarget { x: Face, image: Face },
    EpiNotSurjective { missing: Face },
    NotAModule { x: Face, y: Face, lambda: Face },
    /// `x` and `y` are congruent modulo the image of the mono but the epi
    /// separates them, or the converse.
    CokernelMismatch { x: Face, y: Face },
}

impl fmt::Display for SesFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SesFailure::Shape(s) => write!(f, "shape: {s}"),
            SesFailure::MonoLeavesTarget { x, image } => write!(f, "mono sends {x} to {image}, outside the target"),
            SesFailure::MonoNotInjective { x, y } => write!(f, "mono identifies {x} and {y}"),
            SesFailure::EpiLeavesTarget { x, image } => write!(f, "epi sends {x} to {image}, outside the quotient"),
            SesFailure::EpiNotSurjective { missing } => write!(f, "epi misses {missing}"),
            SesFailure::NotAModule { x, y, lambda } => write!(f, "{lambda}({x}, {y}) leaves the middle module"),
            SesFailure::CokernelMismatch { x, y } => write!(f, "cokernel condition fails at {x}, {y}"),
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

/// Check that `sub >-> m ->> quot` is a short exact sequence of
/// `F_inf`-modules: the mono is injective, the epi surjective, and the epi
/// identifies exactly the elements congruent modulo the image of the mono,
/// where congruence is the smallest equivalence relation containing
/// `mono(x) ~ 0` and compatible with all binary operations.
pub fn verify_ses(
    mono: &SignMatrix,
    epi: &SignMatrix,
    sub: &FaceModule,
    m: &FaceModule,
    quot: &FaceModule,
) -> std::result::Result<(), SesFailure> {
    if mono.cols != sub.n || mono.rows != m.n || epi.cols != m.n || epi.rows != quot.n {
        return Err(SesFailure::Shape(format!(
            "mono {}x{}, epi {}x{} vs modules in F(n) for n = {}, {}, {}",
            mono.rows, mono.cols, epi.rows, epi.cols, sub.n, m.n, quot.n
        )));
    }
    let mono_cols = mono.lifted_columns();
    let mut seen: BTreeMap<Face, Face> = BTreeMap::new();
    for x in &sub.elements {
        let image = mono.apply_lifted(&mono_cols, x);
        if !m.contains(&image) {
            return Err(SesFailure::MonoLeavesTarget { x: x.clone(), image });
        }
        if let Some(y) = seen.insert(image, x.clone()) {
            return Err(SesFailure::MonoNotInjective { x: x.clone(), y });
        }
    }
    let epi_cols = epi.lifted_columns();
    let elems: Vec<&Face> = m.elements.iter().collect();
    let mut images = Vec::with_capacity(elems.len());
    for x in &elems {
        let image = epi.apply_lifted(&epi_cols, x);
        if !quot.contains(&image) {
            return Err(SesFailure::EpiLeavesTarget { x: (*x).clone(), image });
        }
        images.push(image);
    }
    let hit: BTreeSet<&Face> = images.iter().collect();
    if let Some(missing) = quot.elements.iter().find(|f| !hit.contains(f)) {
        return Err(SesFailure::EpiNotSurjective { missing: missing.clone() });
    }

    let index: BTreeMap<&Face, usize> = elems.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let zero = index[&Face::zero(m.n)];
    let mut uf = UnionFind((0..elems.len()).collect());
    for image in seen.keys() {
        uf.union(index[image], zero);
    }
    let ops = binary_operations();
    let lookup = |f: &Face, x: &Face, y: &Face, l: &Face| -> std::result::Result<usize, SesFailure> {
        index.get(f).copied().ok_or_else(|| SesFailure::NotAModule { x: x.clone(), y: y.clone(), lambda: l.clone() })
    };
    loop {
        let mut changed = false;
        for i in 0..elems.len() {
            let r = uf.find(i);
            if r == i {
                continue;
            }
            for u in &elems {
                for l in &ops {
                    let a = binary_op(l, elems[i], u);
                    let b = binary_op(l, elems[r], u);
                    let (ia, ib) = (lookup(&a, elems[i], u, l)?, lookup(&b, elems[r], u, l)?);
                    changed |= uf.union(ia, ib);
                }
            }
        }
        if !changed {
            break;
        }
    }
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            let congruent = uf.find(i) == uf.find(j);
            if congruent != (images[i] == images[j]) {
                return Err(SesFailure::CokernelMismatch { x: elems[i].clone(), y: elems[j].clone() });
            }
        }
    }
    Ok(())
}

/// One step of the reduction of a projective module to copies of `F_inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionStep {
    /// Replace `A` by `P A P`; `x -> P x` maps the images onto each other.
    SignConjugation { before: SignMatrix, signs: Vec<i8>, after: SignMatrix },
    /// Coordinate `row` carries a redundant generator: forgetting it is an
    /// isomorphism onto the module of the minor.
    Elimination { before: SignMatrix, row: usize, after: SignMatrix },
    /// Row `row` has a single non-zero entry: `F_inf >-> M ->> M'` with the
    /// mono `1 -> a_row` and the epi forgetting coordinate `row`.
    Peel { before: SignMatrix, row: usize, mono: SignMatrix, epi: SignMatrix, after: SignMatrix },
}

impl ReductionStep {
    pub fn verify(&self) -> Result<()> {
        match self {
            ReductionStep::SignConjugation { before, signs, after } => {
                if &before.conjugate(signs) != after {
                    return Err(Error::WitnessFailure("conjugate does not match".into()));
                }
                let src = module_image(before)?;
                let dst = module_image(after)?;
                let mapped: BTreeSet<Face> = src.elements.iter().map(|f| f.times_signs(signs)).collect();
                if mapped != dst.elements {
                    return Err(Error::WitnessFailure("sign change is not a bijection of modules".into()));
                }
                Ok(())
            }
            ReductionStep::Elimination { before, row, after } => {
                if &before.minor(*row) != after {
                    return Err(Error::WitnessFailure("minor does not match".into()));
                }
                let src = module_image(before)?;
                let dst = module_image(after)?;
                let mapped: BTreeSet<Face> = src.elements.iter().map(|f| f.delete(*row)).collect();
                if mapped.len() != src.len() || mapped != dst.elements {
                    return Err(Error::WitnessFailure("forgetting the coordinate is not a bijection".into()));
                }
                let ops = binary_operations();
                for x in &src.elements {
                    for y in &src.elements {
                        for l in &ops {
                            if binary_op(l, x, y).delete(*row) != binary_op(l, &x.delete(*row), &y.delete(*row)) {
                                return Err(Error::WitnessFailure(format!("forgetting coordinate {row} is not linear")));
                            }
                        }
                    }
                }
                Ok(())
            }
            ReductionStep::Peel { before, row, mono, epi, after } => {
                if before.row_nonzeros(*row) != 1 || &before.minor(*row) != after {
                    return Err(Error::WitnessFailure("peel row does not have a single entry".into()));
                }
                let m = module_image(before)?;
                let quot = module_image(after)?;
                verify_ses(mono, epi, &FaceModule::free(1)?, &m, &quot)
                    .map_err(|e| Error::WitnessFailure(e.to_string()))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ReductionStep::SignConjugation { before, signs, after } => json!({
                "step": "sign_conjugation",
                "before": before.to_string(),
                "signs": Face { signs: signs.clone() }.to_string(),
                "after": after.to_string(),
            }),
            ReductionStep::Elimination { before, row, after } => json!({
                "step": "elimination",
                "before": before.to_string(),
                "row": row,
                "after": after.to_string(),
            }),
            ReductionStep::Peel { before, row, mono, epi, after } => json!({
                "step": "peel",
                "before": before.to_string(),
                "row": row,
                "mono": mono.to_string(),
                "epi": epi.to_string(),
                "after": after.to_string(),
            }),
        }
    }
}

/// The result of reducing `[M]` to a multiple of `[F_inf]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    /// `k` with `[M] = k [F_inf]`.
    pub multiple: usize,
}

impl ReductionTrace {
    pub fn verify(&self) -> Result<()> {
        self.steps.iter().try_for_each(ReductionStep::verify)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "multiple": self.multiple,
            "steps": self.steps.iter().map(ReductionStep::to_json).collect::<Vec<_>>(),
        })
    }
}

fn negative_entries(a: &SignMatrix) -> usize {
    a.entries.iter().filter(|&&s| s < 0).count()
}

/// The diagonal sign change with the fewest negative entries in `P A P`, if
/// it improves on `A`.
fn best_sign_conjugation(a: &SignMatrix) -> Option<Vec<i8>> {
    let n = a.rows;
    let base = negative_entries(a);
    let mut best: Option<(usize, Vec<i8>)> = None;
    for mask in 1u32..(1 << n) {
        let signs: Vec<i8> = (0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
        let count = negative_entries(&a.conjugate(&signs));
        if count < base && best.as_ref().is_none_or(|(c, _)| count < *c) {
            best = Some((count, signs));
        }
    }
    best.map(|(_, s)| s)
}

/// Reduce the projective module of an idempotent pattern to a multiple of
/// `[F_inf]`: optionally normalise signs once, then repeatedly peel a row with
/// a single non-zero entry or eliminate a redundant generator. Every step is verified
/// as it is produced.
pub fn k0_reduce(a: &SignMatrix) -> Result<ReductionTrace> {
    if !is_idempotent_projector(a) {
        return Err(Error::NotIdempotent);
    }
    let mut steps = Vec::new();
    let mut current = a.clone();
    if let Some(signs) = best_sign_conjugation(&current) {
        let after = current.conjugate(&signs);
        let step = ReductionStep::SignConjugation { before: current, signs, after: after.clone() };
        step.verify()?;
        steps.push(step);
        current = after;
    }
    let mut multiple = 0;
    while current.rows > 0 {
        let n = current.rows;
        let mut advanced = false;
        for r in (0..n).filter(|&r| current.row_nonzeros(r) == 1) {
            let after = current.minor(r);
            if !is_idempotent_projector(&after) {
                continue;
            }
            let step = ReductionStep::Peel {
                before: current.clone(),
                row: r,
                mono: SignMatrix::column_of(&current.column(r)),
                epi: SignMatrix::forget(n, r),
                after: after.clone(),
            };
            if step.verify().is_ok() {
                steps.push(step);
                current = after;
                multiple += 1;
                advanced = true;
                break;
            }
        }
        if advanced {
            continue;
        }
        for r in 0..n {
            let after = current.minor(r);
            if !is_idempotent_projector(&after) {
                continue;
            }
            let step = ReductionStep::Elimination { before: current.clone(), row: r, after: after.clone() };
            if step.verify().is_ok() {
                steps.push(step);
                current = after;
                advanced = true;
                break;
            }
        }
        if !advanced {
            return Err(Error::NormalFormFailure(current.to_string()));
        }
    }
    Ok(ReductionTrace { steps, multiple })
}

/// A relation `[module] = [sub] + [quotient]` in `K_0(F_inf)`, with the maps
/// that witness it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K0Relation {
    pub module: String,
    pub sub: String,
    pub quotient: String,
    pub mono: SignMatrix,
    pub epi: SignMatrix,
    pub carrier_sizes: [usize; 3],
}

impl K0Relation {
    pub fn to_json(&self) -> Value {
        json!({
            "relation": format!("[{}] = [{}] + [{}]", self.module, self.sub, self.quotient),
            "mono": self.mono.to_string(),
            "epi": self.epi.to_string(),
            "carriers": self.carrier_sizes.to_vec(),
        })
    }
}

/// Witnessed relations among the classes of named projective modules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct K0Ledger {
    modules: BTreeMap<String, FaceModule>,
    pub relations: Vec<K0Relation>,
}

impl K0Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_module(&mut self, name: &str, module: FaceModule) {
        self.modules.insert(name.to_string(), module);
    }

    pub fn module(&self, name: &str) -> Option<&FaceModule> {
        self.modules.get(name)
    }

    /// Record `[module] = [sub] + [quotient]` after verifying the sequence.
    pub fn relate(&mut self, module: &str, sub: &str, quotient: &str, mono: SignMatrix, epi: SignMatrix) -> Result<()> {
        let get = |name: &str| {
            self.modules.get(name).ok_or_else(|| Error::WitnessFailure(format!("unknown module {name}")))
        };
        let (s, m, q) = (get(sub)?, get(module)?, get(quotient)?);
        verify_ses(&mono, &epi, s, m, q).map_err(|e| Error::WitnessFailure(format!("[{module}] = [{sub}] + [{quotient}]: {e}")))?;
        let carrier_sizes = [s.len(), m.len(), q.len()];
        self.relations.push(K0Relation {
            module: module.into(),
            sub: sub.into(),
            quotient: quotient.into(),
            mono,
            epi,
            carrier_sizes,
        });
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.modules.keys().map(String::as_str).collect()
    }

    /// Free abelian group on the module names modulo the relations and any
    /// `extra` relations given as coefficient maps.
    pub fn group(&self, extra: &[BTreeMap<String, i64>]) -> AbGroupDescriptor {
        let names = self.names();
        let mut rows = Vec::new();
        for r in &self.relations {
            let mut row = vec![BigInt::zero(); names.len()];
            let pos = |n: &str| names.iter().position(|m| *m == n).unwrap();
            row[pos(&r.module)] += 1;
            row[pos(&r.sub)] -= 1;
            row[pos(&r.quotient)] -= 1;
            rows.push(row);
        }
        for e in extra {
            let mut row = vec![BigInt::zero(); names.len()];
            for (n, &c) in e {
                if let Some(p) = names.iter().position(|m| m == n) {
                    row[p] += c;
                }
            }
            rows.push(row);
        }
        cokernel_descriptor(names.len(), &rows)
    }
}

pub const F_INF: &str = "F_inf";
pub const F_INF_2: &str = "F_inf(2)";
pub const P_MODULE: &str = "P";

/// Everything `k0_f_infinity` establishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K0Computation {
    pub ledger: K0Ledger,
    /// `[F_inf(2)] = multiple * [F_inf]`, from reducing the identity pattern.
    pub free_reduction: ReductionTrace,
    pub group: AbGroupDescriptor,
}

/// `K_0(F_inf) = 0`, from the two witnessed sequences for `P` and the
/// reduction `[F_inf(2)] = 2 [F_inf]`.
pub fn k0_f_infinity() -> Result<K0Computation> {
    let mut ledger = K0Ledger::new();
    ledger.add_module(F_INF, FaceModule::free(1)?);
    ledger.add_module(F_INF_2, FaceModule::free(2)?);
    ledger.add_module(P_MODULE, module_image(&SignMatrix::p_projector())?);
    // F_inf --(1/2,1/2)--> P --(0 1)--> F_inf
    ledger.relate(
        P_MODULE,
        F_INF,
        F_INF,
        SignMatrix::column_of(&"++".parse().expect("literal")),
        SignMatrix::forget(2, 0),
    )?;
    // P --incl--> F_inf(2) --(1 0)--> F_inf, the quotient spanned by e_1
    ledger.relate(F_INF_2, P_MODULE, F_INF, SignMatrix::identity(2), SignMatrix::forget(2, 1))?;
    let free_reduction = k0_reduce(&SignMatrix::identity(2))?;
    free_reduction.verify()?;
    let free_relation: BTreeMap<String, i64> =
        [(F_INF_2.to_string(), 1), (F_INF.to_string(), -(free_reduction.multiple as i64))].into();
    let group = ledger.group(&[free_relation]);
    Ok(K0Computation { ledger, free_reduction, group })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn face(s: &str) -> Face {
        s.parse().unwrap()
    }

    fn faces(xs: &[&str]) -> BTreeSet<Face> {
        xs.iter().map(|s| face(s)).collect()
    }

    #[test]
    fn face_counts() {
        assert_eq!(enumerate_faces(1).unwrap(), vec![face("-"), face("0"), face("+")]);
        assert_eq!(enumerate_faces(2).unwrap().len(), 9);
        assert_eq!(enumerate_faces(3).unwrap().len(), 27);
        assert!(matches!(enumerate_faces(13), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn projection_and_lifts() {
        let v = |xs: &[(i64, i64)]| {
            Vector::<i64>::new(FieldDescriptor::Rationals, xs.iter().map(|&(a, b)| Element::frac(a, b)).collect())
                .unwrap()
        };
        assert_eq!(project(&v(&[(1, 2), (1, 2)])), face("++"));
        assert_eq!(project(&v(&[(0, 1), (1, 1)])), face("0+"));
        assert_eq!(project(&v(&[(-1, 3), (0, 1), (1, 3)])), face("-0+"));
        assert_eq!(reduce(&v(&[(-1, 3), (0, 1), (1, 3)])), face("000"));
        assert_eq!(face("++").barycentric_lift::<i64>(), v(&[(1, 2), (1, 2)]));
        assert_eq!(face("0-").barycentric_lift::<i64>(), v(&[(0, 1), (-1, 1)]));
        assert_eq!(face("00").barycentric_lift::<i64>(), v(&[(0, 1), (0, 1)]));
    }

    #[test]
    fn p_projector_action() {
        let p = SignMatrix::p_projector();
        assert_eq!(p.to_string(), "+0,++");
        assert_eq!(p.apply(&face("+0")).unwrap(), face("++"));
        assert_eq!(p.apply(&face("0+")).unwrap(), face("0+"));
        assert_eq!(SignMatrix::identity(2).apply(&face("-+")).unwrap(), face("-+"));
        assert!(is_idempotent_projector(&p));
        assert!(is_idempotent_projector(&SignMatrix::identity(3)));
        assert!(!is_idempotent_projector(&"0+,+0".parse().unwrap()));
    }

    #[test]
    fn module_images() {
        assert_eq!(module_image(&SignMatrix::identity(2)).unwrap().len(), 9);
        let p = module_image(&SignMatrix::p_projector()).unwrap();
        assert_eq!(p.elements(), &faces(&["00", "0+", "0-", "++", "--"]));
        assert!(p.is_submodule());
        assert_eq!(module_image(&SignMatrix::zero(2, 2)).unwrap().elements(), &faces(&["00"]));
        assert_eq!(module_image(&"0+,+0".parse().unwrap()), Err(Error::NotIdempotent));
    }

    #[test]
    fn paper_sequences() {
        let f1 = FaceModule::free(1).unwrap();
        let f2 = FaceModule::free(2).unwrap();
        let p = module_image(&SignMatrix::p_projector()).unwrap();
        let first = verify_ses(&"+,+".parse().unwrap(), &"0+".parse().unwrap(), &f1, &p, &f1);
        assert_eq!(first, Ok(()));
        let second = verify_ses(&SignMatrix::identity(2), &"+0".parse().unwrap(), &p, &f2, &f1);
        assert_eq!(second, Ok(()));
        let zero_mono = verify_ses(&"0,0".parse().unwrap(), &"0+".parse().unwrap(), &f1, &p, &f1);
        assert!(matches!(zero_mono, Err(SesFailure::MonoNotInjective { .. })));
        // the wrong quotient coordinate leaves e_2 in the cokernel
        let wrong = verify_ses(&"+,+".parse().unwrap(), &"+0".parse().unwrap(), &f1, &p, &f1);
        assert!(wrong.is_err());
    }

    #[test]
    fn reductions() {
        let t = k0_reduce(&SignMatrix::identity(2)).unwrap();
        assert_eq!(t.multiple, 2);
        assert_eq!(t.steps.len(), 2);
        t.verify().unwrap();
        let t = k0_reduce(&SignMatrix::p_projector()).unwrap();
        assert_eq!(t.multiple, 2);
        assert!(matches!(&t.steps[0], ReductionStep::Peel { row: 0, mono, .. } if mono.to_string() == "+,+"));
        let t = k0_reduce(&SignMatrix::identity(1)).unwrap();
        assert_eq!(t.multiple, 1);
        assert_eq!(k0_reduce(&"0+,+0".parse().unwrap()), Err(Error::NotIdempotent));
    }

    #[test]
    fn k0_vanishes() {
        let k = k0_f_infinity().unwrap();
        assert!(k.group.is_trivial());
        let rels: Vec<String> = k.ledger.relations.iter().map(|r| r.to_json()["relation"].as_str().unwrap().to_string()).collect();
        assert!(rels.contains(&"[F_inf(2)] = [P] + [F_inf]".to_string()));
        assert!(rels.contains(&"[P] = [F_inf] + [F_inf]".to_string()));
        assert_eq!(k.free_reduction.multiple, 2);
        let mut sizes: Vec<usize> = k.ledger.relations.iter().flat_map(|r| r.carrier_sizes).collect();
        sizes.sort();
        sizes.dedup();
        assert_eq!(sizes, vec![3, 5, 9]);
    }

    #[test]
    fn sign_matrix_parse_errors() {
        let e = "+0,+x".parse::<SignMatrix>().unwrap_err();
        assert_eq!(e.column, 5);
        let e = "+0,+".parse::<SignMatrix>().unwrap_err();
        assert!(e.message.contains("expected 2"));
    }
}
