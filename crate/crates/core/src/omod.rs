//! Free modules `O(n)` over an archimedean valuation ring and the morphisms
//! between them.
//!
//! A morphism `O(n') -> O(n)` is an `n x n'` matrix whose columns lie in the
//! unit L1-ball. Cofibrations between free modules are decided through their
//! monomial normal form: one entry per column, of norm one, no two columns in
//! the same row.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde_json::{json, Value};

use crate::error::{Error, ParseError, Result};
use crate::field::{Element, FieldDescriptor, Scalar, UnitElement};
use crate::wreath::{Permutation, WreathElement};

/// `sum |x_i| <= 1`, decided exactly.
pub fn is_module_vector<T: Scalar>(field: FieldDescriptor, entries: &[Element<T>]) -> Result<bool> {
    for x in entries {
        field.check(x)?;
    }
    Ok(field.cmp_norm_sum(entries, &Ratio::from_integer(T::one()))? != Ordering::Greater)
}

/// An element of `O(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vector<T: Scalar> {
    entries: Vec<Element<T>>,
}

impl<T: Scalar> Vector<T> {
    pub fn new(field: FieldDescriptor, entries: Vec<Element<T>>) -> Result<Self> {
        if is_module_vector(field, &entries)? {
            Ok(Vector { entries })
        } else {
            Err(Error::NotInModule)
        }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut entries = vec![Element::zero(); n];
        entries[i] = Element::one();
        Vector { entries }
    }

    pub fn zero(n: usize) -> Self {
        Vector { entries: vec![Element::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Element<T>] {
        &self.entries
    }

    /// `|x| = 1`: the vector lies on the boundary `E(n)`.
    pub fn is_boundary(&self, field: FieldDescriptor) -> Result<bool> {
        Ok(field.cmp_norm_sum(&self.entries, &Ratio::from_integer(T::one()))? == Ordering::Equal)
    }
}

/// A matrix over `K` with no norm condition; the image of a morphism under
/// base change `(-)_K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KMatrix<T: Scalar> {
    field: FieldDescriptor,
    rows: usize,
    cols: usize,
    /// row-major
    data: Vec<Element<T>>,
}

impl<T: Scalar> KMatrix<T> {
    pub fn new(field: FieldDescriptor, rows: usize, cols: usize, data: Vec<Element<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        for x in &data {
            field.check(x)?;
        }
        Ok(KMatrix { field, rows, cols, data })
    }

    pub fn zero(field: FieldDescriptor, rows: usize, cols: usize) -> Self {
        KMatrix { field, rows, cols, data: vec![Element::zero(); rows * cols] }
    }

    pub fn identity(field: FieldDescriptor, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = Element::one();
        }
        m
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Element<T> {
        &self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, x: Element<T>) {
        self.data[i * self.cols + j] = x;
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let mut out = Self::zero(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let sum = out.get(i, j) + &self.field.mul(a, b);
                    out.set(i, j, sum);
                }
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = self.field.inv(m.get(r, c)).expect("pivot is non-zero");
            for j in 0..m.cols {
                let x = self.field.mul(m.get(r, j), &inv);
                m.set(r, j, x);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in 0..m.cols {
                    let x = m.get(i, j) - &self.field.mul(&factor, m.get(r, j));
                    m.set(i, j, x);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of `{x : self * x = 0}`, as columns.
    pub fn kernel_basis(&self) -> Vec<Vec<Element<T>>> {
        let (m, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Element::zero(); self.cols];
                v[f] = Element::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -m.get(r, f);
                }
                v
            })
            .collect()
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: other.rows });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
            data.extend_from_slice(&other.data[i * other.cols..(i + 1) * other.cols]);
        }
        Ok(KMatrix { field: self.field, rows: self.rows, cols, data })
    }

    pub fn from_columns(field: FieldDescriptor, rows: usize, columns: &[Vec<Element<T>>]) -> Self {
        let mut m = Self::zero(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<Element<T>> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }
}

/// A morphism `O(cols) -> O(rows)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T: Scalar> {
    inner: KMatrix<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Validates that every column lies in `O(rows)`.
    pub fn from_row_major(field: FieldDescriptor, rows: usize, cols: usize, data: Vec<Element<T>>) -> Result<Self> {
        Self::from_k(KMatrix::new(field, rows, cols, data)?)
    }

    pub fn from_columns(field: FieldDescriptor, rows: usize, columns: Vec<Vec<Element<T>>>) -> Result<Self> {
        for c in &columns {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.len() });
            }
        }
        Self::from_k(KMatrix::from_columns(field, rows, &columns))
    }

    pub fn from_k(inner: KMatrix<T>) -> Result<Self> {
        for j in 0..inner.cols {
            if !is_module_vector(inner.field, &inner.column(j))? {
                return Err(Error::NotInModule);
            }
        }
        Ok(Matrix { inner })
    }

    pub(crate) fn from_k_unchecked(inner: KMatrix<T>) -> Self {
        Matrix { inner }
    }

    pub fn identity(field: FieldDescriptor, n: usize) -> Self {
        Matrix { inner: KMatrix::identity(field, n) }
    }

    pub fn zero(field: FieldDescriptor, rows: usize, cols: usize) -> Self {
        Matrix { inner: KMatrix::zero(field, rows, cols) }
    }

    pub fn field(&self) -> FieldDescriptor {
        self.inner.field
    }

    pub fn rows(&self) -> usize {
        self.inner.rows
    }

    pub fn cols(&self) -> usize {
        self.inner.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Element<T> {
        self.inner.get(i, j)
    }

    pub fn column(&self, j: usize) -> Vector<T> {
        Vector { entries: self.inner.column(j) }
    }

    pub fn as_k(&self) -> &KMatrix<T> {
        &self.inner
    }

    /// `self * other`, re-validated column by column.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let product = self.inner.mul(&other.inner)?;
        Matrix::from_k(product).map_err(|e| match e {
            Error::NotInModule => Error::WitnessFailure("composite left the unit ball".into()),
            e => e,
        })
    }

    /// Canonical text form: row-major JSON array of element strings.
    pub fn to_json(&self) -> Value {
        let f = self.field();
        Value::Array(
            (0..self.rows())
                .map(|i| Value::Array((0..self.cols()).map(|j| Value::String(f.format(self.get(i, j)))).collect()))
                .collect(),
        )
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Identity on entries: forget the norm condition.
pub fn base_change_k<T: Scalar>(a: &Matrix<T>) -> KMatrix<T> {
    a.inner.clone()
}

/// Injective over `K`, equivalently injective on `O`-points.
pub fn is_monomorphism<T: Scalar>(a: &Matrix<T>) -> bool {
    a.inner.rank() == a.cols()
}

/// Why a matrix is not a cofibration. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CofibRefusal {
    NotMono,
    NonUnitEntry { row: usize, col: usize },
    MultipleEntries { col: usize },
    SharedRow { row: usize },
}

impl fmt::Display for CofibRefusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CofibRefusal::NotMono => write!(f, "NotMono"),
            CofibRefusal::NonUnitEntry { row, col } => write!(f, "NonUnitEntry({row},{col})"),
            CofibRefusal::MultipleEntries { col } => write!(f, "MultipleEntries({col})"),
            CofibRefusal::SharedRow { row } => write!(f, "SharedRow({row})"),
        }
    }
}

impl CofibRefusal {
    pub fn kind(&self) -> &'static str {
        match self {
            CofibRefusal::NotMono => "NotMono",
            CofibRefusal::NonUnitEntry { .. } => "NonUnitEntry",
            CofibRefusal::MultipleEntries { .. } => "MultipleEntries",
            CofibRefusal::SharedRow { .. } => "SharedRow",
        }
    }
}

/// Normal form of a cofibration `O(n') >-> O(n)`: basis vector `e_i` goes to
/// `units[i] * e_{col_to_row[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Certificate<T: Scalar> {
    field: FieldDescriptor,
    rows: usize,
    col_to_row: Vec<usize>,
    units: Vec<UnitElement<T>>,
    complement_rows: Vec<usize>,
}

impl<T: Scalar> Certificate<T> {
    pub fn new(field: FieldDescriptor, rows: usize, col_to_row: Vec<usize>, units: Vec<UnitElement<T>>) -> Result<Self> {
        if col_to_row.len() != units.len() {
            return Err(Error::DimensionMismatch { expected: col_to_row.len(), found: units.len() });
        }
        let mut hit = vec![false; rows];
        for &r in &col_to_row {
            if r >= rows || hit[r] {
                return Err(Error::WitnessFailure(format!("row {r} is out of range or hit twice")));
            }
            hit[r] = true;
        }
        if units.iter().any(|u| u.field() != field) {
            return Err(Error::FieldMismatch);
        }
        let complement_rows = (0..rows).filter(|&r| !hit[r]).collect();
        Ok(Certificate { field, rows, col_to_row, units, complement_rows })
    }

    /// The standard inclusion `O(n') >-> O(n)`, `e_i -> e_i`.
    pub fn inclusion(field: FieldDescriptor, from: usize, to: usize) -> Self {
        assert!(from <= to);
        Certificate::new(field, to, (0..from).collect(), vec![UnitElement::one(field); from])
            .expect("standard inclusion is valid")
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    /// Rank of the source.
    pub fn source_rank(&self) -> usize {
        self.col_to_row.len()
    }

    /// Rank of the target.
    pub fn target_rank(&self) -> usize {
        self.rows
    }

    pub fn col_to_row(&self) -> &[usize] {
        &self.col_to_row
    }

    pub fn units(&self) -> &[UnitElement<T>] {
        &self.units
    }

    pub fn complement_rows(&self) -> &[usize] {
        &self.complement_rows
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        let mut m = KMatrix::zero(self.field, self.rows, self.source_rank());
        for (i, (&r, u)) in self.col_to_row.iter().zip(&self.units).enumerate() {
            m.set(r, i, u.value().clone());
        }
        Matrix::from_k_unchecked(m)
    }

    /// Rank of the cokernel and the projection onto it, complement rows in
    /// increasing order.
    pub fn cokernel(&self) -> (usize, Matrix<T>) {
        let k = self.complement_rows.len();
        let mut m = KMatrix::zero(self.field, k, self.rows);
        for (idx, &r) in self.complement_rows.iter().enumerate() {
            m.set(idx, r, Element::one());
        }
        (k, Matrix::from_k_unchecked(m))
    }

    /// The isomorphism `O(n) -> O(n') + O(n - n')` that turns this cofibration
    /// into the standard inclusion and its cokernel projection into the
    /// standard projection.
    pub fn splitting_iso(&self) -> Matrix<T> {
        let n = self.rows;
        let n_from = self.source_rank();
        let mut m = KMatrix::zero(self.field, n, n);
        for (i, (&r, u)) in self.col_to_row.iter().zip(&self.units).enumerate() {
            m.set(i, r, u.inverse().into_value());
        }
        for (k, &r) in self.complement_rows.iter().enumerate() {
            m.set(n_from + k, r, Element::one());
        }
        Matrix::from_k_unchecked(m)
    }

    /// `other . self` for `self: A >-> B`, `other: B >-> C`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if self.rows != other.source_rank() {
            return Err(Error::DimensionMismatch { expected: other.source_rank(), found: self.rows });
        }
        let rows = self.col_to_row.iter().map(|&r| other.col_to_row[r]).collect();
        let units = self
            .col_to_row
            .iter()
            .zip(&self.units)
            .map(|(&r, u)| other.units[r].mul(u))
            .collect();
        Certificate::new(self.field, other.rows, rows, units)
    }

    /// `{"cols":[{"row":r,"unit":"..."}],"rows":n}` with 0-based rows.
    pub fn to_json(&self) -> Value {
        let cols: Vec<Value> = self
            .col_to_row
            .iter()
            .zip(&self.units)
            .map(|(&r, u)| json!({"row": r, "unit": self.field.format(u.value())}))
            .collect();
        json!({"cols": cols, "rows": self.rows})
    }
}

/// Decide whether `a` is a cofibration. Refusals are reported in the order
/// NotMono, NonUnitEntry, MultipleEntries, SharedRow.
pub fn is_cofibration<T: Scalar>(a: &Matrix<T>) -> std::result::Result<Certificate<T>, CofibRefusal> {
    if !is_monomorphism(a) {
        return Err(CofibRefusal::NotMono);
    }
    let field = a.field();
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            let x = a.get(i, j);
            if !x.is_zero() && !field.is_unit_norm(x) {
                return Err(CofibRefusal::NonUnitEntry { row: i, col: j });
            }
        }
    }
    let mut col_to_row = Vec::with_capacity(a.cols());
    let mut units = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let nonzero: Vec<usize> = (0..a.rows()).filter(|&i| !a.get(i, j).is_zero()).collect();
        if nonzero.len() != 1 {
            return Err(CofibRefusal::MultipleEntries { col: j });
        }
        col_to_row.push(nonzero[0]);
        units.push(UnitElement::new(field, a.get(nonzero[0], j).clone()).expect("entry has norm one"));
    }
    let mut seen = vec![false; a.rows()];
    for &r in &col_to_row {
        if seen[r] {
            return Err(CofibRefusal::SharedRow { row: r });
        }
        seen[r] = true;
    }
    Ok(Certificate::new(field, a.rows(), col_to_row, units).expect("checked injective"))
}

/// Decompose a square matrix as an element of `E wr S_n`, if it is one.
pub fn is_automorphism<T: Scalar>(
    a: &Matrix<T>,
) -> Result<std::result::Result<WreathElement<UnitElement<T>>, CofibRefusal>> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    let cert = match is_cofibration(a) {
        Ok(c) => c,
        Err(r) => return Ok(Err(r)),
    };
    let n = a.rows();
    let perm = Permutation::from_images(cert.col_to_row.clone()).expect("square cofibration is a bijection");
    let mut units = vec![UnitElement::one(a.field()); n];
    for (j, &r) in cert.col_to_row.iter().enumerate() {
        units[r] = cert.units[j].clone();
    }
    Ok(Ok(WreathElement::new(units, perm).expect("lengths agree")))
}

/// The cobase change of a cofibration along a map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pushout<T: Scalar> {
    /// `N >-> N + M''`, the standard inclusion.
    pub cofib: Certificate<T>,
    /// `M -> N + M''`.
    pub attach: Matrix<T>,
    source: Certificate<T>,
    map: Matrix<T>,
}

/// Pushout of `iota: M' >-> M` along `f: M' -> N`.
pub fn pushout<T: Scalar>(iota: &Certificate<T>, f: &Matrix<T>) -> Result<Pushout<T>> {
    if f.cols() != iota.source_rank() {
        return Err(Error::DimensionMismatch { expected: iota.source_rank(), found: f.cols() });
    }
    if f.field() != iota.field {
        return Err(Error::FieldMismatch);
    }
    let field = iota.field;
    let n_target = f.rows();
    let quotient = iota.complement_rows.len();
    let total = n_target + quotient;
    let mut attach = KMatrix::zero(field, total, iota.rows);
    for (i, (&r, u)) in iota.col_to_row.iter().zip(&iota.units).enumerate() {
        let inv = u.inverse();
        for k in 0..n_target {
            attach.set(k, r, field.mul(f.get(k, i), inv.value()));
        }
    }
    for (k, &r) in iota.complement_rows.iter().enumerate() {
        attach.set(n_target + k, r, Element::one());
    }
    let po = Pushout {
        cofib: Certificate::inclusion(field, n_target, total),
        attach: Matrix::from_k(attach)?,
        source: iota.clone(),
        map: f.clone(),
    };
    if !po.square_commutes()? {
        return Err(Error::WitnessFailure("pushout square does not commute".into()));
    }
    Ok(po)
}

impl<T: Scalar> Pushout<T> {
    /// `attach . iota = cofib . f`, exactly.
    pub fn square_commutes(&self) -> Result<bool> {
        let left = self.attach.inner.mul(&self.source.to_matrix().inner)?;
        let right = self.cofib.to_matrix().inner.mul(&self.map.inner)?;
        Ok(left == right)
    }

    /// The map `N + M'' -> X` induced by a cocone `g: N -> X`, `h: M -> X`
    /// with `g . f = h . iota`, checked to restrict to `g` and `h`.
    pub fn induced(&self, g: &Matrix<T>, h: &Matrix<T>) -> Result<Matrix<T>> {
        let lhs = g.inner.mul(&self.map.inner)?;
        let rhs = h.inner.mul(&self.source.to_matrix().inner)?;
        if lhs != rhs {
            return Err(Error::WitnessFailure("cocone does not commute".into()));
        }
        let mut columns: Vec<Vec<Element<T>>> = (0..g.cols()).map(|j| g.inner.column(j)).collect();
        columns.extend(self.source.complement_rows.iter().map(|&r| h.inner.column(r)));
        let u = Matrix::from_columns(g.field(), g.rows(), columns)?;
        let via_cofib = u.inner.mul(&self.cofib.to_matrix().inner)?;
        let via_attach = u.inner.mul(&self.attach.inner)?;
        if via_cofib != g.inner || via_attach != h.inner {
            return Err(Error::WitnessFailure("induced map does not restrict correctly".into()));
        }
        Ok(u)
    }
}

/// A finitely generated projective module, the image of an idempotent on `O(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projective<T: Scalar> {
    idempotent: Matrix<T>,
}

impl<T: Scalar> Projective<T> {
    pub fn new(idempotent: Matrix<T>) -> Result<Self> {
        if idempotent.rows() != idempotent.cols() {
            return Err(Error::DimensionMismatch { expected: idempotent.rows(), found: idempotent.cols() });
        }
        if idempotent.inner.mul(&idempotent.inner)? != idempotent.inner {
            return Err(Error::NotIdempotent);
        }
        Ok(Projective { idempotent })
    }

    pub fn free(field: FieldDescriptor, n: usize) -> Self {
        Projective { idempotent: Matrix::identity(field, n) }
    }

    pub fn ambient_rank(&self) -> usize {
        self.idempotent.rows()
    }

    pub fn idempotent(&self) -> &Matrix<T> {
        &self.idempotent
    }
}

/// The rank of `P_K`: the image of `[P]` under `K_0(O) -> K_0(K) = Z`.
pub fn k0_class<T: Scalar>(p: &Projective<T>) -> usize {
    p.idempotent.inner.rank()
}

/// Parse a matrix literal: a row-major array of rows, each an array of field
/// elements, quoted or bare, e.g. `[[1/2],["1/2"]]`. `[]` is the empty matrix.
pub fn parse_matrix<T: Scalar>(field: FieldDescriptor, input: &str) -> std::result::Result<KMatrix<T>, ParseError> {
    let mut p = MatrixParser { input, pos: 0 };
    let rows = p.rows(field)?;
    p.ws();
    if p.pos != input.len() {
        return Err(ParseError::at(input, p.pos, "trailing input after matrix"));
    }
    let ncols = rows.first().map_or(0, |r| r.1.len());
    let mut data = Vec::new();
    for (idx, (start, row)) in rows.into_iter().enumerate() {
        if row.len() != ncols {
            return Err(ParseError::at(
                input,
                start,
                format!("row {idx} has {} entries, expected {ncols}", row.len()),
            ));
        }
        data.extend(row);
    }
    let nrows = data.len().checked_div(ncols).unwrap_or(0);
    Ok(KMatrix { field, rows: nrows, cols: ncols, data })
}

struct MatrixParser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> MatrixParser<'a> {
    fn ws(&mut self) {
        while self.input[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> std::result::Result<(), ParseError> {
        self.ws();
        if self.input[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::at(self.input, self.pos, format!("expected `{c}`")))
        }
    }

    fn peek_is(&mut self, c: char) -> bool {
        self.ws();
        self.input[self.pos..].starts_with(c)
    }

    /// Returns each row with its starting offset.
    #[allow(clippy::type_complexity)]
    fn rows<T: Scalar>(
        &mut self,
        field: FieldDescriptor,
    ) -> std::result::Result<Vec<(usize, Vec<Element<T>>)>, ParseError> {
        self.expect('[')?;
        let mut rows = Vec::new();
        if self.peek_is(']') {
            self.pos += 1;
            return Ok(rows);
        }
        loop {
            self.ws();
            let start = self.pos;
            rows.push((start, self.row(field)?));
            if self.peek_is(',') {
                self.pos += 1;
                continue;
            }
            self.expect(']')?;
            return Ok(rows);
        }
    }

    fn row<T: Scalar>(&mut self, field: FieldDescriptor) -> std::result::Result<Vec<Element<T>>, ParseError> {
        self.expect('[')?;
        let mut row = Vec::new();
        if self.peek_is(']') {
            self.pos += 1;
            return Ok(row);
        }
        loop {
            row.push(self.entry(field)?);
            if self.peek_is(',') {
                self.pos += 1;
                continue;
            }
            self.expect(']')?;
            return Ok(row);
        }
    }

    fn entry<T: Scalar>(&mut self, field: FieldDescriptor) -> std::result::Result<Element<T>, ParseError> {
        self.ws();
        let rest = &self.input[self.pos..];
        let (start, text, advance) = if let Some(body) = rest.strip_prefix('"') {
            let end = body
                .find('"')
                .ok_or_else(|| ParseError::at(self.input, self.pos, "unterminated string"))?;
            (self.pos + 1, &body[..end], end + 2)
        } else {
            let mut depth = 0i32;
            let mut end = rest.len();
            for (k, c) in rest.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ',' | ']' if depth == 0 => {
                        end = k;
                        break;
                    }
                    _ => {}
                }
            }
            (self.pos, &rest[..end], end)
        };
        let x = field.parse_element::<T>(text).map_err(|e| {
            // re-anchor the error inside the whole literal
            let offset = start + text.char_indices().nth(e.column.saturating_sub(1)).map_or(text.len(), |(i, _)| i);
            ParseError::at(self.input, offset, e.message)
        })?;
        self.pos += advance;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wreath::GroupElement;
    use num_bigint::BigInt;

    type E = Element<BigInt>;
    const Q: FieldDescriptor = FieldDescriptor::Rationals;

    fn mat(field: FieldDescriptor, s: &str) -> Matrix<BigInt> {
        Matrix::from_k(parse_matrix(field, s).unwrap()).unwrap()
    }

    #[test]
    fn module_vectors() {
        assert!(is_module_vector(Q, &[E::frac(1, 2), E::frac(1, 2)]).unwrap());
        assert!(!is_module_vector(Q, &[E::one(), E::one()]).unwrap());
        let g = FieldDescriptor::Gaussian;
        assert!(!is_module_vector(g, &[E::from_parts(1, 1, 2), E::from_parts(1, 1, 2)]).unwrap());
        assert!(Vector::new(Q, vec![E::frac(1, 2), E::frac(-1, 2)]).unwrap().is_boundary(Q).unwrap());
    }

    #[test]
    fn compose_examples() {
        let a = mat(Q, "[[1/2],[1/2]]");
        let s = mat(Q, "[[1/2]]");
        assert_eq!(a.compose(&s).unwrap(), mat(Q, "[[1/4],[1/4]]"));
        assert_eq!(a.compose(&Matrix::identity(Q, 1)).unwrap(), a);
        let swap = mat(Q, "[[0,1],[1,0]]");
        assert_eq!(swap.compose(&swap).unwrap(), Matrix::identity(Q, 2));
        assert!(matches!(a.compose(&a), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn monomorphisms() {
        assert!(is_monomorphism(&mat(Q, "[[1/2],[1/2]]")));
        assert!(!is_monomorphism(&mat(Q, "[[0],[0]]")));
        assert!(!is_monomorphism(&mat(Q, "[[1/2,1/2],[0,0]]")));
    }

    #[test]
    fn cofibration_examples() {
        let c = is_cofibration(&mat(Q, "[[1],[0]]")).unwrap();
        assert_eq!(c.col_to_row(), &[0]);
        assert!(c.units()[0].is_one());
        assert_eq!(is_cofibration(&mat(Q, "[[1/2],[1/2]]")), Err(CofibRefusal::NonUnitEntry { row: 0, col: 0 }));
        assert_eq!(is_cofibration(&mat(Q, "[[0,1],[0,0]]")), Err(CofibRefusal::NotMono));
        assert_eq!(is_cofibration(&mat(Q, "[[1,0],[0,1],[0,0]]")).unwrap().complement_rows(), &[2]);
        let d = is_cofibration(&mat(Q, "[[0],[-1]]")).unwrap();
        assert_eq!(d.col_to_row(), &[1]);
        assert_eq!(d.units()[0].value(), &E::frac(-1, 1));
        assert_eq!(d.to_json().to_string(), r#"{"cols":[{"row":1,"unit":"-1"}],"rows":2}"#);
    }

    #[test]
    fn gaussian_unit_entries() {
        let g = FieldDescriptor::Gaussian;
        let c = is_cofibration(&mat(g, "[[0,3/5+4/5*i],[0,0],[-i,0]]")).unwrap();
        assert_eq!(c.col_to_row(), &[2, 0]);
        assert_eq!(c.complement_rows(), &[1]);
        assert_eq!(is_cofibration(&mat(g, "[[1/2+1/2*i],[0]]")), Err(CofibRefusal::NonUnitEntry { row: 0, col: 0 }));
    }

    #[test]
    fn cokernels() {
        let (k, p) = is_cofibration(&mat(Q, "[[1],[0]]")).unwrap().cokernel();
        assert_eq!((k, p), (1, mat(Q, "[[0,1]]")));
        let (k, p) = is_cofibration(&mat(Q, "[[0],[-1]]")).unwrap().cokernel();
        assert_eq!((k, p), (1, mat(Q, "[[1,0]]")));
        let (k, _) = Certificate::<BigInt>::inclusion(Q, 3, 3).cokernel();
        assert_eq!(k, 0);
    }

    #[test]
    fn splitting_examples() {
        let c = is_cofibration(&mat(Q, "[[1],[0]]")).unwrap();
        assert_eq!(c.splitting_iso(), Matrix::identity(Q, 2));
        let c = is_cofibration(&mat(Q, "[[0],[-1]]")).unwrap();
        assert_eq!(c.splitting_iso(), mat(Q, "[[0,-1],[1,0]]"));
        let g = FieldDescriptor::Gaussian;
        let c = is_cofibration(&mat(g, "[[0],[i]]")).unwrap();
        assert_eq!(c.splitting_iso(), mat(g, "[[0,-i],[1,0]]"));
        let phi = c.splitting_iso();
        let incl = Certificate::<BigInt>::inclusion(g, 1, 2).to_matrix();
        assert_eq!(phi.compose(&c.to_matrix()).unwrap(), incl);
    }

    #[test]
    fn pushout_examples() {
        let iota = Certificate::<BigInt>::inclusion(Q, 1, 2);
        let f = mat(Q, "[[1/2]]");
        let po = pushout(&iota, &f).unwrap();
        assert_eq!(po.cofib.target_rank(), 2);
        assert_eq!(po.attach, mat(Q, "[[1/2,0],[0,1]]"));
        let po = pushout(&iota, &Matrix::identity(Q, 1)).unwrap();
        assert_eq!(po.cofib, iota);
        let neg = is_cofibration(&mat(Q, "[[0],[-1]]")).unwrap();
        let po = pushout(&neg, &mat(Q, "[[1/3],[-1/3],[1/3]]")).unwrap();
        assert_eq!(po.cofib.cokernel().0, 1);
        assert!(is_cofibration(&po.cofib.to_matrix()).is_ok());
        assert!(matches!(pushout(&neg, &mat(Q, "[[1,0]]")), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pushout_universal_property() {
        let iota = is_cofibration(&mat(Q, "[[0],[-1]]")).unwrap();
        let f = mat(Q, "[[1/2]]");
        let po = pushout(&iota, &f).unwrap();
        // cocone: g = [1/3], h with h . iota = g . f = [1/6]
        let g = mat(Q, "[[1/3]]");
        let h = mat(Q, "[[1/2,-1/6]]");
        let u = po.induced(&g, &h).unwrap();
        assert_eq!(u, mat(Q, "[[1/3,1/2]]"));
        assert!(po.induced(&g, &mat(Q, "[[1/2,1/6]]")).is_err());
    }

    #[test]
    fn automorphisms() {
        let w = is_automorphism(&Matrix::<BigInt>::identity(Q, 3)).unwrap().unwrap();
        assert!(w.is_identity());
        let w = is_automorphism(&mat(Q, "[[0,-1],[1,0]]")).unwrap().unwrap();
        assert_eq!(w.perm().images(), &[1, 0]);
        assert_eq!(w.units()[0].value(), &E::frac(-1, 1));
        assert!(w.units()[1].is_one());
        assert!(Matrix::from_k(parse_matrix::<BigInt>(Q, "[[1/2,0],[0,2]]").unwrap()).is_err());
        assert_eq!(is_automorphism(&mat(Q, "[[1/2,0],[0,1]]")).unwrap(), Err(CofibRefusal::NonUnitEntry { row: 0, col: 0 }));
    }

    #[test]
    fn k0_classes() {
        assert_eq!(k0_class(&Projective::<BigInt>::free(Q, 3)), 3);
        assert_eq!(k0_class(&Projective::new(Matrix::<BigInt>::zero(Q, 2, 2)).unwrap()), 0);
        assert_eq!(k0_class(&Projective::new(mat(Q, "[[1,0],[0,0]]")).unwrap()), 1);
        assert_eq!(k0_class(&Projective::new(mat(Q, "[[1/2,1/2],[1/2,1/2]]")).unwrap()), 1);
        assert_eq!(Projective::new(mat(Q, "[[0,1],[1,0]]")), Err(Error::NotIdempotent));
    }

    #[test]
    fn kernels() {
        let k = parse_matrix::<BigInt>(Q, "[[1,1,0],[0,0,1]]").unwrap();
        let basis = k.kernel_basis();
        assert_eq!(basis, vec![vec![E::frac(-1, 1), E::one(), E::zero()]]);
    }

    #[test]
    fn matrix_parse_errors() {
        let e = parse_matrix::<BigInt>(Q, "[[1/2],[1/2, 1]]").unwrap_err();
        assert!(e.message.contains("row 1"));
        assert_eq!(e.column, 8);
        let e = parse_matrix::<BigInt>(Q, "[[1/2],\n [x]]").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse_matrix::<BigInt>(Q, "[[1/2]").unwrap_err();
        assert!(e.message.contains("expected"));
        assert_eq!(parse_matrix::<BigInt>(Q, "[]").unwrap().rows(), 0);
        assert_eq!(parse_matrix::<BigInt>(Q, r#"[["1/2", "-1/2"]]"#).unwrap().cols(), 2);
    }
}
