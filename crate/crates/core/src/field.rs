//! Exact arithmetic in the three supported normed fields: `Q`, real quadratic
//! fields `Q(sqrt(d))` with a chosen real embedding, and the Gaussian field `Q(i)`.
//!
//! Elements are stored as `a + b*theta` with rational coordinates, where
//! `theta` is `sqrt(d)` or `i`. Every norm comparison is decided exactly;
//! floating point never enters a decision.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::{BigInt, ToBigInt};
use num_integer::{Integer, Roots};
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, ParseError, Result};

/// Integer type underlying the rational coordinates.
///
/// Implemented for `i64`, `i128` and `BigInt`. The fixed-width types are
/// convenient for small enumerations; `BigInt` never overflows.
pub trait Scalar:
    Integer
    + Roots
    + Signed
    + Clone
    + Hash
    + fmt::Debug
    + fmt::Display
    + FromPrimitive
    + ToPrimitive
    + ToBigInt
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Integer
        + Roots
        + Signed
        + Clone
        + Hash
        + fmt::Debug
        + fmt::Display
        + FromPrimitive
        + ToPrimitive
        + ToBigInt
        + Send
        + Sync
        + 'static
{
}

pub const DEFAULT_MAX_BITS: u64 = 4096;

static MAX_BITS: AtomicU64 = AtomicU64::new(DEFAULT_MAX_BITS);

/// Current precision cap for sum-of-square-roots comparisons.
pub fn max_precision_bits() -> u64 {
    MAX_BITS.load(AtomicOrdering::Relaxed)
}

/// Set the precision cap. Meant to be called once at start-up.
pub fn set_max_precision_bits(bits: u64) {
    MAX_BITS.store(bits.max(16), AtomicOrdering::Relaxed);
}

fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("small integer fits every scalar type")
}

fn ratio<T: Scalar>(v: i64) -> Ratio<T> {
    Ratio::from_integer(int(v))
}

fn to_big<T: Scalar>(v: &T) -> BigInt {
    v.to_bigint().expect("integer converts to BigInt")
}

/// Which normed field we compute in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldDescriptor {
    /// `Q` with the usual absolute value. `E = {1, -1}`.
    Rationals,
    /// `Q(sqrt(d))`, `d > 1` squarefree, normed through the real embedding
    /// `sqrt(d) -> embedding_sign * sqrt(d)`. `E = {1, -1}`.
    RealQuadratic { d: i64, embedding_sign: i8 },
    /// `Q(i)` with the complex absolute value. `E` is the group of
    /// rational points on the unit circle.
    Gaussian,
}

fn is_squarefree(d: i64) -> bool {
    let mut n = d;
    let mut p = 2i64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        if n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

impl FieldDescriptor {
    pub fn real_quadratic(d: i64, embedding_sign: i8) -> Result<Self> {
        if d <= 1 || !is_squarefree(d) {
            return Err(Error::InvalidField(format!("d = {d} must be squarefree and > 1")));
        }
        if embedding_sign != 1 && embedding_sign != -1 {
            return Err(Error::InvalidField(format!("embedding sign {embedding_sign} is not +-1")));
        }
        Ok(FieldDescriptor::RealQuadratic { d, embedding_sign })
    }

    /// `theta^2`, or `None` for `Q`.
    pub fn generator_square(&self) -> Option<i64> {
        match *self {
            FieldDescriptor::Rationals => None,
            FieldDescriptor::RealQuadratic { d, .. } => Some(d),
            FieldDescriptor::Gaussian => Some(-1),
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, FieldDescriptor::Gaussian)
    }

    pub fn contains<T: Scalar>(&self, x: &Element<T>) -> bool {
        match self {
            FieldDescriptor::Rationals => x.b.is_zero(),
            _ => true,
        }
    }

    pub fn check<T: Scalar>(&self, x: &Element<T>) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::NotInField(self.format(x)))
        }
    }

    pub fn mul<T: Scalar>(&self, x: &Element<T>, y: &Element<T>) -> Element<T> {
        let a = &x.a * &y.a;
        match self.generator_square() {
            None => Element::rational(a),
            Some(sq) => {
                let a = a + &x.b * &y.b * ratio::<T>(sq);
                let b = &x.a * &y.b + &x.b * &y.a;
                Element::new(a, b)
            }
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv<T: Scalar>(&self, x: &Element<T>) -> Option<Element<T>> {
        if x.is_zero() {
            return None;
        }
        match self.generator_square() {
            None => Some(Element::rational(x.a.recip())),
            Some(sq) => {
                let den = &x.a * &x.a - &x.b * &x.b * ratio::<T>(sq);
                Some(Element::new(&x.a / &den, -(&x.b / &den)))
            }
        }
    }

    pub fn div<T: Scalar>(&self, x: &Element<T>, y: &Element<T>) -> Option<Element<T>> {
        self.inv(y).map(|yi| self.mul(x, &yi))
    }

    /// Sign of the image under the real embedding. `None` over `Q(i)`.
    pub fn real_sign<T: Scalar>(&self, x: &Element<T>) -> Option<Ordering> {
        match *self {
            FieldDescriptor::Rationals => Some(x.a.cmp(&Ratio::zero())),
            FieldDescriptor::RealQuadratic { d, embedding_sign } => {
                let b = &x.b * ratio::<T>(embedding_sign as i64);
                Some(sign_of_surd(&x.a, &b, d))
            }
            FieldDescriptor::Gaussian => None,
        }
    }

    /// The absolute value `|sigma(x)|`, exactly.
    pub fn norm<T: Scalar>(&self, x: &Element<T>) -> NormValue<T> {
        match *self {
            FieldDescriptor::Rationals => NormValue::ExactRational(x.a.abs()),
            FieldDescriptor::RealQuadratic { d, embedding_sign } => {
                let b = &x.b * ratio::<T>(embedding_sign as i64);
                if sign_of_surd(&x.a, &b, d) == Ordering::Less {
                    NormValue::surd(-x.a.clone(), -b, d)
                } else {
                    NormValue::surd(x.a.clone(), b, d)
                }
            }
            FieldDescriptor::Gaussian => NormValue::sqrt_of(&x.a * &x.a + &x.b * &x.b),
        }
    }

    /// `|x| = 1`, decided by a rational identity.
    pub fn is_unit_norm<T: Scalar>(&self, x: &Element<T>) -> bool {
        match self {
            FieldDescriptor::Gaussian => (&x.a * &x.a + &x.b * &x.b).is_one(),
            // sigma(x) = +-1 forces the irrational part to vanish.
            _ => x.b.is_zero() && x.a.abs().is_one(),
        }
    }

    /// Exact trichotomy of `sum_i |x_i|` against `bound`.
    ///
    /// Over the real fields the sum lies in `Q + Q*sqrt(d)` and is compared
    /// symbolically. Over `Q(i)` it is a sum of square roots of rationals; see
    /// [`cmp_sqrt_sum`].
    pub fn cmp_norm_sum<T: Scalar>(&self, xs: &[Element<T>], bound: &Ratio<T>) -> Result<Ordering> {
        self.cmp_norm_sum_with(xs, bound, max_precision_bits())
    }

    pub fn cmp_norm_sum_with<T: Scalar>(
        &self,
        xs: &[Element<T>],
        bound: &Ratio<T>,
        max_bits: u64,
    ) -> Result<Ordering> {
        match *self {
            FieldDescriptor::Gaussian => {
                let radicands: Vec<Ratio<T>> = xs.iter().map(|x| &x.a * &x.a + &x.b * &x.b).collect();
                cmp_sqrt_sum(&radicands, bound, max_bits)
            }
            _ => {
                let d = self.generator_square().unwrap_or(2);
                let mut rational = Ratio::zero();
                let mut surd = Ratio::zero();
                for x in xs {
                    match self.norm(x) {
                        NormValue::ExactRational(q) => rational = rational + q,
                        NormValue::QuadraticSurd { rational: r, surd: s, .. } => {
                            rational = rational + r;
                            surd = surd + s;
                        }
                        NormValue::SqrtOfRational(_) => unreachable!("real fields have no square-root norms"),
                    }
                }
                Ok(sign_of_surd(&(rational - bound), &surd, d))
            }
        }
    }

    /// Canonical text form, e.g. `3/5+4/5*i` or `1-sqrt(2)`.
    pub fn format<T: Scalar>(&self, x: &Element<T>) -> String {
        let radical = match *self {
            FieldDescriptor::Rationals => return format_ratio(&x.a),
            FieldDescriptor::RealQuadratic { d, .. } => format!("sqrt({d})"),
            FieldDescriptor::Gaussian => "i".to_string(),
        };
        if x.b.is_zero() {
            return format_ratio(&x.a);
        }
        let coef = if x.b.abs().is_one() {
            radical
        } else {
            format!("{}*{}", format_ratio(&x.b.abs()), radical)
        };
        let negative = x.b.is_negative();
        if x.a.is_zero() {
            if negative {
                format!("-{coef}")
            } else {
                coef
            }
        } else {
            format!("{}{}{}", format_ratio(&x.a), if negative { "-" } else { "+" }, coef)
        }
    }

    /// Parse `a/b`, `a/b+c/d*i`, `a/b+c/d*sqrt(D)` and the obvious shorthands
    /// (`i`, `-sqrt(2)`, `3/5-4/5*i`, integers without denominators).
    pub fn parse_element<T: Scalar>(&self, input: &str) -> std::result::Result<Element<T>, ParseError> {
        ElementParser { input, pos: 0, field: *self }.parse()
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FieldDescriptor::Rationals => write!(f, "Q"),
            FieldDescriptor::RealQuadratic { d, embedding_sign } => {
                if embedding_sign < 0 {
                    write!(f, "Q(-sqrt({d}))")
                } else {
                    write!(f, "Q(sqrt({d}))")
                }
            }
            FieldDescriptor::Gaussian => write!(f, "Q(i)"),
        }
    }
}

impl FromStr for FieldDescriptor {
    type Err = Error;

    /// `Q`, `Q(i)`, `Q(sqrt(D))`, or `Q(-sqrt(D))` for the embedding `sqrt(D) -> -sqrt(D)`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "Q" | "QQ" => return Ok(FieldDescriptor::Rationals),
            "Q(i)" | "Qi" => return Ok(FieldDescriptor::Gaussian),
            _ => {}
        }
        let inner = compact
            .strip_prefix("Q(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::InvalidField(format!("unrecognised field `{s}`")))?;
        let (sign, rest) = match inner.strip_prefix('-') {
            Some(r) => (-1, r),
            None => (1, inner),
        };
        let d = rest
            .strip_prefix("sqrt(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|r| r.parse::<i64>().ok())
            .ok_or_else(|| Error::InvalidField(format!("unrecognised field `{s}`")))?;
        FieldDescriptor::real_quadratic(d, sign)
    }
}

fn format_ratio<T: Scalar>(q: &Ratio<T>) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// An element `a + b*theta` of one of the supported fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element<T: Scalar> {
    a: Ratio<T>,
    b: Ratio<T>,
}

impl<T: Scalar> Element<T> {
    pub fn new(a: Ratio<T>, b: Ratio<T>) -> Self {
        Element { a, b }
    }

    pub fn rational(a: Ratio<T>) -> Self {
        Element { a, b: Ratio::zero() }
    }

    /// `numer / denom` as a rational element.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Element::rational(Ratio::new(int(numer), int(denom)))
    }

    /// `(a_num + b_num * theta) / denom`.
    pub fn from_parts(a_num: i64, b_num: i64, denom: i64) -> Self {
        Element::new(Ratio::new(int(a_num), int(denom)), Ratio::new(int(b_num), int(denom)))
    }

    pub fn zero() -> Self {
        Element::rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Element::rational(Ratio::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn a(&self) -> &Ratio<T> {
        &self.a
    }

    pub fn b(&self) -> &Ratio<T> {
        &self.b
    }

    /// `a - b*theta`; complex conjugation over `Q(i)`.
    pub fn conj(&self) -> Self {
        Element::new(self.a.clone(), -self.b.clone())
    }

    pub fn scale(&self, q: &Ratio<T>) -> Self {
        Element::new(&self.a * q, &self.b * q)
    }
}

impl<T: Scalar> Add for Element<T> {
    type Output = Element<T>;
    fn add(self, rhs: Self) -> Self {
        Element::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl<'a, T: Scalar> Add<&'a Element<T>> for &'a Element<T> {
    type Output = Element<T>;
    fn add(self, rhs: &Element<T>) -> Element<T> {
        Element::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<T: Scalar> Sub for Element<T> {
    type Output = Element<T>;
    fn sub(self, rhs: Self) -> Self {
        Element::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl<'a, T: Scalar> Sub<&'a Element<T>> for &'a Element<T> {
    type Output = Element<T>;
    fn sub(self, rhs: &Element<T>) -> Element<T> {
        Element::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<T: Scalar> Neg for Element<T> {
    type Output = Element<T>;
    fn neg(self) -> Self {
        Element::new(-self.a, -self.b)
    }
}

impl<T: Scalar> Neg for &Element<T> {
    type Output = Element<T>;
    fn neg(self) -> Element<T> {
        Element::new(-self.a.clone(), -self.b.clone())
    }
}

/// Sign of `a + b*sqrt(d)` for `d > 0` not a square.
pub fn sign_of_surd<T: Scalar>(a: &Ratio<T>, b: &Ratio<T>, d: i64) -> Ordering {
    let zero = Ratio::zero();
    let sa = a.cmp(&zero);
    let sb = b.cmp(&zero);
    if sb == Ordering::Equal || sa == sb {
        return if sa == Ordering::Equal { sb } else { sa };
    }
    if sa == Ordering::Equal {
        return sb;
    }
    let lhs = a * a;
    let rhs = b * b * ratio::<T>(d);
    if sa == Ordering::Greater {
        lhs.cmp(&rhs)
    } else {
        rhs.cmp(&lhs)
    }
}

/// Exact square root of a non-negative rational, when it is rational.
pub fn rational_sqrt<T: Scalar>(q: &Ratio<T>) -> Option<Ratio<T>> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(n.clone() * n.clone()) == q.numer() && &(d.clone() * d.clone()) == q.denom() {
        Some(Ratio::new(n, d))
    } else {
        None
    }
}

/// An exact non-negative real number arising as `|x|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormValue<T: Scalar> {
    ExactRational(Ratio<T>),
    /// `rational + surd*sqrt(d)`; arises over real quadratic fields.
    QuadraticSurd { rational: Ratio<T>, surd: Ratio<T>, d: i64 },
    /// `sqrt(q)` with `q` not the square of a rational.
    SqrtOfRational(Ratio<T>),
}

impl<T: Scalar> NormValue<T> {
    pub fn sqrt_of(q: Ratio<T>) -> Self {
        match rational_sqrt(&q) {
            Some(r) => NormValue::ExactRational(r),
            None => NormValue::SqrtOfRational(q),
        }
    }

    pub fn surd(rational: Ratio<T>, surd: Ratio<T>, d: i64) -> Self {
        if surd.is_zero() {
            NormValue::ExactRational(rational)
        } else {
            NormValue::QuadraticSurd { rational, surd, d }
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, NormValue::ExactRational(q) if q.is_one())
    }

    /// Product of two norms of the same field; `None` when the kinds cannot mix.
    pub fn mul(&self, other: &Self) -> Option<Self> {
        use NormValue::*;
        Some(match (self, other) {
            (ExactRational(p), ExactRational(q)) => ExactRational(p * q),
            (ExactRational(p), QuadraticSurd { rational, surd, d })
            | (QuadraticSurd { rational, surd, d }, ExactRational(p)) => {
                NormValue::surd(rational * p, surd * p, *d)
            }
            (ExactRational(p), SqrtOfRational(q)) | (SqrtOfRational(q), ExactRational(p)) => {
                NormValue::sqrt_of(p * p * q)
            }
            (SqrtOfRational(p), SqrtOfRational(q)) => NormValue::sqrt_of(p * q),
            (
                QuadraticSurd { rational: a, surd: b, d },
                QuadraticSurd { rational: c, surd: e, d: d2 },
            ) if d == d2 => NormValue::surd(a * c + b * e * ratio::<T>(*d), a * e + b * c, *d),
            _ => return None,
        })
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, bound: &Ratio<T>) -> Ordering {
        match self {
            NormValue::ExactRational(q) => q.cmp(bound),
            NormValue::QuadraticSurd { rational, surd, d } => sign_of_surd(&(rational - bound), surd, *d),
            NormValue::SqrtOfRational(q) => {
                if bound.is_negative() {
                    Ordering::Greater
                } else {
                    q.cmp(&(bound * bound))
                }
            }
        }
    }
}

/// Exact trichotomy of `sum_j sqrt(r_j)` against `bound`, all `r_j >= 0`.
///
/// Perfect-square radicands are folded into the rational part. The remaining
/// square roots all carry positive coefficients, so grouping them by squarefree
/// kernel leaves a positive combination of linearly independent irrationals:
/// whenever one survives, the sum is irrational and equality is impossible.
/// The strict case is then separated by dyadic interval refinement. Refinement
/// is guaranteed to succeed once the precision passes the separation bound
/// `|S - B| >= 1 / (D * H^(2^m - 1))`, where `m` is the number of distinct
/// radicands, `D` clears denominators and `H` bounds every sign-conjugate of
/// the scaled difference. If the cap `max_bits` is reached first the result
/// is [`Error::PrecisionExhausted`].
pub fn cmp_sqrt_sum<T: Scalar>(radicands: &[Ratio<T>], bound: &Ratio<T>, max_bits: u64) -> Result<Ordering> {
    let mut exact = Ratio::<BigInt>::zero();
    let mut surds: BTreeMap<(BigInt, BigInt), BigInt> = BTreeMap::new();
    for r in radicands {
        if r.is_zero() {
            continue;
        }
        if let Some(s) = rational_sqrt(r) {
            exact += Ratio::new(to_big(s.numer()), to_big(s.denom()));
        } else {
            *surds
                .entry((to_big(r.numer()), to_big(r.denom())))
                .or_insert_with(BigInt::zero) += 1;
        }
    }
    let bound = Ratio::new(to_big(bound.numer()), to_big(bound.denom()));
    if surds.is_empty() {
        return Ok(exact.cmp(&bound));
    }
    let target = &bound - &exact;
    if !target.is_positive() {
        return Ok(Ordering::Greater);
    }
    let needed = separation_bits(&surds, &target);
    let mut bits = 32u64.min(max_bits);
    loop {
        let (lo, hi) = bracket_sqrt_sum(&surds, bits);
        if target < lo {
            return Ok(Ordering::Greater);
        }
        if target > hi {
            return Ok(Ordering::Less);
        }
        if bits >= max_bits {
            return Err(Error::PrecisionExhausted { bits, needed });
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// Lower and upper dyadic bounds for `sum k * sqrt(n/d)` at `bits` fractional bits.
fn bracket_sqrt_sum(surds: &BTreeMap<(BigInt, BigInt), BigInt>, bits: u64) -> (Ratio<BigInt>, Ratio<BigInt>) {
    let mut lo = Ratio::<BigInt>::zero();
    let mut hi = Ratio::<BigInt>::zero();
    let den = BigInt::one() << bits;
    for ((n, d), k) in surds {
        // s <= sqrt(n/d) * 2^bits < s + 1
        let s = ((n << (2 * bits)) / d).sqrt();
        lo += Ratio::new(k * &s, den.clone());
        hi += Ratio::new(k * (s + 1), den.clone());
    }
    (lo, hi)
}

fn separation_bits(surds: &BTreeMap<(BigInt, BigInt), BigInt>, target: &Ratio<BigInt>) -> u64 {
    let m = surds.len() as u32;
    let mut den = target.denom().clone();
    for (_, d) in surds.keys() {
        den = den.lcm(d);
    }
    let mut height = (target.numer() * (&den / target.denom())).abs();
    let mut total_k = BigInt::zero();
    for ((n, d), k) in surds {
        let scale = &den / d;
        let radicand = k * k * n * d * &scale * &scale;
        height += radicand.sqrt() + 1;
        total_k += k;
    }
    let exponent = match 1u64.checked_shl(m) {
        Some(e) if m < 63 => e - 1,
        _ => return u64::MAX,
    };
    exponent
        .saturating_mul(height.bits())
        .saturating_add(den.bits())
        .saturating_add(total_k.bits())
        .saturating_add(1)
}

/// An element of `E`, the group of norm-1 elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitElement<T: Scalar> {
    field: FieldDescriptor,
    value: Element<T>,
}

impl<T: Scalar> UnitElement<T> {
    pub fn new(field: FieldDescriptor, value: Element<T>) -> Result<Self> {
        field.check(&value)?;
        if !field.is_unit_norm(&value) {
            return Err(Error::NotUnitNorm);
        }
        Ok(UnitElement { field, value })
    }

    pub fn one(field: FieldDescriptor) -> Self {
        UnitElement { field, value: Element::one() }
    }

    pub fn minus_one(field: FieldDescriptor) -> Self {
        UnitElement { field, value: -Element::one() }
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn value(&self) -> &Element<T> {
        &self.value
    }

    pub fn into_value(self) -> Element<T> {
        self.value
    }

    pub fn mul(&self, other: &Self) -> Self {
        UnitElement { field: self.field, value: self.field.mul(&self.value, &other.value) }
    }

    pub fn inverse(&self) -> Self {
        // For |x| = 1 the inverse is the conjugate (over the real fields, x itself).
        let value = match self.field {
            FieldDescriptor::Gaussian => self.value.conj(),
            _ => self.value.clone(),
        };
        UnitElement { field: self.field, value }
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }
}

/// A Gaussian integer `re + im*i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianInt<T: Scalar> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> GaussianInt<T> {
    pub fn new(re: T, im: T) -> Self {
        GaussianInt { re, im }
    }

    pub fn norm(&self) -> T {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn conj(&self) -> Self {
        GaussianInt::new(self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        GaussianInt::new(
            self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone(),
            self.re.clone() * o.im.clone() + self.im.clone() * o.re.clone(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `self / o` when `o` divides `self` in `Z[i]`.
    pub fn div_exact(&self, o: &Self) -> Option<Self> {
        let n = o.norm();
        let p = self.mul(&o.conj());
        if p.re.is_multiple_of(&n) && p.im.is_multiple_of(&n) {
            Some(GaussianInt::new(p.re / n.clone(), p.im / n))
        } else {
            None
        }
    }

    fn rem_nearest(&self, o: &Self) -> Self {
        let n = o.norm();
        let p = self.mul(&o.conj());
        let two: T = int(2);
        let round = |x: T| (two.clone() * x + n.clone()).div_floor(&(two.clone() * n.clone()));
        let q = GaussianInt::new(round(p.re), round(p.im));
        let qo = q.mul(o);
        GaussianInt::new(self.re.clone() - qo.re, self.im.clone() - qo.im)
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem_nearest(&b);
            a = b;
            b = r;
        }
        a
    }

    /// Index `k` with `self = i^k`, if `self` is a unit.
    pub fn unit_index(&self) -> Option<u8> {
        let one = T::one();
        let zero = T::zero();
        match (&self.re, &self.im) {
            (r, i) if *r == one && *i == zero => Some(0),
            (r, i) if *r == zero && *i == one => Some(1),
            (r, i) if *r == -one.clone() && *i == zero => Some(2),
            (r, i) if *r == zero && *i == -one => Some(3),
            _ => None,
        }
    }
}

/// Canonical representative `a + b*i`, `a > b > 0`, of a Gaussian prime over a
/// rational prime `p = a^2 + b^2 = 1 mod 4`. Its conjugate `a - b*i` is the
/// other prime of the pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianPrime<T: Scalar> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> GaussianPrime<T> {
    pub fn as_int(&self) -> GaussianInt<T> {
        GaussianInt::new(self.a.clone(), self.b.clone())
    }

    pub fn rational_prime(&self) -> T {
        self.as_int().norm()
    }

    /// `pi / conj(pi)` as an element of `Q(i)`.
    pub fn ratio_to_conjugate(&self) -> Element<T> {
        let sq = self.as_int().mul(&self.as_int());
        let p = Ratio::from_integer(self.rational_prime());
        Element::new(Ratio::from_integer(sq.re) / p.clone(), Ratio::from_integer(sq.im) / p)
    }
}

impl<T: Scalar> fmt::Display for GaussianPrime<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_one() {
            write!(f, "{}+i", self.a)
        } else {
            write!(f, "{}+{}i", self.a, self.b)
        }
    }
}

fn mod_pow<T: Scalar>(base: &T, exp: &T, modulus: &T) -> T {
    let two: T = int(2);
    let mut result = T::one();
    let mut b = base.mod_floor(modulus);
    let mut e = exp.clone();
    while e.is_positive() {
        if e.is_odd() {
            result = (result * b.clone()).mod_floor(modulus);
        }
        b = (b.clone() * b).mod_floor(modulus);
        e = e / two.clone();
    }
    result
}

/// The canonical Gaussian prime above a rational prime `p = 1 mod 4`.
pub fn gaussian_prime_over<T: Scalar>(p: &T) -> GaussianPrime<T> {
    let four: T = int(4);
    let exp = (p.clone() - T::one()) / four;
    let minus_one = p.clone() - T::one();
    let mut c: T = int(2);
    let t = loop {
        let t = mod_pow(&c, &exp, p);
        if (t.clone() * t.clone()).mod_floor(p) == minus_one {
            break t;
        }
        c = c + T::one();
    };
    let mut g = GaussianInt::new(p.clone(), T::zero()).gcd(&GaussianInt::new(t, T::one()));
    // rotate into the open first quadrant
    while !(g.re.is_positive() && !g.im.is_negative()) {
        g = GaussianInt::new(-g.im.clone(), g.re.clone());
    }
    if g.re > g.im {
        GaussianPrime { a: g.re, b: g.im }
    } else {
        // g = b + a*i = i * (a - b*i): an associate of the conjugate
        GaussianPrime { a: g.im, b: g.re }
    }
}

fn factor_integer<T: Scalar>(n: &T) -> Vec<(T, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p: T = int(2);
    while p.clone() * p.clone() <= n {
        let mut k = 0;
        while n.is_multiple_of(&p) {
            n = n / p.clone();
            k += 1;
        }
        if k > 0 {
            out.push((p.clone(), k));
        }
        p = p + T::one();
    }
    if n > T::one() {
        out.push((n, 1));
    }
    out
}

/// `x = i^unit * prod_pi (pi / conj(pi))^e` for a norm-1 element of `Q(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PythagFactorization<T: Scalar> {
    /// Exponent of `i`, in `0..4`.
    pub unit: u8,
    /// Non-zero exponents keyed by canonical Gaussian prime.
    pub exponents: BTreeMap<GaussianPrime<T>, i64>,
}

impl<T: Scalar> PythagFactorization<T> {
    pub fn recompose(&self) -> Element<T> {
        let field = FieldDescriptor::Gaussian;
        let i = Element::from_parts(0, 1, 1);
        let mut x = Element::one();
        for _ in 0..self.unit % 4 {
            x = field.mul(&x, &i);
        }
        for (prime, &e) in &self.exponents {
            let base = prime.ratio_to_conjugate();
            let base = if e < 0 { base.conj() } else { base };
            for _ in 0..e.unsigned_abs() {
                x = field.mul(&x, &base);
            }
        }
        x
    }
}

/// Factor a norm-1 Gaussian rational into its torsion part and its
/// coordinates in the free part of `E`.
pub fn pythag_factor<T: Scalar>(x: &Element<T>) -> Result<PythagFactorization<T>> {
    if !FieldDescriptor::Gaussian.is_unit_norm(x) {
        return Err(Error::NotUnitNorm);
    }
    // x = (p + q i) / r with gcd(p, q, r) = 1, so p^2 + q^2 = r^2.
    let r = x.a.denom().lcm(x.b.denom());
    let p = x.a.numer().clone() * (r.clone() / x.a.denom().clone());
    let q = x.b.numer().clone() * (r.clone() / x.b.denom().clone());
    let mut z = GaussianInt::new(p, q);
    let mut exponents = BTreeMap::new();
    for (ell, k) in factor_integer(&r) {
        if ell.mod_floor(&int(4)) != T::one() {
            return Err(Error::WitnessFailure(format!(
                "prime {ell} divides the denominator of a norm-1 element"
            )));
        }
        let prime = gaussian_prime_over(&ell);
        let pi = prime.as_int();
        let pi_bar = pi.conj();
        let mut v = 0i64;
        while let Some(next) = z.div_exact(&pi) {
            z = next;
            v += 1;
        }
        let mut v_bar = 0i64;
        while let Some(next) = z.div_exact(&pi_bar) {
            z = next;
            v_bar += 1;
        }
        let k = k as i64;
        if v + v_bar != 2 * k {
            return Err(Error::WitnessFailure(format!("valuations at {prime} do not balance")));
        }
        if v != k {
            exponents.insert(prime, v - k);
        }
    }
    let unit = z
        .unit_index()
        .ok_or_else(|| Error::WitnessFailure("cofactor is not a unit of Z[i]".to_string()))?;
    Ok(PythagFactorization { unit, exponents })
}

struct ElementParser<'a> {
    input: &'a str,
    pos: usize,
    field: FieldDescriptor,
}

impl<'a> ElementParser<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.input, self.pos, msg)
    }

    fn peek(&self) -> Option<char> {
        self.input[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.input[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn integer<T: Scalar>(&mut self) -> std::result::Result<T, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        T::from_str_radix(&self.input[start..self.pos], 10).map_err(|_| self.err("integer out of range"))
    }

    fn radical(&mut self) -> std::result::Result<bool, ParseError> {
        let at = self.pos;
        if self.eat("sqrt(") {
            self.skip_ws();
            let d: i64 = self.integer()?;
            self.skip_ws();
            if !self.eat(")") {
                return Err(self.err("expected `)`"));
            }
            return match self.field {
                FieldDescriptor::RealQuadratic { d: fd, .. } if fd == d => Ok(true),
                _ => Err(ParseError::at(self.input, at, format!("sqrt({d}) is not the generator of {}", self.field))),
            };
        }
        if self.eat("i") {
            return match self.field {
                FieldDescriptor::Gaussian => Ok(true),
                _ => Err(ParseError::at(self.input, at, format!("`i` is not available in {}", self.field))),
            };
        }
        Ok(false)
    }

    fn parse<T: Scalar>(mut self) -> std::result::Result<Element<T>, ParseError> {
        let mut a = Ratio::<T>::zero();
        let mut b = Ratio::<T>::zero();
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.err("empty field element"));
        }
        let mut first = true;
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                break;
            }
            let negative = if self.eat("-") {
                true
            } else if self.eat("+") || first {
                false
            } else {
                return Err(self.err("expected `+` or `-`"));
            };
            first = false;
            self.skip_ws();
            let (coef, radical) = if self.radical()? {
                (Ratio::one(), true)
            } else {
                let n: T = self.integer()?;
                self.skip_ws();
                let d: T = if self.eat("/") {
                    self.skip_ws();
                    self.integer()?
                } else {
                    T::one()
                };
                if d.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                self.skip_ws();
                let radical = if self.eat("*") {
                    self.skip_ws();
                    if !self.radical()? {
                        return Err(self.err("expected `i` or `sqrt(D)` after `*`"));
                    }
                    true
                } else {
                    false
                };
                (Ratio::new(n, d), radical)
            };
            let coef = if negative { -coef } else { coef };
            if radical {
                b = b + coef;
            } else {
                a = a + coef;
            }
        }
        Ok(Element::new(a, b))
    }
}
