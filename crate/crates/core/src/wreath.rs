//! `GL_n(O) = E wr S_n = E^n x| S_n` and brute-force checks of its
//! abelianisation and perfectness for finite cyclic `E`.
//!
//! An element `(eps, pi)` stands for the monomial matrix `D(eps) P(pi)` with
//! `P(pi) e_j = e_{pi(j)}`, so the group law is
//! `(eps, pi)(eps', pi') = (eps * (eps' o pi^-1), pi o pi')`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;

use crate::abelian::AbGroupDescriptor;
use crate::error::{Error, Result};
use crate::field::{Scalar, UnitElement};
use crate::omod::{KMatrix, Matrix};

/// Default bound on the number of group elements materialised.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

pub trait GroupElement: Clone + Eq + Hash + fmt::Debug {
    fn op(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    /// The identity of the group containing `self`.
    fn identity_like(&self) -> Self;

    fn is_identity(&self) -> bool {
        *self == self.identity_like()
    }

    /// `a b a^-1 b^-1`.
    fn commutator(&self, other: &Self) -> Self {
        self.op(other).op(&self.inverse()).op(&other.inverse())
    }

    fn pow(&self, k: u64) -> Self {
        let mut acc = self.identity_like();
        for _ in 0..k {
            acc = acc.op(self);
        }
        acc
    }
}

impl<T: Scalar> GroupElement for UnitElement<T> {
    fn op(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn inverse(&self) -> Self {
        UnitElement::inverse(self)
    }

    fn identity_like(&self) -> Self {
        UnitElement::one(self.field())
    }
}

/// `zeta^exponent` in the abstract cyclic group `mu_order`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicUnit {
    pub order: u32,
    pub exponent: u32,
}

impl CyclicUnit {
    pub fn new(order: u32, exponent: u32) -> Self {
        assert!(order > 0);
        CyclicUnit { order, exponent: exponent % order }
    }

    pub fn generator(order: u32) -> Self {
        Self::new(order, 1)
    }

    pub fn all(order: u32) -> impl Iterator<Item = CyclicUnit> {
        (0..order).map(move |e| CyclicUnit::new(order, e))
    }
}

impl GroupElement for CyclicUnit {
    fn op(&self, other: &Self) -> Self {
        CyclicUnit::new(self.order, self.exponent + other.exponent)
    }

    fn inverse(&self) -> Self {
        CyclicUnit::new(self.order, self.order - self.exponent)
    }

    fn identity_like(&self) -> Self {
        CyclicUnit::new(self.order, 0)
    }
}

impl fmt::Display for CyclicUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^{}", self.exponent)
    }
}

/// A permutation of `{0, .., n-1}`, `j -> images[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::WitnessFailure(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, j: usize) -> usize {
        self.images[j]
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Self {
        Permutation { images: other.images.iter().map(|&j| self.images[j]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (j, &i) in self.images.iter().enumerate() {
            images[i] = j;
        }
        Permutation { images }
    }

    /// 0 for even, 1 for odd.
    pub fn parity(&self) -> u8 {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j];
            }
        }
        ((n - cycles) % 2) as u8
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(j, &i)| i == j)
    }
}

/// An element `(eps, pi)` of `E wr S_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElement<U> {
    units: Vec<U>,
    perm: Permutation,
}

impl<U: GroupElement> WreathElement<U> {
    pub fn new(units: Vec<U>, perm: Permutation) -> Result<Self> {
        if units.len() != perm.len() {
            return Err(Error::DimensionMismatch { expected: perm.len(), found: units.len() });
        }
        Ok(WreathElement { units, perm })
    }

    pub fn identity(n: usize, one: U) -> Self {
        WreathElement { units: vec![one; n], perm: Permutation::identity(n) }
    }

    /// `eps` at position `i`, identity elsewhere.
    pub fn unit_at(n: usize, i: usize, eps: U) -> Self {
        let mut units = vec![eps.identity_like(); n];
        units[i] = eps;
        WreathElement { units, perm: Permutation::identity(n) }
    }

    pub fn permutation(perm: Permutation, one: U) -> Self {
        WreathElement { units: vec![one; perm.len()], perm }
    }

    pub fn n(&self) -> usize {
        self.units.len()
    }

    pub fn units(&self) -> &[U] {
        &self.units
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        let pinv = self.perm.inverse();
        let units = (0..self.n()).map(|k| self.units[k].op(&other.units[pinv.apply(k)])).collect();
        Ok(WreathElement { units, perm: self.perm.compose(&other.perm) })
    }

    pub fn invert(&self) -> Self {
        let units = (0..self.n()).map(|j| self.units[self.perm.apply(j)].inverse()).collect();
        WreathElement { units, perm: self.perm.inverse() }
    }

    /// `(prod eps_i, parity(pi))`.
    pub fn abelianize(&self) -> AbImage<U> {
        let one = match self.units.first() {
            Some(u) => u.identity_like(),
            None => return AbImage { unit_product: None, parity: 0 },
        };
        let product = self.units.iter().fold(one, |acc, u| acc.op(u));
        AbImage { unit_product: Some(product), parity: self.perm.parity() }
    }

    /// `g + id` in `G_{n+1}`.
    pub fn stabilize(&self, one: U) -> Self {
        let mut units = self.units.clone();
        units.push(one);
        let mut images = self.perm.images.clone();
        images.push(images.len());
        WreathElement { units, perm: Permutation { images } }
    }
}

impl<T: Scalar> WreathElement<UnitElement<T>> {
    /// The monomial matrix `D(eps) P(pi)`.
    pub fn to_matrix(&self) -> Matrix<T> {
        let n = self.n();
        let field = self.units.first().map_or(crate::field::FieldDescriptor::Rationals, |u| u.field());
        let mut data = vec![crate::field::Element::zero(); n * n];
        for j in 0..n {
            let r = self.perm.apply(j);
            data[r * n + j] = self.units[r].value().clone();
        }
        Matrix::from_k_unchecked(KMatrix::new(field, n, n, data).expect("square data"))
    }
}

impl<U: GroupElement> GroupElement for WreathElement<U> {
    fn op(&self, other: &Self) -> Self {
        self.multiply(other).expect("elements of the same G_n")
    }

    fn inverse(&self) -> Self {
        self.invert()
    }

    fn identity_like(&self) -> Self {
        WreathElement {
            units: self.units.iter().map(|u| u.identity_like()).collect(),
            perm: Permutation::identity(self.n()),
        }
    }

    fn is_identity(&self) -> bool {
        self.perm.is_identity() && self.units.iter().all(|u| u.is_identity())
    }
}

impl fmt::Display for WreathElement<CyclicUnit> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let units: Vec<String> = self.units.iter().map(|u| u.exponent.to_string()).collect();
        write!(f, "([{}], {:?})", units.join(","), self.perm.images)
    }
}

/// Image in `E x Z/2`. `unit_product` is `None` only for `n = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbImage<U> {
    pub unit_product: Option<U>,
    pub parity: u8,
}

impl<U: GroupElement> AbImage<U> {
    pub fn op(&self, other: &Self) -> Self {
        let unit_product = match (&self.unit_product, &other.unit_product) {
            (Some(a), Some(b)) => Some(a.op(b)),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        AbImage { unit_product, parity: (self.parity + other.parity) % 2 }
    }
}

/// The standard generators of `G_n` for `E = mu_w`: `zeta` in slot 0 and the
/// adjacent transpositions.
pub fn standard_generators(n: usize, w: u32) -> Vec<WreathElement<CyclicUnit>> {
    let one = CyclicUnit::new(w, 0);
    let mut gens = Vec::new();
    if n > 0 && w > 1 {
        gens.push(WreathElement::unit_at(n, 0, CyclicUnit::generator(w)));
    }
    for i in 0..n.saturating_sub(1) {
        gens.push(WreathElement::permutation(Permutation::transposition(n, i, i + 1), one));
    }
    gens
}

/// `|G_n| = w^n n!`, saturating.
pub fn group_order(n: usize, w: u32) -> u128 {
    let mut order: u128 = 1;
    for k in 1..=n as u128 {
        order = order.saturating_mul(k).saturating_mul(w as u128);
    }
    order
}

/// A finite group materialised as a set of elements, with the generating set
/// it was built from.
#[derive(Clone, Debug)]
pub struct FiniteGroupTable<G: GroupElement> {
    elements: Vec<G>,
    index: HashMap<G, usize>,
    generators: Vec<G>,
}

impl<G: GroupElement> FiniteGroupTable<G> {
    /// Close `generators` under multiplication. Elements are listed in
    /// breadth-first order from the identity, so the output is deterministic.
    pub fn generate(identity: G, generators: Vec<G>, budget: u128) -> Result<Self> {
        let mut table = FiniteGroupTable { elements: Vec::new(), index: HashMap::new(), generators: Vec::new() };
        table.insert(identity);
        for g in generators {
            table.add_generator(g, budget)?;
        }
        Ok(table)
    }

    fn insert(&mut self, g: G) -> bool {
        if self.index.contains_key(&g) {
            return false;
        }
        self.index.insert(g.clone(), self.elements.len());
        self.elements.push(g);
        true
    }

    /// Enlarge to the subgroup generated by the current one and `g`.
    fn add_generator(&mut self, g: G, budget: u128) -> Result<()> {
        let grows = !self.index.contains_key(&g);
        self.generators.push(g);
        if !grows {
            return Ok(());
        }
        let mut queue: VecDeque<usize> = (0..self.elements.len()).collect();
        while let Some(i) = queue.pop_front() {
            for k in 0..self.generators.len() {
                let h = self.elements[i].op(&self.generators[k]);
                if self.insert(h) {
                    if self.elements.len() as u128 > budget {
                        return Err(Error::BudgetExceeded { needed: self.elements.len() as u128, budget });
                    }
                    queue.push_back(self.elements.len() - 1);
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[G] {
        &self.elements
    }

    pub fn generators(&self) -> &[G] {
        &self.generators
    }

    pub fn contains(&self, g: &G) -> bool {
        self.index.contains_key(g)
    }

    pub fn index_of(&self, g: &G) -> Option<usize> {
        self.index.get(g).copied()
    }

    /// Multiplication on indices.
    pub fn multiply(&self, i: usize, j: usize) -> usize {
        self.index[&self.elements[i].op(&self.elements[j])]
    }

    pub fn identity(&self) -> &G {
        &self.elements[0]
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|a| self.generators.iter().all(|b| a.op(b) == b.op(a)))
    }

    /// Subgroup generated by `gens`.
    pub fn subgroup(&self, gens: Vec<G>, budget: u128) -> Result<Self> {
        FiniteGroupTable::generate(self.identity().clone(), gens, budget)
    }
}

/// `[G, G]` as the normal closure of the commutators of the generators.
pub fn derived_subgroup<G: GroupElement>(table: &FiniteGroupTable<G>, budget: u128) -> Result<FiniteGroupTable<G>> {
    let gens = table.generators();
    let mut seeds = Vec::new();
    let mut seen = HashSet::new();
    for a in gens {
        for b in gens {
            let c = a.commutator(b);
            if !c.is_identity() && seen.insert(c.clone()) {
                seeds.push(c);
            }
        }
    }
    normal_closure(table, seeds, budget)
}

/// The smallest subgroup containing `seeds` and normalised by `table`.
pub fn normal_closure<G: GroupElement>(
    table: &FiniteGroupTable<G>,
    seeds: Vec<G>,
    budget: u128,
) -> Result<FiniteGroupTable<G>> {
    let mut sub = table.subgroup(Vec::new(), budget)?;
    let mut pending: VecDeque<G> = seeds.into();
    while let Some(g) = pending.pop_front() {
        if sub.contains(&g) {
            continue;
        }
        sub.add_generator(g.clone(), budget)?;
        for t in table.generators() {
            pending.push_back(t.op(&g).op(&t.inverse()));
        }
    }
    // conjugates of earlier generators by the ambient generators are already
    // queued; one more sweep confirms closure
    for h in sub.generators().to_vec() {
        for t in table.generators() {
            if !sub.contains(&t.op(&h).op(&t.inverse())) {
                return Err(Error::WitnessFailure("normal closure is not normal".into()));
            }
        }
    }
    Ok(sub)
}

/// `derived(H) = H`.
pub fn is_perfect<G: GroupElement>(table: &FiniteGroupTable<G>, budget: u128) -> Result<bool> {
    Ok(derived_subgroup(table, budget)?.order() == table.order())
}

/// Structure of `G / N` for a normal subgroup `N` with abelian quotient.
pub fn abelian_quotient<G: GroupElement>(g: &FiniteGroupTable<G>, n: &FiniteGroupTable<G>) -> AbGroupDescriptor {
    let mut coset = vec![usize::MAX; g.order()];
    let mut reps = Vec::new();
    for i in 0..g.order() {
        if coset[i] != usize::MAX {
            continue;
        }
        let label = reps.len();
        reps.push(i);
        for h in n.elements() {
            let j = g.index[&g.elements[i].op(h)];
            coset[j] = label;
        }
    }
    let orders: Vec<u64> = reps
        .iter()
        .map(|&r| {
            let x = &g.elements[r];
            let mut acc = x.clone();
            let mut k = 1;
            while !n.contains(&acc) {
                acc = acc.op(x);
                k += 1;
            }
            k
        })
        .collect();
    AbGroupDescriptor::from_element_orders(&orders)
}

/// `G_n` for `E = mu_w`, materialised.
pub fn hyperoctahedral_table(n: usize, w: u32, budget: u128) -> Result<FiniteGroupTable<WreathElement<CyclicUnit>>> {
    let needed = group_order(n, w);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let identity = WreathElement::identity(n, CyclicUnit::new(w, 0));
    FiniteGroupTable::generate(identity, standard_generators(n, w), budget)
}

/// `G_n / [G_n, G_n]` by enumeration.
pub fn brute_abelianization(n: usize, w: u32, budget: u128) -> Result<AbGroupDescriptor> {
    let g = hyperoctahedral_table(n, w, budget)?;
    let h = derived_subgroup(&g, budget)?;
    Ok(abelian_quotient(&g, &h))
}

/// Summary used by the command line: order, abelianisation, perfectness of `[G_n, G_n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupReport {
    pub order: usize,
    pub derived_order: usize,
    pub abelianization: AbGroupDescriptor,
    pub derived_is_perfect: bool,
}

pub fn group_report(n: usize, w: u32, budget: u128) -> Result<GroupReport> {
    let g = hyperoctahedral_table(n, w, budget)?;
    let h = derived_subgroup(&g, budget)?;
    Ok(GroupReport {
        order: g.order(),
        derived_order: h.order(),
        abelianization: abelian_quotient(&g, &h),
        derived_is_perfect: is_perfect(&h, budget)?,
    })
}

/// `tau_i = sigma_{i+1} o sigma_i` (1-based `i`), an element of `A_n`.
pub fn tau(n: usize, i: usize, w: u32) -> WreathElement<CyclicUnit> {
    let s_i = Permutation::transposition(n, i - 1, i);
    let s_next = Permutation::transposition(n, i, i + 1);
    WreathElement::permutation(s_next.compose(&s_i), CyclicUnit::new(w, 0))
}

/// Diagonal element with the given `(1-based position, unit)` entries.
fn diagonal(n: usize, w: u32, entries: &[(usize, CyclicUnit)]) -> WreathElement<CyclicUnit> {
    let mut units = vec![CyclicUnit::new(w, 0); n];
    for &(pos, u) in entries {
        units[pos - 1] = units[pos - 1].op(&u);
    }
    WreathElement { units, perm: Permutation::identity(n) }
}

/// `f_j = eps_j (eps^-1)_{j+1}` (1-based `j`).
pub fn f_vector(n: usize, j: usize, eps: CyclicUnit) -> WreathElement<CyclicUnit> {
    diagonal(n, eps.order, &[(j, eps), (j + 1, eps.inverse())])
}

/// The six rows of the commutator table for `[tau_i, f_j]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CommutatorCase {
    FarBelow,
    JustBelow,
    Equal,
    JustAbove,
    TwoAbove,
    FarAbove,
}

impl CommutatorCase {
    pub const ALL: [CommutatorCase; 6] = [
        CommutatorCase::FarBelow,
        CommutatorCase::JustBelow,
        CommutatorCase::Equal,
        CommutatorCase::JustAbove,
        CommutatorCase::TwoAbove,
        CommutatorCase::FarAbove,
    ];

    pub fn classify(i: usize, j: usize) -> Self {
        let (i, j) = (i as i64, j as i64);
        match j - i {
            d if d <= -2 => CommutatorCase::FarBelow,
            -1 => CommutatorCase::JustBelow,
            0 => CommutatorCase::Equal,
            1 => CommutatorCase::JustAbove,
            2 => CommutatorCase::TwoAbove,
            _ => CommutatorCase::FarAbove,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CommutatorCase::FarBelow => "j<=i-2: 1",
            CommutatorCase::JustBelow => "j=i-1: eps_i (eps^-1)_{i+2}",
            CommutatorCase::Equal => "j=i: (eps^-2)_i eps_{i+1} eps_{i+2}",
            CommutatorCase::JustAbove => "j=i+1: eps_i (eps^-2)_{i+1} eps_{i+2}",
            CommutatorCase::TwoAbove => "j=i+2: eps_{i+1} (eps^-1)_{i+2}",
            CommutatorCase::FarAbove => "j>=i+3: 1",
        }
    }

    /// The predicted value of `[tau_i, f_j^eps]`.
    pub fn expected(&self, n: usize, i: usize, eps: CyclicUnit) -> WreathElement<CyclicUnit> {
        let w = eps.order;
        let inv = eps.inverse();
        let inv2 = inv.op(&inv);
        match self {
            CommutatorCase::FarBelow | CommutatorCase::FarAbove => diagonal(n, w, &[]),
            CommutatorCase::JustBelow => diagonal(n, w, &[(i, eps), (i + 2, inv)]),
            CommutatorCase::Equal => diagonal(n, w, &[(i, inv2), (i + 1, eps), (i + 2, eps)]),
            CommutatorCase::JustAbove => diagonal(n, w, &[(i, eps), (i + 1, inv2), (i + 2, eps)]),
            CommutatorCase::TwoAbove => diagonal(n, w, &[(i + 1, eps), (i + 2, inv)]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub case: CommutatorCase,
    pub checked: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.failures == 0
    }
}

/// Evaluate `[tau_i, f_j^eps]` for `1 <= i <= n-2`, `1 <= j <= n-1` and every
/// `eps in mu_w`, comparing each against the table.
pub fn commutator_table_check(n: usize, w: u32) -> Vec<CaseResult> {
    let mut results: Vec<CaseResult> = CommutatorCase::ALL
        .iter()
        .map(|&case| CaseResult { case, checked: 0, failures: 0, first_failure: None })
        .collect();
    for i in 1..=n.saturating_sub(2) {
        let t = tau(n, i, w);
        for j in 1..n {
            let case = CommutatorCase::classify(i, j);
            let slot = &mut results[CommutatorCase::ALL.iter().position(|c| *c == case).unwrap()];
            for eps in CyclicUnit::all(w) {
                let got = t.commutator(&f_vector(n, j, eps));
                let want = case.expected(n, i, eps);
                slot.checked += 1;
                if got != want {
                    slot.failures += 1;
                    slot.first_failure
                        .get_or_insert_with(|| format!("i={i} j={j} eps={eps}: got {got}, expected {want}"));
                }
            }
        }
    }
    results
}

/// Convenience alias for an element of `E wr S_n` with `E` the norm-one
/// elements of a field.
pub type FieldWreath<T = BigInt> = WreathElement<UnitElement<T>>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Element, FieldDescriptor};

    const Q: FieldDescriptor = FieldDescriptor::Rationals;

    fn minus() -> UnitElement<BigInt> {
        UnitElement::minus_one(Q)
    }

    fn one() -> UnitElement<BigInt> {
        UnitElement::one(Q)
    }

    #[test]
    fn inverse_and_conjugation() {
        let g = WreathElement::new(vec![minus(), one(), minus()], Permutation::from_images(vec![2, 0, 1]).unwrap())
            .unwrap();
        assert!(g.multiply(&g.invert()).unwrap().is_identity());
        assert!(g.invert().multiply(&g).unwrap().is_identity());
        let eps1 = WreathElement::unit_at(2, 0, minus());
        let eps2 = WreathElement::unit_at(2, 1, minus());
        let swap = WreathElement::permutation(Permutation::transposition(2, 0, 1), one());
        assert_eq!(eps1.multiply(&swap).unwrap(), swap.multiply(&eps2).unwrap());
    }

    #[test]
    fn braid_relation() {
        let s1 = WreathElement::permutation(Permutation::transposition(3, 0, 1), one());
        let s2 = WreathElement::permutation(Permutation::transposition(3, 1, 2), one());
        assert_eq!(s1.op(&s2).op(&s1), s2.op(&s1).op(&s2));
    }

    #[test]
    fn matrix_model_is_multiplicative() {
        let a = WreathElement::new(vec![minus(), one(), one()], Permutation::from_images(vec![1, 2, 0]).unwrap())
            .unwrap();
        let b = WreathElement::new(vec![one(), minus(), minus()], Permutation::from_images(vec![0, 2, 1]).unwrap())
            .unwrap();
        let ab = a.multiply(&b).unwrap();
        assert_eq!(ab.to_matrix(), a.to_matrix().compose(&b.to_matrix()).unwrap());
        assert!(matches!(a.multiply(&WreathElement::identity(2, one())), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn abelianize_examples() {
        let id = WreathElement::identity(2, one());
        assert_eq!(id.abelianize(), AbImage { unit_product: Some(one()), parity: 0 });
        let g = WreathElement::new(vec![minus(), minus()], Permutation::identity(2)).unwrap();
        assert_eq!(g.abelianize(), AbImage { unit_product: Some(one()), parity: 0 });
        let h = WreathElement::new(vec![minus(), one()], Permutation::transposition(2, 0, 1)).unwrap();
        assert_eq!(h.abelianize(), AbImage { unit_product: Some(minus()), parity: 1 });
        assert_eq!(h.abelianize().unit_product.unwrap().value(), &Element::frac(-1, 1));
    }

    #[test]
    fn small_abelianizations() {
        assert_eq!(brute_abelianization(1, 2, DEFAULT_BUDGET).unwrap().to_string(), "Z/2");
        assert_eq!(brute_abelianization(2, 2, DEFAULT_BUDGET).unwrap().to_string(), "Z/2 + Z/2");
        assert_eq!(brute_abelianization(3, 4, DEFAULT_BUDGET).unwrap().to_string(), "Z/2 + Z/4");
        assert!(matches!(brute_abelianization(9, 2, DEFAULT_BUDGET), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn derived_of_abelian_is_trivial() {
        let g = hyperoctahedral_table(1, 4, DEFAULT_BUDGET).unwrap();
        assert!(g.is_abelian());
        assert_eq!(derived_subgroup(&g, DEFAULT_BUDGET).unwrap().order(), 1);
    }

    #[test]
    fn n3_derived_is_not_perfect() {
        let g = hyperoctahedral_table(3, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.order(), 48);
        let h = derived_subgroup(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(h.order(), 12);
        assert!(!is_perfect(&h, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn stabilization_preserves_abelian_image() {
        let g = WreathElement::new(vec![minus(), one()], Permutation::transposition(2, 0, 1)).unwrap();
        let s = g.stabilize(one());
        assert_eq!(s.n(), 3);
        assert_eq!(s.abelianize(), g.abelianize());
    }

    #[test]
    fn commutator_cases_hold_for_n5() {
        for r in commutator_table_check(5, 2) {
            assert!(r.passed(), "{:?}", r);
        }
    }

    #[test]
    fn tau_moves_three_letters() {
        let t = tau(5, 1, 2);
        assert_eq!(t.perm().images(), &[2, 0, 1, 3, 4]);
        assert_eq!(t.perm().parity(), 0);
    }
}
