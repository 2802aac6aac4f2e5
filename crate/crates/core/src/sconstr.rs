//! Object sets `S_n` of the Waldhausen S-construction over free modules, for
//! finite unit groups `E = mu_2` (over `Q`) and `E = mu_4` (over `Q(i)`),
//! and the comparison with finitely generated free pointed `E`-sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Element, FieldDescriptor, Scalar, UnitElement};
use crate::omod::{Certificate, Matrix};
use crate::wreath::{CyclicUnit, GroupElement, DEFAULT_BUDGET};

/// The field whose norm-one group is exactly `mu_w`.
pub fn unit_field(w: u32) -> Result<FieldDescriptor> {
    match w {
        2 => Ok(FieldDescriptor::Rationals),
        4 => Ok(FieldDescriptor::Gaussian),
        _ => Err(Error::UnsupportedUnitGroup(w)),
    }
}

/// `zeta^k` for `k = 0..w`, with `zeta = -1` or `zeta = i`.
pub fn finite_units<T: Scalar>(w: u32) -> Result<Vec<UnitElement<T>>> {
    let field = unit_field(w)?;
    let zeta = match w {
        2 => Element::rational(-Ratio::one()),
        _ => Element::new(Ratio::zero(), Ratio::one()),
    };
    let zeta = UnitElement::new(field, zeta)?;
    let mut out = vec![UnitElement::one(field)];
    for _ in 1..w {
        out.push(out.last().unwrap().mul(&zeta));
    }
    Ok(out)
}

fn unit_exponent<T: Scalar>(units: &[UnitElement<T>], u: &UnitElement<T>) -> Result<u32> {
    units
        .iter()
        .position(|v| v == u)
        .map(|k| k as u32)
        .ok_or_else(|| Error::WitnessFailure(format!("{} is not a root of unity of the chosen order", u.field().format(u.value()))))
}

/// `w^a * b! / (b - a)!`.
pub fn cofib_count(a: usize, b: usize, w: u32) -> u128 {
    if a > b {
        return 0;
    }
    let falling: u128 = ((b - a + 1)..=b).map(|k| k as u128).product();
    (w as u128).pow(a as u32) * falling
}

fn injections(a: usize, b: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(a);
    let mut used = vec![false; b];
    fn go(a: usize, b: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == a {
            out.push(current.clone());
            return;
        }
        for r in 0..b {
            if !used[r] {
                used[r] = true;
                current.push(r);
                go(a, b, current, used, out);
                current.pop();
                used[r] = false;
            }
        }
    }
    go(a, b, &mut current, &mut used, &mut out);
    out
}

/// All cofibrations `O(a) >-> O(b)`: injective column-to-row maps, then unit
/// assignments, both in lexicographic order.
pub fn enumerate_cofibs<T: Scalar>(a: usize, b: usize, w: u32, budget: u128) -> Result<Vec<Certificate<T>>> {
    let field = unit_field(w)?;
    let needed = cofib_count(a, b, w);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let units = finite_units::<T>(w)?;
    let mut out = Vec::with_capacity(needed as usize);
    for rows in injections(a, b) {
        for code in 0..(w as usize).pow(a as u32) {
            let mut c = code;
            let assignment = (0..a)
                .map(|_| {
                    let u = units[c % w as usize].clone();
                    c /= w as usize;
                    u
                })
                .rev()
                .collect();
            out.push(Certificate::new(field, b, rows.clone(), assignment)?);
        }
    }
    Ok(out)
}

/// The free pointed `mu_w`-set on `generators` generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointedESet {
    pub order: u32,
    pub generators: usize,
}

/// A point: the basepoint, or `zeta^k * g_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ESetPoint {
    Base,
    Point { unit: CyclicUnit, generator: usize },
}

impl ESetPoint {
    pub fn act(&self, z: &CyclicUnit) -> Self {
        match self {
            ESetPoint::Base => ESetPoint::Base,
            ESetPoint::Point { unit, generator } => ESetPoint::Point { unit: z.op(unit), generator: *generator },
        }
    }
}

impl PointedESet {
    pub fn new(order: u32, generators: usize) -> Self {
        PointedESet { order, generators }
    }

    pub fn carrier_size(&self) -> usize {
        self.order as usize * self.generators + 1
    }

    pub fn points(&self) -> Vec<ESetPoint> {
        let mut out = vec![ESetPoint::Base];
        for generator in 0..self.generators {
            out.extend(CyclicUnit::all(self.order).map(|unit| ESetPoint::Point { unit, generator }));
        }
        out
    }

    pub fn generator(&self, i: usize) -> ESetPoint {
        ESetPoint::Point { unit: CyclicUnit::new(self.order, 0), generator: i }
    }
}

/// A basepoint-preserving equivariant map of free pointed `E`-sets,
/// determined by the images of the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ESetInjection {
    pub source: PointedESet,
    pub target: PointedESet,
    images: Vec<ESetPoint>,
}

impl ESetInjection {
    /// Accepts only injections whose image complement is `E`-free away from
    /// the basepoint.
    pub fn new(source: PointedESet, target: PointedESet, images: Vec<ESetPoint>) -> Result<Self> {
        let map = ESetInjection { source, target, images };
        if map.images.len() != source.generators || source.order != target.order {
            return Err(Error::DimensionMismatch { expected: source.generators, found: map.images.len() });
        }
        if !map.is_injection() {
            return Err(Error::WitnessFailure("not an injection with free complement".into()));
        }
        Ok(map)
    }

    pub fn images(&self) -> &[ESetPoint] {
        &self.images
    }

    pub fn apply(&self, p: &ESetPoint) -> ESetPoint {
        match p {
            ESetPoint::Base => ESetPoint::Base,
            ESetPoint::Point { unit, generator } => self.images[*generator].act(unit),
        }
    }

    /// Checked on the whole carrier.
    fn is_injection(&self) -> bool {
        let in_range = self.images.iter().all(|p| match p {
            ESetPoint::Base => true,
            ESetPoint::Point { unit, generator } => unit.order == self.target.order && *generator < self.target.generators,
        });
        if !in_range {
            return false;
        }
        let image: Vec<ESetPoint> = self.source.points().iter().map(|p| self.apply(p)).collect();
        let distinct: BTreeSet<&ESetPoint> = image.iter().collect();
        if distinct.len() != image.len() {
            return false;
        }
        let complement: BTreeSet<ESetPoint> =
            self.target.points().into_iter().filter(|p| *p != ESetPoint::Base && !distinct.contains(p)).collect();
        complement.iter().all(|p| CyclicUnit::all(self.target.order).all(|z| complement.contains(&p.act(&z))))
    }

    /// `other . self`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        ESetInjection::new(self.source, other.target, self.images.iter().map(|p| other.apply(p)).collect())
    }

    /// Generators of the target outside the image, in increasing order: the
    /// quotient collapsing the image is free on them.
    pub fn cokernel_generators(&self) -> Vec<usize> {
        let hit: BTreeSet<usize> = self
            .images
            .iter()
            .filter_map(|p| match p {
                ESetPoint::Point { generator, .. } => Some(*generator),
                ESetPoint::Base => None,
            })
            .collect();
        (0..self.target.generators).filter(|g| !hit.contains(g)).collect()
    }
}

/// Every equivariant pointed map `E(a)+ -> E(b)+` (a generator may also go to
/// the basepoint), kept when it is an injection with free complement.
pub fn enumerate_injections(a: usize, b: usize, w: u32, budget: u128) -> Result<Vec<ESetInjection>> {
    unit_field(w)?;
    let source = PointedESet::new(w, a);
    let target = PointedESet::new(w, b);
    let choices = target.points();
    let needed = (choices.len() as u128).pow(a as u32);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut out = Vec::new();
    for code in 0..needed {
        let mut c = code;
        let images: Vec<ESetPoint> = (0..a)
            .map(|_| {
                let p = choices[(c % choices.len() as u128) as usize];
                c /= choices.len() as u128;
                p
            })
            .collect();
        if let Ok(map) = ESetInjection::new(source, target, images) {
            out.push(map);
        }
    }
    out.sort();
    Ok(out)
}

/// Generator `i` goes to `units[i] * g_{col_to_row[i]}`.
pub fn to_pointed_eset<T: Scalar>(c: &Certificate<T>, w: u32) -> Result<ESetInjection> {
    let units = finite_units::<T>(w)?;
    if c.field() != unit_field(w)? {
        return Err(Error::FieldMismatch);
    }
    let images = c
        .col_to_row()
        .iter()
        .zip(c.units())
        .map(|(&r, u)| Ok(ESetPoint::Point { unit: CyclicUnit::new(w, unit_exponent(&units, u)?), generator: r }))
        .collect::<Result<Vec<_>>>()?;
    ESetInjection::new(PointedESet::new(w, c.source_rank()), PointedESet::new(w, c.target_rank()), images)
}

pub fn from_pointed_eset<T: Scalar>(map: &ESetInjection) -> Result<Certificate<T>> {
    let w = map.source.order;
    let units = finite_units::<T>(w)?;
    let mut rows = Vec::new();
    let mut assignment = Vec::new();
    for p in &map.images {
        match p {
            ESetPoint::Point { unit, generator } => {
                rows.push(*generator);
                assignment.push(units[unit.exponent as usize].clone());
            }
            ESetPoint::Base => return Err(Error::WitnessFailure("generator sent to the basepoint".into())),
        }
    }
    Certificate::new(unit_field(w)?, map.target.generators, rows, assignment)
}

/// An object of `S_n` over free modules: `A_{i,j}` for `0 <= i <= j <= n`,
/// cofibrations `A_{i,j} >-> A_{i,k}` and quotients `A_{i,k} ->> A_{j,k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircaseObject<T: Scalar> {
    pub n: usize,
    ranks: BTreeMap<(usize, usize), usize>,
    cofibs: BTreeMap<(usize, usize, usize), Certificate<T>>,
    quotients: BTreeMap<(usize, usize, usize), Matrix<T>>,
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..=n).flat_map(move |i| (i..=n).flat_map(move |j| (j..=n).map(move |k| (i, j, k))))
}

impl<T: Scalar> StaircaseObject<T> {
    /// The staircase generated by `A_{0,1} >-> ... >-> A_{0,n}`, with the
    /// quotient `A_{i,k}` carried on the rows of `A_{0,k}` outside the image
    /// of `A_{0,i}`, in increasing order.
    pub fn from_chain(field: FieldDescriptor, first_rank: usize, chain: &[Certificate<T>]) -> Result<Self> {
        let n = chain.len() + 1;
        let mut top = vec![0, first_rank];
        for (idx, c) in chain.iter().enumerate() {
            if c.source_rank() != top[idx + 1] || c.field() != field {
                return Err(Error::DimensionMismatch { expected: top[idx + 1], found: c.source_rank() });
            }
            top.push(c.target_rank());
        }
        // along[j][k]: A_{0,j} >-> A_{0,k}
        let mut along: BTreeMap<(usize, usize), Certificate<T>> = BTreeMap::new();
        for j in 0..=n {
            along.insert((j, j), Certificate::inclusion(field, top[j], top[j]));
            for k in j + 1..=n {
                let step = if k == 1 { Certificate::inclusion(field, 0, top[1]) } else { chain[k - 2].clone() };
                let prev = along[&(j, k - 1)].clone();
                along.insert((j, k), prev.then(&step)?);
            }
        }
        let basis = |i: usize, k: usize| -> Vec<usize> { along[&(i, k)].complement_rows().to_vec() };
        let mut ranks = BTreeMap::new();
        let mut cofibs = BTreeMap::new();
        let mut quotients = BTreeMap::new();
        for i in 0..=n {
            for j in i..=n {
                ranks.insert((i, j), top[j] - top[i]);
            }
        }
        for (i, j, k) in triples(n) {
            let src = basis(i, j);
            let dst = basis(i, k);
            let c0 = &along[&(j, k)];
            let mut rows = Vec::new();
            let mut units = Vec::new();
            for &r in &src {
                let image = c0.col_to_row()[r];
                rows.push(dst.iter().position(|&x| x == image).expect("image avoids the lower filtration"));
                units.push(c0.units()[r].clone());
            }
            let cert = Certificate::new(field, dst.len(), rows, units)?;
            quotients.insert((i, j, k), cert.cokernel().1);
            cofibs.insert((i, j, k), cert);
        }
        Ok(StaircaseObject { n, ranks, cofibs, quotients })
    }

    pub fn rank(&self, i: usize, j: usize) -> usize {
        self.ranks[&(i, j)]
    }

    pub fn cofib(&self, i: usize, j: usize, k: usize) -> &Certificate<T> {
        &self.cofibs[&(i, j, k)]
    }

    pub fn quotient(&self, i: usize, j: usize, k: usize) -> &Matrix<T> {
        &self.quotients[&(i, j, k)]
    }

    /// The chain `A_{0,1} >-> A_{0,2} >-> ...`.
    pub fn chain(&self) -> Vec<Certificate<T>> {
        (1..self.n).map(|j| self.cofibs[&(0, j, j + 1)].clone()).collect()
    }

    /// Rank additivity, cofibration sequences, and compatibility of the
    /// cofibrations under composition.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::WitnessFailure(msg));
        for i in 0..=self.n {
            if self.rank(i, i) != 0 {
                return fail(format!("A_({i},{i}) is not zero"));
            }
        }
        for (i, j, k) in triples(self.n) {
            if self.rank(i, k) != self.rank(i, j) + self.rank(j, k) {
                return fail(format!("ranks are not additive at ({i},{j},{k})"));
            }
            let c = self.cofib(i, j, k);
            if c.source_rank() != self.rank(i, j) || c.target_rank() != self.rank(i, k) {
                return fail(format!("cofibration ({i},{j},{k}) has the wrong shape"));
            }
            let (corank, projection) = c.cokernel();
            if corank != self.rank(j, k) || &projection != self.quotient(i, j, k) {
                return fail(format!("A_({i},{j}) >-> A_({i},{k}) ->> A_({j},{k}) is not a cofibration sequence"));
            }
            for h in i..=j {
                if &self.cofib(i, h, j).then(c)? != self.cofib(i, h, k) {
                    return fail(format!("cofibrations do not compose at ({i},{h},{j},{k})"));
                }
            }
        }
        Ok(())
    }

    fn reindex(&self, idx: &[usize]) -> Self {
        let n = idx.len() - 1;
        let mut ranks = BTreeMap::new();
        for i in 0..=n {
            for j in i..=n {
                ranks.insert((i, j), self.ranks[&(idx[i], idx[j])]);
            }
        }
        let mut cofibs = BTreeMap::new();
        let mut quotients = BTreeMap::new();
        for (i, j, k) in triples(n) {
            let key = (idx[i], idx[j], idx[k]);
            cofibs.insert((i, j, k), self.cofibs[&key].clone());
            quotients.insert((i, j, k), self.quotients[&key].clone());
        }
        StaircaseObject { n, ranks, cofibs, quotients }
    }

    /// `d_m`: forget the index `m`.
    pub fn face(&self, m: usize) -> Self {
        assert!(m <= self.n && self.n > 0);
        let idx: Vec<usize> = (0..=self.n).filter(|&k| k != m).collect();
        self.reindex(&idx)
    }

    /// `s_m`: repeat the index `m`.
    pub fn degeneracy(&self, m: usize) -> Self {
        assert!(m <= self.n);
        let idx: Vec<usize> = (0..=self.n).flat_map(|k| if k == m { vec![k, k] } else { vec![k] }).collect();
        self.reindex(&idx)
    }

    /// Rank grid, rows `i`, columns `j`.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| i \\ j |");
        for j in 0..=self.n {
            write!(out, " {j} |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.n + 1));
        out.push('\n');
        for i in 0..=self.n {
            write!(out, "| {i} |").unwrap();
            for j in 0..=self.n {
                if j < i {
                    out.push_str("  |");
                } else {
                    write!(out, " {} |", self.rank(i, j)).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let top: Vec<usize> = (0..=self.n).map(|j| self.rank(0, j)).collect();
        json!({
            "n": self.n,
            "ranks": top,
            "chain": self.chain().iter().map(Certificate::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Counts of `S_n` objects with `rk A_{0,n} <= max_rank`, per rank sequence
/// `(rk A_{0,1}, .., rk A_{0,n})`, on both sides of the comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SObjectCensus<T: Scalar> {
    pub n: usize,
    pub max_rank: usize,
    pub w: u32,
    pub by_ranks: BTreeMap<Vec<usize>, (u128, u128)>,
    pub free_total: u128,
    pub eset_total: u128,
    /// Every step's certificate list maps bijectively onto the injection list.
    pub bijective: bool,
    pub samples: Vec<StaircaseObject<T>>,
    pub faces_checked: usize,
}

impl<T: Scalar> SObjectCensus<T> {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .by_ranks
            .iter()
            .map(|(r, (f, e))| json!({"ranks": r, "free": f.to_string(), "eset": e.to_string()}))
            .collect();
        json!({
            "n": self.n,
            "max_rank": self.max_rank,
            "w": self.w,
            "free_total": self.free_total.to_string(),
            "eset_total": self.eset_total.to_string(),
            "bijective": self.bijective,
            "faces_checked": self.faces_checked,
            "by_ranks": rows,
            "samples": self.samples.iter().map(StaircaseObject::to_json).collect::<Vec<_>>(),
        })
    }
}

fn rank_sequences(n: usize, max_rank: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s: Vec<usize>| {
                let lo = s.last().copied().unwrap_or(0);
                (lo..=max_rank).map(move |r| {
                    let mut t = s.clone();
                    t.push(r);
                    t
                })
            })
            .collect();
    }
    out
}

pub const SAMPLES_PER_SEQUENCE: usize = 4;

/// Enumerate `S_n` objects for `1 <= n <= 3` on both sides. Free-module
/// cofibrations and pointed `E`-set injections are listed independently per
/// step, the comparison map is checked to be a bijection step by step, and a
/// few objects per rank sequence are built in full and checked together with
/// all their faces and degeneracies.
pub fn enumerate_s_objects<T: Scalar>(n: usize, max_rank: usize, w: u32, budget: u128) -> Result<SObjectCensus<T>> {
    let field = unit_field(w)?;
    if n == 0 || n > 3 {
        return Err(Error::BudgetExceeded { needed: n as u128, budget: 3 });
    }
    let mut cofibs: BTreeMap<(usize, usize), Vec<Certificate<T>>> = BTreeMap::new();
    let mut injs: BTreeMap<(usize, usize), Vec<ESetInjection>> = BTreeMap::new();
    let mut bijective = true;
    for a in 0..=max_rank {
        for b in a..=max_rank {
            let cs = enumerate_cofibs::<T>(a, b, w, budget)?;
            let es = enumerate_injections(a, b, w, budget)?;
            let mapped: BTreeSet<ESetInjection> = cs.iter().map(|c| to_pointed_eset(c, w)).collect::<Result<_>>()?;
            let listed: BTreeSet<ESetInjection> = es.iter().cloned().collect();
            bijective &= mapped.len() == cs.len() && mapped == listed;
            for e in &es {
                bijective &= to_pointed_eset(&from_pointed_eset::<T>(e)?, w)? == *e;
            }
            cofibs.insert((a, b), cs);
            injs.insert((a, b), es);
        }
    }
    let mut by_ranks = BTreeMap::new();
    let (mut free_total, mut eset_total) = (0u128, 0u128);
    let mut samples = Vec::new();
    let mut faces_checked = 0;
    for seq in rank_sequences(n, max_rank) {
        let steps: Vec<(usize, usize)> = seq.windows(2).map(|p| (p[0], p[1])).collect();
        let free: u128 = steps.iter().map(|s| cofibs[s].len() as u128).product();
        let eset: u128 = steps.iter().map(|s| injs[s].len() as u128).product();
        if free_total + free > budget {
            return Err(Error::BudgetExceeded { needed: free_total + free, budget });
        }
        free_total += free;
        eset_total += eset;
        by_ranks.insert(seq.clone(), (free, eset));
        for s in 0..SAMPLES_PER_SEQUENCE.min(free as usize) {
            let position = (s as u128 * free) / SAMPLES_PER_SEQUENCE as u128;
            let mut rest = position;
            let mut chain = Vec::new();
            for st in &steps {
                let list = &cofibs[st];
                chain.push(list[(rest % list.len() as u128) as usize].clone());
                rest /= list.len() as u128;
            }
            let obj = StaircaseObject::from_chain(field, seq[0], &chain)?;
            obj.validate()?;
            for m in 0..=obj.n {
                obj.face(m).validate()?;
                obj.degeneracy(m).validate()?;
                faces_checked += 2;
            }
            samples.push(obj);
        }
    }
    Ok(SObjectCensus { n, max_rank, w, by_ranks, free_total, eset_total, bijective, samples, faces_checked })
}

pub fn enumerate_s_objects_default<T: Scalar>(n: usize, max_rank: usize, w: u32) -> Result<SObjectCensus<T>> {
    enumerate_s_objects(n, max_rank, w, DEFAULT_BUDGET)
}
