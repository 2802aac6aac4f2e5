//! Finitely generated (and countable-rank) abelian groups as structural
//! descriptors, plus Smith normal form for presentations.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A rank or multiplicity: finite, or the countably infinite `omega`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Finite(u64),
    CountablyInfinite,
}

impl Rank {
    pub fn is_zero(&self) -> bool {
        *self == Rank::Finite(0)
    }
}

impl std::ops::Add for Rank {
    type Output = Rank;

    fn add(self, other: Rank) -> Rank {
        match (self, other) {
            (Rank::Finite(a), Rank::Finite(b)) => Rank::Finite(a + b),
            _ => Rank::CountablyInfinite,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(k) => write!(f, "{k}"),
            Rank::CountablyInfinite => write!(f, "w"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Qualifier {
    Exact,
    /// The group is the stated part plus an undetermined finite summand `G`
    /// with `|G| <= max_extra_order`.
    BoundOnly { note: String, max_extra_order: u64 },
}

/// `Z^free_rank + sum Z/q` with each `q` a prime power.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbGroupDescriptor {
    free_rank: Rank,
    /// prime power -> multiplicity
    torsion: BTreeMap<u64, Rank>,
    qualifier: Qualifier,
}

fn prime_powers(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut q = 1;
            while m.is_multiple_of(p) {
                m /= p;
                q *= p;
            }
            out.push(q);
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

impl AbGroupDescriptor {
    pub fn trivial() -> Self {
        AbGroupDescriptor { free_rank: Rank::Finite(0), torsion: BTreeMap::new(), qualifier: Qualifier::Exact }
    }

    pub fn free(rank: Rank) -> Self {
        AbGroupDescriptor { free_rank: rank, ..Self::trivial() }
    }

    pub fn z() -> Self {
        Self::free(Rank::Finite(1))
    }

    /// `Z/m`, split into its primary parts. `Z/1` is trivial and `Z/0` is `Z`.
    pub fn cyclic(m: u64) -> Self {
        if m == 0 {
            return Self::z();
        }
        Self::cyclic_power(m, Rank::Finite(1))
    }

    /// `(Z/m)^k`.
    pub fn cyclic_power(m: u64, k: Rank) -> Self {
        let mut g = Self::trivial();
        if k.is_zero() {
            return g;
        }
        for q in prime_powers(m) {
            g.torsion.insert(q, k);
        }
        g
    }

    /// `Z^free + sum Z/d_i`; entries `d_i <= 1` are dropped.
    pub fn from_invariants(free: u64, invariants: &[u64]) -> Self {
        invariants
            .iter()
            .fold(Self::free(Rank::Finite(free)), |acc, &d| if d > 1 { acc.direct_sum(&Self::cyclic(d)) } else { acc })
    }

    /// Structure of a finite abelian group from the multiset of its element orders.
    pub fn from_element_orders(orders: &[u64]) -> Self {
        let n = orders.len() as u64;
        let mut g = Self::trivial();
        for q in prime_powers(n) {
            let p = smallest_prime_factor(q);
            // c[k] = log_p #{x : x^(p^k) = 1}
            let mut c = vec![0u32];
            let mut pk = 1u64;
            loop {
                pk *= p;
                let count = orders.iter().filter(|&&o| pk.is_multiple_of(o)).count() as u64;
                c.push(log_exact(count, p));
                if count == q {
                    break;
                }
            }
            let at_least = |k: usize| if k < c.len() { c[k] - c[k - 1] } else { 0 };
            let mut power = 1u64;
            for k in 1..c.len() {
                power *= p;
                let exactly = at_least(k) - at_least(k + 1);
                if exactly > 0 {
                    g.torsion.insert(power, Rank::Finite(exactly as u64));
                }
            }
        }
        g
    }

    pub fn with_qualifier(mut self, qualifier: Qualifier) -> Self {
        self.qualifier = qualifier;
        self
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut torsion = self.torsion.clone();
        for (&q, &k) in &other.torsion {
            let e = torsion.entry(q).or_insert(Rank::Finite(0));
            *e = *e + k;
        }
        let qualifier = match (&self.qualifier, &other.qualifier) {
            (Qualifier::Exact, q) | (q, Qualifier::Exact) => q.clone(),
            (
                Qualifier::BoundOnly { note, max_extra_order: a },
                Qualifier::BoundOnly { max_extra_order: b, .. },
            ) => Qualifier::BoundOnly { note: note.clone(), max_extra_order: a * b },
        };
        AbGroupDescriptor { free_rank: self.free_rank + other.free_rank, torsion, qualifier }
    }

    pub fn free_rank(&self) -> Rank {
        self.free_rank
    }

    pub fn torsion(&self) -> &BTreeMap<u64, Rank> {
        &self.torsion
    }

    /// Sorted prime-power orders; `None` if some multiplicity is infinite.
    pub fn torsion_list(&self) -> Option<Vec<u64>> {
        let mut out = Vec::new();
        for (&q, &k) in &self.torsion {
            match k {
                Rank::Finite(k) => out.extend(std::iter::repeat_n(q, k as usize)),
                Rank::CountablyInfinite => return None,
            }
        }
        Some(out)
    }

    pub fn qualifier(&self) -> &Qualifier {
        &self.qualifier
    }

    pub fn is_exact(&self) -> bool {
        self.qualifier == Qualifier::Exact
    }

    pub fn is_trivial(&self) -> bool {
        self.is_exact() && self.free_rank.is_zero() && self.torsion.is_empty()
    }

    /// Order of a finite group described exactly.
    pub fn order(&self) -> Option<u128> {
        if !self.free_rank.is_zero() || !self.is_exact() {
            return None;
        }
        let mut order: u128 = 1;
        for (&q, &k) in &self.torsion {
            match k {
                Rank::Finite(k) => order = order.checked_mul((q as u128).checked_pow(k as u32)?)?,
                Rank::CountablyInfinite => return None,
            }
        }
        Some(order)
    }
}

fn smallest_prime_factor(q: u64) -> u64 {
    (2..=q).find(|p| q.is_multiple_of(*p)).expect("q > 1")
}

fn log_exact(mut x: u64, p: u64) -> u32 {
    let mut k = 0;
    while x > 1 {
        debug_assert_eq!(x % p, 0);
        x /= p;
        k += 1;
    }
    k
}

impl fmt::Display for AbGroupDescriptor {
    /// `Z^1 + Z/2 + Z/4`, `Z^w + (Z/2)^w`, `0`, and `[bound] G + ...` for bounds.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.free_rank.is_zero() {
            parts.push(format!("Z^{}", self.free_rank));
        }
        for (&q, &k) in &self.torsion {
            match k {
                Rank::Finite(k) => parts.extend(std::iter::repeat_n(format!("Z/{q}"), k as usize)),
                Rank::CountablyInfinite => parts.push(format!("(Z/{q})^w")),
            }
        }
        match &self.qualifier {
            Qualifier::Exact => {
                if parts.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", parts.join(" + "))
                }
            }
            Qualifier::BoundOnly { max_extra_order, .. } => {
                parts.insert(0, format!("G(|G|<={max_extra_order})"));
                write!(f, "[bound] {}", parts.join(" + "))
            }
        }
    }
}

/// Diagonal of the Smith normal form of an integer matrix (row-major), with
/// zeros dropped. Each entry divides the next.
pub fn smith_invariants(matrix: &[Vec<BigInt>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = matrix.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest non-zero absolute value in the remaining block
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by_key(|&(i, j)| a[i][j].abs());
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = a[i][t].div_floor(&a[t][t]);
            if !q.is_zero() {
                for j in t..cols {
                    let v = &a[t][j] * &q;
                    a[i][j] -= v;
                }
            }
            clean &= a[i][t].is_zero();
        }
        for j in t + 1..cols {
            let q = a[t][j].div_floor(&a[t][t]);
            if !q.is_zero() {
                for i in t..rows {
                    let v = &a[i][t] * &q;
                    a[i][j] -= v;
                }
            }
            clean &= a[t][j].is_zero();
        }
        if !clean {
            continue;
        }
        // enforce divisibility of the rest of the block
        let bad = (t + 1..rows)
            .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
            .find(|&(i, j)| !a[i][j].is_multiple_of(&a[t][t]));
        if let Some((i, _)) = bad {
            for j in t..cols {
                let v = a[i][j].clone();
                a[t][j] += v;
            }
            continue;
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// `Z^generators / (row span of relations)`.
pub fn cokernel_descriptor(generators: usize, relations: &[Vec<BigInt>]) -> AbGroupDescriptor {
    let inv = smith_invariants(relations);
    let free = (generators - inv.len()) as u64;
    let torsion: Vec<u64> = inv
        .iter()
        .filter(|d| !d.is_one())
        .map(|d| d.to_u64().expect("torsion coefficient fits in u64"))
        .collect();
    AbGroupDescriptor::from_invariants(free, &torsion)
}
