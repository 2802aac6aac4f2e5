//! K-group descriptors for archimedean valuation rings, assembled from the
//! unit group `E = mu_F + Z^S`, cyclic group homology and the low-degree
//! Atiyah-Hirzebruch page for `B mu_F`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::abelian::{smith_invariants, AbGroupDescriptor, Qualifier, Rank};
use crate::error::{Error, Result};
use crate::field::FieldDescriptor;

/// `E = mu_F + Z^S` with `|mu_F| = w` and `S = rk E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitGroupStructure {
    pub w: u64,
    pub rank: Rank,
}

impl UnitGroupStructure {
    /// `w' = gcd(2, w)`.
    pub fn w_prime(&self) -> u64 {
        self.w.gcd(&2)
    }

    pub fn descriptor(&self) -> AbGroupDescriptor {
        AbGroupDescriptor::cyclic(self.w).direct_sum(&AbGroupDescriptor::free(self.rank))
    }
}

/// A real embedding leaves only `+-1`; `Q(i)` has the four roots of unity and
/// the free group on the Gaussian primes over `p = 1 mod 4`.
pub fn unit_group_structure(field: &FieldDescriptor) -> UnitGroupStructure {
    match field {
        FieldDescriptor::Gaussian => UnitGroupStructure { w: 4, rank: Rank::CountablyInfinite },
        _ => UnitGroupStructure { w: 2, rank: Rank::Finite(0) },
    }
}

/// Trivial coefficient module for group homology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coefficients {
    Integers,
    ModM(u64),
}

/// Homology of a complex of free abelian groups `D_p` with differentials
/// `d_p : D_p -> D_{p-1}` given as matrices (rows index `D_{p-1}`).
fn free_complex_homology(ranks: &[usize], diffs: &[Vec<Vec<BigInt>>], p: usize) -> AbGroupDescriptor {
    let rank_of = |m: &Vec<Vec<BigInt>>| smith_invariants(m).len();
    let out_rank = if p == 0 { 0 } else { rank_of(&diffs[p]) };
    let incoming = smith_invariants(&diffs[p + 1]);
    let free = ranks[p] - out_rank - incoming.len();
    let torsion: Vec<u64> = incoming
        .iter()
        .filter(|d| !d.is_one())
        .map(|d| d.to_u64().expect("torsion fits in u64"))
        .collect();
    AbGroupDescriptor::from_invariants(free as u64, &torsion)
}

/// `H_p(Z/w; coeff)`, computed from the periodic resolution
/// `... -> Z[C_w] --N--> Z[C_w] --(1-t)--> Z[C_w] -> Z`. With `Z/m`
/// coefficients the complex is replaced by the mapping cone of
/// multiplication by `m`, which is quasi-isomorphic to its reduction mod `m`.
pub fn cyclic_homology(w: u64, coeff: Coefficients, p: usize) -> AbGroupDescriptor {
    let top = p + 2;
    let z = |v: u64| BigInt::from(v);
    // C_k = Z, d_k = 0 for odd k, w for even k > 0
    let d = |k: usize| if k % 2 == 1 { BigInt::zero() } else { z(w) };
    match coeff {
        Coefficients::Integers => {
            let ranks = vec![1; top + 1];
            let mut diffs = vec![vec![]; top + 1];
            for (k, slot) in diffs.iter_mut().enumerate().skip(1) {
                *slot = vec![vec![d(k)]];
            }
            free_complex_homology(&ranks, &diffs, p)
        }
        Coefficients::ModM(m) => {
            // D_k = C_k + C_{k-1}, d(x, y) = (d x + m y, -d y)
            let ranks: Vec<usize> = (0..=top).map(|k| if k == 0 { 1 } else { 2 }).collect();
            let mut diffs = vec![vec![]; top + 1];
            diffs[1] = vec![vec![d(1), z(m)]];
            for (k, slot) in diffs.iter_mut().enumerate().skip(2) {
                *slot = vec![vec![d(k), z(m)], vec![BigInt::zero(), -d(k - 1)]];
            }
            free_complex_homology(&ranks, &diffs, p)
        }
    }
}

/// Stable stems `pi_q^s` for `q <= qmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableStemTable {
    stems: BTreeMap<usize, AbGroupDescriptor>,
}

impl Default for StableStemTable {
    fn default() -> Self {
        let stems = [(0, AbGroupDescriptor::z()), (1, AbGroupDescriptor::cyclic(2)), (2, AbGroupDescriptor::cyclic(2))];
        StableStemTable { stems: stems.into_iter().collect() }
    }
}

impl StableStemTable {
    pub fn qmax(&self) -> usize {
        *self.stems.keys().next_back().unwrap_or(&0)
    }

    pub fn get(&self, q: usize) -> Result<&AbGroupDescriptor> {
        self.stems.get(&q).ok_or(Error::UnsupportedStem(q))
    }

    /// Supply `pi_q^s` for `q` beyond the built-in range. Only finitely
    /// generated exact groups are accepted.
    pub fn with_stem(mut self, q: usize, group: AbGroupDescriptor) -> Result<Self> {
        if q == 0 && group != AbGroupDescriptor::z() {
            return Err(Error::WitnessFailure("pi_0^s is Z".into()));
        }
        if !group.is_exact() || group.torsion_list().is_none() || group.free_rank() == Rank::CountablyInfinite {
            return Err(Error::WitnessFailure("stems must be finitely generated".into()));
        }
        self.stems.insert(q, group);
        Ok(self)
    }
}

/// Cyclic summands of a finitely generated group, as coefficient modules.
fn coefficient_summands(g: &AbGroupDescriptor) -> Vec<Coefficients> {
    let free = match g.free_rank() {
        Rank::Finite(k) => k as usize,
        Rank::CountablyInfinite => unreachable!("stems are finitely generated"),
    };
    let mut out = vec![Coefficients::Integers; free];
    out.extend(g.torsion_list().expect("finite multiplicities").into_iter().map(Coefficients::ModM));
    out
}

/// `H_p(Z/w; A)` for a finitely generated trivial module `A`.
pub fn homology_with(w: u64, coeff: &AbGroupDescriptor, p: usize) -> AbGroupDescriptor {
    coefficient_summands(coeff)
        .into_iter()
        .fold(AbGroupDescriptor::trivial(), |acc, c| acc.direct_sum(&cyclic_homology(w, c, p)))
}

/// The grid `E^2_{p,q}` for `0 <= p <= pmax`, `0 <= q <= qmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralPage {
    pub w: u64,
    pub pmax: usize,
    pub qmax: usize,
    grid: BTreeMap<(usize, usize), AbGroupDescriptor>,
}

/// `Z` rather than `Z^1` for table cells.
pub fn compact(g: &AbGroupDescriptor) -> String {
    g.to_string().split(" + ").map(|t| if t == "Z^1" { "Z" } else { t }).collect::<Vec<_>>().join(" + ")
}

impl SpectralPage {
    pub fn get(&self, p: usize, q: usize) -> Option<&AbGroupDescriptor> {
        self.grid.get(&(p, q))
    }

    /// Product of the orders of `E^2_{p,q}` with `p + q = n`, an upper bound
    /// for the order of the abutment when all of them are finite.
    pub fn diagonal_order(&self, n: usize) -> Option<u128> {
        (0..=n.min(self.pmax))
            .filter(|&p| n - p <= self.qmax)
            .map(|p| self.grid[&(p, n - p)].order())
            .try_fold(1u128, |acc, o| o.map(|o| acc * o))
    }

    /// Rows from `q = qmax` down to `0`, as in the usual display.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| q \\ p |");
        for p in 0..=self.pmax {
            write!(out, " {p} |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.pmax + 1));
        out.push('\n');
        for q in (0..=self.qmax).rev() {
            write!(out, "| {q} |").unwrap();
            for p in 0..=self.pmax {
                write!(out, " {} |", compact(&self.grid[&(p, q)])).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..=self.qmax)
            .map(|q| Value::Array((0..=self.pmax).map(|p| Value::String(self.grid[&(p, q)].to_string())).collect()))
            .collect();
        json!({ "w": self.w, "pmax": self.pmax, "qmax": self.qmax, "rows": rows })
    }
}

pub fn ah_e2_page(w: u64, pmax: usize, qmax: usize) -> Result<SpectralPage> {
    ah_e2_page_with(&StableStemTable::default(), w, pmax, qmax)
}

/// `E^2_{p,q} = H_p(mu_F; pi_q^s)` with `mu_F` cyclic of order `w`.
pub fn ah_e2_page_with(stems: &StableStemTable, w: u64, pmax: usize, qmax: usize) -> Result<SpectralPage> {
    if qmax > stems.qmax() {
        return Err(Error::UnsupportedStem(qmax));
    }
    let mut grid = BTreeMap::new();
    for q in 0..=qmax {
        let stem = stems.get(q)?;
        for p in 0..=pmax {
            grid.insert((p, q), homology_with(w, stem, p));
        }
    }
    Ok(SpectralPage { w, pmax, qmax, grid })
}

pub const K2_NOTE: &str = "finite; filtered by subquotients of Z/2 and Z/w'";

/// `pi_i^s(B mu_F+) + sum_S pi_{i-1}^s`. Degrees 0 and 1 are exact; in degree
/// 2 the finite part is only bounded by the `E^2` page.
pub fn wedge_decompose(i: usize, w: u64, s: Rank) -> Result<AbGroupDescriptor> {
    if i > 2 {
        return Err(Error::UnsupportedDegree(i));
    }
    let stems = StableStemTable::default();
    let copies = |g: &AbGroupDescriptor| -> AbGroupDescriptor {
        match s {
            Rank::Finite(k) => (0..k).fold(AbGroupDescriptor::trivial(), |acc, _| acc.direct_sum(g)),
            Rank::CountablyInfinite => {
                let mut out = AbGroupDescriptor::free(if g.free_rank().is_zero() { Rank::Finite(0) } else { Rank::CountablyInfinite });
                for &q in g.torsion().keys() {
                    out = out.direct_sum(&AbGroupDescriptor::cyclic_power(q, Rank::CountablyInfinite));
                }
                out
            }
        }
    };
    let circles = if i == 0 { AbGroupDescriptor::trivial() } else { copies(stems.get(i - 1)?) };
    let page = ah_e2_page_with(&stems, w, i, i)?;
    let point = match i {
        0 => AbGroupDescriptor::z(),
        // the basepoint splits off pi_1^s and the only other term is H_1
        1 => page.get(0, 1).unwrap().direct_sum(page.get(1, 0).unwrap()),
        _ => {
            let bound = page.diagonal_order(2).expect("positive stems are finite") as u64;
            AbGroupDescriptor::trivial()
                .with_qualifier(Qualifier::BoundOnly { note: K2_NOTE.into(), max_extra_order: bound })
        }
    };
    Ok(point.direct_sum(&circles))
}

/// `K_i` of the valuation ring of `field` at its distinguished embedding.
pub fn k_group(field: &FieldDescriptor, i: usize) -> Result<AbGroupDescriptor> {
    if i > 2 {
        return Err(Error::UnsupportedDegree(i));
    }
    let e = unit_group_structure(field);
    wedge_decompose(i, e.w, e.rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(m: u64) -> AbGroupDescriptor {
        AbGroupDescriptor::cyclic(m)
    }

    #[test]
    fn unit_groups() {
        let q = unit_group_structure(&FieldDescriptor::Rationals);
        assert_eq!((q.w, q.rank), (2, Rank::Finite(0)));
        let g = unit_group_structure(&FieldDescriptor::Gaussian);
        assert_eq!((g.w, g.rank), (4, Rank::CountablyInfinite));
        let r = unit_group_structure(&FieldDescriptor::real_quadratic(2, 1).unwrap());
        assert_eq!((r.w, r.rank), (2, Rank::Finite(0)));
        assert_eq!(g.descriptor().to_string(), "Z^w + Z/4");
    }

    #[test]
    fn cyclic_homology_values() {
        use Coefficients::*;
        assert_eq!(cyclic_homology(2, Integers, 0), AbGroupDescriptor::z());
        assert_eq!(cyclic_homology(2, Integers, 1), cyc(2));
        assert_eq!(cyclic_homology(6, Integers, 2), AbGroupDescriptor::trivial());
        assert_eq!(cyclic_homology(6, Integers, 3), cyc(6));
        assert_eq!(cyclic_homology(4, ModM(2), 2), cyc(2));
        assert_eq!(cyclic_homology(3, ModM(2), 1), AbGroupDescriptor::trivial());
        assert_eq!(cyclic_homology(12, ModM(8), 0), cyc(8));
        assert_eq!(cyclic_homology(12, ModM(8), 5), cyc(4));
    }

    #[test]
    fn e2_page() {
        let page = ah_e2_page(2, 2, 2).unwrap();
        let row = |q| (0..3).map(|p| page.get(p, q).unwrap().clone()).collect::<Vec<_>>();
        assert_eq!(row(0), vec![AbGroupDescriptor::z(), cyc(2), AbGroupDescriptor::trivial()]);
        assert_eq!(row(1), vec![cyc(2), cyc(2), cyc(2)]);
        assert_eq!(row(2), vec![cyc(2), cyc(2), cyc(2)]);
        assert_eq!(ah_e2_page(4, 2, 2).unwrap().get(2, 2), Some(&cyc(2)));
        assert_eq!(ah_e2_page(3, 2, 2).unwrap().get(1, 1), Some(&AbGroupDescriptor::trivial()));
        assert_eq!(ah_e2_page(2, 2, 3), Err(Error::UnsupportedStem(3)));
        let md = page.to_markdown();
        assert!(md.contains("| 0 | Z | Z/2 | 0 |"), "{md}");
        assert_eq!(compact(&AbGroupDescriptor::free(Rank::Finite(10))), "Z^10");
        assert_eq!(compact(&AbGroupDescriptor::from_invariants(1, &[2])), "Z + Z/2");
        assert!(md.contains("| 2 | Z/2 | Z/2 | Z/2 |"), "{md}");
    }

    #[test]
    fn extended_stems() {
        let stems = StableStemTable::default().with_stem(3, cyc(24)).unwrap();
        let page = ah_e2_page_with(&stems, 2, 1, 3).unwrap();
        assert_eq!(page.get(0, 3), Some(&cyc(24)));
        assert_eq!(page.get(1, 3), Some(&cyc(2)));
    }

    #[test]
    fn k_groups() {
        assert_eq!(k_group(&FieldDescriptor::Rationals, 0).unwrap(), AbGroupDescriptor::z());
        let k1 = k_group(&FieldDescriptor::Rationals, 1).unwrap();
        assert_eq!(k1, cyc(2).direct_sum(&cyc(2)));
        assert_eq!(k1.order(), Some(4));
        let k1i = k_group(&FieldDescriptor::Gaussian, 1).unwrap();
        assert_eq!(k1i.to_string(), "Z^w + Z/2 + Z/4");
        let k2 = k_group(&FieldDescriptor::Rationals, 2).unwrap();
        assert_eq!(k2.to_string(), "[bound] G(|G|<=4)");
        let k2i = k_group(&FieldDescriptor::Gaussian, 2).unwrap();
        assert_eq!(k2i.to_string(), "[bound] G(|G|<=4) + (Z/2)^w");
        assert_eq!(k_group(&FieldDescriptor::Rationals, 3), Err(Error::UnsupportedDegree(3)));
    }

    #[test]
    fn wedges() {
        assert_eq!(wedge_decompose(1, 2, Rank::Finite(0)).unwrap(), cyc(2).direct_sum(&cyc(2)));
        assert_eq!(wedge_decompose(1, 4, Rank::Finite(1)).unwrap().to_string(), "Z^1 + Z/2 + Z/4");
        assert_eq!(wedge_decompose(2, 3, Rank::Finite(2)).unwrap().to_string(), "[bound] G(|G|<=2) + Z/2 + Z/2");
        assert_eq!(wedge_decompose(3, 2, Rank::Finite(0)), Err(Error::UnsupportedDegree(3)));
    }
}
