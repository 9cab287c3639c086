//! Isomorphism and isotopy classification of semifield tables.
//!
//! Two routes to isomorphism are provided. [`canonical_form`] computes the
//! smallest structure-constant code over all generating sequences and is
//! used for bulk grouping; [`isomorphisms`] extends partial maps along a
//! generating sequence of the first table and never looks at canonical codes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binmat::{BitMatrix, MAX_DIM};
use crate::error::{Error, Result};
use crate::semifield::{
    left_power_period, nuclei_and_center, presemifield_to_semifield, primitivity_class,
    right_power_period, Perm3, Primitivity, SemifieldTable,
};

#[inline]
fn span_with(span: u64, v: u8) -> u64 {
    let mut out = span;
    let mut rest = span;
    while rest != 0 {
        let s = rest.trailing_zeros() as u8;
        rest &= rest - 1;
        out |= 1u64 << (s ^ v);
    }
    out
}

/// An ordered linearly independent list closed step by step under products.
#[derive(Clone, Copy)]
struct Closure {
    basis: [u8; MAX_DIM],
    len: usize,
    span: u64,
    processed: usize,
}

impl Closure {
    fn new(t: &SemifieldTable) -> Self {
        let mut c = Closure {
            basis: [0; MAX_DIM],
            len: 0,
            span: 1,
            processed: 0,
        };
        c.push(t.identity());
        c.close(t);
        c
    }

    #[inline]
    fn push(&mut self, v: u8) {
        self.basis[self.len] = v;
        self.len += 1;
        self.span = span_with(self.span, v);
    }

    #[inline]
    fn contains(&self, v: u8) -> bool {
        self.span >> v & 1 == 1
    }

    /// Adds products `b_i b_k` and `b_k b_i` (`i <= k`) in index order until closed.
    fn close(&mut self, t: &SemifieldTable) {
        while self.processed < self.len {
            let k = self.processed;
            for i in 0..=k {
                for (a, b) in [
                    (self.basis[i], self.basis[k]),
                    (self.basis[k], self.basis[i]),
                ] {
                    let p = t.mul(a, b);
                    if !self.contains(p) {
                        self.push(p);
                    }
                }
            }
            self.processed += 1;
        }
    }
}

/// Structure constants of a semifield in an ordered basis: entry `i*d + j`
/// holds the coordinates of `b_i b_j`. The code is prefixed by the power
/// periods of the successive generators, padded with zeros.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsoCode {
    dim: u8,
    keys: [(u8, u8); MAX_DIM],
    entries: [u8; MAX_DIM * MAX_DIM],
}

impl fmt::Debug for IsoCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim as usize;
        write!(f, "IsoCode(")?;
        for k in self.keys.iter().take_while(|k| k.0 != 0) {
            write!(f, "{}.{}:", k.0, k.1)?;
        }
        for e in &self.entries[..d * d] {
            write!(f, "{e:02x}")?;
        }
        write!(f, ")")
    }
}

impl IsoCode {
    /// Semifield with these structure constants in the standard coordinates.
    pub fn table(&self) -> SemifieldTable {
        let d = self.dim as usize;
        let cube = crate::semifield::Cube::from_bilinear(d, |x, y| {
            self.entries[x.trailing_zeros() as usize * d + y.trailing_zeros() as usize]
        });
        presemifield_to_semifield(&cube).expect("code of a semifield")
    }
}

/// Canonical form of a semifield table up to isomorphism, with every basis
/// realising it. Two tables are isomorphic iff their codes are equal, and the
/// number of bases is `|Aut|`.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub code: IsoCode,
    pub bases: Vec<[u8; MAX_DIM]>,
}

impl Canonical {
    pub fn aut_order(&self) -> usize {
        self.bases.len()
    }

    fn basis_matrix(&self, k: usize) -> BitMatrix {
        let d = self.code.dim as usize;
        BitMatrix::from_columns(d, &self.bases[k][..d])
    }
}

type Keys = [(u8, u8); MAX_DIM];

struct CanonSearch<'a> {
    t: &'a SemifieldTable,
    periods: Vec<(u8, u8)>,
    best: Option<IsoCode>,
    bases: Vec<[u8; MAX_DIM]>,
}

impl CanonSearch<'_> {
    fn leaf(&mut self, keys: &Keys, basis: &[u8; MAX_DIM]) {
        let t = self.t;
        let d = t.dim();
        let inv = BitMatrix::from_columns(d, &basis[..d])
            .inverse()
            .expect("basis is independent");
        let mut entries = [0u8; MAX_DIM * MAX_DIM];
        // 0: still equal to best, 1: already smaller.
        let mut state = match &self.best {
            None => 1,
            Some(b) if *keys < b.keys => 1,
            Some(b) if *keys > b.keys => return,
            _ => 0,
        };
        for i in 0..d {
            for j in 0..d {
                let e = inv.apply(t.mul(basis[i], basis[j]));
                let k = i * d + j;
                entries[k] = e;
                if state == 0 {
                    let b = self.best.as_ref().expect("set").entries[k];
                    if e > b {
                        return;
                    }
                    if e < b {
                        state = 1;
                    }
                }
            }
        }
        if state == 0 {
            self.bases.push(*basis);
        } else {
            self.best = Some(IsoCode {
                dim: d as u8,
                keys: *keys,
                entries,
            });
            self.bases.clear();
            self.bases.push(*basis);
        }
    }

    fn descend(&mut self, mut keys: Keys, level: usize, state: Closure) {
        let t = self.t;
        if state.len == t.dim() {
            self.leaf(&keys, &state.basis);
            return;
        }
        let key = (0..t.order())
            .filter(|&g| !state.contains(g as u8))
            .map(|g| self.periods[g])
            .min()
            .expect("span is not full");
        keys[level] = key;
        if let Some(b) = &self.best {
            if keys[..=level] > b.keys[..=level] {
                return;
            }
        }
        for g in 1..t.order() as u8 {
            if state.contains(g) || self.periods[g as usize] != key {
                continue;
            }
            let mut next = state;
            next.push(g);
            next.close(t);
            self.descend(keys, level + 1, next);
        }
    }
}

/// Minimum code over all generating sequences closed under products from the
/// identity. At each step only generators of least power periods outside the
/// current closure are tried.
pub fn canonical_form(t: &SemifieldTable) -> Canonical {
    let q = t.order() as u8;
    let periods: Vec<(u8, u8)> = (0..q)
        .map(|g| {
            (
                right_power_period(t, g) as u8,
                left_power_period(t, g) as u8,
            )
        })
        .collect();
    let mut search = CanonSearch {
        t,
        periods,
        best: None,
        bases: Vec::new(),
    };
    search.descend([(0, 0); MAX_DIM], 0, Closure::new(t));
    Canonical {
        code: search.best.expect("at least one generating sequence"),
        bases: search.bases,
    }
}

/// An isomorphism `F` with `F(xy) = F(x)F(y)`, as a matrix on coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IsoMap(pub BitMatrix);

impl IsoMap {
    pub fn verify(&self, t1: &SemifieldTable, t2: &SemifieldTable) -> bool {
        let q = t1.order() as u8;
        self.0.apply(t1.identity()) == t2.identity()
            && (0..q).all(|x| {
                (0..q)
                    .all(|y| self.0.apply(t1.mul(x, y)) == t2.mul(self.0.apply(x), self.0.apply(y)))
            })
    }
}

#[derive(Clone, Copy)]
struct PartialMap {
    map: [u8; 64],
    dom: u64,
    img: u64,
    dom_basis: [u8; MAX_DIM],
    len: usize,
}

impl PartialMap {
    fn new() -> Self {
        PartialMap {
            map: [0; 64],
            dom: 1,
            img: 1,
            dom_basis: [0; MAX_DIM],
            len: 0,
        }
    }

    /// Adds `x ↦ y` and everything forced by additivity and multiplicativity.
    fn extend(&mut self, t1: &SemifieldTable, t2: &SemifieldTable, x: u8, y: u8) -> bool {
        let mut queue = vec![(x, y)];
        while let Some((x, y)) = queue.pop() {
            if self.dom >> x & 1 == 1 {
                if self.map[x as usize] != y {
                    return false;
                }
                continue;
            }
            if self.img >> y & 1 == 1 {
                return false;
            }
            let mut rest = self.dom;
            while rest != 0 {
                let s = rest.trailing_zeros() as u8;
                rest &= rest - 1;
                self.map[(s ^ x) as usize] = self.map[s as usize] ^ y;
            }
            self.dom = span_with(self.dom, x);
            self.img = span_with(self.img, y);
            self.dom_basis[self.len] = x;
            self.len += 1;
            for i in 0..self.len {
                let b = self.dom_basis[i];
                let fb = self.map[b as usize];
                queue.push((t1.mul(b, x), t2.mul(fb, y)));
                queue.push((t1.mul(x, b), t2.mul(y, fb)));
            }
        }
        true
    }
}

fn element_invariants(t: &SemifieldTable) -> Vec<(usize, usize)> {
    (0..t.order() as u8)
        .map(|a| (right_power_period(t, a), left_power_period(t, a)))
        .collect()
}

/// All isomorphisms `t1 → t2`.
pub fn isomorphisms(t1: &SemifieldTable, t2: &SemifieldTable) -> Vec<IsoMap> {
    if t1.dim() != t2.dim() {
        return Vec::new();
    }
    let inv1 = element_invariants(t1);
    let inv2 = element_invariants(t2);
    let mut start = PartialMap::new();
    if !start.extend(t1, t2, t1.identity(), t2.identity()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    iso_rec(t1, t2, &inv1, &inv2, start, &mut out);
    out
}

fn iso_rec(
    t1: &SemifieldTable,
    t2: &SemifieldTable,
    inv1: &[(usize, usize)],
    inv2: &[(usize, usize)],
    state: PartialMap,
    out: &mut Vec<IsoMap>,
) {
    let d = t1.dim();
    if state.len == d {
        let m = IsoMap(BitMatrix::from_images(d, |v| state.map[v as usize]));
        debug_assert!(m.verify(t1, t2));
        out.push(m);
        return;
    }
    let g = (1..t1.order() as u8)
        .find(|&g| state.dom >> g & 1 == 0)
        .expect("domain not full");
    for h in 1..t2.order() as u8 {
        if state.img >> h & 1 == 1 || inv1[g as usize] != inv2[h as usize] {
            continue;
        }
        let mut next = state;
        if next.extend(t1, t2, g, h) {
            iso_rec(t1, t2, inv1, inv2, next, out);
        }
    }
}

/// Principal isotope: `x ∘ y = r·s` with `r·b = x` and `a·s = y`; identity `a·b`.
pub fn principal_isotope(t: &SemifieldTable, a: u8, b: u8) -> Result<SemifieldTable> {
    if a == 0 || b == 0 {
        return Err(Error::ZeroElement);
    }
    Ok(principal_isotope_unchecked(t, a, b))
}

fn principal_isotope_unchecked(t: &SemifieldTable, a: u8, b: u8) -> SemifieldTable {
    let q = t.order();
    let d = t.dim();
    let r_inv = t.right_mul_matrix(b).inverse().expect("nonzero b");
    let l_inv = t.left_mul_matrix(a).inverse().expect("nonzero a");
    let rs: Vec<usize> = (0..q as u8)
        .map(|x| (r_inv.apply(x) as usize) << d)
        .collect();
    let ls: Vec<usize> = (0..q as u8).map(|y| l_inv.apply(y) as usize).collect();
    let base = t.products();
    let mut prod = vec![0u8; q * q];
    for x in 0..q {
        let row = &mut prod[x * q..(x + 1) * q];
        for (y, slot) in row.iter_mut().enumerate() {
            *slot = base[rs[x] | ls[y]];
        }
    }
    SemifieldTable::from_products_unchecked(d, prod, t.mul(a, b))
}

/// `(F, G, H)` with `H(xy) = F(x) G(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IsotopyTriple {
    pub f: BitMatrix,
    pub g: BitMatrix,
    pub h: BitMatrix,
}

pub type AutotopyTriple = IsotopyTriple;

impl IsotopyTriple {
    pub fn identity(dim: usize) -> Self {
        let i = BitMatrix::identity(dim);
        IsotopyTriple { f: i, g: i, h: i }
    }

    /// Checks `H(xy) = F(x)G(y)` on all pairs, products taken in `t1` and `t2`.
    pub fn verify(&self, t1: &SemifieldTable, t2: &SemifieldTable) -> bool {
        let q = t1.order() as u8;
        let fs: Vec<u8> = (0..q).map(|x| self.f.apply(x)).collect();
        let gs: Vec<u8> = (0..q).map(|x| self.g.apply(x)).collect();
        (0..q).all(|x| {
            (0..q).all(|y| self.h.apply(t1.mul(x, y)) == t2.mul(fs[x as usize], gs[y as usize]))
        })
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &IsotopyTriple) -> IsotopyTriple {
        IsotopyTriple {
            f: self.f * other.f,
            g: self.g * other.g,
            h: self.h * other.h,
        }
    }

    pub fn inverse(&self) -> IsotopyTriple {
        IsotopyTriple {
            f: self.f.inverse().expect("bijective"),
            g: self.g.inverse().expect("bijective"),
            h: self.h.inverse().expect("bijective"),
        }
    }
}

/// Canonical codes of all `(q-1)^2` principal isotopes of one table.
#[derive(Clone, Debug)]
pub struct IsotopeSurvey {
    /// Class code → (|Aut|, number of pairs `(a, b)` giving it).
    pub classes: HashMap<IsoCode, (usize, usize)>,
    /// Smallest class code: a complete invariant of the plane.
    pub plane_code: IsoCode,
}

pub fn survey_isotopes(t: &SemifieldTable) -> IsotopeSurvey {
    let q = t.order() as u8;
    let pairs: Vec<(u8, u8)> = (1..q).flat_map(|a| (1..q).map(move |b| (a, b))).collect();
    let canon: Vec<(IsoCode, usize)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let c = canonical_form(&principal_isotope_unchecked(t, a, b));
            (c.code, c.aut_order())
        })
        .collect();
    let mut classes: HashMap<IsoCode, (usize, usize)> = HashMap::new();
    for (code, aut) in canon {
        classes.entry(code).or_insert((aut, 0)).1 += 1;
    }
    let plane_code = *classes.keys().min().expect("nonempty");
    IsotopeSurvey {
        classes,
        plane_code,
    }
}

/// Smallest canonical code among the principal isotopes; equal iff isotopic.
pub fn plane_code(t: &SemifieldTable) -> IsoCode {
    survey_isotopes(t).plane_code
}

/// Isomorphism classes among the principal isotopes grouped by `|Aut|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaDecomposition {
    /// `(count, |Aut|)` pairs, ascending in `|Aut|`.
    pub terms: Vec<(u32, u32)>,
    pub at_order: u64,
}

impl SaDecomposition {
    pub fn sum(&self) -> Ratio<u64> {
        self.terms
            .iter()
            .map(|&(n, k)| Ratio::new(n as u64, k as u64))
            .sum()
    }

    pub fn class_count(&self) -> u64 {
        self.terms.iter().map(|&(n, _)| n as u64).sum()
    }

    /// `(q-1)^2 = |At| · Σ count/|Aut|` in exact arithmetic.
    pub fn identity_holds(&self, order: u64) -> bool {
        let lhs = Ratio::from_integer((order - 1) * (order - 1));
        lhs == Ratio::from_integer(self.at_order) * self.sum()
    }

    pub fn parse(s: &str) -> Option<SaDecomposition> {
        let mut terms = Vec::new();
        for part in s.split('+') {
            let (n, k) = part.trim().split_once('/')?;
            terms.push((n.trim().parse().ok()?, k.trim().parse().ok()?));
        }
        terms.sort_by_key(|&(_, k)| k);
        let sum: Ratio<u64> = terms
            .iter()
            .map(|&(n, k): &(u32, u32)| Ratio::new(n as u64, k as u64))
            .sum();
        let at = Ratio::from_integer(3969u64) / sum;
        Some(SaDecomposition {
            terms,
            at_order: if at.is_integer() { at.to_integer() } else { 0 },
        })
    }
}

impl fmt::Display for SaDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(n, k)| format!("{n}/{k}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl IsotopeSurvey {
    pub fn sa_decomposition(&self, order: usize) -> Result<SaDecomposition> {
        let mut by_aut: BTreeMap<u32, u32> = BTreeMap::new();
        let mut at: Option<usize> = None;
        for &(aut, count) in self.classes.values() {
            *by_aut.entry(aut as u32).or_default() += 1;
            let this = aut * count;
            match at {
                None => at = Some(this),
                Some(prev) if prev != this => {
                    return Err(Error::Consistency(format!(
                        "orbit sizes disagree: {prev} vs {this}"
                    )))
                }
                _ => {}
            }
        }
        let terms: Vec<(u32, u32)> = by_aut.into_iter().map(|(k, n)| (n, k)).collect();
        let sum: Ratio<u64> = terms
            .iter()
            .map(|&(n, k)| Ratio::new(n as u64, k as u64))
            .sum();
        let q1 = (order as u64 - 1).pow(2);
        let at_ratio = Ratio::from_integer(q1) / sum;
        if !at_ratio.is_integer() {
            return Err(Error::Consistency(format!(
                "non-integral |At| = {at_ratio}"
            )));
        }
        let at_order = at_ratio.to_integer();
        if at != Some(at_order as usize) {
            return Err(Error::Consistency(format!(
                "|At| from S/A sum {at_order} disagrees with orbit count {at:?}"
            )));
        }
        Ok(SaDecomposition { terms, at_order })
    }
}

pub fn sa_decomposition(t: &SemifieldTable) -> Result<SaDecomposition> {
    survey_isotopes(t).sa_decomposition(t.order())
}

/// The autotopy group as `{(φ R_b, φ L_a, φ)}` over pairs `(a, b)` and
/// isomorphisms `φ` from the principal isotope `(a, b)` onto `t`.
pub fn autotopy_group(t: &SemifieldTable) -> Vec<AutotopyTriple> {
    let q = t.order() as u8;
    let d = t.dim();
    let target = canonical_form(t);
    let target_mats: Vec<BitMatrix> = (0..target.bases.len())
        .map(|k| target.basis_matrix(k))
        .collect();
    let pairs: Vec<(u8, u8)> = (1..q).flat_map(|a| (1..q).map(move |b| (a, b))).collect();
    pairs
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            let iso = principal_isotope_unchecked(t, a, b);
            let c = canonical_form(&iso);
            let mut out = Vec::new();
            if c.code == target.code {
                let src_inv = c.basis_matrix(0).inverse().expect("basis");
                let r_b = t.right_mul_matrix(b);
                let l_a = t.left_mul_matrix(a);
                for m in &target_mats {
                    let phi = *m * src_inv;
                    out.push(IsotopyTriple {
                        f: phi * r_b,
                        g: phi * l_a,
                        h: phi,
                    });
                }
            }
            debug_assert!(out.iter().all(|tr| tr.verify(t, t)) || d == 0);
            out
        })
        .collect()
}

/// An isotopy `t1 → t2`, if one exists.
pub fn is_isotopic(t1: &SemifieldTable, t2: &SemifieldTable) -> Option<IsotopyTriple> {
    if t1.dim() != t2.dim() {
        return None;
    }
    let z1 = nuclei_and_center(t1).0;
    let z2 = nuclei_and_center(t2).0;
    if z1[2..] != z2[2..] {
        return None;
    }
    let q = t1.order() as u8;
    let target = canonical_form(t2);
    let target_basis = target.basis_matrix(0);
    for a in 1..q {
        for b in 1..q {
            let iso = principal_isotope_unchecked(t1, a, b);
            let c = canonical_form(&iso);
            if c.code != target.code {
                continue;
            }
            let phi = target_basis * c.basis_matrix(0).inverse().expect("basis");
            let triple = IsotopyTriple {
                f: phi * t1.right_mul_matrix(b),
                g: phi * t1.left_mul_matrix(a),
                h: phi,
            };
            if triple.verify(t1, t2) {
                return Some(triple);
            }
        }
    }
    None
}

/// Orbit structure of one line of the fundamental triangle: `(count, length)`
/// pairs, ascending by length.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitProfile(pub Vec<(u32, u32)>);

impl OrbitProfile {
    pub fn from_lengths(lengths: impl IntoIterator<Item = u32>) -> Self {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for l in lengths {
            *counts.entry(l).or_default() += 1;
        }
        OrbitProfile(counts.into_iter().map(|(l, n)| (n, l)).collect())
    }

    pub fn total_points(&self) -> u32 {
        self.0.iter().map(|&(n, l)| n * l).sum()
    }
}

impl fmt::Display for OrbitProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(n, l)| format!("{n}[{l}]")).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for OrbitProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 0,
            msg: format!("bad orbit profile {s:?}"),
        };
        let mut pairs = Vec::new();
        for part in s.split('+') {
            let part = part.trim();
            let (n, rest) = part.split_once('[').ok_or_else(bad)?;
            let l = rest.strip_suffix(']').ok_or_else(bad)?;
            pairs.push((
                n.trim().parse().map_err(|_| bad())?,
                l.trim().parse().map_err(|_| bad())?,
            ));
        }
        pairs.sort_by_key(|&(_, l)| l);
        Ok(OrbitProfile(pairs))
    }
}

impl Serialize for OrbitProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[u32; 2]> = self.0.iter().map(|&(n, l)| [n, l]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrbitProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[u32; 2]> = Vec::deserialize(d)?;
        Ok(OrbitProfile(
            pairs.into_iter().map(|[n, l]| (n, l)).collect(),
        ))
    }
}

/// Which component of an autotopy acts on which triangle line, in the
/// reported order `(L_x, L_∞, L_y)`: 0 = F, 1 = G, 2 = H.
pub const LINE_COMPONENTS: [usize; 3] = [1, 0, 2];

/// Orbit profiles of the autotopy group on the three lines of the
/// fundamental triangle. Each line contributes its `q` affine points acted on
/// by one component, plus one fixed vertex.
pub fn triangle_orbits(dim: usize, group: &[AutotopyTriple]) -> [OrbitProfile; 3] {
    LINE_COMPONENTS.map(|comp| {
        let maps: Vec<BitMatrix> = group
            .iter()
            .map(|tr| match comp {
                0 => tr.f,
                1 => tr.g,
                _ => tr.h,
            })
            .collect();
        let mut lengths = component_orbit_lengths(dim, &maps);
        lengths.push(1);
        OrbitProfile::from_lengths(lengths)
    })
}

fn component_orbit_lengths(dim: usize, maps: &[BitMatrix]) -> Vec<u32> {
    let q = 1usize << dim;
    let mut distinct: Vec<BitMatrix> = maps.to_vec();
    distinct.sort_by_key(|m| m.packed());
    distinct.dedup();
    let mut seen = vec![false; q];
    let mut lengths = Vec::new();
    for start in 0..q {
        if seen[start] {
            continue;
        }
        let mut orbit = 0u64;
        for m in &distinct {
            orbit |= 1 << m.apply(start as u8);
        }
        orbit |= 1 << start;
        let mut rest = orbit;
        while rest != 0 {
            seen[rest.trailing_zeros() as usize] = true;
            rest &= rest - 1;
        }
        lengths.push(orbit.count_ones());
    }
    lengths
}

/// Partition of the six `σ`-transforms of a semifield into planes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hexagon {
    /// Blocks of permutations whose transforms are isotopic; each block and
    /// the block list are in `Perm3::ALL` order.
    pub blocks: Vec<Vec<Perm3>>,
    /// Plane code of each transform, in `Perm3::ALL` order.
    pub plane_codes: [IsoCode; 6],
}

impl Hexagon {
    pub fn distinct_planes(&self) -> usize {
        self.blocks.len()
    }

    pub fn same_plane(&self, a: Perm3, b: Perm3) -> bool {
        self.blocks
            .iter()
            .any(|blk| blk.contains(&a) && blk.contains(&b))
    }

    pub fn names(&self) -> Vec<Vec<String>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|p| p.name().to_string()).collect())
            .collect()
    }
}

/// Semifield coordinatizing the `σ`-transform of `t`'s plane.
pub fn transform(t: &SemifieldTable, sigma: Perm3) -> SemifieldTable {
    presemifield_to_semifield(&t.cube().apply_permutation(sigma))
        .expect("permuted cube of a semifield has no zero divisors")
}

pub fn s3_class(t: &SemifieldTable) -> Hexagon {
    let codes: Vec<IsoCode> = Perm3::ALL
        .iter()
        .map(|&s| plane_code(&transform(t, s)))
        .collect();
    hexagon_from_codes(codes.try_into().expect("six codes"))
}

fn hexagon_from_codes(plane_codes: [IsoCode; 6]) -> Hexagon {
    let mut blocks: Vec<(IsoCode, Vec<Perm3>)> = Vec::new();
    for (k, code) in plane_codes.iter().enumerate() {
        match blocks.iter_mut().find(|(c, _)| c == code) {
            Some((_, b)) => b.push(Perm3::ALL[k]),
            None => blocks.push((*code, vec![Perm3::ALL[k]])),
        }
    }
    Hexagon {
        blocks: blocks.into_iter().map(|(_, b)| b).collect(),
        plane_codes,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub plane: String,
    pub at_order: u64,
    pub orbits: [OrbitProfile; 3],
    pub sa: Vec<[u32; 2]>,
    pub zn: [u32; 5],
    pub primitivity: Primitivity,
    pub hexagon: Vec<Vec<String>>,
}

/// Everything computed for one representative; `record` is the serialisable part.
#[derive(Clone, Debug)]
pub struct Classification {
    pub record: ClassRecord,
    pub sa: SaDecomposition,
    pub hexagon: Hexagon,
    pub group: Vec<AutotopyTriple>,
    /// `|Aut|` of the representative itself.
    pub aut_order: usize,
    /// Whether some principal isotope has a primitive element.
    pub plane_has_primitive: bool,
    /// Isomorphism classes per distinct plane of the hexagon.
    pub plane_class_counts: Vec<u64>,
}

pub fn classify_representative(label: &str, t: &SemifieldTable) -> Result<Classification> {
    let survey = survey_isotopes(t);
    let sa = survey.sa_decomposition(t.order())?;
    let group = autotopy_group(t);
    if group.len() as u64 != sa.at_order {
        return Err(Error::Consistency(format!(
            "autotopy group has {} elements, S/A sum gives {}",
            group.len(),
            sa.at_order
        )));
    }
    let orbits = triangle_orbits(t.dim(), &group);
    let zn = nuclei_and_center(t);
    let primitivity = primitivity_class(t);
    let plane_has_primitive = primitivity.has_primitive() || isotope_has_primitive(t);

    let mut plane_codes = Vec::with_capacity(6);
    let mut class_counts: HashMap<IsoCode, u64> = HashMap::new();
    for &sigma in Perm3::ALL.iter() {
        if sigma == Perm3::ID {
            plane_codes.push(survey.plane_code);
            class_counts.insert(survey.plane_code, survey.classes.len() as u64);
            continue;
        }
        let s = survey_isotopes(&transform(t, sigma));
        class_counts.insert(s.plane_code, s.classes.len() as u64);
        plane_codes.push(s.plane_code);
    }
    let hexagon = hexagon_from_codes(plane_codes.try_into().expect("six"));
    let plane_class_counts = hexagon
        .blocks
        .iter()
        .map(|b| {
            let k = Perm3::ALL.iter().position(|p| *p == b[0]).expect("member");
            class_counts[&hexagon.plane_codes[k]]
        })
        .collect();
    let aut_order = canonical_form(t).aut_order();
    let record = ClassRecord {
        plane: label.to_string(),
        at_order: sa.at_order,
        orbits,
        sa: sa.terms.iter().map(|&(n, k)| [n, k]).collect(),
        zn: zn.0,
        primitivity,
        hexagon: hexagon.names(),
    };
    Ok(Classification {
        record,
        sa,
        hexagon,
        group,
        aut_order,
        plane_has_primitive,
        plane_class_counts,
    })
}

/// True iff some principal isotope of `t` has a left or right primitive element.
pub fn isotope_has_primitive(t: &SemifieldTable) -> bool {
    let q = t.order() as u8;
    (1..q)
        .flat_map(|a| (1..q).map(move |b| (a, b)))
        .collect::<Vec<_>>()
        .par_iter()
        .any(|&(a, b)| primitivity_class(&principal_isotope_unchecked(t, a, b)).has_primitive())
}

/// Counts `(S3-classes, planes, isomorphism classes)` over a collection of
/// semifields, each contributing its whole hexagon. The last entry sums, over
/// S3-classes, the isomorphism classes of semifields coordinatizing the plane
/// with the least plane code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub s3_classes: u64,
    pub planes: u64,
    pub isomorphism_classes: u64,
}

/// Plane codes and isomorphism-class counts accumulated over many tables.
/// A table whose isomorphism class was met in an earlier survey is not
/// surveyed again.
#[derive(Clone, Debug, Default)]
pub struct PlaneCatalog {
    iso_to_plane: HashMap<IsoCode, IsoCode>,
    class_counts: BTreeMap<IsoCode, u64>,
    /// Least plane code of a hexagon → all plane codes of that hexagon.
    s3: BTreeMap<IsoCode, BTreeSet<IsoCode>>,
}

impl PlaneCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Plane code of `t`, surveying its principal isotopes if needed.
    pub fn plane_of(&mut self, t: &SemifieldTable) -> IsoCode {
        let code = canonical_form(t).code;
        if let Some(p) = self.iso_to_plane.get(&code) {
            return *p;
        }
        let s = survey_isotopes(t);
        for c in s.classes.keys() {
            self.iso_to_plane.insert(*c, s.plane_code);
        }
        self.class_counts
            .insert(s.plane_code, s.classes.len() as u64);
        s.plane_code
    }

    /// Records the whole hexagon of `t` and returns it.
    pub fn add_hexagon(&mut self, t: &SemifieldTable) -> Hexagon {
        let codes = Perm3::ALL.map(|s| self.plane_of(&transform(t, s)));
        let key = *codes.iter().min().expect("six");
        self.s3.entry(key).or_default().extend(codes);
        hexagon_from_codes(codes)
    }

    /// Every plane surveyed so far.
    pub fn planes(&self) -> BTreeSet<IsoCode> {
        self.class_counts.keys().copied().collect()
    }

    /// Least plane code of every recorded hexagon.
    pub fn s3_classes(&self) -> BTreeSet<IsoCode> {
        self.s3.keys().copied().collect()
    }

    /// Number of isomorphism classes of semifields coordinatizing `plane`.
    pub fn class_count(&self, plane: &IsoCode) -> Option<u64> {
        self.class_counts.get(plane).copied()
    }

    /// Counts over the recorded hexagons.
    pub fn summary(&self) -> ClassSummary {
        let planes: BTreeSet<IsoCode> = self.s3.values().flatten().copied().collect();
        ClassSummary {
            s3_classes: self.s3.len() as u64,
            planes: planes.len() as u64,
            isomorphism_classes: self.s3.keys().map(|k| self.class_counts[k]).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semifield::StandardBasis;

    fn gf16() -> SemifieldTable {
        // GF(16) via companion(x^4 + x + 1) on the basis 1, w, w^2, w^3.
        let c = crate::binmat::companion_from_mask(0b10011).unwrap();
        let mats: Vec<BitMatrix> = (0..4)
            .scan(BitMatrix::identity(4), |acc, _| {
                let m = *acc;
                *acc = *acc * c;
                Some(m)
            })
            .collect();
        StandardBasis::new(mats).unwrap().table()
    }

    #[test]
    fn span_closure() {
        assert_eq!(span_with(1, 2), 0b101);
        assert_eq!(span_with(0b11, 2), 0b1111);
        assert_eq!(span_with(0b1111, 4).count_ones(), 8);
    }

    #[test]
    fn field_of_order_16() {
        let t = gf16();
        let c = canonical_form(&t);
        assert_eq!(c.aut_order(), 4);
        assert_eq!(isomorphisms(&t, &t).len(), 4);
        let sa = sa_decomposition(&t).unwrap();
        assert_eq!(sa.terms, vec![(1, 4)]);
        assert_eq!(sa.at_order, 225 * 4);
        assert!(sa.identity_holds(16));
    }

    #[test]
    fn canonical_code_rebuilds_an_isomorphic_table() {
        let t = gf16();
        let c = canonical_form(&t);
        let rebuilt = c.code.table();
        assert_eq!(canonical_form(&rebuilt).code, c.code);
        assert_eq!(isomorphisms(&t, &rebuilt).len(), 4);
    }

    #[test]
    fn principal_isotope_rejects_zero() {
        assert!(matches!(
            principal_isotope(&gf16(), 0, 1),
            Err(Error::ZeroElement)
        ));
        let t = gf16();
        assert_eq!(principal_isotope(&t, 1, 1).unwrap(), t);
    }

    #[test]
    fn orbit_profile_text() {
        let p: OrbitProfile = "2[1]+21[3]".parse().unwrap();
        assert_eq!(p.0, vec![(2, 1), (21, 3)]);
        assert_eq!(p.total_points(), 65);
        assert_eq!(p.to_string(), "2[1]+21[3]");
        assert!("2[1]+x".parse::<OrbitProfile>().is_err());
    }

    #[test]
    fn sa_text() {
        let s = SaDecomposition::parse("92/1 + 2/2 + 4/3 + 1/6").unwrap();
        assert_eq!(s.at_order, 42);
        assert!(s.identity_holds(64));
        assert_eq!(s.to_string(), "92/1 + 2/2 + 4/3 + 1/6");
    }
}
