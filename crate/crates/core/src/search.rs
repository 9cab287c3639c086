//! Exhaustive search for standard bases.
//!
//! The pipeline fixes `A2` to a companion matrix, builds the candidate lists
//! for every first-column signature, keeps one canonical prefix
//! `(I, A2, A3)` per equivalence class and sieves the lists to complete each
//! prefix. [`oracle_search`] enumerates every standard basis of order at most
//! 16 directly and serves as ground truth.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binmat::{companion_from_mask, parse_tuple_line, BitMatrix, MAX_DIM};
use crate::error::{Error, Result};
use crate::semifield::check_standard_basis;

/// Multiplicative order of `x` modulo `poly`, or `None` if `x` is not a unit.
fn order_of_x(poly: u32) -> Option<u32> {
    let d = 31 - poly.leading_zeros();
    if poly & 1 == 0 {
        return None;
    }
    let mut v = 1u32;
    for k in 1..=(1u32 << d) {
        v <<= 1;
        if v >> d & 1 == 1 {
            v ^= poly;
        }
        if v == 1 {
            return Some(k);
        }
    }
    None
}

fn poly_mod(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        a ^= b << (31 - a.leading_zeros() - db);
    }
    a
}

pub fn is_irreducible(poly: u32) -> bool {
    let d = 31 - poly.leading_zeros();
    if d == 0 {
        return false;
    }
    (2u32..1 << (d / 2 + 1))
        .filter(|f| {
            let df = 31 - f.leading_zeros();
            df >= 1 && df <= d / 2
        })
        .all(|f| poly_mod(poly, f) != 0)
}

/// Primitive polynomials of degree `d` as bit masks (bit `k` = coefficient of `x^k`), ascending.
pub fn primitive_polynomials(d: usize) -> Vec<u32> {
    let n = (1u32 << d) - 1;
    (1u32 << d..1 << (d + 1))
        .filter(|&p| is_irreducible(p) && order_of_x(p) == Some(n))
        .collect()
}

pub fn irreducible_polynomials(d: usize) -> Vec<u32> {
    (1u32 << d..1 << (d + 1))
        .filter(|&p| is_irreducible(p))
        .collect()
}

/// `x^6 + x + 1` and `x^6 + x^5 + x^3 + x^2 + 1`.
pub const ORDER_64_POLYS: [u32; 2] = [0b100_0011, 0b110_1101];

/// Which companion matrices are tried as `A2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A2Policy {
    /// The two order-64 polynomials for `d = 6`; all primitive ones otherwise.
    Standard,
    AllPrimitive,
    Irreducible,
}

impl A2Policy {
    pub fn polynomials(self, d: usize) -> Vec<u32> {
        match self {
            A2Policy::Standard if d == 6 => ORDER_64_POLYS.to_vec(),
            A2Policy::Standard | A2Policy::AllPrimitive => primitive_polynomials(d),
            A2Policy::Irreducible => irreducible_polynomials(d),
        }
    }
}

/// First column of a combination `Σ λ_k A_k` over `k >= 3` with signature
/// bit `k-3` set for each `λ_k = 1`.
#[inline]
fn signature_column(sig: u32) -> u8 {
    (sig << 2) as u8
}

fn tail_bits(d: usize) -> u32 {
    (d * (d - 1)) as u32
}

/// Matrices `B` with first column given by `signature` such that
/// `B`, `B + I`, `B + A2` and `B + I + A2` are all invertible.
#[derive(Clone, Debug)]
pub struct CandidateList {
    pub signature: u32,
    members: Vec<u32>,
    bitset: Option<Vec<u64>>,
}

impl CandidateList {
    fn new(signature: u32, members: Vec<u32>, d: usize) -> Self {
        let bitset = (d <= 5).then(|| {
            let mut bits = vec![0u64; (1usize << tail_bits(d)).div_ceil(64)];
            for &m in &members {
                bits[m as usize / 64] |= 1 << (m % 64);
            }
            bits
        });
        CandidateList {
            signature,
            members,
            bitset,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Tail codes, ascending.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    #[inline]
    pub fn contains(&self, code: u32) -> bool {
        match &self.bitset {
            Some(b) => b[code as usize / 64] >> (code % 64) & 1 == 1,
            None => self.members.binary_search(&code).is_ok(),
        }
    }
}

/// All lists for `A2`, indexed by signature minus one.
pub fn build_lists(a2: &BitMatrix, d: usize) -> Result<Vec<CandidateList>> {
    if a2.dim() != d || !(3..=MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let id = BitMatrix::identity(d);
    if !a2.is_invertible() || !(*a2 + id).is_invertible() {
        return Err(Error::InvalidBasis("A2 or A2 + I is singular".into()));
    }
    let bits = tail_bits(d);
    let lo_bits = bits.min(16);
    let masks: Vec<u64> = (0..bits)
        .map(|j| BitMatrix::from_parts_unchecked(d, 0, 1 << j).packed())
        .collect();
    let mut lo_table = vec![0u64; 1 << lo_bits];
    for c in 1..lo_table.len() {
        let j = c.trailing_zeros() as usize;
        lo_table[c] = lo_table[c & (c - 1)] ^ masks[j];
    }
    let shifts = [0, id.packed(), a2.packed(), id.packed() ^ a2.packed()];
    (1u32..1 << (d - 2))
        .map(|sig| {
            let base = BitMatrix::from_parts_unchecked(d, signature_column(sig), 0).packed();
            let members: Vec<u32> = (0u32..1 << (bits - lo_bits))
                .into_par_iter()
                .flat_map_iter(|hi| {
                    let hi_packed = (0..bits - lo_bits)
                        .filter(|k| hi >> k & 1 == 1)
                        .fold(base, |acc, k| acc ^ masks[(k + lo_bits) as usize]);
                    let lo_table = &lo_table;
                    (0u32..1 << lo_bits).filter_map(move |lo| {
                        let p = hi_packed ^ lo_table[lo as usize];
                        shifts
                            .iter()
                            .all(|s| BitMatrix::from_packed(d, p ^ s).is_invertible())
                            .then_some(hi << lo_bits | lo)
                    })
                })
                .collect();
            Ok(CandidateList::new(sig, members, d))
        })
        .collect()
}

/// A canonical prefix `(I, A2, A3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PartialBasis {
    /// Polynomial whose companion matrix is `A2`.
    pub poly: u32,
    pub a2: u32,
    pub a3: u32,
}

fn krylov(m: &BitMatrix, v: u8) -> BitMatrix {
    let d = m.dim();
    let mut cols = [0u8; MAX_DIM];
    let mut x = v;
    for c in cols.iter_mut().take(d) {
        *c = x;
        x = m.apply(x);
    }
    BitMatrix::from_columns(d, &cols[..d])
}

/// Nonzero elements of the span of `I`, `a`, `b`.
fn span3(a: BitMatrix, b: BitMatrix) -> [BitMatrix; 7] {
    let i = BitMatrix::identity(a.dim());
    [i, a, i + a, b, i + b, a + b, i + a + b]
}

/// Smallest `(rank of A2, A3 code)` over the prefixes reachable from
/// `(I, a2, a3)` by renormalising `span(I, A2, A3)` and its transpose:
/// divide by a nonzero element `N`, pick `M` whose restandardised form is a
/// configured companion matrix, and restandardise along a vector `v`.
/// `A2` is ranked by its position in `companions`. Returns `None` as soon as
/// a pair below `bound` is found.
fn prefix_orbit_min(
    a2: BitMatrix,
    a3: BitMatrix,
    companions: &[u64],
    bound: Option<(u32, u32)>,
) -> Option<(u32, u32)> {
    let d = a2.dim();
    let q = 1u8 << d;
    let mut best: Option<(u32, u32)> = None;
    for (x, y) in [(a2, a3), (a2.transpose(), a3.transpose())] {
        let w = span3(x, y);
        for n in &w {
            let ninv = n.inverse().expect("nonzero element of a prefix span");
            let ws: Vec<BitMatrix> = w.iter().map(|m| *m * ninv).collect();
            for m in &ws {
                let r1 = krylov(m, 1);
                let Some(r1inv) = r1.inverse() else {
                    continue;
                };
                let Some(rank) = companions
                    .iter()
                    .position(|&c| c == (r1inv * *m * r1).packed())
                else {
                    continue;
                };
                // The characteristic polynomial is irreducible, so every
                // nonzero vector is cyclic.
                for v in 1..q {
                    let r = krylov(m, v);
                    let rinv = r.inverse().expect("cyclic vector");
                    let x3 = m.apply(m.apply(v));
                    let Some(m3) = ws.iter().find(|z| z.apply(v) == x3) else {
                        continue;
                    };
                    let key = (rank as u32, (rinv * *m3 * r).tail_code());
                    if bound.is_some_and(|b| key < b) {
                        return None;
                    }
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
        }
    }
    best
}

/// True iff `(I, a2, a3)` is the smallest member of its class.
pub fn is_canonical_prefix(a2: &BitMatrix, a3: &BitMatrix, companions: &[BitMatrix]) -> bool {
    let packed: Vec<u64> = companions.iter().map(|c| c.packed()).collect();
    let Some(rank) = packed.iter().position(|&c| c == a2.packed()) else {
        return false;
    };
    let own = (rank as u32, a3.tail_code());
    prefix_orbit_min(*a2, *a3, &packed, Some(own)) == Some(own)
}

/// Canonical prefixes with `A2 = C(poly)`, ascending in `A3`.
pub fn enumerate_partial_bases(
    poly: u32,
    lists: &[CandidateList],
    companions: &[BitMatrix],
) -> Result<Vec<PartialBasis>> {
    let a2 = companion_from_mask(poly)?;
    let d = a2.dim();
    let packed: Vec<u64> = companions.iter().map(|c| c.packed()).collect();
    let a2_code = a2.tail_code();
    let rank = packed
        .iter()
        .position(|&c| c == a2.packed())
        .ok_or_else(|| Error::InvalidBasis("A2 is not a configured companion matrix".into()))?
        as u32;
    Ok(lists[0]
        .members()
        .par_iter()
        .filter_map(|&code| {
            let a3 = BitMatrix::from_parts_unchecked(d, signature_column(1), code);
            let own = (rank, code);
            (prefix_orbit_min(a2, a3, &packed, Some(own)) == Some(own)).then_some(PartialBasis {
                poly,
                a2: a2_code,
                a3: code,
            })
        })
        .collect())
}

/// All completions `(A2, .., Ad)` of a prefix, as code tuples in ascending order.
pub fn extend_to_full(d: usize, p: &PartialBasis, lists: &[CandidateList]) -> Vec<Vec<u32>> {
    let levels = d - 3;
    let sums = vec![(1u32, p.a3)];
    let mut cands: Vec<Vec<u32>> = (0..levels)
        .map(|l| {
            let sig = 1u32 << (l + 1);
            filter_candidates(lists[(sig - 1) as usize].members(), sig, &sums, lists)
        })
        .collect();
    let mut out = Vec::new();
    let mut chosen = vec![p.a2, p.a3];
    sieve(d, 0, &mut cands, sums, &mut chosen, lists, &mut out);
    out.sort();
    out.dedup();
    out
}

fn filter_candidates(
    src: &[u32],
    sig: u32,
    sums: &[(u32, u32)],
    lists: &[CandidateList],
) -> Vec<u32> {
    src.iter()
        .copied()
        .filter(|&b| {
            sums.iter()
                .all(|&(s, c)| lists[(s ^ sig) as usize - 1].contains(b ^ c))
        })
        .collect()
}

fn sieve(
    d: usize,
    level: usize,
    cands: &mut [Vec<u32>],
    sums: Vec<(u32, u32)>,
    chosen: &mut Vec<u32>,
    lists: &[CandidateList],
    out: &mut Vec<Vec<u32>>,
) {
    if level == cands.len() {
        let mats: Vec<BitMatrix> = std::iter::once(BitMatrix::identity(d))
            .chain(
                chosen
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| BitMatrix::from_parts_unchecked(d, 1 << (k + 1), c)),
            )
            .collect();
        if check_standard_basis(&mats) {
            out.push(chosen.clone());
        }
        return;
    }
    let sig = 1u32 << (level + 1);
    let here = std::mem::take(&mut cands[level]);
    for &b in &here {
        let mut added: Vec<(u32, u32)> = sums.iter().map(|&(s, c)| (s ^ sig, c ^ b)).collect();
        added.push((sig, b));
        let saved: Vec<Vec<u32>> = cands[level + 1..].to_vec();
        let mut dead = false;
        for (j, slot) in cands[level + 1..].iter_mut().enumerate() {
            let sj = 1u32 << (level + 2 + j);
            *slot = filter_candidates(slot, sj, &added, lists);
            if slot.is_empty() {
                dead = true;
                break;
            }
        }
        if !dead {
            let mut next_sums = sums.clone();
            next_sums.extend(added);
            chosen.push(b);
            sieve(d, level + 1, cands, next_sums, chosen, lists, out);
            chosen.pop();
        }
        cands[level + 1..].clone_from_slice(&saved);
    }
    cands[level] = here;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct A2Stage {
    pub poly: u32,
    pub a2: u32,
    /// Sizes of the lists, by signature.
    pub list_sizes: Vec<usize>,
    pub prefixes: usize,
    pub tuples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchManifest {
    pub dim: usize,
    pub policy: A2Policy,
    pub stages: Vec<A2Stage>,
    pub partial_bases: usize,
    pub tuples: usize,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub dim: usize,
    pub policy: A2Policy,
    /// Directory for resumable per-prefix results.
    pub checkpoint: Option<PathBuf>,
}

impl SearchConfig {
    pub fn new(dim: usize) -> Self {
        SearchConfig {
            dim,
            policy: A2Policy::Standard,
            checkpoint: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub manifest: SearchManifest,
    /// Distinct tuples `(A2, .., Ad)`, ascending.
    pub tuples: Vec<Vec<u32>>,
}

/// Lists, canonical prefixes and completions for every configured `A2`.
pub fn full_search(cfg: &SearchConfig) -> Result<SearchOutcome> {
    let d = cfg.dim;
    if !(4..=6).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let polys = cfg.policy.polynomials(d);
    let companions: Vec<BitMatrix> = polys
        .iter()
        .map(|&p| companion_from_mask(p))
        .collect::<Result<_>>()?;
    let mut stages = Vec::new();
    let mut all = Vec::new();
    for (&poly, a2) in polys.iter().zip(&companions) {
        let lists = build_lists(a2, d)?;
        let prefixes = match &cfg.checkpoint {
            Some(dir) => load_or_store_prefixes(dir, poly, || {
                enumerate_partial_bases(poly, &lists, &companions)
            })?,
            None => enumerate_partial_bases(poly, &lists, &companions)?,
        };
        let completions: Vec<Vec<Vec<u32>>> = prefixes
            .par_iter()
            .enumerate()
            .map(|(i, p)| match &cfg.checkpoint {
                Some(dir) => checkpointed(dir, poly, i, d, || extend_to_full(d, p, &lists)),
                None => Ok(extend_to_full(d, p, &lists)),
            })
            .collect::<Result<_>>()?;
        let count: usize = completions.iter().map(Vec::len).sum();
        stages.push(A2Stage {
            poly,
            a2: a2.tail_code(),
            list_sizes: lists.iter().map(CandidateList::len).collect(),
            prefixes: prefixes.len(),
            tuples: count,
        });
        all.extend(completions.into_iter().flatten());
    }
    all.sort();
    all.dedup();
    let manifest = SearchManifest {
        dim: d,
        policy: cfg.policy,
        partial_bases: stages.iter().map(|s| s.prefixes).sum(),
        tuples: all.len(),
        stages,
    };
    Ok(SearchOutcome {
        manifest,
        tuples: all,
    })
}

fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

fn load_or_store_prefixes(
    dir: &Path,
    poly: u32,
    compute: impl FnOnce() -> Result<Vec<PartialBasis>>,
) -> Result<Vec<PartialBasis>> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("prefixes-{poly}.txt"));
    if path.exists() {
        let f = BufReader::new(fs::File::open(&path)?);
        let mut out = Vec::new();
        for (n, line) in f.lines().enumerate() {
            if let Some(v) = parse_tuple_line(&line?, n + 1)? {
                if v.len() != 2 {
                    return Err(Error::Parse {
                        line: n + 1,
                        msg: "expected A2 A3".into(),
                    });
                }
                out.push(PartialBasis {
                    poly,
                    a2: v[0],
                    a3: v[1],
                });
            }
        }
        return Ok(out);
    }
    let prefixes = compute()?;
    let body: String = prefixes
        .iter()
        .map(|p| format!("{} {}\n", p.a2, p.a3))
        .collect();
    write_atomic(&path, &body)?;
    Ok(prefixes)
}

fn checkpointed(
    dir: &Path,
    poly: u32,
    index: usize,
    d: usize,
    compute: impl FnOnce() -> Vec<Vec<u32>>,
) -> Result<Vec<Vec<u32>>> {
    let status = dir.join("status");
    fs::create_dir_all(&status)?;
    let path = status.join(format!("{poly}-{index:07}.txt"));
    if path.exists() {
        let f = BufReader::new(fs::File::open(&path)?);
        let mut out = Vec::new();
        for (n, line) in f.lines().enumerate() {
            if let Some(v) = parse_tuple_line(&line?, n + 1)? {
                if v.len() != d - 1 {
                    return Err(Error::Parse {
                        line: n + 1,
                        msg: format!("expected {} codes", d - 1),
                    });
                }
                out.push(v);
            }
        }
        return Ok(out);
    }
    let tuples = compute();
    let mut body = String::from("# complete\n");
    for t in &tuples {
        let line: Vec<String> = t.iter().map(u32::to_string).collect();
        body.push_str(&line.join(" "));
        body.push('\n');
    }
    write_atomic(&path, &body)?;
    Ok(tuples)
}

/// Every standard basis of order `2^d`, `d <= 4`, by direct backtracking
/// over all matrices with the required first columns.
pub fn oracle_search(d: usize) -> Result<Vec<Vec<u32>>> {
    if !(2..=4).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let bits = tail_bits(d);
    let invertible: Vec<bool> = (0u32..1 << (d * d))
        .map(|idx| {
            BitMatrix::from_parts_unchecked(d, (idx & ((1 << d) - 1)) as u8, idx >> d)
                .is_invertible()
        })
        .collect();
    let id = BitMatrix::identity(d);
    let id_idx = id.tail_code() << d | 1;
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    oracle_rec(d, bits, 2, &invertible, vec![id_idx], &mut chosen, &mut out);
    Ok(out)
}

fn oracle_rec(
    d: usize,
    bits: u32,
    k: usize,
    invertible: &[bool],
    sums: Vec<u32>,
    chosen: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if k > d {
        out.push(chosen.clone());
        return;
    }
    for tail in 0u32..1 << bits {
        let idx = tail << d | 1 << (k - 1);
        if !invertible[idx as usize] || sums.iter().any(|&s| !invertible[(s ^ idx) as usize]) {
            continue;
        }
        let mut next = sums.clone();
        next.extend(sums.iter().map(|&s| s ^ idx));
        next.push(idx);
        chosen.push(tail);
        oracle_rec(d, bits, k + 1, invertible, next, chosen, out);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semifield::StandardBasis;

    #[test]
    fn primitive_polynomial_counts() {
        // Number of primitive polynomials of degree d is phi(2^d - 1) / d.
        assert_eq!(primitive_polynomials(2), vec![0b111]);
        assert_eq!(primitive_polynomials(3).len(), 2);
        assert_eq!(primitive_polynomials(4).len(), 2);
        assert_eq!(primitive_polynomials(5).len(), 6);
        assert_eq!(primitive_polynomials(6).len(), 6);
        assert_eq!(irreducible_polynomials(4).len(), 3);
        assert_eq!(irreducible_polynomials(6).len(), 9);
        for p in ORDER_64_POLYS {
            assert!(primitive_polynomials(6).contains(&p));
        }
    }

    #[test]
    fn lists_match_direct_scan_at_order_8() {
        let a2 = companion_from_mask(0b1011).unwrap();
        let lists = build_lists(&a2, 3).unwrap();
        assert_eq!(lists.len(), 1);
        let id = BitMatrix::identity(3);
        let direct: Vec<u32> = (0u32..64)
            .filter(|&c| {
                let b = BitMatrix::from_parts(3, 0b100, c).unwrap();
                [b, b + id, b + a2, b + id + a2]
                    .iter()
                    .all(BitMatrix::is_invertible)
            })
            .collect();
        assert_eq!(lists[0].members(), direct.as_slice());
        let excluded = (id + a2).tail_code();
        assert!(!lists[0].contains(excluded));
    }

    #[test]
    fn plane_one_a2_is_a_primitive_companion() {
        let b = StandardBasis::from_codes(&[135274593, 67639409, 33954937, 25632381, 566730623])
            .unwrap();
        let poly = primitive_polynomials(6)
            .into_iter()
            .find(|&p| companion_from_mask(p).unwrap() == b.matrices()[1]);
        assert_eq!(poly, Some(0b110_0001));
    }

    #[test]
    fn oracle_small_orders() {
        let two = oracle_search(2).unwrap();
        assert_eq!(two.len(), 1);
        assert!(StandardBasis::from_codes(&two[0]).is_ok());
        assert!(matches!(
            oracle_search(5),
            Err(Error::UnsupportedDimension(5))
        ));
        for t in oracle_search(3).unwrap() {
            assert!(StandardBasis::from_codes(&t).is_ok());
        }
    }
}
