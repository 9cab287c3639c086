//! Standard bases, 3-cubes and multiplication tables of (pre)semifields of
//! order `2^d`.
//!
//! A standard basis `(A_1, .., A_d)` describes the semifield whose element
//! `x_i` (the vector `e_i`) acts on the right by `A_i`: column `k` of `A_i`
//! holds the coordinates of `x_k x_i`. With `A_1 = I` and first columns
//! `e_i`, the vector `e_1` is the two-sided identity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::binmat::{decode_matrix, encode_matrix, BitMatrix, EncodedMatrix, MAX_DIM};
use crate::error::{Error, Result};

/// Visits every nonzero GF(2) combination of `mats` in Gray-code order.
/// Stops early and returns `false` as soon as `f` does.
pub(crate) fn all_combinations(mats: &[BitMatrix], mut f: impl FnMut(&BitMatrix) -> bool) -> bool {
    let Some(first) = mats.first() else {
        return true;
    };
    let mut acc = BitMatrix::zero(first.dim());
    for k in 1u32..(1 << mats.len()) {
        acc = acc + mats[k.trailing_zeros() as usize];
        if !f(&acc) {
            return false;
        }
    }
    true
}

/// True iff `mats` satisfies the three standard-basis conditions: `A_1 = I`,
/// first column of `A_i` is `e_i`, and every nonzero combination is invertible.
pub fn check_standard_basis(mats: &[BitMatrix]) -> bool {
    let d = mats.len();
    if !(2..=MAX_DIM).contains(&d) || mats.iter().any(|m| m.dim() != d) {
        return false;
    }
    if mats[0] != BitMatrix::identity(d) {
        return false;
    }
    if mats
        .iter()
        .enumerate()
        .any(|(i, m)| m.first_column() != 1 << i)
    {
        return false;
    }
    all_combinations(mats, |m| m.is_invertible())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StandardBasis {
    mats: Vec<BitMatrix>,
}

impl StandardBasis {
    pub fn new(mats: Vec<BitMatrix>) -> Result<Self> {
        if !check_standard_basis(&mats) {
            return Err(Error::InvalidBasis(
                "matrices violate the standard-basis conditions".into(),
            ));
        }
        Ok(StandardBasis { mats })
    }

    /// From the encoded tuple `(A_2, .., A_d)`; `A_1 = I` is implied.
    pub fn from_codes(codes: &[u32]) -> Result<Self> {
        let d = codes.len() + 1;
        let mut mats = vec![BitMatrix::identity(d)];
        for (k, &code) in codes.iter().enumerate() {
            mats.push(decode_matrix(EncodedMatrix { index: k + 2, code }, d)?);
        }
        Self::new(mats)
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.mats
    }

    pub fn codes(&self) -> Vec<u32> {
        self.mats[1..]
            .iter()
            .enumerate()
            .map(|(k, m)| encode_matrix(m, k + 2).expect("validated").code)
            .collect()
    }

    pub fn cube(&self) -> Cube {
        Cube::from_basis(self)
    }

    pub fn table(&self) -> SemifieldTable {
        let cube = self.cube();
        let prod = cube.product_table();
        SemifieldTable {
            dim: self.dim() as u8,
            identity: 1,
            prod,
        }
    }
}

/// An element of S3 acting on the three indices of a cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm3([u8; 3]);

impl Perm3 {
    pub const ID: Perm3 = Perm3([1, 2, 3]);
    pub const T12: Perm3 = Perm3([2, 1, 3]);
    pub const T13: Perm3 = Perm3([3, 2, 1]);
    pub const C123: Perm3 = Perm3([2, 3, 1]);
    pub const T23: Perm3 = Perm3([1, 3, 2]);
    pub const C132: Perm3 = Perm3([3, 1, 2]);

    /// The six permutations in the conventional hexagon order.
    pub const ALL: [Perm3; 6] = [
        Perm3::ID,
        Perm3::T12,
        Perm3::T13,
        Perm3::C123,
        Perm3::T23,
        Perm3::C132,
    ];

    /// Image of `k` (1-based).
    pub fn image(self, k: usize) -> usize {
        self.0[k - 1] as usize
    }

    /// `self ∘ other`.
    pub fn compose(self, other: Perm3) -> Perm3 {
        Perm3([1, 2, 3].map(|k| self.image(other.image(k)) as u8))
    }

    pub fn inverse(self) -> Perm3 {
        let mut out = [0u8; 3];
        for k in 1..=3 {
            out[self.image(k) - 1] = k as u8;
        }
        Perm3(out)
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            [1, 2, 3] => "1",
            [2, 1, 3] => "(12)",
            [3, 2, 1] => "(13)",
            [2, 3, 1] => "(123)",
            [1, 3, 2] => "(23)",
            [3, 1, 2] => "(132)",
            _ => unreachable!("not a permutation"),
        }
    }
}

impl fmt::Display for Perm3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Structure constants `A_{i1 i2 i3}` with `x_{i1} x_{i2} = sum A_{i1 i2 i3} x_{i3}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    dim: u8,
    /// `basis_products[i1][i2]` has bit `i3` set iff `A_{i1+1, i2+1, i3+1} = 1`.
    basis_products: [[u8; MAX_DIM]; MAX_DIM],
}

impl fmt::Debug for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        f.debug_struct("Cube")
            .field("dim", &d)
            .field(
                "basis_products",
                &self.basis_products[..d]
                    .iter()
                    .map(|r| r[..d].to_vec())
                    .collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl Cube {
    pub fn from_basis(b: &StandardBasis) -> Cube {
        let d = b.dim();
        let mut basis_products = [[0u8; MAX_DIM]; MAX_DIM];
        for (i2, m) in b.matrices().iter().enumerate() {
            for (i1, row) in basis_products.iter_mut().enumerate().take(d) {
                row[i2] = m.column(i1);
            }
        }
        Cube {
            dim: d as u8,
            basis_products,
        }
    }

    /// Structure constants of a GF(2)-bilinear product given on basis vectors.
    pub fn from_bilinear(dim: usize, product: impl Fn(u8, u8) -> u8) -> Cube {
        let mut basis_products = [[0u8; MAX_DIM]; MAX_DIM];
        for (i1, row) in basis_products.iter_mut().enumerate().take(dim) {
            for (i2, slot) in row.iter_mut().enumerate().take(dim) {
                *slot = product(1 << i1, 1 << i2);
            }
        }
        Cube {
            dim: dim as u8,
            basis_products,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// `A_{i1 i2 i3}`, 1-indexed.
    pub fn entry(&self, i1: usize, i2: usize, i3: usize) -> bool {
        self.basis_products[i1 - 1][i2 - 1] >> (i3 - 1) & 1 == 1
    }

    /// Slice with fixed `i1`: entry `(i3, i2)` is `A_{i1 i2 i3}`, i.e. the
    /// matrix of left multiplication by `x_{i1}`.
    pub fn slice(&self, i1: usize) -> BitMatrix {
        BitMatrix::from_columns(self.dim(), &self.basis_products[i1 - 1][..self.dim()])
    }

    /// Slice with fixed `i2`: the matrix of right multiplication by
    /// `x_{i2}`, which is `A_{i2}` for a cube built from a standard basis.
    pub fn right_slice(&self, i2: usize) -> BitMatrix {
        let cols: Vec<u8> = (0..self.dim())
            .map(|k| self.basis_products[k][i2 - 1])
            .collect();
        BitMatrix::from_columns(self.dim(), &cols)
    }

    pub fn slices(&self) -> Vec<BitMatrix> {
        (1..=self.dim()).map(|i| self.slice(i)).collect()
    }

    /// Entry `(i1,i2,i3)` of the result is entry `(i_{σ(1)}, i_{σ(2)}, i_{σ(3)})` of `self`.
    pub fn apply_permutation(&self, sigma: Perm3) -> Cube {
        let d = self.dim();
        let mut basis_products = [[0u8; MAX_DIM]; MAX_DIM];
        for i1 in 1..=d {
            for i2 in 1..=d {
                for i3 in 1..=d {
                    let idx = [i1, i2, i3];
                    let src = [
                        idx[sigma.image(1) - 1],
                        idx[sigma.image(2) - 1],
                        idx[sigma.image(3) - 1],
                    ];
                    if self.entry(src[0], src[1], src[2]) {
                        basis_products[i1 - 1][i2 - 1] |= 1 << (i3 - 1);
                    }
                }
            }
        }
        Cube {
            dim: self.dim,
            basis_products,
        }
    }

    #[inline]
    pub fn product(&self, x: u8, y: u8) -> u8 {
        let mut out = 0u8;
        let mut xs = x;
        while xs != 0 {
            let i1 = xs.trailing_zeros() as usize;
            xs &= xs - 1;
            let row = &self.basis_products[i1];
            let mut ys = y;
            while ys != 0 {
                let i2 = ys.trailing_zeros() as usize;
                ys &= ys - 1;
                out ^= row[i2];
            }
        }
        out
    }

    pub(crate) fn product_table(&self) -> Vec<u8> {
        let q = 1usize << self.dim();
        let mut prod = vec![0u8; q * q];
        // Left multiplication by x is linear in y; fill rows by Gray code.
        for x in 0..q {
            let row = &mut prod[x * q..(x + 1) * q];
            let cols: Vec<u8> = (0..self.dim())
                .map(|k| self.product(x as u8, 1 << k))
                .collect();
            for y in 1..q {
                let prev = y & (y - 1);
                row[y] = row[prev] ^ cols[(y ^ prev).trailing_zeros() as usize];
            }
        }
        prod
    }

    /// A pair of nonzero elements with zero product, if any.
    pub fn zero_divisor(&self) -> Option<(u8, u8)> {
        let q = 1u8 << self.dim();
        for x in 1..q {
            let lx = BitMatrix::from_images(self.dim(), |v| self.product(x, v));
            if !lx.is_invertible() {
                let y = (1..q).find(|&y| self.product(x, y) == 0).expect("singular");
                return Some((x, y));
            }
        }
        None
    }
}

/// The isotopy `(F, G, H)` from a presemifield `P` to its unit isotope `S`,
/// with `H(ab) = F(a) ∘ G(b)`.
#[derive(Clone, Debug)]
pub struct UnitIsotopy {
    pub unit: u8,
    pub f: BitMatrix,
    pub g: BitMatrix,
    pub h: BitMatrix,
}

/// Full multiplication table of a semifield of order `q = 2^d`. Elements are
/// coordinate vectors, stored as integers `0..q`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SemifieldTable {
    dim: u8,
    identity: u8,
    prod: Vec<u8>,
}

impl fmt::Debug for SemifieldTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemifieldTable")
            .field("order", &self.order())
            .field("identity", &self.identity)
            .finish_non_exhaustive()
    }
}

impl SemifieldTable {
    /// Validates distributivity-free loop axioms and the identity; the
    /// product must already be bilinear (it is checked on all pairs).
    pub fn from_products(dim: usize, prod: Vec<u8>, identity: u8) -> Result<Self> {
        let q = 1usize << dim;
        if prod.len() != q * q {
            return Err(Error::InvalidBasis(format!(
                "table has {} entries, expected {}",
                prod.len(),
                q * q
            )));
        }
        let t = SemifieldTable {
            dim: dim as u8,
            identity,
            prod,
        };
        t.validate()?;
        Ok(t)
    }

    pub(crate) fn from_products_unchecked(dim: usize, prod: Vec<u8>, identity: u8) -> Self {
        SemifieldTable {
            dim: dim as u8,
            identity,
            prod,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.order();
        let e = self.identity;
        if e == 0 || e as usize >= q {
            return Err(Error::InvalidBasis("identity out of range".into()));
        }
        for x in 0..q as u8 {
            if self.mul(e, x) != x || self.mul(x, e) != x {
                return Err(Error::InvalidBasis(format!(
                    "{e} is not an identity at {x}"
                )));
            }
        }
        for a in 0..q as u8 {
            for b in 0..q as u8 {
                for c in [1u8, 2, 4, 8, 16, 32]
                    .into_iter()
                    .filter(|&c| (c as usize) < q)
                {
                    if self.mul(a, b ^ c) != self.mul(a, b) ^ self.mul(a, c)
                        || self.mul(b ^ c, a) != self.mul(b, a) ^ self.mul(c, a)
                    {
                        return Err(Error::InvalidBasis("product is not biadditive".into()));
                    }
                }
            }
        }
        for a in 1..q as u8 {
            let mut seen_row = 0u64;
            let mut seen_col = 0u64;
            for x in 0..q as u8 {
                seen_row |= 1 << self.mul(a, x);
                seen_col |= 1 << self.mul(x, a);
            }
            if seen_row.count_ones() as usize != q || seen_col.count_ones() as usize != q {
                return Err(Error::InvalidBasis(format!(
                    "multiplication by {a} is not bijective"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn order(&self) -> usize {
        1 << self.dim
    }

    #[inline]
    pub fn identity(&self) -> u8 {
        self.identity
    }

    #[inline]
    pub fn mul(&self, x: u8, y: u8) -> u8 {
        self.prod[((x as usize) << self.dim) | y as usize]
    }

    pub fn products(&self) -> &[u8] {
        &self.prod
    }

    /// Matrix of `y ↦ a·y`.
    pub fn left_mul_matrix(&self, a: u8) -> BitMatrix {
        BitMatrix::from_images(self.dim(), |v| self.mul(a, v))
    }

    /// Matrix of `x ↦ x·b`.
    pub fn right_mul_matrix(&self, b: u8) -> BitMatrix {
        BitMatrix::from_images(self.dim(), |v| self.mul(v, b))
    }

    pub fn cube(&self) -> Cube {
        Cube::from_bilinear(self.dim(), |x, y| self.mul(x, y))
    }

    pub fn is_commutative(&self) -> bool {
        let q = self.order() as u8;
        (0..q).all(|x| (0..x).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    /// Relabels elements through the linear bijection `map`: the result has
    /// product `map(x)·' map(y) = map(x·y)`.
    pub fn transport(&self, map: &BitMatrix) -> SemifieldTable {
        let q = self.order();
        let inv = map.inverse().expect("map must be invertible");
        let mut prod = vec![0u8; q * q];
        for x in 0..q as u8 {
            let px = inv.apply(x);
            for y in 0..q as u8 {
                prod[(x as usize) << self.dim | y as usize] = map.apply(self.mul(px, inv.apply(y)));
            }
        }
        SemifieldTable {
            dim: self.dim,
            identity: map.apply(self.identity),
            prod,
        }
    }
}

/// Unit isotope of the presemifield given by `cube`, using `u = 1` (the
/// vector `e_1`): `x ∘ y = r·s` where `r·u = x` and `u·s = y`; the identity is `u·u`.
pub fn presemifield_to_semifield(cube: &Cube) -> Result<SemifieldTable> {
    presemifield_to_semifield_with_witness(cube).map(|(t, _)| t)
}

pub fn presemifield_to_semifield_with_witness(
    cube: &Cube,
) -> Result<(SemifieldTable, UnitIsotopy)> {
    if let Some((x, y)) = cube.zero_divisor() {
        return Err(Error::ZeroDivisor { x, y });
    }
    let d = cube.dim();
    let q = 1usize << d;
    let u = 1u8;
    let r_u = BitMatrix::from_images(d, |v| cube.product(v, u));
    let l_u = BitMatrix::from_images(d, |v| cube.product(u, v));
    let r_inv = r_u.inverse().expect("no zero divisors");
    let l_inv = l_u.inverse().expect("no zero divisors");
    let base = cube.product_table();
    let rs: Vec<u8> = (0..q as u8).map(|x| r_inv.apply(x)).collect();
    let ls: Vec<u8> = (0..q as u8).map(|y| l_inv.apply(y)).collect();
    let mut prod = vec![0u8; q * q];
    for x in 0..q {
        for y in 0..q {
            prod[x * q + y] = base[(rs[x] as usize) * q + ls[y] as usize];
        }
    }
    let identity = cube.product(u, u);
    let table = SemifieldTable::from_products_unchecked(d, prod, identity);
    let witness = UnitIsotopy {
        unit: u,
        f: r_u,
        g: l_u,
        h: BitMatrix::identity(d),
    };
    Ok((table, witness))
}

/// Cardinalities of the center and nuclei `(|Z|, |N|, |N_l|, |N_m|, |N_r|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZnTuple(pub [u32; 5]);

impl fmt::Display for ZnTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [z, n, l, m, r] = self.0;
        write!(f, "({z}, {n}, {l}, {m}, {r})")
    }
}

/// Center and nuclei as element sets (bit `x` set iff `x` belongs).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Nuclei {
    pub center: u64,
    pub nucleus: u64,
    pub left: u64,
    pub middle: u64,
    pub right: u64,
}

impl Nuclei {
    pub fn orders(&self) -> ZnTuple {
        ZnTuple(
            [
                self.center,
                self.nucleus,
                self.left,
                self.middle,
                self.right,
            ]
            .map(|s| s.count_ones()),
        )
    }
}

pub fn nuclei(t: &SemifieldTable) -> Nuclei {
    let q = t.order() as u8;
    let all = |pred: &dyn Fn(u8, u8) -> bool| (0..q).all(|x| (0..q).all(|y| pred(x, y)));
    let mut left = 0u64;
    let mut middle = 0u64;
    let mut right = 0u64;
    for a in 0..q {
        if all(&|x, y| t.mul(t.mul(a, x), y) == t.mul(a, t.mul(x, y))) {
            left |= 1 << a;
        }
        if all(&|x, y| t.mul(t.mul(x, a), y) == t.mul(x, t.mul(a, y))) {
            middle |= 1 << a;
        }
        if all(&|x, y| t.mul(t.mul(x, y), a) == t.mul(x, t.mul(y, a))) {
            right |= 1 << a;
        }
    }
    let nucleus = left & middle & right;
    let mut center = 0u64;
    for a in 0..q {
        if nucleus >> a & 1 == 1 && (0..q).all(|x| t.mul(a, x) == t.mul(x, a)) {
            center |= 1 << a;
        }
    }
    Nuclei {
        center,
        nucleus,
        left,
        middle,
        right,
    }
}

pub fn nuclei_and_center(t: &SemifieldTable) -> ZnTuple {
    nuclei(t).orders()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitivity {
    TwoSided,
    LeftOnly,
    RightOnly,
    None,
}

impl Primitivity {
    pub fn has_primitive(self) -> bool {
        self != Primitivity::None
    }
}

impl fmt::Display for Primitivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Primitivity::TwoSided => "two_sided",
            Primitivity::LeftOnly => "left_only",
            Primitivity::RightOnly => "right_only",
            Primitivity::None => "none",
        })
    }
}

/// Length of the cycle `a, a·a, (a·a)·a, ..`.
pub fn right_power_period(t: &SemifieldTable, a: u8) -> usize {
    power_period(a, |x| t.mul(x, a))
}

/// Length of the cycle `a, a·a, a·(a·a), ..`.
pub fn left_power_period(t: &SemifieldTable, a: u8) -> usize {
    power_period(a, |x| t.mul(a, x))
}

fn power_period(a: u8, step: impl Fn(u8) -> u8) -> usize {
    if a == 0 {
        return 1;
    }
    let mut x = step(a);
    let mut n = 1;
    while x != a {
        x = step(x);
        n += 1;
    }
    n
}

pub fn primitivity_class(t: &SemifieldTable) -> Primitivity {
    let q = t.order();
    let right = (1..q as u8).any(|a| right_power_period(t, a) == q - 1);
    let left = (1..q as u8).any(|a| left_power_period(t, a) == q - 1);
    match (left, right) {
        (true, true) => Primitivity::TwoSided,
        (true, false) => Primitivity::LeftOnly,
        (false, true) => Primitivity::RightOnly,
        (false, false) => Primitivity::None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANE_I: [u32; 5] = [135274593, 67639409, 33954937, 25632381, 566730623];

    fn gf4_basis() -> StandardBasis {
        // GF(4) = GF(2)[w]/(w^2+w+1) with basis (1, w): R_w = companion(x^2+x+1).
        StandardBasis::new(vec![
            BitMatrix::identity(2),
            BitMatrix::from_rows(2, &[0b10, 0b11]),
        ])
        .unwrap()
    }

    #[test]
    fn plane_one_is_a_standard_basis() {
        assert!(StandardBasis::from_codes(&PLANE_I).is_ok());
    }

    #[test]
    fn repeated_matrix_is_rejected() {
        let b = StandardBasis::from_codes(&PLANE_I).unwrap();
        let mut mats = b.matrices().to_vec();
        mats[2] = mats[3];
        assert!(!check_standard_basis(&mats));
        assert!((mats[2] + mats[3]).is_zero());
    }

    #[test]
    fn gf4_cube_by_hand() {
        let cube = gf4_basis().cube();
        // 1*1 = 1, 1*w = w, w*1 = w, w*w = 1 + w
        assert!(cube.entry(1, 1, 1) && !cube.entry(1, 1, 2));
        assert!(!cube.entry(1, 2, 1) && cube.entry(1, 2, 2));
        assert!(!cube.entry(2, 1, 1) && cube.entry(2, 1, 2));
        assert!(cube.entry(2, 2, 1) && cube.entry(2, 2, 2));
        let t = gf4_basis().table();
        assert_eq!(t.mul(2, 2), 3);
        assert_eq!(t.mul(3, 3), 2);
        assert_eq!(t.mul(2, 3), 1);
        assert!(t.validate().is_ok());
    }

    #[test]
    fn plane_one_table_is_a_field() {
        let b = StandardBasis::from_codes(&PLANE_I).unwrap();
        let t = b.table();
        assert!(t.validate().is_ok());
        assert!(t.is_commutative());
        for x in 0..64u8 {
            for y in 0..64u8 {
                for z in [3u8, 17, 42] {
                    assert_eq!(t.mul(t.mul(x, y), z), t.mul(x, t.mul(y, z)));
                }
            }
        }
        assert_eq!(nuclei_and_center(&t), ZnTuple([64; 5]));
        assert_eq!(primitivity_class(&t), Primitivity::TwoSided);
        assert_eq!(b.cube().slice(1), BitMatrix::identity(6));
    }

    const PLANE_II: [u32; 5] = [135274593, 225354480, 673682562, 25632381, 199628676];

    #[test]
    fn right_slices_reproduce_basis() {
        let b = StandardBasis::from_codes(&PLANE_II).unwrap();
        let c = b.cube();
        let right: Vec<BitMatrix> = (1..=6).map(|i| c.right_slice(i)).collect();
        assert_eq!(right, b.matrices());
        let t = b.table();
        assert!(!t.is_commutative());
        for i in 0..6 {
            assert_eq!(t.right_mul_matrix(1 << i), b.matrices()[i]);
            assert_eq!(t.left_mul_matrix(1 << i), c.slice(i + 1));
        }
    }

    #[test]
    fn transposition_13_transposes_the_basis() {
        let b = StandardBasis::from_codes(&PLANE_II).unwrap();
        let c = b.cube().apply_permutation(Perm3::T13);
        for i in 1..=6 {
            assert_eq!(c.right_slice(i), b.matrices()[i - 1].transpose());
        }
        assert!(c.zero_divisor().is_none());
    }

    #[test]
    fn perm3_group() {
        for a in Perm3::ALL {
            assert_eq!(a.compose(a.inverse()), Perm3::ID);
            for b in Perm3::ALL {
                assert!(Perm3::ALL.contains(&a.compose(b)));
            }
        }
        let names: Vec<&str> = Perm3::ALL.iter().map(|p| p.name()).collect();
        assert_eq!(names, ["1", "(12)", "(13)", "(123)", "(23)", "(132)"]);
    }

    #[test]
    fn identity_permutation_and_commutative_swap() {
        let c = StandardBasis::from_codes(&PLANE_I).unwrap().cube();
        assert_eq!(c.apply_permutation(Perm3::ID), c);
        assert_eq!(c.apply_permutation(Perm3::T12), c);
    }

    #[test]
    fn unit_isotope_of_standard_cube_is_the_same_table() {
        let b = StandardBasis::from_codes(&PLANE_I).unwrap();
        let t = presemifield_to_semifield(&b.cube()).unwrap();
        assert_eq!(t, b.table());
    }

    #[test]
    fn zero_divisor_is_reported() {
        let cube = Cube::from_bilinear(2, |x, y| if x & y & 1 == 1 { 1 } else { 0 });
        assert!(matches!(
            presemifield_to_semifield(&cube),
            Err(Error::ZeroDivisor { .. })
        ));
    }
}
