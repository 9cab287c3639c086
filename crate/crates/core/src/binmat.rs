//! Square matrices over GF(2) of size at most 6, packed one byte per row.
//!
//! Entry `(r, c)` (1-indexed) lives in bit `c - 1` of row byte `r - 1`, and
//! the row bytes are packed into a single `u64`, so matrix addition is one
//! XOR. Vectors of `GF(2)^d` are `u8` values with coordinate `i` in bit
//! `i - 1`.
//!
//! Standard-basis matrices have a fixed first column `e_i` and are encoded
//! by the integer `sum a_j 2^j`, where the remaining columns are laid out as
//!
//! ```text
//!   a29 a23 a17 a11 a5
//!   a28 a22 a16 a10 a4
//!   ...
//!   a24 a18 a12 a6  a0
//! ```
//!
//! for `d = 6`, i.e. entry `(r, c)` with `c >= 2` is bit `d(d - c) + (d - r)`.
//! The same rule is used for smaller dimensions.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 6;

#[inline]
fn check_dim(dim: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

#[inline]
fn row_mask(dim: usize) -> u8 {
    ((1u16 << dim) - 1) as u8
}

/// A `dim x dim` matrix over GF(2).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    dim: u8,
    bits: u64,
}

impl BitMatrix {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        BitMatrix {
            dim: dim as u8,
            bits: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for r in 0..dim {
            m.set_row(r, 1 << r);
        }
        m
    }

    /// Builds a matrix from row bytes (bit `c` of `rows[r]` is entry `(r+1, c+1)`).
    pub fn from_rows(dim: usize, rows: &[u8]) -> Self {
        assert_eq!(rows.len(), dim);
        let mut m = Self::zero(dim);
        for (r, &row) in rows.iter().enumerate() {
            m.set_row(r, row & row_mask(dim));
        }
        m
    }

    /// Builds a matrix from column vectors (bit `r` of `cols[c]` is entry `(r+1, c+1)`).
    pub fn from_columns(dim: usize, cols: &[u8]) -> Self {
        assert_eq!(cols.len(), dim);
        let mut rows = [0u8; MAX_DIM];
        for (c, &col) in cols.iter().enumerate() {
            for (r, row) in rows.iter_mut().enumerate().take(dim) {
                if col >> r & 1 == 1 {
                    *row |= 1 << c;
                }
            }
        }
        Self::from_rows(dim, &rows[..dim])
    }

    /// The matrix of a linear map given by its images of `e_1 .. e_d`.
    pub fn from_images(dim: usize, images: impl Fn(u8) -> u8) -> Self {
        let cols: Vec<u8> = (0..dim).map(|c| images(1 << c)).collect();
        Self::from_columns(dim, &cols)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Row-packed bits; row `r` (0-based) is byte `r`.
    #[inline]
    pub fn packed(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn row(&self, r: usize) -> u8 {
        (self.bits >> (8 * r)) as u8
    }

    #[inline]
    fn set_row(&mut self, r: usize, row: u8) {
        self.bits = (self.bits & !(0xffu64 << (8 * r))) | (row as u64) << (8 * r);
    }

    pub fn column(&self, c: usize) -> u8 {
        let mut col = 0u8;
        for r in 0..self.dim() {
            col |= (self.row(r) >> c & 1) << r;
        }
        col
    }

    /// Entry `(row, col)`, 1-indexed.
    pub fn entry(&self, row: usize, col: usize) -> bool {
        assert!(row >= 1 && row <= self.dim() && col >= 1 && col <= self.dim());
        self.row(row - 1) >> (col - 1) & 1 == 1
    }

    pub fn set_entry(&mut self, row: usize, col: usize, value: bool) {
        assert!(row >= 1 && row <= self.dim() && col >= 1 && col <= self.dim());
        let mut r = self.row(row - 1);
        if value {
            r |= 1 << (col - 1);
        } else {
            r &= !(1 << (col - 1));
        }
        self.set_row(row - 1, r);
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Matrix-vector product over GF(2).
    #[inline]
    pub fn apply(&self, v: u8) -> u8 {
        let mut out = 0u8;
        for r in 0..self.dim() {
            out |= (((self.row(r) & v).count_ones() & 1) as u8) << r;
        }
        out
    }

    pub fn checked_add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        self.same_dim(other)?;
        Ok(BitMatrix {
            dim: self.dim,
            bits: self.bits ^ other.bits,
        })
    }

    pub fn checked_mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        self.same_dim(other)?;
        let mut out = BitMatrix::zero(self.dim());
        for r in 0..self.dim() {
            let a = self.row(r);
            let mut acc = 0u8;
            for k in 0..self.dim() {
                if a >> k & 1 == 1 {
                    acc ^= other.row(k);
                }
            }
            out.set_row(r, acc);
        }
        Ok(out)
    }

    fn same_dim(&self, other: &BitMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn transpose(&self) -> BitMatrix {
        let cols: Vec<u8> = (0..self.dim()).map(|r| self.row(r)).collect();
        BitMatrix::from_columns(self.dim(), &cols)
    }

    /// Rank over GF(2) by in-place elimination on the row bytes.
    pub fn rank(&self) -> usize {
        let mut rows = [0u8; MAX_DIM];
        let d = self.dim();
        for (r, row) in rows.iter_mut().enumerate().take(d) {
            *row = self.row(r);
        }
        let mut rank = 0;
        for c in 0..d {
            let bit = 1u8 << c;
            let Some(p) = (rank..d).find(|&r| rows[r] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (r, row) in rows.iter_mut().enumerate().take(d) {
                if r != rank && *row & bit != 0 {
                    *row ^= pivot;
                }
            }
            rank += 1;
        }
        rank
    }

    #[inline]
    pub fn is_invertible(&self) -> bool {
        let d = self.dim();
        let mut rows = [0u8; MAX_DIM];
        for (r, row) in rows.iter_mut().enumerate().take(d) {
            *row = self.row(r);
        }
        for c in 0..d {
            let bit = 1u8 << c;
            let Some(p) = (c..d).find(|&r| rows[r] & bit != 0) else {
                return false;
            };
            rows.swap(c, p);
            let pivot = rows[c];
            for row in rows.iter_mut().take(d).skip(c + 1) {
                if *row & bit != 0 {
                    *row ^= pivot;
                }
            }
        }
        true
    }

    /// Gauss-Jordan inverse; `None` if singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let d = self.dim();
        let mut a = [0u8; MAX_DIM];
        let mut inv = [0u8; MAX_DIM];
        for r in 0..d {
            a[r] = self.row(r);
            inv[r] = 1 << r;
        }
        for c in 0..d {
            let bit = 1u8 << c;
            let p = (c..d).find(|&r| a[r] & bit != 0)?;
            a.swap(c, p);
            inv.swap(c, p);
            for r in 0..d {
                if r != c && a[r] & bit != 0 {
                    a[r] ^= a[c];
                    inv[r] ^= inv[c];
                }
            }
        }
        Some(BitMatrix::from_rows(d, &inv[..d]))
    }

    /// First column as a vector.
    #[inline]
    pub fn first_column(&self) -> u8 {
        self.column(0)
    }

    /// Columns `2..=d` in the standard-basis bit layout. The first column is
    /// not part of the code.
    pub fn tail_code(&self) -> u32 {
        let d = self.dim();
        let mut code = 0u32;
        for c in 2..=d {
            for r in 1..=d {
                if self.row(r - 1) >> (c - 1) & 1 == 1 {
                    code |= 1 << (d * (d - c) + (d - r));
                }
            }
        }
        code
    }

    /// Inverse of [`tail_code`](Self::tail_code) with an explicit first column.
    pub fn from_parts(dim: usize, first_column: u8, code: u32) -> Result<BitMatrix> {
        check_dim(dim)?;
        let bits = (dim * (dim - 1)) as u32;
        if (code as u64) >> bits != 0 {
            return Err(Error::CodeOutOfRange {
                code: code as u64,
                bits,
            });
        }
        Ok(Self::from_parts_unchecked(dim, first_column, code))
    }

    /// From row-packed bits as returned by [`packed`](Self::packed).
    #[inline]
    pub(crate) fn from_packed(dim: usize, bits: u64) -> BitMatrix {
        BitMatrix {
            dim: dim as u8,
            bits,
        }
    }

    #[inline]
    pub(crate) fn from_parts_unchecked(dim: usize, first_column: u8, code: u32) -> BitMatrix {
        let mut rows = [0u8; MAX_DIM];
        for (r, row) in rows.iter_mut().enumerate().take(dim) {
            *row = first_column >> r & 1;
        }
        let mut rest = code;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let r = dim - j % dim;
            let c = dim - j / dim;
            rows[r - 1] |= 1 << (c - 1);
        }
        let mut m = BitMatrix::zero(dim);
        m.bits = rows[..dim]
            .iter()
            .enumerate()
            .fold(0u64, |acc, (r, &row)| acc | (row as u64) << (8 * r));
        m
    }
}

impl Add for BitMatrix {
    type Output = BitMatrix;

    fn add(self, rhs: BitMatrix) -> BitMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        BitMatrix {
            dim: self.dim,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl Mul for BitMatrix {
    type Output = BitMatrix;

    fn mul(self, rhs: BitMatrix) -> BitMatrix {
        self.checked_mul(&rhs).expect("dimension mismatch")
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix[")?;
        for r in 0..self.dim() {
            if r > 0 {
                write!(f, "/")?;
            }
            for c in 0..self.dim() {
                write!(f, "{}", self.row(r) >> c & 1)?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Display for BitMatrix {
    /// One line per row, entries as `0`/`1` separated by spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim() {
            let line: Vec<&str> = (0..self.dim())
                .map(|c| if self.row(r) >> c & 1 == 1 { "1" } else { "0" })
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// A standard-basis matrix `A_index` in encoded form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedMatrix {
    pub index: usize,
    pub code: u32,
}

pub fn decode_matrix(e: EncodedMatrix, dim: usize) -> Result<BitMatrix> {
    check_dim(dim)?;
    if e.index < 1 || e.index > dim {
        return Err(Error::IndexOutOfRange {
            index: e.index,
            dim,
        });
    }
    BitMatrix::from_parts(dim, 1 << (e.index - 1), e.code)
}

pub fn encode_matrix(m: &BitMatrix, index: usize) -> Result<EncodedMatrix> {
    if index < 1 || index > m.dim() {
        return Err(Error::IndexOutOfRange {
            index,
            dim: m.dim(),
        });
    }
    if m.first_column() != 1 << (index - 1) {
        return Err(Error::NotStandardForm { expected: index });
    }
    Ok(EncodedMatrix {
        index,
        code: m.tail_code(),
    })
}

/// Companion matrix of a monic polynomial given low-to-high
/// (`coeffs[k]` is the coefficient of `x^k`, `coeffs[d] == 1`).
///
/// Columns `1..d-1` are `e_2..e_d`; column `d` holds `c_0 .. c_{d-1}`.
pub fn companion_matrix(coeffs: &[u8]) -> Result<BitMatrix> {
    let Some(d) = coeffs.len().checked_sub(1) else {
        return Err(Error::NotMonic(0));
    };
    if coeffs[d] != 1 || coeffs.iter().any(|&c| c > 1) {
        return Err(Error::NotMonic(d));
    }
    check_dim(d)?;
    let mut cols = [0u8; MAX_DIM];
    for (c, col) in cols.iter_mut().enumerate().take(d - 1) {
        *col = 1 << (c + 1);
    }
    cols[d - 1] = coeffs[..d]
        .iter()
        .enumerate()
        .fold(0u8, |acc, (k, &c)| acc | c << k);
    Ok(BitMatrix::from_columns(d, &cols[..d]))
}

/// Companion matrix of a polynomial given as a bit mask (bit `k` = coefficient of `x^k`).
pub fn companion_from_mask(poly: u32) -> Result<BitMatrix> {
    let deg = 31 - poly.leading_zeros() as usize;
    let coeffs: Vec<u8> = (0..=deg).map(|k| (poly >> k & 1) as u8).collect();
    companion_matrix(&coeffs)
}

/// Parses one line of a tuple file: whitespace-free runs of decimal
/// integers separated by single spaces. Returns `None` for comments and
/// blank lines.
pub fn parse_tuple_line(line: &str, line_no: usize) -> Result<Option<Vec<u32>>> {
    let trimmed = line.trim_end_matches(['\r', '\n']);
    if trimmed.starts_with('#') || trimmed.trim().is_empty() {
        return Ok(None);
    }
    let mut out = Vec::new();
    for (k, field) in trimmed.split(' ').enumerate() {
        let value: u32 = field.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!(
                "field {} ({:?}) is not a non-negative integer",
                k + 1,
                field
            ),
        })?;
        out.push(value);
    }
    Ok(Some(out))
}

/// Reads a tuple file. Every data line must hold `dim - 1` codes.
pub fn read_tuples(reader: impl BufRead, dim: usize) -> Result<Vec<Vec<u32>>> {
    check_dim(dim)?;
    let mut tuples = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(t) = parse_tuple_line(&line, k + 1)? {
            if t.len() != dim - 1 {
                return Err(Error::Parse {
                    line: k + 1,
                    msg: format!("expected {} integers, found {}", dim - 1, t.len()),
                });
            }
            tuples.push(t);
        }
    }
    Ok(tuples)
}

pub fn write_tuples(mut w: impl Write, tuples: &[Vec<u32>]) -> Result<()> {
    for t in tuples {
        let line: Vec<String> = t.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cols(m: &BitMatrix) -> Vec<u8> {
        (0..m.dim()).map(|c| m.column(c)).collect()
    }

    const E: [u8; 6] = [1, 2, 4, 8, 16, 32];

    #[test]
    fn identity_and_zero() {
        assert!(BitMatrix::identity(6).is_invertible());
        assert!(!BitMatrix::zero(6).is_invertible());
        assert_eq!(BitMatrix::identity(6).rank(), 6);
        assert_eq!(BitMatrix::zero(6).rank(), 0);
    }

    #[test]
    fn decode_plane_one_a2() {
        let m = decode_matrix(
            EncodedMatrix {
                index: 2,
                code: 135274593,
            },
            6,
        )
        .unwrap();
        assert_eq!(cols(&m), vec![E[1], E[2], E[3], E[4], E[5], E[0] | E[5]]);
        assert!(m.is_invertible());
    }

    #[test]
    fn decode_zero_and_top_bit() {
        let m = decode_matrix(EncodedMatrix { index: 3, code: 0 }, 6).unwrap();
        assert_eq!(cols(&m), vec![E[2], 0, 0, 0, 0, 0]);
        let m = decode_matrix(
            EncodedMatrix {
                index: 2,
                code: 1 << 29,
            },
            6,
        )
        .unwrap();
        assert_eq!(cols(&m), vec![E[1], E[0], 0, 0, 0, 0]);
        assert!(m.entry(1, 2));
    }

    #[test]
    fn decode_rejects_wide_codes() {
        assert!(matches!(
            decode_matrix(
                EncodedMatrix {
                    index: 2,
                    code: 1 << 30
                },
                6
            ),
            Err(Error::CodeOutOfRange { .. })
        ));
        assert!(decode_matrix(
            EncodedMatrix {
                index: 2,
                code: 1 << 12
            },
            4
        )
        .is_err());
    }

    #[test]
    fn encode_round_trip_fixture_values() {
        let m = decode_matrix(
            EncodedMatrix {
                index: 2,
                code: 135274593,
            },
            6,
        )
        .unwrap();
        assert_eq!(encode_matrix(&m, 2).unwrap().code, 135274593);
        let m = decode_matrix(
            EncodedMatrix {
                index: 6,
                code: 1021850782,
            },
            6,
        )
        .unwrap();
        assert_eq!(encode_matrix(&m, 6).unwrap().code, 1021850782);
    }

    #[test]
    fn encode_checks_first_column() {
        let id = BitMatrix::identity(6);
        assert!(encode_matrix(&id, 1).is_ok());
        assert!(matches!(
            encode_matrix(&id, 2),
            Err(Error::NotStandardForm { expected: 2 })
        ));
    }

    #[test]
    fn companion_examples() {
        let c = companion_matrix(&[1, 1, 1]).unwrap();
        assert_eq!(c, BitMatrix::from_rows(2, &[0b10, 0b11]));
        let c = companion_from_mask(0b1000011).unwrap();
        assert_eq!(cols(&c), vec![E[1], E[2], E[3], E[4], E[5], E[0] | E[1]]);
        let c = companion_from_mask(0b1101101).unwrap();
        assert_eq!(
            cols(&c),
            vec![E[1], E[2], E[3], E[4], E[5], E[0] | E[2] | E[3] | E[5]]
        );
        assert!(matches!(
            companion_matrix(&[1, 1, 0]),
            Err(Error::NotMonic(2))
        ));
    }

    #[test]
    fn companion_invertible_iff_constant_term() {
        for d in 2..=6 {
            for low in 0u32..(1 << d) {
                let c = companion_from_mask(1 << d | low).unwrap();
                assert_eq!(c.is_invertible(), low & 1 == 1, "poly {:b}", 1 << d | low);
            }
        }
    }

    #[test]
    fn ring_operations() {
        let a = decode_matrix(
            EncodedMatrix {
                index: 3,
                code: 67639409,
            },
            6,
        )
        .unwrap();
        let b = decode_matrix(
            EncodedMatrix {
                index: 4,
                code: 33954937,
            },
            6,
        )
        .unwrap();
        assert!((a + a).is_zero());
        assert_eq!(BitMatrix::identity(6) * a, a);
        assert_eq!(a * BitMatrix::identity(6), a);
        assert!((a + b).is_invertible());
        assert!(matches!(
            a.checked_add(&BitMatrix::identity(4)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(a.checked_mul(&BitMatrix::identity(5)).is_err());
    }

    #[test]
    fn inverse_is_inverse() {
        let a = decode_matrix(
            EncodedMatrix {
                index: 2,
                code: 135274593,
            },
            6,
        )
        .unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a * inv, BitMatrix::identity(6));
        assert!(BitMatrix::zero(3).inverse().is_none());
    }

    /// Determinant over GF(2) by cofactor expansion along the first row.
    fn det_cofactor(rows: &[Vec<u8>]) -> u8 {
        let n = rows.len();
        if n == 1 {
            return rows[0][0];
        }
        let mut det = 0u8;
        for c in 0..n {
            if rows[0][c] == 0 {
                continue;
            }
            let minor: Vec<Vec<u8>> = rows[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != c)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            det ^= det_cofactor(&minor);
        }
        det
    }

    #[test]
    fn invertibility_matches_cofactor_oracle_for_all_4x4() {
        for packed in 0u32..(1 << 16) {
            let rows: Vec<u8> = (0..4).map(|r| (packed >> (4 * r) & 0xf) as u8).collect();
            let m = BitMatrix::from_rows(4, &rows);
            let grid: Vec<Vec<u8>> = rows
                .iter()
                .map(|&row| (0..4).map(|c| row >> c & 1).collect())
                .collect();
            assert_eq!(m.is_invertible(), det_cofactor(&grid) == 1, "{m:?}");
            assert_eq!(m.is_invertible(), m.rank() == 4);
        }
    }

    #[test]
    fn tuple_lines() {
        assert_eq!(
            parse_tuple_line("1 2 3 4 5", 1).unwrap(),
            Some(vec![1, 2, 3, 4, 5])
        );
        assert_eq!(parse_tuple_line("# comment", 1).unwrap(), None);
        assert!(parse_tuple_line("1  2", 3).is_err());
        assert!(parse_tuple_line("1 x", 3).is_err());
        let text = "# header\n135274593 67639409 33954937 25632381 566730623\n";
        let t = read_tuples(text.as_bytes(), 6).unwrap();
        assert_eq!(t.len(), 1);
        assert!(read_tuples("1 2 3 4\n".as_bytes(), 6).is_err());
        let mut out = Vec::new();
        write_tuples(&mut out, &t).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "135274593 67639409 33954937 25632381 566730623\n"
        );
    }

    proptest! {
        #[test]
        fn decode_encode_round_trip(code in 0u32..(1 << 30), index in 1usize..=6) {
            let m = decode_matrix(EncodedMatrix { index, code }, 6).unwrap();
            prop_assert_eq!(m.first_column(), 1 << (index - 1));
            prop_assert_eq!(encode_matrix(&m, index).unwrap(), EncodedMatrix { index, code });
        }

        #[test]
        fn each_code_bit_sets_one_entry(j in 0usize..30) {
            let m = decode_matrix(EncodedMatrix { index: 1, code: 1 << j }, 6).unwrap();
            let extra = m + BitMatrix::from_columns(6, &[1, 0, 0, 0, 0, 0]);
            prop_assert_eq!(extra.packed().count_ones(), 1);
            prop_assert!(extra.entry(6 - j % 6, 6 - j / 6));
        }

        #[test]
        fn product_is_associative_and_matches_apply(a in any::<u64>(), b in any::<u64>(), v in 0u8..64) {
            let mask = 0x3f3f_3f3f_3f3fu64;
            let ma = BitMatrix::from_rows(6, &(0..6).map(|r| ((a & mask) >> (8 * r)) as u8).collect::<Vec<_>>());
            let mb = BitMatrix::from_rows(6, &(0..6).map(|r| ((b & mask) >> (8 * r)) as u8).collect::<Vec<_>>());
            prop_assert_eq!((ma * mb).apply(v), ma.apply(mb.apply(v)));
            prop_assert_eq!(ma.transpose().transpose(), ma);
            prop_assert_eq!((ma * mb).transpose(), mb.transpose() * ma.transpose());
        }
    }
}
