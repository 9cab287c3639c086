//! Multiplication rules written over `GF(8)^2`, `GF(4)^3` or `GF(64)`, and
//! their flattening to GF(2) multiplication tables.
//!
//! An element of `F^n` is flattened coordinate-major, then by power of `j`:
//! bit `s·k + i` of the packed vector is the coefficient of `j^i` in
//! coordinate `s` (0-based), where `k = [F : GF(2)]`.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::is_isotopic;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::semifield::{presemifield_to_semifield, Cube, SemifieldTable};

const APPENDIX_RULES: &str = include_str!("../fixtures/appendix_rules.txt");

/// `GF(2^k)` presented as `GF(2)[j]` modulo a fixed primitive trinomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    /// `j^2 + j + 1 = 0`
    Gf4,
    /// `j^3 + j + 1 = 0`
    Gf8,
    /// `j^6 + j + 1 = 0`
    Gf64,
}

impl Field {
    pub fn degree(self) -> u32 {
        match self {
            Field::Gf4 => 2,
            Field::Gf8 => 3,
            Field::Gf64 => 6,
        }
    }

    /// Defining polynomial, bit `i` = coefficient of `j^i`.
    pub fn modulus(self) -> u16 {
        match self {
            Field::Gf4 => 0b111,
            Field::Gf8 => 0b1011,
            Field::Gf64 => 0b100_0011,
        }
    }

    pub fn order(self) -> u32 {
        1 << self.degree()
    }

    fn mask(self) -> u8 {
        (self.order() - 1) as u8
    }

    pub fn tag(self) -> &'static str {
        match self {
            Field::Gf4 => "gf4",
            Field::Gf8 => "gf8",
            Field::Gf64 => "gf64",
        }
    }

    pub fn element(self, value: u8) -> Result<FieldElement> {
        if value & !self.mask() != 0 {
            return Err(Error::CodeOutOfRange {
                code: value as u64,
                bits: self.degree(),
            });
        }
        Ok(FieldElement { field: self, value })
    }

    pub fn zero(self) -> FieldElement {
        FieldElement {
            field: self,
            value: 0,
        }
    }

    pub fn one(self) -> FieldElement {
        FieldElement {
            field: self,
            value: 1,
        }
    }

    /// The generator `j`.
    pub fn j(self) -> FieldElement {
        FieldElement {
            field: self,
            value: 0b10,
        }
    }

    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.order()).map(move |v| FieldElement {
            field: self,
            value: v as u8,
        })
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gf4" => Ok(Field::Gf4),
            "gf8" => Ok(Field::Gf8),
            "gf64" => Ok(Field::Gf64),
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("unknown field {s:?}"),
            }),
        }
    }
}

/// A polynomial in `j` of degree below `[F : GF(2)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    value: u8,
}

impl FieldElement {
    pub fn field(self) -> Field {
        self.field
    }

    /// Coefficient bits, bit `i` for `j^i`.
    pub fn value(self) -> u8 {
        self.value
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: FieldElement) {
        assert_eq!(self.field, other.field, "operands from different fields");
    }

    fn product(self, other: FieldElement) -> FieldElement {
        self.same_field(other);
        let k = self.field.degree();
        let mut acc: u16 = 0;
        for i in 0..k {
            if other.value >> i & 1 == 1 {
                acc ^= (self.value as u16) << i;
            }
        }
        let m = self.field.modulus();
        for i in (k..2 * k - 1).rev() {
            if acc >> i & 1 == 1 {
                acc ^= m << (i - k);
            }
        }
        FieldElement {
            field: self.field,
            value: acc as u8,
        }
    }

    pub fn pow(self, mut e: u64) -> FieldElement {
        let mut base = self;
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// `x^(2^k)`.
    pub fn frobenius_power(self, k: u32) -> FieldElement {
        (0..k % self.field.degree()).fold(self, |x, _| x.mul(x))
    }

    pub fn inverse(self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(self.pow(self.field.order() as u64 - 2))
    }

    /// Multiplicative order; `None` for zero.
    pub fn order(self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let one = self.field.one();
        let mut x = self;
        let mut n = 1;
        while x != one {
            x = x.mul(self);
            n += 1;
        }
        Some(n)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        self.same_field(rhs);
        FieldElement {
            field: self.field,
            value: self.value ^ rhs.value,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.product(rhs)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value == 0 {
            return f.write_str("0");
        }
        let mut first = true;
        for i in (0..self.field.degree()).rev() {
            if self.value >> i & 1 == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => f.write_str("1")?,
                1 => f.write_str("j")?,
                _ => write!(f, "j^{i}")?,
            }
        }
        Ok(())
    }
}

/// `j^coeff · x_s^(2^x_frob) · a_t^(2^a_frob)`, with 0-based `s = x` and `t = a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: u32,
    pub x: u8,
    pub x_frob: u32,
    pub a: u8,
    pub a_frob: u32,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "j^{}*x_{}^(2^{})*a_{}^(2^{})",
            self.coeff,
            self.x + 1,
            self.x_frob,
            self.a + 1,
            self.a_frob
        )
    }
}

/// A biadditive product `(x, a) ↦ x·a` on `F^n`, one term list per output
/// coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicationRule {
    pub label: String,
    /// 1: `GF(8)^2`, 2: `GF(4)^3`, 3: `GF(64)`.
    pub kind: u8,
    pub field: Field,
    pub coords: Vec<Vec<Term>>,
}

impl MultiplicationRule {
    /// `(arity, field)` of rule type `kind`.
    pub fn shape(kind: u8) -> Option<(usize, Field)> {
        match kind {
            1 => Some((2, Field::Gf8)),
            2 => Some((3, Field::Gf4)),
            3 => Some((1, Field::Gf64)),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        self.coords.len()
    }

    /// Dimension over GF(2).
    pub fn dim(&self) -> usize {
        self.arity() * self.field.degree() as usize
    }

    /// Field multiplication of `GF(64)` as a type 3 rule.
    pub fn field_product() -> Self {
        MultiplicationRule {
            label: "GF64".into(),
            kind: 3,
            field: Field::Gf64,
            coords: vec![vec![Term {
                coeff: 0,
                x: 0,
                x_frob: 0,
                a: 0,
                a_frob: 0,
            }]],
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        let (n, field) = Self::shape(self.kind)
            .ok_or_else(|| bad(format!("{}: unknown type {}", self.label, self.kind)))?;
        if field != self.field || n != self.arity() {
            return Err(bad(format!(
                "{}: type {} needs {} coordinates over {}",
                self.label, self.kind, n, field
            )));
        }
        for t in self.coords.iter().flatten() {
            if t.x as usize >= n || t.a as usize >= n {
                return Err(bad(format!(
                    "{}: coordinate index out of range",
                    self.label
                )));
            }
        }
        Ok(())
    }

    pub fn unpack(&self, v: u8) -> Vec<FieldElement> {
        let k = self.field.degree();
        (0..self.arity())
            .map(|s| FieldElement {
                field: self.field,
                value: (v >> (s as u32 * k)) & self.field.mask(),
            })
            .collect()
    }

    pub fn pack(&self, xs: &[FieldElement]) -> u8 {
        let k = self.field.degree();
        xs.iter()
            .enumerate()
            .fold(0, |acc, (s, e)| acc | e.value << (s as u32 * k))
    }

    pub fn eval(&self, x: &[FieldElement], a: &[FieldElement]) -> Vec<FieldElement> {
        let j = self.field.j();
        self.coords
            .iter()
            .map(|terms| {
                terms.iter().fold(self.field.zero(), |acc, t| {
                    acc + j.pow(t.coeff as u64)
                        * x[t.x as usize].frobenius_power(t.x_frob)
                        * a[t.a as usize].frobenius_power(t.a_frob)
                })
            })
            .collect()
    }

    /// The product on flattened vectors.
    pub fn eval_packed(&self, x: u8, a: u8) -> u8 {
        self.pack(&self.eval(&self.unpack(x), &self.unpack(a)))
    }

    pub fn cube(&self) -> Cube {
        Cube::from_bilinear(self.dim(), |x, a| self.eval_packed(x, a))
    }
}

impl fmt::Display for MultiplicationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.label, self.kind, self.field)?;
        for terms in &self.coords {
            f.write_str("=")?;
            if terms.is_empty() {
                f.write_str(" 0")?;
            }
            for (i, t) in terms.iter().enumerate() {
                let sep = if i == 0 { " " } else { " + " };
                write!(f, "{sep}{t}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn parse_index(s: &str, prefix: char) -> Option<(u8, u32)> {
    let rest = s.strip_prefix(prefix)?.strip_prefix('_')?;
    let (idx, frob) = match rest.split_once('^') {
        Some((i, e)) => {
            let e = e
                .strip_prefix('(')
                .and_then(|e| e.strip_suffix(')'))
                .unwrap_or(e);
            let p = match e.strip_prefix("2^") {
                Some(p) => p.parse().ok()?,
                None => {
                    let v: u32 = e.parse().ok()?;
                    if !v.is_power_of_two() {
                        return None;
                    }
                    v.trailing_zeros()
                }
            };
            (i, p)
        }
        None => (rest, 0),
    };
    let idx: u8 = idx.parse().ok()?;
    Some((idx.checked_sub(1)?, frob))
}

fn parse_term(s: &str) -> Option<Term> {
    let mut coeff = 0;
    let mut x = None;
    let mut a = None;
    for factor in s.split('*') {
        if factor == "1" {
            continue;
        }
        if factor == "j" {
            coeff += 1;
        } else if let Some(e) = factor.strip_prefix("j^") {
            coeff += e.parse::<u32>().ok()?;
        } else if factor.starts_with('x') && x.is_none() {
            x = Some(parse_index(factor, 'x')?);
        } else if factor.starts_with('a') && a.is_none() {
            a = Some(parse_index(factor, 'a')?);
        } else {
            return None;
        }
    }
    let (x, x_frob) = x?;
    let (a, a_frob) = a?;
    Some(Term {
        coeff,
        x,
        x_frob,
        a,
        a_frob,
    })
}

/// Parses a rule file: records `LABEL TYPE FIELD` followed by one
/// `= term + term ...` line per output coordinate. `#` starts a comment.
pub fn parse_rules(text: &str) -> Result<Vec<MultiplicationRule>> {
    let mut rules: Vec<MultiplicationRule> = Vec::new();
    let mut starts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: n, msg };
        if let Some(body) = line.strip_prefix('=') {
            let rule = rules
                .last_mut()
                .ok_or_else(|| err("coordinate before any header".into()))?;
            let body: String = body.chars().filter(|c| !c.is_whitespace()).collect();
            let terms = if body == "0" {
                Vec::new()
            } else {
                body.split('+')
                    .map(|t| parse_term(t).ok_or_else(|| err(format!("bad term {t:?}"))))
                    .collect::<Result<_>>()?
            };
            rule.coords.push(terms);
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let [label, kind, field] = f[..] else {
            return Err(err("expected LABEL TYPE FIELD".into()));
        };
        rules.push(MultiplicationRule {
            label: label.to_string(),
            kind: kind
                .parse()
                .map_err(|_| err(format!("bad type {kind:?}")))?,
            field: field
                .parse()
                .map_err(|_| err(format!("bad field {field:?}")))?,
            coords: Vec::new(),
        });
        starts.push(n);
    }
    for (r, n) in rules.iter().zip(starts) {
        r.check().map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse { line: n, msg },
            e => e,
        })?;
    }
    Ok(rules)
}

/// Rules of the representatives XIV..LXXX.
pub fn appendix_rules() -> Vec<MultiplicationRule> {
    parse_rules(APPENDIX_RULES).expect("embedded fixture")
}

pub fn appendix_rule(label: &str) -> Option<MultiplicationRule> {
    appendix_rules().into_iter().find(|r| r.label == label)
}

/// The semifield obtained from the presemifield of `r` by its unit isotope.
/// A zero divisor is reported as [`Error::ZeroDivisor`].
pub fn rule_to_table(r: &MultiplicationRule) -> Result<SemifieldTable> {
    r.check()?;
    presemifield_to_semifield(&r.cube())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AppendixOutcome {
    Isotopic,
    NotIsotopic,
    ZeroDivisor { x: u8, y: u8 },
    MissingRule,
    MissingRepresentative,
    Invalid { msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub label: String,
    #[serde(flatten)]
    pub outcome: AppendixOutcome,
}

impl AppendixReport {
    pub fn passed(&self) -> bool {
        self.outcome == AppendixOutcome::Isotopic
    }
}

/// Compares `rule` with the tabulated representative of the same label.
pub fn check_rule(rule: &MultiplicationRule) -> AppendixReport {
    let outcome = match fixtures::representative(&rule.label) {
        None => AppendixOutcome::MissingRepresentative,
        Some(rep) => match (rule_to_table(rule), rep.table()) {
            (Ok(t), Ok(target)) => {
                if is_isotopic(&t, &target).is_some() {
                    AppendixOutcome::Isotopic
                } else {
                    AppendixOutcome::NotIsotopic
                }
            }
            (Err(Error::ZeroDivisor { x, y }), _) => AppendixOutcome::ZeroDivisor { x, y },
            (Err(e), _) | (_, Err(e)) => AppendixOutcome::Invalid { msg: e.to_string() },
        },
    };
    AppendixReport {
        label: rule.label.clone(),
        outcome,
    }
}

pub fn check_appendix_entry(label: &str) -> AppendixReport {
    match appendix_rule(label) {
        Some(r) => check_rule(&r),
        None => AppendixReport {
            label: label.to_string(),
            outcome: AppendixOutcome::MissingRule,
        },
    }
}

/// True iff the rule of `label` yields a semifield isotopic to the tabulated
/// representative.
pub fn verify_appendix_entry(label: &str) -> bool {
    check_appendix_entry(label).passed()
}

/// Reports for `labels`, in order; all rules when `labels` is `None`.
pub fn check_appendix(labels: Option<&[String]>) -> Vec<AppendixReport> {
    let rules = appendix_rules();
    let wanted: Vec<String> = match labels {
        Some(ls) => ls.to_vec(),
        None => rules.iter().map(|r| r.label.clone()).collect(),
    };
    wanted
        .par_iter()
        .map(|l| match rules.iter().find(|r| &r.label == l) {
            Some(r) => check_rule(r),
            None => AppendixReport {
                label: l.clone(),
                outcome: AppendixOutcome::MissingRule,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::isomorphisms;
    use crate::semifield::nuclei_and_center;

    #[test]
    fn defining_relations() {
        let j4 = Field::Gf4.j();
        assert_eq!(j4 * j4, j4 + Field::Gf4.one());
        let j8 = Field::Gf8.j();
        assert_eq!(j8.pow(3), j8 + Field::Gf8.one());
        let j64 = Field::Gf64.j();
        assert_eq!(j64.pow(6), j64 + Field::Gf64.one());
    }

    #[test]
    fn j_is_primitive() {
        // Order divides 2^k - 1; rule out every maximal proper divisor.
        for (field, primes) in [
            (Field::Gf4, &[3u64][..]),
            (Field::Gf8, &[7]),
            (Field::Gf64, &[3, 7]),
        ] {
            let n = field.order() as u64 - 1;
            let j = field.j();
            assert_eq!(j.pow(n), field.one());
            for p in primes {
                assert_ne!(j.pow(n / p), field.one(), "{field}");
            }
            assert_eq!(j.order(), Some(n as u32));
        }
    }

    #[test]
    fn inverses_and_frobenius() {
        for field in [Field::Gf4, Field::Gf8, Field::Gf64] {
            assert!(matches!(field.zero().inverse(), Err(Error::ZeroElement)));
            let k = field.degree();
            for x in field.elements() {
                if !x.is_zero() {
                    assert_eq!(x * x.inverse().unwrap(), field.one());
                }
                assert_eq!(x.frobenius_power(k), x);
                for y in field.elements() {
                    assert_eq!(
                        (x + y).frobenius_power(1),
                        x.frobenius_power(1) + y.frobenius_power(1)
                    );
                    assert_eq!(
                        (x * y).frobenius_power(1),
                        x.frobenius_power(1) * y.frobenius_power(1)
                    );
                }
            }
        }
    }

    #[test]
    fn element_range_is_checked() {
        assert!(Field::Gf4.element(0b100).is_err());
        assert_eq!(Field::Gf8.element(0b101).unwrap().to_string(), "j^2 + 1");
    }

    #[test]
    fn corpus_parses_with_expected_shapes() {
        let rules = appendix_rules();
        assert_eq!(rules.len(), 67);
        for (i, r) in rules.iter().enumerate() {
            assert_eq!(r.label, fixtures::label(i + 14));
            assert_eq!(r.dim(), 6, "{}", r.label);
        }
        let kinds = |k| rules.iter().filter(|r| r.kind == k).count();
        assert_eq!((kinds(1), kinds(2), kinds(3)), (5, 53, 9));
    }

    #[test]
    fn display_round_trips() {
        for r in appendix_rules().iter().take(5) {
            let again = parse_rules(&r.to_string()).unwrap();
            assert_eq!(again, vec![r.clone()]);
        }
    }

    #[test]
    fn malformed_records_are_rejected() {
        assert!(parse_rules("= j*x_1*a_1\n").is_err());
        assert!(parse_rules("X 3 gf64\n= j*x_1*b_1\n").is_err());
        assert!(parse_rules("X 3 gf64\n= x_2*a_1\n").is_err());
        assert!(parse_rules("X 1 gf64\n= x_1*a_1\n").is_err());
        let r = parse_rules("X 3 gf64\n= j^2 * x_1^2 * a_1^(2^3)\n").unwrap();
        assert_eq!(
            r[0].coords[0][0],
            Term {
                coeff: 2,
                x: 0,
                x_frob: 1,
                a: 0,
                a_frob: 3
            }
        );
    }

    #[test]
    fn field_rule_is_the_field() {
        let t = rule_to_table(&MultiplicationRule::field_product()).unwrap();
        assert_eq!(t.identity(), 1);
        let plane_one = fixtures::representative("I").unwrap().table().unwrap();
        assert_eq!(isomorphisms(&t, &plane_one).len(), 6);
    }

    #[test]
    fn flattening_is_biadditive_at_gf4_cubed() {
        let r = appendix_rules().into_iter().find(|r| r.kind == 2).unwrap();
        let prod: Vec<u8> = (0..64u8)
            .flat_map(|x| (0..64u8).map(move |a| (x, a)))
            .map(|(x, a)| r.eval_packed(x, a))
            .collect();
        let at = |x: u8, a: u8| prod[x as usize * 64 + a as usize];
        for x in 0..64u8 {
            for y in 0..64u8 {
                for a in 0..64u8 {
                    assert_eq!(at(x ^ y, a), at(x, a) ^ at(y, a));
                    assert_eq!(at(a, x ^ y), at(a, x) ^ at(a, y));
                }
            }
        }
    }

    #[test]
    fn rule_fourteen_nuclei() {
        let t = rule_to_table(&appendix_rule("XIV").unwrap()).unwrap();
        assert_eq!(nuclei_and_center(&t).0, [2, 2, 2, 2, 4]);
    }
}
