//! Embedded reference data for the 80 semifield planes of order 64.

use std::fmt;

use serde::Serialize;

use crate::classify::{Classification, OrbitProfile, SaDecomposition};
use crate::error::{Error, Result};
use crate::semifield::{SemifieldTable, StandardBasis, ZnTuple};

const KNOWN_PLANES: &str = include_str!("../fixtures/known_planes.txt");
const TABLE4: &str = include_str!("../fixtures/table4.txt");
const PROPERTIES: &str = include_str!("../fixtures/properties.txt");
const TABLE2: &str = include_str!("../fixtures/table2.txt");

/// A labelled standard basis `A2..Ad` (`A1 = I` implied).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representative {
    pub label: String,
    /// `|Aut|` of the representative when listed.
    pub aut: Option<u32>,
    pub codes: Vec<u32>,
}

impl Representative {
    pub fn basis(&self) -> Result<StandardBasis> {
        StandardBasis::from_codes(&self.codes)
    }

    pub fn table(&self) -> Result<SemifieldTable> {
        Ok(self.basis()?.table())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneProperties {
    pub label: String,
    pub at_order: u64,
    pub group: String,
    /// `L_x`, `L_∞`, `L_y`.
    pub orbits: [OrbitProfile; 3],
    pub sa: SaDecomposition,
    pub zn: ZnTuple,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionRow {
    pub label: String,
    /// Cells for `1, (12), (13), (123), (23), (132)`.
    pub cells: [String; 6],
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_reps(text: &str, with_aut: bool) -> Result<Vec<Representative>> {
    data_lines(text)
        .map(|(n, l)| {
            let mut it = l.split_whitespace();
            let label = it.next().ok_or_else(|| parse_err(n, "empty"))?.to_string();
            let aut = if with_aut {
                Some(
                    it.next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(n, "bad |Aut|"))?,
                )
            } else {
                None
            };
            let codes = it
                .map(|s| {
                    s.parse()
                        .map_err(|_| parse_err(n, format!("bad code {s:?}")))
                })
                .collect::<Result<Vec<u32>>>()?;
            if codes.len() != 5 {
                return Err(parse_err(n, "expected five codes"));
            }
            Ok(Representative { label, aut, codes })
        })
        .collect()
}

/// Representatives of the 13 previously known planes, I..XIII.
pub fn known_planes() -> Vec<Representative> {
    parse_reps(KNOWN_PLANES, true).expect("embedded fixture")
}

/// Representatives of the new planes, XIV..LXXX.
pub fn new_planes() -> Vec<Representative> {
    parse_reps(TABLE4, false).expect("embedded fixture")
}

/// All 80 representatives, I..LXXX.
pub fn all_representatives() -> Vec<Representative> {
    let mut v = known_planes();
    v.extend(new_planes());
    v
}

pub fn representative(label: &str) -> Option<Representative> {
    all_representatives().into_iter().find(|r| r.label == label)
}

pub fn properties() -> Vec<PlaneProperties> {
    data_lines(PROPERTIES)
        .map(|(n, l)| {
            let f: Vec<&str> = l.split('|').map(str::trim).collect();
            if f.len() != 8 {
                return Err(parse_err(n, "expected eight fields"));
            }
            let zn: Vec<u32> = f[7]
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| parse_err(n, "bad ZN")))
                .collect::<Result<_>>()?;
            Ok(PlaneProperties {
                label: f[0].to_string(),
                at_order: f[1].parse().map_err(|_| parse_err(n, "bad |At|"))?,
                group: f[2].to_string(),
                orbits: [f[3].parse()?, f[4].parse()?, f[5].parse()?],
                sa: SaDecomposition::parse(f[6]).ok_or_else(|| parse_err(n, "bad S/A"))?,
                zn: ZnTuple(zn.try_into().map_err(|_| parse_err(n, "ZN needs five"))?),
            })
        })
        .collect::<Result<_>>()
        .expect("embedded fixture")
}

pub fn plane_properties(label: &str) -> Option<PlaneProperties> {
    properties().into_iter().find(|p| p.label == label)
}

pub fn constructions() -> Vec<ConstructionRow> {
    data_lines(TABLE2)
        .map(|(n, l)| {
            let f: Vec<String> = l.split('\t').map(|s| s.trim().to_string()).collect();
            if f.len() != 7 {
                return Err(parse_err(n, "expected seven fields"));
            }
            Ok(ConstructionRow {
                label: f[0].clone(),
                cells: f[1..].to_vec().try_into().expect("six"),
            })
        })
        .collect::<Result<_>>()
        .expect("embedded fixture")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// A printed value that cannot hold; structural checks passed instead.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub field: String,
    pub expected: String,
    pub computed: String,
    pub status: Status,
}

impl Check {
    fn exact(field: &str, expected: impl fmt::Display, computed: impl fmt::Display) -> Self {
        let (expected, computed) = (expected.to_string(), computed.to_string());
        let status = if expected == computed {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            field: field.to_string(),
            expected,
            computed,
            status,
        }
    }
}

/// Computed properties of one representative against the fixture row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conformance {
    pub label: String,
    pub checks: Vec<Check>,
}

impl Conformance {
    pub fn status(&self) -> Status {
        let all = self.checks.iter().map(|c| c.status);
        if all.clone().any(|s| s == Status::Fail) {
            Status::Fail
        } else if all.clone().any(|s| s == Status::Info) {
            Status::Info
        } else {
            Status::Pass
        }
    }

    pub fn passed(&self) -> bool {
        self.status() != Status::Fail
    }
}

impl fmt::Display for Conformance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.status(), self.label)?;
        for c in &self.checks {
            if c.status == Status::Pass {
                write!(f, " {}={}", c.field, c.computed)?;
            } else {
                write!(
                    f,
                    " {}={} ({}: expected {})",
                    c.field, c.computed, c.status, c.expected
                )?;
            }
        }
        Ok(())
    }
}

/// Orbit profile check. A printed profile that does not cover the `q + 1`
/// points of a line is reported as INFO when the computed one covers them
/// with orbit lengths dividing `|At|`.
fn orbit_check(field: &str, q: u32, at: u64, expected: &OrbitProfile, got: &OrbitProfile) -> Check {
    let mut c = Check::exact(field, expected, got);
    if c.status == Status::Fail && expected.total_points() != q + 1 {
        let sound =
            got.total_points() == q + 1 && got.0.iter().all(|&(_, l)| at.is_multiple_of(l as u64));
        if sound {
            c.status = Status::Info;
        }
    }
    c
}

/// Compares `computed` with the fixture row `props` and, when given, the
/// listed `|Aut|` of the representative.
pub fn conformance(
    props: &PlaneProperties,
    aut: Option<u32>,
    computed: &Classification,
) -> Conformance {
    let r = &computed.record;
    let q = 1u32 << 6;
    let mut checks = vec![
        Check::exact("At", props.at_order, r.at_order),
        Check::exact("SA", &props.sa, &computed.sa),
        Check::exact("ZN", props.zn, ZnTuple(r.zn)),
    ];
    for (k, name) in ["Lx", "Linf", "Ly"].iter().enumerate() {
        checks.push(orbit_check(
            name,
            q,
            r.at_order,
            &props.orbits[k],
            &r.orbits[k],
        ));
    }
    if let Some(a) = aut {
        checks.push(Check::exact("Aut", a, computed.aut_order));
    }
    Conformance {
        label: props.label.clone(),
        checks,
    }
}

/// Roman numeral label of plane `n` (1-based).
pub fn label(n: usize) -> String {
    const TABLE: [(usize, &str); 7] = [
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
    ];
    let mut n = n;
    let mut s = String::new();
    for (v, r) in TABLE {
        while n >= v {
            s.push_str(r);
            n -= v;
        }
    }
    s.push_str(match n {
        4 => "IV",
        3 => "III",
        2 => "II",
        1 => "I",
        _ => "",
    });
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_labels() {
        let reps = all_representatives();
        assert_eq!(reps.len(), 80);
        for (i, r) in reps.iter().enumerate() {
            assert_eq!(r.label, label(i + 1));
        }
        let props = properties();
        assert_eq!(props.len(), 80);
        assert!(props.iter().zip(&reps).all(|(p, r)| p.label == r.label));
        assert_eq!(constructions().len(), 13);
    }

    #[test]
    fn roman_numerals() {
        assert_eq!(label(14), "XIV");
        assert_eq!(label(49), "XLIX");
        assert_eq!(label(80), "LXXX");
    }

    #[test]
    fn every_representative_is_a_standard_basis() {
        for r in all_representatives() {
            assert!(r.basis().is_ok(), "{}", r.label);
        }
    }
}
