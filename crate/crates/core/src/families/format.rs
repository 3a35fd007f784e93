//! The line-oriented family definition format.
//!
//! ```text
//! family B1
//! k 2
//! modulus 1
//! domain all
//! bound m >= 2
//! bound n >= 3*m^2 - 6*m + 3
//! case (0, 0):
//!   u {} = m - 1
//!   p {2} = n + 3/2 * m^3 - 9/2 * m^2 + 2 * m
//! end
//! ```
//!
//! Entries left out of a case block are zero; residue classes without a
//! block are outside the family. Text after `#` is a comment.

use std::fmt::Write as _;

use thiserror::Error;

use super::{
    Bound, BoundVar, DomainPredicate, FamilySpec, Param, ParityClass, Poly, QuasiPolynomial,
};
use crate::configs::{SubsetIndex, MAX_SUBVARIETIES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError {
        line,
        msg: msg.into(),
    }
}

struct Draft {
    name: String,
    k: Option<usize>,
    modulus: Option<u32>,
    parity: Option<ParityClass>,
    bounds: Vec<Bound>,
    /// (param, subset, rm, rn, poly)
    entries: Vec<(Param, SubsetIndex, u32, u32, Poly)>,
    cases: Vec<(u32, u32)>,
}

fn parse_subset(s: &str, k: usize, line: usize) -> Result<SubsetIndex, FormatError> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| err(line, format!("expected a subset like {{1,2}}, found {s:?}")))?;
    let mut out = SubsetIndex::EMPTY;
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let t: usize = part
            .parse()
            .map_err(|_| err(line, format!("bad subvariety index {part:?}")))?;
        if t == 0 || t > k {
            return Err(err(line, format!("subvariety index {t} outside 1..={k}")));
        }
        out = out.union(SubsetIndex::singleton(t));
    }
    Ok(out)
}

fn parse_poly(s: &str, line: usize) -> Result<Poly, FormatError> {
    s.parse().map_err(|e| err(line, format!("{e}")))
}

/// Parses every family in `text`.
pub fn parse_families(text: &str) -> Result<Vec<FamilySpec>, FormatError> {
    let mut out = Vec::new();
    let mut draft: Option<Draft> = None;
    let mut current_case: Option<(u32, u32)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (head, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        let Some(d) = draft.as_mut() else {
            if head != "family" || rest.is_empty() {
                return Err(err(line, "expected `family <name>`"));
            }
            draft = Some(Draft {
                name: rest.to_string(),
                k: None,
                modulus: None,
                parity: None,
                bounds: Vec::new(),
                entries: Vec::new(),
                cases: Vec::new(),
            });
            continue;
        };
        match head {
            "k" => {
                let k: usize = rest.parse().map_err(|_| err(line, "bad k"))?;
                if k > MAX_SUBVARIETIES {
                    return Err(err(line, format!("k={k} exceeds {MAX_SUBVARIETIES}")));
                }
                d.k = Some(k);
            }
            "modulus" => {
                let m: u32 = rest.parse().map_err(|_| err(line, "bad modulus"))?;
                if m == 0 || m > 64 {
                    return Err(err(line, "modulus must be in 1..=64"));
                }
                d.modulus = Some(m);
            }
            "domain" => {
                d.parity = Some(match rest {
                    "all" => ParityClass::All,
                    "nice" => ParityClass::Nice,
                    "ugly" => ParityClass::Ugly,
                    other => return Err(err(line, format!("unknown domain {other:?}"))),
                })
            }
            "bound" => {
                let (var, poly) = rest
                    .split_once(">=")
                    .ok_or_else(|| err(line, "expected `bound m >= ...` or `bound n >= ...`"))?;
                let var = match var.trim() {
                    "m" => BoundVar::M,
                    "n" => BoundVar::N,
                    other => return Err(err(line, format!("bound on unknown variable {other:?}"))),
                };
                d.bounds.push(Bound {
                    var,
                    lower: parse_poly(poly, line)?,
                });
            }
            "case" => {
                let modulus = d
                    .modulus
                    .ok_or_else(|| err(line, "`modulus` must precede cases"))?;
                let inner = rest
                    .strip_suffix(':')
                    .map(str::trim)
                    .and_then(|r| r.strip_prefix('('))
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| err(line, "expected `case (rm, rn):`"))?;
                let (a, b) = inner
                    .split_once(',')
                    .ok_or_else(|| err(line, "expected two residues"))?;
                let rm: u32 = a.trim().parse().map_err(|_| err(line, "bad residue"))?;
                let rn: u32 = b.trim().parse().map_err(|_| err(line, "bad residue"))?;
                if rm >= modulus || rn >= modulus {
                    return Err(err(line, format!("residues must be below {modulus}")));
                }
                if d.cases.contains(&(rm, rn)) {
                    return Err(err(line, format!("duplicate case ({rm}, {rn})")));
                }
                d.cases.push((rm, rn));
                current_case = Some((rm, rn));
            }
            "u" | "v" | "p" => {
                let (rm, rn) =
                    current_case.ok_or_else(|| err(line, "entry outside a case block"))?;
                let k = d.k.ok_or_else(|| err(line, "`k` must precede entries"))?;
                let (subset, poly) = rest
                    .split_once('=')
                    .ok_or_else(|| err(line, "expected `{..} = poly`"))?;
                let param = match head {
                    "u" => Param::U,
                    "v" => Param::V,
                    _ => Param::P,
                };
                let subset = parse_subset(subset, k, line)?;
                if d.entries
                    .iter()
                    .any(|e| e.0 == param && e.1 == subset && (e.2, e.3) == (rm, rn))
                {
                    return Err(err(line, format!("duplicate entry {head} {subset}")));
                }
                d.entries
                    .push((param, subset, rm, rn, parse_poly(poly, line)?));
            }
            "end" => {
                out.push(finish(draft.take().expect("inside a family"), line)?);
                current_case = None;
            }
            other => return Err(err(line, format!("unknown directive {other:?}"))),
        }
    }
    if draft.is_some() {
        return Err(err(text.lines().count(), "missing `end`"));
    }
    Ok(out)
}

fn finish(d: Draft, line: usize) -> Result<FamilySpec, FormatError> {
    let k =
        d.k.ok_or_else(|| err(line, format!("family {} has no `k`", d.name)))?;
    let modulus = d.modulus.ok_or_else(|| err(line, "missing `modulus`"))?;
    let parity = d.parity.ok_or_else(|| err(line, "missing `domain`"))?;
    let domain = DomainPredicate {
        parity,
        bounds: d.bounds,
    };
    let mut spec = FamilySpec::new(d.name, k, domain);
    for which in [Param::U, Param::V, Param::P] {
        for q in spec.param_mut(which).iter_mut() {
            let mut fresh = QuasiPolynomial::new(modulus);
            for &(rm, rn) in &d.cases {
                fresh.set_case(rm, rn, Some(Poly::zero()));
            }
            *q = fresh;
        }
    }
    for (which, subset, rm, rn, poly) in d.entries {
        spec.param_mut(which)[subset.index()].set_case(rm, rn, Some(poly));
    }
    for which in [Param::U, Param::V, Param::P] {
        for q in spec.param_mut(which).iter_mut() {
            *q = q.simplify();
        }
    }
    Ok(spec)
}

/// Renders a family in the definition format.
pub fn emit_family(spec: &FamilySpec) -> String {
    let d = spec.modulus();
    let mut s = String::new();
    let _ = writeln!(s, "family {}", spec.name);
    let _ = writeln!(s, "k {}", spec.k);
    let _ = writeln!(s, "modulus {d}");
    let _ = writeln!(s, "domain {}", spec.domain.parity);
    for b in &spec.domain.bounds {
        let _ = writeln!(s, "bound {b}");
    }
    let refined: Vec<(Param, Vec<QuasiPolynomial>)> = [Param::U, Param::V, Param::P]
        .into_iter()
        .map(|w| (w, spec.param(w).iter().map(|q| q.refine(d)).collect()))
        .collect();
    for rm in 0..d {
        for rn in 0..d {
            let defined = refined
                .iter()
                .all(|(_, qs)| qs.iter().all(|q| q.case(rm, rn).is_some()));
            if !defined {
                continue;
            }
            let _ = writeln!(s, "case ({rm}, {rn}):");
            for (which, qs) in &refined {
                let tag = match which {
                    Param::U => "u",
                    Param::V => "v",
                    Param::P => "p",
                };
                for (idx, q) in qs.iter().enumerate() {
                    let poly = q.case(rm, rn).expect("checked above");
                    if !poly.is_zero() {
                        let _ =
                            writeln!(s, "  {tag} {} = {poly}", SubsetIndex::from_bits(idx as u32));
                    }
                }
            }
        }
    }
    s.push_str("end\n");
    s
}
