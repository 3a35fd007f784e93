//! Certificates: everything needed to rebuild and recheck one rank
//! computation, in a line-oriented text form.
//!
//! ```text
//! prime=127 seed=1738187985
//! config k=1 m=2 n=4
//! I=0 u=1 v=3 p=4
//! I=1 u=2 v=2 p=3
//! subvariety 1: {x_1=0, x_2=0, y_3=0, y_4=0}
//! point I=0 x=[16,110,21] y=[71,96,82,5,125]
//! ...
//! digest=<sha256 of the matrix>
//! matrix=39x44 dim=0 expected=0 verdict=NONDEFECTIVE abundancy=SUPER build_s=0.0004 rank_s=0.00002 attempts=1
//! ```

use std::fmt::{self, Write as _};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::checker::{
    build_jacobian, expected_dim, sample_points, CheckError, DefectVerdict, Outcome,
    ProjectivePointPair,
};
use crate::configs::{
    abundancy, assign_variables, ideal_basis, keyed_fields, validate_shape, Abundancy, ConfigShape,
    SubsetIndex, Variable,
};
use crate::ffrank::{rank_mod_p, DenseMatrix, FieldElem, PrimeField};

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub prime: u32,
    /// Seed that produced `points`.
    pub seed: u64,
    pub shape: ConfigShape,
    /// Defining equations of each `L_t`, `t = 1..=k`.
    pub equations: Vec<Vec<Variable>>,
    pub points: Vec<ProjectivePointPair>,
    pub matrix_rows: u64,
    pub matrix_cols: u64,
    /// Hex SHA-256 of the matrix, see [`matrix_digest`].
    pub digest: String,
    pub verdict: DefectVerdict,
    pub build_seconds: f64,
    pub rank_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    ConstraintViolation { line: usize, msg: String },
}

fn perr(line: usize, msg: impl Into<String>) -> CertError {
    CertError::Parse {
        line,
        msg: msg.into(),
    }
}

/// SHA-256 over the dimensions (u64 little endian) and entries (u16 little
/// endian, row-major).
pub fn matrix_digest(m: &DenseMatrix) -> String {
    let mut h = Sha256::new();
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for chunk in m.entries().chunks(4096) {
        let bytes: Vec<u8> = chunk.iter().flat_map(|e| e.to_le_bytes()).collect();
        h.update(&bytes);
    }
    hex::encode(h.finalize())
}

/// Rounds to four significant digits.
pub fn round_seconds(s: f64) -> f64 {
    if s == 0.0 || !s.is_finite() {
        return 0.0;
    }
    format!("{s:.3e}").parse().unwrap_or(s)
}

fn write_coords(out: &mut String, coords: &[FieldElem]) {
    out.push('[');
    for (i, c) in coords.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{c}");
    }
    out.push(']');
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "prime={} seed={}", self.prime, self.seed)?;
        writeln!(f, "{}", self.shape)?;
        for (t, eqs) in self.equations.iter().enumerate() {
            let list: Vec<String> = eqs.iter().map(|v| format!("{v}=0")).collect();
            writeln!(f, "subvariety {}: {{{}}}", t + 1, list.join(", "))?;
        }
        for pt in &self.points {
            let mut line = format!("point I={} x=", pt.constraint.bits());
            write_coords(&mut line, &pt.x);
            line.push_str(" y=");
            write_coords(&mut line, &pt.y);
            writeln!(f, "{line}")?;
        }
        writeln!(f, "digest={}", self.digest)?;
        let v = &self.verdict;
        writeln!(
            f,
            "matrix={}x{} dim={} expected={} verdict={} abundancy={} build_s={} rank_s={} attempts={}",
            self.matrix_rows,
            self.matrix_cols,
            v.computed_dim,
            v.expected_dim,
            v.outcome,
            v.abundancy,
            self.build_seconds,
            self.rank_seconds,
            v.attempts
        )
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, CertError> {
    s.parse()
        .map_err(|_| perr(line, format!("bad value {s:?}")))
}

fn parse_coords(s: &str, field: &PrimeField, line: usize) -> Result<Vec<FieldElem>, CertError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| perr(line, format!("expected [..], found {s:?}")))?;
    inner
        .split(',')
        .map(|c| {
            let v: u32 = num(c.trim(), line)?;
            if v >= field.modulus() {
                return Err(perr(
                    line,
                    format!("coordinate {v} not reduced mod {}", field.modulus()),
                ));
            }
            Ok(field.elem(v))
        })
        .collect()
}

fn parse_variable(s: &str, line: usize) -> Result<Variable, CertError> {
    let bad = || perr(line, format!("bad equation {s:?}"));
    let name = s.strip_suffix("=0").ok_or_else(bad)?;
    if let Some(i) = name.strip_prefix("x_") {
        Ok(Variable::X(i.parse().map_err(|_| bad())?))
    } else if let Some(j) = name.strip_prefix("y_") {
        Ok(Variable::Y(j.parse().map_err(|_| bad())?))
    } else {
        Err(bad())
    }
}

impl std::str::FromStr for Certificate {
    type Err = CertError;

    /// Parses the text form, checking the recorded equations and point
    /// supports against the configuration.
    fn from_str(text: &str) -> Result<Self, CertError> {
        let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
        let mut at = 0usize;
        let next = |at: &mut usize| -> Result<(usize, &str), CertError> {
            let l = lines
                .get(*at)
                .ok_or_else(|| perr(*at + 1, "unexpected end of certificate"))?;
            *at += 1;
            Ok((*at, l))
        };

        let (ln, head) = next(&mut at)?;
        let f = keyed_fields(head, &["prime", "seed"], ln).map_err(|e| perr(e.line, e.msg))?;
        let prime: u32 = num(f[0], ln)?;
        let seed: u64 = num(f[1], ln)?;
        let field = PrimeField::new(prime).map_err(|e| perr(ln, e.to_string()))?;

        let (shape, used) =
            ConfigShape::parse_lines(&lines[at..], at + 1).map_err(|e| perr(e.line, e.msg))?;
        at += used;
        if let Err(v) = validate_shape(&shape) {
            return Err(CertError::ConstraintViolation {
                line: 2,
                msg: format!("invalid configuration: {v:?}"),
            });
        }
        let assignment = assign_variables(&shape);

        let mut equations = Vec::with_capacity(shape.k);
        for t in 1..=shape.k {
            let (ln, l) = next(&mut at)?;
            let body = l
                .strip_prefix(&format!("subvariety {t}: {{"))
                .and_then(|r| r.strip_suffix('}'))
                .ok_or_else(|| perr(ln, format!("expected `subvariety {t}: {{..}}`")))?;
            let eqs = body
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_variable(s, ln))
                .collect::<Result<Vec<_>, _>>()?;
            if eqs != assignment.equations(t) {
                return Err(CertError::ConstraintViolation {
                    line: ln,
                    msg: format!("equations of subvariety {t} do not match the configuration"),
                });
            }
            equations.push(eqs);
        }

        let mut points = Vec::with_capacity(shape.total_points() as usize);
        for i in shape.subsets() {
            for _ in 0..shape.points[i.index()] {
                let (ln, l) = next(&mut at)?;
                let rest = l
                    .strip_prefix("point ")
                    .ok_or_else(|| perr(ln, "expected `point ...`"))?;
                let f =
                    keyed_fields(rest, &["I", "x", "y"], ln).map_err(|e| perr(e.line, e.msg))?;
                let mask: u32 = num(f[0], ln)?;
                if mask != i.bits() {
                    return Err(CertError::ConstraintViolation {
                        line: ln,
                        msg: format!("point on I={mask} where I={} was expected", i.bits()),
                    });
                }
                let pt = ProjectivePointPair {
                    constraint: SubsetIndex::from_bits(mask),
                    x: parse_coords(f[1], &field, ln)?,
                    y: parse_coords(f[2], &field, ln)?,
                };
                pt.check(&assignment)
                    .map_err(|msg| CertError::ConstraintViolation { line: ln, msg })?;
                points.push(pt);
            }
        }

        let (ln, l) = next(&mut at)?;
        let digest = l
            .strip_prefix("digest=")
            .filter(|d| d.len() == 64 && d.bytes().all(|b| b.is_ascii_hexdigit()))
            .ok_or_else(|| perr(ln, "expected `digest=<64 hex digits>`"))?
            .to_ascii_lowercase();

        let (ln, l) = next(&mut at)?;
        let keys = [
            "matrix",
            "dim",
            "expected",
            "verdict",
            "abundancy",
            "build_s",
            "rank_s",
            "attempts",
        ];
        let f = keyed_fields(l, &keys, ln).map_err(|e| perr(e.line, e.msg))?;
        let (r, c) = f[0]
            .split_once('x')
            .ok_or_else(|| perr(ln, "expected matrix=RxC"))?;
        let verdict = DefectVerdict {
            computed_dim: num(f[1], ln)?,
            expected_dim: num(f[2], ln)?,
            outcome: f[3].parse::<Outcome>().map_err(|e| perr(ln, e))?,
            abundancy: f[4]
                .parse::<Abundancy>()
                .map_err(|_| perr(ln, "bad abundancy"))?,
            attempts: num(f[7], ln)?,
        };
        if lines[at..].iter().any(|l| !l.trim().is_empty()) {
            return Err(perr(at + 1, "trailing content"));
        }
        Ok(Certificate {
            prime,
            seed,
            shape,
            equations,
            points,
            matrix_rows: num(r, ln)?,
            matrix_cols: num(c, ln)?,
            digest,
            verdict,
            build_seconds: num(f[5], ln)?,
            rank_seconds: num(f[6], ln)?,
        })
    }
}

/// Parses a certificate; see the [`std::str::FromStr`] impl.
pub fn parse(text: &str) -> Result<Certificate, CertError> {
    text.parse()
}

/// Whether the recorded points are the ones the recorded seed draws.
pub fn points_match_seed(c: &Certificate) -> Result<bool, CheckError> {
    if validate_shape(&c.shape).is_err() {
        return Ok(false);
    }
    let field = PrimeField::new(c.prime)?;
    let a = assign_variables(&c.shape);
    Ok(sample_points(&c.shape, &a, c.seed, &field)? == c.points)
}

/// Redraws the points from the seed, rebuilds the matrix and checks that
/// points, dimensions, digest, rank and verdict all agree with what was
/// recorded. Timings are ignored.
pub fn reverify(c: &Certificate) -> Result<bool, CheckError> {
    if !points_match_seed(c)? {
        return Ok(false);
    }
    reverify_matrix(c)
}

/// As [`reverify`] but trusting the recorded points instead of redrawing
/// them.
pub fn reverify_matrix(c: &Certificate) -> Result<bool, CheckError> {
    if validate_shape(&c.shape).is_err() {
        return Ok(false);
    }
    let field = PrimeField::new(c.prime)?;
    let a = assign_variables(&c.shape);
    if (1..=c.shape.k).any(|t| c.equations.get(t - 1) != Some(&a.equations(t)))
        || c.equations.len() != c.shape.k
    {
        return Ok(false);
    }
    if c.points.iter().any(|p| p.check(&a).is_err()) {
        return Ok(false);
    }
    let basis = ideal_basis(&a);
    let mat = match build_jacobian(&c.shape, &a, &basis, &c.points, &field) {
        Ok(m) => m,
        Err(CheckError::PointMismatch(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    if (mat.rows() as u64, mat.cols() as u64) != (c.matrix_rows, c.matrix_cols)
        || matrix_digest(&mat) != c.digest
    {
        return Ok(false);
    }
    let dim = basis.len() as u64 - rank_mod_p(&mat, &field) as u64;
    let expected = expected_dim(&c.shape);
    let outcome = if dim == expected {
        Outcome::NonDefective
    } else {
        Outcome::ProbablyDefective
    };
    let v = &c.verdict;
    Ok(v.computed_dim == dim
        && v.expected_dim == expected
        && v.outcome == outcome
        && v.abundancy == abundancy(&c.shape))
}

fn numpy_row(coords: &[FieldElem]) -> String {
    let width = coords
        .iter()
        .map(|c| c.to_string().len())
        .max()
        .unwrap_or(1);
    let cells: Vec<String> = coords
        .iter()
        .map(|c| format!("{:>width$}", c.value()))
        .collect();
    format!("[{}]", cells.join(" "))
}

fn abundancy_word(a: Abundancy) -> &'static str {
    match a {
        Abundancy::Sub => "SUBABUNDANT",
        Abundancy::Super => "SUPERABUNDANT",
        Abundancy::Equi => "EQUIABUNDANT",
    }
}

/// Human-readable report of a certificate.
pub fn render_prose(c: &Certificate) -> String {
    let mut s = String::new();
    let (r, cols) = (c.matrix_rows, c.matrix_cols);
    let _ = writeln!(
        s,
        "Using random seed {} and the finite field with {} elements",
        c.seed, c.prime
    );
    let _ = writeln!(
        s,
        "In P^{} x P^{}, the (1,2) forms in the ideal of the subvarieties",
        c.shape.m, c.shape.n
    );
    if c.equations.is_empty() {
        let _ = writeln!(s, "(no subvarieties)");
    }
    for eqs in &c.equations {
        let names: Vec<String> = eqs.iter().map(Variable::to_string).collect();
        let _ = writeln!(s, "{{{} = 0}}", names.join(" = "));
    }
    let _ = writeln!(s, "singular at the double points");
    for pt in &c.points {
        let _ = writeln!(s, "({}, {})", numpy_row(&pt.x), numpy_row(&pt.y));
    }
    let _ = writeln!(
        s,
        "The {r} x {cols} matrix was built in {} s.",
        c.build_seconds
    );
    let _ = writeln!(
        s,
        "Computing the rank of the {r} x {cols} matrix took {} s.",
        c.rank_seconds
    );
    let v = &c.verdict;
    let _ = writeln!(
        s,
        "The dimension is {} vs. expected {}",
        v.computed_dim, v.expected_dim
    );
    let word = match v.outcome {
        Outcome::NonDefective => "NON-DEFECTIVE",
        Outcome::ProbablyDefective => "PROBABLY DEFECTIVE",
    };
    let _ = writeln!(
        s,
        "The configuration is {word} ({}).",
        abundancy_word(v.abundancy)
    );
    let _ = writeln!(
        s,
        "The entire computation took {} s.",
        round_seconds(c.build_seconds + c.rank_seconds)
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_configuration;

    fn b0_cert() -> Certificate {
        let mut s = ConfigShape::zeroed(2, 4, 1);
        s.set(SubsetIndex::EMPTY, 1, 3, 4);
        s.set(SubsetIndex::singleton(1), 2, 2, 3);
        check_configuration(&s, 1738187985, 127, 3).unwrap().1
    }

    #[test]
    fn text_round_trip() {
        let c = b0_cert();
        let text = c.to_string();
        assert!(text.contains("subvariety 1: {x_1=0, x_2=0, y_3=0, y_4=0}"));
        assert!(text.contains("matrix=39x44 dim=0 expected=0 verdict=NONDEFECTIVE abundancy=SUPER"));
        let back = parse(&text).unwrap();
        assert_eq!(back, c);
        assert!(reverify(&back).unwrap());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_seconds(0.049431234), 0.04943);
        assert_eq!(round_seconds(1234567.0), 1235000.0);
        assert_eq!(round_seconds(0.0), 0.0);
    }

    #[test]
    fn constraint_violations_are_rejected() {
        let c = b0_cert();
        let text = c.to_string();
        let lines: Vec<&str> = text.lines().collect();
        // last point lies on L_1, so x_1 must vanish
        let idx = lines.iter().rposition(|l| l.starts_with("point")).unwrap();
        let mut bad = lines.clone();
        let replaced = lines[idx]
            .replacen("x=[", "x=[1,1,", 1)
            .replacen(",0,0]", "]", 1);
        bad[idx] = &replaced;
        let err = parse(&bad.join("\n")).unwrap_err();
        assert!(
            matches!(err, CertError::ConstraintViolation { .. }),
            "{err:?}"
        );
        let err = parse(&text.replace("prime=127", "prime=12x")).unwrap_err();
        assert!(matches!(err, CertError::Parse { line: 1, .. }));
    }

    #[test]
    fn tampering_fails_reverify() {
        let c = b0_cert();
        let mut d = c.clone();
        d.points[0].y[0] = PrimeField::new(127)
            .unwrap()
            .elem((d.points[0].y[0].value() + 1) % 127);
        assert!(!reverify(&d).unwrap());
        assert!(!reverify_matrix(&d).unwrap());
        let mut d = c.clone();
        d.seed += 1;
        assert!(!reverify(&d).unwrap());
        assert!(reverify_matrix(&d).unwrap());
        let mut d = c.clone();
        d.verdict.computed_dim = 1;
        assert!(!reverify(&d).unwrap());
        let mut d = c;
        d.build_seconds = 99.0;
        assert!(reverify(&d).unwrap());
    }

    #[test]
    fn prose_layout() {
        let c = b0_cert();
        let p = render_prose(&c);
        assert!(p.contains("The 39 x 44 matrix was built in"));
        assert!(p.contains("The dimension is 0 vs. expected 0"));
        assert!(p.contains("The configuration is NON-DEFECTIVE (SUPERABUNDANT)."));
        assert!(p.contains("{x_1 = x_2 = y_3 = y_4 = 0}"));
        let f = PrimeField::new(127).unwrap();
        let row = numpy_row(&[f.elem(110), f.elem(0), f.elem(0)]);
        assert_eq!(row, "[110   0   0]");
        assert_eq!(
            numpy_row(&[f.elem(16), f.elem(110), f.elem(21)]),
            "[ 16 110  21]"
        );
    }
}
