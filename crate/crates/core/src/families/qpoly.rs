//! Bivariate polynomials in `m, n` with rational coefficients, and
//! quasipolynomials that pick a polynomial by the residues of `(m, n)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QpError {
    #[error("no case for residue class ({rm}, {rn}) mod {modulus}")]
    MissingCase { rm: u32, rn: u32, modulus: u32 },
    #[error("value {value} at ({m}, {n}) is not an integer")]
    NonInteger { m: i64, n: i64, value: String },
    #[error("cannot parse polynomial {text:?}: {msg}")]
    Parse { text: String, msg: String },
    #[error("substitution does not settle residues mod {0}")]
    Unresolvable(u32),
}

/// A polynomial in `m` and `n`, keyed by `(deg_m, deg_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant<T: Into<Rational>>(c: T) -> Self {
        Poly::monomial(c, 0, 0)
    }

    pub fn monomial<T: Into<Rational>>(c: T, dm: u32, dn: u32) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((dm, dn), c);
        }
        Poly { terms }
    }

    pub fn m() -> Self {
        Poly::monomial(1, 1, 0)
    }

    pub fn n() -> Self {
        Poly::monomial(1, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Rational)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn coefficient(&self, dm: u32, dn: u32) -> Rational {
        self.terms
            .get(&(dm, dn))
            .copied()
            .unwrap_or_else(Rational::zero)
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&(0, 0)).copied(),
            _ => None,
        }
    }

    pub fn degree_m(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn degree_n(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    fn add_term(&mut self, key: (u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: Rational) -> Poly {
        let mut out = Poly::zero();
        for (&k, &v) in &self.terms {
            out.add_term(k, v * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(1), |acc, _| &acc * self)
    }

    pub fn eval(&self, m: i64, n: i64) -> Rational {
        let (m, n) = (m as i128, n as i128);
        self.terms
            .iter()
            .map(|(&(a, b), &c)| c * Rational::from_integer(m.pow(a) * n.pow(b)))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    /// Substitutes `m -> mm`, `n -> nn`.
    pub fn compose(&self, mm: &Poly, nn: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(a, b), &c) in &self.terms {
            out = &out + &(&mm.pow(a) * &nn.pow(b)).scale(c);
        }
        out
    }

    /// The least common denominator of the coefficients.
    pub fn denominator(&self) -> i128 {
        self.terms.values().fold(1, |acc, c| acc.lcm(c.denom()))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (&k, &v) in &rhs.terms {
            out.add_term(k, v);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (&k, &v) in &rhs.terms {
            out.add_term(k, -v);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Rational::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(a, b), &c) in &self.terms {
            for (&(x, y), &d) in &rhs.terms {
                out.add_term((a + x, b + y), c * d);
            }
        }
        out
    }
}

fn fmt_rational(c: Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest total degree first, then by degree in m
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by_key(|(&(a, b), _)| (std::cmp::Reverse(a + b), std::cmp::Reverse(a)));
        for (idx, (&(a, b), &c)) in keys.into_iter().enumerate() {
            let neg = c.is_negative();
            match (idx, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut parts = Vec::new();
            let ac = c.abs();
            if !ac.is_one() || (a == 0 && b == 0) {
                parts.push(fmt_rational(ac));
            }
            for (var, d) in [("m", a), ("n", b)] {
                match d {
                    0 => {}
                    1 => parts.push(var.to_string()),
                    _ => parts.push(format!("{var}^{d}")),
                }
            }
            f.write_str(&parts.join(" * "))?;
        }
        Ok(())
    }
}

/// Recursive-descent parser for sums of products with parentheses.
struct PolyParser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i128),
    Var(char),
    Op(char),
}

impl<'a> PolyParser<'a> {
    fn new(src: &'a str) -> Result<Self, QpError> {
        let mut toks = Vec::new();
        let mut chars = src.chars().peekable();
        while let Some(&ch) = chars.peek() {
            match ch {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '0'..='9' => {
                    let mut v: i128 = 0;
                    while let Some(d) = chars.peek().and_then(|c| c.to_digit(10)) {
                        v = v
                            .checked_mul(10)
                            .and_then(|v| v.checked_add(d as i128))
                            .ok_or_else(|| Self::err(src, "number too large"))?;
                        chars.next();
                    }
                    toks.push(Tok::Num(v));
                }
                'm' | 'n' => {
                    toks.push(Tok::Var(ch));
                    chars.next();
                }
                '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                    toks.push(Tok::Op(ch));
                    chars.next();
                }
                other => return Err(Self::err(src, &format!("unexpected character {other:?}"))),
            }
        }
        Ok(PolyParser { src, toks, pos: 0 })
    }

    fn err(src: &str, msg: &str) -> QpError {
        QpError::Parse {
            text: src.to_string(),
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Poly, QpError> {
        let mut acc = if self.eat('-') {
            -&self.product()?
        } else {
            self.eat('+');
            self.product()?
        };
        loop {
            if self.eat('+') {
                acc = &acc + &self.product()?;
            } else if self.eat('-') {
                acc = &acc - &self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Poly, QpError> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.power()?;
            } else if self.eat('/') {
                let d = self.power()?;
                let c = d
                    .as_constant()
                    .filter(|c| !c.is_zero())
                    .ok_or_else(|| Self::err(self.src, "division by a non-constant or zero"))?;
                acc = acc.scale(c.recip());
            } else if matches!(self.peek(), Some(Tok::Var(_)) | Some(Tok::Op('('))) {
                // implicit multiplication such as `3m` or `2(n-1)`
                acc = &acc * &self.power()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Poly, QpError> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(e)) if e <= 64 => {
                    self.pos += 1;
                    Ok(base.pow(e as u32))
                }
                _ => Err(Self::err(self.src, "exponent must be a small integer")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly, QpError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Poly::constant(Rational::from_integer(v)))
            }
            Some(Tok::Var('m')) => {
                self.pos += 1;
                Ok(Poly::m())
            }
            Some(Tok::Var(_)) => {
                self.pos += 1;
                Ok(Poly::n())
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(Self::err(self.src, "missing `)`"));
                }
                Ok(inner)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-&self.power()?)
            }
            _ => Err(Self::err(self.src, "expected a number, `m`, `n` or `(`")),
        }
    }
}

impl FromStr for Poly {
    type Err = QpError;
    fn from_str(s: &str) -> Result<Self, QpError> {
        let mut p = PolyParser::new(s)?;
        if p.toks.is_empty() {
            return Err(PolyParser::err(s, "empty expression"));
        }
        let out = p.sum()?;
        if p.pos != p.toks.len() {
            return Err(PolyParser::err(s, "trailing input"));
        }
        Ok(out)
    }
}

/// A polynomial per residue class of `(m mod d, n mod d)`; `None` marks a
/// class on which the function is undefined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiPolynomial {
    modulus: u32,
    cases: Vec<Option<Poly>>,
}

fn residue(x: i64, d: u32) -> u32 {
    x.rem_euclid(d as i64) as u32
}

impl From<Poly> for QuasiPolynomial {
    fn from(p: Poly) -> Self {
        QuasiPolynomial {
            modulus: 1,
            cases: vec![Some(p)],
        }
    }
}

impl QuasiPolynomial {
    pub fn new(modulus: u32) -> Self {
        assert!(modulus >= 1);
        QuasiPolynomial {
            modulus,
            cases: vec![None; (modulus * modulus) as usize],
        }
    }

    pub fn constant(c: i64) -> Self {
        Poly::constant(c as i128).into()
    }

    pub fn zero() -> Self {
        Poly::zero().into()
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    fn slot(&self, rm: u32, rn: u32) -> usize {
        (rm * self.modulus + rn) as usize
    }

    pub fn case(&self, rm: u32, rn: u32) -> Option<&Poly> {
        self.cases[self.slot(rm % self.modulus, rn % self.modulus)].as_ref()
    }

    pub fn set_case(&mut self, rm: u32, rn: u32, p: Option<Poly>) {
        let s = self.slot(rm, rn);
        self.cases[s] = p;
    }

    /// Residue classes and their polynomials.
    pub fn cases(&self) -> impl Iterator<Item = (u32, u32, Option<&Poly>)> {
        let d = self.modulus;
        (0..d * d).map(move |s| (s / d, s % d, self.cases[s as usize].as_ref()))
    }

    pub fn case_at(&self, m: i64, n: i64) -> Result<&Poly, QpError> {
        let (rm, rn) = (residue(m, self.modulus), residue(n, self.modulus));
        self.case(rm, rn).ok_or(QpError::MissingCase {
            rm,
            rn,
            modulus: self.modulus,
        })
    }

    pub fn eval_rational(&self, m: i64, n: i64) -> Result<Rational, QpError> {
        Ok(self.case_at(m, n)?.eval(m, n))
    }

    /// Exact integer value at `(m, n)`.
    pub fn eval(&self, m: i64, n: i64) -> Result<i64, QpError> {
        let v = self.eval_rational(m, n)?;
        if !v.is_integer() {
            return Err(QpError::NonInteger {
                m,
                n,
                value: fmt_rational(v),
            });
        }
        v.to_integer().to_i64().ok_or(QpError::NonInteger {
            m,
            n,
            value: fmt_rational(v),
        })
    }

    /// The same function presented with a larger modulus `d`, a multiple of
    /// the current one.
    pub fn refine(&self, d: u32) -> QuasiPolynomial {
        assert!(
            d.is_multiple_of(self.modulus),
            "{d} is not a multiple of {}",
            self.modulus
        );
        let mut out = QuasiPolynomial::new(d);
        for rm in 0..d {
            for rn in 0..d {
                out.set_case(rm, rn, self.case(rm, rn).cloned());
            }
        }
        out
    }

    /// Shrinks the modulus to the smallest divisor that still describes the
    /// same cases.
    pub fn simplify(&self) -> QuasiPolynomial {
        let d = self.modulus;
        for e in (1..d).filter(|e| d.is_multiple_of(*e)) {
            let coarse = self.coarsen(e);
            if coarse.refine(d) == *self {
                return coarse;
            }
        }
        self.clone()
    }

    fn coarsen(&self, e: u32) -> QuasiPolynomial {
        let mut out = QuasiPolynomial::new(e);
        for rm in 0..e {
            for rn in 0..e {
                out.set_case(rm, rn, self.case(rm, rn).cloned());
            }
        }
        out
    }

    fn zip_with(
        &self,
        other: &QuasiPolynomial,
        f: impl Fn(&Poly, &Poly) -> Poly,
    ) -> QuasiPolynomial {
        let d = self.modulus.lcm(&other.modulus);
        let (a, b) = (self.refine(d), other.refine(d));
        let mut out = QuasiPolynomial::new(d);
        for s in 0..out.cases.len() {
            out.cases[s] = match (&a.cases[s], &b.cases[s]) {
                (Some(x), Some(y)) => Some(f(x, y)),
                _ => None,
            };
        }
        out.simplify()
    }

    pub fn add(&self, other: &QuasiPolynomial) -> QuasiPolynomial {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &QuasiPolynomial) -> QuasiPolynomial {
        self.zip_with(other, |x, y| x - y)
    }

    /// Keeps only the classes accepted by `keep`.
    pub fn restrict_classes(&self, keep: impl Fn(u32, u32) -> bool) -> QuasiPolynomial {
        let mut out = self.clone();
        let d = self.modulus;
        for rm in 0..d {
            for rn in 0..d {
                if !keep(rm, rn) {
                    out.set_case(rm, rn, None);
                }
            }
        }
        out
    }

    /// `self(M(m,n), N(m,n))` as a quasipolynomial in `(m, n)`.
    pub fn compose(
        &self,
        mq: &QuasiPolynomial,
        nq: &QuasiPolynomial,
    ) -> Result<QuasiPolynomial, QpError> {
        let base = mq.modulus.lcm(&nq.modulus);
        let mut mult = 1;
        for _ in 0..4 {
            let d = base * mult;
            if let Some(out) = self.compose_with_modulus(mq, nq, d)? {
                return Ok(out.simplify());
            }
            mult *= self.modulus.max(2);
        }
        Err(QpError::Unresolvable(self.modulus))
    }

    fn compose_with_modulus(
        &self,
        mq: &QuasiPolynomial,
        nq: &QuasiPolynomial,
        d: u32,
    ) -> Result<Option<QuasiPolynomial>, QpError> {
        let mut out = QuasiPolynomial::new(d);
        for rm in 0..d {
            for rn in 0..d {
                let (Some(mp), Some(np)) = (mq.case(rm, rn), nq.case(rm, rn)) else {
                    continue;
                };
                let Some(res_m) = constant_residue(mp, rm, rn, d, self.modulus) else {
                    return Ok(None);
                };
                let Some(res_n) = constant_residue(np, rm, rn, d, self.modulus) else {
                    return Ok(None);
                };
                out.set_case(rm, rn, self.case(res_m, res_n).map(|p| p.compose(mp, np)));
            }
        }
        Ok(Some(out))
    }

    /// Whether the function is identically zero on class `(rm, rn)`.
    pub fn is_zero_on(&self, rm: u32, rn: u32) -> Option<bool> {
        self.case(rm, rn).map(Poly::is_zero)
    }
}

/// The value of `poly` mod `q` on the class `(rm, rn)` mod `d`, if constant.
///
/// With `f(a, b) = poly(rm + d a, rn + d b)`, the forward differences at the
/// origin are the Newton coefficients of `f`, so `f` is constant mod `q` on
/// all integers exactly when every difference but the first is divisible by
/// `q` (and all of them are integers).
fn constant_residue(poly: &Poly, rm: u32, rn: u32, d: u32, q: u32) -> Option<u32> {
    if q == 1 {
        return Some(0);
    }
    let shifted = poly.compose(
        &(&Poly::constant(rm as i128) + &Poly::monomial(d as i128, 1, 0)),
        &(&Poly::constant(rn as i128) + &Poly::monomial(d as i128, 0, 1)),
    );
    let (da, db) = (shifted.degree_m() as usize, shifted.degree_n() as usize);
    let mut grid: Vec<Vec<Rational>> = (0..=da)
        .map(|a| (0..=db).map(|b| shifted.eval(a as i64, b as i64)).collect())
        .collect();
    // in-place 2D forward differences
    for row in grid.iter_mut() {
        for level in 1..=db {
            for b in (level..=db).rev() {
                row[b] = row[b] - row[b - 1];
            }
        }
    }
    for level in 1..=da {
        for a in (level..=da).rev() {
            let (lo, hi) = grid.split_at_mut(a);
            for (x, y) in hi[0].iter_mut().zip(&lo[a - 1]) {
                *x -= *y;
            }
        }
    }
    let q = q as i128;
    for (a, row) in grid.iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            if !c.is_integer() {
                return None;
            }
            if (a, b) != (0, 0) && c.to_integer() % q != 0 {
                return None;
            }
        }
    }
    Some(grid[0][0].to_integer().rem_euclid(q) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        let q = p("3*m^2 - 6*m + 2");
        assert_eq!(q.eval(2, 0), Rational::from_integer(2));
        assert_eq!(q.to_string(), "3 * m^2 - 6 * m + 2");
        assert_eq!(p("12m - 22").eval(10, 0), Rational::from_integer(98));
        assert_eq!(
            p("(m*n - n - 3*m^3 + 8*m^2 - 3*m)/2"),
            p("1/2*m*n - 1/2*n - 3/2*m^3 + 4*m^2 - 3/2*m")
        );
        assert_eq!(p("-(m - 1)^2"), p("-m^2 + 2*m - 1"));
        assert_eq!(p("0"), Poly::zero());
        assert!("m +".parse::<Poly>().is_err());
        assert!("m / n".parse::<Poly>().is_err());
        assert!("x".parse::<Poly>().is_err());
    }

    #[test]
    fn epsilon_is_a_quasipolynomial() {
        let mut eps = QuasiPolynomial::new(4);
        for rm in 0..4 {
            for rn in 0..4 {
                eps.set_case(rm, rn, Some(Poly::constant(((rn + 4 - rm) % 4) as i128)));
            }
        }
        assert_eq!(eps.eval(4, 9).unwrap(), 1);
        assert_eq!(eps.eval(2, 5).unwrap(), 3);
    }

    #[test]
    fn eval_errors() {
        let half = QuasiPolynomial::from(p("n/2"));
        assert!(matches!(half.eval(0, 3), Err(QpError::NonInteger { .. })));
        let only_even = QuasiPolynomial::from(p("n/2"))
            .refine(2)
            .restrict_classes(|_, rn| rn == 0);
        assert_eq!(only_even.eval(5, 8).unwrap(), 4);
        assert!(matches!(
            only_even.eval(0, 3),
            Err(QpError::MissingCase { .. })
        ));
    }

    #[test]
    fn simplify_collapses_identical_cases() {
        let q = QuasiPolynomial::from(p("m + n")).refine(4);
        assert_eq!(q.modulus(), 4);
        assert_eq!(q.simplify().modulus(), 1);
    }

    #[test]
    fn compose_through_a_parity_split() {
        // floor(n/2) composed with n -> 2n + 1 is the polynomial n
        let mut fl = QuasiPolynomial::new(2);
        for rm in 0..2 {
            fl.set_case(rm, 0, Some(p("n/2")));
            fl.set_case(rm, 1, Some(p("(n-1)/2")));
        }
        let c = fl
            .compose(
                &QuasiPolynomial::from(Poly::m()),
                &QuasiPolynomial::from(p("2n+1")),
            )
            .unwrap();
        assert_eq!(c.modulus(), 1);
        assert_eq!(c.case(0, 0), Some(&Poly::n()));
        // with n -> n(n+1)/2 the parity repeats with period 4
        let c = fl
            .compose(
                &QuasiPolynomial::from(Poly::m()),
                &QuasiPolynomial::from(p("n*(n+1)/2")),
            )
            .unwrap();
        for n in 0..40i64 {
            assert_eq!(c.eval(0, n).unwrap(), n * (n + 1) / 4, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(coeffs in proptest::collection::vec((-20i128..20, 1i128..5, 0u32..4, 0u32..4), 0..6)) {
            let mut poly = Poly::zero();
            for (num, den, a, b) in coeffs {
                poly = &poly + &Poly::monomial(Rational::new(num, den), a, b);
            }
            let back: Poly = poly.to_string().parse().unwrap();
            prop_assert_eq!(back, poly);
        }

        #[test]
        fn compose_agrees_pointwise(a in -3i64..4, b in -3i64..4, c in 0i64..3, m in -20i64..20, n in -20i64..20) {
            // a parity-split target composed with an affine substitution
            let mut q = QuasiPolynomial::new(2);
            for rm in 0..2u32 {
                for rn in 0..2u32 {
                    let off = (rm * 2 + rn) as i128;
                    q.set_case(rm, rn, Some(&p("m*n + 3") + &Poly::constant(off)));
                }
            }
            let mm: Poly = format!("{a}*m + {b}*n + {c}").replace("+ -", "- ").parse().unwrap();
            let nn: Poly = format!("m + {c}*n").parse().unwrap();
            let comp = q.compose(&mm.clone().into(), &nn.clone().into()).unwrap();
            let direct = q.eval(
                mm.eval(m, n).to_integer() as i64,
                nn.eval(m, n).to_integer() as i64,
            ).unwrap();
            prop_assert_eq!(comp.eval(m, n).unwrap(), direct);
        }
    }
}
