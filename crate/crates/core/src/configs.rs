//! Coordinate configurations on P^m x P^n and the quantities attached to them.
//!
//! A configuration has `k` coordinate subvarieties `L_1..L_k` and double
//! points constrained to intersections of them. All parameters are arrays of
//! length `2^k` indexed by a bitmask [`SubsetIndex`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest supported number of subvarieties.
pub const MAX_SUBVARIETIES: usize = 16;

/// A subset of `{1..k}` stored as a bitmask, bit `t-1` standing for `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubsetIndex(u32);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    pub fn from_bits(bits: u32) -> Self {
        SubsetIndex(bits)
    }

    /// The subset `{1..k}`.
    pub fn full(k: usize) -> Self {
        SubsetIndex(((1u64 << k) - 1) as u32)
    }

    pub fn singleton(t: usize) -> Self {
        assert!(t >= 1, "subvariety indices start at 1");
        SubsetIndex(1 << (t - 1))
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elems: I) -> Self {
        elems
            .into_iter()
            .fold(Self::EMPTY, |acc, t| acc.union(Self::singleton(t)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn contains(self, t: usize) -> bool {
        t >= 1 && self.0 >> (t - 1) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: SubsetIndex) -> SubsetIndex {
        SubsetIndex(self.0 | other.0)
    }

    pub fn intersection(self, other: SubsetIndex) -> SubsetIndex {
        SubsetIndex(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: SubsetIndex) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in increasing order, 1-based.
    pub fn elements(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |b| self.0 >> b & 1 == 1).map(|b| b + 1)
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().map(|t| t.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// One of the two projective factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    X,
    Y,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::X => "x",
            Factor::Y => "y",
        })
    }
}

/// The combinatorial data of a coordinate configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigShape {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// `ũ_I`, the number of x-coordinates whose label is exactly `I`.
    pub tilde_u: Vec<u64>,
    /// `ṽ_I`, likewise for y-coordinates.
    pub tilde_v: Vec<u64>,
    /// `p_I`, double points constrained to the intersection of `L_t`, `t ∈ I`.
    pub points: Vec<u64>,
}

impl ConfigShape {
    /// An all-zero shape, to be filled in with [`ConfigShape::set`].
    pub fn zeroed(m: usize, n: usize, k: usize) -> Self {
        assert!(
            k <= MAX_SUBVARIETIES,
            "at most {MAX_SUBVARIETIES} subvarieties"
        );
        let len = 1 << k;
        ConfigShape {
            m,
            n,
            k,
            tilde_u: vec![0; len],
            tilde_v: vec![0; len],
            points: vec![0; len],
        }
    }

    /// The shape with no subvarieties and `p` general double points.
    pub fn general_points(m: usize, n: usize, p: u64) -> Self {
        let mut s = Self::zeroed(m, n, 0);
        s.set(SubsetIndex::EMPTY, m as u64 + 1, n as u64 + 1, p);
        s
    }

    pub fn set(&mut self, i: SubsetIndex, u: u64, v: u64, p: u64) -> &mut Self {
        self.tilde_u[i.index()] = u;
        self.tilde_v[i.index()] = v;
        self.points[i.index()] = p;
        self
    }

    pub fn subsets(&self) -> impl Iterator<Item = SubsetIndex> {
        (0..1u32 << self.k).map(SubsetIndex)
    }

    pub fn total_points(&self) -> u64 {
        self.points.iter().sum()
    }
}

/// A failed configuration condition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("k = {0} exceeds the supported maximum")]
    TooManySubvarieties(usize),
    #[error("{what} has length {found}, expected {expected}")]
    ArrayLength {
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("sum of the {factor} block sizes is {found}, expected {expected}")]
    BlockSum {
        factor: Factor,
        found: u64,
        expected: u64,
    },
    #[error("subvariety L_{t} is empty in the {factor} factor (condition 3.1)")]
    EmptySubvariety { t: usize, factor: Factor },
    #[error(
        "points at {subset} lie on an empty intersection in the {factor} factor (condition 3.2)"
    )]
    EmptyPointLocus { subset: SubsetIndex, factor: Factor },
}

/// Checks every configuration condition, collecting all violations.
pub fn validate_shape(shape: &ConfigShape) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if shape.k > MAX_SUBVARIETIES {
        return Err(vec![Violation::TooManySubvarieties(shape.k)]);
    }
    let len = 1usize << shape.k;
    for (what, arr) in [
        ("tilde_u", &shape.tilde_u),
        ("tilde_v", &shape.tilde_v),
        ("points", &shape.points),
    ] {
        if arr.len() != len {
            out.push(Violation::ArrayLength {
                what,
                found: arr.len(),
                expected: len,
            });
        }
    }
    if !out.is_empty() {
        return Err(out);
    }
    for (factor, arr, expected) in [
        (Factor::X, &shape.tilde_u, shape.m as u64 + 1),
        (Factor::Y, &shape.tilde_v, shape.n as u64 + 1),
    ] {
        let found: u64 = arr.iter().sum();
        if found != expected {
            out.push(Violation::BlockSum {
                factor,
                found,
                expected,
            });
        }
    }
    // sum of the block sizes over labels disjoint from `mask`
    let disjoint = |arr: &[u64], mask: u32| -> u64 {
        arr.iter()
            .enumerate()
            .filter(|(j, _)| *j as u32 & mask == 0)
            .map(|(_, &x)| x)
            .sum()
    };
    for t in 1..=shape.k {
        let mask = 1u32 << (t - 1);
        for (factor, arr) in [(Factor::X, &shape.tilde_u), (Factor::Y, &shape.tilde_v)] {
            if disjoint(arr, mask) == 0 {
                out.push(Violation::EmptySubvariety { t, factor });
            }
        }
    }
    for i in shape.subsets() {
        if shape.points[i.index()] == 0 {
            continue;
        }
        for (factor, arr) in [(Factor::X, &shape.tilde_u), (Factor::Y, &shape.tilde_v)] {
            if disjoint(arr, i.bits()) == 0 {
                out.push(Violation::EmptyPointLocus { subset: i, factor });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Superset sums `u_I`, `v_I`: the codimensions of the intersections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedCodims {
    pub u: Vec<u64>,
    pub v: Vec<u64>,
}

impl DerivedCodims {
    pub fn u(&self, i: SubsetIndex) -> u64 {
        self.u[i.index()]
    }

    pub fn v(&self, i: SubsetIndex) -> u64 {
        self.v[i.index()]
    }

    /// `u_I + v_I`, the number of coordinates vanishing on the intersection.
    pub fn codim(&self, i: SubsetIndex) -> u64 {
        self.u(i) + self.v(i)
    }
}

/// Replaces each entry by the sum over all supersets of its index.
pub fn superset_sums(tilde: &[u64]) -> Vec<u64> {
    let mut out = tilde.to_vec();
    let k = out.len().trailing_zeros();
    for b in 0..k {
        for mask in 0..out.len() {
            if mask >> b & 1 == 0 {
                out[mask] += out[mask | 1 << b];
            }
        }
    }
    out
}

/// Inverse of [`superset_sums`].
pub fn inclusion_exclusion(sums: &[u64]) -> Vec<i64> {
    let mut out: Vec<i64> = sums.iter().map(|&x| x as i64).collect();
    let k = out.len().trailing_zeros();
    for b in 0..k {
        for mask in 0..out.len() {
            if mask >> b & 1 == 0 {
                out[mask] -= out[mask | 1 << b];
            }
        }
    }
    out
}

pub fn derive_codims(shape: &ConfigShape) -> DerivedCodims {
    DerivedCodims {
        u: superset_sums(&shape.tilde_u),
        v: superset_sums(&shape.tilde_v),
    }
}

/// A coordinate variable `x_i` or `y_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    X(usize),
    Y(usize),
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::X(i) => write!(f, "x_{i}"),
            Variable::Y(j) => write!(f, "y_{j}"),
        }
    }
}

/// The label of every coordinate: the subvarieties it cuts out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableAssignment {
    pub k: usize,
    pub xlabel: Vec<SubsetIndex>,
    pub ylabel: Vec<SubsetIndex>,
}

impl VariableAssignment {
    /// Variables whose label contains `i`, x's first.
    pub fn vanishing_vars(&self, i: SubsetIndex) -> Vec<Variable> {
        let xs = self
            .xlabel
            .iter()
            .enumerate()
            .filter(|(_, l)| i.is_subset_of(**l))
            .map(|(a, _)| Variable::X(a));
        let ys = self
            .ylabel
            .iter()
            .enumerate()
            .filter(|(_, l)| i.is_subset_of(**l))
            .map(|(b, _)| Variable::Y(b));
        xs.chain(ys).collect()
    }

    /// Defining equations of `L_t`.
    pub fn equations(&self, t: usize) -> Vec<Variable> {
        self.vanishing_vars(SubsetIndex::singleton(t))
    }
}

/// Labels blocks of consecutive variables in increasing bitmask order.
pub fn assign_variables(shape: &ConfigShape) -> VariableAssignment {
    let expand = |tilde: &[u64]| -> Vec<SubsetIndex> {
        tilde
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(SubsetIndex(i as u32), c as usize))
            .collect()
    };
    VariableAssignment {
        k: shape.k,
        xlabel: expand(&shape.tilde_u),
        ylabel: expand(&shape.tilde_v),
    }
}

pub fn vanishing_vars(shape: &ConfigShape, i: SubsetIndex) -> Vec<Variable> {
    assign_variables(shape).vanishing_vars(i)
}

/// The monomial `x_i y_j1 y_j2` with `j1 <= j2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub i: u32,
    pub j1: u32,
    pub j2: u32,
}

/// Bidegree (1,2) monomials vanishing on every subvariety, in lex order.
pub type MonomialBasis = Vec<Monomial>;

pub fn ideal_basis(a: &VariableAssignment) -> MonomialBasis {
    let full = SubsetIndex::full(a.k).bits();
    let mut out = Vec::new();
    for (i, xl) in a.xlabel.iter().enumerate() {
        for (j1, y1) in a.ylabel.iter().enumerate() {
            let partial = xl.bits() | y1.bits();
            for (j2, y2) in a.ylabel.iter().enumerate().skip(j1) {
                if partial | y2.bits() == full {
                    out.push(Monomial {
                        i: i as u32,
                        j1: j1 as u32,
                        j2: j2 as u32,
                    });
                }
            }
        }
    }
    out
}

/// `|ideal_basis|` computed from the block sizes alone.
pub fn ideal_dim(shape: &ConfigShape) -> u64 {
    let full = SubsetIndex::full(shape.k).bits();
    let xs: Vec<(u32, u64)> = nonzero(&shape.tilde_u);
    let ys: Vec<(u32, u64)> = nonzero(&shape.tilde_v);
    let mut total = 0u64;
    for &(lx, cx) in &xs {
        for (a, &(l1, c1)) in ys.iter().enumerate() {
            if lx | l1 | l1 == full {
                total += cx * c1 * (c1 + 1) / 2;
            }
            for &(l2, c2) in &ys[a + 1..] {
                if lx | l1 | l2 == full {
                    total += cx * c1 * c2;
                }
            }
        }
    }
    total
}

fn nonzero(arr: &[u64]) -> Vec<(u32, u64)> {
    arr.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as u32, c))
        .collect()
}

/// `dim I_L(1,2) - Σ p_I min(u_I + v_I, m+n+1)`.
pub fn virtual_dim(shape: &ConfigShape) -> i64 {
    let d = derive_codims(shape);
    let cap = (shape.m + shape.n + 1) as u64;
    let cond: u64 = shape
        .subsets()
        .map(|i| shape.points[i.index()] * d.codim(i).min(cap))
        .sum();
    ideal_dim(shape) as i64 - cond as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Abundancy {
    Sub,
    Super,
    Equi,
}

impl fmt::Display for Abundancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Abundancy::Sub => "SUB",
            Abundancy::Super => "SUPER",
            Abundancy::Equi => "EQUI",
        })
    }
}

impl FromStr for Abundancy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "SUB" => Ok(Abundancy::Sub),
            "SUPER" => Ok(Abundancy::Super),
            "EQUI" => Ok(Abundancy::Equi),
            other => Err(format!("unknown abundancy {other:?}")),
        }
    }
}

pub fn abundancy(shape: &ConfigShape) -> Abundancy {
    match virtual_dim(shape) {
        0 => Abundancy::Equi,
        d if d < 0 => Abundancy::Super,
        _ => Abundancy::Sub,
    }
}

/// Drops points on intersections cut out by no coordinate at all.
pub fn erase_irrelevant(shape: &ConfigShape) -> ConfigShape {
    let d = derive_codims(shape);
    let mut out = shape.clone();
    for i in shape.subsets() {
        if d.codim(i) == 0 {
            out.points[i.index()] = 0;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestrictError {
    #[error("no subvariety L_{0}")]
    NoSuchSubvariety(usize),
    #[error("L_{t} and L_{s} have empty intersection in the {factor} factor")]
    EmptyIntersection { t: usize, s: usize, factor: Factor },
    #[error("L_{t} is empty in the {factor} factor")]
    EmptySubvariety { t: usize, factor: Factor },
}

/// The configuration induced on `L_t`, an ambient space in its own right.
pub fn restrict(shape: &ConfigShape, t: usize) -> Result<ConfigShape, RestrictError> {
    if t == 0 || t > shape.k {
        return Err(RestrictError::NoSuchSubvariety(t));
    }
    let tb = 1u32 << (t - 1);
    let sum_avoiding = |arr: &[u64], mask: u32| -> u64 {
        arr.iter()
            .enumerate()
            .filter(|(j, _)| *j as u32 & mask == 0)
            .map(|(_, &x)| x)
            .sum()
    };
    for (factor, arr) in [(Factor::X, &shape.tilde_u), (Factor::Y, &shape.tilde_v)] {
        if sum_avoiding(arr, tb) == 0 {
            return Err(RestrictError::EmptySubvariety { t, factor });
        }
        for s in (1..=shape.k).filter(|&s| s != t) {
            if sum_avoiding(arr, tb | 1 << (s - 1)) == 0 {
                return Err(RestrictError::EmptyIntersection { t, s, factor });
            }
        }
    }
    let low = tb - 1;
    let compress = |mask: u32| (mask & low) | (mask >> 1 & !low);
    let m1 = sum_avoiding(&shape.tilde_u, tb);
    let n1 = sum_avoiding(&shape.tilde_v, tb);
    let mut out = ConfigShape::zeroed(m1 as usize - 1, n1 as usize - 1, shape.k - 1);
    for i in shape.subsets().filter(|i| i.bits() & tb == 0) {
        let j = compress(i.bits()) as usize;
        out.tilde_u[j] = shape.tilde_u[i.index()];
        out.tilde_v[j] = shape.tilde_v[i.index()];
        out.points[j] = shape.points[(i.bits() | tb) as usize];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Nice,
    Ugly,
}

/// `(m, n)` is ugly when `m` is even and `n` is odd.
pub fn classify_parity(m: i64, n: i64) -> Parity {
    if m.rem_euclid(2) == 0 && n.rem_euclid(2) == 1 {
        Parity::Ugly
    } else {
        Parity::Nice
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecantBounds {
    pub ups: i128,
    pub upr: i128,
    pub remainder: i128,
}

fn binom(n: i128, k: i128) -> i128 {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `ups`, `upr` and `(m+1)C(n+2,2) - (n+m+1) upr`.
pub fn secant_bounds(m: i64, n: i64) -> SecantBounds {
    let (m, n) = (m as i128, n as i128);
    let ups = ((m + 1) * (n - m + 2)).div_euclid(2) + 1;
    let total = (m + 1) * binom(n + 2, 2);
    let upr = (total + n + m).div_euclid(n + m + 1);
    SecantBounds {
        ups,
        upr,
        remainder: total - (n + m + 1) * upr,
    }
}

/// `ups(m, n)` alone.
pub fn ups(m: i64, n: i64) -> i64 {
    secant_bounds(m, n).ups as i64
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ShapeParseError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config k={} m={} n={}", self.k, self.m, self.n)?;
        for i in self.subsets() {
            let (u, v, p) = (
                self.tilde_u[i.index()],
                self.tilde_v[i.index()],
                self.points[i.index()],
            );
            if u != 0 || v != 0 || p != 0 {
                write!(f, "\nI={} u={u} v={v} p={p}", i.bits())?;
            }
        }
        Ok(())
    }
}

/// Splits `key=value` tokens and checks the keys appear in order.
pub(crate) fn keyed_fields<'a>(
    line: &'a str,
    keys: &[&str],
    lineno: usize,
) -> Result<Vec<&'a str>, ShapeParseError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != keys.len() {
        return Err(ShapeParseError {
            line: lineno,
            msg: format!("expected {} fields, found {}", keys.len(), toks.len()),
        });
    }
    toks.iter()
        .zip(keys)
        .map(|(tok, key)| {
            tok.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| ShapeParseError {
                    line: lineno,
                    msg: format!("expected {key}=..., found {tok:?}"),
                })
        })
        .collect()
}

fn parse_num<T: FromStr>(s: &str, lineno: usize) -> Result<T, ShapeParseError> {
    s.parse().map_err(|_| ShapeParseError {
        line: lineno,
        msg: format!("bad number {s:?}"),
    })
}

impl ConfigShape {
    /// Parses the serialized form from `lines`, numbering lines from
    /// `first_line`. Stops at the first line that is not an `I=` entry and
    /// returns how many lines were consumed.
    pub fn parse_lines(
        lines: &[&str],
        first_line: usize,
    ) -> Result<(ConfigShape, usize), ShapeParseError> {
        let head = lines.first().ok_or(ShapeParseError {
            line: first_line,
            msg: "missing config line".into(),
        })?;
        let rest = head
            .strip_prefix("config ")
            .ok_or_else(|| ShapeParseError {
                line: first_line,
                msg: "expected `config k=.. m=.. n=..`".into(),
            })?;
        let f = keyed_fields(rest, &["k", "m", "n"], first_line)?;
        let k: usize = parse_num(f[0], first_line)?;
        if k > MAX_SUBVARIETIES {
            return Err(ShapeParseError {
                line: first_line,
                msg: format!("k={k} exceeds {MAX_SUBVARIETIES}"),
            });
        }
        let mut shape = ConfigShape::zeroed(
            parse_num(f[1], first_line)?,
            parse_num(f[2], first_line)?,
            k,
        );
        let mut used = 1;
        let mut last: Option<u32> = None;
        for line in &lines[1..] {
            if !line.starts_with("I=") {
                break;
            }
            let lineno = first_line + used;
            let f = keyed_fields(line, &["I", "u", "v", "p"], lineno)?;
            let mask: u32 = parse_num(f[0], lineno)?;
            if mask as usize >= 1 << k || last.is_some_and(|l| l >= mask) {
                return Err(ShapeParseError {
                    line: lineno,
                    msg: format!("subset {mask} out of range or out of order"),
                });
            }
            last = Some(mask);
            shape.set(
                SubsetIndex(mask),
                parse_num(f[1], lineno)?,
                parse_num(f[2], lineno)?,
                parse_num(f[3], lineno)?,
            );
            used += 1;
        }
        Ok((shape, used))
    }
}

impl FromStr for ConfigShape {
    type Err = ShapeParseError;
    fn from_str(s: &str) -> Result<Self, ShapeParseError> {
        let lines: Vec<&str> = s.lines().filter(|l| !l.trim().is_empty()).collect();
        let (shape, used) = Self::parse_lines(&lines, 1)?;
        if used != lines.len() {
            return Err(ShapeParseError {
                line: used + 1,
                msg: "trailing content".into(),
            });
        }
        Ok(shape)
    }
}
