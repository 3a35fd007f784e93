//! Families of configurations whose parameters are quasipolynomials in
//! `(m, n)`, the inductant construction between them, and the built-in
//! catalog.

pub mod catalog;
pub mod format;
pub mod inductant;
pub mod qpoly;

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::configs::{
    validate_shape, ConfigShape, Parity, SubsetIndex, Violation, MAX_SUBVARIETIES,
};

pub use catalog::{
    base_cases, catalog_lookup, catalog_names, nice_edges, trivial_inductants, ugly_edges,
    InductantEdge, Suite,
};
pub use format::{emit_family, parse_families};
pub use inductant::{
    build_inductant, inductant_shape, trivially_nondefective, vdim_additivity_check,
    verify_inductant_at, InductantStep, Relabeling,
};
pub use qpoly::{Poly, QpError, QuasiPolynomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("({m}, {n}) is outside the domain of {family}")]
    OutOfDomain { family: String, m: i64, n: i64 },
    #[error("{family}: {param} at ({m}, {n}): {source}")]
    Formula {
        family: String,
        param: String,
        m: i64,
        n: i64,
        source: QpError,
    },
    #[error("{family}: {param} = {value} is negative at ({m}, {n})")]
    NegativeParameter {
        family: String,
        param: String,
        m: i64,
        n: i64,
        value: i64,
    },
    #[error("{family} at ({m}, {n}) is not a valid configuration: {violations:?}")]
    InvalidShape {
        family: String,
        m: i64,
        n: i64,
        violations: Vec<Violation>,
    },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("at ({m}, {n}) the parent is undefined at {which}")]
    DomainMismatch { m: i64, n: i64, which: String },
    #[error("{param} vanishes at ({m}, {n}) without vanishing on its residue class")]
    ErasureAmbiguous { param: String, m: i64, n: i64 },
    #[error("substitution cannot be resolved: {0}")]
    Substitution(QpError),
    #[error("relabeling {0:?} is not a permutation of 1..={1}")]
    BadRelabeling(Vec<usize>, usize),
}

/// Which parity classes a domain admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParityClass {
    All,
    Nice,
    Ugly,
}

impl ParityClass {
    pub fn admits(self, m: i64, n: i64) -> bool {
        match self {
            ParityClass::All => true,
            ParityClass::Nice => crate::configs::classify_parity(m, n) == Parity::Nice,
            ParityClass::Ugly => crate::configs::classify_parity(m, n) == Parity::Ugly,
        }
    }

    /// Whether the residue class `(rm, rn)` mod `d` meets this parity class.
    pub fn admits_class(self, rm: u32, rn: u32, d: u32) -> bool {
        if d % 2 == 1 {
            return true;
        }
        self.admits(rm as i64, rn as i64)
    }

    pub fn intersect(self, other: ParityClass) -> Option<ParityClass> {
        match (self, other) {
            (ParityClass::All, x) | (x, ParityClass::All) => Some(x),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for ParityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParityClass::All => "all",
            ParityClass::Nice => "nice",
            ParityClass::Ugly => "ugly",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundVar {
    M,
    N,
}

/// `var >= lower(m, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub var: BoundVar,
    pub lower: Poly,
}

impl Bound {
    pub fn holds(&self, m: i64, n: i64) -> bool {
        let x = match self.var {
            BoundVar::M => m,
            BoundVar::N => n,
        };
        Rational::from_integer(x as i128) >= self.lower.eval(m, n)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.var {
            BoundVar::M => "m",
            BoundVar::N => "n",
        };
        write!(f, "{v} >= {}", self.lower)
    }
}

/// Membership test for the `(m, n)` on which a family is defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainPredicate {
    pub parity: ParityClass,
    pub bounds: Vec<Bound>,
}

impl DomainPredicate {
    pub fn all() -> Self {
        DomainPredicate {
            parity: ParityClass::All,
            bounds: Vec::new(),
        }
    }

    pub fn with_bound(mut self, var: BoundVar, lower: Poly) -> Self {
        self.bounds.push(Bound { var, lower });
        self
    }

    pub fn contains(&self, m: i64, n: i64) -> bool {
        m >= 0 && n >= 0 && self.parity.admits(m, n) && self.bounds.iter().all(|b| b.holds(m, n))
    }

    /// The least `m` allowed by bounds on `m` that do not involve `n`.
    pub fn min_m(&self) -> i64 {
        self.bounds
            .iter()
            .filter(|b| b.var == BoundVar::M)
            .filter_map(|b| b.lower.as_constant())
            .map(|c| c.ceil().to_integer() as i64)
            .fold(0, i64::max)
    }

    /// The least `n >= 0` with `(m, n)` satisfying the bounds, ignoring parity.
    pub fn min_n(&self, m: i64) -> i64 {
        let mut n = 0i64;
        // bounds on n may mention n itself; iterate to a fixed point
        for _ in 0..64 {
            let next = self
                .bounds
                .iter()
                .filter(|b| b.var == BoundVar::N)
                .map(|b| b.lower.eval(m, n).ceil().to_integer() as i64)
                .fold(n, i64::max);
            if next == n {
                break;
            }
            n = next;
        }
        n
    }

    /// In-domain points with `m` in `[min_m, min_m + m_span)` and `n` within
    /// `n_span` of the least admissible value.
    pub fn sample(&self, m_span: i64, n_span: i64) -> Vec<(i64, i64)> {
        let m0 = self.min_m();
        (m0..m0 + m_span)
            .flat_map(|m| {
                let n0 = self.min_n(m);
                (n0..n0 + n_span).map(move |n| (m, n))
            })
            .filter(|&(m, n)| self.contains(m, n))
            .collect()
    }

    /// Whether the classes mod `d` are all uniform under this predicate's
    /// parity test.
    pub fn admits_class(&self, rm: u32, rn: u32, d: u32) -> bool {
        self.parity.admits_class(rm, rn, d)
    }
}

/// A named family of configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub name: String,
    pub k: usize,
    pub domain: DomainPredicate,
    pub tilde_u: Vec<QuasiPolynomial>,
    pub tilde_v: Vec<QuasiPolynomial>,
    pub points: Vec<QuasiPolynomial>,
}

/// Which parameter array an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    U,
    V,
    P,
}

impl Param {
    pub fn name(self, i: SubsetIndex) -> String {
        let s = match self {
            Param::U => "u~",
            Param::V => "v~",
            Param::P => "p",
        };
        format!("{s}_{i}")
    }
}

impl FamilySpec {
    pub fn new(name: impl Into<String>, k: usize, domain: DomainPredicate) -> Self {
        assert!(k <= MAX_SUBVARIETIES);
        let len = 1 << k;
        FamilySpec {
            name: name.into(),
            k,
            domain,
            tilde_u: vec![QuasiPolynomial::zero(); len],
            tilde_v: vec![QuasiPolynomial::zero(); len],
            points: vec![QuasiPolynomial::zero(); len],
        }
    }

    pub fn param(&self, which: Param) -> &[QuasiPolynomial] {
        match which {
            Param::U => &self.tilde_u,
            Param::V => &self.tilde_v,
            Param::P => &self.points,
        }
    }

    pub fn param_mut(&mut self, which: Param) -> &mut Vec<QuasiPolynomial> {
        match which {
            Param::U => &mut self.tilde_u,
            Param::V => &mut self.tilde_v,
            Param::P => &mut self.points,
        }
    }

    /// Least common multiple of every parameter's modulus.
    pub fn modulus(&self) -> u32 {
        self.tilde_u
            .iter()
            .chain(&self.tilde_v)
            .chain(&self.points)
            .fold(1, |acc, q| acc.lcm(&q.modulus()))
    }

    /// Evaluates the parameter formulas without checking the domain.
    pub fn eval_formulas(&self, m: i64, n: i64) -> Result<ConfigShape, FamilyError> {
        if m < 0 || n < 0 {
            return Err(FamilyError::OutOfDomain {
                family: self.name.clone(),
                m,
                n,
            });
        }
        let mut shape = ConfigShape::zeroed(m as usize, n as usize, self.k);
        for which in [Param::U, Param::V, Param::P] {
            for (idx, q) in self.param(which).iter().enumerate() {
                let i = SubsetIndex::from_bits(idx as u32);
                let value = q.eval(m, n).map_err(|source| FamilyError::Formula {
                    family: self.name.clone(),
                    param: which.name(i),
                    m,
                    n,
                    source,
                })?;
                if value < 0 {
                    return Err(FamilyError::NegativeParameter {
                        family: self.name.clone(),
                        param: which.name(i),
                        m,
                        n,
                        value,
                    });
                }
                let slot = match which {
                    Param::U => &mut shape.tilde_u,
                    Param::V => &mut shape.tilde_v,
                    Param::P => &mut shape.points,
                };
                slot[idx] = value as u64;
            }
        }
        validate_shape(&shape).map_err(|violations| FamilyError::InvalidShape {
            family: self.name.clone(),
            m,
            n,
            violations,
        })?;
        Ok(shape)
    }

    /// Relabels subvarieties: old index `t` becomes `perm[t-1]`.
    pub fn relabel(&self, perm: &Relabeling) -> Result<FamilySpec, FamilyError> {
        perm.check(self.k)?;
        let mut out = self.clone();
        for which in [Param::U, Param::V, Param::P] {
            let src = self.param(which);
            let dst = out.param_mut(which);
            for (idx, q) in src.iter().enumerate() {
                dst[perm.apply(SubsetIndex::from_bits(idx as u32)).index()] = q.clone();
            }
        }
        Ok(out)
    }

    /// Case-wise equality of all parameters on the classes admitted by
    /// `parity`. Both families are refined to a common modulus first.
    pub fn agrees_with(&self, other: &FamilySpec, parity: ParityClass) -> bool {
        if self.k != other.k {
            return false;
        }
        let d = self.modulus().lcm(&other.modulus());
        let d = if d % 2 == 1 && parity != ParityClass::All {
            d * 2
        } else {
            d
        };
        for which in [Param::U, Param::V, Param::P] {
            for (a, b) in self.param(which).iter().zip(other.param(which)) {
                let (a, b) = (a.refine(d), b.refine(d));
                for rm in 0..d {
                    for rn in 0..d {
                        if parity.admits_class(rm, rn, d) && a.case(rm, rn) != b.case(rm, rn) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Equal `k`, equal domains, and equal parameters on the domain.
    pub fn structurally_equal(&self, other: &FamilySpec) -> bool {
        self.domain == other.domain && self.agrees_with(other, self.domain.parity)
    }
}

/// Evaluates a family at an in-domain point.
pub fn family_eval(spec: &FamilySpec, m: i64, n: i64) -> Result<ConfigShape, FamilyError> {
    if !spec.domain.contains(m, n) {
        return Err(FamilyError::OutOfDomain {
            family: spec.name.clone(),
            m,
            n,
        });
    }
    spec.eval_formulas(m, n)
}

/// Exact integer value of a quasipolynomial.
pub fn qp_eval(q: &QuasiPolynomial, m: i64, n: i64) -> Result<i64, QpError> {
    q.eval(m, n)
}

/// `Q(m) = 3m^2 - 6m + 2`.
pub fn q_poly() -> Poly {
    "3*m^2 - 6*m + 2".parse().expect("valid literal")
}

/// `ℓ(m) = 12m - 22`.
pub fn ell_poly() -> Poly {
    "12*m - 22".parse().expect("valid literal")
}

/// `ε = (n - m) mod 4` as a quasipolynomial of modulus 4.
pub fn epsilon() -> QuasiPolynomial {
    let mut q = QuasiPolynomial::new(4);
    for rm in 0..4 {
        for rn in 0..4 {
            q.set_case(rm, rn, Some(Poly::constant(((rn + 4 - rm) % 4) as i128)));
        }
    }
    q
}
