//! The inductant construction: add a subvariety isomorphic to
//! `P^{M(m,n), N(m,n)}` and move the points of the parent at `(M, N)` onto it.

use std::fmt;

use num_integer::Integer;

use super::{
    ell_poly, epsilon, family_eval, q_poly, DomainPredicate, FamilyError, FamilySpec, Param, Poly,
    QpError, QuasiPolynomial,
};
use crate::configs::{erase_irrelevant, ideal_dim, virtual_dim, ConfigShape, SubsetIndex};

/// The substitution `(m, n) -> (M(m, n), N(m, n))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductantStep {
    pub m_map: QuasiPolynomial,
    pub n_map: QuasiPolynomial,
    pub label: String,
}

impl fmt::Display for InductantStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl InductantStep {
    pub fn new(m_map: QuasiPolynomial, n_map: QuasiPolynomial, label: impl Into<String>) -> Self {
        InductantStep {
            m_map,
            n_map,
            label: label.into(),
        }
    }

    /// A polynomial step given as two expressions in `m` and `n`.
    pub fn polynomial(m_expr: &str, n_expr: &str) -> Result<Self, QpError> {
        let mp: Poly = m_expr.parse()?;
        let np: Poly = n_expr.parse()?;
        Ok(Self::new(
            mp.into(),
            np.into(),
            format!("({m_expr}, {n_expr})"),
        ))
    }

    /// `(m-2, n-Q(m))`.
    pub fn q_step() -> Self {
        let np = &Poly::n() - &q_poly();
        Self::new(shift_m(-2), np.into(), "(m-2, n-Q(m))")
    }

    /// `(m-2, n-ℓ(m))`.
    pub fn ell_step() -> Self {
        let np = &Poly::n() - &ell_poly();
        Self::new(shift_m(-2), np.into(), "(m-2, n-l(m))")
    }

    /// `(m, n-c)`.
    pub fn n_minus(c: i64) -> Self {
        let np = &Poly::n() - &Poly::constant(c as i128);
        Self::new(Poly::m().into(), np.into(), format!("(m, n-{c})"))
    }

    /// `(m-2, n-6)`.
    pub fn m2_n6() -> Self {
        let np = &Poly::n() - &Poly::constant(6);
        Self::new(shift_m(-2), np.into(), "(m-2, n-6)")
    }

    /// `(m, (n-m-ε)/2)`.
    pub fn half_step() -> Self {
        let base: QuasiPolynomial = (&Poly::n() - &Poly::m()).into();
        let mut np = base.sub(&epsilon());
        let halved = np.clone();
        let d = halved.modulus();
        np = QuasiPolynomial::new(d);
        for (rm, rn, p) in halved.cases() {
            np.set_case(rm, rn, p.map(|p| p.scale(super::Rational::new(1, 2))));
        }
        Self::new(Poly::m().into(), np, "(m, (n-m-e)/2)")
    }

    pub fn apply(&self, m: i64, n: i64) -> Result<(i64, i64), QpError> {
        Ok((self.m_map.eval(m, n)?, self.n_map.eval(m, n)?))
    }
}

fn shift_m(c: i64) -> QuasiPolynomial {
    (&Poly::m() + &Poly::constant(c as i128)).into()
}

/// A permutation of subvariety indices: old `t` becomes `perm[t-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling(Vec<usize>);

impl Relabeling {
    pub fn identity(k: usize) -> Self {
        Relabeling((1..=k).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Self {
        Relabeling(images)
    }

    /// The transposition of `a` and `b` on `1..=k`.
    pub fn swap(k: usize, a: usize, b: usize) -> Self {
        let mut v: Vec<usize> = (1..=k).collect();
        v.swap(a - 1, b - 1);
        Relabeling(v)
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn check(&self, k: usize) -> Result<(), FamilyError> {
        let mut seen = vec![false; k + 1];
        let ok = self.0.len() == k
            && self.0.iter().all(|&t| {
                let fresh = (1..=k).contains(&t) && !seen[t];
                if fresh {
                    seen[t] = true;
                }
                fresh
            });
        if ok {
            Ok(())
        } else {
            Err(FamilyError::BadRelabeling(self.0.clone(), k))
        }
    }

    pub fn apply(&self, i: SubsetIndex) -> SubsetIndex {
        SubsetIndex::from_elements(i.elements().map(|t| self.0[t - 1]))
    }

    pub fn apply_shape(&self, shape: &ConfigShape) -> ConfigShape {
        let mut out = shape.clone();
        for i in shape.subsets() {
            let j = self.apply(i).index();
            out.tilde_u[j] = shape.tilde_u[i.index()];
            out.tilde_v[j] = shape.tilde_v[i.index()];
            out.points[j] = shape.points[i.index()];
        }
        out
    }
}

fn negative(which: Param, i: SubsetIndex, m: i64, n: i64, value: i64) -> FamilyError {
    FamilyError::NegativeParameter {
        family: "inductant".into(),
        param: which.name(i),
        m,
        n,
        value,
    }
}

/// Applies the inductant relations to a parent evaluated at `(m, n)` (`big`)
/// and at `(M, N)` (`small`), then erases irrelevant points.
pub fn inductant_shape(big: &ConfigShape, small: &ConfigShape) -> Result<ConfigShape, FamilyError> {
    assert_eq!(big.k, small.k, "both shapes come from one family");
    let k = big.k;
    let new = 1usize << k;
    let (m, n) = (big.m as i64, big.n as i64);
    let mut out = ConfigShape::zeroed(big.m, big.n, k + 1);
    let diff = |a: u64, b: u64, which: Param, i: usize| -> Result<u64, FamilyError> {
        a.checked_sub(b).ok_or_else(|| {
            negative(
                which,
                SubsetIndex::from_bits(i as u32),
                m,
                n,
                a as i64 - b as i64,
            )
        })
    };
    for i in 0..new {
        out.tilde_u[i] = small.tilde_u[i];
        out.tilde_v[i] = small.tilde_v[i];
        out.tilde_u[i | new] = diff(big.tilde_u[i], small.tilde_u[i], Param::U, i | new)?;
        out.tilde_v[i | new] = diff(big.tilde_v[i], small.tilde_v[i], Param::V, i | new)?;
        out.points[i] = diff(big.points[i], small.points[i], Param::P, i)?;
        out.points[i | new] = small.points[i];
    }
    Ok(erase_irrelevant(&out))
}

/// Builds the inductant family symbolically on `domain`.
///
/// Points on the new intersections are erased per residue class where the
/// intersection's codimension is the zero polynomial. The remaining checks
/// (parent defined at both points, no negative parameter, no codimension
/// vanishing at isolated points) are made on a window of sample points of the
/// domain.
pub fn build_inductant(
    parent: &FamilySpec,
    step: &InductantStep,
    domain: &DomainPredicate,
) -> Result<FamilySpec, FamilyError> {
    let k = parent.k;
    let new = 1usize << k;
    let mut child = FamilySpec::new(format!("{}[{}]", parent.name, step), k + 1, domain.clone());
    let compose = |q: &QuasiPolynomial| {
        q.compose(&step.m_map, &step.n_map)
            .map_err(FamilyError::Substitution)
    };
    let mut composed_points = Vec::with_capacity(new);
    for i in 0..new {
        for which in [Param::U, Param::V] {
            let orig = &parent.param(which)[i];
            let c = compose(orig)?;
            child.param_mut(which)[i | new] = orig.sub(&c);
            child.param_mut(which)[i] = c;
        }
        let orig = &parent.points[i];
        let c = compose(orig)?;
        child.points[i] = orig.sub(&c);
        composed_points.push(c);
    }
    // codimension of each new intersection, as a quasipolynomial
    let codims: Vec<QuasiPolynomial> = (0..new)
        .map(|i| {
            (0..new)
                .filter(|j| j & i == i)
                .fold(QuasiPolynomial::zero(), |acc, j| {
                    acc.add(&child.tilde_u[j | new])
                        .add(&child.tilde_v[j | new])
                })
        })
        .collect();
    for i in 0..new {
        let (s, pc) = (&codims[i], &composed_points[i]);
        let d = s.modulus().lcm(&pc.modulus());
        let (s, pc) = (s.refine(d), pc.refine(d));
        let mut q = QuasiPolynomial::new(d);
        for rm in 0..d {
            for rn in 0..d {
                let value = match s.is_zero_on(rm, rn) {
                    Some(true) => Some(Poly::zero()),
                    _ => pc.case(rm, rn).cloned(),
                };
                q.set_case(rm, rn, value);
            }
        }
        child.points[i | new] = q.simplify();
    }
    // drop classes outside the domain's parity
    let parity = domain.parity;
    for which in [Param::U, Param::V, Param::P] {
        for q in child.param_mut(which).iter_mut() {
            let d = if parity == super::ParityClass::All {
                q.modulus()
            } else {
                q.modulus().lcm(&2)
            };
            *q = q
                .refine(d)
                .restrict_classes(|rm, rn| parity.admits_class(rm, rn, d))
                .simplify();
        }
    }
    for (m, n) in domain.sample(6, 40) {
        let (mm, nn) = step.apply(m, n).map_err(FamilyError::Substitution)?;
        for (which, (a, b)) in [("(m, n)", (m, n)), ("(M, N)", (mm, nn))] {
            if !parent.domain.contains(a, b) {
                return Err(FamilyError::DomainMismatch {
                    m,
                    n,
                    which: format!("{which} = ({a}, {b})"),
                });
            }
        }
        child.eval_formulas(m, n)?;
        for (i, s) in codims.iter().enumerate() {
            let zero_here = s.eval(m, n).map_err(FamilyError::Substitution)? == 0;
            let zero_class = s.case_at(m, n).map(Poly::is_zero).unwrap_or(false);
            if zero_here && !zero_class {
                return Err(FamilyError::ErasureAmbiguous {
                    param: format!("u_{0} + v_{0}", SubsetIndex::from_bits((i | new) as u32)),
                    m,
                    n,
                });
            }
        }
    }
    Ok(child)
}

fn step_target(
    step: &InductantStep,
    m: i64,
    n: i64,
    parent: &FamilySpec,
) -> Result<(i64, i64), FamilyError> {
    step.apply(m, n).map_err(|_| FamilyError::OutOfDomain {
        family: parent.name.clone(),
        m,
        n,
    })
}

/// Whether `child(m, n)` is the inductant of `parent` at `(m, n)`.
pub fn verify_inductant_at(
    child: &FamilySpec,
    parent: &FamilySpec,
    step: &InductantStep,
    m: i64,
    n: i64,
) -> Result<bool, FamilyError> {
    verify_inductant_relabeled(
        child,
        parent,
        step,
        &Relabeling::identity(parent.k + 1),
        m,
        n,
    )
}

/// As [`verify_inductant_at`], with the constructed shape's subvarieties
/// renamed by `relabel` before comparing.
pub fn verify_inductant_relabeled(
    child: &FamilySpec,
    parent: &FamilySpec,
    step: &InductantStep,
    relabel: &Relabeling,
    m: i64,
    n: i64,
) -> Result<bool, FamilyError> {
    if child.k != parent.k + 1 {
        return Ok(false);
    }
    relabel.check(child.k)?;
    let got = family_eval(child, m, n)?;
    let (mm, nn) = step_target(step, m, n, parent)?;
    let big = family_eval(parent, m, n)?;
    let small = family_eval(parent, mm, nn)?;
    let Ok(expected) = inductant_shape(&big, &small) else {
        return Ok(false);
    };
    Ok(erase_irrelevant(&got) == relabel.apply_shape(&expected))
}

/// `vdim B(m,n) = vdim A(m,n) - vdim A(M,N)` for the inductant `B` of `A`.
pub fn vdim_additivity_check(
    parent: &FamilySpec,
    step: &InductantStep,
    m: i64,
    n: i64,
) -> Result<bool, FamilyError> {
    let (mm, nn) = step_target(step, m, n, parent)?;
    let big = family_eval(parent, m, n)?;
    let small = family_eval(parent, mm, nn)?;
    let child = inductant_shape(&big, &small)?;
    Ok(virtual_dim(&child) == virtual_dim(&big) - virtual_dim(&small))
}

/// No points and no bidegree (1,2) monomial vanishing on every subvariety.
pub fn trivially_nondefective(shape: &ConfigShape) -> bool {
    shape.total_points() == 0 && ideal_dim(shape) == 0
}
