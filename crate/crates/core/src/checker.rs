//! Randomized rank check of a configuration over GF(p).
//!
//! Double points are specialized to random points of their intersections,
//! the conditions they impose on bidegree (1,2) forms in the ideal of the
//! subvarieties are collected into a Jacobian matrix, and the resulting
//! dimension is compared against the expected one.

use std::fmt;
use std::time::Instant;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use thiserror::Error;

use crate::certs::{matrix_digest, round_seconds, Certificate};
use crate::configs::{
    abundancy, assign_variables, derive_codims, ideal_basis, ideal_dim, validate_shape,
    virtual_dim, Abundancy, ConfigShape, MonomialBasis, SubsetIndex, VariableAssignment, Violation,
};
use crate::ffrank::{
    rank_mod_p, DenseMatrix, FieldElem, FieldError, PrimeField, DEFAULT_MAX_ENTRIES, DEFAULT_PRIME,
};

/// Redraws allowed for a factor that came out all zero.
pub const MAX_REDRAWS: usize = 100;

/// Default number of extra attempts after a failed first one.
pub const DEFAULT_RETRIES: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("could not draw a nonzero point on the intersection {0} after {MAX_REDRAWS} attempts")]
    DegenerateSampling(SubsetIndex),
    #[error("invalid configuration: {0:?}")]
    InvalidShape(Vec<Violation>),
    #[error("points do not match the configuration: {0}")]
    PointMismatch(String),
}

/// A point of `P^m x P^n` constrained to the intersection of `L_t`, `t ∈ I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectivePointPair {
    pub constraint: SubsetIndex,
    pub x: Vec<FieldElem>,
    pub y: Vec<FieldElem>,
}

impl ProjectivePointPair {
    /// Checks the zero pattern against the labels and that neither factor
    /// vanishes.
    pub fn check(&self, a: &VariableAssignment) -> Result<(), String> {
        if self.x.len() != a.xlabel.len() || self.y.len() != a.ylabel.len() {
            return Err(format!(
                "point has {}+{} coordinates, expected {}+{}",
                self.x.len(),
                self.y.len(),
                a.xlabel.len(),
                a.ylabel.len()
            ));
        }
        for (name, coords, labels) in [("x", &self.x, &a.xlabel), ("y", &self.y, &a.ylabel)] {
            for (idx, (c, l)) in coords.iter().zip(labels.iter()).enumerate() {
                if !c.is_zero() && !l.intersection(self.constraint).is_empty() {
                    return Err(format!("{name}_{idx} must vanish on {}", self.constraint));
                }
            }
            if coords.iter().all(|c| c.is_zero()) {
                return Err(format!("{name} factor is entirely zero"));
            }
        }
        Ok(())
    }
}

fn draw_factor(
    rng: &mut SplitMix64,
    labels: &[SubsetIndex],
    constraint: SubsetIndex,
    field: &PrimeField,
) -> Result<Vec<FieldElem>, CheckError> {
    let p = field.modulus() as u64;
    for _ in 0..=MAX_REDRAWS {
        let coords: Vec<FieldElem> = labels
            .iter()
            .map(|l| {
                if l.intersection(constraint).is_empty() {
                    field.reduce(rng.next_u64() % p)
                } else {
                    FieldElem::ZERO
                }
            })
            .collect();
        if coords.iter().any(|c| !c.is_zero()) {
            return Ok(coords);
        }
    }
    Err(CheckError::DegenerateSampling(constraint))
}

/// Draws `p_I` points on each intersection, in increasing order of `I`.
pub fn sample_points(
    shape: &ConfigShape,
    a: &VariableAssignment,
    seed: u64,
    field: &PrimeField,
) -> Result<Vec<ProjectivePointPair>, CheckError> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut out = Vec::with_capacity(shape.total_points() as usize);
    for i in shape.subsets() {
        for _ in 0..shape.points[i.index()] {
            let x = draw_factor(&mut rng, &a.xlabel, i, field)?;
            let y = draw_factor(&mut rng, &a.ylabel, i, field)?;
            out.push(ProjectivePointPair {
                constraint: i,
                x,
                y,
            });
        }
    }
    Ok(out)
}

/// `(|G|, Σ p_I |W_I|)` without building anything.
pub fn matrix_dims(shape: &ConfigShape) -> (u64, u64) {
    let d = derive_codims(shape);
    let cols = shape
        .subsets()
        .map(|i| shape.points[i.index()] * d.codim(i))
        .sum();
    (ideal_dim(shape), cols)
}

/// `max(0, vdim)`.
pub fn expected_dim(shape: &ConfigShape) -> u64 {
    virtual_dim(shape).max(0) as u64
}

/// Column offsets of the variables of `W_I` within one point's block.
struct ColumnMap {
    x: Vec<Option<u32>>,
    y: Vec<Option<u32>>,
    width: usize,
}

impl ColumnMap {
    fn new(a: &VariableAssignment, constraint: Option<SubsetIndex>) -> Self {
        let mut next = 0u32;
        let mut place = |l: &SubsetIndex| {
            constraint.is_none_or(|c| c.is_subset_of(*l)).then(|| {
                next += 1;
                next - 1
            })
        };
        let x: Vec<_> = a.xlabel.iter().map(&mut place).collect();
        let y: Vec<_> = a.ylabel.iter().map(&mut place).collect();
        ColumnMap {
            x,
            y,
            width: next as usize,
        }
    }
}

fn assemble(
    a: &VariableAssignment,
    basis: &MonomialBasis,
    points: &[ProjectivePointPair],
    field: &PrimeField,
    filtered: bool,
    cap: u64,
) -> Result<DenseMatrix, CheckError> {
    let k = a.k;
    let maps: Vec<Option<ColumnMap>> = (0..1u32 << k)
        .map(|i| {
            let used = points.iter().any(|pt| pt.constraint.bits() == i);
            used.then(|| ColumnMap::new(a, filtered.then_some(SubsetIndex::from_bits(i))))
        })
        .collect();
    let mut blocks = Vec::with_capacity(points.len());
    let mut cols = 0usize;
    for pt in points {
        pt.check(a).map_err(CheckError::PointMismatch)?;
        let map = maps[pt.constraint.index()]
            .as_ref()
            .expect("map for every used subset");
        blocks.push((cols, map));
        cols += map.width;
    }
    let mut mat = DenseMatrix::zeros_capped(basis.len(), cols, cap)?;
    if cols == 0 {
        return Ok(mat);
    }
    let p = field.modulus() as u64;
    let entries = mat.entries_mut();
    entries
        .par_chunks_mut(cols)
        .zip(basis.par_iter())
        .with_min_len(32)
        .for_each(|(row, g)| {
            let (i, j1, j2) = (g.i as usize, g.j1 as usize, g.j2 as usize);
            for (pt, &(base, map)) in points.iter().zip(&blocks) {
                let xi = pt.x[i].value() as u64;
                let (y1, y2) = (pt.y[j1].value() as u64, pt.y[j2].value() as u64);
                if let Some(c) = map.x[i] {
                    row[base + c as usize] = ((y1 * y2) % p) as u16;
                }
                if j1 == j2 {
                    if let Some(c) = map.y[j1] {
                        row[base + c as usize] = ((2 * xi * y1) % p) as u16;
                    }
                } else {
                    if let Some(c) = map.y[j1] {
                        row[base + c as usize] = ((xi * y2) % p) as u16;
                    }
                    if let Some(c) = map.y[j2] {
                        row[base + c as usize] = ((xi * y1) % p) as u16;
                    }
                }
            }
        });
    Ok(mat)
}

/// The Jacobian with rows indexed by `basis` and one column per variable of
/// `W_I` for each point on the intersection `I`.
pub fn build_jacobian(
    shape: &ConfigShape,
    a: &VariableAssignment,
    basis: &MonomialBasis,
    points: &[ProjectivePointPair],
    field: &PrimeField,
) -> Result<DenseMatrix, CheckError> {
    build_jacobian_capped(shape, a, basis, points, field, DEFAULT_MAX_ENTRIES)
}

pub fn build_jacobian_capped(
    shape: &ConfigShape,
    a: &VariableAssignment,
    basis: &MonomialBasis,
    points: &[ProjectivePointPair],
    field: &PrimeField,
    cap: u64,
) -> Result<DenseMatrix, CheckError> {
    check_points(shape, points)?;
    assemble(a, basis, points, field, true, cap)
}

/// As [`build_jacobian`] but with all `m+n+2` columns for every point.
pub fn build_jacobian_unfiltered(
    shape: &ConfigShape,
    a: &VariableAssignment,
    basis: &MonomialBasis,
    points: &[ProjectivePointPair],
    field: &PrimeField,
) -> Result<DenseMatrix, CheckError> {
    check_points(shape, points)?;
    assemble(a, basis, points, field, false, DEFAULT_MAX_ENTRIES)
}

fn check_points(shape: &ConfigShape, points: &[ProjectivePointPair]) -> Result<(), CheckError> {
    let mut expected = shape
        .subsets()
        .flat_map(|i| std::iter::repeat_n(i, shape.points[i.index()] as usize));
    for (idx, pt) in points.iter().enumerate() {
        match expected.next() {
            Some(i) if i == pt.constraint => {}
            other => {
                return Err(CheckError::PointMismatch(format!(
                    "point {idx} lies on {} but {} was expected",
                    pt.constraint,
                    other.map_or("nothing".to_string(), |i| i.to_string())
                )))
            }
        }
    }
    if expected.next().is_some() {
        return Err(CheckError::PointMismatch(format!(
            "{} points given, {} expected",
            points.len(),
            shape.total_points()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    NonDefective,
    ProbablyDefective,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::NonDefective => "NONDEFECTIVE",
            Outcome::ProbablyDefective => "PROBABLY_DEFECTIVE",
        })
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "NONDEFECTIVE" => Ok(Outcome::NonDefective),
            "PROBABLY_DEFECTIVE" => Ok(Outcome::ProbablyDefective),
            other => Err(format!("unknown verdict {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DefectVerdict {
    pub outcome: Outcome,
    pub abundancy: Abundancy,
    pub computed_dim: u64,
    pub expected_dim: u64,
    pub attempts: u32,
}

impl DefectVerdict {
    pub fn is_nondefective(&self) -> bool {
        self.outcome == Outcome::NonDefective
    }
}

impl fmt::Display for DefectVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}) dim={} expected={} attempts={}",
            self.outcome, self.abundancy, self.computed_dim, self.expected_dim, self.attempts
        )
    }
}

/// Settings for [`check_configuration_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub prime: u32,
    pub retries: u32,
    /// Refuse matrices with more entries than this.
    pub max_entries: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            prime: DEFAULT_PRIME,
            retries: DEFAULT_RETRIES,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

/// Runs the check with seeds `seed, seed+1, ...` until the computed
/// dimension matches the expected one or the retries run out.
pub fn check_configuration(
    shape: &ConfigShape,
    seed: u64,
    prime: u32,
    retries: u32,
) -> Result<(DefectVerdict, Certificate), CheckError> {
    check_configuration_with(
        shape,
        seed,
        &CheckOptions {
            prime,
            retries,
            ..CheckOptions::default()
        },
    )
}

pub fn check_configuration_with(
    shape: &ConfigShape,
    seed: u64,
    opts: &CheckOptions,
) -> Result<(DefectVerdict, Certificate), CheckError> {
    validate_shape(shape).map_err(CheckError::InvalidShape)?;
    let field = PrimeField::new(opts.prime)?;
    let a = assign_variables(shape);
    let basis = ideal_basis(&a);
    let expected = expected_dim(shape);
    let abund = abundancy(shape);
    let equations: Vec<_> = (1..=shape.k).map(|t| a.equations(t)).collect();
    let mut best: Option<(u64, Certificate)> = None;
    for attempt in 0..=opts.retries {
        let attempt_seed = seed.wrapping_add(attempt as u64);
        let started = Instant::now();
        let points = sample_points(shape, &a, attempt_seed, &field)?;
        let mat = build_jacobian_capped(shape, &a, &basis, &points, &field, opts.max_entries)?;
        let build_seconds = started.elapsed().as_secs_f64();
        let started = Instant::now();
        let rank = rank_mod_p(&mat, &field) as u64;
        let rank_seconds = started.elapsed().as_secs_f64();
        let dim = basis.len() as u64 - rank;
        let done = dim == expected;
        let verdict = DefectVerdict {
            outcome: if done {
                Outcome::NonDefective
            } else {
                Outcome::ProbablyDefective
            },
            abundancy: abund,
            computed_dim: dim,
            expected_dim: expected,
            attempts: attempt + 1,
        };
        let cert = Certificate {
            prime: opts.prime,
            seed: attempt_seed,
            shape: shape.clone(),
            equations: equations.clone(),
            points,
            matrix_rows: mat.rows() as u64,
            matrix_cols: mat.cols() as u64,
            digest: matrix_digest(&mat),
            verdict,
            build_seconds: round_seconds(build_seconds),
            rank_seconds: round_seconds(rank_seconds),
        };
        if done {
            return Ok((verdict, cert));
        }
        if best.as_ref().is_none_or(|(d, _)| dim < *d) {
            best = Some((dim, cert));
        }
    }
    let (_, mut cert) = best.expect("at least one attempt");
    cert.verdict.attempts = opts.retries + 1;
    Ok((cert.verdict, cert))
}
