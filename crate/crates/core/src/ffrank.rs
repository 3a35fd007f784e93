//! Arithmetic in a small prime field and dense rank computation over it.
//!
//! Entries are stored as `u16`, so any prime below `2^16` is accepted. Rank
//! uses Gaussian elimination on a `u32` working copy with lazy reduction: row
//! updates are accumulated without a modulo until the next update could
//! overflow, then the trailing block is reduced in one sweep.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

/// The prime used throughout unless overridden.
pub const DEFAULT_PRIME: u32 = 127;

/// Default refusal threshold for dense matrices, counted in entries.
pub const DEFAULT_MAX_ENTRIES: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("prime {0} does not fit in 16-bit storage")]
    PrimeTooLarge(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix of {rows}x{cols} entries exceeds the cap of {cap} entries")]
    SizeOverflow { rows: usize, cols: usize, cap: u64 },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        found: usize,
        expected: usize,
    },
}

/// An element of GF(p), always kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(u16);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);

    pub fn value(self) -> u32 {
        self.0 as u32
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field GF(p) for a prime `p < 2^16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
    /// `e` when `p = 2^e - 1`, enabling shift-and-add reduction.
    mersenne: Option<u32>,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self, FieldError> {
        if p > u16::MAX as u32 {
            return Err(FieldError::PrimeTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let mersenne = (p + 1).is_power_of_two().then(|| (p + 1).trailing_zeros());
        Ok(PrimeField { p, mersenne })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Reduces a nonnegative value.
    #[inline]
    pub fn reduce(&self, x: u64) -> FieldElem {
        let r = match self.mersenne {
            Some(e) => {
                let mask = self.p as u64;
                let mut y = x;
                while y > mask {
                    y = (y & mask) + (y >> e);
                }
                if y == mask {
                    0
                } else {
                    y
                }
            }
            None => x % self.p as u64,
        };
        FieldElem(r as u16)
    }

    pub fn normalize(&self, x: i64) -> FieldElem {
        let p = self.p as i64;
        let r = x.rem_euclid(p);
        self.reduce(r as u64)
    }

    pub fn elem(&self, v: u32) -> FieldElem {
        self.reduce(v as u64)
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.reduce(a.0 as u64 + b.0 as u64)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.reduce(a.0 as u64 + self.p as u64 - b.0 as u64)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        self.sub(FieldElem::ZERO, a)
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.reduce(a.0 as u64 * b.0 as u64)
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        // Fermat: a^(p-2)
        let mut base = a;
        let mut acc = FieldElem(1);
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        Ok(acc)
    }
}

/// Reduces a signed integer into `[0, p)`.
pub fn ff_normalize(x: i64, p: u32) -> Result<FieldElem, FieldError> {
    Ok(PrimeField::new(p)?.normalize(x))
}

/// Multiplicative inverse of `a` in GF(p).
pub fn ff_inv(a: FieldElem, p: u32) -> Result<FieldElem, FieldError> {
    PrimeField::new(p)?.inv(a)
}

/// A dense row-major matrix over GF(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u16>,
}

impl DenseMatrix {
    /// Allocates an all-zero matrix, refusing more than `cap` entries.
    pub fn zeros_capped(rows: usize, cols: usize, cap: u64) -> Result<Self, FieldError> {
        let cells = rows as u128 * cols as u128;
        if cells > cap as u128 || cells > usize::MAX as u128 {
            return Err(FieldError::SizeOverflow { rows, cols, cap });
        }
        Ok(DenseMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, FieldError> {
        Self::zeros_capped(rows, cols, DEFAULT_MAX_ENTRIES)
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size).expect("identity within cap");
        for i in 0..size {
            m.data[i * size + i] = 1;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing every entry mod p.
    pub fn from_rows(rows: &[Vec<i64>], field: &PrimeField) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(FieldError::RaggedRows {
                    row: i,
                    found: row.len(),
                    expected: cols,
                });
            }
            for (j, &x) in row.iter().enumerate() {
                m.data[i * cols + j] = field.normalize(x).0;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        FieldElem(self.data[r * self.cols + c])
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v.0;
    }

    pub fn row(&self, r: usize) -> &[u16] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [u16] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[u16] {
        &self.data
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [u16] {
        &mut self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![0; self.data.len()],
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        swap_rows(&mut self.data, self.cols, a, b);
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    pub fn scale_row(&mut self, r: usize, by: FieldElem, field: &PrimeField) {
        for x in self.row_mut(r) {
            *x = field.mul(FieldElem(*x), by).0;
        }
    }
}

fn swap_rows<T>(data: &mut [T], cols: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (head, tail) = data.split_at_mut(hi * cols);
    head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
}

/// Rows below this many cells are eliminated sequentially.
const PAR_THRESHOLD: usize = 1 << 16;

/// Rank of `m` over the given field.
pub fn rank_mod_p(m: &DenseMatrix, field: &PrimeField) -> usize {
    // eliminate along the shorter side so the pivot loop is shorter
    if m.cols > m.rows {
        return rank_rows(&m.transpose(), field);
    }
    rank_rows(m, field)
}

fn rank_rows(m: &DenseMatrix, field: &PrimeField) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    if rows == 0 || cols == 0 {
        return 0;
    }
    let p = field.modulus();
    let mut work: Vec<u32> = m.data.iter().map(|&v| v as u32).collect();
    let sq = (p - 1) * (p - 1);
    // updates a row may absorb before an entry could exceed u32::MAX
    let budget = ((u32::MAX - (p - 1)) / sq.max(1)).max(1);
    let mut pending = 0u32;
    let mut rank = 0usize;

    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&r| !work[r * cols + col].is_multiple_of(p)) else {
            continue;
        };
        swap_rows(&mut work, cols, pr, rank);
        if pending >= budget {
            let tail = &mut work[rank * cols..];
            tail.par_chunks_mut(cols)
                .with_min_len(64)
                .for_each(|row| row[col..].iter_mut().for_each(|x| *x %= p));
            pending = 0;
        }
        let (head, tail) = work.split_at_mut((rank + 1) * cols);
        let pivot_row = &mut head[rank * cols..];
        for x in pivot_row[col..].iter_mut() {
            *x %= p;
        }
        let inv = field
            .inv(FieldElem(pivot_row[col] as u16))
            .expect("pivot is nonzero")
            .value();
        let pivot_tail = &pivot_row[col + 1..];
        let update = |row: &mut [u32]| {
            let a = row[col] % p;
            row[col] = 0;
            if a == 0 {
                return;
            }
            let neg = p - (a * inv) % p;
            for (x, &y) in row[col + 1..].iter_mut().zip(pivot_tail) {
                *x = x.wrapping_add(neg.wrapping_mul(y));
            }
        };
        if tail.len() * 2 >= PAR_THRESHOLD {
            tail.par_chunks_mut(cols).with_min_len(16).for_each(update);
        } else {
            tail.chunks_mut(cols).for_each(update);
        }
        pending += 1;
        rank += 1;
    }
    rank
}

/// Characteristic-zero rank by fraction-free (Bareiss) elimination.
pub fn rank_rational_oracle(m: &[Vec<i64>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(pr, rank);
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let num = &a[rank][col] * &a[i][j] - &a[i][col] * &a[rank][j];
                debug_assert!((&num % &prev).is_zero());
                a[i][j] = num / &prev;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}
