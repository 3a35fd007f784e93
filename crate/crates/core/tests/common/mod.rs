#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use segredefect::checker::ProjectivePointPair;
use segredefect::configs::{
    validate_shape, ConfigShape, SubsetIndex, Variable, VariableAssignment,
};
use segredefect::ffrank::{rank_mod_p, DenseMatrix, PrimeField};

/// A random configuration satisfying both configuration conditions.
pub fn random_shape(
    rng: &mut ChaCha8Rng,
    max_k: usize,
    max_m: usize,
    max_n: usize,
    max_p: u64,
) -> ConfigShape {
    loop {
        let k = rng.gen_range(0..=max_k);
        let (m, n) = (rng.gen_range(0..=max_m), rng.gen_range(0..=max_n));
        if let Some(s) = fill_shape(rng, m, n, k, max_p) {
            return s;
        }
    }
}

/// A random valid configuration on `P^m x P^n`, or `None` if the draw broke
/// a condition.
pub fn fill_shape(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    k: usize,
    max_p: u64,
) -> Option<ConfigShape> {
    let mut s = ConfigShape::zeroed(m, n, k);
    let labels = 1u32 << k;
    let draw = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.35) {
            0
        } else {
            rng.gen_range(0..labels) as usize
        }
    };
    for _ in 0..=m {
        let l = draw(rng);
        s.tilde_u[l] += 1;
    }
    for _ in 0..=n {
        let l = draw(rng);
        s.tilde_v[l] += 1;
    }
    for i in 0..labels as usize {
        s.points[i] = rng.gen_range(0..=max_p);
        if validate_shape(&s).is_err() {
            s.points[i] = 0;
        }
    }
    validate_shape(&s).ok().map(|_| s)
}

/// All bidegree (1,2) monomials `(i, j1, j2)` with `j1 <= j2`.
pub fn all_monomials(m: usize, n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..=m {
        for j1 in 0..=n {
            for j2 in j1..=n {
                out.push((i, j1, j2));
            }
        }
    }
    out
}

/// Dimension of the space of (1,2) forms vanishing on every subvariety and
/// singular at every point, from the full condition matrix over all
/// monomials and all `m+n+2` partial derivatives.
pub fn brute_force_dim(
    shape: &ConfigShape,
    a: &VariableAssignment,
    points: &[ProjectivePointPair],
    field: &PrimeField,
) -> usize {
    let (m, n) = (shape.m, shape.n);
    let monos = all_monomials(m, n);
    let p = field.modulus() as i64;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for t in 1..=shape.k {
        let eqs = a.equations(t);
        for (c, &(i, j1, j2)) in monos.iter().enumerate() {
            let hit = eqs.contains(&Variable::X(i))
                || eqs.contains(&Variable::Y(j1))
                || eqs.contains(&Variable::Y(j2));
            if !hit {
                let mut row = vec![0; monos.len()];
                row[c] = 1;
                rows.push(row);
            }
        }
    }
    for pt in points {
        let x: Vec<i64> = pt.x.iter().map(|e| e.value() as i64).collect();
        let y: Vec<i64> = pt.y.iter().map(|e| e.value() as i64).collect();
        for a in 0..=m {
            rows.push(
                monos
                    .iter()
                    .map(|&(i, j1, j2)| if i == a { y[j1] * y[j2] % p } else { 0 })
                    .collect(),
            );
        }
        for b in 0..=n {
            rows.push(
                monos
                    .iter()
                    .map(|&(i, j1, j2)| {
                        let mult = (j1 == b) as i64 + (j2 == b) as i64;
                        let other = if j1 == b { y[j2] } else { y[j1] };
                        mult * x[i] * other % p
                    })
                    .collect(),
            );
        }
    }
    if rows.is_empty() {
        return monos.len();
    }
    let mat = DenseMatrix::from_rows(&rows, field).expect("small matrix");
    monos.len() - rank_mod_p(&mat, field)
}

pub fn subset(bits: u32) -> SubsetIndex {
    SubsetIndex::from_bits(bits)
}
