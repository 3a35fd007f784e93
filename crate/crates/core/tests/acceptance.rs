//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use segredefect::certs::{self, reverify, Certificate};
use segredefect::checker::{
    build_jacobian, check_configuration, matrix_dims, sample_points, Outcome,
};
use segredefect::configs::{
    assign_variables, classify_parity, derive_codims, erase_irrelevant, ideal_basis,
    inclusion_exclusion, secant_bounds, superset_sums, virtual_dim, ConfigShape, Parity,
};
use segredefect::families::inductant::{
    inductant_shape, trivially_nondefective, vdim_additivity_check, verify_inductant_relabeled,
};
use segredefect::families::{
    catalog_lookup, family_eval, nice_edges, trivial_inductants, ugly_edges, FamilySpec, Suite,
};
use segredefect::ffrank::{rank_mod_p, rank_rational_oracle, DenseMatrix, PrimeField};
use segredefect::suite::{run_basecases, EntryStatus, SuiteOptions, SuiteReport};

use common::{brute_force_dim, fill_shape, random_shape};

type Outcome_ = Result<String, String>;

const B0_SEED: u64 = 1738187985;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn b0_2_4() -> ConfigShape {
    family_eval(&catalog_lookup("B0").unwrap(), 2, 4).unwrap()
}

fn criterion_1(certs: &mut Vec<Certificate>) -> Outcome_ {
    let shape = b0_2_4();
    let started = Instant::now();
    let field = PrimeField::new(127).unwrap();
    let a = assign_variables(&shape);
    let basis = ideal_basis(&a);
    let pts = sample_points(&shape, &a, B0_SEED, &field).map_err(|e| e.to_string())?;
    let mat = build_jacobian(&shape, &a, &basis, &pts, &field).map_err(|e| e.to_string())?;
    ensure((mat.rows(), mat.cols()) == (39, 44), || {
        format!("matrix is {}x{}", mat.rows(), mat.cols())
    })?;
    let (v, cert) = check_configuration(&shape, B0_SEED, 127, 3).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(v.outcome == Outcome::NonDefective, || {
        format!("verdict {v}")
    })?;
    ensure((v.computed_dim, v.expected_dim) == (0, 0), || {
        format!("dims {v}")
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    certs.push(cert);
    Ok(format!("39x44, {v}, {:.3} s", elapsed.as_secs_f64()))
}

fn suite_certs(r: &SuiteReport, certs: &mut Vec<Certificate>) {
    certs.extend(r.entries.iter().filter_map(|e| e.certificate.clone()));
}

fn criterion_2(certs: &mut Vec<Certificate>) -> Outcome_ {
    let opts = SuiteOptions {
        size_cap: 100_000_000,
        ..SuiteOptions::default()
    };
    let r = run_basecases(Suite::Ugly, &opts);
    suite_certs(&r, certs);
    ensure(r.entries.len() == 18, || {
        format!("{} entries", r.entries.len())
    })?;
    for e in &r.entries {
        ensure(
            matches!(e.status, EntryStatus::Checked(v) if v.is_nondefective()),
            || format!("{}({},{}): {:?}", e.family, e.m, e.n, e.status),
        )?;
    }
    Ok("18/18 NonDefective".into())
}

fn criterion_3(certs: &mut Vec<Certificate>) -> Outcome_ {
    let opts = SuiteOptions {
        size_cap: 10_000_000,
        ..SuiteOptions::default()
    };
    let r = run_basecases(Suite::Nice, &opts);
    suite_certs(&r, certs);
    let mut checked = 0;
    for e in &r.entries {
        match &e.status {
            EntryStatus::Checked(v) if v.is_nondefective() => checked += 1,
            EntryStatus::Skipped => {}
            other => return Err(format!("{}({},{}): {other:?}", e.family, e.m, e.n)),
        }
    }
    for (f, m, n) in [
        ("A0", 3, 8),
        ("A0", 3, 9),
        ("A0", 4, 26),
        ("B0", 2, 4),
        ("B1", 2, 4),
        ("B2", 2, 5),
        ("C0", 4, 30),
    ] {
        let e = r
            .entries
            .iter()
            .find(|e| (e.family.as_str(), e.m, e.n) == (f, m, n))
            .unwrap();
        ensure(matches!(e.status, EntryStatus::Checked(_)), || {
            format!("{f}({m},{n}) was not checked")
        })?;
    }
    let e0 = family_eval(&catalog_lookup("E0").unwrap(), 9, 197).unwrap();
    let dims = matrix_dims(&e0);
    ensure(dims == (67752, 67824), || format!("E0(9,197) is {dims:?}"))?;
    Ok(format!(
        "{checked} NonDefective, {} skipped, E0(9,197) matrix 67752x67824",
        r.skipped()
    ))
}

fn binom3(m: i64) -> i64 {
    (m + 1) * m * (m - 1) / 6
}

fn criterion_4() -> Outcome_ {
    for (name, want) in [("B0", -1), ("B1", 0)] {
        let f = catalog_lookup(name).unwrap();
        let pts: Vec<_> = f.domain.sample(4, 8).into_iter().take(10).collect();
        ensure(pts.len() == 10, || {
            format!("{name}: only {} points", pts.len())
        })?;
        for (m, n) in pts {
            let v = virtual_dim(&family_eval(&f, m, n).unwrap());
            ensure(v == want, || format!("vdim {name}({m},{n}) = {v}"))?;
        }
    }
    let a0 = catalog_lookup("A0").unwrap();
    let mut count = 0;
    for m in 3..=10i64 {
        for n in m - 2..=200 {
            let expect = match classify_parity(m, n) {
                Parity::Nice => 3 * binom3(m) - (n + m + 1),
                Parity::Ugly => 3 * binom3(m) - (n + m + 1) / 2,
            };
            let v = virtual_dim(&family_eval(&a0, m, n).map_err(|e| e.to_string())?);
            ensure(v == expect, || {
                format!("vdim A0({m},{n}) = {v}, expected {expect}")
            })?;
            count += 1;
        }
    }
    Ok(format!(
        "B0 = -1 and B1 = 0 on 10 points each, A0 on {count} points"
    ))
}

fn edge_points(
    child: &FamilySpec,
    parent: &FamilySpec,
    step: &segredefect::families::InductantStep,
) -> Vec<(i64, i64)> {
    child
        .domain
        .sample(6, 30)
        .into_iter()
        .filter(|&(m, n)| {
            parent.domain.contains(m, n)
                && step
                    .apply(m, n)
                    .is_ok_and(|(a, b)| parent.domain.contains(a, b))
        })
        .collect()
}

fn criterion_5() -> Outcome_ {
    let edges: Vec<_> = nice_edges().into_iter().chain(ugly_edges()).collect();
    let mut fewest = usize::MAX;
    for e in &edges {
        let c = catalog_lookup(e.child).unwrap();
        let p = catalog_lookup(e.parent).unwrap();
        let pts = edge_points(&c, &p, &e.step);
        ensure(pts.len() >= 10, || {
            format!("{} <- {}: {} points", e.child, e.parent, pts.len())
        })?;
        fewest = fewest.min(pts.len());
        for (m, n) in pts {
            let ok = verify_inductant_relabeled(&c, &p, &e.step, &e.relabel, m, n)
                .map_err(|x| x.to_string())?;
            ensure(ok, || {
                format!("{} <- {} fails at ({m},{n})", e.child, e.parent)
            })?;
            let add = vdim_additivity_check(&p, &e.step, m, n).map_err(|x| x.to_string())?;
            ensure(add, || {
                format!("{} <- {} additivity fails at ({m},{n})", e.child, e.parent)
            })?;
        }
    }
    Ok(format!(
        "{} edges, at least {fewest} points each",
        edges.len()
    ))
}

fn criterion_6() -> Outcome_ {
    let mut count = 0;
    for m in 3..=12i64 {
        for parity in [Parity::Nice, Parity::Ugly] {
            let bound = match parity {
                Parity::Nice => 3 * binom3(m) - m - 1,
                Parity::Ugly => 6 * binom3(m) - m - 1,
            };
            for n in bound..=bound + 50 {
                if classify_parity(m, n) != parity {
                    continue;
                }
                let (mi, ni) = (m as i128, n as i128);
                let ups = ((mi + 1) * (ni - mi + 2)).div_euclid(2) + 1;
                let total = (mi + 1) * (ni + 2) * (ni + 1) / 2;
                let upr = (total + ni + mi) / (ni + mi + 1);
                let b = secant_bounds(m, n);
                ensure((b.ups, b.upr) == (ups, upr), || format!("({m},{n}): {b:?}"))?;
                ensure(ups == upr, || format!("({m},{n}): ups {ups} != upr {upr}"))?;
                let expect = match parity {
                    Parity::Nice => 3 * binom3(m) - n - m - 1,
                    Parity::Ugly => 3 * binom3(m) - (n + m + 1) / 2,
                } as i128;
                ensure(b.remainder == expect, || {
                    format!("({m},{n}): remainder {} expected {expect}", b.remainder)
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} (m,n) pairs"))
}

fn criterion_7() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let s = random_shape(&mut rng, 5, 6, 8, 3);
        for tilde in [&s.tilde_u, &s.tilde_v] {
            let back = inclusion_exclusion(&superset_sums(tilde));
            let orig: Vec<i64> = tilde.iter().map(|&x| x as i64).collect();
            ensure(back == orig, || format!("round trip fails on\n{s}"))?;
        }
    }

    let field = PrimeField::new(127).unwrap();
    let p = 127i64;
    let mut euler_points = 0;
    let mut shapes = 0;
    while shapes < 100 {
        let mut s = random_shape(&mut rng, 3, 4, 5, 2);
        s.points[0] = s.points[0].max(1);
        let a = assign_variables(&s);
        let basis = ideal_basis(&a);
        if basis.is_empty() {
            continue;
        }
        shapes += 1;
        let pts = sample_points(&s, &a, rng.gen(), &field).map_err(|e| e.to_string())?;
        let mat = build_jacobian(&s, &a, &basis, &pts, &field).map_err(|e| e.to_string())?;
        let width = s.m + s.n + 2;
        for (idx, pt) in pts
            .iter()
            .enumerate()
            .filter(|(_, pt)| pt.constraint.is_empty())
        {
            let base = idx * width;
            for r in 0..mat.rows() {
                let mut acc = 0i64;
                for (a, x) in pt.x.iter().enumerate() {
                    acc += 2 * x.value() as i64 * mat.get(r, base + a).value() as i64;
                }
                for (b, y) in pt.y.iter().enumerate() {
                    acc -= y.value() as i64 * mat.get(r, base + s.m + 1 + b).value() as i64;
                }
                ensure(acc.rem_euclid(p) == 0, || {
                    format!("Euler relation fails on\n{s}")
                })?;
            }
            euler_points += 1;
        }
    }

    for _ in 0..200 {
        let rows: Vec<Vec<i64>> = (0..15)
            .map(|_| (0..20).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();
        let rp = rank_mod_p(&DenseMatrix::from_rows(&rows, &field).unwrap(), &field);
        let rq = rank_rational_oracle(&rows);
        ensure(rp <= rq, || {
            format!("rank mod 127 {rp} exceeds rational rank {rq}")
        })?;
    }

    for _ in 0..500 {
        let s = random_shape(&mut rng, 4, 5, 6, 3);
        let e = erase_irrelevant(&s);
        ensure(virtual_dim(&e) == virtual_dim(&s), || {
            format!("erase changes vdim of\n{s}")
        })?;
        let d = derive_codims(&s);
        for i in s.subsets() {
            if d.codim(i) == 0 {
                ensure(e.points[i.index()] == 0, || {
                    format!("irrelevant points kept in\n{s}")
                })?;
            }
        }
    }
    Ok(format!(
        "1000 round trips, Euler on {euler_points} points of 100 shapes, 200 rank pairs, 500 erasures"
    ))
}

fn criterion_8() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let field = PrimeField::new(127).unwrap();
    let mut done = 0;
    let mut with_subvarieties = 0;
    while done < 60 {
        let m = rng.gen_range(0..=4usize);
        let n = rng.gen_range(0..=(30 / (m + 1) - 1));
        let k = rng.gen_range(0..=3);
        let Some(s) = fill_shape(&mut rng, m, n, k, 4) else {
            continue;
        };
        let a = assign_variables(&s);
        let basis = ideal_basis(&a);
        let pts = sample_points(&s, &a, rng.gen(), &field).map_err(|e| e.to_string())?;
        let filtered = build_jacobian(&s, &a, &basis, &pts, &field).map_err(|e| e.to_string())?;
        let dim = basis.len() - rank_mod_p(&filtered, &field);
        let brute = brute_force_dim(&s, &a, &pts, &field);
        ensure(dim == brute, || {
            format!("filtered {dim} vs brute force {brute} on\n{s}")
        })?;
        done += 1;
        with_subvarieties += (s.k > 0) as usize;
    }
    Ok(format!(
        "{done} shapes agree ({with_subvarieties} with subvarieties)"
    ))
}

fn criterion_9() -> Outcome_ {
    let mut total = 0;
    for (name, step) in trivial_inductants() {
        let f = catalog_lookup(name).unwrap();
        let pts: Vec<_> = f
            .domain
            .sample(6, 40)
            .into_iter()
            .filter(|&(m, n)| step.apply(m, n).is_ok_and(|(a, b)| f.domain.contains(a, b)))
            .take(5)
            .collect();
        ensure(pts.len() == 5, || {
            format!("{name}: only {} points", pts.len())
        })?;
        for (m, n) in pts {
            let (mm, nn) = step.apply(m, n).unwrap();
            let big = family_eval(&f, m, n).unwrap();
            let small = family_eval(&f, mm, nn).unwrap();
            let child = inductant_shape(&big, &small).map_err(|e| e.to_string())?;
            ensure(trivially_nondefective(&child), || {
                format!("{name} [{step}] at ({m},{n}) is not trivial:\n{child}")
            })?;
            total += 1;
        }
    }
    Ok(format!("{total} trivial inductants"))
}

fn mutate(c: &Certificate, rng: &mut ChaCha8Rng) -> Certificate {
    let mut d = c.clone();
    let field = PrimeField::new(c.prime).unwrap();
    let pt = rng.gen_range(0..d.points.len());
    let point = &mut d.points[pt];
    let in_x = rng.gen_bool(point.x.len() as f64 / (point.x.len() + point.y.len()) as f64);
    let coords = if in_x { &mut point.x } else { &mut point.y };
    let idx = rng.gen_range(0..coords.len());
    let shift = rng.gen_range(1..c.prime);
    coords[idx] = field.elem((coords[idx].value() + shift) % c.prime);
    d
}

fn criterion_10(certs: &[Certificate]) -> Outcome_ {
    for c in certs {
        let back = certs::parse(&c.to_string()).map_err(|e| e.to_string())?;
        ensure(&back == c, || "parse(emit(c)) differs from c".into())?;
        ensure(reverify(&back).map_err(|e| e.to_string())?, || {
            format!("certificate fails to reverify:\n{c}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let candidates: Vec<&Certificate> = certs.iter().filter(|c| !c.points.is_empty()).collect();
    let mut flipped = 0;
    let mut matrix_flipped = 0;
    for _ in 0..100 {
        let c = candidates[rng.gen_range(0..candidates.len())];
        let d = mutate(c, &mut rng);
        let parsed = certs::parse(&d.to_string()).ok();
        let holds = |f: fn(&Certificate) -> Result<bool, segredefect::checker::CheckError>| {
            parsed.as_ref().is_some_and(|p| f(p).unwrap_or(false))
        };
        flipped += !holds(reverify) as usize;
        matrix_flipped += !holds(certs::reverify_matrix) as usize;
    }
    ensure(flipped >= 99, || {
        format!("only {flipped}/100 mutations detected")
    })?;
    Ok(format!(
        "{} certificates round-trip and reverify, {flipped}/100 mutations detected ({matrix_flipped}/100 by the matrix alone)",
        certs.len()
    ))
}

fn main() -> ExitCode {
    let mut certs = Vec::new();
    let mut results: Vec<(u32, &str, Outcome_)> = Vec::new();
    let t = Instant::now();
    results.push((1, "B0(2,4) certificate", criterion_1(&mut certs)));
    results.push((2, "ugly base cases", criterion_2(&mut certs)));
    results.push((3, "nice base cases, cap 1e7", criterion_3(&mut certs)));
    results.push((4, "virtual dimension regression", criterion_4()));
    results.push((5, "inductant edges", criterion_5()));
    results.push((6, "arithmetic lemma", criterion_6()));
    results.push((7, "property suite", criterion_7()));
    results.push((8, "brute-force oracle", criterion_8()));
    results.push((9, "trivial inductants", criterion_9()));
    results.push((
        10,
        "certificate round trip and mutation",
        criterion_10(&certs),
    ));
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        results.len() - failed,
        results.len(),
        t.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
