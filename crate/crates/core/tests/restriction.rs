use segredefect::configs::{derive_codims, restrict, RestrictError, SubsetIndex};
use segredefect::families::{catalog_lookup, family_eval, nice_edges, q_poly, ugly_edges};

#[test]
fn b0_restricts_to_a0() {
    let a0 = catalog_lookup("A0").unwrap();
    let b0 = catalog_lookup("B0").unwrap();
    for (m, n) in b0.domain.sample(4, 12) {
        let q = q_poly().eval(m, 0);
        let q = *q.numer() as i64;
        let r = restrict(&family_eval(&b0, m, n).unwrap(), 1).unwrap();
        let a = family_eval(&a0, m - 2, n - q).unwrap();
        assert_eq!(r, a, "B0({m},{n})");
    }
}

/// For edges without a relabeling the new subvariety is the last one, and
/// restricting to it gives back the parent at the step target, except for
/// points the child erased as irrelevant.
#[test]
fn children_restrict_to_their_parents() {
    let mut tested = 0;
    for e in nice_edges().into_iter().chain(ugly_edges()) {
        if e.relabel
            .images()
            .iter()
            .enumerate()
            .any(|(i, &t)| t != i + 1)
        {
            continue;
        }
        let c = catalog_lookup(e.child).unwrap();
        let p = catalog_lookup(e.parent).unwrap();
        for (m, n) in c.domain.sample(3, 10) {
            let Ok((mm, nn)) = e.step.apply(m, n) else {
                continue;
            };
            if !p.domain.contains(m, n) || !p.domain.contains(mm, nn) {
                continue;
            }
            let child = family_eval(&c, m, n).unwrap();
            let r = restrict(&child, c.k).unwrap();
            let parent = family_eval(&p, mm, nn).unwrap();
            assert_eq!((&r.tilde_u, &r.tilde_v), (&parent.tilde_u, &parent.tilde_v));
            let codims = derive_codims(&child);
            let new = SubsetIndex::singleton(c.k);
            for i in r.subsets() {
                let lifted = i.union(new);
                let want = if codims.codim(lifted) == 0 {
                    0
                } else {
                    parent.points[i.index()]
                };
                assert_eq!(r.points[i.index()], want, "{} at ({m},{n}), I={i}", e.child);
            }
            tested += 1;
        }
    }
    assert!(tested > 100);
}

#[test]
fn restriction_errors() {
    let b0 = family_eval(&catalog_lookup("B0").unwrap(), 2, 4).unwrap();
    assert!(matches!(
        restrict(&b0, 2),
        Err(RestrictError::NoSuchSubvariety { .. })
    ));
}
