use fusionkit::group::{Group, Subset};
use fusionkit::index::{gamma_p, hyperfocal_subgroup, theta_hat};
use fusionkit::linking::*;
use fusionkit::pgroup::{bits, popcount};
use fusionkit::presets::preset;

const CORPUS: [(&str, usize); 14] = [
    ("C2", 2),
    ("C4", 2),
    ("D8", 2),
    ("Q8", 2),
    ("V4", 2),
    ("S3", 2),
    ("S3", 3),
    ("A4", 2),
    ("S4", 2),
    ("SL23", 2),
    ("A5", 2),
    ("A6", 2),
    ("C3", 3),
    ("S3xC2", 2),
];

fn build(name: &str, p: usize, kind: Objects) -> (Group, LinkingSystem) {
    let g = preset(name).unwrap();
    let l = linking_from_group(&g, &g.sylow(p), p, kind).unwrap_or_else(|e| panic!("{name}/{p}: {e}"));
    (g, l)
}

#[test]
fn group_linking_systems_pass_axioms_and_lambda_exists() {
    for (name, p) in CORPUS {
        for kind in [Objects::Centric, Objects::Quasicentric] {
            let (_, l) = build(name, p, kind);
            let incs = choose_inclusions(&l).unwrap_or_else(|e| panic!("{name}/{p}: {e}"));
            let lam = lambda_functor(&l, &incs).unwrap_or_else(|e| panic!("{name}/{p}: {e}"));
            let hyp = hyperfocal_subgroup(l.fusion()).unwrap();
            assert_eq!(lam.gamma.order() * popcount(hyp), l.s().order(), "{name}/{p}");
            // Morphisms coming from elements of O^p(G) map to 1.
            let r = l.realization().unwrap();
            let op = r.group.o_upper_p_of(&r.group.all(), p);
            for t in 0..l.num_morphisms() {
                if op.contains(r.reps[t]) {
                    assert_eq!(lam.values[t], lam.gamma.identity(), "{name}/{p} token {t}");
                }
            }
        }
    }
}

#[test]
fn lambda_examples() {
    let (_, l) = build("A6", 2, Objects::Quasicentric);
    let lam = lambda_functor(&l, &choose_inclusions(&l).unwrap()).unwrap();
    assert_eq!(lam.gamma.order(), 1);
    let (_, l) = build("S4", 2, Objects::Quasicentric);
    let lam = lambda_functor(&l, &choose_inclusions(&l).unwrap()).unwrap();
    assert_eq!(lam.gamma.order(), 2);
    let (_, l) = build("C2", 2, Objects::Quasicentric);
    let lam = lambda_functor(&l, &choose_inclusions(&l).unwrap()).unwrap();
    let so = l.s_object().unwrap();
    for x in 0..2 {
        assert_eq!(lam.values[l.delta(so, x).unwrap()], lam.theta[x]);
    }
    assert_eq!(lam.gamma.order(), 2);
}

#[test]
fn inclusions_restrictions_and_factorizations() {
    let (_, l) = build("S4", 2, Objects::Quasicentric);
    let incs = choose_inclusions(&l).unwrap();
    let k = l.num_objects();
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if let (Some(ab), Some(bc)) = (incs.inclusion(a, b), incs.inclusion(b, c)) {
                    assert_eq!(l.compose(bc, ab), incs.inclusion(a, c));
                }
            }
        }
    }
    for phi in 0..l.num_morphisms() {
        let m = l.morphism(phi);
        factor_through_image(&l, &incs, phi).unwrap();
        for psi in l.into_obj(m.tgt) {
            let im_phi = fusionkit::pgroup::img(&m.proj);
            let im_psi = fusionkit::pgroup::img(&l.morphism(psi).proj);
            let res = restrict_morphism(&l, phi, psi);
            if im_phi & !im_psi == 0 {
                let chi = res.unwrap();
                assert_eq!(l.compose(psi, chi), Some(phi));
            } else {
                assert!(res.is_err());
            }
        }
    }
}

#[test]
fn pi1_of_a6_matches_the_amalgam() {
    let (g, l) = build("A6", 2, Objects::Quasicentric);
    let incs = choose_inclusions(&l).unwrap();
    let pres = pi1_presentation(&l, &incs);
    assert_eq!(pres.relations.len(), l.num_composable_pairs() + incs.inclusions().count());
    let ab = pres.abelianization().unwrap();
    check_conjugation(&l, &ab, Some(&lambda_functor(&l, &incs).unwrap())).unwrap();

    let r = l.realization().unwrap();
    let s: Subset = g.set_of(r.emb.iter().copied());
    let fours: Vec<Subset> = g
        .intermediate_subgroups(&g.trivial(), &s)
        .into_iter()
        .filter(|h| h.count_ones(..) == 4 && h.ones().all(|x| g.elem_order(x) <= 2))
        .collect();
    assert_eq!(fours.len(), 2);
    let n1 = g.normalizer(&fours[0]);
    let n2 = g.normalizer(&fours[1]);
    assert_eq!(n1.count_ones(..), 24);
    assert_eq!(n2.count_ones(..), 24);
    let mut both = n1.clone();
    both.intersect_with(&n2);
    assert_eq!(both, s);
    let amalgam = amalgam_presentation(&g, &n1, &n2).abelianization().unwrap();
    assert_eq!(ab.invariants, amalgam.invariants);
    // Each Σ4 contributes a Z/2, and D8 identifies an odd element of one with an even element of the other.
    assert!(amalgam.invariants.torsion.is_empty());
    assert_eq!(amalgam.invariants.rank, 0);
}

#[test]
fn pi1_of_small_systems() {
    let (_, l) = build("C2", 2, Objects::Quasicentric);
    let incs = choose_inclusions(&l).unwrap();
    let ab = pi1_presentation(&l, &incs).abelianization().unwrap();
    assert!(ab.invariants.p_part(2).contains(&2));
    for (name, p) in CORPUS {
        let (_, l) = build(name, p, Objects::Quasicentric);
        let incs = choose_inclusions(&l).unwrap();
        let ab = pi1_presentation(&l, &incs).abelianization().unwrap();
        let lam = lambda_functor(&l, &incs).unwrap();
        check_conjugation(&l, &ab, Some(&lam)).unwrap_or_else(|e| panic!("{name}/{p}: {e}"));
        // λ factors through π₁, so Γ_p(F)^ab is a quotient of the abelianization.
        let (gamma, _) = gamma_p(l.fusion()).unwrap();
        assert_eq!(ab.invariants.rank, 0, "{name}/{p}");
        let gab = gamma.order() / gamma.derived_subgroup_of(&gamma.all()).count_ones(..);
        assert_eq!(ab.invariants.order().unwrap() % gab as u128, 0, "{name}/{p}");
    }
}

#[test]
fn sub_linking_systems() {
    let (_, l) = build("S4", 2, Objects::Quasicentric);
    let incs = choose_inclusions(&l).unwrap();
    let lam = lambda_functor(&l, &incs).unwrap();
    let all = lam.gamma.all();
    let same = sub_linking_from_functor(&l, &incs, &lam.gamma, &lam.theta, &lam.values, &all).unwrap();
    assert_eq!(same.linking.num_morphisms(), l.num_morphisms());
    let triv = lam.gamma.trivial();
    let sub = sub_linking_from_functor(&l, &incs, &lam.gamma, &lam.theta, &lam.values, &triv).unwrap();
    assert_eq!(popcount(sub.s_h), 4);
    let (_, a4) = build("A4", 2, Objects::Quasicentric);
    assert!(sub.linking.fusion().is_isomorphic(a4.fusion()).unwrap());
    assert!(find_linking_isomorphism(&sub.linking, &a4).unwrap().is_some());

    let (_, l) = build("SL23", 2, Objects::Centric);
    let incs = choose_inclusions(&l).unwrap();
    let th = theta_hat(l.fusion()).unwrap();
    let gamma = th.quotient.gamma.clone();
    assert_eq!(gamma.order(), 3);
    let values = values_through_projection(&l, &th.values).unwrap();
    let theta = vec![gamma.identity(); l.s().order()];
    let sub = sub_linking_from_functor(&l, &incs, &gamma, &theta, &values, &gamma.trivial()).unwrap();
    assert_eq!(popcount(sub.s_h), 8);
    let (_, q8) = build("Q8", 2, Objects::Centric);
    assert!(find_linking_isomorphism(&sub.linking, &q8).unwrap().is_some());
    assert!(find_linking_isomorphism(&l, &q8).unwrap().is_none());
}

#[test]
fn central_quotient_of_sl23() {
    let (_, l) = build("SL23", 2, Objects::Centric);
    let s = l.s();
    let z = s.center(s.full());
    let q = linking_quotient(&l, z).unwrap();
    for m in 0..l.num_morphisms() {
        let mm = l.morphism(m);
        if z & !l.object_mask(mm.src) == 0 {
            assert!(q.orbit_rep.contains(&m) || q.orbit_rep.iter().any(|&r| {
                l.morphism(r).src == mm.src && l.morphism(r).tgt == mm.tgt
            }));
        }
    }
    let (_, a4) = build("A4", 2, Objects::Centric);
    assert!(find_linking_isomorphism(&q.centric, &a4).unwrap().is_some());
    // Counts divide by |A| on every pair of objects containing A.
    let k = l.num_objects();
    let mut total = 0;
    for a in 0..k {
        for b in 0..k {
            if z & !l.object_mask(a) == 0 && z & !l.object_mask(b) == 0 {
                total += l.mor(a, b).len();
            }
        }
    }
    assert_eq!(q.quotient.num_morphisms() * popcount(z), total);
    assert!(linking_quotient(&l, s.full()).is_err());
    let trivial = linking_quotient(&l, 1).unwrap();
    assert!(find_linking_isomorphism(&trivial.quotient, &l).unwrap().is_some());
}

#[test]
fn quotient_compatibility_with_group_quotients() {
    // SL(2,3)/Z ≅ A4 and Q8/Z ≅ V4 and C4/C2 ≅ C2.
    for name in ["SL23", "Q8", "C4", "D8"] {
        let g = preset(name).unwrap();
        let (_, l) = build(name, 2, Objects::Centric);
        let s = l.s();
        let r = l.realization().unwrap();
        let zg = g.center_of(&g.all());
        let a = bits(s.center(s.full()))
            .filter(|&x| zg.contains(r.emb[x]))
            .fold(0u64, |acc, x| acc | (1 << x));
        let a = bits(a).filter(|&x| s.elem_order(x) <= 2).fold(0u64, |acc, x| acc | (1 << x));
        if !fusionkit::central::is_central(l.fusion(), a).unwrap() {
            continue;
        }
        let q = linking_quotient(&l, a).unwrap();
        let ag = g.set_of(bits(a).map(|x| r.emb[x]));
        let (gq, _) = g.quotient(&ag);
        let lq = linking_from_group(&gq, &gq.sylow(2), 2, Objects::Centric).unwrap();
        assert!(find_linking_isomorphism(&q.centric, &lq).unwrap().is_some(), "{name}");
    }
}

#[test]
fn corrupted_linking_fixtures() {
    let (_, l) = build("S4", 2, Objects::Quasicentric);
    let so = l.s_object().unwrap();
    let auts = l.mor(so, so).to_vec();
    let mut bad = l.clone();
    let (g, f) = (auts[1], auts[2]);
    let h = l.compose(g, f).unwrap();
    let wrong = *auts.iter().find(|&&t| t != h).unwrap();
    bad.corrupt_composition(g, f, wrong);
    let r = check_linking_axioms(&bad);
    assert!(!r.is_ok());
    assert!(r.witness(LinkingAxiom::Category).is_some() || r.witness(LinkingAxiom::C).is_some());

    let mut bad = l.clone();
    let z = bits(l.s().center(l.s().full())).find(|&x| x != 0).unwrap();
    bad.corrupt_delta(so, z, l.identity(so));
    let r = check_linking_axioms(&bad);
    assert!(r.failed().contains(&LinkingAxiom::A), "{r}");
}
