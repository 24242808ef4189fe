//! Invariants from the module contracts as property tests over the corpus.

use fusionkit::fusion::FusionSystem;
use fusionkit::group::{p_part, Group, Subset};
use fusionkit::index::{build_triple_p_power, check_triple, enumerate_subsystem_lattice, hyperfocal_subgroup, Choice, Kind};
use fusionkit::linking::{choose_inclusions, lambda_functor, linking_from_group, Objects};
use fusionkit::pgroup::{bits, image_of, PGroup};
use fusionkit::presets::preset;
use proptest::prelude::*;

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

fn entry(i: usize) -> (&'static str, Group, usize) {
    let (n, p) = CORPUS[i % CORPUS.len()];
    (n, preset(n).unwrap(), p)
}

fn order(x: &Subset) -> usize {
    x.count_ones(..)
}

fn s_subgroups(g: &Group, p: usize) -> (Subset, Vec<Subset>) {
    let s = g.sylow(p);
    let subs = g.intermediate_subgroups(&g.trivial(), &s);
    (s, subs)
}

/// `F_S(G)`-centric by the definition: `C_S(P') ≤ P'` for every conjugate `P'` lying in `S`.
fn centric_by_definition(g: &Group, s: &Subset, x: &Subset) -> bool {
    (0..g.order()).map(|c| g.conj_set(c, x)).filter(|y| y.is_subset(s)).all(|y| {
        let mut c = g.centralizer(&y);
        c.intersect_with(s);
        c.is_subset(&y)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sylow_order_is_the_p_part(i in 0usize..14, q in prop::sample::select(vec![2usize, 3, 5])) {
        let (_, g, _) = entry(i);
        let s = g.sylow(q);
        prop_assert_eq!(order(&s), p_part(g.order(), q));
        prop_assert!(g.is_subgroup(&s));
        prop_assert!(s.ones().all(|x| fusionkit::group::is_p_power(g.elem_order(x), q)));
    }

    #[test]
    fn upper_p_subgroups_agree_across_definitions(i in 0usize..14, q in prop::sample::select(vec![2usize, 3, 5])) {
        let (_, g, _) = entry(i);
        let all = g.all();
        let a = g.o_upper_p_of(&all, q);
        prop_assert_eq!(&a, &g.o_upper_p_via_normals(&all, q));
        prop_assert_eq!(&a, &g.o_upper_p_via_series(&all, q));
        prop_assert_eq!(g.o_upper_pprime_of(&all, q), g.o_upper_pprime_via_normals(&all, q));
    }

    #[test]
    fn hyperfocal_oracles_agree(i in 0usize..14) {
        let (name, g, p) = entry(i);
        let (s, subs) = s_subgroups(&g, p);
        let both = g.hyperfocal_group_oracle(&s, p, &subs);
        prop_assert!(both.is_ok(), "{}: {:?}", name, both.err());
        let f = FusionSystem::from_group_sylow(&g, p).unwrap();
        prop_assert_eq!(popcount_of(hyperfocal_subgroup(&f).unwrap()), order(&both.unwrap()));
    }

    #[test]
    fn centric_iff_center_is_sylow_in_centralizer(i in 0usize..14, k in any::<prop::sample::Index>()) {
        let (_, g, p) = entry(i);
        let (s, subs) = s_subgroups(&g, p);
        let x = &subs[k.index(subs.len())];
        let z = g.center_of(x);
        let c = g.centralizer(x);
        let sylow = order(&z) == p_part(order(&c), p);
        prop_assert_eq!(centric_by_definition(&g, &s, x), sylow);
    }

    #[test]
    fn quasicentric_iff_centralizer_has_normal_p_complement(i in 0usize..14, k in any::<prop::sample::Index>()) {
        let (_, g, p) = entry(i);
        let (s, subs) = s_subgroups(&g, p);
        let x = &subs[k.index(subs.len())];
        let c = g.centralizer(x);
        // A normal subgroup of p'-order and p-power index: the largest normal p'-subgroup must have p-power index.
        let n = g.o_pprime_of(&c, p);
        let group_side = order(&c) / order(&n) == p_part(order(&c), p);
        let f = FusionSystem::from_group_sylow(&g, p).unwrap();
        let masks: Vec<u64> = f.s().subgroups().to_vec();
        let (_, emb) = PGroup::from_subgroup(&g, &s, p).unwrap();
        let m = (0..emb.len()).filter(|&j| x.contains(emb[j])).fold(0u64, |a, j| a | (1 << j));
        let pid = masks.iter().position(|&y| y == m).unwrap();
        prop_assert_eq!(f.is_quasicentric(pid), group_side);
        prop_assert_eq!(f.is_quasicentric_by_criterion(pid), group_side);
    }

    #[test]
    fn gorenstein_p_prime_automorphisms_are_trivial(i in 0usize..14) {
        let (_, g, p) = entry(i);
        let f = FusionSystem::from_group_sylow(&g, p).unwrap();
        let s = f.s();
        for &pm in s.subgroups() {
            if fusionkit::pgroup::popcount(pm) > 16 {
                continue;
            }
            let (pg, _) = s.subgroup_pgroup(pm);
            let auts = pg.automorphisms().unwrap();
            for &q in pg.subgroups() {
                if !pg.is_normal(q, pg.full()) {
                    continue;
                }
                for a in &auts {
                    let ord = fusionkit::fusion::map_order(a);
                    if ord % p == 0 {
                        continue;
                    }
                    let fixes_q = bits(q).all(|x| a[x] as usize == x);
                    let on_quotient = (0..pg.order()).all(|x| q >> pg.mul(a[x] as usize, pg.inv(x)) & 1 == 1);
                    if fixes_q && on_quotient {
                        prop_assert_eq!(ord, 1);
                    }
                }
            }
        }
    }

    #[test]
    fn triples_satisfy_their_axioms(i in 0usize..14, last in any::<bool>()) {
        let (name, g, p) = entry(i);
        let f = FusionSystem::from_group_sylow(&g, p).unwrap();
        let t = build_triple_p_power(&f, if last { Choice::Last } else { Choice::First }).unwrap();
        let r = check_triple(&f, &t);
        prop_assert!(r.is_ok(), "{}: {:?}", name, r.err());
    }

    #[test]
    fn p_power_subsystems_keep_quasicentric_flags(i in 0usize..14) {
        let (_, g, p) = entry(i);
        let f = FusionSystem::from_group_sylow(&g, p).unwrap();
        let s = f.s();
        let lat = enumerate_subsystem_lattice(&f, Kind::PPower, false).unwrap();
        for e in &lat.entries {
            let sys = &e.subsystem.system;
            let t = sys.s();
            for tid in 0..t.num_subgroups() {
                let m = image_of(&e.subsystem.emb, t.sub(tid));
                prop_assert_eq!(sys.is_quasicentric(tid), f.is_quasicentric(s.sub_id(m)));
            }
        }
    }

    #[test]
    fn prime_index_subsystems_keep_flags(i in 0usize..14) {
        let (_, g, p) = entry(i);
        let f = FusionSystem::from_group_sylow(&g, p).unwrap();
        let lat = enumerate_subsystem_lattice(&f, Kind::PrimeToP, false).unwrap();
        for e in &lat.entries {
            let sys = &e.subsystem.system;
            for pid in 0..f.s().num_subgroups() {
                prop_assert_eq!(sys.is_centric(pid), f.is_centric(pid));
                prop_assert_eq!(sys.is_fully_centralized(pid), f.is_fully_centralized(pid));
                prop_assert_eq!(sys.is_fully_normalized(pid), f.is_fully_normalized(pid));
            }
        }
    }

    #[test]
    fn delta_is_injective_and_lambda_restricts_to_the_projection(i in 0usize..14) {
        let (_, g, p) = entry(i);
        let l = linking_from_group(&g, &g.sylow(p), p, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let s = l.s();
        for a in 0..l.num_objects() {
            for b in 0..l.num_objects() {
                let n = s.transporter(l.object_mask(a), l.object_mask(b));
                let mut tokens: Vec<usize> = bits(n).map(|x| incs.delta_pq(a, b, x).unwrap()).collect();
                tokens.sort_unstable();
                tokens.dedup();
                prop_assert_eq!(tokens.len(), fusionkit::pgroup::popcount(n));
            }
        }
        let lam = lambda_functor(&l, &incs).unwrap();
        let so = l.s_object().unwrap();
        let hyp = hyperfocal_subgroup(l.fusion()).unwrap();
        for x in 0..s.order() {
            prop_assert_eq!(lam.values[l.delta(so, x).unwrap()], lam.theta[x]);
            prop_assert_eq!(lam.theta[x] == lam.gamma.identity(), hyp >> x & 1 == 1);
        }
    }

    #[test]
    fn alperin_words_recompose(i in 0usize..14, k in any::<prop::sample::Index>()) {
        let (_, g, p) = entry(i);
        let f = FusionSystem::from_group_sylow(&g, p).unwrap();
        let all: Vec<_> = f.all_homs().iter().flatten().cloned().collect();
        let phi = &all[k.index(all.len())];
        let w = f.alperin_decompose(phi).unwrap();
        prop_assert_eq!(&w.recompose(f.s()), phi);
    }
}

fn popcount_of(m: u64) -> usize {
    m.count_ones() as usize
}
