use fusionkit::central::{center, check_quotient_lemmas, quotient_fusion};
use fusionkit::cocycle::*;
use fusionkit::fusion::FusionSystem;
use fusionkit::linking::{choose_inclusions, linking_from_group, Objects};
use fusionkit::presets::preset;
use proptest::prelude::*;

const SMALL: [(&str, usize); 9] = [
    ("C2", 2),
    ("C4", 2),
    ("V4", 2),
    ("D8", 2),
    ("Q8", 2),
    ("S3", 2),
    ("A4", 2),
    ("S4", 2),
    ("C3", 3),
];

#[test]
fn every_stable_class_round_trips() {
    for (name, p) in SMALL {
        let g = preset(name).unwrap();
        let l = linking_from_group(&g, &g.sylow(p), p, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let coeff = Coeff::new(p, 1).unwrap();
        let stable = h2_fusion_stable(l.fusion(), coeff).unwrap();
        for coords in stable.classes() {
            let w = stable.h2.combination(&coords);
            let cw = category_cocycle_from_class(&l, &w).unwrap_or_else(|e| panic!("{name}: {e}"));
            let e = central_extension_build(&l, &incs, &cw).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(e.fusion().is_saturated(), "{name}");
            let q = quotient_fusion(e.fusion(), e.group.a_mask).unwrap();
            assert!(q.system.is_isomorphic(l.fusion()).unwrap(), "{name}");
            check_quotient_lemmas(e.fusion(), &q).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(lift_test(l.fusion(), &e.group, &stable).unwrap(), "{name}");
        }
    }
}

#[test]
fn extension_count_matches_stable_classes() {
    for (name, p) in SMALL {
        let g = preset(name).unwrap();
        let l = linking_from_group(&g, &g.sylow(p), p, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let (classes, order) = count_central_extensions(&l, &incs, Coeff::new(p, 1).unwrap()).unwrap();
        assert_eq!(classes, order, "{name}");
    }
}

#[test]
fn stable_classes_of_minimal_systems_are_everything() {
    for name in ["C2", "V4", "C4", "D8"] {
        let s = std::sync::Arc::new(fusionkit::PGroup::new(preset(name).unwrap(), 2).unwrap());
        let f = FusionSystem::minimal(s);
        let stable = h2_fusion_stable(&f, Coeff::new(2, 1).unwrap()).unwrap();
        assert_eq!(stable.dim(), stable.h2.dim(), "{name}");
    }
    // A4 acts on H²(V4; Z/2) with a one-dimensional fixed space.
    let f = FusionSystem::from_group_sylow(&preset("A4").unwrap(), 2).unwrap();
    assert_eq!(h2_fusion_stable(&f, Coeff::new(2, 1).unwrap()).unwrap().dim(), 1);
}

#[test]
fn rank_two_coefficients() {
    let g = preset("S3").unwrap();
    let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
    let incs = choose_inclusions(&l).unwrap();
    let coeff = Coeff::new(2, 2).unwrap();
    let stable = h2_fusion_stable(l.fusion(), coeff).unwrap();
    assert_eq!(stable.order(), 4);
    for coords in stable.classes() {
        let cw = category_cocycle_from_class(&l, &stable.h2.combination(&coords)).unwrap();
        let e = central_extension_build(&l, &incs, &cw).unwrap();
        assert_eq!(e.group.group.order(), 8);
        assert_eq!(center(e.fusion()).unwrap(), e.group.group.full());
    }
}

#[test]
fn split_extension_from_the_zero_cocycle() {
    let g = preset("A4").unwrap();
    let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
    let incs = choose_inclusions(&l).unwrap();
    let coeff = Coeff::new(2, 1).unwrap();
    let e = central_extension_build(&l, &incs, &CategoryCocycle::zero(&l, coeff)).unwrap();
    assert!((0..8).all(|x| e.group.group.elem_order(x) <= 2));
    let iso = cohomologous_invariance(&l, &incs, &CategoryCocycle::zero(&l, coeff), &vec![0; l.num_morphisms()]).unwrap();
    assert!(iso.sigma.iter().enumerate().all(|(x, &y)| x == y as usize));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn random_coboundaries_give_isomorphic_extensions(seed in any::<u64>(), nontrivial in any::<bool>()) {
        let g = preset("S3").unwrap();
        let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let coeff = Coeff::new(2, 1).unwrap();
        let stable = h2_fusion_stable(l.fusion(), coeff).unwrap();
        let w = stable.h2.combination(&[nontrivial as usize]);
        let cw = category_cocycle_from_class(&l, &w).unwrap();
        let ids: Vec<usize> = (0..l.num_objects()).map(|a| l.identity(a)).collect();
        let mu: Vec<usize> = (0..l.num_morphisms())
            .map(|t| if ids.contains(&t) { 0 } else { (seed >> (t % 64)) as usize & 1 })
            .collect();
        prop_assert!(cohomologous_invariance(&l, &incs, &cw, &mu).is_ok());
    }

    #[test]
    fn group_cocycles_plus_coboundaries_stay_in_class(seed in any::<u64>()) {
        let s = std::sync::Arc::new(fusionkit::PGroup::new(preset("D8").unwrap(), 2).unwrap());
        let coeff = Coeff::new(2, 1).unwrap();
        let h2 = h2_group(&s, coeff).unwrap();
        let coords: Vec<usize> = (0..h2.dim()).map(|i| (seed >> i) as usize & 1).collect();
        let w = h2.combination(&coords);
        let mut mu: Vec<usize> = (0..8).map(|x| (seed >> (8 + x)) as usize & 1).collect();
        mu[0] = 0;
        let w2 = w.add(&GroupCocycle::coboundary(&s, coeff, &mu));
        prop_assert!(w2.is_cocycle(&s));
        prop_assert_eq!(h2.class_of(&w2).unwrap(), coords);
    }
}
