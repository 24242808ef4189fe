//! Acceptance checks, one line per criterion. Runs without the libtest harness so the
//! lines always show up in `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use fusionkit::central::{center, check_quotient_lemmas, quotient_fusion};
use fusionkit::cocycle::*;
use fusionkit::fusion::{fixtures, Axiom, FusionSystem};
use fusionkit::group::{Group, Subset};
use fusionkit::index::*;
use fusionkit::linking::*;
use fusionkit::pextension::{conjugation_action, extend_by_p_group};
use fusionkit::pgroup::{bits, popcount, Mask};
use fusionkit::presets::preset;

type Outcome = Result<String, String>;

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

struct Case {
    name: String,
    g: Group,
    p: usize,
    f: FusionSystem,
    /// Element `i` of `S` is element `emb[i]` of `G`.
    emb: Vec<usize>,
}

impl Case {
    fn mask_in(&self, h: &Subset) -> Mask {
        (0..self.emb.len()).filter(|&i| h.contains(self.emb[i])).fold(0, |m, i| m | 1 << i)
    }
}

fn corpus() -> Vec<Case> {
    CORPUS
        .iter()
        .map(|&(n, p)| {
            let g = preset(n).unwrap();
            let (f, emb) = FusionSystem::from_group_with_embedding(&g, &g.sylow(p), p).unwrap();
            Case { name: format!("{n}/{p}"), g, p, f, emb }
        })
        .collect()
}

fn case<'a>(cases: &'a [Case], name: &str) -> &'a Case {
    cases.iter().find(|c| c.name == name).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn linking(name: &str, p: usize, kind: Objects) -> LinkingSystem {
    let g = preset(name).unwrap();
    linking_from_group(&g, &g.sylow(p), p, kind).unwrap()
}

fn saturation(cases: &[Case]) -> Outcome {
    for c in cases {
        ensure(c.f.check_axioms().is_empty(), || format!("{}: not a fusion system", c.name))?;
        ensure(c.f.check_saturation().is_ok(), || format!("{}: {:?}", c.name, c.f.check_saturation()))?;
        ensure(c.f.check_saturation_stancu().is_ok(), || format!("{}: exchange axioms fail", c.name))?;
    }
    let expect = [
        ("d8_full_aut", fixtures::d8_full_aut(), Axiom::I, Axiom::IPrime),
        ("d8_cross_involution", fixtures::d8_cross_involution(), Axiom::II, Axiom::IIPrime),
        ("v4_involution", fixtures::v4_involution(), Axiom::I, Axiom::IPrime),
    ];
    for (name, f, a, b) in expect {
        let r1 = f.check_saturation().failed();
        let r2 = f.check_saturation_stancu().failed();
        ensure(r1.contains(&a), || format!("{name}: expected {a:?}, got {r1:?}"))?;
        ensure(r2.contains(&b), || format!("{name}: expected {b:?}, got {r2:?}"))?;
    }
    Ok(format!("{} saturated, 3 fixtures rejected", cases.len()))
}

fn hyperfocal(cases: &[Case]) -> Outcome {
    for c in cases {
        let hyp = hyperfocal_subgroup(&c.f).map_err(|e| format!("{}: {e}", c.name))?;
        let want = c.mask_in(&c.g.o_upper_p_of(&c.g.all(), c.p));
        ensure(hyp == want, || format!("{}: hyp {hyp:#x}, S ∩ O^p(G) {want:#x}", c.name))?;
    }
    for (name, n) in [("S4/2", 4), ("A6/2", 8), ("S3/2", 1)] {
        let got = popcount(hyperfocal_subgroup(&case(cases, name).f).unwrap());
        ensure(got == n, || format!("{name}: |hyp| = {got}, expected {n}"))?;
    }
    Ok("hyp = S ∩ O^p(G) on all entries".into())
}

fn focal(cases: &[Case]) -> Outcome {
    for c in cases {
        let foc = focal_subgroup(&c.f);
        let want = c.mask_in(&c.g.derived_subgroup_of(&c.g.all()));
        ensure(foc == want, || format!("{}: foc {foc:#x}, S ∩ [G,G] {want:#x}", c.name))?;
    }
    Ok("foc = S ∩ [G,G] on all entries".into())
}

fn lambda(_: &[Case]) -> Outcome {
    let mut pairs = 0;
    for (name, p) in CORPUS {
        let l = linking(name, p, Objects::Quasicentric);
        let incs = choose_inclusions(&l).map_err(|e| format!("{name}: {e}"))?;
        let lam = lambda_functor(&l, &incs).map_err(|e| format!("{name}: {e}"))?;
        let g = &lam.gamma;
        for (&(a, b), &h) in l.composition_table() {
            ensure(lam.values[h] == g.mul(lam.values[a], lam.values[b]), || format!("{name}: {a} ∘ {b}"))?;
            pairs += 1;
        }
        for (_, t) in incs.inclusions() {
            ensure(lam.values[t] == g.identity(), || format!("{name}: inclusion {t}"))?;
        }
        let s = l.s();
        let hyp = hyperfocal_subgroup(l.fusion()).unwrap();
        ensure(g.order() * popcount(hyp) == s.order(), || format!("{name}: |Γ_p| wrong"))?;
        let so = l.s_object().unwrap();
        for x in 0..s.order() {
            for y in 0..s.order() {
                let same = lam.values[l.delta(so, x).unwrap()] == lam.values[l.delta(so, y).unwrap()];
                let coset = hyp >> s.mul(s.inv(x), y) & 1 == 1;
                ensure(same == coset, || format!("{name}: λ∘δ_S is not S → S/hyp at {x}, {y}"))?;
            }
        }
    }
    Ok(format!("functorial on {pairs} composable pairs"))
}

fn p_power(cases: &[Case]) -> Outcome {
    for c in cases {
        let l = enumerate_subsystem_lattice(&c.f, Kind::PPower, true).map_err(|e| format!("{}: {e}", c.name))?;
        ensure(l.bijective == Some(true), || format!("{}: brute force disagrees", c.name))?;
        ensure(l.entries.iter().all(|e| e.saturated), || format!("{}: unsaturated entry", c.name))?;
    }
    let s4 = enumerate_subsystem_lattice(&case(cases, "S4/2").f, Kind::PPower, true).unwrap();
    ensure(s4.entries.len() == 2, || format!("S4: {} entries", s4.entries.len()))?;
    Ok("lattice matches brute force, S4 has 2".into())
}

fn prime_to_p(cases: &[Case]) -> Outcome {
    for c in cases {
        let l = enumerate_subsystem_lattice(&c.f, Kind::PrimeToP, true).map_err(|e| format!("{}: {e}", c.name))?;
        ensure(l.bijective == Some(true), || format!("{}: brute force disagrees", c.name))?;
        ensure(l.entries.iter().all(|e| e.saturated), || format!("{}: unsaturated F_H", c.name))?;
        let (h, _) = c.g.subgroup_as_group(&c.g.o_upper_pprime_of(&c.g.all(), c.p));
        let oppg = FusionSystem::from_group_sylow(&h, c.p).unwrap();
        let found: Vec<_> = l.entries.iter().filter(|e| e.subsystem.system.is_isomorphic(&oppg).unwrap()).collect();
        ensure(!found.is_empty(), || format!("{}: F_S(O^p'(G)) is not in the lattice", c.name))?;
        // The minimal entry is O^p'(F), which can be smaller (A5 at 2), so only these two are pinned.
        if c.name == "S3/3" || c.name == "SL23/2" {
            ensure(found.iter().any(|e| e.quotient_order == 1), || {
                format!("{}: minimal subsystem is not F_S(O^p'(G))", c.name)
            })?;
        }
    }
    for (name, n) in [("S3/3", 2), ("SL23/2", 3)] {
        let got = gamma_pprime(&case(cases, name).f).unwrap().gamma.order();
        ensure(got == n, || format!("{name}: |Γ_p'| = {got}, expected {n}"))?;
    }
    Ok("F_H saturated, F_S(O^p'(G)) in every lattice".into())
}

fn round_trips(_: &[Case]) -> Outcome {
    let q8 = FusionSystem::from_group_sylow(&preset("Q8").unwrap(), 2).unwrap();
    let pi = pprime_outer_subgroup(&q8, 3).map_err(|e| e.to_string())?;
    let ext = extend_by_pprime(&q8, &pi).map_err(|e| e.to_string())?;
    let sl = FusionSystem::from_group_sylow(&preset("SL23").unwrap(), 2).unwrap();
    ensure(ext.system.is_isomorphic(&sl).unwrap(), || "Q8.3 is not F(SL(2,3))".into())?;
    let th = theta_hat(&ext.system).unwrap();
    let back = subsystem_prime_index(&ext.system, &th, &ext.recovered_by).unwrap();
    ensure(back == q8, || "F_H does not recover F(Q8)".into())?;

    let g = preset("S4").unwrap();
    let a4 = g.o_upper_p_of(&g.all(), 2);
    let (l0, act) = conjugation_action(&g, &a4, 2).map_err(|e| e.to_string())?;
    let e = extend_by_p_group(&l0, &act).map_err(|e| e.to_string())?;
    ensure(e.system.is_isomorphic(&FusionSystem::from_group_sylow(&g, 2).unwrap()).unwrap(), || {
        "extension of F(A4) is not F(S4)".into()
    })?;
    let triple = build_triple_p_power(&e.system, Choice::First).unwrap();
    let sub = subsystem_p_power_index(&e.system, &triple, e.s0).unwrap();
    ensure(sub.system.is_isomorphic(l0.fusion()).unwrap(), || "F_{S₀} is not F(A4)".into())?;
    Ok("Q8 ↔ SL(2,3) and A4 ↔ S4".into())
}

fn alperin(cases: &[Case]) -> Outcome {
    let mut n = 0;
    for c in cases {
        let alp = c.f.alperin_subgroups().unwrap();
        for pid in 0..c.f.s().num_subgroups() {
            for (phi, w) in c.f.alperin_decompose_all(pid).map_err(|e| format!("{}: {e}", c.name))? {
                ensure(w.recompose(c.f.s()) == phi, || format!("{}: word does not recompose", c.name))?;
                for l in &w.letters {
                    let fl = c.f.flags(l.q).unwrap();
                    ensure(alp.contains(&l.q) && fl.centric && fl.radical && fl.fully_normalized, || {
                        format!("{}: bad letter subgroup {}", c.name, l.q)
                    })?;
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} morphisms decomposed"))
}

fn class_counts(cases: &[Case]) -> Outcome {
    for c in cases {
        for pid in 0..c.f.s().num_subgroups() {
            let k = c.f.fully_normalized_class_count(pid);
            ensure(k % c.p != 0, || format!("{}: subgroup {pid} has {k}", c.name))?;
        }
    }
    Ok("all counts prime to p".into())
}

fn central(cases: &[Case]) -> Outcome {
    for (name, n) in [("S4/2", 1), ("SL23/2", 2)] {
        let z = popcount(center(&case(cases, name).f).unwrap());
        ensure(z == n, || format!("{name}: |Z_F| = {z}, expected {n}"))?;
    }
    let sl = &case(cases, "SL23/2").f;
    let z = center(sl).unwrap();
    let q = quotient_fusion(sl, z).unwrap();
    ensure(q.system.is_isomorphic(&case(cases, "A4/2").f).unwrap(), || "SL(2,3)/Z is not F(A4)".into())?;
    let lq = linking_quotient(&linking("SL23", 2, Objects::Centric), z).map_err(|e| e.to_string())?;
    ensure(find_linking_isomorphism(&lq.centric, &linking("A4", 2, Objects::Centric)).unwrap().is_some(), || {
        "(L/Z)^c is not L^c(A4)".into()
    })?;

    let mut classes = 0;
    for c in cases.iter().filter(|c| c.f.s().order() <= 8) {
        let l = linking_from_group(&c.g, &c.g.sylow(c.p), c.p, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let coeff = Coeff::new(c.p, 1).unwrap();
        let stable = match h2_fusion_stable(l.fusion(), coeff) {
            Ok(s) => s,
            Err(e) => return Err(format!("{}: {e}", c.name)),
        };
        for coords in stable.classes() {
            let w = stable.h2.combination(&coords);
            let cw = category_cocycle_from_class(&l, &w).map_err(|e| format!("{}: {e}", c.name))?;
            let e = central_extension_build(&l, &incs, &cw).map_err(|e| format!("{}: {e}", c.name))?;
            ensure(e.fusion().is_saturated(), || format!("{}: F̃ not saturated", c.name))?;
            ensure(check_linking_axioms(&e.linking).is_ok(), || format!("{}: L̃ fails axioms", c.name))?;
            let q = quotient_fusion(e.fusion(), e.group.a_mask).unwrap();
            ensure(q.system.is_isomorphic(l.fusion()).unwrap(), || format!("{}: F̃/A ≇ F", c.name))?;
            check_quotient_lemmas(e.fusion(), &q).map_err(|e| format!("{}: {e}", c.name))?;
            classes += 1;
            let mu: Vec<usize> = (0..l.num_morphisms())
                .map(|t| usize::from((0..l.num_objects()).all(|a| l.identity(a) != t) && t % 3 == 1))
                .collect();
            cohomologous_invariance(&l, &incs, &cw, &mu).map_err(|e| format!("{}: {e}", c.name))?;
        }
        let (k, order) = count_central_extensions(&l, &incs, coeff).map_err(|e| format!("{}: {e}", c.name))?;
        ensure(k == order, || format!("{}: {k} extensions, |H²(F;A)| = {order}", c.name))?;
    }
    Ok(format!("{classes} stable classes round-trip"))
}

fn pi1(_: &[Case]) -> Outcome {
    let g = preset("A6").unwrap();
    let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
    let incs = choose_inclusions(&l).unwrap();
    let ab = pi1_presentation(&l, &incs).abelianization().map_err(|e| e.to_string())?;
    let s: Subset = g.set_of(l.realization().unwrap().emb.iter().copied());
    let fours: Vec<Subset> = g
        .intermediate_subgroups(&g.trivial(), &s)
        .into_iter()
        .filter(|h| h.count_ones(..) == 4 && h.ones().all(|x| g.elem_order(x) <= 2))
        .collect();
    ensure(fours.len() == 2, || format!("{} four-groups in S", fours.len()))?;
    let (n1, n2) = (g.normalizer(&fours[0]), g.normalizer(&fours[1]));
    let amalgam = amalgam_presentation(&g, &n1, &n2).abelianization().map_err(|e| e.to_string())?;
    ensure(ab.invariants == amalgam.invariants, || {
        format!("π₁ab {:?}, amalgam {:?}", ab.invariants, amalgam.invariants)
    })?;
    Ok(format!("both {:?}", ab.invariants))
}

fn linking_axioms(_: &[Case]) -> Outcome {
    let mut n = 0;
    for (name, p) in CORPUS {
        for kind in [Objects::Centric, Objects::Quasicentric] {
            let l = linking(name, p, kind);
            let r = check_linking_axioms(&l);
            ensure(r.is_ok(), || format!("{name}/{p}: {r}"))?;
            n += 1;
        }
    }
    let sl = linking("SL23", 2, Objects::Centric);
    let lq = linking_quotient(&sl, sl.s().center(sl.s().full())).unwrap();
    ensure(check_linking_axioms(&lq.centric).is_ok(), || "(L/Z)^c for SL(2,3) fails".into())?;

    let l = linking("S4", 2, Objects::Quasicentric);
    let so = l.s_object().unwrap();
    let auts = l.mor(so, so).to_vec();
    let mut bad = l.clone();
    let h = l.compose(auts[1], auts[2]).unwrap();
    bad.corrupt_composition(auts[1], auts[2], *auts.iter().find(|&&t| t != h).unwrap());
    ensure(!check_linking_axioms(&bad).is_ok(), || "corrupted composition accepted".into())?;
    let mut bad = l.clone();
    let z = bits(l.s().center(l.s().full())).find(|&x| x != 0).unwrap();
    bad.corrupt_delta(so, z, l.identity(so));
    let r = check_linking_axioms(&bad);
    ensure(r.failed().contains(&LinkingAxiom::A), || format!("corrupted δ: {r}"))?;
    Ok(format!("{n} systems pass, 2 corruptions caught"))
}

fn main() -> ExitCode {
    let cases = corpus();
    let criteria: [(&str, fn(&[Case]) -> Outcome); 12] = [
        ("saturation", saturation),
        ("hyperfocal subgroup", hyperfocal),
        ("focal subgroup", focal),
        ("lambda functor", lambda),
        ("p-power subsystems", p_power),
        ("prime-to-p subsystems", prime_to_p),
        ("extension round trips", round_trips),
        ("Alperin decomposition", alperin),
        ("class counts", class_counts),
        ("central extensions and quotients", central),
        ("fundamental group of A6", pi1),
        ("linking axioms", linking_axioms),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&cases)))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} pass  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 12 pass", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
