use fusionkit::fusion::FusionSystem;
use fusionkit::group::Group;
use fusionkit::index::*;
use fusionkit::pgroup::popcount;
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

fn corpus() -> Vec<(String, Group, usize, FusionSystem)> {
    CORPUS
        .iter()
        .map(|&(n, p)| {
            let g = preset(n).unwrap();
            let f = FusionSystem::from_group_sylow(&g, p).unwrap();
            (format!("{n}/{p}"), g, p, f)
        })
        .collect()
}

#[test]
fn triples_and_lattices() {
    for (name, _, _, f) in corpus() {
        let t1 = build_triple_p_power(&f, Choice::First).unwrap_or_else(|e| panic!("{name}: {e}"));
        let t2 = build_triple_p_power(&f, Choice::Last).unwrap();
        assert_eq!(t1.values, t2.values, "{name}");
        let l = enumerate_subsystem_lattice(&f, Kind::PPower, true).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(l.bijective, Some(true), "{name}");
        assert!(l.entries.iter().all(|e| e.saturated), "{name}");
        let l2 = enumerate_subsystem_lattice(&f, Kind::PrimeToP, true).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(l2.bijective, Some(true), "{name}");
        let th = theta_hat(&f).unwrap();
        let tq = extend_triple_quasicentric(&f, &th.triple(&f), Choice::First).unwrap_or_else(|e| panic!("{name}: {e}"));
        let _ = tq;
        let hyp = hyperfocal_subgroup(&f).unwrap();
        println!("{name}: hyp {} lattice {} / {} gamma_p' {}", popcount(hyp), l.entries.len(), l2.entries.len(), l2.gamma_order);
        assert!(generation_check(&f).unwrap().is_ok(), "{name}");
    }
}
