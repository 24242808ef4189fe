//! Group-theoretic and brute-force oracles for the golden values in the stock corpus.

use fusionkit::corpus::{run_corpus, stock_corpus, Provenance};
use fusionkit::fusion::FusionSystem;
use fusionkit::group::{Group, Subset};
use fusionkit::index::{brute_force_subsystems, Kind};
use fusionkit::presets::preset;

struct Oracle<'a> {
    g: &'a Group,
    p: usize,
    s: Subset,
    subs: Vec<Subset>,
}

impl<'a> Oracle<'a> {
    fn new(g: &'a Group, p: usize) -> Self {
        let s = g.sylow(p);
        let subs = g.intermediate_subgroups(&g.trivial(), &s);
        Oracle { g, p, s, subs }
    }
    fn order(x: &Subset) -> usize {
        x.count_ones(..)
    }
    fn in_s(&self, x: &Subset) -> bool {
        x.is_subset(&self.s)
    }
    /// G-conjugates of `x` lying in S.
    fn conjugates_in_s(&self, x: &Subset) -> Vec<Subset> {
        let mut out: Vec<Subset> = (0..self.g.order()).map(|c| self.g.conj_set(c, x)).filter(|y| self.in_s(y)).collect();
        out.sort();
        out.dedup();
        out
    }
    /// Classes of subgroups of S under G-conjugacy, by a representative.
    fn classes(&self) -> Vec<Subset> {
        let mut seen: Vec<Subset> = Vec::new();
        let mut reps = Vec::new();
        for x in &self.subs {
            if !seen.contains(x) {
                seen.extend(self.conjugates_in_s(x));
                reps.push(x.clone());
            }
        }
        reps
    }
    fn cs(&self, x: &Subset) -> Subset {
        let mut c = self.g.centralizer(x);
        c.intersect_with(&self.s);
        c
    }
    fn centric(&self, x: &Subset) -> bool {
        self.conjugates_in_s(x).iter().all(|y| self.cs(y).is_subset(y))
    }
    /// C_G(P') has a normal p-complement, for a conjugate P' with C_S(P') Sylow in C_G(P').
    fn quasicentric(&self, x: &Subset) -> bool {
        let y = self
            .conjugates_in_s(x)
            .into_iter()
            .max_by_key(|y| Self::order(&self.cs(y)))
            .unwrap();
        let c = self.g.centralizer(&y);
        let k = self.g.o_pprime_of(&c, self.p);
        Self::order(&k) * Self::order(&self.cs(&y)) == Self::order(&c)
    }
    /// Centric, fully normalized and O_p(N_G(P)/P C_G(P)) = 1.
    fn alperin(&self, x: &Subset) -> bool {
        if !self.centric(x) {
            return false;
        }
        let n = self.g.normalizer(x);
        let pc = self.g.join(x, &self.g.centralizer(x));
        let (nq, emb) = self.g.subgroup_as_group(&n);
        let pc_in = nq.set_of((0..nq.order()).filter(|&i| pc.contains(emb[i])));
        let (quot, _) = nq.quotient(&pc_in);
        Self::order(&quot.o_p_of(&quot.all(), self.p)) == 1
    }
    /// Largest A ≤ Z(S) such that every conjugation c_g: P → S can be corrected by C_G(P) to centralize A.
    fn center(&self) -> usize {
        let zs = self.g.center_of(&self.s);
        let cands: Vec<&Subset> = self.subs.iter().filter(|a| a.is_subset(&zs)).collect();
        let central = |a: &Subset| {
            let ca = self.g.centralizer(a);
            self.subs.iter().all(|p| {
                let cp = self.g.centralizer(p);
                (0..self.g.order()).filter(|&x| self.in_s(&self.g.conj_set(x, p))).all(|x| {
                    cp.ones().any(|c| ca.contains(self.g.mul(x, c)))
                })
            })
        };
        cands.into_iter().filter(|a| central(a)).map(Self::order).max().unwrap()
    }
}

fn expected(name: &str, p: usize, key: &str) -> Option<String> {
    stock_corpus()
        .into_iter()
        .find(|e| e.name == name)?
        .expectations
        .into_iter()
        .find(|x| x.prime == p && x.key == key)
        .map(|x| x.value)
}

#[test]
fn derived_values_agree_with_oracles() {
    for e in stock_corpus() {
        let g = preset(&e.group).unwrap();
        for &p in &e.primes {
            let o = Oracle::new(&g, p);
            let f = FusionSystem::from_group_sylow(&g, p).unwrap();
            let classes = o.classes();
            let mut oracle = vec![
                ("s_order", Oracle::order(&o.s)),
                ("centric_classes", classes.iter().filter(|x| o.centric(x)).count()),
                ("quasicentric_classes", classes.iter().filter(|x| o.quasicentric(x)).count()),
                ("alperin_classes", classes.iter().filter(|x| o.alperin(x)).count()),
                ("center_order", o.center()),
            ];
            let mut hyp = o.s.clone();
            hyp.intersect_with(&g.o_upper_p_of(&g.all(), p));
            oracle.push(("hyp_order", Oracle::order(&hyp)));
            oracle.push(("gamma_p_order", Oracle::order(&o.s) / Oracle::order(&hyp)));
            oracle.push(("foc_order", Oracle::order(&g.focal_group_oracle(&o.s))));
            let pp = brute_force_subsystems(&f, Kind::PPower).unwrap();
            oracle.push(("p_power_subsystems", pp.len()));
            let pq = brute_force_subsystems(&f, Kind::PrimeToP).unwrap();
            oracle.push(("prime_to_p_subsystems", pq.len()));
            let full = f.s().full_id();
            let aut = f.aut(full).len();
            let min_aut = pq.iter().map(|(_, sys)| sys.aut(full).len()).min().unwrap();
            oracle.push(("gamma_pprime_order", aut / min_aut));
            for (key, value) in oracle {
                let want = expected(&e.name, p, key).unwrap_or_else(|| panic!("{}/{p} lacks {key}", e.name));
                assert_eq!(want, value.to_string(), "{}/{p} {key}", e.name);
            }
        }
    }
}

#[test]
fn every_golden_value_is_tagged_and_the_stock_corpus_passes() {
    let entries = stock_corpus();
    assert_eq!(entries.iter().map(|e| e.primes.len()).sum::<usize>(), 14);
    let raw = fusionkit::corpus::STOCK_CORPUS;
    for line in raw.lines().filter(|l| l.starts_with("expect")) {
        assert!(line.ends_with("[PAPER]") || line.ends_with("[TRIVIAL]") || line.ends_with("[DERIVED]"), "{line}");
    }
    assert!(entries.iter().flat_map(|e| &e.expectations).any(|x| x.provenance == Provenance::Paper));
    let summary = run_corpus(&entries, "all", None).unwrap();
    assert!(summary.ok(), "{:?}", summary.mismatches);
    assert_eq!(summary.checked, 14 * 12);
}

#[test]
fn a_wrong_golden_value_is_reported_by_entry() {
    let text = fusionkit::corpus::STOCK_CORPUS.replace("expect 2 hyp_order 4 [DERIVED]", "expect 2 hyp_order 2 [DERIVED]");
    let entries = fusionkit::corpus::parse_corpus(&text).unwrap();
    let summary = run_corpus(&entries, "S4", None).unwrap();
    assert_eq!(summary.reports.len(), 1);
    assert_eq!(summary.mismatches.len(), 1);
    assert_eq!(summary.mismatches[0].entry, "S4");
    assert!(fusionkit::corpus::parse_corpus("entry X\nprimes 2\nexpect 2 hyp_order 1\n").is_err());
    assert!(run_corpus(&entries, "nope", None).is_err());
}

#[test]
fn cached_and_fresh_reports_agree() {
    let dir = std::env::temp_dir().join(format!("fusionkit-cache-test-{}", std::process::id()));
    let cache = fusionkit::corpus::Cache { dir: dir.clone() };
    for (name, p) in [("S4", 2), ("S3", 3)] {
        let g = preset(name).unwrap();
        let fresh = fusionkit::corpus::analyze(&g, p, name).unwrap();
        let first = cache.analyze(&g, p, name).unwrap();
        let second = cache.analyze(&g, p, name).unwrap();
        assert_eq!(fresh, first);
        assert_eq!(fresh.to_text(), second.to_text());
    }
    // The key ignores the generating set.
    let a = fusionkit::io::read_group("group degree 3\ngen (0 1)\ngen (1 2)\n").unwrap();
    assert_eq!(fusionkit::corpus::group_hash(&a), fusionkit::corpus::group_hash(&preset("S3").unwrap()));
    std::fs::remove_dir_all(dir).ok();
}
