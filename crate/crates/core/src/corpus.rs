//! Analysis reports and the golden-value corpus.
//!
//! A report is a sorted list of `key value` lines plus named checks; the corpus
//! file lists expected values for some of those keys, each tagged with where the
//! value comes from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::central::center;
use crate::error::{Error, Result};
use crate::fusion::FusionSystem;
use crate::group::Group;
use crate::index::{enumerate_subsystem_lattice, focal_subgroup, gamma_p, gamma_pprime, hyperfocal_subgroup, Kind};
use crate::io::load_group;
use crate::pgroup::{bits, popcount, Mask};

pub const STOCK_CORPUS: &str = include_str!("../corpus/corpus.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub input: String,
    pub prime: usize,
    pub values: BTreeMap<String, String>,
    pub checks: Vec<Check>,
}

impl AnalysisReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("input {}\nprime {}\n", self.input, self.prime);
        for (k, v) in &self.values {
            writeln!(out, "{k} {v}").unwrap();
        }
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            match &c.witness {
                Some(w) => writeln!(out, "check {} {status} {w}", c.name).unwrap(),
                None => writeln!(out, "check {} {status}", c.name).unwrap(),
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<AnalysisReport> {
        let mut input = None;
        let mut prime = None;
        let mut values = BTreeMap::new();
        let mut checks = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "input" => input = Some(rest.to_string()),
                "prime" => prime = rest.parse().ok(),
                "check" => {
                    let mut it = rest.splitn(3, ' ');
                    let name = it.next().unwrap_or_default().to_string();
                    let passed = it.next() == Some("pass");
                    checks.push(Check { name, passed, witness: it.next().map(str::to_string) });
                }
                _ => {
                    values.insert(key.to_string(), rest.to_string());
                }
            }
        }
        match (input, prime) {
            (Some(input), Some(prime)) => Ok(AnalysisReport { input, prime, values, checks }),
            _ => Err(Error::Parse("report lacks input or prime".into())),
        }
    }
}

fn classes(f: &FusionSystem, pred: impl Fn(usize) -> bool) -> usize {
    f.class_reps().into_iter().filter(|&r| pred(r)).count()
}

fn check(checks: &mut Vec<Check>, name: &str, result: std::result::Result<(), String>) {
    checks.push(Check { name: name.into(), passed: result.is_ok(), witness: result.err() });
}

fn mask_of(emb: &[usize], set: &crate::group::Subset) -> Mask {
    (0..emb.len()).filter(|&i| set.contains(emb[i])).fold(0, |acc, i| acc | (1 << i))
}

/// Invariants of `F_S(G)` and the group-theoretic cross-checks behind them.
pub fn analyze(g: &Group, p: usize, input: &str) -> Result<AnalysisReport> {
    if !crate::group::is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let s_set = g.sylow(p);
    let (f, emb) = FusionSystem::from_group_with_embedding(g, &s_set, p)?;
    let s = f.s();
    let mut v = BTreeMap::new();
    let mut checks = Vec::new();
    let put = |v: &mut BTreeMap<String, String>, k: &str, x: String| {
        v.insert(k.to_string(), x);
    };
    put(&mut v, "group_order", g.order().to_string());
    put(&mut v, "s_order", s.order().to_string());
    put(&mut v, "subgroups", s.num_subgroups().to_string());
    put(&mut v, "morphisms", f.num_morphisms().to_string());
    put(&mut v, "classes", f.class_reps().len().to_string());
    put(&mut v, "centric_classes", classes(&f, |r| f.is_centric(r)).to_string());
    put(&mut v, "quasicentric_classes", classes(&f, |r| f.is_quasicentric(r)).to_string());
    let alperin = f.alperin_subgroups()?;
    put(&mut v, "alperin_classes", classes(&f, |r| alperin.contains(&r)).to_string());

    let sat = f.check_saturation();
    let stancu = f.check_saturation_stancu();
    put(&mut v, "saturated", sat.is_ok().to_string());
    check(&mut checks, "saturation", sat.first_failure().map_or(Ok(()), |(a, w)| Err(format!("{a}: {w}"))));
    check(
        &mut checks,
        "stancu_agrees",
        if sat.is_ok() == stancu.is_ok() { Ok(()) } else { Err("the two saturation checkers disagree".into()) },
    );

    let hyp = hyperfocal_subgroup(&f)?;
    let foc = focal_subgroup(&f);
    put(&mut v, "hyp_order", popcount(hyp).to_string());
    put(&mut v, "foc_order", popcount(foc).to_string());
    let mut hyp_g = s_set.clone();
    hyp_g.intersect_with(&g.o_upper_p_of(&g.all(), p));
    check(
        &mut checks,
        "hyperfocal_oracle",
        if mask_of(&emb, &hyp_g) == hyp { Ok(()) } else { Err(format!("|S ∩ O^p(G)| = {}", hyp_g.count_ones(..))) },
    );
    let foc_g = g.focal_group_oracle(&s_set);
    check(
        &mut checks,
        "focal_oracle",
        if mask_of(&emb, &foc_g) == foc { Ok(()) } else { Err(format!("|S ∩ [G,G]| = {}", foc_g.count_ones(..))) },
    );

    let (gp, _) = gamma_p(&f)?;
    put(&mut v, "gamma_p_order", gp.order().to_string());
    let gpp = gamma_pprime(&f)?;
    put(&mut v, "gamma_pprime_order", gpp.gamma.order().to_string());
    let z = center(&f)?;
    put(&mut v, "center_order", popcount(z).to_string());

    let bad_count = f
        .class_reps()
        .into_iter()
        .find(|&r| f.fully_normalized_class_count(r) % p == 0);
    check(
        &mut checks,
        "fully_normalized_counts",
        bad_count.map_or(Ok(()), |r| Err(format!("subgroup {r} has a class count divisible by p"))),
    );

    for (kind, key) in [(Kind::PPower, "p_power_subsystems"), (Kind::PrimeToP, "prime_to_p_subsystems")] {
        let lat = enumerate_subsystem_lattice(&f, kind, false)?;
        put(&mut v, key, lat.entries.len().to_string());
        let unsat: Vec<String> =
            lat.entries.iter().filter(|e| !e.saturated).map(|e| format!("{:#x}", e.t)).collect();
        check(&mut checks, &format!("{key}_saturated"), if unsat.is_empty() { Ok(()) } else { Err(unsat.join(",")) });
    }
    Ok(AnalysisReport { input: input.to_string(), prime: p, values: v, checks })
}

/// Where a golden value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Paper,
    Trivial,
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub prime: usize,
    pub key: String,
    pub value: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub group: String,
    pub primes: Vec<usize>,
    pub expectations: Vec<Expectation>,
}

/// Format:
///
/// ```text
/// entry S4
/// group S4
/// primes 2
/// expect 2 hyp_order 4 [DERIVED]
/// ```
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut entries: Vec<CorpusEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |m: &str| Error::Parse(format!("corpus line {n}: {m}"));
        if toks[0] == "entry" {
            let name = toks.get(1).ok_or_else(|| err("entry needs a name"))?;
            entries.push(CorpusEntry { name: name.to_string(), group: name.to_string(), primes: Vec::new(), expectations: Vec::new() });
            continue;
        }
        let e = entries.last_mut().ok_or_else(|| err("expected `entry` first"))?;
        match toks[0] {
            "group" => e.group = toks.get(1).ok_or_else(|| err("group needs a spec"))?.to_string(),
            "primes" => {
                e.primes = toks[1..].iter().map(|t| t.parse().map_err(|_| err("bad prime"))).collect::<Result<_>>()?
            }
            "expect" => {
                if toks.len() != 5 {
                    return Err(err("expected `expect <p> <key> <value> <tag>`"));
                }
                let provenance = match toks[4] {
                    "[PAPER]" => Provenance::Paper,
                    "[TRIVIAL]" => Provenance::Trivial,
                    "[DERIVED]" => Provenance::Derived,
                    _ => return Err(err("every golden value needs a provenance tag")),
                };
                let prime: usize = toks[1].parse().map_err(|_| err("bad prime"))?;
                if !e.primes.contains(&prime) {
                    return Err(err("expectation for a prime not listed in `primes`"));
                }
                e.expectations.push(Expectation { prime, key: toks[2].into(), value: toks[3].into(), provenance });
            }
            other => return Err(err(&format!("unknown directive {other:?}"))),
        }
    }
    Ok(entries)
}

pub fn stock_corpus() -> Vec<CorpusEntry> {
    parse_corpus(STOCK_CORPUS).expect("stock corpus parses")
}

/// A directory of cached reports, keyed by a hash of the sorted element list and the prime.
#[derive(Clone, Debug)]
pub struct Cache {
    pub dir: PathBuf,
}

/// FNV-1a over the sorted permutations: independent of generating set and stable across builds.
pub fn group_hash(g: &Group) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    for &b in &(g.degree() as u32).to_le_bytes() {
        eat(b);
    }
    for x in 0..g.order() {
        for &pt in g.perm(x) {
            for b in pt.to_le_bytes() {
                eat(b);
            }
        }
    }
    h
}

impl Cache {
    pub fn from_env(var: &str) -> Option<Cache> {
        std::env::var_os(var).map(|d| Cache { dir: PathBuf::from(d) })
    }

    fn path(&self, g: &Group, p: usize) -> PathBuf {
        self.dir.join(format!("{:016x}-p{p}.report", group_hash(g)))
    }

    /// The cached report if present (with `input` replaced by the caller's descriptor), else a fresh one written back.
    pub fn analyze(&self, g: &Group, p: usize, input: &str) -> Result<AnalysisReport> {
        let path = self.path(g, p);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(mut r) = AnalysisReport::from_text(&text) {
                r.input = input.to_string();
                return Ok(r);
            }
        }
        let r = analyze(g, p, input)?;
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::Domain(format!("cache: {e}")))?;
        std::fs::write(&path, r.to_text()).map_err(|e| Error::Domain(format!("cache: {e}")))?;
        Ok(r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub entry: String,
    pub prime: usize,
    pub key: String,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Debug, Default)]
pub struct CorpusSummary {
    pub reports: Vec<AnalysisReport>,
    pub mismatches: Vec<Mismatch>,
    pub checked: usize,
}

impl CorpusSummary {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.reports.iter().all(|r| r.ok())
    }
}

/// Runs the entries whose name matches `filter` (`"all"` for every entry).
pub fn run_corpus(entries: &[CorpusEntry], filter: &str, cache: Option<&Cache>) -> Result<CorpusSummary> {
    let selected: Vec<&CorpusEntry> = entries.iter().filter(|e| filter == "all" || e.name == filter).collect();
    if selected.is_empty() {
        return Err(Error::Domain(format!("no corpus entry named {filter:?}")));
    }
    let mut out = CorpusSummary::default();
    for e in selected {
        let g = load_group(&e.group)?;
        for &p in &e.primes {
            let label = format!("{}/{p}", e.name);
            let r = match cache {
                Some(c) => c.analyze(&g, p, &label)?,
                None => analyze(&g, p, &label)?,
            };
            for x in e.expectations.iter().filter(|x| x.prime == p) {
                out.checked += 1;
                let found = r.values.get(&x.key).cloned().unwrap_or_else(|| "<missing>".into());
                if found != x.value {
                    out.mismatches.push(Mismatch {
                        entry: e.name.clone(),
                        prime: p,
                        key: x.key.clone(),
                        expected: x.value.clone(),
                        found,
                    });
                }
            }
            out.reports.push(r);
        }
    }
    Ok(out)
}

/// `S`-elements of a mask as a compact list, for reports.
pub fn mask_elements(m: Mask) -> String {
    bits(m).map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Randomized invariant checks over the selected entries; the same seed gives the same samples.
pub fn run_properties(entries: &[CorpusEntry], filter: &str, seed: u64, samples: usize) -> Result<Vec<Check>> {
    use rand::{rngs::StdRng, Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for e in entries.iter().filter(|e| filter == "all" || e.name == filter) {
        let g = load_group(&e.group)?;
        for &p in &e.primes {
            let f = FusionSystem::from_group_sylow(&g, p)?;
            let s = f.s();
            let label = |name: &str| format!("{}/{p}:{name}", e.name);
            let mut fail: BTreeMap<&str, String> = BTreeMap::new();
            for _ in 0..samples {
                let pid = rng.gen_range(0..s.num_subgroups());
                if f.is_quasicentric(pid) != f.is_quasicentric_by_criterion(pid) {
                    fail.entry("quasicentric_criterion").or_insert(format!("subgroup {pid}"));
                }
                let by_def = f.class_members(pid).iter().all(|&q| s.centralizer(s.sub(q)) & !s.sub(q) == 0);
                if f.is_centric(pid) != by_def || (by_def && !f.is_quasicentric(pid)) {
                    fail.entry("centric_definition").or_insert(format!("subgroup {pid}"));
                }
                if f.fully_normalized_class_count(pid) % p == 0 {
                    fail.entry("class_count_prime_to_p").or_insert(format!("subgroup {pid}"));
                }
                let homs = f.homs(pid);
                let phi = &homs[rng.gen_range(0..homs.len())];
                match f.alperin_decompose(phi) {
                    Ok(w) if w.recompose(s) == *phi => {}
                    _ => {
                        fail.entry("alperin_recomposition").or_insert(format!("a morphism on subgroup {pid}"));
                    }
                }
            }
            let all = g.all();
            let a = g.o_upper_p_of(&all, p);
            if a != g.o_upper_p_via_normals(&all, p) || a != g.o_upper_p_via_series(&all, p) {
                fail.insert("o_upper_p_definitions", "the three constructions differ".into());
            }
            if s.order() <= crate::cocycle::MAX_COHOMOLOGY_ORDER {
                use crate::cocycle::{h2_group, Coeff, GroupCocycle};
                let coeff = Coeff::new(p, 1)?;
                let h2 = h2_group(&f.s_arc(), coeff)?;
                let coords: Vec<usize> = (0..h2.dim()).map(|_| rng.gen_range(0..p)).collect();
                let mut mu: Vec<usize> = (0..s.order()).map(|_| rng.gen_range(0..p)).collect();
                mu[0] = 0;
                let w = h2.combination(&coords).add(&GroupCocycle::coboundary(s, coeff, &mu));
                if h2.class_of(&w).ok() != Some(coords) {
                    fail.insert("coboundaries_preserve_class", "class changed".into());
                }
            }
            for name in [
                "quasicentric_criterion",
                "centric_definition",
                "class_count_prime_to_p",
                "alperin_recomposition",
                "o_upper_p_definitions",
                "coboundaries_preserve_class",
            ] {
                out.push(Check { name: label(name), passed: !fail.contains_key(name), witness: fail.get(name).cloned() });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Domain(format!("no corpus entry named {filter:?}")));
    }
    Ok(out)
}
