//! `fusionkit` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fusionkit::central::{center, quotient_fusion};
use fusionkit::cocycle::{
    category_cocycle_from_class, central_extension_build, h2_fusion_stable, CategoryCocycle, Coeff,
};
use fusionkit::corpus::{self, AnalysisReport, Cache};
use fusionkit::fusion::FusionSystem;
use fusionkit::group::{Group, Subset};
use fusionkit::index::{enumerate_subsystem_lattice, extend_by_pprime, pprime_outer_subgroup, Kind};
use fusionkit::io;
use fusionkit::linking::{
    choose_inclusions, lambda_functor, linking_from_group, linking_quotient, pi1_presentation, Objects,
};
use fusionkit::pextension::{conjugation_action, extend_by_p_group};
use fusionkit::pgroup::{bits, popcount, Mask};
use fusionkit::{Error, Result};

const CACHE_VAR: &str = "FUSIONKIT_CACHE";

#[derive(Parser)]
#[command(name = "fusionkit", version, about = "Saturated fusion systems and linking systems over small p-groups")]
struct Cli {
    /// Emit machine-readable JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// A preset name (S4, A6, SL23, ...), a group file, or a fusion file.
    input: String,
    /// The prime; read from the file for fusion files.
    #[arg(long, short)]
    prime: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    PPower,
    PrimeToP,
}

#[derive(Subcommand)]
enum Command {
    /// Invariants and consistency checks for F_S(G).
    Analyze {
        #[command(flatten)]
        input: Input,
    },
    /// The lattice of subsystems of p-power index or of index prime to p.
    Subsystems {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Linking system artifacts: the π₁ presentation, λ, or a central quotient.
    Linking {
        #[command(flatten)]
        input: Input,
        /// The presentation of π₁ and its abelianization.
        #[arg(long, conflicts_with_all = ["lambda", "quotient"])]
        pi1: bool,
        /// The values of λ on every morphism.
        #[arg(long, conflicts_with = "quotient")]
        lambda: bool,
        /// `Z` for Z_F(S), or a comma-separated list of elements of S.
        #[arg(long)]
        quotient: Option<String>,
        /// Write the artifact here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extensions: central (by a cocycle), by a p'-group of outer automorphisms, or by a p-group.
    Extend {
        #[command(flatten)]
        input: Input,
        /// A group cocycle file on S, or `zero:<A>` / `stable:<A>:<n>` for the n-th stable class.
        #[arg(long, conflicts_with_all = ["by_pprime", "by_pgroup"])]
        cocycle: Option<String>,
        /// `Z<k>`: a cyclic subgroup of Out_fus(S, F) of order k prime to p.
        #[arg(long, conflicts_with = "by_pgroup")]
        by_pprime: Option<String>,
        /// Normal subgroup G₀ of the input group: `Op` for O^p(G), or generators as `(..);(..)`.
        #[arg(long)]
        by_pgroup: Option<String>,
        /// Write the extended fusion system here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The quotient fusion system F/A for a central subgroup A.
    Quotient {
        #[command(flatten)]
        input: Input,
        /// `Z` for Z_F(S), or a comma-separated list of elements of S.
        #[arg(long)]
        by: String,
        /// Write the quotient fusion system here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the golden-value corpus and the randomized property suite.
    Corpus {
        /// `all` or an entry name.
        #[arg(long, default_value = "all")]
        run: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        samples: usize,
        /// Use this corpus file instead of the stock one.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

struct Output {
    text: String,
    json: Value,
    ok: bool,
}

enum Loaded {
    Group(Group, usize),
    Fusion(FusionSystem),
}

impl Loaded {
    fn fusion(&self) -> Result<FusionSystem> {
        match self {
            Loaded::Group(g, p) => FusionSystem::from_group_sylow(g, *p),
            Loaded::Fusion(f) => Ok(f.clone()),
        }
    }
    fn group(&self) -> Result<(&Group, usize)> {
        match self {
            Loaded::Group(g, p) => Ok((g, *p)),
            Loaded::Fusion(_) => Err(Error::Domain("this operation needs a group, not a fusion file".into())),
        }
    }
}

fn load(input: &Input) -> Result<Loaded> {
    let from_file = std::fs::read_to_string(&input.input).ok();
    if let Some(text) = from_file.as_deref().filter(|t| t.trim_start().starts_with("fusion")) {
        let f = io::read_fusion(text)?;
        if input.prime.is_some_and(|p| p != f.p()) {
            return Err(Error::Parse("--prime disagrees with the fusion file".into()));
        }
        return Ok(Loaded::Fusion(f));
    }
    let g = io::load_group(&input.input)?;
    let p = input.prime.ok_or_else(|| Error::Parse("--prime is required for group input".into()))?;
    if !fusionkit::group::is_prime(p) {
        return Err(Error::Parse(format!("{p} is not prime")));
    }
    Ok(Loaded::Group(g, p))
}

fn emit(path: &Option<PathBuf>, artifact: &str) -> Result<String> {
    match path {
        Some(p) => {
            std::fs::write(p, artifact).map_err(|e| Error::Domain(format!("cannot write {}: {e}", p.display())))?;
            Ok(format!("wrote {}\n", p.display()))
        }
        None => Ok(artifact.to_string()),
    }
}

fn report_json(r: &AnalysisReport) -> Value {
    json!({
        "input": r.input,
        "prime": r.prime,
        "values": r.values,
        "checks": r.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "witness": c.witness})).collect::<Vec<_>>(),
    })
}

fn parse_subgroup(f: &FusionSystem, spec: &str) -> Result<Mask> {
    if spec == "Z" {
        return center(f);
    }
    let s = f.s();
    let mut elems = Vec::new();
    for t in spec.split(',') {
        let x: usize = t.trim().parse().map_err(|_| Error::Parse(format!("bad element {t:?}")))?;
        if x >= s.order() {
            return Err(Error::Parse(format!("element {x} is not in S")));
        }
        elems.push(x);
    }
    Ok(s.closure(&elems))
}

fn analyze(input: &Input) -> Result<Output> {
    let (g, p) = match load(input)? {
        Loaded::Group(g, p) => (g, p),
        Loaded::Fusion(_) => return Err(Error::Domain("analyze takes a group or preset".into())),
    };
    let r = match Cache::from_env(CACHE_VAR) {
        Some(c) => c.analyze(&g, p, &input.input)?,
        None => corpus::analyze(&g, p, &input.input)?,
    };
    Ok(Output { text: r.to_text(), json: report_json(&r), ok: r.ok() })
}

fn subsystems(input: &Input, kind: KindArg) -> Result<Output> {
    let f = load(input)?.fusion()?;
    if !f.is_saturated() {
        return Err(Error::Domain("the input system is not saturated".into()));
    }
    let kind = match kind {
        KindArg::PPower => Kind::PPower,
        KindArg::PrimeToP => Kind::PrimeToP,
    };
    let lat = enumerate_subsystem_lattice(&f, kind, true)?;
    let name = if kind == Kind::PPower { "p-power" } else { "prime-to-p" };
    let mut text = format!("kind {name}\ngamma_order {}\nentries {}\n", lat.gamma_order, lat.entries.len());
    let mut rows = Vec::new();
    for e in &lat.entries {
        text += &format!(
            "entry t {:#x} t_order {} quotient_order {} morphisms {} saturated {}\n",
            e.t,
            popcount(e.t),
            e.quotient_order,
            e.subsystem.system.num_morphisms(),
            e.saturated
        );
        rows.push(json!({
            "t": format!("{:#x}", e.t), "t_order": popcount(e.t), "quotient_order": e.quotient_order,
            "morphisms": e.subsystem.system.num_morphisms(), "saturated": e.saturated,
        }));
    }
    if let Some(b) = lat.bijective {
        text += &format!("brute_force_agrees {b}\n");
    }
    let ok = lat.entries.iter().all(|e| e.saturated) && lat.bijective != Some(false);
    let json = json!({"kind": name, "gamma_order": lat.gamma_order, "entries": rows, "brute_force_agrees": lat.bijective});
    Ok(Output { text, json, ok })
}

fn linking(input: &Input, pi1: bool, lambda: bool, quotient: &Option<String>, out: &Option<PathBuf>) -> Result<Output> {
    let (g, p) = {
        let l = load(input)?;
        let (g, p) = l.group()?;
        (g.clone(), p)
    };
    let l = linking_from_group(&g, &g.sylow(p), p, Objects::Quasicentric)?;
    let incs = choose_inclusions(&l)?;
    if pi1 {
        let pres = pi1_presentation(&l, &incs);
        let ab = pres.abelianization()?;
        let mut text = emit(out, &io::write_presentation(&pres))?;
        text += &format!("abelianization {}\n", ab.invariants);
        let json = json!({
            "generators": pres.generators.len(), "relations": pres.relations.len(),
            "abelianization": {"rank": ab.invariants.rank, "torsion": ab.invariants.torsion},
        });
        return Ok(Output { text, json, ok: true });
    }
    if lambda {
        let lam = lambda_functor(&l, &incs)?;
        let mut table = format!("lambda image_order {}\n", lam.gamma.order());
        for (t, v) in lam.values.iter().enumerate() {
            let m = l.morphism(t);
            table += &format!("{t} {} {} -> {v}\n", m.src, m.tgt);
        }
        let text = emit(out, &table)?;
        let json = json!({"image_order": lam.gamma.order(), "values": lam.values});
        return Ok(Output { text, json, ok: true });
    }
    if let Some(spec) = quotient {
        let lc = linking_from_group(&g, &g.sylow(p), p, Objects::Centric)?;
        let a = parse_subgroup(lc.fusion(), spec)?;
        let q = linking_quotient(&lc, a)?;
        let mut text = emit(out, &io::write_linking(&q.centric))?;
        text += &format!(
            "quotient s_order {} objects {} morphisms {}\n",
            q.s_bar.order(),
            q.centric.num_objects(),
            q.centric.num_morphisms()
        );
        let json = json!({"s_order": q.s_bar.order(), "objects": q.centric.num_objects(), "morphisms": q.centric.num_morphisms()});
        return Ok(Output { text, json, ok: true });
    }
    let text = emit(out, &io::write_linking(&l))?;
    let json = json!({"objects": l.num_objects(), "morphisms": l.num_morphisms()});
    Ok(Output { text, json, ok: true })
}

fn stamp(f: &FusionSystem) -> (String, Value) {
    let sat = f.is_saturated();
    (
        format!("# s_order {} morphisms {} saturated {sat}\n", f.s().order(), f.num_morphisms()),
        json!({"s_order": f.s().order(), "morphisms": f.num_morphisms(), "saturated": sat}),
    )
}

fn parse_coeff(spec: &str) -> Result<Coeff> {
    io::read_group_cocycle(&format!("cocycle group A {spec} order 1\n")).map(|w| w.coeff)
}

fn normal_subgroup(g: &Group, p: usize, spec: &str) -> Result<Subset> {
    if spec == "Op" {
        return Ok(g.o_upper_p_of(&g.all(), p));
    }
    let mut gens = Vec::new();
    for t in spec.split(';') {
        let perm = fusionkit::perm::parse_cycles(t, g.degree())?;
        gens.push(g.index(&perm).ok_or_else(|| Error::Parse(format!("{t} is not an element of G")))?);
    }
    Ok(g.closure(&gens))
}

fn extend(
    input: &Input,
    cocycle: &Option<String>,
    by_pprime: &Option<String>,
    by_pgroup: &Option<String>,
    out: &Option<PathBuf>,
) -> Result<Output> {
    let loaded = load(input)?;
    if let Some(spec) = by_pprime {
        let f = loaded.fusion()?;
        let k: usize = spec
            .strip_prefix('Z')
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected Z<k>, found {spec:?}")))?;
        let pi = pprime_outer_subgroup(&f, k)?;
        let ext = extend_by_pprime(&f, &pi)?;
        let (st, sj) = stamp(&ext.system);
        let text = emit(out, &(io::write_fusion(&ext.system) + &st))?;
        return Ok(Output { text, json: json!({"extension": sj}), ok: ext.system.is_saturated() });
    }
    if let Some(spec) = by_pgroup {
        let (g, p) = loaded.group()?;
        let g0 = normal_subgroup(g, p, spec)?;
        let (l0, action) = conjugation_action(g, &g0, p)?;
        let ext = extend_by_p_group(&l0, &action)?;
        let (st, sj) = stamp(&ext.system);
        let body = io::write_fusion(&ext.system) + &format!("# s0_order {}\n", popcount(ext.s0)) + &st;
        let text = emit(out, &body)?;
        return Ok(Output { text, json: json!({"extension": sj, "s0_order": popcount(ext.s0)}), ok: ext.system.is_saturated() });
    }
    let Some(spec) = cocycle else {
        return Err(Error::Parse("extend needs one of --cocycle, --by-pprime, --by-pgroup".into()));
    };
    let (g, p) = loaded.group()?;
    let l = linking_from_group(g, &g.sylow(p), p, Objects::Quasicentric)?;
    let incs = choose_inclusions(&l)?;
    let cw = if let Some(a) = spec.strip_prefix("zero:") {
        CategoryCocycle::zero(&l, parse_coeff(a)?)
    } else if let Some(rest) = spec.strip_prefix("stable:") {
        let (a, n) = rest.split_once(':').ok_or_else(|| Error::Parse("expected stable:<A>:<n>".into()))?;
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad class index {n:?}")))?;
        let stable = h2_fusion_stable(l.fusion(), parse_coeff(a)?)?;
        let classes = stable.classes();
        let coords = classes
            .get(n)
            .ok_or_else(|| Error::Domain(format!("only {} stable classes", classes.len())))?;
        category_cocycle_from_class(&l, &stable.h2.combination(coords))?
    } else {
        let text = std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("cannot read {spec}: {e}")))?;
        if text.trim_start().starts_with("cocycle category") {
            io::read_category_cocycle(&text)?
        } else {
            category_cocycle_from_class(&l, &io::read_group_cocycle(&text)?)?
        }
    };
    let e = central_extension_build(&l, &incs, &cw)?;
    let (st, sj) = stamp(e.fusion());
    let q = quotient_fusion(e.fusion(), e.group.a_mask)?;
    let recovers = q.system.is_isomorphic(l.fusion())?;
    let body = io::write_fusion(e.fusion())
        + &format!("# a_order {} quotient_recovers_input {recovers}\n", popcount(e.group.a_mask))
        + &st;
    let text = emit(out, &body)?;
    let ok = recovers && e.fusion().is_saturated();
    Ok(Output { text, json: json!({"extension": sj, "a_order": popcount(e.group.a_mask), "quotient_recovers_input": recovers}), ok })
}

fn quotient(input: &Input, by: &str, out: &Option<PathBuf>) -> Result<Output> {
    let f = load(input)?.fusion()?;
    let a = parse_subgroup(&f, by)?;
    let q = quotient_fusion(&f, a)?;
    let (st, sj) = stamp(&q.system);
    let elems: Vec<usize> = bits(a).collect();
    let text = emit(out, &(io::write_fusion(&q.system) + &st))?;
    Ok(Output { text, json: json!({"a": elems, "quotient": sj}), ok: true })
}

fn run_corpus(run: &str, seed: u64, samples: usize, file: &Option<PathBuf>) -> Result<Output> {
    let entries = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
            corpus::parse_corpus(&text)?
        }
        None => corpus::stock_corpus(),
    };
    let cache = Cache::from_env(CACHE_VAR);
    let summary = corpus::run_corpus(&entries, run, cache.as_ref())?;
    let props = corpus::run_properties(&entries, run, seed, samples)?;
    let mut text = String::new();
    for r in &summary.reports {
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let status = if failed.is_empty() { "pass".to_string() } else { format!("FAIL {}", failed.join(",")) };
        text += &format!("report {} {status}\n", r.input);
    }
    for m in &summary.mismatches {
        text += &format!("golden FAIL {}/{} {} expected {} found {}\n", m.entry, m.prime, m.key, m.expected, m.found);
    }
    let prop_fail: Vec<_> = props.iter().filter(|c| !c.passed).collect();
    for c in &prop_fail {
        text += &format!("property FAIL {} {}\n", c.name, c.witness.clone().unwrap_or_default());
    }
    let ok = summary.ok() && prop_fail.is_empty();
    text += &format!(
        "golden {} checked {} failed\nproperties {} checked {} failed seed {seed}\n{}\n",
        summary.checked,
        summary.mismatches.len(),
        props.len(),
        prop_fail.len(),
        if ok { "PASS" } else { "FAIL" }
    );
    let json = json!({
        "reports": summary.reports.iter().map(report_json).collect::<Vec<_>>(),
        "mismatches": summary.mismatches.iter().map(|m| json!({
            "entry": m.entry, "prime": m.prime, "key": m.key, "expected": m.expected, "found": m.found,
        })).collect::<Vec<_>>(),
        "properties": props.iter().map(|c| json!({"name": c.name, "passed": c.passed, "witness": c.witness})).collect::<Vec<_>>(),
        "seed": seed,
        "ok": ok,
    });
    Ok(Output { text, json, ok })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { input } => analyze(input),
        Command::Subsystems { input, kind } => subsystems(input, *kind),
        Command::Linking { input, pi1, lambda, quotient, out } => linking(input, *pi1, *lambda, quotient, out),
        Command::Extend { input, cocycle, by_pprime, by_pgroup, out } => extend(input, cocycle, by_pprime, by_pgroup, out),
        Command::Quotient { input, by, out } => quotient(input, by, out),
        Command::Corpus { run, seed, samples, file } => run_corpus(run, *seed, *samples, file),
    };
    match result {
        Ok(o) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&o.json).unwrap());
            } else {
                print!("{}", o.text);
            }
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
