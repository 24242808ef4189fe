//! Line-oriented text formats for groups, fusion systems, linking systems,
//! presentations and cocycles. Blank lines and `#` comments are ignored;
//! serializing a parsed file gives back the canonical form byte for byte.
//!
//! Elements of `S` are written as their index in `S` (permutations sorted
//! lexicographically); a map is given by the images of the generators of its domain.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::cocycle::{CategoryCocycle, Coeff, GroupCocycle};
use crate::error::{Error, Result};
use crate::fusion::FusionSystem;
use crate::group::Group;
use crate::linking::{GroupPresentation, LinkingSystem, Morphism, Relation};
use crate::perm::{format_cycles, parse_cycles};
use crate::pgroup::{dom, Map, PGroup};
use crate::presets;

fn perr<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Parse(format!("line {line}: {msg}")))
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

fn num(line: usize, tok: &str) -> Result<usize> {
    tok.parse().or_else(|_| perr(line, format!("expected a number, found {tok:?}")))
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { lines: lines(text), pos: 0 }
    }
    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.peek();
        self.pos += 1;
        l
    }
    fn line_no(&self) -> usize {
        self.peek().map(|l| l.0).unwrap_or_else(|| self.lines.last().map(|l| l.0 + 1).unwrap_or(1))
    }
    /// Consume a line `keyword rest` and return `rest`.
    fn expect(&mut self, keyword: &str) -> Result<(usize, &'a str)> {
        match self.next() {
            Some((n, l)) => match strip_word(l, keyword) {
                Some(rest) => Ok((n, rest)),
                None => perr(n, format!("expected `{keyword}`")),
            },
            None => perr(self.line_no(), format!("unexpected end of input, expected `{keyword}`")),
        }
    }
    /// Consume successive lines beginning with `keyword`.
    fn take_all(&mut self, keyword: &str) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        while let Some((n, l)) = self.peek() {
            match strip_word(l, keyword) {
                Some(rest) => {
                    out.push((n, rest));
                    self.pos += 1;
                }
                None => break,
            }
        }
        out
    }
    fn finish(&self) -> Result<()> {
        match self.peek() {
            Some((n, l)) => perr(n, format!("unexpected line {l:?}")),
            None => Ok(()),
        }
    }
}

fn strip_word<'a>(line: &'a str, word: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(word)?;
    if rest.is_empty() || rest.starts_with(char::is_whitespace) {
        Some(rest.trim())
    } else {
        None
    }
}

/// `key value` pairs on a header line.
fn header(n: usize, rest: &str, keys: &[&str]) -> Result<Vec<String>> {
    let toks: Vec<&str> = rest.split_whitespace().collect();
    if toks.len() != 2 * keys.len() {
        return perr(n, format!("expected {}", keys.iter().map(|k| format!("{k} <value>")).collect::<Vec<_>>().join(" ")));
    }
    keys.iter()
        .enumerate()
        .map(|(i, k)| if toks[2 * i] == *k { Ok(toks[2 * i + 1].to_string()) } else { perr(n, format!("expected key `{k}`")) })
        .collect()
}

// Groups.

pub fn write_group(g: &Group) -> String {
    let mut out = format!("group degree {}\n", g.degree());
    for &x in g.gens() {
        writeln!(out, "gen {}", format_cycles(g.perm(x))).unwrap();
    }
    out
}

fn read_group_block(c: &mut Cursor, prefix: &str) -> Result<Group> {
    let (n, rest) = c.expect(&format!("{prefix}group"))?;
    let degree = num(n, &header(n, rest, &["degree"])?[0])?;
    if degree == 0 || degree > u16::MAX as usize {
        return perr(n, "degree out of range");
    }
    let mut gens = Vec::new();
    for (n, rest) in c.take_all(&format!("{prefix}gen")) {
        gens.push(parse_cycles(rest, degree).map_err(|e| Error::Parse(format!("line {n}: {e}")))?);
    }
    Group::generate(degree, &gens)
}

pub fn read_group(text: &str) -> Result<Group> {
    let mut c = Cursor::new(text);
    let g = read_group_block(&mut c, "")?;
    c.finish()?;
    Ok(g)
}

/// A preset name, or otherwise the path of a group file.
pub fn load_group(spec: &str) -> Result<Group> {
    if presets::preset_generators(spec).is_some() {
        return presets::preset(spec);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::Parse(format!("{spec:?} is neither a preset nor a readable file: {e}")))?;
    read_group(&text)
}

// Fusion systems.

fn write_map(s: &PGroup, m: &[u8]) -> String {
    s.gens_of(dom(m))
        .iter()
        .map(|&x| format!("{x}>{}", m[x]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn read_map(n: usize, s: &PGroup, text: &str) -> Result<Map> {
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for tok in text.split_whitespace() {
        let Some((a, b)) = tok.split_once('>') else { return perr(n, format!("bad pair {tok:?}")) };
        let (a, b) = (num(n, a)?, num(n, b)?);
        if a >= s.order() || b >= s.order() {
            return perr(n, format!("element out of range in {tok:?}"));
        }
        gens.push(a);
        images.push(b);
    }
    match s.extend_hom(&gens, &images, s) {
        Some(m) if s.is_injective_hom(&m) => Ok(m),
        _ => perr(n, "assignment does not extend to an injective homomorphism"),
    }
}

fn write_fusion_into(out: &mut String, f: &FusionSystem) {
    let s = f.s();
    writeln!(out, "fusion p {}", f.p()).unwrap();
    let g = s.group();
    writeln!(out, "s-group degree {}", g.degree()).unwrap();
    for &x in g.gens() {
        writeln!(out, "s-gen {}", format_cycles(g.perm(x))).unwrap();
    }
    for pid in 0..s.num_subgroups() {
        for h in f.homs(pid) {
            writeln!(out, "hom {}", write_map(s, h)).unwrap();
        }
    }
}

pub fn write_fusion(f: &FusionSystem) -> String {
    let mut out = String::new();
    write_fusion_into(&mut out, f);
    out
}

fn read_fusion_block(c: &mut Cursor) -> Result<FusionSystem> {
    let (n, rest) = c.expect("fusion")?;
    let p = num(n, &header(n, rest, &["p"])?[0])?;
    let g = read_group_block(c, "s-")?;
    let s = Arc::new(PGroup::new(g, p).map_err(|e| Error::Parse(format!("line {n}: {e}")))?);
    let mut homs = vec![Vec::new(); s.num_subgroups()];
    for (n, rest) in c.take_all("hom") {
        let m = read_map(n, &s, rest)?;
        homs[s.sub_id(dom(&m))].push(m);
    }
    let f = FusionSystem::from_parts(s, homs)?;
    if let Some(v) = f.check_axioms().first() {
        return Err(Error::Parse(format!("listed morphisms do not form a fusion system: {v}")));
    }
    Ok(f)
}

pub fn read_fusion(text: &str) -> Result<FusionSystem> {
    let mut c = Cursor::new(text);
    let f = read_fusion_block(&mut c)?;
    c.finish()?;
    Ok(f)
}

// Linking systems.

pub fn write_linking(l: &LinkingSystem) -> String {
    let mut out = String::new();
    writeln!(out, "linking objects {}", l.num_objects()).unwrap();
    write_fusion_into(&mut out, l.fusion());
    let s = l.s();
    for a in 0..l.num_objects() {
        writeln!(out, "object {a} {:#x}", l.object_mask(a)).unwrap();
    }
    for t in 0..l.num_morphisms() {
        let m = l.morphism(t);
        writeln!(out, "mor {t} {} {} : {}", m.src, m.tgt, write_map(s, &m.proj)).unwrap();
    }
    for a in 0..l.num_objects() {
        let mut d: Vec<(usize, usize)> = l.delta_table(a).iter().map(|(&x, &t)| (x, t)).collect();
        d.sort_unstable();
        for (x, t) in d {
            writeln!(out, "delta {a} {x} {t}").unwrap();
        }
    }
    let mut comp: Vec<((usize, usize), usize)> = l.composition_table().iter().map(|(&k, &v)| (k, v)).collect();
    comp.sort_unstable();
    for ((g, f), h) in comp {
        writeln!(out, "comp {g} {f} {h}").unwrap();
    }
    out
}

pub fn read_linking(text: &str) -> Result<LinkingSystem> {
    let mut c = Cursor::new(text);
    let (n, rest) = c.expect("linking")?;
    let k = num(n, &header(n, rest, &["objects"])?[0])?;
    let f = read_fusion_block(&mut c)?;
    let s = f.s_arc();
    let mut objects = Vec::new();
    for (n, rest) in c.take_all("object") {
        let toks: Vec<&str> = rest.split_whitespace().collect();
        if toks.len() != 2 || num(n, toks[0])? != objects.len() {
            return perr(n, "expected `object <index> <mask>` in order");
        }
        let mask = u64::from_str_radix(toks[1].trim_start_matches("0x"), 16)
            .or_else(|_| perr(n, format!("bad mask {:?}", toks[1])))?;
        match s.try_sub_id(mask) {
            Some(id) => objects.push(id),
            None => return perr(n, "object is not a subgroup of S"),
        }
    }
    if objects.len() != k {
        return perr(n, format!("header announces {k} objects, found {}", objects.len()));
    }
    let mut mors = Vec::new();
    for (n, rest) in c.take_all("mor") {
        let Some((head, map)) = rest.split_once(':') else { return perr(n, "expected `mor <t> <src> <tgt> : <map>`") };
        let toks: Vec<usize> = head.split_whitespace().map(|t| num(n, t)).collect::<Result<_>>()?;
        if toks.len() != 3 || toks[0] != mors.len() || toks[1] >= k || toks[2] >= k {
            return perr(n, "expected `mor <t> <src> <tgt>` in order with valid objects");
        }
        let proj = read_map(n, &s, map)?;
        if dom(&proj) != s.sub(objects[toks[1]]) {
            return perr(n, "map is not defined on the source object");
        }
        mors.push(Morphism { src: toks[1], tgt: toks[2], proj });
    }
    let mut delta = vec![HashMap::new(); k];
    for (n, rest) in c.take_all("delta") {
        let t: Vec<usize> = rest.split_whitespace().map(|t| num(n, t)).collect::<Result<_>>()?;
        if t.len() != 3 || t[0] >= k || t[1] >= s.order() || t[2] >= mors.len() {
            return perr(n, "expected `delta <object> <element> <morphism>`");
        }
        delta[t[0]].insert(t[1], t[2]);
    }
    let mut comp = HashMap::new();
    for (n, rest) in c.take_all("comp") {
        let t: Vec<usize> = rest.split_whitespace().map(|t| num(n, t)).collect::<Result<_>>()?;
        if t.len() != 3 || t.iter().any(|&x| x >= mors.len()) {
            return perr(n, "expected `comp <g> <f> <g∘f>`");
        }
        comp.insert((t[0], t[1]), t[2]);
    }
    c.finish()?;
    LinkingSystem::from_parts(f, objects, mors, comp, delta)
}

// Presentations.

pub fn write_presentation(p: &GroupPresentation) -> String {
    let mut out = format!("presentation generators {}\n", p.generators.len());
    for (i, (a, b)) in p.generators.iter().enumerate() {
        writeln!(out, "gen {i} : {a} -> {b}").unwrap();
    }
    for r in &p.relations {
        match *r {
            Relation::Product(a, b, c) => writeln!(out, "rel {a} {b} = {c}").unwrap(),
            Relation::Trivial(a) => writeln!(out, "rel {a} = 1").unwrap(),
        }
    }
    out
}

pub fn read_presentation(text: &str) -> Result<GroupPresentation> {
    let mut c = Cursor::new(text);
    let (n, rest) = c.expect("presentation")?;
    let k = num(n, &header(n, rest, &["generators"])?[0])?;
    let mut generators = Vec::new();
    for (n, rest) in c.take_all("gen") {
        let parsed = (|| {
            let (i, arrow) = rest.split_once(':')?;
            let (a, b) = arrow.split_once("->")?;
            Some((i.trim().parse::<usize>().ok()?, a.trim().parse().ok()?, b.trim().parse().ok()?))
        })();
        match parsed {
            Some((i, a, b)) if i == generators.len() => generators.push((a, b)),
            _ => return perr(n, "expected `gen <i> : <P> -> <Q>` in order"),
        }
    }
    if generators.len() != k {
        return perr(n, format!("header announces {k} generators, found {}", generators.len()));
    }
    let mut relations = Vec::new();
    for (n, rest) in c.take_all("rel") {
        let Some((lhs, rhs)) = rest.split_once('=') else { return perr(n, "expected `=`") };
        let l: Vec<usize> = lhs.split_whitespace().map(|t| num(n, t)).collect::<Result<_>>()?;
        let r = rhs.trim();
        let rel = match (l.as_slice(), r) {
            ([a], "1") => Relation::Trivial(*a),
            ([a, b], _) => Relation::Product(*a, *b, num(n, r)?),
            _ => return perr(n, "expected `rel a b = c` or `rel a = 1`"),
        };
        let ids = match rel {
            Relation::Product(a, b, c) => vec![a, b, c],
            Relation::Trivial(a) => vec![a],
        };
        if ids.iter().any(|&x| x >= k) {
            return perr(n, "generator out of range");
        }
        relations.push(rel);
    }
    c.finish()?;
    Ok(GroupPresentation { generators, relations })
}

// Cocycles.

fn parse_coeff(n: usize, spec: &str) -> Result<Coeff> {
    let body = spec.strip_prefix('Z').ok_or(()).or_else(|_| perr(n, format!("bad coefficient group {spec:?}")))?;
    let (p, k) = match body.split_once('^') {
        Some((p, k)) => (num(n, p)?, num(n, k)?),
        None => (num(n, body)?, 1),
    };
    Coeff::new(p, k).map_err(|e| Error::Parse(format!("line {n}: {e}")))
}

/// Values are written in base-`p` digit form, e.g. `1,0` in `(Z/2)^2`.
fn write_value(c: &Coeff, a: usize) -> String {
    c.digits(a).iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

fn read_value(n: usize, c: &Coeff, tok: &str) -> Result<usize> {
    let d: Vec<usize> = tok.split(',').map(|t| num(n, t)).collect::<Result<_>>()?;
    if d.len() != c.k || d.iter().any(|&x| x >= c.p) {
        return perr(n, format!("value {tok:?} is not an element of {c}"));
    }
    Ok(c.from_digits(&d))
}

/// Only nonzero values are listed.
pub fn write_group_cocycle(w: &GroupCocycle) -> String {
    let mut out = format!("cocycle group A {} order {}\n", w.coeff, w.n);
    for g in 0..w.n {
        for h in 0..w.n {
            if w.get(g, h) != 0 {
                writeln!(out, "{g} {h} -> {}", write_value(&w.coeff, w.get(g, h))).unwrap();
            }
        }
    }
    out
}

fn read_rows(c: &mut Cursor, coeff: &Coeff, bound: usize) -> Result<Vec<(usize, usize, usize)>> {
    let mut rows = Vec::new();
    while let Some((n, l)) = c.next() {
        let Some((lhs, rhs)) = l.split_once("->") else { return perr(n, "expected `x y -> a`") };
        let xy: Vec<usize> = lhs.split_whitespace().map(|t| num(n, t)).collect::<Result<_>>()?;
        if xy.len() != 2 || xy.iter().any(|&x| x >= bound) {
            return perr(n, "expected two indices in range");
        }
        rows.push((xy[0], xy[1], read_value(n, coeff, rhs.trim())?));
    }
    Ok(rows)
}

pub fn read_group_cocycle(text: &str) -> Result<GroupCocycle> {
    let mut c = Cursor::new(text);
    let (n, rest) = c.expect("cocycle")?;
    let Some(rest) = strip_word(rest, "group") else { return perr(n, "expected `cocycle group`") };
    let h = header(n, rest, &["A", "order"])?;
    let coeff = parse_coeff(n, &h[0])?;
    let order = num(n, &h[1])?;
    let mut w = GroupCocycle::zero(coeff, order);
    for (g, h, a) in read_rows(&mut c, &coeff, order)? {
        w.table[g * order + h] = a;
    }
    Ok(w)
}

/// All composable pairs are listed, keyed `f g` for `g ∘ f`.
pub fn write_category_cocycle(w: &CategoryCocycle) -> String {
    let mut out = format!("cocycle category A {} pairs {}\n", w.coeff, w.values.len());
    let mut rows: Vec<_> = w.values.iter().collect();
    rows.sort_unstable();
    for (&(f, g), &a) in rows {
        writeln!(out, "{f} {g} -> {}", write_value(&w.coeff, a)).unwrap();
    }
    out
}

pub fn read_category_cocycle(text: &str) -> Result<CategoryCocycle> {
    let mut c = Cursor::new(text);
    let (n, rest) = c.expect("cocycle")?;
    let Some(rest) = strip_word(rest, "category") else { return perr(n, "expected `cocycle category`") };
    let h = header(n, rest, &["A", "pairs"])?;
    let coeff = parse_coeff(n, &h[0])?;
    let pairs = num(n, &h[1])?;
    let values: HashMap<(usize, usize), usize> =
        read_rows(&mut c, &coeff, usize::MAX)?.into_iter().map(|(f, g, a)| ((f, g), a)).collect();
    if values.len() != pairs {
        return perr(n, format!("header announces {pairs} pairs, found {}", values.len()));
    }
    Ok(CategoryCocycle { coeff, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linking::{linking_from_group, Objects};
    use crate::presets::preset;

    #[test]
    fn group_round_trip() {
        for name in presets::PRESET_NAMES {
            let text = write_group(&preset(name).unwrap());
            let g = read_group(&text).unwrap();
            assert_eq!(write_group(&g), text, "{name}");
            assert_eq!(g.order(), preset(name).unwrap().order());
        }
    }

    #[test]
    fn fusion_round_trip() {
        for (name, p) in [("S4", 2), ("A4", 2), ("S3", 3), ("Q8", 2)] {
            let f = FusionSystem::from_group_sylow(&preset(name).unwrap(), p).unwrap();
            let text = write_fusion(&f);
            let back = read_fusion(&text).unwrap();
            assert_eq!(write_fusion(&back), text, "{name}");
            assert!(back.is_isomorphic(&f).unwrap());
        }
    }

    #[test]
    fn linking_round_trip() {
        let g = preset("S4").unwrap();
        let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
        let text = write_linking(&l);
        let back = read_linking(&text).unwrap();
        assert_eq!(write_linking(&back), text);
        assert!(crate::linking::check_linking_axioms(&back).is_ok());
    }

    #[test]
    fn presentation_and_cocycle_round_trip() {
        let p = GroupPresentation {
            generators: vec![(0, 1), (1, 1)],
            relations: vec![Relation::Product(0, 1, 0), Relation::Trivial(1)],
        };
        let text = write_presentation(&p);
        assert_eq!(read_presentation(&text).unwrap(), p);
        let c = Coeff::new(2, 2).unwrap();
        let mut w = GroupCocycle::zero(c, 2);
        w.table[3] = 2;
        let text = write_group_cocycle(&w);
        assert_eq!(text, "cocycle group A Z2^2 order 2\n1 1 -> 0,1\n");
        assert_eq!(read_group_cocycle(&text).unwrap(), w);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = read_group("group degree 3\ngen (0 1 5)\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(read_presentation("presentation generators 1\ngen 0 : 0 -> 0\nrel 0 0 = 3\n").is_err());
        assert!(read_group_cocycle("cocycle group A Z4 order 2\n").is_err());
    }
}
