//! Centric and quasicentric linking systems as finite categories.
//!
//! Morphisms are opaque tokens numbered per ordered pair of objects. Each
//! token carries its projection to the fusion system; composition and the
//! distinguished monomorphisms `δ_P` are side tables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fusion::FusionSystem;
use crate::group::{Group, Subset};
use crate::index::{classes_downward, gamma_p, hyperfocal_subgroup, n_to_n, Choice};
use crate::pgroup::{bits, compose, img, is_identity_on, popcount, Map, Mask, PGroup, UNDEF};
use crate::snf::{row_from, Abelianization, RelationModule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objects {
    Centric,
    Quasicentric,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    /// Object indices.
    pub src: usize,
    pub tgt: usize,
    /// `π` of the morphism, as a map defined on the source subgroup.
    pub proj: Map,
}

/// Group-theoretic origin of a linking system built as `N_G(P,Q)/O^p(C_G(P))`.
#[derive(Clone, Debug)]
pub struct GroupRealization {
    pub group: Group,
    /// Element `i` of `S` is element `emb[i]` of `G`.
    pub emb: Vec<usize>,
    /// Minimal element of the coset of each token.
    pub reps: Vec<usize>,
    /// `O^p(C_G(P))` per object.
    pub kernels: Vec<Subset>,
    lookup: HashMap<(usize, usize, usize), usize>,
}

impl GroupRealization {
    /// The token `[x] ∈ Mor(P, Q)` for `x ∈ N_G(P, Q)`.
    pub fn token(&self, src: usize, tgt: usize, x: usize) -> Option<usize> {
        self.lookup.get(&(src, tgt, x)).copied()
    }
}

#[derive(Clone, Debug)]
pub struct LinkingSystem {
    fusion: FusionSystem,
    objects: Vec<usize>,
    obj_of: HashMap<usize, usize>,
    mors: Vec<Morphism>,
    pairs: Vec<Vec<usize>>,
    comp: HashMap<(usize, usize), usize>,
    delta: Vec<HashMap<usize, usize>>,
    ident: Vec<usize>,
    realization: Option<GroupRealization>,
}

impl LinkingSystem {
    /// Assembles a category from its tables; only typing is validated here.
    ///
    /// `comp[(g, f)]` is `g ∘ f`; `delta[o][x]` is `δ_P(x)`; the identity of
    /// each object is `δ_P(1)`.
    pub fn from_parts(
        fusion: FusionSystem,
        objects: Vec<usize>,
        mors: Vec<Morphism>,
        comp: HashMap<(usize, usize), usize>,
        delta: Vec<HashMap<usize, usize>>,
    ) -> Result<LinkingSystem> {
        let k = objects.len();
        let s = fusion.s();
        let obj_of: HashMap<usize, usize> = objects.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        if obj_of.len() != k || objects.iter().any(|&o| o >= s.num_subgroups()) {
            return Err(Error::Domain("objects must be distinct subgroups of S".into()));
        }
        if delta.len() != k {
            return Err(Error::Domain("one δ table per object is required".into()));
        }
        let mut pairs = vec![Vec::new(); k * k];
        for (t, m) in mors.iter().enumerate() {
            if m.src >= k || m.tgt >= k || m.proj.len() != s.order() {
                return Err(Error::Domain(format!("morphism {t} is malformed")));
            }
            pairs[m.src * k + m.tgt].push(t);
        }
        for (&(g, f), &h) in &comp {
            let ok = g < mors.len()
                && f < mors.len()
                && h < mors.len()
                && mors[g].src == mors[f].tgt
                && mors[h].src == mors[f].src
                && mors[h].tgt == mors[g].tgt;
            if !ok {
                return Err(Error::Domain(format!("composition entry ({g}, {f}) -> {h} is mistyped")));
            }
        }
        let mut ident = Vec::with_capacity(k);
        for (a, d) in delta.iter().enumerate() {
            for &t in d.values() {
                if t >= mors.len() || mors[t].src != a || mors[t].tgt != a {
                    return Err(Error::Domain(format!("δ of object {a} is not an automorphism")));
                }
            }
            ident.push(*d.get(&0).ok_or_else(|| Error::Domain(format!("δ of object {a} misses 1")))?);
        }
        Ok(LinkingSystem { fusion, objects, obj_of, mors, pairs, comp, delta, ident, realization: None })
    }

    pub fn fusion(&self) -> &FusionSystem {
        &self.fusion
    }
    pub fn s(&self) -> &PGroup {
        self.fusion.s()
    }
    /// Subgroup ids of the objects.
    pub fn objects(&self) -> &[usize] {
        &self.objects
    }
    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }
    pub fn object_mask(&self, a: usize) -> Mask {
        self.s().sub(self.objects[a])
    }
    pub fn object_of(&self, sub_id: usize) -> Option<usize> {
        self.obj_of.get(&sub_id).copied()
    }
    pub fn object_of_mask(&self, m: Mask) -> Option<usize> {
        self.s().try_sub_id(m).and_then(|i| self.object_of(i))
    }
    pub fn num_morphisms(&self) -> usize {
        self.mors.len()
    }
    pub fn morphism(&self, t: usize) -> &Morphism {
        &self.mors[t]
    }
    pub fn morphisms(&self) -> &[Morphism] {
        &self.mors
    }
    pub fn mor(&self, a: usize, b: usize) -> &[usize] {
        &self.pairs[a * self.objects.len() + b]
    }
    pub fn out_of(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.objects.len()).flat_map(move |b| self.mor(a, b).iter().copied())
    }
    pub fn into_obj(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.objects.len()).flat_map(move |a| self.mor(a, b).iter().copied())
    }
    pub fn identity(&self, a: usize) -> usize {
        self.ident[a]
    }
    pub fn delta(&self, a: usize, x: usize) -> Option<usize> {
        self.delta[a].get(&x).copied()
    }
    pub fn delta_table(&self, a: usize) -> &HashMap<usize, usize> {
        &self.delta[a]
    }
    /// `P·C_S(P)`, the intended domain of `δ_P`.
    pub fn delta_domain(&self, a: usize) -> Mask {
        let s = self.s();
        let p = self.object_mask(a);
        s.join(p, s.centralizer(p))
    }
    /// `g ∘ f`.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.comp.get(&(g, f)).copied()
    }
    pub fn composition_table(&self) -> &HashMap<(usize, usize), usize> {
        &self.comp
    }
    pub fn realization(&self) -> Option<&GroupRealization> {
        self.realization.as_ref()
    }
    pub fn s_object(&self) -> Option<usize> {
        self.object_of(self.s().full_id())
    }
    pub fn num_composable_pairs(&self) -> usize {
        (0..self.mors.len()).map(|f| self.out_of(self.mors[f].tgt).count()).sum()
    }

    /// Two-sided inverse of an isomorphism.
    pub fn inverse(&self, f: usize) -> Option<usize> {
        let m = &self.mors[f];
        self.mor(m.tgt, m.src).iter().copied().find(|&g| {
            self.compose(g, f) == Some(self.ident[m.src]) && self.compose(f, g) == Some(self.ident[m.tgt])
        })
    }

    /// The full subcategory on the given objects (subgroup ids, in the given order).
    pub fn full_subcategory(&self, subs: &[usize]) -> Result<LinkingSystem> {
        let old: Vec<usize> = subs
            .iter()
            .map(|&s| self.object_of(s).ok_or_else(|| Error::Domain(format!("{s} is not an object"))))
            .collect::<Result<_>>()?;
        let new_of: HashMap<usize, usize> = old.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let mut remap = vec![usize::MAX; self.mors.len()];
        let mut mors = Vec::new();
        for &a in &old {
            for &b in &old {
                for &t in self.mor(a, b) {
                    remap[t] = mors.len();
                    let m = &self.mors[t];
                    mors.push(Morphism { src: new_of[&m.src], tgt: new_of[&m.tgt], proj: m.proj.clone() });
                }
            }
        }
        let mut comp = HashMap::new();
        for (&(g, f), &h) in &self.comp {
            if remap[g] != usize::MAX && remap[f] != usize::MAX {
                comp.insert((remap[g], remap[f]), remap[h]);
            }
        }
        let delta = old
            .iter()
            .map(|&a| self.delta[a].iter().map(|(&x, &t)| (x, remap[t])).collect())
            .collect();
        let mut l = LinkingSystem::from_parts(self.fusion.clone(), subs.to_vec(), mors, comp, delta)?;
        if let Some(r) = &self.realization {
            let mut lookup = HashMap::new();
            for (&(a, b, x), &t) in &r.lookup {
                if let (Some(&na), Some(&nb)) = (new_of.get(&a), new_of.get(&b)) {
                    lookup.insert((na, nb, x), remap[t]);
                }
            }
            let mut reps = vec![0; l.mors.len()];
            for (t, &nt) in remap.iter().enumerate() {
                if nt != usize::MAX {
                    reps[nt] = r.reps[t];
                }
            }
            l.realization = Some(GroupRealization {
                group: r.group.clone(),
                emb: r.emb.clone(),
                reps,
                kernels: old.iter().map(|&a| r.kernels[a].clone()).collect(),
                lookup,
            });
        }
        Ok(l)
    }

    /// Overwrites one composition entry; used to build corrupted fixtures.
    pub fn corrupt_composition(&mut self, g: usize, f: usize, h: usize) {
        self.comp.insert((g, f), h);
    }

    /// Overwrites one value of `δ_P`; used to build corrupted fixtures.
    pub fn corrupt_delta(&mut self, a: usize, x: usize, t: usize) {
        self.delta[a].insert(x, t);
    }
}

/// `L^c_S(G)` or `L^q_S(G)`: morphisms `N_G(P,Q)/O^p(C_G(P))`.
pub fn linking_from_group(g: &Group, s: &Subset, p: usize, kind: Objects) -> Result<LinkingSystem> {
    let l = build_from_group(g, s, p, kind)?;
    let report = check_linking_axioms(&l);
    if !report.is_ok() {
        return Err(Error::Invariant(format!("group linking system fails axioms: {report}")));
    }
    Ok(l)
}

fn build_from_group(g: &Group, s: &Subset, p: usize, kind: Objects) -> Result<LinkingSystem> {
    let (f, emb) = FusionSystem::from_group_with_embedding(g, s, p)?;
    let sp = f.s_arc();
    let n = sp.order();
    let objects = match kind {
        Objects::Centric => f.centric_ids(),
        Objects::Quasicentric => f.quasicentric_ids(),
    };
    let k = objects.len();
    let mut back = vec![UNDEF; g.order()];
    for (i, &x) in emb.iter().enumerate() {
        back[x] = i as u8;
    }
    let sets: Vec<Subset> = objects.iter().map(|&o| g.set_of(bits(sp.sub(o)).map(|x| emb[x]))).collect();
    let kernels: Vec<Subset> = sets.iter().map(|ps| g.o_upper_p_of(&g.centralizer(ps), p)).collect();
    let mut mors = Vec::new();
    let mut reps = Vec::new();
    let mut lookup: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for a in 0..k {
        let pm = sp.sub(objects[a]);
        for b in 0..k {
            for x in g.transporter(&sets[a], &sets[b]).ones() {
                if lookup.contains_key(&(a, b, x)) {
                    continue;
                }
                let t = mors.len();
                for y in kernels[a].ones() {
                    lookup.insert((a, b, g.mul(x, y)), t);
                }
                let mut proj = vec![UNDEF; n];
                for y in bits(pm) {
                    proj[y] = back[g.conj(x, emb[y])];
                }
                mors.push(Morphism { src: a, tgt: b, proj });
                reps.push(x);
            }
        }
    }
    let mut by_pair = vec![Vec::new(); k * k];
    for (t, m) in mors.iter().enumerate() {
        by_pair[m.src * k + m.tgt].push(t);
    }
    let mut comp = HashMap::new();
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for &f1 in &by_pair[a * k + b] {
                    for &g1 in &by_pair[b * k + c] {
                        let x = g.mul(reps[g1], reps[f1]);
                        comp.insert((g1, f1), lookup[&(a, c, x)]);
                    }
                }
            }
        }
    }
    let delta = (0..k)
        .map(|a| {
            let pm = sp.sub(objects[a]);
            let d = sp.join(pm, sp.centralizer(pm));
            bits(d).map(|x| (x, lookup[&(a, a, emb[x])])).collect()
        })
        .collect();
    let mut l = LinkingSystem::from_parts(f, objects, mors, comp, delta)?;
    l.realization = Some(GroupRealization { group: g.clone(), emb, reps, kernels, lookup });
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkingAxiom {
    Category,
    Delta,
    A,
    B,
    C,
    D,
}

impl fmt::Display for LinkingAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LinkingAxiom::Category => "category",
            LinkingAxiom::Delta => "delta",
            LinkingAxiom::A => "(A)",
            LinkingAxiom::B => "(B)",
            LinkingAxiom::C => "(C)",
            LinkingAxiom::D => "(D)",
        };
        write!(f, "{s}")
    }
}

/// Violations per axiom: how many instances failed and the first witness.
#[derive(Clone, Debug, Default)]
pub struct LinkingReport {
    pub violations: BTreeMap<LinkingAxiom, (usize, String)>,
}

impl LinkingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
    pub fn failed(&self) -> Vec<LinkingAxiom> {
        self.violations.keys().copied().collect()
    }
    pub fn witness(&self, a: LinkingAxiom) -> Option<&str> {
        self.violations.get(&a).map(|(_, w)| w.as_str())
    }
    fn record(&mut self, a: LinkingAxiom, w: impl FnOnce() -> String) {
        self.violations.entry(a).and_modify(|e| e.0 += 1).or_insert_with(|| (1, w()));
    }
}

impl fmt::Display for LinkingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "all axioms hold");
        }
        let parts: Vec<String> =
            self.violations.iter().map(|(a, (n, w))| format!("{a} x{n}: {w}")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Exhaustive check of the category structure and of axioms (A)–(D) in their quasicentric form.
pub fn check_linking_axioms(l: &LinkingSystem) -> LinkingReport {
    use LinkingAxiom::*;
    let mut r = LinkingReport::default();
    let f = l.fusion();
    let s = l.s();
    let k = l.num_objects();

    for (t, m) in l.mors.iter().enumerate() {
        let pm = l.object_mask(m.src);
        let qm = l.object_mask(m.tgt);
        if (0..s.order()).any(|x| (m.proj[x] != UNDEF) != (pm >> x & 1 == 1))
            || image_of_checked(&m.proj, pm) & !qm != 0
        {
            r.record(Category, || format!("projection of {t} is not a map from its source to its target"));
            continue;
        }
        if l.compose(t, l.ident[m.src]) != Some(t) || l.compose(l.ident[m.tgt], t) != Some(t) {
            r.record(Category, || format!("identity law fails at {t}"));
        }
        for g in l.out_of(m.tgt) {
            match l.compose(g, t) {
                None => r.record(Category, || format!("{g} ∘ {t} undefined")),
                Some(h) => {
                    if l.mors[h].proj != compose(&l.mors[g].proj, &m.proj) {
                        r.record(Category, || format!("π is not functorial on {g} ∘ {t}"));
                    }
                    for e in l.out_of(l.mors[g].tgt) {
                        let left = l.compose(e, h);
                        let right = l.compose(e, g).and_then(|eg| l.compose(eg, t));
                        if left != right {
                            r.record(Category, || format!("associativity fails on ({e}, {g}, {t})"));
                        }
                    }
                }
            }
        }
    }

    for a in 0..k {
        let pm = l.object_mask(a);
        let dom = l.delta_domain(a);
        let keys: Mask = l.delta[a].keys().fold(0, |acc, &x| acc | (1 << x));
        if keys != dom {
            r.record(Delta, || format!("δ on object {a} is not defined exactly on P·C_S(P)"));
            continue;
        }
        let vals: HashSet<usize> = l.delta[a].values().copied().collect();
        if vals.len() != popcount(dom) {
            r.record(Delta, || format!("δ on object {a} is not injective"));
        }
        for x in bits(dom) {
            for y in bits(dom) {
                let lhs = l.compose(l.delta[a][&x], l.delta[a][&y]);
                if lhs != Some(l.delta[a][&s.mul(x, y)]) {
                    r.record(Delta, || format!("δ on object {a} is not a homomorphism at ({x}, {y})"));
                }
            }
            if l.mors[l.delta[a][&x]].proj != s.conj_map(x, pm) {
                r.record(B, || format!("π(δ_P({x})) ≠ c_{x} on object {a}"));
            }
        }
    }

    for a in 0..k {
        let pid = l.objects[a];
        let pm = s.sub(pid);
        let cs = s.centralizer(pm);
        let full_c = f.is_fully_centralized(pid);
        for b in 0..k {
            let qid = l.objects[b];
            let mut counts: HashMap<&Map, usize> = HashMap::new();
            for &t in l.mor(a, b) {
                *counts.entry(&l.mors[t].proj).or_insert(0) += 1;
            }
            let homs: HashSet<&Map> = f.hom(pid, qid).collect();
            let projected: HashSet<&Map> = counts.keys().copied().collect();
            if homs != projected {
                r.record(A, || format!("π: Mor({pid}, {qid}) does not map onto Hom_F"));
            }
            if !full_c {
                continue;
            }
            let csz = popcount(cs);
            if let Some((m, _)) = counts.iter().find(|(_, &c)| c != csz) {
                let m = (*m).clone();
                r.record(A, || format!("fibre of π over {m:?} in Mor({pid}, {qid}) is not one C_S(P)-orbit"));
            }
            for &t in l.mor(a, b) {
                let orbit: HashSet<Option<usize>> =
                    bits(cs).map(|c| l.delta(a, c).and_then(|d| l.compose(t, d))).collect();
                if orbit.len() != csz || orbit.contains(&None) {
                    r.record(A, || format!("C_S(P) does not act freely on {t} in Mor({pid}, {qid})"));
                }
            }
        }
    }

    for (t, m) in l.mors.iter().enumerate() {
        for x in bits(l.object_mask(m.src)) {
            let y = m.proj[x] as usize;
            let lhs = l.delta(m.src, x).and_then(|d| l.compose(t, d));
            let rhs = l.delta(m.tgt, y).and_then(|d| l.compose(d, t));
            if lhs.is_none() || lhs != rhs {
                r.record(C, || format!("f ∘ δ_P(x) ≠ δ_Q(π(f)(x)) ∘ f for f = {t}, x = {x}"));
            }
        }
    }

    match l.s_object() {
        None => r.record(D, || "S is not an object".into()),
        Some(so) => {
            for a in 0..k {
                if find_inclusion(l, a, so).is_none() {
                    let pid = l.objects[a];
                    r.record(D, || format!("no inclusion morphism for subgroup {pid}"));
                }
            }
        }
    }
    r
}

fn image_of_checked(map: &[u8], m: Mask) -> Mask {
    bits(m).filter(|&x| map[x] != UNDEF).fold(0, |acc, x| acc | (1 << map[x]))
}

/// First token of `Mor(P, S)` over the inclusion satisfying the (D) square.
fn find_inclusion(l: &LinkingSystem, a: usize, so: usize) -> Option<usize> {
    if a == so {
        return Some(l.ident[so]);
    }
    let pm = l.object_mask(a);
    let dom = l.delta_domain(a);
    l.mor(a, so).iter().copied().find(|&t| {
        is_identity_on(&l.mors[t].proj, pm)
            && bits(dom).all(|g| {
                let lhs = l.delta(so, g).and_then(|d| l.compose(d, t));
                let rhs = l.delta(a, g).and_then(|d| l.compose(t, d));
                lhs.is_some() && lhs == rhs
            })
    })
}

/// A compatible set of inclusions and the extensions `δ_{P,Q}: N_S(P,Q) → Mor(P,Q)`.
#[derive(Clone, Debug)]
pub struct Inclusions {
    /// `ι_P ∈ Mor(P, S)` per object.
    pub iota: Vec<usize>,
    incl: HashMap<(usize, usize), usize>,
    delta_pq: HashMap<(usize, usize, usize), usize>,
    inclusion_tokens: HashSet<usize>,
}

impl Inclusions {
    /// `ι_P^Q` for objects `P ≤ Q`.
    pub fn inclusion(&self, a: usize, b: usize) -> Option<usize> {
        self.incl.get(&(a, b)).copied()
    }
    pub fn inclusions(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.incl.iter().map(|(&k, &v)| (k, v))
    }
    pub fn is_inclusion(&self, t: usize) -> bool {
        self.inclusion_tokens.contains(&t)
    }
    /// `δ_{P,Q}(g)` for `g ∈ N_S(P,Q)`.
    pub fn delta_pq(&self, a: usize, b: usize, g: usize) -> Option<usize> {
        self.delta_pq.get(&(a, b, g)).copied()
    }
}

/// Chooses `ι_P` (first token satisfying (D) in token order, `ι_S = Id`) and derives everything else.
pub fn choose_inclusions(l: &LinkingSystem) -> Result<Inclusions> {
    let s = l.s();
    let k = l.num_objects();
    let so = l.s_object().ok_or_else(|| Error::Invariant("S is not an object".into()))?;
    let mut iota = Vec::with_capacity(k);
    for a in 0..k {
        let t = find_inclusion(l, a, so).ok_or_else(|| {
            Error::Invariant(format!("no (D)-satisfying lift of the inclusion of subgroup {}", l.objects[a]))
        })?;
        iota.push(t);
    }
    let mut delta_pq = HashMap::new();
    for a in 0..k {
        let pm = l.object_mask(a);
        for b in 0..k {
            let qm = l.object_mask(b);
            let mut by_composite: HashMap<usize, usize> = HashMap::new();
            for &h in l.mor(a, b) {
                let c = l
                    .compose(iota[b], h)
                    .ok_or_else(|| Error::Invariant("ι_Q ∘ h undefined".into()))?;
                if by_composite.insert(c, h).is_some() {
                    return Err(Error::Invariant("ι_Q ∘ - is not injective on Mor(P,Q)".into()));
                }
            }
            let mut seen = HashSet::new();
            for g in bits(s.transporter(pm, qm)) {
                let c = l
                    .delta(so, g)
                    .and_then(|d| l.compose(d, iota[a]))
                    .ok_or_else(|| Error::Invariant("δ_S(g) ∘ ι_P undefined".into()))?;
                let h = *by_composite.get(&c).ok_or_else(|| {
                    Error::Invariant(format!("δ_{{P,Q}}({g}) does not exist for objects {a}, {b}"))
                })?;
                if !seen.insert(h) {
                    return Err(Error::Invariant(format!("δ_{{P,Q}} is not injective on objects {a}, {b}")));
                }
                delta_pq.insert((a, b, g), h);
            }
        }
    }
    let mut incl = HashMap::new();
    for a in 0..k {
        for b in 0..k {
            if l.object_mask(a) & !l.object_mask(b) == 0 {
                incl.insert((a, b), delta_pq[&(a, b, 0)]);
            }
        }
    }
    if incl[&(so, so)] != l.ident[so] {
        return Err(Error::Invariant("ι_S is not the identity".into()));
    }
    for (&(a, b), &ab) in &incl {
        if b == so && ab != iota[a] {
            return Err(Error::Invariant("ι_P^S differs from ι_P".into()));
        }
        for c in 0..k {
            if let Some(&bc) = incl.get(&(b, c)) {
                if l.compose(bc, ab) != Some(incl[&(a, c)]) {
                    return Err(Error::Invariant(format!("ι_P^R ≠ ι_Q^R ∘ ι_P^Q for objects {a} ≤ {b} ≤ {c}")));
                }
            }
        }
    }
    let inclusion_tokens = incl.values().copied().collect();
    Ok(Inclusions { iota, incl, delta_pq, inclusion_tokens })
}

/// The unique `χ ∈ Mor(P, Q)` with `φ = ψ ∘ χ`, for `φ ∈ Mor(P, R)` and `ψ ∈ Mor(Q, R)`.
pub fn restrict_morphism(l: &LinkingSystem, phi: usize, psi: usize) -> Result<usize> {
    let (mf, mp) = (&l.mors[phi], &l.mors[psi]);
    if mf.tgt != mp.tgt {
        return Err(Error::Domain("φ and ψ must have the same target".into()));
    }
    if img(&mf.proj) & !img(&mp.proj) != 0 {
        return Err(Error::Domain("Im π(φ) is not contained in Im π(ψ)".into()));
    }
    let sols: Vec<usize> =
        l.mor(mf.src, mp.src).iter().copied().filter(|&c| l.compose(psi, c) == Some(phi)).collect();
    match sols.as_slice() {
        [c] => Ok(*c),
        _ => Err(Error::Invariant(format!("{} solutions χ with φ = ψ ∘ χ", sols.len()))),
    }
}

/// `f = ι_R^Q ∘ f'` with `f'` an isomorphism onto the image `R`: returns `f'`.
pub fn factor_through_image(l: &LinkingSystem, incs: &Inclusions, f: usize) -> Result<usize> {
    let m = &l.mors[f];
    let r = l
        .object_of_mask(img(&m.proj))
        .ok_or_else(|| Error::Invariant(format!("image of {f} is not an object")))?;
    let iota = incs.inclusion(r, m.tgt).ok_or_else(|| Error::Invariant("missing inclusion".into()))?;
    let sols: Vec<usize> =
        l.mor(m.src, r).iter().copied().filter(|&c| l.compose(iota, c) == Some(f)).collect();
    match sols.as_slice() {
        [c] if l.inverse(*c).is_some() => Ok(*c),
        _ => Err(Error::Invariant(format!("{f} does not factor uniquely as inclusion ∘ isomorphism"))),
    }
}

/// The λ functor: a labelling of morphisms by `Γ_p = S/hyp` with `λ(δ_S(g)) = g·hyp`.
#[derive(Clone, Debug)]
pub struct Lambda {
    pub gamma: Group,
    pub theta: Vec<usize>,
    pub values: Vec<usize>,
}

/// `Aut_L(P)` as an abstract group: token list, group and token position to group element.
fn aut_group(l: &LinkingSystem, a: usize) -> Result<(Vec<usize>, Group, Vec<usize>)> {
    let auts = l.mor(a, a).to_vec();
    let pos: HashMap<usize, usize> = auts.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let n = auts.len();
    let mut table = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            let c = l.compose(auts[i], auts[j]).ok_or_else(|| Error::Invariant("Aut_L(P) not closed".into()))?;
            table[i * n + j] = pos[&c];
        }
    }
    let (g, map) = Group::from_table(n, &table)?;
    Ok((auts, g, map))
}

/// Builds λ by downward induction over conjugacy classes of objects.
pub fn lambda_functor(l: &LinkingSystem, incs: &Inclusions) -> Result<Lambda> {
    let f = l.fusion();
    if !f.is_saturated() {
        return Err(Error::Domain("λ needs a saturated fusion system".into()));
    }
    let s = l.s();
    let p = f.p();
    let hyp = hyperfocal_subgroup(f)?;
    let (gamma, theta) = gamma_p(f)?;
    let so = l.s_object().ok_or_else(|| Error::Domain("S is not an object".into()))?;
    let unset = usize::MAX;
    let mut values = vec![unset; l.num_morphisms()];
    let err = |m: String| Error::Invariant(format!("λ: {m}"));

    for (rep, members) in classes_downward(f, l.objects()) {
        let ra = l.object_of(rep).ok_or_else(|| err("class representative is not an object".into()))?;
        let pm = s.sub(rep);
        let (auts, ag, map) = aut_group(l, ra)?;
        let pos: HashMap<usize, usize> = auts.iter().enumerate().map(|(i, &t)| (t, map[i])).collect();
        let op = ag.o_upper_p_of(&ag.all(), p);
        let norm: Vec<(usize, usize)> = bits(s.normalizer(pm))
            .map(|g| (g, pos[&incs.delta_pq(ra, ra, g).unwrap()]))
            .collect();
        for &(g, d) in &norm {
            if op.contains(d) && hyp >> g & 1 == 0 {
                return Err(err(format!("condition (*) fails: δ({g}) ∈ O^p(Aut_L(P)) but {g} ∉ hyp")));
            }
        }
        let mut lam_rep: HashMap<usize, usize> = HashMap::new();
        for &t in &auts {
            let e = pos[&t];
            let mut val = None;
            for &(g, d) in &norm {
                if !op.contains(ag.mul(e, ag.inv(d))) {
                    continue;
                }
                match val {
                    None => val = Some(theta[g]),
                    Some(v) if v != theta[g] => return Err(err(format!("λ_P not well defined on subgroup {rep}"))),
                    _ => {}
                }
            }
            let v = val.ok_or_else(|| err("Aut_L(P) ≠ O^p(Aut_L(P))·δ(N_S(P))".into()))?;
            lam_rep.insert(t, v);
        }
        // χ_m ∈ Iso(m, rep) with known λ, for every member m of the class.
        let mut chi: HashMap<usize, (usize, usize, usize)> = HashMap::new();
        for &m in &members {
            let ma = l.object_of(m).ok_or_else(|| err("class member is not an object".into()))?;
            if m == rep {
                let id = l.identity(ra);
                chi.insert(ma, (id, id, gamma.identity()));
                continue;
            }
            let nid = s.sub_id(s.normalizer(s.sub(m)));
            let na = l.object_of(nid).ok_or_else(|| err("N_S(P) is not an object".into()))?;
            let bar_map = n_to_n(f, m, rep, Choice::First)?;
            let bar = *l
                .mor(na, so)
                .iter()
                .find(|&&t| l.morphism(t).proj == bar_map)
                .ok_or_else(|| err("no lift of the N_S-extension".into()))?;
            if values[bar] == unset {
                return Err(err("N_S(P) has no value yet".into()));
            }
            let into = incs.inclusion(ma, na).unwrap();
            let c1 = l.compose(bar, into).unwrap();
            let c = restrict_morphism(l, c1, incs.iota[ra])?;
            let ci = l.inverse(c).ok_or_else(|| err("χ is not an isomorphism".into()))?;
            chi.insert(ma, (c, ci, values[bar]));
        }
        for &m in &members {
            let ma = l.object_of(m).unwrap();
            let (_, c1inv, x1) = chi[&ma];
            for t in l.out_of(ma).collect::<Vec<_>>() {
                let fp = factor_through_image(l, incs, t)?;
                let r = l.morphism(fp).tgt;
                let (c2, _, x2) = *chi.get(&r).ok_or_else(|| err("image outside the class".into()))?;
                let psi = l.compose(c2, l.compose(fp, c1inv).unwrap()).unwrap();
                let v = gamma.mul(gamma.inv(x2), gamma.mul(lam_rep[&psi], x1));
                values[t] = v;
            }
        }
    }
    if values.contains(&unset) {
        return Err(err("some morphisms received no value".into()));
    }
    let lam = Lambda { gamma, theta, values };
    check_lambda(l, incs, &lam, hyp)?;
    Ok(lam)
}

fn check_lambda(l: &LinkingSystem, incs: &Inclusions, lam: &Lambda, hyp: Mask) -> Result<()> {
    let g = &lam.gamma;
    let s = l.s();
    let err = |m: String| Error::Invariant(format!("λ: {m}"));
    for (&(gg, ff), &h) in l.composition_table() {
        if lam.values[h] != g.mul(lam.values[gg], lam.values[ff]) {
            return Err(err(format!("not functorial on {gg} ∘ {ff}")));
        }
    }
    for (_, t) in incs.inclusions() {
        if lam.values[t] != g.identity() {
            return Err(err(format!("inclusion {t} is not sent to 1")));
        }
    }
    let so = l.s_object().unwrap();
    for x in 0..s.order() {
        let v = lam.values[l.delta(so, x).unwrap()];
        if v != lam.theta[x] {
            return Err(err(format!("λ(δ_S({x})) is not the projection")));
        }
        if (v == g.identity()) != (hyp >> x & 1 == 1) {
            return Err(err("kernel of λ on δ_S(S) is not hyp".into()));
        }
    }
    let image: HashSet<usize> = lam.values.iter().copied().collect();
    if image.len() != g.order() {
        return Err(err("not surjective".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `a · b = c`.
    Product(usize, usize, usize),
    /// `a = 1`.
    Trivial(usize),
}

/// Generators with a source/target label (subgroup ids) and relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPresentation {
    pub generators: Vec<(usize, usize)>,
    pub relations: Vec<Relation>,
}

impl GroupPresentation {
    pub fn abelianization(&self) -> Result<Abelianization> {
        let mut m = RelationModule::new(self.generators.len());
        for r in &self.relations {
            let row = match *r {
                Relation::Product(a, b, c) => row_from([(a, 1), (b, 1), (c, -1)]),
                Relation::Trivial(a) => row_from([(a, 1)]),
            };
            m.add(row)?;
        }
        m.finish()
    }
}

/// Generators are morphisms; one relation per composable pair and one per inclusion morphism.
pub fn pi1_presentation(l: &LinkingSystem, incs: &Inclusions) -> GroupPresentation {
    let generators = l.morphisms().iter().map(|m| (l.objects()[m.src], l.objects()[m.tgt])).collect();
    let mut relations = Vec::new();
    for f in 0..l.num_morphisms() {
        for g in l.out_of(l.morphism(f).tgt) {
            relations.push(Relation::Product(g, f, l.compose(g, f).unwrap()));
        }
    }
    let mut incl: Vec<usize> = incs.inclusions().map(|(_, t)| t).collect();
    incl.sort();
    relations.extend(incl.into_iter().map(Relation::Trivial));
    GroupPresentation { generators, relations }
}

/// The multiplication table presentation of a finite group (one-object category).
pub fn group_presentation(g: &Group) -> GroupPresentation {
    let n = g.order();
    let mut relations = Vec::new();
    for a in 0..n {
        for b in 0..n {
            relations.push(Relation::Product(a, b, g.mul(a, b)));
        }
    }
    GroupPresentation { generators: vec![(0, 0); n], relations }
}

/// `A *_C B` for subgroups `A, B` of `g` with `C = A ∩ B`, from multiplication tables.
pub fn amalgam_presentation(g: &Group, a: &Subset, b: &Subset) -> GroupPresentation {
    let ea: Vec<usize> = a.ones().collect();
    let eb: Vec<usize> = b.ones().collect();
    let ia: HashMap<usize, usize> = ea.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let ib: HashMap<usize, usize> = eb.iter().enumerate().map(|(i, &x)| (x, ea.len() + i)).collect();
    let mut relations = Vec::new();
    for (elems, idx) in [(&ea, &ia), (&eb, &ib)] {
        for &x in elems.iter() {
            for &y in elems.iter() {
                relations.push(Relation::Product(idx[&x], idx[&y], idx[&g.mul(x, y)]));
            }
        }
    }
    for &x in &ea {
        if let Some(&j) = ib.get(&x) {
            relations.push(Relation::Product(ia[&x], ib[&g.identity()], j));
        }
    }
    GroupPresentation { generators: vec![(0, 0); ea.len() + eb.len()], relations }
}

/// In the abelianization `[δ_S(π(α)(x))] = [δ_S(x)]`; if `λ` is given, also
/// `λ(α)·θ(x) = θ(π(α)(x))·λ(α)`, for every morphism `α` and `x` in its source.
pub fn check_conjugation(
    l: &LinkingSystem,
    ab: &Abelianization,
    lambda: Option<&Lambda>,
) -> Result<()> {
    let so = l.s_object().ok_or_else(|| Error::Domain("S is not an object".into()))?;
    let mut checked: HashSet<(usize, usize)> = HashSet::new();
    for (t, m) in l.morphisms().iter().enumerate() {
        for x in bits(l.object_mask(m.src)) {
            let y = m.proj[x] as usize;
            if x != y && checked.insert((x.min(y), x.max(y))) {
                let (dx, dy) = (l.delta(so, x).unwrap(), l.delta(so, y).unwrap());
                if !ab.is_zero(row_from([(dy, 1), (dx, -1)]))? {
                    return Err(Error::Invariant(format!("j({y}) ≠ j({x}) in the abelianization")));
                }
            }
            if let Some(lam) = lambda {
                let g = &lam.gamma;
                let v = lam.values[t];
                if g.mul(v, lam.theta[x]) != g.mul(lam.theta[y], v) {
                    return Err(Error::Invariant(format!("λ({t}) does not conjugate θ({x}) to θ({y})")));
                }
            }
        }
    }
    Ok(())
}

/// `(S_H, F_H, L_H)` cut out by a functor `θ̂: Mor(L) → Γ` and a subgroup `H ≤ Γ`.
#[derive(Clone, Debug)]
pub struct SubLinking {
    pub s_h: Mask,
    /// Element `i` of the new `S_H` is element `emb[i]` of `S`.
    pub emb: Vec<u8>,
    pub linking: LinkingSystem,
}

pub fn sub_linking_from_functor(
    l: &LinkingSystem,
    incs: &Inclusions,
    gamma: &Group,
    theta: &[usize],
    values: &[usize],
    h: &Subset,
) -> Result<SubLinking> {
    let s = l.s();
    let p = l.fusion().p();
    let dom = |m: &str| Error::Domain(format!("sub-linking system: {m}"));
    if !gamma.is_subgroup(h) {
        return Err(dom("H is not a subgroup of Γ"));
    }
    let og = gamma.order();
    if !(crate::group::is_p_power(og, p) || og % p != 0) {
        return Err(dom("Γ is neither a p-group nor a p'-group"));
    }
    if values.len() != l.num_morphisms() || theta.len() != s.order() {
        return Err(dom("θ̂ or θ has the wrong length"));
    }
    for (&(gg, ff), &c) in l.composition_table() {
        if values[c] != gamma.mul(values[gg], values[ff]) {
            return Err(dom("θ̂ is not a functor"));
        }
    }
    if incs.inclusions().any(|(_, t)| values[t] != gamma.identity()) {
        return Err(dom("θ̂ does not send inclusions to 1"));
    }
    let so = l.s_object().unwrap();
    for x in 0..s.order() {
        if values[l.delta(so, x).unwrap()] != theta[x] {
            return Err(dom("θ̂ ∘ δ_S ≠ θ"));
        }
    }
    let s_h: Mask = (0..s.order()).filter(|&x| h.contains(theta[x])).fold(0, |acc, x| acc | (1 << x));
    if !s.is_subgroup(s_h) {
        return Err(dom("θ^{-1}(H) is not a subgroup"));
    }
    let (sh, emb) = s.subgroup_pgroup(s_h);
    let sh = Arc::new(sh);
    let n = sh.order();
    let mut back = vec![UNDEF; s.order()];
    for (i, &x) in emb.iter().enumerate() {
        back[x as usize] = i as u8;
    }
    let to_new = |m: Mask| bits(m).fold(0 as Mask, |acc, x| acc | (1 << back[x]));
    let old_objs: Vec<usize> = (0..l.num_objects()).filter(|&a| l.object_mask(a) & !s_h == 0).collect();
    let new_of: HashMap<usize, usize> = old_objs.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let objects: Vec<usize> = old_objs.iter().map(|&a| sh.sub_id(to_new(l.object_mask(a)))).collect();
    let mut remap = HashMap::new();
    let mut mors = Vec::new();
    for &a in &old_objs {
        for &b in &old_objs {
            for &t in l.mor(a, b) {
                if !h.contains(values[t]) {
                    continue;
                }
                let m = l.morphism(t);
                let mut proj = vec![UNDEF; n];
                for x in bits(l.object_mask(a)) {
                    proj[back[x] as usize] = back[m.proj[x] as usize];
                }
                remap.insert(t, mors.len());
                mors.push(Morphism { src: new_of[&a], tgt: new_of[&b], proj });
            }
        }
    }
    let mut comp = HashMap::new();
    for (&(gg, ff), &c) in l.composition_table() {
        if let (Some(&ng), Some(&nf)) = (remap.get(&gg), remap.get(&ff)) {
            comp.insert((ng, nf), remap[&c]);
        }
    }
    let seeds: Vec<Map> = mors.iter().map(|m| m.proj.clone()).collect();
    let fh = FusionSystem::generate(sh.clone(), &seeds, false);
    if !fh.check_axioms().is_empty() {
        return Err(Error::Invariant("projected morphisms do not form a fusion system over S_H".into()));
    }
    let mut delta = Vec::new();
    for (i, &a) in old_objs.iter().enumerate() {
        let pm = sh.sub(objects[i]);
        let d = sh.join(pm, sh.centralizer(pm));
        let mut tab = HashMap::new();
        for x in bits(d) {
            let t = l
                .delta(a, emb[x] as usize)
                .and_then(|t| remap.get(&t).copied())
                .ok_or_else(|| Error::Invariant("δ_P(x) is not in L_H".into()))?;
            tab.insert(x, t);
        }
        delta.push(tab);
    }
    let lh = LinkingSystem::from_parts(fh, objects, mors, comp, delta)?;
    let report = check_linking_axioms(&lh);
    if !report.is_ok() {
        return Err(Error::Invariant(format!("L_H fails the linking axioms: {report}")));
    }
    if !lh.fusion().is_saturated() {
        return Err(Error::Invariant("F_H is not saturated".into()));
    }
    Ok(SubLinking { s_h, emb, linking: lh })
}

/// `θ̂ ∘ π` on a linking system whose objects carry a fusion-level labelling.
pub fn values_through_projection(l: &LinkingSystem, labels: &HashMap<Map, usize>) -> Result<Vec<usize>> {
    l.morphisms()
        .iter()
        .map(|m| {
            labels
                .get(&m.proj)
                .copied()
                .ok_or_else(|| Error::Domain(format!("no label on {:?}", m.proj)))
        })
        .collect()
}

/// `L/A` on the objects containing `A`, and its full subcategory `(L/A)^c`.
#[derive(Clone, Debug)]
pub struct LinkingQuotient {
    pub s_bar: Arc<PGroup>,
    /// Projection `S → S/A` on element indices.
    pub proj: Vec<u8>,
    /// Morphisms of `L/A` as `δ_P(A)`-orbits; the representative token of each.
    pub orbit_rep: Vec<usize>,
    pub quotient: LinkingSystem,
    pub centric: LinkingSystem,
}

pub fn linking_quotient(l: &LinkingSystem, a: Mask) -> Result<LinkingQuotient> {
    let f = l.fusion();
    if !crate::central::is_central(f, a)? {
        return Err(Error::Domain("A is not central in F".into()));
    }
    let qf = crate::central::quotient_fusion(f, a)?;
    let sbar = qf.system.s_arc();
    let proj = qf.proj.clone();
    let nb = sbar.order();
    let old_objs: Vec<usize> = (0..l.num_objects()).filter(|&o| a & !l.object_mask(o) == 0).collect();
    let new_of: HashMap<usize, usize> = old_objs.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let down = |m: Mask| bits(m).fold(0 as Mask, |acc, x| acc | (1 << proj[x]));
    let objects: Vec<usize> = old_objs.iter().map(|&o| sbar.sub_id(down(l.object_mask(o)))).collect();
    let mut orbit_of: HashMap<usize, usize> = HashMap::new();
    let mut orbit_rep = Vec::new();
    let mut mors = Vec::new();
    for &o in &old_objs {
        for &b in &old_objs {
            for &t in l.mor(o, b) {
                if orbit_of.contains_key(&t) {
                    continue;
                }
                let orbit: HashSet<usize> =
                    bits(a).map(|x| l.compose(t, l.delta(o, x).unwrap()).unwrap()).collect();
                if orbit.len() != popcount(a) {
                    return Err(Error::Invariant("δ_P(A) does not act freely".into()));
                }
                let id = mors.len();
                for &u in &orbit {
                    orbit_of.insert(u, id);
                }
                let m = l.morphism(t);
                let mut pm = vec![UNDEF; nb];
                for x in bits(l.object_mask(o)) {
                    let (xb, yb) = (proj[x] as usize, proj[m.proj[x] as usize]);
                    if pm[xb] != UNDEF && pm[xb] != yb {
                        return Err(Error::Invariant("morphism does not descend to P/A".into()));
                    }
                    pm[xb] = yb;
                }
                mors.push(Morphism { src: new_of[&o], tgt: new_of[&b], proj: pm });
                orbit_rep.push(t);
            }
        }
    }
    let mut comp = HashMap::new();
    for (&(gg, ff), &c) in l.composition_table() {
        if let (Some(&ng), Some(&nf)) = (orbit_of.get(&gg), orbit_of.get(&ff)) {
            let nc = orbit_of[&c];
            if *comp.entry((ng, nf)).or_insert(nc) != nc {
                return Err(Error::Invariant("composition does not descend to L/A".into()));
            }
        }
    }
    let mut delta = Vec::new();
    for (i, &o) in old_objs.iter().enumerate() {
        let pm = sbar.sub(objects[i]);
        let dom = sbar.join(pm, sbar.centralizer(pm));
        let mut tab = HashMap::new();
        for (&x, &t) in l.delta_table(o) {
            let xb = proj[x] as usize;
            if dom >> xb & 1 == 1 {
                let v = orbit_of[&t];
                if *tab.entry(xb).or_insert(v) != v {
                    return Err(Error::Invariant("δ does not descend to L/A".into()));
                }
            }
        }
        delta.push(tab);
    }
    let quotient = LinkingSystem::from_parts(qf.system.clone(), objects.clone(), mors, comp, delta)?;
    let centric_subs: Vec<usize> =
        objects.iter().copied().filter(|&o| qf.system.is_centric(o)).collect();
    let centric = quotient.full_subcategory(&centric_subs)?;
    let report = check_linking_axioms(&centric);
    if !report.is_ok() {
        return Err(Error::Invariant(format!("(L/A)^c fails the linking axioms: {report}")));
    }
    Ok(LinkingQuotient { s_bar: sbar, proj, orbit_rep, quotient, centric })
}

/// An isomorphism of linking systems commuting with `π` and `δ`: the group
/// isomorphism `σ: S → S'` and the token bijection.
#[derive(Clone, Debug)]
pub struct LinkingIso {
    pub sigma: Map,
    pub tokens: Vec<usize>,
}

pub fn find_linking_isomorphism(l1: &LinkingSystem, l2: &LinkingSystem) -> Result<Option<LinkingIso>> {
    if l1.num_objects() != l2.num_objects() || l1.num_morphisms() != l2.num_morphisms() {
        return Ok(None);
    }
    let (f1, f2) = (l1.fusion(), l2.fusion());
    for sigma in l1.s().isomorphisms_to(l2.s())? {
        let n2 = l2.s().order();
        let fus_ok = f1.all_homs().iter().flatten().all(|h| {
            f2.contains(&crate::fusion::conjugate_map(&sigma, h, n2))
        }) && f1.num_morphisms() == f2.num_morphisms();
        if !fus_ok {
            continue;
        }
        if let Some(tokens) = token_bijection(l1, l2, &sigma) {
            return Ok(Some(LinkingIso { sigma, tokens }));
        }
    }
    Ok(None)
}

struct IsoSearch<'a> {
    l1: &'a LinkingSystem,
    l2: &'a LinkingSystem,
    obj: Vec<usize>,
    cands: Vec<Vec<usize>>,
    assign: Vec<usize>,
    used: Vec<bool>,
    trail: Vec<usize>,
}

impl IsoSearch<'_> {
    fn set(&mut self, t: usize, u: usize, queue: &mut Vec<usize>) -> bool {
        if self.assign[t] != usize::MAX {
            return self.assign[t] == u;
        }
        if self.used[u] || !self.cands[t].contains(&u) {
            return false;
        }
        self.assign[t] = u;
        self.used[u] = true;
        self.trail.push(t);
        queue.push(t);
        true
    }

    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(t) = queue.pop() {
            let m = self.l1.morphism(t).clone();
            let after: Vec<usize> = self.l1.out_of(m.tgt).collect();
            for g in after {
                if self.assign[g] == usize::MAX {
                    continue;
                }
                let h = self.l1.compose(g, t).unwrap();
                let Some(u) = self.l2.compose(self.assign[g], self.assign[t]) else { return false };
                if !self.set(h, u, &mut queue) {
                    return false;
                }
            }
            let before: Vec<usize> = self.l1.into_obj(m.src).collect();
            for e in before {
                if self.assign[e] == usize::MAX {
                    continue;
                }
                let h = self.l1.compose(t, e).unwrap();
                let Some(u) = self.l2.compose(self.assign[t], self.assign[e]) else { return false };
                if !self.set(h, u, &mut queue) {
                    return false;
                }
            }
        }
        true
    }

    fn undo(&mut self, to: usize) {
        while self.trail.len() > to {
            let t = self.trail.pop().unwrap();
            self.used[self.assign[t]] = false;
            self.assign[t] = usize::MAX;
        }
    }

    fn search(&mut self) -> bool {
        let open = (0..self.assign.len())
            .filter(|&t| self.assign[t] == usize::MAX)
            .min_by_key(|&t| self.cands[t].iter().filter(|&&u| !self.used[u]).count());
        let Some(t) = open else { return true };
        let options: Vec<usize> = self.cands[t].iter().copied().filter(|&u| !self.used[u]).collect();
        for u in options {
            let mark = self.trail.len();
            let mut q = Vec::new();
            if self.set(t, u, &mut q) && self.propagate(q) && self.search() {
                return true;
            }
            self.undo(mark);
        }
        false
    }
}

fn token_bijection(l1: &LinkingSystem, l2: &LinkingSystem, sigma: &[u8]) -> Option<Vec<usize>> {
    let n2 = l2.s().order();
    let mut obj = Vec::new();
    for a in 0..l1.num_objects() {
        let m = crate::pgroup::image_of(sigma, l1.object_mask(a));
        obj.push(l2.object_of_mask(m)?);
    }
    let mut cands = Vec::with_capacity(l1.num_morphisms());
    for m in l1.morphisms() {
        let target = crate::fusion::conjugate_map(sigma, &m.proj, n2);
        let c: Vec<usize> = l2
            .mor(obj[m.src], obj[m.tgt])
            .iter()
            .copied()
            .filter(|&u| l2.morphism(u).proj == target)
            .collect();
        if c.is_empty() {
            return None;
        }
        cands.push(c);
    }
    let mut st = IsoSearch {
        l1,
        l2,
        obj,
        cands,
        assign: vec![usize::MAX; l1.num_morphisms()],
        used: vec![false; l2.num_morphisms()],
        trail: Vec::new(),
    };
    let mut q = Vec::new();
    for a in 0..l1.num_objects() {
        if l1.delta_table(a).len() != l2.delta_table(st.obj[a]).len() {
            return None;
        }
        for (&x, &t) in l1.delta_table(a) {
            let u = l2.delta(st.obj[a], sigma[x] as usize)?;
            if !st.set(t, u, &mut q) {
                return None;
            }
        }
    }
    if !st.propagate(q) || !st.search() {
        return None;
    }
    Some(st.assign)
}
