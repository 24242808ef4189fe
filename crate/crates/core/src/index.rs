//! Hyperfocal and focal subgroups, the restrictive categories generated by
//! `O^p` and `O^{p'}` of automizers, fusion mapping triples, and subsystems
//! of p-power index and of index prime to p.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fusion::{conjugate_map, generate_homs, AutGroup, FusionSystem};
use crate::group::{is_p_power, Group, Subset};
use crate::pgroup::{
    bits, compose, dom, image_of, img, invert, is_identity_on, popcount, restrict, Map, Mask,
    UNDEF,
};

/// Which of two equally valid choices to take whenever a construction picks a morphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Choice {
    #[default]
    First,
    Last,
}

fn pick<'a, T>(mut it: impl Iterator<Item = &'a T>, c: Choice) -> Option<&'a T> {
    match c {
        Choice::First => it.next(),
        Choice::Last => it.last(),
    }
}

fn o_upper_maps(f: &FusionSystem, pid: usize, pprime: bool) -> Result<Vec<Map>> {
    let a = f.aut_group(pid)?;
    let all = a.group.all();
    let o = if pprime {
        a.group.o_upper_pprime_of(&all, f.p())
    } else {
        a.group.o_upper_p_of(&all, f.p())
    };
    Ok(a.maps_of(&o))
}

/// `⟨g^{-1} α(g) : g ∈ P ≤ S, α ∈ O^p(Aut_F(P))⟩`.
pub fn hyperfocal_subgroup(f: &FusionSystem) -> Result<Mask> {
    let s = f.s();
    let mut gens: Mask = 1;
    for pid in 0..s.num_subgroups() {
        for a in o_upper_maps(f, pid, false)? {
            for g in bits(s.sub(pid)) {
                gens |= 1 << s.mul(s.inv(g), a[g] as usize);
            }
        }
    }
    let h = s.closure_mask(gens);
    if !s.is_normal(h, s.full()) {
        return Err(Error::Invariant("hyperfocal subgroup is not normal".into()));
    }
    Ok(h)
}

/// `⟨x^{-1} φ(x) : φ ∈ Hom_F(⟨x⟩, S)⟩`.
pub fn focal_subgroup(f: &FusionSystem) -> Mask {
    let s = f.s();
    let mut gens: Mask = 1;
    for x in 0..s.order() {
        let cid = s.sub_id(s.closure(&[x]));
        for phi in f.homs(cid) {
            gens |= 1 << s.mul(s.inv(x), phi[x] as usize);
        }
    }
    s.closure_mask(gens)
}

/// The restrictive category generated by `O^p(Aut_F(P))` for all `P`.
/// It contains all inclusions but need not contain `Inn(S)`.
pub fn op_star(f: &FusionSystem) -> Result<FusionSystem> {
    star(f, false)
}

/// The restrictive category generated by `O^{p'}(Aut_F(P))` for all `P`; a fusion system.
pub fn opp_star(f: &FusionSystem) -> Result<FusionSystem> {
    star(f, true)
}

fn star(f: &FusionSystem, pprime: bool) -> Result<FusionSystem> {
    let mut seeds = Vec::new();
    for pid in 0..f.s().num_subgroups() {
        seeds.extend(o_upper_maps(f, pid, pprime)?);
    }
    Ok(FusionSystem::generate(f.s_arc(), &seeds, false))
}

/// `α φ α^{-1}` lies in `cat` for every `α ∈ Aut_F(S)` and `φ ∈ cat`.
pub fn normalized_by_aut_s(cat: &FusionSystem, f: &FusionSystem) -> bool {
    let n = f.s().order();
    let auts = f.aut(f.s().full_id());
    cat.all_homs()
        .iter()
        .flatten()
        .all(|h| auts.iter().all(|a| cat.contains(&conjugate_map(a, h, n))))
}

/// For every `φ ∈ Hom_F(P, S)`, some `α ∈ Aut_F(S)` with `φ = φ' ∘ α|_P` and `φ' ∈ cat`.
pub fn factorization(cat: &FusionSystem, f: &FusionSystem, phi: &[u8]) -> Option<Map> {
    let s = f.s();
    let p = dom(phi);
    for a in f.iso(s.full_id(), s.full_id()) {
        let ainv = restrict(&invert(a), image_of(a, p));
        if cat.contains(&compose(phi, &ainv)) {
            return Some(a.clone());
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationReport {
    pub op_normalized: bool,
    pub opp_normalized: bool,
    pub op_generates: bool,
    pub opp_generates: bool,
    pub op_factorizes: bool,
    pub opp_factorizes: bool,
}

impl GenerationReport {
    pub fn is_ok(&self) -> bool {
        self.op_normalized
            && self.opp_normalized
            && self.op_generates
            && self.opp_generates
            && self.op_factorizes
            && self.opp_factorizes
    }
}

/// Both star categories are normalized by `Aut_F(S)`, generate `F` together with it, and give factorizations of every morphism.
pub fn generation_check(f: &FusionSystem) -> Result<GenerationReport> {
    let op = op_star(f)?;
    let opp = opp_star(f)?;
    let auts = f.aut(f.s().full_id());
    let gen_with = |cat: &FusionSystem| {
        let mut seeds: Vec<Map> = cat.all_homs().iter().flatten().cloned().collect();
        seeds.extend(auts.iter().cloned());
        generate_homs(f.s(), &seeds, false) == f.all_homs()
    };
    let fact = |cat: &FusionSystem| {
        f.all_homs().iter().flatten().all(|h| factorization(cat, f, h).is_some())
    };
    Ok(GenerationReport {
        op_normalized: normalized_by_aut_s(&op, f),
        opp_normalized: normalized_by_aut_s(&opp, f),
        op_generates: gen_with(&op),
        opp_generates: gen_with(&opp),
        op_factorizes: fact(&op),
        opp_factorizes: fact(&opp),
    })
}

/// A fusion mapping triple: `θ: S → Γ` and `Θ` from morphisms out of the object set to subsets of `Γ`.
#[derive(Clone, Debug)]
pub struct Triple {
    pub gamma: Group,
    /// `theta[x]` is the image of `x ∈ S`.
    pub theta: Vec<usize>,
    /// Subgroup ids on which `Θ` is defined.
    pub objects: Vec<usize>,
    pub values: HashMap<Map, Subset>,
}

impl Triple {
    pub fn value(&self, phi: &[u8]) -> Option<&Subset> {
        self.values.get(phi)
    }
    fn theta_set(&self, m: Mask) -> Subset {
        self.gamma.set_of(bits(m).map(|x| self.theta[x]))
    }
    fn left(&self, x: usize, set: &Subset) -> Subset {
        self.gamma.set_of(set.ones().map(|y| self.gamma.mul(x, y)))
    }
    fn right(&self, set: &Subset, x: usize) -> Subset {
        self.gamma.set_of(set.ones().map(|y| self.gamma.mul(y, x)))
    }
    fn product(&self, a: &Subset, b: &Subset) -> Subset {
        let mut out = self.gamma.empty_set();
        for x in a.ones() {
            out.union_with(&self.left(x, b));
        }
        out
    }
}

fn triple_err(msg: String) -> Error {
    Error::Invariant(format!("fusion mapping triple: {msg}"))
}

/// Exhaustive check of the triple conditions and their listed consequences on morphisms between objects.
pub fn check_triple(f: &FusionSystem, t: &Triple) -> Result<()> {
    let s = f.s();
    let gm = &t.gamma;
    let objs: Vec<usize> = t.objects.clone();
    let is_obj: Vec<bool> = {
        let mut v = vec![false; s.num_subgroups()];
        for &o in &objs {
            v[o] = true;
        }
        v
    };
    for x in 0..s.order() {
        for y in 0..s.order() {
            if t.theta[s.mul(x, y)] != gm.mul(t.theta[x], t.theta[y]) {
                return Err(triple_err("theta is not a homomorphism".into()));
            }
        }
    }
    for &pid in &objs {
        let pm = s.sub(pid);
        for phi in f.homs(pid) {
            let v = t.value(phi).ok_or_else(|| triple_err(format!("no value on {phi:?}")))?;
            if v.count_ones(..) == 0 {
                return Err(triple_err("empty value".into()));
            }
            // (iv)
            for x in v.ones() {
                for g in bits(pm) {
                    let lhs = gm.mul(gm.mul(x, t.theta[g]), gm.inv(x));
                    if lhs != t.theta[phi[g] as usize] {
                        return Err(triple_err(format!("(iv) fails on {phi:?}")));
                    }
                }
            }
            // (i) and (vi): every ψ defined on an object containing the image.
            let q = img(phi);
            for (rid, &r) in s.subgroups().iter().enumerate() {
                if r & q != q || !is_obj[rid] {
                    continue;
                }
                for psi in f.homs(rid) {
                    let comp = compose(psi, phi);
                    let c = t.value(&comp).ok_or_else(|| triple_err("missing composite".into()))?;
                    let pv = t.value(psi).unwrap();
                    for x in pv.ones() {
                        if &t.left(x, v) != c {
                            return Err(triple_err(format!("(i) fails on {psi:?} after {phi:?}")));
                        }
                    }
                    for x in v.ones() {
                        let r = t.right(pv, x);
                        let mut inter = r.clone();
                        inter.intersect_with(c);
                        if inter != r || (r != *c && q == s.sub(rid)) {
                            return Err(triple_err(format!("(vi) fails on {psi:?} after {phi:?}")));
                        }
                    }
                }
            }
        }
        // (ii), (iii), (v)
        let id = t.value(&s.identity_map(pm)).unwrap();
        if f.is_fully_centralized(pid) && *id != t.theta_set(s.centralizer(pm)) {
            return Err(triple_err(format!("(ii) fails on subgroup {pid}")));
        }
        if !gm.is_subgroup(id) {
            return Err(triple_err(format!("(v) identity value not a subgroup on {pid}")));
        }
        for g in bits(s.transporter(pm, s.full())) {
            if !t.value(&s.conj_map(g, pm)).unwrap().contains(t.theta[g]) {
                return Err(triple_err(format!("(iii) fails for c_{g} on {pid}")));
            }
        }
        let auts = f.aut(pid);
        for a in &auts {
            for b in &auts {
                let ab = t.value(&compose(a, b)).unwrap();
                if *ab != t.product(t.value(a).unwrap(), t.value(b).unwrap()) {
                    return Err(triple_err(format!("(v) not multiplicative on {pid}")));
                }
            }
        }
        // (vii): Θ(c_g ∘ φ ∘ c_h) = θ(g) Θ(φ) θ(h)
        let mut gs = s.gens_of(s.full());
        gs.push(0);
        for phi in f.homs(pid).iter().take(4) {
            let q = img(phi);
            for h in bits(s.normalizer(pm)) {
                for &g in &gs {
                    let m = compose(&s.conj_map(g, q), &compose(phi, &s.conj_map(h, pm)));
                    let want = t.left(t.theta[g], &t.right(t.value(phi).unwrap(), t.theta[h]));
                    if *t.value(&m).unwrap() != want {
                        return Err(triple_err(format!("(vii) fails on {phi:?}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Lemma-style morphism: `α ∈ Hom_F(N_S(P), S)` with `α(P) = target`.
pub fn n_to_n(f: &FusionSystem, pid: usize, target: usize, c: Choice) -> Result<Map> {
    let s = f.s();
    let pm = s.sub(pid);
    let tm = s.sub(target);
    let nid = s.sub_id(s.normalizer(pm));
    pick(f.homs(nid).iter().filter(|a| image_of(a, pm) == tm), c)
        .cloned()
        .ok_or_else(|| Error::Invariant(format!("no N_S-extension carrying {pid} to {target}")))
}

/// Quasicentric classes, largest subgroups first, each with its canonical fully normalized representative.
pub(crate) fn classes_downward(f: &FusionSystem, objs: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let mut reps: Vec<usize> = objs.iter().map(|&o| f.class_rep(o)).collect();
    reps.sort();
    reps.dedup();
    let mut out: Vec<(usize, Vec<usize>)> = reps
        .into_iter()
        .map(|r| {
            let members = f.class_members(r);
            let fnr = *members.iter().find(|&&m| f.is_fully_normalized(m)).unwrap();
            (fnr, members)
        })
        .collect();
    out.sort_by_key(|(r, _)| (std::cmp::Reverse(f.s().sub_order(*r)), *r));
    out
}

/// Extend `Θ` to every morphism out of the class of `rep`, given `Θ_P` on `Aut_F(rep)`.
fn extend_class(
    f: &FusionSystem,
    t: &mut Triple,
    rep: usize,
    members: &[usize],
    theta_rep: &HashMap<Map, Subset>,
    c: Choice,
) -> Result<()> {
    let s = f.s();
    let pr = s.sub(rep);
    let mut chosen: HashMap<usize, (Map, usize)> = HashMap::new();
    for &m in members {
        let mm = s.sub(m);
        if m == rep {
            chosen.insert(m, (s.identity_map(pr), t.gamma.identity()));
            continue;
        }
        let bar = n_to_n(f, m, rep, c)?;
        let v = t.value(&bar).ok_or_else(|| {
            triple_err(format!("normalizer of subgroup {m} has no value yet"))
        })?;
        let x = match c {
            Choice::First => v.ones().next().unwrap(),
            Choice::Last => v.ones().last().unwrap(),
        };
        chosen.insert(m, (restrict(&bar, mm), x));
    }
    for &m in members {
        let (b1, x1) = chosen[&m].clone();
        let b1inv = invert(&b1);
        for phi in f.homs(m) {
            let q = s.sub_id(img(phi));
            let (b2, x2) = &chosen[&q];
            let psi = compose(b2, &compose(phi, &b1inv));
            let base = theta_rep
                .get(&psi)
                .ok_or_else(|| triple_err(format!("no value on automorphism {psi:?}")))?;
            let v = t.left(t.gamma.inv(*x2), &t.right(base, x1));
            t.values.insert(phi.clone(), v);
        }
    }
    Ok(())
}

/// `Γ_p(F) = S/hyp_F(S)` with the projection.
pub fn gamma_p(f: &FusionSystem) -> Result<(Group, Vec<usize>)> {
    let s = f.s();
    let hyp = hyperfocal_subgroup(f)?;
    let mut set = s.group().empty_set();
    for x in bits(hyp) {
        set.insert(x);
    }
    Ok(s.group().quotient(&set))
}

/// The fusion mapping triple `(S/hyp, θ, Θ)` on `F^q`.
pub fn build_triple_p_power(f: &FusionSystem, c: Choice) -> Result<Triple> {
    let s = f.s();
    let (gamma, theta) = gamma_p(f)?;
    let objects = f.quasicentric_ids();
    let mut t = Triple { gamma, theta, objects: objects.clone(), values: HashMap::new() };
    for (rep, members) in classes_downward(f, &objects) {
        let pm = s.sub(rep);
        let a = f.aut_group(rep)?;
        let o = a.group.o_upper_p_of(&a.group.all(), f.p());
        let cs = t.theta_set(s.centralizer(pm));
        let conj: Vec<(usize, usize)> = bits(s.normalizer(pm))
            .map(|g| (g, a.index_of(&s.conj_map(g, pm)).expect("Aut_S ≤ Aut_F")))
            .collect();
        let mut theta_rep: HashMap<Map, Subset> = HashMap::new();
        for ai in 0..a.order() {
            let mut val: Option<Subset> = None;
            for &(g, ci) in &conj {
                // α = β ∘ c_g with β ∈ O^p(Aut_F(P))
                let beta = a.group.mul(ai, a.group.inv(ci));
                if !o.contains(beta) {
                    continue;
                }
                let v = t.left(t.theta[g], &cs);
                match &val {
                    None => val = Some(v),
                    Some(w) if *w != v => {
                        return Err(triple_err(format!("Θ_P not well defined on subgroup {rep}")))
                    }
                    _ => {}
                }
            }
            let v = val.ok_or_else(|| triple_err("Aut_F(P) ≠ O^p(Aut_F(P)) Aut_S(P)".into()))?;
            theta_rep.insert(a.map(ai).clone(), v);
        }
        extend_class(f, &mut t, rep, &members, &theta_rep, c)?;
    }
    check_triple(f, &t)?;
    Ok(t)
}

/// Extend a triple given on the centric morphisms to all quasicentric ones.
pub fn extend_triple_quasicentric(f: &FusionSystem, base: &Triple, c: Choice) -> Result<Triple> {
    let s = f.s();
    let centric = f.centric_ids();
    let objects = f.quasicentric_ids();
    let mut t = Triple {
        gamma: base.gamma.clone(),
        theta: base.theta.clone(),
        objects: objects.clone(),
        values: HashMap::new(),
    };
    for &pid in &centric {
        for phi in f.homs(pid) {
            let v = base.value(phi).ok_or_else(|| triple_err("input not defined on F^c".into()))?;
            t.values.insert(phi.clone(), v.clone());
        }
    }
    let extra: Vec<usize> = objects.iter().copied().filter(|o| !centric.contains(o)).collect();
    for (rep, members) in classes_downward(f, &extra) {
        let pm = s.sub(rep);
        let pgens = s.gens_of(pm);
        let pc = s.join(pm, s.centralizer(pm));
        let pcid = s.sub_id(pc);
        let cs = t.theta_set(s.centralizer(pm));
        let mut theta_rep = HashMap::new();
        for a in f.aut(rep) {
            let mut val: Option<Subset> = None;
            for ext in f.homs(pcid) {
                if !pgens.iter().all(|&x| ext[x] == a[x]) {
                    continue;
                }
                let v = t.product(t.value(ext).unwrap(), &cs);
                match &val {
                    None => val = Some(v),
                    Some(w) if *w != v => {
                        return Err(triple_err(format!("extension dependence on subgroup {rep}")))
                    }
                    _ => {}
                }
            }
            let v = val.ok_or_else(|| triple_err("automorphism does not extend to PC_S(P)".into()))?;
            theta_rep.insert(a, v);
        }
        extend_class(f, &mut t, rep, &members, &theta_rep, c)?;
    }
    check_triple(f, &t)?;
    Ok(t)
}

/// A saturated subsystem over a subgroup `T` of `S`, as a system over its own copy of `T`.
#[derive(Clone, Debug)]
pub struct Subsystem {
    pub t: Mask,
    pub system: FusionSystem,
    /// `emb[i]` is the element of `S` corresponding to element `i` of `T`.
    pub emb: Vec<u8>,
}

impl Subsystem {
    /// Morphism maps of the subsystem written over `S`.
    pub fn homs_in_s(&self, n: usize) -> Vec<Map> {
        self.system
            .all_homs()
            .iter()
            .flatten()
            .map(|h| {
                let mut m = vec![UNDEF; n];
                for (x, &y) in h.iter().enumerate() {
                    if y != UNDEF {
                        m[self.emb[x] as usize] = self.emb[y as usize];
                    }
                }
                m
            })
            .collect()
    }
}

fn to_sub(back: &[u8], h: &[u8], nt: usize) -> Map {
    let mut m = vec![UNDEF; nt];
    for (x, &y) in h.iter().enumerate() {
        if y != UNDEF {
            m[back[x] as usize] = back[y as usize];
        }
    }
    m
}

fn back_map(emb: &[u8], n: usize) -> Vec<u8> {
    let mut back = vec![UNDEF; n];
    for (i, &x) in emb.iter().enumerate() {
        back[x as usize] = i as u8;
    }
    back
}

/// `F_T` for `hyp ≤ T ≤ S`: morphisms between quasicentric subgroups of `T` whose value meets `T/hyp`, closed under composition and restriction.
pub fn subsystem_p_power_index(f: &FusionSystem, triple: &Triple, t: Mask) -> Result<Subsystem> {
    let s = f.s();
    let hyp = hyperfocal_subgroup(f)?;
    if !s.is_subgroup(t) || t & hyp != hyp {
        return Err(Error::Domain("T must be a subgroup containing the hyperfocal subgroup".into()));
    }
    let tset = triple.theta_set(t);
    let (tg, emb) = s.subgroup_pgroup(t);
    let back = back_map(&emb, s.order());
    let mut seeds = Vec::new();
    for &pid in &triple.objects {
        if s.sub(pid) & t != s.sub(pid) {
            continue;
        }
        for phi in f.homs(pid) {
            if img(phi) & t != img(phi) {
                continue;
            }
            let mut meet = triple.value(phi).unwrap().clone();
            meet.intersect_with(&tset);
            if meet.count_ones(..) > 0 {
                seeds.push(to_sub(&back, phi, tg.order()));
            }
        }
    }
    let tg = Arc::new(tg);
    let sys = FusionSystem::generate(tg, &seeds, false);
    if !sys.check_axioms().is_empty() {
        return Err(Error::Invariant("F_T does not contain Hom_T".into()));
    }
    Ok(Subsystem { t, system: sys, emb })
}

/// `Aut_F(S)`, the subgroup `Aut^0` (preimage of `Out^0_F(S)`) and the quotient `Γ_{p'}(F)`.
#[derive(Clone, Debug)]
pub struct PPrimeQuotient {
    pub aut: AutGroup,
    pub aut0: Subset,
    pub gamma: Group,
    /// Projection from `aut` indices to `gamma`.
    pub proj: Vec<usize>,
}

pub fn gamma_pprime(f: &FusionSystem) -> Result<PPrimeQuotient> {
    let s = f.s();
    let full = s.full_id();
    let aut = f.aut_group(full)?;
    let opp = opp_star(f)?;
    let centric: Vec<Mask> = f.centric_ids().into_iter().map(|i| s.sub(i)).collect();
    let mut gens: Vec<usize> = bits(s.full())
        .map(|g| aut.index_of(&s.conj_map(g, s.full())).unwrap())
        .collect();
    for i in 0..aut.order() {
        let a = aut.map(i);
        if centric.iter().any(|&p| opp.contains(&restrict(a, p))) {
            gens.push(i);
        }
    }
    let aut0 = aut.group.closure(&gens);
    if !aut.group.is_normal_in(&aut.group.all(), &aut0) {
        return Err(Error::Invariant("Out^0 is not normal in Out_F(S)".into()));
    }
    let (gamma, proj) = aut.group.quotient(&aut0);
    Ok(PPrimeQuotient { aut, aut0, gamma, proj })
}

/// `θ̂` on centric morphisms, valued in `Γ_{p'}(F)`.
#[derive(Clone, Debug)]
pub struct ThetaHat {
    pub quotient: PPrimeQuotient,
    pub values: HashMap<Map, usize>,
}

pub fn theta_hat(f: &FusionSystem) -> Result<ThetaHat> {
    let s = f.s();
    let q = gamma_pprime(f)?;
    let opp = opp_star(f)?;
    let mut values = HashMap::new();
    for pid in f.centric_ids() {
        let p = s.sub(pid);
        for phi in f.homs(pid) {
            let mut val: Option<usize> = None;
            for i in 0..q.aut.order() {
                let a = q.aut.map(i);
                let ainv = restrict(&invert(a), image_of(a, p));
                if !opp.contains(&compose(phi, &ainv)) {
                    continue;
                }
                let v = q.proj[i];
                match val {
                    None => val = Some(v),
                    Some(w) if w != v => {
                        return Err(Error::Invariant(format!(
                            "θ̂ depends on the factorization of {phi:?}"
                        )))
                    }
                    _ => {}
                }
            }
            let v = val.ok_or_else(|| Error::Invariant(format!("{phi:?} does not factor")))?;
            values.insert(phi.clone(), v);
        }
    }
    let th = ThetaHat { quotient: q, values };
    th.check(f)?;
    Ok(th)
}

impl ThetaHat {
    fn check(&self, f: &FusionSystem) -> Result<()> {
        let s = f.s();
        let g = &self.quotient.gamma;
        for (phi, &v) in &self.values {
            let q = img(phi);
            if is_identity_on(phi, dom(phi)) && v != g.identity() {
                return Err(Error::Invariant("θ̂ does not send inclusions to 1".into()));
            }
            for psi in f.homs(s.sub_id(q)) {
                let comp = compose(psi, phi);
                if self.values[&comp] != g.mul(self.values[psi], v) {
                    return Err(Error::Invariant("θ̂ is not a functor".into()));
                }
            }
        }
        for i in 0..self.quotient.aut.order() {
            if self.values[self.quotient.aut.map(i)] != self.quotient.proj[i] {
                return Err(Error::Invariant("θ̂ differs from the projection on Aut_F(S)".into()));
            }
        }
        Ok(())
    }

    /// The triple `(Γ_{p'}, 1, {θ̂})` on `F^c`.
    pub fn triple(&self, f: &FusionSystem) -> Triple {
        let g = self.quotient.gamma.clone();
        let values = self.values.iter().map(|(m, &v)| (m.clone(), g.set_of([v]))).collect();
        Triple { theta: vec![g.identity(); f.s().order()], gamma: g, objects: f.centric_ids(), values }
    }
}

/// `F_H`: generated by centric morphisms with `θ̂ ∈ H`.
pub fn subsystem_prime_index(f: &FusionSystem, th: &ThetaHat, h: &Subset) -> Result<FusionSystem> {
    let g = &th.quotient.gamma;
    if !g.is_subgroup(h) {
        return Err(Error::Domain("H is not a subgroup of Γ_{p'}".into()));
    }
    let seeds: Vec<Map> =
        th.values.iter().filter(|(_, &v)| h.contains(v)).map(|(m, _)| m.clone()).collect();
    Ok(FusionSystem::generate(f.s_arc(), &seeds, true))
}

/// Fusion-preserving automorphisms of `S` (requires `|S| ≤ 16`) and `Out_fus = Aut_fus/Aut_F(S)`.
#[derive(Clone, Debug)]
pub struct AutFus {
    pub aut: AutGroup,
    pub aut_f: Subset,
    pub out: Group,
    pub proj: Vec<usize>,
}

pub fn aut_fus(f: &FusionSystem) -> Result<AutFus> {
    let s = f.s();
    if s.order() > 16 {
        return Err(Error::Unsupported(format!("Aut(S) enumeration needs |S| ≤ 16, got {}", s.order())));
    }
    let n = s.order();
    let all = s.automorphisms()?;
    let fus: Vec<Map> = all
        .into_iter()
        .filter(|a| f.all_homs().iter().flatten().all(|h| f.contains(&conjugate_map(a, h, n))))
        .collect();
    let aut = AutGroup::new(n, s.full(), &fus)?;
    let aut_f = aut.set_of_maps(&f.aut(s.full_id()));
    let (out, proj) = aut.group.quotient(&aut_f);
    Ok(AutFus { aut, aut_f, out, proj })
}

#[derive(Clone, Debug)]
pub struct PPrimeExtension {
    pub system: FusionSystem,
    /// The subgroup `H ≤ Γ_{p'}(F.π)` with `F = F_H`.
    pub recovered_by: Subset,
}

/// `F.π` for automorphisms whose image in `Out_fus(S, F)` has order prime to `p`.
pub fn extend_by_pprime(f: &FusionSystem, pi: &[Map]) -> Result<PPrimeExtension> {
    let af = aut_fus(f)?;
    let mut ids = Vec::new();
    for a in pi {
        ids.push(
            af.aut
                .index_of(a)
                .ok_or_else(|| Error::Domain("automorphism is not fusion preserving".into()))?,
        );
    }
    let imgs: Vec<usize> = ids.iter().map(|&i| af.proj[i]).collect();
    let sub = af.out.closure(&imgs);
    if sub.count_ones(..) % f.p() == 0 {
        return Err(Error::Domain("π does not have order prime to p".into()));
    }
    let mut seeds: Vec<Map> = f.all_homs().iter().flatten().cloned().collect();
    seeds.extend(pi.iter().cloned());
    let ext = FusionSystem::generate(f.s_arc(), &seeds, true);
    if !ext.is_saturated() {
        return Err(Error::Invariant("F.π is not saturated".into()));
    }
    let th = theta_hat(&ext)?;
    let g = &th.quotient.gamma;
    for h in g.intermediate_subgroups(&g.trivial(), &g.all()) {
        if subsystem_prime_index(&ext, &th, &h)? == *f {
            return Ok(PPrimeExtension { system: ext, recovered_by: h });
        }
    }
    Err(Error::Invariant("F is not a subsystem of index prime to p in F.π".into()))
}

/// Automorphisms of `S` generating a subgroup of `Out_fus(S, F)` of the given order prime to `p`.
pub fn pprime_outer_subgroup(f: &FusionSystem, order: usize) -> Result<Vec<Map>> {
    let af = aut_fus(f)?;
    for x in 0..af.aut.order() {
        let o = af.out.closure(&[af.proj[x]]);
        if o.count_ones(..) == order && order % f.p() != 0 {
            return Ok(vec![af.aut.map(x).clone()]);
        }
    }
    Err(Error::Domain(format!("no cyclic subgroup of order {order} in Out_fus")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    PPower,
    PrimeToP,
}

#[derive(Clone, Debug)]
pub struct LatticeEntry {
    /// `T` for the p-power kind; `S` otherwise.
    pub t: Mask,
    /// Order of the corresponding subgroup of `Γ_p(F)` or `Γ_{p'}(F)`.
    pub quotient_order: usize,
    pub subsystem: Subsystem,
    pub saturated: bool,
}

#[derive(Clone, Debug)]
pub struct SubsystemLattice {
    pub kind: Kind,
    pub gamma_order: usize,
    pub entries: Vec<LatticeEntry>,
    /// Result of brute-force enumeration when `|S| ≤ 16`: whether it found exactly the entries.
    pub bijective: Option<bool>,
}

pub fn enumerate_subsystem_lattice(
    f: &FusionSystem,
    kind: Kind,
    brute_force: bool,
) -> Result<SubsystemLattice> {
    let s = f.s();
    let mut entries = Vec::new();
    let gamma_order;
    match kind {
        Kind::PPower => {
            let triple = build_triple_p_power(f, Choice::First)?;
            gamma_order = triple.gamma.order();
            let hyp = hyperfocal_subgroup(f)?;
            for &t in s.subgroups() {
                if t & hyp != hyp {
                    continue;
                }
                let sub = subsystem_p_power_index(f, &triple, t)?;
                entries.push(LatticeEntry {
                    t,
                    quotient_order: popcount(t) / popcount(hyp),
                    saturated: sub.system.is_saturated(),
                    subsystem: sub,
                });
            }
        }
        Kind::PrimeToP => {
            let th = theta_hat(f)?;
            let g = &th.quotient.gamma;
            gamma_order = g.order();
            for h in g.intermediate_subgroups(&g.trivial(), &g.all()) {
                let sys = subsystem_prime_index(f, &th, &h)?;
                entries.push(LatticeEntry {
                    t: s.full(),
                    quotient_order: h.count_ones(..),
                    saturated: sys.is_saturated(),
                    subsystem: Subsystem {
                        t: s.full(),
                        system: sys,
                        emb: (0..s.order() as u8).collect(),
                    },
                });
            }
        }
    }
    let bijective = if brute_force && s.order() <= 16 {
        let found = brute_force_subsystems(f, kind)?;
        let mut ok = found.len() == entries.len();
        for e in &entries {
            ok &= found.iter().filter(|(t, sys)| *t == e.t && *sys == e.subsystem.system).count() == 1;
        }
        Some(ok)
    } else {
        None
    };
    Ok(SubsystemLattice { kind, gamma_order, entries, bijective })
}

/// Every saturated subsystem of the given kind, found by choosing an automizer
/// for each `T`-class of subgroups of `T` between the forced lower bound and
/// `Aut_F(Q)`, generating, and filtering. Requires `|S| ≤ 16`.
pub fn brute_force_subsystems(f: &FusionSystem, kind: Kind) -> Result<Vec<(Mask, FusionSystem)>> {
    let s = f.s();
    if s.order() > 16 {
        return Err(Error::Unsupported("brute-force subsystem search needs |S| ≤ 16".into()));
    }
    let hyp = hyperfocal_subgroup(f)?;
    let targets: Vec<Mask> = match kind {
        Kind::PPower => s.subgroups().iter().copied().filter(|&t| t & hyp == hyp).collect(),
        Kind::PrimeToP => vec![s.full()],
    };
    let lower_of = |pid: usize| -> Result<Vec<Map>> {
        o_upper_maps(f, pid, kind == Kind::PrimeToP)
    };
    let mut out: Vec<(Mask, FusionSystem)> = Vec::new();
    for t in targets {
        let (tg, emb) = s.subgroup_pgroup(t);
        let back = back_map(&emb, s.order());
        let tg = Arc::new(tg);
        // T-class representatives of subgroups of T, with their candidate automizers (as maps over T).
        let mut seen: Vec<Mask> = Vec::new();
        let mut choices: Vec<Vec<Vec<Map>>> = Vec::new();
        for (qid, &q) in s.subgroups().iter().enumerate() {
            if q & t != q || seen.contains(&q) {
                continue;
            }
            for g in bits(t) {
                seen.push(s.conj_mask(g, q));
            }
            let a = f.aut_group(qid)?;
            let mut lower: Vec<usize> = lower_of(qid)?.iter().map(|m| a.index_of(m).unwrap()).collect();
            lower.extend(bits(s.normalizer(q) & t).map(|g| a.index_of(&s.conj_map(g, q)).unwrap()));
            let lo = a.group.closure(&lower);
            let cands: Vec<Vec<Map>> = a
                .group
                .intermediate_subgroups(&lo, &a.group.all())
                .iter()
                .map(|h| a.maps_of(h).iter().map(|m| to_sub(&back, m, tg.order())).collect())
                .collect();
            choices.push(cands);
        }
        let total: usize = choices.iter().map(|c| c.len()).product();
        if total > 100_000 {
            return Err(Error::Unsupported(format!("{total} automizer choices")));
        }
        let mut found: Vec<FusionSystem> = Vec::new();
        let mut idx = vec![0usize; choices.len()];
        'outer: loop {
            let seeds: Vec<Map> =
                idx.iter().zip(&choices).flat_map(|(&i, c)| c[i].iter().cloned()).collect();
            let e = FusionSystem::generate(tg.clone(), &seeds, true);
            let sub_ok = e.all_homs().iter().flatten().all(|h| {
                let mut m = vec![UNDEF; s.order()];
                for (x, &y) in h.iter().enumerate() {
                    if y != UNDEF {
                        m[emb[x] as usize] = emb[y as usize];
                    }
                }
                f.contains(&m)
            });
            if sub_ok && !found.contains(&e) && kind_condition(f, &e, &emb, kind)? && e.is_saturated()
            {
                found.push(e);
            }
            let mut j = 0;
            loop {
                if j == idx.len() {
                    break 'outer;
                }
                idx[j] += 1;
                if idx[j] < choices[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
        out.extend(found.into_iter().map(|e| (t, e)));
    }
    Ok(out)
}

/// `Aut_E(Q) ≥ O^p(Aut_F(Q))` (or `O^{p'}`) for every `Q ≤ T`.
fn kind_condition(f: &FusionSystem, e: &FusionSystem, emb: &[u8], kind: Kind) -> Result<bool> {
    let s = f.s();
    let back = back_map(emb, s.order());
    let t_mask = bits(e.s().full()).fold(0u64, |m, x| m | 1 << emb[x]);
    for (qid, &q) in s.subgroups().iter().enumerate() {
        if q & t_mask != q {
            continue;
        }
        let qt = bits(q).fold(0u64, |m, x| m | 1 << back[x]);
        let have: Vec<Map> = e.aut(e.s().sub_id(qt));
        for m in o_upper_maps(f, qid, kind == Kind::PrimeToP)? {
            if !have.contains(&to_sub(&back, &m, e.s().order())) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `|Γ|` is a power of `p` or prime to `p`, matching the kind.
pub fn gamma_has_kind(g: &Group, p: usize, kind: Kind) -> bool {
    match kind {
        Kind::PPower => is_p_power(g.order(), p),
        Kind::PrimeToP => g.order() % p != 0,
    }
}
