//! Extending a linking system over `S₀ ⊴ S` by an action of the p-group `S`.
//!
//! Morphisms of the intermediate category are classes `[[g, φ]]` with
//! `(g g₀, φ) ~ (g, g₀φ)`; each is stored in the normal form `(r, φ)` where
//! `r` is the least element of `g S₀`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fusion::{conjugate_map, FusionSystem};
use crate::group::{Group, Subset};
use crate::index::hyperfocal_subgroup;
use crate::linking::{choose_inclusions, linking_from_group, Inclusions, LinkingSystem, Objects};
use crate::pgroup::{bits, image_of, Map, Mask, PGroup, UNDEF};

/// An action of `S` on `L₀`: `act[s][t]` is the token `s t s^{-1}`.
#[derive(Clone, Debug)]
pub struct LinkingAction {
    pub s: Arc<PGroup>,
    /// Element `i` of `S₀` (the base of `L₀`) is element `s0_in_s[i]` of `S`.
    pub s0_in_s: Vec<u8>,
    pub act: Vec<Vec<usize>>,
}

/// `L^c_{S₀}(G₀)` with the conjugation action of a Sylow subgroup `S` of `G`, for `G₀ ⊴ G`.
pub fn conjugation_action(g: &Group, g0: &Subset, p: usize) -> Result<(LinkingSystem, LinkingAction)> {
    if !g.is_subgroup(g0) || !g.is_normal_in(&g.all(), g0) {
        return Err(Error::Domain("G₀ must be a normal subgroup of G".into()));
    }
    let s_set = g.sylow(p);
    let mut s0_set = s_set.clone();
    s0_set.intersect_with(g0);
    let (h, emb_h) = g.subgroup_as_group(g0);
    let mut back_h = vec![usize::MAX; g.order()];
    for (i, &x) in emb_h.iter().enumerate() {
        back_h[x] = i;
    }
    let s0_in_h = h.set_of(s0_set.ones().map(|x| back_h[x]));
    let l0 = linking_from_group(&h, &s0_in_h, p, Objects::Centric)?;
    let (s, emb_s) = PGroup::from_subgroup(g, &s_set, p)?;
    let mut back_s = vec![UNDEF; g.order()];
    for (i, &x) in emb_s.iter().enumerate() {
        back_s[x] = i as u8;
    }
    let r = l0.realization().expect("group linking system");
    let s0_in_s: Vec<u8> = r.emb.iter().map(|&x| back_s[emb_h[x]]).collect();
    let mut s_to_s0 = vec![UNDEF; s.order()];
    for (i, &x) in s0_in_s.iter().enumerate() {
        s_to_s0[x as usize] = i as u8;
    }
    let mut act = Vec::with_capacity(s.order());
    for x in 0..s.order() {
        let xg = emb_s[x];
        let conj_mask = |m: Mask| -> Mask {
            bits(m).fold(0, |acc, y| {
                let z = back_s[g.conj(xg, emb_h[r.emb[y]])];
                acc | (1 << s_to_s0[z as usize])
            })
        };
        let mut row = Vec::with_capacity(l0.num_morphisms());
        for t in 0..l0.num_morphisms() {
            let m = l0.morphism(t);
            let a = l0.object_of_mask(conj_mask(l0.object_mask(m.src))).unwrap();
            let b = l0.object_of_mask(conj_mask(l0.object_mask(m.tgt))).unwrap();
            let y = back_h[g.conj(xg, emb_h[r.reps[t]])];
            row.push(r.token(a, b, y).ok_or_else(|| Error::Invariant("conjugate token missing".into()))?);
        }
        act.push(row);
    }
    Ok((l0, LinkingAction { s: Arc::new(s), s0_in_s, act }))
}

/// A morphism of the category `L₂`: an `L₁` class `[[r, φ]]` with its projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtMorphism {
    /// Object indices into [`PGroupExtension::objects`].
    pub src: usize,
    pub tgt: usize,
    pub coset_rep: usize,
    pub token: usize,
    pub proj: Map,
}

#[derive(Clone, Debug)]
pub struct PGroupExtension {
    pub system: FusionSystem,
    /// `S₀` as a subgroup of `S`.
    pub s0: Mask,
    /// Subgroup ids (of `S`) of the objects `P` with `P ∩ S₀` an object of `L₀`.
    pub objects: Vec<usize>,
    pub morphisms: Vec<ExtMorphism>,
}

struct Ctx<'a> {
    l0: &'a LinkingSystem,
    incs: Inclusions,
    s: &'a PGroup,
    s0_in_s: &'a [u8],
    s_to_s0: Vec<u8>,
    s0: Mask,
    act: &'a [Vec<usize>],
}

impl Ctx<'_> {
    fn to_s(&self, m: Mask) -> Mask {
        bits(m).fold(0, |acc, x| acc | (1 << self.s0_in_s[x]))
    }
    fn to_s0(&self, m: Mask) -> Mask {
        bits(m).fold(0, |acc, x| acc | (1 << self.s_to_s0[x]))
    }
    fn coset_rep(&self, g: usize) -> usize {
        bits(self.s0).map(|h| self.s.mul(g, h)).min().unwrap()
    }
    /// `g₀ φ`: post-composition with `δ_{Q, g₀Qg₀^{-1}}(g₀)`, for `g₀ ∈ S₀` given as an element of `S`.
    fn left(&self, g0: usize, phi: usize) -> usize {
        let l0 = self.l0;
        let q = l0.morphism(phi).tgt;
        let qm = self.to_s(l0.object_mask(q));
        let gq = l0.object_of_mask(self.to_s0(self.s.conj_mask(g0, qm))).unwrap();
        let d = self.incs.delta_pq(q, gq, self.s_to_s0[g0] as usize).unwrap();
        l0.compose(d, phi).unwrap()
    }
    fn normalize(&self, g: usize, phi: usize) -> (usize, usize) {
        let r = self.coset_rep(g);
        let g0 = self.s.mul(self.s.inv(r), g);
        (r, self.left(g0, phi))
    }
    /// `[[g, φ]] ∘ [[h, ψ]] = [[gh, (h^{-1}φh) ∘ ψ]]`.
    fn compose(&self, (g, phi): (usize, usize), (h, psi): (usize, usize)) -> Option<(usize, usize)> {
        let conj = self.act[self.s.inv(h)][phi];
        let c = self.l0.compose(conj, psi)?;
        Some(self.normalize(self.s.mul(g, h), c))
    }
    fn target(&self, (g, phi): (usize, usize)) -> Mask {
        let q = self.to_s(self.l0.object_mask(self.l0.morphism(phi).tgt));
        self.s.conj_mask(g, q)
    }
    /// `x̂ = [[x, Id_P]]` for `x ∈ N_S(P)`.
    fn hat(&self, a: usize, x: usize) -> (usize, usize) {
        self.normalize(x, self.l0.identity(a))
    }
}

fn precondition(msg: String) -> Error {
    Error::Domain(format!("action hypothesis fails: {msg}"))
}

fn check_action(c: &Ctx, f0: &FusionSystem) -> Result<()> {
    let l0 = c.l0;
    let s = c.s;
    let n0 = l0.s().order();
    if c.act.len() != s.order() || c.act.iter().any(|r| r.len() != l0.num_morphisms()) {
        return Err(precondition("one token permutation per element of S is required".into()));
    }
    if !s.is_normal(c.s0, s.full()) {
        return Err(precondition("S₀ is not normal in S".into()));
    }
    let conj0 = |x: usize| -> Map {
        (0..n0).map(|y| c.s_to_s0[s.conj(x, c.s0_in_s[y] as usize)]).collect()
    };
    for x in 0..s.order() {
        let cx = conj0(x);
        for hs in f0.all_homs() {
            for h in hs {
                if !f0.contains(&conjugate_map(&cx, h, n0)) {
                    return Err(precondition(format!("c_{x} does not preserve F₀")));
                }
            }
        }
        let row = &c.act[x];
        for t in 0..l0.num_morphisms() {
            let m = l0.morphism(t);
            let u = l0.morphism(row[t]);
            let (pm, qm) = (l0.object_mask(m.src), l0.object_mask(m.tgt));
            if l0.object_mask(u.src) != image_of(&cx, pm) || l0.object_mask(u.tgt) != image_of(&cx, qm) {
                return Err(precondition(format!("action of {x} on token {t} has the wrong objects")));
            }
            if u.proj != conjugate_map(&cx, &m.proj, n0) {
                return Err(precondition(format!("π is not equivariant at ({x}, {t})")));
            }
            for y in 0..s.order() {
                if c.act[y][row[t]] != c.act[s.mul(y, x)][t] {
                    return Err(precondition(format!("not an action at ({y}, {x}, {t})")));
                }
            }
            for g in l0.out_of(m.tgt) {
                let h = l0.compose(g, t).unwrap();
                if l0.compose(row[g], row[t]) != Some(row[h]) {
                    return Err(precondition(format!("action of {x} is not a functor on {g} ∘ {t}")));
                }
            }
        }
        let so = l0.s_object().unwrap();
        for g in 0..n0 {
            let lhs = row[l0.delta(so, g).unwrap()];
            let rhs = l0.delta(so, cx[g] as usize).unwrap();
            if lhs != rhs {
                return Err(precondition(format!("δ_{{S₀}} is not equivariant at ({x}, {g})")));
            }
        }
        for ((a, b), t) in c.incs.inclusions() {
            let a2 = l0.object_of_mask(image_of(&cx, l0.object_mask(a))).unwrap();
            let b2 = l0.object_of_mask(image_of(&cx, l0.object_mask(b))).unwrap();
            if Some(row[t]) != c.incs.inclusion(a2, b2) {
                return Err(precondition(format!("action of {x} does not send ι_P^Q to an inclusion")));
            }
        }
        if c.s0 >> x & 1 == 1 {
            let x0 = c.s_to_s0[x] as usize;
            let xi = s.inv(x);
            for t in 0..l0.num_morphisms() {
                let m = l0.morphism(t);
                let (pm, qm) = (l0.object_mask(m.src), l0.object_mask(m.tgt));
                let gp = l0.object_of_mask(image_of(&cx, pm)).unwrap();
                let gq = l0.object_of_mask(image_of(&cx, qm)).unwrap();
                let d1 = c.incs.delta_pq(m.tgt, gq, x0).unwrap();
                let d2 = c.incs.delta_pq(gp, m.src, c.s_to_s0[xi] as usize).unwrap();
                let expect = l0.compose(d1, l0.compose(t, d2).unwrap());
                if expect != Some(row[t]) {
                    return Err(precondition(format!("action does not extend S₀-conjugation at ({x}, {t})")));
                }
            }
        }
    }
    Ok(())
}

/// Builds `L₁`, `L₂` and the fusion system `F` over `S`; verifies saturation, `hyp_F(S) ≤ S₀` and
/// `Aut_{F₀}(P) ≥ O^p(Aut_F(P))` for `P ≤ S₀`.
pub fn extend_by_p_group(l0: &LinkingSystem, action: &LinkingAction) -> Result<PGroupExtension> {
    let s = &*action.s;
    let f0 = l0.fusion();
    if l0.objects().iter().any(|&o| !f0.is_centric(o)) || l0.objects().len() != f0.centric_ids().len() {
        return Err(Error::Domain("L₀ must be a centric linking system".into()));
    }
    let incs = choose_inclusions(l0)?;
    let mut s_to_s0 = vec![UNDEF; s.order()];
    for (i, &x) in action.s0_in_s.iter().enumerate() {
        s_to_s0[x as usize] = i as u8;
    }
    let s0 = action.s0_in_s.iter().fold(0 as Mask, |acc, &x| acc | (1 << x));
    if !s.is_subgroup(s0) {
        return Err(precondition("S₀ is not a subgroup of S".into()));
    }
    let c = Ctx { l0, incs, s, s0_in_s: &action.s0_in_s, s_to_s0, s0, act: &action.act };
    check_action(&c, f0)?;

    let objects: Vec<usize> = (0..s.num_subgroups())
        .filter(|&i| l0.object_of_mask(c.to_s0(s.sub(i) & s0)).is_some())
        .collect();
    let reps: Vec<usize> = {
        let mut v: Vec<usize> = (0..s.order()).map(|g| c.coset_rep(g)).collect();
        v.sort();
        v.dedup();
        v
    };
    let mut morphisms = Vec::new();
    for (pi, &pid) in objects.iter().enumerate() {
        let pm = s.sub(pid);
        let p0 = l0.object_of_mask(c.to_s0(pm & s0)).unwrap();
        let hats: Vec<(usize, (usize, usize))> = bits(pm).map(|x| (x, c.hat(p0, x))).collect();
        for &r in &reps {
            for t in l0.out_of(p0).collect::<Vec<_>>() {
                let psi = (r, t);
                let q0m = c.target(psi);
                for (qi, &qid) in objects.iter().enumerate() {
                    let qm = s.sub(qid);
                    if qm & s0 != q0m {
                        continue;
                    }
                    let q0 = l0.object_of_mask(c.to_s0(q0m)).unwrap();
                    let mut proj = vec![UNDEF; s.order()];
                    let mut ok = true;
                    for &(x, xh) in &hats {
                        let lhs = c.compose(psi, xh);
                        let y = bits(qm).find(|&y| c.compose(c.hat(q0, y), psi) == lhs);
                        match y {
                            Some(y) => proj[x] = y as u8,
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        morphisms.push(ExtMorphism { src: pi, tgt: qi, coset_rep: r, token: t, proj });
                    }
                }
            }
        }
    }
    for m in &morphisms {
        if !s.is_injective_hom(&m.proj) {
            return Err(Error::Invariant("π on L₂ is not an injective homomorphism".into()));
        }
    }
    let seeds: Vec<Map> = morphisms.iter().map(|m| m.proj.clone()).collect();
    let system = FusionSystem::generate(action.s.clone(), &seeds, true);
    let ext = PGroupExtension { system, s0, objects, morphisms };
    verify_extension(&ext, f0, &c)?;
    Ok(ext)
}

fn verify_extension(ext: &PGroupExtension, f0: &FusionSystem, c: &Ctx) -> Result<()> {
    let f = &ext.system;
    let s = f.s();
    let report = f.check_saturation();
    if !report.is_ok() {
        return Err(Error::Invariant(format!("extension is not saturated: {report:?}")));
    }
    let hyp = hyperfocal_subgroup(f)?;
    if hyp & !ext.s0 != 0 {
        return Err(Error::Invariant("hyp_F(S) is not contained in S₀".into()));
    }
    let p = f.p();
    let n0 = f0.s().order();
    for pid in 0..s.num_subgroups() {
        let pm = s.sub(pid);
        if pm & !ext.s0 != 0 {
            continue;
        }
        let a = f.aut_group(pid)?;
        let op = a.group.o_upper_p_of(&a.group.all(), p);
        let pid0 = f0.s().sub_id(c.to_s0(pm));
        let aut0: Vec<Map> = f0.aut(pid0);
        for alpha in a.maps_of(&op) {
            let mut m = vec![UNDEF; n0];
            for x in bits(pm) {
                m[c.s_to_s0[x] as usize] = c.s_to_s0[alpha[x] as usize];
            }
            if !aut0.contains(&m) {
                return Err(Error::Invariant(format!("O^p(Aut_F(P)) ⊄ Aut_F₀(P) for subgroup {pid}")));
            }
        }
    }
    for hs in f0.all_homs() {
        for h in hs {
            let mut m = vec![UNDEF; s.order()];
            for x in 0..n0 {
                if h[x] != UNDEF {
                    m[c.s0_in_s[x] as usize] = c.s0_in_s[h[x] as usize];
                }
            }
            if !f.contains(&m) {
                return Err(Error::Invariant("F does not contain F₀".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgroup::popcount;
    use crate::presets::preset;

    #[test]
    fn trivial_action_over_s0_itself() {
        let g = preset("A4").unwrap();
        let v4 = g.o_p_of(&g.all(), 2);
        let (l0, act) = conjugation_action(&g, &g.all(), 2).unwrap();
        let e = extend_by_p_group(&l0, &act).unwrap();
        assert!(e.system.is_isomorphic(l0.fusion()).unwrap());
        assert_eq!(popcount(e.s0), v4.count_ones(..));
    }

    #[test]
    fn a4_in_s4_gives_s4() {
        let g = preset("S4").unwrap();
        let a4 = g.o_upper_p_of(&g.all(), 2);
        let (l0, act) = conjugation_action(&g, &a4, 2).unwrap();
        let e = extend_by_p_group(&l0, &act).unwrap();
        let target = FusionSystem::from_group_sylow(&g, 2).unwrap();
        assert!(e.system.is_isomorphic(&target).unwrap());
    }

    #[test]
    fn p_group_extensions_are_inner() {
        let g = preset("D8").unwrap();
        for h in g.normal_subgroups_of(&g.all()) {
            if h.count_ones(..) != 4 {
                continue;
            }
            let (l0, act) = conjugation_action(&g, &h, 2).unwrap();
            let e = extend_by_p_group(&l0, &act).unwrap();
            let minimal = FusionSystem::minimal(act.s.clone());
            assert_eq!(e.system, minimal);
        }
    }

    #[test]
    fn broken_action_is_rejected() {
        let g = preset("S4").unwrap();
        let a4 = g.o_upper_p_of(&g.all(), 2);
        let (l0, mut act) = conjugation_action(&g, &a4, 2).unwrap();
        let moved = (0..act.s.order()).find(|&x| act.act[x] != act.act[0]).unwrap();
        act.act[moved] = act.act[0].clone();
        assert!(matches!(extend_by_p_group(&l0, &act), Err(Error::Domain(_))));
    }
}
