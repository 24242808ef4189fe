//! Fusion systems over a p-group `S`, stored extensionally: for every
//! subgroup `P` the sorted set `Hom_F(P, S)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::group::{p_part, Group, Subset};
use crate::perm::Perm;
use crate::pgroup::{
    bits, compose, dom, identity_map, image_of, img, invert, is_identity_on, popcount, restrict,
    Map, Mask, PGroup, UNDEF,
};

/// Closure of `seeds` (and their inverses, and `Inn(S)` if asked) under
/// composition and restriction. Entry `i` is the morphism set out of subgroup `i`.
pub fn generate_homs(s: &PGroup, seeds: &[Map], include_inner: bool) -> Vec<Vec<Map>> {
    let n = s.order();
    let mut set: HashSet<Map> = HashSet::new();
    for m in seeds {
        set.insert(m.clone());
        set.insert(invert(m));
    }
    if include_inner {
        for g in s.gens_of(s.full()) {
            set.insert(s.conj_map(g, s.full()));
            set.insert(s.conj_map(s.inv(g), s.full()));
        }
    }
    let gens: Vec<Map> = set.into_iter().filter(|m| !is_identity_on(m, dom(m))).collect();
    let mut cache: HashMap<Mask, Vec<Map>> = HashMap::new();
    let mut out = Vec::with_capacity(s.num_subgroups());
    for &r in s.subgroups() {
        let start = identity_map(n, r);
        let mut seen: HashSet<Map> = HashSet::new();
        seen.insert(start.clone());
        let mut queue = vec![start];
        let mut i = 0;
        while i < queue.len() {
            let im = img(&queue[i]);
            let ts = cache.entry(im).or_insert_with(|| {
                let mut t: Vec<Map> = gens
                    .iter()
                    .filter(|g| dom(g) & im == im)
                    .map(|g| restrict(g, im))
                    .filter(|g| !is_identity_on(g, im))
                    .collect();
                t.sort();
                t.dedup();
                t
            });
            for t in ts.iter() {
                let next = compose(t, &queue[i]);
                if !seen.contains(&next) {
                    seen.insert(next.clone());
                    queue.push(next);
                }
            }
            i += 1;
        }
        queue.sort();
        out.push(queue);
    }
    out
}

/// `Aut_F(P)` as a permutation group on the elements of `P`.
#[derive(Clone, Debug)]
pub struct AutGroup {
    pub group: Group,
    /// `elems[i]` is the element of `S` at position `i`.
    pub elems: Vec<usize>,
    maps: Vec<Map>,
    index: HashMap<Map, usize>,
}

impl AutGroup {
    pub fn new(n: usize, p_mask: Mask, auts: &[Map]) -> Result<AutGroup> {
        let elems: Vec<usize> = bits(p_mask).collect();
        let mut pos = vec![u16::MAX; n];
        for (i, &x) in elems.iter().enumerate() {
            pos[x] = i as u16;
        }
        let perms: Vec<Perm> = auts
            .iter()
            .map(|m| elems.iter().map(|&x| pos[m[x] as usize]).collect())
            .collect();
        let group = Group::from_closed(elems.len(), perms)?;
        let maps: Vec<Map> = (0..group.order())
            .map(|i| {
                let perm = group.perm(i);
                let mut m = vec![UNDEF; n];
                for (j, &x) in elems.iter().enumerate() {
                    m[x] = elems[perm[j] as usize] as u8;
                }
                m
            })
            .collect();
        let index = maps.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Ok(AutGroup { group, elems, maps, index })
    }
    pub fn order(&self) -> usize {
        self.group.order()
    }
    pub fn map(&self, i: usize) -> &Map {
        &self.maps[i]
    }
    pub fn index_of(&self, m: &[u8]) -> Option<usize> {
        self.index.get(m).copied()
    }
    pub fn maps_of(&self, set: &Subset) -> Vec<Map> {
        set.ones().map(|i| self.maps[i].clone()).collect()
    }
    pub fn set_of_maps<'a>(&self, maps: impl IntoIterator<Item = &'a Map>) -> Subset {
        self.group.set_of(maps.into_iter().map(|m| self.index[m]))
    }
}

/// Multiplicative order of an automorphism of its domain.
pub fn map_order(m: &[u8]) -> usize {
    let d = dom(m);
    let mut cur = m.to_vec();
    let mut k = 1;
    while !is_identity_on(&cur, d) {
        cur = compose(m, &cur);
        k += 1;
    }
    k
}

fn agrees_on(a: &[u8], b: &[u8], xs: &[usize]) -> bool {
    xs.iter().all(|&x| a[x] == b[x])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    I,
    II,
    IPrime,
    IIPrime,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::I => "(I)",
            Axiom::II => "(II)",
            Axiom::IPrime => "(I')",
            Axiom::IIPrime => "(II')",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationReport {
    /// Each checked axiom with the first witness of its failure, if any.
    pub axioms: Vec<(Axiom, Option<String>)>,
}

impl SaturationReport {
    pub fn is_ok(&self) -> bool {
        self.axioms.iter().all(|(_, w)| w.is_none())
    }
    pub fn failed(&self) -> Vec<Axiom> {
        self.axioms.iter().filter(|(_, w)| w.is_some()).map(|(a, _)| *a).collect()
    }
    pub fn first_failure(&self) -> Option<(Axiom, &str)> {
        self.axioms.iter().find_map(|(a, w)| w.as_deref().map(|w| (*a, w)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotInjectiveHom { source: usize, map: Map },
    MissingConjugation { source: usize, g: usize },
    NotClosedUnderRestriction { source: usize, map: Map, to: usize },
    NotClosedUnderComposition { first: Map, second: Map },
    MissingInverse { source: usize, map: Map },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotInjectiveHom { source, map } => {
                write!(f, "map {map:?} on subgroup {source} is not an injective homomorphism")
            }
            Violation::MissingConjugation { source, g } => {
                write!(f, "Hom_S not contained in Hom_F: c_{g} on subgroup {source} missing")
            }
            Violation::NotClosedUnderRestriction { source, map, to } => {
                write!(f, "restriction of {map:?} from subgroup {source} to subgroup {to} missing")
            }
            Violation::NotClosedUnderComposition { first, second } => {
                write!(f, "composite of {second:?} after {first:?} missing")
            }
            Violation::MissingInverse { source, map } => {
                write!(f, "inverse of {map:?} on subgroup {source} missing")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupFlags {
    pub id: usize,
    pub class_id: usize,
    pub fully_centralized: bool,
    pub fully_normalized: bool,
    pub centric: bool,
    pub radical: bool,
    pub quasicentric: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlperinLetter {
    /// Subgroup id of `Q_i`.
    pub q: usize,
    /// `α_i ∈ Aut_F(Q_i)`.
    pub alpha: Map,
}

/// `φ = α_k ∘ ... ∘ α_1` restricted to the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlperinWord {
    pub source: usize,
    pub letters: Vec<AlperinLetter>,
}

impl AlperinWord {
    pub fn recompose(&self, s: &PGroup) -> Map {
        let mut psi = s.identity_map(s.sub(self.source));
        for l in &self.letters {
            psi = compose(&l.alpha, &psi);
        }
        psi
    }
}

#[derive(Clone, Debug)]
pub struct FusionSystem {
    p: usize,
    s: Arc<PGroup>,
    homs: Vec<Vec<Map>>,
    class_rep: Vec<usize>,
    saturated: OnceLock<bool>,
}

impl PartialEq for FusionSystem {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.s.order() == other.s.order()
            && (0..self.s.order()).all(|i| self.s.group().perm(i) == other.s.group().perm(i))
            && self.homs == other.homs
    }
}

impl FusionSystem {
    fn assemble(s: Arc<PGroup>, homs: Vec<Vec<Map>>) -> FusionSystem {
        let k = s.num_subgroups();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let nx = parent[y];
                parent[y] = r;
                y = nx;
            }
            r
        }
        for (i, hs) in homs.iter().enumerate() {
            for h in hs {
                let j = s.sub_id(img(h));
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi] = lo;
                }
            }
        }
        let class_rep = (0..k).map(|i| find(&mut parent, i)).collect();
        FusionSystem { p: s.p(), s, homs, class_rep, saturated: OnceLock::new() }
    }

    /// The fusion system generated by `seeds` (closed under inverses,
    /// composition and restriction), optionally together with `Inn(S)`.
    pub fn generate(s: Arc<PGroup>, seeds: &[Map], include_inner: bool) -> FusionSystem {
        let homs = generate_homs(&s, seeds, include_inner);
        FusionSystem::assemble(s, homs)
    }

    pub fn minimal(s: Arc<PGroup>) -> FusionSystem {
        FusionSystem::generate(s, &[], true)
    }

    /// Arbitrary morphism sets, validated only as injective homomorphisms defined on the right subgroup.
    pub fn from_parts(s: Arc<PGroup>, mut homs: Vec<Vec<Map>>) -> Result<FusionSystem> {
        if homs.len() != s.num_subgroups() {
            return Err(Error::Domain("one morphism list per subgroup is required".into()));
        }
        for (i, hs) in homs.iter_mut().enumerate() {
            for h in hs.iter() {
                if h.len() != s.order() || dom(h) != s.sub(i) || !s.is_injective_hom(h) {
                    return Err(Error::Domain(format!(
                        "map {h:?} is not an injective homomorphism on subgroup {i}"
                    )));
                }
            }
            hs.sort();
            hs.dedup();
        }
        Ok(FusionSystem::assemble(s, homs))
    }

    /// `F_S(G)` for a Sylow `p`-subgroup `S` of `G`; also returns the map from elements of `S` to elements of `G`.
    pub fn from_group_with_embedding(
        g: &Group,
        s: &Subset,
        p: usize,
    ) -> Result<(FusionSystem, Vec<usize>)> {
        if !g.is_subgroup(s) || s.count_ones(..) != p_part(g.order(), p) {
            return Err(Error::Domain("S is not a Sylow subgroup of G".into()));
        }
        let (pg, emb) = PGroup::from_subgroup(g, s, p)?;
        let n = pg.order();
        let mut back = vec![UNDEF; g.order()];
        for (i, &x) in emb.iter().enumerate() {
            back[x] = i as u8;
        }
        let gens: Vec<Vec<usize>> = pg.subgroups().iter().map(|&m| pg.gens_of(m)).collect();
        let mut sets: Vec<HashSet<Map>> = vec![HashSet::new(); pg.num_subgroups()];
        let mut image = vec![UNDEF; n];
        for x in 0..g.order() {
            for (i, e) in emb.iter().enumerate() {
                image[i] = back[g.conj(x, *e)];
            }
            for (k, &m) in pg.subgroups().iter().enumerate() {
                if gens[k].iter().all(|&y| image[y] != UNDEF) {
                    sets[k].insert(restrict(&image, m));
                }
            }
        }
        let homs = sets
            .into_iter()
            .map(|hs| {
                let mut v: Vec<Map> = hs.into_iter().collect();
                v.sort();
                v
            })
            .collect();
        Ok((FusionSystem::assemble(Arc::new(pg), homs), emb))
    }

    pub fn from_group(g: &Group, s: &Subset, p: usize) -> Result<FusionSystem> {
        Ok(FusionSystem::from_group_with_embedding(g, s, p)?.0)
    }

    /// `F_S(G)` with `S` the Sylow subgroup chosen by [`Group::sylow`].
    pub fn from_group_sylow(g: &Group, p: usize) -> Result<FusionSystem> {
        FusionSystem::from_group(g, &g.sylow(p), p)
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn s(&self) -> &PGroup {
        &self.s
    }
    pub fn s_arc(&self) -> Arc<PGroup> {
        self.s.clone()
    }
    pub fn all_homs(&self) -> &[Vec<Map>] {
        &self.homs
    }
    /// `Hom_F(P, S)`.
    pub fn homs(&self, pid: usize) -> &[Map] {
        &self.homs[pid]
    }
    /// `Hom_F(P, Q)`.
    pub fn hom(&self, pid: usize, qid: usize) -> impl Iterator<Item = &Map> {
        let q = self.s.sub(qid);
        self.homs[pid].iter().filter(move |h| img(h) & q == img(h))
    }
    pub fn iso(&self, pid: usize, qid: usize) -> impl Iterator<Item = &Map> {
        let q = self.s.sub(qid);
        self.homs[pid].iter().filter(move |h| img(h) == q)
    }
    pub fn aut(&self, pid: usize) -> Vec<Map> {
        self.iso(pid, pid).cloned().collect()
    }
    pub fn aut_group(&self, pid: usize) -> Result<AutGroup> {
        AutGroup::new(self.s.order(), self.s.sub(pid), &self.aut(pid))
    }
    pub fn contains(&self, m: &[u8]) -> bool {
        match self.s.try_sub_id(dom(m)) {
            Some(i) => self.homs[i].binary_search_by(|h| h.as_slice().cmp(m)).is_ok(),
            None => false,
        }
    }
    pub fn num_morphisms(&self) -> usize {
        self.homs.iter().map(|h| h.len()).sum()
    }
    /// Same `S` (element for element) and the same morphism sets.
    pub fn same_as(&self, other: &FusionSystem) -> bool {
        self == other
    }

    pub fn class_rep(&self, pid: usize) -> usize {
        self.class_rep[pid]
    }
    pub fn class_members(&self, pid: usize) -> Vec<usize> {
        let r = self.class_rep[pid];
        (0..self.s.num_subgroups()).filter(|&i| self.class_rep[i] == r).collect()
    }
    /// Class representatives in increasing order.
    pub fn class_reps(&self) -> Vec<usize> {
        (0..self.s.num_subgroups()).filter(|&i| self.class_rep[i] == i).collect()
    }

    pub fn aut_s_order(&self, pid: usize) -> usize {
        let m = self.s.sub(pid);
        popcount(self.s.normalizer(m)) / popcount(self.s.centralizer(m))
    }
    pub fn aut_s(&self, pid: usize) -> Vec<Map> {
        let m = self.s.sub(pid);
        let mut v: Vec<Map> = bits(self.s.normalizer(m)).map(|g| self.s.conj_map(g, m)).collect();
        v.sort();
        v.dedup();
        v
    }
    pub fn is_fully_centralized(&self, pid: usize) -> bool {
        let c = |i: usize| popcount(self.s.centralizer(self.s.sub(i)));
        self.class_members(pid).into_iter().all(|j| c(j) <= c(pid))
    }
    pub fn is_fully_normalized(&self, pid: usize) -> bool {
        let c = |i: usize| popcount(self.s.normalizer(self.s.sub(i)));
        self.class_members(pid).into_iter().all(|j| c(j) <= c(pid))
    }
    pub fn is_centric(&self, pid: usize) -> bool {
        self.class_members(pid).into_iter().all(|j| {
            let m = self.s.sub(j);
            self.s.centralizer(m) & m == self.s.centralizer(m)
        })
    }
    /// `O_p(Out_F(P)) = 1`, i.e. `O_p(Aut_F(P)) = Inn(P)`.
    pub fn is_radical(&self, pid: usize) -> Result<bool> {
        let a = self.aut_group(pid)?;
        let op = a.group.o_p_of(&a.group.all(), self.p);
        let m = self.s.sub(pid);
        Ok(op.count_ones(..) == popcount(m) / popcount(self.s.center(m)))
    }

    /// `C_F(P)` over `C_S(P)`, for fully centralized `P`. The second component embeds the new `S` into this one.
    pub fn centralizer_fusion_system(&self, pid: usize) -> Result<(FusionSystem, Vec<u8>)> {
        if !self.is_fully_centralized(pid) {
            return Err(Error::Domain(format!("subgroup {pid} is not fully centralized")));
        }
        let s = &self.s;
        let pm = s.sub(pid);
        let pgens = s.gens_of(pm);
        let c = s.centralizer(pm);
        let (cg, emb) = s.subgroup_pgroup(c);
        let mut back = vec![UNDEF; s.order()];
        for (i, &x) in emb.iter().enumerate() {
            back[x as usize] = i as u8;
        }
        let mut homs = Vec::with_capacity(cg.num_subgroups());
        for &qn in cg.subgroups() {
            let q = image_of(&emb, qn);
            let qp = s.join(q, pm);
            let mut set: Vec<Map> = Vec::new();
            for a in &self.homs[s.sub_id(qp)] {
                if !pgens.iter().all(|&x| a[x] as usize == x) || image_of(a, q) & c != image_of(a, q)
                {
                    continue;
                }
                let mut m = vec![UNDEF; cg.order()];
                for x in bits(qn) {
                    m[x] = back[a[emb[x] as usize] as usize];
                }
                set.push(m);
            }
            set.sort();
            set.dedup();
            homs.push(set);
        }
        Ok((FusionSystem::assemble(Arc::new(cg), homs), emb))
    }

    /// Quasicentric by definition: for each fully centralized conjugate `P'`, `C_F(P')` is the minimal system over `C_S(P')`.
    pub fn is_quasicentric(&self, pid: usize) -> bool {
        self.class_members(pid).into_iter().filter(|&j| self.is_fully_centralized(j)).all(|j| {
            let (cf, _) = self.centralizer_fusion_system(j).expect("fully centralized");
            let min = generate_homs(cf.s(), &[], true);
            cf.homs == min
        })
    }

    /// Quasicentric via the criterion: no `P' ≤ Q ≤ P'C_S(P')` carrying a nontrivial p'-element of `Aut_F(Q)` trivial on `P'`.
    pub fn is_quasicentric_by_criterion(&self, pid: usize) -> bool {
        let s = &self.s;
        let j = self
            .class_members(pid)
            .into_iter()
            .find(|&j| self.is_fully_centralized(j))
            .expect("every class has a fully centralized member");
        let pm = s.sub(j);
        let pc = s.join(pm, s.centralizer(pm));
        let pgens = s.gens_of(pm);
        for (qid, &q) in s.subgroups().iter().enumerate() {
            if q & pm != pm || q & pc != q {
                continue;
            }
            for a in self.iso(qid, qid) {
                if pgens.iter().all(|&x| a[x] as usize == x)
                    && !is_identity_on(a, q)
                    && map_order(a) % self.p != 0
                {
                    return false;
                }
            }
        }
        true
    }

    pub fn flags(&self, pid: usize) -> Result<SubgroupFlags> {
        Ok(SubgroupFlags {
            id: pid,
            class_id: self.class_rep[pid],
            fully_centralized: self.is_fully_centralized(pid),
            fully_normalized: self.is_fully_normalized(pid),
            centric: self.is_centric(pid),
            radical: self.is_radical(pid)?,
            quasicentric: self.is_quasicentric(pid),
        })
    }

    /// Flags for every subgroup. On saturated systems the two quasicentric tests are cross-checked.
    pub fn classify(&self) -> Result<Vec<SubgroupFlags>> {
        let sat = self.is_saturated();
        let mut crit: HashMap<usize, bool> = HashMap::new();
        (0..self.s.num_subgroups())
            .map(|i| {
                let f = self.flags(i)?;
                if sat {
                    let r = self.class_rep[i];
                    let c = *crit.entry(r).or_insert_with(|| self.is_quasicentric_by_criterion(r));
                    if c != f.quasicentric {
                        return Err(Error::Invariant(format!(
                            "quasicentric tests disagree on subgroup {i}"
                        )));
                    }
                }
                Ok(f)
            })
            .collect()
    }

    pub fn centric_ids(&self) -> Vec<usize> {
        (0..self.s.num_subgroups()).filter(|&i| self.is_centric(i)).collect()
    }
    pub fn quasicentric_ids(&self) -> Vec<usize> {
        let mut memo: HashMap<usize, bool> = HashMap::new();
        (0..self.s.num_subgroups())
            .filter(|&i| {
                let r = self.class_rep[i];
                *memo.entry(r).or_insert_with(|| self.is_quasicentric(r))
            })
            .collect()
    }

    pub fn check_axioms(&self) -> Vec<Violation> {
        let s = &self.s;
        let mut out = Vec::new();
        for (i, hs) in self.homs.iter().enumerate() {
            let m = s.sub(i);
            for h in hs {
                if dom(h) != m || !s.is_injective_hom(h) {
                    out.push(Violation::NotInjectiveHom { source: i, map: h.clone() });
                }
            }
            for g in bits(s.transporter(m, s.full())) {
                if !self.contains(&s.conj_map(g, m)) {
                    out.push(Violation::MissingConjugation { source: i, g });
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (i, hs) in self.homs.iter().enumerate() {
            let m = s.sub(i);
            for h in hs {
                let inv = invert(h);
                if !self.contains(&inv) {
                    out.push(Violation::MissingInverse { source: i, map: h.clone() });
                }
                for (j, &sm) in s.subgroups().iter().enumerate() {
                    if sm & m == sm && sm != m && !self.contains(&restrict(h, sm)) {
                        out.push(Violation::NotClosedUnderRestriction {
                            source: i,
                            map: h.clone(),
                            to: j,
                        });
                    }
                }
                let q = img(h);
                for k in &self.homs[s.sub_id(q)] {
                    let c = compose(k, h);
                    if !self.contains(&c) {
                        out.push(Violation::NotClosedUnderComposition {
                            first: h.clone(),
                            second: k.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// `N_φ = {g ∈ N_S(P) : φ c_g φ^{-1} ∈ Aut_S(φP)}`.
    pub fn n_phi(&self, phi: &[u8]) -> Mask {
        let s = &self.s;
        let q = img(phi);
        let inv = invert(phi);
        let qgens = s.gens_of(q);
        let nq = s.normalizer(q);
        let mut out = 0;
        for g in bits(s.normalizer(dom(phi))) {
            let want: Vec<usize> =
                qgens.iter().map(|&x| phi[s.conj(g, inv[x] as usize)] as usize).collect();
            if bits(nq).any(|h| qgens.iter().zip(&want).all(|(&x, &w)| s.conj(h, x) == w)) {
                out |= 1 << g;
            }
        }
        out
    }

    /// Some `φ̄ ∈ Hom_F(N, S)` with `φ̄|_P = φ`.
    pub fn find_extension(&self, phi: &[u8], n: Mask) -> Option<&Map> {
        let pgens = self.s.gens_of(dom(phi));
        let nid = self.s.try_sub_id(n)?;
        self.homs[nid].iter().find(|h| agrees_on(h, phi, &pgens))
    }

    fn axiom_i(&self) -> Option<String> {
        for i in 0..self.s.num_subgroups() {
            if !self.is_fully_normalized(i) {
                continue;
            }
            if !self.is_fully_centralized(i) {
                return Some(format!("subgroup {i} is fully normalized but not fully centralized"));
            }
            let a = self.iso(i, i).count();
            if self.aut_s_order(i) != p_part(a, self.p) {
                return Some(format!(
                    "subgroup {i}: |Aut_S(P)| = {} but |Aut_F(P)| = {a}",
                    self.aut_s_order(i)
                ));
            }
        }
        None
    }

    fn axiom_ii(&self, target_ok: impl Fn(usize) -> bool) -> Option<String> {
        let mut memo: HashMap<usize, bool> = HashMap::new();
        for (i, hs) in self.homs.iter().enumerate() {
            for h in hs {
                let qid = self.s.sub_id(img(h));
                if !*memo.entry(qid).or_insert_with(|| target_ok(qid)) {
                    continue;
                }
                let n = self.n_phi(h);
                if self.find_extension(h, n).is_none() {
                    return Some(format!(
                        "morphism {h:?} from subgroup {i} to subgroup {qid} does not extend to N_phi = subgroup {}",
                        self.s.sub_id(n)
                    ));
                }
            }
        }
        None
    }

    /// Axioms (I) and (II).
    pub fn check_saturation(&self) -> SaturationReport {
        SaturationReport {
            axioms: vec![
                (Axiom::I, self.axiom_i()),
                (Axiom::II, self.axiom_ii(|q| self.is_fully_centralized(q))),
            ],
        }
    }

    /// Stancu's form: `Inn(S)` Sylow in `Aut_F(S)`, and extension for morphisms onto fully normalized subgroups.
    pub fn check_saturation_stancu(&self) -> SaturationReport {
        let full = self.s.full_id();
        let inn = self.s.order() / popcount(self.s.center(self.s.full()));
        let a = self.iso(full, full).count();
        let i1 = if inn != p_part(a, self.p) {
            Some(format!("|Inn(S)| = {inn} but |Aut_F(S)| = {a}"))
        } else {
            None
        };
        SaturationReport {
            axioms: vec![
                (Axiom::IPrime, i1),
                (Axiom::IIPrime, self.axiom_ii(|q| self.is_fully_normalized(q))),
            ],
        }
    }

    pub fn is_saturated(&self) -> bool {
        *self.saturated.get_or_init(|| self.check_saturation().is_ok())
    }

    /// A fully normalized conjugate `P'` and `α ∈ Hom_F(N_S(P), S)` with `α(P) = P'`.
    pub fn conjugate_to_fully_normalized(&self, pid: usize) -> Result<(usize, Map)> {
        let s = &self.s;
        let pm = s.sub(pid);
        let nid = s.sub_id(s.normalizer(pm));
        for j in self.class_members(pid) {
            if !self.is_fully_normalized(j) {
                continue;
            }
            let target = s.sub(j);
            if let Some(a) = self.homs[nid].iter().find(|a| image_of(a, pm) == target) {
                return Ok((j, a.clone()));
            }
        }
        Err(Error::Invariant(format!(
            "no morphism on N_S(P) carries subgroup {pid} to a fully normalized conjugate"
        )))
    }

    /// Subgroups that are centric, radical and fully normalized.
    pub fn alperin_subgroups(&self) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..self.s.num_subgroups() {
            if self.is_centric(i) && self.is_fully_normalized(i) && self.is_radical(i)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Decompositions of every morphism out of `P`, by breadth-first search
    /// over composites of automorphisms of the Alperin subgroups.
    pub fn alperin_decompose_all(&self, pid: usize) -> Result<Vec<(Map, AlperinWord)>> {
        let alp = self.alperin_subgroups()?;
        self.alperin_decompose_with(pid, &alp)
    }

    pub fn alperin_decompose_with(
        &self,
        pid: usize,
        alp: &[usize],
    ) -> Result<Vec<(Map, AlperinWord)>> {
        let s = &self.s;
        let auts: Vec<(usize, Mask, Vec<Map>)> = alp
            .iter()
            .map(|&q| {
                let m = s.sub(q);
                (q, m, self.aut(q).into_iter().filter(|a| !is_identity_on(a, m)).collect())
            })
            .collect();
        let start = s.identity_map(s.sub(pid));
        let mut parent: HashMap<Map, Option<(usize, usize, usize)>> = HashMap::new();
        parent.insert(start.clone(), None);
        let mut queue = vec![start];
        let mut i = 0;
        while i < queue.len() {
            let im = img(&queue[i]);
            for (k, (_, m, list)) in auts.iter().enumerate() {
                if im & m != im {
                    continue;
                }
                for (a_idx, a) in list.iter().enumerate() {
                    let next = compose(a, &queue[i]);
                    if !parent.contains_key(&next) {
                        parent.insert(next.clone(), Some((i, k, a_idx)));
                        queue.push(next);
                    }
                }
            }
            i += 1;
        }
        let index: HashMap<&Map, usize> = queue.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut out = Vec::new();
        for phi in &self.homs[pid] {
            let Some(&pos) = index.get(phi) else {
                return Err(Error::Invariant(format!(
                    "morphism {phi:?} has no Alperin decomposition"
                )));
            };
            let mut letters = Vec::new();
            let mut cur = pos;
            while let Some((prev, k, a_idx)) = parent[&queue[cur]] {
                letters.push(AlperinLetter { q: auts[k].0, alpha: auts[k].2[a_idx].clone() });
                cur = prev;
            }
            letters.reverse();
            let word = AlperinWord { source: pid, letters };
            if &word.recompose(s) != phi {
                return Err(Error::Invariant("Alperin word does not recompose".into()));
            }
            out.push((phi.clone(), word));
        }
        Ok(out)
    }

    pub fn alperin_decompose(&self, phi: &[u8]) -> Result<AlperinWord> {
        let pid = self.s.try_sub_id(dom(phi)).ok_or_else(|| Error::Domain("bad domain".into()))?;
        if !self.contains(phi) {
            return Err(Error::Domain("map is not a morphism of the fusion system".into()));
        }
        let all = self.alperin_decompose_all(pid)?;
        Ok(all.into_iter().find(|(m, _)| m.as_slice() == phi).expect("present").1)
    }

    /// Whether morphisms between members of `h` generate `F`.
    pub fn is_h_generated(&self, h: &[usize]) -> bool {
        let masks: Vec<Mask> = h.iter().map(|&i| self.s.sub(i)).collect();
        let mut seeds = Vec::new();
        for &i in h {
            for m in &self.homs[i] {
                let im = img(m);
                if masks.iter().any(|&q| q & im == im) {
                    seeds.push(m.clone());
                }
            }
        }
        generate_homs(&self.s, &seeds, false) == self.homs
    }

    /// Number of `S`-conjugacy classes of fully normalized `F`-conjugates of `P`.
    pub fn fully_normalized_class_count(&self, pid: usize) -> usize {
        let s = &self.s;
        let mut seen: HashSet<Mask> = HashSet::new();
        let mut count = 0;
        for j in self.class_members(pid) {
            if !self.is_fully_normalized(j) || seen.contains(&s.sub(j)) {
                continue;
            }
            count += 1;
            for g in 0..s.order() {
                seen.insert(s.conj_mask(g, s.sub(j)));
            }
        }
        count
    }

    /// `σ F σ^{-1}` over `target`, for a group isomorphism `σ: S → target`.
    pub fn transport(&self, sigma: &[u8], target: Arc<PGroup>) -> FusionSystem {
        let mut homs = vec![Vec::new(); target.num_subgroups()];
        for (i, hs) in self.homs.iter().enumerate() {
            let j = target.sub_id(image_of(sigma, self.s.sub(i)));
            homs[j] = hs.iter().map(|h| conjugate_map(sigma, h, target.order())).collect();
            homs[j].sort();
        }
        FusionSystem::assemble(target, homs)
    }

    /// A group isomorphism `σ: S → S'` with `σ F σ^{-1} = F'`.
    pub fn find_isomorphism(&self, other: &FusionSystem) -> Result<Option<Map>> {
        if self.p != other.p
            || self.s.order() != other.s.order()
            || self.num_morphisms() != other.num_morphisms()
            || self.s.num_subgroups() != other.s.num_subgroups()
        {
            return Ok(None);
        }
        let mut mine: Vec<usize> = self.homs.iter().map(|h| h.len()).collect();
        let mut theirs: Vec<usize> = other.homs.iter().map(|h| h.len()).collect();
        mine.sort();
        theirs.sort();
        if mine != theirs {
            return Ok(None);
        }
        for sigma in self.s.isomorphisms_to(&other.s)? {
            let ok = self.homs.iter().all(|hs| {
                hs.iter().all(|h| other.contains(&conjugate_map(&sigma, h, other.s.order())))
            });
            if ok {
                return Ok(Some(sigma));
            }
        }
        Ok(None)
    }

    pub fn is_isomorphic(&self, other: &FusionSystem) -> Result<bool> {
        Ok(self.find_isomorphism(other)?.is_some())
    }
}

/// `σ h σ^{-1}`, defined on `σ(dom h)`.
pub fn conjugate_map(sigma: &[u8], h: &[u8], n: usize) -> Map {
    let mut m = vec![UNDEF; n];
    for (x, &y) in h.iter().enumerate() {
        if y != UNDEF {
            m[sigma[x] as usize] = sigma[y as usize];
        }
    }
    m
}

/// Fusion systems over `D8` and `V4` that violate saturation in known ways.
pub mod fixtures {
    use super::*;
    use crate::presets::preset;

    /// `D8` with all of `Aut(D8)`: `Aut_F(S)` is a 2-group strictly larger than `Inn(S)`.
    pub fn d8_full_aut() -> FusionSystem {
        let s = Arc::new(PGroup::new(preset("D8").unwrap(), 2).unwrap());
        let auts = s.automorphisms().unwrap();
        FusionSystem::generate(s, &auts, true)
    }

    /// `D8` with a single isomorphism between non-conjugate involutions lying in different four-groups.
    pub fn d8_cross_involution() -> FusionSystem {
        let s = Arc::new(PGroup::new(preset("D8").unwrap(), 2).unwrap());
        let z = bits(s.center(s.full())).find(|&x| x != 0).unwrap();
        let invols: Vec<usize> = (1..s.order()).filter(|&x| s.elem_order(x) == 2 && x != z).collect();
        let t = invols[0];
        let u = *invols
            .iter()
            .find(|&&u| s.mul(t, u) != z && s.mul(t, u) != 0 && s.elem_order(s.mul(t, u)) == 4)
            .unwrap();
        let mut m = vec![UNDEF; s.order()];
        m[0] = 0;
        m[t] = u as u8;
        FusionSystem::generate(s, &[m], true)
    }

    /// `V4` with one involutory automorphism and nothing else.
    pub fn v4_involution() -> FusionSystem {
        let s = Arc::new(PGroup::new(preset("V4").unwrap(), 2).unwrap());
        let auts = s.automorphisms().unwrap();
        let a = auts.into_iter().find(|a| map_order(a) == 2).unwrap();
        FusionSystem::generate(s, &[a], true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    fn sys(name: &str, p: usize) -> FusionSystem {
        FusionSystem::from_group_sylow(&preset(name).unwrap(), p).unwrap()
    }

    #[test]
    fn s4_automizer_of_four_group() {
        let f = sys("S4", 2);
        assert!(f.check_axioms().is_empty());
        let s = f.s();
        let v = (0..s.num_subgroups())
            .find(|&i| s.sub_order(i) == 4 && s.is_normal(s.sub(i), s.full()) && f.aut(i).len() > 2)
            .unwrap();
        assert_eq!(f.aut(v).len(), 6);
    }

    #[test]
    fn s3_at_two_is_trivial() {
        let f = sys("S3", 2);
        assert_eq!(f.aut(f.s().full_id()).len(), 1);
    }

    #[test]
    fn minimal_matches_group_of_s() {
        let f = sys("D8", 2);
        let m = FusionSystem::minimal(f.s_arc());
        assert_eq!(f.all_homs(), m.all_homs());
    }

    #[test]
    fn fixtures_fail_named_axioms() {
        let f = fixtures::d8_full_aut();
        assert_eq!(f.check_saturation().failed(), vec![Axiom::I]);
        assert_eq!(f.check_saturation_stancu().failed(), vec![Axiom::IPrime]);
        let f = fixtures::d8_cross_involution();
        assert_eq!(f.check_saturation().failed(), vec![Axiom::II]);
        assert_eq!(f.check_saturation_stancu().failed(), vec![Axiom::IIPrime]);
        let f = fixtures::v4_involution();
        assert!(f.check_saturation().failed().contains(&Axiom::I));
        assert!(f.check_saturation_stancu().failed().contains(&Axiom::IPrime));
    }

    #[test]
    fn corrupted_systems_report_violations() {
        let f = sys("S4", 2);
        let mut homs = f.all_homs().to_vec();
        let full = f.s().full_id();
        let g = homs[full].iter().position(|h| !is_identity_on(h, f.s().full())).unwrap();
        homs[full].remove(g);
        let broken = FusionSystem::from_parts(f.s_arc(), homs).unwrap();
        assert!(broken
            .check_axioms()
            .iter()
            .any(|v| matches!(v, Violation::MissingConjugation { .. })));
        let mut homs = f.all_homs().to_vec();
        let mut bad = f.s().identity_map(f.s().full());
        bad[1] = 0;
        homs[full].push(bad);
        assert!(FusionSystem::from_parts(f.s_arc(), homs).is_err());
    }

    #[test]
    fn s4_classification() {
        let f = sys("S4", 2);
        let flags = f.classify().unwrap();
        let centric: Vec<usize> = flags.iter().filter(|x| x.centric).map(|x| x.id).collect();
        let orders: Vec<usize> = centric.iter().map(|&i| f.s().sub_order(i)).collect();
        let mut sorted = orders.clone();
        sorted.sort();
        assert_eq!(sorted, vec![4, 4, 4, 8]);
        for fl in &flags {
            let m = f.s().sub(fl.id);
            if popcount(m) == 4 {
                let cyclic = bits(m).any(|x| f.s().elem_order(x) == 4);
                let normal = f.s().is_normal(m, f.s().full());
                if cyclic {
                    assert!(!fl.radical);
                } else if fl.centric && f.aut(fl.id).len() == 6 {
                    assert!(fl.radical && normal);
                }
            }
        }
    }

    #[test]
    fn h_generation() {
        let f = sys("S4", 2);
        assert!(f.is_h_generated(&(0..f.s().num_subgroups()).collect::<Vec<_>>()));
        assert!(f.is_h_generated(&f.centric_ids()));
        assert!(!f.is_h_generated(&[f.s().full_id()]));
    }
}
