//! Small p-groups (at most 64 elements) with subgroups as bitmasks and
//! homomorphisms between subgroups as element-wise maps.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::{is_p_power, Group, Subset};

pub type Mask = u64;
/// `map[x]` is the image of `x`, or [`UNDEF`] when `x` is outside the domain.
pub type Map = Vec<u8>;
pub const UNDEF: u8 = 255;

pub const MAX_P_ORDER: usize = 64;

pub fn bits(m: Mask) -> impl Iterator<Item = usize> {
    let mut m = m;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

pub fn popcount(m: Mask) -> usize {
    m.count_ones() as usize
}

/// Canonical order on subgroups: lexicographic on sorted element lists.
pub fn cmp_masks(a: Mask, b: Mask) -> Ordering {
    bits(a).cmp(bits(b))
}

pub fn dom(map: &[u8]) -> Mask {
    map.iter().enumerate().filter(|(_, &v)| v != UNDEF).fold(0, |m, (i, _)| m | (1 << i))
}

pub fn img(map: &[u8]) -> Mask {
    map.iter().filter(|&&v| v != UNDEF).fold(0, |m, &v| m | (1 << v))
}

/// `a ∘ b`, defined wherever `b` is defined and lands in the domain of `a`.
pub fn compose(a: &[u8], b: &[u8]) -> Map {
    b.iter().map(|&x| if x == UNDEF { UNDEF } else { a[x as usize] }).collect()
}

pub fn restrict(map: &[u8], m: Mask) -> Map {
    map.iter().enumerate().map(|(i, &v)| if m >> i & 1 == 1 { v } else { UNDEF }).collect()
}

pub fn invert(map: &[u8]) -> Map {
    let mut out = vec![UNDEF; map.len()];
    for (i, &v) in map.iter().enumerate() {
        if v != UNDEF {
            out[v as usize] = i as u8;
        }
    }
    out
}

pub fn image_of(map: &[u8], m: Mask) -> Mask {
    bits(m).fold(0, |acc, x| acc | (1 << map[x]))
}

pub fn is_identity_on(map: &[u8], m: Mask) -> bool {
    bits(m).all(|x| map[x] as usize == x)
}

pub fn identity_map(n: usize, m: Mask) -> Map {
    (0..n).map(|i| if m >> i & 1 == 1 { i as u8 } else { UNDEF }).collect()
}

#[derive(Clone, Debug)]
pub struct PGroup {
    p: usize,
    group: Group,
    mul: Vec<u8>,
    inv: Vec<u8>,
    subs: Vec<Mask>,
    sub_id: HashMap<Mask, usize>,
    normalizers: Vec<Mask>,
    centralizers: Vec<Mask>,
}

impl PGroup {
    pub fn new(group: Group, p: usize) -> Result<PGroup> {
        let n = group.order();
        if n > MAX_P_ORDER {
            return Err(Error::Unsupported(format!("p-group of order {n} exceeds {MAX_P_ORDER}")));
        }
        if !is_p_power(n, p) {
            return Err(Error::Domain(format!("group of order {n} is not a {p}-group")));
        }
        let mut mul = vec![0u8; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = group.mul(a, b) as u8;
            }
        }
        let inv = (0..n).map(|a| group.inv(a) as u8).collect();
        let mut pg = PGroup {
            p,
            group,
            mul,
            inv,
            subs: Vec::new(),
            sub_id: HashMap::new(),
            normalizers: Vec::new(),
            centralizers: Vec::new(),
        };
        pg.enumerate_subgroups();
        Ok(pg)
    }

    /// `S` as a subgroup of a larger group; the second component maps the
    /// indices of the new group to indices of `g`.
    pub fn from_subgroup(g: &Group, s: &Subset, p: usize) -> Result<(PGroup, Vec<usize>)> {
        let (h, emb) = g.subgroup_as_group(s);
        Ok((PGroup::new(h, p)?, emb))
    }

    fn enumerate_subgroups(&mut self) {
        let n = self.order();
        let mut subs: Vec<Mask> = vec![1];
        let mut gens_of: Vec<Vec<usize>> = vec![Vec::new()];
        let mut seen: HashMap<Mask, usize> = HashMap::new();
        seen.insert(1, 0);
        let mut i = 0;
        while i < subs.len() {
            let h = subs[i];
            for x in 0..n {
                if h >> x & 1 == 1 {
                    continue;
                }
                let mut gens = gens_of[i].clone();
                gens.push(x);
                let k = self.closure(&gens);
                if !seen.contains_key(&k) {
                    seen.insert(k, subs.len());
                    subs.push(k);
                    gens_of.push(gens);
                }
            }
            i += 1;
        }
        subs.sort_by(|&a, &b| cmp_masks(a, b));
        self.sub_id = subs.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        self.normalizers = subs.iter().map(|&m| self.normalizer_of(m)).collect();
        self.centralizers = subs.iter().map(|&m| self.centralizer_of(m)).collect();
        self.subs = subs;
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn order(&self) -> usize {
        self.inv.len()
    }
    pub fn group(&self) -> &Group {
        &self.group
    }
    pub fn full(&self) -> Mask {
        if self.order() == 64 {
            u64::MAX
        } else {
            (1u64 << self.order()) - 1
        }
    }
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order() + b] as usize
    }
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }
    pub fn pow(&self, a: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }
    pub fn elem_order(&self, a: usize) -> usize {
        self.group.elem_order(a)
    }

    pub fn closure(&self, gens: &[usize]) -> Mask {
        let mut set: Mask = 1;
        let mut list = vec![0usize];
        let mut i = 0;
        while i < list.len() {
            for &g in gens {
                let y = self.mul(list[i], g);
                if set >> y & 1 == 0 {
                    set |= 1 << y;
                    list.push(y);
                }
            }
            i += 1;
        }
        set
    }
    pub fn closure_mask(&self, m: Mask) -> Mask {
        self.closure(&bits(m).collect::<Vec<_>>())
    }
    pub fn join(&self, a: Mask, b: Mask) -> Mask {
        let mut g = self.gens_of(a);
        g.extend(self.gens_of(b));
        self.closure(&g)
    }
    /// An irredundant generating set (of minimal size, by the Burnside basis theorem).
    pub fn gens_of(&self, m: Mask) -> Vec<usize> {
        let mut kept = Vec::new();
        let mut cur: Mask = 1;
        for x in bits(m) {
            if cur >> x & 1 == 0 {
                kept.push(x);
                cur = self.closure(&kept);
            }
        }
        kept
    }
    pub fn is_subgroup(&self, m: Mask) -> bool {
        self.sub_id.contains_key(&m)
    }

    pub fn subgroups(&self) -> &[Mask] {
        &self.subs
    }
    pub fn num_subgroups(&self) -> usize {
        self.subs.len()
    }
    pub fn sub(&self, id: usize) -> Mask {
        self.subs[id]
    }
    pub fn sub_id(&self, m: Mask) -> usize {
        *self.sub_id.get(&m).unwrap_or_else(|| panic!("mask {m:#x} is not a subgroup"))
    }
    pub fn try_sub_id(&self, m: Mask) -> Option<usize> {
        self.sub_id.get(&m).copied()
    }
    pub fn full_id(&self) -> usize {
        self.sub_id(self.full())
    }
    pub fn trivial_id(&self) -> usize {
        self.sub_id(1)
    }
    pub fn sub_order(&self, id: usize) -> usize {
        popcount(self.subs[id])
    }

    pub fn conj_mask(&self, g: usize, m: Mask) -> Mask {
        bits(m).fold(0, |acc, x| acc | (1 << self.conj(g, x)))
    }
    pub fn transporter(&self, a: Mask, b: Mask) -> Mask {
        let gens = self.gens_of(a);
        (0..self.order())
            .filter(|&g| gens.iter().all(|&x| b >> self.conj(g, x) & 1 == 1))
            .fold(0, |acc, g| acc | (1 << g))
    }
    fn normalizer_of(&self, m: Mask) -> Mask {
        self.transporter(m, m)
    }
    fn centralizer_of(&self, m: Mask) -> Mask {
        let gens = self.gens_of(m);
        (0..self.order())
            .filter(|&g| gens.iter().all(|&x| self.mul(g, x) == self.mul(x, g)))
            .fold(0, |acc, g| acc | (1 << g))
    }
    pub fn normalizer(&self, m: Mask) -> Mask {
        match self.sub_id.get(&m) {
            Some(&i) => self.normalizers[i],
            None => self.normalizer_of(m),
        }
    }
    pub fn centralizer(&self, m: Mask) -> Mask {
        match self.sub_id.get(&m) {
            Some(&i) => self.centralizers[i],
            None => self.centralizer_of(m),
        }
    }
    pub fn center(&self, m: Mask) -> Mask {
        m & self.centralizer(m)
    }
    pub fn centralizer_in(&self, within: Mask, m: Mask) -> Mask {
        within & self.centralizer(m)
    }
    pub fn is_normal(&self, h: Mask, within: Mask) -> bool {
        within & self.normalizer(h) == within
    }
    pub fn is_abelian(&self, m: Mask) -> bool {
        self.center(m) == m
    }

    /// `c_g` restricted to `m`.
    pub fn conj_map(&self, g: usize, m: Mask) -> Map {
        (0..self.order())
            .map(|x| if m >> x & 1 == 1 { self.conj(g, x) as u8 } else { UNDEF })
            .collect()
    }
    pub fn identity_map(&self, m: Mask) -> Map {
        identity_map(self.order(), m)
    }

    /// Whether `map` is an injective homomorphism on its domain, and the domain is a subgroup.
    pub fn is_injective_hom(&self, map: &[u8]) -> bool {
        if map.len() != self.order() {
            return false;
        }
        let d = dom(map);
        if !self.is_subgroup(d) {
            return false;
        }
        if popcount(img(map)) != popcount(d) {
            return false;
        }
        bits(d).all(|a| {
            bits(d).all(|b| {
                let ab = self.mul(a, b);
                map[ab] != UNDEF && map[ab] as usize == self.mul(map[a] as usize, map[b] as usize)
            })
        })
    }

    /// Extend an assignment of images on generators to a homomorphism of `⟨gens⟩`.
    pub fn extend_hom(&self, gens: &[usize], images: &[usize], target: &PGroup) -> Option<Map> {
        let mut map = vec![UNDEF; self.order()];
        map[0] = 0;
        let mut list = vec![0usize];
        let mut i = 0;
        while i < list.len() {
            let x = list[i];
            for (&g, &h) in gens.iter().zip(images) {
                let y = self.mul(x, g);
                let fy = target.mul(map[x] as usize, h) as u8;
                if map[y] == UNDEF {
                    map[y] = fy;
                    list.push(y);
                } else if map[y] != fy {
                    return None;
                }
            }
            i += 1;
        }
        Some(map)
    }

    /// All injective homomorphisms from the subgroup `m` into `target`: generator images searched exhaustively.
    pub fn injective_homs(&self, m: Mask, target: &PGroup, limit: usize) -> Result<Vec<Map>> {
        let gens = self.gens_of(m);
        let cands: Vec<Vec<usize>> = gens
            .iter()
            .map(|&g| {
                let o = self.elem_order(g);
                (0..target.order()).filter(|&y| target.elem_order(y) == o).collect()
            })
            .collect();
        let space: f64 = cands.iter().map(|c| c.len() as f64).product();
        if space > limit as f64 {
            return Err(Error::Unsupported(format!(
                "homomorphism search space {space} exceeds {limit}"
            )));
        }
        let mut out = Vec::new();
        let mut choice = vec![0usize; gens.len()];
        let k = popcount(m);
        loop {
            if cands.iter().all(|c| !c.is_empty()) {
                let images: Vec<usize> = choice.iter().zip(&cands).map(|(&i, c)| c[i]).collect();
                if let Some(map) = self.extend_hom(&gens, &images, target) {
                    if popcount(img(&map)) == k {
                        out.push(map);
                    }
                }
            } else {
                break;
            }
            let mut j = 0;
            loop {
                if j == gens.len() {
                    out.sort();
                    return Ok(out);
                }
                choice[j] += 1;
                if choice[j] < cands[j].len() {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
        }
        out.sort();
        Ok(out)
    }

    /// `Aut(S)`, by exhaustive search over generator images.
    pub fn automorphisms(&self) -> Result<Vec<Map>> {
        self.injective_homs(self.full(), self, 5_000_000)
    }

    /// The subgroup `m` as a p-group in its own right; `emb[i]` is the index in `self` of new element `i`.
    pub fn subgroup_pgroup(&self, m: Mask) -> (PGroup, Vec<u8>) {
        let mut set = self.group.empty_set();
        for x in bits(m) {
            set.insert(x);
        }
        let (h, emb) = self.group.subgroup_as_group(&set);
        let pg = PGroup::new(h, self.p).expect("subgroup of a p-group");
        (pg, emb.into_iter().map(|x| x as u8).collect())
    }

    /// `S/A` for a normal subgroup `A`, with the projection on element indices.
    pub fn quotient(&self, a: Mask) -> (PGroup, Vec<u8>) {
        let mut set = self.group.empty_set();
        for x in bits(a) {
            set.insert(x);
        }
        let (q, proj) = self.group.quotient(&set);
        let pg = PGroup::new(q, self.p).expect("quotient of a p-group");
        (pg, proj.into_iter().map(|x| x as u8).collect())
    }

    /// A p-group from a multiplication table; the map sends table indices to element indices.
    pub fn from_table(n: usize, table: &[usize], p: usize) -> Result<(PGroup, Vec<u8>)> {
        let (g, map) = Group::from_table(n, table)?;
        Ok((PGroup::new(g, p)?, map.into_iter().map(|x| x as u8).collect()))
    }

    /// Smallest subgroup of `within` normal in `within` containing `xs`.
    pub fn normal_closure(&self, within: Mask, xs: Mask) -> Mask {
        let wg = self.gens_of(within);
        let mut cur = self.closure_mask(xs);
        loop {
            let mut next = cur;
            for &g in &wg {
                next |= self.conj_mask(g, cur);
            }
            let next = self.closure_mask(next);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    /// Order, abelian-ness, exponent and per-order element counts: a cheap isomorphism prefilter.
    pub fn invariants(&self, m: Mask) -> (usize, bool, Vec<usize>) {
        let mut counts = vec![0usize; 65];
        for x in bits(m) {
            counts[self.elem_order(x)] += 1;
        }
        (popcount(m), self.is_abelian(m), counts)
    }

    /// All isomorphisms from `self` onto `other`.
    pub fn isomorphisms_to(&self, other: &PGroup) -> Result<Vec<Map>> {
        if self.invariants(self.full()) != other.invariants(other.full()) {
            return Ok(Vec::new());
        }
        self.injective_homs(self.full(), other, 5_000_000)
    }
}
