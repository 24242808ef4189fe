//! Finite permutation groups with every element materialized.
//!
//! Elements are indexed by their position in the lexicographically sorted
//! list of image arrays, so index 0 is always the identity. Subgroups and
//! other element sets are bitsets over these indices.

use std::collections::{HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::perm::{self, Perm};

pub type Subset = FixedBitSet;

const TABLE_CAP: usize = 2048;
/// Desk-scale ceiling on materialized groups.
pub const MAX_ORDER: usize = 50_000;

#[derive(Clone, Debug)]
pub struct Group {
    degree: usize,
    perms: Vec<Perm>,
    lookup: HashMap<Perm, u32>,
    table: Option<Vec<u32>>,
    inv: Vec<u32>,
    gens: Vec<usize>,
}

pub fn p_part(n: usize, p: usize) -> usize {
    let mut n = n;
    let mut out = 1;
    while n % p == 0 {
        n /= p;
        out *= p;
    }
    out
}

pub fn is_p_power(n: usize, p: usize) -> bool {
    p_part(n, p) == n
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl Group {
    /// The group generated by `gens`, all acting on `{0..degree-1}`.
    pub fn generate(degree: usize, gens: &[Perm]) -> Result<Group> {
        for g in gens {
            if g.len() != degree || !perm::is_permutation(g) {
                return Err(Error::Parse(format!(
                    "generator {g:?} is not a permutation of degree {degree}"
                )));
            }
        }
        let id = perm::identity(degree);
        let mut seen: HashSet<Perm> = HashSet::new();
        seen.insert(id.clone());
        let mut list = vec![id];
        let mut i = 0;
        while i < list.len() {
            for g in gens {
                let h = perm::compose(g, &list[i]);
                if !seen.contains(&h) {
                    seen.insert(h.clone());
                    list.push(h);
                    if list.len() > MAX_ORDER {
                        return Err(Error::Unsupported(format!(
                            "group order exceeds {MAX_ORDER}"
                        )));
                    }
                }
            }
            i += 1;
        }
        let mut g = Group::from_closed(degree, list)?;
        let gen_ids: Vec<usize> = gens.iter().map(|p| g.index(p).unwrap()).collect();
        g.gens = g.reduce_gens(&gen_ids);
        Ok(g)
    }

    /// Build from a set already known to be a group.
    pub fn from_closed(degree: usize, mut perms: Vec<Perm>) -> Result<Group> {
        perms.sort();
        perms.dedup();
        let n = perms.len();
        if n == 0 || perms[0] != perm::identity(degree) {
            return Err(Error::Domain("element set does not contain the identity".into()));
        }
        let lookup: HashMap<Perm, u32> =
            perms.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
        let mut inv = Vec::with_capacity(n);
        for p in &perms {
            let q = perm::inverse(p);
            match lookup.get(&q) {
                Some(&j) => inv.push(j),
                None => return Err(Error::Domain("element set not closed under inverses".into())),
            }
        }
        let table = if n <= TABLE_CAP {
            let mut t = vec![0u32; n * n];
            for a in 0..n {
                for b in 0..n {
                    let c = perm::compose(&perms[a], &perms[b]);
                    match lookup.get(&c) {
                        Some(&k) => t[a * n + b] = k,
                        None => {
                            return Err(Error::Domain("element set not closed under products".into()))
                        }
                    }
                }
            }
            Some(t)
        } else {
            None
        };
        let mut g = Group { degree, perms, lookup, table, inv, gens: Vec::new() };
        let all: Vec<usize> = (1..n).collect();
        g.gens = g.reduce_gens(&all);
        Ok(g)
    }

    /// Regular representation of a group given by its multiplication table
    /// (`table[a * n + b] = a * b`, with 0 the identity). Returns the group and
    /// the map from table indices to element indices.
    pub fn from_table(n: usize, table: &[usize]) -> Result<(Group, Vec<usize>)> {
        if table.len() != n * n || n == 0 {
            return Err(Error::Domain("multiplication table has wrong size".into()));
        }
        let perms: Vec<Perm> =
            (0..n).map(|a| (0..n).map(|x| table[a * n + x] as u16).collect()).collect();
        for p in &perms {
            if !perm::is_permutation(p) {
                return Err(Error::Domain("table rows are not permutations".into()));
            }
        }
        let g = Group::from_closed(n, perms.clone())?;
        let map = perms.iter().map(|p| g.index(p).unwrap()).collect();
        Ok((g, map))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn order(&self) -> usize {
        self.perms.len()
    }
    pub fn perm(&self, x: usize) -> &Perm {
        &self.perms[x]
    }
    pub fn index(&self, p: &[u16]) -> Option<usize> {
        self.lookup.get(p).map(|&i| i as usize)
    }
    pub fn gens(&self) -> &[usize] {
        &self.gens
    }
    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.perms.len() + b] as usize,
            None => self.index(&perm::compose(&self.perms[a], &self.perms[b])).unwrap(),
        }
    }
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }
    pub fn pow(&self, a: usize, k: usize) -> usize {
        let mut out = 0;
        for _ in 0..k {
            out = self.mul(out, a);
        }
        out
    }
    /// `g x g^{-1}`
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }
    /// `[a, b] = a b a^{-1} b^{-1}`
    pub fn commutator(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }
    pub fn elem_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn empty_set(&self) -> Subset {
        FixedBitSet::with_capacity(self.order())
    }
    pub fn all(&self) -> Subset {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }
    pub fn trivial(&self) -> Subset {
        self.set_of([0])
    }
    pub fn set_of(&self, elems: impl IntoIterator<Item = usize>) -> Subset {
        let mut s = self.empty_set();
        for x in elems {
            s.insert(x);
        }
        s
    }

    /// The subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Subset {
        let mut set = self.trivial();
        let mut list = vec![0usize];
        let gens: Vec<usize> = gens.iter().copied().filter(|&g| g != 0).collect();
        let mut i = 0;
        while i < list.len() {
            for &g in &gens {
                let y = self.mul(list[i], g);
                if !set.contains(y) {
                    set.insert(y);
                    list.push(y);
                }
            }
            i += 1;
        }
        set
    }

    /// Greedy generating subset of `⟨cands⟩`: keep a candidate only if it is
    /// not yet in the subgroup generated by the ones kept so far.
    pub fn reduce_gens(&self, cands: &[usize]) -> Vec<usize> {
        let mut kept: Vec<usize> = Vec::new();
        let mut cur = self.trivial();
        for &c in cands {
            if !cur.contains(c) {
                kept.push(c);
                cur = self.closure(&kept);
            }
        }
        kept
    }

    pub fn generators_of(&self, h: &Subset) -> Vec<usize> {
        let elems: Vec<usize> = h.ones().collect();
        self.reduce_gens(&elems)
    }

    pub fn is_subgroup(&self, h: &Subset) -> bool {
        if !h.contains(0) {
            return false;
        }
        let elems: Vec<usize> = h.ones().collect();
        elems.iter().all(|&a| elems.iter().all(|&b| h.contains(self.mul(a, b))))
    }

    pub fn join(&self, a: &Subset, b: &Subset) -> Subset {
        let mut gens = self.generators_of(a);
        gens.extend(self.generators_of(b));
        self.closure(&gens)
    }

    pub fn conj_set(&self, g: usize, h: &Subset) -> Subset {
        self.set_of(h.ones().map(|x| self.conj(g, x)))
    }

    /// `N_G(H, K) = {x : x H x^{-1} ≤ K}` inside the subgroup `within`.
    pub fn transporter_in(&self, within: &Subset, h: &Subset, k: &Subset) -> Subset {
        let gens = self.generators_of(h);
        self.set_of(within.ones().filter(|&x| gens.iter().all(|&y| k.contains(self.conj(x, y)))))
    }
    pub fn transporter(&self, h: &Subset, k: &Subset) -> Subset {
        self.transporter_in(&self.all(), h, k)
    }
    pub fn normalizer_in(&self, within: &Subset, h: &Subset) -> Subset {
        self.transporter_in(within, h, h)
    }
    pub fn normalizer(&self, h: &Subset) -> Subset {
        self.normalizer_in(&self.all(), h)
    }
    pub fn centralizer_in(&self, within: &Subset, h: &Subset) -> Subset {
        let gens = self.generators_of(h);
        self.set_of(
            within.ones().filter(|&x| gens.iter().all(|&y| self.mul(x, y) == self.mul(y, x))),
        )
    }
    pub fn centralizer(&self, h: &Subset) -> Subset {
        self.centralizer_in(&self.all(), h)
    }
    pub fn center_of(&self, h: &Subset) -> Subset {
        self.centralizer_in(h, h)
    }
    pub fn is_normal_in(&self, within: &Subset, h: &Subset) -> bool {
        let wg = self.generators_of(within);
        wg.iter().all(|&g| h.ones().all(|x| h.contains(self.conj(g, x))))
    }

    /// Smallest subgroup of `within` normalized by `within` and containing `x`s.
    pub fn normal_closure_in(&self, within: &Subset, xs: &[usize]) -> Subset {
        let wg = self.generators_of(within);
        let mut gens: Vec<usize> = xs.to_vec();
        loop {
            let cur = self.closure(&gens);
            let mut grew = false;
            for &g in &wg {
                for y in self.generators_of(&cur) {
                    let z = self.conj(g, y);
                    if !cur.contains(z) {
                        gens.push(z);
                        grew = true;
                    }
                }
                if grew {
                    break;
                }
            }
            if !grew {
                return cur;
            }
        }
    }

    pub fn derived_subgroup_of(&self, h: &Subset) -> Subset {
        let gens = self.generators_of(h);
        let mut comms = Vec::new();
        for &a in &gens {
            for &b in &gens {
                comms.push(self.commutator(a, b));
            }
        }
        self.normal_closure_in(h, &comms)
    }

    pub fn p_elements(&self, h: &Subset, p: usize) -> Vec<usize> {
        h.ones().filter(|&x| is_p_power(self.elem_order(x), p)).collect()
    }
    pub fn pprime_elements(&self, h: &Subset, p: usize) -> Vec<usize> {
        h.ones().filter(|&x| self.elem_order(x) % p != 0).collect()
    }

    /// A Sylow p-subgroup of `h`, grown one step at a time inside normalizers.
    pub fn sylow_of(&self, h: &Subset, p: usize) -> Subset {
        let target = p_part(h.count_ones(..), p);
        let mut cur = self.trivial();
        while cur.count_ones(..) < target {
            let n = self.normalizer_in(h, &cur);
            let g = n
                .ones()
                .find(|&g| !cur.contains(g) && cur.contains(self.pow(g, p)))
                .expect("normalizer of a non-Sylow p-subgroup has a p-element outside it");
            let mut gens = self.generators_of(&cur);
            gens.push(g);
            cur = self.closure(&gens);
        }
        cur
    }
    pub fn sylow(&self, p: usize) -> Subset {
        self.sylow_of(&self.all(), p)
    }

    /// `O^p(H)`: generated by the elements of order prime to p.
    pub fn o_upper_p_of(&self, h: &Subset, p: usize) -> Subset {
        self.closure(&self.pprime_elements(h, p))
    }
    /// `O^{p'}(H)`: generated by the elements of p-power order.
    pub fn o_upper_pprime_of(&self, h: &Subset, p: usize) -> Subset {
        self.closure(&self.p_elements(h, p))
    }

    /// Largest normal p-subgroup of `h`: the intersection of the conjugates of a Sylow.
    pub fn o_p_of(&self, h: &Subset, p: usize) -> Subset {
        let s = self.sylow_of(h, p);
        let mut core = s.clone();
        for g in h.ones() {
            core.intersect_with(&self.conj_set(g, &s));
        }
        core
    }
    /// Largest normal subgroup of `h` of order prime to p.
    pub fn o_pprime_of(&self, h: &Subset, p: usize) -> Subset {
        let mut good = Vec::new();
        for x in h.ones() {
            if self.elem_order(x) % p != 0 {
                let n = self.normal_closure_in(h, &[x]);
                if n.count_ones(..) % p != 0 {
                    good.push(x);
                }
            }
        }
        self.closure(&good)
    }

    /// Conjugacy classes of `h` (under conjugation by `h`), each as a sorted list.
    pub fn conjugacy_classes_of(&self, h: &Subset) -> Vec<Vec<usize>> {
        let mut done = self.empty_set();
        let gens = self.generators_of(h);
        let mut out = Vec::new();
        for x in h.ones() {
            if done.contains(x) {
                continue;
            }
            let mut class = vec![x];
            done.insert(x);
            let mut i = 0;
            while i < class.len() {
                for &g in &gens {
                    let y = self.conj(g, class[i]);
                    if !done.contains(y) {
                        done.insert(y);
                        class.push(y);
                    }
                }
                i += 1;
            }
            class.sort();
            out.push(class);
        }
        out
    }

    /// All normal subgroups of `h`, as joins of normal closures of classes.
    pub fn normal_subgroups_of(&self, h: &Subset) -> Vec<Subset> {
        let classes = self.conjugacy_classes_of(h);
        let mut base: Vec<Subset> = Vec::new();
        for c in &classes {
            let n = self.normal_closure_in(h, &[c[0]]);
            if !base.contains(&n) {
                base.push(n);
            }
        }
        let mut all: Vec<Subset> = vec![self.trivial()];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(vec![0]);
        let mut i = 0;
        while i < all.len() {
            for b in &base {
                let j = self.join(&all[i], b);
                let key: Vec<usize> = j.ones().collect();
                if seen.insert(key) {
                    all.push(j);
                }
            }
            i += 1;
        }
        all.sort_by_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
        all
    }

    /// `O^p(H)` as the intersection of all normal subgroups of p-power index.
    pub fn o_upper_p_via_normals(&self, h: &Subset, p: usize) -> Subset {
        let order = h.count_ones(..);
        let mut out = h.clone();
        for n in self.normal_subgroups_of(h) {
            if is_p_power(order / n.count_ones(..), p) {
                out.intersect_with(&n);
            }
        }
        out
    }
    /// `O^{p'}(H)` as the intersection of all normal subgroups of index prime to p.
    pub fn o_upper_pprime_via_normals(&self, h: &Subset, p: usize) -> Subset {
        let order = h.count_ones(..);
        let mut out = h.clone();
        for n in self.normal_subgroups_of(h) {
            if (order / n.count_ones(..)) % p != 0 {
                out.intersect_with(&n);
            }
        }
        out
    }
    /// `O^p(H)` as the terminal member of `H ≥ [H,H]H^p ≥ ...`.
    pub fn o_upper_p_via_series(&self, h: &Subset, p: usize) -> Subset {
        let mut cur = h.clone();
        loop {
            let mut gens = self.generators_of(&self.derived_subgroup_of(&cur));
            gens.extend(cur.ones().map(|x| self.pow(x, p)));
            let next = self.normal_closure_in(&cur, &gens);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    /// p-solvability from the series `H ≥ O^{p'}(H) ≥ O^p(O^{p'}(H)) ≥ ...`.
    pub fn is_p_solvable(&self, p: usize) -> bool {
        let mut cur = self.all();
        loop {
            let next = self.o_upper_p_of(&self.o_upper_pprime_of(&cur, p), p);
            if next.count_ones(..) == 1 {
                return true;
            }
            if next == cur {
                return false;
            }
            cur = next;
        }
    }

    /// p-solvability by repeatedly factoring out `O_p` and `O_{p'}`.
    pub fn is_p_solvable_by_stripping(&self, p: usize) -> bool {
        let mut g = self.clone();
        loop {
            if g.order() == 1 {
                return true;
            }
            let all = g.all();
            let mut n = g.o_p_of(&all, p);
            if n.count_ones(..) == 1 {
                n = g.o_pprime_of(&all, p);
            }
            if n.count_ones(..) == 1 {
                return false;
            }
            g = g.quotient(&n).0;
        }
    }

    /// `G/N` acting on left cosets of `N`, with the projection on element indices.
    pub fn quotient(&self, n: &Subset) -> (Group, Vec<usize>) {
        let mut coset_of = vec![usize::MAX; self.order()];
        let mut reps = Vec::new();
        for x in 0..self.order() {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(x);
            for y in n.ones() {
                coset_of[self.mul(x, y)] = c;
            }
        }
        let k = reps.len();
        let act = |g: usize| -> Perm { reps.iter().map(|&r| coset_of[self.mul(g, r)] as u16).collect() };
        let gens: Vec<Perm> = self.gens.iter().map(|&g| act(g)).collect();
        let q = Group::generate(k, &gens).expect("quotient action is a permutation group");
        let proj = (0..self.order()).map(|g| q.index(&act(g)).unwrap()).collect();
        (q, proj)
    }

    /// `H` as a group in its own right; the second component maps new indices to old.
    pub fn subgroup_as_group(&self, h: &Subset) -> (Group, Vec<usize>) {
        let perms: Vec<Perm> = h.ones().map(|x| self.perms[x].clone()).collect();
        let g = Group::from_closed(self.degree, perms).expect("subset is a subgroup");
        let emb = (0..g.order()).map(|i| self.index(g.perm(i)).unwrap()).collect();
        (g, emb)
    }

    /// Automorphisms of `H` induced by conjugation in `G`, as permutations of
    /// the positions of the elements of `H` in increasing index order.
    pub fn aut_group_on(&self, h: &Subset) -> Group {
        let elems: Vec<usize> = h.ones().collect();
        let pos: HashMap<usize, u16> =
            elems.iter().enumerate().map(|(i, &x)| (x, i as u16)).collect();
        let n = self.normalizer(h);
        let mut perms: Vec<Perm> = n
            .ones()
            .map(|g| elems.iter().map(|&x| pos[&self.conj(g, x)]).collect())
            .collect();
        perms.sort();
        perms.dedup();
        Group::from_closed(elems.len(), perms).expect("induced automorphisms form a group")
    }

    /// Both sides of the hyperfocal lemma: `S ∩ O^p(G)` and the subgroup
    /// generated by `[g, x]` for `g ∈ P ≤ S`, `x ∈ N_G(P)` of p'-order.
    pub fn hyperfocal_group_oracle(
        &self,
        s: &Subset,
        p: usize,
        subgroups_of_s: &[Subset],
    ) -> Result<Subset> {
        let mut left = s.clone();
        left.intersect_with(&self.o_upper_p_of(&self.all(), p));
        let mut comms = Vec::new();
        for q in subgroups_of_s {
            let nq = self.normalizer(q);
            for x in self.pprime_elements(&nq, p) {
                for g in q.ones() {
                    comms.push(self.commutator(g, x));
                }
            }
        }
        comms.sort();
        comms.dedup();
        let right = self.closure(&comms);
        if left != right {
            return Err(Error::Invariant(format!(
                "hyperfocal oracle mismatch: |S ∩ O^p(G)| = {}, commutator subgroup order {}",
                left.count_ones(..),
                right.count_ones(..)
            )));
        }
        Ok(left)
    }

    /// Focal subgroup oracle `S ∩ [G, G]`.
    pub fn focal_group_oracle(&self, s: &Subset) -> Subset {
        let mut out = s.clone();
        out.intersect_with(&self.derived_subgroup_of(&self.all()));
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().all(|&a| self.gens.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Every subgroup `K` with `lower ≤ K ≤ upper` (both must be subgroups).
    pub fn intermediate_subgroups(&self, lower: &Subset, upper: &Subset) -> Vec<Subset> {
        let mut out = vec![lower.clone()];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(lower.ones().collect());
        let mut queue: VecDeque<usize> = VecDeque::new();
        queue.push_back(0);
        while let Some(i) = queue.pop_front() {
            let cur = out[i].clone();
            for x in upper.ones() {
                if cur.contains(x) {
                    continue;
                }
                let mut gens = self.generators_of(&cur);
                gens.push(x);
                let k = self.closure(&gens);
                let key: Vec<usize> = k.ones().collect();
                if seen.insert(key) {
                    out.push(k);
                    queue.push_back(out.len() - 1);
                }
            }
        }
        out.sort_by_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
        out
    }
}
