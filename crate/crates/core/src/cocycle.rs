//! Second cohomology with coefficients in `A = (Z/p)^k` and central
//! extensions of fusion and linking systems.
//!
//! Conventions: a group cocycle `ω(g, h)` lists the factor applied first
//! first, so the extended group multiplies as
//! `(h, b)(g, a) = (hg, a + b + ω(g, h))`; a category cocycle is keyed by
//! `(f, g)` for the composite `g ∘ f`, and `(g, b) ∘ (f, a) = (gf, a + b + ω(f, g))`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::central::{check_saturation_lift, is_central, quotient_fusion, SaturationLiftReport};
use crate::error::{Error, Result};
use crate::fusion::{conjugate_map, FusionSystem};
use crate::linking::{check_linking_axioms, linking_quotient, Inclusions, LinkingSystem, Morphism};
use crate::pgroup::{bits, dom, image_of, Map, Mask, PGroup, UNDEF};

pub const MAX_COHOMOLOGY_ORDER: usize = 16;

/// The coefficient group `(Z/p)^k`; elements are encoded in base `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coeff {
    pub p: usize,
    pub k: usize,
}

impl Coeff {
    pub fn new(p: usize, k: usize) -> Result<Coeff> {
        if !crate::group::is_prime(p) || k == 0 || p.pow(k as u32) > 256 {
            return Err(Error::Domain(format!("unsupported coefficient group (Z/{p})^{k}")));
        }
        Ok(Coeff { p, k })
    }
    pub fn order(&self) -> usize {
        self.p.pow(self.k as u32)
    }
    pub fn digits(&self, a: usize) -> Vec<usize> {
        let mut a = a;
        (0..self.k)
            .map(|_| {
                let d = a % self.p;
                a /= self.p;
                d
            })
            .collect()
    }
    pub fn from_digits(&self, d: &[usize]) -> usize {
        d.iter().rev().fold(0, |acc, &x| acc * self.p + x % self.p)
    }
    pub fn add(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        self.from_digits(&da.iter().zip(&db).map(|(x, y)| x + y).collect::<Vec<_>>())
    }
    pub fn neg(&self, a: usize) -> usize {
        self.from_digits(&self.digits(a).iter().map(|x| (self.p - x) % self.p).collect::<Vec<_>>())
    }
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }
    pub fn scale(&self, c: usize, a: usize) -> usize {
        self.from_digits(&self.digits(a).iter().map(|x| x * c).collect::<Vec<_>>())
    }
    pub fn unit(&self, j: usize) -> usize {
        self.p.pow(j as u32)
    }
}

impl std::fmt::Display for Coeff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.k == 1 {
            write!(f, "Z{}", self.p)
        } else {
            write!(f, "Z{}^{}", self.p, self.k)
        }
    }
}

/// Linear algebra over `F_p`.
mod fp {
    pub fn inv(a: usize, p: usize) -> usize {
        (1..p).find(|&b| a * b % p == 1).expect("unit")
    }

    /// Reduced row echelon form; returns pivot columns.
    pub fn rref(rows: &mut Vec<Vec<usize>>, ncols: usize, p: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            let Some(i) = (r..rows.len()).find(|&i| rows[i][c] % p != 0) else { continue };
            rows.swap(r, i);
            let iv = inv(rows[r][c], p);
            for x in rows[r].iter_mut() {
                *x = *x * iv % p;
            }
            let pr = rows[r].clone();
            for (j, row) in rows.iter_mut().enumerate() {
                if j != r && row[c] != 0 {
                    let f = row[c];
                    for (x, y) in row.iter_mut().zip(&pr) {
                        *x = (*x + p * p - f * y) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        pivots
    }

    /// Basis of `{x : M x = 0}`.
    pub fn nullspace(mut rows: Vec<Vec<usize>>, ncols: usize, p: usize) -> Vec<Vec<usize>> {
        let pivots = rref(&mut rows, ncols, p);
        let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0; ncols];
                v[f] = 1;
                for (row, &pc) in rows.iter().zip(&pivots) {
                    v[pc] = (p - row[f] % p) % p;
                }
                v
            })
            .collect()
    }

    /// Coordinates of `v` in the span of `basis` (which must be independent), if it lies there.
    pub fn solve(basis: &[Vec<usize>], v: &[usize], p: usize) -> Option<Vec<usize>> {
        let n = v.len();
        let m = basis.len();
        // Columns are the basis vectors followed by -v.
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r: Vec<usize> = basis.iter().map(|b| b[i] % p).collect();
                r.push((p - v[i] % p) % p);
                r
            })
            .collect();
        let ns = nullspace(rows, m + 1, p);
        let sol = ns.into_iter().find(|x| x[m] != 0)?;
        let s = inv(sol[m], p);
        Some(sol[..m].iter().map(|x| x * s % p).collect())
    }
}

/// A 2-cochain `S × S → A`, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupCocycle {
    pub coeff: Coeff,
    pub n: usize,
    pub table: Vec<usize>,
}

impl GroupCocycle {
    pub fn zero(coeff: Coeff, n: usize) -> GroupCocycle {
        GroupCocycle { coeff, n, table: vec![0; n * n] }
    }
    pub fn get(&self, g: usize, h: usize) -> usize {
        self.table[g * self.n + h]
    }
    pub fn is_reduced(&self) -> bool {
        (0..self.n).all(|x| self.get(0, x) == 0 && self.get(x, 0) == 0)
    }
    /// `ω(y,z) − ω(yx,z) + ω(x,zy) − ω(x,y) = 0` for all triples.
    pub fn is_cocycle(&self, s: &PGroup) -> bool {
        let c = &self.coeff;
        let n = self.n;
        (0..n).all(|x| {
            (0..n).all(|y| {
                (0..n).all(|z| {
                    let lhs = c.add(self.get(y, z), self.get(x, s.mul(z, y)));
                    let rhs = c.add(self.get(s.mul(y, x), z), self.get(x, y));
                    lhs == rhs
                })
            })
        })
    }
    pub fn add(&self, other: &GroupCocycle) -> GroupCocycle {
        let c = self.coeff;
        GroupCocycle {
            coeff: c,
            n: self.n,
            table: self.table.iter().zip(&other.table).map(|(&a, &b)| c.add(a, b)).collect(),
        }
    }
    /// `dμ(f, g) = μ(f) + μ(g) − μ(gf)`.
    pub fn coboundary(s: &PGroup, coeff: Coeff, mu: &[usize]) -> GroupCocycle {
        let n = s.order();
        let mut table = vec![0; n * n];
        for f in 0..n {
            for g in 0..n {
                table[f * n + g] = coeff.sub(coeff.add(mu[f], mu[g]), mu[s.mul(g, f)]);
            }
        }
        GroupCocycle { coeff, n, table }
    }
    /// `(φ^*ω)(x, y) = ω(φx, φy)` on the domain of `φ`.
    pub fn pullback(&self, phi: &[u8]) -> GroupCocycle {
        let n = self.n;
        let mut table = vec![0; n * n];
        for x in bits(dom(phi)) {
            for y in bits(dom(phi)) {
                table[x * n + y] = self.get(phi[x] as usize, phi[y] as usize);
            }
        }
        GroupCocycle { coeff: self.coeff, n, table }
    }
    fn component(&self, j: usize) -> Vec<usize> {
        self.table.iter().map(|&a| self.coeff.digits(a)[j]).collect()
    }
}

fn cochain_index(n: usize, x: usize, y: usize) -> Option<usize> {
    (x != 0 && y != 0).then(|| (x - 1) * (n - 1) + (y - 1))
}

/// `F_p`-valued reduced cochains on the subgroup `m`: coordinates are pairs of non-identity elements.
struct Cochains {
    p: usize,
    n: usize,
}

impl Cochains {
    fn dim(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }
    fn vec_of(&self, table: &[usize], m: Mask) -> Vec<usize> {
        let mut v = vec![0; self.dim()];
        for x in bits(m) {
            for y in bits(m) {
                if let Some(i) = cochain_index(self.n, x, y) {
                    v[i] = table[x * self.n + y] % self.p;
                }
            }
        }
        v
    }
    fn coboundaries(&self, s: &PGroup, m: Mask) -> Vec<Vec<usize>> {
        let p = self.p;
        bits(m)
            .filter(|&x| x != 0)
            .map(|x| {
                let mut v = vec![0; self.dim()];
                for f in bits(m) {
                    for g in bits(m) {
                        if let Some(i) = cochain_index(self.n, f, g) {
                            let mut val = 0;
                            if f == x {
                                val += 1;
                            }
                            if g == x {
                                val += 1;
                            }
                            if s.mul(g, f) == x {
                                val += p - 1;
                            }
                            v[i] = val % p;
                        }
                    }
                }
                v
            })
            .collect()
    }
}

/// `H²(S; A)`: representatives of a basis, over `F_p` per coordinate of `A`.
#[derive(Clone, Debug)]
pub struct H2 {
    pub coeff: Coeff,
    s: Arc<PGroup>,
    /// `F_p`-valued reduced cocycles whose classes form a basis of `H²(S; F_p)`.
    reps: Vec<Vec<usize>>,
    /// Basis of the coboundaries followed by `reps`, as cochain vectors.
    span: Vec<Vec<usize>>,
    nb: usize,
}

impl H2 {
    /// Dimension of `H²(S; F_p)`; `H²(S; A)` has dimension `k` times this.
    pub fn dim_fp(&self) -> usize {
        self.reps.len()
    }
    pub fn dim(&self) -> usize {
        self.reps.len() * self.coeff.k
    }
    pub fn s(&self) -> &Arc<PGroup> {
        &self.s
    }
    fn cochains(&self) -> Cochains {
        Cochains { p: self.coeff.p, n: self.s.order() }
    }
    /// The cocycle `Σ c_{(j,i)} rep_i e_j` for coordinates listed component by component.
    pub fn combination(&self, coords: &[usize]) -> GroupCocycle {
        let c = self.coeff;
        let n = self.s.order();
        let d = self.reps.len();
        let mut out = GroupCocycle::zero(c, n);
        for j in 0..c.k {
            for (i, rep) in self.reps.iter().enumerate() {
                let w = coords[j * d + i] % c.p;
                if w == 0 {
                    continue;
                }
                for x in 1..n {
                    for y in 1..n {
                        let v = rep[cochain_index(n, x, y).unwrap()] * w % c.p;
                        let val = c.scale(v, c.unit(j));
                        out.table[x * n + y] = c.add(out.table[x * n + y], val);
                    }
                }
            }
        }
        out
    }
    /// Coordinates of the class of a reduced cocycle.
    pub fn class_of(&self, w: &GroupCocycle) -> Result<Vec<usize>> {
        if w.coeff != self.coeff || !w.is_reduced() || !w.is_cocycle(&self.s) {
            return Err(Error::Domain("not a reduced cocycle with these coefficients".into()));
        }
        let ch = self.cochains();
        let mut out = vec![0; self.dim()];
        let d = self.reps.len();
        for j in 0..self.coeff.k {
            let v = ch.vec_of(&w.component(j), self.s.full());
            let sol = fp::solve(&self.span, &v, self.coeff.p)
                .ok_or_else(|| Error::Invariant("cocycle outside Z²".into()))?;
            out[j * d..(j + 1) * d].copy_from_slice(&sol[self.nb..]);
        }
        Ok(out)
    }
    pub fn cohomologous(&self, a: &GroupCocycle, b: &GroupCocycle) -> Result<bool> {
        Ok(self.class_of(a)? == self.class_of(b)?)
    }
}

/// Reduced cocycles modulo coboundaries by exact linear algebra; requires `|S| ≤ 16`.
pub fn h2_group(s: &Arc<PGroup>, coeff: Coeff) -> Result<H2> {
    let n = s.order();
    if n > MAX_COHOMOLOGY_ORDER {
        return Err(Error::Unsupported(format!("H² needs |S| ≤ {MAX_COHOMOLOGY_ORDER}")));
    }
    if coeff.p != s.p() {
        return Err(Error::Domain("A must be a p-group for the prime of S".into()));
    }
    let p = coeff.p;
    let ch = Cochains { p, n };
    if n == 1 {
        return Ok(H2 { coeff, s: s.clone(), reps: Vec::new(), span: Vec::new(), nb: 0 });
    }
    let mut eqs = Vec::new();
    for x in 1..n {
        for y in 1..n {
            for z in 1..n {
                let mut row = vec![0; ch.dim()];
                let mut put = |a: usize, b: usize, sign: usize| {
                    if let Some(i) = cochain_index(n, a, b) {
                        row[i] = (row[i] + sign) % p;
                    }
                };
                put(y, z, 1);
                put(s.mul(y, x), z, p - 1);
                put(x, s.mul(z, y), 1);
                put(x, y, p - 1);
                eqs.push(row);
            }
        }
    }
    let z = fp::nullspace(eqs, ch.dim(), p);
    let mut b = ch.coboundaries(s, s.full());
    fp::rref(&mut b, ch.dim(), p);
    let nb = b.len();
    let mut span = b;
    let mut reps = Vec::new();
    for v in z {
        if fp::solve(&span, &v, p).is_none() {
            span.push(v.clone());
            reps.push(v);
        }
    }
    Ok(H2 { coeff, s: s.clone(), reps, span, nb })
}

/// The subspace of `H²(S; A)` of classes `x` with `res_P x = φ^* res_Q x` for all centric `φ`.
#[derive(Clone, Debug)]
pub struct StableClasses {
    pub h2: H2,
    /// Basis of the stable subspace of `H²(S; F_p)` in the coordinates of `h2`.
    pub basis_fp: Vec<Vec<usize>>,
}

impl StableClasses {
    pub fn dim(&self) -> usize {
        self.basis_fp.len() * self.h2.coeff.k
    }
    /// Number of stable classes, `|H²(F; A)|`.
    pub fn order(&self) -> usize {
        self.h2.coeff.p.pow(self.dim() as u32)
    }
    pub fn contains(&self, coords: &[usize]) -> bool {
        let d = self.h2.dim_fp();
        let p = self.h2.coeff.p;
        (0..self.h2.coeff.k).all(|j| {
            let v = &coords[j * d..(j + 1) * d];
            v.iter().all(|&x| x == 0) || fp::solve(&self.basis_fp, v, p).is_some()
        })
    }
    /// All stable classes as `h2` coordinates, in a fixed order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let p = self.h2.coeff.p;
        let (k, d, m) = (self.h2.coeff.k, self.h2.dim_fp(), self.basis_fp.len());
        let total = p.pow((m * k) as u32);
        (0..total)
            .map(|mut idx| {
                let mut coords = vec![0; k * d];
                for j in 0..k {
                    for b in &self.basis_fp {
                        let c = idx % p;
                        idx /= p;
                        for i in 0..d {
                            coords[j * d + i] = (coords[j * d + i] + c * b[i]) % p;
                        }
                    }
                }
                coords
            })
            .collect()
    }
}

fn stable_subspace(h2: &H2, basis: Vec<Vec<usize>>, constraints: &[Map]) -> Vec<Vec<usize>> {
    let p = h2.coeff.p;
    let s = &h2.s;
    let ch = h2.cochains();
    let n = s.order();
    let mut w = basis;
    for phi in constraints {
        if w.is_empty() {
            break;
        }
        let pm = dom(phi);
        let cols: Vec<Vec<usize>> = w
            .iter()
            .map(|c| {
                let mut table = vec![0; n * n];
                for (i, rep) in h2.reps.iter().enumerate() {
                    if c[i] == 0 {
                        continue;
                    }
                    for x in 1..n {
                        for y in 1..n {
                            let v = rep[cochain_index(n, x, y).unwrap()];
                            table[x * n + y] = (table[x * n + y] + c[i] * v) % p;
                        }
                    }
                }
                let mut diff = vec![0; n * n];
                for x in bits(pm) {
                    for y in bits(pm) {
                        let pulled = table[phi[x] as usize * n + phi[y] as usize];
                        diff[x * n + y] = (table[x * n + y] + p - pulled) % p;
                    }
                }
                ch.vec_of(&diff, pm)
            })
            .collect();
        let cob = ch.coboundaries(s, pm);
        let ncols = cols.len() + cob.len();
        let rows: Vec<Vec<usize>> = (0..ch.dim())
            .map(|i| cols.iter().chain(cob.iter()).map(|c| c[i]).collect())
            .collect();
        let ns = fp::nullspace(rows, ncols, p);
        let mut combos: Vec<Vec<usize>> = ns
            .into_iter()
            .map(|x| {
                let mut v = vec![0; h2.dim_fp()];
                for (j, wj) in w.iter().enumerate() {
                    for i in 0..v.len() {
                        v[i] = (v[i] + x[j] * wj[i]) % p;
                    }
                }
                v
            })
            .filter(|v| v.iter().any(|&x| x != 0))
            .collect();
        fp::rref(&mut combos, h2.dim_fp(), p);
        w = combos;
    }
    w
}

/// Stable classes, computed from automorphisms of the Alperin subgroups and, when `|S| ≤ 8`,
/// cross-checked against all morphisms between centric subgroups.
pub fn h2_fusion_stable(f: &FusionSystem, coeff: Coeff) -> Result<StableClasses> {
    let s = f.s_arc();
    let h2 = h2_group(&s, coeff)?;
    let d = h2.dim_fp();
    let full: Vec<Vec<usize>> = (0..d).map(|i| (0..d).map(|j| (i == j) as usize).collect()).collect();
    let mut gens = Vec::new();
    for pid in f.alperin_subgroups()? {
        gens.extend(f.aut(pid));
    }
    let basis_fp = stable_subspace(&h2, full.clone(), &gens);
    if s.order() <= 8 {
        let all: Vec<Map> = f.centric_ids().into_iter().flat_map(|c| f.homs(c).to_vec()).collect();
        let check = stable_subspace(&h2, full, &all);
        if check != basis_fp {
            return Err(Error::Invariant("stable classes depend on the generating set".into()));
        }
    }
    Ok(StableClasses { h2, basis_fp })
}

/// `S̃ = S × A` with the twisted multiplication, and its projection to `S`.
#[derive(Clone, Debug)]
pub struct GroupExtension {
    pub cocycle: GroupCocycle,
    pub group: Arc<PGroup>,
    /// `enc[g * |A| + a]` is the element `(g, a)`.
    pub enc: Vec<u8>,
    /// `dec[x] = (g, a)`.
    pub dec: Vec<(usize, usize)>,
    pub tau: Vec<u8>,
    pub a_mask: Mask,
}

impl GroupExtension {
    pub fn elem(&self, g: usize, a: usize) -> usize {
        self.enc[g * self.cocycle.coeff.order() + a] as usize
    }
    pub fn preimage(&self, m: Mask) -> Mask {
        (0..self.tau.len()).filter(|&x| m >> self.tau[x] & 1 == 1).fold(0, |acc, x| acc | (1 << x))
    }
}

pub fn group_extension(s: &PGroup, w: &GroupCocycle) -> Result<GroupExtension> {
    let c = w.coeff;
    if w.n != s.order() || !w.is_reduced() || !w.is_cocycle(s) {
        return Err(Error::Domain("ω is not a reduced 2-cocycle on S".into()));
    }
    let na = c.order();
    let n = s.order() * na;
    if n > crate::pgroup::MAX_P_ORDER {
        return Err(Error::Unsupported("extension has more than 64 elements".into()));
    }
    let mut table = vec![0; n * n];
    for h in 0..s.order() {
        for b in 0..na {
            for g in 0..s.order() {
                for a in 0..na {
                    let prod = s.mul(h, g) * na + c.add(c.add(a, b), w.get(g, h));
                    table[(h * na + b) * n + g * na + a] = prod;
                }
            }
        }
    }
    let (group, enc) = PGroup::from_table(n, &table, s.p())?;
    let mut dec = vec![(0, 0); n];
    let mut tau = vec![0; n];
    for (i, &x) in enc.iter().enumerate() {
        dec[x as usize] = (i / na, i % na);
        tau[x as usize] = (i / na) as u8;
    }
    let a_mask = (0..na).fold(0 as Mask, |acc, a| acc | (1 << enc[a]));
    Ok(GroupExtension { cocycle: w.clone(), group: Arc::new(group), enc, dec, tau, a_mask })
}

/// First morphism of `F` with no lift `τ^{-1}(P) → τ^{-1}(Q)` restricting to the identity on `A`.
pub fn first_unliftable(f: &FusionSystem, e: &GroupExtension) -> Option<Map> {
    let s = f.s();
    let st = &e.group;
    let c = e.cocycle.coeff;
    let agens: Vec<usize> = (0..c.k).map(|j| e.elem(0, c.unit(j))).collect();
    for pid in 0..s.num_subgroups() {
        let gens = s.gens_of(s.sub(pid));
        let lifted: Vec<usize> = gens.iter().map(|&g| e.elem(g, 0)).chain(agens.iter().copied()).collect();
        for phi in f.homs(pid) {
            let total = c.order().pow(gens.len() as u32);
            let found = (0..total).any(|mut idx| {
                let mut images: Vec<usize> = gens
                    .iter()
                    .map(|&g| {
                        let a = idx % c.order();
                        idx /= c.order();
                        e.elem(phi[g] as usize, a)
                    })
                    .collect();
                images.extend(agens.iter().copied());
                st.extend_hom(&lifted, &images, st).is_some()
            });
            if !found {
                return Some(phi.clone());
            }
        }
    }
    None
}

/// Whether every morphism of `F` lifts to `S̃`; asserted to agree with membership of the class in the stable subspace.
pub fn lift_test(f: &FusionSystem, e: &GroupExtension, stable: &StableClasses) -> Result<bool> {
    let lifts = first_unliftable(f, e).is_none();
    let class = stable.h2.class_of(&e.cocycle)?;
    if lifts != stable.contains(&class) {
        return Err(Error::Invariant("lifting and stability disagree".into()));
    }
    Ok(lifts)
}

/// A reduced 2-cochain on the morphisms of a linking system, keyed by `(f, g)` for `g ∘ f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategoryCocycle {
    pub coeff: Coeff,
    pub values: HashMap<(usize, usize), usize>,
}

impl CategoryCocycle {
    pub fn zero(l: &LinkingSystem, coeff: Coeff) -> CategoryCocycle {
        CategoryCocycle { coeff, values: l.composition_table().keys().map(|&(g, f)| ((f, g), 0)).collect() }
    }
    pub fn get(&self, f: usize, g: usize) -> usize {
        self.values.get(&(f, g)).copied().unwrap_or(0)
    }
    /// Reducedness and `ω(g,h) − ω(gf,h) + ω(f,hg) − ω(f,g) = 0` on all composable triples.
    pub fn check(&self, l: &LinkingSystem) -> Result<()> {
        let c = &self.coeff;
        for &(g, f) in l.composition_table().keys() {
            if !self.values.contains_key(&(f, g)) {
                return Err(Error::Domain(format!("ω missing on ({f}, {g})")));
            }
        }
        for a in 0..l.num_objects() {
            let id = l.identity(a);
            for t in l.out_of(a) {
                if self.get(id, t) != 0 {
                    return Err(Error::Domain("ω is not reduced".into()));
                }
            }
            for t in l.into_obj(a) {
                if self.get(t, id) != 0 {
                    return Err(Error::Domain("ω is not reduced".into()));
                }
            }
        }
        for f in 0..l.num_morphisms() {
            for g in l.out_of(l.morphism(f).tgt) {
                let gf = l.compose(g, f).unwrap();
                for h in l.out_of(l.morphism(g).tgt) {
                    let hg = l.compose(h, g).unwrap();
                    let lhs = c.add(self.get(g, h), self.get(f, hg));
                    let rhs = c.add(self.get(gf, h), self.get(f, g));
                    if lhs != rhs {
                        return Err(Error::Domain(format!("cocycle condition fails on ({f}, {g}, {h})")));
                    }
                }
            }
        }
        Ok(())
    }
    /// `ω + dμ` with `dμ(f, g) = μ(f) + μ(g) − μ(gf)`.
    pub fn add_coboundary(&self, l: &LinkingSystem, mu: &[usize]) -> CategoryCocycle {
        let c = self.coeff;
        let values = self
            .values
            .iter()
            .map(|(&(f, g), &v)| {
                let gf = l.compose(g, f).unwrap();
                ((f, g), c.add(v, c.sub(c.add(mu[f], mu[g]), mu[gf])))
            })
            .collect();
        CategoryCocycle { coeff: c, values }
    }
    /// `ω_S(g, h) = ω(δ_S(g), δ_S(h))`.
    pub fn on_s(&self, l: &LinkingSystem) -> Result<GroupCocycle> {
        let so = l.s_object().ok_or_else(|| Error::Domain("S is not an object".into()))?;
        let n = l.s().order();
        let mut out = GroupCocycle::zero(self.coeff, n);
        for g in 0..n {
            for h in 0..n {
                out.table[g * n + h] = self.get(l.delta(so, g).unwrap(), l.delta(so, h).unwrap());
            }
        }
        Ok(out)
    }
}

/// A category cocycle on `L^q_S(G)` representing a stable class: the class is transferred to `G`
/// (scaled by `[G:S]^{-1}`), then corrected on each `O^p(C_G(P))` by its unique p'-order splitting.
pub fn category_cocycle_from_class(l: &LinkingSystem, w: &GroupCocycle) -> Result<CategoryCocycle> {
    let r = l.realization().ok_or_else(|| Error::Domain("needs a group-realized linking system".into()))?;
    let g = &r.group;
    let s = l.s();
    let c = w.coeff;
    let p = c.p;
    if w.n != s.order() || !w.is_reduced() || !w.is_cocycle(s) {
        return Err(Error::Domain("ω_S is not a reduced cocycle on S".into()));
    }
    let ng = g.order();
    let mut s_of = vec![UNDEF; ng];
    for (i, &x) in r.emb.iter().enumerate() {
        s_of[x] = i as u8;
    }
    // Right cosets S t: every u ∈ G is h(u)·t(u).
    let mut coset = vec![usize::MAX; ng];
    let mut h_part = vec![0usize; ng];
    let mut reps = Vec::new();
    for u in 0..ng {
        if coset[u] != usize::MAX {
            continue;
        }
        for (i, &x) in r.emb.iter().enumerate() {
            let v = g.mul(x, u);
            coset[v] = reps.len();
            h_part[v] = i;
        }
        reps.push(u);
    }
    let index = reps.len();
    if index % p == 0 {
        return Err(Error::Domain("S is not a Sylow subgroup".into()));
    }
    let scale = crate::cocycle::fp::inv(index % p, p);
    // Standard-convention cochain f(a, b) = ω(b, a); transfer Σ_t f(σ_t(g1), σ_{t g1}(g2)).
    let mut omega_g = vec![0usize; ng * ng];
    for g1 in 0..ng {
        for g2 in 0..ng {
            let mut acc = 0;
            for &t in &reps {
                let tg1 = g.mul(t, g1);
                let a = h_part[tg1];
                let t2 = reps[coset[tg1]];
                let b = h_part[g.mul(t2, g2)];
                acc = c.add(acc, w.get(b, a));
            }
            // Stored in the library convention: Ω(x, y) with x applied first.
            omega_g[g2 * ng + g1] = c.scale(scale, acc);
        }
    }
    let big = |x: usize, y: usize| omega_g[x * ng + y];
    if ng <= 400 {
        for x in 0..ng {
            for y in 0..ng {
                for z in 0..ng {
                    let lhs = c.add(big(y, z), big(x, g.mul(z, y)));
                    let rhs = c.add(big(g.mul(y, x), z), big(x, y));
                    if lhs != rhs {
                        return Err(Error::Invariant("transferred cochain is not a cocycle".into()));
                    }
                }
            }
        }
    }
    let h2 = h2_group(&l.fusion().s_arc(), c)?;
    let mut restricted = GroupCocycle::zero(c, s.order());
    for a in 0..s.order() {
        for b in 0..s.order() {
            restricted.table[a * s.order() + b] = big(r.emb[a], r.emb[b]);
        }
    }
    if !h2.cohomologous(&restricted, w)? {
        return Err(Error::Domain("the class is not stable, so it does not come from G".into()));
    }
    // p'-order splitting c_P on each kernel.
    let mut split: Vec<HashMap<usize, usize>> = Vec::new();
    for a in 0..l.num_objects() {
        let mut m = HashMap::new();
        for k in r.kernels[a].ones() {
            let ord = g.elem_order(k);
            let (mut u, mut acc) = (0usize, 0usize);
            for _ in 0..ord {
                acc = c.add(acc, big(u, k));
                u = g.mul(k, u);
            }
            let inv = crate::cocycle::fp::inv(ord % p, p);
            m.insert(k, c.neg(c.scale(inv, acc)));
        }
        split.push(m);
    }
    let mut values = HashMap::new();
    for (&(gt, ft), &h) in l.composition_table() {
        let (x, y, z) = (r.reps[ft], r.reps[gt], r.reps[h]);
        let k = g.mul(g.inv(z), g.mul(y, x));
        let a = l.morphism(ft).src;
        let ck = *split[a].get(&k).ok_or_else(|| Error::Invariant("coset representatives disagree".into()))?;
        values.insert((ft, gt), c.sub(c.sub(big(x, y), ck), big(k, z)));
    }
    let out = CategoryCocycle { coeff: c, values };
    out.check(l).map_err(|e| Error::Invariant(format!("derived category cocycle: {e}")))?;
    if !h2.cohomologous(&out.on_s(l)?, w)? {
        return Err(Error::Invariant("pullback along δ_S changes the class".into()));
    }
    Ok(out)
}

/// `(S̃, F̃, L̃₀)` built from a category cocycle, with its verification reports.
#[derive(Clone, Debug)]
pub struct CentralExtension {
    pub cocycle: CategoryCocycle,
    pub group: GroupExtension,
    /// Token `(t, a)` is morphism `t * |A| + a`.
    pub linking: LinkingSystem,
    pub saturation: SaturationLiftReport,
}

impl CentralExtension {
    pub fn fusion(&self) -> &FusionSystem {
        self.linking.fusion()
    }
    pub fn token(&self, t: usize, a: usize) -> usize {
        t * self.cocycle.coeff.order() + a
    }
}

pub fn central_extension_build(
    l: &LinkingSystem,
    incs: &Inclusions,
    w: &CategoryCocycle,
) -> Result<CentralExtension> {
    w.check(l)?;
    let mut obj: Vec<usize> = l.objects().to_vec();
    obj.sort_unstable();
    if obj != l.fusion().quasicentric_ids() {
        return Err(Error::Domain("central extensions are built on the quasicentric linking system".into()));
    }
    let c = w.coeff;
    let na = c.order();
    let s = l.s();
    let so = l.s_object().ok_or_else(|| Error::Domain("S is not an object".into()))?;
    let ge = group_extension(s, &w.on_s(l)?)?;
    let st = ge.group.clone();
    let nt = st.order();
    let cat = |f: usize, g: usize| w.get(f, g);
    let objects: Vec<usize> = (0..l.num_objects()).map(|a| st.sub_id(ge.preimage(l.object_mask(a)))).collect();
    // b' - b for δ_{P̃}(q, b) = (δ_P(q), b').
    let shift = |a: usize, q: usize| -> usize {
        let iota = incs.iota[a];
        c.sub(cat(iota, l.delta(so, q).unwrap()), cat(l.delta(a, q).unwrap(), iota))
    };
    let mut mors = Vec::with_capacity(l.num_morphisms() * na);
    for t in 0..l.num_morphisms() {
        let m = l.morphism(t);
        let (pa, qa) = (m.src, m.tgt);
        let mut proj = vec![UNDEF; nt];
        for x in bits(ge.preimage(l.object_mask(pa))) {
            let (q, b) = ge.dec[x];
            let y = m.proj[q] as usize;
            let b1 = c.add(b, shift(pa, q));
            let c1 = c.sub(c.add(b1, cat(l.delta(pa, q).unwrap(), t)), cat(t, l.delta(qa, y).unwrap()));
            let val = c.sub(c1, shift(qa, y));
            proj[x] = ge.elem(y, val) as u8;
        }
        for _ in 0..na {
            mors.push(Morphism { src: pa, tgt: qa, proj: proj.clone() });
        }
    }
    let mut comp = HashMap::new();
    for (&(g, f), &h) in l.composition_table() {
        let om = cat(f, g);
        for a in 0..na {
            for b in 0..na {
                comp.insert((g * na + b, f * na + a), h * na + c.add(c.add(a, b), om));
            }
        }
    }
    let mut delta = Vec::new();
    for (a, &oid) in objects.iter().enumerate() {
        let pm = st.sub(oid);
        let d = st.join(pm, st.centralizer(pm));
        let mut tab = HashMap::new();
        for x in bits(d) {
            let (q, b) = ge.dec[x];
            let t = l
                .delta(a, q)
                .ok_or_else(|| Error::Invariant("δ̃ leaves P·C_S(P)".into()))?;
            tab.insert(x, t * na + c.add(b, shift(a, q)));
        }
        delta.push(tab);
    }
    let seeds: Vec<Map> = mors.iter().map(|m| m.proj.clone()).collect();
    let ft = FusionSystem::generate(st.clone(), &seeds, false);
    if !ft.check_axioms().is_empty() {
        return Err(Error::Invariant("Im π̃ does not generate a fusion system over S̃".into()));
    }
    let lt = LinkingSystem::from_parts(ft.clone(), objects.clone(), mors, comp, delta)?;
    let report = check_linking_axioms(&lt);
    if !report.is_ok() {
        return Err(Error::Invariant(format!("L̃₀ fails the linking axioms: {report}")));
    }
    let a = ge.a_mask;
    if !is_central(&ft, a)? {
        return Err(Error::Invariant("A is not central in F̃".into()));
    }
    let saturation = check_saturation_lift(&ft, a, &objects)?;
    if !saturation.hypotheses_hold() || !saturation.saturated {
        return Err(Error::Invariant(format!("F̃ is not certified saturated: {saturation:?}")));
    }
    // F̃/A transported along τ is F.
    let q = quotient_fusion(&ft, a)?;
    let mut sigma = vec![UNDEF; q.system.s().order()];
    for x in 0..nt {
        sigma[q.proj[x] as usize] = ge.tau[x];
    }
    if q.system.transport(&sigma, l.fusion().s_arc()) != *l.fusion() {
        return Err(Error::Invariant("F̃/A is not F".into()));
    }
    let lq = linking_quotient(&lt, a)?;
    for (i, &rep) in lq.orbit_rep.iter().enumerate() {
        let orbit: Vec<usize> = (0..na).map(|b| rep / na * na + b).collect();
        let same = orbit.iter().all(|&u| {
            let m = lt.morphism(u);
            m.src == lt.morphism(rep).src && m.tgt == lt.morphism(rep).tgt
        });
        if !same || lq.quotient.morphism(i).proj != conjugate_map(&invert_onto(&sigma), &lift_proj(l, rep / na), q.system.s().order()) {
            return Err(Error::Invariant("L̃₀/A does not match L token by token".into()));
        }
    }
    Ok(CentralExtension { cocycle: w.clone(), group: ge, linking: lt, saturation })
}

fn invert_onto(sigma: &[u8]) -> Vec<u8> {
    let mut inv = vec![UNDEF; sigma.len()];
    for (x, &y) in sigma.iter().enumerate() {
        inv[y as usize] = x as u8;
    }
    inv
}

fn lift_proj(l: &LinkingSystem, t: usize) -> Map {
    l.morphism(t).proj.clone()
}

/// An explicit isomorphism between the extensions built from `ω` and `ω + dμ`:
/// `(g, a) ↦ (g, a − μ(δ_S g))` on `S̃` and `(f, a) ↦ (f, a − μ(f))` on morphisms.
#[derive(Clone, Debug)]
pub struct ExtensionIso {
    pub sigma: Map,
    pub tokens: Vec<usize>,
}

pub fn cohomologous_invariance(
    l: &LinkingSystem,
    incs: &Inclusions,
    w: &CategoryCocycle,
    mu: &[usize],
) -> Result<ExtensionIso> {
    let c = w.coeff;
    let na = c.order();
    if mu.len() != l.num_morphisms() || (0..l.num_objects()).any(|a| mu[l.identity(a)] != 0) {
        return Err(Error::Domain("μ must be a reduced 1-cochain on the morphisms".into()));
    }
    let e1 = central_extension_build(l, incs, w)?;
    let e2 = central_extension_build(l, incs, &w.add_coboundary(l, mu))?;
    let so = l.s_object().unwrap();
    let (g1, g2) = (&e1.group, &e2.group);
    let nt = g1.group.order();
    let mut sigma = vec![UNDEF; nt];
    for x in 0..nt {
        let (g, a) = g1.dec[x];
        sigma[x] = g2.elem(g, c.sub(a, mu[l.delta(so, g).unwrap()])) as u8;
    }
    let fail = |m: &str| Err(Error::Invariant(format!("cohomologous extensions: {m}")));
    for x in 0..nt {
        for y in 0..nt {
            if sigma[g1.group.mul(x, y)] as usize != g2.group.mul(sigma[x] as usize, sigma[y] as usize) {
                return fail("σ is not a homomorphism");
            }
        }
        if g2.tau[sigma[x] as usize] != g1.tau[x] {
            return fail("σ does not commute with τ");
        }
    }
    let tokens: Vec<usize> = (0..e1.linking.num_morphisms())
        .map(|u| {
            let (t, a) = (u / na, u % na);
            t * na + c.sub(a, mu[t])
        })
        .collect();
    let (l1, l2) = (&e1.linking, &e2.linking);
    for (&(g, f), &h) in l1.composition_table() {
        if l2.compose(tokens[g], tokens[f]) != Some(tokens[h]) {
            return fail("token map is not a functor");
        }
    }
    for u in 0..l1.num_morphisms() {
        let m1 = l1.morphism(u);
        if l2.morphism(tokens[u]).proj != conjugate_map(&sigma, &m1.proj, nt) {
            return fail("token map does not commute with π̃");
        }
    }
    for a in 0..l1.num_objects() {
        if l2.object_mask(a) != image_of(&sigma, l1.object_mask(a)) {
            return fail("objects do not correspond");
        }
        for (&x, &t) in l1.delta_table(a) {
            if l2.delta(a, sigma[x] as usize) != Some(tokens[t]) {
                return fail("token map does not commute with δ");
            }
        }
    }
    if e1.fusion().transport(&sigma, g2.group.clone()) != *e2.fusion() {
        return fail("σ does not carry F̃ to F̃'");
    }
    Ok(ExtensionIso { sigma, tokens })
}

/// Whether two extensions of `S` by `A` are equivalent through some `(g, a) ↦ (g, a + μ(g))`
/// carrying one extended fusion system to the other.
pub fn extensions_equivalent(e1: &CentralExtension, e2: &CentralExtension) -> bool {
    let (g1, g2) = (&e1.group, &e2.group);
    let c = g1.cocycle.coeff;
    let n = g1.cocycle.n;
    let na = c.order();
    let nt = g1.group.order();
    let total = na.pow((n - 1) as u32);
    (0..total).any(|mut idx| {
        let mut mu = vec![0; n];
        for m in mu.iter_mut().skip(1) {
            *m = idx % na;
            idx /= na;
        }
        let sigma: Map = (0..nt)
            .map(|x| {
                let (g, a) = g1.dec[x];
                g2.elem(g, c.add(a, mu[g])) as u8
            })
            .collect();
        let hom = (0..nt).all(|x| {
            (0..nt).all(|y| sigma[g1.group.mul(x, y)] as usize == g2.group.mul(sigma[x] as usize, sigma[y] as usize))
        });
        hom && e1.fusion().transport(&sigma, g2.group.clone()) == *e2.fusion()
    })
}

/// Builds one central extension per stable class and counts equivalence classes.
pub fn count_central_extensions(l: &LinkingSystem, incs: &Inclusions, coeff: Coeff) -> Result<(usize, usize)> {
    let stable = h2_fusion_stable(l.fusion(), coeff)?;
    let mut built: Vec<CentralExtension> = Vec::new();
    for coords in stable.classes() {
        let w = stable.h2.combination(&coords);
        let cw = category_cocycle_from_class(l, &w)?;
        built.push(central_extension_build(l, incs, &cw)?);
    }
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..built.len() {
        if !reps.iter().any(|&j| extensions_equivalent(&built[j], &built[i])) {
            reps.push(i);
        }
    }
    Ok((reps.len(), stable.order()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linking::{choose_inclusions, linking_from_group, Objects};
    use crate::presets::preset;

    fn pg(name: &str) -> Arc<PGroup> {
        let g = preset(name).unwrap();
        let p = if name == "C3" { 3 } else { 2 };
        Arc::new(PGroup::new(g, p).unwrap())
    }

    /// Brute force: count reduced cocycles and coboundaries over F_2.
    fn brute_h2_dim(s: &PGroup) -> usize {
        let n = s.order();
        let cells: Vec<(usize, usize)> = (1..n).flat_map(|x| (1..n).map(move |y| (x, y))).collect();
        let c = Coeff::new(2, 1).unwrap();
        let mut cocycles = 0usize;
        for bitsv in 0u64..(1u64 << cells.len()) {
            let mut w = GroupCocycle::zero(c, n);
            for (i, &(x, y)) in cells.iter().enumerate() {
                w.table[x * n + y] = (bitsv >> i & 1) as usize;
            }
            if w.is_cocycle(s) {
                cocycles += 1;
            }
        }
        let mut cob = std::collections::HashSet::new();
        for m in 0u64..(1u64 << (n - 1)) {
            let mut mu = vec![0; n];
            for x in 1..n {
                mu[x] = (m >> (x - 1) & 1) as usize;
            }
            cob.insert(GroupCocycle::coboundary(s, c, &mu).table);
        }
        (cocycles / cob.len()).trailing_zeros() as usize
    }

    #[test]
    fn h2_dimensions_match_enumeration() {
        let c = Coeff::new(2, 1).unwrap();
        for name in ["C2", "V4"] {
            let s = pg(name);
            assert_eq!(h2_group(&s, c).unwrap().dim(), brute_h2_dim(&s), "{name}");
        }
        assert_eq!(h2_group(&pg("C2"), c).unwrap().dim(), 1);
        assert_eq!(h2_group(&pg("V4"), c).unwrap().dim(), 3);
        assert_eq!(h2_group(&pg("V4"), Coeff::new(2, 2).unwrap()).unwrap().dim(), 6);
        assert_eq!(h2_group(&pg("D8"), c).unwrap().dim(), 3);
    }

    #[test]
    fn nontrivial_class_over_c2_gives_c4() {
        let s = pg("C2");
        let h2 = h2_group(&s, Coeff::new(2, 1).unwrap()).unwrap();
        let w = h2.combination(&[1]);
        let e = group_extension(&s, &w).unwrap();
        assert!((0..4).any(|x| e.group.elem_order(x) == 4));
        assert_eq!(h2.class_of(&w).unwrap(), vec![1]);
    }

    #[test]
    fn a4_extension_is_sl23() {
        let g = preset("A4").unwrap();
        let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let c = Coeff::new(2, 1).unwrap();
        let stable = h2_fusion_stable(l.fusion(), c).unwrap();
        assert_eq!(stable.dim(), 1);
        let coords = stable.classes().into_iter().find(|v| v.iter().any(|&x| x != 0)).unwrap();
        let w = stable.h2.combination(&coords);
        let cw = category_cocycle_from_class(&l, &w).unwrap();
        let e = central_extension_build(&l, &incs, &cw).unwrap();
        let target = FusionSystem::from_group_sylow(&preset("SL23").unwrap(), 2).unwrap();
        assert!(e.fusion().is_isomorphic(&target).unwrap());
        assert!(lift_test(l.fusion(), &e.group, &stable).unwrap());
    }

    #[test]
    fn s3_at_two_extends_to_the_minimal_system_on_c4() {
        let g = preset("S3").unwrap();
        let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let c = Coeff::new(2, 1).unwrap();
        let stable = h2_fusion_stable(l.fusion(), c).unwrap();
        assert_eq!(stable.order(), 2);
        let w = stable.h2.combination(&[1]);
        let e = central_extension_build(&l, &incs, &category_cocycle_from_class(&l, &w).unwrap()).unwrap();
        assert_eq!(e.group.group.order(), 4);
        assert!((0..4).any(|x| e.group.group.elem_order(x) == 4));
        assert_eq!(*e.fusion(), FusionSystem::minimal(e.group.group.clone()));
        assert_eq!(count_central_extensions(&l, &incs, c).unwrap(), (2, 2));
    }

    #[test]
    fn cohomologous_cocycles_give_isomorphic_extensions() {
        let g = preset("A4").unwrap();
        let l = linking_from_group(&g, &g.sylow(2), 2, Objects::Quasicentric).unwrap();
        let incs = choose_inclusions(&l).unwrap();
        let c = Coeff::new(2, 1).unwrap();
        let stable = h2_fusion_stable(l.fusion(), c).unwrap();
        let w = stable.h2.combination(&stable.classes()[1]);
        let cw = category_cocycle_from_class(&l, &w).unwrap();
        let mu: Vec<usize> = (0..l.num_morphisms())
            .map(|t| if l.morphism(t).src == l.morphism(t).tgt && t != l.identity(l.morphism(t).src) { t % 2 } else { 0 })
            .collect();
        let iso = cohomologous_invariance(&l, &incs, &cw, &mu).unwrap();
        assert_eq!(iso.tokens.len(), l.num_morphisms() * 2);
        // A cochain that is not reduced is rejected.
        let mut bad = mu.clone();
        bad[l.identity(0)] = 1;
        assert!(cohomologous_invariance(&l, &incs, &cw, &bad).is_err());
    }

    #[test]
    fn unstable_classes_do_not_lift() {
        let g = preset("S4").unwrap();
        let f = FusionSystem::from_group_sylow(&g, 2).unwrap();
        let c = Coeff::new(2, 1).unwrap();
        let stable = h2_fusion_stable(&f, c).unwrap();
        assert!(stable.dim() < stable.h2.dim());
        let s = f.s_arc();
        let h2 = &stable.h2;
        let mut unstable = 0;
        for idx in 1..(1usize << h2.dim()) {
            let coords: Vec<usize> = (0..h2.dim()).map(|i| idx >> i & 1).collect();
            let e = group_extension(&s, &h2.combination(&coords)).unwrap();
            if !lift_test(&f, &e, &stable).unwrap() {
                unstable += 1;
            }
        }
        assert_eq!(unstable, (1 << h2.dim()) - stable.order());
    }
}
