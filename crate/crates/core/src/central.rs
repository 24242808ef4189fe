//! Central subgroups of fusion systems, the center `Z_F(S)`, quotients `F/A`
//! and the saturation criterion for `F` in terms of `F/A`.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fusion::FusionSystem;
use crate::pgroup::{bits, compose, dom, img, is_identity_on, restrict, Map, Mask, PGroup, UNDEF};

fn check_in_center(s: &PGroup, a: Mask) -> Result<()> {
    if !s.is_subgroup(a) || a & !s.center(s.full()) != 0 {
        return Err(Error::Domain("A must be a subgroup of Z(S)".into()));
    }
    Ok(())
}

/// Whether every morphism extends to `PA` as the identity on `A`.
pub fn is_central(f: &FusionSystem, a: Mask) -> Result<bool> {
    let s = f.s();
    check_in_center(s, a)?;
    for pid in 0..s.num_subgroups() {
        let pm = s.sub(pid);
        let pa = s.sub_id(s.join(pm, a));
        for phi in f.homs(pid) {
            let ok = f
                .homs(pa)
                .iter()
                .any(|e| is_identity_on(e, a) && restrict(e, pm) == *phi);
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `Z_F(S)`: elements of `Z(S)` fixed by every morphism between centric subgroups.
pub fn center(f: &FusionSystem) -> Result<Mask> {
    if !f.is_saturated() {
        return Err(Error::Domain("the center is only defined here for saturated systems".into()));
    }
    let s = f.s();
    let mut z = s.center(s.full());
    for pid in f.centric_ids() {
        for phi in f.homs(pid) {
            z &= bits(z).filter(|&x| phi[x] as usize == x).fold(0, |acc, x| acc | (1 << x));
        }
    }
    if !is_central(f, z)? {
        return Err(Error::Invariant("Z_F(S) is not central".into()));
    }
    let zs = s.center(s.full());
    for &m in s.subgroups() {
        if m & !zs == 0 && m & z == z && m != z && is_central(f, m)? {
            return Err(Error::Invariant("a central subgroup is not contained in Z_F(S)".into()));
        }
    }
    Ok(z)
}

/// `F/A` over `S/A`, with the projection on element indices.
#[derive(Clone, Debug)]
pub struct QuotientFusion {
    pub system: FusionSystem,
    pub a: Mask,
    pub proj: Vec<u8>,
}

impl QuotientFusion {
    pub fn down(&self, m: Mask) -> Mask {
        bits(m).fold(0, |acc, x| acc | (1 << self.proj[x]))
    }
    /// The preimage of a subgroup of `S/A`.
    pub fn up(&self, m: Mask) -> Mask {
        (0..self.proj.len()).filter(|&x| m >> self.proj[x] & 1 == 1).fold(0, |acc, x| acc | (1 << x))
    }
    /// `φ/A` for a morphism `φ` defined on a subgroup containing `A`.
    pub fn induced(&self, phi: &[u8]) -> Map {
        let mut m = vec![UNDEF; self.system.s().order()];
        for x in bits(dom(phi)) {
            m[self.proj[x] as usize] = self.proj[phi[x] as usize];
        }
        m
    }
}

pub fn quotient_fusion(f: &FusionSystem, a: Mask) -> Result<QuotientFusion> {
    let s = f.s();
    if !is_central(f, a)? {
        return Err(Error::Domain("A is not central".into()));
    }
    let (sbar, proj) = s.quotient(a);
    let sbar = Arc::new(sbar);
    let mut homs = vec![Vec::new(); sbar.num_subgroups()];
    let mut q = QuotientFusion { system: FusionSystem::minimal(sbar.clone()), a, proj };
    for pid in 0..s.num_subgroups() {
        let pm = s.sub(pid);
        if a & !pm != 0 {
            continue;
        }
        let j = sbar.sub_id(q.down(pm));
        for phi in f.homs(pid) {
            homs[j].push(q.induced(phi));
        }
    }
    let system = FusionSystem::from_parts(sbar, homs)?;
    if !system.check_axioms().is_empty() {
        return Err(Error::Invariant("F/A is not a fusion system".into()));
    }
    q.system = system;
    Ok(q)
}

/// The statements relating centric, quasicentric and fully normalized subgroups of `F` and `F/A`,
/// each checked on every subgroup containing `A` (or every subgroup, for quasicentricity of `PA/A`).
pub fn check_quotient_lemmas(f: &FusionSystem, q: &QuotientFusion) -> Result<()> {
    let s = f.s();
    let fb = &q.system;
    let sb = fb.s();
    let a = q.a;
    let fail = |m: String| Err(Error::Invariant(m));
    let qsat = fb.is_saturated();
    let fsat = f.is_saturated();
    for pid in 0..s.num_subgroups() {
        let pm = s.sub(pid);
        let bar = sb.sub_id(q.down(s.join(pm, a)));
        if qsat && f.is_quasicentric(pid) && !fb.is_quasicentric(bar) {
            return fail(format!("subgroup {pid} is quasicentric but PA/A is not"));
        }
        if a & !pm != 0 {
            continue;
        }
        if fb.is_centric(bar) && !f.is_centric(pid) {
            return fail(format!("P/A is centric but subgroup {pid} is not"));
        }
        if qsat && fsat && fb.is_quasicentric(bar) && !f.is_quasicentric(pid) {
            return fail(format!("P/A is quasicentric but subgroup {pid} is not"));
        }
        if qsat && f.is_fully_normalized(pid) != fb.is_fully_normalized(bar) {
            return fail(format!("full normalization of subgroup {pid} differs from that of P/A"));
        }
        if qsat && f.is_fully_normalized(pid) {
            let nid = s.sub_id(s.normalizer(pm));
            for other in f.class_members(pid) {
                let nm = s.normalizer(s.sub(other));
                let nother = s.sub_id(nm);
                let ok = f
                    .homs(nother)
                    .iter()
                    .any(|psi| crate::pgroup::image_of(psi, s.sub(other)) == pm && img(psi) & !s.sub(nid) == 0);
                if !ok {
                    return fail(format!("no map N_S(P') -> N_S(P) carrying {other} to {pid}"));
                }
            }
        }
        if fsat && f.is_fully_normalized(pid) {
            let cbar = q.up(sb.centralizer(sb.sub(bar)));
            let homs = f.homs(pid);
            for phi in homs {
                let ind = q.induced(phi);
                for psi in homs {
                    if img(psi) != img(phi) || q.induced(psi) != ind {
                        continue;
                    }
                    let ok = bits(s.normalizer(pm) & cbar)
                        .any(|x| compose(phi, &s.conj_map(x, pm)) == *psi);
                    if !ok {
                        return fail(format!("two lifts of one map on subgroup {pid} differ by no c_x"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Outcome of the criterion deducing saturation of `F` from that of `F/A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationLiftReport {
    pub quotient_saturated: bool,
    /// `H` is closed under conjugacy and overgroups and contains the centrics.
    pub h_admissible: bool,
    /// First fully normalized `P ∈ H` (containing `A`) where the kernel condition fails.
    pub kernel_failure: Option<usize>,
    pub h_generated: bool,
    pub saturated: bool,
}

impl SaturationLiftReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.quotient_saturated && self.h_admissible && self.kernel_failure.is_none() && self.h_generated
    }
}

pub fn check_saturation_lift(f: &FusionSystem, a: Mask, h: &[usize]) -> Result<SaturationLiftReport> {
    let s = f.s();
    let q = quotient_fusion(f, a)?;
    let hs: HashSet<usize> = h.iter().copied().collect();
    let h_admissible = f.centric_ids().iter().all(|c| hs.contains(c))
        && h.iter().all(|&p| {
            f.class_members(p).iter().all(|c| hs.contains(c))
                && (0..s.num_subgroups()).all(|r| s.sub(p) & !s.sub(r) != 0 || hs.contains(&r))
        });
    let mut kernel_failure = None;
    for &pid in h {
        let pm = s.sub(pid);
        if a & !pm != 0 || !f.is_fully_normalized(pid) {
            continue;
        }
        let inner: HashSet<Map> = f.aut_s(pid).into_iter().collect();
        let bad = f.aut(pid).into_iter().any(|alpha| {
            bits(pm).all(|x| q.proj[alpha[x] as usize] == q.proj[x]) && !inner.contains(&alpha)
        });
        if bad {
            kernel_failure = Some(pid);
            break;
        }
    }
    let report = SaturationLiftReport {
        quotient_saturated: q.system.is_saturated(),
        h_admissible,
        kernel_failure,
        h_generated: f.is_h_generated(h),
        saturated: f.is_saturated(),
    };
    if report.hypotheses_hold() && !report.saturated {
        return Err(Error::Invariant("criterion hypotheses hold but F is not saturated".into()));
    }
    Ok(report)
}

/// A fusion system over `V4` with a central `A` of order 2 whose quotient is saturated but which is not:
/// `Aut_F(V4)` is generated by an automorphism trivial on `A` and on `V4/A`.
pub fn nonsaturated_central_example() -> Result<(FusionSystem, Mask)> {
    let g = crate::presets::preset("V4")?;
    let s = Arc::new(PGroup::new(g, 2)?);
    let a_elem = 1;
    let a: Mask = 1 | (1 << a_elem);
    let others: Vec<usize> = (1..4).filter(|&x| x != a_elem).collect();
    let mut alpha: Map = (0..4).map(|x| x as u8).collect();
    alpha[others[0]] = others[1] as u8;
    alpha[others[1]] = others[0] as u8;
    let f = FusionSystem::generate(s, &[alpha], true);
    Ok((f, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgroup::popcount;
    use crate::presets::preset;

    fn fs(name: &str, p: usize) -> FusionSystem {
        FusionSystem::from_group_sylow(&preset(name).unwrap(), p).unwrap()
    }

    #[test]
    fn centers() {
        assert_eq!(popcount(center(&fs("S4", 2)).unwrap()), 1);
        assert_eq!(popcount(center(&fs("SL23", 2)).unwrap()), 2);
        let d8 = fs("D8", 2);
        assert_eq!(center(&d8).unwrap(), d8.s().center(d8.s().full()));
    }

    #[test]
    fn centrality() {
        let f = fs("S4", 2);
        assert!(is_central(&f, 1).unwrap());
        let z = f.s().center(f.s().full());
        assert!(!is_central(&f, z).unwrap());
        assert!(is_central(&f, f.s().full()).is_err());
    }

    #[test]
    fn sl23_mod_center_is_a4() {
        let f = fs("SL23", 2);
        let z = f.s().center(f.s().full());
        let q = quotient_fusion(&f, z).unwrap();
        assert!(q.system.is_isomorphic(&fs("A4", 2)).unwrap());
        check_quotient_lemmas(&f, &q).unwrap();
    }

    #[test]
    fn nonsaturated_example_fails_kernel_condition_at_s() {
        let (f, a) = nonsaturated_central_example().unwrap();
        assert!(is_central(&f, a).unwrap());
        assert!(!f.is_saturated());
        let all: Vec<usize> = (0..f.s().num_subgroups()).collect();
        let r = check_saturation_lift(&f, a, &all).unwrap();
        assert!(r.quotient_saturated);
        assert_eq!(r.kernel_failure, Some(f.s().full_id()));
    }

    #[test]
    fn trivial_a_reduces_to_plain_checker() {
        for (g, p) in [("S4", 2), ("A4", 2), ("S3", 3)] {
            let f = fs(g, p);
            let r = check_saturation_lift(&f, 1, &f.quasicentric_ids()).unwrap();
            assert!(r.hypotheses_hold() && r.saturated);
        }
    }
}
