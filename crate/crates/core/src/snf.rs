//! Finitely generated abelian groups given by integer relations.
//!
//! Relations are first eliminated sparsely through unit pivots; whatever
//! survives is put in Smith normal form densely.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Sparse integer row, sorted by column, without zero entries.
pub type Row = Vec<(usize, i128)>;

fn overflow() -> Error {
    Error::Unsupported("integer overflow in relation elimination".into())
}

fn add_scaled(a: &Row, b: &Row, c: i128) -> Result<Row> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = b[j].1.checked_mul(c).ok_or_else(overflow)?;
            out.push((b[j].0, v));
            j += 1;
        } else {
            let v = b[j].1.checked_mul(c).and_then(|v| v.checked_add(a[i].1)).ok_or_else(overflow)?;
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(out)
}

/// Normalizes an unsorted row with possible repeats.
pub fn row_from(entries: impl IntoIterator<Item = (usize, i128)>) -> Row {
    let mut m: HashMap<usize, i128> = HashMap::new();
    for (c, v) in entries {
        *m.entry(c).or_insert(0) += v;
    }
    let mut out: Row = m.into_iter().filter(|&(_, v)| v != 0).collect();
    out.sort();
    out
}

/// Invariant factor decomposition `Z^rank ⊕ Z/t_1 ⊕ ... ⊕ Z/t_k` with `t_i | t_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub rank: usize,
    pub torsion: Vec<u128>,
}

impl AbelianInvariants {
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
    pub fn order(&self) -> Option<u128> {
        (self.rank == 0).then(|| self.torsion.iter().product())
    }
    /// Elementary divisors at the prime `p`: the `p`-parts of the torsion invariants.
    pub fn p_part(&self, p: u128) -> Vec<u128> {
        let mut out = Vec::new();
        for &t in &self.torsion {
            let mut q = 1;
            let mut t = t;
            while t % p == 0 {
                q *= p;
                t /= p;
            }
            if q > 1 {
                out.push(q);
            }
        }
        out
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|t| format!("Z/{t}")).collect();
        if self.rank > 0 {
            parts.insert(0, if self.rank == 1 { "Z".into() } else { format!("Z^{}", self.rank) });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Relations accumulated row by row; unit pivots are eliminated immediately.
#[derive(Clone, Debug)]
pub struct RelationModule {
    ngens: usize,
    pivots: HashMap<usize, Row>,
    rest: Vec<Row>,
}

impl RelationModule {
    pub fn new(ngens: usize) -> RelationModule {
        RelationModule { ngens, pivots: HashMap::new(), rest: Vec::new() }
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    /// Eliminates pivot columns from the top down until the leading column has no pivot.
    fn reduce_leading(&self, mut row: Row) -> Result<Row> {
        while let Some(&(c, v)) = row.last() {
            match self.pivots.get(&c) {
                Some(p) => row = add_scaled(&row, p, -v)?,
                None => break,
            }
        }
        Ok(row)
    }

    fn reduce_full(&self, mut row: Row) -> Result<Row> {
        loop {
            let hit = row.iter().rev().find(|(c, _)| self.pivots.contains_key(c)).copied();
            match hit {
                Some((c, v)) => row = add_scaled(&row, &self.pivots[&c], -v)?,
                None => return Ok(row),
            }
        }
    }

    pub fn add(&mut self, row: Row) -> Result<()> {
        if row.iter().any(|&(c, _)| c >= self.ngens) {
            return Err(Error::Domain("relation mentions an unknown generator".into()));
        }
        let mut row = self.reduce_leading(row)?;
        let Some(&(c, v)) = row.last() else { return Ok(()) };
        if v == 1 || v == -1 {
            if v == -1 {
                for e in row.iter_mut() {
                    e.1 = -e.1;
                }
            }
            self.pivots.insert(c, row);
        } else {
            self.rest.push(row);
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Abelianization> {
        let free: Vec<usize> = (0..self.ngens).filter(|c| !self.pivots.contains_key(c)).collect();
        let col_of: HashMap<usize, usize> = free.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut dense = Vec::new();
        for r in &self.rest {
            let r = self.reduce_full(r.clone())?;
            if r.is_empty() {
                continue;
            }
            let mut d = vec![0i128; free.len()];
            for (c, v) in r {
                d[col_of[&c]] = v;
            }
            dense.push(d);
        }
        dense.sort();
        dense.dedup();
        let invariants = smith_invariants(dense.clone(), free.len())?;
        let hnf = hermite(dense, free.len())?;
        Ok(Abelianization { module: self, col_of, hnf, invariants })
    }
}

/// The quotient `Z^n / relations`, with a membership test for the relation lattice.
#[derive(Clone, Debug)]
pub struct Abelianization {
    module: RelationModule,
    col_of: HashMap<usize, usize>,
    hnf: Vec<(usize, Vec<i128>)>,
    pub invariants: AbelianInvariants,
}

impl Abelianization {
    /// Whether `row` lies in the span of the relations, i.e. is zero in the quotient.
    pub fn is_zero(&self, row: Row) -> Result<bool> {
        let r = self.module.reduce_full(row)?;
        let mut d = vec![0i128; self.col_of.len()];
        for (c, v) in r {
            d[self.col_of[&c]] = v;
        }
        let mut k = 0;
        for c in 0..d.len() {
            if k < self.hnf.len() && self.hnf[k].0 == c {
                let (_, h) = &self.hnf[k];
                if d[c] % h[c] != 0 {
                    return Ok(false);
                }
                let q = d[c] / h[c];
                for j in c..d.len() {
                    d[j] = d[j].checked_sub(q.checked_mul(h[j]).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
                k += 1;
            } else if d[c] != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn hermite(mut rows: Vec<Vec<i128>>, ncols: usize) -> Result<Vec<(usize, Vec<i128>)>> {
    let mut out = Vec::new();
    for c in 0..ncols {
        loop {
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&i| rows[i][c].abs());
            let p = nz[0];
            for &i in &nz[1..] {
                let q = rows[i][c] / rows[p][c];
                for j in c..ncols {
                    rows[i][j] = rows[i][j]
                        .checked_sub(q.checked_mul(rows[p][j]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i][c] != 0) {
            let mut r = rows.swap_remove(i);
            if r[c] < 0 {
                r.iter_mut().for_each(|v| *v = -*v);
            }
            out.push((c, r));
        }
    }
    Ok(out)
}

/// Invariant factors of `Z^ncols / rowspace(m)`.
pub fn smith_invariants(mut m: Vec<Vec<i128>>, ncols: usize) -> Result<AbelianInvariants> {
    let nrows = m.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if m[i][j] != 0 && best.map_or(true, |(a, b)| m[i][j].abs() < m[a][b].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        for row in m.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..nrows {
                if m[i][t] != 0 {
                    let q = m[i][t] / m[t][t];
                    for j in t..ncols {
                        m[i][j] = m[i][j].checked_sub(q.checked_mul(m[t][j]).ok_or_else(overflow)?).ok_or_else(overflow)?;
                    }
                    if m[i][t] != 0 {
                        m.swap(t, i);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..ncols {
                if m[t][j] != 0 {
                    let q = m[t][j] / m[t][t];
                    for row in m.iter_mut().skip(t) {
                        row[j] = row[j].checked_sub(q.checked_mul(row[t]).ok_or_else(overflow)?).ok_or_else(overflow)?;
                    }
                    if m[t][j] != 0 {
                        for row in m.iter_mut() {
                            row.swap(t, j);
                        }
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            let d = m[t][t];
            let bad = (t + 1..nrows).find(|&i| (t + 1..ncols).any(|j| m[i][j] % d != 0));
            match bad {
                Some(i) => {
                    for j in t..ncols {
                        m[t][j] = m[t][j].checked_add(m[i][j]).ok_or_else(overflow)?;
                    }
                }
                None => break,
            }
        }
        diag.push(m[t][t].unsigned_abs());
        t += 1;
    }
    let rank = ncols - diag.len();
    let torsion = diag.into_iter().filter(|&d| d > 1).collect();
    Ok(AbelianInvariants { rank, torsion })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(n: usize, rows: &[&[(usize, i128)]]) -> AbelianInvariants {
        let mut m = RelationModule::new(n);
        for r in rows {
            m.add(row_from(r.iter().copied())).unwrap();
        }
        m.finish().unwrap().invariants
    }

    #[test]
    fn small_groups() {
        assert_eq!(ab(1, &[&[(0, 4)]]).torsion, vec![4]);
        assert_eq!(ab(2, &[&[(0, 2)], &[(1, 3)]]).torsion, vec![6]);
        assert_eq!(ab(2, &[&[(0, 2)], &[(1, 4)]]).torsion, vec![2, 4]);
        let free = ab(3, &[&[(0, 1), (1, -1)]]);
        assert_eq!((free.rank, free.torsion.len()), (2, 0));
        assert!(ab(2, &[&[(0, 1)], &[(1, 1), (0, 5)]]).is_trivial());
    }

    #[test]
    fn smith_matches_known_diagonal() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let inv = smith_invariants(m, 3).unwrap();
        assert_eq!(inv.torsion, vec![2, 6, 12]);
        assert_eq!(inv.rank, 0);
    }

    #[test]
    fn membership() {
        let mut m = RelationModule::new(2);
        m.add(row_from([(0, 2)])).unwrap();
        m.add(row_from([(0, 1), (1, -1)])).unwrap();
        let a = m.finish().unwrap();
        assert_eq!(a.invariants.torsion, vec![2]);
        assert!(a.is_zero(row_from([(1, 2)])).unwrap());
        assert!(!a.is_zero(row_from([(1, 1)])).unwrap());
        assert!(a.is_zero(row_from([(0, 1), (1, 1)])).unwrap());
    }
}
