//! Permutations as image arrays, with cycle-notation parsing and printing.

use crate::error::{Error, Result};

/// `p[i]` is the image of point `i`.
pub type Perm = Vec<u16>;

pub fn identity(degree: usize) -> Perm {
    (0..degree as u16).collect()
}

/// `(a * b)(x) = a(b(x))`: apply `b` first.
pub fn compose(a: &[u16], b: &[u16]) -> Perm {
    b.iter().map(|&x| a[x as usize]).collect()
}

pub fn inverse(a: &[u16]) -> Perm {
    let mut out = vec![0u16; a.len()];
    for (i, &x) in a.iter().enumerate() {
        out[x as usize] = i as u16;
    }
    out
}

pub fn is_permutation(a: &[u16]) -> bool {
    let mut seen = vec![false; a.len()];
    for &x in a {
        let x = x as usize;
        if x >= a.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Parse `(0 1 2)(3 4)` (commas also accepted as separators). `()` is the identity.
pub fn parse_cycles(text: &str, degree: usize) -> Result<Perm> {
    let mut perm = identity(degree);
    let mut touched = vec![false; degree];
    let mut rest = text.trim();
    if rest.is_empty() {
        return Err(Error::Parse("empty permutation".into()));
    }
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return Err(Error::Parse(format!("expected '(' in {text:?}")));
        }
        let close = rest
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unclosed cycle in {text:?}")))?;
        let body = &rest[1..close];
        let mut cycle = Vec::new();
        for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let x: usize = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad point {tok:?} in {text:?}")))?;
            if x >= degree {
                return Err(Error::Parse(format!("point {x} out of range for degree {degree}")));
            }
            if touched[x] {
                return Err(Error::Parse(format!("point {x} repeated in {text:?}")));
            }
            touched[x] = true;
            cycle.push(x as u16);
        }
        for i in 0..cycle.len() {
            perm[cycle[i] as usize] = cycle[(i + 1) % cycle.len()];
        }
        rest = rest[close + 1..].trim_start();
    }
    Ok(perm)
}

/// Cycle notation with cycles starting at their smallest point; fixed points omitted.
pub fn format_cycles(p: &[u16]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] as usize == start {
            continue;
        }
        let mut cyc = vec![start];
        seen[start] = true;
        let mut x = p[start] as usize;
        while x != start {
            seen[x] = true;
            cyc.push(x);
            x = p[x] as usize;
        }
        out.push('(');
        out.push_str(&cyc.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "));
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_round_trip() {
        let p = parse_cycles("(0 2 1)(3 4)", 6).unwrap();
        assert_eq!(p, vec![2, 0, 1, 4, 3, 5]);
        assert_eq!(format_cycles(&p), "(0 2 1)(3 4)");
        assert_eq!(format_cycles(&identity(3)), "()");
        assert_eq!(parse_cycles("()", 3).unwrap(), identity(3));
    }

    #[test]
    fn malformed() {
        assert!(parse_cycles("(0 1", 3).is_err());
        assert!(parse_cycles("(0 0)", 3).is_err());
        assert!(parse_cycles("(0 5)", 3).is_err());
        assert!(parse_cycles("0 1", 3).is_err());
    }

    #[test]
    fn composition_order() {
        let a = parse_cycles("(0 1)", 3).unwrap();
        let b = parse_cycles("(1 2)", 3).unwrap();
        assert_eq!(compose(&a, &b), vec![1, 2, 0]);
        assert_eq!(compose(&a, &inverse(&a)), identity(3));
    }
}
