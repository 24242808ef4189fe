//! Named groups accepted wherever a group file is expected.

use crate::error::{Error, Result};
use crate::group::Group;
use crate::perm::{parse_cycles, Perm};

pub const PRESET_NAMES: [&str; 13] =
    ["S3", "S4", "A4", "A5", "A6", "D8", "Q8", "SL23", "C2", "C3", "C4", "V4", "S3xC2"];

/// Degree and generators (cycle notation) of a named group.
pub fn preset_generators(name: &str) -> Option<(usize, Vec<Perm>)> {
    let (degree, gens): (usize, Vec<String>) = match name {
        "S3" => (3, vec!["(0 1 2)".into(), "(0 1)".into()]),
        "S4" => (4, vec!["(0 1 2 3)".into(), "(0 1)".into()]),
        "A4" => (4, vec!["(0 1 2)".into(), "(0 1)(2 3)".into()]),
        "A5" => (5, vec!["(0 1 2)".into(), "(0 1 2 3 4)".into()]),
        "A6" => (6, vec!["(0 1 2)".into(), "(1 2 3 4 5)".into()]),
        "D8" => (4, vec!["(0 1 2 3)".into(), "(0 2)".into()]),
        "Q8" => (8, vec!["(0 1 2 3)(4 5 6 7)".into(), "(0 4 2 6)(1 7 3 5)".into()]),
        "SL23" => return Some((8, sl23_generators())),
        "C2" => (2, vec!["(0 1)".into()]),
        "C3" => (3, vec!["(0 1 2)".into()]),
        "C4" => (4, vec!["(0 1 2 3)".into()]),
        "V4" => (4, vec!["(0 1)(2 3)".into(), "(0 2)(1 3)".into()]),
        "S3xC2" => (5, vec!["(0 1 2)".into(), "(0 1)".into(), "(3 4)".into()]),
        _ => return None,
    };
    Some((degree, gens.iter().map(|g| parse_cycles(g, degree).unwrap()).collect()))
}

pub fn preset(name: &str) -> Result<Group> {
    let (degree, gens) =
        preset_generators(name).ok_or_else(|| Error::Parse(format!("unknown preset {name:?}")))?;
    Group::generate(degree, &gens)
}

/// SL(2,3) acting on the eight nonzero vectors of F_3^2.
fn sl23_generators() -> Vec<Perm> {
    let vecs: Vec<(u8, u8)> =
        (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).filter(|&v| v != (0, 0)).collect();
    let idx = |v: (u8, u8)| vecs.iter().position(|&w| w == v).unwrap() as u16;
    let act = |m: [[u8; 2]; 2]| -> Perm {
        vecs.iter()
            .map(|&(a, b)| idx(((m[0][0] * a + m[0][1] * b) % 3, (m[1][0] * a + m[1][1] * b) % 3)))
            .collect()
    };
    vec![act([[1, 1], [0, 1]]), act([[0, 2], [1, 0]])]
}
