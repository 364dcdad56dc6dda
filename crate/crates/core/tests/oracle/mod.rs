//! Brute-force reference implementations used by the tests. They work on a
//! plain list of `(kernel, object, class)` triples and share no code with the
//! engine.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub type RawArc = (u32, u32, u16);

/// Fixture F1: four kernels, five objects, two classes.
pub const F1: [RawArc; 8] = [
    (1, 1, 1),
    (1, 2, 1),
    (2, 1, 1),
    (2, 3, 1),
    (3, 2, 2),
    (3, 3, 2),
    (3, 4, 2),
    (4, 5, 1),
];

pub fn kernels_touching(arcs: &[RawArc], object: u32) -> BTreeSet<u32> {
    arcs.iter().filter(|a| a.1 == object).map(|a| a.0).collect()
}

/// For each object outside `seeds`, sums `weight(class(k))` (or 1) over the
/// kernels `k` that reach both the object and at least one seed. Returns
/// non-zero scores sorted by score descending then object ascending.
pub fn brute_recommend(arcs: &[RawArc], seeds: &[u32], weights: Option<&BTreeMap<u16, u32>>) -> Vec<(u32, u64)> {
    let pool: BTreeSet<u32> = seeds.iter().flat_map(|&s| kernels_touching(arcs, s)).collect();
    let all_objects: BTreeSet<u32> = arcs.iter().map(|a| a.1).collect();
    let mut out = Vec::new();
    for o in all_objects {
        if seeds.contains(&o) {
            continue;
        }
        let mut score = 0u64;
        for &k in &pool {
            if let Some(arc) = arcs.iter().find(|a| a.0 == k && a.1 == o) {
                score += match weights {
                    Some(w) => u64::from(*w.get(&arc.2).unwrap_or(&1)),
                    None => 1,
                };
            }
        }
        if score > 0 {
            out.push((o, score));
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Literal evaluation of
/// `SELECT object, count() AS degree_in FROM graph_g WHERE object <> m AND
/// kernel IN (SELECT kernel FROM graph_g WHERE object = m) GROUP BY object`.
/// Row order is unspecified, so the result is a map.
pub fn sql_degree_in(arcs: &[RawArc], m: u32) -> BTreeMap<u32, u64> {
    let inner: Vec<u32> = arcs.iter().filter(|r| r.1 == m).map(|r| r.0).collect();
    let mut groups = BTreeMap::new();
    for row in arcs.iter().filter(|r| r.1 != m && inner.contains(&r.0)) {
        *groups.entry(row.1).or_insert(0u64) += 1;
    }
    groups
}

/// Makes a triple list a valid graph: drops duplicate pairs and forces each
/// kernel onto the class of its first arc.
pub fn normalize(arcs: &[RawArc]) -> Vec<RawArc> {
    let mut class_of: BTreeMap<u32, u16> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &(k, o, c) in arcs {
        let c = *class_of.entry(k).or_insert(c);
        if seen.insert((k, o)) {
            out.push((k, o, c));
        }
    }
    out
}
