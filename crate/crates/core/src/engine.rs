//! Incoming-degree recommendation over a [`GraphSnapshot`].
//!
//! For an anchor object `m` the engine walks `m → kernels(m) → objects`,
//! giving every reached object one point per shared kernel (or the kernel's
//! class weight when weighting is on). Candidates are ranked by score
//! descending, then by object id ascending; `m` itself never appears.
//!
//! The path variant pools the kernels of several seed objects and excludes
//! all seeds from the output.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::{Arc, Error, GraphSnapshot, KernelId, ObjectId, Result};

/// A node-and-arc restriction of the snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Subgraph {
    pub kernels: Vec<KernelId>,
    pub objects: Vec<ObjectId>,
    pub arcs: Vec<Arc>,
}

/// Candidate object → score. Every key shares at least one kernel with the
/// anchor and every score is at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScoreMap(BTreeMap<ObjectId, u64>);

impl ScoreMap {
    pub fn get(&self, object: ObjectId) -> Option<u64> {
        self.0.get(&object).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries in ascending object order.
    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, u64)> + '_ {
        self.0.iter().map(|(&o, &s)| (o, s))
    }

    /// Ranks the entries: score descending, object ascending.
    pub fn into_ranked(self, limit: Option<usize>) -> RecommendationVector {
        let mut items: Vec<Scored> = self
            .0
            .into_iter()
            .map(|(object, score)| Scored { object, score })
            .collect();
        items.sort_unstable_by(|a, b| b.score.cmp(&a.score).then(a.object.cmp(&b.object)));
        if let Some(limit) = limit {
            items.truncate(limit);
        }
        RecommendationVector(items)
    }
}

/// One ranked recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scored {
    pub object: ObjectId,
    pub score: u64,
}

/// Ranked output of the engine, best first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RecommendationVector(Vec<Scored>);

impl RecommendationVector {
    pub fn into_inner(self) -> Vec<Scored> {
        self.0
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.0.iter().map(|s| s.object)
    }

    pub fn contains(&self, object: ObjectId) -> bool {
        self.0.iter().any(|s| s.object == object)
    }

    /// The entries sharing the top score: the set of best recommendations.
    pub fn top_set(&self) -> &[Scored] {
        match self.0.first() {
            Some(first) => {
                let end = self
                    .0
                    .iter()
                    .position(|s| s.score != first.score)
                    .unwrap_or(self.0.len());
                &self.0[..end]
            }
            None => &[],
        }
    }
}

impl From<Vec<Scored>> for RecommendationVector {
    fn from(v: Vec<Scored>) -> Self {
        RecommendationVector(v)
    }
}

impl Deref for RecommendationVector {
    type Target = [Scored];

    fn deref(&self) -> &[Scored] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a RecommendationVector {
    type Item = &'a Scored;
    type IntoIter = core::slice::Iter<'a, Scored>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Ordered, non-empty list of distinct seed objects. The first seed is the
/// object the user started from; later seeds are objects visited after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet(Vec<ObjectId>);

impl SeedSet {
    pub fn new(seeds: impl IntoIterator<Item = ObjectId>) -> Result<Self> {
        let seeds: Vec<ObjectId> = seeds.into_iter().collect();
        if seeds.is_empty() {
            return Err(Error::EmptySeedSet);
        }
        for (i, s) in seeds.iter().enumerate() {
            if seeds[..i].contains(s) {
                return Err(Error::DuplicateSeed(*s));
            }
        }
        Ok(SeedSet(seeds))
    }

    pub fn single(object: ObjectId) -> Self {
        SeedSet(alloc::vec![object])
    }

    pub fn as_slice(&self) -> &[ObjectId] {
        &self.0
    }
}

fn anchor_kernels(snapshot: &GraphSnapshot, m: ObjectId) -> Result<&[KernelId]> {
    let kernels = snapshot.kernels_of(m);
    if kernels.is_empty() {
        Err(Error::ObjectNotFound(m))
    } else {
        Ok(kernels)
    }
}

/// `m`, its kernels, and the arcs between them.
pub fn neighborhood_first(snapshot: &GraphSnapshot, m: ObjectId) -> Result<Subgraph> {
    let kernels = anchor_kernels(snapshot, m)?;
    let arcs = kernels
        .iter()
        .map(|&k| Arc {
            kernel: k,
            object: m,
            class_id: snapshot.kernel_class(k).expect("indexed kernel has a class"),
        })
        .collect();
    Ok(Subgraph {
        kernels: kernels.to_vec(),
        objects: alloc::vec![m],
        arcs,
    })
}

/// `m`'s kernels, every object they reach, and all their outgoing arcs.
pub fn neighborhood_second(snapshot: &GraphSnapshot, m: ObjectId) -> Result<Subgraph> {
    let kernels = anchor_kernels(snapshot, m)?;
    let mut arcs = Vec::new();
    let mut objects = Vec::new();
    for &k in kernels {
        let session = snapshot.session_of(k)?;
        arcs.extend_from_slice(session.arcs);
        objects.extend_from_slice(session.objects);
    }
    objects.sort_unstable();
    objects.dedup();
    Ok(Subgraph {
        kernels: kernels.to_vec(),
        objects,
        arcs,
    })
}

fn accumulate(snapshot: &GraphSnapshot, pool: &[KernelId], excluded: &[ObjectId], use_weights: bool) -> ScoreMap {
    let mut scores: BTreeMap<ObjectId, u64> = BTreeMap::new();
    for &k in pool {
        let session = match snapshot.session_of(k) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let w = if use_weights {
            u64::from(snapshot.weight_of(session.class_id))
        } else {
            1
        };
        for &o in session.objects {
            if !excluded.contains(&o) {
                *scores.entry(o).or_insert(0) += w;
            }
        }
    }
    ScoreMap(scores)
}

/// Score of every object `o ≠ m` sharing a kernel with `m`: the number of
/// shared kernels, or the sum of their class weights.
pub fn score_in_degrees(snapshot: &GraphSnapshot, m: ObjectId, use_weights: bool) -> Result<ScoreMap> {
    let pool = anchor_kernels(snapshot, m)?;
    Ok(accumulate(snapshot, pool, &[m], use_weights))
}

/// Ranked recommendations for `m`, truncated to `limit` when given.
pub fn recommend(
    snapshot: &GraphSnapshot,
    m: ObjectId,
    limit: Option<usize>,
    use_weights: bool,
) -> Result<RecommendationVector> {
    Ok(score_in_degrees(snapshot, m, use_weights)?.into_ranked(limit))
}

/// Ranked recommendations for a path of visited objects. Kernels of all
/// seeds are pooled as a set, so a kernel shared by two seeds counts once.
pub fn recommend_for_path(
    snapshot: &GraphSnapshot,
    seeds: &SeedSet,
    limit: Option<usize>,
    use_weights: bool,
) -> Result<RecommendationVector> {
    let mut pool: Vec<KernelId> = Vec::new();
    for &seed in seeds.as_slice() {
        pool.extend_from_slice(anchor_kernels(snapshot, seed)?);
    }
    pool.sort_unstable();
    pool.dedup();
    Ok(accumulate(snapshot, &pool, seeds.as_slice(), use_weights).into_ranked(limit))
}
