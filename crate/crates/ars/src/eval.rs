//! Replay evaluation and a random baseline.
//!
//! A recommendation is *effective* when the object the user went to next is
//! anywhere in the issued (possibly truncated) vector.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use ars_core::{effectiveness_hundredths, recommend, GraphSnapshot, ObjectId, RecommendationVector, Scored};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One recommendation opportunity: the anchor shown and what the user did next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub visit_key: String,
    pub anchor: ObjectId,
    pub followed: Option<ObjectId>,
    /// Optional day label (fourth column); enables the per-day breakdown.
    pub day: Option<String>,
}

impl LogEntry {
    pub fn new(visit_key: impl Into<String>, anchor: u32, followed: Option<u32>) -> Self {
        LogEntry {
            visit_key: visit_key.into(),
            anchor: ObjectId(anchor),
            followed: followed.map(ObjectId),
            day: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionLog {
    pub entries: Vec<LogEntry>,
}

impl InteractionLog {
    /// Reads `visit_key,anchor,followed[,day]` CSV. `followed` may be empty.
    /// A first line of exactly `visit_key,anchor,followed` (optionally
    /// `,day`) is a header.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let n = i + 1;
            let rec = rec.map_err(|e| Error::format(n, e.to_string()))?;
            if i == 0 && rec.get(0) == Some("visit_key") && rec.get(1) == Some("anchor") {
                continue;
            }
            if rec.len() < 3 || rec.len() > 4 {
                return Err(Error::format(n, "expected visit_key,anchor,followed[,day]"));
            }
            let id = |s: &str, what: &str| -> Result<u32> {
                s.parse()
                    .map_err(|_| Error::format(n, format!("{what} is not an object id: {s:?}")))
            };
            entries.push(LogEntry {
                visit_key: rec[0].to_string(),
                anchor: ObjectId(id(&rec[1], "anchor")?),
                followed: match &rec[2] {
                    "" => None,
                    s => Some(ObjectId(id(s, "followed")?)),
                },
                day: rec.get(3).filter(|d| !d.is_empty()).map(String::from),
            });
        }
        Ok(InteractionLog { entries })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayCounts {
    pub recommendations_issued: u64,
    pub effective: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub recommendations_issued: u64,
    pub effective: u64,
    /// Entries whose anchor is not in the snapshot. They are included in
    /// `recommendations_issued` and can never be effective.
    pub skipped_missing_anchor: u64,
    /// Rounded half-up to two decimals.
    pub effectiveness_pct: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub per_day: BTreeMap<String, DayCounts>,
}

fn pct(effective: u64, total: u64) -> f64 {
    effectiveness_hundredths(effective, total).expect("effective never exceeds issued") as f64 / 100.0
}

impl EvalReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "recommendations issued: {}", self.recommendations_issued)?;
        writeln!(f, "effective:              {}", self.effective)?;
        writeln!(f, "skipped (no anchor):    {}", self.skipped_missing_anchor)?;
        writeln!(f, "effectiveness:          {:.2}%", self.effectiveness_pct)?;
        for (day, c) in &self.per_day {
            writeln!(
                f,
                "  {day}: {}/{} = {:.2}%",
                c.effective,
                c.recommendations_issued,
                pct(c.effective, c.recommendations_issued)
            )?;
        }
        Ok(())
    }
}

/// Replays the log against any recommender. `recommender` returns `None`
/// when the anchor is unknown.
pub fn replay_with<F>(log: &InteractionLog, mut recommender: F) -> EvalReport
where
    F: FnMut(usize, &LogEntry) -> Option<RecommendationVector>,
{
    let mut issued = 0;
    let mut effective = 0;
    let mut skipped = 0;
    let mut per_day: BTreeMap<String, DayCounts> = BTreeMap::new();
    for (i, entry) in log.entries.iter().enumerate() {
        issued += 1;
        let hit = match recommender(i, entry) {
            Some(vector) => entry.followed.is_some_and(|f| vector.contains(f)),
            None => {
                skipped += 1;
                false
            }
        };
        effective += u64::from(hit);
        if let Some(day) = &entry.day {
            let d = per_day.entry(day.clone()).or_default();
            d.recommendations_issued += 1;
            d.effective += u64::from(hit);
        }
    }
    EvalReport {
        recommendations_issued: issued,
        effective,
        skipped_missing_anchor: skipped,
        effectiveness_pct: pct(effective, issued),
        per_day,
    }
}

/// Issues `recommend(anchor, limit)` for every entry and counts how many
/// followed objects were among the recommendations.
pub fn replay_evaluate(
    snapshot: &GraphSnapshot,
    log: &InteractionLog,
    limit: usize,
    use_weights: bool,
) -> Result<EvalReport> {
    if limit == 0 {
        return Err(Error::InvalidArgument("limit must be at least 1".into()));
    }
    let report = replay_with(log, |_, entry| {
        recommend(snapshot, entry.anchor, Some(limit), use_weights).ok()
    });
    if report.skipped_missing_anchor > 0 {
        tracing::warn!(
            skipped = report.skipped_missing_anchor,
            "log anchors missing from the snapshot"
        );
    }
    Ok(report)
}

/// Same replay with [`random_baseline`]; entry `i` uses seed `seed + i`.
pub fn replay_baseline(snapshot: &GraphSnapshot, log: &InteractionLog, limit: usize, seed: u64) -> Result<EvalReport> {
    if limit == 0 {
        return Err(Error::InvalidArgument("limit must be at least 1".into()));
    }
    Ok(replay_with(log, |i, entry| {
        if snapshot.kernels_of(entry.anchor).is_empty() {
            return None;
        }
        random_baseline(snapshot, entry.anchor, limit, seed.wrapping_add(i as u64)).ok()
    }))
}

/// Uniformly sampled distinct objects other than `anchor`, all scored 0.
/// Asking for more than are available returns all of them.
pub fn random_baseline(
    snapshot: &GraphSnapshot,
    anchor: ObjectId,
    limit: usize,
    seed: u64,
) -> Result<RecommendationVector> {
    if snapshot.objects().is_empty() {
        return Err(Error::InvalidArgument("snapshot has no objects".into()));
    }
    let candidates: Vec<ObjectId> = snapshot.objects().iter().copied().filter(|&o| o != anchor).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amount = limit.min(candidates.len());
    let picked = index::sample(&mut rng, candidates.len(), amount);
    Ok(picked
        .into_iter()
        .map(|i| Scored {
            object: candidates[i],
            score: 0,
        })
        .collect::<Vec<_>>()
        .into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_parsing() {
        let log =
            InteractionLog::read("visit_key,anchor,followed\nv1,1,2\nv2,1,\nv3,3,4,2021-05-01\n".as_bytes()).unwrap();
        assert_eq!(log.entries.len(), 3);
        assert_eq!(log.entries[1].followed, None);
        assert_eq!(log.entries[2].day.as_deref(), Some("2021-05-01"));
        assert!(InteractionLog::read("v1,x,2\n".as_bytes()).is_err());
        assert!(InteractionLog::read("v1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn empty_log() {
        let r = replay_with(&InteractionLog::default(), |_, _| None);
        assert_eq!(
            (r.recommendations_issued, r.effective, r.effectiveness_pct),
            (0, 0, 0.0)
        );
    }

    #[test]
    fn json_line_is_single_line() {
        let log = InteractionLog {
            entries: vec![LogEntry {
                day: Some("d1".into()),
                ..LogEntry::new("v", 1, Some(2))
            }],
        };
        let r = replay_with(&log, |_, _| {
            Some(
                vec![Scored {
                    object: ObjectId(2),
                    score: 1,
                }]
                .into(),
            )
        });
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        assert!(line.contains("\"effectiveness_pct\":100.0"));
        assert!(r.to_string().contains("d1: 1/1 = 100.00%"));
    }
}
