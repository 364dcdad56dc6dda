//! Synthetic graphs and build/query timing.
//!
//! Generated graphs follow the proportions of a real shop graph: objects are
//! about 1.1% of all elements, kernels 35.3% and arcs 63.6%, giving roughly
//! 1.8 arcs per kernel. Kernels are spread over six classes in the same
//! ratio as that shop's class sizes, and objects are drawn from a Zipf
//! popularity curve.

use std::io::Write;
use std::time::Instant;

use ars_core::{recommend, ClassId, ClassKind, GraphBuilder, GraphSnapshot, KernelClass, KernelId, ObjectId};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, Zipf};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{InteractionLog, LogEntry};
use crate::ingest::{BuildOutput, Ingestor, RawEvent};

const REF_OBJECTS: f64 = 2433.0;
const REF_KERNELS: f64 = 77850.0;
const REF_ELEMENTS: f64 = 220_453.0;
/// Kernels per class in the reference graph, classes 1..=6.
const REF_CLASS_KERNELS: [u32; 6] = [2025, 74227, 91, 261, 1244, 2];

/// Parameters of the synthetic event generator.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    /// Target `|N| + |E|`.
    pub target_elements: usize,
    /// Mean number of objects per kernel.
    pub mean_kernel_size: f64,
    /// Zipf exponent of object popularity.
    pub popularity_skew: f64,
}

impl SyntheticConfig {
    pub fn new(target_elements: usize) -> Self {
        SyntheticConfig {
            target_elements,
            mean_kernel_size: 1.8,
            popularity_skew: 1.0,
        }
    }
}

/// The six classes used by generated graphs.
pub fn synthetic_classes() -> Vec<KernelClass> {
    let spec = [
        (1, "orders", ClassKind::Behavioural),
        (2, "visits", ClassKind::Behavioural),
        (3, "categories", ClassKind::Static),
        (4, "series", ClassKind::Static),
        (5, "wishlists", ClassKind::Behavioural),
        (6, "experts", ClassKind::Mixed),
    ];
    spec.into_iter()
        .map(|(id, name, kind)| KernelClass::new(id as u16, name, kind, 1).expect("weight 1 is valid"))
        .collect()
}

/// Raw events per class, deterministic for a given config and seed.
pub fn generate_events(config: &SyntheticConfig, seed: u64) -> Vec<(ClassId, Vec<RawEvent>)> {
    let t = config.target_elements as f64;
    let num_objects = ((t * REF_OBJECTS / REF_ELEMENTS).round() as usize).max(2);
    let num_kernels = ((t * REF_KERNELS / REF_ELEMENTS).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = WeightedIndex::new(REF_CLASS_KERNELS).expect("positive weights");
    let extra = Poisson::new((config.mean_kernel_size - 1.0).max(1e-9)).expect("positive rate");
    let popularity = Zipf::new(num_objects as f64, config.popularity_skew).expect("valid zipf");

    let mut out: Vec<(ClassId, Vec<RawEvent>)> = (1..=6u16).map(|c| (ClassId(c), Vec::new())).collect();
    let mut members: Vec<usize> = Vec::new();
    for k in 0..num_kernels {
        let class = classes.sample(&mut rng);
        let size = (1 + extra.sample(&mut rng) as usize).min(num_objects);
        members.clear();
        let mut attempts = 0;
        while members.len() < size && attempts < 16 * size {
            attempts += 1;
            let o = popularity.sample(&mut rng) as usize - 1;
            if !members.contains(&o) {
                members.push(o);
            }
        }
        let kernel_key = format!("k{k}");
        for &o in &members {
            out[class].1.push(RawEvent::new(kernel_key.clone(), format!("p{o}")));
        }
    }
    out
}

/// Runs generated events through the rebuild pipeline.
pub fn build_synthetic(events: &[(ClassId, Vec<RawEvent>)]) -> BuildOutput {
    let mut ingestor = Ingestor::new(&synthetic_classes()).expect("distinct classes");
    for (class, evs) in events {
        for ev in evs {
            ingestor.push(*class, ev.clone()).expect("class is declared");
        }
    }
    ingestor.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    /// `|N| + |E|` of the generated graph.
    pub elements: usize,
    /// Mean build time over the repetitions.
    pub build_seconds: f64,
    pub mean_query_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchSeries {
    pub rows: Vec<BenchRow>,
    /// Every individual `(elements, build_seconds)` measurement.
    pub samples: Vec<(usize, f64)>,
}

impl BenchSeries {
    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "elements,build_seconds,mean_query_seconds")?;
        }
        for r in &self.rows {
            writeln!(out, "{},{:.6},{:.9}", r.elements, r.build_seconds, r.mean_query_seconds)?;
        }
        out.flush()
    }
}

/// Mean wall time of `recommend` over `count` anchors sampled from the
/// snapshot's objects.
pub fn mean_query_seconds(snapshot: &GraphSnapshot, count: usize, seed: u64) -> f64 {
    let objects = snapshot.objects();
    if objects.is_empty() || count == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors: Vec<ObjectId> = (0..count)
        .map(|_| objects[rng.random_range(0..objects.len())])
        .collect();
    let start = Instant::now();
    for &m in &anchors {
        let v = recommend(snapshot, m, None, false).expect("anchor is in the snapshot");
        std::hint::black_box(v);
    }
    start.elapsed().as_secs_f64() / count as f64
}

/// For each size step: generate a graph, time `reps` rebuilds and 100 queries.
pub fn scaling_bench(steps: &[usize], seed: u64, reps: usize) -> Result<BenchSeries> {
    if steps.is_empty() || steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "size steps must be non-empty and strictly increasing".into(),
        ));
    }
    let reps = reps.max(1);
    let mut series = BenchSeries::default();
    for &step in steps {
        let events = generate_events(&SyntheticConfig::new(step), seed);
        let mut total = 0.0;
        let mut last = None;
        for _ in 0..reps {
            let start = Instant::now();
            let out = build_synthetic(&events);
            let secs = start.elapsed().as_secs_f64();
            let elements = out.snapshot.node_count() + out.snapshot.arc_count();
            series.samples.push((elements, secs));
            total += secs;
            last = Some(out.snapshot);
        }
        let snapshot = last.expect("at least one repetition");
        let elements = snapshot.node_count() + snapshot.arc_count();
        if series.rows.last().is_some_and(|r| r.elements >= elements) {
            return Err(Error::InvalidArgument(format!(
                "step {step} produced {elements} elements, not more than the previous step"
            )));
        }
        series.rows.push(BenchRow {
            elements,
            build_seconds: total / reps as f64,
            mean_query_seconds: mean_query_seconds(&snapshot, 100, seed),
        });
    }
    Ok(series)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation, ties given their average rank.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// A graph with planted co-occurring pairs and a log that follows them.
///
/// Objects `2i` and `2i + 1` (for `i < pairs`) appear together in
/// `pair_kernels` kernels each; every other kernel holds two random objects.
/// The log visits one side of a pair and follows to the other.
pub fn planted_corpus(seed: u64) -> (GraphSnapshot, InteractionLog) {
    const OBJECTS: u32 = 200;
    const PAIRS: u32 = 20;
    const PAIR_KERNELS: u32 = 6;
    const NOISE_KERNELS: u32 = 600;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::with_classes([KernelClass::unnamed(1)]).expect("one class");
    let mut kernel = 0u32;
    let add = |b: &mut GraphBuilder, k: u32, o: u32| {
        b.add_arc(KernelId(k), ObjectId(o), ClassId(1)).expect("class declared");
    };
    for i in 0..PAIRS {
        for _ in 0..PAIR_KERNELS {
            add(&mut b, kernel, 2 * i);
            add(&mut b, kernel, 2 * i + 1);
            kernel += 1;
        }
    }
    for _ in 0..NOISE_KERNELS {
        let x = rng.random_range(0..OBJECTS);
        let y = rng.random_range(0..OBJECTS);
        add(&mut b, kernel, x);
        add(&mut b, kernel, y);
        kernel += 1;
    }
    let mut entries = Vec::new();
    for n in 0..200 {
        let i = rng.random_range(0..PAIRS);
        let (a, c) = if rng.random_bool(0.5) {
            (2 * i, 2 * i + 1)
        } else {
            (2 * i + 1, 2 * i)
        };
        entries.push(LogEntry::new(format!("v{n}"), a, Some(c)));
    }
    (b.freeze(), InteractionLog { entries })
}
