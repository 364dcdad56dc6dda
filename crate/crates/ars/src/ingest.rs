//! Event ingestion and the wholesale rebuild pipeline.
//!
//! A rebuild starts from an empty builder, streams every source through the
//! deduplicating insert, and freezes the result. Raw kernel keys are interned
//! per class into dense, class-contiguous kernel ids; raw object keys share a
//! single dense object id space.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::time::Instant;

use ars_core::{ClassId, GraphBuilder, GraphSnapshot, KernelClass, KernelId, ObjectId};
use serde::{Deserialize, Serialize};

use crate::config::{check_sources, SourceFormat, SourceSpec};
use crate::error::{Error, Result};

/// One well-formed event: a kernel key and the object it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub raw_kernel_key: String,
    pub raw_object_key: String,
}

impl RawEvent {
    pub fn new(kernel: impl Into<String>, object: impl Into<String>) -> Self {
        RawEvent {
            raw_kernel_key: kernel.into(),
            raw_object_key: object.into(),
        }
    }

    fn checked(kernel: &str, object: &str) -> Option<Self> {
        let bad = |s: &str| s.is_empty() || s.contains(['\n', '\r']);
        if bad(kernel) || bad(object) {
            None
        } else {
            Some(RawEvent::new(kernel, object))
        }
    }
}

#[derive(Deserialize)]
struct JsonEvent {
    kernel: String,
    object: String,
}

enum Lines<R: Read> {
    Csv(csv::StringRecordsIntoIter<R>),
    Jsonl(std::io::Lines<BufReader<R>>),
}

/// Streaming event parser. Malformed records are skipped and counted;
/// only I/O failures end the stream with an error.
pub struct EventReader<R: Read> {
    lines: Lines<R>,
    first: bool,
    malformed: u64,
}

impl<R: Read> EventReader<R> {
    pub fn new(format: SourceFormat, reader: R) -> Self {
        let lines = match format {
            SourceFormat::Csv => Lines::Csv(
                csv::ReaderBuilder::new()
                    .has_headers(false)
                    .flexible(true)
                    .trim(csv::Trim::All)
                    .from_reader(reader)
                    .into_records(),
            ),
            SourceFormat::Jsonl => Lines::Jsonl(BufReader::new(reader).lines()),
        };
        EventReader {
            lines,
            first: true,
            malformed: 0,
        }
    }

    pub fn malformed(&self) -> u64 {
        self.malformed
    }
}

impl<R: Read> Iterator for EventReader<R> {
    type Item = std::io::Result<RawEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let first = std::mem::replace(&mut self.first, false);
            let parsed = match &mut self.lines {
                Lines::Csv(records) => match records.next()? {
                    Ok(rec) => {
                        if first && rec.len() == 2 && &rec[0] == "kernel" && &rec[1] == "object" {
                            continue;
                        }
                        if rec.len() == 2 {
                            RawEvent::checked(&rec[0], &rec[1])
                        } else {
                            None
                        }
                    }
                    Err(e) if e.is_io_error() => match e.into_kind() {
                        csv::ErrorKind::Io(io) => return Some(Err(io)),
                        _ => unreachable!(),
                    },
                    Err(_) => None,
                },
                Lines::Jsonl(lines) => match lines.next()? {
                    Ok(line) if line.trim().is_empty() => continue,
                    Ok(line) => serde_json::from_str::<JsonEvent>(&line)
                        .ok()
                        .and_then(|ev| RawEvent::checked(&ev.kernel, &ev.object)),
                    Err(e) if e.kind() == std::io::ErrorKind::InvalidData => None,
                    Err(e) => return Some(Err(e)),
                },
            };
            match parsed {
                Some(ev) => return Some(Ok(ev)),
                None => self.malformed += 1,
            }
        }
    }
}

/// Opens the source file and returns a streaming parser over it.
pub fn parse_events(spec: &SourceSpec) -> Result<EventReader<File>> {
    let file = File::open(&spec.path).map_err(|e| Error::io(&spec.path, e))?;
    Ok(EventReader::new(spec.format, file))
}

/// Interning table: dense id ↔ (class, raw key). Kernel tables are scoped
/// per class, so the same raw key in two classes gets two ids; object tables
/// are global and record the class that first introduced each key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyMap {
    per_class: bool,
    entries: Vec<(u32, ClassId, String)>,
    lookup: HashMap<(Option<ClassId>, String), u32>,
}

impl KeyMap {
    pub fn kernels() -> Self {
        KeyMap {
            per_class: true,
            ..Default::default()
        }
    }

    pub fn objects() -> Self {
        KeyMap::default()
    }

    pub fn is_per_class(&self) -> bool {
        self.per_class
    }

    /// `(id, class, raw key)` in id order.
    pub fn entries(&self) -> &[(u32, ClassId, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Id of a raw key in a global table.
    pub fn id_of(&self, raw: &str) -> Option<u32> {
        self.lookup.get(&(None, raw.to_string())).copied()
    }

    /// Id of a raw key within one class of a per-class table.
    pub fn id_in_class(&self, class: ClassId, raw: &str) -> Option<u32> {
        self.lookup.get(&(Some(class), raw.to_string())).copied()
    }

    pub fn raw_of(&self, id: u32) -> Option<&str> {
        self.entries
            .binary_search_by_key(&id, |e| e.0)
            .ok()
            .map(|i| self.entries[i].2.as_str())
    }

    /// Returns the id of `raw`, assigning the next dense id if it is new.
    pub fn intern(&mut self, class: ClassId, raw: String) -> u32 {
        let scope = self.per_class.then_some(class);
        let entries = &mut self.entries;
        *self.lookup.entry((scope, raw)).or_insert_with_key(|(_, raw)| {
            let id = entries.len() as u32;
            entries.push((id, class, raw.clone()));
            id
        })
    }

    /// Inserts an entry read back from a sidecar file.
    pub(crate) fn insert(&mut self, id: u32, class: ClassId, raw: String) -> bool {
        let scope = self.per_class.then_some(class);
        if self.lookup.insert((scope, raw.clone()), id).is_some() {
            return false;
        }
        self.entries.push((id, class, raw));
        true
    }

    pub(crate) fn sort(&mut self) {
        self.entries.sort_unstable_by_key(|e| e.0);
    }
}

/// Per-class (or total) ingestion counters.
/// `arcs_emitted + duplicates_dropped + malformed_lines == events_read`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounts {
    pub events_read: u64,
    pub arcs_emitted: u64,
    pub duplicates_dropped: u64,
    pub malformed_lines: u64,
}

impl IngestCounts {
    fn add(&mut self, other: &IngestCounts) {
        self.events_read += other.events_read;
        self.arcs_emitted += other.arcs_emitted;
        self.duplicates_dropped += other.duplicates_dropped;
        self.malformed_lines += other.malformed_lines;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassIngest {
    pub class_id: ClassId,
    pub name: String,
    #[serde(flatten)]
    pub counts: IngestCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub classes: Vec<ClassIngest>,
    pub totals: IngestCounts,
    pub elapsed_seconds: f64,
}

impl IngestReport {
    /// Equality ignoring wall time.
    pub fn same_counts(&self, other: &IngestReport) -> bool {
        self.classes == other.classes && self.totals == other.totals
    }
}

/// Interned key tables produced by a build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyTables {
    pub kernels: KeyMap,
    pub objects: KeyMap,
}

impl Default for KeyTables {
    fn default() -> Self {
        KeyTables {
            kernels: KeyMap::kernels(),
            objects: KeyMap::objects(),
        }
    }
}

/// Everything a rebuild produces.
#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub snapshot: GraphSnapshot,
    pub report: IngestReport,
    pub keys: KeyTables,
}

/// In-memory rebuild: clear → deduplicating insert → freeze.
pub struct Ingestor {
    builder: GraphBuilder,
    keys: KeyTables,
    allowed: Option<HashSet<String>>,
    classes: Vec<ClassIngest>,
    started: Instant,
}

impl Ingestor {
    pub fn new(classes: &[KernelClass]) -> Result<Self> {
        Ok(Ingestor {
            builder: GraphBuilder::with_classes(classes.iter().cloned())?,
            keys: KeyTables::default(),
            allowed: None,
            classes: classes
                .iter()
                .map(|c| ClassIngest {
                    class_id: c.id,
                    name: c.name.clone(),
                    counts: IngestCounts::default(),
                })
                .collect(),
            started: Instant::now(),
        })
    }

    /// Restricts objects to the given raw keys; events naming any other
    /// object count as malformed.
    pub fn with_allowed_objects(mut self, allowed: HashSet<String>) -> Self {
        self.allowed = Some(allowed);
        self
    }

    fn counts(&mut self, class: ClassId) -> Result<&mut IngestCounts> {
        self.classes
            .iter_mut()
            .find(|c| c.class_id == class)
            .map(|c| &mut c.counts)
            .ok_or(Error::Graph(ars_core::Error::UnknownClass(class)))
    }

    pub fn push(&mut self, class: ClassId, event: RawEvent) -> Result<()> {
        self.counts(class)?.events_read += 1;
        if let Some(allowed) = &self.allowed {
            if !allowed.contains(&event.raw_object_key) {
                self.counts(class)?.malformed_lines += 1;
                return Ok(());
            }
        }
        let kernel = self.keys.kernels.intern(class, event.raw_kernel_key);
        let object = self.keys.objects.intern(class, event.raw_object_key);
        // per-class interning makes a kernel-class conflict impossible
        let inserted = self
            .builder
            .add_arc(KernelId(kernel), ObjectId(object), class)
            .expect("interned kernels belong to exactly one class");
        let counts = self.counts(class)?;
        if inserted {
            counts.arcs_emitted += 1;
        } else {
            counts.duplicates_dropped += 1;
        }
        Ok(())
    }

    /// Records malformed lines skipped by the parser.
    pub fn skipped(&mut self, class: ClassId, malformed: u64) -> Result<()> {
        let counts = self.counts(class)?;
        counts.events_read += malformed;
        counts.malformed_lines += malformed;
        Ok(())
    }

    pub fn finish(self) -> BuildOutput {
        let snapshot = self.builder.freeze();
        let mut totals = IngestCounts::default();
        for c in &self.classes {
            totals.add(&c.counts);
        }
        BuildOutput {
            snapshot,
            report: IngestReport {
                classes: self.classes,
                totals,
                elapsed_seconds: self.started.elapsed().as_secs_f64(),
            },
            keys: self.keys,
        }
    }
}

/// Reads an allow-list of raw object keys, one per line.
pub fn load_allowed_objects(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Rebuilds the graph from scratch out of every source, in order.
pub fn build_graph(sources: &[SourceSpec], allowed: Option<HashSet<String>>) -> Result<BuildOutput> {
    check_sources(sources)?;
    let classes = sources.iter().map(SourceSpec::class).collect::<Result<Vec<_>>>()?;
    let mut ingestor = Ingestor::new(&classes)?;
    if let Some(allowed) = allowed {
        ingestor = ingestor.with_allowed_objects(allowed);
    }
    for spec in sources {
        let mut events = parse_events(spec)?;
        for ev in events.by_ref() {
            let ev = ev.map_err(|e| Error::io(&spec.path, e))?;
            ingestor.push(spec.class_id, ev)?;
        }
        ingestor.skipped(spec.class_id, events.malformed())?;
    }
    Ok(ingestor.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(format: SourceFormat, text: &str) -> (Vec<RawEvent>, u64) {
        let mut r = EventReader::new(format, text.as_bytes());
        let events: Vec<_> = r.by_ref().map(|e| e.unwrap()).collect();
        (events, r.malformed())
    }

    #[test]
    fn csv_lines() {
        let (ev, bad) = read(SourceFormat::Csv, "ORD-1001,550\n,550\n");
        assert_eq!(ev, vec![RawEvent::new("ORD-1001", "550")]);
        assert_eq!(bad, 1);
    }

    #[test]
    fn csv_header_only_when_exact() {
        let (ev, bad) = read(SourceFormat::Csv, "kernel,object\nA,1\nkernel,object\n");
        assert_eq!(ev, vec![RawEvent::new("A", "1"), RawEvent::new("kernel", "object")]);
        assert_eq!(bad, 0);
        let (ev, _) = read(SourceFormat::Csv, "order,product\nA,1\n");
        assert_eq!(ev.len(), 2);
    }

    #[test]
    fn csv_wrong_arity_is_malformed() {
        let (ev, bad) = read(SourceFormat::Csv, "A,1,extra\nB\nC,2\nD,\n");
        assert_eq!(ev, vec![RawEvent::new("C", "2")]);
        assert_eq!(bad, 3);
    }

    #[test]
    fn jsonl_records() {
        let text = "{\"kernel\":\"sess-ab12\",\"object\":\"77\"}\n\nnot json\n{\"kernel\":\"x\"}\n{\"kernel\":\"\",\"object\":\"1\"}\n";
        let (ev, bad) = read(SourceFormat::Jsonl, text);
        assert_eq!(ev, vec![RawEvent::new("sess-ab12", "77")]);
        assert_eq!(bad, 3);
    }

    #[test]
    fn interning_is_per_class_and_dense() {
        let classes = [KernelClass::unnamed(1), KernelClass::unnamed(2)];
        let mut ing = Ingestor::new(&classes).unwrap();
        ing.push(ClassId(1), RawEvent::new("7", "p1")).unwrap();
        ing.push(ClassId(1), RawEvent::new("8", "p2")).unwrap();
        ing.push(ClassId(2), RawEvent::new("7", "p1")).unwrap();
        let out = ing.finish();
        // same raw key "7" in two classes -> two kernels
        assert_eq!(out.keys.kernels.entries().len(), 3);
        assert_eq!(out.snapshot.kernel_class(KernelId(0)), Some(ClassId(1)));
        assert_eq!(out.snapshot.kernel_class(KernelId(2)), Some(ClassId(2)));
        assert_eq!(out.keys.objects.id_of("p2"), Some(1));
        assert_eq!(out.keys.kernels.id_in_class(ClassId(2), "7"), Some(2));
        assert_eq!(out.keys.objects.raw_of(0), Some("p1"));
    }

    #[test]
    fn allow_list_filters_objects() {
        let classes = [KernelClass::unnamed(1)];
        let mut ing = Ingestor::new(&classes)
            .unwrap()
            .with_allowed_objects(["p1".to_string()].into());
        ing.push(ClassId(1), RawEvent::new("a", "p1")).unwrap();
        ing.push(ClassId(1), RawEvent::new("a", "gone")).unwrap();
        let out = ing.finish();
        assert_eq!(out.snapshot.arc_count(), 1);
        assert_eq!(out.report.totals.malformed_lines, 1);
        assert_eq!(out.report.totals.events_read, 2);
    }

    #[test]
    fn empty_sources_rejected() {
        assert!(matches!(build_graph(&[], None), Err(Error::Config(_))));
    }
}
