//! Canonical edge-list persistence and its sidecar files.
//!
//! The edge list holds one arc per line as `kernel,object,class` in decimal,
//! sorted by `(kernel, object)`, LF-terminated, with no header. Sidecars sit
//! next to it and share its file name as a prefix:
//!
//! * `<edges>.classes`: `class_id,name,kind,weight`
//! * `<edges>.kernels.map`, `<edges>.objects.map`: `interned_id,class_id,raw_key`
//! * `<edges>.report.json`: the ingest report of the build

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ars_core::{ClassId, GraphBuilder, GraphSnapshot, KernelClass, KernelId, ObjectId};

use crate::error::{Error, Result};
use crate::ingest::{BuildOutput, KeyMap, KeyTables};

/// Path of a sidecar: `graph.csv` + `.classes` → `graph.csv.classes`.
pub fn sidecar(edges: &Path, suffix: &str) -> PathBuf {
    let mut name: OsString = edges.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn write_edge_list<W: Write>(snapshot: &GraphSnapshot, mut out: W) -> std::io::Result<u64> {
    let mut bytes = 0u64;
    let mut line = String::with_capacity(32);
    for arc in snapshot.arcs() {
        line.clear();
        use std::fmt::Write as _;
        let _ = writeln!(line, "{},{},{}", arc.kernel, arc.object, arc.class_id);
        out.write_all(line.as_bytes())?;
        bytes += line.len() as u64;
    }
    out.flush()?;
    Ok(bytes)
}

/// Writes the canonical edge list; returns the number of bytes written.
pub fn save_edge_list(snapshot: &GraphSnapshot, sink: &Path) -> Result<u64> {
    let file = File::create(sink).map_err(|e| Error::io(sink, e))?;
    write_edge_list(snapshot, BufWriter::new(file)).map_err(|e| Error::io(sink, e))
}

fn field<T: std::str::FromStr>(raw: Option<&str>, line: usize, what: &str) -> Result<T> {
    let raw = raw.ok_or_else(|| Error::format(line, format!("missing {what} field")))?;
    if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::format(line, format!("{what} is not a decimal integer: {raw:?}")));
    }
    raw.parse()
        .map_err(|_| Error::format(line, format!("{what} out of range: {raw}")))
}

/// Parses an edge list. Classes seen in the file are registered with weight
/// 1; pass `classes` to replace that table afterwards.
pub fn read_edge_list<R: BufRead>(reader: R, classes: Option<Vec<KernelClass>>) -> Result<GraphSnapshot> {
    let mut builder = GraphBuilder::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::format(n, e.to_string()))?;
        let mut parts = line.split(',');
        let kernel: u32 = field(parts.next(), n, "kernel")?;
        let object: u32 = field(parts.next(), n, "object")?;
        let class: u16 = field(parts.next(), n, "class")?;
        if parts.next().is_some() {
            return Err(Error::format(n, "expected 3 fields"));
        }
        let class = ClassId(class);
        if !builder.has_class(class) {
            builder.declare_class(KernelClass::unnamed(class))?;
        }
        let inserted = builder
            .add_arc(KernelId(kernel), ObjectId(object), class)
            .map_err(|source| Error::GraphAt { line: n, source })?;
        if !inserted {
            return Err(Error::format(n, format!("duplicate arc {kernel},{object}")));
        }
    }
    let snapshot = builder.freeze();
    Ok(match classes {
        Some(table) => snapshot.with_class_table(table),
        None => snapshot,
    })
}

pub fn load_edge_list(source: &Path) -> Result<GraphSnapshot> {
    load_edge_list_with(source, None)
}

pub fn load_edge_list_with(source: &Path, classes: Option<Vec<KernelClass>>) -> Result<GraphSnapshot> {
    let file = File::open(source).map_err(|e| Error::io(source, e))?;
    read_edge_list(BufReader::new(file), classes)
}

pub fn write_classes<W: Write>(classes: impl IntoIterator<Item = KernelClass>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for c in classes {
        let id = c.id.to_string();
        let weight = c.weight.to_string();
        w.write_record([id.as_str(), c.name.as_str(), c.kind.as_str(), weight.as_str()])
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn read_classes<R: std::io::Read>(reader: R) -> Result<Vec<KernelClass>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut out: BTreeMap<ClassId, KernelClass> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let n = i + 1;
        let rec = rec.map_err(|e| Error::format(n, e.to_string()))?;
        if rec.len() != 4 {
            return Err(Error::format(n, "expected class_id,name,kind,weight"));
        }
        let id = ClassId(field(Some(&rec[0]), n, "class_id")?);
        let kind = rec[2]
            .parse()
            .map_err(|_| Error::format(n, format!("unknown class kind {:?}", &rec[2])))?;
        let weight: u32 = field(Some(&rec[3]), n, "weight")?;
        let class = KernelClass::new(id, &rec[1], kind, weight).map_err(|source| Error::GraphAt { line: n, source })?;
        if out.insert(id, class).is_some() {
            return Err(Error::format(n, format!("class {id} declared twice")));
        }
    }
    Ok(out.into_values().collect())
}

pub fn write_key_map<W: Write>(map: &KeyMap, mut out: W) -> std::io::Result<()> {
    for (id, class, raw) in map.entries() {
        writeln!(out, "{id},{class},{raw}")?;
    }
    out.flush()
}

/// Reads a map sidecar. The raw key is everything after the second comma.
pub fn read_key_map<R: BufRead>(reader: R, per_class: bool) -> Result<KeyMap> {
    let mut map = if per_class {
        KeyMap::kernels()
    } else {
        KeyMap::objects()
    };
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::format(n, e.to_string()))?;
        let mut parts = line.splitn(3, ',');
        let id: u32 = field(parts.next(), n, "interned_id")?;
        let class: u16 = field(parts.next(), n, "class_id")?;
        let raw = parts
            .next()
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::format(n, "missing raw_key"))?;
        if !map.insert(id, ClassId(class), raw.to_string()) {
            return Err(Error::format(n, format!("raw key {raw:?} mapped twice")));
        }
    }
    map.sort();
    Ok(map)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes the edge list and every sidecar for a finished build. Returns the
/// edge-list byte count.
pub fn save_build(output: &BuildOutput, edges: &Path) -> Result<u64> {
    let bytes = save_edge_list(&output.snapshot, edges)?;
    let path = sidecar(edges, ".classes");
    write_classes(output.snapshot.classes().cloned(), create(&path)?)?;
    let path = sidecar(edges, ".kernels.map");
    write_key_map(&output.keys.kernels, create(&path)?).map_err(|e| Error::io(&path, e))?;
    let path = sidecar(edges, ".objects.map");
    write_key_map(&output.keys.objects, create(&path)?).map_err(|e| Error::io(&path, e))?;
    let path = sidecar(edges, ".report.json");
    let json = serde_json::to_string_pretty(&output.report).expect("report serializes");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(bytes)
}

/// A graph read back from disk, with whichever sidecars were present.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub snapshot: GraphSnapshot,
    pub keys: Option<KeyTables>,
}

/// Loads an edge list plus its `.classes` and map sidecars when they exist.
pub fn load_graph(edges: &Path) -> Result<LoadedGraph> {
    let classes_path = sidecar(edges, ".classes");
    let classes = if classes_path.exists() {
        let file = File::open(&classes_path).map_err(|e| Error::io(&classes_path, e))?;
        Some(read_classes(file)?)
    } else {
        None
    };
    let snapshot = load_edge_list_with(edges, classes)?;
    let kernels_path = sidecar(edges, ".kernels.map");
    let objects_path = sidecar(edges, ".objects.map");
    let keys = if kernels_path.exists() && objects_path.exists() {
        let open = |p: &Path| File::open(p).map(BufReader::new).map_err(|e| Error::io(p, e));
        Some(KeyTables {
            kernels: read_key_map(open(&kernels_path)?, true)?,
            objects: read_key_map(open(&objects_path)?, false)?,
        })
    } else {
        None
    };
    Ok(LoadedGraph { snapshot, keys })
}
