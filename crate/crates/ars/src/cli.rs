//! The `ars` command line.
//!
//! Exit codes: 0 on success, 1 when the data says no (unknown object, failed
//! validation), 2 for usage, config and I/O problems.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use ars_core::{recommend, recommend_for_path, ObjectId, SeedSet};
use clap::{Parser, Subcommand};

use crate::bench::scaling_bench;
use crate::config::ServiceConfig;
use crate::edge_list::{load_graph, save_build, LoadedGraph};
use crate::error::{Error, Result};
use crate::eval::{replay_baseline, replay_evaluate, InteractionLog};
use crate::ingest::{build_graph, load_allowed_objects};

#[derive(Debug, Parser)]
#[command(name = "ars", version, about = "Session-graph recommender")]
pub struct Cli {
    /// Edge-list file; sidecars are looked up next to it.
    #[arg(long, global = true, default_value = "graph.csv")]
    pub graph: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rebuild the graph from the configured event sources.
    Build {
        #[arg(long)]
        config: PathBuf,
        /// Output edge list; defaults to the config's `edge_list`, then `--graph`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print `object,score` recommendations, best first.
    Recommend {
        object: Option<String>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        weighted: bool,
        /// Objects visited after OBJECT (or the whole path when OBJECT is omitted).
        #[arg(long, value_delimiter = ',')]
        path: Vec<String>,
        /// Speak raw object keys instead of interned ids.
        #[arg(long)]
        raw: bool,
    },
    /// Print graph size counts.
    Stats {
        #[arg(long)]
        json: bool,
    },
    /// Check the graph's structural constraints.
    Validate,
    /// Replay an interaction log and report effectiveness.
    Eval {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        weighted: bool,
        /// Also evaluate the random baseline with this seed.
        #[arg(long)]
        baseline_seed: Option<u64>,
    },
    /// Time builds and queries on synthetic graphs of growing size.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Also write the series, with header, to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service with periodic rebuilds.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_domain() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses `args` and runs the command, writing to the given streams.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn resolve(graph: &LoadedGraph, key: &str, raw: bool) -> Result<ObjectId, Failure> {
    if raw {
        let keys = graph
            .keys
            .as_ref()
            .ok_or_else(|| Failure::Usage("--raw needs the .kernels.map and .objects.map sidecars".into()))?;
        keys.objects
            .id_of(key)
            .map(ObjectId)
            .ok_or_else(|| Failure::Domain(format!("object not found: {key}")))
    } else {
        key.parse()
            .map(ObjectId)
            .map_err(|_| Failure::Usage(format!("not an object id: {key:?}")))
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Build { config, out: target } => {
            let config = ServiceConfig::load(&config)?;
            let allowed = config
                .allowed_objects
                .as_deref()
                .map(load_allowed_objects)
                .transpose()?;
            let built = build_graph(&config.sources, allowed)?;
            let target = target.or(config.edge_list).unwrap_or(cli.graph);
            let bytes = save_build(&built, &target)?;
            writeln!(
                out,
                "wrote {} ({} arcs, {bytes} bytes)",
                target.display(),
                built.snapshot.arc_count()
            )?;
            for c in &built.report.classes {
                let n = &c.counts;
                writeln!(
                    out,
                    "class {} {}: read={} arcs={} duplicates={} malformed={}",
                    c.class_id, c.name, n.events_read, n.arcs_emitted, n.duplicates_dropped, n.malformed_lines
                )?;
            }
            writeln!(out, "build time: {:.4} s", built.report.elapsed_seconds)?;
            Ok(0)
        }
        Command::Recommend {
            object,
            top,
            weighted,
            path,
            raw,
        } => {
            let graph = load_graph(&cli.graph)?;
            let mut seeds = Vec::new();
            for key in object.iter().chain(&path) {
                seeds.push(resolve(&graph, key, raw)?);
            }
            let items = match seeds.as_slice() {
                [] => return Err(Failure::Usage("give an object or --path".into())),
                [m] => recommend(&graph.snapshot, *m, top, weighted),
                _ => SeedSet::new(seeds).and_then(|s| recommend_for_path(&graph.snapshot, &s, top, weighted)),
            }
            .map_err(|e| match e {
                ars_core::Error::ObjectNotFound(_) => Failure::Domain(e.to_string()),
                _ => Failure::Usage(e.to_string()),
            })?;
            for s in &items {
                let name = match (&graph.keys, raw) {
                    (Some(keys), true) => keys.objects.raw_of(s.object.0).unwrap_or("?").to_string(),
                    _ => s.object.to_string(),
                };
                writeln!(out, "{name},{}", s.score)?;
            }
            Ok(0)
        }
        Command::Stats { json } => {
            let graph = load_graph(&cli.graph)?;
            let st = graph.snapshot.stats();
            if json {
                writeln!(out, "{}", serde_json::to_string(&st).expect("stats serialize"))?;
            } else {
                writeln!(out, "objects: {}", st.count_objects)?;
                writeln!(out, "kernels: {}", st.count_kernels)?;
                writeln!(out, "nodes: {}", st.count_nodes)?;
                writeln!(out, "arcs: {}", st.count_arcs)?;
                writeln!(out, "classes: {}", st.count_classes)?;
                for (id, c) in &st.per_class {
                    writeln!(out, "class {id}: kernels={} objects={}", c.kernels, c.objects)?;
                }
            }
            Ok(0)
        }
        Command::Validate => {
            let graph = load_graph(&cli.graph)?;
            let report = graph.snapshot.validate();
            if report.ok {
                writeln!(out, "ok")?;
                return Ok(0);
            }
            for k in &report.orphan_kernels {
                writeln!(out, "orphan kernel: {k}")?;
            }
            for o in &report.orphan_objects {
                writeln!(out, "orphan object: {o}")?;
            }
            for c in &report.undeclared_classes {
                writeln!(out, "undeclared class: {c}")?;
            }
            Ok(1)
        }
        Command::Eval {
            log,
            top,
            weighted,
            baseline_seed,
        } => {
            let graph = load_graph(&cli.graph)?;
            let file = std::fs::File::open(&log).map_err(|e| Error::io(&log, e))?;
            let log = InteractionLog::read(file)?;
            let report = replay_evaluate(&graph.snapshot, &log, top, weighted)?;
            write!(out, "{report}")?;
            writeln!(out, "{}", report.to_json_line())?;
            if let Some(seed) = baseline_seed {
                let baseline = replay_baseline(&graph.snapshot, &log, top, seed)?;
                writeln!(out, "random baseline:")?;
                write!(out, "{baseline}")?;
                writeln!(out, "{}", baseline.to_json_line())?;
            }
            Ok(0)
        }
        Command::Bench {
            steps,
            seed,
            reps,
            out: csv,
        } => {
            let series = scaling_bench(&steps, seed, reps)?;
            series.write_csv(&mut *out, false)?;
            if let Some(path) = csv {
                let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                series.write_csv(std::io::BufWriter::new(file), true)?;
            }
            Ok(0)
        }
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::service::serve(config))?;
            Ok(0)
        }
    }
}
