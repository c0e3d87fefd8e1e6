//! Subcommands. Each one loads its inputs, builds a canonical digest, checks
//! the size guard and the cache, and only then solves.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opsys_index::cb::{bounded_index_linf, cb_index_dc, cb_norm};
use opsys_index::herm::{CMatrix, HermitianMatrix};
use opsys_index::indices::{
    coindex, cp_index, cp_index_dual, cp_index_primal, cp_index_relative, lambda_tilde, multiplicativity_check,
    IndexResult,
};
use opsys_index::opsys::{Graph, GraphSystemKind, MatricialSystem};
use opsys_index::sdp::{Residuals, SolverOptions};
use opsys_index::theta::{hoffman_heuristic, lovasz_theta, quantum_theta, relative_theta, ThetaForm, ThetaResult};
use serde_json::{json, Value};

use crate::cache::{Cache, CACHE_ENV};
use crate::input::{
    load_map, load_subspace, load_system, matrix_to_json, read_graph, GraphFormat, SystemKind,
};
use crate::record::{
    canonical_graph, canonical_map, canonical_subspace, canonical_system, digest, status_exit_code, worst_status,
    ResidualStats, RunRecord, SolverStats,
};
use crate::CliError;

#[derive(Parser, Debug, Clone)]
#[command(name = "opsys-index", version, about = "Index invariants of matricial operator systems")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Target relative accuracy of every SDP solve.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 500)]
    pub max_iter: usize,
    /// Seed for randomized heuristics.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Restarts for randomized heuristics.
    #[arg(long, global = true, default_value_t = 4)]
    pub restarts: usize,
    /// Write the record here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Largest SDP block dimension a command may build.
    #[arg(long, global = true, default_value_t = 100)]
    pub size_cap: usize,
    /// Write the optimal certificate blocks to this JSON file.
    #[arg(long, global = true)]
    pub certificates: Option<PathBuf>,
}

/// A matricial system given directly or as a graph system.
#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// JSON system file, or one of @full:n, @scalar:n, @diag:n.
    #[arg(long, required_unless_present = "graph", conflicts_with = "graph")]
    pub system: Option<String>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: GraphFormat,
    /// Which system a graph stands for.
    #[arg(long, value_enum, default_value_t)]
    pub kind: SystemKind,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: GraphFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphThetaForm {
    #[value(name = "E_gamma_form")]
    EGamma,
    #[value(name = "S_gamma_form")]
    SGamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantumThetaForm {
    #[value(name = "dsw_dual")]
    DswDual,
    #[value(name = "dsw_primal")]
    DswPrimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CpForm {
    /// Whichever program has fewer constraint rows.
    Auto,
    Primal,
    Dual,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Lovász theta of a graph.
    Theta {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value_t = GraphThetaForm::EGamma)]
        form: GraphThetaForm,
    },
    /// Quantum Lovász theta of a system.
    Qtheta {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value_t = QuantumThetaForm::DswDual)]
        form: QuantumThetaForm,
    },
    /// CP-index of Mₙ over a system.
    CpIndex {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value_t = CpForm::Auto)]
        form: CpForm,
    },
    /// CP-index of a system over a subsystem.
    CpIndexRelative {
        #[arg(long)]
        system: String,
        #[arg(long)]
        system0: String,
    },
    /// CP-index of a system over its scalars.
    LambdaTilde {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Co-index of the kernel orthogonal to a system.
    Coindex {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Relative theta of a graph over a spanning subgraph.
    RelativeTheta {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        graph0: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: GraphFormat,
    },
    /// Completely bounded norm of a map.
    CbNorm {
        /// JSON map file, or one of @identity:n, @transpose:n, @trace:n:c.
        #[arg(long)]
        map: String,
    },
    /// Upper bound on the CB-index of an operator subspace over a smaller one.
    CbIndex {
        #[arg(long)]
        system: String,
        #[arg(long)]
        system0: String,
    },
    /// Bounded index of ℓ∞(n) over the constants.
    BoundedIndexLinf {
        #[arg(long)]
        n: usize,
    },
    /// Compares the index of a tensor inclusion with the product of indices.
    MultCheck {
        #[arg(long)]
        system: String,
        #[arg(long)]
        system0: String,
        #[arg(long)]
        other_system: String,
        #[arg(long)]
        other_system0: String,
    },
    /// Eigenvalue-ratio lower bound on the index.
    Hoffman {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// CP-index, quantum theta and co-index side by side.
    Compare {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Runs one command per line of a jobs file and emits JSON lines.
    Batch {
        #[arg(long)]
        jobs: PathBuf,
        /// Worker threads; 0 picks the available parallelism.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

/// What a computation produced, before it is stamped into a record.
#[derive(Default)]
struct Outcome {
    value: Option<f64>,
    dual_value: Option<f64>,
    gap: Option<f64>,
    status: String,
    iterations: usize,
    residuals: Option<Residuals>,
    details: BTreeMap<String, Value>,
    certificate: Option<Vec<CMatrix>>,
}

impl Outcome {
    fn detail(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), v.into());
        self
    }
}

fn blocks(b: &[HermitianMatrix]) -> Vec<CMatrix> {
    b.iter().map(|h| h.as_matrix().clone()).collect()
}

fn from_index(r: IndexResult) -> Outcome {
    Outcome {
        value: Some(r.value),
        dual_value: Some(r.dual_value),
        gap: Some(r.gap),
        status: r.status.as_str().into(),
        iterations: r.iterations,
        residuals: Some(r.residuals),
        details: BTreeMap::new(),
        certificate: Some(blocks(&r.primal_certificate)),
    }
}

fn from_theta(r: ThetaResult) -> Outcome {
    Outcome {
        value: Some(r.value),
        dual_value: Some(r.dual_value),
        gap: Some(r.gap),
        status: r.status.as_str().into(),
        iterations: r.iterations,
        residuals: Some(r.residuals),
        details: BTreeMap::new(),
        certificate: Some(blocks(&r.certificate)),
    }
    .detail("form", r.form_used.as_str())
}

fn index_summary(r: &IndexResult) -> Value {
    json!({ "value": r.value, "dual_value": r.dual_value, "status": r.status.as_str(), "iterations": r.iterations })
}

type Compute = Box<dyn FnOnce(SolverOptions) -> Result<Outcome, CliError>>;

/// A command with its inputs loaded and canonicalized.
struct Prepared {
    name: &'static str,
    parts: Vec<(&'static str, String)>,
    block_dim: usize,
    compute: Compute,
}

fn load_system_args(a: &SystemArgs) -> Result<(MatricialSystem, Option<Graph>), CliError> {
    match (&a.system, &a.graph) {
        (Some(spec), _) => Ok((load_system(spec)?, None)),
        (None, Some(path)) => {
            let g = read_graph(path, a.format)?;
            Ok((MatricialSystem::from_graph(&g, GraphSystemKind::from(a.kind)), Some(g)))
        }
        (None, None) => Err(CliError::Input("one of --system or --graph is required".into())),
    }
}

fn prepare(cmd: &Command, g: &GlobalArgs) -> Result<Prepared, CliError> {
    let sq = |n: usize| n * n;
    let p = |name, parts, block_dim, compute: Compute| Ok(Prepared { name, parts, block_dim, compute });
    match cmd {
        Command::Theta { graph, form } => {
            let gr = read_graph(&graph.graph, graph.format)?;
            let form = match form {
                GraphThetaForm::EGamma => ThetaForm::EGammaForm,
                GraphThetaForm::SGamma => ThetaForm::SGammaForm,
            };
            p(
                "theta",
                vec![("graph", canonical_graph(&gr)), ("form", form.to_string())],
                gr.vertex_count(),
                Box::new(move |o| Ok(from_theta(lovasz_theta(&gr, form, o)?))),
            )
        }
        Command::Qtheta { system, form } => {
            let (s, _) = load_system_args(system)?;
            let form = match form {
                QuantumThetaForm::DswDual => ThetaForm::DswDual,
                QuantumThetaForm::DswPrimal => ThetaForm::DswPrimal,
            };
            p(
                "qtheta",
                vec![("system", canonical_system(&s)), ("form", form.to_string())],
                sq(s.ambient_dim()),
                Box::new(move |o| Ok(from_theta(quantum_theta(&s, form, o)?))),
            )
        }
        Command::CpIndex { system, form } => {
            let (s, _) = load_system_args(system)?;
            let form = *form;
            p(
                "cp-index",
                vec![("system", canonical_system(&s)), ("form", format!("{form:?}"))],
                sq(s.ambient_dim()),
                Box::new(move |o| {
                    let r = match form {
                        CpForm::Auto => cp_index(&s, o)?,
                        CpForm::Primal => cp_index_primal(&s, o)?,
                        CpForm::Dual => cp_index_dual(&s, o)?,
                    };
                    Ok(from_index(r))
                }),
            )
        }
        Command::CpIndexRelative { system, system0 } => {
            let (s, s0) = (load_system(system)?, load_system(system0)?);
            p(
                "cp-index-relative",
                vec![("system", canonical_system(&s)), ("system0", canonical_system(&s0))],
                sq(s.ambient_dim()),
                Box::new(move |o| Ok(from_index(cp_index_relative(&s, &s0, o)?))),
            )
        }
        Command::LambdaTilde { system } => {
            let (s, _) = load_system_args(system)?;
            p(
                "lambda-tilde",
                vec![("system", canonical_system(&s))],
                sq(s.ambient_dim()),
                Box::new(move |o| Ok(from_index(lambda_tilde(&s, o)?))),
            )
        }
        Command::Coindex { system } => {
            let (s, _) = load_system_args(system)?;
            p(
                "coindex",
                vec![("system", canonical_system(&s))],
                sq(s.ambient_dim()),
                Box::new(move |o| Ok(from_index(coindex(&s.perp(), o)?).detail("kernel_dim", s.perp().dim()))),
            )
        }
        Command::RelativeTheta { graph, graph0, format } => {
            let (gr, gr0) = (read_graph(graph, *format)?, read_graph(graph0, *format)?);
            p(
                "relative-theta",
                vec![("graph", canonical_graph(&gr)), ("graph0", canonical_graph(&gr0))],
                sq(gr.vertex_count()),
                Box::new(move |o| Ok(from_theta(relative_theta(&gr, &gr0, o)?))),
            )
        }
        Command::CbNorm { map } => {
            let u = load_map(map)?;
            p(
                "cb-norm",
                vec![("map", canonical_map(&u))],
                4 * u.domain().ambient_dim() * u.out_dim(),
                Box::new(move |o| {
                    let r = cb_norm(&u, o)?;
                    Ok(Outcome {
                        value: Some(r.value),
                        gap: Some(r.gap),
                        status: r.status.as_str().into(),
                        iterations: r.iterations,
                        certificate: Some(vec![r.choi.as_matrix().clone()]),
                        ..Outcome::default()
                    })
                }),
            )
        }
        Command::CbIndex { system, system0 } => {
            let (x, x0) = (load_subspace(system)?, load_subspace(system0)?);
            let (restarts, seed) = (g.restarts, g.seed);
            p(
                "cb-index",
                vec![
                    ("system", canonical_subspace(&x)),
                    ("system0", canonical_subspace(&x0)),
                    ("restarts", restarts.to_string()),
                    ("seed", seed.to_string()),
                ],
                4 * sq(x.ambient_dim()),
                Box::new(move |o| {
                    let r = cb_index_dc(&x, &x0, restarts, seed, o)?;
                    let found = r.value.is_some();
                    Ok(Outcome {
                        value: r.value,
                        status: if found { "optimal" } else { "infeasible" }.into(),
                        iterations: r.iterations,
                        certificate: r.witness.map(|u| u.images().to_vec()),
                        ..Outcome::default()
                    }
                    .detail("bound", "upper")
                    .detail("witness_deviation", r.witness_deviation)
                    .detail("restarts", r.restarts))
                }),
            )
        }
        Command::BoundedIndexLinf { n } => {
            let n = *n;
            p(
                "bounded-index-linf",
                vec![("n", n.to_string())],
                0,
                Box::new(move |_| {
                    let r = bounded_index_linf(n)?;
                    Ok(Outcome { value: Some(r.value), status: "optimal".into(), ..Outcome::default() }
                        .detail("t", r.t)
                        .detail("norm", r.norm)
                        .detail("deviation", r.deviation))
                }),
            )
        }
        Command::MultCheck { system, system0, other_system, other_system0 } => {
            let (s, s0) = (load_system(system)?, load_system(system0)?);
            let (t, t0) = (load_system(other_system)?, load_system(other_system0)?);
            p(
                "mult-check",
                vec![
                    ("system", canonical_system(&s)),
                    ("system0", canonical_system(&s0)),
                    ("other_system", canonical_system(&t)),
                    ("other_system0", canonical_system(&t0)),
                ],
                sq(s.ambient_dim() * t.ambient_dim()),
                Box::new(move |o| {
                    let r = multiplicativity_check(&s, &s0, &t, &t0, o)?;
                    let status = worst_status(worst_status(r.combined.status, r.first.status), r.second.status);
                    let (first, second) = (index_summary(&r.first), index_summary(&r.second));
                    let mut out = from_index(r.combined);
                    out.status = status.as_str().into();
                    Ok(out
                        .detail("first", first)
                        .detail("second", second)
                        .detail("product", r.product)
                        .detail("relative_deviation", r.relative_deviation))
                }),
            )
        }
        Command::Hoffman { system } => {
            let (s, _) = load_system_args(system)?;
            let (restarts, seed) = (g.restarts, g.seed);
            p(
                "hoffman",
                vec![("system", canonical_system(&s)), ("restarts", restarts.to_string()), ("seed", seed.to_string())],
                s.ambient_dim(),
                Box::new(move |_| {
                    let r = hoffman_heuristic(&s, restarts, seed)?;
                    Ok(Outcome {
                        value: Some(r.value),
                        status: "optimal".into(),
                        certificate: Some(vec![r.witness.as_matrix().clone()]),
                        ..Outcome::default()
                    }
                    .detail("bound", "lower")
                    .detail("lambda_min", r.lambda_min)
                    .detail("lambda_max", r.lambda_max))
                }),
            )
        }
        Command::Compare { system } => {
            let (s, graph) = load_system_args(system)?;
            let graph = graph.filter(|_| system.kind == SystemKind::SGamma);
            let mut parts = vec![("system", canonical_system(&s))];
            if let Some(gr) = &graph {
                parts.push(("graph", canonical_graph(gr)));
            }
            p(
                "compare",
                parts,
                sq(s.ambient_dim()),
                Box::new(move |o| {
                    let ind = cp_index(&s, o)?;
                    let qt = quantum_theta(&s, ThetaForm::DswDual, o)?;
                    let co = coindex(&s.perp(), o)?;
                    let mut status = worst_status(worst_status(ind.status, qt.status), co.status);
                    let theta = match &graph {
                        Some(gr) => {
                            let t = lovasz_theta(gr, ThetaForm::EGammaForm, o)?;
                            status = worst_status(status, t.status);
                            Some(t.value)
                        }
                        None => None,
                    };
                    let (iv, qv, cv) = (ind.value, qt.value, co.value);
                    let mut out = from_index(ind);
                    out.status = status.as_str().into();
                    out.certificate = None;
                    Ok(out
                        .detail("cp_index", iv)
                        .detail("quantum_theta", qv)
                        .detail("coindex", cv)
                        .detail("theta", theta))
                }),
            )
        }
        Command::Batch { .. } => Err(CliError::Input("batch jobs cannot nest".into())),
    }
}

fn write_certificate(path: &Path, command: &str, blocks: &[CMatrix]) -> Result<(), CliError> {
    let body = json!({ "command": command, "blocks": blocks.iter().map(matrix_to_json).collect::<Vec<_>>() });
    let text = serde_json::to_string_pretty(&body).map_err(|e| CliError::Input(e.to_string()))?;
    fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

/// Runs a single (non-batch) command and returns its rounded record.
pub fn run(cli: &Cli) -> Result<RunRecord, CliError> {
    let g = &cli.global;
    let prepared = prepare(&cli.command, g)?;
    if prepared.block_dim > g.size_cap {
        return Err(CliError::SizeGuard { dim: prepared.block_dim, cap: g.size_cap });
    }
    let inputs = digest(prepared.name, &prepared.parts);
    let cache = g
        .cache_dir
        .as_ref()
        .map(Cache::new)
        .transpose()
        .map_err(|e| CliError::Io("cache directory".into(), e))?;
    if let Some(hit) = cache.as_ref().and_then(|c| c.lookup(&inputs, g.tol, g.max_iter)) {
        log::info!("{}: served from cache", prepared.name);
        return Ok(hit);
    }

    let opts = SolverOptions { tol: g.tol, max_iter: g.max_iter };
    let out = (prepared.compute)(opts)?;
    let mut record = RunRecord::new(
        prepared.name,
        inputs,
        &out.status,
        SolverStats {
            iterations: out.iterations,
            tol: g.tol,
            max_iter: g.max_iter,
            residuals: out.residuals.map(ResidualStats::from),
        },
    );
    record.value = out.value;
    record.dual_value = out.dual_value;
    record.gap = out.gap;
    record.details = out.details;
    if let (Some(path), Some(blocks)) = (&g.certificates, &out.certificate) {
        write_certificate(path, prepared.name, blocks)?;
        record.certificates_path = Some(path.display().to_string());
    }
    let record = record.rounded();
    if let Some(c) = &cache {
        if let Err(e) = c.store(&record) {
            log::warn!("could not write to cache {}: {e}", c.dir().display());
        }
    }
    Ok(record)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| CliError::Io(path.display().to_string(), e)),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io("stdout".into(), e)),
                _ => Ok(()),
            }
        }
    }
}

/// Runs the parsed command line, writes its output and returns the exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    if let Command::Batch { jobs, threads } = &cli.command {
        return run_batch(cli, jobs, *threads);
    }
    let record = run(cli)?;
    emit(cli.global.out.as_deref(), &record.to_json())?;
    Ok(record.exit_code())
}

fn error_record(line: usize, message: String) -> RunRecord {
    let mut r = RunRecord::new("error", String::new(), "error", SolverStats { iterations: 0, tol: 0.0, max_iter: 0, residuals: None });
    r.detail("line", line);
    r.detail("error", message);
    r
}

/// Each non-empty line not starting with `#` holds one command's arguments,
/// whitespace-separated. Jobs inherit the batch's cache directory.
fn run_batch(cli: &Cli, jobs: &Path, threads: usize) -> Result<i32, CliError> {
    let text = fs::read_to_string(jobs).map_err(|e| CliError::Io(jobs.display().to_string(), e))?;
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let workers = match threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(lines.len().max(1));

    let results: Vec<Mutex<Option<RunRecord>>> = lines.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(line, args)) = lines.get(k) else { break };
                let record = Cli::try_parse_from(std::iter::once("opsys-index").chain(args.split_whitespace()))
                    .map_err(|e| e.to_string())
                    .and_then(|mut job| {
                        if job.global.cache_dir.is_none() {
                            job.global.cache_dir.clone_from(&cli.global.cache_dir);
                        }
                        if matches!(job.command, Command::Batch { .. }) {
                            return Err("batch jobs cannot nest".into());
                        }
                        run(&job).map_err(|e| e.to_string())
                    })
                    .unwrap_or_else(|e| error_record(line, e));
                *results[k].lock().expect("no worker panics while holding a slot") = Some(record);
            });
        }
    });

    let records: Vec<RunRecord> = results
        .into_iter()
        .map(|m| m.into_inner().expect("workers finished").expect("every job ran"))
        .collect();
    let text = records.iter().map(RunRecord::to_json_line).collect::<Vec<_>>().join("\n");
    emit(cli.global.out.as_deref(), &text)?;
    Ok(records.iter().map(|r| status_exit_code(&r.status)).max().unwrap_or(0))
}
