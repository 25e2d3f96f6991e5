use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dgm_core::ingest::{self, Direction, LoadOptions, LoadReport, SampleManifest, SampleSpec};
use dgm_core::metrics::{
    betweenness_exact, betweenness_sampled, condensation_is_acyclic, connected_components,
    degree_distribution, degree_sequence, pagerank, small_world, summarize_connectivity,
    ComponentMode, DegreeDirection, PageRankParams, SmallWorldParams,
};
use dgm_core::pipeline::{run_pipeline, PipelineParams};
use dgm_core::powerlaw::{bootstrap_p_value, fit_discrete, fit_with_xmin, loglog_binned};
use dgm_core::report::{self, emit_bundle, InputPaths, Metadata, Report, RunConfig};
use dgm_core::resilience::{compare_policies_with, RemovalPolicy, ResilienceOptions};
use dgm_core::synth::{self, Family, GeneratorSpec, Orientation};
use dgm_core::{snapshot, DependencyGraph, Error, NodeKind};

const EXIT_CONFIG: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Structural analysis of artifact/release dependency graphs.
#[derive(Parser)]
#[command(name = "dgm", version, about)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "DGM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load node/edge CSVs and write a binary snapshot.
    Ingest {
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        relaxed_kinds: bool,
        /// Snapshot file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a seeded synthetic graph.
    Synth(SynthArgs),
    /// BFS-expand from the most depended-upon artifacts.
    Sample {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Degree histograms.
    Degrees {
        #[command(flatten)]
        input: GraphInput,
        /// Log bins per decade for the binned total-degree series.
        #[arg(long, default_value_t = 10)]
        bins_per_decade: usize,
        #[arg(long)]
        out: PathBuf,
    },
    Pagerank {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        pr: PageRankArgs,
        /// Exit with status 3 if the iteration does not converge.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
    },
    Betweenness {
        #[command(flatten)]
        input: GraphInput,
        /// Estimate from this many random BFS sources instead of all nodes.
        #[arg(long, requires = "seed")]
        pivots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weak and strong connected components.
    Components {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clustering, path length and sigma against rewired baselines.
    Smallworld {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 200)]
        path_samples: usize,
        #[arg(long, default_value_t = 5)]
        baselines: usize,
        #[arg(long, default_value_t = 10)]
        swaps_per_edge: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discrete power-law fit of a degree sequence.
    FitPowerlaw {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, value_enum, default_value_t = DegreeArg::Total)]
        degree: DegreeArg,
        /// Fix the cutoff instead of scanning for it.
        #[arg(long)]
        xmin: Option<u64>,
        /// Bootstrap replicates for a goodness-of-fit p-value.
        #[arg(long, default_value_t = 0, requires = "seed")]
        bootstrap: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// LCC decay under random and targeted node removal.
    Resilience {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long = "policy", value_enum, default_values_t = [PolicyArg::Random, PolicyArg::Degree])]
        policies: Vec<PolicyArg>,
        #[arg(long, default_value_t = 0.5)]
        max_fraction: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Removing an artifact also removes its releases.
        #[arg(long)]
        cascade_releases: bool,
        /// Pivot count for the betweenness ranking.
        #[arg(long)]
        pivots: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a summary of an existing bundle, or the envelope schema.
    Report {
        #[arg(long, required_unless_present = "schema")]
        bundle: Option<PathBuf>,
        #[arg(long)]
        schema: bool,
    },
    /// Sample, measure, fit and tabulate in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args, Default, Clone)]
struct GraphInput {
    /// Binary snapshot written by `ingest`.
    #[arg(long, conflicts_with_all = ["nodes", "edges"])]
    graph: Option<PathBuf>,
    #[arg(long, requires = "edges")]
    nodes: Option<PathBuf>,
    #[arg(long, requires = "nodes")]
    edges: Option<PathBuf>,
    /// Accept edges that break the artifact/release endpoint rule.
    #[arg(long)]
    relaxed_kinds: bool,
}

#[derive(Args, Clone)]
struct SampleArgs {
    /// Number of seed artifacts.
    #[arg(long, default_value_t = 5000)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = Direction::Both)]
    direction: Direction,
}

#[derive(Args, Clone)]
struct PageRankArgs {
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

impl PageRankArgs {
    fn params(&self) -> PageRankParams {
        PageRankParams {
            alpha: self.alpha,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    /// Edges per new node (ba).
    #[arg(long)]
    m: Option<usize>,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Lattice degree (ws).
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (ws).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    seed: u64,
    /// Emit each link in both directions.
    #[arg(long)]
    bidirected: bool,
    /// Directory for nodes.csv and edges.csv.
    #[arg(long, required_unless_present = "snapshot")]
    out: Option<PathBuf>,
    /// Also (or only) write a binary snapshot.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    input: GraphInput,
    /// `id,category,tags` sidecar for ranked tables.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[command(flatten)]
    sample: SampleArgs,
    /// Analyse the whole input graph without sampling.
    #[arg(long)]
    no_sample: bool,
    /// Skip writing the sampled graph CSVs.
    #[arg(long)]
    no_emit_sample: bool,
    #[command(flatten)]
    pr: PageRankArgs,
    #[arg(long)]
    pivots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, default_value_t = 10)]
    bins_per_decade: usize,
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    #[arg(long)]
    strict: bool,
    /// Re-run from a `config.json` written by an earlier pipeline run.
    /// Other input and parameter flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ba,
    Er,
    Ws,
}

#[derive(Clone, Copy, ValueEnum)]
enum DegreeArg {
    In,
    Out,
    Total,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Random,
    Degree,
    Pagerank,
    Betweenness,
}

enum Failure {
    Config(String),
    Input(Error),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidFraction(_)
            | Error::InvalidSpec(_)
            | Error::ModeMismatch(_) => Failure::Config(e.to_string()),
            other => Failure::Input(other),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match build_pool(cli.threads) {
        Ok(pool) => pool.install(|| run(cli.command)),
        Err(f) => Err(f),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("dgm: configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Input(e)) => {
            eprintln!("dgm: {e}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("dgm: {msg}");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
    }
}

fn build_pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::Config("--threads must be >= 1".into()));
        }
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Failure::Config(e.to_string()))
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn load_input(input: &GraphInput) -> CliResult<(DependencyGraph, LoadReport, InputPaths)> {
    let mut paths = InputPaths {
        relaxed_kinds: input.relaxed_kinds,
        ..Default::default()
    };
    match (&input.graph, &input.nodes, &input.edges) {
        (Some(g), _, _) => {
            let graph = snapshot::load(g).map_err(|e| match e {
                Error::Snapshot(msg) => Failure::Input(Error::Format {
                    path: g.clone(),
                    message: msg,
                }),
                other => other.into(),
            })?;
            paths.graph = Some(path_str(g));
            Ok((graph, LoadReport::default(), paths))
        }
        (None, Some(n), Some(e)) => {
            let opts = LoadOptions {
                relaxed_kinds: input.relaxed_kinds,
            };
            let (graph, report) = ingest::load_csv_with(n, e, opts)?;
            if report.skipped_rows() > 0 {
                log::warn!("skipped {} input rows: {report:?}", report.skipped_rows());
            }
            paths.nodes = Some(path_str(n));
            paths.edges = Some(path_str(e));
            Ok((graph, report, paths))
        }
        _ => Err(Failure::Config(
            "an input graph is required: --graph <snapshot> or --nodes <csv> --edges <csv>".into(),
        )),
    }
}

fn config(
    subcommand: &str,
    inputs: InputPaths,
    out: &Path,
    params: serde_json::Value,
) -> CliResult<RunConfig> {
    Ok(RunConfig::new(subcommand, inputs, &path_str(out), params)?)
}

fn emit(out: &Path, report: &Report) -> CliResult {
    emit_bundle(out, report)?;
    log::info!("wrote bundle to {}", out.display());
    Ok(())
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Ingest {
            nodes,
            edges,
            relaxed_kinds,
            out,
        } => {
            let (graph, report) =
                ingest::load_csv_with(&nodes, &edges, LoadOptions { relaxed_kinds })?;
            snapshot::save(&graph, &out)?;
            let summary = json!({
                "nodes": graph.node_count(),
                "edges": graph.edge_count(),
                "load": report,
                "skipped_rows": report.skipped_rows(),
            });
            let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
            stdout(&format!("{text}\n"))
        }
        Command::Synth(args) => synth_cmd(args),
        Command::Sample { input, sample, out } => {
            let (graph, load, paths) = load_input(&input)?;
            let spec = SampleSpec {
                k: sample.k,
                depth: sample.depth,
                direction: sample.direction,
            };
            spec.validate()?;
            let seeds = ingest::select_top_seeds(&graph, spec.k);
            let sampled = ingest::bfs_sample(&graph, &seeds, &spec)?;
            let manifest = SampleManifest {
                seed_count: seeds.len(),
                depth: spec.depth,
                direction: spec.direction,
                node_count: sampled.node_count(),
                edge_count: sampled.edge_count(),
                skipped_rows: load.skipped_rows(),
            };
            let mut nodes = Vec::new();
            let mut edges = Vec::new();
            ingest::write_nodes_csv(&sampled, &mut nodes).map_err(|e| Error::io(&out, e))?;
            ingest::write_edges_csv(&sampled, &mut edges).map_err(|e| Error::io(&out, e))?;
            let mut report = Report::new(config(
                "sample",
                paths,
                &out,
                serde_json::to_value(spec).map_err(Error::from)?,
            )?);
            report.add_metric(
                "sample",
                json!({ "manifest": manifest, "seeds": seeds.seeds }),
                vec![
                    ("manifest.json".into(), report::json_bytes(&manifest)?),
                    ("nodes.csv".into(), nodes),
                    ("edges.csv".into(), edges),
                ],
            )?;
            emit(&out, &report)
        }
        Command::Degrees {
            input,
            bins_per_decade,
            out,
        } => {
            let (graph, _, paths) = load_input(&input)?;
            let mut report = Report::new(config(
                "degrees",
                paths,
                &out,
                json!({ "bins_per_decade": bins_per_decade }),
            )?);
            let mut files = Vec::new();
            let mut summary = serde_json::Map::new();
            for (name, dir, kind) in [
                ("in", DegreeDirection::In, None),
                ("out", DegreeDirection::Out, None),
                ("total", DegreeDirection::Total, None),
                ("artifact_in", DegreeDirection::In, Some(NodeKind::Artifact)),
                ("release_out", DegreeDirection::Out, Some(NodeKind::Release)),
            ] {
                let h = degree_distribution(&graph, dir, kind);
                summary.insert(
                    name.into(),
                    json!({ "nodes": h.total(), "degree_sum": h.degree_sum() }),
                );
                files.push((format!("degree_{name}.csv"), report::histogram_csv(&h)));
                if name == "total" && !h.is_empty() {
                    match loglog_binned(&h, bins_per_decade) {
                        Ok(b) => {
                            files.push(("degree_total_binned.csv".into(), report::binned_csv(&b)))
                        }
                        Err(Error::EmptyHistogram) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            report.add_metric("degrees", summary, files)?;
            emit(&out, &report)
        }
        Command::Pagerank {
            input,
            pr,
            strict,
            out,
        } => {
            let (graph, _, paths) = load_input(&input)?;
            let params = pr.params();
            let res = pagerank(&graph, params)?;
            let mut report = Report::new(config(
                "pagerank",
                paths,
                &out,
                serde_json::to_value(params).map_err(Error::from)?,
            )?);
            report.add_metric(
                "pagerank",
                json!({
                    "iterations": res.iterations,
                    "converged": res.converged,
                    "last_delta": res.last_delta,
                    "sum": res.scores.sum(),
                }),
                vec![(
                    "pagerank.csv".into(),
                    report::score_csv(&graph, &res.scores),
                )],
            )?;
            emit(&out, &report)?;
            if strict && !res.converged {
                return Err(Failure::NotConverged(format!(
                    "pagerank did not converge within {} iterations (last delta {:e})",
                    params.max_iter, res.last_delta
                )));
            }
            Ok(())
        }
        Command::Betweenness {
            input,
            pivots,
            seed,
            out,
        } => {
            let (graph, _, paths) = load_input(&input)?;
            let bc = match pivots {
                Some(p) => betweenness_sampled(&graph, p, seed.expect("clap enforces --seed"))?,
                None => betweenness_exact(&graph),
            };
            let mut report = Report::new(config(
                "betweenness",
                paths,
                &out,
                json!({ "pivots": pivots, "seed": seed }),
            )?);
            report.add_metric(
                "betweenness",
                json!({ "sources": bc.sources, "exact": pivots.is_none() }),
                vec![
                    ("betweenness.csv".into(), report::score_csv(&graph, &bc.raw)),
                    (
                        "betweenness_normalized.csv".into(),
                        report::score_csv(&graph, &bc.normalized),
                    ),
                ],
            )?;
            emit(&out, &report)
        }
        Command::Components { input, out } => {
            let (graph, _, paths) = load_input(&input)?;
            let weak = connected_components(&graph, ComponentMode::Weak);
            let strong = connected_components(&graph, ComponentMode::Strong);
            let summary = summarize_connectivity(&weak, &strong)?;
            let mut report = Report::new(config("components", paths, &out, json!({}))?);
            report.add_metric(
                "components",
                json!({
                    "summary": summary,
                    "condensation_acyclic": condensation_is_acyclic(&graph, &strong),
                }),
                vec![
                    (
                        "components_weak.csv".into(),
                        report::labels_csv(&graph, &weak),
                    ),
                    (
                        "components_strong.csv".into(),
                        report::labels_csv(&graph, &strong),
                    ),
                ],
            )?;
            emit(&out, &report)
        }
        Command::Smallworld {
            input,
            path_samples,
            baselines,
            swaps_per_edge,
            seed,
            out,
        } => {
            let (graph, _, paths) = load_input(&input)?;
            let params = SmallWorldParams {
                path_samples,
                baseline_graphs: baselines,
                swaps_per_edge,
                seed,
            };
            let stats = small_world(&graph, params)?;
            let mut report = Report::new(config(
                "smallworld",
                paths,
                &out,
                serde_json::to_value(params).map_err(Error::from)?,
            )?);
            report.add_metric("smallworld", &stats, vec![])?;
            emit(&out, &report)
        }
        Command::FitPowerlaw {
            input,
            degree,
            xmin,
            bootstrap,
            seed,
            out,
        } => {
            let (graph, _, paths) = load_input(&input)?;
            let dir = match degree {
                DegreeArg::In => DegreeDirection::In,
                DegreeArg::Out => DegreeDirection::Out,
                DegreeArg::Total => DegreeDirection::Total,
            };
            let xs: Vec<u64> = degree_sequence(&graph, dir, None)
                .into_iter()
                .map(|d| d as u64)
                .collect();
            let mut fit = match xmin {
                Some(x) => fit_with_xmin(&xs, x)?,
                None => fit_discrete(&xs)?,
            };
            if bootstrap > 0 {
                fit.p_value = Some(bootstrap_p_value(
                    &xs,
                    &fit,
                    bootstrap,
                    seed.expect("clap enforces --seed"),
                )?);
            }
            let mut report = Report::new(config(
                "fit-powerlaw",
                paths,
                &out,
                json!({ "degree": dir, "xmin": xmin, "bootstrap": bootstrap, "seed": seed }),
            )?);
            report.add_metric(
                "powerlaw",
                &fit,
                vec![("powerlaw.json".into(), report::json_bytes(&fit)?)],
            )?;
            emit(&out, &report)
        }
        Command::Resilience {
            input,
            policies,
            max_fraction,
            step,
            trials,
            seed,
            cascade_releases,
            pivots,
            out,
        } => {
            let (graph, _, paths) = load_input(&input)?;
            let policies: Vec<RemovalPolicy> = policies
                .iter()
                .map(|p| match p {
                    PolicyArg::Random => RemovalPolicy::Random { seed },
                    PolicyArg::Degree => RemovalPolicy::TargetedDegree,
                    PolicyArg::Pagerank => RemovalPolicy::TargetedPageRank,
                    PolicyArg::Betweenness => RemovalPolicy::TargetedBetweenness,
                })
                .collect();
            let opts = ResilienceOptions {
                cascade_releases,
                betweenness_pivots: pivots,
                pivot_seed: seed,
            };
            let cmp =
                compare_policies_with(&graph, &policies, max_fraction, step, trials, seed, &opts)?;
            let mut report = Report::new(config(
                "resilience",
                paths,
                &out,
                json!({
                    "policies": policies,
                    "max_fraction": max_fraction,
                    "step": step,
                    "trials": trials,
                    "seed": seed,
                    "options": opts,
                }),
            )?);
            for s in &cmp.policies {
                let name = format!("resilience_{}", s.policy.name());
                report.add_metric(
                    &name,
                    json!({
                        "policy": s.policy,
                        "trials": s.trials,
                        "auc_mean": s.auc_mean,
                        "auc_std": s.auc_std,
                        "aucs": s.aucs,
                    }),
                    vec![(format!("{name}.csv"), report::curve_csv(&s.mean_curve()))],
                )?;
            }
            emit(&out, &report)
        }
        Command::Report { bundle, schema } => {
            if schema {
                return stdout(report::REPORT_SCHEMA);
            }
            let dir = bundle.expect("clap enforces --bundle");
            let env = report::read_envelope(&dir)?;
            let mut text = String::new();
            let _ = writeln!(text, "subcommand: {}", env.config.subcommand);
            let _ = writeln!(text, "params: {}", env.config.params);
            for m in &env.metrics {
                let _ = writeln!(text, "\n[{}]", m.name);
                for f in &m.files {
                    let _ = writeln!(text, "  file: {f}");
                }
                let summary = serde_json::to_string_pretty(&m.summary).map_err(Error::from)?;
                let _ = writeln!(text, "{summary}");
            }
            stdout(&text)
        }
        Command::Pipeline(args) => pipeline_cmd(args),
    }
}

/// Writes to stdout. A closed pipe on the reading side is not an error.
fn stdout(text: &str) -> CliResult {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(Failure::Input(Error::io("<stdout>", e)))
        }
        _ => Ok(()),
    }
}

fn synth_cmd(a: SynthArgs) -> CliResult {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Failure::Config(format!("--{flag} is required for this family")))
    };
    let family = match a.family {
        FamilyArg::Ba => Family::PreferentialAttachment {
            n: a.n,
            m: a.m
                .ok_or_else(|| Failure::Config("--m is required for ba".into()))?,
        },
        FamilyArg::Er => Family::UniformRandom {
            n: a.n,
            p: need(a.p, "p")?,
        },
        FamilyArg::Ws => Family::RewiredLattice {
            n: a.n,
            k: a.k
                .ok_or_else(|| Failure::Config("--k is required for ws".into()))?,
            beta: need(a.beta, "beta")?,
        },
    };
    let spec = GeneratorSpec {
        family,
        seed: a.seed,
        orientation: if a.bidirected {
            Orientation::Bidirected
        } else {
            Orientation::Directed
        },
    };
    let graph = synth::generate(&spec)?;
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        ingest::write_csv(&graph, &dir.join("nodes.csv"), &dir.join("edges.csv"))?;
        fs::write(dir.join("spec.json"), report::json_bytes(&spec)?)
            .map_err(|e| Error::io(dir, e))?;
    }
    if let Some(path) = &a.snapshot {
        snapshot::save(&graph, path)?;
    }
    Ok(())
}

fn pipeline_cmd(a: PipelineArgs) -> CliResult {
    let (input, meta_path, params, out) = match &a.config {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let cfg: RunConfig = serde_json::from_slice(&bytes).map_err(|e| Error::Format {
                path: path.clone(),
                message: e.to_string(),
            })?;
            if cfg.subcommand != "pipeline" {
                return Err(Failure::Config(format!(
                    "{} holds a {:?} config, not a pipeline config",
                    path.display(),
                    cfg.subcommand
                )));
            }
            let params: PipelineParams =
                serde_json::from_value(cfg.params).map_err(|e| Failure::Config(e.to_string()))?;
            let input = GraphInput {
                graph: cfg.inputs.graph.map(PathBuf::from),
                nodes: cfg.inputs.nodes.map(PathBuf::from),
                edges: cfg.inputs.edges.map(PathBuf::from),
                relaxed_kinds: cfg.inputs.relaxed_kinds,
            };
            let out = a.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output));
            (input, cfg.inputs.meta.map(PathBuf::from), params, out)
        }
        None => {
            let params = PipelineParams {
                k: a.sample.k,
                depth: a.sample.depth,
                direction: a.sample.direction,
                no_sample: a.no_sample,
                emit_sample: !a.no_emit_sample,
                damping: a.pr.alpha,
                tol: a.pr.tol,
                max_iter: a.pr.max_iter,
                pivots: a.pivots,
                seed: a.seed,
                top: a.top,
                bins_per_decade: a.bins_per_decade,
                bootstrap: a.bootstrap,
            };
            let out = a.out.clone().expect("clap enforces --out");
            (a.input.clone(), a.meta.clone(), params, out)
        }
    };
    params.validate()?;
    let (graph, load, mut paths) = load_input(&input)?;
    let meta: Option<Metadata> = match &meta_path {
        Some(p) => {
            paths.meta = Some(path_str(p));
            Some(report::load_metadata(p)?)
        }
        None => None,
    };
    let cfg = config(
        "pipeline",
        paths,
        &out,
        serde_json::to_value(&params).map_err(Error::from)?,
    )?;
    let outcome = run_pipeline(&graph, &load, &params, meta.as_ref(), cfg)?;
    emit(&out, &outcome.report)?;
    if a.strict && !outcome.pagerank_converged {
        return Err(Failure::NotConverged(format!(
            "pagerank did not converge within {} iterations",
            params.max_iter
        )));
    }
    Ok(())
}
