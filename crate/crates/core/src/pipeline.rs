//! The end-to-end run: seed selection, BFS sampling, the metric suite,
//! a power-law fit of the degree distribution and ranked summary tables,
//! collected into a [`Report`].

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{DependencyGraph, NodeKind};
use crate::ingest::{self, Direction, LoadReport, SampleManifest, SampleSpec};
use crate::metrics::{
    betweenness_exact, betweenness_sampled, condensation_is_acyclic, connected_components,
    degree_distribution, degree_sequence, pagerank, summarize_connectivity, ComponentMode,
    DegreeDirection, PageRankParams, ScoreMap,
};
use crate::powerlaw::{bootstrap_p_value, fit_discrete, loglog_binned};
use crate::report::{self, top_k_of_kind, Metadata, Report, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    /// Seed artifacts for BFS sampling.
    pub k: usize,
    pub depth: usize,
    pub direction: Direction,
    /// Analyse the full input instead of a BFS sample.
    pub no_sample: bool,
    /// Also write the sampled graph as CSV.
    pub emit_sample: bool,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Pivot count for sampled betweenness; exact when absent.
    pub pivots: Option<usize>,
    pub seed: Option<u64>,
    /// Rows per ranked table.
    pub top: usize,
    pub bins_per_decade: usize,
    /// Bootstrap replicates for the power-law p-value; 0 skips it.
    pub bootstrap: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        let pr = PageRankParams::default();
        let sample = SampleSpec::default();
        PipelineParams {
            k: sample.k,
            depth: sample.depth,
            direction: sample.direction,
            no_sample: false,
            emit_sample: true,
            damping: pr.alpha,
            tol: pr.tol,
            max_iter: pr.max_iter,
            pivots: None,
            seed: None,
            top: 10,
            bins_per_decade: 10,
            bootstrap: 0,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        if (self.pivots.is_some() || self.bootstrap > 0) && self.seed.is_none() {
            return Err(Error::InvalidParameter(
                "sampled betweenness and bootstrap need an explicit seed".into(),
            ));
        }
        if self.top == 0 {
            return Err(Error::InvalidParameter("top must be >= 1".into()));
        }
        if self.pivots == Some(0) {
            return Err(Error::InvalidParameter("pivots must be >= 1".into()));
        }
        self.sample_spec().validate()
    }

    pub fn sample_spec(&self) -> SampleSpec {
        SampleSpec {
            k: self.k,
            depth: self.depth,
            direction: self.direction,
        }
    }

    pub fn pagerank_params(&self) -> PageRankParams {
        PageRankParams {
            alpha: self.damping,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: Report,
    pub pagerank_converged: bool,
}

/// Runs every step on `graph` and collects the results under `config`.
pub fn run_pipeline(
    graph: &DependencyGraph,
    load: &LoadReport,
    params: &PipelineParams,
    meta: Option<&Metadata>,
    config: RunConfig,
) -> Result<PipelineOutcome> {
    params.validate()?;
    let mut out = Report::new(config);
    let mut clock = Instant::now();
    let mut lap = |report: &mut Report, step: &str| {
        report.add_timing(step, clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };

    // sampling
    let sampled;
    let g = if params.no_sample {
        graph
    } else {
        let spec = params.sample_spec();
        let seeds = ingest::select_top_seeds(graph, spec.k);
        if seeds.is_empty() {
            return Err(Error::InvalidParameter(
                "no artifact has incoming dependency edges; nothing to sample from".into(),
            ));
        }
        sampled = ingest::bfs_sample(graph, &seeds, &spec)?;
        let manifest = SampleManifest {
            seed_count: seeds.len(),
            depth: spec.depth,
            direction: spec.direction,
            node_count: sampled.node_count(),
            edge_count: sampled.edge_count(),
            skipped_rows: load.skipped_rows(),
        };
        let mut files = vec![("manifest.json".to_string(), report::json_bytes(&manifest)?)];
        if params.emit_sample {
            let mut nodes = Vec::new();
            let mut edges = Vec::new();
            ingest::write_nodes_csv(&sampled, &mut nodes).expect("in-memory write");
            ingest::write_edges_csv(&sampled, &mut edges).expect("in-memory write");
            files.push(("sample_nodes.csv".into(), nodes));
            files.push(("sample_edges.csv".into(), edges));
        }
        out.add_metric(
            "sample",
            json!({ "manifest": manifest, "seeds": seeds.seeds }),
            files,
        )?;
        lap(&mut out, "sample");
        &sampled
    };
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }

    // degrees
    let mut files = Vec::new();
    let mut summary = serde_json::Map::new();
    let hists = [
        ("in", DegreeDirection::In, None),
        ("out", DegreeDirection::Out, None),
        ("total", DegreeDirection::Total, None),
        ("artifact_in", DegreeDirection::In, Some(NodeKind::Artifact)),
        ("release_out", DegreeDirection::Out, Some(NodeKind::Release)),
    ];
    for (name, dir, kind) in hists {
        let h = degree_distribution(g, dir, kind);
        let max = h.counts.keys().next_back().copied().unwrap_or(0);
        summary.insert(
            name.into(),
            json!({ "nodes": h.total(), "degree_sum": h.degree_sum(), "max_degree": max }),
        );
        files.push((format!("degree_{name}.csv"), report::histogram_csv(&h)));
        if name == "total" {
            if let Ok(binned) = loglog_binned(&h, params.bins_per_decade) {
                files.push((
                    "degree_total_binned.csv".into(),
                    report::binned_csv(&binned),
                ));
            }
        }
    }
    out.add_metric("degrees", summary, files)?;
    lap(&mut out, "degrees");

    // pagerank
    let pr = pagerank(g, params.pagerank_params())?;
    out.add_metric(
        "pagerank",
        json!({
            "params": pr.scores.params,
            "iterations": pr.iterations,
            "converged": pr.converged,
            "last_delta": pr.last_delta,
            "sum": pr.scores.sum(),
        }),
        vec![("pagerank.csv".into(), report::score_csv(g, &pr.scores))],
    )?;
    lap(&mut out, "pagerank");

    // betweenness
    let bc = match params.pivots {
        Some(p) => betweenness_sampled(g, p.min(g.node_count()), params.seed.unwrap_or_default())?,
        None => betweenness_exact(g),
    };
    out.add_metric(
        "betweenness",
        json!({ "sources": bc.sources, "exact": params.pivots.is_none(), "seed": params.seed }),
        vec![
            ("betweenness.csv".into(), report::score_csv(g, &bc.raw)),
            (
                "betweenness_normalized.csv".into(),
                report::score_csv(g, &bc.normalized),
            ),
        ],
    )?;
    lap(&mut out, "betweenness");

    // components
    let weak = connected_components(g, ComponentMode::Weak);
    let strong = connected_components(g, ComponentMode::Strong);
    let conn = summarize_connectivity(&weak, &strong)?;
    out.add_metric(
        "components",
        json!({
            "summary": conn,
            "condensation_acyclic": condensation_is_acyclic(g, &strong),
        }),
        vec![
            ("components_weak.csv".into(), report::labels_csv(g, &weak)),
            (
                "components_strong.csv".into(),
                report::labels_csv(g, &strong),
            ),
        ],
    )?;
    lap(&mut out, "components");

    // power-law fit of the total degree distribution
    let degrees: Vec<u64> = degree_sequence(g, DegreeDirection::Total, None)
        .into_iter()
        .map(|d| d as u64)
        .collect();
    let fit_summary = match fit_discrete(&degrees) {
        Ok(mut fit) => {
            if params.bootstrap > 0 {
                let seed = params.seed.unwrap_or_default();
                fit.p_value = Some(bootstrap_p_value(&degrees, &fit, params.bootstrap, seed)?);
            }
            json!({ "status": "fitted", "fit": fit })
        }
        Err(e @ (Error::TooFewSamples { .. } | Error::DegenerateSample(_))) => {
            json!({ "status": "skipped", "reason": e.to_string() })
        }
        Err(e) => return Err(e),
    };
    out.add_metric("powerlaw", fit_summary, vec![])?;
    lap(&mut out, "powerlaw");

    // ranked tables
    let in_deg = ScoreMap::new(
        "in_degree",
        json!({}),
        (0..g.node_count()).map(|v| g.in_degree(v) as f64).collect(),
    );
    let tables = [
        ("top_pagerank", &pr.scores, false),
        ("top_betweenness", &bc.raw, false),
        ("bottom_in_degree", &in_deg, true),
    ];
    for (name, scores, ascending) in tables {
        let t = top_k_of_kind(
            g,
            scores,
            params.top,
            ascending,
            Some(NodeKind::Artifact),
            meta,
        )?;
        out.add_metric(
            name,
            &t,
            vec![(format!("{name}.csv"), report::ranked_csv(&t))],
        )?;
    }
    lap(&mut out, "tables");

    Ok(PipelineOutcome {
        report: out,
        pagerank_converged: pr.converged,
    })
}
