//! Ranked tables, CSV serializers and the on-disk report bundle.
//!
//! A bundle directory holds `report.json` (the versioned envelope),
//! `config.json`, one file per metric artifact and `timings.json`.
//! Everything except `timings.json` is a pure function of the inputs and the
//! run configuration.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{DependencyGraph, NodeKind};
use crate::metrics::{ComponentLabeling, DegreeHistogram, ScoreMap};
use crate::powerlaw::BinnedSeries;
use crate::resilience::CurvePoint;

pub const FORMAT_VERSION: u32 = 1;

/// JSON schema for `report.json`.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPaths {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nodes: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub edges: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub meta: Option<String>,
    #[serde(default)]
    pub relaxed_kinds: bool,
}

/// Everything needed to repeat a run. Thread count is deliberately absent:
/// it never changes the numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub format_version: u32,
    pub subcommand: String,
    pub inputs: InputPaths,
    pub output: String,
    pub params: Value,
}

impl RunConfig {
    pub fn new(
        subcommand: &str,
        inputs: InputPaths,
        output: &str,
        params: impl Serialize,
    ) -> Result<Self> {
        Ok(RunConfig {
            format_version: FORMAT_VERSION,
            subcommand: subcommand.to_string(),
            inputs,
            output: output.to_string(),
            params: serde_json::to_value(params)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaEntry {
    pub category: String,
    pub tags: String,
}

/// Optional `id,category,tags` sidecar, passed through into ranked tables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    entries: HashMap<String, MetaEntry>,
}

impl Metadata {
    pub fn get(&self, id: &str) -> Option<&MetaEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, id: &str, category: &str, tags: &str) {
        self.entries.insert(
            id.to_string(),
            MetaEntry {
                category: category.to_string(),
                tags: tags.to_string(),
            },
        );
    }
}

pub fn load_metadata(path: &Path) -> Result<Metadata> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_metadata(file).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

pub fn read_metadata<R: Read>(reader: R) -> std::result::Result<Metadata, String> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["id", "category", "tags"] {
        return Err(format!(
            "expected header id,category,tags, got {:?}",
            header.iter().collect::<Vec<_>>()
        ));
    }
    let mut meta = Metadata::default();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let id = row.get(0).map(str::trim).unwrap_or("");
        if id.is_empty() {
            return Err(format!("row {}: empty id", line + 2));
        }
        meta.insert(
            id,
            row.get(1).map(str::trim).unwrap_or(""),
            row.get(2).map(str::trim).unwrap_or(""),
        );
    }
    Ok(meta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: usize,
    pub node_id: String,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub category: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tags: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTable {
    pub metric: String,
    pub k: usize,
    pub ascending: bool,
    pub rows: Vec<RankedRow>,
}

/// The `k` highest (or lowest, with `ascending`) scoring nodes, ties broken
/// by node id.
pub fn top_k(
    graph: &DependencyGraph,
    scores: &ScoreMap,
    k: usize,
    ascending: bool,
    meta: Option<&Metadata>,
) -> Result<RankedTable> {
    top_k_of_kind(graph, scores, k, ascending, None, meta)
}

/// [`top_k`] restricted to nodes of one kind.
pub fn top_k_of_kind(
    graph: &DependencyGraph,
    scores: &ScoreMap,
    k: usize,
    ascending: bool,
    kind: Option<NodeKind>,
    meta: Option<&Metadata>,
) -> Result<RankedTable> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if scores.len() != graph.node_count() {
        return Err(Error::InvalidParameter(format!(
            "{} scores for {} nodes",
            scores.len(),
            graph.node_count()
        )));
    }
    let mut nodes: Vec<usize> = (0..graph.node_count())
        .filter(|&v| kind.is_none_or(|k| graph.kind(v) == k))
        .collect();
    nodes.sort_by(|&a, &b| {
        let by_score = if ascending {
            scores.get(a).total_cmp(&scores.get(b))
        } else {
            scores.get(b).total_cmp(&scores.get(a))
        };
        by_score.then_with(|| graph.id(a).cmp(graph.id(b)))
    });
    nodes.truncate(k);
    let rows = nodes
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let id = graph.id(v);
            let entry = meta.and_then(|m| m.get(id));
            RankedRow {
                rank: i + 1,
                node_id: id.to_string(),
                score: scores.get(v),
                category: entry.map(|e| e.category.clone()),
                tags: entry.map(|e| e.tags.clone()),
            }
        })
        .collect();
    Ok(RankedTable {
        metric: scores.metric.clone(),
        k,
        ascending,
        rows,
    })
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `node_id,score` in node index order.
pub fn score_csv(graph: &DependencyGraph, scores: &ScoreMap) -> Vec<u8> {
    csv_bytes(
        &["node_id", "score"],
        scores
            .scores
            .iter()
            .enumerate()
            .map(|(v, s)| vec![graph.id(v).to_string(), s.to_string()]),
    )
}

/// `degree,count` in ascending degree.
pub fn histogram_csv(hist: &DegreeHistogram) -> Vec<u8> {
    csv_bytes(
        &["degree", "count"],
        hist.counts
            .iter()
            .map(|(d, c)| vec![d.to_string(), c.to_string()]),
    )
}

pub fn labels_csv(graph: &DependencyGraph, labels: &ComponentLabeling) -> Vec<u8> {
    csv_bytes(
        &["node_id", "component_id"],
        labels
            .labels
            .iter()
            .enumerate()
            .map(|(v, c)| vec![graph.id(v).to_string(), c.to_string()]),
    )
}

pub fn curve_csv(points: &[CurvePoint]) -> Vec<u8> {
    csv_bytes(
        &["fraction_removed", "lcc_fraction"],
        points
            .iter()
            .map(|p| vec![p.fraction_removed.to_string(), p.lcc_fraction.to_string()]),
    )
}

pub fn binned_csv(series: &BinnedSeries) -> Vec<u8> {
    csv_bytes(
        &["bin_lo", "bin_hi", "degree", "count", "density"],
        series.points.iter().map(|b| {
            vec![
                b.lo.to_string(),
                b.hi.to_string(),
                b.degree.to_string(),
                b.count.to_string(),
                b.density.to_string(),
            ]
        }),
    )
}

pub fn ranked_csv(table: &RankedTable) -> Vec<u8> {
    csv_bytes(
        &["rank", "node_id", "score", "category", "tags"],
        table.rows.iter().map(|r| {
            vec![
                r.rank.to_string(),
                r.node_id.clone(),
                r.score.to_string(),
                r.category.clone().unwrap_or_default(),
                r.tags.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub name: String,
    pub files: Vec<String>,
    pub summary: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

/// Results collected by a run, ready to be written with [`emit_bundle`].
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: RunConfig,
    pub metrics: Vec<MetricEntry>,
    pub files: BTreeMap<String, Vec<u8>>,
    pub timings: Vec<Timing>,
}

#[derive(Serialize, Deserialize)]
pub struct Envelope {
    pub format: u32,
    pub config: RunConfig,
    pub metrics: Vec<MetricEntry>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            config,
            metrics: Vec::new(),
            files: BTreeMap::new(),
            timings: Vec::new(),
        }
    }

    /// Records a metric with its summary and the files it produced.
    pub fn add_metric(
        &mut self,
        name: &str,
        summary: impl Serialize,
        files: Vec<(String, Vec<u8>)>,
    ) -> Result<()> {
        let mut names = Vec::with_capacity(files.len());
        for (file, bytes) in files {
            if [REPORT_FILE, CONFIG_FILE, TIMINGS_FILE].contains(&file.as_str())
                || self.files.contains_key(&file)
            {
                return Err(Error::InvalidParameter(format!(
                    "duplicate bundle file {file}"
                )));
            }
            names.push(file.clone());
            self.files.insert(file, bytes);
        }
        self.metrics.push(MetricEntry {
            name: name.to_string(),
            files: names,
            summary: serde_json::to_value(summary)?,
        });
        Ok(())
    }

    pub fn add_timing(&mut self, step: &str, seconds: f64) {
        self.timings.push(Timing {
            step: step.to_string(),
            seconds,
        });
    }

    pub fn envelope_bytes(&self) -> Result<Vec<u8>> {
        json_bytes(&Envelope {
            format: FORMAT_VERSION,
            config: self.config.clone(),
            metrics: self.metrics.clone(),
        })
    }

    pub fn metric(&self, name: &str) -> Option<&MetricEntry> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Writes the bundle into `dir`, creating it if needed and overwriting any
/// files of the same name. Returns the written paths.
pub fn emit_bundle(dir: &Path, report: &Report) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    put(REPORT_FILE, &report.envelope_bytes()?)?;
    put(CONFIG_FILE, &json_bytes(&report.config)?)?;
    for (name, bytes) in &report.files {
        put(name, bytes)?;
    }
    put(TIMINGS_FILE, &json_bytes(&report.timings)?)?;
    Ok(written)
}

/// Reads `report.json` from a bundle directory and checks its format.
pub fn read_envelope(dir: &Path) -> Result<Envelope> {
    let path = dir.join(REPORT_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let env: Envelope = serde_json::from_slice(&bytes).map_err(|e| Error::Format {
        path: path.clone(),
        message: e.to_string(),
    })?;
    if env.format != FORMAT_VERSION {
        return Err(Error::Format {
            path,
            message: format!("unsupported report format {}", env.format),
        });
    }
    Ok(env)
}
