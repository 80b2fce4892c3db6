//! Filter snapshots, trace files and run manifests.
//!
//! Snapshots are versioned JSON with shortest round-trip float formatting,
//! so `load(save(f))` reproduces every weight and efficacy bit for bit.
//! Traces are CSV with one row per sample.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filter::{FilterConfig, NoveltyFilter};
use crate::harness::{TraceRecord, TrialTrace};
use crate::som::{NeuronId, SomGrid};

pub const SNAPSHOT_FORMAT: &str = "hsom-filter-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub generator: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSnapshot {
    pub format: String,
    pub version: u32,
    pub width: usize,
    pub height: usize,
    pub input_dim: usize,
    pub config: FilterConfig,
    pub seed: u64,
    pub learning_enabled: bool,
    /// One vector per neuron, row-major.
    pub weights: Vec<Vec<f64>>,
    pub efficacies: Vec<f64>,
    pub meta: SnapshotMeta,
}

impl FilterSnapshot {
    pub fn capture(filter: &NoveltyFilter, label: &str) -> Self {
        let grid = filter.grid();
        Self {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            width: grid.width(),
            height: grid.height(),
            input_dim: grid.input_dim(),
            config: *filter.config(),
            seed: filter.seed(),
            learning_enabled: filter.learning_enabled(),
            weights: grid
                .all_weights()
                .chunks_exact(grid.input_dim())
                .map(<[f64]>::to_vec)
                .collect(),
            efficacies: filter.efficacies().to_vec(),
            meta: SnapshotMeta {
                generator: concat!("hsom ", env!("CARGO_PKG_VERSION")).to_string(),
                label: label.to_string(),
            },
        }
    }

    pub fn restore(&self) -> Result<NoveltyFilter> {
        let c = &self.config.som;
        if (c.width, c.height, c.input_dim) != (self.width, self.height, self.input_dim) {
            return Err(Error::SnapshotFormat(
                "grid dimensions disagree with the stored configuration".into(),
            ));
        }
        let grid = SomGrid::from_weights(self.config.som, self.weights.clone())?;
        NoveltyFilter::from_parts(
            self.config,
            grid,
            Some(self.efficacies.clone()),
            self.learning_enabled,
            self.seed,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::SnapshotFormat(e.to_string()))?;
        if value.get("format").and_then(|f| f.as_str()) != Some(SNAPSHOT_FORMAT) {
            return Err(Error::SnapshotFormat("not a filter snapshot".into()));
        }
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::SnapshotFormat("missing version".into()))?;
        if version != SNAPSHOT_VERSION as u64 {
            return Err(Error::SnapshotVersion {
                found: version.try_into().unwrap_or(u32::MAX),
                expected: SNAPSHOT_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| Error::SnapshotFormat(e.to_string()))
    }
}

pub fn save_snapshot(filter: &NoveltyFilter, label: &str, destination: &Path) -> Result<()> {
    let text = FilterSnapshot::capture(filter, label).to_json();
    fs::write(destination, text).map_err(|e| Error::io(destination, "write snapshot", e))
}

pub fn load_snapshot(source: &Path) -> Result<NoveltyFilter> {
    let text = fs::read_to_string(source).map_err(|e| Error::io(source, "read snapshot", e))?;
    FilterSnapshot::from_json(&text)?.restore()
}

pub const TRACE_HEADER: [&str; 5] = ["trial", "arc_position", "winner", "distance", "novelty"];

/// CSV text for a trace: a header row, then one row per sample.
pub fn trace_to_csv(trace: &TrialTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for r in &trace.records {
        w.write_record([
            trace.label.clone(),
            r.arc_position.to_string(),
            r.winner.to_string(),
            r.distance.to_string(),
            r.novelty.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn write_trace(trace: &TrialTrace, destination: &Path) -> Result<()> {
    fs::write(destination, trace_to_csv(trace))
        .map_err(|e| Error::io(destination, "write trace", e))
}

/// Parses trace CSV. World name and learning flag are not stored in the
/// file and come back empty/false.
pub fn parse_trace(text: &str, fallback_label: &str) -> Result<TrialTrace> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::TraceFormat(e.to_string()))?
        .clone();
    if headers.iter().ne(TRACE_HEADER) {
        return Err(Error::TraceFormat(format!("unexpected header {headers:?}")));
    }
    let mut trace = TrialTrace::new(fallback_label, "", false);
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::TraceFormat(e.to_string()))?;
        let field = |k: usize| -> Result<&str> {
            row.get(k)
                .ok_or_else(|| Error::TraceFormat(format!("row {} is missing column {k}", i + 2)))
        };
        let num = |k: usize| -> Result<f64> {
            field(k)?
                .parse()
                .map_err(|_| Error::TraceFormat(format!("row {}: bad number in column {k}", i + 2)))
        };
        if i == 0 {
            trace.label = field(0)?.to_string();
        }
        trace.records.push(TraceRecord {
            arc_position: num(1)?,
            winner: NeuronId(
                field(2)?
                    .parse()
                    .map_err(|_| Error::TraceFormat(format!("row {}: bad winner", i + 2)))?,
            ),
            distance: num(3)?,
            novelty: num(4)?,
        });
    }
    Ok(trace)
}

pub fn read_trace(source: &Path) -> Result<TrialTrace> {
    let text = fs::read_to_string(source).map_err(|e| Error::io(source, "read trace", e))?;
    let stem = source
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_trace(&text, &stem)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub world: String,
    pub learning: bool,
    pub file: String,
    pub samples: usize,
    pub mean_novelty: f64,
    pub max_novelty: f64,
    pub above_threshold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub trials: Vec<ManifestEntry>,
    pub snapshots: Vec<String>,
}

/// SHA-256 of a value's JSON encoding, as hex.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serialises");
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// File name used for a trial's trace.
pub fn trace_file_name(label: &str) -> String {
    let safe: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.csv")
}

/// Writes one CSV per trace into `dir` and returns manifest entries.
pub fn write_traces(
    traces: &[TrialTrace],
    dir: &Path,
    threshold: f64,
) -> Result<Vec<ManifestEntry>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, "create directory", e))?;
    traces
        .iter()
        .map(|t| {
            let file = trace_file_name(&t.label);
            write_trace(t, &dir.join(&file))?;
            let s = t.summary(threshold);
            Ok(ManifestEntry {
                label: t.label.clone(),
                world: t.world.clone(),
                learning: t.learning,
                file,
                samples: t.len(),
                mean_novelty: s.mean_novelty,
                max_novelty: s.max_novelty,
                above_threshold: s.above_threshold,
            })
        })
        .collect()
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn write_manifest(manifest: &RunManifest, dir: &Path) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest).expect("manifest serialises");
    fs::write(&path, text).map_err(|e| Error::io(&path, "write manifest", e))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, "read manifest", e))?;
    serde_json::from_str(&text).map_err(|e| Error::TraceFormat(format!("bad manifest: {e}")))
}
