//! Run persistence: `run.csv`, `manifest.json`, optional plots and agent traces.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::canonical::format_float;
use super::svg::{Axis, Band, LineChart, Series};
use crate::analysis::phases::{classify_phases_default, DEFAULT_WINDOW};
use crate::engine::RunOutput;
use crate::error::{Error, Result};

pub const RUN_CSV: &str = "run.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const AGENTS_CSV: &str = "agents.csv";
pub const SATISFACTION_SVG: &str = "satisfaction.svg";
pub const SEGMENTS_SVG: &str = "segments.svg";
pub const PHASES_SVG: &str = "phases.svg";

#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    pub plots: bool,
    pub agent_traces: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngInfo {
    pub seed_expansion: String,
    pub stream: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_digest: String,
    pub seed: u64,
    pub rng: RngInfo,
    /// Seconds since the Unix epoch; not part of the digest.
    pub timestamp_unix: u64,
    pub files: Vec<String>,
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn run_csv_header(run: &RunOutput) -> Vec<String> {
    let mut header: Vec<String> = [
        "t",
        "capability",
        "capability_effective",
        "frac_potential",
        "frac_active",
        "frac_churned",
        "mean_log_reference",
        "mean_satisfaction",
        "s_q25",
        "s_q75",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(run.segment_names.iter().map(|n| format!("seg_{n}_mean_s")));
    header.push("interventions_applied".into());
    header
}

fn csv_writer() -> csv::WriterBuilder {
    let mut b = csv::WriterBuilder::new();
    b.terminator(csv::Terminator::Any(b'\n'));
    b
}

/// The per-step table. LF line endings, `.` decimals, shortest round-trip numbers.
pub fn run_csv(run: &RunOutput) -> Result<String> {
    let mut w = csv_writer().from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::io(RUN_CSV, e);
    w.write_record(run_csv_header(run)).map_err(to_err)?;
    for s in &run.steps {
        let q = s.satisfaction_quartiles;
        let mut row = vec![
            s.t.to_string(),
            format_float(s.capability),
            format_float(s.capability_effective),
            format_float(s.frac_potential),
            format_float(s.frac_active),
            format_float(s.frac_churned),
            opt(s.mean_log_reference),
            opt(s.mean_satisfaction),
            opt(q.map(|q| q[0])),
            opt(q.map(|q| q[2])),
        ];
        row.extend(s.segment_mean_satisfaction.iter().map(|m| opt(*m)));
        row.push(s.interventions_applied.join(";"));
        w.write_record(&row).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(RUN_CSV, e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Long-format per-agent traces: one row per agent per step.
pub fn agents_csv(run: &RunOutput) -> Result<Option<String>> {
    let Some(traces) = &run.traces else {
        return Ok(None);
    };
    let mut w = csv_writer().from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::io(AGENTS_CSV, e);
    w.write_record(["t", "agent_id", "segment", "gamma", "satisfaction", "log_reference"])
        .map_err(to_err)?;
    for t in 0..run.horizon() {
        for tr in traces {
            w.write_record([
                t.to_string(),
                tr.id.to_string(),
                tr.segment.clone(),
                format_float(tr.gamma),
                opt(tr.satisfaction[t]),
                format_float(tr.log_reference[t]),
            ])
            .map_err(to_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::io(AGENTS_CSV, e))?;
    Ok(Some(String::from_utf8(bytes).expect("csv output is utf-8")))
}

pub fn satisfaction_chart(run: &RunOutput) -> LineChart {
    LineChart {
        title: "Capability vs. satisfaction".into(),
        x_label: "step".into(),
        left_label: "mean satisfaction (active)".into(),
        right_label: "capability".into(),
        series: vec![
            Series { label: "mean satisfaction".into(), values: run.mean_satisfaction_series(), axis: Axis::Left },
            Series {
                label: "capability".into(),
                values: run.steps.iter().map(|s| Some(s.capability_effective)).collect(),
                axis: Axis::Right,
            },
        ],
        bands: Vec::new(),
    }
}

pub fn segments_chart(run: &RunOutput) -> LineChart {
    LineChart {
        title: "Satisfaction by adopter segment".into(),
        x_label: "step".into(),
        left_label: "mean satisfaction (active)".into(),
        right_label: String::new(),
        series: run
            .segment_names
            .iter()
            .enumerate()
            .map(|(i, name)| Series { label: name.clone(), values: run.segment_series(i), axis: Axis::Left })
            .collect(),
        bands: Vec::new(),
    }
}

/// Mean satisfaction with classified phases shaded. Leading steps without
/// active agents are skipped; interior gaps carry the previous value.
pub fn phases_chart(run: &RunOutput) -> LineChart {
    let series = run.mean_satisfaction_series();
    let bands = match filled_series(&series) {
        Some((offset, values)) if values.len() > DEFAULT_WINDOW => classify_phases_default(&values)
            .map(|labels| {
                labels
                    .into_iter()
                    .map(|p| Band { label: p.kind.to_string(), start: p.start + offset, end: p.end + offset })
                    .collect()
            })
            .unwrap_or_default(),
        _ => Vec::new(),
    };
    LineChart {
        title: "Satisfaction phases".into(),
        x_label: "step".into(),
        left_label: "mean satisfaction (active)".into(),
        right_label: String::new(),
        series: vec![Series { label: "mean satisfaction".into(), values: series, axis: Axis::Left }],
        bands,
    }
}

/// Drop leading gaps and forward-fill the rest; returns the offset of the first value.
pub fn filled_series(series: &[Option<f64>]) -> Option<(usize, Vec<f64>)> {
    let offset = series.iter().position(Option::is_some)?;
    let mut last = series[offset].expect("position found a value");
    let values = series[offset..]
        .iter()
        .map(|v| {
            if let Some(v) = v {
                last = *v;
            }
            last
        })
        .collect();
    Some((offset, values))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

/// Write a run's files into `out_dir` and return the manifest written alongside them.
pub fn emit_run(run: &RunOutput, out_dir: impl AsRef<Path>, options: EmitOptions) -> Result<RunManifest> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();

    write_file(dir, RUN_CSV, &run_csv(run)?)?;
    files.push(RUN_CSV.to_string());

    if options.agent_traces {
        if let Some(csv) = agents_csv(run)? {
            write_file(dir, AGENTS_CSV, &csv)?;
            files.push(AGENTS_CSV.to_string());
        }
    }

    if options.plots {
        for (name, chart) in [
            (SATISFACTION_SVG, satisfaction_chart(run)),
            (SEGMENTS_SVG, segments_chart(run)),
            (PHASES_SVG, phases_chart(run)),
        ] {
            write_file(dir, name, &chart.render())?;
            files.push(name.to_string());
        }
    }

    files.push(MANIFEST_JSON.to_string());
    let manifest = RunManifest {
        tool_version: run.info.tool_version.clone(),
        scenario_digest: run.info.config_digest.clone(),
        seed: run.info.seed,
        rng: RngInfo {
            seed_expansion: run.info.seed_expansion.clone(),
            stream: run.info.stream_algorithm.clone(),
        },
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(dir, MANIFEST_JSON, &json)?;
    Ok(manifest)
}

/// Write a finished table (already rendered as CSV text) to `path`.
pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<PathBuf> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}
