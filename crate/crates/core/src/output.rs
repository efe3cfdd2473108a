//! Run artifact writers: trajectory/metrics/events CSV, the scenario echo,
//! and a manifest tying them together. All files are written atomically
//! (temp file in the target directory, then rename).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{EventKind, RunResult, Termination};
use crate::error::{Error, Result};
use crate::scenario::save_scenario;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    /// Data rows, excluding the header.
    pub rows: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub generator: String,
    pub termination: Termination,
    pub t_gathered: Option<f64>,
    /// Largest single-step increase of any initially-visible pair distance.
    pub max_edge_step_increase: f64,
    pub files: Vec<ManifestFile>,
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    agent_id: u32,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    multiplicity: u32,
}

#[derive(Serialize)]
struct EventRow {
    t: f64,
    kind: &'static str,
    detail: String,
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<u64> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut count = 0u64;
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Parse { path: path.to_path_buf(), detail: e.to_string() })?;
        count += 1;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Parse { path: path.to_path_buf(), detail: e.to_string() })?;
    write_atomic(path, &bytes)?;
    Ok(count)
}

fn event_row(time: f64, kind: &EventKind) -> EventRow {
    let (kind_name, detail) = match kind {
        EventKind::Merge { ids, survivor } => {
            let ids: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
            ("merge", format!("ids={};survivor={survivor}", ids.join("+")))
        }
        EventKind::VisibilityEdgeAdded { a, b } => ("visibility_edge_added", format!("{a}-{b}")),
        EventKind::SurroundedToggle { id, surrounded } => {
            ("surrounded_toggle", format!("id={id};surrounded={surrounded}"))
        }
        EventKind::ConnectivityViolation { a, b, distance } => {
            ("connectivity_violation", format!("{a}-{b};distance={distance}"))
        }
    };
    EventRow { t: time, kind: kind_name, detail }
}

/// Writes trajectory.csv, metrics.csv, events.csv, scenario.json, and
/// manifest.json under `out_dir`, creating the directory if needed.
pub fn write_run(run: &RunResult, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let traj_rows = write_csv(
        &out_dir.join("trajectory.csv"),
        run.trajectory.iter().flat_map(|s| {
            s.agents.iter().map(move |a| TrajectoryRow {
                t: s.t,
                agent_id: a.id,
                x: a.x,
                y: a.y,
                vx: a.vx,
                vy: a.vy,
                multiplicity: a.multiplicity,
            })
        }),
    )?;
    let metric_rows = write_csv(&out_dir.join("metrics.csv"), run.metrics.iter())?;
    let event_rows = write_csv(
        &out_dir.join("events.csv"),
        run.events.iter().map(|e| event_row(e.time, &e.kind)),
    )?;
    save_scenario(&run.scenario, &out_dir.join("scenario.json"))?;

    let manifest = Manifest {
        format_version: crate::scenario::SCENARIO_FORMAT_VERSION,
        generator: run.scenario.generator.clone(),
        termination: run.termination,
        t_gathered: run.gathered_time(),
        max_edge_step_increase: run.ledger.max_increase(),
        files: vec![
            ManifestFile { name: "trajectory.csv".into(), rows: traj_rows },
            ManifestFile { name: "metrics.csv".into(), rows: metric_rows },
            ManifestFile { name: "events.csv".into(), rows: event_rows },
            ManifestFile { name: "scenario.json".into(), rows: 1 },
        ],
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&out_dir.join("manifest.json"), json.as_bytes())?;
    Ok(manifest)
}

pub fn manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join("manifest.json")
}
