//! Output files. Everything is written under a `.partial` name and renamed
//! into place only when the run finalizes.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use mcflow_core::expander::ExpanderProfile;
use mcflow_core::functionals::FunctionalSeries;
use mcflow_core::geometry::{Clock, Kind, Snapshot};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

fn partial_name(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Tracks every file of a run so they can be renamed together.
#[derive(Debug, Default)]
pub struct Artifacts {
    root: PathBuf,
    pending: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), pending: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Final paths of every file opened so far.
    pub fn pending(&self) -> &[PathBuf] {
        &self.pending
    }

    /// Open `relative` for writing under its `.partial` name.
    pub fn create(&mut self, relative: &str) -> io::Result<BufWriter<File>> {
        let path = self.root.join(relative);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let file = File::create(partial_name(&path))?;
        self.pending.push(path);
        Ok(BufWriter::new(file))
    }

    pub fn write_json<T: Serialize>(&mut self, relative: &str, value: &T) -> io::Result<()> {
        let mut w = self.create(relative)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()
    }

    /// Rename every pending file into place; returns the final paths.
    pub fn finalize(self) -> io::Result<Vec<PathBuf>> {
        for p in &self.pending {
            fs::rename(partial_name(p), p)?;
        }
        Ok(self.pending)
    }
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::PlanarCurve => "PlanarCurve",
        Kind::RevolutionProfile => "RevolutionProfile",
        Kind::RadialGraph => "RadialGraph",
    }
}

fn clock_name(clock: Clock) -> &'static str {
    match clock {
        Clock::Time => "t",
        Clock::Rescaled => "s",
    }
}

#[derive(Serialize)]
pub struct SnapshotSidecar {
    pub schema_version: u32,
    pub kind: &'static str,
    pub dim: usize,
    pub clock: &'static str,
    pub time: f64,
    pub nodes: usize,
    pub closed: bool,
    /// Largest `|x|` on the grid: the truncation radius of the domain.
    pub truncation_radius: f64,
    pub min_edge: f64,
    pub max_second_ff_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expander: Option<ExpanderSidecar>,
}

#[derive(Serialize)]
pub struct ExpanderSidecar {
    pub initial_height: f64,
    pub slope: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub step: f64,
    pub iterations: usize,
}

pub fn snapshot_sidecar(snap: &Snapshot) -> SnapshotSidecar {
    SnapshotSidecar {
        schema_version: SCHEMA_VERSION,
        kind: kind_name(snap.kind()),
        dim: snap.dim(),
        clock: clock_name(snap.clock),
        time: snap.time,
        nodes: snap.len(),
        closed: snap.rep.is_closed(),
        truncation_radius: (0..snap.len()).map(|i| snap.position_sq(i).sqrt()).fold(0.0, f64::max),
        min_edge: snap.min_edge(),
        max_second_ff_sq: snap.max_second_ff_sq(),
        expander: None,
    }
}

/// `<stem>.csv` with one row per node and `<stem>.json` describing it.
pub fn write_snapshot(art: &mut Artifacts, stem: &str, snap: &Snapshot, sidecar: &SnapshotSidecar) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(art.create(&format!("{stem}.csv"))?);
    w.write_record(["index", "x", "y", "mean_curvature", "normal_part", "second_ff_sq", "dmu", "tilt"])?;
    for (i, (p, g)) in snap.points().iter().zip(snap.geometry()).enumerate() {
        w.write_record([
            i.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            g.mean_curvature.to_string(),
            g.normal_part.to_string(),
            g.second_ff_sq.to_string(),
            g.dmu.to_string(),
            g.tilt.to_string(),
        ])?;
    }
    w.flush()?;
    art.write_json(&format!("{stem}.json"), sidecar)
}

pub fn write_expander(art: &mut Artifacts, stem: &str, profile: &ExpanderProfile) -> io::Result<()> {
    let snap = profile.snapshot().map_err(io::Error::other)?;
    let mut side = snapshot_sidecar(&snap);
    side.expander = Some(ExpanderSidecar {
        initial_height: profile.initial_height,
        slope: profile.slope,
        residual: profile.residual,
        tolerance: profile.tolerance,
        step: profile.step,
        iterations: profile.iterations,
    });
    write_snapshot(art, stem, &snap, &side)
}

/// `clock,value,truncation,excluded_fraction` rows.
pub fn write_series(art: &mut Artifacts, relative: &str, series: &FunctionalSeries) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(art.create(relative)?);
    w.write_record(["clock", "value", "truncation", "excluded_fraction"])?;
    for s in &series.samples {
        w.write_record([s.clock.to_string(), s.value.to_string(), s.truncation.to_string(), s.excluded_fraction.to_string()])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_stay_partial_until_finalized() {
        let dir = tempfile::tempdir().unwrap();
        let mut art = Artifacts::new(dir.path()).unwrap();
        art.write_json("a/summary.json", &serde_json::json!({"x": 1})).unwrap();
        assert!(dir.path().join("a/summary.json.partial").exists());
        assert!(!dir.path().join("a/summary.json").exists());
        let done = art.finalize().unwrap();
        assert_eq!(done, vec![dir.path().join("a/summary.json")]);
        assert!(dir.path().join("a/summary.json").exists());
        assert!(!dir.path().join("a/summary.json.partial").exists());
    }
}
