//! Trajectory CSV and run manifest.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::error::Result;
use crate::transport::grid_nodes;

use super::{RunStats, Snapshot, SolverConfig};

pub const TRAJECTORY_HEADER: &str = "t,R,max_c,max_w,max_p,max_q,max_d,sum_drift";

/// Row of the trajectory table. Maxima are taken over the transport grid;
/// `sum_drift` is `max |p + q + d - N| / N`.
pub fn trajectory_row(snap: &Snapshot, n_total: f64) -> [f64; 8] {
    let cells = snap.p.cells();
    let nodes = grid_nodes(cells);
    let max_of = |f: &dyn Fn(f64) -> f64| nodes.iter().map(|&r| f(r)).fold(f64::NEG_INFINITY, f64::max);
    let max_c = max_of(&|r| snap.c_at(r));
    let max_w = max_of(&|r| snap.w_at(r));
    let (p, q, d) = (snap.p.values(), snap.q.values(), snap.d.values());
    let fold = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let drift = (0..=cells)
        .map(|j| (p[j] + q[j] + d[j] - n_total).abs() / n_total)
        .fold(0.0, f64::max);
    [snap.time, snap.radius, max_c, max_w, fold(p), fold(q), fold(d), drift]
}

pub fn trajectory_csv(trajectory: &[Snapshot], n_total: f64) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for snap in trajectory {
        let row = trajectory_row(snap, n_total);
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(path: &Path, trajectory: &[Snapshot], n_total: f64) -> Result<()> {
    std::fs::write(path, trajectory_csv(trajectory, n_total))?;
    Ok(())
}

/// Record of how a run was produced.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: SolverConfig,
    pub wall_time: Duration,
    pub stats: Option<RunStats>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# fbp run manifest; the uncommented lines form a valid config file");
        let _ = writeln!(out, "# version = {}", self.version);
        let _ = writeln!(out, "# command = {}", self.command);
        let _ = writeln!(out, "# config_hash = {}", self.config.hash());
        let _ = writeln!(out, "# wall_time_seconds = {:.3}", self.wall_time.as_secs_f64());
        if let Some(s) = &self.stats {
            let _ = writeln!(out, "# steps_taken = {}", s.steps);
            let _ = writeln!(out, "# clamped_feet = {}", s.clamped);
            let _ = writeln!(out, "# clamp_fraction = {:e}", s.clamp_fraction());
            let _ = writeln!(out, "# max_condition = {:e}", s.max_condition);
            let _ = writeln!(out, "# max_residual = {:e}", s.max_residual);
            let _ = writeln!(out, "# history_reads = {}", s.history_reads);
            let _ = writeln!(out, "# transport_seconds = {:.3}", s.transport_time.as_secs_f64());
            let _ = writeln!(out, "# parabolic_seconds = {:.3}", s.parabolic_time.as_secs_f64());
            let _ = writeln!(out, "# history_seconds = {:.3}", s.history_time.as_secs_f64());
        }
        out.push('\n');
        out.push_str(&self.config.to_text());
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
