//! CSV and JSON artifact writers.
//!
//! Every real number is written with 17 significant digits so that
//! artifacts round-trip exactly and identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::fbm::{FbmPath, NoiseField};
use crate::fou::FouPath;
use crate::lattice::LatticeVector;

/// `x` in scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// `t,value`
pub fn path_csv(path: &FbmPath) -> String {
    let mut s = String::from("t,value\n");
    for (k, t) in path.grid().times().enumerate() {
        let _ = writeln!(s, "{},{}", num(t), num(path.value(k)));
    }
    s
}

/// `t,site,w1,w2`
pub fn noise_csv(noise: &NoiseField) -> String {
    let mut s = String::from("t,site,w1,w2\n");
    let half = noise.half_width() as i64;
    for (k, t) in noise.grid().times().enumerate() {
        let (w1, w2) = (noise.w1_row(k), noise.w2_row(k));
        for (j, (a, b)) in w1.iter().zip(w2).enumerate() {
            let _ = writeln!(s, "{},{},{},{}", num(t), j as i64 - half, num(*a), num(*b));
        }
    }
    s
}

/// `site,value`
pub fn lattice_csv(u: &LatticeVector) -> String {
    let mut s = String::from("site,value\n");
    for (j, x) in u.values().iter().enumerate() {
        let _ = writeln!(s, "{},{}", u.first_site() + j as i64, num(*x));
    }
    s
}

/// `t,site,u,v`
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,site,u,v\n");
    let half = traj.config().half_width() as i64;
    for (k, t) in traj.grid().times().enumerate() {
        for (j, (a, b)) in traj.u_row(k).iter().zip(traj.v_row(k)).enumerate() {
            let _ = writeln!(s, "{},{},{},{}", num(t), j as i64 - half, num(*a), num(*b));
        }
    }
    s
}

/// `t,site,value`
pub fn fou_csv(path: &FouPath) -> String {
    let mut s = String::from("t,site,value\n");
    let half = (path.n_sites() / 2) as i64;
    for (k, t) in path.grid().times().enumerate() {
        for (j, x) in path.row(k).iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", num(t), j as i64 - half, num(*x));
        }
    }
    s
}

/// `t,log_sq_dist`
pub fn distance_csv(series: &[(f64, f64)]) -> String {
    let mut s = String::from("t,log_sq_dist\n");
    for &(t, d) in series {
        let _ = writeln!(s, "{},{}", num(t), num(d));
    }
    s
}

pub fn write_csv(path: impl AsRef<Path>, text: &str) -> Result<()> {
    write_text(path.as_ref(), text)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path.as_ref(), &text)
}

/// Summary written next to a trajectory CSV.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary<'a> {
    pub params: &'a crate::dynamics::SystemParams,
    pub seed: u64,
    pub e_norm_series: Vec<(f64, f64)>,
}

impl<'a> TrajectorySummary<'a> {
    pub fn new(traj: &'a Trajectory, seed: u64) -> Self {
        Self {
            params: traj.params(),
            seed,
            e_norm_series: traj
                .e_norm_sq_series()
                .into_iter()
                .map(|(t, e)| (t, e.sqrt()))
                .collect(),
        }
    }
}

/// Common envelope of experiment reports.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub series: serde_json::Value,
    pub fitted_rates: serde_json::Value,
    pub bounds: serde_json::Value,
    pub pass: bool,
}
