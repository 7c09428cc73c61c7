//! Monte-Carlo validation of sampled paths against the closed-form law.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::TimeGrid;
use super::path::sample_fbm_stream;
use super::synth::{fbm_covariance, FbmMethod, Hurst};
use crate::error::Result;

/// Number of standard errors allowed per covariance entry.
pub const BAND_SIGMAS: f64 = 4.0;

/// Uncentred second-moment matrix of `n_paths` sampled paths at grid points
/// `1..=n_steps` (the value at 0 is identically zero).
#[derive(Debug, Clone)]
pub struct EmpiricalCovariance {
    pub times: Vec<f64>,
    pub n_paths: usize,
    /// Row-major `times.len()²` matrix.
    pub matrix: Vec<f64>,
}

impl EmpiricalCovariance {
    pub fn dim(&self) -> usize {
        self.times.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim() + j]
    }
}

pub fn empirical_covariance(
    grid: TimeGrid,
    hurst: Hurst,
    method: FbmMethod,
    n_paths: usize,
    seed: u64,
) -> Result<EmpiricalCovariance> {
    let d = grid.n_steps();
    let paths: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| sample_fbm_stream(grid, hurst, seed, p, method).map(|path| path.values()))
        .collect::<Result<_>>()?;
    let mut matrix = vec![0.0; d * d];
    for path in &paths {
        let x = &path[1..];
        for i in 0..d {
            let xi = x[i];
            let row = &mut matrix[i * d..(i + 1) * d];
            for j in 0..d {
                row[j] += xi * x[j];
            }
        }
    }
    let inv = 1.0 / n_paths as f64;
    matrix.iter_mut().for_each(|m| *m *= inv);
    Ok(EmpiricalCovariance {
        times: (1..=d).map(|k| grid.time(k)).collect(),
        n_paths,
        matrix,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceCheck {
    pub method: FbmMethod,
    pub hurst: f64,
    pub n_paths: usize,
    pub n_entries: usize,
    pub violations: usize,
    /// Largest |empirical − exact| / standard error over all entries.
    pub max_z: f64,
    pub band_sigmas: f64,
    pub pass: bool,
}

/// For Gaussian `X, Y` with known zero mean the uncentred estimator of
/// `E[XY]` has variance `(C_xx C_yy + C_xy²) / n`.
fn entry_stderr(cii: f64, cjj: f64, cij: f64, n: usize) -> f64 {
    ((cii * cjj + cij * cij) / n as f64).sqrt()
}

/// Entrywise `BAND_SIGMAS` band test of an empirical covariance against
/// `fbm_covariance`.
pub fn check_against_law(emp: &EmpiricalCovariance, hurst: f64, method: FbmMethod) -> Result<CovarianceCheck> {
    let d = emp.dim();
    let mut exact = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            exact[i * d + j] = fbm_covariance(emp.times[i], emp.times[j], hurst)?;
        }
    }
    let (mut violations, mut max_z, mut n_entries) = (0, 0.0_f64, 0);
    for i in 0..d {
        for j in i..d {
            let c = exact[i * d + j];
            let se = entry_stderr(exact[i * d + i], exact[j * d + j], c, emp.n_paths);
            let z = (emp.get(i, j) - c).abs() / se;
            max_z = max_z.max(z);
            n_entries += 1;
            if z > BAND_SIGMAS {
                violations += 1;
            }
        }
    }
    Ok(CovarianceCheck {
        method,
        hurst,
        n_paths: emp.n_paths,
        n_entries,
        violations,
        max_z,
        band_sigmas: BAND_SIGMAS,
        pass: violations == 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodComparison {
    pub first: FbmMethod,
    pub second: FbmMethod,
    pub hurst: f64,
    pub violations: usize,
    pub max_z: f64,
    pub pass: bool,
}

/// Two-sample band test: independent estimates differ by at most
/// `BAND_SIGMAS · √2 · se` entrywise.
pub fn compare_methods(
    a: &EmpiricalCovariance,
    b: &EmpiricalCovariance,
    hurst: f64,
    first: FbmMethod,
    second: FbmMethod,
) -> Result<MethodComparison> {
    let d = a.dim();
    let (mut violations, mut max_z) = (0, 0.0_f64);
    for i in 0..d {
        for j in i..d {
            let cii = fbm_covariance(a.times[i], a.times[i], hurst)?;
            let cjj = fbm_covariance(a.times[j], a.times[j], hurst)?;
            let cij = fbm_covariance(a.times[i], a.times[j], hurst)?;
            let se_a = entry_stderr(cii, cjj, cij, a.n_paths);
            let se_b = entry_stderr(cii, cjj, cij, b.n_paths);
            let z = (a.get(i, j) - b.get(i, j)).abs() / (se_a * se_a + se_b * se_b).sqrt();
            max_z = max_z.max(z);
            if z > BAND_SIGMAS {
                violations += 1;
            }
        }
    }
    Ok(MethodComparison {
        first,
        second,
        hurst,
        violations,
        max_z,
        pass: violations == 0,
    })
}
