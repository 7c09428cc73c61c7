//! Exact-covariance synthesis of fractional Gaussian noise.
//!
//! Three independent constructions of the same Gaussian law:
//! circulant embedding (Davies–Harte), the Hosking / Durbin–Levinson
//! recursion, and dense Cholesky factorisation of the fBm covariance.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative floor below which negative circulant eigenvalues are treated as
/// rounding noise and clamped to zero.
pub const EMBED_EPS: f64 = 1e-10;

/// Hurst index of a fractional Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    /// Production constructor: `H` must lie strictly inside (1/2, 1).
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.5 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(invalid(
                "hurst",
                format!("must lie in the open interval (1/2, 1), got {h}"),
            ))
        }
    }

    /// Admits any `H` in (0, 1); used for sanity comparisons such as the
    /// Brownian case `H = 1/2`.
    pub fn diagnostic(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(invalid("hurst", format!("must lie in (0, 1), got {h}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Hurst {
    type Error = Error;

    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FbmMethod {
    DaviesHarte,
    Hosking,
    Cholesky,
}

impl FbmMethod {
    pub const ALL: [FbmMethod; 3] = [FbmMethod::DaviesHarte, FbmMethod::Hosking, FbmMethod::Cholesky];

    pub fn name(self) -> &'static str {
        match self {
            FbmMethod::DaviesHarte => "davies_harte",
            FbmMethod::Hosking => "hosking",
            FbmMethod::Cholesky => "cholesky",
        }
    }
}

impl std::str::FromStr for FbmMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "davies_harte" => Ok(Self::DaviesHarte),
            "hosking" => Ok(Self::Hosking),
            "cholesky" => Ok(Self::Cholesky),
            other => Err(invalid(
                "method",
                format!("expected one of davies_harte, hosking, cholesky; got `{other}`"),
            )),
        }
    }
}

/// `E β(t) β(s) = ½(|t|^{2H} + |s|^{2H} − |t−s|^{2H})`.
pub fn fbm_covariance(s: f64, t: f64, h: f64) -> Result<f64> {
    if !(s.is_finite() && t.is_finite()) {
        return Err(invalid("time", "covariance arguments must be finite"));
    }
    if !(h.is_finite() && h > 0.0 && h < 1.0) {
        return Err(invalid("hurst", format!("must lie in (0, 1), got {h}")));
    }
    let e = 2.0 * h;
    Ok(0.5 * (t.abs().powf(e) + s.abs().powf(e) - (t - s).abs().powf(e)))
}

/// Autocovariance at lag `k` of increments of an fBm sampled with step `dt`.
pub fn fgn_autocovariance(k: usize, h: f64, dt: f64) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    if !(h.is_finite() && h > 0.0 && h < 1.0) {
        return Err(invalid("hurst", format!("must lie in (0, 1), got {h}")));
    }
    Ok(fgn_acov(k, h, dt))
}

fn fgn_acov(k: usize, h: f64, dt: f64) -> f64 {
    let e = 2.0 * h;
    let k = k as f64;
    0.5 * dt.powf(e) * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// `n` increments of fBm with step `dt`, drawn from `rng` with `method`.
pub fn sample_fgn<R: Rng + ?Sized>(
    n: usize,
    hurst: Hurst,
    dt: f64,
    method: FbmMethod,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n_steps", "must be at least 1"));
    }
    match method {
        FbmMethod::DaviesHarte => davies_harte(n, hurst.value(), dt, rng),
        FbmMethod::Hosking => Ok(hosking(n, hurst.value(), dt, rng)),
        FbmMethod::Cholesky => cholesky(n, hurst.value(), dt, rng),
    }
}

/// Eigenvalues of the minimal circulant embedding (size `2n`) of the fGn
/// covariance, after the clamping rule.
pub fn circulant_eigenvalues(n: usize, h: f64, dt: f64) -> Result<Vec<f64>> {
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex::new(fgn_acov(lag, h, dt), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut row);
    let max = row.iter().map(|c| c.re).fold(0.0_f64, f64::max);
    let threshold = EMBED_EPS * max;
    let mut eig = Vec::with_capacity(m);
    for c in &row {
        if c.re < -threshold {
            return Err(Error::EmbeddingFailed {
                min_eigenvalue: c.re,
                threshold,
            });
        }
        eig.push(c.re.max(0.0));
    }
    Ok(eig)
}

fn davies_harte<R: Rng + ?Sized>(n: usize, h: f64, dt: f64, rng: &mut R) -> Result<Vec<f64>> {
    let m = 2 * n;
    let eig = circulant_eigenvalues(n, h, dt)?;
    let mf = m as f64;
    let mut w = vec![Complex::new(0.0, 0.0); m];
    w[0] = Complex::new((eig[0] / mf).sqrt() * normal(rng), 0.0);
    w[n] = Complex::new((eig[n] / mf).sqrt() * normal(rng), 0.0);
    for k in 1..n {
        let s = (eig[k] / (2.0 * mf)).sqrt();
        let z = Complex::new(s * normal(rng), s * normal(rng));
        w[k] = z;
        w[m - k] = z.conj();
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut w);
    Ok(w[..n].iter().map(|c| c.re).collect())
}

fn hosking<R: Rng + ?Sized>(n: usize, h: f64, dt: f64, rng: &mut R) -> Vec<f64> {
    let gamma: Vec<f64> = (0..n).map(|k| fgn_acov(k, h, dt)).collect();
    let mut x = Vec::with_capacity(n);
    let mut phi = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut v = gamma[0];
    x.push(v.sqrt() * normal(rng));
    for k in 1..n {
        // Durbin–Levinson update of the order-k prediction coefficients.
        let mut num = gamma[k];
        for j in 1..k {
            num -= prev[j] * gamma[k - j];
        }
        let reflection = num / v;
        phi[k] = reflection;
        for j in 1..k {
            phi[j] = prev[j] - reflection * prev[k - j];
        }
        v *= 1.0 - reflection * reflection;
        let mean: f64 = (1..=k).map(|j| phi[j] * x[k - j]).sum();
        x.push(mean + v.max(0.0).sqrt() * normal(rng));
        prev[1..=k].copy_from_slice(&phi[1..=k]);
    }
    x
}

fn cholesky<R: Rng + ?Sized>(n: usize, h: f64, dt: f64, rng: &mut R) -> Result<Vec<f64>> {
    // Factor the covariance of the path values themselves, then difference.
    let e = 2.0 * h;
    let cov = DMatrix::from_fn(n, n, |i, j| {
        let t = (i + 1) as f64 * dt;
        let s = (j + 1) as f64 * dt;
        0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
    });
    let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let z = DVector::from_fn(n, |_, _| normal(rng));
    let path = chol.l() * z;
    let mut prev = 0.0;
    Ok(path
        .iter()
        .map(|&b| {
            let inc = b - prev;
            prev = b;
            inc
        })
        .collect())
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
