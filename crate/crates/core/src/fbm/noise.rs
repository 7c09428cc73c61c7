use rayon::prelude::*;

use super::grid::TimeGrid;
use super::path::{shift_by_steps, two_sided_fbm_stream, FbmPath};
use super::synth::{FbmMethod, Hurst};
use crate::error::{invalid, Error, Result};

/// Lattice-valued noise `W1 = Σ a_i β_i e^i`, `W2 = Σ b_i β_i e^i` on sites
/// `-N..=N`.
///
/// With a shared driver (the default) each site uses one fBm for both
/// components; otherwise `W2` gets its own independent family of paths.
#[derive(Debug, Clone)]
pub struct NoiseField {
    grid: TimeGrid,
    half_width: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    shared_driver: bool,
    paths: Vec<FbmPath>,
    paths_w2: Option<Vec<FbmPath>>,
    // Time-major dense samples, `len * n_sites`.
    w1: Vec<f64>,
    w2: Vec<f64>,
}

fn zigzag(i: i64) -> u64 {
    ((i << 1) ^ (i >> 63)) as u64
}

/// Stream id for `(site, component)`; injective in both arguments.
pub fn site_stream(site: i64, component: u64) -> u64 {
    zigzag(site) * 2 + component
}

/// Sample per-site two-sided fBms and assemble the noise field.
pub fn sample_noise_field(
    a: &[f64],
    b: &[f64],
    hurst: Hurst,
    grid: TimeGrid,
    master_seed: u64,
    shared_driver: bool,
    method: FbmMethod,
) -> Result<NoiseField> {
    let n_sites = a.len();
    if n_sites == 0 || n_sites % 2 == 0 {
        return Err(invalid(
            "a",
            format!("coefficient sequences need odd length 2N+1, got {n_sites}"),
        ));
    }
    if b.len() != n_sites {
        return Err(Error::LengthMismatch {
            what: "b",
            got: b.len(),
            expected: n_sites,
        });
    }
    if let Some(bad) = a.iter().chain(b).find(|x| !x.is_finite()) {
        return Err(invalid("coefficients", format!("non-finite entry {bad}")));
    }
    let half = (n_sites / 2) as i64;
    let sample = |component: u64| -> Result<Vec<FbmPath>> {
        (0..n_sites)
            .into_par_iter()
            .map(|s| {
                let site = s as i64 - half;
                two_sided_fbm_stream(grid, hurst, master_seed, site_stream(site, component), method)
                    .map(|p| p.with_site(site))
            })
            .collect()
    };
    let paths = sample(0)?;
    let paths_w2 = if shared_driver { None } else { Some(sample(1)?) };
    Ok(NoiseField::assemble(
        grid,
        a.to_vec(),
        b.to_vec(),
        shared_driver,
        paths,
        paths_w2,
    ))
}

impl NoiseField {
    fn assemble(
        grid: TimeGrid,
        a: Vec<f64>,
        b: Vec<f64>,
        shared_driver: bool,
        paths: Vec<FbmPath>,
        paths_w2: Option<Vec<FbmPath>>,
    ) -> Self {
        let n_sites = a.len();
        let len = grid.len();
        let mut w1 = vec![0.0; len * n_sites];
        let mut w2 = vec![0.0; len * n_sites];
        let drivers2 = paths_w2.as_deref().unwrap_or(&paths);
        for s in 0..n_sites {
            for k in 0..len {
                w1[k * n_sites + s] = a[s] * paths[s].value(k);
                w2[k * n_sites + s] = b[s] * drivers2[s].value(k);
            }
        }
        Self {
            grid,
            half_width: n_sites / 2,
            a,
            b,
            shared_driver,
            paths,
            paths_w2,
            w1,
            w2,
        }
    }

    /// Identically zero noise on `grid`.
    pub fn zero(grid: TimeGrid, half_width: usize) -> Self {
        let n_sites = 2 * half_width + 1;
        let len = grid.len();
        Self {
            grid,
            half_width,
            a: vec![0.0; n_sites],
            b: vec![0.0; n_sites],
            shared_driver: true,
            paths: Vec::new(),
            paths_w2: None,
            w1: vec![0.0; len * n_sites],
            w2: vec![0.0; len * n_sites],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn n_sites(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn shared_driver(&self) -> bool {
        self.shared_driver
    }

    pub fn is_zero(&self) -> bool {
        self.paths.is_empty()
    }

    /// Driver of `W1` (and of `W2` when shared) at lattice site `i`.
    pub fn path(&self, site: i64) -> Option<&FbmPath> {
        self.paths.get(self.local(site)?)
    }

    /// Driver of `W2` at lattice site `i`.
    pub fn path_w2(&self, site: i64) -> Option<&FbmPath> {
        let s = self.local(site)?;
        match &self.paths_w2 {
            Some(p) => p.get(s),
            None => self.paths.get(s),
        }
    }

    fn local(&self, site: i64) -> Option<usize> {
        let s = site + self.half_width as i64;
        (s >= 0 && (s as usize) < self.n_sites()).then_some(s as usize)
    }

    pub fn w1_row(&self, k: usize) -> &[f64] {
        let n = self.n_sites();
        &self.w1[k * n..(k + 1) * n]
    }

    pub fn w2_row(&self, k: usize) -> &[f64] {
        let n = self.n_sites();
        &self.w2[k * n..(k + 1) * n]
    }

    /// `(W1(t), W2(t))` at grid time `t`.
    pub fn at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.grid.index_of(t)?;
        Ok((self.w1_row(k).to_vec(), self.w2_row(k).to_vec()))
    }

    /// Noise at fractional grid position `pos`, linearly interpolated.
    pub fn fill_at_position(&self, pos: f64, w1: &mut [f64], w2: &mut [f64]) {
        let last = self.grid.n_steps();
        let k = (pos.floor() as usize).min(last);
        let frac = pos - k as f64;
        if frac <= 0.0 || k == last {
            w1.copy_from_slice(self.w1_row(k));
            w2.copy_from_slice(self.w2_row(k));
            return;
        }
        let (a1, b1) = (self.w1_row(k), self.w1_row(k + 1));
        let (a2, b2) = (self.w2_row(k), self.w2_row(k + 1));
        for s in 0..w1.len() {
            w1[s] = (1.0 - frac) * a1[s] + frac * b1[s];
            w2[s] = (1.0 - frac) * a2[s] + frac * b2[s];
        }
    }

    /// Squared ℓ² norms `(‖W1(t_k)‖², ‖W2(t_k)‖²)` at every grid point.
    pub fn squared_norms(&self) -> Vec<(f64, f64)> {
        (0..self.grid.len())
            .map(|k| {
                let n1 = self.w1_row(k).iter().map(|x| x * x).sum();
                let n2 = self.w2_row(k).iter().map(|x| x * x).sum();
                (n1, n2)
            })
            .collect()
    }

    /// The noise seen from the shifted path `θ_t ω`.
    pub fn shift(&self, t_shift: f64) -> Result<NoiseField> {
        let steps = self.grid.steps(t_shift)?;
        let k = steps - self.grid.first_index();
        if k < 0 || k as usize > self.grid.n_steps() {
            return Err(Error::WindowExceeded {
                lo: t_shift,
                hi: t_shift,
                start: self.grid.t_start(),
                end: self.grid.t_end(),
            });
        }
        let grid = TimeGrid::from_indices(
            self.grid.first_index() - steps,
            self.grid.dt(),
            self.grid.n_steps(),
        );
        if self.is_zero() {
            return Ok(Self::zero(grid, self.half_width));
        }
        let shift_all = |ps: &[FbmPath]| -> Result<Vec<FbmPath>> {
            ps.iter().map(|p| shift_by_steps(p, steps)).collect()
        };
        let paths = shift_all(&self.paths)?;
        let paths_w2 = self.paths_w2.as_deref().map(shift_all).transpose()?;
        Ok(Self::assemble(
            grid,
            self.a.clone(),
            self.b.clone(),
            self.shared_driver,
            paths,
            paths_w2,
        ))
    }
}
