use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grid::TimeGrid;
use super::synth::{sample_fgn, FbmMethod, Hurst};
use crate::error::{invalid, Error, Result};

/// A sampled fBm path.
///
/// Values are kept as a shared raw sample plus an anchor index; the path's
/// value at local index `k` is `raw[k] - raw[anchor]`. Wiener shifts only move
/// the grid origin and the anchor, which makes the flow property hold bit for
/// bit.
#[derive(Debug, Clone)]
pub struct FbmPath {
    grid: TimeGrid,
    hurst: Hurst,
    raw: Arc<[f64]>,
    anchor: usize,
    seed: u64,
    stream: u64,
    site_index: i64,
    method: FbmMethod,
}

impl FbmPath {
    /// The identically zero path on `grid`.
    pub fn zero(grid: TimeGrid, hurst: Hurst) -> Self {
        Self {
            grid,
            hurst,
            raw: vec![0.0; grid.len()].into(),
            anchor: 0,
            seed: 0,
            stream: 0,
            site_index: 0,
            method: FbmMethod::DaviesHarte,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Counter-based stream within `seed` that produced the sample.
    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn site_index(&self) -> i64 {
        self.site_index
    }

    pub fn method(&self) -> FbmMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Value at local grid index `k`.
    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.raw[k] - self.raw[self.anchor]
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }

    /// Value at grid time `t`.
    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.value(self.grid.index_of(t)?))
    }

    /// Linear interpolation between grid samples.
    pub fn interpolate(&self, t: f64) -> Result<f64> {
        let pos = self.grid.position_of(t)?;
        Ok(self.value_at_position(pos))
    }

    pub(crate) fn value_at_position(&self, pos: f64) -> f64 {
        let k = pos.floor() as usize;
        if k + 1 >= self.len() {
            return self.value(self.len() - 1);
        }
        let frac = pos - k as f64;
        if frac == 0.0 {
            self.value(k)
        } else {
            (1.0 - frac) * self.value(k) + frac * self.value(k + 1)
        }
    }

    /// Keep every `stride`-th sample. The grid start and the anchor must land
    /// on the coarse lattice.
    pub fn coarsen(&self, stride: usize) -> Result<FbmPath> {
        if stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        let s = stride as i64;
        if self.grid.first_index() % s != 0 || self.anchor % stride != 0 || self.grid.n_steps() % stride != 0 {
            return Err(Error::Misaligned {
                t: self.grid.t_start(),
                dt: self.grid.dt() * stride as f64,
            });
        }
        let raw: Vec<f64> = self.raw.iter().step_by(stride).copied().collect();
        Ok(FbmPath {
            grid: TimeGrid::from_indices(
                self.grid.first_index() / s,
                self.grid.dt() * stride as f64,
                self.grid.n_steps() / stride,
            ),
            raw: raw.into(),
            anchor: self.anchor / stride,
            ..self.clone()
        })
    }

    pub(crate) fn with_site(mut self, site_index: i64) -> Self {
        self.site_index = site_index;
        self
    }
}

/// Counter-based RNG: `seed` is the ChaCha key and `stream` the stream id, so
/// distinct streams under one seed never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One-sided fBm on a grid starting at 0.
pub fn sample_fbm(grid: TimeGrid, hurst: Hurst, seed: u64, method: FbmMethod) -> Result<FbmPath> {
    sample_fbm_stream(grid, hurst, seed, 0, method)
}

/// [`sample_fbm`] on an explicit counter-based stream within `seed`.
pub fn sample_fbm_stream(
    grid: TimeGrid,
    hurst: Hurst,
    seed: u64,
    stream: u64,
    method: FbmMethod,
) -> Result<FbmPath> {
    if grid.first_index() != 0 {
        return Err(invalid(
            "grid",
            format!("one-sided sampling needs t_start = 0, got {}", grid.t_start()),
        ));
    }
    let mut rng = stream_rng(seed, stream);
    let increments = sample_fgn(grid.n_steps(), hurst, grid.dt(), method, &mut rng)?;
    let mut raw = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    raw.push(0.0);
    for inc in increments {
        acc += inc;
        raw.push(acc);
    }
    Ok(FbmPath {
        grid,
        hurst,
        raw: raw.into(),
        anchor: 0,
        seed,
        stream,
        site_index: 0,
        method,
    })
}

/// Two-sided fBm on a grid that contains 0.
///
/// A single one-sided path over the whole window length is re-anchored at the
/// position of 0, i.e. `β(t) = B(t + T₋) − B(T₋)`. Stationarity of increments
/// makes this an exact fBm on the full window, cross-covariances included.
pub fn two_sided_fbm(grid: TimeGrid, hurst: Hurst, seed: u64, method: FbmMethod) -> Result<FbmPath> {
    two_sided_fbm_stream(grid, hurst, seed, 0, method)
}

/// [`two_sided_fbm`] on an explicit counter-based stream within `seed`.
pub fn two_sided_fbm_stream(
    grid: TimeGrid,
    hurst: Hurst,
    seed: u64,
    stream: u64,
    method: FbmMethod,
) -> Result<FbmPath> {
    if !grid.contains_zero() {
        return Err(invalid(
            "grid",
            format!(
                "two-sided sampling needs 0 in [{}, {}]",
                grid.t_start(),
                grid.t_end()
            ),
        ));
    }
    let base = TimeGrid::from_indices(0, grid.dt(), grid.n_steps());
    let one_sided = sample_fbm_stream(base, hurst, seed, stream, method)?;
    let offset = -grid.first_index();
    shift_by_steps(&one_sided, offset)
}

/// Wiener shift `(θ_t ω)(s) = ω(s + t) − ω(t)`.
pub fn shift_path(path: &FbmPath, t_shift: f64) -> Result<FbmPath> {
    let steps = path.grid.steps(t_shift)?;
    shift_by_steps(path, steps)
}

pub(crate) fn shift_by_steps(path: &FbmPath, steps: i64) -> Result<FbmPath> {
    let new_anchor = path.anchor as i64 + steps;
    if new_anchor < 0 || new_anchor as usize >= path.len() {
        let t = steps as f64 * path.grid.dt();
        return Err(Error::WindowExceeded {
            lo: t,
            hi: t,
            start: path.grid.t_start(),
            end: path.grid.t_end(),
        });
    }
    let grid = TimeGrid::from_indices(
        path.grid.first_index() - steps,
        path.grid.dt(),
        path.grid.n_steps(),
    );
    Ok(FbmPath {
        grid,
        anchor: new_anchor as usize,
        raw: Arc::clone(&path.raw),
        ..path.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t0: f64, dt: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t0, dt, n).unwrap()
    }

    fn h(x: f64) -> Hurst {
        Hurst::new(x).unwrap()
    }

    #[test]
    fn starts_at_zero_and_is_deterministic() {
        for method in FbmMethod::ALL {
            let g = grid(0.0, 0.125, 40);
            let a = sample_fbm(g, h(0.7), 11, method).unwrap();
            let b = sample_fbm(g, h(0.7), 11, method).unwrap();
            assert_eq!(a.value(0), 0.0);
            assert_eq!(a.values(), b.values());
            let c = sample_fbm(g, h(0.7), 12, method).unwrap();
            assert_ne!(a.values(), c.values());
        }
    }

    #[test]
    fn one_sided_rejects_negative_start() {
        assert!(sample_fbm(grid(-1.0, 0.5, 4), h(0.7), 0, FbmMethod::Hosking).is_err());
    }

    #[test]
    fn two_sided_is_zero_at_origin() {
        let p = two_sided_fbm(grid(-2.0, 0.25, 16), h(0.75), 3, FbmMethod::DaviesHarte).unwrap();
        assert_eq!(p.at(0.0).unwrap(), 0.0);
        assert_eq!(p.grid().t_start(), -2.0);
        assert!(two_sided_fbm(grid(0.5, 0.25, 4), h(0.75), 3, FbmMethod::DaviesHarte).is_err());
    }

    #[test]
    fn shift_examples() {
        let p = two_sided_fbm(grid(-4.0, 0.5, 16), h(0.8), 9, FbmMethod::Hosking).unwrap();
        let same = shift_path(&p, 0.0).unwrap();
        assert_eq!(same.values(), p.values());
        assert_eq!(same.grid(), p.grid());

        let s1 = shift_path(&p, 1.0).unwrap();
        assert_eq!(s1.at(0.0).unwrap(), 0.0);
        assert_eq!(s1.at(2.0).unwrap(), p.at(3.0).unwrap() - p.at(1.0).unwrap());

        let back = shift_path(&s1, -1.0).unwrap();
        assert_eq!(back.grid(), p.grid());
        assert_eq!(back.values(), p.values());
    }

    #[test]
    fn shift_errors() {
        let p = sample_fbm(grid(0.0, 0.5, 8), h(0.8), 9, FbmMethod::Hosking).unwrap();
        assert!(matches!(shift_path(&p, 0.25), Err(Error::Misaligned { .. })));
        assert!(matches!(shift_path(&p, 4.5), Err(Error::WindowExceeded { .. })));
        assert!(shift_path(&p, -0.5).is_err());
    }

    #[test]
    fn coarsen_keeps_grid_values() {
        let p = two_sided_fbm(grid(-1.0, 0.25, 8), h(0.7), 2, FbmMethod::DaviesHarte).unwrap();
        let c = p.coarsen(2).unwrap();
        assert_eq!(c.grid().dt(), 0.5);
        for &t in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
            assert_eq!(c.at(t).unwrap(), p.at(t).unwrap());
        }
        assert!(p.coarsen(3).is_err());
    }

    #[test]
    fn interpolation_between_samples() {
        let p = sample_fbm(grid(0.0, 1.0, 4), h(0.8), 1, FbmMethod::Cholesky).unwrap();
        let mid = p.interpolate(1.5).unwrap();
        assert!((mid - 0.5 * (p.value(1) + p.value(2))).abs() < 1e-15);
        assert_eq!(p.interpolate(2.0).unwrap(), p.value(2));
        assert!(p.interpolate(4.5).is_err());
    }
}
