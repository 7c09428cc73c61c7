use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative slack when snapping a time onto the grid.
const ALIGN_TOL: f64 = 1e-9;

/// Uniform time grid `t_k = t_start + k * dt`, `k = 0..=n_steps`.
///
/// The start is stored as an integer multiple of `dt`, so `t = 0` is always
/// representable exactly and shifts by whole steps never accumulate drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    first_index: i64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        if n_steps < 1 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        if !t_start.is_finite() {
            return Err(invalid("t_start", "must be finite"));
        }
        let first_index = steps_in(t_start, dt)?;
        Ok(Self {
            first_index,
            dt,
            n_steps,
        })
    }

    /// Grid covering `[t_start, t_end]` with spacing `dt`.
    pub fn spanning(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(invalid("t_end", format!("must exceed t_start = {t_start}")));
        }
        let n = steps_in(t_end - t_start, dt)?;
        Self::new(t_start, dt, n as usize)
    }

    pub(crate) fn from_indices(first_index: i64, dt: f64, n_steps: usize) -> Self {
        Self {
            first_index,
            dt,
            n_steps,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_start(&self) -> f64 {
        self.first_index as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.last_index() as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        (self.first_index + k as i64) as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Absolute step index (time / dt) of the first grid point.
    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.n_steps as i64
    }

    pub fn contains_zero(&self) -> bool {
        self.first_index <= 0 && self.last_index() >= 0
    }

    pub fn contains(&self, t: f64) -> bool {
        let tol = ALIGN_TOL * self.dt.max(t.abs() * f64::EPSILON);
        t >= self.t_start() - tol && t <= self.t_end() + tol
    }

    /// Number of whole steps in `t`, rejecting times that are off-grid.
    pub fn steps(&self, t: f64) -> Result<i64> {
        steps_in(t, self.dt)
    }

    /// Local index of grid time `t` inside this grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let abs = self.steps(t)?;
        if abs < self.first_index || abs > self.last_index() {
            return Err(Error::WindowExceeded {
                lo: t,
                hi: t,
                start: self.t_start(),
                end: self.t_end(),
            });
        }
        Ok((abs - self.first_index) as usize)
    }

    /// Fractional local index of an arbitrary time, for interpolation.
    pub fn position_of(&self, t: f64) -> Result<f64> {
        let pos = t / self.dt - self.first_index as f64;
        let max = self.n_steps as f64;
        let slack = ALIGN_TOL * max.max(1.0);
        if !(pos >= -slack && pos <= max + slack) {
            return Err(Error::WindowExceeded {
                lo: t,
                hi: t,
                start: self.t_start(),
                end: self.t_end(),
            });
        }
        Ok(pos.clamp(0.0, max))
    }

    /// Sub-grid on `[t0, t1]` keeping every `stride`-th point.
    pub fn sub_grid(&self, t0: f64, t1: f64, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        let k0 = self.index_of(t0)?;
        let k1 = self.index_of(t1)?;
        if k1 <= k0 {
            return Err(invalid("t1", format!("must exceed t0 = {t0}")));
        }
        let span = k1 - k0;
        if span % stride != 0 {
            return Err(Error::Misaligned {
                t: t1 - t0,
                dt: self.dt * stride as f64,
            });
        }
        let t0 = self.time(k0);
        let dt = self.dt * stride as f64;
        Ok(Self {
            first_index: steps_in(t0, dt)?,
            dt,
            n_steps: span / stride,
        })
    }
}

fn steps_in(t: f64, dt: f64) -> Result<i64> {
    let q = t / dt;
    let k = q.round();
    if (q - k).abs() > ALIGN_TOL * k.abs().max(1.0) {
        return Err(Error::Misaligned { t, dt });
    }
    Ok(k as i64)
}
