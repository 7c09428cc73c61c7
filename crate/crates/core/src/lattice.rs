//! Truncated lattice operators and the weighted phase space `E = ℓ² × ℓ²`.
//!
//! Sites run over `-N..=N`. With the Dirichlet boundary, vectors are treated
//! as finitely supported elements of `ℓ²(ℤ)` (zero outside their support)
//! and the difference operators return their full image, one site wider on
//! the affected side. This keeps `A = B B* = B* B` and the adjoint pairing
//! exact. The evolution only ever needs the restriction of `A` to the window,
//! provided by [`laplacian`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeConfig {
    half_width: usize,
    boundary: Boundary,
}

impl LatticeConfig {
    pub fn new(half_width: usize, boundary: Boundary) -> Result<Self> {
        if half_width < 1 {
            return Err(invalid("half_width", "lattice needs N >= 1"));
        }
        Ok(Self {
            half_width,
            boundary,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_sites(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Site label of local index `s`.
    pub fn site(&self, s: usize) -> i64 {
        s as i64 - self.half_width as i64
    }
}

/// A lattice sequence with finite support starting at `first_site`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeVector {
    config: LatticeConfig,
    first_site: i64,
    values: Vec<f64>,
}

impl LatticeVector {
    /// Vector on the window `-N..=N`.
    pub fn new(config: LatticeConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != config.n_sites() {
            return Err(Error::LengthMismatch {
                what: "lattice vector",
                got: values.len(),
                expected: config.n_sites(),
            });
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(invalid("values", format!("non-finite entry {x}")));
        }
        Ok(Self {
            config,
            first_site: -(config.half_width as i64),
            values,
        })
    }

    pub fn zeros(config: LatticeConfig) -> Self {
        Self {
            config,
            first_site: -(config.half_width as i64),
            values: vec![0.0; config.n_sites()],
        }
    }

    /// Unit vector `e^i`.
    pub fn unit(config: LatticeConfig, site: i64) -> Result<Self> {
        let mut v = Self::zeros(config);
        let s = v
            .local(site)
            .ok_or_else(|| invalid("site", format!("{site} lies outside the window")))?;
        v.values[s] = 1.0;
        Ok(v)
    }

    pub fn constant(config: LatticeConfig, c: f64) -> Self {
        Self {
            config,
            first_site: -(config.half_width as i64),
            values: vec![c; config.n_sites()],
        }
    }

    pub fn config(&self) -> LatticeConfig {
        self.config
    }

    pub fn first_site(&self) -> i64 {
        self.first_site
    }

    pub fn last_site(&self) -> i64 {
        self.first_site + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_on_window(&self) -> bool {
        self.first_site == -(self.config.half_width as i64)
            && self.values.len() == self.config.n_sites()
    }

    fn local(&self, site: i64) -> Option<usize> {
        let s = site - self.first_site;
        (s >= 0 && (s as usize) < self.values.len()).then_some(s as usize)
    }

    /// Entry at `site`, zero outside the support.
    pub fn get(&self, site: i64) -> f64 {
        self.local(site).map_or(0.0, |s| self.values[s])
    }

    /// Zero-extended restriction to the window `-N..=N`.
    pub fn restrict(&self) -> LatticeVector {
        let n = self.config.half_width as i64;
        LatticeVector {
            config: self.config,
            first_site: -n,
            values: (-n..=n).map(|i| self.get(i)).collect(),
        }
    }

    fn span_with(&self, other: &LatticeVector) -> (i64, i64) {
        (
            self.first_site.min(other.first_site),
            self.last_site().max(other.last_site()),
        )
    }

    /// `(u, u')` in `ℓ²`, with zero extension outside each support.
    pub fn dot(&self, other: &LatticeVector) -> f64 {
        let lo = self.first_site.max(other.first_site);
        let hi = self.last_site().min(other.last_site());
        (lo..=hi).map(|i| self.get(i) * other.get(i)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn zip_with(&self, other: &LatticeVector, op: impl Fn(f64, f64) -> f64) -> LatticeVector {
        let (lo, hi) = self.span_with(other);
        LatticeVector {
            config: self.config,
            first_site: lo,
            values: (lo..=hi).map(|i| op(self.get(i), other.get(i))).collect(),
        }
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, c: f64) -> LatticeVector {
        LatticeVector {
            values: self.values.iter().map(|x| c * x).collect(),
            ..self.clone()
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> LatticeVector {
        LatticeVector {
            values: self.values.iter().map(|&x| f(x)).collect(),
            ..self.clone()
        }
    }

    /// Entry at `site` under periodic wrap-around on the window.
    fn wrapped(&self, site: i64) -> f64 {
        let n = self.config.n_sites() as i64;
        let h = self.config.half_width as i64;
        let s = (site + h).rem_euclid(n);
        self.values[s as usize]
    }

    fn stencil(&self, grow_left: i64, grow_right: i64, f: impl Fn(&dyn Fn(i64) -> f64, i64) -> f64) -> Self {
        match self.config.boundary {
            Boundary::Dirichlet => {
                let lo = self.first_site - grow_left;
                let hi = self.last_site() + grow_right;
                let get = |i: i64| self.get(i);
                LatticeVector {
                    config: self.config,
                    first_site: lo,
                    values: (lo..=hi).map(|i| f(&get, i)).collect(),
                }
            }
            Boundary::Periodic => {
                let w = self.restrict();
                let get = |i: i64| w.wrapped(i);
                let n = self.config.half_width as i64;
                LatticeVector {
                    config: self.config,
                    first_site: -n,
                    values: (-n..=n).map(|i| f(&get, i)).collect(),
                }
            }
        }
    }
}

/// `(A u)_i = -u_{i-1} + 2 u_i - u_{i+1}`.
pub fn apply_a(u: &LatticeVector) -> LatticeVector {
    u.stencil(1, 1, |g, i| -g(i - 1) + 2.0 * g(i) - g(i + 1))
}

/// `(B u)_i = u_{i+1} - u_i`.
pub fn apply_b(u: &LatticeVector) -> LatticeVector {
    u.stencil(1, 0, |g, i| g(i + 1) - g(i))
}

/// `(B* u)_i = u_{i-1} - u_i`.
pub fn apply_bstar(u: &LatticeVector) -> LatticeVector {
    u.stencil(0, 1, |g, i| g(i - 1) - g(i))
}

/// Window restriction of `A` written into `out`; `u` is a window vector.
pub fn laplacian(u: &[f64], out: &mut [f64], boundary: Boundary) {
    let n = u.len();
    debug_assert_eq!(out.len(), n);
    match boundary {
        Boundary::Dirichlet => {
            for s in 0..n {
                let left = if s > 0 { u[s - 1] } else { 0.0 };
                let right = if s + 1 < n { u[s + 1] } else { 0.0 };
                out[s] = -left + 2.0 * u[s] - right;
            }
        }
        Boundary::Periodic => {
            for s in 0..n {
                let left = u[(s + n - 1) % n];
                let right = u[(s + 1) % n];
                out[s] = -left + 2.0 * u[s] - right;
            }
        }
    }
}

/// A point `Ψ = (u, v)` of `E` with weight `ϱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EState {
    pub u: LatticeVector,
    pub v: LatticeVector,
    varrho: f64,
}

impl EState {
    pub fn new(u: LatticeVector, v: LatticeVector, varrho: f64) -> Result<Self> {
        if u.config() != v.config() {
            return Err(Error::Incompatible("u and v use different lattices".into()));
        }
        if !u.is_on_window() || !v.is_on_window() {
            return Err(Error::Incompatible("state components must live on the window".into()));
        }
        if !(varrho.is_finite() && varrho > 0.0) {
            return Err(invalid("varrho", format!("must be > 0, got {varrho}")));
        }
        Ok(Self { u, v, varrho })
    }

    pub fn zeros(config: LatticeConfig, varrho: f64) -> Result<Self> {
        Self::new(LatticeVector::zeros(config), LatticeVector::zeros(config), varrho)
    }

    pub(crate) fn from_raw(config: LatticeConfig, u: Vec<f64>, v: Vec<f64>, varrho: f64) -> Self {
        let first_site = -(config.half_width as i64);
        Self {
            u: LatticeVector {
                config,
                first_site,
                values: u,
            },
            v: LatticeVector {
                config,
                first_site,
                values: v,
            },
            varrho,
        }
    }

    pub fn varrho(&self) -> f64 {
        self.varrho
    }

    pub fn config(&self) -> LatticeConfig {
        self.u.config()
    }

    pub fn e_norm_sq(&self) -> f64 {
        self.u.norm_sq() + self.v.norm_sq() / self.varrho
    }

    pub fn e_norm(&self) -> f64 {
        self.e_norm_sq().sqrt()
    }

    fn check(&self, other: &EState) -> Result<()> {
        if self.varrho != other.varrho {
            return Err(Error::Incompatible(format!(
                "weights differ: {} vs {}",
                self.varrho, other.varrho
            )));
        }
        if self.config() != other.config() {
            return Err(Error::Incompatible("states use different lattices".into()));
        }
        Ok(())
    }

    pub fn e_inner(&self, other: &EState) -> Result<f64> {
        self.check(other)?;
        Ok(self.u.dot(&other.u) + self.v.dot(&other.v) / self.varrho)
    }

    pub fn sub(&self, other: &EState) -> Result<EState> {
        self.check(other)?;
        Ok(EState {
            u: self.u.sub(&other.u),
            v: self.v.sub(&other.v),
            varrho: self.varrho,
        })
    }

    pub fn add(&self, other: &EState) -> Result<EState> {
        self.check(other)?;
        Ok(EState {
            u: self.u.add(&other.u),
            v: self.v.add(&other.v),
            varrho: self.varrho,
        })
    }

    pub fn scale(&self, c: f64) -> EState {
        EState {
            u: self.u.scale(c),
            v: self.v.scale(c),
            varrho: self.varrho,
        }
    }

    /// `‖self − other‖_E`.
    pub fn distance(&self, other: &EState) -> Result<f64> {
        Ok(self.sub(other)?.e_norm())
    }
}

pub fn e_norm(state: &EState) -> f64 {
    state.e_norm()
}

pub fn e_inner(a: &EState, b: &EState) -> Result<f64> {
    a.e_inner(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientShape {
    /// `amplitude / (1 + |i|)^q`.
    PowerDecay,
    /// `amplitude · e^0`.
    SingleSite,
    /// `amplitude` on every site of the window.
    ConstantWindow,
}

/// Coefficient sequence `(a_i)` on `-N..=N`.
pub fn build_coefficients(
    shape: CoefficientShape,
    amplitude: f64,
    decay_q: f64,
    half_width: usize,
) -> Result<Vec<f64>> {
    if !amplitude.is_finite() {
        return Err(invalid("amplitude", "must be finite"));
    }
    let n = half_width as i64;
    let seq = match shape {
        CoefficientShape::PowerDecay => {
            if !(decay_q.is_finite() && decay_q > 0.5) {
                return Err(invalid(
                    "decay_q",
                    format!("power decay is square-summable only for q > 1/2, got {decay_q}"),
                ));
            }
            (-n..=n)
                .map(|i| amplitude / (1.0 + i.abs() as f64).powf(decay_q))
                .collect()
        }
        CoefficientShape::SingleSite => (-n..=n)
            .map(|i| if i == 0 { amplitude } else { 0.0 })
            .collect(),
        CoefficientShape::ConstantWindow => vec![amplitude; 2 * half_width + 1],
    };
    Ok(seq)
}
