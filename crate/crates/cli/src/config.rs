//! Run configuration: strict JSON schema with documented defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slds_core::dynamics::{Integrator, NonlinearitySpec, SystemParams};
use slds_core::fbm::FbmMethod;
use slds_core::lattice::{build_coefficients, Boundary, CoefficientShape, LatticeConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fbm,
    Simulate,
    Contraction,
    Pullback,
    Radius,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fbm => "fbm",
            Experiment::Simulate => "simulate",
            Experiment::Contraction => "contraction",
            Experiment::Pullback => "pullback",
            Experiment::Radius => "radius",
            Experiment::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    pub half_width: usize,
    pub boundary: Boundary,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            half_width: 32,
            boundary: Boundary::Dirichlet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientSpec {
    pub shape: CoefficientShape,
    pub amplitude: f64,
    pub decay_q: f64,
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        Self {
            shape: CoefficientShape::PowerDecay,
            amplitude: 1.0,
            decay_q: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientsSpec {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub shared_driver: bool,
}

impl Default for CoefficientsSpec {
    fn default() -> Self {
        Self {
            a: CoefficientSpec::default(),
            b: CoefficientSpec::default(),
            shared_driver: true,
        }
    }
}

/// Sampling grid. Without an explicit window the noise covers exactly what
/// the experiment needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dt: f64,
    pub window: Option<(f64, f64)>,
    pub method: FbmMethod,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dt: 1.0 / 256.0,
            window: None,
            method: FbmMethod::DaviesHarte,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FbmSpec {
    /// Steps of the dumped path on `[0, n_steps·dt]`.
    pub n_steps: usize,
    /// Paths and grid points of the covariance check on `[0, 1]`.
    pub check_paths: usize,
    pub check_points: usize,
}

impl Default for FbmSpec {
    fn default() -> Self {
        Self {
            n_steps: 256,
            check_paths: 2000,
            check_points: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSpec {
    pub t_end: f64,
    /// Initial state drawn on the E-sphere of this radius.
    pub init_radius: f64,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            init_radius: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionSpec {
    pub t_end: f64,
    /// Distance between the two initial states.
    pub pair_distance: f64,
}

impl Default for ContractionSpec {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            pair_distance: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullbackSpec {
    pub horizons: Vec<f64>,
    pub n_states: usize,
    pub diameter: f64,
}

impl Default for PullbackSpec {
    fn default() -> Self {
        Self {
            horizons: vec![10.0, 20.0, 30.0],
            n_states: 3,
            diameter: 20.0,
        }
    }
}

/// `None` selects the value derived from the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusSpec {
    pub quad_horizon: Option<f64>,
    pub c4: Option<f64>,
    pub t_trunc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub ball_radius: f64,
    pub n_states: usize,
    pub absorption_horizons: Vec<f64>,
    /// Absorption is asserted for horizons at or beyond this depth.
    pub absorb_from: f64,
    pub abs_tol: f64,
    pub equilibrium_t: f64,
    pub t_max: f64,
    pub singleton_diameter: f64,
    pub t_deep: f64,
    pub dissipativity_trials: usize,
    pub dissipativity_range: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            ball_radius: 10.0,
            n_states: 8,
            absorption_horizons: vec![1.0, 2.0, 5.0, 10.0, 20.0, 25.0, 30.0],
            absorb_from: 20.0,
            abs_tol: 1e-6,
            equilibrium_t: 1.0,
            t_max: 30.0,
            singleton_diameter: 20.0,
            t_deep: 30.0,
            dissipativity_trials: 1_000_000,
            dissipativity_range: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub params: SystemParams,
    pub nonlinearity: NonlinearitySpec,
    pub lattice: LatticeSpec,
    pub coefficients: CoefficientsSpec,
    pub grid: GridSpec,
    pub integrator: Integrator,
    pub fbm: FbmSpec,
    pub simulate: SimulateSpec,
    pub contraction: ContractionSpec,
    pub pullback: PullbackSpec,
    pub radius: RadiusSpec,
    pub verify: VerifySpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Contraction,
            seed: 0,
            out: None,
            params: SystemParams::default(),
            nonlinearity: NonlinearitySpec::default(),
            lattice: LatticeSpec::default(),
            coefficients: CoefficientsSpec::default(),
            grid: GridSpec::default(),
            integrator: Integrator::default(),
            fbm: FbmSpec::default(),
            simulate: SimulateSpec::default(),
            contraction: ContractionSpec::default(),
            pullback: PullbackSpec::default(),
            radius: RadiusSpec::default(),
            verify: VerifySpec::default(),
        }
    }
}

fn bad(name: &str, reason: impl Into<String>) -> CliError {
    CliError::Config(format!("`{name}` {}", reason.into()))
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(bad(name, format!("must be finite and > 0, got {x}")))
    }
}

impl RunConfig {
    pub fn lattice_config(&self) -> Result<LatticeConfig, CliError> {
        Ok(LatticeConfig::new(self.lattice.half_width, self.lattice.boundary)?)
    }

    pub fn coefficients(&self) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let n = self.lattice.half_width;
        let build = |c: &CoefficientSpec, name: &str| {
            build_coefficients(c.shape, c.amplitude, c.decay_q, n)
                .map_err(|e| bad(&format!("coefficients.{name}"), e.to_string()))
        };
        Ok((build(&self.coefficients.a, "a")?, build(&self.coefficients.b, "b")?))
    }

    /// Noise window `[lo, hi]` required by the configured experiment.
    pub fn required_window(&self) -> (f64, f64) {
        let p = &self.pullback;
        let deepest = p.horizons.iter().cloned().fold(0.0, f64::max);
        let v = &self.verify;
        let radius_depth = self.quad_horizon() + self.t_trunc();
        match self.experiment {
            Experiment::Fbm => (0.0, self.fbm.n_steps as f64 * self.grid.dt),
            Experiment::Simulate => (0.0, self.simulate.t_end),
            Experiment::Contraction => (0.0, self.contraction.t_end),
            Experiment::Pullback => (-deepest, 0.0),
            Experiment::Radius => (-radius_depth, 0.0),
            Experiment::Verify => {
                let absorb = v.absorption_horizons.iter().cloned().fold(0.0, f64::max);
                let lo = radius_depth.max(absorb).max(v.t_max).max(v.t_deep);
                (-lo, v.equilibrium_t)
            }
        }
    }

    pub fn quad_horizon(&self) -> f64 {
        self.radius
            .quad_horizon
            .unwrap_or_else(|| slds_core::attractor::default_quad_horizon(self.params.alpha()))
    }

    pub fn t_trunc(&self) -> f64 {
        self.radius.t_trunc.unwrap_or_else(|| {
            let tol = slds_core::fou::TAIL_TOL;
            slds_core::fou::default_truncation(self.params.lambda.min(self.params.sigma), tol)
        })
    }

    pub fn c4(&self) -> f64 {
        self.radius
            .c4
            .unwrap_or_else(|| slds_core::attractor::default_c4(&self.params))
    }

    /// Noise window: the configured one (validated to cover the
    /// requirement) or the requirement itself.
    pub fn window(&self) -> (f64, f64) {
        self.grid.window.unwrap_or_else(|| self.required_window())
    }

    /// Check every invariant; each violation is named.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params
            .validate()
            .map_err(|e| bad("params", e.to_string()))?;
        self.lattice_config()?;
        self.coefficients()?;
        positive("grid.dt", self.grid.dt)?;
        if self.integrator.stride == 0 {
            return Err(bad("integrator.stride", "must be at least 1"));
        }
        let needs_two_sided = matches!(
            self.experiment,
            Experiment::Pullback | Experiment::Radius | Experiment::Verify
        );
        let (lo, hi) = self.required_window();
        if let Some((wlo, whi)) = self.grid.window {
            if !(whi > wlo) {
                return Err(bad("grid.window", format!("must be a non-empty interval, got [{wlo}, {whi}]")));
            }
            if needs_two_sided && !(wlo <= 0.0 && whi >= 0.0) {
                return Err(bad("grid.window", "must contain 0 for two-sided noise"));
            }
            if wlo > lo + 1e-12 || whi < hi - 1e-12 {
                return Err(bad(
                    "grid.window",
                    format!("[{wlo}, {whi}] does not cover the required [{lo}, {hi}]"),
                ));
            }
        }
        match self.experiment {
            Experiment::Fbm => {
                if self.fbm.n_steps < 2 || self.fbm.check_points < 2 || self.fbm.check_paths < 2 {
                    return Err(bad("fbm", "n_steps, check_points and check_paths must be >= 2"));
                }
            }
            Experiment::Simulate => {
                positive("simulate.t_end", self.simulate.t_end)?;
                if !(self.simulate.init_radius >= 0.0) {
                    return Err(bad("simulate.init_radius", "must be >= 0"));
                }
            }
            Experiment::Contraction => {
                positive("contraction.t_end", self.contraction.t_end)?;
                positive("contraction.pair_distance", self.contraction.pair_distance)?;
            }
            Experiment::Pullback => {
                let p = &self.pullback;
                if p.horizons.is_empty() || p.horizons[0] <= 0.0 || p.horizons.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad("pullback.horizons", "must be positive and strictly increasing"));
                }
                if p.n_states < 2 {
                    return Err(bad("pullback.n_states", "must be >= 2"));
                }
                positive("pullback.diameter", p.diameter)?;
            }
            Experiment::Radius | Experiment::Verify => {
                positive("radius.quad_horizon", self.quad_horizon())?;
                positive("radius.c4", self.c4())?;
                if !(self.t_trunc() >= 0.0) {
                    return Err(bad("radius.t_trunc", "must be >= 0"));
                }
                if self.experiment == Experiment::Verify {
                    let v = &self.verify;
                    let h = &v.absorption_horizons;
                    if h.is_empty() || h[0] <= 0.0 || h.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(bad("verify.absorption_horizons", "must be positive and strictly increasing"));
                    }
                    if v.n_states < 1 {
                        return Err(bad("verify.n_states", "must be >= 1"));
                    }
                    positive("verify.t_max", v.t_max)?;
                    positive("verify.t_deep", v.t_deep)?;
                    positive("verify.singleton_diameter", v.singleton_diameter)?;
                    if !(v.equilibrium_t >= 0.0) {
                        return Err(bad("verify.equilibrium_t", "must be >= 0"));
                    }
                    if v.dissipativity_trials < 1 {
                        return Err(bad("verify.dissipativity_trials", "must be >= 1"));
                    }
                    positive("verify.dissipativity_range", v.dissipativity_range)?;
                }
            }
        }
        Ok(())
    }
}

/// Settings given on the command line; `None` leaves the file or default
/// value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub hurst: Option<f64>,
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub varrho: Option<f64>,
    pub gamma: Option<f64>,
    pub n_sites: Option<usize>,
    pub dt: Option<f64>,
    pub method: Option<FbmMethod>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(h) = o.hurst {
            self.params.hurst = slds_core::fbm::Hurst::new(h).map_err(|e| bad("hurst", e.to_string()))?;
        }
        if let Some(x) = o.lambda {
            self.params.lambda = x;
        }
        if let Some(x) = o.sigma {
            self.params.sigma = x;
        }
        if let Some(x) = o.varrho {
            self.params.varrho = x;
        }
        if let Some(x) = o.gamma {
            self.params.gamma = x;
        }
        if let Some(n) = o.n_sites {
            if n < 3 || n % 2 == 0 {
                return Err(bad("n-sites", format!("must be odd and >= 3 (sites -N..=N), got {n}")));
            }
            self.lattice.half_width = (n - 1) / 2;
        }
        if let Some(dt) = o.dt {
            self.grid.dt = dt;
        }
        if let Some(m) = o.method {
            self.grid.method = m;
        }
        Ok(())
    }
}

/// Parse a JSON config; missing keys take their defaults, unknown keys are
/// rejected. Not validated.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// Read, parse and validate a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    cfg.validate()?;
    Ok(cfg)
}
