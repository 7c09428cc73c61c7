//! One function per experiment. Each returns the files to write and
//! whether every asserted bound held.

use serde::Serialize;
use serde_json::{json, Value};
use slds_core::attractor::{
    compute_absorbing_radius, run_contraction, run_pullback, singleton_check, singleton_tol,
    sphere_states, spread_states, verify_absorption, verify_equilibrium, RATE_TOL,
};
use slds_core::dynamics::{
    check_dissipativity, cocycle_residual, energy_bound_check, integrate, Nonlinearity,
};
use slds_core::fbm::{
    check_against_law, empirical_covariance, fbm_covariance, sample_fbm, sample_noise_field,
    two_sided_fbm, NoiseField, TimeGrid,
};
use slds_core::fou::{growth_bound_fit, noise_growth_fit, stationary_pair};
use slds_core::io::{
    distance_csv, fou_csv, lattice_csv, path_csv, trajectory_csv, ExperimentReport,
    TrajectorySummary,
};
use slds_core::lattice::EState;

use crate::config::{Experiment, RunConfig};
use crate::CliError;

/// Cocycle residual tolerance at the configured step.
pub const COCYCLE_TOL: f64 = 1e-4;

#[derive(Debug, Default)]
pub struct Artifacts {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub pass: bool,
}

impl Artifacts {
    fn csv(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(slds_core::Error::from)?;
        text.push('\n');
        self.files.push((name.to_string(), text));
        Ok(())
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn report(cfg: &RunConfig, series: Value, fitted_rates: Value, bounds: Value, pass: bool) -> ExperimentReport {
    ExperimentReport {
        experiment: cfg.experiment.name().to_string(),
        params: to_value(&cfg.params),
        seed: cfg.seed,
        series,
        fitted_rates,
        bounds,
        pass,
    }
}

fn noise_grid(cfg: &RunConfig) -> Result<TimeGrid, CliError> {
    let (lo, hi) = cfg.window();
    TimeGrid::spanning(lo, hi, cfg.grid.dt).map_err(|e| CliError::Config(format!("`grid`: {e}")))
}

fn sample_noise(cfg: &RunConfig) -> Result<NoiseField, CliError> {
    let (a, b) = cfg.coefficients()?;
    Ok(sample_noise_field(
        &a,
        &b,
        cfg.params.hurst,
        noise_grid(cfg)?,
        cfg.seed,
        cfg.coefficients.shared_driver,
        cfg.grid.method,
    )?)
}

fn nonlinearity(cfg: &RunConfig) -> Box<dyn Nonlinearity> {
    cfg.nonlinearity.build(cfg.params.gamma)
}

fn origin(cfg: &RunConfig) -> Result<EState, CliError> {
    Ok(EState::zeros(cfg.lattice_config()?, cfg.params.varrho)?)
}

/// Snap `t` to the nearest multiple of `dt`.
fn on_grid(t: f64, dt: f64) -> f64 {
    dt * (t / dt).round()
}

pub fn run_experiment(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match cfg.experiment {
        Experiment::Fbm => fbm(cfg),
        Experiment::Simulate => simulate(cfg),
        Experiment::Contraction => contraction(cfg),
        Experiment::Pullback => pullback(cfg),
        Experiment::Radius => radius(cfg),
        Experiment::Verify => verify(cfg),
    }
}

fn fbm(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mut out = Artifacts::default();
    let grid = noise_grid(cfg)?;
    let h = cfg.params.hurst;
    let method = cfg.grid.method;
    let path = if grid.first_index() == 0 {
        sample_fbm(grid, h, cfg.seed, method)?
    } else {
        two_sided_fbm(grid, h, cfg.seed, method)?
    };
    out.csv("path.csv", path_csv(&path));

    let m = cfg.fbm.check_points;
    let check_grid = TimeGrid::new(0.0, 1.0 / m as f64, m)?;
    let emp = empirical_covariance(check_grid, h, method, cfg.fbm.check_paths, cfg.seed)?;
    let check = check_against_law(&emp, h.value(), method)?;
    let d = emp.dim();
    let exact: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| fbm_covariance(emp.times[i], emp.times[j], h.value()))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    let empirical: Vec<&[f64]> = emp.matrix.chunks(d).collect();
    out.json(
        "covariance.json",
        &json!({
            "method": method.name(),
            "hurst": h.value(),
            "n_paths": emp.n_paths,
            "times": emp.times,
            "empirical": empirical,
            "exact": exact,
            "check": check,
        }),
    )?;
    out.pass = check.pass;
    let r = report(
        cfg,
        json!({ "path": "path.csv", "covariance": "covariance.json" }),
        Value::Null,
        json!({ "covariance_band": check }),
        out.pass,
    );
    out.json("report.json", &r)?;
    Ok(out)
}

fn simulate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mut out = Artifacts::default();
    let noise = sample_noise(cfg)?;
    let f = nonlinearity(cfg);
    let x0 = sphere_states(&origin(cfg)?, cfg.simulate.init_radius, 1, cfg.seed)?.remove(0);
    let traj = integrate(&x0, &noise, 0.0, cfg.simulate.t_end, &cfg.params, f.as_ref(), cfg.integrator)?;
    let energy = energy_bound_check(&traj, &noise)?;
    out.csv("trajectory.csv", trajectory_csv(&traj));
    out.json("summary.json", &TrajectorySummary::new(&traj, cfg.seed))?;
    let last = traj.last();
    out.csv("final_u.csv", lattice_csv(&last.u));
    out.csv("final_v.csv", lattice_csv(&last.v));
    out.pass = energy.bounded;
    let r = report(
        cfg,
        json!({ "trajectory": "trajectory.csv", "summary": "summary.json" }),
        Value::Null,
        json!({ "energy": energy }),
        out.pass,
    );
    out.json("report.json", &r)?;
    Ok(out)
}

fn contraction(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mut out = Artifacts::default();
    let noise = sample_noise(cfg)?;
    let f = nonlinearity(cfg);
    let c = &cfg.contraction;
    let pair = spread_states(cfg.lattice_config()?, cfg.params.varrho, c.pair_distance, 2, cfg.seed)?;
    let rep = run_contraction(&cfg.params, f.as_ref(), &noise, &pair[0], &pair[1], c.t_end, cfg.integrator)?;
    out.csv("distance.csv", distance_csv(&rep.series));
    out.pass = rep.pass;
    let r = report(
        cfg,
        json!({ "distance": "distance.csv" }),
        json!({ "slope": rep.fitted_slope, "fit_window": rep.fit_window }),
        json!({
            "slope_bound": rep.bound + rep.rate_tol,
            "margin": rep.margin,
            "confidence": rep.confidence,
            "initial_distance": rep.initial_distance,
        }),
        rep.pass,
    );
    out.json("report.json", &r)?;
    Ok(out)
}

fn pullback(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mut out = Artifacts::default();
    let noise = sample_noise(cfg)?;
    let f = nonlinearity(cfg);
    let p = &cfg.pullback;
    let inits = spread_states(cfg.lattice_config()?, cfg.params.varrho, p.diameter, p.n_states, cfg.seed)?;
    let rep = run_pullback(&cfg.params, f.as_ref(), &noise, &inits, &p.horizons, cfg.integrator)?;
    let alpha = cfg.params.alpha();
    let deepest = p.horizons[p.horizons.len() - 1];
    let tol = singleton_tol(rep.initial_diameter, alpha, deepest);
    let spread = rep.spread[rep.spread.len() - 1];
    let spread_ok = spread <= tol;
    let rate_ok = rep.fitted_rate.is_none_or(|r| r >= alpha - RATE_TOL);
    out.pass = spread_ok && rate_ok;
    out.csv("equilibrium_u.csv", lattice_csv(&rep.equilibrium.u));
    out.csv("equilibrium_v.csv", lattice_csv(&rep.equilibrium.v));
    out.json("pullback.json", &rep)?;
    let r = report(
        cfg,
        json!({
            "horizons": rep.horizons,
            "cauchy": rep.cauchy,
            "spread": rep.spread,
            "cauchy_ratios": rep.cauchy_ratios,
        }),
        json!({ "cauchy_rate": rep.fitted_rate }),
        json!({
            "spread": { "value": spread, "tol": tol, "pass": spread_ok },
            "cauchy_rate": { "value": rep.fitted_rate, "min": alpha - RATE_TOL, "pass": rate_ok },
            "equilibrium_norm": rep.equilibrium_norm(),
        }),
        out.pass,
    );
    out.json("report.json", &r)?;
    Ok(out)
}

fn radius(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mut out = Artifacts::default();
    let noise = sample_noise(cfg)?;
    let f = nonlinearity(cfg);
    let (q, t_trunc) = (cfg.quad_horizon(), cfg.t_trunc());
    let lattice = cfg.lattice_config()?;
    let rad = compute_absorbing_radius(&cfg.params, f.as_ref(), &noise, lattice, q, cfg.c4(), t_trunc)?;
    let q = on_grid(q, cfg.grid.dt);
    let pair = stationary_pair(&cfg.params, &noise, lattice, -q, 0.0, t_trunc)?;
    let bound_u = growth_bound_fit(&pair.u, (-q, 0.0))?;
    let bound_v = growth_bound_fit(&pair.v, (-q, 0.0))?;
    let bound_w = noise_growth_fit(&noise, (-q, 0.0))?;
    out.csv("fou_u.csv", fou_csv(&pair.u));
    out.csv("fou_v.csv", fou_csv(&pair.v));
    out.csv("phi_bar0_u.csv", lattice_csv(&rad.phi_bar0.u));
    out.csv("phi_bar0_v.csv", lattice_csv(&rad.phi_bar0.v));
    out.json("bound_u.json", &bound_u)?;
    out.json("bound_v.json", &bound_v)?;
    out.json("noise_bound.json", &bound_w)?;
    out.json("radius.json", &rad)?;
    out.pass = rad.r.is_finite();
    let r = report(
        cfg,
        json!({ "fou_u": "fou_u.csv", "fou_v": "fou_v.csv" }),
        json!({ "rho_u": bound_u.rho, "rho_v": bound_v.rho, "rho_noise": bound_w.rho }),
        json!({ "radius": rad }),
        out.pass,
    );
    out.json("report.json", &r)?;
    Ok(out)
}

fn verify(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let mut out = Artifacts::default();
    let noise = sample_noise(cfg)?;
    let f = nonlinearity(cfg);
    let v = &cfg.verify;
    let (params, integ) = (&cfg.params, cfg.integrator);
    let lattice = cfg.lattice_config()?;
    let alpha = params.alpha();
    let zero = origin(cfg)?;
    let dt = cfg.grid.dt;

    let rad = compute_absorbing_radius(params, f.as_ref(), &noise, lattice, cfg.quad_horizon(), cfg.c4(), cfg.t_trunc())?;
    let inits = sphere_states(&zero, v.ball_radius, v.n_states, cfg.seed)?;
    let absorption = verify_absorption(
        params,
        f.as_ref(),
        &noise,
        &rad,
        &inits,
        v.ball_radius,
        &v.absorption_horizons,
        v.abs_tol,
        integ,
    )?;
    let absorption_ok = absorption
        .horizons
        .iter()
        .filter(|h| h.horizon >= v.absorb_from)
        .all(|h| h.holds);

    let t_eq = on_grid(v.equilibrium_t, dt);
    let half = on_grid(0.5 * v.t_max, dt);
    let eq_half = verify_equilibrium(params, f.as_ref(), &noise, &zero, t_eq, half, integ)?;
    let eq_full = verify_equilibrium(params, f.as_ref(), &noise, &zero, t_eq, v.t_max, integ)?;
    let eq_factor = 10.0 * (-alpha * (v.t_max - half)).exp();
    let eq_ok = eq_full.residual <= eq_factor * eq_half.residual;

    let spread = spread_states(lattice, params.varrho, v.singleton_diameter, 3, cfg.seed)?;
    let singleton = singleton_check(params, f.as_ref(), &noise, &spread, v.t_deep, integ)?;

    let forward = noise.shift(-2.0)?;
    let cocycle = cocycle_residual(1.0, 1.0, &forward, &spread[0], params, f.as_ref(), integ)?;
    let cocycle_ok = cocycle <= COCYCLE_TOL;

    let diss = check_dissipativity(f.as_ref(), v.dissipativity_trials, v.dissipativity_range, cfg.seed)?;

    out.pass = absorption_ok && eq_ok && singleton.pass && cocycle_ok && diss.pass;
    out.csv("phi_bar0_u.csv", lattice_csv(&rad.phi_bar0.u));
    out.csv("phi_bar0_v.csv", lattice_csv(&rad.phi_bar0.v));
    out.json("radius.json", &rad)?;
    let r = report(
        cfg,
        json!({
            "absorption": absorption.horizons,
            "equilibrium_residuals": [[half, eq_half.residual], [v.t_max, eq_full.residual]],
        }),
        Value::Null,
        json!({
            "absorption": { "report": absorption, "from_horizon": v.absorb_from, "pass": absorption_ok },
            "equilibrium": { "half": eq_half, "full": eq_full, "max_ratio": eq_factor, "pass": eq_ok },
            "singleton": singleton,
            "cocycle": { "residual": cocycle, "tol": COCYCLE_TOL, "pass": cocycle_ok },
            "dissipativity": diss,
        }),
        out.pass,
    );
    out.json("report.json", &r)?;
    Ok(out)
}
