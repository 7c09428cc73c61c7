//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use slds_core::attractor::*;
use slds_core::dynamics::*;
use slds_core::fbm::*;
use slds_core::fou::*;
use slds_core::lattice::*;
use slds_core::stats::{mean, variance};

const HALF: usize = 32;
const DT: f64 = 1.0 / 256.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cfg() -> LatticeConfig {
    LatticeConfig::new(HALF, Boundary::Dirichlet).unwrap()
}

fn default_noise(t0: f64, t1: f64, dt: f64, seed: u64) -> NoiseField {
    let a = build_coefficients(CoefficientShape::PowerDecay, 1.0, 1.0, HALF).unwrap();
    let g = TimeGrid::spanning(t0, t1, dt).unwrap();
    let h = SystemParams::default().hurst;
    sample_noise_field(&a, &a, h, g, seed, true, FbmMethod::DaviesHarte).unwrap()
}

fn cubic() -> Cubic {
    Cubic {
        gamma: SystemParams::default().gamma,
    }
}

fn sup_dev(a: &LatticeVector, b: &LatticeVector) -> f64 {
    let lo = a.first_site().min(b.first_site());
    let hi = a.last_site().max(b.last_site());
    (lo..=hi).map(|i| (a.get(i) - b.get(i)).abs()).fold(0.0, f64::max)
}

fn sup(a: &LatticeVector) -> f64 {
    a.values().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn operator_identities() -> Outcome {
    let mut worst = 0.0_f64;
    let mut min_form = f64::INFINITY;
    for boundary in [Boundary::Dirichlet, Boundary::Periodic] {
        let c = LatticeConfig::new(64, boundary).unwrap();
        let mut rng = path_rng(1);
        for _ in 0..1000 {
            let vals: Vec<f64> = (0..c.n_sites()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let u = LatticeVector::new(c, vals).unwrap();
            let a = apply_a(&u);
            let scale = sup(&a);
            worst = worst
                .max(sup_dev(&a, &apply_b(&apply_bstar(&u))) / scale)
                .max(sup_dev(&a, &apply_bstar(&apply_b(&u))) / scale);
            min_form = min_form.min(a.dot(&u) / u.norm_sq());
        }
    }
    outcome(
        worst <= 1e-12 && min_form >= 0.0,
        format!("max rel dev {worst:.2e}, min (Au,u)/|u|^2 {min_form:.3e}"),
    )
}

fn fbm_law() -> Outcome {
    let grid = TimeGrid::new(0.0, 1.0 / 64.0, 64).unwrap();
    let mut violations = 0;
    let mut max_z = 0.0_f64;
    let mut cmp_violations = 0;
    let mut cmp_z = 0.0_f64;
    for hv in [0.6, 0.75, 0.9] {
        let h = Hurst::new(hv).unwrap();
        // Hosking and Cholesky coincide on equal streams; distinct seeds keep
        // the comparison a two-sample test.
        let emps: Vec<(FbmMethod, EmpiricalCovariance)> = FbmMethod::ALL
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, empirical_covariance(grid, h, m, 2000, 100 + i as u64).unwrap()))
            .collect();
        for (m, e) in &emps {
            let c = check_against_law(e, hv, *m).unwrap();
            violations += c.violations;
            max_z = max_z.max(c.max_z);
        }
        for i in 0..emps.len() {
            for j in i + 1..emps.len() {
                let c = compare_methods(&emps[i].1, &emps[j].1, hv, emps[i].0, emps[j].0).unwrap();
                cmp_violations += c.violations;
                cmp_z = cmp_z.max(c.max_z);
            }
        }
    }
    outcome(
        violations == 0 && cmp_violations == 0,
        format!(
            "law: {violations} entries outside 4σ (max z {max_z:.2}); methods: {cmp_violations} outside (max z {cmp_z:.2})"
        ),
    )
}

fn pair_geometries(seed: u64) -> Vec<(EState, EState)> {
    let origin = EState::zeros(cfg(), 1.0).unwrap();
    let antipodal = spread_states(cfg(), 1.0, 20.0, 2, seed).unwrap();
    let x = sphere_states(&origin, 5.0, 1, 1000 + seed).unwrap().remove(0);
    let y = sphere_states(&origin, 5.0, 1, 2000 + seed).unwrap().remove(0);
    let bump = EState::new(
        LatticeVector::unit(cfg(), 0).unwrap(),
        LatticeVector::zeros(cfg()),
        1.0,
    )
    .unwrap();
    vec![
        (antipodal[0].clone(), antipodal[1].clone()),
        (x.clone(), y),
        (x.clone(), x.add(&bump).unwrap()),
    ]
}

fn contraction_rate() -> Outcome {
    let mut worst = [f64::NEG_INFINITY; 2];
    let mut pass = true;
    for seed in 0..5u64 {
        let noise = default_noise(0.0, 10.0, DT, seed);
        for (k, params) in [SystemParams::default(), SystemParams::default().with_rates(0.5, 2.0)]
            .iter()
            .enumerate()
        {
            for (psi, phi) in pair_geometries(seed) {
                let psi = EState::new(psi.u, psi.v, params.varrho).unwrap();
                let phi = EState::new(phi.u, phi.v, params.varrho).unwrap();
                let r = run_contraction(params, &cubic(), &noise, &psi, &phi, 10.0, Integrator::default()).unwrap();
                let slope = r.fitted_slope.unwrap_or(f64::INFINITY);
                worst[k] = worst[k].max(slope);
                pass &= r.pass && r.confidence == Confidence::Full;
            }
        }
    }
    outcome(
        pass,
        format!(
            "worst slope {:.3} (bound -1.9) at α=1; {:.3} (bound -0.9) at (λ,σ)=(0.5,2)",
            worst[0], worst[1]
        ),
    )
}

fn cocycle_property() -> Outcome {
    let params = SystemParams::default();
    let x = spread_states(cfg(), 1.0, 20.0, 2, 3).unwrap().remove(0);
    let floor = 1e-12 * (1.0 + x.e_norm());
    let strides = [64usize, 32, 16, 8, 4];
    let fine = default_noise(0.0, 2.0, 1.0 / 4096.0, 3);
    let zero = NoiseField::zero(*fine.grid(), HALF);
    let mut pass = true;
    let mut lines = Vec::new();
    for (label, noise, target) in [("noisy", &fine, 1.0), ("zero-noise", &zero, 4.0)] {
        let res: Vec<f64> = strides
            .iter()
            .map(|&s| cocycle_residual(1.0, 1.0, noise, &x, &params, &cubic(), Integrator::new(Scheme::Rk4, s)).unwrap())
            .collect();
        // Each halving either gains the target order or stays at the
        // roundoff floor.
        let ok = res.windows(2).all(|w| w[1] <= floor || w[1] <= w[0] * 2f64.powf(-(target - 0.5)));
        pass &= ok;
        let max = res.iter().cloned().fold(0.0, f64::max);
        lines.push(format!("{label} residuals ≤ {max:.1e} (floor {floor:.0e})"));
    }
    let noisy = self_convergence(&x, &fine, 2.0, &params, &cubic(), Scheme::Rk4, &[128, 64, 32, 16, 8, 4, 2, 1]).unwrap();
    let smooth = self_convergence(&x, &zero, 2.0, &params, &cubic(), Scheme::Rk4, &[256, 128, 64, 32, 16]).unwrap();
    let (on, os) = (noisy.fitted_order.unwrap_or(0.0), smooth.fitted_order.unwrap_or(0.0));
    pass &= on >= 1.0 && (3.5..=4.5).contains(&os);
    let coarse = default_noise(0.0, 2.0, 1.0 / 1024.0, 3);
    let r10 = cocycle_residual(1.0, 1.0, &coarse, &x, &params, &cubic(), Integrator::default()).unwrap();
    pass &= r10 <= 1e-4;
    outcome(
        pass,
        format!(
            "{}; residual at dt=2^-10 {r10:.1e}; self-convergence order noisy {on:.2}, zero-noise {os:.2}",
            lines.join(", ")
        ),
    )
}

fn singleton_attractor() -> Outcome {
    let params = SystemParams::default();
    let (lo, hi) = ((-10f64).exp() / 5.0, 5.0 * (-10f64).exp());
    let mut spread = 0.0_f64;
    let mut ratios = Vec::new();
    for seed in 0..5u64 {
        let noise = default_noise(-30.0, 0.0, DT, seed);
        let inits = spread_states(cfg(), 1.0, 20.0, 3, seed).unwrap();
        let r = run_pullback(&params, &cubic(), &noise, &inits, &[10.0, 20.0, 30.0], Integrator::default()).unwrap();
        spread = spread.max(r.spread[2]);
        ratios.push(r.cauchy_ratios[0]);
    }
    let ratio_ok = ratios.iter().all(|r| (lo..=hi).contains(r));
    outcome(
        spread <= 1e-8 && ratio_ok,
        format!(
            "max spread at T=30 {spread:.1e} (≤ 1e-8); Cauchy ratios {} vs band [{lo:.2e}, {hi:.2e}]",
            ratios.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn pullback_absorption() -> Outcome {
    let params = SystemParams::default();
    let c4 = default_c4(&params);
    let horizons = [1.0, 2.0, 5.0, 10.0, 20.0, 25.0, 30.0];
    let mut pass = true;
    let mut worst_slack = f64::INFINITY;
    let mut t_ds = Vec::new();
    for seed in 0..5u64 {
        let noise = default_noise(-50.0, 0.0, DT, seed);
        let radius = compute_absorbing_radius(&params, &cubic(), &noise, cfg(), 25.0, c4, 25.0).unwrap();
        let origin = EState::zeros(cfg(), 1.0).unwrap();
        let inits = sphere_states(&origin, 10.0, 8, seed).unwrap();
        let r = verify_absorption(&params, &cubic(), &noise, &radius, &inits, 10.0, &horizons, 1e-6, Integrator::default()).unwrap();
        for row in r.horizons.iter().filter(|h| h.horizon >= 20.0) {
            pass &= row.holds;
            worst_slack = worst_slack.min(r.bound + r.abs_tol - row.max_norm_sq);
        }
        t_ds.push(r.t_d.map_or("none".to_string(), |t| format!("{t}")));
    }
    outcome(
        pass,
        format!("c4 {c4}; smallest slack for T ≥ 20: {worst_slack:.3}; T_D per seed {}", t_ds.join(" ")),
    )
}

fn equilibrium_invariance() -> Outcome {
    let params = SystemParams::default();
    let factor = 10.0 * (-15f64).exp();
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in 0..3u64 {
        let noise = default_noise(-30.0, 1.0, DT, seed);
        let x = EState::zeros(cfg(), 1.0).unwrap();
        let r15 = verify_equilibrium(&params, &cubic(), &noise, &x, 1.0, 15.0, Integrator::default()).unwrap();
        let r30 = verify_equilibrium(&params, &cubic(), &noise, &x, 1.0, 30.0, Integrator::default()).unwrap();
        pass &= r30.residual <= factor * r15.residual;
        parts.push(format!("{:.1e}→{:.1e}", r15.residual, r30.residual));
    }
    outcome(
        pass,
        format!("residual T_max 15→30: {} (need ratio ≤ 10·e^-15 = {factor:.2e})", parts.join(", ")),
    )
}

fn fou_correctness() -> Outcome {
    let h = Hurst::new(0.75).unwrap();
    // Zero-noise reduction.
    let zero = FbmPath::zero(TimeGrid::spanning(-30.0, 5.0, DT).unwrap(), h);
    let x = fou_forward(2.0, 1.0, &zero, 0.0, 5.0, Quadrature::IntegrationByParts).unwrap();
    let decay_err = (0..x.grid().len())
        .map(|k| {
            let e = 2.0 * (-x.grid().time(k)).exp();
            (x.value(k) - e).abs() / e
        })
        .fold(0.0, f64::max);
    let params = SystemParams::default();
    let zero_noise = NoiseField::zero(TimeGrid::spanning(-30.0, 1.0, DT).unwrap(), HALF);
    let zp = stationary_pair(&params, &zero_noise, cfg(), -2.0, 1.0, 25.0).unwrap();
    let zero_ok = decay_err <= 1e-13 && (0..zp.grid().len()).all(|k| zp.state(k).e_norm_sq() == 0.0);

    // Shift consistency ū(s)(θ_{−t}ω) = ū(s−t)(ω).
    let noise = default_noise(-40.0, 10.0, DT, 4);
    let t = 3.0;
    let base = stationary_pair(&params, &noise, cfg(), -8.0, 4.0, 25.0).unwrap();
    let moved = stationary_pair(&params, &noise.shift(-t).unwrap(), cfg(), -5.0, 7.0, 25.0).unwrap();
    let mut shift_err = 0.0_f64;
    for k in 0..moved.grid().len() {
        let s = moved.grid().time(k);
        shift_err = shift_err.max(moved.state(k).distance(&base.state_at(s - t).unwrap()).unwrap());
    }

    // Marginal variance is time invariant.
    let n = 2000u64;
    let grid = TimeGrid::spanning(-32.0, 6.0, 1.0 / 32.0).unwrap();
    let (t1, t2) = (-5.0, 5.0);
    let pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let d = two_sided_fbm_stream(grid, h, 77, p, FbmMethod::DaviesHarte).unwrap();
            let x = fou_stationary(1.0, &d, t1, t2, 25.0).unwrap();
            (x.at(t1).unwrap()[0].powi(2), x.at(t2).unwrap()[0].powi(2))
        })
        .collect();
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let se = (variance(&diff) / n as f64).sqrt();
    let z = (mean(&a) - mean(&b)).abs() / se;
    outcome(
        zero_ok && shift_err <= 1e-6 && z <= 4.0,
        format!(
            "zero-noise rel err {decay_err:.1e}; shift consistency {shift_err:.1e} (≤ 1e-6); Var {:.4} vs {:.4}, z {z:.2} (≤ 4)",
            mean(&a),
            mean(&b)
        ),
    )
}

fn dissipativity_gate() -> Outcome {
    let gamma = SystemParams::default().gamma;
    let good = check_dissipativity(&cubic(), 1_000_000, 50.0, 9).unwrap();
    let mut pass = good.pass;
    let mut named = Vec::new();
    for spec in [NonlinearitySpec::Affine { slope: 1.0 }, NonlinearitySpec::ClassicFhn { a: 0.1 }] {
        let f = spec.build(gamma);
        let r = check_dissipativity(f.as_ref(), 1_000_000, 50.0, 9).unwrap();
        match &r.violation {
            Some(v) if !r.pass => named.push(format!("{} fails {} at ({:.3}, {:.3})", r.nonlinearity, v.condition, v.u, v.v)),
            _ => pass = false,
        }
    }
    outcome(pass, format!("cubic worst margin {:.2e}; {}", good.worst_dissipativity_margin, named.join("; ")))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 9] = [
        ("operator identities", 1.0, operator_identities),
        ("fBm law", 60.0, fbm_law),
        ("contraction rate", 120.0, contraction_rate),
        ("cocycle property", 60.0, cocycle_property),
        ("singleton pullback attractor", 300.0, singleton_attractor),
        ("pullback absorption", 300.0, pullback_absorption),
        ("equilibrium invariance", 120.0, equilibrium_invariance),
        ("fOU correctness", 120.0, fou_correctness),
        ("dissipativity gate", 10.0, dissipativity_gate),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = o.pass && secs < *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({}; {secs:.2} s of {budget} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
