//! Drift, the pathwise transformed system, its integration and the
//! cocycle map.

mod checks;
mod drift;
mod integrate;
mod nonlinearity;
mod params;

pub use checks::{
    check_dissipativity, energy_bound_check, DissipativityReport, EnergyBoundReport, Violation,
    DISSIPATIVITY_SLACK,
};
pub use drift::{drift_g, transformed_drift};
pub use integrate::{
    cocycle_phi, cocycle_residual, integrate, integrate_final, self_convergence, ConvergenceStudy, Integrator, Scheme, Trajectory,
    BLOW_UP_NORM,
};
pub use nonlinearity::{
    Affine, ClassicFhn, Cubic, Declared, LinearDamping, Nonlinearity, NonlinearitySpec,
};
pub use params::SystemParams;
