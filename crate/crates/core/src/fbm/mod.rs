//! Fractional Brownian motion: synthesis, two-sided paths, Wiener shifts
//! and lattice noise fields.

mod check;
mod grid;
mod noise;
mod path;
mod synth;

pub use grid::TimeGrid;
pub use noise::{sample_noise_field, site_stream, NoiseField};
pub use path::{
    sample_fbm, sample_fbm_stream, shift_path, two_sided_fbm, two_sided_fbm_stream, FbmPath,
};
pub use synth::{
    circulant_eigenvalues, fbm_covariance, fgn_autocovariance, sample_fgn, FbmMethod, Hurst,
    EMBED_EPS,
};
pub use check::{
    check_against_law, compare_methods, empirical_covariance, CovarianceCheck,
    EmpiricalCovariance, MethodComparison, BAND_SIGMAS,
};
pub use path::stream_rng;

/// Deterministic generator for auxiliary sampling (initial states, test
/// pairs); stream ids at this level never collide with per-site drivers,
/// which live under their own master seed.
pub fn path_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    stream_rng(seed, u64::MAX)
}
