use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fbm::Hurst;

/// Rate constants of the lattice system and the declared constants of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub lambda: f64,
    pub varrho: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub c_f: f64,
    pub p: u32,
    pub hurst: Hurst,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            varrho: 1.0,
            sigma: 1.0,
            gamma: 0.5,
            c_f: 1.5,
            p: 1,
            hurst: Hurst::new(0.75).expect("default Hurst index is valid"),
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("lambda", self.lambda),
            ("varrho", self.varrho),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("c_f", self.c_f),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {x}")));
            }
        }
        if self.p < 1 {
            return Err(invalid("p", "growth exponent must be >= 1"));
        }
        Ok(())
    }

    /// Guaranteed contraction rate `α = min{λ, σ}`.
    pub fn alpha(&self) -> f64 {
        self.lambda.min(self.sigma)
    }

    /// Same parameters with `(λ, σ)` replaced.
    pub fn with_rates(mut self, lambda: f64, sigma: f64) -> Self {
        self.lambda = lambda;
        self.sigma = sigma;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_is_min_rate() {
        let p = SystemParams::default();
        assert_eq!(p.alpha(), 1.0);
        assert_eq!(p.with_rates(0.5, 2.0).alpha(), 0.5);
        assert_eq!(p.with_rates(3.0, 2.0).alpha(), 2.0);
    }

    #[test]
    fn validation() {
        assert!(SystemParams::default().validate().is_ok());
        let bad = SystemParams {
            sigma: 0.0,
            ..SystemParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
