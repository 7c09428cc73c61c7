use std::fmt::Debug;

use serde::{Deserialize, Serialize};

/// Constants a nonlinearity claims to satisfy: one-sided dissipativity
/// `(f(u) − f(v))(u − v) ≤ −γ (u − v)²` and growth
/// `|f(u)| ≤ c_f (|u|^{2p+1} + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Declared {
    pub gamma: f64,
    pub c_f: f64,
    pub p: u32,
}

/// Site-independent scalar nonlinearity applied componentwise.
pub trait Nonlinearity: Send + Sync + Debug {
    fn eval(&self, u: f64) -> f64;
    fn declared(&self) -> Declared;
    fn name(&self) -> &'static str;
}

/// `f(u) = −u³ − γu`, the default certified choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub gamma: f64,
}

impl Nonlinearity for Cubic {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        -u * u * u - self.gamma * u
    }

    fn declared(&self) -> Declared {
        Declared {
            gamma: self.gamma,
            c_f: 1.0 + self.gamma,
            p: 1,
        }
    }

    fn name(&self) -> &'static str {
        "cubic"
    }
}

/// `f(u) = −γu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDamping {
    pub gamma: f64,
}

impl Nonlinearity for LinearDamping {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        -self.gamma * u
    }

    fn declared(&self) -> Declared {
        Declared {
            gamma: self.gamma,
            c_f: self.gamma,
            p: 1,
        }
    }

    fn name(&self) -> &'static str {
        "linear"
    }
}

/// `f(u) = slope · u` with externally declared constants. Not dissipative
/// for `slope > −γ`; used to exercise the dissipativity gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub slope: f64,
    pub declared: Declared,
}

impl Nonlinearity for Affine {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        self.slope * u
    }

    fn declared(&self) -> Declared {
        self.declared
    }

    fn name(&self) -> &'static str {
        "affine"
    }
}

/// Classical FitzHugh–Nagumo cubic `u(1 − u)(u − a)`. Fails the global
/// one-sided condition, so it is never certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicFhn {
    pub a: f64,
    pub gamma: f64,
}

impl Nonlinearity for ClassicFhn {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        u * (1.0 - u) * (u - self.a)
    }

    fn declared(&self) -> Declared {
        // u² ≤ |u|³ + 1 and |u| ≤ |u|³ + 1 bound the lower-order terms.
        Declared {
            gamma: self.gamma,
            c_f: 2.0 + 2.0 * self.a.abs(),
            p: 1,
        }
    }

    fn name(&self) -> &'static str {
        "classic_fhn"
    }
}

/// Serializable selector for the built-in nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    /// `−u³ − γu` with `γ` taken from the system parameters.
    #[default]
    Cubic,
    /// `−γu` with `γ` from the system parameters.
    Linear,
    /// `slope · u`, declared with the system `γ`.
    Affine { slope: f64 },
    /// `u(1 − u)(u − a)`, declared with the system `γ`.
    ClassicFhn { a: f64 },
}

impl NonlinearitySpec {
    pub fn build(self, gamma: f64) -> Box<dyn Nonlinearity> {
        match self {
            NonlinearitySpec::Cubic => Box::new(Cubic { gamma }),
            NonlinearitySpec::Linear => Box::new(LinearDamping { gamma }),
            NonlinearitySpec::Affine { slope } => Box::new(Affine {
                slope,
                declared: Declared {
                    gamma,
                    c_f: slope.abs().max(f64::MIN_POSITIVE),
                    p: 1,
                },
            }),
            NonlinearitySpec::ClassicFhn { a } => Box::new(ClassicFhn { a, gamma }),
        }
    }
}
