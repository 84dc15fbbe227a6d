use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightFunction;

/// Relative slack used when deciding whether `p` equals the critical exponent.
pub const CRITICAL_REL_TOL: f64 = 1e-9;

/// Problem data: space dimension, weight exponents, nonlinearity and weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: u32,
    pub l: f64,
    pub sigma: f64,
    pub p: f64,
    pub weight: WeightFunction,
}

/// Exponents derived from `(n, l, sigma, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p_star: f64,
    pub gamma_star: f64,
    /// Decay rate `(l+2)/(p-1)` of slowly decaying solutions.
    pub slow_rate: f64,
    /// Decay rate `n-2` of rapidly decaying solutions.
    pub rapid_rate: f64,
    /// `(n-2)/2`, the weight of the Emden-Fowler variable `w = r^kappa u`.
    pub kappa: f64,
}

pub fn critical_exponent(n: u32, l: f64) -> f64 {
    let n = n as f64;
    (n + 2.0 + 2.0 * l) / (n - 2.0)
}

pub fn gamma_star(n: u32, l: f64, sigma: f64) -> f64 {
    (sigma - l) * (n as f64 + l) / (2.0 + l)
}

impl ProblemSpec {
    pub fn new(n: u32, l: f64, sigma: f64, p: f64, weight: WeightFunction) -> Result<Self> {
        let spec = ProblemSpec {
            n,
            l,
            sigma,
            p,
            weight,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the admissible ranges `n >= 3`, `l > -2`, `sigma > -2`, `p > 1`.
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidSpec(format!(
                "n must be at least 3, got {}",
                self.n
            )));
        }
        if !(self.l.is_finite() && self.l > -2.0) {
            return Err(Error::InvalidSpec(format!(
                "l must exceed -2, got {}",
                self.l
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > -2.0) {
            return Err(Error::InvalidSpec(format!(
                "sigma must exceed -2, got {}",
                self.sigma
            )));
        }
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::InvalidSpec(format!(
                "p must exceed 1, got {}",
                self.p
            )));
        }
        self.weight.validate()
    }

    pub fn exponents(&self) -> Exponents {
        let n = self.n as f64;
        Exponents {
            p_star: critical_exponent(self.n, self.l),
            gamma_star: gamma_star(self.n, self.l, self.sigma),
            slow_rate: (self.l + 2.0) / (self.p - 1.0),
            rapid_rate: n - 2.0,
            kappa: (n - 2.0) / 2.0,
        }
    }

    pub fn p_star(&self) -> f64 {
        critical_exponent(self.n, self.l)
    }

    pub fn is_critical(&self) -> bool {
        let ps = self.p_star();
        (self.p - ps).abs() <= CRITICAL_REL_TOL * ps
    }

    pub fn with_weight(&self, weight: WeightFunction) -> Self {
        ProblemSpec {
            weight,
            ..self.clone()
        }
    }

    pub fn with_p(&self, p: f64) -> Self {
        ProblemSpec { p, ..self.clone() }
    }
}

/// Numerical tolerances shared by the integrator, quadrature and classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub ode_rel: f64,
    pub ode_abs: f64,
    pub quad_rel: f64,
    pub root_abs: f64,
    /// Largest radius the classifier may extend a shot to.
    pub class_horizon: f64,
    /// Relative margin, as a fraction of the gap between the two decay rates.
    pub class_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode_rel: 1e-10,
            ode_abs: 1e-12,
            quad_rel: 1e-10,
            root_abs: 1e-12,
            class_horizon: 1e24,
            class_margin: 0.15,
        }
    }
}

impl Tolerances {
    /// Multiplies every accuracy tolerance by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerances {
            ode_rel: self.ode_rel * factor,
            ode_abs: self.ode_abs * factor,
            quad_rel: self.quad_rel * factor,
            root_abs: self.root_abs * factor,
            ..*self
        }
    }
}
