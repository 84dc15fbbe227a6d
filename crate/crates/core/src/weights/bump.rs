use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compactly supported profile with zeros at `0, a, b, c`.
///
/// On `[0, a]` it is `A0 (r/a)^gamma (1 - r/a)^2`; on `[a, b]` and `[b, c]` it is
/// `A 16 t^2 (1-t)^2` in the local coordinate `t`. It vanishes beyond `c` and is C¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub knots: [f64; 3],
    pub gamma: f64,
    pub amplitudes: [f64; 3],
}

/// Antiderivative of `16 t^2 (1-t)^2` from 0.
fn quartic_bump_integral(t: f64) -> f64 {
    16.0 * (t.powi(3) / 3.0 - t.powi(4) / 2.0 + t.powi(5) / 5.0)
}

impl BumpFunction {
    pub fn new(knots: [f64; 3], gamma: f64, amplitudes: [f64; 3]) -> Result<Self> {
        let k = BumpFunction {
            knots,
            gamma,
            amplitudes,
        };
        k.check_structure()?;
        Ok(k)
    }

    /// Shape requirements that every evaluation relies on.
    pub fn check_structure(&self) -> Result<()> {
        let [a, b, c] = self.knots;
        if !(a.is_finite() && b.is_finite() && c.is_finite() && 0.0 < a && a < b && b < c) {
            return Err(Error::validation(
                "(2.1a)",
                format!("knots must satisfy 0 < a < b < c, got {:?}", self.knots),
            ));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::validation(
                "(2.1c)",
                format!("gamma must be positive, got {}", self.gamma),
            ));
        }
        if self.amplitudes.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("(2.1b)", "amplitudes must be finite"));
        }
        Ok(())
    }

    /// Full set of bump conditions for the weight exponent `q = n + l`.
    pub fn validate(&self, n: u32, l: f64) -> Result<()> {
        self.check_structure()?;
        let [a0, a1, a2] = self.amplitudes;
        if !(a0 > 0.0 && a1 < 0.0 && a2 > 0.0) {
            return Err(Error::validation(
                "(2.1b)",
                format!("k must be positive on (0,a), negative on (a,b), positive on (b,c); amplitudes {:?}", self.amplitudes),
            ));
        }
        let lower = n as f64 + l - 1.0;
        if self.gamma <= lower {
            return Err(Error::validation(
                "(2.1c)",
                format!("gamma = {} must exceed n + l - 1 = {}", self.gamma, lower),
            ));
        }
        let total = self.integral(0.0, self.knots[2]);
        if total <= 0.0 {
            return Err(Error::validation(
                "(2.1e)",
                format!("integral of k over [0, c] is {total}, must be positive"),
            ));
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.knots[0]
    }
    pub fn b(&self) -> f64 {
        self.knots[1]
    }
    pub fn c(&self) -> f64 {
        self.knots[2]
    }

    pub fn eval(&self, r: f64) -> f64 {
        let [a, b, c] = self.knots;
        let [a0, a1, a2] = self.amplitudes;
        if r <= 0.0 || r >= c {
            0.0
        } else if r <= a {
            let x = r / a;
            a0 * x.powf(self.gamma) * (1.0 - x).powi(2)
        } else if r <= b {
            let t = (r - a) / (b - a);
            a1 * 16.0 * t * t * (1.0 - t) * (1.0 - t)
        } else {
            let t = (r - b) / (c - b);
            a2 * 16.0 * t * t * (1.0 - t) * (1.0 - t)
        }
    }

    /// `∫₀ˣ k(s) ds` in closed form.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let [a, b, c] = self.knots;
        let [a0, a1, a2] = self.amplitudes;
        let g = self.gamma;
        let inner = |u: f64| {
            u.powf(g + 1.0) / (g + 1.0) - 2.0 * u.powf(g + 2.0) / (g + 2.0)
                + u.powf(g + 3.0) / (g + 3.0)
        };
        if x <= 0.0 {
            return 0.0;
        }
        let mut total = a0 * a * inner((x / a).min(1.0));
        if x > a {
            total += a1 * (b - a) * quartic_bump_integral(((x - a) / (b - a)).min(1.0));
        }
        if x > b {
            total += a2 * (c - b) * quartic_bump_integral(((x - b) / (c - b)).min(1.0));
        }
        total
    }

    /// `∫ₓ₀ˣ¹ k(s) ds`.
    pub fn integral(&self, x0: f64, x1: f64) -> f64 {
        self.antiderivative(x1) - self.antiderivative(x0)
    }

    /// `∫₀ˣ s^{-q} k(s) ds` in closed form; finite when `gamma > q - 1`.
    pub fn weighted_antiderivative(&self, x: f64, q: f64) -> f64 {
        let [a, b, c] = self.knots;
        let [a0, a1, a2] = self.amplitudes;
        if x <= 0.0 {
            return 0.0;
        }
        let e = self.gamma - q;
        let u = (x / a).min(1.0);
        let mut total = a0
            * a.powf(1.0 - q)
            * (u.powf(e + 1.0) / (e + 1.0) - 2.0 * u.powf(e + 2.0) / (e + 2.0)
                + u.powf(e + 3.0) / (e + 3.0));
        if x > a {
            total += a1 * 16.0 / (b - a).powi(4) * quartic_moment(a, b, x.min(b), q);
        }
        if x > b {
            total += a2 * 16.0 / (c - b).powi(4) * quartic_moment(b, c, x.min(c), q);
        }
        total
    }
}

/// `∫ₗᵡ s^{-q} (s-lo)^2 (hi-s)^2 ds` by expanding the quartic in monomials.
fn quartic_moment(lo: f64, hi: f64, x: f64, q: f64) -> f64 {
    let sum = lo + hi;
    let prod = lo * hi;
    let coeffs = [
        prod * prod,
        -2.0 * prod * sum,
        sum * sum + 2.0 * prod,
        -2.0 * sum,
        1.0,
    ];
    let mut total = 0.0;
    for (j, cj) in coeffs.iter().enumerate() {
        let e = j as f64 - q + 1.0;
        let term = if e.abs() < 1e-12 {
            (x / lo).ln()
        } else {
            (x.powf(e) - lo.powf(e)) / e
        };
        total += cj * term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{gauss_kronrod_panels, integrate_from_zero};
    use approx::assert_relative_eq;

    fn sample() -> BumpFunction {
        BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap()
    }

    #[test]
    fn zeros_and_signs() {
        let k = sample();
        for r in [0.0, 1.0, 2.0, 3.0, 4.0] {
            assert_eq!(k.eval(r), 0.0);
        }
        assert!(k.eval(0.5) > 0.0);
        assert!(k.eval(1.5) < 0.0);
        assert!(k.eval(2.5) > 0.0);
    }

    #[test]
    fn continuous_derivative_at_knots() {
        let k = sample();
        let h = 1e-6;
        for x in [1.0, 2.0, 3.0] {
            let left = (k.eval(x) - k.eval(x - h)) / h;
            let right = (k.eval(x + h) - k.eval(x)) / h;
            assert!(
                (left - right).abs() < 1e-4,
                "kink at {x}: {left} vs {right}"
            );
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let k = sample();
        let pts = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
        for x in [0.3, 1.0, 1.7, 2.0, 2.6, 3.0, 5.0] {
            let cut: Vec<f64> = pts
                .iter()
                .copied()
                .filter(|p| *p < x)
                .chain(std::iter::once(x))
                .collect();
            let plain = gauss_kronrod_panels(|s| k.eval(s), &cut, 1e-13, 1e-15)
                .unwrap()
                .value;
            assert_relative_eq!(k.antiderivative(x), plain, epsilon = 1e-12);
            let q = 2.5;
            let g = |s: f64| if s > 0.0 { s.powf(-q) * k.eval(s) } else { 0.0 };
            let head = x.min(0.5);
            let mut weighted = integrate_from_zero(g, head, k.gamma - q, 1e-13, 1e-15)
                .unwrap()
                .value;
            if x > head {
                weighted += gauss_kronrod_panels(g, &cut[1..], 1e-13, 1e-15)
                    .unwrap()
                    .value;
            }
            assert_relative_eq!(k.weighted_antiderivative(x, q), weighted, epsilon = 1e-11);
        }
    }

    #[test]
    fn validation_names_clause() {
        let flat = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, 3.0, 3.5]).unwrap();
        match flat.validate(3, -0.5) {
            Err(Error::Validation { clause, .. }) => assert_eq!(clause, "(2.1b)"),
            other => panic!("unexpected {other:?}"),
        }
        let low_gamma = BumpFunction::new([1.0, 2.0, 3.0], 1.2, [0.2, -3.0, 3.5]).unwrap();
        match low_gamma.validate(3, -0.5) {
            Err(Error::Validation { clause, .. }) => assert_eq!(clause, "(2.1c)"),
            other => panic!("unexpected {other:?}"),
        }
        let deep = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -30.0, 3.5]).unwrap();
        match deep.validate(3, -0.5) {
            Err(Error::Validation { clause, .. }) => assert_eq!(clause, "(2.1e)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(BumpFunction::new([2.0, 1.0, 3.0], 2.0, [0.2, -3.0, 3.5]).is_err());
        sample().validate(3, -0.5).unwrap();
    }
}
