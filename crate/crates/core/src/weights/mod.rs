//! Weight functions `f(r)` and the auxiliary functions `h` and `H`.

mod bump;
mod hypotheses;

pub use bump::BumpFunction;
pub use hypotheses::{check_hypotheses, HypothesisCheck, HypothesisReport, Status};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{critical_exponent, ProblemSpec};
use crate::quad::{integrate_log_panels_split, QuadResult};
use crate::scan::phi_closed_form_raw;

/// The supported weight families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFunction {
    /// `r^l`
    PurePower { l: f64 },
    /// Weight for which `(1 + r^2)^{-(l+2)/(2(p-1))}` is an explicit solution.
    #[serde(rename = "example_iii")]
    ExampleIii { n: u32, l: f64, p: f64 },
    /// `(c1 + c2 r^2)^{gamma/2} (c3 + c4 r^2)^{nu/2}`
    ProductPower {
        c1: f64,
        c2: f64,
        c3: f64,
        c4: f64,
        gamma: f64,
        nu: f64,
    },
    /// `(a + b (1 + r^2)^nu) (1 + r^2)^mu`
    ShiftedPower { a: f64, b: f64, mu: f64, nu: f64 },
    /// `r^l (1 + epsilon (p*+1) ∫₀ʳ s^{-(n+l)} k(s) ds)` for a bump `k`.
    Constructed {
        #[serde(flatten)]
        bump: BumpFunction,
        epsilon: f64,
        n: u32,
        l: f64,
    },
    /// `factor * base`
    Scaled {
        factor: f64,
        base: Box<WeightFunction>,
    },
}

impl WeightFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            WeightFunction::PurePower { l } if !l.is_finite() => {
                bad(format!("pure_power exponent {l} is not finite"))
            }
            WeightFunction::ExampleIii { n, l, p } => {
                let (nf, lo, hi) = (
                    *n as f64,
                    (*n as f64 + l) / (*n as f64 - 2.0),
                    critical_exponent(*n, *l),
                );
                if *n < 3 || !(*p > lo && *p < hi) || !(*l > -2.0 && *l < 0.0) {
                    return bad(format!("example_iii needs n >= 3, -2 < l < 0 and {lo} < p < {hi} (n = {nf}, l = {l}, p = {p})"));
                }
                Ok(())
            }
            WeightFunction::ProductPower {
                c1,
                c2,
                c3,
                c4,
                gamma,
                nu,
            } => {
                if !(*c1 > 0.0
                    && *c3 > 0.0
                    && *c2 >= 0.0
                    && *c4 >= 0.0
                    && gamma.is_finite()
                    && nu.is_finite())
                {
                    return bad("product_power needs c1, c3 > 0 and c2, c4 >= 0".into());
                }
                Ok(())
            }
            WeightFunction::ShiftedPower { a, b, mu, nu } => {
                if !(a.is_finite() && b.is_finite() && mu.is_finite() && nu.is_finite())
                    || *a < 0.0
                    || *b < 0.0
                    || a + b <= 0.0
                {
                    return bad("shifted_power needs a, b >= 0 with a + b > 0".into());
                }
                Ok(())
            }
            WeightFunction::Constructed {
                bump,
                epsilon,
                n,
                l,
            } => {
                bump.check_structure()?;
                if !(epsilon.is_finite() && *epsilon >= 0.0) {
                    return bad(format!("epsilon must be non-negative, got {epsilon}"));
                }
                if bump.gamma <= *n as f64 + l - 1.0 {
                    return Err(Error::validation("(2.1c)", "gamma must exceed n + l - 1"));
                }
                Ok(())
            }
            WeightFunction::Scaled { factor, base } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return bad(format!("scale factor must be positive, got {factor}"));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Value of `f(r)`.
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            WeightFunction::PurePower { l } => r.powf(*l),
            WeightFunction::ExampleIii { n, l, p } => {
                let (k, pp, qq) = example_iii_coeffs(*n, *l, *p);
                let g = 1.0 + r * r;
                k * (pp + qq / g) * g.powf(l / 2.0)
            }
            WeightFunction::ProductPower {
                c1,
                c2,
                c3,
                c4,
                gamma,
                nu,
            } => (c1 + c2 * r * r).powf(gamma / 2.0) * (c3 + c4 * r * r).powf(nu / 2.0),
            WeightFunction::ShiftedPower { a, b, mu, nu } => {
                let g = 1.0 + r * r;
                (a + b * g.powf(*nu)) * g.powf(*mu)
            }
            WeightFunction::Constructed {
                bump,
                epsilon,
                n,
                l,
            } => {
                r.powf(*l)
                    * (1.0
                        + epsilon
                            * (critical_exponent(*n, *l) + 1.0)
                            * bump.weighted_antiderivative(r, *n as f64 + l))
            }
            WeightFunction::Scaled { factor, base } => factor * base.eval(r),
        }
    }

    /// Analytic `f'(r)`, when the family provides one.
    pub fn derivative(&self, r: f64) -> Option<f64> {
        Some(match self {
            WeightFunction::PurePower { l } => l * r.powf(l - 1.0),
            WeightFunction::ExampleIii { n, l, p } => {
                let (k, pp, qq) = example_iii_coeffs(*n, *l, *p);
                let g = 1.0 + r * r;
                k * (-2.0 * qq * r / (g * g) * g.powf(l / 2.0)
                    + (pp + qq / g) * l * r * g.powf(l / 2.0 - 1.0))
            }
            WeightFunction::ProductPower {
                c1,
                c2,
                c3,
                c4,
                gamma,
                nu,
            } => {
                let g1 = c1 + c2 * r * r;
                let g2 = c3 + c4 * r * r;
                self.eval(r) * (gamma * c2 * r / g1 + nu * c4 * r / g2)
            }
            WeightFunction::ShiftedPower { a, b, mu, nu } => {
                let g = 1.0 + r * r;
                2.0 * r
                    * (b * nu * g.powf(nu + mu - 1.0)
                        + (a + b * g.powf(*nu)) * mu * g.powf(mu - 1.0))
            }
            WeightFunction::Constructed {
                bump,
                epsilon,
                n,
                l,
            } => {
                let c = epsilon * (critical_exponent(*n, *l) + 1.0);
                let q = *n as f64 + l;
                l * r.powf(l - 1.0) * (1.0 + c * bump.weighted_antiderivative(r, q))
                    + c * r.powf(-(*n as f64)) * bump.eval(r)
            }
            WeightFunction::Scaled { factor, base } => factor * base.derivative(r)?,
        })
    }

    /// `h(r) = r (r^{-l} f(r))'`, analytic where possible.
    pub fn h(&self, r: f64, l: f64) -> f64 {
        match self {
            WeightFunction::PurePower { l: own } if *own == l => 0.0,
            WeightFunction::Constructed {
                bump,
                epsilon,
                n,
                l: own,
            } if *own == l => {
                let q = *n as f64 + l;
                epsilon * (critical_exponent(*n, l) + 1.0) * r.powf(1.0 - q) * bump.eval(r)
            }
            WeightFunction::Scaled { factor, base } => factor * base.h(r, l),
            _ => match self.derivative(r) {
                Some(df) => r.powf(-l) * (r * df - l * self.eval(r)),
                None => self.h_numeric(r, l),
            },
        }
    }

    /// Radii where `f` or `h` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            WeightFunction::Constructed { bump, .. } => bump.knots.to_vec(),
            WeightFunction::Scaled { base, .. } => base.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// Central-difference `h` with step `r eps^{1/3}`.
    pub fn h_numeric(&self, r: f64, l: f64) -> f64 {
        let step = r * f64::EPSILON.cbrt();
        let g = |s: f64| s.powf(-l) * self.eval(s);
        r * (g(r + step) - g(r - step)) / (2.0 * step)
    }

    /// Exponent `l` with `f ~ r^l` at infinity.
    pub fn decay_exponent(&self) -> f64 {
        match self {
            WeightFunction::PurePower { l }
            | WeightFunction::ExampleIii { l, .. }
            | WeightFunction::Constructed { l, .. } => *l,
            WeightFunction::ProductPower {
                c2, c4, gamma, nu, ..
            } => (if *c2 > 0.0 { *gamma } else { 0.0 }) + (if *c4 > 0.0 { *nu } else { 0.0 }),
            WeightFunction::ShiftedPower { a, b, mu, nu } => {
                let lead = if *b == 0.0 {
                    0.0
                } else if *a == 0.0 {
                    *nu
                } else {
                    nu.max(0.0)
                };
                2.0 * (mu + lead)
            }
            WeightFunction::Scaled { base, .. } => base.decay_exponent(),
        }
    }
}

fn example_iii_coeffs(n: u32, l: f64, p: f64) -> (f64, f64, f64) {
    let nm2 = n as f64 - 2.0;
    let k = (l + 2.0) * nm2 / ((p - 1.0) * (p - 1.0));
    let pp = p - (n as f64 + l) / nm2;
    let qq = (l + 2.0 * p) / nm2;
    (k, pp, qq)
}

pub fn eval_f(w: &WeightFunction, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weight evaluated at r = {r}"
        )));
    }
    let v = w.eval(r);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::WeightEvaluation { r })
    }
}

pub fn eval_h(w: &WeightFunction, r: f64, l: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("h evaluated at r = {r}")));
    }
    let v = w.h(r, l);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::WeightEvaluation { r })
    }
}

/// `H(R) = ∫₀ᴿ h(s) s^{n+l-1} ds` by adaptive quadrature.
pub fn eval_big_h(
    w: &WeightFunction,
    big_r: f64,
    n: u32,
    l: f64,
    quad_rel: f64,
) -> Result<QuadResult> {
    if !(big_r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "H evaluated at R = {big_r}"
        )));
    }
    let q = n as f64 + l - 1.0;
    integrate_log_panels_split(
        |s| w.h(s, l) * s.powf(q),
        big_r,
        (q - 1.0).max(-0.5),
        quad_rel,
        0.0,
        &w.breakpoints(),
    )
}

/// Largest `epsilon` keeping the constructed weight positive.
pub fn epsilon_max(k: &BumpFunction, n: u32, l: f64) -> f64 {
    let q = n as f64 + l;
    let lowest = [k.a(), k.b(), k.c()]
        .iter()
        .map(|x| k.weighted_antiderivative(*x, q))
        .fold(0.0_f64, f64::min);
    if lowest < 0.0 {
        -1.0 / ((critical_exponent(n, l) + 1.0) * lowest)
    } else {
        f64::INFINITY
    }
}

/// Builds the constructed weight after validating the bump and positivity.
pub fn build_constructed_f(
    k: &BumpFunction,
    epsilon: f64,
    spec: &ProblemSpec,
) -> Result<WeightFunction> {
    k.validate(spec.n, spec.l)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let emax = epsilon_max(k, spec.n, spec.l);
    if epsilon >= emax {
        return Err(Error::validation(
            "(f1)",
            format!("epsilon = {epsilon} must stay below {emax} to keep f positive"),
        ));
    }
    Ok(WeightFunction::Constructed {
        bump: k.clone(),
        epsilon,
        n: spec.n,
        l: spec.l,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowDecayCondition {
    pub value: f64,
    pub threshold: f64,
    pub holds: bool,
}

/// Evaluates the slow-decay condition on `k` against the explicit solution at `alpha_star`.
///
/// The value is `φ(0)^{p*+1}∫₀ᵃk + φ(b)^{p*+1}∫ₐᵇk + φ(b)^{p*+1}∫_b^{r*}k`; the
/// condition holds when it is below `-delta^2`.
pub fn check_condition_2_1d(
    k: &BumpFunction,
    alpha_star: f64,
    r_star: f64,
    delta: f64,
    spec: &ProblemSpec,
) -> Result<SlowDecayCondition> {
    k.check_structure()?;
    if !(alpha_star >= 0.0 && delta > 0.0 && r_star > k.b()) {
        return Err(Error::InvalidArgument(format!(
            "need alpha* >= 0, delta > 0 and r* > b (alpha* = {alpha_star}, delta = {delta}, r* = {r_star})"
        )));
    }
    let ps = spec.p_star();
    let phi0 = phi_closed_form_raw(spec.n, spec.l, alpha_star, 0.0).powf(ps + 1.0);
    let phib = phi_closed_form_raw(spec.n, spec.l, alpha_star, k.b()).powf(ps + 1.0);
    let value = phi0 * k.integral(0.0, k.a())
        + phib * k.integral(k.a(), k.b())
        + phib * k.integral(k.b(), r_star);
    let threshold = -delta * delta;
    Ok(SlowDecayCondition {
        value,
        threshold,
        holds: value < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn families() -> Vec<(WeightFunction, f64)> {
        vec![
            (WeightFunction::PurePower { l: -0.5 }, -0.5),
            (
                WeightFunction::ExampleIii {
                    n: 3,
                    l: -1.0,
                    p: 2.5,
                },
                -1.0,
            ),
            (
                WeightFunction::ProductPower {
                    c1: 2.0,
                    c2: 1.0,
                    c3: 1.0,
                    c4: 2.0,
                    gamma: 1.0,
                    nu: -1.5,
                },
                -0.5,
            ),
            (
                WeightFunction::ShiftedPower {
                    a: 1.0,
                    b: 1.0,
                    mu: -0.25,
                    nu: -0.25,
                },
                -0.5,
            ),
            (
                WeightFunction::ShiftedPower {
                    a: 9.0 / 8.0,
                    b: 1.0,
                    mu: -0.75,
                    nu: -1.0,
                },
                -1.5,
            ),
            (
                WeightFunction::Constructed {
                    bump: BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap(),
                    epsilon: 0.2,
                    n: 3,
                    l: -0.5,
                },
                -0.5,
            ),
        ]
    }

    #[test]
    fn spot_values() {
        assert_relative_eq!(WeightFunction::PurePower { l: -0.5 }.eval(4.0), 0.5);
        assert_relative_eq!(
            WeightFunction::ExampleIii {
                n: 3,
                l: -1.0,
                p: 2.5
            }
            .eval(0.0),
            2.0,
            max_relative = 1e-15
        );
        let k = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap();
        let c = WeightFunction::Constructed {
            bump: k,
            epsilon: 0.0,
            n: 3,
            l: -0.5,
        };
        for r in [0.1, 1.5, 2.5, 10.0] {
            assert_eq!(c.eval(r), r.powf(-0.5));
        }
    }

    #[test]
    fn analytic_h_matches_differences() {
        for (w, l) in families() {
            let mut r = 1e-3;
            while r <= 1e3 {
                let a = w.h(r, l);
                let d = w.h_numeric(r, l);
                let scale = a.abs() + r.powf(-l) * w.eval(r);
                assert!((a - d).abs() <= 1e-6 * scale, "{w:?} at r={r}: {a} vs {d}");
                r *= 1.37;
            }
        }
    }

    #[test]
    fn scaled_family() {
        let w = WeightFunction::Scaled {
            factor: 3.0,
            base: Box::new(WeightFunction::PurePower { l: -0.5 }),
        };
        assert_eq!(w.h(2.0, -0.5), 0.0);
        assert_relative_eq!(w.eval(4.0), 1.5);
    }

    #[test]
    fn constructed_h_vanishes_beyond_support() {
        let (w, l) = families().pop().unwrap();
        for r in [3.0, 3.5, 10.0, 1e4] {
            assert_eq!(w.h(r, l), 0.0);
        }
        let a = w.eval(1e6) / 1e6f64.powf(l);
        let b = w.eval(1e3) / 1e3f64.powf(l);
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn big_h_for_constructed_equals_bump_integral() {
        let (w, l) = families().pop().unwrap();
        let WeightFunction::Constructed { bump, epsilon, .. } = &w else {
            unreachable!()
        };
        for big_r in [0.5, 1.0, 2.2, 3.0, 50.0] {
            let quad = eval_big_h(&w, big_r, 3, l, 1e-10).unwrap();
            let exact = epsilon * 5.0 * bump.antiderivative(big_r);
            assert!(
                (quad.value - exact).abs() <= 1e-10 * exact.abs().max(1e-3),
                "R={big_r}: {} vs {exact}",
                quad.value
            );
        }
    }

    #[test]
    fn big_h_halving_tolerance_stays_within_estimate() {
        let w = WeightFunction::ShiftedPower {
            a: 1.0,
            b: 1.0,
            mu: -0.25,
            nu: -0.25,
        };
        let a = eval_big_h(&w, 100.0, 3, -0.5, 1e-8).unwrap();
        let b = eval_big_h(&w, 100.0, 3, -0.5, 5e-9).unwrap();
        assert!((a.value - b.value).abs() <= a.error.max(1e-15));
    }

    #[test]
    fn nine_eighths_example_has_positive_h_integral() {
        let w = WeightFunction::ShiftedPower {
            a: 9.0 / 8.0,
            b: 1.0,
            mu: -0.75,
            nu: -1.0,
        };
        for big_r in [0.1, 1.0, 10.0] {
            assert!(eval_big_h(&w, big_r, 3, -1.5, 1e-10).unwrap().value > 0.0);
        }
    }

    #[test]
    fn epsilon_max_matches_grid_minimum() {
        let k = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap();
        // grid-minimise the bracket using quadrature of s^{-(n+l)} k
        let q = 2.5;
        let mut lowest = 0.0_f64;
        let mut acc = crate::quad::integrate_from_zero(
            |s| s.powf(-q) * k.eval(s),
            0.01,
            k.gamma - q,
            1e-12,
            0.0,
        )
        .unwrap()
        .value;
        let mut r = 0.01;
        let dr = 0.001;
        while r < 3.0 {
            acc += crate::quad::gauss_kronrod(|s| s.powf(-q) * k.eval(s), r, r + dr, 1e-12, 0.0)
                .unwrap()
                .value;
            r += dr;
            lowest = lowest.min(acc);
        }
        let expected = -1.0 / (5.0 * lowest);
        assert_relative_eq!(epsilon_max(&k, 3, -0.5), expected, max_relative = 1e-6);
    }

    #[test]
    fn build_rejects_large_epsilon() {
        let spec =
            ProblemSpec::new(3, -0.5, -0.5, 4.0, WeightFunction::PurePower { l: -0.5 }).unwrap();
        let k = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap();
        let emax = epsilon_max(&k, 3, -0.5);
        assert!(build_constructed_f(&k, 0.5 * emax, &spec).is_ok());
        match build_constructed_f(&k, 1.5 * emax, &spec) {
            Err(Error::Validation { clause, .. }) => assert_eq!(clause, "(f1)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slow_decay_condition() {
        let spec =
            ProblemSpec::new(3, -0.5, -0.5, 4.0, WeightFunction::PurePower { l: -0.5 }).unwrap();
        // deep well: ∫ₐᵇk = -10 (∫₀ᵃk + ∫ᵇᶜk)
        let base = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -1.0, 3.5]).unwrap();
        let outer = base.integral(0.0, 1.0) + base.integral(2.0, 3.0);
        let well = -10.0 * outer / base.integral(1.0, 2.0);
        let deep = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -well, 3.5]).unwrap();
        assert_relative_eq!(deep.integral(1.0, 2.0), -10.0 * outer, max_relative = 1e-12);
        let res = check_condition_2_1d(&deep, 1.0, 4.0, 0.1, &spec).unwrap();
        assert!(res.holds, "{res:?}");

        let tiny = check_condition_2_1d(&deep, 1e-8, 4.0, 0.1, &spec).unwrap();
        assert!(!tiny.holds && tiny.value.abs() < 1e-12);

        let k = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap();
        assert!(
            check_condition_2_1d(&k, 1.0, 2.25, 0.1, &spec)
                .unwrap()
                .holds
        );
        assert!(
            !check_condition_2_1d(&k, 1.0, 3.5, 0.1, &spec)
                .unwrap()
                .holds
        );
    }
}
