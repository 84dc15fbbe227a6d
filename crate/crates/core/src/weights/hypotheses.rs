use serde::{Deserialize, Serialize};

use super::WeightFunction;
use crate::model::ProblemSpec;
use crate::quad::{gauss_kronrod_split, integrate_from_zero};
use crate::stats::{linear_fit, log_space};

type Fit3 = (f64, f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    NotApplicable,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub id: String,
    pub status: Status,
    /// What the witness value is (a radius, a fitted exponent, an integral ...).
    pub witness_kind: String,
    pub witness: Option<f64>,
    pub note: String,
}

/// Constants fitted while checking the hypotheses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub l_fit: Option<f64>,
    pub sigma_fit: Option<f64>,
    /// Order of `h` at the origin.
    pub gamma_h: Option<f64>,
    /// Envelope `h < -delta1 r^{-beta}` beyond `r2`.
    pub beta: Option<f64>,
    pub delta1: Option<f64>,
    pub r2: Option<f64>,
    /// Envelope `|h| < delta1' r^{-beta'}` beyond `r2'`.
    pub beta_env: Option<f64>,
    pub delta_env: Option<f64>,
    pub r2_env: Option<f64>,
    /// `H(10^6)` and the bound on the remaining tail.
    pub big_h: Option<f64>,
    pub tail_bound: Option<f64>,
    pub r3: Option<f64>,
    /// `inf {h < 0}` and `sup {h > 0}`.
    pub r0: Option<f64>,
    pub r1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub fitted: FittedConstants,
    pub gamma_star: f64,
}

impl HypothesisReport {
    pub fn status(&self, id: &str) -> Status {
        self.checks
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.status)
            .unwrap_or(Status::Undetermined)
    }

    pub fn holds(&self, id: &str) -> bool {
        self.status(id) == Status::Holds
    }
}

const FIT_RESIDUAL: f64 = 0.1;
const SLOPE_SLACK: f64 = 0.05;
const R_MIN: f64 = 1e-6;
const R_MAX: f64 = 1e6;
const GRID: usize = 1201;

fn check(
    id: &str,
    status: Status,
    kind: &str,
    witness: Option<f64>,
    note: impl Into<String>,
) -> HypothesisCheck {
    HypothesisCheck {
        id: id.into(),
        status,
        witness_kind: kind.into(),
        witness,
        note: note.into(),
    }
}

/// Slope of `ln |g|` against `ln r` on 50 log-spaced points, with the rms residual.
fn log_slope(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<(f64, f64, f64)> {
    let rs = log_space(lo, hi, 50);
    let mut xs = Vec::with_capacity(50);
    let mut ys = Vec::with_capacity(50);
    for r in rs {
        let v = g(r).abs();
        if !(v > 0.0 && v.is_finite()) {
            return None;
        }
        xs.push(r.ln());
        ys.push(v.ln());
    }
    linear_fit(&xs, &ys).map(|f| (f.slope, f.intercept, f.rms))
}

/// Checks (f1)-(f9) numerically for `w` under the exponents of `spec`.
pub fn check_hypotheses(w: &WeightFunction, spec: &ProblemSpec) -> HypothesisReport {
    let n = spec.n as f64;
    let l = spec.l;
    let q = n + l - 1.0;
    let mut fitted = FittedConstants::default();
    let mut checks = Vec::with_capacity(9);

    let grid = log_space(R_MIN, R_MAX, GRID);
    let fv: Vec<f64> = grid.iter().map(|r| w.eval(*r)).collect();
    // h counts as zero when it is negligible against r^{-l} f
    let hv: Vec<f64> = grid
        .iter()
        .zip(&fv)
        .map(|(r, f)| {
            let h = w.h(*r, l);
            if h.abs() <= 1e-13 * r.powf(-l) * f.abs() {
                0.0
            } else {
                h
            }
        })
        .collect();

    // (f1)
    let (fmin_i, fmin) = fv
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, v)| {
                if !(v >= acc.1) {
                    (i, v)
                } else {
                    acc
                }
            },
        );
    let positive = fv.iter().all(|v| v.is_finite() && *v > 0.0);
    checks.push(check(
        "f1",
        if positive {
            Status::Holds
        } else {
            Status::Fails
        },
        "min f on [1e-6, 1e6]",
        Some(fmin),
        format!("minimum at r = {:.6e}", grid[fmin_i]),
    ));

    // (f2)
    match log_slope(|r| w.eval(r), 1e3, 1e5) {
        Some((slope, _, rms)) => {
            fitted.l_fit = Some(slope);
            let status = if rms > FIT_RESIDUAL {
                Status::Undetermined
            } else if l > -2.0 && l < 0.0 && slope <= l + SLOPE_SLACK {
                Status::Holds
            } else {
                Status::Fails
            };
            checks.push(check(
                "f2",
                status,
                "fitted exponent at infinity",
                Some(slope),
                format!("rms {rms:.3e}"),
            ));
        }
        None => checks.push(check(
            "f2",
            Status::Fails,
            "fitted exponent at infinity",
            None,
            "f not positive on [1e3, 1e5]",
        )),
    }

    // (f2')
    match log_slope(|r| w.eval(r), 1e-5, 1e-3) {
        Some((slope, _, rms)) => {
            fitted.sigma_fit = Some(slope);
            let status = if rms > FIT_RESIDUAL {
                Status::Undetermined
            } else if spec.sigma > -2.0 && slope >= spec.sigma - SLOPE_SLACK {
                Status::Holds
            } else {
                Status::Fails
            };
            checks.push(check(
                "f2'",
                status,
                "fitted exponent at the origin",
                Some(slope),
                format!("rms {rms:.3e}"),
            ));
        }
        None => checks.push(check(
            "f2'",
            Status::Fails,
            "fitted exponent at the origin",
            None,
            "f not positive near 0",
        )),
    }

    // sign structure of h
    let first_neg = hv.iter().position(|h| *h < 0.0);
    let last_pos = hv.iter().rposition(|h| *h > 0.0);
    fitted.r0 = first_neg.map(|i| grid[i]);
    fitted.r1 = last_pos.map(|i| grid[i]);
    let last_nonneg = hv.iter().rposition(|h| *h >= 0.0);
    let h_identically_zero = hv.iter().all(|h| *h == 0.0);

    // (f3)
    let tail_negative = hv.last().is_some_and(|h| *h < 0.0);
    if !tail_negative {
        checks.push(check(
            "f3",
            Status::Fails,
            "h at r = 1e6",
            hv.last().copied(),
            "h is not negative at large r",
        ));
    } else {
        let r_neg = last_nonneg.map(|i| grid[i + 1]).unwrap_or(R_MIN);
        // move r2 outward until the tail follows a power law
        let fits: Vec<(f64, Option<Fit3>)> = (0..6)
            .map(|j| (2.0 * r_neg).max(1.0) * 10f64.powi(j))
            .filter(|r2| *r2 <= 1e4)
            .map(|r2| {
                (
                    r2,
                    log_slope(|r| w.h(r, l), r2, (1e4_f64).max(100.0 * r2).min(R_MAX)),
                )
            })
            .collect();
        let chosen = fits
            .iter()
            .find(|(_, f)| f.is_some_and(|f| f.2 <= FIT_RESIDUAL))
            .or(fits.first());
        match chosen {
            Some((r2, Some((slope, _, rms)))) if *rms <= FIT_RESIDUAL => {
                let r2 = *r2;
                let beta = (-slope).max(0.01);
                let delta1 = grid
                    .iter()
                    .zip(&hv)
                    .filter(|(r, _)| **r >= r2)
                    .map(|(r, h)| -h * r.powf(beta))
                    .fold(f64::INFINITY, f64::min)
                    * 0.99;
                fitted.beta = Some(beta);
                fitted.delta1 = Some(delta1);
                fitted.r2 = Some(r2);
                let status = if delta1 > 0.0 {
                    Status::Holds
                } else {
                    Status::Fails
                };
                checks.push(check(
                    "f3",
                    status,
                    "fitted beta",
                    Some(beta),
                    format!("r2 = {r2:.6e}, delta1 = {delta1:.6e}"),
                ));
            }
            Some((_, Some((slope, _, rms)))) => checks.push(check(
                "f3",
                Status::Undetermined,
                "fitted beta",
                Some(-slope),
                format!("fit residual {rms:.3e} too large"),
            )),
            _ => checks.push(check(
                "f3",
                Status::Undetermined,
                "fitted beta",
                None,
                "h changes sign in the fit window",
            )),
        }
    }

    // (f4)
    let near_zero: Vec<f64> = log_space(1e-5, 1e-3, 50)
        .iter()
        .map(|r| w.h(*r, l))
        .collect();
    let near_scale: f64 = log_space(1e-5, 1e-3, 50)
        .iter()
        .map(|r| r.powf(-l) * w.eval(*r))
        .fold(0.0, f64::max);
    if near_zero.iter().all(|h| h.abs() <= 1e-13 * near_scale) {
        checks.push(check(
            "f4",
            Status::Holds,
            "max |h| on [1e-5, 1e-3]",
            Some(0.0),
            "h vanishes near the origin",
        ));
    } else {
        match log_slope(|r| w.h(r, l), 1e-5, 1e-3) {
            Some((slope, _, rms)) if rms <= FIT_RESIDUAL => {
                fitted.gamma_h = Some(slope);
                let status = if slope > SLOPE_SLACK / 2.0 {
                    Status::Holds
                } else {
                    Status::Fails
                };
                checks.push(check(
                    "f4",
                    status,
                    "fitted order of h at the origin",
                    Some(slope),
                    format!("rms {rms:.3e}"),
                ));
            }
            other => checks.push(check(
                "f4",
                Status::Undetermined,
                "fitted order of h at the origin",
                other.map(|o| o.0),
                "h does not follow a power law near 0",
            )),
        }
    }

    // (f6) envelope, needed for the tail of (f5)/(f7)
    let r2_env = fitted.r2.unwrap_or(10.0);
    let beyond_zero = grid
        .iter()
        .zip(&hv)
        .filter(|(r, _)| **r >= 100.0)
        .all(|(_, h)| *h == 0.0);
    let mut envelope: Option<(f64, f64)> = None;
    if beyond_zero {
        checks.push(check(
            "f6",
            Status::Holds,
            "max |h| on [1e2, 1e6]",
            Some(0.0),
            "h vanishes at large r",
        ));
    } else {
        let fits: Vec<(f64, Option<Fit3>)> = (0..4)
            .map(|j| r2_env * 10f64.powi(j))
            .filter(|r| *r <= 1e4)
            .map(|r| {
                (
                    r,
                    log_slope(|x| w.h(x, l), r, (1e4_f64).max(100.0 * r).min(R_MAX)),
                )
            })
            .collect();
        let chosen = fits
            .iter()
            .find(|(_, f)| f.is_some_and(|f| f.2 <= FIT_RESIDUAL))
            .or(fits.first());
        match chosen {
            Some((r2e, Some((slope, _, rms)))) if *rms <= FIT_RESIDUAL => {
                let r2e = *r2e;
                let beta = -slope;
                let delta = grid
                    .iter()
                    .zip(&hv)
                    .filter(|(r, _)| **r >= r2e)
                    .map(|(r, h)| h.abs() * r.powf(beta))
                    .fold(0.0, f64::max)
                    * 1.01;
                fitted.beta_env = Some(beta);
                fitted.delta_env = Some(delta);
                fitted.r2_env = Some(r2e);
                envelope = Some((beta, delta));
                let status = if beta > 0.0 {
                    Status::Holds
                } else {
                    Status::Fails
                };
                checks.push(check(
                    "f6",
                    status,
                    "fitted envelope exponent",
                    Some(beta),
                    format!("delta1' = {delta:.6e}"),
                ));
            }
            other => checks.push(check(
                "f6",
                Status::Undetermined,
                "fitted envelope exponent",
                other.and_then(|o| o.1).map(|o| -o.0),
                "h does not follow a power law at large r",
            )),
        }
    }

    // cumulative H on the grid
    let quad_rel = 1e-10;
    let mut big_h = Vec::with_capacity(GRID);
    let integrand = |s: f64| w.h(s, l) * s.powf(q);
    let kinks = w.breakpoints();
    let mut acc =
        integrate_from_zero(integrand, R_MIN, (q - 1.0).max(-0.5), quad_rel, 0.0).map(|r| r.value);
    let mut quad_ok = acc.is_ok();
    big_h.push(*acc.as_ref().unwrap_or(&0.0));
    for win in grid.windows(2) {
        if let Ok(a) = acc {
            acc = gauss_kronrod_split(integrand, win[0], win[1], quad_rel, 1e-300, &kinks)
                .map(|r| a + r.value);
        }
        quad_ok &= acc.is_ok();
        big_h.push(*acc.as_ref().unwrap_or(&0.0));
    }
    let h_total = *big_h.last().unwrap_or(&0.0);
    fitted.big_h = quad_ok.then_some(h_total);

    // (f5) and (f7)
    let nl = n + l;
    let (s5, s7, note) = if !quad_ok {
        (
            Status::Undetermined,
            Status::Undetermined,
            "quadrature of H failed".to_string(),
        )
    } else if h_identically_zero {
        fitted.tail_bound = Some(0.0);
        (
            Status::Fails,
            Status::Fails,
            "h vanishes identically, so H = 0".to_string(),
        )
    } else if beyond_zero {
        fitted.tail_bound = Some(0.0);
        let s = if h_total < 0.0 {
            (Status::Holds, Status::Fails)
        } else if h_total > 0.0 {
            (Status::Fails, Status::Holds)
        } else {
            (Status::Fails, Status::Fails)
        };
        (s.0, s.1, "h has compact support".to_string())
    } else {
        match envelope {
            Some((beta, delta)) if beta > nl => {
                let tail = delta * R_MAX.powf(nl - beta) / (beta - nl);
                fitted.tail_bound = Some(tail);
                if h_total.abs() <= tail {
                    (
                        Status::Undetermined,
                        Status::Undetermined,
                        format!("|H| below tail bound {tail:.3e}"),
                    )
                } else if h_total < 0.0 {
                    (
                        Status::Holds,
                        Status::Fails,
                        format!("tail bound {tail:.3e}"),
                    )
                } else {
                    (
                        Status::Fails,
                        Status::Holds,
                        format!("tail bound {tail:.3e}"),
                    )
                }
            }
            Some(_) => {
                // envelope too slow for convergence: the tail diverges with the sign of h at infinity
                fitted.tail_bound = None;
                let last = *hv.last().unwrap_or(&0.0);
                if last < 0.0 {
                    (
                        Status::Holds,
                        Status::Fails,
                        "H diverges to -infinity".to_string(),
                    )
                } else {
                    (
                        Status::Fails,
                        Status::Holds,
                        "H diverges to +infinity".to_string(),
                    )
                }
            }
            None => (
                Status::Undetermined,
                Status::Undetermined,
                "no envelope for the tail".to_string(),
            ),
        }
    };
    checks.push(check("f5", s5, "H(1e6)", fitted.big_h, note.clone()));
    checks.push(check("f7", s7, "H(1e6)", fitted.big_h, note));

    // (f8)
    let last_nonpos = big_h.iter().rposition(|v| *v <= 0.0);
    let (s8, r3) = match last_nonpos {
        _ if !quad_ok => (Status::Undetermined, None),
        None => (Status::Fails, None),
        Some(i) if i + 1 == big_h.len() => {
            if s7 == Status::Holds {
                (Status::Undetermined, None)
            } else {
                (Status::Fails, None)
            }
        }
        Some(i) => {
            let (mut lo, mut hi) = (grid[i], grid[i + 1]);
            let base = big_h[i];
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let v = base
                    + gauss_kronrod_split(integrand, grid[i], mid, quad_rel, 1e-300, &kinks)
                        .map(|r| r.value)
                        .unwrap_or(0.0);
                if v <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-12 * hi {
                    break;
                }
            }
            (Status::Holds, Some(0.5 * (lo + hi)))
        }
    };
    fitted.r3 = r3;
    checks.push(check("f8", s8, "r3 = sup{H <= 0}", r3, ""));

    // (f9), compared as stated: gamma (2+l) > (sigma - l)(n+l)
    let gamma_star = spec.exponents().gamma_star;
    match (
        checks.iter().find(|c| c.id == "f4").map(|c| c.status),
        fitted.gamma_h,
    ) {
        (Some(Status::Holds), Some(g)) => {
            let margin = g * (2.0 + l) - (spec.sigma - l) * (n + l);
            let status = if margin > 0.0 {
                Status::Holds
            } else {
                Status::Fails
            };
            checks.push(check(
                "f9",
                status,
                "gamma(2+l) - (sigma-l)(n+l)",
                Some(margin),
                format!("gamma = {g:.6}"),
            ));
        }
        _ => checks.push(check(
            "f9",
            Status::NotApplicable,
            "gamma(2+l) - (sigma-l)(n+l)",
            None,
            "no power-law order for h at 0",
        )),
    }

    HypothesisReport {
        checks,
        fitted,
        gamma_star,
    }
}
