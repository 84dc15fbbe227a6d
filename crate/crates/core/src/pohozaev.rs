//! Pohozaev-type identities evaluated along numerical trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Tolerances};
use crate::quad::integrate_log_panels_split;
use crate::shoot::{default_horizon, integrate, Trajectory};
use crate::stats::log_space;
use crate::weights::{check_hypotheses, Status};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Magnitude of the largest term, for relative comparisons.
    pub scale: f64,
}

impl PohozaevReport {
    pub fn relative_residual(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual.abs() / self.scale
        } else {
            self.residual.abs()
        }
    }
}

fn check_radius(traj: &Trajectory, big_r: f64) -> Result<()> {
    if !(big_r > 0.0) || big_r > traj.horizon * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "R = {big_r} outside (0, {}]",
            traj.horizon
        )));
    }
    Ok(())
}

/// `∫₀ᴿ {-(n-2)/2 (p-p*) r^{-l} f + h} r^{n+l-1} (u⁺)^{p+1} dr` and the integral of its modulus.
fn source_integral(
    spec: &ProblemSpec,
    traj: &Trajectory,
    big_r: f64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if traj.alpha == 0.0 {
        return Ok((0.0, 0.0));
    }
    let n = spec.n as f64;
    let l = spec.l;
    let p = spec.p;
    let shift = -(n - 2.0) / 2.0 * (p - spec.p_star());
    let integrand = |s: f64| {
        let u = traj.at(s).map(|v| v.u.max(0.0)).unwrap_or(0.0);
        let coeff = shift * s.powf(-l) * spec.weight.eval(s) + spec.weight.h(s, l);
        coeff * s.powf(n + l - 1.0) * u.powf(p + 1.0)
    };
    let q = (n + l - 2.0).max(-0.5);
    let kinks = spec.weight.breakpoints();
    let signed = integrate_log_panels_split(integrand, big_r, q, tol.quad_rel, 0.0, &kinks)?;
    let modulus = integrate_log_panels_split(|s| integrand(s).abs(), big_r, q, 1e-6, 0.0, &kinks)?;
    Ok((signed.value, modulus.value))
}

/// Energy identity in the `u` variables:
/// `(n-2)/2 R^{n-1} u u' + ½ R^n u'² + R^n f(R) (u⁺)^{p+1}/(p+1) = (1/(p+1)) ∫₀ᴿ {...} r^{n+l-1} (u⁺)^{p+1} dr`.
pub fn identity_3_3(
    spec: &ProblemSpec,
    traj: &Trajectory,
    big_r: f64,
    tol: &Tolerances,
) -> Result<PohozaevReport> {
    check_radius(traj, big_r)?;
    let n = spec.n as f64;
    let p = spec.p;
    let s = traj
        .at(big_r)
        .ok_or_else(|| Error::InvalidArgument(format!("R = {big_r} not on the trajectory")))?;
    let up = s.u.max(0.0);
    let t1 = (n - 2.0) / 2.0 * big_r.powf(n - 1.0) * s.u * s.du;
    let t2 = 0.5 * big_r.powf(n) * s.du * s.du;
    let t3 = big_r.powf(n) * spec.weight.eval(big_r) * up.powf(p + 1.0) / (p + 1.0);
    let lhs = t1 + t2 + t3;
    let (integral, modulus) = source_integral(spec, traj, big_r, tol)?;
    let rhs = integral / (p + 1.0);
    let scale = [t1.abs(), t2.abs(), t3.abs(), modulus / (p + 1.0)]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(PohozaevReport {
        r: big_r,
        lhs,
        rhs,
        residual: lhs - rhs,
        scale,
    })
}

/// The same balance in the `w` variables:
/// `-R² w'' w - R w w' + R² w'² - ((p-1)/(p+1)) R^n f (u⁺)^{p+1} = (2/(p+1)) ∫₀ᴿ {...} r^{n+l-1} (u⁺)^{p+1} dr`.
///
/// At `p = p*` the coefficient `(p-1)/(p+1)` equals `(l+2)/(n+l)`.
pub fn identity_4_1(
    spec: &ProblemSpec,
    traj: &Trajectory,
    big_r: f64,
    tol: &Tolerances,
) -> Result<PohozaevReport> {
    check_radius(traj, big_r)?;
    let n = spec.n as f64;
    let p = spec.p;
    let kappa = spec.exponents().kappa;
    let s = traj
        .at(big_r)
        .ok_or_else(|| Error::InvalidArgument(format!("R = {big_r} not on the trajectory")))?;
    let w = s.w;
    let wt = big_r * s.dw;
    let b = big_r.powf(2.0 - (p - 1.0) * kappa) * spec.weight.eval(big_r);
    let wtt = kappa * kappa * w - b * w.max(0.0).powf(p);
    // R² w'' = w_tt - w_t
    let r2w2 = wtt - wt;
    let t1 = -r2w2 * w;
    let t2 = -wt * w;
    let t3 = wt * wt;
    let t4 = -(p - 1.0) / (p + 1.0)
        * big_r.powf(n)
        * spec.weight.eval(big_r)
        * s.u.max(0.0).powf(p + 1.0);
    let lhs = t1 + t2 + t3 + t4;
    let (integral, modulus) = source_integral(spec, traj, big_r, tol)?;
    let rhs = 2.0 * integral / (p + 1.0);
    let scale = [
        t1.abs(),
        t2.abs(),
        t3.abs(),
        t4.abs(),
        2.0 * modulus / (p + 1.0),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(PohozaevReport {
        r: big_r,
        lhs,
        rhs,
        residual: lhs - rhs,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub r: f64,
    pub w: f64,
    pub r_dw: f64,
    pub r2_d2w: f64,
}

/// Radii in the tail where `|R w'|` is locally minimal, with `(w, R w', R² w'')` there.
///
/// Searches the last decade, widened to four decades when the last decade has no interior minimum.
pub fn limit_sequence_probe(spec: &ProblemSpec, traj: &Trajectory) -> Result<Vec<LimitPoint>> {
    let kappa = spec.exponents().kappa;
    let p = spec.p;
    let point = |r: f64| -> Option<LimitPoint> {
        let s = traj.at(r)?;
        let wt = r * s.dw;
        let b = r.powf(2.0 - (p - 1.0) * kappa) * spec.weight.eval(r);
        let wtt = kappa * kappa * s.w - b * s.w.max(0.0).powf(p);
        Some(LimitPoint {
            r,
            w: s.w,
            r_dw: wt,
            r2_d2w: wtt - wt,
        })
    };
    let hi = traj.horizon;
    for decades in [1.0, 4.0] {
        let lo = (hi / 10f64.powf(decades)).max(traj.r_start);
        let pts: Vec<LimitPoint> = log_space(lo, hi, 400)
            .into_iter()
            .filter_map(point)
            .collect();
        if pts.len() < 3 {
            return Err(Error::InsufficientData("trajectory tail too short".into()));
        }
        let mut found: Vec<LimitPoint> = pts
            .windows(3)
            .filter(|v| v[1].r_dw.abs() <= v[0].r_dw.abs() && v[1].r_dw.abs() <= v[2].r_dw.abs())
            .map(|v| v[1])
            .collect();
        if !found.is_empty() {
            return Ok(found);
        }
        if decades >= 4.0 {
            let last = pts[pts.len() - 1];
            let first = pts[0];
            found.push(if last.r_dw.abs() <= first.r_dw.abs() {
                last
            } else {
                first
            });
            return Ok(found);
        }
    }
    Ok(Vec::new())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub alpha: f64,
    pub r_alpha: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Whether the smallness hypotheses behind the growth statement hold.
    pub gate: bool,
    pub gate_reason: String,
    pub points: Vec<GrowthPoint>,
    pub strictly_increasing: bool,
}

/// `∫₀^{r_alpha} h r^{n+l-1} (u⁺)^{p+1} dr` along a grid of large `alpha`.
///
/// The growth in `alpha` is only asserted when `p = p*`, `h` has a power-law order `gamma` at the
/// origin and `gamma < gamma*`.
pub fn lemma_4_1_growth(
    spec: &ProblemSpec,
    alphas: &[f64],
    tol: &Tolerances,
) -> Result<GrowthReport> {
    let report = check_hypotheses(&spec.weight, spec);
    let gamma_star = spec.exponents().gamma_star;
    let (gate, gate_reason) = if !spec.is_critical() {
        (false, "p differs from the critical exponent".to_string())
    } else {
        match (report.status("f4"), report.fitted.gamma_h) {
            (Status::Holds, Some(g)) if g < gamma_star => {
                (true, format!("gamma = {g:.6} < gamma* = {gamma_star:.6}"))
            }
            (Status::Holds, Some(g)) => {
                (false, format!("gamma = {g:.6} >= gamma* = {gamma_star:.6}"))
            }
            _ => (false, "h has no power-law order at the origin".to_string()),
        }
    };
    let n = spec.n as f64;
    let l = spec.l;
    let p = spec.p;
    let points: Vec<Result<GrowthPoint>> = alphas
        .par_iter()
        .map(|alpha| {
            let traj = integrate(spec, *alpha, tol, default_horizon(spec, *alpha))?;
            let ra = traj.events.r_alpha.ok_or_else(|| {
                Error::InsufficientData(format!("no r_alpha for alpha = {alpha}"))
            })?;
            let integrand = |s: f64| {
                let u = traj.at(s).map(|v| v.u.max(0.0)).unwrap_or(0.0);
                spec.weight.h(s, l) * s.powf(n + l - 1.0) * u.powf(p + 1.0)
            };
            let i = integrate_log_panels_split(
                integrand,
                ra,
                (n + l - 2.0).max(-0.5),
                tol.quad_rel,
                0.0,
                &spec.weight.breakpoints(),
            )?;
            Ok(GrowthPoint {
                alpha: *alpha,
                r_alpha: ra,
                integral: i.value,
            })
        })
        .collect();
    let mut points = points.into_iter().collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let strictly_increasing = points.windows(2).all(|w| w[1].integral > w[0].integral);
    Ok(GrowthReport {
        gate,
        gate_reason,
        points,
        strictly_increasing,
    })
}
