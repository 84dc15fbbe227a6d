//! Labels a shot as crossing, slowly decaying or rapidly decaying.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Tolerances};
use crate::shoot::{
    default_horizon, integrate, integrate_with, IntegrateOptions, Termination, Trajectory,
};
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Crossing,
    SlowDecay,
    RapidDecay,
    Undetermined,
}

impl Label {
    pub fn letter(self) -> char {
        match self {
            Label::Crossing => 'C',
            Label::SlowDecay => 'S',
            Label::RapidDecay => 'R',
            Label::Undetermined => 'U',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Crossing => "crossing",
            Label::SlowDecay => "slow_decay",
            Label::RapidDecay => "rapid_decay",
            Label::Undetermined => "undetermined",
        }
    }
}

/// Which evidence decided the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Crossing,
    Energy,
    ExponentFit,
    Trend,
    Underflow,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub alpha: f64,
    pub label: Label,
    pub method: Method,
    pub crossing_radius: Option<f64>,
    /// Fitted `m` in `u ~ r^{-m}` over the last decade.
    pub decay_exponent: Option<f64>,
    /// `r^{n-2} u` at the horizon and its Spearman trend over the last decade.
    pub d_limit: Option<f64>,
    pub d_trend: Option<f64>,
    /// `w = r^{(n-2)/2} u` at the horizon and its trend.
    pub w_limit: Option<f64>,
    pub w_trend: Option<f64>,
    /// Emden-Fowler energy at the horizon divided by its largest magnitude along the shot.
    pub energy: Option<f64>,
    pub horizon: f64,
    pub confidence: f64,
    /// The evidence points to a zero beyond the horizon.
    pub pending_crossing: bool,
}

/// Energy `½ w_t² - ½ kappa² w² + B(r) (w⁺)^{p+1}/(p+1)` with `B = r^{2-(p-1)kappa} f(r)`.
pub fn emden_fowler_energy(spec: &ProblemSpec, r: f64, w: f64, wt: f64) -> f64 {
    let kappa = spec.exponents().kappa;
    let p = spec.p;
    let b = r.powf(2.0 - (p - 1.0) * kappa) * spec.weight.eval(r);
    let wp = w.max(0.0);
    0.5 * wt * wt - 0.5 * kappa * kappa * w * w + b * wp.powf(p + 1.0) / (p + 1.0)
}

/// Threshold on the normalised energy below which it counts as zero.
pub fn energy_threshold(tol: &Tolerances) -> f64 {
    (10.0 * tol.ode_rel).max(1e-11)
}

/// Classifies a finished shot.
pub fn classify(spec: &ProblemSpec, traj: &Trajectory, tol: &Tolerances) -> Classification {
    let ex = spec.exponents();
    let mut c = Classification {
        alpha: traj.alpha,
        label: Label::Undetermined,
        method: Method::Inconclusive,
        crossing_radius: traj.events.crossing_radius,
        decay_exponent: None,
        d_limit: None,
        d_trend: None,
        w_limit: None,
        w_trend: None,
        energy: None,
        horizon: traj.horizon,
        confidence: 0.0,
        pending_crossing: false,
    };
    if traj.events.crossing_radius.is_some() {
        c.label = Label::Crossing;
        c.method = Method::Crossing;
        c.confidence = 1.0;
        return c;
    }
    if traj.alpha == 0.0 {
        return c;
    }
    let fit = traj.decay_fit(1.0, 40);
    if let Some(f) = fit {
        c.decay_exponent = Some(f.exponent);
        c.d_limit = Some(f.d_last);
        c.d_trend = Some(f.d_trend);
        c.w_limit = Some(f.w_last);
        c.w_trend = Some(f.w_trend);
    }
    let gap = (ex.rapid_rate - ex.slow_rate).abs();
    let margin = tol.class_margin * gap;
    let near_rapid = fit.map(|f| (f.exponent - ex.rapid_rate).abs());

    if traj.termination == Termination::Underflow {
        c.label = Label::RapidDecay;
        c.method = Method::Underflow;
        c.confidence = 0.5;
        return c;
    }

    if spec.is_critical() {
        let mut scale: f64 = 0.0;
        for s in &traj.samples {
            let wt = s.dw * s.r;
            let b = s.r.powf(-spec.l) * spec.weight.eval(s.r);
            let e = 0.5 * wt * wt
                + 0.5 * ex.kappa * ex.kappa * s.w * s.w
                + b * s.w.max(0.0).powf(spec.p + 1.0) / (spec.p + 1.0);
            scale = scale.max(e);
        }
        let scale = scale.max(f64::MIN_POSITIVE);
        let energy_at = |r: f64| {
            traj.at(r)
                .map(|s| emden_fowler_energy(spec, s.r, s.w, s.dw * s.r) / scale)
        };
        let last = traj
            .at(traj.horizon)
            .unwrap_or(traj.samples[traj.samples.len() - 1]);
        let wt = last.dw * last.r;
        let e = emden_fowler_energy(spec, last.r, last.w, wt) / scale;
        c.energy = Some(e);
        let eta = energy_threshold(tol);
        // the energy is only meaningful once the weight has settled
        let drift = energy_at(traj.horizon / 10.0)
            .map(|e0| (e - e0).abs())
            .unwrap_or(f64::INFINITY);
        if drift > eta.max(0.1 * e.abs()) {
            return c;
        }
        if e < -eta {
            c.label = Label::SlowDecay;
            c.method = Method::Energy;
            c.confidence = (e.abs() / (10.0 * eta)).min(1.0);
        } else if e > eta {
            c.method = Method::Energy;
            c.pending_crossing = true;
            c.confidence = (e / (10.0 * eta)).min(1.0);
        } else if wt < 0.0 {
            c.label = Label::RapidDecay;
            c.method = Method::Energy;
            c.confidence = match near_rapid {
                Some(d) if d <= margin => 1.0 - 0.5 * d / margin.max(f64::MIN_POSITIVE),
                _ => 0.25,
            };
        }
        return c;
    }

    let Some(f) = fit else {
        return c;
    };
    // a tail still moving between the two rates is a transient, not a limit
    let prev = traj.decay_fit_window(traj.horizon / 100.0, traj.horizon / 10.0, 40);
    let drift = prev.map(|p| f.exponent - p.exponent);
    if drift.is_none_or(|d| d.abs() > 0.25 * margin) {
        let hi = ex.rapid_rate.max(ex.slow_rate);
        let lo = ex.rapid_rate.min(ex.slow_rate);
        let settling_slow = drift.is_some_and(|d| d <= 0.0)
            && f.exponent > lo
            && f.exponent < hi
            && f.d_trend > 0.95;
        if !(settling_slow && ex.slow_rate < ex.rapid_rate) {
            c.pending_crossing = f.exponent > hi + margin;
            return c;
        }
        c.label = Label::SlowDecay;
        c.method = Method::Trend;
        c.confidence = 0.5;
        return c;
    }
    let d_rapid = (f.exponent - ex.rapid_rate).abs();
    let d_slow = (f.exponent - ex.slow_rate).abs();
    if d_rapid <= margin && d_rapid <= d_slow {
        c.label = Label::RapidDecay;
        c.method = Method::ExponentFit;
        c.confidence = 1.0 - d_rapid / margin.max(f64::MIN_POSITIVE);
    } else if d_slow <= margin {
        c.label = Label::SlowDecay;
        c.method = Method::ExponentFit;
        c.confidence = 1.0 - d_slow / margin.max(f64::MIN_POSITIVE);
    } else {
        let lo = ex.rapid_rate.min(ex.slow_rate);
        let hi = ex.rapid_rate.max(ex.slow_rate);
        let inside = f.exponent > lo && f.exponent < hi;
        if inside && f.d_trend > 0.95 && ex.slow_rate < ex.rapid_rate {
            c.label = Label::SlowDecay;
            c.method = Method::Trend;
            c.confidence = 0.5;
        } else {
            c.pending_crossing = f.exponent > hi + margin;
        }
    }
    c
}

/// Shoots and classifies, extending the horizon by factors of 100 while the label is undetermined.
pub fn shoot_and_classify(
    spec: &ProblemSpec,
    alpha: f64,
    tol: &Tolerances,
) -> Result<(Trajectory, Classification)> {
    let mut horizon = default_horizon(spec, alpha).min(tol.class_horizon);
    loop {
        let traj = integrate(spec, alpha, tol, horizon)?;
        let c = classify(spec, &traj, tol);
        if c.label != Label::Undetermined
            || horizon >= tol.class_horizon
            || traj.termination != Termination::HorizonReached
        {
            return Ok((traj, c));
        }
        horizon = (horizon * 100.0).min(tol.class_horizon);
    }
}

/// Label only.
pub fn classify_alpha(spec: &ProblemSpec, alpha: f64, tol: &Tolerances) -> Result<Classification> {
    shoot_and_classify(spec, alpha, tol).map(|(_, c)| c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RAlphaScaling {
    pub small: ScalingFit,
    pub large: ScalingFit,
}

/// Radius `r_{alpha,k}` where the shot first reaches `alpha/k`.
pub fn r_alpha_k(spec: &ProblemSpec, alpha: f64, k: f64, tol: &Tolerances) -> Result<Option<f64>> {
    let opts = IntegrateOptions {
        horizon: default_horizon(spec, alpha),
        continue_past_zero: false,
        extra_k: &[],
    };
    let traj = integrate_with(spec, alpha, tol, &opts)?;
    crate::shoot::detect_r_alpha(&traj, k)
}

/// Log-log slopes of `r_{alpha,k}` against `alpha` over the lower and upper halves of `alphas`.
pub fn fit_r_alpha_scaling(
    spec: &ProblemSpec,
    alphas: &[f64],
    k: f64,
    tol: &Tolerances,
) -> Result<RAlphaScaling> {
    let mut sorted: Vec<f64> = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let radii: Vec<Result<Option<f64>>> = sorted
        .par_iter()
        .map(|a| r_alpha_k(spec, *a, k, tol))
        .collect();
    let mut pts = Vec::new();
    for (a, r) in sorted.iter().zip(radii) {
        if let Some(r) = r? {
            pts.push((a.ln(), r.ln()));
        }
    }
    let half = pts.len() / 2;
    let fit = |part: &[(f64, f64)]| -> Result<ScalingFit> {
        if part.len() < 5 {
            return Err(Error::InsufficientData(format!(
                "{} usable radii, need at least 5 per half",
                part.len()
            )));
        }
        let xs: Vec<f64> = part.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = part.iter().map(|p| p.1).collect();
        let f = linear_fit(&xs, &ys)
            .ok_or_else(|| Error::InsufficientData("degenerate alpha grid".into()))?;
        Ok(ScalingFit {
            slope: f.slope,
            r_squared: f.r_squared,
            points: part.len(),
        })
    };
    Ok(RAlphaScaling {
        small: fit(&pts[..pts.len() - half])?,
        large: fit(&pts[pts.len() - half..])?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriBound {
    /// `sup r^{(n-2)/2} u` on `[r0, horizon]` over every trajectory.
    pub c_est: f64,
    /// The same supremum without the last decade of alphas.
    pub c_reduced: f64,
    pub pass: bool,
}

/// Estimates the a-priori bound `r^{(n-2)/2} u <= C` and checks that it is stable when the
/// alpha range grows by one decade.
pub fn apriori_bound_check(trajs: &[Trajectory], r0: f64) -> Result<AprioriBound> {
    if trajs.is_empty() {
        return Err(Error::InsufficientData("no trajectories".into()));
    }
    let sup = |t: &Trajectory| -> f64 {
        let hi = t.horizon;
        if hi <= r0 {
            return 0.0;
        }
        let mut best: f64 = 0.0;
        for r in crate::stats::log_space(r0, hi, 400) {
            if let Some(s) = t.at(r) {
                best = best.max(s.w.max(0.0));
            }
        }
        for s in &t.samples {
            if s.r >= r0 {
                best = best.max(s.w.max(0.0));
            }
        }
        best
    };
    let top = trajs.iter().map(|t| t.alpha).fold(0.0, f64::max);
    let c_est = trajs.iter().map(sup).fold(0.0, f64::max);
    let c_reduced = trajs
        .iter()
        .filter(|t| t.alpha <= top / 10.0 * (1.0 + 1e-12))
        .map(sup)
        .fold(0.0, f64::max);
    let pass =
        c_est.is_finite() && (c_reduced == 0.0 || (c_est - c_reduced).abs() <= 0.1 * c_reduced);
    Ok(AprioriBound {
        c_est,
        c_reduced,
        pass,
    })
}
