//! Shooting from the origin: `u'' + (n-1)/r u' + f(r) (u⁺)^p = 0`, `u(0) = alpha`, `u'(0) = 0`.
//!
//! The equation is integrated in the Emden-Fowler variables `t = ln r`, `w = r^kappa u`
//! with `kappa = (n-2)/2`, where it reads `w_tt = kappa^2 w - r^{2-(p-1)kappa} f(r) (w⁺)^p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Tolerances};
use crate::ode::{solve, Control, DenseStep, Dop853Options};
use crate::quad::{integrate_from_zero, integrate_log_panels};
use crate::stats::{linear_fit, log_space, spearman_trend};

/// Values below this are treated as an underflow of `u`.
pub const UNDERFLOW: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub w: f64,
    pub dw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Crossed,
    HorizonReached,
    Underflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RAlphaK {
    pub k: f64,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Events {
    pub crossing_radius: Option<f64>,
    /// First radius with `u = alpha/2`.
    pub r_alpha: Option<f64>,
    pub r_alpha_k: Vec<RAlphaK>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub horizon: f64,
    /// Keep integrating after the first zero (the nonlinearity is switched off by `u⁺`).
    pub continue_past_zero: bool,
    /// Extra levels `u = alpha/k` to record.
    pub extra_k: &'static [f64],
}

impl IntegrateOptions {
    pub fn to(horizon: f64) -> Self {
        IntegrateOptions {
            horizon,
            continue_past_zero: false,
            extra_k: &[],
        }
    }
}

/// A shot from the origin with its dense interpolant.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub alpha: f64,
    pub n: u32,
    pub p: f64,
    pub kappa: f64,
    pub samples: Vec<Sample>,
    pub events: Events,
    pub horizon: f64,
    pub termination: Termination,
    pub r_start: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    u_start: f64,
    t_end: f64,
    dense: Vec<DenseStep<2>>,
}

impl Trajectory {
    fn trivial(spec: &ProblemSpec, horizon: f64) -> Self {
        let kappa = spec.exponents().kappa;
        let zero = |r| Sample {
            r,
            u: 0.0,
            du: 0.0,
            w: 0.0,
            dw: 0.0,
        };
        Trajectory {
            alpha: 0.0,
            n: spec.n,
            p: spec.p,
            kappa,
            samples: vec![zero(0.0), zero(horizon)],
            events: Events::default(),
            horizon,
            termination: Termination::HorizonReached,
            r_start: 0.0,
            steps_accepted: 0,
            steps_rejected: 0,
            u_start: 0.0,
            t_end: horizon.ln(),
            dense: Vec::new(),
        }
    }

    fn sample_at(&self, r: f64, w: f64, wt: f64) -> Sample {
        let rk = r.powf(-self.kappa);
        Sample {
            r,
            u: rk * w,
            du: rk / r * (wt - self.kappa * w),
            w,
            dw: wt / r,
        }
    }

    /// Interpolated state at radius `r`, or `None` beyond the end of the shot.
    pub fn at(&self, r: f64) -> Option<Sample> {
        if !(r >= 0.0) || r > self.horizon * (1.0 + 1e-12) {
            return None;
        }
        if self.alpha == 0.0 {
            return Some(Sample {
                r,
                u: 0.0,
                du: 0.0,
                w: 0.0,
                dw: 0.0,
            });
        }
        if r < self.r_start {
            // leading-order origin behaviour matched to the start state
            let sigma_eff = self.origin_order();
            let x = r / self.r_start;
            let drop = self.alpha - self.u_start;
            let u = self.alpha - drop * x.powf(sigma_eff);
            let du = if r > 0.0 {
                -drop * sigma_eff / self.r_start * x.powf(sigma_eff - 1.0)
            } else {
                0.0
            };
            let rk = r.powf(self.kappa);
            let w = rk * u;
            let dw = if r > 0.0 {
                rk * (du + self.kappa * u / r)
            } else {
                0.0
            };
            return Some(Sample { r, u, du, w, dw });
        }
        let t = r.ln().min(self.t_end);
        let i = self.dense.partition_point(|s| s.t0 <= t).saturating_sub(1);
        let step = self.dense.get(i)?;
        let y = step.eval(t);
        Some(self.sample_at(r, y[0], y[1]))
    }

    fn origin_order(&self) -> f64 {
        // u(r_s) - alpha ~ r^{2+sigma}; recovered from the stored start derivative
        self.samples
            .first()
            .map(|s| {
                if self.alpha - s.u > 0.0 {
                    -s.du * s.r / (self.alpha - s.u)
                } else {
                    2.0
                }
            })
            .filter(|v| v.is_finite() && *v > 0.0)
            .unwrap_or(2.0)
    }

    /// `(w, w_t)` at `r` in the Emden-Fowler variables.
    pub fn w_state(&self, r: f64) -> Option<(f64, f64)> {
        self.at(r).map(|s| (s.w, s.dw * s.r))
    }

    /// Least-squares decay exponent `m` of `u ~ r^{-m}` over `[hi/10^decades, hi]`.
    pub fn decay_fit(&self, decades: f64, points: usize) -> Option<DecayFit> {
        self.decay_fit_window(self.horizon / 10f64.powf(decades), self.horizon, points)
    }

    pub fn decay_fit_window(&self, lo: f64, hi: f64, points: usize) -> Option<DecayFit> {
        let lo = lo.max(self.r_start);
        let hi = hi.min(self.horizon);
        if hi <= lo * 1.5 {
            return None;
        }
        let rs = log_space(lo, hi, points);
        let mut xs = Vec::with_capacity(points);
        let mut ys = Vec::with_capacity(points);
        let mut d = Vec::with_capacity(points);
        let mut w = Vec::with_capacity(points);
        for r in rs {
            let s = self.at(r)?;
            if s.u <= 0.0 {
                return None;
            }
            xs.push(r.ln());
            ys.push(s.u.ln());
            d.push(r.powf(self.n as f64 - 2.0) * s.u);
            w.push(s.w);
        }
        let fit = linear_fit(&xs, &ys)?;
        Some(DecayFit {
            exponent: -fit.slope,
            rms: fit.rms,
            d_last: *d.last()?,
            d_trend: spearman_trend(&d),
            w_last: *w.last()?,
            w_trend: spearman_trend(&w),
        })
    }
}

/// Far-field fit over the tail of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub rms: f64,
    /// `r^{n-2} u` at the end of the window and its Spearman trend.
    pub d_last: f64,
    pub d_trend: f64,
    pub w_last: f64,
    pub w_trend: f64,
}

/// `sup_{(0,1]} r^{-sigma} f(r)` sampled on a log grid.
fn origin_constant(spec: &ProblemSpec) -> f64 {
    log_space(1e-12, 1.0, 121)
        .iter()
        .map(|r| r.powf(-spec.sigma) * spec.weight.eval(*r))
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
}

/// Radius at which the origin patch hands over to the ODE solver.
pub fn start_radius(spec: &ProblemSpec, alpha: f64, tol: &Tolerances) -> f64 {
    let c = origin_constant(spec).max(f64::MIN_POSITIVE);
    let r = (tol.ode_abs / (alpha.powf(spec.p) * c)).powf(1.0 / (2.0 + spec.sigma));
    r.clamp(1e-30, 1e-3)
}

/// One Picard step of the integral equation on `[0, r]`: `(u(r), u'(r))`.
pub fn picard_start(
    spec: &ProblemSpec,
    alpha: f64,
    r: f64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let n = spec.n as f64;
    let f = |s: f64| spec.weight.eval(s);
    let ap = alpha.powf(spec.p);
    let i1 = integrate_from_zero(
        |s| (1.0 - (s / r).powf(n - 2.0)) * s * f(s),
        r,
        1.0 + spec.sigma,
        tol.quad_rel,
        0.0,
    )?;
    let i2 = integrate_from_zero(
        |s| s.powf(n - 1.0) * f(s),
        r,
        n - 1.0 + spec.sigma,
        tol.quad_rel,
        0.0,
    )?;
    Ok((
        alpha - ap * i1.value / (n - 2.0),
        -ap * i2.value / r.powf(n - 1.0),
    ))
}

/// Estimate of `r_alpha` from the first Picard iterate: `alpha^{p-1} I(r)/(n-2) = 1/2`.
pub fn r_alpha_estimate(spec: &ProblemSpec, alpha: f64) -> Option<f64> {
    let n = spec.n as f64;
    let g = |r: f64| -> Option<f64> {
        let i = integrate_log_panels(
            |s| (1.0 - (s / r).powf(n - 2.0)) * s * spec.weight.eval(s),
            r,
            1.0 + spec.sigma,
            1e-6,
            0.0,
        )
        .ok()?;
        Some(alpha.powf(spec.p - 1.0) * i.value / (n - 2.0) - 0.5)
    };
    let (mut lo, mut hi) = (-60.0_f64, 60.0_f64);
    if g(hi.exp())? < 0.0 || g(lo.exp())? > 0.0 {
        return None;
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if g(mid.exp())? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

/// Default first horizon for a shot: `max(10^3, 20 r_alpha)`.
pub fn default_horizon(spec: &ProblemSpec, alpha: f64) -> f64 {
    let ra = r_alpha_estimate(spec, alpha).unwrap_or(1.0);
    (20.0 * ra).max(1e3)
}

/// Integrates from the origin to `horizon`, stopping at the first zero.
pub fn integrate(
    spec: &ProblemSpec,
    alpha: f64,
    tol: &Tolerances,
    horizon: f64,
) -> Result<Trajectory> {
    integrate_with(spec, alpha, tol, &IntegrateOptions::to(horizon))
}

pub fn integrate_with(
    spec: &ProblemSpec,
    alpha: f64,
    tol: &Tolerances,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    spec.validate()?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be non-negative, got {alpha}"
        )));
    }
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {}",
            opts.horizon
        )));
    }
    if alpha == 0.0 {
        return Ok(Trajectory::trivial(spec, opts.horizon));
    }
    let ex = spec.exponents();
    let kappa = ex.kappa;
    let r_start = start_radius(spec, alpha, tol);
    if opts.horizon <= r_start {
        return Err(Error::InvalidArgument(format!(
            "horizon {} inside the origin patch",
            opts.horizon
        )));
    }
    let (u0, du0) = picard_start(spec, alpha, r_start, tol)?;
    let w0 = r_start.powf(kappa) * u0;
    let v0 = kappa * w0 + r_start.powf(kappa + 1.0) * du0;
    let t0 = r_start.ln();
    let t_end = opts.horizon.ln();
    let p = spec.p;
    let b_exp = 2.0 - (p - 1.0) * kappa;
    let k2 = kappa * kappa;
    let weight = &spec.weight;

    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let r = t.exp();
        let f = weight.eval(r);
        if !f.is_finite() {
            return Err(Error::WeightEvaluation { r });
        }
        let wp = if y[0] > 0.0 { y[0].powf(p) } else { 0.0 };
        Ok([y[1], k2 * y[0] - r.powf(b_exp) * f * wp])
    };

    let ode_opts = Dop853Options {
        rtol: tol.ode_rel,
        atol: tol.ode_abs,
        h_max: 0.5,
        max_steps: 500_000,
    };
    let mut dense: Vec<DenseStep<2>> = Vec::new();
    let mut crossing: Option<f64> = None;
    let mut underflow_at: Option<f64> = None;
    let continue_past = opts.continue_past_zero;
    let root_abs = tol.root_abs;

    let stats = solve(rhs, t0, [w0, v0], t_end, &ode_opts, |step, y| {
        dense.push(*step);
        if crossing.is_none() && y[0] <= 0.0 {
            crossing = Some(refine_root(step, root_abs));
            if !continue_past {
                return Ok(Control::Stop);
            }
        }
        let t = step.t1();
        if crossing.is_none() && y[0] > 0.0 && (-kappa * t).exp() * y[0] < UNDERFLOW {
            underflow_at = Some(t);
            return Ok(Control::Stop);
        }
        Ok(Control::Continue)
    })?;

    let (termination, t_last) = match (crossing, underflow_at) {
        (Some(r0), _) if !continue_past => (Termination::Crossed, r0.ln()),
        (Some(_), _) => (Termination::Crossed, stats.t),
        (None, Some(t)) => (Termination::Underflow, t),
        (None, None) => (Termination::HorizonReached, stats.t),
    };
    let horizon = t_last.exp();

    let mut traj = Trajectory {
        alpha,
        n: spec.n,
        p,
        kappa,
        samples: Vec::with_capacity(dense.len() + 2),
        events: Events {
            crossing_radius: crossing,
            ..Default::default()
        },
        horizon,
        termination,
        r_start,
        steps_accepted: stats.accepted,
        steps_rejected: stats.rejected,
        u_start: u0,
        t_end: t_last,
        dense,
    };
    traj.samples.push(traj.sample_at(r_start, w0, v0));
    for i in 0..traj.dense.len() {
        let t1 = traj.dense[i].t1().min(t_last);
        if t1 <= traj.dense[i].t0 {
            break;
        }
        let y = traj.dense[i].eval(t1);
        let s = traj.sample_at(t1.exp(), y[0], y[1]);
        traj.samples.push(s);
        if t1 >= t_last {
            break;
        }
    }
    if let (Some(r0), false) = (crossing, continue_past) {
        if let Some(last) = traj.samples.last_mut() {
            last.r = r0;
            last.u = 0.0;
            last.w = 0.0;
        }
    }
    traj.events.r_alpha = detect_r_alpha(&traj, 2.0)?;
    for k in opts.extra_k {
        let r = detect_r_alpha(&traj, *k)?;
        traj.events.r_alpha_k.push(RAlphaK { k: *k, r });
    }
    Ok(traj)
}

/// Bisection on the dense output for the zero of `w` inside `step`.
fn refine_root(step: &DenseStep<2>, root_abs: f64) -> f64 {
    let (mut lo, mut hi) = (step.t0, step.t1());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if step.eval(mid)[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let r = hi.exp();
        if r - lo.exp() <= root_abs.max(4.0 * f64::EPSILON * r) {
            break;
        }
    }
    hi.exp()
}

/// First radius where `u = alpha/k` (`k > 1`).
pub fn detect_r_alpha(traj: &Trajectory, k: f64) -> Result<Option<f64>> {
    if !(k > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level k must exceed 1, got {k}"
        )));
    }
    if traj.alpha == 0.0 {
        return Ok(None);
    }
    let level = traj.alpha / k;
    let idx = match traj.samples.iter().position(|s| s.u <= level) {
        Some(i) if i > 0 => i,
        Some(_) => return Ok(Some(traj.samples[0].r)),
        None => return Ok(None),
    };
    let (mut lo, mut hi) = (traj.samples[idx - 1].r.ln(), traj.samples[idx].r.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let u = traj.at(mid.exp()).map(|s| s.u).unwrap_or(0.0);
        if u > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

/// `u(r) - [alpha - (1/(n-2)) ∫₀ʳ (1-(s/r)^{n-2}) s f(s) (u⁺)^p ds]`.
pub fn residual_integral_equation(
    spec: &ProblemSpec,
    traj: &Trajectory,
    r: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if !(r > 0.0) || r > traj.horizon * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "r = {r} outside (0, {}]",
            traj.horizon
        )));
    }
    let n = spec.n as f64;
    let p = spec.p;
    let u_r = traj.at(r).map(|s| s.u).unwrap_or(0.0);
    if traj.alpha == 0.0 {
        return Ok(u_r);
    }
    let integrand = |s: f64| {
        let u = traj.at(s).map(|v| v.u.max(0.0)).unwrap_or(0.0);
        (1.0 - (s / r).powf(n - 2.0)) * s * spec.weight.eval(s) * u.powf(p)
    };
    let i = integrate_log_panels(integrand, r, 1.0 + spec.sigma, tol.quad_rel, 0.0)?;
    Ok(u_r - (traj.alpha - i.value / (n - 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxCheck {
    /// `r^{n-1} u'(r)` at the horizon.
    pub value: f64,
    /// The same quantity predicted by the fitted far-field decay `u ~ r^{-m}`.
    pub predicted: f64,
    pub pass: bool,
}

/// Compares the flux `r^{n-1} u'` at the horizon with the fitted far field.
pub fn flux_limit_check(traj: &Trajectory) -> Result<FluxCheck> {
    let s = traj
        .at(traj.horizon)
        .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
    let fit = traj
        .decay_fit(1.0, 40)
        .ok_or_else(|| Error::InsufficientData("no positive decade to fit".into()))?;
    let n = traj.n as f64;
    let value = s.r.powf(n - 1.0) * s.du;
    let predicted = -fit.exponent * s.r.powf(n - 2.0) * s.u;
    Ok(FluxCheck {
        value,
        predicted,
        pass: value.abs() <= 10.0 * predicted.abs(),
    })
}
