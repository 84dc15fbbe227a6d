//! Explicit solutions, alpha sweeps and the structure pipelines built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_alpha, Classification, Label};
use crate::error::{Error, Result};
use crate::model::{critical_exponent, ProblemSpec, Tolerances};
use crate::quad::integrate_log_panels_split;
use crate::shoot::{default_horizon, integrate};
use crate::stats::{linear_fit, log_space};
use crate::weights::{
    build_constructed_f, check_condition_2_1d, check_hypotheses, BumpFunction, HypothesisReport,
    SlowDecayCondition, WeightFunction,
};

/// `alpha {1 + 2 alpha^{p*-1} r^{2+l} / ((p*+1)(n-2)^2)}^{-2/(p*-1)}`, the explicit solution for `f = r^l` at `p = p*`.
pub fn phi_closed_form_raw(n: u32, l: f64, alpha: f64, r: f64) -> f64 {
    let ps = critical_exponent(n, l);
    let nm2 = n as f64 - 2.0;
    let c = 2.0 * alpha.powf(ps - 1.0) / ((ps + 1.0) * nm2 * nm2);
    alpha * (1.0 + c * r.powf(2.0 + l)).powf(-2.0 / (ps - 1.0))
}

/// The explicit solution, checked against the problem: pure power weight at the critical exponent.
pub fn phi_closed_form(spec: &ProblemSpec, alpha: f64, r: f64) -> Result<f64> {
    match spec.weight {
        WeightFunction::PurePower { l } if l == spec.l && spec.is_critical() => {
            Ok(phi_closed_form_raw(spec.n, spec.l, alpha, r))
        }
        _ => Err(Error::InvalidArgument(
            "explicit solution needs f = r^l and p = p*".into(),
        )),
    }
}

/// `(1 + r^2)^{-(l+2)/(2(p-1))}` for `(n+l)/(n-2) < p < p*`.
pub fn example_iii_solution(n: u32, l: f64, p: f64, r: f64) -> Result<f64> {
    let lo = (n as f64 + l) / (n as f64 - 2.0);
    let hi = critical_exponent(n, l);
    if !(p > lo && p < hi) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} outside ({lo}, {hi})"
        )));
    }
    Ok((1.0 + r * r).powf(-(l + 2.0) / (2.0 * (p - 1.0))))
}

/// Value of `r` where the explicit solution drops to `alpha/k`.
pub fn phi_r_alpha(n: u32, l: f64, alpha: f64, k: f64) -> f64 {
    let ps = critical_exponent(n, l);
    let nm2 = n as f64 - 2.0;
    let c = 2.0 / ((ps + 1.0) * nm2 * nm2);
    ((k.powf((ps - 1.0) / 2.0) - 1.0) / (c * alpha.powf(ps - 1.0))).powf(1.0 / (2.0 + l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Bisection stops once the bracket is narrower than `bisect_rel * alpha`.
    pub bisect_rel: f64,
    pub max_iter: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            jobs: None,
            bisect_rel: 1e-6,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub lo: f64,
    pub hi: f64,
    pub lo_label: Label,
    pub hi_label: Label,
    pub iterations: usize,
    pub converged: bool,
    /// Midpoint of the final bracket when it separates crossing from non-crossing shots.
    pub rapid_candidate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub grid: Vec<Classification>,
    pub boundaries: Vec<Boundary>,
    pub rapid_alphas: Vec<f64>,
    /// Run-length pattern of grid labels, e.g. `C|S|C`.
    pub pattern: String,
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub fn pattern_of(labels: &[Label]) -> String {
    let mut out: Vec<char> = Vec::new();
    for l in labels {
        if out.last() != Some(&l.letter()) {
            out.push(l.letter());
        }
    }
    out.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

/// Classifies every grid point, then refines each label change by bisection.
pub fn sweep(
    spec: &ProblemSpec,
    grid: &[f64],
    tol: &Tolerances,
    opts: &SweepOptions,
) -> Result<StructureReport> {
    spec.validate()?;
    if grid.len() < 8 {
        return Err(Error::validation(
            "grid",
            format!("a sweep needs at least 8 points, got {}", grid.len()),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] <= 0.0 {
        return Err(Error::validation(
            "grid",
            "alpha grid must be positive and strictly increasing",
        ));
    }
    with_pool(opts.jobs, || sweep_inner(spec, grid, tol, opts))?
}

fn sweep_inner(
    spec: &ProblemSpec,
    grid: &[f64],
    tol: &Tolerances,
    opts: &SweepOptions,
) -> Result<StructureReport> {
    let classes: Vec<Classification> = grid
        .par_iter()
        .map(|a| classify_alpha(spec, *a, tol))
        .collect::<Result<Vec<_>>>()?;

    let determined: Vec<&Classification> = classes
        .iter()
        .filter(|c| c.label != Label::Undetermined)
        .collect();
    let brackets: Vec<(f64, f64, Label, Label)> = determined
        .windows(2)
        .filter(|w| w[0].label != w[1].label)
        .map(|w| (w[0].alpha, w[1].alpha, w[0].label, w[1].label))
        .collect();

    let boundaries = brackets
        .par_iter()
        .map(|(lo, hi, ll, hl)| refine_boundary(spec, *lo, *hi, *ll, *hl, tol, opts))
        .collect::<Result<Vec<_>>>()?;
    let rapid_alphas = boundaries
        .iter()
        .filter_map(|b| b.rapid_candidate)
        .collect();
    let labels: Vec<Label> = classes.iter().map(|c| c.label).collect();
    Ok(StructureReport {
        pattern: pattern_of(&labels),
        grid: classes,
        boundaries,
        rapid_alphas,
    })
}

fn refine_boundary(
    spec: &ProblemSpec,
    mut lo: f64,
    mut hi: f64,
    mut lo_label: Label,
    mut hi_label: Label,
    tol: &Tolerances,
    opts: &SweepOptions,
) -> Result<Boundary> {
    let crossing_split = lo_label == Label::Crossing || hi_label == Label::Crossing;
    let lo_side_crossing = lo_label == Label::Crossing;
    let target = lo_label;
    let mut iterations = 0;
    while iterations < opts.max_iter && hi - lo >= opts.bisect_rel * lo {
        let mid = (lo * hi).sqrt();
        let c = classify_alpha(spec, mid, tol)?;
        let on_lo_side = if crossing_split {
            (c.label == Label::Crossing) == lo_side_crossing
        } else {
            c.label == target
        };
        if on_lo_side {
            lo = mid;
            lo_label = c.label;
        } else {
            hi = mid;
            hi_label = c.label;
        }
        iterations += 1;
    }
    let converged = hi - lo < opts.bisect_rel * lo;
    let separates =
        crossing_split && (lo_label == Label::Crossing) != (hi_label == Label::Crossing);
    let non_crossing = if lo_label == Label::Crossing {
        hi_label
    } else {
        lo_label
    };
    let rapid_candidate = (separates
        && matches!(
            non_crossing,
            Label::SlowDecay | Label::RapidDecay | Label::Undetermined
        ))
    .then_some(0.5 * (lo + hi));
    Ok(Boundary {
        lo,
        hi,
        lo_label,
        hi_label,
        iterations,
        converged,
        rapid_candidate,
    })
}

/// Inputs of the constructed multiple-structure example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem5Config {
    pub bump: BumpFunction,
    pub epsilon: f64,
    pub alpha_star: f64,
    pub delta: f64,
    pub r_star: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem5Outcome {
    pub weight: WeightFunction,
    pub epsilon_max: f64,
    pub condition: SlowDecayCondition,
    pub hypotheses: HypothesisReport,
    pub alpha_star: Classification,
    pub structure: StructureReport,
    pub log: Vec<ConditionEntry>,
    pub all_passed: bool,
}

fn entry(
    name: &str,
    passed: bool,
    value: Option<f64>,
    detail: impl Into<String>,
) -> ConditionEntry {
    ConditionEntry {
        name: name.into(),
        passed,
        value,
        detail: detail.into(),
    }
}

/// Builds the constructed weight, verifies its hypotheses and sweeps alpha around `alpha_star`.
pub fn theorem5_pipeline(
    cfg: &Theorem5Config,
    base: &ProblemSpec,
    tol: &Tolerances,
    opts: &SweepOptions,
) -> Result<Theorem5Outcome> {
    let spec = ProblemSpec {
        sigma: base.l,
        p: base.p_star(),
        ..base.clone()
    };
    cfg.bump.validate(spec.n, spec.l)?;
    let condition = check_condition_2_1d(&cfg.bump, cfg.alpha_star, cfg.r_star, cfg.delta, &spec)?;
    if !condition.holds {
        return Err(Error::validation(
            "(2.1d)",
            format!(
                "value {} is not below -delta^2 = {}",
                condition.value, condition.threshold
            ),
        ));
    }
    let weight = build_constructed_f(&cfg.bump, cfg.epsilon, &spec)?;
    let spec = spec.with_weight(weight.clone());
    let epsilon_max = crate::weights::epsilon_max(&cfg.bump, spec.n, spec.l);
    let hypotheses = check_hypotheses(&weight, &spec);
    let mut log = vec![
        entry("(2.1a)-(2.1e)", true, None, "bump validated"),
        entry(
            "(2.1d)",
            true,
            Some(condition.value),
            format!("threshold {}", condition.threshold),
        ),
        entry(
            "epsilon < epsilon_max",
            true,
            Some(cfg.epsilon),
            format!("epsilon_max = {epsilon_max}"),
        ),
    ];
    let gate: Vec<&str> = ["f4", "f6", "f7", "f9"]
        .into_iter()
        .filter(|id| !hypotheses.holds(id))
        .collect();
    for id in ["f4", "f6", "f7", "f9"] {
        let c = hypotheses.checks.iter().find(|c| c.id == id);
        log.push(entry(
            id,
            hypotheses.holds(id),
            c.and_then(|c| c.witness),
            c.map(|c| c.note.clone()).unwrap_or_default(),
        ));
    }
    if !gate.is_empty() {
        return Err(Error::HypothesisGate(format!(
            "constructed weight fails {}",
            gate.join(", ")
        )));
    }
    if let Some(g) = hypotheses.fitted.gamma_h {
        log.push(entry(
            "gamma < gamma*",
            g < hypotheses.gamma_star,
            Some(g),
            format!("gamma* = {} (reported only)", hypotheses.gamma_star),
        ));
    }

    let grid = log_space(cfg.alpha_min, cfg.alpha_max, cfg.points);
    let structure = sweep(&spec, &grid, tol, opts)?;
    let alpha_star = classify_alpha(&spec, cfg.alpha_star, tol)?;

    let first = structure.grid.first().map(|c| c.label);
    let last = structure.grid.last().map(|c| c.label);
    log.push(entry(
        "crossing at smallest alpha",
        first == Some(Label::Crossing),
        Some(cfg.alpha_min),
        "",
    ));
    log.push(entry(
        "crossing at largest alpha",
        last == Some(Label::Crossing),
        Some(cfg.alpha_max),
        "",
    ));
    log.push(entry(
        "alpha* decays slowly",
        alpha_star.label == Label::SlowDecay,
        alpha_star.energy,
        alpha_star.label.as_str(),
    ));
    log.push(entry(
        "at least two rapid-decay candidates",
        structure.rapid_alphas.len() >= 2,
        Some(structure.rapid_alphas.len() as f64),
        format!("{:?}", structure.rapid_alphas),
    ));
    let all_passed = log.iter().all(|e| e.passed || e.name == "gamma < gamma*");
    Ok(Theorem5Outcome {
        weight,
        epsilon_max,
        condition,
        hypotheses,
        alpha_star,
        structure,
        log,
        all_passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallAlphaSample {
    pub alpha: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallAlphaReport {
    /// Hypotheses the small-alpha argument rests on ("f1-f4" or "f3-f5").
    pub hypothesis_set: String,
    pub hypotheses: HypothesisReport,
    pub beta: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub r1: f64,
    pub r2: f64,
    /// Radius `r_alpha` must exceed for the small-alpha argument.
    pub r_required: f64,
    /// Fitted `ln r_alpha = intercept + slope ln alpha` for small alpha.
    pub slope: f64,
    pub intercept: f64,
    pub alpha0: f64,
    pub samples: Vec<SmallAlphaSample>,
    pub all_non_crossing: bool,
}

/// Derives the small-alpha threshold `alpha0` and shoots below it.
pub fn theorem1_2_smallalpha_check(
    spec: &ProblemSpec,
    tol: &Tolerances,
) -> Result<SmallAlphaReport> {
    let hyp = check_hypotheses(&spec.weight, spec);
    let n = spec.n as f64;
    let l = spec.l;
    let p = spec.p;
    let supercritical = p >= spec.p_star() * (1.0 - crate::model::CRITICAL_REL_TOL);
    let beta = hyp.fitted.beta.unwrap_or(f64::NAN);
    let thm1 = supercritical && hyp.holds("f3") && hyp.holds("f4") && beta > 0.0 && beta < n + l;
    let thm2 = supercritical && hyp.holds("f3") && hyp.holds("f4") && hyp.holds("f5");
    if !(thm1 || thm2) {
        return Err(Error::HypothesisGate(format!(
            "need p >= p*, (f3), (f4) and either beta < n+l or (f5); got {:?}",
            hyp.checks
                .iter()
                .map(|c| (c.id.clone(), c.status))
                .collect::<Vec<_>>()
        )));
    }
    let delta1 = hyp.fitted.delta1.unwrap_or(0.0);
    let r2 = hyp.fitted.r2.unwrap_or(0.0);
    let r1 = hyp.fitted.r1.unwrap_or(0.0);
    let delta2 = if r1 > 0.0 {
        integrate_log_panels_split(
            |s| spec.weight.h(s, l).abs() * s.powf(n + l - 1.0),
            r1,
            (n + l - 2.0).max(-0.5),
            tol.quad_rel,
            0.0,
            &spec.weight.breakpoints(),
        )?
        .value
    } else {
        0.0
    };
    let r_required = if thm1 {
        let e = n + l - beta;
        let kc = 2f64.powf(-(p + 1.0)) / e * (1.0 - 2f64.powf(-e));
        (delta2 / (kc * delta1))
            .powf(1.0 / e)
            .max(2.0 * r1)
            .max(2.0 * r2)
    } else {
        // H stays negative beyond this radius
        let radii = log_space(1e-3, 1e6, 181);
        let mut last_nonneg = 1e-3;
        for r in &radii {
            let h = crate::weights::eval_big_h(&spec.weight, *r, spec.n, l, tol.quad_rel)?.value;
            if h >= 0.0 {
                last_nonneg = *r;
            }
        }
        (2.0 * last_nonneg).max(2.0 * r1).max(2.0 * r2)
    };

    let fit_alphas = log_space(1e-3, 1e-1, 11);
    let radii = fit_alphas
        .par_iter()
        .map(|a| {
            integrate(spec, *a, tol, default_horizon(spec, *a))
                .map(|t| t.events.r_alpha.map(|r| (a.ln(), r.ln())))
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = radii.into_iter().flatten().collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let fit = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::InsufficientData("no r_alpha values for the scaling fit".into()))?;
    if fit.slope >= 0.0 {
        return Err(Error::InsufficientData(format!(
            "r_alpha does not shrink with alpha (slope {})",
            fit.slope
        )));
    }
    let alpha0 = ((r_required.ln() - fit.intercept) / fit.slope).exp();

    let sample_alphas = [alpha0, alpha0 / 10.0, alpha0 / 100.0];
    let samples = sample_alphas
        .par_iter()
        .map(|a| {
            classify_alpha(spec, *a, tol).map(|c| SmallAlphaSample {
                alpha: *a,
                label: c.label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_non_crossing = samples.iter().all(|s| s.label != Label::Crossing);
    Ok(SmallAlphaReport {
        hypothesis_set: if thm1 { "f1-f4".into() } else { "f3-f5".into() },
        hypotheses: hyp,
        beta,
        delta1,
        delta2,
        r1,
        r2,
        r_required,
        slope: fit.slope,
        intercept: fit.intercept,
        alpha0,
        samples,
        all_non_crossing,
    })
}
