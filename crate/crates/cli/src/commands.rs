use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use radshoot_core::pohozaev::{identity_3_3, identity_4_1};
use radshoot_core::scan::{
    example_iii_solution, phi_closed_form, sweep, theorem5_pipeline, SweepOptions,
};
use radshoot_core::shoot::{integrate_with, IntegrateOptions};
use radshoot_core::stats::log_space;
use radshoot_core::weights::{
    build_constructed_f, check_condition_2_1d, check_hypotheses, epsilon_max, SlowDecayCondition,
};
use radshoot_core::{
    integrate, shoot_and_classify, Classification, Error, HypothesisReport, PohozaevReport,
    ProblemSpec, Termination, Tolerances, WeightFunction,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, write_json, write_structure_csv, write_trajectory_csv};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: Option<RunConfig>,
    pub out: PathBuf,
    pub tol_scale: f64,
    pub jobs: Option<usize>,
}

impl Context {
    fn config(&self) -> Result<&RunConfig, CliError> {
        self.config
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs --config".into()))
    }

    fn tolerances(&self) -> Tolerances {
        let base = self
            .config
            .as_ref()
            .map(|c| c.tolerances)
            .unwrap_or_default();
        if self.tol_scale == 1.0 {
            base
        } else {
            base.scaled(self.tol_scale)
        }
    }

    fn spec(&self) -> Result<ProblemSpec, CliError> {
        let spec = self.config()?.problem.clone();
        spec.validate()?;
        Ok(spec)
    }

    fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            jobs: self.jobs,
            ..SweepOptions::default()
        }
    }
}

#[derive(Serialize)]
struct EventsFile {
    alpha: f64,
    termination: Termination,
    horizon: f64,
    r_start: f64,
    steps_accepted: usize,
    steps_rejected: usize,
    crossing_radius: Option<f64>,
    r_alpha: Option<f64>,
}

/// Shoots every configured alpha, writes `classify.json` and one trajectory CSV per alpha.
pub fn classify(ctx: &Context) -> Result<String, CliError> {
    let cfg = ctx.config()?;
    let spec = ctx.spec()?;
    let tol = ctx.tolerances();
    let mut results: Vec<Classification> = Vec::new();
    let mut text = String::new();
    for (i, &alpha) in cfg.alpha_values()?.iter().enumerate() {
        let (traj, c) = match cfg.horizon {
            Some(h) => {
                let traj = integrate(&spec, alpha, &tol, h)?;
                let c = radshoot_core::classify(&spec, &traj, &tol);
                (traj, c)
            }
            None => shoot_and_classify(&spec, alpha, &tol)?,
        };
        let stem = format!("trajectory_{i:03}");
        write_trajectory_csv(&ctx.out.join(format!("{stem}.csv")), &traj)?;
        let events = EventsFile {
            alpha,
            termination: traj.termination,
            horizon: traj.horizon,
            r_start: traj.r_start,
            steps_accepted: traj.steps_accepted,
            steps_rejected: traj.steps_rejected,
            crossing_radius: traj.events.crossing_radius,
            r_alpha: traj.events.r_alpha,
        };
        write_json(&ctx.out, &format!("{stem}.events.json"), &events)?;
        let _ = writeln!(
            text,
            "{}\t{}\t{}",
            num(alpha),
            c.label.as_str(),
            method_name(&c)
        );
        results.push(c);
    }
    write_json(&ctx.out, "classify.json", &results)?;
    Ok(text)
}

fn method_name(c: &Classification) -> String {
    serde_json::to_value(c.method)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Sweeps the alpha grid, or runs the full construction pipeline when the config has a
/// `construction` block.
pub fn scan(ctx: &Context) -> Result<String, CliError> {
    let cfg = ctx.config()?;
    let tol = ctx.tolerances();
    let mut text = String::new();
    let structure = if let Some(c) = &cfg.construction {
        cfg.problem.validate()?;
        let outcome = theorem5_pipeline(c, &cfg.problem, &tol, &ctx.sweep_options())?;
        write_json(&ctx.out, "pipeline.json", &outcome)?;
        for e in &outcome.log {
            let _ = writeln!(
                text,
                "{}\t{}\t{}",
                if e.passed { "ok" } else { "no" },
                e.name,
                e.detail
            );
        }
        outcome.structure
    } else {
        let spec = ctx.spec()?;
        sweep(&spec, &cfg.sweep_values()?, &tol, &ctx.sweep_options())?
    };
    write_json(&ctx.out, "structure.json", &structure)?;
    write_structure_csv(&ctx.out.join("structure.csv"), &structure)?;
    let _ = writeln!(text, "pattern\t{}", structure.pattern);
    for b in &structure.boundaries {
        let _ = writeln!(
            text,
            "boundary\t{}\t{}\t{}->{}",
            num(b.lo),
            num(b.hi),
            b.lo_label.as_str(),
            b.hi_label.as_str()
        );
    }
    for a in &structure.rapid_alphas {
        let _ = writeln!(text, "rapid\t{}", num(*a));
    }
    Ok(text)
}

#[derive(Serialize)]
struct PohozaevRow {
    alpha: f64,
    identity: &'static str,
    report: PohozaevReport,
    relative_residual: f64,
}

/// Evaluates both energy identities at each configured radius.
pub fn pohozaev(ctx: &Context) -> Result<String, CliError> {
    let cfg = ctx.config()?;
    let spec = ctx.spec()?;
    let tol = ctx.tolerances();
    let radii = cfg.radii.clone().unwrap_or_else(|| vec![1.0, 10.0, 100.0]);
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let horizon = cfg.horizon.unwrap_or(r_max).max(r_max);
    let mut rows = Vec::new();
    let mut text = String::from("alpha\tidentity\tR\tlhs\trhs\trelative_residual\n");
    for alpha in cfg.alpha_values()? {
        let opts = IntegrateOptions {
            continue_past_zero: true,
            ..IntegrateOptions::to(horizon)
        };
        let traj = integrate_with(&spec, alpha, &tol, &opts)?;
        for &r in &radii {
            for (name, report) in [
                ("3.3", identity_3_3(&spec, &traj, r, &tol)?),
                ("4.1", identity_4_1(&spec, &traj, r, &tol)?),
            ] {
                let rel = report.relative_residual();
                let _ = writeln!(
                    text,
                    "{}\t{}\t{}\t{}\t{}\t{:.3e}",
                    num(alpha),
                    name,
                    num(r),
                    num(report.lhs),
                    num(report.rhs),
                    rel
                );
                rows.push(PohozaevRow {
                    alpha,
                    identity: name,
                    report,
                    relative_residual: rel,
                });
            }
        }
    }
    write_json(&ctx.out, "pohozaev.json", &rows)?;
    Ok(text)
}

/// Checks the weight hypotheses for the configured problem.
pub fn hypotheses(ctx: &Context) -> Result<String, CliError> {
    let spec = ctx.spec()?;
    let report = check_hypotheses(&spec.weight, &spec);
    write_json(&ctx.out, "hypotheses.json", &report)?;
    Ok(hypothesis_table(&report))
}

fn hypothesis_table(report: &HypothesisReport) -> String {
    let mut text = String::new();
    for c in &report.checks {
        let status = serde_json::to_value(c.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let witness = c.witness.map(num).unwrap_or_default();
        let _ = writeln!(text, "{}\t{}\t{}\t{}", c.id, status, witness, c.note);
    }
    text
}

#[derive(Serialize)]
struct Construction {
    weight: WeightFunction,
    epsilon: f64,
    epsilon_max: f64,
    condition: SlowDecayCondition,
    hypotheses: HypothesisReport,
}

/// Validates the bump, builds the constructed weight and writes it with a sampled profile.
pub fn construct(ctx: &Context) -> Result<String, CliError> {
    let cfg = ctx.config()?;
    let c = cfg
        .construction
        .as_ref()
        .ok_or_else(|| CliError::Config("construct needs a construction block".into()))?;
    cfg.problem.validate()?;
    let spec = ProblemSpec {
        sigma: cfg.problem.l,
        p: cfg.problem.p_star(),
        ..cfg.problem.clone()
    };
    c.bump.validate(spec.n, spec.l)?;
    let condition = check_condition_2_1d(&c.bump, c.alpha_star, c.r_star, c.delta, &spec)?;
    if !condition.holds {
        return Err(Error::Validation {
            clause: "(2.1d)".into(),
            detail: format!(
                "value {} is not below -delta^2 = {}",
                condition.value, condition.threshold
            ),
        }
        .into());
    }
    let weight = build_constructed_f(&c.bump, c.epsilon, &spec)?;
    let spec = spec.with_weight(weight.clone());
    let hypotheses = check_hypotheses(&weight, &spec);
    let out = Construction {
        weight,
        epsilon: c.epsilon,
        epsilon_max: epsilon_max(&c.bump, spec.n, spec.l),
        condition,
        hypotheses,
    };
    write_json(&ctx.out, "construct.json", &out)?;

    std::fs::create_dir_all(&ctx.out)?;
    let mut w = csv::Writer::from_path(ctx.out.join("construct_profile.csv"))?;
    w.write_record(["r", "f", "h", "k"])?;
    for r in log_space(1e-3, 1e3, 601) {
        w.write_record([
            num(r),
            num(spec.weight.eval(r)),
            num(spec.weight.h(r, spec.l)),
            num(c.bump.eval(r)),
        ])?;
    }
    w.flush()?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "epsilon\t{}\tepsilon_max\t{}",
        num(out.epsilon),
        num(out.epsilon_max)
    );
    let _ = writeln!(
        text,
        "condition\t{}\tthreshold\t{}",
        num(out.condition.value),
        num(out.condition.threshold)
    );
    text.push_str(&hypothesis_table(&out.hypotheses));
    Ok(text)
}

#[derive(Serialize)]
struct OracleRow {
    case: &'static str,
    alpha: f64,
    max_relative_error: f64,
    r_max: f64,
    steps: usize,
}

#[derive(Serialize)]
struct OracleReport {
    rows: Vec<OracleRow>,
    max_relative_error: f64,
    tolerance: f64,
    pass: bool,
}

const ORACLE_TOLERANCE: f64 = 1e-6;

fn oracle_error(
    spec: &ProblemSpec,
    alpha: f64,
    tol: &Tolerances,
    exact: impl Fn(f64) -> f64,
) -> Result<(f64, usize), CliError> {
    let traj = integrate_with(spec, alpha, tol, &IntegrateOptions::to(1e3))?;
    let mut worst: f64 = 0.0;
    let points = traj
        .samples
        .iter()
        .map(|s| s.r)
        .chain(log_space(1e-6, 1e3, 400));
    for r in points {
        if let Some(s) = traj.at(r) {
            let e = exact(r);
            worst = worst.max((s.u - e).abs() / e.abs());
        }
    }
    Ok((worst, traj.steps_accepted))
}

/// Compares the integrator with the two closed-form solutions on `[0, 1000]`.
pub fn oracle(ctx: &Context) -> Result<String, CliError> {
    let tol = ctx.tolerances();
    let phi = ProblemSpec::new(3, -0.5, -0.5, 4.0, WeightFunction::PurePower { l: -0.5 })?;
    let ex3 = ProblemSpec::new(
        3,
        -1.0,
        0.0,
        2.5,
        WeightFunction::ExampleIii {
            n: 3,
            l: -1.0,
            p: 2.5,
        },
    )?;
    let mut rows = Vec::new();
    let mut text = String::from("case\talpha\tmax_relative_error\tsteps\tseconds\n");
    let mut record = |case: &'static str,
                      alpha: f64,
                      res: (f64, usize),
                      secs: f64,
                      rows: &mut Vec<OracleRow>| {
        let _ = writeln!(text, "{case}\t{alpha}\t{:.3e}\t{}\t{secs:.4}", res.0, res.1);
        rows.push(OracleRow {
            case,
            alpha,
            max_relative_error: res.0,
            r_max: 1e3,
            steps: res.1,
        });
    };
    for alpha in [0.5, 1.0, 2.0] {
        let t = Instant::now();
        let res = oracle_error(&phi, alpha, &tol, |r| {
            phi_closed_form(&phi, alpha, r).unwrap_or(f64::NAN)
        })?;
        record("explicit", alpha, res, t.elapsed().as_secs_f64(), &mut rows);
    }
    let t = Instant::now();
    let res = oracle_error(&ex3, 1.0, &tol, |r| {
        example_iii_solution(3, -1.0, 2.5, r).unwrap_or(f64::NAN)
    })?;
    record(
        "example_iii",
        1.0,
        res,
        t.elapsed().as_secs_f64(),
        &mut rows,
    );

    let worst = rows
        .iter()
        .map(|r| r.max_relative_error)
        .fold(0.0, f64::max);
    let report = OracleReport {
        rows,
        max_relative_error: worst,
        tolerance: ORACLE_TOLERANCE,
        pass: worst <= ORACLE_TOLERANCE,
    };
    write_json(&ctx.out, "oracle.json", &report)?;
    let _ = writeln!(text, "max\t{:.3e}", worst);
    if !report.pass {
        return Err(CliError::OracleMismatch(worst));
    }
    Ok(text)
}
