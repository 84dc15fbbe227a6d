//! Properties shared by the property-test target and the acceptance harness.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use radshoot_core::scan::{sweep, SweepOptions};
use radshoot_core::stats::log_space;
use radshoot_core::{integrate, Label, ProblemSpec, Tolerances, WeightFunction};

pub fn pure_power(n: u32, l: f64, p: f64) -> ProblemSpec {
    ProblemSpec::new(n, l, l, p, WeightFunction::PurePower { l }).unwrap()
}

pub fn example_iii() -> ProblemSpec {
    ProblemSpec::new(
        3,
        -1.0,
        0.0,
        2.5,
        WeightFunction::ExampleIii {
            n: 3,
            l: -1.0,
            p: 2.5,
        },
    )
    .unwrap()
}

/// Positive weights for which `u` must be non-increasing while positive.
pub fn positive_spec() -> impl Strategy<Value = ProblemSpec> {
    let pure = (3u32..=5, -1.5f64..-0.1, 1.2f64..7.0).prop_map(|(n, l, p)| pure_power(n, l, p));
    let product =
        (0.5f64..3.0, 0.5f64..3.0, 0.1f64..1.5, 1.2f64..6.0).prop_map(|(c1, c4, g, p)| {
            let nu = -g - 0.5;
            let w = WeightFunction::ProductPower {
                c1,
                c2: 1.0,
                c3: 1.0,
                c4,
                gamma: g,
                nu,
            };
            ProblemSpec::new(3, -0.5, 0.0, p, w).unwrap()
        });
    prop_oneof![pure, product]
}

pub fn monotonicity(spec: &ProblemSpec, alpha: f64) -> Result<(), TestCaseError> {
    let tol = Tolerances::default();
    let traj = integrate(spec, alpha, &tol, 1e4).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for s in &traj.samples {
        if s.u > 0.0 {
            prop_assert!(s.du <= tol.ode_abs, "u' = {} at r = {}", s.du, s.r);
        }
    }
    Ok(())
}

/// `lambda^{(2+l)/(p-1)} u(lambda r; alpha)` is the shot from `lambda^{(2+l)/(p-1)} alpha`.
pub fn scaling_symmetry(
    n: u32,
    l: f64,
    p: f64,
    alpha: f64,
    lambda: f64,
) -> Result<(), TestCaseError> {
    let spec = pure_power(n, l, p);
    let tol = Tolerances::default();
    let a = (2.0 + l) / (p - 1.0);
    let beta = lambda.powf(a) * alpha;
    let fail = |e: radshoot_core::Error| TestCaseError::fail(e.to_string());
    let base = integrate(&spec, alpha, &tol, 100.0 * lambda.max(1.0)).map_err(fail)?;
    let scaled = integrate(&spec, beta, &tol, 100.0).map_err(fail)?;
    for r in log_space(1e-3, 100.0, 60) {
        let (Some(s), Some(b)) = (scaled.at(r), base.at(lambda * r)) else {
            continue;
        };
        let expect = lambda.powf(a) * b.u;
        prop_assert!(
            (s.u - expect).abs() <= 1e-6 * expect.abs() + 1e-9 * beta,
            "r = {r}: {} vs {expect}",
            s.u
        );
    }
    Ok(())
}

/// Sweeps an Example III grid with one and several workers and checks the reports.
pub fn sweep_determinism_and_soundness(
    lo: f64,
    decades: f64,
    points: usize,
) -> Result<(), TestCaseError> {
    let spec = example_iii();
    let tol = Tolerances::default();
    let grid = log_space(lo, lo * 10f64.powf(decades), points);
    let opts = |jobs| SweepOptions {
        jobs: Some(jobs),
        bisect_rel: 1e-5,
        max_iter: 60,
    };
    let fail = |e: radshoot_core::Error| TestCaseError::fail(e.to_string());
    let one = sweep(&spec, &grid, &tol, &opts(1)).map_err(fail)?;
    let many = sweep(&spec, &grid, &tol, &opts(4)).map_err(fail)?;
    prop_assert_eq!(&one, &many);
    for b in &one.boundaries {
        prop_assert!(b.lo < b.hi);
        prop_assert!(
            b.lo_label != b.hi_label,
            "bracket [{}, {}] has one label",
            b.lo,
            b.hi
        );
        prop_assert!(
            (b.lo_label == Label::Crossing) != (b.hi_label == Label::Crossing) || !b.converged
        );
    }
    Ok(())
}
