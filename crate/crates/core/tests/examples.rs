//! Worked examples per module, checked against oracles computed here.

mod common;

use approx::assert_relative_eq;
use common::{example_iii, pure_power};
use radshoot_core::classify::{
    apriori_bound_check, fit_r_alpha_scaling, r_alpha_k, shoot_and_classify,
};
use radshoot_core::pohozaev::{lemma_4_1_growth, limit_sequence_probe};
use radshoot_core::scan::{
    example_iii_solution, phi_closed_form_raw, sweep, theorem1_2_smallalpha_check,
    theorem5_pipeline, SweepOptions, Theorem5Config,
};
use radshoot_core::shoot::{detect_r_alpha, flux_limit_check, residual_integral_equation};
use radshoot_core::weights::{
    build_constructed_f, check_condition_2_1d, check_hypotheses, epsilon_max, eval_big_h, Status,
};
use radshoot_core::{
    classify_alpha, critical_exponent, gamma_star, identity_3_3, identity_4_1, integrate,
    BumpFunction, Error, Label, ProblemSpec, Tolerances, WeightFunction,
};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn bump() -> BumpFunction {
    BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.2, -3.0, 3.5]).unwrap()
}

fn constructed_spec(eps: f64) -> ProblemSpec {
    let base = pure_power(3, -0.5, 4.0);
    let w = build_constructed_f(&bump(), eps, &base).unwrap();
    base.with_weight(w)
}

fn shifted_quarter() -> ProblemSpec {
    let w = WeightFunction::ShiftedPower {
        a: 1.0,
        b: 1.0,
        mu: -0.25,
        nu: -0.25,
    };
    ProblemSpec::new(3, -0.5, 0.0, 4.0, w).unwrap()
}

fn shifted_nine_eighths() -> ProblemSpec {
    let w = WeightFunction::ShiftedPower {
        a: 9.0 / 8.0,
        b: 1.0,
        mu: -0.75,
        nu: -1.0,
    };
    ProblemSpec::new(3, -1.5, 0.0, 2.0, w).unwrap()
}

// exponents

#[test]
fn critical_exponent_values() {
    assert_relative_eq!(critical_exponent(3, -0.5), 4.0);
    assert_relative_eq!(critical_exponent(3, -1.5), 2.0);
    assert_relative_eq!(critical_exponent(3, 0.0), 5.0);
}

#[test]
fn gamma_star_values() {
    assert_relative_eq!(gamma_star(3, -0.5, 0.0), 5.0 / 6.0);
    assert_eq!(gamma_star(3, -0.5, -0.5), 0.0);
    assert_relative_eq!(gamma_star(3, -1.0, 1.0), 4.0);
}

#[test]
fn invalid_specs_are_rejected() {
    let w = WeightFunction::PurePower { l: -0.5 };
    assert!(matches!(
        ProblemSpec::new(2, -0.5, -0.5, 4.0, w.clone()),
        Err(Error::InvalidSpec(_))
    ));
    assert!(ProblemSpec::new(3, -2.5, -0.5, 4.0, w.clone()).is_err());
    assert!(ProblemSpec::new(3, -0.5, -0.5, 1.0, w).is_err());
}

// weights

#[test]
fn weight_values() {
    assert_relative_eq!(WeightFunction::PurePower { l: -0.5 }.eval(4.0), 0.5);
    let f = WeightFunction::ExampleIii {
        n: 3,
        l: -1.0,
        p: 2.5,
    };
    assert_relative_eq!(f.eval(1e-12), 2.0, max_relative = 1e-10);
}

#[test]
fn constructed_with_zero_epsilon_is_pure_power() {
    let spec = constructed_spec(0.0);
    for r in [1e-3, 0.5, 1.5, 2.5, 10.0, 1e3] {
        assert_relative_eq!(spec.weight.eval(r), r.powf(-0.5), max_relative = 1e-13);
        assert_eq!(spec.weight.h(r, -0.5), 0.0);
    }
}

#[test]
fn h_of_pure_power_and_constructed() {
    let pp = WeightFunction::PurePower { l: -0.5 };
    let scaled = WeightFunction::Scaled {
        factor: 3.0,
        base: Box::new(pp.clone()),
    };
    let spec = constructed_spec(0.2);
    let k = bump();
    for r in [0.3, 1.2, 2.0, 2.7, 3.0, 4.0, 50.0] {
        assert_eq!(pp.h(r, -0.5), 0.0);
        assert_eq!(scaled.h(r, -0.5), 0.0);
        let expect = 0.2 * 5.0 * r.powf(-1.5) * k.eval(r);
        assert_relative_eq!(
            spec.weight.h(r, -0.5),
            expect,
            max_relative = 1e-12,
            epsilon = 1e-300
        );
        if r >= 3.0 {
            assert_eq!(spec.weight.h(r, -0.5), 0.0);
        }
    }
}

#[test]
fn big_h_examples() {
    let pp = WeightFunction::PurePower { l: -0.5 };
    assert_eq!(eval_big_h(&pp, 10.0, 3, -0.5, 1e-10).unwrap().value, 0.0);

    let spec = constructed_spec(0.2);
    let k = bump();
    for big_r in [0.5, 1.0, 1.7, 2.0, 2.4, 2.9967, 3.0, 5.0] {
        let oracle = 0.2 * 5.0 * simpson(|s| k.eval(s), 0.0, big_r, 20_000);
        let h = eval_big_h(&spec.weight, big_r, 3, -0.5, 1e-10)
            .unwrap()
            .value;
        assert_relative_eq!(h, oracle, max_relative = 1e-8, epsilon = 1e-12);
    }
    assert!(eval_big_h(&spec.weight, 3.0, 3, -0.5, 1e-10).unwrap().value > 0.0);

    let s = shifted_nine_eighths();
    for big_r in [0.1, 1.0, 10.0] {
        assert!(eval_big_h(&s.weight, big_r, 3, -1.5, 1e-10).unwrap().value > 0.0);
    }
}

#[test]
fn hypotheses_of_examples() {
    let w = WeightFunction::ProductPower {
        c1: 2.0,
        c2: 1.0,
        c3: 1.0,
        c4: 2.0,
        gamma: 1.0,
        nu: -1.5,
    };
    let rep = check_hypotheses(&w, &ProblemSpec::new(3, -0.5, 0.0, 4.0, w.clone()).unwrap());
    for id in ["f1", "f2", "f3", "f4"] {
        assert_eq!(rep.status(id), Status::Holds, "{id}");
    }

    let s = shifted_quarter();
    let rep = check_hypotheses(&s.weight, &s);
    assert_relative_eq!(rep.fitted.l_fit.unwrap(), -0.5, epsilon = 0.02);
    let beta = rep.fitted.beta.unwrap();
    // the window [r2, 1e4] carries an O(r^{-1/2}) bias
    assert_relative_eq!(beta, 0.5, epsilon = 0.05);
    assert!(beta < 3.0 - 0.5);

    let pp = pure_power(3, -0.5, 4.0);
    let rep = check_hypotheses(&pp.weight, &pp);
    assert_eq!(rep.status("f5"), Status::Fails);
    assert_eq!(rep.status("f7"), Status::Fails);
}

#[test]
fn epsilon_max_matches_grid_minimum() {
    let k = bump();
    // f > 0 iff 1 + eps (p*+1) ∫₀ʳ s^{-(n+l)} k(s) ds > 0; with s = t² the integrand 2 t^{-4} k(t²) is smooth
    let g = |t: f64| {
        if t == 0.0 {
            0.0
        } else {
            2.0 * k.eval(t * t) / t.powi(4)
        }
    };
    let top = 3f64.sqrt();
    let mut lowest: f64 = 0.0;
    let mut acc = 0.0;
    let mut prev = 0.0;
    for i in 1..=3000 {
        let t = top * i as f64 / 3000.0;
        acc += simpson(g, prev, t, 20);
        prev = t;
        lowest = lowest.min(acc);
    }
    let oracle = -1.0 / (5.0 * lowest);
    assert_relative_eq!(epsilon_max(&k, 3, -0.5), oracle, max_relative = 1e-4);
    let base = pure_power(3, -0.5, 4.0);
    assert!(build_constructed_f(&k, 0.99 * oracle, &base).is_ok());
    assert!(build_constructed_f(&k, 1.01 * oracle, &base).is_err());
}

#[test]
fn slow_decay_condition_examples() {
    let spec = pure_power(3, -0.5, 4.0);
    // deep well: ∫ₐᵇk = -10 (∫₀ᵃk + ∫ᵇᶜk)
    let base = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [1.0, -1.0, 1.0]).unwrap();
    let pos = base.integral(0.0, 1.0) + base.integral(2.0, 3.0);
    let neg = base.integral(1.0, 2.0);
    let scale = 10.0 * pos / neg.abs();
    let deep = BumpFunction::new([1.0, 2.0, 3.0], 2.0, [1.0, -scale, 1.0]).unwrap();
    assert_relative_eq!(deep.integral(1.0, 2.0), -10.0 * pos, max_relative = 1e-12);
    assert!(
        check_condition_2_1d(&deep, 1.0, 2.25, 0.1, &spec)
            .unwrap()
            .holds
    );
    assert!(
        !check_condition_2_1d(&deep, 1e-12, 2.25, 0.1, &spec)
            .unwrap()
            .holds
    );
    assert!(BumpFunction::new([1.0, 2.0, 3.0], 2.0, [0.0, 0.0, 0.0])
        .unwrap()
        .validate(3, -0.5)
        .is_err());
}

// shoot

#[test]
fn explicit_solution_values() {
    assert_eq!(phi_closed_form_raw(3, -0.5, 1.0, 0.0), 1.0);
    assert_relative_eq!(
        phi_closed_form_raw(3, -0.5, 1.0, 1.0),
        (7.0f64 / 5.0).powf(-2.0 / 3.0),
        max_relative = 1e-15
    );
    // r phi -> c^{-2/3} / alpha with c = 2/5
    let alpha = 2.0;
    let r = 1e9;
    assert_relative_eq!(
        r * phi_closed_form_raw(3, -0.5, alpha, r),
        0.4f64.powf(-2.0 / 3.0) / alpha,
        max_relative = 1e-5
    );
}

#[test]
fn exact_solution_values() {
    assert_eq!(example_iii_solution(3, -1.0, 2.5, 0.0).unwrap(), 1.0);
    assert_relative_eq!(
        example_iii_solution(3, -1.0, 2.5, 3f64.sqrt()).unwrap(),
        0.62996,
        epsilon = 1e-5
    );
    assert!(example_iii_solution(3, -1.0, 4.0, 1.0).is_err());
    // residual of the equation with exact derivatives and the weight written out here
    let (n, l, p) = (3.0, -1.0, 2.5);
    for r in [0.01, 0.3, 1.0, 7.0, 100.0] {
        let g: f64 = 1.0 + r * r;
        let a = (l + 2.0) / (2.0 * (p - 1.0));
        let u = g.powf(-a);
        let du = -2.0 * a * r * g.powf(-a - 1.0);
        let d2u = -2.0 * a * g.powf(-a - 1.0) + 4.0 * a * (a + 1.0) * r * r * g.powf(-a - 2.0);
        let f = (l + 2.0) * (n - 2.0) / ((p - 1.0) * (p - 1.0))
            * ((p - (n + l) / (n - 2.0)) + (l + 2.0 * p) / (n - 2.0) / g)
            * g.powf(l / 2.0);
        let terms = [d2u, (n - 1.0) / r * du, f * u.powf(p)];
        let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
        assert!(
            (terms[0] + terms[1] + terms[2]).abs() <= 1e-10 * scale,
            "r = {r}"
        );
        let w = WeightFunction::ExampleIii {
            n: 3,
            l: -1.0,
            p: 2.5,
        };
        assert_relative_eq!(w.eval(r), f, max_relative = 1e-13);
    }
}

#[test]
fn small_alpha_stays_near_alpha_on_unit_interval() {
    let spec = pure_power(3, -0.5, 4.0);
    let alpha: f64 = 1e-3;
    // alpha - u(r) <= alpha^p/(n-2) ∫₀¹ s f(s) ds = alpha^p * 2/3
    let delta = alpha.powi(3) * 2.0 / 3.0;
    let traj = integrate(&spec, alpha, &Tolerances::default(), 1.0).unwrap();
    for r in [0.0, 1e-3, 0.1, 0.5, 1.0] {
        let u = traj.at(r).unwrap().u;
        assert!(
            u <= alpha * (1.0 + 1e-12) && u >= alpha * (1.0 - delta),
            "r = {r}: {u}"
        );
    }
}

#[test]
fn r_alpha_matches_closed_form() {
    let spec = pure_power(3, -0.5, 4.0);
    let tol = Tolerances::default();
    for alpha in [0.1, 1.0, 7.0] {
        let traj = integrate(&spec, alpha, &tol, 1e6).unwrap();
        let r = detect_r_alpha(&traj, 2.0).unwrap().unwrap();
        let c = 2.0 / (5.0 * 1.0);
        let exact = ((2f64.powf(1.5) - 1.0) / (c * alpha.powi(3))).powf(1.0 / 1.5);
        assert_relative_eq!(r, exact, max_relative = 1e-8);
    }
    let traj = integrate(&spec, 1.0, &tol, 10.0).unwrap();
    assert!(detect_r_alpha(&traj, 1.0).is_err());
    let short = integrate(&spec, 1.0, &tol, 0.01).unwrap();
    assert_eq!(detect_r_alpha(&short, 2.0).unwrap(), None);
}

#[test]
fn integral_equation_residual() {
    let tol = Tolerances::default();
    for spec in [
        pure_power(3, -0.5, 4.0),
        example_iii(),
        constructed_spec(0.2),
    ] {
        let traj = integrate(&spec, 1.0, &tol, 1e3).unwrap();
        let res = residual_integral_equation(&spec, &traj, traj.horizon / 2.0, &tol).unwrap();
        assert!(res.abs() <= 1e-8, "{res}");
    }
    let spec = pure_power(3, -0.5, 4.0);
    let zero = integrate(&spec, 0.0, &tol, 10.0).unwrap();
    assert_eq!(
        residual_integral_equation(&spec, &zero, 5.0, &tol).unwrap(),
        0.0
    );
}

#[test]
fn flux_at_horizon_matches_closed_form() {
    let spec = pure_power(3, -0.5, 4.0);
    let tol = Tolerances::default();
    let traj = integrate(&spec, 1.0, &tol, 1e3).unwrap();
    let c: f64 = 0.4;
    let r: f64 = 1e3;
    // r^2 phi' = -(2/3)(3/2) c r^{5/2} (1 + c r^{3/2})^{-5/3}
    let exact = -c * r.powf(2.5) * (1.0 + c * r.powf(1.5)).powf(-5.0 / 3.0);
    let check = flux_limit_check(&traj).unwrap();
    assert_relative_eq!(check.value, exact, max_relative = 1e-6);
    assert!(check.pass);
    // the flux tends to -c^{-2/3}, not zero
    assert!((exact + c.powf(-2.0 / 3.0)).abs() < 0.01);

    let crossing = integrate(&pure_power(3, -0.5, 2.0), 1.0, &tol, 1e3).unwrap();
    assert!(flux_limit_check(&crossing).is_err());
}

#[test]
fn exact_solution_flux() {
    let spec = example_iii();
    let traj = integrate(&spec, 1.0, &Tolerances::default(), 1e3).unwrap();
    let r: f64 = 1e3;
    let exact = r * r * (-2.0 / 3.0) * r * (1.0 + r * r).powf(-4.0 / 3.0);
    let s = traj.at(r).unwrap();
    assert_relative_eq!(r * r * s.du, exact, max_relative = 1e-6);
}

// classify

#[test]
fn classification_examples() {
    let tol = Tolerances::default();
    let c = classify_alpha(&pure_power(3, -0.5, 4.0), 1.0, &tol).unwrap();
    assert_eq!(c.label, Label::RapidDecay);
    let c = classify_alpha(&pure_power(3, -0.5, 2.0), 1.0, &tol).unwrap();
    assert_eq!(c.label, Label::Crossing);
    assert!(c.crossing_radius.is_some());
    let c = classify_alpha(&example_iii(), 1.0, &tol).unwrap();
    assert_eq!(c.label, Label::SlowDecay);
    assert_relative_eq!(c.decay_exponent.unwrap(), 2.0 / 3.0, epsilon = 1e-3);
}

#[test]
fn r_alpha_scaling_both_ends() {
    let spec = pure_power(3, -0.5, 4.0);
    let tol = Tolerances::default();
    let mut alphas: Vec<f64> = (0..=8)
        .map(|i| 10f64.powf(-3.0 + 0.25 * i as f64))
        .collect();
    alphas.extend((0..=8).map(|i| 10f64.powf(1.0 + 0.25 * i as f64)));
    let fit = fit_r_alpha_scaling(&spec, &alphas, 2.0, &tol).unwrap();
    assert_relative_eq!(fit.small.slope, -2.0, max_relative = 0.05);
    assert_relative_eq!(fit.large.slope, -2.0, max_relative = 0.05);
    let a = r_alpha_k(&spec, 1e-3, 4.0, &tol).unwrap().unwrap();
    let b = r_alpha_k(&spec, 1e-1, 4.0, &tol).unwrap().unwrap();
    assert!(a > b);
}

#[test]
fn apriori_bound_examples() {
    let spec = pure_power(3, -0.5, 4.0);
    let tol = Tolerances::default();
    let trajs: Vec<_> = [0.1, 1.0, 10.0]
        .iter()
        .map(|a| integrate(&spec, *a, &tol, 1e3).unwrap())
        .collect();
    let b = apriori_bound_check(&trajs, 1.0).unwrap();
    // sup_r r^{1/2} phi = c^{-1/3} 2^{-2/3} for every alpha, reached at c alpha^3 r^{3/2} = 1
    let exact = 0.4f64.powf(-1.0 / 3.0) * 2f64.powf(-2.0 / 3.0);
    assert!(b.c_est <= exact * (1.0 + 1e-8));
    assert_relative_eq!(b.c_est, exact, max_relative = 1e-4);

    let single = apriori_bound_check(&trajs[..1], 1.0).unwrap();
    assert!(single.pass);

    let e3 = integrate(&example_iii(), 1.0, &tol, 1e3).unwrap();
    let b = apriori_bound_check(&[e3], 1.0).unwrap();
    let sup = (0..=3000)
        .map(|i| 10f64.powf(3.0 * i as f64 / 3000.0))
        .map(|r| r.sqrt() * (1.0 + r * r).powf(-1.0 / 3.0))
        .fold(0.0, f64::max);
    assert_relative_eq!(b.c_est, sup, max_relative = 1e-5);
}

// identities

#[test]
fn identities_on_explicit_solution_vanish() {
    let spec = pure_power(3, -0.5, 4.0);
    let tol = Tolerances::default();
    let traj = integrate(&spec, 1.0, &tol, 1e3).unwrap();
    for r in [1.0, 10.0, 100.0] {
        let a = identity_3_3(&spec, &traj, r, &tol).unwrap();
        let b = identity_4_1(&spec, &traj, r, &tol).unwrap();
        assert_eq!(a.rhs, 0.0);
        assert!(a.lhs.abs() <= 1e-8 * a.scale, "{a:?}");
        assert!(b.lhs.abs() <= 1e-8 * b.scale, "{b:?}");
    }
    let zero = integrate(&spec, 0.0, &tol, 10.0).unwrap();
    let z = identity_3_3(&spec, &zero, 5.0, &tol).unwrap();
    assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
    let z = identity_4_1(&spec, &zero, 5.0, &tol).unwrap();
    assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
}

#[test]
fn identities_on_exact_solution() {
    let spec = example_iii();
    let tol = Tolerances::default();
    let traj = integrate(&spec, 1.0, &tol, 1e3).unwrap();
    let a = identity_3_3(&spec, &traj, 10.0, &tol).unwrap();
    assert!(a.residual.abs() <= 1e-6 * a.scale);
    // lhs from the closed form
    let r: f64 = 10.0;
    let u = (1.0 + r * r).powf(-1.0 / 3.0);
    let du = -2.0 / 3.0 * r * (1.0 + r * r).powf(-4.0 / 3.0);
    let lhs = 0.5 * r * r * u * du
        + 0.5 * r.powi(3) * du * du
        + r.powi(3) * spec.weight.eval(r) * u.powf(3.5) / 3.5;
    assert_relative_eq!(a.lhs, lhs, max_relative = 1e-8);
}

#[test]
fn identities_agree_with_each_other_and_direct_quadrature() {
    let spec = constructed_spec(0.2);
    let tol = Tolerances::default();
    let traj = integrate(&spec, 1.0, &tol, 1e3).unwrap();
    let k = bump();
    for r in [1.5, 2.5, 10.0, 100.0] {
        let a = identity_3_3(&spec, &traj, r, &tol).unwrap();
        let b = identity_4_1(&spec, &traj, r, &tol).unwrap();
        assert_relative_eq!(b.rhs, 2.0 * a.rhs, max_relative = 1e-10);
        assert_relative_eq!(
            b.lhs,
            2.0 * a.lhs,
            max_relative = 1e-6,
            epsilon = 1e-6 * a.scale
        );
        // h r^{n+l-1} = eps (p*+1) k, so the source is eps (p*+1) ∫ k u^{p+1}
        let top = r.min(3.0);
        let mut direct = 0.0;
        for w in [0.0, 1.0, 2.0, 3.0].windows(2) {
            if w[0] < top {
                direct += simpson(
                    |s| k.eval(s) * traj.at(s).unwrap().u.powi(5),
                    w[0],
                    w[1].min(top),
                    4000,
                );
            }
        }
        let direct = 0.2 * 5.0 * direct / 5.0;
        assert_relative_eq!(a.rhs, direct, max_relative = 1e-8);
    }
}

#[test]
fn limit_sequence_examples() {
    let spec = constructed_spec(0.2);
    let tol = Tolerances::default();
    let (traj, c) = shoot_and_classify(&spec, 1.0, &tol).unwrap();
    assert_eq!(c.label, Label::SlowDecay);
    let long = integrate(&spec, 1.0, &tol, traj.horizon.max(1e8)).unwrap();
    let pts = limit_sequence_probe(&spec, &long).unwrap();
    assert!(!pts.is_empty());
    for p in &pts {
        assert!(p.w > 0.1 && p.r_dw.abs() < 1e-2 * p.w, "{p:?}");
    }

    let phi = pure_power(3, -0.5, 4.0);
    let t = integrate(&phi, 1.0, &tol, 1e7).unwrap();
    let w_at = |r: f64| t.at(r).unwrap().w;
    // w ~ r^{-1/2} at infinity
    assert!(w_at(1e7) < 0.2 * w_at(1e5) && w_at(1e5) < 0.2 * w_at(1e3));
}

#[test]
fn growth_examples() {
    let tol = Tolerances::default();
    let w = WeightFunction::ProductPower {
        c1: 2.0,
        c2: 1.0,
        c3: 1.0,
        c4: 2.0,
        gamma: 1.0,
        nu: -1.5,
    };
    let spec = ProblemSpec::new(3, -0.5, 0.0, 4.0, w).unwrap();
    let g = lemma_4_1_growth(&spec, &[10.0, 100.0, 1000.0], &tol).unwrap();
    assert!(g.gate, "{}", g.gate_reason);
    assert!(g.strictly_increasing, "{:?}", g.points);

    let pp = pure_power(3, -0.5, 4.0);
    let g = lemma_4_1_growth(&pp, &[10.0, 100.0], &tol).unwrap();
    assert!(g.points.iter().all(|p| p.integral == 0.0));

    // gamma* vanishes for the constructed weight, so no growth is asserted
    let g = lemma_4_1_growth(&constructed_spec(0.2), &[10.0, 100.0], &tol).unwrap();
    assert!(!g.gate);
}

// sweeps

#[test]
fn example_iii_sweep() {
    let grid: Vec<f64> = (0..=16)
        .map(|i| 10f64.powf(-2.0 + 0.25 * i as f64))
        .collect();
    let rep = sweep(
        &example_iii(),
        &grid,
        &Tolerances::default(),
        &SweepOptions::default(),
    )
    .unwrap();
    assert!(
        rep.pattern.starts_with('C') && rep.pattern.ends_with('C'),
        "{}",
        rep.pattern
    );
    let at_one = rep
        .grid
        .iter()
        .find(|c| (c.alpha - 1.0).abs() < 1e-12)
        .unwrap();
    assert_ne!(at_one.label, Label::Crossing);
}

#[test]
fn explicit_sweep_is_all_rapid() {
    let grid: Vec<f64> = (0..=8)
        .map(|i| 10f64.powf(-1.0 + 0.25 * i as f64))
        .collect();
    let rep = sweep(
        &pure_power(3, -0.5, 4.0),
        &grid,
        &Tolerances::default(),
        &SweepOptions::default(),
    )
    .unwrap();
    assert_eq!(rep.pattern, "R");
    assert!(rep.boundaries.is_empty());
}

#[test]
fn sweep_rejects_short_grid() {
    assert!(sweep(
        &example_iii(),
        &[1.0],
        &Tolerances::default(),
        &SweepOptions::default()
    )
    .is_err());
}

fn default_construction() -> Theorem5Config {
    Theorem5Config {
        bump: bump(),
        epsilon: 0.2,
        alpha_star: 1.0,
        delta: 0.1,
        r_star: 2.25,
        alpha_min: 0.1,
        alpha_max: 1000.0,
        points: 33,
    }
}

#[test]
fn constructed_sweep_structure() {
    let base = pure_power(3, -0.5, 4.0);
    let out = theorem5_pipeline(
        &default_construction(),
        &base,
        &Tolerances::default(),
        &SweepOptions::default(),
    )
    .unwrap();
    assert!(out.all_passed, "{:?}", out.log);
    let r = &out.structure.rapid_alphas;
    assert!(r.len() >= 2);
    assert!(r[1] - r[0] > 1e-3);
    assert!(out.epsilon_max > 0.2);
    let first = out.structure.grid.first().unwrap();
    let last = out.structure.grid.last().unwrap();
    assert_eq!(
        (first.label, last.label),
        (Label::Crossing, Label::Crossing)
    );
}

#[test]
fn slow_decay_fades_as_epsilon_shrinks() {
    let tol = Tolerances::default();
    let e1 = classify_alpha(&constructed_spec(0.2), 1.0, &tol)
        .unwrap()
        .energy
        .unwrap();
    let e2 = classify_alpha(&constructed_spec(0.1), 1.0, &tol)
        .unwrap()
        .energy
        .unwrap();
    let e3 = classify_alpha(&constructed_spec(0.05), 1.0, &tol)
        .unwrap()
        .energy
        .unwrap();
    assert!(e1 < 0.0 && e2 < 0.0);
    assert!(e3.abs() < e2.abs() && e2.abs() < e1.abs(), "{e1} {e2} {e3}");
}

#[test]
fn constructed_weight_rejects_bad_inputs() {
    let base = pure_power(3, -0.5, 4.0);
    let tol = Tolerances::default();
    let mut cfg = default_construction();
    cfg.bump.amplitudes = [0.2, 3.0, 3.5];
    match theorem5_pipeline(&cfg, &base, &tol, &SweepOptions::default()) {
        Err(Error::Validation { clause, .. }) => assert_eq!(clause, "(2.1b)"),
        other => panic!("{other:?}"),
    }
    let mut cfg = default_construction();
    cfg.r_star = 3.5;
    match theorem5_pipeline(&cfg, &base, &tol, &SweepOptions::default()) {
        Err(Error::Validation { clause, .. }) => assert_eq!(clause, "(2.1d)"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn small_alpha_examples() {
    let tol = Tolerances::default();
    let rep = theorem1_2_smallalpha_check(&shifted_quarter(), &tol).unwrap();
    assert!(rep.samples.len() >= 3 && rep.all_non_crossing);
    for alpha in [1e-3, 1e-1, 1.0, 10.0] {
        assert_eq!(
            classify_alpha(&shifted_nine_eighths(), alpha, &tol)
                .unwrap()
                .label,
            Label::Crossing,
            "alpha = {alpha}"
        );
    }
    assert!(matches!(
        theorem1_2_smallalpha_check(&pure_power(3, -0.5, 4.0), &tol),
        Err(Error::HypothesisGate(_))
    ));
}
