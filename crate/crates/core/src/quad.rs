//! Adaptive Gauss-Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Integral of |f|, used for the roundoff floor.
    modulus: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        fv1[j] = f1;
        fv2[j] = f2;
        rk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mut modulus = WGK[7] * fc.abs();
    for j in 0..7 {
        modulus += WGK[j] * (fv1[j].abs() + fv2[j].abs());
    }
    let modulus = modulus * h.abs();
    let mean = rk * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = rk * h;
    let asc = asc * h.abs();
    // the plain Gauss-Kronrod difference; the usual 1.5-power rescaling is too optimistic
    // for integrands with kinks in higher derivatives
    let diff = ((rk - rg) * h).abs();
    let mut error = diff;
    if asc != 0.0 && diff != 0.0 {
        error = error.max(asc * (200.0 * diff / asc).powf(1.5).min(1.0));
    }
    Segment {
        a,
        b,
        value,
        error,
        modulus,
    }
}

/// Integrates `f` over `[a, b]` until the error estimate is below `max(abs, rel*|I|)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel: f64,
    abs: f64,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = kronrod15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Quadrature { a, b });
    }
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut err = first.error;
    let mut modulus = first.modulus;
    let mid = 0.5 * (a + b);
    if mid > a.min(b) && mid < a.max(b) {
        // one forced split: a single rule can agree with itself by accident
        let left = kronrod15(&f, a, mid);
        let right = kronrod15(&f, mid, b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::Quadrature { a, b });
        }
        let gap = (left.value + right.value - first.value).abs();
        total = left.value + right.value;
        modulus = left.modulus + right.modulus;
        let spread = 0.5 * gap;
        let left = Segment {
            error: left.error + spread,
            ..left
        };
        let right = Segment {
            error: right.error + spread,
            ..right
        };
        err = left.error + right.error;
        heap.push(left);
        heap.push(right);
    } else {
        heap.push(first);
    }
    while err
        > abs
            .max(rel * total.abs())
            .max(100.0 * f64::EPSILON * modulus)
    {
        if heap.len() >= MAX_INTERVALS {
            let worst = heap.peek().copied().unwrap_or(first);
            return Err(Error::Quadrature {
                a: worst.a,
                b: worst.b,
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval can no longer be split in floating point
            if worst.error > abs.max(rel * total.abs()) * 10.0 {
                return Err(Error::Quadrature {
                    a: worst.a,
                    b: worst.b,
                });
            }
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            err -= worst.error;
            continue;
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::Quadrature {
                a: worst.a,
                b: worst.b,
            });
        }
        total += left.value + right.value - worst.value;
        modulus += left.modulus + right.modulus - worst.modulus;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if err < 0.0 {
            err = heap.iter().map(|s| s.error).sum();
        }
    }
    // resum to limit the drift of the running totals
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error })
}

/// Integrates over consecutive panels `[pts[i], pts[i+1]]`.
pub fn gauss_kronrod_panels<F: Fn(f64) -> f64>(
    f: F,
    pts: &[f64],
    rel: f64,
    abs: f64,
) -> Result<QuadResult> {
    let mut value = 0.0;
    let mut error = 0.0;
    for w in pts.windows(2) {
        let r = gauss_kronrod(&f, w[0], w[1], rel, abs)?;
        value += r.value;
        error += r.error;
    }
    Ok(QuadResult { value, error })
}

/// Integrates `f` over `[0, b]` when `f(s)` behaves like `s^q` with `q > -1` near the origin.
///
/// The substitution `s = b x^m` with `m (q+1) >= 2` removes the endpoint singularity.
pub fn integrate_from_zero<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    q: f64,
    rel: f64,
    abs: f64,
) -> Result<QuadResult> {
    if b <= 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let m = (2.0 / (q + 1.0)).max(1.0);
    let g = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let s = b * x.powf(m);
        let v = f(s) * m * b * x.powf(m - 1.0);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    gauss_kronrod(g, 0.0, 1.0, rel, abs)
}

/// Integrates `f` over `[0, b]`: the substitution near the origin, then one panel per decade.
pub fn integrate_log_panels<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    q: f64,
    rel: f64,
    abs: f64,
) -> Result<QuadResult> {
    integrate_log_panels_split(f, b, q, rel, abs, &[])
}

/// As [`integrate_log_panels`], with extra breakpoints where `f` is not smooth.
pub fn integrate_log_panels_split<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    q: f64,
    rel: f64,
    abs: f64,
    kinks: &[f64],
) -> Result<QuadResult> {
    let inner = 1e-3_f64.min(b);
    let mut res = integrate_from_zero(&f, inner, q, rel, abs)?;
    if b > inner {
        let pts = with_kinks(&log_breakpoints(inner, b), kinks);
        let rest = gauss_kronrod_panels(&f, &pts, rel, abs)?;
        res.value += rest.value;
        res.error += rest.error;
    }
    Ok(res)
}

/// Gauss-Kronrod on `[a, b]` split at every kink inside it.
pub fn gauss_kronrod_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel: f64,
    abs: f64,
    kinks: &[f64],
) -> Result<QuadResult> {
    gauss_kronrod_panels(f, &with_kinks(&[a, b], kinks), rel, abs)
}

/// Merges kinks lying strictly inside `[pts[0], pts[last]]` into the sorted breakpoints.
fn with_kinks(pts: &[f64], kinks: &[f64]) -> Vec<f64> {
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let mut out: Vec<f64> = pts.to_vec();
    out.extend(kinks.iter().copied().filter(|k| *k > lo && *k < hi));
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Points `a, 10a, 100a, ..., b` (the last panel may be shorter).
pub fn log_breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut x = a * 10.0;
    while x < b * (1.0 - 1e-12) {
        pts.push(x);
        x *= 10.0;
    }
    pts.push(b);
    pts
}
