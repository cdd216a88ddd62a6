//! Adaptive quadrature and root bracketing.
//!
//! One integrator serves the whole crate: adaptive interval bisection with an
//! embedded Gauss(7)/Kronrod(15) pair as the two-order error check, refining
//! the worst interval first. Endpoint singularities are removed by callers
//! through exact substitutions (z = w^2 and friends) before this module sees
//! the integrand; `dyadic_lower` covers the remaining cases where an endpoint
//! behaviour is only known to be monotone (finite-vs-divergent probes).

use crate::error::{Result, SntError};
use std::collections::BinaryHeap;

/// Kronrod-15 abscissae on [-1, 1] (positive half; the rule is symmetric).
/// Odd indices are the embedded Gauss-7 points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_944_9,
    0.417_959_183_673_469_387_8,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdiv: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { rel_tol: 1e-10, abs_tol: 1e-14, max_subdiv: 1_000_000 }
    }
}

impl QuadOpts {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOpts { rel_tol, ..Default::default() }
    }
}

/// One Kronrod-15 panel: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut kron_abs = WGK[7] * fc.abs();
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron += WGK[i] * (f1 + f2);
        kron_abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).abs().max(1e-16 * kron_abs * h.abs());
    (value, err)
}

struct Interval {
    err: f64,
    value: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrate `f` over the finite interval [a, b].
///
/// Stops when the summed panel error estimates satisfy
/// `total_err <= max(abs_tol, rel_tol * |integral|)`; errors out if the
/// subdivision cap is hit first or the integrand produces non-finite values.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOpts) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(SntError::Quadrature("non-finite integration bounds".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let (v0, e0) = gk15(&f, a, b);
    if !v0.is_finite() {
        return Err(SntError::Quadrature(format!(
            "integrand non-finite on initial panel [{a:e}, {b:e}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Interval { err: e0, value: v0, a, b });
    let mut total_val = v0;
    let mut total_err = e0;
    let mut subdivisions = 0usize;

    while total_err > opts.abs_tol.max(opts.rel_tol * total_val.abs()) {
        let worst = match heap.pop() {
            Some(w) => w,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval no longer splittable in f64; accept its value and
            // retire its error estimate.
            total_err -= worst.err;
            heap.push(Interval { err: 0.0, ..worst });
            continue;
        }
        subdivisions += 1;
        if subdivisions > opts.max_subdiv {
            return Err(SntError::Quadrature(format!(
                "no convergence after {} subdivisions on [{a:e}, {b:e}] (err {:.3e}, value {:.6e})",
                opts.max_subdiv, total_err, total_val
            )));
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(SntError::Quadrature(format!(
                "integrand non-finite near [{:e}, {:e}]",
                worst.a, worst.b
            )));
        }
        total_val += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Interval { err: e1, value: v1, a: worst.a, b: mid });
        heap.push(Interval { err: e2, value: v2, a: mid, b: worst.b });
    }
    Ok(total_val)
}

/// Outcome of an integral whose lower endpoint may carry a non-integrable
/// singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DyadicOutcome {
    Converged(f64),
    Diverged,
}

/// Integrate `f` over (a, b] by dyadic slices shrinking toward `a`,
/// classifying the endpoint as convergent or divergent.
///
/// Slice contributions of a power-law integrand form a geometric sequence;
/// a stable ratio < 1 is summed (with geometric extrapolation if the cap is
/// reached), a non-decaying ratio or unbounded partial sum is reported as
/// divergent.
pub fn dyadic_lower<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOpts,
) -> Result<DyadicOutcome> {
    const MAX_SLICES: usize = 120;
    let len = b - a;
    if len <= 0.0 {
        return Err(SntError::Quadrature("empty dyadic interval".into()));
    }
    let slice_opts = QuadOpts { abs_tol: opts.abs_tol * 1e-2, ..*opts };
    let mut total = 0.0f64;
    let mut prev_slice = f64::NAN;
    let mut last_ratio = f64::NAN;
    let mut small_streak = 0usize;
    for k in 0..MAX_SLICES {
        let hi = a + len * 0.5f64.powi(k as i32);
        let lo = a + len * 0.5f64.powi(k as i32 + 1);
        let slice = adaptive(&f, lo, hi, &slice_opts)?;
        total += slice;
        if total.abs() > 1e12 {
            return Ok(DyadicOutcome::Diverged);
        }
        if slice.abs() <= opts.rel_tol * total.abs().max(1e-300) + opts.abs_tol {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(DyadicOutcome::Converged(total));
            }
        } else {
            small_streak = 0;
        }
        if prev_slice.is_finite() && prev_slice != 0.0 {
            last_ratio = slice / prev_slice;
            if k > 8 && last_ratio >= 0.95 {
                return Ok(DyadicOutcome::Diverged);
            }
        }
        prev_slice = slice;
    }
    // Cap reached with a decaying but slow geometric ratio: extrapolate the
    // remaining tail so near-boundary exponents still get a finite value.
    if last_ratio.is_finite() && last_ratio > 0.0 && last_ratio < 0.95 {
        return Ok(DyadicOutcome::Converged(
            total + prev_slice * last_ratio / (1.0 - last_ratio),
        ));
    }
    Ok(DyadicOutcome::Diverged)
}

/// Find the root of `f` on [lo, hi] by bisection, given f(lo) and f(hi) of
/// opposite sign. Converges to an interval of width `xtol`.
pub fn bisect_root<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(SntError::Inversion(format!(
            "no sign change on [{lo:e}, {hi:e}] (f: {flo:e} .. {fhi:e})"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
