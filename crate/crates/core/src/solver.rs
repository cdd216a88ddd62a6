//! Fixed-point iteration of the transform map on a log abscissa grid, the
//! perpetuity recursion eta_bar = eta + A eta_bar in distribution, and the
//! degenerate-atom equation z = exp(-b (1 - z)).
//!
//! The iteration works on the transform scale: each step maps a grid of
//! values phi_n(s_i) to phi_(n+1)(s_i) = exp(-lambda int (1 - phi_n(s_i
//! h(u))) du), interpolating phi_n monotonically in log-log coordinates for
//! the off-grid arguments. Under the unit regime the map contracts the
//! weighted sup metric sup_s |phi - psi| / s by factor E[A] < 1 on the set
//! of transforms with the prescribed derivative m at zero, which is why the
//! starting transform must carry the right mean.

use crate::dist::{self, DistSpec, EmpiricalSample};
use crate::engine::{shot_integral, SntConfig};
use crate::error::{Result, SntError};
use crate::interp::Pchip;
use crate::response::{MixingMeasure, Regime};
use rayon::prelude::*;
use serde::Serialize;

/// 64 log-spaced abscissae on [1e-4, 50]; the shared default grid.
pub fn standard_abscissae() -> Vec<f64> {
    let (lo, hi, n) = (1e-4f64, 50.0f64, 64usize);
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// A completely monotone transform sampled on a positive grid, with the
/// admissibility checks a Laplace transform of a probability law on
/// [0, inf) must satisfy at grid resolution.
pub struct LstGrid {
    s: Vec<f64>,
    phi: Vec<f64>,
    interp: Pchip, // ln s -> ln phi
}

impl LstGrid {
    /// Validates: grids of length >= 4, s strictly increasing and positive,
    /// phi in (0, 1], non-increasing, log-convex in s up to quadrature
    /// noise, and the end slope consistent with the small-s mean estimate.
    pub fn new(s: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if s.len() != phi.len() {
            return Err(SntError::GridMismatch(format!(
                "abscissae/value length mismatch: {} vs {}",
                s.len(),
                phi.len()
            )));
        }
        if s.len() < 4 {
            return Err(SntError::InvalidParameter("transform grid needs >= 4 points".into()));
        }
        for i in 0..s.len() {
            if !(s[i].is_finite() && s[i] > 0.0) {
                return Err(SntError::InvalidParameter(format!(
                    "abscissa s[{i}] = {} must be finite and > 0",
                    s[i]
                )));
            }
            if i > 0 && s[i] <= s[i - 1] {
                return Err(SntError::InvalidParameter("abscissae must strictly increase".into()));
            }
            if !(phi[i].is_finite() && phi[i] > 0.0 && phi[i] <= 1.0 + 1e-9) {
                return Err(SntError::InvalidParameter(format!(
                    "transform value phi[{i}] = {} is outside (0, 1]",
                    phi[i]
                )));
            }
            if i > 0 && phi[i] > phi[i - 1] + 1e-12 {
                return Err(SntError::InvalidParameter(format!(
                    "transform must be non-increasing, violated near s = {}",
                    s[i]
                )));
            }
        }
        let phi: Vec<f64> = phi.into_iter().map(|p| p.min(1.0)).collect();
        // log-convexity in s, with slope tolerance widened by 1/spacing to
        // absorb the ~1e-9 absolute noise a quadrature-produced grid carries
        let ln_phi: Vec<f64> = phi.iter().map(|p| p.ln()).collect();
        for i in 1..s.len() - 1 {
            let dl = (ln_phi[i] - ln_phi[i - 1]) / (s[i] - s[i - 1]);
            let dr = (ln_phi[i + 1] - ln_phi[i]) / (s[i + 1] - s[i]);
            let tol = 1e-9 + 2e-9 / (s[i] - s[i - 1]) + 2e-9 / (s[i + 1] - s[i]);
            if dl > dr + tol {
                return Err(SntError::InvalidParameter(format!(
                    "transform is not log-convex near s = {} (slopes {dl} vs {dr})",
                    s[i]
                )));
            }
        }
        let ln_s: Vec<f64> = s.iter().map(|v| v.ln()).collect();
        let interp = Pchip::new(&ln_s, &ln_phi)?;
        let grid = LstGrid { s, phi, interp };
        // admissible transforms have (1 - phi(s))/s non-increasing; with the
        // head-slope extrapolated mean this test reduces to exactly that on
        // the first two nodes, with slack for quadrature noise in phi
        let head_slope = (1.0 - grid.phi[0]) / grid.s[0];
        let m_hat = grid.mean_estimate();
        if head_slope > m_hat * (1.0 + 1e-5) + 1e-9 {
            return Err(SntError::InvalidParameter(format!(
                "(1 - phi)/s = {head_slope} at the smallest abscissa exceeds the mean estimate {m_hat}"
            )));
        }
        Ok(grid)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    /// Evaluate the transform: 1 at s <= 0, the chord through (0, 1) below
    /// the grid (1 - phi is asymptotically linear there), monotone cubic in
    /// log-log coordinates inside, clamped to the last value above.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        if s < self.s[0] {
            return 1.0 - (1.0 - self.phi[0]) * s / self.s[0];
        }
        self.interp.eval(s.ln()).exp().min(1.0)
    }

    /// Mean of the underlying law from the head slopes u(s) = (1 - phi)/s
    /// at the two smallest abscissae, extrapolated linearly to s = 0
    /// (Richardson step; u(s) = m - E[X^2] s / 2 + O(s^2) near 0). Uses node
    /// values only, so quadrature-level noise in phi stays at the 1e-8 scale
    /// instead of being amplified by difference quotients.
    pub fn mean_estimate(&self) -> f64 {
        let (s1, s2) = (self.s[0], self.s[1]);
        let u1 = (1.0 - self.phi[0]) / s1;
        let u2 = (1.0 - self.phi[1]) / s2;
        u1 + (u1 - u2) * s1 / (s2 - s1)
    }

    fn check_same_grid(&self, other: &LstGrid) -> Result<()> {
        if self.s.len() != other.s.len()
            || self
                .s
                .iter()
                .zip(&other.s)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return Err(SntError::GridMismatch(
                "transforms live on different abscissa grids".into(),
            ));
        }
        Ok(())
    }

    /// Plain sup distance max_i |phi_a(s_i) - phi_b(s_i)| on a shared grid.
    pub fn sup_distance(&self, other: &LstGrid) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("s,phi\n");
        for (s, p) in self.s.iter().zip(&self.phi) {
            out.push_str(&format!("{s:.16e},{p:.16e}\n"));
        }
        out
    }
}

/// Weighted sup metric sup_i |phi_a(s_i) - phi_b(s_i)| / s_i; the metric
/// the transform map contracts on mean-m transforms.
pub fn m_metric(a: &LstGrid, b: &LstGrid) -> Result<f64> {
    a.check_same_grid(b)?;
    Ok(a
        .s
        .iter()
        .zip(a.phi.iter().zip(&b.phi))
        .map(|(s, (pa, pb))| (pa - pb).abs() / s)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub m_metric: f64,
    pub mean_estimate: f64,
    pub monotone_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTrace {
    pub schema: u32,
    pub label: String,
    pub converged: bool,
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("iteration,m_metric,mean_estimate,monotone_ok\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                r.iteration, r.m_metric, r.mean_estimate, r.monotone_ok
            ));
        }
        out
    }
}

/// Starting transform for the iteration; both carry mean m exactly.
#[derive(Debug, Clone, Copy)]
pub enum StartLst {
    /// e^(-m s): the point mass at m.
    Exponential,
    /// (1 + m s / 2)^-2: a shape-2 gamma law with mean m.
    GammaTwo,
}

impl StartLst {
    fn values(&self, m: f64, s: &[f64]) -> Vec<f64> {
        match self {
            StartLst::Exponential => s.iter().map(|si| (-m * si).exp()).collect(),
            StartLst::GammaTwo => s.iter().map(|si| (1.0 + 0.5 * m * si).powi(-2)).collect(),
        }
    }
}

pub struct IterationResult {
    pub grid: LstGrid,
    pub trace: ConvergenceTrace,
}

/// Iterate the transform map from `start` (mean m) on the standard grid.
/// Requires the unit regime, where the map has a unique mean-m fixed point
/// and contracts the weighted sup metric toward it. Stops early once the
/// per-step metric drops below 1e-12.
pub fn iterate(cfg: &SntConfig, m: f64, steps: usize, start: StartLst) -> Result<IterationResult> {
    let report = cfg.response().validate(cfg.lambda())?;
    if report.regime != Regime::Unit {
        return Err(SntError::Regime(format!(
            "iteration requires lambda * integral(h) = 1; got {} ({})",
            report.lambda_integral,
            report.regime.describe()
        )));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(SntError::InvalidParameter(format!("target mean must be > 0, got {m}")));
    }
    if steps == 0 || steps > 200 {
        return Err(SntError::InvalidParameter(format!(
            "iteration steps must lie in 1..=200, got {steps}"
        )));
    }
    let s = standard_abscissae();
    let mut grid = LstGrid::new(s.clone(), start.values(m, &s))?;
    let mut rows = Vec::with_capacity(steps);
    let mut converged = false;
    for it in 1..=steps {
        let phi_next: Result<Vec<f64>> = s
            .par_iter()
            .map(|&si| {
                let inner = shot_integral(cfg, |y| 1.0 - grid.eval(si * y))?;
                Ok((-inner).exp())
            })
            .collect();
        let next = LstGrid::new(s.clone(), phi_next?).map_err(|e| {
            SntError::Inversion(format!(
                "iteration step {it} produced an inadmissible transform: {e}"
            ))
        })?;
        let mm = m_metric(&grid, &next)?;
        let monotone_ok = next.phi.iter().zip(&grid.phi).all(|(a, b)| *a >= b - 1e-12);
        rows.push(TraceRow {
            iteration: it,
            m_metric: mm,
            mean_estimate: next.mean_estimate(),
            monotone_ok,
        });
        grid = next;
        if mm < 1e-12 {
            converged = true;
            break;
        }
    }
    let label = format!(
        "transform iteration: response={}, lambda={}, m={m}, start={start:?}",
        cfg.response().kind().key(),
        cfg.lambda()
    );
    Ok(IterationResult { grid, trace: ConvergenceTrace { schema: 1, label, converged, rows } })
}

/// Draw n values of the `steps`-fold perpetuity eta_1 + A_1 (eta_2 + A_2
/// (...)) started from 0, with (eta, A) ~ base x nu independent. Per step
/// the base variable is drawn first, then the mixing variable.
pub fn perpetuity_sample(
    nu: &MixingMeasure,
    base: &DistSpec,
    steps: usize,
    n: usize,
    seed: u64,
) -> Result<EmpiricalSample> {
    base.validate()?;
    if steps == 0 || steps > 100_000 {
        return Err(SntError::InvalidParameter(format!(
            "perpetuity steps must lie in 1..=100000, got {steps}"
        )));
    }
    if n == 0 {
        return Err(SntError::InvalidParameter("sample size must be >= 1".into()));
    }
    if !nu.has_closed_sampler() {
        return Err(SntError::Unsupported(
            "generic density mixing measures have no closed-form sampler".into(),
        ));
    }
    let values = dist::chunked_draws(n, seed, |rng| {
        let mut acc = 0.0f64;
        for _ in 0..steps {
            let eta = dist::draw_one(base, rng);
            let a = nu.sample_a(rng).unwrap_or(f64::NAN);
            acc = eta + a * acc;
        }
        acc
    });
    EmpiricalSample::new(
        values,
        seed,
        format!("perpetuity(nu={}, base={}, steps={steps}, n={n})", nu.label(), base.key()),
    )
}

/// Smallest root in (0, 1) of z = exp(-b (1 - z)), the degenerate-atom
/// equation of an indicator response at load b = lambda * a * height; None
/// when b <= 1 (the only roots are at or beyond 1). Bisection on
/// g(z) = expm1(-b (1 - z)) + (1 - z), polished by the Picard map where it
/// contracts (b z < 0.95).
pub fn atom_root(b: f64) -> Result<Option<f64>> {
    if !(b.is_finite() && b > 0.0) {
        return Err(SntError::InvalidParameter(format!("atom load must be > 0, got {b}")));
    }
    if b <= 1.0 {
        // e^(-b(1-z)) - z is positive on (0, 1): convex with value e^-b > 0
        // at 0 and derivative b <= 1 at the fixed point z = 1
        return Ok(None);
    }
    let g = |z: f64| (-b * (1.0 - z)).exp_m1() + (1.0 - z);
    // g(0) = e^-b > 0; to first order g < 0 from eps = 2(b-1)/b^2 inward,
    // so half that offset brackets; scan closer to 1 if rounding disagrees
    let mut eps = ((b - 1.0) / (b * b)).min(1e-3);
    let mut hi = 1.0 - eps;
    let mut tries = 0;
    while g(hi) >= 0.0 {
        eps *= 0.5;
        hi = 1.0 - eps;
        tries += 1;
        if tries > 200 || eps == 0.0 {
            return Err(SntError::Inversion(format!(
                "no interior bracket for the atom equation at b = {b}"
            )));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    if b * z < 0.95 {
        for _ in 0..100 {
            let next = (-b * (1.0 - z)).exp();
            if (next - z).abs() <= 4.0 * f64::EPSILON * z {
                z = next;
                break;
            }
            z = next;
        }
    }
    Ok(Some(z))
}
