//! Response functions h and their mixing measures.
//!
//! A response function is non-increasing and right-continuous on [0, inf)
//! with h(0+) <= 1 and h not an indicator plateau 1[0,a) (Condition A).
//! Every admissible h is tied to a measure nu on (0, h(0+)] through
//!
//!   nu(dz) = -lambda * z * dh_inv(z),      h_inv(x) = int_x^b z^-1 nu(dz),
//!
//! where h_inv is the generalized inverse h_inv(x) = inf{u : h(u) < x}.
//! In the unit regime lambda * int_0^inf h(u) du = 1, nu is a probability
//! measure and drives the perpetuity eta + A*eta_bar with A ~ nu.
//!
//! The named families:
//!   - gamma family (parameter alpha > 0): h_inv(x) = alpha * int_x^1
//!     z^-1 (1-z)^(alpha-1) dz, evaluated by quadrature, mixing measure
//!     Beta(1, alpha); alpha = 1 is exp(-u), alpha = 1/2 is 1/cosh^2(u);
//!   - s2 family: h_inv(x) = ln x + 2 x^(-1/2) - 2, mixing density
//!     z^(-1/2) - 1 on (0, 1);
//!   - power transforms h^(1/gamma), gamma in (0, 1], which subordinate the
//!     fixed point by a one-sided stable law of index gamma.

use crate::error::{Result, SntError};
use crate::quad::{self, DyadicOutcome, QuadOpts};
use rand::Rng;
use serde::Serialize;
use std::fmt;
use std::sync::{Arc, OnceLock};

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Constructor-facing description of a response function.
#[derive(Debug, Clone)]
pub enum ResponseKind {
    /// h_inv(x) = alpha * int_x^1 z^-1 (1-z)^(alpha-1) dz.
    GammaFamily { alpha: f64 },
    /// h_inv(x) = ln x + 2 x^(-1/2) - 2.
    S2Family,
    /// h(u) = 1 / cosh^2(u); closed form of the alpha = 1/2 gamma family.
    Sech2,
    /// h(u) = exp(-u); the alpha = 1 gamma family.
    Exponential,
    /// h(u) = height * 1[0, a). Representable but rejected by `validate`.
    Indicator { a: f64, height: f64 },
    /// h = base^(1/gamma); gamma in (0, 1].
    Power { base: Box<ResponseKind>, gamma: f64 },
    /// Library-user supplied evaluator; carries a display name only.
    Custom { name: String },
}

impl ResponseKind {
    /// Canonical string key (matches the CLI `--response` grammar).
    pub fn key(&self) -> String {
        match self {
            ResponseKind::GammaFamily { alpha } => format!("gamma:{alpha}"),
            ResponseKind::S2Family => "s2".into(),
            ResponseKind::Sech2 => "sech2".into(),
            ResponseKind::Exponential => "exp".into(),
            ResponseKind::Indicator { a, height } => {
                if (*height - 1.0).abs() < 1e-15 {
                    format!("indicator:{a}")
                } else {
                    format!("indicator:{a}x{height}")
                }
            }
            ResponseKind::Power { base, gamma } => format!("pow:{}:{gamma}", base.key()),
            ResponseKind::Custom { name } => format!("custom:{name}"),
        }
    }
}

/// Unit-intensity mixing weights w(z) = -z h_inv'(z) of the named base
/// families; the nu-form of any shot integral against these is evaluated
/// through an exact smoothing substitution, so integrable endpoint
/// singularities of the integrand never reach the quadrature.
#[derive(Debug, Clone, Copy)]
pub(crate) enum BaseWeight {
    /// w(z) = alpha (1-z)^(alpha-1) on (0,1): the Beta(1, alpha) density.
    Beta1 { alpha: f64 },
    /// w(z) = 1 on (0,1).
    Uniform,
    /// w(z) = z^(-1/2) - 1 on (0,1).
    S2Mixing,
}

/// int_0^1 g(z) w(z) dz for a unit-intensity base weight.
///
/// Substitutions: Beta(1,alpha) via t = (1-z)^alpha then t = 1 - v^2
/// (flattens both the z->1 density singularity and anything up to z^(eps-1)
/// in g at z->0); uniform and S2 weights via z = v^2.
pub(crate) fn weighted_unit_integral<F: Fn(f64) -> f64>(
    weight: BaseWeight,
    g: F,
    opts: &QuadOpts,
) -> Result<f64> {
    match weight {
        BaseWeight::Beta1 { alpha } => quad::adaptive(
            |v| {
                // z = 1 - (1 - v^2)^(1/alpha), computed through logs so that
                // z keeps full relative accuracy as v -> 0.
                let z = (-((-v * v).ln_1p() / alpha).exp_m1()).max(f64::MIN_POSITIVE);
                2.0 * v * g(z)
            },
            0.0,
            1.0,
            opts,
        ),
        BaseWeight::Uniform => quad::adaptive(
            |v| 2.0 * v * g((v * v).max(f64::MIN_POSITIVE)),
            0.0,
            1.0,
            opts,
        ),
        BaseWeight::S2Mixing => quad::adaptive(
            |v| 2.0 * (1.0 - v) * g((v * v).max(f64::MIN_POSITIVE)),
            0.0,
            1.0,
            opts,
        ),
    }
}

enum Form {
    /// Direct evaluator u -> h(u).
    Closed(Evaluator),
    /// Inverse evaluator x -> h_inv(x) on (0, b); h(u) recovered by
    /// monotone bisection.
    Inverse { hinv: Evaluator, b: f64 },
    /// h = base^exponent with exponent >= 1.
    Power { base: Arc<ResponseFunction>, exponent: f64 },
}

pub struct ResponseFunction {
    kind: ResponseKind,
    form: Form,
    h0: f64,
    integral: OnceLock<std::result::Result<f64, String>>,
}

impl fmt::Debug for ResponseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ResponseFunction({})", self.kind.key())
    }
}

/// Quadrature accuracy for h_inv evaluations; tight because the closed-form
/// cross-checks (gamma(1/2) against sech^2) are asserted at 1e-10.
fn hinv_opts() -> QuadOpts {
    QuadOpts { rel_tol: 1e-12, abs_tol: 1e-16, max_subdiv: 1_000_000 }
}

/// h_inv of the gamma family: alpha * int_x^1 z^-1 (1-z)^(alpha-1) dz.
/// The 1/z log divergence at x -> 0 is split off analytically,
///   h_inv(x) = -alpha ln x + alpha int_0^(1-x) (w^(alpha-1) - 1)/(1-w) dw,
/// and the remainder is integrated after w = v^2, where its integrand
/// 2 (v^(2 alpha - 1) - v)/(1 - v^2) stays bounded with the removable value
/// 2 - 2 alpha at v = 1.
fn gamma_family_hinv(alpha: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0 && x <= 1.0);
    if x >= 1.0 {
        return 0.0;
    }
    let rest = quad::adaptive(
        |v| 2.0 * (v.powf(2.0 * alpha - 1.0) - v) / (1.0 - v * v),
        0.0,
        (1.0 - x).sqrt(),
        &hinv_opts(),
    )
    .unwrap_or(f64::NAN);
    alpha * (rest - x.ln())
}

fn s2_family_hinv(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x <= 1.0);
    x.ln() + 2.0 / x.sqrt() - 2.0
}

/// Build a response function from its constructor description.
///
/// Parameters are domain-checked here; Condition A itself (including the
/// indicator exclusion) is enforced by [`ResponseFunction::validate`], so
/// indicator kinds construct fine and fail validation, matching the CLI
/// contract of rejecting them at use time with exit code 3.
pub fn make_response(kind: ResponseKind) -> Result<ResponseFunction> {
    let finite_pos = |v: f64, what: &str| -> Result<()> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(SntError::InvalidParameter(format!("{what} must be finite and > 0, got {v}")))
        }
    };
    match &kind {
        ResponseKind::GammaFamily { alpha } => {
            finite_pos(*alpha, "gamma family alpha")?;
            let a = *alpha;
            Ok(ResponseFunction {
                kind,
                form: Form::Inverse {
                    hinv: Arc::new(move |x| gamma_family_hinv(a, x)),
                    b: 1.0,
                },
                h0: 1.0,
                integral: OnceLock::new(),
            })
        }
        ResponseKind::S2Family => Ok(ResponseFunction {
            kind,
            form: Form::Inverse { hinv: Arc::new(s2_family_hinv), b: 1.0 },
            h0: 1.0,
            integral: OnceLock::new(),
        }),
        ResponseKind::Sech2 => Ok(ResponseFunction {
            kind,
            form: Form::Closed(Arc::new(|u: f64| {
                let c = u.cosh();
                1.0 / (c * c)
            })),
            h0: 1.0,
            integral: OnceLock::new(),
        }),
        ResponseKind::Exponential => Ok(ResponseFunction {
            kind,
            form: Form::Closed(Arc::new(|u: f64| (-u).exp())),
            h0: 1.0,
            integral: OnceLock::new(),
        }),
        ResponseKind::Indicator { a, height } => {
            finite_pos(*a, "indicator width")?;
            finite_pos(*height, "indicator height")?;
            if *height > 1.0 + 1e-12 {
                return Err(SntError::InvalidParameter(format!(
                    "indicator height {height} exceeds the h(0+) <= 1 normalization"
                )));
            }
            let (aa, hh) = (*a, *height);
            Ok(ResponseFunction {
                kind,
                form: Form::Closed(Arc::new(move |u: f64| if u < aa { hh } else { 0.0 })),
                h0: hh,
                integral: OnceLock::new(),
            })
        }
        ResponseKind::Power { base, gamma } => {
            if !(gamma.is_finite() && *gamma > 0.0 && *gamma <= 1.0) {
                return Err(SntError::InvalidParameter(format!(
                    "power transform gamma must lie in (0, 1], got {gamma}"
                )));
            }
            let base_fn = make_response((**base).clone())?;
            base_fn.power_transform(*gamma)
        }
        ResponseKind::Custom { .. } => Err(SntError::InvalidParameter(
            "custom responses are built from evaluators via from_closed/from_inverse".into(),
        )),
    }
}

impl ResponseFunction {
    /// Wrap a user-supplied direct evaluator u -> h(u). Spot-checks
    /// monotonicity on a log-spaced probe grid.
    pub fn from_closed<F>(eval: F, name: &str) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let h0 = eval(0.0);
        if !(h0.is_finite() && h0 > 0.0) {
            return Err(SntError::InvalidParameter(format!("h(0) must be finite and > 0, got {h0}")));
        }
        let probe: Vec<f64> = probe_grid_u();
        let mut prev = h0;
        for &u in &probe {
            let v = eval(u);
            if !v.is_finite() || v < -1e-12 {
                return Err(SntError::InvalidParameter(format!("h({u}) = {v} is not admissible")));
            }
            if v > prev + 1e-12 * (1.0 + prev.abs()) {
                return Err(SntError::InvalidParameter(format!(
                    "monotonicity spot-check failed: h increases near u = {u}"
                )));
            }
            prev = v;
        }
        Ok(ResponseFunction {
            kind: ResponseKind::Custom { name: name.to_string() },
            form: Form::Closed(Arc::new(eval)),
            h0,
            integral: OnceLock::new(),
        })
    }

    /// Wrap a user-supplied generalized inverse x -> h_inv(x) on (0, b).
    pub fn from_inverse<F>(hinv: F, b: f64, name: &str) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(b.is_finite() && b > 0.0 && b <= 1.0) {
            return Err(SntError::InvalidParameter(format!(
                "inverse-form support bound must lie in (0, 1], got {b}"
            )));
        }
        let mut prev = f64::INFINITY;
        for i in 1..=32 {
            let x = b * i as f64 / 33.0;
            let v = hinv(x);
            if !v.is_finite() || v < -1e-12 {
                return Err(SntError::InvalidParameter(format!("h_inv({x}) = {v} is not admissible")));
            }
            if v > prev + 1e-12 * (1.0 + prev.abs()) {
                return Err(SntError::InvalidParameter(format!(
                    "monotonicity spot-check failed: h_inv increases near x = {x}"
                )));
            }
            prev = v;
        }
        Ok(ResponseFunction {
            kind: ResponseKind::Custom { name: name.to_string() },
            form: Form::Inverse { hinv: Arc::new(hinv), b },
            h0: b,
            integral: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> &ResponseKind {
        &self.kind
    }

    /// h(0+).
    pub fn h0(&self) -> f64 {
        self.h0
    }

    /// Evaluate h(u). Inverse forms invert h_inv by monotone bisection
    /// (absolute tolerance 1e-12, at most 200 halvings); the bracket signs
    /// are known analytically so the inverse evaluator is never called at
    /// its singular endpoints.
    pub fn eval(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        match &self.form {
            Form::Closed(f) => f(u),
            Form::Inverse { hinv, b } => {
                if u <= 0.0 {
                    return *b;
                }
                let mut lo = 0.0f64; // h_inv(0+) = +inf > u
                let mut hi = *b; // h_inv(b) = 0 <= u
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if hi - lo <= 1e-12 || mid <= lo || mid >= hi {
                        break;
                    }
                    if hinv(mid) > u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
            Form::Power { base, exponent } => base.eval(u).powf(*exponent),
        }
    }

    /// int_0^inf h(u) du, cached after the first computation.
    ///
    /// Closed forms integrate in u up to the point where h drops below
    /// 1e-12; inverse forms use the area identity int_0^inf h du =
    /// int_0^b h_inv(x) dx with dyadic refinement toward x = 0.
    pub fn integral(&self) -> Result<f64> {
        let cached = self.integral.get_or_init(|| {
            self.integral_uncached().map_err(|e| e.to_string())
        });
        cached.clone().map_err(SntError::Quadrature)
    }

    fn integral_uncached(&self) -> Result<f64> {
        let opts = QuadOpts { rel_tol: 1e-9, abs_tol: 1e-14, max_subdiv: 1_000_000 };
        match &self.form {
            Form::Closed(_) => {
                let cut = self.decay_point(1e-12)?;
                quad::adaptive(|u| self.eval(u), 0.0, cut, &opts)
            }
            Form::Inverse { hinv, b } => {
                match quad::dyadic_lower(|x| hinv(x), 0.0, *b, &opts)? {
                    DyadicOutcome::Converged(v) => Ok(v),
                    DyadicOutcome::Diverged => Err(SntError::Regime(
                        "integral of response diverges".into(),
                    )),
                }
            }
            Form::Power { base, exponent } => match &base.form {
                Form::Closed(_) => {
                    let cut = self.decay_point(1e-12)?;
                    quad::adaptive(|u| self.eval(u), 0.0, cut, &opts)
                }
                Form::Inverse { hinv, b } => {
                    // int_0^inf base(u)^e du = int_0^(b^e) hinv_base(x^(1/e)) dx
                    //                       = e * int_0^b hinv_base(y) y^(e-1) dy.
                    let e = *exponent;
                    let hinv = hinv.clone();
                    match quad::dyadic_lower(
                        move |y| e * hinv(y) * y.powf(e - 1.0),
                        0.0,
                        *b,
                        &opts,
                    )? {
                        DyadicOutcome::Converged(v) => Ok(v),
                        DyadicOutcome::Diverged => Err(SntError::Regime(
                            "integral of response diverges".into(),
                        )),
                    }
                }
                Form::Power { .. } => unreachable!("power transforms compose exponents"),
            },
        }
    }

    /// Smallest u (up to doubling resolution) with h(u) < level.
    pub(crate) fn decay_point(&self, level: f64) -> Result<f64> {
        let mut u = 1.0f64;
        for _ in 0..90 {
            if self.eval(u) < level {
                return Ok(u);
            }
            u *= 2.0;
        }
        Err(SntError::Quadrature(format!(
            "response does not decay below {level:e} (is it constant or an indicator of huge width?)"
        )))
    }

    /// h^(1/gamma) for gamma in (0, 1]; composes with an existing power.
    pub fn power_transform(&self, gamma: f64) -> Result<ResponseFunction> {
        if !(gamma.is_finite() && gamma > 0.0 && gamma <= 1.0) {
            return Err(SntError::InvalidParameter(format!(
                "power transform gamma must lie in (0, 1], got {gamma}"
            )));
        }
        match &self.form {
            Form::Power { base, exponent } => {
                let new_exp = exponent / gamma;
                let (base_kind, old_gamma) = match &self.kind {
                    ResponseKind::Power { base, gamma } => ((**base).clone(), *gamma),
                    _ => (base.kind.clone(), 1.0 / exponent),
                };
                Ok(ResponseFunction {
                    kind: ResponseKind::Power {
                        base: Box::new(base_kind),
                        gamma: old_gamma * gamma,
                    },
                    form: Form::Power { base: base.clone(), exponent: new_exp },
                    h0: base.h0.powf(new_exp),
                    integral: OnceLock::new(),
                })
            }
            _ => {
                if (gamma - 1.0).abs() < 1e-15 {
                    return Ok(self.shallow_clone());
                }
                let base = Arc::new(self.shallow_clone());
                Ok(ResponseFunction {
                    kind: ResponseKind::Power {
                        base: Box::new(self.kind.clone()),
                        gamma,
                    },
                    form: Form::Power { base: base.clone(), exponent: 1.0 / gamma },
                    h0: base.h0.powf(1.0 / gamma),
                    integral: OnceLock::new(),
                })
            }
        }
    }

    fn shallow_clone(&self) -> ResponseFunction {
        let form = match &self.form {
            Form::Closed(f) => Form::Closed(f.clone()),
            Form::Inverse { hinv, b } => Form::Inverse { hinv: hinv.clone(), b: *b },
            Form::Power { base, exponent } => {
                Form::Power { base: base.clone(), exponent: *exponent }
            }
        };
        ResponseFunction {
            kind: self.kind.clone(),
            form,
            h0: self.h0,
            integral: self.integral.clone(),
        }
    }

    /// Unit-intensity base weight and power exponent, when the family is
    /// known in closed form: the pair (w, e) with
    /// int_0^inf g(h(u)) du = int_0^1 g(z^e) z^-1 w(z) dz.
    pub(crate) fn base_weight(&self) -> Option<(BaseWeight, f64)> {
        fn base_of(kind: &ResponseKind) -> Option<BaseWeight> {
            match kind {
                ResponseKind::GammaFamily { alpha } => Some(BaseWeight::Beta1 { alpha: *alpha }),
                ResponseKind::Sech2 => Some(BaseWeight::Beta1 { alpha: 0.5 }),
                ResponseKind::Exponential => Some(BaseWeight::Uniform),
                ResponseKind::S2Family => Some(BaseWeight::S2Mixing),
                _ => None,
            }
        }
        match &self.kind {
            ResponseKind::Power { base, gamma } => {
                base_of(base).map(|w| (w, 1.0 / gamma))
            }
            k => base_of(k).map(|w| (w, 1.0)),
        }
    }

    /// Condition A checks plus regime classification for the pair (h, lambda).
    pub fn validate(&self, lambda: f64) -> Result<ValidationReport> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(SntError::InvalidParameter(format!(
                "intensity lambda must be finite and > 0, got {lambda}"
            )));
        }
        if !(self.h0 > 0.0 && self.h0 <= 1.0 + 1e-9) {
            return Err(SntError::ConditionA(format!(
                "h(0+) = {} violates 0 < h(0+) <= 1",
                self.h0
            )));
        }
        if let ResponseKind::Indicator { a, height } = &self.kind {
            return Err(SntError::ConditionA(format!(
                "h = {height} * 1[0, {a}) is an indicator response; Condition A excludes h of the form b * 1[0,a)"
            )));
        }
        let monotone_ok = self.probe_shape()?;
        let lambda_integral = match self.integral() {
            Ok(v) => lambda * v,
            Err(SntError::Regime(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let regime = if (lambda_integral - 1.0).abs() <= 1e-6 {
            Regime::Unit
        } else if lambda_integral < 1.0 {
            Regime::SubUnit
        } else {
            Regime::SuperUnit
        };
        Ok(ValidationReport {
            h0: self.h0,
            lambda_integral,
            regime,
            monotone_ok,
            note: regime.describe().to_string(),
        })
    }

    /// Monotone probe plus two-level (indicator-shaped) detection for
    /// custom evaluators. Named families are monotone by construction.
    fn probe_shape(&self) -> Result<bool> {
        if !matches!(self.kind, ResponseKind::Custom { .. }) {
            return Ok(true);
        }
        match &self.form {
            Form::Inverse { hinv, b } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 1..=48 {
                    let x = b * i as f64 / 49.0;
                    let v = hinv(x);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if hi - lo <= 1e-9 * (1.0 + hi.abs()) {
                    return Err(SntError::ConditionA(
                        "h_inv is constant on (0, b): h is an indicator b * 1[0,a), excluded by Condition A".into(),
                    ));
                }
                Ok(true)
            }
            _ => {
                let grid = probe_grid_u();
                let vals: Vec<f64> = grid.iter().map(|&u| self.eval(u)).collect();
                let tol = 1e-9 * (1.0 + self.h0);
                let two_level = vals
                    .iter()
                    .all(|&v| v.abs() <= tol || (v - self.h0).abs() <= tol);
                let has_zero = vals.iter().any(|&v| v.abs() <= tol);
                let has_top = vals.iter().any(|&v| (v - self.h0).abs() <= tol);
                if two_level && has_zero && has_top {
                    return Err(SntError::ConditionA(
                        "h takes only the values {0, h(0+)} on the probe grid: indicator responses b * 1[0,a) are excluded by Condition A".into(),
                    ));
                }
                Ok(true)
            }
        }
    }

    /// The probability mixing measure of (h, lambda) in the unit regime
    /// lambda * int h = 1 (checked to 1e-6).
    pub fn to_mixing_measure(&self, lambda: f64) -> Result<MixingMeasure> {
        let report = self.validate(lambda)?;
        if report.regime != Regime::Unit {
            return Err(SntError::Regime(format!(
                "mixing measure requires lambda * integral(h) = 1 within 1e-6, got {}",
                report.lambda_integral
            )));
        }
        match &self.kind {
            ResponseKind::GammaFamily { alpha } => MixingMeasure::beta1(*alpha),
            ResponseKind::Sech2 => MixingMeasure::beta1(0.5),
            ResponseKind::Exponential => MixingMeasure::uniform01(),
            ResponseKind::S2Family => MixingMeasure::s2_mixing(),
            _ => {
                // Generic absolutely-continuous case: density from a central
                // difference of h_inv. Signals non-smooth h_inv through the
                // mass check below.
                let hinv: Evaluator = match &self.form {
                    Form::Inverse { hinv, .. } => hinv.clone(),
                    _ => {
                        let me = self.shallow_clone();
                        let top = self.h0;
                        Arc::new(move |x: f64| numeric_hinv(&me, x, top))
                    }
                };
                let b = self.h0;
                let density: Evaluator = Arc::new(move |z: f64| {
                    let d = (1e-6 * b).min(0.5 * (b - z).min(z)).max(1e-12);
                    let slope = (hinv(z + d) - hinv(z - d)) / (2.0 * d);
                    (-lambda * z * slope).max(0.0)
                });
                let nu = MixingMeasure {
                    repr: MixingRepr::Density { density },
                    b,
                    label: format!("density(from {})", self.kind.key()),
                };
                let mass = nu.mass()?;
                if (mass - 1.0).abs() > 1e-4 {
                    return Err(SntError::InvalidParameter(format!(
                        "finite-difference mixing density has mass {mass}, not 1: h_inv appears non-differentiable; supply the measure on a grid instead"
                    )));
                }
                Ok(nu)
            }
        }
    }

    /// Log-convexity probe of h on a grid (>= 3 increasing points inside the
    /// support): uneven-spacing second differences of ln h.
    pub fn log_convexity_probe(&self, grid: &[f64]) -> Result<ConvexityReport> {
        if grid.len() < 3 {
            return Err(SntError::InvalidParameter(
                "log-convexity probe needs at least 3 grid points".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
            return Err(SntError::InvalidParameter(
                "probe grid must be non-negative and strictly increasing".into(),
            ));
        }
        let lnh: Vec<f64> = grid
            .iter()
            .map(|&u| {
                let v = self.eval(u);
                if v > 0.0 {
                    Ok(v.ln())
                } else {
                    Err(SntError::InvalidParameter(format!(
                        "probe point u = {u} is outside the support of h"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        let mut second = Vec::with_capacity(grid.len() - 2);
        for i in 1..grid.len() - 1 {
            let hl = grid[i] - grid[i - 1];
            let hr = grid[i + 1] - grid[i];
            let d = 2.0 * ((lnh[i + 1] - lnh[i]) / hr - (lnh[i] - lnh[i - 1]) / hl) / (hl + hr);
            second.push(d);
        }
        const TOL: f64 = 1e-8;
        let all_pos = second.iter().all(|&d| d > TOL);
        let all_neg = second.iter().all(|&d| d < -TOL);
        let all_zero = second.iter().all(|&d| d.abs() <= TOL);
        let classification = if all_zero {
            Convexity::LogLinear
        } else if all_pos {
            Convexity::LogConvex
        } else if all_neg {
            Convexity::LogConcave
        } else {
            Convexity::Mixed
        };
        Ok(ConvexityReport { classification, second_differences: second })
    }
}

/// Invert a closed-form response numerically (u with h(u) = x).
fn numeric_hinv(h: &ResponseFunction, x: f64, top: f64) -> f64 {
    if x >= top {
        return 0.0;
    }
    let mut hi = 1.0;
    for _ in 0..90 {
        if h.eval(hi) < x {
            break;
        }
        hi *= 2.0;
    }
    quad::bisect_root(|u| h.eval(u) - x, 0.0, hi, 1e-13 * hi.max(1.0), 200).unwrap_or(f64::NAN)
}

fn probe_grid_u() -> Vec<f64> {
    let mut g = vec![0.0];
    for i in 0..=47 {
        g.push(1e-6 * (64.0f64 / 1e-6).powf(i as f64 / 47.0));
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Unit,
    SubUnit,
    SuperUnit,
}

impl Regime {
    pub fn describe(&self) -> &'static str {
        match self {
            Regime::Unit => "unit regime: lambda * integral(h) = 1; fixed points have finite mean",
            Regime::SubUnit => "sub-unit regime: lambda * integral(h) < 1",
            Regime::SuperUnit => {
                "super-unit regime: lambda * integral(h) > 1; fixed points have infinite mean or do not exist"
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub h0: f64,
    pub lambda_integral: f64,
    pub regime: Regime,
    pub monotone_ok: bool,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convexity {
    LogConvex,
    LogConcave,
    LogLinear,
    Mixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub classification: Convexity,
    pub second_differences: Vec<f64>,
}

/// A finite measure nu on (0, b], b <= 1, tied to a response function by
/// nu(dz) = -lambda z dh_inv(z). Probability mass is required (1e-6) except
/// for the Dirac probe measures used in perpetuity experiments.
pub struct MixingMeasure {
    repr: MixingRepr,
    b: f64,
    label: String,
}

enum MixingRepr {
    Beta1 { alpha: f64 },
    Uniform01,
    S2Mixing,
    Dirac { at: f64 },
    Density { density: Evaluator },
}

impl fmt::Debug for MixingMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MixingMeasure({})", self.label)
    }
}

/// Finite-or-infinite outcome of a moment probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentValue {
    Finite(f64),
    Infinite,
}

impl MixingMeasure {
    /// Beta(1, alpha): density alpha (1-z)^(alpha-1) on (0, 1).
    pub fn beta1(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(SntError::InvalidParameter(format!(
                "Beta(1, alpha) needs alpha > 0, got {alpha}"
            )));
        }
        Ok(MixingMeasure {
            repr: MixingRepr::Beta1 { alpha },
            b: 1.0,
            label: format!("beta(1,{alpha})"),
        })
    }

    pub fn uniform01() -> Result<Self> {
        Ok(MixingMeasure { repr: MixingRepr::Uniform01, b: 1.0, label: "uniform(0,1)".into() })
    }

    /// Density z^(-1/2) - 1 on (0, 1); the measure of the s2 family.
    pub fn s2_mixing() -> Result<Self> {
        Ok(MixingMeasure { repr: MixingRepr::S2Mixing, b: 1.0, label: "s2-mixing".into() })
    }

    /// Point mass at `at` in (0, 1). delta_1 is excluded (its perpetuity is
    /// degenerate and its response is the unit indicator).
    pub fn dirac(at: f64) -> Result<Self> {
        if !(at.is_finite() && at > 0.0 && at < 1.0) {
            return Err(SntError::InvalidParameter(format!(
                "Dirac mixing point must lie in (0, 1) (delta_1 excluded), got {at}"
            )));
        }
        Ok(MixingMeasure { repr: MixingRepr::Dirac { at }, b: at, label: format!("dirac({at})") })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support_upper(&self) -> f64 {
        self.b
    }

    /// Total mass.
    pub fn mass(&self) -> Result<f64> {
        match &self.repr {
            MixingRepr::Beta1 { .. } | MixingRepr::Uniform01 | MixingRepr::Dirac { .. } => Ok(1.0),
            MixingRepr::S2Mixing => Ok(1.0),
            MixingRepr::Density { .. } => self.integrate_smoothed(|_| 1.0),
        }
    }

    /// int g dnu over the full support, with the family-specific smoothing
    /// substitutions (g may carry an integrable z^(eps-1) singularity at 0).
    pub fn integrate_smoothed<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        let opts = QuadOpts::default();
        match &self.repr {
            MixingRepr::Beta1 { alpha } => {
                weighted_unit_integral(BaseWeight::Beta1 { alpha: *alpha }, g, &opts)
            }
            MixingRepr::Uniform01 => weighted_unit_integral(BaseWeight::Uniform, g, &opts),
            MixingRepr::S2Mixing => weighted_unit_integral(BaseWeight::S2Mixing, g, &opts),
            MixingRepr::Dirac { at } => Ok(g(*at)),
            MixingRepr::Density { density } => {
                let d = density.clone();
                quad::adaptive(
                    move |v| {
                        let z = (v * v).max(f64::MIN_POSITIVE);
                        2.0 * v * d(z) * g(z)
                    },
                    0.0,
                    self.b.sqrt(),
                    &opts,
                )
            }
        }
    }

    /// int_lo^b z^-1 nu(dz) for lo > 0: the h_inv reconstruction integrand.
    fn z_inverse_from(&self, lo: f64) -> Result<f64> {
        let opts = QuadOpts { rel_tol: 1e-12, abs_tol: 1e-16, max_subdiv: 1_000_000 };
        if lo >= self.b {
            return Ok(0.0);
        }
        match &self.repr {
            MixingRepr::Beta1 { alpha } => Ok(gamma_family_hinv(*alpha, lo)),
            MixingRepr::Uniform01 => quad::adaptive(|z| 1.0 / z, lo, 1.0, &opts),
            MixingRepr::S2Mixing => {
                quad::adaptive(|z| z.powf(-1.5) - 1.0 / z, lo, 1.0, &opts)
            }
            MixingRepr::Dirac { at } => Ok(if lo < *at { 1.0 / at } else { 0.0 }),
            MixingRepr::Density { density } => {
                let d = density.clone();
                quad::adaptive(move |z| d(z) / z, lo, self.b, &opts)
            }
        }
    }

    /// int z^-eps nu(dz), eps in (0, 1], classified finite or infinite by
    /// dyadic refinement toward the singular end.
    pub fn neg_moment(&self, eps: f64) -> Result<MomentValue> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(SntError::InvalidParameter(format!(
                "moment exponent must lie in (0, 1], got {eps}"
            )));
        }
        let opts = QuadOpts { rel_tol: 1e-9, abs_tol: 1e-13, max_subdiv: 1_000_000 };
        let out = match &self.repr {
            MixingRepr::Beta1 { alpha } => {
                let a = *alpha;
                quad::dyadic_lower(
                    move |v| {
                        let z = (-((-v * v).ln_1p() / a).exp_m1()).max(f64::MIN_POSITIVE);
                        2.0 * v * z.powf(-eps)
                    },
                    0.0,
                    1.0,
                    &opts,
                )?
            }
            MixingRepr::Uniform01 => quad::dyadic_lower(
                move |v| 2.0 * v * (v * v).max(f64::MIN_POSITIVE).powf(-eps),
                0.0,
                1.0,
                &opts,
            )?,
            MixingRepr::S2Mixing => quad::dyadic_lower(
                move |v| 2.0 * (1.0 - v) * (v * v).max(f64::MIN_POSITIVE).powf(-eps),
                0.0,
                1.0,
                &opts,
            )?,
            MixingRepr::Dirac { at } => DyadicOutcome::Converged(at.powf(-eps)),
            MixingRepr::Density { density } => {
                let d = density.clone();
                quad::dyadic_lower(
                    move |v| {
                        let z = (v * v).max(f64::MIN_POSITIVE);
                        2.0 * v * d(z) * z.powf(-eps)
                    },
                    0.0,
                    self.b.sqrt(),
                    &opts,
                )?
            }
        };
        Ok(match out {
            DyadicOutcome::Converged(v) => MomentValue::Finite(v),
            DyadicOutcome::Diverged => MomentValue::Infinite,
        })
    }

    /// Whether `sample_a` has a closed-form inverse for this representation.
    pub fn has_closed_sampler(&self) -> bool {
        !matches!(self.repr, MixingRepr::Density { .. })
    }

    /// Draw A ~ nu (closed-form inverses; the generic density representation
    /// has no sampler).
    pub fn sample_a<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let u: f64 = rng.random::<f64>().clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        match &self.repr {
            MixingRepr::Beta1 { alpha } => Ok(1.0 - u.powf(1.0 / alpha)),
            MixingRepr::Uniform01 => Ok(u),
            // CDF 2 sqrt(z) - z inverts to z = (1 - sqrt(1-u))^2.
            MixingRepr::S2Mixing => {
                let r = 1.0 - (1.0 - u).sqrt();
                Ok(r * r)
            }
            MixingRepr::Dirac { at } => Ok(*at),
            MixingRepr::Density { .. } => Err(SntError::Unsupported(
                "sampling from a generic density mixing measure".into(),
            )),
        }
    }
}

/// Reconstruct the response function of a mixing measure:
/// h_inv(x) = int_x^b z^-1 nu(dz), then h by inversion. Dirac measures give
/// the indicator plateau (constructible here, rejected by `validate`).
/// The unit-regime normalization int_0^inf h = 1 is re-checked post hoc.
pub fn from_mixing_measure(nu: &MixingMeasure) -> Result<ResponseFunction> {
    if let MixingRepr::Dirac { at } = &nu.repr {
        return make_response(ResponseKind::Indicator { a: 1.0 / at, height: *at });
    }
    let b = nu.b;
    let label = nu.label.clone();
    let shared = match &nu.repr {
        MixingRepr::Beta1 { alpha } => MixingMeasure::beta1(*alpha)?,
        MixingRepr::Uniform01 => MixingMeasure::uniform01()?,
        MixingRepr::S2Mixing => MixingMeasure::s2_mixing()?,
        MixingRepr::Density { density } => MixingMeasure {
            repr: MixingRepr::Density { density: density.clone() },
            b,
            label: label.clone(),
        },
        MixingRepr::Dirac { .. } => unreachable!(),
    };
    let h = ResponseFunction {
        kind: ResponseKind::Custom { name: format!("from-nu:{label}") },
        form: Form::Inverse {
            hinv: Arc::new(move |x| shared.z_inverse_from(x).unwrap_or(f64::NAN)),
            b,
        },
        h0: b,
        integral: OnceLock::new(),
    };
    let total = h.integral()?;
    let mass = nu.mass()?;
    if (total - mass).abs() > 1e-6 * mass.max(1.0) {
        return Err(SntError::InvalidParameter(format!(
            "reconstructed response integrates to {total}, expected the measure mass {mass}"
        )));
    }
    Ok(h)
}

/// Parse a response key: `gamma:A`, `s2`, `sech2`, `exp`, `indicator:A`,
/// `pow:BASE:G` (BASE any non-power key, G in (0,1]).
pub fn parse_response_key(key: &str) -> Result<ResponseKind> {
    let bad = |msg: String| SntError::InvalidParameter(msg);
    match key {
        "s2" => return Ok(ResponseKind::S2Family),
        "sech2" => return Ok(ResponseKind::Sech2),
        "exp" => return Ok(ResponseKind::Exponential),
        _ => {}
    }
    if let Some(rest) = key.strip_prefix("gamma:") {
        let alpha: f64 = rest
            .parse()
            .map_err(|_| bad(format!("bad gamma family parameter in {key:?}")))?;
        return Ok(ResponseKind::GammaFamily { alpha });
    }
    if let Some(rest) = key.strip_prefix("indicator:") {
        let a: f64 = rest
            .parse()
            .map_err(|_| bad(format!("bad indicator width in {key:?}")))?;
        return Ok(ResponseKind::Indicator { a, height: 1.0 });
    }
    if let Some(rest) = key.strip_prefix("pow:") {
        let cut = rest
            .rfind(':')
            .ok_or_else(|| bad(format!("power key needs pow:BASE:GAMMA, got {key:?}")))?;
        let (base_key, gamma_str) = rest.split_at(cut);
        let gamma: f64 = gamma_str[1..]
            .parse()
            .map_err(|_| bad(format!("bad power exponent in {key:?}")))?;
        let base = parse_response_key(base_key)?;
        if matches!(base, ResponseKind::Power { .. }) {
            return Err(bad(format!("nested power keys are not accepted: {key:?}")));
        }
        return Ok(ResponseKind::Power { base: Box::new(base), gamma });
    }
    Err(bad(format!(
        "unknown response key {key:?} (expected gamma:A, s2, sech2, exp, indicator:A or pow:BASE:G)"
    )))
}

/// Parse a mixing-measure key: `nu-beta:1,A`, `nu-uniform`, `nu-s2`.
pub fn parse_nu_key(key: &str) -> Result<MixingMeasure> {
    match key {
        "nu-uniform" => return MixingMeasure::uniform01(),
        "nu-s2" => return MixingMeasure::s2_mixing(),
        _ => {}
    }
    if let Some(rest) = key.strip_prefix("nu-beta:") {
        let (one, alpha_str) = rest.split_once(',').ok_or_else(|| {
            SntError::InvalidParameter(format!("nu-beta key needs nu-beta:1,ALPHA, got {key:?}"))
        })?;
        if one.trim() != "1" {
            return Err(SntError::InvalidParameter(format!(
                "only Beta(1, alpha) mixing measures are supported, got {key:?}"
            )));
        }
        let alpha: f64 = alpha_str
            .parse()
            .map_err(|_| SntError::InvalidParameter(format!("bad alpha in {key:?}")))?;
        return MixingMeasure::beta1(alpha);
    }
    Err(SntError::InvalidParameter(format!(
        "unknown mixing measure key {key:?} (expected nu-beta:1,A, nu-uniform or nu-s2)"
    )))
}
