//! Kolmogorov-Smirnov machinery and empirical transform estimators used by
//! the verification commands.

use crate::dist::EmpiricalSample;
use crate::error::{Result, SntError};
use serde::Serialize;

/// Asymptotic Kolmogorov critical coefficient c(alpha) with the two pinned
/// values the acceptance runs use; other levels fall back to the closed form
/// sqrt(-ln(alpha/2)/2).
pub fn ks_critical_coefficient(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SntError::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    if (alpha - 0.01).abs() < 1e-12 {
        return Ok(1.628);
    }
    if (alpha - 0.05).abs() < 1e-12 {
        return Ok(1.358);
    }
    Ok((-(alpha / 2.0).ln() / 2.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct KsReport {
    pub schema: u32,
    pub test: String,
    pub statistic: f64,
    pub critical: f64,
    pub alpha: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    pub pass: bool,
}

/// One-sample KS against a CDF closure. The asymptotic critical value
/// c(alpha)/sqrt(n) needs n >= 100; the CDF is spot-checked for monotonicity
/// and range on the sample's own quantiles before the statistic is trusted.
pub fn ks_one_sample<F: Fn(f64) -> f64>(
    sample: &EmpiricalSample,
    cdf: F,
    alpha: f64,
    test_name: &str,
) -> Result<KsReport> {
    let n = sample.n();
    if n < 100 {
        return Err(SntError::InvalidParameter(format!(
            "one-sample KS needs n >= 100 for the asymptotic critical value, got {n}"
        )));
    }
    let xs = sample.values();
    let mut prev = -f64::EPSILON;
    for i in 0..100 {
        let x = xs[(i * (n - 1)) / 99];
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) || f.is_nan() {
            return Err(SntError::InvalidParameter(format!(
                "reference CDF returned {f} at x = {x}"
            )));
        }
        if f < prev - 1e-12 {
            return Err(SntError::InvalidParameter(format!(
                "reference CDF is not monotone near x = {x}"
            )));
        }
        prev = f;
    }
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let hi = (i + 1) as f64 / nf - f; // D+
        let lo = f - i as f64 / nf; // D-
        d = d.max(hi).max(lo);
    }
    let critical = ks_critical_coefficient(alpha)? / nf.sqrt();
    Ok(KsReport {
        schema: 1,
        test: test_name.to_string(),
        statistic: d,
        critical,
        alpha,
        n,
        n2: None,
        pass: d < critical,
    })
}

/// Two-sample KS by a single merge scan of the sorted samples; critical
/// value c(alpha) * sqrt((n1 + n2)/(n1 n2)).
pub fn ks_two_sample(
    a: &EmpiricalSample,
    b: &EmpiricalSample,
    alpha: f64,
    test_name: &str,
) -> Result<KsReport> {
    let (n1, n2) = (a.n(), b.n());
    if n1 < 100 || n2 < 100 {
        return Err(SntError::InvalidParameter(format!(
            "two-sample KS needs both n >= 100, got {n1} and {n2}"
        )));
    }
    let (xs, ys) = (a.values(), b.values());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n1 && j < n2 {
        // step to the next distinct pooled value and move BOTH counters past
        // every tie there, so ties never register a spurious difference
        let t = xs[i].min(ys[j]);
        while i < n1 && xs[i] <= t {
            i += 1;
        }
        while j < n2 && ys[j] <= t {
            j += 1;
        }
        let diff = (i as f64 / n1 as f64 - j as f64 / n2 as f64).abs();
        d = d.max(diff);
    }
    let nf = (n1 + n2) as f64 / (n1 as f64 * n2 as f64);
    let critical = ks_critical_coefficient(alpha)? * nf.sqrt();
    Ok(KsReport {
        schema: 1,
        test: test_name.to_string(),
        statistic: d,
        critical,
        alpha,
        n: n1,
        n2: Some(n2),
        pass: d < critical,
    })
}

/// Monte Carlo estimate of E exp(-s X): (mean, standard error).
pub fn empirical_lst(values: &[f64], s: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(SntError::InvalidParameter("empty sample".into()));
    }
    if !(s >= 0.0) {
        return Err(SntError::InvalidParameter(format!(
            "transform argument must be >= 0, got {s}"
        )));
    }
    let n = values.len() as f64;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for &x in values {
        let t = (-s * x).exp();
        sum += t;
        sumsq += t * t;
    }
    let mean = sum / n;
    let var = ((sumsq / n) - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Monte Carlo moment generating function at theta > 0; reports overflow
/// honestly instead of returning inf (heavy-tailed samples have no MGF).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MgfOutcome {
    Finite { value: f64, stderr: f64 },
    Overflow,
}

pub fn empirical_mgf(values: &[f64], theta: f64) -> Result<MgfOutcome> {
    if values.is_empty() {
        return Err(SntError::InvalidParameter("empty sample".into()));
    }
    if !theta.is_finite() {
        return Err(SntError::InvalidParameter(format!("theta must be finite, got {theta}")));
    }
    let n = values.len() as f64;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for &x in values {
        let t = (theta * x).exp();
        if !t.is_finite() || t > 1e300 {
            return Ok(MgfOutcome::Overflow);
        }
        sum += t;
        sumsq += t * t;
    }
    if !sum.is_finite() || !sumsq.is_finite() {
        return Ok(MgfOutcome::Overflow);
    }
    let mean = sum / n;
    let var = ((sumsq / n) - mean * mean).max(0.0);
    Ok(MgfOutcome::Finite { value: mean, stderr: (var / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{sample, DistSpec};

    #[test]
    fn critical_coefficients() {
        assert_eq!(ks_critical_coefficient(0.01).unwrap(), 1.628);
        assert_eq!(ks_critical_coefficient(0.05).unwrap(), 1.358);
        // closed form at alpha = 0.10: sqrt(-ln 0.05 / 2) ~ 1.2239
        assert!((ks_critical_coefficient(0.10).unwrap() - 1.2239).abs() < 1e-3);
        assert!(ks_critical_coefficient(0.0).is_err());
    }

    #[test]
    fn one_sample_accepts_the_truth_and_rejects_a_shift() {
        let spec = DistSpec::Gamma { shape: 2.0, scale: 1.0 };
        let s = sample(&spec, 20_000, 7).unwrap();
        let ok = ks_one_sample(&s, |x| crate::dist::cdf(&spec, x).unwrap(), 0.01, "true").unwrap();
        assert!(ok.pass, "stat {} crit {}", ok.statistic, ok.critical);

        let wrong = DistSpec::Gamma { shape: 2.0, scale: 1.15 };
        let bad =
            ks_one_sample(&s, |x| crate::dist::cdf(&wrong, x).unwrap(), 0.01, "shifted").unwrap();
        assert!(!bad.pass, "shifted scale must be detected at n = 20000");
    }

    #[test]
    fn one_sample_guards() {
        let s = EmpiricalSample::new(vec![1.0; 50], 0, "tiny".into()).unwrap();
        assert!(ks_one_sample(&s, |_| 0.5, 0.01, "t").is_err());
        let s2 = sample(&DistSpec::Gamma { shape: 1.0, scale: 1.0 }, 200, 0).unwrap();
        // non-monotone "CDF" probe is refused
        assert!(ks_one_sample(&s2, |x| (x * 10.0).sin().abs(), 0.01, "t").is_err());
    }

    #[test]
    fn two_sample_same_law_passes_different_law_fails() {
        let spec = DistSpec::Gamma { shape: 1.5, scale: 1.0 };
        // seeds far apart so no chunk seed collides (seed XOR chunk scheme)
        let a = sample(&spec, 15_000, 42).unwrap();
        let b = sample(&spec, 15_000, 9001).unwrap();
        let rep = ks_two_sample(&a, &b, 0.01, "same").unwrap();
        assert!(rep.pass, "stat {} crit {}", rep.statistic, rep.critical);

        let c = sample(&DistSpec::Gamma { shape: 1.5, scale: 1.12 }, 15_000, 4242).unwrap();
        let rep2 = ks_two_sample(&a, &c, 0.01, "diff").unwrap();
        assert!(!rep2.pass);
    }

    #[test]
    fn ks_statistic_is_invariant_under_monotone_transforms() {
        // KS of X against F equals KS of g(X) against F o g^{-1} for
        // increasing g; verify with g = sqrt on an exponential sample.
        let spec = DistSpec::PositiveLinnik { index: 1.0, scale: 1.0 };
        let s = sample(&spec, 5_000, 3).unwrap();
        let direct = ks_one_sample(&s, |x| 1.0 - (-x).exp(), 0.01, "d").unwrap();
        let transformed: Vec<f64> = s.values().iter().map(|v| v.sqrt()).collect();
        let ts = EmpiricalSample::new(transformed, 3, "sqrt".into()).unwrap();
        let indirect = ks_one_sample(&ts, |y| 1.0 - (-(y * y)).exp(), 0.01, "i").unwrap();
        assert!((direct.statistic - indirect.statistic).abs() < 1e-12);
    }

    #[test]
    fn empirical_lst_matches_closed_form() {
        let spec = DistSpec::Gamma { shape: 2.0, scale: 0.5 };
        let s = sample(&spec, 50_000, 17).unwrap();
        for t in [0.5, 1.0, 4.0] {
            let (est, se) = empirical_lst(s.values(), t).unwrap();
            let truth = crate::dist::lst(&spec, t);
            assert!((est - truth).abs() < 4.0 * se + 1e-9, "t={t}: {est} vs {truth} (se {se})");
        }
    }

    #[test]
    fn empirical_mgf_detects_overflow() {
        let vals = vec![1.0, 2.0, 800.0];
        assert_eq!(empirical_mgf(&vals, 1.0).unwrap(), MgfOutcome::Overflow);
        match empirical_mgf(&vals, 1e-3).unwrap() {
            MgfOutcome::Finite { value, .. } => assert!(value > 1.0),
            MgfOutcome::Overflow => panic!("small theta must be finite"),
        }
    }
}
