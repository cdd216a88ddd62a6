//! Property tests over the public API: structural invariants that must hold
//! for every parameter choice, not just the handful of named scenarios.

use proptest::prelude::*;
use snt_core::dist::{self, DistSpec};
use snt_core::response::{
    from_mixing_measure, make_response, parse_response_key, ResponseKind,
};
use snt_core::solver::atom_root;
use snt_core::stats;
use snt_core::{parse_dist_spec, SntConfig};

/// Specs with a cheap, closed-form transform (no sampling involved).
fn lst_spec() -> impl Strategy<Value = DistSpec> {
    prop_oneof![
        (0.2f64..4.0, 0.2f64..4.0).prop_map(|(shape, scale)| DistSpec::Gamma { shape, scale }),
        (0.2f64..1.0, 0.2f64..4.0).prop_map(|(index, scale)| DistSpec::PositiveLinnik {
            index,
            scale
        }),
        (0.3f64..3.0, 0.2f64..3.0, 0.2f64..1.0).prop_map(|(shape, scale, index)| {
            DistSpec::GeneralizedLinnik { shape, scale, index }
        }),
        (0.3f64..5.0).prop_map(|delta| DistSpec::S2 { delta }),
        (0.3f64..5.0, 0.2f64..1.0).prop_map(|(delta, rho)| DistSpec::S2Rho { delta, rho }),
        (0.1f64..5.0).prop_map(|m| DistSpec::PointMass { m }),
    ]
}

fn any_spec() -> impl Strategy<Value = DistSpec> {
    prop_oneof![
        lst_spec(),
        (lst_spec(), 0.2f64..0.95).prop_map(|(base, alpha)| DistSpec::StableSubordinated {
            base: Box::new(base),
            alpha
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Laplace transforms are non-increasing and midpoint log-convex in s.
    #[test]
    fn lst_monotone_and_log_convex(spec in lst_spec(), s in 0.01f64..10.0, d in 0.01f64..5.0) {
        let p0 = dist::lst(&spec, s);
        let p1 = dist::lst(&spec, s + d);
        let p2 = dist::lst(&spec, s + 2.0 * d);
        prop_assert!((0.0..=1.0).contains(&p0));
        prop_assert!(p1 <= p0 + 1e-14, "not monotone: {p0} -> {p1}");
        prop_assert!(p2 <= p1 + 1e-14, "not monotone: {p1} -> {p2}");
        // phi(s) phi(s + 2d) >= phi(s + d)^2, with slack for roundoff
        prop_assert!(
            p0 * p2 >= p1 * p1 * (1.0 - 1e-12) - 1e-300,
            "not log-convex at s={s}, d={d}: {p0} {p1} {p2}"
        );
    }

    /// Distribution keys parse back to the same spec.
    #[test]
    fn dist_keys_round_trip(spec in any_spec()) {
        let key = spec.key();
        let back = parse_dist_spec(&key).expect("generated keys parse");
        prop_assert_eq!(spec, back, "{}", key);
    }

    /// Response keys parse back to an equal key.
    #[test]
    fn response_keys_round_trip(
        alpha in 0.2f64..4.0,
        gamma in 0.2f64..1.0,
        pick in 0usize..5,
    ) {
        let kind = match pick {
            0 => ResponseKind::GammaFamily { alpha },
            1 => ResponseKind::S2Family,
            2 => ResponseKind::Sech2,
            3 => ResponseKind::Exponential,
            _ => ResponseKind::Power { base: Box::new(ResponseKind::S2Family), gamma },
        };
        let key = kind.key();
        let back = parse_response_key(&key).expect("generated keys parse");
        prop_assert_eq!(key, back.key());
    }

    /// The automatic horizon really pins the response tail mass at the
    /// requested truncation level (closed forms checked analytically).
    #[test]
    fn horizon_matches_truncation_level(
        log_eps in -6.0f64..-3.0,
        exponential in proptest::bool::ANY,
    ) {
        let eps = 10f64.powf(log_eps);
        let kind = if exponential { ResponseKind::Exponential } else { ResponseKind::Sech2 };
        let cfg = SntConfig::new(1.0, make_response(kind).unwrap())
            .unwrap()
            .with_trunc_eps(eps)
            .unwrap();
        let t = cfg.horizon().unwrap();
        // both responses have unit integral, so the target tail mass is eps
        let tail = if exponential {
            (-t).exp()
        } else {
            let e = (-2.0 * t).exp();
            2.0 * e / (1.0 + e)
        };
        prop_assert!(tail <= eps * 1.01, "tail {tail:e} above eps {eps:e} at T={t}");
        prop_assert!(tail >= eps * 0.5, "horizon wastefully deep: tail {tail:e} vs eps {eps:e}");
    }

    /// Mittag-Leffler values decrease in the argument and stay in (0, 1].
    /// The series term peak grows like exp(y^(1/index)) while the value can
    /// shrink like exp(-y), so near the y ~ 13^index edge of the domain the
    /// cancellation guard may honestly refuse (it trips earlier as index
    /// nears 1). Refusals return Err rather than noise and are pinned by
    /// unit tests; the property here is monotonicity wherever the series
    /// does evaluate.
    #[test]
    fn mittag_leffler_decreasing(index in 0.15f64..1.0, fy in 0.0f64..0.6, fd in 0.01f64..0.35) {
        let cap = 13f64.powf(index);
        let (y, d) = (fy * cap, fd * cap);
        if let (Ok(a), Ok(b)) =
            (dist::mittag_leffler_neg(index, y), dist::mittag_leffler_neg(index, y + d))
        {
            prop_assert!(a > 0.0 && a <= 1.0, "{a}");
            prop_assert!(b <= a + 1e-13, "E({}) = {a} < E({}) = {b}", y, y + d);
        }
    }

    /// The atom equation z = exp(-b(1-z)): solutions satisfy the defining
    /// equation to near machine precision above unit load, none below it.
    #[test]
    fn atom_root_solves_equation(b in 1.0001f64..30.0, small in 0.01f64..1.0) {
        let z = atom_root(b).unwrap().expect("root exists above unit load");
        prop_assert!(z > 0.0 && z < 1.0 / b + 1e-12);
        let residual = ((-b * (1.0 - z)).exp() - z).abs();
        prop_assert!(residual < 1e-12, "b={b}: z={z}, residual={residual:e}");
        prop_assert!(atom_root(small).unwrap().is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Samples are sorted, finite, non-negative, and seed-deterministic.
    #[test]
    fn samples_are_clean_and_deterministic(spec in any_spec(), seed in 0u64..1_000_000) {
        let a = dist::sample(&spec, 256, seed).unwrap();
        prop_assert!(a.values().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(a.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        let b = dist::sample(&spec, 256, seed).unwrap();
        prop_assert_eq!(a.to_csv_string(), b.to_csv_string());
    }

    /// A sample compared against itself has KS statistic zero; the same
    /// law sampled under two seeds stays under the 1% band (up to the
    /// false-positive risk excluded by the fixed seeds here).
    #[test]
    fn ks_two_sample_reflexive(seed in 0u64..100_000) {
        let spec = DistSpec::Gamma { shape: 1.5, scale: 0.8 };
        let a = dist::sample(&spec, 512, seed).unwrap();
        let rep = stats::ks_two_sample(&a, &a, 0.01, "self").unwrap();
        prop_assert_eq!(rep.statistic, 0.0);
        prop_assert!(rep.pass);
    }

    /// Round trip response -> mixing measure -> response preserves the
    /// response pointwise, not just structurally.
    #[test]
    fn mixing_measure_round_trip(alpha in 0.3f64..3.0) {
        let h = make_response(ResponseKind::GammaFamily { alpha }).unwrap();
        let nu = h.to_mixing_measure(1.0).unwrap();
        let back = from_mixing_measure(&nu).unwrap();
        for u in [0.05f64, 0.3, 1.0, 2.5] {
            let (a, b) = (h.eval(u), back.eval(u));
            prop_assert!((a - b).abs() < 1e-8, "alpha={alpha}, u={u}: {a} vs {b}");
        }
    }
}

#[test]
fn ks_one_sample_rejects_small_samples() {
    let spec = DistSpec::Gamma { shape: 1.0, scale: 1.0 };
    let sample = dist::sample(&spec, 99, 7).unwrap();
    assert!(stats::ks_one_sample(&sample, |x| 1.0 - (-x).exp(), 0.01, "tiny").is_err());
}
