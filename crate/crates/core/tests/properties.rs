//! Property tests for the crate-level invariants: transform round-trips,
//! alignment algebra, multiset conservation of surrogates, and the
//! mass-exponent identities.

use proptest::prelude::*;

use multifract::ingest::{align, log_returns};
use multifract::multifractal::{legendre_spectrum, mass_exponents, mdm};
use multifract::scaling::{segment_covariance, QGrid, ScalingResult};
use multifract::series::{SeriesKind, TimeSeries};
use multifract::surrogates::{iaaft, shuffle};

fn returns_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.1f64..0.1, 2..200)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_returns_invert_exponentiated_cumsum(r in returns_strategy(), c in -2.0f64..2.0) {
        // prices = exp(cumsum(r) + c); log_returns must recover r.
        let mut acc = c;
        let mut prices = vec![c.exp()];
        for x in &r {
            acc += x;
            prices.push(acc.exp());
        }
        let series = TimeSeries::from_values("p", SeriesKind::Price, prices).unwrap();
        let back = log_returns(&series).unwrap();
        prop_assert_eq!(back.len(), r.len());
        for (a, b) in back.values().iter().zip(&r) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn align_is_commutative_and_idempotent(
        drop_x in prop::collection::hash_set(0usize..400, 0..120),
        drop_y in prop::collection::hash_set(0usize..400, 0..120),
    ) {
        let mk = |label: &str, dropped: &std::collections::HashSet<usize>| {
            let times: Vec<i64> = (0..400i64)
                .filter(|t| !dropped.contains(&(*t as usize)))
                .collect();
            let values: Vec<f64> = times.iter().map(|t| (*t as f64).sin()).collect();
            TimeSeries::new(label, SeriesKind::Generic, times, values).unwrap()
        };
        let x = mk("x", &drop_x);
        let y = mk("y", &drop_y);
        // Dropping at most 120 of 400 from each side leaves >= 160 common.
        let xy = align(&x, &y).unwrap();
        let yx = align(&y, &x).unwrap();
        prop_assert_eq!(xy.common_timestamps(), yx.common_timestamps());

        let again = align(xy.x(), xy.y()).unwrap();
        prop_assert_eq!(again.x().values(), xy.x().values());
        prop_assert_eq!(again.y().values(), xy.y().values());
        prop_assert_eq!(again.common_timestamps(), xy.common_timestamps());
    }

    #[test]
    fn surrogates_conserve_the_value_multiset(
        values in prop::collection::vec(-1e6f64..1e6, 4..128),
        seed in any::<u64>(),
    ) {
        let series = TimeSeries::from_values("s", SeriesKind::Generic, values.clone()).unwrap();
        let shuffled = shuffle(&series, seed).unwrap();
        prop_assert_eq!(sorted(shuffled.values()), sorted(&values));

        let out = iaaft(&series, seed, 50, 1e-6).unwrap();
        prop_assert_eq!(sorted(out.series.values()), sorted(&values));
    }

    #[test]
    fn mass_exponent_identity_holds(
        h0 in 0.2f64..1.2,
        slope in -0.1f64..0.0,
        curve in -0.01f64..0.01,
    ) {
        let qs = QGrid::default_grid();
        let orders = qs.orders().to_vec();
        let h: Vec<Option<f64>> = orders
            .iter()
            .map(|&q| Some(h0 + slope * q + curve * q * q))
            .collect();
        let n = orders.len();
        let scaling = ScalingResult::from_parts(
            orders.clone(),
            h,
            vec![Some(0.0); n],
            vec![Some(1.0); n],
            (30, 2000),
        )
        .unwrap();
        let tau = mass_exponents(&scaling).unwrap();
        for (i, &q) in orders.iter().enumerate() {
            let h = scaling.h[i].unwrap();
            prop_assert!((tau[i] + 1.0 - q * h).abs() < 1e-12);
        }
        // Legendre: f at the q = 0 grid point is exactly 1.
        let (_, f_alpha) = legendre_spectrum(&tau, &qs).unwrap();
        let zero = qs.index_of(0.0).unwrap();
        prop_assert_eq!(f_alpha[zero], Some(1.0));
    }

    #[test]
    fn covariance_sign_flips_with_either_argument(
        x in prop::collection::vec(-10.0f64..10.0, 2..64),
    ) {
        let y: Vec<f64> = x.iter().rev().cloned().collect();
        let neg_y: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = segment_covariance(&x, &y);
        let b = segment_covariance(&x, &neg_y);
        prop_assert_eq!(a, -b);
        prop_assert_eq!(segment_covariance(&x, &x) >= 0.0, true);
    }

    #[test]
    fn mdm_bounds(a in -1.0f64..2.0, b in -1.0f64..2.0) {
        let v = mdm(a, b);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= 0.5 * (a.abs() + b.abs()) + 0.5 + 1e-12);
        if a == 0.5 && b == 0.5 {
            prop_assert_eq!(v, 0.0);
        } else if (a - 0.5).abs() > 1e-9 || (b - 0.5).abs() > 1e-9 {
            prop_assert!(v > 0.0);
        }
    }
}

#[test]
fn anti_persistent_fgn_lands_in_its_regime() {
    use multifract::scaling::{dfa, ScaleGrid};
    use multifract::synth::{generate, SynthModel, SynthSpec};
    let s = generate(&SynthSpec::new(SynthModel::Fgn { hurst: 0.3 }, 5000, 7)).unwrap();
    let ss = ScaleGrid::default_for_length(5000).unwrap();
    let d = dfa(&s, &ss, 1, true).unwrap();
    assert!((0.25..=0.36).contains(&d.h2), "h2 = {}", d.h2);
}
