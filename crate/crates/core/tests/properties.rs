//! Property tests for the crate-wide invariants.

use proptest::prelude::*;

use tickerflow_core::econometrics::{tail_probability, TailDist};
use tickerflow_core::eventstudy::{car7, CapmFit};
use tickerflow_core::marketdata::{PriceSeries, TradingCalendar};
use tickerflow_core::signals::{entropy_of, normalized_sentiment_change};
use tickerflow_core::table::format_significant;

fn weekday_calendar(n: usize) -> TradingCalendar {
    use chrono::Datelike;
    let mut dates = Vec::new();
    let mut d: chrono::NaiveDate = "2020-01-06".parse().unwrap();
    while dates.len() < n {
        if d.weekday().number_from_monday() <= 5 {
            dates.push(d);
        }
        d = d.succ_opt().unwrap();
    }
    TradingCalendar::new(dates).unwrap()
}

proptest! {
    #[test]
    fn align_is_monotone(mut offsets in prop::collection::vec(0i64..200_000_000, 2..40)) {
        offsets.sort_unstable();
        let cal = weekday_calendar(700);
        let base = cal.close_ts(0) - 86_400;
        let mut prev = None;
        for off in offsets {
            if let Ok(idx) = cal.align(base + off) {
                if let Some(p) = prev {
                    prop_assert!(idx >= p);
                }
                prev = Some(idx);
            }
        }
    }

    #[test]
    fn formatted_reals_keep_six_significant_digits(x in -1.0e9f64..1.0e9) {
        prop_assume!(x != 0.0 && x.abs() > 1e-9);
        let s = format_significant(x, 6);
        let parsed: f64 = s.parse().unwrap();
        let rel = ((parsed - x) / x).abs();
        prop_assert!(rel < 5e-6, "{x} -> {s} (rel {rel:e})");
        // re-rounding an already rounded value is the identity
        prop_assert_eq!(format_significant(parsed, 6), s);
    }

    #[test]
    fn entropy_bounded_by_log_k(raw in prop::collection::vec(1e-6f64..1.0, 1..15)) {
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let h = entropy_of(&probs);
        prop_assert!(h >= -1e-12);
        prop_assert!(h <= (probs.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn ds_hat_telescopes(
        s in prop::collection::vec(-5.0f64..5.0, 8..60),
        seed in 0u64..1000,
    ) {
        let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        let n: Vec<Option<f64>> = (0..s.len())
            .map(|_| {
                state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
                Some(1.0 + (state >> 40) as f64 / 1e3)
            })
            .collect();
        let (s_hat, d) = normalized_sentiment_change(&s, &n);
        let total: f64 = d.iter().flatten().sum();
        let expect = s_hat[s.len() - 1].unwrap() - s_hat[0].unwrap();
        prop_assert!((total - expect).abs() < 1e-9);
    }

    #[test]
    fn forward_return_decomposition(
        steps in prop::collection::vec(-0.2f64..0.2, 4..40),
        cut in 1usize..3,
    ) {
        let mut prices = vec![100.0f64];
        for s in &steps {
            let last = *prices.last().unwrap();
            prices.push(last * s.exp());
        }
        let len = prices.len();
        let series = PriceSeries::new("X", (0..len).collect(), prices).unwrap();
        let m_total = len - 1;
        let m1 = cut.min(m_total - 1);
        let whole = series.forward_return(0, m_total).unwrap();
        let split = series.forward_return(0, m1).unwrap()
            + series.forward_return(m1, m_total - m1).unwrap();
        prop_assert!((whole - split).abs() < 1e-12);
        // and the exponential round trip recovers the terminal price
        let recon = whole.exp() * 100.0;
        let last = series.adj_close[len - 1];
        prop_assert!(((recon - last) / last).abs() < 1e-12);
    }

    #[test]
    fn car7_equals_brute_force(
        residuals in prop::collection::vec(
            prop::option::weighted(0.9, -0.2f64..0.2),
            10..200,
        )
    ) {
        let len = residuals.len();
        let fit = CapmFit {
            alpha: vec![None; len],
            beta: vec![None; len],
            residual: residuals.clone(),
            window_len: 180,
            min_obs: 60,
        };
        let car = car7(&fit);
        for t in 0..len {
            let expect = if t >= 6 && residuals[t - 6..=t].iter().all(Option::is_some) {
                Some(residuals[t - 6..=t].iter().map(|r| r.unwrap()).sum::<f64>())
            } else {
                None
            };
            prop_assert_eq!(car.car7[t], expect);
        }
    }

    #[test]
    fn tail_probabilities_are_probabilities(x in -50.0f64..50.0, df in 1.0f64..40.0) {
        for dist in [
            TailDist::Normal,
            TailDist::StudentT { df },
            TailDist::ChiSquare { df },
            TailDist::F { d1: df, d2: df + 2.0 },
        ] {
            let p = tail_probability(dist, x).unwrap();
            prop_assert!((0.0..=1.0).contains(&p), "{dist:?} at {x}: {p}");
        }
    }
}
