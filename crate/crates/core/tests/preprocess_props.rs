use collab_activity::preprocess::{
    bin_daily, bin_weekly, filter_and_trim, preprocess, raw_weekly, rolling_mean, ActivitySeries, PreprocessConfig,
};
use collab_activity::ContributionEvent;
use proptest::prelude::*;

const DAY: i64 = 86_400;
// Monday 2024-01-01 00:00 UTC
const MON: i64 = 1_704_067_200;

/// `rates[u]` events per day for user `u` over `days` days from `start_day`.
fn uniform_log(rates: &[u32], start_day: i64, days: i64) -> Vec<ContributionEvent> {
    let mut events = Vec::new();
    for d in 0..days {
        for (u, &r) in rates.iter().enumerate() {
            for k in 0..r {
                let ts = MON + (start_day + d) * DAY + 3_600 * (k as i64 % 20);
                events.push(ContributionEvent::post(ts, &format!("u{u}"), &format!("a{u}-{d}-{k}")));
            }
        }
    }
    events
}

fn arb_log() -> impl Strategy<Value = Vec<ContributionEvent>> {
    prop::collection::vec((0i64..200 * DAY, 0usize..6), 1..300).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (off, u))| ContributionEvent::post(MON + off, &format!("u{u}"), &format!("a{i}")))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smoothing_conserves_mass_for_uniform_activity(
        rates in prop::collection::vec(1u32..5, 1..5),
        start_day in 0i64..7,
        weeks in 8i64..20,
    ) {
        let events = uniform_log(&rates, start_day, 7 * weeks);
        let raw_total: f64 = events.len() as f64;
        let daily = bin_daily(&events).unwrap().to_series::<f64>();
        let smoothed = bin_weekly(&rolling_mean(&daily, 7)).total();
        prop_assert!(smoothed >= 0.9 * raw_total - 1e-9 && smoothed <= raw_total + 1e-9, "{} vs {}", smoothed, raw_total);
    }

    #[test]
    fn window_of_one_is_the_identity(events in arb_log()) {
        let daily = bin_daily(&events).unwrap().to_series::<f64>();
        let a = bin_weekly(&rolling_mean(&daily, 1));
        let b = raw_weekly::<f64>(&events).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert_eq!(a.weeks(), b.weeks());
        prop_assert_eq!(a.coverage(), b.coverage());
    }

    #[test]
    fn filter_and_trim_is_idempotent(events in arb_log(), weeks in 2usize..30, min_total in 0.0f64..5.0) {
        let cfg = PreprocessConfig {
            window_weeks: weeks,
            lead_weeks: 1,
            min_total_activity: min_total,
            ..Default::default()
        };
        let Ok(once) = preprocess::<f64>(&events, &cfg) else {
            return Ok(());
        };
        let twice = filter_and_trim(&once.series, &cfg).unwrap();
        prop_assert_eq!(&twice.series, &once.series);
    }

    #[test]
    fn weekly_series_are_valid(events in arb_log()) {
        let daily = bin_daily(&events).unwrap().to_series::<f64>();
        let weekly = bin_weekly(&rolling_mean(&daily, 7));
        prop_assert!(weekly.values().iter().flatten().all(|&v| v >= 0.0 && v.is_finite()));
        prop_assert!(weekly.weeks().windows(2).all(|w| (w[1] - w[0]).num_days() == 7));
        let raw: f64 = raw_weekly::<f64>(&events).unwrap().total();
        prop_assert_eq!(raw, events.len() as f64);
    }

    #[test]
    fn series_csv_round_trips(events in arb_log()) {
        let daily = bin_daily(&events).unwrap().to_series::<f64>();
        let weekly = bin_weekly(&rolling_mean(&daily, 7));
        let mut buf = Vec::new();
        weekly.write_csv(&mut buf).unwrap();
        let back = ActivitySeries::<f64>::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values(), weekly.values());
        prop_assert_eq!(back.weeks(), weekly.weeks());
        prop_assert_eq!(back.users(), weekly.users());
    }
}

#[test]
fn short_dataset_warns_and_keeps_everything() {
    let events = uniform_log(&[2, 1], 0, 70);
    let cfg = PreprocessConfig::default();
    let out = preprocess::<f64>(&events, &cfg).unwrap();
    assert_eq!(out.series.n_weeks(), 10);
    assert_eq!(out.warnings.len(), 1);
}

#[test]
fn long_dataset_keeps_the_last_weeks() {
    // starts on a Wednesday, so the first week is partial and dropped
    let events = uniform_log(&[1], 2, 7 * 60);
    let out = preprocess::<f64>(&events, &PreprocessConfig::default()).unwrap();
    assert_eq!(out.series.n_weeks(), 55);
    assert!(out.warnings.is_empty());
    assert!(out.series.values()[0].iter().all(|&v| (v - 7.0).abs() < 1e-12));
}
