use proptest::prelude::*;
use warpwatch_core::cases::{active_cases, daily_confirmed, daily_removed, CaseKind, CaseSeries, DateRange, LineListRecord};
use warpwatch_core::series::{Date, DateIndexedSeries};
use warpwatch_core::trends::{msv_merge, rescale_daily, DailySegment, WeeklySeries};

fn day0() -> Date {
    Date::from_ymd(2020, 3, 16).unwrap()
}

fn case_series(kind: CaseKind, v: Vec<f64>) -> CaseSeries {
    CaseSeries {
        kind,
        series: DateIndexedSeries::new(day0(), v).unwrap(),
    }
}

fn records() -> impl Strategy<Value = Vec<LineListRecord>> {
    prop::collection::vec((0i64..40, prop::option::of(-5i64..45)), 0..60).prop_map(|v| {
        v.into_iter()
            .map(|(c, r)| LineListRecord {
                region_res: "NCR".into(),
                province_res: "NCR".into(),
                date_rep_conf: day0().add_days(c),
                date_rep_rem: r.map(|r| day0().add_days(r)),
            })
            .collect()
    })
}

fn segments_for(start: Date, count: usize, seed: u64) -> Vec<DailySegment> {
    let mut state = seed;
    (0..count)
        .map(|s| {
            let values = (0..30)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((state >> 40) % 101) as f64
                })
                .collect();
            DailySegment::new("flu", start.add_days(3 * s as i64), values).unwrap()
        })
        .collect()
}

proptest! {
    #[test]
    fn conservation_without_clamping(c in prop::collection::vec(0u32..50, 1..60), extra in prop::collection::vec(0u32..50, 1..60)) {
        // removals never exceed what has been confirmed so far
        let c: Vec<f64> = c.into_iter().map(f64::from).collect();
        let mut r = Vec::with_capacity(c.len());
        let mut pool = 0.0;
        for (i, &ct) in c.iter().enumerate() {
            pool += ct;
            let take = f64::from(extra[i % extra.len()]).min(pool);
            pool -= take;
            r.push(take);
        }
        let (a, log) = active_cases(&case_series(CaseKind::Confirmed, c.clone()), &case_series(CaseKind::Removed, r.clone())).unwrap();
        prop_assert!(log.is_empty());
        let (mut sc, mut sr) = (0.0, 0.0);
        for t in 0..c.len() {
            sc += c[t];
            sr += r[t];
            prop_assert_eq!(a.series.values()[t], sc - sr);
        }
    }

    #[test]
    fn active_never_negative_and_clamps_logged(c in prop::collection::vec(0u32..10, 1..60), r in prop::collection::vec(0u32..15, 1..60)) {
        let n = c.len().min(r.len());
        let c: Vec<f64> = c[..n].iter().copied().map(f64::from).collect();
        let r: Vec<f64> = r[..n].iter().copied().map(f64::from).collect();
        let (a, log) = active_cases(&case_series(CaseKind::Confirmed, c.clone()), &case_series(CaseKind::Removed, r.clone())).unwrap();
        prop_assert!(a.series.values().iter().all(|&v| v >= 0.0));
        let mut prev = 0.0;
        let mut expected_days = Vec::new();
        for t in 0..n {
            let raw: f64 = prev + c[t] - r[t];
            if raw < 0.0 {
                expected_days.push(day0().add_days(t as i64));
            }
            prev = raw.max(0.0);
        }
        prop_assert_eq!(log.iter().map(|e| e.date).collect::<Vec<_>>(), expected_days);
    }

    #[test]
    fn daily_counts_ignore_record_order(mut recs in records(), k in 0usize..100) {
        let range = DateRange::new(day0(), day0().add_days(39)).unwrap();
        let c1 = daily_confirmed(&recs, range);
        let r1 = daily_removed(&recs, range);
        if !recs.is_empty() {
            let len = recs.len();
            recs.rotate_left(k % len);
            recs.reverse();
        }
        prop_assert_eq!(daily_confirmed(&recs, range), c1);
        prop_assert_eq!(daily_removed(&recs, range), r1);
    }

    #[test]
    fn msv_output_contiguous_with_max_100(count in 1usize..8, seed in any::<u64>()) {
        let segs = segments_for(day0(), count, seed);
        let out = msv_merge(&segs).unwrap();
        prop_assert_eq!(out.start(), day0());
        prop_assert_eq!(out.len(), 30 + 3 * (count - 1));
        if out.values().iter().any(|&v| v > 0.0) {
            prop_assert_eq!(out.max(), 100.0);
        }
        prop_assert_eq!(msv_merge(&segs).unwrap(), out);
    }

    #[test]
    fn rescale_ignores_segment_order(count in 1usize..8, seed in any::<u64>(), k in 0usize..8) {
        let segs = segments_for(day0(), count, seed);
        let weekly = WeeklySeries::new("flu", day0().add_days(-2), (0..10).map(|w| f64::from(10 * w as u32 % 100)).collect()).unwrap();
        let out = rescale_daily(&segs, &weekly).unwrap();
        prop_assert_eq!(out.len(), 30 + 3 * (count - 1));
        let mut shuffled = segs.clone();
        shuffled.rotate_left(k % count);
        shuffled.reverse();
        prop_assert_eq!(rescale_daily(&shuffled, &weekly).unwrap(), out);
    }
}
