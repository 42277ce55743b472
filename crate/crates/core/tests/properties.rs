use std::collections::VecDeque;

use proptest::prelude::*;

use exwalk::asymptotics::{limit_speed_single, r_star};
use exwalk::chain::level_weights;
use exwalk::cli::config::RunConfig;
use exwalk::cli::format::num;
use exwalk::cli::sweep::{sweep_csv, Axis};
use exwalk::exact::{speed_multi, speed_multi_rational};
use exwalk::{ThresholdLadder, WalkState};

/// Strict ladders with up to three thresholds.
fn ladder(max_window: u64) -> impl Strategy<Value = ThresholdLadder> {
    (1..=max_window)
        .prop_flat_map(|n| {
            let levels = 1..=(3.min(n) as usize);
            (Just(n), levels)
        })
        .prop_flat_map(|(n, levels)| {
            (
                Just(n),
                proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), levels),
                proptest::collection::vec(0.02f64..0.98, levels + 1),
            )
        })
        .prop_filter_map("probabilities too close", |(n, m, mut p)| {
            p.sort_by(f64::total_cmp);
            p.windows(2).all(|w| w[1] - w[0] > 1e-3).then(|| ThresholdLadder::new(n, m, p).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn speed_is_stationary_mean_drift(l in ladder(300)) {
        let s = speed_multi(&l).unwrap().speed;
        let levels = level_weights(&l).unwrap();
        let drift: f64 = (0..=l.window)
            .map(|k| levels.level_mass(k) * (2.0 * l.jump_probability(k).unwrap() - 1.0))
            .sum();
        prop_assert!((s - drift).abs() < 1e-12, "{s} vs {drift}");
        let (lo, hi) = (2.0 * l.probs[0] - 1.0, 2.0 * l.probs[l.levels()] - 1.0);
        prop_assert!(lo - 1e-12 <= s && s <= hi + 1e-12);
    }

    #[test]
    fn rational_path_agrees(l in ladder(40)) {
        let a = speed_multi(&l).unwrap().speed;
        let b = speed_multi_rational(&l).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn breakdown_weights_sum_to_one(l in ladder(2000)) {
        let b = speed_multi(&l).unwrap();
        let w = b.band_weights();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let recombined: f64 = w.iter().zip(&b.band_mean_fraction).map(|(w, m)| w * m).sum();
        prop_assert!((2.0 * recombined - 1.0 - b.speed).abs() < 1e-12);
    }

    #[test]
    fn large_windows_approach_the_limit(p0 in 0.05f64..0.85, gap in 0.1f64..0.5, r in 0.02f64..0.98) {
        let p1 = p0 + gap;
        prop_assume!(p1 < 0.95);
        let rs = r_star(p0, p1).unwrap();
        prop_assume!((r - rs).abs() > 0.05 && (r - p0).abs() > 0.05 && (r - p1).abs() > 0.05);
        let limit = limit_speed_single(p0, p1, r).unwrap();
        let n = 4000u64;
        let m = ((r * n as f64).round() as u64).clamp(1, n);
        let s = speed_multi(&ThresholdLadder::single(n, m, p0, p1).unwrap()).unwrap().speed;
        prop_assert!((s - limit).abs() < 1e-3, "s = {s}, limit = {limit}");
    }

    #[test]
    fn ring_buffer_matches_queue(initial in proptest::collection::vec(any::<bool>(), 1..200),
                                 pushes in proptest::collection::vec(any::<bool>(), 0..500)) {
        let mut state = WalkState::from_jumps(&initial);
        let mut queue: VecDeque<bool> = initial.iter().copied().collect();
        let mut position: i64 = initial.iter().map(|&b| if b { 1 } else { -1 }).sum();
        for b in pushes {
            state.push(b);
            queue.pop_front();
            queue.push_back(b);
            position += if b { 1 } else { -1 };
        }
        prop_assert_eq!(state.window(), queue.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(state.rights_count(), queue.iter().filter(|&&b| b).count() as u64);
        prop_assert_eq!(state.position(), position);
    }

    #[test]
    fn printed_numbers_keep_fifteen_digits(x in -1e6f64..1e6) {
        let back: f64 = num(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-15 * x.abs());
    }

    #[test]
    fn validation_accepts_exactly_ordered_ladders(n in 1u64..50,
                                                  m in proptest::collection::vec(0u64..60, 1..4),
                                                  p in proptest::collection::vec(0.0f64..1.0, 1..5)) {
        let ordered = m.windows(2).all(|w| w[0] < w[1])
            && m.iter().all(|&x| (1..=n).contains(&x))
            && p.len() == m.len() + 1
            && p.windows(2).all(|w| w[0] < w[1])
            && p.iter().all(|&x| (1e-12..=1.0 - 1e-12).contains(&x));
        prop_assert_eq!(ThresholdLadder::new(n, m, p).is_ok(), ordered);
    }
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let cfg: RunConfig = serde_json::from_str(r#"{"p": [0.2, 0.5, 0.9]}"#).unwrap();
    let axes: Vec<Axis> = vec!["N=50:800:6".parse().unwrap(), "r1=0.1:0.4:5".parse().unwrap()];
    let cfg = RunConfig { fractions: Some(vec![0.0, 0.7]), ..cfg };
    let render = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sweep_csv(&cfg, &axes, true).unwrap())
    };
    let one = render(1);
    assert_eq!(one.lines().count(), 31);
    assert_eq!(render(7), one);
}
