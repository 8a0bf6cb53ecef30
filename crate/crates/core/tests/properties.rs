mod common;

use std::f64::consts::PI;

use beamcharge::bandit::{ucb_estimate, update, variation_metrics, window_size, ArmStats};
use beamcharge::channel::{expected_power, steering_codeword, UlaConfig};
use beamcharge::energy::RoundSchedule;
use beamcharge::geometry::Point;
use beamcharge::oracle::{gua, gua_lazy, schedule_value, upper_bound_p1};
use common::{steered_power, Instance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(max_n: usize, max_m: usize, max_slots: usize) -> impl Strategy<Value = Instance> {
    any::<u64>().prop_map(move |s| {
        Instance::random(&mut ChaCha8Rng::seed_from_u64(s), max_n, max_m, max_slots)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn library_schedule_value_matches_plain_simulation(inst in instance(4, 5, 8), picks in prop::collection::vec(0usize..5, 8)) {
        let slots: Vec<usize> = picks[..inst.n_slots].iter().map(|j| j % inst.n_policies()).collect();
        let sched = RoundSchedule::new(slots.clone(), inst.slot_duration, inst.deadline).unwrap();
        let lib = schedule_value(&inst.matrix(), &inst.initial, &inst.spec(), &inst.params(), &sched).unwrap();
        let plain = inst.schedule_value(&slots);
        prop_assert!((lib - plain).abs() <= 1e-9 * plain.abs().max(1.0), "{lib} vs {plain}");
    }

    #[test]
    fn gua_sits_between_floor_and_relaxation(inst in instance(3, 4, 5)) {
        let (m, s, p) = (inst.matrix(), inst.spec(), inst.params());
        let g = gua(&m, &inst.initial, &s, &p).unwrap();
        let value = inst.schedule_value(&g.slots);
        let opt = inst.brute_force_optimum();
        let (_, ub) = upper_bound_p1(&m, &inst.initial, &s, &p).unwrap();
        prop_assert!(value <= opt + 1e-9);
        prop_assert!(value >= 0.3161 * opt - 1e-9);
        prop_assert!(opt <= ub + 1e-9, "opt {opt} above relaxation {ub}");
    }

    #[test]
    fn lazy_and_naive_greedy_agree(inst in instance(6, 12, 20)) {
        let (m, s, p) = (inst.matrix(), inst.spec(), inst.params());
        prop_assert_eq!(
            gua(&m, &inst.initial, &s, &p).unwrap(),
            gua_lazy(&m, &inst.initial, &s, &p).unwrap()
        );
    }

    #[test]
    fn more_time_never_lowers_the_relaxation(inst in instance(4, 4, 1), extra in 1.0f64..5.0) {
        let (m, s, p) = (inst.matrix(), inst.spec(), inst.params());
        let (_, a) = upper_bound_p1(&m, &inst.initial, &s, &p).unwrap();
        let mut longer = p;
        longer.power_scale *= extra;
        let (_, b) = upper_bound_p1(&m, &inst.initial, &s, &longer).unwrap();
        prop_assert!(b >= a - 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn library_power_matches_direct_sum(
        theta_m in 0.0f64..PI,
        x in -6.0f64..6.0,
        y in 0.3f64..6.0,
        gain in 0.2f64..2.0,
    ) {
        let ula = UlaConfig::default();
        let cw = steering_codeword(theta_m, &ula);
        let lib = expected_power(Point::new(x, y), gain, Point::new(0.0, 0.0), &cw, &ula).unwrap();
        let direct = steered_power(ula.n_antennas, ula.spacing, ula.wavelength(), theta_m, (0.0, 0.0), (x, y), gain);
        prop_assert!((lib - direct).abs() <= 1e-9 * direct.max(1e-12));
    }

    #[test]
    fn ucb_is_optimistic_and_bounded(obs in prop::collection::vec(0.0f64..1.5, 1..40), t in 1usize..10_000) {
        let mut stats = ArmStats::new(2, 1);
        for (r, &o) in obs.iter().enumerate() {
            let s = RoundSchedule::new(vec![0], 1.0, 1.0).unwrap();
            update(&mut stats, r, &s, &[vec![o]], None).unwrap();
        }
        let mean = obs.iter().map(|o| o.min(1.0)).sum::<f64>() / obs.len() as f64;
        let est = ucb_estimate(&stats, 0, 0, t.max(obs.len()));
        prop_assert!((stats.mean(0, 0) - mean).abs() < 1e-12);
        prop_assert!(est >= mean - 1e-12 && est <= 1.0);
        prop_assert_eq!(ucb_estimate(&stats, 1, 0, t), 1.0);
    }

    #[test]
    fn variation_matches_recount(steps in prop::collection::vec(prop::collection::vec(-0.1f64..0.1, 3), 1..30)) {
        let mut path = vec![vec![0.5; 3]];
        for s in &steps {
            let last = path.last().unwrap().clone();
            // Zero out small steps so some rounds are unchanged.
            path.push(last.iter().zip(s).map(|(a, d)| if d.abs() < 0.03 { *a } else { a + d }).collect());
        }
        let (d, v) = variation_metrics(&path).unwrap();
        let mut dd = 1;
        let mut vv = 0.0;
        for k in 1..path.len() {
            let m = (0..3).map(|i| (path[k][i] - path[k - 1][i]).abs()).fold(0.0, f64::max);
            if m > 0.0 {
                dd += 1;
                vv += m;
            }
        }
        prop_assert_eq!(d, dd);
        prop_assert!((v - vv).abs() < 1e-12);
    }

    #[test]
    fn window_is_within_horizon(t in 1usize..100_000, v in 0.0f64..1e5) {
        let w = window_size(t, v);
        prop_assert!(w >= 1 && w <= t);
        if v > 0.0 && w < t {
            prop_assert_eq!(w, (t as f64 / v).sqrt().ceil() as usize);
        }
    }
}
