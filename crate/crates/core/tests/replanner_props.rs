mod common;

use covhole::chmap::CoverageHoleEvent;
use covhole::gridworld::WorldPoint;
use covhole::replanner::{lat_from_event, sspr, LookAhead, Replan};
use covhole::trajectory::path_length;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sspr_matches_exhaustive_search_and_is_safe(seed in any::<u64>()) {
        let Some(c) = common::sspr_case(seed) else { return Ok(()) };
        let window = common::window_oracle(c.k_now, c.event.k_bs, c.lat, c.traj.dt);
        let oracle = common::exhaustive_sspr(&c.chmap, &c.prm, &c.traj, window.iter().copied());
        let got = sspr(&c.chmap, &c.prm, &c.traj, c.k_now, Some(&c.event), LookAhead { lat: c.lat }, &c.profile);
        match (got, oracle) {
            (Ok(Replan::Rerouted(r)), Some((idx, best))) => {
                prop_assert!((r.planned_length - best).abs() <= 1e-9, "{} vs {}", r.planned_length, best);
                prop_assert_eq!(r.index, idx);
                prop_assert_eq!(r.candidates_evaluated, window.len());
                for cand in &r.candidates {
                    if let Some(t) = cand.total_length {
                        prop_assert!(t >= r.planned_length);
                    }
                }
                let dt = c.traj.dt;
                prop_assert!(r.t_re >= c.k_now as f64 * dt - 1e-12 && r.t_re < c.event.k_bs as f64 * dt);
                prop_assert_eq!(&r.alternative.samples[..=r.index], &c.traj.samples[..=r.index]);
                prop_assert!(r.alternative.samples.iter().all(|s| c.chmap.grid().point_free(s.position())));
                prop_assert!((r.alt_length - path_length(&r.alternative.positions())).abs() <= 1e-9);
                prop_assert!(r.alternative.end().distance(&c.traj.end()) < 1e-9);
            }
            (Err(_), None) => {}
            (got, oracle) => prop_assert!(false, "sspr {:?} vs oracle {:?}", got.map(|r| r.trajectory().len()), oracle),
        }
    }

    #[test]
    fn lat_is_steps_times_dt(k_now in 0usize..10_000, ahead in 0usize..10_000, dt in 0.01..0.5f64) {
        let ev = CoverageHoleEvent { k_bs: k_now + ahead, position: WorldPoint::new(0.0, 0.0) };
        prop_assert_eq!(lat_from_event(k_now, &ev, dt).unwrap().lat, dt * ahead as f64);
    }
}

#[test]
fn zero_look_ahead_departs_now() {
    let c = (0..200).find_map(|s| common::sspr_case(s).filter(|c| c.event.k_bs > c.k_now + 5)).unwrap();
    match sspr(&c.chmap, &c.prm, &c.traj, c.k_now, Some(&c.event), LookAhead { lat: 0.0 }, &c.profile).unwrap() {
        Replan::Rerouted(r) => {
            assert_eq!(r.index, c.k_now);
            assert_eq!(r.candidates_evaluated, 1);
        }
        Replan::Unchanged(_) => panic!("event was given"),
    }
}
