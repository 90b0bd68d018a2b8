use proptest::prelude::*;

use passive_nav::band::{band_step, BandMode, BandParams, BandState};
use passive_nav::feedback::ZohChannel;
use passive_nav::fic::{FicChannel, FicPhase, ForceProfile, SaturatedSpring, DEFAULT_HYSTERESIS};
use passive_nav::metrics::{min_jerk, rmse};
use passive_nav::scenario::{load_scenario, to_toml, BUNDLED};
use passive_nav::tracker::{roa_force, RoaProfileParams, TrackerState};
use passive_nav::via::ViaPlan;
use passive_nav::world::{AgentBody, AgentKind, Controller, World, WorldAgent};
use passive_nav::{Dof, DofVec};

fn roa_params() -> impl Strategy<Value = RoaProfileParams> {
    (1e-3..1.0f64, 1.05..10.0f64, -1.0..3.0f64, 0.01..1.0f64).prop_map(|(x0, span, log_f, frac)| {
        let f_max = 10f64.powf(log_f);
        RoaProfileParams::new(f_max / x0 * frac, x0, x0 * span, f_max)
    })
}

fn at_x(v: f64) -> DofVec {
    let mut d = DofVec::ZERO;
    d[Dof::X] = v;
    d
}

struct Hold {
    tracker: TrackerState,
    x_d: DofVec,
}

impl Controller for Hold {
    fn command(&mut self, _t: f64, body: &AgentBody) -> passive_nav::Result<DofVec> {
        self.tracker.track_wrench(&self.x_d, &body.pose)
    }
}

proptest! {
    #[test]
    fn roa_profile_is_odd_and_monotone(p in roa_params(), xs in prop::collection::vec(-5.0..5.0f64, 2..40)) {
        for &x in &xs {
            prop_assert_eq!(roa_force(&p, -x), -roa_force(&p, x));
        }
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(roa_force(&p, w[0]) <= roa_force(&p, w[1]));
        }
        prop_assert!(roa_force(&p, 1e6).abs() <= p.f_max);
    }

    #[test]
    fn convergence_branch_meets_the_profile_at_the_peak(p in roa_params(), frac in 0.01..3.0f64, sign in prop::bool::ANY) {
        let x_max = p.xb * frac;
        let s = if sign { 1.0 } else { -1.0 };
        let ch = FicChannel {
            phase: FicPhase::Convergence,
            x_max,
            prev_err: s * x_max,
            anchor: x_max,
            peak_sign: s,
            hysteresis: DEFAULT_HYSTERESIS,
        };
        let peak = p.evaluate(s * x_max);
        prop_assert!((ch.force(&p, s * x_max) - peak).abs() <= 1e-9 * peak.abs());
        // the midpoint spring does no net work over the return
        let gap = ch.stored_energy(&p, 0.0) - ch.stored_energy(&p, s * x_max);
        prop_assert!(gap.abs() < 1e-9, "net work {}", gap);
    }

    #[test]
    fn phase_updates_are_deterministic(errs in prop::collection::vec(-1.0..1.0f64, 1..200)) {
        let k = SaturatedSpring::new(50.0, 10.0);
        let run = || {
            let mut ch = FicChannel::default();
            errs.iter().map(|&e| { ch = ch.update_phase(e).unwrap(); (ch, ch.force(&k, e)) }).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn band_respects_limits_for_any_via_sequence(
        k in 0.5..100.0f64,
        m in 1.0..200.0f64,
        a_max in 0.05..5.0f64,
        v_max in 0.05..3.0f64,
        fractal in prop::bool::ANY,
        vias in prop::collection::vec((-10.0..10.0f64, 1usize..3000), 1..6),
    ) {
        let params = BandParams::new(k, m, a_max, v_max);
        let mode = if fractal { BandMode::Fractal } else { BandMode::PlainSpring };
        let dt = 1e-3;
        let mut s = BandState::at_rest(0.0);
        for (target, steps) in vias {
            for _ in 0..steps {
                let next = band_step(&s, &params, mode, target, dt, false).unwrap();
                prop_assert!(next.v_d.abs() <= v_max);
                prop_assert!((next.v_d - s.v_d).abs() / dt <= a_max * (1.0 + 1e-9));
                // switching the target never jumps the desired state
                prop_assert!((next.x_d - s.x_d).abs() <= v_max * dt * (1.0 + 1e-9));
                s = next;
            }
        }
    }

    #[test]
    fn unsaturated_band_follows_the_spring(k in 1.0..50.0f64, m in 10.0..100.0f64, d in 0.01..0.5f64) {
        // limits far away: plain mode is the undamped spring-mass
        let params = BandParams::new(k, m, 1e6, 1e6);
        let dt = 1e-4;
        let omega = (k / m).sqrt();
        let period = 2.0 * std::f64::consts::PI / omega;
        let steps = (period / dt).round() as usize;
        let mut s = BandState::at_rest(0.0);
        let mut crossings = Vec::new();
        let mut prev = -d;
        for i in 1..=steps + steps / 4 {
            s = band_step(&s, &params, BandMode::PlainSpring, d, dt, false).unwrap();
            let e = s.x_d - d;
            if prev < 0.0 && e >= 0.0 {
                crossings.push(i as f64 * dt);
            }
            prev = e;
        }
        // first upward zero of x_d − d is a quarter period in
        prop_assert!(!crossings.is_empty());
        let phase_err = (crossings[0] - period / 4.0).abs() / period;
        prop_assert!(phase_err < 0.01, "phase error {}", phase_err);
    }

    #[test]
    fn zoh_hold_error_is_bounded_by_speed_over_rate(speed in 0.0..5.0f64, rate in 1.0..500.0f64, dt in 1e-4..1e-2f64) {
        let mut zoh = ZohChannel::new(Some(rate)).unwrap();
        for i in 0..2000 {
            let t = i as f64 * dt;
            let truth = at_x(speed * t);
            let (held, _) = zoh.sample(&truth, &DofVec::ZERO, t).unwrap();
            prop_assert!((truth[Dof::X] - held[Dof::X]).abs() <= speed / rate * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn via_advances_never_regress(poses in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..300)) {
        let points: Vec<DofVec> = (0..5).map(|i| { let mut p = at_x(i as f64 * 0.5 - 1.0); p[Dof::Y] = 0.3; p }).collect();
        let mut plan = ViaPlan::new(AgentKind::Planar, points, 0.6).unwrap();
        let mut last = (plan.advances(), plan.cursor());
        for (i, (x, y)) in poses.into_iter().enumerate() {
            let mut pose = at_x(x);
            pose[Dof::Y] = y;
            plan.current_target(&pose, i as f64 * 0.01);
            let now = (plan.advances(), plan.cursor());
            prop_assert!(now.0 >= last.0 && now.1 >= last.1);
            prop_assert!(now.0 - last.0 <= 1);
            last = now;
        }
    }

    #[test]
    fn rmse_ignores_a_common_time_shift(pairs in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..100), shift in 0usize..100) {
        let reference: Vec<DofVec> = pairs.iter().map(|p| DofVec::splat(p.0)).collect();
        let actual: Vec<DofVec> = pairs.iter().map(|p| DofVec::splat(p.1)).collect();
        let base = rmse(&reference, &actual).unwrap();
        let (mut r2, mut a2) = (reference.clone(), actual.clone());
        let n = r2.len();
        r2.rotate_left(shift % n);
        a2.rotate_left(shift % n);
        let shifted = rmse(&r2, &a2).unwrap();
        for d in Dof::ALL {
            prop_assert!((base[d] - shifted[d]).abs() <= 1e-12 * (1.0 + base[d]));
        }
    }

    #[test]
    fn min_jerk_boundaries(x0 in -10.0..10.0f64, x1 in -10.0..10.0f64, t in 0.1..50.0f64) {
        let (p0, v0, a0) = min_jerk(x0, x1, t, 0.0).unwrap();
        let (p1, v1, a1) = min_jerk(x0, x1, t, t).unwrap();
        prop_assert!((p0 - x0).abs() < 1e-12 && v0.abs() < 1e-12 && a0.abs() < 1e-12);
        prop_assert!((p1 - x1).abs() < 1e-12 && v1.abs() < 1e-12 && a1.abs() < 1e-12);
    }

    #[test]
    fn scenarios_round_trip(idx in 0..BUNDLED.len(), seed in any::<u64>(), dt_scale in 0.5..2.0f64, radius in 0.05..1.0f64) {
        let mut s = load_scenario(BUNDLED[idx].1).unwrap();
        s.seed = seed;
        s.dt *= dt_scale;
        s.agents[0].via.trigger_radius = radius;
        let back = load_scenario(&to_toml(&s)).unwrap();
        prop_assert_eq!(back, s);
    }
}

proptest! {
    // each case integrates a few hundred thousand steps
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tracker_converges_from_anywhere(p in roa_params(), mass in 0.5..5.0f64, start in -3.0..3.0f64) {
        prop_assume!(start.abs() > 0.01);
        let x_max = start.abs();
        let omega = (2.0 * p.evaluate(x_max) / (mass * x_max)).sqrt();
        let half = std::f64::consts::PI / omega;
        let dt = 4e-5 / omega;
        let body = AgentBody::new(AgentKind::Planar, DofVec::splat(mass), DofVec::splat(1e12), DofVec::splat(1e12));
        let mut world = World::new(dt).unwrap();
        world.agents.push(WorldAgent::new("m", body, None));
        let mut ctl = [Hold { tracker: TrackerState::new(&[(Dof::X, p)]), x_d: at_x(start) }];
        let mut overshoot = 0.0f64;
        for _ in 0..(1.5 * half / dt) as usize {
            world.step(&mut ctl, false).unwrap();
            let e = start - world.agents[0].body.pose[Dof::X];
            if e.signum() != start.signum() {
                overshoot = overshoot.max(e.abs());
            }
        }
        let residual = (start - world.agents[0].body.pose[Dof::X]).abs();
        prop_assert!(overshoot <= 0.01 * x_max, "overshoot {} of {}", overshoot, x_max);
        prop_assert!(residual < 1e-3 + 0.01 * x_max, "residual {}", residual);
    }
}
