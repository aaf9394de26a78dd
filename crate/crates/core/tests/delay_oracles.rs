use piag::delay::{DelaySchedule, GradientTable, ScheduleKind};
use piag::problems::{make_quadratic_box, make_quadratic_l1};
use piag::solver::{piag_step, solve, SmoothnessBounds, SolverConfig};
use piag::{Problem, Vector};

fn schedules(n: usize, tau: usize) -> Vec<DelaySchedule> {
    vec![
        DelaySchedule::new(ScheduleKind::Cyclic { block: DelaySchedule::min_cyclic_block(n, tau) }, tau),
        DelaySchedule::new(ScheduleKind::UniformRandom { seed: 31 }, tau),
        DelaySchedule::new(ScheduleKind::AdversarialMax, tau),
    ]
}

/// Runs the iteration by hand, returning the iterates and, per step, the
/// stamps and aggregate the table used.
fn drive(p: &Problem, sched: DelaySchedule, alpha: f64, iters: usize) -> (Vec<Vector>, Vec<(Vec<usize>, Vector)>) {
    let d = p.dimension();
    let mut x = Vector::from_element(d, 0.3);
    let mut table = GradientTable::new(p, &x, sched.tau).unwrap();
    let mut planner = sched.planner(p.num_components()).unwrap();
    let mut xs = vec![x.clone()];
    let mut used = Vec::new();
    for k in 0..iters {
        let set = planner.next_refresh_set(k, &table);
        let next = piag_step(p, &mut table, k, &x, alpha, &set).unwrap();
        used.push((table.stamps().to_vec(), table.aggregate().clone()));
        table.push_step((&next - &x).norm_squared());
        x = next;
        xs.push(x.clone());
    }
    (xs, used)
}

#[test]
fn aggregate_matches_brute_force_sum() {
    for &tau in &[1usize, 3, 7] {
        let p = make_quadratic_box(6, 4, tau as u64, 1.0).unwrap();
        let alpha = 0.9 * SmoothnessBounds::for_problem(&p, tau).unwrap().alpha_lemma2();
        for sched in schedules(6, tau) {
            let (xs, used) = drive(&p, sched, alpha, 500);
            for (k, (stamps, agg)) in used.iter().enumerate() {
                let mut brute = Vector::zeros(p.dimension());
                for (i, c) in p.components().iter().enumerate() {
                    assert!(stamps[i] <= k && k - stamps[i] <= tau);
                    brute += c.gradient(&xs[stamps[i]]);
                }
                let err = (&brute - agg).norm();
                assert!(err <= 1e-12 * (1.0 + brute.norm()), "k = {k}, {sched:?}: {err:e}");
            }
        }
    }
}

#[test]
fn delta_matches_naive_window_sum() {
    let p = make_quadratic_l1(5, 3, 2, 0.1).unwrap();
    for &tau in &[1usize, 2, 6] {
        let alpha = 0.9 * SmoothnessBounds::for_problem(&p, tau).unwrap().alpha_lemma2();
        let sched = DelaySchedule::new(ScheduleKind::AdversarialMax, tau);
        let cfg = SolverConfig::new(alpha, sched, Vector::from_element(3, 1.0)).with_max_iters(300).with_tol(1e-300).with_full_log();
        let t = solve(&p, &cfg).unwrap();
        let xs = t.iterates.as_ref().unwrap();
        for r in &t.records {
            let k = r.k;
            let naive: f64 = (k.saturating_sub(tau)..k).map(|j| (&xs[j + 1] - &xs[j]).norm_squared()).sum();
            assert!((r.delta_k - naive).abs() <= 1e-14 * (1.0 + naive), "k = {k}");
        }
    }
}

#[test]
fn staleness_never_exceeds_tau() {
    for &tau in &[0usize, 1, 4, 10] {
        let n = 7;
        let p = make_quadratic_box(n, 2, 8, 0.5).unwrap();
        let alpha = 0.9 * SmoothnessBounds::for_problem(&p, tau).unwrap().alpha_lemma2();
        for sched in schedules(n, tau) {
            let (_, used) = drive(&p, sched, alpha, 10_000);
            for (k, (stamps, _)) in used.iter().enumerate() {
                assert!(stamps.iter().all(|s| k - s <= tau), "k = {k}, {sched:?}");
            }
        }
    }
}

#[test]
fn adversarial_schedule_reaches_the_bound() {
    let p = make_quadratic_box(4, 2, 1, 0.5).unwrap();
    let tau = 3;
    let alpha = 0.5 * SmoothnessBounds::for_problem(&p, tau).unwrap().alpha_lemma2();
    let cfg = SolverConfig::new(alpha, DelaySchedule::new(ScheduleKind::AdversarialMax, tau), Vector::zeros(2))
        .with_max_iters(50)
        .with_tol(1e-300);
    let t = solve(&p, &cfg).unwrap();
    // the terminal record takes no step
    for r in t.records.iter().filter(|r| r.k < t.iterations) {
        assert_eq!(r.max_staleness, r.k % (tau + 1), "k = {}", r.k);
    }
}

#[test]
fn runs_are_deterministic() {
    let p = make_quadratic_box(5, 3, 4, 1.0).unwrap();
    let alpha = 0.9 * SmoothnessBounds::for_problem(&p, 4).unwrap().alpha_lemma2();
    let cfg = SolverConfig::new(alpha, DelaySchedule::new(ScheduleKind::UniformRandom { seed: 9 }, 4), Vector::zeros(3))
        .with_max_iters(2000);
    let a = solve(&p, &cfg).unwrap();
    let b = solve(&p, &cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_x, b.final_x);
}
