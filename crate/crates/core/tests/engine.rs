use semo_core::benchmark::{check_lemma_invariants, evaluate_f, is_on_front};
use semo_core::moea::{
    mutate, run, run_observed, run_reference, run_with_invariant_checks, Archive, Population,
};
use semo_core::{
    AlgorithmKind, BenchmarkConfig, Error, MutationLaw, Point, RandomStream, RunConfig,
};

fn config(algorithm: AlgorithmKind, law: MutationLaw, a: u64, x0: &[i64], seed: u64) -> RunConfig {
    let cfg = BenchmarkConfig::new(a, x0.len()).unwrap();
    RunConfig::new(
        algorithm,
        law,
        cfg,
        Point::new(x0.to_vec()).unwrap(),
        seed,
        0,
    )
    .unwrap()
}

fn laws() -> Vec<MutationLaw> {
    vec![
        MutationLaw::UnitStep,
        MutationLaw::bilateral_geometric(0.1).unwrap(),
        MutationLaw::power_law(1.5).unwrap(),
    ]
}

#[test]
fn identical_seeds_replay_identically() {
    for law in laws() {
        for algorithm in [AlgorithmKind::Semo, AlgorithmKind::Gsemo] {
            let c = config(algorithm, law, 12, &[3, 150, -4], 99);
            assert_eq!(run(&c).unwrap(), run(&c).unwrap());
            let other = RunConfig {
                stream_id: 1,
                ..c.clone()
            };
            assert_ne!(run(&c).unwrap().total_evals, 0);
            assert_eq!(run(&other).unwrap(), run(&other).unwrap());
        }
    }
}

#[test]
fn indexed_and_reference_archives_agree() {
    for (i, law) in laws().into_iter().enumerate() {
        for algorithm in [AlgorithmKind::Semo, AlgorithmKind::Gsemo] {
            let c = config(algorithm, law, 6, &[-2, 60], 1000 + i as u64);
            assert_eq!(run(&c).unwrap(), run_reference(&c).unwrap());
        }
    }
}

#[test]
fn minimum_norm_trace_is_monotone() {
    let c = config(AlgorithmKind::Semo, MutationLaw::UnitStep, 1, &[0, 3], 4);
    let mut trace = Vec::new();
    let record = run_observed::<Archive, _>(&c, |s| {
        let min = s
            .archive
            .members()
            .iter()
            .map(|m| m.point.l1_norm().unwrap())
            .min()
            .unwrap();
        trace.push(min);
        Ok(())
    })
    .unwrap();
    assert!(record.completed);
    assert_eq!(trace[0], 3);
    assert!(trace.windows(2).all(|w| w[1] <= w[0]), "{trace:?}");
    assert_eq!(*trace.last().unwrap(), 0);
    assert_eq!(trace.len() as u64, record.total_evals);
}

#[test]
fn population_stays_small_and_incomparable() {
    for law in laws() {
        let c = config(AlgorithmKind::Gsemo, law, 5, &[40, -70], 17).with_max_evaluations(100_001);
        let target = c.benchmark.front_size();
        let mut steps = 0u64;
        run_observed::<Archive, _>(&c, |s| {
            steps += 1;
            assert!(s.archive.len() <= target);
            if steps.is_multiple_of(97) {
                let report = check_lemma_invariants(&c.benchmark, &s.archive.points());
                assert!(report.all_passed(), "{:?}", report.first_failure());
            }
            Ok(())
        })
        .unwrap();
    }
}

#[test]
fn evaluation_accounting() {
    for law in laws() {
        let c = config(AlgorithmKind::Gsemo, law, 10, &[0, 1000], 3);
        let r = run(&c).unwrap();
        assert!(r.completed);
        assert_eq!(r.phase1_evals + r.phase2_evals, r.total_evals);
        assert!(r.phase1_evals >= 2);
        // The front has 21 values and each iteration adds at most one.
        assert!(r.phase2_evals >= 20);
    }

    // Starting on the front counts the initial evaluation as phase 1.
    let r = run(&config(
        AlgorithmKind::Semo,
        MutationLaw::UnitStep,
        2,
        &[1, 0],
        8,
    ))
    .unwrap();
    assert_eq!(r.phase1_evals, 1);
    assert!(r.phase2_evals >= 4);
}

#[test]
fn degenerate_front_is_covered_by_the_origin() {
    for law in laws() {
        for algorithm in [AlgorithmKind::Semo, AlgorithmKind::Gsemo] {
            for seed in 0..20 {
                let r = run(&config(algorithm, law, 0, &[0, 0, 0], seed)).unwrap();
                assert_eq!((r.total_evals, r.phase1_evals, r.phase2_evals), (1, 1, 0));
                let r = run(&config(algorithm, law, 0, &[2, -3, 1], seed)).unwrap();
                assert_eq!(r.phase2_evals, 0);
                assert_eq!(r.phase1_evals, r.total_evals);
            }
        }
    }
}

#[test]
fn evaluation_cap_marks_incomplete() {
    let c = config(
        AlgorithmKind::Gsemo,
        MutationLaw::UnitStep,
        50,
        &[0, 100_000],
        1,
    )
    .with_max_evaluations(500);
    let r = run(&c).unwrap();
    assert!(!r.completed);
    assert_eq!(r.total_evals, 500);
    assert_eq!(r.phase1_evals, 500);
    assert_eq!(r.phase2_evals, 0);
}

#[test]
fn invariant_checked_runs_match_plain_runs() {
    for law in laws() {
        let c = config(AlgorithmKind::Gsemo, law, 4, &[-9, 30, 2], 21);
        assert_eq!(run_with_invariant_checks(&c, 1).unwrap(), run(&c).unwrap());
        assert_eq!(run_with_invariant_checks(&c, 10).unwrap(), run(&c).unwrap());
    }
}

#[test]
fn archive_final_state_is_the_pareto_set() {
    let c = config(
        AlgorithmKind::Gsemo,
        MutationLaw::power_law(1.5).unwrap(),
        7,
        &[0, 500],
        2,
    );
    let mut last = Vec::new();
    run_observed::<Archive, _>(&c, |s| {
        last = s.archive.points();
        Ok(())
    })
    .unwrap();
    assert_eq!(last.len(), 15);
    for (k, p) in (-7i64..=7).zip(&last) {
        assert_eq!(p.coords(), &[k, 0]);
        assert!(is_on_front(
            &c.benchmark,
            evaluate_f(&c.benchmark, p).unwrap()
        ));
    }
}

#[test]
fn mutation_errors_surface() {
    let mut rng = RandomStream::new(0, 0);
    let p = Point::new(vec![i64::MAX, i64::MAX]).unwrap();
    let mut saw_overflow = false;
    for _ in 0..64 {
        match mutate(AlgorithmKind::Semo, &MutationLaw::UnitStep, &p, &mut rng) {
            Err(Error::Overflow(_)) => saw_overflow = true,
            Ok(child) => assert_eq!(
                child
                    .coords()
                    .iter()
                    .filter(|&&c| c == i64::MAX - 1)
                    .count(),
                1
            ),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(saw_overflow);

    let cfg = BenchmarkConfig::new(1, 3).unwrap();
    assert!(RunConfig::new(
        AlgorithmKind::Semo,
        MutationLaw::UnitStep,
        cfg,
        Point::new(vec![0, 0]).unwrap(),
        0,
        0
    )
    .is_err());
}
