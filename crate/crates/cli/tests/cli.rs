use std::process::{Command, Output};

fn semo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_on_degenerate_front_takes_one_evaluation() {
    let o = semo(&[
        "run",
        "--algo",
        "gsemo",
        "--mutation",
        "powerlaw",
        "--beta",
        "1.5",
        "--a",
        "0",
        "--n",
        "2",
        "--x0",
        "0,0",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let out = stdout(&o);
    assert!(out.contains("total_evals=1 "), "{out}");
    assert!(out.contains("phase2_evals=0 "), "{out}");
}

#[test]
fn run_is_reproducible() {
    let args = [
        "run",
        "--algo",
        "semo",
        "--mutation",
        "geom",
        "--inv-q",
        "10",
        "--a",
        "20",
        "--n",
        "3",
        "--x0-rule",
        "100a",
        "--seed",
        "3",
    ];
    let first = semo(&args);
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    assert_eq!(stdout(&first), stdout(&semo(&args)));
    assert!(stdout(&first).contains("completed=true"));

    let mut checked = args.to_vec();
    checked.push("--check-invariants");
    assert_eq!(stdout(&semo(&checked)), stdout(&first));
}

#[test]
fn unit_bound_example() {
    let o = semo(&[
        "bounds",
        "--mutation",
        "unit",
        "--algo",
        "semo",
        "--a",
        "1",
        "--n",
        "2",
        "--x0-norm",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(
        stdout(&o).lines().any(|l| l == "bound_total=24"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn geometric_bounds_print_shape() {
    let o = semo(&[
        "bounds",
        "--mutation",
        "geom",
        "--q",
        "0.005",
        "--algo",
        "gsemo",
        "--a",
        "200",
        "--n",
        "2",
        "--x0",
        "0,20000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let out = stdout(&o);
    assert!(out.contains("phase1="), "{out}");
    assert!(out.contains("shape_total="), "{out}");
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: [&[&str]; 7] = [
        &[
            "run",
            "--algo",
            "gsemo",
            "--mutation",
            "unit",
            "--q",
            "0.1",
            "--a",
            "1",
            "--n",
            "2",
            "--x0",
            "0,0",
        ],
        &[
            "run",
            "--algo",
            "gsemo",
            "--mutation",
            "powerlaw",
            "--inv-q",
            "4",
            "--a",
            "1",
            "--n",
            "2",
            "--x0",
            "0,0",
        ],
        &[
            "run",
            "--algo",
            "gsemo",
            "--mutation",
            "geom",
            "--a",
            "1",
            "--n",
            "2",
            "--x0",
            "0,0",
        ],
        &[
            "run",
            "--algo",
            "gsemo",
            "--mutation",
            "unit",
            "--a",
            "1",
            "--n",
            "3",
            "--x0",
            "0,0",
        ],
        &[
            "run",
            "--algo",
            "gsemo",
            "--mutation",
            "unit",
            "--a",
            "1",
            "--n",
            "2",
            "--x0",
            "0,0",
            "--bogus",
        ],
        &[
            "run",
            "--algo",
            "gsemo",
            "--mutation",
            "geom",
            "--q",
            "1.5",
            "--a",
            "1",
            "--n",
            "2",
            "--x0",
            "0,0",
        ],
        &[
            "bounds",
            "--algo",
            "semo",
            "--mutation",
            "unit",
            "--a",
            "1",
            "--n",
            "2",
        ],
    ];
    for args in cases {
        let o = semo(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {o:?}");
    }
}

#[test]
fn help_lists_flags() {
    let o = semo(&["run", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for flag in [
        "--algo",
        "--mutation",
        "--q",
        "--inv-q",
        "--beta",
        "--a",
        "--n",
        "--x0",
        "--x0-rule",
        "--seed",
        "--max-evals",
        "--check-invariants",
    ] {
        assert!(out.contains(flag), "missing {flag}");
    }
    let out = stdout(&semo(&["scenario1", "--help"]));
    for flag in [
        "--runs",
        "--seed",
        "--out",
        "--agg-out",
        "--parallel",
        "--max-evals",
    ] {
        assert!(out.contains(flag), "missing {flag}");
    }
}

#[test]
fn scenario_csvs_do_not_depend_on_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let runs = dir.path().join(format!("runs{threads}.csv"));
        let agg = dir.path().join(format!("agg{threads}.csv"));
        let o = semo(&[
            "scenario2",
            "--a-values",
            "8,16",
            "--runs",
            "4",
            "--parallel",
            threads,
            "--out",
            runs.to_str().unwrap(),
            "--agg-out",
            agg.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{o:?}");
        outputs.push((std::fs::read(runs).unwrap(), std::fs::read(agg).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let agg = String::from_utf8(outputs[0].1.clone()).unwrap();
    let mut lines = agg.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,algo,mutation,param,a,n,runs,mean_p1,sdpct_p1,mean_p2,sdpct_p2,mean_total,sdpct_total,bound_total"
    );
    // 2 values of a times 3 laws
    assert_eq!(lines.count(), 6);
    let runs = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(runs.lines().count(), 1 + 6 * 4);
    assert!(runs
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("2,gsemo,unit,,8,2,0,"));
}

#[test]
fn verify_quick_passes() {
    let o = semo(&["verify", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
