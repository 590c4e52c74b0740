use std::path::Path;
use std::process::{Command, Output};

fn doaloc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doaloc")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_json(o: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(err.lines().last().expect("stderr line")).expect("json error line")
}

#[test]
fn simulate_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = doaloc(&["simulate", "--trajectory", "boundary", "--noise-std", "1", "--seed", "3", "--out", "data"], d);
    assert!(o.status.success(), "{o:?}");
    let info: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(info["snapshots"], 80);
    let csv = std::fs::read_to_string(d.join("data/sim-boundary.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "point_id,x,y,anchor_id,rssi,channel,technology");
    assert_eq!(csv.lines().count(), 1 + 80 * 4);

    let o = doaloc(
        &[
            "run",
            "--scenario",
            "data/sim-boundary.toml",
            "--estimators",
            "pf-doa,drss,wcl",
            "--trials",
            "3",
            "--out",
            "r.csv",
        ],
        d,
    );
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("D-RSS"));
    let results = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(results.lines().next().unwrap(), "estimator,scenario,rmse_m,rmse_std_m,tpi_ms,tpi_std_ms,trials");
    assert_eq!(results.lines().count(), 4);

    let o = doaloc(&["report", "r.csv", "--json"], d);
    assert!(o.status.success());
    let recs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(recs.as_array().unwrap().len(), 3);
    assert!(recs.as_array().unwrap().iter().all(|r| r["scenario"] == "sim-boundary" && r["trials"] == 3));
}

#[test]
fn seeded_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| {
        [
            "run",
            "--scenario",
            "sim:diagonal",
            "--estimators",
            "pf-doa,markov",
            "--trials",
            "2",
            "--seed",
            "11",
            "--out",
            out,
        ]
    };
    assert!(doaloc(&args("a.csv"), d).status.success());
    assert!(doaloc(&args("b.csv"), d).status.success());
    let rmse_cols = |f: &str| -> Vec<String> {
        std::fs::read_to_string(d.join(f))
            .unwrap()
            .lines()
            .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
            .collect()
    };
    assert_eq!(rmse_cols("a.csv"), rmse_cols("b.csv"));
}

#[test]
fn sweep_from_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("plan.toml"),
        "trials = 2\nestimators = [\"pf-doa\", \"trilateration\"]\n\n[[scenarios]]\nsource = \"simulated\"\ntrajectory = \"cross_coverage\"\n\n[sweep]\nparameter = \"noise_std\"\nvalues = [1.0, 3.0]\n",
    )
    .unwrap();
    let o = doaloc(&["sweep", "--plan", "plan.toml", "--profile", "calibrated", "--out", "s.csv"], d);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1 + 2 * 2);
    assert!(rows[1].starts_with("noise_std,1,pf-doa,sim-cross_coverage,"));
    assert!(rows[4].starts_with("noise_std,3,trilateration,"));
}

#[test]
fn convert_wide_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("wide.csv"), "px,py,A,B,C\n1.0,2.0,-50,-60,\n3.0,4.0,-55,-65,-70\n").unwrap();
    let o = doaloc(
        &[
            "convert",
            "wide.csv",
            "--x",
            "px",
            "--y",
            "py",
            "--anchors",
            "A,B,C",
            "--technology",
            "ble",
            "--out",
            "c.csv",
        ],
        d,
    );
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(d.join("c.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    assert!(text.contains("1,3.0,4.0,C,-70.0,,ble"));
}

#[test]
fn failures_are_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = doaloc(&["run", "--scenario", "missing.toml"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_json(&o)["error"].as_str().unwrap().contains("missing.toml"));

    let o = doaloc(&["run", "--estimators", "knn"], d);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["usage"], true);

    let o = doaloc(&["run", "--scenario", "sim:diagonal", "--trials", "0"], d);
    assert_eq!(o.status.code(), Some(1));

    let o = doaloc(&["sweep", "--scenario", "sim:diagonal"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_json(&o)["error"].as_str().unwrap().contains("--parameter"));

    std::fs::write(d.join("bad.csv"), "a,b\n1,2\n").unwrap();
    assert_eq!(doaloc(&["report", "bad.csv"], d).status.code(), Some(1));
}

#[test]
fn shipped_plans_parse() {
    let plans = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans");
    let sim = doaloc::bench::PlanFile::from_file(&plans.join("simulated.toml")).unwrap();
    let resolved = sim.resolve(&plans).unwrap();
    assert_eq!(resolved.scenarios.len(), 3);
    assert_eq!(resolved.settings, doaloc::bench::EstimatorSettings::calibrated());
    assert!(doaloc::bench::PlanFile::from_file(&plans.join("datasets.toml")).is_ok());
    let d = doaloc::datasets::ScenarioDescriptor::from_file(&plans.join("dataset2_inside.example.toml")).unwrap();
    assert_eq!(d.channel, Some(0));
}
