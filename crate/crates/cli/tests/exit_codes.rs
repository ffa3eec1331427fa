use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.json"))
}

fn sweep(scenario: &Path, command: &str, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweep"))
        .arg("--scenario")
        .arg(scenario)
        .args(["--command", command, "--out"])
        .arg(out)
        .args(extra)
        .output()
        .expect("spawn sweep")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn static_scenario_gives_a_constant_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&fixture("static"), "solve", dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,y_1,y_2,v_1,v_2,dist_to_C,residual"));
    let rows = rows(&dir.path().join("trajectory.csv"));
    assert_eq!(rows.len(), 512);
    // Projection of y0 = (1.5, 0.5) onto the unit ball, then at rest.
    let first = (rows[0][1], rows[0][2]);
    assert!((first.0.hypot(first.1) - 1.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| (r[1], r[2]) == first && r[3] == 0.0 && r[4] == 0.0));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().next(), Some("level,sup_diff,max_violation"));
}

#[test]
fn jump_rows_are_duplicated_with_the_projection_direction() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&fixture("jump"), "solve", dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = rows(&dir.path().join("trajectory.csv"));
    // t = 1 is off the uniform grid, so both jump rows are inserted.
    assert_eq!(rows.len(), 514);
    let at_jump: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == 1.0).collect();
    assert_eq!(at_jump.len(), 2);
    let (left, right) = (at_jump[0], at_jump[1]);
    assert_eq!((left[1], left[2]), (1.0, 0.0));
    assert_eq!((right[1], right[2]), (0.0, 0.0));
    // v is a nonnegative multiple of P_C(1)(y(1-)) - y(1-) = (-1, 0).
    assert!(right[3] < 0.0 && right[4] == 0.0);
}

#[test]
fn inadmissible_jump_names_the_time() {
    let dir = tempfile::tempdir().unwrap();
    for command in ["solve", "converge", "validate"] {
        let o = sweep(&fixture("inadmissible"), command, dir.path(), &[]);
        assert_eq!(code(&o), 1);
        assert!(stderr(&o).contains("t = 1"), "{}", stderr(&o));
    }
}

#[test]
fn malformed_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("static")).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replace("\"radius\": 1", "\"radius\": -1")).unwrap();
    let o = sweep(&bad, "solve", dir.path(), &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("segments[0]"), "{}", stderr(&o));
    std::fs::write(&bad, "{\"dimension\": 2}").unwrap();
    let o = sweep(&bad, "solve", dir.path(), &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing field"), "{}", stderr(&o));
    let o = sweep(&dir.path().join("absent.json"), "solve", dir.path(), &[]);
    assert_eq!(code(&o), 1);
}

#[test]
fn max_level_reached_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(
        &fixture("play_halfspace"),
        "solve",
        dir.path(),
        &["--max-level", "8", "--tol", "1e-9"],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn validate_passes_fixtures_and_fails_the_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["play_halfspace", "ballcomplement_offaxis", "static"] {
        let o = sweep(&fixture(name), "validate", dir.path(), &[]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let o = sweep(&fixture("negative_control"), "validate", dir.path(), &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL oracle sup error"));
}

#[test]
fn converge_reports_decay() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["play_halfspace", "geodesic"] {
        let o = sweep(&fixture(name), "converge", dir.path(), &[]);
        assert_eq!(code(&o), 0, "{name}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
        let table = rows(&dir.path().join("converge.csv"));
        assert_eq!(table.len(), 6);
        let ratios: Vec<f64> = table.iter().skip(1).map(|r| r[2]).collect();
        assert!(
            ratios.iter().sum::<f64>() / (ratios.len() as f64) < 0.85,
            "{name}: {ratios:?}"
        );
    }
    let o = sweep(&fixture("static"), "converge", dir.path(), &[]);
    assert_eq!(code(&o), 0);
    assert!(rows(&dir.path().join("converge.csv")).iter().all(|r| r[1] == 0.0));
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert_eq!(
            code(&sweep(&fixture("ballcomplement_offaxis"), "solve", dir.path(), &[])),
            0
        );
        assert_eq!(code(&sweep(&fixture("play_halfspace"), "converge", dir.path(), &[])), 0);
    }
    for file in ["trajectory.csv", "report.csv", "converge.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}
