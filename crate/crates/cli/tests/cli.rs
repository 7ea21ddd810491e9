use std::path::Path;
use std::process::{Command, Output};

fn recurve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recurve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn experiment_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["1", "2", "3"] {
        let a = dir.path().join(format!("a{n}.csv"));
        let b = dir.path().join(format!("b{n}.csv"));
        for out in [&a, &b] {
            let o = recurve(&["experiment", n, "--seed", "42", "--csv", path(out)]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(x, y, "experiment {n}");
        assert!(x.starts_with(b"shot_index,theta_cmd,phi_cmd,"));
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn experiment_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("e1.svg");
    let o = recurve(&[
        "experiment",
        "1",
        "--seed",
        "3",
        "--svg",
        path(&svg),
        "--shots",
        "4",
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("class=\"shot\"").count(), 4);
    // CSV went to stdout.
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
}

#[test]
fn seed_is_mandatory_for_stochastic_commands() {
    for args in [
        &["experiment", "1"][..],
        &["shoot", "--yaw-deg", "1"],
        &["calibrate"],
    ] {
        let o = recurve(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("t.pgm");
    let o = recurve(&["render", "--out", path(&img), "--pixel-noise", "8"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn render_then_detect() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("t.pgm");
    let o = recurve(&[
        "render",
        "--out",
        path(&img),
        "--lateral-cm",
        "-20",
        "--pixel-noise",
        "8",
        "--seed",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&img).unwrap();
    assert!(bytes.starts_with(b"P5\n640 480\n255\n"));
    assert_eq!(bytes.len(), 15 + 640 * 480);

    let o = recurve(&["detect", path(&img)]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    // 20 cm left at 10 m is 90 px left of center.
    let x: f64 = row[0].parse().unwrap();
    assert!((x - 230.0).abs() <= 3.0, "{out}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let blank = dir.path().join("blank.pgm");
    let mut pgm = b"P5\n320 240\n255\n".to_vec();
    pgm.extend(std::iter::repeat_n(200u8, 320 * 240));
    std::fs::write(&blank, pgm).unwrap();
    assert_eq!(recurve(&["detect", path(&blank)]).status.code(), Some(2));

    let missing = dir.path().join("missing.pgm");
    assert_eq!(recurve(&["detect", path(&missing)]).status.code(), Some(3));

    let garbage = dir.path().join("garbage.pgm");
    std::fs::write(&garbage, b"P7 nonsense").unwrap();
    assert_eq!(recurve(&["detect", path(&garbage)]).status.code(), Some(1));

    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "[scene]\nwobble = 1\n").unwrap();
    let o = recurve(&["--config", path(&bad_cfg), "fit-ballistics"]);
    assert_eq!(o.status.code(), Some(1));

    let o = recurve(&["experiment", "2", "--seed", "1", "--shots", "0"]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = dir.path().join("narrow.toml");
    let text = recurve::harness::DEFAULT_CONFIG
        .replace("yaw_limit_deg = 11.459155902616466", "yaw_limit_deg = 0.5");
    std::fs::write(&cfg, text).unwrap();
    let o = recurve(&["--config", path(&cfg), "calibrate", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let o = recurve(&["shoot", "--seed", "1", "--csv", path(&unwritable)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn shoot_uses_cli_units() {
    let o = recurve(&[
        "shoot",
        "--seed",
        "1",
        "--yaw-deg",
        "-2",
        "--roll-deg",
        "3",
        "--draw-cm",
        "60",
    ]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "-2.0");
    assert_eq!(row[2], "3.0");
    assert_eq!(row[5], "60.0");
    assert_eq!(row[10], "RELEASED");
}

#[test]
fn calibrate_and_fit_print_results() {
    let o = recurve(&[
        "calibrate",
        "--seed",
        "4",
        "--sigma-yaw-deg",
        "0",
        "--sigma-roll-deg",
        "0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("k_p_deg_per_px = "));

    let o = recurve(&["fit-ballistics"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("efficiency = ") && out.contains("residual"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let o = recurve(&[
        "experiment",
        "1",
        "--seed",
        "9",
        "--shots",
        "3",
        "--sigma-yaw-deg",
        "0",
        "--sigma-roll-deg",
        "0",
        "--draw-cm",
        "60",
        "--csv",
        path(&a),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let impacts: Vec<&str> = rows.iter().map(|r| r.split(',').nth(7).unwrap()).collect();
    assert!(impacts.iter().all(|i| *i == impacts[0]));
    assert!(rows.iter().all(|r| r.split(',').nth(5) == Some("60.0")));
}
