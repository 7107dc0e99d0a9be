//! End-to-end tests of the `curvpend` binary: CSV contracts, exit codes,
//! config precedence, and the documented command examples.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvpend"))
        .args(args)
        .env_remove("CURVPEND_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

/// Parses CSV text into (header fields, numeric rows); a trailing
/// non-numeric column (classification) is returned separately.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>, Vec<String>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header")
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let mut nums = Vec::new();
        for f in &fields {
            match f.parse::<f64>() {
                Ok(x) => nums.push(x),
                Err(_) => labels.push(f.to_string()),
            }
        }
        rows.push(nums);
    }
    (header, rows, labels)
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("curvpend-test-{}-{name}", std::process::id()))
}

#[test]
fn simulate_output_is_deterministic() {
    let args = [
        "simulate",
        "--curvature",
        "-1",
        "--zeta0",
        "1.2",
        "--t-end",
        "2",
        "--dt",
        "0.01",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "CSV must be bit-identical across runs");
}

#[test]
fn equilibrium_start_freezes_the_angle() {
    let out = run(&[
        "simulate",
        "--zeta0",
        "0",
        "--zeta-dot0",
        "0",
        "--t-end",
        "1",
        "--dt",
        "0.01",
    ]);
    assert!(out.status.success());
    let (header, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(header, ["t", "zeta", "zeta_dot", "H", "first_integral"]);
    assert_eq!(rows.len(), 101);
    for row in &rows {
        assert_eq!(row[1], 0.0, "zeta moved off the equilibrium");
        assert_eq!(row[2], 0.0);
    }
}

#[test]
fn leapfrog_keeps_the_energy_column_flat() {
    let out = run(&[
        "simulate",
        "--curvature",
        "1",
        "--speed",
        "1",
        "--zeta0",
        "0.7854",
        "--t-end",
        "10",
        "--dt",
        "0.001",
        "--integrator",
        "leapfrog",
    ]);
    assert!(out.status.success());
    let (_, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(rows.len(), 10_001);
    let h0 = rows[0][3];
    let max_rel = rows
        .iter()
        .map(|r| (r[3] - h0).abs() / h0.abs())
        .fold(0.0_f64, f64::max);
    assert!(max_rel <= 1e-6, "H drifted by {max_rel:.3e}");
}

#[test]
fn stiff_elastic_tracks_the_rigid_run() {
    let rigid = run(&[
        "simulate", "--zeta0", "0.6", "--t-end", "10", "--dt", "0.001",
    ]);
    let elastic = run(&[
        "simulate",
        "--zeta0",
        "0.6",
        "--t-end",
        "10",
        "--dt",
        "0.001",
        "--elastic",
        "--spring-k",
        "1e6",
    ]);
    assert!(rigid.status.success() && elastic.status.success());
    let (_, rigid_rows, _) = parse_csv(&stdout_of(&rigid));
    let (eh, elastic_rows, _) = parse_csv(&stdout_of(&elastic));
    assert_eq!(
        eh,
        ["t", "zeta", "zeta_dot", "l", "l_dot", "H", "first_integral"]
    );
    assert_eq!(rigid_rows.len(), elastic_rows.len());
    let max_gap = rigid_rows
        .iter()
        .zip(&elastic_rows)
        .map(|(r, e)| (r[1] - e[1]).abs())
        .fold(0.0_f64, f64::max);
    assert!(max_gap <= 1e-3, "stiff elastic strays by {max_gap:.3e}");
}

#[test]
fn numeric_abort_flushes_partial_csv_and_exits_3() {
    let path = temp_path("abort.csv");
    let out = run(&[
        "simulate",
        "--elastic",
        "--spring-k",
        "1e6",
        "--dt",
        "0.1",
        "--t-end",
        "10",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(stderr.contains("numeric abort"), "stderr: {stderr}");
    let text = std::fs::read_to_string(&path).expect("partial file written");
    let (_, rows, _) = parse_csv(&text);
    assert!(!rows.is_empty(), "at least the initial sample is flushed");
    assert!(rows.iter().all(|r| r.iter().all(|x| x.is_finite())));
    std::fs::remove_file(&path).ok();
}

#[test]
fn config_errors_exit_2() {
    // Unknown config key.
    let path = temp_path("bad-key.conf");
    std::fs::write(&path, "curvture = 1\n").unwrap();
    let out = run(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("curvture"));
    std::fs::remove_file(&path).ok();

    // Embedding on the flat plane.
    let out = run(&["simulate", "--embed", "--curvature", "0"]);
    assert_eq!(out.status.code(), Some(2));

    // Leapfrog under a non-constant pivot.
    let out = run(&[
        "simulate",
        "--accel",
        "const:0.5",
        "--integrator",
        "leapfrog",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown flag (rejected by the parser itself).
    let out = run(&["simulate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    // Malformed acceleration grammar.
    let out = run(&["simulate", "--accel", "ramp:3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_flag_and_env_precedence() {
    let file_a = temp_path("prec-a.conf");
    let file_b = temp_path("prec-b.conf");
    std::fs::write(&file_a, "# base config\nzeta0 = 0.3\ndt = 0.5\nt-end = 1\n").unwrap();
    std::fs::write(&file_b, "zeta0 = 0.9\ndt = 0.5\nt-end = 1\n").unwrap();

    // File value used when no flag is given.
    let out = run(&["simulate", "--config", file_a.to_str().unwrap()]);
    let (_, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(rows[0][1], 0.3);

    // Flag overrides the file.
    let out = run(&[
        "simulate",
        "--config",
        file_a.to_str().unwrap(),
        "--zeta0",
        "0.7",
    ]);
    let (_, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(rows[0][1], 0.7);

    // CURVPEND_CONFIG supplies the default file...
    let out = Command::new(env!("CARGO_BIN_EXE_curvpend"))
        .args(["simulate"])
        .env("CURVPEND_CONFIG", &file_a)
        .output()
        .unwrap();
    let (_, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(rows[0][1], 0.3);

    // ...and --config beats the env var.
    let out = Command::new(env!("CARGO_BIN_EXE_curvpend"))
        .args(["simulate", "--config", file_b.to_str().unwrap()])
        .env("CURVPEND_CONFIG", &file_a)
        .output()
        .unwrap();
    let (_, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(rows[0][1], 0.9);

    std::fs::remove_file(&file_a).ok();
    std::fs::remove_file(&file_b).ok();
}

#[test]
fn degrees_flag_converts_the_initial_angle() {
    let out = run(&[
        "simulate",
        "--zeta0",
        "45",
        "--degrees",
        "--t-end",
        "0.01",
        "--dt",
        "0.01",
    ]);
    assert!(out.status.success());
    let (_, rows, _) = parse_csv(&stdout_of(&out));
    assert!((rows[0][1] - std::f64::consts::FRAC_PI_4).abs() <= 1e-12);
}

#[test]
fn embed_appends_ambient_columns_on_the_quadric() {
    let out = run(&[
        "simulate",
        "--curvature",
        "1",
        "--embed",
        "--t-end",
        "1",
        "--dt",
        "0.1",
    ]);
    assert!(out.status.success());
    let (header, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(
        header,
        [
            "t",
            "zeta",
            "zeta_dot",
            "H",
            "first_integral",
            "x_pivot",
            "y_pivot",
            "z_pivot",
            "x_mass",
            "y_mass",
            "z_mass"
        ]
    );
    for row in &rows {
        // Unit sphere: both points satisfy x^2 + y^2 + z^2 = 1.
        let pivot = row[5] * row[5] + row[6] * row[6] + row[7] * row[7];
        let mass = row[8] * row[8] + row[9] * row[9] + row[10] * row[10];
        assert!((pivot - 1.0).abs() <= 1e-9);
        assert!((mass - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn portrait_classifies_and_respects_time_reversal() {
    let out = run(&[
        "portrait",
        "--curvature",
        "1",
        "--speed",
        "1",
        "--portrait-grid",
        "-1.5:1.5:7,-2:2:9",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "zeta0,zeta_dot0,first_integral,classification"
    );
    let mut entries: Vec<(f64, f64, f64, String)> = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        entries.push((
            f[0].parse().unwrap(),
            f[1].parse().unwrap(),
            f[2].parse().unwrap(),
            f[3].to_string(),
        ));
    }
    assert_eq!(entries.len(), 63);
    for (z, zd, i, class) in &entries {
        // Classification is symmetric under time reversal.
        let mirrored = entries
            .iter()
            .find(|(z2, zd2, _, _)| z2 == z && *zd2 == -zd)
            .expect("mirrored grid point exists");
        assert_eq!(*class, mirrored.3, "asymmetry at ({z}, {zd})");
        // The rule itself: compare against the separatrix level |K| v^2 = 1.
        let expect = if *i < 1.0 {
            "libration"
        } else if *i > 1.0 {
            "circulation"
        } else {
            "separatrix"
        };
        assert_eq!(class, expect);
    }
    // The resting minimum librates.
    let origin = entries
        .iter()
        .find(|(z, zd, _, _)| *z == 0.0 && *zd == 0.0)
        .unwrap();
    assert_eq!(origin.3, "libration");
    assert_eq!(origin.2, -1.0);
}

#[test]
fn portrait_reports_the_separatrix_level_exactly() {
    let out = run(&[
        "portrait",
        "--curvature",
        "1",
        "--speed",
        "1",
        "--portrait-grid",
        "1.5707963267948966:1.5707963267948966:1,0:0:1",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[2].parse::<f64>().unwrap(), 1.0);
    assert_eq!(fields[3], "separatrix");
}

#[test]
fn period_report_matches_the_closed_form() {
    let out = run(&["period", "--zeta0", "0.7853981633974483", "--dt", "1e-4"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let field = |name: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_else(|| panic!("missing {name} in {text}"))
            .split_whitespace()
            .last()
            .unwrap()
            .parse()
            .unwrap()
    };
    // 4 K(sqrt2/2) for v = 1, K = 1.
    assert!((field("analytic period:") - 7.416_298_709_205_487_7).abs() <= 1e-12);
    assert!(field("relative deviation:") <= 1e-6);

    // Flat curvature has no period.
    let out = run(&["period", "--curvature", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_csv_reports_closed_form_and_numeric_levels() {
    let out = run(&[
        "spectrum",
        "--hbar",
        "0.05",
        "--grid-n",
        "256",
        "--n-levels",
        "4",
        "--rod-length",
        "1.5707963267948966",
    ]);
    assert!(out.status.success());
    let (header, rows, _) = parse_csv(&stdout_of(&out));
    assert_eq!(header, ["n", "E_closed_form", "E_numeric", "deviation"]);
    assert_eq!(rows.len(), 4);
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(row[0] as usize, n);
        // Closed form: hbar (n + 1/2) at v = 1, K = 1.
        assert!((row[1] - 0.05 * (n as f64 + 0.5)).abs() <= 1e-12);
        assert!(row[2].is_finite());
        assert!(row[3].is_finite());
    }
    // Deep-well pairing: levels 0 and 1 are nearly degenerate, so the even
    // rows track the ladder and the odd rows sit a level off.
    assert!((rows[0][2] - rows[1][2]).abs() <= 1e-6 * rows[0][2]);
    assert!(rows[0][3] <= 0.02);

    // The hyperbolic spectrum is not computed.
    let out = run(&["spectrum", "--curvature", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_exits_0() {
    let out = run(&["verify"]);
    assert!(
        out.status.success(),
        "verify exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 13);
    assert!(text.lines().last().unwrap().starts_with("overall: PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn accelerated_and_sinusoidal_profiles_run() {
    for accel in ["const:0.3", "sin:0.2,1.0", "piecewise:0,0.3;1,-0.3"] {
        let out = run(&["simulate", "--accel", accel, "--t-end", "2", "--dt", "0.01"]);
        assert!(out.status.success(), "profile {accel} failed");
        let (_, rows, _) = parse_csv(&stdout_of(&out));
        assert_eq!(rows.len(), 201);
        assert!(rows.iter().all(|r| r.iter().all(|x| x.is_finite())));
    }
}
