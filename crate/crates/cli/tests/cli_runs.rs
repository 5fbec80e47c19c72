//! End-to-end runs of the `splitkit` binary.

use std::path::Path;
use std::process::{Command, Output};

use splitkit_cli::netpbm::{decode, read_image, write_image};
use splitkit_core::imaging::{degrade, synthetic_phantom, Image};

fn splitkit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitkit"))
        .args(args)
        .current_dir(dir)
        .env("SPLITKIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn toy_inclusion_reports_four_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitkit(&["toy-inclusion", "--output_dir", "toy"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let field = |name: &str| -> f64 {
        text.split_whitespace()
            .find_map(|t| t.strip_prefix(name))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((field("x_bar=") - 4.0 / 3.0).abs() < 1e-8);
    assert!((field("u_bar=") - 4.0 / 3.0).abs() < 1e-8);
    let summary = std::fs::read_to_string(dir.path().join("toy/summary.txt")).unwrap();
    assert_eq!(summary.trim_end(), text.trim_end());
    assert!(dir.path().join("toy/trace.csv").exists());
}

#[test]
fn deblur_from_image_file_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let truth = synthetic_phantom(32, 32).unwrap();
    let b = degrade(&truth, 9, 4.0, 1e-3, 3).unwrap();
    write_image(&truth, &dir.path().join("truth.pgm"), 65535).unwrap();
    write_image(&b, &dir.path().join("blurred.pgm"), 65535).unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "# restoration of a stored observation\nmode = deblur\ninput_image = blurred.pgm\ntruth_image = truth.pgm\niterations = 50\noutput_dir = from-config\n",
    )
    .unwrap();
    let out = splitkit(&["--config", "run.conf", "--output_dir", "overridden"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("from-config").exists());
    let outputs = dir.path().join("overridden");
    assert!(outputs.join("restored.pgm").exists());
    assert!(!outputs.join("observed.pgm").exists());
    let restored = read_image(&outputs.join("restored.pgm")).unwrap();
    assert_eq!((restored.height(), restored.width(), restored.channels()), (32, 32, 1));
    let isnr: f64 = stdout(&out)
        .split_whitespace()
        .find_map(|t| t.strip_prefix("isnr="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(isnr > 0.0);
}

#[test]
fn phantom_trace_has_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitkit(&["deblur", "--phantom", "32x32", "--output_dir", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 401);
    assert_eq!(
        lines[0],
        "iteration,residual_gamma,residual_primal,residual_dual,objective,isnr"
    );
    let residuals: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for w in residuals.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!(lines[400].starts_with("400,"));
    assert!(dir.path().join("out/observed.pgm").exists());
}

#[test]
fn color_images_round_trip_as_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let gray = synthetic_phantom(16, 16).unwrap();
    let planes = vec![gray.plane(0), gray.map(|v| 1.0 - v).unwrap().plane(0), gray.plane(0)];
    let color = Image::from_planes(16, 16, &planes).unwrap();
    write_image(&color, &dir.path().join("in.ppm"), 255).unwrap();
    let out = splitkit(
        &["deblur", "--input_image", "in.ppm", "--degrade", "true", "--iterations", "20", "--output_dir", "c"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(dir.path().join("c/restored.ppm")).unwrap();
    assert!(bytes.starts_with(b"P6"));
    assert_eq!(decode(&bytes).unwrap().channels(), 3);
}

#[test]
fn missing_input_exits_four_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitkit(&["deblur", "--input_image", "absent.pgm", "--output_dir", "never"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(!dir.path().join("never").exists());
}

#[test]
fn malformed_image_reports_byte_offset() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.pgm"), b"P5\n4 4\n70000\n").unwrap();
    let out = splitkit(&["deblur", "--input_image", "bad.pgm", "--output_dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 7"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["deblur", "--phantom", "16x16", "--gamma", "0.9"][..],
        &["deblur", "--phantom", "16x16", "--lambda", "1"],
        &["deblur", "--phantom", "16x16", "--blur_size", "4"],
        &["deblur", "--phantom", "12x12"],
        &["deblur"],
        &["sharpen"],
        &["--config", "absent.conf"],
    ] {
        let out = splitkit(args, dir.path());
        let expected = if args[0] == "--config" { 4 } else { 2 };
        assert_eq!(out.status.code(), Some(expected), "{args:?}");
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_thread_count_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_splitkit"))
        .args(["deblur", "--phantom", "16x16", "--iterations", "2"])
        .current_dir(dir.path())
        .env("SPLITKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_and_equivalence_modes_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitkit(&["averagedness-audit", "--pairs", "50", "--output_dir", "a"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("violations=0"));
    let audit = std::fs::read_to_string(dir.path().join("a/audit.csv")).unwrap();
    assert_eq!(audit.lines().count(), 1 + 4 * 3 * 3 * 2);

    let out = splitkit(&["mt-equivalence", "--output_dir", "m"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("pass=true"));
}
