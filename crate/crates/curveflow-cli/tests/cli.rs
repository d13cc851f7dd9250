//! End-to-end tests of the `curveflow` binary: exit codes, the
//! machine-readable error classes on stderr, and the files each kind of run
//! leaves behind.

use std::process::{Command, Output};

use curveflow::StopModeSpec;

fn curveflow_command() -> Command {
    let mut command = Command::new(env!("CARGO_BIN_EXE_curveflow"));
    // Isolate the tests from any ambient output-directory setting.
    command.env_remove("CURVEFLOW_OUTPUT");
    command
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// A short complete configuration used where the tests need a run that
/// finishes in a fraction of a second: the shrinking circle stopped at half
/// its initial area.
fn quick_circle_config() -> curveflow::SimulationConfig {
    let mut config = curveflow::preset("circle_shortening").expect("preset exists");
    config.tau = 1e-3;
    config.stop.mode = StopModeSpec::ShrinkToPoint {
        area_ratio_threshold: 0.5,
    };
    config
}

#[test]
fn preset_run_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let output = curveflow_command()
        .args(["--preset", "circle_shortening", "--tau", "1e-3", "--emit-svg"])
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();

    assert!(
        output.status.success(),
        "stderr: {}",
        stderr_of(&output)
    );
    let stdout = stdout_of(&output);
    assert!(stdout.contains("steps: 500"), "stdout: {stdout}");
    assert!(stdout.contains("stop: shrink_to_point"), "stdout: {stdout}");

    for name in [
        "series.csv",
        "summary.csv",
        "final_rescaled.csv",
        "run.svg",
        "final_rescaled.svg",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let svg = std::fs::read_to_string(dir.path().join("run.svg")).unwrap();
    assert!(svg.starts_with("<?xml"), "unexpected SVG prologue");
    assert!(svg.contains("<svg "), "missing svg root element");
}

#[test]
fn unknown_preset_reports_its_class_and_the_available_names() {
    let output = curveflow_command()
        .args(["--preset", "no_such_experiment"])
        .output()
        .unwrap();

    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("error_class=UnknownPreset"), "stderr: {stderr}");
    assert!(stderr.contains("circle_shortening"), "stderr: {stderr}");
}

#[test]
fn malformed_config_file_reports_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "flow = {\n").unwrap();

    let output = curveflow_command()
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap();

    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("error_class=ParseError"), "stderr: {stderr}");
}

#[test]
fn override_that_breaks_validation_exits_one() {
    let output = curveflow_command()
        .args(["--preset", "circle_shortening", "--epsilon", "1.0"])
        .output()
        .unwrap();

    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(
        stderr.contains("error_class=ValidationError"),
        "stderr: {stderr}"
    );
}

#[test]
fn missing_config_and_preset_exits_one() {
    let output = curveflow_command().output().unwrap();

    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(
        stderr.contains("error_class=ValidationError"),
        "stderr: {stderr}"
    );
}

#[test]
fn mesh_collapse_exits_two_and_leaves_the_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let output = curveflow_command()
        .args(["--preset", "weighted"])
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();

    assert_eq!(output.status.code(), Some(2));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("error_class=MeshCollapse"), "stderr: {stderr}");

    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(
        summary.lines().count() > 100,
        "partial scalar trace should cover the accepted steps"
    );
    assert!(dir.path().join("series.csv").exists());
}

#[test]
fn batch_runs_every_config_into_its_own_subdirectory() {
    let config_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let text = toml::to_string(&quick_circle_config()).unwrap();
    std::fs::write(config_dir.path().join("first.toml"), &text).unwrap();
    std::fs::write(config_dir.path().join("second.toml"), &text).unwrap();

    let output = curveflow_command()
        .arg("--batch")
        .arg(config_dir.path())
        .arg("--output-dir")
        .arg(out_dir.path())
        .output()
        .unwrap();

    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("first: steps:"), "stdout: {stdout}");
    assert!(stdout.contains("second: steps:"), "stdout: {stdout}");
    for stem in ["first", "second"] {
        assert!(out_dir.path().join(stem).join("series.csv").exists());
        assert!(out_dir.path().join(stem).join("summary.csv").exists());
    }
}

#[test]
fn batch_reports_the_worst_failure_among_its_runs() {
    let config_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let text = toml::to_string(&quick_circle_config()).unwrap();
    std::fs::write(config_dir.path().join("good.toml"), &text).unwrap();
    std::fs::write(config_dir.path().join("bad.toml"), "not toml {\n").unwrap();

    let output = curveflow_command()
        .arg("--batch")
        .arg(config_dir.path())
        .arg("--output-dir")
        .arg(out_dir.path())
        .output()
        .unwrap();

    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(
        stderr.contains("error_class=ParseError (run bad)"),
        "stderr: {stderr}"
    );
    assert!(out_dir.path().join("good").join("series.csv").exists());
}

#[test]
fn environment_variable_supplies_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config_dir = tempfile::tempdir().unwrap();
    let path = config_dir.path().join("run.toml");
    std::fs::write(&path, toml::to_string(&quick_circle_config()).unwrap()).unwrap();

    let output = curveflow_command()
        .arg("--config")
        .arg(&path)
        .env("CURVEFLOW_OUTPUT", dir.path())
        .output()
        .unwrap();

    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    assert!(dir.path().join("series.csv").exists());
}

#[test]
fn output_dir_flag_beats_the_environment_variable() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let config_dir = tempfile::tempdir().unwrap();
    let path = config_dir.path().join("run.toml");
    std::fs::write(&path, toml::to_string(&quick_circle_config()).unwrap()).unwrap();

    let output = curveflow_command()
        .arg("--config")
        .arg(&path)
        .env("CURVEFLOW_OUTPUT", env_dir.path())
        .arg("--output-dir")
        .arg(flag_dir.path())
        .output()
        .unwrap();

    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    assert!(flag_dir.path().join("series.csv").exists());
    assert!(!env_dir.path().join("series.csv").exists());
}

#[test]
fn list_presets_prints_one_name_per_line() {
    let output = curveflow_command().arg("--list-presets").output().unwrap();

    assert!(output.status.success());
    let stdout = stdout_of(&output);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), curveflow::PRESET_NAMES.len());
    assert!(lines.contains(&"forced_circle"));
}

#[test]
fn grid_override_changes_the_series_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let output = curveflow_command()
        .args(["--preset", "circle_shortening", "--tau", "1e-3"])
        .args(["--N", "64", "--snapshot-every", "1000000"])
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();

    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    // Header plus two retained frames (initial and final) of 64 rows each.
    assert_eq!(series.lines().count(), 1 + 2 * 64);
}
