//! End-to-end tests of the command-line tool: real binary invocations on
//! temporary directories, checking summaries, artifacts, exit codes, and
//! rerun reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pnrd_cli::config::{from_toml, BUILTIN_PRESETS};

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run_tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pnrd"))
        .args(args)
        .output()
        .expect("the tool binary runs")
}

fn run_expecting_success(args: &[&str]) -> (String, String) {
    let output = run_tool(args);
    let stdout = String::from_utf8(output.stdout).unwrap();
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(
        output.status.success(),
        "tool failed\nstdout: {stdout}\nstderr: {stderr}"
    );
    (stdout, stderr)
}

fn run_expecting_failure(args: &[&str]) -> String {
    let output = run_tool(args);
    assert!(
        !output.status.success(),
        "tool unexpectedly succeeded: {}",
        String::from_utf8_lossy(&output.stdout)
    );
    String::from_utf8(output.stderr).unwrap()
}

#[test]
fn telecom_tree_search_needs_no_extra_stages() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[architecture]\n\
         kind = \"balanced-tdm\"\n\
         preset = \"1550nm\"\n\
         \n\
         [source]\n\
         chi = 0.3\n\
         \n\
         [task]\n\
         kind = \"optimize\"\n\
         target_m = 3\n",
    );
    let out = dir.path().join("artifacts");
    let (stdout, _) = run_expecting_success(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("m_opt = 2"), "summary was: {stdout}");
    assert!(stdout.contains("(m_min = 2)"), "summary was: {stdout}");
    let trace = fs::read_to_string(out.join("design.csv")).unwrap();
    assert!(trace.starts_with(
        "index,n_bins,stages,coupling_ratio,fidelity,detection_probability,fidelity_gap,chosen\n"
    ));
    // Exactly one row is marked chosen.
    let chosen = trace
        .lines()
        .skip(1)
        .filter(|line| line.ends_with(",1"))
        .count();
    assert_eq!(chosen, 1);
}

#[test]
fn loop_matrix_rows_are_normalized_click_distributions() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[architecture]\n\
         kind = \"loop-tdm\"\n\
         n_bins = 5\n\
         coupling_ratio = 0.60\n\
         preset = \"780nm\"\n\
         \n\
         [task]\n\
         kind = \"matrix\"\n",
    );
    let out = dir.path().join("artifacts");
    let (stdout, _) = run_expecting_success(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("matrix: 5 outputs"), "summary was: {stdout}");

    let table = fs::read_to_string(out.join("matrix.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("n\\m,0,1,2,3,4,5"));
    let mut data_rows = 0;
    for line in lines {
        let mut fields = line.split(',');
        let photon_number: usize = fields.next().unwrap().parse().unwrap();
        assert_eq!(photon_number, data_rows);
        let total: f64 = fields.map(|field| field.parse::<f64>().unwrap()).sum();
        assert!(
            (total - 1.0).abs() <= 1e-10,
            "row {photon_number} sums to {total}"
        );
        data_rows += 1;
    }
    // Without a source block the depth defaults to the output count.
    assert_eq!(data_rows, 6);
}

#[test]
fn validation_task_reports_a_clean_suite() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[task]\n\
         kind = \"validate\"\n\
         spec_count = 40\n\
         photon_max = 3\n\
         mc_spec_count = 2\n\
         mc_trials = 100000\n\
         seed = 7\n",
    );
    let out = dir.path().join("artifacts");
    let (stdout, _) = run_expecting_success(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("validate:"), "summary was: {stdout}");
    assert!(stdout.contains("ok"), "summary was: {stdout}");

    let report = fs::read_to_string(out.join("validation.csv")).unwrap();
    let row = report.lines().nth(1).unwrap();
    assert_eq!(
        row.rsplit(',').next().unwrap(),
        "0",
        "expected zero failures in: {row}"
    );
}

#[test]
fn deterministic_tasks_rerun_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[architecture]\n\
         kind = \"loop-tdm\"\n\
         preset = \"780nm\"\n\
         \n\
         [source]\n\
         chi = 0.3\n\
         \n\
         [task]\n\
         kind = \"optimize\"\n\
         target_m = 1\n",
    );
    let out_a = dir.path().join("first");
    let out_b = dir.path().join("second");
    for out in [&out_a, &out_b] {
        run_expecting_success(&[
            "run",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let first = fs::read(out_a.join("design.csv")).unwrap();
    let second = fs::read(out_b.join("design.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn sampling_tasks_rerun_byte_identical_with_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[task]\n\
         kind = \"validate\"\n\
         spec_count = 20\n\
         photon_max = 3\n\
         mc_spec_count = 2\n\
         mc_trials = 50000\n\
         seed = 9\n",
    );
    let out_a = dir.path().join("first");
    let out_b = dir.path().join("second");
    for out in [&out_a, &out_b] {
        run_expecting_success(&[
            "run",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let first = fs::read(out_a.join("validation.csv")).unwrap();
    let second = fs::read(out_b.join("validation.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn thread_cap_does_not_change_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[architecture]\n\
         kind = \"balanced-tdm\"\n\
         preset = \"780nm\"\n\
         \n\
         [source]\n\
         chi = 0.3\n\
         \n\
         [task]\n\
         kind = \"optimize\"\n\
         target_m = 2\n",
    );
    let out_wide = dir.path().join("wide");
    let out_narrow = dir.path().join("narrow");
    run_expecting_success(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out_wide.to_str().unwrap(),
    ]);
    run_expecting_success(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out_narrow.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert_eq!(
        fs::read(out_wide.join("design.csv")).unwrap(),
        fs::read(out_narrow.join("design.csv")).unwrap()
    );
}

#[test]
fn preset_listing_is_the_published_table() {
    let (stdout, _) = run_expecting_success(&["preset", "list"]);
    assert_eq!(stdout, pnrd_cli::preset_table());
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next(),
        Some(
            "name,coupler_loss_db,fiber_loss_db,switch_loss_db,detector_efficiency,\
             dark_count,metadata"
        )
    );
    let silicon = lines.next().unwrap();
    assert!(silicon.starts_with("780nm,0.4,0.2,2,0.6,0.000005,"));
    let ingaas = lines.next().unwrap();
    assert!(ingaas.starts_with("1550nm,0.5,0.8,1.2,0.1,0.00096,"));
    assert_eq!(lines.next(), None);
}

#[test]
fn presets_round_trip_through_the_config_schema() {
    for preset in &BUILTIN_PRESETS {
        // Spelled out field by field...
        let p = preset.params;
        let explicit = format!(
            "[architecture]\n\
             kind = \"balanced-tdm\"\n\
             stages = 1\n\
             coupler_loss_db = {}\n\
             fiber_loss_db = {}\n\
             switch_loss_db = {}\n\
             detector_efficiency = {}\n\
             dark_count = {}\n\
             \n\
             [task]\n\
             kind = \"matrix\"\n",
            p.coupler_loss_db,
            p.fiber_loss_db,
            p.switch_loss_db,
            p.detector_efficiency,
            p.dark_count
        );
        let reloaded = from_toml(&explicit)
            .unwrap()
            .architecture()
            .unwrap()
            .component_params()
            .unwrap();
        assert_eq!(reloaded, preset.params, "explicit form of {}", preset.name);

        // ...or by name; both reload to the same values.
        let named = format!(
            "[architecture]\n\
             kind = \"balanced-tdm\"\n\
             stages = 1\n\
             preset = \"{}\"\n\
             \n\
             [task]\n\
             kind = \"matrix\"\n",
            preset.name
        );
        let reloaded = from_toml(&named)
            .unwrap()
            .architecture()
            .unwrap()
            .component_params()
            .unwrap();
        assert_eq!(reloaded, preset.params, "named form of {}", preset.name);
    }
}

#[test]
fn impossible_signatures_warn_and_leave_fields_empty() {
    let dir = tempfile::tempdir().unwrap();
    // Every photon is lost and there are no dark counts, so any click
    // pattern other than all-zeros has probability zero.
    let config = write_config(
        dir.path(),
        "[architecture]\n\
         kind = \"balanced-nport\"\n\
         n_outputs = 2\n\
         path_loss = 1.0\n\
         dark_count = 0.0\n\
         \n\
         [source]\n\
         chi = 0.1\n\
         \n\
         [task]\n\
         kind = \"signature-fidelity\"\n\
         signature = \"01\"\n",
    );
    let out = dir.path().join("artifacts");
    let (stdout, stderr) = run_expecting_success(&[
        "run",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stderr.contains("zero probability"), "stderr was: {stderr}");
    assert!(stdout.contains("cannot occur"), "summary was: {stdout}");
    let table = fs::read_to_string(out.join("signature.csv")).unwrap();
    assert_eq!(
        table,
        "signature,click_count,fidelity,detection_probability\n01,1,,\n"
    );
}

#[test]
fn config_mistakes_name_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();

    // A typo in a key fails the parse and echoes the bad name.
    let typo = write_config(
        dir.path(),
        "[architecture]\n\
         kind = \"loop-tdm\"\n\
         couplng_ratio = 0.5\n\
         \n\
         [task]\n\
         kind = \"matrix\"\n",
    );
    let stderr = run_expecting_failure(&["run", typo.to_str().unwrap()]);
    assert!(stderr.contains("couplng_ratio"), "stderr was: {stderr}");

    // A sampling task without a seed is rejected, naming the key.
    let unseeded = write_config(dir.path(), "[task]\nkind = \"validate\"\n");
    let stderr = run_expecting_failure(&["run", unseeded.to_str().unwrap()]);
    assert!(stderr.contains("task.seed"), "stderr was: {stderr}");

    // A domain error names the key too.
    let out_of_range = write_config(
        dir.path(),
        "[architecture]\n\
         kind = \"loop-tdm\"\n\
         n_bins = 3\n\
         coupling_ratio = 1.5\n\
         preset = \"780nm\"\n\
         \n\
         [task]\n\
         kind = \"matrix\"\n",
    );
    let stderr = run_expecting_failure(&["run", out_of_range.to_str().unwrap()]);
    assert!(stderr.contains("coupling"), "stderr was: {stderr}");
}

#[test]
fn shipped_example_configs_all_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("configs");
    let mut ran = 0;
    for entry in fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        // Shrink the shipped validation config so the suite stays quick;
        // run everything else as-is.
        let dir = tempfile::tempdir().unwrap();
        let config_path = if path.file_name().and_then(|n| n.to_str()) == Some("validate.toml") {
            let text = fs::read_to_string(&path)
                .unwrap()
                .replace("spec_count = 200", "spec_count = 30")
                .replace("mc_spec_count = 20", "mc_spec_count = 1")
                .replace("mc_trials = 1000000", "mc_trials = 50000");
            write_config(dir.path(), &text)
        } else {
            path.clone()
        };
        let out = dir.path().join("artifacts");
        let (stdout, _) = run_expecting_success(&[
            "run",
            config_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            stdout.trim().lines().count() == 1,
            "expected one summary line from {}, got: {stdout}",
            path.display()
        );
        ran += 1;
    }
    assert_eq!(ran, 7, "all shipped example configs were exercised");
}
