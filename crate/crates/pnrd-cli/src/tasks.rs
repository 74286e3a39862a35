//! Task execution: turns a parsed config into library calls, writes the
//! CSV artifacts, and produces the one-line summary printed to stdout.
//!
//! Warnings (impossible outcomes, validation failures) go to stderr so
//! stdout stays one summary line per run.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use pnrd::{
    benefit_boundary, boundary_csv, compare_architectures, comparison_csv,
    condition_on_signature, conditional_matrix_csv, design_result_csv, fidelity_sweep,
    min_stages, optimize_bins, optimize_stages, run_validation, sweep_csv, ArchitectureFamily,
    DesignQuery, DesignQuery64, Signature, ValidationConfig,
};

use crate::config::{parse_family, ExperimentConfig, TaskConfig, TaskKind};

/// Where artifacts go and which command-line overrides apply.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Directory CSV files are written into; created if missing.
    pub out_dir: PathBuf,
    /// `--seed`: overrides the config seed for sampling tasks.
    pub seed_override: Option<u64>,
}

/// Runs the config's task and returns its one-line summary.
pub fn run_task(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    match config.task.kind {
        TaskKind::Matrix => matrix(config, options),
        TaskKind::FidelitySweep => sweep(config, options),
        TaskKind::SignatureFidelity => signature_fidelity(config, options),
        TaskKind::Optimize => optimize(config, options),
        TaskKind::Boundary => boundary(config, options),
        TaskKind::Compare => compare(config, options),
        TaskKind::Validate => validate(config, options),
    }
}

fn write_artifact(
    options: &RunOptions,
    task: &TaskConfig,
    default_name: &str,
    contents: &str,
) -> Result<PathBuf> {
    let name = task.out.as_deref().unwrap_or(default_name);
    fs::create_dir_all(&options.out_dir)
        .with_context(|| format!("creating {}", options.out_dir.display()))?;
    let path = options.out_dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn require<T: Copy>(value: Option<T>, key: &str, task: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("task.{key}: required by task \"{task}\""))
}

fn require_grid<'a>(grid: &'a Option<Vec<f64>>, key: &str, task: &str) -> Result<&'a [f64]> {
    match grid.as_deref() {
        Some(values) if !values.is_empty() => Ok(values),
        _ => Err(anyhow!(
            "task.{key}: a non-empty list is required by task \"{task}\""
        )),
    }
}

/// Summary-line number format; full precision lives in the CSV. Small
/// magnitudes switch to scientific notation so they don't render as zero.
fn fmt6(value: Option<f64>) -> String {
    match value {
        Some(v) if v != 0.0 && v.abs() < 1e-3 => format!("{v:.3e}"),
        Some(v) => format!("{v:.6}"),
        None => "n/a".into(),
    }
}

fn matrix(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    let arch = config.architecture()?;
    let spec = arch
        .architecture_kind()?
        .compile()
        .map_err(|e| anyhow!("architecture: {e}"))?;
    let n_max = match config.task.n_max {
        Some(n_max) => n_max,
        None => match &config.source {
            Some(source) => spec.default_n_max(&source.build(None)?),
            None => spec.n_outputs(),
        },
    };
    let table = spec.conditional_matrix(n_max);
    let path = write_artifact(options, &config.task, "matrix.csv", &conditional_matrix_csv(&table))?;
    Ok(format!(
        "matrix: {} outputs, photon numbers 0..={} -> {}",
        spec.n_outputs(),
        n_max,
        path.display()
    ))
}

fn sweep(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    let task = &config.task;
    let kind = config.architecture()?.architecture_kind()?;
    let target_m = require(task.target_m, "target_m", "fidelity-sweep")?;
    let grid = require_grid(&task.chi_grid, "chi_grid", "fidelity-sweep")?;
    let rows = fidelity_sweep(&kind, target_m, grid, task.n_max)
        .map_err(|e| anyhow!("task fidelity-sweep: {e}"))?;
    let impossible = rows.iter().filter(|row| row.value.is_none()).count();
    if impossible > 0 {
        eprintln!(
            "warning: {impossible} of {} grid points cannot show {target_m} clicks; \
             their score fields are empty",
            rows.len()
        );
    }
    let path = write_artifact(options, task, "sweep.csv", &sweep_csv(&rows))?;
    Ok(format!(
        "fidelity-sweep: target {target_m}, {} points -> {}",
        rows.len(),
        path.display()
    ))
}

fn signature_fidelity(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    let task = &config.task;
    let text = task
        .signature
        .as_deref()
        .ok_or_else(|| anyhow!("task.signature: required by task \"signature-fidelity\""))?;
    let bits = text
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(anyhow!(
                "task.signature: expected a string of 0s and 1s, found {other:?}"
            )),
        })
        .collect::<Result<Vec<bool>>>()?;
    let signature = Signature::new(bits);
    let spec = config
        .architecture()?
        .architecture_kind()?
        .compile()
        .map_err(|e| anyhow!("architecture: {e}"))?;
    if signature.len() != spec.n_outputs() {
        bail!(
            "task.signature: pattern names {} outputs but the architecture has {}",
            signature.len(),
            spec.n_outputs()
        );
    }
    let source = config.source()?.build(Some(signature.click_count()))?;
    let outcome = condition_on_signature(&spec, &signature, &source)
        .map_err(|e| anyhow!("task signature-fidelity: {e}"))?;

    let mut csv = String::from("signature,click_count,fidelity,detection_probability\n");
    let summary = match outcome.prepared() {
        Some(report) => {
            writeln!(
                csv,
                "{signature},{},{},{}",
                signature.click_count(),
                report.fidelity,
                report.detection_probability
            )
            .unwrap();
            let count = signature.click_count();
            format!(
                "signature-fidelity: {signature} heralds {count} photon{} with fidelity {}, \
                 detection probability {}",
                if count == 1 { "" } else { "s" },
                fmt6(Some(report.fidelity)),
                fmt6(Some(report.detection_probability)),
            )
        }
        None => {
            eprintln!(
                "warning: signature {signature} has zero probability on this source; \
                 score fields are empty"
            );
            writeln!(csv, "{signature},{},,", signature.click_count()).unwrap();
            format!("signature-fidelity: {signature} cannot occur on this source")
        }
    };
    let path = write_artifact(options, task, "signature.csv", &csv)?;
    Ok(format!("{summary} -> {}", path.display()))
}

/// Builds a search query from the config, applying the task's bounds.
fn build_query(
    config: &ExperimentConfig,
    family: ArchitectureFamily,
    target_m: usize,
) -> Result<DesignQuery64> {
    let params = config.architecture()?.component_params()?;
    let source = config.source()?.build(Some(target_m))?;
    let task = &config.task;
    let mut query = DesignQuery::new(target_m, source, family, params);
    if let Some(max_bins) = task.max_bins {
        query.max_bins = max_bins;
    }
    if let Some(max_stages) = task.max_stages {
        query.max_stages = max_stages;
    }
    if let Some(budget) = task.truncation_error_budget {
        query.truncation_error_budget = budget;
    }
    if let Some(grid) = &task.coupling_grid {
        query.coupling_grid = Some(grid.clone());
    }
    Ok(query)
}

fn optimize(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    let task = &config.task;
    let arch = config.architecture()?;
    arch.reject_unused(
        &arch.geometry_keys(),
        "by task \"optimize\" (the search chooses the geometry)",
    )?;
    let family = arch.family();
    let target_m = require(task.target_m, "target_m", "optimize")?;
    let query = build_query(config, family, target_m)?;
    let result = match family {
        ArchitectureFamily::BalancedTdm => optimize_stages(&query),
        _ => optimize_bins(&query),
    }
    .map_err(|e| anyhow!("task optimize: {e}"))?;
    let best = result.best();
    let path = write_artifact(options, task, "design.csv", &design_result_csv(&result))?;
    let summary = match family {
        ArchitectureFamily::BalancedTdm => format!(
            "optimize: balanced-tree target {target_m}: m_opt = {} (m_min = {}), \
             fidelity {}, detection probability {} -> {}",
            best.stages.expect("tree candidates carry a stage count"),
            min_stages(target_m),
            fmt6(best.fidelity),
            fmt6(best.detection_probability),
            path.display()
        ),
        ArchitectureFamily::LoopTdm => format!(
            "optimize: loop target {target_m}: N_opt = {} (N_min = {}), coupling {}, \
             fidelity {}, detection probability {} -> {}",
            best.n_bins,
            target_m.max(1),
            fmt6(best.coupling_ratio),
            fmt6(best.fidelity),
            fmt6(best.detection_probability),
            path.display()
        ),
        ArchitectureFamily::BalancedNPort => format!(
            "optimize: balanced-nport target {target_m}: N_opt = {} (N_min = {}), \
             fidelity {}, detection probability {} -> {}",
            best.n_bins,
            target_m.max(1),
            fmt6(best.fidelity),
            fmt6(best.detection_probability),
            path.display()
        ),
    };
    Ok(summary)
}

fn boundary(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    let task = &config.task;
    let arch = config.architecture()?;
    if arch.family() != ArchitectureFamily::BalancedTdm {
        bail!(
            "architecture.kind: task \"boundary\" studies the balanced splitting tree; \
             set kind = \"balanced-tdm\""
        );
    }
    arch.reject_unused(
        &arch.geometry_keys(),
        "by task \"boundary\" (the search chooses the geometry)",
    )?;
    arch.reject_unused(
        &[
            ("dark_count", arch.dark_count.is_some()),
            ("detector_efficiency", arch.detector_efficiency.is_some()),
        ],
        "by task \"boundary\" (task.dark_grid and task.eta_grid sweep them)",
    )?;
    let params = arch.component_params()?;
    let target_m = require(task.target_m, "target_m", "boundary")?;
    let dark_grid = require_grid(&task.dark_grid, "dark_grid", "boundary")?;
    let eta_grid = require_grid(&task.eta_grid, "eta_grid", "boundary")?;
    let source = config.source()?.build(Some(target_m))?;
    let max_stages = task.max_stages.unwrap_or(6);
    let points = benefit_boundary(target_m, &params, &source, dark_grid, eta_grid, max_stages)
        .map_err(|e| anyhow!("task boundary: {e}"))?;
    let benefiting = points.iter().filter(|point| point.benefits).count();
    let path = write_artifact(options, task, "boundary.csv", &boundary_csv(&points))?;
    Ok(format!(
        "boundary: target {target_m}, {} points, {benefiting} benefit from extra stages -> {}",
        points.len(),
        path.display()
    ))
}

fn compare(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    let task = &config.task;
    let arch = config.architecture()?;
    arch.reject_unused(
        &arch.geometry_keys(),
        "by task \"compare\" (each family's search chooses the geometry)",
    )?;
    let target_m = require(task.target_m, "target_m", "compare")?;
    let families: Vec<ArchitectureFamily> = match &task.families {
        Some(names) if !names.is_empty() => names
            .iter()
            .map(|name| parse_family(name).map_err(|e| anyhow!("task.families: {e}")))
            .collect::<Result<_>>()?,
        Some(_) => bail!("task.families: a non-empty list is required when the key is set"),
        None => vec![
            ArchitectureFamily::LoopTdm,
            ArchitectureFamily::BalancedTdm,
            ArchitectureFamily::BalancedNPort,
        ],
    };
    let queries: Vec<DesignQuery64> = families
        .into_iter()
        .map(|family| build_query(config, family, target_m))
        .collect::<Result<_>>()?;
    let report = compare_architectures(&queries).map_err(|e| anyhow!("task compare: {e}"))?;
    let mut best: Option<(&str, f64)> = None;
    for row in report.rows.iter().filter(|row| row.label != "ideal") {
        if let Some(fidelity) = row.fidelity {
            if best.is_none_or(|(_, incumbent)| fidelity > incumbent) {
                best = Some((row.label, fidelity));
            }
        }
    }
    let verdict = match best {
        Some((label, fidelity)) => {
            format!("best physical family {label} (fidelity {})", fmt6(Some(fidelity)))
        }
        None => "no physical family can herald this target".into(),
    };
    let path = write_artifact(options, task, "compare.csv", &comparison_csv(&report))?;
    Ok(format!(
        "compare: target {target_m} at chi {}: {verdict} -> {}",
        report.chi,
        path.display()
    ))
}

fn validate(config: &ExperimentConfig, options: &RunOptions) -> Result<String> {
    let task = &config.task;
    let defaults = ValidationConfig::default();
    let seed = options.seed_override.or(task.seed).ok_or_else(|| {
        anyhow!(
            "task.seed: required by task \"validate\" so reruns are byte-identical \
             (or pass --seed)"
        )
    })?;
    let suite = ValidationConfig {
        spec_count: task.spec_count.unwrap_or(defaults.spec_count),
        photon_max: task.photon_max.unwrap_or(defaults.photon_max),
        mc_spec_count: task.mc_spec_count.unwrap_or(defaults.mc_spec_count),
        mc_trials: task.mc_trials.unwrap_or(defaults.mc_trials),
        seed,
        tolerance: task.tolerance.unwrap_or(defaults.tolerance),
    };
    let report = run_validation(&suite);
    let mut csv = String::from(
        "spec_checks,entry_checks,max_abs_deviation,max_normalization_error,\
         mc_checks,max_mc_sigma,failures\n",
    );
    writeln!(
        csv,
        "{},{},{},{},{},{},{}",
        report.spec_checks,
        report.entry_checks,
        report.max_abs_deviation,
        report.max_normalization_error,
        report.mc_checks,
        report.max_mc_sigma,
        report.failures.len()
    )
    .unwrap();
    let path = write_artifact(options, task, "validation.csv", &csv)?;
    for failure in &report.failures {
        eprintln!("validation failure: {failure}");
    }
    if !report.passed() {
        bail!("validation failed: {}", report.summary());
    }
    Ok(format!(
        "validate: {} -> {}",
        report.summary(),
        path.display()
    ))
}
