//! The on-disk experiment configuration and its compilation into library
//! types.
//!
//! Configs are TOML with up to three sections plus optional free-form
//! notes:
//!
//! ```toml
//! [architecture]            # the hardware under test
//! kind = "loop-tdm"         # or "balanced-tdm" | "balanced-nport"
//! n_bins = 5                # loop geometry
//! coupling_ratio = 0.60
//! preset = "780nm"          # component values; explicit keys override
//!
//! [source]                  # the pair source being heralded
//! chi = 0.3
//! n_max = 20                # optional truncation override
//!
//! [task]                    # exactly one task per config
//! kind = "matrix"
//! out = "matrix.csv"        # file name inside --out
//!
//! [metadata]                # carried verbatim, never computed with
//! delay_fiber = "10 m (50 ns)"
//! ```
//!
//! Section relevance depends on the task: `matrix`, `fidelity-sweep` and
//! `signature-fidelity` compile `[architecture]` into a concrete detector,
//! so its geometry keys are required there; `optimize`, `boundary` and
//! `compare` search over the geometry, so those keys must be left unset
//! and only the component values (or a preset) are read. Every value is
//! validated on load and errors name the offending key.

use anyhow::{anyhow, bail, Result};
use pnrd::{
    ArchitectureFamily, ArchitectureKind, ArchitectureKind64, ComponentParams, ComponentParams64,
    PdcSource, PdcSource64,
};
use serde::Deserialize;

/// A named component set shipped with the tool.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub params: ComponentParams64,
    /// Timing bookkeeping (delay-line length, gate window). It affects no
    /// computed probability and is carried so the named set stays a
    /// complete experimental record.
    pub metadata: &'static str,
}

/// The component sets shipped with the tool: visible-band silicon
/// detectors and telecom-band InGaAs detectors.
pub const BUILTIN_PRESETS: [Preset; 2] = [
    Preset {
        name: "780nm",
        params: ComponentParams {
            coupler_loss_db: 0.4,
            fiber_loss_db: 0.2,
            switch_loss_db: 2.0,
            detector_efficiency: 0.60,
            dark_count: 5e-6,
        },
        metadata: "delay fiber 10 m (50 ns); gate window 20 ns",
    },
    Preset {
        name: "1550nm",
        params: ComponentParams {
            coupler_loss_db: 0.5,
            fiber_loss_db: 0.8,
            switch_loss_db: 1.2,
            detector_efficiency: 0.10,
            dark_count: 9.6e-4,
        },
        metadata: "delay fiber 10 m (50 ns); gate window 20 ns",
    },
];

/// Looks a preset up by name.
pub fn find_preset(name: &str) -> Option<&'static Preset> {
    BUILTIN_PRESETS.iter().find(|preset| preset.name == name)
}

fn preset_names() -> String {
    BUILTIN_PRESETS
        .iter()
        .map(|preset| format!("{:?}", preset.name))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parses a config from TOML text. Syntax and unknown-key errors come back
/// with line, column, and key name.
pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(anyhow::Error::from)
}

/// One experiment: an optional architecture and source, and exactly one
/// task.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub architecture: Option<ArchitectureConfig>,
    pub source: Option<SourceConfig>,
    pub task: TaskConfig,
    /// Free-form notes (delay lengths, gate windows, lab bookkeeping).
    /// Carried verbatim; never used in any computation.
    #[serde(default)]
    pub metadata: Option<toml::Table>,
}

impl ExperimentConfig {
    /// The `[architecture]` block, or an error naming the task that needs
    /// it.
    pub fn architecture(&self) -> Result<&ArchitectureConfig> {
        self.architecture.as_ref().ok_or_else(|| {
            anyhow!(
                "architecture: block required by task \"{}\"",
                self.task.kind.label()
            )
        })
    }

    /// The `[source]` block, or an error naming the task that needs it.
    pub fn source(&self) -> Result<&SourceConfig> {
        self.source.as_ref().ok_or_else(|| {
            anyhow!(
                "source: block required by task \"{}\"",
                self.task.kind.label()
            )
        })
    }
}

/// The architecture names accepted by `[architecture] kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ArchKindName {
    #[serde(rename = "loop-tdm")]
    LoopTdm,
    #[serde(rename = "balanced-tdm")]
    BalancedTdm,
    #[serde(rename = "balanced-nport")]
    BalancedNPort,
}

/// The `[architecture]` block: a kind, its geometry, and component values
/// given directly or through a preset.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub kind: ArchKindName,
    /// Name of a built-in component set used as the base values.
    pub preset: Option<String>,
    /// Loop geometry.
    pub n_bins: Option<usize>,
    pub coupling_ratio: Option<f64>,
    /// Tree geometry (`2^stages` outputs).
    pub stages: Option<usize>,
    /// Symmetric N-port geometry.
    pub n_outputs: Option<usize>,
    /// N-port uniform path loss; defaults to `1 - detector_efficiency`.
    pub path_loss: Option<f64>,
    /// Component values; each falls back to the preset when named.
    pub coupler_loss_db: Option<f64>,
    pub fiber_loss_db: Option<f64>,
    pub switch_loss_db: Option<f64>,
    pub detector_efficiency: Option<f64>,
    pub dark_count: Option<f64>,
}

impl ArchitectureConfig {
    /// The search family this block's kind belongs to.
    pub fn family(&self) -> ArchitectureFamily {
        match self.kind {
            ArchKindName::LoopTdm => ArchitectureFamily::LoopTdm,
            ArchKindName::BalancedTdm => ArchitectureFamily::BalancedTdm,
            ArchKindName::BalancedNPort => ArchitectureFamily::BalancedNPort,
        }
    }

    fn preset_params(&self) -> Result<Option<ComponentParams64>> {
        self.preset
            .as_deref()
            .map(|name| {
                find_preset(name).map(|preset| preset.params).ok_or_else(|| {
                    anyhow!(
                        "architecture.preset: unknown preset {name:?} (available: {})",
                        preset_names()
                    )
                })
            })
            .transpose()
    }

    /// Resolves the five component values, preferring explicit keys over
    /// the preset.
    pub fn component_params(&self) -> Result<ComponentParams64> {
        let base = self.preset_params()?;
        let pick = |explicit: Option<f64>, from_base: Option<f64>, key: &str| {
            explicit.or(from_base).ok_or_else(|| {
                anyhow!("architecture.{key}: required (set it directly or name a preset)")
            })
        };
        let params = ComponentParams {
            coupler_loss_db: pick(
                self.coupler_loss_db,
                base.map(|p| p.coupler_loss_db),
                "coupler_loss_db",
            )?,
            fiber_loss_db: pick(
                self.fiber_loss_db,
                base.map(|p| p.fiber_loss_db),
                "fiber_loss_db",
            )?,
            switch_loss_db: pick(
                self.switch_loss_db,
                base.map(|p| p.switch_loss_db),
                "switch_loss_db",
            )?,
            detector_efficiency: pick(
                self.detector_efficiency,
                base.map(|p| p.detector_efficiency),
                "detector_efficiency",
            )?,
            dark_count: pick(self.dark_count, base.map(|p| p.dark_count), "dark_count")?,
        };
        params
            .validate()
            .map_err(|e| anyhow!("architecture: {e}"))?;
        Ok(params)
    }

    /// Errors when any key in `unused` was set explicitly; `context` says
    /// who ignores it.
    pub fn reject_unused(&self, unused: &[(&str, bool)], context: &str) -> Result<()> {
        for (key, set) in unused {
            if *set {
                bail!("architecture.{key}: not used {context}");
            }
        }
        Ok(())
    }

    /// Every geometry key with whether it was set; the search tasks reject
    /// these since they choose the geometry themselves.
    pub fn geometry_keys(&self) -> [(&'static str, bool); 5] {
        [
            ("n_bins", self.n_bins.is_some()),
            ("coupling_ratio", self.coupling_ratio.is_some()),
            ("stages", self.stages.is_some()),
            ("n_outputs", self.n_outputs.is_some()),
            ("path_loss", self.path_loss.is_some()),
        ]
    }

    /// Compiles the block into a concrete architecture, enforcing that
    /// only the keys its kind reads are present.
    pub fn architecture_kind(&self) -> Result<ArchitectureKind64> {
        match self.kind {
            ArchKindName::LoopTdm => {
                self.reject_unused(
                    &[
                        ("stages", self.stages.is_some()),
                        ("n_outputs", self.n_outputs.is_some()),
                        ("path_loss", self.path_loss.is_some()),
                    ],
                    "by kind \"loop-tdm\"",
                )?;
                let n_bins = self
                    .n_bins
                    .ok_or_else(|| anyhow!("architecture.n_bins: required by kind \"loop-tdm\""))?;
                let coupling_ratio = self.coupling_ratio.ok_or_else(|| {
                    anyhow!("architecture.coupling_ratio: required by kind \"loop-tdm\"")
                })?;
                Ok(ArchitectureKind::LoopTdm {
                    n_bins,
                    coupling_ratio,
                    params: self.component_params()?,
                })
            }
            ArchKindName::BalancedTdm => {
                self.reject_unused(
                    &[
                        ("n_bins", self.n_bins.is_some()),
                        ("coupling_ratio", self.coupling_ratio.is_some()),
                        ("n_outputs", self.n_outputs.is_some()),
                        ("path_loss", self.path_loss.is_some()),
                    ],
                    "by kind \"balanced-tdm\"",
                )?;
                let stages = self.stages.ok_or_else(|| {
                    anyhow!("architecture.stages: required by kind \"balanced-tdm\"")
                })?;
                Ok(ArchitectureKind::BalancedTdm {
                    stages,
                    params: self.component_params()?,
                })
            }
            ArchKindName::BalancedNPort => {
                self.reject_unused(
                    &[
                        ("n_bins", self.n_bins.is_some()),
                        ("coupling_ratio", self.coupling_ratio.is_some()),
                        ("stages", self.stages.is_some()),
                        ("coupler_loss_db", self.coupler_loss_db.is_some()),
                        ("fiber_loss_db", self.fiber_loss_db.is_some()),
                        ("switch_loss_db", self.switch_loss_db.is_some()),
                    ],
                    "by kind \"balanced-nport\"",
                )?;
                let n_outputs = self.n_outputs.ok_or_else(|| {
                    anyhow!("architecture.n_outputs: required by kind \"balanced-nport\"")
                })?;
                let base = self.preset_params()?;
                let path_loss = match self.path_loss {
                    Some(value) => value,
                    None => {
                        let eta = self
                            .detector_efficiency
                            .or(base.map(|p| p.detector_efficiency))
                            .ok_or_else(|| {
                                anyhow!(
                                    "architecture.path_loss: required by kind \"balanced-nport\" \
                                     (or set detector_efficiency / a preset to use \
                                     1 - efficiency)"
                                )
                            })?;
                        1.0 - eta
                    }
                };
                let dark_count = self
                    .dark_count
                    .or(base.map(|p| p.dark_count))
                    .ok_or_else(|| {
                        anyhow!("architecture.dark_count: required by kind \"balanced-nport\"")
                    })?;
                Ok(ArchitectureKind::BalancedNPort {
                    n_outputs,
                    path_loss,
                    dark_count,
                })
            }
        }
    }
}

/// The `[source]` block: squeezing and an optional truncation override.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub chi: f64,
    /// Fixed truncation; when absent the depth is derived from `chi` and,
    /// where one exists, the task's target.
    pub n_max: Option<usize>,
}

impl SourceConfig {
    /// Builds the source, anchoring the automatic truncation at `target`
    /// when one is given.
    pub fn build(&self, target: Option<usize>) -> Result<PdcSource64> {
        let source = match self.n_max {
            Some(n_max) => PdcSource::new(self.chi, n_max),
            None => match target {
                Some(m) => PdcSource::for_target(self.chi, m),
                None => PdcSource::with_auto_truncation(self.chi),
            },
        };
        source.map_err(|e| anyhow!("source: {e}"))
    }
}

/// The task names accepted by `[task] kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "matrix")]
    Matrix,
    #[serde(rename = "fidelity-sweep")]
    FidelitySweep,
    #[serde(rename = "signature-fidelity")]
    SignatureFidelity,
    #[serde(rename = "optimize")]
    Optimize,
    #[serde(rename = "boundary")]
    Boundary,
    #[serde(rename = "compare")]
    Compare,
    #[serde(rename = "validate")]
    Validate,
}

impl TaskKind {
    /// The name as written in configs.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Matrix => "matrix",
            Self::FidelitySweep => "fidelity-sweep",
            Self::SignatureFidelity => "signature-fidelity",
            Self::Optimize => "optimize",
            Self::Boundary => "boundary",
            Self::Compare => "compare",
            Self::Validate => "validate",
        }
    }
}

/// The `[task]` block. Which fields apply depends on `kind`; unneeded ones
/// are simply ignored except where a task documents otherwise.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    /// Output file name inside the `--out` directory; every task has a
    /// default.
    pub out: Option<String>,
    /// Photon number to herald (fidelity-sweep, optimize, boundary,
    /// compare).
    pub target_m: Option<usize>,
    /// Tabulation depth for `matrix`; fixed source truncation for
    /// `fidelity-sweep`.
    pub n_max: Option<usize>,
    /// Squeezing grid for `fidelity-sweep`.
    pub chi_grid: Option<Vec<f64>>,
    /// Click pattern for `signature-fidelity`, e.g. `"10010"`.
    pub signature: Option<String>,
    /// Search bounds (optimize, boundary, compare); defaults: 64 bins, 6
    /// stages, budget 0.01, built-in coupling grid.
    pub max_bins: Option<usize>,
    pub max_stages: Option<usize>,
    pub truncation_error_budget: Option<f64>,
    pub coupling_grid: Option<Vec<f64>>,
    /// Families lined up by `compare`; defaults to all three.
    pub families: Option<Vec<String>>,
    /// Grids scanned by `boundary`.
    pub dark_grid: Option<Vec<f64>>,
    pub eta_grid: Option<Vec<f64>>,
    /// Suite knobs for `validate`.
    pub spec_count: Option<usize>,
    pub photon_max: Option<usize>,
    pub mc_spec_count: Option<usize>,
    pub mc_trials: Option<u64>,
    /// Sampling seed; required by `validate` so reruns are byte-identical.
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

/// Parses a family name as written in `task.families`.
pub fn parse_family(name: &str) -> Result<ArchitectureFamily> {
    match name {
        "loop-tdm" => Ok(ArchitectureFamily::LoopTdm),
        "balanced-tdm" => Ok(ArchitectureFamily::BalancedTdm),
        "balanced-nport" => Ok(ArchitectureFamily::BalancedNPort),
        other => Err(anyhow!(
            "unknown family {other:?} (expected \"loop-tdm\", \"balanced-tdm\", or \
             \"balanced-nport\")"
        )),
    }
}
