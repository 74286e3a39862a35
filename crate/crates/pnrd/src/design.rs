//! Design-space search: how many bins or stages, and which coupling ratio,
//! herald a target photon number best.
//!
//! Every candidate is scored by the same conditioning rule as the state
//! preparation layer (see [`crate::pdc`]), so a design chosen here and a
//! preparation report computed afterwards agree bit for bit. Candidates are
//! ranked by heralding fidelity; exact ties fall to the smaller detector,
//! then to the higher detection probability, then to enumeration order.
//!
//! The loop architecture needs a coupling-ratio grid as well as a bin
//! count. The grid is anchored at the smallest ratio whose never-exits
//! probability meets the truncation budget (see
//! [`loop_coupling_for_error`]) and steps upward in percent increments.

use rayon::prelude::*;

use crate::detector::{ComponentParams, DetectorSpec};
use crate::error::{Error, Result};
use crate::pdc::PdcSource;
use crate::real::Real;

/// Probability that a photon never leaves the storage loop over `n_bins`
/// readout rounds at output coupling `coupling_ratio`.
pub fn truncation_error<F: Real>(n_bins: usize, coupling_ratio: F) -> Result<F> {
    if n_bins == 0 {
        return Err(Error::CountOutOfRange {
            name: "n_bins",
            domain: "[1, inf)",
            value: 0,
        });
    }
    if !(coupling_ratio >= F::zero() && coupling_ratio <= F::one()) {
        return Err(Error::OutOfRange {
            name: "coupling_ratio",
            domain: "[0, 1]",
            value: coupling_ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((F::one() - coupling_ratio).powi(n_bins as i32))
}

/// Smallest coupling ratio keeping the loop's never-exits probability at or
/// below `epsilon`: `1 - epsilon^(1/n_bins)`.
pub fn loop_coupling_for_error<F: Real>(n_bins: usize, epsilon: F) -> Result<F> {
    if n_bins == 0 {
        return Err(Error::CountOutOfRange {
            name: "n_bins",
            domain: "[1, inf)",
            value: 0,
        });
    }
    if !(epsilon > F::zero() && epsilon < F::one()) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            domain: "(0, 1)",
            value: epsilon.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(F::one() - epsilon.powf(F::one() / F::of_usize(n_bins)))
}

/// The architecture families the searches range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchitectureFamily {
    /// Storage loop, searched over bin count and coupling ratio.
    LoopTdm,
    /// Splitting tree, searched over stage count.
    BalancedTdm,
    /// Idealized symmetric N-port whose only loss is the detector
    /// efficiency itself; the reference the physical families chase.
    BalancedNPort,
}

impl ArchitectureFamily {
    /// Short name used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Self::LoopTdm => "loop",
            Self::BalancedTdm => "balanced-tree",
            Self::BalancedNPort => "balanced-nport",
        }
    }
}

/// One design-search problem: herald `target_m` photons from `source` with
/// hardware drawn from `family` built out of `params` components.
#[derive(Debug, Clone)]
pub struct DesignQuery<F> {
    /// Photon number to herald.
    pub target_m: usize,
    /// Pair source driving the heralding arm.
    pub source: PdcSource<F>,
    /// Architecture family to search.
    pub family: ArchitectureFamily,
    /// Component losses and noise shared by every candidate.
    pub params: ComponentParams<F>,
    /// Never-exits budget anchoring the loop coupling grid.
    pub truncation_error_budget: F,
    /// Largest bin count tried by [`optimize_bins`].
    pub max_bins: usize,
    /// Largest stage count tried by [`optimize_stages`].
    pub max_stages: usize,
    /// Explicit coupling-ratio candidates; `None` uses the built-in grid.
    pub coupling_grid: Option<Vec<F>>,
}

impl<F: Real> DesignQuery<F> {
    /// A query with the default search bounds (64 bins, 6 stages, 1%
    /// truncation budget, built-in coupling grid).
    pub fn new(
        target_m: usize,
        source: PdcSource<F>,
        family: ArchitectureFamily,
        params: ComponentParams<F>,
    ) -> Self {
        Self {
            target_m,
            source,
            family,
            params,
            truncation_error_budget: F::of(0.01),
            max_bins: 64,
            max_stages: 6,
            coupling_grid: None,
        }
    }
}

/// One scored design.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<F> {
    /// Position in the search trace (also the tie-break of last resort).
    pub index: usize,
    /// Detector outputs.
    pub n_bins: usize,
    /// Tree depth, for the balanced tree family.
    pub stages: Option<usize>,
    /// Loop output coupling, for the loop family.
    pub coupling_ratio: Option<F>,
    /// Heralding fidelity; `None` when the outcome cannot occur.
    pub fidelity: Option<F>,
    /// Heralding probability; `None` when the outcome cannot occur.
    pub detection_probability: Option<F>,
}

/// A finished search: every candidate scored, one chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult<F> {
    /// Index of the winning candidate in [`Self::trace`].
    pub chosen: usize,
    /// Every candidate, in enumeration order.
    pub trace: Vec<Candidate<F>>,
}

impl<F: Real> DesignResult<F> {
    /// The winning candidate.
    pub fn best(&self) -> &Candidate<F> {
        &self.trace[self.chosen]
    }

    /// How far candidate `index` falls short of the winner's fidelity;
    /// `None` when either outcome is impossible.
    pub fn fidelity_gap(&self, index: usize) -> Option<F> {
        let best = self.best().fidelity?;
        Some(best - self.trace[index].fidelity?)
    }
}

/// `true` when `challenger` outranks `incumbent`: higher fidelity, then
/// fewer bins, then higher detection probability. Equal on all three keeps
/// the incumbent, so a linear scan settles full ties by enumeration order.
fn improves<F: Real>(challenger: &Candidate<F>, incumbent: &Candidate<F>) -> bool {
    match (challenger.fidelity, incumbent.fidelity) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(a), Some(b)) => {
            if a != b {
                return a > b;
            }
            if challenger.n_bins != incumbent.n_bins {
                return challenger.n_bins < incumbent.n_bins;
            }
            match (challenger.detection_probability, incumbent.detection_probability) {
                (Some(pa), Some(pb)) => pa > pb,
                _ => false,
            }
        }
    }
}

/// Conditioning scores for heralding `target` clicks, summed over the
/// source support. Identical accumulation order to the preparation layer,
/// so the numbers match it bit for bit.
fn score<F: Real>(
    spec: &DetectorSpec<F>,
    target: usize,
    source: &PdcSource<F>,
) -> (Option<F>, Option<F>) {
    if target > spec.n_outputs() {
        // The detector cannot show that many clicks.
        return (None, None);
    }
    let chi2 = source.chi() * source.chi();
    let mut run = F::one();
    let mut total = F::zero();
    let mut target_weight = F::zero();
    for n in 0..=source.n_max() {
        let p = spec.click_count_distribution_capped(n, target)[target];
        let w = p * run;
        total += w;
        if n == target {
            target_weight = w;
        }
        run *= chi2;
    }
    if total > F::zero() {
        (
            Some(target_weight / total),
            Some((F::one() - chi2) * total),
        )
    } else {
        (None, None)
    }
}

/// The query's source, deepened if needed so conditional weights around the
/// target photon number are resolved (same anchoring as
/// [`PdcSource::for_target`]).
fn evaluation_source<F: Real>(query: &DesignQuery<F>) -> Result<PdcSource<F>> {
    let anchored = PdcSource::for_target(query.source.chi(), query.target_m)?;
    let n_max = anchored.n_max().max(query.source.n_max());
    PdcSource::new(query.source.chi(), n_max)
}

/// Settings that define one candidate before scoring.
type Setting<F> = (usize, Option<usize>, Option<F>);

fn score_settings<F: Real>(
    query: &DesignQuery<F>,
    source: &PdcSource<F>,
    settings: Vec<Setting<F>>,
) -> Result<DesignResult<F>> {
    let trace: Vec<Candidate<F>> = settings
        .into_par_iter()
        .enumerate()
        .map(|(index, (n_bins, stages, coupling_ratio))| {
            let spec = match query.family {
                ArchitectureFamily::LoopTdm => DetectorSpec::loop_tdm(
                    n_bins,
                    coupling_ratio.expect("loop settings carry a coupling ratio"),
                    &query.params,
                )?,
                ArchitectureFamily::BalancedTdm => DetectorSpec::balanced_tdm(
                    stages.expect("tree settings carry a stage count"),
                    &query.params,
                )?,
                ArchitectureFamily::BalancedNPort => DetectorSpec::balanced_nport(
                    n_bins,
                    F::one() - query.params.detector_efficiency,
                    query.params.dark_count,
                )?,
            };
            let (fidelity, detection_probability) = score(&spec, query.target_m, source);
            Ok(Candidate {
                index,
                n_bins,
                stages,
                coupling_ratio,
                fidelity,
                detection_probability,
            })
        })
        .collect::<Result<_>>()?;
    let mut chosen = 0;
    for candidate in &trace {
        if improves(candidate, &trace[chosen]) {
            chosen = candidate.index;
        }
    }
    Ok(DesignResult { chosen, trace })
}

/// Coupling ratios tried for an `n_bins` loop: the budget floor plus every
/// percent step above it up to 0.99.
fn coupling_candidates<F: Real>(query: &DesignQuery<F>, n_bins: usize) -> Result<Vec<F>> {
    if let Some(grid) = &query.coupling_grid {
        if grid.is_empty() {
            return Err(Error::EmptySearchRange {
                reason: "explicit coupling grid is empty".into(),
            });
        }
        for &ratio in grid {
            if !(ratio > F::zero() && ratio < F::one()) {
                return Err(Error::OutOfRange {
                    name: "coupling_grid entry",
                    domain: "(0, 1)",
                    value: ratio.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        return Ok(grid.clone());
    }
    let floor = loop_coupling_for_error(n_bins, query.truncation_error_budget)?;
    let mut ratios = vec![floor];
    let hundred = F::of_usize(100);
    for k in 1..=99usize {
        let ratio = F::of_usize(k) / hundred;
        if ratio > floor {
            ratios.push(ratio);
        }
    }
    Ok(ratios)
}

/// Searches bin counts (and, for the loop, coupling ratios) from the
/// smallest detector that can show `target_m` clicks up to `max_bins`.
///
/// Covers the loop and N-port families; the tree family varies whole
/// stages, see [`optimize_stages`].
pub fn optimize_bins<F: Real>(query: &DesignQuery<F>) -> Result<DesignResult<F>> {
    if query.family == ArchitectureFamily::BalancedTdm {
        return Err(Error::FamilyMismatch {
            operation: "bin-count search",
            family: query.family.label(),
        });
    }
    let n_min = query.target_m.max(1);
    if n_min > query.max_bins {
        return Err(Error::EmptySearchRange {
            reason: format!(
                "no bin count in [{n_min}, {}] can show {} clicks",
                query.max_bins, query.target_m
            ),
        });
    }
    let source = evaluation_source(query)?;
    let mut settings: Vec<Setting<F>> = Vec::new();
    for n_bins in n_min..=query.max_bins {
        match query.family {
            ArchitectureFamily::LoopTdm => {
                for ratio in coupling_candidates(query, n_bins)? {
                    settings.push((n_bins, None, Some(ratio)));
                }
            }
            ArchitectureFamily::BalancedNPort => settings.push((n_bins, None, None)),
            ArchitectureFamily::BalancedTdm => unreachable!("rejected above"),
        }
    }
    score_settings(query, &source, settings)
}

/// Searches tree depths from the shallowest tree with enough outputs
/// (`2^stages >= target_m`) up to `max_stages`.
pub fn optimize_stages<F: Real>(query: &DesignQuery<F>) -> Result<DesignResult<F>> {
    if query.family != ArchitectureFamily::BalancedTdm {
        return Err(Error::FamilyMismatch {
            operation: "stage-count search",
            family: query.family.label(),
        });
    }
    let m_min = min_stages(query.target_m);
    if m_min > query.max_stages {
        return Err(Error::EmptySearchRange {
            reason: format!(
                "no stage count in [{m_min}, {}] can show {} clicks",
                query.max_stages, query.target_m
            ),
        });
    }
    let source = evaluation_source(query)?;
    let settings: Vec<Setting<F>> = (m_min..=query.max_stages)
        .map(|stages| (1usize << stages, Some(stages), None))
        .collect();
    score_settings(query, &source, settings)
}

/// Smallest stage count whose tree has at least `target_m` outputs.
pub fn min_stages(target_m: usize) -> usize {
    let mut stages = 0;
    while (1usize << stages) < target_m {
        stages += 1;
    }
    stages
}

/// One probe of the benefit boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint<F> {
    pub dark_count: F,
    pub detector_efficiency: F,
    pub target_m: usize,
    /// `true` when some tree deeper than the minimum beats the minimal
    /// tree's fidelity.
    pub benefits: bool,
}

/// Maps where multiplexing pays off: for every `(dark_count, efficiency)`
/// grid point, does the best tree use more than the minimum number of
/// stages? Points come back in row-major order (dark count outer,
/// efficiency inner).
pub fn benefit_boundary<F: Real>(
    target_m: usize,
    params_base: &ComponentParams<F>,
    source: &PdcSource<F>,
    dark_grid: &[F],
    eta_grid: &[F],
    max_stages: usize,
) -> Result<Vec<BoundaryPoint<F>>> {
    if dark_grid.is_empty() || eta_grid.is_empty() {
        return Err(Error::EmptySearchRange {
            reason: "benefit boundary needs at least one dark count and one efficiency".into(),
        });
    }
    let m_min = min_stages(target_m);
    let mut points = Vec::with_capacity(dark_grid.len() * eta_grid.len());
    for &dark_count in dark_grid {
        for &detector_efficiency in eta_grid {
            let params = ComponentParams {
                dark_count,
                detector_efficiency,
                ..*params_base
            };
            params.validate()?;
            let mut query = DesignQuery::new(
                target_m,
                *source,
                ArchitectureFamily::BalancedTdm,
                params,
            );
            query.max_stages = max_stages;
            let result = optimize_stages(&query)?;
            let benefits = result.best().stages.is_some_and(|s| s > m_min);
            points.push(BoundaryPoint {
                dark_count,
                detector_efficiency,
                target_m,
                benefits,
            });
        }
    }
    Ok(points)
}

/// One line of an architecture comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow<F> {
    /// Family label, or "ideal" for the number-resolving reference.
    pub label: &'static str,
    pub n_bins: Option<usize>,
    pub stages: Option<usize>,
    pub coupling_ratio: Option<F>,
    pub fidelity: Option<F>,
    pub detection_probability: Option<F>,
}

/// Best designs of several families against the ideal number-resolving
/// detector, at one source and target.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<F> {
    pub target_m: usize,
    pub chi: F,
    pub rows: Vec<ComparisonRow<F>>,
}

/// Runs the right search per query and lines the winners up against the
/// ideal detector (fidelity 1, detection probability
/// `(1 - chi^2) chi^(2 m)`). All queries must share one source and target.
pub fn compare_architectures<F: Real>(queries: &[DesignQuery<F>]) -> Result<ComparisonReport<F>> {
    let first = queries.first().ok_or_else(|| Error::EmptySearchRange {
        reason: "comparison needs at least one query".into(),
    })?;
    for query in queries {
        if query.target_m != first.target_m {
            return Err(Error::InconsistentQueries {
                reason: format!(
                    "target photon numbers differ ({} vs {})",
                    first.target_m, query.target_m
                ),
            });
        }
        if query.source != first.source {
            return Err(Error::InconsistentQueries {
                reason: "sources differ".into(),
            });
        }
    }
    let mut rows = Vec::with_capacity(queries.len() + 1);
    for query in queries {
        let result = match query.family {
            ArchitectureFamily::BalancedTdm => optimize_stages(query)?,
            _ => optimize_bins(query)?,
        };
        let best = result.best();
        rows.push(ComparisonRow {
            label: query.family.label(),
            n_bins: Some(best.n_bins),
            stages: best.stages,
            coupling_ratio: best.coupling_ratio,
            fidelity: best.fidelity,
            detection_probability: best.detection_probability,
        });
    }
    let chi = first.source.chi();
    let chi2 = chi * chi;
    rows.push(ComparisonRow {
        label: "ideal",
        n_bins: None,
        stages: None,
        coupling_ratio: None,
        fidelity: Some(F::one()),
        detection_probability: Some((F::one() - chi2) * chi2.powi(first.target_m as i32)),
    });
    Ok(ComparisonReport {
        target_m: first.target_m,
        chi,
        rows,
    })
}
