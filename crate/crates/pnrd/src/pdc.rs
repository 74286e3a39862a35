//! Heralded state preparation from a two-mode squeezed source.
//!
//! A parametric down-conversion source emits photon pairs with a thermal
//! number distribution controlled by the squeezing parameter `chi`: the
//! normalized probability of `n` pairs is `(1 - chi^2) chi^(2n)`. Detecting
//! one arm with a multiplexed click detector heralds a state in the other
//! arm; conditioning on `m` clicks prepares (approximately) the `m`-photon
//! state.
//!
//! Quality is scored by two figures:
//! * fidelity -- the weight of the intended number state in the heralded
//!   (diagonal) state, `p(m|m) chi^(2m) / sum_n p(m|n) chi^(2n)`;
//! * detection probability -- how often the heralding outcome occurs,
//!   `sum_n p(m|n) (1 - chi^2) chi^(2n)`.
//!
//! Outcomes that cannot occur (zero conditioning weight, e.g. one click from
//! a dark-count-free detector on vacuum) are reported as
//! [`PreparationOutcome::Impossible`], never as NaN.

use crate::detector::{ArchitectureKind, DetectorSpec};
use crate::engine::{ConditionalMatrix, Signature};
use crate::error::{Error, Result};
use crate::ops::DiagonalOperator;
use crate::real::Real;

/// Truncation budget: the neglected tail of the source distribution must
/// stay below this mass.
pub const TAIL_LIMIT: f64 = 1e-10;

/// Hard cap on automatic truncation depth; reached only for squeezing so
/// close to 1 that the simulation sizes stop being meaningful.
const MAX_AUTO_N: usize = 1_000_000;

/// A two-mode squeezed (pair) source truncated to `n <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdcSource<F> {
    chi: F,
    n_max: usize,
}

impl<F: Real> PdcSource<F> {
    /// A source with an explicit truncation. The neglected tail
    /// `chi^(2 (n_max + 1))` must be below [`TAIL_LIMIT`].
    pub fn new(chi: F, n_max: usize) -> Result<Self> {
        if !(chi >= F::zero() && chi < F::one()) {
            return Err(Error::OutOfRange {
                name: "chi",
                domain: "[0, 1)",
                value: chi.to_f64().unwrap_or(f64::NAN),
            });
        }
        let source = Self { chi, n_max };
        let tail = source.tail_mass().to_f64().unwrap_or(f64::NAN);
        if !(tail < TAIL_LIMIT) {
            return Err(Error::TruncationTail {
                tail,
                n_max,
                limit: TAIL_LIMIT,
            });
        }
        Ok(source)
    }

    /// The shallowest truncation meeting the tail budget.
    pub fn with_auto_truncation(chi: F) -> Result<Self> {
        let n_max = smallest_power_index(chi, TAIL_LIMIT)?.saturating_sub(1);
        Self::new(chi, n_max)
    }

    /// A truncation deep enough both for the tail budget and to resolve
    /// conditional weights around photon number `target`: beyond
    /// `target + k` the weights fall below `1e-12` of the target's own
    /// scale, with `k` chosen as the smallest power making `chi^(2k)` that
    /// small.
    pub fn for_target(chi: F, target: usize) -> Result<Self> {
        let auto = Self::with_auto_truncation(chi)?;
        let headroom = smallest_power_index(chi, 1e-12)?.max(1);
        let n_max = auto.n_max.max(target + headroom);
        Self::new(chi, n_max)
    }

    /// Squeezing parameter.
    #[inline]
    pub fn chi(&self) -> F {
        self.chi
    }

    /// Truncation photon number.
    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Mass of the neglected tail, `chi^(2 (n_max + 1))`.
    pub fn tail_mass(&self) -> F {
        self.chi.powi(2 * (self.n_max as i32 + 1))
    }

    /// The photon-number distribution `(1 - chi^2) chi^(2n)` as a diagonal
    /// state on the truncated space (its trace falls short of 1 by exactly
    /// the tail mass).
    pub fn number_distribution(&self) -> DiagonalOperator<F> {
        let chi2 = self.chi * self.chi;
        let scale = F::one() - chi2;
        let mut run = F::one();
        let diag = (0..=self.n_max)
            .map(|_| {
                let p = scale * run;
                run *= chi2;
                p
            })
            .collect();
        DiagonalOperator::from_diag(diag).expect("geometric weights are non-negative")
    }
}

/// Smallest `k >= 1` with `chi^(2k) < limit` (`<= limit` acts the same up
/// to one step, resolved by the verification loop).
fn smallest_power_index<F: Real>(chi: F, limit: f64) -> Result<usize> {
    if chi <= F::zero() {
        return Ok(1);
    }
    let chi2 = (chi * chi).to_f64().unwrap_or(f64::NAN);
    let limit_f = limit;
    // Closed-form first guess, then settle the boundary exactly in F.
    let guess = (limit_f.ln() / chi2.ln()).ceil().max(1.0);
    if !guess.is_finite() || guess > MAX_AUTO_N as f64 {
        return Err(Error::CountOutOfRange {
            name: "truncation depth",
            domain: "[1, 1000000]",
            value: MAX_AUTO_N,
        });
    }
    let mut k = guess as usize;
    let chi2 = chi * chi;
    let lim = F::of(limit);
    while k > 1 && chi2.powi((k - 1) as i32) < lim {
        k -= 1;
    }
    while chi2.powi(k as i32) >= lim {
        k += 1;
        if k > MAX_AUTO_N {
            return Err(Error::CountOutOfRange {
                name: "truncation depth",
                domain: "[1, 1000000]",
                value: k,
            });
        }
    }
    Ok(k)
}

/// The heralded state and its scores for one conditioning outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationReport<F> {
    /// Weight of the intended number state in the heralded state. Equals
    /// `prepared_state.entry(target)` bit for bit.
    pub fidelity: F,
    /// Probability of the heralding outcome on the source.
    pub detection_probability: F,
    /// The heralded diagonal state, normalized to unit trace.
    pub prepared_state: DiagonalOperator<F>,
}

/// Conditioning either yields a state or is impossible on this source.
#[derive(Debug, Clone, PartialEq)]
pub enum PreparationOutcome<F> {
    Prepared(PreparationReport<F>),
    /// The outcome has zero probability; nothing is heralded.
    Impossible,
}

impl<F: Real> PreparationOutcome<F> {
    /// The report, if the outcome can occur.
    pub fn prepared(&self) -> Option<&PreparationReport<F>> {
        match self {
            Self::Prepared(report) => Some(report),
            Self::Impossible => None,
        }
    }

    /// Fidelity, if the outcome can occur.
    pub fn fidelity(&self) -> Option<F> {
        self.prepared().map(|r| r.fidelity)
    }

    pub fn is_impossible(&self) -> bool {
        matches!(self, Self::Impossible)
    }
}

/// Shared conditioning core: weights `w_n = p_n * chi^(2n)` over the source
/// support, where `p_n` is the probability of the observed outcome given
/// `n` photons.
fn condition_on_weights<F: Real>(
    outcome_given_n: impl Fn(usize) -> F,
    target: usize,
    source: &PdcSource<F>,
) -> PreparationOutcome<F> {
    let chi2 = source.chi() * source.chi();
    let mut weights = Vec::with_capacity(source.n_max() + 1);
    let mut run = F::one();
    let mut total = F::zero();
    for n in 0..=source.n_max() {
        let w = outcome_given_n(n) * run;
        total += w;
        weights.push(w);
        run *= chi2;
    }
    if !(total > F::zero()) {
        return PreparationOutcome::Impossible;
    }
    let diag: Vec<F> = weights.into_iter().map(|w| w / total).collect();
    let prepared_state =
        DiagonalOperator::from_diag(diag).expect("conditional weights are non-negative");
    PreparationOutcome::Prepared(PreparationReport {
        fidelity: prepared_state.entry(target),
        detection_probability: (F::one() - chi2) * total,
        prepared_state,
    })
}

/// Conditions the source on observing exactly `m_clicks` clicks.
///
/// The matrix must cover the source support (`n_max() >= source.n_max()`).
pub fn condition_on_clicks<F: Real>(
    matrix: &ConditionalMatrix<F>,
    m_clicks: usize,
    source: &PdcSource<F>,
) -> Result<PreparationOutcome<F>> {
    if m_clicks > matrix.n_outputs() {
        return Err(Error::ClickCountOutOfRange {
            m: m_clicks,
            n_outputs: matrix.n_outputs(),
        });
    }
    if matrix.n_max() < source.n_max() {
        return Err(Error::DimensionOverflow {
            name: "source",
            got: source.n_max() + 1,
            supported: matrix.n_max() + 1,
        });
    }
    Ok(condition_on_weights(
        |n| matrix.probability(m_clicks, n),
        m_clicks,
        source,
    ))
}

/// Conditions the source on one exact click pattern. The intended number
/// state is the pattern's click count.
pub fn condition_on_signature<F: Real>(
    spec: &DetectorSpec<F>,
    signature: &Signature,
    source: &PdcSource<F>,
) -> Result<PreparationOutcome<F>> {
    let probabilities: Vec<F> = (0..=source.n_max())
        .map(|n| spec.signature_probability(signature, n))
        .collect::<Result<_>>()?;
    Ok(condition_on_weights(
        |n| probabilities[n],
        signature.click_count(),
        source,
    ))
}

/// One row of a heralding sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<F> {
    pub chi: F,
    /// `None` when the outcome cannot occur at this squeezing.
    pub value: Option<SweepValue<F>>,
}

/// The scores of a possible heralding outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValue<F> {
    pub fidelity: F,
    pub detection_probability: F,
}

/// Scores heralding on `m_clicks` clicks across a squeezing grid.
///
/// The click matrix depends only on the architecture, so it is built once,
/// deep enough for the largest grid point. `n_max_override`, when given,
/// fixes the source truncation for every row instead of the per-row
/// default; it must still satisfy the tail budget at every grid point.
pub fn fidelity_sweep<F: Real>(
    arch: &ArchitectureKind<F>,
    m_clicks: usize,
    chi_grid: &[F],
    n_max_override: Option<usize>,
) -> Result<Vec<SweepPoint<F>>> {
    let spec = arch.compile()?;
    let sources: Vec<PdcSource<F>> = chi_grid
        .iter()
        .map(|&chi| match n_max_override {
            Some(n_max) => PdcSource::new(chi, n_max),
            None => PdcSource::for_target(chi, m_clicks),
        })
        .collect::<Result<_>>()?;
    let deepest = sources.iter().map(PdcSource::n_max).max().unwrap_or(0);
    let matrix = spec.conditional_matrix(deepest);
    sources
        .iter()
        .map(|source| {
            let outcome = condition_on_clicks(&matrix, m_clicks, source)?;
            Ok(SweepPoint {
                chi: source.chi(),
                value: outcome.prepared().map(|r| SweepValue {
                    fidelity: r.fidelity,
                    detection_probability: r.detection_probability,
                }),
            })
        })
        .collect()
}

impl<F: Real> DetectorSpec<F> {
    /// Default tabulation depth when this detector measures the given
    /// source: cover both the output count and the source support.
    pub fn default_n_max(&self, source: &PdcSource<F>) -> usize {
        self.n_outputs().max(source.n_max())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn number_distribution_hand_values() {
        // chi = 0.3: vacuum weight 0.91, one pair 0.91 * 0.09.
        let source = PdcSource::new(0.3f64, 9).unwrap();
        let dist = source.number_distribution();
        assert_abs_diff_eq!(dist.diag()[0], 0.91, epsilon = 1e-15);
        assert_abs_diff_eq!(dist.diag()[1], 0.0819, epsilon = 1e-15);
        assert_abs_diff_eq!(
            dist.trace(),
            1.0 - source.tail_mass(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn auto_truncation_is_minimal() {
        for chi in [0.05f64, 0.1, 0.3, 0.6, 0.89] {
            let source = PdcSource::with_auto_truncation(chi).unwrap();
            assert!(source.tail_mass() < TAIL_LIMIT);
            if source.n_max() > 0 {
                let shallower = chi.powi(2 * source.n_max() as i32);
                assert!(
                    shallower >= TAIL_LIMIT,
                    "n_max {} not minimal for chi {}",
                    source.n_max(),
                    chi
                );
            }
        }
    }

    #[test]
    fn chi_zero_is_pure_vacuum() {
        let source = PdcSource::with_auto_truncation(0.0f64).unwrap();
        assert_eq!(source.n_max(), 0);
        assert_eq!(source.number_distribution().diag(), &[1.0]);
    }

    #[test]
    fn explicit_truncation_must_meet_the_tail_budget() {
        // chi = 0.3: tail after n_max = 4 is 0.09^5 = 5.9e-6, too heavy.
        assert!(matches!(
            PdcSource::new(0.3f64, 4),
            Err(Error::TruncationTail { .. })
        ));
        assert!(PdcSource::new(0.3f64, 9).is_ok());
        assert!(PdcSource::new(1.0f64, 10).is_err());
        assert!(PdcSource::new(-0.1f64, 10).is_err());
    }

    #[test]
    fn target_headroom_extends_shallow_truncations() {
        // chi = 0.15 alone truncates at n_max = 3; conditioning on 5 clicks
        // needs the weights around n = 5 resolved.
        let source = PdcSource::for_target(0.15f64, 5).unwrap();
        assert!(source.n_max() >= 5);
        assert!(source.tail_mass() < TAIL_LIMIT);
    }

    #[test]
    fn perfect_resolution_heralds_exactly() {
        use crate::engine::ConditionalMatrix;
        let dim = 12usize;
        let columns: Vec<Vec<f64>> = (0..dim)
            .map(|n| (0..dim).map(|m| f64::from(m == n)).collect())
            .collect();
        let cm = ConditionalMatrix::from_columns(dim - 1, columns).unwrap();
        let source = PdcSource::new(0.3f64, 9).unwrap();
        let report = condition_on_clicks(&cm, 2, &source)
            .unwrap()
            .prepared()
            .cloned()
            .unwrap();
        assert_abs_diff_eq!(report.fidelity, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(
            report.detection_probability,
            (1.0 - 0.09) * 0.09f64.powi(2),
            epsilon = 1e-15
        );
        assert_eq!(report.prepared_state.entry(2), 1.0);
    }

    #[test]
    fn two_port_single_click_fidelity() {
        // Ideal 50:50 pair heralding one photon at chi = 0.1. All n photons
        // bunching onto one output is the only way to get a single click,
        // so p(1|n) = 2^(1-n) and the conditional sum is geometric. The
        // infinite-series limit is 1 - chi^2/2 = 0.995.
        let spec = DetectorSpec::balanced_nport(2, 0.0f64, 0.0).unwrap();
        let source = PdcSource::for_target(0.1f64, 1).unwrap();
        let cm = spec.conditional_matrix(source.n_max());
        let report = condition_on_clicks(&cm, 1, &source)
            .unwrap()
            .prepared()
            .cloned()
            .unwrap();

        let chi2 = 0.01f64;
        let mut denominator = 0.0f64;
        for n in 1..=source.n_max() {
            denominator += 2.0f64.powi(1 - n as i32) * chi2.powi(n as i32);
        }
        let expected = chi2 / denominator;
        assert_abs_diff_eq!(report.fidelity, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(report.fidelity, 0.995, epsilon = 1e-5);
    }

    #[test]
    fn fidelity_is_the_target_entry_bit_for_bit() {
        let spec = DetectorSpec::balanced_nport(3, 0.2f64, 1e-4).unwrap();
        let source = PdcSource::for_target(0.4f64, 2).unwrap();
        let cm = spec.conditional_matrix(source.n_max());
        let report = condition_on_clicks(&cm, 2, &source)
            .unwrap()
            .prepared()
            .cloned()
            .unwrap();
        assert_eq!(
            report.fidelity.to_bits(),
            report.prepared_state.entry(2).to_bits()
        );
        assert_abs_diff_eq!(report.prepared_state.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dark_free_detector_cannot_click_on_vacuum() {
        let spec = DetectorSpec::balanced_nport(2, 0.0f64, 0.0).unwrap();
        let source = PdcSource::with_auto_truncation(0.0f64).unwrap();
        let cm = spec.conditional_matrix(source.n_max());
        let outcome = condition_on_clicks(&cm, 1, &source).unwrap();
        assert!(outcome.is_impossible());
        assert_eq!(outcome.fidelity(), None);
    }

    #[test]
    fn detection_probabilities_partition() {
        let spec = DetectorSpec::new(vec![0.5f64, 0.3], 0.2, vec![0.3, 0.6], 1e-3).unwrap();
        let source = PdcSource::with_auto_truncation(0.3f64).unwrap();
        let cm = spec.conditional_matrix(source.n_max());
        let mut total = 0.0f64;
        for m in 0..=2usize {
            if let Some(report) = condition_on_clicks(&cm, m, &source).unwrap().prepared() {
                total += report.detection_probability;
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn balanced_single_click_signatures_score_alike() {
        let spec = DetectorSpec::balanced_nport(3, 0.3f64, 1e-3).unwrap();
        let source = PdcSource::for_target(0.2f64, 1).unwrap();
        let fidelities: Vec<f64> = (0..3)
            .map(|i| {
                let bits = (0..3).map(|j| j == i).collect();
                condition_on_signature(&spec, &Signature::new(bits), &source)
                    .unwrap()
                    .fidelity()
                    .unwrap()
            })
            .collect();
        assert_abs_diff_eq!(fidelities[0], fidelities[1], epsilon = 1e-14);
        assert_abs_diff_eq!(fidelities[0], fidelities[2], epsilon = 1e-14);
    }

    #[test]
    fn signature_conditioning_matches_click_conditioning_on_one_output() {
        // With a single output the only one-click signature IS the one-click
        // outcome.
        let spec = DetectorSpec::new(vec![0.8f64], 0.2, vec![0.25], 1e-3).unwrap();
        let source = PdcSource::for_target(0.25f64, 1).unwrap();
        let cm = spec.conditional_matrix(source.n_max());
        let by_count = condition_on_clicks(&cm, 1, &source).unwrap();
        let by_pattern =
            condition_on_signature(&spec, &Signature::new(vec![true]), &source).unwrap();
        assert_abs_diff_eq!(
            by_count.fidelity().unwrap(),
            by_pattern.fidelity().unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn sweep_flags_impossible_rows() {
        let arch = ArchitectureKind::BalancedNPort {
            n_outputs: 2,
            path_loss: 0.0f64,
            dark_count: 0.0,
        };
        let rows = fidelity_sweep(&arch, 1, &[0.0f64, 0.1], None).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].value.is_none());
        let value = rows[1].value.unwrap();
        assert!(value.fidelity > 0.99 && value.fidelity < 1.0);
    }

    #[test]
    fn sweep_rows_match_direct_conditioning() {
        let arch = ArchitectureKind::BalancedNPort {
            n_outputs: 2,
            path_loss: 0.1f64,
            dark_count: 1e-3,
        };
        let rows = fidelity_sweep(&arch, 1, &[0.2f64, 0.4], None).unwrap();
        for row in rows {
            let spec = arch.compile().unwrap();
            let source = PdcSource::for_target(row.chi, 1).unwrap();
            let cm = spec.conditional_matrix(source.n_max());
            let direct = condition_on_clicks(&cm, 1, &source).unwrap();
            let value = row.value.unwrap();
            assert_abs_diff_eq!(
                value.fidelity,
                direct.fidelity().unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn default_depth_covers_outputs_and_source() {
        let spec = DetectorSpec::balanced_nport(8, 0.0f64, 0.0).unwrap();
        let narrow = PdcSource::with_auto_truncation(0.1f64).unwrap();
        assert_eq!(spec.default_n_max(&narrow), 8);
        let deep = PdcSource::with_auto_truncation(0.6f64).unwrap();
        assert_eq!(spec.default_n_max(&deep), deep.n_max());
    }
}
