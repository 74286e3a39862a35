//! Click statistics and design tools for photon-number measurement with
//! multiplexed on/off detectors.
//!
//! Single-photon detectors tell you *whether* light arrived, not *how much*.
//! Splitting a pulse across many detectors (spatially, or into time bins
//! with a storage loop or a splitting tree) recovers approximate number
//! resolution: count the clicks. This crate models that scheme end to end:
//!
//! * [`DetectorSpec`] reduces an architecture to routing probabilities,
//!   per-path loss, and dark counts; builders cover the symmetric N-port,
//!   the storage-loop time multiplexer, and the balanced splitting tree.
//! * The engine computes exact click statistics: the probability of a
//!   specific click pattern ([`DetectorSpec::signature_probability`]) or of
//!   each click count ([`DetectorSpec::conditional_matrix`]), by dynamic
//!   programming over photon routings rather than brute-force enumeration.
//! * [`ConditionalMatrix::povm_element`] exposes the same numbers as
//!   measurement operators, diagonal in the number basis; [`apply_process`]
//!   (see [`ConditionalMatrix::apply_process`]) updates diagonal states.
//! * The preparation layer ([`condition_on_clicks`], [`fidelity_sweep`])
//!   scores heralding a target photon number from a two-mode squeezed pair
//!   source, reporting fidelity and detection probability, with impossible
//!   outcomes tagged rather than returned as NaN.
//! * The design layer ([`optimize_bins`], [`optimize_stages`],
//!   [`benefit_boundary`], [`compare_architectures`]) searches bin counts,
//!   stage counts, and loop coupling ratios for the best herald, and maps
//!   where extra multiplexing actually pays.
//! * The oracle module cross-checks the engine against an exhaustive
//!   enumeration and a seeded Monte Carlo sampler ([`run_validation`]).
//!
//! Everything numeric is generic over the scalar through the [`Real`]
//! trait; `f64` is the working precision (aliases like [`DetectorSpec64`]),
//! `f32` is supported for storage-sensitive callers.
//!
//! ```
//! use pnrd::{condition_on_clicks, ComponentParams64, DetectorSpec64, PdcSource64};
//!
//! let params = ComponentParams64 {
//!     coupler_loss_db: 0.4,
//!     fiber_loss_db: 0.2,
//!     switch_loss_db: 2.0,
//!     detector_efficiency: 0.6,
//!     dark_count: 5e-6,
//! };
//! let detector = DetectorSpec64::loop_tdm(3, 0.5, &params)?;
//! let source = PdcSource64::for_target(0.1, 1)?;
//! let matrix = detector.conditional_matrix(source.n_max());
//! let outcome = condition_on_clicks(&matrix, 1, &source)?;
//! let report = outcome.prepared().expect("one click can occur");
//! assert!(report.fidelity > 0.8 && report.fidelity < 1.0);
//! # Ok::<(), pnrd::Error>(())
//! ```

#![forbid(unsafe_code)]
// Two idioms this numeric code keeps on purpose: negated comparisons like
// `!(x > 0)` are NaN-rejecting domain guards (`x <= 0` would wave NaN
// through), and index loops walk several parallel arrays keyed by the same
// physical quantity (output index, photon count).
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod csv;
pub mod design;
pub mod detector;
pub mod engine;
pub mod error;
pub mod ops;
pub mod oracle;
pub mod pdc;
pub mod real;

pub use csv::{
    boundary_csv, comparison_csv, conditional_matrix_csv, design_result_csv,
    diagonal_operator_csv, sweep_csv,
};
pub use design::{
    benefit_boundary, compare_architectures, loop_coupling_for_error, min_stages, optimize_bins,
    optimize_stages, truncation_error, ArchitectureFamily, BoundaryPoint, Candidate,
    ComparisonReport, ComparisonRow, DesignQuery, DesignResult,
};
pub use detector::{db_to_transmission, ArchitectureKind, ComponentParams, DetectorSpec};
pub use engine::{ConditionalMatrix, Signature};
pub use error::{Error, Result};
pub use ops::DiagonalOperator;
pub use oracle::{
    monte_carlo_conditional, monte_carlo_histogram, naive_conditional_probability,
    naive_signature_probability, run_validation, suite_specs, McEstimate, McHistogram,
    ValidationConfig, ValidationReport,
};
pub use pdc::{
    condition_on_clicks, condition_on_signature, fidelity_sweep, PdcSource, PreparationOutcome,
    PreparationReport, SweepPoint, SweepValue, TAIL_LIMIT,
};
pub use real::Real;

/// [`ComponentParams`] at working precision.
pub type ComponentParams64 = ComponentParams<f64>;
/// [`DetectorSpec`] at working precision.
pub type DetectorSpec64 = DetectorSpec<f64>;
/// [`ArchitectureKind`] at working precision.
pub type ArchitectureKind64 = ArchitectureKind<f64>;
/// [`ConditionalMatrix`] at working precision.
pub type ConditionalMatrix64 = ConditionalMatrix<f64>;
/// [`DiagonalOperator`] at working precision.
pub type DiagonalOperator64 = DiagonalOperator<f64>;
/// [`PdcSource`] at working precision.
pub type PdcSource64 = PdcSource<f64>;
/// [`PreparationReport`] at working precision.
pub type PreparationReport64 = PreparationReport<f64>;
/// [`PreparationOutcome`] at working precision.
pub type PreparationOutcome64 = PreparationOutcome<f64>;
/// [`DesignQuery`] at working precision.
pub type DesignQuery64 = DesignQuery<f64>;
/// [`DesignResult`] at working precision.
pub type DesignResult64 = DesignResult<f64>;

/// [`ComponentParams`] in single precision.
pub type ComponentParams32 = ComponentParams<f32>;
/// [`DetectorSpec`] in single precision.
pub type DetectorSpec32 = DetectorSpec<f32>;
/// [`ConditionalMatrix`] in single precision.
pub type ConditionalMatrix32 = ConditionalMatrix<f32>;
/// [`DiagonalOperator`] in single precision.
pub type DiagonalOperator32 = DiagonalOperator<f32>;
/// [`PdcSource`] in single precision.
pub type PdcSource32 = PdcSource<f32>;
