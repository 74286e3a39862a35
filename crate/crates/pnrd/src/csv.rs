//! Plain-text CSV rendering of results.
//!
//! One function per table shape. Values use the scalar's shortest
//! round-trip decimal form, separators are commas, rows end in `\n`, and a
//! quantity that does not apply (an impossible outcome, a parameter another
//! family does not have) renders as an empty field. No field ever contains
//! a comma, so there is no quoting.

use std::fmt::Display;
use std::fmt::Write;

use crate::design::{BoundaryPoint, ComparisonReport, DesignResult};
use crate::engine::ConditionalMatrix;
use crate::ops::DiagonalOperator;
use crate::pdc::SweepPoint;
use crate::real::Real;

fn field<F: Display>(value: &Option<F>) -> String {
    match value {
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

/// `p(m | n)` as a grid: header `n\m,0,..,N`, one row per photon number.
pub fn conditional_matrix_csv<F: Real>(matrix: &ConditionalMatrix<F>) -> String {
    let mut out = String::from("n\\m");
    for m in 0..=matrix.n_outputs() {
        write!(out, ",{m}").unwrap();
    }
    out.push('\n');
    for n in 0..=matrix.n_max() {
        write!(out, "{n}").unwrap();
        for &p in matrix.column(n) {
            write!(out, ",{p}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// A diagonal operator as `n,value` rows.
pub fn diagonal_operator_csv<F: Real>(operator: &DiagonalOperator<F>) -> String {
    let mut out = String::from("n,value\n");
    for (n, value) in operator.diag().iter().enumerate() {
        writeln!(out, "{n},{value}").unwrap();
    }
    out
}

/// A heralding sweep as `chi,fidelity,detection_probability` rows; both
/// score fields are empty on rows where the outcome cannot occur.
pub fn sweep_csv<F: Real>(rows: &[SweepPoint<F>]) -> String {
    let mut out = String::from("chi,fidelity,detection_probability\n");
    for row in rows {
        let fidelity = field(&row.value.map(|v| v.fidelity));
        let p_det = field(&row.value.map(|v| v.detection_probability));
        writeln!(out, "{},{fidelity},{p_det}", row.chi).unwrap();
    }
    out
}

/// A full search trace; `chosen` is 1 on the winning row. `stages` and
/// `coupling_ratio` are empty for families without that knob.
pub fn design_result_csv<F: Real>(result: &DesignResult<F>) -> String {
    let mut out = String::from(
        "index,n_bins,stages,coupling_ratio,fidelity,detection_probability,fidelity_gap,chosen\n",
    );
    for candidate in &result.trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            candidate.index,
            candidate.n_bins,
            field(&candidate.stages),
            field(&candidate.coupling_ratio),
            field(&candidate.fidelity),
            field(&candidate.detection_probability),
            field(&result.fidelity_gap(candidate.index)),
            u8::from(candidate.index == result.chosen),
        )
        .unwrap();
    }
    out
}

/// A benefit-boundary scan; `benefits` is 1 where extra multiplexing
/// stages improve fidelity.
pub fn boundary_csv<F: Real>(points: &[BoundaryPoint<F>]) -> String {
    let mut out = String::from("dark_count,detector_efficiency,target_m,benefits\n");
    for point in points {
        writeln!(
            out,
            "{},{},{},{}",
            point.dark_count,
            point.detector_efficiency,
            point.target_m,
            u8::from(point.benefits),
        )
        .unwrap();
    }
    out
}

/// An architecture comparison, one row per family plus the ideal reference.
pub fn comparison_csv<F: Real>(report: &ComparisonReport<F>) -> String {
    let mut out = String::from(
        "family,n_bins,stages,coupling_ratio,fidelity,detection_probability\n",
    );
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.label,
            field(&row.n_bins),
            field(&row.stages),
            field(&row.coupling_ratio),
            field(&row.fidelity),
            field(&row.detection_probability),
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Candidate, ComparisonRow};
    use crate::pdc::SweepValue;

    #[test]
    fn matrix_grid_layout() {
        let matrix = ConditionalMatrix::from_columns(
            1,
            vec![vec![1.0f64, 0.0], vec![0.5, 0.5]],
        )
        .unwrap();
        assert_eq!(
            conditional_matrix_csv(&matrix),
            "n\\m,0,1\n0,1,0\n1,0.5,0.5\n"
        );
    }

    #[test]
    fn diagonal_rows() {
        let op = DiagonalOperator::from_diag(vec![0.25f64, 0.75]).unwrap();
        assert_eq!(diagonal_operator_csv(&op), "n,value\n0,0.25\n1,0.75\n");
    }

    #[test]
    fn sweep_leaves_impossible_rows_empty() {
        let rows = vec![
            SweepPoint {
                chi: 0.0f64,
                value: None,
            },
            SweepPoint {
                chi: 0.1,
                value: Some(SweepValue {
                    fidelity: 0.5,
                    detection_probability: 0.25,
                }),
            },
        ];
        assert_eq!(
            sweep_csv(&rows),
            "chi,fidelity,detection_probability\n0,,\n0.1,0.5,0.25\n"
        );
    }

    #[test]
    fn trace_marks_the_winner_and_its_gap() {
        let result = DesignResult {
            chosen: 1,
            trace: vec![
                Candidate {
                    index: 0,
                    n_bins: 1,
                    stages: None,
                    coupling_ratio: Some(0.75f64),
                    fidelity: Some(0.5),
                    detection_probability: Some(0.125),
                },
                Candidate {
                    index: 1,
                    n_bins: 2,
                    stages: None,
                    coupling_ratio: Some(0.5),
                    fidelity: Some(0.75),
                    detection_probability: Some(0.25),
                },
            ],
        };
        let expected = "index,n_bins,stages,coupling_ratio,fidelity,detection_probability,fidelity_gap,chosen\n\
                        0,1,,0.75,0.5,0.125,0.25,0\n\
                        1,2,,0.5,0.75,0.25,0,1\n";
        assert_eq!(design_result_csv(&result), expected);
    }

    #[test]
    fn boundary_flags_are_integers() {
        let points = vec![
            BoundaryPoint {
                dark_count: 0.0f64,
                detector_efficiency: 0.6,
                target_m: 2,
                benefits: true,
            },
            BoundaryPoint {
                dark_count: 1e-3,
                detector_efficiency: 0.1,
                target_m: 2,
                benefits: false,
            },
        ];
        assert_eq!(
            boundary_csv(&points),
            "dark_count,detector_efficiency,target_m,benefits\n\
             0,0.6,2,1\n\
             0.001,0.1,2,0\n"
        );
    }

    #[test]
    fn comparison_rows_include_missing_knobs_as_blanks() {
        let report = ComparisonReport {
            target_m: 1,
            chi: 0.2f64,
            rows: vec![
                ComparisonRow {
                    label: "loop",
                    n_bins: Some(3),
                    stages: None,
                    coupling_ratio: Some(0.4),
                    fidelity: Some(0.9),
                    detection_probability: Some(0.03),
                },
                ComparisonRow {
                    label: "ideal",
                    n_bins: None,
                    stages: None,
                    coupling_ratio: None,
                    fidelity: Some(1.0),
                    detection_probability: Some(0.0384),
                },
            ],
        };
        assert_eq!(
            comparison_csv(&report),
            "family,n_bins,stages,coupling_ratio,fidelity,detection_probability\n\
             loop,3,,0.4,0.9,0.03\n\
             ideal,,,,1,0.0384\n"
        );
    }
}
