//! Measurement operators in the photon-number basis.
//!
//! A detector whose statistics depend only on the photon number (never on
//! coherences) is described completely by operators that are diagonal in the
//! number basis, so this module stores diagonals and nothing else.
//!
//! For a tabulated click distribution, the measurement operator of outcome
//! `m` has diagonal `p(m | n)` over `n`; summed over all outcomes these give
//! the identity. Applying the measurement to a diagonal state multiplies the
//! two diagonals entrywise and leaves the result unnormalized -- its trace is
//! the outcome probability.

use crate::engine::ConditionalMatrix;
use crate::error::{Error, Result};
use crate::real::Real;

/// A non-negative diagonal in the photon-number basis, entry `n` belonging
/// to `|n><n|`.
///
/// The same type carries states (trace 1) and measurement elements (entries
/// in `[0, 1]`); the stricter conditions are asserted where a specific role
/// is required, not at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator<F> {
    diag: Vec<F>,
}

impl<F: Real> DiagonalOperator<F> {
    /// Wraps a diagonal, rejecting negative or non-finite entries.
    pub fn from_diag(diag: Vec<F>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::CountOutOfRange {
                name: "dimension",
                domain: "[1, ..]",
                value: 0,
            });
        }
        for (index, &value) in diag.iter().enumerate() {
            if !(value >= F::zero()) || !value.is_finite() {
                return Err(Error::NegativeDiagonal {
                    index,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self { diag })
    }

    /// The pure number state `|n><n|` in a space of the given dimension.
    pub fn basis_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::DimensionOverflow {
                name: "basis_state",
                got: n + 1,
                supported: dim,
            });
        }
        let mut diag = vec![F::zero(); dim];
        diag[n] = F::one();
        Ok(Self { diag })
    }

    /// The identity on the truncated space.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diag(vec![F::one(); dim])
    }

    /// Dimension of the truncated number space.
    #[inline]
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// The diagonal entries.
    #[inline]
    pub fn diag(&self) -> &[F] {
        &self.diag
    }

    /// Entry at photon number `n`, zero beyond the truncation.
    #[inline]
    pub fn entry(&self, n: usize) -> F {
        self.diag.get(n).copied().unwrap_or_else(F::zero)
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> F {
        self.diag.iter().copied().sum()
    }

    /// The diagonal rescaled to unit trace, or `None` for a zero operator.
    pub fn normalized(&self) -> Option<Self> {
        let t = self.trace();
        if t <= F::zero() {
            return None;
        }
        Some(Self {
            diag: self.diag.iter().map(|&d| d / t).collect(),
        })
    }
}

impl<F: Real> ConditionalMatrix<F> {
    /// The measurement operator of the outcome "exactly `m_clicks` clicks":
    /// diagonal `p(m | n)` over `n = 0..=n_max`.
    pub fn povm_element(&self, m_clicks: usize) -> Result<DiagonalOperator<F>> {
        if m_clicks > self.n_outputs() {
            return Err(Error::ClickCountOutOfRange {
                m: m_clicks,
                n_outputs: self.n_outputs(),
            });
        }
        let diag = (0..=self.n_max())
            .map(|n| self.probability(m_clicks, n))
            .collect();
        Ok(DiagonalOperator { diag })
    }

    /// The diagonal of the process map for outcome `m_clicks`. For a
    /// number-diagonal detector this coincides with the measurement element;
    /// it is exposed separately because it plays the role of a map, not of
    /// an expectation.
    pub fn process_matrix_diagonal(&self, m_clicks: usize) -> Result<DiagonalOperator<F>> {
        self.povm_element(m_clicks)
    }

    /// Applies the outcome-`m_clicks` measurement to a diagonal state:
    /// entrywise product, unnormalized. The trace of the result is the
    /// probability of the outcome on that state.
    pub fn apply_process(
        &self,
        m_clicks: usize,
        state: &DiagonalOperator<F>,
    ) -> Result<DiagonalOperator<F>> {
        if state.dim() > self.n_max() + 1 {
            return Err(Error::DimensionOverflow {
                name: "state",
                got: state.dim(),
                supported: self.n_max() + 1,
            });
        }
        let element = self.povm_element(m_clicks)?;
        let diag = state
            .diag()
            .iter()
            .zip(element.diag())
            .map(|(&rho, &p)| rho * p)
            .collect();
        Ok(DiagonalOperator { diag })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DetectorSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn povm_elements_sum_to_identity() {
        let spec = DetectorSpec::new(vec![0.5f64, 0.3], 0.2, vec![0.4, 0.9], 1e-3).unwrap();
        let cm = spec.conditional_matrix(6);
        let mut total = vec![0.0f64; 7];
        for m in 0..=2usize {
            let e = cm.povm_element(m).unwrap();
            for (t, &v) in total.iter_mut().zip(e.diag()) {
                *t += v;
            }
        }
        for v in total {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_port_element_hand_values() {
        // One lossless output with a 1% dark count: the single-click element
        // is the dark count on vacuum and certainty on any photons.
        let spec = DetectorSpec::new(vec![1.0f64], 0.0, vec![0.0], 0.01).unwrap();
        let cm = spec.conditional_matrix(4);
        let e = cm.povm_element(1).unwrap();
        assert_abs_diff_eq!(e.diag()[0], 0.01, epsilon = 1e-15);
        for n in 1..=4 {
            assert_abs_diff_eq!(e.diag()[n], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn perfect_resolution_projects_onto_the_number_state() {
        // A matrix with p(m|n) = [m == n] acts as the projector |2><2|.
        let dim = 5usize;
        let columns: Vec<Vec<f64>> = (0..dim)
            .map(|n| (0..dim).map(|m| f64::from(m == n)).collect())
            .collect();
        let cm = ConditionalMatrix::from_columns(dim - 1, columns).unwrap();
        let e = cm.povm_element(2).unwrap();
        assert_eq!(e.diag(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn apply_process_scales_the_state_by_the_element() {
        let spec = DetectorSpec::balanced_nport(2, 0.1f64, 1e-3).unwrap();
        let cm = spec.conditional_matrix(5);
        let state =
            DiagonalOperator::from_diag(vec![0.5f64, 0.25, 0.125, 0.0625, 0.0375, 0.025]).unwrap();
        let out = cm.apply_process(1, &state).unwrap();
        for n in 0..=5usize {
            assert_abs_diff_eq!(
                out.diag()[n],
                state.diag()[n] * cm.probability(1, n),
                epsilon = 0.0
            );
        }
        // Unnormalized: the trace is the outcome probability, below 1 here.
        assert!(out.trace() < 1.0);
    }

    #[test]
    fn apply_process_rejects_oversized_states() {
        let spec = DetectorSpec::balanced_nport(2, 0.1f64, 0.0).unwrap();
        let cm = spec.conditional_matrix(3);
        let state = DiagonalOperator::from_diag(vec![0.2f64; 5]).unwrap();
        assert!(matches!(
            cm.apply_process(1, &state),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn process_diagonal_equals_the_element() {
        let spec = DetectorSpec::balanced_nport(3, 0.2f64, 1e-4).unwrap();
        let cm = spec.conditional_matrix(4);
        assert_eq!(
            cm.process_matrix_diagonal(2).unwrap(),
            cm.povm_element(2).unwrap()
        );
    }

    #[test]
    fn diagonal_operator_constructors() {
        assert!(DiagonalOperator::from_diag(vec![0.1f64, -0.2]).is_err());
        assert!(DiagonalOperator::from_diag(Vec::<f64>::new()).is_err());
        let e2 = DiagonalOperator::<f64>::basis_state(2, 4).unwrap();
        assert_eq!(e2.diag(), &[0.0, 0.0, 1.0, 0.0]);
        assert!(DiagonalOperator::<f64>::basis_state(4, 4).is_err());
        assert_eq!(DiagonalOperator::<f64>::identity(3).unwrap().trace(), 3.0);
        assert_eq!(e2.entry(2), 1.0);
        assert_eq!(e2.entry(17), 0.0);
    }

    #[test]
    fn normalization_helper() {
        let op = DiagonalOperator::from_diag(vec![1.0f64, 3.0]).unwrap();
        let n = op.normalized().unwrap();
        assert_eq!(n.diag(), &[0.25, 0.75]);
        let zero = DiagonalOperator::from_diag(vec![0.0f64, 0.0]).unwrap();
        assert!(zero.normalized().is_none());
    }
}
