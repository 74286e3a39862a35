//! Click statistics for a [`DetectorSpec`].
//!
//! Routing `n` indistinguishable photons over the outputs (plus the residual
//! sink) is a multinomial draw. An output that received `k` photons clicks
//! unless all `k` are absorbed and no dark count fires, so conditioned on its
//! photon count each output is an independent Bernoulli:
//!
//! * click: `p_dc + (1 - p_dc) (1 - p_loss^k)`
//! * silent: `(1 - p_dc) p_loss^k`
//!
//! with the convention `p_loss^0 = 1` even at `p_loss = 0`. The sink keeps
//! its photons and never clicks.
//!
//! The multinomial factorizes sequentially: scanning outputs left to right,
//! output `i` takes a binomial share of the photons still unrouted, with
//! success probability `coupling[i]` divided by the routing mass not yet
//! spoken for. [`DetectorSpec::click_count_distribution`] runs a dynamic
//! program over that scan whose state is (photons still unrouted, clicks so
//! far); it is polynomial in all sizes where direct enumeration of routings
//! and click patterns is exponential. The enumeration lives on in
//! [`crate::oracle`] as an independent cross-check.

use rayon::prelude::*;

use crate::detector::DetectorSpec;
use crate::error::{Error, Result};
use crate::real::Real;

/// A click pattern: which outputs fired in one detection window.
///
/// Its length must equal the `n_outputs` of the detector it is evaluated
/// against; evaluation reports an error otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    bits: Vec<bool>,
}

impl Signature {
    /// Wraps a click pattern, `true` meaning the output fired.
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The pattern as a slice, index = output.
    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of outputs in the pattern.
    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// True for the empty pattern.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of outputs that fired.
    #[inline]
    pub fn click_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl From<Vec<bool>> for Signature {
    fn from(bits: Vec<bool>) -> Self {
        Self::new(bits)
    }
}

impl std::fmt::Display for Signature {
    /// One digit per output, `1` for a click: `"10010"`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The conditional click-count distribution `p(m | n)` of a detector,
/// tabulated for photon numbers `n = 0..=n_max` and click counts
/// `m = 0..=n_outputs`.
///
/// Every column (fixed `n`) is a probability distribution over `m` and sums
/// to 1 within `1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMatrix<F> {
    n_outputs: usize,
    /// `columns[n][m]`.
    columns: Vec<Vec<F>>,
}

impl<F: Real> ConditionalMatrix<F> {
    /// Assembles a matrix from explicit columns, checking shape and
    /// column normalization.
    pub fn from_columns(n_outputs: usize, columns: Vec<Vec<F>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::CountOutOfRange {
                name: "columns",
                domain: "[1, ..]",
                value: 0,
            });
        }
        let tol = F::of(1e-10).max(F::epsilon() * F::of_usize(16 * (n_outputs + 1)));
        for col in &columns {
            if col.len() != n_outputs + 1 {
                return Err(Error::LengthMismatch {
                    name: "column",
                    expected: n_outputs + 1,
                    got: col.len(),
                });
            }
            let sum: F = col.iter().copied().sum();
            if (sum - F::one()).abs() > tol {
                return Err(Error::OutOfRange {
                    name: "column sum",
                    domain: "1 +- 1e-10",
                    value: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
            for &p in col.iter() {
                if !(p >= F::zero()) {
                    return Err(Error::OutOfRange {
                        name: "probability",
                        domain: "[0, 1]",
                        value: p.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        Ok(Self { n_outputs, columns })
    }

    /// Number of detector outputs (row index runs `0..=n_outputs`).
    #[inline]
    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// Largest tabulated photon number (column index runs `0..=n_max`).
    #[inline]
    pub fn n_max(&self) -> usize {
        self.columns.len() - 1
    }

    /// `p(m_clicks | n_photons)`.
    ///
    /// Panics if either index is out of the tabulated range.
    #[inline]
    pub fn probability(&self, m_clicks: usize, n_photons: usize) -> F {
        self.columns[n_photons][m_clicks]
    }

    /// The click-count distribution for a fixed photon number.
    #[inline]
    pub fn column(&self, n_photons: usize) -> &[F] {
        &self.columns[n_photons]
    }
}

/// Fills `row[k] = C(r, k) theta^k (1 - theta)^(r - k)` for `k = 0..=r`.
///
/// Each entry is built as `(1 - theta)^(r-k) * prod_j theta (r-k+j)/j`,
/// which keeps intermediates far from overflow and handles the boundary
/// values of `theta` through the `x^0 = 1` convention.
fn binomial_row<F: Real>(r: usize, theta: F, row: &mut Vec<F>) {
    row.clear();
    if theta <= F::zero() {
        row.resize(r + 1, F::zero());
        row[0] = F::one();
        return;
    }
    if theta >= F::one() {
        row.resize(r + 1, F::zero());
        row[r] = F::one();
        return;
    }
    let miss = F::one() - theta;
    for k in 0..=r {
        let mut w = miss.powi((r - k) as i32);
        for j in 1..=k {
            w = w * theta * F::of_usize(r - k + j) / F::of_usize(j);
        }
        row.push(w);
    }
}

/// Per-output click and silence probabilities as a function of the photon
/// count `k` routed there.
struct OutputFactors<F> {
    click: Vec<F>,
    silent: Vec<F>,
}

impl<F: Real> OutputFactors<F> {
    fn new(path_loss: F, dark_count: F, max_photons: usize) -> Self {
        let survive = F::one() - dark_count;
        let mut click = Vec::with_capacity(max_photons + 1);
        let mut silent = Vec::with_capacity(max_photons + 1);
        let mut all_lost = F::one(); // path_loss^k, with 0^0 = 1
        for _ in 0..=max_photons {
            click.push(dark_count + survive * (F::one() - all_lost));
            silent.push(survive * all_lost);
            all_lost *= path_loss;
        }
        Self { click, silent }
    }
}

impl<F: Real> DetectorSpec<F> {
    /// `tails[i]` = routing probability mass at output `i` and beyond
    /// (including the residual sink); `tails[n_outputs]` is the sink alone.
    fn routing_tails(&self) -> Vec<F> {
        let n = self.n_outputs();
        let mut tails = vec![F::zero(); n + 1];
        tails[n] = self.residual_loss();
        for i in (0..n).rev() {
            tails[i] = tails[i + 1] + self.coupling()[i];
        }
        tails
    }

    /// Binomial success probability for output `i` in the sequential
    /// factorization of the multinomial routing.
    #[inline]
    fn routing_share(coupling: F, tail: F) -> F {
        if tail <= F::zero() {
            // No mass left means no photons can remain either; the value is
            // never multiplied into a nonzero state.
            return F::zero();
        }
        (coupling / tail).min(F::one())
    }

    /// Probability that exactly the outputs in `signature` click when
    /// `n_photons` enter the detector.
    ///
    /// This is the full sum over photon routings, evaluated through the
    /// sequential-binomial factorization: a dynamic program over outputs
    /// whose state is the number of photons still unrouted.
    pub fn signature_probability(&self, signature: &Signature, n_photons: usize) -> Result<F> {
        if signature.len() != self.n_outputs() {
            return Err(Error::LengthMismatch {
                name: "signature",
                expected: self.n_outputs(),
                got: signature.len(),
            });
        }
        let tails = self.routing_tails();
        let mut dp = vec![F::zero(); n_photons + 1];
        dp[n_photons] = F::one();
        let mut next = vec![F::zero(); n_photons + 1];
        let mut pmf: Vec<F> = Vec::with_capacity(n_photons + 1);
        for i in 0..self.n_outputs() {
            let theta = Self::routing_share(self.coupling()[i], tails[i]);
            let factors = OutputFactors::new(self.path_loss()[i], self.dark_count(), n_photons);
            let clicked = signature.bits()[i];
            next.iter_mut().for_each(|x| *x = F::zero());
            for r in (0..=n_photons).rev() {
                let cur = dp[r];
                if cur == F::zero() {
                    continue;
                }
                binomial_row(r, theta, &mut pmf);
                for k in 0..=r {
                    let w = cur * pmf[k];
                    if w == F::zero() {
                        continue;
                    }
                    let f = if clicked {
                        factors.click[k]
                    } else {
                        factors.silent[k]
                    };
                    next[r - k] += w * f;
                }
            }
            std::mem::swap(&mut dp, &mut next);
        }
        // Photons still unrouted sit in the sink, which never clicks.
        Ok(dp.iter().copied().sum())
    }

    /// The distribution of the click count when `n_photons` enter, truncated
    /// exactly: entries `0..=cap` are the true probabilities, entry `cap + 1`
    /// aggregates everything above. Entries at or below `cap` are
    /// bit-identical to the untruncated computation.
    pub(crate) fn click_count_distribution_capped(&self, n_photons: usize, cap: usize) -> Vec<F> {
        let n_out = self.n_outputs();
        let cap = cap.min(n_out);
        let width = cap + 2;
        let tails = self.routing_tails();

        // dp[r * width + c]: r photons unrouted, c clicks so far (saturating
        // at cap + 1).
        let mut dp = vec![F::zero(); (n_photons + 1) * width];
        dp[n_photons * width] = F::one();
        let mut next = vec![F::zero(); (n_photons + 1) * width];
        let mut pmf: Vec<F> = Vec::with_capacity(n_photons + 1);

        for i in 0..n_out {
            let theta = Self::routing_share(self.coupling()[i], tails[i]);
            let factors = OutputFactors::new(self.path_loss()[i], self.dark_count(), n_photons);
            next.iter_mut().for_each(|x| *x = F::zero());
            for r in (0..=n_photons).rev() {
                binomial_row(r, theta, &mut pmf);
                for c in 0..width {
                    let cur = dp[r * width + c];
                    if cur == F::zero() {
                        continue;
                    }
                    let c_click = (c + 1).min(cap + 1);
                    for k in 0..=r {
                        let w = cur * pmf[k];
                        if w == F::zero() {
                            continue;
                        }
                        let base = (r - k) * width;
                        next[base + c_click] += w * factors.click[k];
                        next[base + c] += w * factors.silent[k];
                    }
                }
            }
            std::mem::swap(&mut dp, &mut next);
        }

        let mut out = vec![F::zero(); width];
        for r in 0..=n_photons {
            for (c, o) in out.iter_mut().enumerate() {
                *o += dp[r * width + c];
            }
        }
        out
    }

    /// The full click-count distribution for `n_photons`, one entry per
    /// `m = 0..=n_outputs`.
    pub fn click_count_distribution(&self, n_photons: usize) -> Vec<F> {
        let mut d = self.click_count_distribution_capped(n_photons, self.n_outputs());
        // The overflow slot beyond m = n_outputs is structurally zero.
        d.truncate(self.n_outputs() + 1);
        d
    }

    /// `p(m_clicks | n_photons)`.
    pub fn conditional_probability(&self, m_clicks: usize, n_photons: usize) -> Result<F> {
        if m_clicks > self.n_outputs() {
            return Err(Error::ClickCountOutOfRange {
                m: m_clicks,
                n_outputs: self.n_outputs(),
            });
        }
        Ok(self.click_count_distribution_capped(n_photons, m_clicks)[m_clicks])
    }

    /// Tabulates `p(m | n)` for all `m` and `n = 0..=n_max`. Columns are
    /// computed independently (and in parallel); the result does not depend
    /// on thread count.
    pub fn conditional_matrix(&self, n_max: usize) -> ConditionalMatrix<F> {
        let columns: Vec<Vec<F>> = (0..=n_max)
            .into_par_iter()
            .map(|n| self.click_count_distribution(n))
            .collect();
        ConditionalMatrix {
            n_outputs: self.n_outputs(),
            columns,
        }
    }
}
