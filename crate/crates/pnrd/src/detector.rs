//! Detector descriptions.
//!
//! The model covers a family of schemes that approximate photon-number
//! resolution by splitting an incoming pulse over many on/off detectors.
//! A detector is abstracted to four ingredients:
//!
//! * `coupling[i]` — the probability that one incoming photon is routed to
//!   output `i`;
//! * `residual_loss` — the probability that a photon is routed nowhere
//!   (e.g. it never leaves a storage loop); together with the couplings this
//!   partitions unity;
//! * `path_loss[i]` — the probability that a photon routed to output `i` is
//!   absorbed before it can trigger the detector there, including the
//!   detector's own inefficiency;
//! * `dark_count` — the probability that an output clicks during the
//!   detection window with no photon present.
//!
//! [`DetectorSpec::balanced_nport`], [`DetectorSpec::loop_tdm`] and
//! [`DetectorSpec::balanced_tdm`] build the three concrete architectures from
//! hardware figures ([`ComponentParams`]); [`DetectorSpec::new`] accepts any
//! routing distribution directly.

use crate::error::{Error, Result};
use crate::real::Real;

/// Converts an attenuation in decibels to a power transmission ratio,
/// `10^(-dB/10)`.
///
/// `0 dB` maps to exactly `1`. Attenuations add in decibels, so
/// transmissions multiply: `db_to_transmission(a + b)` equals
/// `db_to_transmission(a) * db_to_transmission(b)` up to rounding.
/// Negative (amplifying) values are rejected.
pub fn db_to_transmission<F: Real>(loss_db: F) -> Result<F> {
    if !(loss_db >= F::zero()) || !loss_db.is_finite() {
        return Err(Error::OutOfRange {
            name: "loss_db",
            domain: "[0, inf)",
            value: loss_db.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(transmission(loss_db))
}

/// `10^(-dB/10)` without the domain check, for internal use on validated
/// inputs.
#[inline]
fn transmission<F: Real>(loss_db: F) -> F {
    F::of(10.0).powf(-(loss_db / F::of(10.0)))
}

/// Hardware figures for the time-multiplexed architectures.
///
/// Losses are attenuations in dB per pass through the named component.
/// Fiber loss is per delay segment (one inter-bin delay), not per meter, so
/// the caller folds fiber length into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentParams<F> {
    /// Attenuation per pass through a coupler (dB).
    pub coupler_loss_db: F,
    /// Attenuation per traversal of one delay segment (dB).
    pub fiber_loss_db: F,
    /// Attenuation per pass through the active switch (dB), loop
    /// architecture only.
    pub switch_loss_db: F,
    /// Detection efficiency of each on/off detector, in `[0, 1]`.
    pub detector_efficiency: F,
    /// Dark count probability per detector per detection window, in `[0, 1)`.
    pub dark_count: F,
}

impl<F: Real> ComponentParams<F> {
    /// Checks every field against its domain.
    pub fn validate(&self) -> Result<()> {
        for (name, db) in [
            ("coupler_loss_db", self.coupler_loss_db),
            ("fiber_loss_db", self.fiber_loss_db),
            ("switch_loss_db", self.switch_loss_db),
        ] {
            if !(db >= F::zero()) || !db.is_finite() {
                return Err(Error::OutOfRange {
                    name,
                    domain: "[0, inf)",
                    value: db.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        if !(self.detector_efficiency >= F::zero() && self.detector_efficiency <= F::one()) {
            return Err(Error::OutOfRange {
                name: "detector_efficiency",
                domain: "[0, 1]",
                value: self.detector_efficiency.to_f64().unwrap_or(f64::NAN),
            });
        }
        validate_dark_count(self.dark_count)?;
        Ok(())
    }
}

fn validate_dark_count<F: Real>(dark_count: F) -> Result<()> {
    if !(dark_count >= F::zero() && dark_count < F::one()) {
        return Err(Error::OutOfRange {
            name: "dark_count",
            domain: "[0, 1)",
            value: dark_count.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// A multiplexed detector reduced to its routing and noise statistics.
///
/// Invariants, enforced on construction:
/// * at least one output;
/// * `coupling` and `path_loss` have one entry per output, each in `[0, 1]`;
/// * `residual_loss` in `[0, 1]` and `sum(coupling) + residual_loss = 1`
///   within `1e-12` (loosened proportionally for `f32`);
/// * `dark_count` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec<F> {
    coupling: Vec<F>,
    residual_loss: F,
    path_loss: Vec<F>,
    dark_count: F,
}

impl<F: Real> DetectorSpec<F> {
    /// Builds a detector from an explicit routing distribution.
    pub fn new(
        coupling: Vec<F>,
        residual_loss: F,
        path_loss: Vec<F>,
        dark_count: F,
    ) -> Result<Self> {
        if coupling.is_empty() {
            return Err(Error::CountOutOfRange {
                name: "n_outputs",
                domain: "[1, ..]",
                value: 0,
            });
        }
        if path_loss.len() != coupling.len() {
            return Err(Error::LengthMismatch {
                name: "path_loss",
                expected: coupling.len(),
                got: path_loss.len(),
            });
        }
        for (name, values) in [("coupling", &coupling), ("path_loss", &path_loss)] {
            for &v in values.iter() {
                if !(v >= F::zero() && v <= F::one()) {
                    return Err(Error::OutOfRange {
                        name,
                        domain: "[0, 1]",
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        if !(residual_loss >= F::zero() && residual_loss <= F::one()) {
            return Err(Error::OutOfRange {
                name: "residual_loss",
                domain: "[0, 1]",
                value: residual_loss.to_f64().unwrap_or(f64::NAN),
            });
        }
        validate_dark_count(dark_count)?;

        let sum = coupling.iter().copied().sum::<F>() + residual_loss;
        // 1e-12 is the contract for f64; scale to the epsilon of narrower
        // scalars so f32 specs remain constructible.
        let tol = F::of(1e-12).max(F::epsilon() * F::of_usize(4 * (coupling.len() + 1)));
        if (sum - F::one()).abs() > tol {
            return Err(Error::UnnormalizedCoupling {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }

        Ok(Self {
            coupling,
            residual_loss,
            path_loss,
            dark_count,
        })
    }

    /// A symmetric `N`-output splitter: every output receives a photon with
    /// probability `1/N` and sees the same path loss. No residual channel.
    pub fn balanced_nport(n_outputs: usize, path_loss: F, dark_count: F) -> Result<Self> {
        if n_outputs == 0 {
            return Err(Error::CountOutOfRange {
                name: "n_outputs",
                domain: "[1, ..]",
                value: 0,
            });
        }
        let share = F::one() / F::of_usize(n_outputs);
        Self::new(
            vec![share; n_outputs],
            F::zero(),
            vec![path_loss; n_outputs],
            dark_count,
        )
    }

    /// A storage-loop detector read out over `n_bins` time bins.
    ///
    /// Each round trip the loop couples out with ratio `coupling_ratio`, so
    /// bin `i` (1-based) receives `p_c (1 - p_c)^(i-1)` and photons still
    /// circulating after the last bin are lost:
    /// `residual_loss = (1 - p_c)^n_bins`.
    ///
    /// A photon leaving at bin `i` has crossed the switch and the out-coupler
    /// `i` times and traversed `i - 1` delay segments, giving
    /// `path_loss(i) = 1 - t_s^i t_c^i t_f^(i-1) eta_det`.
    pub fn loop_tdm(n_bins: usize, coupling_ratio: F, params: &ComponentParams<F>) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::CountOutOfRange {
                name: "n_bins",
                domain: "[1, ..]",
                value: 0,
            });
        }
        if !(coupling_ratio > F::zero() && coupling_ratio < F::one()) {
            return Err(Error::OutOfRange {
                name: "coupling_ratio",
                domain: "(0, 1)",
                value: coupling_ratio.to_f64().unwrap_or(f64::NAN),
            });
        }
        params.validate()?;

        let t_c = transmission(params.coupler_loss_db);
        let t_f = transmission(params.fiber_loss_db);
        let t_s = transmission(params.switch_loss_db);
        let stay = F::one() - coupling_ratio;

        let mut coupling = Vec::with_capacity(n_bins);
        let mut path_loss = Vec::with_capacity(n_bins);
        let mut stay_run = F::one(); // (1 - p_c)^(i-1)
        let mut trans_run = t_s * t_c * params.detector_efficiency; // bin-1 transmission
        for _ in 0..n_bins {
            coupling.push(coupling_ratio * stay_run);
            path_loss.push(F::one() - trans_run);
            stay_run *= stay;
            trans_run = trans_run * t_s * t_c * t_f;
        }
        let residual_loss = stay_run; // (1 - p_c)^n_bins

        Self::new(coupling, residual_loss, path_loss, params.dark_count)
    }

    /// A log-depth splitting tree over `2^stages` on/off detectors.
    ///
    /// Every output receives `1/2^stages`. A photon reaching output `i`
    /// (1-based) has crossed `stages + 1` couplers and `i - 1` delay
    /// segments: `path_loss(i) = 1 - t_f^(i-1) t_c^(stages+1) eta_det`.
    /// `stages = 0` is a single detector behind one coupler.
    pub fn balanced_tdm(stages: usize, params: &ComponentParams<F>) -> Result<Self> {
        if stages > 24 {
            return Err(Error::CountOutOfRange {
                name: "stages",
                domain: "[0, 24]",
                value: stages,
            });
        }
        params.validate()?;

        let n_outputs = 1usize << stages;
        let t_c = transmission(params.coupler_loss_db);
        let t_f = transmission(params.fiber_loss_db);
        let fixed = t_c.powi(stages as i32 + 1) * params.detector_efficiency;

        let share = F::one() / F::of_usize(n_outputs);
        let mut path_loss = Vec::with_capacity(n_outputs);
        let mut fiber_run = F::one(); // t_f^(i-1)
        for _ in 0..n_outputs {
            path_loss.push(F::one() - fiber_run * fixed);
            fiber_run *= t_f;
        }

        Self::new(
            vec![share; n_outputs],
            F::zero(),
            path_loss,
            params.dark_count,
        )
    }

    /// Number of detector outputs.
    #[inline]
    pub fn n_outputs(&self) -> usize {
        self.coupling.len()
    }

    /// Routing probability per output.
    #[inline]
    pub fn coupling(&self) -> &[F] {
        &self.coupling
    }

    /// Probability that a photon is routed to no output at all.
    #[inline]
    pub fn residual_loss(&self) -> F {
        self.residual_loss
    }

    /// Per-output absorption probability (detector inefficiency included).
    #[inline]
    pub fn path_loss(&self) -> &[F] {
        &self.path_loss
    }

    /// Dark count probability per output per window.
    #[inline]
    pub fn dark_count(&self) -> F {
        self.dark_count
    }
}

/// The three supported architectures, with the parameters needed to compile
/// each into a [`DetectorSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum ArchitectureKind<F> {
    /// Symmetric splitter over `n_outputs` detectors with a uniform path
    /// loss.
    BalancedNPort {
        n_outputs: usize,
        path_loss: F,
        dark_count: F,
    },
    /// Storage loop read out over `n_bins` time bins.
    LoopTdm {
        n_bins: usize,
        coupling_ratio: F,
        params: ComponentParams<F>,
    },
    /// Balanced splitting tree with `2^stages` outputs.
    BalancedTdm {
        stages: usize,
        params: ComponentParams<F>,
    },
}

impl<F: Real> ArchitectureKind<F> {
    /// Builds the detector this architecture describes.
    pub fn compile(&self) -> Result<DetectorSpec<F>> {
        match self {
            Self::BalancedNPort {
                n_outputs,
                path_loss,
                dark_count,
            } => DetectorSpec::balanced_nport(*n_outputs, *path_loss, *dark_count),
            Self::LoopTdm {
                n_bins,
                coupling_ratio,
                params,
            } => DetectorSpec::loop_tdm(*n_bins, *coupling_ratio, params),
            Self::BalancedTdm { stages, params } => DetectorSpec::balanced_tdm(*stages, params),
        }
    }

    /// Number of detector outputs the compiled spec will have.
    pub fn n_outputs(&self) -> usize {
        match self {
            Self::BalancedNPort { n_outputs, .. } => *n_outputs,
            Self::LoopTdm { n_bins, .. } => *n_bins,
            Self::BalancedTdm { stages, .. } => 1usize << stages,
        }
    }
}
