//! Independent cross-checks for the click-statistics engine.
//!
//! Two reference implementations deliberately share no code with the
//! production dynamic program:
//!
//! * [`naive_conditional_probability`] evaluates the defining triple sum --
//!   over click patterns, photon routings and per-output factors -- term by
//!   term, with no algebraic shortcuts. It is exponential in the problem
//!   size and refuses inputs past a fixed enumeration budget.
//! * [`monte_carlo_histogram`] samples detection windows photon by photon.
//!   It is seeded, deterministic, and sharded with a fixed per-shard seed
//!   derivation, so the merged tally is independent of how shards are
//!   scheduled.
//!
//! [`run_validation`] drives both against the engine on a randomized family
//! of detectors; the CLI exposes it as its self-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detector::DetectorSpec;
use crate::engine::Signature;
use crate::error::{Error, Result};
use crate::real::Real;

/// Hard ceiling on the number of terms the exhaustive oracle will sum.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// Trials per Monte Carlo shard. Fixed, so the shard split (and therefore
/// the merged tally) depends only on the trial count, never on thread count.
pub const MC_SHARD_TRIALS: u64 = 1 << 16;

fn binomial_f64(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut b = 1.0f64;
    for j in 0..k {
        b = b * (n - j) as f64 / (j + 1) as f64;
    }
    b
}

/// Number of routing slots: every output, plus the residual sink when it
/// carries any probability.
fn slot_count<F: Real>(spec: &DetectorSpec<F>) -> usize {
    spec.n_outputs() + usize::from(spec.residual_loss() > F::zero())
}

fn check_budget(terms: f64) -> Result<()> {
    if !(terms <= ENUMERATION_BUDGET) {
        return Err(Error::EnumerationBudget {
            estimate: terms,
            limit: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// Calls `f` with every composition of `n` into `slots` non-negative parts.
fn for_each_composition(n: usize, slots: usize, f: &mut impl FnMut(&[usize])) {
    fn recurse(remaining: usize, slot: usize, parts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == parts.len() {
            parts[slot] = remaining;
            f(parts);
            return;
        }
        for k in 0..=remaining {
            parts[slot] = k;
            recurse(remaining - k, slot + 1, parts, f);
        }
    }
    let mut parts = vec![0usize; slots];
    recurse(n, 0, &mut parts, f);
}

/// The probability of one exact click pattern, summed routing by routing.
///
/// For every way of distributing `n_photons` over the outputs (and the
/// residual sink, if present) it multiplies the multinomial routing weight
/// by the per-output click or silence factor and adds the terms up.
pub fn naive_signature_probability<F: Real>(
    spec: &DetectorSpec<F>,
    signature: &Signature,
    n_photons: usize,
) -> Result<F> {
    if signature.len() != spec.n_outputs() {
        return Err(Error::LengthMismatch {
            name: "signature",
            expected: spec.n_outputs(),
            got: signature.len(),
        });
    }
    let slots = slot_count(spec);
    check_budget(binomial_f64(n_photons + slots, n_photons))?;

    let mut factorial = vec![F::one(); n_photons + 1];
    for i in 1..=n_photons {
        factorial[i] = factorial[i - 1] * F::of_usize(i);
    }

    let one = F::one();
    let dark = spec.dark_count();
    let mut total = F::zero();
    for_each_composition(n_photons, slots, &mut |parts| {
        // Multinomial weight of this routing.
        let mut term = factorial[n_photons];
        for (i, &k) in parts.iter().enumerate() {
            let share = if i < spec.n_outputs() {
                spec.coupling()[i]
            } else {
                spec.residual_loss()
            };
            term = term / factorial[k] * share.powi(k as i32);
        }
        // Click or silence factor per output; the sink contributes neither.
        for i in 0..spec.n_outputs() {
            let all_lost = spec.path_loss()[i].powi(parts[i] as i32);
            term *= if signature.bits()[i] {
                dark + (one - dark) * (one - all_lost)
            } else {
                (one - dark) * all_lost
            };
        }
        total += term;
    });
    Ok(total)
}

/// `p(m | n)` by brute force: the sum of [`naive_signature_probability`]
/// over every click pattern with `m_clicks` clicks.
///
/// Refuses when the term count `C(n + slots, n) * 2^n_outputs` exceeds
/// [`ENUMERATION_BUDGET`].
pub fn naive_conditional_probability<F: Real>(
    spec: &DetectorSpec<F>,
    m_clicks: usize,
    n_photons: usize,
) -> Result<F> {
    if m_clicks > spec.n_outputs() {
        return Err(Error::ClickCountOutOfRange {
            m: m_clicks,
            n_outputs: spec.n_outputs(),
        });
    }
    let slots = slot_count(spec);
    let terms =
        binomial_f64(n_photons + slots, n_photons) * 2.0f64.powi(spec.n_outputs() as i32);
    check_budget(terms)?;

    let mut total = F::zero();
    for mask in 0u64..1u64 << spec.n_outputs() {
        if mask.count_ones() as usize != m_clicks {
            continue;
        }
        let bits = (0..spec.n_outputs()).map(|i| mask >> i & 1 == 1).collect();
        total += naive_signature_probability(spec, &Signature::new(bits), n_photons)?;
    }
    Ok(total)
}

/// SplitMix64 step; the documented per-shard seed derivation.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for shard `shard` of a run seeded with `seed`.
fn shard_seed(seed: u64, shard: u64) -> u64 {
    splitmix64(seed ^ shard.wrapping_mul(0xA0761D6478BD642F))
}

/// Tally of simulated detection windows for a fixed photon number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McHistogram {
    /// `counts[m]` = windows that produced exactly `m` clicks.
    pub counts: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
}

impl McHistogram {
    /// Sample mean for a click count.
    pub fn mean(&self, m_clicks: usize) -> f64 {
        self.counts[m_clicks] as f64 / self.trials as f64
    }
}

/// A Monte Carlo estimate of one conditional probability.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Binomial standard error `sqrt(mean (1 - mean) / trials)`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Detector parameters flattened to `f64` for the sampling loop.
struct SamplerView {
    cumulative_coupling: Vec<f64>,
    keep: Vec<f64>,
    dark_count: f64,
}

impl SamplerView {
    fn new<F: Real>(spec: &DetectorSpec<F>) -> Self {
        let mut acc = 0.0f64;
        let cumulative_coupling = spec
            .coupling()
            .iter()
            .map(|&c| {
                acc += c.to_f64().expect("probability fits f64");
                acc
            })
            .collect();
        let keep = spec
            .path_loss()
            .iter()
            .map(|&l| 1.0 - l.to_f64().expect("probability fits f64"))
            .collect();
        Self {
            cumulative_coupling,
            keep,
            dark_count: spec.dark_count().to_f64().expect("probability fits f64"),
        }
    }
}

fn run_shard(view: &SamplerView, n_photons: usize, trials: u64, seed: u64) -> Vec<u64> {
    let n_outputs = view.keep.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n_outputs + 1];
    let mut arrived = vec![false; n_outputs];
    for _ in 0..trials {
        arrived.iter_mut().for_each(|a| *a = false);
        for _ in 0..n_photons {
            // One routing draw and one survival draw per photon, consumed
            // even for photons that fall into the residual sink, so the
            // draw count per trial is fixed.
            let route: f64 = rng.gen();
            let survive: f64 = rng.gen();
            let output = view
                .cumulative_coupling
                .iter()
                .position(|&edge| route < edge);
            if let Some(i) = output {
                if survive < view.keep[i] {
                    arrived[i] = true;
                }
            }
        }
        let mut clicks = 0usize;
        for &hit in &arrived {
            let dark: f64 = rng.gen();
            if hit || dark < view.dark_count {
                clicks += 1;
            }
        }
        counts[clicks] += 1;
    }
    counts
}

/// Simulates `trials` detection windows with `n_photons` photons each and
/// tallies the click counts.
///
/// The run is split into shards of [`MC_SHARD_TRIALS`] windows; shard `s`
/// uses a ChaCha8 generator seeded with `splitmix64(seed ^ s * K)`. Shards
/// are embarrassingly parallel and merged by exact integer addition, so the
/// histogram is a pure function of `(spec, n_photons, trials, seed)`.
pub fn monte_carlo_histogram<F: Real>(
    spec: &DetectorSpec<F>,
    n_photons: usize,
    trials: u64,
    seed: u64,
) -> Result<McHistogram> {
    if trials == 0 {
        return Err(Error::CountOutOfRange {
            name: "trials",
            domain: "[1, ..]",
            value: 0,
        });
    }
    let view = SamplerView::new(spec);
    let shards = trials.div_ceil(MC_SHARD_TRIALS);
    let partials: Vec<Vec<u64>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let lo = s * MC_SHARD_TRIALS;
            let len = MC_SHARD_TRIALS.min(trials - lo);
            run_shard(&view, n_photons, len, shard_seed(seed, s))
        })
        .collect();
    let mut counts = vec![0u64; spec.n_outputs() + 1];
    for partial in partials {
        for (c, p) in counts.iter_mut().zip(partial) {
            *c += p;
        }
    }
    Ok(McHistogram {
        counts,
        trials,
        seed,
    })
}

/// Monte Carlo estimate of `p(m | n)` with its binomial standard error.
pub fn monte_carlo_conditional<F: Real>(
    spec: &DetectorSpec<F>,
    m_clicks: usize,
    n_photons: usize,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if m_clicks > spec.n_outputs() {
        return Err(Error::ClickCountOutOfRange {
            m: m_clicks,
            n_outputs: spec.n_outputs(),
        });
    }
    let hist = monte_carlo_histogram(spec, n_photons, trials, seed)?;
    let mean = hist.mean(m_clicks);
    let std_error = (mean * (1.0 - mean) / trials as f64).sqrt();
    Ok(McEstimate {
        mean,
        std_error,
        trials,
        seed,
    })
}

/// Knobs for [`run_validation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    /// Randomized detectors to generate.
    pub spec_count: usize,
    /// Photon numbers 0..=photon_max are checked per detector.
    pub photon_max: usize,
    /// How many of the detectors also get a Monte Carlo check.
    pub mc_spec_count: usize,
    /// Trials per Monte Carlo check.
    pub mc_trials: u64,
    /// Seed for detector generation and sampling.
    pub seed: u64,
    /// Absolute tolerance for engine vs. exhaustive-oracle agreement.
    pub tolerance: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            spec_count: 200,
            photon_max: 4,
            mc_spec_count: 20,
            mc_trials: 1_000_000,
            seed: 42,
            tolerance: 1e-12,
        }
    }
}

/// Outcome of a validation run. `failures` is empty iff everything agreed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub spec_checks: usize,
    pub entry_checks: usize,
    pub max_abs_deviation: f64,
    pub max_normalization_error: f64,
    pub mc_checks: usize,
    /// Largest observed |MC - engine| in units of the standard error.
    pub max_mc_sigma: f64,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// One-line digest for logs.
    pub fn summary(&self) -> String {
        format!(
            "{} specs, {} entries, max |engine - oracle| = {:.3e}, max |column sum - 1| = {:.3e}, {} MC checks, worst {:.2} sigma: {}",
            self.spec_checks,
            self.entry_checks,
            self.max_abs_deviation,
            self.max_normalization_error,
            self.mc_checks,
            self.max_mc_sigma,
            if self.passed() { "ok" } else { "FAILED" }
        )
    }
}

/// Draws one detector from the randomized validation family: 1 to 6
/// outputs, uniform couplings rescaled to a total routed mass of at most 1
/// (the rest becomes the residual sink), arbitrary per-output losses with
/// the exact 0 and 1 corners over-represented, and a dark count probability
/// from `{0, 1e-4, 1e-2}`.
pub fn random_spec(rng: &mut impl Rng) -> DetectorSpec<f64> {
    let n_outputs = rng.gen_range(1..=6);
    let raw: Vec<f64> = (0..n_outputs).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let routed: f64 = if rng.gen_bool(0.5) {
        1.0
    } else {
        rng.gen_range(0.2..1.0)
    };
    let coupling: Vec<f64> = raw.iter().map(|w| w / total * routed).collect();
    let residual = (1.0 - coupling.iter().sum::<f64>()).max(0.0);
    let path_loss: Vec<f64> = (0..n_outputs)
        .map(|_| match rng.gen_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..1.0),
        })
        .collect();
    let dark_count = [0.0, 1e-4, 1e-2][rng.gen_range(0..3)];
    DetectorSpec::new(coupling, residual, path_loss, dark_count)
        .expect("randomized spec satisfies the constructor invariants")
}

/// The deterministic detector family a validation run with this seed works
/// through. Exposed so test suites can iterate the same specs.
pub fn suite_specs(seed: u64, count: usize) -> Vec<DetectorSpec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_spec(&mut rng)).collect()
}

/// Checks the engine against both oracles on a randomized detector family.
///
/// Per detector and photon number `n <= photon_max`: every `p(m | n)` is
/// compared against the exhaustive enumeration at `tolerance`, and the
/// engine's click distribution must sum to 1 within `1e-10`. A subset of
/// detectors additionally gets a seeded Monte Carlo run whose estimate must
/// sit within five standard errors of the engine value.
pub fn run_validation(cfg: &ValidationConfig) -> ValidationReport {
    let specs = suite_specs(cfg.seed, cfg.spec_count);
    // Separate stream for the Monte Carlo check choices, so adding checks
    // never perturbs the generated detectors.
    let mut mc_rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed));

    let mut report = ValidationReport {
        spec_checks: 0,
        entry_checks: 0,
        max_abs_deviation: 0.0,
        max_normalization_error: 0.0,
        mc_checks: 0,
        max_mc_sigma: 0.0,
        failures: Vec::new(),
    };

    for (idx, spec) in specs.iter().enumerate() {
        report.spec_checks += 1;
        for n in 0..=cfg.photon_max {
            let engine = spec.click_count_distribution(n);
            let norm_err = (engine.iter().sum::<f64>() - 1.0).abs();
            report.max_normalization_error = report.max_normalization_error.max(norm_err);
            if norm_err > 1e-10 {
                report.failures.push(format!(
                    "spec {idx}: click distribution for n={n} sums to 1{:+.3e}",
                    engine.iter().sum::<f64>() - 1.0
                ));
            }
            for (m, &dp) in engine.iter().enumerate() {
                let oracle = match naive_conditional_probability(spec, m, n) {
                    Ok(v) => v,
                    Err(e) => {
                        report
                            .failures
                            .push(format!("spec {idx}: oracle refused m={m} n={n}: {e}"));
                        continue;
                    }
                };
                let diff = (dp - oracle).abs();
                report.entry_checks += 1;
                report.max_abs_deviation = report.max_abs_deviation.max(diff);
                if diff > cfg.tolerance {
                    report.failures.push(format!(
                        "spec {idx}: |engine - oracle| = {diff:.3e} at m={m} n={n}"
                    ));
                }
            }
        }
    }

    for (idx, spec) in specs.iter().take(cfg.mc_spec_count).enumerate() {
        let n = mc_rng.gen_range(0..=cfg.photon_max);
        let m = mc_rng.gen_range(0..=spec.n_outputs());
        let dp = spec
            .conditional_probability(m, n)
            .expect("m <= n_outputs by construction");
        let mc = monte_carlo_conditional(spec, m, n, cfg.mc_trials, shard_seed(cfg.seed, idx as u64))
            .expect("valid Monte Carlo arguments");
        report.mc_checks += 1;
        let diff = (mc.mean - dp).abs();
        // Test against the fluctuation the engine value itself predicts,
        // sqrt(p (1 - p) / trials). The plug-in error estimate would collapse
        // to zero whenever a rare outcome happens to show up in no trial.
        let sigma0 = ((dp * (1.0 - dp)).max(0.0) / cfg.mc_trials as f64).sqrt();
        if sigma0 > 0.0 {
            let sigma = diff / sigma0;
            report.max_mc_sigma = report.max_mc_sigma.max(sigma);
            if sigma > 5.0 {
                report.failures.push(format!(
                    "spec {idx}: MC estimate {:.6} vs engine {:.6} is {sigma:.1} sigma at m={m} n={n}",
                    mc.mean, dp
                ));
            }
        } else if diff != 0.0 {
            // An outcome the engine calls impossible (or certain) must be
            // reproduced exactly.
            report.failures.push(format!(
                "spec {idx}: MC estimate {:.6} vs engine {:.6} on a zero-variance outcome at m={m} n={n}",
                mc.mean, dp
            ));
        }
    }

    report
}
