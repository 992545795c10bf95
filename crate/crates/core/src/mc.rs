//! Monte Carlo photon counting over a pixel's mode budget.
//!
//! Each mode is sampled independently from the single-mode count law of the
//! chosen state: geometric (thermal / Bose–Einstein), Poisson (coherent), or
//! a fixed number (Fock). Trials are split into fixed-size chunks, each with
//! its own ChaCha stream derived from `(seed, chunk index)`. Per-chunk power
//! sums are exact integers, so the merged result does not depend on how
//! many worker threads ran the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, Error, Result};

/// Trials per independent random stream.
pub const CHUNK_TRIALS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhotonDistribution {
    Thermal { n_bar: f64 },
    Coherent { mean: f64 },
    Fock { n: u64 },
}

impl PhotonDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhotonDistribution::Thermal { n_bar } => ensure_non_negative("n_bar", n_bar),
            PhotonDistribution::Coherent { mean } => ensure_non_negative("mean", mean),
            PhotonDistribution::Fock { .. } => Ok(()),
        }
    }

    /// Single-mode (mean, variance).
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            PhotonDistribution::Thermal { n_bar } => (n_bar, n_bar * (1.0 + n_bar)),
            PhotonDistribution::Coherent { mean } => (mean, mean),
            PhotonDistribution::Fock { n } => (n as f64, 0.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhotonDistribution::Thermal { .. } => "thermal",
            PhotonDistribution::Coherent { .. } => "coherent",
            PhotonDistribution::Fock { .. } => "fock",
        }
    }

    /// Exact single-mode probability P(n).
    pub fn pmf(&self, n: u64) -> f64 {
        match *self {
            PhotonDistribution::Thermal { n_bar } => {
                if n_bar == 0.0 {
                    return if n == 0 { 1.0 } else { 0.0 };
                }
                let q = n_bar / (1.0 + n_bar);
                q.powf(n as f64) / (1.0 + n_bar)
            }
            PhotonDistribution::Coherent { mean } => {
                if mean == 0.0 {
                    return if n == 0 { 1.0 } else { 0.0 };
                }
                let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
                (n as f64 * mean.ln() - mean - ln_fact).exp()
            }
            PhotonDistribution::Fock { n: k } => {
                if n == k {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Pre-computed sampler for one distribution.
#[derive(Debug, Clone)]
pub struct ModeSampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Constant(u64),
    /// Geometric law with P(N ≥ n) = qⁿ; stores ln q.
    Geometric { ln_q: f64 },
    Poisson(Poisson<f64>),
}

impl ModeSampler {
    pub fn new(distribution: &PhotonDistribution) -> Result<Self> {
        distribution.validate()?;
        let kind = match *distribution {
            PhotonDistribution::Thermal { n_bar } if n_bar == 0.0 => SamplerKind::Constant(0),
            PhotonDistribution::Thermal { n_bar } => SamplerKind::Geometric {
                // ln(n̄ / (1 + n̄)) without cancellation for small n̄
                ln_q: -(1.0 / n_bar).ln_1p(),
            },
            PhotonDistribution::Coherent { mean } if mean == 0.0 => SamplerKind::Constant(0),
            PhotonDistribution::Coherent { mean } => SamplerKind::Poisson(
                Poisson::new(mean)
                    .map_err(|e| Error::validation("mean", e.to_string()))?,
            ),
            PhotonDistribution::Fock { n } => SamplerKind::Constant(n),
        };
        Ok(Self { kind })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.kind {
            SamplerKind::Constant(n) => *n,
            SamplerKind::Geometric { ln_q } => {
                // inverse CDF with u in (0, 1]
                let u = 1.0 - rng.random::<f64>();
                (u.ln() / ln_q).floor() as u64
            }
            SamplerKind::Poisson(p) => p.sample(rng) as u64,
        }
    }
}

/// Draws one photon count for a single mode.
pub fn sample_mode_occupation<R: Rng + ?Sized>(
    distribution: &PhotonDistribution,
    rng: &mut R,
) -> Result<u64> {
    Ok(ModeSampler::new(distribution)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub distribution: PhotonDistribution,
    pub n_modes: u64,
    pub trials: u64,
    pub seed: u64,
}

impl SamplingSpec {
    pub fn new(distribution: PhotonDistribution, n_modes: u64, trials: u64, seed: u64) -> Result<Self> {
        distribution.validate()?;
        if n_modes == 0 {
            return Err(Error::validation("n_modes", "must be >= 1"));
        }
        if trials == 0 {
            return Err(Error::validation("trials", "must be >= 1"));
        }
        Ok(Self {
            distribution,
            n_modes,
            trials,
            seed,
        })
    }

    /// The stream used for chunk `index`.
    pub fn chunk_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: u64,
    pub n_modes: u64,
    pub empirical_mean: f64,
    /// Unbiased sample variance.
    pub empirical_variance: f64,
    /// mean / sqrt(variance); `None` when the variance is zero.
    pub empirical_snr: Option<f64>,
    pub theory_mean: f64,
    pub theory_variance: f64,
    pub standard_error_mean: f64,
    pub standard_error_variance: f64,
    /// Delta-method standard error of the Fano factor, when defined.
    pub standard_error_fano: Option<f64>,
    /// Delta-method standard error of the SNR, when defined.
    pub standard_error_snr: Option<f64>,
}

impl TrialSummary {
    /// Variance-to-mean ratio; `None` for a zero mean.
    pub fn empirical_fano(&self) -> Option<f64> {
        (self.empirical_mean > 0.0).then(|| self.empirical_variance / self.empirical_mean)
    }

    pub fn theory_snr(&self) -> Option<f64> {
        (self.theory_variance > 0.0).then(|| self.theory_mean / self.theory_variance.sqrt())
    }
}

/// Exact integer power sums of per-trial totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct PowerSums {
    n: u64,
    s1: u128,
    s2: u128,
    s3: u128,
    s4: u128,
}

impl PowerSums {
    fn push(&mut self, x: u64) -> Result<()> {
        let x = u128::from(x);
        let x2 = x.checked_mul(x).ok_or(Error::Saturation)?;
        let x3 = x2.checked_mul(x).ok_or(Error::Saturation)?;
        let x4 = x3.checked_mul(x).ok_or(Error::Saturation)?;
        self.n += 1;
        self.s1 = self.s1.checked_add(x).ok_or(Error::Saturation)?;
        self.s2 = self.s2.checked_add(x2).ok_or(Error::Saturation)?;
        self.s3 = self.s3.checked_add(x3).ok_or(Error::Saturation)?;
        self.s4 = self.s4.checked_add(x4).ok_or(Error::Saturation)?;
        Ok(())
    }

    fn merge(self, other: Self) -> Result<Self> {
        Ok(Self {
            n: self.n + other.n,
            s1: self.s1.checked_add(other.s1).ok_or(Error::Saturation)?,
            s2: self.s2.checked_add(other.s2).ok_or(Error::Saturation)?,
            s3: self.s3.checked_add(other.s3).ok_or(Error::Saturation)?,
            s4: self.s4.checked_add(other.s4).ok_or(Error::Saturation)?,
        })
    }
}

fn run_chunk(spec: &SamplingSpec, sampler: &ModeSampler, index: u64) -> Result<PowerSums> {
    let mut rng = spec.chunk_rng(index);
    let start = index * CHUNK_TRIALS;
    let count = CHUNK_TRIALS.min(spec.trials - start);
    let mut sums = PowerSums::default();
    for _ in 0..count {
        let mut total: u64 = 0;
        for _ in 0..spec.n_modes {
            total = total
                .checked_add(sampler.sample(&mut rng))
                .ok_or(Error::Saturation)?;
        }
        sums.push(total)?;
    }
    Ok(sums)
}

/// Runs `spec.trials` pixel exposures on the global thread pool.
pub fn simulate_pixel(spec: &SamplingSpec) -> Result<TrialSummary> {
    let sampler = ModeSampler::new(&spec.distribution)?;
    let chunks = spec.trials.div_ceil(CHUNK_TRIALS);
    let partials: Vec<Result<PowerSums>> = (0..chunks)
        .into_par_iter()
        .map(|i| run_chunk(spec, &sampler, i))
        .collect();
    let mut total = PowerSums::default();
    for p in partials {
        total = total.merge(p?)?;
    }
    Ok(summarize(spec, &total))
}

/// As [`simulate_pixel`], on a dedicated pool of `workers` threads.
pub fn simulate_pixel_with_workers(spec: &SamplingSpec, workers: usize) -> Result<TrialSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot build worker pool: {e}")))?;
    pool.install(|| simulate_pixel(spec))
}

fn summarize(spec: &SamplingSpec, sums: &PowerSums) -> TrialSummary {
    let n = sums.n as f64;
    let mean = sums.s1 as f64 / n;
    // n·s2 − s1² is exact in integers; it is n²·(biased variance)
    let centred = (sums.n as u128)
        .checked_mul(sums.s2)
        .and_then(|a| sums.s1.checked_mul(sums.s1).map(|b| a - b));
    let biased_var = match centred {
        Some(c) => c as f64 / (n * n),
        None => (sums.s2 as f64 / n - mean * mean).max(0.0),
    };
    let variance = if sums.n > 1 {
        biased_var * n / (n - 1.0)
    } else {
        0.0
    };

    let r2 = sums.s2 as f64 / n;
    let r3 = sums.s3 as f64 / n;
    let r4 = sums.s4 as f64 / n;
    let mu3 = r3 - 3.0 * mean * r2 + 2.0 * mean.powi(3);
    let mu4 = (r4 - 4.0 * mean * r3 + 6.0 * mean * mean * r2 - 3.0 * mean.powi(4)).max(0.0);

    let var_of_mean = variance / n;
    let var_of_variance = if sums.n > 3 {
        ((mu4 - variance * variance * (n - 3.0) / (n - 1.0)) / n).max(0.0)
    } else {
        0.0
    };
    let cov_mean_var = mu3 / n;

    let empirical_snr = (variance > 0.0).then(|| mean / variance.sqrt());
    let standard_error_snr = (variance > 0.0).then(|| {
        let dm = 1.0 / variance.sqrt();
        let dv = -mean / (2.0 * variance.powf(1.5));
        (dm * dm * var_of_mean + dv * dv * var_of_variance + 2.0 * dm * dv * cov_mean_var)
            .max(0.0)
            .sqrt()
    });
    let standard_error_fano = (mean > 0.0).then(|| {
        let dv = 1.0 / mean;
        let dm = -variance / (mean * mean);
        (dv * dv * var_of_variance + dm * dm * var_of_mean + 2.0 * dm * dv * cov_mean_var)
            .max(0.0)
            .sqrt()
    });

    let (m1, v1) = spec.distribution.moments();
    let modes = spec.n_modes as f64;
    TrialSummary {
        trials: sums.n,
        n_modes: spec.n_modes,
        empirical_mean: mean,
        empirical_variance: variance,
        empirical_snr,
        theory_mean: modes * m1,
        theory_variance: modes * v1,
        standard_error_mean: var_of_mean.sqrt(),
        standard_error_variance: var_of_variance.sqrt(),
        standard_error_fano,
        standard_error_snr,
    }
}

/// Empirical Fano factor minus one; zero for exact shot noise.
pub fn shot_limit_gap(summary: &TrialSummary) -> Result<f64> {
    if !(summary.theory_mean > 0.0) || !(summary.empirical_mean > 0.0) {
        return Err(Error::UndefinedGap);
    }
    Ok(summary.empirical_variance / summary.empirical_mean - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(sample_mode_occupation(&PhotonDistribution::Fock { n: 3 }, &mut rng).unwrap(), 3);
        }
    }

    #[test]
    fn thermal_vacuum_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = ModeSampler::new(&PhotonDistribution::Thermal { n_bar: 0.0 }).unwrap();
        assert!((0..1000).all(|_| s.sample(&mut rng) == 0));
        let c = ModeSampler::new(&PhotonDistribution::Coherent { mean: 0.0 }).unwrap();
        assert!((0..1000).all(|_| c.sample(&mut rng) == 0));
    }

    #[test]
    fn rejects_negative_parameters() {
        assert!(ModeSampler::new(&PhotonDistribution::Thermal { n_bar: -0.1 }).is_err());
        assert!(ModeSampler::new(&PhotonDistribution::Coherent { mean: f64::NAN }).is_err());
        assert!(SamplingSpec::new(PhotonDistribution::Fock { n: 1 }, 0, 10, 0).is_err());
        assert!(SamplingSpec::new(PhotonDistribution::Fock { n: 1 }, 1, 0, 0).is_err());
    }

    #[test]
    fn fock_pixel_is_exact() {
        let spec = SamplingSpec::new(PhotonDistribution::Fock { n: 2 }, 3, 1000, 1).unwrap();
        let s = simulate_pixel(&spec).unwrap();
        assert_eq!(s.empirical_mean, 6.0);
        assert_eq!(s.empirical_variance, 0.0);
        assert_eq!(s.theory_mean, 6.0);
        assert_eq!(s.theory_variance, 0.0);
        assert_eq!(s.empirical_snr, None);
        assert_eq!(shot_limit_gap(&s).unwrap(), -1.0);
    }

    #[test]
    fn gap_undefined_for_vacuum() {
        let spec = SamplingSpec::new(PhotonDistribution::Thermal { n_bar: 0.0 }, 3, 100, 1).unwrap();
        let s = simulate_pixel(&spec).unwrap();
        assert!(matches!(shot_limit_gap(&s), Err(Error::UndefinedGap)));
    }

    #[test]
    fn single_trial_has_zero_variance() {
        let spec = SamplingSpec::new(PhotonDistribution::Coherent { mean: 5.0 }, 1, 1, 3).unwrap();
        let s = simulate_pixel(&spec).unwrap();
        assert_eq!(s.trials, 1);
        assert_eq!(s.empirical_variance, 0.0);
    }

    #[test]
    fn saturation_is_reported() {
        let spec = SamplingSpec::new(PhotonDistribution::Fock { n: u64::MAX / 2 + 1 }, 2, 1, 0).unwrap();
        assert!(matches!(simulate_pixel(&spec), Err(Error::Saturation)));
    }

    #[test]
    fn pmf_sums_to_one() {
        for d in [
            PhotonDistribution::Thermal { n_bar: 0.7 },
            PhotonDistribution::Coherent { mean: 3.0 },
        ] {
            let total: f64 = (0..200).map(|n| d.pmf(n)).sum();
            assert!((total - 1.0).abs() < 1e-12, "{d:?}");
        }
    }
}
