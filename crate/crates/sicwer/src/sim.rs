//! Reproducible Monte-Carlo experiments.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, trial
//! index)` through a SplitMix64 expansion, and draws in a fixed order
//! (matrix, truth, noise). Error counts are merged by addition, so results
//! are bit-identical for any worker count and any trial scheduling.
//!
//! Gaussian variates come from the Marsaglia polar method (two uniforms per
//! accepted pair, rejection on the unit disk); the method is fixed here
//! because bit-level reproducibility is part of the contract.

use crate::decoder::{
    bsic_decode, osic_decode, BoxConstraint, HouseholderQr, IntegerPoint, Matrix, ReducedModel,
};
use crate::error::{Error, Result};
use crate::special::ScalarSuccessInputs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Stream index reserved for the shared matrix in amortized mode.
const MATRIX_STREAM: u64 = u64::MAX;
/// Stream index reserved for drawing a default fixed truth vector.
const TRUTH_STREAM: u64 = u64::MAX - 1;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent ChaCha8 stream for `(seed, index)`. Distinct indices under
/// the same seed give distinct keys.
pub fn substream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// One SplitMix64 step over `(seed, tag)`, for deriving sub-seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut state = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    splitmix64(&mut state)
}

/// Fills `out` with i.i.d. standard normal variates via the polar method.
pub fn fill_standard_normal<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let mut i = 0;
    while i < out.len() {
        let (a, b) = normal_pair(rng);
        out[i] = a;
        i += 1;
        if i < out.len() {
            out[i] = b;
            i += 1;
        }
    }
}

/// One standard normal variate (the pair's second element is discarded).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    normal_pair(rng).0
}

fn normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// How the true integer vector is produced per trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruthMode {
    /// The same vector in every trial.
    Fixed(Vec<i64>),
    /// A fresh uniform draw from the box in every trial.
    UniformBox(BoxConstraint),
}

/// Which decoder a trial runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecoderChoice {
    Osic,
    Bsic(BoxConstraint),
}

/// Full description of a word-error-rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub m: usize,
    pub n: usize,
    pub sigma: f64,
    pub trials: u64,
    pub seed: u64,
    pub truth_mode: TruthMode,
    pub decoder: DecoderChoice,
    /// Draw one channel matrix and reuse it across trials instead of
    /// regenerating per trial. This deviates from the fresh-matrix protocol
    /// the closed forms assume; it exists for performance experiments only.
    pub reuse_matrix: bool,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < self.n {
            return Err(Error::Dimension(format!(
                "experiment requires m >= n >= 1, got m={}, n={}",
                self.m, self.n
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Domain(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.trials >= TRUTH_STREAM {
            return Err(Error::Config("trial count exhausts the stream space".into()));
        }
        match &self.truth_mode {
            TruthMode::Fixed(x) => {
                if x.len() != self.n {
                    return Err(Error::Config(format!(
                        "fixed truth length {} does not match n = {}",
                        x.len(),
                        self.n
                    )));
                }
            }
            TruthMode::UniformBox(b) => {
                if b.len() != self.n {
                    return Err(Error::Config(format!(
                        "truth box length {} does not match n = {}",
                        b.len(),
                        self.n
                    )));
                }
            }
        }
        if let DecoderChoice::Bsic(decode_box) = &self.decoder {
            if decode_box.len() != self.n {
                return Err(Error::Config(format!(
                    "decoder box length {} does not match n = {}",
                    decode_box.len(),
                    self.n
                )));
            }
            match &self.truth_mode {
                TruthMode::Fixed(x) => {
                    let point = IntegerPoint::new(x.clone());
                    if !decode_box.contains(&point) {
                        return Err(Error::Config(
                            "fixed truth lies outside the BSIC decoding box".into(),
                        ));
                    }
                }
                TruthMode::UniformBox(truth_box) => {
                    if truth_box != decode_box {
                        return Err(Error::Config(
                            "BSIC requires the truth box to equal the decoding box".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Binomial word-error-rate estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub wer: f64,
    pub std_error: f64,
}

impl WerEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        let wer = errors as f64 / trials as f64;
        Self {
            errors,
            trials,
            wer,
            std_error: (wer * (1.0 - wer) / trials as f64).sqrt(),
        }
    }
}

/// Binomial success-proportion estimate from the scalar experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub successes: u64,
    pub trials: u64,
    pub proportion: f64,
    pub std_error: f64,
}

impl SuccessEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let proportion = successes as f64 / trials as f64;
        Self {
            successes,
            trials,
            proportion,
            std_error: (proportion * (1.0 - proportion) / trials as f64).sqrt(),
        }
    }
}

/// Default fixed truth for OSIC experiments: entries uniform in
/// [−100, 100], drawn once from the experiment seed.
pub fn random_fixed_truth(seed: u64, n: usize) -> Vec<i64> {
    let mut rng = substream_rng(seed, TRUTH_STREAM);
    (0..n).map(|_| rng.gen_range(-100i64..=100)).collect()
}

/// Runs the word-error-rate experiment described by `config` on `workers`
/// threads (0 = library default). The result does not depend on `workers`.
pub fn run_wer_experiment(config: &TrialConfig, workers: usize) -> Result<WerEstimate> {
    config.validate()?;
    let errors = if workers == 0 {
        count_word_errors(config)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("failed to build worker pool: {e}")))?;
        pool.install(|| count_word_errors(config))
    };
    Ok(WerEstimate::from_counts(errors, config.trials))
}

fn count_word_errors(config: &TrialConfig) -> u64 {
    let shared_matrix = if config.reuse_matrix {
        let mut rng = substream_rng(config.seed, MATRIX_STREAM);
        Some(Matrix::standard_gaussian(config.m, config.n, &mut rng))
    } else {
        None
    };
    (0..config.trials)
        .into_par_iter()
        .map(|trial| run_single_trial(config, shared_matrix.as_ref(), trial) as u64)
        .sum()
}

/// Returns true when the decoded word differs from the truth. Decoder
/// degeneracy (probability ~0 for Gaussian draws) counts as a word error.
fn run_single_trial(config: &TrialConfig, shared_matrix: Option<&Matrix>, trial: u64) -> bool {
    let mut rng = substream_rng(config.seed, trial);
    let a = match shared_matrix {
        Some(m) => m.clone(),
        None => Matrix::standard_gaussian(config.m, config.n, &mut rng),
    };
    let truth: Vec<i64> = match &config.truth_mode {
        TruthMode::Fixed(x) => x.clone(),
        TruthMode::UniformBox(b) => (0..config.n)
            .map(|i| rng.gen_range(b.lower()[i]..=b.upper()[i]))
            .collect(),
    };
    let truth_f: Vec<f64> = truth.iter().map(|&v| v as f64).collect();

    let mut noise = vec![0.0; config.m];
    fill_standard_normal(&mut rng, &mut noise);
    let signal = a.mul_vec(&truth_f).expect("dimensions validated");
    let y: Vec<f64> = signal
        .iter()
        .zip(&noise)
        .map(|(s, z)| s + config.sigma * z)
        .collect();

    let reduced = match HouseholderQr::factor(&a) {
        Ok(qr) => {
            let y_bar = qr.apply_qt(&y).expect("dimensions validated");
            ReducedModel {
                r: qr.into_r(),
                y_bar,
                sigma: config.sigma,
            }
        }
        Err(err) => {
            log::warn!("trial {trial}: degenerate factorization counted as word error: {err}");
            return true;
        }
    };

    let decoded = match &config.decoder {
        DecoderChoice::Osic => osic_decode(&reduced),
        DecoderChoice::Bsic(bounds) => {
            let out = bsic_decode(&reduced, bounds);
            if let Ok(point) = &out {
                debug_assert!(bounds.contains(point), "BSIC output escaped the box");
            }
            out
        }
    };
    match decoded {
        Ok(point) => point.coords != truth,
        Err(err) => {
            log::warn!("trial {trial}: decoder failure counted as word error: {err}");
            true
        }
    }
}

/// Empirical success proportion of the scalar rounding model: gain
/// `r = √(χ²_k)`, noise `N(0, σ²)`, truth fixed (no box) or uniform on
/// `[0, η]` with the clamped estimator.
pub fn simulate_scalar_success(
    inputs: &ScalarSuccessInputs,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate> {
    inputs.validate()?;
    if trials < 1 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let eta_bound = match inputs.eta {
        Some(eta) => Some(i64::try_from(eta).map_err(|_| {
            Error::Domain(format!("box width {eta} exceeds the i64 coordinate range"))
        })?),
        None => None,
    };
    let fixed_truth = {
        let mut rng = substream_rng(seed, TRUTH_STREAM);
        rng.gen_range(-100i64..=100)
    };

    let mut squares = vec![0.0; inputs.k];
    let mut successes = 0u64;
    for trial in 0..trials {
        let mut rng = substream_rng(seed, trial);
        fill_standard_normal(&mut rng, &mut squares);
        let r = squares.iter().map(|z| z * z).sum::<f64>().sqrt();
        let truth = match eta_bound {
            None => fixed_truth,
            Some(eta) => rng.gen_range(0..=eta),
        };
        let noise = inputs.sigma * standard_normal(&mut rng);
        if r == 0.0 {
            continue; // gain collapsed; counts as failure
        }
        let c = (r * truth as f64 + noise) / r;
        let estimate = match crate::decoder::round_half_down(c) {
            Ok(rounded) => match eta_bound {
                None => rounded,
                Some(eta) => rounded.clamp(0, eta),
            },
            Err(_) => continue,
        };
        if estimate == truth {
            successes += 1;
        }
    }
    Ok(SuccessEstimate::from_counts(successes, trials))
}

/// Sample mean and variance of one tracked statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexStats {
    pub mean: f64,
    pub variance: f64,
}

/// Empirical moments of the R-factor entries over repeated factorizations
/// of i.i.d. Gaussian matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RFactorStats {
    /// Per-index stats of `r_ii²` (expected `χ²_{m−i+1}` moments).
    pub diag_square: Vec<IndexStats>,
    /// Stats of the off-diagonal entry `r_12` when `n ≥ 2`
    /// (expected standard normal moments).
    pub offdiag_r12: Option<IndexStats>,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn stats(&self) -> IndexStats {
        IndexStats {
            mean: self.mean,
            variance: self.m2 / (self.count.saturating_sub(1)) as f64,
        }
    }
}

/// Factorizes `samples` i.i.d. Gaussian `m×n` matrices with the
/// positive-diagonal convention and reports per-index moments of `r_ii²`,
/// plus `r_12` when available.
pub fn diag_chi_square_stats(
    m: usize,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<RFactorStats> {
    if n < 1 || m < n {
        return Err(Error::Dimension(format!(
            "requires m >= n >= 1, got m={m}, n={n}"
        )));
    }
    if samples < 100 {
        return Err(Error::Config(format!(
            "at least 100 samples required, got {samples}"
        )));
    }
    let mut diag = vec![Welford::default(); n];
    let mut offdiag = Welford::default();
    for sample in 0..samples {
        let mut rng = substream_rng(seed, sample);
        let a = Matrix::standard_gaussian(m, n, &mut rng);
        let qr = HouseholderQr::factor(&a)?;
        let r = qr.r_matrix();
        for (i, acc) in diag.iter_mut().enumerate() {
            let d = r.at(i, i);
            acc.push(d * d);
        }
        if n >= 2 {
            offdiag.push(r.at(0, 1));
        }
    }
    Ok(RFactorStats {
        diag_square: diag.iter().map(Welford::stats).collect(),
        offdiag_r12: (n >= 2).then(|| offdiag.stats()),
        samples,
    })
}
