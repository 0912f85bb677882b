//! Monte Carlo harness: pairwise error probabilities of fixed codeword
//! pairs and bit error rates of convolutional codes, for both decoders.
//!
//! Each grid point gets its own seed and every trial its own generator, and
//! trials are processed in fixed-size blocks whose tallies are folded in
//! block order. Results are therefore bit-identical for any worker count.
//! Both decoders see the same channel realization in every trial unless
//! pairing is switched off.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::info;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::DecoderKind;
use crate::channel::{derive_point_seed, derive_trial_rng, transmit, ChannelKind, ChannelRealization};
use crate::codebook::ConvCode;
use crate::constellation::Constellation;
use crate::decoder::{bdec_metric, sdec_metric, ViterbiDecoder};
use crate::demapper::Demapper;
use crate::{Error, Result};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "CM_DUEL_THREADS";

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Trials per block for pair simulations.
const PEP_BLOCK: u64 = 1024;
/// Largest round, in blocks; rounds double from one block up to this.
const MAX_ROUND_BLOCKS: u64 = 64;
/// Salt separating unpaired B-DEC draws from the S-DEC ones.
const UNPAIRED_SALT: u64 = 0xb1d5_7a7e_0dd5_eed5;

/// How an SNR grid value is turned into `d/σ_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrConvention {
    /// `20 log10(d/σ_z)`.
    Dsz,
    /// `10 log10(E_s/N_0)` with `σ_z² = N_0/2`.
    Esn0,
    /// `10 log10(E_b/N_0)`, `E_b = E_s N/K`.
    Ebn0,
}

impl FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dsz" => Ok(SnrConvention::Dsz),
            "esn0" => Ok(SnrConvention::Esn0),
            "ebn0" => Ok(SnrConvention::Ebn0),
            other => Err(Error::Parse(format!("unknown SNR convention '{other}'"))),
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnrConvention::Dsz => "dsz",
            SnrConvention::Esn0 => "esn0",
            SnrConvention::Ebn0 => "ebn0",
        })
    }
}

impl SnrConvention {
    /// Linear `d/σ_z` for a grid value in dB. `info_per_symbol` is `K/N`,
    /// information bits per transmitted symbol (only used for `Ebn0`).
    pub fn dsz(self, snr_db: f64, c: &Constellation, info_per_symbol: f64) -> f64 {
        let es_d2 = c.average_symbol_energy() / (c.d() * c.d());
        let lin = 10f64.powf(snr_db / 10.0);
        match self {
            SnrConvention::Dsz => 10f64.powf(snr_db / 20.0),
            SnrConvention::Esn0 => (2.0 * lin / es_d2).sqrt(),
            SnrConvention::Ebn0 => (2.0 * lin * info_per_symbol / es_d2).sqrt(),
        }
    }
}

/// Parses `start:step:stop` (inclusive) or a comma list into an ascending grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(format!("bad grid value '{t}'")))
    };
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid '{s}' must be start:step:stop")));
        }
        let (a, h, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if h <= 0.0 || b < a {
            return Err(Error::Parse(format!(
                "grid '{s}' must have a positive step and stop >= start"
            )));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(Error::Parse(format!("grid '{s}' has too many points")));
        }
        (0..=n).map(|i| a + i as f64 * h).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parse(format!(
            "grid '{s}' must be non-empty and strictly ascending"
        )));
    }
    Ok(grid)
}

/// Per-point stopping rule: stop once both decoders have `min_errors`
/// errors or `max_trials` trials have run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub min_errors: u64,
    /// Trials for pair simulations, information bits for BER simulations.
    pub max_trials: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            min_errors: 200,
            max_trials: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PepEstimator {
    /// Plain binomial counting with Wilson intervals.
    Plain,
    /// Noise mean shifted to the midpoint between the two codewords; CLT
    /// intervals on the weighted estimator.
    ImportanceSampling,
}

impl FromStr for PepEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "mc" => Ok(PepEstimator::Plain),
            "is" | "importance" | "importance_sampling" => Ok(PepEstimator::ImportanceSampling),
            other => Err(Error::Parse(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub channel: ChannelKind,
    pub grid: Vec<f64>,
    pub convention: SnrConvention,
    pub stop: StoppingRule,
    pub seed: u64,
    /// Worker count; `None` reads the environment, then uses all cores.
    pub threads: Option<usize>,
    /// Information bits per BER frame (before termination).
    pub info_bits: usize,
    pub estimator: PepEstimator,
    pub paired: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            channel: ChannelKind::Awgn,
            grid: vec![0.0],
            convention: SnrConvention::Dsz,
            stop: StoppingRule::default(),
            seed: 1,
            threads: None,
            info_bits: 1000,
            estimator: PepEstimator::Plain,
            paired: true,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("SNR grid must be non-empty and ascending".into()));
        }
        if self.stop.max_trials == 0 {
            return Err(Error::InvalidConfig("max_trials must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("thread count must be positive".into()));
        }
        Ok(())
    }
}

/// One grid point of one decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub snr_db: f64,
    pub dsz_db: f64,
    /// Trials (pairs) or frames (BER).
    pub trials: u64,
    /// Trials (pairs) or information bits (BER) behind the estimate.
    pub units: u64,
    /// Error trials (pairs) or bit errors (BER).
    pub errors: u64,
    pub frame_errors: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fewer than `min_errors` errors were seen.
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub decoder: DecoderKind,
    pub channel: ChannelKind,
    pub convention: SnrConvention,
    pub estimator: PepEstimator,
    pub points: Vec<SimPoint>,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    (lo, (center + half).min(1.0))
}

/// Worker pool honoring an explicit count, then `CM_DUEL_THREADS`.
pub fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let n =
        match threads {
            Some(n) => n,
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
                    Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))
                })?,
                Err(_) => 0,
            },
        };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Per-decoder counters, index 0 = S-DEC, 1 = B-DEC.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    trials: u64,
    units: u64,
    errors: [u64; 2],
    frame_errors: [u64; 2],
    w_sum: [f64; 2],
    w_sq: [f64; 2],
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.trials += o.trials;
        self.units += o.units;
        for d in 0..2 {
            self.errors[d] += o.errors[d];
            self.frame_errors[d] += o.frame_errors[d];
            self.w_sum[d] += o.w_sum[d];
            self.w_sq[d] += o.w_sq[d];
        }
    }
}

/// Runs trials in doubling rounds of `block`-trial blocks until the stopping
/// rule fires. `trial` fills one trial's counts given its index.
fn run_point<F>(
    pool: &rayon::ThreadPool,
    stop: &StoppingRule,
    block: u64,
    units_per_trial: u64,
    trial: F,
) -> Result<Tally>
where
    F: Fn(u64, &mut Tally) -> Result<()> + Sync,
{
    let max_trials = stop.max_trials.div_ceil(units_per_trial).max(1);
    let mut total = Tally::default();
    let mut next_block = 0u64;
    let mut round = 1u64;
    while total.trials < max_trials && total.errors.iter().any(|&e| e < stop.min_errors) {
        let remaining_blocks = (max_trials - total.trials).div_ceil(block);
        let blocks = round.min(remaining_blocks);
        let tallies: Vec<Result<Tally>> = pool.install(|| {
            (next_block..next_block + blocks)
                .into_par_iter()
                .map(|b| {
                    let mut t = Tally::default();
                    let first = b * block;
                    let last = (first + block).min(max_trials);
                    for i in first..last {
                        trial(i, &mut t)?;
                    }
                    Ok(t)
                })
                .collect()
        });
        for t in tallies {
            total.add(&t?);
        }
        next_block += blocks;
        round = (round * 2).min(MAX_ROUND_BLOCKS);
    }
    Ok(total)
}

fn make_point(snr_db: f64, dsz: f64, t: &Tally, d: usize, est: PepEstimator, stop: &StoppingRule) -> SimPoint {
    let (estimate, lo, hi) = match est {
        PepEstimator::Plain => {
            let p = t.errors[d] as f64 / t.units as f64;
            let (lo, hi) = wilson_interval(t.errors[d], t.units, Z95);
            (p, lo, hi)
        }
        PepEstimator::ImportanceSampling => {
            let n = t.trials as f64;
            let mean = t.w_sum[d] / n;
            let var = (t.w_sq[d] / n - mean * mean).max(0.0);
            let half = Z95 * (var / n).sqrt();
            (mean, (mean - half).max(0.0), mean + half)
        }
    };
    SimPoint {
        snr_db,
        dsz_db: 20.0 * dsz.log10(),
        trials: t.trials,
        units: t.units,
        errors: t.errors[d],
        frame_errors: t.frame_errors[d],
        estimate,
        ci_low: lo,
        ci_high: hi,
        censored: t.errors[d] < stop.min_errors,
    }
}

fn split_results(cfg: &SimConfig, est: PepEstimator, rows: Vec<(f64, f64, Tally)>) -> (SimResult, SimResult) {
    let mk = |d: usize, kind: DecoderKind| SimResult {
        decoder: kind,
        channel: cfg.channel,
        convention: cfg.convention,
        estimator: est,
        points: rows
            .iter()
            .map(|(snr, dsz, t)| make_point(*snr, *dsz, t, d, est, &cfg.stop))
            .collect(),
    };
    (mk(0, DecoderKind::Sdec), mk(1, DecoderKind::Bdec))
}

/// Bits of a symbol sequence, label MSB first.
fn sequence_bits(c: &Constellation, symbols: &[usize]) -> Vec<u8> {
    symbols.iter().flat_map(|&s| c.label_bits(s)).collect()
}

/// Draws one channel realization; with a noise-mean shift `mu` (scaled by
/// the gains) the importance weight is returned as well.
fn draw(
    kind: ChannelKind,
    amps: &[f64],
    sigma: f64,
    shift: Option<&[f64]>,
    rng: &mut ChaCha8Rng,
) -> Result<(ChannelRealization, f64)> {
    let mut ch = transmit(kind, amps, sigma, rng)?;
    let Some(delta) = shift else {
        return Ok((ch, 1.0));
    };
    // z' = z + μ, μ_k = h_k δ_k; weight φ(z')/φ(z' - μ)
    let mut log_w = 0.0;
    for k in 0..amps.len() {
        let mu = ch.h[k] * delta[k];
        ch.y[k] += mu;
        let z = ch.y[k] - ch.h[k] * amps[k];
        log_w += (mu * mu - 2.0 * z * mu) / (2.0 * sigma * sigma);
    }
    Ok((ch, log_w.exp()))
}

/// PEP of `xhat` against transmitted `x` for both decoders over the grid.
pub fn simulate_pep(c: &Constellation, x: &[usize], xhat: &[usize], cfg: &SimConfig) -> Result<(SimResult, SimResult)> {
    cfg.validate()?;
    if x.len() != xhat.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: xhat.len(),
        });
    }
    if let Some(&s) = x.iter().chain(xhat).find(|&&s| s >= c.order()) {
        return Err(Error::InvalidConfig(format!(
            "symbol index {s} outside the constellation"
        )));
    }
    if x == xhat {
        return Err(Error::IdenticalCodewords);
    }
    let pool = build_pool(cfg.threads)?;
    let demapper = Demapper::new(c);
    let ax = c.amplitudes(x);
    let axh = c.amplitudes(xhat);
    let bx = sequence_bits(c, x);
    let bxh = sequence_bits(c, xhat);
    let delta: Vec<f64> = ax.iter().zip(&axh).map(|(a, b)| 0.5 * (b - a)).collect();
    let shift = (cfg.estimator == PepEstimator::ImportanceSampling).then_some(delta.as_slice());
    let info_per_symbol = 1.0 / x.len() as f64;

    let mut rows = Vec::with_capacity(cfg.grid.len());
    for (idx, &snr) in cfg.grid.iter().enumerate() {
        let started = Instant::now();
        let dsz = cfg.convention.dsz(snr, c, info_per_symbol);
        let sigma = c.d() / dsz;
        let seed = derive_point_seed(cfg.seed, idx as u64);
        let tally = run_point(&pool, &cfg.stop, PEP_BLOCK, 1, |i, t| {
            let mut rng = derive_trial_rng(seed, i);
            let (ch, w) = draw(cfg.channel, &ax, sigma, shift, &mut rng)?;
            let s_err = sdec_metric(c, xhat, &ch.y, &ch.h) < sdec_metric(c, x, &ch.y, &ch.h);
            let (ch_b, w_b) = if cfg.paired {
                (ch, w)
            } else {
                let mut rng_b = derive_trial_rng(seed ^ UNPAIRED_SALT, i);
                draw(cfg.channel, &ax, sigma, shift, &mut rng_b)?
            };
            let llrs = demapper.frame_llrs(&ch_b.y, &ch_b.h, sigma);
            let b_err = bdec_metric(&bxh, &llrs) > bdec_metric(&bx, &llrs);
            t.trials += 1;
            t.units += 1;
            for (d, (err, wt)) in [(s_err, w), (b_err, w_b)].into_iter().enumerate() {
                if err {
                    t.errors[d] += 1;
                    t.frame_errors[d] += 1;
                    t.w_sum[d] += wt;
                    t.w_sq[d] += wt * wt;
                }
            }
            Ok(())
        })?;
        info!(
            "pep point {snr} dB: {} trials, errors S={} B={}, {:.2}s",
            tally.trials,
            tally.errors[0],
            tally.errors[1],
            started.elapsed().as_secs_f64()
        );
        rows.push((snr, dsz, tally));
    }
    Ok(split_results(cfg, cfg.estimator, rows))
}

/// Info-bit BER of a zero-tail terminated convolutional code for both
/// decoders (Viterbi on each) over the grid.
pub fn simulate_ber(cc: &ConvCode, c: &Constellation, cfg: &SimConfig) -> Result<(SimResult, SimResult)> {
    cfg.validate()?;
    let k = cc.k();
    if cfg.info_bits == 0 || !cfg.info_bits.is_multiple_of(k) {
        return Err(Error::InvalidConfig(format!(
            "frame of {} info bits is not a positive multiple of k = {k}",
            cfg.info_bits
        )));
    }
    let steps = cfg.info_bits / k;
    let vit = ViterbiDecoder::new(cc, c, steps, true)?;
    let pool = build_pool(cfg.threads)?;
    let demapper = Demapper::new(c);
    let info_per_symbol = cfg.info_bits as f64 / vit.num_symbols() as f64;

    let trial = |seed: u64, sigma: f64, i: u64, t: &mut Tally| -> Result<()> {
        let mut rng = derive_trial_rng(seed, i);
        let mut info_bits = vec![0u8; cfg.info_bits];
        for b in info_bits.iter_mut() {
            *b = (rng.next_u32() & 1) as u8;
        }
        let coded = cc.encode_conv(&info_bits, true)?;
        let amps = c.amplitudes(&c.modulate(&coded)?);
        let ch = transmit(cfg.channel, &amps, sigma, &mut rng)?;
        let s = vit.sdec(&ch.y, &ch.h)?;
        let ch_b = if cfg.paired {
            ch
        } else {
            let mut rng_b = derive_trial_rng(seed ^ UNPAIRED_SALT, i);
            transmit(cfg.channel, &amps, sigma, &mut rng_b)?
        };
        let llrs = demapper.frame_llrs(&ch_b.y, &ch_b.h, sigma);
        let b = vit.bdec(&llrs)?;
        t.trials += 1;
        t.units += cfg.info_bits as u64;
        for (d, dec) in [&s.info, &b.info].into_iter().enumerate() {
            let errs = dec.iter().zip(&info_bits).filter(|(a, b)| a != b).count() as u64;
            t.errors[d] += errs;
            t.frame_errors[d] += u64::from(errs > 0);
        }
        Ok(())
    };

    let mut rows = Vec::with_capacity(cfg.grid.len());
    for (idx, &snr) in cfg.grid.iter().enumerate() {
        let started = Instant::now();
        let dsz = cfg.convention.dsz(snr, c, info_per_symbol);
        let sigma = c.d() / dsz;
        let seed = derive_point_seed(cfg.seed, idx as u64);
        let tally = run_point(&pool, &cfg.stop, 1, cfg.info_bits as u64, |i, t| {
            trial(seed, sigma, i, t)
        })?;
        info!(
            "ber point {snr} dB: {} frames, bit errors S={} B={}, {:.2}s",
            tally.trials,
            tally.errors[0],
            tally.errors[1],
            started.elapsed().as_secs_f64()
        );
        rows.push((snr, dsz, tally));
    }
    Ok(split_results(cfg, PepEstimator::Plain, rows))
}

/// Pointwise `B-DEC / S-DEC` ratio with a log-normal 95% interval built from
/// the two per-decoder intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub snr_db: f64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn ber_ratio(bdec: &SimResult, sdec: &SimResult) -> Result<Vec<RatioPoint>> {
    if bdec.points.len() != sdec.points.len() || bdec.points.iter().zip(&sdec.points).any(|(b, s)| b.snr_db != s.snr_db)
    {
        return Err(Error::GridMismatch);
    }
    Ok(bdec
        .points
        .iter()
        .zip(&sdec.points)
        .map(|(b, s)| {
            if b.estimate == s.estimate {
                return RatioPoint {
                    snr_db: b.snr_db,
                    ratio: 1.0,
                    ci_low: 1.0,
                    ci_high: 1.0,
                };
            }
            let ratio = b.estimate / s.estimate;
            let rel = |p: &SimPoint| (p.ci_high - p.ci_low) / (2.0 * Z95 * p.estimate);
            let spread = Z95 * (rel(b).powi(2) + rel(s).powi(2)).sqrt();
            RatioPoint {
                snr_db: b.snr_db,
                ratio,
                ci_low: ratio * (-spread).exp(),
                ci_high: ratio * spread.exp(),
            }
        })
        .collect())
}

/// SNR at which a BER curve crosses `target`, by linear interpolation of
/// `log10 BER` between the bracketing grid points.
pub fn crossing_snr(result: &SimResult, target: f64) -> Option<f64> {
    result.points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.estimate >= target && b.estimate <= target && b.estimate > 0.0 && a.estimate > b.estimate {
            let (la, lb, lt) = (a.estimate.log10(), b.estimate.log10(), target.log10());
            Some(a.snr_db + (b.snr_db - a.snr_db) * (la - lt) / (la - lb))
        } else {
            None
        }
    })
}

/// Draws a random info vector; exposed for tests of the harness.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u8> {
    (0..n).map(|_| (rng.next_u32() & 1) as u8).collect()
}
