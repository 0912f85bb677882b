//! AWGN and i.i.d. Rayleigh flat-fading channels.
//!
//! Randomness is always passed in explicitly. Monte Carlo code obtains one
//! generator per trial from [`derive_trial_rng`], which keeps results
//! independent of how trials are spread over worker threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Channel model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            other => Err(Error::Parse(format!("unknown channel '{other}'"))),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Rayleigh => "rayleigh",
        })
    }
}

/// Received samples `y[k] = h[k] x[k] + z[k]` with the gains known at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub y: Vec<f64>,
    pub h: Vec<f64>,
    pub sigma: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidNoise(sigma))
    }
}

/// `y = x + z`, `z ~ N(0, σ²)` i.i.d.
pub fn awgn_transmit<R: Rng + ?Sized>(x: &[f64], sigma: f64, rng: &mut R) -> Result<ChannelRealization> {
    check_sigma(sigma)?;
    let y = x
        .iter()
        .map(|&xk| xk + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(ChannelRealization {
        y,
        h: vec![1.0; x.len()],
        sigma,
    })
}

/// Draws a Rayleigh gain with `E[H²] = 1`.
pub fn rayleigh_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e.sqrt()
}

/// `y[k] = h[k] x[k] + z[k]` with i.i.d. unit-power Rayleigh `h[k]`.
pub fn rayleigh_transmit<R: Rng + ?Sized>(x: &[f64], sigma: f64, rng: &mut R) -> Result<ChannelRealization> {
    check_sigma(sigma)?;
    let mut y = Vec::with_capacity(x.len());
    let mut h = Vec::with_capacity(x.len());
    for &xk in x {
        let hk = rayleigh_gain(rng);
        let z: f64 = rng.sample(StandardNormal);
        h.push(hk);
        y.push(hk * xk + sigma * z);
    }
    Ok(ChannelRealization { y, h, sigma })
}

/// Dispatches on the channel kind.
pub fn transmit<R: Rng + ?Sized>(kind: ChannelKind, x: &[f64], sigma: f64, rng: &mut R) -> Result<ChannelRealization> {
    match kind {
        ChannelKind::Awgn => awgn_transmit(x, sigma, rng),
        ChannelKind::Rayleigh => rayleigh_transmit(x, sigma, rng),
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for grid point `index` of a run with `master_seed`.
pub fn derive_point_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Independent, reproducible generator for one trial.
///
/// The seed selects the ChaCha key and the trial index the stream, so every
/// `(seed, trial)` pair gets its own 2^64-block sequence.
pub fn derive_trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}
