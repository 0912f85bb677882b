//! Seeded random searches for the largest pairwise loss, with and without
//! fading gains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fading_profile, loss_db, pairwise_loss, weight_profile, WeightProfile, MAX_LOSS_DB};
use crate::channel::rayleigh_gain;
use crate::constellation::{Constellation, Labeling};
use crate::Result;

/// Slack allowed above [`MAX_LOSS_DB`] before a sample counts as a violation.
pub const BOUND_SLACK_DB: f64 = 1e-9;

/// Outcome of a random loss search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSearch {
    pub samples: u64,
    pub max_loss_db: f64,
    /// `(β, corner weight)` of the sample attaining the maximum; the corner
    /// weight is `α = Σ h²` over corner positions when fading.
    pub argmax: (f64, f64),
    /// Samples whose loss exceeds the bound by more than [`BOUND_SLACK_DB`].
    pub above_bound: u64,
}

impl BoundSearch {
    fn new() -> Self {
        BoundSearch {
            samples: 0,
            max_loss_db: f64::NEG_INFINITY,
            argmax: (0.0, 0.0),
            above_bound: 0,
        }
    }

    fn push(&mut self, beta: f64, corners: f64, loss: f64) {
        self.samples += 1;
        if loss > MAX_LOSS_DB + BOUND_SLACK_DB {
            self.above_bound += 1;
        }
        if loss > self.max_loss_db {
            self.max_loss_db = loss;
            self.argmax = (beta, corners);
        }
    }

    pub fn within_bound(&self) -> bool {
        self.above_bound == 0
    }

    /// The maximizer sits on the ridge `β = 4 α` (relative tolerance `tol`).
    pub fn argmax_on_ridge(&self, tol: f64) -> bool {
        let (b, a) = self.argmax;
        (b - 4.0 * a).abs() <= tol * b.max(1.0)
    }
}

fn random_symbols(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..4)).collect()
}

/// Draws `profiles` weight profiles (`w01, w10 ≤ 16`, `w11 ≤ 8`) and
/// `pairs` random codeword pairs of length `1..=32` under the four Gray
/// labelings.
pub fn random_loss_search(profiles: u64, pairs: u64, seed: u64) -> Result<BoundSearch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BoundSearch::new();
    while out.samples < profiles {
        let w01 = rng.random_range(0..=16u32);
        let w10 = rng.random_range(0..=16u32);
        let w11 = rng.random_range(0..=8u32);
        let wc = rng.random_range(0..=w01 + w10);
        let p = WeightProfile::new(w01, w10, w11, wc)?;
        if !p.is_zero() {
            out.push(p.beta_int() as f64, wc as f64, pairwise_loss(&p)?);
        }
    }
    let gray: Vec<Constellation> = Labeling::GRAY_4PAM
        .iter()
        .map(|&l| Constellation::make_pam(2, l, 1.0))
        .collect::<Result<_>>()?;
    while out.samples < profiles + pairs {
        let c = &gray[rng.random_range(0..4)];
        let n = rng.random_range(1..=32);
        let (x, xhat) = (random_symbols(&mut rng, n), random_symbols(&mut rng, n));
        let p = weight_profile(c, &x, &xhat)?;
        if !p.is_zero() {
            out.push(p.beta_int() as f64, p.wc as f64, pairwise_loss(&p)?);
        }
    }
    Ok(out)
}

/// Draws `draws` random pairs (length `1..=16`, random Gray labeling) with
/// i.i.d. Rayleigh gains and records the faded loss.
pub fn random_fading_search(draws: u64, seed: u64) -> Result<BoundSearch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BoundSearch::new();
    while out.samples < draws {
        let c = Constellation::make_pam(2, Labeling::GRAY_4PAM[rng.random_range(0..4)], 1.0)?;
        let n = rng.random_range(1..=16);
        let (x, xhat) = (random_symbols(&mut rng, n), random_symbols(&mut rng, n));
        let h: Vec<f64> = (0..n).map(|_| rayleigh_gain(&mut rng)).collect();
        let p = fading_profile(&c, &x, &xhat)?;
        if p.counts().is_zero() {
            continue;
        }
        let (b, a) = p.weighted(&h);
        out.push(b, a, loss_db(b, a));
    }
    Ok(out)
}

/// Gains that put `[s1,s2]` vs `[s4,s1]` under G3 on the ridge `β = 4α`:
/// one corner at gain 1 and one single-bit position at gain `√3`.
pub fn fading_ridge_example() -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    (vec![0, 1], vec![3, 0], vec![1.0, 3f64.sqrt()])
}
