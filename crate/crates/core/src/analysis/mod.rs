//! Symbol metric difference statistics, normalized distances, pairwise
//! error probabilities and asymptotic loss for 4-PAM Gray labelings.
//!
//! A weight profile counts, for a codeword pair `(x, x̂)`, the positions whose
//! label XOR is `[0,1]`, `[1,0]` or `[1,1]`, plus the corner positions
//! `{x[k], x̂[k]} = {s1, s4}`. Corners also sit in their single-bit class
//! (`[1,0]` for G1/G3, `[0,1]` for G2/G4) at nominal weight 1, and
//! `β = w01 + w10 + 4 w11`. The normalized distances are then
//! `a^S = √(β + 8 w_c)` and `a^B = (β + 2 w_c)/√β`.

mod exact;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::decoder::smd_sdec;
use crate::demapper::Demapper;
use crate::special::{ln_q, q};
use crate::{Error, Result};

pub use exact::{exact_pep_bdec, exact_pep_bdec_with, exact_pep_mixtures, ExactPep, ExactPepOptions, PepMethod};
pub use search::{fading_ridge_example, random_fading_search, random_loss_search, BoundSearch, BOUND_SLACK_DB};

/// Largest pairwise loss, `20 log10(2/√3)` dB.
pub const MAX_LOSS_DB: f64 = 1.249_387_366_082_999_5;

/// Which decoder a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Sdec,
    Bdec,
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sdec" | "s-dec" => Ok(DecoderKind::Sdec),
            "bdec" | "b-dec" => Ok(DecoderKind::Bdec),
            other => Err(Error::Parse(format!("unknown decoder '{other}'"))),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Sdec => "S-DEC",
            DecoderKind::Bdec => "B-DEC",
        })
    }
}

/// Gaussian parameters of a scaled SMD: mean `μ d`, variance `σ² σ_z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmdParams {
    pub mu: f64,
    pub var: f64,
}

/// Tabulated SMD parameters for 4-PAM with a Gray labeling.
///
/// S-DEC: `μ = σ² = (s_i - s_j)²/4` in units of `d`. B-DEC: identical except
/// the corner pair `{s1, s4}`, which has `(3, 1)`.
pub fn smd_params(decoder: DecoderKind, i: usize, j: usize) -> Result<SmdParams> {
    if i >= 4 || j >= 4 {
        return Err(Error::RequiresFourPam(i.max(j)));
    }
    if i == j {
        return Err(Error::IdenticalSymbols);
    }
    let gap = i.abs_diff(j) as f64;
    let corner = i.min(j) == 0 && i.max(j) == 3;
    Ok(match decoder {
        DecoderKind::Bdec if corner => SmdParams { mu: 3.0, var: 1.0 },
        _ => SmdParams {
            mu: gap * gap,
            var: gap * gap,
        },
    })
}

/// Position counts of a codeword pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct WeightProfile {
    pub w01: u32,
    pub w10: u32,
    pub w11: u32,
    pub wc: u32,
}

impl WeightProfile {
    /// Validated constructor: corners must fit inside the single-bit classes.
    pub fn new(w01: u32, w10: u32, w11: u32, wc: u32) -> Result<Self> {
        if wc > w01 + w10 {
            return Err(Error::InvalidConfig(format!(
                "corner count {wc} exceeds single-bit positions {}",
                w01 + w10
            )));
        }
        Ok(WeightProfile { w01, w10, w11, wc })
    }

    pub fn is_zero(&self) -> bool {
        self.w01 == 0 && self.w10 == 0 && self.w11 == 0
    }

    /// `β = w01 + w10 + 4 w11` as an integer.
    pub fn beta_int(&self) -> u32 {
        self.w01 + self.w10 + 4 * self.w11
    }
}

/// Counts error-vector classes and corners position by position.
pub fn weight_profile(c: &Constellation, x: &[usize], xhat: &[usize]) -> Result<WeightProfile> {
    if c.bits() != 2 {
        return Err(Error::RequiresFourPam(c.bits()));
    }
    if x.len() != xhat.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: xhat.len(),
        });
    }
    let mut p = WeightProfile::default();
    for (&a, &b) in x.iter().zip(xhat) {
        match c.error_vector(a, b).value() {
            1 => p.w01 += 1,
            2 => p.w10 += 1,
            3 => p.w11 += 1,
            _ => {}
        }
        if c.is_corner_pair(a, b)? {
            p.wc += 1;
        }
    }
    Ok(p)
}

/// `β = Σ_e w_e μ_e`.
pub fn beta(p: &WeightProfile) -> f64 {
    p.beta_int() as f64
}

/// Normalized distance `a^S` or `a^B` of a profile.
pub fn norm_distance(decoder: DecoderKind, p: &WeightProfile) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::IdenticalCodewords);
    }
    Ok(distance_from(decoder, beta(p), p.wc as f64))
}

fn distance_from(decoder: DecoderKind, beta: f64, corners: f64) -> f64 {
    match decoder {
        DecoderKind::Sdec => (beta + 8.0 * corners).sqrt(),
        DecoderKind::Bdec => (beta + 2.0 * corners) / beta.sqrt(),
    }
}

/// `Q(a · d/σ_z)`.
pub fn pep_analytic(a: f64, dsz: f64) -> f64 {
    q(a * dsz)
}

/// `ln Q(a · d/σ_z)`.
pub fn ln_pep_analytic(a: f64, dsz: f64) -> f64 {
    ln_q(a * dsz)
}

/// `20 log10(√(β(β+8w_c)) / (β+2w_c))`.
pub fn loss_db(beta: f64, corners: f64) -> f64 {
    20.0 * ((beta * (beta + 8.0 * corners)).sqrt() / (beta + 2.0 * corners)).log10()
}

/// Asymptotic loss of B-DEC against S-DEC for one pair, in dB.
pub fn pairwise_loss(p: &WeightProfile) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::IdenticalCodewords);
    }
    Ok(loss_db(beta(p), p.wc as f64))
}

/// Index sets of the four position classes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FadingProfile {
    pub k01: Vec<usize>,
    pub k10: Vec<usize>,
    pub k11: Vec<usize>,
    pub kc: Vec<usize>,
}

impl FadingProfile {
    /// Collapses index sets to counts.
    pub fn counts(&self) -> WeightProfile {
        WeightProfile {
            w01: self.k01.len() as u32,
            w10: self.k10.len() as u32,
            w11: self.k11.len() as u32,
            wc: self.kc.len() as u32,
        }
    }

    /// `(β, α)` with every position weighted by `h²[k]`.
    pub fn weighted(&self, h: &[f64]) -> (f64, f64) {
        let s = |ks: &[usize]| ks.iter().map(|&k| h[k] * h[k]).sum::<f64>();
        (s(&self.k01) + s(&self.k10) + 4.0 * s(&self.k11), s(&self.kc))
    }
}

pub fn fading_profile(c: &Constellation, x: &[usize], xhat: &[usize]) -> Result<FadingProfile> {
    if c.bits() != 2 {
        return Err(Error::RequiresFourPam(c.bits()));
    }
    if x.len() != xhat.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: xhat.len(),
        });
    }
    let mut p = FadingProfile::default();
    for (k, (&a, &b)) in x.iter().zip(xhat).enumerate() {
        match c.error_vector(a, b).value() {
            1 => p.k01.push(k),
            2 => p.k10.push(k),
            3 => p.k11.push(k),
            _ => {}
        }
        if c.is_corner_pair(a, b)? {
            p.kc.push(k);
        }
    }
    Ok(p)
}

fn check_gains(h: &[f64], n: usize) -> Result<()> {
    if h.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: h.len(),
        });
    }
    match h.iter().find(|&&g| !(g.is_finite() && g > 0.0)) {
        Some(&g) => Err(Error::InvalidGain(g)),
        None => Ok(()),
    }
}

/// Normalized distance with known fading gains `h`.
pub fn fading_distance(decoder: DecoderKind, c: &Constellation, h: &[f64], x: &[usize], xhat: &[usize]) -> Result<f64> {
    check_gains(h, x.len())?;
    let p = fading_profile(c, x, xhat)?;
    if p.counts().is_zero() {
        return Err(Error::IdenticalCodewords);
    }
    let (b, a) = p.weighted(h);
    Ok(distance_from(decoder, b, a))
}

/// Asymptotic loss with known fading gains, in dB.
pub fn fading_pairwise_loss(c: &Constellation, h: &[f64], x: &[usize], xhat: &[usize]) -> Result<f64> {
    check_gains(h, x.len())?;
    let p = fading_profile(c, x, xhat)?;
    if p.counts().is_zero() {
        return Err(Error::IdenticalCodewords);
    }
    let (b, a) = p.weighted(h);
    Ok(loss_db(b, a))
}

/// `(4d)⁻¹ Λ^S(x, x̂)` at observation `y`.
pub fn sdec_smd_scaled(c: &Constellation, x: usize, xhat: usize, y: f64) -> f64 {
    smd_sdec(c.point(x), c.point(xhat), y) / (4.0 * c.d())
}

/// `(4d)⁻¹ σ_z² Λ^B(x, x̂)` at observation `y`.
pub fn bdec_smd_scaled(dm: &Demapper, c: &Constellation, x: usize, xhat: usize, y: f64, sigma: f64) -> f64 {
    let mut l = [0.0; 8];
    let l = &mut l[..c.bits()];
    dm.llrs_into(y, 1.0, sigma, l);
    let lambda: f64 = (0..c.bits())
        .map(|j| 2.0 * (c.bit(x, j) as f64 - c.bit(xhat, j) as f64) * l[j])
        .sum();
    sigma * sigma * lambda / (4.0 * c.d())
}

/// `d/σ_z` from its value in dB (`20 log10`).
pub fn dsz_from_db(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// One point of the exact-versus-ZcMod comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZcModPoint {
    pub dsz_db: f64,
    pub exact: f64,
    pub zcmod: f64,
    pub ratio: f64,
    pub method: PepMethod,
}

/// Exact B-DEC PEP divided by the ZcMod prediction `Q(a^B d/σ_z)` over a
/// grid of `d/σ_z` values in dB.
pub fn zcmod_ratio_curve(c: &Constellation, x: &[usize], xhat: &[usize], grid_db: &[f64]) -> Result<Vec<ZcModPoint>> {
    let a = norm_distance(DecoderKind::Bdec, &weight_profile(c, x, xhat)?)?;
    grid_db
        .iter()
        .map(|&db| {
            let dsz = dsz_from_db(db);
            let e = exact_pep_bdec(c, x, xhat, dsz)?;
            let ln_z = ln_pep_analytic(a, dsz);
            Ok(ZcModPoint {
                dsz_db: db,
                exact: e.value,
                zcmod: ln_z.exp(),
                ratio: (e.ln_value - ln_z).exp(),
                method: e.method,
            })
        })
        .collect()
}
