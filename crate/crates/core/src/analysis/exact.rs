//! Exact B-DEC pairwise error probability.
//!
//! `Pr{Σ_k Λ^B_k < 0}` for independent per-position SMDs, each an exact
//! mixture of truncated Gaussians and atoms. The sum is exponentially tilted
//! at the saddlepoint `θ` (tilted mean zero), so with `M_k(θ) = E[e^{-θΛ_k}]`
//!
//! `Pr{S < 0} = Π_k M_k(θ) · E_θ[e^{θS}; S < 0]`,
//!
//! and the tilted expectation is an O(1) quantity even when the probability
//! itself is astronomically small. The expectation is split over atom
//! inclusion patterns. Patterns with at most one continuous part are closed
//! form; the others are put on a lattice with exact cell masses, convolved by
//! FFT and refined by Richardson extrapolation over halved spacings.

use log::warn;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::channel::derive_trial_rng;
use crate::constellation::Constellation;
use crate::demapper::{smd_exact_pdf, smd_piecewise, ScalarMixture};
use crate::special::ln_gauss_interval;
use crate::{Error, Result};

/// How a PEP value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PepMethod {
    TiltedLattice,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactPep {
    pub value: f64,
    pub ln_value: f64,
    pub method: PepMethod,
    /// Monte Carlo trials, 0 for the lattice method.
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPepOptions {
    /// Longest pair (differing positions) handled by the lattice method.
    pub max_len: usize,
    pub fallback_trials: u64,
    pub seed: u64,
    /// Relative agreement of successive Richardson estimates.
    pub rel_tol: f64,
    pub max_levels: usize,
}

impl Default for ExactPepOptions {
    fn default() -> Self {
        ExactPepOptions {
            max_len: 8,
            fallback_trials: 1_000_000,
            seed: 0x5eed,
            rel_tol: 1e-7,
            max_levels: 8,
        }
    }
}

/// Exact PEP of B-DEC for `x` transmitted and competitor `xhat` over AWGN
/// at `d/σ_z = dsz` (linear).
pub fn exact_pep_bdec(c: &Constellation, x: &[usize], xhat: &[usize], dsz: f64) -> Result<ExactPep> {
    exact_pep_bdec_with(c, x, xhat, dsz, &ExactPepOptions::default())
}

pub fn exact_pep_bdec_with(
    c: &Constellation,
    x: &[usize],
    xhat: &[usize],
    dsz: f64,
    opts: &ExactPepOptions,
) -> Result<ExactPep> {
    if x.len() != xhat.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: xhat.len(),
        });
    }
    if !(dsz.is_finite() && dsz > 0.0) {
        return Err(Error::InvalidConfig(format!("d/sigma must be positive, got {dsz}")));
    }
    let sigma = c.d() / dsz;
    let diff: Vec<(usize, usize)> = x
        .iter()
        .zip(xhat)
        .filter(|(a, b)| a != b)
        .map(|(&a, &b)| (a, b))
        .collect();
    if diff.is_empty() {
        return Err(Error::IdenticalCodewords);
    }
    if diff.len() > opts.max_len {
        warn!(
            "pair differs in {} positions (> {}); exact PEP falls back to {} Monte Carlo trials",
            diff.len(),
            opts.max_len,
            opts.fallback_trials
        );
        return monte_carlo(c, &diff, sigma, opts);
    }
    let mixes = diff
        .iter()
        .map(|&(a, b)| smd_exact_pdf(c, a, b, sigma))
        .collect::<Result<Vec<_>>>()?;
    exact_pep_mixtures(&mixes, opts)
}

fn monte_carlo(c: &Constellation, diff: &[(usize, usize)], sigma: f64, opts: &ExactPepOptions) -> Result<ExactPep> {
    let fs = diff
        .iter()
        .map(|&(a, b)| smd_piecewise(c, a, b, sigma))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = derive_trial_rng(opts.seed, 0);
    let mut errors = 0u64;
    for _ in 0..opts.fallback_trials {
        let s: f64 = diff
            .iter()
            .zip(&fs)
            .map(|(&(a, _), f)| f.eval(c.point(a) + sigma * rng.sample::<f64, _>(StandardNormal)))
            .sum();
        if s < 0.0 {
            errors += 1;
        }
    }
    let value = errors as f64 / opts.fallback_trials as f64;
    Ok(ExactPep {
        value,
        ln_value: value.ln(),
        method: PepMethod::MonteCarlo,
        trials: opts.fallback_trials,
    })
}

/// `Pr{Σ V_k < 0}` for independent mixtures `V_k`.
pub fn exact_pep_mixtures(mixes: &[ScalarMixture], opts: &ExactPepOptions) -> Result<ExactPep> {
    let mean: f64 = mixes.iter().map(ScalarMixture::mean).sum();
    let ln_value = if mean >= 0.0 {
        ln_lower_tail(mixes, opts)?
    } else {
        // complement through the mirrored sum
        let neg: Vec<ScalarMixture> = mixes.iter().map(negate).collect();
        (-ln_lower_tail(&neg, opts)?.exp()).ln_1p()
    };
    Ok(ExactPep {
        value: ln_value.exp(),
        ln_value,
        method: PepMethod::TiltedLattice,
        trials: 0,
    })
}

fn negate(m: &ScalarMixture) -> ScalarMixture {
    let mut out = m.clone();
    for p in &mut out.points {
        p.value = -p.value;
    }
    for s in &mut out.segments {
        s.mean = -s.mean;
        (s.lo, s.hi) = (-s.hi, -s.lo);
    }
    out
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// A tilted segment: `N(mean, sd²)` on `[lo, hi]`, normalized weight `w`,
/// own Gaussian mass `exp(ln_own)`.
#[derive(Debug, Clone, Copy)]
struct Seg {
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    w: f64,
    ln_own: f64,
}

/// One mixture under tilt `θ`, normalized to unit mass.
#[derive(Debug, Clone)]
struct Tilted {
    ln_m: f64,
    points: Vec<(f64, f64)>,
    segs: Vec<Seg>,
}

fn tilt(mix: &ScalarMixture, theta: f64) -> Tilted {
    let seg_raw: Vec<(Seg, f64)> = mix
        .segments
        .iter()
        .map(|s| {
            let v = s.std * s.std;
            let mean = s.mean - theta * v;
            let ln_own = ln_gauss_interval((s.lo - mean) / s.std, (s.hi - mean) / s.std);
            // ∫ e^{-θs} φ_{m,v} = e^{-θm + θ²v/2} · (mass of N(m - θv, v) on [lo,hi])
            let ln_mass = -theta * s.mean + 0.5 * theta * theta * v + ln_own;
            (
                Seg {
                    mean,
                    sd: s.std,
                    lo: s.lo,
                    hi: s.hi,
                    w: 0.0,
                    ln_own,
                },
                ln_mass,
            )
        })
        .collect();
    let pt_raw: Vec<(f64, f64)> = mix
        .points
        .iter()
        .map(|p| (p.value, p.ln_prob - theta * p.value))
        .collect();
    let ln_m = log_sum_exp(seg_raw.iter().map(|s| s.1).chain(pt_raw.iter().map(|p| p.1)));
    Tilted {
        ln_m,
        points: pt_raw.iter().map(|&(v, l)| (v, (l - ln_m).exp())).collect(),
        segs: seg_raw
            .into_iter()
            .map(|(mut s, l)| {
                s.w = (l - ln_m).exp();
                s
            })
            .collect(),
    }
}

fn ln_pdf(x: f64) -> f64 {
    if x.is_finite() {
        -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn tilted_mean(t: &Tilted) -> f64 {
    let atoms: f64 = t.points.iter().map(|&(v, p)| v * p).sum();
    let cont: f64 = t
        .segs
        .iter()
        .filter(|s| s.w > 0.0)
        .map(|s| {
            let a = (s.lo - s.mean) / s.sd;
            let b = (s.hi - s.mean) / s.sd;
            let shift = (ln_pdf(a) - s.ln_own).exp() - (ln_pdf(b) - s.ln_own).exp();
            s.w * (s.mean + s.sd * shift)
        })
        .sum();
    atoms + cont
}

/// Saddlepoint `θ ≥ 0` where the tilted sum has zero mean; `None` if the
/// sum is positive almost surely.
fn saddlepoint(mixes: &[ScalarMixture]) -> Option<f64> {
    let f = |theta: f64| mixes.iter().map(|m| tilted_mean(&tilt(m, theta))).sum::<f64>();
    if f(0.0) <= 0.0 {
        return Some(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1e-6;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Lattice masses of the continuous part of one tilted law: node `i`
/// carries cell `[(i-½)h, (i+½)h]`. `None` when no segment carries mass.
fn discretize(t: &Tilted, h: f64) -> Result<Option<(i64, Vec<f64>)>> {
    const SPAN_SD: f64 = 14.0;
    let windows: Vec<(Seg, f64, f64)> = t
        .segs
        .iter()
        .filter(|s| s.w > NEGLIGIBLE)
        .filter_map(|s| {
            let a = s.lo.max(s.mean - SPAN_SD * s.sd);
            let b = s.hi.min(s.mean + SPAN_SD * s.sd);
            (a < b).then_some((*s, a, b))
        })
        .collect();
    if windows.is_empty() {
        return Ok(None);
    }
    let first = windows.iter().map(|w| (w.1 / h).round() as i64).min().unwrap_or(0);
    let last = windows.iter().map(|w| (w.2 / h).round() as i64).max().unwrap_or(0);
    let len = (last - first + 1) as usize;
    if len > 1 << 24 {
        return Err(Error::LimitExceeded {
            what: "lattice nodes per component",
            value: len,
            limit: 1 << 24,
        });
    }
    let mut mass = vec![0.0; len];
    for (s, a, b) in &windows {
        let i0 = (a / h).round() as i64;
        let i1 = (b / h).round() as i64;
        for i in i0..=i1 {
            let ca = ((i as f64 - 0.5) * h).max(*a);
            let cb = ((i as f64 + 0.5) * h).min(*b);
            if ca < cb {
                let ln = ln_gauss_interval((ca - s.mean) / s.sd, (cb - s.mean) / s.sd) - s.ln_own;
                mass[(i - first) as usize] += s.w * ln.exp();
            }
        }
    }
    Ok(Some((first, mass)))
}

const NEGLIGIBLE: f64 = 1e-30;
/// Inclusion patterns lighter than this are dropped.
const PATTERN_FLOOR: f64 = 1e-20;

/// One choice of "atom or continuous part" per component.
#[derive(Debug, Clone)]
struct Pattern {
    /// Sum of the chosen atoms.
    shift: f64,
    /// Product of the chosen atom probabilities.
    weight: f64,
    /// Components contributing their continuous part.
    cont: Vec<usize>,
}

fn patterns(tilted: &[Tilted]) -> Vec<Pattern> {
    let cont_w: Vec<f64> = tilted.iter().map(|t| t.segs.iter().map(|s| s.w).sum()).collect();
    let mut out = vec![Pattern {
        shift: 0.0,
        weight: 1.0,
        cont: Vec::new(),
    }];
    for (k, t) in tilted.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (t.points.len() + 1));
        for p in &out {
            if cont_w[k] * p.weight > PATTERN_FLOOR {
                let mut q = p.clone();
                q.weight *= cont_w[k];
                q.cont.push(k);
                next.push(q);
            }
            for &(v, pr) in &t.points {
                if pr * p.weight > PATTERN_FLOOR {
                    next.push(Pattern {
                        shift: p.shift + v,
                        weight: p.weight * pr,
                        cont: p.cont.clone(),
                    });
                }
            }
        }
        out = next;
    }
    out
}

/// `E_θ[e^{θ(c+X)}; X < -c]` for a single tilted continuous part, in closed
/// form, unnormalized (weights as in the tilted law).
fn single_tail(t: &Tilted, c: f64, theta: f64) -> f64 {
    t.segs
        .iter()
        .filter(|s| s.w > 0.0 && s.lo < -c)
        .map(|s| {
            // undo the tilt: the integrand is the untilted Gaussian
            let m0 = s.mean + theta * s.sd * s.sd;
            let ln_part = ln_gauss_interval((s.lo - m0) / s.sd, (s.hi.min(-c) - m0) / s.sd);
            (s.w.ln() - s.ln_own + theta * (c + s.mean) + 0.5 * theta * theta * s.sd * s.sd + ln_part).exp()
        })
        .sum()
}

/// `E_θ[e^{θ(c+S)}; S < -c]` from lattice masses spread uniformly over their
/// cells; the cell holding the cut contributes the part below it.
fn lattice_tail(offset: i64, mass: &[f64], h: f64, theta: f64, c: f64) -> f64 {
    let cut = -c;
    let x = 0.5 * theta * h;
    let full = if x == 0.0 { 1.0 } else { x.sinh() / x };
    let mut total = 0.0;
    for (j, &m) in mass.iter().enumerate() {
        let s = (offset + j as i64) as f64 * h;
        if s + 0.5 * h <= cut {
            total += m * full * (theta * (c + s)).exp();
        } else if s - 0.5 * h < cut {
            let lo = s - 0.5 * h;
            let frac = if theta == 0.0 {
                (cut - lo) / h
            } else {
                -(theta * (lo - cut)).exp_m1() / (theta * h)
            };
            total += m * frac;
        } else {
            break;
        }
    }
    total
}

struct Spectra {
    n: usize,
    /// Per component: lattice offset and spectrum of its continuous part.
    parts: Vec<Option<(i64, Vec<Complex<f64>>)>>,
}

fn spectra(tilted: &[Tilted], needed: &[bool], h: f64, planner: &mut FftPlanner<f64>) -> Result<Spectra> {
    let mut lattices = Vec::with_capacity(tilted.len());
    for (t, &need) in tilted.iter().zip(needed) {
        lattices.push(if need { discretize(t, h)? } else { None });
    }
    let n = lattices
        .iter()
        .flatten()
        .map(|l| l.1.len())
        .sum::<usize>()
        .max(1)
        .next_power_of_two();
    let fwd = planner.plan_fft_forward(n);
    let parts = lattices
        .into_iter()
        .map(|l| {
            l.map(|(first, m)| {
                let mut buf: Vec<Complex<f64>> = m.iter().map(|&v| Complex::new(v, 0.0)).collect();
                buf.resize(n, Complex::new(0.0, 0.0));
                fwd.process(&mut buf);
                (first, buf)
            })
        })
        .collect();
    Ok(Spectra { n, parts })
}

fn ln_lower_tail(mixes: &[ScalarMixture], opts: &ExactPepOptions) -> Result<f64> {
    let Some(theta) = saddlepoint(mixes) else {
        return Ok(f64::NEG_INFINITY);
    };
    let tilted: Vec<Tilted> = mixes.iter().map(|m| tilt(m, theta)).collect();
    let ln_prod: f64 = tilted.iter().map(|t| t.ln_m).sum();

    // Patterns with at most one continuous part are exact; the rest have a
    // continuous density and go to the lattice.
    let mut exact = 0.0;
    let mut lattice_pats = Vec::new();
    for p in patterns(&tilted) {
        match p.cont.len() {
            0 => {
                if p.shift < 0.0 {
                    exact += p.weight * (theta * p.shift).exp();
                }
            }
            1 => {
                let k = p.cont[0];
                let cw: f64 = tilted[k].segs.iter().map(|s| s.w).sum();
                exact += p.weight / cw * single_tail(&tilted[k], p.shift, theta);
            }
            _ => lattice_pats.push(p),
        }
    }
    if lattice_pats.is_empty() {
        return Ok(ln_prod + exact.ln());
    }

    let mut needed = vec![false; tilted.len()];
    for p in &lattice_pats {
        for &k in &p.cont {
            needed[k] = true;
        }
    }
    let sd_min = tilted
        .iter()
        .zip(&needed)
        .filter(|(_, &n)| n)
        .flat_map(|(t, _)| t.segs.iter())
        .filter(|s| s.w > NEGLIGIBLE)
        .map(|s| s.sd)
        .fold(f64::INFINITY, f64::min);
    let h0 = sd_min / 4.0;
    let mut planner = FftPlanner::<f64>::new();
    let mut prev_t: Option<f64> = None;
    let mut prev_r: Option<f64> = None;
    let mut best = f64::NAN;
    for level in 0..opts.max_levels {
        let h = h0 / (1u64 << level) as f64;
        let sp = spectra(&tilted, &needed, h, &mut planner)?;
        let inv = planner.plan_fft_inverse(sp.n);
        let scale = 1.0 / sp.n as f64;
        let mut t = exact;
        for p in &lattice_pats {
            let mut acc = vec![Complex::new(scale, 0.0); sp.n];
            let mut offset = 0i64;
            let mut cw = 1.0;
            for &k in &p.cont {
                let (first, spec) = sp.parts[k].as_ref().expect("continuous part was discretized");
                offset += first;
                for (a, b) in acc.iter_mut().zip(spec) {
                    *a *= b;
                }
                cw *= tilted[k].segs.iter().map(|s| s.w).sum::<f64>();
            }
            inv.process(&mut acc);
            let mass: Vec<f64> = acc.iter().map(|z| z.re).collect();
            t += p.weight / cw * lattice_tail(offset, &mass, h, theta, p.shift);
        }
        match prev_t {
            None => best = t,
            Some(pt) => {
                let r = (4.0 * t - pt) / 3.0;
                best = r;
                if let Some(pr) = prev_r {
                    if (r - pr).abs() <= opts.rel_tol * r.abs() {
                        break;
                    }
                }
                prev_r = Some(r);
            }
        }
        prev_t = Some(t);
    }
    Ok(ln_prod + best.max(0.0).ln())
}
