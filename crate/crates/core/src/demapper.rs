//! Max-log L-values and the exact piecewise-linear form of L-values and of
//! the bit-wise symbol metric difference.
//!
//! Sign convention: `L_j > 0` favors bit 1, i.e.
//! `L_j = (min_{s∈S_j0}(y-hs)² - min_{s∈S_j1}(y-hs)²) / 2σ²`.

use crate::constellation::Constellation;
use crate::special::{ln_gauss_interval, pdf};
use crate::{Error, Result};

/// Per-bit subsets of a constellation, prepared for fast L-value evaluation.
#[derive(Debug, Clone)]
pub struct Demapper {
    bits: usize,
    /// `subsets[j][u]`: amplitudes whose bit `j` equals `u`.
    subsets: Vec<[Vec<f64>; 2]>,
}

impl Demapper {
    pub fn new(c: &Constellation) -> Self {
        let subsets = (0..c.bits())
            .map(|j| {
                let pick = |u: u8| {
                    (0..c.order())
                        .filter(|&i| c.bit(i, j) == u)
                        .map(|i| c.point(i))
                        .collect()
                };
                [pick(0), pick(1)]
            })
            .collect();
        Demapper {
            bits: c.bits(),
            subsets,
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Writes the `m` L-values of one observation into `out`.
    pub fn llrs_into(&self, y: f64, h: f64, sigma: f64, out: &mut [f64]) {
        let scale = 0.5 / (sigma * sigma);
        for (o, [s0, s1]) in out.iter_mut().zip(&self.subsets) {
            let d0 = s0.iter().map(|&s| (y - h * s).powi(2)).fold(f64::INFINITY, f64::min);
            let d1 = s1.iter().map(|&s| (y - h * s).powi(2)).fold(f64::INFINITY, f64::min);
            *o = scale * (d0 - d1);
        }
    }

    /// L-values of a whole frame, `m` per observation.
    pub fn frame_llrs(&self, y: &[f64], h: &[f64], sigma: f64) -> Vec<f64> {
        let mut out = vec![0.0; y.len() * self.bits];
        for (k, chunk) in out.chunks_mut(self.bits).enumerate() {
            self.llrs_into(y[k], h[k], sigma, chunk);
        }
        out
    }
}

/// Max-log L-values `L_1..L_m` of one observation with gain `h`.
pub fn maxlog_llrs(c: &Constellation, y: f64, sigma: f64, h: f64) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidNoise(sigma));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidGain(h));
    }
    let mut out = vec![0.0; c.bits()];
    Demapper::new(c).llrs_into(y, h, sigma, &mut out);
    Ok(out)
}

/// One affine piece `slope * y + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub slope: f64,
    pub intercept: f64,
}

impl Piece {
    pub fn eval(&self, y: f64) -> f64 {
        self.slope * y + self.intercept
    }
}

/// Continuous piecewise-linear function on the real line.
///
/// Piece `i` covers `[breaks[i-1], breaks[i]]` with `breaks[-1] = -inf`
/// and `breaks[len] = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseLinear {
    /// Builds the function from breakpoints and a selector giving the piece
    /// active at a point strictly inside each interval.
    fn from_intervals(mut breaks: Vec<f64>, mut piece_at: impl FnMut(f64) -> Piece) -> Self {
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut pieces = Vec::with_capacity(breaks.len() + 1);
        for i in 0..=breaks.len() {
            let probe = match (i.checked_sub(1).map(|p| breaks[p]), breaks.get(i)) {
                (None, None) => 0.0,
                (None, Some(&hi)) => hi - 1.0,
                (Some(lo), None) => lo + 1.0,
                (Some(lo), Some(&hi)) => 0.5 * (lo + hi),
            };
            pieces.push(piece_at(probe));
        }
        let mut f = PiecewiseLinear { breaks, pieces };
        f.merge_equal_pieces();
        f
    }

    fn merge_equal_pieces(&mut self) {
        let scale = self
            .pieces
            .iter()
            .map(|p| p.slope.abs().max(p.intercept.abs()))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        for p in &mut self.pieces {
            if p.slope.abs() <= tol {
                p.slope = 0.0;
            }
        }
        let mut breaks = Vec::with_capacity(self.breaks.len());
        let mut pieces = vec![self.pieces[0]];
        for (i, &b) in self.breaks.iter().enumerate() {
            let next = self.pieces[i + 1];
            let last = pieces.last_mut().expect("nonempty");
            if (last.slope - next.slope).abs() <= tol && (last.intercept - next.intercept).abs() <= tol {
                continue;
            }
            breaks.push(b);
            pieces.push(next);
        }
        self.breaks = breaks;
        self.pieces = pieces;
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interval `(lo, hi)` covered by piece `i`, with infinite ends.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { f64::NEG_INFINITY } else { self.breaks[i - 1] };
        let hi = self.breaks.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b < y);
        self.pieces[i].eval(y)
    }

    /// `Σ coef_i f_i`.
    pub fn linear_combination(terms: &[(f64, &PiecewiseLinear)]) -> PiecewiseLinear {
        let breaks: Vec<f64> = terms.iter().flat_map(|(_, f)| f.breaks.iter().copied()).collect();
        Self::from_intervals(breaks, |y| {
            let mut acc = Piece {
                slope: 0.0,
                intercept: 0.0,
            };
            for (c, f) in terms {
                let p = f.pieces[f.breaks.partition_point(|&b| b < y)];
                acc.slope += c * p.slope;
                acc.intercept += c * p.intercept;
            }
            acc
        })
    }
}

fn nearest(points: &[f64], y: f64) -> f64 {
    points
        .iter()
        .copied()
        .min_by(|a, b| (y - a).abs().total_cmp(&(y - b).abs()))
        .expect("nonempty subset")
}

fn midpoints(sorted: &[f64]) -> impl Iterator<Item = f64> + '_ {
    sorted.windows(2).map(|w| 0.5 * (w[0] + w[1]))
}

/// Exact piecewise form of `y ↦ L_j(y)` (bit `j`, 0-based, MSB first).
///
/// Breakpoints are the nearest-neighbor boundaries inside `S_j0` and `S_j1`;
/// on each piece with nearest points `a ∈ S_j0`, `b ∈ S_j1` the slope is
/// `h(b-a)/σ²` and the intercept `h²(a²-b²)/2σ²`.
pub fn llr_piecewise(c: &Constellation, j: usize, sigma: f64, h: f64) -> Result<PiecewiseLinear> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidNoise(sigma));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidGain(h));
    }
    if j >= c.bits() {
        return Err(Error::LengthMismatch {
            expected: c.bits(),
            actual: j,
        });
    }
    let subset = |u: u8| -> Vec<f64> {
        (0..c.order())
            .filter(|&i| c.bit(i, j) == u)
            .map(|i| h * c.point(i))
            .collect()
    };
    let (s0, s1) = (subset(0), subset(1));
    let breaks: Vec<f64> = midpoints(&s0).chain(midpoints(&s1)).collect();
    let inv = 1.0 / (sigma * sigma);
    Ok(PiecewiseLinear::from_intervals(breaks, |y| {
        let a = nearest(&s0, y);
        let b = nearest(&s1, y);
        Piece {
            slope: (b - a) * inv,
            intercept: 0.5 * (a * a - b * b) * inv,
        }
    }))
}

/// Exact piecewise form of the bit-wise SMD
/// `Λ^B(y) = 2 Σ_j (b_j(x) - b_j(x̂)) L_j(y)` for transmitted `x`, competitor `x̂`.
pub fn smd_piecewise(c: &Constellation, x: usize, xhat: usize, sigma: f64) -> Result<PiecewiseLinear> {
    smd_piecewise_faded(c, x, xhat, sigma, 1.0)
}

/// [`smd_piecewise`] with channel gain `h`.
pub fn smd_piecewise_faded(c: &Constellation, x: usize, xhat: usize, sigma: f64, h: f64) -> Result<PiecewiseLinear> {
    if x == xhat {
        return Err(Error::IdenticalSymbols);
    }
    let llrs = (0..c.bits())
        .map(|j| llr_piecewise(c, j, sigma, h))
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<(f64, &PiecewiseLinear)> = llrs
        .iter()
        .enumerate()
        .map(|(j, f)| (2.0 * (c.bit(x, j) as f64 - c.bit(xhat, j) as f64), f))
        .filter(|(coef, _)| *coef != 0.0)
        .collect();
    Ok(PiecewiseLinear::linear_combination(&terms))
}

/// Gaussian density `N(mean, std²)` restricted to `[lo, hi]` carrying total
/// mass `exp(ln_weight)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSegment {
    pub mean: f64,
    pub std: f64,
    pub lo: f64,
    pub hi: f64,
    pub ln_weight: f64,
}

impl GaussianSegment {
    pub fn weight(&self) -> f64 {
        self.ln_weight.exp()
    }

    /// `E[V; V ∈ [lo,hi]]` for the untruncated `V ~ N(mean, std²)`.
    pub fn partial_mean(&self) -> f64 {
        let a = (self.lo - self.mean) / self.std;
        let b = (self.hi - self.mean) / self.std;
        let pa = if a.is_finite() { pdf(a) } else { 0.0 };
        let pb = if b.is_finite() { pdf(b) } else { 0.0 };
        self.mean * self.weight() + self.std * (pa - pb)
    }
}

/// Atom of a mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    pub value: f64,
    pub ln_prob: f64,
}

impl PointMass {
    pub fn prob(&self) -> f64 {
        self.ln_prob.exp()
    }
}

/// Distribution of `f(Y)` for piecewise-linear `f` and Gaussian `Y`:
/// truncated Gaussian segments for the sloped pieces, atoms for flat ones.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalarMixture {
    pub points: Vec<PointMass>,
    pub segments: Vec<GaussianSegment>,
}

impl ScalarMixture {
    /// Pushes `Y ~ N(mean, sigma²)` through `f`.
    pub fn from_piecewise(f: &PiecewiseLinear, mean: f64, sigma: f64) -> Self {
        let mut out = ScalarMixture::default();
        for (i, p) in f.pieces().iter().enumerate() {
            let (lo, hi) = f.interval(i);
            let ln_w = ln_gauss_interval((lo - mean) / sigma, (hi - mean) / sigma);
            if ln_w == f64::NEG_INFINITY {
                continue;
            }
            if p.slope == 0.0 {
                out.points.push(PointMass {
                    value: p.intercept,
                    ln_prob: ln_w,
                });
            } else {
                let (a, b) = (p.eval(lo), p.eval(hi));
                let (a, b) = if p.slope > 0.0 { (a, b) } else { (b, a) };
                out.segments.push(GaussianSegment {
                    mean: p.eval(mean),
                    std: p.slope.abs() * sigma,
                    lo: if a.is_nan() { f64::NEG_INFINITY } else { a },
                    hi: if b.is_nan() { f64::INFINITY } else { b },
                    ln_weight: ln_w,
                });
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(PointMass::prob).sum::<f64>()
            + self.segments.iter().map(GaussianSegment::weight).sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|p| p.value * p.prob()).sum::<f64>()
            + self.segments.iter().map(GaussianSegment::partial_mean).sum::<f64>()
    }

    /// `Pr{V < v}`.
    pub fn cdf(&self, v: f64) -> f64 {
        let atoms: f64 = self.points.iter().filter(|p| p.value < v).map(PointMass::prob).sum();
        let cont: f64 = self
            .segments
            .iter()
            .filter(|s| s.lo < v)
            .map(|s| {
                let a = (s.lo - s.mean) / s.std;
                let b = (v.min(s.hi) - s.mean) / s.std;
                ln_gauss_interval(a, b).exp()
            })
            .sum();
        atoms + cont
    }
}

/// Exact law of `Λ^B(x, x̂)` given `x` transmitted over AWGN.
pub fn smd_exact_pdf(c: &Constellation, transmitted: usize, competitor: usize, sigma: f64) -> Result<ScalarMixture> {
    let f = smd_piecewise(c, transmitted, competitor, sigma)?;
    Ok(ScalarMixture::from_piecewise(&f, c.point(transmitted), sigma))
}
