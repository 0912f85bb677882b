//! Symbol-wise (S-DEC) and bit-wise (B-DEC) decoders.
//!
//! S-DEC minimizes `D^S(x) = Σ (y[k] - h[k] x[k])²` over the CM code; B-DEC
//! maximizes `D^B(b) = Σ (2b - 1) L` over the binary code. Both come with
//! an exhaustive backend over an explicit [`Codebook`] and a Viterbi backend
//! over a convolutional trellis. Exact ties go to the lexicographically
//! smallest information vector.

use std::cmp::Ordering;

use crate::codebook::{enumerate_codewords, int_to_bits, BinaryCode, ConvCode, Trellis};
use crate::constellation::Constellation;
use crate::{Error, Result};

/// Outcome of one decoding call.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub info: Vec<u8>,
    pub codeword: Vec<u8>,
    /// `D^S` (to be minimized) or `D^B` (to be maximized) of the winner,
    /// recomputed from its codeword.
    pub metric: f64,
    /// An exact metric tie was resolved somewhere on the way to the winner.
    pub tie: bool,
}

/// `Λ^S = 2(x - x̂)y + x̂² - x²` for amplitudes `x`, `x̂`.
pub fn smd_sdec(x: f64, xhat: f64, y: f64) -> f64 {
    2.0 * (x - xhat) * y + xhat * xhat - x * x
}

/// `D^S` of a symbol sequence.
pub fn sdec_metric(c: &Constellation, symbols: &[usize], y: &[f64], h: &[f64]) -> f64 {
    symbols
        .iter()
        .zip(y.iter().zip(h))
        .map(|(&s, (&yk, &hk))| (yk - hk * c.point(s)).powi(2))
        .sum()
}

/// `D^B` of a bit sequence.
pub fn bdec_metric(bits: &[u8], llrs: &[f64]) -> f64 {
    bits.iter().zip(llrs).map(|(&b, &l)| if b == 1 { l } else { -l }).sum()
}

/// Explicit list of codewords with their info vectors, bits and symbols.
#[derive(Debug, Clone)]
pub struct Codebook {
    constellation: Constellation,
    infos: Vec<Vec<u8>>,
    bits: Vec<Vec<u8>>,
    symbols: Vec<Vec<usize>>,
}

impl Codebook {
    /// Enumerates a binary code (`K ≤ limit`) and modulates every word.
    pub fn from_code<C: BinaryCode + ?Sized>(code: &C, c: &Constellation, limit: usize) -> Result<Self> {
        let mut cb = Codebook {
            constellation: c.clone(),
            infos: Vec::new(),
            bits: Vec::new(),
            symbols: Vec::new(),
        };
        for (u, w) in enumerate_codewords(code, limit)? {
            cb.symbols.push(c.modulate(&w)?);
            cb.infos.push(u);
            cb.bits.push(w);
        }
        Ok(cb)
    }

    /// Codebook of explicit symbol sequences; word `i` gets info vector `i`
    /// in binary.
    pub fn from_symbols(c: &Constellation, words: Vec<Vec<usize>>) -> Result<Self> {
        let n = words.first().map_or(0, Vec::len);
        if let Some(w) = words.iter().find(|w| w.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: w.len(),
            });
        }
        let k = (usize::BITS - words.len().saturating_sub(1).leading_zeros()) as usize;
        Ok(Codebook {
            constellation: c.clone(),
            infos: (0..words.len()).map(|i| int_to_bits(i as u64, k)).collect(),
            bits: words.iter().map(|w| c.demodulate_labels(w)).collect(),
            symbols: words,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn symbols(&self, i: usize) -> &[usize] {
        &self.symbols[i]
    }

    pub fn bits(&self, i: usize) -> &[u8] {
        &self.bits[i]
    }

    pub fn info(&self, i: usize) -> &[u8] {
        &self.infos[i]
    }

    fn symbol_len(&self) -> usize {
        self.symbols.first().map_or(0, Vec::len)
    }

    /// Index of the winner and tie flag; `better(a, b)` says `a` beats `b`.
    fn argbest(&self, metric: impl Fn(usize) -> f64, better: impl Fn(f64, f64) -> bool) -> (usize, bool) {
        let mut best = 0;
        let mut best_m = metric(0);
        let mut tie = false;
        for i in 1..self.len() {
            let m = metric(i);
            if better(m, best_m) {
                best = i;
                best_m = m;
                tie = false;
            } else if m == best_m {
                tie = true;
            }
        }
        (best, tie)
    }

    /// Exhaustive S-DEC.
    pub fn sdec(&self, y: &[f64], h: &[f64]) -> Result<DecodeResult> {
        let n = self.symbol_len();
        if y.len() != n || h.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: if y.len() != n { y.len() } else { h.len() },
            });
        }
        let c = &self.constellation;
        let (i, tie) = self.argbest(|i| sdec_metric(c, &self.symbols[i], y, h), |a, b| a < b);
        Ok(DecodeResult {
            info: self.infos[i].clone(),
            codeword: self.bits[i].clone(),
            metric: sdec_metric(c, &self.symbols[i], y, h),
            tie,
        })
    }

    /// Exhaustive B-DEC.
    pub fn bdec(&self, llrs: &[f64]) -> Result<DecodeResult> {
        let n = self.bits.first().map_or(0, Vec::len);
        if llrs.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: llrs.len(),
            });
        }
        let (i, tie) = self.argbest(|i| bdec_metric(&self.bits[i], llrs), |a, b| a > b);
        Ok(DecodeResult {
            info: self.infos[i].clone(),
            codeword: self.bits[i].clone(),
            metric: bdec_metric(&self.bits[i], llrs),
            tie,
        })
    }
}

/// Viterbi decoding of a (possibly terminated) convolutional frame whose
/// branch outputs map to whole symbols.
#[derive(Debug, Clone)]
pub struct ViterbiDecoder {
    trellis: Trellis,
    constellation: Constellation,
    info_steps: usize,
    terminated: bool,
}

impl ViterbiDecoder {
    /// Requires the number of code outputs `n` to be a multiple of `m`.
    pub fn new(code: &ConvCode, c: &Constellation, info_steps: usize, terminated: bool) -> Result<Self> {
        if !code.n().is_multiple_of(c.bits()) {
            return Err(Error::InvalidConfig(format!(
                "code outputs ({}) are not a multiple of bits per symbol ({})",
                code.n(),
                c.bits()
            )));
        }
        Ok(ViterbiDecoder {
            trellis: code.trellis(),
            constellation: c.clone(),
            info_steps,
            terminated,
        })
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn total_steps(&self) -> usize {
        self.info_steps + if self.terminated { self.trellis.tail_steps() } else { 0 }
    }

    pub fn info_len(&self) -> usize {
        self.info_steps * self.trellis.k()
    }

    pub fn code_len(&self) -> usize {
        self.total_steps() * self.trellis.n()
    }

    pub fn num_symbols(&self) -> usize {
        self.code_len() / self.constellation.bits()
    }

    /// Trellis S-DEC.
    pub fn sdec(&self, y: &[f64], h: &[f64]) -> Result<DecodeResult> {
        let ns = self.num_symbols();
        if y.len() != ns || h.len() != ns {
            return Err(Error::LengthMismatch {
                expected: ns,
                actual: if y.len() != ns { y.len() } else { h.len() },
            });
        }
        let c = &self.constellation;
        let m = c.bits();
        let n = self.trellis.n();
        let per_step = n / m;
        let outs = 1usize << n;
        let mask = (1u32 << m) - 1;
        // squared distance per observation and label
        let dist: Vec<f64> = (0..ns)
            .flat_map(|k| {
                (0..c.order()).map(move |label| {
                    let x = c.point(c.symbol_for_label(label as u8));
                    (y[k] - h[k] * x).powi(2)
                })
            })
            .collect();
        let mut table = vec![0.0; self.total_steps() * outs];
        for t in 0..self.total_steps() {
            for o in 0..outs {
                let mut acc = 0.0;
                for s in 0..per_step {
                    let label = (o as u32 >> (n - m * (s + 1))) & mask;
                    acc += dist[(t * per_step + s) * c.order() + label as usize];
                }
                table[t * outs + o] = -acc;
            }
        }
        let (info, codeword, tie) = self.run(&table);
        let symbols = c.modulate(&codeword)?;
        Ok(DecodeResult {
            metric: sdec_metric(c, &symbols, y, h),
            info,
            codeword,
            tie,
        })
    }

    /// Trellis B-DEC.
    pub fn bdec(&self, llrs: &[f64]) -> Result<DecodeResult> {
        if llrs.len() != self.code_len() {
            return Err(Error::LengthMismatch {
                expected: self.code_len(),
                actual: llrs.len(),
            });
        }
        let n = self.trellis.n();
        let outs = 1usize << n;
        let mut table = vec![0.0; self.total_steps() * outs];
        for t in 0..self.total_steps() {
            let l = &llrs[t * n..(t + 1) * n];
            for o in 0..outs {
                table[t * outs + o] = (0..n)
                    .map(|j| if (o >> (n - 1 - j)) & 1 == 1 { l[j] } else { -l[j] })
                    .sum();
            }
        }
        let (info, codeword, tie) = self.run(&table);
        Ok(DecodeResult {
            metric: bdec_metric(&codeword, llrs),
            info,
            codeword,
            tie,
        })
    }

    /// Max-metric path search over branch tables `table[t * 2^n + output]`.
    fn run(&self, table: &[f64]) -> (Vec<u8>, Vec<u8>, bool) {
        let tr = &self.trellis;
        let states = tr.num_states();
        let inputs = tr.num_inputs();
        let outs = 1usize << tr.n();
        let steps = self.total_steps();
        let mut pm = vec![f64::NEG_INFINITY; states];
        pm[0] = 0.0;
        let mut tie = vec![false; states];
        let mut prev = vec![0u32; steps * states];
        let mut input = vec![0u16; steps * states];
        let mut npm = vec![f64::NEG_INFINITY; states];
        let mut ntie = vec![false; states];
        for t in 0..steps {
            npm.fill(f64::NEG_INFINITY);
            ntie.fill(false);
            let allowed = if t < self.info_steps { inputs } else { 1 };
            let row = &table[t * outs..(t + 1) * outs];
            for s in 0..states {
                if pm[s] == f64::NEG_INFINITY {
                    continue;
                }
                for u in 0..allowed {
                    let ns = tr.next_state(s, u);
                    let cand = pm[s] + row[tr.output(s, u) as usize];
                    let slot = t * states + ns;
                    if cand > npm[ns] {
                        npm[ns] = cand;
                        ntie[ns] = tie[s];
                        prev[slot] = s as u32;
                        input[slot] = u as u16;
                    } else if cand == npm[ns] {
                        let (ps, pu) = (prev[slot] as usize, input[slot] as usize);
                        let order = if ps == s {
                            u.cmp(&pu)
                        } else {
                            lex_cmp(&prev, &input, states, t, s, ps)
                        };
                        if order == Ordering::Less {
                            prev[slot] = s as u32;
                            input[slot] = u as u16;
                        }
                        ntie[ns] = true;
                    }
                }
            }
            let top = npm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for v in npm.iter_mut() {
                *v -= top;
            }
            std::mem::swap(&mut pm, &mut npm);
            std::mem::swap(&mut tie, &mut ntie);
        }
        let mut end = 0;
        if !self.terminated {
            for s in 1..states {
                if pm[s] > pm[end]
                    || (pm[s] == pm[end] && lex_cmp(&prev, &input, states, steps, s, end) == Ordering::Less)
                {
                    end = s;
                }
            }
            if (0..states).filter(|&s| pm[s] == pm[end]).count() > 1 {
                tie[end] = true;
            }
        }
        // trace back
        let k = tr.k();
        let mut path = vec![0usize; steps];
        let mut s = end;
        for t in (0..steps).rev() {
            path[t] = input[t * states + s] as usize;
            s = prev[t * states + s] as usize;
        }
        let info = path[..self.info_steps]
            .iter()
            .flat_map(|&u| int_to_bits(u as u64, k))
            .collect();
        let codeword = tr.encode_steps(&path);
        (info, codeword, tie[end])
    }
}

/// Lexicographic order of the survivor input sequences ending in states
/// `a` and `b` after `t` steps.
fn lex_cmp(prev: &[u32], input: &[u16], states: usize, mut t: usize, mut a: usize, mut b: usize) -> Ordering {
    let mut order = Ordering::Equal;
    while a != b {
        t -= 1;
        let (ia, ib) = (input[t * states + a], input[t * states + b]);
        if ia != ib {
            order = ia.cmp(&ib);
        }
        a = prev[t * states + a] as usize;
        b = prev[t * states + b] as usize;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{awgn_transmit, derive_trial_rng, rayleigh_transmit};
    use crate::codebook::{best_rate_half_code, BlockCode};
    use crate::constellation::Labeling;
    use crate::demapper::Demapper;

    fn g(l: Labeling) -> Constellation {
        Constellation::make_pam(2, l, 1.0).unwrap()
    }

    #[test]
    fn smd_sdec_examples() {
        assert_eq!(smd_sdec(-1.0, 1.0, 0.0), 0.0);
        assert_eq!(smd_sdec(-3.0, 3.0, -3.0), 36.0);
        assert_eq!(smd_sdec(1.0, 1.0, 0.4), 0.0);
    }

    #[test]
    fn noiseless_sdec_recovers_codeword() {
        let c = g(Labeling::G1);
        let frame = best_rate_half_code(2).unwrap().frame(5, true);
        let cb = Codebook::from_code(&frame, &c, 12).unwrap();
        for i in 0..cb.len() {
            let y = c.amplitudes(cb.symbols(i));
            let r = cb.sdec(&y, &vec![1.0; y.len()]).unwrap();
            assert_eq!(r.info, cb.info(i));
            assert_eq!(r.metric, 0.0);
        }
    }

    #[test]
    fn two_word_sdec() {
        let c = g(Labeling::G3);
        let cb = Codebook::from_symbols(&c, vec![vec![2, 2], vec![0, 0]]).unwrap();
        let r = cb.sdec(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(cb.symbols(0), &[2, 2]);
        assert_eq!(r.info, vec![0]);
        assert_eq!(r.metric, 2.0);
        assert!(!r.tie);
        // equidistant pair is a tie resolved toward the first word
        let cb = Codebook::from_symbols(&c, vec![vec![2], vec![1]]).unwrap();
        let r = cb.sdec(&[0.0], &[1.0]).unwrap();
        assert!(r.tie);
        assert_eq!(r.info, vec![0]);
    }

    #[test]
    fn faded_sdec_equals_scaled_constellation() {
        let c = g(Labeling::G2);
        let words = vec![vec![0, 1, 3], vec![3, 2, 0], vec![1, 1, 2], vec![2, 3, 3]];
        let cb = Codebook::from_symbols(&c, words.clone()).unwrap();
        let half = Codebook::from_symbols(&c.scaled(0.5).unwrap(), words).unwrap();
        let y = [0.3, -1.2, 0.9];
        let a = cb.sdec(&y, &[0.5; 3]).unwrap();
        let b = half.sdec(&y, &[1.0; 3]).unwrap();
        assert_eq!(a.info, b.info);
        assert!((a.metric - b.metric).abs() < 1e-12);
    }

    #[test]
    fn single_symbol_bdec() {
        let c = g(Labeling::G3);
        let code = BlockCode::new(vec![vec![1, 1]]).unwrap();
        let cb = Codebook::from_code(&code, &c, 24).unwrap();
        let dm = Demapper::new(&c);
        let mut l = [0.0; 2];
        dm.llrs_into(-1.0, 1.0, 1.0, &mut l);
        let r = cb.bdec(&l).unwrap();
        assert_eq!(r.codeword, vec![0, 0]);
        let r = cb.bdec(&[50.0, 50.0]).unwrap();
        assert_eq!(r.codeword, vec![1, 1]);
    }

    #[test]
    fn bdec_scale_invariance() {
        let c = g(Labeling::G1);
        let frame = best_rate_half_code(3).unwrap().frame(6, true);
        let cb = Codebook::from_code(&frame, &c, 12).unwrap();
        let mut rng = derive_trial_rng(21, 0);
        let dm = Demapper::new(&c);
        for _ in 0..50 {
            let x = c.amplitudes(cb.symbols(5));
            let ch = awgn_transmit(&x, 0.9, &mut rng).unwrap();
            let l = dm.frame_llrs(&ch.y, &ch.h, 0.9);
            let a = cb.bdec(&l).unwrap();
            let scaled: Vec<f64> = l.iter().map(|v| v * 3.7).collect();
            assert_eq!(cb.bdec(&scaled).unwrap().info, a.info);
        }
    }

    #[test]
    fn delta_sign_matches_decoder_metrics() {
        let c = g(Labeling::G4);
        let x = vec![0, 3, 2, 1];
        let xh = vec![3, 2, 1, 0];
        let mut rng = derive_trial_rng(22, 0);
        for _ in 0..1000 {
            let ch = awgn_transmit(&c.amplitudes(&x), 1.5, &mut rng).unwrap();
            let delta: f64 = (0..4).map(|k| smd_sdec(c.point(x[k]), c.point(xh[k]), ch.y[k])).sum();
            let diff = sdec_metric(&c, &xh, &ch.y, &ch.h) - sdec_metric(&c, &x, &ch.y, &ch.h);
            assert_eq!(delta.signum(), diff.signum());
            assert!((delta - diff).abs() < 1e-9 * diff.abs().max(1.0));
        }
    }

    fn viterbi_vs_exhaustive(
        code: &ConvCode,
        c: &Constellation,
        info_steps: usize,
        sigma: f64,
        rayleigh: bool,
        seed: u64,
    ) {
        let frame = code.frame(info_steps, true);
        let cb = Codebook::from_code(&frame, c, 12).unwrap();
        let vd = ViterbiDecoder::new(code, c, info_steps, true).unwrap();
        let dm = Demapper::new(c);
        for trial in 0..1000 {
            let mut rng = derive_trial_rng(seed, trial);
            let word = (trial as usize * 7919) % cb.len();
            let x = c.amplitudes(cb.symbols(word));
            let ch = if rayleigh {
                rayleigh_transmit(&x, sigma, &mut rng).unwrap()
            } else {
                awgn_transmit(&x, sigma, &mut rng).unwrap()
            };
            let es = cb.sdec(&ch.y, &ch.h).unwrap();
            let vs = vd.sdec(&ch.y, &ch.h).unwrap();
            assert_eq!(es.info, vs.info);
            assert!((es.metric - vs.metric).abs() < 1e-9 * es.metric.max(1.0));
            let l = dm.frame_llrs(&ch.y, &ch.h, sigma);
            let eb = cb.bdec(&l).unwrap();
            let vb = vd.bdec(&l).unwrap();
            assert_eq!(eb.info, vb.info);
            assert!((eb.metric - vb.metric).abs() < 1e-9 * eb.metric.abs().max(1.0));
        }
    }

    #[test]
    fn viterbi_equals_exhaustive_4pam() {
        let c = g(Labeling::G1);
        viterbi_vs_exhaustive(&best_rate_half_code(2).unwrap(), &c, 10, 1.0, false, 31);
        viterbi_vs_exhaustive(&best_rate_half_code(4).unwrap(), &g(Labeling::G3), 8, 0.8, true, 32);
    }

    #[test]
    fn viterbi_equals_exhaustive_8pam() {
        let c = Constellation::make_pam(3, Labeling::Brgc, 1.0).unwrap();
        let ungerboeck = ConvCode::from_octal("1,1,0;0,23,27").unwrap();
        viterbi_vs_exhaustive(&ungerboeck, &c, 6, 0.5, false, 33);
        let r13 = ConvCode::from_octal("25,33,37").unwrap();
        viterbi_vs_exhaustive(&r13, &c, 10, 0.6, false, 34);
    }

    #[test]
    fn viterbi_ties_pick_smallest_info() {
        let c = g(Labeling::G1);
        let code = best_rate_half_code(2).unwrap();
        let vd = ViterbiDecoder::new(&code, &c, 4, true).unwrap();
        let zeros = vec![0.0; vd.code_len()];
        let r = vd.bdec(&zeros).unwrap();
        assert!(r.tie);
        assert_eq!(r.info, vec![0; 4]);
        let again = vd.bdec(&zeros).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn viterbi_rejects_mismatched_grouping() {
        let c = Constellation::make_pam(3, Labeling::Brgc, 1.0).unwrap();
        assert!(ViterbiDecoder::new(&best_rate_half_code(2).unwrap(), &c, 4, true).is_err());
    }
}
