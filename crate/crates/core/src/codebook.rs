//! Binary linear codes: generator-matrix block codes and feedforward
//! rate-k/n convolutional encoders with zero-tail termination.
//!
//! Convolutional generators are written in octal, one row per input and one
//! column per output. Within a row every polynomial is right-aligned to the
//! row's register length `ν_i + 1` (the longest polynomial in that row) and
//! the most significant bit multiplies the current input. With this reading
//! `[7,5]` is `1+D+D²`, `1+D²` and `[3,2]` emits `11 10` for a single `1`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Default cap on `K` for exhaustive codeword enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

/// Common interface for codes that map `K` info bits to a binary codeword.
pub trait BinaryCode {
    /// Number of information bits `K`.
    fn info_len(&self) -> usize;
    /// Codeword length in bits.
    fn code_len(&self) -> usize;
    fn encode(&self, info: &[u8]) -> Result<Vec<u8>>;
}

/// Which label bit a stripe covers, for 4-PAM codewords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stripe {
    /// Odd positions (1-based), the first label bit `b1` of every symbol.
    B1,
    /// Even positions (1-based), the second label bit `b2`.
    B2,
}

impl Stripe {
    fn bit(self) -> usize {
        match self {
            Stripe::B1 => 0,
            Stripe::B2 => 1,
        }
    }

    fn covers(self, position: usize) -> bool {
        position % 2 == self.bit()
    }
}

/// Binary linear block code given by a `K × n` generator matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCode {
    rows: Vec<Vec<u8>>,
    n: usize,
}

impl BlockCode {
    /// Builds a code from generator rows; rows must be equal-length and
    /// linearly independent over GF(2).
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n == 0 {
            return Err(Error::InvalidCode("empty generator matrix".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: r.len(),
            });
        }
        if rows.iter().flatten().any(|&b| b > 1) {
            return Err(Error::InvalidCode("generator entries must be 0 or 1".into()));
        }
        if gf2_rank(&rows) != rows.len() {
            return Err(Error::InvalidCode("generator rows are linearly dependent".into()));
        }
        Ok(BlockCode { rows, n })
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// `u · G` over GF(2).
    pub fn encode_block(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                expected: self.rows.len(),
                actual: u.len(),
            });
        }
        let mut c = vec![0u8; self.n];
        for (row, _) in self.rows.iter().zip(u).filter(|(_, &b)| b & 1 == 1) {
            for (ci, &g) in c.iter_mut().zip(row) {
                *ci ^= g;
            }
        }
        Ok(c)
    }

    /// True iff some codeword has a 1 in every position of the stripe.
    ///
    /// Solved as the linear system `G_P^T u = 1` by Gaussian elimination, so
    /// no enumeration limit applies.
    pub fn has_all_ones_stripe(&self, stripe: Stripe) -> bool {
        let k = self.rows.len();
        // one equation per stripe position: Σ_i u_i G[i][p] = 1
        let mut eqs: Vec<Vec<u8>> = (0..self.n)
            .filter(|&p| stripe.covers(p))
            .map(|p| {
                let mut e: Vec<u8> = self.rows.iter().map(|r| r[p]).collect();
                e.push(1);
                e
            })
            .collect();
        let mut rank = 0;
        for col in 0..k {
            let Some(pivot) = (rank..eqs.len()).find(|&r| eqs[r][col] == 1) else {
                continue;
            };
            eqs.swap(rank, pivot);
            let pivot_row = eqs[rank].clone();
            for (r, eq) in eqs.iter_mut().enumerate() {
                if r != rank && eq[col] == 1 {
                    for (a, b) in eq.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
        // inconsistent iff a zero row has right-hand side 1
        !eqs[rank..].iter().any(|e| e[k] == 1)
    }
}

impl BinaryCode for BlockCode {
    fn info_len(&self) -> usize {
        self.rows.len()
    }

    fn code_len(&self) -> usize {
        self.n
    }

    fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        self.encode_block(info)
    }
}

fn gf2_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] == 1) else {
            continue;
        };
        m.swap(rank, p);
        let (head, tail) = m.split_at_mut(rank + 1);
        let pr = &head[rank];
        for row in tail.iter_mut().filter(|row| row[col] == 1) {
            for (a, b) in row.iter_mut().zip(pr) {
                *a ^= b;
            }
        }
        rank += 1;
    }
    rank
}

/// Iterator over all `2^K` codewords, info vectors in lexicographic order.
pub struct Codewords<'a, C: BinaryCode + ?Sized> {
    code: &'a C,
    next: u64,
    end: u64,
}

impl<C: BinaryCode + ?Sized> Iterator for Codewords<'_, C> {
    /// `(info, codeword)`
    type Item = (Vec<u8>, Vec<u8>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let k = self.code.info_len();
        let u = int_to_bits(self.next, k);
        self.next += 1;
        let c = self.code.encode(&u).expect("info length matches code");
        Some((u, c))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

/// Enumerates all codewords when `K ≤ limit`.
pub fn enumerate_codewords<C: BinaryCode + ?Sized>(code: &C, limit: usize) -> Result<Codewords<'_, C>> {
    let k = code.info_len();
    if k > limit || k >= 64 {
        return Err(Error::LimitExceeded {
            what: "information bits for enumeration",
            value: k,
            limit,
        });
    }
    Ok(Codewords {
        code,
        next: 0,
        end: 1u64 << k,
    })
}

/// `value` as `len` bits, MSB first.
pub fn int_to_bits(value: u64, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((value >> (len - 1 - i)) & 1) as u8).collect()
}

/// Feedforward convolutional code with `k` inputs and `n` outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvCode {
    /// `gens[i][j]`: polynomial from input `i` to output `j`, bit `ν_i` = current input.
    gens: Vec<Vec<u32>>,
    memories: Vec<usize>,
}

impl ConvCode {
    /// Builds a code from a `k × n` matrix of generator polynomials (as integers).
    pub fn new(gens: Vec<Vec<u32>>) -> Result<Self> {
        let n = gens.first().map_or(0, Vec::len);
        if gens.is_empty() || n == 0 {
            return Err(Error::InvalidCode("empty generator matrix".into()));
        }
        if gens.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCode("generator rows differ in length".into()));
        }
        let mut memories = Vec::with_capacity(gens.len());
        for row in &gens {
            let len = row.iter().map(|g| 32 - g.leading_zeros()).max().unwrap_or(0) as usize;
            if len == 0 {
                return Err(Error::InvalidCode("generator row is all zero".into()));
            }
            memories.push(len - 1);
        }
        if n == 2 && gens.len() == 1 && gens[0].contains(&0) {
            return Err(Error::InvalidCode("rate-1/2 generators must both be nonzero".into()));
        }
        let total: usize = memories.iter().sum();
        if total > 20 {
            return Err(Error::LimitExceeded {
                what: "total encoder memory",
                value: total,
                limit: 20,
            });
        }
        Ok(ConvCode { gens, memories })
    }

    /// Parses octal polynomials such as `7,5` or `1,1,0;0,23,27`.
    pub fn from_octal(s: &str) -> Result<Self> {
        let gens = s
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|g| {
                        u32::from_str_radix(g.trim(), 8)
                            .map_err(|_| Error::Parse(format!("bad octal polynomial '{}'", g.trim())))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(gens)
    }

    pub fn k(&self) -> usize {
        self.gens.len()
    }

    pub fn n(&self) -> usize {
        self.gens[0].len()
    }

    pub fn generators(&self) -> &[Vec<u32>] {
        &self.gens
    }

    /// Register length minus one, per input.
    pub fn memories(&self) -> &[usize] {
        &self.memories
    }

    /// Total memory `ν = Σ ν_i`; the trellis has `2^ν` states.
    pub fn total_memory(&self) -> usize {
        self.memories.iter().sum()
    }

    /// Zero-tail length in trellis steps, `max ν_i`.
    pub fn tail_steps(&self) -> usize {
        self.memories.iter().copied().max().unwrap_or(0)
    }

    /// Octal notation, rows separated by `;`.
    pub fn to_octal(&self) -> String {
        self.gens
            .iter()
            .map(|r| r.iter().map(|g| format!("{g:o}")).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Encodes `u` (length a multiple of `k`, input `i` of step `t` at
    /// `u[t*k + i]`). With `terminated`, `tail_steps()` all-zero input steps
    /// are appended and their outputs included.
    pub fn encode_conv(&self, u: &[u8], terminated: bool) -> Result<Vec<u8>> {
        let k = self.k();
        if !u.len().is_multiple_of(k) {
            return Err(Error::LengthMismatch {
                expected: u.len().next_multiple_of(k),
                actual: u.len(),
            });
        }
        let tail = if terminated { self.tail_steps() } else { 0 };
        let steps = u.len() / k + tail;
        let mut states = vec![0u32; k];
        let mut out = Vec::with_capacity(steps * self.n());
        for t in 0..steps {
            let mut bits = vec![0u8; self.n()];
            for (i, state) in states.iter_mut().enumerate() {
                let ui = u.get(t * k + i).copied().unwrap_or(0) as u32 & 1;
                let reg = (ui << self.memories[i]) | *state;
                for (j, b) in bits.iter_mut().enumerate() {
                    *b ^= ((reg & self.gens[i][j]).count_ones() & 1) as u8;
                }
                *state = reg >> 1;
            }
            out.extend_from_slice(&bits);
        }
        Ok(out)
    }

    pub fn trellis(&self) -> Trellis {
        Trellis::new(self)
    }

    /// A frame of `info_steps` input steps, optionally zero-tail terminated.
    pub fn frame(&self, info_steps: usize, terminated: bool) -> ConvFrame {
        ConvFrame {
            code: self.clone(),
            info_steps,
            terminated,
        }
    }

    /// Whether an input sequence of `steps` steps exists whose outputs are 1
    /// at every stripe position (unterminated span, 4-PAM bit grouping).
    pub fn has_all_ones_stripe(&self, stripe: Stripe, steps: usize) -> bool {
        self.trellis().stripe_feasible(stripe, steps, false)
    }
}

impl fmt::Display for ConvCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_octal())
    }
}

/// Generator pair `(g1, g1 + g2)` turning an SP-labeled rate-1/2 code into
/// the BRGC-labeled code with the same symbol sequences.
pub fn sp_to_brgc_generator(g1: u32, g2: u32) -> (u32, u32) {
    (g1, g1 ^ g2)
}

/// Rate-1/2 codes with memory 1..=8 (octal).
pub const BEST_RATE_HALF_OCTAL: [(u32, u32); 8] = [
    (0o3, 0o2),
    (0o7, 0o5),
    (0o13, 0o17),
    (0o23, 0o33),
    (0o55, 0o51),
    (0o107, 0o135),
    (0o313, 0o235),
    (0o677, 0o515),
];

/// The tabulated rate-1/2 code of memory `nu`.
pub fn best_rate_half_code(nu: usize) -> Result<ConvCode> {
    if !(1..=8).contains(&nu) {
        return Err(Error::InvalidCode(format!("no tabulated code for memory {nu}")));
    }
    let (g1, g2) = BEST_RATE_HALF_OCTAL[nu - 1];
    ConvCode::new(vec![vec![g1, g2]])
}

/// A convolutional code seen as a block code over a fixed number of steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvFrame {
    pub code: ConvCode,
    pub info_steps: usize,
    pub terminated: bool,
}

impl ConvFrame {
    pub fn total_steps(&self) -> usize {
        self.info_steps + if self.terminated { self.code.tail_steps() } else { 0 }
    }
}

impl BinaryCode for ConvFrame {
    fn info_len(&self) -> usize {
        self.info_steps * self.code.k()
    }

    fn code_len(&self) -> usize {
        self.total_steps() * self.code.n()
    }

    fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_len() {
            return Err(Error::LengthMismatch {
                expected: self.info_len(),
                actual: info.len(),
            });
        }
        self.code.encode_conv(info, self.terminated)
    }
}

/// Time-invariant trellis of a feedforward encoder.
///
/// States pack the per-input shift registers, input 0 in the most
/// significant bits. Inputs and outputs are integers with the first
/// input/output bit as MSB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    k: usize,
    n: usize,
    states: usize,
    tail: usize,
    next: Vec<u32>,
    output: Vec<u32>,
}

impl Trellis {
    pub fn new(code: &ConvCode) -> Self {
        let k = code.k();
        let n = code.n();
        let mem = code.memories();
        let states = 1usize << code.total_memory();
        let inputs = 1usize << k;
        let mut next = vec![0; states * inputs];
        let mut output = vec![0; states * inputs];
        for s in 0..states {
            // unpack per-input registers
            let mut regs = vec![0u32; k];
            let mut shift = 0;
            for i in (0..k).rev() {
                regs[i] = ((s >> shift) & ((1 << mem[i]) - 1)) as u32;
                shift += mem[i];
            }
            for u in 0..inputs {
                let mut out = 0u32;
                let mut ns = 0usize;
                for i in 0..k {
                    let ui = ((u >> (k - 1 - i)) & 1) as u32;
                    let reg = (ui << mem[i]) | regs[i];
                    for j in 0..n {
                        let b = (reg & code.generators()[i][j]).count_ones() & 1;
                        out ^= b << (n - 1 - j);
                    }
                    ns = (ns << mem[i]) | (reg >> 1) as usize;
                }
                next[s * inputs + u] = ns as u32;
                output[s * inputs + u] = out;
            }
        }
        Trellis {
            k,
            n,
            states,
            tail: code.tail_steps(),
            next,
            output,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_inputs(&self) -> usize {
        1 << self.k
    }

    pub fn tail_steps(&self) -> usize {
        self.tail
    }

    pub fn next_state(&self, state: usize, input: usize) -> usize {
        self.next[state * self.num_inputs() + input] as usize
    }

    /// Output bits of the branch, first output as MSB.
    pub fn output(&self, state: usize, input: usize) -> u32 {
        self.output[state * self.num_inputs() + input]
    }

    /// Walks the trellis for `inputs` (one integer per step) from state 0.
    pub fn encode_steps(&self, inputs: &[usize]) -> Vec<u8> {
        let mut s = 0;
        let mut out = Vec::with_capacity(inputs.len() * self.n);
        for &u in inputs {
            let o = self.output(s, u);
            out.extend((0..self.n).map(|j| ((o >> (self.n - 1 - j)) & 1) as u8));
            s = self.next_state(s, u);
        }
        out
    }

    /// DP feasibility of an all-ones stripe over `steps` info steps
    /// (plus the zero tail when `terminated`). Bits are grouped in pairs
    /// (4-PAM) across the whole frame.
    pub fn stripe_feasible(&self, stripe: Stripe, steps: usize, terminated: bool) -> bool {
        let total = steps + if terminated { self.tail } else { 0 };
        let mut reach = vec![false; self.states];
        reach[0] = true;
        for t in 0..total {
            let inputs: Vec<usize> = if t < steps {
                (0..self.num_inputs()).collect()
            } else {
                vec![0]
            };
            let mut nr = vec![false; self.states];
            for s in (0..self.states).filter(|&s| reach[s]) {
                for &u in &inputs {
                    let o = self.output(s, u);
                    let ok = (0..self.n).all(|j| !stripe.covers(t * self.n + j) || (o >> (self.n - 1 - j)) & 1 == 1);
                    if ok {
                        nr[self.next_state(s, u)] = true;
                    }
                }
            }
            reach = nr;
            if !reach.iter().any(|&r| r) {
                return false;
            }
        }
        if terminated {
            reach[0]
        } else {
            true
        }
    }
}

/// A code as given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSpec {
    /// `cc:<octal>,<octal>[;...]`
    Conv(ConvCode),
    /// `block:<hex row>,<hex row>,...`; each hex digit is four bits, MSB first.
    /// An optional `/n` suffix keeps only the first `n` columns.
    Block(BlockCode),
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("cc:") {
            return Ok(CodeSpec::Conv(ConvCode::from_octal(rest)?));
        }
        if let Some(rest) = s.strip_prefix("block:") {
            let (rows, n) = match rest.split_once('/') {
                Some((r, n)) => (
                    r,
                    Some(
                        n.parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad length '{n}'")))?,
                    ),
                ),
                None => (rest, None),
            };
            let mut parsed = Vec::new();
            for row in rows.split(',') {
                let mut bits = Vec::new();
                for ch in row.trim().chars() {
                    let v = ch
                        .to_digit(16)
                        .ok_or_else(|| Error::Parse(format!("bad hex digit '{ch}'")))?;
                    bits.extend(int_to_bits(v as u64, 4));
                }
                if let Some(n) = n {
                    if n > bits.len() {
                        return Err(Error::Parse(format!("length {n} exceeds row '{row}'")));
                    }
                    bits.truncate(n);
                }
                parsed.push(bits);
            }
            return Ok(CodeSpec::Block(BlockCode::new(parsed)?));
        }
        Err(Error::Parse(format!("unknown code spec '{s}'")))
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Conv(c) => write!(f, "cc:{}", c.to_octal()),
            CodeSpec::Block(b) => {
                let rows: Vec<String> = b
                    .rows()
                    .iter()
                    .map(|r| {
                        let mut padded = r.clone();
                        padded.resize(r.len().next_multiple_of(4), 0);
                        padded
                            .chunks(4)
                            .map(|c| format!("{:x}", c.iter().fold(0, |a, &b| (a << 1) | b)))
                            .collect()
                    })
                    .collect();
                let n = b.code_len();
                if n % 4 == 0 {
                    write!(f, "block:{}", rows.join(","))
                } else {
                    write!(f, "block:{}/{n}", rows.join(","))
                }
            }
        }
    }
}
