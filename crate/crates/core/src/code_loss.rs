//! Code-level asymptotic loss of B-DEC against S-DEC.
//!
//! The loss of a CM code is `20 log10(min a^S / min a^B)`, both minima taken
//! over distinct codeword pairs. Distances depend on the pair itself and not
//! only on its difference, so the minima come either from enumerating every
//! pair or from a dynamic program over the product trellis of two encoder
//! paths. Both reduce a pair to its profile `(β, w_c)`, and every comparison
//! between profiles is done in exact integer arithmetic:
//! `a^S² = β + 8 w_c`, `a^B² = (β + 2 w_c)² / β`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::{loss_db, weight_profile, MAX_LOSS_DB};
use crate::codebook::{BinaryCode, BlockCode, ConvCode, Stripe, Trellis};
use crate::constellation::{format_symbols, Constellation, Labeling};
use crate::decoder::Codebook;
use crate::{Error, Result};

/// Largest `K` accepted by [`code_loss_exhaustive`].
pub const EXHAUSTIVE_LIMIT: usize = 12;
/// Default corner cap of the trellis search.
pub const DEFAULT_WC_CAP: u32 = 8;
/// The cap is doubled up to this value before the result is reported as a
/// lower bound.
pub const MAX_WC_CAP: u32 = 64;
/// Product-trellis cells (state pairs times corner levels) allowed.
pub const DP_CELL_LIMIT: usize = 1 << 24;

/// Default number of info steps for a trellis search: `10 (ν + 1)`.
pub fn default_frame(cc: &ConvCode) -> usize {
    10 * (cc.total_memory() + 1)
}

/// A codeword pair: transmitted and competitor symbol sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<usize>,
    pub xhat: Vec<usize>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] vs [{}]", format_symbols(&self.x), format_symbols(&self.xhat))
    }
}

/// An achievable pair profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub beta: u32,
    pub wc: u32,
    pub witness: Option<Witness>,
}

impl ParetoPoint {
    /// `a^S²`.
    pub fn sdec_sq(&self) -> u64 {
        self.beta as u64 + 8 * self.wc as u64
    }

    pub fn a_sdec(&self) -> f64 {
        (self.sdec_sq() as f64).sqrt()
    }

    pub fn a_bdec(&self) -> f64 {
        (self.beta as f64 + 2.0 * self.wc as f64) / (self.beta as f64).sqrt()
    }

    fn key(&self) -> (u32, u32) {
        (self.beta, self.wc)
    }
}

/// Exact ordering of `a^B` between two profiles (`β > 0`).
pub fn cmp_bdec(a: (u32, u32), b: (u32, u32)) -> Ordering {
    let num = |p: (u32, u32)| {
        let t = p.0 as u128 + 2 * p.1 as u128;
        t * t
    };
    (num(a) * b.0 as u128).cmp(&(num(b) * a.0 as u128))
}

/// Exact ordering of `a^S`.
pub fn cmp_sdec(a: (u32, u32), b: (u32, u32)) -> Ordering {
    (a.0 as u64 + 8 * a.1 as u64).cmp(&(b.0 as u64 + 8 * b.1 as u64))
}

/// Pareto-minimal profiles of a set (no other point has `β' ≤ β` and
/// `w_c' ≤ w_c` with one strict), sorted by `w_c`.
pub fn pareto_frontier(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut sorted: Vec<&ParetoPoint> = points.iter().collect();
    sorted.sort_by_key(|p| (p.wc, p.beta));
    let mut out: Vec<ParetoPoint> = Vec::new();
    for p in sorted {
        if out.last().is_some_and(|q| q.wc == p.wc) {
            continue;
        }
        if out.iter().all(|q| q.beta > p.beta) {
            out.push(p.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Exhaustive,
    TrellisDp,
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMethod::Exhaustive => "exhaustive",
            SearchMethod::TrellisDp => "trellis-DP",
        })
    }
}

/// Frame searched by the trellis method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameInfo {
    pub info_steps: usize,
    pub total_steps: usize,
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeLossReport {
    pub method: SearchMethod,
    pub labeling: String,
    pub frame: Option<FrameInfo>,
    pub min_a_sdec: f64,
    pub min_a_bdec: f64,
    pub loss_db: f64,
    /// Both minima are exactly equal (rational comparison).
    pub zero_loss: bool,
    /// Profile attaining `min a^S` (its `w_c` is the corner count at the minimum).
    pub best_sdec: ParetoPoint,
    pub best_bdec: ParetoPoint,
    pub frontier: Vec<ParetoPoint>,
    /// Corner cap of the trellis search, after escalation.
    pub wc_cap: Option<u32>,
    /// Paths above the cap were dropped, so the frontier may miss points.
    pub frontier_truncated: bool,
    /// The minima could not be certified below the final cap.
    pub lower_bound: bool,
}

impl CodeLossReport {
    fn from_points(
        method: SearchMethod,
        c: &Constellation,
        points: Vec<ParetoPoint>,
        frame: Option<FrameInfo>,
    ) -> Result<Self> {
        let best_sdec = points
            .iter()
            .min_by(|a, b| cmp_sdec(a.key(), b.key()))
            .cloned()
            .ok_or(Error::IdenticalCodewords)?;
        let best_bdec = points
            .iter()
            .min_by(|a, b| cmp_bdec(a.key(), b.key()))
            .cloned()
            .ok_or(Error::IdenticalCodewords)?;
        // a^S² == a^B² exactly
        let t = best_bdec.beta as u128 + 2 * best_bdec.wc as u128;
        let zero_loss = best_sdec.sdec_sq() as u128 * best_bdec.beta as u128 == t * t;
        let loss = if zero_loss {
            0.0
        } else {
            20.0 * (best_sdec.a_sdec() / best_bdec.a_bdec()).log10()
        };
        Ok(CodeLossReport {
            method,
            labeling: c.labeling().to_string(),
            frame,
            min_a_sdec: best_sdec.a_sdec(),
            min_a_bdec: best_bdec.a_bdec(),
            loss_db: loss,
            zero_loss,
            frontier: pareto_frontier(&points),
            best_sdec,
            best_bdec,
            wc_cap: None,
            frontier_truncated: false,
            lower_bound: false,
        })
    }
}

fn require_four_pam(c: &Constellation) -> Result<()> {
    if c.bits() == 2 {
        Ok(())
    } else {
        Err(Error::RequiresFourPam(c.bits()))
    }
}

/// Every achievable profile of a code with its first witness pair, by
/// enumerating all codeword pairs.
pub fn exhaustive_profiles<C: BinaryCode + ?Sized>(code: &C, c: &Constellation) -> Result<Vec<ParetoPoint>> {
    require_four_pam(c)?;
    if code.info_len() > EXHAUSTIVE_LIMIT {
        return Err(Error::LimitExceeded {
            what: "information bits for exhaustive pair search",
            value: code.info_len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let book = Codebook::from_code(code, c, EXHAUSTIVE_LIMIT)?;
    let mut seen: BTreeMap<(u32, u32), Witness> = BTreeMap::new();
    for i in 0..book.len() {
        for j in i + 1..book.len() {
            // profiles are symmetric in the pair, so unordered pairs suffice
            let p = weight_profile(c, book.symbols(i), book.symbols(j))?;
            if p.is_zero() {
                continue;
            }
            seen.entry((p.beta_int(), p.wc)).or_insert_with(|| Witness {
                x: book.symbols(i).to_vec(),
                xhat: book.symbols(j).to_vec(),
            });
        }
    }
    Ok(seen
        .into_iter()
        .map(|((beta, wc), w)| ParetoPoint {
            beta,
            wc,
            witness: Some(w),
        })
        .collect())
}

/// Loss of a code by enumerating all codeword pairs (`K ≤ 12`).
pub fn code_loss_exhaustive<C: BinaryCode + ?Sized>(code: &C, c: &Constellation) -> Result<CodeLossReport> {
    let points = exhaustive_profiles(code, c)?;
    CodeLossReport::from_points(SearchMethod::Exhaustive, c, points, None)
}

/// Achievable `β` values of one DP cell: exact below 128, least value above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BetaSet {
    bits: u128,
    over: u32,
}

const NO_OVER: u32 = u32::MAX;

impl BetaSet {
    const EMPTY: BetaSet = BetaSet { bits: 0, over: NO_OVER };

    fn is_empty(&self) -> bool {
        self.bits == 0 && self.over == NO_OVER
    }

    fn shifted(&self, d: u32) -> BetaSet {
        if d == 0 {
            return *self;
        }
        debug_assert!(d < 128);
        let mut over = if self.over == NO_OVER { NO_OVER } else { self.over + d };
        let lost = self.bits >> (128 - d);
        if lost != 0 {
            over = over.min(lost.trailing_zeros() + 128);
        }
        BetaSet {
            bits: self.bits << d,
            over,
        }
    }

    fn merge(&mut self, other: &BetaSet) {
        self.bits |= other.bits;
        self.over = self.over.min(other.over);
    }

    fn values(&self) -> impl Iterator<Item = u32> + '_ {
        (0..128u32)
            .filter(|&b| self.bits >> b & 1 == 1)
            .chain((self.over != NO_OVER).then_some(self.over))
    }
}

/// Profiles reachable in a trellis search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrellisProfiles {
    pub frame: FrameInfo,
    pub wc_cap: u32,
    /// `(β, w_c)` with `β > 0`: every achievable `β < 128` plus the least
    /// achievable `β ≥ 128`, per corner count.
    pub profiles: Vec<(u32, u32)>,
    /// Some path needed more than `wc_cap` corners and was dropped.
    pub cap_exceeded: bool,
}

/// Per-step `(Δβ, Δw_c)` of two output words.
fn branch_table(trellis: &Trellis, c: &Constellation) -> Vec<(u32, u32)> {
    let n = trellis.n();
    let outs = 1usize << n;
    let mut table = vec![(0, 0); outs * outs];
    for o1 in 0..outs {
        for o2 in 0..outs {
            let (mut db, mut dc) = (0, 0);
            for i in 0..n / 2 {
                let l1 = (o1 >> (n - 2 - 2 * i)) & 3;
                let l2 = (o2 >> (n - 2 - 2 * i)) & 3;
                db += match l1 ^ l2 {
                    0 => 0,
                    3 => 4,
                    _ => 1,
                };
                let s1 = c.symbol_for_label(l1 as u8);
                let s2 = c.symbol_for_label(l2 as u8);
                if s1.min(s2) == 0 && s1.max(s2) == 3 {
                    dc += 1;
                }
            }
            table[o1 * outs + o2] = (db, dc);
        }
    }
    table
}

/// Product-trellis search for all achievable pair profiles of a
/// convolutional code over `info_steps` steps.
///
/// Cells are indexed by (reference state, competitor state, corners so far)
/// and hold the set of achievable `β`. Identical codeword pairs are exactly
/// the paths with `β = 0` and are dropped at the end.
pub fn min_profiles_trellis(
    cc: &ConvCode,
    c: &Constellation,
    info_steps: usize,
    terminated: bool,
    wc_cap: u32,
) -> Result<TrellisProfiles> {
    require_four_pam(c)?;
    if !cc.n().is_multiple_of(c.bits()) {
        return Err(Error::InvalidCode(format!(
            "{} output bits per step do not fill whole {}-bit symbols",
            cc.n(),
            c.bits()
        )));
    }
    if info_steps == 0 {
        return Err(Error::InvalidConfig("frame needs at least one info step".into()));
    }
    let trellis = cc.trellis();
    let s = trellis.num_states();
    let levels = wc_cap as usize + 1;
    let cells = s * s * levels;
    if cells > DP_CELL_LIMIT {
        return Err(Error::LimitExceeded {
            what: "product-trellis cells",
            value: cells,
            limit: DP_CELL_LIMIT,
        });
    }
    let table = branch_table(&trellis, c);
    let outs = 1usize << trellis.n();
    let inputs = trellis.num_inputs();
    let total = info_steps + if terminated { trellis.tail_steps() } else { 0 };

    let mut cur = vec![BetaSet::EMPTY; cells];
    cur[0] = BetaSet { bits: 1, over: NO_OVER };
    let mut live = vec![0usize];
    let mut cap_exceeded = false;
    for t in 0..total {
        let n_in = if t < info_steps { inputs } else { 1 };
        let mut next = vec![BetaSet::EMPTY; cells];
        let mut touched = vec![false; s * s];
        let mut next_live = Vec::new();
        for &sp in &live {
            let (s1, s2) = (sp / s, sp % s);
            for u1 in 0..n_in {
                let o1 = trellis.output(s1, u1) as usize;
                let n1 = trellis.next_state(s1, u1);
                for u2 in 0..n_in {
                    let o2 = trellis.output(s2, u2) as usize;
                    let nsp = n1 * s + trellis.next_state(s2, u2);
                    let (db, dc) = table[o1 * outs + o2];
                    for wc in 0..levels {
                        let cell = &cur[sp * levels + wc];
                        if cell.is_empty() {
                            continue;
                        }
                        let nwc = wc + dc as usize;
                        if nwc >= levels {
                            cap_exceeded = true;
                            continue;
                        }
                        next[nsp * levels + nwc].merge(&cell.shifted(db));
                        if !touched[nsp] {
                            touched[nsp] = true;
                            next_live.push(nsp);
                        }
                    }
                }
            }
        }
        next_live.sort_unstable();
        cur = next;
        live = next_live;
    }

    let finals: Vec<usize> = if terminated { vec![0] } else { live };
    let mut acc = vec![BetaSet::EMPTY; levels];
    for sp in finals {
        for (wc, a) in acc.iter_mut().enumerate() {
            a.merge(&cur[sp * levels + wc]);
        }
    }
    let mut profiles = Vec::new();
    for (wc, a) in acc.iter().enumerate() {
        profiles.extend(a.values().filter(|&b| b > 0).map(|b| (b, wc as u32)));
    }
    profiles.sort_unstable_by_key(|&(b, wc)| (wc, b));
    Ok(TrellisProfiles {
        frame: FrameInfo {
            info_steps,
            total_steps: total,
            terminated,
        },
        wc_cap,
        profiles,
        cap_exceeded,
    })
}

/// Dropped paths have `w_c > cap`, hence `a^S² ≥ 9(cap+1)` and
/// `a^B² ≥ 8(cap+1)`; minima below both bounds are exact.
fn minima_certified(report: &CodeLossReport, cap: u32) -> bool {
    let bound = cap as u128 + 1;
    let b = &report.best_bdec;
    let t = b.beta as u128 + 2 * b.wc as u128;
    report.best_sdec.sdec_sq() as u128 <= 9 * bound && t * t <= 8 * bound * b.beta as u128
}

/// Loss of a zero-tail terminated convolutional code by the product-trellis
/// search, doubling the corner cap while dropped paths could still matter.
pub fn code_loss_trellis(cc: &ConvCode, c: &Constellation, info_steps: usize, wc_cap: u32) -> Result<CodeLossReport> {
    let mut cap = wc_cap;
    loop {
        let tp = min_profiles_trellis(cc, c, info_steps, true, cap)?;
        let points: Vec<ParetoPoint> = tp
            .profiles
            .iter()
            .map(|&(beta, wc)| ParetoPoint {
                beta,
                wc,
                witness: None,
            })
            .collect();
        let mut report = CodeLossReport::from_points(SearchMethod::TrellisDp, c, points, Some(tp.frame))?;
        report.wc_cap = Some(cap);
        report.frontier_truncated = tp.cap_exceeded;
        let certified = !tp.cap_exceeded || minima_certified(&report, cap);
        if certified || cap >= MAX_WC_CAP {
            report.lower_bound = !certified;
            return Ok(report);
        }
        cap = (cap.max(1) * 2).min(MAX_WC_CAP);
    }
}

/// One distinct `a^S` value of the distance spectrum and the profiles that
/// attain it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumTerm {
    pub sdec_sq: u64,
    pub profiles: Vec<(u32, u32)>,
}

impl SpectrumTerm {
    pub fn all_wc_zero(&self) -> bool {
        self.profiles.iter().all(|p| p.1 == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub code: String,
    pub labeling: String,
    pub frame: FrameInfo,
    /// Both all-ones stripes exist on the searched span.
    pub applicable: bool,
    pub terms: Vec<SpectrumTerm>,
    /// Every profile among the listed terms has `w_c = 0`.
    pub passed: bool,
    pub note: String,
}

/// Checks that the first `terms` distinct `a^S` values of a convolutional
/// code are attained only by pairs without corners. The search runs on the
/// unterminated span of `info_steps` steps.
pub fn spectrum_prefix_check(
    cc: &ConvCode,
    c: &Constellation,
    terms: usize,
    info_steps: usize,
) -> Result<SpectrumReport> {
    let trellis = cc.trellis();
    let applicable = [Stripe::B1, Stripe::B2]
        .iter()
        .all(|&st| trellis.stripe_feasible(st, info_steps, false));
    let mut cap = DEFAULT_WC_CAP;
    let (tp, found) = loop {
        let tp = min_profiles_trellis(cc, c, info_steps, false, cap)?;
        let mut by_dist: BTreeMap<u64, Vec<(u32, u32)>> = BTreeMap::new();
        for &(b, wc) in &tp.profiles {
            by_dist.entry(b as u64 + 8 * wc as u64).or_default().push((b, wc));
        }
        let found: Vec<SpectrumTerm> = by_dist
            .into_iter()
            .take(terms)
            .map(|(sdec_sq, profiles)| SpectrumTerm { sdec_sq, profiles })
            .collect();
        // dropped paths have a^S² ≥ 9(cap+1)
        let complete =
            !tp.cap_exceeded || found.len() == terms && found.last().is_some_and(|t| t.sdec_sq < 9 * (cap as u64 + 1));
        if complete || cap >= MAX_WC_CAP {
            break (tp, found);
        }
        cap *= 2;
    };
    let passed = applicable && found.len() == terms && found.iter().all(SpectrumTerm::all_wc_zero);
    let note = if applicable {
        "searched on the unterminated span".to_string()
    } else {
        "not applicable: the code lacks an all-ones stripe".to_string()
    };
    Ok(SpectrumReport {
        code: cc.to_string(),
        labeling: c.labeling().to_string(),
        frame: tp.frame,
        applicable,
        terms: found,
        passed,
        note,
    })
}

/// Which of `G1`..`G4` a 4-PAM labeling equals, if any.
pub fn gray_class(c: &Constellation) -> Option<Labeling> {
    if c.bits() != 2 {
        return None;
    }
    Labeling::GRAY_4PAM
        .into_iter()
        .find(|g| g.labels(2).is_ok_and(|q| q == c.labels()))
}

/// A code whose loss is checked: a block code, or a convolutional code on a
/// zero-tail frame of `info_steps` steps.
#[derive(Debug, Clone, Copy)]
pub enum CodeUnderTest<'a> {
    Block(&'a BlockCode),
    Conv { code: &'a ConvCode, info_steps: usize },
}

impl CodeUnderTest<'_> {
    fn has_stripe(&self, stripe: Stripe) -> bool {
        match self {
            CodeUnderTest::Block(b) => b.has_all_ones_stripe(stripe),
            // unterminated span
            CodeUnderTest::Conv { code, info_steps } => code.trellis().stripe_feasible(stripe, *info_steps, false),
        }
    }

    pub fn loss(&self, c: &Constellation) -> Result<CodeLossReport> {
        match self {
            CodeUnderTest::Block(b) => code_loss_exhaustive(*b, c),
            CodeUnderTest::Conv { code, info_steps } => code_loss_trellis(code, c, *info_steps, DEFAULT_WC_CAP),
        }
    }

    fn name(&self) -> String {
        match self {
            CodeUnderTest::Block(b) => format!("block code K={} n={}", b.info_len(), b.code_len()),
            CodeUnderTest::Conv { code, info_steps } => format!("cc:{} over {info_steps} steps", code.to_octal()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub name: String,
    /// The hypothesis holds for this code and labeling.
    pub applicable: bool,
    /// Conclusion holds (vacuously true when not applicable).
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub code: String,
    pub labeling: String,
    pub loss: CodeLossReport,
    pub stripe_b1: bool,
    pub stripe_b2: bool,
    pub checks: Vec<TheoremCheck>,
}

impl TheoremReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&TheoremCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, applicable: bool, holds: bool, detail: String) -> TheoremCheck {
    TheoremCheck {
        name: name.to_string(),
        applicable,
        passed: !applicable || holds,
        detail,
    }
}

/// Runs the zero-loss checks on one code and labeling:
/// `bound` (loss within the pairwise maximum), `theorem2` (G3/G4),
/// `theorem3` (G1 with a `b2` stripe, G2 with a `b1` stripe), `theorem4`
/// (rate-1/2 convolutional codes have both stripes and no loss) and
/// `corollary2` (both stripes give no loss and a corner-free frontier point).
pub fn verify_theorems(code: CodeUnderTest<'_>, c: &Constellation) -> Result<TheoremReport> {
    let loss = code.loss(c)?;
    let b1 = code.has_stripe(Stripe::B1);
    let b2 = code.has_stripe(Stripe::B2);
    let gray = gray_class(c);
    let zero = loss.zero_loss;
    let loss_txt = format!("loss {:.6} dB", loss.loss_db);
    let mut checks = vec![check(
        "bound",
        true,
        loss.loss_db <= MAX_LOSS_DB + 1e-9,
        format!("{loss_txt}, bound {MAX_LOSS_DB:.6} dB"),
    )];

    let t2 = matches!(gray, Some(Labeling::G3 | Labeling::G4));
    checks.push(check("theorem2", t2, zero, loss_txt.clone()));

    let (t3, stripe_txt) = match gray {
        Some(Labeling::G1) => (b2, "b2 stripe"),
        Some(Labeling::G2) => (b1, "b1 stripe"),
        _ => (false, "G1/G2 only"),
    };
    let t3_detail = if t3 || !matches!(gray, Some(Labeling::G1 | Labeling::G2)) {
        format!("{stripe_txt}; {loss_txt}")
    } else {
        format!("hypothesis fails: no {stripe_txt}; {loss_txt}")
    };
    checks.push(check("theorem3", t3, zero, t3_detail));

    let t4 = gray.is_some() && matches!(code, CodeUnderTest::Conv { code, .. } if code.k() == 1 && code.n() == 2);
    checks.push(check(
        "theorem4",
        t4,
        b1 && b2 && zero,
        format!("stripes b1={b1} b2={b2} on the unterminated span; {loss_txt}"),
    ));

    let c2 = gray.is_some() && b1 && b2;
    let corner_free = loss.frontier.iter().any(|p| p.wc == 0);
    checks.push(check(
        "corollary2",
        c2,
        zero && corner_free,
        format!("w_c=0 frontier point: {corner_free}; {loss_txt}"),
    ));

    Ok(TheoremReport {
        code: code.name(),
        labeling: c.labeling().to_string(),
        loss,
        stripe_b1: b1,
        stripe_b2: b2,
        checks,
    })
}

/// A two-word code `{0, b}` under G1 and what its pair reaches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundWitness {
    pub bits: Vec<u8>,
    pub symbols: Vec<usize>,
    pub beta: u32,
    pub wc: u32,
    pub loss_db: f64,
    /// `β = 4 w_c`, the profile that attains the pairwise maximum.
    pub attains_bound: bool,
}

/// Second words of the two-word codes examined for the loss bound: the
/// published example `[1,0,0,1,0,1,1,1]` and `[1,0,0,1,0,1,0,1]`, which
/// attains it.
pub const BOUND_WITNESS_WORDS: [[u8; 8]; 2] = [[1, 0, 0, 1, 0, 1, 1, 1], [1, 0, 0, 1, 0, 1, 0, 1]];

pub fn bound_witnesses() -> Result<Vec<BoundWitness>> {
    let c = Constellation::make_pam(2, Labeling::G1, 1.0)?;
    BOUND_WITNESS_WORDS
        .iter()
        .map(|w| {
            let code = BlockCode::new(vec![w.to_vec()])?;
            let report = code_loss_exhaustive(&code, &c)?;
            let symbols = c.modulate(w)?;
            let p = &report.best_sdec;
            Ok(BoundWitness {
                bits: w.to_vec(),
                symbols,
                beta: p.beta,
                wc: p.wc,
                loss_db: loss_db(p.beta as f64, p.wc as f64),
                attains_bound: p.beta == 4 * p.wc,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::best_rate_half_code;

    fn g(l: Labeling) -> Constellation {
        Constellation::make_pam(2, l, 1.0).unwrap()
    }

    fn two_word(w: &[u8]) -> BlockCode {
        BlockCode::new(vec![w.to_vec()]).unwrap()
    }

    #[test]
    fn adversarial_two_word_codes() {
        let r = code_loss_exhaustive(&two_word(&[1, 0, 0, 1, 0, 1, 1, 1]), &g(Labeling::G1)).unwrap();
        assert_eq!((r.best_sdec.beta, r.best_sdec.wc), (7, 1));
        assert!((r.loss_db - 1.127).abs() < 5e-4, "{}", r.loss_db);
        let r = code_loss_exhaustive(&two_word(&[1, 0, 0, 1, 0, 1, 0, 1]), &g(Labeling::G1)).unwrap();
        assert_eq!(r.best_sdec.witness.as_ref().unwrap().xhat, vec![3, 1, 1, 1]);
        assert!((r.loss_db - MAX_LOSS_DB).abs() < 1e-12);
        assert!(!r.zero_loss);
    }

    #[test]
    fn bound_witness_pair() {
        let w = bound_witnesses().unwrap();
        assert_eq!(w[0].symbols, vec![3, 1, 1, 2]);
        assert_eq!((w[0].beta, w[0].wc, w[0].attains_bound), (7, 1, false));
        assert_eq!((w[1].beta, w[1].wc, w[1].attains_bound), (4, 1, true));
    }

    #[test]
    fn extended_hamming_all_gray() {
        let rows = vec![
            vec![1, 1, 1, 0, 0, 0, 0, 1],
            vec![1, 0, 0, 1, 1, 0, 0, 1],
            vec![0, 1, 0, 1, 0, 1, 0, 1],
            vec![1, 1, 0, 1, 0, 0, 1, 0],
        ];
        let code = BlockCode::new(rows).unwrap();
        for l in Labeling::GRAY_4PAM {
            let rep = verify_theorems(CodeUnderTest::Block(&code), &g(l)).unwrap();
            assert!(rep.stripe_b1 && rep.stripe_b2);
            assert!(rep.loss.zero_loss, "{l}");
            assert!(rep.all_passed(), "{l}: {:?}", rep.checks);
        }
    }

    #[test]
    fn adversarial_fails_theorem3_hypothesis() {
        let code = two_word(&[1, 0, 0, 1, 0, 1, 0, 1]);
        let rep = verify_theorems(CodeUnderTest::Block(&code), &g(Labeling::G1)).unwrap();
        let t3 = rep.check("theorem3").unwrap();
        assert!(!t3.applicable && t3.passed);
        assert!(rep.loss.loss_db > 1.2);
        assert!(rep.check("bound").unwrap().passed);
    }

    #[test]
    fn trellis_matches_exhaustive_on_75() {
        let cc = ConvCode::from_octal("7,5").unwrap();
        for l in Labeling::GRAY_4PAM {
            let c = g(l);
            let frame = cc.frame(8, true);
            let ex = exhaustive_profiles(&frame, &c).unwrap();
            let tp = min_profiles_trellis(&cc, &c, 8, true, 40).unwrap();
            assert!(!tp.cap_exceeded);
            let mut ex_keys: Vec<(u32, u32)> = ex.iter().map(|p| p.key()).collect();
            ex_keys.sort_unstable_by_key(|&(b, wc)| (wc, b));
            assert_eq!(tp.profiles, ex_keys, "{l}");
            let a = code_loss_exhaustive(&frame, &c).unwrap();
            let b = code_loss_trellis(&cc, &c, 8, DEFAULT_WC_CAP).unwrap();
            assert_eq!(a.best_sdec.key(), b.best_sdec.key());
            assert_eq!(cmp_bdec(a.best_bdec.key(), b.best_bdec.key()), Ordering::Equal);
            assert_eq!(a.zero_loss, b.zero_loss);
        }
    }

    #[test]
    fn table4_zero_loss_g1() {
        let c = g(Labeling::G1);
        for nu in 1..=5 {
            let cc = best_rate_half_code(nu).unwrap();
            let r = code_loss_trellis(&cc, &c, default_frame(&cc), DEFAULT_WC_CAP).unwrap();
            assert!(r.zero_loss && !r.lower_bound, "nu={nu}: {r:?}");
            assert_eq!(r.loss_db, 0.0);
        }
    }

    #[test]
    fn spectrum_prefix_75() {
        let cc = ConvCode::from_octal("7,5").unwrap();
        let r = spectrum_prefix_check(&cc, &g(Labeling::G1), 8, 30).unwrap();
        assert!(r.applicable);
        assert_eq!(r.terms.len(), 8);
        assert!(r.passed, "{:?}", r.terms);
    }

    #[test]
    fn beta_set_overflow() {
        let s = BetaSet {
            bits: 1 << 127 | 1 << 3,
            over: NO_OVER,
        }
        .shifted(4);
        assert_eq!(s.bits, 1 << 7);
        assert_eq!(s.over, 131);
        assert_eq!(s.values().collect::<Vec<_>>(), vec![7, 131]);
    }

    #[test]
    fn frontier_is_antichain() {
        let pts: Vec<ParetoPoint> = [(5, 0), (3, 1), (4, 1), (2, 3), (6, 2), (1, 5)]
            .iter()
            .map(|&(beta, wc)| ParetoPoint {
                beta,
                wc,
                witness: None,
            })
            .collect();
        let f: Vec<(u32, u32)> = pareto_frontier(&pts).iter().map(|p| p.key()).collect();
        assert_eq!(f, vec![(5, 0), (3, 1), (2, 3), (1, 5)]);
    }

    #[test]
    fn exact_bdec_ordering() {
        // (4,1): 36/4 = 9 ; (9,0): 81/9 = 9
        assert_eq!(cmp_bdec((4, 1), (9, 0)), Ordering::Equal);
        assert_eq!(cmp_bdec((2, 1), (3, 0)), Ordering::Greater);
        assert_eq!(cmp_sdec((1, 1), (9, 0)), Ordering::Equal);
    }
}
