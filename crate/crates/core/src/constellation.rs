//! PAM constellations with binary labelings.
//!
//! Symbols are stored in ascending amplitude order and addressed by their
//! 0-based index, so index 0 is `s1 = -(M-1)d` and index `M-1` is `sM`.
//! A labeling is the vector `q` where `q[i]` is the integer value of the
//! `m` label bits of symbol `i`, most significant bit first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Named binary labelings.
///
/// `G1`..`G4` are the four Gray labelings of 4-PAM (up to reflection).
/// `Brgc` is the binary reflected Gray code and `Sp` the natural
/// (set-partitioning) labeling, both defined for any `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Labeling {
    G1,
    G2,
    G3,
    G4,
    Brgc,
    Sp,
}

impl Labeling {
    /// The four Gray labelings of 4-PAM.
    pub const GRAY_4PAM: [Labeling; 4] = [Labeling::G1, Labeling::G2, Labeling::G3, Labeling::G4];

    /// Label vector `q` for `bits` bits per symbol.
    pub fn labels(self, bits: usize) -> Result<Vec<u8>> {
        let invalid = || Error::InvalidLabeling {
            labeling: self.to_string(),
            bits,
        };
        if bits == 0 || bits > 6 {
            return Err(invalid());
        }
        let order = 1usize << bits;
        let q = match (self, bits) {
            (Labeling::G1, 2) => vec![0, 1, 3, 2],
            (Labeling::G2, 2) => vec![0, 2, 3, 1],
            (Labeling::G3, 2) => vec![1, 0, 2, 3],
            (Labeling::G4, 2) => vec![2, 0, 1, 3],
            (Labeling::G1 | Labeling::G2 | Labeling::G3 | Labeling::G4, _) => return Err(invalid()),
            (Labeling::Brgc, _) => (0..order).map(|i| (i ^ (i >> 1)) as u8).collect(),
            (Labeling::Sp, _) => (0..order).map(|i| i as u8).collect(),
        };
        Ok(q)
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Labeling::G1 => "G1",
            Labeling::G2 => "G2",
            Labeling::G3 => "G3",
            Labeling::G4 => "G4",
            Labeling::Brgc => "BRGC",
            Labeling::Sp => "SP",
        };
        f.write_str(s)
    }
}

/// A labeling name as accepted on the command line, which also fixes `m`.
///
/// `g1`..`g4`, `brgc4` and `sp4` select 4-PAM; `brgc8` and `sp8` select 8-PAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingName {
    pub labeling: Labeling,
    pub bits: usize,
}

impl FromStr for LabelingName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (labeling, bits) = match s.trim().to_ascii_lowercase().as_str() {
            "g1" | "brgc4" => (Labeling::G1, 2),
            "g2" => (Labeling::G2, 2),
            "g3" => (Labeling::G3, 2),
            "g4" => (Labeling::G4, 2),
            "sp4" => (Labeling::Sp, 2),
            "brgc8" => (Labeling::Brgc, 3),
            "sp8" => (Labeling::Sp, 3),
            other => return Err(Error::Parse(format!("unknown labeling '{other}'"))),
        };
        Ok(LabelingName { labeling, bits })
    }
}

impl fmt::Display for LabelingName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.labeling, self.bits) {
            (Labeling::Brgc, 3) => f.write_str("brgc8"),
            (Labeling::Sp, 3) => f.write_str("sp8"),
            (Labeling::Sp, 2) => f.write_str("sp4"),
            (Labeling::Brgc, 2) => f.write_str("g1"),
            (l, _) => write!(f, "{}", l.to_string().to_ascii_lowercase()),
        }
    }
}

/// XOR of the labels of two symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ErrorVector {
    bits: usize,
    value: u8,
}

impl ErrorVector {
    pub fn new(bits: usize, value: u8) -> Self {
        ErrorVector { bits, value }
    }

    /// Integer value, MSB = first label bit. `[0,1] -> 1`, `[1,0] -> 2`, `[1,1] -> 3`.
    pub fn value(&self) -> u8 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn weight(&self) -> u32 {
        self.value.count_ones()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.bits)
            .map(|j| (self.value >> (self.bits - 1 - j)) & 1)
            .collect()
    }
}

/// A labeled PAM constellation `{-(M-1)d, ..., -d, d, ..., (M-1)d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    bits: usize,
    labeling: Labeling,
    d: f64,
    points: Vec<f64>,
    labels: Vec<u8>,
    symbol_of_label: Vec<usize>,
}

impl Constellation {
    /// Builds the `2^m`-PAM constellation with the named labeling.
    ///
    /// Only `m` in {2, 3} is accepted; `G1`..`G4` require `m = 2`.
    pub fn make_pam(bits: usize, labeling: Labeling, d: f64) -> Result<Self> {
        if !(2..=3).contains(&bits) {
            return Err(Error::InvalidLabeling {
                labeling: labeling.to_string(),
                bits,
            });
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "normalization factor must be positive, got {d}"
            )));
        }
        let labels = labeling.labels(bits)?;
        let order = labels.len();
        let points = (0..order)
            .map(|i| (2.0 * i as f64 - (order as f64 - 1.0)) * d)
            .collect();
        let mut symbol_of_label = vec![0; order];
        for (i, &q) in labels.iter().enumerate() {
            symbol_of_label[q as usize] = i;
        }
        Ok(Constellation {
            bits,
            labeling,
            d,
            points,
            labels,
            symbol_of_label,
        })
    }

    /// Builds a constellation from a command-line labeling name.
    pub fn from_name(name: LabelingName, d: f64) -> Result<Self> {
        Self::make_pam(name.bits, name.labeling, d)
    }

    /// Same constellation with every amplitude multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::make_pam(self.bits, self.labeling, self.d * gain)
    }

    /// Bits per symbol `m`.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Number of points `M = 2^m`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn labeling(&self) -> Labeling {
        self.labeling
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, symbol: usize) -> f64 {
        self.points[symbol]
    }

    /// The label vector `q`.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, symbol: usize) -> u8 {
        self.labels[symbol]
    }

    /// Bit `j` (0-based, MSB first) of the label of `symbol`.
    pub fn bit(&self, symbol: usize, j: usize) -> u8 {
        (self.labels[symbol] >> (self.bits - 1 - j)) & 1
    }

    /// Inverse bit map: the `m` label bits of `symbol`, MSB first.
    pub fn label_bits(&self, symbol: usize) -> Vec<u8> {
        (0..self.bits).map(|j| self.bit(symbol, j)).collect()
    }

    /// Symbol index carrying the integer label `label`.
    pub fn symbol_for_label(&self, label: u8) -> usize {
        self.symbol_of_label[label as usize]
    }

    /// Bit map: symbol index whose label equals `bits` (MSB first).
    ///
    /// # Panics
    ///
    /// Panics if `bits` does not have length `m`.
    pub fn map_bits(&self, bits: &[u8]) -> usize {
        assert_eq!(bits.len(), self.bits, "label length must equal m");
        let label = bits.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1));
        self.symbol_of_label[label as usize]
    }

    /// Maps a coded bit sequence to symbols, `m` bits at a time.
    pub fn modulate(&self, coded: &[u8]) -> Result<Vec<usize>> {
        if !coded.len().is_multiple_of(self.bits) {
            return Err(Error::LengthMismatch {
                expected: coded.len().next_multiple_of(self.bits),
                actual: coded.len(),
            });
        }
        Ok(coded.chunks(self.bits).map(|c| self.map_bits(c)).collect())
    }

    /// Concatenated labels of a symbol sequence.
    pub fn demodulate_labels(&self, symbols: &[usize]) -> Vec<u8> {
        symbols.iter().flat_map(|&s| self.label_bits(s)).collect()
    }

    pub fn amplitudes(&self, symbols: &[usize]) -> Vec<f64> {
        symbols.iter().map(|&s| self.points[s]).collect()
    }

    pub fn error_vector(&self, i: usize, j: usize) -> ErrorVector {
        ErrorVector::new(self.bits, self.labels[i] ^ self.labels[j])
    }

    /// True iff `{i, j}` are the two outermost points of 4-PAM.
    pub fn is_corner_pair(&self, i: usize, j: usize) -> Result<bool> {
        if self.bits != 2 {
            return Err(Error::RequiresFourPam(self.bits));
        }
        Ok((i == 0 && j == 3) || (i == 3 && j == 0))
    }

    /// Mean of the squared amplitudes (uniform symbols).
    pub fn average_symbol_energy(&self) -> f64 {
        self.points.iter().map(|p| p * p).sum::<f64>() / self.order() as f64
    }
}

/// Parses `s1,s4,s3,s2` into 0-based symbol indices.
pub fn parse_symbols(s: &str, order: usize) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim().to_ascii_lowercase();
            let n: usize = tok
                .strip_prefix('s')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad symbol '{tok}'")))?;
            if n == 0 || n > order {
                return Err(Error::Parse(format!("symbol '{tok}' out of range 1..={order}")));
            }
            Ok(n - 1)
        })
        .collect()
}

/// Formats 0-based symbol indices as `s1,s4,...`.
pub fn format_symbols(symbols: &[usize]) -> String {
    symbols
        .iter()
        .map(|s| format!("s{}", s + 1))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pam4(l: Labeling) -> Constellation {
        Constellation::make_pam(2, l, 1.0).unwrap()
    }

    #[test]
    fn gray_labelings_match_table() {
        assert_eq!(pam4(Labeling::G1).labels(), &[0, 1, 3, 2]);
        assert_eq!(pam4(Labeling::G2).labels(), &[0, 2, 3, 1]);
        assert_eq!(pam4(Labeling::G3).labels(), &[1, 0, 2, 3]);
        assert_eq!(pam4(Labeling::G4).labels(), &[2, 0, 1, 3]);
    }

    #[test]
    fn eight_pam_labelings() {
        let brgc = Constellation::make_pam(3, Labeling::Brgc, 1.0).unwrap();
        assert_eq!(brgc.labels(), &[0, 1, 3, 2, 6, 7, 5, 4]);
        let sp = Constellation::make_pam(3, Labeling::Sp, 1.0).unwrap();
        assert_eq!(sp.labels(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(brgc.points(), &[-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0]);
    }

    #[test]
    fn invalid_combinations_rejected() {
        assert!(Constellation::make_pam(3, Labeling::G1, 1.0).is_err());
        assert!(Constellation::make_pam(4, Labeling::Brgc, 1.0).is_err());
        assert!(Constellation::make_pam(2, Labeling::G1, 0.0).is_err());
    }

    #[test]
    fn map_bits_examples() {
        assert_eq!(pam4(Labeling::G1).map_bits(&[1, 0]), 3);
        assert_eq!(pam4(Labeling::G3).map_bits(&[0, 0]), 1);
    }

    #[test]
    fn bit_map_round_trip() {
        for l in [Labeling::G1, Labeling::G2, Labeling::G3, Labeling::G4, Labeling::Sp] {
            let c = pam4(l);
            for s in 0..4 {
                assert_eq!(c.map_bits(&c.label_bits(s)), s);
            }
            for label in 0..4u8 {
                let bits = [(label >> 1) & 1, label & 1];
                assert_eq!(c.label_bits(c.map_bits(&bits)), bits.to_vec());
            }
        }
    }

    #[test]
    fn error_vector_examples() {
        assert_eq!(pam4(Labeling::G3).error_vector(0, 3).to_bits(), vec![1, 0]);
        assert_eq!(pam4(Labeling::G1).error_vector(0, 2).to_bits(), vec![1, 1]);
        assert!(pam4(Labeling::G2).error_vector(2, 2).is_zero());
    }

    #[test]
    fn corner_pairs() {
        let c = pam4(Labeling::G3);
        assert!(c.is_corner_pair(0, 3).unwrap());
        assert!(c.is_corner_pair(3, 0).unwrap());
        assert!(!c.is_corner_pair(1, 2).unwrap());
        let c8 = Constellation::make_pam(3, Labeling::Brgc, 1.0).unwrap();
        assert_eq!(c8.is_corner_pair(0, 7), Err(Error::RequiresFourPam(3)));
    }

    #[test]
    fn average_energy() {
        assert_eq!(pam4(Labeling::G1).average_symbol_energy(), 5.0);
        let c = Constellation::make_pam(2, Labeling::G1, 2.0).unwrap();
        assert_eq!(c.average_symbol_energy(), 20.0);
        let c8 = Constellation::make_pam(3, Labeling::Brgc, 1.0).unwrap();
        assert_eq!(c8.average_symbol_energy(), 21.0);
    }

    #[test]
    fn gray_property_adjacent_pairs() {
        for l in Labeling::GRAY_4PAM {
            let c = pam4(l);
            for i in 0..3 {
                assert_eq!(c.error_vector(i, i + 1).weight(), 1, "{l} ({i},{})", i + 1);
            }
        }
        let c8 = Constellation::make_pam(3, Labeling::Brgc, 1.0).unwrap();
        for i in 0..7 {
            assert_eq!(c8.error_vector(i, i + 1).weight(), 1);
        }
    }

    #[test]
    fn pair_classes_by_labeling() {
        // e = [0,1] -> 1, [1,0] -> 2, [1,1] -> 3
        let class = |c: &Constellation, i, j| c.error_vector(i, j).value();
        for l in [Labeling::G1, Labeling::G3] {
            let c = pam4(l);
            assert_eq!(class(&c, 0, 1), 1);
            assert_eq!(class(&c, 2, 3), 1);
            assert_eq!(class(&c, 0, 2), 3);
            assert_eq!(class(&c, 1, 3), 3);
            assert_eq!(class(&c, 1, 2), 2);
            assert_eq!(class(&c, 0, 3), 2);
        }
        for l in [Labeling::G2, Labeling::G4] {
            let c = pam4(l);
            assert_eq!(class(&c, 0, 1), 2);
            assert_eq!(class(&c, 2, 3), 2);
            assert_eq!(class(&c, 0, 2), 3);
            assert_eq!(class(&c, 1, 3), 3);
            assert_eq!(class(&c, 1, 2), 1);
            assert_eq!(class(&c, 0, 3), 1);
        }
    }

    #[test]
    fn reversed_labeling_is_reflection() {
        // q and reversed q give error-vector tables related by i -> M-1-i.
        for l in Labeling::GRAY_4PAM {
            let c = pam4(l);
            let reversed: Vec<u8> = c.labels().iter().rev().copied().collect();
            for i in 0..4 {
                for j in 0..4 {
                    let e_rev = reversed[i] ^ reversed[j];
                    assert_eq!(e_rev, c.error_vector(3 - i, 3 - j).value());
                }
            }
        }
    }

    #[test]
    fn labeling_names() {
        let n: LabelingName = "g3".parse().unwrap();
        assert_eq!(
            n,
            LabelingName {
                labeling: Labeling::G3,
                bits: 2
            }
        );
        let n: LabelingName = "brgc8".parse().unwrap();
        assert_eq!(n.bits, 3);
        assert_eq!(n.to_string(), "brgc8");
        assert!("g7".parse::<LabelingName>().is_err());
    }

    #[test]
    fn symbol_lists() {
        assert_eq!(parse_symbols("s1,s4,s3,s2", 4).unwrap(), vec![0, 3, 2, 1]);
        assert!(parse_symbols("s5", 4).is_err());
        assert_eq!(format_symbols(&[0, 3]), "s1,s4");
    }
}
