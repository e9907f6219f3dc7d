//! Systematic single-error-correcting Hamming codes.
//!
//! Codeword positions `[0, k)` hold the data bits verbatim and `[k, k+p)`
//! hold the parity bits. The parity-check matrix `H` is stored by column; a
//! column is kept both as a [`BitVector`] of length `p` and as a packed
//! integer whose bit `j` is row `j`, which is what the decoder uses.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector};
use crate::rng::SimRng;

/// Data lengths accepted by [`HammingCode::construct_random`].
pub const SUPPORTED_DATA_LENGTHS: [usize; 6] = [4, 8, 16, 32, 64, 128];

const MAX_PARITY_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("length mismatch: expected {expected} bits, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unsupported dataword length {0}; expected one of 4, 8, 16, 32, 64, 128")]
    UnsupportedDataLength(usize),
    #[error("{p} parity bits cannot distinguish {n} single-bit errors")]
    TooFewParityBits { p: usize, n: usize },
    #[error("at most {MAX_PARITY_BITS} parity bits are supported, got {0}")]
    TooManyParityBits(usize),
    #[error("data column {0} has weight below 2")]
    LightDataColumn(usize),
    #[error("data columns {0} and {1} are identical")]
    DuplicateColumn(usize, usize),
}

/// Smallest `p` with `2^p - 1 >= k + p`.
pub fn parity_bits_for(k: usize) -> usize {
    (1..)
        .find(|&p: &usize| (1usize << p) > k + p)
        .expect("some parity count always suffices")
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HammingCode {
    k: usize,
    p: usize,
    /// Column `i` of H, packed (bit j = row j).
    columns: Vec<u32>,
    /// `position_of[s]` is the column index whose value is `s`, plus one; 0
    /// when no column matches.
    position_of: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeAction {
    NoCorrection,
    Corrected(usize),
    DetectedUncorrectable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub dataword: BitVector,
    pub action: DecodeAction,
}

impl HammingCode {
    /// Builds a code from its data columns; parity columns are the identity.
    pub fn from_data_columns(data_columns: &[BitVector]) -> Result<Self, CodecError> {
        let k = data_columns.len();
        let p = data_columns
            .first()
            .map_or(parity_bits_for(k), BitVector::len);
        if p > MAX_PARITY_BITS {
            return Err(CodecError::TooManyParityBits(p));
        }
        let mut packed = Vec::with_capacity(k);
        for col in data_columns {
            if col.len() != p {
                return Err(CodecError::LengthMismatch {
                    expected: p,
                    found: col.len(),
                });
            }
            packed.push(col.to_u64() as u32);
        }
        Self::from_packed(k, p, packed)
    }

    fn from_packed(k: usize, p: usize, data_columns: Vec<u32>) -> Result<Self, CodecError> {
        if (1usize << p) - 1 < k + p {
            return Err(CodecError::TooFewParityBits { p, n: k + p });
        }
        let mut columns = data_columns;
        columns.extend((0..p).map(|j| 1u32 << j));

        let mut position_of = vec![0u32; 1 << p];
        for (i, &c) in columns.iter().enumerate() {
            if i < k && c.count_ones() < 2 {
                return Err(CodecError::LightDataColumn(i));
            }
            let slot = &mut position_of[c as usize];
            if *slot != 0 {
                return Err(CodecError::DuplicateColumn(*slot as usize - 1, i));
            }
            *slot = i as u32 + 1;
        }
        Ok(HammingCode {
            k,
            p,
            columns,
            position_of,
        })
    }

    /// A random systematic SEC code: the data columns are `k` distinct
    /// weight-≥2 values sampled without replacement, in random order.
    pub fn construct_random(k: usize, seed: u64) -> Result<Self, CodecError> {
        if !SUPPORTED_DATA_LENGTHS.contains(&k) {
            return Err(CodecError::UnsupportedDataLength(k));
        }
        let p = parity_bits_for(k);
        let mut candidates: Vec<u32> = (1u32..1 << p).filter(|c| c.count_ones() >= 2).collect();
        let mut rng = SimRng::seed_from_u64(seed);
        let (chosen, _) = candidates.partial_shuffle(&mut rng, k);
        Self::from_packed(k, p, chosen.to_vec())
    }

    /// The (7,4) code whose parity-check matrix is
    ///
    /// ```text
    /// 1110 100
    /// 1101 010
    /// 1011 001
    /// ```
    pub fn reference_7_4() -> Self {
        // Columns packed with bit j = row j: 111, 110, 101, 011.
        Self::from_packed(4, 3, vec![0b111, 0b011, 0b101, 0b110]).expect("valid reference code")
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    /// Codeword length `k + p`.
    #[inline]
    pub fn n(&self) -> usize {
        self.k + self.p
    }

    pub fn column(&self, i: usize) -> BitVector {
        BitVector::from_u64(self.p, u64::from(self.columns[i]))
    }

    pub fn h_columns(&self) -> Vec<BitVector> {
        (0..self.n()).map(|i| self.column(i)).collect()
    }

    pub fn parity_check_matrix(&self) -> BitMatrix {
        BitMatrix::from_columns(self.p, &self.h_columns()).expect("columns have length p")
    }

    /// Column `i` of H packed into an integer, bit `j` being row `j`.
    #[inline]
    pub fn column_value(&self, i: usize) -> u32 {
        self.columns[i]
    }

    /// The position whose column equals the packed syndrome `s`.
    #[inline]
    pub fn position_of_syndrome(&self, s: u32) -> Option<usize> {
        match self.position_of.get(s as usize) {
            Some(&slot) if slot != 0 => Some(slot as usize - 1),
            _ => None,
        }
    }

    /// Packed `H · v` for a length-`k+p` vector.
    #[inline]
    pub fn syndrome_value(&self, v: &BitVector) -> u32 {
        debug_assert_eq!(v.len(), self.n());
        v.iter_ones().fold(0, |s, i| s ^ self.columns[i])
    }

    pub fn syndrome(&self, c: &BitVector) -> Result<BitVector, CodecError> {
        self.check_len(c, self.n())?;
        Ok(BitVector::from_u64(
            self.p,
            u64::from(self.syndrome_value(c)),
        ))
    }

    pub fn encode(&self, d: &BitVector) -> Result<BitVector, CodecError> {
        self.check_len(d, self.k)?;
        let parity = d.iter_ones().fold(0u32, |acc, i| acc ^ self.columns[i]);
        let mut c = BitVector::zeros(self.n());
        for i in d.iter_ones() {
            c.set(i, true);
        }
        for j in 0..self.p {
            if parity >> j & 1 == 1 {
                c.set(self.k + j, true);
            }
        }
        Ok(c)
    }

    pub fn decode(&self, c_prime: &BitVector) -> Result<DecodeOutcome, CodecError> {
        self.check_len(c_prime, self.n())?;
        let s = self.syndrome_value(c_prime);
        let mut dataword = c_prime.slice(0..self.k);
        let action = if s == 0 {
            DecodeAction::NoCorrection
        } else {
            match self.position_of_syndrome(s) {
                Some(i) => {
                    if i < self.k {
                        dataword.flip(i);
                    }
                    DecodeAction::Corrected(i)
                }
                None => DecodeAction::DetectedUncorrectable,
            }
        };
        Ok(DecodeOutcome { dataword, action })
    }

    /// Raw data portion of a stored codeword, with no correction applied.
    pub fn decode_bypass(&self, c_prime: &BitVector) -> Result<BitVector, CodecError> {
        self.check_len(c_prime, self.n())?;
        Ok(c_prime.slice(0..self.k))
    }

    fn check_len(&self, v: &BitVector, expected: usize) -> Result<(), CodecError> {
        if v.len() == expected {
            Ok(())
        } else {
            Err(CodecError::LengthMismatch {
                expected,
                found: v.len(),
            })
        }
    }
}

/// One line per column of H as a binary string, data columns first.
impl fmt::Display for HammingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, col) in self.h_columns().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{col}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for HammingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HammingCode({}, {})", self.n(), self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn parity_counts() {
        let ps: Vec<_> = SUPPORTED_DATA_LENGTHS
            .iter()
            .map(|&k| parity_bits_for(k))
            .collect();
        assert_eq!(ps, vec![3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn reference_code_matches_printed_h() {
        let code = HammingCode::reference_7_4();
        let h = code.parity_check_matrix();
        assert_eq!(h.row(0), &bv("1110100"));
        assert_eq!(h.row(1), &bv("1101010"));
        assert_eq!(h.row(2), &bv("1011001"));
        assert_eq!(code.column(1).xor(&code.column(2)), code.column(3));
        assert_eq!(code.to_string(), "111\n110\n101\n011\n100\n010\n001");
    }

    #[test]
    fn encode_examples() {
        let code = HammingCode::reference_7_4();
        assert_eq!(code.encode(&bv("1000")).unwrap(), bv("1000111"));
        assert_eq!(code.encode(&bv("0000")).unwrap(), bv("0000000"));
        assert_eq!(code.encode(&bv("1100")).unwrap(), bv("1100001"));
        assert!(matches!(
            code.encode(&bv("100")),
            Err(CodecError::LengthMismatch {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn decode_examples() {
        let code = HammingCode::reference_7_4();
        let out = code.decode(&bv("0000111")).unwrap();
        assert_eq!(out.dataword, bv("1000"));
        assert_eq!(out.action, DecodeAction::Corrected(0));

        let clean = code.decode(&bv("1100001")).unwrap();
        assert_eq!(clean.dataword, bv("1100"));
        assert_eq!(clean.action, DecodeAction::NoCorrection);

        // Two raw errors at 1 and 2 miscorrect bit 3.
        let mis = code.decode(&bv("0110000")).unwrap();
        assert_eq!(mis.dataword, bv("0111"));
        assert_eq!(mis.action, DecodeAction::Corrected(3));
    }

    #[test]
    fn decode_reports_unmatched_syndrome() {
        // (71,64) leaves 127 - 71 = 56 syndromes unused.
        let code = HammingCode::construct_random(64, 3).unwrap();
        let used: BTreeSet<u32> = (0..code.n()).map(|i| code.column_value(i)).collect();
        let unused = (1u32..128).find(|s| !used.contains(s)).unwrap();
        // Any two parity bits plus data bits whose columns XOR to `unused`
        // would do; it is simpler to flip the parity bits spelling it out.
        let mut c = code.encode(&BitVector::zeros(64)).unwrap();
        for j in 0..7 {
            if unused >> j & 1 == 1 {
                c.flip(64 + j);
            }
        }
        let out = code.decode(&c).unwrap();
        assert_eq!(out.action, DecodeAction::DetectedUncorrectable);
        assert!(out.dataword.is_zero());
    }

    #[test]
    fn bypass_examples() {
        let code = HammingCode::reference_7_4();
        assert_eq!(code.decode_bypass(&bv("0000111")).unwrap(), bv("0000"));
        let c = code.encode(&bv("1011")).unwrap();
        assert_eq!(code.decode_bypass(&c).unwrap(), bv("1011"));
        let mut parity_hit = c.clone();
        parity_hit.flip(4);
        assert_eq!(code.decode_bypass(&parity_hit).unwrap(), bv("1011"));
    }

    #[test]
    fn random_construction_invariants() {
        for seed in 0..50 {
            let code = HammingCode::construct_random(64, seed).unwrap();
            assert_eq!(code.p(), 7);
            let data: BTreeSet<u32> = (0..64).map(|i| code.column_value(i)).collect();
            assert_eq!(data.len(), 64);
            assert!(data.iter().all(|c| c.count_ones() >= 2 && *c < 128));
            for j in 0..7 {
                assert_eq!(code.column_value(64 + j), 1 << j);
            }
        }
        // 2^7 - 1 - 7 weight-≥2 candidates.
        assert_eq!((1u32..128).filter(|c| c.count_ones() >= 2).count(), 120);
    }

    #[test]
    fn random_4_bit_codes_permute_the_only_candidates() {
        let expected: BTreeSet<u32> = [0b111, 0b011, 0b101, 0b110].into();
        let mut seen = BTreeSet::new();
        for seed in 0..200 {
            let code = HammingCode::construct_random(4, seed).unwrap();
            let cols: Vec<u32> = (0..4).map(|i| code.column_value(i)).collect();
            assert_eq!(cols.iter().copied().collect::<BTreeSet<_>>(), expected);
            seen.insert(cols);
        }
        assert!(seen.len() > 12, "only {} orderings reached", seen.len());
        assert!(seen.contains(&vec![0b111, 0b011, 0b101, 0b110]));
    }

    #[test]
    fn construction_is_deterministic() {
        let a = HammingCode::construct_random(128, 99).unwrap();
        let b = HammingCode::construct_random(128, 99).unwrap();
        assert_eq!(a.h_columns(), b.h_columns());
        assert_ne!(a, HammingCode::construct_random(128, 100).unwrap());
    }

    #[test]
    fn construction_rejects_unsupported_k() {
        assert_eq!(
            HammingCode::construct_random(63, 0),
            Err(CodecError::UnsupportedDataLength(63))
        );
    }

    #[test]
    fn from_data_columns_validates() {
        assert_eq!(
            HammingCode::from_data_columns(&[bv("110"), bv("100")]),
            Err(CodecError::LightDataColumn(1))
        );
        assert_eq!(
            HammingCode::from_data_columns(&[bv("110"), bv("110")]),
            Err(CodecError::DuplicateColumn(0, 1))
        );
        let five = [bv("111"), bv("110"), bv("101"), bv("011"), bv("111")];
        assert!(matches!(
            HammingCode::from_data_columns(&five),
            Err(CodecError::TooFewParityBits { p: 3, n: 8 })
        ));
        let code =
            HammingCode::from_data_columns(&[bv("111"), bv("110"), bv("101"), bv("011")]).unwrap();
        assert_eq!(code, HammingCode::reference_7_4());
    }

    fn exhaustive_single_errors(code: &HammingCode, d: &BitVector) {
        let c = code.encode(d).unwrap();
        for e in 0..code.n() {
            let mut r = c.clone();
            r.flip(e);
            let out = code.decode(&r).unwrap();
            assert_eq!(&out.dataword, d);
            assert_eq!(out.action, DecodeAction::Corrected(e));
        }
    }

    #[test]
    fn corrects_every_single_error() {
        let reference = HammingCode::reference_7_4();
        for v in 0..16 {
            exhaustive_single_errors(&reference, &BitVector::from_u64(4, v));
        }
        let code = HammingCode::construct_random(64, 11).unwrap();
        for v in [0, u64::MAX, 0xDEAD_BEEF_0123_4567] {
            exhaustive_single_errors(&code, &BitVector::from_u64(64, v));
        }
    }

    fn arb_code_and_data() -> impl Strategy<Value = (HammingCode, BitVector)> {
        (
            prop::sample::select(SUPPORTED_DATA_LENGTHS.to_vec()),
            any::<u64>(),
        )
            .prop_flat_map(|(k, seed)| {
                let code = HammingCode::construct_random(k, seed).unwrap();
                proptest::collection::vec(any::<bool>(), k)
                    .prop_map(move |bits| (code.clone(), BitVector::from_bits(&bits)))
            })
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip((code, d) in arb_code_and_data()) {
            let c = code.encode(&d).unwrap();
            prop_assert_eq!(c.slice(0..code.k()), d.clone());
            prop_assert!(code.parity_check_matrix().mat_vec_mul(&c).unwrap().is_zero());
            let out = code.decode(&c).unwrap();
            prop_assert_eq!(out.dataword, d);
            prop_assert_eq!(out.action, DecodeAction::NoCorrection);
        }

        #[test]
        fn bypass_exposes_raw_data_errors(
            (code, d) in arb_code_and_data(),
            flips in proptest::collection::vec(any::<prop::sample::Index>(), 0..6),
        ) {
            let mut r = BitVector::zeros(code.n());
            for f in flips {
                r.flip(f.index(code.n()));
            }
            let stored = code.encode(&d).unwrap().xor(&r);
            prop_assert_eq!(
                code.decode_bypass(&stored).unwrap(),
                d.xor(&r.slice(0..code.k()))
            );
        }
    }
}
