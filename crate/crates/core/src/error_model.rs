//! At-risk bits, data patterns and data-dependent error injection.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::codec::HammingCode;
use crate::gf2::BitVector;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErrorModelError {
    #[error("at-risk position {position} outside codeword of length {n}")]
    PositionOutOfRange { position: usize, n: usize },
    #[error("at-risk position {0} listed twice")]
    DuplicatePosition(usize),
    #[error("error probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("cannot place {requested} at-risk bits in {available} positions")]
    TooManyAtRiskBits { requested: usize, available: usize },
    #[error("codeword length {found} does not match profile length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unknown data pattern {0:?}")]
    UnknownPattern(String),
}

/// Which stored value exposes a cell to failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CellPolarity {
    /// Fails only while storing '1'.
    #[default]
    TrueCell,
}

impl CellPolarity {
    #[inline]
    pub fn is_active(self, stored: bool) -> bool {
        match self {
            CellPolarity::TrueCell => stored,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtRiskBit {
    /// Codeword position; `[0, k)` are data bits.
    pub position: usize,
    pub probability: f64,
    pub polarity: CellPolarity,
}

impl AtRiskBit {
    pub fn true_cell(position: usize, probability: f64) -> Self {
        AtRiskBit {
            position,
            probability,
            polarity: CellPolarity::TrueCell,
        }
    }
}

/// Where per-word at-risk bits may land.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RiskPlacement {
    #[default]
    AllPositions,
    DataOnly,
}

impl fmt::Display for RiskPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskPlacement::AllPositions => "all-positions",
            RiskPlacement::DataOnly => "data-only",
        })
    }
}

/// The at-risk bits of one ECC word, sorted by position.
#[derive(Debug, Clone, PartialEq)]
pub struct WordErrorProfile {
    k: usize,
    p: usize,
    at_risk: Vec<AtRiskBit>,
}

impl WordErrorProfile {
    pub fn new(k: usize, p: usize, mut at_risk: Vec<AtRiskBit>) -> Result<Self, ErrorModelError> {
        at_risk.sort_by_key(|b| b.position);
        for (i, bit) in at_risk.iter().enumerate() {
            if bit.position >= k + p {
                return Err(ErrorModelError::PositionOutOfRange {
                    position: bit.position,
                    n: k + p,
                });
            }
            if !(bit.probability > 0.0 && bit.probability <= 1.0) {
                return Err(ErrorModelError::InvalidProbability(bit.probability));
            }
            if i > 0 && at_risk[i - 1].position == bit.position {
                return Err(ErrorModelError::DuplicatePosition(bit.position));
            }
        }
        Ok(WordErrorProfile { k, p, at_risk })
    }

    /// True-cell bits at `positions`, all failing with `probability`.
    pub fn uniform(
        code: &HammingCode,
        positions: &[usize],
        probability: f64,
    ) -> Result<Self, ErrorModelError> {
        Self::new(
            code.k(),
            code.p(),
            positions
                .iter()
                .map(|&pos| AtRiskBit::true_cell(pos, probability))
                .collect(),
        )
    }

    /// `n` distinct positions drawn uniformly without replacement.
    pub fn random<R: Rng + ?Sized>(
        code: &HammingCode,
        n: usize,
        probability: f64,
        placement: RiskPlacement,
        rng: &mut R,
    ) -> Result<Self, ErrorModelError> {
        let available = match placement {
            RiskPlacement::AllPositions => code.n(),
            RiskPlacement::DataOnly => code.k(),
        };
        if n > available {
            return Err(ErrorModelError::TooManyAtRiskBits {
                requested: n,
                available,
            });
        }
        let positions = index::sample(rng, available, n).into_vec();
        Self::uniform(code, &positions, probability)
    }

    /// Same positions, every bit failing with `probability`.
    pub fn with_probability(&self, probability: f64) -> Result<Self, ErrorModelError> {
        Self::new(
            self.k,
            self.p,
            self.at_risk
                .iter()
                .map(|b| AtRiskBit { probability, ..*b })
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn at_risk(&self) -> &[AtRiskBit] {
        &self.at_risk
    }

    pub fn len(&self) -> usize {
        self.at_risk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.at_risk.is_empty()
    }

    pub fn positions(&self) -> Vec<usize> {
        self.at_risk.iter().map(|b| b.position).collect()
    }

    pub fn data_positions(&self) -> Vec<usize> {
        self.at_risk
            .iter()
            .map(|b| b.position)
            .filter(|&pos| pos < self.k)
            .collect()
    }

    /// Draws one pre-correction error vector for a stored `codeword`.
    ///
    /// One uniform variate is consumed per at-risk bit on every call whether
    /// or not the cell is active, so two callers sharing a seed see the same
    /// latent failures even when they store different data.
    pub fn inject<R: Rng + ?Sized>(
        &self,
        codeword: &BitVector,
        rng: &mut R,
    ) -> Result<BitVector, ErrorModelError> {
        if codeword.len() != self.k + self.p {
            return Err(ErrorModelError::LengthMismatch {
                expected: self.k + self.p,
                found: codeword.len(),
            });
        }
        let mut errors = BitVector::zeros(codeword.len());
        for bit in &self.at_risk {
            let u: f64 = rng.gen();
            if u < bit.probability && bit.polarity.is_active(codeword.get(bit.position)) {
                errors.set(bit.position, true);
            }
        }
        Ok(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternKind {
    Random,
    Charged,
    Checkered,
}

impl PatternKind {
    pub const ALL: [PatternKind; 3] = [
        PatternKind::Random,
        PatternKind::Charged,
        PatternKind::Checkered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Random => "random",
            PatternKind::Charged => "charged",
            PatternKind::Checkered => "checkered",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = ErrorModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ErrorModelError::UnknownPattern(s.to_string()))
    }
}

/// Data written during a profiling round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataPattern {
    /// Fresh random word on even rounds, its inverse on the following round.
    Random { seed: u64 },
    /// All ones.
    Charged,
    /// `1010…` on even rounds, `0101…` on odd rounds.
    Checkered,
}

impl DataPattern {
    pub fn kind(&self) -> PatternKind {
        match self {
            DataPattern::Random { .. } => PatternKind::Random,
            DataPattern::Charged => PatternKind::Charged,
            DataPattern::Checkered => PatternKind::Checkered,
        }
    }

    pub fn from_kind(kind: PatternKind, seed: u64) -> Self {
        match kind {
            PatternKind::Random => DataPattern::Random { seed },
            PatternKind::Charged => DataPattern::Charged,
            PatternKind::Checkered => DataPattern::Checkered,
        }
    }

    pub fn pattern_for_round(&self, round: usize, k: usize) -> BitVector {
        let inverted = round % 2 == 1;
        match *self {
            DataPattern::Charged => BitVector::ones(k),
            DataPattern::Checkered => {
                BitVector::from_indices(k, (0..k).filter(|i| (i % 2 == 0) != inverted))
            }
            DataPattern::Random { seed } => {
                let mut stream = rng::stream(seed, &[(round / 2) as u64]);
                let bits: Vec<bool> = (0..k).map(|_| stream.gen()).collect();
                let word = BitVector::from_bits(&bits);
                if inverted {
                    word.not()
                } else {
                    word
                }
            }
        }
    }
}
