//! Round-based error profilers for one simulated ECC word.
//!
//! Every profiler writes a dataword, lets the at-risk cells fail, reads the
//! word back and marks the data positions that came back wrong. They differ
//! in what they write and in which read path they use:
//!
//! | kind          | data written                         | read path          |
//! |---------------|--------------------------------------|--------------------|
//! | `naive`       | configured pattern                   | through on-die ECC |
//! | `beep`        | random, then crafted from known bits | through on-die ECC |
//! | `harp-u`      | configured pattern                   | decode bypass      |
//! | `harp-a`      | configured pattern                   | decode bypass, plus miscorrection prediction from H |
//! | `harp-a+beep` | `harp-a` until direct coverage is complete, then `beep` | |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::codec::{CodecError, HammingCode};
use crate::error_model::{DataPattern, ErrorModelError, WordErrorProfile};
use crate::gf2::{BitVector, Combinations};

/// Largest subset of observed direct errors HARP-A checks for miscorrections.
pub const DEFAULT_HARP_A_SUBSET_BOUND: usize = 5;
/// Largest combination of known-bad bits BEEP uses to aim at a target bit.
pub const BEEP_CRAFT_SUBSET_BOUND: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfilerError {
    #[error("unknown profiler {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    ErrorModel(#[from] ErrorModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfilerKind {
    Naive,
    Beep,
    HarpU,
    HarpA,
    HarpABeep,
}

impl ProfilerKind {
    pub const ALL: [ProfilerKind; 5] = [
        ProfilerKind::Naive,
        ProfilerKind::Beep,
        ProfilerKind::HarpU,
        ProfilerKind::HarpA,
        ProfilerKind::HarpABeep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfilerKind::Naive => "naive",
            ProfilerKind::Beep => "beep",
            ProfilerKind::HarpU => "harp-u",
            ProfilerKind::HarpA => "harp-a",
            ProfilerKind::HarpABeep => "harp-a+beep",
        }
    }
}

impl fmt::Display for ProfilerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfilerKind {
    type Err = ProfilerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProfilerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ProfilerError::UnknownKind(s.to_string()))
    }
}

/// What one active round saw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundObservation {
    pub written: BitVector,
    /// Data positions that read back wrong on the profiler's read path.
    pub errors: BitVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReactiveOutcome {
    /// The secondary code corrected everything; `added` were newly recorded.
    Safe { added: Vec<usize> },
    /// More unidentified errors than the secondary code can correct.
    Unsafe { unidentified: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct ProfilerState {
    kind: ProfilerKind,
    pattern: DataPattern,
    identified: BTreeSet<usize>,
    beep_hypotheses: BTreeSet<usize>,
    round: usize,
    /// Raw data errors seen through the bypass path.
    observed_direct: BTreeSet<usize>,
    harp_a_bound: usize,
    /// Pattern BEEP falls back to when it has nothing to aim at.
    beep_random: DataPattern,
    /// Direct-risk set that ends the HARP-A phase of the hybrid.
    direct_target: Option<BTreeSet<usize>>,
    beep_phase: bool,
    craft_cache: Option<Option<(usize, Vec<usize>)>>,
}

impl ProfilerState {
    pub fn new(kind: ProfilerKind, pattern: DataPattern) -> Self {
        let beep_random = match pattern {
            DataPattern::Random { .. } => pattern,
            _ => DataPattern::Random { seed: 0 },
        };
        ProfilerState {
            kind,
            pattern,
            identified: BTreeSet::new(),
            beep_hypotheses: BTreeSet::new(),
            round: 0,
            observed_direct: BTreeSet::new(),
            harp_a_bound: DEFAULT_HARP_A_SUBSET_BOUND,
            beep_random,
            direct_target: None,
            beep_phase: kind == ProfilerKind::Beep,
            craft_cache: None,
        }
    }

    /// Seed of BEEP's random pattern when the configured pattern is not
    /// random itself.
    pub fn with_fallback_seed(mut self, seed: u64) -> Self {
        if !matches!(self.pattern, DataPattern::Random { .. }) {
            self.beep_random = DataPattern::Random { seed };
        }
        self
    }

    pub fn with_harp_a_bound(mut self, bound: usize) -> Self {
        self.harp_a_bound = bound;
        self
    }

    /// Bits at risk of direct error; `harp-a+beep` switches to BEEP once all
    /// of them are identified. Without a target the hybrid stays in HARP-A.
    pub fn with_direct_target(mut self, direct_risk: BTreeSet<usize>) -> Self {
        self.direct_target = Some(direct_risk);
        self
    }

    pub fn kind(&self) -> ProfilerKind {
        self.kind
    }

    pub fn pattern(&self) -> DataPattern {
        self.pattern
    }

    pub fn identified(&self) -> &BTreeSet<usize> {
        &self.identified
    }

    pub fn beep_hypotheses(&self) -> &BTreeSet<usize> {
        &self.beep_hypotheses
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// True once a `harp-a+beep` profiler has handed over to BEEP.
    pub fn in_beep_phase(&self) -> bool {
        self.beep_phase
    }

    fn uses_bypass(&self) -> bool {
        matches!(
            self.kind,
            ProfilerKind::HarpU | ProfilerKind::HarpA | ProfilerKind::HarpABeep
        ) && !self.beep_phase
    }

    /// Runs one active profiling round.
    pub fn run_round<R: Rng + ?Sized>(
        &mut self,
        code: &HammingCode,
        profile: &WordErrorProfile,
        rng: &mut R,
    ) -> Result<RoundObservation, ProfilerError> {
        if self.kind == ProfilerKind::HarpABeep && !self.beep_phase {
            if let Some(target) = &self.direct_target {
                if target.is_subset(&self.identified) {
                    self.beep_phase = true;
                    self.beep_hypotheses = self.observed_direct.clone();
                    self.craft_cache = None;
                }
            }
        }

        let written = self.data_for_round(code);
        let codeword = code.encode(&written)?;
        let raw = profile.inject(&codeword, rng)?;
        let stored = codeword.xor(&raw);

        let errors = if self.uses_bypass() {
            code.decode_bypass(&stored)?.xor(&written)
        } else {
            code.decode(&stored)?.dataword.xor(&written)
        };

        if self.uses_bypass() {
            let before = self.observed_direct.len();
            self.observed_direct.extend(errors.iter_ones());
            self.identified.extend(errors.iter_ones());
            let predicts = matches!(self.kind, ProfilerKind::HarpA | ProfilerKind::HarpABeep);
            if predicts && self.observed_direct.len() != before {
                self.predict_miscorrections(code);
            }
        } else {
            let before = (self.identified.len(), self.beep_hypotheses.len());
            self.identified.extend(errors.iter_ones());
            if self.beep_phase {
                self.beep_hypotheses.extend(errors.iter_ones());
            }
            if before != (self.identified.len(), self.beep_hypotheses.len()) {
                self.craft_cache = None;
            }
        }

        self.round += 1;
        Ok(RoundObservation { written, errors })
    }

    /// One read during normal operation, checked by a secondary code that
    /// corrects up to `secondary_capability` errors per word.
    pub fn reactive_round<R: Rng + ?Sized>(
        &mut self,
        code: &HammingCode,
        profile: &WordErrorProfile,
        secondary_capability: usize,
        rng: &mut R,
    ) -> Result<ReactiveOutcome, ProfilerError> {
        let written = DataPattern::Charged.pattern_for_round(0, code.k());
        let codeword = code.encode(&written)?;
        let raw = profile.inject(&codeword, rng)?;
        let read = code.decode(&codeword.xor(&raw))?.dataword;
        let unidentified: Vec<usize> = read
            .xor(&written)
            .iter_ones()
            .filter(|i| !self.identified.contains(i))
            .collect();
        if unidentified.len() > secondary_capability {
            return Ok(ReactiveOutcome::Unsafe { unidentified });
        }
        self.identified.extend(unidentified.iter().copied());
        Ok(ReactiveOutcome::Safe {
            added: unidentified,
        })
    }

    fn data_for_round(&mut self, code: &HammingCode) -> BitVector {
        let k = code.k();
        if !self.beep_phase {
            return self.pattern.pattern_for_round(self.round, k);
        }
        let bootstrapping = match self.kind {
            ProfilerKind::Beep => self.identified.is_empty(),
            _ => self.beep_hypotheses.is_empty(),
        };
        if bootstrapping {
            return self.beep_random.pattern_for_round(self.round, k);
        }
        if self.craft_cache.is_none() {
            self.craft_cache = Some(craft_target(code, &self.beep_hypotheses, &self.identified));
        }
        match self.craft_cache.as_ref().and_then(Option::as_ref) {
            Some((_, subset)) => BitVector::from_indices(k, subset.iter().copied()),
            None => self.beep_random.pattern_for_round(self.round, k),
        }
    }

    /// Adds every data bit a subset of the observed direct errors would
    /// miscorrect into.
    fn predict_miscorrections(&mut self, code: &HammingCode) {
        let observed: Vec<usize> = self.observed_direct.iter().copied().collect();
        for size in 2..=self.harp_a_bound.min(observed.len()) {
            for subset in Combinations::new(observed.len(), size) {
                let s = subset
                    .iter()
                    .fold(0u32, |acc, &t| acc ^ code.column_value(observed[t]));
                if let Some(j) = code.position_of_syndrome(s) {
                    if j < code.k() && !subset.iter().any(|&t| observed[t] == j) {
                        self.identified.insert(j);
                    }
                }
            }
        }
    }
}

/// BEEP's next target: the lowest unidentified data bit `t` for which some
/// combination of at most [`BEEP_CRAFT_SUBSET_BOUND`] hypothesis bits has
/// columns XORing to `H[t]`, together with the smallest such combination
/// (lexicographically first among equals).
pub fn craft_target(
    code: &HammingCode,
    hypotheses: &BTreeSet<usize>,
    identified: &BTreeSet<usize>,
) -> Option<(usize, Vec<usize>)> {
    let known: Vec<usize> = hypotheses.iter().copied().collect();
    let mut first_subset: Vec<Option<Vec<usize>>> = vec![None; 1 << code.p()];
    for size in 1..=BEEP_CRAFT_SUBSET_BOUND.min(known.len()) {
        for subset in Combinations::new(known.len(), size) {
            let s = subset
                .iter()
                .fold(0u32, |acc, &t| acc ^ code.column_value(known[t]));
            let slot = &mut first_subset[s as usize];
            if slot.is_none() {
                *slot = Some(subset.iter().map(|&t| known[t]).collect());
            }
        }
    }
    (0..code.k())
        .filter(|t| !identified.contains(t))
        .find_map(|t| {
            first_subset[code.column_value(t) as usize]
                .clone()
                .map(|subset| (t, subset))
        })
}
