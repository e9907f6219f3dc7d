//! Monte-Carlo drivers: profiling evaluations, per-bit error probabilities,
//! and the analytic wasted-capacity table.

mod analytic;
mod output;
mod summary;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::codec::{CodecError, HammingCode, SUPPORTED_DATA_LENGTHS};
use crate::error_model::{
    DataPattern, ErrorModelError, PatternKind, RiskPlacement, WordErrorProfile,
};
use crate::oracle::{self, OracleError, RealizableOutcomes, MAX_AT_RISK_BITS};
use crate::par::{Execution, Executor};
use crate::profilers::{ProfilerError, ProfilerKind, ProfilerState, DEFAULT_HARP_A_SUBSET_BOUND};
use crate::rng::{self, derive_seed};

pub use analytic::{
    amplification_row, wasted_capacity, wasted_capacity_table, AmplificationRow,
    WASTED_CAPACITY_GRANULARITIES,
};
pub use output::{
    format_float, MetricsCsvWriter, ProbabilityCsvWriter, WastedCapacityCsvWriter, METRICS_HEADER,
    PROBABILITY_HEADER, WASTED_CAPACITY_HEADER,
};
pub use summary::{
    summarize, BootstrapRow, CellKey, CoverageRow, CurveRow, HistogramRow, MaxSimultaneousRow,
    Summarizer, Summary,
};

// Stream tags, so each consumer of randomness gets its own sequence.
const TAG_PROFILE: u64 = 1;
const TAG_PATTERN: u64 = 2;
const TAG_INJECT: u64 = 3;
const TAG_BEEP: u64 = 4;
const TAG_TRIALS: u64 = 5;

/// Work units handed to the executor at a time; bounds buffered rows.
const CHUNK_UNITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Analysis {
    Probabilities,
    Evaluations,
    WastedCapacity,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Probabilities => "probabilities",
            Analysis::Evaluations => "evaluations",
            Analysis::WastedCapacity => "wasted-capacity",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "probabilities" => Ok(Analysis::Probabilities),
            "evaluations" => Ok(Analysis::Evaluations),
            "wasted-capacity" => Ok(Analysis::WastedCapacity),
            other => Err(ConfigError::UnknownAnalysis(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown analysis {0:?} (expected probabilities, evaluations or wasted-capacity)")]
    UnknownAnalysis(String),
    #[error("k = {0} is not supported (expected one of 4, 8, 16, 32, 64, 128)")]
    UnsupportedK(usize),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("probability {0} outside (0, 1]")]
    Probability(f64),
    #[error("error count {n} outside [1, {limit}]")]
    ErrorCount { n: usize, limit: usize },
    #[error("percentile {0} outside (0, 1]")]
    Percentile(f64),
    #[error("analysis is {found}, expected {expected}")]
    WrongAnalysis { expected: Analysis, found: Analysis },
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    ErrorModel(#[from] ErrorModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Profiler(#[from] ProfilerError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub analysis: Analysis,
    pub k: usize,
    pub num_codes: usize,
    pub num_words_per_code: usize,
    pub base_seed: u64,
    pub rounds: usize,
    pub probabilities: Vec<f64>,
    pub error_counts: Vec<usize>,
    pub patterns: Vec<PatternKind>,
    pub profilers: Vec<ProfilerKind>,
    pub placement: RiskPlacement,
    /// Errors per word the secondary code can correct.
    pub secondary_capability: usize,
    /// Monte-Carlo trials per word in the probabilities analysis.
    pub trials: usize,
    pub harp_a_bound: usize,
}

impl Default for ExperimentConfig {
    /// Evaluations over 10 codes x 100 words of a (71, 64) code.
    fn default() -> Self {
        ExperimentConfig {
            analysis: Analysis::Evaluations,
            k: 64,
            num_codes: 10,
            num_words_per_code: 100,
            base_seed: 0,
            rounds: 128,
            probabilities: vec![0.25, 0.5, 0.75, 1.0],
            error_counts: vec![2, 3, 4, 5],
            patterns: vec![PatternKind::Random],
            profilers: ProfilerKind::ALL.to_vec(),
            placement: RiskPlacement::AllPositions,
            secondary_capability: 1,
            trials: 10_000,
            harp_a_bound: DEFAULT_HARP_A_SUBSET_BOUND,
        }
    }
}

impl ExperimentConfig {
    /// Defaults for `analysis`. The probabilities analysis runs the charged
    /// pattern at probability 0.5 only.
    pub fn for_analysis(analysis: Analysis) -> Self {
        let mut config = ExperimentConfig {
            analysis,
            ..Default::default()
        };
        if analysis == Analysis::Probabilities {
            config.probabilities = vec![0.5];
            config.patterns = vec![PatternKind::Charged];
        }
        config
    }

    /// 2 codes x 20 words, for quick checks.
    pub fn fast(analysis: Analysis) -> Self {
        ExperimentConfig {
            num_codes: 2,
            num_words_per_code: 20,
            ..Self::for_analysis(analysis)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.analysis == Analysis::WastedCapacity {
            return Ok(());
        }
        if !SUPPORTED_DATA_LENGTHS.contains(&self.k) {
            return Err(ConfigError::UnsupportedK(self.k));
        }
        for (name, value) in [
            ("codes", self.num_codes),
            ("words", self.num_words_per_code),
            ("rounds", self.rounds),
            ("trials", self.trials),
        ] {
            if value == 0 {
                return Err(ConfigError::NotPositive(name));
            }
        }
        if self.probabilities.is_empty() {
            return Err(ConfigError::Empty("probabilities"));
        }
        if let Some(&p) = self.probabilities.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(ConfigError::Probability(p));
        }
        if self.error_counts.is_empty() {
            return Err(ConfigError::Empty("error counts"));
        }
        let available = match self.placement {
            RiskPlacement::AllPositions => self.k + crate::codec::parity_bits_for(self.k),
            RiskPlacement::DataOnly => self.k,
        };
        let limit = MAX_AT_RISK_BITS.min(available);
        if let Some(&n) = self.error_counts.iter().find(|&&n| n == 0 || n > limit) {
            return Err(ConfigError::ErrorCount { n, limit });
        }
        if self.analysis == Analysis::Evaluations {
            if self.patterns.is_empty() {
                return Err(ConfigError::Empty("patterns"));
            }
            if self.profilers.is_empty() {
                return Err(ConfigError::Empty("profilers"));
            }
        }
        Ok(())
    }

    /// Seed of code `i`; consecutive codes use consecutive seeds.
    pub fn code_seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }

    fn expect(&self, expected: Analysis) -> Result<(), ConfigError> {
        if self.analysis != expected {
            return Err(ConfigError::WrongAnalysis {
                expected,
                found: self.analysis,
            });
        }
        self.validate()
    }
}

/// One profiler's state for one word after one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    /// Seed the word's code was generated from.
    pub code_index: u64,
    pub word_index: usize,
    pub profiler: ProfilerKind,
    pub pattern: PatternKind,
    pub probability: f64,
    pub error_count: usize,
    /// Zero-based; the metrics describe the state after this round.
    pub round: usize,
    pub direct_coverage: f64,
    pub indirect_coverage: f64,
    pub all_coverage: f64,
    /// First round in which an at-risk bit of direct error was identified.
    pub first_direct_round: Option<usize>,
    /// Largest number of unidentified errors any realizable outcome causes.
    pub unidentified_max_simultaneous: usize,
    pub ber_before_secondary: f64,
    pub ber_after_secondary: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BitClass {
    /// At-risk bit, raw stored value.
    Pre,
    /// Data bit at risk of post-correction error.
    Post,
}

impl BitClass {
    pub fn name(self) -> &'static str {
        match self {
            BitClass::Pre => "pre",
            BitClass::Post => "post",
        }
    }
}

/// Observed error frequency of one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityRecord {
    pub code_index: u64,
    pub word_index: usize,
    pub error_count: usize,
    pub probability: f64,
    pub class: BitClass,
    /// Codeword position for `Pre`, data position for `Post`.
    pub position: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy)]
struct Unit {
    code: usize,
    word: usize,
}

fn build_codes(config: &ExperimentConfig) -> Result<Vec<HammingCode>, CodecError> {
    (0..config.num_codes)
        .map(|i| HammingCode::construct_random(config.k, config.code_seed(i)))
        .collect()
}

fn for_each_unit<R, F, S>(
    config: &ExperimentConfig,
    execution: Execution,
    work: F,
    mut sink: S,
) -> Result<(), ExperimentError>
where
    R: Send,
    F: Fn(&HammingCode, u64, usize) -> Result<Vec<R>, ExperimentError> + Sync + Send,
    S: FnMut(&R) -> Result<(), ExperimentError>,
{
    let codes = build_codes(config)?;
    let executor = Executor::new(execution).map_err(ExperimentError::ThreadPool)?;
    let units: Vec<Unit> = (0..config.num_codes)
        .flat_map(|code| (0..config.num_words_per_code).map(move |word| Unit { code, word }))
        .collect();
    for chunk in units.chunks(CHUNK_UNITS) {
        let results = executor.map(chunk, |u| {
            work(&codes[u.code], config.code_seed(u.code), u.word)
        });
        for rows in results {
            for row in &rows? {
                sink(row)?;
            }
        }
    }
    Ok(())
}

/// Runs every profiler over every word and cell, calling `sink` with the
/// metrics of each round in a fixed order: code, word, error count,
/// probability, pattern, profiler, round.
pub fn run_evaluations<S>(
    config: &ExperimentConfig,
    execution: Execution,
    mut sink: S,
) -> Result<(), ExperimentError>
where
    S: FnMut(&RoundMetrics) -> Result<(), ExperimentError>,
{
    config.expect(Analysis::Evaluations)?;
    for_each_unit(
        config,
        execution,
        |code, seed, word| simulate_word(config, code, seed, word),
        |row| sink(row),
    )
}

/// `run_evaluations` into a vector.
pub fn collect_evaluations(
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<Vec<RoundMetrics>, ExperimentError> {
    let mut rows = Vec::new();
    run_evaluations(config, execution, |r| {
        rows.push(r.clone());
        Ok(())
    })?;
    Ok(rows)
}

fn word_profile(
    config: &ExperimentConfig,
    code: &HammingCode,
    code_seed: u64,
    word: usize,
    n: usize,
) -> Result<WordErrorProfile, ErrorModelError> {
    let mut prng = rng::stream(code_seed, &[TAG_PROFILE, word as u64, n as u64]);
    WordErrorProfile::random(code, n, 1.0, config.placement, &mut prng)
}

fn simulate_word(
    config: &ExperimentConfig,
    code: &HammingCode,
    code_seed: u64,
    word: usize,
) -> Result<Vec<RoundMetrics>, ExperimentError> {
    let cells = config.probabilities.len() * config.patterns.len() * config.profilers.len();
    let mut rows = Vec::with_capacity(config.error_counts.len() * cells * config.rounds);
    let w = word as u64;

    for &n in &config.error_counts {
        let base = word_profile(config, code, code_seed, word, n)?;
        let outcomes = RealizableOutcomes::enumerate(code, &base)?;
        let truth = outcomes.truth();
        let pattern_seed = derive_seed(code_seed, &[TAG_PATTERN, w, n as u64]);
        let beep_seed = derive_seed(code_seed, &[TAG_BEEP, w, n as u64]);

        for &probability in &config.probabilities {
            let profile = base.with_probability(probability)?;
            for &pattern_kind in &config.patterns {
                let pattern = DataPattern::from_kind(pattern_kind, pattern_seed);
                for &kind in &config.profilers {
                    let mut state = ProfilerState::new(kind, pattern)
                        .with_fallback_seed(beep_seed)
                        .with_harp_a_bound(config.harp_a_bound)
                        .with_direct_target(truth.direct_risk.clone());
                    // Shared by every profiler and cell of this word.
                    let mut inject = rng::stream(code_seed, &[TAG_INJECT, w, n as u64]);
                    let mut first_direct = None;
                    let mut cached: Option<(usize, usize)> = None;

                    for round in 0..config.rounds {
                        state.run_round(code, &profile, &mut inject)?;
                        let identified = state.identified();
                        if first_direct.is_none()
                            && identified.intersection(&truth.direct_risk).next().is_some()
                        {
                            first_direct = Some(round);
                        }
                        let unidentified_max = match cached {
                            Some((len, value)) if len == identified.len() => value,
                            _ => {
                                let value = outcomes.max_unidentified(identified);
                                cached = Some((identified.len(), value));
                                value
                            }
                        };
                        let ber_before = unidentified_count(&truth.all_risk, identified) as f64
                            / code.k() as f64;
                        let ber_after = if unidentified_max <= config.secondary_capability {
                            0.0
                        } else {
                            ber_before
                        };
                        rows.push(RoundMetrics {
                            code_index: code_seed,
                            word_index: word,
                            profiler: kind,
                            pattern: pattern_kind,
                            probability,
                            error_count: n,
                            round,
                            direct_coverage: oracle::coverage(identified, &truth.direct_risk),
                            indirect_coverage: oracle::coverage(identified, &truth.indirect_risk),
                            all_coverage: oracle::coverage(identified, &truth.all_risk),
                            first_direct_round: first_direct,
                            unidentified_max_simultaneous: unidentified_max,
                            ber_before_secondary: ber_before,
                            ber_after_secondary: ber_after,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn unidentified_count(risk: &BTreeSet<usize>, identified: &BTreeSet<usize>) -> usize {
    risk.difference(identified).count()
}

/// Estimates per-bit error frequencies under the charged pattern, calling
/// `sink` in a fixed order: code, word, error count, probability, class,
/// position.
pub fn run_probabilities<S>(
    config: &ExperimentConfig,
    execution: Execution,
    mut sink: S,
) -> Result<(), ExperimentError>
where
    S: FnMut(&ProbabilityRecord) -> Result<(), ExperimentError>,
{
    config.expect(Analysis::Probabilities)?;
    for_each_unit(
        config,
        execution,
        |code, seed, word| estimate_word(config, code, seed, word),
        |row| sink(row),
    )
}

pub fn collect_probabilities(
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<Vec<ProbabilityRecord>, ExperimentError> {
    let mut rows = Vec::new();
    run_probabilities(config, execution, |r| {
        rows.push(r.clone());
        Ok(())
    })?;
    Ok(rows)
}

fn estimate_word(
    config: &ExperimentConfig,
    code: &HammingCode,
    code_seed: u64,
    word: usize,
) -> Result<Vec<ProbabilityRecord>, ExperimentError> {
    let written = DataPattern::Charged.pattern_for_round(0, code.k());
    let codeword = code.encode(&written)?;
    let mut rows = Vec::new();

    for &n in &config.error_counts {
        let base = word_profile(config, code, code_seed, word, n)?;
        let post_risk = RealizableOutcomes::for_stored_codeword(code, &base, &codeword)?
            .into_truth()
            .all_risk;
        for &probability in &config.probabilities {
            let profile = base.with_probability(probability)?;
            let mut trials = rng::stream(
                code_seed,
                &[TAG_TRIALS, word as u64, n as u64, probability.to_bits()],
            );
            let mut pre_counts = vec![0u64; code.n()];
            let mut post_counts = vec![0u64; code.k()];
            for _ in 0..config.trials {
                let raw = profile.inject(&codeword, &mut trials)?;
                for i in raw.iter_ones() {
                    pre_counts[i] += 1;
                }
                let read = code.decode(&codeword.xor(&raw))?.dataword;
                for i in read.xor(&written).iter_ones() {
                    post_counts[i] += 1;
                }
            }
            debug_assert!(post_counts
                .iter()
                .enumerate()
                .all(|(i, &c)| c == 0 || post_risk.contains(&i)));

            let frequency = |count: u64| count as f64 / config.trials as f64;
            let record = |class, position, count| ProbabilityRecord {
                code_index: code_seed,
                word_index: word,
                error_count: n,
                probability,
                class,
                position,
                frequency: frequency(count),
            };
            for bit in profile.at_risk() {
                if bit.polarity.is_active(codeword.get(bit.position)) {
                    rows.push(record(
                        BitClass::Pre,
                        bit.position,
                        pre_counts[bit.position],
                    ));
                }
            }
            for &i in &post_risk {
                rows.push(record(BitClass::Post, i, post_counts[i]));
            }
        }
    }
    Ok(rows)
}
