//! Aggregate tables over a stream of round metrics.
//!
//! Aggregation is order-independent: sums are kept in fixed point and every
//! per-word quantity is a minimum or a maximum.

use std::collections::BTreeMap;
use std::io::{self, Write};

use super::output::format_float;
use super::{ConfigError, RoundMetrics};
use crate::error_model::PatternKind;
use crate::oracle::MAX_AT_RISK_BITS;
use crate::profilers::ProfilerKind;

const FIXED_ONE: f64 = (1u64 << 40) as f64;

fn fixed(x: f64) -> u128 {
    (x * FIXED_ONE).round() as u128
}

/// Identifies one experimental cell. `error_count` is `None` for curves
/// pooled over every error count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub profiler: ProfilerKind,
    pub pattern: PatternKind,
    probability_bits: u64,
    pub error_count: Option<usize>,
}

impl CellKey {
    pub fn new(
        profiler: ProfilerKind,
        pattern: PatternKind,
        probability: f64,
        error_count: Option<usize>,
    ) -> Self {
        CellKey {
            profiler,
            pattern,
            probability_bits: probability.to_bits(),
            error_count,
        }
    }

    pub fn probability(&self) -> f64 {
        f64::from_bits(self.probability_bits)
    }

    fn pooled(self) -> Self {
        CellKey {
            error_count: None,
            ..self
        }
    }

    fn csv_prefix(&self) -> String {
        let n = self
            .error_count
            .map_or_else(|| "all".to_string(), |n| n.to_string());
        format!(
            "{},{},{},{}",
            self.profiler,
            self.pattern,
            format_float(self.probability()),
            n
        )
    }
}

#[derive(Debug, Clone)]
struct WordTrack {
    full_direct: Option<usize>,
    first_direct: Option<usize>,
    has_direct_risk: bool,
    /// `at_most[x]`: first round with at most `x` unidentified simultaneous
    /// errors.
    at_most: [Option<usize>; MAX_AT_RISK_BITS + 1],
    ber_zero: Option<usize>,
    last_round: usize,
    last_unidentified: usize,
    peak_unidentified: usize,
}

impl Default for WordTrack {
    fn default() -> Self {
        WordTrack {
            full_direct: None,
            first_direct: None,
            has_direct_risk: false,
            at_most: [None; MAX_AT_RISK_BITS + 1],
            ber_zero: None,
            last_round: 0,
            last_unidentified: 0,
            peak_unidentified: 0,
        }
    }
}

fn min_opt(slot: &mut Option<usize>, value: usize) {
    *slot = Some(slot.map_or(value, |v| v.min(value)));
}

#[derive(Debug, Clone, Default)]
struct CurveSums {
    words: u64,
    direct: u128,
    indirect: u128,
    all: u128,
    ber_before: u128,
    ber_after: u128,
}

/// Accumulates round metrics; `finish` produces the tables.
#[derive(Debug, Clone)]
pub struct Summarizer {
    budget: usize,
    words: BTreeMap<(CellKey, u64, usize), WordTrack>,
    curves: BTreeMap<(CellKey, usize), CurveSums>,
}

impl Summarizer {
    /// `budget` is the number of rounds simulated; words that never reach an
    /// event are reported at this value and flagged as censored.
    pub fn new(budget: usize) -> Self {
        Summarizer {
            budget,
            words: BTreeMap::new(),
            curves: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, r: &RoundMetrics) {
        let key = CellKey::new(r.profiler, r.pattern, r.probability, Some(r.error_count));
        let w = self
            .words
            .entry((key, r.code_index, r.word_index))
            .or_default();
        if r.direct_coverage >= 1.0 {
            min_opt(&mut w.full_direct, r.round);
        } else {
            w.has_direct_risk = true;
        }
        if let Some(first) = r.first_direct_round {
            w.has_direct_risk = true;
            min_opt(&mut w.first_direct, first);
        }
        let unidentified = r.unidentified_max_simultaneous.min(MAX_AT_RISK_BITS);
        for slot in &mut w.at_most[unidentified..] {
            min_opt(slot, r.round);
        }
        if r.ber_after_secondary == 0.0 {
            min_opt(&mut w.ber_zero, r.round);
        }
        if r.round >= w.last_round {
            w.last_round = r.round;
            w.last_unidentified = unidentified;
        }
        w.peak_unidentified = w.peak_unidentified.max(unidentified);

        for cell in [key, key.pooled()] {
            let c = self.curves.entry((cell, r.round)).or_default();
            c.words += 1;
            c.direct += fixed(r.direct_coverage);
            c.indirect += fixed(r.indirect_coverage);
            c.all += fixed(r.all_coverage);
            c.ber_before += fixed(r.ber_before_secondary);
            c.ber_after += fixed(r.ber_after_secondary);
        }
    }

    pub fn finish(&self, percentile: f64) -> Result<Summary, ConfigError> {
        if !(percentile > 0.0 && percentile <= 1.0) {
            return Err(ConfigError::Percentile(percentile));
        }
        let budget = self.budget;
        let mut by_cell: BTreeMap<CellKey, Vec<&WordTrack>> = BTreeMap::new();
        for ((key, _, _), w) in &self.words {
            by_cell.entry(*key).or_default().push(w);
        }

        let mut summary = Summary {
            budget,
            percentile,
            ..Default::default()
        };
        let at = |values: &mut Vec<usize>, q: f64| -> usize {
            values.sort_unstable();
            values[nearest_rank(values.len(), q)]
        };

        for (&cell, words) in &by_cell {
            let mut full: Vec<usize> = words
                .iter()
                .map(|w| w.full_direct.unwrap_or(budget))
                .collect();
            let mut zero: Vec<usize> = words.iter().map(|w| w.ber_zero.unwrap_or(budget)).collect();
            let rounds_to_full_direct = at(&mut full, percentile);
            let rounds_to_zero_ber = at(&mut zero, percentile);
            summary.coverage.push(CoverageRow {
                cell,
                words: words.len(),
                rounds_to_full_direct,
                full_direct_censored: rounds_to_full_direct >= budget,
                rounds_to_zero_ber,
                zero_ber_censored: rounds_to_zero_ber >= budget,
            });

            let mut first: Vec<usize> = words
                .iter()
                .filter(|w| w.has_direct_risk)
                .map(|w| w.first_direct.unwrap_or(budget))
                .collect();
            if !first.is_empty() {
                let censored_words = first.iter().filter(|&&v| v >= budget).count();
                summary.bootstrapping.push(BootstrapRow {
                    cell,
                    words: first.len(),
                    q1: at(&mut first, 0.25),
                    median: at(&mut first, 0.5),
                    q3: at(&mut first, 0.75),
                    censored_words,
                });
            }

            let peak = words
                .iter()
                .map(|w| w.peak_unidentified)
                .max()
                .unwrap_or(0)
                .max(1);
            for threshold in 1..=peak {
                let mut rounds: Vec<usize> = words
                    .iter()
                    .map(|w| w.at_most[threshold].unwrap_or(budget))
                    .collect();
                let value = at(&mut rounds, percentile);
                summary.max_simultaneous.push(MaxSimultaneousRow {
                    cell,
                    threshold,
                    rounds: value,
                    censored: value >= budget,
                });
            }

            let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
            for w in words {
                *histogram.entry(w.last_unidentified).or_default() += 1;
            }
            summary
                .histogram
                .extend(histogram.into_iter().map(|(v, count)| HistogramRow {
                    cell,
                    max_simultaneous: v,
                    words: count,
                }));
        }

        for (&(cell, round), c) in &self.curves {
            let mean = |sum: u128| sum as f64 / FIXED_ONE / c.words as f64;
            summary.curves.push(CurveRow {
                cell,
                round,
                words: c.words as usize,
                direct_coverage: mean(c.direct),
                indirect_coverage: mean(c.indirect),
                all_coverage: mean(c.all),
                ber_before_secondary: mean(c.ber_before),
                ber_after_secondary: mean(c.ber_after),
                ber_after_is_zero: c.ber_after == 0,
            });
        }
        Ok(summary)
    }
}

/// Zero-based index of the nearest-rank `q` percentile among `n` sorted
/// values.
fn nearest_rank(n: usize, q: f64) -> usize {
    let rank = (q * n as f64 - 1e-9).ceil().max(1.0) as usize;
    rank.min(n) - 1
}

/// One-shot summary of `rows`.
pub fn summarize<'a>(
    rows: impl IntoIterator<Item = &'a RoundMetrics>,
    budget: usize,
    percentile: f64,
) -> Result<Summary, ConfigError> {
    let mut s = Summarizer::new(budget);
    for r in rows {
        s.push(r);
    }
    s.finish(percentile)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub cell: CellKey,
    pub words: usize,
    pub rounds_to_full_direct: usize,
    pub full_direct_censored: bool,
    /// Rounds until the post-secondary bit error rate is zero.
    pub rounds_to_zero_ber: usize,
    pub zero_ber_censored: bool,
}

/// First-direct-error rounds over words with at least one bit at risk of
/// direct error.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRow {
    pub cell: CellKey,
    pub words: usize,
    pub q1: usize,
    pub median: usize,
    pub q3: usize,
    pub censored_words: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxSimultaneousRow {
    pub cell: CellKey,
    pub threshold: usize,
    pub rounds: usize,
    pub censored: bool,
}

/// Words by unidentified simultaneous errors after the final round.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub cell: CellKey,
    pub max_simultaneous: usize,
    pub words: usize,
}

/// Means over words at one round.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub cell: CellKey,
    pub round: usize,
    pub words: usize,
    pub direct_coverage: f64,
    pub indirect_coverage: f64,
    pub all_coverage: f64,
    pub ber_before_secondary: f64,
    pub ber_after_secondary: f64,
    /// Exact: every word's post-secondary BER is zero.
    pub ber_after_is_zero: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub budget: usize,
    pub percentile: f64,
    pub coverage: Vec<CoverageRow>,
    pub bootstrapping: Vec<BootstrapRow>,
    pub max_simultaneous: Vec<MaxSimultaneousRow>,
    pub histogram: Vec<HistogramRow>,
    pub curves: Vec<CurveRow>,
}

impl Summary {
    pub fn curve(&self, cell: CellKey) -> impl Iterator<Item = &CurveRow> {
        self.curves.iter().filter(move |c| c.cell == cell)
    }

    /// First round at which the mean post-secondary BER of `cell` is zero.
    pub fn rounds_to_zero_ber(&self, cell: CellKey) -> Option<usize> {
        self.curve(cell)
            .find(|c| c.ber_after_is_zero)
            .map(|c| c.round)
    }

    pub fn bootstrap(&self, cell: CellKey) -> Option<&BootstrapRow> {
        self.bootstrapping.iter().find(|b| b.cell == cell)
    }

    pub fn coverage_row(&self, cell: CellKey) -> Option<&CoverageRow> {
        self.coverage.iter().find(|c| c.cell == cell)
    }

    /// Writes every table as a CSV section introduced by `# table=<name>`.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        let cell_header = "profiler,pattern,probability,error_count";
        writeln!(
            out,
            "# {} {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        )?;
        writeln!(
            out,
            "# budget={} percentile={}",
            self.budget,
            format_float(self.percentile)
        )?;

        writeln!(out, "# table=coverage")?;
        writeln!(
            out,
            "{cell_header},words,rounds_to_full_direct,full_direct_censored,rounds_to_zero_ber,zero_ber_censored"
        )?;
        for r in &self.coverage {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.cell.csv_prefix(),
                r.words,
                r.rounds_to_full_direct,
                r.full_direct_censored,
                r.rounds_to_zero_ber,
                r.zero_ber_censored
            )?;
        }

        writeln!(out, "# table=bootstrapping")?;
        writeln!(out, "{cell_header},words,q1,median,q3,censored_words")?;
        for r in &self.bootstrapping {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.cell.csv_prefix(),
                r.words,
                r.q1,
                r.median,
                r.q3,
                r.censored_words
            )?;
        }

        writeln!(out, "# table=max_simultaneous")?;
        writeln!(out, "{cell_header},threshold,rounds,censored")?;
        for r in &self.max_simultaneous {
            writeln!(
                out,
                "{},{},{},{}",
                r.cell.csv_prefix(),
                r.threshold,
                r.rounds,
                r.censored
            )?;
        }

        writeln!(out, "# table=histogram")?;
        writeln!(out, "{cell_header},max_simultaneous,words")?;
        for r in &self.histogram {
            writeln!(
                out,
                "{},{},{}",
                r.cell.csv_prefix(),
                r.max_simultaneous,
                r.words
            )?;
        }

        writeln!(out, "# table=curves")?;
        writeln!(
            out,
            "{cell_header},round,words,direct_coverage,indirect_coverage,all_coverage,ber_before_secondary,ber_after_secondary"
        )?;
        for r in &self.curves {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.cell.csv_prefix(),
                r.round,
                r.words,
                format_float(r.direct_coverage),
                format_float(r.indirect_coverage),
                format_float(r.all_coverage),
                format_float(r.ber_before_secondary),
                format_float(r.ber_after_secondary)
            )?;
        }
        Ok(())
    }
}
