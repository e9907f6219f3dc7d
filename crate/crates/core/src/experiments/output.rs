//! CSV writers. Every file opens with `#` comment lines recording the tool
//! version and configuration, followed by a header row.

use std::io::{self, Write};

use super::{ExperimentConfig, ProbabilityRecord, RoundMetrics};

pub const METRICS_HEADER: &str =
    "code_index,word_index,profiler,pattern,probability,error_count,round,\
direct_coverage,indirect_coverage,all_coverage,first_direct_round,\
unidentified_max_simultaneous,ber_before_secondary,ber_after_secondary";

pub const PROBABILITY_HEADER: &str =
    "code_index,word_index,error_count,probability,bit_class,position,frequency";

pub const WASTED_CAPACITY_HEADER: &str = "granularity,ber,wasted";

/// Formats like C's `%.6g`: six significant digits, trailing zeros removed,
/// scientific notation outside [1e-4, 1e6).
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_preamble<W: Write>(
    out: &mut W,
    config: Option<&ExperimentConfig>,
    header: &str,
) -> io::Result<()> {
    writeln!(
        out,
        "# {} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    )?;
    if config.is_none() {
        writeln!(out, "# analysis=wasted-capacity")?;
    }
    if let Some(c) = config {
        let list = |items: Vec<String>| items.join(",");
        writeln!(out, "# analysis={}", c.analysis)?;
        writeln!(out, "# k={}", c.k)?;
        writeln!(out, "# codes={}", c.num_codes)?;
        writeln!(out, "# words={}", c.num_words_per_code)?;
        writeln!(out, "# seed={}", c.base_seed)?;
        writeln!(out, "# rounds={}", c.rounds)?;
        writeln!(
            out,
            "# probs={}",
            list(c.probabilities.iter().map(|&p| format_float(p)).collect())
        )?;
        writeln!(
            out,
            "# errors={}",
            list(c.error_counts.iter().map(ToString::to_string).collect())
        )?;
        writeln!(
            out,
            "# patterns={}",
            list(c.patterns.iter().map(ToString::to_string).collect())
        )?;
        writeln!(
            out,
            "# profilers={}",
            list(c.profilers.iter().map(ToString::to_string).collect())
        )?;
        writeln!(out, "# placement={}", c.placement)?;
        writeln!(out, "# secondary_capability={}", c.secondary_capability)?;
        writeln!(out, "# trials={}", c.trials)?;
        writeln!(out, "# harp_a_bound={}", c.harp_a_bound)?;
    }
    writeln!(out, "{header}")
}

pub struct MetricsCsvWriter<W: Write> {
    out: W,
}

impl<W: Write> MetricsCsvWriter<W> {
    pub fn new(mut out: W, config: &ExperimentConfig) -> io::Result<Self> {
        write_preamble(&mut out, Some(config), METRICS_HEADER)?;
        Ok(MetricsCsvWriter { out })
    }

    pub fn write(&mut self, r: &RoundMetrics) -> io::Result<()> {
        let first = r
            .first_direct_round
            .map(|v| v.to_string())
            .unwrap_or_default();
        writeln!(
            self.out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.code_index,
            r.word_index,
            r.profiler,
            r.pattern,
            format_float(r.probability),
            r.error_count,
            r.round,
            format_float(r.direct_coverage),
            format_float(r.indirect_coverage),
            format_float(r.all_coverage),
            first,
            r.unidentified_max_simultaneous,
            format_float(r.ber_before_secondary),
            format_float(r.ber_after_secondary),
        )
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub struct ProbabilityCsvWriter<W: Write> {
    out: W,
}

impl<W: Write> ProbabilityCsvWriter<W> {
    pub fn new(mut out: W, config: &ExperimentConfig) -> io::Result<Self> {
        write_preamble(&mut out, Some(config), PROBABILITY_HEADER)?;
        Ok(ProbabilityCsvWriter { out })
    }

    pub fn write(&mut self, r: &ProbabilityRecord) -> io::Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{}",
            r.code_index,
            r.word_index,
            r.error_count,
            format_float(r.probability),
            r.class.name(),
            r.position,
            format_float(r.frequency),
        )
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub struct WastedCapacityCsvWriter<W: Write> {
    out: W,
}

impl<W: Write> WastedCapacityCsvWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        write_preamble(&mut out, None, WASTED_CAPACITY_HEADER)?;
        Ok(WastedCapacityCsvWriter { out })
    }

    pub fn write(&mut self, granularity: u32, ber: f64, wasted: f64) -> io::Result<()> {
        writeln!(
            self.out,
            "{},{},{}",
            granularity,
            format_float(ber),
            format_float(wasted)
        )
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
