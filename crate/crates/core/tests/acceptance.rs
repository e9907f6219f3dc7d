//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use ecc_profiler::codec::{DecodeAction, HammingCode};
use ecc_profiler::error_model::{PatternKind, RiskPlacement, WordErrorProfile};
use ecc_profiler::experiments::{
    self, Analysis, BitClass, CellKey, ExperimentConfig, MetricsCsvWriter, RoundMetrics,
    Summarizer, Summary,
};
use ecc_profiler::gf2::BitVector;
use ecc_profiler::oracle;
use ecc_profiler::profilers::ProfilerKind;
use ecc_profiler::rng;
use ecc_profiler::Execution;
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bits(s: &str) -> BitVector {
    s.parse().unwrap()
}

fn reference_code_vectors() -> Check {
    let code = HammingCode::reference_7_4();
    let c = code.encode(&bits("1000")).unwrap();
    ensure(c == bits("1000111"), || format!("encode(1000) = {c}"))?;

    let mut flipped = c.clone();
    flipped.flip(0);
    let out = code.decode(&flipped).unwrap();
    ensure(
        out.dataword == bits("1000") && out.action == DecodeAction::Corrected(0),
        || format!("single flip decoded to {:?}", out),
    )?;

    let out = code.decode(&bits("0110000")).unwrap();
    ensure(
        out.dataword == bits("0111") && out.action == DecodeAction::Corrected(3),
        || format!("double flip decoded to {:?}", out),
    )?;
    Ok("encode, correction and miscorrection match".into())
}

fn single_error_correction() -> Check {
    let mut cases = 0u64;
    for seed in 0..100 {
        let code = HammingCode::construct_random(64, seed).unwrap();
        ensure(code.n() == 71, || format!("seed {seed}: n = {}", code.n()))?;
        let mut data_rng = rng::stream(seed, &[0xDA7A]);
        for _ in 0..10 {
            let d = BitVector::from_u64(64, data_rng.gen());
            let c = code.encode(&d).unwrap();
            for i in 0..71 {
                let mut bad = c.clone();
                bad.flip(i);
                let out = code.decode(&bad).unwrap();
                ensure(
                    out.dataword == d && out.action == DecodeAction::Corrected(i),
                    || format!("seed {seed}, bit {i}: {:?}", out.action),
                )?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} single-bit errors corrected"))
}

fn oracle_matches_brute_force() -> Check {
    let sets = common::small_subsets(7, 3);
    let mut compared = 0;
    for seed in 0..200 {
        let code = HammingCode::construct_random(4, seed).unwrap();
        for positions in &sets {
            let profile = WordErrorProfile::uniform(&code, positions, 0.5).unwrap();
            let fast = oracle::ground_truth(&code, &profile).unwrap();
            let slow = common::brute_force_truth(&code, &profile);
            ensure(fast == slow, || {
                format!("seed {seed}, at-risk {positions:?}: {fast:?} != {slow:?}")
            })?;
            compared += 1;
        }
    }
    Ok(format!("{compared} (code, at-risk set) pairs agree"))
}

fn amplification_bounds() -> Check {
    let mut checked = 0;
    let mut largest = BTreeMap::new();
    for seed in 0..100 {
        let code = HammingCode::construct_random(64, seed).unwrap();
        let mut r = rng::stream(seed, &[0xB0]);
        for n in 2..=5usize {
            for _ in 0..10 {
                let profile =
                    WordErrorProfile::random(&code, n, 0.5, RiskPlacement::DataOnly, &mut r)
                        .unwrap();
                let all = oracle::ground_truth(&code, &profile)
                    .unwrap()
                    .all_risk
                    .len();
                ensure(n <= all && all < 1 << n, || {
                    format!("seed {seed}, n = {n}: |all_risk| = {all}")
                })?;
                let max = largest.entry(n).or_insert(0);
                *max = all.max(*max);
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} words within bounds, largest |all_risk| by n: {largest:?}"
    ))
}

fn wasted_capacity_values() -> Check {
    for i in 0..=10_000 {
        let p = f64::from(i) / 10_000.0;
        let w = experiments::wasted_capacity(1, p);
        ensure(w == 0.0, || format!("g = 1, p = {p}: {w}"))?;
    }
    let w = experiments::wasted_capacity(1024, 6.8e-3);
    ensure(w > 0.99 && w < 1.0, || format!("g = 1024: {w}"))?;
    Ok(format!(
        "g = 1 wastes nothing, g = 1024 at 6.8e-3 wastes {w:.5}"
    ))
}

fn evaluate(config: &ExperimentConfig, mut inspect: impl FnMut(&RoundMetrics)) -> Summary {
    let mut summarizer = Summarizer::new(config.rounds);
    experiments::run_evaluations(config, Execution::default(), |r| {
        inspect(r);
        summarizer.push(r);
        Ok(())
    })
    .unwrap();
    summarizer.finish(0.99).unwrap()
}

fn direct_coverage_trend() -> Check {
    let config = ExperimentConfig {
        probabilities: vec![0.5],
        patterns: vec![PatternKind::Charged],
        profilers: vec![ProfilerKind::HarpU, ProfilerKind::Naive],
        ..ExperimentConfig::default()
    };
    let mut words = 0;
    let mut covered_by_20 = 0;
    let summary = evaluate(&config, |r| {
        if r.profiler == ProfilerKind::HarpU && r.round == 19 {
            words += 1;
            covered_by_20 += usize::from(r.direct_coverage == 1.0);
        }
    });

    let mut violations = Vec::new();
    for &n in &config.error_counts {
        let cell = |p| CellKey::new(p, PatternKind::Charged, 0.5, Some(n));
        let harp: Vec<f64> = summary
            .curve(cell(ProfilerKind::HarpU))
            .map(|c| c.direct_coverage)
            .collect();
        let naive: Vec<f64> = summary
            .curve(cell(ProfilerKind::Naive))
            .map(|c| c.direct_coverage)
            .collect();
        ensure(
            harp.len() == config.rounds && naive.len() == config.rounds,
            || "missing rounds".into(),
        )?;
        for (round, (h, v)) in harp.iter().zip(&naive).enumerate() {
            if h < v {
                violations.push(format!("n = {n}, round {round}: {h} < {v}"));
            }
        }
    }
    ensure(violations.is_empty(), || violations.join("; "))?;
    let fraction = covered_by_20 as f64 / words as f64;
    ensure(words >= 1000 && fraction >= 0.99, || {
        format!("{covered_by_20}/{words} words fully covered within 20 rounds")
    })?;
    Ok(format!(
        "HARP-U mean >= Naive at every round; {covered_by_20}/{words} words covered within 20 rounds"
    ))
}

/// Random-pattern run over every probability and error count, shared by the
/// bootstrapping, max-simultaneous and BER checks.
struct RandomRun {
    config: ExperimentConfig,
    summary: Summary,
    /// HARP-U rows at or after full direct coverage with more than one
    /// unidentified simultaneous error.
    harp_excess: Vec<String>,
    harp_full_rows: usize,
}

fn random_run() -> &'static RandomRun {
    static RUN: OnceLock<RandomRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let config = ExperimentConfig {
            profilers: vec![ProfilerKind::Naive, ProfilerKind::Beep, ProfilerKind::HarpU],
            ..ExperimentConfig::default()
        };
        let mut harp_excess = Vec::new();
        let mut harp_full_rows = 0;
        let summary = evaluate(&config, |r| {
            if r.profiler == ProfilerKind::HarpU && r.direct_coverage == 1.0 {
                harp_full_rows += 1;
                if r.unidentified_max_simultaneous > 1 {
                    harp_excess.push(format!(
                        "code {} word {} n = {} p = {} round {}: {}",
                        r.code_index,
                        r.word_index,
                        r.error_count,
                        r.probability,
                        r.round,
                        r.unidentified_max_simultaneous
                    ));
                }
            }
        });
        RandomRun {
            config,
            summary,
            harp_excess,
            harp_full_rows,
        }
    })
}

fn bootstrapping_order() -> Check {
    let run = random_run();
    let mut medians = Vec::new();
    for &p in &run.config.probabilities {
        for &n in &run.config.error_counts {
            let median = |kind| {
                run.summary
                    .bootstrap(CellKey::new(kind, PatternKind::Random, p, Some(n)))
                    .map(|b| b.median)
                    .ok_or_else(|| format!("no bootstrapping row for {kind} p = {p} n = {n}"))
            };
            let (h, v, b) = (
                median(ProfilerKind::HarpU)?,
                median(ProfilerKind::Naive)?,
                median(ProfilerKind::Beep)?,
            );
            ensure(h <= v && v <= b, || {
                format!("p = {p}, n = {n}: HARP-U {h}, Naive {v}, BEEP {b}")
            })?;
            medians.push(format!("{p}/{n}:{h}<={v}<={b}"));
        }
    }
    Ok(format!(
        "median first-direct rounds (p/n: HARP-U<=Naive<=BEEP) {}",
        medians.join(" ")
    ))
}

fn max_simultaneous_after_coverage() -> Check {
    let run = random_run();
    ensure(run.harp_excess.is_empty(), || {
        format!(
            "{} rows exceed one: {}",
            run.harp_excess.len(),
            run.harp_excess[..run.harp_excess.len().min(3)].join("; ")
        )
    })?;
    Ok(format!(
        "{} fully covered HARP-U rows all at most one unidentified error",
        run.harp_full_rows
    ))
}

fn ber_endpoints() -> Check {
    let run = random_run();
    let zero = |kind, p: f64| {
        run.summary
            .rounds_to_zero_ber(CellKey::new(kind, PatternKind::Random, p, None))
    };
    let mut notes = Vec::new();
    for p in [0.5, 0.75, 1.0] {
        for kind in [ProfilerKind::HarpU, ProfilerKind::Naive] {
            let r = zero(kind, p).ok_or_else(|| format!("{kind} never reaches zero at p = {p}"))?;
            notes.push(format!("{kind}@{p}:{r}"));
        }
    }
    let harp_certain = zero(ProfilerKind::HarpU, 1.0).unwrap();
    ensure(harp_certain <= 1, || {
        format!("HARP-U reaches zero at round {harp_certain} at p = 1")
    })?;
    // Rounds taken, counting the round in which zero is reached.
    let naive = zero(ProfilerKind::Naive, 0.75).unwrap() + 1;
    let harp = zero(ProfilerKind::HarpU, 0.75).unwrap() + 1;
    let ratio = naive as f64 / harp as f64;
    ensure(ratio > 2.0, || {
        format!("Naive/HARP-U rounds at p = 0.75: {naive}/{harp} = {ratio:.2}")
    })?;
    Ok(format!(
        "zero-BER round index {}; Naive/HARP-U at 0.75 = {naive}/{harp} = {ratio:.2}",
        notes.join(" ")
    ))
}

fn probability_bands() -> Check {
    let config = ExperimentConfig {
        num_codes: 2,
        num_words_per_code: 20,
        ..ExperimentConfig::for_analysis(Analysis::Probabilities)
    };
    assert_eq!(config.trials, 10_000);
    let rows = experiments::collect_probabilities(&config, Execution::default()).unwrap();
    let pre: Vec<f64> = rows
        .iter()
        .filter(|r| r.class == BitClass::Pre)
        .map(|r| r.frequency)
        .collect();
    let worst = pre.iter().map(|f| (f - 0.5).abs()).fold(0.0, f64::max);
    ensure(!pre.is_empty() && worst <= 0.02, || {
        format!("pre-correction frequency off by {worst:.4} from 0.5")
    })?;

    let mut post: Vec<f64> = rows
        .iter()
        .filter(|r| r.class == BitClass::Post && r.error_count == 3)
        .map(|r| r.frequency)
        .collect();
    ensure(!post.is_empty(), || {
        "no post-correction records for n = 3".into()
    })?;
    post.sort_by(f64::total_cmp);
    let median = post[(post.len() - 1) / 2];
    ensure(median > 0.3 && median < 0.5, || {
        format!("n = 3 post-correction median {median:.4}")
    })?;
    Ok(format!(
        "{} pre-correction estimates within {worst:.4} of 0.5; n = 3 post-correction median {median:.4} over {} bits",
        pre.len(),
        post.len()
    ))
}

fn evaluation_csv(config: &ExperimentConfig, execution: Execution) -> String {
    let mut writer = MetricsCsvWriter::new(Vec::new(), config).unwrap();
    experiments::run_evaluations(config, execution, |r| Ok(writer.write(r)?)).unwrap();
    String::from_utf8(writer.finish().unwrap()).unwrap()
}

fn determinism_and_partitioning() -> Check {
    let config = ExperimentConfig {
        num_codes: 3,
        num_words_per_code: 6,
        rounds: 32,
        base_seed: 41,
        ..ExperimentConfig::default()
    };
    let first = evaluation_csv(&config, Execution::default());
    let second = evaluation_csv(&config, Execution::default());
    ensure(first == second, || "reruns differ".into())?;
    let sequential = evaluation_csv(&config, Execution::Sequential);
    ensure(first == sequential, || {
        "parallel and sequential runs differ".into()
    })?;

    let mut concatenated = String::new();
    for i in 0..3 {
        let single = ExperimentConfig {
            num_codes: 1,
            base_seed: config.base_seed + i,
            ..config.clone()
        };
        let body = common::csv_body(&evaluation_csv(&single, Execution::default()));
        let mut lines = body.lines();
        let header = lines.next().unwrap();
        if i == 0 {
            concatenated.push_str(header);
            concatenated.push('\n');
        }
        for line in lines {
            concatenated.push_str(line);
            concatenated.push('\n');
        }
    }
    ensure(common::csv_body(&first) == concatenated, || {
        "three-code run differs from three single-code runs".into()
    })?;
    let rows = first.lines().filter(|l| !l.starts_with('#')).count() - 1;
    Ok(format!(
        "{} bytes, {rows} rows reproduced and partitioned",
        first.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("reference code vectors", reference_code_vectors),
        (
            "single-error correction, exhaustive",
            single_error_correction,
        ),
        (
            "oracle equals brute-force enumeration",
            oracle_matches_brute_force,
        ),
        ("post-correction risk bounds", amplification_bounds),
        ("wasted capacity values", wasted_capacity_values),
        ("direct coverage trend", direct_coverage_trend),
        ("bootstrapping order", bootstrapping_order),
        (
            "max simultaneous errors after direct coverage",
            max_simultaneous_after_coverage,
        ),
        ("BER endpoints", ber_endpoints),
        ("per-bit probability bands", probability_bands),
        ("determinism and partitioning", determinism_and_partitioning),
    ];

    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!(
        "\n{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
