//! Closed-form quantities that need no simulation.

/// Expected fraction of capacity lost to internal fragmentation when every
/// `granularity`-bit block holding an error is repaired whole, with
/// independent per-bit error probability `raw_ber`.
///
/// A block is repaired with probability `1 - q^g` (with `q = 1 - raw_ber`)
/// and then wastes its non-erroneous bits, giving `q - q^g` overall.
pub fn wasted_capacity(granularity: u32, raw_ber: f64) -> f64 {
    assert!(granularity >= 1, "granularity must be at least 1");
    assert!(
        (0.0..=1.0).contains(&raw_ber),
        "raw bit error rate {raw_ber} outside [0, 1]"
    );
    let q = 1.0 - raw_ber;
    q - q.powi(granularity as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmplificationRow {
    /// Nonempty pre-correction error patterns over `n` bits.
    pub unique_patterns: u128,
    /// Patterns with two or more errors.
    pub uncorrectable_patterns: u128,
    /// Worst-case bits at risk after correction: `n` direct plus one
    /// distinct miscorrection per uncorrectable pattern.
    pub max_post_risk: u128,
}

/// Worst-case amplification of `n` at-risk bits by a single-error-correcting
/// code.
pub fn amplification_row(n: u32) -> AmplificationRow {
    assert!((1..128).contains(&n), "n must be in [1, 127], got {n}");
    let all = (1u128 << n) - 1;
    AmplificationRow {
        unique_patterns: all,
        uncorrectable_patterns: all - u128::from(n),
        max_post_risk: all,
    }
}

pub const WASTED_CAPACITY_GRANULARITIES: [u32; 6] = [1, 4, 16, 64, 256, 1024];

/// `(granularity, raw_ber, wasted)` rows over raw bit error rates from 1e-6
/// to 1 (ten points per decade).
pub fn wasted_capacity_table() -> Vec<(u32, f64, f64)> {
    let bers: Vec<f64> = (0..=60)
        .map(|i| 10f64.powf(-6.0 + f64::from(i) / 10.0))
        .collect();
    WASTED_CAPACITY_GRANULARITIES
        .iter()
        .flat_map(|&g| {
            bers.iter()
                .map(move |&p| (g, p, wasted_capacity(g, p.min(1.0))))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_granularity_wastes_nothing() {
        for i in 0..=1000 {
            let p = f64::from(i) / 1000.0;
            assert_eq!(wasted_capacity(1, p), 0.0, "p = {p}");
        }
    }

    #[test]
    fn coarse_repair_is_wasteful() {
        // 1 - (1 - 6.8e-3)^1024 - 6.8e-3, evaluated independently.
        let p: f64 = 6.8e-3;
        let expected = 1.0 - (1024.0 * (-p).ln_1p()).exp() - p;
        let w = wasted_capacity(1024, p);
        assert!((w - expected).abs() < 1e-12);
        assert!(w > 0.99 && w < 1.0, "{w}");
        assert!((w - 0.99227).abs() < 1e-4, "{w}");
    }

    #[test]
    fn waste_declines_at_high_error_rates() {
        assert_eq!(wasted_capacity(1024, 1.0), 0.0);
        assert_eq!(wasted_capacity(1024, 0.0), 0.0);
        assert!(wasted_capacity(1024, 0.9) < wasted_capacity(1024, 0.5));
        assert!((wasted_capacity(1024, 0.999) - 0.001).abs() < 1e-9);
    }

    #[test]
    fn amplification_table() {
        let row = |n| {
            let r = amplification_row(n);
            (r.unique_patterns, r.uncorrectable_patterns, r.max_post_risk)
        };
        assert_eq!(row(1), (1, 0, 1));
        assert_eq!(row(2), (3, 1, 3));
        assert_eq!(row(3), (7, 4, 7));
        assert_eq!(row(4), (15, 11, 15));
        assert_eq!(row(8), (255, 247, 255));
    }

    #[test]
    fn table_covers_every_granularity() {
        let table = wasted_capacity_table();
        assert_eq!(table.len(), 6 * 61);
        assert!(table.iter().filter(|r| r.0 == 1).all(|r| r.2 == 0.0));
        assert!(table.iter().all(|r| (0.0..1.0).contains(&r.2)));
    }
}
