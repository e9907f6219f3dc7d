//! Reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ecc_profiler::codec::HammingCode;
use ecc_profiler::error_model::WordErrorProfile;
use ecc_profiler::gf2::BitVector;
use ecc_profiler::oracle::RiskGroundTruth;

/// Ground truth by writing every one of the 2^k datawords and decoding every
/// nonempty combination of failing active cells.
pub fn brute_force_truth(code: &HammingCode, profile: &WordErrorProfile) -> RiskGroundTruth {
    let k = code.k();
    assert!(k <= 16, "brute force is limited to short codes");
    let mut truth = RiskGroundTruth::default();
    for value in 0..1u64 << k {
        let d = BitVector::from_u64(k, value);
        let c = code.encode(&d).unwrap();
        let active: Vec<usize> = profile
            .at_risk()
            .iter()
            .filter(|b| b.polarity.is_active(c.get(b.position)))
            .map(|b| b.position)
            .collect();
        for mask in 1u64..1 << active.len() {
            let failed: BTreeSet<usize> = (0..active.len())
                .filter(|t| mask >> t & 1 == 1)
                .map(|t| active[t])
                .collect();
            let mut stored = c.clone();
            for &i in &failed {
                stored.flip(i);
            }
            let read = code.decode(&stored).unwrap().dataword;
            let errors: Vec<usize> = read.xor(&d).iter_ones().collect();
            truth.max_simultaneous = truth.max_simultaneous.max(errors.len());
            for i in errors {
                if failed.contains(&i) {
                    truth.direct_risk.insert(i);
                } else {
                    truth.indirect_risk.insert(i);
                }
            }
        }
    }
    truth.all_risk = truth
        .direct_risk
        .union(&truth.indirect_risk)
        .copied()
        .collect();
    truth
}

/// All subsets of `0..n` with between 1 and `max` elements.
pub fn small_subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n)
        .filter(|m| (m.count_ones() as usize) <= max)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// CSV body without the leading comment lines.
pub fn csv_body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
