//! Exact ground truth for which data bits can ever read back wrong.
//!
//! A word's at-risk bits can only fail while they store '1'. The values the
//! at-risk cells can hold together are the image of the encoder restricted to
//! those cells, which is a linear subspace: we enumerate it as a column span
//! instead of walking all `2^k` datawords. For every reachable activity
//! vector, every nonempty subset of its active bits is a possible
//! pre-correction error pattern; decoding that pattern by syndrome gives the
//! post-correction errors it causes.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::codec::HammingCode;
use crate::error_model::WordErrorProfile;
use crate::gf2::{self, BitVector, Gf2Error};

/// Most at-risk bits per word the enumeration accepts.
pub const MAX_AT_RISK_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{n} at-risk bits exceed the enumeration limit of {limit}")]
    TooManyAtRiskBits { n: usize, limit: usize },
    #[error(
        "profile is for a ({profile_n}, {profile_k}) word but the code is ({code_n}, {code_k})"
    )]
    ShapeMismatch {
        profile_k: usize,
        profile_n: usize,
        code_k: usize,
        code_n: usize,
    },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RiskGroundTruth {
    /// Data bits that can fail and stay uncorrected.
    pub direct_risk: BTreeSet<usize>,
    /// Data bits a miscorrection can flip.
    pub indirect_risk: BTreeSet<usize>,
    pub all_risk: BTreeSet<usize>,
    /// Most post-correction errors any single outcome produces.
    pub max_simultaneous: usize,
}

/// Every distinct set of post-correction data errors a word can exhibit.
#[derive(Debug, Clone)]
pub struct RealizableOutcomes {
    k: usize,
    outcomes: Vec<BitVector>,
    truth: RiskGroundTruth,
}

fn check_shape(code: &HammingCode, profile: &WordErrorProfile) -> Result<(), OracleError> {
    if profile.k() != code.k() || profile.p() != code.p() {
        return Err(OracleError::ShapeMismatch {
            profile_k: profile.k(),
            profile_n: profile.k() + profile.p(),
            code_k: code.k(),
            code_n: code.n(),
        });
    }
    if profile.len() > MAX_AT_RISK_BITS {
        return Err(OracleError::TooManyAtRiskBits {
            n: profile.len(),
            limit: MAX_AT_RISK_BITS,
        });
    }
    Ok(())
}

/// Restrictions of `encode(d)` to the profile's at-risk positions, over all
/// datawords `d`. Bit `t` of each vector refers to `profile.at_risk()[t]`.
pub fn achievable_activity_sets(
    code: &HammingCode,
    profile: &WordErrorProfile,
) -> Result<BTreeSet<BitVector>, OracleError> {
    check_shape(code, profile)?;
    let positions = profile.positions();
    let k = code.k();
    // Column i: how data bit i reaches each at-risk cell.
    let columns: Vec<BitVector> = (0..k)
        .map(|i| {
            BitVector::from_indices(
                positions.len(),
                positions.iter().enumerate().filter_map(|(t, &pos)| {
                    let reaches = if pos < k {
                        pos == i
                    } else {
                        code.column_value(i) >> (pos - k) & 1 == 1
                    };
                    reaches.then_some(t)
                }),
            )
        })
        .collect();
    Ok(gf2::column_span(positions.len(), &columns)?)
}

impl RealizableOutcomes {
    /// Outcomes over every data pattern the word can store.
    pub fn enumerate(code: &HammingCode, profile: &WordErrorProfile) -> Result<Self, OracleError> {
        let activity = achievable_activity_sets(code, profile)?;
        Ok(Self::from_activity(
            code,
            profile,
            activity.iter().map(BitVector::to_u64),
        ))
    }

    /// Outcomes while the word holds one particular codeword.
    pub fn for_stored_codeword(
        code: &HammingCode,
        profile: &WordErrorProfile,
        codeword: &BitVector,
    ) -> Result<Self, OracleError> {
        check_shape(code, profile)?;
        let active = profile
            .at_risk()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.polarity.is_active(codeword.get(b.position)))
            .fold(0u64, |m, (t, _)| m | 1 << t);
        Ok(Self::from_activity(code, profile, std::iter::once(active)))
    }

    fn from_activity(
        code: &HammingCode,
        profile: &WordErrorProfile,
        activity: impl Iterator<Item = u64>,
    ) -> Self {
        let positions = profile.positions();
        let n = positions.len();
        let mut visited = vec![false; 1 << n];
        let mut distinct: HashSet<BitVector> = HashSet::new();
        let mut truth = RiskGroundTruth::default();

        for active in activity {
            // Walk the nonempty submasks of `active`.
            let mut subset = active;
            while subset != 0 {
                if !visited[subset as usize] {
                    visited[subset as usize] = true;
                    let errors = outcome_of(code, &positions, subset, &mut truth);
                    truth.max_simultaneous = truth.max_simultaneous.max(errors.count_ones());
                    distinct.insert(errors);
                }
                subset = (subset - 1) & active;
            }
        }
        truth.all_risk = truth
            .direct_risk
            .union(&truth.indirect_risk)
            .copied()
            .collect();

        let mut outcomes: Vec<BitVector> = distinct.into_iter().filter(|e| !e.is_zero()).collect();
        outcomes.sort();
        RealizableOutcomes {
            k: code.k(),
            outcomes,
            truth,
        }
    }

    pub fn truth(&self) -> &RiskGroundTruth {
        &self.truth
    }

    pub fn into_truth(self) -> RiskGroundTruth {
        self.truth
    }

    /// Distinct nonempty post-correction error sets, as length-`k` masks.
    pub fn outcomes(&self) -> &[BitVector] {
        &self.outcomes
    }

    pub fn max_unidentified(&self, identified: &BTreeSet<usize>) -> usize {
        self.max_unidentified_mask(&BitVector::from_indices(
            self.k,
            identified.iter().copied().filter(|&i| i < self.k),
        ))
    }

    /// As [`Self::max_unidentified`], with `identified` given as a mask.
    pub fn max_unidentified_mask(&self, identified: &BitVector) -> usize {
        self.outcomes
            .iter()
            .map(|e| e.count_and_not(identified))
            .max()
            .unwrap_or(0)
    }
}

/// Post-correction data errors when exactly the at-risk bits in `subset` flip.
fn outcome_of(
    code: &HammingCode,
    positions: &[usize],
    subset: u64,
    truth: &mut RiskGroundTruth,
) -> BitVector {
    let k = code.k();
    let flipped = || {
        (0..positions.len())
            .filter(move |t| subset >> t & 1 == 1)
            .map(|t| positions[t])
    };
    let syndrome = flipped().fold(0u32, |s, pos| s ^ code.column_value(pos));
    let corrected = if syndrome == 0 {
        None
    } else {
        code.position_of_syndrome(syndrome)
    };

    let mut errors = BitVector::zeros(k);
    for pos in flipped().filter(|&pos| pos < k && corrected != Some(pos)) {
        errors.set(pos, true);
        truth.direct_risk.insert(pos);
    }
    if let Some(j) = corrected {
        if j < k && flipped().all(|pos| pos != j) {
            errors.set(j, true);
            truth.indirect_risk.insert(j);
        }
    }
    errors
}

pub fn ground_truth(
    code: &HammingCode,
    profile: &WordErrorProfile,
) -> Result<RiskGroundTruth, OracleError> {
    Ok(RealizableOutcomes::enumerate(code, profile)?.into_truth())
}

/// Largest number of simultaneous post-correction errors outside
/// `identified`: the correction capability a secondary code needs to catch
/// whatever is left.
pub fn max_unidentified_simultaneous(
    code: &HammingCode,
    profile: &WordErrorProfile,
    identified: &BTreeSet<usize>,
) -> Result<usize, OracleError> {
    Ok(RealizableOutcomes::enumerate(code, profile)?.max_unidentified(identified))
}

/// Fraction of `truth_set` found in `identified`; 1 for an empty truth set.
pub fn coverage(identified: &BTreeSet<usize>, truth_set: &BTreeSet<usize>) -> f64 {
    if truth_set.is_empty() {
        1.0
    } else {
        truth_set.intersection(identified).count() as f64 / truth_set.len() as f64
    }
}
