use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::cda::LabeledPartition;

/// One tested user's CDA category against the ensemble's verdict.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserOutcome {
    pub user_id: String,
    pub cda: u32,
    pub nlpca: u32,
    /// Messages classified for this user.
    pub tweets: usize,
}

impl UserOutcome {
    pub fn agrees(&self) -> bool {
        self.cda == self.nlpca
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub precision: f64,
    pub jackknife_err: f64,
    pub users: usize,
    pub blocks: usize,
}

/// Fraction of agreeing users with a delete-block jackknife error.
///
/// Records are put in canonical order, shuffled with `seed`, and cut into
/// `min(blocks, n)` contiguous blocks of near-equal size. With `P_b` the
/// precision leaving block `b` out, the error is
/// `sqrt((B-1)/B · Σ (P_b - mean)²)`.
pub fn agreement_precision(records: &[UserOutcome], blocks: usize, seed: u64) -> Result<Agreement, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty("user records"));
    }
    if blocks == 0 {
        return Err(EvalError::InvalidParameter("jackknife needs at least one block".into()));
    }
    let mut sorted: Vec<&UserOutcome> = records.iter().collect();
    sorted.sort();
    sorted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = sorted.len();
    let hits: Vec<bool> = sorted.iter().map(|r| r.agrees()).collect();
    let total_hits = hits.iter().filter(|&&h| h).count();
    let precision = total_hits as f64 / n as f64;

    let b = blocks.min(n);
    let mut estimates = Vec::with_capacity(b);
    for k in 0..b {
        let (lo, hi) = (k * n / b, (k + 1) * n / b);
        let block_hits = hits[lo..hi].iter().filter(|&&h| h).count();
        let rest = n - (hi - lo);
        if rest > 0 {
            estimates.push((total_hits - block_hits) as f64 / rest as f64);
        }
    }
    let jackknife_err = if estimates.len() < 2 {
        0.0
    } else {
        let m = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / m;
        ((m - 1.0) / m * estimates.iter().map(|p| (p - mean).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(Agreement { precision, jackknife_err, users: n, blocks: b })
}

/// Inclusive tweet-count bins; the last is open-ended.
pub const TWEET_BINS: [(usize, Option<usize>); 4] = [(1, Some(3)), (4, Some(10)), (11, Some(31)), (32, None)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: usize,
    pub hi: Option<usize>,
    pub users: usize,
    pub agree: usize,
    /// `None` for an empty bin.
    pub fraction: Option<f64>,
    /// `sqrt(agree) / users`.
    pub poisson_err: Option<f64>,
}

pub fn binned_agreement(records: &[UserOutcome]) -> Vec<Bin> {
    TWEET_BINS
        .iter()
        .map(|&(lo, hi)| {
            let inside = records.iter().filter(|r| r.tweets >= lo && hi.is_none_or(|h| r.tweets <= h));
            let (users, agree) = inside.fold((0, 0), |(u, a), r| (u + 1, a + usize::from(r.agrees())));
            let (fraction, poisson_err) = if users == 0 {
                (None, None)
            } else {
                (Some(agree as f64 / users as f64), Some((agree as f64).sqrt() / users as f64))
            };
            Bin { lo, hi, users, agree, fraction, poisson_err }
        })
        .collect()
}

/// Share of nodes outside the catch-all category.
pub fn coverage(lp: &LabeledPartition) -> f64 {
    if lp.is_empty() {
        return 1.0;
    }
    let outside = (0..lp.len()).filter(|&i| !lp.is_catch_all(i)).count();
    outside as f64 / lp.len() as f64
}

/// `(1+β²)·P·R / (β²·P + R)`, and 0 when the denominator vanishes.
pub fn f_beta(p: f64, r: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * p + r;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserEntropy {
    pub bits: f64,
    pub distinct: usize,
}

/// Shannon entropy (base 2) of a prediction histogram, with the number of
/// categories that received at least one prediction. Zero counts are
/// ignored.
pub fn user_entropy<I: IntoIterator<Item = usize>>(counts: I) -> UserEntropy {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: usize = counts.iter().sum();
    let bits = if counts.len() <= 1 {
        0.0
    } else {
        let t = total as f64;
        -counts.iter().map(|&c| c as f64 / t).map(|p| p * p.log2()).sum::<f64>()
    };
    UserEntropy { bits, distinct: counts.len() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub tweets: usize,
    pub users: usize,
    pub mean_entropy: f64,
    pub mean_distinct: f64,
}

/// Mean entropy and mean distinct-category count grouped by tweet count.
pub fn entropy_curve(entries: &[(usize, UserEntropy)]) -> Vec<EntropyPoint> {
    let mut groups: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
    for (tweets, e) in entries {
        let g = groups.entry(*tweets).or_default();
        g.0 += 1;
        g.1 += e.bits;
        g.2 += e.distinct as f64;
    }
    groups
        .into_iter()
        .map(|(tweets, (users, h, d))| EntropyPoint {
            tweets,
            users,
            mean_entropy: h / users as f64,
            mean_distinct: d / users as f64,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misassignment {
    pub shared_users: usize,
    pub wrong_a: usize,
    pub wrong_b: usize,
    pub wrong_both: usize,
    pub jaccard: f64,
    /// `|W_A ∩ W_B| / min(|W_A|, |W_B|)`; `None` when either set is empty.
    pub overlap_of_smaller: Option<f64>,
}

/// Compare the misassigned users of two evaluations over the users both
/// evaluated. Two empty misassignment sets have Jaccard index 1.
pub fn misassigned_intersection(a: &[UserOutcome], b: &[UserOutcome]) -> Result<Misassignment, EvalError> {
    let ua: BTreeMap<&str, &UserOutcome> = a.iter().map(|r| (r.user_id.as_str(), r)).collect();
    let ub: BTreeMap<&str, &UserOutcome> = b.iter().map(|r| (r.user_id.as_str(), r)).collect();
    let shared: Vec<&str> = ua.keys().filter(|k| ub.contains_key(*k)).copied().collect();
    if shared.is_empty() {
        return Err(EvalError::DisjointUniverses);
    }
    let wa: BTreeSet<&str> = shared.iter().filter(|u| !ua[*u].agrees()).copied().collect();
    let wb: BTreeSet<&str> = shared.iter().filter(|u| !ub[*u].agrees()).copied().collect();
    let both = wa.intersection(&wb).count();
    let union = wa.union(&wb).count();
    let jaccard = if union == 0 { 1.0 } else { both as f64 / union as f64 };
    let smaller = wa.len().min(wb.len());
    Ok(Misassignment {
        shared_users: shared.len(),
        wrong_a: wa.len(),
        wrong_b: wb.len(),
        wrong_both: both,
        jaccard,
        overlap_of_smaller: (smaller > 0).then(|| both as f64 / smaller as f64),
    })
}
