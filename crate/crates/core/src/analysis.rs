//! Reading an evolution trace: platforms of the count-vs-k curve, ranked
//! cluster-count suggestions, and counts the evolution jumps over.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::evolution::{filter_noise, EvolutionTrace};

pub const DEFAULT_MIN_PLATFORM: usize = 2;

/// A maximal run of consecutive `k` with a constant cluster count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Platform {
    pub k_start: usize,
    pub k_end: usize,
    pub count: usize,
    /// Labels are identical at every `k` in the run, not just the count.
    pub partition_stable: bool,
}

impl Platform {
    pub fn length(&self) -> usize {
        self.k_end - self.k_start + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub count: usize,
    /// Total length of all platforms with this count.
    pub length: usize,
}

/// Per-`k` counts and labels after noise filtering. A threshold of zero
/// leaves the raw clustering.
fn filtered_series(trace: &EvolutionTrace, max_noise_size: usize) -> Vec<(usize, usize, Vec<Option<usize>>)> {
    trace
        .snapshots
        .iter()
        .map(|s| {
            let f = filter_noise(s, max_noise_size);
            (f.k, f.cluster_count(), f.labels)
        })
        .collect()
}

/// Platforms of length at least `min_length`, ordered by `k_start`.
///
/// Counts are taken after removing clusters of at most `max_noise_size`
/// members; pass 0 to use the raw counts.
pub fn detect_platforms(trace: &EvolutionTrace, min_length: usize, max_noise_size: usize) -> Vec<Platform> {
    let series = filtered_series(trace, max_noise_size);
    let min_length = min_length.max(1);
    let mut platforms = Vec::new();
    let mut start = 0;
    while start < series.len() {
        let (k_start, count, ref first_labels) = series[start];
        let mut end = start;
        let mut stable = true;
        while end + 1 < series.len() && series[end + 1].1 == count {
            end += 1;
            stable &= &series[end].2 == first_labels;
        }
        let p = Platform {
            k_start,
            k_end: series[end].0,
            count,
            partition_stable: stable,
        };
        if p.length() >= min_length {
            platforms.push(p);
        }
        start = end + 1;
    }
    platforms
}

/// Distinct platform counts ranked by total platform length, longest first.
///
/// A final single-cluster platform is the trivial end state and is not
/// suggested; neither is a platform where every cluster was noise. Ties are
/// broken by the earliest platform start.
pub fn suggest_counts(platforms: &[Platform]) -> Vec<Suggestion> {
    let last = platforms.len().checked_sub(1);
    // (count, total length, first k_start)
    let mut acc: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, p) in platforms.iter().enumerate() {
        if p.count == 0 || (p.count == 1 && Some(idx) == last) {
            continue;
        }
        match acc.iter_mut().find(|(c, _, _)| *c == p.count) {
            Some(entry) => entry.1 += p.length(),
            None => acc.push((p.count, p.length(), p.k_start)),
        }
    }
    acc.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    acc.into_iter()
        .map(|(count, length, _)| Suggestion { count, length })
        .collect()
}

/// Counts strictly between the final and initial raw counts that never occur.
pub fn skipped_counts(trace: &EvolutionTrace) -> BTreeSet<usize> {
    let counts = trace.counts();
    let (Some(&first), Some(&last)) = (counts.first(), counts.last()) else {
        return BTreeSet::new();
    };
    let (lo, hi) = if first <= last { (first, last) } else { (last, first) };
    let seen: BTreeSet<usize> = counts.iter().copied().collect();
    ((lo + 1)..hi).filter(|c| !seen.contains(c)).collect()
}
