//! The connection center evolution engine.
//!
//! At power `k` the engine holds `Sᵏ` rescaled so its largest entry is 1. A
//! point `i` is a connection center when its self-connectivity weakly
//! dominates its row: `Sᵏ[i][i] >= Sᵏ[i][j]` for every `j`. Every other point
//! joins the center `c` with the largest relative connectivity
//! `Sᵏ[c][j] / Sᵏ[c][c]`. Both decisions are homogeneous of degree zero in the
//! matrix, so the uniform rescale never changes them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CceError, Result};
use crate::matrix::SquareMatrix;
use crate::similarity::SimilarityMatrix;

pub const DEFAULT_K_MAX: usize = 1000;
pub const DEFAULT_NOISE_THRESHOLD: usize = 2;

/// `Sᵏ` up to a positive scale factor.
#[derive(Debug, Clone)]
pub struct PowerState {
    k: usize,
    matrix: SquareMatrix,
    base: Arc<SimilarityMatrix>,
}

impl PowerState {
    /// The order-1 state for `base`.
    pub fn new(base: Arc<SimilarityMatrix>) -> Self {
        let mut matrix = base.matrix().clone();
        rescale_by_max(&mut matrix);
        Self { k: 1, matrix, base }
    }

    /// Advances the state to `k` (which must be at least the current order).
    pub fn at_power(base: Arc<SimilarityMatrix>, k: usize) -> Self {
        assert!(k >= 1, "power order starts at 1");
        let mut state = Self::new(base);
        while state.k < k {
            state.advance();
        }
        state
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The rescaled `Sᵏ`.
    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn base(&self) -> &Arc<SimilarityMatrix> {
        &self.base
    }

    /// Returns the state for `k + 1`.
    pub fn power_step(&self) -> Self {
        let mut next = self.clone();
        next.advance();
        next
    }

    /// Multiplies by the base matrix in place, then rescales and symmetrizes.
    pub fn advance(&mut self) {
        let mut m = self.matrix.matmul(self.base.matrix());
        rescale_by_max(&mut m);
        m.symmetrize();
        self.matrix = m;
        self.k += 1;
    }

    pub fn find_centers(&self, epsilon: f64) -> Vec<usize> {
        find_centers(&self.matrix, epsilon)
    }

    /// Finds centers and assigns every point for the current `k`.
    pub fn snapshot(&self, epsilon: f64) -> ClusterSnapshot {
        let centers = self.find_centers(epsilon);
        let (centers, labels) = assign_points(&self.matrix, &centers);
        ClusterSnapshot {
            k: self.k,
            centers,
            labels,
        }
    }
}

fn rescale_by_max(m: &mut SquareMatrix) {
    let max = m.max_entry();
    if max > 0.0 && max != 1.0 {
        m.map_in_place(|x| x / max);
    }
}

/// Indices `i` with `m[i][i] >= m[i][j] - epsilon` for all `j`, ascending.
pub fn find_centers(m: &SquareMatrix, epsilon: f64) -> Vec<usize> {
    (0..m.order())
        .filter(|&i| {
            let d = m.get(i, i);
            m.row(i).iter().all(|&x| d >= x - epsilon)
        })
        .collect()
}

/// Assigns each non-center to the center of largest relative connectivity.
///
/// Returns the (possibly extended) center set and per-point labels. Ties go to
/// the lowest center index. A center with zero self-connectivity attracts no
/// points. A non-center with zero connectivity to every center becomes a
/// singleton center of its own.
pub fn assign_points(m: &SquareMatrix, centers: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = m.order();
    let mut is_center = vec![false; n];
    for &c in centers {
        is_center[c] = true;
    }
    let attracting: Vec<(usize, f64)> = centers
        .iter()
        .map(|&c| (c, m.get(c, c)))
        .filter(|&(_, d)| d > 0.0)
        .collect();

    let mut labels = Vec::with_capacity(n);
    let mut out_centers = centers.to_vec();
    for j in 0..n {
        if is_center[j] {
            labels.push(j);
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for &(c, d) in &attracting {
            let rcon = m.get(c, j) / d;
            if rcon > 0.0 && best.map_or(true, |(_, b)| rcon > b) {
                best = Some((c, rcon));
            }
        }
        match best {
            Some((c, _)) => labels.push(c),
            None => {
                labels.push(j);
                out_centers.push(j);
            }
        }
    }
    out_centers.sort_unstable();
    (out_centers, labels)
}

/// Clustering at a single power `k`. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSnapshot {
    pub k: usize,
    pub centers: Vec<usize>,
    /// `labels[i]` is the index of the center point `i` belongs to.
    pub labels: Vec<usize>,
}

impl ClusterSnapshot {
    pub fn cluster_count(&self) -> usize {
        self.centers.len()
    }

    /// Members of each center's cluster, in center order.
    pub fn clusters(&self) -> Vec<(usize, Vec<usize>)> {
        self.centers
            .iter()
            .map(|&c| {
                let members = (0..self.labels.len()).filter(|&i| self.labels[i] == c).collect();
                (c, members)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    CollapsedToOne,
    ReachedKMax,
    ZeroMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub snapshots: Vec<ClusterSnapshot>,
    pub stop_reason: StopReason,
}

impl EvolutionTrace {
    pub fn counts(&self) -> Vec<usize> {
        self.snapshots.iter().map(ClusterSnapshot::cluster_count).collect()
    }

    pub fn k_stop(&self) -> usize {
        self.snapshots.last().map_or(0, |s| s.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub k_max: usize,
    pub epsilon: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            epsilon: 0.0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(CceError::Parameter("k_max must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(CceError::Parameter(format!(
                "epsilon must be a finite nonnegative number, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Runs `k = 1, 2, …` until a single cluster remains or `k_max` is reached.
pub fn run_evolution(s: &SimilarityMatrix, config: &EvolutionConfig) -> Result<EvolutionTrace> {
    run_evolution_with(s, config, |_, _| {})
}

/// Like [`run_evolution`], calling `observe` with each state and its snapshot.
pub fn run_evolution_with<F>(
    s: &SimilarityMatrix,
    config: &EvolutionConfig,
    mut observe: F,
) -> Result<EvolutionTrace>
where
    F: FnMut(&PowerState, &ClusterSnapshot),
{
    config.validate()?;
    let mut state = PowerState::new(Arc::new(s.clone()));
    let mut snapshots = Vec::new();
    let stop_reason = loop {
        let snap = state.snapshot(config.epsilon);
        observe(&state, &snap);
        let count = snap.cluster_count();
        snapshots.push(snap);
        if state.matrix().is_zero() {
            break StopReason::ZeroMatrix;
        }
        if count == 1 {
            break StopReason::CollapsedToOne;
        }
        if state.k() >= config.k_max {
            break StopReason::ReachedKMax;
        }
        state.advance();
    };
    Ok(EvolutionTrace {
        snapshots,
        stop_reason,
    })
}

/// A snapshot after removing small clusters. Removed members are noise and
/// carry no label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredSnapshot {
    pub k: usize,
    pub centers: Vec<usize>,
    pub labels: Vec<Option<usize>>,
    pub noise: Vec<usize>,
}

impl FilteredSnapshot {
    pub fn cluster_count(&self) -> usize {
        self.centers.len()
    }
}

/// Drops clusters with at most `max_noise_size` members.
pub fn filter_noise(snapshot: &ClusterSnapshot, max_noise_size: usize) -> FilteredSnapshot {
    let n = snapshot.labels.len();
    let mut sizes = vec![0usize; n];
    for &l in &snapshot.labels {
        sizes[l] += 1;
    }
    let keep = |c: usize| sizes[c] > max_noise_size;
    let centers = snapshot.centers.iter().copied().filter(|&c| keep(c)).collect();
    let mut labels = Vec::with_capacity(n);
    let mut noise = Vec::new();
    for (i, &l) in snapshot.labels.iter().enumerate() {
        if keep(l) {
            labels.push(Some(l));
        } else {
            labels.push(None);
            noise.push(i);
        }
    }
    FilteredSnapshot {
        k: snapshot.k,
        centers,
        labels,
        noise,
    }
}
