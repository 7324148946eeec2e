//! Similarity matrix construction: Gaussian kernel over point sets,
//! precomputed matrices, and route networks, plus degree normalization.

use std::collections::{HashMap, HashSet};

use crate::error::{CceError, Result};
use crate::matrix::SquareMatrix;

/// Relative tolerance for symmetry checks on ingest.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A set of `n` points in `R^L` with optional identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<Vec<f64>>,
    ids: Vec<String>,
}

impl PointSet {
    /// Creates a point set whose identifiers are the 0-based indices.
    pub fn new(coords: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..coords.len()).map(|i| i.to_string()).collect();
        Self::with_ids(coords, ids)
    }

    pub fn with_ids(coords: Vec<Vec<f64>>, ids: Vec<String>) -> Result<Self> {
        let Some(first) = coords.first() else {
            return Err(CceError::Input("point set is empty".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(CceError::Input("points must have dimension >= 1".into()));
        }
        if ids.len() != coords.len() {
            return Err(CceError::Input(format!(
                "{} identifiers for {} points",
                ids.len(),
                coords.len()
            )));
        }
        for (i, p) in coords.iter().enumerate() {
            if p.len() != dim {
                return Err(CceError::Input(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if let Some(d) = p.iter().position(|x| !x.is_finite()) {
                return Err(CceError::Input(format!(
                    "point {i} has a non-finite coordinate in dimension {d}"
                )));
            }
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(CceError::Input(format!("duplicate point identifier {id:?}")));
            }
        }
        Ok(Self { dim, coords, ids })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn squared_distance(&self, i: usize, j: usize) -> f64 {
        self.coords[i]
            .iter()
            .zip(&self.coords[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Symmetric, nonnegative, finite pairwise similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    entries: SquareMatrix,
    labels: Vec<String>,
}

impl SimilarityMatrix {
    /// Validates and ingests a precomputed matrix.
    ///
    /// The matrix must be square, finite, nonnegative and symmetric to within
    /// [`SYMMETRY_TOLERANCE`] relative. The stored matrix is `(S + Sᵀ) / 2`.
    pub fn from_matrix(rows: &[Vec<f64>], labels: Option<Vec<String>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(CceError::Input("similarity matrix is empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(CceError::Validation {
                    row: i,
                    col: row.len(),
                    rule: format!("row has {} entries, matrix must be {n}x{n}", row.len()),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(CceError::Validation {
                        row: i,
                        col: j,
                        rule: "entry is not finite".into(),
                    });
                }
                if x < 0.0 {
                    return Err(CceError::Validation {
                        row: i,
                        col: j,
                        rule: format!("entry {x} is negative"),
                    });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE * a.abs().max(1.0) {
                    return Err(CceError::Validation {
                        row: i,
                        col: j,
                        rule: format!("asymmetric: {a} vs transposed entry {b}"),
                    });
                }
            }
        }
        let mut entries = SquareMatrix::from_rows(rows).expect("shape checked above");
        entries.symmetrize();
        Self::from_parts(entries, labels)
    }

    /// Wraps an already symmetric nonnegative matrix.
    pub(crate) fn from_trusted(entries: SquareMatrix, labels: Vec<String>) -> Self {
        debug_assert!(entries.is_exactly_symmetric());
        Self { entries, labels }
    }

    fn from_parts(entries: SquareMatrix, labels: Option<Vec<String>>) -> Result<Self> {
        let n = entries.order();
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(CceError::Input(format!("{} labels for order-{n} matrix", l.len())))
            }
            Some(l) => l,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(Self { entries, labels })
    }

    pub fn order(&self) -> usize {
        self.entries.order()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.entries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.to_rows()
    }

    /// Uniformly scaled copy. `factor` must be positive and finite.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(CceError::Parameter(format!("scale factor {factor} must be positive")));
        }
        Ok(Self {
            entries: self.entries.scaled(factor),
            labels: self.labels.clone(),
        })
    }
}

/// `s_ij = exp(-‖v_i − v_j‖² / σ²)`.
pub fn gaussian_kernel(points: &PointSet, sigma: f64) -> Result<SimilarityMatrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CceError::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let n = points.len();
    let inv = 1.0 / (sigma * sigma);
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, 1.0);
        for j in (i + 1)..n {
            let s = (-points.squared_distance(i, j) * inv).exp();
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }
    Ok(SimilarityMatrix::from_trusted(m, points.ids().to_vec()))
}

/// Median of all pairwise Euclidean distances; used for `--sigma auto`.
///
/// Falls back to `1.0` when the median is zero (all points identical) or the
/// set has a single point.
pub fn median_pairwise_distance(points: &PointSet) -> f64 {
    let n = points.len();
    let mut d: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| points.squared_distance(i, j).sqrt())
        .collect();
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let median = if d.len() % 2 == 0 {
        0.5 * (d[mid - 1] + d[mid])
    } else {
        d[mid]
    };
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

/// Symmetric degree normalization `D^(-1/2) S D^(-1/2)`, `D` the row sums.
/// The diagonal of `S` is kept.
pub fn njw_normalize(s: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    let n = s.order();
    let mut inv_sqrt = Vec::with_capacity(n);
    for i in 0..n {
        let d: f64 = s.matrix().row(i).iter().sum();
        if d <= 0.0 {
            return Err(CceError::IsolatedPoint {
                index: i,
                label: s.labels()[i].clone(),
            });
        }
        inv_sqrt.push(1.0 / d.sqrt());
    }
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = s.get(i, j) * inv_sqrt[i] * inv_sqrt[j];
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(SimilarityMatrix::from_trusted(m, s.labels().to_vec()))
}

/// Stations and ordered routes of a transport network.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteNetwork {
    stations: Vec<String>,
    routes: Vec<Vec<usize>>,
}

impl RouteNetwork {
    /// Validates routes against the station list.
    pub fn new(stations: Vec<String>, routes: Vec<Vec<String>>) -> Result<Self> {
        let mut index = HashMap::with_capacity(stations.len());
        for (i, s) in stations.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                return Err(CceError::Input(format!("duplicate station {s:?}")));
            }
        }
        let mut resolved = Vec::with_capacity(routes.len());
        for (r, route) in routes.iter().enumerate() {
            if route.len() < 2 {
                return Err(CceError::Input(format!(
                    "route {r} has {} station(s); at least 2 required",
                    route.len()
                )));
            }
            let mut seen = HashSet::with_capacity(route.len());
            let mut ids = Vec::with_capacity(route.len());
            for name in route {
                let &i = index
                    .get(name.as_str())
                    .ok_or_else(|| CceError::Input(format!("route {r} references unknown station {name:?}")))?;
                if !seen.insert(i) {
                    return Err(CceError::Input(format!("route {r} visits station {name:?} twice")));
                }
                ids.push(i);
            }
            resolved.push(ids);
        }
        Ok(Self {
            stations,
            routes: resolved,
        })
    }

    /// Builds a network whose station list is the order of first appearance
    /// across the routes.
    pub fn from_routes(routes: Vec<Vec<String>>) -> Result<Self> {
        let mut stations: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        for name in routes.iter().flatten() {
            if seen.insert(name.clone()) {
                stations.push(name.clone());
            }
        }
        Self::new(stations, routes)
    }

    pub fn stations(&self) -> &[String] {
        &self.stations
    }

    /// Routes as station indices.
    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }
}

/// Route-count similarity.
///
/// Off-diagonal `s_ij` counts route segments joining `i` and `j` in either
/// direction. A terminal station of a route gains the route's station count on
/// its diagonal; an intermediate station gains 2.
pub fn from_routes(net: &RouteNetwork) -> SimilarityMatrix {
    let n = net.stations.len();
    let mut m = SquareMatrix::zeros(n);
    for route in &net.routes {
        let len = route.len();
        for (pos, &st) in route.iter().enumerate() {
            let weight = if pos == 0 || pos == len - 1 { len as f64 } else { 2.0 };
            m.set(st, st, m.get(st, st) + weight);
        }
        for pair in route.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            m.set(a, b, m.get(a, b) + 1.0);
            m.set(b, a, m.get(b, a) + 1.0);
        }
    }
    SimilarityMatrix::from_trusted(m, net.stations.clone())
}
