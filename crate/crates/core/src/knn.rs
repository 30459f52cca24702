//! Exact k-nearest-neighbor radii and marginal neighbor counts under the
//! max-norm.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Paired samples `(x_i, y_i)`, stored row-major.
///
/// One of the marginals may have dimension zero (useful for pure-X
/// fixtures); the joint dimension must be at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d_x: usize,
    d_y: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from flat row-major buffers of `n * d_x` and
    /// `n * d_y` values.
    pub fn new(x: Vec<f64>, d_x: usize, y: Vec<f64>, d_y: usize) -> Result<Self> {
        if d_x + d_y == 0 {
            return Err(Error::config("joint dimension must be at least 1"));
        }
        let n = x.len().checked_div(d_x).unwrap_or(y.len() / d_y.max(1));
        if x.len() != n * d_x || y.len() != n * d_y {
            return Err(Error::config(format!(
                "buffer sizes {} and {} do not describe the same number of rows for d_x={d_x}, d_y={d_y}",
                x.len(),
                y.len()
            )));
        }
        if let Some(&bad) = x.iter().chain(&y).find(|v| !v.is_finite()) {
            return Err(Error::Domain {
                what: "dataset entries must be finite",
                value: bad,
            });
        }
        Ok(Dataset { n, d_x, d_y, x, y })
    }

    /// Builds a dataset from per-sample rows. All rows of a marginal must
    /// share one length.
    pub fn from_rows(x_rows: &[Vec<f64>], y_rows: &[Vec<f64>]) -> Result<Self> {
        if x_rows.len() != y_rows.len() {
            return Err(Error::config(format!(
                "x has {} rows but y has {}",
                x_rows.len(),
                y_rows.len()
            )));
        }
        let d_x = x_rows.first().map_or(0, Vec::len);
        let d_y = y_rows.first().map_or(0, Vec::len);
        if x_rows.iter().any(|r| r.len() != d_x) || y_rows.iter().any(|r| r.len() != d_y) {
            return Err(Error::config("ragged rows"));
        }
        Dataset::new(x_rows.concat(), d_x, y_rows.concat(), d_y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn d_y(&self) -> usize {
        self.d_y
    }

    pub fn d_joint(&self) -> usize {
        self.d_x + self.d_y
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d_x..(i + 1) * self.d_x]
    }

    pub fn y_row(&self, i: usize) -> &[f64] {
        &self.y[i * self.d_y..(i + 1) * self.d_y]
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x
    }

    pub fn y_values(&self) -> &[f64] {
        &self.y
    }

    /// The same samples with the roles of X and Y exchanged.
    pub fn swapped(&self) -> Dataset {
        Dataset {
            n: self.n,
            d_x: self.d_y,
            d_y: self.d_x,
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// Reorders the Y rows by `perm` (row `i` of the result takes Y row
    /// `perm[i]`), leaving X in place.
    pub fn with_y_permuted(&self, perm: &[usize]) -> Result<Dataset> {
        check_permutation(perm, self.n)?;
        let y = perm
            .iter()
            .flat_map(|&p| self.y_row(p).iter().copied())
            .collect();
        Ok(Dataset { y, ..self.clone() })
    }

    /// Reorders whole samples by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Dataset> {
        check_permutation(perm, self.n)?;
        let x = perm
            .iter()
            .flat_map(|&p| self.x_row(p).iter().copied())
            .collect();
        let y = perm
            .iter()
            .flat_map(|&p| self.y_row(p).iter().copied())
            .collect();
        Ok(Dataset {
            x,
            y,
            ..self.clone()
        })
    }

    /// Hex SHA-256 over the shape and the little-endian bytes of every value.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for dim in [self.n, self.d_x, self.d_y] {
            hasher.update((dim as u64).to_le_bytes());
        }
        for v in self.x.iter().chain(&self.y) {
            hasher.update(v.to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::config(
            "permutation length does not match sample count",
        ));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::config("not a permutation"));
        }
    }
    Ok(())
}

/// Per-point k-th joint neighbor distance and marginal neighbor counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSet {
    pub epsilon: Vec<f64>,
    pub n_x: Vec<usize>,
    pub n_y: Vec<usize>,
    pub k: usize,
}

impl RadiusSet {
    pub fn len(&self) -> usize {
        self.epsilon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilon.is_empty()
    }
}

/// Max-norm distance, abandoning the scan as soon as it reaches `cutoff`.
/// The returned value is exact whenever it is below `cutoff`.
#[inline]
fn chebyshev_capped(a: &[f64], b: &[f64], cutoff: f64) -> f64 {
    let mut dist = 0.0f64;
    for (p, q) in a.iter().zip(b) {
        let diff = (p - q).abs();
        if diff > dist {
            dist = diff;
            if dist >= cutoff {
                break;
            }
        }
    }
    dist
}

/// k-th smallest joint distance from point `i` to every other point.
fn kth_joint_distance(data: &Dataset, i: usize, k: usize) -> f64 {
    // ascending; only the values matter, so index tie-breaking is implicit
    let mut best = vec![f64::INFINITY; k];
    let (xi, yi) = (data.x_row(i), data.y_row(i));
    for j in 0..data.n {
        if j == i {
            continue;
        }
        let cutoff = best[k - 1];
        let dx = chebyshev_capped(xi, data.x_row(j), cutoff);
        if dx >= cutoff {
            continue;
        }
        let d = dx.max(chebyshev_capped(yi, data.y_row(j), cutoff));
        if d >= cutoff {
            continue;
        }
        let mut pos = k - 1;
        while pos > 0 && best[pos - 1] > d {
            best[pos] = best[pos - 1];
            pos -= 1;
        }
        best[pos] = d;
    }
    best[k - 1]
}

fn count_within(values: &[f64], dim: usize, n: usize, i: usize, radius: f64) -> usize {
    let query = &values[i * dim..(i + 1) * dim];
    (0..n)
        .filter(|&j| {
            j != i && chebyshev_capped(query, &values[j * dim..(j + 1) * dim], radius) < radius
        })
        .count()
}

/// Computes the k-th joint neighbor distance `epsilon[i]` under the
/// max-norm over the concatenated `(x, y)` vector, and counts `n_x[i]`,
/// `n_y[i]` of other points whose marginal max-norm distance is strictly
/// below `epsilon[i]`.
///
/// Exact O(N² D) scan, parallel over query points. Each point's result is
/// independent of the others and of the thread count.
pub fn compute_knn_radii(data: &Dataset, k: usize) -> Result<RadiusSet> {
    let n = data.n;
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::config(format!(
            "k = {k} must be smaller than the sample count {n}"
        )));
    }
    let (d_x, d_y) = (data.d_x, data.d_y);
    let per_point: Vec<(f64, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let eps = kth_joint_distance(data, i, k);
            if eps == 0.0 {
                return (eps, 0, 0);
            }
            let n_x = count_within(&data.x, d_x, n, i, eps);
            let n_y = count_within(&data.y, d_y, n, i, eps);
            (eps, n_x, n_y)
        })
        .collect();

    if let Some(index) = per_point.iter().position(|p| p.0 == 0.0) {
        return Err(Error::DuplicatePoint { index });
    }
    let mut radii = RadiusSet {
        epsilon: Vec::with_capacity(n),
        n_x: Vec::with_capacity(n),
        n_y: Vec::with_capacity(n),
        k,
    };
    for (eps, n_x, n_y) in per_point {
        radii.epsilon.push(eps);
        radii.n_x.push(n_x);
        radii.n_y.push(n_y);
    }
    Ok(radii)
}
