//! Point sets, similarity matrices and preference installation.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::matrix::SquareMatrix;

/// An ordered collection of `dim`-dimensional points with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from row vectors. All rows must share one length.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::Empty("point set"))?;
        if dim == 0 {
            return Err(invalid("dimension", "points need at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (row, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if let Some(col) = p.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, coords })
    }

    /// Builds a point set from flat row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension", "points need at least one coordinate"));
        }
        if coords.is_empty() {
            return Err(Error::Empty("point set"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * (coords.len() / dim + 1),
                found: coords.len(),
            });
        }
        if let Some(p) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: p / dim,
                col: p % dim,
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Dense `n x n` similarity matrix. Off-diagonal entries are similarities
/// `s(i, k)`; diagonal entries are preferences once installed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix(SquareMatrix);

impl SimilarityMatrix {
    /// Validates that the matrix is nonempty and all entries are finite.
    pub fn new(values: SquareMatrix) -> Result<Self> {
        if values.n() == 0 {
            return Err(Error::Empty("similarity matrix"));
        }
        if let Some((row, col)) = values.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(SquareMatrix::from_vec(n, data)?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.n()
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.0.get(i, k)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    #[inline]
    pub fn preference(&self, k: usize) -> f64 {
        self.0.get(k, k)
    }

    pub fn preferences(&self) -> Vec<f64> {
        (0..self.n()).map(|k| self.preference(k)).collect()
    }

    /// Dissimilarity `-s(i, k)`.
    #[inline]
    pub fn dissimilarity(&self, i: usize, k: usize) -> f64 {
        -self.0.get(i, k)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    /// Principal submatrix on `indices` (which may also be a permutation).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self(self.0.select(indices))
    }

    /// Off-diagonal entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n();
        self.0
            .as_slice()
            .iter()
            .enumerate()
            .filter(move |(p, _)| p / n != p % n)
            .map(|(_, &v)| v)
    }

    /// Adds seeded symmetric noise of magnitude at most `scale * range` to
    /// every off-diagonal pair, where `range` spans all off-diagonal entries.
    pub fn jittered(&self, scale: f64, seed: u64) -> Self {
        let (lo, hi) = self
            .off_diagonal()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let range = if hi > lo { hi - lo } else { 0.0 };
        let amp = scale * range;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = self.0.clone();
        let n = self.n();
        for i in 0..n {
            for k in i + 1..n {
                let e = amp * rng.random_range(-1.0..1.0);
                m.set(i, k, m.get(i, k) + e);
                m.set(k, i, m.get(k, i) + e);
            }
        }
        Self(m)
    }
}

/// How the diagonal of a similarity matrix is filled.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PreferenceSpec {
    /// Median of all off-diagonal similarities, applied to every point.
    #[default]
    Median,
    Uniform(f64),
    Explicit(Vec<f64>),
}

/// Negative squared Euclidean similarities; the diagonal is left at zero.
pub fn neg_sq_euclidean(ps: &PointSet) -> Result<SimilarityMatrix> {
    let n = ps.len();
    if n == 0 {
        return Err(Error::Empty("point set"));
    }
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        let xi = ps.point(i);
        for k in i + 1..n {
            let d: f64 = xi.iter().zip(ps.point(k)).map(|(a, b)| (a - b) * (a - b)).sum();
            m.set(i, k, -d);
            m.set(k, i, -d);
        }
    }
    SimilarityMatrix::new(m)
}

/// Overwrites the diagonal of `s` according to `spec`.
pub fn install_preferences(s: SimilarityMatrix, spec: &PreferenceSpec) -> Result<SimilarityMatrix> {
    let n = s.n();
    let mut m = s.into_matrix();
    match spec {
        PreferenceSpec::Median => {
            // A single point has no off-diagonal entries; keep its preference at 0.
            let p = if n > 1 {
                let mut vals: Vec<f64> = SimilarityMatrix(m.clone()).off_diagonal().collect();
                median(&mut vals)
            } else {
                0.0
            };
            (0..n).for_each(|k| m.set(k, k, p));
        }
        PreferenceSpec::Uniform(p) => {
            if !p.is_finite() {
                return Err(invalid("preference", "must be finite"));
            }
            (0..n).for_each(|k| m.set(k, k, *p));
        }
        PreferenceSpec::Explicit(ps) => {
            if ps.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: ps.len(),
                });
            }
            if let Some(k) = ps.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: k, col: k });
            }
            ps.iter().enumerate().for_each(|(k, &p)| m.set(k, k, p));
        }
    }
    SimilarityMatrix::new(m)
}

/// Median of a nonempty slice; even lengths average the two middle values.
/// The slice is reordered.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty set");
    values.sort_unstable_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}
