//! Exact Euclidean geometry, clustering cost, and dataset containers.
//!
//! Datasets are normalized so the minimum pairwise distance over distinct
//! points is 1; the aspect ratio `eta` is then simply the maximum pairwise
//! distance. Exact duplicates are legal data and do not participate in the
//! minimum.

use std::path::Path;

use crate::error::{Error, Result};

/// A point in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Panics if `coords` is empty or contains a non-finite value.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "point must have dimension >= 1");
        assert!(
            coords.iter().all(|c| c.is_finite()),
            "point coordinates must be finite"
        );
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

/// Euclidean distance `||p - q||`.
///
/// Panics on dimension mismatch (contract violation).
pub fn euclidean_distance(p: &Point, q: &Point) -> f64 {
    squared_distance(p, q).sqrt()
}

/// Squared Euclidean distance, the quantity the cost function sums.
pub fn squared_distance(p: &Point, q: &Point) -> f64 {
    assert_eq!(
        p.dim(),
        q.dim(),
        "dimension mismatch: {} vs {}",
        p.dim(),
        q.dim()
    );
    p.coords
        .iter()
        .zip(&q.coords)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Coordinate-wise mean of a nonempty multiset of points.
pub fn centroid(points: &[Point]) -> Result<Point> {
    let first = points.first().ok_or(Error::TooFewPoints(0))?;
    let dim = first.dim();
    let mut acc = vec![0.0f64; dim];
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        for (a, c) in acc.iter_mut().zip(p.coords()) {
            *a += c;
        }
    }
    let n = points.len() as f64;
    Ok(Point::new(acc.into_iter().map(|a| a / n).collect()))
}

/// Neumaier compensated summation. Cost terms span many orders of
/// magnitude (up to `N * eta^2`), where naive summation loses digits.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// An ordered list of centers. Ties in "nearest center" are broken by the
/// lowest index everywhere the choice is observable.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    centers: Vec<Point>,
}

impl CenterSet {
    /// Panics if `centers` is empty or dimensions disagree.
    pub fn new(centers: Vec<Point>) -> Self {
        assert!(!centers.is_empty(), "center set must be nonempty");
        let dim = centers[0].dim();
        assert!(
            centers.iter().all(|c| c.dim() == dim),
            "center dimensions disagree"
        );
        Self { centers }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.centers[i]
    }

    /// Index of the nearest center and its squared distance; ties go to
    /// the lowest index.
    pub fn nearest(&self, p: &Point) -> (usize, f64) {
        let mut best = (0usize, squared_distance(p, &self.centers[0]));
        for (j, c) in self.centers.iter().enumerate().skip(1) {
            let d2 = squared_distance(p, c);
            if d2 < best.1 {
                best = (j, d2);
            }
        }
        best
    }
}

/// A normalized dataset: minimum pairwise distance over distinct points
/// is 1, `eta` is the maximum pairwise distance, `scale` is the divisor
/// that was applied to the raw coordinates.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<Point>,
    dim: usize,
    eta: f64,
    scale: f64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Aspect ratio: maximum pairwise distance (the minimum is 1 after
    /// normalization).
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Normalization divisor applied to the raw coordinates.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// SHA-256 digest of the normalized coordinates, for run reports.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        h.update((self.dim as u64).to_le_bytes());
        for p in &self.points {
            for c in p.coords() {
                h.update(c.to_bits().to_le_bytes());
            }
        }
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Scales raw points so the minimum pairwise distance over distinct
/// points becomes 1, and records the resulting aspect ratio.
///
/// Exact duplicates are kept; they do not define the minimum. Errors if
/// fewer than two points are given or all points coincide.
pub fn normalize_dataset(raw: Vec<Point>) -> Result<Dataset> {
    if raw.len() < 2 {
        return Err(Error::TooFewPoints(raw.len()));
    }
    let dim = raw[0].dim();
    for (i, p) in raw.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        if !p.coords().iter().all(|c| c.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index: i });
        }
    }

    let mut min_sq = f64::INFINITY;
    for i in 0..raw.len() {
        for j in (i + 1)..raw.len() {
            let d2 = squared_distance(&raw[i], &raw[j]);
            if d2 > 0.0 && d2 < min_sq {
                min_sq = d2;
            }
        }
    }
    if !min_sq.is_finite() {
        return Err(Error::DegenerateDataset);
    }
    let scale = min_sq.sqrt();

    let points: Vec<Point> = raw
        .into_iter()
        .map(|p| Point::new(p.coords().iter().map(|c| c / scale).collect()))
        .collect();

    let mut max_sq = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            max_sq = max_sq.max(squared_distance(&points[i], &points[j]));
        }
    }

    Ok(Dataset {
        points,
        dim,
        eta: max_sq.sqrt(),
        scale,
    })
}

/// Aspect ratio of a normalized dataset.
pub fn aspect_ratio(dataset: &Dataset) -> f64 {
    dataset.eta()
}

/// Exact k-means cost: sum over points of squared distance to the
/// nearest center. Accumulated with compensated summation.
pub fn exact_cost(dataset: &Dataset, centers: &CenterSet) -> f64 {
    assert_eq!(
        dataset.dim(),
        centers.dim(),
        "dataset/center dimension mismatch"
    );
    compensated_sum(dataset.points().iter().map(|p| centers.nearest(p).1))
}

/// Reads a CSV dataset (one point per row, `#` comment lines allowed)
/// and normalizes it.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match coords {
            Ok(c) if !c.is_empty() => raw.push(Point::new(c)),
            Ok(_) => {
                return Err(Error::CsvParse {
                    path: display,
                    line: lineno + 1,
                    msg: "empty row".into(),
                })
            }
            Err(e) => {
                return Err(Error::CsvParse {
                    path: display,
                    line: lineno + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    normalize_dataset(raw)
}

/// Writes raw points as CSV, one point per row.
pub fn write_csv(path: &Path, points: &[Point]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for p in points {
        let row: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
