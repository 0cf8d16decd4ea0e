//! Domain types shared by every stage of the pipeline.
//!
//! All types validate their invariants on construction and are immutable
//! afterwards, so they can be shared freely across threads.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::Hash;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Strictly increasing observation times inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        for &t in &points {
            if !t.is_finite() || !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidGrid(format!("point {t} outside [0, 1]")));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Grid { points })
    }

    /// `size` equi-spaced points covering `[0, 1]`, endpoints included.
    pub fn uniform(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {size}")));
        }
        let last = (size - 1) as f64;
        Grid::new((0..size).map(|i| i as f64 / last).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Sub-grid made of the points at `indices` (must be increasing).
    pub fn select(&self, indices: &[usize]) -> Result<Grid> {
        Grid::new(indices.iter().map(|&i| self.points[i]).collect())
    }
}

/// One functional observation: values recorded on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Grid,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidCurve(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve(format!(
                "non-finite value at t = {}",
                grid.points()[pos]
            )));
        }
        Ok(Curve { grid, values })
    }

    /// Samples `f` on `grid`.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Curve::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Curve> {
        Curve::new(self.grid.clone(), self.values.iter().map(|v| v * factor).collect())
    }
}

/// How the curves of a dataset were observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Every curve shares one grid.
    Regular,
    /// Curve-specific scattered grids.
    Irregular,
    /// Curve-specific grids with contiguous missing stretches.
    Fragmented,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Regular => "regular",
            Regime::Irregular => "irregular",
            Regime::Fragmented => "fragmented",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regular" => Ok(Regime::Regular),
            "irregular" => Ok(Regime::Irregular),
            "fragmented" => Ok(Regime::Fragmented),
            other => Err(Error::Config(format!("unknown regime `{other}`"))),
        }
    }
}

/// A sample of `n >= 3` curves together with its observation regime.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    ids: Vec<String>,
    curves: Vec<Curve>,
    regime: Regime,
}

impl FunctionalDataset {
    /// Curves get ids `"0"`, `"1"`, ... in order.
    pub fn new(curves: Vec<Curve>, regime: Regime) -> Result<Self> {
        let ids = (0..curves.len()).map(|i| i.to_string()).collect();
        FunctionalDataset::with_ids(ids, curves, regime)
    }

    pub fn with_ids(ids: Vec<String>, curves: Vec<Curve>, regime: Regime) -> Result<Self> {
        if curves.len() < 3 {
            return Err(Error::InvalidDataset(format!(
                "need at least 3 curves, got {}",
                curves.len()
            )));
        }
        if ids.len() != curves.len() {
            return Err(Error::LengthMismatch {
                expected: curves.len(),
                got: ids.len(),
            });
        }
        if regime == Regime::Regular {
            let first = curves[0].grid();
            if curves.iter().any(|c| c.grid() != first) {
                return Err(Error::InvalidDataset(
                    "regular regime requires identical grids".into(),
                ));
            }
        }
        Ok(FunctionalDataset { ids, curves, regime })
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// The shared grid of a regular dataset.
    pub fn common_grid(&self) -> Option<&Grid> {
        match self.regime {
            Regime::Regular => Some(self.curves[0].grid()),
            _ => None,
        }
    }

    /// Sorted union of all observation times.
    pub fn union_grid(&self) -> Grid {
        if let Some(g) = self.common_grid() {
            return g.clone();
        }
        let mut all: Vec<f64> = self
            .curves
            .iter()
            .flat_map(|c| c.times().iter().copied())
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        Grid::new(all).expect("union of valid grids is a valid grid")
    }

    /// Same curves under a different regime tag.
    pub fn with_regime(&self, regime: Regime) -> Result<Self> {
        FunctionalDataset::with_ids(self.ids.clone(), self.curves.clone(), regime)
    }
}

/// One `(curve-id, time, value)` observation in long format.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub curve: String,
    pub time: f64,
    pub value: f64,
}

impl Record {
    pub fn new(curve: impl Into<String>, time: f64, value: f64) -> Self {
        Record {
            curve: curve.into(),
            time,
            value,
        }
    }
}

/// Orders curve ids numerically when both parse as integers.
pub(crate) fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Assembles a dataset from long-format records.
///
/// Records are grouped by curve id and sorted by time. The regime is
/// `Regular` when every grid is identical and `Irregular` otherwise, unless
/// `fragmented` is set, in which case it is `Fragmented`.
pub fn build_dataset(records: &[Record], fragmented: bool) -> Result<FunctionalDataset> {
    let mut groups: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if !r.time.is_finite() || !(0.0..=1.0).contains(&r.time) {
            return Err(Error::OutOfDomain {
                curve: r.curve.clone(),
                time: r.time,
            });
        }
        if !r.value.is_finite() {
            return Err(Error::NonFiniteValue {
                curve: r.curve.clone(),
                time: r.time,
            });
        }
        groups.entry(&r.curve).or_default().push((r.time, r.value));
    }
    let mut keys: Vec<&str> = groups.keys().copied().collect();
    keys.sort_by(|a, b| compare_ids(a, b));

    let mut ids = Vec::with_capacity(keys.len());
    let mut curves = Vec::with_capacity(keys.len());
    for key in keys {
        let mut obs = groups.remove(key).unwrap_or_default();
        obs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = obs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateObservation {
                curve: key.to_string(),
                time: w[0].0,
            });
        }
        if obs.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "curve `{key}` has fewer than 2 distinct times"
            )));
        }
        let (times, values): (Vec<f64>, Vec<f64>) = obs.into_iter().unzip();
        curves.push(Curve::new(Grid::new(times)?, values)?);
        ids.push(key.to_string());
    }
    if curves.len() < 3 {
        return Err(Error::InvalidDataset(format!(
            "need at least 3 curves, got {}",
            curves.len()
        )));
    }
    let regime = if fragmented {
        Regime::Fragmented
    } else if curves.iter().all(|c| c.grid() == curves[0].grid()) {
        Regime::Regular
    } else {
        Regime::Irregular
    };
    FunctionalDataset::with_ids(ids, curves, regime)
}

/// Assignment of `n` items to `K` non-empty clusters.
///
/// Labels are stored zero-based and always in canonical form: clusters are
/// numbered by order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Canonicalizes an arbitrary label list.
    pub fn from_labels<T: Eq + Hash + Clone>(raw: &[T]) -> Self {
        let mut seen = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l.clone()).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            k: seen.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Labels numbered `1..=K`.
    pub fn labels_one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Member indices of every cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Canonical partition from raw integer labels.
pub fn partition_from_labels(labels: &[i64]) -> Partition {
    Partition::from_labels(labels)
}

/// `n x M` matrix of projections; row `i` is the projected vector of curve `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedMatrix(DMatrix<f64>);

impl ProjectedMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite projection".into()));
        }
        Ok(ProjectedMatrix(entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        ProjectedMatrix::new(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Symmetric, zero-diagonal, non-negative `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix(DMatrix<f64>);

impl DissimilarityMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: entries.ncols(),
            });
        }
        for i in 0..n {
            if entries[(i, i)] != 0.0 {
                return Err(Error::InvalidDataset("non-zero diagonal".into()));
            }
            for j in 0..i {
                let v = entries[(i, j)];
                if !v.is_finite() || v < 0.0 || v != entries[(j, i)] {
                    return Err(Error::InvalidDataset(format!(
                        "entry ({i}, {j}) breaks symmetry or non-negativity"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix(entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        DissimilarityMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Every entry multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        DissimilarityMatrix::new(&self.0 * c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records_on(grids: &[&[f64]]) -> Vec<Record> {
        let mut out = Vec::new();
        for (i, g) in grids.iter().enumerate() {
            for &t in g.iter() {
                out.push(Record::new(format!("c{i}"), t, t * (i as f64 + 1.0)));
            }
        }
        out
    }

    #[test]
    fn identical_grids_are_regular() {
        let g = [0.0, 0.5, 1.0];
        let ds = build_dataset(&records_on(&[&g, &g, &g]), false).unwrap();
        assert_eq!(ds.regime(), Regime::Regular);
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn mismatched_grids_are_irregular() {
        let ds = build_dataset(
            &records_on(&[&[0.0, 0.5, 1.0], &[0.0, 0.3, 1.0], &[0.0, 0.5, 1.0]]),
            false,
        )
        .unwrap();
        assert_eq!(ds.regime(), Regime::Irregular);
    }

    #[test]
    fn fragmented_flag_is_honoured() {
        let g = [0.0, 0.5, 1.0];
        let ds = build_dataset(&records_on(&[&g, &g, &g]), true).unwrap();
        assert_eq!(ds.regime(), Regime::Fragmented);
    }

    #[test]
    fn out_of_domain_time_rejected() {
        let mut recs = records_on(&[&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]]);
        recs.push(Record::new("c0", 1.5, 0.0));
        assert!(matches!(
            build_dataset(&recs, false),
            Err(Error::OutOfDomain { time, .. }) if time == 1.5
        ));
    }

    #[test]
    fn duplicate_record_names_offender() {
        let mut recs = records_on(&[&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]]);
        recs.push(Record::new("c1", 1.0, 3.0));
        match build_dataset(&recs, false) {
            Err(Error::DuplicateObservation { curve, time }) => {
                assert_eq!(curve, "c1");
                assert_eq!(time, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_and_small_inputs_rejected() {
        let mut recs = records_on(&[&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]]);
        recs.push(Record::new("c2", 0.5, f64::NAN));
        assert!(matches!(
            build_dataset(&recs, false),
            Err(Error::NonFiniteValue { .. })
        ));
        let two = records_on(&[&[0.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            build_dataset(&two, false),
            Err(Error::InvalidDataset(_))
        ));
        let single = records_on(&[&[0.0, 1.0], &[0.0, 1.0], &[0.5]]);
        assert!(build_dataset(&single, false).is_err());
    }

    #[test]
    fn records_sorted_by_time_and_ids_numeric() {
        let recs = vec![
            Record::new("10", 1.0, 1.0),
            Record::new("10", 0.0, 0.0),
            Record::new("2", 0.0, 0.0),
            Record::new("2", 1.0, 2.0),
            Record::new("1", 1.0, 3.0),
            Record::new("1", 0.0, 0.0),
        ];
        let ds = build_dataset(&recs, false).unwrap();
        assert_eq!(ds.ids(), &["1", "2", "10"]);
        assert_eq!(ds.curves()[0].values(), &[0.0, 3.0]);
    }

    #[test]
    fn renumbering_by_first_appearance() {
        let p = partition_from_labels(&[7, 7, 2, 2, 7]);
        assert_eq!(p.labels_one_based(), vec![1, 1, 2, 2, 1]);
        assert_eq!(p.k(), 2);
        let id = partition_from_labels(&[1, 2, 3]);
        assert_eq!(id.labels_one_based(), vec![1, 2, 3]);
        assert_eq!(id.k(), 3);
        let s = Partition::from_labels(&["a", "b", "a"]);
        assert_eq!(s, partition_from_labels(&[1, 2, 1]));
        assert_eq!(s.k(), 2);
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(vec![0.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.0]).is_err());
        assert!(Grid::new(vec![0.2, 0.1]).is_err());
        assert!(Grid::new(vec![-0.1, 0.5]).is_err());
        let u = Grid::uniform(5).unwrap();
        assert_eq!(u.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn dissimilarity_invariants() {
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
    }
}
