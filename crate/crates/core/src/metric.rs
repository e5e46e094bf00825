//! Metric spaces the process runs in.
//!
//! Two concrete settings are supported: the plane with the ℓ2 distance, and a
//! fixed-dimension embedding space with the square-root cosine dissimilarity
//! `sqrt(2 - 2 cos θ)`. The latter is only a pseudo-metric on the full vector
//! space: positively co-linear vectors are at distance zero. A small
//! table-backed [`FiniteMetric`] covers hand-built instances.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default embedding dimension of the sentence encoder.
pub const DEFAULT_EMBED_DIM: usize = 512;

/// A point in the Euclidean plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point2D { x, y })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// An embedding vector, optionally tagged with the sentence it encodes.
#[derive(Debug, Clone, Serialize)]
pub struct EmbedVec {
    components: Arc<[f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source_text: Option<Arc<str>>,
    #[serde(skip)]
    norm: f64,
}

impl EmbedVec {
    /// Rejects non-finite components and the zero vector.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("embedding components"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm <= 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(EmbedVec {
            components: components.into(),
            source_text: None,
            norm,
        })
    }

    pub fn with_text(mut self, text: impl Into<Arc<str>>) -> Self {
        self.source_text = Some(text.into());
        self
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn source_text(&self) -> Option<&str> {
        self.source_text.as_deref()
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

impl PartialEq for EmbedVec {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components && self.source_text == other.source_text
    }
}

/// Selects one of the two configured settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Euclid2D,
    Embedding { dimension: usize },
}

impl SpaceKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceKind::Embedding { dimension: 0 } => {
                Err(Error::Config("embedding dimension must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Euclid2D => f.write_str("euclid2d"),
            SpaceKind::Embedding { dimension } => write!(f, "embedding:{dimension}"),
        }
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "euclid" | "euclid2d" | "euclidean" => Ok(SpaceKind::Euclid2D),
            "embedding" | "text" => Ok(SpaceKind::Embedding {
                dimension: DEFAULT_EMBED_DIM,
            }),
            other => match other.strip_prefix("embedding:") {
                Some(dim) => {
                    let dimension = dim
                        .parse()
                        .map_err(|_| Error::Config(format!("bad embedding dimension `{dim}`")))?;
                    let kind = SpaceKind::Embedding { dimension };
                    kind.validate()?;
                    Ok(kind)
                }
                None => Err(Error::Config(format!("unknown space `{other}`"))),
            },
        }
    }
}

/// A point of either setting, for code that dispatches on [`SpaceKind`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Point {
    Euclid(Point2D),
    Embed(EmbedVec),
}

/// A distance function over some point type, plus the centroid the mediator
/// scores coalitions against.
pub trait MetricSpace: Send + Sync {
    type Point: Clone + fmt::Debug + Send + Sync + Serialize;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// Size-weighted centroid of coalition points.
    fn centroid(&self, points: &[(&Self::Point, f64)]) -> Result<Self::Point>;
}

/// Spaces where points can be averaged.
pub trait LinearSpace: MetricSpace {
    fn weighted_mean(&self, points: &[(&Self::Point, f64)]) -> Result<Self::Point>;
}

fn check_weights<P>(points: &[(P, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("weighted point list"));
    }
    let mut total = 0.0;
    for (_, w) in points {
        if !(w.is_finite() && *w > 0.0) {
            return Err(Error::InvalidWeight(*w));
        }
        total += w;
    }
    Ok(total)
}

/// The plane with the ℓ2 distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Euclid2D;

impl MetricSpace for Euclid2D {
    type Point = Point2D;

    fn dist(&self, a: &Point2D, b: &Point2D) -> Result<f64> {
        Ok(a.distance(b))
    }

    fn centroid(&self, points: &[(&Point2D, f64)]) -> Result<Point2D> {
        let owned: Vec<(Point2D, f64)> = points.iter().map(|(p, w)| (**p, *w)).collect();
        Ok(geometric_median(&owned, WeiszfeldOptions::default())?.point)
    }
}

impl LinearSpace for Euclid2D {
    fn weighted_mean(&self, points: &[(&Point2D, f64)]) -> Result<Point2D> {
        let total = check_weights(points)?;
        let (sx, sy) = points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), (p, w)| (sx + w * p.x, sy + w * p.y));
        Point2D::new(sx / total, sy / total)
    }
}

/// Fixed-dimension embedding vectors under the square-root cosine dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingSpace {
    dimension: usize,
}

impl EmbeddingSpace {
    pub fn new(dimension: usize) -> Result<Self> {
        SpaceKind::Embedding { dimension }.validate()?;
        Ok(EmbeddingSpace { dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn check(&self, v: &EmbedVec) -> Result<()> {
        if v.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: v.dimension(),
            });
        }
        Ok(())
    }
}

/// `sqrt(2 - 2·cos θ)`, with the radicand clamped to `[0, 4]`.
pub fn sqrt_cosine(a: &EmbedVec, b: &EmbedVec) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
        });
    }
    let dot: f64 = a
        .components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| x * y)
        .sum();
    let cos = dot / (a.norm() * b.norm());
    Ok((2.0 - 2.0 * cos).clamp(0.0, 4.0).sqrt())
}

impl MetricSpace for EmbeddingSpace {
    type Point = EmbedVec;

    fn dist(&self, a: &EmbedVec, b: &EmbedVec) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        sqrt_cosine(a, b)
    }

    /// The weighted mean of the vectors stands in for the arg-min.
    fn centroid(&self, points: &[(&EmbedVec, f64)]) -> Result<EmbedVec> {
        self.weighted_mean(points)
    }
}

impl LinearSpace for EmbeddingSpace {
    fn weighted_mean(&self, points: &[(&EmbedVec, f64)]) -> Result<EmbedVec> {
        let total = check_weights(points)?;
        let mut acc = vec![0.0; self.dimension];
        for (v, w) in points {
            self.check(v)?;
            for (a, c) in acc.iter_mut().zip(v.components()) {
                *a += w * c;
            }
        }
        acc.iter_mut().for_each(|a| *a /= total);
        EmbedVec::new(acc)
    }
}

impl MetricSpace for SpaceKind {
    type Point = Point;

    fn dist(&self, a: &Point, b: &Point) -> Result<f64> {
        match (self, a, b) {
            (SpaceKind::Euclid2D, Point::Euclid(a), Point::Euclid(b)) => Euclid2D.dist(a, b),
            (SpaceKind::Embedding { dimension }, Point::Embed(a), Point::Embed(b)) => {
                EmbeddingSpace::new(*dimension)?.dist(a, b)
            }
            _ => Err(Error::SpaceMismatch),
        }
    }

    fn centroid(&self, points: &[(&Point, f64)]) -> Result<Point> {
        match self {
            SpaceKind::Euclid2D => {
                let pts = euclid_points(points)?;
                let refs: Vec<_> = pts.iter().map(|(p, w)| (p, *w)).collect();
                Euclid2D.centroid(&refs).map(Point::Euclid)
            }
            SpaceKind::Embedding { .. } => self.weighted_mean(points),
        }
    }
}

impl LinearSpace for SpaceKind {
    fn weighted_mean(&self, points: &[(&Point, f64)]) -> Result<Point> {
        match self {
            SpaceKind::Euclid2D => {
                let pts = euclid_points(points)?;
                let refs: Vec<_> = pts.iter().map(|(p, w)| (p, *w)).collect();
                Euclid2D.weighted_mean(&refs).map(Point::Euclid)
            }
            SpaceKind::Embedding { dimension } => {
                let space = EmbeddingSpace::new(*dimension)?;
                let refs = points
                    .iter()
                    .map(|(p, w)| match p {
                        Point::Embed(v) => Ok((v, *w)),
                        Point::Euclid(_) => Err(Error::SpaceMismatch),
                    })
                    .collect::<Result<Vec<_>>>()?;
                space.weighted_mean(&refs).map(Point::Embed)
            }
        }
    }
}

fn euclid_points(points: &[(&Point, f64)]) -> Result<Vec<(Point2D, f64)>> {
    points
        .iter()
        .map(|(p, w)| match p {
            Point::Euclid(q) => Ok((*q, *w)),
            Point::Embed(_) => Err(Error::SpaceMismatch),
        })
        .collect()
}

/// Distance between two points of the given space.
pub fn dist(space: SpaceKind, a: &Point, b: &Point) -> Result<f64> {
    space.dist(a, b)
}

/// A finite metric given by an explicit distance table over point indices.
#[derive(Debug, Clone)]
pub struct FiniteMetric {
    labels: Vec<String>,
    table: Vec<Vec<Option<f64>>>,
}

impl FiniteMetric {
    /// Builds the table from labelled pairwise distances. Missing pairs stay
    /// undefined; a lookup on one is an error.
    pub fn new(labels: &[&str], pairs: &[(&str, &str, f64)]) -> Result<Self> {
        let n = labels.len();
        let mut table = vec![vec![None; n]; n];
        for (i, row) in table.iter_mut().enumerate() {
            row[i] = Some(0.0);
        }
        let index = |l: &str| {
            labels
                .iter()
                .position(|x| *x == l)
                .ok_or_else(|| Error::Config(format!("unknown label `{l}`")))
        };
        for (a, b, d) in pairs {
            if !(d.is_finite() && *d >= 0.0) {
                return Err(Error::NegativeValue(*d));
            }
            let (i, j) = (index(a)?, index(b)?);
            table[i][j] = Some(*d);
            table[j][i] = Some(*d);
        }
        Ok(FiniteMetric {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            table,
        })
    }

    pub fn point(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks the triangle inequality over every fully defined triple.
    pub fn is_metric(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if let (Some(ij), Some(jk), Some(ik)) =
                        (self.table[i][j], self.table[j][k], self.table[i][k])
                    {
                        if ik > ij + jk + 1e-12 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

impl MetricSpace for FiniteMetric {
    type Point = usize;

    fn dist(&self, a: &usize, b: &usize) -> Result<f64> {
        self.table
            .get(*a)
            .and_then(|row| row.get(*b))
            .copied()
            .flatten()
            .ok_or(Error::MissingDistance(*a, *b))
    }

    /// Exact arg-min over the finite set; points with undefined distances to
    /// any input are skipped.
    fn centroid(&self, points: &[(&usize, f64)]) -> Result<usize> {
        check_weights(points)?;
        (0..self.len())
            .filter_map(|x| {
                points
                    .iter()
                    .map(|(p, w)| self.dist(&x, p).map(|d| w * d))
                    .sum::<Result<f64>>()
                    .ok()
                    .map(|obj| (x, obj))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(x, _)| x)
            .ok_or(Error::Empty("centroid candidates"))
    }
}

/// Controls for [`geometric_median`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiszfeldOptions {
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for WeiszfeldOptions {
    fn default() -> Self {
        WeiszfeldOptions {
            tolerance: 1e-9,
            max_iters: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricMedian {
    pub point: Point2D,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

const COINCIDENCE: f64 = 1e-12;
const NUDGE: f64 = 1e-9;

/// Weighted sum of distances from `x` to the inputs.
pub fn weighted_distance_sum(points: &[(Point2D, f64)], x: &Point2D) -> f64 {
    points.iter().map(|(p, w)| w * p.distance(x)).sum()
}

/// Subgradient test at an input point: optimal iff the pull of the other
/// points does not exceed the weight sitting on it.
fn vertex_is_optimal(points: &[(Point2D, f64)], v: &Point2D) -> bool {
    let (mut rx, mut ry, mut here) = (0.0, 0.0, 0.0);
    for (p, w) in points {
        let d = p.distance(v);
        if d < COINCIDENCE {
            here += w;
        } else {
            rx += w * (p.x - v.x) / d;
            ry += w * (p.y - v.y) / d;
        }
    }
    rx.hypot(ry) <= here
}

/// Weighted geometric median by Weiszfeld iteration from the weighted mean.
///
/// Input points are checked for optimality first, since the iteration
/// approaches an optimal input point only sublinearly. When an iterate lands on input points, the subgradient test decides
/// whether it is optimal there; if not, the iterate is nudged by `1e-9` in
/// `+x` and iteration continues. The best iterate seen is returned.
pub fn geometric_median(points: &[(Point2D, f64)], opts: WeiszfeldOptions) -> Result<GeometricMedian> {
    let refs: Vec<_> = points.iter().map(|(p, w)| (p, *w)).collect();
    let mut x = Euclid2D.weighted_mean(&refs)?;
    if let Some(v) = points.iter().map(|(p, _)| *p).find(|p| vertex_is_optimal(points, p)) {
        return Ok(GeometricMedian {
            point: v,
            objective: weighted_distance_sum(points, &v),
            iterations: 0,
            converged: true,
        });
    }
    let mut best = (x, weighted_distance_sum(points, &x));
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let mut coincident = 0.0;
        let (mut rx, mut ry) = (0.0, 0.0);
        let (mut nx, mut ny, mut denom) = (0.0, 0.0, 0.0);
        for (p, w) in points {
            let d = p.distance(&x);
            if d < COINCIDENCE {
                coincident += w;
            } else {
                rx += w * (p.x - x.x) / d;
                ry += w * (p.y - x.y) / d;
                nx += w * p.x / d;
                ny += w * p.y / d;
                denom += w / d;
            }
        }
        if coincident > 0.0 {
            if rx.hypot(ry) <= coincident {
                converged = true;
                break;
            }
            x.x += NUDGE;
            continue;
        }
        let next = Point2D { x: nx / denom, y: ny / denom };
        let step = next.distance(&x);
        x = next;
        let obj = weighted_distance_sum(points, &x);
        if obj < best.1 {
            best = (x, obj);
        }
        if step < opts.tolerance {
            converged = true;
            break;
        }
    }

    let obj = weighted_distance_sum(points, &x);
    if obj <= best.1 {
        best = (x, obj);
    }
    Ok(GeometricMedian {
        point: best.0,
        objective: best.1,
        iterations,
        converged,
    })
}

/// Divides every value by the maximum; an all-zero input maps to all zeros.
pub fn normalize_distances(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("distance list"));
    }
    if let Some(&bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::NegativeValue(bad));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| v / max).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y).unwrap()
    }

    fn unit(dim: usize, axis: usize) -> EmbedVec {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        EmbedVec::new(v).unwrap()
    }

    #[test]
    fn euclid_distance() {
        assert_eq!(Euclid2D.dist(&p(0.0, 0.0), &p(3.0, 4.0)).unwrap(), 5.0);
    }

    #[test]
    fn embedding_distance_cases() {
        let space = EmbeddingSpace::new(4).unwrap();
        let a = EmbedVec::new(vec![0.3, -1.0, 2.0, 0.5]).unwrap();
        assert!(space.dist(&a, &a).unwrap().abs() < 1e-7);
        let d = space.dist(&unit(4, 0), &unit(4, 2)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        let neg = EmbedVec::new(a.components().iter().map(|c| -c).collect()).unwrap();
        assert!((space.dist(&a, &neg).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_errors() {
        assert!(matches!(EmbedVec::new(vec![0.0; 3]), Err(Error::ZeroVector)));
        assert!(matches!(EmbedVec::new(vec![f64::NAN, 1.0]), Err(Error::NonFinite)));
        let space = EmbeddingSpace::new(4).unwrap();
        assert!(matches!(
            space.dist(&unit(4, 0), &unit(3, 0)),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
        assert!(dist(SpaceKind::Euclid2D, &Point::Euclid(p(0.0, 0.0)), &Point::Embed(unit(2, 0))).is_err());
    }

    #[test]
    fn space_kind_dispatch() {
        let d = dist(
            SpaceKind::Euclid2D,
            &Point::Euclid(p(0.0, 0.0)),
            &Point::Euclid(p(3.0, 4.0)),
        )
        .unwrap();
        assert_eq!(d, 5.0);
        let kind: SpaceKind = "embedding:8".parse().unwrap();
        assert_eq!(kind, SpaceKind::Embedding { dimension: 8 });
        assert!("embedding:0".parse::<SpaceKind>().is_err());
    }

    #[test]
    fn weighted_mean_examples() {
        let m = Euclid2D
            .weighted_mean(&[(&p(0.0, 0.0), 1.0), (&p(4.0, 0.0), 3.0)])
            .unwrap();
        assert_eq!(m, p(3.0, 0.0));
        let m = Euclid2D.weighted_mean(&[(&p(2.0, 2.0), 5.0)]).unwrap();
        assert_eq!(m, p(2.0, 2.0));
        let m = Euclid2D
            .weighted_mean(&[(&p(0.0, 0.0), 1.0), (&p(2.0, 0.0), 1.0), (&p(0.0, 2.0), 1.0)])
            .unwrap();
        assert!((m.x - 2.0 / 3.0).abs() < 1e-15 && (m.y - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_mean_errors() {
        assert!(matches!(Euclid2D.weighted_mean(&[]), Err(Error::Empty(_))));
        assert!(matches!(
            Euclid2D.weighted_mean(&[(&p(1.0, 1.0), 0.0)]),
            Err(Error::InvalidWeight(_))
        ));
    }

    #[test]
    fn embedding_mean_drops_text_and_keeps_scale() {
        let space = EmbeddingSpace::new(2).unwrap();
        let a = EmbedVec::new(vec![1.0, 0.0]).unwrap().with_text("a");
        let b = EmbedVec::new(vec![0.0, 1.0]).unwrap().with_text("b");
        let m = space.weighted_mean(&[(&a, 1.0), (&b, 1.0)]).unwrap();
        assert_eq!(m.source_text(), None);
        assert_eq!(m.components(), &[0.5, 0.5]);
        assert!(m.norm() < 1.0);
    }

    #[test]
    fn geometric_median_singleton() {
        let gm = geometric_median(&[(p(5.0, 5.0), 3.0)], WeiszfeldOptions::default()).unwrap();
        assert_eq!(gm.point, p(5.0, 5.0));
        assert!(gm.converged);
    }

    #[test]
    fn geometric_median_equilateral() {
        let h = 3f64.sqrt() / 2.0;
        let pts = [(p(0.0, 0.0), 1.0), (p(1.0, 0.0), 1.0), (p(0.5, h), 1.0)];
        let gm = geometric_median(&pts, WeiszfeldOptions::default()).unwrap();
        assert!(gm.point.distance(&p(0.5, h / 3.0)) < 1e-8);
    }

    #[test]
    fn geometric_median_dominant_vertex() {
        // A weight larger than the sum of the others pins the median to that point.
        let pts = [(p(0.0, 0.0), 10.0), (p(4.0, 0.0), 1.0), (p(0.0, 4.0), 1.0)];
        let gm = geometric_median(&pts, WeiszfeldOptions::default()).unwrap();
        assert!(gm.point.distance(&p(0.0, 0.0)) < 1e-6, "{gm:?}");
        assert!(gm.converged);
    }

    #[test]
    fn geometric_median_beats_grid() {
        // Integer inputs put every candidate vertex optimum on the grid.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let pts: Vec<_> = (0..5)
                .map(|_| {
                    (
                        p(rng.random_range(0..=200) as f64, rng.random_range(0..=200) as f64),
                        rng.random_range(1.0..10.0),
                    )
                })
                .collect();
            let grid = grid_minimum(&pts);
            let gm = geometric_median(&pts, WeiszfeldOptions::default()).unwrap();
            assert!(gm.objective <= grid * (1.0 + 1e-3));
            assert!((grid - gm.objective) / grid <= 1e-3);
        }
    }

    fn grid_minimum(pts: &[(Point2D, f64)]) -> f64 {
        let mut best = f64::INFINITY;
        for gx in 0..=200 {
            for gy in 0..=200 {
                best = best.min(weighted_distance_sum(pts, &p(gx as f64, gy as f64)));
            }
        }
        best
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_distances(&[0.0, 5.0, 10.0]).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize_distances(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(normalize_distances(&[7.0]).unwrap(), vec![1.0]);
        assert!(matches!(normalize_distances(&[1.0, -2.0]), Err(Error::NegativeValue(_))));
        assert!(normalize_distances(&[]).is_err());
    }

    #[test]
    fn finite_metric_lookup() {
        let m = FiniteMetric::new(&["a", "b", "c"], &[("a", "b", 1.0), ("b", "c", 1.0)]).unwrap();
        assert_eq!(m.dist(&0, &1).unwrap(), 1.0);
        assert!(matches!(m.dist(&0, &2), Err(Error::MissingDistance(0, 2))));
        assert!(m.is_metric());
        let bad = FiniteMetric::new(
            &["a", "b", "c"],
            &[("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 5.0)],
        )
        .unwrap();
        assert!(!bad.is_metric());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1e3..1e3f64
    }

    fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0..1.0f64, dim)
            .prop_filter("non-zero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-6)
    }

    fn normalized(v: Vec<f64>) -> EmbedVec {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        EmbedVec::new(v.into_iter().map(|c| c / n).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn euclid_symmetric_nonnegative(ax in coord(), ay in coord(), bx in coord(), by in coord()) {
            let (a, b) = (p(ax, ay), p(bx, by));
            let d = Euclid2D.dist(&a, &b).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, Euclid2D.dist(&b, &a).unwrap());
        }

        #[test]
        fn embedding_symmetric_bounded(a in vec_strategy(8), b in vec_strategy(8)) {
            let space = EmbeddingSpace::new(8).unwrap();
            let (a, b) = (EmbedVec::new(a).unwrap(), EmbedVec::new(b).unwrap());
            let d = space.dist(&a, &b).unwrap();
            prop_assert!((0.0..=2.0).contains(&d));
            prop_assert!((d - space.dist(&b, &a).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn embedding_triangle_on_sphere(a in vec_strategy(6), b in vec_strategy(6), c in vec_strategy(6)) {
            let space = EmbeddingSpace::new(6).unwrap();
            let (a, b, c) = (normalized(a), normalized(b), normalized(c));
            let ac = space.dist(&a, &c).unwrap();
            let ab = space.dist(&a, &b).unwrap();
            let bc = space.dist(&b, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn embedding_colinear_zero(a in vec_strategy(5), scale in 0.01..100.0f64) {
            let space = EmbeddingSpace::new(5).unwrap();
            let scaled = EmbedVec::new(a.iter().map(|c| c * scale).collect()).unwrap();
            let a = EmbedVec::new(a).unwrap();
            prop_assert!(space.dist(&a, &scaled).unwrap() < 1e-6);
        }

        #[test]
        fn median_never_worse_than_mean(
            pts in prop::collection::vec((0.0..200.0f64, 0.0..200.0f64, 1.0..10.0f64), 1..8)
        ) {
            let pts: Vec<_> = pts.into_iter().map(|(x, y, w)| (p(x, y), w)).collect();
            let refs: Vec<_> = pts.iter().map(|(q, w)| (q, *w)).collect();
            let mean = Euclid2D.weighted_mean(&refs).unwrap();
            let gm = geometric_median(&pts, WeiszfeldOptions::default()).unwrap();
            prop_assert!(gm.objective <= weighted_distance_sum(&pts, &mean) + 1e-9);
            for (q, _) in &pts {
                prop_assert!(gm.objective <= weighted_distance_sum(&pts, q) + 1e-6);
            }
        }

        #[test]
        fn mean_in_bounding_box(
            pts in prop::collection::vec((coord(), coord(), 0.1..10.0f64), 1..10)
        ) {
            let pts: Vec<_> = pts.into_iter().map(|(x, y, w)| (p(x, y), w)).collect();
            let refs: Vec<_> = pts.iter().map(|(q, w)| (q, *w)).collect();
            let m = Euclid2D.weighted_mean(&refs).unwrap();
            let (lo_x, hi_x) = pts.iter().fold((f64::MAX, f64::MIN), |(l, h), (q, _)| (l.min(q.x), h.max(q.x)));
            let (lo_y, hi_y) = pts.iter().fold((f64::MAX, f64::MIN), |(l, h), (q, _)| (l.min(q.y), h.max(q.y)));
            prop_assert!(m.x >= lo_x - 1e-9 && m.x <= hi_x + 1e-9);
            prop_assert!(m.y >= lo_y - 1e-9 && m.y <= hi_y + 1e-9);
        }
    }
}
