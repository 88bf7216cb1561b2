//! Finite point sets in R^d, the Hausdorff metric, and label matching.
//!
//! Two set-like types cover the needs of the flow machinery. [`Config`] is an
//! ordered tuple of points (an enumeration, duplicates allowed) used as
//! integrator state; [`FiniteSubset`] is an actual set: deduplicated and held
//! in a canonical sorted order so that equality is plain value equality.

use crate::{Error, Result};

/// A point of R^d. Coordinates are finite and d >= 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point needs at least one coordinate".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {c}")));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Euclidean distance. Callers guarantee equal lengths.
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_same_dim(points: &[Point]) -> Result<usize> {
    let dim = points[0].dim();
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch(dim, p.dim()));
        }
    }
    Ok(dim)
}

/// An ordered tuple of n >= 1 points sharing one ambient dimension.
///
/// Order is meaningful: a `Config` is the state of one labelled trajectory
/// per point. Coincident points are representable (that is the diagonal);
/// most flow operations require staying off it.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    points: Vec<Point>,
    dim: usize,
}

impl Config {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("configuration needs at least one point".into()));
        }
        let dim = check_same_dim(&points)?;
        Ok(Self { points, dim })
    }

    pub fn from_coords(coords: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(coords.into_iter().map(Point::new).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points[i].coords()
    }

    /// True when all pairwise distances are strictly positive.
    pub fn is_off_diagonal(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if dist(self.point(i), self.point(j)) == 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Minimum pairwise distance of a configuration. Needs n >= 2.
pub fn separation(config: &Config) -> Result<f64> {
    let n = config.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "separation needs at least two points".into(),
        ));
    }
    let mut min = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min = min.min(dist(config.point(i), config.point(j)));
        }
    }
    Ok(min)
}

/// A set of 1..=n distinct points, stored sorted so equality is structural.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSubset {
    points: Vec<Point>,
    dim: usize,
}

fn lex_cmp(a: &Point, b: &Point) -> std::cmp::Ordering {
    for (x, y) in a.coords().iter().zip(b.coords()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

impl FiniteSubset {
    /// Builds a set from a multiset of points: exact duplicates collapse,
    /// then points are sorted lexicographically.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("set needs at least one point".into()));
        }
        let dim = check_same_dim(&points)?;
        let mut kept: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            // merge_tol = 0 semantics: only exact coordinate equality collapses.
            if !kept.iter().any(|q| dist(q.coords(), p.coords()) == 0.0) {
                kept.push(p);
            }
        }
        kept.sort_by(lex_cmp);
        Ok(Self { points: kept, dim })
    }

    pub fn from_coords(coords: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(coords.into_iter().map(Point::new).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points[i].coords()
    }

    /// The set viewed as a configuration in stored order.
    pub fn to_config(&self) -> Config {
        Config {
            points: self.points.clone(),
            dim: self.dim,
        }
    }
}

fn directed_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let mut sup = 0.0f64;
    for p in a {
        let mut inf = f64::INFINITY;
        for q in b {
            inf = inf.min(dist(p.coords(), q.coords()));
        }
        sup = sup.max(inf);
    }
    sup
}

/// Hausdorff distance between two nonempty point slices.
///
/// Duplicated points do not affect the value, so this is also the distance
/// between the underlying sets when called on configurations.
pub fn hausdorff_points(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("hausdorff distance needs nonempty sets".into()));
    }
    let (da, db) = (a[0].dim(), b[0].dim());
    if da != db {
        return Err(Error::DimensionMismatch(da, db));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Hausdorff distance between two sets:
/// max(sup_a inf_b |a - b|, sup_b inf_a |a - b|).
pub fn hausdorff_distance(a: &FiniteSubset, b: &FiniteSubset) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(hausdorff_points(a.points(), b.points()).expect("sets are nonempty and same-dimensional"))
}

/// Replaces clusters of nearby points by their centroids.
///
/// Points are grouped into connected components of the graph whose edges join
/// pairs at distance <= `merge_tol`; each component becomes its centroid.
/// Merging can create new clusters (component centroids may land close
/// together even when the components were not joined), so the pass repeats
/// until all pairwise distances exceed `merge_tol`, making the operation
/// idempotent. With `merge_tol = 0` this is exact deduplication.
pub fn canonicalize(points: &[Point], merge_tol: f64) -> Result<FiniteSubset> {
    if points.is_empty() {
        return Err(Error::InvalidInput("canonicalize needs at least one point".into()));
    }
    if !(merge_tol >= 0.0) || !merge_tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "merge tolerance must be finite and nonnegative, got {merge_tol}"
        )));
    }
    check_same_dim(points)?;
    let mut current: Vec<Point> = points.to_vec();
    loop {
        let comps = components(&current, merge_tol);
        if comps.len() == current.len() {
            return FiniteSubset::new(current);
        }
        current = comps.into_iter().map(|c| centroid(&current, &c)).collect();
    }
}

/// Connected components (index lists) under dist <= merge_tol, by BFS.
fn components(points: &[Point], merge_tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut queue = vec![start];
        while let Some(i) = queue.pop() {
            for j in 0..n {
                if !seen[j] && dist(points[i].coords(), points[j].coords()) <= merge_tol {
                    seen[j] = true;
                    comp.push(j);
                    queue.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn centroid(points: &[Point], member_idx: &[usize]) -> Point {
    let first = &points[member_idx[0]];
    // Exact duplicates keep their bits instead of going through a mean.
    if member_idx
        .iter()
        .all(|&i| dist(points[i].coords(), first.coords()) == 0.0)
    {
        return first.clone();
    }
    let dim = first.dim();
    let mut sum = vec![0.0f64; dim];
    for &i in member_idx {
        for (s, c) in sum.iter_mut().zip(points[i].coords()) {
            *s += c;
        }
    }
    let k = member_idx.len() as f64;
    Point {
        coords: sum.into_iter().map(|s| s / k).collect(),
    }
}

/// A certified bijection between two equally sized sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    permutation: Vec<usize>,
    bound: f64,
}

impl Matching {
    /// `permutation[i]` is the index in the target set matched to point `i`
    /// of the source set.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Certified bound: every matched pair is within this distance, and it
    /// never exceeds the Hausdorff distance of the two sets.
    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// Nearest-point label matching between sets that are far closer to each
/// other than to themselves.
///
/// Requires |X| = |Y| and separation(X) > 2 * hausdorff(X, Y); under that
/// condition the balls of radius hausdorff around the points of X are
/// disjoint and each contains exactly one point of Y, so assigning every
/// point its nearest partner is a bijection with pair distances <= the
/// Hausdorff distance. Equality separation = 2 * hausdorff is rejected.
pub fn match_labels(x: &FiniteSubset, y: &FiniteSubset) -> Result<Matching> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "label matching needs equal cardinalities, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let rho = hausdorff_distance(x, y)?;
    // A single point pairs trivially; min over an empty pair set is +inf.
    let sep = if x.len() == 1 {
        f64::INFINITY
    } else {
        separation(&x.to_config())?
    };
    if !(sep > 2.0 * rho) {
        return Err(Error::NoCertifiedMatching {
            separation: sep,
            hausdorff: rho,
        });
    }
    let n = x.len();
    let mut permutation = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut bound = 0.0f64;
    for i in 0..n {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            let d = dist(x.point(i), y.point(j));
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        if used[best] {
            // Unreachable under the checked precondition; refuse to certify.
            return Err(Error::NoCertifiedMatching {
                separation: sep,
                hausdorff: rho,
            });
        }
        used[best] = true;
        permutation.push(best);
        bound = bound.max(best_d);
    }
    debug_assert!(bound <= rho);
    Ok(Matching { permutation, bound })
}

/// Certified Lipschitz constant of the one-step retraction on sets of at
/// most `n` points: max(n^(3/2), 2n - 1).
pub fn lipschitz_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "lipschitz bound needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    Ok((nf * nf.sqrt()).max(2.0 * nf - 1.0))
}
