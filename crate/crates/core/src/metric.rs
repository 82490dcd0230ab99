//! Finite metric spaces, clusterings and the two clustering objectives.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::COST_TOLERANCE;

/// A finite point set `0..n` with a dense symmetric distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricInstance {
    n: usize,
    dist: Vec<f64>,
    metric_checked: bool,
    unit_range: bool,
}

impl MetricInstance {
    /// Builds an instance from full matrix rows.
    ///
    /// Only the shape is enforced here (non-empty, square, finite entries);
    /// metric properties are checked by [`validate_metric`] so that non-metric
    /// perturbations can still be represented.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let mut dist = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(Error::RaggedMatrix { row, len: r.len(), expected: n });
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { i: row, j });
                }
            }
            dist.extend(r);
        }
        let unit_range = dist.iter().all(|&v| v <= 1.0);
        Ok(Self { n, dist, metric_checked: false, unit_range })
    }

    /// Builds a symmetric instance with zero diagonal from `f(i, j)` evaluated on `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        let unit_range = dist.iter().all(|&v| v <= 1.0);
        Ok(Self { n, dist, metric_checked: false, unit_range })
    }

    /// Runs [`validate_metric`] and returns the instance with its flags set,
    /// or the verdict as an error when any required constraint is violated.
    pub fn validated(mut self, opts: ValidationOptions) -> Result<Self> {
        let verdict = validate_metric(&self, opts);
        if !verdict.is_valid() {
            return Err(Error::InvalidMetric(Box::new(verdict)));
        }
        self.metric_checked = verdict.metric_checked;
        self.unit_range = verdict.unit_range;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance between points `i` and `j`. Panics if either index is out of range.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn metric_checked(&self) -> bool {
        self.metric_checked
    }

    pub fn unit_range(&self) -> bool {
        self.unit_range
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n })
        }
    }

    /// Returns a copy with the rows and columns permuted: new point `i` is old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Parameter(format!("permutation has length {}, expected {}", perm.len(), self.n)));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            self.check_index(p)?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::DuplicatePoint(p));
            }
        }
        let mut out = Self::from_fn(self.n, |i, j| self.d(perm[i], perm[j]))?;
        out.metric_checked = self.metric_checked;
        Ok(out)
    }
}

/// Which constraints [`validate_metric`] enforces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationOptions {
    pub require_triangle: bool,
    pub require_unit: bool,
    /// Forbid `d(p, q) = 0` for distinct points.
    pub strict_positive: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { require_triangle: true, require_unit: false, strict_positive: true }
    }
}

impl ValidationOptions {
    /// Options used when loading files: perturbed distance functions need not be metrics.
    pub fn loading() -> Self {
        Self { require_triangle: false, ..Self::default() }
    }

    pub fn with_unit(mut self, require_unit: bool) -> Self {
        self.require_unit = require_unit;
        self
    }

    pub fn with_triangle(mut self, require_triangle: bool) -> Self {
        self.require_triangle = require_triangle;
        self
    }

    pub fn allow_zero(mut self) -> Self {
        self.strict_positive = false;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Asymmetric { i: usize, j: usize },
    Negative { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    ZeroDistance { i: usize, j: usize },
    /// `d(i, j) > d(i, l) + d(l, j)`.
    Triangle { i: usize, l: usize, j: usize },
    OutOfUnitRange { i: usize, j: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub violations: Vec<Violation>,
    pub metric_checked: bool,
    pub unit_range: bool,
}

impl ValidationVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violations.first() {
            None => write!(f, "valid"),
            Some(v) => write!(f, "{} violation(s), first: {:?}", self.violations.len(), v),
        }
    }
}

/// Checks the distance matrix against the requested constraints and reports
/// every violation. Triangle violations are reported once per unordered pair
/// `(i, j)`, with the smallest witness `l`.
pub fn validate_metric(instance: &MetricInstance, opts: ValidationOptions) -> ValidationVerdict {
    let n = instance.n();
    let d = |i, j| instance.d(i, j);
    let mut violations = Vec::new();
    let mut max = 0.0f64;
    for i in 0..n {
        if d(i, i) != 0.0 {
            violations.push(Violation::NonzeroDiagonal { i });
        }
        for j in 0..n {
            let v = d(i, j);
            max = max.max(v);
            if v < 0.0 {
                violations.push(Violation::Negative { i, j });
            }
            if i < j {
                if v != d(j, i) {
                    violations.push(Violation::Asymmetric { i, j });
                }
                if opts.strict_positive && v == 0.0 {
                    violations.push(Violation::ZeroDistance { i, j });
                }
                if opts.require_unit && (v > 1.0 || d(j, i) > 1.0) {
                    violations.push(Violation::OutOfUnitRange { i, j });
                }
            }
        }
    }
    if opts.require_triangle {
        for i in 0..n {
            for j in i + 1..n {
                let direct = d(i, j);
                if let Some(l) = (0..n).find(|&l| direct > d(i, l) + d(l, j) + COST_TOLERANCE) {
                    violations.push(Violation::Triangle { i, l, j });
                }
            }
        }
    }
    let valid = violations.is_empty();
    ValidationVerdict {
        metric_checked: valid && opts.require_triangle,
        unit_range: max <= 1.0,
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    KMedian,
    MinSum,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::KMedian => "kmedian",
            Objective::MinSum => "minsum",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cost {
    pub value: f64,
    pub objective: Objective,
}

/// A partition of `0..n` into `k` non-empty clusters, optionally with one center per cluster.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clustering {
    assignment: Vec<usize>,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<usize>>,
}

impl Clustering {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        let c = Self { assignment, k, centers: None };
        c.check()?;
        Ok(c)
    }

    pub fn with_centers(assignment: Vec<usize>, k: usize, centers: Vec<usize>) -> Result<Self> {
        let c = Self { assignment, k, centers: Some(centers) };
        c.check()?;
        Ok(c)
    }

    /// Builds a clustering from explicit blocks covering `0..n`; block `i` becomes cluster `i`.
    pub fn from_clusters(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (c, block) in blocks.iter().enumerate() {
            for &p in block {
                if p >= n {
                    return Err(Error::IndexOutOfRange { index: p, n });
                }
                if assignment[p] != usize::MAX {
                    return Err(Error::DuplicatePoint(p));
                }
                assignment[p] = c;
            }
        }
        if let Some(p) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidClustering(format!("point {p} is not covered")));
        }
        Self::new(assignment, blocks.len())
    }

    fn check(&self) -> Result<()> {
        let n = self.assignment.len();
        if self.k == 0 || self.k > n {
            return Err(Error::KOutOfRange { k: self.k, n });
        }
        let mut used = vec![false; self.k];
        for (p, &a) in self.assignment.iter().enumerate() {
            if a >= self.k {
                return Err(Error::InvalidClustering(format!("point {p} has label {a} >= k = {}", self.k)));
            }
            used[a] = true;
        }
        if let Some(c) = used.iter().position(|u| !u) {
            return Err(Error::InvalidClustering(format!("cluster {c} is empty")));
        }
        if let Some(centers) = &self.centers {
            if centers.len() != self.k {
                return Err(Error::InvalidClustering(format!("{} centers for k = {}", centers.len(), self.k)));
            }
            for (i, &c) in centers.iter().enumerate() {
                if c >= n {
                    return Err(Error::IndexOutOfRange { index: c, n });
                }
                if self.assignment[c] != i {
                    return Err(Error::NotInCluster { point: c, cluster: i });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn centers(&self) -> Option<&[usize]> {
        self.centers.as_deref()
    }

    pub fn label(&self, p: usize) -> usize {
        self.assignment[p]
    }

    /// Members of each cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (p, &a) in self.assignment.iter().enumerate() {
            out[a].push(p);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &a in &self.assignment {
            out[a] += 1;
        }
        out
    }

    /// Labels renumbered by first occurrence; equal for exactly the clusterings
    /// that describe the same partition.
    pub fn partition_key(&self) -> Vec<usize> {
        canonical_labels(&self.assignment)
    }

    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.n() == other.n() && self.partition_key() == other.partition_key()
    }

    pub fn without_centers(&self) -> Clustering {
        Clustering { centers: None, ..self.clone() }
    }
}

pub(crate) fn canonical_labels(assignment: &[usize]) -> Vec<usize> {
    let mut map: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut out = Vec::with_capacity(assignment.len());
    for &a in assignment {
        if a >= map.len() {
            map.resize(a + 1, usize::MAX);
        }
        if map[a] == usize::MAX {
            map[a] = next;
            next += 1;
        }
        out.push(map[a]);
    }
    out
}

fn check_same_n(instance: &MetricInstance, clustering: &Clustering) -> Result<()> {
    if instance.n() != clustering.n() {
        return Err(Error::InvalidClustering(format!(
            "clustering covers {} points, instance has {}",
            clustering.n(),
            instance.n()
        )));
    }
    Ok(())
}

/// Sum over clusters of each member's distance to its cluster center.
pub fn kmedian_cost(instance: &MetricInstance, clustering: &Clustering) -> Result<Cost> {
    check_same_n(instance, clustering)?;
    let centers = clustering.centers().ok_or(Error::MissingCenters)?;
    let value = clustering
        .assignment()
        .iter()
        .enumerate()
        .map(|(p, &a)| instance.d(p, centers[a]))
        .sum();
    Ok(Cost { value, objective: Objective::KMedian })
}

/// Sum over clusters of distances over ordered pairs of distinct members
/// (each unordered pair counts twice).
pub fn minsum_cost(instance: &MetricInstance, clustering: &Clustering) -> Result<Cost> {
    check_same_n(instance, clustering)?;
    let value = clustering
        .clusters()
        .iter()
        .map(|members| set_to_set_unchecked(instance, members, members))
        .sum();
    Ok(Cost { value, objective: Objective::MinSum })
}

/// `d(p, A) = Σ_{q ∈ A} d(p, q)`.
pub fn point_to_set_distance(instance: &MetricInstance, p: usize, set: &[usize]) -> Result<f64> {
    instance.check_index(p)?;
    for &q in set {
        instance.check_index(q)?;
    }
    Ok(point_to_set_unchecked(instance, p, set))
}

/// `d(A, B) = Σ_{p ∈ A} Σ_{q ∈ B} d(p, q)`; `A` and `B` may overlap.
pub fn set_to_set_distance(instance: &MetricInstance, a: &[usize], b: &[usize]) -> Result<f64> {
    for &q in a.iter().chain(b) {
        instance.check_index(q)?;
    }
    Ok(set_to_set_unchecked(instance, a, b))
}

#[inline]
pub(crate) fn point_to_set_unchecked(instance: &MetricInstance, p: usize, set: &[usize]) -> f64 {
    let row = instance.row(p);
    set.iter().map(|&q| row[q]).sum()
}

pub(crate) fn set_to_set_unchecked(instance: &MetricInstance, a: &[usize], b: &[usize]) -> f64 {
    a.iter().map(|&p| point_to_set_unchecked(instance, p, b)).sum()
}

/// Member minimizing the summed distance to the other members; ties go to the smallest index.
pub fn medoid(instance: &MetricInstance, members: &[usize]) -> Result<usize> {
    if members.is_empty() {
        return Err(Error::InvalidClustering("empty cluster has no medoid".into()));
    }
    for &q in members {
        instance.check_index(q)?;
    }
    let mut best = (f64::INFINITY, usize::MAX);
    for &c in members {
        let cost = point_to_set_unchecked(instance, c, members);
        if cost < best.0 - COST_TOLERANCE || (cost <= best.0 + COST_TOLERANCE && c < best.1) {
            best = (cost, c);
        }
    }
    Ok(best.1)
}

/// Attaches the medoid of every cluster as its center.
pub fn with_medoid_centers(instance: &MetricInstance, clustering: &Clustering) -> Result<Clustering> {
    check_same_n(instance, clustering)?;
    let centers = clustering
        .clusters()
        .iter()
        .map(|m| medoid(instance, m))
        .collect::<Result<Vec<_>>>()?;
    Clustering::with_centers(clustering.assignment().to_vec(), clustering.k(), centers)
}

/// Optional planted or certified clustering stored alongside an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub assignment: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<usize>>,
}

impl GroundTruth {
    pub fn from_clustering(c: &Clustering) -> Self {
        Self { assignment: c.assignment().to_vec(), centers: c.centers().map(<[usize]>::to_vec) }
    }

    pub fn to_clustering(&self) -> Result<Clustering> {
        let k = self.assignment.iter().max().map_or(0, |m| m + 1);
        match &self.centers {
            Some(c) => Clustering::with_centers(self.assignment.clone(), k, c.clone()),
            None => Clustering::new(self.assignment.clone(), k),
        }
    }
}

/// Canonical instance file: `{"n": .., "d": [[..], ..], "ground_truth": {..}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub d: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

impl InstanceFile {
    pub fn new(instance: &MetricInstance, ground_truth: Option<&Clustering>) -> Self {
        Self {
            n: instance.n(),
            d: instance.rows(),
            ground_truth: ground_truth.map(GroundTruth::from_clustering),
        }
    }

    /// Parses the instance (shape checks plus [`ValidationOptions::loading`]) and ground truth.
    pub fn into_parts(self) -> Result<(MetricInstance, Option<Clustering>)> {
        self.into_parts_with(ValidationOptions::loading())
    }

    pub fn into_parts_with(self, opts: ValidationOptions) -> Result<(MetricInstance, Option<Clustering>)> {
        if self.d.len() != self.n {
            return Err(Error::RaggedMatrix { row: self.d.len(), len: 0, expected: self.n });
        }
        let instance = MetricInstance::from_rows(self.d)?.validated(opts)?;
        let gt = self.ground_truth.map(|g| g.to_clustering()).transpose()?;
        if let Some(g) = &gt {
            check_same_n(&instance, g)?;
        }
        Ok((instance, gt))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_metric_triangle_is_valid_and_unit() {
        let v = validate_metric(&constant(3, 0.5), ValidationOptions::default().with_unit(true));
        assert!(v.is_valid());
        assert!(v.metric_checked);
        assert!(v.unit_range);
    }

    #[test]
    fn triangle_violation_reports_witness() {
        let inst = MetricInstance::from_rows(vec![
            vec![0.0, 0.5, 2.0],
            vec![0.5, 0.0, 0.5],
            vec![2.0, 0.5, 0.0],
        ])
        .unwrap();
        let v = validate_metric(&inst, ValidationOptions::default());
        assert_eq!(v.violations, vec![Violation::Triangle { i: 0, l: 1, j: 2 }]);
        assert!(!v.metric_checked);
        assert!(!v.unit_range);
        assert!(matches!(inst.validated(ValidationOptions::default()), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn structural_violations_are_all_listed() {
        let inst = MetricInstance::from_rows(vec![vec![0.1, -1.0], vec![2.0, 0.0]]).unwrap();
        let v = validate_metric(&inst, ValidationOptions::loading().with_unit(true));
        assert!(v.violations.contains(&Violation::NonzeroDiagonal { i: 0 }));
        assert!(v.violations.contains(&Violation::Negative { i: 0, j: 1 }));
        assert!(v.violations.contains(&Violation::Asymmetric { i: 0, j: 1 }));
        assert!(v.violations.contains(&Violation::OutOfUnitRange { i: 0, j: 1 }));
    }

    #[test]
    fn zero_distance_is_opt_in() {
        let inst = MetricInstance::from_fn(2, |_, _| 0.0).unwrap();
        assert!(!validate_metric(&inst, ValidationOptions::default()).is_valid());
        assert!(validate_metric(&inst, ValidationOptions::default().allow_zero()).is_valid());
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(MetricInstance::from_rows(vec![]), Err(Error::EmptyInstance)));
        assert!(matches!(
            MetricInstance::from_rows(vec![vec![0.0, 1.0], vec![1.0]]),
            Err(Error::RaggedMatrix { row: 1, .. })
        ));
    }

    #[test]
    fn kmedian_cost_examples() {
        let inst = four_point();
        let c = Clustering::with_centers(vec![0, 0, 1, 1], 2, vec![0, 2]).unwrap();
        assert!((kmedian_cost(&inst, &c).unwrap().value - 0.2).abs() < 1e-12);

        let id = Clustering::with_centers(vec![0, 1, 2, 3], 4, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(kmedian_cost(&inst, &id).unwrap().value, 0.0);

        let no_centers = Clustering::new(vec![0, 0, 1, 1], 2).unwrap();
        assert!(matches!(kmedian_cost(&inst, &no_centers), Err(Error::MissingCenters)));
        assert!(matches!(
            Clustering::with_centers(vec![0, 0, 1, 1], 2, vec![2, 0]),
            Err(Error::NotInCluster { point: 2, cluster: 0 })
        ));
    }

    #[test]
    fn minsum_cost_examples() {
        let tri = constant(3, 0.5);
        let one = Clustering::new(vec![0, 0, 0], 1).unwrap();
        assert_eq!(minsum_cost(&tri, &one).unwrap().value, 3.0);
        let singles = Clustering::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(minsum_cost(&tri, &singles).unwrap().value, 0.0);
        let c = Clustering::new(vec![0, 0, 1, 1], 2).unwrap();
        assert!((minsum_cost(&four_point(), &c).unwrap().value - 0.4).abs() < 1e-12);
    }

    #[test]
    fn set_distances() {
        let inst = four_point();
        assert_eq!(point_to_set_distance(&inst, 0, &[0]).unwrap(), 0.0);
        assert_eq!(point_to_set_distance(&constant(3, 0.5), 0, &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(point_to_set_distance(&inst, 1, &[2, 3]).unwrap(), 2.0);
        assert_eq!(set_to_set_distance(&inst, &[0], &[0]).unwrap(), 0.0);
        assert_eq!(set_to_set_distance(&inst, &[0, 1], &[2, 3]).unwrap(), 4.0);
        assert_eq!(set_to_set_distance(&constant(3, 0.5), &[0], &[1, 2]).unwrap(), 1.0);
        assert!(matches!(point_to_set_distance(&inst, 4, &[0]), Err(Error::IndexOutOfRange { index: 4, n: 4 })));
    }

    #[test]
    fn clustering_rejects_bad_input() {
        assert!(matches!(Clustering::new(vec![0, 0], 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(Clustering::new(vec![0, 0], 3), Err(Error::KOutOfRange { .. })));
        assert!(Clustering::new(vec![0, 2, 2], 3).is_err());
        assert!(Clustering::new(vec![0, 1, 5], 2).is_err());
    }

    #[test]
    fn partition_key_ignores_labels() {
        let a = Clustering::new(vec![1, 1, 0, 2], 3).unwrap();
        let b = Clustering::new(vec![0, 0, 2, 1], 3).unwrap();
        assert_eq!(a.partition_key(), vec![0, 0, 1, 2]);
        assert!(a.same_partition(&b));
    }

    #[test]
    fn json_roundtrip_and_ragged_rejection() {
        let inst = four_point();
        let gt = Clustering::with_centers(vec![0, 0, 1, 1], 2, vec![0, 2]).unwrap();
        let text = InstanceFile::new(&inst, Some(&gt)).to_json().unwrap();
        let (back, g) = InstanceFile::from_json(&text).unwrap().into_parts().unwrap();
        assert_eq!(back.rows(), inst.rows());
        assert_eq!(g.unwrap(), gt);

        let ragged = r#"{"n": 2, "d": [[0, 1], [1]]}"#;
        assert!(InstanceFile::from_json(ragged).unwrap().into_parts().is_err());
    }

    fn random_instance() -> impl Strategy<Value = (MetricInstance, Vec<usize>, Vec<usize>)> {
        (2usize..8).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.05f64..1.0, n * n),
                proptest::collection::vec(0usize..3, n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
                .prop_map(move |(vals, labels, perm)| {
                    let inst = MetricInstance::from_fn(n, |i, j| vals[i * n + j]).unwrap();
                    (inst, labels, perm)
                })
        })
    }

    proptest! {
        #[test]
        fn minsum_is_sum_of_self_pairings((inst, labels, _) in random_instance()) {
            let c = Clustering::new(canonical_labels(&labels), *canonical_labels(&labels).iter().max().unwrap() + 1).unwrap();
            let direct = minsum_cost(&inst, &c).unwrap().value;
            let via_sets: f64 = c.clusters().iter().map(|m| set_to_set_distance(&inst, m, m).unwrap()).sum();
            prop_assert!((direct - via_sets).abs() < 1e-12);
        }

        #[test]
        fn medoid_beats_every_member((inst, labels, _) in random_instance()) {
            let canon = canonical_labels(&labels);
            let k = *canon.iter().max().unwrap() + 1;
            let c = with_medoid_centers(&inst, &Clustering::new(canon, k).unwrap()).unwrap();
            let best = kmedian_cost(&inst, &c).unwrap().value;
            for (i, members) in c.clusters().iter().enumerate() {
                for &alt in members {
                    let mut centers = c.centers().unwrap().to_vec();
                    centers[i] = alt;
                    let other = Clustering::with_centers(c.assignment().to_vec(), k, centers).unwrap();
                    prop_assert!(best <= kmedian_cost(&inst, &other).unwrap().value + 1e-12);
                }
            }
        }

        #[test]
        fn costs_invariant_under_permutation((inst, labels, perm) in random_instance()) {
            let canon = canonical_labels(&labels);
            let k = *canon.iter().max().unwrap() + 1;
            let c = with_medoid_centers(&inst, &Clustering::new(canon.clone(), k).unwrap()).unwrap();
            let permuted = inst.permuted(&perm).unwrap();
            // new point i is old point perm[i]
            let labels2: Vec<usize> = perm.iter().map(|&old| canon[old]).collect();
            let centers2: Vec<usize> = c.centers().unwrap().iter()
                .map(|&old| perm.iter().position(|&p| p == old).unwrap()).collect();
            let c2 = Clustering::with_centers(labels2, k, centers2).unwrap();
            prop_assert!((minsum_cost(&inst, &c).unwrap().value - minsum_cost(&permuted, &c2).unwrap().value).abs() < 1e-12);
            prop_assert!((kmedian_cost(&inst, &c).unwrap().value - kmedian_cost(&permuted, &c2).unwrap().value).abs() < 1e-12);
        }
    }
}
