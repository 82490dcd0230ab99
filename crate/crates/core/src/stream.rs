//! One-pass streaming k-median for center-stable instances.
//!
//! The stream keeps `k` candidate centers. Each arriving point is added, and
//! one endpoint of the closest candidate pair is dropped: the endpoint that
//! arrived later, with distance ties broken by the pair's arrival indices.
//! Distances between retained candidates are cached, so each step queries the
//! oracle only for the new point against the current candidates.

use std::cell::Cell;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{Clustering, MetricInstance};
use crate::oracle::nearest_center_assignment;

/// Source of pairwise distances for the stream.
pub trait DistanceOracle {
    fn distance(&self, a: usize, b: usize) -> f64;
}

impl DistanceOracle for MetricInstance {
    fn distance(&self, a: usize, b: usize) -> f64 {
        self.d(a, b)
    }
}

/// Adapts a closure, e.g. one that computes distances on demand from stored features.
pub struct FnOracle<F>(pub F);

impl<F: Fn(usize, usize) -> f64> DistanceOracle for FnOracle<F> {
    fn distance(&self, a: usize, b: usize) -> f64 {
        (self.0)(a, b)
    }
}

/// Wraps an oracle and counts queries.
pub struct CountingOracle<'a, O: ?Sized> {
    inner: &'a O,
    calls: Cell<u64>,
}

impl<'a, O: DistanceOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Self { inner, calls: Cell::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }
}

impl<O: DistanceOracle + ?Sized> DistanceOracle for CountingOracle<'_, O> {
    fn distance(&self, a: usize, b: usize) -> f64 {
        self.calls.set(self.calls.get() + 1);
        self.inner.distance(a, b)
    }
}

/// A retained point and the position at which it arrived in the stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub point: usize,
    pub arrival: usize,
}

/// What one step did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub evicted: Option<Candidate>,
    /// The retained endpoint of the closest pair.
    pub partner: Option<Candidate>,
    pub pair_distance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct StreamState {
    k: usize,
    candidates: Vec<Candidate>,
    // row-major (k+1) x (k+1) distances between candidate slots
    cache: Vec<f64>,
    points_seen: usize,
    peak_retained: usize,
}

impl StreamState {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        Ok(Self {
            k,
            candidates: Vec::with_capacity(k + 1),
            cache: vec![0.0; (k + 1) * (k + 1)],
            points_seen: 0,
            peak_retained: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn points_seen(&self) -> usize {
        self.points_seen
    }

    /// Largest number of candidates retained between steps. The arriving point
    /// briefly makes `k + 1` before an eviction; that transient is not counted.
    pub fn peak_retained(&self) -> usize {
        self.peak_retained
    }

    pub fn cached_distance(&self, a: usize, b: usize) -> f64 {
        self.cache[a * (self.k + 1) + b]
    }

    /// Feeds one point. During warm-up (the first `k` points) nothing is evicted.
    pub fn push(&mut self, point: usize, oracle: &(impl DistanceOracle + ?Sized)) -> Result<StepOutcome> {
        if self.candidates.iter().any(|c| c.point == point) {
            return Err(Error::DuplicatePoint(point));
        }
        let w = self.k + 1;
        let slot = self.candidates.len();
        for (i, c) in self.candidates.iter().enumerate() {
            let d = oracle.distance(c.point, point);
            self.cache[i * w + slot] = d;
            self.cache[slot * w + i] = d;
        }
        self.candidates.push(Candidate { point, arrival: self.points_seen });
        self.points_seen += 1;
        if self.candidates.len() <= self.k {
            self.peak_retained = self.peak_retained.max(self.candidates.len());
            return Ok(StepOutcome { evicted: None, partner: None, pair_distance: None });
        }

        // candidates are kept in arrival order, so slot order is arrival order
        let mut best = (f64::INFINITY, 0, 1);
        for a in 0..self.candidates.len() {
            for b in a + 1..self.candidates.len() {
                let d = self.cache[a * w + b];
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (dist, keep, drop) = best;
        let partner = self.candidates[keep];
        let evicted = self.candidates.remove(drop);
        // shift cache rows/columns above `drop` down by one
        let len = self.candidates.len();
        for r in 0..len {
            for c in 0..len {
                let (sr, sc) = (r + usize::from(r >= drop), c + usize::from(c >= drop));
                self.cache[r * w + c] = self.cache[sr * w + sc];
            }
        }
        Ok(StepOutcome { evicted: Some(evicted), partner: Some(partner), pair_distance: Some(dist) })
    }

    /// Retained points in ascending index order.
    pub fn centers(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.candidates.iter().map(|c| c.point).collect();
        c.sort_unstable();
        c
    }
}

/// Result of replaying a whole stream.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamRun {
    pub centers: Vec<usize>,
    pub peak_retained: usize,
    pub oracle_calls: u64,
}

/// Replays `order` through the streaming algorithm and returns the final candidates.
pub fn stream_kmedian(instance: &MetricInstance, order: &[usize], k: usize) -> Result<StreamRun> {
    stream_kmedian_observed(instance, order, k, |_, _| {})
}

/// As [`stream_kmedian`], calling `observe(state, outcome)` after every step.
pub fn stream_kmedian_observed(
    instance: &MetricInstance,
    order: &[usize],
    k: usize,
    mut observe: impl FnMut(&StreamState, &StepOutcome),
) -> Result<StreamRun> {
    let n = instance.n();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    check_permutation(order, n)?;
    let oracle = CountingOracle::new(instance);
    let mut state = StreamState::new(k)?;
    for &p in order {
        let outcome = state.push(p, &oracle)?;
        observe(&state, &outcome);
    }
    Ok(StreamRun { centers: state.centers(), peak_retained: state.peak_retained(), oracle_calls: oracle.calls() })
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Parameter(format!("order has {} entries, expected {n}", order.len())));
    }
    let mut seen = vec![false; n];
    for &p in order {
        if p >= n {
            return Err(Error::IndexOutOfRange { index: p, n });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::DuplicatePoint(p));
        }
    }
    Ok(())
}

/// Assigns every point to its nearest center (ties to the lowest position in
/// `centers`); cluster `i` is the one containing `centers[i]`.
pub fn induce_partition(instance: &MetricInstance, centers: &[usize]) -> Result<Clustering> {
    let n = instance.n();
    if centers.is_empty() || centers.len() > n {
        return Err(Error::KOutOfRange { k: centers.len(), n });
    }
    let mut seen = vec![false; n];
    for &c in centers {
        instance.check_index(c)?;
        if std::mem::replace(&mut seen[c], true) {
            return Err(Error::DuplicatePoint(c));
        }
    }
    let assignment = nearest_center_assignment(instance, centers);
    Clustering::with_centers(assignment, centers.len(), centers.to_vec())
}

/// How to order the points of an instance for streaming.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamOrder {
    Given,
    Reverse,
    Random { seed: u64 },
}

impl StreamOrder {
    /// Materializes the order over `0..n`.
    pub fn materialize(&self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        match self {
            StreamOrder::Given => {}
            StreamOrder::Reverse => order.reverse(),
            StreamOrder::Random { seed } => order.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed)),
        }
        order
    }
}

/// Parses a replay file: one point index per line, blank lines ignored.
pub fn parse_order(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|e| Error::Parse { line: i + 1, msg: format!("{:?}: {e}", l.trim()) })
        })
        .collect()
}

pub fn load_order(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_order(&std::fs::read_to_string(path)?)
}
