//! Exhaustive solvers used as ground truth.
//!
//! All oracles are deterministic: ties are broken lexicographically on point or
//! vertex indices, and the parallel enumeration merges per-chunk results in
//! chunk order.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metric::{canonical_labels, Clustering, Cost, MetricInstance, Objective};
use crate::{par, COST_TOLERANCE};

/// Environment variable overriding both enumeration budgets.
pub const BUDGET_ENV: &str = "STABLE_CLUSTER_BUDGET";

/// Caps on exhaustive enumeration; exceeding one is an error, never a silent truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of k-median center subsets.
    pub center_subsets: u128,
    /// Maximum number of min-sum partitions (also caps tie expansion in k-median).
    pub partitions: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Self { center_subsets: 2_000_000, partitions: 5_000_000 }
    }
}

impl Budget {
    pub fn uniform(limit: u128) -> Self {
        Self { center_subsets: limit, partitions: limit }
    }

    /// Default budget, overridden by `STABLE_CLUSTER_BUDGET` when it parses as an integer.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u128>().ok())
            .map_or_else(Self::default, Self::uniform)
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Stirling number of the second kind, saturating at `u128::MAX`.
pub fn stirling2(n: usize, k: usize) -> u128 {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = (j as u128).saturating_mul(row[j]).saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[k]
}

/// Exact optimum plus uniqueness of the optimal partition.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimumResult {
    pub cost: Cost,
    pub clustering: Clustering,
    pub unique_partition: bool,
    pub all_optimal_count: usize,
}

struct SharedBest(AtomicU64);

impl SharedBest {
    fn new() -> Self {
        Self(AtomicU64::new(f64::INFINITY.to_bits()))
    }

    // Non-negative floats order the same way as their bit patterns.
    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn offer(&self, v: f64) {
        self.0.fetch_min(v.to_bits(), Ordering::Relaxed);
    }
}

/// Candidates within tolerance of the best cost seen so far, in discovery order.
struct NearOptimal<T> {
    best: f64,
    items: Vec<(f64, T)>,
}

impl<T> NearOptimal<T> {
    fn new() -> Self {
        Self { best: f64::INFINITY, items: Vec::new() }
    }

    fn offer(&mut self, cost: f64, item: impl FnOnce() -> T) {
        if cost > self.best + COST_TOLERANCE {
            return;
        }
        if cost < self.best {
            self.best = cost;
            let best = self.best;
            self.items.retain(|(c, _)| *c <= best + COST_TOLERANCE);
        }
        self.items.push((cost, item()));
    }

    fn merge(chunks: Vec<NearOptimal<T>>) -> (f64, Vec<(f64, T)>) {
        let best = chunks.iter().map(|c| c.best).fold(f64::INFINITY, f64::min);
        let items = chunks
            .into_iter()
            .flat_map(|c| c.items)
            .filter(|(c, _)| *c <= best + COST_TOLERANCE)
            .collect();
        (best, items)
    }
}

fn check_k(instance: &MetricInstance, k: usize) -> Result<()> {
    if k == 0 || k > instance.n() {
        return Err(Error::KOutOfRange { k, n: instance.n() });
    }
    Ok(())
}

/// Advances `combo` (strictly increasing, values `< n`) to the next combination in lex order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn brute_force_kmedian(instance: &MetricInstance, k: usize) -> Result<OptimumResult> {
    brute_force_kmedian_with(instance, k, Budget::default())
}

/// Enumerates every `k`-subset of points as centers, assigning each point to
/// its nearest center (ties to the lowest index). Uniqueness is judged on
/// partitions: optimal center sets with tied points contribute every tie
/// resolution.
pub fn brute_force_kmedian_with(instance: &MetricInstance, k: usize, budget: Budget) -> Result<OptimumResult> {
    check_k(instance, k)?;
    let n = instance.n();
    let required = binomial(n, k);
    if required > budget.center_subsets {
        return Err(Error::BudgetExceeded { what: "center subsets", required, budget: budget.center_subsets });
    }
    let shared = SharedBest::new();
    let chunks = par::map_range(n - k + 1, |first| {
        let mut near = NearOptimal::new();
        let mut combo: Vec<usize> = (first..first + k).collect();
        loop {
            if combo[0] != first {
                break;
            }
            let bound = near.best.min(shared.get()) + COST_TOLERANCE;
            let mut cost = 0.0;
            for p in 0..n {
                let row = instance.row(p);
                cost += combo.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min);
                if cost > bound {
                    break;
                }
            }
            if cost <= bound {
                near.offer(cost, || combo.clone());
                shared.offer(near.best);
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
        near
    });
    let (best, optimal) = NearOptimal::merge(chunks);
    let (_, witness) = optimal.first().expect("at least one center subset");
    let witness = witness.clone();

    let mut partitions = BTreeSet::new();
    let mut expanded: u128 = 0;
    for (_, centers) in &optimal {
        expand_tied_assignments(instance, centers, budget.partitions, &mut expanded, &mut partitions)?;
    }
    let assignment = nearest_center_assignment(instance, &witness);
    let clustering = Clustering::with_centers(assignment, k, witness)?;
    Ok(OptimumResult {
        cost: Cost { value: best, objective: Objective::KMedian },
        clustering,
        unique_partition: partitions.len() == 1,
        all_optimal_count: partitions.len(),
    })
}

/// Label of the nearest listed center for every point; centers label themselves
/// and ties go to the lowest list position.
pub(crate) fn nearest_center_assignment(instance: &MetricInstance, centers: &[usize]) -> Vec<usize> {
    (0..instance.n())
        .map(|p| {
            if let Some(i) = centers.iter().position(|&c| c == p) {
                return i;
            }
            let row = instance.row(p);
            let mut best = 0;
            for (i, &c) in centers.iter().enumerate().skip(1) {
                if row[c] < row[centers[best]] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

fn expand_tied_assignments(
    instance: &MetricInstance,
    centers: &[usize],
    limit: u128,
    expanded: &mut u128,
    out: &mut BTreeSet<Vec<usize>>,
) -> Result<()> {
    let n = instance.n();
    let choices: Vec<Vec<usize>> = (0..n)
        .map(|p| {
            if let Some(i) = centers.iter().position(|&c| c == p) {
                return vec![i];
            }
            let row = instance.row(p);
            let near = centers.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min);
            (0..centers.len()).filter(|&i| row[centers[i]] <= near + COST_TOLERANCE).collect()
        })
        .collect();
    let combos = choices.iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    *expanded = expanded.saturating_add(combos);
    if *expanded > limit {
        return Err(Error::BudgetExceeded { what: "tied optimal assignments", required: *expanded, budget: limit });
    }
    let mut pick = vec![0usize; n];
    loop {
        let labels: Vec<usize> = (0..n).map(|p| choices[p][pick[p]]).collect();
        out.insert(canonical_labels(&labels));
        let mut p = 0;
        while p < n {
            pick[p] += 1;
            if pick[p] < choices[p].len() {
                break;
            }
            pick[p] = 0;
            p += 1;
        }
        if p == n {
            return Ok(());
        }
    }
}

pub fn brute_force_minsum(instance: &MetricInstance, k: usize) -> Result<OptimumResult> {
    brute_force_minsum_with(instance, k, Budget::default())
}

/// Enumerates all partitions into exactly `k` non-empty blocks as restricted
/// growth strings, depth first with cost pruning. The witness is the
/// lexicographically first optimal restricted growth string.
pub fn brute_force_minsum_with(instance: &MetricInstance, k: usize, budget: Budget) -> Result<OptimumResult> {
    check_k(instance, k)?;
    let n = instance.n();
    let required = stirling2(n, k);
    if required > budget.partitions {
        return Err(Error::BudgetExceeded { what: "partitions", required, budget: budget.partitions });
    }
    let depth = n.min(6);
    let mut prefixes = Vec::new();
    rgs_prefixes(n, k, depth, &mut vec![], 0, &mut prefixes);

    let shared = SharedBest::new();
    let chunks = par::map_slice(&prefixes, |prefix| {
        let mut search = MinSumSearch {
            instance,
            k,
            labels: vec![0; n],
            blocks: vec![Vec::with_capacity(n); k],
            near: NearOptimal::new(),
            shared: &shared,
        };
        let mut cost = 0.0;
        let mut used = 0;
        for (i, &b) in prefix.iter().enumerate() {
            cost += 2.0 * search.block_sum(i, b);
            search.place(i, b);
            used = used.max(b + 1);
        }
        search.dfs(prefix.len(), used, cost);
        search.near
    });
    let (best, optimal) = NearOptimal::merge(chunks);
    let (_, labels) = optimal.first().expect("at least one partition");
    let clustering = Clustering::new(labels.clone(), k)?;
    Ok(OptimumResult {
        cost: Cost { value: best, objective: Objective::MinSum },
        clustering,
        unique_partition: optimal.len() == 1,
        all_optimal_count: optimal.len(),
    })
}

fn rgs_prefixes(n: usize, k: usize, depth: usize, cur: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<usize>>) {
    let i = cur.len();
    if i == depth {
        out.push(cur.clone());
        return;
    }
    for b in 0..=used.min(k - 1) {
        let now = used.max(b + 1);
        if n - i - 1 < k - now {
            continue;
        }
        cur.push(b);
        rgs_prefixes(n, k, depth, cur, now, out);
        cur.pop();
    }
}

struct MinSumSearch<'a> {
    instance: &'a MetricInstance,
    k: usize,
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    near: NearOptimal<Vec<usize>>,
    shared: &'a SharedBest,
}

impl MinSumSearch<'_> {
    fn block_sum(&self, p: usize, b: usize) -> f64 {
        let row = self.instance.row(p);
        self.blocks[b].iter().map(|&q| row[q]).sum()
    }

    fn place(&mut self, p: usize, b: usize) {
        self.labels[p] = b;
        self.blocks[b].push(p);
    }

    fn dfs(&mut self, i: usize, used: usize, cost: f64) {
        let n = self.labels.len();
        if i == n {
            let labels = &self.labels;
            self.near.offer(cost, || labels.clone());
            self.shared.offer(self.near.best);
            return;
        }
        for b in 0..=used.min(self.k - 1) {
            let now = used.max(b + 1);
            if n - i - 1 < self.k - now {
                continue;
            }
            let next = cost + 2.0 * self.block_sum(i, b);
            if next > self.near.best.min(self.shared.get()) + COST_TOLERANCE {
                continue;
            }
            self.place(i, b);
            self.dfs(i + 1, now, next);
            self.blocks[b].pop();
        }
    }
}

/// Smallest dominating set found by [`min_dominating_set`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatingSet {
    pub size: usize,
    pub witness: Vec<usize>,
}

fn closed_masks(graph: &Graph) -> Result<Vec<u64>> {
    Ok(graph
        .adjacency_masks()?
        .into_iter()
        .enumerate()
        .map(|(v, m)| m | (1u64 << v))
        .collect())
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Smallest dominating set of size at most `max_size`, scanning sizes upward and
/// subsets in lexicographic order; `None` if every dominating set is larger.
pub fn min_dominating_set(graph: &Graph, max_size: usize) -> Result<Option<DominatingSet>> {
    let n = graph.n();
    if max_size > n {
        return Err(Error::Parameter(format!("max_size {max_size} exceeds n = {n}")));
    }
    let closed = closed_masks(graph)?;
    let full = full_mask(n);
    for size in 1..=max_size {
        let hit = par::find_map_first(n - size + 1, |first| {
            let mut combo: Vec<usize> = (first..first + size).collect();
            loop {
                if combo[0] != first {
                    return None;
                }
                if combo.iter().fold(0u64, |m, &v| m | closed[v]) == full {
                    return Some(combo);
                }
                if !next_combination(&mut combo, n) {
                    return None;
                }
            }
        });
        if let Some(witness) = hit {
            return Ok(Some(DominatingSet { size, witness }));
        }
    }
    Ok(None)
}

fn set_mask(graph: &Graph, set: &[usize]) -> Result<u64> {
    let mut mask = 0u64;
    for &v in set {
        if v >= graph.n() {
            return Err(Error::IndexOutOfRange { index: v, n: graph.n() });
        }
        mask |= 1u64 << v;
    }
    Ok(mask)
}

pub fn is_dominating(graph: &Graph, set: &[usize]) -> Result<bool> {
    let closed = closed_masks(graph)?;
    let mask = set_mask(graph, set)?;
    let covered = (0..graph.n()).filter(|&v| mask >> v & 1 == 1).fold(0u64, |m, v| m | closed[v]);
    Ok(covered == full_mask(graph.n()))
}

/// True iff every vertex outside `set` has exactly one neighbour in `set`.
pub fn is_perfect_dominating(graph: &Graph, set: &[usize]) -> Result<bool> {
    let open = graph.adjacency_masks()?;
    let mask = set_mask(graph, set)?;
    Ok((0..graph.n())
        .filter(|&v| mask >> v & 1 == 0)
        .all(|v| (open[v] & mask).count_ones() == 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrianglePartition {
    pub feasible: bool,
    pub witness: Option<Vec<[usize; 3]>>,
    /// Set when the maximum degree exceeds 4, outside the regime the reductions target.
    pub degree_warning: bool,
}

/// Exhaustive search for a partition of the vertices into triangles. The
/// lowest uncovered vertex is always matched first, so the witness is the
/// lexicographically first one.
pub fn triangle_partition_decide(graph: &Graph) -> Result<TrianglePartition> {
    let n = graph.n();
    if !n.is_multiple_of(3) {
        return Err(Error::NotDivisibleByThree(n));
    }
    let mut used = vec![false; n];
    let mut triples = Vec::with_capacity(n / 3);
    let feasible = triangle_dfs(graph, &mut used, &mut triples);
    Ok(TrianglePartition {
        feasible,
        witness: feasible.then_some(triples),
        degree_warning: graph.max_degree() > 4,
    })
}

fn triangle_dfs(graph: &Graph, used: &mut [bool], triples: &mut Vec<[usize; 3]>) -> bool {
    let Some(v) = used.iter().position(|u| !u) else {
        return true;
    };
    used[v] = true;
    let nbrs: Vec<usize> = graph.neighbors(v).iter().copied().filter(|&u| !used[u]).collect();
    for (ai, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[ai + 1..] {
            if !graph.has_edge(a, b) {
                continue;
            }
            used[a] = true;
            used[b] = true;
            triples.push([v, a, b]);
            if triangle_dfs(graph, used, triples) {
                return true;
            }
            triples.pop();
            used[a] = false;
            used[b] = false;
        }
    }
    used[v] = false;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::fixtures::*;
    use crate::metric::{kmedian_cost, minsum_cost, with_medoid_centers};
    use crate::reductions::graph_to_halves_metric;
    use proptest::prelude::*;

    #[test]
    fn counting_helpers() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(20, 4), 4845);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(stirling2(4, 2), 7);
        assert_eq!(stirling2(12, 4), 611_501);
        assert_eq!(stirling2(5, 5), 1);
        assert_eq!(stirling2(5, 0), 0);
    }

    #[test]
    fn combinations_in_lex_order() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn kmedian_four_point() {
        let r = brute_force_kmedian(&four_point(), 2).unwrap();
        assert!((r.cost.value - 0.2).abs() < 1e-12);
        assert_eq!(r.clustering.partition_key(), vec![0, 0, 1, 1]);
        assert_eq!(r.clustering.centers().unwrap(), &[0, 2]);
        assert!(r.unique_partition);
        assert_eq!(r.all_optimal_count, 1);
    }

    #[test]
    fn kmedian_star_and_identity() {
        let star = graph_to_halves_metric(&Graph::star(3).unwrap()).unwrap();
        let r = brute_force_kmedian(&star, 1).unwrap();
        assert_eq!(r.cost.value, 1.5);
        assert_eq!(r.clustering.centers().unwrap(), &[0]);
        let r = brute_force_kmedian(&four_point(), 4).unwrap();
        assert_eq!(r.cost.value, 0.0);
    }

    #[test]
    fn kmedian_ties_make_partition_non_unique() {
        // equilateral triangle: every 2-center choice leaves the third point tied
        let r = brute_force_kmedian(&constant(3, 1.0), 2).unwrap();
        assert!(!r.unique_partition);
        assert_eq!(r.all_optimal_count, 3);
        assert_eq!(r.cost.value, 1.0);
    }

    #[test]
    fn minsum_examples() {
        let tri = graph_to_halves_metric(&Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()).unwrap();
        let r = brute_force_minsum(&tri, 2).unwrap();
        assert_eq!(r.cost.value, 6.0);
        assert!(r.unique_partition);
        assert_eq!(r.clustering.partition_key(), vec![0, 0, 0, 1, 1, 1]);

        let r = brute_force_minsum(&four_point(), 4).unwrap();
        assert_eq!(r.cost.value, 0.0);
        let r = brute_force_minsum(&four_point(), 2).unwrap();
        assert!((r.cost.value - 0.4).abs() < 1e-12);
        assert_eq!(r.clustering.partition_key(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn budgets_and_k_range() {
        let inst = constant(10, 1.0);
        assert!(matches!(brute_force_kmedian(&inst, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(brute_force_minsum(&inst, 11), Err(Error::KOutOfRange { .. })));
        assert!(matches!(
            brute_force_minsum_with(&inst, 3, Budget::uniform(100)),
            Err(Error::BudgetExceeded { what: "partitions", .. })
        ));
        assert!(matches!(
            brute_force_kmedian_with(&inst, 3, Budget::uniform(100)),
            Err(Error::BudgetExceeded { what: "center subsets", .. })
        ));
    }

    #[test]
    fn dominating_set_examples() {
        let star = min_dominating_set(&Graph::star(3).unwrap(), 4).unwrap().unwrap();
        assert_eq!(star, DominatingSet { size: 1, witness: vec![0] });
        let p4 = min_dominating_set(&Graph::path(4).unwrap(), 4).unwrap().unwrap();
        assert_eq!(p4.size, 2);
        let e3 = min_dominating_set(&Graph::empty(3).unwrap(), 3).unwrap().unwrap();
        assert_eq!(e3.size, 3);
        assert_eq!(min_dominating_set(&Graph::path(4).unwrap(), 1).unwrap(), None);
    }

    #[test]
    fn p4_lexicographic_witness() {
        // minimum dominating sets of P4: {0,2}, {0,3}, {1,2}, {1,3}; the first is {0,2}
        let p4 = min_dominating_set(&Graph::path(4).unwrap(), 4).unwrap().unwrap();
        assert_eq!(p4.witness, vec![0, 2]);
        assert!(is_dominating(&Graph::path(4).unwrap(), &[0, 3]).unwrap());
    }

    #[test]
    fn perfect_domination() {
        let p4 = Graph::path(4).unwrap();
        assert!(is_perfect_dominating(&p4, &[1, 2]).unwrap());
        assert!(!is_perfect_dominating(&p4, &[0, 2]).unwrap());
        assert!(is_perfect_dominating(&p4, &[0, 1, 2, 3]).unwrap());
    }

    #[test]
    fn triangle_partition_examples() {
        let k3 = triangle_partition_decide(&Graph::complete(3).unwrap()).unwrap();
        assert!(k3.feasible);
        assert_eq!(k3.witness, Some(vec![[0, 1, 2]]));
        assert!(!triangle_partition_decide(&Graph::path(3).unwrap()).unwrap().feasible);
        let two = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(triangle_partition_decide(&two).unwrap().feasible);
        assert!(matches!(triangle_partition_decide(&Graph::path(4).unwrap()), Err(Error::NotDivisibleByThree(4))));
        assert!(triangle_partition_decide(&Graph::complete(6).unwrap()).unwrap().degree_warning);
    }

    #[test]
    fn sequential_matches_parallel() {
        let inst = MetricInstance::from_fn(9, |i, j| ((i * 7 + j * 3) % 11) as f64 / 10.0 + 0.05).unwrap();
        let a = brute_force_minsum(&inst, 3).unwrap();
        let b = par::sequential(|| brute_force_minsum(&inst, 3).unwrap());
        assert_eq!(a, b);
        let a = brute_force_kmedian(&inst, 3).unwrap();
        let b = par::sequential(|| brute_force_kmedian(&inst, 3).unwrap());
        assert_eq!(a, b);
    }

    fn instance_and_perm() -> impl Strategy<Value = (MetricInstance, Vec<usize>, usize)> {
        (3usize..9).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.05f64..1.0, n * n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                1usize..=3.min(n),
            )
                .prop_map(move |(v, perm, k)| (MetricInstance::from_fn(n, |i, j| v[i * n + j]).unwrap(), perm, k))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn minsum_agrees_under_relabeling((inst, perm, k) in instance_and_perm()) {
            let a = brute_force_minsum(&inst, k).unwrap();
            let b = brute_force_minsum(&inst.permuted(&perm).unwrap(), k).unwrap();
            prop_assert!((a.cost.value - b.cost.value).abs() < 1e-9);
            if a.unique_partition && b.unique_partition {
                let back: Vec<usize> = (0..inst.n()).map(|old| {
                    b.clustering.label(perm.iter().position(|&p| p == old).unwrap())
                }).collect();
                prop_assert_eq!(canonical_labels(&back), a.clustering.partition_key());
            }
        }

        #[test]
        fn kmedian_lower_bounds_other_clusterings((inst, perm, k) in instance_and_perm()) {
            let opt = brute_force_kmedian(&inst, k).unwrap();
            prop_assert!((kmedian_cost(&inst, &opt.clustering).unwrap().value - opt.cost.value).abs() < 1e-12);
            let labels: Vec<usize> = perm.iter().map(|&p| p % k).collect();
            let other = with_medoid_centers(&inst, &Clustering::new(labels, k).unwrap()).unwrap();
            prop_assert!(opt.cost.value <= kmedian_cost(&inst, &other).unwrap().value + 1e-12);
            let ms = brute_force_minsum(&inst, k).unwrap();
            prop_assert!(ms.cost.value <= minsum_cost(&inst, &other).unwrap().value + 1e-12);
        }
    }
}
