//! Average-linkage agglomeration and optimal k-pruning of the merge tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{medoid, point_to_set_unchecked, set_to_set_unchecked, Clustering, Cost, MetricInstance, Objective};
use crate::COST_TOLERANCE;

/// One agglomeration step. Node ids: leaves `0..n`, the `i`-th merge creates node `n + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// Binary merge history over `n` points.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeTree {
    n: usize,
    merges: Vec<Merge>,
}

impl MergeTree {
    /// Rebuilds a tree from a merge list, checking that every node is merged exactly once.
    pub fn from_merges(n: usize, merges: Vec<Merge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        if merges.len() != n - 1 {
            return Err(Error::InvalidClustering(format!("{} merges for {n} leaves", merges.len())));
        }
        let mut used = vec![false; 2 * n - 1];
        for (i, m) in merges.iter().enumerate() {
            let id = n + i;
            for c in [m.left, m.right] {
                if c >= id || used[c] {
                    return Err(Error::InvalidClustering(format!("merge {i} reuses or forward-references node {c}")));
                }
                used[c] = true;
            }
            if m.left == m.right {
                return Err(Error::InvalidClustering(format!("merge {i} joins node {} with itself", m.left)));
            }
        }
        Ok(Self { n, merges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn root(&self) -> usize {
        2 * self.n - 2
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        (node >= self.n).then(|| {
            let m = self.merges[node - self.n];
            (m.left, m.right)
        })
    }

    /// Points under `node`, sorted.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            match self.children(v) {
                Some((l, r)) => stack.extend([l, r]),
                None => out.push(v),
            }
        }
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.merges)?)
    }

    pub fn from_json(n: usize, text: &str) -> Result<Self> {
        Self::from_merges(n, serde_json::from_str(text)?)
    }
}

/// Repeatedly merges the pair `(A, B)` minimizing `d(A, B) / (|A| |B|)`.
///
/// Ties go to the pair that is lexicographically smallest by
/// `(min A, min B)`; the cluster with the smaller minimum becomes the left child.
pub fn average_linkage_tree(instance: &MetricInstance) -> MergeTree {
    let n = instance.n();
    // Active clusters, kept sorted by minimum point index.
    let mut active: Vec<(usize, usize)> = (0..n).map(|p| (p, p)).collect(); // (min point, node id)
    let mut size = vec![1usize; 2 * n - 1];
    let mut sums: Vec<Vec<f64>> = (0..n).map(|i| instance.row(i).to_vec()).collect();
    let mut slot_of = (0..n).collect::<Vec<usize>>(); // node id -> row in `sums`
    slot_of.resize(2 * n - 1, usize::MAX);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        let mut best = (f64::INFINITY, 0, 1);
        for a in 0..active.len() {
            let (_, u) = active[a];
            for (b, &(_, v)) in active.iter().enumerate().skip(a + 1) {
                let avg = sums[slot_of[u]][slot_of[v]] / (size[u] * size[v]) as f64;
                if avg < best.0 - COST_TOLERANCE {
                    best = (avg, a, b);
                }
            }
        }
        let (height, a, b) = best;
        let (min_a, u) = active[a];
        let (_, v) = active[b];
        let id = n + merges.len();
        merges.push(Merge { left: u, right: v, height });
        size[id] = size[u] + size[v];

        // Reuse u's row for the merged cluster.
        let (su, sv) = (slot_of[u], slot_of[v]);
        for &(_, w) in &active {
            let sw = slot_of[w];
            let merged = sums[su][sw] + sums[sv][sw];
            sums[su][sw] = merged;
            sums[sw][su] = merged;
        }
        slot_of[id] = su;
        active.remove(b);
        active[a] = (min_a, id);
    }
    MergeTree { n, merges }
}

/// Optimal pruning of a merge tree into `k` clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct Pruning {
    pub clustering: Clustering,
    pub cost: Cost,
    /// Tree nodes chosen as clusters, in cluster-label order.
    pub nodes: Vec<usize>,
}

/// Min-sum-optimal pruning; see [`best_k_pruning_for`].
pub fn best_k_pruning(tree: &MergeTree, instance: &MetricInstance, k: usize) -> Result<Pruning> {
    best_k_pruning_for(tree, instance, k, Objective::MinSum)
}

/// Chooses `k` disjoint tree nodes covering all points with minimum total cost.
///
/// A node's cost is its min-sum cost, or for k-median its cost around its medoid.
/// Among equal-cost splits the one giving fewer clusters to the left child wins.
pub fn best_k_pruning_for(tree: &MergeTree, instance: &MetricInstance, k: usize, objective: Objective) -> Result<Pruning> {
    let n = tree.n();
    if instance.n() != n {
        return Err(Error::InvalidClustering(format!("tree has {n} leaves, instance has {} points", instance.n())));
    }
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let nodes = 2 * n - 1;
    let mut leaf_count = vec![1usize; nodes];
    // table[v][j - 1] = best cost with j clusters under v; split[v][j - 1] = clusters given to the left child
    let mut table: Vec<Vec<f64>> = vec![Vec::new(); nodes];
    let mut split: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for v in 0..nodes {
        let members = tree.leaves(v);
        let single = match objective {
            Objective::MinSum => set_to_set_unchecked(instance, &members, &members),
            Objective::KMedian => point_to_set_unchecked(instance, medoid(instance, &members)?, &members),
        };
        let Some((l, r)) = tree.children(v) else {
            table[v] = vec![single];
            split[v] = vec![0];
            continue;
        };
        leaf_count[v] = leaf_count[l] + leaf_count[r];
        let cap = leaf_count[v].min(k);
        let mut row = vec![single];
        let mut srow = vec![0];
        for j in 2..=cap {
            let mut best = (f64::INFINITY, 0);
            for jl in 1..j {
                let jr = j - jl;
                if jl > table[l].len() || jr > table[r].len() {
                    continue;
                }
                let c = table[l][jl - 1] + table[r][jr - 1];
                if c < best.0 - COST_TOLERANCE {
                    best = (c, jl);
                }
            }
            row.push(best.0);
            srow.push(best.1);
        }
        table[v] = row;
        split[v] = srow;
    }

    let root = tree.root();
    let mut chosen = Vec::with_capacity(k);
    let mut stack = vec![(root, k)];
    while let Some((v, j)) = stack.pop() {
        if j == 1 {
            chosen.push(v);
            continue;
        }
        let (l, r) = tree.children(v).expect("only internal nodes split");
        let jl = split[v][j - 1];
        stack.push((r, j - jl));
        stack.push((l, jl));
    }
    let blocks: Vec<Vec<usize>> = chosen.iter().map(|&v| tree.leaves(v)).collect();
    let clustering = Clustering::from_clusters(n, &blocks)?;
    let clustering = match objective {
        Objective::MinSum => clustering,
        Objective::KMedian => crate::metric::with_medoid_centers(instance, &clustering)?,
    };
    Ok(Pruning { clustering, cost: Cost { value: table[root][k - 1], objective }, nodes: chosen })
}
