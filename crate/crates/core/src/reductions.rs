//! Instance generators: hardness-reduction constructions and planted stable instances.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{parse_ints, Graph};
use crate::metric::{medoid, Clustering, MetricInstance, Objective, ValidationOptions};
use crate::oracle::{is_dominating, is_perfect_dominating, next_combination, Budget};
use crate::stability::{stability_profile_with, StabilityReport};

/// Maps edges to distance 1/2 and non-edges to 1. Always a unit-range metric.
pub fn graph_to_halves_metric(graph: &Graph) -> Result<MetricInstance> {
    if graph.n() < 2 {
        return Err(Error::InvalidGraph("the halves metric needs at least two vertices".into()));
    }
    MetricInstance::from_fn(graph.n(), |u, v| if graph.has_edge(u, v) { 0.5 } else { 1.0 })?
        .validated(ValidationOptions::default().with_unit(true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    DomSet,
    TrianglePartition,
    ThreeDm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionParameters {
    pub n: usize,
    pub k: usize,
    /// Dominating-set size bound, for dominating-set sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Ground-set size, for 3DM sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

/// Sidecar certificate emitted with every generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    pub source_kind: SourceKind,
    pub objective: Objective,
    pub parameters: ReductionParameters,
    /// Optimal cost when the source is a YES instance.
    pub expected_cost: Option<f64>,
    /// Stability level guaranteed under the construction's promise; `None`
    /// when the source falls outside the regime the guarantee covers.
    pub stability_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardnessInstance {
    pub instance: MetricInstance,
    pub k: usize,
    pub certificate: ReductionCertificate,
}

/// Dominating set of size `d` ↔ k-median cost `(n − d)/2` with `k = d`.
pub fn make_kmedian_hardness_instance(graph: &Graph, d: usize) -> Result<HardnessInstance> {
    let n = graph.n();
    if d == 0 || d > n {
        return Err(Error::KOutOfRange { k: d, n });
    }
    let instance = graph_to_halves_metric(graph)?;
    Ok(HardnessInstance {
        instance,
        k: d,
        certificate: ReductionCertificate {
            source_kind: SourceKind::DomSet,
            objective: Objective::KMedian,
            parameters: ReductionParameters { n, k: d, d: Some(d), m: None },
            expected_cost: Some((n - d) as f64 / 2.0),
            stability_floor: Some(2.0),
            warnings: vec![],
        },
    })
}

/// Triangle partition ↔ min-sum cost `n` with `k = n/3`.
pub fn make_minsum_hardness_instance(graph: &Graph) -> Result<HardnessInstance> {
    let n = graph.n();
    if !n.is_multiple_of(3) {
        return Err(Error::NotDivisibleByThree(n));
    }
    let instance = graph_to_halves_metric(graph)?;
    let mut warnings = vec![];
    let degree_ok = graph.max_degree() <= 4;
    if !degree_ok {
        warnings.push(format!(
            "max degree {} exceeds 4; the min-sum stability floor of 2 is not guaranteed",
            graph.max_degree()
        ));
    }
    Ok(HardnessInstance {
        instance,
        k: n / 3,
        certificate: ReductionCertificate {
            source_kind: SourceKind::TrianglePartition,
            objective: Objective::MinSum,
            parameters: ReductionParameters { n, k: n / 3, d: None, m: None },
            expected_cost: Some(n as f64),
            stability_floor: degree_ok.then_some(2.0),
            warnings,
        },
    })
}

/// Ground sets `X, Y, Z` of size `m` and a list of triples over them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeDmInstance {
    m: usize,
    triples: Vec<[usize; 3]>,
}

impl ThreeDmInstance {
    pub fn new(m: usize, triples: Vec<[usize; 3]>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidThreeDm("m must be positive".into()));
        }
        if triples.is_empty() {
            return Err(Error::InvalidThreeDm("at least one triple is required".into()));
        }
        for t in &triples {
            if t.iter().any(|&e| e >= m) {
                return Err(Error::InvalidThreeDm(format!("triple {t:?} out of range for m = {m}")));
            }
        }
        let mut sorted = triples.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidThreeDm(format!("duplicate triple {:?}", w[0])));
        }
        Ok(Self { m, triples })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    /// Exhaustive search for `m` pairwise-disjoint triples; returns their indices.
    pub fn perfect_matching(&self) -> Option<Vec<usize>> {
        let mut used = [vec![false; self.m], vec![false; self.m], vec![false; self.m]];
        let mut chosen = Vec::with_capacity(self.m);
        self.match_dfs(0, &mut used, &mut chosen).then_some(chosen)
    }

    // covers X in order: element x picks one triple whose first coordinate is x
    fn match_dfs(&self, x: usize, used: &mut [Vec<bool>; 3], chosen: &mut Vec<usize>) -> bool {
        if x == self.m {
            return true;
        }
        for (i, t) in self.triples.iter().enumerate() {
            if t[0] != x || used[1][t[1]] || used[2][t[2]] {
                continue;
            }
            used[1][t[1]] = true;
            used[2][t[2]] = true;
            chosen.push(i);
            if self.match_dfs(x + 1, used, chosen) {
                return true;
            }
            chosen.pop();
            used[1][t[1]] = false;
            used[2][t[2]] = false;
        }
        false
    }

    /// Parses `m L` followed by `L` lines `x y z`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let [m, l] = parse_ints::<2>(header, line)?;
        let mut triples = Vec::with_capacity(l);
        for _ in 0..l {
            let (line, text) = lines.next().ok_or(Error::Parse { line, msg: format!("expected {l} triples") })?;
            triples.push(parse_ints::<3>(text, line)?);
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse { line, msg: "trailing content after triples".into() });
        }
        Self::new(m, triples)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.m, self.triples.len());
        for [x, y, z] in &self.triples {
            s.push_str(&format!("{x} {y} {z}\n"));
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Graph built from a 3DM instance, with its fixed vertex layout.
#[derive(Clone, Debug, PartialEq)]
pub struct PdsppGraph {
    pub graph: Graph,
    /// Dominating-set size bound `m + 1`.
    pub d: usize,
    pub certificate: ReductionCertificate,
}

impl PdsppGraph {
    /// Vertex of element `e` in coordinate `axis` (0 = X, 1 = Y, 2 = Z).
    pub fn element_vertex(m: usize, axis: usize, e: usize) -> usize {
        axis * m + e
    }

    pub fn triple_vertex(m: usize, t: usize) -> usize {
        3 * m + t
    }

    pub fn hub_vertex(m: usize, triples: usize) -> usize {
        3 * m + triples
    }
}

/// Builds `V = V_X ∪ V_Y ∪ V_Z ∪ V_T ∪ {v}` with layout `V_X = [0, m)`,
/// `V_Y = [m, 2m)`, `V_Z = [2m, 3m)`, `V_T = [3m, 3m + L)`, `v = 3m + L`.
/// Each triple vertex is joined to its three elements and to `v`.
///
/// `m = 1` is rejected: a single triple vertex then dominates the whole graph
/// with one vertex, below the bound `d = 2`.
pub fn threedm_to_pdspp(instance: &ThreeDmInstance) -> Result<PdsppGraph> {
    let m = instance.m();
    if m < 2 {
        return Err(Error::InvalidThreeDm(
            "m = 1 is degenerate: one triple vertex dominates everything, so the size bound m + 1 is never tight".into(),
        ));
    }
    let l = instance.triples().len();
    let hub = PdsppGraph::hub_vertex(m, l);
    let mut edges = Vec::with_capacity(4 * l);
    for (t, triple) in instance.triples().iter().enumerate() {
        let tv = PdsppGraph::triple_vertex(m, t);
        for (axis, &e) in triple.iter().enumerate() {
            edges.push((PdsppGraph::element_vertex(m, axis, e), tv));
        }
        edges.push((tv, hub));
    }
    let graph = Graph::new(3 * m + l + 1, edges)?;
    let n = graph.n();
    Ok(PdsppGraph {
        graph,
        d: m + 1,
        certificate: ReductionCertificate {
            source_kind: SourceKind::ThreeDm,
            objective: Objective::KMedian,
            parameters: ReductionParameters { n, k: m + 1, d: Some(m + 1), m: Some(m) },
            expected_cost: Some((n - m - 1) as f64 / 2.0),
            stability_floor: Some(2.0),
            warnings: vec![],
        },
    })
}

/// 3DM instance all the way to a k-median instance with `k = m + 1`.
pub fn threedm_to_kmedian(instance: &ThreeDmInstance) -> Result<(PdsppGraph, HardnessInstance)> {
    let pds = threedm_to_pdspp(instance)?;
    let mut hard = make_kmedian_hardness_instance(&pds.graph, pds.d)?;
    hard.certificate = pds.certificate.clone();
    Ok((pds, hard))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromiseCheck {
    /// True iff every dominating set of size at most `d` is perfect.
    pub holds: bool,
    /// Dominating sets of size at most `d` that were inspected.
    pub dominating_sets: u64,
    /// First non-perfect dominating set, by size then lexicographically.
    pub counterexample: Option<Vec<usize>>,
}

/// Exhaustively checks the perfect-dominating-set promise for bound `d`.
pub fn verify_pdspp_promise(graph: &Graph, d: usize, budget: Budget) -> Result<PromiseCheck> {
    let n = graph.n();
    if d > n {
        return Err(Error::Parameter(format!("d = {d} exceeds n = {n}")));
    }
    let required: u128 = (1..=d).map(|s| crate::oracle::binomial(n, s)).sum();
    if required > budget.center_subsets {
        return Err(Error::BudgetExceeded { what: "vertex subsets", required, budget: budget.center_subsets });
    }
    let mut found = 0u64;
    for size in 1..=d {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if is_dominating(graph, &combo)? {
                found += 1;
                if !is_perfect_dominating(graph, &combo)? {
                    return Ok(PromiseCheck { holds: false, dominating_sets: found, counterexample: Some(combo) });
                }
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    Ok(PromiseCheck { holds: true, dominating_sets: found, counterexample: None })
}

/// Requested shape of a planted instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub sizes: Vec<usize>,
    pub target_alpha: f64,
    /// Rescale so the largest distance is 1.
    pub unit_range: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedInstance {
    pub instance: MetricInstance,
    /// Planted clusters with medoid centers.
    pub ground_truth: Clustering,
    /// Only set by [`certify_planted`].
    pub certified: Option<StabilityReport>,
}

/// Largest planted instance certified with the exact k-median oracle.
pub const CERTIFY_MAX_POINTS: usize = 20;

/// Places cluster `i` uniformly on a unit-width segment centered at `i · G`
/// with `G = 4 · target_alpha · max(sizes) · k`, using absolute coordinate
/// differences as distances. The draw is not certified; see [`certify_planted`].
pub fn planted_stable_instance(k: usize, spec: &PlantedSpec, seed: u64) -> Result<PlantedInstance> {
    if k == 0 || spec.sizes.len() != k {
        return Err(Error::Parameter(format!("expected {k} cluster sizes, got {}", spec.sizes.len())));
    }
    if spec.sizes.contains(&0) {
        return Err(Error::Parameter("cluster sizes must be positive".into()));
    }
    if spec.target_alpha <= 1.0 || !spec.target_alpha.is_finite() {
        return Err(Error::Parameter(format!("target alpha must exceed 1, got {}", spec.target_alpha)));
    }
    let max_size = *spec.sizes.iter().max().expect("k >= 1");
    let gap = 4.0 * spec.target_alpha * max_size as f64 * k as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (i, &size) in spec.sizes.iter().enumerate() {
        for _ in 0..size {
            coords.push(i as f64 * gap + rng.gen_range(-0.5..0.5));
            labels.push(i);
        }
    }
    let n = coords.len();
    let mut instance = MetricInstance::from_fn(n, |a, b| (coords[a] - coords[b]).abs())?;
    if spec.unit_range && n > 1 {
        let scale = instance.max_distance();
        instance = MetricInstance::from_fn(n, |a, b| instance.d(a, b) / scale)?;
    }
    let instance = instance.validated(ValidationOptions::default().with_unit(spec.unit_range))?;
    let clusters = Clustering::new(labels, k)?;
    let centers = clusters.clusters().iter().map(|m| medoid(&instance, m)).collect::<Result<Vec<_>>>()?;
    let ground_truth = Clustering::with_centers(clusters.assignment().to_vec(), k, centers)?;
    Ok(PlantedInstance { instance, ground_truth, certified: None })
}

/// Certifies a planted draw at desk scale: the exact k-median optimum must be
/// unique, equal the planted partition, and have center stability at least
/// `target_alpha`. Returns the certificate, or `None` if the draw is rejected.
pub fn certify_planted(planted: &PlantedInstance, target_alpha: f64, budget: Budget) -> Result<Option<StabilityReport>> {
    let n = planted.instance.n();
    if n > CERTIFY_MAX_POINTS {
        return Err(Error::Parameter(format!(
            "certification is limited to n <= {CERTIFY_MAX_POINTS}; n = {n} stays uncertified"
        )));
    }
    let report = stability_profile_with(&planted.instance, planted.ground_truth.k(), Objective::KMedian, budget)?;
    let ok = report.unique_partition
        && report.clustering.same_partition(&planted.ground_truth)
        && report.alpha_center >= target_alpha;
    Ok(ok.then_some(report))
}

/// Draws with seeds `seed, seed + 1, ...` until one certifies, up to `attempts` draws.
pub fn planted_certified(k: usize, spec: &PlantedSpec, seed: u64, attempts: usize, budget: Budget) -> Result<PlantedInstance> {
    for a in 0..attempts as u64 {
        let mut p = planted_stable_instance(k, spec, seed.wrapping_add(a))?;
        if let Some(report) = certify_planted(&p, spec.target_alpha, budget)? {
            p.certified = Some(report);
            return Ok(p);
        }
    }
    Err(Error::Parameter(format!("no certified draw in {attempts} attempts")))
}
