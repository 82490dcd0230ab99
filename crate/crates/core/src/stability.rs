//! Stability measurement, structural checks and perturbation falsifiers.
//!
//! Stability parameters are reported as suprema: an instance whose report
//! says `alpha_center = a` is α-center stable for every α strictly below `a`,
//! since the defining inequalities are strict. Terms with a zero denominator
//! (a center measured against itself, a singleton cluster for min-sum)
//! contribute `+inf` to the minimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{
    minsum_cost, point_to_set_unchecked, set_to_set_unchecked, with_medoid_centers, Clustering, MetricInstance,
    Objective,
};
use crate::oracle::{brute_force_kmedian_with, brute_force_minsum_with, Budget, OptimumResult};
use crate::{par, COST_TOLERANCE};

/// Cluster size above which [`linkage_condition_check`] samples subsets instead of enumerating them.
pub const EXHAUSTIVE_SUBSET_LIMIT: usize = 12;

/// `(5 + √41) / 2`, the center-stability level that forces strict separation.
pub fn strict_separation_threshold() -> f64 {
    (5.0 + 41f64.sqrt()) / 2.0
}

/// The center-margin factor `α(α − 1)/(α + 1)`.
pub fn center_margin_factor(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return f64::INFINITY;
    }
    alpha * (alpha - 1.0) / (alpha + 1.0)
}

/// Stability parameters measured on one clustering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityMeasures {
    pub alpha_center: f64,
    pub alpha_minsum: f64,
    pub beta_center: Option<f64>,
    pub beta_minsum: Option<f64>,
    pub t: f64,
    pub strict_separation: bool,
}

/// Measures every stability parameter of `clustering`, which must carry centers.
///
/// Additive parameters are `None` unless every distance is at most 1.
pub fn measure_clustering(instance: &MetricInstance, clustering: &Clustering) -> Result<StabilityMeasures> {
    if instance.n() != clustering.n() {
        return Err(Error::InvalidClustering("clustering and instance sizes differ".into()));
    }
    let centers = clustering.centers().ok_or(Error::MissingCenters)?;
    let clusters = clustering.clusters();
    let k = clustering.k();

    let mut alpha_center = f64::INFINITY;
    let mut alpha_minsum = f64::INFINITY;
    let mut beta_center = f64::INFINITY;
    let mut beta_minsum = f64::INFINITY;
    for p in 0..instance.n() {
        let i = clustering.label(p);
        let own_center = instance.d(p, centers[i]);
        let own_sum = point_to_set_unchecked(instance, p, &clusters[i]);
        let own_size = clusters[i].len();
        for j in (0..k).filter(|&j| j != i) {
            let rival_center = instance.d(p, centers[j]);
            if p != centers[i] && own_center > 0.0 {
                alpha_center = alpha_center.min(rival_center / own_center);
            }
            beta_center = beta_center.min(rival_center - own_center);

            let rival_sum = point_to_set_unchecked(instance, p, &clusters[j]);
            if own_sum > 0.0 {
                alpha_minsum = alpha_minsum.min(rival_sum / own_sum);
            }
            if own_size > 1 {
                beta_minsum = beta_minsum.min((rival_sum - own_sum) / (own_size - 1) as f64);
            }
        }
    }
    let unit = instance.max_distance() <= 1.0;
    let sizes = clustering.sizes();
    let max = *sizes.iter().max().expect("k >= 1") as f64;
    let min = *sizes.iter().min().expect("k >= 1");
    let t = if min <= 1 { f64::INFINITY } else { max / (min - 1) as f64 };
    Ok(StabilityMeasures {
        alpha_center,
        alpha_minsum,
        beta_center: unit.then(|| beta_center.clamp(0.0, 1.0)),
        beta_minsum: unit.then(|| beta_minsum.clamp(0.0, 1.0)),
        t,
        strict_separation: strict_separation_check(instance, clustering)?.holds,
    })
}

/// Certified stability profile of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ReportJson", try_from = "ReportJson")]
pub struct StabilityReport {
    pub alpha_center: f64,
    pub alpha_minsum: f64,
    pub beta_center: Option<f64>,
    pub beta_minsum: Option<f64>,
    pub t: f64,
    pub strict_separation: bool,
    /// False when the optimum is not unique; the values then describe the
    /// first optimum found and are not a certificate.
    pub unique_partition: bool,
    /// The certified optimum, with centers (medoids for the min-sum objective).
    pub clustering: Clustering,
}

impl StabilityReport {
    pub fn from_measures(m: StabilityMeasures, unique_partition: bool, clustering: Clustering) -> Self {
        Self {
            alpha_center: m.alpha_center,
            alpha_minsum: m.alpha_minsum,
            beta_center: m.beta_center,
            beta_minsum: m.beta_minsum,
            t: m.t,
            strict_separation: m.strict_separation,
            unique_partition,
            clustering,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Number that may be infinite, written as `"inf"` in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite(InfTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::Infinite(InfTag::Inf)
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl From<ExtendedReal> for f64 {
    fn from(v: ExtendedReal) -> Self {
        match v {
            ExtendedReal::Finite(x) => x,
            ExtendedReal::Infinite(_) => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ReportJson {
    alpha_center: ExtendedReal,
    alpha_minsum: ExtendedReal,
    beta_center: Option<f64>,
    beta_minsum: Option<f64>,
    t: ExtendedReal,
    strict_separation: bool,
    unique_partition: bool,
    assignment: Vec<usize>,
    centers: Vec<usize>,
}

impl From<StabilityReport> for ReportJson {
    fn from(r: StabilityReport) -> Self {
        Self {
            alpha_center: r.alpha_center.into(),
            alpha_minsum: r.alpha_minsum.into(),
            beta_center: r.beta_center,
            beta_minsum: r.beta_minsum,
            t: r.t.into(),
            strict_separation: r.strict_separation,
            unique_partition: r.unique_partition,
            centers: r.clustering.centers().map(<[usize]>::to_vec).unwrap_or_default(),
            assignment: r.clustering.assignment().to_vec(),
        }
    }
}

impl TryFrom<ReportJson> for StabilityReport {
    type Error = Error;

    fn try_from(j: ReportJson) -> Result<Self> {
        let k = j.centers.len();
        Ok(Self {
            alpha_center: j.alpha_center.into(),
            alpha_minsum: j.alpha_minsum.into(),
            beta_center: j.beta_center,
            beta_minsum: j.beta_minsum,
            t: j.t.into(),
            strict_separation: j.strict_separation,
            unique_partition: j.unique_partition,
            clustering: Clustering::with_centers(j.assignment, k, j.centers)?,
        })
    }
}

/// Exact optimum for the chosen objective.
pub fn solve_exact(instance: &MetricInstance, k: usize, objective: Objective, budget: Budget) -> Result<OptimumResult> {
    match objective {
        Objective::KMedian => brute_force_kmedian_with(instance, k, budget),
        Objective::MinSum => brute_force_minsum_with(instance, k, budget),
    }
}

pub fn stability_profile(instance: &MetricInstance, k: usize, objective: Objective) -> Result<StabilityReport> {
    stability_profile_with(instance, k, objective, Budget::default())
}

/// Computes the exact optimum for `objective` and measures its stability.
pub fn stability_profile_with(
    instance: &MetricInstance,
    k: usize,
    objective: Objective,
    budget: Budget,
) -> Result<StabilityReport> {
    let opt = solve_exact(instance, k, objective, budget)?;
    let clustering = match objective {
        Objective::KMedian => opt.clustering,
        Objective::MinSum => with_medoid_centers(instance, &opt.clustering)?,
    };
    let m = measure_clustering(instance, &clustering)?;
    Ok(StabilityReport::from_measures(m, opt.unique_partition, clustering))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationCheck {
    pub holds: bool,
    /// First `(p, p', q)` in lexicographic order with `d(p, q) <= d(p, p')`.
    pub witness: Option<(usize, usize, usize)>,
}

/// Checks `d(p, q) > d(p, p')` for all co-clustered `p, p'` and every `q` outside their cluster.
pub fn strict_separation_check(instance: &MetricInstance, clustering: &Clustering) -> Result<SeparationCheck> {
    if instance.n() != clustering.n() {
        return Err(Error::InvalidClustering("clustering and instance sizes differ".into()));
    }
    let n = instance.n();
    for p in 0..n {
        let row = instance.row(p);
        let label = clustering.label(p);
        let nearest_cross = (0..n)
            .filter(|&q| clustering.label(q) != label)
            .map(|q| row[q])
            .fold(f64::INFINITY, f64::min);
        let Some(pp) = (0..n).find(|&pp| pp != p && clustering.label(pp) == label && row[pp] >= nearest_cross) else {
            continue;
        };
        let q = (0..n)
            .find(|&q| clustering.label(q) != label && row[q] <= row[pp])
            .expect("a cross point attains the nearest cross distance");
        return Ok(SeparationCheck { holds: false, witness: Some((p, pp, q)) });
    }
    Ok(SeparationCheck { holds: true, witness: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginViolation {
    pub cluster: usize,
    pub p: usize,
    pub p_prime: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginCheck {
    pub holds: bool,
    pub witness: Option<MarginViolation>,
}

/// Checks `d(c_i, p') > α(α−1)/(α+1) · d(c_i, p)` for every `p ∈ C_i`, `p' ∈ C_j`, `j ≠ i`.
pub fn lemma3_margin_check(instance: &MetricInstance, clustering: &Clustering, alpha: f64) -> Result<MarginCheck> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::Parameter(format!("alpha must exceed 1, got {alpha}")));
    }
    if instance.n() != clustering.n() {
        return Err(Error::InvalidClustering("clustering and instance sizes differ".into()));
    }
    let centers = clustering.centers().ok_or(Error::MissingCenters)?;
    let factor = center_margin_factor(alpha);
    let clusters = clustering.clusters();
    for (i, members) in clusters.iter().enumerate() {
        let row = instance.row(centers[i]);
        for &p in members {
            let bound = if row[p] == 0.0 { 0.0 } else { factor * row[p] };
            let offender = (0..instance.n()).find(|&q| clustering.label(q) != i && row[q] <= bound);
            if let Some(p_prime) = offender {
                return Ok(MarginCheck { holds: false, witness: Some(MarginViolation { cluster: i, p, p_prime }) });
            }
        }
    }
    Ok(MarginCheck { holds: true, witness: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageViolation {
    /// The subset `A` of the cluster.
    pub subset: Vec<usize>,
    pub cluster: usize,
    pub rival: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageCheck {
    pub holds: bool,
    pub witness: Option<LinkageViolation>,
    pub subsets_checked: u64,
    /// False when some cluster was too large and subsets were sampled.
    pub exhaustive: bool,
}

#[derive(Clone, Copy)]
enum SubsetScope {
    Auto { budget: usize, seed: u64 },
    Singletons,
}

/// Checks `α · d(A, C \ A) < d(A, C')` for every ordered pair of distinct
/// clusters `(C, C')` and every non-empty proper subset `A ⊂ C`.
///
/// Subsets are enumerated exhaustively for clusters of at most
/// [`EXHAUSTIVE_SUBSET_LIMIT`] points; larger clusters get `subset_budget`
/// random subsets drawn from a generator seeded with `seed`.
pub fn linkage_condition_check(
    instance: &MetricInstance,
    clustering: &Clustering,
    alpha: f64,
    subset_budget: usize,
    seed: u64,
) -> Result<LinkageCheck> {
    linkage_check_impl(instance, clustering, alpha, SubsetScope::Auto { budget: subset_budget, seed })
}

/// [`linkage_condition_check`] restricted to single-point subsets.
pub fn linkage_condition_check_singletons(
    instance: &MetricInstance,
    clustering: &Clustering,
    alpha: f64,
) -> Result<LinkageCheck> {
    linkage_check_impl(instance, clustering, alpha, SubsetScope::Singletons)
}

fn linkage_check_impl(
    instance: &MetricInstance,
    clustering: &Clustering,
    alpha: f64,
    scope: SubsetScope,
) -> Result<LinkageCheck> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    if instance.n() != clustering.n() {
        return Err(Error::InvalidClustering("clustering and instance sizes differ".into()));
    }
    let clusters = clustering.clusters();
    let mut checked = 0u64;
    let mut exhaustive = true;
    for (ci, members) in clusters.iter().enumerate() {
        let size = members.len();
        if size < 2 {
            continue;
        }
        // to_rival[r][x] = d(members[x], C_r)
        let to_rival: Vec<Vec<f64>> = clusters
            .iter()
            .map(|other| members.iter().map(|&p| point_to_set_unchecked(instance, p, other)).collect())
            .collect();
        let subsets: Box<dyn Iterator<Item = Vec<usize>>> = match scope {
            SubsetScope::Singletons => Box::new((0..size).map(|x| vec![x])),
            SubsetScope::Auto { .. } if size <= EXHAUSTIVE_SUBSET_LIMIT => Box::new(
                (1u64..(1u64 << size) - 1).map(move |mask| (0..size).filter(|&x| mask >> x & 1 == 1).collect()),
            ),
            SubsetScope::Auto { budget, seed } => {
                exhaustive = false;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(ci as u64);
                Box::new((0..budget).map(move |_| loop {
                    let pick: Vec<usize> = (0..size).filter(|_| rng.gen_bool(0.5)).collect();
                    if !pick.is_empty() && pick.len() < size {
                        break pick;
                    }
                }))
            }
        };
        for subset in subsets {
            checked += 1;
            let mut inside = vec![false; size];
            for &x in &subset {
                inside[x] = true;
            }
            let complement: Vec<usize> = (0..size).filter(|&x| !inside[x]).map(|x| members[x]).collect();
            let a: Vec<usize> = subset.iter().map(|&x| members[x]).collect();
            let within = alpha * set_to_set_unchecked(instance, &a, &complement);
            for (ri, rival) in to_rival.iter().enumerate() {
                if ri == ci {
                    continue;
                }
                let cross: f64 = subset.iter().map(|&x| rival[x]).sum();
                if within >= cross {
                    return Ok(LinkageCheck {
                        holds: false,
                        witness: Some(LinkageViolation { subset: a, cluster: ci, rival: ri }),
                        subsets_checked: checked,
                        exhaustive,
                    });
                }
            }
        }
    }
    Ok(LinkageCheck { holds: true, witness: None, subsets_checked: checked, exhaustive })
}

/// Multiplicative band `[d, α·d]` or additive band `[d, d + β]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum PerturbationMode {
    Multiplicative(f64),
    Additive(f64),
}

impl PerturbationMode {
    fn check(self, instance: &MetricInstance) -> Result<()> {
        match self {
            PerturbationMode::Multiplicative(a) if a.is_finite() && a > 1.0 => Ok(()),
            PerturbationMode::Multiplicative(a) => Err(Error::Parameter(format!("alpha must exceed 1, got {a}"))),
            PerturbationMode::Additive(b) if b > 0.0 && b <= 1.0 => {
                if instance.max_distance() > 1.0 {
                    Err(Error::NotUnitRange)
                } else {
                    Ok(())
                }
            }
            PerturbationMode::Additive(b) => Err(Error::Parameter(format!("beta must lie in (0, 1], got {b}"))),
        }
    }

    fn identity(self) -> f64 {
        match self {
            PerturbationMode::Multiplicative(_) => 1.0,
            PerturbationMode::Additive(_) => 0.0,
        }
    }

    fn apply(self, d: f64, scale: f64) -> f64 {
        match self {
            PerturbationMode::Multiplicative(_) => d * scale,
            PerturbationMode::Additive(_) => d + scale,
        }
    }

    fn extreme(self, d: f64) -> f64 {
        match self {
            PerturbationMode::Multiplicative(a) => d * a,
            PerturbationMode::Additive(b) => d + b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FalsificationReason {
    OptimumChanged,
    OptimumNotUnique,
}

/// A perturbed distance function under which the original optimum is lost.
#[derive(Clone, Debug, PartialEq)]
pub struct FalsificationWitness {
    pub perturbed: MetricInstance,
    pub mode: PerturbationMode,
    /// Multiplier or offset per unordered pair `(i, j)`, `i < j`, in lexicographic order.
    pub pair_scales: Vec<f64>,
    pub original_optimum: Clustering,
    pub perturbed_optimum: Clustering,
    pub reason: FalsificationReason,
    /// Sample that produced the witness; `None` for the unperturbed instance or a targeted construction.
    pub sample: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FalsificationOutcome {
    Falsified(Box<FalsificationWitness>),
    NoCounterexampleFound { samples: usize },
}

impl FalsificationOutcome {
    pub fn witness(&self) -> Option<&FalsificationWitness> {
        match self {
            FalsificationOutcome::Falsified(w) => Some(w),
            FalsificationOutcome::NoCounterexampleFound { .. } => None,
        }
    }
}

fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

fn perturb(instance: &MetricInstance, mode: PerturbationMode, scales: &[f64]) -> Result<MetricInstance> {
    let n = instance.n();
    MetricInstance::from_fn(n, |i, j| {
        // index of (i, j) in the lexicographic list of pairs
        let idx = i * (2 * n - i - 1) / 2 + (j - i - 1);
        mode.apply(instance.d(i, j), scales[idx])
    })
}

pub fn resilience_falsifier(
    instance: &MetricInstance,
    k: usize,
    objective: Objective,
    mode: PerturbationMode,
    samples: usize,
    seed: u64,
) -> Result<FalsificationOutcome> {
    resilience_falsifier_with(instance, k, objective, mode, samples, seed, Budget::default())
}

/// Samples symmetric perturbations with independent per-pair scales drawn
/// uniformly from the band and re-solves each exactly. The perturbed
/// functions need not satisfy the triangle inequality. Sample `i` uses
/// stream `i` of a ChaCha generator seeded with `seed`, and the lowest
/// failing sample is reported, so results do not depend on scheduling.
pub fn resilience_falsifier_with(
    instance: &MetricInstance,
    k: usize,
    objective: Objective,
    mode: PerturbationMode,
    samples: usize,
    seed: u64,
    budget: Budget,
) -> Result<FalsificationOutcome> {
    mode.check(instance)?;
    let original = solve_exact(instance, k, objective, budget)?;
    let pairs = pair_count(instance.n());
    if !original.unique_partition {
        return Ok(FalsificationOutcome::Falsified(Box::new(FalsificationWitness {
            perturbed: instance.clone(),
            mode,
            pair_scales: vec![mode.identity(); pairs],
            original_optimum: original.clustering.clone(),
            perturbed_optimum: original.clustering,
            reason: FalsificationReason::OptimumNotUnique,
            sample: None,
        })));
    }
    let hit = par::find_map_first(samples, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let scales: Vec<f64> = (0..pairs)
            .map(|_| match mode {
                PerturbationMode::Multiplicative(a) => rng.gen_range(1.0..=a),
                PerturbationMode::Additive(b) => rng.gen_range(0.0..=b),
            })
            .collect();
        let outcome = perturb(instance, mode, &scales).and_then(|perturbed| {
            let opt = solve_exact(&perturbed, k, objective, budget)?;
            let reason = if !opt.unique_partition {
                FalsificationReason::OptimumNotUnique
            } else if !opt.clustering.same_partition(&original.clustering) {
                FalsificationReason::OptimumChanged
            } else {
                return Ok(None);
            };
            Ok(Some(FalsificationWitness {
                perturbed,
                mode,
                pair_scales: scales,
                original_optimum: original.clustering.clone(),
                perturbed_optimum: opt.clustering,
                reason,
                sample: Some(s),
            }))
        });
        outcome.transpose()
    });
    match hit {
        Some(Ok(w)) => Ok(FalsificationOutcome::Falsified(Box::new(w))),
        Some(Err(e)) => Err(e),
        None => Ok(FalsificationOutcome::NoCounterexampleFound { samples }),
    }
}

/// Independently re-checks a witness: the perturbation must stay inside its
/// band (up to [`COST_TOLERANCE`]), and a fresh exact solve of the perturbed
/// instance must show the original partition is no longer the unique optimum.
pub fn revalidate_witness(
    instance: &MetricInstance,
    k: usize,
    objective: Objective,
    witness: &FalsificationWitness,
    budget: Budget,
) -> Result<bool> {
    let n = instance.n();
    if witness.perturbed.n() != n {
        return Ok(false);
    }
    for i in 0..n {
        if witness.perturbed.d(i, i) != 0.0 {
            return Ok(false);
        }
        for j in i + 1..n {
            let (d, dp) = (instance.d(i, j), witness.perturbed.d(i, j));
            if dp != witness.perturbed.d(j, i) {
                return Ok(false);
            }
            if dp < d - COST_TOLERANCE || dp > witness.mode.extreme(d) + COST_TOLERANCE {
                return Ok(false);
            }
        }
    }
    let fresh = solve_exact(&witness.perturbed, k, objective, budget)?;
    Ok(!fresh.unique_partition || !fresh.clustering.same_partition(&witness.original_optimum))
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetedOutcome {
    Falsified(Box<FalsificationWitness>),
    StabilityConfirmed,
}

/// Single-point construction against min-sum stability: distances from `p`
/// to the rest of its cluster `donor` are scaled by α (or raised by β), all
/// other distances are kept, and the clustering that moves `p` into
/// `receiver` is compared against the certified optimum under the perturbed
/// distances. A witness is returned iff the move is at least as cheap.
pub fn targeted_minsum_perturbation(
    instance: &MetricInstance,
    k: usize,
    mode: PerturbationMode,
    p: usize,
    donor: usize,
    receiver: usize,
) -> Result<TargetedOutcome> {
    targeted_minsum_perturbation_with(instance, k, mode, p, donor, receiver, Budget::default())
}

#[allow(clippy::too_many_arguments)]
pub fn targeted_minsum_perturbation_with(
    instance: &MetricInstance,
    k: usize,
    mode: PerturbationMode,
    p: usize,
    donor: usize,
    receiver: usize,
    budget: Budget,
) -> Result<TargetedOutcome> {
    mode.check(instance)?;
    instance.check_index(p)?;
    let opt = brute_force_minsum_with(instance, k, budget)?;
    targeted_against(instance, &opt.clustering, mode, p, donor, receiver)
}

/// As [`targeted_minsum_perturbation`], against a supplied optimum.
pub fn targeted_against(
    instance: &MetricInstance,
    optimum: &Clustering,
    mode: PerturbationMode,
    p: usize,
    donor: usize,
    receiver: usize,
) -> Result<TargetedOutcome> {
    mode.check(instance)?;
    instance.check_index(p)?;
    let k = optimum.k();
    if donor >= k || receiver >= k || donor == receiver {
        return Err(Error::Parameter(format!("donor {donor} and receiver {receiver} must be distinct clusters < {k}")));
    }
    if optimum.label(p) != donor {
        return Err(Error::NotInCluster { point: p, cluster: donor });
    }
    let members = &optimum.clusters()[donor];
    if members.len() < 2 {
        // removing p would empty its cluster
        return Ok(TargetedOutcome::StabilityConfirmed);
    }
    let n = instance.n();
    let mut scales = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            let touched = (i == p && optimum.label(j) == donor) || (j == p && optimum.label(i) == donor);
            scales.push(match (touched, mode) {
                (false, _) => mode.identity(),
                (true, PerturbationMode::Multiplicative(a)) => a,
                (true, PerturbationMode::Additive(b)) => b,
            });
        }
    }
    let perturbed = perturb(instance, mode, &scales)?;
    let mut moved = optimum.assignment().to_vec();
    moved[p] = receiver;
    let moved = Clustering::new(moved, k)?;
    let keep = minsum_cost(&perturbed, &optimum.without_centers())?.value;
    let shift = minsum_cost(&perturbed, &moved)?.value;
    let reason = if shift < keep - COST_TOLERANCE {
        FalsificationReason::OptimumChanged
    } else if shift <= keep + COST_TOLERANCE {
        FalsificationReason::OptimumNotUnique
    } else {
        return Ok(TargetedOutcome::StabilityConfirmed);
    };
    Ok(TargetedOutcome::Falsified(Box::new(FalsificationWitness {
        perturbed,
        mode,
        pair_scales: scales,
        original_optimum: optimum.without_centers(),
        perturbed_optimum: moved,
        reason,
        sample: None,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::fixtures::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn four_point_profile() {
        let r = stability_profile(&four_point(), 2, Objective::KMedian).unwrap();
        assert_close(r.alpha_center, 10.0);
        assert_close(r.beta_center.unwrap(), 0.9);
        assert_close(r.alpha_minsum, 20.0);
        assert_eq!(r.beta_minsum, Some(1.0));
        assert_eq!(r.t, 2.0);
        assert!(r.strict_separation);
        assert!(r.unique_partition);
    }

    #[test]
    fn single_cluster_is_infinitely_stable() {
        let r = stability_profile(&four_point(), 1, Objective::KMedian).unwrap();
        assert_eq!(r.alpha_center, f64::INFINITY);
        assert_eq!(r.alpha_minsum, f64::INFINITY);
        assert_eq!(r.beta_center, Some(1.0));
    }

    #[test]
    fn additive_values_need_unit_range() {
        let big = MetricInstance::from_fn(4, |i, j| if i / 2 == j / 2 { 1.0 } else { 10.0 }).unwrap();
        let r = stability_profile(&big, 2, Objective::KMedian).unwrap();
        assert_eq!(r.beta_center, None);
        assert_eq!(r.beta_minsum, None);
        assert_close(r.alpha_center, 10.0);
    }

    #[test]
    fn report_json_uses_inf_strings() {
        let r = stability_profile(&four_point(), 1, Objective::MinSum).unwrap();
        let text = r.to_json().unwrap();
        assert!(text.contains(r#""alpha_center":"inf""#), "{text}");
        assert!(text.contains(r#""centers":[0]"#), "{text}");
        let back: StabilityReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn strict_separation_examples() {
        let c = Clustering::new(vec![0, 0, 1, 1], 2).unwrap();
        assert!(strict_separation_check(&four_point(), &c).unwrap().holds);
        let c = Clustering::new(vec![0, 0, 1], 2).unwrap();
        let s = strict_separation_check(&constant(3, 0.5), &c).unwrap();
        assert_eq!(s.witness, Some((0, 1, 2)));
        let one = Clustering::new(vec![0, 0, 0], 1).unwrap();
        assert!(strict_separation_check(&constant(3, 0.5), &one).unwrap().holds);
    }

    #[test]
    fn margin_factor_at_separation_threshold_is_four() {
        assert!((center_margin_factor(strict_separation_threshold()) - 4.0).abs() < 1e-12);
        assert_close(center_margin_factor(2.0), 2.0 / 3.0);
        assert_close(center_margin_factor(10.0), 90.0 / 11.0);
    }

    #[test]
    fn lemma3_boundary_on_four_point() {
        let inst = four_point();
        let c = Clustering::with_centers(vec![0, 0, 1, 1], 2, vec![0, 2]).unwrap();
        assert!(lemma3_margin_check(&inst, &c, 2.0).unwrap().holds);
        assert!(lemma3_margin_check(&inst, &c, 10.0).unwrap().holds);
        // factor reaches 10 at α = (11 + √161)/2, where 1.0 > factor · 0.1 first fails
        let edge = (11.0 + 161f64.sqrt()) / 2.0;
        assert!(lemma3_margin_check(&inst, &c, edge - 1e-6).unwrap().holds);
        let fail = lemma3_margin_check(&inst, &c, edge + 1e-6).unwrap();
        assert_eq!(fail.witness, Some(MarginViolation { cluster: 0, p: 1, p_prime: 2 }));
        assert!(lemma3_margin_check(&inst, &c, 1.0).is_err());
    }

    #[test]
    fn linkage_examples() {
        let c = Clustering::new(vec![0, 0, 1, 1], 2).unwrap();
        let r = linkage_condition_check(&four_point(), &c, 2.0, 0, 0).unwrap();
        assert!(r.holds);
        assert!(r.exhaustive);
        assert_eq!(r.subsets_checked, 4);

        let c = Clustering::new(vec![0, 0, 1], 2).unwrap();
        let r = linkage_condition_check(&constant(3, 0.5), &c, 2.0, 0, 0).unwrap();
        assert_eq!(r.witness, Some(LinkageViolation { subset: vec![0], cluster: 0, rival: 1 }));
        assert!(linkage_condition_check(&constant(3, 0.5), &c, 0.0, 0, 0).is_err());
    }

    #[test]
    fn linkage_samples_large_clusters() {
        let inst = MetricInstance::from_fn(28, |i, j| if (i < 14) == (j < 14) { 0.01 } else { 1.0 }).unwrap();
        let c = Clustering::new((0..28).map(|i| usize::from(i >= 14)).collect(), 2).unwrap();
        let r = linkage_condition_check(&inst, &c, 2.0, 50, 3).unwrap();
        assert!(r.holds);
        assert!(!r.exhaustive);
        assert_eq!(r.subsets_checked, 100);
        assert_eq!(r, linkage_condition_check(&inst, &c, 2.0, 50, 3).unwrap());
    }

    #[test]
    fn falsifier_detects_symmetric_ties() {
        let out = resilience_falsifier(&constant(3, 1.0), 2, Objective::KMedian, PerturbationMode::Multiplicative(1.5), 10, 0)
            .unwrap();
        let w = out.witness().unwrap();
        assert_eq!(w.reason, FalsificationReason::OptimumNotUnique);
        assert_eq!(w.sample, None);
    }

    #[test]
    fn falsifier_survives_below_alpha() {
        let out = resilience_falsifier(&four_point(), 2, Objective::KMedian, PerturbationMode::Multiplicative(1.5), 1000, 1)
            .unwrap();
        assert_eq!(out, FalsificationOutcome::NoCounterexampleFound { samples: 1000 });
    }

    #[test]
    fn falsifier_breaks_at_large_alpha_and_revalidates() {
        let inst = four_point();
        let out = resilience_falsifier(&inst, 2, Objective::KMedian, PerturbationMode::Multiplicative(30.0), 1000, 7)
            .unwrap();
        let w = out.witness().expect("alpha = 30 exceeds the center stability of 10");
        assert!(revalidate_witness(&inst, 2, Objective::KMedian, w, Budget::default()).unwrap());
        let same = resilience_falsifier(&inst, 2, Objective::KMedian, PerturbationMode::Multiplicative(30.0), 1000, 7)
            .unwrap();
        assert_eq!(out, same);
        let seq = par::sequential(|| {
            resilience_falsifier(&inst, 2, Objective::KMedian, PerturbationMode::Multiplicative(30.0), 1000, 7).unwrap()
        });
        assert_eq!(out, seq);
    }

    #[test]
    fn falsifier_parameter_checks() {
        let inst = four_point();
        let m = |mode| resilience_falsifier(&inst, 2, Objective::MinSum, mode, 1, 0);
        assert!(m(PerturbationMode::Multiplicative(1.0)).is_err());
        assert!(m(PerturbationMode::Additive(0.0)).is_err());
        assert!(m(PerturbationMode::Additive(1.5)).is_err());
        let big = MetricInstance::from_fn(3, |_, _| 2.0).unwrap();
        assert!(matches!(
            resilience_falsifier(&big, 2, Objective::MinSum, PerturbationMode::Additive(0.5), 1, 0),
            Err(Error::NotUnitRange)
        ));
    }

    #[test]
    fn additive_falsifier_runs() {
        let out = resilience_falsifier(&four_point(), 2, Objective::MinSum, PerturbationMode::Additive(0.5), 200, 2)
            .unwrap();
        assert_eq!(out, FalsificationOutcome::NoCounterexampleFound { samples: 200 });
    }

    #[test]
    fn targeted_confirms_stable_fixture() {
        let inst = four_point();
        for (p, donor) in [(0, 0), (1, 0), (2, 1), (3, 1)] {
            let receiver = 1 - donor;
            for mode in [PerturbationMode::Multiplicative(2.0), PerturbationMode::Additive(1.0)] {
                let out = targeted_minsum_perturbation(&inst, 2, mode, p, donor, receiver).unwrap();
                assert_eq!(out, TargetedOutcome::StabilityConfirmed);
            }
        }
        assert!(matches!(
            targeted_minsum_perturbation(&inst, 2, PerturbationMode::Multiplicative(2.0), 0, 1, 0),
            Err(Error::NotInCluster { .. })
        ));
    }

    #[test]
    fn targeted_realizes_construction_when_unstable() {
        // alpha_minsum = 20; scaling above it makes moving p cheaper
        let inst = four_point();
        let out = targeted_minsum_perturbation(&inst, 2, PerturbationMode::Multiplicative(25.0), 1, 0, 1).unwrap();
        let TargetedOutcome::Falsified(w) = out else { panic!("expected witness") };
        assert_eq!(w.reason, FalsificationReason::OptimumChanged);
        assert_eq!(w.perturbed.d(0, 1), 0.1 * 25.0);
        assert_eq!(w.perturbed.d(2, 3), 0.1);
        assert!(revalidate_witness(&inst, 2, Objective::MinSum, &w, Budget::default()).unwrap());
        // exactly at the boundary the two clusterings tie
        let out = targeted_minsum_perturbation(&inst, 2, PerturbationMode::Multiplicative(20.0), 1, 0, 1).unwrap();
        let TargetedOutcome::Falsified(w) = out else { panic!("expected tie witness") };
        assert_eq!(w.reason, FalsificationReason::OptimumNotUnique);
    }

    #[test]
    fn singleton_linkage_matches_alpha_minsum() {
        let inst = MetricInstance::from_fn(6, |i, j| ((i * 5 + j * 11) % 7) as f64 / 10.0 + 0.2).unwrap();
        let r = stability_profile(&inst, 2, Objective::MinSum).unwrap();
        for alpha in [0.1, 0.5, 0.9, 1.1, 2.0] {
            let check = linkage_condition_check_singletons(&inst, &r.clustering, alpha).unwrap();
            assert_eq!(check.holds, alpha < r.alpha_minsum, "alpha {alpha}, alpha_minsum {}", r.alpha_minsum);
        }
    }
}
