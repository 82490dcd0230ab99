//! `stable-cluster`: generate, certify, solve and stream stability-constrained clustering instances.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stable_cluster::linkage::{average_linkage_tree, best_k_pruning_for};
use stable_cluster::metric::InstanceFile;
use stable_cluster::oracle::{min_dominating_set, triangle_partition_decide};
use stable_cluster::reductions::{
    certify_planted, make_kmedian_hardness_instance, make_minsum_hardness_instance, planted_stable_instance,
    threedm_to_kmedian, PlantedSpec, ThreeDmInstance, CERTIFY_MAX_POINTS,
};
use stable_cluster::stability::{
    center_margin_factor, lemma3_margin_check, linkage_condition_check, resilience_falsifier_with, revalidate_witness,
    solve_exact, stability_profile_with, strict_separation_check, FalsificationOutcome, PerturbationMode,
};
use stable_cluster::stream::{induce_partition, load_order, stream_kmedian, StreamOrder};
use stable_cluster::{Budget, Clustering, Graph, MetricInstance, Objective, ValidationOptions};

use report::{emit, render, sidecar_path, Format, Io, RunReport};

#[derive(Parser, Debug)]
#[command(name = "stable-cluster", version, about = "Stability-constrained clustering toolkit")]
struct Cli {
    /// Output format for the run report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for parallel loops (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file. For `gen` this is the instance path; otherwise the report path.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Solve an instance.
    Solve {
        objective: ObjectiveArg,
        #[command(flatten)]
        common: KArgs,
        /// Exhaustive optimum (default).
        #[arg(long, conflicts_with = "linkage")]
        exact: bool,
        /// Average-linkage tree with optimal pruning.
        #[arg(long)]
        linkage: bool,
    },
    /// Replay the one-pass streaming algorithm.
    Stream {
        objective: StreamObjective,
        #[command(flatten)]
        common: KArgs,
        #[arg(long, value_enum, default_value_t = OrderArg::Given)]
        order: OrderArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Explicit arrival order, one index per line; overrides `--order`.
        #[arg(long)]
        order_file: Option<PathBuf>,
    },
    /// Certify or falsify stability properties.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Exact graph oracles.
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Subcommand, Debug)]
enum GenCmd {
    /// Dominating-set reduction to k-median with k = d.
    ReduceDomset {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// Triangle-partition reduction to min-sum with k = n/3.
    ReduceTrianglepart {
        #[arg(long)]
        graph: PathBuf,
    },
    /// 3DM instance through the perfect-dominating-set graph to k-median.
    #[command(name = "from-3dm")]
    From3dm {
        #[arg(long)]
        input: PathBuf,
    },
    /// Planted center-stable instance.
    Planted {
        #[arg(long)]
        k: usize,
        /// Comma-separated cluster sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rescale distances into [0, 1].
        #[arg(long)]
        unit: bool,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Exact stability profile of the optimum.
    Stability {
        #[command(flatten)]
        common: KArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Kmedian)]
        objective: ObjectiveArg,
    },
    /// Random perturbation search for a change of optimum.
    Falsify {
        #[command(flatten)]
        common: KArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Kmedian)]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Multiplicative)]
        mode: ModeArg,
        /// alpha for multiplicative mode, beta for additive mode.
        #[arg(long)]
        value: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Strict separation of the exact k-median optimum (or the ground truth).
    StrictSep {
        #[command(flatten)]
        common: KArgs,
        #[arg(long)]
        ground_truth: bool,
    },
    /// Center margin inequality at a given (default: certified) alpha.
    Lemma3 {
        #[command(flatten)]
        common: KArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Subset linkage condition on the min-sum optimum (default alpha: 3t).
    LinkageCond {
        #[command(flatten)]
        common: KArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        subset_budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Minimum dominating set.
    Domset {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Triangle partition decision.
    TrianglePartition {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Args, Debug)]
struct KArgs {
    #[arg(long)]
    k: usize,
    /// Instance JSON file.
    instance: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Kmedian,
    Minsum,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Kmedian => Objective::KMedian,
            ObjectiveArg::Minsum => Objective::MinSum,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StreamObjective {
    Kmedian,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    Given,
    Random,
    Reverse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Multiplicative,
    Additive,
}

enum Failure {
    Usage(String),
    Domain(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<stable_cluster::Error> for Failure {
    fn from(e: stable_cluster::Error) -> Self {
        Failure::Domain(e.into())
    }
}

type CmdResult = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let mut io = Io::default();
    let name = command_name(&cli.command);
    let result = dispatch(&cli, &mut io);
    let (summary, code) = match result {
        Ok(v) => (v, 0),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            (json!({ "error": format!("{e:#}") }), 1)
        }
    };
    let report = RunReport { command: name, inputs: io.inputs, outputs: io.outputs, summary, exit_code: code };
    let target = if matches!(cli.command, Command::Gen(_)) { None } else { cli.output.as_deref() };
    let written = render(&report, cli.format).and_then(|text| emit(&text, target));
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Gen(g) => format!(
            "gen {}",
            match g {
                GenCmd::ReduceDomset { .. } => "reduce-domset",
                GenCmd::ReduceTrianglepart { .. } => "reduce-trianglepart",
                GenCmd::From3dm { .. } => "from-3dm",
                GenCmd::Planted { .. } => "planted",
            }
        ),
        Command::Solve { objective, .. } => format!("solve {}", Objective::from(*objective)),
        Command::Stream { .. } => "stream kmedian".into(),
        Command::Verify(v) => format!(
            "verify {}",
            match v {
                VerifyCmd::Stability { .. } => "stability",
                VerifyCmd::Falsify { .. } => "falsify",
                VerifyCmd::StrictSep { .. } => "strict-sep",
                VerifyCmd::Lemma3 { .. } => "lemma3",
                VerifyCmd::LinkageCond { .. } => "linkage-cond",
            }
        ),
        Command::Oracle(OracleCmd::Domset { .. }) => "oracle domset".into(),
        Command::Oracle(OracleCmd::TrianglePartition { .. }) => "oracle triangle-partition".into(),
    }
}

fn dispatch(cli: &Cli, io: &mut Io) -> CmdResult {
    let budget = Budget::from_env();
    match &cli.command {
        Command::Gen(g) => {
            let out = cli.output.as_deref().ok_or_else(|| Failure::Usage("gen requires -o <instance.json>".into()))?;
            gen(g, out, io, budget)
        }
        Command::Solve { objective, common, linkage, .. } => {
            let (inst, _) = load_instance(io, &common.instance)?;
            solve(&inst, common.k, (*objective).into(), *linkage, budget)
        }
        Command::Stream { common, order, seed, order_file, .. } => {
            let (inst, gt) = load_instance(io, &common.instance)?;
            let (order, kind) = match order_file {
                Some(p) => {
                    io.read(p)?;
                    (load_order(p)?, "file".to_string())
                }
                None => {
                    let o = match order {
                        OrderArg::Given => StreamOrder::Given,
                        OrderArg::Reverse => StreamOrder::Reverse,
                        OrderArg::Random => StreamOrder::Random { seed: *seed },
                    };
                    (o.materialize(inst.n()), format!("{order:?}").to_lowercase())
                }
            };
            let run = stream_kmedian(&inst, &order, common.k)?;
            let induced = induce_partition(&inst, &run.centers)?;
            Ok(json!({
                "order": kind,
                "seed": seed,
                "centers": run.centers,
                "assignment": induced.assignment(),
                "peak_retained": run.peak_retained,
                "oracle_calls": run.oracle_calls,
                "matches_ground_truth": gt.map(|g| g.same_partition(&induced)),
            }))
        }
        Command::Verify(v) => verify(v, io, budget),
        Command::Oracle(o) => oracle(o, io),
    }
}

fn load_instance(io: &mut Io, path: &Path) -> Result<(MetricInstance, Option<Clustering>), Failure> {
    let text = io.read(path)?;
    let file = InstanceFile::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(file.into_parts_with(ValidationOptions::default()).with_context(|| format!("validating {}", path.display()))?)
}

fn load_graph(io: &mut Io, path: &Path) -> Result<Graph, Failure> {
    let text = io.read(path)?;
    Ok(Graph::parse(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn write_json(io: &mut Io, path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(anyhow::Error::from)? + "\n";
    Ok(io.write(path, &text)?)
}

fn gen(g: &GenCmd, out: &Path, io: &mut Io, budget: Budget) -> CmdResult {
    let cert_path = sidecar_path(out);
    let (file, cert) = match g {
        GenCmd::ReduceDomset { graph, d } => {
            let graph = load_graph(io, graph)?;
            let h = make_kmedian_hardness_instance(&graph, *d)?;
            (InstanceFile::new(&h.instance, None), serde_json::to_value(&h.certificate).map_err(anyhow::Error::from)?)
        }
        GenCmd::ReduceTrianglepart { graph } => {
            let graph = load_graph(io, graph)?;
            let h = make_minsum_hardness_instance(&graph)?;
            (InstanceFile::new(&h.instance, None), serde_json::to_value(&h.certificate).map_err(anyhow::Error::from)?)
        }
        GenCmd::From3dm { input } => {
            let text = io.read(input)?;
            let inst = ThreeDmInstance::parse(&text)?;
            let (pds, h) = threedm_to_kmedian(&inst)?;
            let mut cert = serde_json::to_value(&h.certificate).map_err(anyhow::Error::from)?;
            cert["graph_edges"] = json!(pds.graph.edges());
            (InstanceFile::new(&h.instance, None), cert)
        }
        GenCmd::Planted { k, sizes, alpha, seed, unit } => {
            let spec = PlantedSpec { sizes: sizes.clone(), target_alpha: *alpha, unit_range: *unit };
            let p = planted_stable_instance(*k, &spec, *seed)?;
            let report = if p.instance.n() <= CERTIFY_MAX_POINTS {
                certify_planted(&p, *alpha, budget)?
            } else {
                None
            };
            let cert = json!({
                "source_kind": "planted",
                "objective": "kmedian",
                "parameters": { "n": p.instance.n(), "k": k, "sizes": sizes, "seed": seed, "unit_range": unit },
                "target_alpha": alpha,
                "certified": report.is_some(),
                "certification_attempted": p.instance.n() <= CERTIFY_MAX_POINTS,
                "report": report,
            });
            (InstanceFile::new(&p.instance, Some(&p.ground_truth)), cert)
        }
    };
    write_json(io, out, &file)?;
    write_json(io, &cert_path, &cert)?;
    Ok(json!({ "instance": out.display().to_string(), "certificate": cert }))
}

fn solve(inst: &MetricInstance, k: usize, objective: Objective, linkage: bool, budget: Budget) -> CmdResult {
    if linkage {
        let tree = average_linkage_tree(inst);
        let p = best_k_pruning_for(&tree, inst, k, objective)?;
        return Ok(json!({
            "objective": objective,
            "method": "linkage",
            "k": k,
            "cost": p.cost.value,
            "assignment": p.clustering.assignment(),
            "centers": p.clustering.centers(),
            "tree": tree.merges(),
        }));
    }
    let opt = solve_exact(inst, k, objective, budget)?;
    Ok(json!({
        "objective": objective,
        "method": "exact",
        "k": k,
        "cost": opt.cost.value,
        "unique_partition": opt.unique_partition,
        "optimal_partitions": opt.all_optimal_count,
        "assignment": opt.clustering.assignment(),
        "centers": opt.clustering.centers(),
    }))
}

fn verify(v: &VerifyCmd, io: &mut Io, budget: Budget) -> CmdResult {
    match v {
        VerifyCmd::Stability { common, objective } => {
            let (inst, _) = load_instance(io, &common.instance)?;
            let r = stability_profile_with(&inst, common.k, (*objective).into(), budget)?;
            Ok(serde_json::to_value(&r).map_err(anyhow::Error::from)?)
        }
        VerifyCmd::Falsify { common, objective, mode, value, samples, seed } => {
            let (inst, _) = load_instance(io, &common.instance)?;
            let objective: Objective = (*objective).into();
            let mode = match mode {
                ModeArg::Multiplicative => PerturbationMode::Multiplicative(*value),
                ModeArg::Additive => PerturbationMode::Additive(*value),
            };
            let out = resilience_falsifier_with(&inst, common.k, objective, mode, *samples, *seed, budget)?;
            Ok(match out {
                FalsificationOutcome::NoCounterexampleFound { samples } => {
                    json!({ "result": "no_counterexample", "mode": mode, "samples": samples, "seed": seed })
                }
                FalsificationOutcome::Falsified(w) => {
                    let revalidated = revalidate_witness(&inst, common.k, objective, &w, budget)?;
                    json!({
                        "result": "falsified",
                        "mode": mode,
                        "samples": samples,
                        "seed": seed,
                        "witness": {
                            "reason": w.reason,
                            "sample": w.sample,
                            "pair_scales": w.pair_scales,
                            "original_assignment": w.original_optimum.assignment(),
                            "perturbed_assignment": w.perturbed_optimum.assignment(),
                            "perturbed_d": w.perturbed.rows(),
                            "revalidated": revalidated,
                        },
                    })
                }
            })
        }
        VerifyCmd::StrictSep { common, ground_truth } => {
            let (inst, gt) = load_instance(io, &common.instance)?;
            let clustering = if *ground_truth {
                gt.ok_or_else(|| Failure::Usage("--ground-truth given but the instance has none".into()))?
            } else {
                solve_exact(&inst, common.k, Objective::KMedian, budget)?.clustering
            };
            let c = strict_separation_check(&inst, &clustering)?;
            Ok(json!({
                "holds": c.holds,
                "witness": c.witness.map(|(p, pp, q)| json!({ "p": p, "p_prime": pp, "q": q })),
                "assignment": clustering.assignment(),
            }))
        }
        VerifyCmd::Lemma3 { common, alpha } => {
            let (inst, _) = load_instance(io, &common.instance)?;
            let r = stability_profile_with(&inst, common.k, Objective::KMedian, budget)?;
            let alpha = alpha.unwrap_or(r.alpha_center);
            if alpha.is_nan() || alpha <= 1.0 {
                return Err(Failure::Domain(anyhow!("the margin check needs alpha > 1, got {alpha}")));
            }
            let c = lemma3_margin_check(&inst, &r.clustering, alpha)?;
            Ok(json!({
                "holds": c.holds,
                "alpha": json_real(alpha),
                "factor": json_real(center_margin_factor(alpha)),
                "witness": c.witness,
                "unique_partition": r.unique_partition,
            }))
        }
        VerifyCmd::LinkageCond { common, alpha, subset_budget, seed } => {
            let (inst, _) = load_instance(io, &common.instance)?;
            let r = stability_profile_with(&inst, common.k, Objective::MinSum, budget)?;
            let alpha = alpha.unwrap_or(3.0 * r.t);
            if !alpha.is_finite() {
                return Err(Failure::Domain(anyhow!("alpha = 3t is infinite (a singleton cluster); pass --alpha")));
            }
            let c = linkage_condition_check(&inst, &r.clustering, alpha, *subset_budget, *seed)?;
            Ok(json!({
                "holds": c.holds,
                "alpha": alpha,
                "t": json_real(r.t),
                "alpha_minsum": json_real(r.alpha_minsum),
                "witness": c.witness,
                "subsets_checked": c.subsets_checked,
                "exhaustive": c.exhaustive,
                "unique_partition": r.unique_partition,
            }))
        }
    }
}

fn json_real(x: f64) -> Value {
    if x.is_infinite() {
        json!("inf")
    } else {
        json!(x)
    }
}

fn oracle(o: &OracleCmd, io: &mut Io) -> CmdResult {
    match o {
        OracleCmd::Domset { graph, max_size } => {
            let g = load_graph(io, graph)?;
            let max = max_size.unwrap_or(g.n());
            Ok(match min_dominating_set(&g, max)? {
                Some(ds) => json!({ "size": ds.size, "witness": ds.witness }),
                None => json!({ "size": null, "witness": null, "max_size": max }),
            })
        }
        OracleCmd::TrianglePartition { graph } => {
            let g = load_graph(io, graph)?;
            Ok(serde_json::to_value(triangle_partition_decide(&g)?).map_err(anyhow::Error::from)?)
        }
    }
}
