use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cliquesim::algo::{
    apsp_approx_with, ceil_sqrt, diameter_estimate, hitting_set_distributed, hitting_set_reference,
    is_hitting_set, source_detection_with, source_lists_reference, weighted_source_detection,
    ApspOptions, ApspOutcome, HopHorizon,
};
use cliquesim::lowerbound::{
    build_gab, verify_diameter_gap, verify_unweighted_gap, DisjointnessInstance, GadgetSpec,
};
use cliquesim::random::{random_connected_graph, rng};
use cliquesim::{exact_apsp, Execution, Mode, WeightedGraph};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "cliquesim",
    version,
    about = "Congested clique round simulator and experiments"
)]
struct Cli {
    /// Directory for generated files and relative `--out` paths.
    #[arg(long, global = true, env = "CLIQUESIM_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random connected graph with weights drawn from {1..p²}/p.
    GenRandom {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        p: u64,
        #[arg(long, default_value_t = 0.2)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to `random_n{n}_p{p}_s{seed}.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disjointness gadget plus `.spec.json` and `.labels.json` sidecars.
    GenGadget {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 16)]
        p: u64,
        /// Unit weights instead of the `1/p` cut edges.
        #[arg(long)]
        unweighted: bool,
        /// Defaults to `gadget_k{k}_{a}_{b}.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximate APSP on the simulator, checked against exact distances.
    RunApsp {
        #[command(flatten)]
        graph: GraphArgs,
        /// Message size `B` in bits.
        #[arg(long)]
        bits: Option<u32>,
        #[arg(long, value_enum, default_value_t = Horizon::Qualifying)]
        horizon: Horizon,
        /// Include every pair in the JSON report.
        #[arg(long)]
        entries: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Deterministic k-hitting set of the k-closest neighborhoods.
    RunHittingSet {
        #[command(flatten)]
        graph: GraphArgs,
        /// Defaults to `⌈√n⌉`.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Each node learns its `K` closest sources within distance `H`.
    RunSourceDetection {
        #[command(flatten)]
        graph: GraphArgs,
        /// Comma-separated source ids; defaults to every node.
        #[arg(long, value_delimiter = ',')]
        sources: Vec<usize>,
        /// Distance horizon `H`; defaults to `n`.
        #[arg(long)]
        hops: Option<u64>,
        /// List length `K`; defaults to `|S|`.
        #[arg(long)]
        limit: Option<usize>,
        /// Use the weight numerators as edge lengths.
        #[arg(long)]
        weighted: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Congest)]
        mode: ModeArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact diameters of weighted and unweighted gadgets against the claimed gap.
    VerifyGadget {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 16)]
        p: u64,
        /// Number of random instances; ignored when `--a`/`--b` are given.
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Repeated APSP runs on fresh random graphs, one row per repetition.
    Bench {
        /// Graph sizes; repeat the flag for several.
        #[arg(long, required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        p: u64,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long)]
        bits: Option<u32>,
        /// Run repetitions one after another.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file (`n m p` header, then `u v q` lines).
    #[arg(long, conflicts_with = "n")]
    graph: Option<PathBuf>,
    /// Generate a random graph of this size instead.
    #[arg(long, required_unless_present = "graph")]
    n: Option<usize>,
    #[arg(long, default_value_t = 4)]
    p: u64,
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct InstanceArgs {
    /// Bits per side is `k²`.
    #[arg(long)]
    k: usize,
    /// Hex string for Alice's bits.
    #[arg(long, requires = "b")]
    a: Option<String>,
    /// Hex string for Bob's bits.
    #[arg(long, requires = "a")]
    b: Option<String>,
    /// Seed for random instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the simulation trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Congest,
    Bcc,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Horizon {
    Qualifying,
    Listing,
}

fn resolve(dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        dir.join(path)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(dir: &Path, out: &OutputArgs, report: String) -> Result<()> {
    match &out.out {
        Some(path) => write_file(&resolve(dir, path), &report)?,
        None => print!("{report}"),
    }
    Ok(())
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn json_string(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn load_graph(g: &GraphArgs) -> Result<WeightedGraph> {
    match (&g.graph, g.n) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(text
                .parse()
                .with_context(|| format!("parsing {}", path.display()))?)
        }
        (None, Some(n)) => Ok(random_connected_graph(n, g.p, g.density, g.seed)?),
        (None, None) => bail!("either --graph or --n is required"),
    }
}

fn instance(args: &InstanceArgs) -> Result<DisjointnessInstance> {
    match (&args.a, &args.b) {
        (Some(a), Some(b)) => Ok(DisjointnessInstance::from_hex(args.k, a, b)?),
        _ => Ok(DisjointnessInstance::random(args.k, &mut rng(args.seed))),
    }
}

#[derive(Serialize)]
struct ApspEntry {
    u: usize,
    v: usize,
    exact_num: u64,
    approx_num: u128,
    ratio_milli: u128,
}

#[derive(Serialize)]
struct ApspReport {
    n: usize,
    k: usize,
    h: u64,
    epsilon_denominator: u64,
    p: u64,
    /// Denominator of `approx_num`; `exact_num` is over `p`.
    approx_denominator: u128,
    hitting_set: Vec<usize>,
    rounds: usize,
    total_bits: u64,
    bandwidth: u32,
    max_ratio: f64,
    max_ratio_milli: u128,
    diameter_estimate: [u64; 2],
    lower_ok: bool,
    upper_ok: bool,
    symmetric: bool,
    zero_diagonal: bool,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<ApspEntry>>,
}

fn apsp_report(
    g: &WeightedGraph,
    out: &ApspOutcome,
    total_bits: u64,
    with_entries: bool,
) -> ApspReport {
    let exact = exact_apsp(g);
    let m = &out.matrix;
    let check = m.check_against(&exact, out.params.eps_den);
    let n = g.n();
    let entries = with_entries.then(|| {
        (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .map(|(u, v)| ApspEntry {
                u,
                v,
                exact_num: exact.get(u, v),
                approx_num: m.get(u, v),
                ratio_milli: m.ratio_milli(&exact, u, v),
            })
            .collect()
    });
    let diam = diameter_estimate(m);
    ApspReport {
        n,
        k: out.params.k,
        h: out.params.h,
        epsilon_denominator: out.params.eps_den,
        p: g.p(),
        approx_denominator: m.denominator(),
        hitting_set: out.hitting_set.clone(),
        rounds: out.rounds,
        total_bits,
        bandwidth: out.bandwidth,
        max_ratio: check.max_ratio(),
        max_ratio_milli: check.max_ratio_milli(),
        diameter_estimate: [diam.num, diam.den],
        lower_ok: check.lower_ok,
        upper_ok: check.upper_ok,
        symmetric: check.symmetric,
        zero_diagonal: check.zero_diagonal,
        valid: check.valid(),
        entries,
    }
}

fn run_apsp(
    dir: &Path,
    graph: &GraphArgs,
    bits: Option<u32>,
    horizon: Horizon,
    entries: bool,
    output: &OutputArgs,
) -> Result<bool> {
    let g = load_graph(graph)?;
    let opts = ApspOptions {
        horizon: match horizon {
            Horizon::Qualifying => HopHorizon::Qualifying,
            Horizon::Listing => HopHorizon::Listing,
        },
        bandwidth: bits,
        ..Default::default()
    };
    let (out, trace) = apsp_approx_with(&g, &opts)?;
    if let Some(path) = &output.trace {
        write_file(&resolve(dir, path), &(trace.to_json().to_string() + "\n"))?;
    }
    let csv = output.format == Format::Csv;
    let report = apsp_report(&g, &out, trace.total_bits(), entries || csv);
    let valid = report.valid;
    let text = if csv {
        csv_string(report.entries.unwrap_or_default())?
    } else {
        json_string(&report)?
    };
    emit(dir, output, text)?;
    Ok(valid)
}

fn run_hitting_set(
    dir: &Path,
    graph: &GraphArgs,
    k: Option<usize>,
    output: &OutputArgs,
) -> Result<bool> {
    let g = load_graph(graph)?;
    let k = k.unwrap_or_else(|| (ceil_sqrt(g.n() as u64) as usize).min(g.n()));
    let (res, trace) = hitting_set_distributed(&g, k)?;
    if let Some(path) = &output.trace {
        write_file(&resolve(dir, path), &(trace.to_json().to_string() + "\n"))?;
    }
    let reference = hitting_set_reference(&g, k)?;
    let hits = is_hitting_set(&res.family, &res.set);
    let matches_reference = res == reference;
    let rounds_ok = res.rounds_used == 2 * k;
    let valid = hits && matches_reference && rounds_ok;
    let text = match output.format {
        Format::Json => json_string(&json!({
            "n": g.n(),
            "k": k,
            "hitting_set": res.set,
            "size": res.set.len(),
            "rounds": res.rounds_used,
            "total_bits": trace.total_bits(),
            "hits_every_neighborhood": hits,
            "matches_reference": matches_reference,
            "rounds_equal_2k": rounds_ok,
            "valid": valid,
        }))?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                node: usize,
                in_set: bool,
                neighborhood: String,
            }
            csv_string(res.family.iter().enumerate().map(|(node, fam)| {
                Row {
                    node,
                    in_set: res.set.binary_search(&node).is_ok(),
                    neighborhood: fam
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" "),
                }
            }))?
        }
    };
    emit(dir, output, text)?;
    Ok(valid)
}

#[allow(clippy::too_many_arguments)]
fn run_source_detection(
    dir: &Path,
    graph: &GraphArgs,
    sources: &[usize],
    hops: Option<u64>,
    limit: Option<usize>,
    weighted: bool,
    mode: ModeArg,
    output: &OutputArgs,
) -> Result<bool> {
    let g = load_graph(graph)?;
    let n = g.n();
    let sources: Vec<usize> = if sources.is_empty() {
        (0..n).collect()
    } else {
        sources.to_vec()
    };
    let mut distinct = sources.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let h = hops.unwrap_or(n as u64);
    let k = limit.unwrap_or(distinct.len());
    let mode = match mode {
        ModeArg::Congest => Mode::Congest,
        ModeArg::Bcc => Mode::Bcc,
    };
    let (res, trace, adj, schedule) = if weighted {
        if mode == Mode::Bcc {
            bail!("--weighted runs in congest mode only");
        }
        let (res, trace) = weighted_source_detection(&g, &sources, h, k)?;
        (res, trace, g.adjacency().to_vec(), h)
    } else {
        let (res, trace) = source_detection_with(&g, &sources, h, k, mode, Execution::default())?;
        let unit: Vec<Vec<(usize, u64)>> = g
            .adjacency()
            .iter()
            .map(|row| row.iter().map(|&(v, _)| (v, 1)).collect())
            .collect();
        (res, trace, unit, h.min(g.hop_diameter() as u64))
    };
    if let Some(path) = &output.trace {
        write_file(&resolve(dir, path), &(trace.to_json().to_string() + "\n"))?;
    }
    let matches_oracle = res.lists == source_lists_reference(&adj, &distinct, h, k);
    let bound = schedule + k.min(distinct.len()) as u64;
    let within = res.rounds as u64 <= bound;
    let valid = matches_oracle && within;
    let text = match output.format {
        Format::Json => json_string(&json!({
            "n": n,
            "sources": distinct,
            "H": h,
            "K": k,
            "weighted": weighted,
            "rounds": res.rounds,
            "round_bound": bound,
            "total_bits": trace.total_bits(),
            "lists": res.lists,
            "matches_oracle": matches_oracle,
            "within_round_bound": within,
            "valid": valid,
        }))?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                node: usize,
                rank: usize,
                distance: u64,
                source: usize,
            }
            csv_string(res.lists.iter().enumerate().flat_map(|(node, list)| {
                list.iter()
                    .enumerate()
                    .map(move |(rank, &(distance, source))| Row {
                        node,
                        rank,
                        distance,
                        source,
                    })
            }))?
        }
    };
    emit(dir, output, text)?;
    Ok(valid)
}

#[derive(Serialize)]
struct GadgetRow {
    k: usize,
    p: u64,
    a: String,
    b: String,
    disjoint: bool,
    weighted_diameter: String,
    weighted_predicted: String,
    weighted_consistent: bool,
    unweighted_diameter: String,
    unweighted_predicted: String,
    unweighted_consistent: bool,
}

fn verify_gadget(
    dir: &Path,
    args: &InstanceArgs,
    p: u64,
    reps: usize,
    output: &OutputArgs,
) -> Result<bool> {
    let instances: Vec<DisjointnessInstance> = if args.a.is_some() {
        vec![instance(args)?]
    } else {
        let mut r = rng(args.seed);
        (0..reps)
            .map(|_| DisjointnessInstance::random(args.k, &mut r))
            .collect()
    };
    let fmt = |w: cliquesim::Weight| format!("{}/{}", w.num, w.den);
    let mut rows = Vec::new();
    for inst in &instances {
        let weighted = build_gab(inst, p, true)?;
        let unweighted = build_gab(inst, p, false)?;
        let w = verify_diameter_gap(&weighted, inst);
        let u = verify_unweighted_gap(&unweighted, inst);
        rows.push(GadgetRow {
            k: inst.k(),
            p,
            a: inst.a_hex(),
            b: inst.b_hex(),
            disjoint: w.disjoint,
            weighted_diameter: fmt(w.observed),
            weighted_predicted: fmt(w.predicted),
            weighted_consistent: w.consistent,
            unweighted_diameter: fmt(u.observed),
            unweighted_predicted: fmt(u.predicted),
            unweighted_consistent: u.consistent,
        });
    }
    let valid = rows
        .iter()
        .all(|r| r.weighted_consistent && r.unweighted_consistent);
    let text = match output.format {
        Format::Csv => csv_string(&rows)?,
        Format::Json => {
            let consistent = rows.iter().filter(|r| r.weighted_consistent).count();
            json_string(&json!({
                "instances": rows.len(),
                "weighted_consistent": consistent,
                "unweighted_consistent": rows.iter().filter(|r| r.unweighted_consistent).count(),
                "valid": valid,
                "rows": rows,
            }))?
        }
    };
    emit(dir, output, text)?;
    Ok(valid)
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    rep: usize,
    seed: u64,
    rounds: usize,
    total_bits: u64,
    hubs: usize,
    max_ratio_milli: u128,
    valid: bool,
}

#[allow(clippy::too_many_arguments)]
fn bench(
    dir: &Path,
    sizes: &[usize],
    p: u64,
    density: f64,
    seed: u64,
    reps: usize,
    bits: Option<u32>,
    sequential: bool,
    output: &OutputArgs,
) -> Result<bool> {
    let jobs: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&n| (0..reps).map(move |rep| (n, rep)))
        .collect();
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let opts = ApspOptions {
        bandwidth: bits,
        execution: Execution::Sequential,
        ..Default::default()
    };
    let rows = exec.map_indexed(jobs.len(), |i| -> Result<BenchRow> {
        let (n, rep) = jobs[i];
        let seed = seed.wrapping_add(rep as u64);
        let g = random_connected_graph(n, p, density, seed)?;
        let (out, trace) = apsp_approx_with(&g, &opts)?;
        let report = apsp_report(&g, &out, trace.total_bits(), false);
        Ok(BenchRow {
            n,
            rep,
            seed,
            rounds: out.rounds,
            total_bits: report.total_bits,
            hubs: out.hitting_set.len(),
            max_ratio_milli: report.max_ratio_milli,
            valid: report.valid,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let valid = rows.iter().all(|r| r.valid);
    let text = match output.format {
        Format::Csv => csv_string(&rows)?,
        Format::Json => json_string(&json!({ "valid": valid, "runs": rows }))?,
    };
    emit(dir, output, text)?;
    Ok(valid)
}

fn execute(cli: Cli) -> Result<bool> {
    let dir = cli.out_dir.as_path();
    match cli.command {
        Command::GenRandom {
            n,
            p,
            density,
            seed,
            out,
        } => {
            let g = random_connected_graph(n, p, density, seed)?;
            let out = out.unwrap_or_else(|| format!("random_n{n}_p{p}_s{seed}.txt").into());
            let path = resolve(dir, &out);
            write_file(&path, &g.to_text())?;
            eprintln!(
                "wrote {} ({} nodes, {} edges)",
                path.display(),
                g.n(),
                g.m()
            );
            Ok(true)
        }
        Command::GenGadget {
            instance: args,
            p,
            unweighted,
            out,
        } => {
            let inst = instance(&args)?;
            let gadget = build_gab(&inst, p, !unweighted)?;
            let out = out.unwrap_or_else(|| {
                format!("gadget_k{}_{}_{}.txt", inst.k(), inst.a_hex(), inst.b_hex()).into()
            });
            let path = resolve(dir, &out);
            write_file(&path, &gadget.graph().to_text())?;
            let spec = GadgetSpec {
                k: inst.k(),
                p: gadget.p(),
                a: inst.a_hex(),
                b: inst.b_hex(),
                weighted: !unweighted,
            };
            write_file(&path.with_extension("spec.json"), &json_string(&spec)?)?;
            write_file(
                &path.with_extension("labels.json"),
                &json_string(&gadget.labels_json())?,
            )?;
            eprintln!("wrote {} ({} nodes)", path.display(), gadget.n());
            Ok(true)
        }
        Command::RunApsp {
            graph,
            bits,
            horizon,
            entries,
            output,
        } => run_apsp(dir, &graph, bits, horizon, entries, &output),
        Command::RunHittingSet { graph, k, output } => run_hitting_set(dir, &graph, k, &output),
        Command::RunSourceDetection {
            graph,
            sources,
            hops,
            limit,
            weighted,
            mode,
            output,
        } => run_source_detection(dir, &graph, &sources, hops, limit, weighted, mode, &output),
        Command::VerifyGadget {
            instance,
            p,
            reps,
            output,
        } => verify_gadget(dir, &instance, p, reps, &output),
        Command::Bench {
            n,
            p,
            density,
            seed,
            reps,
            bits,
            sequential,
            output,
        } => bench(dir, &n, p, density, seed, reps, bits, sequential, &output),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validity check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
