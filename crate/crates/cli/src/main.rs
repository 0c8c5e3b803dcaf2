use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nodesplit::bench::{default_sigmas, gen_coding_network, run_bench, sigma_sweep, BenchInstance, BenchOptions, CodingSpec};
use nodesplit::elimination::mbe;
use nodesplit::exact::{Engine, ExactInference};
use nodesplit::graph::min_fill_order;
use nodesplit::model::{parse_evidence, parse_uai, serialize_evidence, serialize_uai};
use nodesplit::search::{split_bnb_logged, SearchOptions, Space};
use nodesplit::strategies::{apply, Heuristic, StrategyConfig};
use nodesplit::{Instantiation, Network, Op};

#[derive(Parser)]
#[command(name = "nodesplit", version, about = "MPE inference, split-network bounds and branch-and-bound search")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact MPE (or probability of evidence with --sum).
    Exact {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        sum: bool,
        #[arg(long, value_enum, default_value_t = EngineArg::Jt)]
        engine: EngineArg,
    },
    /// Build a split network and write it with its clone mapping.
    Split {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Upper bound from exact inference on a split network.
    Bound {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long)]
        sum: bool,
    },
    /// Branch-and-bound MPE search.
    Search {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long, value_enum, default_value_t = SpaceArg::Reduced)]
        space: SpaceArg,
        /// Evaluate complete nodes only (cutset conditioning).
        #[arg(long)]
        no_bound: bool,
        /// Per-node log: depth, assignment, bound, incumbent.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Generate a code network; writes PREFIX.uai and PREFIX.evid.
    GenCoding {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 0.4)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep code networks over noise levels, heuristics, limits and spaces.
    BenchCoding {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 6)]
        seeds_per_sigma: usize,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [4, 6, 8, 10])]
        limits: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_enum, default_values_t = [HeuristicArg::Mb, HeuristicArg::Jt])]
        heuristics: Vec<HeuristicArg>,
        #[arg(long, value_delimiter = ',', value_enum, default_values_t = [SpaceArg::Reduced])]
        spaces: Vec<SpaceArg>,
        #[arg(long)]
        no_bound: bool,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Write the mini-bucket execution trace as Graphviz DOT.
    Trace {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        dot: PathBuf,
        #[arg(long)]
        ibound: usize,
    },
}

#[derive(Args)]
struct Input {
    /// Network in UAI format.
    model: PathBuf,
    /// Evidence in UAI format.
    #[arg(long)]
    evid: Option<PathBuf>,
}

#[derive(Args)]
struct StrategyArgs {
    #[arg(long, value_enum)]
    heuristic: HeuristicArg,
    #[arg(long)]
    limit: usize,
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, default_value_t = 24)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    parity_parents: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Ve,
    Jt,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HeuristicArg {
    Mb,
    Jt,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Mb => Heuristic::Mb,
            HeuristicArg::Jt => Heuristic::Jt,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Full,
    Reduced,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::Full => Space::Full,
            SpaceArg::Reduced => Space::Reduced,
        }
    }
}

fn load(input: &Input) -> Result<(Network, Instantiation)> {
    let text = fs::read_to_string(&input.model).with_context(|| format!("reading {}", input.model.display()))?;
    let net = parse_uai(&text).with_context(|| format!("parsing {}", input.model.display()))?;
    let e = match &input.evid {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_evidence(&text, &net).with_context(|| format!("parsing {}", p.display()))?
        }
        None => Instantiation::new(),
    };
    Ok((net, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn assignment(net: &Network, x: &Instantiation) -> String {
    x.iter()
        .map(|(v, val)| format!("{}={val}", net.variable(v).name))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.cmd {
        Cmd::Exact { input, sum, engine } => {
            let (net, e) = load(&input)?;
            let engine = match engine {
                EngineArg::Ve => Engine::Ve,
                EngineArg::Jt => Engine::Jointree,
            };
            let exact = ExactInference::new(&net, engine);
            if sum {
                let (v, _) = exact.query(&net, &e, Op::Sum, false)?;
                writeln!(out, "pe_log\t{v}")?;
            } else {
                let (v, x) = exact.query(&net, &e, Op::Max, true)?;
                writeln!(out, "mpe_log\t{v}")?;
                writeln!(out, "mpe\t{}", assignment(&net, &x.unwrap_or_default()))?;
            }
        }
        Cmd::Split {
            input,
            strategy,
            out: path,
            map,
        } => {
            let (net, e) = load(&input)?;
            let s = apply(&net, &e, &StrategyConfig::new(strategy.heuristic.into(), strategy.limit))?;
            write(&path, &serialize_uai(s.split.net()))?;
            if let Some(map) = map {
                write(&map, &s.split.mapping().to_json())?;
            }
            writeln!(out, "splits\t{}", s.split.split_variables().len())?;
            writeln!(out, "clones\t{}", s.split.clone_count())?;
            writeln!(out, "beta_log\t{}", s.split.beta_log())?;
        }
        Cmd::Bound { input, strategy, sum } => {
            let (net, e) = load(&input)?;
            let s = apply(&net, &e, &StrategyConfig::new(strategy.heuristic.into(), strategy.limit))?;
            let (name, v) = if sum {
                ("pe_bound_log", s.split.pe_bound(&e)?)
            } else {
                ("mpe_bound_log", s.split.mpe_bound(&e)?)
            };
            writeln!(out, "splits\t{}", s.split.split_variables().len())?;
            writeln!(out, "clones\t{}", s.split.clone_count())?;
            writeln!(out, "{name}\t{v}")?;
        }
        Cmd::Search {
            input,
            strategy,
            space,
            no_bound,
            log,
        } => {
            let (net, e) = load(&input)?;
            let s = apply(&net, &e, &StrategyConfig::new(strategy.heuristic.into(), strategy.limit))?;
            let mut opts = SearchOptions::new(space.into());
            opts.use_bound = !no_bound;
            let r = match log {
                Some(p) => {
                    let f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    let mut w = BufWriter::new(f);
                    let r = split_bnb_logged(&net, &s.split, &e, &opts, Some(&mut w))?;
                    w.flush()?;
                    r
                }
                None => split_bnb_logged(&net, &s.split, &e, &opts, None)?,
            };
            writeln!(out, "mpe_log\t{}", r.mpe_log)?;
            writeln!(out, "mpe\t{}", assignment(&net, &r.argmax))?;
            writeln!(out, "nodes\t{}", r.nodes_visited)?;
            writeln!(out, "evaluations\t{}", r.bounds_evaluated)?;
        }
        Cmd::GenCoding { code, sigma, seed, out: prefix } => {
            let c = gen_coding_network(&CodingSpec {
                k: code.k,
                m: code.m,
                parents_per_parity: code.parity_parents,
                sigma,
                seed,
            })?;
            let base = prefix.to_string_lossy();
            write(Path::new(&format!("{base}.uai")), &serialize_uai(&c.net))?;
            write(Path::new(&format!("{base}.evid")), &serialize_evidence(&c.evidence))?;
        }
        Cmd::BenchCoding {
            code,
            sigmas,
            seeds_per_sigma,
            first_seed,
            limits,
            heuristics,
            spaces,
            no_bound,
            csv,
        } => {
            let sigmas = sigmas.unwrap_or_else(default_sigmas);
            let specs = sigma_sweep(code.k, code.m, code.parity_parents, &sigmas, seeds_per_sigma, first_seed);
            let instances = specs.iter().map(BenchInstance::coding).collect::<nodesplit::Result<Vec<_>>>()?;
            let mut configs = Vec::new();
            for &h in &heuristics {
                for &l in &limits {
                    configs.push(StrategyConfig::new(h.into(), l));
                }
            }
            let opts = BenchOptions {
                heuristics: configs,
                spaces: spaces.into_iter().map(Space::from).collect(),
                use_bound: !no_bound,
            };
            let f = fs::File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
            let summary = run_bench(&instances, &opts, BufWriter::new(f))?;
            for (inst, h, limit, msg) in &summary.failures {
                eprintln!("{inst} {h} limit {limit}: {msg}");
            }
            writeln!(out, "rows\t{}", summary.rows)?;
            writeln!(out, "failures\t{}", summary.failures.len())?;
        }
        Cmd::Trace { input, dot, ibound } => {
            let (net, e) = load(&input)?;
            if ibound == 0 {
                bail!("--ibound must be at least 1");
            }
            let r = mbe(&net.conditioned_cpts(&e), &min_fill_order(&net), ibound, Op::Max)?;
            write(&dot, &r.trace.to_dot(|v| net.variable(v).name.clone()))?;
            writeln!(out, "bound_log\t{}", r.value)?;
            writeln!(out, "iterations\t{}", r.trace.len())?;
        }
    }
    Ok(())
}
