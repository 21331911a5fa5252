//! Command-line front end. Every verb is a thin wrapper over the library:
//! file formats live in `formats`, the pipeline in `experiment`. Vertex
//! labels on the command line are 1-based, like every file format.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use volta::config::{resolve_probability, ExperimentConfig};
use volta::experiment::{run_experiment, sweep, ROUTE_AGREEMENT};
use volta::formats;
use volta::recipes;
use volta::report::{to_json_file, CheckReport, MixingJson, StatsReport};
use volta_core::concentration::{concentration_stats, consensus_run};
use volta_core::generate::{generate, GenKind, GenSpec};
use volta_core::network::{ConductanceScheme, SchemeKind, DEFAULT_EPSILON, DEFAULT_GAMMA};
use volta_core::properness::{
    check_degree_band, check_expansion, check_structure, expansion_bound, DEFAULT_DELTA,
    DEFAULT_EXHAUSTIVE_CAP, DEFAULT_EXPANSION_SAMPLES,
};
use volta_core::solver::{
    audit_field, solve, solve_dense, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use volta_core::walk::{
    hitting_probabilities_with_budget, mixing_diagnostics, DEFAULT_MIXING_FACTOR,
    DEFAULT_MIXING_SAMPLES, DEFAULT_STEP_BUDGET,
};
use volta_core::{BoundaryCondition, Network};

/// Environment variable that overrides the master seed of `run` and
/// `sweep`, taking precedence over both the config file and `--seed`.
const SEED_ENV: &str = "VOLTA_SEED";

#[derive(Parser)]
#[command(name = "volta", version, about = "Potentials on random electrical networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gnp,
    Circle,
    SmallWorld,
}

impl From<KindArg> for GenKind {
    fn from(k: KindArg) -> GenKind {
        match k {
            KindArg::Gnp => GenKind::Gnp,
            KindArg::Circle => GenKind::Circle,
            KindArg::SmallWorld => GenKind::SmallWorld,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Unit,
    Uniform01,
    PowerLaw,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> SchemeKind {
        match s {
            SchemeArg::Unit => SchemeKind::Unit,
            SchemeArg::Uniform01 => SchemeKind::Uniform01,
            SchemeArg::PowerLaw => SchemeKind::PowerLaw,
        }
    }
}

/// One `--pin 251=0.3` occurrence (1-based vertex).
#[derive(Clone, Copy)]
struct PinArg {
    vertex: usize,
    potential: f64,
}

fn parse_pin(s: &str) -> Result<PinArg, String> {
    let (v, p) = s.split_once('=').ok_or_else(|| format!("expected VERTEX=POTENTIAL, got {s:?}"))?;
    let vertex: usize = v.trim().parse().map_err(|_| format!("bad vertex {v:?}"))?;
    if vertex == 0 {
        return Err("vertices are 1-based; 0 is not a vertex".to_string());
    }
    let potential: f64 = p.trim().parse().map_err(|_| format!("bad potential {p:?}"))?;
    Ok(PinArg { vertex, potential })
}

fn boundary_from(pins: &[PinArg]) -> Result<BoundaryCondition> {
    Ok(BoundaryCondition::new(pins.iter().map(|p| (p.vertex - 1, p.potential)).collect())?)
}

fn zero_based(one_based: &[usize]) -> Result<Vec<usize>> {
    one_based
        .iter()
        .map(|&v| {
            if v == 0 {
                bail!("vertices are 1-based; 0 is not a vertex")
            } else {
                Ok(v - 1)
            }
        })
        .collect()
}

#[derive(Args)]
struct PinSet {
    /// Boundary pin as VERTEX=POTENTIAL (repeatable), e.g. --pin 1=1.0
    #[arg(long = "pin", value_parser = parse_pin, required = true)]
    pins: Vec<PinArg>,
}

/// Emit to `--out` when given, else to stdout.
fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => formats::atomic_write(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a graph and write it in the `n m` edge-list format
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        /// Edge probability (gnp and small-world)
        #[arg(long)]
        p: Option<f64>,
        /// Alternative to --p: probability alpha ln(n)/n
        #[arg(long, conflicts_with = "p")]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw conductances for a graph, producing a network file
    Assign {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Power-law tail exponent
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        /// Uniform scheme lower cutoff
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the boundary-value problem on a network
    Solve {
        #[arg(long)]
        net: PathBuf,
        #[command(flatten)]
        pins: PinSet,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Cross-check against direct elimination (small interiors only)
        #[arg(long)]
        dense: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate potentials by first-hit Monte Carlo instead of solving
    Walk {
        #[arg(long)]
        net: PathBuf,
        #[command(flatten)]
        pins: PinSet,
        #[arg(long, default_value_t = 200)]
        walks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mixing diagnostics of the walk with a vertex set removed
    Mix {
        #[arg(long)]
        net: PathBuf,
        /// Vertices to remove, comma separated, 1-based
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_MIXING_FACTOR)]
        factor: f64,
        #[arg(long, default_value_t = DEFAULT_MIXING_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural and expansion checks of the properness conditions
    Check {
        #[arg(long)]
        net: PathBuf,
        /// Vertices excluded from the expansion check (the boundary set)
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<usize>,
        /// Exhaustive subset size cap for the expansion check
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_EXPANSION_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Degree-band coefficient; the degree check is skipped without it
        #[arg(long)]
        coefficient: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concentration statistics of a solved field
    Stats {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[command(flatten)]
        pins: PinSet,
        #[arg(long, default_value_t = volta_core::concentration::DEFAULT_BINS)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synchronous-averaging consensus run (same limit as solve)
    Consensus {
        #[arg(long)]
        net: PathBuf,
        #[command(flatten)]
        pins: PinSet,
        /// Optional starting field (field.csv format)
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full experiment from a recipe or a config file
    Run {
        /// Builtin recipe name (see `volta recipes`)
        #[arg(long, conflicts_with = "config")]
        recipe: Option<String>,
        /// TOML config path
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed override (VOLTA_SEED overrides this too)
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the run artifacts
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a config once per value of a numeric axis
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Config field to vary: n, p, alpha, gamma, or epsilon
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker cap; 0 uses the library default
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the builtin recipes
    Recipes,
}

fn load_run_config(recipe: Option<&str>, config: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match (recipe, config) {
        (Some(name), None) => {
            recipes::recipe(name).with_context(|| format!("unknown recipe {name:?}"))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml_str(&text)
        }
        _ => bail!("give exactly one of --recipe or --config"),
    }
}

fn apply_seed_overrides(cfg: &mut ExperimentConfig, flag: Option<u64>) -> Result<()> {
    if let Some(seed) = flag {
        cfg.experiment.seed = seed;
    }
    if let Ok(text) = std::env::var(SEED_ENV) {
        let seed: u64 =
            text.parse().with_context(|| format!("{SEED_ENV} must be an unsigned integer"))?;
        cfg.experiment.seed = seed;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { kind, n, p, alpha, seed, out } => {
            let kind: GenKind = kind.into();
            let p = resolve_probability(kind, n, p, alpha)?;
            let graph = generate(&GenSpec { kind, n, p, seed })?;
            formats::write_graph(&out, &graph)?;
            println!(
                "wrote {} ({} vertices, {} edges)",
                out.display(),
                graph.vertex_count(),
                graph.edge_count()
            );
        }
        Command::Assign { graph, scheme, gamma, epsilon, seed, out } => {
            let g = formats::read_graph(&graph)?;
            let scheme = ConductanceScheme { kind: scheme.into(), seed, gamma, epsilon };
            let net = Network::assign(g, &scheme)?;
            formats::write_network(&out, &net)?;
            println!("wrote {} ({} edges weighted)", out.display(), net.graph().edge_count());
        }
        Command::Solve { net, pins, tol, max_iter, dense, out } => {
            let net = formats::read_network(&net)?;
            let bc = boundary_from(&pins.pins)?;
            let field = solve(&net, &bc, tol, max_iter)?;
            let audit = audit_field(&net, &bc, &field)?;
            if dense {
                let reference = solve_dense(&net, &bc)?;
                let gap = volta::experiment::max_defined_gap(&field, &reference);
                if !(gap <= ROUTE_AGREEMENT) {
                    bail!("iterative and dense solutions disagree by {gap:.3e}");
                }
                println!("dense cross-check gap {gap:.3e}");
            }
            formats::write_field(&out, &field)?;
            println!(
                "wrote {} ({} defined, residual {:.3e}, {} sweeps, hull ok: {})",
                out.display(),
                audit.defined_count,
                field.residual_norm,
                field.iterations,
                audit.hull_ok
            );
        }
        Command::Walk { net, pins, walks, seed, budget, out } => {
            let net = formats::read_network(&net)?;
            let bc = boundary_from(&pins.pins)?;
            let est = hitting_probabilities_with_budget(&net, &bc, walks, seed, budget)?;
            formats::write_estimates(&out, &est)?;
            println!(
                "wrote {} ({} walks per vertex, {} steps total)",
                out.display(),
                est.walks_per_vertex,
                est.total_steps
            );
        }
        Command::Mix { net, exclude, factor, samples, seed, out } => {
            let net = formats::read_network(&net)?;
            let excluded = zero_based(&exclude)?;
            let mix = mixing_diagnostics(&net, &excluded, factor, samples, seed)?;
            emit(out.as_ref(), &to_json_file(&MixingJson::from_report(&mix))?)?;
        }
        Command::Check { net, exclude, cap, samples, seed, delta, coefficient, out } => {
            let net = formats::read_network(&net)?;
            let excluded = zero_based(&exclude)?;
            let structure = check_structure(net.graph())?;
            let expansion = check_expansion(&net, &excluded, cap, samples, seed)?;
            let bound = expansion_bound(&net)?;
            let degree_band = match coefficient {
                Some(c) => Some(check_degree_band(net.graph(), c, delta)?),
                None => None,
            };
            let report =
                CheckReport::new(&structure, &expansion, bound, degree_band.as_ref(), delta, coefficient);
            emit(out.as_ref(), &to_json_file(&report)?)?;
        }
        Command::Stats { net, field, pins, bins, out } => {
            let net = formats::read_network(&net)?;
            let field = formats::read_field(&field)?;
            let bc = boundary_from(&pins.pins)?;
            let stats = concentration_stats(&net, &bc, &field, bins)?;
            emit(out.as_ref(), &to_json_file(&StatsReport::from_stats(&stats))?)?;
        }
        Command::Consensus { net, pins, init, tol, max_steps, out } => {
            let net = formats::read_network(&net)?;
            let bc = boundary_from(&pins.pins)?;
            let init = init.as_ref().map(|p| formats::read_field(p)).transpose()?;
            let outcome = consensus_run(&net, &bc, init.as_ref().map(|f| f.values.as_slice()), tol, max_steps)?;
            formats::write_field(&out, &outcome.field)?;
            println!(
                "wrote {} ({} steps, final delta {:.3e})",
                out.display(),
                outcome.steps,
                outcome.final_delta
            );
        }
        Command::Run { recipe, config, seed, out } => {
            let mut cfg = load_run_config(recipe.as_deref(), config.as_ref())?;
            apply_seed_overrides(&mut cfg, seed)?;
            let record = run_experiment(&cfg, &out)?;
            println!(
                "run {} ok (seed {}) -> {}",
                cfg.experiment.name,
                cfg.experiment.seed,
                out.display()
            );
            if let Some(stats) = &record.stats {
                println!(
                    "predicted constant {:.6}, max dev {:.6}, mean dev {:.6}",
                    stats.v_bar_c, stats.max_dev, stats.mean_dev
                );
            }
            for (name, verdict) in &record.manifest.verdicts {
                println!("{name}: {verdict}");
            }
        }
        Command::Sweep { config, axis, values, seed, workers, out } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_toml_str(&text)?;
            apply_seed_overrides(&mut cfg, seed)?;
            let runs = sweep(&cfg, &axis, &values, &out, workers)?;
            println!("swept {} over {} values -> {}", axis, runs.len(), out.display());
            for run in &runs {
                let stats = run.record.stats.as_ref().expect("completed run has stats");
                println!(
                    "{}={}: predicted constant {:.6}, max dev {:.6}",
                    axis, run.value, stats.v_bar_c, stats.max_dev
                );
            }
        }
        Command::Recipes => {
            for name in recipes::RECIPE_NAMES {
                let cfg = recipes::recipe(name).expect("builtin recipe");
                let model = match cfg.generator.kind {
                    GenKind::Gnp => format!("gnp p={}", cfg.generator.p.unwrap_or_default()),
                    GenKind::Circle => "circle".to_string(),
                    GenKind::SmallWorld => {
                        format!("circle + gnp p={}", cfg.generator.p.unwrap_or_default())
                    }
                };
                println!(
                    "{name}: {model}, n={}, {:?} conductance, seed {}",
                    cfg.generator.n, cfg.conductance.scheme, cfg.experiment.seed
                );
            }
        }
    }
    Ok(())
}
