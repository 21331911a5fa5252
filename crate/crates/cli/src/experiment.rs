//! The experiment pipeline behind `run` and `sweep`: generate, assign,
//! solve, stats, plus the optional walk, mixing, properness, and consensus
//! stages. Every stage is timed; whatever a stage writes before failing
//! stays on disk, and the manifest records how far the run got.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use volta_core::concentration::{concentration_stats, consensus_run, ConcentrationStats};
use volta_core::generate::generate;
use volta_core::properness::{check_degree_band, check_expansion, check_structure, expansion_bound};
use volta_core::rng::{derive_seed, RNG_ALGORITHM};
use volta_core::solver::{audit_field, solve, solve_dense};
use volta_core::walk::{hitting_probabilities_with_budget, mixing_diagnostics};
use volta_core::{Network, PotentialField};

use crate::config::ExperimentConfig;
use crate::formats::{
    atomic_write, render_estimates, render_field, render_graph, render_network,
};
use crate::manifest::{stamp_file, OutputStamp, RunManifest, StageTiming};
use crate::report::{to_json_file, CheckReport, MixingJson, StatsReport};

/// Agreement demanded between the iterative solve and the dense
/// cross-check, and between consensus and the solve.
pub const ROUTE_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub manifest: RunManifest,
    /// Present whenever the stats stage completed.
    pub stats: Option<ConcentrationStats>,
    pub out_dir: PathBuf,
}

struct Pipeline<'a> {
    cfg: &'a ExperimentConfig,
    dir: &'a Path,
    seeds: BTreeMap<String, u64>,
    timings: Vec<StageTiming>,
    outputs: BTreeMap<String, OutputStamp>,
    verdicts: BTreeMap<String, String>,
    stats: Option<ConcentrationStats>,
    failed_stage: Option<String>,
}

impl<'a> Pipeline<'a> {
    fn new(cfg: &'a ExperimentConfig, dir: &'a Path) -> Self {
        Pipeline {
            cfg,
            dir,
            seeds: BTreeMap::new(),
            timings: Vec::new(),
            outputs: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            stats: None,
            failed_stage: None,
        }
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let result = f(self);
        self.timings.push(StageTiming {
            stage: name.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        if result.is_err() && self.failed_stage.is_none() {
            self.failed_stage = Some(name.to_string());
        }
        result.with_context(|| format!("stage {name}"))
    }

    fn derive(&mut self, label: &str) -> u64 {
        let seed = derive_seed(self.cfg.experiment.seed, label);
        self.seeds.insert(label.to_string(), seed);
        seed
    }

    fn write_output(&mut self, name: &str, file: &str, content: &str) -> Result<()> {
        atomic_write(&self.dir.join(file), content.as_bytes())?;
        self.outputs.insert(name.to_string(), stamp_file(self.dir, file)?);
        Ok(())
    }

    fn execute(&mut self) -> Result<()> {
        let graph = self.stage("generate", |p| {
            let spec = p.cfg.gen_spec()?;
            p.seeds.insert("generate".to_string(), spec.seed);
            let graph = generate(&spec)?;
            p.write_output("graph", "graph.txt", &render_graph(&graph))?;
            Ok(graph)
        })?;

        let net = self.stage("assign", move |p| {
            let scheme = p.cfg.conductance_scheme();
            p.seeds.insert("conductance".to_string(), scheme.seed);
            let net = Network::assign(graph, &scheme)?;
            p.write_output("network", "net.txt", &render_network(&net))?;
            Ok(net)
        })?;

        let (bc, field) = self.stage("solve", |p| {
            let bc = p.cfg.boundary_condition()?;
            let s = &p.cfg.solver;
            let field = solve(&net, &bc, s.tol, s.max_iter)?;
            let audit = audit_field(&net, &bc, &field)?;
            if !audit.hull_ok || !(audit.max_defect <= s.tol) {
                bail!(
                    "solved field fails its own audit (defect {:.3e}, hull ok: {})",
                    audit.max_defect,
                    audit.hull_ok
                );
            }
            p.verdicts.insert(
                "field-audit".to_string(),
                format!("defect {:.3e}, hull ok, {} defined", audit.max_defect, audit.defined_count),
            );
            if s.dense_check {
                let dense = solve_dense(&net, &bc)?;
                let gap = max_defined_gap(&field, &dense);
                if !(gap <= ROUTE_AGREEMENT) {
                    bail!("iterative and dense solutions disagree by {gap:.3e}");
                }
                p.verdicts.insert("dense-check".to_string(), format!("max gap {gap:.3e}"));
            }
            p.write_output("field", "field.csv", &render_field(&field))?;
            Ok((bc, field))
        })?;

        self.stage("stats", |p| {
            let stats = concentration_stats(&net, &bc, &field, p.cfg.stats.bins)?;
            p.write_output("stats", "stats.json", &to_json_file(&StatsReport::from_stats(&stats))?)?;
            p.stats = Some(stats);
            Ok(())
        })?;

        if self.cfg.walk.enabled {
            self.stage("walk", |p| {
                let w = &p.cfg.walk;
                let seed = p.derive("walk");
                let est =
                    hitting_probabilities_with_budget(&net, &bc, w.walks_per_vertex, seed, w.step_budget)?;
                p.write_output("estimates", "estimates.csv", &render_estimates(&est))?;
                // cross-check against the solved field; sigma combines the
                // Monte Carlo standard error with the solver tolerance
                let mut max_gap: f64 = 0.0;
                let mut max_sigma: f64 = 0.0;
                for v in 0..field.values.len() {
                    if !field.defined[v] {
                        continue;
                    }
                    let gap = (est.potential_estimate(v) - field.values[v]).abs();
                    let se = combined_se(est.potential_std_error(v), p.cfg.solver.tol);
                    max_gap = max_gap.max(gap);
                    max_sigma = max_sigma.max(gap / se);
                }
                p.verdicts.insert(
                    "walk-cross-check".to_string(),
                    format!("max gap {max_gap:.3e}, max sigma {max_sigma:.2}"),
                );
                Ok(())
            })?;
        }

        if self.cfg.mixing.enabled {
            self.stage("mixing", |p| {
                let m = &p.cfg.mixing;
                let seed = p.derive("mixing");
                let report = mixing_diagnostics(&net, bc.vertices(), m.factor, m.samples, seed)?;
                let json = MixingJson::from_report(&report);
                p.verdicts.insert("mixing-applicability".to_string(), json.applicability.clone());
                p.write_output("mixing", "mixing.json", &to_json_file(&json)?)?;
                Ok(())
            })?;
        }

        if self.cfg.properness.enabled {
            self.stage("properness", |p| {
                let pr = &p.cfg.properness;
                let seed = p.derive("properness");
                let structure = check_structure(net.graph())?;
                let expansion =
                    check_expansion(&net, bc.vertices(), pr.exhaustive_cap, pr.samples, seed)?;
                let bound = expansion_bound(&net)?;
                let coefficient = p.cfg.degree_coefficient()?;
                let degree_band = match coefficient {
                    Some(c) => Some(check_degree_band(net.graph(), c, pr.delta)?),
                    None => None,
                };
                let report = CheckReport::new(
                    &structure,
                    &expansion,
                    bound,
                    degree_band.as_ref(),
                    pr.delta,
                    coefficient,
                );
                for (name, verdict) in report.verdicts() {
                    p.verdicts.insert(name, verdict);
                }
                p.write_output("check", "report.json", &to_json_file(&report)?)?;
                Ok(())
            })?;
        }

        if self.cfg.consensus.enabled {
            self.stage("consensus", |p| {
                let c = &p.cfg.consensus;
                let outcome = consensus_run(&net, &bc, None, c.tol, c.max_steps)?;
                let gap = max_defined_gap(&field, &outcome.field);
                if !(gap <= ROUTE_AGREEMENT) {
                    bail!("consensus limit disagrees with the solve by {gap:.3e}");
                }
                p.verdicts.insert(
                    "consensus".to_string(),
                    format!("max gap {gap:.3e} after {} steps", outcome.steps),
                );
                p.write_output("consensus", "consensus.csv", &render_field(&outcome.field))?;
                Ok(())
            })?;
        }

        Ok(())
    }

    fn finish(self, error: Option<String>) -> RunManifest {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            status: if self.failed_stage.is_none() { "ok" } else { "failed" }.to_string(),
            failed_stage: self.failed_stage,
            error,
            master_seed: self.cfg.experiment.seed,
            config: self.cfg.clone(),
            derived_seeds: self.seeds,
            timings: self.timings,
            outputs: self.outputs,
            verdicts: self.verdicts,
        }
    }
}

/// Largest pointwise gap between two fields over commonly defined vertices.
pub fn max_defined_gap(a: &PotentialField, b: &PotentialField) -> f64 {
    let mut gap: f64 = 0.0;
    for v in 0..a.values.len().min(b.values.len()) {
        if a.defined[v] && b.defined[v] {
            gap = gap.max((a.values[v] - b.values[v]).abs());
        }
    }
    gap
}

/// Monte Carlo standard error widened by the solver tolerance, so a
/// zero-variance estimate still tolerates the solve's own error.
pub fn combined_se(mc_se: f64, tol: f64) -> f64 {
    (mc_se * mc_se + tol * tol).sqrt()
}

/// Runs the full pipeline into `out_dir`. The manifest is written no
/// matter what; on a stage failure it carries the stage name and the
/// partial outputs stay in place.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunRecord> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating run directory {}", out_dir.display()))?;
    let mut pipeline = Pipeline::new(cfg, out_dir);
    let result = pipeline.execute();
    let stats = pipeline.stats.clone();
    let manifest = pipeline.finish(result.as_ref().err().map(|e| format!("{e:#}")));
    manifest.write(out_dir)?;
    result?;
    Ok(RunRecord { manifest, stats, out_dir: out_dir.to_path_buf() })
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub value: f64,
    pub dir_name: String,
    pub record: RunRecord,
}

pub const SUMMARY_FILE: &str = "summary.csv";

/// Runs the base config once per axis value, each in its own subdirectory
/// with an independently derived master seed, then writes a one-row-per-run
/// summary. `workers` caps the concurrency; 0 means the library default.
pub fn sweep(
    base: &ExperimentConfig,
    axis: &str,
    values: &[f64],
    out_root: &Path,
    workers: usize,
) -> Result<Vec<SweepRun>> {
    if values.is_empty() {
        bail!("sweep needs at least one value");
    }
    // plan every run before touching the disk so a bad axis or value is a
    // pure config error
    let mut plans = Vec::with_capacity(values.len());
    for (index, &value) in values.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.apply_axis(axis, value)?;
        cfg.experiment.seed = derive_seed(base.experiment.seed, &format!("sweep:{index}"));
        cfg.experiment.name = format!("{}-{axis}-{value}", base.experiment.name);
        let dir_name = format!("{axis}-{value}");
        if plans.iter().any(|(_, d, _)| *d == dir_name) {
            bail!("duplicate sweep value {value}");
        }
        plans.push((value, dir_name, cfg));
    }
    fs::create_dir_all(out_root)
        .with_context(|| format!("creating sweep directory {}", out_root.display()))?;

    let run_one = |(value, dir_name, cfg): &(f64, String, ExperimentConfig)| -> Result<SweepRun> {
        let record = run_experiment(cfg, &out_root.join(dir_name))
            .with_context(|| format!("sweep run {axis}={value}"))?;
        Ok(SweepRun { value: *value, dir_name: dir_name.clone(), record })
    };
    let runs: Vec<SweepRun> = if workers == 1 {
        plans.iter().map(run_one).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        pool.install(|| plans.par_iter().map(run_one).collect::<Result<_>>())?
    };

    let mut csv = String::from("value,v_bar_c,max_dev,mean_dev\n");
    for run in &runs {
        let stats = run.record.stats.as_ref().context("sweep run finished without stats")?;
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            run.value, stats.v_bar_c, stats.max_dev, stats.mean_dev
        ));
    }
    atomic_write(&out_root.join(SUMMARY_FILE), csv.as_bytes())?;
    Ok(runs)
}
