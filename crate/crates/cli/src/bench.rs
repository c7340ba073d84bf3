//! Replicated benchmarks over synthetic data.
//!
//! The aggregate and per-replication CSVs contain no timing, so a rerun with
//! the same master seed reproduces them byte for byte; wall-clock figures go
//! to a separate timing CSV and the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qpadm_core::data::{shuffled_order, synth_classification, synth_generate, true_beta, SynthSpec};
use qpadm_core::metrics::{absolute_error, classification_accuracy, support_metrics, EvalReport};
use qpadm_core::nonconvex::{lla_solve, LlaConfig};
use qpadm_core::select::{default_grid, grid_search, lambda_max, GridOptions};
use qpadm_core::solvers::{solve, TraceRecord};
use qpadm_core::{Dataset, PenaltyKind, PenaltySpec, QuantileParam, SolverConfig, Task, Variant, ZERO_THRESHOLD};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::BenchArgs;
use crate::manifest::{fingerprint, write_json, Aggregate, FitRecord, Replication, RunManifest, Summary};
use crate::{with_path, CliError, CliResult, EXIT_OK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    /// Smallest value as a fraction of λ_max.
    pub ratio: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 20,
            ratio: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub mu: f64,
    pub nu: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub min_iter: usize,
    pub init_value: f64,
    pub clamp_slack: bool,
    /// LLA outer-step cap for SCAD/MCP.
    pub max_outer: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            mu: 1.0,
            nu: 0.75,
            tol: 1e-4,
            max_iter: 500,
            min_iter: 0,
            init_value: 0.01,
            clamp_slack: true,
            max_outer: 3,
        }
    }
}

fn default_task() -> Task {
    Task::Regression
}

fn default_rho() -> f64 {
    0.5
}

fn default_penalty() -> PenaltyKind {
    PenaltyKind::WeightedL1
}

/// Experiment descriptor read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    #[serde(default = "default_task")]
    pub task: Task,
    pub n: usize,
    pub p: usize,
    /// Size of an independent test sample (classification accuracy).
    #[serde(default)]
    pub test_n: Option<usize>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    pub tau: f64,
    pub replications: usize,
    pub seed: u64,
    pub variants: Vec<Variant>,
    pub blocks: Vec<usize>,
    #[serde(default = "default_penalty")]
    pub penalty: PenaltyKind,
    #[serde(default)]
    pub a: Option<f64>,
    /// Fixed λ as a fraction of λ_max; HBIC over `grid` when absent.
    #[serde(default)]
    pub lambda_ratio: Option<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Shuffle rows before partitioning.
    #[serde(default)]
    pub shuffle: bool,
}

impl Experiment {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let exp: Self = serde_json::from_str(text).map_err(|e| CliError::usage(format!("experiment descriptor: {e}")))?;
        exp.validate()?;
        Ok(exp)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = with_path(fs::read_to_string(path), path)?;
        Self::from_json(&text).map_err(|e| CliError {
            code: e.code,
            message: format!("{}: {}", path.display(), e.message),
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::usage(format!("experiment `{}`: {m}", self.name)));
        if self.replications == 0 {
            return bad("replications must be positive");
        }
        if self.variants.is_empty() || self.blocks.is_empty() {
            return bad("at least one variant and one block count are required");
        }
        if self.blocks.iter().any(|&m| m == 0 || m > self.n) {
            return bad("block counts must lie in 1..=n");
        }
        if self.grid.points == 0 || !(self.grid.ratio > 0.0 && self.grid.ratio <= 1.0) {
            return bad("grid needs positive points and a ratio in (0, 1]");
        }
        if self.lambda_ratio.is_some_and(|r| !(r > 0.0)) {
            return bad("lambda_ratio must be positive");
        }
        QuantileParam::new(self.tau)?.check_task(self.task)?;
        SynthSpec {
            n: self.n,
            p: self.p,
            seed: 0,
            rho: self.rho,
        }
        .validate()?;
        for &variant in &self.variants {
            self.solver_config(variant, 1, 0)?.validate(self.task)?;
        }
        Ok(())
    }

    fn solver_config(&self, variant: Variant, blocks: usize, seed: u64) -> CliResult<SolverConfig<f64>> {
        let s = &self.solver;
        Ok(SolverConfig {
            tau: QuantileParam::new(self.tau)?,
            mu: s.mu,
            nu: s.nu,
            blocks,
            max_iter: s.max_iter,
            min_iter: s.min_iter,
            tol: s.tol,
            variant,
            init_value: s.init_value,
            seed,
            clamp_slack: s.clamp_slack,
            faulty_correction: false,
        })
    }
}

/// Everything a bench run produces.
#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub manifest: RunManifest,
    /// Aggregate table, one row per (variant, M).
    pub summary_csv: String,
    pub replications_csv: String,
    pub timing_csv: String,
}

/// Seeds for replication `index`: data, test data, row shuffle.
fn replication_seeds(master: u64, index: usize) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    [rng.next_u64(), rng.next_u64(), rng.next_u64()]
}

struct Generated {
    train: Dataset<f64>,
    test: Option<Dataset<f64>>,
}

fn generate(exp: &Experiment, seeds: [u64; 3]) -> CliResult<Generated> {
    let spec = |n, seed| SynthSpec {
        n,
        p: exp.p,
        seed,
        rho: exp.rho,
    };
    let draw = |n, seed| -> CliResult<Dataset<f64>> {
        Ok(match exp.task {
            Task::Regression => synth_generate(&spec(n, seed))?.dataset,
            Task::Classification => synth_classification(&spec(n, seed))?.dataset,
        })
    };
    let mut train = draw(exp.n, seeds[0])?;
    if exp.shuffle {
        train = train.select_rows(&shuffled_order(train.n(), seeds[2]));
    }
    let test = exp.test_n.map(|n| draw(n, seeds[1])).transpose()?;
    Ok(Generated { train, test })
}

struct FitOutcome {
    lambda: f64,
    outer_steps: usize,
    beta: Vec<f64>,
    iterations: usize,
    wall_time: f64,
    trace: Vec<TraceRecord>,
}

fn fit_one(exp: &Experiment, data: &Dataset<f64>, cfg: &SolverConfig<f64>) -> CliResult<FitOutcome> {
    let lmax = lambda_max(data, cfg.tau);
    let start = std::time::Instant::now();
    if let Some(ratio) = exp.lambda_ratio {
        let lambda = lmax * ratio;
        let mut pen = PenaltySpec::uniform(exp.penalty, data.p(), lambda, data.has_intercept());
        if let Some(a) = exp.a {
            pen.a = a;
        }
        let (beta, iterations, outer_steps, trace) = if exp.penalty == PenaltyKind::WeightedL1 {
            let f = solve(data, &pen, cfg)?;
            (f.beta, f.iterations, 1, f.trace)
        } else {
            let lla = LlaConfig {
                max_outer: exp.solver.max_outer,
                ..LlaConfig::new(cfg.clone())
            };
            let r = lla_solve(data, &pen, &lla)?;
            let it = r.total_iterations();
            (r.fit.beta, it, r.outer_steps, r.fit.trace)
        };
        return Ok(FitOutcome {
            lambda,
            outer_steps,
            beta,
            iterations,
            wall_time: start.elapsed().as_secs_f64(),
            trace: trace.records,
        });
    }
    let grid = default_grid(lmax, exp.grid.points, exp.grid.ratio);
    let opts = GridOptions {
        kind: exp.penalty,
        a: exp.a,
        max_outer: exp.solver.max_outer,
        warm_start: true,
    };
    let sel = grid_search(data, &grid, &opts, cfg)?;
    Ok(FitOutcome {
        lambda: sel.best.lambda,
        outer_steps: sel.best.outer_steps,
        beta: sel.best.beta,
        iterations: sel.best.iterations,
        wall_time: start.elapsed().as_secs_f64(),
        trace: sel.best.trace.records,
    })
}

fn evaluate(exp: &Experiment, gen: &Generated, fit: &FitOutcome) -> CliResult<EvalReport> {
    let data = &gen.train;
    let support = support_metrics(&fit.beta, ZERO_THRESHOLD, data.has_intercept())?;
    let (ae, train_acc, test_acc) = match exp.task {
        Task::Regression => (Some(absolute_error(&fit.beta, &true_beta(exp.p, exp.tau))?), None, None),
        Task::Classification => {
            let acc = |d: &Dataset<f64>| -> CliResult<f64> {
                let labels = d.labels().expect("classification labels");
                Ok(classification_accuracy(&fit.beta, &d.raw_features(), labels)?)
            };
            (None, Some(acc(data)?), gen.test.as_ref().map(acc).transpose()?)
        }
    };
    Ok(EvalReport {
        p1: f64::from(u8::from(support.p1)),
        p2: f64::from(u8::from(support.p2)),
        ae,
        nonzero: support.nonzero as f64,
        sparsity: support.sparsity,
        train_acc,
        test_acc,
        iterations: fit.iterations as f64,
        wall_time: fit.wall_time,
    })
}

fn run_replication(exp: &Experiment, master: u64, index: usize, traces: bool) -> Replication {
    let seeds = replication_seeds(master, index);
    let gen = match generate(exp, seeds) {
        Ok(g) => g,
        Err(e) => {
            let fits = settings(exp)
                .map(|(variant, blocks)| FitRecord {
                    variant,
                    blocks,
                    lambda: None,
                    outer_steps: None,
                    report: None,
                    error: Some(e.message.clone()),
                    trace: None,
                })
                .collect();
            return Replication {
                index,
                seed: seeds[0],
                fingerprint: String::new(),
                fits,
            };
        }
    };
    let fits = settings(exp)
        .map(|(variant, blocks)| {
            let result = exp
                .solver_config(variant, blocks, seeds[0])
                .and_then(|cfg| fit_one(exp, &gen.train, &cfg))
                .and_then(|fit| evaluate(exp, &gen, &fit).map(|rep| (fit, rep)));
            match result {
                Ok((fit, report)) => FitRecord {
                    variant,
                    blocks,
                    lambda: Some(fit.lambda),
                    outer_steps: Some(fit.outer_steps),
                    report: Some(report),
                    error: None,
                    trace: traces.then_some(fit.trace),
                },
                Err(e) => FitRecord {
                    variant,
                    blocks,
                    lambda: None,
                    outer_steps: None,
                    report: None,
                    error: Some(e.message),
                    trace: None,
                },
            }
        })
        .collect();
    Replication {
        index,
        seed: seeds[0],
        fingerprint: fingerprint(&gen.train),
        fits,
    }
}

fn settings(exp: &Experiment) -> impl Iterator<Item = (Variant, usize)> + '_ {
    exp.variants
        .iter()
        .flat_map(move |&v| exp.blocks.iter().map(move |&m| (v, m)))
}

/// Recomputes the per-setting aggregates from replication records.
pub fn aggregate(exp: &Experiment, reps: &[Replication]) -> Vec<Aggregate> {
    settings(exp)
        .enumerate()
        .map(|(k, (variant, blocks))| {
            let reports: Vec<&EvalReport> = reps.iter().filter_map(|r| r.fits[k].report.as_ref()).collect();
            let pick = |f: &dyn Fn(&EvalReport) -> Option<f64>| -> Option<Summary> {
                Summary::of(&reports.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            Aggregate {
                variant,
                blocks,
                succeeded: reports.len(),
                failed: reps.len() - reports.len(),
                p1: pick(&|r| Some(100.0 * r.p1)),
                p2: pick(&|r| Some(100.0 * r.p2)),
                ae: pick(&|r| r.ae),
                nonzero: pick(&|r| Some(r.nonzero)),
                sparsity: pick(&|r| Some(r.sparsity)),
                iterations: pick(&|r| Some(r.iterations)),
                train_acc: pick(&|r| r.train_acc),
                test_acc: pick(&|r| r.test_acc),
                wall_time: pick(&|r| Some(r.wall_time)),
            }
        })
        .collect()
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

fn mean_sd(s: Option<Summary>) -> [String; 2] {
    [num(s.map(|s| s.mean)), num(s.map(|s| s.sd))]
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn summary_csv(aggs: &[Aggregate]) -> String {
    let header = [
        "variant", "M", "reps", "failed", "P1", "P2", "AE", "AE_sd", "Nonzero", "Nonzero_sd", "Sparsity",
        "Sparsity_sd", "Ite", "Ite_sd", "Train", "Train_sd", "Test", "Test_sd",
    ];
    let rows = aggs
        .iter()
        .map(|a| {
            let mut row = vec![
                a.variant.to_string(),
                a.blocks.to_string(),
                a.succeeded.to_string(),
                a.failed.to_string(),
                num(a.p1.map(|s| s.mean)),
                num(a.p2.map(|s| s.mean)),
            ];
            for s in [a.ae, a.nonzero, a.sparsity, a.iterations, a.train_acc, a.test_acc] {
                row.extend(mean_sd(s));
            }
            row
        })
        .collect();
    csv_text(&header, rows)
}

fn replications_csv(reps: &[Replication]) -> String {
    let header = [
        "rep", "seed", "variant", "M", "lambda", "P1", "P2", "AE", "Nonzero", "Sparsity", "Ite", "Outer", "Train", "Test",
        "error",
    ];
    let mut rows = Vec::new();
    for r in reps {
        for f in &r.fits {
            let e = f.report.as_ref();
            rows.push(vec![
                r.index.to_string(),
                r.seed.to_string(),
                f.variant.to_string(),
                f.blocks.to_string(),
                f.lambda.map_or_else(String::new, |l| format!("{l:.9e}")),
                num(e.map(|e| e.p1)),
                num(e.map(|e| e.p2)),
                num(e.and_then(|e| e.ae)),
                num(e.map(|e| e.nonzero)),
                num(e.map(|e| e.sparsity)),
                num(e.map(|e| e.iterations)),
                f.outer_steps.map_or_else(String::new, |k| k.to_string()),
                num(e.and_then(|e| e.train_acc)),
                num(e.and_then(|e| e.test_acc)),
                f.error.clone().unwrap_or_default(),
            ]);
        }
    }
    csv_text(&header, rows)
}

fn timing_csv(aggs: &[Aggregate]) -> String {
    let rows = aggs
        .iter()
        .map(|a| {
            let mut row = vec![a.variant.to_string(), a.blocks.to_string()];
            row.extend(mean_sd(a.wall_time));
            row
        })
        .collect();
    csv_text(&["variant", "M", "Time", "Time_sd"], rows)
}

/// Runs every replication with at most `workers` concurrent replications.
pub fn run_bench(exp: &Experiment, master_seed: u64, workers: usize, traces: bool) -> CliResult<BenchOutput> {
    exp.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::failure(e.to_string()))?;
    let reps: Vec<Replication> = pool.install(|| {
        (0..exp.replications)
            .into_par_iter()
            .map(|i| run_replication(exp, master_seed, i, traces))
            .collect()
    });
    let aggregates = aggregate(exp, &reps);
    Ok(BenchOutput {
        summary_csv: summary_csv(&aggregates),
        replications_csv: replications_csv(&reps),
        timing_csv: timing_csv(&aggregates),
        manifest: RunManifest {
            experiment: exp.clone(),
            master_seed,
            replications: reps,
            aggregates,
        },
    })
}

/// Paths written by [`write_outputs`].
pub fn output_paths(dir: &Path, name: &str) -> [PathBuf; 4] {
    [
        dir.join(format!("{name}.csv")),
        dir.join(format!("{name}.replications.csv")),
        dir.join(format!("{name}.timing.csv")),
        dir.join(format!("{name}.manifest.json")),
    ]
}

pub fn write_outputs(out: &BenchOutput, dir: &Path) -> CliResult<[PathBuf; 4]> {
    with_path(fs::create_dir_all(dir), dir)?;
    let paths = output_paths(dir, &out.manifest.experiment.name);
    for (path, text) in paths.iter().zip([&out.summary_csv, &out.replications_csv, &out.timing_csv]) {
        with_path(fs::write(path, text), path)?;
    }
    write_json(&out.manifest, &paths[3])?;
    Ok(paths)
}

pub fn run(args: &BenchArgs, workers: usize) -> CliResult<i32> {
    let mut exp = Experiment::load(&args.config)?;
    if let Some(r) = args.reps {
        exp.replications = r;
    }
    let seed = args.seed.unwrap_or(exp.seed);
    let out = run_bench(&exp, seed, workers, args.traces)?;
    let paths = write_outputs(&out, &args.out_dir)?;
    print!("{}", out.summary_csv);
    let mut listing = String::new();
    for p in &paths {
        let _ = writeln!(listing, "wrote {}", p.display());
    }
    eprint!("{listing}");
    Ok(EXIT_OK)
}
