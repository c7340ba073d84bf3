use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use qpadm_core::data::{read_csv, read_libsvm, shuffled_order, CsvOptions, LibsvmOptions};
use qpadm_core::nonconvex::{lla_solve, LlaConfig};
use qpadm_core::select::{default_grid, grid_search, lambda_max, GridOptions};
use qpadm_core::solvers::{solve, IterationTrace, Outcome};
use qpadm_core::{Dataset, PenaltyKind, PenaltySpec, QuantileParam, SolverConfig, Task, Variant};
use serde::Serialize;

use crate::args::{FitArgs, FormatArg};
use crate::manifest::{fingerprint, write_json};
use crate::{with_path, CliError, CliResult, EXIT_MAX_ITER, EXIT_OK};

fn infer_format(path: &Path) -> FormatArg {
    let name = path.to_string_lossy().to_ascii_lowercase();
    let name = name.strip_suffix(".gz").unwrap_or(&name);
    if name.ends_with(".csv") {
        FormatArg::Csv
    } else {
        FormatArg::Libsvm
    }
}

pub fn load_dataset(args: &FitArgs) -> CliResult<Dataset<f64>> {
    let format = args.format.unwrap_or_else(|| infer_format(&args.data));
    let data = match format {
        FormatArg::Csv => read_csv(
            &args.data,
            CsvOptions {
                header: !args.no_header,
                task: args.task.into(),
                intercept: args.intercept,
            },
        ),
        FormatArg::Libsvm => read_libsvm(
            &args.data,
            LibsvmOptions {
                dims: None,
                intercept: args.intercept,
            },
        ),
    };
    with_path(data, &args.data)
}

pub fn solver_config(args: &FitArgs) -> CliResult<SolverConfig<f64>> {
    if !(args.nu > 0.0 && args.nu < 1.0) {
        return Err(CliError::usage(format!("--nu {} must lie in (0, 1)", args.nu)));
    }
    Ok(SolverConfig {
        tau: QuantileParam::new(args.tau)?,
        mu: args.mu,
        nu: args.nu,
        blocks: args.blocks,
        max_iter: args.max_iter,
        min_iter: args.min_iter,
        tol: args.tol,
        variant: args.variant,
        init_value: args.init,
        seed: args.seed,
        clamp_slack: !args.no_clamp,
        faulty_correction: args.break_correction,
    })
}

#[derive(Debug, Serialize)]
struct PathPoint {
    lambda: f64,
    hbic: f64,
    support_size: usize,
    iterations: usize,
    outcome: Outcome,
}

#[derive(Debug, Serialize)]
struct FitOutput {
    data: String,
    fingerprint: String,
    task: Task,
    n: usize,
    p: usize,
    variant: Variant,
    penalty: PenaltyKind,
    tau: f64,
    mu: f64,
    nu: f64,
    blocks: usize,
    a: Option<f64>,
    tol: f64,
    max_iter: usize,
    seed: u64,
    shuffle: bool,
    lambda: f64,
    beta: Vec<f64>,
    iterations: usize,
    outer_steps: usize,
    outcome: Outcome,
    objective: f64,
    stopping_history: Vec<f64>,
    elapsed_secs: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    selection_path: Vec<PathPoint>,
}

struct Fitted {
    lambda: f64,
    beta: Vec<f64>,
    iterations: usize,
    outer_steps: usize,
    outcome: Outcome,
    trace: IterationTrace,
    elapsed: f64,
    path: Vec<PathPoint>,
}

pub fn run(args: &FitArgs) -> CliResult<i32> {
    let cfg = solver_config(args)?;
    if args.lambda.is_some_and(|l| !(l >= 0.0) || !l.is_finite()) {
        return Err(CliError::usage("--lambda must be a nonnegative finite number"));
    }
    let mut data = load_dataset(args)?;
    cfg.validate(data.task())?;
    if args.shuffle {
        data = data.select_rows(&shuffled_order(data.n(), args.seed));
    }
    let fitted = match args.lambda {
        Some(lambda) => fit_fixed(&data, args, &cfg, lambda)?,
        None => fit_selected(&data, args, &cfg)?,
    };
    let pen = penalty(args, data.p(), fitted.lambda, data.has_intercept());
    let objective = pen.objective(&data, &fitted.beta, cfg.tau);
    let out = FitOutput {
        data: args.data.display().to_string(),
        fingerprint: fingerprint(&data),
        task: data.task(),
        n: data.n(),
        p: data.p(),
        variant: args.variant,
        penalty: args.penalty,
        tau: args.tau,
        mu: args.mu,
        nu: args.nu,
        blocks: args.blocks,
        a: args.a,
        tol: args.tol,
        max_iter: args.max_iter,
        seed: args.seed,
        shuffle: args.shuffle,
        lambda: fitted.lambda,
        beta: fitted.beta,
        iterations: fitted.iterations,
        outer_steps: fitted.outer_steps,
        outcome: fitted.outcome,
        objective,
        stopping_history: fitted.trace.rel_changes(),
        elapsed_secs: fitted.elapsed,
        selection_path: fitted.path,
    };
    write_json(&out, &args.out)?;
    if let Some(path) = &args.trace {
        let file = BufWriter::new(with_path(File::create(path), path)?);
        with_path(fitted.trace.write_csv(file), path)?;
    }
    println!(
        "{} after {} iterations (lambda {:.6e}, objective {:.6e})",
        match out.outcome {
            Outcome::Converged => "converged",
            Outcome::MaxIterations => "iteration limit reached",
        },
        out.iterations,
        out.lambda,
        out.objective
    );
    Ok(match out.outcome {
        Outcome::Converged => EXIT_OK,
        Outcome::MaxIterations => EXIT_MAX_ITER,
    })
}

fn penalty(args: &FitArgs, p: usize, lambda: f64, intercept: bool) -> PenaltySpec<f64> {
    let pen = PenaltySpec::uniform(args.penalty, p, lambda, intercept);
    match args.a {
        Some(a) => pen.with_a(a),
        None => pen,
    }
}

fn fit_fixed(data: &Dataset<f64>, args: &FitArgs, cfg: &SolverConfig<f64>, lambda: f64) -> CliResult<Fitted> {
    let pen = penalty(args, data.p(), lambda, data.has_intercept());
    if args.penalty == PenaltyKind::WeightedL1 {
        let fit = solve(data, &pen, cfg)?;
        return Ok(Fitted {
            lambda,
            beta: fit.beta,
            iterations: fit.iterations,
            outer_steps: 1,
            outcome: fit.outcome,
            trace: fit.trace,
            elapsed: fit.elapsed.as_secs_f64(),
            path: Vec::new(),
        });
    }
    let lla = LlaConfig {
        max_outer: args.max_outer,
        ..LlaConfig::new(cfg.clone())
    };
    let r = lla_solve(data, &pen, &lla)?;
    Ok(Fitted {
        lambda,
        iterations: r.total_iterations(),
        outer_steps: r.outer_steps,
        elapsed: r.elapsed.as_secs_f64(),
        beta: r.fit.beta,
        outcome: r.fit.outcome,
        trace: r.fit.trace,
        path: Vec::new(),
    })
}

fn fit_selected(data: &Dataset<f64>, args: &FitArgs, cfg: &SolverConfig<f64>) -> CliResult<Fitted> {
    if args.grid_points == 0 || !(args.grid_ratio > 0.0 && args.grid_ratio <= 1.0) {
        return Err(CliError::usage("--grid-points must be positive and --grid-ratio in (0, 1]"));
    }
    let lmax = lambda_max(data, cfg.tau);
    if !(lmax > 0.0) {
        return Err(CliError::failure("lambda_max is zero; pass --lambda explicitly"));
    }
    let grid = default_grid(lmax, args.grid_points, args.grid_ratio);
    let opts = GridOptions {
        kind: args.penalty,
        a: args.a,
        max_outer: args.max_outer,
        warm_start: true,
    };
    let start = std::time::Instant::now();
    let sel = grid_search(data, &grid, &opts, cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let path = sel
        .path
        .iter()
        .map(|r| PathPoint {
            lambda: r.lambda,
            hbic: r.hbic,
            support_size: r.support_size,
            iterations: r.iterations,
            outcome: r.outcome,
        })
        .collect();
    Ok(Fitted {
        lambda: sel.best.lambda,
        beta: sel.best.beta,
        iterations: sel.best.iterations,
        outer_steps: sel.best.outer_steps,
        outcome: sel.best.outcome,
        trace: sel.best.trace,
        elapsed,
        path,
    })
}
