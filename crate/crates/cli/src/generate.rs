use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use qpadm_core::data::{synth_classification, synth_generate, true_beta, write_csv, write_libsvm, SynthSpec};
use serde::Serialize;

use crate::args::{GenerateArgs, TaskArg};
use crate::manifest::{fingerprint, write_json};
use crate::{with_path, CliError, CliResult, EXIT_OK};

#[derive(Debug, Serialize)]
struct Truth {
    task: &'static str,
    n: usize,
    p: usize,
    seed: u64,
    rho: f64,
    tau: f64,
    /// 1-based indices of the location variables.
    support: Vec<usize>,
    hetero_index: usize,
    beta: Option<Vec<f64>>,
    fingerprint: String,
}

fn with_suffix(prefix: &PathBuf, suffix: &str) -> PathBuf {
    let mut s = prefix.clone().into_os_string();
    s.push(suffix);
    s.into()
}

pub fn run(args: &GenerateArgs) -> CliResult<i32> {
    if args.task == TaskArg::Regression && !(args.tau > 0.0 && args.tau < 1.0) {
        return Err(CliError::usage(format!("--tau {} must lie in (0, 1) for regression truth", args.tau)));
    }
    let spec = SynthSpec {
        n: args.n,
        p: args.p,
        seed: args.seed,
        rho: args.rho,
    };
    let (synth, data_path) = match args.task {
        TaskArg::Regression => (synth_generate::<f64>(&spec)?, with_suffix(&args.out, ".csv")),
        TaskArg::Classification => (synth_classification::<f64>(&spec)?, with_suffix(&args.out, ".libsvm")),
    };
    if let Some(dir) = data_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        with_path(std::fs::create_dir_all(dir), dir)?;
    }
    let file = BufWriter::new(with_path(File::create(&data_path), &data_path)?);
    match args.task {
        TaskArg::Regression => with_path(write_csv(&synth.dataset, file), &data_path)?,
        TaskArg::Classification => with_path(write_libsvm(&synth.dataset, file), &data_path)?,
    }
    let truth = Truth {
        task: match args.task {
            TaskArg::Regression => "regression",
            TaskArg::Classification => "classification",
        },
        n: args.n,
        p: args.p,
        seed: args.seed,
        rho: args.rho,
        tau: args.tau,
        support: synth.support.clone(),
        hetero_index: synth.hetero_index,
        beta: (args.task == TaskArg::Regression).then(|| true_beta(args.p, args.tau)),
        fingerprint: fingerprint(&synth.dataset),
    };
    let truth_path = with_suffix(&args.out, ".truth.json");
    write_json(&truth, &truth_path)?;
    println!("{}", data_path.display());
    println!("{}", truth_path.display());
    Ok(EXIT_OK)
}
