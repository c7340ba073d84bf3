use qpadm_core::diagnostics::{run_diagnostics, DiagnoseOptions};

use crate::args::DiagnoseArgs;
use crate::manifest::write_json;
use crate::{CliError, CliResult, EXIT_FAILURE, EXIT_OK};

pub fn options(args: &DiagnoseArgs) -> CliResult<DiagnoseOptions> {
    if !(args.nu > 0.0 && args.nu < 1.0) {
        return Err(CliError::usage(format!("--nu {} must lie in (0, 1)", args.nu)));
    }
    if args.p == 0 || args.blocks == 0 || args.rows_per_block == 0 {
        return Err(CliError::usage("--M, --p and --rows-per-block must be positive"));
    }
    Ok(DiagnoseOptions {
        blocks: args.blocks,
        p: args.p,
        rows_per_block: args.rows_per_block,
        tau: args.tau,
        mu: args.mu,
        nu: args.nu,
        lambda: args.lambda,
        iterations: args.iterations,
        seed: args.seed,
        break_correction: args.break_correction,
    })
}

pub fn run(args: &DiagnoseArgs) -> CliResult<i32> {
    let checks = run_diagnostics(&options(args)?)?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(path) = &args.json {
        write_json(&checks, path)?;
    }
    Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_FAILURE })
}
