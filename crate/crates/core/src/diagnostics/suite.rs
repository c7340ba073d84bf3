use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::model::{Dataset, QuantileParam, SolverConfig, Variant};
use crate::solvers::{Admm, Problem};

use super::constraints::{ConstraintSystem, Ordering};
use super::gb::{build_gb_matrices, gb_coupling};
use super::history::{h_norm_trace, limit_proxy, record_run};
use super::reference::prediction_correction_step;

/// Toy instance and tolerances for the property suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseOptions {
    pub blocks: usize,
    pub p: usize,
    pub rows_per_block: usize,
    pub tau: f64,
    pub mu: f64,
    pub nu: f64,
    pub lambda: f64,
    /// Iterations compared against the reference iterator and used for the H-norm traces.
    pub iterations: usize,
    pub seed: u64,
    /// Runs the solver with the sign-flipped correction (negative control).
    pub break_correction: bool,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            blocks: 2,
            p: 3,
            rows_per_block: 5,
            tau: 0.7,
            mu: 1.0,
            nu: 0.75,
            lambda: 0.1,
            iterations: 50,
            seed: 0,
            break_correction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value <= bound, format!("{value:.3e} (bound {bound:.0e})"))
    }
}

/// Gaussian design with a sparse linear signal and Gaussian noise.
pub fn toy_dataset(n: usize, p: usize, seed: u64) -> Result<Dataset<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let x = DenseMatrix::from_fn(n, p, |_, _| draw());
    let y = (0..n)
        .map(|i| x[(i, 0)] - 0.5 * x[(i, p - 1)] + 0.3 * draw())
        .collect();
    Dataset::regression(x, y, false)
}

pub const IDENTITY_TOL: f64 = 1e-12;
pub const EQUIVALENCE_TOL: f64 = 1e-12;
pub const CONTRACTION_SLACK: f64 = 1e-8;
pub const RESIDUAL_SLACK: f64 = 1e-10;

/// Runs the algebraic and trajectory checks for both GB orderings.
pub fn run_diagnostics(opts: &DiagnoseOptions) -> Result<Vec<Check>> {
    let data = toy_dataset(opts.blocks * opts.rows_per_block, opts.p, opts.seed)?;
    let problem = Problem::new(&data, opts.blocks)?;
    let tau = QuantileParam::new(opts.tau)?;
    let weights = vec![opts.lambda; opts.p];
    let mut checks = Vec::new();
    for (ordering, variant) in [
        (Ordering::Standard, Variant::QpadmSlackGb),
        (Ordering::Modified, Variant::MQpadmSlackGb),
    ] {
        let tag = match ordering {
            Ordering::Standard => "standard",
            Ordering::Modified => "modified",
        };
        let cs = ConstraintSystem::from_blocks(&problem.blocks, ordering)?;
        let gb = build_gb_matrices(&cs, opts.mu, opts.nu)?;

        let id = gb.check_identities();
        checks.push(Check::at_most(format!("{tag}: HM = Q"), id.hm_minus_q, IDENTITY_TOL));
        checks.push(Check::at_most(format!("{tag}: G = Q'+Q-M'HM"), id.g_identity, IDENTITY_TOL));
        let pd = gb.definiteness()?;
        checks.push(Check::new(
            format!("{tag}: H, G positive definite"),
            pd.h_min > 0.0 && pd.g_min > 0.0,
            format!("min eig H {:.3e}, G {:.3e}", pd.h_min, pd.g_min),
        ));
        checks.push(Check::at_most(
            format!("{tag}: (B'B)^-1 B'C layout"),
            coupling_layout_error(&cs)?,
            0.0,
        ));

        let cfg = SolverConfig {
            tau,
            mu: opts.mu,
            nu: opts.nu,
            blocks: opts.blocks,
            variant,
            clamp_slack: false,
            faulty_correction: opts.break_correction,
            max_iter: usize::MAX,
            ..SolverConfig::default()
        };
        let mut admm = Admm::new(&problem, weights.clone(), &cfg, None)?;
        let mut reference = cs.iterate(&admm.settled_state())?;
        let mut worst_eq = 0.0f64;
        let mut worst_res = 0.0f64;
        for _ in 0..opts.iterations {
            admm.step()?;
            let settled = admm.settled_state();
            let solver = cs.iterate(&settled)?;
            reference = prediction_correction_step(&cs, &gb, &reference, &weights, tau)?.0;
            worst_eq = worst_eq.max(max_abs_diff(&solver.g(), &reference.g()));
            worst_res = worst_res.max(internal_residual_error(&cs, &problem, &settled, &solver)?);
        }
        checks.push(Check::at_most(format!("{tag}: constraint residual matches solver"), worst_res, IDENTITY_TOL));
        checks.push(Check::at_most(
            format!("{tag}: prediction-correction equivalence"),
            worst_eq,
            EQUIVALENCE_TOL,
        ));

        let run = record_run(&problem, &cs, &weights, &cfg, opts.iterations)?;
        let proxy_cfg = SolverConfig {
            faulty_correction: false,
            ..cfg.clone()
        };
        let limit = limit_proxy(&problem, &cs, &weights, &proxy_cfg, 1e-13, 200_000)?;
        let h = h_norm_trace(&run.points, &limit, &gb)?;
        checks.push(Check::at_most(
            format!("{tag}: contraction of |g - g*|_H^2"),
            h.contraction_excess(),
            CONTRACTION_SLACK,
        ));
        checks.push(Check::at_most(
            format!("{tag}: monotone |g^k - g^k+1|_H"),
            h.residual_excess(),
            RESIDUAL_SLACK,
        ));
        checks.push(Check::new(
            format!("{tag}: O(1/k) rate witness"),
            h.rate_witness().is_finite(),
            format!("max k|g^k - g^k+1|_H^2 / |g^0 - g*|_H^2 = {:.3e}", h.rate_witness()),
        ));
    }
    Ok(checks)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Entrywise distance of `(BᵀB)⁻¹BᵀC` from `−blockdiag(X̃ₘ)` (standard) or `[−I | 0]` (modified).
pub fn coupling_layout_error(cs: &ConstraintSystem<f64>) -> Result<f64> {
    let got = gb_coupling(cs)?;
    let n = cs.n();
    let mp = cs.num_blocks() * cs.p;
    let want = match cs.ordering {
        Ordering::Standard => cs.c.block(mp, 0, n, mp).scale(-1.0),
        Ordering::Modified => {
            let mut w = DenseMatrix::zeros(n, n + cs.p);
            w.set_block(0, 0, &DenseMatrix::identity(n).scale(-1.0));
            w
        }
    };
    Ok(got.max_abs_diff(&want))
}

/// Compares `Aa + Bb + Cc − e` with the residuals the solver forms from its own fields.
fn internal_residual_error(
    cs: &ConstraintSystem<f64>,
    problem: &Problem<'_, f64>,
    state: &crate::solvers::SolverState<f64>,
    it: &super::constraints::GbIterate<f64>,
) -> Result<f64> {
    let res = cs.residual(&it.a, &it.b, &it.c);
    let mut own = Vec::with_capacity(res.len());
    for blk in &state.blocks {
        own.extend(blk.beta_m.iter().zip(&state.central.beta).map(|(a, b)| a - b));
    }
    for (blk, data) in state.blocks.iter().zip(&problem.blocks) {
        let xb = data.x.mul_vec(&blk.beta_m);
        own.extend((0..data.n()).map(|i| -(data.y[i] - xb[i] - blk.xi[i] + blk.eta[i])));
    }
    Ok(max_abs_diff(&res, &own))
}
