use super::*;
use crate::data::{synth_generate, SynthSpec};
use crate::matrix::DenseMatrix;
use crate::model::QuantileParam;

fn toy(n: usize, p: usize, seed: u64) -> Dataset<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x = DenseMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    let beta: Vec<f64> = (0..p).map(|j| if j % 2 == 0 { 1.0 } else { 0.0 }).collect();
    let fit = x.mul_vec(&beta);
    let y = fit.iter().map(|f| f + rng.gen_range(-0.5..0.5)).collect();
    Dataset::regression(x, y, false).unwrap()
}

fn config(variant: Variant, blocks: usize) -> SolverConfig<f64> {
    SolverConfig {
        variant,
        blocks,
        max_iter: 20_000,
        tol: 1e-9,
        ..SolverConfig::default()
    }
}

fn objective(data: &Dataset<f64>, beta: &[f64], lambda: f64, tau: f64) -> f64 {
    let tau = QuantileParam::new(tau).unwrap();
    data.total_loss(beta, tau) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

#[test]
fn zero_design_gives_zero_fit() {
    let x = DenseMatrix::zeros(10, 3);
    let d = Dataset::regression(x, vec![1.0; 10], false).unwrap();
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 3, 0.5, false);
    for v in Variant::ALL {
        let fit = solve(&d, &pen, &config(v, 2)).unwrap();
        assert!(fit.converged(), "{v}");
        assert!(fit.beta.iter().all(|b| b.abs() < 1e-6), "{v}: {:?}", fit.beta);
    }
}

#[test]
fn variants_reach_the_same_objective() {
    let d = toy(40, 5, 3);
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 5, 0.1, false);
    let objs: Vec<f64> = Variant::ALL
        .iter()
        .map(|&v| {
            let fit = solve(&d, &pen, &config(v, 2)).unwrap();
            objective(&d, &fit.beta, 0.1, 0.7)
        })
        .collect();
    let best = objs.iter().cloned().fold(f64::INFINITY, f64::min);
    for (v, o) in Variant::ALL.iter().zip(&objs) {
        assert!((o - best) / best < 1e-3, "{v}: {o} vs {best}");
    }
}

#[test]
fn solution_is_not_improved_by_perturbations() {
    // convexity: a global minimizer beats every nearby point
    use rand::{Rng, SeedableRng};
    let d = toy(60, 4, 11);
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 4, 0.3, false);
    let fit = solve(&d, &pen, &config(Variant::MQpadmSlackGb, 3)).unwrap();
    let f0 = objective(&d, &fit.beta, 0.3, 0.7);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let b: Vec<f64> = fit.beta.iter().map(|v| v + rng.gen_range(-1e-2..1e-2)).collect();
        assert!(objective(&d, &b, 0.3, 0.7) >= f0 - 1e-6);
    }
}

#[test]
fn runs_are_bit_identical_across_thread_counts() {
    let d = synth_generate::<f64>(&SynthSpec::new(120, 20, 9)).unwrap().dataset;
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 20, 2.0, false);
    for v in Variant::ALL {
        let cfg = SolverConfig {
            variant: v,
            blocks: 4,
            ..SolverConfig::default()
        };
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| solve(&d, &pen, &cfg).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.beta, b.beta, "{v}");
        assert_eq!(a.trace, b.trace, "{v}");
        assert_eq!(a.state, b.state, "{v}");
    }
}

#[test]
fn trace_objective_matches_recomputation() {
    let d = toy(30, 3, 1);
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 3, 0.2, false);
    let cfg = config(Variant::QpadmSlackGb, 2);
    let fit = solve(&d, &pen, &cfg).unwrap();
    let recorded = fit.objective().unwrap();
    assert!((recorded - objective(&d, &fit.beta, 0.2, 0.7)).abs() < 1e-6);
    assert_eq!(fit.trace.len(), fit.iterations);
    assert!(fit.trace.last().unwrap().rel_change <= cfg.tol);
}

#[test]
fn residuals_shrink_along_the_run() {
    let d = toy(80, 4, 2);
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 4, 0.2, false);
    for v in Variant::ALL {
        let fit = solve(&d, &pen, &config(v, 2)).unwrap();
        let first = fit.trace.records[0];
        let last = fit.trace.last().unwrap();
        assert!(last.consensus_residual < 1e-4 * first.consensus_residual.max(1.0), "{v}");
        assert!(last.fit_residual < 1e-4 * first.fit_residual.max(1.0), "{v}");
    }
}

#[test]
fn max_iterations_is_reported() {
    let d = toy(40, 5, 3);
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 5, 0.1, false);
    let cfg = SolverConfig {
        max_iter: 3,
        tol: 1e-14,
        ..SolverConfig::default()
    };
    let fit = solve(&d, &pen, &cfg).unwrap();
    assert_eq!((fit.outcome, fit.iterations), (Outcome::MaxIterations, 3));
}

#[test]
fn huge_responses_are_flagged_as_divergent() {
    let x = DenseMatrix::from_fn(6, 2, |i, j| (i + j) as f64);
    let d = Dataset::regression(x, vec![1e14; 6], false).unwrap();
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 2, 0.1, false);
    let err = solve(&d, &pen, &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Diverged { iteration: 1 }), "{err}");
}

#[test]
fn warm_start_saves_iterations() {
    let d = toy(60, 5, 4);
    let problem = Problem::new(&d, 2).unwrap();
    let cfg = config(Variant::MQpadmSlackGb, 2);
    let cold = solve_problem(&problem, &[0.2; 5], &cfg, None).unwrap();
    let warm = solve_problem(&problem, &[0.21; 5], &cfg, Some(cold.state.clone())).unwrap();
    let fresh = solve_problem(&problem, &[0.21; 5], &cfg, None).unwrap();
    assert!(warm.iterations < fresh.iterations);
}

#[test]
fn warm_state_shape_is_checked() {
    let d = toy(20, 3, 4);
    let p2 = Problem::new(&d, 2).unwrap();
    let p3 = Problem::new(&d, 3).unwrap();
    let fit = solve_problem(&p2, &[0.1; 3], &config(Variant::QpadmSlack, 2), None).unwrap();
    assert!(Admm::new(&p3, vec![0.1; 3], &config(Variant::QpadmSlack, 3), Some(fit.state.clone())).is_err());
    // baseline state has no slack vectors
    assert!(Admm::new(&p2, vec![0.1; 3], &config(Variant::Qpadm, 2), Some(fit.state)).is_err());
}

#[test]
fn settled_state_applies_the_deferred_dual() {
    let d = toy(20, 3, 6);
    let problem = Problem::new(&d, 2).unwrap();
    let cfg = config(Variant::MQpadmSlackGb, 2);
    let mut admm = Admm::new(&problem, vec![0.1; 3], &cfg, None).unwrap();
    for _ in 0..3 {
        admm.step().unwrap();
    }
    let settled = admm.settled_state();
    assert!(admm.state().dual_pending && !settled.dual_pending);
    let before = admm.state().clone();
    admm.step().unwrap();
    // the next sweep starts from exactly the settled duals
    for (m, blk) in settled.blocks.iter().enumerate() {
        let raw = &before.blocks[m];
        assert_ne!(blk.d, raw.d);
        let n = blk.rows();
        for i in 0..n {
            let want = raw.e[i] + cfg.mu * (problem.blocks[m].y[i] - raw.xb[i] - raw.xi_tilde[i] + raw.eta_tilde[i]);
            assert_eq!(blk.e[i], want);
        }
    }
}

#[test]
fn folded_concave_penalty_is_rejected_by_solve() {
    let d = toy(10, 2, 0);
    let pen = PenaltySpec::uniform(PenaltyKind::Scad, 2, 0.1, false);
    assert!(solve(&d, &pen, &SolverConfig::default()).is_err());
}

#[test]
fn single_precision_tracks_double_precision() {
    let d64 = synth_generate::<f64>(&SynthSpec::new(200, 20, 1)).unwrap().dataset;
    let d32 = synth_generate::<f32>(&SynthSpec::new(200, 20, 1)).unwrap().dataset;
    let cfg64 = SolverConfig {
        blocks: 2,
        max_iter: 300,
        ..SolverConfig::default()
    };
    let cfg32 = SolverConfig {
        blocks: 2,
        max_iter: 300,
        ..SolverConfig::<f32>::default()
    };
    let fit64 = solve(&d64, &PenaltySpec::uniform(PenaltyKind::WeightedL1, 20, 5.0, false), &cfg64).unwrap();
    let fit32 = solve(&d32, &PenaltySpec::uniform(PenaltyKind::WeightedL1, 20, 5.0f32, false), &cfg32).unwrap();
    assert_eq!(fit32.beta.len(), 20);
    for (a, b) in fit32.beta.iter().zip(&fit64.beta) {
        assert!(a.is_finite());
        assert!((*a as f64 - b).abs() < 1e-2, "{a} vs {b}");
    }
}
