use qpadm_core::data::{shuffled_order, synth_generate, SynthSpec, TRUE_SUPPORT};
use qpadm_core::metrics::selected;
use qpadm_core::nonconvex::{lla_solve, lla_weights, LlaConfig};
use qpadm_core::select::{default_grid, grid_search, hbic, lambda_max, GridOptions};
use qpadm_core::solvers::solve;
use qpadm_core::{Dataset, PenaltyKind, PenaltySpec, SolverConfig, ZERO_THRESHOLD};

fn benchmark(seed: u64) -> Dataset<f64> {
    synth_generate(&SynthSpec::new(2000, 100, seed)).unwrap().dataset
}

fn support(beta: &[f64], threshold: f64) -> Vec<usize> {
    selected(beta, threshold, false).into_iter().map(|j| j + 1).collect()
}

#[test]
fn hbic_path_recovers_true_support() {
    let data = benchmark(21);
    let cfg = SolverConfig::default();
    let grid = default_grid(lambda_max(&data, cfg.tau), 20, 0.01);
    let sel = grid_search(&data, &grid, &GridOptions::default(), &cfg).unwrap();
    let s = support(&sel.best.beta, ZERO_THRESHOLD);
    assert!(TRUE_SUPPORT.iter().all(|j| s.contains(j)), "{s:?}");
    assert_eq!(support(&sel.best.beta, 10.0 * ZERO_THRESHOLD), s);
    assert_eq!(support(&sel.best.beta, 0.1 * ZERO_THRESHOLD), s);
}

#[test]
fn selection_ignores_grid_order_and_single_points_win() {
    let data = synth_generate::<f64>(&SynthSpec::new(300, 30, 4)).unwrap().dataset;
    let cfg = SolverConfig::default();
    let grid = default_grid(lambda_max(&data, cfg.tau), 8, 0.02);
    let opts = GridOptions::default();
    let sorted = grid_search(&data, &grid, &opts, &cfg).unwrap();
    let mut shuffled = grid.clone();
    shuffled.swap(0, 5);
    shuffled.swap(2, 7);
    shuffled.reverse();
    let other = grid_search(&data, &shuffled, &opts, &cfg).unwrap();
    assert_eq!(sorted.best.lambda, other.best.lambda);
    let one = grid_search(&data, &[grid[3]], &opts, &cfg).unwrap();
    assert_eq!(one.best.lambda, grid[3]);
    assert_eq!(one.path.len(), 1);
}

#[test]
fn hbic_is_computed_on_pooled_rows() {
    let data = synth_generate::<f64>(&SynthSpec::new(300, 30, 6)).unwrap().dataset;
    let cfg = SolverConfig {
        blocks: 3,
        ..SolverConfig::default()
    };
    let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, 30, 5.0, false);
    let beta = solve(&data, &pen, &cfg).unwrap().beta;
    let h = hbic(&beta, &data, cfg.tau).unwrap();
    let permuted = data.select_rows(&shuffled_order(data.n(), 1));
    let again = hbic(&beta, &permuted, cfg.tau).unwrap();
    assert!((h.value - again.value).abs() < 1e-12);
    assert_eq!(h.support_size, again.support_size);
}

#[test]
fn folded_concave_paths_stay_within_the_lasso_support() {
    let data = benchmark(22);
    let cfg = SolverConfig::default();
    let grid = default_grid(lambda_max(&data, cfg.tau), 20, 0.01);
    let l1 = grid_search(&data, &grid, &GridOptions::default(), &cfg).unwrap();
    let l1_support = support(&l1.best.beta, ZERO_THRESHOLD);
    for kind in [PenaltyKind::Mcp, PenaltyKind::Scad] {
        let opts = GridOptions {
            kind,
            max_outer: 10,
            ..GridOptions::default()
        };
        let sel = grid_search(&data, &grid, &opts, &cfg).unwrap();
        assert!(sel.path.iter().all(|r| r.outer_steps <= 3), "{kind:?}");
        let s = support(&sel.best.beta, ZERO_THRESHOLD);
        assert!(s.iter().all(|j| l1_support.contains(j)), "{kind:?}: {s:?} vs {l1_support:?}");
        assert!(TRUE_SUPPORT.iter().all(|j| s.contains(j)), "{kind:?}: {s:?}");
    }
}

#[test]
fn warm_started_outer_steps_need_fewer_iterations() {
    let data = benchmark(23);
    let cfg = SolverConfig::default();
    let lambda = 0.01 * lambda_max(&data, cfg.tau);
    let pen = PenaltySpec::uniform(PenaltyKind::Mcp, 100, lambda, false);
    let lla = LlaConfig {
        max_outer: 10,
        ..LlaConfig::new(cfg)
    };
    let r = lla_solve(&data, &pen, &lla).unwrap();
    assert!((2..=3).contains(&r.outer_steps), "{} outer steps", r.outer_steps);
    let first = r.inner_iterations[0];
    assert!(r.inner_iterations[1..].iter().all(|&k| k < first), "{:?}", r.inner_iterations);
}

#[test]
fn zero_lambda_is_one_unpenalized_solve() {
    let data = synth_generate::<f64>(&SynthSpec::new(200, 20, 9)).unwrap().dataset;
    let cfg = SolverConfig {
        min_iter: 50,
        ..SolverConfig::default()
    };
    let scad = PenaltySpec::uniform(PenaltyKind::Scad, 20, 0.0, false);
    let r = lla_solve(&data, &scad, &LlaConfig::new(cfg.clone())).unwrap();
    assert_eq!(r.outer_steps, 1);
    let plain = solve(&data, &PenaltySpec::weighted_l1(vec![0.0; 20]), &cfg).unwrap();
    assert_eq!(r.fit.beta, plain.beta);
}

#[test]
fn scad_drops_the_penalty_on_large_coefficients() {
    let pen = PenaltySpec::uniform(PenaltyKind::Scad, 5, 1.0, false);
    let beta = [4.0, 0.0, -5.0, 0.0, 3.8];
    assert_eq!(lla_weights(&pen, &beta), vec![0.0, 1.0, 0.0, 1.0, 0.0]);
}
