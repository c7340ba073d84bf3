#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use qpadm_core::{Dataset, DenseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct LpFit {
    pub objective: f64,
    pub beta: Vec<f64>,
}

fn free_coefficients(lp: &mut Problem, weights: &[f64]) -> Vec<(Variable, Variable)> {
    weights
        .iter()
        .map(|&w| (lp.add_var(w, (0.0, f64::INFINITY)), lp.add_var(w, (0.0, f64::INFINITY))))
        .collect()
}

/// `min Σ ρ_τ(y − Xβ) + Σ w_j|β_j|` as an LP over β = u − v and residual slacks.
pub fn quantile_lasso(x: &DenseMatrix<f64>, y: &[f64], tau: f64, weights: &[f64]) -> LpFit {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let coef = free_coefficients(&mut lp, weights);
    for (i, &yi) in y.iter().enumerate() {
        let pos = lp.add_var(tau, (0.0, f64::INFINITY));
        let neg = lp.add_var(1.0 - tau, (0.0, f64::INFINITY));
        let mut row = vec![(pos, 1.0), (neg, -1.0)];
        for (j, &(u, v)) in coef.iter().enumerate() {
            row.push((u, x[(i, j)]));
            row.push((v, -x[(i, j)]));
        }
        lp.add_constraint(&row[..], ComparisonOp::Eq, yi);
    }
    let sol = lp.solve().expect("LP solvable");
    LpFit {
        objective: sol.objective(),
        beta: coef.iter().map(|&(u, v)| sol[u] - sol[v]).collect(),
    }
}

/// `min Σ (1 − y_i x_iᵀβ)₊ + Σ w_j|β_j|` on raw features and ±1 labels.
pub fn l1_hinge_svm(x: &DenseMatrix<f64>, labels: &[f64], weights: &[f64]) -> LpFit {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let coef = free_coefficients(&mut lp, weights);
    for (i, &yi) in labels.iter().enumerate() {
        let s = lp.add_var(1.0, (0.0, f64::INFINITY));
        // s + y xᵀ(u − v) ≥ 1
        let mut row = vec![(s, 1.0)];
        for (j, &(u, v)) in coef.iter().enumerate() {
            row.push((u, yi * x[(i, j)]));
            row.push((v, -yi * x[(i, j)]));
        }
        lp.add_constraint(&row[..], ComparisonOp::Ge, 1.0);
    }
    let sol = lp.solve().expect("LP solvable");
    LpFit {
        objective: sol.objective(),
        beta: coef.iter().map(|&(u, v)| sol[u] - sol[v]).collect(),
    }
}

/// Small Gaussian regression problem with a known coefficient vector.
pub fn gaussian_regression(n: usize, beta: &[f64], noise: f64, seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = beta.len();
    let x = DenseMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    let y = (0..n)
        .map(|i| (0..p).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + noise * rng.gen_range(-1.0..1.0))
        .collect();
    Dataset::regression(x, y, false).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}
