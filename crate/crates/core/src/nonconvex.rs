//! Local linear approximation for SCAD and MCP penalties.
//!
//! Each outer step majorizes the folded-concave penalty at the current estimate
//! by a weighted ℓ1 penalty and re-solves with the ADMM engine, warm-started
//! from the previous solver state.

use std::time::Duration;

use crate::error::{Error, Result};
use crate::model::{Dataset, PenaltyKind, PenaltySpec, SolverConfig};
use crate::scalar::{dist2, norm2, Real};
use crate::solvers::{solve_problem, FitResult, Problem, SolverState};

/// SCAD derivative at `|β|`.
pub fn scad_derivative<T: Real>(abs_beta: T, lambda: T, a: T) -> Result<T> {
    if !(a > T::lit(2.0)) {
        return Err(Error::param("a", format!("SCAD requires a > 2, got {a}")));
    }
    Ok(scad_weight(abs_beta, lambda, a))
}

/// MCP derivative at `|β|`.
pub fn mcp_derivative<T: Real>(abs_beta: T, lambda: T, a: T) -> Result<T> {
    if !(a > T::one()) {
        return Err(Error::param("a", format!("MCP requires a > 1, got {a}")));
    }
    Ok(mcp_weight(abs_beta, lambda, a))
}

fn scad_weight<T: Real>(t: T, l: T, a: T) -> T {
    if t <= l {
        l
    } else if t < a * l {
        (a * l - t) / (a - T::one())
    } else {
        T::zero()
    }
}

fn mcp_weight<T: Real>(t: T, l: T, a: T) -> T {
    if t <= a * l {
        l - t / a
    } else {
        T::zero()
    }
}

/// LLA weights `∇P_{λⱼ}(|βⱼ|)`; weighted ℓ1 returns λ unchanged.
pub fn lla_weights<T: Real>(penalty: &PenaltySpec<T>, beta: &[T]) -> Vec<T> {
    beta.iter()
        .zip(&penalty.lambda)
        .map(|(&b, &l)| match penalty.kind {
            PenaltyKind::WeightedL1 => l,
            PenaltyKind::Scad => scad_weight(b.abs(), l, penalty.a),
            PenaltyKind::Mcp => mcp_weight(b.abs(), l, penalty.a),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LlaConfig<T> {
    pub max_outer: usize,
    pub inner: SolverConfig<T>,
    pub warm_start: bool,
}

impl<T: Real> LlaConfig<T> {
    pub fn new(inner: SolverConfig<T>) -> Self {
        Self {
            max_outer: 3,
            inner,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LlaResult<T> {
    /// Final weighted-ℓ1 fit.
    pub fit: FitResult<T>,
    /// Number of weighted-ℓ1 solves performed.
    pub outer_steps: usize,
    /// Inner iteration count of each solve.
    pub inner_iterations: Vec<usize>,
    /// Weights used by the final solve.
    pub weights: Vec<T>,
    pub elapsed: Duration,
}

impl<T: Real> LlaResult<T> {
    pub fn beta(&self) -> &[T] {
        &self.fit.beta
    }

    /// All ADMM iterations across the outer loop.
    pub fn total_iterations(&self) -> usize {
        self.inner_iterations.iter().sum()
    }
}

pub fn lla_solve<T: Real>(data: &Dataset<T>, penalty: &PenaltySpec<T>, cfg: &LlaConfig<T>) -> Result<LlaResult<T>> {
    let problem = Problem::new(data, cfg.inner.blocks)?;
    lla_solve_problem(&problem, penalty, cfg, None)
}

/// Runs the outer loop on a prepared problem, optionally starting from a previous solver state.
pub fn lla_solve_problem<T: Real>(
    problem: &Problem<'_, T>,
    penalty: &PenaltySpec<T>,
    cfg: &LlaConfig<T>,
    warm: Option<SolverState<T>>,
) -> Result<LlaResult<T>> {
    if cfg.max_outer == 0 {
        return Err(Error::param("max_outer", "must be at least 1"));
    }
    penalty.validate(problem.p(), problem.data.has_intercept())?;
    let mut weights = penalty.lambda.clone();
    let mut fit = solve_problem(problem, &weights, &cfg.inner, warm)?;
    let mut inner_iterations = vec![fit.iterations];
    let mut elapsed = fit.elapsed;
    while inner_iterations.len() < cfg.max_outer && penalty.kind != PenaltyKind::WeightedL1 {
        let next = lla_weights(penalty, &fit.beta);
        let change = dist2(&next, &weights);
        if change == T::zero() || change <= cfg.inner.tol * norm2(&weights) {
            break;
        }
        weights = next;
        let start = cfg.warm_start.then(|| fit.state.clone());
        fit = solve_problem(problem, &weights, &cfg.inner, start)?;
        inner_iterations.push(fit.iterations);
        elapsed += fit.elapsed;
    }
    Ok(LlaResult {
        outer_steps: inner_iterations.len(),
        fit,
        inner_iterations,
        weights,
        elapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scad_examples() {
        assert_eq!(scad_derivative(0.5, 1.0, 3.7).unwrap(), 1.0);
        assert!((scad_derivative(2.0f64, 1.0, 3.7).unwrap() - 1.7 / 2.7).abs() < 1e-12);
        assert!((scad_derivative(2.0f64, 1.0, 3.7).unwrap() - 0.62963).abs() < 1e-5);
        assert_eq!(scad_derivative(5.0, 1.0, 3.7).unwrap(), 0.0);
        assert!(scad_derivative(1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn mcp_examples() {
        assert_eq!(mcp_derivative(0.0, 1.0, 3.0).unwrap(), 1.0);
        assert!((mcp_derivative(1.5f64, 1.0, 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mcp_derivative(4.0, 1.0, 3.0).unwrap(), 0.0);
        assert!(mcp_derivative(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn continuous_at_knots() {
        let (l, a) = (0.8f64, 3.7f64);
        for knot in [l, a * l] {
            let lo = scad_derivative(knot - 1e-9, l, a).unwrap();
            let hi = scad_derivative(knot + 1e-9, l, a).unwrap();
            assert!((lo - hi).abs() < 1e-8);
        }
        let a = 3.0f64;
        let lo = mcp_derivative(a * l - 1e-9, l, a).unwrap();
        let hi = mcp_derivative(a * l + 1e-9, l, a).unwrap();
        assert!((lo - hi).abs() < 1e-8);
    }

    #[test]
    fn weights_vanish_on_large_coefficients() {
        let pen = PenaltySpec::uniform(PenaltyKind::Scad, 4, 0.5, false);
        let w = lla_weights(&pen, &[3.0, 0.0, -2.0, 0.1]);
        assert_eq!(w, vec![0.0, 0.5, 0.0, 0.5]);
    }

    proptest! {
        #[test]
        fn derivatives_nonincreasing_and_bounded(t1 in 0.0f64..10.0, t2 in 0.0f64..10.0, l in 0.0f64..3.0) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            for (f, a) in [(scad_derivative as fn(f64, f64, f64) -> Result<f64>, 3.7), (mcp_derivative, 3.0)] {
                let (wl, wh) = (f(lo, l, a).unwrap(), f(hi, l, a).unwrap());
                prop_assert!(wh <= wl + 1e-15);
                prop_assert!((0.0..=l).contains(&wl) && (0.0..=l).contains(&wh));
            }
        }
    }
}
