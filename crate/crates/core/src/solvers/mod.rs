//! The four parallel ADMM schemes over an `M`-block row partition.
//!
//! Block updates within a sweep run concurrently on the rayon pool; the
//! central reduction always sums block messages in block order, so results
//! are bit-identical regardless of the number of worker threads.

mod problem;
mod state;
mod trace;
pub mod updates;

use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use problem::{BlockData, Problem};
pub use state::{BlockState, CentralState, SolverState};
pub use trace::{IterationTrace, TraceRecord};

use crate::error::{Error, Result};
use crate::loss::prox_check_loss;
use crate::model::{Dataset, PenaltyKind, PenaltySpec, SolverConfig, Variant};
use crate::scalar::{dist2, norm2, Real};
use trace::RecordValues;
use updates::{
    clamp_nonneg, correct_modified, correct_standard, ridge_rhs_solve, update_beta_central, update_beta_m, update_eta,
    update_xi,
};

/// Iterates whose magnitude exceeds this are treated as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub beta: Vec<T>,
    pub iterations: usize,
    pub outcome: Outcome,
    pub trace: IterationTrace,
    /// Final iterate, usable as a warm start on the same [`Problem`].
    pub state: SolverState<T>,
    pub elapsed: Duration,
}

impl<T: Real> FitResult<T> {
    pub fn converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }

    /// Objective recorded at the last iteration.
    pub fn objective(&self) -> Option<f64> {
        self.trace.last().map(|r| r.objective)
    }
}

/// Fits a weighted-ℓ1 penalized model; SCAD/MCP go through [`crate::nonconvex::lla_solve`].
pub fn solve<T: Real>(data: &Dataset<T>, penalty: &PenaltySpec<T>, cfg: &SolverConfig<T>) -> Result<FitResult<T>> {
    if penalty.kind != PenaltyKind::WeightedL1 {
        return Err(Error::param("penalty", "folded-concave penalties are solved through the LLA driver"));
    }
    penalty.validate(data.p(), data.has_intercept())?;
    let problem = Problem::new(data, cfg.blocks)?;
    Admm::new(&problem, penalty.lambda.clone(), cfg, None)?.run()
}

/// Fits on a prepared problem with explicit ℓ1 weights and an optional warm start.
pub fn solve_problem<T: Real>(
    problem: &Problem<'_, T>,
    weights: &[T],
    cfg: &SolverConfig<T>,
    warm: Option<SolverState<T>>,
) -> Result<FitResult<T>> {
    Admm::new(problem, weights.to_vec(), cfg, warm)?.run()
}

/// Iteration state machine for one fit.
pub struct Admm<'p, 'a, T> {
    problem: &'p Problem<'a, T>,
    cfg: SolverConfig<T>,
    weights: Vec<T>,
    state: SolverState<T>,
    iteration: usize,
    trace: IterationTrace,
}

impl<'p, 'a, T: Real> Admm<'p, 'a, T> {
    pub fn new(
        problem: &'p Problem<'a, T>,
        weights: Vec<T>,
        cfg: &SolverConfig<T>,
        warm: Option<SolverState<T>>,
    ) -> Result<Self> {
        cfg.validate(problem.data.task())?;
        let p = problem.p();
        if weights.len() != p {
            return Err(Error::Dimension {
                expected: p,
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::param("lambda", "weights must be finite and nonnegative"));
        }
        if cfg.blocks != problem.num_blocks() {
            return Err(Error::param(
                "blocks",
                format!("config asks for {} blocks, problem has {}", cfg.blocks, problem.num_blocks()),
            ));
        }
        let baseline = cfg.variant == Variant::Qpadm;
        let state = match warm {
            Some(s) => {
                check_warm(&s, problem, baseline)?;
                s
            }
            None => initial_state(problem, cfg.init_value, baseline),
        };
        Ok(Self {
            problem,
            cfg: cfg.clone(),
            weights,
            state,
            iteration: 0,
            trace: IterationTrace::default(),
        })
    }

    pub fn state(&self) -> &SolverState<T> {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn trace(&self) -> &IterationTrace {
        &self.trace
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    pub fn set_weights(&mut self, w: Vec<T>) -> Result<()> {
        if w.len() != self.weights.len() {
            return Err(Error::Dimension {
                expected: self.weights.len(),
                actual: w.len(),
            });
        }
        self.weights = w;
        Ok(())
    }

    /// State with any deferred dual update applied, i.e. the iterate `(b, c, d)` proper.
    pub fn settled_state(&self) -> SolverState<T> {
        let mut s = self.state.clone();
        if s.dual_pending {
            let mu = self.cfg.mu;
            let beta_tilde = s.central.beta_tilde.clone();
            for (b, blk) in s.blocks.iter_mut().zip(&self.problem.blocks) {
                apply_pending_dual(b, blk, &beta_tilde, mu);
            }
            s.dual_pending = false;
        }
        s
    }

    /// Performs one full iteration and returns the stopping statistic.
    pub fn step(&mut self) -> Result<T> {
        let cfg = &self.cfg;
        let blocks = &self.problem.blocks;
        let beta_prev = self.state.central.beta.clone();
        let sign = if cfg.faulty_correction { T::one() } else { -T::one() };

        let clamped: T = match cfg.variant {
            Variant::Qpadm | Variant::QpadmSlack | Variant::QpadmSlackGb => {
                let alphas = messages(&self.state.blocks, cfg.mu);
                let beta = update_beta_central(&alphas, &self.weights, cfg.mu)?;
                let gb = cfg.variant == Variant::QpadmSlackGb;
                let out = self
                    .state
                    .blocks
                    .par_iter_mut()
                    .zip(blocks.par_iter())
                    .map(|(s, b)| {
                        if cfg.variant == Variant::Qpadm {
                            sweep_baseline(s, b, &beta, cfg).map(|_| T::zero())
                        } else {
                            sweep_standard(s, b, &beta, cfg, gb, sign)
                        }
                    })
                    .collect::<Result<Vec<T>>>()?;
                self.state.central.beta = beta;
                out.into_iter().fold(T::zero(), |a, c| a + c)
            }
            Variant::MQpadmSlackGb => {
                let pending = self.state.dual_pending;
                let central = &self.state.central;
                let out = self
                    .state
                    .blocks
                    .par_iter_mut()
                    .zip(blocks.par_iter())
                    .map(|(s, b)| sweep_modified(s, b, central, pending, cfg, sign))
                    .collect::<Result<Vec<(Vec<T>, T)>>>()?;
                let mut alphas = Vec::with_capacity(out.len());
                let mut clamped = T::zero();
                for (a, c) in out {
                    alphas.push(a);
                    clamped = clamped + c;
                }
                let beta_tilde = update_beta_central(&alphas, &self.weights, cfg.mu)?;
                let central = &mut self.state.central;
                updates::relax(cfg.nu, &mut central.beta, &beta_tilde);
                central.beta_tilde = beta_tilde;
                self.state.dual_pending = true;
                clamped
            }
        };
        self.iteration += 1;

        let beta = &self.state.central.beta;
        let rel_change = dist2(beta, &beta_prev) / norm2(beta).max(T::one());
        let bound = T::lit(DIVERGENCE_BOUND);
        let block_max = self
            .state
            .blocks
            .iter()
            .map(BlockState::max_abs)
            .fold(T::zero(), |m, x| if x.is_nan() { x } else { m.max(x) });
        if !rel_change.is_finite() || !(norm2(beta) <= bound) || !(block_max <= bound) {
            return Err(Error::Diverged {
                iteration: self.iteration,
            });
        }

        let (consensus, fit) = self
            .state
            .blocks
            .par_iter()
            .zip(blocks.par_iter())
            .map(|(s, b)| (dist2(&s.beta_m, beta), fit_residual(s, b)))
            .collect::<Vec<_>>()
            .into_iter()
            .fold((T::zero(), T::zero()), |(c, f), (c2, f2)| (c.max(c2), f.max(f2)));
        let objective = self.objective(beta);
        self.trace.push(RecordValues {
            objective,
            consensus,
            fit,
            rel_change,
            clamped,
        });
        Ok(rel_change)
    }

    /// Weighted-ℓ1 penalized objective at `beta`, summed block by block.
    pub fn objective(&self, beta: &[T]) -> T {
        let tau = self.cfg.tau;
        let losses: Vec<T> = self
            .problem
            .blocks
            .par_iter()
            .map(|b| {
                let fit = b.x.mul_vec(beta);
                b.y.iter().zip(&fit).map(|(&y, &f)| tau.loss(y - f)).sum::<T>()
            })
            .collect();
        let loss = losses.into_iter().fold(T::zero(), |a, b| a + b);
        let pen = beta
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |a, (&b, &w)| a + w * b.abs());
        loss + pen
    }

    /// Iterates until the stopping rule holds or `max_iter` is reached.
    pub fn run(mut self) -> Result<FitResult<T>> {
        let start = Instant::now();
        let mut outcome = Outcome::MaxIterations;
        while self.iteration < self.cfg.max_iter {
            if self.step()? <= self.cfg.tol && self.iteration >= self.cfg.min_iter {
                outcome = Outcome::Converged;
                break;
            }
        }
        Ok(FitResult {
            beta: self.state.central.beta.clone(),
            iterations: self.iteration,
            outcome,
            trace: self.trace,
            state: self.state,
            elapsed: start.elapsed(),
        })
    }
}

fn initial_state<T: Real>(problem: &Problem<'_, T>, v: T, baseline: bool) -> SolverState<T> {
    let p = problem.p();
    let blocks = problem
        .blocks
        .par_iter()
        .map(|b| {
            let mut s = BlockState::filled(b.n(), p, v, baseline);
            s.xb = b.x.mul_vec(&s.beta_m);
            s
        })
        .collect();
    SolverState {
        central: CentralState {
            beta: vec![v; p],
            beta_tilde: vec![v; p],
        },
        blocks,
        dual_pending: false,
    }
}

fn check_warm<T: Real>(s: &SolverState<T>, problem: &Problem<'_, T>, baseline: bool) -> Result<()> {
    let p = problem.p();
    let mismatch = |expected, actual| Err(Error::Dimension { expected, actual });
    if s.blocks.len() != problem.num_blocks() {
        return mismatch(problem.num_blocks(), s.blocks.len());
    }
    if s.central.beta.len() != p {
        return mismatch(p, s.central.beta.len());
    }
    for (b, d) in s.blocks.iter().zip(&problem.blocks) {
        let n = d.n();
        let split = if baseline { b.r.len() } else { b.xi.len() };
        for len in [b.beta_m.len(), b.d.len()] {
            if len != p {
                return mismatch(p, len);
            }
        }
        for len in [b.e.len(), b.xb.len(), split] {
            if len != n {
                return mismatch(n, len);
            }
        }
    }
    Ok(())
}

fn messages<T: Real>(blocks: &[BlockState<T>], mu: T) -> Vec<Vec<T>> {
    let inv = mu.recip();
    blocks
        .iter()
        .map(|s| s.beta_m.iter().zip(&s.d).map(|(&b, &d)| b + d * inv).collect())
        .collect()
}

fn fit_residual<T: Real>(s: &BlockState<T>, b: &BlockData<T>) -> T {
    let n = b.n();
    let sq: T = if s.r.is_empty() {
        (0..n).map(|i| (b.y[i] - s.xb[i] - s.xi[i] + s.eta[i]).powi(2)).sum()
    } else {
        (0..n).map(|i| (b.y[i] - s.xb[i] - s.r[i]).powi(2)).sum()
    };
    sq.sqrt()
}

/// QPADM: r → βₘ → duals, after the central β-update.
fn sweep_baseline<T: Real>(s: &mut BlockState<T>, b: &BlockData<T>, beta: &[T], cfg: &SolverConfig<T>) -> Result<()> {
    let (mu, tau) = (cfg.mu, cfg.tau.value());
    let inv = mu.recip();
    let n = b.n();
    for i in 0..n {
        s.r[i] = prox_check_loss(b.y[i] - s.xb[i] + s.e[i] * inv, tau, mu);
    }
    let u: Vec<T> = (0..n).map(|i| b.y[i] - s.r[i] + s.e[i] * inv).collect();
    s.beta_m = ridge_rhs_solve(b, beta, &s.d, &u, mu)?;
    s.xb = b.x.mul_vec(&s.beta_m);
    for i in 0..n {
        s.e[i] = s.e[i] + mu * (b.y[i] - s.xb[i] - s.r[i]);
    }
    for (dj, (&bm, &bj)) in s.d.iter_mut().zip(s.beta_m.iter().zip(beta)) {
        *dj = *dj + mu * (bm - bj);
    }
    Ok(())
}

/// Standard slack sweep ξ → η → βₘ → duals, optionally followed by the (η, βₘ) correction.
fn sweep_standard<T: Real>(
    s: &mut BlockState<T>,
    b: &BlockData<T>,
    beta: &[T],
    cfg: &SolverConfig<T>,
    gb: bool,
    sign: T,
) -> Result<T> {
    let (mu, tau) = (cfg.mu, cfg.tau.value());
    let xi = update_xi(&b.y, &s.xb, &s.eta, &s.e, mu, tau);
    let eta_t = update_eta(&b.y, &s.xb, &xi, &s.e, mu, tau);
    let bm_t = update_beta_m(b, beta, &s.d, &xi, &eta_t, &s.e, mu)?;
    let xb_t = b.x.mul_vec(&bm_t);
    for (dj, (&bm, &bj)) in s.d.iter_mut().zip(bm_t.iter().zip(beta)) {
        *dj = *dj + mu * (bm - bj);
    }
    for i in 0..b.n() {
        s.e[i] = s.e[i] + mu * (b.y[i] - xb_t[i] - xi[i] + eta_t[i]);
    }
    s.xi = xi;
    if !gb {
        s.eta = eta_t;
        s.beta_m = bm_t;
        s.xb = xb_t;
        return Ok(T::zero());
    }
    let x_delta: Vec<T> = s.xb.iter().zip(&xb_t).map(|(&a, &t)| a - t).collect();
    correct_standard(cfg.nu, &mut s.eta, &eta_t, &mut s.beta_m, &bm_t, &x_delta, sign);
    s.xb = b.x.mul_vec(&s.beta_m);
    s.eta_tilde = eta_t;
    Ok(if cfg.clamp_slack { clamp_nonneg(&mut s.eta) } else { T::zero() })
}

/// `dₘ ← dₘ + μ(βₘ − β̃)`, `eₘ ← eₘ + μ(ỹₘ − X̃ₘβₘ − ξ̃ₘ + η̃ₘ)` from the previous sweep.
fn apply_pending_dual<T: Real>(s: &mut BlockState<T>, b: &BlockData<T>, beta_tilde: &[T], mu: T) {
    for (dj, (&bm, &bt)) in s.d.iter_mut().zip(s.beta_m.iter().zip(beta_tilde)) {
        *dj = *dj + mu * (bm - bt);
    }
    for i in 0..b.n() {
        s.e[i] = s.e[i] + mu * (b.y[i] - s.xb[i] - s.xi_tilde[i] + s.eta_tilde[i]);
    }
}

/// Modified sweep βₘ → ξ̃ → η̃ with the addition-only (ξ, η) correction; returns the block message.
fn sweep_modified<T: Real>(
    s: &mut BlockState<T>,
    b: &BlockData<T>,
    central: &CentralState<T>,
    pending: bool,
    cfg: &SolverConfig<T>,
    sign: T,
) -> Result<(Vec<T>, T)> {
    let (mu, tau) = (cfg.mu, cfg.tau.value());
    if pending {
        apply_pending_dual(s, b, &central.beta_tilde, mu);
    }
    s.beta_m = update_beta_m(b, &central.beta, &s.d, &s.xi, &s.eta, &s.e, mu)?;
    s.xb = b.x.mul_vec(&s.beta_m);
    s.xi_tilde = update_xi(&b.y, &s.xb, &s.eta, &s.e, mu, tau);
    s.eta_tilde = update_eta(&b.y, &s.xb, &s.xi_tilde, &s.e, mu, tau);
    correct_modified(cfg.nu, &mut s.xi, &s.xi_tilde, &mut s.eta, &s.eta_tilde, sign);
    let clamped = if cfg.clamp_slack {
        clamp_nonneg(&mut s.xi) + clamp_nonneg(&mut s.eta)
    } else {
        T::zero()
    };
    let inv = mu.recip();
    let alpha = s.beta_m.iter().zip(&s.d).map(|(&bm, &d)| bm + d * inv).collect();
    Ok((alpha, clamped))
}

#[cfg(test)]
mod tests;
