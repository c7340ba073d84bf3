use crate::error::{Error, Result};
use crate::model::{SolverConfig, Variant};
use crate::scalar::Real;
use crate::solvers::{Admm, IterationTrace, Problem};

use super::constraints::{ConstraintSystem, Ordering};
use super::gb::GbMatrices;

/// Ordering whose prediction–correction form a GB variant follows.
pub fn ordering_of(variant: Variant) -> Option<Ordering> {
    match variant {
        Variant::QpadmSlackGb => Some(Ordering::Standard),
        Variant::MQpadmSlackGb => Some(Ordering::Modified),
        _ => None,
    }
}

/// The sequence `g⁰, g¹, …, gᴷ` of a GB run together with its solver trace.
#[derive(Debug, Clone)]
pub struct RecordedRun<T> {
    pub points: Vec<Vec<T>>,
    pub trace: IterationTrace,
}

/// Runs `iterations` steps of a GB variant and records `g` after every step.
pub fn record_run<T: Real>(
    problem: &Problem<'_, T>,
    cs: &ConstraintSystem<T>,
    weights: &[T],
    cfg: &SolverConfig<T>,
    iterations: usize,
) -> Result<RecordedRun<T>> {
    if ordering_of(cfg.variant) != Some(cs.ordering) {
        return Err(Error::param("variant", format!("{} does not match the constraint ordering", cfg.variant)));
    }
    let mut admm = Admm::new(problem, weights.to_vec(), cfg, None)?;
    let mut points = Vec::with_capacity(iterations + 1);
    points.push(cs.iterate(&admm.settled_state())?.g());
    for _ in 0..iterations {
        admm.step()?;
        points.push(cs.iterate(&admm.settled_state())?.g());
    }
    Ok(RecordedRun {
        points,
        trace: admm.trace().clone(),
    })
}

/// Proxy for `g^∞`: the settled iterate once `‖gᵏ − gᵏ⁺¹‖_∞ ≤ tol·max(1, ‖gᵏ‖_∞)`.
///
/// The test is on the whole iterate because `β` alone can stall at zero
/// while the slacks and duals are still moving.
pub fn limit_proxy<T: Real>(
    problem: &Problem<'_, T>,
    cs: &ConstraintSystem<T>,
    weights: &[T],
    cfg: &SolverConfig<T>,
    tol: T,
    max_iter: usize,
) -> Result<Vec<T>> {
    const CHECK_EVERY: usize = 32;
    let mut admm = Admm::new(problem, weights.to_vec(), cfg, None)?;
    let mut done = 0;
    while done < max_iter {
        let burst = CHECK_EVERY.min(max_iter - done);
        for _ in 1..burst {
            admm.step()?;
        }
        let g = cs.iterate(&admm.settled_state())?.g();
        admm.step()?;
        done += burst;
        let next = cs.iterate(&admm.settled_state())?.g();
        let change = g.iter().zip(&next).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        let scale = next.iter().fold(T::one(), |m, &v| m.max(v.abs()));
        if change <= tol * scale {
            break;
        }
    }
    Ok(cs.iterate(&admm.settled_state())?.g())
}

/// `‖gᵏ − gᵏ⁺¹‖_H` and `‖gᵏ − g^∞‖_H` along a recorded run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HNormTrace {
    pub step: Vec<f64>,
    pub to_limit: Vec<f64>,
}

pub fn h_norm_trace<T: Real>(points: &[Vec<T>], limit: &[T], gb: &GbMatrices<T>) -> Result<HNormTrace> {
    let mut out = HNormTrace::default();
    for (k, g) in points.iter().enumerate() {
        out.to_limit.push(gb.h_dist(g, limit)?.as_f64());
        if let Some(next) = points.get(k + 1) {
            out.step.push(gb.h_dist(g, next)?.as_f64());
        }
    }
    Ok(out)
}

/// Largest increase `vₖ₊₁ − vₖ` over the sequence (≤ 0 for a nonincreasing one).
pub fn max_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

impl HNormTrace {
    /// Largest increase of `‖gᵏ − g^∞‖²_H`.
    pub fn contraction_excess(&self) -> f64 {
        let sq: Vec<f64> = self.to_limit.iter().map(|v| v * v).collect();
        max_increase(&sq)
    }

    /// Largest increase of `‖gᵏ − gᵏ⁺¹‖_H`.
    pub fn residual_excess(&self) -> f64 {
        max_increase(&self.step)
    }

    /// `maxₖ (k+1)·‖gᵏ − gᵏ⁺¹‖²_H / ‖g⁰ − g^∞‖²_H`; bounded along an O(1/K) run.
    pub fn rate_witness(&self) -> f64 {
        let base = self.to_limit.first().map_or(0.0, |v| v * v);
        if base == 0.0 {
            return 0.0;
        }
        self.step
            .iter()
            .enumerate()
            .map(|(k, s)| (k + 1) as f64 * s * s / base)
            .fold(0.0, f64::max)
    }
}

/// Copies `‖gᵏ − gᵏ⁺¹‖_H` into the matching solver trace records.
pub fn annotate_trace(trace: &mut IterationTrace, h: &HNormTrace) {
    for (rec, &s) in trace.records.iter_mut().zip(&h.step) {
        rec.h_norm = Some(s);
    }
}
