//! Check loss, its slack decomposition and the two proximal maps used by every solver.

use crate::error::{Error, Result};
use crate::model::QuantileParam;
use crate::scalar::Real;

/// `ρ_τ(u) = u(τ − 1{u < 0})`.
pub fn check_loss<T: Real>(u: T, tau: T) -> Result<T> {
    Ok(QuantileParam::new(tau)?.loss(u))
}

/// Splits residuals into positive and negative parts: `ξ = (r)₊`, `η = (−r)₊`.
pub fn slack_decompose<T: Real>(r: &[T]) -> (Vec<T>, Vec<T>) {
    let xi = r.iter().map(|&v| v.max(T::zero())).collect();
    let eta = r.iter().map(|&v| (-v).max(T::zero())).collect();
    (xi, eta)
}

/// `τ·1ᵀξ + (1−τ)·1ᵀη`.
pub fn slack_objective<T: Real>(xi: &[T], eta: &[T], tau: T) -> T {
    let s_xi: T = xi.iter().copied().sum();
    let s_eta: T = eta.iter().copied().sum();
    tau * s_xi + (T::one() - tau) * s_eta
}

/// `argmin_r ρ_τ(r) + (μ/2)(r − u)²`. Points on the dead-zone boundary map to 0.
#[inline]
pub fn prox_check_loss<T: Real>(u: T, tau: T, mu: T) -> T {
    debug_assert!(mu > T::zero());
    let hi = tau / mu;
    let lo = (T::one() - tau) / mu;
    if u > hi {
        u - hi
    } else if u < -lo {
        u + lo
    } else {
        T::zero()
    }
}

#[inline]
pub(crate) fn soft_threshold<T: Real>(v: T, t: T) -> T {
    let a = v.abs() - t;
    if a > T::zero() {
        a.copysign(v)
    } else {
        T::zero()
    }
}

/// Componentwise `sign(vⱼ)·max(|vⱼ| − wⱼ/c, 0)`.
pub fn prox_weighted_l1<T: Real>(v: &[T], w: &[T], c: T) -> Result<Vec<T>> {
    if !(c > T::zero()) {
        return Err(Error::param("c", format!("{c} must be positive")));
    }
    if v.len() != w.len() {
        return Err(Error::Dimension {
            expected: v.len(),
            actual: w.len(),
        });
    }
    Ok(v.iter().zip(w).map(|(&vj, &wj)| soft_threshold(vj, wj / c)).collect())
}
