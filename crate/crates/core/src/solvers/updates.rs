//! Closed-form subproblem solutions and the two back-substitution corrections.

use crate::error::{Error, Result};
use crate::loss::soft_threshold;
use crate::scalar::Real;

use super::problem::BlockData;

/// `(X̃ₘᵀX̃ₘ + I)⁻¹[(β_ref − dₘ/μ) + X̃ₘᵀ(ỹₘ − ξ + η + eₘ/μ)]`.
pub fn update_beta_m<T: Real>(
    block: &BlockData<T>,
    beta_ref: &[T],
    d: &[T],
    xi: &[T],
    eta: &[T],
    e: &[T],
    mu: T,
) -> Result<Vec<T>> {
    let n = block.n();
    for v in [xi, eta, e] {
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: v.len(),
            });
        }
    }
    let inv = mu.recip();
    let u: Vec<T> = (0..n).map(|i| block.y[i] - xi[i] + eta[i] + e[i] * inv).collect();
    ridge_rhs_solve(block, beta_ref, d, &u, mu)
}

/// Shared tail of the βₘ-updates: `(X̃ᵀX̃ + I)⁻¹[(β_ref − d/μ) + X̃ᵀu]`.
pub(crate) fn ridge_rhs_solve<T: Real>(block: &BlockData<T>, beta_ref: &[T], d: &[T], u: &[T], mu: T) -> Result<Vec<T>> {
    let p = block.x.cols();
    if beta_ref.len() != p || d.len() != p {
        return Err(Error::Dimension {
            expected: p,
            actual: if beta_ref.len() != p { beta_ref.len() } else { d.len() },
        });
    }
    let inv = mu.recip();
    let mut rhs = block.x.tr_mul_vec(u);
    for ((r, &b), &dj) in rhs.iter_mut().zip(beta_ref).zip(d) {
        *r = *r + b - dj * inv;
    }
    block.factor.apply(&rhs)
}

/// `max{ỹ − X̃β + η + e/μ − τ/μ, 0}` with `xb = X̃β`.
pub fn update_xi<T: Real>(y: &[T], xb: &[T], eta: &[T], e: &[T], mu: T, tau: T) -> Vec<T> {
    let inv = mu.recip();
    let shift = tau * inv;
    (0..y.len())
        .map(|i| (y[i] - xb[i] + eta[i] + e[i] * inv - shift).max(T::zero()))
        .collect()
}

/// `max{(τ−1)/μ − (ỹ − X̃β − ξ + e/μ), 0}` with `xb = X̃β`.
pub fn update_eta<T: Real>(y: &[T], xb: &[T], xi: &[T], e: &[T], mu: T, tau: T) -> Vec<T> {
    let inv = mu.recip();
    let shift = (tau - T::one()) * inv;
    (0..y.len())
        .map(|i| (shift - (y[i] - xb[i] - xi[i] + e[i] * inv)).max(T::zero()))
        .collect()
}

/// Weighted-ℓ1 proximal step at the mean of the block messages: `prox_{w/(μM)}(mean αₘ)`.
pub fn update_beta_central<T: Real>(alphas: &[Vec<T>], w: &[T], mu: T) -> Result<Vec<T>> {
    let m = alphas.len();
    if m == 0 {
        return Err(Error::param("alphas", "at least one block message is required"));
    }
    let p = w.len();
    if let Some(a) = alphas.iter().find(|a| a.len() != p) {
        return Err(Error::Dimension {
            expected: p,
            actual: a.len(),
        });
    }
    let mf = T::from_count(m);
    let scale = mu * mf;
    // Summed in block order so results do not depend on scheduling.
    let mut mean = vec![T::zero(); p];
    for a in alphas {
        for (s, &v) in mean.iter_mut().zip(a) {
            *s = *s + v;
        }
    }
    Ok(mean
        .into_iter()
        .zip(w)
        .map(|(s, &wj)| soft_threshold(s / mf, wj / scale))
        .collect())
}

fn check_nu<T: Real>(nu: T) -> Result<()> {
    if nu > T::zero() && nu < T::one() {
        Ok(())
    } else {
        Err(Error::param("nu", format!("{nu} is outside (0, 1)")))
    }
}

/// `v ← (1−ν)v + νṽ`.
pub fn relax<T: Real>(nu: T, v: &mut [T], v_tilde: &[T]) {
    let keep = T::one() - nu;
    for (a, &t) in v.iter_mut().zip(v_tilde) {
        *a = keep * *a + nu * t;
    }
}

/// Standard-order correction of (ηₘ, βₘ).
///
/// `x_delta` is `X̃ₘ(βₘᵏ − β̃ₘ)`; `eta`/`beta_m` hold the previous iterate on entry.
pub fn gb_correct_standard<T: Real>(
    nu: T,
    eta: &mut [T],
    eta_tilde: &[T],
    beta_m: &mut [T],
    beta_m_tilde: &[T],
    x_delta: &[T],
) -> Result<()> {
    check_nu(nu)?;
    correct_standard(nu, eta, eta_tilde, beta_m, beta_m_tilde, x_delta, -T::one());
    Ok(())
}

pub(crate) fn correct_standard<T: Real>(
    nu: T,
    eta: &mut [T],
    eta_tilde: &[T],
    beta_m: &mut [T],
    beta_m_tilde: &[T],
    x_delta: &[T],
    sign: T,
) {
    relax(nu, eta, eta_tilde);
    for (a, &dx) in eta.iter_mut().zip(x_delta) {
        *a = *a + sign * nu * dx;
    }
    relax(nu, beta_m, beta_m_tilde);
}

/// Modified-order correction of (ξₘ, ηₘ); the central β uses [`relax`].
pub fn gb_correct_modified<T: Real>(nu: T, xi: &mut [T], xi_tilde: &[T], eta: &mut [T], eta_tilde: &[T]) -> Result<()> {
    check_nu(nu)?;
    correct_modified(nu, xi, xi_tilde, eta, eta_tilde, -T::one());
    Ok(())
}

pub(crate) fn correct_modified<T: Real>(nu: T, xi: &mut [T], xi_tilde: &[T], eta: &mut [T], eta_tilde: &[T], sign: T) {
    relax(nu, xi, xi_tilde);
    for ((a, &h), &ht) in xi.iter_mut().zip(eta.iter()).zip(eta_tilde) {
        *a = *a + sign * nu * (h - ht);
    }
    relax(nu, eta, eta_tilde);
}

/// Projects onto the nonnegative orthant, returning the total mass removed.
pub(crate) fn clamp_nonneg<T: Real>(v: &mut [T]) -> T {
    let mut removed = T::zero();
    for a in v.iter_mut() {
        if *a < T::zero() {
            removed = removed - *a;
            *a = T::zero();
        }
    }
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    fn block(rows: &[Vec<f64>], y: &[f64]) -> BlockData<f64> {
        BlockData::new(DenseMatrix::from_rows(rows).unwrap(), y.to_vec(), 0..y.len()).unwrap()
    }

    #[test]
    fn beta_m_examples() {
        let b = block(&[vec![0.0, 0.0]], &[0.0]);
        let z = update_beta_m(&b, &[0.0, 0.0], &[0.0, 0.0], &[0.0], &[0.0], &[0.0], 1.0).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
        let b = block(&[vec![1.0]], &[1.0]);
        let v = update_beta_m(&b, &[0.0], &[0.0], &[0.0], &[0.0], &[0.0], 1.0).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn beta_m_minimizes_its_lagrangian_block() {
        // Oracle: normal equations of
        //   dᵀ(b − β) + μ/2‖b − β‖² + eᵀ(y − Xb − ξ + η) + μ/2‖y − Xb − ξ + η‖²
        // solved by Gauss–Jordan elimination on the dense 2×2 system.
        let rows = vec![vec![0.3, -1.2], vec![2.0, 0.7], vec![-0.5, 1.1]];
        let y = [1.0, -0.4, 0.9];
        let b = block(&rows, &y);
        let (beta, d) = ([0.2, -0.3], [0.05, 0.4]);
        let (xi, eta, e) = ([0.1, 0.0, 0.7], [0.0, 0.3, 0.2], [-0.2, 0.6, 0.1]);
        let mu = 1.7;
        let got = update_beta_m(&b, &beta, &d, &xi, &eta, &e, mu).unwrap();

        let x = DenseMatrix::from_rows(&rows).unwrap();
        let a = x.gram().scale(mu).add(&DenseMatrix::identity(2).scale(mu));
        let u: Vec<f64> = (0..3).map(|i| y[i] - xi[i] + eta[i]).collect();
        let xtu = x.tr_mul_vec(&u);
        let xte = x.tr_mul_vec(&e);
        let rhs: Vec<f64> = (0..2).map(|j| mu * beta[j] - d[j] + xte[j] + mu * xtu[j]).collect();
        let (a00, a01, a11) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
        let det = a00 * a11 - a01 * a01;
        let want = [(a11 * rhs[0] - a01 * rhs[1]) / det, (a00 * rhs[1] - a01 * rhs[0]) / det];
        for j in 0..2 {
            assert!((got[j] - want[j]).abs() < 1e-8, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn xi_examples() {
        // ỹ − X̃β = 0.5, η = 0.1, e/μ = 0.2, τ/μ = 0.7
        let v = update_xi(&[0.5f64], &[0.0], &[0.1], &[0.2], 1.0, 0.7);
        assert!((v[0] - 0.1).abs() < 1e-15);
        assert_eq!(update_xi(&[0.0], &[0.0], &[0.0], &[0.0], 1.0, 0.7), vec![0.0]);
        assert_eq!(update_xi(&[0.7], &[0.0], &[0.0], &[0.0], 1.0, 0.7), vec![0.0]);
    }

    #[test]
    fn eta_examples() {
        // residual term ỹ − X̃β − ξ + e/μ = −0.5
        let v = update_eta(&[-0.5f64], &[0.0], &[0.0], &[0.0], 1.0, 0.7);
        assert!((v[0] - 0.2).abs() < 1e-15);
        assert_eq!(update_eta(&[0.0], &[0.0], &[0.0], &[0.0], 1.0, 0.7), vec![0.0]);
        assert_eq!(update_eta(&[0.0], &[0.0], &[0.0], &[0.0], 1.0, 1.0), vec![0.0]);
    }

    #[test]
    fn central_examples() {
        assert_eq!(update_beta_central(&[vec![2.0]], &[1.0], 1.0).unwrap(), vec![1.0]);
        assert_eq!(update_beta_central(&[vec![0.0], vec![0.0]], &[1.0], 1.0).unwrap(), vec![0.0]);
        assert_eq!(update_beta_central(&[vec![1.0], vec![3.0]], &[0.0], 1.0).unwrap(), vec![2.0]);
        assert!(update_beta_central::<f64>(&[], &[1.0], 1.0).is_err());
    }

    #[test]
    fn standard_correction_examples() {
        let x = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let (mut eta, mut bm) = (vec![1.0f64], vec![1.0]);
        let bt = [0.5];
        let delta = x.mul_vec(&[bm[0] - bt[0]]);
        gb_correct_standard(0.75, &mut eta, &[2.0], &mut bm, &bt, &delta).unwrap();
        assert!((eta[0] - 1.375).abs() < 1e-15);
        assert!((bm[0] - 0.625).abs() < 1e-15);

        let (mut eta, mut bm) = (vec![0.3, 0.4], vec![1.5]);
        gb_correct_standard(0.75, &mut eta, &[0.3, 0.4], &mut bm, &[1.5], &[0.0, 0.0]).unwrap();
        assert_eq!((eta, bm), (vec![0.3, 0.4], vec![1.5]));

        let (mut eta, mut bm) = (vec![0.0], vec![0.0]);
        gb_correct_standard(0.75, &mut eta, &[0.0], &mut bm, &[0.0], &[0.0]).unwrap();
        assert_eq!((eta, bm), (vec![0.0], vec![0.0]));

        assert!(gb_correct_standard(1.0, &mut [0.0], &[0.0], &mut [0.0], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn modified_correction_examples() {
        let (mut xi, mut eta) = (vec![1.0f64], vec![0.0]);
        gb_correct_modified(0.75, &mut xi, &[2.0], &mut eta, &[0.0]).unwrap();
        assert!((xi[0] - 1.75).abs() < 1e-15);

        let (mut xi, mut eta) = (vec![0.2], vec![0.9]);
        gb_correct_modified(0.75, &mut xi, &[0.2], &mut eta, &[0.9]).unwrap();
        assert_eq!((xi, eta), (vec![0.2], vec![0.9]));

        let (mut xi, mut eta) = (vec![0.0f64], vec![1.0]);
        gb_correct_modified(0.75, &mut xi, &[0.0], &mut eta, &[0.6]).unwrap();
        assert!((eta[0] - 0.7).abs() < 1e-15);

        let mut beta = vec![1.0];
        relax(0.75, &mut beta, &[1.0]);
        assert_eq!(beta, vec![1.0]);
        assert!(gb_correct_modified(0.0, &mut [0.0], &[0.0], &mut [0.0], &[0.0]).is_err());
    }

    #[test]
    fn clamp_reports_removed_mass() {
        let mut v = vec![0.5, -0.25, -0.5, 0.0];
        assert_eq!(clamp_nonneg(&mut v), 0.75);
        assert_eq!(v, vec![0.5, 0.0, 0.0, 0.0]);
    }
}
