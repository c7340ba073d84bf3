use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Cholesky};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

use super::constraints::ConstraintSystem;

/// The 3×3-partitioned matrices of the prediction–correction analysis, acting on `g = (b, c, d)`.
#[derive(Debug, Clone)]
pub struct GbMatrices<T> {
    pub q: DenseMatrix<T>,
    pub m: DenseMatrix<T>,
    pub h: DenseMatrix<T>,
    pub g: DenseMatrix<T>,
    pub mu: T,
    pub nu: T,
}

/// `(BᵀB)⁻¹BᵀC`.
pub fn gb_coupling<T: Real>(cs: &ConstraintSystem<T>) -> Result<DenseMatrix<T>> {
    let btb = Cholesky::new(&cs.b.gram())?;
    let btc = cs.b.transpose().matmul(&cs.c);
    let mut out = btc.clone();
    for j in 0..out.cols() {
        btb.solve_in_place(out.col_mut(j));
    }
    Ok(out)
}

/// Builds `Q`, `M`, `H`, `G` for step sizes `μ > 0` and `ν ∈ (0, 1)`.
pub fn build_gb_matrices<T: Real>(cs: &ConstraintSystem<T>, mu: T, nu: T) -> Result<GbMatrices<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::param("mu", "must be positive"));
    }
    if !(nu > T::zero() && nu < T::one()) {
        return Err(Error::param("nu", format!("must lie in (0, 1), got {nu}")));
    }
    let (nb, nc, r) = (cs.b.cols(), cs.c.cols(), cs.rows());
    let dim = nb + nc + r;
    let bt = cs.b.transpose();
    let btb = cs.b.gram();
    let ctc = cs.c.gram();
    let btc = bt.matmul(&cs.c);
    let ctb = btc.transpose();
    let coupling = gb_coupling(cs)?;
    let inv_mu = mu.recip();
    let eye_r = DenseMatrix::identity(r);

    let mut q = DenseMatrix::zeros(dim, dim);
    q.set_block(0, 0, &btb.scale(mu));
    q.set_block(nb, 0, &ctb.scale(mu));
    q.set_block(nb, nb, &ctc.scale(mu));
    q.set_block(nb + nc, 0, &cs.b.scale(-T::one()));
    q.set_block(nb + nc, nb, &cs.c.scale(-T::one()));
    q.set_block(nb + nc, nb + nc, &eye_r.scale(inv_mu));

    let mut m = DenseMatrix::zeros(dim, dim);
    m.set_block(0, 0, &DenseMatrix::identity(nb).scale(nu));
    m.set_block(0, nb, &coupling.scale(-nu));
    m.set_block(nb, nb, &DenseMatrix::identity(nc).scale(nu));
    m.set_block(nb + nc, 0, &cs.b.scale(-mu));
    m.set_block(nb + nc, nb, &cs.c.scale(-mu));
    m.set_block(nb + nc, nb + nc, &eye_r);

    let w = mu / nu;
    let mut h = DenseMatrix::zeros(dim, dim);
    h.set_block(0, 0, &btb.scale(w));
    h.set_block(0, nb, &btc.scale(w));
    h.set_block(nb, 0, &ctb.scale(w));
    h.set_block(nb, nb, &ctc.add(&ctb.matmul(&coupling)).scale(w));
    h.set_block(nb + nc, nb + nc, &eye_r.scale(inv_mu));

    let s = (T::one() - nu) * mu;
    let mut g = DenseMatrix::zeros(dim, dim);
    g.set_block(0, 0, &btb.scale(s));
    g.set_block(nb, nb, &ctc.scale(s));
    g.set_block(nb + nc, nb + nc, &eye_r.scale(inv_mu));
    Ok(GbMatrices { q, m, h, g, mu, nu })
}

/// Max-abs errors of `HM = Q` and `G = (Qᵀ + Q) − MᵀHM`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub hm_minus_q: f64,
    pub g_identity: f64,
}

/// Smallest eigenvalues of `H` and `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Definiteness {
    pub h_min: f64,
    pub g_min: f64,
}

impl<T: Real> GbMatrices<T> {
    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn check_identities(&self) -> IdentityCheck {
        let hm = self.h.matmul(&self.m);
        let rhs = self.q.transpose().add(&self.q).sub(&self.m.transpose().matmul(&hm));
        IdentityCheck {
            hm_minus_q: hm.max_abs_diff(&self.q).as_f64(),
            g_identity: rhs.max_abs_diff(&self.g).as_f64(),
        }
    }

    pub fn definiteness(&self) -> Result<Definiteness> {
        let min = |a: &DenseMatrix<T>| -> Result<f64> {
            Ok(symmetric_eigenvalues(a)?.first().map_or(f64::NAN, |v| v.as_f64()))
        };
        Ok(Definiteness {
            h_min: min(&self.h)?,
            g_min: min(&self.g)?,
        })
    }

    /// `‖u‖_H`.
    pub fn h_norm(&self, u: &[T]) -> Result<T> {
        if u.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: u.len(),
            });
        }
        Ok(self.h.quad_form(u).max(T::zero()).sqrt())
    }

    /// `‖u − v‖_H`.
    pub fn h_dist(&self, u: &[T], v: &[T]) -> Result<T> {
        if u.len() != v.len() {
            return Err(Error::Dimension {
                expected: u.len(),
                actual: v.len(),
            });
        }
        let diff: Vec<T> = u.iter().zip(v).map(|(&a, &b)| a - b).collect();
        self.h_norm(&diff)
    }
}
