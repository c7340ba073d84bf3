use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::matrix::DenseMatrix;
use crate::model::QuantileParam;
use crate::scalar::Real;

use super::constraints::{ConstraintSystem, GbIterate, Ordering};
use super::gb::GbMatrices;

/// Separable term of one coordinate in `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Term<T> {
    Free,
    /// `c·z + I(z ≥ 0)`
    Slack(T),
    /// `w·|z|`
    Abs(T),
}

impl<T: Real> Term<T> {
    /// `argmin_z term(z) + (s/2)(z − v)²`.
    fn prox(self, v: T, s: T) -> T {
        match self {
            Term::Free => v,
            Term::Slack(c) => (v - c / s).max(T::zero()),
            Term::Abs(w) => {
                let t = w / s;
                if v > t {
                    v - t
                } else if v < -t {
                    v + t
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Minimizes `θ(z) − zᵀZᵀd + (μ/2)‖Zz + w‖²` for a separable `θ`.
///
/// Nonsmooth blocks require a diagonal `ZᵀZ`, which holds for every slack/penalty block.
fn block_argmin<T: Real>(z: &DenseMatrix<T>, terms: &[Term<T>], d: &[T], w: &[T], mu: T) -> Result<Vec<T>> {
    let zt_d = z.tr_mul_vec(d);
    let zt_w = z.tr_mul_vec(w);
    let rhs: Vec<T> = zt_d.iter().zip(&zt_w).map(|(&a, &b)| a / mu - b).collect();
    let gram = z.gram();
    if terms.iter().all(|t| *t == Term::Free) {
        return Ok(Cholesky::new(&gram)?.solve(&rhs));
    }
    let k = gram.rows();
    for j in 0..k {
        for i in 0..k {
            if i != j && gram[(i, j)] != T::zero() {
                return Err(Error::Data("nonsmooth block with a non-diagonal Gram matrix".into()));
            }
        }
    }
    Ok((0..k)
        .map(|j| {
            let dj = gram[(j, j)];
            terms[j].prox(rhs[j] / dj, mu * dj)
        })
        .collect())
}

fn terms<T: Real>(cs: &ConstraintSystem<T>, weights: &[T], tau: T) -> [Vec<Term<T>>; 3] {
    let n = cs.n();
    let mp = cs.num_blocks() * cs.p;
    let pen: Vec<Term<T>> = weights.iter().map(|&w| Term::Abs(w)).collect();
    let xi = vec![Term::Slack(tau); n];
    let eta = vec![Term::Slack(T::one() - tau); n];
    let free = vec![Term::Free; mp];
    match cs.ordering {
        Ordering::Standard => [[pen, xi].concat(), eta, free],
        Ordering::Modified => [free, xi, [eta, pen].concat()],
    }
}

fn add3<T: Real>(a: &[T], b: &[T], c: &[T], e: &[T]) -> Vec<T> {
    (0..e.len()).map(|i| a[i] + b[i] + c[i] - e[i]).collect()
}

/// One prediction step followed by the `M` correction, executed on the dense system.
///
/// Returns the corrected iterate and the predictor `(ã, b̃, c̃, d̃)`.
pub fn prediction_correction_step<T: Real>(
    cs: &ConstraintSystem<T>,
    gb: &GbMatrices<T>,
    it: &GbIterate<T>,
    weights: &[T],
    tau: QuantileParam<T>,
) -> Result<(GbIterate<T>, GbIterate<T>)> {
    let (nb, nc, r) = (cs.b.cols(), cs.c.cols(), cs.rows());
    if it.b.len() != nb || it.c.len() != nc || it.d.len() != r {
        return Err(Error::Dimension {
            expected: nb + nc + r,
            actual: it.b.len() + it.c.len() + it.d.len(),
        });
    }
    if weights.len() != cs.p {
        return Err(Error::Dimension {
            expected: cs.p,
            actual: weights.len(),
        });
    }
    if gb.dim() != nb + nc + r {
        return Err(Error::Dimension {
            expected: nb + nc + r,
            actual: gb.dim(),
        });
    }
    let mu = gb.mu;
    let [ta, tb, tc] = terms(cs, weights, tau.value());
    let zero = vec![T::zero(); r];
    let bb = cs.b.mul_vec(&it.b);
    let cc = cs.c.mul_vec(&it.c);

    let a_t = block_argmin(&cs.a, &ta, &it.d, &add3(&zero, &bb, &cc, &cs.e), mu)?;
    let aa = cs.a.mul_vec(&a_t);
    let b_t = block_argmin(&cs.b, &tb, &it.d, &add3(&aa, &zero, &cc, &cs.e), mu)?;
    let bb_t = cs.b.mul_vec(&b_t);
    let c_t = block_argmin(&cs.c, &tc, &it.d, &add3(&aa, &bb_t, &zero, &cs.e), mu)?;
    let res = add3(&aa, &bb, &cc, &cs.e);
    let d_t: Vec<T> = it.d.iter().zip(&res).map(|(&d, &v)| d - mu * v).collect();

    let g = it.g();
    let predicted = GbIterate {
        a: a_t,
        b: b_t,
        c: c_t,
        d: d_t,
    };
    let diff: Vec<T> = g.iter().zip(predicted.g()).map(|(&x, y)| x - y).collect();
    let corr = gb.m.mul_vec(&diff);
    let next: Vec<T> = g.iter().zip(&corr).map(|(&x, &y)| x - y).collect();
    Ok((
        GbIterate {
            a: predicted.a.clone(),
            b: next[..nb].to_vec(),
            c: next[nb..nb + nc].to_vec(),
            d: next[nb + nc..].to_vec(),
        },
        predicted,
    ))
}
