//! Per-block ridge systems `(XᵀX + I)⁻¹` with a cached Cholesky factor.
//!
//! When a block has fewer rows than columns the factor is taken of the
//! smaller `I + XXᵀ` and applied through the Woodbury identity
//! `(XᵀX + I)⁻¹ = I − Xᵀ(I + XXᵀ)⁻¹X`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: DenseMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: a.cols(),
            });
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(Error::Data(format!(
                    "matrix is not positive definite (pivot {j} = {d})"
                )));
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let l = &self.lower;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            // column i of L is contiguous; L[k, i] for k > i is Lᵀ[i, k]
            for (k, &lki) in l.col(i).iter().enumerate().skip(i + 1) {
                s = s - lki * b[k];
            }
            b[i] = s / l[(i, i)];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Which system the ridge factor was taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RidgeMode {
    /// `XᵀX + I` (p × p).
    DirectP,
    /// `I + XXᵀ` (n_m × n_m), applied through Woodbury.
    WoodburyN,
}

/// Cached factorization applying `(XᵀX + I)⁻¹` for one block.
#[derive(Debug, Clone)]
pub struct RidgeFactor<T> {
    mode: RidgeMode,
    chol: Cholesky<T>,
    x: Arc<DenseMatrix<T>>,
}

impl<T: Real> RidgeFactor<T> {
    /// Factors the block; WoodburyN is chosen iff `n_m < p`.
    pub fn new(x: Arc<DenseMatrix<T>>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::Data("empty block matrix".into()));
        }
        if !x.is_finite() {
            return Err(Error::Data("block matrix has non-finite entries".into()));
        }
        let (mode, sys) = if x.rows() < x.cols() {
            (RidgeMode::WoodburyN, x.outer_gram())
        } else {
            (RidgeMode::DirectP, x.gram())
        };
        let sys = sys.add(&DenseMatrix::identity(sys.rows()));
        let chol = Cholesky::new(&sys)?;
        Ok(Self { mode, chol, x })
    }

    pub fn mode(&self) -> RidgeMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    /// Returns `u` with `(XᵀX + I) u = v`.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(match self.mode {
            RidgeMode::DirectP => self.chol.solve(v),
            RidgeMode::WoodburyN => {
                let mut t = self.x.mul_vec(v);
                self.chol.solve_in_place(&mut t);
                let corr = self.x.tr_mul_vec(&t);
                v.iter().zip(&corr).map(|(&a, &b)| a - b).collect()
            }
        })
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Intended for the small dense systems assembled by the diagnostics.
pub fn symmetric_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: a.cols(),
        });
    }
    let mut m = a.clone();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    off = off + m[(i, j)] * m[(i, j)];
                } else {
                    diag = diag + m[(i, i)] * m[(i, i)];
                }
            }
        }
        if off <= eps * eps * diag.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Gauss-Jordan inverse with partial pivoting; independent of the Cholesky path.
    fn dense_inverse(a: &DenseMatrix<f64>) -> DenseMatrix<f64> {
        let n = a.rows();
        let mut aug: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = a.row(i);
                r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                r
            })
            .collect();
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&x, &y| aug[x][c].abs().partial_cmp(&aug[y][c].abs()).unwrap())
                .unwrap();
            aug.swap(c, piv);
            let d = aug[c][c];
            aug[c].iter_mut().for_each(|v| *v /= d);
            for r in 0..n {
                if r != c {
                    let f = aug[r][c];
                    let pivot_row = aug[c].clone();
                    aug[r].iter_mut().zip(&pivot_row).for_each(|(v, &pv)| *v -= f * pv);
                }
            }
        }
        DenseMatrix::from_fn(n, n, |i, j| aug[i][n + j])
    }

    fn direct_ridge_solve(x: &DenseMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let sys = x.gram().add(&DenseMatrix::identity(x.cols()));
        dense_inverse(&sys).mul_vec(v)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(n, p, |_, _| rng.gen_range(-2.0..2.0))
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-300);
        num / den
    }

    #[test]
    fn identity_block_halves_input() {
        let f = RidgeFactor::new(Arc::new(DenseMatrix::<f64>::identity(2))).unwrap();
        assert_eq!(f.mode(), RidgeMode::DirectP);
        let u = f.apply(&[3.0, -1.0]).unwrap();
        assert!((u[0] - 1.5).abs() < 1e-15 && (u[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn wide_row_uses_woodbury_and_matches_dense_inverse() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let f = RidgeFactor::new(Arc::new(x.clone())).unwrap();
        assert_eq!(f.mode(), RidgeMode::WoodburyN);
        let u = f.apply(&[1.0, 0.0, 0.0]).unwrap();
        let inv = dense_inverse(&x.gram().add(&DenseMatrix::identity(3)));
        for i in 0..3 {
            assert!((u[i] - inv[(i, 0)]).abs() < 1e-14);
        }
    }

    #[test]
    fn column_of_ones() {
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let f = RidgeFactor::new(Arc::new(x)).unwrap();
        assert_eq!(f.mode(), RidgeMode::DirectP);
        assert!((f.apply(&[1.0f64]).unwrap()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_and_zero_vector() {
        let f = RidgeFactor::new(Arc::new(DenseMatrix::<f64>::zeros(3, 4))).unwrap();
        assert_eq!(f.apply(&[1.0, -2.0, 0.5, 4.0]).unwrap(), vec![1.0, -2.0, 0.5, 4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = RidgeFactor::new(Arc::new(random_matrix(&mut rng, 5, 3))).unwrap();
        assert!(g.apply(&[0.0; 3]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn random_wide_block_matches_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_matrix(&mut rng, 4, 6);
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = RidgeFactor::new(Arc::new(x.clone())).unwrap();
        let u = f.apply(&v).unwrap();
        assert!(rel_err(&u, &direct_ridge_solve(&x, &v)) < 1e-10);
        // residual of the original system
        let back = x.tr_mul_vec(&x.mul_vec(&u));
        let res: Vec<f64> = back.iter().zip(&u).map(|(a, b)| a + b).collect();
        assert!(rel_err(&res, &v) < 1e-10);
    }

    #[test]
    fn both_modes_agree_on_random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let small = rng.gen_range(1..=8);
            let large = rng.gen_range(1..=16);
            let (n, p) = if rng.gen_bool(0.5) { (small, large) } else { (large, small) };
            let x = random_matrix(&mut rng, n, p);
            let v: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let direct = {
                let sys = x.gram().add(&DenseMatrix::identity(p));
                Cholesky::new(&sys).unwrap().solve(&v)
            };
            let woodbury = {
                let sys = x.outer_gram().add(&DenseMatrix::identity(n));
                let mut t = x.mul_vec(&v);
                Cholesky::new(&sys).unwrap().solve_in_place(&mut t);
                let c = x.tr_mul_vec(&t);
                v.iter().zip(&c).map(|(a, b)| a - b).collect::<Vec<_>>()
            };
            assert!(rel_err(&woodbury, &direct) < 1e-8, "n={n} p={p}");
        }
    }

    #[test]
    fn apply_is_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(n, p) in &[(3usize, 7usize), (9, 4), (5, 5)] {
            let f = RidgeFactor::new(Arc::new(random_matrix(&mut rng, n, p))).unwrap();
            let u: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: f64 = u.iter().zip(f.apply(&v).unwrap()).map(|(x, y)| x * y).sum();
            let b: f64 = v.iter().zip(f.apply(&u).unwrap()).map(|(x, y)| x * y).sum();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let mut x = DenseMatrix::<f64>::identity(2);
        x[(0, 1)] = f64::NAN;
        assert!(matches!(RidgeFactor::new(Arc::new(x)), Err(Error::Data(_))));
        let f = RidgeFactor::new(Arc::new(DenseMatrix::<f64>::identity(2))).unwrap();
        assert!(matches!(f.apply(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let ev: Vec<f64> = symmetric_eigenvalues(&a).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let x = DenseMatrix::<f32>::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0], vec![2.0, 0.0]])
            .unwrap();
        let f = RidgeFactor::new(Arc::new(x)).unwrap();
        let u = f.apply(&[1.0, 1.0]).unwrap();
        assert!(u.iter().all(|v| v.is_finite()));
    }
}
