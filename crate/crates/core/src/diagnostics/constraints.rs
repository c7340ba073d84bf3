use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;
use crate::solvers::{BlockData, SolverState};

use super::MAX_DENSE_DIM;

/// Grouping of the primal variables into the three ADMM blocks `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// `a = (β, ξ)`, `b = η`, `c = (β₁..β_M)`.
    Standard,
    /// `a = (β₁..β_M)`, `b = ξ`, `c = (η, β)`.
    Modified,
}

/// Dense `A a + B b + C c = e` for the slack formulation.
///
/// Rows are ordered as the `M·p` consensus rows `βₘ − β` (block by block)
/// followed by the `n` data rows `X̃ₘβₘ + ξₘ − ηₘ − ỹₘ`.
#[derive(Debug, Clone)]
pub struct ConstraintSystem<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub c: DenseMatrix<T>,
    pub e: Vec<T>,
    pub ordering: Ordering,
    pub p: usize,
    pub sizes: Vec<usize>,
}

/// A point `(a, b, c, d)` in the coordinates of a [`ConstraintSystem`].
///
/// `d` is the multiplier of `L = θ − dᵀ(Aa + Bb + Cc − e)`; its consensus part
/// is the negated solver dual and its data part equals the solver's residual dual.
#[derive(Debug, Clone, PartialEq)]
pub struct GbIterate<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub d: Vec<T>,
}

impl<T: Real> GbIterate<T> {
    /// `g = (b, c, d)`, the part of the iterate the correction acts on.
    pub fn g(&self) -> Vec<T> {
        [&self.b[..], &self.c[..], &self.d[..]].concat()
    }
}

fn check_size(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        return Err(Error::Oversize {
            dim,
            limit: MAX_DENSE_DIM,
        });
    }
    Ok(())
}

/// Assembles the constraint matrices for blocks with designs `xs` and responses `ys`.
pub fn build_constraints<T: Real>(xs: &[&DenseMatrix<T>], ys: &[&[T]], ordering: Ordering) -> Result<ConstraintSystem<T>> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len().max(1),
            actual: ys.len(),
        });
    }
    let p = xs[0].cols();
    for (x, y) in xs.iter().zip(ys) {
        if x.cols() != p {
            return Err(Error::Dimension {
                expected: p,
                actual: x.cols(),
            });
        }
        if x.rows() != y.len() {
            return Err(Error::Dimension {
                expected: x.rows(),
                actual: y.len(),
            });
        }
    }
    let m = xs.len();
    let sizes: Vec<usize> = xs.iter().map(|x| x.rows()).collect();
    let n: usize = sizes.iter().sum();
    let rows = m * p + n;
    let g_dim = match ordering {
        Ordering::Standard => n + m * p + rows,
        Ordering::Modified => 2 * n + p + rows,
    };
    check_size(rows.max(g_dim))?;

    let one = T::one();
    // consensus rows of βₘ and data rows of X̃ₘβₘ
    let mut local = DenseMatrix::zeros(rows, m * p);
    let mut off = m * p;
    for (k, x) in xs.iter().enumerate() {
        local.set_block(k * p, k * p, &DenseMatrix::identity(p));
        local.set_block(off, k * p, x);
        off += x.rows();
    }
    let mut central = DenseMatrix::zeros(rows, p);
    for k in 0..m {
        central.set_block(k * p, 0, &DenseMatrix::identity(p).scale(-one));
    }
    let slack = |sign: T| {
        let mut s = DenseMatrix::zeros(rows, n);
        for i in 0..n {
            s[(m * p + i, i)] = sign;
        }
        s
    };
    let hstack = |l: &DenseMatrix<T>, r: &DenseMatrix<T>| {
        let mut out = DenseMatrix::zeros(rows, l.cols() + r.cols());
        out.set_block(0, 0, l);
        out.set_block(0, l.cols(), r);
        out
    };
    let (a, b, c) = match ordering {
        Ordering::Standard => (hstack(&central, &slack(one)), slack(-one), local),
        Ordering::Modified => (local, slack(one), hstack(&slack(-one), &central)),
    };
    let mut e = vec![T::zero(); m * p];
    for y in ys {
        e.extend_from_slice(y);
    }
    Ok(ConstraintSystem {
        a,
        b,
        c,
        e,
        ordering,
        p,
        sizes,
    })
}

impl<T: Real> ConstraintSystem<T> {
    pub fn from_blocks(blocks: &[BlockData<T>], ordering: Ordering) -> Result<Self> {
        let xs: Vec<&DenseMatrix<T>> = blocks.iter().map(|b| b.x.as_ref()).collect();
        let ys: Vec<&[T]> = blocks.iter().map(|b| b.y.as_slice()).collect();
        build_constraints(&xs, &ys, ordering)
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Number of constraint rows.
    pub fn rows(&self) -> usize {
        self.e.len()
    }

    /// `A a + B b + C c − e`.
    pub fn residual(&self, a: &[T], b: &[T], c: &[T]) -> Vec<T> {
        let (ra, rb, rc) = (self.a.mul_vec(a), self.b.mul_vec(b), self.c.mul_vec(c));
        (0..self.rows()).map(|i| ra[i] + rb[i] + rc[i] - self.e[i]).collect()
    }

    /// Maps a solver state (with any deferred dual already applied) into `(a, b, c, d)`.
    pub fn iterate(&self, state: &SolverState<T>) -> Result<GbIterate<T>> {
        if state.dual_pending {
            return Err(Error::Data("state has a deferred dual update; settle it first".into()));
        }
        let m = self.num_blocks();
        if state.blocks.len() != m {
            return Err(Error::Dimension {
                expected: m,
                actual: state.blocks.len(),
            });
        }
        for (blk, &n) in state.blocks.iter().zip(&self.sizes) {
            if blk.xi.len() != n || blk.eta.len() != n || blk.beta_m.len() != self.p {
                return Err(Error::Dimension {
                    expected: n,
                    actual: blk.xi.len(),
                });
            }
        }
        let blocks = &state.blocks;
        let xi: Vec<T> = blocks.iter().flat_map(|b| b.xi.iter().copied()).collect();
        let eta: Vec<T> = blocks.iter().flat_map(|b| b.eta.iter().copied()).collect();
        let locals: Vec<T> = blocks.iter().flat_map(|b| b.beta_m.iter().copied()).collect();
        let beta = state.central.beta.clone();
        let mut d: Vec<T> = blocks.iter().flat_map(|b| b.d.iter().map(|&v| -v)).collect();
        d.extend(blocks.iter().flat_map(|b| b.e.iter().copied()));
        Ok(match self.ordering {
            Ordering::Standard => GbIterate {
                a: [beta, xi].concat(),
                b: eta,
                c: locals,
                d,
            },
            Ordering::Modified => GbIterate {
                a: locals,
                b: xi,
                c: [eta, beta].concat(),
                d,
            },
        })
    }
}
