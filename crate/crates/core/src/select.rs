//! HBIC model selection over a λ grid.

use crate::error::{Error, Result};
use crate::metrics::selected;
use crate::model::{Dataset, PenaltyKind, PenaltySpec, QuantileParam, SolverConfig};
use crate::nonconvex::{lla_solve_problem, LlaConfig};
use crate::scalar::Real;
use crate::solvers::{solve_problem, IterationTrace, Outcome, Problem, SolverState};
use crate::ZERO_THRESHOLD;

/// `log(L) + s·(log log n / n)·6 log p`; `−∞` when the total loss is zero.
pub fn hbic_value(total_loss: f64, support: usize, n: usize, p: usize) -> f64 {
    let nf = n as f64;
    let cn = 6.0 * (p as f64).ln();
    total_loss.ln() + support as f64 * (nf.ln().ln() / nf) * cn
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hbic {
    pub value: f64,
    pub support_size: usize,
    /// Set when the fit interpolates the data and the criterion is `−∞`.
    pub degenerate: bool,
}

/// HBIC of `beta` on pooled data; the intercept is neither counted nor part of `p`.
pub fn hbic<T: Real>(beta: &[T], data: &Dataset<T>, tau: QuantileParam<T>) -> Result<Hbic> {
    if data.n() < 3 {
        return Err(Error::Selection(format!("HBIC needs n ≥ 3, got {}", data.n())));
    }
    if beta.len() != data.p() {
        return Err(Error::Dimension {
            expected: data.p(),
            actual: beta.len(),
        });
    }
    let intercept = data.has_intercept();
    let p = data.p() - usize::from(intercept);
    let loss = data.total_loss(beta, tau).as_f64();
    let support_size = selected(beta, ZERO_THRESHOLD, intercept).len();
    let value = hbic_value(loss, support_size, data.n(), p.max(1));
    Ok(Hbic {
        value,
        support_size,
        degenerate: loss <= 0.0,
    })
}

/// Smallest uniform λ for which `β = 0` (intercept aside) is optimal.
///
/// With an intercept the score is evaluated at the intercept-only fit.
pub fn lambda_max<T: Real>(data: &Dataset<T>, tau: QuantileParam<T>) -> T {
    let x = data.features();
    let y = data.response();
    let offset = if data.has_intercept() {
        intercept_only(x.col(0), y, tau)
    } else {
        T::zero()
    };
    let t = tau.value();
    let psi: Vec<T> = (0..data.n())
        .map(|i| {
            let r = if data.has_intercept() { y[i] - x[(i, 0)] * offset } else { y[i] };
            if r < T::zero() {
                t - T::one()
            } else {
                t
            }
        })
        .collect();
    let first = usize::from(data.has_intercept());
    (first..data.p())
        .map(|j| x.col(j).iter().zip(&psi).map(|(&a, &b)| a * b).sum::<T>().abs())
        .fold(T::zero(), T::max)
}

/// `argmin_q Σ ρ_τ(yᵢ − cᵢq)`, searched over the kinks `yᵢ/cᵢ`.
fn intercept_only<T: Real>(c: &[T], y: &[T], tau: QuantileParam<T>) -> T {
    let mut kinks: Vec<T> = c
        .iter()
        .zip(y)
        .filter(|(&ci, _)| ci != T::zero())
        .map(|(&ci, &yi)| yi / ci)
        .collect();
    kinks.sort_by(|a, b| a.partial_cmp(b).expect("finite data"));
    kinks.dedup();
    if kinks.is_empty() {
        return T::zero();
    }
    let obj = |q: T| -> T { c.iter().zip(y).map(|(&ci, &yi)| tau.loss(yi - ci * q)).sum() };
    if c.iter().all(|&ci| ci == T::one()) {
        let mut sorted: Vec<T> = y.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite data"));
        let k = ((tau.value() * T::from_count(sorted.len())).ceil().as_f64() as usize).clamp(1, sorted.len());
        return sorted[k - 1];
    }
    kinks
        .into_iter()
        .map(|q| (obj(q), q))
        .fold((T::infinity(), T::zero()), |best, cur| if cur.0 < best.0 { cur } else { best })
        .1
}

/// `points` log-spaced values from `λ_max` down to `ratio·λ_max`.
pub fn default_grid<T: Real>(lmax: T, points: usize, ratio: T) -> Vec<T> {
    if points <= 1 {
        return vec![lmax];
    }
    let (hi, lo) = (lmax.ln(), (lmax * ratio).ln());
    let step = (hi - lo) / T::from_count(points - 1);
    (0..points).map(|k| (hi - step * T::from_count(k)).exp()).collect()
}

#[derive(Debug, Clone)]
pub struct HbicRecord<T> {
    pub lambda: T,
    pub hbic: f64,
    pub support_size: usize,
    pub degenerate: bool,
    pub beta: Vec<T>,
    pub iterations: usize,
    /// Weighted-ℓ1 solves used by the LLA loop (1 for LASSO).
    pub outer_steps: usize,
    pub outcome: Outcome,
    /// Trace of the final weighted-ℓ1 solve at this λ.
    pub trace: IterationTrace,
}

#[derive(Debug, Clone)]
pub struct Selection<T> {
    pub best: HbicRecord<T>,
    /// Fitted grid points from largest to smallest λ; diverged points are omitted.
    pub path: Vec<HbicRecord<T>>,
    /// λ values whose fit diverged.
    pub failed: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct GridOptions<T> {
    pub kind: PenaltyKind,
    /// Concavity for SCAD/MCP; `None` uses the conventional default.
    pub a: Option<T>,
    pub max_outer: usize,
    pub warm_start: bool,
}

impl<T: Real> Default for GridOptions<T> {
    fn default() -> Self {
        Self {
            kind: PenaltyKind::WeightedL1,
            a: None,
            max_outer: 3,
            warm_start: true,
        }
    }
}

/// Fits every grid point from large to small λ, warm-starting along the path,
/// and returns the HBIC minimizer (ties go to the larger λ).
pub fn grid_search<T: Real>(
    data: &Dataset<T>,
    grid: &[T],
    opts: &GridOptions<T>,
    cfg: &SolverConfig<T>,
) -> Result<Selection<T>> {
    if grid.is_empty() {
        return Err(Error::Selection("empty λ grid".into()));
    }
    if grid.iter().any(|l| !(*l > T::zero()) || !l.is_finite()) {
        return Err(Error::param("lambda", "grid values must be positive and finite"));
    }
    let mut lambdas = grid.to_vec();
    lambdas.sort_by(|a, b| b.partial_cmp(a).expect("finite grid"));
    lambdas.dedup();
    let problem = Problem::new(data, cfg.blocks)?;
    let lla = LlaConfig {
        max_outer: opts.max_outer,
        inner: cfg.clone(),
        warm_start: true,
    };
    let mut path = Vec::with_capacity(lambdas.len());
    let mut failed = Vec::new();
    let mut warm: Option<SolverState<T>> = None;
    for &lambda in &lambdas {
        let mut pen = PenaltySpec::uniform(opts.kind, data.p(), lambda, data.has_intercept());
        if let Some(a) = opts.a {
            pen.a = a;
        }
        let start = if opts.warm_start { warm.take() } else { None };
        let fit = match opts.kind {
            PenaltyKind::WeightedL1 => {
                pen.validate(data.p(), data.has_intercept())?;
                solve_problem(&problem, &pen.lambda, cfg, start).map(|f| (f, 1))
            }
            _ => lla_solve_problem(&problem, &pen, &lla, start).map(|r| {
                let total = r.total_iterations();
                let steps = r.outer_steps;
                let mut fit = r.fit;
                fit.iterations = total;
                (fit, steps)
            }),
        };
        let (fit, outer_steps) = match fit {
            Ok(f) => f,
            Err(Error::Diverged { .. }) => {
                failed.push(lambda);
                continue;
            }
            Err(e) => return Err(e),
        };
        let h = hbic(&fit.beta, data, cfg.tau)?;
        path.push(HbicRecord {
            lambda,
            hbic: h.value,
            support_size: h.support_size,
            degenerate: h.degenerate,
            beta: fit.beta.clone(),
            iterations: fit.iterations,
            outer_steps,
            outcome: fit.outcome,
            trace: fit.trace.clone(),
        });
        warm = Some(fit.state);
    }
    let best = path
        .iter()
        .fold(None::<&HbicRecord<T>>, |best, r| match best {
            Some(b) if !(r.hbic < b.hbic) => Some(b),
            _ => Some(r),
        })
        .cloned()
        .ok_or_else(|| Error::Selection("every grid point diverged".into()))?;
    Ok(Selection { best, path, failed })
}
