use crate::scalar::Real;

/// Iterates owned by one block (simulated machine).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState<T> {
    pub beta_m: Vec<T>,
    pub xi: Vec<T>,
    pub eta: Vec<T>,
    /// Residual split `r` of the QPADM baseline; empty for the slack schemes.
    pub r: Vec<T>,
    /// Dual of `βₘ = β` (length p).
    pub d: Vec<T>,
    /// Dual of the residual constraint (length nₘ).
    pub e: Vec<T>,
    /// Pre-correction ξ̃ from the last sweep (modified scheme).
    pub xi_tilde: Vec<T>,
    /// Pre-correction η̃ from the last sweep (GB schemes).
    pub eta_tilde: Vec<T>,
    /// Cached `Xₘβₘ`.
    pub xb: Vec<T>,
}

impl<T: Real> BlockState<T> {
    pub(crate) fn filled(n_m: usize, p: usize, v: T, baseline: bool) -> Self {
        let (slack, r) = if baseline { (0, n_m) } else { (n_m, 0) };
        Self {
            beta_m: vec![v; p],
            xi: vec![v; slack],
            eta: vec![v; slack],
            r: vec![v; r],
            d: vec![v; p],
            e: vec![v; n_m],
            xi_tilde: vec![v; slack],
            eta_tilde: vec![v; slack],
            xb: vec![T::zero(); n_m],
        }
    }

    pub fn rows(&self) -> usize {
        self.e.len()
    }

    pub(crate) fn max_abs(&self) -> T {
        [&self.beta_m, &self.xi, &self.eta, &self.r, &self.d, &self.e]
            .into_iter()
            .flat_map(|v| v.iter())
            .fold(T::zero(), |m, &x| if x.is_nan() { x } else { m.max(x.abs()) })
    }
}

/// Central-machine iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralState<T> {
    pub beta: Vec<T>,
    /// Pre-correction β̃ (modified scheme).
    pub beta_tilde: Vec<T>,
}

/// Full solver state; can seed a warm start.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub central: CentralState<T>,
    pub blocks: Vec<BlockState<T>>,
    /// The modified scheme defers each dual update to the start of the next sweep.
    pub dual_pending: bool,
}
