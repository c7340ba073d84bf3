//! Domain types: datasets, quantile level, penalties and solver configuration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

/// Design matrix and response in the unified regression/classification form.
///
/// Classification rows are stored already transformed: each feature row is
/// multiplied by its ±1 label and the response is set to 1, so that the
/// regression residual `ỹᵢ − x̃ᵢᵀβ` equals the margin slack `1 − yᵢxᵢᵀβ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    features: DenseMatrix<T>,
    response: Vec<T>,
    task: Task,
    has_intercept: bool,
    labels: Option<Vec<T>>,
}

impl<T: Real> Dataset<T> {
    pub fn regression(features: DenseMatrix<T>, response: Vec<T>, has_intercept: bool) -> Result<Self> {
        validate_shape(&features, response.len(), has_intercept)?;
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("response has non-finite entries".into()));
        }
        Ok(Self {
            features,
            response,
            task: Task::Regression,
            has_intercept,
            labels: None,
        })
    }

    /// Applies the label transform to raw features and ±1 labels.
    pub fn classification(features: DenseMatrix<T>, labels: Vec<T>, has_intercept: bool) -> Result<Self> {
        validate_shape(&features, labels.len(), has_intercept)?;
        if let Some((i, y)) = labels
            .iter()
            .enumerate()
            .find(|(_, &y)| y != T::one() && y != -T::one())
        {
            return Err(Error::Data(format!("label {y} at row {i} is not ±1")));
        }
        let mut x = features;
        for j in 0..x.cols() {
            for (v, &y) in x.col_mut(j).iter_mut().zip(&labels) {
                *v = *v * y;
            }
        }
        Ok(Self {
            response: vec![T::one(); labels.len()],
            features: x,
            task: Task::Classification,
            has_intercept,
            labels: Some(labels),
        })
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn p(&self) -> usize {
        self.features.cols()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    /// Transformed design `X̃`.
    pub fn features(&self) -> &DenseMatrix<T> {
        &self.features
    }

    /// Transformed response `ỹ`.
    pub fn response(&self) -> &[T] {
        &self.response
    }

    /// Original ±1 labels (classification only).
    pub fn labels(&self) -> Option<&[T]> {
        self.labels.as_deref()
    }

    /// Untransformed features; for classification this undoes the label scaling.
    pub fn raw_features(&self) -> DenseMatrix<T> {
        match &self.labels {
            None => self.features.clone(),
            Some(y) => DenseMatrix::from_fn(self.n(), self.p(), |i, j| self.features[(i, j)] * y[i]),
        }
    }

    /// Dataset with rows reordered (or subset) by `order`.
    pub fn select_rows(&self, order: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(order),
            response: order.iter().map(|&i| self.response[i]).collect(),
            task: self.task,
            has_intercept: self.has_intercept,
            labels: self.labels.as_ref().map(|l| order.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Residuals `ỹ − X̃β`.
    pub fn residuals(&self, beta: &[T]) -> Vec<T> {
        let fit = self.features.mul_vec(beta);
        self.response.iter().zip(&fit).map(|(&y, &f)| y - f).collect()
    }

    /// Total check loss `Σ ρ_τ(ỹᵢ − x̃ᵢᵀβ)`.
    pub fn total_loss(&self, beta: &[T], tau: QuantileParam<T>) -> T {
        self.residuals(beta).into_iter().map(|r| tau.loss(r)).sum()
    }
}

fn validate_shape<T: Real>(x: &DenseMatrix<T>, n_resp: usize, has_intercept: bool) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Data("dataset needs at least one row and one column".into()));
    }
    if n_resp != x.rows() {
        return Err(Error::Dimension {
            expected: x.rows(),
            actual: n_resp,
        });
    }
    if !x.is_finite() {
        return Err(Error::Data("features have non-finite entries".into()));
    }
    if has_intercept && x.col(0).iter().any(|&v| v != T::one()) {
        return Err(Error::Data("intercept column must be identically 1".into()));
    }
    Ok(())
}

/// Quantile level τ ∈ (0, 1]; τ = 1 is the hinge loss and only valid for classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileParam<T>(T);

impl<T: Real> QuantileParam<T> {
    pub fn new(tau: T) -> Result<Self> {
        if !(tau > T::zero() && tau <= T::one()) {
            return Err(Error::param("tau", format!("{tau} is outside (0, 1]")));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn check_task(self, task: Task) -> Result<()> {
        if self.0 == T::one() && task == Task::Regression {
            return Err(Error::param("tau", "tau = 1 (hinge loss) is only valid for classification"));
        }
        Ok(())
    }

    /// `ρ_τ(u)`.
    #[inline]
    pub fn loss(self, u: T) -> T {
        if u < T::zero() {
            (self.0 - T::one()) * u
        } else {
            self.0 * u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    #[serde(rename = "l1")]
    WeightedL1,
    Scad,
    Mcp,
}

impl PenaltyKind {
    /// Conventional concavity parameter.
    pub fn default_a(self) -> f64 {
        match self {
            PenaltyKind::WeightedL1 => 0.0,
            PenaltyKind::Scad => 3.7,
            PenaltyKind::Mcp => 3.0,
        }
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "lasso" => Ok(PenaltyKind::WeightedL1),
            "scad" => Ok(PenaltyKind::Scad),
            "mcp" => Ok(PenaltyKind::Mcp),
            other => Err(Error::param("penalty", format!("unknown penalty `{other}`"))),
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyKind::WeightedL1 => "l1",
            PenaltyKind::Scad => "scad",
            PenaltyKind::Mcp => "mcp",
        })
    }
}

/// Separable penalty `Σⱼ P_{λⱼ}(|βⱼ|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec<T> {
    pub kind: PenaltyKind,
    pub lambda: Vec<T>,
    /// Concavity for SCAD/MCP; ignored for weighted ℓ1.
    pub a: T,
}

impl<T: Real> PenaltySpec<T> {
    pub fn weighted_l1(lambda: Vec<T>) -> Self {
        Self {
            kind: PenaltyKind::WeightedL1,
            lambda,
            a: T::zero(),
        }
    }

    /// Broadcasts a scalar λ to every coordinate, leaving the intercept unpenalized.
    pub fn uniform(kind: PenaltyKind, p: usize, lambda: T, has_intercept: bool) -> Self {
        let mut w = vec![lambda; p];
        if has_intercept && p > 0 {
            w[0] = T::zero();
        }
        Self {
            kind,
            lambda: w,
            a: T::lit(kind.default_a()),
        }
    }

    pub fn with_a(mut self, a: T) -> Self {
        self.a = a;
        self
    }

    pub fn validate(&self, p: usize, has_intercept: bool) -> Result<()> {
        if self.lambda.len() != p {
            return Err(Error::Dimension {
                expected: p,
                actual: self.lambda.len(),
            });
        }
        if self.lambda.iter().any(|&l| !(l >= T::zero()) || !l.is_finite()) {
            return Err(Error::param("lambda", "entries must be finite and nonnegative"));
        }
        if has_intercept && self.lambda[0] != T::zero() {
            return Err(Error::param("lambda", "the intercept coefficient must not be penalized"));
        }
        match self.kind {
            PenaltyKind::Scad if !(self.a > T::lit(2.0)) => {
                Err(Error::param("a", format!("SCAD requires a > 2, got {}", self.a)))
            }
            PenaltyKind::Mcp if !(self.a > T::one()) => {
                Err(Error::param("a", format!("MCP requires a > 1, got {}", self.a)))
            }
            _ => Ok(()),
        }
    }

    /// Penalty value at `beta`.
    pub fn value(&self, beta: &[T]) -> T {
        let two = T::lit(2.0);
        beta.iter()
            .zip(&self.lambda)
            .map(|(&b, &l)| {
                let t = b.abs();
                match self.kind {
                    PenaltyKind::WeightedL1 => l * t,
                    PenaltyKind::Scad => {
                        let a = self.a;
                        if t <= l {
                            l * t
                        } else if t <= a * l {
                            (two * a * l * t - t * t - l * l) / (two * (a - T::one()))
                        } else {
                            l * l * (a + T::one()) / two
                        }
                    }
                    PenaltyKind::Mcp => {
                        let a = self.a;
                        if t <= a * l {
                            l * t - t * t / (two * a)
                        } else {
                            a * l * l / two
                        }
                    }
                }
            })
            .sum()
    }

    /// Objective `Σ ρ_τ(ỹ − x̃ᵀβ) + P_λ(|β|)`.
    pub fn objective(&self, data: &Dataset<T>, beta: &[T], tau: QuantileParam<T>) -> T {
        data.total_loss(beta, tau) + self.value(beta)
    }
}

/// The four parallel ADMM schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    /// Consensus ADMM on the residual split (no slack variables).
    #[serde(rename = "qpadm")]
    Qpadm,
    /// Three-block slack scheme, ordering β → ξ → η → βₘ.
    #[serde(rename = "slack")]
    QpadmSlack,
    /// Slack scheme with Gaussian back substitution on (η, βₘ).
    #[serde(rename = "slack-gb")]
    QpadmSlackGb,
    /// Reordered slack scheme βₘ → ξ → η → β with the addition-only correction.
    #[serde(rename = "m-slack-gb")]
    MQpadmSlackGb,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Qpadm,
        Variant::QpadmSlack,
        Variant::QpadmSlackGb,
        Variant::MQpadmSlackGb,
    ];

    pub fn is_gb(self) -> bool {
        matches!(self, Variant::QpadmSlackGb | Variant::MQpadmSlackGb)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Qpadm => "qpadm",
            Variant::QpadmSlack => "slack",
            Variant::QpadmSlackGb => "slack-gb",
            Variant::MQpadmSlackGb => "m-slack-gb",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::param("variant", format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub tau: QuantileParam<T>,
    /// Augmented Lagrangian parameter.
    pub mu: T,
    /// Back-substitution step, used by the GB variants only.
    pub nu: T,
    /// Number of row blocks (simulated machines).
    pub blocks: usize,
    pub max_iter: usize,
    /// Iterations run before the stopping rule is consulted.
    pub min_iter: usize,
    pub tol: T,
    pub variant: Variant,
    pub init_value: T,
    pub seed: u64,
    /// Project ξ, η back onto the nonnegative orthant after a GB correction.
    pub clamp_slack: bool,
    /// Negative-control hook: applies the correction with a wrong sign.
    #[doc(hidden)]
    pub faulty_correction: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tau: QuantileParam(T::lit(0.7)),
            mu: T::one(),
            nu: T::lit(0.75),
            blocks: 1,
            max_iter: 500,
            min_iter: 0,
            tol: T::lit(1e-4),
            variant: Variant::MQpadmSlackGb,
            init_value: T::lit(0.01),
            seed: 0,
            clamp_slack: true,
            faulty_correction: false,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self, task: Task) -> Result<()> {
        self.tau.check_task(task)?;
        if !(self.mu > T::zero()) || !self.mu.is_finite() {
            return Err(Error::param("mu", format!("{} must be positive", self.mu)));
        }
        if self.variant.is_gb() && !(self.nu > T::zero() && self.nu < T::one()) {
            return Err(Error::param("nu", format!("{} is outside (0, 1)", self.nu)));
        }
        if self.blocks == 0 {
            return Err(Error::param("blocks", "at least one block is required"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be positive"));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::param("tol", "must be positive"));
        }
        if !self.init_value.is_finite() {
            return Err(Error::param("init_value", "must be finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_transform_matches_margin_slack() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0, -1.0], vec![1.0, 0.5, 3.0]]).unwrap();
        let y = vec![1.0, -1.0];
        let d = Dataset::classification(x.clone(), y.clone(), true).unwrap();
        let beta = [0.3, -0.7, 1.1];
        let r = d.residuals(&beta);
        for i in 0..2 {
            let margin = 1.0 - y[i] * x.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            assert!((r[i] - margin).abs() < 1e-14);
        }
        assert_eq!(d.response(), &[1.0, 1.0]);
        assert_eq!(d.raw_features(), x);
    }

    #[test]
    fn dataset_validation() {
        let x = DenseMatrix::from_rows(&[vec![2.0, 1.0]]).unwrap();
        assert!(Dataset::regression(x.clone(), vec![1.0], true).is_err());
        assert!(Dataset::regression(x.clone(), vec![1.0, 2.0], false).is_err());
        assert!(Dataset::classification(x.clone(), vec![0.5], false).is_err());
        assert!(Dataset::regression(DenseMatrix::<f64>::zeros(0, 2), vec![], false).is_err());
    }

    #[test]
    fn tau_rules() {
        assert!(QuantileParam::new(0.0).is_err());
        assert!(QuantileParam::new(1.2).is_err());
        let one = QuantileParam::new(1.0).unwrap();
        assert!(one.check_task(Task::Regression).is_err());
        assert!(one.check_task(Task::Classification).is_ok());
    }

    #[test]
    fn penalty_validation() {
        let p = PenaltySpec::uniform(PenaltyKind::Scad, 3, 0.5, true);
        assert_eq!(p.lambda, vec![0.0, 0.5, 0.5]);
        assert!(p.validate(3, true).is_ok());
        assert!(p.clone().with_a(2.0).validate(3, true).is_err());
        let m = PenaltySpec::uniform(PenaltyKind::Mcp, 2, 1.0, false).with_a(1.0);
        assert!(m.validate(2, false).is_err());
        let bad = PenaltySpec::weighted_l1(vec![1.0, -1.0]);
        assert!(bad.validate(2, false).is_err());
        let icpt = PenaltySpec::weighted_l1(vec![1.0, 1.0]);
        assert!(icpt.validate(2, true).is_err());
    }

    #[test]
    fn folded_concave_values_are_continuous() {
        for kind in [PenaltyKind::Scad, PenaltyKind::Mcp] {
            let pen = PenaltySpec::uniform(kind, 1, 1.0f64, false);
            let a = pen.a;
            for knot in [1.0, a] {
                let lo = pen.value(&[knot - 1e-9]);
                let hi = pen.value(&[knot + 1e-9]);
                assert!((lo - hi).abs() < 1e-8, "{kind} at {knot}");
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::<f64>::default();
        assert!(cfg.validate(Task::Regression).is_ok());
        cfg.nu = 1.5;
        assert!(cfg.validate(Task::Regression).is_err());
        cfg.variant = Variant::QpadmSlack;
        assert!(cfg.validate(Task::Regression).is_ok());
        cfg.mu = 0.0;
        assert!(cfg.validate(Task::Regression).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("gb".parse::<Variant>().is_err());
    }
}
