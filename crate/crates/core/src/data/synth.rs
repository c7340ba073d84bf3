use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};


use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::Dataset;
use crate::scalar::Real;

/// 1-based indices of the variables entering the location of the response.
pub const TRUE_SUPPORT: [usize; 4] = [6, 12, 15, 20];
/// 1-based index of the variable that scales the noise.
pub const HETERO_INDEX: usize = 1;

/// Heteroscedastic design `y = x₆ + x₁₂ + x₁₅ + x₂₀ + 0.7·x₁·ε` with AR(1) Gaussian features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub rho: f64,
}

impl SynthSpec {
    pub fn new(n: usize, p: usize, seed: u64) -> Self {
        Self { n, p, seed, rho: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 20 {
            return Err(Error::param("p", format!("{} < 20; the model uses x20", self.p)));
        }
        if self.n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::param("rho", "must lie in (-1, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthData<T> {
    pub dataset: Dataset<T>,
    /// 1-based true support of the location.
    pub support: Vec<usize>,
    pub hetero_index: usize,
}

/// Standard normal CDF through `Φ(x) = erfc(−x/√2)/2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(p)
}

/// Conditional τ-quantile coefficients of the synthetic model.
pub fn true_beta(p: usize, tau: f64) -> Vec<f64> {
    let mut b = vec![0.0; p];
    b[HETERO_INDEX - 1] = 0.7 * normal_quantile(tau);
    for j in TRUE_SUPPORT {
        b[j - 1] = 1.0;
    }
    b
}

/// Draws the raw feature matrix (x₁ already mapped through Φ) and noise.
fn draw(spec: &SynthSpec) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (spec.n, spec.p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let s = (1.0 - spec.rho * spec.rho).sqrt();
    let mut x = vec![0.0; n * p];
    let mut eps = Vec::with_capacity(n);
    for i in 0..n {
        let mut prev: f64 = rng.sample(StandardNormal);
        x[i] = normal_cdf(prev);
        for j in 1..p {
            let z: f64 = rng.sample(StandardNormal);
            prev = spec.rho * prev + s * z;
            x[j * n + i] = prev;
        }
        eps.push(rng.sample(StandardNormal));
    }
    (x, eps)
}

/// Generates a regression dataset; bit-reproducible for a fixed seed.
pub fn synth_generate<T: Real>(spec: &SynthSpec) -> Result<SynthData<T>> {
    spec.validate()?;
    let n = spec.n;
    let (x, eps) = draw(spec);
    let y: Vec<T> = (0..n)
        .map(|i| {
            let loc: f64 = TRUE_SUPPORT.iter().map(|&j| x[(j - 1) * n + i]).sum();
            T::lit(loc + 0.7 * x[i] * eps[i])
        })
        .collect();
    let features = DenseMatrix::from_col_major(n, spec.p, x.into_iter().map(T::lit).collect())?;
    Ok(SynthData {
        dataset: Dataset::regression(features, y, false)?,
        support: TRUE_SUPPORT.to_vec(),
        hetero_index: HETERO_INDEX,
    })
}

/// Classification variant: labels are the sign of the regression response's location plus noise.
pub fn synth_classification<T: Real>(spec: &SynthSpec) -> Result<SynthData<T>> {
    spec.validate()?;
    let n = spec.n;
    let (x, eps) = draw(spec);
    let labels: Vec<T> = (0..n)
        .map(|i| {
            let loc: f64 = TRUE_SUPPORT.iter().map(|&j| x[(j - 1) * n + i]).sum();
            if loc + 0.7 * x[i] * eps[i] >= 0.0 {
                T::one()
            } else {
                -T::one()
            }
        })
        .collect();
    let features = DenseMatrix::from_col_major(n, spec.p, x.into_iter().map(T::lit).collect())?;
    Ok(SynthData {
        dataset: Dataset::classification(features, labels, false)?,
        support: TRUE_SUPPORT.to_vec(),
        hetero_index: HETERO_INDEX,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_matches_reference_values() {
        // Φ(1) and Φ(−2) to 15 digits.
        let e = (normal_cdf(1.0) - 0.841_344_746_068_542_9).abs();
        assert!(e < 1e-12, "{e:e}");
        assert!((normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-12);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_quantile(normal_cdf(0.3)) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn rejects_small_p() {
        assert!(synth_generate::<f64>(&SynthSpec::new(10, 19, 0)).is_err());
    }

    #[test]
    fn first_column_in_unit_interval_and_reproducible() {
        let spec = SynthSpec::new(300, 25, 42);
        let a = synth_generate::<f64>(&spec).unwrap().dataset;
        let b = synth_generate::<f64>(&spec).unwrap().dataset;
        assert!(a.features().col(0).iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(a.features(), b.features());
        assert_eq!(a.response(), b.response());
    }

    #[test]
    fn true_beta_at_point_seven() {
        let b = true_beta(20, 0.7);
        assert!((b[0] - 0.7 * 0.524_400_512_708_041_2).abs() < 1e-9);
        assert_eq!(b.iter().filter(|&&v| v == 1.0).count(), 4);
        assert!(true_beta(20, 0.5)[0].abs() < 1e-12);
    }
}
