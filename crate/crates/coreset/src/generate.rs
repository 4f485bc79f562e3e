//! Seeded synthetic mixtures.
//!
//! Both generators draw, in order: mixture weights from a symmetric
//! Dirichlet, the component parameters, then for every point its label and
//! coordinates. A single xoshiro256++ stream seeded from `seed` drives all of
//! it, so the output is a pure function of the arguments.

use coreset_core::rng::rng_from_seed;
use coreset_core::{MixtureTruth, PointSet};
use rand::distr::weighted::WeightedIndex;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma, Normal, Poisson};

use crate::error::{Error, Result};

/// Parameters of [`gen_gaussian_mixture`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub dirichlet_alpha: f64,
    /// Variance of each coordinate of the component means.
    pub mean_var: f64,
    /// Isotropic variance of each component.
    pub comp_var: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            n: 10_000,
            k: 50,
            d: 10,
            dirichlet_alpha: 0.5,
            mean_var: 5000.0,
            comp_var: 1.0,
        }
    }
}

/// Parameters of [`gen_poisson_mixture`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub dirichlet_alpha: f64,
}

impl Default for PoissonParams {
    fn default() -> Self {
        Self {
            n: 10_000,
            k: 50,
            d: 10,
            gamma_shape: 10.0,
            gamma_rate: 1e-3,
            dirichlet_alpha: 0.5,
        }
    }
}

fn check_sizes(n: usize, k: usize, d: usize) -> Result<()> {
    if n == 0 || k == 0 || d == 0 {
        return Err(Error::Data(format!(
            "n, k and d must be at least 1 (got n = {n}, k = {k}, d = {d})"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Data(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Symmetric Dirichlet draw via normalized Gamma(alpha, 1) variates.
pub fn dirichlet<R: rand::Rng + ?Sized>(rng: &mut R, k: usize, alpha: f64) -> Result<Vec<f64>> {
    check_positive("dirichlet_alpha", alpha)?;
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Data(e.to_string()))?;
    loop {
        let g: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 && total.is_finite() {
            return Ok(g.into_iter().map(|v| v / total).collect());
        }
    }
}

fn draw_labels<R: rand::Rng + ?Sized>(rng: &mut R, weights: &[f64], n: usize) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(weights).map_err(|e| Error::Data(e.to_string()))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

/// Mixture of `k` isotropic Gaussians in `d` dimensions.
///
/// Component means are drawn i.i.d. from `N(0, mean_var·I)`; each point from
/// `N(mean_j, comp_var·I)` for its component `j`.
pub fn gen_gaussian_mixture(seed: u64, p: &GaussianParams) -> Result<(PointSet, MixtureTruth)> {
    check_sizes(p.n, p.k, p.d)?;
    check_positive("mean_var", p.mean_var)?;
    check_positive("comp_var", p.comp_var)?;
    let mut rng = rng_from_seed(seed);
    let weights = dirichlet(&mut rng, p.k, p.dirichlet_alpha)?;
    let std_normal = Normal::new(0.0, 1.0).map_err(|e| Error::Data(e.to_string()))?;
    let mean_sd = p.mean_var.sqrt();
    let comp_sd = p.comp_var.sqrt();
    let means: Vec<f64> = (0..p.k * p.d)
        .map(|_| mean_sd * std_normal.sample(&mut rng))
        .collect();
    let labels = draw_labels(&mut rng, &weights, p.n)?;
    let mut data = Vec::with_capacity(p.n * p.d);
    for &j in &labels {
        for t in 0..p.d {
            data.push(means[j * p.d + t] + comp_sd * std_normal.sample(&mut rng));
        }
    }
    Ok((
        PointSet::new(p.d, data)?,
        MixtureTruth {
            component_weights: weights,
            component_params: PointSet::new(p.d, means)?,
            assignment: labels,
        },
    ))
}

/// Mixture of `k` products of independent Poisson distributions.
///
/// Each component's per-dimension rate is drawn from
/// `Gamma(gamma_shape, gamma_rate)` (rate parameterization, mean
/// `shape / rate`). Counts are returned as floats and may be zero.
pub fn gen_poisson_mixture(seed: u64, p: &PoissonParams) -> Result<(PointSet, MixtureTruth)> {
    check_sizes(p.n, p.k, p.d)?;
    check_positive("gamma_shape", p.gamma_shape)?;
    check_positive("gamma_rate", p.gamma_rate)?;
    let mut rng = rng_from_seed(seed);
    let weights = dirichlet(&mut rng, p.k, p.dirichlet_alpha)?;
    let gamma = Gamma::new(p.gamma_shape, 1.0 / p.gamma_rate).map_err(|e| Error::Data(e.to_string()))?;
    let rates: Vec<f64> = (0..p.k * p.d).map(|_| gamma.sample(&mut rng)).collect();
    let poissons = rates
        .iter()
        .map(|&r| Poisson::new(r).map_err(|e| Error::Data(format!("rate {r}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let labels = draw_labels(&mut rng, &weights, p.n)?;
    let mut data = Vec::with_capacity(p.n * p.d);
    for &j in &labels {
        for t in 0..p.d {
            data.push(poissons[j * p.d + t].sample(&mut rng));
        }
    }
    Ok((
        PointSet::new(p.d, data)?,
        MixtureTruth {
            component_weights: weights,
            component_params: PointSet::new(p.d, rates)?,
            assignment: labels,
        },
    ))
}

/// Uniform draw from `[low, high)` per coordinate; handy for query and test
/// instances.
pub fn uniform_box(seed: u64, n: usize, d: usize, low: f64, high: f64) -> Result<PointSet> {
    check_sizes(n, 1, d)?;
    if !(low < high) {
        return Err(Error::Data(format!("empty interval [{low}, {high})")));
    }
    let mut rng = rng_from_seed(seed);
    let data = (0..n * d).map(|_| rng.random_range(low..high)).collect();
    Ok(PointSet::new(d, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_shape_and_determinism() {
        let p = GaussianParams {
            n: 500,
            k: 5,
            d: 3,
            ..GaussianParams::default()
        };
        let (a, ta) = gen_gaussian_mixture(3, &p).unwrap();
        let (b, tb) = gen_gaussian_mixture(3, &p).unwrap();
        assert_eq!(a.len(), 500);
        assert_eq!(a.dim(), 3);
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        assert!(ta.assignment.iter().all(|&l| l < 5));
        let (c, _) = gen_gaussian_mixture(4, &p).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_component() {
        let p = GaussianParams {
            n: 20,
            k: 1,
            d: 2,
            ..GaussianParams::default()
        };
        let (_, t) = gen_gaussian_mixture(0, &p).unwrap();
        assert_eq!(t.component_weights, vec![1.0]);
        assert!(t.assignment.iter().all(|&l| l == 0));
    }

    #[test]
    fn poisson_single_point() {
        let p = PoissonParams {
            n: 1,
            k: 1,
            d: 1,
            ..PoissonParams::default()
        };
        let (ps, _) = gen_poisson_mixture(9, &p).unwrap();
        let v = ps.row(0)[0];
        assert!(v >= 0.0 && v.fract() == 0.0);
    }

    #[test]
    fn invalid_parameters() {
        let p = GaussianParams {
            n: 0,
            ..GaussianParams::default()
        };
        assert!(gen_gaussian_mixture(0, &p).is_err());
        let p = GaussianParams {
            mean_var: -1.0,
            ..GaussianParams::default()
        };
        assert!(gen_gaussian_mixture(0, &p).is_err());
        let p = PoissonParams {
            gamma_rate: 0.0,
            ..PoissonParams::default()
        };
        assert!(gen_poisson_mixture(0, &p).is_err());
    }
}
