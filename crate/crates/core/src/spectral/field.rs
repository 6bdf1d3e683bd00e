use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SpectralError;

/// A section `x ↦ ξ_x ∈ ℂ^d`, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    dim: usize,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(dim: usize, values: Vec<Complex64>) -> Result<Self, SpectralError> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(SpectralError::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        Ok(Self { dim, values })
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            dim,
            values: vec![Complex64::new(0.0, 0.0); n * dim],
        }
    }

    /// Real scalar field.
    pub fn scalar(values: &[f64]) -> Self {
        Self {
            dim: 1,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// `ξ_x = v` for every point.
    pub fn constant(n: usize, v: &[Complex64]) -> Self {
        Self {
            dim: v.len(),
            values: v.iter().copied().cycle().take(n * v.len()).collect(),
        }
    }

    /// Independent standard complex Gaussian coordinates.
    pub fn random<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Self {
        let values = (0..n * dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self { dim, values }
    }

    /// Real Gaussian scalar field.
    pub fn random_real<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let values = (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), 0.0)).collect();
        Self { dim: 1, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn at(&self, x: usize) -> &[Complex64] {
        &self.values[x * self.dim..(x + 1) * self.dim]
    }

    pub fn at_mut(&mut self, x: usize) -> &mut [Complex64] {
        &mut self.values[x * self.dim..(x + 1) * self.dim]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// `Σ_x w(x) ⟨ξ_x, η_x⟩`, linear in the first argument.
    pub fn inner(&self, other: &Field, weights: &[f64]) -> Complex64 {
        let d = self.dim;
        self.values
            .chunks(d)
            .zip(other.values.chunks(d))
            .zip(weights)
            .map(|((a, b), &w)| a.iter().zip(b).map(|(p, q)| p * q.conj()).sum::<Complex64>() * w)
            .sum()
    }

    pub fn norm_sq(&self, weights: &[f64]) -> f64 {
        self.values
            .chunks(self.dim)
            .zip(weights)
            .map(|(a, &w)| w * a.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field {
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}
