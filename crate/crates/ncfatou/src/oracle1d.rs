//! Classical one-variable reference computations on the unit circle, used as ground truth
//! for the `d = 1` case: trapezoid quadrature, Fourier coefficients, Toeplitz matrices,
//! Herglotz integrals and the Fatou symbol `(1-|b|²)/|1-b|²`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::measure::MomentFunctional;
use crate::words::WordBasis;

/// Default number of quadrature nodes.
pub const DEFAULT_GRID: usize = 4096;

/// Radius used as the radial-limit proxy for boundary values.
pub const BOUNDARY_RADIUS: f64 = 1.0 - 1e-8;

/// Uniform nodes `ζ_j = exp(2πij/n)`.
pub fn circle_grid(n: usize) -> Vec<C64> {
    (0..n)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Polynomial `Σ b_k z^k` evaluated by Horner's rule.
pub fn poly_eval(b: &[C64], z: C64) -> C64 {
    b.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `(1-|b(ρζ)|²)/|1-b(ρζ)|²` with `ρ = 1 - 1e-8`; `+∞` when `|1-b| < 1e-12`.
pub fn fatou_symbol(b: &[C64], zeta: C64) -> f64 {
    let v = poly_eval(b, zeta * BOUNDARY_RADIUS);
    let den = (C64::new(1.0, 0.0) - v).norm();
    if den < 1e-12 {
        return f64::INFINITY;
    }
    (1.0 - v.norm_sqr()) / (den * den)
}

/// Fatou symbol of `b(r·)` sampled on the grid (no boundary proxy needed for `r < 1`).
pub fn fatou_samples(b: &[C64], r: f64, n: usize) -> Vec<f64> {
    circle_grid(n)
        .into_iter()
        .map(|z| {
            if r >= 1.0 {
                fatou_symbol(b, z)
            } else {
                let v = poly_eval(b, z * r);
                (1.0 - v.norm_sqr()) / (C64::new(1.0, 0.0) - v).norm_sqr()
            }
        })
        .collect()
}

/// Poisson kernel `(1-r²)/|1-rζ|²` on the grid.
pub fn poisson_samples(r: f64, n: usize) -> Vec<f64> {
    circle_grid(n)
        .into_iter()
        .map(|z| (1.0 - r * r) / (C64::new(1.0, 0.0) - z * r).norm_sqr())
        .collect()
}

/// Fourier coefficients `ĥ(k) = (1/n) Σ_j h(ζ_j) ζ_j^{-k}` for `k = 0..n`, with negative `k`
/// stored at index `n + k`.
pub fn fourier_coefficients(samples: &[f64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c / n as f64).collect()
}

/// Toeplitz matrix `T[j,k] = ĥ(j-k)` of a real symbol sampled on the uniform grid.
pub fn toeplitz_from_symbol(samples: &[f64], m: usize) -> Result<DMatrix<C64>> {
    let n = samples.len();
    if !n.is_power_of_two() || n < 4 * (m + 1) {
        return Err(Error::invalid(
            "grid",
            format!("{n} nodes; need a power of two >= {}", 4 * (m + 1)),
        ));
    }
    let hat = fourier_coefficients(samples);
    Ok(DMatrix::from_fn(m + 1, m + 1, |j, k| {
        if j >= k {
            hat[j - k]
        } else {
            hat[n - (k - j)]
        }
    }))
}

/// An atom `w δ_ζ` on the circle, `ζ = exp(i·angle)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub angle: f64,
    pub weight: f64,
}

/// Positive measure on the circle: atoms plus an optional density sampled on the uniform grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClassicalMeasure {
    pub atoms: Vec<Atom>,
    pub density: Vec<f64>,
}

impl ClassicalMeasure {
    pub fn point_mass(angle: f64, weight: f64) -> Self {
        ClassicalMeasure {
            atoms: vec![Atom { angle, weight }],
            density: Vec::new(),
        }
    }

    /// `weight · m` for normalized arc length `m`.
    pub fn lebesgue(weight: f64, grid: usize) -> Self {
        ClassicalMeasure {
            atoms: Vec::new(),
            density: vec![weight; grid],
        }
    }

    pub fn with_density(density: Vec<f64>) -> Self {
        ClassicalMeasure {
            atoms: Vec::new(),
            density,
        }
    }

    pub fn plus(mut self, other: ClassicalMeasure) -> Result<Self> {
        self.atoms.extend(other.atoms);
        if self.density.is_empty() {
            self.density = other.density;
        } else if !other.density.is_empty() {
            if self.density.len() != other.density.len() {
                return Err(Error::invalid("density", "grids of different sizes"));
            }
            self.density.iter_mut().zip(other.density).for_each(|(a, b)| *a += b);
        }
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.atoms.iter().any(|a| !(a.weight >= 0.0)) {
            return Err(Error::invalid("atoms", "weights must be non-negative"));
        }
        if self.density.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::invalid("density", "samples must be non-negative"));
        }
        Ok(())
    }

    /// `∫ f dμ` with atoms summed exactly and the density by the trapezoid rule.
    pub fn integrate(&self, f: impl Fn(C64) -> C64) -> C64 {
        let mut acc: C64 = self
            .atoms
            .iter()
            .map(|a| f(C64::from_polar(1.0, a.angle)) * a.weight)
            .sum();
        let n = self.density.len();
        if n > 0 {
            let grid = circle_grid(n);
            let s: C64 = grid.iter().zip(&self.density).map(|(&z, &h)| f(z) * h).sum();
            acc += s / n as f64;
        }
        acc
    }
}

/// Moments `μ(S^k) = ∫ ζ^k dμ(ζ)` for `k = 0..=n` as a `d = 1` functional.
pub fn classical_moments(mu: &ClassicalMeasure, n: usize) -> Result<MomentFunctional> {
    mu.validate()?;
    let basis = WordBasis::new(1, n)?;
    let mut moments: Vec<C64> = mu.atoms.iter().fold(vec![C64::new(0.0, 0.0); n + 1], |mut acc, a| {
        let z = C64::from_polar(1.0, a.angle);
        let mut p = C64::new(a.weight, 0.0);
        for slot in acc.iter_mut() {
            *slot += p;
            p *= z;
        }
        acc
    });
    if !mu.density.is_empty() {
        // ∫ ζ^k h dm = ĥ(-k)
        let hat = fourier_coefficients(&mu.density);
        let g = hat.len();
        for (k, slot) in moments.iter_mut().enumerate() {
            *slot += hat[(g - k % g) % g];
        }
    }
    moments[0].im = 0.0;
    MomentFunctional::from_moments(&basis, moments)
}

/// `∫ (ζ + z)/(ζ - z) dμ(ζ)` for `|z| < 1`.
pub fn herglotz_integral(mu: &ClassicalMeasure, z: C64) -> C64 {
    mu.integrate(|zeta| (zeta + z) / (zeta - z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn fatou_symbol_examples() {
        for z in circle_grid(16) {
            assert_eq!(fatou_symbol(&[c(0.0)], z), 1.0);
        }
        let z = C64::from_polar(1.0, 1.0);
        assert!(fatou_symbol(&[c(0.0), c(1.0)], z).abs() < 1e-7);
        assert!((fatou_symbol(&[c(0.0), c(0.5)], c(1.0)) - 3.0).abs() < 1e-7);
        assert!(fatou_symbol(&[c(0.0), c(1.0)], c(1.0)) > 1e7);
    }

    #[test]
    fn toeplitz_examples() {
        let t = toeplitz_from_symbol(&vec![1.0; 64], 8).unwrap();
        assert!(crate::linalg::max_entry(&(t - DMatrix::identity(9, 9))) < 1e-14);

        let r: f64 = 0.7;
        let t = toeplitz_from_symbol(&poisson_samples(r, 256), 8).unwrap();
        for j in 0..9 {
            for k in 0..9 {
                let e = r.powi((j as i32 - k as i32).abs());
                assert!((t[(j, k)] - c(e)).norm() < 1e-13);
            }
        }
        assert!(toeplitz_from_symbol(&vec![1.0; 32], 8).is_err());
        assert!(toeplitz_from_symbol(&vec![1.0; 100], 8).is_err());
    }

    #[test]
    fn classical_moment_examples() {
        let m = classical_moments(&ClassicalMeasure::point_mass(0.0, 1.0), 6).unwrap();
        assert!(m.moments().iter().all(|x| (*x - c(1.0)).norm() < 1e-15));

        let m = classical_moments(&ClassicalMeasure::lebesgue(1.0, 64), 6).unwrap();
        assert!((m.moments()[0] - c(1.0)).norm() < 1e-15);
        assert!(m.moments()[1..].iter().all(|x| x.norm() < 1e-15));

        let mix = ClassicalMeasure::point_mass(0.0, 0.5)
            .plus(ClassicalMeasure::lebesgue(0.5, 64))
            .unwrap();
        let m = classical_moments(&mix, 6).unwrap();
        assert!((m.moments()[0] - c(1.0)).norm() < 1e-15);
        assert!(m.moments()[1..].iter().all(|x| (*x - c(0.5)).norm() < 1e-15));

        assert!(classical_moments(&ClassicalMeasure::point_mass(0.0, -1.0), 3).is_err());
    }
}
