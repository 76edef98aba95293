//! Numerical flat geometry of polynomial quadratic differentials `q = P(z) dz^2`
//! on the Riemann sphere: trajectories, spectral networks, saddle connections
//! and periods.

mod classify;
mod integrate;
mod network;
mod period;
mod roots;
mod scan;

pub use classify::{classify_cylinder, classify_ray, GluedCylinder, RayClassification, RingDomain};
pub use integrate::{
    escape_index, integrate_trajectory, separatrix_start, IntegrationOptions, Terminus, TrajectorySegment,
    TrajectoryStart,
};
pub use network::{build_network, Crossing, NetworkSegment, Orientation, SpectralNetwork};
pub use period::{period, period_with_end, PeriodOptions};
pub use roots::polynomial_roots;
pub use scan::{scan_active_rays, scan_with_options, ActiveRay, SaddleConnection, ScanOptions, ScanResult, UnresolvedPhase};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polynomial must have a nonzero coefficient")]
    ZeroPolynomial,
    #[error("zeros {0} and {1} are closer than the degeneracy threshold")]
    DegenerateZeros(usize, usize),
    #[error("root finder did not converge")]
    RootsNotConverged,
    #[error("step size collapsed at z = {0}")]
    StepCollapse(Complex64),
    #[error("path point {0} lies on a zero")]
    PathThroughZero(Complex64),
    #[error("branch of sqrt(P) is ambiguous near z = {0}")]
    BranchAmbiguity(Complex64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("phase {0} is active; a saddle-free phase is required")]
    ActivePhase(f64),
    #[error("separatrix from zero {0} was length-capped; increase the cap")]
    CapTooSmall(usize),
}

/// Distance below which two roots count as coincident, relative to scale.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// `q = P(z) dz^2` with `P` a polynomial with simple roots.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticDifferential {
    coeffs: Vec<Complex64>,
    zeros: Vec<Complex64>,
}

impl QuadraticDifferential {
    /// Builds `q` from coefficients in ascending powers of `z`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, GeometryError> {
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(GeometryError::ZeroPolynomial);
        }
        let zeros = polynomial_roots(&coeffs)?;
        let scale = 1.0 + zeros.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..zeros.len() {
            for j in i + 1..zeros.len() {
                if (zeros[i] - zeros[j]).norm() <= DEGENERACY_THRESHOLD * scale {
                    return Err(GeometryError::DegenerateZeros(i, j));
                }
            }
        }
        Ok(QuadraticDifferential { coeffs, zeros })
    }

    /// Convenience constructor from real coefficients in ascending powers.
    pub fn from_real(coeffs: &[f64]) -> Result<Self, GeometryError> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("nonempty")
    }

    /// Order of the pole of `q` at infinity.
    pub fn pole_order_at_infinity(&self) -> usize {
        self.degree() + 4
    }

    /// Number of asymptotic directions at infinity.
    pub fn asymptotic_directions(&self) -> usize {
        self.degree() + 2
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * (k as f64);
        }
        acc
    }

    /// The square root of `P(z)` closest to `reference`.
    pub fn sqrt_near(&self, z: Complex64, reference: Complex64) -> Complex64 {
        let r = self.eval(z).sqrt();
        if (r - reference).norm_sqr() <= (r + reference).norm_sqr() {
            r
        } else {
            -r
        }
    }

    /// Smallest distance between two zeros (1 if there are fewer than two).
    pub fn min_zero_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.zeros.len() {
            for j in i + 1..self.zeros.len() {
                d = d.min((self.zeros[i] - self.zeros[j]).norm());
            }
        }
        if d.is_finite() {
            d
        } else {
            1.0
        }
    }

    /// Radius beyond which trajectories are treated as escaped to the pole.
    pub fn escape_radius(&self) -> f64 {
        10.0 * (1.0 + self.zeros.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Radius of the disc around a zero at which a trajectory counts as hitting it.
    pub fn hit_radius(&self) -> f64 {
        1e-4 * self.min_zero_distance()
    }

    /// Index and distance of the nearest zero, if any.
    pub fn nearest_zero(&self, z: Complex64) -> Option<(usize, f64)> {
        self.zeros
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Asymptotic phase offset of outgoing trajectories at infinity for phase `theta`.
    pub fn asymptotic_base_angle(&self, theta: f64) -> f64 {
        2.0 / (self.degree() as f64 + 2.0) * (theta - self.leading().arg() / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_double_roots() {
        assert!(matches!(
            QuadraticDifferential::from_real(&[1.0, 2.0, 1.0]),
            Err(GeometryError::DegenerateZeros(0, 1))
        ));
    }

    #[test]
    fn evaluates_polynomial_and_derivative() {
        let q = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let z = Complex64::new(2.0, 1.0);
        assert!((q.eval(z) - (z * z - 1.0)).norm() < 1e-14);
        assert!((q.derivative(z) - 2.0 * z).norm() < 1e-14);
        assert_eq!(q.pole_order_at_infinity(), 6);
    }
}
