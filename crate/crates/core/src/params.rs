//! Channel parameters `(gamma, lambda, omega)` and derived quantities.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Fock-space extent allowed by the deformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// States `n = 0..dim` (exclusive) keep `f(n)^2 >= 0`.
    Finite(usize),
    /// `lambda >= 0`: every Fock state is admissible, the caller picks a cutoff.
    Unbounded,
}

impl Dimension {
    pub fn is_finite(self) -> bool {
        matches!(self, Dimension::Finite(_))
    }

    /// Checks that `dim` states fit inside the bound.
    pub fn check(self, dim: usize) -> Result<()> {
        match self {
            Dimension::Finite(max) if dim > max => {
                Err(Error::DimensionExceeded { requested: dim, max })
            }
            _ => Ok(()),
        }
    }

    /// `dim` clipped to the bound.
    pub fn clip(self, dim: usize) -> usize {
        match self {
            Dimension::Finite(max) => dim.min(max),
            Dimension::Unbounded => dim,
        }
    }
}

/// Dephasing strength `gamma`, Kerr nonlinearity `lambda` and deformed
/// frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub gamma: f64,
    pub lambda: f64,
    pub omega: f64,
}

impl ChannelParams {
    pub fn new(gamma: f64, lambda: f64, omega: f64) -> Result<Self> {
        if !(gamma.is_finite() && lambda.is_finite() && omega.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite"));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParams("gamma must be >= 0"));
        }
        if omega <= 0.0 {
            return Err(Error::InvalidParams("omega must be > 0"));
        }
        Ok(Self { gamma, lambda, omega })
    }

    /// Same `lambda, omega` with a different dephasing strength.
    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(gamma, self.lambda, self.omega)
    }

    /// Bare oscillator frequency `Omega = omega + lambda/2`.
    pub fn bare_frequency(&self) -> f64 {
        self.omega + self.lambda / 2.0
    }

    /// Deformation ratio `y = lambda / (2 omega)`.
    pub fn y(&self) -> f64 {
        self.lambda / (2.0 * self.omega)
    }

    /// Kernel exponent `nu = omega/|lambda| + sign(lambda)/2`; zero for `lambda = 0`.
    ///
    /// For `lambda > 0`, `2 nu` is the rising-factorial index of the
    /// environment coherent states; for `lambda < 0` it is the falling one
    /// (twice the spin of the finite representation).
    pub fn nu(&self) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else {
            self.omega / self.lambda.abs() + 0.5 * self.lambda.signum()
        }
    }

    /// Algebra constant `lambda_alg = 2y` with `[K0, A] = -(lambda_alg/2) A`.
    pub fn lambda_alg(&self) -> f64 {
        2.0 * self.y()
    }

    pub fn max_dimension(&self) -> Dimension {
        crate::algebra::max_dimension(self)
    }

    /// `2 omega / |lambda|` is an integer, so the `lambda < 0` truncated
    /// ladder closes into an exact finite representation.
    pub fn is_exact_finite_rep(&self) -> bool {
        if self.lambda >= 0.0 {
            return false;
        }
        let r = 1.0 / self.y().abs();
        (r - r.round()).abs() <= 1e-9 * r.max(1.0)
    }
}
