//! Deformed ladder operators `A = a f(n)` with `f(n) = sqrt(1 + y n)`,
//! `y = lambda / (2 omega)`, on a truncated Fock space.

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, C64, ZERO};
use crate::params::{ChannelParams, Dimension};

/// Slack on `1 + y n >= 0` so that boundary states survive rounding.
const POSITIVITY_SLACK: f64 = 1e-12;

/// A `dim x dim` operator on the Fock states `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub dim: usize,
    pub entries: DMatrix<C64>,
}

impl TruncatedOperator {
    fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Self {
            dim,
            entries: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.adjoint(),
        }
    }
}

/// `f(n)^2 = 1 + y n`.
pub fn deformation_factor_sq(n: usize, p: &ChannelParams) -> f64 {
    1.0 + p.y() * n as f64
}

/// `f(n) = sqrt(1 + y n)`.
pub fn deformation_factor(n: usize, p: &ChannelParams) -> Result<f64> {
    let v = deformation_factor_sq(n, p);
    if v < -POSITIVITY_SLACK {
        return Err(Error::Domain { n, value: v });
    }
    Ok(v.max(0.0).sqrt())
}

/// Number of admissible Fock states. For `lambda < 0` this is the largest
/// `n` with `1 + y n >= 0`, plus one; the boundary state with `f = 0` is
/// included.
pub fn max_dimension(p: &ChannelParams) -> Dimension {
    if p.lambda >= 0.0 {
        return Dimension::Unbounded;
    }
    let r = 1.0 / p.y().abs();
    let n_max = (r + POSITIVITY_SLACK * r.max(1.0)).floor() as usize;
    Dimension::Finite(n_max + 1)
}

fn check_dim(p: &ChannelParams, dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    max_dimension(p).check(dim)
}

/// Ladder coefficient `<n-1|A|n> = sqrt(n) f(n)`.
pub fn ladder_coefficient(n: usize, p: &ChannelParams) -> f64 {
    ((n as f64) * deformation_factor_sq(n, p).max(0.0)).sqrt()
}

/// Eigenvalue of `A^dagger A` on `|n>`: `n (1 + y n)`.
pub fn number_energy(n: usize, p: &ChannelParams) -> f64 {
    let v = n as f64 * deformation_factor_sq(n, p);
    v.max(0.0)
}

pub fn build_annihilator(p: &ChannelParams, dim: usize) -> Result<TruncatedOperator> {
    check_dim(p, dim)?;
    Ok(TruncatedOperator::from_fn(dim, |r, c| {
        if c == r + 1 {
            C64::new(ladder_coefficient(c, p), 0.0)
        } else {
            ZERO
        }
    }))
}

pub fn build_creator(p: &ChannelParams, dim: usize) -> Result<TruncatedOperator> {
    build_annihilator(p, dim).map(|a| a.adjoint())
}

/// `k0(n) = y n + (1 + y)/2`.
pub fn k0_eigenvalue(n: usize, p: &ChannelParams) -> f64 {
    let y = p.y();
    y * n as f64 + 0.5 * (1.0 + y)
}

/// `K0 = [A, A^dagger]/2`, diagonal in the Fock basis.
pub fn build_k0(p: &ChannelParams, dim: usize) -> Result<TruncatedOperator> {
    check_dim(p, dim)?;
    Ok(TruncatedOperator::from_fn(dim, |r, c| {
        if r == c {
            C64::new(k0_eigenvalue(r, p), 0.0)
        } else {
            ZERO
        }
    }))
}

pub fn build_number(dim: usize) -> TruncatedOperator {
    TruncatedOperator::from_fn(dim, |r, c| if r == c { C64::new(r as f64, 0.0) } else { ZERO })
}

/// `max |omega A^dagger A - (Omega n + lambda/2 n(n-1))|`.
pub fn hamiltonian_identity_residual(p: &ChannelParams, dim: usize) -> Result<f64> {
    let a = build_annihilator(p, dim)?;
    let lhs = (a.adjoint().entries * &a.entries) * C64::new(p.omega, 0.0);
    let big_omega = p.bare_frequency();
    let rhs = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            let n = r as f64;
            C64::new(big_omega * n + 0.5 * p.lambda * n * (n - 1.0), 0.0)
        } else {
            ZERO
        }
    });
    Ok(max_abs_diff(&lhs, &rhs))
}

/// Residuals of the deformed-algebra relations on a truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorResiduals {
    /// `[A, A^dagger]/2 - K0` on rows/columns `0..dim-1` (the last row is a
    /// cutoff artifact).
    pub k0_interior: f64,
    /// `[K0, A] + y A`.
    pub k0_annihilator: f64,
    /// `[K0, A^dagger] - y A^dagger`.
    pub k0_creator: f64,
}

impl CommutatorResiduals {
    pub fn max(&self) -> f64 {
        self.k0_interior.max(self.k0_annihilator).max(self.k0_creator)
    }
}

pub fn commutator_residuals(p: &ChannelParams, dim: usize) -> Result<CommutatorResiduals> {
    let a = build_annihilator(p, dim)?.entries;
    let ad = a.adjoint();
    let k0 = build_k0(p, dim)?.entries;
    let y = C64::new(p.y(), 0.0);
    let half = C64::new(0.5, 0.0);

    let comm = (&a * &ad - &ad * &a) * half;
    let inner = dim.saturating_sub(1);
    let k0_interior = if inner == 0 {
        0.0
    } else {
        max_abs_diff(
            &comm.view((0, 0), (inner, inner)).into_owned(),
            &k0.view((0, 0), (inner, inner)).into_owned(),
        )
    };
    let k0_annihilator = crate::linalg::max_abs(&(&k0 * &a - &a * &k0 + &a * y));
    let k0_creator = crate::linalg::max_abs(&(&k0 * &ad - &ad * &k0 - &ad * y));
    Ok(CommutatorResiduals {
        k0_interior,
        k0_annihilator,
        k0_creator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, omega: f64) -> ChannelParams {
        ChannelParams::new(1.0, lambda, omega).unwrap()
    }

    #[test]
    fn deformation_factor_examples() {
        assert_eq!(deformation_factor(0, &params(0.7, 2.0)).unwrap(), 1.0);
        assert!((deformation_factor(1, &params(0.2, 1.0)).unwrap() - 1.1f64.sqrt()).abs() < 1e-15);
        assert_eq!(deformation_factor(2, &params(-1.0, 1.0)).unwrap(), 0.0);
        assert!(matches!(
            deformation_factor(3, &params(-1.0, 1.0)),
            Err(Error::Domain { n: 3, .. })
        ));
    }

    #[test]
    fn max_dimension_examples() {
        assert_eq!(max_dimension(&params(-1.0, 1.0)), Dimension::Finite(3));
        assert_eq!(max_dimension(&params(-2.0, 1.0)), Dimension::Finite(2));
        assert_eq!(max_dimension(&params(0.5, 1.0)), Dimension::Unbounded);
        assert_eq!(max_dimension(&params(0.0, 1.0)), Dimension::Unbounded);
        // 1/|y| = 6.67: states 0..=6
        assert_eq!(max_dimension(&params(-0.3, 1.0)), Dimension::Finite(7));
        // 1/|y| = 20 exactly, despite 0.1 not being representable
        assert_eq!(max_dimension(&params(-0.1, 1.0)), Dimension::Finite(21));
    }

    #[test]
    fn max_dimension_agrees_with_real_annihilator() {
        // every entry of A must be real (no sqrt of a negative) up to the
        // bound, and the next state would need one
        for &(lambda, omega) in &[(-1.0, 1.0), (-2.0, 1.0), (-0.3, 1.0), (-0.7, 2.0)] {
            let p = params(lambda, omega);
            let Dimension::Finite(d) = max_dimension(&p) else { panic!() };
            for n in 0..d {
                assert!(deformation_factor_sq(n, &p) >= -1e-12);
            }
            assert!(deformation_factor_sq(d, &p) < 0.0);
            let a = build_annihilator(&p, d).unwrap();
            assert!(a.entries.iter().all(|z| z.im == 0.0 && z.re.is_finite()));
            assert!(build_annihilator(&p, d + 1).is_err());
        }
    }

    #[test]
    fn annihilator_entries() {
        let a = build_annihilator(&params(0.0, 1.0), 3).unwrap().entries;
        assert_eq!(a[(0, 1)].re, 1.0);
        assert!((a[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a[(1, 0)], ZERO);

        let a = build_annihilator(&params(-1.0, 1.0), 3).unwrap().entries;
        assert!((a[(0, 1)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(a[(1, 2)].re, 0.0);

        let a = build_annihilator(&params(0.3, 1.0), 1).unwrap().entries;
        assert_eq!(a[(0, 0)], ZERO);
    }

    #[test]
    fn creator_ladder_action() {
        let p = params(0.6, 1.5);
        let ad = build_creator(&p, 10).unwrap().entries;
        let y = p.y();
        for k in 0..9 {
            let expect = (((k + 1) as f64) * (1.0 + y * (k + 1) as f64)).sqrt();
            assert!((ad[(k + 1, k)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn k0_examples() {
        let k0 = build_k0(&params(0.0, 1.0), 4).unwrap().entries;
        assert!(k0.diagonal().iter().all(|z| (z.re - 0.5).abs() < 1e-16));
        assert!((k0_eigenvalue(2, &params(1.0, 1.0)) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn commutators_on_interior() {
        for &lambda in &[0.0, 0.3, 1.0, -0.5] {
            let p = params(lambda, 1.0);
            let dim = p.max_dimension().clip(16);
            let r = commutator_residuals(&p, dim).unwrap();
            // entries of A^dagger A reach ~130 at lambda = 1, so allow a few ulps
            let tol = if lambda == 1.0 { 1e-13 } else { 1e-14 };
            assert!(r.k0_interior < tol, "{lambda}: {r:?}");
            assert!(r.max() < 1e-12, "{lambda}: {r:?}");
        }
    }

    #[test]
    fn hamiltonian_identity() {
        // sqrt(n)^2 rounds back to n within an ulp
        assert!(hamiltonian_identity_residual(&params(0.0, 1.0), 8).unwrap() < 1e-14);
        assert!(hamiltonian_identity_residual(&params(0.3, 1.0), 8).unwrap() <= 1e-12);
        assert!(hamiltonian_identity_residual(&params(-1.0, 1.0), 3).unwrap() <= 1e-12);
        assert!(hamiltonian_identity_residual(&params(0.8, 2.5), 20).unwrap() <= 1e-12);
    }

    #[test]
    fn number_energy_is_diagonal_of_adag_a() {
        let p = params(0.4, 1.2);
        let a = build_annihilator(&p, 9).unwrap().entries;
        let ada = a.adjoint() * &a;
        for n in 0..9 {
            let y = p.y();
            let via_lemma = (1.0 + y) * n as f64 + y * (n as f64) * (n as f64 - 1.0);
            assert!((ada[(n, n)].re - number_energy(n, &p)).abs() < 1e-13);
            assert!((via_lemma - number_energy(n, &p)).abs() < 1e-13);
        }
    }
}
