//! The dephasing channel on density matrices, its complementary channel,
//! Kraus operators, coherent-state outputs and the Gaussian (disentangling)
//! decomposition of the deformed displacement.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{build_annihilator, k0_eigenvalue};
use crate::error::{Error, Result};
use crate::kernel::{
    coherent_vector, forced_env_dim, kernel_matrix, CoherentVector, KernelMatrix, DEFAULT_TAIL_TOL,
};
use crate::linalg::{hermitian_eigenvalues, hermiticity_residual, max_abs_diff, unitary_from_hermitian, C64, ONE, ZERO};
use crate::params::ChannelParams;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// Completeness target for truncated `lambda > 0` Kraus families.
pub const KRAUS_TOL: f64 = 1e-8;
/// Coherent-state input tail allowed outside the system cutoff.
pub const INPUT_TAIL_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub entries: DMatrix<C64>,
}

/// How far a matrix is from being a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn of(m: &DMatrix<C64>) -> Result<Self> {
        let hermiticity = hermiticity_residual(m);
        let trace_error = (m.trace() - ONE).norm();
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let min_eigenvalue = hermitian_eigenvalues(&sym)?.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self {
            hermiticity,
            trace_error,
            min_eigenvalue,
        })
    }

    pub fn is_valid(&self) -> bool {
        self.hermiticity <= HERMITICITY_TOL && self.trace_error <= TRACE_TOL && self.min_eigenvalue >= -PSD_TOL
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows().max(1),
                got: entries.ncols(),
            });
        }
        let d = StateDiagnostics::of(&entries)?;
        if !d.is_valid() {
            return Err(Error::InvalidState {
                hermiticity: d.hermiticity,
                trace: d.trace_error,
                min_eigenvalue: d.min_eigenvalue,
            });
        }
        Ok(Self::from_trusted(entries))
    }

    /// Wraps a matrix known to be a state (channel outputs).
    pub fn from_trusted(entries: DMatrix<C64>) -> Self {
        Self {
            dim: entries.nrows(),
            entries,
        }
    }

    pub fn fock(n: usize, dim: usize) -> Self {
        assert!(n < dim);
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        m[(n, n)] = ONE;
        Self::from_trusted(m)
    }

    /// `|psi><psi|` after normalizing `psi`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState {
                hermiticity: 0.0,
                trace: 1.0,
                min_eigenvalue: 0.0,
            });
        }
        let v = psi / C64::new(norm, 0.0);
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    /// `diag(p)`.
    pub fn diagonal(p: &[f64]) -> Self {
        let n = p.len();
        Self::from_trusted(DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(p[i], 0.0) } else { ZERO }))
    }

    /// Full-rank random state `G G^dagger / tr` with `G` complex Ginibre.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        // exact Hermitian symmetrization against rounding
        let m = (&m + m.adjoint()) * C64::new(0.5 / tr.re, 0.0);
        Self::from_trusted(m)
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn diagnostics(&self) -> Result<StateDiagnostics> {
        StateDiagnostics::of(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }
}

/// Entrywise product with a kernel.
pub fn apply_kernel(rho: &DensityMatrix, kernel: &KernelMatrix) -> Result<DensityMatrix> {
    if rho.dim != kernel.dim {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim,
            got: rho.dim,
        });
    }
    let out = DMatrix::from_fn(rho.dim, rho.dim, |i, j| {
        if i == j {
            rho.entries[(i, i)]
        } else {
            rho.entries[(i, j)] * kernel.entries[(i, j)]
        }
    });
    Ok(DensityMatrix::from_trusted(out))
}

/// `N(rho)_{nm} = K_{nm} rho_{nm}`.
pub fn apply(rho: &DensityMatrix, p: &ChannelParams) -> Result<DensityMatrix> {
    let k = kernel_matrix(p, rho.dim)?;
    apply_kernel(rho, &k)
}

/// A channel at fixed parameters and system dimension, holding its kernel.
#[derive(Debug, Clone)]
pub struct DephasingChannel {
    pub params: ChannelParams,
    pub dim: usize,
    kernel: Arc<KernelMatrix>,
}

impl DephasingChannel {
    pub fn new(params: ChannelParams, dim: usize) -> Result<Self> {
        let kernel = Arc::new(kernel_matrix(&params, dim)?);
        Ok(Self { params, dim, kernel })
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_kernel(rho, &self.kernel)
    }

    pub fn kraus(&self, env_cap: usize) -> Result<KrausSet> {
        kraus_set(&self.params, self.dim, env_cap)
    }
}

/// Environment states of levels `0..dim` with a common cutoff.
pub fn environment_states(p: &ChannelParams, dim: usize, env_dim: usize) -> Result<Vec<CoherentVector>> {
    p.max_dimension().check(dim)?;
    (0..dim)
        .map(|n| coherent_vector(n, p, env_dim).and_then(|v| v.require_tail(DEFAULT_TAIL_TOL)))
        .collect()
}

/// `sum_n X_nn |v_n><v_n|`: the complementary map on an arbitrary operator
/// (off-diagonal entries of `X` do not reach the environment).
pub fn complementary_map(x: &DMatrix<C64>, states: &[CoherentVector]) -> DMatrix<C64> {
    assert_eq!(x.nrows(), states.len());
    let de = states.first().map_or(1, |v| v.env_dim);
    let mut out = DMatrix::from_element(de, de, ZERO);
    for (n, v) in states.iter().enumerate() {
        let w = x[(n, n)];
        if w != ZERO {
            out += (&v.amplitudes * v.amplitudes.adjoint()) * w;
        }
    }
    out
}

/// Environment output `sum_n rho_nn |-i tau_n><-i tau_n|`.
pub fn complementary_apply(rho: &DensityMatrix, p: &ChannelParams, env_dim: usize) -> Result<DensityMatrix> {
    let states = environment_states(p, rho.dim, env_dim)?;
    Ok(DensityMatrix::from_trusted(complementary_map(&rho.entries, &states)))
}

/// Spectrum (descending) of the Gram matrix `sqrt(p_i p_j) K_ij`, which is
/// the spectrum of the complementary output on `diag(p)`.
pub fn gram_spectrum(pvec: &[f64], kernel: &KernelMatrix) -> Result<Vec<f64>> {
    if pvec.len() != kernel.dim {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim,
            got: pvec.len(),
        });
    }
    let g = gram_matrix(pvec, kernel);
    let (vals, _) = crate::linalg::symmetric_eigen(&g)?;
    let mut v: Vec<f64> = vals.iter().rev().cloned().collect();
    for x in v.iter_mut() {
        if *x < 0.0 && *x > -PSD_TOL {
            *x = 0.0;
        }
    }
    Ok(v)
}

pub fn gram_matrix(pvec: &[f64], kernel: &KernelMatrix) -> DMatrix<f64> {
    let s: Vec<f64> = pvec.iter().map(|x| x.max(0.0).sqrt()).collect();
    DMatrix::from_fn(pvec.len(), pvec.len(), |i, j| s[i] * s[j] * kernel.entries[(i, j)])
}

/// Complementary output spectrum for the input `diag(pvec)` on levels
/// `0..pvec.len()`.
pub fn complementary_spectrum(pvec: &[f64], p: &ChannelParams) -> Result<Vec<f64>> {
    crate::capacity::check_simplex(pvec)?;
    let k = kernel_matrix(p, pvec.len())?;
    gram_spectrum(pvec, &k)
}

/// Diagonal Kraus operators `(K_l)_{nn} = <l|-i tau_n>` with the common
/// phase `(-i)^l` of each operator removed, which leaves them real.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub dim: usize,
    /// `diagonals[l][n] = (K_l)_{nn}`.
    pub diagonals: Vec<DVector<f64>>,
    /// `max |sum_l K_l^dagger K_l - 1|`.
    pub completeness_residual: f64,
}

impl KrausSet {
    pub fn len(&self) -> usize {
        self.diagonals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonals.is_empty()
    }

    pub fn operator(&self, l: usize) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.diagonals[l])
    }

    /// `sum_l K_l rho K_l^dagger`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.dim,
            });
        }
        let mut out = DMatrix::from_element(self.dim, self.dim, ZERO);
        for d in &self.diagonals {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out[(i, j)] += rho.entries[(i, j)] * (d[i] * d[j]);
                }
            }
        }
        Ok(DensityMatrix::from_trusted(out))
    }

    pub fn completeness_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for d in &self.diagonals {
            let k = DMatrix::from_diagonal(d);
            m += k.transpose() * &k;
        }
        m
    }
}

fn kraus_from_states(dim: usize, states: &[CoherentVector], len: usize) -> KrausSet {
    let diagonals: Vec<DVector<f64>> = (0..len)
        .map(|l| {
            // (-i)^l * i^l = 1
            let undo = match l % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            DVector::from_fn(dim, |n, _| {
                let a = states[n].amplitudes.get(l).copied().unwrap_or(ZERO);
                (a * undo).re
            })
        })
        .collect();
    let completeness_residual = (0..dim)
        .map(|n| {
            let s: f64 = diagonals.iter().map(|d| d[n] * d[n]).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max);
    KrausSet {
        dim,
        diagonals,
        completeness_residual,
    }
}

/// Kraus family of the channel on `dim` levels. For `lambda < 0` it has one
/// operator per environment level; for `lambda >= 0` the number of
/// operators doubles from 16 until the completeness residual drops below
/// [`KRAUS_TOL`], failing past `env_cap`.
pub fn kraus_set(p: &ChannelParams, dim: usize, env_cap: usize) -> Result<KrausSet> {
    p.max_dimension().check(dim)?;
    if let Some(d) = forced_env_dim(p) {
        let states: Vec<CoherentVector> = (0..dim).map(|n| coherent_vector(n, p, d)).collect::<Result<_>>()?;
        return Ok(kraus_from_states(dim, &states, d));
    }
    let mut len = 16.min(env_cap.max(1));
    loop {
        let states: Vec<CoherentVector> = (0..dim).map(|n| coherent_vector(n, p, len)).collect::<Result<_>>()?;
        let set = kraus_from_states(dim, &states, len);
        if set.completeness_residual < KRAUS_TOL {
            return Ok(set);
        }
        if len >= env_cap {
            return Err(Error::Truncation {
                env_dim: len,
                tail: set.completeness_residual,
                tol: KRAUS_TOL,
            });
        }
        len = (2 * len).min(env_cap);
    }
}

/// Fock amplitudes `e^{-|alpha|^2/2} alpha^n / sqrt(n!)` of a coherent
/// state on `dim` levels, renormalized after the cutoff.
///
/// For `lambda >= 0` the discarded tail must be below [`INPUT_TAIL_TOL`];
/// for `lambda < 0` the state is projected onto the finite space regardless.
pub fn coherent_input(alpha: C64, p: &ChannelParams, dim: usize) -> Result<DVector<C64>> {
    p.max_dimension().check(dim)?;
    let mut amps = DVector::from_element(dim, ZERO);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        amps[n] = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    if p.lambda >= 0.0 && tail >= INPUT_TAIL_TOL {
        return Err(Error::InputTruncation { dim, tail });
    }
    Ok(amps / C64::new(kept.sqrt(), 0.0))
}

/// Channel output for a coherent input:
/// `rho_nm = K_nm c_n conj(c_m)` with `c` from [`coherent_input`].
pub fn coherent_input_output(alpha: C64, p: &ChannelParams, dim: usize) -> Result<DensityMatrix> {
    let c = coherent_input(alpha, p, dim)?;
    let k = kernel_matrix(p, dim)?;
    Ok(DensityMatrix::from_trusted(DMatrix::from_fn(dim, dim, |i, j| {
        c[i] * c[j].conj() * k.entries[(i, j)]
    })))
}

/// `U_theta = exp(i theta K0)`, diagonal.
pub fn phase_rotation(p: &ChannelParams, dim: usize, theta: f64) -> DVector<C64> {
    DVector::from_fn(dim, |n, _| C64::from_polar(1.0, theta * k0_eigenvalue(n, p)))
}

fn conjugate_diag(rho: &DMatrix<C64>, u: &DVector<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| u[i] * rho[(i, j)] * u[j].conj())
}

/// `max |N(U rho U^dagger) - U N(rho) U^dagger|` with `U = exp(i theta K0)`.
pub fn phase_covariance_residual(rho: &DensityMatrix, theta: f64, p: &ChannelParams) -> Result<f64> {
    let u = phase_rotation(p, rho.dim, theta);
    let rotated = DensityMatrix::from_trusted(conjugate_diag(&rho.entries, &u));
    let lhs = apply(&rotated, p)?;
    let rhs = conjugate_diag(&apply(rho, p)?.entries, &u);
    Ok(max_abs_diff(&lhs.entries, &rhs))
}

/// Coefficients `(zeta, zeta0)` of
/// `exp(beta A^dagger - conj(beta) A) = exp(zeta A^dagger) exp(ln(zeta0) K0) exp(-conj(zeta) A)`
/// for the algebra `[K0, A] = -(lambda_alg / 2) A`.
pub fn gaussian_decomposition(beta: C64, lambda_alg: f64) -> Result<(C64, f64)> {
    if !(beta.re.is_finite() && beta.im.is_finite()) {
        return Err(Error::InvalidParams("beta must be finite"));
    }
    if lambda_alg == 0.0 || !lambda_alg.is_finite() {
        return Err(Error::InvalidParams("lambda_alg must be finite and nonzero"));
    }
    let r = beta.norm();
    if r == 0.0 {
        return Ok((ZERO, 1.0));
    }
    let phase = beta / r;
    let s = (0.5 * lambda_alg.abs()).sqrt();
    let x = s * r;
    if lambda_alg > 0.0 {
        let zeta = phase * (x.tanh() / s);
        let zeta0 = (-(4.0 / lambda_alg) * crate::linalg::ln_cosh(x)).exp();
        Ok((zeta, zeta0))
    } else {
        if x >= core::f64::consts::FRAC_PI_2 {
            return Err(Error::Singularity { argument: x });
        }
        let zeta = phase * (x.tan() / s);
        let zeta0 = x.cos().powf(4.0 / lambda_alg.abs());
        Ok((zeta, zeta0))
    }
}

/// `exp(N)` for a nilpotent `N` as a finite series.
fn nilpotent_exp(n: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = n.nrows();
    let mut out = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for k in 1..dim.max(1) {
        term = (&term * n) / C64::new(k as f64, 0.0);
        if crate::linalg::max_abs(&term) == 0.0 {
            break;
        }
        out += &term;
    }
    out
}

fn displacement_lhs(p: &ChannelParams, beta: C64, dim: usize) -> Result<DMatrix<C64>> {
    let a = build_annihilator(p, dim)?.entries;
    let ad = a.adjoint();
    // exp(beta A^dagger - conj(beta) A) = exp(-i H) with H = i (beta A^dagger - conj(beta) A)
    let h = (&ad * beta - &a * beta.conj()) * C64::new(0.0, 1.0);
    unitary_from_hermitian(&h, 1.0)
}

/// Block on which the decomposition is compared, and for `lambda < 0` the
/// irreducible dimension the plain exponential is built on.
fn gaussian_blocks(p: &ChannelParams, dim: usize) -> Result<(usize, Option<usize>)> {
    if p.lambda < 0.0 {
        if !p.is_exact_finite_rep() {
            return Err(Error::InvalidParams(
                "Gaussian decomposition needs a closing lambda < 0 representation",
            ));
        }
        let d = forced_env_dim(p).unwrap();
        // the top level is decoupled from A but not from K0
        return Ok((dim.min(d - 1), Some(d - 1)));
    }
    Ok((dim, None))
}

/// `max |exp(beta A^dagger - conj(beta) A) - exp(zeta A^dagger) zeta0^{K0} exp(-conj(zeta) A)|`
/// over the first `dim` levels (for `lambda < 0`, the irreducible block).
///
/// The factored side is exact on any truncation (triangular factors); the
/// plain exponential is computed on a padded space until the compared block
/// is stable.
pub fn gaussian_decomposition_residual(beta: C64, p: &ChannelParams, dim: usize) -> Result<f64> {
    let (block, irreducible) = gaussian_blocks(p, dim)?;
    let (zeta, zeta0) = gaussian_decomposition(beta, p.lambda_alg())?;
    let a = build_annihilator(p, block)?.entries;
    let ad = a.adjoint();
    let left = nilpotent_exp(&(&ad * zeta));
    let right = nilpotent_exp(&(&a * (-zeta.conj())));
    let mid = DMatrix::from_fn(block, block, |i, j| {
        if i == j {
            C64::new((zeta0.ln() * k0_eigenvalue(i, p)).exp(), 0.0)
        } else {
            ZERO
        }
    });
    let rhs = left * mid * right;

    let lhs = if let Some(d) = irreducible {
        displacement_lhs(p, beta, d)?.view((0, 0), (block, block)).into_owned()
    } else {
        let mut pad = block.max(8);
        let mut prev = displacement_lhs(p, beta, block + pad)?.view((0, 0), (block, block)).into_owned();
        loop {
            pad *= 2;
            let next = displacement_lhs(p, beta, block + pad)?.view((0, 0), (block, block)).into_owned();
            let change = max_abs_diff(&next, &prev);
            prev = next;
            if change < 1e-13 {
                break;
            }
            if block + pad > 1024 {
                return Err(Error::NonConvergence { dim_e: block + pad, change });
            }
        }
        prev
    };
    Ok(max_abs_diff(&lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(gamma: f64, lambda: f64) -> ChannelParams {
        ChannelParams::new(gamma, lambda, 1.0).unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
        let half = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(half).is_ok());
        let mut bad = DMatrix::from_element(2, 2, ZERO);
        bad[(0, 0)] = C64::new(1.5, 0.0);
        bad[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(matches!(DensityMatrix::new(bad), Err(Error::InvalidState { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = DensityMatrix::random(&mut rng, 5);
        assert!(r.diagnostics().unwrap().is_valid());
    }

    #[test]
    fn identity_channel_at_zero_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::random(&mut rng, 5);
        for l in [0.0, 0.4, -0.5] {
            let out = apply(&rho, &params(0.0, l)).unwrap();
            assert!(out.max_abs_diff(&rho) < 1e-15);
        }
    }

    #[test]
    fn diagonal_is_preserved_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(&mut rng, 6);
        let out = apply(&rho, &params(2.0, 0.3)).unwrap();
        for i in 0..6 {
            assert_eq!(out.entries[(i, i)], rho.entries[(i, i)]);
        }
    }

    #[test]
    fn complementary_examples() {
        let p = params(0.5, 0.3);
        let out = complementary_apply(&DensityMatrix::fock(0, 4), &p, 256).unwrap();
        assert!((out.entries[(0, 0)].re - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = DensityMatrix::random(&mut rng, 4);
        let out = complementary_apply(&rho, &params(0.0, 0.3), 8).unwrap();
        assert!((out.entries[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((out.entries.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gram_spectrum_examples() {
        let p = params(1.0, 0.0);
        let k0 = KernelMatrix {
            dim: 2,
            entries: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        };
        let s = gram_spectrum(&[0.5, 0.5], &k0).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 0.5).abs() < 1e-15);
        let k1 = KernelMatrix {
            dim: 2,
            entries: DMatrix::from_element(2, 2, 1.0),
        };
        let s = gram_spectrum(&[0.5, 0.5], &k1).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && s[1].abs() < 1e-15);
        let s = complementary_spectrum(&[0.2, 0.3, 0.5], &p).unwrap();
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(s.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn kraus_examples() {
        let k = kraus_set(&params(0.0, 0.5), 4, 64).unwrap();
        assert!(k.completeness_residual < 1e-15);
        assert!(k.diagonals[0].iter().all(|&x| x == 1.0));
        assert!(k.diagonals[1..].iter().all(|d| d.iter().all(|&x| x == 0.0)));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for l in [-0.5, -0.3, 0.0, 0.3] {
            // lambda > 0 environments spread quickly with gamma
            let p = params(if l > 0.0 { 0.1 } else { 0.4 }, l);
            let dim = p.max_dimension().clip(6);
            let k = kraus_set(&p, dim, 512).unwrap();
            assert!(k.completeness_residual < 1e-8, "{l}: {}", k.completeness_residual);
            let rho = DensityMatrix::random(&mut rng, dim);
            let diff = k.apply(&rho).unwrap().max_abs_diff(&apply(&rho, &p).unwrap());
            assert!(diff < 1e-8, "{l}: {diff}");
        }
    }

    #[test]
    fn kraus_cap_is_reported() {
        assert!(matches!(
            kraus_set(&params(4.0, 0.5), 8, 64),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn coherent_inputs() {
        let out = coherent_input_output(ZERO, &params(1.0, 0.3), 6).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::fock(0, 6)) < 1e-15);

        let alpha = C64::new(0.8, -0.3);
        let proj = DensityMatrix::pure(&coherent_input(alpha, &params(0.0, 0.0), 30).unwrap()).unwrap();
        let out = coherent_input_output(alpha, &params(0.0, 0.0), 30).unwrap();
        assert!(out.max_abs_diff(&proj) < 1e-15);

        for l in [0.3, 0.0, -0.5] {
            let p = params(0.7, l);
            let dim = p.max_dimension().clip(30);
            let proj = DensityMatrix::pure(&coherent_input(alpha, &p, dim).unwrap()).unwrap();
            let via_apply = apply(&proj, &p).unwrap();
            let out = coherent_input_output(alpha, &p, dim).unwrap();
            assert!(out.max_abs_diff(&via_apply) < 1e-12);
        }
        assert!(matches!(
            coherent_input_output(C64::new(3.0, 0.0), &params(1.0, 0.0), 5),
            Err(Error::InputTruncation { .. })
        ));
    }

    #[test]
    fn phase_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for l in [-0.4, 0.0, 0.4] {
            let p = params(1.0, l);
            let dim = p.max_dimension().clip(6);
            let rho = DensityMatrix::random(&mut rng, dim);
            assert_eq!(phase_covariance_residual(&rho, 0.0, &p).unwrap(), 0.0);
            assert!(phase_covariance_residual(&rho, 1.3, &p).unwrap() <= 1e-12);
            let d = DensityMatrix::diagonal(&alloc::vec![1.0 / dim as f64; dim]);
            assert!(phase_covariance_residual(&d, 2.0, &p).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn gaussian_decomposition_examples() {
        assert_eq!(gaussian_decomposition(ZERO, 0.6).unwrap(), (ZERO, 1.0));
        assert!(matches!(
            gaussian_decomposition(C64::new(3.0, 0.0), -1.0),
            Err(Error::Singularity { .. })
        ));
        let beta = C64::new(0.6, 0.5);
        for l in [0.5, 0.1, -0.2, -0.5] {
            let p = params(1.0, l);
            let r = gaussian_decomposition_residual(beta, &p, 10).unwrap();
            assert!(r < 1e-8, "{l}: {r}");
        }
        // a sub-block of the irreducible space
        let r = gaussian_decomposition_residual(beta, &params(1.0, -0.2), 6).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
