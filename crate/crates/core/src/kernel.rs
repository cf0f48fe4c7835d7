//! Environment coherent vectors `D(mu)|0>` and the dephasing kernel
//! `K_{n,m} = <-i tau_n | -i tau_m>` in the three `lambda` regimes.
//!
//! For `lambda > 0` the environment carries a discrete su(1,1) series with
//! Bargmann index `nu`, for `lambda < 0` an su(2) spin `j = nu` whenever
//! `2 omega / |lambda|` is an integer, and for `lambda = 0` the Heisenberg
//! algebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{ladder_coefficient, number_energy};
use crate::error::{Error, Result};
use crate::linalg::{ln_cosh, TridiagEigen, C64, ZERO};
use crate::params::{ChannelParams, Dimension};

/// Tail tolerance used when the environment cutoff is chosen automatically.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Largest automatic environment cutoff for `lambda > 0`.
pub const ENV_DIM_CAP: usize = 512;
/// Above this spin dimension the `lambda < 0` kernel switches from the
/// explicit inner product to `cos^{2j}`, which is the same sum in closed form.
const SPIN_INNER_PRODUCT_MAX: usize = 2048;
/// Largest non-closing `lambda < 0` representation that is diagonalized.
const GENERIC_FINITE_MAX: usize = 4096;

/// Which displacement the complementary states carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// `mu_n = sqrt(gamma) <n|A^dagger A|n> = sqrt(gamma) n (1 + y n)`,
    /// which is what the dilation unitary produces.
    #[default]
    Proof,
    /// `mu_n = sqrt(gamma) n`.
    Eq19,
}

/// Environment displacement `mu_n` of system level `n`.
pub fn displacement(n: usize, p: &ChannelParams, convention: Convention) -> f64 {
    let s = p.gamma.sqrt();
    match convention {
        Convention::Proof => s * number_energy(n, p),
        Convention::Eq19 => s * n as f64,
    }
}

/// Group parameter for displacement `mu`: `tau = sqrt(|y|) mu`, zero when
/// `lambda = 0`.
pub fn tau_of(mu: f64, p: &ChannelParams) -> f64 {
    p.y().abs().sqrt() * mu
}

/// `tau_n = sqrt(gamma |lambda| / (2 omega)) n (1 + y n)`.
pub fn tau(n: usize, p: &ChannelParams) -> f64 {
    tau_of(displacement(n, p, Convention::Proof), p)
}

/// Truncated environment state `D(mu)|0>` in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentVector {
    pub env_dim: usize,
    pub amplitudes: DVector<C64>,
    /// Upper bound on the probability mass beyond `env_dim`; zero when the
    /// representation is finite.
    pub tail_bound: f64,
}

impl CoherentVector {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CoherentVector) -> C64 {
        assert_eq!(self.env_dim, other.env_dim);
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Fails when the truncation loses more than `tol` of the norm.
    pub fn require_tail(self, tol: f64) -> Result<Self> {
        if self.tail_bound > tol {
            Err(Error::Truncation {
                env_dim: self.env_dim,
                tail: self.tail_bound,
                tol,
            })
        } else {
            Ok(self)
        }
    }

    /// Zero-padded copy with `env_dim` components (never truncates).
    pub fn padded(&self, env_dim: usize) -> Self {
        assert!(env_dim >= self.env_dim);
        let mut amplitudes = DVector::from_element(env_dim, ZERO);
        amplitudes.rows_mut(0, self.env_dim).copy_from(&self.amplitudes);
        Self {
            env_dim,
            amplitudes,
            tail_bound: self.tail_bound,
        }
    }
}

/// `(-i)^k`.
fn minus_i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// Environment dimension forced by a `lambda < 0` deformation.
pub fn forced_env_dim(p: &ChannelParams) -> Option<usize> {
    match p.max_dimension() {
        Dimension::Finite(d) => Some(d),
        Dimension::Unbounded => None,
    }
}

/// `D(mu)|0>` for the environment of `p`. `env_dim` is ignored for
/// `lambda < 0`.
pub fn coherent_vector_mu(mu: f64, p: &ChannelParams, env_dim: usize) -> Result<CoherentVector> {
    if let Some(d) = forced_env_dim(p) {
        return if p.is_exact_finite_rep() {
            Ok(spin_vector(mu, p, d))
        } else {
            generic_finite_vector(mu, p, d)
        };
    }
    if env_dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    Ok(series_vector(mu, p, env_dim))
}

/// `D(mu_n)|0>` for system level `n` under the proof convention.
pub fn coherent_vector(n: usize, p: &ChannelParams, env_dim: usize) -> Result<CoherentVector> {
    p.max_dimension().check(n + 1)?;
    coherent_vector_mu(displacement(n, p, Convention::Proof), p, env_dim)
}

/// Grows the environment cutoff (doubling from 16) until the tail bound is
/// at most `tol`, giving up at [`ENV_DIM_CAP`].
pub fn coherent_vector_auto(mu: f64, p: &ChannelParams, tol: f64) -> Result<CoherentVector> {
    if forced_env_dim(p).is_some() {
        return coherent_vector_mu(mu, p, 1);
    }
    let mut dim = 16;
    loop {
        let v = coherent_vector_mu(mu, p, dim)?;
        if v.tail_bound <= tol {
            return Ok(v);
        }
        if dim >= ENV_DIM_CAP {
            return v.require_tail(tol);
        }
        dim = (2 * dim).min(ENV_DIM_CAP);
    }
}

/// `lambda >= 0`: `a_k = (-i)^k t^k sqrt(c_k) a_0` with `c_k` the rising
/// factorial ratio `(2 nu)^{(k)} / k!` (`lambda > 0`, `t = tanh tau`) or
/// `mu^{2k} / k!` in the Heisenberg limit.
fn series_vector(mu: f64, p: &ChannelParams, env_dim: usize) -> CoherentVector {
    let heisenberg = p.lambda == 0.0;
    let (a0, t, two_nu) = if heisenberg {
        ((-0.5 * mu * mu).exp(), mu, 0.0)
    } else {
        let tau = tau_of(mu, p);
        let two_nu = 2.0 * p.nu();
        ((-two_nu * ln_cosh(tau)).exp(), tau.tanh(), two_nu)
    };
    // ratio r_k = |a_{k+1}|^2 / |a_k|^2
    let ratio = |k: usize| -> f64 {
        let kf = k as f64;
        if heisenberg {
            t * t / (kf + 1.0)
        } else {
            t * t * (two_nu + kf) / (kf + 1.0)
        }
    };

    let mut amplitudes = DVector::from_element(env_dim, ZERO);
    let mut mag = a0;
    for k in 0..env_dim {
        amplitudes[k] = minus_i_pow(k) * mag;
        mag *= ratio(k).sqrt();
    }
    // `mag` is now |a_env_dim|; the ratios decrease in k, so the remaining
    // mass is dominated by a geometric series.
    let r = ratio(env_dim);
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    let tail_bound = if r < 1.0 {
        mag * mag / (1.0 - r)
    } else {
        (1.0 - norm).max(0.0)
    };
    CoherentVector {
        env_dim,
        amplitudes,
        tail_bound,
    }
}

/// Spin-`j` rotation of the lowest weight state:
/// `a_k = (-i)^k sin^k(tau) cos^{2j-k}(tau) sqrt(C(2j, k))`.
/// The decoupled boundary level (if any) gets amplitude zero.
fn spin_vector(mu: f64, p: &ChannelParams, env_dim: usize) -> CoherentVector {
    let two_j = env_dim - 2;
    let tau = tau_of(mu, p);
    let (s, c) = tau.sin_cos();
    let mut amplitudes = DVector::from_element(env_dim, ZERO);
    if s.abs() < 1e-300 || c.abs() < 1e-300 {
        // poles of the rotation: the whole weight sits on one end
        let k = if c.abs() < 1e-300 { two_j } else { 0 };
        let sign = if c.abs() < 1e-300 { s.signum() } else { c.signum() };
        amplitudes[k] = minus_i_pow(k) * sign.powi(two_j as i32);
    } else {
        // log-magnitudes avoid underflow for large spins
        let ls = s.abs().ln();
        let lc = c.abs().ln();
        let lg = crate::linalg::ln_gamma((two_j + 1) as f64);
        for k in 0..=two_j {
            let kf = k as f64;
            let ln_binom = lg
                - crate::linalg::ln_gamma(kf + 1.0)
                - crate::linalg::ln_gamma((two_j - k) as f64 + 1.0);
            let mag = (kf * ls + (two_j - k) as f64 * lc + 0.5 * ln_binom).exp();
            let neg = (s < 0.0 && k % 2 == 1) ^ (c < 0.0 && (two_j - k) % 2 == 1);
            let sign = if neg { -1.0 } else { 1.0 };
            amplitudes[k] = minus_i_pow(k) * (sign * mag);
        }
    }
    CoherentVector {
        env_dim,
        amplitudes,
        tail_bound: 0.0,
    }
}

/// Environment generator `B + B^dagger` on `dim` states as a Jacobi matrix
/// (zero diagonal, off-diagonal `sqrt(k (1 + y k))`).
pub fn environment_generator_offdiag(p: &ChannelParams, dim: usize) -> Vec<f64> {
    (1..dim).map(|k| ladder_coefficient(k, p)).collect()
}

fn generic_finite_vector(mu: f64, p: &ChannelParams, dim: usize) -> Result<CoherentVector> {
    if dim > GENERIC_FINITE_MAX {
        return Err(Error::SizeCap {
            size: dim,
            cap: GENERIC_FINITE_MAX,
        });
    }
    let off = environment_generator_offdiag(p, dim);
    let eig = TridiagEigen::full(&alloc::vec![0.0; dim], &off)?;
    // amplitude_k = sum_j V_kj e^{-i mu x_j} V_0j
    let amplitudes = DVector::from_fn(dim, |k, _| {
        let mut acc = ZERO;
        for j in 0..dim {
            acc += C64::from_polar(eig.rows[k][j] * eig.rows[0][j], -mu * eig.values[j]);
        }
        acc
    });
    Ok(CoherentVector {
        env_dim: dim,
        amplitudes,
        tail_bound: 0.0,
    })
}

/// Real dephasing multipliers `K_{n,m}` on a set of system levels.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub dim: usize,
    pub entries: DMatrix<f64>,
}

fn check_levels(p: &ChannelParams, levels: &[usize]) -> Result<()> {
    if let Some(&top) = levels.iter().max() {
        p.max_dimension().check(top + 1)?;
    }
    Ok(())
}

/// Kernel between two displacements.
fn kernel_from_mu(mu_n: f64, mu_m: f64, p: &ChannelParams) -> Result<f64> {
    if mu_n == mu_m {
        return Ok(1.0);
    }
    if p.lambda == 0.0 {
        let d = mu_n - mu_m;
        return Ok((-0.5 * d * d).exp());
    }
    if p.lambda > 0.0 {
        // sech^{2 nu}(tau_n - tau_m) = [(1-t_n^2)(1-t_m^2)]^nu / (1 - t_n t_m)^{2 nu}
        let dt = tau_of(mu_n - mu_m, p);
        return Ok((-2.0 * p.nu() * ln_cosh(dt)).exp());
    }
    let d = forced_env_dim(p).expect("lambda < 0 is finite");
    if p.is_exact_finite_rep() && d - 1 > SPIN_INNER_PRODUCT_MAX {
        let two_j = (d - 2) as i32;
        return Ok(tau_of(mu_n - mu_m, p).cos().powi(two_j));
    }
    let a = coherent_vector_mu(mu_n, p, d)?;
    let b = coherent_vector_mu(mu_m, p, d)?;
    Ok(a.inner(&b).re.clamp(-1.0, 1.0))
}

/// `K_{n,m}` under a chosen displacement convention.
pub fn kernel_entry_with(n: usize, m: usize, p: &ChannelParams, convention: Convention) -> Result<f64> {
    check_levels(p, &[n, m])?;
    if n == m {
        return Ok(1.0);
    }
    if p.lambda == 0.0 {
        // exact in the integer difference
        let d = n.abs_diff(m) as f64;
        return Ok((-0.5 * p.gamma * d * d).exp());
    }
    kernel_from_mu(displacement(n, p, convention), displacement(m, p, convention), p)
}

/// `K_{n,m}`: `exp(-gamma (n-m)^2 / 2)` for `lambda = 0`,
/// `sech^{2 nu}(tau_n - tau_m)` for `lambda > 0` and the finite inner product
/// of coherent vectors for `lambda < 0`.
pub fn kernel_entry(n: usize, m: usize, p: &ChannelParams) -> Result<f64> {
    kernel_entry_with(n, m, p, Convention::Proof)
}

impl KernelMatrix {
    /// Kernel restricted to `levels` (row `i` is level `levels[i]`).
    pub fn for_levels(p: &ChannelParams, levels: &[usize], convention: Convention) -> Result<Self> {
        check_levels(p, levels)?;
        let k = levels.len();
        let mut entries = DMatrix::from_element(k, k, 1.0);
        let finite_vectors = p.lambda < 0.0
            && !(p.is_exact_finite_rep() && forced_env_dim(p).unwrap() - 1 > SPIN_INNER_PRODUCT_MAX);
        let vectors: Option<Vec<CoherentVector>> = if finite_vectors {
            Some(
                levels
                    .iter()
                    .map(|&n| coherent_vector_mu(displacement(n, p, convention), p, 1))
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        };
        for i in 0..k {
            for j in (i + 1)..k {
                let same = displacement(levels[i], p, convention) == displacement(levels[j], p, convention);
                let v = match &vectors {
                    _ if same => 1.0,
                    Some(vs) => vs[i].inner(&vs[j]).re.clamp(-1.0, 1.0),
                    None => kernel_entry_with(levels[i], levels[j], p, convention)?,
                };
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Ok(Self { dim: k, entries })
    }

    pub fn max_abs_diff(&self, other: &KernelMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Kernel on the Fock states `0..dim`.
pub fn kernel_matrix(p: &ChannelParams, dim: usize) -> Result<KernelMatrix> {
    let levels: Vec<usize> = (0..dim).collect();
    KernelMatrix::for_levels(p, &levels, Convention::Proof)
}

/// Sign of the overlap identity: `-` for the infinite (`lambda > 0`) series,
/// `+` for the terminating (`lambda < 0`) one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapSign {
    Plus,
    Minus,
}

/// `(1 - conj(x) y)^{-alpha}` (`Minus`) or `(1 + conj(x) y)^{alpha}` (`Plus`),
/// principal branch.
pub fn overlap_closed_form(x: C64, y: C64, alpha: f64, sign: OverlapSign) -> Result<C64> {
    let z = x.conj() * y;
    match sign {
        OverlapSign::Minus => {
            let modulus = z.norm();
            if modulus >= 1.0 {
                return Err(Error::Divergence { modulus });
            }
            Ok(((C64::new(1.0, 0.0) - z).ln() * (-alpha)).exp())
        }
        OverlapSign::Plus => {
            let base = C64::new(1.0, 0.0) + z;
            if base == ZERO {
                return Ok(if alpha == 0.0 { C64::new(1.0, 0.0) } else { ZERO });
            }
            Ok((base.ln() * alpha).exp())
        }
    }
}

/// Defining series of the overlap: `sum_k c_k conj(x)^k y^k` where
/// `c_k = (alpha)^{(k)} / k!` (`Minus`) or `alpha (alpha-1)...(alpha-k+1) / k!`
/// (`Plus`), i.e. the product of the two coherent-vector coefficient
/// sequences `sqrt(c_k) conj(x)^k` and `sqrt(c_k) y^k`.
pub fn overlap_series(x: C64, y: C64, alpha: f64, sign: OverlapSign, terms: usize) -> C64 {
    let z = x.conj() * y;
    let mut sum = ZERO;
    let mut term = C64::new(1.0, 0.0);
    for k in 0..terms {
        sum += term;
        let kf = k as f64;
        let c = match sign {
            OverlapSign::Minus => (alpha + kf) / (kf + 1.0),
            OverlapSign::Plus => (alpha - kf) / (kf + 1.0),
        };
        term *= z * c;
    }
    sum
}
