//! Brute-force ground truth from the dilation
//! `U = exp(-i sqrt(gamma) A^dagger A (x) (B + B^dagger))` acting on
//! `rho (x) |0><0|`, without any closed forms.
//!
//! `A^dagger A` is diagonal, so `U` is block diagonal over the system Fock
//! index with blocks `exp(-i mu_n G)`, `G = B + B^dagger`, `mu_n =
//! sqrt(gamma) <n|A^dagger A|n>`. Every block is taken from the spectral
//! decomposition of the same real tridiagonal `G`, which keeps the blocks
//! exactly unitary.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::build_annihilator;
use crate::channel::DensityMatrix;
use crate::error::{Error, Result};
use crate::kernel::{forced_env_dim, CoherentVector};
use crate::linalg::{max_abs_diff, TridiagEigen, C64, ZERO};
use crate::params::ChannelParams;

/// Largest composite dimension (`blocks x dim_e`).
pub const SIZE_CAP: usize = 4096;
/// Output change between successive environment doublings that counts as
/// converged.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Default first environment cutoff of the doubling protocol.
pub const START_ENV_DIM: usize = 32;

fn check_env_dim(p: &ChannelParams, dim_e: usize) -> Result<()> {
    if dim_e == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    p.max_dimension().check(dim_e)
}

fn check_size(blocks: usize, dim_e: usize) -> Result<()> {
    let size = blocks * dim_e;
    if size > SIZE_CAP {
        return Err(Error::SizeCap { size, cap: SIZE_CAP });
    }
    Ok(())
}

/// `mu_n = sqrt(gamma) (A^dagger A)_{nn}` read off the truncated operator.
pub fn system_displacements(p: &ChannelParams, dim_s: usize) -> Result<Vec<f64>> {
    let a = build_annihilator(p, dim_s)?.entries;
    let ada = a.adjoint() * &a;
    Ok((0..dim_s).map(|n| p.gamma.sqrt() * ada[(n, n)].re).collect())
}

/// `B + B^dagger` on `dim_e` environment levels.
pub fn environment_generator(p: &ChannelParams, dim_e: usize) -> Result<DMatrix<f64>> {
    let b = build_annihilator(p, dim_e)?.entries;
    let g = &b + b.adjoint();
    Ok(g.map(|z| z.re))
}

/// Spectral data of `G` on a fixed cutoff: eigenvalues and rows `0..tracked`
/// of the eigenvector matrix.
#[derive(Debug, Clone)]
pub struct EnvironmentSpectrum {
    pub dim_e: usize,
    eig: TridiagEigen,
}

impl EnvironmentSpectrum {
    /// `full` tracks every row (needed for complete output vectors);
    /// otherwise only the vacuum row is kept.
    pub fn new(p: &ChannelParams, dim_e: usize, full: bool) -> Result<Self> {
        check_env_dim(p, dim_e)?;
        let g = environment_generator(p, dim_e)?;
        let diag: Vec<f64> = (0..dim_e).map(|k| g[(k, k)]).collect();
        let off: Vec<f64> = (1..dim_e).map(|k| g[(k - 1, k)]).collect();
        let eig = if full {
            TridiagEigen::full(&diag, &off)?
        } else {
            TridiagEigen::new(&diag, &off, &[0])?
        };
        Ok(Self { dim_e, eig })
    }

    /// `<0| exp(i mu_a G) exp(-i mu_b G) |0> = sum_j |V_0j|^2 e^{-i (mu_b - mu_a) x_j}`.
    pub fn vacuum_overlap(&self, mu_a: f64, mu_b: f64) -> C64 {
        let d = mu_b - mu_a;
        let row0 = &self.eig.rows[0];
        let mut acc = ZERO;
        for (x, v) in self.eig.values.iter().zip(row0) {
            acc += C64::from_polar(v * v, -d * x);
        }
        acc
    }

    /// `exp(-i mu G)|0>`; requires a full spectrum.
    pub fn propagate_vacuum(&self, mu: C64) -> DVector<C64> {
        assert_eq!(self.eig.rows.len(), self.dim_e, "full spectrum required");
        let phases: Vec<C64> = self
            .eig
            .values
            .iter()
            .zip(&self.eig.rows[0])
            .map(|(&x, &v0)| (C64::new(0.0, -1.0) * mu * x).exp() * v0)
            .collect();
        DVector::from_fn(self.dim_e, |k, _| {
            let row = &self.eig.rows[k];
            let mut acc = ZERO;
            for (vk, ph) in row.iter().zip(&phases) {
                acc += ph * *vk;
            }
            acc
        })
    }

    /// `exp(-i mu G)` as a dense matrix; requires a full spectrum.
    pub fn block(&self, mu: f64) -> DMatrix<C64> {
        assert_eq!(self.eig.rows.len(), self.dim_e, "full spectrum required");
        let d = self.dim_e;
        let v = DMatrix::from_fn(d, d, |r, c| self.eig.rows[r][c]);
        let scaled = DMatrix::from_fn(d, d, |r, c| C64::from_polar(v[(r, c)], -mu * self.eig.values[c]));
        scaled * v.transpose().map(|x| C64::new(x, 0.0))
    }
}

/// Block-diagonal dilation unitary.
#[derive(Debug, Clone)]
pub struct OracleUnitary {
    pub dim_s: usize,
    pub dim_e: usize,
    /// `blocks[n] = exp(-i mu_n G)`.
    pub blocks: Vec<DMatrix<C64>>,
    /// `max |U^dagger U - 1|` over the blocks.
    pub unitarity_residual: f64,
}

impl OracleUnitary {
    /// The full `(dim_s dim_e)`-square matrix, index `n * dim_e + k`.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let de = self.dim_e;
        let d = self.dim_s * de;
        let mut u = DMatrix::from_element(d, d, ZERO);
        for (n, b) in self.blocks.iter().enumerate() {
            u.view_mut((n * de, n * de), (de, de)).copy_from(b);
        }
        u
    }
}

pub fn build_unitary(p: &ChannelParams, dim_s: usize, dim_e: usize) -> Result<OracleUnitary> {
    check_size(dim_s, dim_e)?;
    let mus = system_displacements(p, dim_s)?;
    let spec = EnvironmentSpectrum::new(p, dim_e, true)?;
    let blocks: Vec<DMatrix<C64>> = mus.iter().map(|&mu| spec.block(mu)).collect();
    let unitarity_residual = blocks
        .iter()
        .map(crate::linalg::unitarity_residual)
        .fold(0.0, f64::max);
    Ok(OracleUnitary {
        dim_s,
        dim_e,
        blocks,
        unitarity_residual,
    })
}

/// `exp(-i mu (B + B^dagger))|0>` on `dim_e` levels. `tail_bound` holds the
/// weight on the top quarter of the cutoff, a truncation indicator rather
/// than a bound (zero for `lambda < 0`, where the space is complete).
pub fn displacement_apply(mu: C64, p: &ChannelParams, dim_e: usize) -> Result<CoherentVector> {
    check_size(1, dim_e)?;
    let spec = EnvironmentSpectrum::new(p, dim_e, true)?;
    let amplitudes = spec.propagate_vacuum(mu);
    let complete = forced_env_dim(p) == Some(dim_e);
    let tail_bound = if complete {
        0.0
    } else {
        amplitudes.iter().skip(dim_e - dim_e / 4).map(|z| z.norm_sqr()).sum()
    };
    Ok(CoherentVector {
        env_dim: dim_e,
        amplitudes,
        tail_bound,
    })
}

/// Result of the environment-doubling protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    /// Cutoff of the reported value.
    pub dim_e: usize,
    /// Change over the last doubling (zero when the space is complete).
    pub change: f64,
}

/// Runs `eval` on `dim_e = start, 2 start, ...` up to `max_dim_e` until a
/// doubling changes the output by less than `tol`. A complete
/// (`lambda < 0`) environment is evaluated once at its forced dimension.
pub fn converge<T, F, D>(p: &ChannelParams, start: usize, max_dim_e: usize, tol: f64, mut eval: F, diff: D) -> Result<Converged<T>>
where
    F: FnMut(usize) -> Result<T>,
    D: Fn(&T, &T) -> f64,
{
    if let Some(d) = forced_env_dim(p) {
        if d > max_dim_e {
            return Err(Error::SizeCap { size: d, cap: max_dim_e });
        }
        return Ok(Converged {
            value: eval(d)?,
            dim_e: d,
            change: 0.0,
        });
    }
    let mut dim = start.max(2).min(max_dim_e);
    let mut prev = eval(dim)?;
    let mut last_change = f64::INFINITY;
    loop {
        if 2 * dim > max_dim_e {
            return Err(Error::NonConvergence {
                dim_e: dim,
                change: last_change,
            });
        }
        dim *= 2;
        let next = eval(dim)?;
        let change = diff(&prev, &next);
        prev = next;
        if change < tol {
            return Ok(Converged {
                value: prev,
                dim_e: dim,
                change,
            });
        }
        last_change = change;
    }
}

/// `<-i tau_n|-i tau_m>` as the vacuum-to-vacuum amplitude of two blocks of
/// `U`, with the environment cutoff doubled from `dim_e` until converged.
///
/// `U_n^dagger U_m = exp(-i (mu_m - mu_n) G)` is a single block, so the
/// cutoff may grow to the full size cap.
pub fn kernel_oracle(n: usize, m: usize, p: &ChannelParams, dim_e: usize) -> Result<f64> {
    let mus = system_displacements(p, n.max(m) + 1)?;
    let (mu_n, mu_m) = (mus[n], mus[m]);
    let r = converge(
        p,
        dim_e,
        SIZE_CAP,
        CONVERGENCE_TOL,
        |d| Ok(EnvironmentSpectrum::new(p, d, false)?.vacuum_overlap(mu_n, mu_m).re),
        |a, b| (a - b).abs(),
    )?;
    Ok(r.value)
}

/// Oracle kernel on levels `0..dim_s`, every entry from its own pair of
/// blocks and judged converged separately.
#[derive(Debug, Clone)]
pub struct OracleKernel {
    pub values: DMatrix<f64>,
    pub converged: DMatrix<bool>,
    /// Largest cutoff reached.
    pub dim_e: usize,
}

impl OracleKernel {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// [`kernel_oracle`] for all pairs at once, sharing the environment spectra.
/// Entries that never settle keep the value at the largest cutoff and are
/// flagged unconverged.
pub fn kernel_oracle_matrix(p: &ChannelParams, dim_s: usize, start: usize) -> Result<OracleKernel> {
    let mus = system_displacements(p, dim_s)?;
    let eval = |spec: &EnvironmentSpectrum| {
        DMatrix::from_fn(dim_s, dim_s, |i, j| {
            if i == j {
                1.0
            } else {
                spec.vacuum_overlap(mus[i], mus[j]).re
            }
        })
    };
    if let Some(d) = forced_env_dim(p) {
        let spec = EnvironmentSpectrum::new(p, d, false)?;
        return Ok(OracleKernel {
            values: eval(&spec),
            converged: DMatrix::from_element(dim_s, dim_s, true),
            dim_e: d,
        });
    }
    let cap = SIZE_CAP;
    let mut dim = start.max(2).min(cap);
    let mut history: Vec<DMatrix<f64>> = alloc::vec![eval(&EnvironmentSpectrum::new(p, dim, false)?)];
    let mut converged = DMatrix::from_element(dim_s, dim_s, false);
    while 2 * dim <= cap {
        dim *= 2;
        history.push(eval(&EnvironmentSpectrum::new(p, dim, false)?));
        let h = history.len();
        for i in 0..dim_s {
            for j in 0..dim_s {
                let c = (history[h - 1][(i, j)] - history[h - 2][(i, j)]).abs();
                converged[(i, j)] = c < CONVERGENCE_TOL;
            }
        }
        if converged.iter().all(|&c| c) {
            break;
        }
    }
    Ok(OracleKernel {
        values: history.pop().unwrap(),
        converged,
        dim_e: dim,
    })
}

/// `U|n>|0>` for `n = 0..dim_s`, i.e. the environment states.
fn environment_outputs(p: &ChannelParams, dim_s: usize, dim_e: usize) -> Result<Vec<DVector<C64>>> {
    let mus = system_displacements(p, dim_s)?;
    let spec = EnvironmentSpectrum::new(p, dim_e, true)?;
    Ok(mus.iter().map(|&mu| spec.propagate_vacuum(C64::new(mu, 0.0))).collect())
}

/// `Tr_E[U (rho (x) |0><0|) U^dagger]` at a fixed cutoff:
/// `out_nm = rho_nm sum_k (U|n,0>)_k conj((U|m,0>)_k)`.
pub fn evolve_and_trace_at(rho: &DensityMatrix, p: &ChannelParams, dim_e: usize) -> Result<DensityMatrix> {
    check_size(rho.dim, dim_e)?;
    let outs = environment_outputs(p, rho.dim, dim_e)?;
    let out = DMatrix::from_fn(rho.dim, rho.dim, |n, m| rho.entries[(n, m)] * outs[m].dotc(&outs[n]));
    Ok(DensityMatrix::from_trusted(out))
}

/// `Tr_S[U (rho (x) |0><0|) U^dagger] = sum_n rho_nn U|n,0><n,0|U^dagger`
/// restricted to the environment, at a fixed cutoff.
pub fn evolve_and_trace_system_at(rho: &DensityMatrix, p: &ChannelParams, dim_e: usize) -> Result<DensityMatrix> {
    check_size(rho.dim, dim_e)?;
    let outs = environment_outputs(p, rho.dim, dim_e)?;
    let mut env = DMatrix::from_element(dim_e, dim_e, ZERO);
    for (n, v) in outs.iter().enumerate() {
        env += (v * v.adjoint()) * rho.entries[(n, n)];
    }
    Ok(DensityMatrix::from_trusted(env))
}

/// Same partial trace from the dense `U` of [`build_unitary`], entry by
/// entry; only for small cross-checks.
pub fn evolve_and_trace_dense(rho: &DensityMatrix, p: &ChannelParams, dim_e: usize) -> Result<DensityMatrix> {
    let u = build_unitary(p, rho.dim, dim_e)?.to_dense();
    let ds = rho.dim;
    let d = ds * dim_e;
    let mut joint = DMatrix::from_element(d, d, ZERO);
    for n in 0..ds {
        for m in 0..ds {
            joint[(n * dim_e, m * dim_e)] = rho.entries[(n, m)];
        }
    }
    let evolved = &u * joint * u.adjoint();
    let out = DMatrix::from_fn(ds, ds, |n, m| {
        (0..dim_e).fold(ZERO, |acc, k| acc + evolved[(n * dim_e + k, m * dim_e + k)])
    });
    Ok(DensityMatrix::from_trusted(out))
}

fn pad(m: &DMatrix<C64>, d: usize) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(d, d, ZERO);
    out.view_mut((0, 0), m.shape()).copy_from(m);
    out
}

/// Channel output with the doubling protocol (start `dim_e`, cap
/// `dim_s * dim_e <= 4096`).
pub fn evolve_and_trace(rho: &DensityMatrix, p: &ChannelParams, dim_e: usize) -> Result<Converged<DensityMatrix>> {
    converge(
        p,
        dim_e,
        SIZE_CAP / rho.dim.max(1),
        CONVERGENCE_TOL,
        |d| evolve_and_trace_at(rho, p, d),
        |a, b| max_abs_diff(&a.entries, &b.entries),
    )
}

/// Environment output with the doubling protocol; outputs at different
/// cutoffs are compared after zero padding.
pub fn evolve_and_trace_system(rho: &DensityMatrix, p: &ChannelParams, dim_e: usize) -> Result<Converged<DensityMatrix>> {
    converge(
        p,
        dim_e,
        SIZE_CAP / rho.dim.max(1),
        CONVERGENCE_TOL,
        |d| evolve_and_trace_system_at(rho, p, d),
        |a, b| {
            let d = a.dim.max(b.dim);
            max_abs_diff(&pad(&a.entries, d), &pad(&b.entries, d))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply;
    use crate::kernel::{coherent_vector, kernel_entry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(gamma: f64, lambda: f64) -> ChannelParams {
        ChannelParams::new(gamma, lambda, 1.0).unwrap()
    }

    #[test]
    fn identity_at_zero_gamma() {
        let u = build_unitary(&params(0.0, 0.4), 3, 8).unwrap();
        let d = u.to_dense();
        assert!(max_abs_diff(&d, &DMatrix::identity(24, 24)) < 1e-14);
    }

    #[test]
    fn vacuum_block_is_identity() {
        for l in [0.3, 0.0, -0.5] {
            let p = params(1.7, l);
            let de = p.max_dimension().clip(16);
            let u = build_unitary(&p, 2, de).unwrap();
            assert!(max_abs_diff(&u.blocks[0], &DMatrix::identity(de, de)) < 1e-14);
        }
    }

    #[test]
    fn blocks_are_unitary() {
        let p = params(1.0, -0.1);
        let u = build_unitary(&p, 5, 21).unwrap();
        assert!(u.unitarity_residual < 1e-10);
        let u = build_unitary(&params(2.0, 0.3), 4, 64).unwrap();
        assert!(u.unitarity_residual < 1e-10);
    }

    #[test]
    fn size_cap() {
        assert!(matches!(
            build_unitary(&params(1.0, 0.3), 8, 1024),
            Err(Error::SizeCap { .. })
        ));
        assert!(build_unitary(&params(1.0, -1.0), 3, 4).is_err());
    }

    #[test]
    fn kernel_oracle_examples() {
        let p = params(1.3, 0.3);
        assert!((kernel_oracle(2, 2, &p, 32).unwrap() - 1.0).abs() < 1e-10);
        let k = kernel_oracle(3, 1, &params(2.0, 0.0), 32).unwrap();
        assert!((k - (-4.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn oracle_agrees_with_closed_forms_in_reach() {
        for l in [0.3, -0.3, 0.5, -0.5] {
            let p = params(0.5, l);
            let ok = kernel_oracle_matrix(&p, 5, 32).unwrap();
            assert!(ok.all_converged());
            for n in 0..5 {
                for m in 0..5 {
                    let k = kernel_entry(n, m, &p).unwrap();
                    assert!((k - ok.values[(n, m)]).abs() < 1e-8, "{l} {n} {m}");
                }
            }
        }
    }

    #[test]
    fn displacement_matches_coherent_vector() {
        let p = params(1.0, -1.0);
        let mu = crate::kernel::displacement(1, &p, crate::kernel::Convention::Proof);
        let d = displacement_apply(C64::new(mu, 0.0), &p, 3).unwrap();
        let v = coherent_vector(1, &p, 3).unwrap();
        let diff = (&d.amplitudes - &v.amplitudes).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(diff < 1e-12);
        assert_eq!(d.tail_bound, 0.0);
    }

    #[test]
    fn block_and_dense_partial_traces_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = DensityMatrix::random(&mut rng, 3);
        let p = params(0.8, 0.4);
        let a = evolve_and_trace_at(&rho, &p, 24).unwrap();
        let b = evolve_and_trace_dense(&rho, &p, 24).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn evolve_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = DensityMatrix::random(&mut rng, 4);
        let out = evolve_and_trace(&rho, &params(0.0, 0.5), 16).unwrap();
        assert!(out.value.max_abs_diff(&rho) < 1e-13);
        let diag = DensityMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4]);
        let out = evolve_and_trace(&diag, &params(1.0, 0.2), 16).unwrap();
        assert!(out.value.max_abs_diff(&diag) < 1e-13);

        let rho6 = DensityMatrix::random(&mut rng, 6);
        let p = params(0.7, 0.0);
        let out = evolve_and_trace(&rho6, &p, 32).unwrap();
        assert!(out.value.max_abs_diff(&apply(&rho6, &p).unwrap()) < 1e-8);
    }

    #[test]
    fn non_convergence_is_reported() {
        // tau differences of ~9 need environments far beyond the cap
        let p = params(4.0, 0.5);
        assert!(matches!(kernel_oracle(0, 7, &p, 32), Err(Error::NonConvergence { .. })));
    }
}
