//! Entropies, coherent information on diagonal inputs and the quantum
//! capacity `Q = max_p [H(p) - S(Gram(p))]` by mirror ascent on the simplex.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::channel::{apply_kernel, complementary_apply, gram_matrix, DensityMatrix, PSD_TOL};
use crate::error::{Error, Result};
use crate::kernel::{Convention, KernelMatrix};
use crate::linalg::{hermitian_eigenvalues, symmetric_eigen};
use crate::params::ChannelParams;

const LN2: f64 = core::f64::consts::LN_2;
const SIMPLEX_TOL: f64 = 1e-10;
/// Floor for eigenvalues inside `log2` in the gradient.
const EIGEN_FLOOR: f64 = 1e-300;

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `-sum e log2 e` over a spectrum, tolerating rounding negatives down to
/// `-1e-10`.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &e in values {
        if e < -PSD_TOL {
            return Err(Error::InvalidState {
                hermiticity: 0.0,
                trace: 0.0,
                min_eigenvalue: e,
            });
        }
        s -= xlog2x(e);
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let vals = hermitian_eigenvalues(&rho.entries)?;
    entropy_of_spectrum(vals.as_slice())
}

/// Shannon entropy in bits.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

pub fn check_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbability("empty"));
    }
    if p.iter().any(|x| !x.is_finite() || *x < -SIMPLEX_TOL) {
        return Err(Error::InvalidProbability("entries must be finite and nonnegative"));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidProbability("entries must sum to 1"));
    }
    Ok(())
}

/// `J(diag p) = H(p) - S(Gram(p))` for a kernel on the chosen levels.
pub fn coherent_information_kernel(pvec: &[f64], kernel: &KernelMatrix) -> Result<f64> {
    check_simplex(pvec)?;
    let spec = crate::channel::gram_spectrum(pvec, kernel)?;
    Ok(shannon_entropy(pvec) - entropy_of_spectrum(&spec)?)
}

/// `J` for `diag(pvec)` on the levels `0..pvec.len()`.
pub fn coherent_information(pvec: &[f64], p: &ChannelParams) -> Result<f64> {
    let k = crate::kernel::kernel_matrix(p, pvec.len())?;
    coherent_information_kernel(pvec, &k)
}

/// `S(N(rho)) - S(N^c(rho))` for a general input. The complementary
/// entropy is taken from the Gram matrix of `diag(rho)`, whose spectrum is
/// that of the environment output.
pub fn coherent_information_state(rho: &DensityMatrix, kernel: &KernelMatrix) -> Result<f64> {
    let out = apply_kernel(rho, kernel)?;
    let diag: Vec<f64> = rho.diagonal_values().iter().map(|x| x.max(0.0)).collect();
    let spec = crate::channel::gram_spectrum(&diag, kernel)?;
    Ok(von_neumann_entropy(&out)? - entropy_of_spectrum(&spec)?)
}

/// Same quantity through the explicit environment state
/// (`complementary_apply`), independent of the Gram shortcut.
pub fn coherent_information_full(rho: &DensityMatrix, p: &ChannelParams, env_dim: usize) -> Result<f64> {
    let out = crate::channel::apply(rho, p)?;
    let env = complementary_apply(rho, p, env_dim)?;
    Ok(von_neumann_entropy(&out)? - von_neumann_entropy(&env)?)
}

/// Eigenvalues `(q+, q-)` of the two-level complementary output
/// `[[p1, sqrt(p1 p2) K], [sqrt(p1 p2) K, p2]]`.
pub fn two_level_eigenvalues(p1: f64, k: f64) -> (f64, f64) {
    let p2 = 1.0 - p1;
    let r = ((p1 - p2) * (p1 - p2) + 4.0 * p1 * p2 * k * k).sqrt();
    (0.5 * (1.0 + r), 0.5 * (1.0 - r))
}

/// Level energy `n + lambda n^2 / 2`.
pub fn energy(n: usize, lambda: f64) -> f64 {
    let n = n as f64;
    n + 0.5 * lambda * n * n
}

/// Average-energy bound `sum_k p_k eps_k <= max_energy`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConstraint {
    pub max_energy: f64,
    pub epsilon: Vec<f64>,
}

impl EnergyConstraint {
    pub fn new(max_energy: f64, levels: &[usize], lambda: f64) -> Result<Self> {
        let epsilon: Vec<f64> = levels.iter().map(|&n| energy(n, lambda)).collect();
        if epsilon.iter().any(|&e| e < -1e-12) {
            return Err(Error::InvalidParams("level energy is negative"));
        }
        if !max_energy.is_finite() {
            return Err(Error::InvalidParams("energy bound must be finite"));
        }
        let min_energy = epsilon.iter().cloned().fold(f64::INFINITY, f64::min);
        if max_energy < min_energy {
            return Err(Error::Infeasible {
                energy: max_energy,
                min_energy,
            });
        }
        Ok(Self { max_energy, epsilon })
    }

    pub fn mean(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.epsilon).map(|(a, b)| a * b).sum()
    }

    fn tilt(&self, q: &[f64], theta: f64) -> Vec<f64> {
        let emin = self.epsilon.iter().cloned().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = q
            .iter()
            .zip(&self.epsilon)
            .map(|(&x, &e)| x * (-theta * (e - emin)).exp())
            .collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }

    /// Information (KL) projection onto `{p : mean(p) <= E}`: the
    /// exponential tilt `q_k exp(-theta eps_k)` with the smallest feasible
    /// `theta >= 0`. Returns the projection and `theta`.
    pub fn project(&self, q: &[f64]) -> (Vec<f64>, f64) {
        if self.mean(q) <= self.max_energy {
            return (q.to_vec(), 0.0);
        }
        let emin = self.epsilon.iter().cloned().fold(f64::INFINITY, f64::min);
        if self.max_energy <= emin {
            // only the lowest levels are feasible
            let mask: Vec<f64> = self
                .epsilon
                .iter()
                .map(|&e| if e <= emin { 1.0 } else { 0.0 })
                .collect();
            let support: Vec<f64> = q.iter().zip(&mask).map(|(a, m)| a * m).collect();
            let z: f64 = support.iter().sum();
            let out = if z > 0.0 {
                support.into_iter().map(|x| x / z).collect()
            } else {
                let c = mask.iter().sum::<f64>();
                mask.into_iter().map(|m| m / c).collect()
            };
            return (out, f64::INFINITY);
        }
        let mut hi = 1.0;
        while self.mean(&self.tilt(q, hi)) > self.max_energy {
            hi *= 2.0;
            if hi > 1e12 {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.mean(&self.tilt(q, mid)) > self.max_energy {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        (self.tilt(q, hi), hi)
    }
}

/// Settings of the mirror-ascent optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    pub multistarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Threshold on the KKT residual (weighted spread of the gradient).
    pub tolerance: f64,
    pub convention: Convention,
    /// System levels carrying the input distribution; `None` means `0..=N`.
    pub levels: Option<Vec<usize>>,
    /// Keep the per-iteration `J` history of the best start.
    pub record_trace: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            multistarts: 8,
            seed: 0,
            max_iterations: 100_000,
            tolerance: 1e-9,
            convention: Convention::Proof,
            levels: None,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub levels: Vec<usize>,
    pub pvec: Vec<f64>,
    /// Capacity in bits.
    pub q: f64,
    pub j_trace: Vec<f64>,
    pub converged: bool,
    pub active_energy_constraint: bool,
    pub iterations: usize,
    pub stationarity: f64,
}

/// Levels `base, base + g0, base + g0 + g1, ...` for `count` states; the last
/// gap repeats.
pub fn spaced_levels(base: usize, gaps: &[usize], count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut cur = base;
    for i in 0..count {
        if i > 0 {
            let g = gaps.get(i - 1).or(gaps.last()).copied().unwrap_or(1);
            cur += g;
        }
        out.push(cur);
    }
    out
}

/// Coherent information and its gradient on one kernel.
///
/// With `rho_E = K^{1/2} diag(p) K^{1/2} = sum_k p_k v_k v_k^T` (isospectral
/// to the Gram matrix and linear in `p`),
/// `dJ/dp_k = -log2 p_k + <v_k| log2 rho_E |v_k>`.
pub struct Objective {
    sqrt_k: DMatrix<f64>,
    kernel: KernelMatrix,
}

impl Objective {
    pub fn new(kernel: KernelMatrix) -> Result<Self> {
        let (vals, vecs) = symmetric_eigen(&kernel.entries)?;
        let d = DVector::from_fn(vals.len(), |i, _| vals[i].max(0.0).sqrt());
        let sqrt_k = &vecs * DMatrix::from_diagonal(&d) * vecs.transpose();
        Ok(Self { sqrt_k, kernel })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        let g = gram_matrix(p, &self.kernel);
        let (vals, _) = symmetric_eigen(&g)?;
        let s: f64 = -vals.iter().map(|&e| xlog2x(e.max(0.0))).sum::<f64>();
        Ok(shannon_entropy(p) - s)
    }

    pub fn value_and_gradient(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = p.len();
        let dp = DMatrix::from_diagonal(&DVector::from_column_slice(p));
        let rho = &self.sqrt_k * dp * &self.sqrt_k;
        let rho = (&rho + rho.transpose()) * 0.5;
        let (vals, vecs) = symmetric_eigen(&rho)?;
        let s: f64 = -vals.iter().map(|&e| xlog2x(e.max(0.0))).sum::<f64>();
        let logs: Vec<f64> = vals.iter().map(|&e| e.max(EIGEN_FLOOR).log2()).collect();
        // overlaps[i][k] = <u_i|v_k>
        let overlaps = vecs.transpose() * &self.sqrt_k;
        let mut grad = vec![0.0; n];
        for (k, g) in grad.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &l) in logs.iter().enumerate() {
                let o = overlaps[(i, k)];
                acc += o * o * l;
            }
            *g = -p[k].max(EIGEN_FLOOR).log2() + acc;
        }
        Ok((shannon_entropy(p) - s, grad))
    }
}

/// KKT residual: weighted spread of `g_k - theta eps_k` on the support,
/// `theta` being the fitted multiplier of an active energy bound.
fn stationarity(p: &[f64], g: &[f64], constraint: Option<&EnergyConstraint>, active: bool) -> f64 {
    let eps: Option<&[f64]> = match constraint {
        Some(c) if active => Some(&c.epsilon),
        _ => None,
    };
    let mean = |v: &dyn Fn(usize) -> f64| (0..p.len()).map(|k| p[k] * v(k)).sum::<f64>();
    let theta = if let Some(e) = eps {
        // weighted least-squares slope of g against eps, clipped at zero
        let me = mean(&|k| e[k]);
        let mg = mean(&|k| g[k]);
        let cov = mean(&|k| (e[k] - me) * (g[k] - mg));
        let var = mean(&|k| (e[k] - me) * (e[k] - me));
        if var > 0.0 {
            (cov / var).max(0.0)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let shifted: Vec<f64> = (0..p.len())
        .map(|k| g[k] - eps.map_or(0.0, |e| theta * e[k]))
        .collect();
    let m = mean(&|k| shifted[k]);
    mean(&|k| (shifted[k] - m) * (shifted[k] - m)).sqrt()
}

struct Run {
    p: Vec<f64>,
    j: f64,
    trace: Vec<f64>,
    converged: bool,
    active: bool,
    iterations: usize,
    stationarity: f64,
}

fn ascend(obj: &Objective, start: Vec<f64>, constraint: Option<&EnergyConstraint>, opts: &OptimizerOptions) -> Result<Run> {
    let project = |q: Vec<f64>| -> (Vec<f64>, bool) {
        match constraint {
            Some(c) => {
                let (p, theta) = c.project(&q);
                let tight = c.mean(&p) >= c.max_energy - 1e-10 * c.max_energy.abs().max(1.0);
                (p, theta > 0.0 || tight)
            }
            None => (q, false),
        }
    };
    let (mut p, mut active) = project(start);
    let (mut j, mut g) = obj.value_and_gradient(&p)?;
    let mut eta = LN2;
    let mut trace = Vec::new();
    let mut stat = stationarity(&p, &g, constraint, active);
    let mut it = 0;
    while it < opts.max_iterations && stat >= opts.tolerance {
        it += 1;
        if opts.record_trace {
            trace.push(j);
        }
        let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        for _ in 0..60 {
            let w: Vec<f64> = p
                .iter()
                .zip(&g)
                .map(|(&x, &gk)| if x > 0.0 { x * (eta * (gk - gmax)).exp() } else { 0.0 })
                .collect();
            let z: f64 = w.iter().sum();
            let (cand, cand_active) = project(w.into_iter().map(|x| x / z).collect());
            let (cj, cg) = obj.value_and_gradient(&cand)?;
            if cj >= j - 1e-15 * j.abs().max(1.0) {
                p = cand;
                j = cj;
                g = cg;
                active = cand_active;
                eta = (eta * 1.25).min(1e3);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        stat = stationarity(&p, &g, constraint, active);
        if !accepted {
            // no ascent direction at machine precision
            break;
        }
    }
    if opts.record_trace {
        trace.push(j);
    }
    Ok(Run {
        p,
        j,
        trace,
        converged: stat < opts.tolerance,
        active,
        iterations: it,
        stationarity: stat,
    })
}

/// Dirichlet(1) point: normalized unit exponentials.
fn dirichlet_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Maximizes `J` over distributions on `N + 1` levels (default `0..=N`).
pub fn optimize_capacity(
    p: &ChannelParams,
    n: usize,
    constraint: Option<&EnergyConstraint>,
    opts: &OptimizerOptions,
) -> Result<CapacityResult> {
    if n < 1 {
        return Err(Error::InvalidParams("N must be at least 1"));
    }
    let levels = match &opts.levels {
        Some(l) if l.len() != n + 1 => {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                got: l.len(),
            })
        }
        Some(l) => l.clone(),
        None => (0..=n).collect(),
    };
    if let Some(c) = constraint {
        if c.epsilon.len() != levels.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                got: c.epsilon.len(),
            });
        }
    }
    let kernel = KernelMatrix::for_levels(p, &levels, opts.convention)?;
    optimize_kernel(kernel, levels, constraint, opts)
}

/// [`optimize_capacity`] on a precomputed kernel.
pub fn optimize_kernel(
    kernel: KernelMatrix,
    levels: Vec<usize>,
    constraint: Option<&EnergyConstraint>,
    opts: &OptimizerOptions,
) -> Result<CapacityResult> {
    let dim = kernel.dim;
    let obj = Objective::new(kernel)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Run> = None;
    for _ in 0..opts.multistarts.max(1) {
        let start = dirichlet_point(&mut rng, dim);
        let run = ascend(&obj, start, constraint, opts)?;
        let better = match &best {
            None => true,
            Some(b) => run.j > b.j + 1e-13 || (run.j > b.j - 1e-13 && run.converged && !b.converged),
        };
        if better {
            best = Some(run);
        }
    }
    let b = best.expect("at least one start");
    Ok(CapacityResult {
        levels,
        q: b.j.max(0.0),
        pvec: b.p,
        j_trace: b.trace,
        converged: b.converged,
        active_energy_constraint: b.active,
        iterations: b.iterations,
        stationarity: b.stationarity,
    })
}

/// Exhaustive search over the simplex grid with spacing `1/steps`
/// (two or three levels only). Returns the best point and its `J`.
pub fn grid_capacity(kernel: &KernelMatrix, steps: usize) -> Result<(Vec<f64>, f64)> {
    let obj = Objective::new(kernel.clone())?;
    let h = 1.0 / steps as f64;
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    let mut consider = |p: Vec<f64>| -> Result<()> {
        let j = obj.value(&p)?;
        if j > best.1 {
            best = (p, j);
        }
        Ok(())
    };
    match kernel.dim {
        2 => {
            for i in 0..=steps {
                let a = i as f64 * h;
                consider(vec![a, 1.0 - a])?;
            }
        }
        3 => {
            for i in 0..=steps {
                for k in 0..=(steps - i) {
                    let a = i as f64 * h;
                    let b = k as f64 * h;
                    consider(vec![a, b, (1.0 - a - b).max(0.0)])?;
                }
            }
        }
        _ => return Err(Error::InvalidParams("grid search supports two or three levels")),
    }
    Ok(best)
}
