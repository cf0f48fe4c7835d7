//! Self-check suite: closed forms against the oracle and algebraic identities.

use std::time::Instant;

use ddc_core::algebra::{commutator_residuals, hamiltonian_identity_residual};
use ddc_core::channel::{
    apply, gaussian_decomposition_residual, kraus_set, phase_covariance_residual, DensityMatrix,
};
use ddc_core::kernel::kernel_matrix;
use ddc_core::oracle::{kernel_oracle_matrix, START_ENV_DIM};
use ddc_core::{ChannelParams, Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Largest Kraus family tried for `lambda > 0`.
pub const KRAUS_ENV_CAP: usize = 4096;

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub max_dim: usize,
    pub tol: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { max_dim: 6, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub identity: String,
    pub params: String,
    /// `None` when the case errored instead of producing a residual.
    pub residual: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub passed: bool,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub max_dim: usize,
    pub tol: f64,
    pub passed: bool,
    pub elapsed_seconds: f64,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for suite in &self.suites {
            s += &format!(
                "{:<18} {:>4} cases  max residual {:.3e}  {}\n",
                suite.name,
                suite.cases,
                suite.max_residual,
                if suite.passed { "PASS" } else { "FAIL" }
            );
            for f in &suite.failures {
                match f.residual {
                    Some(r) => s += &format!("  FAILED {} at {}: residual {r:.3e} ({})\n", f.identity, f.params, f.message),
                    None => s += &format!("  FAILED {} at {}: {}\n", f.identity, f.params, f.message),
                }
            }
        }
        s += &format!(
            "{} in {:.1} s (max-dim {}, tol {:e})\n",
            if self.passed { "all suites passed" } else { "validation FAILED" },
            self.elapsed_seconds,
            self.max_dim,
            self.tol
        );
        s
    }
}

struct Suite {
    name: &'static str,
    tol: f64,
    cases: usize,
    max_residual: f64,
    failures: Vec<Failure>,
}

impl Suite {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            cases: 0,
            max_residual: 0.0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, identity: &str, params: String, outcome: Result<f64>) {
        self.cases += 1;
        match outcome {
            Ok(r) if r.is_finite() && r <= self.tol => self.max_residual = self.max_residual.max(r),
            Ok(r) => {
                self.max_residual = self.max_residual.max(if r.is_nan() { f64::INFINITY } else { r });
                self.failures.push(Failure {
                    identity: identity.into(),
                    params,
                    residual: Some(r),
                    message: format!("exceeds tolerance {:e}", self.tol),
                });
            }
            Err(e) => self.failures.push(Failure {
                identity: identity.into(),
                params,
                residual: None,
                message: e.to_string(),
            }),
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name.into(),
            cases: self.cases,
            max_residual: self.max_residual,
            passed: self.failures.is_empty(),
            failures: self.failures,
        }
    }
}

fn params(gamma: f64, lambda: f64) -> ChannelParams {
    ChannelParams::new(gamma, lambda, 1.0).expect("suite parameters are valid")
}

fn label(p: &ChannelParams, dim: usize) -> String {
    format!("gamma={} lambda={} omega={} dim={dim}", p.gamma, p.lambda, p.omega)
}

fn commutators(opts: &ValidateOptions) -> SuiteReport {
    let mut s = Suite::new("commutators", opts.tol);
    for lambda in [-0.5, -0.2, 0.0, 0.3, 1.0] {
        let p = params(1.0, lambda);
        let dim = p.max_dimension().clip(opts.max_dim);
        s.record(
            "[A,A^dag]/2=K0, [K0,A]=-yA, [K0,A^dag]=yA^dag",
            label(&p, dim),
            commutator_residuals(&p, dim).map(|r| r.max()),
        );
        s.record(
            "omega A^dag A = Omega n + lambda/2 n(n-1)",
            label(&p, dim),
            hamiltonian_identity_residual(&p, dim),
        );
    }
    s.finish()
}

fn kernel_vs_oracle(opts: &ValidateOptions) -> SuiteReport {
    let mut s = Suite::new("kernel-vs-oracle", opts.tol);
    for gamma in [0.1, 0.5] {
        for lambda in [-0.5, -0.1, 0.1, 0.5] {
            let p = params(gamma, lambda);
            let dim = p.max_dimension().clip(opts.max_dim);
            let outcome = (|| {
                let k = kernel_matrix(&p, dim)?;
                let o = kernel_oracle_matrix(&p, dim, START_ENV_DIM)?;
                let diff = k
                    .entries
                    .iter()
                    .zip(o.values.iter())
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                Ok((diff, o.all_converged()))
            })();
            match outcome {
                Ok((diff, true)) => s.record("K_nm = <0|U_n^dag U_m|0>", label(&p, dim), Ok(diff)),
                Ok((diff, false)) => {
                    s.cases += 1;
                    s.failures.push(Failure {
                        identity: "K_nm = <0|U_n^dag U_m|0>".into(),
                        params: label(&p, dim),
                        residual: Some(diff),
                        message: "oracle did not converge within the size cap".into(),
                    });
                }
                Err(e) => s.record("K_nm = <0|U_n^dag U_m|0>", label(&p, dim), Err(e)),
            }
        }
    }
    s.finish()
}

fn kraus(opts: &ValidateOptions, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut s = Suite::new("kraus", opts.tol);
    for lambda in [-0.5, -0.3, 0.0, 0.3] {
        let p = params(0.5, lambda);
        let dim = p.max_dimension().clip(opts.max_dim);
        let rho = DensityMatrix::random(rng, dim);
        match kraus_set(&p, dim, KRAUS_ENV_CAP) {
            Ok(set) => {
                s.record("sum K_l^dag K_l = 1", label(&p, dim), Ok(set.completeness_residual));
                let recon = (|| Ok(set.apply(&rho)?.max_abs_diff(&apply(&rho, &p)?)))();
                s.record("sum K_l rho K_l^dag = N(rho)", label(&p, dim), recon);
            }
            Err(e) => s.record("sum K_l^dag K_l = 1", label(&p, dim), Err(e)),
        }
    }
    s.finish()
}

fn gaussian(opts: &ValidateOptions) -> SuiteReport {
    let mut s = Suite::new("gaussian", opts.tol);
    let betas = [
        C64::new(0.3, 0.0),
        C64::new(0.0, -0.8),
        C64::new(0.6, 0.6),
        C64::new(-1.0, 0.0),
    ];
    for lambda in [-0.5, -0.2, 0.1, 0.4] {
        let p = params(1.0, lambda);
        let dim = p.max_dimension().clip(opts.max_dim);
        for beta in betas {
            s.record(
                "exp(bA^dag - b*A) = exp(zA^dag) z0^K0 exp(-z*A)",
                format!("{} beta={}{:+}i", label(&p, dim), beta.re, beta.im),
                gaussian_decomposition_residual(beta, &p, dim),
            );
        }
    }
    s.finish()
}

fn phase_covariance(opts: &ValidateOptions, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut s = Suite::new("phase-covariance", opts.tol);
    for lambda in [-0.4, 0.0, 0.4] {
        let p = params(1.0, lambda);
        let dim = p.max_dimension().clip(opts.max_dim);
        for theta in [0.0, 1.3, std::f64::consts::PI] {
            let rho = DensityMatrix::random(rng, dim);
            s.record(
                "N(U rho U^dag) = U N(rho) U^dag, U = exp(i theta K0)",
                format!("{} theta={theta}", label(&p, dim)),
                phase_covariance_residual(&rho, theta, &p),
            );
        }
    }
    s.finish()
}

/// Runs every suite. Random states come from ChaCha8 with seed 0.
pub fn run(opts: &ValidateOptions) -> Report {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let suites = vec![
        commutators(opts),
        kernel_vs_oracle(opts),
        kraus(opts, &mut rng),
        gaussian(opts),
        phase_covariance(opts, &mut rng),
    ];
    Report {
        max_dim: opts.max_dim,
        tol: opts.tol,
        passed: suites.iter().all(|s| s.passed),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        suites,
    }
}
