//! Parameter grids evaluated in parallel, returned in grid order.

use ddc_core::capacity::{
    optimize_kernel, spaced_levels, CapacityResult, EnergyConstraint, OptimizerOptions,
};
use ddc_core::kernel::{kernel_entry_with, Convention, KernelMatrix};
use ddc_core::{ChannelParams, Error};
use rayon::prelude::*;

use crate::error::CliError;

/// `steps` evenly spaced points from `min` to `max` inclusive.
/// A single step gives `[min]`.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// Runs `f` on the pool sized by `DDC_THREADS` (default: rayon's choice).
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DDC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::InvalidArgs(format!("DDC_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::InvalidArgs(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone)]
pub struct KernelMapGrid {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub omega: f64,
    pub convention: Convention,
}

/// `K` is `None` where `n` or `m` lies outside the `lambda < 0` space.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub lambda: f64,
    pub gamma: f64,
    pub n: usize,
    pub m: usize,
    pub k: Option<f64>,
}

/// Rows are ordered lambda-major, gamma-minor.
pub fn kernel_map(grid: &KernelMapGrid) -> Result<Vec<KernelRow>, CliError> {
    let points: Vec<(f64, f64)> = grid
        .lambdas
        .iter()
        .flat_map(|&l| grid.gammas.iter().map(move |&g| (l, g)))
        .collect();
    let rows = with_pool(|| {
        points
            .par_iter()
            .map(|&(lambda, gamma)| -> Result<KernelRow, CliError> {
                let p = ChannelParams::new(gamma, lambda, grid.omega)?;
                let k = match kernel_entry_with(grid.n, grid.m, &p, grid.convention) {
                    Ok(k) => Some(k),
                    Err(Error::DimensionExceeded { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                Ok(KernelRow {
                    lambda,
                    gamma,
                    n: grid.n,
                    m: grid.m,
                    k,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct CapacityGrid {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub ns: Vec<usize>,
    pub omega: f64,
    pub energy: Option<f64>,
    /// Base level followed by gaps; the last gap repeats.
    pub offsets: Vec<usize>,
    pub options: OptimizerOptions,
}

/// `result` is `None` where the input levels do not fit the `lambda < 0` space.
#[derive(Debug, Clone)]
pub struct CapacityRow {
    pub lambda: f64,
    pub gamma: f64,
    pub n: usize,
    pub levels: Vec<usize>,
    pub result: Option<CapacityResult>,
}

pub fn input_levels(offsets: &[usize], n: usize) -> Vec<usize> {
    let (base, gaps) = match offsets.split_first() {
        Some((b, g)) if !g.is_empty() => (*b, g.to_vec()),
        Some((b, _)) => (*b, vec![1]),
        None => (0, vec![1]),
    };
    spaced_levels(base, &gaps, n + 1)
}

/// Rows are ordered lambda, then N, then gamma. Every row is an independent
/// single-threaded optimization with the grid's seed.
pub fn capacity_sweep(grid: &CapacityGrid) -> Result<Vec<CapacityRow>, CliError> {
    let mut points = Vec::new();
    for &lambda in &grid.lambdas {
        for &n in &grid.ns {
            for &gamma in &grid.gammas {
                points.push((lambda, n, gamma));
            }
        }
    }
    let rows = with_pool(|| {
        points
            .par_iter()
            .map(|&(lambda, n, gamma)| capacity_row(grid, lambda, n, gamma))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(rows)
}

fn capacity_row(grid: &CapacityGrid, lambda: f64, n: usize, gamma: f64) -> Result<CapacityRow, CliError> {
    let p = ChannelParams::new(gamma, lambda, grid.omega)?;
    let levels = input_levels(&grid.offsets, n);
    let kernel = match KernelMatrix::for_levels(&p, &levels, grid.options.convention) {
        Ok(k) => k,
        Err(Error::DimensionExceeded { .. }) => {
            return Ok(CapacityRow {
                lambda,
                gamma,
                n,
                levels,
                result: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let constraint = grid
        .energy
        .map(|e| EnergyConstraint::new(e, &levels, lambda))
        .transpose()?;
    let result = optimize_kernel(kernel, levels.clone(), constraint.as_ref(), &grid.options)?;
    Ok(CapacityRow {
        lambda,
        gamma,
        n,
        levels,
        result: Some(result),
    })
}
