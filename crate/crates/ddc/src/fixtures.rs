//! Frozen oracle values for regression tests.

use ddc_core::oracle::{kernel_oracle, START_ENV_DIM};
use ddc_core::{ChannelParams, Result};

use crate::io::FixtureRow;

pub const FIXTURE_LAMBDAS: [f64; 2] = [-0.3, 0.3];
pub const FIXTURE_GAMMA: f64 = 1.0;
pub const FIXTURE_OMEGA: f64 = 1.0;
pub const FIXTURE_DIM: usize = 6;

/// Oracle kernel entries for `n, m < 6` at `gamma = 1`, `lambda = -0.3, 0.3`.
pub fn oracle_fixtures() -> Result<Vec<FixtureRow>> {
    let mut rows = Vec::new();
    for lambda in FIXTURE_LAMBDAS {
        let p = ChannelParams::new(FIXTURE_GAMMA, lambda, FIXTURE_OMEGA)?;
        for n in 0..FIXTURE_DIM {
            for m in 0..FIXTURE_DIM {
                rows.push(FixtureRow {
                    n,
                    m,
                    gamma: FIXTURE_GAMMA,
                    lambda,
                    omega: FIXTURE_OMEGA,
                    k_oracle: kernel_oracle(n, m, &p, START_ENV_DIM)?,
                });
            }
        }
    }
    Ok(rows)
}
