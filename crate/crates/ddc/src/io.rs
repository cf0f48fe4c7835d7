//! CSV tables and JSON state files.
//!
//! Floats are written with `{:.16e}` (17 significant digits) so identical
//! inputs give byte-identical files.

use std::io::{Read, Write};

use ddc_core::channel::DensityMatrix;
use ddc_core::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::sweep::{CapacityRow, KernelRow};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_kernel_map<W: Write>(rows: &[KernelRow], w: W) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    out.write_record(["lambda", "gamma", "n", "m", "K", "valid"])?;
    for r in rows {
        out.write_record([
            fmt_f64(r.lambda),
            fmt_f64(r.gamma),
            r.n.to_string(),
            r.m.to_string(),
            r.k.map(fmt_f64).unwrap_or_default(),
            r.k.is_some().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `p0..pN` columns run to the largest `N` in the sweep; shorter rows and
/// invalid rows leave cells empty.
pub fn write_capacity<W: Write>(rows: &[CapacityRow], w: W) -> Result<(), CliError> {
    let max_n = rows.iter().map(|r| r.n).max().unwrap_or(1);
    let mut out = csv_writer(w);
    let mut header: Vec<String> = ["lambda", "gamma", "N", "Q"].iter().map(|s| s.to_string()).collect();
    header.extend((0..=max_n).map(|i| format!("p{i}")));
    header.push("converged".into());
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![fmt_f64(r.lambda), fmt_f64(r.gamma), r.n.to_string()];
        match &r.result {
            Some(res) => {
                rec.push(fmt_f64(res.q));
                rec.extend((0..=max_n).map(|i| res.pvec.get(i).map(|&x| fmt_f64(x)).unwrap_or_default()));
                rec.push(res.converged.to_string());
            }
            None => {
                rec.push(String::new());
                rec.extend((0..=max_n).map(|_| String::new()));
                rec.push("false".into());
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// One frozen oracle value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub omega: f64,
    #[serde(rename = "K_oracle")]
    pub k_oracle: f64,
}

pub fn write_fixtures<W: Write>(rows: &[FixtureRow], w: W) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    out.write_record(["n", "m", "gamma", "lambda", "omega", "K_oracle"])?;
    for r in rows {
        out.write_record([
            r.n.to_string(),
            r.m.to_string(),
            fmt_f64(r.gamma),
            fmt_f64(r.lambda),
            fmt_f64(r.omega),
            fmt_f64(r.k_oracle),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_fixtures<R: Read>(r: R) -> Result<Vec<FixtureRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}

/// Density matrix file: `dim` and `dim^2` row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self { dim, entries }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>, CliError> {
        if self.dim == 0 || self.entries.len() != self.dim * self.dim {
            return Err(CliError::InvalidState(format!(
                "state file declares dim {} but holds {} entries (expected {})",
                self.dim,
                self.entries.len(),
                self.dim * self.dim
            )));
        }
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            C64::new(re, im)
        }))
    }
}

/// Input of `apply`: a file, or a coherent amplitude.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    File(std::path::PathBuf),
    Coherent(C64),
}

/// `coherent:re` or `coherent:re,im`; anything else is a path.
pub fn parse_state_spec(s: &str) -> Result<StateSpec, CliError> {
    let Some(rest) = s.strip_prefix("coherent:") else {
        return Ok(StateSpec::File(s.into()));
    };
    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
    let num = |t: &str| -> Result<f64, CliError> {
        t.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::InvalidArgs(format!("bad coherent amplitude component {t:?}")))
    };
    match parts.as_slice() {
        [re] => Ok(StateSpec::Coherent(C64::new(num(re)?, 0.0))),
        [re, im] => Ok(StateSpec::Coherent(C64::new(num(re)?, num(im)?))),
        _ => Err(CliError::InvalidArgs(format!("bad coherent state {s:?}"))),
    }
}

/// Report written by `apply`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApplyReport {
    pub gamma: f64,
    pub lambda: f64,
    pub omega: f64,
    pub output: MatrixFile,
    /// `S(N(rho))` in bits.
    pub entropy: f64,
    /// `S(N^c(rho))` in bits.
    pub complementary_entropy: f64,
}

pub fn density_from_file(path: &std::path::Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path)?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::InvalidState(format!("cannot parse state file {}: {e}", path.display())))?;
    let m = file.to_matrix()?;
    DensityMatrix::new(m).map_err(|e| CliError::InvalidState(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.25), "-2.5000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn state_specs() {
        assert_eq!(parse_state_spec("coherent:0").unwrap(), StateSpec::Coherent(C64::new(0.0, 0.0)));
        assert_eq!(
            parse_state_spec("coherent:1.5,-0.5").unwrap(),
            StateSpec::Coherent(C64::new(1.5, -0.5))
        );
        assert!(parse_state_spec("coherent:x").is_err());
        assert_eq!(parse_state_spec("rho.json").unwrap(), StateSpec::File("rho.json".into()));
    }

    #[test]
    fn fixtures_round_trip() {
        let rows = vec![FixtureRow {
            n: 1,
            m: 2,
            gamma: 1.0,
            lambda: -0.3,
            omega: 1.0,
            k_oracle: 0.123_456_789_012_345_67,
        }];
        let mut buf = Vec::new();
        write_fixtures(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,m,gamma,lambda,omega,K_oracle\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_fixtures(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn matrix_file_checks_size() {
        let f = MatrixFile {
            dim: 2,
            entries: vec![[1.0, 0.0]],
        };
        assert!(matches!(f.to_matrix(), Err(CliError::InvalidState(_))));
    }
}
