//! JSON matrix and ket files with `[re, im]` entries.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ccd_core::forms::Ket;
use ccd_core::linalg::{ComplexMatrix, C64};
use ccd_core::monotone::DensityMatrix;
use ccd_core::MAX_QUBITS;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Unitary,
    Ket,
    Density,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub kind: Kind,
    pub data: Value,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

fn parse_entry(v: &Value, at: &str) -> CliResult<C64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| CliError::Parse(format!("{at}: expected an [re, im] pair")))?;
    let part = |x: &Value| {
        x.as_f64()
            .filter(|f| f.is_finite())
            .ok_or_else(|| CliError::Parse(format!("{at}: entries must be finite numbers")))
    };
    Ok(C64::new(part(&pair[0])?, part(&pair[1])?))
}

fn encode(z: C64) -> Value {
    Value::from(vec![z.re, z.im])
}

impl MatrixFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if file.n == 0 || file.n > MAX_QUBITS {
            return Err(CliError::Parse(format!(
                "n = {} outside 1..={MAX_QUBITS}",
                file.n
            )));
        }
        Ok(file)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn expect_kind(&self, allowed: &[Kind]) -> CliResult<()> {
        if allowed.contains(&self.kind) {
            Ok(())
        } else {
            Err(CliError::Parse(format!(
                "file kind {:?} not accepted here (want one of {allowed:?})",
                self.kind
            )))
        }
    }

    fn rows(&self) -> CliResult<ComplexMatrix> {
        let dim = self.dim();
        let rows = self
            .data
            .as_array()
            .filter(|r| r.len() == dim)
            .ok_or_else(|| CliError::Parse(format!("data must hold {dim} rows")))?;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (r, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .filter(|c| c.len() == dim)
                .ok_or_else(|| CliError::Parse(format!("row {r} must hold {dim} entries")))?;
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] = parse_entry(v, &format!("entry ({r}, {c})"))?;
            }
        }
        Ok(m)
    }

    /// The matrix of a `unitary` file. Unitarity itself is checked by the
    /// consuming operation.
    pub fn matrix(&self) -> CliResult<ComplexMatrix> {
        self.expect_kind(&[Kind::Unitary])?;
        self.rows()
    }

    pub fn ket(&self) -> CliResult<Ket> {
        self.expect_kind(&[Kind::Ket])?;
        let dim = self.dim();
        let flat = self
            .data
            .as_array()
            .filter(|a| a.len() == dim)
            .ok_or_else(|| CliError::Parse(format!("ket data must hold {dim} amplitudes")))?;
        let amps = flat
            .iter()
            .enumerate()
            .map(|(j, v)| parse_entry(v, &format!("amplitude {j}")))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Ket::new(amps)?)
    }

    pub fn density(&self) -> CliResult<DensityMatrix> {
        self.expect_kind(&[Kind::Density])?;
        Ok(DensityMatrix::new(self.rows()?)?)
    }

    pub fn from_matrix(kind: Kind, m: &ComplexMatrix) -> CliResult<Self> {
        let n = m
            .n_qubits()
            .ok_or_else(|| CliError::Usage("matrix dimension must be a power of two".into()))?;
        let data = (0..m.rows())
            .map(|r| Value::from((0..m.cols()).map(|c| encode(m[(r, c)])).collect::<Vec<_>>()))
            .collect::<Vec<_>>();
        Ok(Self {
            n,
            kind,
            data: Value::from(data),
            meta: BTreeMap::new(),
        })
    }

    pub fn from_ket(k: &Ket) -> Self {
        Self {
            n: k.n_qubits(),
            kind: Kind::Ket,
            data: Value::from(
                k.amplitudes()
                    .iter()
                    .map(|&z| encode(z))
                    .collect::<Vec<_>>(),
            ),
            meta: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix files serialize")
    }
}
