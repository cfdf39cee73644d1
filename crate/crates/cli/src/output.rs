//! JSON and CSV writers that print every float with 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::{CliError, CliResult};

/// `x` in scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Default)]
struct SigFigs(CompactFormatter);

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs::default());
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Output(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Output(e.to_string()))
}

pub const SAMPLE_HEADER: [&str; 7] = ["n", "trials", "p_hat", "ci_lo", "ci_hi", "seed", "wall_ms"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRow {
    pub n: usize,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub wall_ms: u64,
}

pub fn sample_csv(rows: &[SampleRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(SAMPLE_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.trials.to_string(),
            fmt_f64(r.p_hat),
            fmt_f64(r.ci_lo),
            fmt_f64(r.ci_hi),
            r.seed.to_string(),
            r.wall_ms.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        let json = to_json(&vec![0.1, 2.5]).unwrap();
        assert_eq!(json, "[1.0000000000000001e-1,2.5000000000000000e0]\n");
    }

    #[test]
    fn csv_has_fixed_header() {
        let text = sample_csv(&[]).unwrap();
        assert_eq!(text, "n,trials,p_hat,ci_lo,ci_hi,seed,wall_ms\n");
    }
}
