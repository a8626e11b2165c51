//! CSV tables. Numbers are written with Rust's shortest round-trip decimal
//! formatting, which is locale-independent and uses `.` as radix.

use std::io::{Read, Write};

use crate::error::{GapError, Result};
use crate::gap_asymptotics::GapRow;
use crate::hellmann_feynman::HfRow;

pub const SWEEP_HEADER: [&str; 7] = ["L", "eps0", "eps1", "gap", "gap_err", "L2gap", "L3gap"];
pub const HF_HEADER: [&str; 4] = ["t", "gap", "hf_deriv", "fd_deriv"];

fn csv_error(e: csv::Error) -> GapError {
    GapError::Invalid(format!("csv: {e}"))
}

fn write_table<const N: usize>(out: impl Write, header: [&str; N], rows: impl Iterator<Item = [f64; N]>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush().map_err(|e| GapError::Invalid(format!("write failed: {e}")))
}

pub fn write_sweep_csv(out: impl Write, rows: &[GapRow]) -> Result<()> {
    write_table(
        out,
        SWEEP_HEADER,
        rows.iter()
            .map(|r| [r.length, r.eps0, r.eps1, r.gap, r.gap_err, r.l2gap, r.l3gap]),
    )
}

pub fn write_hf_csv(out: impl Write, rows: &[HfRow]) -> Result<()> {
    write_table(
        out,
        HF_HEADER,
        rows.iter().map(|r| [r.t, r.gap, r.hf_deriv, r.fd_deriv]),
    )
}

/// Reads a sweep table written by [`write_sweep_csv`]; the header must match.
pub fn read_sweep_csv(input: impl Read) -> Result<Vec<GapRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(GapError::Invalid(format!(
            "expected header {}, found {}",
            SWEEP_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .enumerate()
        .map(|(i, record)| {
            let record = record.map_err(csv_error)?;
            let v: Vec<f64> = record
                .iter()
                .map(|field| {
                    field
                        .parse::<f64>()
                        .map_err(|_| GapError::Invalid(format!("row {}: '{field}' is not a number", i + 1)))
                })
                .collect::<Result<_>>()?;
            Ok(GapRow {
                length: v[0],
                eps0: v[1],
                eps1: v[2],
                gap: v[3],
                gap_err: v[4],
                l2gap: v[5],
                l3gap: v[6],
            })
        })
        .collect()
}
