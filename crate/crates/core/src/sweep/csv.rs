use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::SweepRecord;
use crate::error::{domain, Error, Result};

const HEADER: [&str; 7] = [
    "lambda",
    "energy",
    "linear_entropy",
    "ds_dlambda",
    "negativity_nn",
    "negativity_nnn",
    "delta_n2",
];

// 17 significant digits: enough to round-trip any f64.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

fn write_rows<W: Write>(records: &[SweepRecord], w: W) -> Result<W> {
    let mut out = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(HEADER).map_err(std::io::Error::from)?;
    for r in records {
        let row = [
            number(r.lambda),
            number(r.energy),
            number(r.linear_entropy),
            optional(r.ds_dlambda),
            optional(r.negativity_nn),
            optional(r.negativity_nnn),
            number(r.delta_n2),
        ];
        out.write_record(&row).map_err(std::io::Error::from)?;
    }
    out.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Header line plus one line per record.
pub fn write_csv<W: Write>(records: &[SweepRecord], w: W) -> Result<()> {
    if records.is_empty() {
        return Err(domain("no records to write"));
    }
    write_rows(records, w)?.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(domain("no records to write"));
    }
    write_csv(records, BufWriter::new(File::create(path)?))
}

/// Whatever records an aborted sweep produced, then a `# error: ...` line.
pub fn emit_partial_csv(records: &[SweepRecord], error: &dyn std::fmt::Display, path: &Path) -> Result<()> {
    let mut w = write_rows(records, BufWriter::new(File::create(path)?))?;
    let message = error.to_string().replace('\n', " ");
    writeln!(w, "# error: {message}")?;
    w.flush()?;
    Ok(())
}

/// Parses a file written by [`write_csv`]. The hierarchy flag is not stored
/// and comes back as `None`.
pub fn read_csv<R: Read>(r: R) -> Result<Vec<SweepRecord>> {
    let mut reader = ::csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let header = reader.headers().map_err(std::io::Error::from)?;
    if header.iter().ne(HEADER) {
        return Err(domain(format!("unexpected CSV header: {header:?}")));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(std::io::Error::from)?;
        let field = |i: usize| -> Result<Option<f64>> {
            let s = row.get(i).unwrap_or("");
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| domain(format!("bad number `{s}` in column {}", HEADER[i])))
        };
        let required = |i: usize| -> Result<f64> {
            field(i)?.ok_or_else(|| domain(format!("missing {}", HEADER[i])))
        };
        records.push(SweepRecord {
            lambda: required(0)?,
            energy: required(1)?,
            linear_entropy: required(2)?,
            ds_dlambda: field(3)?,
            negativity_nn: field(4)?,
            negativity_nnn: field(5)?,
            delta_n2: required(6)?,
            hierarchy: None,
        });
    }
    Ok(records)
}
