//! CSV persistence of trace tables.
//!
//! ```text
//! # sato-tate trace table; coeffs=0,-1,1,-10,-20; sha256=<hex>; cutoff=10000
//! p,reduction,a_p
//! 2,good,-2
//! 11,bad,
//! ```
//!
//! Angles are not stored; they are recomputed on load.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use sato_tate::{build_trace_table, CurveQ, Reduction, TableConfig, TraceRecord, TraceTable};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{computation, CliError};

const MAGIC: &str = "# sato-tate trace table";

/// Hex SHA-256 of the minimal-model coefficient string.
pub fn coeff_checksum(curve: &CurveQ) -> String {
    let digest = Sha256::digest(curve.coeff_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct Row {
    p: u64,
    reduction: Reduction,
    a_p: Option<i64>,
}

pub fn write_table<W: Write>(table: &TraceTable, mut out: W) -> Result<(), CliError> {
    let curve = table.curve();
    writeln!(
        out,
        "{MAGIC}; coeffs={}; sha256={}; cutoff={}",
        curve.coeff_string(),
        coeff_checksum(curve),
        table.cutoff()
    )
    .map_err(computation)?;
    let mut w = csv::Writer::from_writer(out);
    for r in table.records() {
        w.serialize(Row {
            p: r.p,
            reduction: r.reduction,
            a_p: r.a_p,
        })
        .map_err(computation)?;
    }
    w.flush().map_err(computation)?;
    Ok(())
}

fn header_field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split("; ").find_map(|f| f.strip_prefix(key)?.strip_prefix('='))
}

/// Read a table written by [`write_table`] for `curve`. A checksum that does
/// not match the curve's coefficients is an error.
pub fn read_table<R: Read>(curve: &CurveQ, input: R) -> Result<TraceTable, CliError> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(computation)?;
    let first = first.trim_end();
    let bad = |what: &str| CliError::Computation(format!("trace cache: {what}"));
    if !first.starts_with(MAGIC) {
        return Err(bad("missing header line"));
    }
    let sum = header_field(first, "sha256").ok_or_else(|| bad("missing checksum"))?;
    if sum != coeff_checksum(curve) {
        return Err(CliError::Computation(format!(
            "trace cache checksum mismatch for {} (cache holds coeffs={})",
            curve.name(),
            header_field(first, "coeffs").unwrap_or("?")
        )));
    }
    let cutoff: f64 = header_field(first, "cutoff")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| bad("missing cutoff"))?;
    let mut records = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize::<Row>() {
        let row = row.map_err(computation)?;
        let rec = match (row.reduction, row.a_p) {
            (Reduction::Good, Some(a)) => TraceRecord::good(row.p, a).map_err(computation)?,
            (Reduction::Bad, None) => TraceRecord::bad(row.p),
            _ => return Err(bad(&format!("inconsistent row for p = {}", row.p))),
        };
        records.push(rec);
    }
    TraceTable::from_records(curve.clone(), cutoff, records).map_err(computation)
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(computation)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(computation)?;
    tmp.write_all(bytes).map_err(computation)?;
    tmp.as_file().sync_all().map_err(computation)?;
    tmp.persist(path).map_err(computation)?;
    Ok(())
}

/// Directory of cached tables, one file per curve name.
pub struct TableCache {
    dir: Option<PathBuf>,
    config: TableConfig,
}

impl TableCache {
    /// `dir = None` disables persistence.
    pub fn new(dir: Option<PathBuf>, config: TableConfig) -> Self {
        TableCache { dir, config }
    }

    pub fn path_for(&self, curve: &CurveQ) -> Option<PathBuf> {
        let name: String = curve
            .name()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        self.dir.as_ref().map(|d| d.join(format!("{name}.csv")))
    }

    /// The table up to exactly `x`: read from the cache, extended if too
    /// short, or built from scratch. Anything new is written back.
    pub fn load(&self, curve: &CurveQ, x: f64) -> Result<TraceTable, CliError> {
        let path = self.path_for(curve);
        let cached = match &path {
            Some(p) if p.exists() => {
                let file = fs::File::open(p).map_err(computation)?;
                Some(read_table(curve, file)?)
            }
            _ => None,
        };
        let (table, dirty) = match cached {
            Some(t) if t.cutoff() >= x => (t, false),
            Some(mut t) => {
                log::info!("extending cached table for {} from {} to {x}", curve.name(), t.cutoff());
                t.extend_to(x, &self.config).map_err(computation)?;
                (t, true)
            }
            None => (build_trace_table(curve, x, &self.config).map_err(computation)?, true),
        };
        if let (Some(p), true) = (path, dirty) {
            let mut buf = Vec::new();
            write_table(&table, &mut buf)?;
            write_atomic(&p, &buf)?;
        }
        Ok(table.restricted_to(x))
    }
}
