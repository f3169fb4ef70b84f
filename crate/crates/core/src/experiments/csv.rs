use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::SweepRow;
use crate::error::{Error, Result};

/// CSV header, in `SweepRow` field order followed by one standard-error
/// column per capacity cell.
pub const COLUMNS: [&str; 13] = [
    "atten_db",
    "cr_capacity_aip",
    "cr_capacity_pip",
    "pr_cp_aip",
    "pr_cp_pip",
    "pr_adapt_aip",
    "pr_adapt_pip",
    "cr_capacity_aip_stderr",
    "cr_capacity_pip_stderr",
    "pr_cp_aip_stderr",
    "pr_cp_pip_stderr",
    "pr_adapt_aip_stderr",
    "pr_adapt_pip_stderr",
];

// 17 significant digits round-trip every f64.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the header and one line per row.
pub fn emit_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("no sweep rows to write"));
    }
    writeln!(out, "{}", COLUMNS.join(","))?;
    for row in rows {
        let cells = row.cells();
        let fields: Vec<String> = std::iter::once(row.atten_db)
            .chain(cells.iter().map(|c| c.bits))
            .chain(cells.iter().map(|c| c.stderr))
            .map(number)
            .collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// [`emit_csv`] to a file, or to standard output when `path` is `None`.
pub fn write_csv(rows: &[SweepRow], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => emit_csv(rows, BufWriter::new(File::create(p)?)),
        None => emit_csv(rows, std::io::stdout().lock()),
    }
}
