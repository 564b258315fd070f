//! CSV/JSON tables and two-column plot files.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{CommandName, Format, RunConfig};
use crate::error::{CliError, CliResult};

/// A record that can be written as one CSV line.
pub trait Row: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

/// The JSON document written for every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<R> {
    pub command: CommandName,
    pub config: RunConfig,
    pub rows: Vec<R>,
    pub failures: Vec<String>,
}

/// Everything a command produces.
pub struct Report<R> {
    pub rows: Vec<R>,
    pub plot: Vec<(f64, f64)>,
    pub plot_columns: (&'static str, &'static str),
    pub failures: Vec<String>,
}

/// Rendered output, ready to print or write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub table: String,
    pub plot: String,
    pub failures: Vec<String>,
    pub extension: &'static str,
}

pub fn render<R: Row>(cfg: &RunConfig, report: Report<R>) -> CliResult<Rendered> {
    let (table, extension) = match cfg.format {
        Format::Csv => (to_csv(&report.rows)?, "csv"),
        Format::Json => {
            let doc = Document {
                command: cfg.command,
                config: cfg.clone(),
                rows: report.rows,
                failures: report.failures.clone(),
            };
            let mut s =
                serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
            s.push('\n');
            (s, "json")
        }
    };
    let mut plot = format!("# {} {}\n", report.plot_columns.0, report.plot_columns.1);
    for (x, y) in &report.plot {
        plot.push_str(&format!("{} {}\n", real(*x), real(*y)));
    }
    Ok(Rendered {
        table,
        plot,
        failures: report.failures,
        extension,
    })
}

pub fn to_csv<R: Row>(rows: &[R]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Config(e.to_string());
    w.write_record(R::HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `<prefix>.<ext>` and `<prefix>.plot.dat`.
pub fn write_files(prefix: &std::path::Path, out: &Rendered) -> CliResult<()> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let base = prefix.as_os_str().to_owned();
    let mut table = base.clone();
    table.push(format!(".{}", out.extension));
    let mut plot = base;
    plot.push(".plot.dat");
    std::fs::write(table, &out.table)?;
    std::fs::write(plot, &out.plot)?;
    Ok(())
}
