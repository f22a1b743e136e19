use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Format, OutputArgs};
use crate::fail::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

/// Shortest round-trip text; exponent form outside [1e-4, 1e15).
pub fn format_float(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-4 && v.abs() < 1e15) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a command produces: a main table, optional extra tables
/// (written next to the main one) and scalar metadata.
pub struct Artifact<C: Serialize> {
    pub config: C,
    pub table: Table,
    pub extra: Vec<(&'static str, Table)>,
    pub meta: Option<Value>,
}

fn render_csv<C: Serialize>(config: &C, meta: Option<&Value>, table: &Table) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# sphere-scatter {VERSION}")?;
    writeln!(buf, "# config: {}", serde_json::to_string(config).expect("config serializes"))?;
    if let Some(m) = meta {
        writeln!(buf, "# meta: {m}")?;
    }
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        w.write_record(&table.columns)?;
        for row in &table.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
    }
    Ok(buf)
}

fn table_json(table: &Table) -> Value {
    json!({
        "columns": table.columns,
        "rows": table.rows.iter().map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the artifact. CSV: main table to `--out` (or stdout), extra tables
/// to `<out>.<name>.csv`, metadata to the `<out>.json` sidecar and to a header
/// comment. JSON: one document holding everything.
pub fn emit<C: Serialize>(out: &OutputArgs, art: &Artifact<C>) -> CliResult<()> {
    match out.format {
        Format::Json => {
            let mut doc = json!({
                "version": VERSION,
                "config": art.config,
                "columns": art.table.columns,
            });
            let body = table_json(&art.table);
            doc["rows"] = body["rows"].clone();
            for (name, t) in &art.extra {
                doc[*name] = table_json(t);
            }
            if let Some(m) = &art.meta {
                doc["meta"] = m.clone();
            }
            let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
            text.push('\n');
            write_to(out.out.as_deref(), text.as_bytes())
        }
        Format::Csv => {
            let main = render_csv(&art.config, art.meta.as_ref(), &art.table)?;
            match &out.out {
                Some(path) => {
                    std::fs::write(path, main)?;
                    for (name, t) in &art.extra {
                        std::fs::write(sibling(path, &format!(".{name}.csv")), render_csv(&art.config, None, t)?)?;
                    }
                    if let Some(m) = &art.meta {
                        let side = json!({ "version": VERSION, "config": art.config, "meta": m });
                        let mut text = serde_json::to_string_pretty(&side).expect("json serializes");
                        text.push('\n');
                        std::fs::write(sibling(path, ".json"), text)?;
                    }
                    Ok(())
                }
                None => {
                    let mut buf = main;
                    for (name, t) in &art.extra {
                        writeln!(buf, "# table: {name}")?;
                        buf.extend(render_csv(&art.config, None, t)?);
                    }
                    write_to(None, &buf)
                }
            }
        }
    }
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}
