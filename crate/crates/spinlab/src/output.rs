//! CSV and JSON trace writers.
//!
//! CSV: `# key=value` header lines, one column-name row, then data rows.
//! JSON: `{"meta": {...}, "columns": [...], "rows": [[...], ...]}`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Text form of a header value. Floats use the shortest representation
/// that parses back to the same value.
pub trait MetaValue {
    fn render(&self) -> String;
}

impl MetaValue for f64 {
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

macro_rules! display_meta {
    ($($t:ty),*) => {
        $(impl MetaValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        })*
    };
}

display_meta!(usize, u64, bool, &str, String);

/// A named numeric table with ordered metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            meta: vec![("version".into(), crate::VERSION.into()), ("table".into(), name.into())],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Sets a metadata entry, replacing an earlier value for `key`.
    pub fn set_meta(&mut self, key: &str, value: impl MetaValue) {
        let value = value.render();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the columns of `{}`", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.render()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        json!({ "meta": meta, "columns": self.columns, "rows": self.rows })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("tables serialize");
                s.push('\n');
                s
            }
        }
    }

    /// Parses the CSV layout written by [`Table::to_csv`].
    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => {
                    let (k, v) = l[1..].trim_start().split_once('=').ok_or_else(|| CliError::args(format!("bad header line `{l}`")))?;
                    meta.push((k.to_string(), v.to_string()));
                }
                Some(l) => break l,
                None => return Err(CliError::args("CSV has no column row")),
            }
        };
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for l in lines.filter(|l| !l.is_empty()) {
            let row = l
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| CliError::args(format!("bad cell `{c}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(CliError::args(format!("row `{l}` has {} cells, expected {}", row.len(), columns.len())));
            }
            rows.push(row);
        }
        Ok(Table { name: name.to_string(), meta, columns, rows })
    }
}

/// Path for table `index` of a multi-table run: the first goes to `out`,
/// later ones get `_<name>` appended to the file stem.
pub fn table_path(out: &Path, table: &Table, index: usize) -> PathBuf {
    if index == 0 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{}.{}", table.name, ext.to_string_lossy()),
        None => format!("{stem}_{}", table.name),
    };
    out.with_file_name(name)
}

/// Writes the tables to files under `out`, or to stdout when `out` is `None`.
/// Returns the paths written.
pub fn write_tables(tables: &[Table], out: Option<&Path>, format: Format) -> Result<Vec<PathBuf>> {
    match out {
        Some(out) => {
            let mut written = Vec::new();
            for (i, t) in tables.iter().enumerate() {
                let path = table_path(out, t, i);
                fs::write(&path, t.render(format)).map_err(|source| CliError::Io { path: path.clone(), source })?;
                written.push(path);
            }
            Ok(written)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for (i, t) in tables.iter().enumerate() {
                let sep = if i > 0 { "\n" } else { "" };
                write!(lock, "{sep}{}", t.render(format))
                    .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })?;
            }
            Ok(Vec::new())
        }
    }
}
