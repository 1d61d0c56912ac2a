use crate::args::Format;
use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};

/// I/O and serialization failures.
pub type BoxResult<T> = Result<T, Box<dyn std::error::Error + Send + Sync>>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Two-column `key,value` table from a flat JSON object.
    pub fn from_object(value: &Value) -> Self {
        let mut t = Table::new(&["key", "value"]);
        if let Value::Object(map) = value {
            for (k, v) in map {
                let cell = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                t.push(vec![k.clone(), cell]);
            }
        }
        t
    }

    pub fn to_csv(&self, seed: u64) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv writer emits utf-8");
        Ok(format!("# ckn-lab {VERSION} seed={seed}\n{body}"))
    }
}

/// Everything a subcommand produces.
pub struct Report {
    pub params: Option<Value>,
    pub results: Value,
    pub table: Table,
    /// Extra CSV files, written next to `--out` as `<stem>.<name>.csv`.
    pub extra: Vec<(String, Table)>,
    /// A checked property failed.
    pub assertion_failed: bool,
    /// A check could not run for lack of convergence.
    pub non_convergence: bool,
}

impl Report {
    pub fn new(params: Option<Value>, results: Value, table: Table) -> Self {
        Report { params, results, table, extra: Vec::new(), assertion_failed: false, non_convergence: false }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    params: &'a Option<Value>,
    config: &'a Value,
    results: &'a Value,
    version: &'static str,
}

pub fn render(report: &Report, config: &Value, format: Format, seed: u64) -> BoxResult<String> {
    Ok(match format {
        Format::Json => {
            let env = Envelope { params: &report.params, config, results: &report.results, version: VERSION };
            let mut s = serde_json::to_string_pretty(&env)?;
            s.push('\n');
            s
        }
        Format::Csv => report.table.to_csv(seed)?,
    })
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{name}.csv"))
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn emit(report: &Report, config: &Value, format: Format, seed: u64, out: Option<&Path>) -> BoxResult<()> {
    let text = render(report, config, format, seed)?;
    match out {
        Some(path) => {
            write_atomic(path, &text)?;
            if format == Format::Csv {
                for (name, table) in &report.extra {
                    write_atomic(&sibling(path, name), &table.to_csv(seed)?)?;
                }
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("/tmp/x/map.csv"), "b_fs"), PathBuf::from("/tmp/x/map.b_fs.csv"));
        assert_eq!(sibling(Path::new("map"), "c"), PathBuf::from("map.c.csv"));
    }

    #[test]
    fn object_table_quotes_when_needed() {
        let t = Table::from_object(&json!({"name": "a,b", "x": 1.5}));
        let csv = t.to_csv(3).unwrap();
        assert_eq!(csv, format!("# ckn-lab {VERSION} seed=3\nkey,value\nname,\"a,b\"\nx,1.5\n"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("o.json");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
