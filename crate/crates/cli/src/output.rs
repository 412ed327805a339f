//! CSV tables and the per-directory run manifest.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

pub trait Cell {
    fn cell(&self) -> String;
}

/// 17 significant digits; non-finite values are written as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell for f64 {
    fn cell(&self) -> String {
        fmt_f64(*self)
    }
}

impl Cell for Option<f64> {
    fn cell(&self) -> String {
        fmt_f64(self.unwrap_or(f64::NAN))
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
display_cell!(usize, u64, u32, i64, bool, str, String, &str);

#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => {
        vec![$($crate::output::Cell::cell(&$v)),*]
    };
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, dir: &Path, name: &str) -> CliResult<String> {
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(file);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(name.to_string())
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub struct ManifestEntry<'a> {
    pub subcommand: &'a str,
    pub config: Value,
    pub threads: usize,
    pub elapsed_seconds: f64,
    pub outputs: &'a [String],
}

/// Adds or replaces the entry for one subcommand in `manifest.json`.
pub fn update_manifest(dir: &Path, entry: ManifestEntry<'_>) -> CliResult<()> {
    let path = dir.join("manifest.json");
    let mut root = match fs::read_to_string(&path) {
        Ok(text) => match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        },
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Map::new(),
        Err(e) => return Err(CliError::io(&path, e)),
    };
    root.insert(
        entry.subcommand.to_string(),
        json!({
            "config": entry.config,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": chrono::Utc::now().to_rfc3339(),
            "threads": entry.threads,
            "elapsed_seconds": entry.elapsed_seconds,
            "outputs": entry.outputs,
        }),
    );
    let text = serde_json::to_string_pretty(&Value::Object(root))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(Some(2.0).cell(), "2.0000000000000000e0");
        assert_eq!(None::<f64>.cell(), "NaN");
    }

    proptest! {
        #[test]
        fn float_round_trip(x in proptest::num::f64::ANY) {
            let back: f64 = fmt_f64(x).parse().unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), x.to_bits());
            }
        }
    }

    #[test]
    fn manifest_keeps_other_entries() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a", "b", "a"] {
            update_manifest(dir.path(), ManifestEntry { subcommand: name, config: json!({"x": 1}), threads: 1, elapsed_seconds: 0.0, outputs: &[] }).unwrap();
        }
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 2);
        assert_eq!(v["a"]["config"]["x"], 1);
    }
}
