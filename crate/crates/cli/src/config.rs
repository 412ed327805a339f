//! Layered configuration: built-in defaults, then an optional JSON file, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Flags shared by every experiment subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory, created if absent
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Base seed for every random draw [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores); never changes the outputs
    #[arg(long, env = "SOBOLEV_LAB_THREADS")]
    pub threads: Option<usize>,
    /// JSON file with parameter overrides, keyed by snake_case parameter name.
    /// Objects named after a subcommand apply only to that subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub trait Params: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
    fn validate(&self) -> CliResult<()>;
    /// Runs the experiment and returns the names of the files written to `out`.
    fn execute(&self, out: &Path) -> CliResult<Vec<String>>;
}

const SUBCOMMANDS: [&str; 11] = [
    "landscape",
    "gd-compare",
    "flow",
    "relusq",
    "multinode",
    "toeplitz",
    "sgd",
    "verify-gradients",
    "linear",
    "chebyshev",
    "summarize",
];

fn read_config_file(path: &Path, name: &str) -> CliResult<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let Value::Object(root) = serde_json::from_str::<Value>(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))? else {
        return Err(CliError::Validation(format!("{}: expected a JSON object", path.display())));
    };
    let mut flat = Map::new();
    let mut section = Map::new();
    for (k, v) in root {
        if SUBCOMMANDS.contains(&k.as_str()) {
            if k == name {
                match v {
                    Value::Object(m) => section = m,
                    _ => return Err(CliError::Validation(format!("config section `{k}` must be an object"))),
                }
            }
        } else {
            flat.insert(k, v);
        }
    }
    flat.extend(section);
    Ok(flat)
}

fn overlay(base: &mut Map<String, Value>, top: Map<String, Value>) {
    for (k, v) in top {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
}

/// Merges defaults, the config file and the flags in `args` (whose `None` fields are skipped).
pub fn resolve<P: Params>(common: &Common, args: &impl Serialize) -> CliResult<P> {
    let Value::Object(mut merged) = serde_json::to_value(P::default())? else {
        unreachable!("parameter structs serialize to objects")
    };
    if let Some(path) = &common.config {
        overlay(&mut merged, read_config_file(path, P::NAME)?);
    }
    if let Value::Object(flags) = serde_json::to_value(args)? {
        overlay(&mut merged, flags);
    }
    if let Some(seed) = common.seed {
        merged.insert("seed".into(), seed.into());
    }
    let params: P = serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Validation(format!("{}: {e}", P::NAME)))?;
    params.validate()?;
    Ok(params)
}

pub fn parse_kinds(kind: &str) -> CliResult<Vec<sobolev_core::LossKind>> {
    use sobolev_core::LossKind;
    match kind {
        "both" => Ok(vec![LossKind::L2, LossKind::H1]),
        "l2" => Ok(vec![LossKind::L2]),
        "h1" => Ok(vec![LossKind::H1]),
        other => Err(CliError::Validation(format!("kind must be l2, h1 or both, got `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct Demo {
        seed: u64,
        dim: usize,
        rate: f64,
    }

    impl Default for Demo {
        fn default() -> Self {
            Self { seed: 0, dim: 2, rate: 0.5 }
        }
    }

    impl Params for Demo {
        const NAME: &'static str = "flow";
        fn validate(&self) -> CliResult<()> {
            crate::error::ensure(self.dim > 0, || "dim".into())
        }
        fn execute(&self, _: &Path) -> CliResult<Vec<String>> {
            Ok(vec![])
        }
    }

    #[derive(Serialize)]
    struct DemoArgs {
        dim: Option<usize>,
        rate: Option<f64>,
    }

    fn common(config: Option<PathBuf>, seed: Option<u64>) -> Common {
        Common { out_dir: "out".into(), seed, threads: None, config }
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"dim": 5, "rate": 1.5, "seed": 9, "flow": {"rate": 2.5}, "sgd": {"bogus": 1}}"#).unwrap();
        let p: Demo = resolve(&common(Some(path.clone()), None), &DemoArgs { dim: None, rate: None }).unwrap();
        assert_eq!(p, Demo { seed: 9, dim: 5, rate: 2.5 });
        let p: Demo = resolve(&common(Some(path), Some(3)), &DemoArgs { dim: Some(7), rate: None }).unwrap();
        assert_eq!(p, Demo { seed: 3, dim: 7, rate: 2.5 });
    }

    #[test]
    fn unknown_keys_and_invalid_values_are_validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"dimm": 5}"#).unwrap();
        let e = resolve::<Demo>(&common(Some(path), None), &DemoArgs { dim: None, rate: None }).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = resolve::<Demo>(&common(None, None), &DemoArgs { dim: Some(0), rate: None }).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
