//! File loading, class names and artifact output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use sunflower_core::structures::{ClassSpec, Structure};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Named classes: `pure`, `graphs`, `rb`, `f-free-3hyper`, `kN-free` and
/// `complete-free:R:N`. Anything else is read as a class JSON file.
pub fn load_class(spec: &str) -> Result<ClassSpec> {
    let named = match spec {
        "pure" => Some(ClassSpec::pure()),
        "graphs" => Some(ClassSpec::graphs()),
        "rb" => Some(ClassSpec::rb()),
        "f-free-3hyper" => Some(ClassSpec::f_free_3hyper()),
        _ => None,
    };
    if let Some(k) = named {
        return Ok(k);
    }
    if let Some(n) = spec.strip_prefix('k').and_then(|r| r.strip_suffix("-free")) {
        return Ok(ClassSpec::kn_free(n.parse().context("kN-free needs a number")?)?);
    }
    if let Some(rest) = spec.strip_prefix("complete-free:") {
        let (r, n) = rest.split_once(':').context("complete-free:R:N")?;
        return Ok(ClassSpec::complete_free(r.parse()?, n.parse()?)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("unknown class {spec:?}: not a class name or a file");
    }
    read_json(path)
}

/// A structure from a file, or an edgeless one of the given size in the class's signature.
pub fn structure_or_size(file: Option<&PathBuf>, size: Option<usize>, class: Option<&ClassSpec>) -> Result<Structure> {
    match (file, size) {
        (Some(f), None) => read_json(f),
        (None, Some(n)) => {
            let sig = class
                .map(|k| k.signature().clone())
                .unwrap_or_else(|| ClassSpec::pure().signature().clone());
            let rels = vec![Vec::new(); sig.len()];
            Ok(Structure::new(sig, n, rels)?)
        }
        _ => bail!("give exactly one of the file and the size"),
    }
}

pub fn parse_vertices(list: &str) -> Result<Vec<usize>> {
    if list.trim().is_empty() {
        return Ok(Vec::new());
    }
    list.split(',')
        .map(|x| x.trim().parse().with_context(|| format!("bad vertex {x:?}")))
        .collect()
}

/// Collects emitted files and writes the run manifest last.
pub struct Run {
    out: PathBuf,
    command: String,
    parameters: Value,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started: Instant,
}

impl Run {
    pub fn new(out: &Path, command: &str, parameters: Value, seed: Option<u64>) -> Result<Self> {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self {
            out: out.to_path_buf(),
            command: command.to_string(),
            parameters,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    /// Writes pretty JSON with sorted keys.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let v = serde_json::to_value(value)?;
        let path = self.out.join(name);
        fs::write(&path, serde_json::to_string_pretty(&v)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.out.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn finish(self, status: i32) -> Result<()> {
        let mut versions = BTreeMap::new();
        versions.insert("sunflower", env!("CARGO_PKG_VERSION"));
        versions.insert("manifest", "1");
        let manifest = serde_json::json!({
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "versions": versions,
            "exit_status": status,
            "timings": {"elapsed_ms": self.started.elapsed().as_millis() as u64},
        });
        let path = self.out.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}
