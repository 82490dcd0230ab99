//! Run reports and their JSON / CSV rendering.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub summary: Value,
    pub exit_code: i32,
}

/// Collects input digests and output paths while a command runs.
#[derive(Debug, Default)]
pub struct Io {
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
}

impl Io {
    /// Reads a file as text, recording its digest.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }
}

/// `out.json` → `out.cert.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.cert.json"))
}

pub fn render(report: &RunReport, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            match table_rows(&report.summary) {
                Some((header, rows)) => {
                    w.write_record(&header)?;
                    for r in rows {
                        w.write_record(&r)?;
                    }
                }
                None => {
                    w.write_record(["key", "value"])?;
                    w.write_record(["command", &report.command])?;
                    w.write_record(["exit_code", &report.exit_code.to_string()])?;
                    for (k, v) in flatten(&report.summary) {
                        w.write_record([k, v])?;
                    }
                }
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

/// Per-point table when the summary carries an assignment.
fn table_rows(summary: &Value) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let assignment = summary.get("assignment")?.as_array()?;
    let centers = summary.get("centers").and_then(Value::as_array);
    let mut header = vec!["point".to_string(), "cluster".to_string()];
    if centers.is_some() {
        header.extend(["center".to_string(), "is_center".to_string()]);
    }
    let rows = assignment
        .iter()
        .enumerate()
        .map(|(p, label)| {
            let mut row = vec![p.to_string(), label.to_string()];
            if let (Some(cs), Some(l)) = (centers, label.as_u64()) {
                let c = cs.get(l as usize).map(Value::to_string).unwrap_or_default();
                row.push(c.clone());
                row.push((c == p.to_string()).to_string());
            }
            row
        })
        .collect();
    Some((header, rows))
}

fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    fn go(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    go(&key, v, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    go("", v, &mut out);
    out
}

pub fn emit(text: &str, to: Option<&Path>) -> Result<()> {
    match to {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("a/out.json")), PathBuf::from("a/out.cert.json"));
        assert_eq!(sidecar_path(Path::new("inst")), PathBuf::from("inst.cert.json"));
    }

    #[test]
    fn csv_assignment_table() {
        let r = RunReport {
            command: "solve".into(),
            inputs: vec![],
            outputs: vec![],
            summary: json!({"assignment": [0, 0, 1], "centers": [1, 2]}),
            exit_code: 0,
        };
        assert_eq!(render(&r, Format::Csv).unwrap(), "point,cluster,center,is_center\n0,0,1,false\n1,0,1,true\n2,1,2,true\n");
    }

    #[test]
    fn csv_key_values() {
        let r = RunReport {
            command: "oracle domset".into(),
            inputs: vec![],
            outputs: vec![],
            summary: json!({"size": 1, "witness": [0], "meta": {"x": "y"}}),
            exit_code: 0,
        };
        let s = render(&r, Format::Csv).unwrap();
        assert!(s.starts_with("key,value\ncommand,oracle domset\nexit_code,0\n"));
        assert!(s.contains("meta.x,y\n"));
        assert!(s.contains("witness,[0]\n"));
    }
}
