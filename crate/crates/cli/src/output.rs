//! Artifact emission: CSV tables, JSON summaries, plot scripts and the
//! per-run manifest with SHA-256 checksums.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "NONLOCAL_OUT";
pub const DEFAULT_OUT: &str = "out";
pub const MANIFEST: &str = "manifest.json";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Builds a CSV table in memory.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    /// Appends a row of numbers, printed in shortest round-trip form.
    pub fn row(&mut self, values: &[f64]) {
        self.writer
            .write_record(values.iter().map(|v| fmt_f64(*v)))
            .expect("in-memory write");
    }

    pub fn finish(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// Files produced by one scenario, held in memory until written.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.add(name, table.finish());
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("serialisable value");
        text.push('\n');
        self.add(name, text.into_bytes());
    }

    pub fn plot_script(&mut self, csv: &str, x: &str, ys: &[&str], log_y: bool) {
        self.add(&format!("plot_{}.py", csv.trim_end_matches(".csv")), plot_script(csv, x, ys, log_y).into_bytes());
    }
}

/// A generic matplotlib script plotting columns of one CSV next to it.
pub fn plot_script(csv: &str, x: &str, ys: &[&str], log_y: bool) -> String {
    let ys = ys.iter().map(|y| format!("{y:?}")).collect::<Vec<_>>().join(", ");
    let yscale = if log_y { "ax.set_yscale(\"log\")\n" } else { "" };
    format!(
        r#"import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).parent
with open(here / {csv:?}) as f:
    rows = list(csv.DictReader(f))
x = [float(r[{x:?}]) for r in rows]
fig, ax = plt.subplots()
for name in [{ys}]:
    y = [abs(float(r[name])) if {log_y} else float(r[name]) for r in rows]
    ax.plot(x, y, marker=".", label=name)
{yscale}ax.set_xlabel({x:?})
ax.legend()
fig.savefig(here / {png:?}, dpi=150)
"#,
        log_y = if log_y { "True" } else { "False" },
        png = format!("{}.png", csv.trim_end_matches(".csv")),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub task: String,
    pub tool: String,
    pub version: String,
    pub core_version: String,
    /// The validated configuration as parsed.
    pub parameters: serde_json::Value,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes all artifacts into `dir` followed by `manifest.json`.
pub fn write_all(dir: &Path, artifacts: &Artifacts, mut manifest: Manifest) -> std::io::Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    manifest.files.clear();
    for (name, bytes) in &artifacts.files {
        std::fs::write(dir.join(name), bytes)?;
        manifest.files.push(FileEntry {
            path: name.clone(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("serialisable manifest");
    text.push('\n');
    std::fs::write(dir.join(MANIFEST), text)?;
    Ok(manifest)
}

/// Recomputes checksums of the files listed in a manifest; returns the
/// paths that are missing or differ.
pub fn verify_manifest(dir: &Path) -> std::io::Result<Vec<String>> {
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(dir.join(MANIFEST))?).map_err(std::io::Error::other)?;
    let mut bad = Vec::new();
    for f in &manifest.files {
        match std::fs::read(dir.join(&f.path)) {
            Ok(b) if sha256_hex(&b) == f.sha256 && b.len() as u64 == f.bytes => {}
            _ => bad.push(f.path.clone()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_numbers_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&[0.1, 1e-300]);
        t.row(&[f64::NAN, -2.0]);
        let text = String::from_utf8(t.finish()).unwrap();
        assert_eq!(text, "a,b\n0.1,1e-300\nnan,-2.0\n");
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
