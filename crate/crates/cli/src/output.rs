use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use spinsim_core::SpinState;

/// One emitted file as listed in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Output directory that remembers what was written to it. All writes go
/// through here so the manifest digests cover exactly the emitted bytes.
pub struct OutDir {
    root: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.entries
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.entries.push(OutputEntry {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_csv(&mut self, rel: &str, table: &Table) -> Result<()> {
        self.write(rel, table.render().as_bytes())
    }

    pub fn write_json<S: Serialize>(&mut self, rel: &str, value: &S) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }
}

/// Formats a float with 17 significant digits, enough to reproduce every
/// `f64` exactly when parsed back.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A CSV table built column by column.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Builds a table of float columns that share the length of `columns[0]`.
    pub fn from_columns(header: &[&str], columns: &[&[f64]]) -> Self {
        let mut t = Self::new(header);
        let len = columns.first().map_or(0, |c| c.len());
        for k in 0..len {
            t.push(columns.iter().map(|c| fmt_f64(c[k])).collect());
        }
        t
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Binary PBM (P4) image of a state laid out as `rows × cols`; occupied sites
/// are black.
pub fn pbm(state: &SpinState, shape: [usize; 2]) -> Vec<u8> {
    let [rows, cols] = shape;
    let mut out = Vec::new();
    let mut head = String::new();
    let _ = write!(head, "P4\n{cols} {rows}\n");
    out.extend_from_slice(head.as_bytes());
    let bits = state.as_bits();
    let stride = cols.div_ceil(8);
    for r in 0..rows {
        let mut line = vec![0u8; stride];
        for c in 0..cols {
            if bits[r * cols + c] == 1 {
                line[c / 8] |= 0x80 >> (c % 8);
            }
        }
        out.extend_from_slice(&line);
    }
    out
}
