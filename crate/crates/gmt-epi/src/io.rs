//! Chain files and report emission.
//!
//! Chains are stored as JSON text. Floats are written in their shortest
//! round-trip form and parsed with correct rounding, so a chain survives
//! emit → parse bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{PolyChain, Simplex, Term};
use crate::coeff::GroupSpec;
use crate::error::{GmtError, Result};

pub const CHAIN_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub vertices: Vec<Vec<f64>>,
    /// Integer value for the integer groups, bit mask for the Cantor group.
    pub coeff: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub version: u32,
    pub ambient: usize,
    pub dim: usize,
    pub group: GroupSpec,
    pub simplices: Vec<SimplexRecord>,
    /// Analytic ground truth written by the generators.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub metadata: serde_json::Value,
}

impl ChainFile {
    pub fn from_chain(t: &PolyChain, metadata: serde_json::Value) -> ChainFile {
        ChainFile {
            version: CHAIN_FILE_VERSION,
            ambient: t.ambient(),
            dim: t.dim(),
            group: t.group(),
            simplices: t
                .terms()
                .iter()
                .map(|term| SimplexRecord {
                    vertices: term.simplex.vertex_vec(),
                    coeff: term.coeff.payload(),
                })
                .collect(),
            metadata,
        }
    }

    pub fn to_chain(&self) -> Result<PolyChain> {
        if self.version != CHAIN_FILE_VERSION {
            return Err(GmtError::Format(format!(
                "unsupported chain file version {}",
                self.version
            )));
        }
        self.group.validate()?;
        let mut terms = Vec::with_capacity(self.simplices.len());
        for (i, s) in self.simplices.iter().enumerate() {
            if s.vertices.len() != self.dim + 1
                || s.vertices.iter().any(|v| v.len() != self.ambient)
            {
                return Err(GmtError::Format(format!(
                    "simplex {i}: expected {} vertices in R^{}",
                    self.dim + 1,
                    self.ambient
                )));
            }
            if s.vertices.iter().flatten().any(|c| !c.is_finite()) {
                return Err(GmtError::Format(format!(
                    "simplex {i}: non-finite coordinate"
                )));
            }
            let coeff = self.group.element(s.coeff);
            if coeff.payload() != s.coeff {
                return Err(GmtError::Format(format!(
                    "simplex {i}: coefficient {} outside the group",
                    s.coeff
                )));
            }
            terms.push(Term {
                simplex: Simplex::new(&s.vertices),
                coeff,
            });
        }
        PolyChain::from_terms(self.ambient, self.dim, self.group, terms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<ChainFile> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<ChainFile> {
        let text = fs::read_to_string(path)
            .map_err(|e| GmtError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| GmtError::Format(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")
            .map_err(|e| GmtError::Io(format!("{}: {e}", path.display())))
    }
}

/// Command output: a JSON summary (command, config and seed echoed) plus an
/// optional per-row CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub summary: serde_json::Value,
    pub table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| GmtError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| GmtError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| GmtError::Io(e.to_string()))
    }
}

/// Float cell with 17 significant digits; NaN and infinities spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Report {
    /// Writes `<command>.json` and, when there is a table, `<command>.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| GmtError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let json = dir.join(format!("{}.json", self.command));
        fs::write(&json, serde_json::to_string_pretty(&self.summary)? + "\n")?;
        written.push(json);
        if let Some(t) = &self.table {
            let path = dir.join(format!("{}.csv", self.command));
            fs::write(&path, t.to_csv()?)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GenKind};

    #[test]
    fn generated_chains_round_trip() {
        let kinds = [
            GenKind::FlatDisk { sides: 16 },
            GenKind::Tilted {
                slope: 0.1,
                sides: 12,
            },
            GenKind::CantorGroup { depth: 3 },
            GenKind::TwoSheetCantor {
                levels: 2,
                nodes: 256,
            },
        ];
        for k in &kinds {
            let g = generate(k, 0).unwrap();
            let f = ChainFile::from_chain(&g.chain, g.metadata.clone());
            let text = f.to_json().unwrap();
            let back = ChainFile::from_json(&text).unwrap();
            assert_eq!(back, f, "{k:?}");
            assert_eq!(back.to_chain().unwrap(), g.chain, "{k:?}");
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        let bad_arity = r#"{"version":1,"ambient":2,"dim":1,"group":{"tag":"integers"},
            "simplices":[{"vertices":[[0,0]],"coeff":1}]}"#;
        assert!(ChainFile::from_json(bad_arity).unwrap().to_chain().is_err());
        let bad_coeff = r#"{"version":1,"ambient":1,"dim":1,"group":{"tag":"cantor","depth":2},
            "simplices":[{"vertices":[[0],[1]],"coeff":7}]}"#;
        assert!(ChainFile::from_json(bad_coeff).unwrap().to_chain().is_err());
        assert!(ChainFile::from_json("{").is_err());
    }

    #[test]
    fn csv_cells_keep_full_precision() {
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(num(f64::NAN), "NaN");
    }
}
