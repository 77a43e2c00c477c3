//! The `obd-v1` text format.
//!
//! ```text
//! {"format":"obd-v1","kind":"stationary","vertices":2,"root":[[0],[0]],"tables":[[[0,1],[0]]]}
//! ```
//!
//! `root` holds the edges from the root to level 1 (every entry is 0, the
//! list length is the multiplicity). For `stationary` diagrams `vertices` is
//! the number of vertices per level and `tables` holds the single reused
//! table. For `explicit` diagrams `vertices` lists the counts of levels
//! `0..=L` and `tables` holds the transitions `1->2, ..., (L-1)->L`.
//! The canonical form is the compact serialization followed by a newline.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DiagramKind, EdgeTable, OrderedBratteliDiagram};
use crate::error::{Error, Result};

const FORMAT_TAG: &str = "obd-v1";

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum VertexCounts {
    One(usize),
    Levels(Vec<usize>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObdFile {
    format: String,
    kind: DiagramKind,
    vertices: VertexCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<Vec<Vec<usize>>>,
    tables: Vec<Vec<Vec<usize>>>,
}

pub fn parse_diagram(text: &str) -> Result<OrderedBratteliDiagram> {
    let file: ObdFile = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.format != FORMAT_TAG {
        return Err(Error::Structure(format!(
            "unsupported format tag {:?}, expected {FORMAT_TAG:?}",
            file.format
        )));
    }
    match (file.kind, file.vertices) {
        (DiagramKind::Stationary, VertexCounts::One(n)) => {
            if file.tables.len() != 1 {
                return Err(Error::Structure(format!(
                    "a stationary diagram has exactly one table, found {}",
                    file.tables.len()
                )));
            }
            let root = file.root.unwrap_or_else(|| vec![vec![0]; n]);
            if root.len() != n {
                return Err(Error::Structure(format!(
                    "root table lists {} vertices, expected {n}",
                    root.len()
                )));
            }
            let table = file.tables.into_iter().next().unwrap();
            if table.len() != n {
                return Err(Error::Structure(format!("table lists {} vertices, expected {n}", table.len())));
            }
            OrderedBratteliDiagram::stationary(EdgeTable::new(root), EdgeTable::new(table))
        }
        (DiagramKind::Explicit, VertexCounts::Levels(counts)) => {
            if counts.len() < 2 || counts[0] != 1 {
                return Err(Error::Structure(
                    "explicit vertex counts must start with the root level (1) and include level 1".into(),
                ));
            }
            if file.tables.len() + 2 != counts.len() {
                return Err(Error::Structure(format!(
                    "{} vertex levels need {} tables, found {}",
                    counts.len(),
                    counts.len() - 2,
                    file.tables.len()
                )));
            }
            let root = file.root.unwrap_or_else(|| vec![vec![0]; counts[1]]);
            if root.len() != counts[1] {
                return Err(Error::Structure(format!(
                    "root table lists {} vertices, expected {}",
                    root.len(),
                    counts[1]
                )));
            }
            for (i, t) in file.tables.iter().enumerate() {
                if t.len() != counts[i + 2] {
                    return Err(Error::Structure(format!(
                        "table {}->{} lists {} vertices, expected {}",
                        i + 1,
                        i + 2,
                        t.len(),
                        counts[i + 2]
                    )));
                }
            }
            OrderedBratteliDiagram::explicit(
                EdgeTable::new(root),
                file.tables.into_iter().map(EdgeTable::new).collect(),
            )
        }
        (DiagramKind::Stationary, _) => Err(Error::Structure(
            "a stationary diagram gives \"vertices\" as a single count".into(),
        )),
        (DiagramKind::Explicit, _) => Err(Error::Structure(
            "an explicit diagram gives \"vertices\" as a list of per-level counts".into(),
        )),
    }
}

/// Canonical text of a diagram; `parse_diagram` inverts it exactly.
pub fn serialize_diagram(d: &OrderedBratteliDiagram) -> String {
    let vertices = match d.kind() {
        DiagramKind::Stationary => VertexCounts::One(d.root_table().targets()),
        DiagramKind::Explicit => {
            let mut counts = vec![1, d.root_table().targets()];
            counts.extend(d.tables().iter().map(|t| t.targets()));
            VertexCounts::Levels(counts)
        }
    };
    let file = ObdFile {
        format: FORMAT_TAG.to_string(),
        kind: d.kind(),
        vertices,
        root: Some(d.root_table().lists().to_vec()),
        tables: d.tables().iter().map(|t| t.lists().to_vec()).collect(),
    };
    let mut s = serde_json::to_string(&file).expect("diagram serialization cannot fail");
    s.push('\n');
    s
}

/// Content hash of the canonical serialization, as `sha256:<hex>`.
pub fn system_digest(d: &OrderedBratteliDiagram) -> String {
    let digest = Sha256::digest(serialize_diagram(d).as_bytes());
    format!("sha256:{}", hex::encode(digest))
}
