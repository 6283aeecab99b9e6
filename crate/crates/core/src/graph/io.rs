use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::{CollaborationNetwork, GraphError, UserId};

/// JSON sidecar written next to an edge list.
///
/// `isolated_users` lets a reader restore users that have no edge line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub n: usize,
    pub m: usize,
    pub isolated_node_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa1: Option<f64>,
    #[serde(default)]
    pub isolated_users: Vec<UserId>,
}

impl NetworkSummary {
    pub fn of(net: &CollaborationNetwork) -> Self {
        Self {
            n: net.node_count(),
            m: net.edge_count(),
            isolated_node_count: net.isolated_count(),
            kappa1: None,
            isolated_users: net.isolated_users(),
        }
    }
}

/// Writes one `userA<TAB>userB` line per edge, in index order.
pub fn write_edge_list<W: Write>(net: &CollaborationNetwork, mut out: W) -> std::io::Result<()> {
    for &(a, b) in net.edges() {
        writeln!(out, "{}\t{}", net.user(a), net.user(b))?;
    }
    out.flush()
}

/// Reads an edge list. Blank lines and lines starting with `#` are skipped;
/// fields may be separated by a tab or by whitespace.
pub fn read_edge_list<R: Read>(
    reader: R,
    sidecar: Option<&NetworkSummary>,
) -> Result<CollaborationNetwork, GraphError> {
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if trimmed.contains('\t') {
            trimmed.split('\t').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        match fields.as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() => pairs.push((a.to_string(), b.to_string())),
            _ => {
                return Err(GraphError::Parse {
                    line: i + 1,
                    message: format!("expected two user ids, got {trimmed:?}"),
                })
            }
        }
    }
    let extra = sidecar.map(|s| s.isolated_users.as_slice()).unwrap_or(&[]);
    Ok(CollaborationNetwork::from_named_pairs(
        extra,
        pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
    ))
}
