//! Undirected collaboration networks and their construction from event logs.

mod build;
mod events;
mod io;

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use build::{build_qa_network, build_wiki_network, NetworkMode};
pub use events::{parse_timestamp, read_events, ContributionEvent, EventKind};
pub use io::{read_edge_list, write_edge_list, NetworkSummary};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no events")]
    NoEvents,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{} repl{} reference unknown artifacts: {}", .0.len(), if .0.len() == 1 { "y" } else { "ies" }, format_dangling(.0))]
    DanglingReferences(Vec<DanglingReference>),
    #[error("artifact {artifact:?} is claimed by both {first} and {second}")]
    ConflictingArtifact {
        artifact: String,
        first: UserId,
        second: UserId,
    },
    #[error("node index {index} out of range for {n} users")]
    IndexOutOfRange { index: usize, n: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A reply whose `parent` names no known artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingReference {
    /// Position of the event in the input (0-based).
    pub position: usize,
    pub user: UserId,
    pub parent: String,
}

fn format_dangling(refs: &[DanglingReference]) -> String {
    refs.iter()
        .map(|d| format!("#{} by {} -> {:?}", d.position, d.user, d.parent))
        .collect::<Vec<_>>()
        .join(", ")
}

/// External user identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UserId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for UserId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl Borrow<str> for UserId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Undirected simple graph over users, stored as compressed adjacency rows.
///
/// Users keep a dense index `0..n` for the lifetime of the network. Users
/// without edges are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct CollaborationNetwork {
    users: Vec<UserId>,
    index: HashMap<UserId, usize>,
    /// Unordered pairs stored as `(lo, hi)`, sorted.
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl CollaborationNetwork {
    /// Builds a network from users and index pairs. Self pairs are dropped and
    /// duplicate pairs (in either orientation) collapse to one edge.
    pub fn from_index_pairs<I>(users: Vec<UserId>, pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = users.len();
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            for index in [a, b] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();

        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        for &(a, b) in &edges {
            neighbors[fill[a]] = b;
            fill[a] += 1;
            neighbors[fill[b]] = a;
            fill[b] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }

        let mut index = HashMap::with_capacity(n);
        for (i, u) in users.iter().enumerate() {
            index.insert(u.clone(), i);
        }
        Ok(Self {
            users,
            index,
            edges,
            offsets,
            neighbors,
        })
    }

    /// Builds a network from named pairs; users are indexed in order of first
    /// appearance, after any `extra_users`.
    pub fn from_named_pairs<'a, I>(extra_users: &[UserId], pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut interner = Interner::default();
        for u in extra_users {
            interner.intern(u.as_str());
        }
        let idx: Vec<_> = pairs
            .into_iter()
            .map(|(a, b)| (interner.intern(a), interner.intern(b)))
            .collect();
        Self::from_index_pairs(interner.users, idx).expect("interned indices are in range")
    }

    pub fn node_count(&self) -> usize {
        self.users.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn user(&self, i: usize) -> &UserId {
        &self.users[i]
    }

    pub fn index_of(&self, user: &str) -> Option<usize> {
        self.index.get(user).copied()
    }

    /// Edges as `(lo, hi)` index pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as external id pairs, each pair ordered lexicographically.
    pub fn named_edges(&self) -> BTreeSet<(UserId, UserId)> {
        self.edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (self.users[a].clone(), self.users[b].clone());
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.degree(i)).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn isolated_count(&self) -> usize {
        (0..self.node_count()).filter(|&i| self.degree(i) == 0).count()
    }

    pub fn isolated_users(&self) -> Vec<UserId> {
        (0..self.node_count())
            .filter(|&i| self.degree(i) == 0)
            .map(|i| self.users[i].clone())
            .collect()
    }

    /// Returns `A v`, i.e. `out[i] = sum of v[j] over neighbours j of i`.
    ///
    /// # Panics
    /// If `v.len() != n`.
    pub fn apply_adjacency<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.node_count()];
        self.apply_adjacency_into(v, &mut out);
        out
    }

    /// In-place variant of [`apply_adjacency`](Self::apply_adjacency).
    ///
    /// # Panics
    /// If either slice length differs from `n`.
    pub fn apply_adjacency_into<T: Scalar>(&self, v: &[T], out: &mut [T]) {
        let n = self.node_count();
        assert_eq!(
            v.len(),
            n,
            "adjacency product: input length {} != node count {}",
            v.len(),
            n
        );
        assert_eq!(
            out.len(),
            n,
            "adjacency product: output length {} != node count {}",
            out.len(),
            n
        );
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.neighbors(i).iter().map(|&j| v[j]).sum();
        }
    }
}

#[derive(Default)]
pub(crate) struct Interner {
    pub(crate) users: Vec<UserId>,
    lookup: HashMap<String, usize>,
}

impl Interner {
    pub(crate) fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.lookup.get(id) {
            return i;
        }
        let i = self.users.len();
        self.users.push(UserId::from(id));
        self.lookup.insert(id.to_owned(), i);
        i
    }
}
