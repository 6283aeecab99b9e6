use std::collections::HashMap;
use std::str::FromStr;

use super::{CollaborationNetwork, ContributionEvent, DanglingReference, EventKind, GraphError, Interner};

/// Which edge rule turns an event log into a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkMode {
    /// Q&A sites: a reply links its author to the author of what it answers.
    Qa,
    /// Wikis: consecutive distinct editors of an article are linked.
    Wiki,
}

impl FromStr for NetworkMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qa" => Ok(Self::Qa),
            "wiki" => Ok(Self::Wiki),
            other => Err(format!("unknown network mode {other:?} (expected qa or wiki)")),
        }
    }
}

impl NetworkMode {
    pub fn build(self, events: &[ContributionEvent]) -> Result<CollaborationNetwork, GraphError> {
        match self {
            Self::Qa => build_qa_network(events),
            Self::Wiki => build_wiki_network(events),
        }
    }
}

/// Q&A rule: every reply is linked to the author of the artifact it directly
/// targets (`parent`, or `artifact` when a reply carries no parent). Answers
/// therefore link to the question author and comments to the author of the
/// question or answer they sit under.
///
/// Input order does not matter. Every author becomes a node.
pub fn build_qa_network(events: &[ContributionEvent]) -> Result<CollaborationNetwork, GraphError> {
    if events.is_empty() {
        return Err(GraphError::NoEvents);
    }
    let mut interner = Interner::default();
    let authors: Vec<usize> = events.iter().map(|e| interner.intern(e.user.as_str())).collect();

    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (e, &author) in events.iter().zip(&authors) {
        let owns_artifact = !e.artifact.is_empty() && (e.kind == EventKind::Post || e.parent.is_some());
        if !owns_artifact {
            continue;
        }
        match owner.get(e.artifact.as_str()) {
            Some(&prev) if prev != author => {
                return Err(GraphError::ConflictingArtifact {
                    artifact: e.artifact.clone(),
                    first: interner.users[prev].clone(),
                    second: e.user.clone(),
                })
            }
            _ => {
                owner.insert(&e.artifact, author);
            }
        }
    }

    let mut pairs = Vec::new();
    let mut dangling = Vec::new();
    for (position, (e, &author)) in events.iter().zip(&authors).enumerate() {
        if e.kind != EventKind::Reply {
            continue;
        }
        let target = e.parent.as_deref().unwrap_or(&e.artifact);
        match owner.get(target) {
            Some(&other) => pairs.push((author, other)),
            None => dangling.push(DanglingReference {
                position,
                user: e.user.clone(),
                parent: target.to_owned(),
            }),
        }
    }
    if !dangling.is_empty() {
        return Err(GraphError::DanglingReferences(dangling));
    }
    CollaborationNetwork::from_index_pairs(interner.users, pairs)
}

/// Wiki rule: per article, events are ordered by `(timestamp, input
/// position)` and each pair of consecutive distinct editors is linked.
pub fn build_wiki_network(events: &[ContributionEvent]) -> Result<CollaborationNetwork, GraphError> {
    if events.is_empty() {
        return Err(GraphError::NoEvents);
    }
    let mut interner = Interner::default();
    let mut by_article: HashMap<&str, Vec<(i64, usize, usize)>> = HashMap::new();
    for (seq, e) in events.iter().enumerate() {
        let author = interner.intern(e.user.as_str());
        by_article
            .entry(e.artifact.as_str())
            .or_default()
            .push((e.timestamp, seq, author));
    }

    let mut pairs = Vec::new();
    for history in by_article.values_mut() {
        history.sort_unstable();
        pairs.extend(history.windows(2).map(|w| (w[0].2, w[1].2)));
    }
    CollaborationNetwork::from_index_pairs(interner.users, pairs)
}
