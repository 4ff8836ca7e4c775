//! Word co-occurrence networks built from the ten-word windows around the
//! leading characters' names.

pub mod community;
pub mod pos;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cast::{CharacterRoster, Gender};
use crate::corpus::Story;
use crate::error::{Error, Result};

pub use community::{detect_communities, modularity, CommunityPartition, CommunitySummary};
pub use pos::{category_slice, verb_rate, Category, PosTagger, VerbRate};

/// Words kept on each side of a name.
pub const HALF_WINDOW: usize = 5;

/// Default export label thresholds (minimum node link multiplicity).
pub const LABEL_THRESHOLD_SINGLE: u64 = 1500;
pub const LABEL_THRESHOLD_COOCCUR: u64 = 500;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// Every segment naming the character.
    #[default]
    Single,
    /// Only segments naming both leading characters.
    Cooccur,
}

impl FromStr for WindowMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(WindowMode::Single),
            "cooccur" => Ok(WindowMode::Cooccur),
            other => Err(Error::Invalid(format!("unknown window mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSample {
    pub story_id: String,
    pub gender: Gender,
    pub tokens: Vec<String>,
}

/// One sample per occurrence of the character's name: up to five tokens on
/// either side, clipped at the segment boundary, name excluded.
pub fn extract_windows(story: &Story, roster: &CharacterRoster, character: &str, mode: WindowMode) -> Result<Vec<WindowSample>> {
    let who = roster
        .get(character)
        .ok_or_else(|| Error::UnknownCharacter(character.to_string()))?;
    let qualifying: Option<HashSet<usize>> = match mode {
        WindowMode::Single => None,
        WindowMode::Cooccur => Some(match roster.leading_pair() {
            Some((f, m)) => f.mention_segments.intersection(&m.mention_segments).copied().collect(),
            None => HashSet::new(),
        }),
    };
    let mut samples = Vec::new();
    for mention in &who.mentions {
        if qualifying.as_ref().is_some_and(|q| !q.contains(&mention.segment)) {
            continue;
        }
        let Some(segment) = story.segments.get(mention.segment) else { continue };
        let tokens = &segment.tokens;
        let before = mention.position.saturating_sub(HALF_WINDOW)..mention.position;
        let after = (mention.position + 1).min(tokens.len())..(mention.position + 1 + HALF_WINDOW).min(tokens.len());
        samples.push(WindowSample {
            story_id: story.id().to_string(),
            gender: who.gender,
            tokens: tokens[before].iter().chain(&tokens[after]).cloned().collect(),
        });
    }
    Ok(samples)
}

/// Drops stop-words from every sample.
pub fn remove_stopwords(samples: &mut [WindowSample], stopwords: &HashSet<String>) {
    for s in samples {
        s.tokens.retain(|t| !stopwords.contains(t));
    }
}

/// Undirected weighted word graph. Edge keys are ordered pairs `(a, b)` with
/// `a < b`; node weights are the summed multiplicity of incident edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoNetwork {
    pub nodes: BTreeMap<String, u64>,
    pub edges: BTreeMap<(String, String), u64>,
}

impl CoNetwork {
    pub fn add_edge(&mut self, a: &str, b: &str, multiplicity: u64) {
        if a == b || multiplicity == 0 {
            return;
        }
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        *self.edges.entry(key).or_insert(0) += multiplicity;
        *self.nodes.entry(a.to_string()).or_insert(0) += multiplicity;
        *self.nodes.entry(b.to_string()).or_insert(0) += multiplicity;
    }

    /// Adds another network's counts into this one. Associative and
    /// commutative, so partial networks can be reduced in any order.
    pub fn merge(mut self, other: CoNetwork) -> CoNetwork {
        let (mut big, small) = if self.edges.len() >= other.edges.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        for ((a, b), m) in small.edges {
            *big.edges.entry((a, b)).or_insert(0) += m;
        }
        for (w, m) in small.nodes {
            *big.nodes.entry(w).or_insert(0) += m;
        }
        big
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges_distinct(&self) -> usize {
        self.edges.len()
    }

    pub fn n_edges_weighted(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Tab-separated `word1\tword2\tmultiplicity`, one edge per line in key
    /// order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ((a, b), m) in &self.edges {
            let _ = writeln!(out, "{a}\t{b}\t{m}");
        }
        out
    }

    /// GraphML export. Nodes whose multiplicity reaches `label_threshold`
    /// carry a `label` attribute.
    pub fn to_graphml(&self, label_threshold: u64) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
        out.push_str("  <key id=\"multiplicity\" for=\"node\" attr.name=\"multiplicity\" attr.type=\"long\"/>\n");
        out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
        out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n");
        out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
        for (w, m) in &self.nodes {
            let id = xml_escape(w);
            let _ = write!(out, "    <node id=\"{id}\"><data key=\"multiplicity\">{m}</data>");
            if *m >= label_threshold {
                let _ = write!(out, "<data key=\"label\">{id}</data>");
            }
            out.push_str("</node>\n");
        }
        for ((a, b), m) in &self.edges {
            let _ = writeln!(
                out,
                "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{m}</data></edge>",
                xml_escape(a),
                xml_escape(b)
            );
        }
        out.push_str("  </graph>\n</graphml>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Every unordered pair of positions holding two different words adds one
/// to that pair's edge.
pub fn build_network<'a>(samples: impl IntoIterator<Item = &'a WindowSample>) -> CoNetwork {
    let mut net = CoNetwork::default();
    for sample in samples {
        let t = &sample.tokens;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                net.add_edge(&t[i], &t[j], 1);
            }
        }
    }
    net
}
