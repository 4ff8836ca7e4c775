//! Weighted modularity and deterministic Louvain-style community detection.
//!
//! Nodes are visited in lexicographic order and moves only happen on a
//! strict gain, with ties going to the lowest community id, so the result is
//! a pure function of the network. Networks of at most [`EXACT_LIMIT`] nodes
//! are solved by enumerating every set partition instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CoNetwork;
use crate::error::{Error, Result};

/// Largest network solved exactly (Bell(10) = 115,975 partitions).
pub const EXACT_LIMIT: usize = 10;
const GAIN_EPS: f64 = 1e-12;

/// Index-based view of a network used by the optimizers.
struct Graph {
    /// Neighbours with edge weight, no self entries.
    adj: Vec<Vec<(usize, f64)>>,
    /// Weight of edges folded inside a node (after aggregation).
    self_weight: Vec<f64>,
    /// Weighted degree, counting internal weight twice.
    degree: Vec<f64>,
    /// Total edge weight `m`.
    total: f64,
}

impl Graph {
    fn from_network(net: &CoNetwork, names: &[&String]) -> Graph {
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        let mut total = 0.0;
        for ((a, b), &m) in &net.edges {
            let (i, j) = (index[a.as_str()], index[b.as_str()]);
            let w = m as f64;
            adj[i].push((j, w));
            adj[j].push((i, w));
            total += w;
        }
        let degree = adj.iter().map(|nb| nb.iter().map(|&(_, w)| w).sum()).collect();
        Graph {
            adj,
            self_weight: vec![0.0; n],
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn quality(&self, community: &[usize]) -> f64 {
        let k = community.iter().copied().max().map_or(0, |c| c + 1);
        let mut inside = vec![0.0; k];
        let mut tot = vec![0.0; k];
        for i in 0..self.len() {
            let c = community[i];
            tot[c] += self.degree[i];
            inside[c] += self.self_weight[i];
            for &(j, w) in &self.adj[i] {
                if i < j && community[j] == c {
                    inside[c] += w;
                }
            }
        }
        let m2 = 2.0 * self.total;
        inside
            .iter()
            .zip(&tot)
            .map(|(l, d)| l / self.total - (d / m2) * (d / m2))
            .sum()
    }

    /// Local moving phase. Returns whether any node changed community.
    fn move_nodes(&self, community: &mut [usize]) -> bool {
        let n = self.len();
        let m2 = 2.0 * self.total;
        let mut tot = vec![0.0; n];
        for i in 0..n {
            tot[community[i]] += self.degree[i];
        }
        let mut links = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any = false;
        loop {
            let mut moved = false;
            for i in 0..n {
                let own = community[i];
                let ki = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if links[c] == 0.0 {
                        touched.push(c);
                    }
                    links[c] += w;
                }
                tot[own] -= ki;
                let gain = |c: usize, links: &[f64]| links[c] - tot[c] * ki / m2;
                let stay = gain(own, &links);
                let mut best = (stay, own);
                touched.sort_unstable();
                for &c in &touched {
                    if c == own {
                        continue;
                    }
                    let g = gain(c, &links);
                    if g > best.0 + GAIN_EPS || (best.1 != own && (g - best.0).abs() <= GAIN_EPS && c < best.1) {
                        best = (g, c);
                    }
                }
                tot[best.1] += ki;
                if best.1 != own {
                    community[i] = best.1;
                    moved = true;
                    any = true;
                }
                for &c in &touched {
                    links[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                return any;
            }
        }
    }

    /// Collapses communities into nodes. `community` must be dense `0..k`.
    fn aggregate(&self, community: &[usize], k: usize) -> Graph {
        let mut weights: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        let mut self_weight = vec![0.0; k];
        let mut degree = vec![0.0; k];
        for i in 0..self.len() {
            let ci = community[i];
            self_weight[ci] += self.self_weight[i];
            degree[ci] += self.degree[i];
            for &(j, w) in &self.adj[i] {
                if i < j {
                    let cj = community[j];
                    if ci == cj {
                        self_weight[ci] += w;
                    } else {
                        *weights[ci].entry(cj).or_insert(0.0) += w;
                        *weights[cj].entry(ci).or_insert(0.0) += w;
                    }
                }
            }
        }
        Graph {
            adj: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_weight,
            degree,
            total: self.total,
        }
    }
}

/// Renumbers labels densely in order of first appearance.
fn relabel(community: &mut [usize]) -> usize {
    let mut map = BTreeMap::new();
    let mut next = 0;
    for c in community.iter_mut() {
        let id = *map.entry(*c).or_insert_with(|| {
            next += 1;
            next - 1
        });
        *c = id;
    }
    next
}

fn louvain(graph: &Graph) -> Vec<usize> {
    let mut assignment: Vec<usize> = (0..graph.len()).collect();
    let mut level = Graph {
        adj: graph.adj.clone(),
        self_weight: graph.self_weight.clone(),
        degree: graph.degree.clone(),
        total: graph.total,
    };
    loop {
        let mut community: Vec<usize> = (0..level.len()).collect();
        if !level.move_nodes(&mut community) {
            break;
        }
        let k = relabel(&mut community);
        for a in assignment.iter_mut() {
            *a = community[*a];
        }
        if k == level.len() {
            break;
        }
        level = level.aggregate(&community, k);
    }
    relabel(&mut assignment);
    assignment
}

/// Exhaustive search over restricted growth strings; the first maximum in
/// enumeration order wins.
fn exact(graph: &Graph) -> Vec<usize> {
    let n = graph.len();
    let mut rgs = vec![0usize; n];
    let mut max_prefix = vec![0usize; n];
    let mut best = (graph.quality(&rgs), rgs.clone());
    if n <= 1 {
        return best.1;
    }
    loop {
        // advance to the next restricted growth string
        let mut i = n - 1;
        loop {
            let limit = if i == 0 { 0 } else { max_prefix[i - 1] + 1 };
            if rgs[i] < limit {
                rgs[i] += 1;
                break;
            }
            if i == 1 {
                return best.1;
            }
            rgs[i] = 0;
            i -= 1;
        }
        for j in i..n {
            if j > i {
                rgs[j] = 0;
            }
            max_prefix[j] = if j == 0 { rgs[0] } else { max_prefix[j - 1].max(rgs[j]) };
        }
        let q = graph.quality(&rgs);
        if q > best.0 + GAIN_EPS {
            best = (q, rgs.clone());
        }
    }
}

/// Weighted modularity `Q = sum_c [ L_c / m - (d_c / 2m)^2 ]` with edge
/// multiplicities as weights.
pub fn modularity(network: &CoNetwork, partition: &BTreeMap<String, usize>) -> Result<f64> {
    if network.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    for w in network.nodes.keys() {
        if !partition.contains_key(w) {
            return Err(Error::UncoveredNode(w.clone()));
        }
    }
    let m = network.n_edges_weighted() as f64;
    let mut inside: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for ((a, b), &w) in &network.edges {
        if partition[a] == partition[b] {
            *inside.entry(partition[a]).or_insert(0.0) += w as f64;
        }
    }
    for (word, &d) in &network.nodes {
        *degree.entry(partition[word]).or_insert(0.0) += d as f64;
    }
    Ok(degree
        .iter()
        .map(|(c, d)| inside.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)).powi(2))
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    /// Community ids are ranked by size (largest first), ties by the
    /// alphabetically smallest member.
    pub assignment: BTreeMap<String, usize>,
    pub q: f64,
    pub community_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub id: usize,
    pub size: usize,
    /// Members ordered by node multiplicity, highest first.
    pub top_terms: Vec<String>,
}

impl CommunityPartition {
    /// The `n` largest communities with their `terms` heaviest members.
    pub fn top(&self, network: &CoNetwork, n: usize, terms: usize) -> Vec<CommunitySummary> {
        (0..self.community_sizes.len().min(n))
            .map(|id| {
                let mut members: Vec<(&String, u64)> = self
                    .assignment
                    .iter()
                    .filter(|(_, &c)| c == id)
                    .map(|(w, _)| (w, network.nodes.get(w).copied().unwrap_or(0)))
                    .collect();
                members.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
                CommunitySummary {
                    id,
                    size: self.community_sizes[id],
                    top_terms: members.into_iter().take(terms).map(|(w, _)| w.clone()).collect(),
                }
            })
            .collect()
    }
}

pub fn detect_communities(network: &CoNetwork) -> Result<CommunityPartition> {
    if network.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let names: Vec<&String> = network.nodes.keys().collect();
    let graph = Graph::from_network(network, &names);
    let raw = if graph.len() <= EXACT_LIMIT {
        exact(&graph)
    } else {
        louvain(&graph)
    };

    let k = raw.iter().copied().max().map_or(0, |c| c + 1);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in raw.iter().enumerate() {
        groups[c].push(i);
    }
    groups.retain(|g| !g.is_empty());
    // members are already in name order, so g[0] is the smallest word
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| names[a[0]].cmp(names[b[0]])));
    let mut assignment = BTreeMap::new();
    for (id, g) in groups.iter().enumerate() {
        for &i in g {
            assignment.insert(names[i].clone(), id);
        }
    }
    let q = modularity(network, &assignment)?;
    Ok(CommunityPartition {
        assignment,
        q,
        community_sizes: groups.iter().map(Vec::len).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique(net: &mut CoNetwork, words: &[&str]) {
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                net.add_edge(words[i], words[j], 1);
            }
        }
    }

    fn two_cliques() -> CoNetwork {
        let mut net = CoNetwork::default();
        clique(&mut net, &["a", "b", "c", "d"]);
        clique(&mut net, &["w", "x", "y", "z"]);
        net
    }

    #[test]
    fn single_community_has_zero_q() {
        let net = two_cliques();
        let all: BTreeMap<String, usize> = net.nodes.keys().map(|w| (w.clone(), 0)).collect();
        assert!(modularity(&net, &all).unwrap().abs() < 1e-15);
    }

    #[test]
    fn split_cliques_give_half() {
        let net = two_cliques();
        let split: BTreeMap<String, usize> = net
            .nodes
            .keys()
            .map(|w| (w.clone(), usize::from(w.as_str() >= "w")))
            .collect();
        assert!((modularity(&net, &split).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uncovered_and_empty() {
        let net = two_cliques();
        let partial: BTreeMap<String, usize> = [("a".to_string(), 0)].into();
        assert!(matches!(modularity(&net, &partial), Err(Error::UncoveredNode(_))));
        assert!(matches!(detect_communities(&CoNetwork::default()), Err(Error::EmptyNetwork)));
    }

    #[test]
    fn detects_two_cliques() {
        let net = two_cliques();
        let p = detect_communities(&net).unwrap();
        assert_eq!(p.community_sizes, vec![4, 4]);
        assert_eq!(p.assignment["a"], 0);
        assert_eq!(p.assignment["z"], 1);
        assert!((p.q - 0.5).abs() < 1e-15);
    }

    fn ring_of_cliques(cliques: usize, size: usize) -> CoNetwork {
        let mut net = CoNetwork::default();
        let name = |c: usize, i: usize| format!("c{c:02}n{i:02}");
        for c in 0..cliques {
            let words: Vec<String> = (0..size).map(|i| name(c, i)).collect();
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            clique(&mut net, &refs);
            net.add_edge(&name(c, 0), &name((c + 1) % cliques, 1), 1);
        }
        net
    }

    #[test]
    fn louvain_recovers_ring_of_cliques() {
        let net = ring_of_cliques(8, 5);
        let p = detect_communities(&net).unwrap();
        assert_eq!(p.community_sizes, vec![5; 8]);
        for c in 0..8 {
            let id = p.assignment[&format!("c{c:02}n00")];
            for i in 1..5 {
                assert_eq!(p.assignment[&format!("c{c:02}n{i:02}")], id);
            }
        }
        assert_eq!(detect_communities(&net).unwrap(), p);
    }

    #[test]
    fn aggregation_preserves_quality() {
        let net = ring_of_cliques(4, 4);
        let names: Vec<&String> = net.nodes.keys().collect();
        let g = Graph::from_network(&net, &names);
        let community: Vec<usize> = (0..g.len()).map(|i| i / 4).collect();
        let q_fine = g.quality(&community);
        let agg = g.aggregate(&community, 4);
        let q_coarse = agg.quality(&[0, 1, 2, 3]);
        assert!((q_fine - q_coarse).abs() < 1e-12);
    }

    #[test]
    fn top_communities() {
        let mut net = two_cliques();
        clique(&mut net, &["p", "q"]);
        net.add_edge("a", "b", 5);
        let p = detect_communities(&net).unwrap();
        let top = p.top(&net, 4, 2);
        assert_eq!(top.len(), 3);
        assert_eq!(top[0].top_terms, ["a", "b"]);
        assert_eq!(top[2].size, 2);
    }
}
