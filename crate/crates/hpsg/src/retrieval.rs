//! Query-time retrieval: embedding-scored seed selection, two-hop subgraph
//! expansion, and plain-text context rendering.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::annotate::{Annotator, TextEmbedding};
use crate::error::Result;
use crate::graph::{Edge, Hpsg, Node, Payload};

pub const DEFAULT_TOP_K: usize = 5;
pub const DEFAULT_TEMPERATURE: f64 = 0.07;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryRequest {
    pub text: String,
    pub k: usize,
    pub temperature: f64,
}

impl QueryRequest {
    pub fn new(text: &str) -> Self {
        QueryRequest {
            text: text.to_string(),
            k: DEFAULT_TOP_K,
            temperature: DEFAULT_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgraphResult {
    pub seed_ids: Vec<u32>,
    pub node_ids: Vec<u32>,
    pub edge_ids: Vec<u32>,
    /// (node_id, score) for every node, descending score.
    pub scores: Vec<(u32, f64)>,
    pub context_text: String,
}

/// Exponentiated cosine score for every node against the query embedding.
/// Returned in node order.
pub fn score_nodes(g: &Hpsg, query: &TextEmbedding, temperature: f64) -> Vec<(u32, f64)> {
    g.nodes
        .iter()
        .map(|n| {
            let cos: f64 = n.embedding.iter().zip(&query.vector).map(|(a, b)| a * b).sum();
            (n.node_id, (cos / temperature).exp())
        })
        .collect()
}

/// Exact top-k by score, ties broken by ascending node id.
pub fn top_k_seeds(scores: &[(u32, f64)], k: usize) -> Vec<u32> {
    let mut ranked: Vec<(u32, f64)> = scores.to_vec();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked.into_iter().map(|(id, _)| id).collect()
}

/// Node ids within two hops of any seed, plus the ids of all edges whose
/// endpoints both fall inside that node set (the induced subgraph).
pub fn expand_two_hop(g: &Hpsg, seeds: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let mut depth: BTreeMap<u32, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &s in seeds {
        if g.adjacency.contains_key(&s) && !depth.contains_key(&s) {
            depth.insert(s, 0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = depth[&u];
        if d == 2 {
            continue;
        }
        if let Some(neigh) = g.adjacency.get(&u) {
            for &v in neigh {
                if let std::collections::btree_map::Entry::Vacant(e) = depth.entry(v) {
                    e.insert(d + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    let nodes: BTreeSet<u32> = depth.into_keys().collect();
    let edges: Vec<u32> = g
        .edges
        .iter()
        .filter(|e| nodes.contains(&e.endpoints.0) && nodes.contains(&e.endpoints.1))
        .map(|e| e.edge_id)
        .collect();
    (nodes.into_iter().collect(), edges)
}

fn fmt3(v: [f64; 3]) -> String {
    format!("({:.3}, {:.3}, {:.3})", v[0], v[1], v[2])
}

fn node_line(n: &Node, score: Option<f64>) -> String {
    let kind = match &n.payload {
        Payload::SceneType { .. } => "scene",
        Payload::Plane(p) => p.label.as_str(),
        Payload::Object(o) => {
            if o.canonical_tag.is_empty() {
                "object"
            } else {
                &o.canonical_tag
            }
        }
    };
    let geom = match &n.payload {
        Payload::SceneType { .. } => String::new(),
        Payload::Plane(p) => format!(
            " @ {} bbox {} .. {}",
            fmt3(p.centroid),
            fmt3(p.bbox.min),
            fmt3(p.bbox.max)
        ),
        Payload::Object(o) => format!(
            " @ {} bbox {} .. {}",
            fmt3(o.centroid),
            fmt3(o.bbox.min),
            fmt3(o.bbox.max)
        ),
    };
    let score = match score {
        Some(s) => format!(" score {s:.4}"),
        None => String::new(),
    };
    format!(
        "[{}] (level {}, {}) {}{}{}",
        n.node_id, n.level, kind, n.caption, geom, score
    )
}

fn edge_line(e: &Edge) -> String {
    format!("[{}] --{}--> [{}]", e.endpoints.0, e.relation, e.endpoints.1)
}

/// Render the node and edge lists as LLM-ready plain text: nodes by
/// descending score (ties by id), then edges sorted by (level, edge id).
pub fn render_context(
    g: &Hpsg,
    node_ids: &[u32],
    edge_ids: &[u32],
    scores: &[(u32, f64)],
) -> String {
    let score_of: BTreeMap<u32, f64> = scores.iter().copied().collect();
    let mut ids: Vec<u32> = node_ids.to_vec();
    ids.sort_by(|a, b| {
        let sa = score_of.get(a).copied().unwrap_or(0.0);
        let sb = score_of.get(b).copied().unwrap_or(0.0);
        sb.partial_cmp(&sa).unwrap().then(a.cmp(b))
    });
    let mut out = String::from("Nodes:\n");
    for id in &ids {
        if let Some(n) = g.node(*id) {
            out.push_str(&node_line(n, score_of.get(id).copied()));
            out.push('\n');
        }
    }
    out.push_str("Edges:\n");
    let mut edges: Vec<&Edge> = g
        .edges
        .iter()
        .filter(|e| edge_ids.contains(&e.edge_id))
        .collect();
    edges.sort_by_key(|e| (e.level, e.edge_id));
    for e in edges {
        out.push_str(&edge_line(e));
        out.push('\n');
    }
    out
}

/// Render the entire graph (no scores) in node-id / (level, edge-id) order.
pub fn render_full_graph(g: &Hpsg) -> String {
    let mut out = String::from("Nodes:\n");
    for n in &g.nodes {
        out.push_str(&node_line(n, None));
        out.push('\n');
    }
    out.push_str("Edges:\n");
    let mut edges: Vec<&Edge> = g.edges.iter().collect();
    edges.sort_by_key(|e| (e.level, e.edge_id));
    for e in edges {
        out.push_str(&edge_line(e));
        out.push('\n');
    }
    out
}

/// Full retrieval path: embed the query, score all nodes, pick top-k seeds,
/// expand two hops, and render the induced subgraph.
pub fn query(g: &Hpsg, annotator: &dyn Annotator, req: &QueryRequest) -> Result<SubgraphResult> {
    let embedding = annotator.embed_text(&req.text)?;
    let mut scores = score_nodes(g, &embedding, req.temperature);
    let seed_ids = top_k_seeds(&scores, req.k);
    let (node_ids, edge_ids) = expand_two_hop(g, &seed_ids);
    let context_text = render_context(g, &node_ids, &edge_ids, &scores);
    scores.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(SubgraphResult {
        seed_ids,
        node_ids,
        edge_ids,
        scores,
        context_text,
    })
}
