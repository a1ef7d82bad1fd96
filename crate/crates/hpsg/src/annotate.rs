//! External-annotator contracts: caption consolidation, spatial relation
//! estimation, scene-type summarization and text embedding.
//!
//! The geometric core only sees the [`Annotator`] trait. A deterministic stub
//! backs every role so the pipeline runs offline; a spawned backend process
//! speaking line-delimited JSON can replace any of them via
//! `HPSG_ANNOTATOR_CMD`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

pub const DEFAULT_EMBED_DIM: usize = 384;
pub const ANNOTATOR_CMD_ENV: &str = "HPSG_ANNOTATOR_CMD";

/// Placeholder consolidation prompt; the real wording is backend-owned.
pub const DEFAULT_CAPTION_TEMPLATE: &str =
    "Consolidate the following captions into one coherent caption, a canonical tag, and a tag set.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationLabel {
    On,
    In,
    NextTo,
    None,
}

impl RelationLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RelationLabel::On => "on",
            RelationLabel::In => "in",
            RelationLabel::NextTo => "next_to",
            RelationLabel::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextEmbedding {
    pub vector: Vec<f64>,
}

impl TextEmbedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn cosine(&self, other: &TextEmbedding) -> f64 {
        self.vector
            .iter()
            .zip(&other.vector)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Geometry and caption summary of an object, as sent to the relation backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub caption: String,
    pub centroid: Vec3,
    pub bbox: Aabb,
}

pub struct CaptionResult {
    pub caption: String,
    pub canonical_tag: String,
    pub tag_set: Vec<String>,
}

pub trait Annotator: Send + Sync {
    fn refine_captions(&self, raw: &[String], template: &str) -> Result<CaptionResult>;
    fn estimate_relation(&self, a: &ObjectSummary, b: &ObjectSummary) -> Result<RelationLabel>;
    fn summarize_scene_type(&self, captions: &[String]) -> Result<String>;
    fn embed_text(&self, text: &str) -> Result<TextEmbedding>;
    fn embed_dim(&self) -> usize;
}

// ---------------------------------------------------------------------------
// deterministic stub backend

/// Articles, prepositions and similar function words; excluded from tag sets
/// and embeddings.
const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "is", "are", "this", "that", "it", "its", "with",
    "and", "or", "to", "near", "by", "for", "what", "which", "where", "who", "how",
];

/// Common qualifiers skipped when picking the head noun of a caption.
const QUALIFIER_WORDS: &[&str] = &[
    "red", "green", "blue", "white", "black", "brown", "grey", "gray", "yellow", "orange",
    "wooden", "metal", "plastic", "ceramic", "glass", "leather", "small", "large", "big", "tiny",
    "tall", "short", "round", "square", "old", "new", "main", "dining", "office",
];

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

fn is_function_word(t: &str) -> bool {
    FUNCTION_WORDS.contains(&t)
}

fn is_qualifier(t: &str) -> bool {
    is_function_word(t) || QUALIFIER_WORDS.contains(&t)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct StubAnnotator {
    pub dim: usize,
    pub seed: u64,
}

impl Default for StubAnnotator {
    fn default() -> Self {
        StubAnnotator {
            dim: DEFAULT_EMBED_DIM,
            seed: 0,
        }
    }
}

impl StubAnnotator {
    pub fn new(dim: usize, seed: u64) -> Self {
        StubAnnotator { dim, seed }
    }
}

/// Horizontal overlap of two boxes relative to the smaller footprint, so a
/// small box resting on a large one still registers support.
fn horizontal_overlap_ratio(a: &Aabb, b: &Aabb) -> f64 {
    let ix = (a.max[0].min(b.max[0]) - a.min[0].max(b.min[0])).max(0.0);
    let iy = (a.max[1].min(b.max[1]) - a.min[1].max(b.min[1])).max(0.0);
    let inter = ix * iy;
    let area_a = (a.max[0] - a.min[0]).max(0.0) * (a.max[1] - a.min[1]).max(0.0);
    let area_b = (b.max[0] - b.min[0]).max(0.0) * (b.max[1] - b.min[1]).max(0.0);
    let denom = area_a.min(area_b);
    if denom <= 0.0 {
        0.0
    } else {
        inter / denom
    }
}

pub fn stub_relation(a: &ObjectSummary, b: &ObjectSummary) -> RelationLabel {
    if (a.bbox.min[2] - b.bbox.max[2]).abs() <= 0.05 && horizontal_overlap_ratio(&a.bbox, &b.bbox) > 0.3
    {
        return RelationLabel::On;
    }
    if b.bbox.inflate(0.05).contains_box(&a.bbox) {
        return RelationLabel::In;
    }
    if crate::geometry::dist(a.centroid, b.centroid) < 1.0 {
        return RelationLabel::NextTo;
    }
    RelationLabel::None
}

const OFFICE_LEXICON: &[&str] = &["desk", "monitor", "keyboard", "whiteboard"];

impl Annotator for StubAnnotator {
    fn refine_captions(&self, raw: &[String], _template: &str) -> Result<CaptionResult> {
        let caption = raw
            .iter()
            .max_by_key(|c| c.len())
            .cloned()
            .unwrap_or_default();
        // head noun of each caption: first token that is not a qualifier
        let mut noun_counts: Vec<(String, usize)> = Vec::new();
        for c in raw {
            let toks = tokenize(c);
            if let Some(noun) = toks.iter().find(|t| !is_qualifier(t)) {
                match noun_counts.iter_mut().find(|(n, _)| n == noun) {
                    Some((_, cnt)) => *cnt += 1,
                    None => noun_counts.push((noun.clone(), 1)),
                }
            }
        }
        let canonical_tag = noun_counts
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1))
            .map(|(n, _)| n.clone())
            .unwrap_or_default();
        let mut tag_set: Vec<String> = Vec::new();
        for c in raw {
            for t in tokenize(c) {
                if !is_function_word(&t) && !tag_set.contains(&t) {
                    tag_set.push(t);
                }
            }
        }
        Ok(CaptionResult {
            caption,
            canonical_tag,
            tag_set,
        })
    }

    fn estimate_relation(&self, a: &ObjectSummary, b: &ObjectSummary) -> Result<RelationLabel> {
        Ok(stub_relation(a, b))
    }

    fn summarize_scene_type(&self, captions: &[String]) -> Result<String> {
        for c in captions {
            let toks = tokenize(c);
            if toks.iter().any(|t| OFFICE_LEXICON.contains(&t.as_str())) {
                return Ok("office".to_string());
            }
        }
        Ok("room".to_string())
    }

    fn embed_text(&self, text: &str) -> Result<TextEmbedding> {
        let toks = tokenize(text);
        let content: Vec<&String> = toks.iter().filter(|t| !is_function_word(t)).collect();
        let used: Vec<&String> = if content.is_empty() {
            toks.iter().collect()
        } else {
            content
        };
        let mut v = vec![0.0f64; self.dim];
        for t in &used {
            let h = fnv1a(t.as_bytes()) ^ self.seed;
            let mut rng = ChaCha8Rng::seed_from_u64(h);
            for x in v.iter_mut() {
                *x += rng.gen_range(-1.0..1.0);
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            v[0] = 1.0;
        } else {
            for x in v.iter_mut() {
                *x /= norm;
            }
        }
        Ok(TextEmbedding { vector: v })
    }

    fn embed_dim(&self) -> usize {
        self.dim
    }
}

// ---------------------------------------------------------------------------
// remote backend over line-delimited JSON

#[derive(Debug, Serialize, Deserialize)]
pub struct AnnotatorRequest {
    pub request_id: u64,
    pub role: String,
    pub payload: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnnotatorResponse {
    pub request_id: u64,
    pub ok: bool,
    #[serde(default)]
    pub result: serde_json::Value,
}

struct BackendProcess {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
}

impl Drop for BackendProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Annotator backed by a spawned process; falls back to the stub when the
/// backend errors or replies malformed.
pub struct ProcessAnnotator {
    state: Mutex<BackendProcess>,
    fallback: StubAnnotator,
}

impl ProcessAnnotator {
    pub fn spawn(cmd: &str, fallback: StubAnnotator) -> Result<ProcessAnnotator> {
        let parts: Vec<&str> = cmd.split_whitespace().collect();
        let (prog, args) = parts.split_first().ok_or_else(|| Error::Annotator {
            request_id: 0,
            reason: "empty backend command".to_string(),
        })?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Annotator {
                request_id: 0,
                reason: format!("spawn {cmd}: {e}"),
            })?;
        let stdin = child.stdin.take().unwrap();
        let stdout = BufReader::new(child.stdout.take().unwrap());
        Ok(ProcessAnnotator {
            state: Mutex::new(BackendProcess {
                child,
                stdin,
                stdout,
                next_id: 1,
            }),
            fallback,
        })
    }

    fn call(&self, role: &str, payload: serde_json::Value) -> Result<serde_json::Value> {
        let mut state = self.state.lock().unwrap();
        let request_id = state.next_id;
        state.next_id += 1;
        let req = AnnotatorRequest {
            request_id,
            role: role.to_string(),
            payload,
        };
        let line = serde_json::to_string(&req).unwrap();
        let err = |reason: String| Error::Annotator { request_id, reason };
        writeln!(state.stdin, "{line}").map_err(|e| err(format!("write: {e}")))?;
        state.stdin.flush().map_err(|e| err(format!("flush: {e}")))?;
        let mut reply = String::new();
        state
            .stdout
            .read_line(&mut reply)
            .map_err(|e| err(format!("read: {e}")))?;
        let resp: AnnotatorResponse =
            serde_json::from_str(reply.trim()).map_err(|e| err(format!("malformed reply: {e}")))?;
        if resp.request_id != request_id {
            return Err(err(format!("response id {} does not match", resp.request_id)));
        }
        if !resp.ok {
            return Err(err("backend reported failure".to_string()));
        }
        Ok(resp.result)
    }
}

impl Annotator for ProcessAnnotator {
    fn refine_captions(&self, raw: &[String], template: &str) -> Result<CaptionResult> {
        let payload = serde_json::json!({ "captions": raw, "template": template });
        match self.call("caption_refine", payload) {
            Ok(v) => {
                let caption = v.get("caption").and_then(|c| c.as_str());
                let tag = v.get("canonical_tag").and_then(|c| c.as_str());
                let tags = v.get("tag_set").and_then(|c| c.as_array());
                match (caption, tag, tags) {
                    (Some(c), Some(t), Some(ts)) => Ok(CaptionResult {
                        caption: c.to_string(),
                        canonical_tag: t.to_string(),
                        tag_set: ts
                            .iter()
                            .filter_map(|x| x.as_str().map(|s| s.to_string()))
                            .collect(),
                    }),
                    _ => self.fallback.refine_captions(raw, template),
                }
            }
            Err(_) => self.fallback.refine_captions(raw, template),
        }
    }

    fn estimate_relation(&self, a: &ObjectSummary, b: &ObjectSummary) -> Result<RelationLabel> {
        let payload = serde_json::json!({ "a": a, "b": b });
        match self.call("relation", payload) {
            Ok(v) => match v.as_str() {
                Some("on") => Ok(RelationLabel::On),
                Some("in") => Ok(RelationLabel::In),
                Some("next_to") => Ok(RelationLabel::NextTo),
                Some("none") => Ok(RelationLabel::None),
                _ => self.fallback.estimate_relation(a, b),
            },
            Err(_) => self.fallback.estimate_relation(a, b),
        }
    }

    fn summarize_scene_type(&self, captions: &[String]) -> Result<String> {
        let payload = serde_json::json!({ "captions": captions });
        match self.call("scene_type", payload) {
            Ok(v) => match v.as_str() {
                Some(s) if !s.is_empty() => Ok(s.to_string()),
                _ => self.fallback.summarize_scene_type(captions),
            },
            Err(_) => self.fallback.summarize_scene_type(captions),
        }
    }

    fn embed_text(&self, text: &str) -> Result<TextEmbedding> {
        let payload = serde_json::json!({ "text": text });
        match self.call("embed", payload) {
            Ok(v) => {
                let vec: Option<Vec<f64>> = v
                    .as_array()
                    .map(|a| a.iter().filter_map(|x| x.as_f64()).collect());
                match vec {
                    Some(vector) if vector.len() == self.fallback.dim => {
                        let norm: f64 = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if (norm - 1.0).abs() > 1e-5 {
                            return self.fallback.embed_text(text);
                        }
                        Ok(TextEmbedding { vector })
                    }
                    _ => self.fallback.embed_text(text),
                }
            }
            Err(_) => self.fallback.embed_text(text),
        }
    }

    fn embed_dim(&self) -> usize {
        self.fallback.dim
    }
}

/// Stub annotator, or a process backend when `HPSG_ANNOTATOR_CMD` is set.
pub fn annotator_from_env(dim: usize, seed: u64) -> Box<dyn Annotator> {
    let stub = StubAnnotator::new(dim, seed);
    match std::env::var(ANNOTATOR_CMD_ENV) {
        Ok(cmd) if !cmd.trim().is_empty() => match ProcessAnnotator::spawn(&cmd, stub.clone()) {
            Ok(p) => Box::new(p),
            Err(_) => Box::new(stub),
        },
        _ => Box::new(stub),
    }
}
