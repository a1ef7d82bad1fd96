//! End-to-end orchestration: load a scene, detect and label planes, fuse
//! objects, attach captions, and persist the intermediate artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{Annotator, DEFAULT_CAPTION_TEMPLATE};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::fusion::{densify_filter, fuse, LocalObjectCandidate};
use crate::geometry::Vec3;
use crate::graph::{ObjectInput, StructuralPlaneInput};
use crate::ingest::{lift_masked_points, load_scene, ViewBundle};
use crate::label::{estimate_gravity, label_planes};
use crate::plane::{align_cross_view, detect_view_planes, PlaneCandidate};
use crate::synth::GroundTruth;

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParseOutput {
    pub version: u32,
    pub up: Vec3,
    pub floor_height: f64,
    pub planes: Vec<StructuralPlaneInput>,
    pub objects: Vec<ObjectInput>,
}

/// Resolve a scene argument to its manifest path: either the manifest file
/// itself or a directory containing `scene.json`.
pub fn manifest_path(scene: &Path) -> PathBuf {
    if scene.is_dir() {
        scene.join("scene.json")
    } else {
        scene.to_path_buf()
    }
}

#[derive(Debug, Deserialize)]
struct CaptionsFile {
    #[allow(dead_code)]
    version: u32,
    #[serde(default)]
    instances: BTreeMap<String, Vec<String>>,
}

fn load_captions(scene_dir: &Path) -> Result<BTreeMap<u32, Vec<String>>> {
    let path = scene_dir.join("captions.json");
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let file: CaptionsFile =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    let mut out = BTreeMap::new();
    for (k, v) in file.instances {
        let id: u32 = k
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("captions.json: bad instance key '{k}'")))?;
        out.insert(id, v);
    }
    Ok(out)
}

fn process_view(
    view: &ViewBundle,
    cfg: &PipelineConfig,
) -> (Vec<PlaneCandidate>, Vec<LocalObjectCandidate>) {
    let structural: Vec<_> = view
        .masks
        .iter()
        .filter(|m| m.category_hint.is_none())
        .collect();
    let planes = detect_view_planes(view, &structural, cfg.tau_conf, &cfg.plane);

    let mut objects = Vec::new();
    for mask in view.masks.iter().filter(|m| m.category_hint.is_some()) {
        let cloud = lift_masked_points(view, mask, cfg.tau_conf);
        if cloud.is_empty() {
            continue;
        }
        let candidate = LocalObjectCandidate {
            geometry: cloud,
            instance_id: mask.instance_id,
            source_view: view.view_id,
            seg_confidence: mask.confidence,
        };
        if let Some(kept) = densify_filter(&candidate, &cfg.fusion) {
            objects.push(kept);
        }
    }
    (planes, objects)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(f)
    }
}

/// Parse a scene directory into labeled structural planes and fused,
/// captioned objects.
pub fn run_parse(
    scene: &Path,
    cfg: &PipelineConfig,
    annotator: &dyn Annotator,
) -> Result<ParseOutput> {
    let manifest = manifest_path(scene);
    let scene_dir = manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    let views = load_scene(&manifest)?;
    let captions = load_captions(&scene_dir)?;

    let per_view: Vec<(Vec<PlaneCandidate>, Vec<LocalObjectCandidate>)> =
        in_pool(cfg.threads, || {
            views.par_iter().map(|v| process_view(v, cfg)).collect()
        });

    let plane_candidates: Vec<Vec<PlaneCandidate>> =
        per_view.iter().map(|(p, _)| p.clone()).collect();
    let globals = align_cross_view(&plane_candidates, &cfg.plane);
    let frame = estimate_gravity(&globals, None)?;
    let labels = label_planes(&globals, &frame, &cfg.label);

    let mut planes = Vec::with_capacity(globals.len());
    for (g, label) in globals.iter().zip(&labels) {
        let bbox = crate::geometry::Aabb::from_points(&g.points.points)
            .ok_or_else(|| Error::InvalidGraph("plane with no points".to_string()))?;
        planes.push(StructuralPlaneInput {
            params: g.params,
            label: *label,
            area_m2: g.area_m2,
            boundary_length_m: g.boundary_length_m,
            supporting_views: g.supporting_views.iter().copied().collect(),
            inlier_count: g.points.len(),
            centroid: bbox.centroid(),
            bbox,
        });
    }

    // hints recorded per instance, used when no caption file entry exists
    let mut hints: BTreeMap<u32, String> = BTreeMap::new();
    for v in &views {
        for m in &v.masks {
            if let Some(h) = &m.category_hint {
                hints.entry(m.instance_id).or_insert_with(|| h.clone());
            }
        }
    }

    let candidates: Vec<LocalObjectCandidate> =
        per_view.into_iter().flat_map(|(_, o)| o).collect();
    let fused = fuse(&candidates, &cfg.fusion);

    let mut objects = Vec::with_capacity(fused.len());
    for obj in &fused {
        let raw = captions.get(&obj.instance_id).cloned().unwrap_or_else(|| {
            hints
                .get(&obj.instance_id)
                .map(|h| vec![format!("a {h}")])
                .unwrap_or_default()
        });
        let refined = if raw.is_empty() {
            crate::annotate::CaptionResult {
                caption: format!("object {}", obj.instance_id),
                canonical_tag: "object".to_string(),
                tag_set: vec!["object".to_string()],
            }
        } else {
            annotator.refine_captions(&raw, DEFAULT_CAPTION_TEMPLATE)?
        };
        objects.push(ObjectInput {
            object_key: obj.object_key,
            instance_id: obj.instance_id,
            caption: refined.caption,
            canonical_tag: refined.canonical_tag,
            tag_set: refined.tag_set,
            centroid: obj.bbox.centroid(),
            bbox: obj.bbox,
            point_count: obj.merged_points.len(),
            view_observations: obj.view_observations.clone(),
        });
    }

    Ok(ParseOutput {
        version: ARTIFACT_VERSION,
        up: frame.up,
        floor_height: frame.floor_height,
        planes,
        objects,
    })
}

pub fn save_parse_output(out: &ParseOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let planes = serde_json::json!({
        "version": out.version,
        "up": out.up,
        "floor_height": out.floor_height,
        "planes": out.planes,
    });
    let objects = serde_json::json!({
        "version": out.version,
        "objects": out.objects,
    });
    for (name, value) in [("planes.json", planes), ("objects.json", objects)] {
        let path = dir.join(name);
        std::fs::write(&path, serde_json::to_string(&value).expect("serializes") + "\n")
            .map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}

pub fn load_parse_output(dir: &Path) -> Result<ParseOutput> {
    #[derive(Deserialize)]
    struct PlanesFile {
        version: u32,
        up: Vec3,
        floor_height: f64,
        planes: Vec<StructuralPlaneInput>,
    }
    #[derive(Deserialize)]
    struct ObjectsFile {
        objects: Vec<ObjectInput>,
    }
    let planes_path = dir.join("planes.json");
    let text = std::fs::read_to_string(&planes_path)
        .map_err(|e| Error::io(planes_path.display().to_string(), e))?;
    let pf: PlanesFile =
        serde_json::from_str(&text).map_err(|e| Error::json(planes_path.display().to_string(), e))?;
    if pf.version != ARTIFACT_VERSION {
        return Err(Error::SchemaVersion {
            path: planes_path.display().to_string(),
            got: pf.version,
            expected: ARTIFACT_VERSION,
        });
    }
    let objects_path = dir.join("objects.json");
    let text = std::fs::read_to_string(&objects_path)
        .map_err(|e| Error::io(objects_path.display().to_string(), e))?;
    let of: ObjectsFile = serde_json::from_str(&text)
        .map_err(|e| Error::json(objects_path.display().to_string(), e))?;
    Ok(ParseOutput {
        version: pf.version,
        up: pf.up,
        floor_height: pf.floor_height,
        planes: pf.planes,
        objects: of.objects,
    })
}

// ---------------------------------------------------------------------------
// evaluation against ground truth

#[derive(Debug, Clone, Serialize)]
pub struct PlaneMatch {
    pub gt_label: String,
    pub predicted_label: Option<String>,
    pub normal_err_deg: Option<f64>,
    pub offset_err_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub gt_planes: usize,
    pub detected_planes: usize,
    pub matched_planes: usize,
    pub label_matches: usize,
    pub mean_normal_err_deg: f64,
    pub max_normal_err_deg: f64,
    pub max_offset_err_m: f64,
    pub gt_objects: usize,
    pub detected_objects: usize,
    pub matched_objects: usize,
    pub mean_object_centroid_err_m: f64,
    pub plane_matches: Vec<PlaneMatch>,
}

fn folded_angle_deg(a: Vec3, b: Vec3) -> f64 {
    crate::geometry::dot(a, b).abs().clamp(0.0, 1.0).acos().to_degrees()
}

/// Match each ground-truth plane to the closest detected plane (angle first,
/// then offset) and each ground-truth object by instance id.
pub fn evaluate(parse: &ParseOutput, gt: &GroundTruth) -> EvalReport {
    let mut plane_matches = Vec::new();
    let mut matched = 0usize;
    let mut label_matches = 0usize;
    let mut normal_errs = Vec::new();
    let mut offset_errs: Vec<f64> = Vec::new();
    for gp in &gt.planes {
        let best = parse
            .planes
            .iter()
            .map(|p| {
                let ang = folded_angle_deg(p.params.normal, gp.normal);
                // offsets compare against the sign convention that matches
                let d_err = if crate::geometry::dot(p.params.normal, gp.normal) >= 0.0 {
                    (p.params.offset_d - gp.offset_d).abs()
                } else {
                    (p.params.offset_d + gp.offset_d).abs()
                };
                (ang, d_err, p)
            })
            .min_by(|a, b| {
                // combined surface distance so near-parallel planes at
                // different offsets cannot steal the match
                let ca = a.0.to_radians() + a.1;
                let cb = b.0.to_radians() + b.1;
                ca.partial_cmp(&cb).unwrap()
            });
        match best {
            Some((ang, d_err, p)) => {
                matched += 1;
                if p.label == gp.label {
                    label_matches += 1;
                }
                normal_errs.push(ang);
                offset_errs.push(d_err);
                plane_matches.push(PlaneMatch {
                    gt_label: gp.label.as_str().to_string(),
                    predicted_label: Some(p.label.as_str().to_string()),
                    normal_err_deg: Some(ang),
                    offset_err_m: Some(d_err),
                });
            }
            None => plane_matches.push(PlaneMatch {
                gt_label: gp.label.as_str().to_string(),
                predicted_label: None,
                normal_err_deg: None,
                offset_err_m: None,
            }),
        }
    }

    let mut matched_objects = 0usize;
    let mut centroid_errs = Vec::new();
    for go in &gt.objects {
        if let Some(o) = parse.objects.iter().find(|o| o.instance_id == go.instance_id) {
            matched_objects += 1;
            centroid_errs.push(crate::geometry::dist(o.centroid, go.bbox.centroid()));
        }
    }

    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    EvalReport {
        gt_planes: gt.planes.len(),
        detected_planes: parse.planes.len(),
        matched_planes: matched,
        label_matches,
        mean_normal_err_deg: mean(&normal_errs),
        max_normal_err_deg: normal_errs.iter().cloned().fold(0.0, f64::max),
        max_offset_err_m: offset_errs.iter().cloned().fold(0.0, f64::max),
        gt_objects: gt.objects.len(),
        detected_objects: parse.objects.len(),
        matched_objects,
        mean_object_centroid_err_m: mean(&centroid_errs),
        plane_matches,
    }
}
