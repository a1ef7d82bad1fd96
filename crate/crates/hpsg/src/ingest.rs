//! Loading and validation of per-view reconstruction artifacts, and lifting of
//! 2D masks into confidence-filtered 3D candidate point clouds.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const MANIFEST_VERSION: u32 = 1;

/// One view's point map, confidence map, instance masks and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewBundle {
    pub view_id: u32,
    pub width: usize,
    pub height: usize,
    /// Row-major W*H grid of 3D points in meters, scene frame.
    pub point_map: Vec<Vec3>,
    /// Row-major W*H grid of nonnegative confidences.
    pub confidence_map: Vec<f64>,
    pub masks: Vec<InstanceMask2D>,
    pub image_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMask2D {
    /// Row-major W*H boolean grid.
    pub mask: Vec<bool>,
    pub instance_id: u32,
    pub category_hint: Option<String>,
    pub confidence: f64,
}

impl InstanceMask2D {
    pub fn true_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub source_view: Option<u32>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    version: u32,
    views: Vec<ManifestView>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestView {
    view_id: u32,
    width: usize,
    height: usize,
    point_map: String,
    confidence_map: String,
    #[serde(default)]
    masks: Vec<ManifestMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_path: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestMask {
    instance_id: u32,
    mask: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category_hint: Option<String>,
    confidence: f64,
}

fn read_f32_grid(path: &Path, expected: usize, view_id: u32, field: &str) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if bytes.len() % 4 != 0 || bytes.len() / 4 != expected {
        return Err(Error::DimensionMismatch {
            view_id,
            field: field.to_string(),
            got: bytes.len() / 4,
            expected,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn read_u8_grid(path: &Path, expected: usize, view_id: u32, field: &str) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if bytes.len() != expected {
        return Err(Error::DimensionMismatch {
            view_id,
            field: field.to_string(),
            got: bytes.len(),
            expected,
        });
    }
    Ok(bytes)
}

/// Load a scene manifest and all referenced binary grids.
///
/// Views are returned sorted by `view_id`; every invariant of [`ViewBundle`]
/// is validated and violations are reported with the offending view and field.
pub fn load_scene(manifest_path: &Path) -> Result<Vec<ViewBundle>> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    let manifest: ManifestFile =
        serde_json::from_str(&text).map_err(|e| Error::json(manifest_path.display().to_string(), e))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::SchemaVersion {
            path: manifest_path.display().to_string(),
            got: manifest.version,
            expected: MANIFEST_VERSION,
        });
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut views = Vec::with_capacity(manifest.views.len());
    for mv in &manifest.views {
        views.push(load_view(base, mv)?);
    }
    views.sort_by_key(|v| v.view_id);
    Ok(views)
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_view(base: &Path, mv: &ManifestView) -> Result<ViewBundle> {
    let npix = mv.width * mv.height;
    let raw_points = read_f32_grid(&resolve(base, &mv.point_map), npix * 3, mv.view_id, "point_map")?;
    let raw_conf = read_f32_grid(
        &resolve(base, &mv.confidence_map),
        npix,
        mv.view_id,
        "confidence_map",
    )?;

    let point_map: Vec<Vec3> = raw_points
        .chunks_exact(3)
        .map(|c| [c[0] as f64, c[1] as f64, c[2] as f64])
        .collect();
    if point_map.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite {
            view_id: mv.view_id,
            field: "point_map".to_string(),
        });
    }
    let confidence_map: Vec<f64> = raw_conf.iter().map(|&v| v as f64).collect();
    if confidence_map.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFinite {
            view_id: mv.view_id,
            field: "confidence_map".to_string(),
        });
    }

    let mut masks = Vec::with_capacity(mv.masks.len());
    for (idx, mm) in mv.masks.iter().enumerate() {
        let raw = read_u8_grid(
            &resolve(base, &mm.mask),
            npix,
            mv.view_id,
            &format!("masks[{idx}]"),
        )?;
        let mask: Vec<bool> = raw.iter().map(|&b| b != 0).collect();
        if !mask.iter().any(|&b| b) {
            return Err(Error::InvalidView {
                view_id: mv.view_id,
                reason: format!("masks[{idx}] (instance {}) has no true pixel", mm.instance_id),
            });
        }
        if !(0.0..=1.0).contains(&mm.confidence) {
            return Err(Error::InvalidView {
                view_id: mv.view_id,
                reason: format!("masks[{idx}] confidence {} outside [0,1]", mm.confidence),
            });
        }
        masks.push(InstanceMask2D {
            mask,
            instance_id: mm.instance_id,
            category_hint: mm.category_hint.clone(),
            confidence: mm.confidence,
        });
    }

    Ok(ViewBundle {
        view_id: mv.view_id,
        width: mv.width,
        height: mv.height,
        point_map,
        confidence_map,
        masks,
        image_path: mv.image_path.clone(),
    })
}

/// All points whose confidence is at least `tau_conf`, in row-major pixel order.
pub fn filter_by_confidence(view: &ViewBundle, tau_conf: f64) -> PointCloud {
    let points = view
        .point_map
        .iter()
        .zip(&view.confidence_map)
        .filter(|(_, &c)| c >= tau_conf)
        .map(|(p, _)| *p)
        .collect();
    PointCloud {
        points,
        source_view: Some(view.view_id),
    }
}

/// Points at pixels where the mask is true and confidence is at least
/// `tau_conf`, in row-major pixel order.
pub fn lift_masked_points(view: &ViewBundle, mask: &InstanceMask2D, tau_conf: f64) -> PointCloud {
    let points = view
        .point_map
        .iter()
        .zip(&view.confidence_map)
        .zip(&mask.mask)
        .filter(|((_, &c), &m)| m && c >= tau_conf)
        .map(|((p, _), _)| *p)
        .collect();
    PointCloud {
        points,
        source_view: Some(view.view_id),
    }
}
