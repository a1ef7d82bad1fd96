//! Geometry-driven structural labeling of global planes in a gravity-aligned
//! frame: floor, ceiling, wall, or non-structural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};
use crate::plane::GlobalPlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructuralLabel {
    Floor,
    Ceiling,
    Wall,
    NonStructural,
}

impl StructuralLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StructuralLabel::Floor => "floor",
            StructuralLabel::Ceiling => "ceiling",
            StructuralLabel::Wall => "wall",
            StructuralLabel::NonStructural => "non_structural",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityFrame {
    pub up: Vec3,
    pub floor_height: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabelConfig {
    pub ceiling_cone_deg: f64,
    pub wall_ortho_tol_deg: f64,
    pub min_wall_area_m2: f64,
    pub min_wall_boundary_m: f64,
    pub min_wall_views: usize,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            ceiling_cone_deg: 20.0,
            wall_ortho_tol_deg: 10.0,
            min_wall_area_m2: 0.5,
            min_wall_boundary_m: 2.0,
            min_wall_views: 2,
        }
    }
}

const GRAVITY_PRIOR_CONE_DEG: f64 = 25.0;
/// Fraction of scene points that must lie above a floor hypothesis.
const FLOOR_ABOVE_FRACTION: f64 = 0.9;
/// Slack when counting points above the floor hypothesis, meters.
const FLOOR_ABOVE_SLACK: f64 = 0.05;
/// Extra floor planes within this height of the lowest one stay Floor.
pub const FLOOR_BAND_M: f64 = 0.2;

/// Angle between a plane normal and a direction, folded to [0, 90] degrees so
/// the normal's sign convention does not matter.
fn folded_angle_deg(normal: Vec3, dir: Vec3) -> f64 {
    geometry::dot(normal, dir).abs().clamp(0.0, 1.0).acos().to_degrees()
}

/// Bootstrap the gravity frame from a floor hypothesis: among planes within
/// 25 degrees of the prior up direction, pick the one with the most points
/// whose surface is a height minimum of the scene. The up sign is resolved so
/// that the bulk of the scene lies above the plane.
pub fn estimate_gravity(planes: &[GlobalPlane], prior_up: Option<Vec3>) -> Result<GravityFrame> {
    let prior = geometry::normalize(prior_up.unwrap_or([0.0, 0.0, 1.0]));
    let total_points: usize = planes.iter().map(|p| p.points.len()).sum();
    let mut best: Option<(usize, Vec3, f64)> = None; // (count, up, floor_height)
    for plane in planes {
        if folded_angle_deg(plane.params.normal, prior) >= GRAVITY_PRIOR_CONE_DEG {
            continue;
        }
        let up = if geometry::dot(plane.params.normal, prior) >= 0.0 {
            plane.params.normal
        } else {
            geometry::scale(plane.params.normal, -1.0)
        };
        let height: f64 = plane
            .points
            .points
            .iter()
            .map(|&p| geometry::dot(p, up))
            .sum::<f64>()
            / plane.points.len().max(1) as f64;
        let above = planes
            .iter()
            .flat_map(|q| q.points.points.iter())
            .filter(|&&p| geometry::dot(p, up) >= height - FLOOR_ABOVE_SLACK)
            .count();
        if (above as f64) < FLOOR_ABOVE_FRACTION * total_points as f64 {
            continue;
        }
        let count = plane.points.len();
        if best.map_or(true, |(bc, _, _)| count > bc) {
            best = Some((count, up, height));
        }
    }
    match best {
        Some((_, up, floor_height)) => Ok(GravityFrame { up, floor_height }),
        None => Err(Error::GravityIndeterminate {
            max_deg: GRAVITY_PRIOR_CONE_DEG,
        }),
    }
}

/// Assign one structural label per plane.
///
/// Horizontal planes (within the ceiling cone of up) near the floor height are
/// Floor, above it Ceiling. Near-vertical planes are Wall only when they pass
/// area, boundary-length and multi-view support criteria.
pub fn label_planes(
    planes: &[GlobalPlane],
    frame: &GravityFrame,
    cfg: &LabelConfig,
) -> Vec<StructuralLabel> {
    planes
        .iter()
        .map(|plane| {
            let angle = folded_angle_deg(plane.params.normal, frame.up);
            let height: f64 = plane
                .points
                .points
                .iter()
                .map(|&p| geometry::dot(p, frame.up))
                .sum::<f64>()
                / plane.points.len().max(1) as f64;
            if angle < cfg.ceiling_cone_deg {
                if height <= frame.floor_height + FLOOR_BAND_M {
                    StructuralLabel::Floor
                } else {
                    StructuralLabel::Ceiling
                }
            } else if (angle - 90.0).abs() < cfg.wall_ortho_tol_deg {
                let ok = plane.area_m2 >= cfg.min_wall_area_m2
                    && plane.boundary_length_m >= cfg.min_wall_boundary_m
                    && plane.supporting_views.len() >= cfg.min_wall_views;
                if ok {
                    StructuralLabel::Wall
                } else {
                    StructuralLabel::NonStructural
                }
            } else {
                StructuralLabel::NonStructural
            }
        })
        .collect()
}
