//! Cross-view object fusion: density filtering of per-view detections and
//! incremental merging by persistent ID or 3D box overlap.

use serde::{Deserialize, Serialize};

use crate::dbscan::{dbscan, NOISE};
use crate::geometry::{self, Aabb};
use crate::ingest::PointCloud;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalObjectCandidate {
    pub geometry: PointCloud,
    pub instance_id: u32,
    pub source_view: u32,
    pub seg_confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInstance {
    pub object_key: u32,
    pub merged_points: PointCloud,
    /// Instance ID of the first merged detection.
    pub instance_id: u32,
    /// Every instance ID absorbed into this object.
    pub instance_ids: Vec<u32>,
    pub bbox: Aabb,
    pub view_observations: Vec<(u32, f64)>,
    pub raw_captions: Vec<String>,
    pub caption: String,
    pub canonical_tag: String,
    pub tag_set: Vec<String>,
    pub embedding: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub kappa: f64,
    pub dbscan_eps_m: f64,
    pub dbscan_min_pts: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            kappa: 0.25,
            dbscan_eps_m: 0.05,
            dbscan_min_pts: 5,
        }
    }
}

/// Keep only the dominant Euclidean-DBSCAN cluster of a candidate's geometry.
/// Returns `None` when every point is noise (caller drops the candidate).
pub fn densify_filter(
    candidate: &LocalObjectCandidate,
    cfg: &FusionConfig,
) -> Option<LocalObjectCandidate> {
    let pts = &candidate.geometry.points;
    let labels = dbscan(pts.len(), cfg.dbscan_eps_m, cfg.dbscan_min_pts, |i, j| {
        geometry::dist(pts[i], pts[j])
    });
    let max_label = *labels.iter().max()?;
    if max_label == NOISE {
        return None;
    }
    let orig_centroid = geometry::centroid(pts);
    let mut best: Option<(usize, f64, i64)> = None; // (size, centroid dist, label)
    for l in 0..=max_label {
        let members: Vec<geometry::Vec3> = pts
            .iter()
            .zip(&labels)
            .filter(|(_, &lab)| lab == l)
            .map(|(p, _)| *p)
            .collect();
        let size = members.len();
        let cd = geometry::dist(geometry::centroid(&members), orig_centroid);
        let better = match best {
            None => true,
            Some((bs, bcd, _)) => size > bs || (size == bs && cd < bcd),
        };
        if better {
            best = Some((size, cd, l));
        }
    }
    let (_, _, keep) = best?;
    let points: Vec<geometry::Vec3> = pts
        .iter()
        .zip(&labels)
        .filter(|(_, &lab)| lab == keep)
        .map(|(p, _)| *p)
        .collect();
    Some(LocalObjectCandidate {
        geometry: PointCloud {
            points,
            source_view: candidate.geometry.source_view,
        },
        ..candidate.clone()
    })
}

/// Intersection-over-union of two axis-aligned boxes. Zero-volume unions map
/// to zero.
pub fn iou_3d(a: &Aabb, b: &Aabb) -> f64 {
    let mut inter = 1.0;
    for k in 0..3 {
        inter *= (a.max[k].min(b.max[k]) - a.min[k].max(b.min[k])).max(0.0);
    }
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Merge pre-filtered candidates, processed in (view_id, input) order, into a
/// global object set. A detection joins the first object with the same
/// instance ID; failing that, the object with the highest box IoU above
/// kappa (ties to the lowest object key); otherwise it registers new.
pub fn fuse(candidates: &[LocalObjectCandidate], cfg: &FusionConfig) -> Vec<ObjectInstance> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| (candidates[i].source_view, i));

    let mut objects: Vec<ObjectInstance> = Vec::new();
    for idx in order {
        let cand = &candidates[idx];
        let cand_box = match Aabb::from_points(&cand.geometry.points) {
            Some(b) => b,
            None => continue,
        };
        let mut target = objects
            .iter()
            .position(|o| o.instance_ids.contains(&cand.instance_id));
        if target.is_none() {
            let mut best_iou = cfg.kappa;
            for (oi, obj) in objects.iter().enumerate() {
                let v = iou_3d(&cand_box, &obj.bbox);
                if v > best_iou {
                    best_iou = v;
                    target = Some(oi);
                }
            }
        }
        match target {
            Some(oi) => {
                let obj = &mut objects[oi];
                obj.merged_points
                    .points
                    .extend_from_slice(&cand.geometry.points);
                obj.bbox = obj.bbox.union(&cand_box);
                if !obj.instance_ids.contains(&cand.instance_id) {
                    obj.instance_ids.push(cand.instance_id);
                }
                obj.view_observations
                    .push((cand.source_view, cand.seg_confidence));
            }
            None => {
                objects.push(ObjectInstance {
                    object_key: objects.len() as u32,
                    merged_points: PointCloud {
                        points: cand.geometry.points.clone(),
                        source_view: None,
                    },
                    instance_id: cand.instance_id,
                    instance_ids: vec![cand.instance_id],
                    bbox: cand_box,
                    view_observations: vec![(cand.source_view, cand.seg_confidence)],
                    raw_captions: Vec::new(),
                    caption: String::new(),
                    canonical_tag: String::new(),
                    tag_set: Vec::new(),
                    embedding: None,
                });
            }
        }
    }
    objects
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cand(id: u32, view: u32, points: Vec<Vec3>) -> LocalObjectCandidate {
        LocalObjectCandidate {
            geometry: PointCloud {
                points,
                source_view: Some(view),
            },
            instance_id: id,
            source_view: view,
            seg_confidence: 0.9,
        }
    }

    fn blob(center: Vec3, n: usize, spread: f64, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                [
                    center[0] + rng.gen_range(-spread..spread),
                    center[1] + rng.gen_range(-spread..spread),
                    center[2] + rng.gen_range(-spread..spread),
                ]
            })
            .collect()
    }

    #[test]
    fn tight_cluster_passes_unchanged() {
        let c = cand(0, 0, blob([0.0, 0.0, 0.0], 100, 0.02, 1));
        let out = densify_filter(&c, &FusionConfig::default()).unwrap();
        assert_eq!(out.geometry.points, c.geometry.points);
    }

    #[test]
    fn stragglers_removed_keeps_dominant_cluster() {
        let mut pts = blob([0.0, 0.0, 0.0], 100, 0.02, 2);
        pts.extend(blob([1.0, 1.0, 1.0], 5, 0.01, 3));
        let cfg = FusionConfig {
            dbscan_eps_m: 0.1,
            ..Default::default()
        };
        let c = cand(0, 0, pts.clone());
        let out = densify_filter(&c, &cfg).unwrap();
        assert_eq!(out.geometry.len(), 100);
        // brute-force reachability agreement
        let dist: Vec<Vec<f64>> = (0..pts.len())
            .map(|i| (0..pts.len()).map(|j| geometry::dist(pts[i], pts[j])).collect())
            .collect();
        let oracle = crate::oracle::brute_dbscan(&dist, cfg.dbscan_eps_m, cfg.dbscan_min_pts);
        let dominant: usize = oracle.iter().filter(|&&l| l == 0).count();
        assert_eq!(out.geometry.len(), dominant);
    }

    #[test]
    fn all_noise_is_dropped() {
        let pts = vec![[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 5.0, 0.0]];
        let cfg = FusionConfig {
            dbscan_eps_m: 0.1,
            dbscan_min_pts: 2,
            ..Default::default()
        };
        assert!(densify_filter(&cand(0, 0, pts), &cfg).is_none());
    }

    fn unit_cube_at(origin: Vec3) -> Aabb {
        Aabb {
            min: origin,
            max: [origin[0] + 1.0, origin[1] + 1.0, origin[2] + 1.0],
        }
    }

    #[test]
    fn iou_identical_and_disjoint() {
        let a = unit_cube_at([0.0, 0.0, 0.0]);
        assert_eq!(iou_3d(&a, &a), 1.0);
        let b = unit_cube_at([5.0, 0.0, 0.0]);
        assert_eq!(iou_3d(&a, &b), 0.0);
    }

    #[test]
    fn iou_half_shift() {
        let a = unit_cube_at([0.0, 0.0, 0.0]);
        let b = unit_cube_at([0.5, 0.0, 0.0]);
        assert!((iou_3d(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn iou_zero_volume_union() {
        let flat = Aabb {
            min: [0.0, 0.0, 0.0],
            max: [0.0, 0.0, 0.0],
        };
        assert_eq!(iou_3d(&flat, &flat), 0.0);
    }

    #[test]
    fn same_id_zero_iou_merges() {
        let a = cand(7, 0, blob([0.0, 0.0, 0.0], 20, 0.05, 4));
        let b = cand(7, 1, blob([5.0, 5.0, 5.0], 20, 0.05, 5));
        let out = fuse(&[a, b], &FusionConfig::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].merged_points.len(), 40);
    }

    #[test]
    fn different_id_zero_iou_stays_separate() {
        let a = cand(1, 0, blob([0.0, 0.0, 0.0], 20, 0.05, 6));
        let b = cand(2, 1, blob([5.0, 5.0, 5.0], 20, 0.05, 7));
        let out = fuse(&[a, b], &FusionConfig::default());
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn duplicate_detection_never_creates_new_object() {
        let a = cand(1, 0, blob([0.0, 0.0, 0.0], 30, 0.05, 8));
        let dup = LocalObjectCandidate {
            source_view: 1,
            ..a.clone()
        };
        let out = fuse(&[a, dup], &FusionConfig::default());
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn randomized_sequences_match_unionfind_oracle() {
        let cfg = FusionConfig::default();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cands = Vec::new();
            let mut raw = Vec::new();
            for i in 0..20 {
                let id = rng.gen_range(0..8u32);
                let center = [
                    rng.gen_range(0.0..3.0),
                    rng.gen_range(0.0..3.0),
                    rng.gen_range(0.0..1.0),
                ];
                let pts = blob(center, 15, 0.2, seed * 100 + i);
                cands.push(cand(id, i as u32, pts.clone()));
                raw.push((id, pts));
            }
            let out = fuse(&cands, &cfg);
            let oracle = crate::oracle::brute_unionfind_fusion(&raw, cfg.kappa);
            assert_eq!(out.len(), oracle.len(), "seed {seed}");
            for (obj, group) in out.iter().zip(&oracle) {
                let expected: usize = group.iter().map(|&g| raw[g].1.len()).sum();
                assert_eq!(obj.merged_points.len(), expected, "seed {seed}");
            }
            // every input point lands in exactly one object
            let total: usize = out.iter().map(|o| o.merged_points.len()).sum();
            assert_eq!(total, 20 * 15);
        }
    }

    #[test]
    fn bbox_contains_all_merged_points() {
        let a = cand(1, 0, blob([0.0, 0.0, 0.0], 30, 0.3, 9));
        let b = cand(1, 1, blob([0.5, 0.2, 0.1], 30, 0.3, 10));
        let out = fuse(&[a, b], &FusionConfig::default());
        for p in &out[0].merged_points.points {
            assert!(out[0].bbox.contains_point(*p));
        }
    }
}
