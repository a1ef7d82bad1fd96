//! Planar surface extraction: mask-guided RANSAC, clustering in plane
//! parameter space, region growing, and cross-view alignment into a globally
//! consistent plane set.

use std::collections::BTreeSet;

use nalgebra::Matrix3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dbscan::{dbscan, NOISE};
use crate::geometry::{self, Vec3};
use crate::ingest::{lift_masked_points, InstanceMask2D, PointCloud, ViewBundle};

/// Unit normal and offset; the plane is `{p : <n,p> = d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneParams {
    pub normal: Vec3,
    pub offset_d: f64,
}

impl PlaneParams {
    /// Canonical sign: `offset_d >= 0`; at exactly zero offset the first
    /// nonzero normal component is positive.
    pub fn canonicalize(mut self) -> PlaneParams {
        // skip renormalization of an already-unit normal so that
        // canonicalization is exactly idempotent
        if (geometry::norm(self.normal) - 1.0).abs() > 4.0 * f64::EPSILON {
            self.normal = geometry::normalize(self.normal);
        }
        if self.offset_d < 0.0 {
            self.normal = geometry::scale(self.normal, -1.0);
            self.offset_d = -self.offset_d;
        } else if self.offset_d == 0.0 {
            for k in 0..3 {
                if self.normal[k] != 0.0 {
                    if self.normal[k] < 0.0 {
                        self.normal = geometry::scale(self.normal, -1.0);
                    }
                    break;
                }
            }
        }
        self
    }

    pub fn signed_dist(&self, p: Vec3) -> f64 {
        geometry::dot(self.normal, p) - self.offset_d
    }
}

/// Distance in plane parameter space: angle between normals plus a weighted
/// offset gap, taken over both sign conventions of the second plane so that
/// (n, d) and (-n, -d) describe the same surface.
pub fn pps_dist(a: &PlaneParams, b: &PlaneParams) -> f64 {
    const LAMBDA: f64 = 1.0; // rad per meter
    let raw = |bn: Vec3, bd: f64| {
        let c = geometry::dot(a.normal, bn).clamp(-1.0, 1.0);
        c.acos() + LAMBDA * (a.offset_d - bd).abs()
    };
    raw(b.normal, b.offset_d).min(raw(geometry::scale(b.normal, -1.0), -b.offset_d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCandidate {
    pub params: PlaneParams,
    pub inliers: PointCloud,
    pub source_view: u32,
    pub inlier_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPlane {
    pub params: PlaneParams,
    pub points: PointCloud,
    pub supporting_views: BTreeSet<u32>,
    pub area_m2: f64,
    pub boundary_length_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlaneDetectConfig {
    pub tau_dist: f64,
    pub rho_min_inlier: f64,
    pub ransac_iters: u32,
    pub theta_ang_deg: f64,
    pub delta_dist: f64,
    pub pps_eps_intra: f64,
    pub pps_eps_global: f64,
    pub dbscan_min_pts: usize,
    pub rng_seed: u64,
}

impl Default for PlaneDetectConfig {
    fn default() -> Self {
        PlaneDetectConfig {
            tau_dist: 0.02,
            rho_min_inlier: 0.5,
            ransac_iters: 500,
            theta_ang_deg: 15.0,
            delta_dist: 0.03,
            pps_eps_intra: 0.10,
            pps_eps_global: 0.15,
            dbscan_min_pts: 2,
            rng_seed: 0,
        }
    }
}

/// Why a candidate cloud produced no plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneFitReject {
    TooFewPoints,
    /// All points (near-)collinear; no plane is defined.
    Degenerate,
    LowInlierRatio,
}

/// Least-squares plane through a point set: centroid plus the smallest
/// principal direction of the covariance. Returns the RMS residual.
fn fit_plane_lsq(points: &[Vec3]) -> Result<(PlaneParams, f64), PlaneFitReject> {
    if points.len() < 3 {
        return Err(PlaneFitReject::TooFewPoints);
    }
    let c = geometry::centroid(points);
    let mut cov = Matrix3::<f64>::zeros();
    for p in points {
        let d = geometry::sub(*p, c);
        for i in 0..3 {
            for j in 0..3 {
                cov[(i, j)] += d[i] * d[j];
            }
        }
    }
    let eig = cov.symmetric_eigen();
    // index of smallest and middle eigenvalue
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let spread = eig.eigenvalues[order[2]].max(1e-30);
    if eig.eigenvalues[order[1]] / spread < 1e-10 {
        return Err(PlaneFitReject::Degenerate);
    }
    let nv = eig.eigenvectors.column(order[0]);
    let normal = geometry::normalize([nv[0], nv[1], nv[2]]);
    let params = PlaneParams {
        normal,
        offset_d: geometry::dot(normal, c),
    }
    .canonicalize();
    let mut ss = 0.0;
    for p in points {
        let r = params.signed_dist(*p);
        ss += r * r;
    }
    Ok((params, (ss / points.len() as f64).sqrt()))
}

fn inliers_of(params: &PlaneParams, cloud: &[Vec3], tau: f64) -> Vec<Vec3> {
    cloud
        .iter()
        .copied()
        .filter(|&p| params.signed_dist(p).abs() <= tau)
        .collect()
}

/// RANSAC plane fit with a seeded PRNG, 3-point minimal samples and a final
/// least-squares refit on the inlier set. The stored inliers are exactly the
/// points within `tau_dist` of the reported parameters.
pub fn fit_plane_ransac(
    cloud: &PointCloud,
    cfg: &PlaneDetectConfig,
) -> Result<PlaneCandidate, PlaneFitReject> {
    fit_plane_ransac_seeded(cloud, cfg, cfg.rng_seed)
}

pub fn fit_plane_ransac_seeded(
    cloud: &PointCloud,
    cfg: &PlaneDetectConfig,
    seed: u64,
) -> Result<PlaneCandidate, PlaneFitReject> {
    let pts = &cloud.points;
    let n = pts.len();
    if n < 3 {
        return Err(PlaneFitReject::TooFewPoints);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, f64, PlaneParams)> = None; // (count, rms, params)
    let mut any_sample = false;
    for _ in 0..cfg.ransac_iters {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let k = rng.gen_range(0..n);
        if i == j || j == k || i == k {
            continue;
        }
        let e1 = geometry::sub(pts[j], pts[i]);
        let e2 = geometry::sub(pts[k], pts[i]);
        let nv = geometry::cross(e1, e2);
        let nn = geometry::norm(nv);
        if nn < 1e-12 {
            continue;
        }
        any_sample = true;
        let normal = geometry::scale(nv, 1.0 / nn);
        let params = PlaneParams {
            normal,
            offset_d: geometry::dot(normal, pts[i]),
        }
        .canonicalize();
        let mut count = 0usize;
        let mut ss = 0.0;
        for p in pts {
            let r = params.signed_dist(*p);
            if r.abs() <= cfg.tau_dist {
                count += 1;
                ss += r * r;
            }
        }
        if count < 3 {
            continue;
        }
        let rms = (ss / count as f64).sqrt();
        let better = match &best {
            None => true,
            Some((bc, brms, _)) => count > *bc || (count == *bc && rms < *brms),
        };
        if better {
            best = Some((count, rms, params));
        }
    }
    let (_, _, rough) = match best {
        Some(b) => b,
        None => {
            return Err(if any_sample {
                PlaneFitReject::LowInlierRatio
            } else {
                PlaneFitReject::Degenerate
            })
        }
    };
    let rough_inliers = inliers_of(&rough, pts, cfg.tau_dist);
    let (params, _) = fit_plane_lsq(&rough_inliers)?;
    let final_inliers = inliers_of(&params, pts, cfg.tau_dist);
    let ratio = final_inliers.len() as f64 / n as f64;
    if ratio < cfg.rho_min_inlier {
        return Err(PlaneFitReject::LowInlierRatio);
    }
    Ok(PlaneCandidate {
        params,
        inliers: PointCloud {
            points: final_inliers,
            source_view: cloud.source_view,
        },
        source_view: cloud.source_view.unwrap_or(0),
        inlier_ratio: ratio,
    })
}

/// DBSCAN over canonicalized plane parameters under the PPS metric.
/// Noise is labeled -1; labels are deterministic in input order.
pub fn cluster_pps(params: &[PlaneParams], eps: f64, min_pts: usize) -> Vec<i64> {
    dbscan(params.len(), eps, min_pts, |i, j| {
        pps_dist(&params[i], &params[j])
    })
}

/// Per-point unit normals from PCA over the k nearest neighbors, oriented
/// toward the centroid of the cloud.
pub fn estimate_normals(points: &[Vec3], k: usize) -> Vec<Vec3> {
    let n = points.len();
    let c = geometry::centroid(points);
    let k = k.min(n.saturating_sub(1)).max(2);
    let mut normals = Vec::with_capacity(n);
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        dists.clear();
        for j in 0..n {
            if j != i {
                dists.push((geometry::dist(points[i], points[j]), j));
            }
        }
        let kk = k.min(dists.len());
        dists.select_nth_unstable_by(kk - 1, |a, b| a.partial_cmp(b).unwrap());
        let mut nbr: Vec<Vec3> = dists[..kk].iter().map(|&(_, j)| points[j]).collect();
        nbr.push(points[i]);
        let normal = match fit_plane_lsq(&nbr) {
            Ok((p, _)) => p.normal,
            Err(_) => [0.0, 0.0, 1.0],
        };
        // orient toward the view-origin proxy
        let to_center = geometry::sub(c, points[i]);
        let oriented = if geometry::dot(normal, to_center) < 0.0 {
            geometry::scale(normal, -1.0)
        } else {
            normal
        };
        normals.push(oriented);
    }
    normals
}

/// Expand a plane with view points satisfying the angular and distance
/// constraints, then refit. Never drops an existing inlier.
pub fn region_grow(
    plane: &PlaneCandidate,
    view_points: &PointCloud,
    normals: &[Vec3],
    cfg: &PlaneDetectConfig,
) -> PlaneCandidate {
    let theta = cfg.theta_ang_deg.to_radians();
    let n = plane.params.normal;
    let mut seen: std::collections::HashSet<[u64; 3]> = plane
        .inliers
        .points
        .iter()
        .map(|p| [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()])
        .collect();
    let mut grown = plane.inliers.points.clone();
    for (p, np) in view_points.points.iter().zip(normals) {
        let ang = geometry::dot(n, *np).abs().clamp(0.0, 1.0).acos();
        if ang >= theta {
            continue;
        }
        if plane.params.signed_dist(*p).abs() >= cfg.delta_dist {
            continue;
        }
        let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
        if seen.insert(key) {
            grown.push(*p);
        }
    }
    let params = match fit_plane_lsq(&grown) {
        Ok((p, _)) => p,
        Err(_) => plane.params,
    };
    PlaneCandidate {
        params,
        inliers: PointCloud {
            points: grown,
            source_view: plane.inliers.source_view,
        },
        source_view: plane.source_view,
        inlier_ratio: plane.inlier_ratio,
    }
}

/// Merge a group of candidates into one: concatenate points, refit, and keep
/// only points within `tau_dist` of the refit parameters.
fn merge_candidates(members: &[&PlaneCandidate], tau: f64) -> Option<PlaneCandidate> {
    let mut pts: Vec<Vec3> = Vec::new();
    for m in members {
        pts.extend_from_slice(&m.inliers.points);
    }
    let (params, _) = fit_plane_lsq(&pts).ok()?;
    let kept = inliers_of(&params, &pts, tau);
    if kept.len() < 3 {
        return None;
    }
    let ratio = kept.len() as f64 / pts.len() as f64;
    Some(PlaneCandidate {
        params,
        inliers: PointCloud {
            points: kept,
            source_view: members[0].inliers.source_view,
        },
        source_view: members[0].source_view,
        inlier_ratio: ratio,
    })
}

/// One round of PPS clustering + merging. Singleton noise passes through.
fn consolidate(cands: Vec<PlaneCandidate>, eps: f64, min_pts: usize, tau: f64) -> Vec<PlaneCandidate> {
    if cands.len() <= 1 {
        return cands;
    }
    let params: Vec<PlaneParams> = cands.iter().map(|c| c.params).collect();
    let labels = cluster_pps(&params, eps, min_pts);
    let mut out = Vec::new();
    let max_label = labels.iter().copied().max().unwrap_or(NOISE);
    for l in 0..=max_label.max(-1) {
        let members: Vec<&PlaneCandidate> = cands
            .iter()
            .zip(&labels)
            .filter(|(_, &lab)| lab == l)
            .map(|(c, _)| c)
            .collect();
        if members.is_empty() {
            continue;
        }
        if let Some(m) = merge_candidates(&members, tau) {
            out.push(m);
        }
    }
    for (c, &lab) in cands.iter().zip(&labels) {
        if lab == NOISE {
            out.push(c.clone());
        }
    }
    out
}

/// Per-view plane pipeline: lift each class-agnostic mask, RANSAC-fit,
/// cluster in PPS, region-grow against the view's confident cloud, and
/// consolidate until no two outputs are within `pps_eps_intra`.
pub fn detect_view_planes(
    view: &ViewBundle,
    class_agnostic_masks: &[&InstanceMask2D],
    tau_conf: f64,
    cfg: &PlaneDetectConfig,
) -> Vec<PlaneCandidate> {
    let mut cands: Vec<PlaneCandidate> = Vec::new();
    for (idx, mask) in class_agnostic_masks.iter().enumerate() {
        let cloud = lift_masked_points(view, mask, tau_conf);
        let seed = cfg
            .rng_seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add((view.view_id as u64) << 20)
            .wrapping_add(idx as u64);
        if let Ok(c) = fit_plane_ransac_seeded(&cloud, cfg, seed) {
            cands.push(c);
        }
    }
    if cands.is_empty() {
        return cands;
    }
    // coarse grouping of co-planar candidates
    cands = consolidate(cands, cfg.pps_eps_intra, cfg.dbscan_min_pts, cfg.tau_dist);

    let view_cloud = crate::ingest::filter_by_confidence(view, tau_conf);
    if view_cloud.len() >= 3 {
        let normals = estimate_normals(&view_cloud.points, 16);
        cands = cands
            .into_iter()
            .map(|c| region_grow(&c, &view_cloud, &normals, cfg))
            .collect();
    }
    // final consolidation; iterate since merging moves parameters
    for _ in 0..5 {
        let before = cands.len();
        cands = consolidate(cands, cfg.pps_eps_intra, cfg.dbscan_min_pts, cfg.tau_dist);
        if cands.len() == before {
            break;
        }
    }
    cands
}

/// In-plane convex hull of the points; returns (area, perimeter).
pub fn hull_area_perimeter(params: &PlaneParams, points: &[Vec3]) -> (f64, f64) {
    // 2D coordinates in a deterministic in-plane basis
    let basis = geometry::GravityBasis::from_up(params.normal);
    let mut pts2: Vec<[f64; 2]> = points
        .iter()
        .map(|&p| {
            let q = basis.to_frame(p);
            [q[0], q[1]]
        })
        .collect();
    pts2.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts2.dedup();
    if pts2.len() < 3 {
        return (0.0, 0.0);
    }
    // Andrew monotone chain
    let cross2 = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for &p in &pts2 {
        while hull.len() >= 2 && cross2(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts2.iter().rev() {
        while hull.len() >= lower_len && cross2(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        return (0.0, 0.0);
    }
    let mut area2 = 0.0;
    let mut perim = 0.0;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        area2 += a[0] * b[1] - b[0] * a[1];
        perim += ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    }
    (area2.abs() * 0.5, perim)
}

/// Cluster all per-view planes in PPS and merge each cluster into one
/// globally consistent plane. Planes left as noise become singletons.
pub fn align_cross_view(per_view: &[Vec<PlaneCandidate>], cfg: &PlaneDetectConfig) -> Vec<GlobalPlane> {
    let all: Vec<&PlaneCandidate> = per_view.iter().flatten().collect();
    if all.is_empty() {
        return Vec::new();
    }
    let params: Vec<PlaneParams> = all.iter().map(|c| c.params).collect();
    let labels = cluster_pps(&params, cfg.pps_eps_global, cfg.dbscan_min_pts);
    let mut groups: Vec<Vec<&PlaneCandidate>> = Vec::new();
    let max_label = labels.iter().copied().max().unwrap_or(NOISE);
    for l in 0..=max_label.max(-1) {
        let members: Vec<&PlaneCandidate> = all
            .iter()
            .zip(&labels)
            .filter(|(_, &lab)| lab == l)
            .map(|(c, _)| *c)
            .collect();
        if !members.is_empty() {
            groups.push(members);
        }
    }
    for (c, &lab) in all.iter().zip(&labels) {
        if lab == NOISE {
            groups.push(vec![c]);
        }
    }

    let mut out = Vec::new();
    for members in groups {
        let merged = match merge_candidates(&members, cfg.tau_dist) {
            Some(m) => m,
            None => continue,
        };
        let views: BTreeSet<u32> = members.iter().map(|m| m.source_view).collect();
        let (area, perim) = hull_area_perimeter(&merged.params, &merged.inliers.points);
        out.push(GlobalPlane {
            params: merged.params,
            points: PointCloud {
                points: merged.inliers.points,
                source_view: None,
            },
            supporting_views: views,
            area_m2: area,
            boundary_length_m: perim,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(points: Vec<Vec3>) -> PointCloud {
        PointCloud {
            points,
            source_view: Some(0),
        }
    }

    fn grid_on_z0(n: usize) -> Vec<Vec3> {
        let side = (n as f64).sqrt().ceil() as usize;
        (0..n)
            .map(|i| [(i % side) as f64 * 0.1, (i / side) as f64 * 0.1, 0.0])
            .collect()
    }

    #[test]
    fn exact_plane_recovered() {
        let c = cloud(grid_on_z0(100));
        let fit = fit_plane_ransac(&c, &PlaneDetectConfig::default()).unwrap();
        assert!((fit.params.normal[2].abs() - 1.0).abs() < 1e-9);
        assert!(fit.params.offset_d.abs() < 1e-9);
        assert_eq!(fit.inlier_ratio, 1.0);
        assert_eq!(fit.inliers.len(), 100);
    }

    #[test]
    fn plane_with_outliers() {
        let mut pts = grid_on_z0(100);
        for p in pts.iter_mut() {
            p[2] = 2.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            pts.push([rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(3.0..5.0)]);
        }
        let cfg = PlaneDetectConfig {
            tau_dist: 0.01,
            ..Default::default()
        };
        let fit = fit_plane_ransac(&cloud(pts), &cfg).unwrap();
        assert!((fit.params.offset_d - 2.0).abs() < 1e-3);
        assert!((fit.inlier_ratio - 100.0 / 110.0).abs() < 1e-9);
    }

    #[test]
    fn random_ball_rejected_by_min_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = Vec::new();
        while pts.len() < 300 {
            let p = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            if geometry::norm(p) <= 1.0 {
                pts.push(p);
            }
        }
        // independent check that no plane explains 90% of the ball
        let cfg = PlaneDetectConfig {
            rho_min_inlier: 0.9,
            ..Default::default()
        };
        let mut max_ratio: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len().min(i + 20) {
                for k in (j + 1)..pts.len().min(j + 5) {
                    let nv = geometry::cross(
                        geometry::sub(pts[j], pts[i]),
                        geometry::sub(pts[k], pts[i]),
                    );
                    if geometry::norm(nv) < 1e-9 {
                        continue;
                    }
                    let n = geometry::normalize(nv);
                    let d = geometry::dot(n, pts[i]);
                    let count = pts
                        .iter()
                        .filter(|&&p| (geometry::dot(n, p) - d).abs() <= cfg.tau_dist)
                        .count();
                    max_ratio = max_ratio.max(count as f64 / pts.len() as f64);
                }
            }
        }
        assert!(max_ratio < 0.9);
        assert_eq!(
            fit_plane_ransac(&cloud(pts), &cfg).unwrap_err(),
            PlaneFitReject::LowInlierRatio
        );
    }

    #[test]
    fn collinear_input_is_degenerate() {
        let pts: Vec<Vec3> = (0..50).map(|i| [i as f64 * 0.1, 0.0, 0.0]).collect();
        let err = fit_plane_ransac(&cloud(pts), &PlaneDetectConfig::default()).unwrap_err();
        assert_eq!(err, PlaneFitReject::Degenerate);
    }

    #[test]
    fn identical_params_cluster_together() {
        let p = PlaneParams {
            normal: [0.0, 0.0, 1.0],
            offset_d: 1.0,
        };
        assert_eq!(cluster_pps(&[p, p], 0.1, 2), vec![0, 0]);
    }

    #[test]
    fn far_params_are_noise() {
        let a = PlaneParams {
            normal: [0.0, 0.0, 1.0],
            offset_d: 0.0,
        }
        .canonicalize();
        let b = PlaneParams {
            normal: [1.0, 0.0, 0.0],
            offset_d: 3.0,
        };
        assert_eq!(cluster_pps(&[a, b], 0.1, 2), vec![NOISE, NOISE]);
    }

    #[test]
    fn jittered_planes_form_two_clusters() {
        let mut params = Vec::new();
        for i in 0..3 {
            let e = i as f64 * 0.005;
            params.push(
                PlaneParams {
                    normal: geometry::normalize([e, 0.0, 1.0]),
                    offset_d: 1.0 + e,
                }
                .canonicalize(),
            );
            params.push(
                PlaneParams {
                    normal: geometry::normalize([1.0, e, 0.0]),
                    offset_d: 2.0 - e,
                }
                .canonicalize(),
            );
        }
        let labels = cluster_pps(&params, 0.1, 2);
        let oracle = crate::oracle::brute_dbscan(
            &(0..params.len())
                .map(|i| {
                    (0..params.len())
                        .map(|j| pps_dist(&params[i], &params[j]))
                        .collect()
                })
                .collect::<Vec<Vec<f64>>>(),
            0.1,
            2,
        );
        assert_eq!(labels, oracle);
        let k = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
        assert_eq!(k, 2);
    }

    #[test]
    fn region_grow_fixed_point_when_nothing_qualifies() {
        let base = grid_on_z0(50);
        let plane = fit_plane_ransac(&cloud(base.clone()), &PlaneDetectConfig::default()).unwrap();
        let far: Vec<Vec3> = (0..20).map(|i| [i as f64 * 0.1, 0.0, 5.0]).collect();
        let normals = vec![[0.0, 0.0, 1.0]; far.len()];
        let grown = region_grow(&plane, &cloud(far), &normals, &PlaneDetectConfig::default());
        assert_eq!(grown.inliers.points, plane.inliers.points);
    }

    #[test]
    fn region_grow_excludes_tilted_normal() {
        let base = grid_on_z0(50);
        let plane = fit_plane_ransac(&cloud(base), &PlaneDetectConfig::default()).unwrap();
        let cfg = PlaneDetectConfig::default();
        let theta = cfg.theta_ang_deg.to_radians();
        let bad = theta + 0.1;
        let candidate = vec![[5.0, 5.0, 0.0]];
        let normals = vec![[bad.sin(), 0.0, bad.cos()]];
        let grown = region_grow(&plane, &cloud(candidate.clone()), &normals, &cfg);
        assert!(!grown.inliers.points.contains(&candidate[0]));
        // the same point with an aligned normal is added
        let good_normals = vec![[0.0, 0.0, 1.0]];
        let grown = region_grow(&plane, &cloud(candidate.clone()), &good_normals, &cfg);
        assert!(grown.inliers.points.contains(&candidate[0]));
    }

    #[test]
    fn region_grow_is_monotone() {
        let base = grid_on_z0(50);
        let plane = fit_plane_ransac(&cloud(base), &PlaneDetectConfig::default()).unwrap();
        let extra: Vec<Vec3> = (0..30).map(|i| [i as f64 * 0.05 + 3.0, 1.0, 0.001]).collect();
        let normals = vec![[0.0, 0.0, 1.0]; extra.len()];
        let grown = region_grow(&plane, &cloud(extra), &normals, &PlaneDetectConfig::default());
        for p in &plane.inliers.points {
            assert!(grown.inliers.points.contains(p));
        }
        assert!(grown.inliers.len() > plane.inliers.len());
    }

    #[test]
    fn eq4_exactness_on_fitted_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let mut pts = Vec::new();
            let nz: Vec3 = geometry::normalize([
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.1..1.0),
            ]);
            let d = rng.gen_range(-2.0..2.0);
            let basis = geometry::GravityBasis::from_up(nz);
            for _ in 0..150 {
                let u = rng.gen_range(-1.0..1.0);
                let v = rng.gen_range(-1.0..1.0);
                let noise = rng.gen_range(-0.01..0.01);
                let p = geometry::add(
                    geometry::scale(nz, d + noise),
                    geometry::add(geometry::scale(basis.x, u), geometry::scale(basis.y, v)),
                );
                pts.push(p);
            }
            for _ in 0..20 {
                pts.push([
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                ]);
            }
            let cfg = PlaneDetectConfig {
                rng_seed: trial,
                ..Default::default()
            };
            let fit = fit_plane_ransac(&cloud(pts.clone()), &cfg).unwrap();
            let brute = crate::oracle::brute_inliers(
                &pts,
                fit.params.normal,
                fit.params.offset_d,
                cfg.tau_dist,
            );
            let stored: Vec<Vec3> = fit.inliers.points.clone();
            let brute_pts: Vec<Vec3> = brute.iter().map(|&i| pts[i]).collect();
            assert_eq!(stored, brute_pts);
        }
    }

    #[test]
    fn cross_view_merges_same_wall() {
        let cfg = PlaneDetectConfig::default();
        let mut per_view = Vec::new();
        for v in 0..3u32 {
            let pts: Vec<Vec3> = (0..100)
                .map(|i| [1.0, (i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1 + v as f64 * 0.01])
                .collect();
            let mut c = fit_plane_ransac(&cloud(pts), &cfg).unwrap();
            c.source_view = v;
            per_view.push(vec![c]);
        }
        let global = align_cross_view(&per_view, &cfg);
        assert_eq!(global.len(), 1);
        assert_eq!(global[0].supporting_views.len(), 3);
    }

    #[test]
    fn parallel_walls_stay_separate() {
        let cfg = PlaneDetectConfig::default();
        let mut per_view = Vec::new();
        for (v, x) in [(0u32, 0.0f64), (1, 3.0)] {
            let pts: Vec<Vec3> = (0..100)
                .map(|i| [x, (i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1])
                .collect();
            let mut c = fit_plane_ransac(&cloud(pts), &cfg).unwrap();
            c.source_view = v;
            per_view.push(vec![c]);
        }
        let global = align_cross_view(&per_view, &cfg);
        assert_eq!(global.len(), 2);
    }

    #[test]
    fn hull_of_unit_square_has_area_one() {
        let params = PlaneParams {
            normal: [0.0, 0.0, 1.0],
            offset_d: 0.0,
        };
        let pts: Vec<Vec3> = (0..121)
            .map(|i| [(i % 11) as f64 * 0.1, (i / 11) as f64 * 0.1, 0.0])
            .collect();
        let (area, perim) = hull_area_perimeter(&params, &pts);
        assert!((area - 1.0).abs() < 1e-9);
        assert!((perim - 4.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(
            nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0, d in -5.0f64..5.0
        ) {
            prop_assume!(geometry::norm([nx, ny, nz]) > 1e-3);
            let p = PlaneParams { normal: geometry::normalize([nx, ny, nz]), offset_d: d };
            let once = p.canonicalize();
            let twice = once.canonicalize();
            prop_assert_eq!(once, twice);
            prop_assert!(once.offset_d >= 0.0);
        }

        #[test]
        fn pps_dist_invariant_to_sign_flip(
            nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0, d in -5.0f64..5.0,
            mx in -1.0f64..1.0, my in -1.0f64..1.0, mz in -1.0f64..1.0, e in -5.0f64..5.0
        ) {
            prop_assume!(geometry::norm([nx, ny, nz]) > 1e-3);
            prop_assume!(geometry::norm([mx, my, mz]) > 1e-3);
            let a = PlaneParams { normal: geometry::normalize([nx, ny, nz]), offset_d: d };
            let b = PlaneParams { normal: geometry::normalize([mx, my, mz]), offset_d: e };
            let flipped = PlaneParams { normal: geometry::scale(b.normal, -1.0), offset_d: -e };
            prop_assert!((pps_dist(&a, &b) - pps_dist(&a, &flipped)).abs() < 1e-9);
        }
    }
}
