//! Brute-force reference implementations used as equality oracles in tests.
//!
//! Each oracle is a naive, self-contained re-implementation that shares no
//! code with the main pipeline. Size caps keep them trivially correct; calls
//! beyond a cap panic rather than degrade.

use crate::geometry::Vec3;

pub const MAX_POINTS: usize = 10_000;
pub const MAX_CLUSTER_ITEMS: usize = 200;
pub const MAX_MST_NODES: usize = 8;
pub const MAX_EMBEDDINGS: usize = 10_000;

/// Indices of points within `tau` of the plane `<n,p> = d`, by linear scan.
pub fn brute_inliers(points: &[Vec3], normal: Vec3, d: f64, tau: f64) -> Vec<usize> {
    assert!(points.len() <= MAX_POINTS, "brute_inliers size cap exceeded");
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            (normal[0] * p[0] + normal[1] * p[1] + normal[2] * p[2] - d).abs() <= tau
        })
        .map(|(i, _)| i)
        .collect()
}

/// DBSCAN by explicit epsilon-reachability over a precomputed distance matrix.
///
/// Core points are those with >= min_pts neighbors (self included); clusters
/// are connected components of the core graph, numbered by their smallest core
/// index; border points join the earliest-numbered cluster that has a core
/// neighbor within eps.
pub fn brute_dbscan(dist: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<i64> {
    let n = dist.len();
    assert!(n <= MAX_CLUSTER_ITEMS, "brute_dbscan size cap exceeded");
    let is_core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| dist[i][j] <= eps).count() >= min_pts)
        .collect();
    // connected components of core points via repeated closure
    let mut comp = vec![usize::MAX; n];
    let mut next = 0usize;
    for i in 0..n {
        if !is_core[i] || comp[i] != usize::MAX {
            continue;
        }
        let id = next;
        next += 1;
        let mut stack = vec![i];
        comp[i] = id;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if is_core[v] && comp[v] == usize::MAX && dist[u][v] <= eps {
                    comp[v] = id;
                    stack.push(v);
                }
            }
        }
    }
    let mut labels = vec![-1i64; n];
    for i in 0..n {
        if is_core[i] {
            labels[i] = comp[i] as i64;
        } else {
            let mut best: Option<usize> = None;
            for j in 0..n {
                if is_core[j] && dist[i][j] <= eps {
                    best = Some(match best {
                        None => comp[j],
                        Some(b) => b.min(comp[j]),
                    });
                }
            }
            if let Some(b) = best {
                labels[i] = b as i64;
            }
        }
    }
    labels
}

/// Minimum spanning tree by exhaustive enumeration of all (n-1)-edge subsets.
/// Returns the edges (sorted pairs) and the total weight.
pub fn brute_mst(weights: &[Vec<f64>]) -> (Vec<(usize, usize)>, f64) {
    let n = weights.len();
    assert!(n <= MAX_MST_NODES, "brute_mst size cap exceeded");
    if n <= 1 {
        return (Vec::new(), 0.0);
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    let m = pairs.len();
    let need = n - 1;
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    // iterate bitmask subsets of size n-1
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize != need {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..m)
            .filter(|&b| mask & (1 << b) != 0)
            .map(|b| pairs[b])
            .collect();
        // spanning check by union over adjacency
        let mut reach = vec![false; n];
        reach[0] = true;
        for _ in 0..n {
            for &(a, b) in &chosen {
                if reach[a] || reach[b] {
                    reach[a] = true;
                    reach[b] = true;
                }
            }
        }
        if !reach.iter().all(|&r| r) {
            continue;
        }
        let w: f64 = chosen.iter().map(|&(a, b)| weights[a][b]).sum();
        match &best {
            Some((bw, _)) if *bw <= w => {}
            _ => best = Some((w, chosen)),
        }
    }
    let (w, edges) = best.expect("connected complete graph always has a spanning tree");
    (edges, w)
}

/// Top-k indices by full argsort: descending score, ties by ascending index.
pub fn brute_topk(scores: &[f64], k: usize) -> Vec<usize> {
    assert!(scores.len() <= MAX_EMBEDDINGS, "brute_topk size cap exceeded");
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Nodes within graph distance 2 of any seed, by naive frontier expansion.
pub fn brute_bfs2(n: usize, edges: &[(usize, usize)], seeds: &[usize]) -> Vec<usize> {
    assert!(n <= MAX_EMBEDDINGS, "brute_bfs2 size cap exceeded");
    let mut depth = vec![usize::MAX; n];
    for &s in seeds {
        depth[s] = 0;
    }
    for d in 0..2 {
        let frontier: Vec<usize> = (0..n).filter(|&i| depth[i] == d).collect();
        for u in frontier {
            for &(a, b) in edges {
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if depth[v] == usize::MAX {
                    depth[v] = d + 1;
                }
            }
        }
    }
    (0..n).filter(|&i| depth[i] != usize::MAX).collect()
}

/// Replay of the incremental fusion rule: each detection joins the first group
/// matched by instance ID, else the group with the highest box IoU above
/// kappa (ties to the earliest group), else starts a new group. Returns the
/// partition as lists of detection indices in group-creation order.
pub fn brute_unionfind_fusion(
    detections: &[(u32, Vec<Vec3>)],
    kappa: f64,
) -> Vec<Vec<usize>> {
    assert!(detections.len() <= MAX_CLUSTER_ITEMS, "fusion oracle size cap exceeded");
    let bbox = |pts: &[Vec3]| -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in pts {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    };
    let iou = |a: ([f64; 3], [f64; 3]), b: ([f64; 3], [f64; 3])| -> f64 {
        let mut inter = 1.0;
        for k in 0..3 {
            inter *= (a.1[k].min(b.1[k]) - a.0[k].max(b.0[k])).max(0.0);
        }
        let va: f64 = (0..3).map(|k| (a.1[k] - a.0[k]).max(0.0)).product();
        let vb: f64 = (0..3).map(|k| (b.1[k] - b.0[k]).max(0.0)).product();
        let uni = va + vb - inter;
        if uni <= 0.0 {
            0.0
        } else {
            inter / uni
        }
    };

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (di, (id, pts)) in detections.iter().enumerate() {
        let det_box = bbox(pts);
        let mut target: Option<usize> = None;
        for (gi, g) in groups.iter().enumerate() {
            if g.iter().any(|&m| detections[m].0 == *id) {
                target = Some(gi);
                break;
            }
        }
        if target.is_none() {
            let mut best_iou = kappa;
            for (gi, g) in groups.iter().enumerate() {
                let mut all: Vec<Vec3> = Vec::new();
                for &m in g {
                    all.extend_from_slice(&detections[m].1);
                }
                let v = iou(det_box, bbox(&all));
                if v > best_iou {
                    best_iou = v;
                    target = Some(gi);
                }
            }
        }
        match target {
            Some(gi) => groups[gi].push(di),
            None => groups.push(vec![di]),
        }
    }
    groups
}
