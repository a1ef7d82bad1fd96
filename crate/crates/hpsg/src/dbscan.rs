//! Deterministic DBSCAN over an arbitrary pairwise distance function.
//!
//! Labels are assigned by scanning items in index order and expanding each new
//! cluster breadth-first, so the labeling is a pure function of the input order.

pub const NOISE: i64 = -1;

/// Cluster `n` items with neighborhoods given by `dist`. Returns one label per
/// item; noise is labeled [`NOISE`]. A point is core when it has at least
/// `min_pts` neighbors within `eps`, counting itself.
pub fn dbscan(n: usize, eps: f64, min_pts: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<i64> {
    let neighbors = |i: usize| -> Vec<usize> {
        (0..n).filter(|&j| dist(i, j) <= eps).collect()
    };

    let mut labels = vec![i64::MIN; n]; // MIN = unvisited
    let mut next_cluster = 0i64;
    for i in 0..n {
        if labels[i] != i64::MIN {
            continue;
        }
        let nbrs = neighbors(i);
        if nbrs.len() < min_pts {
            labels[i] = NOISE;
            continue;
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = cluster;
        let mut queue: std::collections::VecDeque<usize> = nbrs.into_iter().collect();
        while let Some(j) = queue.pop_front() {
            if labels[j] == NOISE {
                labels[j] = cluster; // border point claimed by the first cluster reaching it
            }
            if labels[j] != i64::MIN {
                continue;
            }
            labels[j] = cluster;
            let jn = neighbors(j);
            if jn.len() >= min_pts {
                queue.extend(jn);
            }
        }
    }
    labels
}
