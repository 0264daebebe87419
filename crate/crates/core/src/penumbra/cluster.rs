//! DBSCAN and flat-kernel mean-shift over small 3-D feature sets.

/// Cluster id per point, `None` for noise. Clusters are numbered in the order
/// they are discovered when scanning points by index; a border point belongs
/// to the first cluster that reaches it.
pub fn dbscan(points: &[[f64; 3]], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| dist(points[i], points[j]) <= eps)
                .collect()
        })
        .collect();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next = 0;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        if neighbors[i].len() < min_pts {
            continue;
        }
        let cluster = next;
        next += 1;
        labels[i] = Some(cluster);
        let mut queue: Vec<usize> = neighbors[i].clone();
        let mut head = 0;
        while head < queue.len() {
            let j = queue[head];
            head += 1;
            if labels[j].is_none() {
                labels[j] = Some(cluster);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if neighbors[j].len() >= min_pts {
                queue.extend(&neighbors[j]);
            }
        }
    }
    labels
}

/// Mean-shift with a flat kernel of radius `bandwidth`. Each point climbs to
/// a mode; modes closer than half a bandwidth to an earlier mode merge into
/// it. Returns the sub-group index of each point, numbered by first
/// appearance.
pub fn mean_shift(points: &[[f64; 3]], bandwidth: f64) -> Vec<usize> {
    const MAX_ITER: usize = 300;
    let tol = 1e-6 * bandwidth;
    let mut modes: Vec<[f64; 3]> = Vec::new();
    let mut labels = Vec::with_capacity(points.len());
    for &seed in points {
        let mut m = seed;
        for _ in 0..MAX_ITER {
            let mut acc = [0.0; 3];
            let mut count = 0usize;
            for &p in points {
                if dist(p, m) <= bandwidth {
                    for c in 0..3 {
                        acc[c] += p[c];
                    }
                    count += 1;
                }
            }
            let next = acc.map(|v| v / count as f64);
            let shift = dist(next, m);
            m = next;
            if shift < tol {
                break;
            }
        }
        let label = match modes.iter().position(|&q| dist(q, m) < bandwidth / 2.0) {
            Some(k) => k,
            None => {
                modes.push(m);
                modes.len() - 1
            }
        };
        labels.push(label);
    }
    labels
}

#[inline]
pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbscan_separates_blobs_and_noise() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push([0.0 + 0.01 * i as f64, 0.0, 0.0]);
        }
        for i in 0..4 {
            pts.push([1.0 + 0.01 * i as f64, 1.0, 0.0]);
        }
        pts.push([5.0, 5.0, 5.0]);
        let labels = dbscan(&pts, 0.05, 3);
        assert!(labels[..5].iter().all(|&l| l == Some(0)));
        assert!(labels[5..9].iter().all(|&l| l == Some(1)));
        assert_eq!(labels[9], None);
    }

    #[test]
    fn mean_shift_finds_two_modes() {
        let pts: Vec<[f64; 3]> = (0..6)
            .map(|i| {
                if i < 3 {
                    [0.0, 0.01 * i as f64, 0.0]
                } else {
                    [0.5, 0.01 * i as f64, 0.0]
                }
            })
            .collect();
        assert_eq!(mean_shift(&pts, 0.1), vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(mean_shift(&pts, 2.0), vec![0; 6]);
    }

    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }

    proptest::proptest! {
        #[test]
        fn dbscan_matches_union_find_oracle(
            pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 3..40),
            eps in 0.05f64..0.4,
        ) {
            let pts: Vec<[f64; 3]> = pts.into_iter().map(|(a, b, c)| [a, b, c]).collect();
            let n = pts.len();
            let labels = dbscan(&pts, eps, 3);
            let core: Vec<bool> = (0..n)
                .map(|i| (0..n).filter(|&j| dist(pts[i], pts[j]) <= eps).count() >= 3)
                .collect();
            let mut parent: Vec<usize> = (0..n).collect();
            for i in 0..n {
                for j in 0..n {
                    if core[i] && core[j] && dist(pts[i], pts[j]) <= eps {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a] = b;
                    }
                }
            }
            for i in 0..n {
                let near_core = (0..n).any(|j| core[j] && dist(pts[i], pts[j]) <= eps);
                proptest::prop_assert_eq!(labels[i].is_some(), near_core);
                for j in 0..n {
                    if core[i] && core[j] {
                        let same = find(&mut parent, i) == find(&mut parent, j);
                        proptest::prop_assert_eq!(labels[i] == labels[j], same);
                    }
                }
            }
        }
    }
}
