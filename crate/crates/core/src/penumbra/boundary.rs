use crate::error::{Result, UmbraError};
use crate::imgcore::ShadowMask;

/// Components whose traced contour is shorter than this are skipped.
pub const MIN_PERIMETER: usize = 8;

/// Half-width, in contour steps, of the chord used to estimate tangents.
const TANGENT_REACH: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub x: usize,
    pub y: usize,
    /// Unit outward normal.
    pub normal: [f64; 2],
    /// 1-based connected-component label.
    pub component: u32,
}

// Clockwise on screen (y grows downward), starting west.
const DIRS: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Traces every shadow component's outer contour and returns points every
/// `spacing` contour pixels, ordered by component and then along the contour.
pub fn extract_boundary(mask: &ShadowMask, spacing: usize) -> Result<Vec<BoundaryPoint>> {
    if mask.is_empty() {
        return Err(UmbraError::NoShadow("mask has no shadow pixels".into()));
    }
    let spacing = spacing.max(1);
    let (labels, count) = mask.components();
    let w = mask.width();
    let mut firsts = vec![usize::MAX; count + 1];
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 && firsts[l as usize] == usize::MAX {
            firsts[l as usize] = i;
        }
    }
    let mut out = Vec::new();
    for label in 1..=count as u32 {
        let start = firsts[label as usize];
        let inside = |x: isize, y: isize| {
            x >= 0
                && y >= 0
                && (x as usize) < w
                && (y as usize) < mask.height()
                && labels[y as usize * w + x as usize] == label
        };
        let contour = trace_contour(((start % w) as isize, (start / w) as isize), &inside);
        if contour.len() < MIN_PERIMETER {
            continue;
        }
        let normals = contour_normals(&contour);
        for k in (0..contour.len()).step_by(spacing) {
            out.push(BoundaryPoint {
                x: contour[k].0 as usize,
                y: contour[k].1 as usize,
                normal: normals[k],
                component: label,
            });
        }
    }
    Ok(out)
}

/// Moore-neighbour tracing with Jacob's stopping criterion. `start` must be
/// the first component pixel in raster order, so its west neighbour is
/// background.
pub fn trace_contour(
    start: (isize, isize),
    inside: &dyn Fn(isize, isize) -> bool,
) -> Vec<(isize, isize)> {
    let mut contour = vec![start];
    let mut current = start;
    // Direction index (into DIRS) from the current pixel to the backtrack pixel.
    let mut back = 0usize;
    let initial_back = back;
    let limit = 4 * 1_000_000;
    for _ in 0..limit {
        let mut moved = false;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let (nx, ny) = (current.0 + DIRS[d].0, current.1 + DIRS[d].1);
            if inside(nx, ny) {
                // New backtrack: the background pixel examined just before,
                // expressed relative to the new current pixel.
                let pd = (back + k - 1) % 8;
                let (bx, by) = (current.0 + DIRS[pd].0, current.1 + DIRS[pd].1);
                current = (nx, ny);
                back = DIRS
                    .iter()
                    .position(|&(dx, dy)| (current.0 + dx, current.1 + dy) == (bx, by))
                    .expect("backtrack pixel is adjacent");
                moved = true;
                break;
            }
        }
        if !moved {
            return contour;
        }
        if current == start && back == initial_back {
            break;
        }
        contour.push(current);
    }
    contour
}

fn contour_normals(contour: &[(isize, isize)]) -> Vec<[f64; 2]> {
    let n = contour.len();
    let twice_area: f64 = (0..n)
        .map(|i| {
            let (a, b) = (contour[i], contour[(i + 1) % n]);
            (a.0 * b.1 - b.0 * a.1) as f64
        })
        .sum();
    let reach = TANGENT_REACH.min(n / 4).max(1);
    (0..n)
        .map(|i| {
            let a = contour[(i + n - reach) % n];
            let b = contour[(i + reach) % n];
            let t = [(b.0 - a.0) as f64, (b.1 - a.1) as f64];
            let len = t[0].hypot(t[1]);
            if len == 0.0 {
                return [0.0, 0.0];
            }
            let t = [t[0] / len, t[1] / len];
            if twice_area > 0.0 {
                [t[1], -t[0]]
            } else {
                [-t[1], t[0]]
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(size: usize, x0: usize, side: usize) -> ShadowMask {
        ShadowMask::from_fn(size, size, |x, y| {
            (x0..x0 + side).contains(&x) && (x0..x0 + side).contains(&y)
        })
    }

    #[test]
    fn square_contour_and_axis_normals() {
        let side = 20;
        let mask = square(40, 10, side);
        let pts = extract_boundary(&mask, 2).unwrap();
        // The traced contour has 4 (side - 1) pixels.
        assert_eq!(pts.len(), 4 * (side - 1) / 2);
        for p in &pts {
            let on_left = p.x == 10;
            let on_right = p.x == 29;
            let on_top = p.y == 10;
            let on_bottom = p.y == 29;
            let corner = (on_left || on_right) && (on_top || on_bottom);
            let near_corner = [10usize, 29].iter().any(|&c| p.x.abs_diff(c) < 3)
                && [10usize, 29].iter().any(|&c| p.y.abs_diff(c) < 3);
            if corner || near_corner {
                continue;
            }
            let want = if on_left {
                [-1.0, 0.0]
            } else if on_right {
                [1.0, 0.0]
            } else if on_top {
                [0.0, -1.0]
            } else {
                [0.0, 1.0]
            };
            assert!(
                (p.normal[0] - want[0]).abs() < 1e-12 && (p.normal[1] - want[1]).abs() < 1e-12,
                "({}, {}) normal {:?}",
                p.x,
                p.y,
                p.normal
            );
        }
    }

    #[test]
    fn disk_normals_point_outward() {
        let (cx, cy, r) = (50.0, 50.0, 30.0);
        let mask = ShadowMask::from_fn(101, 101, |x, y| (x as f64 - cx).hypot(y as f64 - cy) <= r);
        let pts = extract_boundary(&mask, 2).unwrap();
        assert!(pts.len() > 50);
        for p in pts {
            let radial = [p.x as f64 - cx, p.y as f64 - cy];
            let len = radial[0].hypot(radial[1]);
            let cos = (radial[0] * p.normal[0] + radial[1] * p.normal[1]) / len;
            assert!(
                cos > 15f64.to_radians().cos(),
                "({}, {}) normal {:?}",
                p.x,
                p.y,
                p.normal
            );
        }
    }

    #[test]
    fn tiny_components_are_skipped() {
        let mut mask = square(30, 5, 10);
        mask.set(25, 25, true);
        let pts = extract_boundary(&mask, 1).unwrap();
        assert!(pts.iter().all(|p| p.component == 1));
        let mut single = ShadowMask::new(10, 10);
        single.set(4, 4, true);
        assert!(extract_boundary(&single, 2).unwrap().is_empty());
    }

    #[test]
    fn empty_mask_is_an_error() {
        assert!(matches!(
            extract_boundary(&ShadowMask::new(5, 5), 2),
            Err(UmbraError::NoShadow(_))
        ));
    }
}
