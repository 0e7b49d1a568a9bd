//! Planar helpers: polygon areas, convex clipping, exact polygon-disk
//! intersection area.

pub type P2 = [f64; 2];

pub fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot2(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub2(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn angle(u: P2, v: P2) -> f64 {
    cross(u, v).atan2(dot2(u, v))
}

/// Signed area (counter-clockwise positive).
pub fn polygon_area(poly: &[P2]) -> f64 {
    let k = poly.len();
    if k < 3 {
        return 0.0;
    }
    0.5 * (0..k)
        .map(|i| cross(poly[i], poly[(i + 1) % k]))
        .sum::<f64>()
}

/// Signed area of triangle (0, a, b) intersected with the disk of radius r
/// about the origin.
fn wedge_disk_area(a: P2, b: P2, r: f64) -> f64 {
    let r2 = r * r;
    if dot2(a, a) <= r2 && dot2(b, b) <= r2 {
        return 0.5 * cross(a, b);
    }
    let d = sub2(b, a);
    let qa = dot2(d, d);
    if qa < 1e-300 {
        return 0.0;
    }
    let qb = dot2(a, d);
    let qc = dot2(a, a) - r2;
    let disc = qb * qb - qa * qc;
    if disc <= 0.0 {
        return 0.5 * r2 * angle(a, b);
    }
    let s = disc.sqrt();
    let t1 = (-qb - s) / qa;
    let t2 = (-qb + s) / qa;
    if t2 <= 0.0 || t1 >= 1.0 {
        return 0.5 * r2 * angle(a, b);
    }
    let t1 = t1.max(0.0);
    let t2 = t2.min(1.0);
    let p1 = [a[0] + t1 * d[0], a[1] + t1 * d[1]];
    let p2 = [a[0] + t2 * d[0], a[1] + t2 * d[1]];
    0.5 * r2 * angle(a, p1) + 0.5 * cross(p1, p2) + 0.5 * r2 * angle(p2, b)
}

/// Signed area of a simple polygon intersected with the disk B(c, r).
pub fn polygon_disk_area(poly: &[P2], c: P2, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let k = poly.len();
    if k < 3 {
        return 0.0;
    }
    (0..k)
        .map(|i| wedge_disk_area(sub2(poly[i], c), sub2(poly[(i + 1) % k], c), r))
        .sum()
}

/// Clip a convex polygon by the half-plane {p : n·p ≤ off}.
pub fn clip_halfplane(poly: &[P2], n: P2, off: f64) -> Vec<P2> {
    let k = poly.len();
    let mut out = Vec::with_capacity(k + 1);
    for i in 0..k {
        let a = poly[i];
        let b = poly[(i + 1) % k];
        let fa = dot2(n, a) - off;
        let fb = dot2(n, b) - off;
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Intersection of two convex counter-clockwise polygons.
pub fn convex_intersection(p: &[P2], q: &[P2]) -> Vec<P2> {
    let mut out = p.to_vec();
    let k = q.len();
    for i in 0..k {
        if out.len() < 3 {
            return Vec::new();
        }
        let a = q[i];
        let b = q[(i + 1) % k];
        // inside = left of a->b: cross(b-a, p-a) >= 0  <=>  n·p <= n·a with n = (dy, -dx)
        let n = [b[1] - a[1], -(b[0] - a[0])];
        out = clip_halfplane(&out, n, dot2(n, a));
    }
    if out.len() < 3 {
        Vec::new()
    } else {
        out
    }
}

/// Orient a polygon counter-clockwise.
pub fn ccw(mut poly: Vec<P2>) -> Vec<P2> {
    if polygon_area(&poly) < 0.0 {
        poly.reverse();
    }
    poly
}

/// Point in convex counter-clockwise polygon, with tolerance `tol` on the
/// signed edge distances (positive tol grows the polygon).
pub fn in_convex(poly: &[P2], p: P2, tol: f64) -> bool {
    let k = poly.len();
    (0..k).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % k];
        let e = sub2(b, a);
        let l = dot2(e, e).sqrt().max(1e-300);
        cross(e, sub2(p, a)) / l >= -tol
    })
}

/// Distance from a point to a segment.
pub fn point_segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let d = sub2(b, a);
    let l2 = dot2(d, d);
    let t = if l2 > 0.0 {
        (dot2(sub2(p, a), d) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    dot2(sub2(p, q), sub2(p, q)).sqrt()
}

/// Regular `k`-gon inscribed in the circle of radius r, counter-clockwise.
pub fn regular_polygon(k: usize, r: f64) -> Vec<P2> {
    (0..k)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_disk_cases() {
        let sq = vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        // disk inside the square
        assert!((polygon_disk_area(&sq, [0.0, 0.0], 0.5) - PI * 0.25).abs() < 1e-14);
        // square inside the disk
        assert!((polygon_disk_area(&sq, [0.0, 0.0], 2.0) - 4.0).abs() < 1e-14);
        // unit disk inscribed exactly
        assert!((polygon_disk_area(&sq, [0.0, 0.0], 1.0) - PI).abs() < 1e-14);
        // quarter disk at a corner
        assert!((polygon_disk_area(&sq, [1.0, 1.0], 0.5) - PI * 0.25 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn disk_cap_area() {
        // half plane x >= 0.5 as a big square, unit disk: circular segment area
        let sq = vec![[0.5, -2.0], [3.0, -2.0], [3.0, 2.0], [0.5, 2.0]];
        let h: f64 = 0.5;
        let exact = (h).acos() - h * (1.0 - h * h).sqrt();
        assert!((polygon_disk_area(&sq, [0.0, 0.0], 1.0) - exact).abs() < 1e-14);
    }

    #[test]
    fn convex_clip() {
        let a = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let b = vec![[1.0, 1.0], [3.0, 1.0], [3.0, 3.0], [1.0, 3.0]];
        let c = convex_intersection(&a, &b);
        assert!((polygon_area(&c) - 1.0).abs() < 1e-14);
    }
}
