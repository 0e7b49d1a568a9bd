//! Convex pieces of a base plane of dimension 1 or 2: intervals and convex
//! polygons, with exact intersections against each other and against balls.

use crate::error::{GmtError, Result};
use crate::planar::{self, P2};

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    Polygon(Vec<P2>),
}

impl Domain {
    /// Convex hull of a projected simplex (m+1 points in base coordinates).
    pub fn from_points(pts: &[Vec<f64>]) -> Result<Domain> {
        match pts[0].len() {
            1 => {
                let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                Ok(Domain::Interval(lo, hi))
            }
            2 => Ok(Domain::Polygon(planar::ccw(
                pts.iter().map(|p| [p[0], p[1]]).collect(),
            ))),
            m => Err(GmtError::Unsupported(format!(
                "exact base geometry for dimension {m}"
            ))),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::Interval(a, b) => (b - a).max(0.0),
            Domain::Polygon(p) => planar::polygon_area(p).abs(),
        }
    }

    pub fn intersect(&self, other: &Domain) -> Option<Domain> {
        match (self, other) {
            (Domain::Interval(a, b), Domain::Interval(c, d)) => {
                let lo = a.max(*c);
                let hi = b.min(*d);
                (hi > lo).then_some(Domain::Interval(lo, hi))
            }
            (Domain::Polygon(p), Domain::Polygon(q)) => {
                let r = planar::convex_intersection(p, q);
                (r.len() >= 3 && planar::polygon_area(&r).abs() > 0.0).then_some(Domain::Polygon(r))
            }
            _ => None,
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        match self {
            Domain::Interval(a, b) => vec![0.5 * (a + b)],
            Domain::Polygon(p) => {
                let a = planar::polygon_area(p);
                if a.abs() < 1e-300 {
                    let k = p.len() as f64;
                    return vec![
                        p.iter().map(|q| q[0]).sum::<f64>() / k,
                        p.iter().map(|q| q[1]).sum::<f64>() / k,
                    ];
                }
                let (mut cx, mut cy) = (0.0, 0.0);
                for i in 0..p.len() {
                    let s = p[i];
                    let t = p[(i + 1) % p.len()];
                    let c = planar::cross(s, t);
                    cx += (s[0] + t[0]) * c;
                    cy += (s[1] + t[1]) * c;
                }
                vec![cx / (6.0 * a), cy / (6.0 * a)]
            }
        }
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval(a, b) => (vec![*a], vec![*b]),
            Domain::Polygon(p) => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for q in p {
                    for k in 0..2 {
                        lo[k] = lo[k].min(q[k]);
                        hi[k] = hi[k].max(q[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Exact volume of the intersection with a base region.
    pub fn volume_in(&self, region: &BaseRegion) -> f64 {
        match (self, region) {
            (Domain::Interval(a, b), BaseRegion::Ball { center, radius }) => {
                let lo = a.max(center[0] - radius);
                let hi = b.min(center[0] + radius);
                (hi - lo).max(0.0)
            }
            (Domain::Polygon(p), BaseRegion::Ball { center, radius }) => {
                planar::polygon_disk_area(p, [center[0], center[1]], *radius).abs()
            }
            (Domain::Polygon(p), BaseRegion::Polygon(q)) => {
                planar::polygon_area(&planar::convex_intersection(p, q)).abs()
            }
            _ => 0.0,
        }
    }
}

/// Region of the base plane over which excess is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseRegion {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Convex polygon (base dimension 2), counter-clockwise.
    Polygon(Vec<P2>),
}

impl BaseRegion {
    pub fn ball(m: usize, radius: f64) -> BaseRegion {
        BaseRegion::Ball {
            center: vec![0.0; m],
            radius,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            BaseRegion::Ball { center, radius } => {
                crate::unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
            BaseRegion::Polygon(p) => planar::polygon_area(p).abs(),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        match self {
            BaseRegion::Ball { center, radius } => crate::linalg::dist(u, center) <= *radius,
            BaseRegion::Polygon(p) => planar::in_convex(p, [u[0], u[1]], 0.0),
        }
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            BaseRegion::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            BaseRegion::Polygon(p) => Domain::Polygon(p.clone()).bbox(),
        }
    }

    /// Largest distance from the origin to a point of the region.
    pub fn outer_radius(&self) -> f64 {
        match self {
            BaseRegion::Ball { center, radius } => crate::linalg::norm(center) + radius,
            BaseRegion::Polygon(p) => p.iter().map(|q| q[0].hypot(q[1])).fold(0.0, f64::max),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseRegion::Ball { center, .. } => center.len(),
            BaseRegion::Polygon(_) => 2,
        }
    }
}
