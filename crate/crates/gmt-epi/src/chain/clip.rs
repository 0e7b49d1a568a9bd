use rayon::prelude::*;

use super::{snap_key, PolyChain, Simplex, Term};
use crate::error::{GmtError, Result};
use crate::linalg;
use crate::planar;

/// Closed ball B(center, radius).
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Ball> {
        if !(radius > 0.0) {
            return Err(GmtError::invalid(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn origin(n: usize, radius: f64) -> Ball {
        Ball {
            center: vec![0.0; n],
            radius,
        }
    }
}

/// Half-space {x : ⟨normal, x⟩ ≥ offset} with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<HalfSpace> {
        let l = linalg::norm(&normal);
        if !(l > 0.0) {
            return Err(GmtError::invalid("half-space normal must be nonzero"));
        }
        Ok(HalfSpace {
            normal: linalg::scale(&normal, 1.0 / l),
            offset: offset / l,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball(Ball),
    HalfSpace(HalfSpace),
}

/// Restriction result with a bound on |mass(chain) − ‖T‖(region)|.
#[derive(Debug, Clone)]
pub struct Restricted {
    pub chain: PolyChain,
    pub mass_error: f64,
}

pub fn restrict(t: &PolyChain, region: &Region, refine_h: f64) -> Result<Restricted> {
    if !(refine_h > 0.0) {
        return Err(GmtError::invalid(format!(
            "refine_h must be positive, got {refine_h}"
        )));
    }
    match region {
        Region::Ball(b) => restrict_ball(t, b, refine_h),
        Region::HalfSpace(h) => Ok(Restricted {
            chain: restrict_halfspace(t, h),
            mass_error: 0.0,
        }),
    }
}

/// Exact clipping by a half-space.
pub fn restrict_halfspace(t: &PolyChain, h: &HalfSpace) -> PolyChain {
    let terms: Vec<Term> = t
        .terms()
        .par_iter()
        .flat_map_iter(|term| {
            let vals: Vec<f64> = term
                .simplex
                .vertices()
                .map(|v| linalg::dot(&h.normal, v) - h.offset)
                .collect();
            let mut pieces = Vec::new();
            clip_rec(&term.simplex, vals, &mut pieces);
            pieces.into_iter().map(move |s| Term {
                simplex: s,
                coeff: term.coeff,
            })
        })
        .collect();
    t.with_terms(terms).canonical()
}

const CLIP_EPS: f64 = 1e-13;

/// Keep the part of `s` where the affine function with vertex values `vals`
/// is ≥ 0. Splitting the simplex at a point p of edge (i, j) and replacing
/// either endpoint by p keeps the orientation.
pub(crate) fn clip_rec(s: &Simplex, mut vals: Vec<f64>, out: &mut Vec<Simplex>) {
    let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for v in vals.iter_mut() {
        if v.abs() <= CLIP_EPS * scale {
            *v = 0.0;
        }
    }
    let has_neg = vals.iter().any(|&v| v < 0.0);
    let has_pos = vals.iter().any(|&v| v > 0.0);
    if !has_neg {
        out.push(s.clone());
        return;
    }
    if !has_pos {
        return;
    }
    let keys: Vec<Vec<i64>> = s.vertices().map(snap_key).collect();
    let k = vals.len();
    let mut best: Option<(usize, usize)> = None;
    for i in 0..k {
        for j in 0..k {
            if vals[i] < 0.0 && vals[j] > 0.0 {
                let cand = edge_key(&keys, i, j);
                let better = match best {
                    None => true,
                    Some((bi, bj)) => cand < edge_key(&keys, bi, bj),
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
    }
    let (i, j) = best.expect("crossing edge exists");
    // compute the cut from the canonically ordered endpoints so neighbours agree
    let (a, b, fa, fb) = if keys[i] <= keys[j] {
        (s.vertex(i), s.vertex(j), vals[i], vals[j])
    } else {
        (s.vertex(j), s.vertex(i), vals[j], vals[i])
    };
    let tcut = fa / (fa - fb);
    let p = linalg::lerp(a, b, tcut);
    let mut v1 = vals.clone();
    v1[i] = 0.0;
    clip_rec(&s.with_vertex(i, &p), v1, out);
    let mut v2 = vals;
    v2[j] = 0.0;
    clip_rec(&s.with_vertex(j, &p), v2, out);
}

fn edge_key(keys: &[Vec<i64>], i: usize, j: usize) -> (Vec<i64>, Vec<i64>) {
    if keys[i] <= keys[j] {
        (keys[i].clone(), keys[j].clone())
    } else {
        (keys[j].clone(), keys[i].clone())
    }
}

/// Restriction to a ball by longest-edge bisection down to diameter
/// `refine_h`; leaves are kept by a barycenter test. The returned error bound
/// is the mass of leaves that straddle the sphere.
pub fn restrict_ball(t: &PolyChain, ball: &Ball, refine_h: f64) -> Result<Restricted> {
    if !(refine_h > 0.0) {
        return Err(GmtError::invalid(format!(
            "refine_h must be positive, got {refine_h}"
        )));
    }
    if ball.center.len() != t.ambient() {
        return Err(GmtError::DimensionMismatch("ball center dimension".into()));
    }
    let r2 = ball.radius * ball.radius;
    let h2 = refine_h * refine_h;
    let parts: Vec<(Vec<Term>, f64)> = t
        .terms()
        .par_iter()
        .map(|term| {
            let mut kept = Vec::new();
            let mut straddle = 0.0;
            ball_rec(
                &term.simplex,
                &ball.center,
                ball.radius,
                r2,
                h2,
                &mut kept,
                &mut straddle,
                0,
            );
            let norm = term.coeff.norm();
            let terms = kept
                .into_iter()
                .map(|s| Term {
                    simplex: s,
                    coeff: term.coeff,
                })
                .collect();
            (terms, straddle * norm)
        })
        .collect();
    let mut terms = Vec::new();
    let mut err = 0.0;
    for (ts, e) in parts {
        terms.extend(ts);
        err += e;
    }
    Ok(Restricted {
        chain: t.with_terms(terms).canonical(),
        mass_error: err,
    })
}

#[allow(clippy::too_many_arguments)]
fn ball_rec(
    s: &Simplex,
    c: &[f64],
    r: f64,
    r2: f64,
    h2: f64,
    kept: &mut Vec<Simplex>,
    straddle: &mut f64,
    depth: usize,
) {
    let d2: Vec<f64> = s
        .vertices()
        .map(|v| linalg::norm2(&linalg::sub(v, c)))
        .collect();
    if d2.iter().all(|&d| d <= r2 * (1.0 + 1e-12)) {
        kept.push(s.clone());
        return;
    }
    let b = s.barycenter();
    let rb = s
        .vertices()
        .map(|v| linalg::dist(v, &b))
        .fold(0.0, f64::max);
    if linalg::dist(&b, c) > r + rb * (1.0 + 1e-12) {
        return;
    }
    let (i, j, e2) = longest_edge(s);
    if e2 <= h2 || depth > 60 {
        if linalg::norm2(&linalg::sub(&b, c)) <= r2 {
            kept.push(s.clone());
        }
        *straddle += s.volume();
        return;
    }
    let mid = linalg::midpoint(s.vertex(i), s.vertex(j));
    ball_rec(
        &s.with_vertex(j, &mid),
        c,
        r,
        r2,
        h2,
        kept,
        straddle,
        depth + 1,
    );
    ball_rec(
        &s.with_vertex(i, &mid),
        c,
        r,
        r2,
        h2,
        kept,
        straddle,
        depth + 1,
    );
}

/// Longest edge; ties (relative 1e-12) go to the lowest local index pair,
/// which keeps the bisection equivariant under maps that preserve vertex
/// order, such as x ↦ −x.
fn longest_edge(s: &Simplex) -> (usize, usize, f64) {
    let k = s.dim() + 1;
    let mut best = (0, 1, -1.0f64);
    for i in 0..k {
        for j in (i + 1)..k {
            let l = linalg::norm2(&linalg::sub(s.vertex(i), s.vertex(j)));
            if l > best.2 * (1.0 + 1e-12) {
                best = (i, j, l);
            }
        }
    }
    best
}

/// Exact H^m(S ∩ B(c, r)) for a simplex of dimension at most 2.
pub fn simplex_ball_volume(s: &Simplex, c: &[f64], r: f64) -> Result<f64> {
    match s.dim() {
        0 => Ok(if linalg::dist(s.vertex(0), c) <= r {
            1.0
        } else {
            0.0
        }),
        1 => {
            let a = s.vertex(0);
            let d = linalg::sub(s.vertex(1), a);
            let w = linalg::sub(a, c);
            let qa = linalg::norm2(&d);
            let qb = linalg::dot(&w, &d);
            let qc = linalg::norm2(&w) - r * r;
            let disc = qb * qb - qa * qc;
            if disc <= 0.0 || qa <= 0.0 {
                return Ok(0.0);
            }
            let sq = disc.sqrt();
            let t1 = ((-qb - sq) / qa).max(0.0);
            let t2 = ((-qb + sq) / qa).min(1.0);
            Ok((t2 - t1).max(0.0) * qa.sqrt())
        }
        2 => {
            let v0 = s.vertex(0);
            let basis = linalg::gram_schmidt(&s.edges(), 1e-300);
            if basis.len() < 2 {
                return Ok(0.0);
            }
            let to2 = |p: &[f64]| -> [f64; 2] {
                let w = linalg::sub(p, v0);
                [linalg::dot(&w, &basis[0]), linalg::dot(&w, &basis[1])]
            };
            let cw = linalg::sub(c, v0);
            let c2 = to2(c);
            let perp2 = linalg::norm2(&cw) - c2[0] * c2[0] - c2[1] * c2[1];
            let rho2 = r * r - perp2.max(0.0);
            if rho2 <= 0.0 {
                return Ok(0.0);
            }
            let tri = [to2(v0), to2(s.vertex(1)), to2(s.vertex(2))];
            Ok(planar::polygon_disk_area(&tri, c2, rho2.sqrt()).abs())
        }
        m => Err(GmtError::Unsupported(format!(
            "exact ball volume for dimension {m}"
        ))),
    }
}

/// Exact ‖T‖(B(c, r)) for chains of dimension at most 2.
pub fn ball_mass_exact(t: &PolyChain, c: &[f64], r: f64) -> Result<f64> {
    let parts: Result<Vec<f64>> = t
        .terms()
        .par_iter()
        .map(|term| Ok(term.coeff.norm() * simplex_ball_volume(&term.simplex, c, r)?))
        .collect();
    Ok(parts?.iter().sum())
}

/// Exact H^m(spt T ∩ B(c, r)) for chains of dimension at most 2.
pub fn ball_size_exact(t: &PolyChain, c: &[f64], r: f64) -> Result<f64> {
    let parts: Result<Vec<f64>> = t
        .terms()
        .par_iter()
        .map(|term| simplex_ball_volume(&term.simplex, c, r))
        .collect();
    Ok(parts?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::generate::flat_disk;
    use std::f64::consts::PI;

    #[test]
    fn ball_restriction_of_disk() {
        let d = flat_disk(64, 2, Coeff::Integer(1)).unwrap();
        let r = restrict_ball(&d, &Ball::origin(2, 0.5), 1e-2).unwrap();
        assert!((r.chain.mass() - PI / 4.0).abs() < 3e-2);
        assert!(r.mass_error > 0.0 && r.mass_error < 0.1);
        let exact = ball_mass_exact(&d, &[0.0, 0.0], 0.5).unwrap();
        assert!((exact - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn halfspace_restriction_of_disk_is_exact() {
        let d = flat_disk(64, 2, Coeff::Integer(1)).unwrap();
        let h = restrict_halfspace(&d, &HalfSpace::new(vec![1.0, 0.0], 0.0).unwrap());
        let poly = planar::regular_polygon(64, 1.0);
        let half = planar::clip_halfplane(&poly, [-1.0, 0.0], 0.0);
        assert!((h.mass() - planar::polygon_area(&half)).abs() < 1e-13);
        assert!((h.mass() - d.mass() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn containing_ball_keeps_chain() {
        let d = flat_disk(16, 2, Coeff::Integer(1)).unwrap();
        let r = restrict_ball(&d, &Ball::origin(2, 2.0), 1e-2).unwrap();
        assert_eq!(r.chain, d);
        assert_eq!(r.mass_error, 0.0);
    }

    #[test]
    fn clipped_pieces_have_consistent_boundary() {
        let d = flat_disk(12, 2, Coeff::Integer(1)).unwrap();
        let h = restrict_halfspace(&d, &HalfSpace::new(vec![1.0, 0.3], 0.1).unwrap());
        let b = crate::chain::boundary(&h).unwrap();
        assert!(crate::chain::boundary(&b).unwrap().is_empty());
        // boundary length = polygon perimeter on the kept side + chord
        let poly = planar::regular_polygon(12, 1.0);
        let n = [-1.0 / 1.09f64.sqrt(), -0.3 / 1.09f64.sqrt()];
        let kept = planar::clip_halfplane(&poly, n, -0.1 / 1.09f64.sqrt());
        let per: f64 = (0..kept.len())
            .map(|i| {
                let a = kept[i];
                let b = kept[(i + 1) % kept.len()];
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum();
        assert!((b.mass() - per).abs() < 1e-12, "{} vs {}", b.mass(), per);
    }

    #[test]
    fn segment_ball_volume() {
        let s = Simplex::new(&[vec![-2.0, 0.5], vec![2.0, 0.5]]);
        let v = simplex_ball_volume(&s, &[0.0, 0.0], 1.0).unwrap();
        assert!((v - 2.0 * 0.75f64.sqrt()).abs() < 1e-14);
    }
}
