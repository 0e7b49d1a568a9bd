use std::f64::consts::PI;

use super::EpiConfig;
use crate::chain::{PolyChain, Simplex, Term};
use crate::coeff::Coeff;
use crate::error::{GmtError, Result};
use crate::geom::{Layer, LayerDecomposition, OrientedPlane};
use crate::linalg;

/// Unit vector of the base at an angle (m = 2), or ±1 (m = 1, angle 0 or π).
pub fn direction(m: usize, th: f64) -> Vec<f64> {
    if m == 1 {
        vec![if th.cos() >= 0.0 { 1.0 } else { -1.0 }]
    } else {
        vec![th.cos(), th.sin()]
    }
}

/// The angular sector a cone layer occupies over the base.
#[derive(Debug, Clone)]
pub struct Sector {
    pub layer: usize,
    /// Indices into the global angle list, counter-clockwise.
    pub nodes: Vec<usize>,
    /// Ambient far vertices of the simplex, in node order.
    pub far: Vec<Vec<f64>>,
    pub far_base: Vec<Vec<f64>>,
}

/// Angles shared by all layers and the per-layer sectors.
#[derive(Debug, Clone)]
pub struct AngularFrame {
    pub angles: Vec<f64>,
    pub sectors: Vec<Sector>,
}

const ANGLE_MERGE: f64 = 1e-11;

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn nearest(angles: &[f64], a: f64) -> Result<usize> {
    let i = angles.partition_point(|&x| x < a);
    let k = angles.len();
    let cands = [(i + k - 1) % k, i % k];
    let best = *cands
        .iter()
        .min_by(|&&x, &&y| circ_dist(angles[x], a).total_cmp(&circ_dist(angles[y], a)))
        .unwrap();
    if circ_dist(angles[best], a) > 1e-9 {
        return Err(GmtError::invalid(format!(
            "angle {a} missing from the mesh"
        )));
    }
    Ok(best)
}

fn ambient_vertex(p: &PolyChain, l: &Layer, v: &OrientedPlane, base: &[f64]) -> Vec<f64> {
    p.terms()[l.term]
        .simplex
        .vertices()
        .min_by(|a, b| {
            linalg::dist(&v.coords(a), base).total_cmp(&linalg::dist(&v.coords(b), base))
        })
        .unwrap()
        .to_vec()
}

fn origin_corner(l: &Layer, i: usize) -> Result<usize> {
    l.corners
        .iter()
        .position(|c| linalg::norm(c) <= 1e-12)
        .ok_or_else(|| {
            GmtError::hypothesis("cone", format!("layer {i} has no vertex over the origin"))
        })
}

pub fn angular_frame(l: &LayerDecomposition, p: &PolyChain, sub: usize) -> Result<AngularFrame> {
    let v = &l.base;
    match l.dim() {
        1 => {
            let mut sectors = Vec::new();
            for (i, layer) in l.layers.iter().enumerate() {
                let k = origin_corner(layer, i)?;
                let a = layer.corners[1 - k].clone();
                if a[0].abs() <= 0.75 + 1e-9 {
                    return Err(GmtError::GeneralPosition(format!(
                        "layer {i} ends inside the annulus"
                    )));
                }
                sectors.push(Sector {
                    layer: i,
                    nodes: vec![if a[0] > 0.0 { 0 } else { 1 }],
                    far: vec![ambient_vertex(p, layer, v, &a)],
                    far_base: vec![a],
                });
            }
            Ok(AngularFrame {
                angles: vec![0.0, PI],
                sectors,
            })
        }
        2 => {
            let mut raw = Vec::new();
            let mut spans = Vec::new();
            for (i, layer) in l.layers.iter().enumerate() {
                let k = origin_corner(layer, i)?;
                let a = layer.corners[(k + 1) % 3].clone();
                let b = layer.corners[(k + 2) % 3].clone();
                let alpha = a[1].atan2(a[0]).rem_euclid(2.0 * PI);
                let span = (b[1].atan2(b[0]) - a[1].atan2(a[0])).rem_euclid(2.0 * PI);
                if !(span > 0.0 && span < PI) {
                    return Err(GmtError::GeneralPosition(format!(
                        "layer {i} spans an angle of {span}"
                    )));
                }
                let cross = a[0] * b[1] - a[1] * b[0];
                let reach = cross.abs() / linalg::dist(&a, &b);
                if reach <= 0.75 + 1e-9 {
                    return Err(GmtError::GeneralPosition(format!(
                        "layer {i} ends inside the annulus"
                    )));
                }
                for s in 0..=sub {
                    raw.push((alpha + span * s as f64 / sub as f64).rem_euclid(2.0 * PI));
                }
                spans.push((alpha, span, a, b));
            }
            raw.sort_by(f64::total_cmp);
            let mut angles: Vec<f64> = Vec::with_capacity(raw.len());
            for a in raw {
                if angles.last().map_or(true, |&x| a - x > ANGLE_MERGE) {
                    angles.push(a);
                }
            }
            while angles.len() > 1 && circ_dist(angles[0], *angles.last().unwrap()) <= ANGLE_MERGE {
                angles.pop();
            }
            let k = angles.len();
            let mut sectors = Vec::with_capacity(l.layers.len());
            for (i, (alpha, span, a, b)) in spans.into_iter().enumerate() {
                let start = nearest(&angles, alpha)?;
                let end = nearest(&angles, (alpha + span).rem_euclid(2.0 * PI))?;
                let mut nodes = vec![start];
                let mut j = start;
                while j != end {
                    j = (j + 1) % k;
                    nodes.push(j);
                }
                let layer = &l.layers[i];
                sectors.push(Sector {
                    layer: i,
                    nodes,
                    far: vec![
                        ambient_vertex(p, layer, &l.base, &a),
                        ambient_vertex(p, layer, &l.base, &b),
                    ],
                    far_base: vec![a, b],
                });
            }
            Ok(AngularFrame { angles, sectors })
        }
        m => Err(GmtError::Unsupported(format!(
            "angular frame for base dimension {m}"
        ))),
    }
}

/// Pieces of T and S: the shared part, and the two versions of the core.
pub struct Pieces {
    /// Parts of P between the 3/4 ring and the far edges, re-triangulated.
    pub outer: Vec<Term>,
    /// Annulus and the cone of v between the ring and the core.
    pub common: Vec<Term>,
    pub t_core: Vec<Term>,
    pub s_core: Vec<Term>,
    /// Volume of the projected core polygon in W.
    pub core_area: f64,
    /// Mass of P over the base polygon inscribed in the 3/4 ring, which is
    /// what `common` and a core replace.
    pub replaced_mass: f64,
}

/// Simplices oriented so that projection onto the plane preserves orientation.
struct Mesh<'a> {
    plane: &'a OrientedPlane,
    terms: Vec<Term>,
}

impl Mesh<'_> {
    fn push(&mut self, mut vs: Vec<Vec<f64>>, coeff: Coeff) {
        let s = Simplex::new(&vs);
        let det = self.plane.projected_det(&s.edges());
        if det < 0.0 {
            let k = vs.len();
            vs.swap(k - 2, k - 1);
        }
        self.terms.push(Term {
            simplex: Simplex::new(&vs),
            coeff,
        });
    }

    fn quad(&mut self, a: &[f64], b: &[f64], c: &[f64], d: &[f64], coeff: Coeff) {
        self.push(vec![a.to_vec(), b.to_vec(), c.to_vec()], coeff);
        self.push(vec![a.to_vec(), c.to_vec(), d.to_vec()], coeff);
    }
}

/// Point of the quarter-scaled degree-2 graph over W-coordinates u with
/// |u| = s, whose boundary value in that direction is w.
fn core_point(w_plane: &OrientedPlane, u: &[f64], s: f64, w: &[f64], w0: &[f64]) -> Vec<f64> {
    let f = (4.0 * s) * (4.0 * s);
    let mut h = w0.to_vec();
    linalg::axpy(&mut h, f, &linalg::sub(w, w0));
    linalg::add(&w_plane.embed(u), &linalg::scale(&h, 0.25))
}

pub fn assemble(
    l: &LayerDecomposition,
    frame: &AngularFrame,
    vunit: &[Vec<f64>],
    w_plane: &OrientedPlane,
    w0: &[f64],
    cfg: &EpiConfig,
) -> Result<Pieces> {
    let v = &l.base;
    let m = l.dim();
    let n = l.ambient();
    let angles = &frame.angles;
    let g0 = l.g0;
    let origin = vec![0.0; n];
    let base_at = |r: f64, j: usize| linalg::scale(&direction(m, angles[j]), r);
    let vat = |r: f64, j: usize| linalg::scale(&vunit[j], r);
    // ring points of the graph of v at |x| = 1/2
    let q: Vec<Vec<f64>> = (0..angles.len())
        .map(|j| linalg::add(&v.embed(&base_at(0.5, j)), &vat(0.5, j)))
        .collect();
    let rings = cfg.annulus_rings;
    let annulus_point = |layer: &Layer, k: usize, j: usize| -> Vec<f64> {
        if k == 0 {
            return q[j].clone();
        }
        let r = 0.5 + 0.25 * k as f64 / rings as f64;
        let u = base_at(r, j);
        if k == rings {
            return layer.point(v, &u);
        }
        let mut z = linalg::scale(&layer.eval(&u), 4.0 * r - 2.0);
        linalg::axpy(&mut z, 3.0 - 4.0 * r, &vat(r, j));
        linalg::add(&v.embed(&u), &z)
    };

    let mut common = Mesh {
        plane: v,
        terms: Vec::new(),
    };
    let mut outer = Mesh {
        plane: v,
        terms: Vec::new(),
    };
    let mut replaced_mass = 0.0;
    for sec in &frame.sectors {
        let layer = &l.layers[sec.layer];
        let c = layer.coeff;
        let weight = layer.norm * layer.stretch;
        replaced_mass += weight
            * match m {
                1 => 0.75,
                _ => sec
                    .nodes
                    .windows(2)
                    .map(|w| {
                        0.5 * 0.5625 * (angles[w[1]] - angles[w[0]]).rem_euclid(2.0 * PI).sin()
                    })
                    .sum::<f64>(),
            };
        let pts: Vec<Vec<Vec<f64>>> = sec
            .nodes
            .iter()
            .map(|&j| (0..=rings).map(|k| annulus_point(layer, k, j)).collect())
            .collect();
        if m == 1 {
            for k in 0..rings {
                common.push(vec![pts[0][k].clone(), pts[0][k + 1].clone()], c);
            }
            outer.push(vec![pts[0][rings].clone(), sec.far[0].clone()], c);
            continue;
        }
        for a in 0..sec.nodes.len() - 1 {
            for k in 0..rings {
                common.quad(
                    &pts[a][k],
                    &pts[a][k + 1],
                    &pts[a + 1][k + 1],
                    &pts[a + 1][k],
                    c,
                );
            }
        }
        // outer part: between the 3/4 ring and the far edge of the simplex
        let (fa, fb) = (&sec.far_base[0], &sec.far_base[1]);
        let last = sec.nodes.len() - 1;
        let far: Vec<Vec<f64>> = sec
            .nodes
            .iter()
            .enumerate()
            .map(|(a, &j)| {
                if a == 0 {
                    sec.far[0].clone()
                } else if a == last {
                    sec.far[1].clone()
                } else {
                    let e = direction(2, angles[j]);
                    let cross = |x: &[f64], y: &[f64]| x[0] * y[1] - x[1] * y[0];
                    let s = -cross(&e, fa) / cross(&e, &linalg::sub(fb, fa));
                    linalg::lerp(&sec.far[0], &sec.far[1], s)
                }
            })
            .collect();
        for a in 0..last {
            outer.quad(&pts[a][rings], &far[a], &far[a + 1], &pts[a + 1][rings], c);
        }
    }

    // inner cone over the ring, outside the W-core
    let radial: Vec<f64> = q.iter().map(|x| linalg::norm(&w_plane.coords(x))).collect();
    let pcore: Vec<Vec<f64>> = q
        .iter()
        .zip(&radial)
        .map(|(x, r)| linalg::scale(x, 0.25 / r))
        .collect();
    let wvals: Vec<Vec<f64>> = q
        .iter()
        .zip(&radial)
        .map(|(x, r)| linalg::scale(&w_plane.perp(x), 1.0 / r))
        .collect();
    let mut t_core = Mesh {
        plane: v,
        terms: Vec::new(),
    };
    let mut s_core = Mesh {
        plane: v,
        terms: Vec::new(),
    };
    let kc = cfg.core_rings;
    let center = linalg::scale(w0, 0.25);
    let core_area;
    if m == 1 {
        for j in 0..2 {
            common.push(vec![pcore[j].clone(), q[j].clone()], g0);
            t_core.push(vec![origin.clone(), pcore[j].clone()], g0);
            let sign = if j == 0 { 1.0 } else { -1.0 };
            let mut prev = center.clone();
            for k in 1..=kc {
                let s = 0.25 * k as f64 / kc as f64;
                let pt = if k == kc {
                    pcore[j].clone()
                } else {
                    core_point(w_plane, &[sign * s], s, &wvals[j], w0)
                };
                s_core.push(vec![prev, pt.clone()], g0);
                prev = pt;
            }
        }
        core_area = 0.5;
    } else {
        let k = angles.len();
        let phi: Vec<f64> = q
            .iter()
            .map(|x| {
                let c = w_plane.coords(x);
                c[1].atan2(c[0])
            })
            .collect();
        let mut area = 0.0;
        for j in 0..k {
            let jn = (j + 1) % k;
            common.quad(&pcore[j], &q[j], &q[jn], &pcore[jn], g0);
            t_core.push(
                vec![origin.clone(), pcore[j].clone(), pcore[jn].clone()],
                g0,
            );
            area += 0.5 / 16.0 * (phi[jn] - phi[j]).sin();
        }
        core_area = area;
        let ring = |kk: usize, j: usize| -> Vec<f64> {
            if kk == kc {
                return pcore[j].clone();
            }
            let s = 0.25 * kk as f64 / kc as f64;
            core_point(
                w_plane,
                &[s * phi[j].cos(), s * phi[j].sin()],
                s,
                &wvals[j],
                w0,
            )
        };
        let grid: Vec<Vec<Vec<f64>>> = (1..=kc)
            .map(|kk| (0..k).map(|j| ring(kk, j)).collect())
            .collect();
        for j in 0..k {
            let jn = (j + 1) % k;
            s_core.push(
                vec![center.clone(), grid[0][j].clone(), grid[0][jn].clone()],
                g0,
            );
            for kk in 0..kc - 1 {
                s_core.quad(
                    &grid[kk][j],
                    &grid[kk + 1][j],
                    &grid[kk + 1][jn],
                    &grid[kk][jn],
                    g0,
                );
            }
        }
    }
    Ok(Pieces {
        outer: outer.terms,
        common: common.terms,
        t_core: t_core.terms,
        s_core: s_core.terms,
        core_area,
        replaced_mass,
    })
}
