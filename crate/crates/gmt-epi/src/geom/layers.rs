use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use super::domain::{BaseRegion, Domain};
use super::plane::OrientedPlane;
use crate::chain::{boundary, PolyChain};
use crate::coeff::{Coeff, GroupSpec};
use crate::error::{GmtError, Result};
use crate::linalg;
use crate::planar;

/// One simplex written as the graph of an affine map over the base plane.
#[derive(Debug, Clone)]
pub struct Layer {
    /// Index of the source term in the chain.
    pub term: usize,
    /// Projected vertices in base coordinates, ordered so that the
    /// projection is orientation preserving.
    pub corners: Vec<Vec<f64>>,
    pub domain: Domain,
    inv: DMatrix<f64>,
    /// Columns of the linear part, as vectors of R^n lying in V⊥.
    pub lin: Vec<Vec<f64>>,
    /// Value at base coordinate 0.
    pub offset: Vec<f64>,
    pub coeff: Coeff,
    pub norm: f64,
    /// sqrt(det(I + LᵀL)), the area factor of the graph.
    pub stretch: f64,
}

impl Layer {
    /// Barycentric coordinates of base point u in the projected simplex.
    pub fn bary(&self, u: &[f64]) -> Vec<f64> {
        let m = self.corners.len() - 1;
        let d = linalg::sub(u, &self.corners[0]);
        let mut out = vec![0.0; m + 1];
        let mut s = 0.0;
        for i in 0..m {
            let v: f64 = (0..m).map(|j| self.inv[(i, j)] * d[j]).sum();
            out[i + 1] = v;
            s += v;
        }
        out[0] = 1.0 - s;
        out
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        self.bary(u).iter().all(|&l| l >= -tol)
    }

    /// y(u) ∈ V⊥.
    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.offset.clone();
        for (c, col) in u.iter().zip(&self.lin) {
            linalg::axpy(&mut y, *c, col);
        }
        y
    }

    /// Ambient point over u.
    pub fn point(&self, base: &OrientedPlane, u: &[f64]) -> Vec<f64> {
        linalg::add(&base.embed(u), &self.eval(u))
    }

    /// Squared Hilbert-Schmidt norm of the derivative.
    pub fn derivative_hs2(&self) -> f64 {
        self.lin.iter().map(|c| linalg::norm2(c)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct LayerOptions {
    /// Radius of the base ball on which the constancy of Σ g_i is checked.
    pub check_radius: f64,
    /// Grid points per axis for the constancy check.
    pub grid: usize,
}

impl Default for LayerOptions {
    fn default() -> Self {
        LayerOptions {
            check_radius: 1.0,
            grid: 24,
        }
    }
}

/// A chain in general position over a base plane, as a stack of affine
/// graphs, together with the base coefficient g0 = Σ_{i∈I_x} g_i.
#[derive(Debug, Clone)]
pub struct LayerDecomposition {
    pub base: OrientedPlane,
    pub layers: Vec<Layer>,
    pub g0: Coeff,
    pub group: GroupSpec,
    /// Distance from the base origin to the projected boundary of the chain.
    pub boundary_clearance: f64,
    /// Radius actually used for the constancy check.
    pub check_radius: f64,
    pub nodes_checked: usize,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

/// Nodes closer than this (in barycentric terms) to a layer boundary are
/// treated as non-generic and skipped.
const GENERIC_TOL: f64 = 1e-9;

pub fn decompose_layers(
    p: &PolyChain,
    v: &OrientedPlane,
    opts: &LayerOptions,
) -> Result<LayerDecomposition> {
    let m = v.dim();
    if p.dim() != m || p.ambient() != v.ambient() {
        return Err(GmtError::DimensionMismatch(format!(
            "chain ({}, {}) vs plane ({}, {})",
            p.ambient(),
            p.dim(),
            v.ambient(),
            v.dim()
        )));
    }
    if m == 0 || m > 2 {
        return Err(GmtError::Unsupported(format!(
            "layer decomposition for dimension {m}"
        )));
    }
    let mut layers = Vec::with_capacity(p.len());
    for (k, term) in p.terms().iter().enumerate() {
        layers.push(build_layer(k, term, v)?);
    }
    let clearance = boundary_clearance(p, v)?;
    let check_radius = opts.check_radius.min(clearance * (1.0 - 1e-9));
    if !(check_radius > 0.0) {
        return Err(GmtError::GeneralPosition(
            "projected boundary passes through the base origin".into(),
        ));
    }
    let mut dec = LayerDecomposition {
        base: v.clone(),
        layers,
        g0: p.group().zero(),
        group: p.group(),
        boundary_clearance: clearance,
        check_radius,
        nodes_checked: 0,
        cell: 1.0,
        buckets: HashMap::new(),
    };
    dec.build_index();
    let region = BaseRegion::ball(m, check_radius);
    let g0 = dec.base_coefficient(&region, opts.grid)?;
    if g0.is_zero() {
        return Err(GmtError::ZeroBaseCoefficient);
    }
    dec.g0 = g0;
    dec.nodes_checked = dec.check_constancy(&region, opts.grid)?;
    Ok(dec)
}

fn build_layer(k: usize, term: &crate::chain::Term, v: &OrientedPlane) -> Result<Layer> {
    let m = v.dim();
    let s = &term.simplex;
    let mut us: Vec<Vec<f64>> = s.vertices().map(|x| v.coords(x)).collect();
    let mut ps: Vec<Vec<f64>> = s.vertices().map(|x| v.perp(x)).collect();
    let mut coeff = term.coeff;
    let det = v.projected_det(&s.edges());
    let scale = s.max_edge2().sqrt().powi(m as i32);
    if det.abs() <= 1e-12 * scale {
        return Err(GmtError::GeneralPosition(format!(
            "simplex {k} projects degenerately onto the base plane"
        )));
    }
    if det < 0.0 {
        // same chain, orientation-preserving representative
        us.swap(0, 1);
        ps.swap(0, 1);
        coeff = coeff.neg();
    }
    let b = DMatrix::from_fn(m, m, |i, j| us[j + 1][i] - us[0][i]);
    let inv = b.clone().try_inverse().ok_or_else(|| {
        GmtError::GeneralPosition(format!("simplex {k} has a singular projection"))
    })?;
    let n = v.ambient();
    let lin: Vec<Vec<f64>> = (0..m)
        .map(|c| {
            let mut col = vec![0.0; n];
            for j in 0..m {
                let h = linalg::sub(&ps[j + 1], &ps[0]);
                linalg::axpy(&mut col, inv[(j, c)], &h);
            }
            col
        })
        .collect();
    let mut offset = ps[0].clone();
    for (c, col) in lin.iter().enumerate() {
        linalg::axpy(&mut offset, -us[0][c], col);
    }
    let g = DMatrix::from_fn(m, m, |i, j| {
        linalg::dot(&lin[i], &lin[j]) + if i == j { 1.0 } else { 0.0 }
    });
    let stretch = linalg::det(&g).sqrt();
    Ok(Layer {
        term: k,
        domain: Domain::from_points(&us)?,
        corners: us,
        inv,
        lin,
        offset,
        norm: coeff.norm(),
        coeff,
        stretch,
    })
}

/// Distance from the base origin to π_V(spt ∂P).
pub fn boundary_clearance(p: &PolyChain, v: &OrientedPlane) -> Result<f64> {
    let b = boundary(p)?;
    let mut best = f64::INFINITY;
    for t in b.terms() {
        let d = match t.simplex.dim() {
            0 => linalg::norm(&v.coords(t.simplex.vertex(0))),
            1 => {
                let a = v.coords(t.simplex.vertex(0));
                let c = v.coords(t.simplex.vertex(1));
                if a.len() == 1 {
                    if a[0] * c[0] <= 0.0 {
                        0.0
                    } else {
                        a[0].abs().min(c[0].abs())
                    }
                } else {
                    planar::point_segment_distance([0.0, 0.0], [a[0], a[1]], [c[0], c[1]])
                }
            }
            _ => t
                .simplex
                .vertices()
                .map(|x| linalg::norm(&v.coords(x)))
                .fold(f64::INFINITY, f64::min),
        };
        best = best.min(d);
    }
    Ok(best)
}

impl LayerDecomposition {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn ambient(&self) -> usize {
        self.base.ambient()
    }

    fn cell_of(&self, u: &[f64]) -> Vec<i64> {
        u.iter().map(|x| (x / self.cell).floor() as i64).collect()
    }

    fn build_index(&mut self) {
        let k = self.layers.len().max(1) as f64;
        let mean_vol = self.layers.iter().map(|l| l.domain.volume()).sum::<f64>() / k;
        let widest = self
            .layers
            .iter()
            .map(|l| {
                let (lo, hi) = l.domain.bbox();
                lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        // about four cells per layer, but never more than 2000 along a bbox side
        let side = 0.5 * mean_vol.powf(1.0 / self.dim() as f64);
        self.cell = side.max(widest / 2000.0).max(1e-6);
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, l) in self.layers.iter().enumerate() {
            let (lo, hi) = l.domain.bbox();
            let a = self.cell_of(&lo);
            let b = self.cell_of(&hi);
            let cell = self.cell;
            for_cells(&a, &b, |key| {
                let touches = match &l.domain {
                    Domain::Polygon(poly) => polygon_meets_box(poly, key, cell),
                    Domain::Interval(..) => true,
                };
                if touches {
                    buckets.entry(key.to_vec()).or_default().push(i);
                }
            });
        }
        self.buckets = buckets;
    }

    /// Indices of layers whose projected domain contains u (with tolerance).
    pub fn layers_at(&self, u: &[f64], tol: f64) -> Vec<usize> {
        match self.buckets.get(&self.cell_of(u)) {
            Some(list) => list
                .iter()
                .copied()
                .filter(|&i| self.layers[i].contains(u, tol))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Σ_{i∈I_u} g_i, or `None` when u is within tolerance of a layer boundary.
    pub fn sum_at(&self, u: &[f64]) -> Option<Coeff> {
        let mut acc = self.group.zero();
        if let Some(list) = self.buckets.get(&self.cell_of(u)) {
            for &i in list {
                let b = self.layers[i].bary(u);
                let min = b.iter().cloned().fold(f64::INFINITY, f64::min);
                if min.abs() <= GENERIC_TOL {
                    return None;
                }
                if min > 0.0 {
                    acc = acc.add(&self.layers[i].coeff);
                }
            }
        }
        Some(acc)
    }

    /// Candidate pairs of layers whose projected domains overlap with
    /// positive volume, with the overlap.
    pub fn overlaps(&self) -> Vec<(usize, usize, Domain)> {
        let mut seen = HashSet::new();
        let mut keys: Vec<&Vec<i64>> = self.buckets.keys().collect();
        keys.sort();
        let mut out = Vec::new();
        for key in keys {
            let list = &self.buckets[key];
            for a in 0..list.len() {
                for b in (a + 1)..list.len() {
                    let (i, j) = (list[a].min(list[b]), list[a].max(list[b]));
                    if !seen.insert((i, j)) {
                        continue;
                    }
                    if let Some(d) = self.layers[i].domain.intersect(&self.layers[j].domain) {
                        if d.volume() > 1e-14 {
                            out.push((i, j, d));
                        }
                    }
                }
            }
        }
        out.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        out
    }

    /// Generic test nodes in the region: a shifted grid, projected
    /// barycenters, and centroids of pairwise overlaps.
    pub fn test_nodes(&self, region: &BaseRegion, grid: usize) -> Vec<Vec<f64>> {
        let m = self.dim();
        let (lo, hi) = region.bbox();
        let k = grid.max(2);
        let mut nodes = Vec::new();
        let shift = [0.123_456_789, 0.345_678_912];
        let steps: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) / k as f64)
            .collect();
        if m == 1 {
            for i in 0..k {
                nodes.push(vec![lo[0] + (i as f64 + shift[0]) * steps[0]]);
            }
        } else {
            for i in 0..k {
                for j in 0..k {
                    nodes.push(vec![
                        lo[0] + (i as f64 + shift[0]) * steps[0],
                        lo[1] + (j as f64 + shift[1]) * steps[1],
                    ]);
                }
            }
        }
        for l in &self.layers {
            nodes.push(l.domain.centroid());
        }
        for (_, _, d) in self.overlaps() {
            nodes.push(d.centroid());
        }
        nodes.retain(|u| region.contains(u));
        nodes
    }

    fn base_coefficient(&self, region: &BaseRegion, grid: usize) -> Result<Coeff> {
        for u in self.test_nodes(region, grid) {
            if let Some(g) = self.sum_at(&u) {
                return Ok(g);
            }
        }
        Err(GmtError::GeneralPosition(
            "no generic node in the check region".into(),
        ))
    }

    /// Verify Σ_{i∈I_x} g_i = g0 on the test nodes of the region; returns the
    /// number of nodes checked.
    pub fn check_constancy(&self, region: &BaseRegion, grid: usize) -> Result<usize> {
        let mut count = 0;
        for u in self.test_nodes(region, grid) {
            if let Some(g) = self.sum_at(&u) {
                if g != self.g0 {
                    return Err(GmtError::InconsistentBase(format!(
                        "sum {g} at base point {u:?} differs from g0 = {}",
                        self.g0
                    )));
                }
                count += 1;
            }
        }
        Ok(count)
    }

    /// Lower bound ‖g_i‖ ≥ (3/4)‖g0‖ over all layers.
    pub fn density_lower_bound_holds(&self) -> bool {
        let g = self.g0.norm();
        self.layers.iter().all(|l| l.norm >= 0.75 * g - 1e-15)
    }

    /// Rebuild the chain from the layers (inverse of the decomposition).
    pub fn rebuild(&self) -> Result<PolyChain> {
        let terms = self
            .layers
            .iter()
            .map(|l| crate::chain::Term {
                simplex: crate::chain::Simplex::new(
                    &l.corners
                        .iter()
                        .map(|u| l.point(&self.base, u))
                        .collect::<Vec<_>>(),
                ),
                coeff: l.coeff,
            })
            .collect();
        PolyChain::from_terms(self.ambient(), self.dim(), self.group, terms)
    }
}

/// Separating-axis test between a convex polygon and the closed cell
/// `key`, slightly enlarged.
fn polygon_meets_box(poly: &[planar::P2], key: &[i64], cell: f64) -> bool {
    let pad = 1e-9 * cell.max(1.0);
    let x0 = key[0] as f64 * cell - pad;
    let y0 = key[1] as f64 * cell - pad;
    let x1 = (key[0] + 1) as f64 * cell + pad;
    let y1 = (key[1] + 1) as f64 * cell + pad;
    let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
    let k = poly.len();
    for i in 0..k {
        let a = poly[i];
        let b = poly[(i + 1) % k];
        let nrm = [b[1] - a[1], a[0] - b[0]];
        let proj = |p: &[f64; 2]| nrm[0] * (p[0] - a[0]) + nrm[1] * (p[1] - a[1]);
        let ps: Vec<f64> = poly.iter().map(proj).collect();
        let side_in = ps
            .iter()
            .cloned()
            .fold(0.0, |acc: f64, x| if x.abs() > acc.abs() { x } else { acc });
        // every box corner strictly on the far side of this edge
        if corners.iter().all(|c| proj(c) * side_in < 0.0) && side_in != 0.0 {
            return false;
        }
    }
    true
}

fn for_cells(a: &[i64], b: &[i64], mut f: impl FnMut(&[i64])) {
    let mut cur = a.to_vec();
    loop {
        f(&cur);
        let mut d = 0;
        loop {
            if d == cur.len() {
                return;
            }
            cur[d] += 1;
            if cur[d] <= b[d] {
                break;
            }
            cur[d] = a[d];
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{flat_disk, stacked, tilted};

    #[test]
    fn tilted_single_layer_map() {
        let p = tilted(0.2, 32).unwrap();
        let v = OrientedPlane::coordinate(3, 2);
        let opts = LayerOptions {
            check_radius: 0.9,
            grid: 10,
        };
        let d = decompose_layers(&p, &v, &opts).unwrap();
        assert_eq!(d.g0, Coeff::Integer(1));
        for l in &d.layers {
            assert!((l.lin[0][2] - 0.2).abs() < 1e-12);
            assert!(l.lin[1][2].abs() < 1e-12);
            assert!((l.stretch - (1.04f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn stacked_base_is_sum() {
        let p = stacked(16, &[0.0, 0.1], &[2, 3], GroupSpec::Integers).unwrap();
        let v = OrientedPlane::coordinate(3, 2);
        let d = decompose_layers(&p, &v, &LayerOptions::default()).unwrap();
        assert_eq!(d.g0, Coeff::Integer(5));
        assert!(d.check_radius < 1.0);
    }

    #[test]
    fn cancelling_cantor_layers_are_rejected() {
        let p = stacked(16, &[0.0, 0.1], &[1, 1], GroupSpec::Cantor { depth: 3 }).unwrap();
        let v = OrientedPlane::coordinate(3, 2);
        assert_eq!(
            decompose_layers(&p, &v, &LayerOptions::default()).unwrap_err(),
            GmtError::ZeroBaseCoefficient
        );
    }

    #[test]
    fn vertical_plane_violates_general_position() {
        let p = flat_disk(8, 3, Coeff::Integer(1)).unwrap();
        let v = OrientedPlane::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]], 1).unwrap();
        assert!(matches!(
            decompose_layers(&p, &v, &LayerOptions::default()),
            Err(GmtError::GeneralPosition(_))
        ));
    }

    #[test]
    fn rebuild_round_trip() {
        let p = tilted(0.3, 12).unwrap();
        let v = OrientedPlane::coordinate(3, 2);
        let d = decompose_layers(&p, &v, &LayerOptions::default()).unwrap();
        let q = d.rebuild().unwrap();
        for (a, b) in p.terms().iter().zip(q.terms()) {
            for (x, y) in a.simplex.vertices().zip(b.simplex.vertices()) {
                assert!(linalg::dist(x, y) < 1e-10);
            }
        }
    }
}
