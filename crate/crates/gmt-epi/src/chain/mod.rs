//! Polyhedral chains: finite sums of oriented simplices with coefficients in
//! a normed group.

mod boundary;
mod clip;
mod cone;
mod slice;

pub use boundary::boundary;
pub use clip::{
    ball_mass_exact, ball_size_exact, restrict, restrict_ball, restrict_halfspace,
    simplex_ball_volume, Ball, HalfSpace, Region, Restricted,
};
pub use cone::{cone, cone_mass_formula, homogeneous_extend, is_cone};
pub use slice::{slice, slice_mass_profile, AffineFunctional};

use std::collections::HashMap;

use crate::coeff::{Coeff, GroupSpec};
use crate::error::{GmtError, Result};
use crate::linalg;

/// Gram determinants below this are treated as degenerate.
pub const DEGENERATE_GRAM: f64 = 1e-20;
/// Snapping grid for vertex identification.
pub const SNAP: f64 = 1e-12;

/// Oriented simplex; the vertex order fixes the orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    n: usize,
    coords: Vec<f64>,
}

impl Simplex {
    pub fn new(vertices: &[Vec<f64>]) -> Simplex {
        assert!(!vertices.is_empty(), "simplex needs at least one vertex");
        let n = vertices[0].len();
        let mut coords = Vec::with_capacity(n * vertices.len());
        for v in vertices {
            assert_eq!(v.len(), n, "vertex dimension mismatch");
            coords.extend_from_slice(v);
        }
        Simplex { n, coords }
    }

    pub fn from_flat(n: usize, coords: Vec<f64>) -> Simplex {
        assert!(n > 0 && coords.len() % n == 0 && !coords.is_empty());
        Simplex { n, coords }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coords.len() / self.n - 1
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.n)
    }

    pub fn vertex_vec(&self) -> Vec<Vec<f64>> {
        self.vertices().map(|v| v.to_vec()).collect()
    }

    pub fn edges(&self) -> Vec<Vec<f64>> {
        let v0 = self.vertex(0);
        (1..=self.dim())
            .map(|i| linalg::sub(self.vertex(i), v0))
            .collect()
    }

    pub fn gram_det(&self) -> f64 {
        linalg::gram_det(&self.edges())
    }

    /// m-dimensional volume.
    pub fn volume(&self) -> f64 {
        self.gram_det().max(0.0).sqrt() / linalg::factorial(self.dim())
    }

    pub fn barycenter(&self) -> Vec<f64> {
        linalg::centroid(self.vertices())
    }

    /// Face opposite vertex `i`, with the vertex order kept.
    pub fn face(&self, i: usize) -> Simplex {
        let mut coords = Vec::with_capacity(self.coords.len() - self.n);
        for (k, v) in self.vertices().enumerate() {
            if k != i {
                coords.extend_from_slice(v);
            }
        }
        Simplex { n: self.n, coords }
    }

    pub fn with_vertex(&self, i: usize, p: &[f64]) -> Simplex {
        let mut s = self.clone();
        s.coords[i * self.n..(i + 1) * self.n].copy_from_slice(p);
        s
    }

    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Simplex {
        let vs: Vec<Vec<f64>> = self.vertices().map(f).collect();
        Simplex::new(&vs)
    }

    /// Point with the given barycentric coordinates.
    pub fn point(&self, bary: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        for (v, &l) in self.vertices().zip(bary) {
            linalg::axpy(&mut p, l, v);
        }
        p
    }

    pub fn max_edge2(&self) -> f64 {
        let k = self.dim() + 1;
        let mut best = 0.0f64;
        for i in 0..k {
            for j in (i + 1)..k {
                best = best.max(linalg::norm2(&linalg::sub(self.vertex(i), self.vertex(j))));
            }
        }
        best
    }

    fn snapped_keys(&self) -> Vec<Vec<i64>> {
        self.vertices().map(snap_key).collect()
    }
}

pub(crate) fn snap_key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x / SNAP).round() as i64).collect()
}

/// One weighted simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub simplex: Simplex,
    pub coeff: Coeff,
}

/// Finite sum Σ g_i ⟦S_i⟧ of oriented m-simplices in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyChain {
    n: usize,
    m: usize,
    group: GroupSpec,
    terms: Vec<Term>,
}

impl PolyChain {
    pub fn zero(n: usize, m: usize, group: GroupSpec) -> PolyChain {
        PolyChain {
            n,
            m,
            group,
            terms: Vec::new(),
        }
    }

    /// Build from terms, checking dimensions and group, then canonicalize.
    pub fn from_terms(n: usize, m: usize, group: GroupSpec, terms: Vec<Term>) -> Result<PolyChain> {
        group.validate()?;
        if m > n {
            return Err(GmtError::DimensionMismatch(format!(
                "dim {m} exceeds ambient {n}"
            )));
        }
        for t in &terms {
            if t.simplex.ambient() != n || t.simplex.dim() != m {
                return Err(GmtError::DimensionMismatch(format!(
                    "simplex of dim {} in R^{}, expected dim {m} in R^{n}",
                    t.simplex.dim(),
                    t.simplex.ambient()
                )));
            }
            if t.coeff.spec() != group {
                return Err(GmtError::GroupMismatch(t.coeff.spec().name(), group.name()));
            }
        }
        Ok(PolyChain { n, m, group, terms }.canonical())
    }

    /// Chain from vertex lists sharing one coefficient.
    pub fn from_simplices(vertex_lists: &[Vec<Vec<f64>>], coeff: Coeff) -> Result<PolyChain> {
        let first = vertex_lists
            .first()
            .ok_or_else(|| GmtError::invalid("from_simplices needs at least one simplex"))?;
        let n = first[0].len();
        let m = first.len() - 1;
        let terms = vertex_lists
            .iter()
            .map(|vs| Term {
                simplex: Simplex::new(vs),
                coeff,
            })
            .collect();
        PolyChain::from_terms(n, m, coeff.spec(), terms)
    }

    /// Assemble without merging. Callers must respect dimensions and group.
    pub(crate) fn raw(n: usize, m: usize, group: GroupSpec, terms: Vec<Term>) -> PolyChain {
        PolyChain { n, m, group, terms }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merge geometrically identical simplices (orientation-aware), drop zero
    /// coefficients and degenerate simplices. Insertion order is kept, and a
    /// merged entry keeps the vertex order of its first occurrence.
    pub fn canonical(self) -> PolyChain {
        let PolyChain { n, m, group, terms } = self;
        let mut index: HashMap<Vec<Vec<i64>>, usize> = HashMap::with_capacity(terms.len());
        let mut out: Vec<(Term, bool)> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.coeff.is_zero() || t.simplex.gram_det() < DEGENERATE_GRAM {
                continue;
            }
            let keys = t.simplex.snapped_keys();
            let (order, odd) = linalg::sort_parity(&keys);
            let sorted: Vec<Vec<i64>> = order.iter().map(|&i| keys[i].clone()).collect();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            match index.get(&sorted) {
                Some(&k) => {
                    let c = if odd != out[k].1 {
                        t.coeff.neg()
                    } else {
                        t.coeff
                    };
                    out[k].0.coeff = out[k].0.coeff.add(&c);
                }
                None => {
                    index.insert(sorted, out.len());
                    out.push((t, odd));
                }
            }
        }
        let terms = out
            .into_iter()
            .map(|(t, _)| t)
            .filter(|t| !t.coeff.is_zero())
            .collect();
        PolyChain { n, m, group, terms }
    }

    /// M(T) = Σ ‖g_i‖ vol(S_i).
    pub fn mass(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm() * t.simplex.volume())
            .sum()
    }

    /// S(T) = Σ vol(S_i) over nonzero terms.
    pub fn size(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| !t.coeff.is_zero())
            .map(|t| t.simplex.volume())
            .sum()
    }

    fn check_compatible(&self, other: &PolyChain) -> Result<()> {
        if self.group != other.group {
            return Err(GmtError::GroupMismatch(
                self.group.name(),
                other.group.name(),
            ));
        }
        if self.n != other.n || self.m != other.m {
            return Err(GmtError::DimensionMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.n, self.m, other.n, other.m
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &PolyChain) -> Result<PolyChain> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(PolyChain::raw(self.n, self.m, self.group, terms).canonical())
    }

    pub fn try_sub(&self, other: &PolyChain) -> Result<PolyChain> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> PolyChain {
        self.map_coeffs(|c| c.neg())
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> PolyChain {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                simplex: t.simplex.clone(),
                coeff: f(&t.coeff),
            })
            .collect();
        PolyChain::raw(self.n, self.m, self.group, terms).canonical()
    }

    /// Apply a vertexwise map into R^k. Degenerate images are dropped.
    pub fn map_vertices(&self, k: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> PolyChain {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                simplex: t.simplex.map(&f),
                coeff: t.coeff,
            })
            .collect();
        PolyChain::raw(k, self.m, self.group, terms).canonical()
    }

    /// Push-forward by x ↦ A x + b, with A given as k rows of length n.
    pub fn pushforward_affine(&self, a: &[Vec<f64>], b: Option<&[f64]>) -> Result<PolyChain> {
        if a.iter().any(|row| row.len() != self.n) {
            return Err(GmtError::DimensionMismatch(
                "matrix columns must equal ambient dimension".into(),
            ));
        }
        let k = a.len();
        if let Some(b) = b {
            if b.len() != k {
                return Err(GmtError::DimensionMismatch(
                    "offset length must equal matrix rows".into(),
                ));
            }
        }
        if self.m > k {
            return Ok(PolyChain::zero(k, self.m, self.group));
        }
        Ok(self.map_vertices(k, |x| {
            a.iter()
                .enumerate()
                .map(|(i, row)| linalg::dot(row, x) + b.map_or(0.0, |b| b[i]))
                .collect()
        }))
    }

    pub fn translate(&self, v: &[f64]) -> PolyChain {
        self.map_vertices(self.n, |x| linalg::add(x, v))
    }

    /// Dilation about the origin.
    pub fn dilate(&self, s: f64) -> PolyChain {
        self.map_vertices(self.n, |x| linalg::scale(x, s))
    }

    /// Same ambient, dimension and group with new terms (not merged).
    pub(crate) fn with_terms(&self, terms: Vec<Term>) -> PolyChain {
        PolyChain::raw(self.n, self.m, self.group, terms)
    }

    /// Distinct support vertices.
    pub fn support_vertices(&self) -> Vec<Vec<f64>> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for t in &self.terms {
            for v in t.simplex.vertices() {
                if seen.insert(snap_key(v)) {
                    out.push(v.to_vec());
                }
            }
        }
        out
    }

    /// Largest |x - c| over the support.
    pub fn support_radius(&self, c: &[f64]) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| {
                t.simplex
                    .vertices()
                    .map(|v| linalg::dist(v, c))
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Vec<Vec<f64>> {
        vec![a.to_vec(), b.to_vec(), c.to_vec()]
    }

    #[test]
    fn right_triangle_mass_and_size() {
        let t = PolyChain::from_simplices(
            &[tri([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])],
            Coeff::Integer(3),
        )
        .unwrap();
        assert!((t.mass() - 1.5).abs() < 1e-15);
        assert!((t.size() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_chain() {
        let t = PolyChain::zero(2, 2, GroupSpec::Integers);
        assert_eq!(t.mass(), 0.0);
        assert_eq!(t.size(), 0.0);
    }

    #[test]
    fn cantor_square() {
        let g = Coeff::from_cantor_digits(&[1, 0, 0]).unwrap();
        let t = PolyChain::from_simplices(
            &[
                tri([0.0, 0.0], [1.0, 0.0], [1.0, 1.0]),
                tri([0.0, 0.0], [1.0, 1.0], [0.0, 1.0]),
            ],
            g,
        )
        .unwrap();
        assert!((t.mass() - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.size() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn merge_respects_orientation() {
        let a = tri([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        let b = tri([1.0, 0.0], [0.0, 0.0], [0.0, 1.0]);
        let t = PolyChain::from_simplices(&[a.clone(), b], Coeff::Integer(1)).unwrap();
        assert!(t.is_empty());
        let t = PolyChain::from_simplices(&[a.clone(), a], Coeff::Integer(1)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.terms()[0].coeff, Coeff::Integer(2));
    }

    #[test]
    fn projection_of_tilted_triangle() {
        let t = PolyChain::from_simplices(
            &[vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.0],
            ]],
            Coeff::Integer(1),
        )
        .unwrap();
        let p = t
            .pushforward_affine(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], None)
            .unwrap();
        assert!((p.mass() - t.mass() / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn vertical_segment_projects_to_nothing() {
        let t =
            PolyChain::from_simplices(&[vec![vec![0.0, 0.0], vec![0.0, 1.0]]], Coeff::Integer(1))
                .unwrap();
        let p = t.pushforward_affine(&[vec![1.0, 0.0]], None).unwrap();
        assert!(p.is_empty());
    }
}
