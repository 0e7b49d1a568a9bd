use super::{PolyChain, Simplex, Term};
use crate::error::{GmtError, Result};
use crate::linalg;

/// Cone ⟦vertex⟧⌒T: each face F becomes conv({vertex} ∪ F) with the vertex
/// listed first, so the face opposite the vertex enters ∂ with sign +.
/// Faces whose affine hull contains the vertex are dropped.
pub fn cone(vertex: &[f64], t: &PolyChain) -> Result<PolyChain> {
    if vertex.len() != t.ambient() {
        return Err(GmtError::DimensionMismatch("cone vertex dimension".into()));
    }
    if t.dim() + 1 > t.ambient() {
        return Err(GmtError::DimensionMismatch(
            "cone dimension exceeds ambient".into(),
        ));
    }
    let terms = t
        .terms()
        .iter()
        .map(|term| {
            let mut vs = vec![vertex.to_vec()];
            vs.extend(term.simplex.vertices().map(|v| v.to_vec()));
            Term {
                simplex: Simplex::new(&vs),
                coeff: term.coeff,
            }
        })
        .collect();
    Ok(PolyChain::raw(t.ambient(), t.dim() + 1, t.group(), terms).canonical())
}

/// Σ ‖g‖ · dist(vertex, aff F) · vol(F) / m, the mass the cone must have.
pub fn cone_mass_formula(vertex: &[f64], t: &PolyChain) -> f64 {
    let m = (t.dim() + 1) as f64;
    t.terms()
        .iter()
        .map(|term| {
            let s = &term.simplex;
            let basis = linalg::gram_schmidt(&s.edges(), 1e-300);
            let mut w = linalg::sub(vertex, s.vertex(0));
            for u in &basis {
                let c = linalg::dot(&w, u);
                linalg::axpy(&mut w, -c, u);
            }
            term.coeff.norm() * linalg::norm(&w) * s.volume() / m
        })
        .sum()
}

/// η_{s#}T: scale all vertices by `s` about the origin.
pub fn homogeneous_extend(t: &PolyChain, s: f64) -> Result<PolyChain> {
    if !(s > 0.0) {
        return Err(GmtError::invalid(format!(
            "scale must be positive, got {s}"
        )));
    }
    Ok(t.dilate(s))
}

/// Every simplex has a vertex within `tol` of the origin.
pub fn is_cone(t: &PolyChain, tol: f64) -> bool {
    t.terms()
        .iter()
        .all(|term| term.simplex.vertices().any(|v| linalg::norm(v) <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::boundary;
    use crate::coeff::Coeff;
    use crate::generate::flat_disk;

    #[test]
    fn cone_over_segment() {
        let f =
            PolyChain::from_simplices(&[vec![vec![1.0, 0.0], vec![0.0, 1.0]]], Coeff::Integer(1))
                .unwrap();
        let c = cone(&[0.0, 0.0], &f).unwrap();
        assert!((c.mass() - 0.5).abs() < 1e-15);
        assert!((cone_mass_formula(&[0.0, 0.0], &f) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cone_boundary_recovers_loop() {
        let d = flat_disk(16, 2, Coeff::Integer(1)).unwrap();
        let loop_ = boundary(&d).unwrap();
        let c = cone(&[0.0, 0.0], &loop_).unwrap();
        let back = boundary(&c).unwrap();
        assert!(back.try_sub(&loop_).unwrap().is_empty());
    }

    #[test]
    fn homogeneity_and_cone_test() {
        let d = flat_disk(16, 2, Coeff::Integer(1)).unwrap();
        let big = homogeneous_extend(&d, 2.0).unwrap();
        assert!((big.mass() - 4.0 * d.mass()).abs() < 1e-13);
        assert!(is_cone(&d, 1e-12));
        assert!(!is_cone(&d.translate(&[1.0, 0.0]), 1e-12));
    }

    #[test]
    fn cone_of_zero_is_zero() {
        let z = PolyChain::zero(2, 1, crate::coeff::GroupSpec::Integers);
        assert!(cone(&[0.0, 0.0], &z).unwrap().is_empty());
    }
}
