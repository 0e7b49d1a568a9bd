use serde::Serialize;

use super::domain::BaseRegion;
use super::layers::LayerDecomposition;
use super::plane::OrientedPlane;
use crate::chain::{restrict_halfspace, HalfSpace, PolyChain};
use crate::error::{GmtError, Result};
use crate::linalg;

/// Mass and size excess of a layered chain over a base region.
#[derive(Debug, Clone, Serialize)]
pub struct ExcessReport {
    /// M(T⌞π⁻¹B)
    pub mass_in_cylinder: f64,
    /// M(π#(T⌞π⁻¹B)) = ‖g0‖·|B|
    pub projected_mass: f64,
    pub excess: f64,
    /// H^m(spt T ∩ π⁻¹B) − |B|
    pub size_excess: f64,
    pub region_volume: f64,
    pub nodes_checked: usize,
}

/// Exc(T, V, B) = Σ_i ‖g_i‖·|π(S_i) ∩ B|·stretch_i − ‖g0‖·|B|, after
/// re-checking Σ_{i∈I_x} g_i = g0 on generic nodes of B.
pub fn cylindrical_excess(l: &LayerDecomposition, region: &BaseRegion) -> Result<ExcessReport> {
    if region.dim() != l.dim() {
        return Err(GmtError::DimensionMismatch(
            "region and base dimension differ".into(),
        ));
    }
    if region.outer_radius() > l.boundary_clearance {
        return Err(GmtError::GeneralPosition(format!(
            "region reaches radius {:.6} but the projected boundary is at {:.6}",
            region.outer_radius(),
            l.boundary_clearance
        )));
    }
    let nodes_checked = l.check_constancy(region, 24)?;
    let mut mass = 0.0;
    let mut size = 0.0;
    for layer in &l.layers {
        let a = layer.domain.volume_in(region) * layer.stretch;
        mass += layer.norm * a;
        size += a;
    }
    let vol = region.volume();
    let projected = l.g0.norm() * vol;
    Ok(ExcessReport {
        mass_in_cylinder: mass,
        projected_mass: projected,
        excess: mass - projected,
        size_excess: size - vol,
        region_volume: vol,
        nodes_checked,
    })
}

/// Overlap statistics over the base region.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityReport {
    /// H^m(E₂)
    pub e2_measure: f64,
    /// ∫_{E₂} #I_x
    pub e2_count_integral: f64,
    /// ∫_{E₂} Σ_{i∈I_x} ‖g_i‖
    pub e2_norm_integral: f64,
    /// Number of triple overlaps used in the inclusion-exclusion.
    pub triples: usize,
    /// Generic nodes where four or more layers meet (truncation indicator).
    pub quadruple_nodes: usize,
    pub excess: f64,
    pub size_excess: f64,
    pub g0_norm: f64,
    pub eps_mass: f64,
    /// ∫#I ≤ 2·size excess
    pub count_bound: f64,
    pub count_bound_holds: bool,
    /// ∫Σ‖g‖ ≤ 3‖g0‖·max(ε, size excess)
    pub norm_bound: f64,
    pub norm_bound_holds: bool,
    /// size excess ≤ 5ε, asserted only when ‖g_i‖ ≥ (3/4)‖g0‖ for all i
    pub density_bound_holds: bool,
    pub size_bound: Option<f64>,
    pub size_bound_holds: Option<bool>,
    /// E₁ is taken as the complement of the computed overlap region; the
    /// difference is a null set up to this arrangement tolerance.
    pub arrangement_tolerance: f64,
}

impl MultiplicityReport {
    pub fn all_hold(&self) -> bool {
        self.count_bound_holds && self.norm_bound_holds && self.size_bound_holds.unwrap_or(true)
    }
}

/// Pairwise and triple overlaps of projected domains inside the region,
/// combined by inclusion-exclusion truncated at triples.
pub fn multiplicity_stats(
    l: &LayerDecomposition,
    region: &BaseRegion,
    eps_mass: f64,
) -> Result<MultiplicityReport> {
    let exc = cylindrical_excess(l, region)?;
    let g0 = l.g0.norm();
    if exc.excess > g0 * eps_mass * (1.0 + 1e-12) + 1e-15 {
        return Err(GmtError::hypothesis(
            "excess bound",
            format!(
                "Exc = {:.6e} exceeds ‖g0‖ε = {:.6e}",
                exc.excess,
                g0 * eps_mass
            ),
        ));
    }
    let pairs = l.overlaps();
    let mut pair_vol = 0.0;
    let mut pair_count_norm = 0.0;
    let mut triples = 0usize;
    let mut triple_vol = 0.0;
    let mut triple_norm = 0.0;
    for (idx, (i, j, d)) in pairs.iter().enumerate() {
        let a = d.volume_in(region);
        pair_vol += a;
        pair_count_norm += (l.layers[*i].norm + l.layers[*j].norm) * a;
        // triples (i, j, k) with k > j, found among later pairs starting at i
        for (i2, k, _) in &pairs[idx + 1..] {
            if i2 != i || k <= j {
                continue;
            }
            if let Some(t) = d.intersect(&l.layers[*k].domain) {
                let at = t.volume_in(region);
                if at > 0.0 {
                    triples += 1;
                    triple_vol += at;
                    triple_norm += (l.layers[*i].norm + l.layers[*j].norm + l.layers[*k].norm) * at;
                }
            }
        }
    }
    let mut quad = 0;
    for u in l.test_nodes(region, 24) {
        if l.sum_at(&u).is_some() && l.layers_at(&u, 0.0).len() >= 4 {
            quad += 1;
        }
    }
    let e2 = pair_vol - 2.0 * triple_vol;
    let count = 2.0 * pair_vol - 3.0 * triple_vol;
    let norm_int = pair_count_norm - triple_norm;
    let count_bound = 2.0 * exc.size_excess.max(0.0);
    let eps_both = eps_mass.max(exc.size_excess);
    let norm_bound = 3.0 * g0 * eps_both;
    let dens = l.density_lower_bound_holds();
    let slack = 1e-9 * region.volume();
    let (size_bound, size_holds) = if dens {
        (
            Some(5.0 * eps_mass),
            Some(exc.size_excess <= 5.0 * eps_mass + slack),
        )
    } else {
        (None, None)
    };
    Ok(MultiplicityReport {
        e2_measure: e2,
        e2_count_integral: count,
        e2_norm_integral: norm_int,
        triples,
        quadruple_nodes: quad,
        excess: exc.excess,
        size_excess: exc.size_excess,
        g0_norm: g0,
        eps_mass,
        count_bound,
        count_bound_holds: count <= count_bound + slack,
        norm_bound,
        norm_bound_holds: norm_int <= norm_bound + slack,
        density_bound_holds: dens,
        size_bound,
        size_bound_holds: size_holds,
        arrangement_tolerance: 1e-14 * pairs.len() as f64,
    })
}

/// sup |π_{V⊥}(x)| over spt T ∩ Z_V(r). The cylinder is replaced by a
/// circumscribed 512-gon prism (base dimension 2) or a slab (dimension 1),
/// clipped exactly, so the value is an upper bound within a relative 2e-5.
pub fn height_sup(t: &PolyChain, v: &OrientedPlane, radius: f64) -> Result<f64> {
    if t.ambient() != v.ambient() {
        return Err(GmtError::DimensionMismatch(
            "chain and plane ambient differ".into(),
        ));
    }
    let sides = match v.dim() {
        1 => 2,
        2 => 512,
        m => {
            return Err(GmtError::Unsupported(format!(
                "height_sup for base dimension {m}"
            )))
        }
    };
    let mut clipped = t.clone();
    for i in 0..sides {
        let th = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
        let dir = if v.dim() == 1 {
            linalg::scale(&v.frame()[0], if i == 0 { 1.0 } else { -1.0 })
        } else {
            linalg::add(
                &linalg::scale(&v.frame()[0], th.cos()),
                &linalg::scale(&v.frame()[1], th.sin()),
            )
        };
        // keep ⟨dir, x⟩ ≤ radius
        clipped = restrict_halfspace(
            &clipped,
            &HalfSpace::new(linalg::scale(&dir, -1.0), -radius)?,
        );
    }
    Ok(clipped
        .terms()
        .iter()
        .flat_map(|term| {
            term.simplex
                .vertices()
                .map(|x| linalg::norm(&v.perp(x)))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max))
}

/// Convenience: excess over B_V(0, r).
pub fn excess_in_ball(l: &LayerDecomposition, r: f64) -> Result<f64> {
    Ok(cylindrical_excess(l, &BaseRegion::ball(l.dim(), r))?.excess)
}

/// Excess over a convex polygon of the base.
pub fn excess_in_polygon(l: &LayerDecomposition, poly: Vec<crate::planar::P2>) -> Result<f64> {
    Ok(cylindrical_excess(l, &BaseRegion::Polygon(crate::planar::ccw(poly)))?.excess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Coeff, GroupSpec};
    use crate::generate::{cone_harmonic, flat_disk, stacked, tilted};
    use crate::geom::layers::{decompose_layers, LayerOptions};
    use crate::planar::regular_polygon;
    use std::f64::consts::PI;

    #[test]
    fn flat_disk_over_itself() {
        let p = flat_disk(64, 3, Coeff::Integer(1)).unwrap();
        let v = OrientedPlane::coordinate(3, 2);
        let l = decompose_layers(&p, &v, &LayerOptions::default()).unwrap();
        let e = excess_in_polygon(&l, regular_polygon(64, 1.0)).unwrap_err();
        // vertices of the polygon lie on the projected boundary
        assert!(matches!(e, GmtError::GeneralPosition(_)));
        let inner = (PI / 64.0).cos() * 0.999;
        assert!(excess_in_ball(&l, inner).unwrap().abs() < 1e-13);
    }

    #[test]
    fn tilted_graph_excess() {
        let eps = 0.1;
        let p = tilted(eps, 64).unwrap().dilate(2.0);
        let v = OrientedPlane::coordinate(3, 2);
        let l = decompose_layers(&p, &v, &LayerOptions::default()).unwrap();
        let e = excess_in_ball(&l, 1.0).unwrap();
        assert!((e - ((1.0 + eps * eps).sqrt() - 1.0) * PI).abs() < 1e-12);
    }

    #[test]
    fn stacked_layers_multiplicity() {
        // two coefficient-1 layers: E2 is the whole ball
        let p = stacked(32, &[0.0, 0.05], &[1, 1], GroupSpec::Integers)
            .unwrap()
            .dilate(2.0);
        let v = OrientedPlane::coordinate(3, 2);
        let l = decompose_layers(&p, &v, &LayerOptions::default()).unwrap();
        let r = BaseRegion::ball(2, 1.0);
        let rep = multiplicity_stats(&l, &r, 1.0).unwrap();
        assert!((rep.e2_measure - PI).abs() < 1e-10);
        assert!((rep.e2_count_integral - 2.0 * PI).abs() < 1e-10);
        assert!((rep.size_excess - PI).abs() < 1e-10);
        assert!(rep.count_bound_holds);
    }

    #[test]
    fn height_of_harmonic_cone() {
        let p = cone_harmonic(2, 0.1, 128, 2.5).unwrap();
        let v = OrientedPlane::coordinate(3, 2);
        let h = height_sup(&p, &v, 1.0).unwrap();
        assert!((h - 0.1).abs() < 2e-4, "{h}");
    }
}
