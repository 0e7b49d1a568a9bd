use crate::error::{GmtError, Result};
use crate::geom::LayerDecomposition;
use crate::linalg;
use crate::quadrature::{disk_rule, gauss_legendre};

/// Barycentric tolerance used when gathering the layers over a base point.
pub const LAYER_TOL: f64 = 1e-12;

/// ȳ(x) = (Σ_{i∈I_x} ‖g_i‖)⁻¹ Σ_{i∈I_x} ‖g_i‖ y^i(x).
#[derive(Debug, Clone)]
pub struct AveragedGraph<'a> {
    layers: &'a LayerDecomposition,
    bound: Option<f64>,
}

pub fn averaged_graph(l: &LayerDecomposition) -> Result<AveragedGraph<'_>> {
    if l.g0.is_zero() {
        return Err(GmtError::ZeroBaseCoefficient);
    }
    Ok(AveragedGraph {
        layers: l,
        bound: None,
    })
}

impl<'a> AveragedGraph<'a> {
    /// Fail when |ȳ| exceeds `rho` anywhere it is evaluated.
    pub fn with_bound(mut self, rho: f64) -> Self {
        self.bound = Some(rho);
        self
    }

    pub fn decomposition(&self) -> &'a LayerDecomposition {
        self.layers
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let idx = self.layers.layers_at(u, LAYER_TOL);
        if idx.is_empty() {
            return Err(GmtError::InconsistentBase(format!(
                "no layer over base point {u:?}"
            )));
        }
        let mut y = vec![0.0; self.layers.ambient()];
        let mut total = 0.0;
        for i in idx {
            let l = &self.layers.layers[i];
            linalg::axpy(&mut y, l.norm, &l.eval(u));
            total += l.norm;
        }
        let y = linalg::scale(&y, 1.0 / total);
        if let Some(rho) = self.bound {
            let h = linalg::norm(&y);
            if h > rho * (1.0 + 1e-9) {
                return Err(GmtError::hypothesis(
                    "height",
                    format!("|ȳ({u:?})| = {h:.6e} exceeds ρ = {rho:.6e}"),
                ));
            }
        }
        Ok(y)
    }
}

/// v(x) = average of ȳ over B_V(x, ρ|x|), evaluated through 1-homogeneity
/// from the unit sphere of the base.
#[derive(Debug, Clone)]
pub struct MollifiedGraph<'a> {
    avg: AveragedGraph<'a>,
    rho: f64,
    /// Offsets in the unit ball with weights summing to 1.
    nodes: Vec<(Vec<f64>, f64)>,
}

/// `radial × angular` product nodes for m = 2; `radial × angular` Gauss
/// nodes (capped at 64) on the segment for m = 1.
pub fn mollified_graph<'a>(
    avg: AveragedGraph<'a>,
    rho: f64,
    radial: usize,
    angular: usize,
) -> Result<MollifiedGraph<'a>> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(GmtError::invalid(format!(
            "mollifier radius ρ = {rho} outside (0, 1/2)"
        )));
    }
    if radial == 0 || angular == 0 {
        return Err(GmtError::invalid("mollifier needs at least one node"));
    }
    let nodes = match avg.decomposition().dim() {
        1 => {
            let (x, w) = gauss_legendre((radial * angular).min(64));
            x.into_iter()
                .zip(w)
                .map(|(x, w)| (vec![x], 0.5 * w))
                .collect()
        }
        2 => disk_rule(radial, angular)
            .into_iter()
            .map(|(p, w)| (p.to_vec(), w / std::f64::consts::PI))
            .collect(),
        m => {
            return Err(GmtError::Unsupported(format!(
                "mollified graph over a {m}-dimensional base"
            )))
        }
    };
    Ok(MollifiedGraph { avg, rho, nodes })
}

impl<'a> MollifiedGraph<'a> {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn averaged(&self) -> &AveragedGraph<'a> {
        &self.avg
    }

    /// v at a unit vector e of the base.
    pub fn eval_unit(&self, e: &[f64]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.avg.decomposition().ambient()];
        for (p, w) in &self.nodes {
            let z: Vec<f64> = e.iter().zip(p).map(|(a, b)| a + self.rho * b).collect();
            linalg::axpy(&mut v, *w, &self.avg.eval(&z)?);
        }
        Ok(v)
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let r = linalg::norm(u);
        if r == 0.0 {
            return Ok(vec![0.0; self.avg.decomposition().ambient()]);
        }
        let e = linalg::scale(u, 1.0 / r);
        Ok(linalg::scale(&self.eval_unit(&e)?, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{PolyChain, Simplex, Term};
    use crate::coeff::{Coeff, GroupSpec};
    use crate::generate::{cone_harmonic, stacked, tilted};
    use crate::geom::{decompose_layers, LayerOptions, OrientedPlane};

    fn layers(p: &PolyChain) -> LayerDecomposition {
        decompose_layers(
            p,
            &OrientedPlane::coordinate(3, 2),
            &LayerOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_layer_average_is_the_layer() {
        let p = tilted(0.1, 32).unwrap().dilate(3.0);
        let l = layers(&p);
        let a = averaged_graph(&l).unwrap();
        let y = a.eval(&[0.3, -0.2]).unwrap();
        assert!((y[2] - 0.03).abs() < 1e-14);
    }

    #[test]
    fn symmetric_layers_cancel() {
        let p = stacked(16, &[0.05, -0.05], &[1, 1], GroupSpec::Integers)
            .unwrap()
            .dilate(3.0);
        let l = layers(&p);
        let y = averaged_graph(&l).unwrap().eval(&[0.1, 0.2]).unwrap();
        assert!(linalg::norm(&y) < 1e-15);
    }

    #[test]
    fn cantor_weighted_mean() {
        // bit masks 1 and 2 have norms 1/3 and 1/9
        let g = GroupSpec::Cantor { depth: 8 };
        let a = 0.06;
        let big = 3.0;
        let disk = |h: f64, c: Coeff| -> Vec<Term> {
            let ring = crate::planar::regular_polygon(16, big);
            (0..16)
                .map(|i| Term {
                    simplex: Simplex::new(&[
                        vec![0.0, 0.0, h],
                        vec![ring[i][0], ring[i][1], h],
                        vec![ring[(i + 1) % 16][0], ring[(i + 1) % 16][1], h],
                    ]),
                    coeff: c,
                })
                .collect()
        };
        let c1 = g.element(1);
        let c2 = g.element(2);
        assert!((c1.norm() - 1.0 / 3.0).abs() < 1e-15 && (c2.norm() - 1.0 / 9.0).abs() < 1e-15);
        let mut terms = disk(a, c1);
        terms.extend(disk(-a, c2));
        let p = PolyChain::from_terms(3, 2, g, terms).unwrap();
        let l = layers(&p);
        let y = averaged_graph(&l).unwrap().eval(&[0.2, 0.1]).unwrap();
        assert!((y[2] - a / 2.0).abs() < 1e-14, "{}", y[2]);
    }

    #[test]
    fn mollifier_keeps_linear_maps() {
        let p = tilted(0.2, 64).unwrap().dilate(4.0);
        let l = layers(&p);
        let v = mollified_graph(averaged_graph(&l).unwrap(), 0.2, 4, 16).unwrap();
        let x = [0.6, 0.3];
        assert!((v.eval(&x).unwrap()[2] - 0.2 * 0.6).abs() < 1e-13);
    }

    #[test]
    fn mollified_cone_is_close_to_the_cone() {
        let amp = 0.05;
        let rho = 0.1;
        let p = cone_harmonic(2, amp, 256, 2.5).unwrap();
        let l = layers(&p);
        let avg = averaged_graph(&l).unwrap().with_bound(rho);
        let v = mollified_graph(avg, rho, 6, 24).unwrap();
        let mut worst = 0.0f64;
        for j in 0..40 {
            let th = 0.1 + j as f64 * 0.157;
            let e = [th.cos(), th.sin()];
            let d = v.eval_unit(&e).unwrap()[2] - amp * (2.0 * th).cos();
            worst = worst.max(d.abs());
        }
        // Δ(r cos2θ) = −3cos2θ/r, so the ball mean moves by about 3ρ²/8 relative
        assert!(worst < amp * rho * rho, "{worst}");
        assert!(worst > 0.1 * amp * rho * rho, "{worst}");
    }
}
