use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GmtError, Result};
use crate::linalg;

/// Oriented m-plane through the origin, given by an orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrientedPlane {
    frame: Vec<Vec<f64>>,
    orientation: i8,
}

impl OrientedPlane {
    /// Frame must be orthonormal within 1e-12.
    pub fn new(frame: Vec<Vec<f64>>, orientation: i8) -> Result<OrientedPlane> {
        if frame.is_empty() {
            return Err(GmtError::invalid("plane needs at least one frame vector"));
        }
        let n = frame[0].len();
        for (i, u) in frame.iter().enumerate() {
            if u.len() != n {
                return Err(GmtError::DimensionMismatch(
                    "frame vectors differ in length".into(),
                ));
            }
            for (j, v) in frame.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (linalg::dot(u, v) - want).abs() > 1e-12 {
                    return Err(GmtError::invalid("frame is not orthonormal"));
                }
            }
        }
        if orientation != 1 && orientation != -1 {
            return Err(GmtError::invalid("orientation must be ±1"));
        }
        Ok(OrientedPlane { frame, orientation })
    }

    /// Orthonormalize a spanning family.
    pub fn from_span(vs: &[Vec<f64>]) -> Result<OrientedPlane> {
        let m = vs.len();
        let frame = linalg::gram_schmidt(vs, 1e-12);
        if frame.len() != m {
            return Err(GmtError::Degenerate(
                "spanning vectors are dependent".into(),
            ));
        }
        Ok(OrientedPlane {
            frame,
            orientation: 1,
        })
    }

    /// span(e_1, ..., e_m) in R^n.
    pub fn coordinate(n: usize, m: usize) -> OrientedPlane {
        OrientedPlane {
            frame: (0..m).map(|i| linalg::unit(n, i)).collect(),
            orientation: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn ambient(&self) -> usize {
        self.frame[0].len()
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    /// Coordinates of π_V(x) in the frame.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|u| linalg::dot(u, x)).collect()
    }

    /// Point of V with the given frame coordinates.
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.ambient()];
        for (c, e) in u.iter().zip(&self.frame) {
            linalg::axpy(&mut p, *c, e);
        }
        p
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.embed(&self.coords(x))
    }

    /// π_{V⊥}(x).
    pub fn perp(&self, x: &[f64]) -> Vec<f64> {
        linalg::sub(x, &self.project(x))
    }

    pub fn projector(&self) -> DMatrix<f64> {
        let n = self.ambient();
        DMatrix::from_fn(n, n, |i, j| self.frame.iter().map(|u| u[i] * u[j]).sum())
    }

    /// Orthonormal basis of V⊥.
    pub fn complement(&self) -> Vec<Vec<f64>> {
        linalg::complement(&self.frame, self.ambient())
    }

    /// Signed m-volume factor of the frame-projected edges; positive when
    /// projection onto the oriented plane preserves the simplex orientation.
    pub fn projected_det(&self, edges: &[Vec<f64>]) -> f64 {
        let m = self.dim();
        let b = DMatrix::from_fn(m, m, |i, j| linalg::dot(&self.frame[i], &edges[j]));
        self.orientation as f64 * linalg::det(&b)
    }
}

/// ‖π_{V1} − π_{V2}‖, the largest |eigenvalue| of the projector difference.
pub fn plane_distance(v1: &OrientedPlane, v2: &OrientedPlane) -> Result<f64> {
    if v1.ambient() != v2.ambient() || v1.dim() != v2.dim() {
        return Err(GmtError::DimensionMismatch(
            "planes differ in dimension".into(),
        ));
    }
    Ok(linalg::sym_op_norm(&(v1.projector() - v2.projector())))
}

/// ‖π_{V2⊥} ∘ π_{V1}‖.
pub fn perp_after_projection_norm(v1: &OrientedPlane, v2: &OrientedPlane) -> f64 {
    let n = v1.ambient();
    let a = (DMatrix::<f64>::identity(n, n) - v2.projector()) * v1.projector();
    a.singular_values()
        .iter()
        .fold(0.0f64, |acc, x| acc.max(*x))
}

/// Best-fit m-plane through x for points within B(x, r): top-m eigenvectors
/// of Σ (p−x)(p−x)ᵀ.
pub fn fit_plane(points: &[Vec<f64>], x: &[f64], r: f64, m: usize) -> Result<OrientedPlane> {
    let n = x.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut count = 0;
    for p in points {
        let d = linalg::sub(p, x);
        if linalg::norm(&d) <= r {
            count += 1;
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] += d[i] * d[j];
                }
            }
        }
    }
    if count < m + 1 {
        return Err(GmtError::Degenerate(format!(
            "only {count} points within radius {r}"
        )));
    }
    let e = linalg::sym_eigen(&a);
    OrientedPlane::new(e.vectors[..m].to_vec(), 1)
}

/// d_H(S ∩ B(x,r), (x+V) ∩ B(x,r)) / r for a finite sample S. The
/// plane-to-set direction is measured on a grid of the plane ball.
pub fn flatness(points: &[Vec<f64>], x: &[f64], r: f64, v: &OrientedPlane, grid: usize) -> f64 {
    let inside: Vec<&Vec<f64>> = points.iter().filter(|p| linalg::dist(p, x) <= r).collect();
    if inside.is_empty() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for p in &inside {
        worst = worst.max(linalg::norm(&v.perp(&linalg::sub(p, x))));
    }
    for u in plane_ball_grid(v.dim(), grid) {
        let q = linalg::add(x, &v.embed(&linalg::scale(&u, r)));
        let d = inside
            .iter()
            .map(|p| linalg::dist(p, &q))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    worst / r
}

/// Grid points of the unit m-ball (m ≤ 2) with about `k` points per axis.
pub fn plane_ball_grid(m: usize, k: usize) -> Vec<Vec<f64>> {
    let k = k.max(2);
    match m {
        1 => (0..=k)
            .map(|i| vec![-1.0 + 2.0 * i as f64 / k as f64])
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..=k {
                for j in 0..=k {
                    let u = vec![
                        -1.0 + 2.0 * i as f64 / k as f64,
                        -1.0 + 2.0 * j as f64 / k as f64,
                    ];
                    if linalg::norm(&u) <= 1.0 {
                        let mut full = vec![0.0; m];
                        full[0] = u[0];
                        full[1] = u[1];
                        out.push(full);
                    }
                }
            }
            // the rim, so boundary points of the plane ball are tested
            for i in 0..(4 * k) {
                let t = 2.0 * std::f64::consts::PI * i as f64 / (4 * k) as f64;
                let mut full = vec![0.0; m];
                full[0] = t.cos();
                full[1] = t.sin();
                out.push(full);
            }
            out
        }
    }
}

/// Outcome of comparing best-fit planes at two scales about one center.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceCheck {
    pub flatness_small: f64,
    pub flatness_large: f64,
    pub measured_distance: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Planes fitted at scales r < R about x, compared against ε(2 + R/r).
/// Errors when a fitted plane is not ε-admissible at its scale.
pub fn plane_coherence_same_center(
    points: &[Vec<f64>],
    x: &[f64],
    r: f64,
    big_r: f64,
    eps: f64,
    m: usize,
) -> Result<CoherenceCheck> {
    if !(0.0 < r && r < big_r) {
        return Err(GmtError::invalid("need 0 < r < R"));
    }
    let vr = fit_plane(points, x, r, m)?;
    let vbig = fit_plane(points, x, big_r, m)?;
    let fr = flatness(points, x, r, &vr, 16);
    let fbig = flatness(points, x, big_r, &vbig, 16);
    if fr > eps || fbig > eps {
        return Err(GmtError::hypothesis(
            "admissible plane",
            format!("fitted flatness {fr:.3e} / {fbig:.3e} exceeds eps {eps:.3e}"),
        ));
    }
    let d = plane_distance(&vr, &vbig)?;
    let bound = eps * (2.0 + big_r / r);
    Ok(CoherenceCheck {
        flatness_small: fr,
        flatness_large: fbig,
        measured_distance: d,
        bound,
        holds: d <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(phi: f64) -> OrientedPlane {
        OrientedPlane::new(vec![vec![phi.cos(), phi.sin()]], 1).unwrap()
    }

    #[test]
    fn line_distances() {
        for &phi in &[0.0, 0.3, 1.0, 2.5] {
            let d = plane_distance(&line(0.0), &line(phi)).unwrap();
            assert!((d - phi.sin().abs()).abs() < 1e-12);
        }
        assert!(
            (plane_distance(&line(0.0), &line(std::f64::consts::FRAC_PI_2)).unwrap() - 1.0).abs()
                < 1e-12
        );
    }

    #[test]
    fn coherence_bound_formula() {
        // a flat sample: distance 0
        let pts: Vec<Vec<f64>> = (0..=200)
            .flat_map(|i| {
                (0..=200).map(move |j| vec![-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0, 0.0])
            })
            .collect();
        let c = plane_coherence_same_center(&pts, &[0.0, 0.0, 0.0], 0.3, 0.9, 0.1, 2).unwrap();
        assert!(c.measured_distance < 1e-12);
        assert!((c.bound - 0.5).abs() < 1e-15);
        assert!(c.holds);
    }
}
