//! The mass measure ‖T‖ of a chain, restricted to balls: weighted quadrature
//! nodes that integrate polynomials of degree ≤ 4 over T⌞B(c, r), and density
//! ratios ‖T‖(B(x, ρ))/(α(m)ρ^m).

use rayon::prelude::*;

use crate::chain::{ball_mass_exact, restrict_ball, Ball, PolyChain, Simplex};
use crate::error::{GmtError, Result};
use crate::linalg;
use crate::quadrature::{degree5, gauss_legendre};

/// Weighted nodes for ‖T‖⌞B(c, r). For m ≤ 2 the ball cut is integrated on
/// the curved pieces directly and `mass_error` is 0; otherwise the pieces
/// straddling the sphere are kept by a barycenter test after bisection to
/// `refine_h` and their mass is reported.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub mass_error: f64,
}

impl BallQuadrature {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }

    /// Vector-valued integral.
    pub fn integrate_vec(&self, k: usize, f: impl Fn(&[f64], &mut [f64])) -> Vec<f64> {
        let mut acc = vec![0.0; k];
        let mut buf = vec![0.0; k];
        for (p, w) in self.points.iter().zip(&self.weights) {
            buf.iter_mut().for_each(|b| *b = 0.0);
            f(p, &mut buf);
            linalg::axpy(&mut acc, *w, &buf);
        }
        acc
    }
}

const SMOOTH_NODES: usize = 24;

/// Quadrature for ‖T‖⌞B(c, r).
pub fn ball_quadrature(t: &PolyChain, c: &[f64], r: f64, refine_h: f64) -> Result<BallQuadrature> {
    if !(r > 0.0) {
        return Err(GmtError::invalid(format!(
            "radius must be positive, got {r}"
        )));
    }
    if c.len() != t.ambient() {
        return Err(GmtError::DimensionMismatch("ball center dimension".into()));
    }
    let m = t.dim();
    if m > 2 {
        let rest = restrict_ball(t, &Ball::new(c.to_vec(), r)?, refine_h)?;
        let mut q = whole_simplices(&rest.chain);
        q.mass_error = rest.mass_error;
        return Ok(q);
    }
    let r2 = r * r;
    let parts: Vec<(Vec<Vec<f64>>, Vec<f64>)> = t
        .terms()
        .par_iter()
        .map(|term| {
            let s = &term.simplex;
            let g = term.coeff.norm();
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            let d2: Vec<f64> = s
                .vertices()
                .map(|v| linalg::norm2(&linalg::sub(v, c)))
                .collect();
            if d2.iter().all(|&d| d <= r2) {
                push_simplex(s, g, &mut pts, &mut wts);
            } else {
                match m {
                    0 => {}
                    1 => segment_in_ball(s, c, r, g, &mut pts, &mut wts),
                    _ => triangle_in_ball(s, c, r, g, &mut pts, &mut wts),
                }
            }
            (pts, wts)
        })
        .collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (p, w) in parts {
        points.extend(p);
        weights.extend(w);
    }
    Ok(BallQuadrature {
        points,
        weights,
        mass_error: 0.0,
    })
}

/// Degree-5 nodes on every simplex of the chain (no truncation).
pub fn whole_simplices(t: &PolyChain) -> BallQuadrature {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for term in t.terms() {
        push_simplex(&term.simplex, term.coeff.norm(), &mut points, &mut weights);
    }
    BallQuadrature {
        points,
        weights,
        mass_error: 0.0,
    }
}

fn push_simplex(s: &Simplex, g: f64, pts: &mut Vec<Vec<f64>>, wts: &mut Vec<f64>) {
    let vol = s.volume() * g;
    if s.dim() == 0 {
        pts.push(s.vertex(0).to_vec());
        wts.push(g);
        return;
    }
    let rule = degree5(s.dim());
    for (b, w) in rule.bary.iter().zip(&rule.weights) {
        pts.push(s.point(b));
        wts.push(w * vol);
    }
}

fn gl01(k: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(k);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

fn segment_in_ball(
    s: &Simplex,
    c: &[f64],
    r: f64,
    g: f64,
    pts: &mut Vec<Vec<f64>>,
    wts: &mut Vec<f64>,
) {
    let a = s.vertex(0);
    let d = linalg::sub(s.vertex(1), a);
    let w = linalg::sub(a, c);
    let qa = linalg::norm2(&d);
    let qb = linalg::dot(&w, &d);
    let qc = linalg::norm2(&w) - r * r;
    let disc = qb * qb - qa * qc;
    if disc <= 0.0 || qa <= 0.0 {
        return;
    }
    let sq = disc.sqrt();
    let t1 = ((-qb - sq) / qa).max(0.0);
    let t2 = ((-qb + sq) / qa).min(1.0);
    if t2 <= t1 {
        return;
    }
    let len = qa.sqrt();
    let (x, wq) = gl01(4);
    for (u, wu) in x.iter().zip(&wq) {
        let t = t1 + (t2 - t1) * u;
        pts.push(linalg::lerp(a, s.vertex(1), t));
        wts.push(g * len * (t2 - t1) * wu);
    }
}

/// Triangle ∩ ball as a signed fan of wedges from the projected center; each
/// wedge {c + t(e(s) − c)} is cut at t = ρ/|e(s) − c|.
fn triangle_in_ball(
    s: &Simplex,
    c: &[f64],
    r: f64,
    g: f64,
    pts: &mut Vec<Vec<f64>>,
    wts: &mut Vec<f64>,
) {
    let v0 = s.vertex(0);
    let basis = linalg::gram_schmidt(&s.edges(), 1e-300);
    if basis.len() < 2 {
        return;
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
        return;
    }
    let rho = rho2.sqrt();
    let embed = |q: [f64; 2]| -> Vec<f64> {
        let mut p = v0.to_vec();
        linalg::axpy(&mut p, q[0], &basis[0]);
        linalg::axpy(&mut p, q[1], &basis[1]);
        p
    };
    let tri = [to2(v0), to2(s.vertex(1)), to2(s.vertex(2))];
    let (tx, tw) = gl01(4);
    let (px, pw) = gl01(4);
    let (sx, sw) = gl01(SMOOTH_NODES);
    for i in 0..3 {
        let p = [tri[i][0] - c2[0], tri[i][1] - c2[1]];
        let q = [tri[(i + 1) % 3][0] - c2[0], tri[(i + 1) % 3][1] - c2[1]];
        let cr = p[0] * q[1] - p[1] * q[0];
        if cr == 0.0 {
            continue;
        }
        let d = [q[0] - p[0], q[1] - p[1]];
        // |p + s d|² = ρ² breakpoints
        let qa = d[0] * d[0] + d[1] * d[1];
        let qb = p[0] * d[0] + p[1] * d[1];
        let qc = p[0] * p[0] + p[1] * p[1] - rho2;
        let mut cuts = vec![0.0, 1.0];
        let disc = qb * qb - qa * qc;
        if disc > 0.0 && qa > 0.0 {
            let sq = disc.sqrt();
            for root in [(-qb - sq) / qa, (-qb + sq) / qa] {
                if root > 0.0 && root < 1.0 {
                    cuts.push(root);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 0..cuts.len() - 1 {
            let (s0, s1) = (cuts[k], cuts[k + 1]);
            if s1 <= s0 {
                continue;
            }
            let sm = 0.5 * (s0 + s1);
            let em = [p[0] + sm * d[0], p[1] + sm * d[1]];
            let inside = em[0] * em[0] + em[1] * em[1] <= rho2;
            let (nodes, nw) = if inside { (&px, &pw) } else { (&sx, &sw) };
            for (u, wu) in nodes.iter().zip(nw) {
                let sv = s0 + (s1 - s0) * u;
                let e = [p[0] + sv * d[0], p[1] + sv * d[1]];
                let tmax = if inside { 1.0 } else { rho / e[0].hypot(e[1]) };
                for (v, wv) in tx.iter().zip(&tw) {
                    let t = tmax * v;
                    pts.push(embed([c2[0] + t * e[0], c2[1] + t * e[1]]));
                    // area element cr·t dt ds; the frame makes the triangle counter-clockwise
                    wts.push(g * cr * t * tmax * wv * (s1 - s0) * wu);
                }
            }
        }
    }
}

/// ‖T‖(B(x, ρ)): exact for m ≤ 2, bisection with error otherwise.
pub fn ball_mass(t: &PolyChain, x: &[f64], rho: f64, refine_h: f64) -> Result<(f64, f64)> {
    if t.dim() <= 2 {
        Ok((ball_mass_exact(t, x, rho)?, 0.0))
    } else {
        let r = restrict_ball(t, &Ball::new(x.to_vec(), rho)?, refine_h)?;
        Ok((r.chain.mass(), r.mass_error))
    }
}

/// ‖T‖(B(x, ρ))/(α(m)ρ^m).
pub fn density_ratio(t: &PolyChain, x: &[f64], rho: f64, refine_h: f64) -> Result<f64> {
    let (mass, _) = ball_mass(t, x, rho, refine_h)?;
    Ok(mass / (crate::unit_ball_volume(t.dim()) * rho.powi(t.dim() as i32)))
}

/// Θ(‖T‖, x) read off the simplices containing x: each contributes ‖g‖ times
/// the fraction of a small sphere about x that it covers. Exact for m ≤ 2;
/// higher dimensions use the ratio at a radius far below the mesh scale.
pub fn point_density(t: &PolyChain, x: &[f64], refine_h: f64) -> Result<f64> {
    let m = t.dim();
    if m > 2 {
        let scale = 1.0 + t.support_radius(x);
        return density_ratio(t, x, 1e-9 * scale, refine_h);
    }
    let mut total = 0.0;
    for term in t.terms() {
        let s = &term.simplex;
        let scale = s.max_edge2().sqrt().max(1e-300);
        let tol = 1e-12;
        let frac = match m {
            0 => (linalg::dist(s.vertex(0), x) <= tol * (1.0 + linalg::norm(x))) as u8 as f64,
            _ => {
                let edges = s.edges();
                let w = linalg::sub(x, s.vertex(0));
                let g = linalg::gram(&edges);
                let rhs: Vec<f64> = edges.iter().map(|e| linalg::dot(e, &w)).collect();
                let Some(lam) = linalg::solve(&g, &rhs) else {
                    continue;
                };
                let mut foot = s.vertex(0).to_vec();
                for (l, e) in lam.iter().zip(&edges) {
                    linalg::axpy(&mut foot, *l, e);
                }
                if linalg::dist(&foot, x) > tol * scale {
                    continue;
                }
                let mut bary = vec![1.0 - lam.iter().sum::<f64>()];
                bary.extend(lam);
                if bary.iter().any(|&b| b < -tol) {
                    continue;
                }
                let zeros = bary.iter().filter(|b| b.abs() <= tol).count();
                match (m, zeros) {
                    (_, 0) => 1.0,
                    (_, 1) => 0.5,
                    (2, 2) => {
                        let i = bary.iter().position(|b| b.abs() > tol).unwrap_or(0);
                        let a = linalg::sub(s.vertex((i + 1) % 3), s.vertex(i));
                        let b = linalg::sub(s.vertex((i + 2) % 3), s.vertex(i));
                        let c = (linalg::dot(&a, &b) / (linalg::norm(&a) * linalg::norm(&b)))
                            .clamp(-1.0, 1.0);
                        c.acos() / (2.0 * std::f64::consts::PI)
                    }
                    _ => 0.0,
                }
            }
        };
        total += frac * term.coeff.norm();
    }
    Ok(total)
}

/// Geometric grid of `k` radii from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k < 2 {
        return vec![hi];
    }
    let q = (hi / lo).ln() / (k - 1) as f64;
    (0..k)
        .map(|i| {
            if i + 1 == k {
                hi
            } else {
                lo * (q * i as f64).exp()
            }
        })
        .collect()
}

/// Density ratios about a center on an increasing radii grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DensityProfile {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Half-width of the error interval on each value.
    pub errors: Vec<f64>,
}

impl DensityProfile {
    /// Sample ‖T‖(B(x, ρ))/(α(m)ρ^m) at each radius (sorted ascending).
    pub fn measure(
        t: &PolyChain,
        x: &[f64],
        radii: &[f64],
        refine_h: f64,
    ) -> Result<DensityProfile> {
        if radii.is_empty() {
            return Err(GmtError::invalid("empty radii grid"));
        }
        let mut radii = radii.to_vec();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if !(radii[0] > 0.0) {
            return Err(GmtError::invalid("radii must be positive"));
        }
        let am = crate::unit_ball_volume(t.dim());
        let m = t.dim() as i32;
        let vals: Result<Vec<(f64, f64)>> = radii
            .par_iter()
            .map(|&rho| {
                let (mass, err) = ball_mass(t, x, rho, refine_h)?;
                let d = am * rho.powi(m);
                Ok((mass / d, err / d))
            })
            .collect();
        let (values, errors) = vals?.into_iter().unzip();
        Ok(DensityProfile {
            center: x.to_vec(),
            radii,
            values,
            errors,
        })
    }

    /// Profile from given values (error-free).
    pub fn from_values(
        center: Vec<f64>,
        radii: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<DensityProfile> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(GmtError::invalid(
                "radii and values must be non-empty and of equal length",
            ));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GmtError::invalid("radii must be strictly increasing"));
        }
        let errors = vec![0.0; radii.len()];
        Ok(DensityProfile {
            center,
            radii,
            values,
            errors,
        })
    }

    /// (exc_*, exc^*, exc) over grid pairs s ≤ t ≤ r: the largest drop and
    /// the largest rise of the ratio between a smaller and a larger radius.
    pub fn excess(&self, r: f64) -> Result<(f64, f64, f64)> {
        let k = self
            .radii
            .iter()
            .take_while(|&&rho| rho <= r * (1.0 + 1e-12))
            .count();
        if k == 0 {
            return Err(GmtError::invalid(format!("no grid radius at or below {r}")));
        }
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        let (mut drop, mut rise) = (0.0f64, 0.0f64);
        for &v in &self.values[..k] {
            hi = hi.max(v);
            lo = lo.min(v);
            drop = drop.max(hi - v);
            rise = rise.max(v - lo);
        }
        Ok((drop, rise, drop.max(rise)))
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().fold(0.0, |a, &b| a.max(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::generate::{flat_disk, tilted};
    use std::f64::consts::PI;

    #[test]
    fn cut_disk_polynomials() {
        // the 512-gon restricted to B(0, 0.5) is a round disk
        let p = flat_disk(512, 3, Coeff::Integer(1)).unwrap();
        let q = ball_quadrature(&p, &[0.0; 3], 0.5, 0.01).unwrap();
        assert!((q.total() - PI * 0.25).abs() < 1e-12);
        let x2 = q.integrate(|y| y[0] * y[0]);
        assert!((x2 - PI * 0.5f64.powi(4) / 4.0).abs() < 1e-13);
        let r4 = q.integrate(|y| (y[0] * y[0] + y[1] * y[1]).powi(2));
        assert!((r4 - PI * 0.5f64.powi(6) / 3.0).abs() < 1e-13);
    }

    #[test]
    fn off_center_cut_mass() {
        let p = tilted(0.2, 64).unwrap();
        let c = [0.3, -0.1, 0.05];
        let q = ball_quadrature(&p, &c, 0.45, 0.01).unwrap();
        let exact = ball_mass_exact(&p, &c, 0.45).unwrap();
        assert!((q.total() - exact).abs() < 1e-12);
    }

    #[test]
    fn segments() {
        let s =
            PolyChain::from_simplices(&[vec![vec![-2.0, 0.0], vec![2.0, 0.0]]], Coeff::Integer(3))
                .unwrap();
        let q = ball_quadrature(&s, &[0.5, 0.0], 1.0, 0.1).unwrap();
        assert!((q.total() - 6.0).abs() < 1e-14);
        assert!((q.integrate(|y| y[0]) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn excess_of_dip() {
        let p = DensityProfile::from_values(
            vec![0.0],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![1.0, 0.9, 1.2, 1.1],
        )
        .unwrap();
        let (lo, hi, both) = p.excess(4.0).unwrap();
        assert!((lo - 0.1).abs() < 1e-15);
        assert!((hi - 0.3).abs() < 1e-15);
        assert_eq!(both, hi);
        assert!((p.excess(2.0).unwrap().1).abs() < 1e-15);
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(1e-3, 1.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[6], 1.0);
        assert!((g[0] - 1e-3).abs() < 1e-18);
    }
}
