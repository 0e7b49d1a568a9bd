//! Second-moment analysis of the mass measure in a ball: the quadratic form
//! Q and its top eigenspace, the expansion V = P₀ + … + P₄, the first moment
//! b, flatness numbers β₂ and β∞, and the moment inequalities built on them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::PolyChain;
use crate::error::{GmtError, Result};
use crate::geom::OrientedPlane;
use crate::linalg;
use crate::measure::{
    ball_quadrature, geometric_grid, point_density, BallQuadrature, DensityProfile,
};
use crate::unit_ball_volume;

/// ν(m) = α(m)/(m+2).
pub fn nu(m: usize) -> f64 {
    unit_ball_volume(m) / (m as f64 + 2.0)
}

/// ω(m,q) = ∫_{B^m} (1 − |y|²)^q = α(m)·q!·Γ(m/2+1)/Γ(m/2+q+1).
pub fn omega(m: usize, q: u32) -> f64 {
    let mut v = unit_ball_volume(m);
    for j in 1..=q {
        v *= j as f64 / (m as f64 / 2.0 + j as f64);
    }
    v
}

/// Quadratic form y ↦ (m+2)/(α(m)r^{m+2}) ∫_{B(x,r)} ⟨z−x, y⟩² d‖T‖(z).
#[derive(Debug, Clone, Serialize)]
pub struct SymForm {
    /// Normalized matrix.
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: DMatrix<f64>,
    /// ∫⟨z−x, ·⟩² without the normalization.
    #[serde(skip)]
    pub raw: DMatrix<f64>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub dim: usize,
    /// ν(m)·r^{m+2}
    pub normalization: f64,
    /// Bound on the entries' error from the ball truncation (normalized).
    pub error: f64,
}

fn ser_matrix<S: serde::Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl SymForm {
    pub fn eval(&self, y: &[f64]) -> f64 {
        let n = y.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += y[i] * self.matrix[(i, j)] * y[j];
            }
        }
        s
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eigen(&self) -> linalg::SymEigen {
        linalg::sym_eigen(&self.matrix)
    }
}

pub fn quad_form(t: &PolyChain, x: &[f64], r: f64, refine_h: f64) -> Result<SymForm> {
    let q = ball_quadrature(t, x, r, refine_h)?;
    Ok(form_from(&q, x, r, t.dim()))
}

fn form_from(q: &BallQuadrature, x: &[f64], r: f64, m: usize) -> SymForm {
    let n = x.len();
    let mut raw = DMatrix::<f64>::zeros(n, n);
    for (p, w) in q.points.iter().zip(&q.weights) {
        let d = linalg::sub(p, x);
        for i in 0..n {
            for j in i..n {
                raw[(i, j)] += w * d[i] * d[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            raw[(i, j)] = raw[(j, i)];
        }
    }
    let norm = nu(m) * r.powi(m as i32 + 2);
    SymForm {
        matrix: &raw / norm,
        raw,
        center: x.to_vec(),
        radius: r,
        dim: m,
        normalization: norm,
        error: q.mass_error * r * r / norm,
    }
}

/// Plane spanned by the top-m eigenvectors of a form.
#[derive(Debug, Clone, Serialize)]
pub struct PlaneSelection {
    pub plane: OrientedPlane,
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
}

pub const EIGEN_GAP_TOL: f64 = 1e-10;

pub fn select_plane(q: &SymForm, m: usize) -> Result<PlaneSelection> {
    let n = q.matrix.nrows();
    if m == 0 || m > n {
        return Err(GmtError::invalid(format!(
            "cannot select a {m}-plane in dimension {n}"
        )));
    }
    let e = q.eigen();
    let gap = if m < n {
        e.values[m - 1] - e.values[m]
    } else {
        f64::INFINITY
    };
    if gap < EIGEN_GAP_TOL {
        return Err(GmtError::AmbiguousPlane {
            gap,
            tol: EIGEN_GAP_TOL,
        });
    }
    // Jacobi vectors are orthonormal to round-off; re-orthonormalize before
    // the strict frame check.
    let frame = linalg::gram_schmidt(&e.vectors[..m], 1e-12);
    Ok(PlaneSelection {
        plane: OrientedPlane::new(frame, 1)?,
        eigenvalues: e.values,
        gap,
    })
}

/// All moments of ‖T‖ about B(0, r) at the point x.
#[derive(Debug, Clone, Serialize)]
pub struct MomentsRecord {
    pub x: Vec<f64>,
    pub r: f64,
    pub dim: usize,
    pub v: f64,
    pub v_hat: f64,
    pub p: [f64; 5],
    /// P_k/(ν(m)r^{m+2})
    pub p_normalized: [f64; 5],
    pub v_normalized: f64,
    pub b: Vec<f64>,
    pub b_normalized: Vec<f64>,
    pub trace_q: f64,
    pub mass: f64,
    /// dev(φ, x, 0, r) = (φ(B(x,r)) − φ(B(0,r)))/r^m
    pub dev: f64,
    /// |V − ΣP_k|/max(|V|, tiny)
    pub identity_residual: f64,
    /// Interval half-width on every unnormalized moment from the truncation.
    pub error: f64,
}

pub fn moments_all(t: &PolyChain, x: &[f64], r: f64, refine_h: f64) -> Result<MomentsRecord> {
    if x.len() != t.ambient() {
        return Err(GmtError::DimensionMismatch("moment point dimension".into()));
    }
    let m = t.dim();
    let n = t.ambient();
    let origin = vec![0.0; n];
    let q = ball_quadrature(t, &origin, r, refine_h)?;
    let r2 = r * r;
    let x2 = linalg::norm2(x);
    // one pass for every integrand: [V, P0, ∫⟨x,y⟩², ∫(r²−|y|²), ∫⟨x,y⟩, mass, ∫|y|², b...]
    let acc = q.integrate_vec(7 + n, |y, out| {
        let y2 = linalg::norm2(y);
        let xy = linalg::dot(x, y);
        let s = r2 - (x2 - 2.0 * xy + y2);
        out[0] = s * s;
        out[1] = (r2 - y2) * (r2 - y2);
        out[2] = xy * xy;
        out[3] = r2 - y2;
        out[4] = xy;
        out[5] = 1.0;
        out[6] = y2;
        for k in 0..n {
            out[7 + k] = y[k] * (r2 - y2);
        }
    });
    let b: Vec<f64> = acc[7..].to_vec();
    let p = [
        acc[1],
        4.0 * linalg::dot(x, &b),
        4.0 * acc[2] - 2.0 * x2 * acc[3],
        -4.0 * x2 * acc[4],
        x2 * x2 * acc[5],
    ];
    let v = acc[0];
    let sum: f64 = p.iter().sum();
    let norm = nu(m) * r.powi(m as i32 + 2);
    let qx = ball_quadrature(t, x, r, refine_h)?;
    let v_hat = qx.integrate(|y| {
        let s = r2 - linalg::norm2(&linalg::sub(x, y));
        s * s
    });
    let rm = r.powi(m as i32);
    let reach = (linalg::norm(x) + r).powi(2);
    Ok(MomentsRecord {
        x: x.to_vec(),
        r,
        dim: m,
        v,
        v_hat,
        p,
        p_normalized: p.map(|pk| pk / norm),
        v_normalized: v / norm,
        b_normalized: b.iter().map(|bk| bk / norm).collect(),
        b,
        trace_q: acc[6] / norm,
        mass: acc[5],
        dev: (qx.total() - acc[5]) / rm,
        identity_residual: (v - sum).abs() / v.abs().max(1e-300),
        error: q.mass_error.max(qx.mass_error) * reach * reach,
    })
}

/// β₂ and β∞ of ‖T‖ at (x, r) relative to the plane W through x.
#[derive(Debug, Clone, Serialize)]
pub struct BetaRecord {
    pub beta2: f64,
    pub beta_inf: f64,
    pub plane: OrientedPlane,
}

pub fn beta_numbers(
    t: &PolyChain,
    x: &[f64],
    r: f64,
    w: &OrientedPlane,
    refine_h: f64,
) -> Result<BetaRecord> {
    if w.ambient() != t.ambient() {
        return Err(GmtError::DimensionMismatch(
            "plane and chain ambient differ".into(),
        ));
    }
    let m = t.dim();
    let q = ball_quadrature(t, x, r, refine_h)?;
    let int = q.integrate(|y| linalg::norm2(&w.perp(&linalg::sub(y, x))));
    let beta2 = (int.max(0.0) / r.powi(m as i32 + 2)).sqrt();
    let sup = extreme_points(t, x, r, refine_h)?
        .iter()
        .map(|p| linalg::norm(&w.perp(&linalg::sub(p, x))))
        .fold(0.0, f64::max);
    Ok(BetaRecord {
        beta2,
        beta_inf: sup / r,
        plane: w.clone(),
    })
}

/// Points containing every extreme point of spt T ∩ B(x, r) in their convex
/// hull, up to the arc sampling (256 per circle) for triangles.
pub fn extreme_points(t: &PolyChain, x: &[f64], r: f64, refine_h: f64) -> Result<Vec<Vec<f64>>> {
    let r2 = r * r;
    let mut out = Vec::new();
    if t.dim() > 2 {
        let rest =
            crate::chain::restrict_ball(t, &crate::chain::Ball::new(x.to_vec(), r)?, refine_h)?;
        out.extend(rest.chain.support_vertices());
        return Ok(out);
    }
    for term in t.terms() {
        let s = &term.simplex;
        let verts = s.vertex_vec();
        for v in &verts {
            if linalg::norm2(&linalg::sub(v, x)) <= r2 {
                out.push(v.clone());
            }
        }
        // edge/sphere crossings
        for i in 0..verts.len() {
            for j in (i + 1)..verts.len() {
                let d = linalg::sub(&verts[j], &verts[i]);
                let w = linalg::sub(&verts[i], x);
                let qa = linalg::norm2(&d);
                let qb = linalg::dot(&w, &d);
                let qc = linalg::norm2(&w) - r2;
                let disc = qb * qb - qa * qc;
                if disc < 0.0 || qa == 0.0 {
                    continue;
                }
                for root in [(-qb - disc.sqrt()) / qa, (-qb + disc.sqrt()) / qa] {
                    if (0.0..=1.0).contains(&root) {
                        out.push(linalg::lerp(&verts[i], &verts[j], root));
                    }
                }
            }
        }
        if s.dim() == 2 {
            arc_samples(s, x, r, &mut out);
        }
    }
    Ok(out)
}

fn arc_samples(s: &crate::chain::Simplex, x: &[f64], r: f64, out: &mut Vec<Vec<f64>>) {
    let v0 = s.vertex(0);
    let basis = linalg::gram_schmidt(&s.edges(), 1e-300);
    if basis.len() < 2 {
        return;
    }
    let w = linalg::sub(x, v0);
    let c2 = [linalg::dot(&w, &basis[0]), linalg::dot(&w, &basis[1])];
    let rho2 = r * r - (linalg::norm2(&w) - c2[0] * c2[0] - c2[1] * c2[1]).max(0.0);
    if rho2 <= 0.0 {
        return;
    }
    let rho = rho2.sqrt();
    let tri: Vec<[f64; 2]> = s
        .vertices()
        .map(|p| {
            let d = linalg::sub(p, v0);
            [linalg::dot(&d, &basis[0]), linalg::dot(&d, &basis[1])]
        })
        .collect();
    let tri = crate::planar::ccw(tri);
    for k in 0..256 {
        let th = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
        let q = [c2[0] + rho * th.cos(), c2[1] + rho * th.sin()];
        if crate::planar::in_convex(&tri, q, 0.0) {
            let mut p = v0.to_vec();
            linalg::axpy(&mut p, q[0], &basis[0]);
            linalg::axpy(&mut p, q[1], &basis[1]);
            out.push(p);
        }
    }
}

/// Density-ratio profile about x on a geometric grid up to `r`.
pub fn profile_to(
    t: &PolyChain,
    x: &[f64],
    r: f64,
    points: usize,
    refine_h: f64,
) -> Result<DensityProfile> {
    DensityProfile::measure(t, x, &geometric_grid(r * 1e-3, r, points), refine_h)
}

/// Outcome of a bound check: measured quantity against its bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub ratio: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(name: &str, measured: f64, bound: f64) -> BoundCheck {
        BoundCheck {
            name: name.to_string(),
            measured,
            bound,
            slack: bound - measured,
            ratio: if bound > 0.0 {
                measured / bound
            } else {
                f64::INFINITY
            },
            holds: measured <= bound,
        }
    }
}

/// |tr 𝐐(φ, r) − m| ≤ ε(m+4), gated on |ratio(0, ρ) − 1| ≤ ε over a ρ-grid.
pub fn trace_bound_check(t: &PolyChain, r: f64, eps: f64, refine_h: f64) -> Result<BoundCheck> {
    let origin = vec![0.0; t.ambient()];
    let prof = profile_to(t, &origin, r, 48, refine_h)?;
    for (rho, v) in prof.radii.iter().zip(&prof.values) {
        if (v - 1.0).abs() > eps + 1e-12 {
            return Err(GmtError::hypothesis(
                "density ratio within eps",
                format!("ratio {v:.6} at radius {rho:.3e} is outside 1 ± {eps:.3e}"),
            ));
        }
    }
    let q = quad_form(t, &origin, r, refine_h)?;
    let m = t.dim() as f64;
    Ok(BoundCheck::new(
        "trace of normalized form",
        (q.trace() - m).abs(),
        eps * (m + 4.0),
    ))
}

/// The smallest ε accepted by `trace_bound_check` at this radius.
pub fn density_deviation(t: &PolyChain, r: f64, refine_h: f64) -> Result<f64> {
    let origin = vec![0.0; t.ambient()];
    let prof = profile_to(t, &origin, r, 48, refine_h)?;
    Ok(prof
        .values
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Constants the moment lemmas leave symbolic, plus the density tolerance
/// that stands in for "density exactly 1".
#[derive(Debug, Clone, Serialize)]
pub struct MomentConstants {
    pub first_moment: f64,
    pub pinch: f64,
    pub density_tol: f64,
    /// Number of sample centers y ∈ B(0, r) for the lower-excess hypothesis.
    pub centers: usize,
    pub radii: usize,
}

impl Default for MomentConstants {
    fn default() -> Self {
        MomentConstants {
            first_moment: 8.0,
            pinch: 16.0,
            density_tol: 1e-9,
            centers: 16,
            radii: 24,
        }
    }
}

/// Report of a lemma check whose hypotheses were verified first.
#[derive(Debug, Clone, Serialize)]
pub struct GatedCheck {
    pub check: BoundCheck,
    /// The trivial bound 2r(1 + exc(0, r)), reported next to the sharper one.
    pub trivial: Option<BoundCheck>,
    pub density_tol: f64,
    pub hypotheses: Vec<String>,
}

fn sample_centers(t: &PolyChain, r: f64, k: usize, refine_h: f64) -> Result<Vec<Vec<f64>>> {
    let n = t.ambient();
    let q = ball_quadrature(t, &vec![0.0; n], r, refine_h)?;
    let mut out = vec![vec![0.0; n]];
    if q.points.is_empty() || k == 0 {
        return Ok(out);
    }
    let step = (q.points.len() / k).max(1);
    out.extend(q.points.iter().step_by(step).take(k).cloned());
    Ok(out)
}

fn check_gauge_on(
    t: &PolyChain,
    y: &[f64],
    top: f64,
    xi: &dyn Fn(f64) -> f64,
    lower_only: bool,
    k: usize,
    refine_h: f64,
) -> Result<()> {
    let prof = DensityProfile::measure(t, y, &geometric_grid(top * 1e-3, top, k), refine_h)?;
    for &rho in &prof.radii {
        let (lo, _, both) = prof.excess(rho)?;
        let e = if lower_only { lo } else { both };
        if e > xi(rho) + prof.max_error() + 1e-12 {
            return Err(GmtError::hypothesis(
                if lower_only {
                    "lower excess below gauge"
                } else {
                    "excess below gauge"
                },
                format!(
                    "excess {e:.3e} > gauge {:.3e} at radius {rho:.3e} about {y:?}",
                    xi(rho)
                ),
            ));
        }
    }
    Ok(())
}

/// |𝐛(φ, r)| ≤ c·r·max{r^{1/4}, √ξ(2√r)} after checking the density at 0 and
/// the excess hypotheses on grids.
pub fn first_moment_bound_check(
    t: &PolyChain,
    r: f64,
    xi: &dyn Fn(f64) -> f64,
    consts: &MomentConstants,
    refine_h: f64,
) -> Result<GatedCheck> {
    let n = t.ambient();
    let origin = vec![0.0; n];
    if !(r > 0.0 && 2.0 * r.sqrt() <= 1.0) {
        return Err(GmtError::invalid("need 0 < 2√r ≤ 1"));
    }
    let mut hyps = Vec::new();
    let th = point_density(t, &origin, refine_h)?;
    if (th - 1.0).abs() > consts.density_tol {
        return Err(GmtError::hypothesis(
            "density 1 at the origin",
            format!("density {th:.12}"),
        ));
    }
    hyps.push(format!("density at 0 = {th:.12}"));
    for y in sample_centers(t, r, consts.centers, refine_h)? {
        check_gauge_on(t, &y, r.sqrt(), xi, true, consts.radii, refine_h)?;
    }
    hyps.push("lower excess ≤ ξ on B(0, r) up to √r".into());
    check_gauge_on(
        t,
        &origin,
        2.0 * r.sqrt(),
        xi,
        false,
        consts.radii,
        refine_h,
    )?;
    hyps.push("excess at 0 ≤ ξ up to 2√r".into());
    let rec = moments_all(t, &origin, r, refine_h)?;
    let bn = linalg::norm(&rec.b_normalized);
    let scale = r.powf(0.25).max(xi(2.0 * r.sqrt()).sqrt());
    let (_, _, exc) = profile_to(t, &origin, r, consts.radii, refine_h)?.excess(r)?;
    Ok(GatedCheck {
        check: BoundCheck::new("first moment", bn, consts.first_moment * r * scale),
        trivial: Some(BoundCheck::new(
            "first moment (trivial)",
            bn,
            2.0 * r * (1.0 + exc),
        )),
        density_tol: consts.density_tol,
        hypotheses: hyps,
    })
}

/// |𝐐(φ, r)(x) − |x|²| ≤ c|x|²·max{r^{1/8}, ξ(2√r)^{1/4}} for x on the
/// support at the prescribed distance |x| = r·max{…}.
pub fn quadform_pinch_check(
    t: &PolyChain,
    x: &[f64],
    r: f64,
    xi: &dyn Fn(f64) -> f64,
    consts: &MomentConstants,
    refine_h: f64,
) -> Result<GatedCheck> {
    let n = t.ambient();
    let origin = vec![0.0; n];
    if !(r > 0.0 && 2.0 * r.sqrt() <= 1.0) {
        return Err(GmtError::invalid("need 0 < 2√r ≤ 1"));
    }
    let scale = r.powf(0.125).max(xi(2.0 * r.sqrt()).powf(0.25));
    let want = r * scale;
    let xn = linalg::norm(x);
    if (xn - want).abs() > 1e-9 * want {
        return Err(GmtError::hypothesis(
            "prescribed distance",
            format!("|x| = {xn:.6e}, required {want:.6e}"),
        ));
    }
    let mut hyps = Vec::new();
    for (name, p) in [("origin", &origin), ("x", &x.to_vec())] {
        let th = point_density(t, p, refine_h)?;
        if (th - 1.0).abs() > consts.density_tol {
            return Err(GmtError::hypothesis(
                "density 1",
                format!(
                    "density at {name} is {th:.12}, tolerance {:.1e}",
                    consts.density_tol
                ),
            ));
        }
        hyps.push(format!("density at {name} = {th:.12}"));
    }
    for y in sample_centers(t, r, consts.centers, refine_h)? {
        check_gauge_on(t, &y, r.sqrt(), xi, true, consts.radii, refine_h)?;
    }
    hyps.push("lower excess ≤ ξ on B(0, r) up to √r".into());
    for p in [&origin, &x.to_vec()] {
        check_gauge_on(t, p, 2.0 * r.sqrt(), xi, false, consts.radii, refine_h)?;
    }
    hyps.push("excess at 0 and x ≤ ξ up to 2√r".into());
    let q = quad_form(t, &origin, r, refine_h)?;
    let lhs = (q.eval(x) - xn * xn).abs();
    Ok(GatedCheck {
        check: BoundCheck::new("quadratic form at x", lhs, consts.pinch * xn * xn * scale),
        trivial: None,
        density_tol: consts.density_tol,
        hypotheses: hyps,
    })
}

/// The four elementary square-root inequalities, each as (lhs, rhs).
pub mod squares {
    fn s(a: f64) -> f64 {
        (1.0 + a * a).sqrt()
    }

    /// (1+a²+b²)^{1/2} ≤ (1+a²)^{1/2} + ((1+b²)^{1/2} − 1)
    pub fn sum_of_squares(a: f64, b: f64) -> (f64, f64) {
        ((1.0 + a * a + b * b).sqrt(), s(a) + (s(b) - 1.0))
    }

    /// Convexity of a ↦ (1+a²)^{1/2} under a convex combination.
    pub fn convex_combination(a: &[f64], lambda: &[f64]) -> (f64, f64) {
        let mean: f64 = a.iter().zip(lambda).map(|(x, l)| x * l).sum();
        (s(mean), a.iter().zip(lambda).map(|(x, l)| l * s(*x)).sum())
    }

    /// (1+δ²a²)^{1/2} − 1 ≤ δ((1+a²)^{1/2} − 1) for δ ∈ (0, 1]
    pub fn scaled(a: f64, delta: f64) -> (f64, f64) {
        (s(delta * a) - 1.0, delta * (s(a) - 1.0))
    }

    /// (1+ab)^{1/2} − 1 ≤ δ⁻²b²/2 + δ((1+a²)^{1/2} − 1)
    pub fn product(a: f64, b: f64, delta: f64) -> (f64, f64) {
        (
            (1.0 + a * b).sqrt() - 1.0,
            0.5 * b * b / (delta * delta) + delta * (s(a) - 1.0),
        )
    }
}

/// min{(∫f)², (∫1)²} ≤ 3(∫1)(∫(1+f²)^{1/2} − 1) for a discrete measure.
pub fn two_terms(f: &[f64], mu: &[f64]) -> (f64, f64) {
    let total: f64 = mu.iter().sum();
    let int_f: f64 = f.iter().zip(mu).map(|(a, w)| a * w).sum();
    let int_s: f64 = f
        .iter()
        .zip(mu)
        .map(|(a, w)| w * ((1.0 + a * a).sqrt() - 1.0))
        .sum();
    ((int_f * int_f).min(total * total), 3.0 * total * int_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::generate::{cone_harmonic, flat_disk, tilted};
    use crate::geom::plane_distance;
    use std::f64::consts::PI;

    fn disk(n: usize) -> PolyChain {
        flat_disk(n, 3, Coeff::Integer(1)).unwrap()
    }

    #[test]
    fn omega_values() {
        assert!((omega(2, 1) - PI / 2.0).abs() < 1e-15);
        for m in 1..6 {
            assert!((omega(m, 1) - 2.0 * nu(m)).abs() < 1e-14);
        }
        assert!((omega(1, 2) - 16.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn disk_form_and_plane() {
        let q = quad_form(&disk(512), &[0.0; 3], 1.0, 0.01).unwrap();
        let e = q.eigen();
        assert!((e.values[0] - 1.0).abs() < 5e-3 && (e.values[1] - 1.0).abs() < 5e-3);
        assert!(e.values[2].abs() < 1e-15);
        assert!((q.trace() - 2.0).abs() < 5e-3);
        let sel = select_plane(&q, 2).unwrap();
        assert!(plane_distance(&sel.plane, &OrientedPlane::coordinate(3, 2)).unwrap() < 1e-12);
    }

    #[test]
    fn diamond_second_moment() {
        // |x| + |y| ≤ 1 as four triangles
        let c = |x: f64, y: f64| vec![x, y, 0.0];
        let tris = vec![
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)],
        ];
        let t = PolyChain::from_simplices(&tris, Coeff::Integer(1)).unwrap();
        let q = quad_form(&t, &[0.0; 3], 1.0, 0.01).unwrap();
        assert!((q.eval(&[1.0, 0.0, 0.0]) - 4.0 / (3.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn ambiguous_plane_is_an_error() {
        let q = quad_form(&disk(64), &[0.0; 3], 1.0, 0.01).unwrap();
        assert!(matches!(
            select_plane(&q, 1),
            Err(GmtError::AmbiguousPlane { .. })
        ));
    }

    #[test]
    fn tilted_plane_selected() {
        let t = tilted(0.2, 128).unwrap();
        let q = quad_form(&t, &[0.0; 3], 0.8, 0.01).unwrap();
        let w = select_plane(&q, 2).unwrap().plane;
        let exact = OrientedPlane::from_span(&[vec![1.0, 0.0, 0.2], vec![0.0, 1.0, 0.0]]).unwrap();
        let d_exact = plane_distance(&w, &exact).unwrap();
        let d_base = plane_distance(&w, &OrientedPlane::coordinate(3, 2)).unwrap();
        assert!(d_exact < 1e-10, "{d_exact}");
        assert!(d_base > 0.15);
    }

    #[test]
    fn moment_identity_and_symmetry() {
        let t = disk(128);
        let rec = moments_all(&t, &[0.1, 0.0, 0.0], 1.0, 0.01).unwrap();
        assert!(rec.identity_residual < 1e-12);
        assert!(linalg::norm(&rec.b) < 1e-14);
        assert!(rec.p[3].abs() < 1e-14);
        let small = moments_all(&t, &[0.1, 0.05, 0.02], 0.6, 0.01).unwrap();
        assert!(linalg::norm(&small.b) < 1e-13);
        assert!(small.identity_residual < 1e-12);
        let rec0 = moments_all(&t, &[0.0; 3], 1.0, 0.01).unwrap();
        assert!((rec0.v - rec0.v_hat).abs() < 1e-14);
        assert!((rec0.p[0] - rec0.v).abs() < 1e-14);
    }

    #[test]
    fn fourth_moment_term() {
        let t = disk(512);
        let rec = moments_all(&t, &[0.1, 0.0, 0.0], 1.0, 0.01).unwrap();
        let area = 256.0 * (2.0 * PI / 512.0).sin();
        assert!((rec.p[4] - 1e-4 * area).abs() < 1e-16);
        assert!((rec.p[4] - 1e-4 * PI).abs() < 1e-7);
    }

    #[test]
    fn beta_numbers_of_graph() {
        let eps = 0.1;
        let t = tilted(eps, 256).unwrap().dilate(1.5);
        let base = OrientedPlane::coordinate(3, 2);
        // the ball cuts the graph in an ellipse; the exact sup on it is
        // ε·r/√(1+ε²)
        let b = beta_numbers(&t, &[0.0; 3], 1.0, &base, 0.01).unwrap();
        assert!((b.beta_inf - eps / (1.0 + eps * eps).sqrt()).abs() < 1e-4);
        // ∫ over the ellipse {u² (1+ε²) + v² ≤ 1} of (εu)² · √(1+ε²)
        let a = 1.0 / (1.0 + eps * eps).sqrt();
        let want = eps * eps * PI * a.powi(3) / 4.0 * (1.0 + eps * eps).sqrt();
        assert!((b.beta2 * b.beta2 - want).abs() < 1e-12);
        let q = quad_form(&t, &[0.0; 3], 1.0, 0.01).unwrap();
        let w = select_plane(&q, 2).unwrap().plane;
        let bw = beta_numbers(&t, &[0.0; 3], 1.0, &w, 0.01).unwrap();
        assert!(bw.beta2 < 1e-7 && bw.beta_inf < 1e-7);
    }

    #[test]
    fn trace_check_flat_and_cone() {
        let t = disk(512);
        let eps = density_deviation(&t, 1.0, 0.01).unwrap();
        let c = trace_bound_check(&t, 1.0, eps, 0.01).unwrap();
        assert!(c.holds);
        let cone = cone_harmonic(2, 0.3, 256, 2.5).unwrap();
        let e2 = density_deviation(&cone, 1.0, 0.01).unwrap();
        assert!(e2 > 0.01);
        assert!(trace_bound_check(&cone, 1.0, e2, 0.01).unwrap().holds);
        assert!(trace_bound_check(&cone, 1.0, e2 * 0.5, 0.01).is_err());
    }

    #[test]
    fn first_moment_of_symmetric_disk() {
        let t = disk(128);
        let xi = |r: f64| 0.05 * r.sqrt();
        let g = first_moment_bound_check(&t, 0.01, &xi, &MomentConstants::default(), 0.01).unwrap();
        assert!(g.check.measured < 1e-12 && g.check.holds);
        assert!(g.trivial.unwrap().holds);
    }

    #[test]
    fn pinch_on_disk_and_gate_off_support() {
        let t = disk(128);
        let xi = |r: f64| 1e-3 * r;
        let r: f64 = 0.01;
        let s = r.powf(0.125).max(xi(2.0 * r.sqrt()).powf(0.25));
        let x = [r * s, 0.0, 0.0];
        let g = quadform_pinch_check(&t, &x, r, &xi, &MomentConstants::default(), 0.01).unwrap();
        assert!(g.check.holds, "{:?}", g.check);
        let off = [0.0, 0.0, r * s];
        let e =
            quadform_pinch_check(&t, &off, r, &xi, &MomentConstants::default(), 0.01).unwrap_err();
        assert!(e.is_gate_failure());
    }

    #[test]
    fn squares_spot_values() {
        let (l, r) = squares::sum_of_squares(1.0, 1.0);
        assert!(l <= r);
        let (l, r) = squares::scaled(3.0, 0.5);
        assert!(l <= r);
        let (l, r) = two_terms(&[0.5, 2.0], &[1.0, 1.0]);
        assert!(l <= r);
    }
}
