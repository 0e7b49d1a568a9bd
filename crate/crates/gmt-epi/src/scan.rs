//! Multiscale flatness scanner: per point and dyadic scale, spectral planes,
//! β numbers, Hausdorff distance to the plane ball, density ratios and
//! orthonormal support frames; per point, Dini sums of the flatness gauge,
//! plane coherence and C^{1,γ} graph certificates.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{PolyChain, Term};
use crate::error::{GmtError, Result};
use crate::geom::{plane_ball_grid, plane_distance, OrientedPlane};
use crate::linalg;
use crate::measure::ball_mass;
use crate::moments::{beta_numbers, extreme_points, quad_form, select_plane};
use crate::mono::alpha0;
use crate::unit_ball_volume;

/// β = min(α₀, α)/(8(m+2)), with α₀ = m(1 − λ^{1/4})/λ^{1/4}.
pub fn theoretical_exponent(m: usize, alpha: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(GmtError::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) || m == 0 {
        return Err(GmtError::invalid("need m >= 1 and 0 < lambda < 1"));
    }
    Ok(alpha0(m, lambda).min(alpha) / (8.0 * (m as f64 + 2.0)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub refine_h: f64,
    /// Points per axis of the plane-ball grid for the plane-to-support distance.
    pub hausdorff_grid: usize,
    /// β∞ threshold for the per-point flat scale.
    pub flat_threshold: f64,
    /// Budget for the Dini sum η̂ in graph extraction.
    pub dini_budget: f64,
    /// Allowed growth of η(s)/s towards larger s before it counts as
    /// non-decreasing (grid noise).
    pub eta_ratio_slack: f64,
    /// Fibers per axis in the injectivity scan.
    pub fiber_grid: usize,
    /// Fiber points closer than fiber_tol·r are the same point.
    pub fiber_tol: f64,
    /// Relative tolerance between consecutive density ratios on a plateau.
    pub plateau_tol: f64,
    /// Drift values below this are numerical floor in the Hölder fit.
    pub drift_floor: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            refine_h: 0.01,
            hausdorff_grid: 16,
            // half the Dini budget: a gauge decaying like s sums to about 1.4x its top value
            flat_threshold: 1.0 / 240.0,
            dini_budget: 1.0 / 120.0,
            eta_ratio_slack: 1.5,
            fiber_grid: 32,
            fiber_tol: 1e-12,
            plateau_tol: 1e-9,
            drift_floor: 1e-10,
        }
    }
}

/// Orthonormal directions e_i with x + s·e_i (nearly) on the support.
#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub anchor: Vec<f64>,
    pub scale: f64,
    pub directions: Vec<Vec<f64>>,
    /// max |⟨e_i, e_j⟩| of the support directions before orthonormalization.
    pub orthogonality_defect: f64,
    /// max dist(x + s·e_i, spt T) after orthonormalization.
    pub support_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanCell {
    pub scale: f64,
    pub plane: Option<OrientedPlane>,
    pub eigen_gap: f64,
    pub beta_inf: f64,
    /// Half the width of the support slab parallel to the plane, over r
    /// (exact in codimension 1, a lower bound otherwise).
    pub beta_inf_centered: f64,
    pub beta2: f64,
    pub hausdorff: f64,
    pub density_ratio: f64,
    pub frame_found: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderFit {
    pub constant: f64,
    pub exponent: f64,
    pub used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub x: Vec<f64>,
    pub cells: Vec<ScanCell>,
    /// η(r_k) = Hausdorff distance / r_k.
    pub eta: Vec<f64>,
    /// η̂(r_k) = ∫₀^{r_k} η(s)/s ds, dyadic sum with a one-term tail.
    pub dini: Vec<f64>,
    /// Plane distance between consecutive scales k and k+1.
    pub drift: Vec<f64>,
    pub coherence_violations: usize,
    pub holder: Option<HolderFit>,
    pub density_plateau: Option<f64>,
    /// Largest scale from which every finer cell has β∞ ≤ flat_threshold.
    pub flat_scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub r0: f64,
    pub depth: usize,
    pub dim: usize,
    pub scales: Vec<f64>,
    pub points: Vec<PointReport>,
    pub config: ScanConfig,
}

fn local_terms<'a>(t: &'a PolyChain, x: &[f64], r: f64) -> Vec<&'a Term> {
    t.terms()
        .iter()
        .filter(|term| {
            let n = x.len();
            let mut d2 = 0.0;
            for i in 0..n {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for v in term.simplex.vertices() {
                    lo = lo.min(v[i]);
                    hi = hi.max(v[i]);
                }
                let g = (lo - x[i]).max(x[i] - hi).max(0.0);
                d2 += g * g;
            }
            d2 <= r * r * (1.0 + 1e-12)
        })
        .collect()
}

/// Closest point of the simplex with the given vertices to p.
pub fn closest_on_simplex(p: &[f64], verts: &[Vec<f64>]) -> Vec<f64> {
    if verts.len() == 1 {
        return verts[0].clone();
    }
    let k = verts.len() - 1;
    let edges: Vec<Vec<f64>> = verts[1..]
        .iter()
        .map(|v| linalg::sub(v, &verts[0]))
        .collect();
    let g = linalg::gram(&edges);
    let w = linalg::sub(p, &verts[0]);
    let rhs: Vec<f64> = edges.iter().map(|e| linalg::dot(e, &w)).collect();
    if let Some(lam) = linalg::solve(&g, &rhs) {
        let l0 = 1.0 - lam.iter().sum::<f64>();
        if l0 >= 0.0 && lam.iter().all(|&l| l >= 0.0) {
            let mut y = verts[0].clone();
            for i in 0..k {
                linalg::axpy(&mut y, lam[i], &edges[i]);
            }
            return y;
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for skip in 0..verts.len() {
        let face: Vec<Vec<f64>> = verts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, v)| v.clone())
            .collect();
        let y = closest_on_simplex(p, &face);
        let d = linalg::dist(&y, p);
        if best.as_ref().map_or(true, |b| d < b.0) {
            best = Some((d, y));
        }
    }
    best.unwrap().1
}

/// dist(p, spt T).
pub fn support_distance(t: &PolyChain, p: &[f64]) -> f64 {
    t.terms()
        .iter()
        .map(|term| linalg::dist(&closest_on_simplex(p, &term.simplex.vertex_vec()), p))
        .fold(f64::INFINITY, f64::min)
}

/// Points of spt T ∩ B(x, r) on the fiber x + u + W⊥ (u ∈ W).
fn fiber_points(terms: &[&Term], x: &[f64], r: f64, w: &OrientedPlane, u: &[f64]) -> Vec<Vec<f64>> {
    let m = w.dim();
    let mut out = Vec::new();
    for term in terms {
        let s = &term.simplex;
        if s.dim() != m {
            continue;
        }
        let v0 = s.vertex(0);
        let edges = s.edges();
        let a = DMatrix::from_fn(m, m, |i, j| linalg::dot(&w.frame()[i], &edges[j]));
        let base = w.coords(&linalg::sub(v0, x));
        let rhs: Vec<f64> = (0..m).map(|i| u[i] - base[i]).collect();
        let Some(lam) = linalg::solve(&a, &rhs) else {
            continue;
        };
        let tol = 1e-12;
        if lam.iter().any(|&l| l < -tol) || lam.iter().sum::<f64>() > 1.0 + tol {
            continue;
        }
        let mut y = v0.to_vec();
        for i in 0..m {
            linalg::axpy(&mut y, lam[i], &edges[i]);
        }
        if linalg::dist(&y, x) <= r {
            out.push(y);
        }
    }
    out
}

/// Lemma-style frame at radius 1 about x: requires β∞(x, 1, W) < ρ ≤ (25√m)^{-1}
/// and 2ρ < s ≤ 1.
pub fn find_frame(
    t: &PolyChain,
    x: &[f64],
    s: f64,
    w: &OrientedPlane,
    rho: f64,
    refine_h: f64,
) -> Result<Frame> {
    find_frame_at(t, x, s, w, rho, 1.0, refine_h)
}

/// The same construction with the unit ball replaced by B(x, radius).
pub fn find_frame_at(
    t: &PolyChain,
    x: &[f64],
    s: f64,
    w: &OrientedPlane,
    rho: f64,
    radius: f64,
    refine_h: f64,
) -> Result<Frame> {
    let m = t.dim();
    if w.dim() != m || w.ambient() != t.ambient() {
        return Err(GmtError::DimensionMismatch("frame plane".into()));
    }
    let cap = 1.0 / (25.0 * (m as f64).sqrt());
    if !(rho > 0.0 && rho <= cap) {
        return Err(GmtError::hypothesis(
            "frame rho",
            format!("rho = {rho} must lie in (0, {cap:.6}]"),
        ));
    }
    if !(s > 2.0 * rho * radius && s <= radius) {
        return Err(GmtError::hypothesis(
            "frame scale",
            format!("need 2 rho r < s <= r, got s = {s}"),
        ));
    }
    let beta = beta_numbers(t, x, radius, w, refine_h)?.beta_inf;
    if !(beta < rho) {
        return Err(GmtError::hypothesis(
            "frame flatness",
            format!("beta_inf = {beta:.4e} >= rho = {rho:.4e}"),
        ));
    }
    let terms = local_terms(t, x, s * (1.0 + 1e-9));
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(m);
    for _ in 0..m {
        // next target: a unit vector of W orthogonal to the projections so far
        let projected: Vec<Vec<f64>> = raw.iter().map(|e| w.project(e)).collect();
        let mut target = None;
        for b in w.frame() {
            let mut v = b.clone();
            for q in linalg::gram_schmidt(&projected, 1e-12) {
                let c = linalg::dot(&v, &q);
                linalg::axpy(&mut v, -c, &q);
            }
            if linalg::norm(&v) > 1e-6 {
                target = Some(linalg::scale(&v, 1.0 / linalg::norm(&v)));
                break;
            }
        }
        let target =
            target.ok_or_else(|| GmtError::Degenerate("no target direction left in W".into()))?;
        let y = ray_support_point(&terms, x, s, w, &target).ok_or_else(|| {
            GmtError::hypothesis(
                "frame fiber",
                format!("no support point at distance {s} over direction {target:?}"),
            )
        })?;
        raw.push(linalg::scale(&linalg::sub(&y, x), 1.0 / s));
    }
    let mut defect = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            defect = defect.max(linalg::dot(&raw[i], &raw[j]).abs());
        }
    }
    let directions = linalg::gram_schmidt(&raw, 1e-12);
    if directions.len() != m {
        return Err(GmtError::Degenerate(
            "support directions are dependent".into(),
        ));
    }
    let support_defect = directions
        .iter()
        .map(|e| {
            let p = linalg::add(x, &linalg::scale(e, s));
            terms
                .iter()
                .map(|term| linalg::dist(&closest_on_simplex(&p, &term.simplex.vertex_vec()), &p))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(Frame {
        anchor: x.to_vec(),
        scale: s,
        directions,
        orthogonality_defect: defect,
        support_defect,
    })
}

/// Support point y with |y − x| = s and π_W(y − x) a positive multiple of
/// `dir`, closest to the plane among the candidates.
fn ray_support_point(
    terms: &[&Term],
    x: &[f64],
    s: f64,
    w: &OrientedPlane,
    dir: &[f64],
) -> Option<Vec<f64>> {
    let m = w.dim();
    // W ∩ dir⊥
    let mut others = Vec::new();
    {
        let mut fam = vec![dir.to_vec()];
        fam.extend(w.frame().iter().cloned());
        let basis = linalg::gram_schmidt(&fam, 1e-10);
        others.extend(basis.into_iter().skip(1));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for term in terms {
        let sx = &term.simplex;
        if sx.dim() != m {
            continue;
        }
        let v0 = sx.vertex(0);
        let edges = sx.edges();
        let off = linalg::sub(v0, x);
        // A λ = b with rows ⟨·, w_j⟩ for w_j ⊥ dir in W
        let k = others.len();
        let a = DMatrix::from_fn(k, m, |i, j| linalg::dot(&others[i], &edges[j]));
        let b: Vec<f64> = others.iter().map(|q| -linalg::dot(q, &off)).collect();
        let (lp, dl) = if k == 0 {
            (vec![0.0; m], {
                let mut d = vec![0.0; m];
                d[0] = 1.0;
                d
            })
        } else {
            // pad to a square system so the SVD exposes the null direction
            let sq = DMatrix::from_fn(m, m, |i, j| if i < k { a[(i, j)] } else { 0.0 });
            let svd = sq.svd(true, true);
            let vt = svd.v_t.as_ref()?;
            let sv = &svd.singular_values;
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
            if sv[order[k - 1]] < 1e-12 {
                continue;
            }
            let null = order[m - 1];
            let d: Vec<f64> = (0..m).map(|j| vt[(null, j)]).collect();
            let mut bb = nalgebra::DVector::zeros(m);
            for i in 0..k {
                bb[i] = b[i];
            }
            let lp = svd.solve(&bb, 1e-12).ok()?;
            (lp.iter().cloned().collect(), d)
        };
        // τ-range from λ_i ≥ 0 and Σλ ≤ 1
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut feasible = true;
        let mut clamp = |c0: f64, c1: f64| {
            // c0 + τ c1 ≥ 0
            if c1.abs() < 1e-300 {
                if c0 < -1e-12 {
                    feasible = false;
                }
            } else if c1 > 0.0 {
                lo = lo.max(-c0 / c1);
            } else {
                hi = hi.min(-c0 / c1);
            }
        };
        for j in 0..m {
            clamp(lp[j], dl[j]);
        }
        clamp(1.0 - lp.iter().sum::<f64>(), -dl.iter().sum::<f64>());
        if !feasible || lo > hi {
            continue;
        }
        let mut p0 = off.clone();
        let mut dv = vec![0.0; x.len()];
        for j in 0..m {
            linalg::axpy(&mut p0, lp[j], &edges[j]);
            linalg::axpy(&mut dv, dl[j], &edges[j]);
        }
        let qa = linalg::norm2(&dv);
        if qa == 0.0 {
            continue;
        }
        let qb = linalg::dot(&p0, &dv);
        let qc = linalg::norm2(&p0) - s * s;
        let disc = qb * qb - qa * qc;
        if disc < 0.0 {
            continue;
        }
        for tau in [(-qb - disc.sqrt()) / qa, (-qb + disc.sqrt()) / qa] {
            if tau < lo - 1e-12 || tau > hi + 1e-12 {
                continue;
            }
            let rel: Vec<f64> = p0.iter().zip(&dv).map(|(a, b)| a + tau * b).collect();
            if linalg::dot(&rel, dir) <= 0.0 {
                continue;
            }
            let h = linalg::norm(&w.perp(&rel));
            if best.as_ref().map_or(true, |bst| h < bst.0) {
                best = Some((h, linalg::add(x, &rel)));
            }
        }
    }
    best.map(|b| b.1)
}

fn scan_cell(t: &PolyChain, x: &[f64], r: f64, cfg: &ScanConfig) -> ScanCell {
    let m = t.dim();
    let density = ball_mass(t, x, r, cfg.refine_h)
        .map(|(mass, _)| mass / (unit_ball_volume(m) * r.powi(m as i32)))
        .unwrap_or(f64::NAN);
    let mut cell = ScanCell {
        scale: r,
        plane: None,
        eigen_gap: 0.0,
        beta_inf: f64::NAN,
        beta_inf_centered: f64::NAN,
        beta2: f64::NAN,
        hausdorff: f64::NAN,
        density_ratio: density,
        frame_found: false,
        error: None,
    };
    let run = |cell: &mut ScanCell| -> Result<()> {
        let q = quad_form(t, x, r, cfg.refine_h)?;
        let sel = select_plane(&q, m)?;
        cell.eigen_gap = sel.gap;
        let w = sel.plane;
        let beta = beta_numbers(t, x, r, &w, cfg.refine_h)?;
        cell.beta_inf = beta.beta_inf;
        cell.beta2 = beta.beta2;
        let pts = extreme_points(t, x, r, cfg.refine_h)?;
        let comp = w.complement();
        let mut half = 0.0f64;
        for c in &comp {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in &pts {
                let h = linalg::dot(&linalg::sub(p, x), c);
                lo = lo.min(h);
                hi = hi.max(h);
            }
            if hi >= lo {
                half = half.max(0.5 * (hi - lo));
            }
        }
        cell.beta_inf_centered = half / r;
        // support → plane ball is the β∞ sup; plane ball → support on a grid
        let terms = local_terms(t, x, r);
        let mut h = beta.beta_inf * r;
        for u in plane_ball_grid(m, cfg.hausdorff_grid) {
            let q = linalg::add(x, &w.embed(&linalg::scale(&u, r)));
            let mut d = f64::INFINITY;
            for term in &terms {
                let verts = term.simplex.vertex_vec();
                let mut y = closest_on_simplex(&q, &verts);
                if linalg::dist(&y, x) > r * (1.0 + 1e-12) {
                    // walk back towards the simplex point nearest x until inside B
                    let z = closest_on_simplex(x, &verts);
                    if linalg::dist(&z, x) > r {
                        continue;
                    }
                    let (mut lo, mut hi) = (0.0, 1.0);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let p = linalg::add(&z, &linalg::scale(&linalg::sub(&y, &z), mid));
                        if linalg::dist(&p, x) <= r {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    y = linalg::add(&z, &linalg::scale(&linalg::sub(&y, &z), lo));
                }
                d = d.min(linalg::dist(&y, &q));
            }
            if !d.is_finite() {
                d = pts
                    .iter()
                    .map(|p| linalg::dist(p, &q))
                    .fold(f64::INFINITY, f64::min);
            }
            h = h.max(d);
        }
        cell.hausdorff = h;
        let cap = 1.0 / (25.0 * (m as f64).sqrt());
        cell.frame_found =
            beta.beta_inf < cap && find_frame_at(t, x, 0.5 * r, &w, cap, r, cfg.refine_h).is_ok();
        cell.plane = Some(w);
        Ok(())
    };
    if let Err(e) = run(&mut cell) {
        cell.error = Some(e.to_string());
    }
    cell
}

/// Scan every point at scales r_k = 2^{-k} r₀, k = 0..=depth.
pub fn multiscale_scan(
    t: &PolyChain,
    points: &[Vec<f64>],
    r0: f64,
    depth: usize,
    cfg: &ScanConfig,
) -> Result<ScanReport> {
    if !(r0 > 0.0) {
        return Err(GmtError::invalid("r0 must be positive"));
    }
    if t.dim() == 0 || t.is_empty() {
        return Err(GmtError::invalid(
            "scan needs a nonempty chain of positive dimension",
        ));
    }
    let bd = crate::chain::boundary(t)?;
    for (i, x) in points.iter().enumerate() {
        if x.len() != t.ambient() {
            return Err(GmtError::DimensionMismatch(format!("scan point {i}")));
        }
        let d = support_distance(t, x);
        if d > 1e-6 * r0 {
            return Err(GmtError::hypothesis(
                "scan point",
                format!("point {i} is {d:.3e} from the support"),
            ));
        }
        if !bd.is_empty() {
            let db = support_distance(&bd, x);
            if db < 2.0 * r0 {
                return Err(GmtError::hypothesis(
                    "scan point",
                    format!("point {i} is {db:.3e} from the boundary, need >= 2 r0"),
                ));
            }
        }
    }
    let scales: Vec<f64> = (0..=depth).map(|k| r0 * 0.5f64.powi(k as i32)).collect();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (0..=depth).map(move |k| (i, k)))
        .collect();
    let cells: Vec<ScanCell> = jobs
        .par_iter()
        .map(|&(i, k)| scan_cell(t, &points[i], scales[k], cfg))
        .collect();
    let mut it = cells.into_iter();
    let points = points
        .iter()
        .map(|x| {
            let cells: Vec<ScanCell> = (&mut it).take(depth + 1).collect();
            summarize(x.clone(), cells, cfg)
        })
        .collect();
    Ok(ScanReport {
        r0,
        depth,
        dim: t.dim(),
        scales,
        points,
        config: cfg.clone(),
    })
}

fn summarize(x: Vec<f64>, cells: Vec<ScanCell>, cfg: &ScanConfig) -> PointReport {
    let n = cells.len();
    let eta: Vec<f64> = cells
        .iter()
        .map(|c| {
            if c.hausdorff.is_finite() {
                c.hausdorff / c.scale
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let ln2 = std::f64::consts::LN_2;
    let mut dini = vec![0.0; n];
    let mut acc = ln2 * eta[n - 1];
    for k in (0..n).rev() {
        acc += ln2 * eta[k];
        dini[k] = acc;
    }
    let drift: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| match (&cells[k].plane, &cells[k + 1].plane) {
            (Some(a), Some(b)) => plane_distance(a, b).unwrap_or(f64::INFINITY),
            _ => f64::INFINITY,
        })
        .collect();
    // consecutive planes against ε(2 + R/r) with ε the larger β∞
    let coherence_violations = (0..n.saturating_sub(1))
        .filter(|&k| {
            let eps = cells[k].beta_inf.max(cells[k + 1].beta_inf);
            !(drift[k] <= eps * 4.0 + 1e-12)
        })
        .count();
    let holder = holder_fit(
        &cells.iter().map(|c| c.scale).collect::<Vec<_>>()[..n - 1],
        &drift,
        cfg.drift_floor,
    );
    let density_plateau = plateau(
        &cells.iter().map(|c| c.density_ratio).collect::<Vec<_>>(),
        cfg.plateau_tol,
    );
    let mut flat_scale = None;
    for k in (0..n).rev() {
        if cells[k].beta_inf <= cfg.flat_threshold && cells[k].error.is_none() {
            flat_scale = Some(cells[k].scale);
        } else {
            break;
        }
    }
    PointReport {
        x,
        cells,
        eta,
        dini,
        drift,
        coherence_violations,
        holder,
        density_plateau,
        flat_scale,
    }
}

/// Least squares of log(drift) against log(scale) over drifts above 10× floor.
fn holder_fit(scales: &[f64], drift: &[f64], floor: f64) -> Option<HolderFit> {
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .zip(drift)
        .filter(|(_, &d)| d.is_finite() && d > 10.0 * floor)
        .map(|(&s, &d)| (s.ln(), d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(HolderFit {
        constant: (my - slope * mx).exp(),
        exponent: slope,
        used: pts.len(),
    })
}

/// Mean over the longest run of consecutive scales whose ratios agree within
/// `tol` (relative).
fn plateau(values: &[f64], tol: f64) -> Option<f64> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = 0;
    for k in 1..=values.len() {
        let ends = k == values.len() || {
            let (a, b) = (values[k - 1], values[k]);
            !((a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0))
        };
        if ends {
            if k - start >= 2 && best.map_or(true, |(s, e)| k - start > e - s) {
                best = Some((start, k));
            }
            start = k;
        }
    }
    best.map(|(s, e)| values[s..e].iter().sum::<f64>() / (e - s) as f64)
}

/// One row of the tangent-plane drift table.
#[derive(Debug, Clone, Serialize)]
pub struct DriftRow {
    pub scale: f64,
    pub drift: f64,
    /// 24η(r_k) + 8η̂(r_k).
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphCertificate {
    pub x: Vec<f64>,
    pub radius: f64,
    pub plane: OrientedPlane,
    pub dini: f64,
    pub dini_budget: f64,
    pub fibers: usize,
    pub lipschitz: f64,
    pub drift: Vec<DriftRow>,
    pub holder: Option<HolderFit>,
}

fn scale_index(report: &ScanReport, r: f64) -> Result<usize> {
    report
        .scales
        .iter()
        .position(|&s| s <= r * (1.0 + 1e-12))
        .ok_or_else(|| GmtError::invalid(format!("no scan scale at or below {r}")))
}

fn check_gauge(report: &ScanReport, p: &PointReport, k: usize) -> Result<()> {
    let cfg = &report.config;
    for c in &p.cells[k..] {
        if let Some(e) = &c.error {
            return Err(GmtError::hypothesis(
                "plane fit",
                format!("at scale {:.3e}: {e}", c.scale),
            ));
        }
    }
    if !(p.dini[k] <= cfg.dini_budget) {
        return Err(GmtError::hypothesis(
            "dini budget",
            format!(
                "eta_hat({:.3e}) = {:.3e} > {:.3e}",
                report.scales[k], p.dini[k], cfg.dini_budget
            ),
        ));
    }
    // η(s)/s must not grow towards larger s (beyond grid noise)
    let floor = 1e-12;
    let mut min_ratio = f64::INFINITY;
    for j in (k..p.eta.len()).rev() {
        let ratio = p.eta[j] / report.scales[j];
        if ratio > cfg.eta_ratio_slack * min_ratio + floor / report.scales[j] {
            return Err(GmtError::hypothesis(
                "eta(s)/s decreasing",
                format!(
                    "eta/s rises to {ratio:.3e} at scale {:.3e}",
                    report.scales[j]
                ),
            ));
        }
        min_ratio = min_ratio.min(ratio);
    }
    Ok(())
}

/// Largest scan scale ≤ r at which the plane fits, the Dini budget and the
/// monotonicity of η(s)/s all hold for point `idx`.
pub fn admissible_scale(report: &ScanReport, idx: usize, r: f64) -> Option<f64> {
    let p = report.points.get(idx)?;
    let k0 = scale_index(report, r).ok()?;
    (k0..report.scales.len())
        .find(|&k| check_gauge(report, p, k).is_ok())
        .map(|k| report.scales[k])
}

/// Certify point `idx` at its flat scale, the largest scale below which β∞
/// never exceeds the flat threshold. Sheets that part only within that
/// window are then in view of the gauge and fiber checks.
pub fn extract_at_flat_scale(
    t: &PolyChain,
    report: &ScanReport,
    idx: usize,
) -> Result<GraphCertificate> {
    let p = report
        .points
        .get(idx)
        .ok_or_else(|| GmtError::invalid(format!("no scan point {idx}")))?;
    let r = p.flat_scale.ok_or_else(|| {
        GmtError::hypothesis(
            "flat scale",
            "beta_inf exceeds the flat threshold at the finest scale",
        )
    })?;
    extract_graph(t, report, idx, r)
}

/// Certify spt T ∩ B(x, r) as a graph over the plane fitted at scale r:
/// gauge hypotheses from the report, then a fiber scan over B_W(x, r/2)
/// for surjectivity and injectivity, the Lipschitz bound and the drift table.
pub fn extract_graph(
    t: &PolyChain,
    report: &ScanReport,
    idx: usize,
    r: f64,
) -> Result<GraphCertificate> {
    let p = report
        .points
        .get(idx)
        .ok_or_else(|| GmtError::invalid(format!("no scan point {idx}")))?;
    let cfg = &report.config;
    let k = scale_index(report, r)?;
    check_gauge(report, p, k)?;
    let r = report.scales[k];
    let x = &p.x;
    let w = p.cells[k]
        .plane
        .clone()
        .ok_or_else(|| GmtError::hypothesis("plane fit", "no plane at the top scale"))?;
    let m = w.dim();
    let terms = local_terms(t, x, r);
    let grid = plane_ball_grid(m, cfg.fiber_grid);
    let tol = cfg.fiber_tol * r;
    let mut samples: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(grid.len());
    for u in &grid {
        let u: Vec<f64> = u.iter().map(|c| 0.5 * r * c).collect();
        let mut pts = fiber_points(&terms, x, r, &w, &u);
        if pts.is_empty() {
            return Err(GmtError::hypothesis(
                "projection surjectivity",
                format!("empty fiber over {u:?}"),
            ));
        }
        pts.sort_by(|a, b| {
            linalg::norm(&w.perp(&linalg::sub(a, x)))
                .partial_cmp(&linalg::norm(&w.perp(&linalg::sub(b, x))))
                .unwrap()
        });
        let first = pts[0].clone();
        if let Some(other) = pts.iter().find(|q| linalg::dist(q, &first) > tol) {
            return Err(GmtError::hypothesis(
                "fiber injectivity",
                format!("fiber over {u:?} meets the support at {first:?} and {other:?}"),
            ));
        }
        samples.push((u, w.perp(&linalg::sub(&first, x))));
    }
    let mut lip = 0.0f64;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let du = linalg::dist(&samples[i].0, &samples[j].0);
            if du > 1e-12 * r {
                lip = lip.max(linalg::dist(&samples[i].1, &samples[j].1) / du);
            }
        }
    }
    if lip > 1.0 {
        return Err(GmtError::hypothesis(
            "lipschitz",
            format!("graph slope {lip:.3} exceeds 1"),
        ));
    }
    let drift: Vec<DriftRow> = (k..p.drift.len())
        .map(|j| {
            let bound = 24.0 * p.eta[j] + 8.0 * p.dini[j];
            DriftRow {
                scale: report.scales[j],
                drift: p.drift[j],
                bound,
                holds: p.drift[j] <= bound + 1e-12,
            }
        })
        .collect();
    let holder = holder_fit(
        &report.scales[k..p.drift.len()],
        &p.drift[k..],
        cfg.drift_floor,
    );
    Ok(GraphCertificate {
        x: x.clone(),
        radius: r,
        plane: w,
        dini: p.dini[k],
        dini_budget: cfg.dini_budget,
        fibers: samples.len(),
        lipschitz: lip,
        drift,
        holder,
    })
}
