//! Comparison surfaces for near-flat cones.
//!
//! From a polyhedral cone P in general position over a base plane V the
//! pipeline averages the layers, mollifies the result into a 1-homogeneous
//! map v, interpolates between v and the layers on the annulus
//! 1/2 ≤ |x| ≤ 3/4, re-selects the plane W from the graph of v, expands the
//! boundary trace of that graph over W in circle harmonics and replaces the
//! cone inside Z_W(1/4) by the graph of the quarter-scaled degree-2
//! extension. The excess of the result is compared against λ(m).

mod assemble;
mod graph;
mod trace;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use graph::{averaged_graph, mollified_graph, AveragedGraph, MollifiedGraph, LAYER_TOL};
pub use trace::{degree2_extension, lambda, BoundaryTrace, Degree2Extension, TAIL_TOL};

use crate::chain::{ball_mass_exact, boundary, is_cone, PolyChain};
use crate::error::{GmtError, Result};
use crate::geom::{
    decompose_layers, excess_in_ball, height_sup, plane_distance, LayerOptions, OrientedPlane,
};
use crate::linalg;
use crate::moments::{quad_form, select_plane};
use crate::unit_ball_volume;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EpiConfig {
    /// Height bound |y| ≤ ρ over Z_V(1); also the mollifier radius factor.
    pub rho: f64,
    /// Excess bound Exc₁ ≤ ‖g0‖ε.
    pub eps: f64,
    pub mollifier_radial: usize,
    pub mollifier_angular: usize,
    /// Circle-harmonic cutoff K.
    pub harmonic_cutoff: usize,
    /// Uniform samples of the boundary trace.
    pub trace_samples: usize,
    /// Each angular sector of a layer is split into this many pieces.
    pub angular_subdivision: usize,
    pub annulus_rings: usize,
    pub core_rings: usize,
    pub refine_h: f64,
    /// Enforce ε ≤ ρ^{6m}.
    pub strict: bool,
    /// Constant c in sup|w₁| ≤ c·ε.
    pub linear_constant: f64,
    /// Orthonormal frame of V; chosen spectrally from P when absent.
    pub base: Option<Vec<Vec<f64>>>,
}

impl Default for EpiConfig {
    fn default() -> Self {
        EpiConfig {
            rho: 0.1,
            eps: 0.1,
            mollifier_radial: 4,
            mollifier_angular: 16,
            harmonic_cutoff: 32,
            trace_samples: 256,
            angular_subdivision: 2,
            annulus_rings: 8,
            core_rings: 24,
            refine_h: 0.05,
            strict: false,
            linear_constant: 10.0,
            base: None,
        }
    }
}

impl EpiConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return Err(GmtError::invalid(format!(
                "ρ = {} outside (0, 1/2)",
                self.rho
            )));
        }
        if !(self.eps >= 0.0 && self.eps < 0.5) {
            return Err(GmtError::invalid(format!(
                "ε = {} outside [0, 1/2)",
                self.eps
            )));
        }
        if self.harmonic_cutoff == 0 || self.trace_samples < 2 * self.harmonic_cutoff + 1 {
            return Err(GmtError::invalid(
                "trace samples must exceed twice the harmonic cutoff",
            ));
        }
        if self.angular_subdivision == 0 || self.annulus_rings == 0 || self.core_rings == 0 {
            return Err(GmtError::invalid("mesh resolutions must be positive"));
        }
        if self.strict && self.eps > self.rho.powi(6 * m as i32) {
            return Err(GmtError::hypothesis(
                "ε ≤ ρ^{6m}",
                format!(
                    "ε = {:e} but ρ^{} = {:e}",
                    self.eps,
                    6 * m,
                    self.rho.powi(6 * m as i32)
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpiReport {
    pub dim: usize,
    pub ambient: usize,
    pub layers: usize,
    pub g0_norm: f64,
    pub rho: f64,
    pub eps: f64,
    /// sup |π_{V⊥}| over spt P ∩ Z_V(1).
    pub height: f64,
    /// Exc₁(P, V), the cylindrical excess over B_V(0, 1).
    pub exc1: f64,
    /// Exc₁/‖g0‖, the smallest admissible ε.
    pub eps_measured: f64,
    /// M(·⌞B(0,1)) − ‖g0‖α(m) for P, the interpolated chain T and S.
    pub exc_ball_p: f64,
    pub exc_ball_t: f64,
    pub exc_ball_s: f64,
    /// exc_ball_s / exc_ball_p.
    pub ratio: Option<f64>,
    pub lambda: f64,
    pub below_lambda: Option<bool>,
    /// Exc₁(T, V), Exc₁(S, V) and the ratio Exc₁(S, V)/Exc₁(P, V).
    pub exc1_t: f64,
    pub exc1_s: f64,
    pub cylinder_ratio: Option<f64>,
    /// Cylindrical excess over the core polygon of radius 1/4 in W, before
    /// (cone of v) and after (degree-2 graph) the replacement.
    pub core_exc_t: f64,
    pub core_exc_s: f64,
    pub core_ratio: Option<f64>,
    pub energy_cone: f64,
    pub energy_degree2: f64,
    pub energy_ratio: Option<f64>,
    /// |core_ratio − energy_ratio|, the discretization and nonlinearity error.
    pub core_energy_gap: Option<f64>,
    pub trace_l2: f64,
    pub tail_fraction: f64,
    /// sup|w₁| and the gate value c·ε.
    pub w1_sup: f64,
    pub w1_bound: f64,
    /// ‖π_W − π_V‖
    pub plane_drift: f64,
    pub base_frame: Vec<Vec<f64>>,
    pub w_frame: Vec<Vec<f64>>,
    /// M(∂(S − P)) against the tolerance 1e-3·M(P).
    pub boundary_defect: f64,
    pub boundary_tolerance: f64,
    /// M(T⌞B(0,1)) − M(P⌞B(0,1)) and its ratio to ‖g0‖√ρ·ε_measured.
    pub mass_increase: f64,
    pub mass_increase_constant: Option<f64>,
    /// ∫_{B_V(0,1)} Σ_i |v − y^i|² and its ratio to ρ²ε_measured.
    pub dist_to_v: f64,
    pub dist_to_v_constant: Option<f64>,
    /// sup‖Dv‖_HS and its ratio to ε_measured^{1/3}.
    pub dv_sup: f64,
    pub dv_constant: Option<f64>,
    /// All ‖g_i‖ ≥ (3/4)‖g0‖.
    pub density_lower_bound: bool,
    /// Exc₁(P) vanishes to round-off: no ratio is defined.
    pub degenerate: bool,
    pub triangles: usize,
}

/// Below this relative excess the cone counts as flat.
const DEGENERATE_EXCESS: f64 = 1e-10;

/// Build S from the cone P and measure the excess reduction.
pub fn build_comparison(p: &PolyChain, cfg: &EpiConfig) -> Result<(PolyChain, EpiReport)> {
    let m = p.dim();
    if m != 1 && m != 2 {
        return Err(GmtError::Unsupported(format!(
            "comparison surfaces for base dimension {m}"
        )));
    }
    cfg.validate(m)?;
    if !is_cone(p, 1e-12) {
        return Err(
            GmtError::hypothesis("cone", "every simplex must have a vertex at the origin")
                .at("input"),
        );
    }
    let n = p.ambient();
    let origin = vec![0.0; n];

    let v = match &cfg.base {
        Some(frame) => OrientedPlane::new(frame.clone(), 1).map_err(|e| e.at("plane"))?,
        None => {
            let q = quad_form(p, &origin, 1.0, cfg.refine_h).map_err(|e| e.at("plane"))?;
            select_plane(&q, m).map_err(|e| e.at("plane"))?.plane
        }
    };
    let l = decompose_layers(
        p,
        &v,
        &LayerOptions {
            check_radius: 1.0,
            grid: 24,
        },
    )
    .map_err(|e| e.at("decompose"))?;
    if l.boundary_clearance < 2.0 {
        return Err(GmtError::GeneralPosition(format!(
            "projected boundary at distance {:.6} < 2",
            l.boundary_clearance
        ))
        .at("decompose"));
    }
    let g0n = l.g0.norm();
    let height = height_sup(p, &v, 1.0).map_err(|e| e.at("decompose"))?;
    if height > cfg.rho * (1.0 + 1e-9) {
        return Err(GmtError::hypothesis(
            "height",
            format!("sup|y| = {height:.6e} > ρ = {:.6e}", cfg.rho),
        )
        .at("decompose"));
    }
    let exc1 = excess_in_ball(&l, 1.0).map_err(|e| e.at("decompose"))?;
    if exc1 > g0n * cfg.eps * (1.0 + 1e-9) + 1e-15 {
        return Err(GmtError::hypothesis(
            "excess",
            format!("Exc₁ = {exc1:.6e} > ‖g0‖ε = {:.6e}", g0n * cfg.eps),
        )
        .at("decompose"));
    }
    let eps_measured = (exc1 / g0n).max(0.0);

    let avg = averaged_graph(&l)
        .map_err(|e| e.at("average"))?
        .with_bound(cfg.rho);
    let mol = mollified_graph(avg, cfg.rho, cfg.mollifier_radial, cfg.mollifier_angular)
        .map_err(|e| e.at("mollify"))?;

    let frame =
        assemble::angular_frame(&l, p, cfg.angular_subdivision).map_err(|e| e.at("interpolate"))?;
    let vunit: Vec<Vec<f64>> = frame
        .angles
        .par_iter()
        .map(|&th| mol.eval_unit(&assemble::direction(m, th)))
        .collect::<Result<_>>()
        .map_err(|e| e.at("mollify"))?;
    for (th, val) in frame.angles.iter().zip(&vunit) {
        let h = linalg::norm(val);
        if h > 2.0 * cfg.rho * (1.0 + 1e-9) {
            return Err(GmtError::hypothesis(
                "|v| ≤ 2ρ",
                format!("|v| = {h:.6e} at angle {th:.6}"),
            )
            .at("mollify"));
        }
    }

    let w_plane = spectral_plane(&v, &frame.angles, &vunit, cfg.refine_h)
        .map_err(|e| e.at("spectral plane"))?;
    let drift = plane_distance(&v, &w_plane)?;

    let tr = match m {
        2 => trace_over(
            &mol,
            &v,
            &w_plane,
            &frame.angles,
            &vunit,
            cfg.trace_samples,
            cfg.harmonic_cutoff,
        ),
        _ => trace_two_point(&v, &w_plane, &vunit),
    }
    .map_err(|e| e.at("trace"))?;
    if tr.l2_norm2 > 1e-24 {
        tr.check_tail().map_err(|e| e.at("trace"))?;
    }
    let w1 = tr.linear_sup();
    let w1_bound = cfg.linear_constant * cfg.eps;
    if w1 > w1_bound + 1e-12 {
        return Err(GmtError::hypothesis(
            "linear part",
            format!("sup|w₁| = {w1:.6e} > cε = {w1_bound:.6e}"),
        )
        .at("split"));
    }

    let pieces = assemble::assemble(&l, &frame, &vunit, &w_plane, &tr.w0, cfg)
        .map_err(|e| e.at("assemble"))?;
    let group = p.group();
    let mass_of = |ts: &[crate::chain::Term]| {
        ts.iter()
            .map(|t| t.coeff.norm() * t.simplex.volume())
            .sum::<f64>()
    };
    let common_mass = mass_of(&pieces.common);
    let t_core_mass = mass_of(&pieces.t_core);
    let s_core_mass = mass_of(&pieces.s_core);
    let mut t_terms = pieces.outer.clone();
    t_terms.extend(pieces.common.iter().cloned());
    let mut s_terms = t_terms.clone();
    t_terms.extend(pieces.t_core);
    s_terms.extend(pieces.s_core);
    let triangles = s_terms.len();
    let t_chain = PolyChain::from_terms(n, m, group, t_terms)?;
    let s_chain = PolyChain::from_terms(n, m, group, s_terms)?;

    let vol = g0n * unit_ball_volume(m);
    let mass_p = ball_mass_exact(p, &origin, 1.0)?;
    let mass_t = ball_mass_exact(&t_chain, &origin, 1.0)?;
    let mass_s = ball_mass_exact(&s_chain, &origin, 1.0)?;
    let exc_p = mass_p - vol;
    let exc_t = mass_t - vol;
    let exc_s = mass_s - vol;
    let degenerate = exc1 <= DEGENERATE_EXCESS * g0n;
    let ratio = (!degenerate).then(|| exc_s / exc_p);
    let lam = lambda(m);

    // outside the inscribed 3/4 polygon S and T coincide with P
    let exc1_t = exc1 + common_mass + t_core_mass - pieces.replaced_mass;
    let exc1_s = exc1 + common_mass + s_core_mass - pieces.replaced_mass;
    let cylinder_ratio = (!degenerate).then(|| exc1_s / exc1);

    let core_area = g0n * pieces.core_area;
    let core_exc_t = t_core_mass - core_area;
    let core_exc_s = s_core_mass - core_area;
    let core_ratio = (!degenerate && core_exc_t > 0.0).then(|| core_exc_s / core_exc_t);
    let energy_ratio = tr.energy_ratio();

    let defect = boundary(&s_chain.try_sub(p)?)?.mass().abs();
    let tol = 1e-3 * p.mass();
    if defect > tol {
        return Err(GmtError::Degenerate(format!(
            "boundary defect {defect:.3e} exceeds {tol:.3e}"
        ))
        .at("assemble"));
    }

    let diag = diagnostics(&l, &mol, m).map_err(|e| e.at("diagnostics"))?;
    let positive = |x: f64| (x > 0.0).then_some(x);
    let report = EpiReport {
        dim: m,
        ambient: n,
        layers: l.layers.len(),
        g0_norm: g0n,
        rho: cfg.rho,
        eps: cfg.eps,
        height,
        exc1,
        eps_measured,
        exc_ball_p: exc_p,
        exc_ball_t: exc_t,
        exc_ball_s: exc_s,
        ratio,
        lambda: lam,
        below_lambda: ratio.map(|r| r <= lam),
        exc1_t,
        exc1_s,
        cylinder_ratio,
        core_exc_t,
        core_exc_s,
        core_ratio,
        energy_cone: tr.cone_energy(),
        energy_degree2: tr.degree2_energy(),
        energy_ratio,
        core_energy_gap: core_ratio.zip(energy_ratio).map(|(a, b)| (a - b).abs()),
        trace_l2: tr.l2_norm2,
        tail_fraction: tr.tail_fraction,
        w1_sup: w1,
        w1_bound,
        plane_drift: drift,
        base_frame: v.frame().to_vec(),
        w_frame: w_plane.frame().to_vec(),
        boundary_defect: defect,
        boundary_tolerance: tol,
        mass_increase: mass_t - mass_p,
        mass_increase_constant: positive(eps_measured)
            .map(|e| (mass_t - mass_p) / (g0n * cfg.rho.sqrt() * e)),
        dist_to_v: diag.0,
        dist_to_v_constant: positive(eps_measured).map(|e| diag.0 / (cfg.rho * cfg.rho * e)),
        dv_sup: diag.1,
        dv_constant: positive(eps_measured).map(|e| diag.1 / e.cbrt()),
        density_lower_bound: l.density_lower_bound_holds(),
        degenerate,
        triangles,
    };
    Ok((s_chain, report))
}

/// W from the quadratic form of the graph of v over B_V(0, 5/4), oriented
/// like V.
fn spectral_plane(
    v: &OrientedPlane,
    angles: &[f64],
    vunit: &[Vec<f64>],
    refine_h: f64,
) -> Result<OrientedPlane> {
    let m = v.dim();
    let n = v.ambient();
    let reach = 1.25;
    let rim: Vec<Vec<f64>> = angles
        .iter()
        .zip(vunit)
        .map(|(&th, val)| {
            linalg::scale(
                &linalg::add(&v.embed(&assemble::direction(m, th)), val),
                reach,
            )
        })
        .collect();
    let origin = vec![0.0; n];
    let tris: Vec<Vec<Vec<f64>>> = if m == 2 {
        (0..rim.len())
            .map(|j| {
                vec![
                    origin.clone(),
                    rim[j].clone(),
                    rim[(j + 1) % rim.len()].clone(),
                ]
            })
            .collect()
    } else {
        vec![
            vec![origin.clone(), rim[0].clone()],
            vec![rim[1].clone(), origin.clone()],
        ]
    };
    let tv = PolyChain::from_simplices(&tris, crate::coeff::Coeff::Integer(1))?;
    let sel = select_plane(&quad_form(&tv, &origin, 1.0, refine_h)?, m)?;
    align(v, sel.plane)
}

/// Flip w so that projecting it onto v preserves orientation.
fn align(v: &OrientedPlane, w: OrientedPlane) -> Result<OrientedPlane> {
    let det = v.projected_det(w.frame());
    if det > 0.0 {
        return Ok(w);
    }
    if det == 0.0 {
        return Err(GmtError::GeneralPosition(
            "selected plane is orthogonal to the base".into(),
        ));
    }
    let mut f = w.frame().to_vec();
    if f.len() == 1 {
        f[0] = linalg::scale(&f[0], -1.0);
    } else {
        f.swap(0, 1);
    }
    OrientedPlane::new(f, 1)
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

fn arg_in(w: &OrientedPlane, x: &[f64]) -> f64 {
    let c = w.coords(x);
    c[1].atan2(c[0])
}

/// Boundary trace over W of the graph of v (m = 2): for each uniform
/// W-angle, the V-angle whose graph point projects onto that ray is found
/// by Illinois-type regula falsi between consecutive mesh angles.
pub fn trace_over(
    mol: &MollifiedGraph<'_>,
    v: &OrientedPlane,
    w: &OrientedPlane,
    angles: &[f64],
    vunit: &[Vec<f64>],
    samples: usize,
    cutoff: usize,
) -> Result<BoundaryTrace> {
    let k = angles.len();
    let q = |th: f64, val: &[f64]| linalg::add(&v.embed(&[th.cos(), th.sin()]), val);
    let phi: Vec<f64> = angles
        .iter()
        .zip(vunit)
        .map(|(&th, val)| arg_in(w, &q(th, val)))
        .collect();
    let mut unwrapped = vec![phi[0]];
    for j in 0..k {
        let d = wrap_pi(phi[(j + 1) % k] - phi[j]);
        if d <= 0.0 {
            return Err(GmtError::GeneralPosition(format!(
                "graph of v is not a graph over W near angle {:.6}",
                angles[j]
            )));
        }
        unwrapped.push(unwrapped[j] + d);
    }
    if (unwrapped[k] - unwrapped[0] - 2.0 * PI).abs() > 1e-9 {
        return Err(GmtError::GeneralPosition(
            "graph of v winds more than once around W".into(),
        ));
    }
    let h = 2.0 * PI / samples as f64;
    let values: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let target = unwrapped[0] + (i as f64 * h - unwrapped[0]).rem_euclid(2.0 * PI);
            let j = unwrapped.partition_point(|&x| x <= target).clamp(1, k) - 1;
            let mut ta = angles[j];
            let mut tb = if j + 1 == k {
                angles[0] + 2.0 * PI
            } else {
                angles[j + 1]
            };
            let mut ga = unwrapped[j] - target;
            let mut gb = unwrapped[j + 1] - target;
            let point = |th: f64| -> Result<Vec<f64>> {
                let val = mol.eval_unit(&[th.cos(), th.sin()])?;
                Ok(q(th, &val))
            };
            let mut best = if ga.abs() <= gb.abs() { ta } else { tb };
            let mut side = 0i8;
            for _ in 0..80 {
                if ga.abs() < 1e-13 {
                    best = ta;
                    break;
                }
                if gb.abs() < 1e-13 || (tb - ta).abs() < 1e-15 {
                    best = tb;
                    break;
                }
                let tc = tb - gb * (tb - ta) / (gb - ga);
                let gc = wrap_pi(arg_in(w, &point(tc)?) - target);
                best = tc;
                if gc == 0.0 {
                    break;
                }
                if (gc < 0.0) == (ga < 0.0) {
                    ta = tc;
                    ga = gc;
                    if side == -1 {
                        gb *= 0.5;
                    }
                    side = -1;
                } else {
                    tb = tc;
                    gb = gc;
                    if side == 1 {
                        ga *= 0.5;
                    }
                    side = 1;
                }
            }
            let x = point(best)?;
            let r = linalg::norm(&w.coords(&x));
            Ok(linalg::scale(&w.perp(&x), 1.0 / r))
        })
        .collect::<Result<_>>()?;
    BoundaryTrace::from_samples(w, values, cutoff)
}

/// Trace on S⁰ ⊂ W (m = 1): the two graph points rescaled to W-coordinate ±1.
fn trace_two_point(
    v: &OrientedPlane,
    w: &OrientedPlane,
    vunit: &[Vec<f64>],
) -> Result<BoundaryTrace> {
    let mut samples = Vec::with_capacity(2);
    for (sign, val) in [1.0, -1.0].iter().zip(vunit) {
        let x = linalg::add(&v.embed(&[*sign]), val);
        let c = w.coords(&x)[0];
        if c * sign <= 0.0 {
            return Err(GmtError::GeneralPosition(
                "graph of v is not a graph over W".into(),
            ));
        }
        samples.push(linalg::scale(&w.perp(&x), 1.0 / c.abs()));
    }
    BoundaryTrace::from_samples(w, samples, 1)
}

/// (∫_{B_V(0,1)} Σ_i |v − y^i|², sup‖Dv‖_HS), both from the unit sphere
/// by homogeneity.
fn diagnostics(
    l: &crate::geom::LayerDecomposition,
    mol: &MollifiedGraph<'_>,
    m: usize,
) -> Result<(f64, f64)> {
    let spread = |e: &[f64], val: &[f64]| -> f64 {
        l.layers_at(e, LAYER_TOL)
            .into_iter()
            .map(|i| linalg::norm2(&linalg::sub(val, &l.layers[i].eval(e))))
            .sum()
    };
    if m == 1 {
        let mut dist = 0.0;
        let mut dv = 0.0f64;
        for s in [1.0, -1.0] {
            let val = mol.eval_unit(&[s])?;
            dist += spread(&[s], &val) / 3.0;
            dv = dv.max(linalg::norm(&val));
        }
        return Ok((dist, dv));
    }
    let k = 2048;
    let h = 2.0 * PI / k as f64;
    let vals: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|j| {
            let th = (j as f64 + 0.5) * h;
            mol.eval_unit(&[th.cos(), th.sin()])
        })
        .collect::<Result<_>>()?;
    let mut dist = 0.0;
    let mut dv = 0.0f64;
    for j in 0..k {
        let th = (j as f64 + 0.5) * h;
        dist += spread(&[th.cos(), th.sin()], &vals[j]);
        let d = linalg::scale(
            &linalg::sub(&vals[(j + 1) % k], &vals[(j + k - 1) % k]),
            0.5 / h,
        );
        dv = dv.max((linalg::norm2(&vals[j]) + linalg::norm2(&d)).sqrt());
    }
    Ok((0.25 * dist * h, dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::generate::{cone_harmonic, cone_over_profile, flat_disk};

    #[test]
    fn flat_cone_is_degenerate() {
        let p = flat_disk(64, 3, Coeff::Integer(1)).unwrap().dilate(2.5);
        let (s, rep) = build_comparison(&p, &EpiConfig::default()).unwrap();
        assert!(rep.degenerate);
        assert!(rep.ratio.is_none());
        assert!(rep.exc1.abs() < 1e-12);
        assert!(rep.boundary_defect < 1e-9);
        assert!((s.mass() - p.mass()).abs() < 1e-9);
        assert!(rep.w1_sup < 1e-15);
    }

    #[test]
    fn quadratic_cone_ratios() {
        let p = cone_harmonic(2, 0.05, 256, 2.5).unwrap();
        let (_, rep) = build_comparison(&p, &EpiConfig::default()).unwrap();
        let r = rep.ratio.unwrap();
        assert!(r <= rep.lambda, "{r}");
        let c = rep.core_ratio.unwrap();
        assert!((c - 0.8).abs() < 0.05, "core ratio {c}");
        assert!((rep.energy_ratio.unwrap() - 0.8).abs() < 0.01);
        assert!(rep.plane_drift < 1e-6);
        assert!(rep.boundary_defect < 1e-6, "{}", rep.boundary_defect);
        assert!(rep.tail_fraction < 1e-3);
    }

    #[test]
    fn amplitude_doubling_keeps_the_ratio() {
        let cfg = EpiConfig::default();
        let a = build_comparison(&cone_harmonic(2, 0.02, 256, 2.5).unwrap(), &cfg)
            .unwrap()
            .1;
        let b = build_comparison(&cone_harmonic(2, 0.04, 256, 2.5).unwrap(), &cfg)
            .unwrap()
            .1;
        let q = b.exc_ball_p / a.exc_ball_p;
        assert!((q - 4.0).abs() < 0.05, "{q}");
        assert!((b.exc_ball_s / a.exc_ball_s - 4.0).abs() < 0.1);
        assert!((a.ratio.unwrap() - b.ratio.unwrap()).abs() < 0.02 * a.ratio.unwrap());
    }

    #[test]
    fn tilted_cone_plane_reselection() {
        // tilted plane with a small quadratic term: W absorbs the tilt
        let p = cone_over_profile(256, 2.5, |t| 0.08 * t.cos() + 0.01 * (2.0 * t).cos()).unwrap();
        let cfg = EpiConfig {
            base: Some(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]),
            ..EpiConfig::default()
        };
        let (_, rep) = build_comparison(&p, &cfg).unwrap();
        assert!(rep.plane_drift > 0.05);
        assert!(rep.w1_sup < 0.05 * 0.08, "{}", rep.w1_sup);
        assert!(rep.ratio.unwrap() <= rep.lambda);
    }

    #[test]
    fn rejects_tall_cones() {
        let p = cone_harmonic(2, 0.2, 64, 2.5).unwrap();
        let e = build_comparison(&p, &EpiConfig::default()).unwrap_err();
        assert!(e.is_gate_failure());
    }

    #[test]
    fn one_dimensional_cone() {
        // two rays with heights 0.05 and 0.03: the even part is flattened
        let p = PolyChain::from_simplices(
            &[
                vec![vec![0.0, 0.0], vec![2.5, 0.125]],
                vec![vec![-2.5, 0.075], vec![0.0, 0.0]],
            ],
            Coeff::Integer(1),
        )
        .unwrap();
        let cfg = EpiConfig {
            base: Some(vec![vec![1.0, 0.0]]),
            ..EpiConfig::default()
        };
        let (_, rep) = build_comparison(&p, &cfg).unwrap();
        assert!((rep.lambda - 47.0 / 48.0).abs() < 1e-15);
        assert!(rep.ratio.unwrap() <= rep.lambda, "{:?}", rep.ratio);
        assert!(rep.boundary_defect < 1e-9);
    }
}
