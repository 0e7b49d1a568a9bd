//! Spherical excess, gauges and almost-monotonicity checks, the excess-decay
//! bound for mass functions obeying the almost-minimality ODE, and a probe
//! that tries to refute almost-minimality with explicit competitors.

use serde::{Deserialize, Serialize};

use crate::chain::{boundary, cone, restrict_ball, Ball, PolyChain};
use crate::error::{GmtError, Result};
use crate::linalg;
use crate::measure::DensityProfile;

/// Default λ for dimension m, the constant of the mass comparison.
pub fn default_lambda(m: usize) -> f64 {
    crate::epi::lambda(m)
}

/// m(1 − λ^{1/4})/λ^{1/4}.
pub fn alpha0(m: usize, lambda: f64) -> f64 {
    let q = lambda.powf(0.25);
    m as f64 * (1.0 - q) / q
}

/// Increasing modulus ξ : (0, δ] → [0, ∞) with ξ(0+) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Gauge {
    /// ξ ≡ 0.
    Zero,
    /// c·r^alpha on (0, delta].
    Power { c: f64, alpha: f64, delta: f64 },
    /// Samples on increasing radii, interpolated log-log and extended below
    /// the first radius by the local power law.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl Gauge {
    pub fn power(c: f64, alpha: f64, delta: f64) -> Result<Gauge> {
        let g = Gauge::Power { c, alpha, delta };
        g.validate()?;
        Ok(g)
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Gauge> {
        let g = Gauge::Tabulated { radii, values };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Gauge::Zero => Ok(()),
            Gauge::Power { c, alpha, delta } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(GmtError::invalid(format!(
                        "gauge constant must be positive, got {c}"
                    )));
                }
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(GmtError::invalid(format!(
                        "gauge exponent must lie in (0, 1], got {alpha}"
                    )));
                }
                if !(*delta > 0.0) {
                    return Err(GmtError::invalid(format!(
                        "gauge domain must be positive, got {delta}"
                    )));
                }
                Ok(())
            }
            Gauge::Tabulated { radii, values } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err(GmtError::invalid(
                        "tabulated gauge needs at least two (radius, value) pairs",
                    ));
                }
                if !(radii[0] > 0.0) || radii.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(GmtError::invalid(
                        "tabulated gauge radii must be positive and increasing",
                    ));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
                    || values.windows(2).any(|w| w[1] < w[0])
                {
                    return Err(GmtError::invalid(
                        "tabulated gauge values must be finite, nonnegative, nondecreasing",
                    ));
                }
                if values[0] > 0.0 && !(self.head_exponent() > 0.0) {
                    return Err(GmtError::invalid("tabulated gauge does not tend to 0 at 0"));
                }
                Ok(())
            }
        }
    }

    /// Upper end of the domain.
    pub fn delta(&self) -> f64 {
        match self {
            Gauge::Zero => f64::INFINITY,
            Gauge::Power { delta, .. } => *delta,
            Gauge::Tabulated { radii, .. } => *radii.last().unwrap(),
        }
    }

    fn head_exponent(&self) -> f64 {
        match self {
            Gauge::Tabulated { radii, values } => {
                local_exponent(radii[0], radii[1], values[0], values[1])
            }
            Gauge::Power { alpha, .. } => *alpha,
            Gauge::Zero => f64::INFINITY,
        }
    }

    /// Largest local power-law exponent on the table (α itself for a power law).
    pub fn exponent(&self) -> f64 {
        match self {
            Gauge::Zero => 1.0,
            Gauge::Power { alpha, .. } => *alpha,
            Gauge::Tabulated { radii, values } => (0..radii.len() - 1)
                .map(|i| local_exponent(radii[i], radii[i + 1], values[i], values[i + 1]))
                .filter(|a| a.is_finite())
                .fold(0.0, f64::max),
        }
    }

    /// ξ(r); beyond the domain the last value is held.
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Gauge::Zero => 0.0,
            Gauge::Power { c, alpha, delta } => c * r.min(*delta).max(0.0).powf(*alpha),
            Gauge::Tabulated { radii, values } => {
                if r <= 0.0 {
                    return 0.0;
                }
                let n = radii.len();
                if r <= radii[0] {
                    if values[0] == 0.0 {
                        return 0.0;
                    }
                    return values[0] * (r / radii[0]).powf(self.head_exponent());
                }
                if r >= radii[n - 1] {
                    return values[n - 1];
                }
                let i = radii.partition_point(|&x| x <= r) - 1;
                let (r0, r1, v0, v1) = (radii[i], radii[i + 1], values[i], values[i + 1]);
                if v0 > 0.0 {
                    v0 * (r / r0).powf(local_exponent(r0, r1, v0, v1))
                } else {
                    v0 + (v1 - v0) * (r - r0) / (r1 - r0)
                }
            }
        }
    }
}

fn local_exponent(r0: f64, r1: f64, v0: f64, v1: f64) -> f64 {
    if v0 > 0.0 && v1 > 0.0 {
        (v1 / v0).ln() / (r1 / r0).ln()
    } else if v0 == 0.0 && v1 == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Ξ(r) = m∫₀^r ξ(t)/t dt. Closed form for power laws; tables are integrated
/// exactly for their log-log interpolant, with the power-law head below the
/// first radius.
pub fn gauge_integral(xi: &Gauge, m: usize) -> Result<Gauge> {
    xi.validate()?;
    let mf = m as f64;
    match xi {
        Gauge::Zero => Ok(Gauge::Zero),
        Gauge::Power { c, alpha, delta } => Ok(Gauge::Power {
            c: mf * c / alpha,
            alpha: *alpha,
            delta: *delta,
        }),
        Gauge::Tabulated { radii, values } => {
            let head = if values[0] == 0.0 {
                0.0
            } else {
                let a = xi.head_exponent();
                if !(a > 0.0) {
                    return Err(GmtError::hypothesis("dini", "gauge integral diverges at 0"));
                }
                values[0] / a
            };
            let mut acc = head;
            let mut out = vec![mf * acc];
            for i in 0..radii.len() - 1 {
                let (r0, r1, v0, v1) = (radii[i], radii[i + 1], values[i], values[i + 1]);
                let piece = if v0 > 0.0 {
                    let a = local_exponent(r0, r1, v0, v1);
                    if a.abs() < 1e-12 {
                        v0 * (r1 / r0).ln()
                    } else {
                        (v1 - v0) / a
                    }
                } else {
                    // linear from zero: ∫ v1 (t − r0)/(r1 − r0) / t dt
                    v1 * (1.0 - r0 / (r1 - r0) * (r1 / r0).ln())
                };
                acc += piece;
                out.push(mf * acc);
            }
            if !acc.is_finite() {
                return Err(GmtError::hypothesis("dini", "gauge integral is not finite"));
            }
            Ok(Gauge::Tabulated {
                radii: radii.clone(),
                values: out,
            })
        }
    }
}

/// Pointwise relations between ξ and Ξ on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct GaugeChecks {
    pub exponent: f64,
    /// min over the grid of Ξ − (m/α)ξ.
    pub dominance_slack: f64,
    pub dominance_holds: bool,
    /// inf over the grid of Ξ/(Ξ + ξ).
    pub min_ratio: f64,
    /// m/(m + α), below which λ ≤ Ξ/(Ξ + ξ) is expected.
    pub ratio_threshold: f64,
}

impl GaugeChecks {
    /// λ ≤ Ξ/(Ξ+ξ) on the grid, when λ is in the range where it is claimed.
    pub fn ratio_bound_holds(&self, lambda: f64) -> Option<bool> {
        (lambda <= self.ratio_threshold).then(|| lambda <= self.min_ratio * (1.0 + 1e-12))
    }
}

pub fn gauge_checks(xi: &Gauge, m: usize, radii: &[f64]) -> Result<GaugeChecks> {
    let big = gauge_integral(xi, m)?;
    let alpha = xi.exponent();
    let mf = m as f64;
    let mut slack = f64::INFINITY;
    let mut ratio = 1.0f64;
    for &r in radii {
        let (s, b) = (xi.eval(r), big.eval(r));
        let scale = b.abs().max(1e-300);
        slack = slack.min(b - mf / alpha * s + 1e-12 * scale);
        if b + s > 0.0 {
            ratio = ratio.min(b / (b + s));
        }
    }
    Ok(GaugeChecks {
        exponent: alpha,
        dominance_slack: slack,
        dominance_holds: slack >= 0.0,
        min_ratio: ratio,
        ratio_threshold: mf / (mf + alpha),
    })
}

/// Spherical excess triple at radius r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalExcess {
    /// Largest drop of the density ratio from a smaller to a larger radius.
    pub lower: f64,
    /// Largest rise.
    pub upper: f64,
    pub total: f64,
}

pub fn spherical_excess(profile: &DensityProfile, r: f64) -> Result<SphericalExcess> {
    let (lower, upper, total) = profile.excess(r)?;
    Ok(SphericalExcess {
        lower,
        upper,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstPair {
    pub s: f64,
    pub t: f64,
    /// exp(Ξ(s))ratio(s) − exp(Ξ(t))ratio(t), before error bars.
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneCheck {
    pub pass: bool,
    pub worst: WorstPair,
}

/// Check r ↦ exp(Ξ(r))·ratio(r) nondecreasing on grid pairs, allowing each
/// value its error bar.
pub fn almost_monotone_check(profile: &DensityProfile, big_xi: &Gauge) -> MonotoneCheck {
    let n = profile.radii.len();
    let g: Vec<f64> = (0..n)
        .map(|i| big_xi.eval(profile.radii[i]).exp() * profile.values[i])
        .collect();
    let e: Vec<f64> = (0..n)
        .map(|i| big_xi.eval(profile.radii[i]).exp() * profile.errors[i] + 1e-12 * g[i].abs())
        .collect();
    let mut worst = WorstPair {
        s: profile.radii[0],
        t: profile.radii[0],
        gap: f64::NEG_INFINITY,
    };
    let mut pass = true;
    // running maxima of g(s) and g(s) − e(s) over s ≤ t
    let (mut best_raw, mut best_raw_i) = (f64::NEG_INFINITY, 0);
    let mut best_tol = f64::NEG_INFINITY;
    for t in 0..n {
        if g[t] - e[t] > best_tol {
            best_tol = g[t] - e[t];
        }
        if g[t] > best_raw {
            best_raw = g[t];
            best_raw_i = t;
        }
        let gap = best_raw - g[t];
        if gap > worst.gap {
            worst = WorstPair {
                s: profile.radii[best_raw_i],
                t: profile.radii[t],
                gap,
            };
        }
        if best_tol - g[t] - e[t] > 0.0 {
            pass = false;
        }
    }
    MonotoneCheck { pass, worst }
}

/// Limit of the density ratio as r → 0 by a Cauchy test on the `tail`
/// smallest radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityLimit {
    pub value: f64,
    pub spread: f64,
    pub exists: bool,
}

pub fn density_limit(profile: &DensityProfile, tail: usize, tol: f64) -> Result<DensityLimit> {
    let k = tail.min(profile.values.len());
    if k == 0 {
        return Err(GmtError::invalid("density limit needs a nonempty tail"));
    }
    let vals = &profile.values[..k];
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let err = profile.errors[..k].iter().cloned().fold(0.0, f64::max);
    Ok(DensityLimit {
        value: profile.values[0],
        spread: hi - lo,
        exists: hi - lo <= tol + 2.0 * err,
    })
}

/// Additive term 2^{m+6}·max(η, ε) allowed when the excess center moves by η.
pub fn weak_dini_allowance(m: usize, eta: f64, eps: f64) -> f64 {
    2f64.powi(m as i32 + 6) * eta.max(eps)
}

/// Input of the decay verifier: a sampled mass function f on increasing
/// radii whose last entry is r₀.
#[derive(Debug, Clone)]
pub struct DecayProblem<'a> {
    pub radii: &'a [f64],
    pub mass: &'a [f64],
    /// Lower mass constant, so that θr^m ≤ exp(Ξ)f.
    pub theta: f64,
    pub m: usize,
    pub xi: &'a Gauge,
    pub lambda: f64,
    /// Defaults to the smallest admissible value (1 + ξ(r₀))√λ.
    pub lambda0: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub r: f64,
    pub mass: f64,
    pub derivative: f64,
    /// RHS − f of the differential inequality, and the allowed shortfall.
    pub ode_slack: f64,
    pub ode_tolerance: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub r0: f64,
    pub lambda: f64,
    pub lambda0: f64,
    pub xi_r0: f64,
    pub big_xi_r0: f64,
    pub rows: Vec<DecayRow>,
    pub min_slack: f64,
    pub conclusion_holds: bool,
    /// λ₀ ≤ Ξ/(Ξ+ξ) on the grid. Not gated; see `ratio_min`.
    pub ratio_hypothesis: bool,
    pub ratio_min: f64,
}

/// Verify the excess-decay bound exp(Ξ)f/r^m − θ ≤ Ξ(r)(Ξ(r₀)^{-1}(exp(Ξ(r₀))f(r₀)/r₀^m − θ) + 8θ)
/// on the grid, after gating its hypotheses:
/// θr^m ≤ exp(Ξ)f, f ≤ (1+ξ)(r/m)(λf′ + (1−λ)θmr^{m−1}) up to discretization,
/// (1+ξ(r₀))√λ ≤ λ₀ < 1, exp(Ξ(r₀)) ≤ 2, and ξ ≤ Ξ.
pub fn decay_bound(p: &DecayProblem) -> Result<DecayReport> {
    let n = p.radii.len();
    if n < 3 || p.mass.len() != n {
        return Err(GmtError::invalid(
            "decay_bound needs at least three radii with matching masses",
        ));
    }
    if !(p.radii[0] > 0.0) || p.radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GmtError::invalid("radii must be positive and increasing"));
    }
    if p.m == 0 {
        return Err(GmtError::invalid("dimension must be positive"));
    }
    if !(p.lambda > 0.0 && p.lambda < 1.0) {
        return Err(GmtError::invalid(format!(
            "lambda must lie in (0, 1), got {}",
            p.lambda
        )));
    }
    if !(p.theta > 0.0) {
        return Err(GmtError::invalid("theta must be positive"));
    }
    p.xi.validate()?;
    let big = gauge_integral(p.xi, p.m)?;
    let mf = p.m as f64;
    let r0 = p.radii[n - 1];
    if r0 > p.xi.delta() * (1.0 + 1e-12) {
        return Err(GmtError::invalid("grid exceeds the gauge domain"));
    }
    let xi_r0 = p.xi.eval(r0);
    let big_r0 = big.eval(r0);
    let floor = (1.0 + xi_r0) * p.lambda.sqrt();
    let lambda0 = p.lambda0.unwrap_or(floor);
    if !(lambda0 >= floor * (1.0 - 1e-15) && lambda0 < 1.0) {
        return Err(GmtError::hypothesis(
            "lambda0",
            format!("need (1+xi(r0))sqrt(lambda) = {floor} <= lambda0 = {lambda0} < 1"),
        ));
    }
    if big_r0.exp() > 2.0 {
        return Err(GmtError::hypothesis(
            "dini size",
            format!("exp(Xi(r0)) = {} > 2", big_r0.exp()),
        ));
    }
    if !(big_r0 > 0.0) {
        return Err(GmtError::hypothesis("dini size", "Xi(r0) must be positive"));
    }
    // one-sided difference quotients; the forward/backward spread bounds the
    // discretization error of f′
    let fwd: Vec<f64> = (0..n - 1)
        .map(|i| (p.mass[i + 1] - p.mass[i]) / (p.radii[i + 1] - p.radii[i]))
        .collect();
    let deriv = |i: usize| if i + 1 < n { fwd[i] } else { fwd[n - 2] };
    let spread = |i: usize| {
        if n < 3 {
            0.0
        } else if i == 0 {
            (fwd[1] - fwd[0]).abs()
        } else if i + 1 >= n {
            (fwd[n - 2] - fwd[n - 3]).abs()
        } else {
            (fwd[i] - fwd[i - 1]).abs()
        }
    };
    let bracket =
        (big_r0.exp() * p.mass[n - 1] / r0.powi(p.m as i32) - p.theta) / big_r0 + 8.0 * p.theta;
    let mut rows = Vec::with_capacity(n);
    let mut ratio_min = f64::INFINITY;
    for i in 0..n {
        let r = p.radii[i];
        let f = p.mass[i];
        let (s, b) = (p.xi.eval(r), big.eval(r));
        if s > b * (1.0 + 1e-12) {
            return Err(GmtError::hypothesis(
                "gauge",
                format!("xi(r) = {s} > Xi(r) = {b} at r = {r}"),
            ));
        }
        let rm = r.powi(p.m as i32);
        if p.theta * rm > b.exp() * f * (1.0 + 1e-12) {
            return Err(GmtError::hypothesis(
                "lower mass",
                format!(
                    "theta r^m = {} > exp(Xi) f = {} at r = {r}",
                    p.theta * rm,
                    b.exp() * f
                ),
            ));
        }
        let d = deriv(i);
        let coef = (1.0 + s) * r / mf;
        let rhs_ode =
            coef * (p.lambda * d + (1.0 - p.lambda) * p.theta * mf * r.powi(p.m as i32 - 1));
        let ode_slack = rhs_ode - f;
        let ode_tol = coef * p.lambda * spread(i) + 1e-12 * f.abs();
        if ode_slack < -ode_tol {
            return Err(GmtError::hypothesis(
                "differential inequality",
                format!("f = {f} exceeds {rhs_ode} (tolerance {ode_tol}) at r = {r}"),
            ));
        }
        if b + s > 0.0 {
            ratio_min = ratio_min.min(b / (b + s));
        }
        let lhs = b.exp() * f / rm - p.theta;
        let rhs = b * bracket;
        rows.push(DecayRow {
            r,
            mass: f,
            derivative: d,
            ode_slack,
            ode_tolerance: ode_tol,
            lhs,
            rhs,
            slack: rhs - lhs,
        });
    }
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    Ok(DecayReport {
        r0,
        lambda: p.lambda,
        lambda0,
        xi_r0,
        big_xi_r0: big_r0,
        conclusion_holds: min_slack > 0.0,
        min_slack,
        ratio_hypothesis: lambda0 <= ratio_min,
        ratio_min,
        rows,
    })
}

/// One competitor's comparison M(T⌞B) ≤ (1+ξ(r))·M(T⌞B + S).
#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntry {
    pub label: String,
    pub mass_after: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub center: Vec<f64>,
    pub radius: f64,
    pub xi: f64,
    pub mass_in_ball: f64,
    /// Mass of leaves straddling the sphere in the polyhedral restriction.
    pub restriction_error: f64,
    pub entries: Vec<ProbeEntry>,
    pub refuted: bool,
    /// A finite probe can refute almost-minimality but never certify it.
    pub verdict: String,
}

/// Polyhedral T⌞B(x, r) used by the probe, for building competitors.
pub fn ball_piece(t: &PolyChain, x: &[f64], r: f64, refine_h: f64) -> Result<PolyChain> {
    Ok(restrict_ball(t, &Ball::new(x.to_vec(), r)?, refine_h)?.chain)
}

/// Test M(T⌞B(x,r)) ≤ (1+ξ(r))M(T⌞B(x,r) + S) for each competitor S and for
/// the cone competitor ⟦x⟧⌒∂(T⌞B) − T⌞B. Competitors must be cycles supported
/// in the ball (enlarged by `refine_h`, the reach of the restriction).
pub fn almost_minimal_probe(
    t: &PolyChain,
    x: &[f64],
    r: f64,
    competitors: &[PolyChain],
    xi: &Gauge,
    refine_h: f64,
) -> Result<ProbeReport> {
    xi.validate()?;
    let rest = restrict_ball(t, &Ball::new(x.to_vec(), r)?, refine_h)?;
    let piece = rest.chain;
    let lhs = piece.mass();
    let xr = xi.eval(r);
    let reach = r + refine_h;
    let mut list: Vec<(String, PolyChain)> = Vec::with_capacity(competitors.len() + 1);
    for (i, s) in competitors.iter().enumerate() {
        if s.dim() != t.dim() || s.ambient() != t.ambient() {
            return Err(GmtError::DimensionMismatch(format!("competitor {i}")));
        }
        let far = s
            .support_vertices()
            .iter()
            .map(|v| linalg::norm(&linalg::sub(v, x)))
            .fold(0.0, f64::max);
        if far > reach * (1.0 + 1e-12) {
            return Err(GmtError::hypothesis(
                "competitor support",
                format!("competitor {i} reaches distance {far} > {reach}"),
            ));
        }
        let bd = boundary(s)?.mass();
        if bd > 1e-9 * s.mass().max(1.0) {
            return Err(GmtError::hypothesis(
                "competitor boundary",
                format!("competitor {i} has boundary mass {bd}"),
            ));
        }
        list.push((format!("competitor {i}"), s.clone()));
    }
    if t.dim() < t.ambient() {
        let cone_part = cone(x, &boundary(&piece)?)?;
        list.push(("cone".into(), cone_part.try_sub(&piece)?));
    }
    let tol = 1e-9 * lhs.max(1e-300);
    let entries: Vec<ProbeEntry> = list
        .into_iter()
        .map(|(label, s)| {
            let after = piece.try_add(&s)?.mass();
            let bound = (1.0 + xr) * after;
            Ok(ProbeEntry {
                label,
                mass_after: after,
                bound,
                holds: lhs <= bound + tol,
            })
        })
        .collect::<Result<_>>()?;
    let refuted = entries.iter().any(|e| !e.holds);
    Ok(ProbeReport {
        center: x.to_vec(),
        radius: r,
        xi: xr,
        mass_in_ball: lhs,
        restriction_error: rest.mass_error,
        entries,
        refuted,
        verdict: if refuted { "refuted" } else { "not refuted" }.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::generate::{annulus, cone_harmonic, flat_disk, holder_graph};
    use crate::measure::geometric_grid;
    use crate::unit_ball_volume;

    #[test]
    fn power_gauge_integral() {
        let xi = Gauge::power(1.0, 0.5, 1.0).unwrap();
        let big = gauge_integral(&xi, 2).unwrap();
        assert!((big.eval(0.25) - 2.0).abs() < 1e-14);
        let lin = gauge_integral(&Gauge::power(0.3, 1.0, 1.0).unwrap(), 2).unwrap();
        assert!((lin.eval(0.5) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn ratio_threshold_is_attained_by_power_laws() {
        let xi = Gauge::power(0.7, 1.0, 1.0).unwrap();
        let c = gauge_checks(&xi, 2, &geometric_grid(1e-4, 1.0, 50)).unwrap();
        assert!((c.ratio_threshold - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.min_ratio - 2.0 / 3.0).abs() < 1e-12);
        assert!(c.dominance_holds);
        assert_eq!(c.ratio_bound_holds(2.0 / 3.0), Some(true));
        assert_eq!(c.ratio_bound_holds(0.9), None);
    }

    #[test]
    fn tabulated_integral_matches_closed_form() {
        let radii = geometric_grid(1e-3, 1.0, 40);
        let values: Vec<f64> = radii.iter().map(|r| 0.2 * r.sqrt()).collect();
        let tab = gauge_integral(&Gauge::tabulated(radii.clone(), values).unwrap(), 2).unwrap();
        for &r in &[1e-3, 0.01, 0.3, 1.0] {
            assert!((tab.eval(r) - 0.8 * r.sqrt()).abs() < 1e-10, "r = {r}");
        }
    }

    #[test]
    fn tabulated_gauge_must_vanish_at_zero() {
        assert!(Gauge::tabulated(vec![0.1, 0.2], vec![1.0, 1.0]).is_err());
        assert!(Gauge::tabulated(vec![0.1, 0.2], vec![0.0, 1.0]).is_ok());
        assert!(Gauge::tabulated(vec![0.1, 0.2], vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn alpha0_values() {
        assert!((alpha0(2, 319.0 / 320.0) - 1.5657e-3).abs() < 1e-6);
        assert!((alpha0(1, 47.0 / 48.0) - 5.2772e-3).abs() < 1e-7);
        assert_eq!(default_lambda(2), 319.0 / 320.0);
    }

    #[test]
    fn cone_ratio_is_constant() {
        let t = cone_harmonic(2, 0.05, 128, 2.5).unwrap();
        let p =
            DensityProfile::measure(&t, &[0.0; 3], &geometric_grid(0.05, 1.5, 12), 0.05).unwrap();
        let e = spherical_excess(&p, 1.5).unwrap();
        assert!(e.total < 1e-10, "{e:?}");
        assert!(almost_monotone_check(&p, &Gauge::Zero).pass);
    }

    fn lens(d: f64, r: f64, big: f64) -> f64 {
        // area of B(0, r) ∩ B(d e1, big)
        if d >= r + big {
            return 0.0;
        }
        let a = ((d * d + r * r - big * big) / (2.0 * d * r))
            .clamp(-1.0, 1.0)
            .acos();
        let b = ((d * d + big * big - r * r) / (2.0 * d * big))
            .clamp(-1.0, 1.0)
            .acos();
        r * r * (a - a.sin() * a.cos()) + big * big * (b - b.sin() * b.cos())
    }

    #[test]
    fn hole_produces_a_drop() {
        // annulus 0.3 < |y| < 1 seen from a point at distance 0.5 from its center
        let ann = annulus(0.3, 1.0, 256).unwrap();
        let radii = geometric_grid(0.05, 0.45, 20);
        let p = DensityProfile::measure(&ann, &[0.5, 0.0, 0.0], &radii, 0.05).unwrap();
        let small = spherical_excess(&p, 0.15).unwrap();
        let large = spherical_excess(&p, 0.45).unwrap();
        let expected = radii
            .iter()
            .map(|&r| lens(0.5, r, 0.3) / (std::f64::consts::PI * r * r))
            .fold(0.0, f64::max);
        assert!(small.lower < 1e-9);
        assert!(expected > 0.05);
        assert!(
            (large.lower - expected).abs() < 5e-3,
            "{} vs {expected}",
            large.lower
        );
        assert!(large.total >= small.total);
    }

    #[test]
    fn dip_absorbed_by_gauge() {
        // smooth dip on [0.2, 0.7]; Ξ(r) = 0.1√r rises faster than a 1% dip falls
        let radii = geometric_grid(0.01, 1.0, 120);
        let dip = |depth: f64| -> Vec<f64> {
            radii
                .iter()
                .map(|&r| {
                    if (0.2..0.7).contains(&r) {
                        1.0 - depth * (std::f64::consts::PI * (r - 0.2) / 0.5).sin().powi(2)
                    } else {
                        1.0
                    }
                })
                .collect()
        };
        let big_xi = Gauge::power(0.1, 0.5, 1.0).unwrap();
        let p = DensityProfile::from_values(vec![0.0; 2], radii.clone(), dip(0.01)).unwrap();
        assert!(!almost_monotone_check(&p, &Gauge::Zero).pass);
        let c = almost_monotone_check(&p, &big_xi);
        assert!(c.pass, "{:?}", c.worst);
        let p = DensityProfile::from_values(vec![0.0; 2], radii.clone(), dip(0.05)).unwrap();
        let c = almost_monotone_check(&p, &big_xi);
        assert!(!c.pass);
        assert!(
            c.worst.s < c.worst.t && c.worst.t > 0.2 && c.worst.t < 0.7,
            "{:?}",
            c.worst
        );
    }

    #[test]
    fn decreasing_ratio_fails() {
        let radii = geometric_grid(0.1, 1.0, 10);
        let vals: Vec<f64> = radii.iter().map(|r| 2.0 - r).collect();
        let p = DensityProfile::from_values(vec![0.0], radii, vals).unwrap();
        assert!(!almost_monotone_check(&p, &Gauge::Zero).pass);
    }

    #[test]
    fn density_limit_on_nearly_monotone_profile() {
        let radii = geometric_grid(1e-6, 1.0, 80);
        let vals: Vec<f64> = radii.iter().map(|r| 1.0 + 0.5 * r.sqrt()).collect();
        let p = DensityProfile::from_values(vec![0.0], radii, vals).unwrap();
        let d = density_limit(&p, 10, 1e-2).unwrap();
        assert!(d.exists && (d.value - 1.0).abs() < 1e-3);
    }

    fn family(m: usize, theta: f64, beta: f64, radii: &[f64]) -> Vec<f64> {
        radii
            .iter()
            .map(|r| theta * r.powi(m as i32) * (1.0 + r.powf(beta)))
            .collect()
    }

    #[test]
    fn exact_power_mass_is_the_equality_case() {
        let xi = Gauge::power(1e-3, 0.5, 1.0).unwrap();
        let radii = geometric_grid(1e-4, 0.1, 200);
        let mass: Vec<f64> = radii.iter().map(|r| r * r).collect();
        let rep = decay_bound(&DecayProblem {
            radii: &radii,
            mass: &mass,
            theta: 1.0,
            m: 2,
            xi: &xi,
            lambda: default_lambda(2),
            lambda0: None,
        })
        .unwrap();
        assert!(rep.conclusion_holds);
        let big = gauge_integral(&xi, 2).unwrap();
        for row in &rep.rows {
            assert!((row.lhs - (big.eval(row.r).exp() - 1.0)).abs() < 1e-12);
            assert!(row.lhs <= 8.0 * big.eval(row.r));
        }
    }

    #[test]
    fn synthetic_family_passes() {
        for &beta in &[0.25, 0.5, 1.0] {
            let xi = Gauge::power(0.1, beta, 1.0).unwrap();
            let r0: f64 = 0.01f64.powf(1.0 / beta);
            let radii = geometric_grid(r0 * 1.02f64.powi(-199), r0, 200);
            let theta = unit_ball_volume(2);
            let mass = family(2, theta, beta, &radii);
            let rep = decay_bound(&DecayProblem {
                radii: &radii,
                mass: &mass,
                theta,
                m: 2,
                xi: &xi,
                lambda: default_lambda(2),
                lambda0: None,
            })
            .unwrap();
            assert!(rep.conclusion_holds, "beta {beta}: {}", rep.min_slack);
            assert!(!rep.ratio_hypothesis);
        }
    }

    #[test]
    fn violating_mass_is_gated() {
        let xi = Gauge::power(1e-3, 0.5, 1.0).unwrap();
        let radii = geometric_grid(1e-4, 0.1, 100);
        let mass: Vec<f64> = radii.iter().map(|r| r.sqrt()).collect();
        let err = decay_bound(&DecayProblem {
            radii: &radii,
            mass: &mass,
            theta: 1.0,
            m: 2,
            xi: &xi,
            lambda: default_lambda(2),
            lambda0: None,
        })
        .unwrap_err();
        assert!(err.is_gate_failure());
        assert!(err.to_string().contains("differential inequality"), "{err}");
    }

    #[test]
    fn flat_disk_probe_is_not_refuted() {
        let t = flat_disk(64, 3, Coeff::Integer(1)).unwrap();
        let piece = ball_piece(&t, &[0.0; 3], 0.5, 0.05).unwrap();
        // same piece, retriangulated by coning from an off-center point
        let other = cone(&[0.1, 0.05, 0.0], &boundary(&piece).unwrap()).unwrap();
        let s = other.try_sub(&piece).unwrap();
        let rep = almost_minimal_probe(
            &t,
            &[0.0; 3],
            0.5,
            &[s],
            &Gauge::power(1e-3, 1.0, 1.0).unwrap(),
            0.05,
        )
        .unwrap();
        assert!(!rep.refuted, "{rep:?}");
        assert_eq!(rep.verdict, "not refuted");
        for e in &rep.entries {
            assert!((e.mass_after - rep.mass_in_ball).abs() < 1e-9);
        }
    }

    #[test]
    fn spike_is_refuted() {
        // flat disk whose central 0.1-disk is replaced by a pyramid of height 0.3
        let small = flat_disk(64, 3, Coeff::Integer(1)).unwrap().dilate(0.1);
        let pyramid = small.map_vertices(3, |v| {
            let h = if linalg::norm(v) < 1e-12 { 0.3 } else { 0.0 };
            vec![v[0], v[1], h]
        });
        let spiked = annulus(0.1, 1.0, 64).unwrap().try_add(&pyramid).unwrap();
        let s = small.try_sub(&pyramid).unwrap();
        let extra = pyramid.mass() - small.mass();
        let rep = almost_minimal_probe(
            &spiked,
            &[0.0; 3],
            0.5,
            &[s],
            &Gauge::power(0.01, 1.0, 1.0).unwrap(),
            0.02,
        )
        .unwrap();
        assert!(rep.refuted);
        assert_eq!(rep.verdict, "refuted");
        let e = &rep.entries[0];
        assert!((rep.mass_in_ball - e.mass_after - extra).abs() < 1e-9);
    }

    #[test]
    fn competitor_preconditions() {
        let t = flat_disk(32, 3, Coeff::Integer(1)).unwrap();
        let far = flat_disk(8, 3, Coeff::Integer(1))
            .unwrap()
            .translate(&[3.0, 0.0, 0.0]);
        let xi = Gauge::Zero;
        let e = almost_minimal_probe(&t, &[0.0; 3], 0.5, &[far], &xi, 0.05).unwrap_err();
        assert!(e.to_string().contains("support"));
        let open = flat_disk(8, 3, Coeff::Integer(1)).unwrap().dilate(0.2);
        let e = almost_minimal_probe(&t, &[0.0; 3], 0.5, &[open], &xi, 0.05).unwrap_err();
        assert!(e.to_string().contains("boundary"));
    }

    #[test]
    fn curved_graph_passes_with_its_gauge() {
        // C^{1,α} graph: chords lose O(r^{2α}) relative mass
        let alpha = 0.5;
        let t = holder_graph(alpha, 0.5, 4000).unwrap();
        let xi = Gauge::power(2.0, 2.0 * alpha, 1.0).unwrap();
        for &x0 in &[0.1, 0.3, 0.6] {
            let x = [x0, 0.5 * f64::powf(x0, 1.0 + alpha)];
            let rep = almost_minimal_probe(&t, &x, 0.05, &[], &xi, 0.01).unwrap();
            assert!(!rep.refuted, "{rep:?}");
            let c = &rep.entries[0];
            assert!(c.mass_after < rep.mass_in_ball);
        }
    }
}
