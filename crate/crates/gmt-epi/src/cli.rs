//! Command surface behind the `gmt-epi` binary. Each command maps a chain
//! and a config to a [`Report`]; nothing here prints or exits.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::{boundary, PolyChain};
use crate::epi::{build_comparison, EpiConfig};
use crate::error::{GmtError, Result};
use crate::generate::{generate, GenKind};
use crate::geom::{
    cylindrical_excess, decompose_layers, height_sup, multiplicity_stats, BaseRegion, LayerOptions,
    OrientedPlane,
};
use crate::io::{num, opt_num, ChainFile, Report, Table};
use crate::measure::density_ratio;
use crate::moments::{beta_numbers, moments_all, quad_form, select_plane};
use crate::mono::{almost_minimal_probe, Gauge};
use crate::scan::{extract_at_flat_scale, multiscale_scan, support_distance, ScanConfig};
use crate::verify::{inequality_suite, power_family_decay};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Excess,
    Epi,
    Moments,
    Scan,
    Probe,
    Verify,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Analyze,
        Command::Excess,
        Command::Epi,
        Command::Moments,
        Command::Scan,
        Command::Probe,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Excess => "excess",
            Command::Epi => "epi",
            Command::Moments => "moments",
            Command::Scan => "scan",
            Command::Probe => "probe",
            Command::Verify => "verify",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }

    fn needs_chain(self) -> bool {
        self != Command::Verify
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExcessParams {
    /// Orthonormal frame of the base plane; the first `dim` axes when absent.
    pub base: Option<Vec<Vec<f64>>>,
    pub radius: f64,
    pub constancy_grid: usize,
    /// Mass-excess bound ε for the multiplicity estimates; the measured
    /// Exc/‖g0‖ when absent.
    pub eps_mass: Option<f64>,
}

impl Default for ExcessParams {
    fn default() -> Self {
        ExcessParams {
            base: None,
            radius: 1.0,
            constancy_grid: 24,
            eps_mass: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentsParams {
    /// Center; the origin when absent.
    pub x: Option<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl Default for MomentsParams {
    fn default() -> Self {
        MomentsParams {
            x: None,
            radii: vec![0.125, 0.25, 0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanParams {
    /// Scan points; otherwise `sample` simplex barycenters drawn with the seed
    /// among those at least 2·r0 from the boundary.
    pub points: Option<Vec<Vec<f64>>>,
    pub sample: usize,
    pub r0: f64,
    pub depth: usize,
    pub config: ScanConfig,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            points: None,
            sample: 16,
            r0: 0.05,
            depth: 6,
            config: ScanConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeParams {
    pub x: Option<Vec<f64>>,
    pub radius: f64,
    pub xi: Gauge,
    /// Chain files of zero-boundary competitors supported in the ball.
    pub competitors: Vec<PathBuf>,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams {
            x: None,
            radius: 0.5,
            xi: Gauge::Zero,
            competitors: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyParams {
    pub trials: usize,
    pub dim: usize,
    pub gauge_constant: f64,
    pub exponents: Vec<f64>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            trials: 10_000,
            dim: 2,
            gauge_constant: 0.1,
            exponents: vec![0.25, 0.5, 1.0],
        }
    }
}

/// Everything a command reads besides the chain. Echoed into every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Overrides the refinement length of every module when set.
    pub refine_h: Option<f64>,
    /// Chain to generate when no chain file is given.
    pub generator: Option<GenKind>,
    pub excess: ExcessParams,
    pub epi: EpiConfig,
    pub moments: MomentsParams,
    pub scan: ScanParams,
    pub probe: ProbeParams,
    pub verify: VerifyParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            refine_h: None,
            generator: None,
            excess: ExcessParams::default(),
            epi: EpiConfig::default(),
            moments: MomentsParams::default(),
            scan: ScanParams::default(),
            probe: ProbeParams::default(),
            verify: VerifyParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        Ok(serde_json::from_str(text)?)
    }

    /// Apply the global refinement length to the module configs.
    fn resolved(&self) -> RunConfig {
        let mut c = self.clone();
        if let Some(h) = c.refine_h {
            c.epi.refine_h = h;
            c.scan.config.refine_h = h;
        }
        c
    }

    fn refine_h(&self) -> f64 {
        self.refine_h.unwrap_or(self.scan.config.refine_h)
    }
}

/// Chain input of a run: the file as read, or the generated chain.
pub fn load_chain(file: Option<&ChainFile>, cfg: &RunConfig) -> Result<Option<ChainFile>> {
    if let Some(f) = file {
        return Ok(Some(f.clone()));
    }
    match &cfg.generator {
        Some(kind) => {
            let g = generate(kind, cfg.seed)?;
            Ok(Some(ChainFile::from_chain(&g.chain, g.metadata)))
        }
        None => Ok(None),
    }
}

/// Outcome of a command: the report, plus whether a hypothesis gate or a
/// checked inequality failed (exit code 2).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub gate_failed: bool,
}

pub fn run(cmd: Command, chain: Option<&ChainFile>, cfg: &RunConfig) -> Result<Outcome> {
    let cfg = cfg.resolved();
    let file = load_chain(chain, &cfg)?;
    let t = match (&file, cmd.needs_chain()) {
        (Some(f), _) => Some(f.to_chain()?),
        (None, true) => {
            return Err(GmtError::invalid(format!(
                "`{}` needs --chain or a `generator` entry in the config",
                cmd.name()
            )))
        }
        (None, false) => None,
    };
    let (results, table, gate_failed) = match (cmd, &t) {
        (Command::Analyze, Some(t)) => analyze(t, file.as_ref())?,
        (Command::Excess, Some(t)) => excess(t, &cfg)?,
        (Command::Epi, Some(t)) => epi(t, &cfg)?,
        (Command::Moments, Some(t)) => moments(t, &cfg)?,
        (Command::Scan, Some(t)) => scan(t, &cfg)?,
        (Command::Probe, Some(t)) => probe(t, &cfg)?,
        (Command::Verify, _) => verify(&cfg)?,
        _ => unreachable!("chain presence checked above"),
    };
    let summary = json!({
        "command": cmd.name(),
        "seed": cfg.seed,
        "config": serde_json::to_value(&cfg)?,
        "chain": t.as_ref().map(|t| json!({
            "ambient": t.ambient(), "dim": t.dim(), "group": t.group(), "simplices": t.len(),
        })),
        "gate_failed": gate_failed,
        "results": results,
    });
    Ok(Outcome {
        report: Report {
            command: cmd.name().into(),
            summary,
            table,
        },
        gate_failed,
    })
}

type Parts = (serde_json::Value, Option<Table>, bool);

fn origin_or(x: &Option<Vec<f64>>, n: usize) -> Result<Vec<f64>> {
    let x = x.clone().unwrap_or_else(|| vec![0.0; n]);
    if x.len() != n {
        return Err(GmtError::DimensionMismatch(format!(
            "point has {} coordinates, chain lives in R^{n}",
            x.len()
        )));
    }
    Ok(x)
}

fn analyze(t: &PolyChain, file: Option<&ChainFile>) -> Result<Parts> {
    let bd = boundary(t)?;
    let verts = t.support_vertices();
    let n = t.ambient();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for v in &verts {
        for i in 0..n {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let mut table = Table::new(&["simplex", "coeff", "norm", "volume"]);
    for (i, term) in t.terms().iter().enumerate() {
        table.push(vec![
            i.to_string(),
            term.coeff.to_string(),
            num(term.coeff.norm()),
            num(term.simplex.volume()),
        ]);
    }
    let results = json!({
        "group_gap": t.group().gap(),
        "mass": t.mass(),
        "size": t.size(),
        "boundary_simplices": bd.len(),
        "boundary_mass": bd.mass(),
        "is_cycle": bd.is_empty(),
        "support_radius": t.support_radius(&vec![0.0; n]),
        "bbox_min": lo,
        "bbox_max": hi,
        "metadata": file.map(|f| f.metadata.clone()).unwrap_or_default(),
    });
    Ok((results, Some(table), false))
}

fn excess(t: &PolyChain, cfg: &RunConfig) -> Result<Parts> {
    let p = &cfg.excess;
    let v = match &p.base {
        Some(frame) => OrientedPlane::new(frame.clone(), 1)?,
        None => OrientedPlane::coordinate(t.ambient(), t.dim()),
    };
    let gate = |r: Result<Parts>| match r {
        Err(e) if e.is_gate_failure() => Ok((json!({"gate": e.to_string()}), None, true)),
        other => other,
    };
    gate((|| {
        let l = decompose_layers(
            t,
            &v,
            &LayerOptions {
                check_radius: p.radius,
                grid: p.constancy_grid,
            },
        )?;
        let region = BaseRegion::ball(t.dim(), p.radius);
        let exc = cylindrical_excess(&l, &region)?;
        let g0 = l.g0.norm();
        let eps = p
            .eps_mass
            .unwrap_or(if g0 > 0.0 { exc.excess / g0 } else { 0.0 });
        let mult = if t.dim() == 2 {
            Some(multiplicity_stats(&l, &region, eps)?)
        } else {
            None
        };
        let height = height_sup(t, &v, p.radius)?;
        let mut table = Table::new(&["layer", "term", "coeff", "norm", "stretch"]);
        for (i, layer) in l.layers.iter().enumerate() {
            table.push(vec![
                i.to_string(),
                layer.term.to_string(),
                layer.coeff.to_string(),
                num(layer.norm),
                num(layer.stretch),
            ]);
        }
        let failed = mult.as_ref().is_some_and(|m| !m.all_hold());
        Ok((
            json!({
                "g0": l.g0.to_string(), "g0_norm": g0, "layers": l.layers.len(),
                "boundary_clearance": l.boundary_clearance,
                "excess": exc, "height_sup": height, "multiplicity": mult,
            }),
            Some(table),
            failed,
        ))
    })())
}

fn epi(t: &PolyChain, cfg: &RunConfig) -> Result<Parts> {
    match build_comparison(t, &cfg.epi) {
        Ok((s, rep)) => {
            let below = rep.below_lambda;
            let results = json!({
                "report": rep,
                "comparison_chain": {"simplices": s.len(), "mass": s.mass()},
            });
            Ok((results, None, below == Some(false)))
        }
        Err(e) if e.is_gate_failure() => Ok((json!({"gate": e.to_string()}), None, true)),
        Err(e) => Err(e),
    }
}

fn moments(t: &PolyChain, cfg: &RunConfig) -> Result<Parts> {
    let x = origin_or(&cfg.moments.x, t.ambient())?;
    let h = cfg.refine_h();
    let mut table = Table::new(&[
        "r",
        "mass",
        "density_ratio",
        "v",
        "v_hat",
        "trace_q",
        "identity_residual",
        "eigen_gap",
        "beta2",
        "beta_inf",
        "error",
    ]);
    let mut records = Vec::new();
    for &r in &cfg.moments.radii {
        let rec = moments_all(t, &x, r, h)?;
        let (gap, b2, binf) = match select_plane(&quad_form(t, &x, r, h)?, t.dim()) {
            Ok(sel) => {
                let b = beta_numbers(t, &x, r, &sel.plane, h)?;
                (Some(sel.gap), Some(b.beta2), Some(b.beta_inf))
            }
            Err(e) if e.is_gate_failure() => (None, None, None),
            Err(e) => return Err(e),
        };
        table.push(vec![
            num(r),
            num(rec.mass),
            num(density_ratio(t, &x, r, h)?),
            num(rec.v),
            num(rec.v_hat),
            num(rec.trace_q),
            num(rec.identity_residual),
            opt_num(gap),
            opt_num(b2),
            opt_num(binf),
            num(rec.error),
        ]);
        records.push(rec);
    }
    Ok((json!({"x": x, "records": records}), Some(table), false))
}

fn scan_points(t: &PolyChain, p: &ScanParams, seed: u64) -> Result<Vec<Vec<f64>>> {
    if let Some(pts) = &p.points {
        return Ok(pts.clone());
    }
    let bd = boundary(t)?;
    let mut candidates: Vec<Vec<f64>> = t
        .terms()
        .iter()
        .map(|term| term.simplex.barycenter())
        .filter(|b| bd.is_empty() || support_distance(&bd, b) >= 2.0 * p.r0)
        .collect();
    if candidates.is_empty() {
        return Err(GmtError::invalid(
            "no simplex barycenter lies 2·r0 away from the boundary",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);
    candidates.truncate(p.sample.max(1));
    Ok(candidates)
}

fn scan(t: &PolyChain, cfg: &RunConfig) -> Result<Parts> {
    let p = &cfg.scan;
    let points = scan_points(t, p, cfg.seed)?;
    let rep = multiscale_scan(t, &points, p.r0, p.depth, &p.config)?;
    let mut table = Table::new(&[
        "point",
        "scale",
        "beta_inf",
        "beta_inf_centered",
        "beta2",
        "hausdorff",
        "eta",
        "dini",
        "density_ratio",
        "eigen_gap",
        "frame_found",
        "error",
    ]);
    let mut summaries = Vec::new();
    for (i, pr) in rep.points.iter().enumerate() {
        for (k, c) in pr.cells.iter().enumerate() {
            table.push(vec![
                i.to_string(),
                num(c.scale),
                num(c.beta_inf),
                num(c.beta_inf_centered),
                num(c.beta2),
                num(c.hausdorff),
                num(pr.eta[k]),
                num(pr.dini[k]),
                num(c.density_ratio),
                num(c.eigen_gap),
                c.frame_found.to_string(),
                c.error.clone().unwrap_or_default(),
            ]);
        }
        let cert = extract_at_flat_scale(t, &rep, i);
        summaries.push(json!({
            "x": pr.x,
            "flat_scale": pr.flat_scale,
            "density_plateau": pr.density_plateau,
            "holder": pr.holder,
            "coherence_violations": pr.coherence_violations,
            "certificate": match &cert {
                Ok(c) => json!({"radius": c.radius, "dini": c.dini, "lipschitz": c.lipschitz, "fibers": c.fibers}),
                Err(e) => json!({"failed": e.to_string()}),
            },
        }));
    }
    let certified = summaries
        .iter()
        .filter(|s| s["certificate"].get("failed").is_none())
        .count();
    Ok((
        json!({"r0": rep.r0, "depth": rep.depth, "scales": rep.scales, "certified": certified, "points": summaries}),
        Some(table),
        false,
    ))
}

fn probe(t: &PolyChain, cfg: &RunConfig) -> Result<Parts> {
    let p = &cfg.probe;
    let x = origin_or(&p.x, t.ambient())?;
    let competitors = p
        .competitors
        .iter()
        .map(|path| ChainFile::read(path)?.to_chain())
        .collect::<Result<Vec<_>>>()?;
    let rep = almost_minimal_probe(t, &x, p.radius, &competitors, &p.xi, cfg.refine_h())?;
    let mut table = Table::new(&["competitor", "mass_after", "bound", "holds"]);
    for e in &rep.entries {
        table.push(vec![
            e.label.clone(),
            num(e.mass_after),
            num(e.bound),
            e.holds.to_string(),
        ]);
    }
    Ok((serde_json::to_value(&rep)?, Some(table), false))
}

fn verify(cfg: &RunConfig) -> Result<Parts> {
    let p = &cfg.verify;
    let mut table = Table::new(&[
        "check",
        "trials",
        "violations",
        "measured",
        "bound",
        "worst",
    ]);
    let mut failed = false;
    for row in inequality_suite(p.trials, cfg.seed) {
        failed |= !row.passed();
        table.push(vec![
            row.check.clone(),
            row.trials.to_string(),
            row.violations.to_string(),
            num(row.measured),
            num(row.bound),
            num(row.worst),
        ]);
    }
    let mut decay = Vec::new();
    for &beta in &p.exponents {
        let name = format!("decay_bound(beta={beta})");
        match power_family_decay(p.dim, 1.0, p.gauge_constant, beta) {
            Ok(rep) => {
                failed |= !rep.conclusion_holds;
                table.push(vec![
                    name,
                    rep.rows.len().to_string(),
                    rep.rows
                        .iter()
                        .filter(|r| r.slack < 0.0)
                        .count()
                        .to_string(),
                    num(rep.min_slack),
                    num(0.0),
                    num(-rep.min_slack),
                ]);
                decay.push(json!({"beta": beta, "min_slack": rep.min_slack,
                    "ratio_hypothesis": rep.ratio_hypothesis, "ratio_min": rep.ratio_min}));
            }
            Err(e) if e.is_gate_failure() => {
                failed = true;
                table.push(vec![
                    name,
                    "0".into(),
                    "1".into(),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ]);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((json!({"decay": decay}), Some(table), failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_generator(kind: GenKind) -> RunConfig {
        RunConfig {
            generator: Some(kind),
            ..RunConfig::default()
        }
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.name()), Some(c));
        }
        assert_eq!(Command::parse("generate"), None);
    }

    #[test]
    fn analyze_flat_disk() {
        let out = run(
            Command::Analyze,
            None,
            &with_generator(GenKind::FlatDisk { sides: 64 }),
        )
        .unwrap();
        let mass = out.report.summary["results"]["mass"].as_f64().unwrap();
        let want = 32.0 * (std::f64::consts::PI / 32.0).sin();
        assert!((mass - want).abs() < 1e-12);
        assert!(!out.gate_failed);
        assert_eq!(out.report.table.unwrap().rows.len(), 64);
    }

    #[test]
    fn missing_chain_is_an_error() {
        let err = run(Command::Moments, None, &RunConfig::default()).unwrap_err();
        assert!(!err.is_gate_failure());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"sed": 3}"#).is_err());
        let c = RunConfig::from_json(r#"{"seed": 3, "scan": {"r0": 0.1}}"#).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.scan.depth, ScanParams::default().depth);
    }

    #[test]
    fn non_general_position_is_a_gate_failure() {
        // a vertical disk does not project onto the horizontal plane
        let mut cfg = with_generator(GenKind::FlatDisk { sides: 16 });
        cfg.excess.base = Some(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let out = run(Command::Excess, None, &cfg).unwrap();
        assert!(out.gate_failed, "{}", out.report.summary);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut cfg = with_generator(GenKind::Tilted {
            slope: 0.2,
            sides: 32,
        });
        cfg.scan.sample = 3;
        cfg.scan.depth = 3;
        cfg.scan.r0 = 0.1;
        let a = run(Command::Scan, None, &cfg).unwrap().report;
        let b = run(Command::Scan, None, &cfg).unwrap().report;
        assert_eq!(a, b);
        let pts = a.summary["results"]["points"].as_array().unwrap();
        assert_eq!(pts.len(), 3);
    }
}
