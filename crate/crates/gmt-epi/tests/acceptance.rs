//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process exits nonzero when a criterion fails that is not listed in
//! `KNOWN_FAILING`; those are reported as FAIL all the same.

use std::f64::consts::PI;
use std::time::Instant;

use gmt_epi::chain::{boundary, cone, cone_mass_formula};
use gmt_epi::coeff::group_gap;
use gmt_epi::epi::{build_comparison, BoundaryTrace, EpiConfig};
use gmt_epi::generate::{
    cantor_group, cone_harmonic, cone_over_profile, flat_disk, random_chain, tilted, TwoSheet,
};
use gmt_epi::geom::{plane_distance, OrientedPlane};
use gmt_epi::measure::ball_quadrature;
use gmt_epi::moments::{moments_all, quad_form, select_plane};
use gmt_epi::scan::{extract_at_flat_scale, multiscale_scan, ScanConfig};
use gmt_epi::verify::{inequality_suite, power_family_decay};
use gmt_epi::{Coeff, GroupSpec, PolyChain, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met as stated; see the README.
const KNOWN_FAILING: &[usize] = &[1];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn cone_mass() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [8usize, 32, 128] {
        let disk = flat_disk(n, 3, Coeff::Integer(1))?;
        let c = cone(&[0.0; 3], &boundary(&disk)?)?;
        let mass = c.mass();
        let formula = cone_mass_formula(&[0.0; 3], &boundary(&disk)?);
        // inscribed regular N-gon
        let polygon = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
        let identity = rel(mass, formula).max(rel(mass, polygon));
        let err = PI - mass;
        let bound = 1.1 * PI.powi(3) / (2.0 * (n * n) as f64);
        pass &= identity <= 1e-12 && err <= bound;
        parts.push(format!(
            "N={n}: identity {identity:.1e}, pi-M {err:.4e} vs {bound:.4e}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 1.0;
    outcome(pass, format!("{}; {secs:.2}s", parts.join("; ")))
}

fn flat_disk_form() -> Result<Outcome> {
    let start = Instant::now();
    let t = flat_disk(512, 3, Coeff::Integer(1))?;
    let q = quad_form(&t, &[0.0; 3], 1.0, 0.05)?;
    let eig = q.eigen().values;
    let eig_err = [1.0, 1.0, 0.0]
        .iter()
        .zip(&eig)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let tr_err = (q.trace() - 2.0).abs();
    let sel = select_plane(&q, 2)?;
    let dist = plane_distance(&sel.plane, &OrientedPlane::coordinate(3, 2))?;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        eig_err <= 5e-3 && tr_err <= 5e-3 && dist <= 1e-2 && secs < 2.0,
        format!("eigenvalue error {eig_err:.2e}, trace error {tr_err:.2e}, plane distance {dist:.1e}; {secs:.2}s"),
    )
}

fn harmonic_energy() -> Result<Outcome> {
    let n = 4096;
    let h = 2.0 * PI / n as f64;
    let plane = OrientedPlane::coordinate(3, 2);
    let mut worst_fd: f64 = 0.0;
    let mut worst_series: f64 = 0.0;
    for k in 1..=4u32 {
        let w: Vec<f64> = (0..n).map(|j| (k as f64 * j as f64 * h).cos()).collect();
        // fourth-order central differences, periodic trapezoid sums
        let at = |j: isize| w[j.rem_euclid(n as isize) as usize];
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n as isize {
            let d = (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h);
            num += d * d;
            den += at(j) * at(j);
        }
        let target = (k * k) as f64;
        worst_fd = worst_fd.max((num / den - target).abs());
        let tr =
            BoundaryTrace::from_samples(&plane, w.iter().map(|&v| vec![0.0, 0.0, v]).collect(), 8)?;
        worst_series =
            worst_series.max((tr.tangential_energy() / tr.l2_truncated() - target).abs());
    }
    outcome(
        worst_fd <= 1e-6 && worst_series <= 1e-6,
        format!("max |ratio - k^2|: quadrature {worst_fd:.1e}, harmonic series {worst_series:.1e}"),
    )
}

fn epi_ratio() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (amp, tol) in [(0.08, 0.10), (0.04, 0.05), (0.02, 0.03)] {
        let p = cone_harmonic(2, amp, 256, 2.5)?;
        let (_, rep) = build_comparison(&p, &EpiConfig::default())?;
        let ratio = rep.ratio.unwrap_or(f64::NAN);
        let core = rep.core_ratio.unwrap_or(f64::NAN);
        pass &= ratio <= rep.lambda && (core - 0.8).abs() <= tol;
        parts.push(format!(
            "a={amp}: ball {ratio:.4} (lambda {:.6}), core {core:.6}",
            rep.lambda
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    outcome(pass, format!("{}; {secs:.1}s", parts.join("; ")))
}

fn linear_mode() -> Result<Outcome> {
    let horizontal = OrientedPlane::coordinate(3, 2);
    // the tilt reaches 0.11 on the mollifier's support, above the default ρ
    let cfg = EpiConfig {
        base: Some(horizontal.frame().to_vec()),
        rho: 0.2,
        ..EpiConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, quad) in [("plane", 0.0), ("plane + 0.01 cos 2t", 0.01)] {
        let profile = |t: f64| 0.1 * t.cos() + quad * (2.0 * t).cos();
        let p = cone_over_profile(256, 2.5, profile)?;
        let (_, rep) = build_comparison(&p, &cfg)?;
        let samples: Vec<Vec<f64>> = (0..cfg.trace_samples)
            .map(|j| {
                vec![
                    0.0,
                    0.0,
                    profile(2.0 * PI * j as f64 / cfg.trace_samples as f64),
                ]
            })
            .collect();
        let before =
            BoundaryTrace::from_samples(&horizontal, samples, cfg.harmonic_cutoff)?.linear_sup();
        let q = rep.w1_sup / before;
        pass &= q <= 0.05;
        parts.push(format!(
            "{label}: |w1| {:.2e} re-traced vs {before:.4} horizontal (x{q:.1e})",
            rep.w1_sup
        ));
    }
    outcome(pass, parts.join("; "))
}

fn moments_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_identity: f64 = 0.0;
    for i in 0..100 {
        let t = random_chain(3, 2, 6, GroupSpec::Integers, 1000 + i)?;
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let r = rng.gen_range(0.3..1.5);
        let rec = moments_all(&t, &x, r, 0.05)?;
        // V integrated directly, against the expanded sum
        let v = ball_quadrature(&t, &[0.0; 3], r, 0.05)?.integrate(|y| {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            (r * r - d2).powi(2)
        });
        let sum: f64 = rec.p.iter().sum();
        if v.abs() > 0.0 {
            worst_identity = worst_identity.max(rel(sum, v));
        }
    }
    let symmetric: Vec<(&str, PolyChain)> = vec![
        ("disk 64", flat_disk(64, 3, Coeff::Integer(1))?),
        ("disk 512", flat_disk(512, 3, Coeff::Integer(1))?),
        ("tilted", tilted(0.3, 48)?),
        ("cone k=1", cone_harmonic(1, 0.05, 64, 2.5)?),
        ("cone k=3", cone_harmonic(3, 0.05, 64, 2.5)?),
    ];
    let mut worst_b: f64 = 0.0;
    for (_, t) in &symmetric {
        for r in [0.5, 1.0] {
            let rec = moments_all(t, &[0.0; 3], r, 0.05)?;
            worst_b = rec.b_normalized.iter().fold(worst_b, |a, b| a.max(b.abs()));
        }
    }
    let disk = flat_disk(512, 3, Coeff::Integer(1))?;
    let omega = ball_quadrature(&disk, &[0.0; 3], 1.0, 0.05)?
        .integrate(|y| 1.0 - y.iter().map(|c| c * c).sum::<f64>());
    let omega_err = (omega - PI / 2.0).abs();
    outcome(
        worst_identity <= 1e-9 && worst_b <= 1e-12 && omega_err <= 2e-3,
        format!("V = sum P_k to {worst_identity:.1e}; max |b| {worst_b:.1e}; omega error {omega_err:.2e}"),
    )
}

fn inequalities() -> Result<Outcome> {
    let rows = inequality_suite(10_000, 20_240_517);
    let pass = rows.iter().all(|r| r.passed() && r.trials == 10_000);
    let detail = rows
        .iter()
        .map(|r| format!("{} {}/{}", r.check, r.violations, r.trials))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("violations: {detail}"))
}

fn decay_bound() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [0.25, 0.5, 1.0] {
        // hypothesis failures come back as errors
        let rep = power_family_decay(2, 1.0, 0.1, beta)?;
        pass &= rep.conclusion_holds && rep.min_slack > 0.0;
        parts.push(format!(
            "beta={beta}: min slack {:.3e}, ratio hypothesis {}",
            rep.min_slack, rep.ratio_hypothesis
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 1.0;
    outcome(pass, format!("{}; {secs:.2}s", parts.join("; ")))
}

fn branching_scan() -> Result<Outcome> {
    let start = Instant::now();
    let ts = TwoSheet::new(3, 0.3)?;
    let t = ts.chain(1 << 15)?;
    let mut points = Vec::new();
    let mut branch = Vec::new();
    for &(a, b) in &ts.gaps {
        for s in [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75] {
            let x = a + s * b;
            points.push(vec![x, ts.height(x)]);
            branch.push(false);
        }
        for e in [a - b, a + b] {
            points.push(vec![e, 0.0]);
            branch.push(true);
        }
    }
    let rep = multiscale_scan(&t, &points, 0.02, 10, &ScanConfig::default())?;
    let (mut gap_ok, mut gap_n, mut br_fail, mut br_n) = (0, 0, 0, 0);
    let mut worst_beta: f64 = 0.0;
    let mut cells = 0;
    for (i, &is_branch) in branch.iter().enumerate() {
        let ok = extract_at_flat_scale(&t, &rep, i).is_ok();
        if is_branch {
            br_n += 1;
            br_fail += usize::from(!ok);
            let e = points[i][0];
            for cell in &rep.points[i].cells {
                let r = cell.scale;
                // half the sheet separation inside the ball, over r
                let analytic = (0..=4000)
                    .map(|j| e - r + 2.0 * r * j as f64 / 4000.0)
                    .map(|s| (s, ts.height(s)))
                    .filter(|&(s, f)| (s - e).powi(2) + f * f <= r * r)
                    .map(|(_, f)| f / (2.0 * r))
                    .fold(0.0, f64::max);
                if analytic > 1e-3 {
                    cells += 1;
                    worst_beta = worst_beta.max(rel(cell.beta_inf_centered, analytic));
                }
            }
        } else {
            gap_n += 1;
            gap_ok += usize::from(ok);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let gap_rate = gap_ok as f64 / gap_n as f64;
    outcome(
        gap_rate >= 0.95 && br_fail == br_n && cells > 0 && worst_beta <= 0.2 && secs < 60.0,
        format!(
            "gap certified {gap_ok}/{gap_n}, branch rejected {br_fail}/{br_n}, beta_inf worst relative error {worst_beta:.3} over {cells} cells; {secs:.1}s"
        ),
    )
}

fn cantor_plateau() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for depth in [2u32, 3, 4] {
        let (t, weight_sum, _) = cantor_group(depth)?;
        let rep = multiscale_scan(&t, &[vec![0.5, 0.0]], 0.1, 6, &ScanConfig::default())?;
        let plateau = rep.points[0].density_plateau.unwrap_or(f64::NAN);
        let gap = group_gap(&GroupSpec::Cantor { depth });
        let d = (plateau - weight_sum).abs();
        pass &= d <= 1e-9 && rel(gap, 3f64.powi(-(depth as i32))) <= 1e-15;
        parts.push(format!(
            "d={depth}: plateau {plateau:.12} vs {weight_sum:.12} ({d:.1e}), gap {gap:.4e}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn main() {
    type Check = fn() -> Result<Outcome>;
    let checks: [(usize, &str, Check); 10] = [
        (1, "cone mass identity", cone_mass),
        (2, "flat-disk quadratic form", flat_disk_form),
        (3, "harmonic energy identity", harmonic_energy),
        (4, "epiperimetric ratio", epi_ratio),
        (5, "plane selection kills the linear mode", linear_mode),
        (6, "moments identities", moments_suite),
        (7, "inequality suite", inequalities),
        (8, "decay bound", decay_bound),
        (9, "branching scan", branching_scan),
        (10, "Cantor density plateau", cantor_plateau),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check) in checks {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_FAILING.contains(&id);
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && known { " [known]" } else { "" };
        println!("criterion {id:>2} {tag}{note} {name}: {detail}");
        if pass == known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
