//! Deterministic chain generators with their analytic ground truth.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::{PolyChain, Simplex, Term};
use crate::coeff::{Coeff, GroupSpec};
use crate::error::{GmtError, Result};

/// Generator selection, as written in configs and on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenKind {
    FlatDisk {
        sides: usize,
    },
    Tilted {
        slope: f64,
        sides: usize,
    },
    ConeHarmonic {
        k: u32,
        amplitude: f64,
        rays: usize,
        #[serde(default = "default_extent")]
        extent: f64,
    },
    TwoSheetCantor {
        levels: u32,
        nodes: usize,
    },
    CantorGroup {
        depth: u32,
    },
    Stacked {
        sides: usize,
        heights: Vec<f64>,
        coeffs: Vec<i64>,
        group: GroupSpec,
    },
    HolderGraph {
        alpha: f64,
        scale: f64,
        nodes: usize,
    },
}

fn default_extent() -> f64 {
    2.5
}

/// Chain plus the metadata documenting its ground truth.
#[derive(Debug, Clone)]
pub struct Generated {
    pub chain: PolyChain,
    pub metadata: serde_json::Value,
}

pub fn generate(kind: &GenKind, seed: u64) -> Result<Generated> {
    let _ = seed; // all current kinds are deterministic; the seed is echoed
    match kind {
        GenKind::FlatDisk { sides } => {
            let chain = flat_disk(*sides, 3, Coeff::Integer(1))?;
            let mass = 0.5 * *sides as f64 * (2.0 * PI / *sides as f64).sin();
            Ok(Generated {
                chain,
                metadata: json!({"kind": "flat_disk", "sides": sides, "mass": mass, "plane": [[1.0,0.0,0.0],[0.0,1.0,0.0]]}),
            })
        }
        GenKind::Tilted { slope, sides } => {
            let chain = tilted(*slope, *sides)?;
            let base = 0.5 * *sides as f64 * (2.0 * PI / *sides as f64).sin();
            Ok(Generated {
                chain,
                metadata: json!({"kind": "tilted", "slope": slope, "sides": sides,
                    "mass": base * (1.0 + slope * slope).sqrt(),
                    "layer_map": "y(x1,x2) = slope * x1 * e3"}),
            })
        }
        GenKind::ConeHarmonic {
            k,
            amplitude,
            rays,
            extent,
        } => {
            let chain = cone_harmonic(*k, *amplitude, *rays, *extent)?;
            Ok(Generated {
                chain,
                metadata: json!({"kind": "cone_harmonic", "k": k, "amplitude": amplitude, "rays": rays,
                    "extent": extent,
                    "boundary_curve": "theta -> extent * (cos theta, sin theta, amplitude cos(k theta))",
                    "height_sup_unit_ball": amplitude}),
            })
        }
        GenKind::TwoSheetCantor { levels, nodes } => {
            let ts = TwoSheet::new(*levels, 0.3)?;
            let chain = ts.chain(*nodes)?;
            let gaps: Vec<[f64; 2]> = ts.gaps.iter().map(|g| [g.0, g.1]).collect();
            Ok(Generated {
                chain,
                metadata: json!({"kind": "two_sheet_cantor", "levels": levels, "nodes": nodes,
                    "kappa": ts.kappa, "gaps_center_halfwidth": gaps,
                    "cantor_measure": ts.cantor_measure(),
                    "sheet_height": "f(t) = sum_i kappa*b_i*e*gamma((t-a_i)/b_i), gamma(s)=exp(-1/(1-s^2))"}),
            })
        }
        GenKind::CantorGroup { depth } => {
            let (chain, weight_sum, heights) = cantor_group(*depth)?;
            Ok(Generated {
                chain,
                metadata: json!({"kind": "cantor_group", "depth": depth, "weight_sum": weight_sum,
                    "group_gap": GroupSpec::Cantor{depth: *depth}.gap(), "heights": heights}),
            })
        }
        GenKind::Stacked {
            sides,
            heights,
            coeffs,
            group,
        } => {
            let chain = stacked(*sides, heights, coeffs, *group)?;
            let g0 = coeffs
                .iter()
                .map(|&c| group.element(c))
                .fold(group.zero(), |a, b| a.add(&b));
            Ok(Generated {
                chain,
                metadata: json!({"kind": "stacked", "sides": sides, "heights": heights, "coeffs": coeffs,
                    "g0_norm": g0.norm()}),
            })
        }
        GenKind::HolderGraph {
            alpha,
            scale,
            nodes,
        } => {
            let chain = holder_graph(*alpha, *scale, *nodes)?;
            Ok(Generated {
                chain,
                metadata: json!({"kind": "holder_graph", "alpha": alpha, "scale": scale, "nodes": nodes,
                    "graph": "y = scale * max(t,0)^(1+alpha), t in [-1,1]"}),
            })
        }
    }
}

fn ring(sides: usize) -> Vec<[f64; 2]> {
    // for even counts the second half is the exact negation of the first
    let mut pts = Vec::with_capacity(sides);
    let half = if sides % 2 == 0 { sides / 2 } else { sides };
    for i in 0..half {
        let t = 2.0 * PI * i as f64 / sides as f64;
        pts.push([t.cos(), t.sin()]);
    }
    if sides % 2 == 0 {
        for i in 0..half {
            pts.push([-pts[i][0], -pts[i][1]]);
        }
    }
    pts
}

/// Triangulated planar annulus inner ≤ |x| ≤ outer in the first two
/// coordinates of R^3, with `sides` vertices on each circle.
pub fn annulus(inner: f64, outer: f64, sides: usize) -> Result<PolyChain> {
    if !(inner > 0.0 && outer > inner) || sides < 3 {
        return Err(GmtError::invalid(
            "annulus needs 0 < inner < outer and at least 3 sides",
        ));
    }
    let pt = |r: f64, i: usize| {
        let t = 2.0 * PI * i as f64 / sides as f64;
        vec![r * t.cos(), r * t.sin(), 0.0]
    };
    let tris: Vec<Vec<Vec<f64>>> = (0..sides)
        .flat_map(|i| {
            let j = (i + 1) % sides;
            [
                vec![pt(inner, i), pt(outer, i), pt(outer, j)],
                vec![pt(inner, i), pt(outer, j), pt(inner, j)],
            ]
        })
        .collect();
    PolyChain::from_simplices(&tris, Coeff::Integer(1))
}

/// Fan triangulation of the regular `sides`-gon inscribed in the unit circle,
/// embedded in the first two coordinates of R^n.
pub fn flat_disk(sides: usize, n: usize, coeff: Coeff) -> Result<PolyChain> {
    if sides < 3 || n < 2 {
        return Err(GmtError::invalid(
            "flat_disk needs sides >= 3 and ambient >= 2",
        ));
    }
    let ring = ring(sides);
    let lift = |p: [f64; 2]| {
        let mut v = vec![0.0; n];
        v[0] = p[0];
        v[1] = p[1];
        v
    };
    let tris: Vec<Vec<Vec<f64>>> = (0..sides)
        .map(|i| vec![vec![0.0; n], lift(ring[i]), lift(ring[(i + 1) % sides])])
        .collect();
    PolyChain::from_simplices(&tris, coeff)
}

/// Graph of x ↦ slope·x₁ e₃ over the flat disk.
pub fn tilted(slope: f64, sides: usize) -> Result<PolyChain> {
    let d = flat_disk(sides, 3, Coeff::Integer(1))?;
    Ok(d.map_vertices(3, |x| vec![x[0], x[1], slope * x[0]]))
}

/// Cone over θ ↦ extent·(cos θ, sin θ, a cos kθ) with `rays` rays.
pub fn cone_harmonic(k: u32, amplitude: f64, rays: usize, extent: f64) -> Result<PolyChain> {
    if rays < 3 || !(extent > 0.0) {
        return Err(GmtError::invalid(
            "cone_harmonic needs rays >= 3 and positive extent",
        ));
    }
    cone_over_profile(rays, extent, |t| amplitude * (k as f64 * t).cos())
}

/// Cone over θ ↦ extent·(cos θ, sin θ, h(θ)).
pub fn cone_over_profile(rays: usize, extent: f64, h: impl Fn(f64) -> f64) -> Result<PolyChain> {
    let pts: Vec<Vec<f64>> = (0..rays)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / rays as f64;
            vec![extent * t.cos(), extent * t.sin(), extent * h(t)]
        })
        .collect();
    let tris: Vec<Vec<Vec<f64>>> = (0..rays)
        .map(|i| vec![vec![0.0; 3], pts[i].clone(), pts[(i + 1) % rays].clone()])
        .collect();
    PolyChain::from_simplices(&tris, Coeff::Integer(1))
}

/// Parallel flat disks at the given e₃-heights with the given coefficients.
pub fn stacked(
    sides: usize,
    heights: &[f64],
    coeffs: &[i64],
    group: GroupSpec,
) -> Result<PolyChain> {
    if heights.len() != coeffs.len() || heights.is_empty() {
        return Err(GmtError::invalid(
            "stacked needs one coefficient per height",
        ));
    }
    group.validate()?;
    let ring = ring(sides);
    let mut terms = Vec::new();
    for (&h, &c) in heights.iter().zip(coeffs) {
        let coeff = group.element(c);
        for i in 0..sides {
            let a = ring[i];
            let b = ring[(i + 1) % sides];
            terms.push(Term {
                simplex: Simplex::new(&[
                    vec![0.0, 0.0, h],
                    vec![a[0], a[1], h],
                    vec![b[0], b[1], h],
                ]),
                coeff,
            });
        }
    }
    PolyChain::from_terms(3, 2, group, terms)
}

/// Bump γ(s) = exp(−1/(1−s²)) on (−1, 1).
pub fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Fat Cantor set on [0, 1] (level k removes 2^{k-1} middle gaps of length
/// 4^{-k}) and the sheet height f vanishing exactly on it.
#[derive(Debug, Clone)]
pub struct TwoSheet {
    pub levels: u32,
    pub kappa: f64,
    /// (center a_i, half-width b_i) of each removed gap.
    pub gaps: Vec<(f64, f64)>,
}

impl TwoSheet {
    pub fn new(levels: u32, kappa: f64) -> Result<TwoSheet> {
        if levels == 0 || levels > 8 {
            return Err(GmtError::invalid(
                "two_sheet_cantor levels must be in 1..=8",
            ));
        }
        let mut intervals = vec![(0.0f64, 1.0f64)];
        let mut gaps = Vec::new();
        for k in 1..=levels {
            let len = 4f64.powi(-(k as i32));
            let mut next = Vec::new();
            for (lo, hi) in intervals {
                let mid = 0.5 * (lo + hi);
                gaps.push((mid, 0.5 * len));
                next.push((lo, mid - 0.5 * len));
                next.push((mid + 0.5 * len, hi));
            }
            intervals = next;
        }
        gaps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(TwoSheet {
            levels,
            kappa,
            gaps,
        })
    }

    /// Peak of gap i is kappa·b_i.
    pub fn height(&self, t: f64) -> f64 {
        self.gaps
            .iter()
            .map(|&(a, b)| self.kappa * b * std::f64::consts::E * bump((t - a) / b))
            .sum()
    }

    pub fn cantor_measure(&self) -> f64 {
        1.0 - self.gaps.iter().map(|g| 2.0 * g.1).sum::<f64>()
    }

    /// Gap containing t, if any.
    pub fn gap_of(&self, t: f64) -> Option<(f64, f64)> {
        self.gaps.iter().copied().find(|&(a, b)| (t - a).abs() < b)
    }

    /// Base segment [0,1]×{0} plus the graph of the height, on shared nodes.
    pub fn chain(&self, nodes: usize) -> Result<PolyChain> {
        if nodes < 2 {
            return Err(GmtError::invalid("two_sheet_cantor needs at least 2 nodes"));
        }
        let mut ts: Vec<f64> = (0..=nodes).map(|i| i as f64 / nodes as f64).collect();
        for &(a, b) in &self.gaps {
            let per = 32;
            for j in 0..=per {
                ts.push(a - b + 2.0 * b * j as f64 / per as f64);
            }
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut terms = Vec::new();
        for w in ts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            terms.push(Term {
                simplex: Simplex::new(&[vec![t0, 0.0], vec![t1, 0.0]]),
                coeff: Coeff::Integer(1),
            });
            terms.push(Term {
                simplex: Simplex::new(&[vec![t0, self.height(t0)], vec![t1, self.height(t1)]]),
                coeff: Coeff::Integer(1),
            });
        }
        PolyChain::from_terms(2, 1, GroupSpec::Integers, terms)
    }
}

/// One horizontal unit segment per nonzero element of (Z/2)^depth, at
/// heights spread over 1e-10, far below any scan radius. Returns the chain, Σ‖g‖ and the heights.
pub fn cantor_group(depth: u32) -> Result<(PolyChain, f64, Vec<f64>)> {
    let spec = GroupSpec::Cantor { depth };
    spec.validate()?;
    if depth > 12 {
        return Err(GmtError::invalid("cantor_group depth must be at most 12"));
    }
    let count = 1u64 << depth;
    let mut terms = Vec::new();
    let mut heights = Vec::new();
    let mut sum = 0.0;
    for bits in 1..count {
        let h = 1e-10 * bits as f64 / count as f64;
        let g = Coeff::Cantor { depth, bits };
        sum += g.norm();
        heights.push(h);
        terms.push(Term {
            simplex: Simplex::new(&[vec![0.0, h], vec![1.0, h]]),
            coeff: g,
        });
    }
    Ok((PolyChain::from_terms(2, 1, spec, terms)?, sum, heights))
}

/// Graph of t ↦ scale·max(t,0)^{1+α} on [−1, 1].
pub fn holder_graph(alpha: f64, scale: f64, nodes: usize) -> Result<PolyChain> {
    if !(alpha > 0.0 && alpha <= 1.0) || nodes < 2 {
        return Err(GmtError::invalid(
            "holder_graph needs 0 < alpha <= 1 and nodes >= 2",
        ));
    }
    let f = |t: f64| scale * t.max(0.0).powf(1.0 + alpha);
    let segs: Vec<Vec<Vec<f64>>> = (0..nodes)
        .map(|i| {
            let t0 = -1.0 + 2.0 * i as f64 / nodes as f64;
            let t1 = -1.0 + 2.0 * (i + 1) as f64 / nodes as f64;
            vec![vec![t0, f(t0)], vec![t1, f(t1)]]
        })
        .collect();
    PolyChain::from_simplices(&segs, Coeff::Integer(1))
}

/// Random chain for property tests: `count` simplices with vertices in
/// [−1, 1]^n and random nonzero coefficients.
pub fn random_chain(
    n: usize,
    m: usize,
    count: usize,
    group: GroupSpec,
    seed: u64,
) -> Result<PolyChain> {
    group.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let vs: Vec<Vec<f64>> = (0..=m)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let coeff = match group {
            GroupSpec::Integers | GroupSpec::Unit => {
                let v: i64 = rng.gen_range(1..=4);
                group.element(if rng.gen_bool(0.5) { v } else { -v })
            }
            GroupSpec::Cantor { depth } => group.element(rng.gen_range(1..(1i64 << depth))),
        };
        terms.push(Term {
            simplex: Simplex::new(&vs),
            coeff,
        });
    }
    PolyChain::from_terms(n, m, group, terms)
}
