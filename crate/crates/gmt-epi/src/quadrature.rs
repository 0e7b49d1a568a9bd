//! Quadrature rules: Grundmann-Möller on simplices, Gauss-Legendre on
//! intervals, and a polar product rule on the unit disk.

use std::sync::OnceLock;

/// Barycentric nodes and weights summing to one.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub bary: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(total - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Grundmann-Möller rule of polynomial degree `2s+1` on the `m`-simplex.
pub fn grundmann_moller(m: usize, s: usize) -> SimplexRule {
    let d = 2 * s + 1;
    let mut bary = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let denom = (d + m - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        // (d+m-2i)^d / (i! (d+m-i)!) up to a common factor, then normalized
        let mut w = sign * denom.powi(d as i32);
        w /= crate::linalg::factorial(i) * crate::linalg::factorial(d + m - i);
        let mut comps = Vec::new();
        compositions(s - i, m + 1, &mut Vec::new(), &mut comps);
        for beta in comps {
            bary.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    SimplexRule { bary, weights }
}

/// Cached degree-5 rule, exact for the degree-4 moment integrands.
pub fn degree5(m: usize) -> &'static SimplexRule {
    static RULES: OnceLock<Vec<SimplexRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=6).map(|k| grundmann_moller(k, 2)).collect());
    &rules[m]
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    for i in 0..k {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pk, pkm1) = if k == 0 {
                (1.0, 0.0)
            } else if k == 1 {
                (z, 1.0)
            } else {
                (p1, p0)
            };
            dp = k as f64 * (z * pk - pkm1) / (z * z - 1.0);
            let dz = pk / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Product rule on the unit disk: `radial` Gauss nodes in r (weight r dr)
/// times `angular` equispaced angles. Weights sum to π.
pub fn disk_rule(radial: usize, angular: usize) -> Vec<([f64; 2], f64)> {
    let (gx, gw) = gauss_legendre(radial);
    let mut out = Vec::with_capacity(radial * angular);
    for (xi, wi) in gx.iter().zip(&gw) {
        let r = 0.5 * (xi + 1.0);
        let wr = 0.5 * wi * r;
        for j in 0..angular {
            let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / angular as f64;
            out.push((
                [r * th.cos(), r * th.sin()],
                wr * 2.0 * std::f64::consts::PI / angular as f64,
            ));
        }
    }
    out
}
