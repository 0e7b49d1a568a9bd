use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{GmtError, Result};
use crate::geom::OrientedPlane;
use crate::linalg;

/// Tail energy above this fraction of ‖w‖² means the cutoff is too small.
pub const TAIL_TOL: f64 = 0.01;

/// Boundary values w: S^{m−1} ⊂ W → W⊥ and their expansion in the
/// L²-normalized circle harmonics p_0 = 1/√(2π), p_k^1 = cos kθ/√π,
/// p_k^2 = sin kθ/√π (m = 2), or the even/odd pair on S⁰ (m = 1).
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryTrace {
    pub dim: usize,
    #[serde(skip)]
    pub plane: OrientedPlane,
    /// Angles of the samples, measured from the first frame vector of W;
    /// for m = 1 the two points ±1.
    pub angles: Vec<f64>,
    /// Ambient vectors in W⊥.
    pub samples: Vec<Vec<f64>>,
    /// Mean of w over the sphere.
    pub w0: Vec<f64>,
    /// coeffs[k] = (w_k^1, w_k^2); for k = 0 and for m = 1 the second entry is zero.
    pub coeffs: Vec<(Vec<f64>, Vec<f64>)>,
    pub cutoff: usize,
    /// ‖w‖²_{L²(S)} from the samples.
    pub l2_norm2: f64,
    /// 1 − Σ_{k≤K}|w_k|²/‖w‖².
    pub tail_fraction: f64,
}

fn zero(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

impl BoundaryTrace {
    /// Expansion of samples on the uniform grid θ_j = 2πj/N (m = 2), or of
    /// the values at +1 and −1 (m = 1).
    pub fn from_samples(
        plane: &OrientedPlane,
        samples: Vec<Vec<f64>>,
        cutoff: usize,
    ) -> Result<BoundaryTrace> {
        let m = plane.dim();
        let n = plane.ambient();
        if samples.iter().any(|s| s.len() != n) {
            return Err(GmtError::DimensionMismatch("trace sample length".into()));
        }
        match m {
            1 => {
                if samples.len() != 2 {
                    return Err(GmtError::invalid("a trace on S⁰ has exactly two values"));
                }
                let s2 = std::f64::consts::SQRT_2;
                let even = linalg::scale(&linalg::add(&samples[0], &samples[1]), 1.0 / s2);
                let odd = linalg::scale(&linalg::sub(&samples[0], &samples[1]), 1.0 / s2);
                let w0 = linalg::scale(&linalg::add(&samples[0], &samples[1]), 0.5);
                let l2 = linalg::norm2(&samples[0]) + linalg::norm2(&samples[1]);
                Ok(BoundaryTrace {
                    dim: 1,
                    plane: plane.clone(),
                    angles: vec![0.0, PI],
                    samples,
                    w0,
                    coeffs: vec![(even, zero(n)), (odd, zero(n))],
                    cutoff: 1,
                    l2_norm2: l2,
                    tail_fraction: 0.0,
                })
            }
            2 => {
                let big_n = samples.len();
                if big_n < 2 * cutoff + 1 {
                    return Err(GmtError::invalid(format!(
                        "{big_n} samples cannot resolve {cutoff} harmonics"
                    )));
                }
                let h = 2.0 * PI / big_n as f64;
                let angles: Vec<f64> = (0..big_n).map(|j| j as f64 * h).collect();
                let l2: f64 = samples.iter().map(|s| linalg::norm2(s)).sum::<f64>() * h;
                let mut coeffs = Vec::with_capacity(cutoff + 1);
                for k in 0..=cutoff {
                    let mut a = zero(n);
                    let mut b = zero(n);
                    for (t, s) in angles.iter().zip(&samples) {
                        let kt = k as f64 * t;
                        linalg::axpy(&mut a, kt.cos(), s);
                        linalg::axpy(&mut b, kt.sin(), s);
                    }
                    if k == 0 {
                        coeffs.push((linalg::scale(&a, h / (2.0 * PI).sqrt()), zero(n)));
                    } else if 2 * k == big_n {
                        // Nyquist: cos only, with full weight
                        coeffs.push((linalg::scale(&a, h / (2.0 * PI).sqrt()), zero(n)));
                    } else {
                        coeffs.push((
                            linalg::scale(&a, h / PI.sqrt()),
                            linalg::scale(&b, h / PI.sqrt()),
                        ));
                    }
                }
                let w0 = linalg::scale(&coeffs[0].0, 1.0 / (2.0 * PI).sqrt());
                let kept: f64 = coeffs
                    .iter()
                    .map(|(a, b)| linalg::norm2(a) + linalg::norm2(b))
                    .sum();
                let tail = if l2 > 0.0 {
                    (1.0 - kept / l2).max(0.0)
                } else {
                    0.0
                };
                Ok(BoundaryTrace {
                    dim: 2,
                    plane: plane.clone(),
                    angles,
                    samples,
                    w0,
                    coeffs,
                    cutoff,
                    l2_norm2: l2,
                    tail_fraction: tail,
                })
            }
            _ => Err(GmtError::Unsupported(format!(
                "boundary trace over a {m}-sphere"
            ))),
        }
    }

    /// Error when the truncated expansion misses more than 1% of ‖w‖².
    pub fn check_tail(&self) -> Result<()> {
        if self.tail_fraction > TAIL_TOL {
            return Err(GmtError::invalid(format!(
                "harmonic cutoff {} leaves {:.3}% of the trace energy in the tail",
                self.cutoff,
                100.0 * self.tail_fraction
            )));
        }
        Ok(())
    }

    fn eigenvalue(&self, k: usize) -> f64 {
        (k * (self.dim + k)) as f64 - 2.0 * k as f64
    }

    fn mode_norm2(&self, k: usize) -> f64 {
        let (a, b) = &self.coeffs[k];
        linalg::norm2(a) + linalg::norm2(b)
    }

    /// ∫_S |w|² from the kept coefficients.
    pub fn l2_truncated(&self) -> f64 {
        (0..self.coeffs.len()).map(|k| self.mode_norm2(k)).sum()
    }

    /// ∫_S ‖D_S w‖² = Σ k(m+k−2)|w_k|².
    pub fn tangential_energy(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|k| self.eigenvalue(k) * self.mode_norm2(k))
            .sum()
    }

    /// Dirichlet energy of the 1-homogeneous extension over the unit ball:
    /// (1/m)∫_S |w|² + ‖D_S w‖².
    pub fn cone_energy(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|k| (1.0 + self.eigenvalue(k)) * self.mode_norm2(k))
            .sum::<f64>()
            / self.dim as f64
    }

    /// Dirichlet energy of h(tx) = w₀ + t²(w(x) − w₀):
    /// (1/(m+2))∫_S 4|w − w₀|² + ‖D_S w‖².
    pub fn degree2_energy(&self) -> f64 {
        (1..self.coeffs.len())
            .map(|k| (4.0 + self.eigenvalue(k)) * self.mode_norm2(k))
            .sum::<f64>()
            / (self.dim + 2) as f64
    }

    /// degree-2 energy over cone energy, `None` when the cone energy vanishes.
    pub fn energy_ratio(&self) -> Option<f64> {
        let c = self.cone_energy();
        (c > 1e-300).then(|| self.degree2_energy() / c)
    }

    /// sup_S |w₁|, the size of the linear part.
    pub fn linear_sup(&self) -> f64 {
        if self.coeffs.len() < 2 {
            return 0.0;
        }
        let (a, b) = &self.coeffs[1];
        match self.dim {
            1 => linalg::norm(a) / std::f64::consts::SQRT_2,
            _ => {
                let aa = linalg::norm2(a);
                let bb = linalg::norm2(b);
                let ab = linalg::dot(a, b);
                let top = 0.5 * (aa + bb) + (0.25 * (aa - bb).powi(2) + ab * ab).sqrt();
                (top / PI).sqrt()
            }
        }
    }

    /// w at an angle from the truncated series (m = 2), or at ±1 (m = 1,
    /// angle 0 or π).
    pub fn eval(&self, theta: f64) -> Vec<f64> {
        let n = self.plane.ambient();
        if self.dim == 1 {
            return if theta.cos() >= 0.0 {
                self.samples[0].clone()
            } else {
                self.samples[1].clone()
            };
        }
        let mut w = linalg::scale(&self.coeffs[0].0, 1.0 / (2.0 * PI).sqrt());
        let half = self.samples.len() % 2 == 0 && 2 * self.cutoff == self.samples.len();
        for k in 1..self.coeffs.len() {
            let (a, b) = &self.coeffs[k];
            let kt = k as f64 * theta;
            let s = if half && k == self.cutoff {
                (2.0 * PI).sqrt()
            } else {
                PI.sqrt()
            };
            linalg::axpy(&mut w, kt.cos() / s, a);
            linalg::axpy(&mut w, kt.sin() / s, b);
        }
        debug_assert_eq!(w.len(), n);
        w
    }
}

/// h(tx) = w₀ + t²(w(x) − w₀) on the unit ball of W.
#[derive(Debug, Clone)]
pub struct Degree2Extension {
    pub trace: BoundaryTrace,
}

pub fn degree2_extension(tr: BoundaryTrace) -> Degree2Extension {
    Degree2Extension { trace: tr }
}

impl Degree2Extension {
    /// h at W-coordinates u, |u| ≤ 1.
    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        let t2 = linalg::norm2(u);
        let w0 = &self.trace.w0;
        if t2 == 0.0 {
            return w0.clone();
        }
        let th = if u.len() == 1 {
            if u[0] >= 0.0 {
                0.0
            } else {
                PI
            }
        } else {
            u[1].atan2(u[0])
        };
        let w = self.trace.eval(th);
        let mut h = w0.clone();
        linalg::axpy(&mut h, t2, &linalg::sub(&w, w0));
        h
    }

    pub fn energy(&self) -> f64 {
        self.trace.degree2_energy()
    }
}

/// λ = (2m+1 − 4^{−m−1})/(2m+1).
pub fn lambda(m: usize) -> f64 {
    let d = (2 * m + 1) as f64;
    (d - 4f64.powi(-(m as i32) - 1)) / d
}
