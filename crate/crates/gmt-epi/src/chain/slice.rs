use super::clip::clip_rec;
use super::{PolyChain, Term};
use crate::error::{GmtError, Result};
use crate::linalg;

/// f(x) = ⟨a, x⟩ + c.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunctional {
    pub a: Vec<f64>,
    pub c: f64,
}

impl AffineFunctional {
    pub fn new(a: Vec<f64>, c: f64) -> AffineFunctional {
        AffineFunctional { a, c }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.a, x) + self.c
    }

    pub fn lip(&self) -> f64 {
        linalg::norm(&self.a)
    }
}

const LEVEL_TOL: f64 = 1e-12;

fn check_general_position(t: &PolyChain, f: &AffineFunctional) -> Result<()> {
    if f.a.len() != t.ambient() {
        return Err(GmtError::DimensionMismatch("functional dimension".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for term in t.terms() {
        let vals: Vec<f64> = term.simplex.vertices().map(|v| f.eval(v)).collect();
        let (a, b) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        let span = term.simplex.max_edge2().sqrt();
        if t.dim() > 0 && b - a <= LEVEL_TOL * span.max(1e-300) * f.lip().max(1.0) {
            return Err(GmtError::Degenerate(
                "a simplex lies in a level set of the slicing function".into(),
            ));
        }
        lo = lo.min(a);
        hi = hi.max(b);
    }
    if !t.is_empty() && hi - lo <= LEVEL_TOL * hi.abs().max(1.0) {
        return Err(GmtError::Degenerate(
            "slicing function is constant on the support".into(),
        ));
    }
    Ok(())
}

/// The slice ⟨T, f, t⟩ = ∂(T⌞{f ≤ t}) − (∂T)⌞{f ≤ t}.
pub fn slice(t: &PolyChain, f: &AffineFunctional, level: f64) -> Result<PolyChain> {
    if t.dim() == 0 {
        return Err(GmtError::invalid("cannot slice a 0-chain"));
    }
    check_general_position(t, f)?;
    let mut faces = Vec::new();
    for term in t.terms() {
        let vals: Vec<f64> = term.simplex.vertices().map(|v| level - f.eval(v)).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi < 0.0 || lo > 0.0 {
            continue;
        }
        let mut pieces = Vec::new();
        clip_rec(&term.simplex, vals, &mut pieces);
        for p in pieces {
            let tol = LEVEL_TOL * p.max_edge2().sqrt().max(1.0) * f.lip().max(1.0);
            for i in 0..=t.dim() {
                let face = p.face(i);
                if face.vertices().all(|v| (f.eval(v) - level).abs() <= tol) {
                    let c = if i % 2 == 0 {
                        term.coeff
                    } else {
                        term.coeff.neg()
                    };
                    faces.push(Term {
                        simplex: face,
                        coeff: c,
                    });
                }
            }
        }
    }
    Ok(PolyChain::raw(t.ambient(), t.dim() - 1, t.group(), faces).canonical())
}

/// (t, M⟨T, f, t⟩) for each sample level.
pub fn slice_mass_profile(
    t: &PolyChain,
    f: &AffineFunctional,
    samples: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_general_position(t, f)?;
    samples
        .iter()
        .map(|&s| Ok((s, slice(t, f, s)?.mass())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::generate::flat_disk;

    #[test]
    fn unit_square_slices() {
        let sq = PolyChain::from_simplices(
            &[
                vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]],
                vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            ],
            Coeff::Integer(1),
        )
        .unwrap();
        let f = AffineFunctional::new(vec![1.0, 0.0], 0.0);
        let ts: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let prof = slice_mass_profile(&sq, &f, &ts).unwrap();
        for (_, m) in &prof {
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_chords() {
        let d = flat_disk(64, 2, Coeff::Integer(1)).unwrap();
        let f = AffineFunctional::new(vec![1.0, 0.0], 0.0);
        for &t in &[-0.7, -0.2, 0.013, 0.5, 0.9] {
            let m = slice(&d, &f, t).unwrap().mass();
            let exact = 2.0 * (1.0f64 - t * t).sqrt();
            assert!((m - exact).abs() < 2e-2, "t={t} m={m} exact={exact}");
        }
    }

    #[test]
    fn constant_functional_is_rejected() {
        let d = flat_disk(8, 2, Coeff::Integer(1)).unwrap();
        let f = AffineFunctional::new(vec![0.0, 0.0], 1.0);
        assert!(slice(&d, &f, 1.0).is_err());
    }

    #[test]
    fn slice_boundary_is_boundary_of_piece() {
        let d = flat_disk(10, 2, Coeff::Integer(1)).unwrap();
        let f = AffineFunctional::new(vec![0.3, 1.0], 0.0);
        let s = slice(&d, &f, 0.2).unwrap();
        // a chord: ∂ of the slice is two points with opposite signs
        let b = crate::chain::boundary(&s).unwrap();
        assert_eq!(b.len(), 2);
        let total = b.terms()[0].coeff.add(&b.terms()[1].coeff);
        assert!(total.is_zero());
    }
}
