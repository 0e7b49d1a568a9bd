use std::collections::HashMap;

use super::{snap_key, PolyChain, Simplex, Term};
use crate::error::{GmtError, Result};
use crate::linalg;

/// ∂T as the alternating face sum, merged.
///
/// For chains of dimension 2 the boundary edges are first split at vertices
/// of other boundary edges lying on their interior, so meshes with hanging
/// nodes still cancel along shared edges.
pub fn boundary(t: &PolyChain) -> Result<PolyChain> {
    let m = t.dim();
    if m == 0 {
        return Err(GmtError::invalid("boundary of a 0-chain"));
    }
    let mut faces = Vec::with_capacity(t.len() * (m + 1));
    for term in t.terms() {
        for i in 0..=m {
            let c = if i % 2 == 0 {
                term.coeff
            } else {
                term.coeff.neg()
            };
            faces.push(Term {
                simplex: term.simplex.face(i),
                coeff: c,
            });
        }
    }
    if m == 2 {
        // shared edges cancel exactly first; only the survivors can carry
        // hanging vertices that matter
        let merged = PolyChain::raw(t.ambient(), 1, t.group(), faces).canonical();
        faces = split_collinear(merged.terms().to_vec());
    }
    Ok(PolyChain::raw(t.ambient(), m - 1, t.group(), faces).canonical())
}

fn split_collinear(edges: Vec<Term>) -> Vec<Term> {
    if edges.is_empty() {
        return edges;
    }
    // distinct endpoints
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut seen = HashMap::new();
    for e in &edges {
        for v in e.simplex.vertices() {
            seen.entry(snap_key(v)).or_insert_with(|| {
                pts.push(v.to_vec());
                pts.len() - 1
            });
        }
    }
    let mean_len = edges.iter().map(|e| e.simplex.volume()).sum::<f64>() / edges.len() as f64;
    let cell = mean_len.max(1e-9);
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (k, p) in pts.iter().enumerate() {
        grid.entry(cell_key(p, cell)).or_default().push(k);
    }
    let mut out = Vec::with_capacity(edges.len());
    for e in edges {
        let a = e.simplex.vertex(0).to_vec();
        let b = e.simplex.vertex(1).to_vec();
        let d = linalg::sub(&b, &a);
        let l2 = linalg::norm2(&d);
        let l = l2.sqrt();
        let tol = 1e-10 * l.max(1e-12);
        // cells along the segment plus their neighbours
        let steps = (l / cell).ceil() as usize + 1;
        let mut keys = std::collections::HashSet::new();
        for s in 0..=steps {
            let p = linalg::lerp(&a, &b, s as f64 / steps as f64);
            let c = cell_key(&p, cell);
            let lo: Vec<i64> = c.iter().map(|k| k - 1).collect();
            let hi: Vec<i64> = c.iter().map(|k| k + 1).collect();
            visit_cells(&lo, &hi, &mut |key| {
                keys.insert(key.clone());
            });
        }
        let mut cuts: Vec<(f64, usize)> = Vec::new();
        for key in &keys {
            if let Some(list) = grid.get(key) {
                for &k in list {
                    let p = &pts[k];
                    let s = linalg::dot(&linalg::sub(p, &a), &d) / l2;
                    if s * l <= tol || (1.0 - s) * l <= tol {
                        continue;
                    }
                    let q = linalg::lerp(&a, &b, s);
                    if linalg::dist(&q, p) <= tol {
                        cuts.push((s, k));
                    }
                }
            }
        }
        if cuts.is_empty() {
            out.push(e);
            continue;
        }
        cuts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        cuts.dedup_by_key(|c| c.1);
        let mut prev = a.clone();
        for (_, k) in &cuts {
            out.push(Term {
                simplex: Simplex::new(&[prev.clone(), pts[*k].clone()]),
                coeff: e.coeff,
            });
            prev = pts[*k].clone();
        }
        out.push(Term {
            simplex: Simplex::new(&[prev, b]),
            coeff: e.coeff,
        });
    }
    out
}

fn cell_key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|x| (x / cell).floor() as i64).collect()
}

fn visit_cells(lo: &[i64], hi: &[i64], f: &mut impl FnMut(&Vec<i64>)) {
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut d = 0;
        loop {
            if d == cur.len() {
                return;
            }
            cur[d] += 1;
            if cur[d] <= hi[d] {
                break;
            }
            cur[d] = lo[d];
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Coeff, GroupSpec};

    fn v(x: f64, y: f64) -> Vec<f64> {
        vec![x, y]
    }

    #[test]
    fn triangle_boundary_is_closed_loop() {
        let t =
            PolyChain::from_simplices(&[vec![v(0., 0.), v(1., 0.), v(0., 1.)]], Coeff::Integer(1))
                .unwrap();
        let b = boundary(&t).unwrap();
        assert_eq!(b.len(), 3);
        assert!(boundary(&b).unwrap().is_empty());
    }

    #[test]
    fn glued_triangles_cancel_shared_edge() {
        let t = PolyChain::from_simplices(
            &[
                vec![v(0., 0.), v(1., 0.), v(1., 1.)],
                vec![v(0., 0.), v(1., 1.), v(0., 1.)],
            ],
            Coeff::Integer(1),
        )
        .unwrap();
        let b = boundary(&t).unwrap();
        assert_eq!(b.len(), 4);
        assert!((b.mass() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn opposite_coefficients_double_on_shared_edge() {
        let s1 = Simplex::new(&[v(0., 0.), v(1., 0.), v(1., 1.)]);
        let s2 = Simplex::new(&[v(0., 0.), v(1., 1.), v(0., 1.)]);
        let t = PolyChain::from_terms(
            2,
            2,
            GroupSpec::Integers,
            vec![
                Term {
                    simplex: s1.clone(),
                    coeff: Coeff::Integer(1),
                },
                Term {
                    simplex: s2.clone(),
                    coeff: Coeff::Integer(-1),
                },
            ],
        )
        .unwrap();
        let b = boundary(&t).unwrap();
        let diag: Vec<_> = b
            .terms()
            .iter()
            .filter(|t| (t.simplex.volume() - 2f64.sqrt()).abs() < 1e-12)
            .collect();
        assert_eq!(diag.len(), 1);
        assert_eq!(diag[0].coeff.norm(), 2.0);

        let g = Coeff::from_cantor_digits(&[1, 0, 0]).unwrap();
        let t = PolyChain::from_terms(
            2,
            2,
            GroupSpec::Cantor { depth: 3 },
            vec![
                Term {
                    simplex: s1,
                    coeff: g,
                },
                Term {
                    simplex: s2,
                    coeff: g.neg(),
                },
            ],
        )
        .unwrap();
        let b = boundary(&t).unwrap();
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn hanging_node_cancels() {
        // big triangle next to two small ones sharing a split edge
        let t = PolyChain::from_simplices(
            &[
                vec![v(0., 0.), v(1., 0.), v(0., 1.)],
                vec![v(1., 0.), v(1., 1.), v(0.5, 0.5)],
                vec![v(0.5, 0.5), v(1., 1.), v(0., 1.)],
            ],
            Coeff::Integer(1),
        )
        .unwrap();
        let b = boundary(&t).unwrap();
        assert!((b.mass() - 4.0).abs() < 1e-12, "mass {}", b.mass());
    }
}
