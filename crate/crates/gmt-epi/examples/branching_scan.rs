//! Multiscale scan of the two-sheet chain branching over a 3-level Cantor set.
//!
//! Gap points (one sheet locally) get a graph certificate at their flat
//! scale; the gap endpoints, where the sheets part, do not.

use gmt_epi::generate::TwoSheet;
use gmt_epi::scan::{extract_at_flat_scale, multiscale_scan, ScanConfig};

fn main() -> gmt_epi::Result<()> {
    let nodes: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1 << 15);
    let ts = TwoSheet::new(3, 0.3)?;
    let t = ts.chain(nodes)?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for &(a, b) in &ts.gaps {
        for s in [-0.5, 0.0, 0.5] {
            let x = a + s * b;
            points.push(vec![x, ts.height(x)]);
            labels.push(format!("gap    t = {x:.5}"));
        }
        for e in [a - b, a + b] {
            points.push(vec![e, 0.0]);
            labels.push(format!("branch t = {e:.5}"));
        }
    }
    let rep = multiscale_scan(&t, &points, 0.02, 10, &ScanConfig::default())?;
    for (i, label) in labels.iter().enumerate() {
        let flat = rep.points[i].flat_scale;
        match extract_at_flat_scale(&t, &rep, i) {
            Ok(c) => println!(
                "{label}: certified at r = {:.2e}, Lipschitz {:.3}, Dini {:.2e}",
                c.radius, c.lipschitz, c.dini
            ),
            Err(e) => println!(
                "{label}: no certificate at r = {}: {e}",
                flat.map_or("-".into(), |r| format!("{r:.2e}"))
            ),
        }
    }
    Ok(())
}
