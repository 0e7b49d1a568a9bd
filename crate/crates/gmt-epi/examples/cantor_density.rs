//! Segments weighted by truncated Cantor group elements: the density at a
//! point is a weight sum while the group gap 3^-d shrinks with the depth.

use gmt_epi::coeff::GroupSpec;
use gmt_epi::generate::cantor_group;
use gmt_epi::scan::{multiscale_scan, ScanConfig};

fn main() -> gmt_epi::Result<()> {
    for depth in [2, 3, 4, 6] {
        let (t, weight_sum, heights) = cantor_group(depth)?;
        let x = vec![0.5, 0.0];
        let rep = multiscale_scan(&t, &[x], 0.1, 6, &ScanConfig::default())?;
        let plateau = rep.points[0].density_plateau.unwrap_or(f64::NAN);
        println!(
            "depth {depth}: {} segments at heights up to {:.1e}, density plateau {plateau:.12}, weight sum {weight_sum:.12}, gap {:.3e}",
            t.len(),
            heights.iter().cloned().fold(0.0, f64::max),
            GroupSpec::Cantor { depth }.gap()
        );
    }
    Ok(())
}
