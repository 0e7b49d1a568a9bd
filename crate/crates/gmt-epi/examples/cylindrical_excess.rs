//! Layers over a base plane, cylindrical excess and multiplicity statistics
//! for a tilted disk and for two stacked sheets.

use gmt_epi::coeff::GroupSpec;
use gmt_epi::generate::{stacked, tilted};
use gmt_epi::geom::{
    cylindrical_excess, decompose_layers, height_sup, multiplicity_stats, BaseRegion, LayerOptions,
    OrientedPlane,
};

fn main() -> gmt_epi::Result<()> {
    let v = OrientedPlane::coordinate(3, 2);
    let opts = LayerOptions {
        check_radius: 0.5,
        grid: 24,
    };
    let region = BaseRegion::ball(2, 0.5);

    for slope in [0.05, 0.1, 0.2] {
        let t = tilted(slope, 128)?;
        let l = decompose_layers(&t, &v, &opts)?;
        let exc = cylindrical_excess(&l, &region)?;
        let want = (std::f64::consts::PI * 0.25) * ((1.0 + slope * slope).sqrt() - 1.0);
        println!(
            "slope {slope}: excess {:.3e} (exact {:.3e}), height sup {:.5}",
            exc.excess,
            want,
            height_sup(&t, &v, 0.5)?
        );
    }

    let t = stacked(128, &[0.0, 0.05], &[1, 2], GroupSpec::Integers)?;
    let l = decompose_layers(&t, &v, &opts)?;
    let exc = cylindrical_excess(&l, &region)?;
    let m = multiplicity_stats(&l, &region, (exc.excess / l.g0.norm()).max(1e-12))?;
    println!(
        "two sheets with g = 1, 2: g0 = {}, excess {:.4}, overlap measure {:.4}, bounds hold: {}",
        l.g0,
        exc.excess,
        m.e2_measure,
        m.all_hold()
    );
    Ok(())
}
