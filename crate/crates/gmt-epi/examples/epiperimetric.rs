//! Comparison surface for harmonic cones: the excess of S against the cone P.
//!
//! The ball ratio must stay below λ = 319/320; the ratio on the inner core
//! approaches the degree-2 harmonic energy ratio 4/5.

use gmt_epi::epi::{build_comparison, EpiConfig};
use gmt_epi::generate::cone_harmonic;

fn main() -> gmt_epi::Result<()> {
    let cfg = EpiConfig::default();
    println!("amplitude   ball ratio  cylinder ratio  core ratio  energy ratio  lambda");
    for amp in [0.08, 0.04, 0.02] {
        let p = cone_harmonic(2, amp, 256, 2.5)?;
        let (s, rep) = build_comparison(&p, &cfg)?;
        println!(
            "{amp:9}  {:10.6}  {:14.6}  {:10.6}  {:12.6}  {:.6}",
            rep.ratio.unwrap_or(f64::NAN),
            rep.cylinder_ratio.unwrap_or(f64::NAN),
            rep.core_ratio.unwrap_or(f64::NAN),
            rep.energy_ratio.unwrap_or(f64::NAN),
            rep.lambda
        );
        println!(
            "           |w1| = {:.2e} (gate {:.2e}), plane drift {:.2e}, S has {} simplices, boundary defect {:.1e}",
            rep.w1_sup,
            rep.w1_bound,
            rep.plane_drift,
            s.len(),
            rep.boundary_defect
        );
    }
    Ok(())
}
