//! Density profiles, almost-monotonicity and the almost-minimality probe.

use gmt_epi::chain::PolyChain;
use gmt_epi::coeff::Coeff;
use gmt_epi::generate::{annulus, cone_harmonic, flat_disk};
use gmt_epi::measure::{geometric_grid, DensityProfile};
use gmt_epi::mono::{
    almost_minimal_probe, almost_monotone_check, density_limit, gauge_integral, Gauge,
};

fn main() -> gmt_epi::Result<()> {
    let c = cone_harmonic(2, 0.1, 256, 2.5)?;
    let radii = geometric_grid(0.05, 1.0, 16);
    let prof = DensityProfile::measure(&c, &[0.0; 3], &radii, 0.01)?;
    let lim = density_limit(&prof, 6, 1e-6)?;
    println!(
        "harmonic cone density ratios: {:.6} .. {:.6}, limit {:.6} (exists: {})",
        prof.values[0],
        prof.values[radii.len() - 1],
        lim.value,
        lim.exists
    );
    let check = almost_monotone_check(&prof, &Gauge::Zero);
    println!(
        "monotone with zero gauge: {} (worst gap {:.2e})",
        check.pass, check.worst.gap
    );

    let xi = Gauge::power(0.01, 0.5, 1.0)?;
    println!(
        "gauge 0.01 r^(1/2) integrates to {:?}",
        gauge_integral(&xi, 2)?
    );

    let disk = flat_disk(128, 3, Coeff::Integer(1))?;
    let rep = almost_minimal_probe(&disk, &[0.0; 3], 0.5, &[], &Gauge::Zero, 0.01)?;
    println!("flat disk, cone competitor only: {}", rep.verdict);

    // the central 0.1-disk lifted into a pyramid of height 0.3
    let small = flat_disk(64, 3, Coeff::Integer(1))?.dilate(0.1);
    let pyramid = small.map_vertices(3, |v| {
        let h = if v[0].hypot(v[1]) < 1e-12 { 0.3 } else { 0.0 };
        vec![v[0], v[1], h]
    });
    let spiky = annulus(0.1, 1.0, 64)?.try_add(&pyramid)?;
    let flat_patch: PolyChain = small.try_sub(&pyramid)?;
    let rep = almost_minimal_probe(&spiky, &[0.0; 3], 0.5, &[flat_patch], &Gauge::Zero, 0.01)?;
    println!("spiky disk: mass in B(0, 1/2) is {:.5}", rep.mass_in_ball);
    for e in &rep.entries {
        println!("  {:>12}: mass after the swap {:.5}, (1 + xi) times that {:.5}, mass in ball within bound: {}", e.label, e.mass_after, e.bound, e.holds);
    }
    println!("spiky disk: {}", rep.verdict);
    Ok(())
}
