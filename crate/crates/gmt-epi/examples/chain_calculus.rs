//! Boundary, cone, slice and ball restriction on a triangulated disk.

use gmt_epi::chain::{
    boundary, cone, cone_mass_formula, restrict_ball, slice, AffineFunctional, Ball,
};
use gmt_epi::coeff::Coeff;
use gmt_epi::generate::flat_disk;

fn main() -> gmt_epi::Result<()> {
    for sides in [8, 32, 128] {
        let disk = flat_disk(sides, 3, Coeff::Integer(1))?;
        let rim = boundary(&disk)?;
        let c = cone(&[0.0; 3], &rim)?;
        println!(
            "N = {sides:4}: rim length {:.6}, cone mass {:.12}, formula {:.12}, pi - mass {:.3e}",
            rim.mass(),
            c.mass(),
            cone_mass_formula(&[0.0; 3], &rim),
            std::f64::consts::PI - c.mass()
        );
        assert!(boundary(&rim)?.is_empty());
    }

    let disk = flat_disk(256, 3, Coeff::Integer(2))?;
    let level = 0.3;
    let s = slice(
        &disk,
        &AffineFunctional::new(vec![1.0, 0.0, 0.0], 0.0),
        level,
    )?;
    println!(
        "slice at x1 = {level}: mass {:.6} (chord 2*2*sqrt(1 - x1^2) = {:.6})",
        s.mass(),
        4.0 * (1.0f64 - level * level).sqrt()
    );

    let piece = restrict_ball(&disk, &Ball::new(vec![0.5, 0.0, 0.0], 0.25)?, 0.01)?;
    println!(
        "T restricted to B((0.5,0,0), 0.25): {} simplices, mass {:.6}, 2*pi*0.25^2 = {:.6}, straddling mass {:.2e}",
        piece.chain.len(),
        piece.chain.mass(),
        2.0 * std::f64::consts::PI * 0.0625,
        piece.mass_error
    );
    Ok(())
}
