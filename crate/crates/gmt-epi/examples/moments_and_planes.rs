//! Second moments, the spectral plane and β numbers on a tilted cone.

use gmt_epi::generate::{cone_harmonic, tilted};
use gmt_epi::geom::plane_distance;
use gmt_epi::moments::{beta_numbers, moments_all, omega, quad_form, select_plane};

fn main() -> gmt_epi::Result<()> {
    let t = tilted(0.1, 256)?;
    let x = [0.0; 3];
    let q = quad_form(&t, &x, 0.5, 0.01)?;
    let sel = select_plane(&q, 2)?;
    let normal = [-0.1, 0.0, 1.0];
    println!(
        "tilted disk: eigen-gap {:.4}, plane normal should be {normal:?}",
        sel.gap
    );
    println!(
        "  distance to the horizontal plane {:.4}",
        plane_distance(&sel.plane, &gmt_epi::geom::OrientedPlane::coordinate(3, 2))?
    );

    let c = cone_harmonic(2, 0.05, 256, 2.5)?;
    println!("harmonic cone, center 0:");
    println!("       r        V/nu r^4   residual V-sumP   beta2       beta_inf");
    for r in [0.125, 0.25, 0.5, 1.0] {
        let rec = moments_all(&c, &x, r, 0.01)?;
        let w = select_plane(&quad_form(&c, &x, r, 0.01)?, 2)?.plane;
        let b = beta_numbers(&c, &x, r, &w, 0.01)?;
        println!(
            "  {r:7.3}  {:12.6}  {:14.2e}  {:.4e}  {:.4e}",
            rec.v_normalized, rec.identity_residual, b.beta2, b.beta_inf
        );
    }
    println!("omega(2,1) = {:.6} = pi/2", omega(2, 1));
    Ok(())
}
