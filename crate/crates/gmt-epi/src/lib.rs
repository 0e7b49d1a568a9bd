//! Numerical workbench for polyhedral chains with coefficients in normed
//! abelian groups: chain calculus, cylindrical excess, an epiperimetric
//! comparison-surface construction, second-moment analysis and multiscale
//! flatness scanning.

pub mod chain;
pub mod cli;
pub mod coeff;
pub mod epi;
pub mod error;
pub mod generate;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod moments;
pub mod mono;
pub mod planar;
pub mod quadrature;
pub mod scan;
pub mod verify;

pub use chain::{PolyChain, Simplex, Term};
pub use coeff::{Coeff, GroupSpec};
pub use error::{GmtError, Result};

/// Volume of the unit m-ball.
pub fn unit_ball_volume(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(m - 2) * 2.0 * PI / m as f64,
    }
}
