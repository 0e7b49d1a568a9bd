//! Excess-decay bound on the power-law family f(r) = πr²(1 + r^β), ξ = 0.1 r^β.

use gmt_epi::verify::power_family_decay;

fn main() -> gmt_epi::Result<()> {
    for beta in [0.25, 0.5, 1.0] {
        let rep = power_family_decay(2, 1.0, 0.1, beta)?;
        println!(
            "beta {beta}: r0 {:.3e}, lambda0 {:.6}, Xi(r0) {:.4e}, min slack {:.4e}, holds {}",
            rep.r0, rep.lambda0, rep.big_xi_r0, rep.min_slack, rep.conclusion_holds
        );
        println!(
            "  ratio hypothesis lambda0 <= Xi/(Xi+xi): {} (min ratio {:.4})",
            rep.ratio_hypothesis, rep.ratio_min
        );
        for row in rep.rows.iter().step_by(66) {
            println!(
                "    r {:.3e}  lhs {:+.4e}  rhs {:.4e}",
                row.r, row.lhs, row.rhs
            );
        }
    }
    Ok(())
}
