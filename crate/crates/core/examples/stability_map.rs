//! Stability of both branches over a coarse (kappa, Gamma) grid, drawn as a
//! character map: `#` stable, `.` unstable, blank without a steady state.
//!
//! cargo run --release --example stability_map

use levmirror::linearization::{stability_map, CellStatus};
use levmirror::params::SystemParams;
use levmirror::steady_state::BranchLabel;
use levmirror::sweep::{Grid, Scale};

fn main() -> levmirror::Result<()> {
    let params = SystemParams::paper();
    let kappas = Grid::new(1e5, 1e9, 24, Scale::Log)?.points();
    let gammas = Grid::new(1e2, 1e7, 48, Scale::Log)?.points();
    for label in [BranchLabel::Blue, BranchLabel::Red] {
        let cells = stability_map(&params, &kappas, &gammas, label);
        println!(
            "{label} branch, p_tilde = {}  (rows: kappa 1e9 -> 1e5, columns: Gamma 1e2 -> 1e7)",
            params.p_tilde
        );
        for row in cells.chunks(gammas.len()).rev() {
            let line: String = row
                .iter()
                .map(|c| match c.status {
                    CellStatus::Stable => '#',
                    CellStatus::Unstable => '.',
                    CellStatus::NoSteadyState => ' ',
                    CellStatus::NumericalError => '?',
                })
                .collect();
            println!("  {:9.2e} |{line}|", row[0].kappa);
        }
        let stable = cells
            .iter()
            .filter(|c| c.status == CellStatus::Stable)
            .count();
        println!("  {stable} of {} cells stable\n", cells.len());
    }
    let op = levmirror::operating_point::OperatingPoint::new(&params, BranchLabel::Blue)?;
    println!("paper point eigenvalues of A:");
    for z in op.verdict.eigenvalues {
        println!("  {:+.6e} {:+.6e}i", z.re, z.im);
    }
    Ok(())
}
