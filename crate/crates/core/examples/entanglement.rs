//! Peak entropy of entanglement between the two outputs as the power grows.
//!
//! cargo run --release --example entanglement

use levmirror::operating_point::OperatingPoint;
use levmirror::params::SystemParams;
use levmirror::steady_state::BranchLabel;
use levmirror::sweep::{Grid, Scale};

fn main() -> levmirror::Result<()> {
    let omegas = Grid::new(1e3, 1e7, 400, Scale::Log)?.points();
    println!(
        "{:>10} {:>12} {:>12} {:>12}",
        "p_tilde", "grid E2", "refined E2", "omega"
    );
    for p in [6e-4, 1e-3, 1.7e-3, 5e-3, 1e-2, 5e-2, 1e-1] {
        let op = OperatingPoint::new(&SystemParams::paper().with_p_tilde(p), BranchLabel::Blue)?;
        if !op.is_stable() {
            println!("{p:>10.2e}   unstable");
            continue;
        }
        let (_, coarse) = op.peak_entanglement(&omegas)?;
        let (w, fine) = op.refine_peak(&omegas, 1e-9)?;
        println!("{p:>10.2e} {coarse:>12.4} {fine:>12.4} {w:>12.4e}");
    }
    Ok(())
}
