//! Mirror output variances along a sideband axis at the paper operating point,
//! next to the extremal eigenvalues of the mirror covariance block.
//!
//! cargo run --release --example squeezing

use levmirror::operating_point::OperatingPoint;
use levmirror::params::SystemParams;
use levmirror::steady_state::BranchLabel;
use levmirror::sweep::{Grid, Scale};

fn main() -> levmirror::Result<()> {
    let op = OperatingPoint::new(&SystemParams::paper(), BranchLabel::Blue)?;
    println!(
        "{:>12} {:>12} {:>12} {:>12} {:>12}",
        "omega", "Var Q_b", "Var P_b", "min eig", "max eig"
    );
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for w in Grid::new(1e4, 1e6, 41, Scale::Log)?.points() {
        let r = op.sideband(w)?;
        let v = r.variances;
        println!(
            "{w:>12.4e} {:>12.6} {:>12.4e} {:>12.4e} {:>12.4e}",
            v.q_b, v.p_b, r.mirror_eigen.0, r.mirror_eigen.1
        );
        if v.q_b < best.0 {
            best = (v.q_b, w, r.mirror_eigen.0);
        }
    }
    println!(
        "\nsmallest Var(Q_b) = {:.6} at omega = {:.4e} rad/s; min eigenvalue of sigma_b there = {:.4e}",
        best.0, best.1, best.2
    );
    Ok(())
}
