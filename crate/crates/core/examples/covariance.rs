//! The full 8x8 sideband covariance matrix at one frequency, with the purity,
//! uncertainty and entropy diagnostics.
//!
//! cargo run --example covariance -- [p_tilde] [omega]

use levmirror::gaussian::{
    entanglement_entropy, purity_check, submatrices, uncertainty_min_eigenvalue,
};
use levmirror::operating_point::OperatingPoint;
use levmirror::params::SystemParams;
use levmirror::precision::purity_deviation;
use levmirror::steady_state::BranchLabel;

const LABELS: [&str; 8] = [
    "QC_b", "PC_b", "QS_b", "PS_b", "QC_a", "PC_a", "QS_a", "PS_a",
];

fn main() -> levmirror::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let p = args.next().transpose().ok().flatten().unwrap_or(1.7e-3);
    let omega = args.next().transpose().ok().flatten().unwrap_or(2.2e5);

    let op = OperatingPoint::new(&SystemParams::paper().with_p_tilde(p), BranchLabel::Blue)?;
    println!(
        "p_tilde {p:e}: delta {:.6e}, Omega_M {:.6}, g_C {:.6e}, stable {}",
        op.model.delta,
        op.model.omega_m,
        op.model.g_c,
        op.is_stable()
    );
    let c = op.covariance_at(omega)?;
    println!("sigma at omega = {omega:e} rad/s");
    print!("{:>6}", "");
    for l in LABELS {
        print!("{l:>12}");
    }
    println!();
    for (r, l) in LABELS.iter().enumerate() {
        print!("{l:>6}");
        for col in 0..8 {
            print!("{:>12.4e}", c.sigma[(r, col)]);
        }
        println!();
    }
    let e = entanglement_entropy(&c.sigma)?;
    println!(
        "E2 from mirror {:.9} ebits, from cavity {:.9} ebits",
        e.e2_from_b, e.e2_from_a
    );
    println!(
        "|det(2 sigma) - 1|: f64 {:.2e}, double-double {:.2e}",
        purity_check(&c.sigma),
        purity_deviation(&op.model, omega)?
    );
    println!(
        "min eig of sigma + i Omega / 2: {:.2e}",
        uncertainty_min_eigenvalue(&c.sigma)
    );
    println!(
        "largest mirror-cavity correlation {:.4e}",
        submatrices(&c.sigma).cross.abs().max()
    );
    Ok(())
}
