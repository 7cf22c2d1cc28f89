//! Both steady-state branches across the dimensionless power, with the
//! levitation threshold and the equation residuals.
//!
//! cargo run --example steady_state

use levmirror::params::{validate_regime, RegimeThresholds, SystemParams};
use levmirror::steady_state::{
    residual, solve_branches, threshold_power, threshold_power_bisection,
};

fn main() -> levmirror::Result<()> {
    let base = SystemParams::paper();
    let d = base.derived()?;
    println!("laser frequency   {:.6e} rad/s", d.omega_l);
    println!("mode index j      {}", d.mode_index);
    println!(
        "threshold p_tilde {:.10e} (bisection {:.10e})",
        threshold_power(&base)?,
        threshold_power_bisection(&base, 1e-14)?
    );
    println!();
    println!(
        "{:>10} {:>14} {:>14} {:>12} {:>10} {:>9}",
        "p_tilde", "delta_blue", "delta_red", "n_c", "residual", "regime"
    );
    for p in [4e-4, 5.7e-4, 1e-3, 1.7e-3, 5e-3, 5e-2, 1.0] {
        let params = base.with_p_tilde(p);
        match solve_branches(&params) {
            Ok((blue, red)) => {
                let r = residual(&blue, &params)?
                    .max_abs()
                    .max(residual(&red, &params)?.max_abs());
                let regime = validate_regime(&params, &blue, RegimeThresholds::default())?;
                println!(
                    "{:>10.3e} {:>14.6e} {:>14.6e} {:>12.4e} {:>10.1e} {:>9}",
                    p,
                    blue.delta,
                    red.delta,
                    blue.n_c,
                    r,
                    if regime.passes() { "good" } else { "wide" }
                );
            }
            Err(e) => println!("{p:>10.3e}   {e}"),
        }
    }
    Ok(())
}
