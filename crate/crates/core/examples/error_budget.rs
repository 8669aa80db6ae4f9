//! The worst-case error-phase budget and the large-n error prediction of a
//! scaling rule.

use aqc_shield::metrics::{dd_error_prediction, phi_budget};
use aqc_shield::protocols::{scaled_parameters, ScalingRule};

fn main() -> aqc_shield::Result<()> {
    let b = phi_budget(0.1, 10.0, 0.0, 0.025, 4, 400, 1.0, 1.0);
    println!("budget: {b:?}");

    let rule = ScalingRule::new(2.0, 0.0, 1.5, 0.5)?;
    for n in [2, 4, 8, 16, 32] {
        let p = scaled_parameters(&rule, n, 4)?;
        let e = dd_error_prediction(&rule, n)?;
        println!(
            "n = {n:>2}: tau = {:.3e}, w = {:.3e}, T = {:.1}, L = {:>6}, predicted error {:.4}",
            p.tau, p.w, p.total_time, p.pulses, e.total
        );
    }
    Ok(())
}
