//! Closed adiabatic evolution: the final ground-state error falls quickly as
//! the runtime is dilated.

use aqc_shield::engine::{run_closed_adiabatic, IntegratorConfig};
use aqc_shield::model::{universal_2local, ScheduleKind};

fn main() -> aqc_shield::Result<()> {
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    for schedule in [ScheduleKind::Linear, ScheduleKind::SmoothEndpoint] {
        let spec = universal_2local(2, false, schedule, 10.0, 1.0)?;
        for r in [1.0, 2.0, 4.0, 8.0] {
            let run = run_closed_adiabatic(&spec, r, &cfg)?;
            println!(
                "{schedule:?} r = {r}: δ_ad = {:.3e} ({} steps)",
                run.delta_ad, run.diagnostics.accepted
            );
        }
    }
    Ok(())
}
