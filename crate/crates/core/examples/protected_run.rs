//! One protected computation: the encoded problem coupled to a single bath
//! qubit, with periodic decoupling over the universal group.

use aqc_shield::codes::universal_group;
use aqc_shield::engine::{bath_initial_state, run_protected, BathState, IntegratorConfig, ProtectedModel};
use aqc_shield::metrics::error_report;
use aqc_shield::model::{linear_decoherence, norm_bounds, universal_2local, ScheduleKind};
use aqc_shield::protocols::pdd_schedule;

fn main() -> aqc_shield::Result<()> {
    let coupling = 0.1;
    let schedule = pdd_schedule(&universal_group(4)?, 0.1, 0.0, 48)?;
    let spec = universal_2local(4, true, ScheduleKind::SmoothEndpoint, schedule.total_time(), 1.0)?;
    let bath = linear_decoherence(4, 1, coupling, 0.5, 7)?;
    let rho_b = bath_initial_state(&bath, BathState::Mixed)?;
    let model = ProtectedModel {
        spec: &spec,
        bath: &bath,
        penalty: None,
    };
    let run = run_protected(model, &schedule, &rho_b, &IntegratorConfig::with_tolerance(1e-8))?;
    let beta = norm_bounds(&spec, bath.h_b(), 41)?.beta;
    let report = error_report(&run, &schedule, coupling, beta, 1.0)?;

    println!("{}", schedule.summary(coupling));
    println!("δ_ad = {:.4e}", report.delta_ad);
    println!("d_D  = {:.4e}", report.d_d);
    println!("δ_S  = {:.4e}", report.delta_s);
    println!("Φ    = {:?}", report.phi);
    println!("verdicts: {:?}", report.verdicts);
    Ok(())
}
