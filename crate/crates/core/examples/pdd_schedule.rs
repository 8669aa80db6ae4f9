//! A periodic decoupling schedule over the universal group with finite-width
//! pulses.

use aqc_shield::codes::universal_group;
use aqc_shield::protocols::{control_hamiltonian, pdd_schedule};
use aqc_shield::linalg::op_norm;

fn main() -> aqc_shield::Result<()> {
    let g = universal_group(4)?;
    let schedule = pdd_schedule(&g, 0.2, 0.02, 3)?;
    println!("{}", schedule.summary(0.1));
    for (k, p) in schedule.pulses().iter().enumerate() {
        println!("pulse {k}: {p}");
    }
    for seg in schedule.segments().iter().take(8) {
        println!("[{:.3}, {:.3}] pulse {:?}", seg.start, seg.end, seg.pulse);
    }
    let t = schedule.slot_start(1) - 0.01;
    println!("‖H_C({t:.3})‖ = {:.3}", op_norm(&control_hamiltonian(&schedule, t)?));
    Ok(())
}
