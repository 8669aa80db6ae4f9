//! Spectrum of the encoded adiabatic Hamiltonian along the schedule and its
//! minimal gap.

use aqc_shield::model::{min_gap, universal_2local, ScheduleKind};

fn main() -> aqc_shield::Result<()> {
    for (n, encoded) in [(2, false), (4, true), (6, true)] {
        let spec = universal_2local(n, encoded, ScheduleKind::SmoothEndpoint, 1.0, 1.0)?;
        let report = min_gap(&spec, 101, true)?;
        println!(
            "n = {n} (encoded: {encoded}): min gap {:.6} at s = {:.6}, {} levels",
            report.gap,
            report.s_star,
            report.energies[0].len()
        );
    }
    Ok(())
}
