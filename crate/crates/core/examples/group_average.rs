//! The group average over the universal decoupling group removes every
//! linear system-bath coupling and leaves operators in the commutant.

use aqc_shield::codes::{group_average, lifted_group_average, universal_group};
use aqc_shield::linalg::{commutator, op_norm};
use aqc_shield::model::linear_decoherence;
use aqc_shield::pauli::PauliString;

fn main() -> aqc_shield::Result<()> {
    for n in [2, 4] {
        let g = universal_group(n)?;
        let bath = linear_decoherence(n, 1, 1.0, 1.0, 42)?;
        let h_sb = bath.h_sb()?;
        let averaged = lifted_group_average(&g, &h_sb, bath.bath_dim())?;
        println!("n = {n}: ‖H_SB‖ = {:.3}, ‖Π(H_SB)‖ = {:.2e}", op_norm(&h_sb), op_norm(&averaged));
    }

    let g = universal_group(4)?;
    let zz: PauliString = "ZZII".parse()?;
    let xi: PauliString = "XIII".parse()?;
    let a = zz.to_dense()? + xi.to_dense()?;
    let pa = group_average(&g, &a)?;
    println!("Π(ZZII + XIII) keeps ZZII: ‖Π(a) − ZZII‖ = {:.1e}", op_norm(&(&pa - zz.to_dense()?)));
    for el in g.elements() {
        println!("  ‖[Π(a), {el}]‖ = {:.1e}", op_norm(&commutator(&pa, &el.to_dense()?)));
    }
    Ok(())
}
