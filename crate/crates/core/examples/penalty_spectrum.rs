//! Energy penalty built from the stabilizer group: codewords sit in the
//! ground space, single-qubit errors are lifted by 2·a·E_P where a counts
//! the anticommuting group elements.

use aqc_shield::codes::{anticommuting_count, code_from_universal_group, penalty_hamiltonian, universal_group};
use aqc_shield::linalg::eigvalsh;
use aqc_shield::pauli::{Pauli, PauliString};
use nalgebra::DVector;

fn main() -> aqc_shield::Result<()> {
    let ep = 1.0;
    let g = universal_group(4)?;
    let hp = penalty_hamiltonian(&g, ep)?;
    let (code, _) = code_from_universal_group(4)?;
    println!("spectrum of H_P: {:?}", eigvalsh(&hp));

    let word = code.codewords()[0].state.amplitudes();
    for q in 0..4 {
        for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
            let err = PauliString::single(4, q, letter);
            let a = anticommuting_count(&g, &err)?;
            let psi = DVector::from_vec(err.apply(word.as_slice())?);
            let energy = psi.dotc(&(&hp * &psi)).re;
            println!("{err}: a = {a}, energy = {energy:+.3}");
        }
    }
    Ok(())
}
