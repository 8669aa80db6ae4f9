//! Pauli string arithmetic: products with phases, commutation, dense forms.

use aqc_shield::linalg::max_abs;
use aqc_shield::pauli::PauliString;

fn main() -> aqc_shield::Result<()> {
    let a: PauliString = "XYZI".parse()?;
    let b: PauliString = "ZZXI".parse()?;
    let ab = a.mul(&b)?;
    let ba = b.mul(&a)?;
    println!("a = {a}, b = {b}");
    println!("ab = {ab}, ba = {ba}");
    println!("commute: {}", a.commutes(&b)?);
    println!("weight(a) = {}, support = {:?}", a.weight(), a.support());

    let dense = &a.to_dense()? * &b.to_dense()?;
    println!("|dense(ab) − dense(a)dense(b)| = {:.1e}", max_abs(&(ab.to_dense()? - dense)));

    let global = PauliString::global(4, aqc_shield::pauli::Pauli::Y);
    println!("Y⊗4 = {global}, Hermitian: {}", global.is_hermitian());
    Ok(())
}
