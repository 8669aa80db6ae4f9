//! Codewords and logical operators of the [[n, n−2, 2]] code stabilized by
//! the universal decoupling group.

use aqc_shield::codes::{code_from_universal_group, syndrome_sectors};
use aqc_shield::runner::code_listing;

fn main() -> aqc_shield::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    print!("{}", code_listing(n)?);

    let (code, _) = code_from_universal_group(n)?;
    for sector in syndrome_sectors(&code)? {
        println!("syndrome {:?}: rank {}", sector.label, sector.rank());
    }
    Ok(())
}
