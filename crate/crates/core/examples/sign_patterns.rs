//! Sign patterns of sin(nθ) and n sin(nθ) - 7 cos(nθ) for cos θ = 3/5, and
//! the pair word whose (+,-) gaps grow without bound.
use toricdec::zoo::{self, sign::GaussPoint, DriftSignSpec};

fn main() -> toricdec::Result<()> {
    let spec = DriftSignSpec::standard();
    println!("alpha {}", zoo::sign_static(&GaussPoint::three_four_five())?.render_prefix(60)?);
    println!("beta  {}", zoo::sign_drift(&spec)?.render_prefix(60)?);
    for n in 0..4 {
        println!("v({n}) = {}", spec.value(n)?);
    }
    for b in [5, 10, 20, 40] {
        let n = zoo::gap_witness(&spec, b, 1 << 24)?;
        let occ = zoo::plus_minus_occurrences(&spec, 3, n + b)?;
        println!("no (+,-) in [{n}, {}); next ones at {occ:?}", n + b);
    }
    Ok(())
}
