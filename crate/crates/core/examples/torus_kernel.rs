//! Relations, orbit closures, coverage bounds and Diophantine hits.
use num_rational::BigRational;
use toricdec::torus::coverage::{coverage_bound, verify_coverage};
use toricdec::torus::diophantine::{continued_fraction, convergents, kronecker_hit};
use toricdec::torus::lattice::{orbit_closure, relation_lattice};
use toricdec::torus::real::{consts, DEFAULT_MAX_BITS};
use toricdec::torus::spec::rational_arc;
use toricdec::torus::{Coord, Real, TBox};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn main() -> toricdec::Result<()> {
    for angles in [vec![Real::ratio(1, 3), Real::ratio(1, 6)], vec![Real::ratio(1, 2), consts::golden()]] {
        let basis = relation_lattice(&angles, &[])?;
        let c = orbit_closure(&angles, &basis)?;
        println!("relations {:?} -> L={} rank={}", basis.rows, c.order, c.rank);
    }
    let coords = [Coord::new(consts::golden(), DEFAULT_MAX_BITS)];
    let j = TBox(vec![rational_arc(q(0, 1), q(51, 100))]);
    let cert = coverage_bound(&coords, &j, 1, 1 << 16)?;
    println!("arc (0, 0.51): K={} verified={}", cert.k, verify_coverage(&coords, &j, &cert)?);
    let n = kronecker_hit(&coords, &[q(1, 2)], &q(1, 20), 0, 1 << 16)?;
    println!("first n with |{{nφ}} - 1/2| < 1/20: {n}");
    let cf = continued_fraction(&consts::atan34(), 10, DEFAULT_MAX_BITS)?;
    let qs: Vec<String> = convergents(&cf).iter().map(|(_, d)| d.to_string()).collect();
    println!("arg(3+4i)/2π = [0; {}]  denominators {}", cf.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "), qs.join(" "));
    Ok(())
}
