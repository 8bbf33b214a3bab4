//! Codings of an irrational rotation by a half-open arc.

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::torus::circle::{arc_side, Side};
use crate::torus::real::{consts, DEFAULT_MAX_BITS};
use crate::torus::{Arc1, Coord, Lin, Real, TBox, TorusSpec};
use crate::word::{Alphabet, OmegaWord};

/// Letter 1 on `[ξ, ξ + λ)` under rotation by `θ`, where `λ = min(θ, 1 - θ)`.
/// `ξ` is `c + mθ` with `c` rational.
#[derive(Clone, Debug)]
pub struct SturmianSpec {
    pub theta: Real,
    pub xi: Lin,
}

impl SturmianSpec {
    /// Steps `n ≥ 0` whose orbit point is an arc endpoint.
    pub fn special_positions(&self) -> Result<Vec<u64>> {
        let hi = self.upper()?;
        let mut out: Vec<u64> = [&self.xi, &hi]
            .iter()
            .filter(|p| p.c.is_integer() && p.m >= 0)
            .map(|p| p.m as u64)
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn upper(&self) -> Result<Lin> {
        let half = BigRational::new(1.into(), 2.into());
        Ok(match self.theta.cmp_rational(&half, DEFAULT_MAX_BITS)? {
            std::cmp::Ordering::Less => self.xi.rotate(1),
            _ => self.xi.rotate(-1).shift(&BigRational::one()),
        })
    }

    pub fn torus_spec(&self) -> Result<TorusSpec> {
        if !self.theta.is_irrational() {
            return Err(Error::Certificate(format!("{} is not certified irrational", self.theta.name())));
        }
        let hi = self.upper()?;
        let special = self.special_positions()?;
        let m = special.last().map_or(0, |n| n + 2);
        let coord = Coord::new(self.theta.clone(), DEFAULT_MAX_BITS);
        let one = Arc1::open(self.xi.clone(), hi.clone());
        let mut head = Vec::with_capacity(m as usize);
        for n in 0..m {
            let p = Lin::zero().rotate(n as i64);
            let letter = if coord.same_point(&p, &self.xi) {
                1
            } else if coord.same_point(&p, &hi) {
                0
            } else {
                match arc_side(&coord, &one, &p)? {
                    Side::Inside => 1,
                    _ => 0,
                }
            };
            head.push(letter);
        }
        let zero = Arc1::open(hi, self.xi.clone());
        TorusSpec::new(vec![self.theta.clone()], vec![], vec![vec![TBox(vec![zero])], vec![TBox(vec![one])]], m, head)
    }
}

pub fn sturmian(name: impl Into<String>, spec: &SturmianSpec, alphabet: Alphabet) -> Result<OmegaWord> {
    if alphabet.len() != 2 {
        return Err(Error::input("a rotation coding needs exactly two letters"));
    }
    OmegaWord::from_torus(name, alphabet, spec.torus_spec()?)
}

/// Intercept `1 - θ` that makes the golden rotation read the Fibonacci word.
pub fn fib_xi() -> Lin {
    Lin::zero().rotate(-1)
}

pub fn fibonacci_sturmian() -> OmegaWord {
    let spec = SturmianSpec { theta: consts::golden(), xi: fib_xi() };
    sturmian("fibonacci_sturmian", &spec, Alphabet::from_chars("01").expect("static")).expect("static")
}

/// Rotation by `1 - 1/√2` from `1 - 2θ`, coding `b` as the arc letter.
pub fn salomaa_sturmian() -> OmegaWord {
    let spec = SturmianSpec { theta: consts::one_minus_inv_sqrt2(), xi: Lin::zero().rotate(-2) };
    sturmian("salomaa_sturmian", &spec, Alphabet::from_chars("ab").expect("static")).expect("static")
}
