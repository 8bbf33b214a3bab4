//! Continued fractions, convergents and orbit hits, all certified by exact
//! interval refinement.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::circle::Coord;
use super::real::Real;
use crate::error::{Error, Result};

/// Quotients `a_1, a_2, …` of `t = [0; a_1, a_2, …]`, for rational `t`.
fn cf_rational(t: &BigRational) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut p, mut q) = (t.numer().clone(), t.denom().clone());
    // drop the integer part
    let (_, r) = p.div_mod_floor(&q);
    p = r;
    while !p.is_zero() {
        let (a, r) = q.div_mod_floor(&p);
        out.push(a);
        q = p;
        p = r;
    }
    out
}

/// First `k` partial quotients of `t ∈ (0, 1)`; fewer if `t` is rational and
/// its expansion terminates.
pub fn continued_fraction(t: &Real, k: usize, max_bits: u32) -> Result<Vec<BigInt>> {
    if let Some(q) = t.exact() {
        let mut cf = cf_rational(&q);
        cf.truncate(k);
        return Ok(cf);
    }
    let mut bits = 64u32.min(max_bits);
    loop {
        let d = t.approx(bits);
        let (lo, hi) = (cf_rational(&d.lo_rational()), cf_rational(&d.hi_rational()));
        // the last quotient of a rational endpoint is ambiguous
        let lo = &lo[..lo.len().saturating_sub(1)];
        let hi = &hi[..hi.len().saturating_sub(1)];
        let common = lo.iter().zip(hi).take_while(|(a, b)| a == b).count();
        if common >= k {
            return Ok(lo[..k].to_vec());
        }
        if bits >= max_bits {
            return Err(Error::Precision(format!("only {common} quotients of {t} certified")));
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// Convergents `p_i / q_i` of `[0; a_1, …]`, starting with `p_1 / q_1`.
pub fn convergents(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    let mut out = Vec::with_capacity(quotients.len());
    for a in quotients {
        let p = a * &p1 + &p0;
        let q = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p.clone());
        q0 = std::mem::replace(&mut q1, q.clone());
        out.push((p, q));
    }
    out
}

/// Whether `0 < n t - p < 1/n` for `p = floor(n t)`, decided exactly.
pub fn small_remainder(t: &Real, n: &BigInt, max_bits: u32) -> Result<bool> {
    let nq = BigRational::from_integer(n.clone());
    let mut bits = 64u32.min(max_bits);
    loop {
        let d = t.approx(bits);
        let (lo, hi) = (d.lo_rational() * &nq, d.hi_rational() * &nq);
        let p = lo.floor();
        if hi.floor() == p {
            let bound = &p + BigRational::one() / &nq;
            if hi < bound && lo > p {
                return Ok(true);
            }
            if lo >= bound {
                return Ok(false);
            }
        }
        if bits >= max_bits {
            return Err(Error::Precision(format!("cannot decide frac({n}·t) < 1/{n}")));
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// The first `count` denominators `n > 1` of convergents lying below `t`; each
/// satisfies `frac(n t) < 1/n`, re-checked before return.
pub fn small_remainder_witnesses(t: &Real, count: usize, max_bits: u32) -> Result<Vec<BigInt>> {
    if !t.is_irrational() {
        return Err(Error::input(format!("{t} carries no irrationality certificate")));
    }
    let mut k = 2 * count + 4;
    loop {
        let cf = continued_fraction(t, k, max_bits)?;
        let conv = convergents(&cf);
        // p_i/q_i < t exactly for even i (1-based numbering)
        let out: Vec<BigInt> = conv
            .iter()
            .enumerate()
            .filter(|(i, (_, q))| (i + 1) % 2 == 0 && *q > BigInt::one())
            .map(|(_, (_, q))| q.clone())
            .take(count)
            .collect();
        if out.len() == count {
            for n in &out {
                if !small_remainder(t, n, max_bits)? {
                    return Err(Error::Certificate(format!("frac({n}·t) >= 1/{n}")));
                }
            }
            return Ok(out);
        }
        k *= 2;
    }
}

/// Exact distance bounds: lower and upper bound of `Σ_j ‖n ψ_j - y_j‖`, both
/// scaled by `2^bits`.
fn distance_bounds(coords: &[Coord], n: u64, y: &[BigRational], bits: u32) -> (BigInt, BigInt) {
    let s = BigInt::one() << bits as usize;
    let half = &s >> 1usize;
    let mut lo_sum = BigInt::zero();
    let mut hi_sum = BigInt::zero();
    let extra = 64 - n.leading_zeros();
    for (c, yj) in coords.iter().zip(y) {
        let a = c.angle.approx(bits + extra + 2).scale_int(&BigInt::from(n)).coarsen(bits);
        let ys = (yj.numer() * &s).div_floor(yj.denom());
        // y is rounded down by < 1 ulp, so widen by one
        let x: BigInt = (&a.lo - &ys - 1i32).mod_floor(&s);
        let w: BigInt = &a.hi - &a.lo + 2i32;
        let dist = if x > half { &s - &x } else { x };
        let low: BigInt = &dist - &w;
        lo_sum += low.max(BigInt::zero());
        hi_sum += dist + w;
    }
    (lo_sum, hi_sum)
}

/// Least `n ≥ start` with `Σ_j ‖n ψ_j - y_j‖ < ε`, certified exactly.
pub fn kronecker_hit(
    coords: &[Coord],
    y: &[BigRational],
    eps: &BigRational,
    start: u64,
    budget: u64,
) -> Result<u64> {
    if coords.len() != y.len() {
        return Err(Error::input("target dimension does not match the torus"));
    }
    if !eps.is_positive() {
        return Err(Error::input("ε must be positive"));
    }
    let max_bits = coords.iter().map(|c| c.max_bits).min().unwrap_or(4096);
    let mut best: Option<(u64, f64)> = None;
    for n in start..start.saturating_add(budget) {
        let mut bits = 64u32.min(max_bits);
        loop {
            let s = BigInt::one() << bits as usize;
            let target = (eps.numer() * &s).div_floor(eps.denom());
            let (lo, hi) = distance_bounds(coords, n, y, bits);
            if hi < target {
                return Ok(n);
            }
            if lo > target {
                let approx = lo.to_f64().unwrap_or(f64::MAX) / 2f64.powi(bits as i32);
                if best.is_none_or(|(_, b)| approx < b) {
                    best = Some((n, approx));
                }
                break;
            }
            if bits >= max_bits {
                return Err(Error::Precision(format!("distance at step {n} undecided")));
            }
            bits = (bits * 2).min(max_bits);
        }
    }
    let (n, d) = best.unwrap_or((start, f64::NAN));
    Err(Error::Budget(format!("no hit within {budget} steps; best n = {n} at distance ≈ {d:.3e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::real::consts;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn rational_expansion_terminates() {
        let t = Real::ratio(7, 24);
        assert_eq!(continued_fraction(&t, 10, 256).unwrap(), big(&[3, 2, 3]));
    }

    #[test]
    fn golden_quotients_are_ones() {
        let cf = continued_fraction(&consts::golden(), 20, 4096).unwrap();
        assert!(cf.iter().all(|a| *a == BigInt::one()));
    }

    #[test]
    fn sqrt2_quotients_are_twos() {
        let cf = continued_fraction(&consts::sqrt2m1(), 15, 4096).unwrap();
        assert_eq!(cf, big(&[2; 15]));
    }

    #[test]
    fn convergent_inequality_holds() {
        let t = consts::atan34();
        let cf = continued_fraction(&t, 12, 4096).unwrap();
        for (p, q) in convergents(&cf) {
            // |p/q - t| < 1/q^2
            let d = t.approx(256);
            let x = BigRational::new(p, q.clone());
            let bound = BigRational::new(BigInt::one(), &q * &q);
            assert!((&x - d.lo_rational()).abs() < bound && (&x - d.hi_rational()).abs() < bound);
        }
    }

    #[test]
    fn golden_witnesses() {
        let w = small_remainder_witnesses(&consts::golden(), 4, 4096).unwrap();
        assert_eq!(w, big(&[2, 5, 13, 34]));
        assert!(small_remainder_witnesses(&Real::ratio(1, 3), 2, 256).is_err());
    }

    #[test]
    fn kronecker_examples() {
        let g = vec![Coord::new(consts::golden(), 4096)];
        let half = BigRational::new(1.into(), 2.into());
        let eps = BigRational::new(1.into(), 20.into());
        assert_eq!(kronecker_hit(&g, std::slice::from_ref(&half), &eps, 0, 100).unwrap(), 4);
        assert_eq!(kronecker_hit(&g, &[BigRational::zero()], &eps, 0, 100).unwrap(), 0);
        let two = vec![Coord::new(consts::golden(), 4096), Coord::new(consts::sqrt2m1(), 4096)];
        let n = kronecker_hit(&two, &[half.clone(), half], &BigRational::new(1.into(), 10.into()), 0, 1000).unwrap();
        assert!(n <= 1000);
    }
}
