//! Computable reals backed by dyadic interval refinement.
//!
//! Every decision made from a [`Real`] goes through rational (dyadic) interval
//! bounds; there is no floating point on a decision path.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default ceiling on refinement precision, in bits.
pub const DEFAULT_MAX_BITS: u32 = 1 << 14;

/// Closed interval `[lo, hi] / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub lo: BigInt,
    pub hi: BigInt,
    pub bits: u32,
}

impl Dyadic {
    pub fn exact_rational(q: &BigRational, bits: u32) -> Dyadic {
        let scaled = q * BigRational::from_integer(BigInt::one() << bits);
        Dyadic { lo: scaled.floor().to_integer(), hi: scaled.ceil().to_integer(), bits }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        debug_assert_eq!(self.bits, other.bits);
        Dyadic { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi, bits: self.bits }
    }

    pub fn scale_int(&self, k: &BigInt) -> Dyadic {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if k.is_negative() {
            Dyadic { lo: b, hi: a, bits: self.bits }
        } else {
            Dyadic { lo: a, hi: b, bits: self.bits }
        }
    }

    /// Multiply by a rational, rounding outward.
    pub fn scale_rational(&self, q: &BigRational) -> Dyadic {
        let (n, d) = (q.numer(), q.denom());
        let a = &self.lo * n;
        let b = &self.hi * n;
        let (a, b) = if n.is_negative() { (b, a) } else { (a, b) };
        Dyadic { lo: a.div_floor(d), hi: Integer::div_ceil(&b, d), bits: self.bits }
    }

    /// Shift to a lower precision, rounding outward.
    pub fn coarsen(&self, bits: u32) -> Dyadic {
        if bits >= self.bits {
            let s = bits - self.bits;
            return Dyadic { lo: &self.lo << s, hi: &self.hi << s, bits };
        }
        let d = BigInt::one() << (self.bits - bits);
        Dyadic { lo: self.lo.div_floor(&d), hi: Integer::div_ceil(&self.hi, &d), bits }
    }

    pub fn width_ulps(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn lo_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.bits)
    }

    pub fn hi_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.bits)
    }

    /// Sign if the interval excludes zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// `floor` of the value, if determined by the interval.
    pub fn floor(&self) -> Option<BigInt> {
        let one = BigInt::one() << self.bits;
        let a = self.lo.div_floor(&one);
        let b = self.hi.div_floor(&one);
        // hi landing exactly on an integer boundary is only acceptable when lo does too
        if a == b {
            Some(a)
        } else {
            None
        }
    }

    /// Midpoint approximation; diagnostics only.
    pub fn to_f64(&self) -> f64 {
        let mid: BigInt = (&self.lo + &self.hi) >> 1usize;
        let r = BigRational::new(mid, BigInt::one() << self.bits);
        r.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Rational(BigRational),
    /// `a + b * sqrt(d)`
    Quadratic { a: BigRational, b: BigRational, d: BigInt },
    /// `atan2(y, x) / 2π`, reduced into `[0, 1)`.
    AtanTurn { x: BigInt, y: BigInt },
    /// `scale * base + shift`
    Affine { base: Real, scale: BigRational, shift: BigRational },
}

struct Inner {
    kind: Kind,
    name: String,
    irrational: bool,
    /// Independence class: two irrational reals in the same class may be
    /// rationally related, reals in distinct classes are not.
    class: Option<String>,
    cache: Mutex<Option<Dyadic>>,
}

/// A real number that can be approximated to any precision.
#[derive(Clone)]
pub struct Real(Arc<Inner>);

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.0.name)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

impl Real {
    fn new(kind: Kind, name: String, irrational: bool, class: Option<String>) -> Real {
        Real(Arc::new(Inner { kind, name, irrational, class, cache: Mutex::new(None) }))
    }

    pub fn rational(q: BigRational) -> Real {
        let name = q.to_string();
        Real::new(Kind::Rational(q), name, false, None)
    }

    pub fn ratio(p: i64, q: i64) -> Real {
        Real::rational(BigRational::new(p.into(), q.into()))
    }

    /// `a + b sqrt(d)`. Collapses to a rational when `b = 0` or `d` is a square.
    pub fn quadratic(a: BigRational, b: BigRational, d: BigInt) -> Result<Real> {
        if d.is_negative() {
            return Err(Error::input("negative radicand"));
        }
        if b.is_zero() {
            return Ok(Real::rational(a));
        }
        if is_perfect_square(&d) {
            return Ok(Real::rational(a + b * BigRational::from_integer(d.sqrt())));
        }
        let name = format!("{} + {}*sqrt({})", a, b, d);
        let class = format!("Q(sqrt {})", d);
        Ok(Real::new(Kind::Quadratic { a, b, d }, name, true, Some(class)))
    }

    /// The argument of the Gaussian point `x + iy`, measured in turns.
    /// Irrational exactly when `(x + iy)/|x + iy|` is not a root of unity;
    /// for points on the unit circle with rational coordinates the only roots
    /// of unity are the four axis points.
    pub fn atan_turn(x: BigInt, y: BigInt) -> Result<Real> {
        if x.is_zero() && y.is_zero() {
            return Err(Error::input("argument of zero"));
        }
        if y.is_zero() {
            let q = if x.is_positive() { BigRational::zero() } else { BigRational::new(1.into(), 2.into()) };
            return Ok(Real::rational(q));
        }
        if x.is_zero() {
            let q = if y.is_positive() { BigRational::new(1.into(), 4.into()) } else { BigRational::new(3.into(), 4.into()) };
            return Ok(Real::rational(q));
        }
        // the norm must be a rational square for the point to be on a rational circle
        let n2 = &x * &x + &y * &y;
        let irr = is_perfect_square(&n2);
        if !irr {
            return Err(Error::input(format!(
                "({x}, {y}) does not normalise to a rational point on the unit circle"
            )));
        }
        let name = format!("arg({x}+{y}i)/2pi");
        Ok(Real::new(Kind::AtanTurn { x, y }, name, true, Some("arg-transcendental".into())))
    }

    /// `scale * self + shift`.
    pub fn affine(&self, scale: BigRational, shift: BigRational) -> Real {
        if let Some(q) = self.exact() {
            return Real::rational(q * scale + shift);
        }
        if scale.is_zero() {
            return Real::rational(shift);
        }
        let name = format!("{}*({}) + {}", scale, self.0.name, shift);
        Real::new(
            Kind::Affine { base: self.clone(), scale, shift },
            name,
            self.0.irrational,
            self.0.class.clone(),
        )
    }

    pub fn with_name(&self, name: &str) -> Real {
        Real::new(self.0.kind.clone(), name.to_string(), self.0.irrational, self.0.class.clone())
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn is_irrational(&self) -> bool {
        self.0.irrational
    }

    pub fn independence_class(&self) -> Option<&str> {
        self.0.class.as_deref()
    }

    pub fn exact(&self) -> Option<BigRational> {
        match &self.0.kind {
            Kind::Rational(q) => Some(q.clone()),
            _ => None,
        }
    }

    /// Interval of width at most two ulps at `bits` bits.
    pub fn approx(&self, bits: u32) -> Dyadic {
        if let Some(c) = self.0.cache.lock().unwrap().as_ref() {
            if c.bits >= bits {
                return c.coarsen(bits);
            }
        }
        // round the working precision up so nearby requests share one entry
        let work = bits.div_ceil(64) * 64;
        let d = self.compute(work);
        let mut slot = self.0.cache.lock().unwrap();
        if slot.as_ref().is_none_or(|c| c.bits < d.bits) {
            *slot = Some(d.clone());
        }
        d.coarsen(bits)
    }

    fn compute(&self, bits: u32) -> Dyadic {
        match &self.0.kind {
            Kind::Rational(q) => Dyadic::exact_rational(q, bits),
            Kind::Quadratic { a, b, d } => {
                let ad = Dyadic::exact_rational(a, bits);
                // |b| sqrt(d) 2^bits = sqrt(p^2 d 4^bits) / q
                let p = b.numer().abs();
                let q = b.denom();
                let rad: BigInt = (&p * &p * d) << (2 * bits as usize);
                let r = rad.sqrt();
                let lo = r.div_floor(q);
                let hi = Integer::div_ceil(&(r + 1), q);
                let sd = if b.is_negative() {
                    Dyadic { lo: -hi, hi: -lo, bits }
                } else {
                    Dyadic { lo, hi, bits }
                };
                ad.add(&sd)
            }
            Kind::AtanTurn { x, y } => atan_turn(x, y, bits),
            Kind::Affine { base, scale, shift } => {
                let extra = scale.numer().bits() as u32 + 2;
                let b = base.approx(bits + extra).scale_rational(scale).coarsen(bits);
                b.add(&Dyadic::exact_rational(shift, bits))
            }
        }
    }

    /// Sign of `self - q`, refining until decided. Errors if the value is
    /// rational and equal to `q` cannot be excluded within the budget.
    pub fn cmp_rational(&self, q: &BigRational, max_bits: u32) -> Result<Ordering> {
        if let Some(e) = self.exact() {
            return Ok(e.cmp(q));
        }
        let mut bits = 64.min(max_bits);
        loop {
            let d = self.approx(bits);
            if d.lo_rational() > *q {
                return Ok(Ordering::Greater);
            }
            if d.hi_rational() < *q {
                return Ok(Ordering::Less);
            }
            if bits >= max_bits {
                return Err(Error::Precision(format!("cannot separate {} from {}", self, q)));
            }
            bits = (bits * 2).min(max_bits);
        }
    }
}

/// Fixed-point arctangent of `num/den` with `|num/den| <= 1/2`, returned as an
/// interval scaled by `2^g`.
fn atan_small(num: &BigInt, den: &BigInt, g: u32) -> (BigInt, BigInt) {
    let neg = num.is_negative() != den.is_negative();
    let num = num.abs();
    let den = den.abs();
    let n2 = &num * &num;
    let d2 = &den * &den;
    // p_k approximates z^(2k+1) 2^g from below with error < 2
    let mut p: BigInt = (&num << g as usize).div_floor(&den);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    let mut err = BigInt::zero();
    while !p.is_zero() {
        let term = p.div_floor(&BigInt::from(2 * k + 1));
        if k.is_multiple_of(2) {
            sum += &term;
        } else {
            sum -= &term;
        }
        err += 3;
        p = (&p * &n2).div_floor(&d2);
        k += 1;
    }
    // tail bounded by the first omitted term, itself below the truncation error
    err += 2;
    let (lo, hi) = (&sum - &err, &sum + &err);
    if neg {
        (-hi, -lo)
    } else {
        (lo, hi)
    }
}

/// π as an interval scaled by `2^g` (Machin's formula).
fn pi_interval(g: u32) -> (BigInt, BigInt) {
    let (a_lo, a_hi) = atan_small(&1.into(), &5.into(), g);
    let (b_lo, b_hi) = atan_small(&1.into(), &239.into(), g);
    (a_lo * 16 - b_hi * 4, a_hi * 16 - b_lo * 4)
}

/// `atan(num/den)` for `0 <= num/den <= 1`, scaled by `2^g`.
fn atan_unit(num: &BigInt, den: &BigInt, g: u32, pi: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    // z > 1/2: atan z = π/4 + atan((z-1)/(z+1)), and |(z-1)/(z+1)| <= 1/3
    if num * 2 > *den {
        let (lo, hi) = atan_small(&(num - den), &(num + den), g);
        (lo + (&pi.0 >> 2usize), hi + (&pi.1 >> 2usize) + 1)
    } else {
        atan_small(num, den, g)
    }
}

fn atan_turn(x: &BigInt, y: &BigInt, bits: u32) -> Dyadic {
    let g = bits + 48;
    let pi = pi_interval(g);
    let (ax, ay) = (x.abs(), y.abs());
    // first-quadrant angle of (|x|, |y|)
    let (q_lo, q_hi) = if ay <= ax {
        atan_unit(&ay, &ax, g, &pi)
    } else {
        let (lo, hi) = atan_unit(&ax, &ay, g, &pi);
        ((&pi.0 >> 1usize) - hi, (&pi.1 >> 1usize) + 1 - lo)
    };
    // place in the right quadrant, as an angle in [0, 2π)
    let (a_lo, a_hi) = match (x.sign() == Sign::Minus, y.sign() == Sign::Minus) {
        (false, false) => (q_lo, q_hi),
        (true, false) => (&pi.0 - q_hi, &pi.1 - q_lo),
        (true, true) => (&pi.0 + q_lo, &pi.1 + q_hi),
        (false, true) => ((&pi.0 << 1usize) - q_hi, (&pi.1 << 1usize) - q_lo),
    };
    let two_pi_lo: BigInt = &pi.0 << 1usize;
    let two_pi_hi: BigInt = &pi.1 << 1usize;
    let lo = (a_lo.max(BigInt::zero()) << bits as usize).div_floor(&two_pi_hi);
    let hi = Integer::div_ceil(&(a_hi << bits as usize), &two_pi_lo);
    Dyadic { lo, hi, bits }
}

/// Named constants usable in word descriptions.
pub mod consts {
    use super::*;

    fn half(a: i64, b: i64) -> Result<Real> {
        Real::quadratic(BigRational::new(a.into(), 2.into()), BigRational::new(b.into(), 2.into()), 5.into())
    }

    /// `(sqrt 5 - 1) / 2`, the inverse of the golden ratio.
    pub fn golden() -> Real {
        half(-1, 1).expect("static").with_name("golden")
    }

    /// `(3 - sqrt 5) / 2 = 1 - golden`.
    pub fn golden_sq() -> Real {
        half(3, -1).expect("static").with_name("golden_sq")
    }

    pub fn sqrt2m1() -> Real {
        Real::quadratic(BigRational::from_integer((-1).into()), BigRational::one(), 2.into())
            .expect("static")
            .with_name("sqrt2m1")
    }

    /// `1 - 1/sqrt 2`, the letter frequency of `b` in the Salomaa word.
    pub fn one_minus_inv_sqrt2() -> Real {
        Real::quadratic(BigRational::one(), BigRational::new((-1).into(), 2.into()), 2.into())
            .expect("static")
            .with_name("one_minus_inv_sqrt2")
    }

    /// Argument of `(3 + 4i)/5` in turns.
    pub fn atan34() -> Real {
        Real::atan_turn(3.into(), 4.into()).expect("static").with_name("atan34")
    }

    pub fn by_name(name: &str) -> Option<Real> {
        match name {
            "golden" | "phi" => Some(golden()),
            "golden_sq" => Some(golden_sq()),
            "sqrt2m1" => Some(sqrt2m1()),
            "one_minus_inv_sqrt2" => Some(one_minus_inv_sqrt2()),
            "atan34" => Some(atan34()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(r: &Real) -> f64 {
        r.approx(80).to_f64()
    }

    #[test]
    fn golden_value() {
        assert!((f(&consts::golden()) - 0.6180339887498949).abs() < 1e-15);
        assert!((f(&consts::sqrt2m1()) - 0.41421356237309503).abs() < 1e-15);
    }

    #[test]
    fn atan34_value() {
        // atan2(4,3)/(2π)
        assert!((f(&consts::atan34()) - 0.14758361765043326).abs() < 1e-15);
        let r = Real::atan_turn((-3).into(), (-4).into()).unwrap();
        assert!((f(&r) - (0.5 + 0.14758361765043326)).abs() < 1e-15);
        let r = Real::atan_turn(3.into(), (-4).into()).unwrap();
        assert!((f(&r) - (1.0 - 0.14758361765043326)).abs() < 1e-15);
    }

    #[test]
    fn intervals_nest_and_shrink() {
        let r = consts::atan34();
        let a = r.approx(100);
        let b = r.approx(300).coarsen(100);
        assert!(b.lo <= a.hi && a.lo <= b.hi);
        assert!(r.approx(500).width_ulps() <= BigInt::from(2));
        let g = consts::golden();
        assert!(g.approx(700).width_ulps() <= BigInt::from(2));
    }

    #[test]
    fn affine_and_compare() {
        let g = consts::golden();
        let one_minus = g.affine(BigRational::from_integer((-1).into()), BigRational::one());
        let q = BigRational::new(382.into(), 1000.into());
        assert_eq!(one_minus.cmp_rational(&q, 256).unwrap(), Ordering::Less);
        assert_eq!(g.cmp_rational(&BigRational::new(618.into(), 1000.into()), 256).unwrap(), Ordering::Greater);
    }

    #[test]
    fn degenerate_arguments_are_rational() {
        assert!(Real::atan_turn(5.into(), 0.into()).unwrap().exact().is_some());
        assert!(Real::atan_turn(1.into(), 1.into()).is_err());
    }
}
