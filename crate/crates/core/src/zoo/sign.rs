//! Sign patterns of `sin(nθ)` and `n sin(nθ) - c cos(nθ)` for a rational
//! point `(x + iy)/r` on the unit circle, evaluated on Gaussian integers.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::torus::circle::inner_rational_arc;
use crate::torus::coverage::coverage_bound;
use crate::torus::diophantine::{kronecker_hit, small_remainder_witnesses};
use crate::torus::real::DEFAULT_MAX_BITS;
use crate::torus::spec::{rational_arc, DEFAULT_COVERAGE_BUDGET};
use crate::torus::{Arc1, Coord, Lin, Real, TBox, TorusSpec};
use crate::word::product;
use crate::word::{torus_ap, Alphabet, ApOracle, Geometry, Letter, LetterSource, OmegaWord};

pub const PLUS: Letter = 0;
pub const MINUS: Letter = 1;
pub const ZERO: Letter = 2;

/// `(x + iy)/r` with `x² + y² = r²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussPoint {
    pub x: BigInt,
    pub y: BigInt,
    pub r: BigInt,
}

impl GaussPoint {
    pub fn new(x: i64, y: i64, r: i64) -> Result<GaussPoint> {
        let (x, y, r) = (BigInt::from(x), BigInt::from(y), BigInt::from(r));
        if !r.is_positive() || &x * &x + &y * &y != &r * &r {
            return Err(Error::input(format!("({x} + {y}i)/{r} is not on the unit circle")));
        }
        if x.is_zero() || y.is_zero() {
            return Err(Error::input("the point is a root of unity"));
        }
        Ok(GaussPoint { x, y, r })
    }

    /// `(3 + 4i)/5`.
    pub fn three_four_five() -> GaussPoint {
        GaussPoint::new(3, 4, 5).expect("static")
    }

    pub fn angle(&self) -> Real {
        Real::atan_turn(self.x.clone(), self.y.clone()).expect("checked on construction")
    }

    fn gauss(&self) -> Complex<BigInt> {
        Complex::new(self.x.clone(), self.y.clone())
    }

    /// `r^n γ^n`.
    pub fn power(&self, n: u64) -> Result<Complex<BigInt>> {
        let e = u32::try_from(n).map_err(|_| Error::Budget(format!("exact power at step {n}")))?;
        Ok(self.gauss().powu(e))
    }
}

/// Drift word data: sign of `n sin(nθ) - c cos(nθ)`, certified nonzero from
/// `zero_free_from` on.
#[derive(Clone, Debug)]
pub struct DriftSignSpec {
    pub point: GaussPoint,
    pub c: BigRational,
    pub zero_free_from: u64,
    /// Precision cap for the searches on this word.
    pub max_bits: u32,
}

impl DriftSignSpec {
    pub fn standard() -> DriftSignSpec {
        DriftSignSpec { point: GaussPoint::three_four_five(), c: BigRational::from_integer(7.into()), zero_free_from: 1, max_bits: DEFAULT_MAX_BITS }
    }

    /// `r^n v_n · denom(c)`, an integer with the sign of `v_n`.
    pub fn scaled_value(&self, n: u64, z: &Complex<BigInt>) -> BigInt {
        self.c.denom() * BigInt::from(n) * &z.im - self.c.numer() * &z.re
    }

    /// `v_n` as an exact rational.
    pub fn value(&self, n: u64) -> Result<BigRational> {
        let z = self.point.power(n)?;
        let scale = self.c.denom() * num_traits::Pow::pow(&self.point.r, n as u32);
        Ok(BigRational::new(self.scaled_value(n, &z), scale))
    }
}

#[derive(Clone)]
enum Kind {
    Static,
    Drift(DriftSignSpec),
}

struct SignSource {
    point: GaussPoint,
    kind: Kind,
}

impl SignSource {
    fn classify(&self, n: u64, z: &Complex<BigInt>) -> Result<Letter> {
        let v = match &self.kind {
            Kind::Static => z.im.clone(),
            Kind::Drift(d) => d.scaled_value(n, z),
        };
        Ok(match v.sign() {
            num_bigint::Sign::Plus => PLUS,
            num_bigint::Sign::Minus => MINUS,
            num_bigint::Sign::NoSign => match self.kind {
                Kind::Static => ZERO,
                Kind::Drift(_) => return Err(Error::Certificate(format!("drift sequence vanishes at {n}"))),
            },
        })
    }
}

impl LetterSource for SignSource {
    fn letter(&self, n: u64) -> Result<Letter> {
        self.classify(n, &self.point.power(n)?)
    }

    fn fill(&self, start: u64, out: &mut [Letter]) -> Result<()> {
        let g = self.point.gauss();
        let mut z = self.point.power(start)?;
        for (i, x) in out.iter_mut().enumerate() {
            *x = self.classify(start + i as u64, &z)?;
            z = &z * &g;
        }
        Ok(())
    }
}

/// Upper half-plane as `+`, lower as `-`; step 0 sits on the boundary.
fn half_plane_spec(angle: Real, head: Letter, letters: usize) -> Result<TorusSpec> {
    let half = BigRational::new(1.into(), 2.into());
    let mut targets = vec![
        vec![TBox(vec![rational_arc(BigRational::zero(), half.clone())])],
        vec![TBox(vec![rational_arc(half, BigRational::one())])],
    ];
    targets.resize(letters, vec![]);
    TorusSpec::new(vec![angle], vec![], targets, 1, vec![head])
}

/// Signs of `sin(nθ)`: `+`, `-`, and `0` at `n = 0` only.
pub fn sign_static(point: &GaussPoint) -> Result<OmegaWord> {
    let spec = Arc::new(half_plane_spec(point.angle(), ZERO, 3)?);
    let src = SignSource { point: point.clone(), kind: Kind::Static };
    let al = Alphabet::new(["+", "-", "0"])?;
    Ok(OmegaWord::builder("sign_static", al, Arc::new(src))
        .ap(torus_ap(spec.clone()))
        .transient_prefix(1)
        .geometry(Geometry::Torus(spec))
        .build())
}

/// Lower bound on the gap between cyclically consecutive distinct points.
fn min_gap(coord: &Coord, pts: &[Lin]) -> Result<BigRational> {
    let mut bits = 64.min(coord.max_bits);
    loop {
        let mut iv: Vec<_> = pts.iter().map(|p| coord.frac_interval(p, bits)).collect::<Option<Vec<_>>>().unwrap_or_default();
        if iv.len() == pts.len() {
            iv.sort_by(|a, b| a.lo.cmp(&b.lo));
            let mut best: Option<BigRational> = None;
            for k in 0..iv.len() {
                let next_lo = if k + 1 < iv.len() { iv[k + 1].lo_rational() } else { iv[0].lo_rational() + BigRational::one() };
                let g = next_lo - iv[k].hi_rational();
                best = Some(best.map_or(g.clone(), |b| b.min(g)));
            }
            if let Some(g) = best.filter(|g| g.is_positive()) {
                return Ok(g);
            }
        }
        if bits >= coord.max_bits {
            return Err(Error::Precision("cannot separate arc endpoints".into()));
        }
        bits = (bits * 2).min(coord.max_bits);
    }
}

/// Distance from the rational arc `(lo, hi)` to the ends of `arc`.
fn arc_margin(coord: &Coord, arc: &Arc1, lo: &BigRational, hi: &BigRational) -> Result<BigRational> {
    let (a, b) = match arc {
        Arc1::Full => return Ok(BigRational::one()),
        Arc1::Open(a, b) => (a, b),
    };
    let mut bits = 64.min(coord.max_bits);
    loop {
        if let (Some(ia), Some(ib)) = (coord.frac_interval(a, bits), coord.frac_interval(b, bits)) {
            let m1 = lo - ia.hi_rational();
            let mut blo = ib.lo_rational();
            while &blo <= lo {
                blo += BigRational::one();
            }
            while blo > lo + BigRational::one() {
                blo -= BigRational::one();
            }
            let m2 = blo - hi;
            if m1.is_positive() && m2.is_positive() {
                return Ok(m1.min(m2));
            }
        }
        if bits >= coord.max_bits {
            return Err(Error::Precision("inner arc margin undecided".into()));
        }
        bits = (bits * 2).min(coord.max_bits);
    }
}

/// Least `N` with `arctan(c/n)/2π < c/(6n) ≤ m` for all `n ≥ N`.
fn settle_after(c: &BigRational, m: &BigRational) -> u64 {
    let q = c / (m * BigRational::from_integer(6.into()));
    q.ceil().to_integer().to_u64().unwrap_or(u64::MAX / 4).max(1)
}

/// Occurrence bound for the drift word: the drifting arcs approach the half
/// planes, so a factor's limit region decides it once the drift is below the
/// region's margin.
fn drift_bound(limit: &TorusSpec, coord: &Coord, c: &BigRational, u: &[Letter], budget: u64) -> Result<u64> {
    let region = limit.factor_region(u)?;
    let len = u.len() as u64;
    if region.is_empty() {
        let half = BigRational::new(1.into(), 2.into());
        let pts: Vec<Lin> = (0..u.len() as i64)
            .flat_map(|i| [Lin::zero().rotate(-i), Lin::rational(half.clone()).rotate(-i)])
            .collect();
        let g = min_gap(coord, &pts)?;
        return Ok(settle_after(c, &(g / BigRational::from_integer(2.into()))) + len);
    }
    let mut best = u64::MAX;
    for b in &region {
        let arc = &b.0[0];
        let (lo, hi) = inner_rational_arc(coord, arc)?;
        let m = arc_margin(coord, arc, &lo, &hi)?;
        let j = TBox(vec![rational_arc(lo, hi)]);
        let cert = coverage_bound(std::slice::from_ref(coord), &j, 1, budget)?;
        best = best.min(settle_after(c, &m).saturating_add(cert.k + 1 + len));
    }
    Ok(best)
}

/// Signs of `n sin(nθ) - c cos(nθ)`.
pub fn sign_drift(spec: &DriftSignSpec) -> Result<OmegaWord> {
    if !spec.c.is_positive() {
        return Err(Error::input("drift numerator must be positive"));
    }
    for n in 0..spec.zero_free_from {
        if spec.value(n)?.is_zero() {
            return Err(Error::input(format!("drift sequence vanishes at {n}, before the certified range")));
        }
    }
    let src = SignSource { point: spec.point.clone(), kind: Kind::Drift(spec.clone()) };
    let head = src.letter(0)?;
    let angle = spec.point.angle();
    let limit = Arc::new(half_plane_spec(angle.clone(), head, 2)?);
    let coord = Coord::new(angle, spec.max_bits);
    let c = spec.c.clone();
    let ap: ApOracle = Arc::new(move |u: &[Letter]| drift_bound(&limit, &coord, &c, u, DEFAULT_COVERAGE_BUDGET));
    let al = Alphabet::new(["+", "-"])?;
    Ok(OmegaWord::builder("sign_drift", al, Arc::new(src)).ap(ap).geometry(Geometry::Drift).build())
}

/// `sign_static × sign_drift`.
pub fn sign_pair(spec: &DriftSignSpec) -> Result<OmegaWord> {
    product(&[sign_static(&spec.point)?, sign_drift(spec)?])
}

/// Whether `(n, n)` reads `(+, -)`, by exact evaluation.
pub fn is_plus_minus(spec: &DriftSignSpec, n: u64) -> Result<bool> {
    let z = spec.point.power(n)?;
    Ok(z.im.is_positive() && spec.scaled_value(n, &z).is_negative())
}

/// Some `n ≥ 1` such that `(+, -)` is absent from `[n, n + b)` in the sign
/// pair word. From step `m` on, `(+, -)` needs the orbit point in
/// `(0, c/6m)`; a Kronecker hit in the complement of the `b` pulled-back
/// copies of that arc gives the window.
pub fn gap_witness(spec: &DriftSignSpec, b: u64, budget: u64) -> Result<u64> {
    if b == 0 {
        return Err(Error::input("window length must be positive"));
    }
    let angle = spec.point.angle();
    let coord = Coord::new(angle, spec.max_bits);
    let three = BigRational::from_integer(3.into());
    let m = (&spec.c * BigRational::from_integer((b + 1).into()) / three).ceil().to_integer().to_u64().unwrap_or(1).max(1);
    let ell = &spec.c / BigRational::from_integer((6 * m).into());
    let pts: Vec<Lin> = (0..b as i64).map(|i| Lin::zero().rotate(-i)).collect();
    let mut bits = 64.min(coord.max_bits);
    let (y, eps) = loop {
        let iv: Option<Vec<_>> = pts.iter().map(|p| coord.frac_interval(p, bits)).collect();
        if let Some(mut iv) = iv {
            iv.sort_by(|x, y| x.lo.cmp(&y.lo));
            let mut best: Option<(BigRational, BigRational)> = None;
            for k in 0..iv.len() {
                let lo = iv[k].hi_rational() + &ell;
                let hi = if k + 1 < iv.len() { iv[k + 1].lo_rational() } else { iv[0].lo_rational() + BigRational::one() };
                if hi > lo && best.as_ref().is_none_or(|(l, h)| &hi - &lo > h - l) {
                    best = Some((lo, hi));
                }
            }
            if let Some((lo, hi)) = best {
                let two = BigRational::from_integer(2.into());
                let mid = (&lo + &hi) / &two;
                break (&mid - mid.floor(), (hi - lo) / two);
            }
        }
        if bits >= coord.max_bits {
            return Err(Error::Precision("no free arc between pulled-back copies".into()));
        }
        bits = (bits * 2).min(coord.max_bits);
    };
    let n = kronecker_hit(std::slice::from_ref(&coord), &[y], &eps, m, budget)?;
    for i in n..n + b {
        if is_plus_minus(spec, i)? {
            return Err(Error::Certificate(format!("(+,-) at {i} inside the claimed window [{n}, {})", n + b)));
        }
    }
    Ok(n)
}

/// `arctan x > 2π/n` via the alternating series (valid for `0 < x ≤ 1`) and
/// `π < 355/113`.
fn drift_exceeds_remainder(c: &BigRational, n: u64) -> bool {
    let x = c / BigRational::from_integer(n.into());
    if x > BigRational::one() {
        return false;
    }
    let mut lb = BigRational::zero();
    let mut p = x.clone();
    let x2 = &x * &x;
    for k in 0..4i64 {
        let term = &p / BigRational::from_integer((2 * k + 1).into());
        lb = if k % 2 == 0 { lb + term } else { lb - term };
        p = &p * &x2;
    }
    lb > BigRational::new((2 * 355).into(), (113 * n).into())
}

/// `count` positions after `after` where `(+, -)` occurs: denominators `n`
/// of convergents with `{nθ} < 1/n`, kept when `1/n` is below the drift angle
/// and confirmed by exact evaluation.
pub fn plus_minus_occurrences(spec: &DriftSignSpec, count: usize, after: u64) -> Result<Vec<u64>> {
    let angle = spec.point.angle();
    let mut want = count + 4;
    loop {
        let ws = small_remainder_witnesses(&angle, want, spec.max_bits)?;
        let mut out = Vec::new();
        for n in ws.iter().filter_map(|n| n.to_u64()) {
            if n <= after || !drift_exceeds_remainder(&spec.c, n) {
                continue;
            }
            if !is_plus_minus(spec, n)? {
                return Err(Error::Certificate(format!("convergent {n} does not read (+,-)")));
            }
            out.push(n);
            if out.len() == count {
                return Ok(out);
            }
        }
        if want > 96 {
            return Err(Error::Budget(format!("fewer than {count} occurrences among {want} convergents")));
        }
        want *= 2;
    }
}

/// Sign of a rational, for displays.
pub fn sign_symbol(v: &BigRational) -> &'static str {
    match v.cmp(&BigRational::zero()) {
        Ordering::Greater => "+",
        Ordering::Less => "-",
        Ordering::Equal => "0",
    }
}
