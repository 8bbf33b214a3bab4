//! Points and open arcs on the circle `R/Z`.
//!
//! A coordinate of the torus rotates by a fixed angle `ψ`; every endpoint that
//! ever arises (targets, their rotations, inner boxes) has the form
//! `c + m ψ (mod 1)` with `c` rational and `m` an integer. Equality of two such
//! points is therefore decidable exactly: for irrational `ψ` they coincide iff
//! the `m` agree and the `c` differ by an integer. Ordering is decided by
//! interval refinement of `ψ`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::real::{Dyadic, Real};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lin {
    pub c: BigRational,
    pub m: i64,
}

impl Lin {
    pub fn rational(c: BigRational) -> Lin {
        Lin { c, m: 0 }
    }

    pub fn from_ratio(p: i64, q: i64) -> Lin {
        Lin::rational(BigRational::new(p.into(), q.into()))
    }

    pub fn zero() -> Lin {
        Lin::rational(BigRational::zero())
    }

    /// `self + k ψ`.
    pub fn rotate(&self, k: i64) -> Lin {
        Lin { c: self.c.clone(), m: self.m + k }
    }

    pub fn shift(&self, q: &BigRational) -> Lin {
        Lin { c: &self.c + q, m: self.m }
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            0 => write!(f, "{}", self.c),
            m => write!(f, "{}{:+}ψ", self.c, m),
        }
    }
}

fn frac_rational(q: &BigRational) -> BigRational {
    q - q.floor()
}

/// One rotation coordinate of a torus.
#[derive(Clone, Debug)]
pub struct Coord {
    pub angle: Real,
    pub max_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PointKey {
    Exact(BigRational),
    Orbit(BigRational, i64),
}

impl Coord {
    pub fn new(angle: Real, max_bits: u32) -> Coord {
        Coord { angle, max_bits }
    }

    fn key(&self, p: &Lin) -> PointKey {
        match self.exact_frac(p) {
            Some(q) => PointKey::Exact(q),
            None => PointKey::Orbit(frac_rational(&p.c), p.m),
        }
    }

    /// The exact position in `[0, 1)`, if rational.
    pub fn exact_frac(&self, p: &Lin) -> Option<BigRational> {
        if p.m == 0 {
            return Some(frac_rational(&p.c));
        }
        self.angle
            .exact()
            .map(|a| frac_rational(&(&p.c + a * BigRational::from_integer(p.m.into()))))
    }

    pub fn same_point(&self, a: &Lin, b: &Lin) -> bool {
        self.key(a) == self.key(b)
    }

    /// Interval for the position in `[0, 1)` at `bits` bits, or `None` if the
    /// integer part is not yet determined.
    pub fn frac_interval(&self, p: &Lin, bits: u32) -> Option<Dyadic> {
        if let Some(q) = self.exact_frac(p) {
            return Some(Dyadic::exact_rational(&q, bits));
        }
        let extra = 64 - (p.m.unsigned_abs().leading_zeros());
        let a = self.angle.approx(bits + extra + 2);
        let v = a
            .scale_int(&BigInt::from(p.m))
            .add(&Dyadic::exact_rational(&p.c, bits + extra + 2))
            .coarsen(bits);
        let fl = v.floor()?;
        let shift = fl << bits as usize;
        Some(Dyadic { lo: &v.lo - &shift, hi: &v.hi - &shift, bits })
    }

    /// Sort points by position, merging exact duplicates. Returns the distinct
    /// points in increasing order of their position in `[0, 1)`.
    pub fn sort_points(&self, pts: &[Lin]) -> Result<Vec<Lin>> {
        let mut seen: HashMap<PointKey, ()> = HashMap::new();
        let mut distinct: Vec<Lin> = Vec::new();
        for p in pts {
            if seen.insert(self.key(p), ()).is_none() {
                distinct.push(p.clone());
            }
        }
        if distinct.len() <= 1 {
            return Ok(distinct);
        }
        let mut bits = 64u32.min(self.max_bits);
        'refine: loop {
            let mut iv = Vec::with_capacity(distinct.len());
            for p in &distinct {
                match self.frac_interval(p, bits) {
                    Some(d) => iv.push(d),
                    None => {
                        if bits >= self.max_bits {
                            return Err(Error::Precision(format!("cannot place {p} on the circle")));
                        }
                        bits = (bits * 2).min(self.max_bits);
                        continue 'refine;
                    }
                }
            }
            let mut idx: Vec<usize> = (0..distinct.len()).collect();
            idx.sort_by(|&a, &b| iv[a].lo.cmp(&iv[b].lo));
            let separated = idx.windows(2).all(|w| iv[w[0]].hi < iv[w[1]].lo);
            if separated {
                return Ok(idx.into_iter().map(|i| distinct[i].clone()).collect());
            }
            if bits >= self.max_bits {
                return Err(Error::Precision("circle points not separated within budget".into()));
            }
            bits = (bits * 2).min(self.max_bits);
        }
    }
}

/// Open arc from `lo` counter-clockwise to `hi`, or the full circle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arc1 {
    Full,
    Open(Lin, Lin),
}

impl Arc1 {
    pub fn open(lo: Lin, hi: Lin) -> Arc1 {
        Arc1::Open(lo, hi)
    }

    pub fn rotate(&self, k: i64) -> Arc1 {
        match self {
            Arc1::Full => Arc1::Full,
            Arc1::Open(a, b) => Arc1::Open(a.rotate(k), b.rotate(k)),
        }
    }

    pub fn shift(&self, q: &BigRational) -> Arc1 {
        match self {
            Arc1::Full => Arc1::Full,
            Arc1::Open(a, b) => Arc1::Open(a.shift(q), b.shift(q)),
        }
    }

    pub fn endpoints(&self) -> Vec<Lin> {
        match self {
            Arc1::Full => vec![],
            Arc1::Open(a, b) => vec![a.clone(), b.clone()],
        }
    }
}

impl fmt::Display for Arc1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arc1::Full => f.write_str("T"),
            Arc1::Open(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
    Boundary,
}

/// Where `p` lies relative to an open arc.
pub fn arc_side(coord: &Coord, arc: &Arc1, p: &Lin) -> Result<Side> {
    let (a, b) = match arc {
        Arc1::Full => return Ok(Side::Inside),
        Arc1::Open(a, b) => (a, b),
    };
    if coord.same_point(p, a) || coord.same_point(p, b) {
        return Ok(Side::Boundary);
    }
    if coord.same_point(a, b) {
        return Ok(Side::Inside);
    }
    let mut bits = 64u32.min(coord.max_bits);
    loop {
        let ia = coord.frac_interval(a, bits);
        let ib = coord.frac_interval(b, bits);
        let ip = coord.frac_interval(p, bits);
        if let (Some(ia), Some(ib), Some(ip)) = (ia, ib, ip) {
            let sep = |x: &Dyadic, y: &Dyadic| x.hi < y.lo || y.hi < x.lo;
            if sep(&ia, &ib) && sep(&ia, &ip) && sep(&ib, &ip) {
                let inside = if ia.lo < ib.lo {
                    ia.hi < ip.lo && ip.hi < ib.lo
                } else {
                    ip.lo > ia.hi || ip.hi < ib.lo
                };
                return Ok(if inside { Side::Inside } else { Side::Outside });
            }
        }
        if bits >= coord.max_bits {
            return Err(Error::Precision(format!("cannot place {p} relative to {arc}")));
        }
        bits = (bits * 2).min(coord.max_bits);
    }
}

/// A partition of the circle by finitely many sorted points into points and
/// open gaps; gap `k` runs from point `k` to point `k+1` (cyclically).
#[derive(Clone, Debug)]
pub struct Partition {
    pub points: Vec<Lin>,
    index: HashMap<PointKey, usize>,
}

/// An open subset of the circle that is a union of partition cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    pub gaps: Vec<bool>,
    pub pts: Vec<bool>,
}

impl Partition {
    pub fn new(coord: &Coord, pts: &[Lin]) -> Result<Partition> {
        let points = coord.sort_points(pts)?;
        let index = points.iter().enumerate().map(|(i, p)| (coord.key(p), i)).collect();
        Ok(Partition { points, index })
    }

    pub fn locate(&self, coord: &Coord, p: &Lin) -> usize {
        self.index[&coord.key(p)]
    }

    pub fn gap_count(&self) -> usize {
        self.points.len().max(1)
    }

    pub fn empty_set(&self) -> CellSet {
        CellSet { gaps: vec![false; self.gap_count()], pts: vec![false; self.points.len()] }
    }

    pub fn cells(&self, coord: &Coord, arc: &Arc1) -> CellSet {
        let n = self.points.len();
        match arc {
            Arc1::Full => CellSet { gaps: vec![true; self.gap_count()], pts: vec![true; n] },
            Arc1::Open(a, b) => {
                let (i, j) = (self.locate(coord, a), self.locate(coord, b));
                let mut s = self.empty_set();
                let mut k = i;
                loop {
                    s.gaps[k] = true;
                    k = (k + 1) % n;
                    if k == j {
                        break;
                    }
                    s.pts[k] = true;
                }
                s
            }
        }
    }

    /// Maximal open arcs making up a cell set.
    pub fn to_arcs(&self, s: &CellSet) -> Vec<Arc1> {
        let n = self.points.len();
        if s.gaps.iter().all(|&g| g) && s.pts.iter().all(|&p| p) {
            return vec![Arc1::Full];
        }
        if n == 0 {
            return vec![];
        }
        // start scanning right after an uncovered point, or at a point bounding
        // an uncovered gap
        let start = (0..n).find(|&k| !s.pts[k]).expect("some point uncovered");
        let mut arcs = Vec::new();
        let mut k = start;
        let mut open: Option<usize> = None;
        for _ in 0..n {
            // gap k runs from point k to point k+1
            let next = (k + 1) % n;
            if s.gaps[k] {
                if open.is_none() {
                    open = Some(k);
                }
                if !s.pts[next] {
                    arcs.push(Arc1::Open(self.points[open.take().unwrap()].clone(), self.points[next].clone()));
                }
            }
            k = next;
        }
        arcs
    }

    pub fn is_full(&self, s: &CellSet) -> bool {
        s.gaps.iter().all(|&g| g) && s.pts.iter().all(|&p| p)
    }
}

impl CellSet {
    pub fn and(&self, o: &CellSet) -> CellSet {
        CellSet {
            gaps: self.gaps.iter().zip(&o.gaps).map(|(a, b)| *a && *b).collect(),
            pts: self.pts.iter().zip(&o.pts).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn or_assign(&mut self, o: &CellSet) {
        for (a, b) in self.gaps.iter_mut().zip(&o.gaps) {
            *a |= *b;
        }
        for (a, b) in self.pts.iter_mut().zip(&o.pts) {
            *a |= *b;
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.gaps.iter().any(|&g| g)
    }
}

/// Intersection of open arcs on one coordinate, as a list of open arcs.
pub fn intersect_arcs(coord: &Coord, arcs: &[Arc1]) -> Result<Vec<Arc1>> {
    let pts: Vec<Lin> = arcs.iter().flat_map(|a| a.endpoints()).collect();
    let part = Partition::new(coord, &pts)?;
    let mut acc: Option<CellSet> = None;
    for a in arcs {
        let c = part.cells(coord, a);
        acc = Some(match acc {
            None => c,
            Some(prev) => prev.and(&c),
        });
    }
    match acc {
        None => Ok(vec![Arc1::Full]),
        Some(s) if s.is_empty() => Ok(vec![]),
        Some(s) => Ok(part.to_arcs(&s)),
    }
}

/// Middle third of an open arc, with rational endpoints `lo < hi` (`hi` may
/// exceed 1 when the arc wraps).
pub fn inner_rational_arc(coord: &Coord, arc: &Arc1) -> Result<(BigRational, BigRational)> {
    let (a, b) = match arc {
        Arc1::Full => return Ok((BigRational::zero(), BigRational::one())),
        Arc1::Open(a, b) => (a, b),
    };
    let same = coord.same_point(a, b);
    let mut bits = 64u32.min(coord.max_bits);
    loop {
        if let (Some(ia), Some(ib)) = (coord.frac_interval(a, bits), coord.frac_interval(b, bits)) {
            let lo = ia.hi_rational();
            let mut hi = ib.lo_rational();
            let resolved = if same || ib.hi < ia.lo {
                hi += BigRational::one();
                true
            } else {
                ia.hi < ib.lo
            };
            if resolved && lo < hi {
                let w = &hi - &lo;
                let jl = &lo + &w * BigRational::new(1.into(), 3.into());
                let jh = &lo + &w * BigRational::new(2.into(), 3.into());
                let (jl, jh) = (round_down(&jl, bits + 4), round_down(&jh, bits + 4));
                if jl < jh {
                    return Ok((jl, jh));
                }
            }
        }
        if bits >= coord.max_bits {
            return Err(Error::Precision("arc too narrow for an inner box".into()));
        }
        bits = (bits * 2).min(coord.max_bits);
    }
}

/// Round to a dyadic with `bits` fractional bits (towards -inf), keeping
/// numerators small for the downstream exact arithmetic.
fn round_down(q: &BigRational, bits: u32) -> BigRational {
    let s = BigInt::one() << bits as usize;
    let n = (q.numer() * &s).div_floor(q.denom());
    BigRational::new(n, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::real::consts;

    fn coord(angle: Real) -> Coord {
        Coord::new(angle, 4096)
    }

    #[test]
    fn orders_orbit_points() {
        let c = coord(consts::golden());
        // {kΦ} for k = 0..4: 0, .618, .236, .854, .472
        let pts: Vec<Lin> = (0..5).map(|k| Lin::zero().rotate(k)).collect();
        let s = c.sort_points(&pts).unwrap();
        let ms: Vec<i64> = s.iter().map(|p| p.m).collect();
        assert_eq!(ms, vec![0, 2, 4, 1, 3]);
    }

    #[test]
    fn exact_duplicates_merge() {
        let c = coord(consts::golden());
        let a = Lin { c: BigRational::one(), m: 3 };
        let b = Lin { c: BigRational::from_integer(5.into()), m: 3 };
        assert!(c.same_point(&a, &b));
        assert_eq!(c.sort_points(&[a, b]).unwrap().len(), 1);
        let r = coord(Real::ratio(1, 3));
        assert!(r.same_point(&Lin::zero().rotate(3), &Lin::zero()));
    }

    #[test]
    fn arc_intersection_can_split() {
        let c = coord(Real::ratio(1, 7));
        let a = Arc1::open(Lin::from_ratio(1, 10), Lin::from_ratio(9, 10));
        let b = Arc1::open(Lin::from_ratio(8, 10), Lin::from_ratio(2, 10));
        let r = intersect_arcs(&c, &[a, b]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.contains(&Arc1::open(Lin::from_ratio(1, 10), Lin::from_ratio(2, 10))));
        assert!(r.contains(&Arc1::open(Lin::from_ratio(8, 10), Lin::from_ratio(9, 10))));
    }

    #[test]
    fn disjoint_arcs_intersect_empty() {
        let c = coord(consts::golden());
        let a = Arc1::open(Lin::from_ratio(0, 1), Lin::from_ratio(1, 2));
        let b = Arc1::open(Lin::from_ratio(1, 2), Lin::from_ratio(1, 1));
        assert!(intersect_arcs(&c, &[a, b]).unwrap().is_empty());
    }

    #[test]
    fn point_sides() {
        let c = coord(consts::golden());
        let arc = Arc1::open(Lin::from_ratio(1, 2), Lin::from_ratio(1, 10));
        // {Φ} = 0.618 inside the wrapping arc, {2Φ} = 0.236 outside
        assert_eq!(arc_side(&c, &arc, &Lin::zero().rotate(1)).unwrap(), Side::Inside);
        assert_eq!(arc_side(&c, &arc, &Lin::zero().rotate(2)).unwrap(), Side::Outside);
        assert_eq!(arc_side(&c, &arc, &Lin::from_ratio(3, 2)).unwrap(), Side::Boundary);
    }

    #[test]
    fn inner_arc_is_inside() {
        let c = coord(consts::golden());
        let arc = Arc1::open(Lin::zero().rotate(1), Lin::zero().rotate(-1));
        // (0.618, 0.382) wraps through 0
        let (lo, hi) = inner_rational_arc(&c, &arc).unwrap();
        assert!(lo < hi);
        assert!(lo > BigRational::new(618.into(), 1000.into()));
        assert!(hi < BigRational::new(1382.into(), 1000.into()));
    }
}
