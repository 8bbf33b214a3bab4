//! Box-coded rotation words: `α(n) = a` iff the `n`-th orbit point lies in the
//! target of `a`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::circle::{inner_rational_arc, intersect_arcs, Arc1, Coord, Lin, Side};
use super::coverage::{coverage_bound, CoverageCertificate, TBox};
use super::lattice::{orbit_closure, relation_lattice, OrbitClosure, RelationBasis};
use super::real::{Real, DEFAULT_MAX_BITS};
use crate::error::{Error, Result};

pub const DEFAULT_COVERAGE_BUDGET: u64 = 1 << 16;

#[derive(Clone)]
pub struct TorusSpec {
    pub angles: Vec<Real>,
    pub declared: Vec<Vec<i64>>,
    pub relations: RelationBasis,
    pub closure: OrbitClosure,
    /// Open boxes per letter index.
    pub targets: Vec<Vec<TBox>>,
    /// No orbit point at a step `≥ transient_prefix` lies on a box boundary.
    pub transient_prefix: u64,
    /// Letters at the first positions, given explicitly.
    pub head: Vec<u32>,
    pub max_bits: u32,
    pub coverage_budget: u64,
    coords: Vec<Coord>,
    fast: Vec<Fixed>,
    fast_targets: Vec<Vec<Vec<FastArc>>>,
}

impl fmt::Debug for TorusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusSpec")
            .field("angles", &self.angles)
            .field("letters", &self.targets.len())
            .field("transient_prefix", &self.transient_prefix)
            .finish()
    }
}

/// How a factor's occurrences are bounded by the geometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionBound {
    /// The region meets no orbit coset: no occurrence at or after `horizon`.
    Empty { horizon: u64 },
    /// Every window of length `bound` contains an occurrence.
    Gap { bound: u64, residue: u64, certificate: CoverageCertificate },
}

impl RegionBound {
    pub fn value(&self) -> u64 {
        match self {
            RegionBound::Empty { horizon } => *horizon,
            RegionBound::Gap { bound, .. } => *bound,
        }
    }
}

const FIX_BITS: u32 = 96;

/// Fixed-point approximation of one coordinate, for quick letter decisions.
#[derive(Clone, Debug)]
struct Fixed {
    lo: u128,
    width: u128,
}

impl Fixed {
    fn new(angle: &Real) -> Fixed {
        let d = angle.approx(FIX_BITS);
        let s = BigInt::one() << FIX_BITS as usize;
        let lo = ((&d.lo % &s + &s) % &s).to_u128().unwrap();
        let width = (&d.hi - &d.lo).to_u128().unwrap_or(u128::MAX >> 8) + 1;
        Fixed { lo, width }
    }
}

const MASK: u128 = (1u128 << FIX_BITS) - 1;

fn fixed_point(f: &Fixed, c: &BigRational, m: i64) -> Option<(u128, u128)> {
    let s = BigInt::one() << FIX_BITS as usize;
    let cs = (c.numer() * &s).checked_div(c.denom())?;
    let cs = ((cs % &s + &s) % &s).to_u128()?;
    let mu = m.unsigned_abs() as u128;
    let base = f.lo.wrapping_mul(mu) & MASK;
    let pos = if m >= 0 { cs.wrapping_add(base) } else { cs.wrapping_sub(base) } & MASK;
    // c rounded by one ulp, angle error accumulates m times
    let err = f.width.checked_mul(mu.max(1))?.checked_add(2)?;
    if err > 1 << (FIX_BITS - 8) {
        return None;
    }
    Some((pos, err))
}

/// An arc with endpoint positions precomputed in fixed point.
#[derive(Clone, Debug)]
enum FastArc {
    Full,
    Open { pa: u128, db: u128, e: u128 },
    /// Endpoints too close or too imprecise: decide exactly.
    Exact,
}

impl FastArc {
    fn new(f: &Fixed, arc: &Arc1) -> FastArc {
        let (a, b) = match arc {
            Arc1::Full => return FastArc::Full,
            Arc1::Open(a, b) => (a, b),
        };
        match (fixed_point(f, &a.c, a.m), fixed_point(f, &b.c, b.m)) {
            (Some((pa, ea)), Some((pb, eb))) => {
                let db = pb.wrapping_sub(pa) & MASK;
                FastArc::Open { pa, db, e: ea + eb }
            }
            _ => FastArc::Exact,
        }
    }

    fn side(&self, f: &Fixed, n: u64) -> Option<Side> {
        let (pa, db, e) = match self {
            FastArc::Full => return Some(Side::Inside),
            FastArc::Exact => return None,
            FastArc::Open { pa, db, e } => (*pa, *db, *e),
        };
        let mu = n as u128;
        let ep = f.width.checked_mul(mu.max(1))?.checked_add(2)?;
        let e = e + ep;
        if e > 1 << (FIX_BITS - 8) || db <= 2 * e {
            return None;
        }
        let pp = f.lo.wrapping_mul(mu) & MASK;
        let dp = pp.wrapping_sub(pa) & MASK;
        if dp > e && dp + e < db {
            return Some(Side::Inside);
        }
        if dp > db + e && dp + e < MASK {
            return Some(Side::Outside);
        }
        None
    }
}

fn rat(q: &BigRational) -> Lin {
    Lin::rational(q.clone())
}

impl TorusSpec {
    pub fn new(
        angles: Vec<Real>,
        declared: Vec<Vec<i64>>,
        targets: Vec<Vec<TBox>>,
        transient_prefix: u64,
        head: Vec<u32>,
    ) -> Result<TorusSpec> {
        let d = angles.len();
        if targets.iter().flatten().any(|b| b.dim() != d) {
            return Err(Error::input("target box dimension does not match the angles"));
        }
        if head.len() as u64 > transient_prefix {
            return Err(Error::input("explicit head longer than the transient prefix"));
        }
        let relations = relation_lattice(&angles, &declared)?;
        let closure = orbit_closure(&angles, &relations)?;
        let coords = angles.iter().map(|a| Coord::new(a.clone(), DEFAULT_MAX_BITS)).collect();
        let fast: Vec<Fixed> = angles.iter().map(Fixed::new).collect();
        let fast_targets = targets
            .iter()
            .map(|bs| bs.iter().map(|b| b.0.iter().zip(&fast).map(|(a, f)| FastArc::new(f, a)).collect()).collect())
            .collect();
        let spec = TorusSpec {
            angles,
            declared,
            relations,
            closure,
            targets,
            transient_prefix,
            head,
            max_bits: DEFAULT_MAX_BITS,
            coverage_budget: DEFAULT_COVERAGE_BUDGET,
            coords,
            fast,
            fast_targets,
        };
        spec.check_disjoint()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn letters(&self) -> usize {
        self.targets.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    fn intersect_boxes(&self, a: &TBox, b: &TBox) -> Result<Vec<TBox>> {
        let mut acc: Vec<Vec<Arc1>> = vec![vec![]];
        for (i, c) in self.coords.iter().enumerate() {
            let parts = intersect_arcs(c, &[a.0[i].clone(), b.0[i].clone()])?;
            if parts.is_empty() {
                return Ok(vec![]);
            }
            acc = acc
                .into_iter()
                .flat_map(|pre| {
                    parts.iter().map(move |p| {
                        let mut v = pre.clone();
                        v.push(p.clone());
                        v
                    })
                })
                .collect();
        }
        Ok(acc.into_iter().map(TBox).collect())
    }

    /// Free-coordinate part of `b` at the coset of residue `rho`, if the coset
    /// meets `b`.
    fn slice(&self, b: &TBox, rho: usize) -> Result<Option<TBox>> {
        let pt = &self.closure.points[rho];
        for (k, &i) in self.closure.rational_coords.iter().enumerate() {
            if super::circle::arc_side(&self.coords[i], &b.0[i], &rat(&pt[k]))? != Side::Inside {
                return Ok(None);
            }
        }
        Ok(Some(TBox(self.closure.free_coords.iter().map(|&i| b.0[i].clone()).collect())))
    }

    fn check_disjoint(&self) -> Result<()> {
        for a in 0..self.letters() {
            for b in a + 1..self.letters() {
                for x in &self.targets[a] {
                    for y in &self.targets[b] {
                        for z in self.intersect_boxes(x, y)? {
                            for rho in 0..self.closure.order as usize {
                                if self.slice(&z, rho)?.is_some() {
                                    return Err(Error::Certificate(format!(
                                        "targets of letters {a} and {b} overlap on the orbit closure"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn point(&self, n: u64) -> Vec<Lin> {
        vec![Lin::zero().rotate(n as i64); self.dim()]
    }

    fn box_side(&self, letter: usize, bi: usize, n: u64) -> Result<Side> {
        let b = &self.targets[letter][bi];
        let fast = &self.fast_targets[letter][bi];
        let mut boundary = false;
        for (i, arc) in b.0.iter().enumerate() {
            let s = match fast[i].side(&self.fast[i], n) {
                Some(s) => s,
                None => super::circle::arc_side(&self.coords[i], arc, &Lin::zero().rotate(n as i64))?,
            };
            match s {
                Side::Outside => return Ok(Side::Outside),
                Side::Boundary => boundary = true,
                Side::Inside => {}
            }
        }
        Ok(if boundary { Side::Boundary } else { Side::Inside })
    }

    /// Letter at position `n`.
    pub fn letter(&self, n: u64) -> Result<u32> {
        if (n as usize) < self.head.len() {
            return Ok(self.head[n as usize]);
        }
        let mut found = None;
        for (a, boxes) in self.targets.iter().enumerate() {
            for bi in 0..boxes.len() {
                match self.box_side(a, bi, n)? {
                    Side::Inside => {
                        if found.is_some_and(|f| f != a) {
                            return Err(Error::Certificate(format!("step {n} lies in two targets")));
                        }
                        found = Some(a);
                    }
                    Side::Boundary if n >= self.transient_prefix => {
                        return Err(Error::Certificate(format!(
                            "orbit point at step {n} lies on a target boundary"
                        )));
                    }
                    _ => {}
                }
            }
        }
        match found {
            Some(a) => Ok(a as u32),
            None if n < self.transient_prefix => Err(Error::Certificate(format!(
                "step {n} is in the transient prefix but no head letter is given"
            ))),
            None => Err(Error::Certificate(format!("orbit point at step {n} lies in no target"))),
        }
    }

    /// Open region of points whose orbit reads `u` from there on.
    pub fn factor_region(&self, u: &[u32]) -> Result<Vec<TBox>> {
        let mut region: Vec<TBox> = vec![TBox::full(self.dim())];
        for (i, &a) in u.iter().enumerate() {
            let boxes = self.targets.get(a as usize).ok_or_else(|| Error::UnknownLetter(a.to_string()))?;
            let mut next = Vec::new();
            for r in &region {
                for b in boxes {
                    next.extend(self.intersect_boxes(r, &b.rotate(-(i as i64)))?);
                }
            }
            region = next;
            if region.is_empty() {
                break;
            }
        }
        Ok(region)
    }

    /// Sound occurrence bound for `u`, from orbit coverage of an inner box.
    pub fn region_bound(&self, u: &[u32]) -> Result<RegionBound> {
        let region = self.factor_region(u)?;
        let l = self.closure.order;
        let free: Vec<Coord> = self.closure.free_coords.iter().map(|&i| self.coords[i].clone()).collect();
        let mut best: Option<RegionBound> = None;
        let mut tried: Vec<(TBox, CoverageCertificate)> = Vec::new();
        for rho in 0..l as usize {
            for b in &region {
                let Some(s) = self.slice(b, rho)? else { continue };
                let j = TBox(
                    s.0.iter()
                        .zip(&free)
                        .map(|(arc, c)| {
                            let (lo, hi) = inner_rational_arc(c, arc)?;
                            Ok(Arc1::open(rat(&lo), rat(&hi)))
                        })
                        .collect::<Result<_>>()?,
                );
                let cert = match tried.iter().find(|(t, _)| *t == j) {
                    Some((_, c)) => c.clone(),
                    None => {
                        let c = if free.is_empty() {
                            CoverageCertificate { k: 0, step: l as i64, cells: 0 }
                        } else {
                            coverage_bound(&free, &j, l as i64, self.coverage_budget)?
                        };
                        tried.push((j, c.clone()));
                        c
                    }
                };
                let gap = l * cert.k + l;
                let bound = self.transient_prefix + gap + u.len() as u64;
                if best.as_ref().is_none_or(|b| bound < b.value()) {
                    best = Some(RegionBound::Gap { bound, residue: rho as u64, certificate: cert });
                }
            }
        }
        Ok(best.unwrap_or(RegionBound::Empty { horizon: self.transient_prefix.max(1) + u.len() as u64 }))
    }

    /// The spec read from position `s` on.
    pub fn suffix(&self, s: u64) -> Result<TorusSpec> {
        let targets = self.targets.iter().map(|bs| bs.iter().map(|b| b.rotate(-(s as i64))).collect()).collect();
        let head = self.head.iter().skip(s as usize).copied().collect();
        TorusSpec::new(
            self.angles.clone(),
            self.declared.clone(),
            targets,
            self.transient_prefix.saturating_sub(s),
            head,
        )
    }

    /// Product of specs; letter `(a_0, …)` gets index `Σ a_i Π_{j>i} |Σ_j|`.
    /// Head letters are supplied by the caller.
    pub fn product(specs: &[&TorusSpec], head: Vec<u32>) -> Result<TorusSpec> {
        let angles: Vec<Real> = specs.iter().flat_map(|s| s.angles.iter().cloned()).collect();
        let d = angles.len();
        let mut declared = Vec::new();
        let mut off = 0;
        for s in specs {
            for row in &s.declared {
                let mut r = vec![0; d];
                r[off..off + s.dim()].copy_from_slice(row);
                declared.push(r);
            }
            off += s.dim();
        }
        let mut targets: Vec<Vec<TBox>> = vec![vec![TBox(vec![])]];
        for s in specs {
            let mut next = Vec::with_capacity(targets.len() * s.letters());
            for pre in &targets {
                for bs in &s.targets {
                    let mut out = Vec::new();
                    for p in pre {
                        for b in bs {
                            let mut v = p.0.clone();
                            v.extend(b.0.iter().cloned());
                            out.push(TBox(v));
                        }
                    }
                    next.push(out);
                }
            }
            targets = next;
        }
        let n = specs.iter().map(|s| s.transient_prefix).max().unwrap_or(0);
        TorusSpec::new(angles, declared, targets, n, head)
    }

    /// Geometry of the image under a `k`-uniform morphism `images[a]` with
    /// `out_letters` output letters: angles are slowed down by `k` and a
    /// counter coordinate with angle `1/k` records the position in the block.
    pub fn image_uniform(&self, images: &[Vec<u32>], out_letters: usize) -> Result<TorusSpec> {
        let k = images.first().map_or(0, |w| w.len());
        if k == 0 || images.iter().any(|w| w.len() != k) || images.len() != self.letters() {
            return Err(Error::input("morphism is not uniform over the alphabet"));
        }
        let ki = k as i64;
        let kq = BigRational::from_integer(k.into());
        let mut angles: Vec<Real> =
            self.angles.iter().map(|a| a.affine(BigRational::one() / &kq, BigRational::zero())).collect();
        let counter = k > 1;
        if counter {
            angles.push(Real::ratio(1, ki));
        }
        let d = angles.len();
        let mut declared: Vec<Vec<i64>> = Vec::new();
        for row in &self.declared {
            // a·θ ∈ Z gives (k a)·(θ/k) ∈ Z
            let mut r: Vec<i64> = row.iter().map(|x| x * ki).collect();
            if counter {
                r.push(0);
            }
            declared.push(r);
        }
        let lift = |l: &Lin, j: i64| Lin { c: l.c.clone(), m: l.m * ki + j };
        let mut targets: Vec<Vec<TBox>> = vec![vec![]; out_letters];
        for (a, boxes) in self.targets.iter().enumerate() {
            for (j, &b) in images[a].iter().enumerate() {
                let j = j as i64;
                if b as usize >= out_letters {
                    return Err(Error::UnknownLetter(b.to_string()));
                }
                for bx in boxes {
                    let mut arcs: Vec<Arc1> = bx
                        .0
                        .iter()
                        .map(|arc| match arc {
                            Arc1::Full => Arc1::Full,
                            Arc1::Open(lo, hi) => Arc1::Open(lift(lo, j), lift(hi, j)),
                        })
                        .collect();
                    if counter {
                        let c = BigRational::new((2 * j).into(), (2 * ki).into());
                        let h = BigRational::new(1.into(), (2 * ki).into());
                        arcs.push(Arc1::open(rat(&(&c - &h)), rat(&(&c + &h))));
                    }
                    targets[b as usize].push(TBox(arcs));
                }
            }
        }
        debug_assert!(targets.iter().flatten().all(|b| b.dim() == d));
        let head = self.head.iter().flat_map(|&a| images[a as usize].iter().copied()).collect();
        TorusSpec::new(angles, declared, targets, self.transient_prefix * k as u64, head)
    }

    /// Rotated point of step `n`, one entry per coordinate.
    pub fn orbit_point(&self, n: u64) -> Vec<Lin> {
        self.point(n)
    }
}

/// Arc `(lo, hi)` with rational endpoints.
pub fn rational_arc(lo: BigRational, hi: BigRational) -> Arc1 {
    Arc1::open(Lin::rational(lo), Lin::rational(hi))
}

/// The periodic word `a·b^ω` as a rotation by `1/|b|`.
pub fn periodic_spec(a: &[u32], b: &[u32], letters: usize) -> Result<TorusSpec> {
    let p = b.len() as i64;
    if p == 0 {
        return Err(Error::input("empty period"));
    }
    let mut targets = vec![vec![]; letters];
    for r in 0..p {
        let idx = ((r - a.len() as i64).rem_euclid(p)) as usize;
        let c = BigRational::new((2 * r).into(), (2 * p).into());
        let h = BigRational::new(1.into(), (2 * p).into());
        let bx = if p == 1 { TBox::full(1) } else { TBox(vec![rational_arc(&c - &h, &c + &h)]) };
        targets[b[idx] as usize].push(bx);
    }
    TorusSpec::new(vec![Real::ratio(1, p)], vec![], targets, a.len() as u64, a.to_vec())
}
