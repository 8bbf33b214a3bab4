//! How many rotated copies of an open box are needed to cover the torus.

use serde::Serialize;

use super::circle::{arc_side, Arc1, Coord, Lin, Partition, Side};
use crate::error::{Error, Result};

/// An open box: one arc per coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TBox(pub Vec<Arc1>);

impl TBox {
    pub fn full(d: usize) -> TBox {
        TBox(vec![Arc1::Full; d])
    }

    /// The box moved by `k` rotation steps on every coordinate.
    pub fn rotate(&self, k: i64) -> TBox {
        TBox(self.0.iter().map(|a| a.rotate(k)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Side of the point `(p_0, …, p_{d-1})`: boundary if it is on the boundary
    /// in some coordinate and inside in all others.
    pub fn side(&self, coords: &[Coord], p: &[Lin]) -> Result<Side> {
        let mut boundary = false;
        for ((c, a), x) in coords.iter().zip(&self.0).zip(p) {
            match arc_side(c, a, x)? {
                Side::Outside => return Ok(Side::Outside),
                Side::Boundary => boundary = true,
                Side::Inside => {}
            }
        }
        Ok(if boundary { Side::Boundary } else { Side::Inside })
    }
}

impl std::fmt::Display for TBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(" x "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageCertificate {
    /// Copies `J - k·step·ψ` for `k = 0..=k` cover the torus.
    pub k: u64,
    pub step: i64,
    /// Cells of the final sweep that were checked.
    pub cells: usize,
}

/// Per coordinate: the sorted endpoints, and each box's arc as a cyclic range
/// of cell positions (`2i` is point `i`, `2i+1` the gap after it).
struct Grid {
    n: Vec<usize>,
    ranges: Vec<Vec<Option<(usize, usize)>>>,
}

fn build_grid(coords: &[Coord], boxes: &[TBox]) -> Result<Grid> {
    let mut n = Vec::with_capacity(coords.len());
    let mut ranges = vec![Vec::with_capacity(coords.len()); boxes.len()];
    for (i, c) in coords.iter().enumerate() {
        let pts: Vec<Lin> = boxes.iter().flat_map(|b| b.0[i].endpoints()).collect();
        let part = Partition::new(c, &pts)?;
        let np = part.points.len();
        n.push(np);
        for (bi, b) in boxes.iter().enumerate() {
            ranges[bi].push(match &b.0[i] {
                Arc1::Full => None,
                Arc1::Open(lo, hi) => {
                    let (a, z) = (part.locate(c, lo), part.locate(c, hi));
                    Some((2 * a + 1, (2 * z + 2 * np - 1) % (2 * np)))
                }
            });
        }
    }
    Ok(Grid { n, ranges })
}

fn in_range(r: Option<(usize, usize)>, pos: usize, len: usize) -> bool {
    match r {
        None => true,
        Some((a, z)) => (pos + len - a) % len <= (z + len - a) % len,
    }
}

impl Grid {
    fn cells(&self, i: usize) -> usize {
        (2 * self.n[i]).max(1)
    }

    fn covers(&self, i: usize, cand: &[usize], count: &mut usize) -> bool {
        let d = self.n.len();
        if i == d {
            return !cand.is_empty();
        }
        let len = self.cells(i);
        if i + 1 == d {
            // last coordinate: difference array over the cyclic cell sequence
            *count += len;
            if self.n[i] == 0 {
                return !cand.is_empty();
            }
            let mut diff = vec![0i64; len + 1];
            for &b in cand {
                match self.ranges[b][i] {
                    None => return true,
                    Some((a, z)) => {
                        if a <= z {
                            diff[a] += 1;
                            diff[z + 1] -= 1;
                        } else {
                            diff[a] += 1;
                            diff[len] -= 1;
                            diff[0] += 1;
                            diff[z + 1] -= 1;
                        }
                    }
                }
            }
            let mut run = 0;
            return diff[..len].iter().all(|&x| {
                run += x;
                run > 0
            });
        }
        let mut sub = Vec::with_capacity(cand.len());
        for pos in 0..len {
            *count += 1;
            sub.clear();
            sub.extend(cand.iter().copied().filter(|&b| self.n[i] == 0 || in_range(self.ranges[b][i], pos, len)));
            if sub.is_empty() || !self.covers(i + 1, &sub, count) {
                return false;
            }
        }
        true
    }
}

/// Whether the union of open boxes is the whole torus.
pub fn covers(coords: &[Coord], boxes: &[TBox]) -> Result<(bool, usize)> {
    if boxes.is_empty() {
        return Ok((false, 0));
    }
    let grid = build_grid(coords, boxes)?;
    let all: Vec<usize> = (0..boxes.len()).collect();
    let mut count = 0;
    let ok = grid.covers(0, &all, &mut count);
    Ok((ok, count))
}

fn translates(j: &TBox, step: i64, k: u64) -> Vec<TBox> {
    (0..=k as i64).map(|t| j.rotate(-t * step)).collect()
}

/// Smallest `K` such that `J - k·step·ψ`, `0 ≤ k ≤ K`, cover the torus whose
/// coordinates are `coords` (all irrational, jointly independent).
pub fn coverage_bound(coords: &[Coord], j: &TBox, step: i64, budget: u64) -> Result<CoverageCertificate> {
    if j.dim() != coords.len() {
        return Err(Error::input("box dimension does not match the torus"));
    }
    if coords.iter().any(|c| !c.angle.is_irrational()) {
        return Err(Error::input("coverage needs irrational rotation coordinates"));
    }
    if step == 0 {
        return Err(Error::input("rotation step must be nonzero"));
    }
    let check = |k: u64| covers(coords, &translates(j, step, k));
    let (mut lo, mut hi) = (0u64, 0u64);
    let mut cells;
    loop {
        let (ok, c) = check(hi)?;
        cells = c;
        if ok {
            break;
        }
        if hi >= budget {
            return Err(Error::Budget(format!("no cover of {j} within {budget} translates")));
        }
        lo = hi + 1;
        hi = (hi * 2 + 1).min(budget);
    }
    // invariant: hi covers, everything below lo does not
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let (ok, c) = check(mid)?;
        if ok {
            hi = mid;
            cells = c;
        } else {
            lo = mid + 1;
        }
    }
    Ok(CoverageCertificate { k: hi, step, cells })
}

/// Independent re-check of a certificate: on every cell of every coordinate
/// but the last, each endpoint of the arcs still present on the last
/// coordinate must lie strictly inside another such arc.
pub fn verify_coverage(coords: &[Coord], j: &TBox, cert: &CoverageCertificate) -> Result<bool> {
    let boxes = translates(j, cert.step, cert.k);
    let d = coords.len();
    if d == 0 {
        return Ok(true);
    }
    let mut slices: Vec<Vec<usize>> = vec![(0..boxes.len()).collect()];
    for i in 0..d - 1 {
        let pts: Vec<Lin> = boxes.iter().flat_map(|b| b.0[i].endpoints()).collect();
        let part = Partition::new(&coords[i], &pts)?;
        let cells: Vec<_> = (0..part.points.len().max(1))
            .flat_map(|k| {
                let mut gap = part.empty_set();
                gap.gaps[k] = true;
                let mut pt = part.empty_set();
                if !pt.pts.is_empty() {
                    pt.pts[k] = true;
                }
                [gap, pt]
            })
            .filter(|s| s.gaps.iter().any(|&g| g) || s.pts.iter().any(|&p| p))
            .collect();
        let sets: Vec<_> = boxes.iter().map(|b| part.cells(&coords[i], &b.0[i])).collect();
        let mut next = Vec::new();
        for s in &slices {
            for cell in &cells {
                next.push(s.iter().copied().filter(|&b| sets[b].and(cell) == *cell).collect());
            }
        }
        slices = next;
    }
    let c = &coords[d - 1];
    for s in slices {
        let arcs: Vec<&Arc1> = s.iter().map(|&b| &boxes[b].0[d - 1]).collect();
        if arcs.is_empty() {
            return Ok(false);
        }
        if arcs.iter().any(|a| **a == Arc1::Full) {
            continue;
        }
        for a in &arcs {
            for e in a.endpoints() {
                let mut inside = false;
                for b in &arcs {
                    if arc_side(c, b, &e)? == Side::Inside {
                        inside = true;
                        break;
                    }
                }
                if !inside {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
