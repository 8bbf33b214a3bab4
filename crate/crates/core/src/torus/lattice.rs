//! Integer relations among rotation angles and the resulting orbit closure.
//!
//! Two regimes are supported: all coordinates rational, or a rational block
//! next to irrational coordinates drawn from pairwise distinct independence
//! classes. In the second regime no relation can involve an irrational
//! coordinate, so the closure is a finite union of full subtori.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::real::Real;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Computed from exact rational angles.
    Exact,
    /// Irrational coordinates are free by their independence certificates.
    Certified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationBasis {
    pub rows: Vec<Vec<i64>>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitClosure {
    /// Number of cosets, the lcm of the rational denominators.
    pub order: u64,
    pub rank: usize,
    pub rational_coords: Vec<usize>,
    pub free_coords: Vec<usize>,
    /// Position of the rational coordinates at each step `0..order`.
    pub points: Vec<Vec<BigRational>>,
}

fn overflow() -> Error {
    Error::input("relation coefficients overflow")
}

/// Integer kernel of `a ↦ a·c mod l`, as a basis of `Z^r`.
fn kernel_mod(c: &[i64], l: i64) -> Result<Vec<Vec<i64>>> {
    let r = c.len();
    let mut basis: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut img: Vec<i64> = c.iter().map(|x| x.rem_euclid(l)).collect();
    // Euclid on images until at most one vector has a nonzero image
    loop {
        let piv = (0..r).filter(|&i| img[i] != 0).min_by_key(|&i| img[i]);
        let Some(p) = piv else { break };
        let mut changed = false;
        for j in 0..r {
            if j == p || img[j] == 0 {
                continue;
            }
            let k = img[j] / img[p];
            for t in 0..r {
                basis[j][t] = basis[j][t]
                    .checked_sub(k.checked_mul(basis[p][t]).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
            }
            img[j] = (img[j] - k * img[p]).rem_euclid(l);
            changed = true;
        }
        if !changed {
            // p alone carries the image; it generates a cyclic group of order l/gcd
            let ord = l / img[p].gcd(&l);
            for t in 0..r {
                basis[p][t] = basis[p][t].checked_mul(ord).ok_or_else(overflow)?;
            }
            img[p] = 0;
            break;
        }
    }
    hermite(basis)
}

/// Row Hermite form with positive pivots and entries above a pivot reduced
/// into `(-p/2, p/2]`.
fn hermite(mut rows: Vec<Vec<i64>>) -> Result<Vec<Vec<i64>>> {
    let n = rows.first().map_or(0, |r| r.len());
    let mut out: Vec<Vec<i64>> = Vec::new();
    for col in 0..n {
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            for &i in &nz {
                if i == p {
                    continue;
                }
                let k = rows[i][col] / rows[p][col];
                let prow = rows[p].clone();
                for (x, y) in rows[i].iter_mut().zip(prow) {
                    *x = x.checked_sub(k.checked_mul(y).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i][col] != 0) {
            let mut row = rows.remove(i);
            if row[col] < 0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
            out.push(row);
        }
    }
    // reduce above pivots
    for i in 0..out.len() {
        let col = out[i].iter().position(|&x| x != 0).unwrap();
        let p = out[i][col];
        for j in 0..i {
            let v = out[j][col];
            let mut k = Integer::div_floor(&v, &p);
            if v - k * p > p / 2 {
                k += 1;
            }
            if k != 0 {
                let row = out[i].clone();
                for (x, y) in out[j].iter_mut().zip(row) {
                    *x = x.checked_sub(k.checked_mul(y).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
            }
        }
    }
    Ok(out)
}

fn rational_parts(angles: &[Real]) -> Result<(Vec<usize>, Vec<usize>, Vec<BigRational>)> {
    let mut rat = Vec::new();
    let mut irr = Vec::new();
    let mut qs = Vec::new();
    for (i, a) in angles.iter().enumerate() {
        match a.exact() {
            Some(q) => {
                rat.push(i);
                qs.push(q);
            }
            None => {
                if !a.is_irrational() {
                    return Err(Error::UnsupportedRelation(format!("{a} carries no irrationality certificate")));
                }
                irr.push(i);
            }
        }
    }
    Ok((rat, irr, qs))
}

fn lcm_denoms(qs: &[BigRational]) -> Result<i64> {
    let mut l: i64 = 1;
    for q in qs {
        let d = q.denom().to_i64().ok_or_else(overflow)?;
        l = l.lcm(&d);
        if l > (1 << 40) {
            return Err(overflow());
        }
    }
    Ok(l)
}

/// Basis of the group of integer relations `a` with `a·θ ∈ Z`.
///
/// `declared` rows are checked: rows touching only rational coordinates must
/// be genuine relations, rows touching an irrational coordinate are refused.
pub fn relation_lattice(angles: &[Real], declared: &[Vec<i64>]) -> Result<RelationBasis> {
    let d = angles.len();
    let (rat, irr, qs) = rational_parts(angles)?;
    for (x, &i) in irr.iter().enumerate() {
        for &j in &irr[x + 1..] {
            let (ci, cj) = (angles[i].independence_class(), angles[j].independence_class());
            if ci.is_none() || ci == cj {
                return Err(Error::UnsupportedRelation(format!(
                    "{} and {} may be rationally related",
                    angles[i], angles[j]
                )));
            }
        }
    }
    for row in declared {
        if row.len() != d {
            return Err(Error::input("declared relation has wrong length"));
        }
        if irr.iter().any(|&i| row[i] != 0) {
            return Err(Error::UnsupportedRelation("relation involving an irrational coordinate".into()));
        }
        let s: BigRational = rat.iter().zip(&qs).map(|(&i, q)| q * BigRational::from_integer(row[i].into())).sum();
        if !s.is_integer() {
            return Err(Error::Certificate(format!("declared relation {row:?} does not hold")));
        }
    }
    let l = lcm_denoms(&qs)?;
    let c: Vec<i64> = qs
        .iter()
        .map(|q| (q * BigRational::from_integer(l.into())).to_integer().to_i64().ok_or_else(overflow))
        .collect::<Result<_>>()?;
    let ker = if rat.is_empty() { vec![] } else { kernel_mod(&c, l)? };
    let rows = ker
        .into_iter()
        .map(|k| {
            let mut row = vec![0i64; d];
            for (&i, v) in rat.iter().zip(k) {
                row[i] = v;
            }
            row
        })
        .collect();
    let provenance = if irr.is_empty() { Provenance::Exact } else { Provenance::Certified };
    Ok(RelationBasis { rows, provenance })
}

/// Orbit closure of the rotation by `angles`, given its relation basis.
pub fn orbit_closure(angles: &[Real], basis: &RelationBasis) -> Result<OrbitClosure> {
    let (rat, irr, qs) = rational_parts(angles)?;
    if basis.rows.iter().any(|r| irr.iter().any(|&i| r[i] != 0)) {
        return Err(Error::UnsupportedRelation("relation involving an irrational coordinate".into()));
    }
    let rank = rank(&basis.rows);
    if rank != rat.len() {
        return Err(Error::UnsupportedRelation(format!(
            "relation basis has rank {rank}, expected {}",
            rat.len()
        )));
    }
    let l = lcm_denoms(&qs)?;
    let points = (0..l)
        .map(|n| {
            qs.iter()
                .map(|q| {
                    let x = q * BigRational::from_integer(n.into());
                    &x - x.floor()
                })
                .collect()
        })
        .collect();
    Ok(OrbitClosure {
        order: l as u64,
        rank: angles.len() - rank,
        rational_coords: rat,
        free_coords: irr,
        points,
    })
}

fn rank(rows: &[Vec<i64>]) -> usize {
    // fraction-free elimination over rationals
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rk = 0;
    for c in 0..cols {
        let Some(p) = (rk..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rk, p);
        for i in 0..m.len() {
            if i != rk && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rk][c];
                let prow = m[rk].clone();
                for (x, y) in m[i].iter_mut().zip(prow) {
                    *x -= &f * y;
                }
            }
        }
        rk += 1;
    }
    rk
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::real::consts;

    fn in_kernel(row: &[i64], qs: &[(i64, i64)]) -> bool {
        let s: BigRational = row
            .iter()
            .zip(qs)
            .map(|(&a, &(p, q))| BigRational::new((a * p).into(), q.into()))
            .sum();
        s.is_integer()
    }

    #[test]
    fn thirds_and_sixths() {
        let a = [Real::ratio(1, 3), Real::ratio(1, 6)];
        let b = relation_lattice(&a, &[]).unwrap();
        assert_eq!(b.rows, vec![vec![1, -2], vec![0, 6]]);
        assert_eq!(b.provenance, Provenance::Exact);
        let c = orbit_closure(&a, &b).unwrap();
        assert_eq!((c.order, c.rank, c.points.len()), (6, 0, 6));
    }

    #[test]
    fn kernel_matches_brute_enumeration() {
        let qs = [(2, 5), (1, 4), (5, 6)];
        let angles: Vec<Real> = qs.iter().map(|&(p, q)| Real::ratio(p, q)).collect();
        let b = relation_lattice(&angles, &[]).unwrap();
        assert!(b.rows.iter().all(|r| in_kernel(r, &qs)));
        // index of the kernel equals the number of distinct images, i.e. lcm = 60
        let det: i64 = b.rows.iter().enumerate().map(|(i, r)| r[i]).product();
        assert_eq!(det.abs(), 60);
    }

    #[test]
    fn mixed_regime() {
        let a = [Real::ratio(1, 2), consts::golden()];
        let b = relation_lattice(&a, &[]).unwrap();
        assert_eq!(b.rows, vec![vec![2, 0]]);
        let c = orbit_closure(&a, &b).unwrap();
        assert_eq!((c.order, c.rank), (2, 1));
        let single = relation_lattice(&[consts::golden()], &[]).unwrap();
        assert!(single.rows.is_empty());
    }

    #[test]
    fn refuses_related_irrationals() {
        let phi = consts::golden();
        let two = phi.affine(BigRational::from_integer(2.into()), BigRational::zero());
        assert!(matches!(relation_lattice(&[phi.clone(), two], &[]), Err(Error::UnsupportedRelation(_))));
        assert!(matches!(
            relation_lattice(&[phi, Real::ratio(1, 2)], &[vec![1, 0]]),
            Err(Error::UnsupportedRelation(_))
        ));
        assert!(matches!(
            relation_lattice(&[Real::ratio(1, 2)], &[vec![1]]),
            Err(Error::Certificate(_))
        ));
    }
}
