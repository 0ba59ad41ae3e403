//! Index of the subgroup of `Z^d` generated by a set of integer vectors.
//!
//! A walk is aperiodic exactly when its jump support generates all of `Z^d`,
//! i.e. when the generated sublattice has index 1. The index is computed by
//! an incremental Hermite-style echelon reduction over the integers; for a
//! full-rank triangular basis the index is the absolute product of pivots.

use crate::lattice::LatticePoint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SubgroupError {
    #[error("generator has dimension {0}, expected {1}")]
    DimensionMismatch(usize, usize),
    #[error("integer overflow during lattice reduction")]
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubgroupIndex {
    Finite(u128),
    Infinite,
}

impl SubgroupIndex {
    pub fn is_full(&self) -> bool {
        matches!(self, SubgroupIndex::Finite(1))
    }
}

impl std::fmt::Display for SubgroupIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubgroupIndex::Finite(k) => write!(f, "{k}"),
            SubgroupIndex::Infinite => write!(f, "infinite"),
        }
    }
}

fn checked_combine(a: &[i128], b: &[i128], x: i128, y: i128) -> Result<Vec<i128>, SubgroupError> {
    a.iter()
        .zip(b)
        .map(|(&ai, &bi)| {
            let p = x.checked_mul(ai).ok_or(SubgroupError::Overflow)?;
            let q = y.checked_mul(bi).ok_or(SubgroupError::Overflow)?;
            p.checked_add(q).ok_or(SubgroupError::Overflow)
        })
        .collect()
}

/// Extended gcd: returns `(g, x, y)` with `x*a + y*b = g >= 0`.
fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = extended_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Index in `Z^dim` of the subgroup generated by `generators`.
pub fn generated_subgroup_index(
    generators: &[LatticePoint],
    dim: usize,
) -> Result<SubgroupIndex, SubgroupError> {
    // basis[p] : Some(vector) with pivot (first nonzero entry) at column p
    let mut basis: Vec<Option<Vec<i128>>> = vec![None; dim];
    for g in generators {
        if g.dim() != dim {
            return Err(SubgroupError::DimensionMismatch(g.dim(), dim));
        }
        let mut v: Vec<i128> = g.coords().iter().map(|&c| c as i128).collect();
        for p in 0..dim {
            if v[p] == 0 {
                continue;
            }
            match &basis[p] {
                None => {
                    if v[p] < 0 {
                        for e in v.iter_mut() {
                            *e = -*e;
                        }
                    }
                    basis[p] = Some(v);
                    v = vec![];
                    break;
                }
                Some(b) => {
                    let (g0, x, y) = extended_gcd(b[p], v[p]);
                    let new_b = checked_combine(b, &v, x, y)?;
                    let new_v = checked_combine(&v, b, b[p] / g0, -(v[p] / g0))?;
                    debug_assert_eq!(new_b[p], g0);
                    debug_assert_eq!(new_v[p], 0);
                    basis[p] = Some(new_b);
                    v = new_v;
                }
            }
        }
        // size-reduce entries above later pivots to keep growth bounded
        for p in 0..dim {
            if basis[p].is_none() {
                continue;
            }
            for q in (p + 1)..dim {
                let Some(bq) = basis[q].clone() else { continue };
                let bp = basis[p].as_mut().expect("checked above");
                let pivot = bq[q];
                if pivot != 0 {
                    let f = bp[q].div_euclid(pivot);
                    if f != 0 {
                        for (e, &r) in bp.iter_mut().zip(&bq) {
                            *e = e
                                .checked_sub(f.checked_mul(r).ok_or(SubgroupError::Overflow)?)
                                .ok_or(SubgroupError::Overflow)?;
                        }
                    }
                }
            }
        }
    }
    let mut index: u128 = 1;
    for (p, b) in basis.iter().enumerate() {
        match b {
            None => return Ok(SubgroupIndex::Infinite),
            Some(v) => {
                index = index
                    .checked_mul(v[p].unsigned_abs())
                    .ok_or(SubgroupError::Overflow)?;
            }
        }
    }
    Ok(SubgroupIndex::Finite(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[&[i64]]) -> Vec<LatticePoint> {
        coords
            .iter()
            .map(|c| LatticePoint::new(c).unwrap())
            .collect()
    }

    #[test]
    fn unit_vectors_generate_everything() {
        let gens = pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]);
        assert_eq!(
            generated_subgroup_index(&gens, 2).unwrap(),
            SubgroupIndex::Finite(1)
        );
    }

    #[test]
    fn zero_vector_changes_nothing() {
        let gens = pts(&[&[1, 0], &[0, 1], &[0, 0]]);
        assert_eq!(
            generated_subgroup_index(&gens, 2).unwrap(),
            SubgroupIndex::Finite(1)
        );
    }

    #[test]
    fn scaling_multiplies_the_index_by_m_to_the_d() {
        for m in [2i64, 3, 5] {
            let gens = pts(&[&[m, 0], &[-m, 0], &[0, m], &[0, -m]]);
            assert_eq!(
                generated_subgroup_index(&gens, 2).unwrap(),
                SubgroupIndex::Finite((m * m) as u128)
            );
        }
    }

    #[test]
    fn antidiagonal_support_has_infinite_index() {
        let gens = pts(&[&[1, -1], &[-1, 1], &[2, -2]]);
        assert_eq!(
            generated_subgroup_index(&gens, 2).unwrap(),
            SubgroupIndex::Infinite
        );
    }

    #[test]
    fn skewed_basis() {
        // (2,0) and (1,1) generate the even-sum sublattice, index 2
        let gens = pts(&[&[2, 0], &[1, 1]]);
        assert_eq!(
            generated_subgroup_index(&gens, 2).unwrap(),
            SubgroupIndex::Finite(2)
        );
    }

    #[test]
    fn three_dimensional_check() {
        let gens = pts(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 3]]);
        assert_eq!(
            generated_subgroup_index(&gens, 3).unwrap(),
            SubgroupIndex::Finite(3)
        );
    }
}
