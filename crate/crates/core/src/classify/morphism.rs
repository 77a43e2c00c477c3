//! Positive unit-preserving maps between finite stages of two dimension groups.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::frobenius::{frobenius, represent};
use crate::dimgroup::DimGroup;
use crate::error::{Error, Result};
use crate::invariants::{divides_unit, Divisibility};
use crate::linalg::IntMatrix;

/// `matrix` maps level `a_level` of A to level `b_level` of B, sending the
/// height vector to the height vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct K0Morphism {
    pub a_level: usize,
    pub b_level: usize,
    pub p: u64,
    pub matrix: IntMatrix,
}

impl K0Morphism {
    /// Nonnegativity and unit preservation, recomputed from the presentations.
    pub fn verify(&self, a: &DimGroup, b: &DimGroup) -> Result<()> {
        let ha = a.diagram().heights(self.a_level)?;
        let hb = b.diagram().heights(self.b_level)?;
        if self.matrix.rows() != hb.len() || self.matrix.cols() != ha.len() {
            return Err(Error::Certificate("morphism matrix has the wrong shape".into()));
        }
        if !self.matrix.is_nonnegative() {
            return Err(Error::Certificate("morphism matrix has a negative entry".into()));
        }
        if self.matrix.mul_vec(&ha) != hb {
            return Err(Error::Certificate(format!(
                "morphism from level {} to level {} does not preserve the unit",
                self.a_level, self.b_level
            )));
        }
        Ok(())
    }
}

fn to_u64(v: &[BigInt], what: &str) -> Result<Vec<u64>> {
    v.iter()
        .map(|x| x.to_u64().ok_or_else(|| Error::Capability(format!("{what} exceed 64 bits"))))
        .collect()
}

/// Builds `T >= 0` with `T h_A = h_B` by writing each `h_B(i) / p` in the
/// semigroup generated by `h_A / p`, where `p = gcd(h_A)`. When `positive`
/// is set every entry of `T` is at least 1.
fn build(a: &DimGroup, level_a: usize, b: &DimGroup, level_b: usize, depth: usize, positive: bool) -> Result<K0Morphism> {
    let ha = to_u64(&a.diagram().heights(level_a)?, "heights")?;
    let p = ha.iter().fold(0u64, |g, &x| num_integer::gcd(g, x));
    let k: Vec<u64> = ha.iter().map(|x| x / p).collect();
    let start = match divides_unit(b, p, depth)? {
        Divisibility::Yes { level } => level.max(level_b),
        Divisibility::No { .. } => {
            return Err(Error::Obstruction {
                stage: "morphism".into(),
                n: p,
            })
        }
        Divisibility::Unknown { depth } => {
            return Err(Error::Exhausted(format!("divisibility of the unit by {p} undecided within depth {depth}")))
        }
    };
    let extra: u64 = if positive { k.iter().sum() } else { 0 };
    let threshold = frobenius(&k)? + extra;
    let pb = BigInt::from(p);
    for level in start..=start + depth {
        b.diagram().check_level(level)?;
        let hb = b.diagram().heights(level)?;
        if !hb.iter().all(|x| (x % &pb).is_zero()) {
            continue;
        }
        let d: Vec<BigInt> = hb.iter().map(|x| x / &pb).collect();
        if d.iter().any(|x| x < &BigInt::from(threshold)) {
            continue;
        }
        let d = to_u64(&d, "heights")?;
        let mut rows = Vec::with_capacity(d.len());
        for &di in &d {
            let mut row = represent(di - extra, &k).expect("above the Frobenius threshold");
            if positive {
                row.iter_mut().for_each(|x| *x += 1);
            }
            rows.push(row.into_iter().map(BigInt::from).collect());
        }
        let m = K0Morphism {
            a_level: level_a,
            b_level: level,
            p,
            matrix: IntMatrix::from_rows(rows).unwrap(),
        };
        debug_assert!(m.verify(a, b).is_ok());
        return Ok(m);
    }
    Err(Error::Exhausted(format!(
        "no level of B within {depth} steps of {start} has all heights/{p} above {threshold}"
    )))
}

/// A nonnegative `T` with `T h_A(level_a) = h_B(level)` for some level `>= level_b`.
pub fn build_k0_morphism(a: &DimGroup, level_a: usize, b: &DimGroup, level_b: usize, depth: usize) -> Result<K0Morphism> {
    build(a, level_a, b, level_b, depth, false)
}

/// As [`build_k0_morphism`], with every matrix entry at least 1.
pub fn build_positive_k0_morphism(
    a: &DimGroup,
    level_a: usize,
    b: &DimGroup,
    level_b: usize,
    depth: usize,
) -> Result<K0Morphism> {
    build(a, level_a, b, level_b, depth, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::OrderedBratteliDiagram;

    fn odometer(k: usize) -> DimGroup {
        DimGroup::new(&OrderedBratteliDiagram::stationary_from_lists(vec![vec![0; k]], k).unwrap())
    }

    #[test]
    fn examples() {
        let t = build_k0_morphism(&odometer(2), 2, &odometer(4), 1, 10).unwrap();
        assert_eq!((t.b_level, t.p), (1, 4));
        assert_eq!(t.matrix, IntMatrix::from_i64(&[&[1]]));
        let err = build_k0_morphism(&odometer(2), 1, &odometer(3), 1, 10).unwrap_err();
        assert_eq!(err, Error::Obstruction { stage: "morphism".into(), n: 2 });
        let t = build_k0_morphism(&odometer(2), 0, &odometer(2), 0, 10).unwrap();
        assert_eq!((t.a_level, t.b_level), (0, 0));
        assert_eq!(t.matrix, IntMatrix::identity(1));
    }

    #[test]
    fn positive_variant() {
        let fib = DimGroup::new(&OrderedBratteliDiagram::stationary_from_lists(vec![vec![0, 1], vec![0]], 1).unwrap());
        let t = build_positive_k0_morphism(&fib, 2, &fib, 1, 20).unwrap();
        assert!(t.matrix.is_strictly_positive());
        t.verify(&fib, &fib).unwrap();
    }
}
