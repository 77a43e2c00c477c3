//! Realising dimension group classes by clopen sets, and lifting unital maps.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bratteli::{Cell, ClopenSet, OrderedBratteliDiagram};
use crate::dimgroup::{Answer, DgElement, DimGroup, Positivity};
use crate::error::{Error, Result};
use crate::invariants::{divides_unit, Divisibility};

/// A clopen set `Q` inside `u` whose class is `x`: at the first level where
/// the representative of `x` fits under the counting vector of `u`, take the
/// lowest `x(w)` cells of `u` in each tower `w`.
pub fn lift_class_under(d: &OrderedBratteliDiagram, u: &ClopenSet, x: &DgElement, depth: usize) -> Result<ClopenSet> {
    let dg = DimGroup::new(d);
    dg.check_element(x)?;
    match dg.is_positive(x, depth)? {
        Positivity::Positive { .. } | Positivity::Zero => {}
        other => return Err(Error::Precondition(format!("class to lift is not positive ({other:?})"))),
    }
    let cu = d.class_of_clopen(u)?;
    match dg.is_positive(&dg.sub(&cu, x)?, depth)? {
        Positivity::Positive { .. } | Positivity::Zero => {}
        other => {
            return Err(Error::Precondition(format!(
                "class exceeds the class of the enclosing set ({other:?})"
            )))
        }
    }
    let start = u.level().max(x.level);
    for level in start..=start + depth {
        d.check_level(level)?;
        let r = dg.push(x, level)?;
        let fine = u.refine(d, level)?;
        let count = fine.counting_vector(d)?;
        if r.vector.iter().zip(&count).any(|(ri, ci)| ri.is_negative() || ri > ci) {
            continue;
        }
        let mut left: Vec<BigInt> = r.vector;
        let cells: Vec<Cell> = fine
            .iter()
            .filter(|c| {
                let take = left[c.tower].is_positive();
                if take {
                    left[c.tower] -= 1;
                }
                take
            })
            .copied()
            .collect();
        return ClopenSet::new(level, cells);
    }
    Err(Error::Exhausted(format!(
        "no level within {depth} of {start} realises the class under the given set"
    )))
}

/// Disjoint clopen sets with the prescribed classes, covering the space.
///
/// Each block but the last is lifted under the running complement; the last
/// block is what remains. All blocks are returned at a common level.
pub fn partition_from_classes(d: &OrderedBratteliDiagram, xs: &[DgElement], depth: usize) -> Result<Vec<ClopenSet>> {
    let dg = DimGroup::new(d);
    if xs.is_empty() {
        return Err(Error::InvalidArgument("no classes to realise".into()));
    }
    for (i, x) in xs.iter().enumerate() {
        match dg.is_positive(x, depth)? {
            Positivity::Positive { .. } | Positivity::Zero => {}
            other => return Err(Error::Precondition(format!("class {i} is not positive ({other:?})"))),
        }
    }
    let mut total = xs[0].clone();
    for x in &xs[1..] {
        total = dg.add(&total, x)?;
    }
    let start = xs.iter().map(|x| x.level).max().unwrap();
    if dg.equal(&total, &dg.unit(start)?, depth)? != Answer::Yes {
        return Err(Error::Precondition("classes do not sum to the order unit".into()));
    }
    let mut rest = ClopenSet::full(d, start)?;
    let mut blocks: Vec<ClopenSet> = Vec::with_capacity(xs.len());
    for x in &xs[..xs.len() - 1] {
        let q = lift_class_under(d, &rest, x, depth)?;
        rest = rest.refine(d, q.level())?.difference(&q)?;
        blocks.push(q);
    }
    blocks.push(rest);
    let top = blocks.iter().map(ClopenSet::level).max().unwrap();
    blocks.iter().map(|b| b.refine(d, top)).collect()
}

/// A bijection between the blocks of a clopen partition of one space and a
/// clopen partition of another. Target blocks carry the classes they were
/// built from; empty targets (and `invertible == false`) mark blocks whose
/// image class is zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionHomeomorphism {
    pub source_level: usize,
    pub target_level: usize,
    pub source_blocks: Vec<ClopenSet>,
    pub target_blocks: Vec<ClopenSet>,
    pub target_classes: Vec<DgElement>,
    pub invertible: bool,
}

impl PartitionHomeomorphism {
    /// Re-checks both partitions and the class of every target block.
    pub fn verify(&self, da: &OrderedBratteliDiagram, db: &OrderedBratteliDiagram, depth: usize) -> Result<()> {
        let n = self.source_blocks.len();
        if self.target_blocks.len() != n || self.target_classes.len() != n {
            return Err(Error::Certificate("block lists have different lengths".into()));
        }
        check_partition(da, self.source_level, &self.source_blocks, false)?;
        check_partition(db, self.target_level, &self.target_blocks, true)?;
        let dg = DimGroup::new(db);
        for (i, (t, x)) in self.target_blocks.iter().zip(&self.target_classes).enumerate() {
            if dg.equal(&db.class_of_clopen(t)?, x, depth)? != Answer::Yes {
                return Err(Error::Certificate(format!("target block {i} has the wrong class")));
            }
            if t.is_empty() && self.invertible {
                return Err(Error::Certificate(format!("target block {i} is empty but the map claims invertibility")));
            }
        }
        Ok(())
    }
}

fn check_partition(d: &OrderedBratteliDiagram, level: usize, parts: &[ClopenSet], allow_empty: bool) -> Result<()> {
    let full = ClopenSet::full(d, level)?;
    let mut seen = 0;
    let mut acc = ClopenSet::empty(level);
    for (i, p) in parts.iter().enumerate() {
        if p.level() != level {
            return Err(Error::Certificate(format!("block {i} is not at level {level}")));
        }
        if p.is_empty() && !allow_empty {
            return Err(Error::Certificate(format!("block {i} is empty")));
        }
        if !acc.is_disjoint(p)? {
            return Err(Error::Certificate(format!("block {i} overlaps an earlier block")));
        }
        seen += p.len();
        acc = acc.union(p)?;
    }
    if seen != full.len() || acc != full {
        return Err(Error::Certificate(format!("blocks do not cover the level-{level} cells")));
    }
    Ok(())
}

/// Realises a unital positive map on a partition: `source_blocks` partition
/// the first space and `images[i]` is the class in `db` assigned to block `i`.
///
/// Zero images get empty targets and mark the result non-invertible, as for
/// a point-evaluation map.
pub fn partition_homeomorphism_from_hom(
    da: &OrderedBratteliDiagram,
    source_blocks: &[ClopenSet],
    db: &OrderedBratteliDiagram,
    images: &[DgElement],
    depth: usize,
) -> Result<PartitionHomeomorphism> {
    if source_blocks.len() != images.len() || source_blocks.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} source blocks but {} images",
            source_blocks.len(),
            images.len()
        )));
    }
    let source_level = source_blocks[0].level();
    check_partition(da, source_level, source_blocks, false).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let dg = DimGroup::new(db);
    let mut zero = Vec::with_capacity(images.len());
    for (i, x) in images.iter().enumerate() {
        match dg.is_positive(x, depth)? {
            Positivity::Positive { .. } => zero.push(false),
            Positivity::Zero => zero.push(true),
            other => return Err(Error::Precondition(format!("image {i} is not positive ({other:?})"))),
        }
    }
    let live: Vec<DgElement> = images.iter().zip(&zero).filter(|(_, z)| !**z).map(|(x, _)| x.clone()).collect();
    let parts = partition_from_classes(db, &live, depth)?;
    let target_level = parts[0].level();
    let mut parts = parts.into_iter();
    let target_blocks = zero
        .iter()
        .map(|&z| if z { ClopenSet::empty(target_level) } else { parts.next().unwrap() })
        .collect();
    Ok(PartitionHomeomorphism {
        source_level,
        target_level,
        source_blocks: source_blocks.to_vec(),
        target_blocks,
        target_classes: images.to_vec(),
        invertible: !zero.contains(&true),
    })
}

/// A unital lift `h` of a map out of `Z^r` with unit `f1` into a dimension
/// group: `h(f1) = u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BezoutLift {
    #[serde(with = "crate::bigint_serde::scalar")]
    pub p: BigInt,
    #[serde(with = "crate::bigint_serde::vec")]
    pub bezout: Vec<BigInt>,
    /// `p * f0 = u`.
    pub f0: DgElement,
    /// `h(e_i)`.
    pub columns: Vec<DgElement>,
}

/// Coefficients `n` with `sum k_i n_i = gcd(k)`.
fn bezout(k: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut n: Vec<BigInt> = Vec::with_capacity(k.len());
    for ki in k {
        let e = g.extended_gcd(ki);
        n.iter_mut().for_each(|x| *x *= &e.x);
        n.push(e.y);
        g = e.gcd;
    }
    (g, n)
}

/// Writes `f1 = p k` with `gcd(k) = 1`, takes `f0` with `p f0 = u` from the
/// divisibility witness, and corrects the supplied preimages `g_i` (zero by
/// default) by `f00 = sum k_i g_i - f0`: `h(e_i) = g_i - n_i f00`.
pub fn bezout_lift(f1: &[BigInt], target: &DimGroup, preimages: Option<&[DgElement]>, depth: usize) -> Result<BezoutLift> {
    if f1.is_empty() || f1.iter().any(|m| !m.is_positive()) {
        return Err(Error::InvalidArgument("the unit of Z^r must have positive entries".into()));
    }
    let p = f1.iter().fold(BigInt::zero(), |g, m| g.gcd(m));
    let k: Vec<BigInt> = f1.iter().map(|m| m / &p).collect();
    let small_p = u64::try_from(&p).map_err(|_| Error::Capability("gcd of the unit exceeds 64 bits".into()))?;
    let level = match divides_unit(target, small_p, depth)? {
        Divisibility::Yes { level } => level,
        Divisibility::No { .. } => return Err(Error::Obstruction { stage: "bezout".into(), n: small_p }),
        Divisibility::Unknown { depth } => {
            return Err(Error::Exhausted(format!("divisibility by {p} undecided within depth {depth}")))
        }
    };
    let mut level = level;
    if let Some(g) = preimages {
        if g.len() != f1.len() {
            return Err(Error::InvalidArgument(format!("{} preimages for {} generators", g.len(), f1.len())));
        }
        level = g.iter().map(|x| x.level).fold(level, usize::max);
    }
    let u = target.unit(level)?;
    let f0 = DgElement::new(level, u.vector.iter().map(|x| x / &p).collect());
    let g: Vec<DgElement> = match preimages {
        Some(g) => g.iter().map(|x| target.push(x, level)).collect::<Result<_>>()?,
        None => vec![DgElement::new(level, vec![BigInt::zero(); u.vector.len()]); f1.len()],
    };
    let (one, n) = bezout(&k);
    debug_assert!(one.is_one());
    let mut f00 = f0.neg();
    for (ki, gi) in k.iter().zip(&g) {
        f00 = target.add(&f00, &target.scale(gi, ki))?;
    }
    let columns: Vec<DgElement> = g
        .iter()
        .zip(&n)
        .map(|(gi, ni)| target.sub(gi, &target.scale(&f00, ni)))
        .collect::<Result<_>>()?;
    let mut image = DgElement::new(level, vec![BigInt::zero(); u.vector.len()]);
    for (m, c) in f1.iter().zip(&columns) {
        image = target.add(&image, &target.scale(c, m))?;
    }
    if target.equal(&image, &u, depth)? != Answer::Yes {
        return Err(Error::Certificate("lifted map does not send the unit to the unit".into()));
    }
    Ok(BezoutLift { p, bezout: n, f0, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odometer(k: usize) -> OrderedBratteliDiagram {
        OrderedBratteliDiagram::stationary_from_lists(vec![vec![0; k]], k).unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn lift_examples() {
        let d = odometer(2);
        let full = ClopenSet::full(&d, 2).unwrap();
        let q = lift_class_under(&d, &full, &DgElement::from_i64(2, &[4]), 10).unwrap();
        assert_eq!(q, full);
        let u = ClopenSet::from_floors(&d, 3, 0, &[1, 2, 3, 4, 5, 6]).unwrap();
        let q = lift_class_under(&d, &u, &DgElement::from_i64(3, &[3]), 10).unwrap();
        assert_eq!(q, ClopenSet::from_floors(&d, 3, 0, &[1, 2, 3]).unwrap());
        let err = lift_class_under(&d, &u, &DgElement::from_i64(3, &[7]), 10).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn partitions() {
        let d = odometer(2);
        let one = partition_from_classes(&d, &[DgElement::from_i64(0, &[1])], 10).unwrap();
        assert_eq!(one, vec![ClopenSet::full(&d, 0).unwrap()]);
        let two = partition_from_classes(&d, &[DgElement::from_i64(1, &[1]), DgElement::from_i64(1, &[1])], 10).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|b| b.len() == 1 && b.level() == 1));
        assert!(two[0].is_disjoint(&two[1]).unwrap());
        let err = partition_from_classes(&d, &[DgElement::from_i64(1, &[3]), DgElement::from_i64(1, &[-1])], 10);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn homeomorphism_on_partitions() {
        let d = odometer(2);
        let cells: Vec<ClopenSet> = (1..=2).map(|j| ClopenSet::from_floors(&d, 1, 0, &[j]).unwrap()).collect();
        let images = vec![DgElement::from_i64(1, &[1]); 2];
        let s = partition_homeomorphism_from_hom(&d, &cells, &d, &images, 10).unwrap();
        assert_eq!(s.target_blocks, cells);
        assert!(s.invertible);
        s.verify(&d, &d, 10).unwrap();
        let degenerate = vec![DgElement::from_i64(1, &[2]), DgElement::from_i64(1, &[0])];
        let s = partition_homeomorphism_from_hom(&d, &cells, &d, &degenerate, 10).unwrap();
        assert!(!s.invertible);
        assert!(s.target_blocks[1].is_empty());
        s.verify(&d, &d, 10).unwrap();
    }

    #[test]
    fn bezout_examples() {
        let dy = DimGroup::new(&odometer(2));
        let h = bezout_lift(&ints(&[2]), &dy, None, 10).unwrap();
        assert_eq!(h.p, BigInt::from(2));
        assert_eq!(h.columns, vec![h.f0.clone()]);
        assert_eq!(dy.scale(&h.f0, &BigInt::from(2)), dy.unit(h.f0.level).unwrap());
        let h = bezout_lift(&ints(&[2, 4]), &dy, None, 10).unwrap();
        assert_eq!(h.bezout, ints(&[1, 0]));
        let h = bezout_lift(&ints(&[1]), &dy, None, 10).unwrap();
        assert_eq!(h.columns, vec![dy.unit(0).unwrap()]);
        let tri = DimGroup::new(&odometer(3));
        assert_eq!(
            bezout_lift(&ints(&[2]), &tri, None, 10).unwrap_err(),
            Error::Obstruction { stage: "bezout".into(), n: 2 }
        );
    }
}
