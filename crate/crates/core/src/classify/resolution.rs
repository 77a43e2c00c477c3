//! Conjugating the transported first system inside the full group of the
//! second, at a fixed partition resolution.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::lift::{partition_homeomorphism_from_hom, PartitionHomeomorphism};
use super::morphism::{build_k0_morphism, build_positive_k0_morphism, K0Morphism};
use super::{decide_weak, Bounds, WeakVerdict};
use crate::bratteli::{ClopenSet, OrderedBratteliDiagram};
use crate::dimgroup::{DgElement, DimGroup};
use crate::error::{Error, Result};
use crate::fullgroup::{conjugator_from_partition, verify_conjugator, ConjugatorCheck, FullGroupElement};

/// Lookahead used when re-checking the corrector.
pub const VERIFY_LOOKAHEAD: usize = 2;

/// Output of [`conjugate_at_resolution`].
///
/// `blocks[i]` and `images[i]` are the transported partition pair on the
/// second system: level-`m` single non-roof cells of the first system, then
/// the union of its roofs; images are the next cells and the union of bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub level: usize,
    pub morphism: K0Morphism,
    pub sigma: PartitionHomeomorphism,
    pub blocks: Vec<ClopenSet>,
    pub images: Vec<ClopenSet>,
    pub corrector: FullGroupElement,
    pub report: ConjugatorCheck,
}

fn union_all(level: usize, sets: impl IntoIterator<Item = ClopenSet>) -> Result<ClopenSet> {
    sets.into_iter().try_fold(ClopenSet::empty(level), |acc, s| acc.union(&s))
}

/// The partition pair on the second system induced by `sigma` from the
/// level-`m` cells of the first (see [`Resolution`]).
fn transport(da: &OrderedBratteliDiagram, m: usize, sigma: &PartitionHomeomorphism) -> Result<(Vec<ClopenSet>, Vec<ClopenSet>)> {
    let heights = da.small_heights(m)?;
    let level = sigma.target_level;
    let mut index = Vec::new();
    for (w, &hw) in heights.iter().enumerate() {
        index.extend((1..=hw).map(|j| (w, j)));
    }
    if sigma.source_level != m || sigma.source_blocks.len() != index.len() {
        return Err(Error::Certificate("partition map is not on the level-m cells".into()));
    }
    for (b, &(w, j)) in sigma.source_blocks.iter().zip(&index) {
        if *b != ClopenSet::from_floors(da, m, w, &[j])? {
            return Err(Error::Certificate(format!("source block for cell ({w}, {j}) is not that cell")));
        }
    }
    let target = |w: usize, j: u64| sigma.target_blocks[index.iter().position(|&c| c == (w, j)).unwrap()].clone();
    let mut blocks = Vec::new();
    let mut images = Vec::new();
    for (w, &hw) in heights.iter().enumerate() {
        for j in 1..hw {
            blocks.push(target(w, j));
            images.push(target(w, j + 1));
        }
    }
    blocks.push(union_all(level, heights.iter().enumerate().map(|(w, &hw)| target(w, hw)))?);
    images.push(union_all(level, heights.iter().enumerate().map(|(w, _)| target(w, 1)))?);
    Ok((blocks, images))
}

/// Independent re-check of a [`Resolution`]: the morphism, the partition
/// map and its classes, the transported pair, and the corrector.
pub fn verify_resolution(da: &OrderedBratteliDiagram, db: &OrderedBratteliDiagram, r: &Resolution, depth: usize) -> Result<()> {
    let (a, b) = (DimGroup::new(da), DimGroup::new(db));
    r.morphism.verify(&a, &b)?;
    if r.morphism.a_level != r.level {
        return Err(Error::Certificate("morphism starts at the wrong level".into()));
    }
    r.sigma.verify(da, db, depth)?;
    if !r.sigma.invertible {
        return Err(Error::Certificate("partition map is not invertible".into()));
    }
    let heights = da.small_heights(r.level)?;
    let mut i = 0;
    for (w, &hw) in heights.iter().enumerate() {
        let col: Vec<_> = (0..r.morphism.matrix.rows()).map(|k| r.morphism.matrix.get(k, w).clone()).collect();
        let want = DgElement::new(r.morphism.b_level, col);
        for _ in 0..hw {
            if b.equal(&r.sigma.target_classes[i], &want, depth)? != crate::dimgroup::Answer::Yes {
                return Err(Error::Certificate(format!("target class {i} is not the morphism column")));
            }
            i += 1;
        }
    }
    let (blocks, images) = transport(da, r.level, &r.sigma)?;
    if blocks != r.blocks || images != r.images {
        return Err(Error::Certificate("transported partition pair does not match".into()));
    }
    let report = verify_conjugator(db, &r.corrector, &blocks, &images, VERIFY_LOOKAHEAD)?;
    if !report.is_verified() {
        return Err(Error::Certificate(format!("corrector fails: {report:?}")));
    }
    Ok(())
}

/// Transports the level-`m` partition of `da` to `db` along a unital
/// positive map and builds a full-group element `gamma` of `db` with
/// `gamma beta gamma^{-1}` agreeing with the transported dynamics on every
/// block.
pub fn conjugate_at_resolution(
    da: &OrderedBratteliDiagram,
    db: &OrderedBratteliDiagram,
    m: usize,
    bounds: &Bounds,
) -> Result<Resolution> {
    let (a, b) = (DimGroup::new(da), DimGroup::new(db));
    if let WeakVerdict::Not { n, .. } = decide_weak(&a, &b, bounds)? {
        return Err(Error::Obstruction { stage: "morphism".into(), n });
    }
    // Prefer the plain morphism; an empty transported block would break the
    // conjugator, so fall back to strictly positive entries if a column is zero.
    let mut t = build_k0_morphism(&a, m, &b, 1, bounds.depth)?;
    if (0..t.matrix.cols()).any(|j| (0..t.matrix.rows()).all(|i| t.matrix.get(i, j).is_zero())) {
        t = build_positive_k0_morphism(&a, m, &b, 1, bounds.depth)?;
    }
    let heights = da.small_heights(m)?;
    let mut cells = Vec::new();
    let mut classes = Vec::new();
    for (w, &hw) in heights.iter().enumerate() {
        let col: Vec<_> = (0..t.matrix.rows()).map(|i| t.matrix.get(i, w).clone()).collect();
        for j in 1..=hw {
            cells.push((w, j));
            classes.push(DgElement::new(t.b_level, col.clone()));
        }
    }
    let singles: Vec<ClopenSet> = cells
        .iter()
        .map(|&(w, j)| ClopenSet::from_floors(da, m, w, &[j]))
        .collect::<Result<_>>()?;
    let sigma = partition_homeomorphism_from_hom(da, &singles, db, &classes, bounds.depth)?;
    let (blocks, images) = transport(da, m, &sigma)?;
    let level = sigma.target_level;
    let corrector = conjugator_from_partition(db, level, &blocks, &images, level + bounds.max_level)?;
    let report = verify_conjugator(db, &corrector, &blocks, &images, VERIFY_LOOKAHEAD)?;
    Ok(Resolution { level: m, morphism: t, sigma, blocks, images, corrector, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odometer(k: usize) -> OrderedBratteliDiagram {
        OrderedBratteliDiagram::stationary_from_lists(vec![vec![0; k]], k).unwrap()
    }

    #[test]
    fn self_conjugacy() {
        let d = odometer(2);
        let r = conjugate_at_resolution(&d, &d, 2, &Bounds::default()).unwrap();
        assert!(r.report.is_verified());
        assert_eq!(r.sigma.source_blocks, r.sigma.target_blocks);
    }

    #[test]
    fn dyadic_to_quaternary() {
        let r = conjugate_at_resolution(&odometer(2), &odometer(4), 2, &Bounds::default()).unwrap();
        assert!(r.report.is_verified());
        verify_resolution(&odometer(2), &odometer(4), &r, 20).unwrap();
        let mut bad = r.clone();
        bad.corrector.towers[0].r[0] += 1;
        assert!(verify_resolution(&odometer(2), &odometer(4), &bad, 20).is_err());
    }

    #[test]
    fn dyadic_to_triadic_is_obstructed() {
        let err = conjugate_at_resolution(&odometer(2), &odometer(3), 2, &Bounds::default()).unwrap_err();
        assert_eq!(err, Error::Obstruction { stage: "morphism".into(), n: 2 });
    }
}
