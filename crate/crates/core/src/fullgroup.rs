//! Cyclic permutations respecting block data, and elements of the
//! topological full group that conjugate the Vershik map onto a prescribed
//! block map.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::bratteli::{height_table, project_with, Cell, ClopenSet, OrderedBratteliDiagram, MAX_CELLS};
use crate::dimgroup::{Answer, DimGroup};
use crate::error::{Error, Result};

/// Largest number of blocks accepted by [`check_block_condition`].
pub const MAX_BLOCKS: usize = 20;

/// Partitions `P` and `Q` of `{1..n}` with `blocks[i]` sent to `images[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockBijection {
    n: usize,
    blocks: Vec<Vec<usize>>,
    images: Vec<Vec<usize>>,
}

impl BlockBijection {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>, images: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.len() != images.len() {
            return Err(Error::InvalidArgument(format!(
                "{} blocks but {} images",
                blocks.len(),
                images.len()
            )));
        }
        let check = |parts: &[Vec<usize>], what: &str| -> Result<()> {
            let mut seen = vec![false; n + 1];
            for part in parts {
                if part.is_empty() {
                    return Err(Error::InvalidArgument(format!("{what} contain an empty block")));
                }
                for &x in part {
                    if x == 0 || x > n || seen[x] {
                        return Err(Error::InvalidArgument(format!(
                            "{what} do not partition 1..={n} (element {x})"
                        )));
                    }
                    seen[x] = true;
                }
            }
            if seen[1..].iter().any(|s| !s) {
                return Err(Error::InvalidArgument(format!("{what} do not cover 1..={n}")));
            }
            Ok(())
        };
        check(&blocks, "blocks")?;
        check(&images, "images")?;
        if let Some(i) = (0..blocks.len()).find(|&i| blocks[i].len() != images[i].len()) {
            return Err(Error::InvalidArgument(format!(
                "block {i} has {} elements but its image has {}",
                blocks[i].len(),
                images[i].len()
            )));
        }
        let sorted = |v: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
            v.into_iter()
                .map(|mut b| {
                    b.sort_unstable();
                    b
                })
                .collect()
        };
        Ok(BlockBijection {
            n,
            blocks: sorted(blocks),
            images: sorted(images),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn images(&self) -> &[Vec<usize>] {
        &self.images
    }

    /// Symmetric difference of each block with its image, as bitsets.
    fn differences(&self) -> Vec<Vec<u64>> {
        let words = self.n / 64 + 1;
        (0..self.blocks.len())
            .map(|i| {
                let mut bits = vec![0u64; words];
                for &x in self.blocks[i].iter().chain(&self.images[i]) {
                    bits[x / 64] ^= 1 << (x % 64);
                }
                bits
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum BlockCondition {
    Ok,
    /// Indices of blocks whose union equals the union of their images.
    Violation { blocks: Vec<usize> },
}

/// Looks for a non-empty proper family of blocks whose union is invariant.
///
/// Unions of disjoint blocks are symmetric differences, so a family is
/// invariant exactly when the symmetric differences `U ^ pi(U)` over the
/// family cancel. Families are visited in lexicographic order of their
/// sorted index lists, so the reported violation is the least one.
pub fn check_block_condition(b: &BlockBijection) -> Result<BlockCondition> {
    let k = b.blocks.len();
    if k > MAX_BLOCKS {
        return Err(Error::Capability(format!("{k} blocks exceed the bound of {MAX_BLOCKS}")));
    }
    let diffs = b.differences();
    let mut stack: Vec<usize> = Vec::new();
    let mut acc = vec![vec![0u64; diffs.first().map_or(1, Vec::len)]];
    // Depth-first preorder over increasing index sequences.
    let mut next = 0;
    loop {
        if next < k {
            let mut x = acc.last().unwrap().clone();
            for (a, d) in x.iter_mut().zip(&diffs[next]) {
                *a ^= d;
            }
            stack.push(next);
            if stack.len() < k && x.iter().all(|&w| w == 0) {
                return Ok(BlockCondition::Violation { blocks: stack });
            }
            acc.push(x);
            next += 1;
        } else {
            let Some(last) = stack.pop() else {
                return Ok(BlockCondition::Ok);
            };
            acc.pop();
            next = last + 1;
        }
    }
}

/// Finds some invariant family by linear algebra over GF(2), with no bound
/// on the number of blocks.
fn find_invariant_family(b: &BlockBijection) -> Option<Vec<usize>> {
    let diffs = b.differences();
    let k = diffs.len();
    // Rows: (difference vector, set of contributing blocks).
    let mut basis: Vec<(Vec<u64>, Vec<bool>)> = Vec::new();
    for (i, d) in diffs.into_iter().enumerate() {
        let mut v = d;
        let mut combo = vec![false; k];
        combo[i] = true;
        for (bv, bc) in &basis {
            let lead = lead_bit(bv);
            if lead.is_some_and(|l| v[l / 64] >> (l % 64) & 1 == 1) {
                for (a, x) in v.iter_mut().zip(bv) {
                    *a ^= x;
                }
                for (a, x) in combo.iter_mut().zip(bc) {
                    *a ^= x;
                }
            }
        }
        if v.iter().all(|&w| w == 0) {
            let family: Vec<usize> = (0..k).filter(|&j| combo[j]).collect();
            // The full family is always invariant; only proper ones count.
            if family.len() < k {
                return Some(family);
            }
            continue;
        }
        basis.push((v, combo));
    }
    None
}

fn lead_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .rev()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
}

fn cycle_count(sigma: &[usize]) -> usize {
    let n = sigma.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if !seen[s] {
            count += 1;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = sigma[x] - 1;
            }
        }
    }
    count
}

/// A single `n`-cycle `sigma` (as `sigma[i-1] = sigma(i)`) with
/// `sigma(U) = pi(U)` for every block.
pub fn cyclic_from_blocks(b: &BlockBijection) -> Result<Vec<usize>> {
    let n = b.n;
    let mut sigma = vec![0usize; n];
    for (u, v) in b.blocks.iter().zip(&b.images) {
        for (&x, &y) in u.iter().zip(v) {
            sigma[x - 1] = y;
        }
    }
    let mut cycles = cycle_count(&sigma);
    while cycles > 1 {
        // The cycle through 1.
        let mut in_cycle = vec![false; n + 1];
        let mut x = 1;
        while !in_cycle[x] {
            in_cycle[x] = true;
            x = sigma[x - 1];
        }
        let found = b.blocks.iter().enumerate().find_map(|(idx, u)| {
            let i = u.iter().copied().find(|&e| in_cycle[e])?;
            let j = u.iter().copied().find(|&e| !in_cycle[e])?;
            Some((idx, i, j))
        });
        let Some((_, i, j)) = found else {
            let family: Vec<usize> = (0..b.blocks.len())
                .filter(|&idx| in_cycle[b.blocks[idx][0]])
                .collect();
            return Err(Error::Precondition(format!(
                "blocks {family:?} form an invariant union; no single cycle exists"
            )));
        };
        sigma.swap(i - 1, j - 1);
        let now = cycle_count(&sigma);
        assert!(now < cycles, "merging two cycles must reduce the cycle count");
        cycles = now;
    }
    Ok(sigma)
}

/// Powers `r(w, j)` for the floors `j = 1..=h(w)` of one tower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerPowers {
    pub w: usize,
    pub r: Vec<i64>,
}

/// `sigma(x) = alpha^{r(w,j)}(x)` on each cell `(w, j)` of one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullGroupElement {
    pub level: usize,
    pub towers: Vec<TowerPowers>,
}

impl FullGroupElement {
    pub fn identity(d: &OrderedBratteliDiagram, m: usize) -> Result<Self> {
        let h = d.small_heights(m)?;
        Ok(FullGroupElement {
            level: m,
            towers: h
                .iter()
                .enumerate()
                .map(|(w, &hw)| TowerPowers { w, r: vec![0; hw as usize] })
                .collect(),
        })
    }

    pub fn power(&self, w: usize, j: u64) -> Option<i64> {
        self.towers.get(w)?.r.get((j as usize).checked_sub(1)?).copied()
    }
}

/// Labels of the level-`m` cells by block index; checks the partition.
fn labels(d: &OrderedBratteliDiagram, m: usize, parts: &[ClopenSet], what: &str) -> Result<HashMap<Cell, usize>> {
    let full = ClopenSet::full(d, m)?;
    let mut map = HashMap::new();
    for (i, p) in parts.iter().enumerate() {
        if p.level() != m {
            return Err(Error::InvalidArgument(format!("{what} {i} is not at level {m}")));
        }
        if p.is_empty() {
            return Err(Error::InvalidArgument(format!("{what} {i} is empty")));
        }
        for c in p.iter() {
            if !full.contains(c) {
                return Err(Error::InvalidArgument(format!("{what} {i} contains a nonexistent cell {c:?}")));
            }
            if map.insert(*c, i).is_some() {
                return Err(Error::InvalidArgument(format!("{what} overlap at cell {c:?}")));
            }
        }
    }
    if map.len() != full.len() {
        return Err(Error::InvalidArgument(format!("{what} do not cover every level-{m} cell")));
    }
    Ok(map)
}

/// Why a refinement level was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
enum LevelRejection {
    MissingTower(usize),
    Counts(usize),
    Invariant { tower: usize, blocks: Vec<usize> },
}

/// Builds `sigma` in the full group with `sigma alpha sigma^{-1}(U) = pi(U)`
/// for each block `U = blocks[i]`, `pi(U) = images[i]`, both partitions of
/// the level-`m` cells.
pub fn conjugator_from_partition(
    d: &OrderedBratteliDiagram,
    m: usize,
    blocks: &[ClopenSet],
    images: &[ClopenSet],
    lookahead_bound: usize,
) -> Result<FullGroupElement> {
    if blocks.len() != images.len() {
        return Err(Error::InvalidArgument(format!(
            "{} blocks but {} images",
            blocks.len(),
            images.len()
        )));
    }
    let p_label = labels(d, m, blocks, "blocks")?;
    let q_label = labels(d, m, images, "images")?;
    let dg = DimGroup::new(d);
    for (i, (u, v)) in blocks.iter().zip(images).enumerate() {
        let cu = d.class_of_clopen(u)?;
        let cv = d.class_of_clopen(v)?;
        if dg.equal(&cu, &cv, 40)? != Answer::Yes {
            return Err(Error::Precondition(format!(
                "block {i} has class {:?} but its image has class {:?}",
                cu.vector, cv.vector
            )));
        }
    }
    let towers_m = d.vertex_count(m)?;
    let mut last_rejection = None;
    for top in m + 1..=lookahead_bound {
        let hs = height_table(d, top)?;
        let total: u64 = hs[top].iter().sum();
        if total > MAX_CELLS {
            break;
        }
        match per_tower_data(d, m, top, &hs, &p_label, &q_label, blocks.len(), towers_m)? {
            Ok(per_tower) => {
                let mut out = Vec::with_capacity(per_tower.len());
                for (w, (p, bij)) in per_tower.into_iter().enumerate() {
                    let sigma = cyclic_from_blocks(&bij)?;
                    let j_w = p.iter().position(|&b| b == 0).unwrap() + 1;
                    let h = p.len();
                    let mut r = Vec::with_capacity(h);
                    let mut x = j_w;
                    for j in 1..=h {
                        x = sigma[x - 1];
                        r.push(x as i64 - j as i64);
                    }
                    out.push(TowerPowers { w, r });
                }
                return Ok(FullGroupElement { level: top, towers: out });
            }
            Err(why) => last_rejection = Some((top, why)),
        }
    }
    Err(Error::Exhausted(match last_rejection {
        None => format!("no refinement level in ({m}, {lookahead_bound}] fits the cell budget"),
        Some((top, LevelRejection::MissingTower(w))) => {
            format!("up to level {top}: tower {w} misses some level-{m} cell")
        }
        Some((top, LevelRejection::Counts(w))) => {
            format!("up to level {top}: tower {w} holds different numbers of block and image cells")
        }
        Some((top, LevelRejection::Invariant { tower, blocks })) => {
            format!("up to level {top}: blocks {blocks:?} have an invariant union in tower {tower}")
        }
    }))
}

type TowerData = Vec<(Vec<usize>, BlockBijection)>;

#[allow(clippy::too_many_arguments)]
fn per_tower_data(
    d: &OrderedBratteliDiagram,
    m: usize,
    top: usize,
    hs: &[Vec<u64>],
    p_label: &HashMap<Cell, usize>,
    q_label: &HashMap<Cell, usize>,
    nblocks: usize,
    towers_m: usize,
) -> Result<std::result::Result<TowerData, LevelRejection>> {
    let mut out = Vec::new();
    for (w, &hw) in hs[top].iter().enumerate() {
        let present: BTreeSet<usize> = d.stack(m, top, w)?.into_iter().collect();
        if present.len() != towers_m {
            return Ok(Err(LevelRejection::MissingTower(w)));
        }
        let mut p = Vec::with_capacity(hw as usize);
        let mut blocks = vec![Vec::new(); nblocks];
        let mut images = vec![Vec::new(); nblocks];
        for j in 1..=hw {
            let c = project_with(d, hs, Cell::new(top, w, j), m)?;
            let (bp, bq) = (p_label[&c], q_label[&c]);
            p.push(bp);
            blocks[bp].push(j as usize);
            images[bq].push(j as usize);
        }
        if blocks.iter().zip(&images).any(|(u, v)| u.len() != v.len()) {
            return Ok(Err(LevelRejection::Counts(w)));
        }
        let bij = BlockBijection::new(hw as usize, blocks, images)?;
        if let Some(family) = find_invariant_family(&bij) {
            return Ok(Err(LevelRejection::Invariant { tower: w, blocks: family }));
        }
        out.push((p, bij));
    }
    Ok(Ok(out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ConjugatorCheck {
    /// Every level-`level` cell checked; `roof_cells` of them only at block level.
    Verified { level: usize, cells: usize, roof_cells: usize },
    Counterexample { block: usize, cell: Cell },
    Inconclusive { level: usize, unresolved: usize },
}

impl ConjugatorCheck {
    pub fn is_verified(&self) -> bool {
        matches!(self, ConjugatorCheck::Verified { .. })
    }
}

/// Exact check of `sigma alpha sigma^{-1}(U) = pi(U)` on the cells of level
/// `s.level + lookahead`.
pub fn verify_conjugator(
    d: &OrderedBratteliDiagram,
    s: &FullGroupElement,
    blocks: &[ClopenSet],
    images: &[ClopenSet],
    lookahead: usize,
) -> Result<ConjugatorCheck> {
    let m = blocks.first().map_or(0, ClopenSet::level);
    if s.level < m {
        return Err(Error::InvalidArgument(format!(
            "the element lives at level {} below the blocks (level {m})",
            s.level
        )));
    }
    let p_label = labels(d, m, blocks, "blocks")?;
    let q_label = labels(d, m, images, "images")?;
    let hs_s = d.small_heights(s.level)?;
    if s.towers.len() != hs_s.len()
        || s.towers.iter().enumerate().any(|(w, t)| t.w != w || t.r.len() as u64 != hs_s[w])
    {
        return Err(Error::InvalidArgument("power table does not match the tower heights".into()));
    }
    let top = s.level + lookahead;
    let hs = height_table(d, top)?;
    let heights = &hs[top];
    let total: u64 = heights.iter().sum();
    if total > MAX_CELLS {
        return Err(Error::Capability(format!("{total} cells at level {top} exceed the enumeration bound")));
    }
    let mut offset = vec![0usize; heights.len() + 1];
    for (w, &h) in heights.iter().enumerate() {
        offset[w + 1] = offset[w] + h as usize;
    }
    let n = offset[heights.len()];
    let cell_at = |i: usize| -> Cell {
        let w = offset.partition_point(|&o| o <= i) - 1;
        Cell::new(top, w, (i - offset[w] + 1) as u64)
    };
    let index = |c: Cell| offset[c.tower] + c.floor as usize - 1;

    let mut p_fine = vec![0usize; n];
    let mut q_fine = vec![0usize; n];
    let mut sigma: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let c = cell_at(i);
        let coarse = project_with(d, &hs, c, m)?;
        p_fine[i] = p_label[&coarse];
        q_fine[i] = q_label[&coarse];
        let at_s = project_with(d, &hs, c, s.level)?;
        let r = s.power(at_s.tower, at_s.floor).unwrap();
        let target = c.floor as i64 + r;
        if target >= 1 && target <= heights[c.tower] as i64 {
            sigma[i] = Some(index(Cell::new(top, c.tower, target as u64)));
        }
    }
    let mut inverse: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if let Some(t) = sigma[i] {
            if inverse[t].is_some() {
                return Ok(ConjugatorCheck::Counterexample { block: p_fine[i], cell: cell_at(i) });
            }
            inverse[t] = Some(i);
        }
    }
    let unresolved = sigma.iter().filter(|s| s.is_none()).count();
    if unresolved > 0 {
        return Ok(ConjugatorCheck::Inconclusive { level: top, unresolved });
    }
    let base_labels: BTreeSet<usize> = (0..heights.len())
        .map(|w| q_fine[sigma[offset[w]].unwrap()])
        .collect();
    let mut roof_cells = 0;
    let mut unresolved = 0;
    for c in 0..n {
        let x = inverse[c].expect("an injective self-map of a finite set is onto");
        let xc = cell_at(x);
        if xc.floor < heights[xc.tower] {
            let z = sigma[x + 1].unwrap();
            if q_fine[z] != p_fine[c] {
                return Ok(ConjugatorCheck::Counterexample { block: p_fine[c], cell: cell_at(c) });
            }
        } else {
            roof_cells += 1;
            if !base_labels.contains(&p_fine[c]) {
                return Ok(ConjugatorCheck::Counterexample { block: p_fine[c], cell: cell_at(c) });
            }
            if base_labels.len() > 1 {
                unresolved += 1;
            }
        }
    }
    if unresolved > 0 {
        return Ok(ConjugatorCheck::Inconclusive { level: top, unresolved });
    }
    Ok(ConjugatorCheck::Verified { level: top, cells: n, roof_cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bij(n: usize, p: &[&[usize]], q: &[&[usize]]) -> BlockBijection {
        BlockBijection::new(
            n,
            p.iter().map(|b| b.to_vec()).collect(),
            q.iter().map(|b| b.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn block_condition_examples() {
        let swap = bij(4, &[&[1, 2], &[3, 4]], &[&[3, 4], &[1, 2]]);
        assert_eq!(check_block_condition(&swap).unwrap(), BlockCondition::Ok);
        let fixed = bij(4, &[&[1, 2], &[3, 4]], &[&[1, 2], &[3, 4]]);
        assert_eq!(
            check_block_condition(&fixed).unwrap(),
            BlockCondition::Violation { blocks: vec![0] }
        );
        let single = bij(3, &[&[1, 2, 3]], &[&[1, 2, 3]]);
        assert_eq!(check_block_condition(&single).unwrap(), BlockCondition::Ok);
        assert_eq!(find_invariant_family(&swap), None);
        assert!(find_invariant_family(&fixed).is_some());
    }

    #[test]
    fn cyclic_examples() {
        let swap = bij(4, &[&[1, 2], &[3, 4]], &[&[3, 4], &[1, 2]]);
        // Initial assignment 1->3, 2->4, 3->1, 4->2; merging through block {1,2}
        // swaps the images of 1 and 2, giving the cycle (1 4 2 3).
        assert_eq!(cyclic_from_blocks(&swap).unwrap(), vec![4, 3, 1, 2]);
        assert_eq!(cyclic_from_blocks(&bij(2, &[&[1], &[2]], &[&[2], &[1]])).unwrap(), vec![2, 1]);
        assert_eq!(cyclic_from_blocks(&bij(1, &[&[1]], &[&[1]])).unwrap(), vec![1]);
        let fixed = bij(4, &[&[1, 2], &[3, 4]], &[&[1, 2], &[3, 4]]);
        assert!(cyclic_from_blocks(&fixed).is_err());
    }

    #[test]
    fn malformed_block_data() {
        assert!(BlockBijection::new(3, vec![vec![1, 2]], vec![vec![1, 2]]).is_err());
        assert!(BlockBijection::new(2, vec![vec![1], vec![2]], vec![vec![1, 2], vec![]]).is_err());
    }

    fn floors(d: &OrderedBratteliDiagram, m: usize, tower: usize, f: &[u64]) -> ClopenSet {
        ClopenSet::from_floors(d, m, tower, f).unwrap()
    }

    #[test]
    fn dyadic_conjugators() {
        let d = OrderedBratteliDiagram::stationary_from_lists(vec![vec![0, 0]], 2).unwrap();
        let blocks = vec![floors(&d, 2, 0, &[1, 2]), floors(&d, 2, 0, &[3, 4])];
        let images = vec![floors(&d, 2, 0, &[2, 3]), floors(&d, 2, 0, &[4, 1])];
        let id = FullGroupElement::identity(&d, 2).unwrap();
        assert!(verify_conjugator(&d, &id, &blocks, &images, 2).unwrap().is_verified());
        let s = conjugator_from_partition(&d, 2, &blocks, &images, 6).unwrap();
        assert!(verify_conjugator(&d, &s, &blocks, &images, 2).unwrap().is_verified());

        let blocks = vec![floors(&d, 1, 0, &[1]), floors(&d, 1, 0, &[2])];
        let fixed = vec![floors(&d, 1, 0, &[1]), floors(&d, 1, 0, &[2])];
        // Every block would be invariant under a minimal map: impossible.
        assert!(matches!(
            conjugator_from_partition(&d, 1, &blocks, &fixed, 6),
            Err(Error::Exhausted(_))
        ));
        let images = vec![floors(&d, 1, 0, &[2]), floors(&d, 1, 0, &[1])];
        let s = conjugator_from_partition(&d, 1, &blocks, &images, 6).unwrap();
        assert!(verify_conjugator(&d, &s, &blocks, &images, 2).unwrap().is_verified());
        for w in 0..s.towers.len() {
            for j in 0..s.towers[w].r.len() {
                let mut bad = s.clone();
                bad.towers[w].r[j] += 1;
                let check = verify_conjugator(&d, &bad, &blocks, &images, 2).unwrap();
                assert!(matches!(check, ConjugatorCheck::Counterexample { .. }), "{check:?}");
            }
        }
    }

    #[test]
    fn unequal_classes_are_rejected() {
        let d = OrderedBratteliDiagram::stationary_from_lists(vec![vec![0, 0]], 2).unwrap();
        let blocks = vec![floors(&d, 2, 0, &[1]), floors(&d, 2, 0, &[2, 3, 4])];
        let images = vec![floors(&d, 2, 0, &[1, 2, 3]), floors(&d, 2, 0, &[4])];
        assert!(matches!(
            conjugator_from_partition(&d, 2, &blocks, &images, 6),
            Err(Error::Precondition(_))
        ));
    }
}
