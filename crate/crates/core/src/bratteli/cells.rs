//! Kakutani–Rohlin cells and clopen sets built from them.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::OrderedBratteliDiagram;
use crate::dimgroup::DgElement;
use crate::error::{Error, Result};

/// Upper bound on the number of cells any single operation will enumerate.
pub const MAX_CELLS: u64 = 1 << 22;

/// Floor `floor` (1-based) of tower `tower` at level `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub level: usize,
    pub tower: usize,
    pub floor: u64,
}

impl Cell {
    pub fn new(level: usize, tower: usize, floor: u64) -> Self {
        Cell { level, tower, floor }
    }
}

/// A finite union of cells of one level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClopenSet {
    level: usize,
    cells: BTreeSet<Cell>,
}

impl ClopenSet {
    pub fn new(level: usize, cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let cells: BTreeSet<Cell> = cells.into_iter().collect();
        if let Some(c) = cells.iter().find(|c| c.level != level) {
            return Err(Error::InvalidArgument(format!(
                "cell {c:?} does not lie at level {level}"
            )));
        }
        Ok(ClopenSet { level, cells })
    }

    pub fn empty(level: usize) -> Self {
        ClopenSet { level, cells: BTreeSet::new() }
    }

    /// Every cell at level `m`.
    pub fn full(d: &OrderedBratteliDiagram, m: usize) -> Result<Self> {
        let h = d.small_heights(m)?;
        check_cell_budget(&h, m)?;
        let cells = h
            .iter()
            .enumerate()
            .flat_map(|(v, &hv)| (1..=hv).map(move |k| Cell::new(m, v, k)))
            .collect();
        Ok(ClopenSet { level: m, cells })
    }

    /// Cells of the given floors in every tower where they exist.
    pub fn from_floors(d: &OrderedBratteliDiagram, m: usize, tower: usize, floors: &[u64]) -> Result<Self> {
        let h = d.small_heights(m)?;
        let hv = *h
            .get(tower)
            .ok_or_else(|| Error::InvalidArgument(format!("no tower {tower} at level {m}")))?;
        let mut cells = BTreeSet::new();
        for &k in floors {
            if k == 0 || k > hv {
                return Err(Error::InvalidArgument(format!("tower {tower} at level {m} has no floor {k}")));
            }
            cells.insert(Cell::new(m, tower, k));
        }
        Ok(ClopenSet { level: m, cells })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn cells(&self) -> &BTreeSet<Cell> {
        &self.cells
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: &Cell) -> bool {
        self.cells.contains(c)
    }

    fn same_level(&self, other: &ClopenSet) -> Result<()> {
        if self.level != other.level {
            return Err(Error::InvalidArgument(format!(
                "clopen sets at levels {} and {} must be refined to a common level first",
                self.level, other.level
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.same_level(other)?;
        Ok(ClopenSet {
            level: self.level,
            cells: self.cells.union(&other.cells).copied().collect(),
        })
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.same_level(other)?;
        Ok(ClopenSet {
            level: self.level,
            cells: self.cells.difference(&other.cells).copied().collect(),
        })
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> Result<bool> {
        self.same_level(other)?;
        Ok(self.cells.is_disjoint(&other.cells))
    }

    /// The same set described by level-`m` cells (`m >= self.level`).
    pub fn refine(&self, d: &OrderedBratteliDiagram, m: usize) -> Result<ClopenSet> {
        if m < self.level {
            return Err(Error::InvalidArgument(format!(
                "cannot refine a level-{} set to level {m}",
                self.level
            )));
        }
        if m == self.level {
            return Ok(self.clone());
        }
        let hs = height_table(d, m)?;
        check_cell_budget(&hs[m], m)?;
        let mut cells = BTreeSet::new();
        for (w, &hw) in hs[m].iter().enumerate() {
            for k in 1..=hw {
                let c = Cell::new(m, w, k);
                if self.cells.contains(&project_with(d, &hs, c, self.level)?) {
                    cells.insert(c);
                }
            }
        }
        Ok(ClopenSet { level: m, cells })
    }

    /// Number of cells in each tower: the class of the indicator function.
    pub fn counting_vector(&self, d: &OrderedBratteliDiagram) -> Result<Vec<BigInt>> {
        let mut v = vec![BigInt::from(0); d.vertex_count(self.level)?];
        for c in &self.cells {
            v[c.tower] += 1;
        }
        Ok(v)
    }
}

fn check_cell_budget(h: &[u64], m: usize) -> Result<()> {
    let total: u64 = h.iter().fold(0u64, |a, &b| a.saturating_add(b));
    if total > MAX_CELLS {
        return Err(Error::Capability(format!("{total} cells at level {m} exceed the enumeration bound")));
    }
    Ok(())
}

/// Heights at levels `0..=top` as machine integers.
pub fn height_table(d: &OrderedBratteliDiagram, top: usize) -> Result<Vec<Vec<u64>>> {
    d.check_level(top)?;
    let mut out = vec![vec![1u64]];
    for n in 0..top {
        let t = d.table(n)?;
        let prev = &out[n];
        let next = t
            .lists()
            .iter()
            .map(|l| {
                l.iter().try_fold(0u64, |a, &s| a.checked_add(prev[s]))
                    .ok_or_else(|| Error::Capability(format!("tower height at level {} exceeds 64 bits", n + 1)))
            })
            .collect::<Result<Vec<u64>>>()?;
        out.push(next);
    }
    Ok(out)
}

/// The level-`m` cell containing `c` (`m <= c.level`).
pub fn project(d: &OrderedBratteliDiagram, c: Cell, m: usize) -> Result<Cell> {
    let hs = height_table(d, c.level)?;
    project_with(d, &hs, c, m)
}

/// [`project`] with precomputed heights (`hs[n]` = heights at level `n`).
pub fn project_with(d: &OrderedBratteliDiagram, hs: &[Vec<u64>], c: Cell, m: usize) -> Result<Cell> {
    if m > c.level {
        return Err(Error::InvalidArgument(format!("cannot project a level-{} cell to level {m}", c.level)));
    }
    let mut tower = c.tower;
    let mut rest = c.floor - 1;
    for n in (m + 1..=c.level).rev() {
        let list = d.table(n - 1)?.sources_of(tower);
        let mut found = None;
        for &s in list {
            if rest < hs[n - 1][s] {
                found = Some(s);
                break;
            }
            rest -= hs[n - 1][s];
        }
        tower = found.ok_or_else(|| Error::InvalidArgument(format!("cell {c:?} does not exist")))?;
    }
    Ok(Cell::new(m, tower, rest + 1))
}

/// Level-`m` towers stacked (bottom to top) inside tower `w` of level `top`.
pub fn stack(d: &OrderedBratteliDiagram, m: usize, top: usize, w: usize) -> Result<Vec<usize>> {
    let mut seq = vec![w];
    for n in (m + 1..=top).rev() {
        let t = d.table(n - 1)?;
        seq = seq.iter().flat_map(|&v| t.sources_of(v).iter().copied()).collect();
    }
    Ok(seq)
}

/// The Vershik map seen through two levels of the tower structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerMap {
    pub level: usize,
    pub lookahead: usize,
    /// Successor of every level-`lookahead` cell; `None` on the roofs, where
    /// the image depends on edges above the lookahead level.
    pub fine: BTreeMap<Cell, Option<Cell>>,
    /// For each level-`level` cell, the level-`level` cells receiving the
    /// images of its resolved refinements.
    pub coarse: BTreeMap<Cell, BTreeSet<Cell>>,
    /// Level-`lookahead` roof cells whose image stays unresolved.
    pub unresolved: Vec<Cell>,
}

impl TowerMap {
    pub fn new(d: &OrderedBratteliDiagram, m: usize, lookahead: usize) -> Result<Self> {
        if lookahead <= m {
            return Err(Error::InvalidArgument(format!(
                "lookahead level {lookahead} must exceed level {m}"
            )));
        }
        let hs = height_table(d, lookahead)?;
        let hf = &hs[lookahead];
        check_cell_budget(hf, lookahead)?;
        let mut fine = BTreeMap::new();
        let mut coarse: BTreeMap<Cell, BTreeSet<Cell>> = BTreeMap::new();
        let mut unresolved = Vec::new();
        for (w, &hw) in hf.iter().enumerate() {
            for k in 1..=hw {
                let c = Cell::new(lookahead, w, k);
                let below = project_with(d, &hs, c, m)?;
                let entry = coarse.entry(below).or_default();
                if k < hw {
                    let next = Cell::new(lookahead, w, k + 1);
                    fine.insert(c, Some(next));
                    entry.insert(project_with(d, &hs, next, m)?);
                } else {
                    fine.insert(c, None);
                    unresolved.push(c);
                }
            }
        }
        Ok(TowerMap { level: m, lookahead, fine, coarse, unresolved })
    }
}

impl OrderedBratteliDiagram {
    /// Successor map on level-`lookahead` cells and its projection to level `m`.
    pub fn tower_map(&self, m: usize, lookahead: usize) -> Result<TowerMap> {
        TowerMap::new(self, m, lookahead)
    }

    /// The class of the indicator function of `u` in the dimension group.
    pub fn class_of_clopen(&self, u: &ClopenSet) -> Result<DgElement> {
        Ok(DgElement::new(u.level(), u.counting_vector(self)?))
    }

    /// The level-`m` cell containing `c`.
    pub fn project(&self, c: Cell, m: usize) -> Result<Cell> {
        project(self, c, m)
    }

    /// Level-`m` towers stacked inside tower `w` of level `top`, bottom first.
    pub fn stack(&self, m: usize, top: usize, w: usize) -> Result<Vec<usize>> {
        stack(self, m, top, w)
    }

    /// Roof cells (top floors) at level `m`.
    pub fn roofs(&self, m: usize) -> Result<ClopenSet> {
        let h = self.small_heights(m)?;
        ClopenSet::new(m, h.iter().enumerate().map(|(v, &hv)| Cell::new(m, v, hv)))
    }

    /// Base cells (floor 1) at level `m`.
    pub fn bases(&self, m: usize) -> Result<ClopenSet> {
        let n = self.vertex_count(m)?;
        ClopenSet::new(m, (0..n).map(|v| Cell::new(m, v, 1)))
    }
}
