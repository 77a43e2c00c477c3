//! Ordered Bratteli diagrams and the Vershik (adic) map on finite paths.
//!
//! Conventions used throughout the crate:
//!
//! * Level 0 holds the single root vertex.
//! * Each non-root vertex carries an ordered list of source vertices one
//!   level down. Repetition encodes multiplicity, list position encodes the
//!   edge order.
//! * Paths are compared lexicographically with the edge nearest the root as
//!   the least significant digit. On the one-vertex diagram with two edges
//!   per level the Vershik successor is binary increment with carry.
//! * Floors of a tower are 1-indexed: floor `k` of tower `v` is the `k`-th
//!   root-to-`v` path in that order.
//!
//! Reversing the edge order throughout gives the inverse map; the resulting
//! systems are conjugate, so nothing below depends on the choice.

mod cells;
mod format;

pub use cells::{height_table, project_with, Cell, ClopenSet, TowerMap, MAX_CELLS};
pub use format::{parse_diagram, serialize_diagram, system_digest};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramKind {
    Stationary,
    Explicit,
}

/// Edges between two consecutive levels, grouped by target vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeTable {
    sources: Vec<Vec<usize>>,
}

impl EdgeTable {
    pub fn new(sources: Vec<Vec<usize>>) -> Self {
        EdgeTable { sources }
    }

    pub fn targets(&self) -> usize {
        self.sources.len()
    }

    pub fn sources_of(&self, v: usize) -> &[usize] {
        &self.sources[v]
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.sources
    }

    /// Incidence matrix with rows indexed by targets and columns by sources.
    pub fn incidence(&self, source_count: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.targets(), source_count);
        for (v, list) in self.sources.iter().enumerate() {
            for &s in list {
                let x = m.get(v, s) + 1;
                m.set(v, s, x);
            }
        }
        m
    }

    fn check(&self, source_count: usize, what: &str) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Structure(format!("{what}: no target vertices")));
        }
        let mut has_out = vec![false; source_count];
        for (v, list) in self.sources.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::Structure(format!("{what}: vertex {v} has an empty edge list")));
            }
            for &s in list {
                if s >= source_count {
                    return Err(Error::Structure(format!(
                        "{what}: vertex {v} references source {s}, but the level below has {source_count} vertices"
                    )));
                }
                has_out[s] = true;
            }
        }
        if let Some(s) = has_out.iter().position(|&b| !b) {
            return Err(Error::Structure(format!("{what}: source vertex {s} has no outgoing edge")));
        }
        Ok(())
    }
}

/// A finite-path presentation of a Cantor minimal system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedBratteliDiagram {
    kind: DiagramKind,
    root: EdgeTable,
    tables: Vec<EdgeTable>,
}

/// A root-to-level-`m` path: the vertex visited at every level and the
/// position of each edge in its target's source list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

impl Path {
    pub fn level(&self) -> usize {
        self.edges.len()
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Edge positions, root edge first.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn truncate(&self, m: usize) -> Path {
        Path {
            vertices: self.vertices[..=m].to_vec(),
            edges: self.edges[..m].to_vec(),
        }
    }
}

/// Result of the Vershik map on a finite path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Successor {
    Next(Path),
    /// Every edge is maximal; the successor depends on edges above the level.
    MaxPath,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predecessor {
    Prev(Path),
    MinPath,
}

/// Outcome of one structural check in [`OrderedBratteliDiagram::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub passed: bool,
    /// True when the verdict holds for the infinite diagram, not only up to the depth.
    pub exact: bool,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A telescoped incidence matrix of this many steps is strictly positive.
    PositivePower { power: usize },
    /// This entry stays zero in every product up to `power` steps.
    ZeroEntry { power: usize, row: usize, col: usize },
    /// Cycles of the maximal-edge and minimal-edge source maps.
    ExtremeCycles {
        max_cycles: Vec<Vec<usize>>,
        min_cycles: Vec<Vec<usize>>,
    },
    /// Level-1 vertices still reachable by all-max / all-min backward walks.
    SurvivingVertices { max: Vec<usize>, min: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub depth: usize,
    pub primitive: CheckResult,
    pub properly_ordered: CheckResult,
}

impl OrderedBratteliDiagram {
    pub fn stationary(root: EdgeTable, table: EdgeTable) -> Result<Self> {
        root.check(1, "root table")?;
        table.check(root.targets(), "stationary table")?;
        if table.targets() != root.targets() {
            return Err(Error::Structure(format!(
                "stationary table has {} targets but level 1 has {} vertices",
                table.targets(),
                root.targets()
            )));
        }
        Ok(OrderedBratteliDiagram {
            kind: DiagramKind::Stationary,
            root,
            tables: vec![table],
        })
    }

    pub fn explicit(root: EdgeTable, tables: Vec<EdgeTable>) -> Result<Self> {
        root.check(1, "root table")?;
        let mut below = root.targets();
        for (i, t) in tables.iter().enumerate() {
            t.check(below, &format!("table {}->{}", i + 1, i + 2))?;
            below = t.targets();
        }
        Ok(OrderedBratteliDiagram {
            kind: DiagramKind::Explicit,
            root,
            tables,
        })
    }

    /// Stationary diagram from a source table where level 1 receives one root
    /// edge per vertex.
    pub fn stationary_from_lists(lists: Vec<Vec<usize>>, root_multiplicity: usize) -> Result<Self> {
        let root = EdgeTable::new(vec![vec![0; root_multiplicity]; lists.len()]);
        Self::stationary(root, EdgeTable::new(lists))
    }

    pub fn kind(&self) -> DiagramKind {
        self.kind
    }

    pub fn is_stationary(&self) -> bool {
        self.kind == DiagramKind::Stationary
    }

    pub fn root_table(&self) -> &EdgeTable {
        &self.root
    }

    pub fn tables(&self) -> &[EdgeTable] {
        &self.tables
    }

    /// Deepest available level; `None` when unbounded (stationary).
    pub fn last_level(&self) -> Option<usize> {
        match self.kind {
            DiagramKind::Stationary => None,
            DiagramKind::Explicit => Some(self.tables.len() + 1),
        }
    }

    pub fn check_level(&self, m: usize) -> Result<()> {
        match self.last_level() {
            Some(last) if m > last => Err(Error::LevelOutOfRange { level: m, last }),
            _ => Ok(()),
        }
    }

    /// The table of edges from level `n` to level `n + 1`.
    pub fn table(&self, n: usize) -> Result<&EdgeTable> {
        self.check_level(n + 1)?;
        Ok(match (n, self.kind) {
            (0, _) => &self.root,
            (_, DiagramKind::Stationary) => &self.tables[0],
            (_, DiagramKind::Explicit) => &self.tables[n - 1],
        })
    }

    pub fn vertex_count(&self, level: usize) -> Result<usize> {
        if level == 0 {
            return Ok(1);
        }
        Ok(self.table(level - 1)?.targets())
    }

    /// Incidence matrix of the transition `n -> n+1` (rows `V_{n+1}`, columns `V_n`).
    pub fn incidence(&self, n: usize) -> Result<IntMatrix> {
        Ok(self.table(n)?.incidence(self.vertex_count(n)?))
    }

    /// The matrix reused at every level >= 1 of a stationary diagram.
    pub fn stationary_matrix(&self) -> Option<IntMatrix> {
        self.is_stationary()
            .then(|| self.tables[0].incidence(self.root.targets()))
    }

    /// Tower heights `h(v)` for `v` in `V_m`.
    pub fn heights(&self, m: usize) -> Result<Vec<BigInt>> {
        self.check_level(m)?;
        let mut h = vec![BigInt::one()];
        for n in 0..m {
            let t = self.table(n)?;
            h = t
                .lists()
                .iter()
                .map(|list| list.iter().map(|&s| h[s].clone()).sum())
                .collect();
        }
        Ok(h)
    }

    /// Heights that fit in a `u64`, for cell-level work.
    pub fn small_heights(&self, m: usize) -> Result<Vec<u64>> {
        self.heights(m)?
            .iter()
            .map(|h| {
                h.to_u64()
                    .ok_or_else(|| Error::Capability(format!("tower height at level {m} exceeds 64 bits")))
            })
            .collect()
    }

    /// Builds the path ending at `end` (level `positions.len()`) whose edges
    /// have the given positions, root edge first.
    pub fn path(&self, end: usize, positions: &[usize]) -> Result<Path> {
        let m = positions.len();
        self.check_level(m)?;
        if end >= self.vertex_count(m)? {
            return Err(Error::InvalidArgument(format!("vertex {end} does not exist at level {m}")));
        }
        let mut vertices = vec![0; m + 1];
        vertices[m] = end;
        for n in (1..=m).rev() {
            let list = self.table(n - 1)?.sources_of(vertices[n]);
            let pos = positions[n - 1];
            if pos >= list.len() {
                return Err(Error::InvalidArgument(format!(
                    "edge position {pos} out of range at level {n} (vertex {} has {} edges)",
                    vertices[n],
                    list.len()
                )));
            }
            vertices[n - 1] = list[pos];
        }
        Ok(Path {
            vertices,
            edges: positions.to_vec(),
        })
    }

    fn extreme_path(&self, end: usize, m: usize, max: bool) -> Result<Path> {
        let mut vertices = vec![0; m + 1];
        let mut edges = vec![0; m];
        vertices[m] = end;
        for n in (1..=m).rev() {
            let list = self.table(n - 1)?.sources_of(vertices[n]);
            let pos = if max { list.len() - 1 } else { 0 };
            edges[n - 1] = pos;
            vertices[n - 1] = list[pos];
        }
        Ok(Path { vertices, edges })
    }

    pub fn min_path(&self, end: usize, m: usize) -> Result<Path> {
        self.extreme_path(end, m, false)
    }

    pub fn max_path(&self, end: usize, m: usize) -> Result<Path> {
        self.extreme_path(end, m, true)
    }

    /// Replaces edges `1..n` (below level `n`) with the all-min or all-max
    /// path into `vertices[n-1]`.
    fn reset_below(&self, path: &mut Path, n: usize, max: bool) {
        for k in (1..n).rev() {
            let list = self.table(k - 1).expect("level checked").sources_of(path.vertices[k]);
            let pos = if max { list.len() - 1 } else { 0 };
            path.edges[k - 1] = pos;
            path.vertices[k - 1] = list[pos];
        }
    }

    /// The Vershik successor of a finite path.
    pub fn vershik_successor(&self, path: &Path) -> Successor {
        for n in 1..=path.level() {
            let list = self.table(n - 1).expect("path levels are valid").sources_of(path.vertices[n]);
            let pos = path.edges[n - 1];
            if pos + 1 < list.len() {
                let mut next = path.clone();
                next.edges[n - 1] = pos + 1;
                next.vertices[n - 1] = list[pos + 1];
                self.reset_below(&mut next, n, false);
                return Successor::Next(next);
            }
        }
        Successor::MaxPath
    }

    /// The inverse of [`Self::vershik_successor`].
    pub fn vershik_predecessor(&self, path: &Path) -> Predecessor {
        for n in 1..=path.level() {
            let pos = path.edges[n - 1];
            if pos > 0 {
                let list = self.table(n - 1).expect("path levels are valid").sources_of(path.vertices[n]);
                let mut prev = path.clone();
                prev.edges[n - 1] = pos - 1;
                prev.vertices[n - 1] = list[pos - 1];
                self.reset_below(&mut prev, n, true);
                return Predecessor::Prev(prev);
            }
        }
        Predecessor::MinPath
    }

    /// Rank of a path among the root-to-`end` paths, starting at 1.
    pub fn floor_of(&self, path: &Path) -> Result<BigInt> {
        let mut floor = BigInt::one();
        let mut h = vec![BigInt::one()];
        for n in 1..=path.level() {
            let list = self.table(n - 1)?.sources_of(path.vertices[n]);
            for &s in &list[..path.edges[n - 1]] {
                floor += &h[s];
            }
            if n < path.level() {
                h = self
                    .table(n - 1)?
                    .lists()
                    .iter()
                    .map(|l| l.iter().map(|&s| h[s].clone()).sum())
                    .collect();
            }
        }
        Ok(floor)
    }

    /// The path with the given tower and 1-based floor at level `m`.
    pub fn path_of_floor(&self, m: usize, tower: usize, floor: &BigInt) -> Result<Path> {
        let hs: Vec<Vec<BigInt>> = (0..=m).map(|k| self.heights(k)).collect::<Result<_>>()?;
        if tower >= hs[m].len() || floor < &BigInt::one() || floor > &hs[m][tower] {
            return Err(Error::InvalidArgument(format!("no floor {floor} in tower {tower} at level {m}")));
        }
        let mut rest = floor - BigInt::one();
        let mut vertices = vec![0; m + 1];
        let mut edges = vec![0; m];
        vertices[m] = tower;
        for n in (1..=m).rev() {
            let list = self.table(n - 1)?.sources_of(vertices[n]);
            let mut chosen = None;
            for (pos, &s) in list.iter().enumerate() {
                if rest < hs[n - 1][s] {
                    chosen = Some((pos, s));
                    break;
                }
                rest -= &hs[n - 1][s];
            }
            let (pos, s) = chosen.expect("floor within height");
            edges[n - 1] = pos;
            vertices[n - 1] = s;
        }
        debug_assert!(rest.is_zero());
        Ok(Path { vertices, edges })
    }

    /// Every root-to-level-`m` path, grouped by tower and sorted by floor.
    pub fn all_paths(&self, m: usize) -> Result<Vec<Path>> {
        let total: u64 = self.small_heights(m)?.iter().sum();
        if total > MAX_CELLS {
            return Err(Error::Capability(format!("{total} paths at level {m} exceed the enumeration bound")));
        }
        let mut out = Vec::with_capacity(total as usize);
        for v in 0..self.vertex_count(m)? {
            let mut p = self.min_path(v, m)?;
            loop {
                out.push(p.clone());
                match self.vershik_successor(&p) {
                    Successor::Next(n) => p = n,
                    Successor::MaxPath => break,
                }
            }
        }
        Ok(out)
    }

    /// Telescopes the diagram onto the given strictly increasing levels
    /// (which must start at 0). Level `i` of the result is level `levels[i]`
    /// of `self`; the edges are the connecting paths in lexicographic order.
    pub fn telescope(&self, levels: &[usize]) -> Result<OrderedBratteliDiagram> {
        if levels.first() != Some(&0) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("telescoping levels must start at 0 and increase".into()));
        }
        let mut tables = Vec::new();
        for w in levels.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            // For each vertex at `hi`, the sources (at `lo`) of its connecting
            // paths in lexicographic order.
            let mut lists: Vec<Vec<usize>> = (0..self.vertex_count(lo)?).map(|v| vec![v]).collect();
            for n in lo..hi {
                let t = self.table(n)?;
                lists = t
                    .lists()
                    .iter()
                    .map(|l| l.iter().flat_map(|&s| lists[s].iter().copied()).collect())
                    .collect();
            }
            tables.push(EdgeTable::new(lists));
        }
        let root = tables.remove(0);
        OrderedBratteliDiagram::explicit(root, tables)
    }

    /// Structural checks: primitivity and proper ordering.
    pub fn validate(&self, depth: usize) -> ValidationReport {
        let depth = depth.max(1);
        ValidationReport {
            depth,
            primitive: self.check_primitive(depth),
            properly_ordered: self.check_order(depth),
        }
    }

    fn check_primitive(&self, depth: usize) -> CheckResult {
        if let Some(a) = self.stationary_matrix() {
            // Wielandt: a primitive n x n matrix has A^((n-1)^2 + 1) > 0.
            let n = a.rows();
            let bound = (n - 1) * (n - 1) + 1;
            let mut p = a.clone();
            for k in 1..=bound {
                if p.is_strictly_positive() {
                    return CheckResult {
                        passed: true,
                        exact: true,
                        witness: Witness::PositivePower { power: k },
                    };
                }
                p = p.mul(&a).unwrap();
            }
            let p = a.pow(bound);
            let (row, col) = p.first_zero().unwrap();
            return CheckResult {
                passed: false,
                exact: true,
                witness: Witness::ZeroEntry { power: bound, row, col },
            };
        }
        let last = self.last_level().unwrap();
        let top = (1 + depth).min(last);
        let mut p = IntMatrix::identity(self.vertex_count(1).unwrap());
        for n in 1..top {
            p = self.incidence(n).unwrap().mul(&p).unwrap();
            if p.is_strictly_positive() {
                return CheckResult {
                    passed: true,
                    exact: false,
                    witness: Witness::PositivePower { power: n },
                };
            }
        }
        let (row, col) = p.first_zero().unwrap_or((0, 0));
        CheckResult {
            passed: false,
            exact: false,
            witness: Witness::ZeroEntry {
                power: top.saturating_sub(1),
                row,
                col,
            },
        }
    }

    fn check_order(&self, depth: usize) -> CheckResult {
        if self.is_stationary() {
            let t = &self.tables[0];
            let f: Vec<usize> = t.lists().iter().map(|l| *l.last().unwrap()).collect();
            let g: Vec<usize> = t.lists().iter().map(|l| l[0]).collect();
            let max_cycles = functional_cycles(&f);
            let min_cycles = functional_cycles(&g);
            let unique = |c: &Vec<Vec<usize>>| c.len() == 1 && c[0].len() == 1;
            return CheckResult {
                passed: unique(&max_cycles) && unique(&min_cycles),
                exact: true,
                witness: Witness::ExtremeCycles { max_cycles, min_cycles },
            };
        }
        let top = (1 + depth).min(self.last_level().unwrap());
        let walk = |max: bool| -> Vec<usize> {
            let mut alive: Vec<usize> = (0..self.vertex_count(top).unwrap()).collect();
            for n in (2..=top).rev() {
                let t = self.table(n - 1).unwrap();
                let mut below: Vec<usize> = alive
                    .iter()
                    .map(|&v| {
                        let l = t.sources_of(v);
                        if max { l[l.len() - 1] } else { l[0] }
                    })
                    .collect();
                below.sort_unstable();
                below.dedup();
                alive = below;
            }
            alive
        };
        let max = walk(true);
        let min = walk(false);
        CheckResult {
            passed: max.len() == 1 && min.len() == 1,
            exact: false,
            witness: Witness::SurvivingVertices { max, min },
        }
    }
}

/// Cycles of a self-map of `0..f.len()`, each starting at its least element.
fn functional_cycles(f: &[usize]) -> Vec<Vec<usize>> {
    let n = f.len();
    let mut on_cycle = vec![false; n];
    for start in 0..n {
        let mut x = start;
        for _ in 0..n {
            x = f[x];
        }
        // After n steps x is periodic.
        on_cycle[x] = true;
    }
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for v in 0..n {
        if on_cycle[v] && !seen[v] {
            let mut c = vec![v];
            seen[v] = true;
            let mut x = f[v];
            while x != v {
                seen[x] = true;
                c.push(x);
                x = f[x];
            }
            cycles.push(c);
        }
    }
    cycles
}
