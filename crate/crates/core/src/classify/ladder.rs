//! Intertwining ladders: finite certificates that two dimension groups are
//! unitally order isomorphic.
//!
//! ```text
//!   A(a_0) --> A(a_1) --> A(a_2) ...
//!      \ h_0  ^  \ h_1  ^
//!       v    / H_0 v   / H_1
//!        B(b_0) --> B(b_1) ...
//! ```
//!
//! Each `H_i h_i` is the A-side connecting map and each `h_{i+1} H_i` the
//! B-side one. A ladder marked `periodic` between stationary presentations
//! repeats its first rung forever, which yields the isomorphism.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::dimgroup::DimGroup;
use crate::error::Result;
use crate::linalg::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntertwiningLadder {
    pub a_levels: Vec<usize>,
    pub b_levels: Vec<usize>,
    /// `down[i]`: level `a_levels[i]` of A to level `b_levels[i]` of B.
    pub down: Vec<IntMatrix>,
    /// `up[i]`: level `b_levels[i]` of B to level `a_levels[i + 1]` of A.
    pub up: Vec<IntMatrix>,
    pub periodic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum LadderCheck {
    Verified,
    BrokenSquare { index: usize, reason: String },
}

impl LadderCheck {
    pub fn is_verified(&self) -> bool {
        matches!(self, LadderCheck::Verified)
    }
}

/// Recomputes every square, unit image and (for periodic ladders) the
/// repetition condition from the two presentations.
pub fn verify_ladder(l: &IntertwiningLadder, a: &DimGroup, b: &DimGroup) -> Result<LadderCheck> {
    let broken = |index: usize, reason: String| Ok(LadderCheck::BrokenSquare { index, reason });
    let n = l.down.len();
    if l.b_levels.len() != n || !(l.up.len() == n || l.up.len() + 1 == n) || l.a_levels.len() != l.up.len() + 1 {
        if n == 0 && l.up.is_empty() && l.b_levels.is_empty() && l.a_levels.len() <= 1 {
            return Ok(LadderCheck::Verified);
        }
        return broken(0, "ladder shape is inconsistent".into());
    }
    let (da, db) = (a.diagram(), b.diagram());
    if l.a_levels.windows(2).any(|w| w[0] >= w[1]) || l.b_levels.windows(2).any(|w| w[0] >= w[1]) {
        return broken(0, "levels must increase".into());
    }
    for i in 0..n {
        let (ai, bi) = (l.a_levels[i], l.b_levels[i]);
        let h = &l.down[i];
        let ha = da.heights(ai)?;
        let hb = db.heights(bi)?;
        if h.rows() != hb.len() || h.cols() != ha.len() || !h.is_nonnegative() {
            return broken(i, format!("down map {i} has the wrong shape or a negative entry"));
        }
        if h.mul_vec(&ha) != hb {
            return broken(i, format!("down map {i} does not preserve the unit"));
        }
        if let Some(big_h) = l.up.get(i) {
            let a_next = l.a_levels[i + 1];
            let ha_next = da.heights(a_next)?;
            if big_h.rows() != ha_next.len() || big_h.cols() != hb.len() || !big_h.is_nonnegative() {
                return broken(i, format!("up map {i} has the wrong shape or a negative entry"));
            }
            if big_h.mul_vec(&hb) != ha_next {
                return broken(i, format!("up map {i} does not preserve the unit"));
            }
            if big_h.mul(h) != Some(a.connecting(ai, a_next)?) {
                return broken(i, format!("up {i} after down {i} is not the A connecting map"));
            }
            if let Some(h_next) = l.down.get(i + 1) {
                let b_next = l.b_levels[i + 1];
                if h_next.cols() != ha_next.len() || h_next.mul(big_h) != Some(b.connecting(bi, b_next)?) {
                    return broken(i, format!("down {} after up {i} is not the B connecting map", i + 1));
                }
            }
        }
    }
    if l.periodic {
        let ok = da.is_stationary()
            && db.is_stationary()
            && n == 2
            && l.up.len() == 1
            && l.down[0] == l.down[1]
            && l.a_levels[0] >= 1
            && l.b_levels[0] >= 1;
        if !ok {
            return broken(0, "a periodic ladder needs stationary presentations and a repeated first rung".into());
        }
    }
    Ok(LadderCheck::Verified)
}

/// Nonnegative integer vectors `x` with `x . w = target`, in lexicographic
/// order; `None` if more than `cap` exist.
fn solutions(w: &[u64], target: u64, cap: usize) -> Option<Vec<Vec<u64>>> {
    fn rec(w: &[u64], target: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>, cap: usize) -> bool {
        if w.len() == 1 {
            if target.is_multiple_of(w[0]) {
                prefix.push(target / w[0]);
                out.push(prefix.clone());
                prefix.pop();
            }
            return out.len() <= cap;
        }
        for c in 0..=target / w[0] {
            prefix.push(c);
            let ok = rec(&w[1..], target - c * w[0], prefix, out, cap);
            prefix.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut out = Vec::new();
    rec(w, target, &mut Vec::new(), &mut out, cap).then_some(out)
}

fn small(v: &[BigInt]) -> Option<Vec<u64>> {
    v.iter().map(ToPrimitive::to_u64).collect()
}

const ROW_CAP: usize = 2_000;
const PRODUCT_CAP: usize = 20_000;

fn product<T: Clone>(choices: &[Vec<T>], cap: usize) -> Option<Vec<Vec<T>>> {
    let total = choices.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()))?;
    if total > cap {
        return None;
    }
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|p| {
                c.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x.clone());
                    q
                })
            })
            .collect();
    }
    Some(out)
}

fn to_matrix(rows: &[Vec<u64>]) -> IntMatrix {
    IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()).unwrap()
}

/// Bounded search for a periodic ladder between stationary presentations.
///
/// Total level span `g_A + g_B` grows from 2 to `span`; for each split and
/// each pair of starting levels in `1..=3`, the down map `h` ranges over
/// nonnegative unit-preserving matrices and the up map `H` over those
/// satisfying `H h = A^{g_A}`; the first pair with `h H = B^{g_B}` wins.
pub fn search_ladder(a: &DimGroup, b: &DimGroup, span: usize) -> Result<Option<IntertwiningLadder>> {
    if !a.is_stationary() || !b.is_stationary() {
        return Ok(None);
    }
    for total in 2..=span {
        for ga in 1..total {
            let gb = total - ga;
            for a0 in 1..=3 {
                for b0 in 1..=3 {
                    if let Some(l) = try_shape(a, b, a0, b0, ga, gb)? {
                        return Ok(Some(l));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn try_shape(a: &DimGroup, b: &DimGroup, a0: usize, b0: usize, ga: usize, gb: usize) -> Result<Option<IntertwiningLadder>> {
    let (da, db) = (a.diagram(), b.diagram());
    let (Some(ha), Some(hb), Some(ha1)) = (
        small(&da.heights(a0)?),
        small(&db.heights(b0)?),
        small(&da.heights(a0 + ga)?),
    ) else {
        return Ok(None);
    };
    let conn_a = a.connecting(a0, a0 + ga)?;
    let conn_b = b.connecting(b0, b0 + gb)?;
    let mut down_rows = Vec::with_capacity(hb.len());
    for &t in &hb {
        match solutions(&ha, t, ROW_CAP) {
            Some(s) if !s.is_empty() => down_rows.push(s),
            _ => return Ok(None),
        }
    }
    let mut up_candidates = Vec::with_capacity(ha1.len());
    for &t in &ha1 {
        match solutions(&hb, t, ROW_CAP) {
            Some(s) if !s.is_empty() => up_candidates.push(s),
            _ => return Ok(None),
        }
    }
    let Some(downs) = product(&down_rows, PRODUCT_CAP) else {
        return Ok(None);
    };
    for rows in downs {
        let h = to_matrix(&rows);
        // Row k of H must satisfy (row k of H) h = row k of A^{g_A}.
        let mut up_rows = Vec::with_capacity(up_candidates.len());
        for (k, cands) in up_candidates.iter().enumerate() {
            let want = conn_a.row(k);
            let ok: Vec<Vec<u64>> = cands
                .iter()
                .filter(|y| {
                    (0..h.cols()).all(|j| {
                        let s: BigInt = y.iter().enumerate().map(|(i, &yi)| BigInt::from(yi) * h.get(i, j)).sum();
                        s == want[j]
                    })
                })
                .cloned()
                .collect();
            if ok.is_empty() {
                break;
            }
            up_rows.push(ok);
        }
        if up_rows.len() != up_candidates.len() {
            continue;
        }
        let Some(ups) = product(&up_rows, PRODUCT_CAP) else {
            continue;
        };
        for urows in ups {
            let big_h = to_matrix(&urows);
            if h.mul(&big_h).as_ref() == Some(&conn_b) {
                return Ok(Some(IntertwiningLadder {
                    a_levels: vec![a0, a0 + ga],
                    b_levels: vec![b0, b0 + gb],
                    down: vec![h.clone(), h],
                    up: vec![big_h],
                    periodic: true,
                }));
            }
        }
    }
    Ok(None)
}
