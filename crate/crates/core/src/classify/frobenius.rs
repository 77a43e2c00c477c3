//! Numerical semigroups generated by a list of positive integers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_integer::Integer;

use crate::error::{Error, Result};

/// Least representable value in each residue class modulo `min(k)`.
fn residue_table(k: &[u64]) -> (u64, Vec<u64>) {
    let a = *k.iter().min().unwrap();
    let mut dist = vec![u64::MAX; a as usize];
    dist[0] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, 0usize)));
    while let Some(Reverse((d, r))) = heap.pop() {
        if d > dist[r] {
            continue;
        }
        for &kj in k {
            let nd = d.saturating_add(kj);
            let nr = ((r as u64 + kj) % a) as usize;
            if nd < dist[nr] {
                dist[nr] = nd;
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    (a, dist)
}

/// Least `N >= 1` such that every `n >= N` is a nonnegative combination of `k`.
pub fn frobenius(k: &[u64]) -> Result<u64> {
    if k.is_empty() || k.contains(&0) {
        return Err(Error::InvalidArgument("generators must be positive and non-empty".into()));
    }
    let g = k.iter().fold(0u64, |g, &x| g.gcd(&x));
    if g != 1 {
        return Err(Error::InvalidArgument(format!("generators have common divisor {g}")));
    }
    let (a, dist) = residue_table(k);
    let largest = *dist.iter().max().unwrap();
    // Frobenius number is largest - a; the threshold is one more.
    Ok((largest + 1).saturating_sub(a).max(1))
}

/// Membership test for the semigroup generated by a suffix of the generators.
struct Suffix {
    a: u64,
    dist: Vec<u64>,
}

impl Suffix {
    fn contains(&self, x: u64) -> bool {
        self.dist[(x % self.a) as usize] <= x
    }
}

/// Lexicographically least nonnegative `c` with `sum c_j k_j = d`.
pub fn represent(d: u64, k: &[u64]) -> Option<Vec<u64>> {
    if k.is_empty() {
        return (d == 0).then(Vec::new);
    }
    if k.contains(&0) {
        return None;
    }
    let suffixes: Vec<Suffix> = (0..k.len())
        .map(|j| {
            let (a, dist) = residue_table(&k[j..]);
            Suffix { a, dist }
        })
        .collect();
    if !suffixes[0].contains(d) {
        return None;
    }
    let mut rest = d;
    let mut out = Vec::with_capacity(k.len());
    for j in 0..k.len() {
        if j + 1 == k.len() {
            out.push(rest / k[j]);
            rest = 0;
            break;
        }
        let next = &suffixes[j + 1];
        let mut c = 0;
        while !next.contains(rest - c * k[j]) {
            c += 1;
        }
        out.push(c);
        rest -= c * k[j];
    }
    debug_assert_eq!(rest, 0);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(frobenius(&[3, 5]).unwrap(), 8);
        assert_eq!(frobenius(&[2, 3]).unwrap(), 2);
        assert_eq!(frobenius(&[1]).unwrap(), 1);
        assert!(frobenius(&[4, 6]).is_err());
        assert_eq!(represent(8, &[3, 5]), Some(vec![1, 1]));
        assert_eq!(represent(7, &[3, 5]), None);
        assert_eq!(represent(0, &[3, 5]), Some(vec![0, 0]));
        assert_eq!(represent(15, &[3, 5]), Some(vec![0, 3]));
    }
}
