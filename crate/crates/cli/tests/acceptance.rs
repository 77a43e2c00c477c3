//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. Exits
//! non-zero if any criterion fails.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cantor_core::bratteli::{parse_diagram, Cell, ClopenSet, OrderedBratteliDiagram, Successor};
use cantor_core::certificate::{Certificate, Claim, PartitionConjugatorWitness};
use cantor_core::classify::{
    decide_k_conjugacy, decide_tau, decide_weak, frobenius, represent, verify_ladder, Bounds, KObstruction, KVerdict,
    TauVerdict, WeakVerdict,
};
use cantor_core::dimgroup::{Answer, DgElement, DimGroup, Positivity};
use cantor_core::fullgroup::{
    check_block_condition, conjugator_from_partition, cyclic_from_blocks, verify_conjugator, BlockBijection,
    BlockCondition,
};
use cantor_core::invariants::{divides_unit, verify_residue_cycle, Divisibility};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const SYSTEMS: [&str; 4] = ["dyadic", "triadic", "quaternary", "fibonacci"];

fn systems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn system(name: &str) -> OrderedBratteliDiagram {
    let path = systems_dir().join(format!("{name}.obd"));
    parse_diagram(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// 1. Block bijections of {1..N}: constructive cycle vs exhaustive search.

/// All set partitions of `1..=n`, blocks in order of their least element.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    fn rec(x: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if x > n {
            out.push(cur.clone());
            return;
        }
        for i in 0..cur.len() {
            cur[i].push(x);
            rec(x + 1, n, cur, out);
            cur[i].pop();
        }
        cur.push(vec![x]);
        rec(x + 1, n, cur, out);
        cur.pop();
    }
    rec(1, n, &mut Vec::new(), &mut out);
    out
}

/// Every sequence of disjoint sets covering `1..=n` with the given sizes.
fn ordered_partitions(n: usize, sizes: &[usize], f: &mut impl FnMut(&[Vec<usize>])) {
    fn rec(
        sizes: &[usize],
        i: usize,
        free: &mut Vec<usize>,
        cur: &mut Vec<Vec<usize>>,
        f: &mut impl FnMut(&[Vec<usize>]),
    ) {
        if i == sizes.len() {
            f(cur);
            return;
        }
        let k = sizes[i];
        let avail = free.clone();
        choose(&avail, k, 0, &mut Vec::new(), &mut |subset| {
            free.retain(|x| !subset.contains(x));
            cur.push(subset.to_vec());
            rec(sizes, i + 1, free, cur, f);
            cur.pop();
            free.extend_from_slice(subset);
            free.sort_unstable();
        });
    }
    fn choose(xs: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..xs.len() {
            if xs.len() - i < k - cur.len() {
                break;
            }
            cur.push(xs[i]);
            choose(xs, k, i + 1, cur, f);
            cur.pop();
        }
    }
    let mut free: Vec<usize> = (1..=n).collect();
    rec(sizes, 0, &mut free, &mut Vec::new(), f);
}

/// Exhaustive search for an `n`-cycle mapping each block onto its image.
fn brute_cycle_exists(n: usize, blocks: &[Vec<usize>], images: &[Vec<usize>]) -> bool {
    let mut allowed = vec![Vec::new(); n + 1];
    for (u, v) in blocks.iter().zip(images) {
        for &x in u {
            allowed[x] = v.clone();
        }
    }
    fn rec(x: usize, n: usize, allowed: &[Vec<usize>], sigma: &mut [usize], used: &mut [bool]) -> bool {
        if x > n {
            return true;
        }
        for &y in &allowed[x] {
            if used[y] {
                continue;
            }
            // Walk forward from y; closing a cycle before all n points are
            // assigned would leave sigma with more than one cycle.
            let mut len = 1;
            let mut z = y;
            while z != x && sigma[z] != 0 {
                z = sigma[z];
                len += 1;
            }
            if z == x && len < n {
                continue;
            }
            sigma[x] = y;
            used[y] = true;
            if rec(x + 1, n, allowed, sigma, used) {
                return true;
            }
            sigma[x] = 0;
            used[y] = false;
        }
        false
    }
    rec(1, n, &allowed, &mut vec![0; n + 1], &mut vec![false; n + 1])
}

fn is_single_cycle(sigma: &[usize]) -> bool {
    let n = sigma.len();
    let mut x = 1;
    for step in 1..=n {
        x = sigma[x - 1];
        if x == 1 {
            return step == n;
        }
    }
    false
}

fn criterion_1() -> Outcome {
    let mut instances = 0u64;
    let mut ok = 0u64;
    let mut violations = 0u64;
    let mut failure: Option<String> = None;
    for n in 1..=7 {
        for p in set_partitions(n) {
            let sizes: Vec<usize> = p.iter().map(Vec::len).collect();
            ordered_partitions(n, &sizes, &mut |q| {
                if failure.is_some() {
                    return;
                }
                instances += 1;
                let b = BlockBijection::new(n, p.clone(), q.to_vec()).unwrap();
                let brute = brute_cycle_exists(n, b.blocks(), b.images());
                match check_block_condition(&b).unwrap() {
                    BlockCondition::Ok => {
                        ok += 1;
                        let sigma = match cyclic_from_blocks(&b) {
                            Ok(s) => s,
                            Err(e) => {
                                failure = Some(format!("{p:?} -> {q:?}: {e}"));
                                return;
                            }
                        };
                        let respects = b.blocks().iter().zip(b.images()).all(|(u, v)| {
                            let img: BTreeSet<usize> = u.iter().map(|&x| sigma[x - 1]).collect();
                            img == v.iter().copied().collect()
                        });
                        if !brute || !respects || !is_single_cycle(&sigma) {
                            failure = Some(format!("{p:?} -> {q:?}: bad cycle {sigma:?} (brute {brute})"));
                        }
                    }
                    BlockCondition::Violation { blocks } => {
                        violations += 1;
                        let u: BTreeSet<usize> = blocks.iter().flat_map(|&i| b.blocks()[i].clone()).collect();
                        let v: BTreeSet<usize> = blocks.iter().flat_map(|&i| b.images()[i].clone()).collect();
                        let proper = !blocks.is_empty() && blocks.len() < b.blocks().len();
                        if brute || u != v || !proper || cyclic_from_blocks(&b).is_ok() {
                            failure = Some(format!("{p:?} -> {q:?}: violation {blocks:?} not confirmed"));
                        }
                    }
                }
            });
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(format!("{instances} instances, {ok} cycles built, {violations} violations confirmed")),
    }
}

// ---------------------------------------------------------------------------
// 2. Full-group conjugators for random partition pairs.

/// A random partition pair at level `m` with equal classes and no proper
/// invariant family: blocks are random, images are their images under a
/// random tower-preserving permutation of the cells.
fn random_pair(d: &OrderedBratteliDiagram, m: usize, rng: &mut ChaCha8Rng) -> Option<(Vec<ClopenSet>, Vec<ClopenSet>)> {
    let cells: Vec<Cell> = ClopenSet::full(d, m).unwrap().iter().copied().collect();
    let k = rng.gen_range(1..=cells.len().min(5));
    let mut label: Vec<usize> = (0..cells.len()).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    label.shuffle(rng);
    let mut perm: Vec<usize> = (0..cells.len()).collect();
    for w in 0..d.vertex_count(m).unwrap() {
        let idx: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].tower == w).collect();
        let mut shuffled = idx.clone();
        shuffled.shuffle(rng);
        for (a, b) in idx.iter().zip(shuffled) {
            perm[*a] = b;
        }
    }
    let mut blocks = vec![Vec::new(); k];
    let mut images = vec![Vec::new(); k];
    for i in 0..cells.len() {
        blocks[label[i]].push(i + 1);
        images[label[i]].push(perm[i] + 1);
    }
    let b = BlockBijection::new(cells.len(), blocks.clone(), images.clone()).unwrap();
    if check_block_condition(&b).unwrap() != BlockCondition::Ok {
        return None;
    }
    let to_sets = |parts: &[Vec<usize>]| -> Vec<ClopenSet> {
        parts
            .iter()
            .map(|p| ClopenSet::new(m, p.iter().map(|&i| cells[i - 1])).unwrap())
            .collect()
    };
    Some((to_sets(&blocks), to_sets(&images)))
}

struct Emitted {
    label: String,
    cert: Certificate,
}

fn criterion_2(certs: &mut Vec<Emitted>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let diagrams = [("dyadic", system("dyadic")), ("fibonacci", system("fibonacci"))];
    let mut done = 0;
    let mut corruptions = 0;
    let mut attempts = 0;
    while done < 200 {
        attempts += 1;
        if attempts > 10_000 {
            return Err(format!("only {done} admissible instances generated"));
        }
        let (name, d) = &diagrams[done % 2];
        let m = 1 + (done / 2) % 3;
        let Some((blocks, images)) = random_pair(d, m, &mut rng) else { continue };
        let dg = DimGroup::new(d);
        for (u, v) in blocks.iter().zip(&images) {
            let same = dg.equal(&d.class_of_clopen(u).unwrap(), &d.class_of_clopen(v).unwrap(), 40).unwrap();
            ensure(same == Answer::Yes, || format!("{name} m={m}: generated classes differ"))?;
        }
        let s = conjugator_from_partition(d, m, &blocks, &images, m + 8)
            .map_err(|e| format!("{name} m={m} instance {done}: {e}"))?;
        let check = verify_conjugator(d, &s, &blocks, &images, 2).map_err(e2s)?;
        ensure(check.is_verified(), || format!("{name} m={m} instance {done}: {check:?}"))?;
        for w in 0..s.towers.len() {
            for j in 0..s.towers[w].r.len() {
                let mut bad = s.clone();
                bad.towers[w].r[j] += 1;
                let c = verify_conjugator(d, &bad, &blocks, &images, 2);
                ensure(!matches!(c, Ok(ref c) if c.is_verified()), || {
                    format!("{name} m={m}: corrupting r({w},{}) went unnoticed", j + 1)
                })?;
                corruptions += 1;
            }
        }
        let witness = PartitionConjugatorWitness { blocks, images, element: s, lookahead: 2 };
        let cert = Certificate::issue(Claim::PartitionConjugator, &[d], &witness).map_err(e2s)?;
        certs.push(Emitted { label: format!("conjugator-{done}-{name}-m{m}"), cert });
        done += 1;
    }
    Ok(format!("200 conjugators verified, {corruptions} corrupted entries detected"))
}

// ---------------------------------------------------------------------------
// 3-5. Verdicts.

fn criterion_3(certs: &mut Vec<Emitted>) -> Outcome {
    let b = Bounds::default();
    let (dy, tri, quad, fib) = (system("dyadic"), system("triadic"), system("quaternary"), system("fibonacci"));
    for (other, name) in [(&tri, "triadic"), (&fib, "fibonacci")] {
        match decide_weak(&DimGroup::new(&dy), &DimGroup::new(other), &b).map_err(e2s)? {
            WeakVerdict::Not { n: 2, witness: Some(w) } => {
                w.verify(&DimGroup::new(&dy), &DimGroup::new(other)).map_err(e2s)?;
                let cert = Certificate::issue(Claim::NotWeak, &[&dy, other], &w).map_err(e2s)?;
                certs.push(Emitted { label: format!("not-weak-dyadic-{name}"), cert });
            }
            v => return Err(format!("dyadic vs {name}: {v:?}")),
        }
    }
    match decide_weak(&DimGroup::new(&dy), &DimGroup::new(&quad), &b).map_err(e2s)? {
        WeakVerdict::WeaklyConjugate { schedule } => {
            schedule.verify(&DimGroup::new(&dy), &DimGroup::new(&quad)).map_err(e2s)?;
            ensure(!schedule.a_to_b.is_empty() && !schedule.b_to_a.is_empty(), || "one-sided schedule".into())?;
            let cert = Certificate::issue(Claim::Weak, &[&dy, &quad], &schedule).map_err(e2s)?;
            certs.push(Emitted { label: "weak-dyadic-quaternary".into(), cert });
        }
        v => return Err(format!("dyadic vs quaternary: {v:?}")),
    }
    Ok("dyadic/triadic Not(2), dyadic/Fibonacci Not(2), dyadic/quaternary schedules verified".into())
}

fn criterion_4(certs: &mut Vec<Emitted>) -> Outcome {
    let b = Bounds::default();
    let (dy, tri, quad, fib) = (system("dyadic"), system("triadic"), system("quaternary"), system("fibonacci"));
    let (gdy, gquad) = (DimGroup::new(&dy), DimGroup::new(&quad));
    match decide_k_conjugacy(&gdy, &gquad, &b).map_err(e2s)? {
        KVerdict::KConjugate { ladder } => {
            ensure(verify_ladder(&ladder, &gdy, &gquad).map_err(e2s)?.is_verified(), || "ladder rejected".into())?;
            let cert = Certificate::issue(Claim::KConjugate, &[&dy, &quad], &ladder).map_err(e2s)?;
            certs.push(Emitted { label: "k-dyadic-quaternary".into(), cert });
        }
        v => return Err(format!("dyadic vs quaternary: {v:?}")),
    }
    match decide_k_conjugacy(&gdy, &DimGroup::new(&tri), &b).map_err(e2s)? {
        KVerdict::Not { obstructions } => {
            let cert = Certificate::issue(Claim::NotK, &[&dy, &tri], &obstructions).map_err(e2s)?;
            certs.push(Emitted { label: "not-k-dyadic-triadic".into(), cert });
        }
        v => return Err(format!("dyadic vs triadic: {v:?}")),
    }
    match decide_k_conjugacy(&DimGroup::new(&fib), &gdy, &b).map_err(e2s)? {
        KVerdict::Not { obstructions } => {
            ensure(obstructions.iter().any(|o| matches!(o, KObstruction::TraceImage { .. })), || {
                format!("no trace-image obstruction among {obstructions:?}")
            })?;
            let cert = Certificate::issue(Claim::NotK, &[&fib, &dy], &obstructions).map_err(e2s)?;
            certs.push(Emitted { label: "not-k-fibonacci-dyadic".into(), cert });
        }
        v => return Err(format!("Fibonacci vs dyadic: {v:?}")),
    }
    Ok("dyadic/quaternary ladder verified, dyadic/triadic Not, Fibonacci/dyadic Not by trace image".into())
}

fn criterion_5() -> Outcome {
    let b = Bounds::default();
    let groups: Vec<DimGroup> = SYSTEMS.iter().map(|s| DimGroup::new(&system(s))).collect();
    let mut decided = 0;
    for (i, a) in groups.iter().enumerate() {
        for (j, c) in groups.iter().enumerate() {
            let pair = format!("{} vs {}", SYSTEMS[i], SYSTEMS[j]);
            let k = decide_k_conjugacy(a, c, &b).map_err(e2s)?;
            let t = decide_tau(a, c, &b).map_err(e2s)?;
            let w = decide_weak(a, c, &b).map_err(e2s)?;
            let (k_yes, k_no) = (matches!(k, KVerdict::KConjugate { .. }), matches!(k, KVerdict::Not { .. }));
            let (t_yes, t_no) = (matches!(t, TauVerdict::TauConjugate { .. }), matches!(t, TauVerdict::Not { .. }));
            let (w_yes, w_no) = (
                matches!(w, WeakVerdict::WeaklyConjugate { .. }),
                matches!(w, WeakVerdict::Not { .. }),
            );
            ensure(!(k_yes && (t_no || w_no)), || format!("{pair}: K-conjugate but not tau or weak"))?;
            ensure(!(t_yes && w_no), || format!("{pair}: tau-conjugate but not weak"))?;
            ensure(!(w_no && !(t_no && k_no)), || format!("{pair}: not weak but tau/K not refuted"))?;
            if i == j {
                ensure(k_yes && t_yes && w_yes, || format!("{pair}: reflexivity fails"))?;
            }
            decided += [k_yes || k_no, t_yes || t_no, w_yes || w_no].iter().filter(|x| **x).count();
        }
    }
    Ok(format!("16 pairs, {decided}/48 verdicts certified, no hierarchy violation"))
}

// ---------------------------------------------------------------------------
// 6. Exact order vs push-forward oracle.

fn random_primitive(rng: &mut ChaCha8Rng) -> OrderedBratteliDiagram {
    loop {
        let n = rng.gen_range(2..=3);
        let lists: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect())
            .collect();
        let Ok(d) = OrderedBratteliDiagram::stationary_from_lists(lists, 1) else { continue };
        let r = d.validate(20);
        if r.primitive.passed && r.primitive.exact {
            return d;
        }
    }
}

enum Sign {
    Zero,
    Positive,
    Negative,
}

fn push_oracle(dg: &DimGroup, g: &DgElement, depth: usize) -> Option<Sign> {
    for l in g.level..=g.level + depth {
        let v = dg.push(g, l).unwrap().vector;
        let zero = num_bigint::BigInt::from(0);
        if v.iter().all(|x| *x == zero) {
            return Some(Sign::Zero);
        }
        if v.iter().all(|x| *x >= zero) {
            return Some(Sign::Positive);
        }
        if v.iter().all(|x| *x <= zero) {
            return Some(Sign::Negative);
        }
    }
    None
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let systems: Vec<DimGroup> = (0..5).map(|_| DimGroup::new(&random_primitive(&mut rng))).collect();
    let (mut decided, mut total) = (0, 0);
    for dg in &systems {
        for _ in 0..100 {
            let level = rng.gen_range(1..=3);
            let k = dg.diagram().vertex_count(level).unwrap();
            let v: Vec<i64> = (0..k).map(|_| rng.gen_range(-6..=6)).collect();
            let g = DgElement::from_i64(level, &v);
            total += 1;
            let exact = dg.is_positive(&g, 20).map_err(e2s)?;
            let zero = dg.is_zero(&g, 20).map_err(e2s)?;
            let Some(oracle) = push_oracle(dg, &g, 20) else { continue };
            decided += 1;
            let agree = match oracle {
                Sign::Zero => exact == Positivity::Zero && zero == Answer::Yes,
                Sign::Positive => matches!(exact, Positivity::Positive { .. }) && zero == Answer::No,
                Sign::Negative => matches!(exact, Positivity::Negative { .. }) && zero == Answer::No,
            };
            ensure(agree, || format!("{:?} on {:?}: exact {exact:?}, zero {zero:?}", g.vector, dg.diagram().stationary_matrix()))?;
        }
    }
    Ok(format!("{decided}/{total} elements decided by the oracle, all agree"))
}

// ---------------------------------------------------------------------------
// 7. Divisibility vs gcd chain.

fn criterion_7() -> Outcome {
    let mut nos = 0;
    for name in SYSTEMS {
        let dg = DimGroup::new(&system(name));
        let chain = dg.gcd_chain(30).map_err(e2s)?;
        for n in 1..=64u64 {
            let nb = num_bigint::BigInt::from(n);
            let oracle = chain.iter().position(|g| (g % &nb) == num_bigint::BigInt::from(0)).map(|i| i + 1);
            match (divides_unit(&dg, n, 40).map_err(e2s)?, oracle) {
                (Divisibility::Yes { .. }, Some(_)) => {}
                (Divisibility::No { certificate }, None) => {
                    verify_residue_cycle(&dg, &certificate).map_err(|e| format!("{name} n={n}: {e}"))?;
                    nos += 1;
                }
                (v, o) => return Err(format!("{name} n={n}: {v:?} vs oracle {o:?}")),
            }
        }
    }
    Ok(format!("4 systems x 64 moduli agree, {nos} residue-cycle certificates re-verified"))
}

// ---------------------------------------------------------------------------
// 8. Vershik map.

fn criterion_8() -> Outcome {
    let dy = system("dyadic");
    let mut count = 0;
    for len in 1..=12usize {
        for x in 0u32..(1 << len) {
            let bits = |x: u32| -> Vec<usize> { (0..len).map(|i| ((x >> i) & 1) as usize).collect() };
            let p = dy.path(0, &bits(x)).map_err(e2s)?;
            match dy.vershik_successor(&p) {
                Successor::Next(q) => {
                    ensure(x + 1 < (1 << len) && q.edges() == bits(x + 1).as_slice(), || {
                        format!("length {len}: successor of {x} is {:?}", q.edges())
                    })?
                }
                Successor::MaxPath => ensure(x + 1 == 1 << len, || format!("length {len}: {x} reported maximal"))?,
            }
            count += 1;
        }
    }
    for name in SYSTEMS {
        let d = system(name);
        for m in 0..=6 {
            let all = d.all_paths(m).map_err(e2s)?;
            let towers = d.vertex_count(m).map_err(e2s)?;
            let maxes: HashSet<_> = (0..towers).map(|w| d.max_path(w, m).unwrap()).collect();
            let mins: HashSet<_> = (0..towers).map(|w| d.min_path(w, m).unwrap()).collect();
            let mut image = HashSet::new();
            for p in &all {
                match d.vershik_successor(p) {
                    Successor::Next(q) => {
                        ensure(!maxes.contains(p), || format!("{name} level {m}: a roof has a successor"))?;
                        ensure(image.insert(q), || format!("{name} level {m}: successor not injective"))?;
                    }
                    Successor::MaxPath => ensure(maxes.contains(p), || format!("{name} level {m}: spurious max"))?,
                }
            }
            let expected: HashSet<_> = all.iter().filter(|p| !mins.contains(*p)).cloned().collect();
            ensure(image == expected, || format!("{name} level {m}: image is not cells minus bases"))?;
        }
    }
    Ok(format!("{count} dyadic paths match binary increment; bijection holds on 4 systems, levels 0..=6"))
}

// ---------------------------------------------------------------------------
// 9. Frobenius thresholds.

fn reachable(k: &[u64], limit: usize) -> Vec<bool> {
    let mut r = vec![false; limit + 1];
    r[0] = true;
    for d in 1..=limit {
        r[d] = k.iter().any(|&x| x as usize <= d && r[d - x as usize]);
    }
    r
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn criterion_9() -> Outcome {
    ensure(frobenius(&[3, 5]).map_err(e2s)? == 8, || "frobenius(3,5) != 8".into())?;
    ensure(represent(7, &[3, 5]).is_none(), || "7 represented by (3,5)".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut cases = 0;
    while cases < 100 {
        let r = if cases % 2 == 0 { 2 } else { 3 };
        let k: Vec<u64> = (0..r).map(|_| rng.gen_range(2..=15)).collect();
        if k.iter().fold(0, |g, &x| gcd(g, x)) != 1 {
            continue;
        }
        cases += 1;
        let reach = reachable(&k, 200);
        let last_gap = (0..=200).rev().find(|&d| !reach[d]);
        let brute = last_gap.map_or(0, |g| g as u64 + 1);
        // A run of min(k) representable values settles every larger one.
        let run = *k.iter().min().unwrap();
        ensure(brute + run <= 201, || format!("{k:?}: brute threshold {brute} too close to the horizon"))?;
        let got = frobenius(&k).map_err(e2s)?;
        ensure(got == brute.max(1), || format!("{k:?}: frobenius {got}, brute force {brute}"))?;
        for d in 0..=200u64 {
            let rep = represent(d, &k);
            ensure(rep.is_some() == reach[d as usize], || format!("{k:?}: represent({d}) disagrees"))?;
            if let Some(c) = rep {
                ensure(c.iter().zip(&k).map(|(a, b)| a * b).sum::<u64>() == d, || format!("{k:?}: bad sum for {d}"))?;
            }
        }
    }
    Ok("frobenius(3,5)=8, represent(7,(3,5))=None, 100 random pairs/triples agree up to 200".into())
}

// ---------------------------------------------------------------------------
// 10. Certificates from disk.

fn mutate(byte: u8) -> u8 {
    let m = byte ^ 1;
    if m.is_ascii_graphic() {
        m
    } else {
        b'x'
    }
}

fn witness_span(text: &str) -> (usize, usize) {
    let start = text.find("\"witness\": ").expect("witness field") + "\"witness\": ".len();
    let end = text[start..].find("\n").map_or(text.len(), |e| start + e);
    (start, end)
}

fn rejects(bytes: &[u8]) -> bool {
    let text = String::from_utf8_lossy(bytes);
    Certificate::from_json(&text).and_then(|c| c.verify()).is_err()
}

fn cli_verify(bin: &str, path: &Path) -> Result<bool, String> {
    let out = Command::new(bin).args(["verify", "--format", "json"]).arg(path).output().map_err(e2s)?;
    ensure(out.status.success(), || format!("verify exited with {:?}", out.status.code()))?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(e2s)?;
    Ok(v["verified"] == serde_json::Value::Bool(true))
}

fn criterion_10(certs: &[Emitted]) -> Outcome {
    let bin = env!("CARGO_BIN_EXE_cantor");
    let dir = tempfile::tempdir().map_err(e2s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let (mut exhaustive, mut sampled, mut via_cli) = (0, 0, 0);
    for (idx, e) in certs.iter().enumerate() {
        let path = dir.path().join(format!("{}.json", e.label));
        let text = e.cert.to_json();
        std::fs::write(&path, &text).map_err(e2s)?;
        ensure(cli_verify(bin, &path)?, || format!("{}: emitted certificate rejected", e.label))?;
        let (start, end) = witness_span(&text);
        let positions: Vec<usize> = if !e.label.starts_with("conjugator") || idx < 10 {
            exhaustive += 1;
            (start..end).collect()
        } else {
            sampled += 1;
            (0..25).map(|_| rng.gen_range(start..end)).collect()
        };
        let mut bytes = text.clone().into_bytes();
        for &i in &positions {
            let orig = bytes[i];
            bytes[i] = mutate(orig);
            ensure(rejects(&bytes), || format!("{}: mutation at byte {i} accepted", e.label))?;
            bytes[i] = orig;
        }
        // A few mutations go through the binary as well.
        for _ in 0..2 {
            let i = rng.gen_range(start..end);
            let orig = bytes[i];
            bytes[i] = mutate(orig);
            let tampered = dir.path().join(format!("{}-tampered.json", e.label));
            std::fs::write(&tampered, &bytes).map_err(e2s)?;
            ensure(!cli_verify(bin, &tampered)?, || format!("{}: cli accepted mutation at {i}", e.label))?;
            bytes[i] = orig;
            via_cli += 1;
        }
    }
    Ok(format!(
        "{} certificates re-verified from disk; {exhaustive} mutated at every witness byte, {sampled} at 25 random bytes, {via_cli} tampered files rejected by the binary",
        certs.len()
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let mut certs = Vec::new();
    let mut results: Vec<(usize, &str, Outcome, Duration, Duration)> = Vec::new();
    let mut run = |n: usize, name: &'static str, limit: u64, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        results.push((n, name, r, t.elapsed(), Duration::from_secs(limit)));
    };
    run(1, "block bijections, N <= 7, exhaustive", 60, &mut criterion_1);
    run(2, "full-group conjugators, 200 random pairs", 120, &mut || criterion_2(&mut certs));
    run(3, "weak approximate conjugacy verdicts", 5, &mut || criterion_3(&mut certs));
    run(4, "approximate K-conjugacy verdicts", 30, &mut || criterion_4(&mut certs));
    run(5, "verdict hierarchy over 4x4 systems", 30, &mut criterion_5);
    run(6, "exact order vs push-forward oracle", 60, &mut criterion_6);
    run(7, "divisibility vs gcd chain", 30, &mut criterion_7);
    run(8, "Vershik successor", 30, &mut criterion_8);
    run(9, "Frobenius thresholds", 10, &mut criterion_9);
    run(10, "certificate round trip and tamper", 10, &mut || criterion_10(&certs));
    let mut failed = 0;
    for (n, name, r, took, limit) in &results {
        let secs = took.as_secs_f64();
        let slow = if took > limit { format!(" (over the {}s budget)", limit.as_secs()) } else { String::new() };
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.2}s]{slow}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why} [{secs:.2}s]");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
