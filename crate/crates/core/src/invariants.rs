//! Divisor sets `D(G, u)`, periodic spectra and trace images.
//!
//! `n` lies in `D(G, u)` exactly when `n` divides every tower height at some
//! level: if `n | h_m` then `h_m / n` is a positive element `e` with
//! `n e = u`; conversely a positive `e` with `n e = u` has a nonnegative
//! representative at some level `m`, and then `h_m = n e_m` entrywise.
//! The divisor set is therefore the set of divisors of the supernatural
//! number `lim_m gcd(h_m)`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bigint_serde;
use crate::dimgroup::{Answer, DimGroup};
use crate::error::{Error, Result};
use crate::linalg::{gcd_all, lattice_basis, lattice_contains, solve_q, to_rational_rows, IntMatrix};
use crate::numfield::{FieldElem, NumberField};

/// Largest residue state space explored by [`divides_unit`].
const MAX_RESIDUE_STATES: usize = 4_000_000;

/// Default cutoffs for spectrum computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumBounds {
    pub prime_cutoff: u64,
    pub valuation_cutoff: u32,
    pub depth: usize,
}

impl Default for SpectrumBounds {
    fn default() -> Self {
        SpectrumBounds {
            prime_cutoff: 97,
            valuation_cutoff: 20,
            depth: 40,
        }
    }
}

/// Heights modulo `modulus` at levels `1, 2, ...`, ending in a cycle that
/// returns to `states[cycle_start]` and never meets the zero vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueCycle {
    pub modulus: u64,
    pub states: Vec<Vec<u64>>,
    pub cycle_start: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Divisibility {
    /// `n` divides every height at this level.
    Yes { level: usize },
    No { certificate: ResidueCycle },
    Unknown { depth: usize },
}

fn residues(v: &[BigInt], n: u64) -> Vec<u64> {
    let nb = BigInt::from(n);
    v.iter().map(|x| x.mod_floor(&nb).to_u64().unwrap()).collect()
}

fn small_matrix(a: &IntMatrix) -> Vec<Vec<u64>> {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|x| x.to_u64().expect("incidence entries are small")).collect())
        .collect()
}

fn step_mod(a: &[Vec<u64>], x: &[u64], n: u64) -> Vec<u64> {
    a.iter()
        .map(|row| {
            let s: u128 = row.iter().zip(x).map(|(&r, &v)| r as u128 * v as u128 % n as u128).sum();
            (s % n as u128) as u64
        })
        .collect()
}

/// Whether `n` belongs to the divisor set of the order unit.
pub fn divides_unit(dg: &DimGroup, n: u64, depth: usize) -> Result<Divisibility> {
    if n == 0 {
        return Err(Error::InvalidArgument("divisibility by 0 is undefined".into()));
    }
    if n == 1 {
        return Ok(Divisibility::Yes { level: 0 });
    }
    let d = dg.diagram();
    let h1 = d.heights(1)?;
    let mut state = residues(&h1, n);
    if let Some(a) = d.stationary_matrix() {
        let a = small_matrix(&a);
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut states = Vec::new();
        loop {
            if state.iter().all(|&x| x == 0) {
                return Ok(Divisibility::Yes { level: states.len() + 1 });
            }
            if let Some(&start) = seen.get(&state) {
                return Ok(Divisibility::No {
                    certificate: ResidueCycle { modulus: n, states, cycle_start: start },
                });
            }
            if states.len() >= MAX_RESIDUE_STATES {
                return Ok(Divisibility::Unknown { depth: states.len() });
            }
            seen.insert(state.clone(), states.len());
            states.push(state.clone());
            state = step_mod(&a, &state, n);
        }
    }
    let top = d.last_level().unwrap().min(depth.max(1));
    for level in 1..=top {
        if level > 1 {
            state = step_mod(&small_matrix(dg.matrix(level - 1)?), &state, n);
        }
        if state.iter().all(|&x| x == 0) {
            return Ok(Divisibility::Yes { level });
        }
    }
    Ok(Divisibility::Unknown { depth })
}

/// Re-checks a residue-cycle certificate against a stationary presentation.
pub fn verify_residue_cycle(dg: &DimGroup, cert: &ResidueCycle) -> Result<()> {
    let fail = |m: String| Err(Error::Certificate(m));
    let n = cert.modulus;
    if n < 2 {
        return fail("modulus must be at least 2".into());
    }
    let Some(a) = dg.diagram().stationary_matrix() else {
        return fail("residue cycles certify stationary presentations only".into());
    };
    if cert.states.is_empty() || cert.cycle_start >= cert.states.len() {
        return fail("empty cycle".into());
    }
    let a = small_matrix(&a);
    let h1 = residues(&dg.diagram().heights(1)?, n);
    if cert.states[0] != h1 {
        return fail("first state is not the level-1 height vector".into());
    }
    for (i, s) in cert.states.iter().enumerate() {
        if s.len() != h1.len() || s.iter().any(|&x| x >= n) {
            return fail(format!("state {i} is malformed"));
        }
        if s.iter().all(|&x| x == 0) {
            return fail(format!("state {i} is zero"));
        }
        let next = step_mod(&a, s, n);
        let expected = cert.states.get(i + 1).unwrap_or(&cert.states[cert.cycle_start]);
        if &next != expected {
            return fail(format!("state {} does not follow from state {i}", i + 1));
        }
    }
    Ok(())
}

/// `A^span h_1 = p * sum_i multipliers[i] A^i h_1`, which forces the
/// `p`-adic valuation of the heights to grow without bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrylovRelation {
    pub span: usize,
    #[serde(with = "bigint_serde::vec")]
    pub multipliers: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// Valuation of `gcd(h_level)`, already stable at `level`.
    Exact { v: u32, level: usize },
    AtLeast(u32),
    Infinite(KrylovRelation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeValuation {
    pub p: u64,
    pub valuation: Valuation,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireV {
    Num(u32),
    Text(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireCert {
    Stable { level: usize },
    Relation(KrylovRelation),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireValuation {
    p: u64,
    v: WireV,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cert: Option<WireCert>,
}

impl Serialize for PrimeValuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (v, cert) = match &self.valuation {
            Valuation::Exact { v, level } => (WireV::Num(*v), Some(WireCert::Stable { level: *level })),
            Valuation::AtLeast(k) => (WireV::Text(format!(">={k}")), None),
            Valuation::Infinite(r) => (WireV::Text("inf".into()), Some(WireCert::Relation(r.clone()))),
        };
        WireValuation { p: self.p, v, cert }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrimeValuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = WireValuation::deserialize(d)?;
        let valuation = match (w.v, w.cert) {
            (WireV::Num(v), Some(WireCert::Stable { level })) => Valuation::Exact { v, level },
            (WireV::Text(t), Some(WireCert::Relation(r))) if t == "inf" => Valuation::Infinite(r),
            (WireV::Text(t), None) => match t.strip_prefix(">=").and_then(|k| k.parse().ok()) {
                Some(k) => Valuation::AtLeast(k),
                None => return Err(D::Error::custom(format!("bad valuation {t:?}"))),
            },
            _ => return Err(D::Error::custom("valuation and certificate do not match")),
        };
        Ok(PrimeValuation { p: w.p, valuation })
    }
}

/// Per-prime valuations of the supernatural number `lim gcd(h_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupernaturalTruncation {
    pub prime_cutoff: u64,
    pub level_cutoff: usize,
    pub entries: Vec<PrimeValuation>,
}

impl SupernaturalTruncation {
    pub fn get(&self, p: u64) -> Option<&Valuation> {
        self.entries.iter().find(|e| e.p == p).map(|e| &e.valuation)
    }
}

impl fmt::Display for SupernaturalTruncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .filter_map(|e| match &e.valuation {
                Valuation::Exact { v: 0, .. } => None,
                Valuation::Exact { v, .. } => Some(format!("{}^{v}", e.p)),
                Valuation::AtLeast(k) => Some(format!("{}^(>={k})", e.p)),
                Valuation::Infinite(_) => Some(format!("{}^inf", e.p)),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "1 (primes <= {})", self.prime_cutoff)
        } else {
            write!(f, "{} (primes <= {})", parts.join(" * "), self.prime_cutoff)
        }
    }
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
}

fn valuation(x: &BigInt, p: u64) -> u32 {
    if x.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

/// The first linear relation among `h, A h, A^2 h, ...`: returns `c` with
/// `A^d h = sum_i c_i A^i h`, `d = c.len()`.
fn krylov_relation(a: &IntMatrix, h: &[BigInt]) -> Vec<BigInt> {
    let mut vecs = vec![h.to_vec()];
    loop {
        let next = a.mul_vec(vecs.last().unwrap());
        let cols = to_rational_rows(&vecs);
        let target = to_rational_rows(std::slice::from_ref(&next)).remove(0);
        if let Some(c) = solve_q(&cols, &target) {
            return c
                .into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "Krylov relation of an integer matrix is integral");
                    x.to_integer()
                })
                .collect();
        }
        vecs.push(next);
    }
}

fn nilpotent_part_kills(a: &[Vec<u64>], x: &[u64], p: u64) -> bool {
    let mut y = x.to_vec();
    for _ in 0..a.len() {
        y = step_mod(a, &y, p);
    }
    y.iter().all(|&v| v == 0)
}

fn stationary_valuation(dg: &DimGroup, a: &IntMatrix, p: u64) -> Result<Valuation> {
    let h1 = dg.diagram().heights(1)?;
    let c = krylov_relation(a, &h1);
    let pb = BigInt::from(p);
    if c.iter().all(|x| (x % &pb).is_zero()) {
        return Ok(Valuation::Infinite(KrylovRelation {
            span: c.len(),
            multipliers: c.iter().map(|x| x / &pb).collect(),
        }));
    }
    let small = small_matrix(a);
    let mut h = h1;
    for level in 1.. {
        let v = h.iter().map(|x| valuation(x, p)).min().unwrap();
        let scale = pb.pow(v);
        let x: Vec<BigInt> = h.iter().map(|y| y / &scale).collect();
        if !nilpotent_part_kills(&small, &residues(&x, p), p) {
            return Ok(Valuation::Exact { v, level });
        }
        // Continue from the normalized vector; valuations add.
        h = a.mul_vec(&h);
        if level > 10_000 {
            return Err(Error::Exhausted(format!("valuation at {p} did not stabilize")));
        }
    }
    unreachable!()
}

/// Per-prime valuations of the divisor set, exact for stationary diagrams.
pub fn periodic_spectrum(dg: &DimGroup, bounds: &SpectrumBounds) -> Result<SupernaturalTruncation> {
    let d = dg.diagram();
    let primes = primes_up_to(bounds.prime_cutoff);
    if let Some(a) = d.stationary_matrix() {
        let entries = primes
            .into_iter()
            .map(|p| Ok(PrimeValuation { p, valuation: stationary_valuation(dg, &a, p)? }))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SupernaturalTruncation {
            prime_cutoff: bounds.prime_cutoff,
            level_cutoff: 0,
            entries,
        });
    }
    let level = d.last_level().unwrap().min(bounds.depth.max(1));
    let g = gcd_all(&d.heights(level)?);
    let entries = primes
        .into_iter()
        .map(|p| PrimeValuation {
            p,
            valuation: Valuation::AtLeast(valuation(&g, p).min(bounds.valuation_cutoff)),
        })
        .collect();
    Ok(SupernaturalTruncation {
        prime_cutoff: bounds.prime_cutoff,
        level_cutoff: level,
        entries,
    })
}

/// Re-checks every entry of a spectrum against the presentation.
pub fn verify_spectrum(dg: &DimGroup, s: &SupernaturalTruncation) -> Result<()> {
    let d = dg.diagram();
    let fail = |m: String| Err(Error::Certificate(m));
    if s.entries.iter().map(|e| e.p).ne(primes_up_to(s.prime_cutoff)) {
        return fail("entries must list every prime up to the cutoff in order".into());
    }
    for e in &s.entries {
        let p = e.p;
        let pb = BigInt::from(p);
        match &e.valuation {
            Valuation::Infinite(r) => {
                let Some(a) = d.stationary_matrix() else {
                    return fail("infinite valuations need a stationary presentation".into());
                };
                if r.multipliers.len() != r.span || r.span == 0 {
                    return fail(format!("malformed relation at {p}"));
                }
                let mut powers = vec![d.heights(1)?];
                for _ in 0..r.span {
                    powers.push(a.mul_vec(powers.last().unwrap()));
                }
                let mut rhs = vec![BigInt::zero(); powers[0].len()];
                for (c, v) in r.multipliers.iter().zip(&powers) {
                    for (x, y) in rhs.iter_mut().zip(v) {
                        *x += &pb * c * y;
                    }
                }
                if rhs != powers[r.span] {
                    return fail(format!("relation at {p} does not hold"));
                }
            }
            Valuation::Exact { v, level } => {
                let Some(a) = d.stationary_matrix() else {
                    return fail("exact valuations need a stationary presentation".into());
                };
                let h = d.heights(*level)?;
                let got = h.iter().map(|x| valuation(x, p)).min().unwrap();
                if got != *v {
                    return fail(format!("valuation at {p} is {got} at level {level}, not {v}"));
                }
                let scale = pb.pow(*v);
                let x: Vec<BigInt> = h.iter().map(|y| y / &scale).collect();
                if nilpotent_part_kills(&small_matrix(&a), &residues(&x, p), p) {
                    return fail(format!("valuation at {p} is not yet stable at level {level}"));
                }
            }
            Valuation::AtLeast(k) => {
                let g = gcd_all(&d.heights(s.level_cutoff)?);
                if valuation(&g, p) < *k {
                    return fail(format!("valuation at {p} is below {k} at level {}", s.level_cutoff));
                }
            }
        }
    }
    Ok(())
}

/// Which side of a comparison a witness refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

/// `n` divides the unit on `member`'s side (at `level`) but not on the other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorWitness {
    pub n: u64,
    pub member: Side,
    pub level: usize,
    pub non_member: ResidueCycle,
}

impl DivisorWitness {
    pub fn verify(&self, a: &DimGroup, b: &DimGroup) -> Result<()> {
        let (yes, no) = match self.member {
            Side::A => (a, b),
            Side::B => (b, a),
        };
        let h = yes.diagram().heights(self.level)?;
        let nb = BigInt::from(self.n);
        if !h.iter().all(|x| (x % &nb).is_zero()) {
            return Err(Error::Certificate(format!(
                "{} does not divide the heights at level {}",
                self.n, self.level
            )));
        }
        if self.non_member.modulus != self.n {
            return Err(Error::Certificate("residue cycle uses a different modulus".into()));
        }
        verify_residue_cycle(no, &self.non_member)
    }
}

#[derive(Clone, Debug)]
pub enum SpectraComparison {
    Equal {
        a: SupernaturalTruncation,
        b: SupernaturalTruncation,
    },
    Distinct {
        n: u64,
        witness: Option<DivisorWitness>,
    },
    Unknown {
        a: SupernaturalTruncation,
        b: SupernaturalTruncation,
    },
}

/// Smallest `v` certified on each side; `None` means unbounded.
fn certified_gap(x: &Valuation, y: &Valuation) -> Option<Option<u32>> {
    use Valuation::*;
    match (x, y) {
        (Exact { v: a, .. }, Exact { v: b, .. }) => Some((a != b).then(|| *a.min(b))),
        (Exact { v, .. }, Infinite(_)) | (Infinite(_), Exact { v, .. }) => Some(Some(*v)),
        (Infinite(_), Infinite(_)) => Some(None),
        (Exact { v, .. }, AtLeast(k)) | (AtLeast(k), Exact { v, .. }) if k > v => Some(Some(*v)),
        _ => None,
    }
}

/// Compares divisor sets, returning the least separating `n` when they differ.
pub fn spectra_equal(a: &DimGroup, b: &DimGroup, bounds: &SpectrumBounds) -> Result<SpectraComparison> {
    let sa = periodic_spectrum(a, bounds)?;
    let sb = periodic_spectrum(b, bounds)?;
    let mut undecided = false;
    let mut best: Option<u64> = None;
    for (ea, eb) in sa.entries.iter().zip(&sb.entries) {
        match certified_gap(&ea.valuation, &eb.valuation) {
            None => undecided = true,
            Some(None) => {}
            Some(Some(v)) => {
                if let Some(n) = ea.p.checked_pow(v + 1) {
                    best = Some(best.map_or(n, |b| b.min(n)));
                }
            }
        }
    }
    if let Some(n) = best {
        let witness = divisor_witness(a, b, n, bounds.depth)?;
        return Ok(SpectraComparison::Distinct { n, witness });
    }
    Ok(if undecided {
        SpectraComparison::Unknown { a: sa, b: sb }
    } else {
        SpectraComparison::Equal { a: sa, b: sb }
    })
}

/// Builds the certificate that `n` separates the divisor sets, if both sides
/// can be certified.
pub fn divisor_witness(a: &DimGroup, b: &DimGroup, n: u64, depth: usize) -> Result<Option<DivisorWitness>> {
    let da = divides_unit(a, n, depth)?;
    let db = divides_unit(b, n, depth)?;
    Ok(match (da, db) {
        (Divisibility::Yes { level }, Divisibility::No { certificate }) => Some(DivisorWitness {
            n,
            member: Side::A,
            level,
            non_member: certificate,
        }),
        (Divisibility::No { certificate }, Divisibility::Yes { level }) => Some(DivisorWitness {
            n,
            member: Side::B,
            level,
            non_member: certificate,
        }),
        _ => None,
    })
}

/// The image of `K_0` under the normalized trace, as a subgroup of the reals.
#[derive(Clone, Debug)]
pub enum TraceImageGroup {
    /// `(1/q) Z[1/p : p in divisible_primes]`, with `q` coprime to those primes.
    Rational {
        denominator: BigInt,
        divisible_primes: Vec<u64>,
    },
    /// `Z[1/lambda] W` where `W` is spanned by `generators` in `Q(lambda)`.
    Field {
        field: NumberField,
        minpoly: Vec<BigInt>,
        generators: Vec<FieldElem>,
    },
    Undetermined {
        reason: String,
        approximations: Vec<f64>,
    },
}

impl fmt::Display for TraceImageGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceImageGroup::Rational { denominator, divisible_primes } => {
                let base = if denominator.is_one() {
                    "Z".to_string()
                } else {
                    format!("(1/{denominator})Z")
                };
                if divisible_primes.is_empty() {
                    write!(f, "{base}")
                } else {
                    let ps: Vec<String> = divisible_primes.iter().map(u64::to_string).collect();
                    write!(f, "{base}[1/{}]", ps.join(","))
                }
            }
            TraceImageGroup::Field { field, generators, .. } => {
                let gs: Vec<String> = generators.iter().map(|g| g.to_string()).collect();
                write!(f, "Z[1/t]<{}> in Q[t]/({})", gs.join(", "), field.minpoly())
            }
            TraceImageGroup::Undetermined { reason, .. } => write!(f, "undetermined ({reason})"),
        }
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn trace_image_group(dg: &DimGroup) -> Result<TraceImageGroup> {
    let pd = match dg.perron_data() {
        Ok(pd) => pd,
        Err(e) if e.is_capability() => {
            return Ok(TraceImageGroup::Undetermined {
                reason: e.to_string(),
                approximations: approximate_traces(dg),
            })
        }
        Err(e) => return Err(e),
    };
    let k = &pd.field;
    let n = dg.diagram().vertex_count(1)?;
    let generators: Vec<FieldElem> = (0..n)
        .map(|v| Ok(dg.trace_value(&dg.basis(1, v)?)?.value))
        .collect::<Result<_>>()?;
    if k.degree() == 1 {
        let lambda = pd.minpoly[0].abs();
        let lam = lambda
            .to_u64()
            .ok_or_else(|| Error::Capability("Perron root exceeds 64 bits".into()))?;
        let rats: Vec<BigRational> = generators.iter().map(|g| g.as_rational().unwrap()).collect();
        let num = rats.iter().fold(BigInt::zero(), |g, r| g.gcd(r.numer()));
        let den = rats.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let step = BigRational::new(num, den);
        debug_assert!(step.numer().is_one(), "the unit has trace 1");
        let divisible_primes = prime_factors(lam);
        let mut q = step.denom().clone();
        for &p in &divisible_primes {
            let pb = BigInt::from(p);
            while (&q % &pb).is_zero() {
                q /= &pb;
            }
        }
        return Ok(TraceImageGroup::Rational { denominator: q, divisible_primes });
    }
    Ok(TraceImageGroup::Field {
        field: k.clone(),
        minpoly: pd.minpoly.clone(),
        generators,
    })
}

/// Floating-point traces of the level-1 basis, for display when the exact
/// machinery is out of range.
fn approximate_traces(dg: &DimGroup) -> Vec<f64> {
    let Some(a) = dg.diagram().stationary_matrix() else {
        return Vec::new();
    };
    let n = a.rows();
    let af: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).iter().map(|x| x.to_f64().unwrap_or(f64::MAX)).collect()).collect();
    let mut v = vec![1.0; n];
    for _ in 0..500 {
        let mut w = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                w[j] += v[i] * af[i][j];
            }
        }
        let s: f64 = w.iter().sum();
        v = w.iter().map(|x| x / s).collect();
    }
    let h1: Vec<f64> = dg.diagram().heights(1).map(|h| h.iter().map(|x| x.to_f64().unwrap()).collect()).unwrap_or_default();
    let c: f64 = v.iter().zip(&h1).map(|(x, y)| x * y).sum();
    v.iter().map(|x| x / c).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceImageComparison {
    pub answer: Answer,
    pub reason: String,
}

fn coords(x: &FieldElem, d: usize) -> Vec<BigRational> {
    (0..d).map(|i| x.poly().coeff(i)).collect()
}

fn scaled_integer_coords(xs: &[Vec<BigRational>], den: &BigInt) -> Vec<Vec<BigInt>> {
    xs.iter()
        .map(|v| v.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect())
        .collect()
}

enum Inclusion {
    Yes,
    No(String),
    Unknown,
}

/// Whether `Z[1/lambda] W_a` is contained in `Z[1/lambda] W_b`.
fn field_inclusion(k: &NumberField, gens_a: &[FieldElem], gens_b: &[FieldElem], norm: &BigInt, depth: usize) -> Inclusion {
    let d = k.degree();
    let lambda = k.generator();
    let cb: Vec<Vec<BigRational>> = gens_b.iter().map(|g| coords(g, d)).collect();
    for w in gens_a {
        let mut x = w.clone();
        let mut found = false;
        for _ in 0..=depth {
            let cx = coords(&x, d);
            let den = cb
                .iter()
                .chain(std::iter::once(&cx))
                .flatten()
                .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
            let all = scaled_integer_coords(&cb, &den);
            let target = scaled_integer_coords(std::slice::from_ref(&cx), &den).remove(0);
            let basis = lattice_basis(&all);
            if lattice_contains(&basis, &target) {
                found = true;
                break;
            }
            x = k.mul(&x, &lambda);
        }
        if found {
            continue;
        }
        // Coordinates of w in a Z-basis of W_b. Multiplication by lambda acts
        // on those coordinates by an integer matrix of determinant +-N(lambda),
        // so a denominator prime not dividing N(lambda) can never clear.
        let den = cb.iter().flatten().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let basis_int = lattice_basis(&scaled_integer_coords(&cb, &den));
        let basis_q: Vec<Vec<BigRational>> = to_rational_rows(&basis_int)
            .into_iter()
            .map(|r| r.into_iter().map(|c| c / BigRational::from_integer(den.clone())).collect())
            .collect();
        let Some(sol) = solve_q(&basis_q, &coords(w, d)) else {
            return Inclusion::No(format!("{w} lies outside the rational span"));
        };
        let sol_den = sol.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        if norm.abs().is_one() && !sol_den.is_one() {
            return Inclusion::No(format!("{w} is not in the trace image (lambda is a unit)"));
        }
        if let Some(p) = sol_den.to_u64().map(prime_factors).and_then(|ps| {
            ps.into_iter().find(|&p| !(norm % BigInt::from(p)).is_zero())
        }) {
            return Inclusion::No(format!("{w} needs denominator {p}, which multiplication by lambda cannot clear"));
        }
        return Inclusion::Unknown;
    }
    Inclusion::Yes
}

/// Unital order isomorphism of trace images, i.e. equality as subgroups of the reals.
pub fn trace_images_isomorphic(a: &TraceImageGroup, b: &TraceImageGroup, depth: usize) -> TraceImageComparison {
    use TraceImageGroup::*;
    let verdict = |answer, reason: &str| TraceImageComparison { answer, reason: reason.to_string() };
    match (a, b) {
        (Rational { denominator: qa, divisible_primes: pa }, Rational { denominator: qb, divisible_primes: pb }) => {
            if qa == qb && pa == pb {
                verdict(Answer::Yes, &format!("both images equal {a}"))
            } else {
                verdict(Answer::No, &format!("rational images differ: {a} vs {b}"))
            }
        }
        (Rational { .. }, Field { .. }) | (Field { .. }, Rational { .. }) => verdict(
            Answer::No,
            "one image is rational, the other contains irrational traces",
        ),
        (Field { field: ka, minpoly: ma, generators: ga }, Field { minpoly: mb, generators: gb, field: kb }) => {
            if ma != mb {
                if ka.degree() != kb.degree() {
                    return verdict(
                        Answer::No,
                        &format!("images span fields of degree {} and {}", ka.degree(), kb.degree()),
                    );
                }
                return verdict(Answer::Unknown { depth }, "images lie in different presentations of number fields");
            }
            let norm = if ma.len() % 2 == 0 { -ma[0].clone() } else { ma[0].clone() };
            let ab = field_inclusion(ka, ga, gb, &norm, depth);
            let ba = field_inclusion(ka, gb, ga, &norm, depth);
            match (ab, ba) {
                (Inclusion::Yes, Inclusion::Yes) => verdict(Answer::Yes, "mutual inclusion of generators"),
                (Inclusion::No(r), _) | (_, Inclusion::No(r)) => verdict(Answer::No, &r),
                _ => verdict(Answer::Unknown { depth }, "membership undecided within depth"),
            }
        }
        _ => verdict(Answer::Unknown { depth }, "a trace image is undetermined"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::OrderedBratteliDiagram;

    fn group(lists: Vec<Vec<usize>>, root: usize) -> DimGroup {
        DimGroup::new(&OrderedBratteliDiagram::stationary_from_lists(lists, root).unwrap())
    }

    fn odometer(k: usize) -> DimGroup {
        group(vec![vec![0; k]], k)
    }

    fn fibonacci() -> DimGroup {
        group(vec![vec![0, 1], vec![0]], 1)
    }

    #[test]
    fn divisibility_examples() {
        let d = odometer(2);
        assert_eq!(divides_unit(&d, 8, 10).unwrap(), Divisibility::Yes { level: 3 });
        assert_eq!(divides_unit(&d, 1, 10).unwrap(), Divisibility::Yes { level: 0 });
        match divides_unit(&d, 3, 10).unwrap() {
            Divisibility::No { certificate } => {
                assert_eq!(certificate.states, vec![vec![2], vec![1]]);
                verify_residue_cycle(&d, &certificate).unwrap();
            }
            other => panic!("{other:?}"),
        }
        assert!(divides_unit(&d, 0, 10).is_err());
    }

    #[test]
    fn tampered_cycle_is_rejected() {
        let d = odometer(2);
        let Divisibility::No { mut certificate } = divides_unit(&d, 3, 10).unwrap() else {
            panic!()
        };
        certificate.states[1] = vec![2];
        assert!(verify_residue_cycle(&d, &certificate).is_err());
    }

    #[test]
    fn spectra() {
        let b = SpectrumBounds::default();
        let s = periodic_spectrum(&odometer(2), &b).unwrap();
        assert!(matches!(s.get(2), Some(Valuation::Infinite(_))));
        assert!(matches!(s.get(3), Some(Valuation::Exact { v: 0, .. })));
        verify_spectrum(&odometer(2), &s).unwrap();
        let s = periodic_spectrum(&fibonacci(), &b).unwrap();
        assert!(s.entries.iter().all(|e| matches!(e.valuation, Valuation::Exact { v: 0, .. })));
        let s = periodic_spectrum(&odometer(3), &b).unwrap();
        assert!(matches!(s.get(3), Some(Valuation::Infinite(_))));
        assert!(matches!(s.get(2), Some(Valuation::Exact { v: 0, .. })));
        // Finite positive valuation: A = [[1,1],[1,1]] with root multiplicity 3
        // gives heights 3 * 2^(m-1) (1,1): 2-adic part infinite, 3-adic part 1.
        let g = group(vec![vec![0, 1], vec![0, 1]], 3);
        let s = periodic_spectrum(&g, &b).unwrap();
        assert!(matches!(s.get(3), Some(Valuation::Exact { v: 1, .. })));
        assert!(matches!(s.get(2), Some(Valuation::Infinite(_))));
        verify_spectrum(&g, &s).unwrap();
    }

    #[test]
    fn spectrum_serialization() {
        let s = periodic_spectrum(&odometer(2), &SpectrumBounds { prime_cutoff: 3, ..Default::default() }).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"prime_cutoff":3,"level_cutoff":0,"entries":[{"p":2,"v":"inf","cert":{"span":1,"multipliers":[1]}},{"p":3,"v":0,"cert":{"level":1}}]}"#
        );
        let back: SupernaturalTruncation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn spectra_comparisons() {
        let b = SpectrumBounds::default();
        let distinct = |x: &DimGroup, y: &DimGroup| match spectra_equal(x, y, &b).unwrap() {
            SpectraComparison::Distinct { n, witness } => {
                witness.as_ref().unwrap().verify(x, y).unwrap();
                n
            }
            other => panic!("{other:?}"),
        };
        assert_eq!(distinct(&odometer(2), &odometer(3)), 2);
        assert_eq!(distinct(&odometer(2), &fibonacci()), 2);
        assert_eq!(distinct(&fibonacci(), &odometer(3)), 3);
        assert!(matches!(
            spectra_equal(&odometer(2), &odometer(4), &b).unwrap(),
            SpectraComparison::Equal { .. }
        ));
    }

    #[test]
    fn trace_images() {
        let t2 = trace_image_group(&odometer(2)).unwrap();
        assert_eq!(t2.to_string(), "Z[1/2]");
        let t4 = trace_image_group(&odometer(4)).unwrap();
        let t3 = trace_image_group(&odometer(3)).unwrap();
        assert_eq!(t3.to_string(), "Z[1/3]");
        assert_eq!(trace_images_isomorphic(&t2, &t4, 10).answer, Answer::Yes);
        assert_eq!(trace_images_isomorphic(&t2, &t3, 10).answer, Answer::No);
        let tf = trace_image_group(&fibonacci()).unwrap();
        assert_eq!(trace_images_isomorphic(&tf, &t2, 10).answer, Answer::No);
        assert_eq!(trace_images_isomorphic(&tf, &tf, 10).answer, Answer::Yes);
        // Another presentation of the golden-mean group: telescoped squares.
        let sq = group(vec![vec![0, 0, 1], vec![0, 1]], 1);
        let ts = trace_image_group(&sq).unwrap();
        assert!(matches!(ts, TraceImageGroup::Field { .. }));
    }
}
