//! The dimension group `K^0(X, alpha) = lim (Z^{V_n}, M_n)` with its positive
//! cone, order unit, and (for primitive stationary diagrams) its unique
//! normalized trace.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bigint_serde;
use crate::bratteli::OrderedBratteliDiagram;
use crate::error::{Error, Result};
use crate::linalg::{gcd_all, IntMatrix};
use crate::numfield::{FieldElem, NumberField};
use crate::poly::{charpoly, factor_squarefree_monic, QPoly};

/// Largest number-field degree handled by the exact trace machinery.
pub const MAX_FIELD_DEGREE: usize = 8;

/// Representative of a dimension-group element: a vector over the vertices of one level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DgElement {
    pub level: usize,
    #[serde(with = "bigint_serde::vec")]
    pub vector: Vec<BigInt>,
}

impl DgElement {
    pub fn new(level: usize, vector: Vec<BigInt>) -> Self {
        DgElement { level, vector }
    }

    pub fn from_i64(level: usize, v: &[i64]) -> Self {
        DgElement::new(level, v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn is_zero_vector(&self) -> bool {
        self.vector.iter().all(Zero::is_zero)
    }

    pub fn neg(&self) -> DgElement {
        DgElement::new(self.level, self.vector.iter().map(|x| -x).collect())
    }
}

/// Three-valued answer of a bounded or exact decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    Unknown { depth: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Positivity {
    /// `level`, when present, carries a nonnegative representative.
    Positive { level: Option<usize> },
    Zero,
    Negative { level: Option<usize> },
    NotComparable,
    Unknown { depth: usize },
}

impl Positivity {
    pub fn is_positive(&self) -> bool {
        matches!(self, Positivity::Positive { .. })
    }
}

/// Perron–Frobenius data of a primitive stationary incidence matrix.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub charpoly: Vec<BigInt>,
    /// Monic irreducible integer polynomial of the Perron root.
    pub minpoly: Vec<BigInt>,
    pub field: NumberField,
    /// Left eigenvector `v A = lambda v`, last coordinate 1.
    pub eigenvector: Vec<FieldElem>,
    /// `<v, h_1>`; dividing by it normalizes the trace of the unit to 1.
    pub normalizer: FieldElem,
}

impl PerronData {
    pub fn lambda(&self) -> FieldElem {
        self.field.generator()
    }
}

/// Exact trace of an element together with its sign.
#[derive(Clone, Debug)]
pub struct TraceValue {
    pub value: FieldElem,
    pub sign: Ordering,
}

/// A dimension group together with its presentation.
#[derive(Debug)]
pub struct DimGroup {
    diagram: OrderedBratteliDiagram,
    root: IntMatrix,
    steps: Vec<IntMatrix>,
    perron: OnceLock<Result<PerronData>>,
}

impl Clone for DimGroup {
    fn clone(&self) -> Self {
        DimGroup::new(&self.diagram)
    }
}

impl DimGroup {
    pub fn new(d: &OrderedBratteliDiagram) -> Self {
        let root = d.incidence(0).expect("level 1 always exists");
        let steps = d
            .tables()
            .iter()
            .enumerate()
            .map(|(i, t)| t.incidence(d.vertex_count(i + 1).unwrap()))
            .collect();
        DimGroup {
            diagram: d.clone(),
            root,
            steps,
            perron: OnceLock::new(),
        }
    }

    pub fn diagram(&self) -> &OrderedBratteliDiagram {
        &self.diagram
    }

    pub fn is_stationary(&self) -> bool {
        self.diagram.is_stationary()
    }

    /// Incidence matrix of the transition `n -> n+1`.
    pub fn matrix(&self, n: usize) -> Result<&IntMatrix> {
        self.diagram.check_level(n + 1)?;
        Ok(match n {
            0 => &self.root,
            _ if self.is_stationary() => &self.steps[0],
            _ => &self.steps[n - 1],
        })
    }

    /// Product of the incidence matrices from level `from` to level `to`.
    pub fn connecting(&self, from: usize, to: usize) -> Result<IntMatrix> {
        if to < from {
            return Err(Error::InvalidArgument(format!("cannot connect level {from} down to {to}")));
        }
        let mut m = IntMatrix::identity(self.diagram.vertex_count(from)?);
        for n in from..to {
            m = self.matrix(n)?.mul(&m).unwrap();
        }
        Ok(m)
    }

    pub fn check_element(&self, g: &DgElement) -> Result<()> {
        let n = self.diagram.vertex_count(g.level)?;
        if g.vector.len() != n {
            return Err(Error::InvalidArgument(format!(
                "level {} has {n} vertices but the vector has {} entries",
                g.level,
                g.vector.len()
            )));
        }
        Ok(())
    }

    /// The order unit represented at level `m`.
    pub fn unit(&self, m: usize) -> Result<DgElement> {
        Ok(DgElement::new(m, self.diagram.heights(m)?))
    }

    /// Basis vector `e_v` at level `m`.
    pub fn basis(&self, m: usize, v: usize) -> Result<DgElement> {
        let n = self.diagram.vertex_count(m)?;
        if v >= n {
            return Err(Error::InvalidArgument(format!("no vertex {v} at level {m}")));
        }
        let mut x = vec![BigInt::zero(); n];
        x[v] = BigInt::one();
        Ok(DgElement::new(m, x))
    }

    pub fn push(&self, g: &DgElement, to: usize) -> Result<DgElement> {
        self.check_element(g)?;
        if to < g.level {
            return Err(Error::InvalidArgument(format!(
                "cannot push a level-{} element down to level {to}",
                g.level
            )));
        }
        self.diagram.check_level(to)?;
        let mut v = g.vector.clone();
        for n in g.level..to {
            v = self.matrix(n)?.mul_vec(&v);
        }
        Ok(DgElement::new(to, v))
    }

    fn common(&self, a: &DgElement, b: &DgElement) -> Result<(DgElement, DgElement)> {
        let l = a.level.max(b.level);
        Ok((self.push(a, l)?, self.push(b, l)?))
    }

    pub fn add(&self, a: &DgElement, b: &DgElement) -> Result<DgElement> {
        let (a, b) = self.common(a, b)?;
        Ok(DgElement::new(a.level, a.vector.iter().zip(&b.vector).map(|(x, y)| x + y).collect()))
    }

    pub fn sub(&self, a: &DgElement, b: &DgElement) -> Result<DgElement> {
        self.add(a, &b.neg())
    }

    pub fn scale(&self, a: &DgElement, k: &BigInt) -> DgElement {
        DgElement::new(a.level, a.vector.iter().map(|x| x * k).collect())
    }

    /// Whether `g` is zero in the limit group.
    ///
    /// Exact for stationary diagrams: the kernels of `A^k` stop growing by
    /// `k = |V|`, so pushing `|V|` levels past level 1 decides the question.
    pub fn is_zero(&self, g: &DgElement, depth: usize) -> Result<Answer> {
        self.check_element(g)?;
        if g.is_zero_vector() {
            return Ok(Answer::Yes);
        }
        if self.is_stationary() {
            let start = g.level.max(1);
            let n = self.diagram.vertex_count(1)?;
            for l in start..=start + n {
                if self.push(g, l)?.is_zero_vector() {
                    return Ok(Answer::Yes);
                }
            }
            return Ok(Answer::No);
        }
        let top = self.bounded_top(g.level, depth);
        let mut x = g.clone();
        while x.level < top {
            x = self.push(&x, x.level + 1)?;
            if x.is_zero_vector() {
                return Ok(Answer::Yes);
            }
        }
        Ok(Answer::Unknown { depth })
    }

    fn bounded_top(&self, level: usize, depth: usize) -> usize {
        let top = level.saturating_add(depth);
        match self.diagram.last_level() {
            Some(last) => top.min(last).max(level),
            None => top,
        }
    }

    pub fn equal(&self, a: &DgElement, b: &DgElement, depth: usize) -> Result<Answer> {
        self.is_zero(&self.sub(a, b)?, depth)
    }

    /// Position of `g` relative to the positive cone.
    ///
    /// For primitive stationary diagrams the verdict is exact and read off
    /// the sign of the trace; otherwise representatives are pushed up to
    /// `depth` levels looking for one of constant sign.
    pub fn is_positive(&self, g: &DgElement, depth: usize) -> Result<Positivity> {
        self.check_element(g)?;
        if self.is_zero(g, depth)? == Answer::Yes {
            return Ok(Positivity::Zero);
        }
        if self.is_stationary() {
            match self.perron_data() {
                Ok(_) => {
                    let tv = self.trace_value(g)?;
                    let search = depth.max(64);
                    return Ok(match tv.sign {
                        Ordering::Greater => Positivity::Positive {
                            level: self.sign_level(g, search, true)?,
                        },
                        Ordering::Less => Positivity::Negative {
                            level: self.sign_level(g, search, false)?,
                        },
                        Ordering::Equal => Positivity::NotComparable,
                    });
                }
                Err(e) if e.is_capability() || matches!(e, Error::Precondition(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let top = self.bounded_top(g.level, depth);
        let mut x = g.clone();
        loop {
            if x.vector.iter().all(|c| !c.is_negative()) {
                return Ok(Positivity::Positive { level: Some(x.level) });
            }
            if x.vector.iter().all(|c| !c.is_positive()) {
                return Ok(Positivity::Negative { level: Some(x.level) });
            }
            if x.level >= top {
                return Ok(Positivity::Unknown { depth });
            }
            x = self.push(&x, x.level + 1)?;
        }
    }

    /// First level (within `search` steps) where `g` (or `-g`) has a nonnegative representative.
    fn sign_level(&self, g: &DgElement, search: usize, positive: bool) -> Result<Option<usize>> {
        let mut x = if positive { g.clone() } else { g.neg() };
        for _ in 0..=search {
            if x.vector.iter().all(|c| !c.is_negative()) {
                return Ok(Some(x.level));
            }
            x = self.push(&x, x.level + 1)?;
        }
        Ok(None)
    }

    /// `gcd(heights(m))` for `m = 1..=up_to`.
    pub fn gcd_chain(&self, up_to: usize) -> Result<Vec<BigInt>> {
        self.diagram.check_level(up_to)?;
        let mut h = self.diagram.heights(0)?;
        let mut out = Vec::with_capacity(up_to);
        for n in 0..up_to {
            h = self.matrix(n)?.mul_vec(&h);
            out.push(gcd_all(&h));
        }
        Ok(out)
    }

    /// Rank of `A^{|V|}` for a stationary diagram: the rank of the limit group.
    pub fn eventual_rank(&self) -> Option<usize> {
        let a = self.diagram.stationary_matrix()?;
        Some(a.pow(a.rows()).rank())
    }

    /// Perron data, computed once and cached.
    pub fn perron_data(&self) -> Result<&PerronData> {
        self.perron
            .get_or_init(|| compute_perron(&self.diagram))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// The normalized trace of `g`, exactly.
    pub fn trace_value(&self, g: &DgElement) -> Result<TraceValue> {
        self.check_element(g)?;
        let pd = self.perron_data()?;
        let k = &pd.field;
        let value = if g.level == 0 {
            k.from_int(&g.vector[0])
        } else {
            let mut pairing = k.zero();
            for (vi, gi) in pd.eigenvector.iter().zip(&g.vector) {
                pairing = k.add(&pairing, &k.scale(vi, &BigRational::from_integer(gi.clone())));
            }
            let denom = k.mul(&pd.normalizer, &k.pow(&pd.lambda(), (g.level - 1) as u32));
            k.div(&pairing, &denom).expect("normalizer is positive")
        };
        let sign = k.sign(&value);
        Ok(TraceValue { value, sign })
    }
}

fn compute_perron(d: &OrderedBratteliDiagram) -> Result<PerronData> {
    let a = d
        .stationary_matrix()
        .ok_or_else(|| Error::Precondition("trace data needs a stationary diagram".into()))?;
    if !d.validate(1).primitive.passed {
        return Err(Error::Precondition("trace data needs a primitive incidence matrix".into()));
    }
    let cp = charpoly(&a);
    let sf = QPoly::from_ints(&cp).squarefree();
    let deg = sf.degree().unwrap_or(0);
    if deg > MAX_FIELD_DEGREE {
        return Err(Error::Capability(format!(
            "squarefree characteristic polynomial has degree {deg}, above the supported {MAX_FIELD_DEGREE}"
        )));
    }
    let sfz = sf.to_integer().expect("squarefree part of a monic integer polynomial is integral");

    // Isolate the largest real root of the squarefree part in (lo, hi].
    let bound = sf.root_bound();
    let (mut lo, mut hi) = (-bound.clone(), bound);
    let two = BigRational::from_integer(2.into());
    while sf.count_roots(&lo, &hi) > 1 {
        let mid = (&lo + &hi) / &two;
        if sf.count_roots(&mid, &hi) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let factors = factor_squarefree_monic(&sfz)?;
    let minpoly = factors
        .into_iter()
        .find(|f| QPoly::from_ints(f).count_roots(&lo, &hi) == 1)
        .expect("one factor carries the largest root");
    let fq = QPoly::from_ints(&minpoly);
    let field = if minpoly.len() == 2 {
        let root = BigRational::from_integer(-minpoly[0].clone());
        NumberField::new(fq, root.clone(), root)
    } else {
        let width = BigRational::new(1.into(), 16.into());
        while &hi - &lo > width {
            let mid = (&lo + &hi) / &two;
            if fq.sign_at(&mid) == fq.sign_at(&hi) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        NumberField::new(fq, lo, hi)
    };

    let eigenvector = left_eigenvector(&a, &field)?;
    let h1 = d.heights(1)?;
    let mut normalizer = field.zero();
    for (vi, hi) in eigenvector.iter().zip(&h1) {
        normalizer = field.add(&normalizer, &field.scale(vi, &BigRational::from_integer(hi.clone())));
    }
    Ok(PerronData {
        charpoly: cp,
        minpoly,
        field,
        eigenvector,
        normalizer,
    })
}

/// Solves `v (A - lambda I) = 0` over the field, normalized so the last entry is 1.
fn left_eigenvector(a: &IntMatrix, k: &NumberField) -> Result<Vec<FieldElem>> {
    let n = a.rows();
    let lambda = k.generator();
    // Row i of the system is column i of A - lambda I.
    let mut m: Vec<Vec<FieldElem>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = k.from_int(a.get(j, i));
                    if i == j { k.sub(&e, &lambda) } else { e }
                })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..n).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = k.inv(&m[r][c]).unwrap();
        m[r] = m[r].iter().map(|x| k.mul(x, &inv)).collect();
        for i in 0..n {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = k.sub(x, &k.mul(&f, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return Err(Error::Precondition(format!(
            "Perron eigenspace has dimension {}, expected 1",
            free.len()
        )));
    }
    let f = free[0];
    let mut v = vec![k.zero(); n];
    v[f] = k.one();
    for (row, &c) in pivots.iter().enumerate() {
        v[c] = k.neg(&m[row][f]);
    }
    let last = v[n - 1].clone();
    let v: Vec<FieldElem> = v.iter().map(|x| k.div(x, &last).expect("Perron vector has no zero entry")).collect();

    for j in 0..n {
        let mut lhs = k.zero();
        for (i, vi) in v.iter().enumerate() {
            lhs = k.add(&lhs, &k.scale(vi, &BigRational::from_integer(a.get(i, j).clone())));
        }
        assert_eq!(lhs, k.mul(&lambda, &v[j]), "eigenvector check failed");
    }
    if let Some(i) = v.iter().position(|x| k.sign(x) != Ordering::Greater) {
        return Err(Error::Precondition(format!("eigenvector entry {i} is not positive")));
    }
    Ok(v)
}
