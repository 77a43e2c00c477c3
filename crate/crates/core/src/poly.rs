//! Univariate polynomials over the rationals and over the integers.
//!
//! Coefficients are stored lowest degree first with no trailing zeros, so the
//! zero polynomial is the empty vector.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn from_ints(xs: &[BigInt]) -> Self {
        Self::new(xs.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn from_i64(xs: &[i64]) -> Self {
        Self::new(xs.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, k: &BigRational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.coeffs.clone();
        let lead_inv = d.lead().recip();
        let mut q = vec![BigRational::zero(); r.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap() * &lead_inv;
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            q[k] = c;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.div_rem(d).1
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        self.scale(&self.lead().recip())
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s)` with `g = gcd(self, m)` monic and `s * self = g (mod m)`.
    pub fn ext_gcd_mod(&self, m: &QPoly) -> (QPoly, QPoly) {
        let (mut r0, mut r1) = (m.clone(), self.rem(m));
        let (mut s0, mut s1) = (QPoly::zero(), QPoly::constant(BigRational::one()));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        let inv = r0.lead().recip();
        (r0.scale(&inv), s0.scale(&inv))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        self.eval(x).cmp(&BigRational::zero())
    }

    /// Bounds of `self` over the closed interval `[lo, hi]` by interval Horner.
    pub fn eval_interval(&self, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
        let mut a = BigRational::zero();
        let mut b = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            let ps = [&a * lo, &a * hi, &b * lo, &b * hi];
            let mn = ps.iter().min().unwrap().clone();
            let mx = ps.iter().max().unwrap().clone();
            a = mn + c;
            b = mx + c;
        }
        (a, b)
    }

    /// Squarefree part, monic.
    pub fn squarefree(&self) -> QPoly {
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    fn sturm_sequence(&self) -> Vec<QPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq.retain(|p| !p.is_zero());
        seq
    }

    fn sign_changes(seq: &[QPoly], x: &BigRational) -> usize {
        let signs: Vec<Ordering> = seq
            .iter()
            .map(|p| p.sign_at(x))
            .filter(|s| *s != Ordering::Equal)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        let seq = self.sturm_sequence();
        Self::sign_changes(&seq, a).saturating_sub(Self::sign_changes(&seq, b))
    }

    /// Cauchy bound: every real root lies in `(-bound, bound)`.
    pub fn root_bound(&self) -> BigRational {
        let lead = self.lead().abs();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / &lead)
            .max()
            .unwrap_or_else(BigRational::zero);
        m + BigRational::one()
    }

    /// Integer coefficients, if every coefficient is integral.
    pub fn to_integer(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                if mag.is_integer() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "({}/{})", mag.numer(), mag.denom())?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Characteristic polynomial `det(tI - A)` as integer coefficients, lowest
/// degree first (Faddeev-LeVerrier; every division is exact).
pub fn charpoly(a: &IntMatrix) -> Vec<BigInt> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "characteristic polynomial of a non-square matrix");
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = IntMatrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = a.mul(&m).unwrap();
        for i in 0..n {
            let v = next.get(i, i) + &coeffs[n - k + 1];
            next.set(i, i, v);
        }
        let am = a.mul(&next).unwrap();
        let trace: BigInt = (0..n).map(|i| am.get(i, i).clone()).sum();
        coeffs[n - k] = -(trace / BigInt::from(k));
        m = next;
    }
    coeffs
}

fn zpoly_eval(p: &[BigInt], x: &BigInt) -> BigInt {
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Exact division by a monic integer polynomial; `None` if the remainder is nonzero.
fn zpoly_div_monic(p: &[BigInt], d: &[BigInt]) -> Option<Vec<BigInt>> {
    let dd = d.len() - 1;
    if p.len() < d.len() {
        return None;
    }
    let mut r = p.to_vec();
    let mut q = vec![BigInt::zero(); p.len() - dd];
    for k in (0..q.len()).rev() {
        let c = r[k + dd].clone();
        if !c.is_zero() {
            for (j, dc) in d.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
        }
        q[k] = c;
    }
    r.iter().all(Zero::is_zero).then_some(q)
}

fn positive_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(BigInt::from(d));
            if d * d != n {
                large.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small)
}

const KRONECKER_BUDGET: u64 = 4_000_000;

/// Searches for a monic integer factor of degree `d` of the monic integer
/// polynomial `s` by Kronecker's method.
fn monic_factor_of_degree(s: &[BigInt], d: usize) -> Result<Option<Vec<BigInt>>> {
    // Candidate evaluation points ranked by how few divisors s(x) has.
    let mut points: Vec<(usize, BigInt, Vec<BigInt>)> = Vec::new();
    let span = 4 * d as i64 + 8;
    for x in -span..=span {
        let x = BigInt::from(x);
        let v = zpoly_eval(s, &x);
        if v.is_zero() {
            if d == 1 {
                return Ok(Some(vec![-x, BigInt::one()]));
            }
            continue;
        }
        if v.abs() > BigInt::from(10u64.pow(13)) {
            continue;
        }
        if let Some(divs) = positive_divisors(&v) {
            points.push((divs.len(), x, divs));
        }
    }
    if points.len() < d {
        return Err(Error::Capability("no usable evaluation points for factorization".into()));
    }
    points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.abs().cmp(&b.1.abs())));
    points.truncate(d);
    let xs: Vec<BigRational> = points.iter().map(|p| BigRational::from_integer(p.1.clone())).collect();
    let combos: u64 = points.iter().map(|p| 2 * p.0 as u64).product();
    if combos > KRONECKER_BUDGET {
        return Err(Error::Capability(format!(
            "factor search of degree {d} needs {combos} trials"
        )));
    }
    // Lagrange basis on the chosen points.
    let basis: Vec<QPoly> = (0..d)
        .map(|i| {
            let mut l = QPoly::constant(BigRational::one());
            for j in 0..d {
                if i != j {
                    let denom = (&xs[i] - &xs[j]).recip();
                    let lin = QPoly::new(vec![-&xs[j] * &denom, denom]);
                    l = l.mul(&lin);
                }
            }
            l
        })
        .collect();
    let x_pow_d: Vec<BigInt> = points.iter().map(|p| num_traits::pow(p.1.clone(), d)).collect();
    let choices: Vec<Vec<BigInt>> = points
        .iter()
        .map(|p| {
            p.2.iter()
                .flat_map(|v| [v.clone(), -v.clone()])
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; d];
    loop {
        let mut q = QPoly::zero();
        for i in 0..d {
            let y = &choices[i][idx[i]] - &x_pow_d[i];
            q = q.add(&basis[i].scale(&BigRational::from_integer(y)));
        }
        if let Some(mut g) = q.to_integer() {
            g.resize(d, BigInt::zero());
            g.push(BigInt::one());
            if zpoly_div_monic(s, &g).is_some() {
                return Ok(Some(g));
            }
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == d {
                return Ok(None);
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Factors a squarefree monic integer polynomial into monic irreducible
/// integer factors, smallest degree first.
pub fn factor_squarefree_monic(s: &[BigInt]) -> Result<Vec<Vec<BigInt>>> {
    let mut rest = s.to_vec();
    let mut factors = Vec::new();
    let mut d = 1;
    while rest.len() > 2 * d {
        match monic_factor_of_degree(&rest, d)? {
            Some(g) => {
                rest = zpoly_div_monic(&rest, &g).expect("factor divides");
                factors.push(g);
            }
            None => d += 1,
        }
    }
    if rest.len() > 1 {
        factors.push(rest);
    }
    Ok(factors)
}
