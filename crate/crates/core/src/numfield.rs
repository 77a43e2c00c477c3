//! Exact arithmetic in a real number field `Q(lambda) = Q[t]/(f)`, where `f`
//! is irreducible and `lambda` is the real root of `f` pinned by a rational
//! isolating interval.
//!
//! Signs are decided exactly: zero is a syntactic test on reduced
//! representatives, and nonzero signs come from interval evaluation on a
//! bisected isolating interval. No floating point enters any decision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::QPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    minpoly: QPoly,
    lo: BigRational,
    hi: BigRational,
}

/// An element of a [`NumberField`], stored as a reduced polynomial in `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem(QPoly);

impl FieldElem {
    pub fn poly(&self) -> &QPoly {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Rational value when the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.0.degree() {
            None => Some(BigRational::zero()),
            Some(0) => Some(self.0.coeff(0)),
            _ => None,
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl NumberField {
    /// `minpoly` must be monic and irreducible over Q with exactly one root
    /// in `[lo, hi]` (or `lo == hi` equal to the root in degree one).
    pub fn new(minpoly: QPoly, lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(minpoly.lead().is_one());
        NumberField { minpoly, lo, hi }
    }

    pub fn minpoly(&self) -> &QPoly {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree().unwrap_or(0)
    }

    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn elem(&self, p: QPoly) -> FieldElem {
        FieldElem(p.rem(&self.minpoly))
    }

    pub fn from_rational(&self, q: BigRational) -> FieldElem {
        self.elem(QPoly::constant(q))
    }

    pub fn from_int(&self, n: &BigInt) -> FieldElem {
        self.from_rational(BigRational::from_integer(n.clone()))
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(QPoly::zero())
    }

    pub fn one(&self) -> FieldElem {
        self.from_rational(BigRational::one())
    }

    /// The generator `lambda`.
    pub fn generator(&self) -> FieldElem {
        self.elem(QPoly::t())
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem(a.0.add(&b.0))
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem(a.0.sub(&b.0))
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem(a.0.neg())
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.elem(a.0.mul(&b.0))
    }

    pub fn scale(&self, a: &FieldElem, k: &BigRational) -> FieldElem {
        FieldElem(a.0.scale(k))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &FieldElem) -> Option<FieldElem> {
        if a.is_zero() {
            return None;
        }
        let (g, s) = a.0.ext_gcd_mod(&self.minpoly);
        debug_assert!(g.degree() == Some(0), "minimal polynomial is not irreducible");
        Some(self.elem(s))
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
        Some(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElem, k: u32) -> FieldElem {
        (0..k).fold(self.one(), |acc, _| self.mul(&acc, a))
    }

    fn bisect(&self, lo: &mut BigRational, hi: &mut BigRational) {
        let mid = (&*lo + &*hi) / BigRational::from_integer(2.into());
        let s_lo = self.minpoly.sign_at(lo);
        match self.minpoly.sign_at(&mid) {
            Ordering::Equal => {
                // Only reachable in degree one, where lo == hi already.
                *lo = mid.clone();
                *hi = mid;
            }
            s if s == s_lo => *lo = mid,
            _ => *hi = mid,
        }
    }

    /// Exact sign of `a` at the distinguished real embedding.
    pub fn sign(&self, a: &FieldElem) -> Ordering {
        if a.is_zero() {
            return Ordering::Equal;
        }
        if self.lo == self.hi {
            return a.0.eval(&self.lo).cmp(&BigRational::zero());
        }
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        loop {
            let (a_lo, a_hi) = a.0.eval_interval(&lo, &hi);
            if a_lo.is_positive() {
                return Ordering::Greater;
            }
            if a_hi.is_negative() {
                return Ordering::Less;
            }
            self.bisect(&mut lo, &mut hi);
        }
    }

    pub fn cmp(&self, a: &FieldElem, b: &FieldElem) -> Ordering {
        self.sign(&self.sub(a, b))
    }

    /// A rational interval of width at most `width` containing the value of `a`.
    pub fn enclose(&self, a: &FieldElem, width: &BigRational) -> (BigRational, BigRational) {
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        loop {
            let (a_lo, a_hi) = a.0.eval_interval(&lo, &hi);
            if &(&a_hi - &a_lo) <= width {
                return (a_lo, a_hi);
            }
            self.bisect(&mut lo, &mut hi);
        }
    }

    /// Isolating interval for the generator refined to at most `width`.
    pub fn refine(&self, width: &BigRational) -> (BigRational, BigRational) {
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        while &(&hi - &lo) > width {
            self.bisect(&mut lo, &mut hi);
        }
        (lo, hi)
    }

    /// Floating point approximation, for display only.
    pub fn to_f64(&self, a: &FieldElem) -> f64 {
        let w = BigRational::new(1.into(), BigInt::from(10u64).pow(15));
        let (lo, hi) = self.enclose(a, &w);
        ((lo + hi) / BigRational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn golden() -> NumberField {
        NumberField::new(QPoly::from_i64(&[-1, -1, 1]), r(16, 10), r(17, 10))
    }

    #[test]
    fn golden_ratio_identities() {
        let k = golden();
        let phi = k.generator();
        // phi^2 = phi + 1
        assert_eq!(k.mul(&phi, &phi), k.add(&phi, &k.one()));
        let inv = k.inv(&phi).unwrap();
        assert_eq!(inv, k.sub(&phi, &k.one()));
        assert_eq!(k.sign(&k.sub(&phi, &k.from_rational(r(3, 2)))), Ordering::Greater);
        assert_eq!(k.sign(&k.sub(&phi, &k.from_rational(r(13, 8)))), Ordering::Less);
    }

    #[test]
    fn enclosure_width() {
        let k = golden();
        let w = r(1, 1_000_000_000);
        let (lo, hi) = k.enclose(&k.generator(), &w);
        assert!(hi - lo <= w);
        assert!((k.to_f64(&k.generator()) - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn rational_field() {
        let k = NumberField::new(QPoly::from_i64(&[-2, 1]), r(2, 1), r(2, 1));
        assert_eq!(k.generator().as_rational(), Some(r(2, 1)));
        assert_eq!(k.sign(&k.from_rational(r(-1, 3))), Ordering::Less);
    }
}
