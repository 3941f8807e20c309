//! Truncated multivariate power series with exact rational coefficients.
//!
//! A [`FracSeries`] stores the terms of total degree at most its truncation
//! bound. Every result of arithmetic is exact up to the smaller bound of its
//! operands.

mod compose;
mod poly;
mod power;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::Exponent;

pub use compose::{invert_diagonal, substitute_diagonal};
pub use poly::Poly;
pub use power::{rational_power, rational_power_with_root, rational_root};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("series has zero constant term")]
    NotAUnit,
    #[error("constant {0} has no rational {1}-th root")]
    IrrationalRoot(String, u32),
    #[error("map {0} is not of the form t_i * unit")]
    NonDiagonal(usize),
    #[error("truncation order must be at least 1")]
    ZeroTruncation,
    #[error("bad coefficient {0:?}")]
    BadCoefficient(String),
    #[error("negative exponent {0}")]
    NegativeExponent(Exponent),
}

/// Total-degree bound `D` of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TruncationOrder(u32);

impl TruncationOrder {
    pub fn new(d: u32) -> Result<Self, SeriesError> {
        if d == 0 {
            Err(SeriesError::ZeroTruncation)
        } else {
            Ok(TruncationOrder(d))
        }
    }

    /// Bound of a derivative; may reach 0 (only the constant term is valid).
    pub fn lowered(self, k: u32) -> Self {
        TruncationOrder(self.0.saturating_sub(k))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_i64(self) -> i64 {
        self.0 as i64
    }
}

impl fmt::Display for TruncationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, SeriesError> {
    let t = s.trim();
    let bad = || SeriesError::BadCoefficient(s.to_string());
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// One serialized term: `{"exp":[5,1],"coef":"3/4"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub exp: Exponent,
    pub coef: String,
}

impl Term {
    pub fn new(exp: Exponent, coef: &Rational) -> Self {
        Term {
            exp,
            coef: coef.to_string(),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct FracSeries {
    r: usize,
    trunc: TruncationOrder,
    terms: BTreeMap<Exponent, Rational>,
}

impl fmt::Debug for FracSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} + O({})", self.trunc.0 + 1)
    }
}

impl fmt::Display for FracSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*t^{e}")?;
        }
        Ok(())
    }
}

impl FracSeries {
    pub fn zero(r: usize, trunc: TruncationOrder) -> Self {
        FracSeries {
            r,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(r: usize, trunc: TruncationOrder) -> Self {
        Self::constant(r, trunc, Rational::one())
    }

    pub fn constant(r: usize, trunc: TruncationOrder, c: Rational) -> Self {
        Self::monomial(r, trunc, Exponent::zero(r), c)
    }

    /// `c * t^e`, dropped if beyond the bound.
    pub fn monomial(r: usize, trunc: TruncationOrder, e: Exponent, c: Rational) -> Self {
        assert_eq!(e.dim(), r);
        assert!(e.is_nonnegative(), "negative exponent {e}");
        let mut s = Self::zero(r, trunc);
        s.add_term(e, c);
        s
    }

    /// The coordinate function `t_i` (0-based).
    pub fn var(r: usize, trunc: TruncationOrder, i: usize) -> Self {
        Self::monomial(r, trunc, Exponent::unit(r, i), Rational::one())
    }

    pub fn from_terms(
        r: usize,
        trunc: TruncationOrder,
        terms: impl IntoIterator<Item = (Exponent, Rational)>,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(r, trunc);
        for (e, c) in terms {
            if e.dim() != r {
                return Err(SeriesError::Dimension(r, e.dim()));
            }
            if !e.is_nonnegative() {
                return Err(SeriesError::NegativeExponent(e));
            }
            s.add_term(e, c);
        }
        Ok(s)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn trunc(&self) -> TruncationOrder {
        self.trunc
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, Rational> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Exponent> {
        self.terms.keys()
    }

    pub fn coeff(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Exponent::zero(self.r))
    }

    /// Least total degree of a stored term.
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().next().map(Exponent::total)
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.terms.iter().map(|(e, c)| Term::new(e.clone(), c)).collect()
    }

    /// Add `c * t^e` in place; terms beyond the bound are dropped.
    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() || e.total() > self.trunc.as_i64() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn set_coeff(&mut self, e: Exponent, c: Rational) {
        self.terms.remove(&e);
        self.add_term(e, c);
    }

    /// Drop terms above `d` and record the smaller bound.
    pub fn truncate(&self, d: TruncationOrder) -> Self {
        let d = d.min(self.trunc);
        FracSeries {
            r: self.r,
            trunc: d,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.total() <= d.as_i64())
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Reinterpret the stored terms with a new bound. Raising the bound asserts
    /// that no terms are missing below it, which is the caller's claim to make.
    pub fn with_trunc(&self, d: TruncationOrder) -> Self {
        let mut s = self.truncate(d);
        s.trunc = d;
        s
    }

    fn check_dim(&self, other: &Self) -> Result<(), SeriesError> {
        if self.r != other.r {
            Err(SeriesError::Dimension(self.r, other.r))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_dim(other).expect("dimension");
        let mut out = self.truncate(other.trunc);
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_dim(other).expect("dimension");
        let mut out = self.truncate(other.trunc);
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero(self.r, self.trunc);
        }
        FracSeries {
            r: self.r,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    /// Multiply by `c * t^e` (exact shift, same bound).
    pub fn mul_monomial(&self, e: &Exponent, c: &Rational) -> Self {
        let mut out = Self::zero(self.r, self.trunc);
        if c.is_zero() {
            return out;
        }
        for (f, d) in &self.terms {
            out.add_term(e + f, d * c);
        }
        out
    }

    /// Divide by `t^e`; `None` if some term is not divisible.
    pub fn div_monomial(&self, e: &Exponent) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (f, c) in &self.terms {
            let g = f - e;
            if !g.is_nonnegative() {
                return None;
            }
            terms.insert(g, c.clone());
        }
        let lost = e.total().max(0) as u32;
        Some(FracSeries {
            r: self.r,
            trunc: self.trunc.lowered(lost),
            terms,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        Ok(self.mul_to(other, self.trunc.min(other.trunc)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("dimension")
    }

    /// Product truncated at `d` (at most the operands' bounds is meaningful).
    pub fn mul_to(&self, other: &Self, d: TruncationOrder) -> Self {
        let dd = d.as_i64();
        let mut out = Self::zero(self.r, d);
        if self.is_zero() || other.is_zero() {
            return out;
        }
        let (na, da) = integer_parts(self);
        let (nb, db) = integer_parts(other);
        let ob = other.order().unwrap_or(0);
        let mut acc: HashMap<Exponent, BigInt> = HashMap::new();
        for (ea, ca) in &na {
            let ta = ea.total();
            if ta + ob > dd {
                // `na` is sorted graded-lex, so later terms are no better
                break;
            }
            for (eb, cb) in &nb {
                if ta + eb.total() > dd {
                    break;
                }
                let p = ca * cb;
                match acc.entry(ea + eb) {
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(p);
                    }
                    std::collections::hash_map::Entry::Occupied(mut o) => {
                        *o.get_mut() += p;
                    }
                }
            }
        }
        let den = &da * &db;
        for (e, c) in acc {
            if !c.is_zero() {
                out.terms.insert(e, Rational::new(c, den.clone()));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.r, self.trunc);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Derivative in coordinate `i` (0-based); the bound drops by one.
    pub fn partial_derivative(&self, i: usize) -> Self {
        assert!(i < self.r);
        let mut out = Self::zero(self.r, self.trunc.lowered(1));
        for (e, c) in &self.terms {
            let k = e.coords()[i];
            if k == 0 {
                continue;
            }
            let mut f = e.clone();
            f.coords_mut()[i] -= 1;
            out.add_term(f, c * int(k));
        }
        out
    }

    /// `t_i * d/dt_i`, which keeps the bound.
    pub fn euler_derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.r, self.trunc);
        for (e, c) in &self.terms {
            let k = e.coords()[i];
            if k != 0 {
                out.add_term(e.clone(), c * int(k));
            }
        }
        out
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(SeriesError::NotAUnit);
        }
        let root = c.recip();
        rational_power_with_root(self, -1, 1, root)
    }

    /// Homogeneous components indexed by total degree.
    pub(crate) fn graded(&self) -> Vec<Vec<(Exponent, Rational)>> {
        let mut out = vec![Vec::new(); self.trunc.get() as usize + 1];
        for (e, c) in &self.terms {
            out[e.total() as usize].push((e.clone(), c.clone()));
        }
        out
    }

    pub(crate) fn from_graded(r: usize, trunc: TruncationOrder, parts: Vec<Vec<(Exponent, Rational)>>) -> Self {
        let mut s = Self::zero(r, trunc);
        for part in parts {
            for (e, c) in part {
                s.add_term(e, c);
            }
        }
        s
    }

    /// Largest denominator-free size of a coefficient, for diagnostics.
    pub fn max_height(&self) -> u64 {
        self.terms
            .values()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    /// Terms whose exponent has total degree at most `d`, as an exact map.
    pub fn terms_up_to(&self, d: i64) -> BTreeMap<Exponent, Rational> {
        self.terms
            .iter()
            .filter(|(e, _)| e.total() <= d)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect()
    }

    /// Equality of all terms of degree at most `d`.
    pub fn agrees_up_to(&self, other: &Self, d: i64) -> bool {
        self.terms_up_to(d) == other.terms_up_to(d)
    }

    pub fn is_negative_free(&self) -> bool {
        self.terms.keys().all(Exponent::is_nonnegative)
    }

    pub fn abs_max_coeff(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Integer numerators over a common denominator, sorted graded-lex.
fn integer_parts(s: &FracSeries) -> (Vec<(Exponent, BigInt)>, BigInt) {
    let mut den = BigInt::one();
    for c in s.terms.values() {
        if !c.denom().is_one() {
            den = den.lcm(c.denom());
        }
    }
    let nums = s
        .terms
        .iter()
        .map(|(e, c)| (e.clone(), c.numer() * (&den / c.denom())))
        .collect();
    (nums, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(k: u32) -> TruncationOrder {
        TruncationOrder::new(k).unwrap()
    }

    fn s(r: usize, k: u32, terms: &[(&[i64], Rational)]) -> FracSeries {
        FracSeries::from_terms(
            r,
            d(k),
            terms.iter().map(|(e, c)| (Exponent::new(e.iter().copied()), c.clone())),
        )
        .unwrap()
    }

    #[test]
    fn products() {
        let t1 = FracSeries::var(2, d(5), 0);
        let t2 = FracSeries::var(2, d(5), 1);
        assert_eq!(t1.mul(&t2), s(2, 5, &[(&[1, 1], int(1))]));

        let a = s(2, 4, &[(&[0, 0], int(1)), (&[1, 0], int(1))]);
        let b = s(2, 4, &[(&[0, 0], int(1)), (&[1, 0], int(-1))]);
        assert_eq!(a.mul(&b), s(2, 4, &[(&[0, 0], int(1)), (&[2, 0], int(-1))]));

        let geo = FracSeries::from_terms(1, d(6), (0..=6).map(|k| (Exponent::new([k]), int(1)))).unwrap();
        let one_minus = s(1, 6, &[(&[0], int(1)), (&[1], int(-1))]);
        assert_eq!(geo.mul(&one_minus), FracSeries::one(1, d(6)));
    }

    #[test]
    fn truncation_is_min() {
        let a = s(1, 3, &[(&[1], int(1))]);
        let b = s(1, 7, &[(&[2], int(1))]);
        assert_eq!(a.mul(&b).trunc(), d(3));
        assert_eq!(a.mul(&b), s(1, 3, &[(&[3], int(1))]));
        assert!(a.mul(&b).mul(&a).is_zero());
        assert_eq!(a.add(&b).trunc(), d(3));
    }

    #[test]
    fn try_mul_dimension_error() {
        let a = FracSeries::one(1, d(3));
        let b = FracSeries::one(2, d(3));
        assert_eq!(a.try_mul(&b), Err(SeriesError::Dimension(1, 2)));
    }

    #[test]
    fn derivatives() {
        let f = s(2, 8, &[(&[5, 1], int(1))]);
        assert_eq!(f.partial_derivative(0), s(2, 7, &[(&[4, 1], int(5))]));
        let g = s(2, 8, &[(&[3, 0], int(1))]);
        assert!(g.partial_derivative(1).is_zero());
        assert_eq!(g.partial_derivative(1).trunc(), d(7));
    }

    #[test]
    fn parse_coefficients() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(rat(6, -8).to_string(), "-3/4");
        assert_eq!(int(5).to_string(), "5");
    }

    #[test]
    fn zero_coefficients_not_stored() {
        let mut a = s(1, 3, &[(&[1], int(2))]);
        a.add_term(Exponent::new([1]), int(-2));
        assert!(a.is_zero());
        a.add_term(Exponent::new([2]), int(0));
        assert!(a.is_zero());
    }

    #[test]
    fn division_by_monomial() {
        let a = s(2, 9, &[(&[3, 1], int(1)), (&[4, 0], int(2))]);
        let q = a.div_monomial(&Exponent::new([3, 0])).unwrap();
        assert_eq!(q, s(2, 6, &[(&[0, 1], int(1)), (&[1, 0], int(2))]));
        assert!(a.div_monomial(&Exponent::new([0, 1])).is_none());
    }
}
