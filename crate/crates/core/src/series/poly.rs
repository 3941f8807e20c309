//! Exact polynomials in the ambient variables `X_1..X_{r+1}`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{FracSeries, Rational, SeriesError, Term, TruncationOrder};
use crate::lattice::Exponent;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*X^{e}")?;
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(Exponent::zero(nvars), c)
    }

    pub fn monomial(e: Exponent, c: Rational) -> Self {
        let mut p = Self::zero(e.dim());
        p.add_term(e, c);
        p
    }

    /// The variable `X_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Exponent::unit(nvars, i), Rational::one())
    }

    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Exponent, Rational)>,
    ) -> Result<Self, SeriesError> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.dim() != nvars {
                return Err(SeriesError::Dimension(nvars, e.dim()));
            }
            if !e.is_nonnegative() {
                return Err(SeriesError::NegativeExponent(e));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.terms.iter().map(|(e, c)| Term::new(e.clone(), c)).collect()
    }

    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            for (f, d) in &other.terms {
                out.add_term(e + f, c * d);
            }
        }
        out
    }

    pub fn mul_monomial(&self, e: &Exponent, c: &Rational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (f, d) in &self.terms {
            out.add_term(e + f, c * d);
        }
        out
    }

    /// Largest exponent of variable `i` among the terms.
    pub fn degree_in(&self, i: usize) -> i64 {
        self.terms.keys().map(|e| e.coords()[i]).max().unwrap_or(0)
    }

    /// Every term is divisible by `X^e`.
    pub fn divisible_by(&self, e: &Exponent) -> bool {
        self.terms.keys().all(|f| e.le_product(f))
    }

    /// Substitute `X_i -> t_i^n` for `i < r` and `X_{r+1} -> s`.
    pub fn substitute(&self, n: i64, s: &FracSeries, d: TruncationOrder) -> FracSeries {
        let r = s.r();
        assert_eq!(self.nvars, r + 1);
        let s = s.truncate(d);
        let mut by_last: BTreeMap<i64, FracSeries> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e.coords()[r];
            let te = Exponent::new(e.coords()[..r].iter().map(|x| x * n));
            by_last
                .entry(k)
                .or_insert_with(|| FracSeries::zero(r, d))
                .add_term(te, c.clone());
        }
        let mut out = FracSeries::zero(r, d);
        let mut power = FracSeries::one(r, d);
        let mut have = 0i64;
        for (k, part) in by_last {
            while have < k {
                power = power.mul_to(&s, d);
                have += 1;
            }
            out = out.add(&part.mul_to(&power, d));
        }
        out
    }
}
