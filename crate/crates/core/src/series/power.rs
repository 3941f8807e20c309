//! Rational powers of units.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{int, FracSeries, Rational, SeriesError};
use crate::lattice::Exponent;

/// The rational `q`-th root of `x`, if there is one. For even `q` the
/// positive root is returned.
pub fn rational_root(x: &Rational, q: u32) -> Option<Rational> {
    if q == 1 || x.is_zero() {
        return Some(x.clone());
    }
    if x.is_negative() && q.is_multiple_of(2) {
        return None;
    }
    let n = int_root(x.numer(), q)?;
    let d = int_root(x.denom(), q)?;
    Some(Rational::new(n, d))
}

fn int_root(a: &BigInt, q: u32) -> Option<BigInt> {
    let r = a.nth_root(q);
    if num_traits::pow(r.clone(), q as usize) == *a {
        Some(r)
    } else {
        None
    }
}

fn rational_pow(x: &Rational, p: i64) -> Rational {
    let base = if p < 0 { x.recip() } else { x.clone() };
    num_traits::pow(base, p.unsigned_abs() as usize)
}

/// `base^(p/q)` for a unit `base = c(1 + z)`. The constant `c^(p/q)` must be
/// rational.
pub fn rational_power(base: &FracSeries, p: i64, q: u32) -> Result<FracSeries, SeriesError> {
    assert!(q >= 1);
    let c = base.constant_term();
    if c.is_zero() {
        return Err(SeriesError::NotAUnit);
    }
    let cp = rational_pow(&c, p);
    let root = rational_root(&cp, q).ok_or_else(|| SeriesError::IrrationalRoot(cp.to_string(), q))?;
    rational_power_with_root(base, p, q, root)
}

/// `base^(p/q)` with the constant of the result supplied by the caller, who
/// is responsible for `root^q = c^p`. Uses the recurrence
/// `g0 * d * f_d = sum_{k=1..d} (alpha*k - (d-k)) g_k f_{d-k}` on homogeneous
/// components, which follows from `g * E(f) = alpha * f * E(g)` for the Euler
/// operator `E`.
pub fn rational_power_with_root(base: &FracSeries, p: i64, q: u32, root: Rational) -> Result<FracSeries, SeriesError> {
    let g0 = base.constant_term();
    if g0.is_zero() {
        return Err(SeriesError::NotAUnit);
    }
    let r = base.r();
    let trunc = base.trunc();
    let dmax = trunc.get() as usize;
    let alpha = Rational::new(BigInt::from(p), BigInt::from(q));
    let g = base.graded();
    let mut f: Vec<Vec<(Exponent, Rational)>> = Vec::with_capacity(dmax + 1);
    f.push(vec![(Exponent::zero(r), root)]);
    let g0_inv = g0.recip();
    for d in 1..=dmax {
        let mut acc: std::collections::HashMap<Exponent, Rational> = std::collections::HashMap::new();
        for k in 1..=d {
            if g[k].is_empty() || f[d - k].is_empty() {
                continue;
            }
            let w = &alpha * int(k as i64) - int((d - k) as i64);
            if w.is_zero() {
                continue;
            }
            for (eg, cg) in &g[k] {
                let cw = cg * &w;
                for (ef, cf) in &f[d - k] {
                    let v = &cw * cf;
                    *acc.entry(eg + ef).or_insert_with(Rational::zero) += v;
                }
            }
        }
        let scale = &g0_inv / int(d as i64);
        let mut part: Vec<(Exponent, Rational)> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e, c * &scale))
            .collect();
        part.sort_by(|a, b| a.0.cmp(&b.0));
        f.push(part);
    }
    Ok(FracSeries::from_graded(r, trunc, f))
}
