#![allow(dead_code)]

use qord::branch::{validate, Parameterization};
use qord::lattice::Exponent;
use qord::series::{rat, FracSeries, Rational, TruncationOrder};
use rand::Rng;

pub fn e(v: &[i64]) -> Exponent {
    Exponent::new(v.iter().copied())
}

pub fn trunc(d: u32) -> TruncationOrder {
    TruncationOrder::new(d).unwrap()
}

pub fn series(d: u32, terms: &[(Exponent, Rational)]) -> FracSeries {
    FracSeries::from_terms(2, trunc(d), terms.iter().cloned()).unwrap()
}

pub fn param(n: i64, d: u32, terms: &[(Exponent, Rational)]) -> Parameterization {
    validate(2, n, series(d, terms)).unwrap()
}

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let num = rng.gen_range(-9i64..=9);
        if num != 0 {
            return rat(num, rng.gen_range(1i64..=5));
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `(n, lambda_1)` gives a one-exponent semigroup of multiplicity `n`.
pub fn valid_pair(n: i64, l: (i64, i64)) -> bool {
    gcd(gcd(n, l.0), l.1) == 1
}

/// Valid, column-ordered, and off the short axis.
pub fn normalized_pair(n: i64, l: (i64, i64)) -> bool {
    valid_pair(n, l) && l.0 >= l.1 && l.0 >= 1 && !(l.1 == 0 && l.0 <= n)
}

/// `v` lies in the lattice spanned by `(n,0)`, `(0,n)`, `lambda_1`.
pub fn in_q1(n: i64, l: (i64, i64), v: (i64, i64)) -> bool {
    (0..n).any(|k| (v.0 - k * l.0).rem_euclid(n) == 0 && (v.1 - k * l.1).rem_euclid(n) == 0)
}

/// `t^lambda_1` plus `k` random terms `t^(lambda_1 + v)` with `v` in the
/// first lattice and `|v| <= spread`.
pub fn random_one_exponent<R: Rng>(
    rng: &mut R,
    n: i64,
    l: (i64, i64),
    d: u32,
    k: usize,
    spread: i64,
) -> Parameterization {
    let mut terms = vec![(e(&[l.0, l.1]), rat(1, 1))];
    let mut tries = 0;
    while terms.len() < k + 1 && tries < 1000 {
        tries += 1;
        let v = (rng.gen_range(0..=spread), rng.gen_range(0..=spread));
        if v == (0, 0) || !in_q1(n, l, v) || l.0 + l.1 + v.0 + v.1 > d as i64 {
            continue;
        }
        let x = e(&[l.0 + v.0, l.1 + v.1]);
        if terms.iter().any(|(y, _)| *y == x) {
            continue;
        }
        terms.push((x, random_rational(rng)));
    }
    param(n, d, &terms)
}

/// Nonnegative integer combinations of `gens` hitting `target`, by
/// exhaustive descent on the last generator.
pub fn brute_combination(gens: &[(i64, i64)], target: (i64, i64)) -> bool {
    if target.0 < 0 || target.1 < 0 {
        return false;
    }
    match gens.split_last() {
        None => target == (0, 0),
        Some((&(a, b), rest)) => {
            let mut t = target;
            loop {
                if brute_combination(rest, t) {
                    return true;
                }
                t = (t.0 - a, t.1 - b);
                if t.0 < 0 || t.1 < 0 || (a, b) == (0, 0) {
                    return false;
                }
            }
        }
    }
}

/// Membership in the eliminable set of a one-exponent semigroup, from
/// brute-force combinations of `(n,0)`, `(0,n)`, `lambda_1`.
pub fn brute_eliminable(n: i64, l: (i64, i64), x: (i64, i64)) -> bool {
    let gens = [(n, 0), (0, n), l];
    if brute_combination(&gens, x) {
        return true;
    }
    (l.0 >= n && brute_combination(&gens, (x.0 - 2 * l.0 + n, x.1 - 2 * l.1)))
        || (l.1 >= n && brute_combination(&gens, (x.0 - 2 * l.0, x.1 - 2 * l.1 + n)))
}

pub fn pair(x: &Exponent) -> (i64, i64) {
    (x.coords()[0], x.coords()[1])
}

/// Restrict a set of exponents to total degree at most `d`.
pub fn up_to(xs: &[Exponent], d: i64) -> Vec<Exponent> {
    let mut v: Vec<Exponent> = xs.iter().filter(|x| x.total() <= d).cloned().collect();
    v.sort();
    v
}
