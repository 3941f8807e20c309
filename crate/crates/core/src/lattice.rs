//! Integer exponent vectors and sublattices of `Z^r`.
//!
//! Exponents live in t-coordinates. Lattices are stored with a canonical
//! Hermite basis so that equality is a plain comparison of bases.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("lattice is not contained in the larger lattice")]
    NotSublattice,
    #[error("index is infinite (ranks {0} and {1} differ)")]
    InfiniteIndex(usize, usize),
}

/// An integer vector in t-coordinates.
///
/// `Ord` is the graded-lex order: total degree first, then lexicographic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exponent(SmallVec<[i64; 4]>);

impl Exponent {
    pub fn new(coords: impl IntoIterator<Item = i64>) -> Self {
        Exponent(coords.into_iter().collect())
    }

    pub fn zero(r: usize) -> Self {
        Exponent(SmallVec::from_elem(0, r))
    }

    /// The unit vector `theta_i` (0-based).
    pub fn unit(r: usize, i: usize) -> Self {
        let mut e = Self::zero(r);
        e.0[i] = 1;
        e
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn scale(&self, k: i64) -> Self {
        Exponent(self.0.iter().map(|c| c * k).collect())
    }

    /// Coordinatewise `self <= other`. Panics in debug builds on a length mismatch.
    pub fn le_product(&self, other: &Exponent) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Strict product order: `self <= other` and `self != other`.
    pub fn lt_product(&self, other: &Exponent) -> bool {
        self != other && self.le_product(other)
    }

    pub fn comparable(&self, other: &Exponent) -> bool {
        self.le_product(other) || other.le_product(self)
    }

    /// Drop the last coordinate.
    pub fn truncated(&self, len: usize) -> Exponent {
        Exponent(self.0[..len].iter().copied().collect())
    }

    pub fn push(&mut self, c: i64) {
        self.0.push(c);
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total().cmp(&other.total()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Exponent {
    type Output = Exponent;
    fn add(self, rhs: &Exponent) -> Exponent {
        debug_assert_eq!(self.dim(), rhs.dim());
        Exponent(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Exponent {
    type Output = Exponent;
    fn sub(self, rhs: &Exponent) -> Exponent {
        debug_assert_eq!(self.dim(), rhs.dim());
        Exponent(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        &self + &rhs
    }
}

impl Sub for Exponent {
    type Output = Exponent;
    fn sub(self, rhs: Exponent) -> Exponent {
        &self - &rhs
    }
}

impl Neg for &Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(self.0.iter().map(|c| -c).collect())
    }
}

impl From<Vec<i64>> for Exponent {
    fn from(v: Vec<i64>) -> Self {
        Exponent::new(v)
    }
}

impl<const N: usize> From<[i64; N]> for Exponent {
    fn from(v: [i64; N]) -> Self {
        Exponent::new(v)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Exponent::new(Vec::<i64>::deserialize(d)?))
    }
}

/// Coordinatewise comparison with a dimension check.
pub fn product_le(a: &Exponent, b: &Exponent) -> Result<bool, LatticeError> {
    if a.dim() != b.dim() {
        return Err(LatticeError::Dimension(a.dim(), b.dim()));
    }
    Ok(a.le_product(b))
}

/// Graded-lex comparison with a dimension check.
pub fn graded_lex_le(a: &Exponent, b: &Exponent) -> Result<bool, LatticeError> {
    if a.dim() != b.dim() {
        return Err(LatticeError::Dimension(a.dim(), b.dim()));
    }
    Ok(a <= b)
}

/// The product-order minimal elements of `set`, sorted graded-lex.
pub fn minimal_antichain<'a>(set: impl IntoIterator<Item = &'a Exponent>) -> Vec<Exponent> {
    let mut items: Vec<&Exponent> = set.into_iter().collect();
    items.sort();
    items.dedup();
    let mut out: Vec<Exponent> = Vec::new();
    // graded-lex is a linear extension of the product order, so a dominating
    // element can only come earlier
    for e in items {
        if !out.iter().any(|m| m.le_product(e)) {
            out.push(e.clone());
        }
    }
    out
}

/// A subgroup of `Z^r` given by generators, with its canonical Hermite basis.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    generators: Vec<Exponent>,
    basis: Vec<Exponent>,
    pivots: Vec<usize>,
    /// Row `k` expresses `basis[k]` as an integer combination of `generators`.
    transform: Vec<Vec<i128>>,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.basis == other.basis
    }
}

impl Eq for Lattice {}

impl Lattice {
    pub fn new(dim: usize, generators: Vec<Exponent>) -> Result<Self, LatticeError> {
        for g in &generators {
            if g.dim() != dim {
                return Err(LatticeError::Dimension(dim, g.dim()));
            }
        }
        let rows: Vec<Vec<i128>> = generators
            .iter()
            .map(|g| g.coords().iter().map(|&c| c as i128).collect())
            .collect();
        let (h, u, pivots) = hermite_rows(&rows, dim);
        let rank = pivots.len();
        let basis = h[..rank]
            .iter()
            .map(|row| Exponent::new(row.iter().map(|&c| c as i64)))
            .collect();
        Ok(Lattice {
            dim,
            generators,
            basis,
            pivots,
            transform: u[..rank].to_vec(),
        })
    }

    /// `k * Z^r`.
    pub fn scaled_standard(dim: usize, k: i64) -> Self {
        let gens = (0..dim).map(|i| Exponent::unit(dim, i).scale(k)).collect();
        Lattice::new(dim, gens).expect("dimensions agree")
    }

    /// This lattice with one more generator.
    pub fn extended(&self, v: &Exponent) -> Result<Self, LatticeError> {
        let mut gens = self.generators.clone();
        gens.push(v.clone());
        Lattice::new(self.dim, gens)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn generators(&self) -> &[Exponent] {
        &self.generators
    }

    pub fn basis(&self) -> &[Exponent] {
        &self.basis
    }

    pub fn transform(&self) -> &[Vec<i128>] {
        &self.transform
    }

    /// Coordinates of `v` in the Hermite basis, if `v` is a member.
    pub fn basis_coords(&self, v: &Exponent) -> Option<Vec<i128>> {
        let mut res: Vec<i128> = v.coords().iter().map(|&c| c as i128).collect();
        let mut x = Vec::with_capacity(self.rank());
        for (k, b) in self.basis.iter().enumerate() {
            let p = self.pivots[k];
            let piv = b.coords()[p] as i128;
            if res[p] % piv != 0 {
                return None;
            }
            let q = res[p] / piv;
            for (rc, bc) in res.iter_mut().zip(b.coords()) {
                *rc -= q * (*bc as i128);
            }
            x.push(q);
        }
        if res.iter().all(|&c| c == 0) {
            Some(x)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &Exponent) -> bool {
        self.basis_coords(v).is_some()
    }

    /// Membership with a witness `v = sum c_i * generators[i]`.
    pub fn member(&self, v: &Exponent) -> Result<Option<Vec<i128>>, LatticeError> {
        if v.dim() != self.dim {
            return Err(LatticeError::Dimension(self.dim, v.dim()));
        }
        let Some(x) = self.basis_coords(v) else {
            return Ok(None);
        };
        let mut c = vec![0i128; self.generators.len()];
        for (xk, row) in x.iter().zip(&self.transform) {
            for (cj, uj) in c.iter_mut().zip(row) {
                *cj += xk * uj;
            }
        }
        Ok(Some(c))
    }
}

/// Membership in the integer span, with witness coefficients over the generators.
pub fn lattice_member(l: &Lattice, v: &Exponent) -> Result<Option<Vec<i128>>, LatticeError> {
    l.member(v)
}

/// The index `|sup : sub|`.
pub fn lattice_index(sub: &Lattice, sup: &Lattice) -> Result<u128, LatticeError> {
    if sub.dim != sup.dim {
        return Err(LatticeError::Dimension(sub.dim, sup.dim));
    }
    if sub.generators.iter().any(|g| !sup.contains(g)) {
        return Err(LatticeError::NotSublattice);
    }
    if sub.rank() != sup.rank() {
        return Err(LatticeError::InfiniteIndex(sub.rank(), sup.rank()));
    }
    let m: Vec<Vec<i128>> = sub
        .basis
        .iter()
        .map(|b| sup.basis_coords(b).expect("contained"))
        .collect();
    Ok(det_bareiss(m).unsigned_abs())
}

/// Row-style Hermite normal form. Returns `(H, U, pivots)` with `U * rows = H`,
/// `U` unimodular, nonzero rows of `H` first, positive pivots, and entries
/// above each pivot reduced into `[0, pivot)`.
pub fn hermite_rows(rows: &[Vec<i128>], dim: usize) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, Vec<usize>) {
    let m = rows.len();
    let mut h: Vec<Vec<i128>> = rows.to_vec();
    let mut u: Vec<Vec<i128>> = (0..m).map(|i| (0..m).map(|j| i128::from(i == j)).collect()).collect();
    let mut pivots = Vec::new();
    let mut p = 0;
    for col in 0..dim {
        if p == m {
            break;
        }
        // gcd-reduce the column below row p onto row p
        loop {
            let nz: Vec<usize> = (p..m).filter(|&i| h[i][col] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let best = *nz.iter().min_by_key(|&&i| h[i][col].abs()).unwrap();
            h.swap(p, best);
            u.swap(p, best);
            let mut done = true;
            for i in p + 1..m {
                if h[i][col] != 0 {
                    let q = h[i][col].div_euclid(h[p][col]);
                    row_axpy(&mut h, i, p, -q);
                    row_axpy(&mut u, i, p, -q);
                    if h[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h[p][col] == 0 {
            continue;
        }
        if h[p][col] < 0 {
            h[p].iter_mut().for_each(|c| *c = -*c);
            u[p].iter_mut().for_each(|c| *c = -*c);
        }
        let piv = h[p][col];
        for i in 0..p {
            let q = h[i][col].div_euclid(piv);
            if q != 0 {
                row_axpy(&mut h, i, p, -q);
                row_axpy(&mut u, i, p, -q);
            }
        }
        pivots.push(col);
        p += 1;
    }
    (h, u, pivots)
}

fn row_axpy(m: &mut [Vec<i128>], dst: usize, src: usize, k: i128) {
    let (a, b) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x += k * y;
    }
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn det_bareiss(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(s) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Smith normal form `U * m * V = D` of a small integer matrix.
///
/// Returns `(U, diag, V)` where `diag` holds the nonzero invariant factors.
pub fn smith_normal_form(m: &[Vec<i128>]) -> (Vec<Vec<i128>>, Vec<i128>, Vec<Vec<i128>>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut u: Vec<Vec<i128>> = identity(rows);
    let mut v: Vec<Vec<i128>> = identity(cols);
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        // choose the smallest nonzero entry in the trailing block
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            break;
        };
        a.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut a, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t].div_euclid(a[t][t]);
                if q != 0 {
                    row_axpy(&mut a, i, t, -q);
                    row_axpy(&mut u, i, t, -q);
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j].div_euclid(a[t][t]);
                if q != 0 {
                    col_axpy(&mut a, j, t, -q);
                    col_axpy(&mut v, j, t, -q);
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                // divisibility of the trailing block
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % a[t][t] != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        row_axpy(&mut a, t, i, 1);
                        row_axpy(&mut u, t, i, 1);
                        continue;
                    }
                }
            }
            let Some((pi, pj)) = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| (i == t || j == t) && a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs())
            else {
                break;
            };
            a.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut v, t, pj);
        }
        if a[t][t] < 0 {
            a[t].iter_mut().for_each(|c| *c = -*c);
            u[t].iter_mut().for_each(|c| *c = -*c);
        }
        diag.push(a[t][t]);
    }
    (u, diag, v)
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn swap_cols(m: &mut [Vec<i128>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn col_axpy(m: &mut [Vec<i128>], dst: usize, src: usize, k: i128) {
    for row in m.iter_mut() {
        row[dst] += k * row[src];
    }
}

/// Extended gcd: `(g, x, y)` with `a*x + b*y = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}
