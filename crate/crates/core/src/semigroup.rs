//! The value semigroup of a branch, built from `n` and the characteristic
//! exponents, with standard representations and the eliminable set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{lattice_index, Exponent, Lattice, LatticeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemigroupError {
    #[error("multiplicity must be positive")]
    BadMultiplicity,
    #[error("characteristic exponents must be strictly increasing: {0} then {1}")]
    NotIncreasing(Exponent, Exponent),
    #[error("invalid characteristic sequence: lambda_{0} = {1} already lies in the previous lattice")]
    InvalidCharacteristic(usize, Exponent),
    #[error("inconsistent multiplicity: product of indices is {product}, expected n = {n}")]
    InconsistentMultiplicity { product: u128, n: i64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone)]
pub struct SemigroupData {
    r: usize,
    n: i64,
    lambdas: Vec<Exponent>,
    nus: Vec<Exponent>,
    indices: Vec<i64>,
    lattices: Vec<Lattice>,
}

/// JSON input: `{"r":2,"n":5,"lambdas":[[5,1]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemigroupInput {
    pub r: usize,
    pub n: i64,
    pub lambdas: Vec<Exponent>,
}

/// JSON echo of a built semigroup.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SemigroupSummary {
    pub r: usize,
    pub n: i64,
    pub lambdas: Vec<Exponent>,
    pub nus: Vec<Exponent>,
    pub indices: Vec<i64>,
    pub lattice_bases: Vec<Vec<Exponent>>,
}

pub fn build_semigroup(r: usize, n: i64, lambdas: &[Exponent]) -> Result<SemigroupData, SemigroupError> {
    if n < 1 {
        return Err(SemigroupError::BadMultiplicity);
    }
    for l in lambdas {
        if l.dim() != r {
            return Err(LatticeError::Dimension(r, l.dim()).into());
        }
    }
    for w in lambdas.windows(2) {
        if !w[0].lt_product(&w[1]) {
            return Err(SemigroupError::NotIncreasing(w[0].clone(), w[1].clone()));
        }
    }
    let mut lattices = vec![Lattice::scaled_standard(r, n)];
    let mut indices = Vec::with_capacity(lambdas.len());
    for (j, l) in lambdas.iter().enumerate() {
        let prev = lattices.last().expect("nonempty");
        if prev.contains(l) {
            return Err(SemigroupError::InvalidCharacteristic(j + 1, l.clone()));
        }
        let next = prev.extended(l)?;
        indices.push(lattice_index(prev, &next)? as i64);
        lattices.push(next);
    }
    let product: u128 = indices.iter().map(|&k| k as u128).product();
    if product != n as u128 {
        return Err(SemigroupError::InconsistentMultiplicity { product, n });
    }
    let mut nus: Vec<Exponent> = (0..r).map(|i| Exponent::unit(r, i).scale(n)).collect();
    for (j, l) in lambdas.iter().enumerate() {
        if j == 0 {
            nus.push(l.clone());
        } else {
            let prev = &nus[r + j - 1];
            let v = &(&prev.scale(indices[j - 1]) + l) - &lambdas[j - 1];
            nus.push(v);
        }
    }
    Ok(SemigroupData {
        r,
        n,
        lambdas: lambdas.to_vec(),
        nus,
        indices,
        lattices,
    })
}

impl SemigroupData {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn g(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[Exponent] {
        &self.lambdas
    }

    pub fn lambda1(&self) -> &Exponent {
        &self.lambdas[0]
    }

    pub fn nus(&self) -> &[Exponent] {
        &self.nus
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn lattices(&self) -> &[Lattice] {
        &self.lattices
    }

    pub fn summary(&self) -> SemigroupSummary {
        SemigroupSummary {
            r: self.r,
            n: self.n,
            lambdas: self.lambdas.clone(),
            nus: self.nus.clone(),
            indices: self.indices.clone(),
            lattice_bases: self.lattices.iter().map(|l| l.basis().to_vec()).collect(),
        }
    }

    /// The standard representation at level `k`, or `None` outside `Q_k`.
    pub fn standard_representation(&self, gamma: &Exponent, k: usize) -> Option<Vec<i64>> {
        assert!(k <= self.g());
        if !self.lattices[k].contains(gamma) {
            return None;
        }
        let mut rest = gamma.clone();
        let mut upper = vec![0i64; k];
        for j in (1..=k).rev() {
            let nu = &self.nus[self.r + j - 1];
            let below = &self.lattices[j - 1];
            let a = (0..self.indices[j - 1])
                .find(|&a| below.contains(&(&rest - &nu.scale(a))))
                .expect("cyclic quotient of order n_j");
            upper[j - 1] = a;
            rest = &rest - &nu.scale(a);
        }
        let mut out: Vec<i64> = rest.coords().iter().map(|c| c / self.n).collect();
        out.extend(upper);
        Some(out)
    }

    /// Recompose `sum a_i nu_i`.
    pub fn recompose(&self, coeffs: &[i64]) -> Exponent {
        coeffs
            .iter()
            .zip(&self.nus)
            .fold(Exponent::zero(self.r), |acc, (a, nu)| &acc + &nu.scale(*a))
    }

    pub fn gamma_member(&self, gamma: &Exponent) -> bool {
        match self.standard_representation(gamma, self.g()) {
            Some(a) => a[..self.r].iter().all(|&x| x >= 0),
            None => false,
        }
    }

    /// Indices `i` (0-based) with `lambda_1i >= n`: the shifted copies
    /// `Gamma + 2 lambda_1 - nu_i` of the eliminable set.
    pub fn shift_directions(&self) -> Vec<usize> {
        (0..self.r).filter(|&i| self.lambda1().coords()[i] >= self.n).collect()
    }

    /// `gamma - 2 lambda_1 + nu_i` for a shift direction `i`.
    pub fn unshift(&self, gamma: &Exponent, i: usize) -> Exponent {
        &(gamma - &self.lambda1().scale(2)) + &self.nus[i]
    }

    pub fn eliminable_set_member(&self, gamma: &Exponent) -> bool {
        if self.gamma_member(gamma) {
            return true;
        }
        if self.g() == 0 {
            return false;
        }
        self.shift_directions()
            .into_iter()
            .any(|i| self.gamma_member(&self.unshift(gamma, i)))
    }

    /// The members of `support` lying in the eliminable set.
    pub fn quasi_short_violations<'a>(&self, support: impl IntoIterator<Item = &'a Exponent>) -> Vec<Exponent> {
        let mut v: Vec<Exponent> = support
            .into_iter()
            .filter(|e| self.eliminable_set_member(e))
            .cloned()
            .collect();
        v.sort();
        v
    }
}

pub fn standard_representation(g: &SemigroupData, gamma: &Exponent, k: usize) -> Option<Vec<i64>> {
    g.standard_representation(gamma, k)
}

pub fn gamma_member(g: &SemigroupData, gamma: &Exponent) -> bool {
    g.gamma_member(gamma)
}

pub fn eliminable_set_member(g: &SemigroupData, gamma: &Exponent) -> bool {
    g.eliminable_set_member(gamma)
}

pub fn quasi_short_violations<'a>(g: &SemigroupData, support: impl IntoIterator<Item = &'a Exponent>) -> Vec<Exponent> {
    g.quasi_short_violations(support)
}
