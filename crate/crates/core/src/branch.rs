//! Parameterizations `(t_1^n, ..., t_r^n, S(t))`: validation, extraction of
//! characteristic exponents, the normalization check, the substitution
//! homomorphism `H*`, and the map `Psi_H` on differential forms for `r = 2`.

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{minimal_antichain, Exponent, Lattice};
use crate::semigroup::{build_semigroup, SemigroupData, SemigroupError};
use crate::series::{parse_rational, FracSeries, Poly, Rational, SeriesError, Term, TruncationOrder};

/// One reason a series fails to define a quasi-ordinary branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    ZeroSeries,
    Unit,
    Unreduced { gcd: i64 },
    Incomparable { stage: usize, candidates: Vec<Exponent> },
    OutsideLattice { exponent: Exponent, level: usize },
    Semigroup { message: String },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::Unreduced { .. } => "unreduced-parameterization",
            _ => "not-quasi-ordinary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("rejected: {}", .violations.iter().map(|v| v.code()).collect::<Vec<_>>().join(", "))]
pub struct Rejection {
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BranchError {
    #[error("unsupported dimension r = {0}")]
    UnsupportedDimension(usize),
    #[error("form has {0} components, expected {1}")]
    FormShape(usize, usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Rejected(#[from] Rejection),
}

#[derive(Debug, Clone)]
pub struct Parameterization {
    n: i64,
    s: FracSeries,
    semigroup: SemigroupData,
}

impl Parameterization {
    pub fn r(&self) -> usize {
        self.s.r()
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn s(&self) -> &FracSeries {
        &self.s
    }

    pub fn semigroup(&self) -> &SemigroupData {
        &self.semigroup
    }

    pub fn trunc(&self) -> TruncationOrder {
        self.s.trunc()
    }

    pub fn lambda1(&self) -> &Exponent {
        self.semigroup.lambda1()
    }

    pub fn g(&self) -> usize {
        self.semigroup.g()
    }

    /// The tail exponents `supp(S) \ {lambda_1}`, graded-lex.
    pub fn tail(&self) -> Vec<Exponent> {
        let l = self.lambda1();
        self.s.support().filter(|e| *e != l).cloned().collect()
    }

    /// Same branch data with a new last component. The caller guarantees the
    /// new series comes from an admissible change, so the semigroup carries over.
    pub(crate) fn with_series(&self, s: FracSeries) -> Parameterization {
        Parameterization {
            n: self.n,
            s,
            semigroup: self.semigroup.clone(),
        }
    }

    /// Revalidate after changing the series; used by callers that want the
    /// full check rather than the carried-over semigroup.
    pub fn revalidate(&self) -> Result<Parameterization, Rejection> {
        validate(self.r(), self.n, self.s.clone())
    }

    pub fn truncated(&self, d: TruncationOrder) -> Parameterization {
        self.with_series(self.s.truncate(d))
    }

    pub fn to_json(&self) -> ParamJson {
        ParamJson {
            r: self.r(),
            n: self.n,
            trunc: Some(self.trunc().get()),
            terms: self.s.to_terms(),
        }
    }
}

/// `{"r":2,"n":5,"trunc":40,"terms":[{"exp":[5,1],"coef":"1"}]}`
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ParamJson {
    pub r: usize,
    pub n: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc: Option<u32>,
    pub terms: Vec<Term>,
}

impl ParamJson {
    pub fn parse_terms(&self) -> Result<Vec<(Exponent, Rational)>, SeriesError> {
        self.terms
            .iter()
            .map(|t| {
                if t.exp.dim() != self.r {
                    return Err(SeriesError::Dimension(self.r, t.exp.dim()));
                }
                Ok((t.exp.clone(), parse_rational(&t.coef)?))
            })
            .collect()
    }

    /// Largest total degree among the listed terms.
    pub fn max_degree(&self) -> i64 {
        self.terms.iter().map(|t| t.exp.total()).max().unwrap_or(0)
    }

    pub fn to_series(&self, trunc: TruncationOrder) -> Result<FracSeries, SeriesError> {
        FracSeries::from_terms(self.r, trunc, self.parse_terms()?)
    }
}

/// Check the branch conditions and extract the characteristic exponents.
pub fn validate(r: usize, n: i64, s: FracSeries) -> Result<Parameterization, Rejection> {
    let mut violations = Vec::new();
    if s.is_zero() {
        return Err(Rejection {
            violations: vec![Violation::ZeroSeries],
        });
    }
    if !s.constant_term().is_zero() {
        violations.push(Violation::Unit);
    }
    let support: Vec<Exponent> = s.support().filter(|e| !e.is_zero()).cloned().collect();
    let mut g = n;
    for e in &support {
        for &c in e.coords() {
            g = g.gcd(&c);
        }
    }
    if g != 1 {
        violations.push(Violation::Unreduced { gcd: g });
    }

    let mut lattice = Lattice::scaled_standard(r, n);
    let mut lattices = vec![lattice.clone()];
    let mut lambdas: Vec<Exponent> = Vec::new();
    let mut chain_ok = true;
    loop {
        let candidates: Vec<&Exponent> = support.iter().filter(|e| !lattice.contains(e)).collect();
        if candidates.is_empty() {
            break;
        }
        let mins = minimal_antichain(candidates);
        if mins.len() > 1 {
            violations.push(Violation::Incomparable {
                stage: lambdas.len() + 1,
                candidates: mins,
            });
            chain_ok = false;
            break;
        }
        let l = mins.into_iter().next().expect("nonempty");
        lattice = lattice.extended(&l).expect("dimensions agree");
        lattices.push(lattice.clone());
        lambdas.push(l);
    }
    if chain_ok {
        for e in &support {
            let level = lambdas.iter().take_while(|l| l.le_product(e)).count();
            if !lattices[level].contains(e) {
                violations.push(Violation::OutsideLattice {
                    exponent: e.clone(),
                    level,
                });
            }
        }
    }
    let semigroup = if chain_ok && !lambdas.is_empty() {
        match build_semigroup(r, n, &lambdas) {
            Ok(sg) => Some(sg),
            Err(e) => {
                violations.push(Violation::Semigroup { message: e.to_string() });
                None
            }
        }
    } else {
        if chain_ok && violations.is_empty() {
            let e = SemigroupError::InconsistentMultiplicity { product: 1, n };
            violations.push(Violation::Semigroup { message: e.to_string() });
        }
        None
    };
    if !violations.is_empty() {
        return Err(Rejection { violations });
    }
    Ok(Parameterization {
        n,
        s,
        semigroup: semigroup.expect("built"),
    })
}

/// Parse and validate a JSON parameterization at a given bound.
pub fn validate_json(p: &ParamJson, trunc: TruncationOrder) -> Result<Parameterization, BranchError> {
    let s = p.to_series(trunc)?;
    Ok(validate(p.r, p.n, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationIssue {
    /// lambda_1 is not the least element of the support.
    NotMinimum,
    /// The coefficient of `t^lambda_1` is not 1.
    LeadingCoefficient,
    /// Columns of the characteristic exponents are not lex-decreasing.
    ColumnOrder,
    /// `lambda_1 = (l, 0, ..., 0)` with `l <= n`.
    Axis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizationReport {
    pub normalized: bool,
    pub issues: Vec<NormalizationIssue>,
}

pub fn is_normalized(p: &Parameterization) -> NormalizationReport {
    let mut issues = Vec::new();
    let l1 = p.lambda1();
    if p.s().support().any(|e| !l1.le_product(e)) {
        issues.push(NormalizationIssue::NotMinimum);
    }
    if !p.s().coeff(l1).is_one() {
        issues.push(NormalizationIssue::LeadingCoefficient);
    }
    let columns: Vec<Vec<i64>> = (0..p.r())
        .map(|i| p.semigroup().lambdas().iter().map(|l| l.coords()[i]).collect())
        .collect();
    if columns.windows(2).any(|w| w[0] < w[1]) {
        issues.push(NormalizationIssue::ColumnOrder);
    }
    let c = l1.coords();
    if c[1..].iter().all(|&x| x == 0) && c[0] <= p.n() {
        issues.push(NormalizationIssue::Axis);
    }
    NormalizationReport {
        normalized: issues.is_empty(),
        issues,
    }
}

/// `H*(h) = h(t_1^n, ..., t_r^n, S)` at the parameterization's bound.
pub fn h_star(p: &Parameterization, poly: &Poly) -> FracSeries {
    poly.substitute(p.n(), p.s(), p.trunc())
}

/// `H*(h)` at an explicit bound, with the stored series read as exact.
pub(crate) fn h_star_to(p: &Parameterization, poly: &Poly, d: TruncationOrder) -> FracSeries {
    poly.substitute(p.n(), &p.s().with_trunc(d), d)
}

/// The unique product-order minimum of the support, if there is one.
pub fn dominant_exponent(s: &FracSeries) -> Option<Exponent> {
    let mins = minimal_antichain(s.support());
    if mins.len() == 1 {
        mins.into_iter().next()
    } else {
        None
    }
}

/// A differential `r`-form `sum_i h_i dX_1 ^ ... ^ (omit dX_i) ^ ... ^ dX_{r+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RForm {
    pub components: Vec<Poly>,
}

/// `{"components":[[terms],[terms],[terms]]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RFormJson {
    pub components: Vec<Vec<Term>>,
}

impl RForm {
    pub fn new(components: Vec<Poly>) -> Self {
        RForm { components }
    }

    pub fn zero(r: usize) -> Self {
        RForm {
            components: vec![Poly::zero(r + 1); r + 1],
        }
    }

    pub fn r(&self) -> usize {
        self.components.len() - 1
    }

    /// `h * omega`.
    pub fn times(&self, h: &Poly) -> RForm {
        RForm {
            components: self.components.iter().map(|c| c.mul(h)).collect(),
        }
    }

    pub fn add(&self, other: &RForm) -> RForm {
        RForm {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> RForm {
        RForm {
            components: self.components.iter().map(|c| c.scale(k)).collect(),
        }
    }

    /// The form attached to a unipotent change `X_i -> X_i + P_i`:
    /// `h_i = (-1)^(r+1-i) P_i` (1-based `i`).
    pub fn from_change(p: &[Poly]) -> RForm {
        let r = p.len() - 1;
        RForm {
            components: p
                .iter()
                .enumerate()
                .map(|(k, pk)| {
                    if (r - k).is_multiple_of(2) {
                        pk.clone()
                    } else {
                        pk.scale(&-Rational::one())
                    }
                })
                .collect(),
        }
    }

    /// Inverse of [`RForm::from_change`].
    pub fn to_change(&self) -> Vec<Poly> {
        RForm::from_change(&self.components).components
    }

    /// The Euler-type form
    /// `(1/n)(s1 X1 dX2^dX3 + s2 X2 dX1^dX3 + ((s1 l11 - s2 l12)/n) X3 dX1^dX2)`.
    pub fn omega0(n: i64, lambda1: &Exponent, s1: &Rational, s2: &Rational) -> RForm {
        let nn = Rational::from_integer(n.into());
        let l = lambda1.coords();
        let k = (s1 * Rational::from_integer(l[0].into()) - s2 * Rational::from_integer(l[1].into())) / (&nn * &nn);
        RForm {
            components: vec![
                Poly::var(3, 0).scale(&(s1 / &nn)),
                Poly::var(3, 1).scale(&(s2 / &nn)),
                Poly::var(3, 2).scale(&k),
            ],
        }
    }

    pub fn to_json(&self) -> RFormJson {
        RFormJson {
            components: self.components.iter().map(Poly::to_terms).collect(),
        }
    }

    pub fn from_json(j: &RFormJson) -> Result<RForm, SeriesError> {
        let nvars = j
            .components
            .iter()
            .flat_map(|c| c.iter().map(|t| t.exp.dim()))
            .next()
            .unwrap_or(j.components.len());
        let components = j
            .components
            .iter()
            .map(|c| {
                let terms: Result<Vec<_>, _> = c
                    .iter()
                    .map(|t| Ok((t.exp.clone(), parse_rational(&t.coef)?)))
                    .collect();
                Poly::from_terms(nvars, terms?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RForm { components })
    }
}

/// `t1 t2 (df/dt1 dg/dt2 - df/dt2 dg/dt1)`, written with Euler derivatives.
fn euler_jacobian(f: &FracSeries, g: &FracSeries, d: TruncationOrder) -> FracSeries {
    let a = f.euler_derivative(0).mul_to(&g.euler_derivative(1), d);
    let b = f.euler_derivative(1).mul_to(&g.euler_derivative(0), d);
    a.sub(&b)
}

/// Degree up to which `H*(h)` is determined when `S` is known up to `d`.
fn h_star_validity(p: &Parameterization, h: &Poly, d: i64) -> Option<i64> {
    let r = p.r();
    let l = p.lambda1().total();
    h.terms()
        .keys()
        .filter(|e| e.coords()[r] >= 1)
        .map(|e| d + p.n() * e.coords()[..r].iter().sum::<i64>() + (e.coords()[r] - 1) * l)
        .min()
}

/// `Psi_H(omega)` for `r = 2`. The result's bound is the degree up to which
/// it is determined by the terms of `S` known up to the parameterization's
/// bound.
pub fn psi(p: &Parameterization, omega: &RForm) -> Result<FracSeries, BranchError> {
    if p.r() != 2 {
        return Err(BranchError::UnsupportedDimension(p.r()));
    }
    if omega.components.len() != 3 {
        return Err(BranchError::FormShape(omega.components.len(), 3));
    }
    let n = p.n();
    let d = p.trunc().as_i64();
    let l = p.lambda1().total();
    // validity of each summand h_i * J_i
    let mut valid: Option<i64> = None;
    let mut lower = |v: i64| valid = Some(valid.map_or(v, |w: i64| w.min(v)));
    for (i, h) in omega.components.iter().enumerate() {
        if h.is_zero() {
            continue;
        }
        let hv = h_star_validity(p, h, d);
        let ho = h
            .terms()
            .keys()
            .map(|e| n * (e.coords()[0] + e.coords()[1]) + e.coords()[2] * l)
            .min()
            .unwrap_or(0);
        match i {
            2 => {
                if let Some(v) = hv {
                    lower(v + 2 * n);
                }
            }
            _ => {
                // J_i carries t_j^n and an Euler derivative of S
                let jo = l + n;
                lower(d + n + ho);
                if let Some(v) = hv {
                    lower(v + jo);
                }
            }
        }
    }
    let vd = valid.unwrap_or(d + 2 * n).max(1);
    let work = TruncationOrder::new(vd as u32).expect("positive");
    let s = p.s().with_trunc(work);
    let x1 = FracSeries::monomial(2, work, Exponent::new([n, 0]), Rational::one());
    let x2 = FracSeries::monomial(2, work, Exponent::new([0, n]), Rational::one());
    let pairs = [(&x2, &s), (&x1, &s), (&x1, &x2)];
    let mut out = FracSeries::zero(2, work);
    for (h, (f, g)) in omega.components.iter().zip(pairs) {
        if h.is_zero() {
            continue;
        }
        let hs = h.substitute(n, &s, work);
        out = out.add(&hs.mul_to(&euler_jacobian(f, g, work), work));
    }
    Ok(out)
}
