//! Admissible coordinate changes and the elimination of terms.
//!
//! A change is `sigma_i = a_i X_i + P_i` together with the homothety roots
//! `c_i` (`c_i^n = a_i`); it acts by `H -> sigma o H o rho^{-1}` where
//! `rho_i = t_i (a_i + H*(P_i) / t_i^n)^(1/n)`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branch::{h_star_to, is_normalized, NormalizationIssue, Parameterization};
use crate::lattice::{smith_normal_form, Exponent};
use crate::series::{
    invert_diagonal, parse_rational, rat, rational_power_with_root, rational_root, substitute_diagonal, FracSeries,
    Poly, Rational, SeriesError, Term, TruncationOrder,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("inadmissible change: component {component} has monomial X^{monomial}")]
    Inadmissible { component: usize, monomial: Exponent },
    #[error("constraint violated: component {component} uses X_(r+1) but lambda_1 has coordinate {coord} < n")]
    Constraint { component: usize, coord: i64 },
    #[error("field error: {0}")]
    Field(String),
    #[error("change has wrong shape: {0}")]
    Shape(String),
    #[error("{0} is not eliminable")]
    NotEliminable(Exponent),
    #[error("elimination is only constructed for one characteristic exponent (g = {0})")]
    Unsupported(usize),
    #[error("normalization required: {0:?}")]
    NormalizationRequired(Vec<NormalizationIssue>),
    #[error("elimination stalled at {0}")]
    Stalled(Exponent),
    #[error("linear system for the elimination has no solution")]
    Singular,
    #[error("normalization targets have linearly dependent shifts")]
    DependentTargets,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateChange {
    /// Linear coefficients `a_1..a_{r+1}`.
    pub a: Vec<Rational>,
    /// Homothety roots `c_1..c_r` with `c_i^n = a_i`.
    pub roots: Vec<Rational>,
    /// `P_1..P_{r+1}` over `X_1..X_{r+1}`.
    pub p: Vec<Poly>,
}

/// `{"a":["1","1","1"],"roots":["1","1"],"P":[[terms],[terms],[terms]]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangeJson {
    pub a: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<String>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<Term>>,
}

impl CoordinateChange {
    pub fn identity(r: usize) -> Self {
        CoordinateChange {
            a: vec![Rational::one(); r + 1],
            roots: vec![Rational::one(); r],
            p: vec![Poly::zero(r + 1); r + 1],
        }
    }

    pub fn unipotent(p: Vec<Poly>) -> Self {
        let r = p.len() - 1;
        CoordinateChange { p, ..Self::identity(r) }
    }

    /// `rho_i = c_i t_i`, `sigma_i = c_i^n X_i`, `sigma_{r+1} = a_last X_{r+1}`.
    pub fn homothety(n: i64, roots: Vec<Rational>, a_last: Rational) -> Self {
        let r = roots.len();
        let mut a: Vec<Rational> = roots.iter().map(|c| num_traits::pow(c.clone(), n as usize)).collect();
        a.push(a_last);
        CoordinateChange {
            a,
            roots,
            p: vec![Poly::zero(r + 1); r + 1],
        }
    }

    pub fn r(&self) -> usize {
        self.roots.len()
    }

    /// The inverse of a pure homothety.
    pub fn homothety_inverse(&self) -> Option<Self> {
        if !self.p.iter().all(Poly::is_zero) {
            return None;
        }
        Some(CoordinateChange {
            a: self.a.iter().map(Rational::recip).collect(),
            roots: self.roots.iter().map(Rational::recip).collect(),
            p: self.p.clone(),
        })
    }

    fn rho_is_identity(&self) -> bool {
        self.roots.iter().all(Rational::is_one) && self.p[..self.r()].iter().all(Poly::is_zero)
    }

    pub fn to_json(&self) -> ChangeJson {
        ChangeJson {
            a: self.a.iter().map(ToString::to_string).collect(),
            roots: Some(self.roots.iter().map(ToString::to_string).collect()),
            p: self.p.iter().map(Poly::to_terms).collect(),
        }
    }

    /// Parse a change. Without explicit roots, each `a_i` (`i <= r`) must be
    /// the `n`-th power of a rational.
    pub fn from_json(j: &ChangeJson, n: i64) -> Result<Self, ReduceError> {
        let parse = |v: &[String]| -> Result<Vec<Rational>, ReduceError> {
            v.iter().map(|s| parse_rational(s).map_err(ReduceError::from)).collect()
        };
        let a = parse(&j.a)?;
        if a.len() < 2 || j.p.len() != a.len() {
            return Err(ReduceError::Shape(format!(
                "{} coefficients, {} polynomials",
                a.len(),
                j.p.len()
            )));
        }
        let r = a.len() - 1;
        let roots = match &j.roots {
            Some(v) => parse(v)?,
            None => a[..r]
                .iter()
                .map(|ai| {
                    rational_root(ai, n as u32)
                        .ok_or_else(|| ReduceError::Field(format!("{ai} has no rational {n}-th root")))
                })
                .collect::<Result<_, _>>()?,
        };
        let p =
            j.p.iter()
                .map(|terms| {
                    let t: Result<Vec<_>, SeriesError> = terms
                        .iter()
                        .map(|t| Ok((t.exp.clone(), parse_rational(&t.coef)?)))
                        .collect();
                    Poly::from_terms(r + 1, t?).map_err(ReduceError::from)
                })
                .collect::<Result<_, _>>()?;
        Ok(CoordinateChange { a, roots, p })
    }
}

/// `(ceil(l_1/n), ..., ceil(l_r/n))`.
pub fn ceiling_vector(n: i64, lambda1: &Exponent) -> Exponent {
    Exponent::new(lambda1.coords().iter().map(|&l| (l + n - 1).div_euclid(n)))
}

pub fn check_admissible(p: &Parameterization, c: &CoordinateChange) -> Result<(), ReduceError> {
    let r = p.r();
    let n = p.n();
    if c.a.len() != r + 1 || c.roots.len() != r || c.p.len() != r + 1 {
        return Err(ReduceError::Shape(format!("expected r = {r}")));
    }
    if c.p.iter().any(|q| q.nvars() != r + 1) {
        return Err(ReduceError::Shape("polynomials must use r + 1 variables".into()));
    }
    if c.a.iter().any(Rational::is_zero) {
        return Err(ReduceError::Field("linear coefficients must be nonzero".into()));
    }
    for i in 0..r {
        if num_traits::pow(c.roots[i].clone(), n as usize) != c.a[i] {
            return Err(ReduceError::Field(format!(
                "root {} does not satisfy c^{n} = {}",
                c.roots[i], c.a[i]
            )));
        }
    }
    let l1 = p.lambda1().coords();
    for i in 0..r {
        for m in c.p[i].terms().keys() {
            let x = m.coords();
            if x[i] >= 1 && m.total() >= 2 {
                continue;
            }
            if x[r] >= 1 {
                if l1[i] >= n {
                    continue;
                }
                return Err(ReduceError::Constraint {
                    component: i + 1,
                    coord: l1[i],
                });
            }
            return Err(ReduceError::Inadmissible {
                component: i + 1,
                monomial: m.clone(),
            });
        }
    }
    let alpha = ceiling_vector(n, p.lambda1());
    for m in c.p[r].terms().keys() {
        let x = m.coords();
        let ok = (x[r] >= 1 && m.total() >= 2) || alpha.le_product(&m.truncated(r));
        if !ok {
            return Err(ReduceError::Inadmissible {
                component: r + 1,
                monomial: m.clone(),
            });
        }
    }
    Ok(())
}

/// `H*(h) / t_i^n` at the parameterization's bound, reading `S` as exact
/// beyond it (which only affects degrees the result does not depend on).
fn h_star_over(p: &Parameterization, h: &Poly, i: usize) -> Result<FracSeries, ReduceError> {
    let d = p.trunc();
    let up = TruncationOrder::new(d.get() + p.n() as u32)?;
    let hs = h_star_to(p, h, up);
    let e = Exponent::unit(p.r(), i).scale(p.n());
    hs.div_monomial(&e)
        .map(|q| q.with_trunc(d))
        .ok_or_else(|| ReduceError::Inadmissible {
            component: i + 1,
            monomial: h
                .terms()
                .keys()
                .next()
                .cloned()
                .unwrap_or_else(|| Exponent::zero(p.r() + 1)),
        })
}

/// `sigma o H o rho^{-1}`. The result has the same bound as the input.
pub fn apply_change(p: &Parameterization, c: &CoordinateChange) -> Result<Parameterization, ReduceError> {
    check_admissible(p, c)?;
    let r = p.r();
    let n = p.n();
    let d = p.trunc();
    let s = p.s();
    let t = s.scale(&c.a[r]).add(&c.p[r].substitute(n, s, d));
    if c.rho_is_identity() {
        return Ok(p.with_series(t));
    }
    let mut rho = Vec::with_capacity(r);
    for i in 0..r {
        let mut base = FracSeries::constant(r, d, c.a[i].clone());
        if !c.p[i].is_zero() {
            base = base.add(&h_star_over(p, &c.p[i], i)?);
        }
        let root = rational_power_with_root(&base, 1, n as u32, c.roots[i].clone())?;
        rho.push(root.mul_monomial(&Exponent::unit(r, i), &Rational::one()));
    }
    let psi = invert_diagonal(&rho)?;
    for (i, (rh, ps)) in rho.iter().zip(&psi).enumerate() {
        let back = substitute_diagonal(rh, &psi)?;
        let want = FracSeries::monomial(r, d, Exponent::unit(r, i), Rational::one());
        if back != want {
            return Err(ReduceError::Field(format!("rho_{} is not inverted by {}", i + 1, ps)));
        }
    }
    Ok(p.with_series(substitute_diagonal(&t, &psi)?))
}

/// First-order change of `S` under `X_i -> X_i + P_i`:
/// `H*(P_{r+1}) - (1/n) sum_i (t_i dS/dt_i) H*(P_i) / t_i^n`.
pub fn first_order_variation(p: &Parameterization, polys: &[Poly]) -> Result<FracSeries, ReduceError> {
    let r = p.r();
    let d = p.trunc();
    if polys.len() != r + 1 {
        return Err(ReduceError::Shape(format!("expected {} polynomials", r + 1)));
    }
    let mut out = polys[r].substitute(p.n(), p.s(), d);
    let k = rat(-1, p.n());
    for (i, poly) in polys[..r].iter().enumerate() {
        if poly.is_zero() {
            continue;
        }
        let q = h_star_over(p, poly, i)?;
        out = out.add(&p.s().euler_derivative(i).mul_to(&q, d).scale(&k));
    }
    Ok(out)
}

fn require_one_exponent(p: &Parameterization) -> Result<(), ReduceError> {
    if p.g() != 1 {
        return Err(ReduceError::Unsupported(p.g()));
    }
    let issues: Vec<_> = is_normalized(p)
        .issues
        .into_iter()
        .filter(|i| *i != NormalizationIssue::LeadingCoefficient)
        .collect();
    if !issues.is_empty() {
        return Err(ReduceError::NormalizationRequired(issues));
    }
    Ok(())
}

/// The monomial `X^a X_{r+1}^k` whose value is `gamma`, for `g = 1`.
pub fn gamma_monomial(p: &Parameterization, gamma: &Exponent) -> Option<Exponent> {
    let sg = p.semigroup();
    let a = sg.standard_representation(gamma, sg.g())?;
    if a[..sg.r()].iter().any(|&x| x < 0) {
        return None;
    }
    Some(Exponent::new(a))
}

/// A direction whose first-order variation has dominant exponent `gamma`
/// for an eliminable `gamma`: a monomial in `P_{r+1}` if `gamma` is a value,
/// otherwise `P_i = X_{r+1} m_delta` for `gamma = delta + 2 lambda_1 - nu_i`.
fn eliminable_direction(p: &Parameterization, gamma: &Exponent) -> Option<Vec<Poly>> {
    let r = p.r();
    let mut polys = vec![Poly::zero(r + 1); r + 1];
    if let Some(m) = gamma_monomial(p, gamma) {
        polys[r] = Poly::monomial(m, Rational::one());
        return Some(polys);
    }
    let sg = p.semigroup();
    for i in sg.shift_directions() {
        let delta = sg.unshift(gamma, i);
        if let Some(m) = gamma_monomial(p, &delta) {
            let mut m = m;
            m.coords_mut()[r] += 1;
            polys[i] = Poly::monomial(m, Rational::one());
            return Some(polys);
        }
    }
    None
}

fn scale_polys(polys: &[Poly], k: &Rational) -> Vec<Poly> {
    polys.iter().map(|q| q.scale(k)).collect()
}

/// Remove the term at an eliminable `gamma`, leaving every lower term intact.
pub fn eliminate_term(
    p: &Parameterization,
    gamma: &Exponent,
) -> Result<(Parameterization, CoordinateChange), ReduceError> {
    require_one_exponent(p)?;
    let l1 = p.lambda1();
    if !l1.lt_product(gamma) || !p.semigroup().eliminable_set_member(gamma) {
        return Err(ReduceError::NotEliminable(gamma.clone()));
    }
    let b = p.s().coeff(gamma);
    if b.is_zero() {
        return Ok((p.clone(), CoordinateChange::identity(p.r())));
    }
    let dir = eliminable_direction(p, gamma).ok_or_else(|| ReduceError::NotEliminable(gamma.clone()))?;
    let lead = first_order_variation(p, &dir)?.coeff(gamma);
    if lead.is_zero() {
        return Err(ReduceError::NotEliminable(gamma.clone()));
    }
    let mut c = -&b / &lead;
    for _ in 0..=p.trunc().get() {
        let change = CoordinateChange::unipotent(scale_polys(&dir, &c));
        let q = apply_change(p, &change)?;
        let residual = q.s().coeff(gamma);
        if residual.is_zero() {
            return Ok((q, change));
        }
        c -= residual / &lead;
    }
    Err(ReduceError::Stalled(gamma.clone()))
}

/// A base direction with its first-order variation; generators multiply it
/// by a monomial.
pub(crate) struct Family {
    pub polys: Vec<Poly>,
    pub delta: FracSeries,
}

pub(crate) struct Generator {
    pub family: usize,
    pub mono: Exponent,
}

/// Caches `H*(X^m) = t^{n m'} S^k` for the batch solver.
struct Values {
    n: i64,
    r: usize,
    d: TruncationOrder,
    powers: Vec<FracSeries>,
}

impl Values {
    fn new(p: &Parameterization) -> Self {
        Values {
            n: p.n(),
            r: p.r(),
            d: p.trunc(),
            powers: vec![FracSeries::one(p.r(), p.trunc()), p.s().clone()],
        }
    }

    fn of(&mut self, m: &Exponent) -> FracSeries {
        let k = m.coords()[self.r] as usize;
        while self.powers.len() <= k {
            let next = self.powers.last().expect("nonempty").mul_to(&self.powers[1], self.d);
            self.powers.push(next);
        }
        let shift = Exponent::new(m.coords()[..self.r].iter().map(|x| x * self.n));
        self.powers[k].mul_monomial(&shift, &Rational::one())
    }
}

pub(crate) trait Planner {
    /// Whether `e` (a support exponent other than `lambda_1`) must vanish.
    fn is_target(&self, e: &Exponent) -> bool;
    /// A generator with first-order dominant contribution at `e`.
    fn generator(&self, e: &Exponent) -> Option<Generator>;
    /// Base directions with variations computed at `p`.
    fn families(&self, p: &Parameterization) -> Result<Vec<Family>, ReduceError>;
}

/// Exact solve of `M c = rhs` where column `k` is supported on rows given by
/// `cols[k]` and is meant to pivot on `pivots[k]`.
fn sparse_solve(
    cols: &[BTreeMap<Exponent, Rational>],
    pivots: &[Exponent],
    rhs: &BTreeMap<Exponent, Rational>,
) -> Option<Vec<Rational>> {
    let triangular = cols
        .iter()
        .zip(pivots)
        .all(|(col, piv)| col.keys().all(|row| row >= piv));
    let mut order: Vec<usize> = (0..cols.len()).collect();
    order.sort_by(|&a, &b| pivots[a].cmp(&pivots[b]));
    if triangular {
        let mut res = rhs.clone();
        let mut c = vec![Rational::zero(); cols.len()];
        for &k in &order {
            let d = cols[k].get(&pivots[k])?;
            let v = res.remove(&pivots[k]).unwrap_or_else(Rational::zero);
            if v.is_zero() {
                continue;
            }
            let ck = v / d;
            for (row, x) in &cols[k] {
                if row != &pivots[k] {
                    let slot = res.entry(row.clone()).or_insert_with(Rational::zero);
                    *slot -= &ck * x;
                }
            }
            c[k] = ck;
        }
        return if res.values().all(Rational::is_zero) {
            Some(c)
        } else {
            None
        };
    }
    let mut rows: BTreeMap<Exponent, (BTreeMap<usize, Rational>, Rational)> = BTreeMap::new();
    for (k, col) in cols.iter().enumerate() {
        for (row, x) in col {
            rows.entry(row.clone()).or_default().0.insert(k, x.clone());
        }
    }
    for (row, v) in rhs {
        rows.entry(row.clone()).or_default().1 = v.clone();
    }
    let mut pivoted: Vec<(usize, BTreeMap<usize, Rational>, Rational)> = Vec::new();
    for &k in &order {
        let choice = if rows.get(&pivots[k]).is_some_and(|r| r.0.contains_key(&k)) {
            Some(pivots[k].clone())
        } else {
            rows.iter().find(|(_, r)| r.0.contains_key(&k)).map(|(e, _)| e.clone())
        };
        let Some(key) = choice else { continue };
        let (prow, prhs) = rows.remove(&key).expect("present");
        let pv = prow[&k].clone();
        for (row, v) in rows.values_mut() {
            let Some(f) = row.get(&k).cloned() else { continue };
            let f = f / &pv;
            for (j, x) in &prow {
                let slot = row.entry(*j).or_insert_with(Rational::zero);
                *slot -= &f * x;
                if slot.is_zero() {
                    row.remove(j);
                }
            }
            *v -= &f * &prhs;
        }
        pivoted.push((k, prow, prhs));
    }
    if rows.values().any(|(_, v)| !v.is_zero()) {
        return None;
    }
    let mut c = vec![Rational::zero(); cols.len()];
    for (k, row, v) in pivoted.into_iter().rev() {
        let mut acc = v;
        for (j, x) in &row {
            if *j != k {
                acc -= x * &c[*j];
            }
        }
        c[k] = acc / &row[&k];
    }
    Some(c)
}

/// Repeatedly cancel every target term to first order with one combined
/// change, until no target remains below the bound. Second-order terms of a
/// pass may land below the targets it removed (at `lambda_1 + 2 gamma` for a
/// change attached to `gamma`), so progress is bounded by a pass count
/// rather than by the smallest target.
pub(crate) fn eliminate_batch(
    p: &Parameterization,
    planner: &dyn Planner,
) -> Result<(Parameterization, Vec<CoordinateChange>), ReduceError> {
    let r = p.r();
    let l1 = p.lambda1().clone();
    let mut cur = p.clone();
    let mut changes = Vec::new();
    let mut last_min: Option<Exponent> = None;
    for _ in 0..max_passes(p) {
        let targets: Vec<Exponent> = cur
            .s()
            .support()
            .filter(|e| **e != l1 && planner.is_target(e))
            .cloned()
            .collect();
        let Some(min) = targets.first().cloned() else {
            return Ok((cur, changes));
        };
        last_min = Some(min);
        let families = planner.families(&cur)?;
        let mut values = Values::new(&cur);
        let mut queue: Vec<Exponent> = targets.clone();
        let mut seen: BTreeSet<Exponent> = targets.iter().cloned().collect();
        let mut gens: Vec<(Exponent, Generator, FracSeries)> = Vec::new();
        while let Some(e) = queue.pop() {
            let g = planner
                .generator(&e)
                .ok_or_else(|| ReduceError::NotEliminable(e.clone()))?;
            let delta = values.of(&g.mono).mul_to(&families[g.family].delta, cur.trunc());
            for f in delta.support() {
                if *f != l1 && !seen.contains(f) && planner.is_target(f) {
                    seen.insert(f.clone());
                    queue.push(f.clone());
                }
            }
            gens.push((e, g, delta));
        }
        let cols: Vec<BTreeMap<Exponent, Rational>> = gens
            .iter()
            .map(|(_, _, d)| {
                d.iter()
                    .filter(|(e, _)| seen.contains(*e))
                    .map(|(e, c)| (e.clone(), c.clone()))
                    .collect()
            })
            .collect();
        let pivots: Vec<Exponent> = gens.iter().map(|(e, _, _)| e.clone()).collect();
        let rhs: BTreeMap<Exponent, Rational> = targets.iter().map(|e| (e.clone(), -cur.s().coeff(e))).collect();
        let coeffs = sparse_solve(&cols, &pivots, &rhs).ok_or(ReduceError::Singular)?;
        let mut polys = vec![Poly::zero(r + 1); r + 1];
        for ((_, g, _), c) in gens.iter().zip(&coeffs) {
            if c.is_zero() {
                continue;
            }
            for (k, fp) in families[g.family].polys.iter().enumerate() {
                if !fp.is_zero() {
                    polys[k] = polys[k].add(&fp.mul_monomial(&g.mono, c));
                }
            }
        }
        let change = CoordinateChange::unipotent(polys);
        cur = apply_change(&cur, &change)?;
        changes.push(change);
    }
    Err(ReduceError::Stalled(last_min.unwrap_or(l1)))
}

fn max_passes(p: &Parameterization) -> u32 {
    2 * p.trunc().get() + 4
}

/// Families for the eliminable set: index 0 is `P_{r+1} = 1`, index `i + 1`
/// is `P_i = X_{r+1}` (present only for shift directions).
pub(crate) fn eliminable_families(p: &Parameterization) -> Result<Vec<Family>, ReduceError> {
    let r = p.r();
    let mut families = Vec::with_capacity(r + 1);
    let mut unit = vec![Poly::zero(r + 1); r + 1];
    unit[r] = Poly::constant(r + 1, Rational::one());
    families.push(Family {
        polys: unit,
        delta: FracSeries::one(r, p.trunc()),
    });
    for i in 0..r {
        let mut polys = vec![Poly::zero(r + 1); r + 1];
        let delta = if p.lambda1().coords()[i] >= p.n() {
            polys[i] = Poly::var(r + 1, r);
            first_order_variation(p, &polys)?
        } else {
            FracSeries::zero(r, p.trunc())
        };
        families.push(Family { polys, delta });
    }
    Ok(families)
}

/// Generator for an eliminable exponent in terms of [`eliminable_families`].
pub(crate) fn eliminable_generator(p: &Parameterization, e: &Exponent) -> Option<Generator> {
    let dir = eliminable_direction(p, e)?;
    let r = p.r();
    let (k, q) = dir.iter().enumerate().find(|(_, q)| !q.is_zero())?;
    let m = q.terms().keys().next()?.clone();
    if k == r {
        return Some(Generator { family: 0, mono: m });
    }
    let mut m = m;
    m.coords_mut()[r] -= 1;
    Some(Generator { family: k + 1, mono: m })
}

struct QuasiShort<'a> {
    p: &'a Parameterization,
}

impl Planner for QuasiShort<'_> {
    fn is_target(&self, e: &Exponent) -> bool {
        self.p.semigroup().eliminable_set_member(e)
    }

    fn generator(&self, e: &Exponent) -> Option<Generator> {
        eliminable_generator(self.p, e)
    }

    fn families(&self, p: &Parameterization) -> Result<Vec<Family>, ReduceError> {
        eliminable_families(p)
    }
}

/// A parameterization equivalent to `p` up to its bound, with the changes
/// used.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub param: Parameterization,
    pub changes: Vec<CoordinateChange>,
}

/// Remove every eliminable term of the tail.
pub fn quasi_short_reduce(p: &Parameterization) -> Result<Reduction, ReduceError> {
    require_one_exponent(p)?;
    let (param, changes) = eliminate_batch(p, &QuasiShort { p })?;
    Ok(Reduction { param, changes })
}

/// Outcome of [`normalize_coefficients`].
#[derive(Debug, Clone)]
pub enum Normalization {
    Normalized {
        param: Parameterization,
        change: CoordinateChange,
    },
    Certificate(NormalizationCertificate),
}

/// Why a normalization needs irrational scalars: `c^{shift_k} = ratio_k`
/// must hold, and after the Smith reduction this requires
/// `y_m^{d_m} = q_m` with no rational solution for some `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizationCertificate {
    pub shifts: Vec<Exponent>,
    pub ratios: Vec<String>,
    pub invariant_factors: Vec<i128>,
    pub reduced_rhs: Vec<String>,
    pub blocking: usize,
}

fn rational_int_pow(x: &Rational, k: i128) -> Rational {
    let base = if k < 0 { x.recip() } else { x.clone() };
    num_traits::pow(base, k.unsigned_abs() as usize)
}

/// Homothety making the coefficients at `lambda_1` and each target equal 1.
pub fn normalize_coefficients(p: &Parameterization, targets: &[Exponent]) -> Result<Normalization, ReduceError> {
    let r = p.r();
    let n = p.n();
    let l1 = p.lambda1();
    let b_l = p.s().coeff(l1);
    let shifts: Vec<Exponent> = targets.iter().map(|d| d - l1).collect();
    let ratios: Vec<Rational> = targets.iter().map(|d| p.s().coeff(d) / &b_l).collect();
    if ratios.iter().any(Rational::is_zero) {
        return Err(ReduceError::NotEliminable(
            targets[ratios.iter().position(Rational::is_zero).unwrap()].clone(),
        ));
    }
    let m: Vec<Vec<i128>> = shifts
        .iter()
        .map(|s| s.coords().iter().map(|&x| x as i128).collect())
        .collect();
    let mut roots = vec![Rational::one(); r];
    if !shifts.is_empty() {
        let (u, diag, v) = smith_normal_form(&m);
        if diag.len() < shifts.len() || diag.contains(&0) {
            return Err(ReduceError::DependentTargets);
        }
        let mut y = vec![Rational::one(); r];
        let mut reduced = Vec::with_capacity(diag.len());
        for (k, &dk) in diag.iter().enumerate() {
            let q = ratios
                .iter()
                .enumerate()
                .fold(Rational::one(), |acc, (j, rj)| acc * rational_int_pow(rj, u[k][j]));
            reduced.push(q.clone());
            let q = if dk < 0 { q.recip() } else { q };
            match rational_root(&q, dk.unsigned_abs() as u32) {
                Some(root) => y[k] = root,
                None => {
                    return Ok(Normalization::Certificate(NormalizationCertificate {
                        shifts,
                        ratios: ratios.iter().map(ToString::to_string).collect(),
                        invariant_factors: diag,
                        reduced_rhs: reduced.iter().map(ToString::to_string).collect(),
                        blocking: k,
                    }));
                }
            }
        }
        for (j, root) in roots.iter_mut().enumerate() {
            *root = (0..r).fold(Rational::one(), |acc, l| acc * rational_int_pow(&y[l], v[j][l]));
        }
    }
    let c_l1 = (0..r).fold(Rational::one(), |acc, j| {
        acc * rational_int_pow(&roots[j], l1.coords()[j] as i128)
    });
    let a_last = c_l1 / &b_l;
    let change = CoordinateChange::homothety(n, roots, a_last);
    let q = apply_change(p, &change)?;
    debug_assert!(q.s().coeff(l1).is_one());
    debug_assert!(targets.iter().all(|t| q.s().coeff(t).is_one()));
    Ok(Normalization::Normalized { param: q, change })
}

/// Options for [`random_admissible_change`].
#[derive(Debug, Clone, Copy)]
pub struct RandomChangeOptions {
    pub max_terms: usize,
    pub max_degree: i64,
    pub homothety: bool,
}

impl Default for RandomChangeOptions {
    fn default() -> Self {
        RandomChangeOptions {
            max_terms: 4,
            max_degree: 3,
            homothety: true,
        }
    }
}

fn random_rational<R: Rng>(rng: &mut R, nonzero: bool) -> Rational {
    loop {
        let num = rng.gen_range(-5i64..=5);
        let den = rng.gen_range(1i64..=4);
        if !nonzero || num != 0 {
            return rat(num, den);
        }
    }
}

fn random_monomial<R: Rng>(rng: &mut R, nvars: usize, degree: i64) -> Exponent {
    let mut e = vec![0i64; nvars];
    for _ in 0..degree {
        e[rng.gen_range(0..nvars)] += 1;
    }
    Exponent::new(e)
}

/// A random element of the admissible group for `p`, with at most
/// `max_terms` monomials per component.
pub fn random_admissible_change<R: Rng>(
    p: &Parameterization,
    rng: &mut R,
    opts: RandomChangeOptions,
) -> CoordinateChange {
    let r = p.r();
    let n = p.n();
    let l1 = p.lambda1().coords().to_vec();
    let alpha = ceiling_vector(n, p.lambda1());
    let mut polys = vec![Poly::zero(r + 1); r + 1];
    for (i, poly) in polys.iter_mut().enumerate() {
        let terms = rng.gen_range(0..=opts.max_terms);
        for _ in 0..terms {
            let deg = rng.gen_range(1..=opts.max_degree.max(1));
            let rest = random_monomial(rng, r + 1, deg - 1);
            let mut m = rest.coords().to_vec();
            if i < r {
                if l1[i] >= n && rng.gen_bool(0.5) {
                    m[r] += 1;
                } else {
                    m[i] += 1;
                    if m.iter().sum::<i64>() < 2 {
                        m[rng.gen_range(0..=r)] += 1;
                    }
                }
            } else if rng.gen_bool(0.5) {
                m[r] += 1;
                if m.iter().sum::<i64>() < 2 {
                    m[rng.gen_range(0..=r)] += 1;
                }
            } else {
                for (j, x) in alpha.coords().iter().enumerate() {
                    m[j] += x;
                }
            }
            poly.add_term(Exponent::new(m), random_rational(rng, true));
        }
    }
    let mut change = CoordinateChange::unipotent(polys);
    if opts.homothety {
        let roots: Vec<Rational> = (0..r)
            .map(|_| {
                let num = rng.gen_range(1i64..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
                rat(num, rng.gen_range(1i64..=3))
            })
            .collect();
        change.a = roots.iter().map(|c| num_traits::pow(c.clone(), n as usize)).collect();
        change.a.push(random_rational(rng, true));
        change.roots = roots;
    }
    change
}

/// Rescale `S` so that its `lambda_1` coefficient is 1.
pub fn monic(p: &Parameterization) -> Parameterization {
    let b = p.s().coeff(p.lambda1());
    if b.is_one() || b.is_zero() {
        return p.clone();
    }
    p.with_series(p.s().scale(&b.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::validate;
    use crate::series::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(v: &[i64]) -> Exponent {
        Exponent::new(v.iter().copied())
    }

    fn param(n: i64, d: u32, terms: &[(&[i64], Rational)]) -> Parameterization {
        let s = FracSeries::from_terms(
            2,
            TruncationOrder::new(d).unwrap(),
            terms.iter().map(|(x, c)| (e(x), c.clone())),
        )
        .unwrap();
        validate(2, n, s).unwrap()
    }

    fn mono(v: &[i64], c: Rational) -> Poly {
        Poly::monomial(e(v), c)
    }

    fn hc(c: Rational) -> Parameterization {
        param(
            5,
            30,
            &[(&[5, 1], int(1)), (&[5, 8], int(1)), (&[5, 9], c), (&[10, 4], int(1))],
        )
    }

    #[test]
    fn identity_change() {
        let p = hc(int(1));
        let q = apply_change(&p, &CoordinateChange::identity(2)).unwrap();
        assert_eq!(q.s(), p.s());
    }

    #[test]
    fn homothety_rescales_coefficients() {
        let p = hc(int(0));
        let c = CoordinateChange::homothety(5, vec![int(2), int(3)], int(96));
        assert_eq!(c.a, vec![int(32), int(243), int(96)]);
        let q = apply_change(&p, &c).unwrap();
        let got: Vec<_> = q.s().support().cloned().collect();
        let want: Vec<_> = p.s().support().cloned().collect();
        assert_eq!(got, want);
        for (x, b) in p.s().iter() {
            let k =
                num_traits::pow(rat(1, 2), x.coords()[0] as usize) * num_traits::pow(rat(1, 3), x.coords()[1] as usize);
            assert_eq!(q.s().coeff(x), int(96) * b * k);
        }
        let back = apply_change(&q, &c.homothety_inverse().unwrap()).unwrap();
        assert_eq!(back.s(), p.s());
    }

    #[test]
    fn gamma_monomial_recomposes() {
        let p = param(5, 30, &[(&[5, 1], int(1)), (&[10, 6], int(1))]);
        let m = gamma_monomial(&p, &e(&[10, 6])).unwrap();
        assert_eq!(m, e(&[1, 1, 1]));
        assert_eq!(p.semigroup().recompose(m.coords()), e(&[10, 6]));
    }

    #[test]
    fn eliminate_value_term() {
        let p = param(5, 30, &[(&[5, 1], int(1)), (&[10, 6], int(1))]);
        let (q, change) = eliminate_term(&p, &e(&[10, 6])).unwrap();
        assert!(q.s().coeff(&e(&[10, 6])).is_zero());
        assert_eq!(q.s().coeff(&e(&[5, 1])), int(1));
        for (x, b) in p.s().iter().filter(|(x, _)| **x < e(&[10, 6])) {
            assert_eq!(&q.s().coeff(x), b);
        }
        assert_eq!(change.p[2].terms().keys().next(), Some(&e(&[1, 1, 1])));
        assert_eq!(change.p[2].terms().values().next(), Some(&int(-1)));
    }

    #[test]
    fn eliminate_shifted_term() {
        let p = param(3, 24, &[(&[4, 3], int(1)), (&[5, 6], rat(2, 3))]);
        let (q, change) = eliminate_term(&p, &e(&[5, 6])).unwrap();
        assert!(q.s().coeff(&e(&[5, 6])).is_zero());
        assert_eq!(q.s().coeff(&e(&[4, 3])), int(1));
        assert_eq!(change.p[0].terms().keys().next(), Some(&e(&[0, 0, 1])));
        assert!(change.p[2].is_zero());
    }

    #[test]
    fn lambda_one_not_eliminable() {
        let p = hc(int(1));
        assert_eq!(
            eliminate_term(&p, &e(&[5, 1])).unwrap_err(),
            ReduceError::NotEliminable(e(&[5, 1]))
        );
        assert!(matches!(
            eliminate_term(&p, &e(&[5, 8])),
            Err(ReduceError::NotEliminable(_))
        ));
    }

    #[test]
    fn admissibility_errors() {
        let p = hc(int(1));
        let z = Poly::zero(3);
        let c = CoordinateChange::unipotent(vec![z.clone(), Poly::var(3, 2), z.clone()]);
        assert_eq!(
            check_admissible(&p, &c),
            Err(ReduceError::Constraint { component: 2, coord: 1 })
        );
        let c = CoordinateChange::unipotent(vec![Poly::var(3, 1), z.clone(), z.clone()]);
        assert!(matches!(
            check_admissible(&p, &c),
            Err(ReduceError::Inadmissible { component: 1, .. })
        ));
        // alpha = (1, 1): X_1 alone is not allowed in P_3, X_1 X_2 is
        let c = CoordinateChange::unipotent(vec![z.clone(), z.clone(), Poly::var(3, 0)]);
        assert!(matches!(
            check_admissible(&p, &c),
            Err(ReduceError::Inadmissible { component: 3, .. })
        ));
        let c = CoordinateChange::unipotent(vec![z.clone(), z.clone(), mono(&[1, 1, 0], int(1))]);
        assert!(check_admissible(&p, &c).is_ok());
        let mut c = CoordinateChange::identity(2);
        c.a[0] = int(2);
        assert!(matches!(check_admissible(&p, &c), Err(ReduceError::Field(_))));
    }

    #[test]
    fn change_json_round_trip() {
        let c = CoordinateChange {
            a: vec![int(32), int(1), rat(1, 2)],
            roots: vec![int(2), int(1)],
            p: vec![mono(&[2, 0, 0], rat(3, 4)), Poly::zero(3), mono(&[0, 0, 2], int(-1))],
        };
        let j = serde_json::to_string(&c.to_json()).unwrap();
        let back: ChangeJson = serde_json::from_str(&j).unwrap();
        assert_eq!(CoordinateChange::from_json(&back, 5).unwrap(), c);
        let mut no_roots = back.clone();
        no_roots.roots = None;
        assert_eq!(CoordinateChange::from_json(&no_roots, 5).unwrap(), c);
        no_roots.a[0] = "3".into();
        assert!(matches!(
            CoordinateChange::from_json(&no_roots, 5),
            Err(ReduceError::Field(_))
        ));
    }

    #[test]
    fn first_order_variation_matches_psi() {
        let p = param(3, 20, &[(&[4, 3], int(1)), (&[7, 6], rat(2, 5)), (&[8, 6], int(-1))]);
        let polys = vec![
            mono(&[0, 0, 1], rat(1, 3)).add(&mono(&[2, 0, 0], int(2))),
            mono(&[0, 1, 1], int(-1)),
            mono(&[0, 0, 2], rat(5, 2)).add(&mono(&[2, 1, 0], int(1))),
        ];
        let delta = first_order_variation(&p, &polys).unwrap();
        let omega = crate::branch::RForm::from_change(&polys);
        let got = crate::branch::psi(&p, &omega).unwrap();
        let want = delta.mul_monomial(&e(&[3, 3]), &int(9));
        let d = got.trunc().as_i64().min(want.trunc().as_i64());
        assert!(d > 10);
        assert!(got.agrees_up_to(&want, d));
    }

    #[test]
    fn n_two_collapses() {
        let p = param(
            2,
            20,
            &[
                (&[3, 1], int(1)),
                (&[5, 1], rat(1, 2)),
                (&[4, 4], int(3)),
                (&[3, 3], int(-2)),
            ],
        );
        let red = quasi_short_reduce(&p).unwrap();
        assert_eq!(red.param.s().terms().len(), 1);
        assert_eq!(red.param.s().coeff(&e(&[3, 1])), int(1));
    }

    #[test]
    fn normal_surface_collapses() {
        let p = param(
            4,
            16,
            &[
                (&[1, 1], int(1)),
                (&[2, 2], int(5)),
                (&[1, 5], rat(-1, 7)),
                (&[6, 2], int(1)),
            ],
        );
        let red = quasi_short_reduce(&p).unwrap();
        assert_eq!(red.param.s().terms().len(), 1);
        assert_eq!(red.param.s().coeff(&e(&[1, 1])), int(1));
    }

    #[test]
    fn reduction_is_idempotent() {
        let p = param(
            5,
            30,
            &[
                (&[5, 1], int(1)),
                (&[5, 8], int(1)),
                (&[10, 6], int(2)),
                (&[10, 4], int(1)),
            ],
        );
        let red = quasi_short_reduce(&p).unwrap();
        assert!(red.param.s().coeff(&e(&[10, 6])).is_zero());
        assert_eq!(red.param.s().coeff(&e(&[5, 8])), int(1));
        assert_eq!(red.param.s().coeff(&e(&[10, 4])), int(1));
        let again = quasi_short_reduce(&red.param).unwrap();
        assert!(again.changes.is_empty());
        assert_eq!(again.param.s(), red.param.s());
    }

    #[test]
    fn normalization_of_example() {
        let p = hc(int(1));
        match normalize_coefficients(&p, &[e(&[5, 8]), e(&[10, 4])]).unwrap() {
            Normalization::Normalized { param, change } => {
                assert_eq!(change.roots, vec![int(1), int(1)]);
                assert_eq!(param.s(), p.s());
            }
            other => panic!("{other:?}"),
        }
        // c = (2, 3): ratios c^(0,7) and c^(5,3)
        let p = param(
            5,
            30,
            &[(&[5, 1], int(3)), (&[5, 8], int(3 * 2187)), (&[10, 4], int(3 * 864))],
        );
        match normalize_coefficients(&p, &[e(&[5, 8]), e(&[10, 4])]).unwrap() {
            Normalization::Normalized { param, .. } => {
                for x in [e(&[5, 1]), e(&[5, 8]), e(&[10, 4])] {
                    assert_eq!(param.s().coeff(&x), int(1));
                }
            }
            other => panic!("{other:?}"),
        }
        let p = param(
            5,
            30,
            &[(&[5, 1], int(1)), (&[5, 8], rat(7, 3)), (&[10, 4], rat(-2, 27))],
        );
        match normalize_coefficients(&p, &[e(&[5, 8]), e(&[10, 4])]).unwrap() {
            Normalization::Certificate(c) => assert_eq!(c.invariant_factors, vec![1, 35]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn normalization_certificate() {
        let p = param(3, 20, &[(&[4, 3], int(1)), (&[7, 6], int(2))]);
        match normalize_coefficients(&p, &[e(&[7, 6])]).unwrap() {
            Normalization::Certificate(c) => {
                assert_eq!(c.invariant_factors, vec![3]);
                assert_eq!(c.reduced_rhs, vec!["2".to_string()]);
            }
            other => panic!("{other:?}"),
        }
        let p = param(3, 20, &[(&[4, 3], int(1)), (&[7, 6], int(8))]);
        assert!(matches!(
            normalize_coefficients(&p, &[e(&[7, 6])]).unwrap(),
            Normalization::Normalized { .. }
        ));
        assert!(matches!(
            normalize_coefficients(&p, &[]).unwrap(),
            Normalization::Normalized { .. }
        ));
    }

    #[test]
    fn random_changes_are_admissible() {
        let p = hc(rat(7, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let c = random_admissible_change(&p, &mut rng, RandomChangeOptions::default());
            assert_eq!(check_admissible(&p, &c), Ok(()));
        }
    }
}
