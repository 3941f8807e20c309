//! Quasi-simple classes of surface branches with one characteristic
//! exponent, and reduction to their normal forms.

use std::fmt;

use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::branch::{validate, Parameterization, RForm};
use crate::lattice::Exponent;
use crate::reduce::{
    eliminable_families, eliminable_generator, eliminate_batch, first_order_variation, gamma_monomial, monic,
    normalize_coefficients, quasi_short_reduce, Family, Generator, Normalization, NormalizationCertificate, Planner,
    ReduceError,
};
use crate::semigroup::{build_semigroup, SemigroupData};
use crate::series::{int, FracSeries, Rational, TruncationOrder};
use crate::zariski::{
    can_admit_three, candidate_zariski_search, default_search_bound, direct_exponents, find_antichain3,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("invalid class: {0}")]
    InvalidClass(String),
    #[error("unsupported class: r = {r}, g = {g}")]
    UnsupportedClass { r: usize, g: usize },
    #[error("class data is not normalized; use lambda_1 = {0}")]
    NotNormalized(Exponent),
    #[error("not quasi-simple: {0}")]
    NotQuasiSimple(Box<Verdict>),
    #[error("internal error: Zariski exponents {exponents:?} do not match case {case}")]
    TemplateMismatch { case: CaseLabel, exponents: Vec<Exponent> },
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLabel {
    A,
    B,
    C1,
    C2,
    C3,
    D1,
    D2,
    D3,
    D4,
    E,
    F,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::A => "a",
            CaseLabel::B => "b",
            CaseLabel::C1 => "c1",
            CaseLabel::C2 => "c2",
            CaseLabel::C3 => "c3",
            CaseLabel::D1 => "d1",
            CaseLabel::D2 => "d2",
            CaseLabel::D3 => "d3",
            CaseLabel::D4 => "d4",
            CaseLabel::E => "e",
            CaseLabel::F => "f",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A topological class `(n, lambda_1)` with `r = 2`, `g = 1`.
#[derive(Debug, Clone)]
pub struct TopClass {
    n: i64,
    lambda1: Exponent,
    normalized: bool,
    semigroup: SemigroupData,
}

impl TopClass {
    /// Builds the class, swapping coordinates if needed. `normalized()`
    /// reports whether the input was already in normalized form.
    pub fn new(n: i64, lambda1: &Exponent) -> Result<Self, ClassifyError> {
        if lambda1.dim() != 2 {
            return Err(ClassifyError::UnsupportedClass { r: lambda1.dim(), g: 1 });
        }
        if n < 2 {
            return Err(ClassifyError::InvalidClass(format!("n = {n}")));
        }
        let (x, y) = (lambda1.coords()[0], lambda1.coords()[1]);
        if x < 0 || y < 0 || x + y == 0 {
            return Err(ClassifyError::InvalidClass(format!("lambda_1 = {lambda1}")));
        }
        let g = n.gcd(&x).gcd(&y);
        if g != 1 {
            return Err(ClassifyError::InvalidClass(format!("gcd(n, lambda_1) = {g}")));
        }
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        if lo == 0 && hi <= n {
            return Err(ClassifyError::InvalidClass(format!(
                "lambda_1 = ({hi},0) with {hi} <= n"
            )));
        }
        let l = Exponent::new([hi, lo]);
        let semigroup =
            build_semigroup(2, n, std::slice::from_ref(&l)).map_err(|e| ClassifyError::InvalidClass(e.to_string()))?;
        Ok(TopClass {
            n,
            normalized: l == *lambda1,
            lambda1: l,
            semigroup,
        })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn lambda1(&self) -> &Exponent {
        &self.lambda1
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn semigroup(&self) -> &SemigroupData {
        &self.semigroup
    }
}

/// The case of the classification table, if any.
pub fn case_of(n: i64, lambda1: &Exponent) -> Option<CaseLabel> {
    let (l1, l2) = (lambda1.coords()[0], lambda1.coords()[1]);
    let p = (l1, l2);
    if n == 2 {
        return Some(CaseLabel::A);
    }
    if p == (1, 1) {
        return Some(CaseLabel::B);
    }
    match n {
        3 => {
            if (2..=5).contains(&l1) && 1 <= l2 && l2 <= l1 && p != (3, 3) {
                Some(CaseLabel::C1)
            } else if (6..=8).contains(&l1) && (1..=5).contains(&l2) && p != (6, 3) {
                Some(CaseLabel::C2)
            } else if (9..=11).contains(&l1) && (0..=2).contains(&l2) && p != (9, 0) {
                Some(CaseLabel::C3)
            } else {
                None
            }
        }
        4 => {
            if l2 == 1 && (2..=3).contains(&l1) {
                Some(CaseLabel::D1)
            } else if 2 <= l2 && l2 <= l1 && l1 <= 3 && p != (2, 2) {
                Some(CaseLabel::D2)
            } else if (1..=3).contains(&l2) && (4..=5).contains(&l1) && p != (4, 2) {
                Some(CaseLabel::D3)
            } else if (0..=1).contains(&l2) && (6..=7).contains(&l1) && p != (6, 0) {
                Some(CaseLabel::D4)
            } else {
                None
            }
        }
        5 if matches!(p, (2, 1) | (3, 1) | (2, 2)) => Some(CaseLabel::E),
        6 | 7 if p == (2, 1) => Some(CaseLabel::F),
        _ => None,
    }
}

/// Why a class is not quasi-simple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RejectionReason {
    /// One of the three inequalities holds; the triple is its witness.
    ThreeExponentCondition {
        condition: u8,
        triple: [Exponent; 3],
        verified: bool,
    },
    /// `(5, (5,1))`: two Zariski exponents with a continuous modulus.
    TwoExponentModuli,
    /// Three pairwise incomparable non-eliminable exponents found by search.
    ThreeExponentAntichain { triple: [Exponent; 3] },
    /// No obstruction identified, but the class is not in the table.
    OutsideCaseTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub n: i64,
    pub lambda1: Exponent,
    pub quasi_simple: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectionReason>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n = {}, lambda_1 = {}: ", self.n, self.lambda1)?;
        match (&self.case, &self.reason) {
            (Some(c), _) => write!(f, "quasi-simple, case {c}"),
            (None, Some(r)) => write!(f, "not quasi-simple ({r:?})"),
            (None, None) => write!(f, "not quasi-simple"),
        }
    }
}

pub fn is_quasi_simple(class: &TopClass) -> Verdict {
    let case = case_of(class.n, &class.lambda1);
    let reason = if case.is_some() {
        None
    } else {
        Some(rejection_reason(class))
    };
    Verdict {
        n: class.n,
        lambda1: class.lambda1.clone(),
        quasi_simple: case.is_some(),
        case,
        reason,
    }
}

fn rejection_reason(class: &TopClass) -> RejectionReason {
    let sg = &class.semigroup;
    if let Ok(Some(w)) = can_admit_three(sg) {
        return RejectionReason::ThreeExponentCondition {
            condition: w.condition,
            triple: w.triple,
            verified: w.verified,
        };
    }
    if class.n == 5 && class.lambda1 == Exponent::new([5, 1]) {
        return RejectionReason::TwoExponentModuli;
    }
    let bound = default_search_bound(sg).max(4 * class.lambda1.total());
    if let Ok(pool) = candidate_zariski_search(sg, bound) {
        if let Some(triple) = find_antichain3(&pool) {
            return RejectionReason::ThreeExponentAntichain { triple };
        }
    }
    RejectionReason::OutsideCaseTable
}

/// A 0/1 flag of a normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    A,
    B,
    C,
}

/// Which index a slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Index {
    I,
    J,
}

/// Shape of the shift `n (p, q)` of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Fixed(i64, i64),
    /// `(p, index)` with `index >= min`.
    FreeSecond {
        p: i64,
        min: i64,
    },
    /// `(index, q)` with `index >= min`.
    FreeFirst {
        q: i64,
        min: i64,
    },
}

/// One optional term `k lambda_1 + n (p, q)` of a normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub flag: Flag,
    pub k: i64,
    pub pattern: Pattern,
    pub index: Option<Index>,
}

/// Combinations excluded by a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideCondition {
    None,
    /// Not both `a` and `b` when `i = -1`.
    NotBothWhenIMinusOne,
    /// Not both `a` and `b` when `i >= j`.
    NotBothWhenIAtLeastJ,
    /// Not both `a` and `b` when `j <= i`.
    NotBothWhenJAtMostI,
    /// `a` excludes `b` and `c`.
    AExcludesOthers,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub case: CaseLabel,
    pub n: i64,
    pub lambda1: Exponent,
    pub slots: Vec<Slot>,
    pub side: SideCondition,
}

/// Flags and indices of a normal form. Absent flags are zero; an index is
/// present only when its flag is set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<i64>,
}

impl Params {
    fn flag(&self, f: Flag) -> u8 {
        match f {
            Flag::A => self.a,
            Flag::B => self.b,
            Flag::C => self.c,
        }
        .unwrap_or(0)
    }

    fn set_flag(&mut self, f: Flag, v: u8) {
        let slot = match f {
            Flag::A => &mut self.a,
            Flag::B => &mut self.b,
            Flag::C => &mut self.c,
        };
        *slot = Some(v);
    }

    fn index(&self, ix: Index) -> Option<i64> {
        match ix {
            Index::I => self.i,
            Index::J => self.j,
        }
    }

    fn set_index(&mut self, ix: Index, v: i64) {
        match ix {
            Index::I => self.i = Some(v),
            Index::J => self.j = Some(v),
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if let Some(v) = v {
                parts.push(format!("{name}={v}"));
            }
        }
        for (name, v) in [("i", self.i), ("j", self.j)] {
            if let Some(v) = v {
                parts.push(format!("{name}={v}"));
            }
        }
        f.write_str(&parts.join(", "))
    }
}

fn slot(flag: Flag, k: i64, pattern: Pattern, index: Option<Index>) -> Slot {
    Slot {
        flag,
        k,
        pattern,
        index,
    }
}

impl Template {
    pub fn for_case(case: CaseLabel, n: i64, lambda1: &Exponent) -> Template {
        use Flag::*;
        use Pattern::*;
        let l2 = lambda1.coords()[1];
        let (slots, side) = match case {
            CaseLabel::A | CaseLabel::B => (vec![], SideCondition::None),
            CaseLabel::C1 if l2 <= 2 => (vec![], SideCondition::None),
            CaseLabel::C1 => (vec![slot(A, 2, Fixed(-1, -1), None)], SideCondition::None),
            CaseLabel::C2 if l2 <= 2 => (
                vec![slot(A, 2, FreeSecond { p: -2, min: 0 }, Some(Index::I))],
                SideCondition::None,
            ),
            CaseLabel::C2 => (
                vec![
                    slot(A, 2, Fixed(-1, -1), None),
                    slot(B, 2, FreeSecond { p: -2, min: -1 }, Some(Index::I)),
                ],
                SideCondition::NotBothWhenIMinusOne,
            ),
            CaseLabel::C3 | CaseLabel::D4 => (
                vec![
                    slot(A, n - 1, FreeSecond { p: -2, min: 0 }, Some(Index::I)),
                    slot(B, n - 1, FreeSecond { p: -3, min: 0 }, Some(Index::J)),
                ],
                SideCondition::NotBothWhenIAtLeastJ,
            ),
            CaseLabel::D1 => (
                vec![slot(A, 3, FreeSecond { p: -1, min: 0 }, Some(Index::I))],
                SideCondition::None,
            ),
            CaseLabel::D2 => two_by_two(n),
            CaseLabel::D3 if l2 == 1 => (
                vec![slot(A, 3, FreeSecond { p: -2, min: 0 }, Some(Index::I))],
                SideCondition::None,
            ),
            CaseLabel::D3 => (
                vec![
                    slot(A, 3, FreeSecond { p: -2, min: -1 }, Some(Index::I)),
                    slot(B, 3, FreeFirst { q: -1, min: -1 }, Some(Index::J)),
                ],
                SideCondition::NotBothWhenIMinusOne,
            ),
            CaseLabel::E if *lambda1 == Exponent::new([2, 2]) => two_by_two(n),
            CaseLabel::E if *lambda1 == Exponent::new([2, 1]) => (
                vec![slot(A, 4, FreeSecond { p: -1, min: 0 }, Some(Index::I))],
                SideCondition::None,
            ),
            CaseLabel::E | CaseLabel::F => (
                vec![
                    slot(A, n - 1, FreeSecond { p: -1, min: 0 }, Some(Index::I)),
                    slot(B, n - 2, FreeSecond { p: -1, min: 0 }, Some(Index::J)),
                ],
                SideCondition::NotBothWhenJAtMostI,
            ),
        };
        Template {
            case,
            n,
            lambda1: lambda1.clone(),
            slots,
            side,
        }
    }

    fn shift(&self, s: &Slot, index: Option<i64>) -> (i64, i64) {
        match s.pattern {
            Pattern::Fixed(p, q) => (p, q),
            Pattern::FreeSecond { p, .. } => (p, index.expect("indexed slot")),
            Pattern::FreeFirst { q, .. } => (index.expect("indexed slot"), q),
        }
    }

    pub fn slot_exponent(&self, s: &Slot, index: Option<i64>) -> Exponent {
        let (p, q) = self.shift(s, index);
        &self.lambda1.scale(s.k) + &Exponent::new([p * self.n, q * self.n])
    }

    pub fn allows(&self, params: &Params) -> bool {
        let (a, b, c) = (params.flag(Flag::A), params.flag(Flag::B), params.flag(Flag::C));
        let both = a == 1 && b == 1;
        match self.side {
            SideCondition::None => true,
            SideCondition::NotBothWhenIMinusOne => !(both && params.i == Some(-1)),
            SideCondition::NotBothWhenIAtLeastJ => !(both && params.i >= params.j),
            SideCondition::NotBothWhenJAtMostI => !(both && params.j <= params.i),
            SideCondition::AExcludesOthers => !(a == 1 && (b == 1 || c == 1)),
        }
    }

    /// Exponents of the terms present for `params`, in slot order.
    pub fn exponents(&self, params: &Params) -> Vec<Exponent> {
        self.slots
            .iter()
            .filter(|s| params.flag(s.flag) == 1)
            .map(|s| self.slot_exponent(s, s.index.and_then(|ix| params.index(ix))))
            .collect()
    }

    /// `t^lambda_1 + sum of the present terms`, all with coefficient 1.
    pub fn series(&self, params: &Params, trunc: TruncationOrder) -> FracSeries {
        let mut s = FracSeries::monomial(2, trunc, self.lambda1.clone(), Rational::one());
        for e in self.exponents(params) {
            s.add_term(e, Rational::one());
        }
        s.truncate(trunc)
    }

    /// Every allowed parameter choice with indices at most `max_index`.
    pub fn instances(&self, max_index: i64) -> Vec<Params> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << self.slots.len()) {
            let mut partial = vec![Params::default()];
            for (k, s) in self.slots.iter().enumerate() {
                let on = (mask >> k) & 1 == 1;
                let mut next = Vec::new();
                for p in &partial {
                    let mut q = p.clone();
                    q.set_flag(s.flag, on as u8);
                    match (on, s.index, s.pattern) {
                        (true, Some(ix), Pattern::FreeSecond { min, .. } | Pattern::FreeFirst { min, .. }) => {
                            for v in min..=max_index {
                                let mut r = q.clone();
                                r.set_index(ix, v);
                                next.push(r);
                            }
                        }
                        _ => next.push(q),
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().filter(|p| self.allows(p)));
        }
        out
    }

    /// Read flags and indices from a set of Zariski exponents.
    pub fn match_exponents(&self, sg: &SemigroupData, exponents: &[Exponent]) -> Option<Params> {
        let mut params = Params::default();
        for s in &self.slots {
            params.set_flag(s.flag, 0);
        }
        let mut used = vec![false; self.slots.len()];
        for e in exponents {
            let rep = sg.standard_representation(e, 1)?;
            let (p, q, k) = (rep[0], rep[1], rep[2]);
            let mut found = None;
            // fixed shapes first, so (-1,-1) is not read as an indexed slot
            for pass in 0..2 {
                for (idx, s) in self.slots.iter().enumerate() {
                    if used[idx] || s.k != k || found.is_some() {
                        continue;
                    }
                    let hit = match (pass, s.pattern) {
                        (0, Pattern::Fixed(fp, fq)) => (fp, fq) == (p, q),
                        (1, Pattern::FreeSecond { p: fp, min }) => fp == p && q >= min,
                        (1, Pattern::FreeFirst { q: fq, min }) => fq == q && p >= min,
                        _ => false,
                    };
                    if hit {
                        found = Some(idx);
                    }
                }
            }
            let idx = found?;
            used[idx] = true;
            let s = self.slots[idx];
            params.set_flag(s.flag, 1);
            if let Some(ix) = s.index {
                let v = match s.pattern {
                    Pattern::FreeSecond { .. } => q,
                    Pattern::FreeFirst { .. } => p,
                    Pattern::Fixed(..) => unreachable!("fixed slots carry no index"),
                };
                params.set_index(ix, v);
            }
        }
        self.allows(&params).then_some(params)
    }
}

fn two_by_two(n: i64) -> (Vec<Slot>, SideCondition) {
    use Flag::*;
    use Pattern::*;
    (
        vec![
            slot(A, n - 1, Fixed(-1, -1), None),
            slot(B, n - 1, FreeFirst { q: -1, min: 0 }, Some(Index::I)),
            slot(C, n - 1, FreeSecond { p: -1, min: 0 }, Some(Index::J)),
        ],
        SideCondition::AExcludesOthers,
    )
}

/// Result of [`normal_form`].
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub case: CaseLabel,
    pub params: Params,
    pub param: Parameterization,
    pub zariski: Vec<Exponent>,
    /// Present when the coefficients could not be made 1 over the rationals.
    pub certificate: Option<NormalizationCertificate>,
}

impl NormalForm {
    pub fn series(&self) -> &FracSeries {
        self.param.s()
    }
}

/// Directions removing `delta + gamma` for a Zariski exponent `delta`:
/// multiples of a form whose variation vanishes at the other exponents.
struct NormalFormPlanner<'a> {
    p: &'a Parameterization,
    zariski: Vec<Exponent>,
    scalars: Vec<(Rational, Rational)>,
}

impl<'a> NormalFormPlanner<'a> {
    fn new(p: &'a Parameterization, zariski: Vec<Exponent>) -> Result<Self, ReduceError> {
        let l = p.lambda1().coords().to_vec();
        let shift = |d: &Exponent| (d.coords()[0] - l[0], d.coords()[1] - l[1]);
        let scalars = match zariski.as_slice() {
            [] => vec![],
            [d] => {
                let (x, y) = shift(d);
                vec![(int(-x), int(y))]
            }
            [d, e] => {
                let (dx, dy) = shift(d);
                let (ex, ey) = shift(e);
                if dx * ey - dy * ex == 0 {
                    return Err(ReduceError::DependentTargets);
                }
                vec![(int(ey), int(ex)), (int(dy), int(dx))]
            }
            _ => return Err(ReduceError::DependentTargets),
        };
        Ok(NormalFormPlanner { p, zariski, scalars })
    }
}

impl Planner for NormalFormPlanner<'_> {
    fn is_target(&self, e: &Exponent) -> bool {
        !self.zariski.contains(e)
    }

    fn generator(&self, e: &Exponent) -> Option<Generator> {
        if self.p.semigroup().eliminable_set_member(e) {
            return eliminable_generator(self.p, e);
        }
        let r = self.p.r();
        self.zariski.iter().enumerate().find_map(|(k, d)| {
            if !d.lt_product(e) {
                return None;
            }
            let mono = gamma_monomial(self.p, &(e - d))?;
            Some(Generator {
                family: r + 1 + k,
                mono,
            })
        })
    }

    fn families(&self, p: &Parameterization) -> Result<Vec<Family>, ReduceError> {
        let mut fams = eliminable_families(p)?;
        for (s1, s2) in &self.scalars {
            let polys = RForm::omega0(p.n(), p.lambda1(), s1, s2).to_change();
            let delta = first_order_variation(p, &polys)?;
            fams.push(Family { polys, delta });
        }
        Ok(fams)
    }
}

/// Reduce `p` to the normal form of its case.
pub fn normal_form(p: &Parameterization) -> Result<NormalForm, ClassifyError> {
    if p.r() != 2 || p.g() != 1 {
        return Err(ClassifyError::UnsupportedClass { r: p.r(), g: p.g() });
    }
    let class = TopClass::new(p.n(), p.lambda1())?;
    if !class.normalized {
        return Err(ClassifyError::NotNormalized(class.lambda1.clone()));
    }
    let verdict = is_quasi_simple(&class);
    let Some(case) = verdict.case else {
        return Err(ClassifyError::NotQuasiSimple(Box::new(verdict)));
    };
    let reduced = quasi_short_reduce(&monic(p))?.param;
    let zariski = direct_exponents(&reduced);
    let template = Template::for_case(case, class.n, &class.lambda1);
    let mismatch = || ClassifyError::TemplateMismatch {
        case,
        exponents: zariski.clone(),
    };
    if zariski.len() > template.slots.len() {
        return Err(mismatch());
    }
    let planner = NormalFormPlanner::new(&reduced, zariski.clone()).map_err(|_| mismatch())?;
    let (cleaned, _) = eliminate_batch(&reduced, &planner)?;
    let (param, certificate) = match normalize_coefficients(&cleaned, &zariski)? {
        Normalization::Normalized { param, .. } => (param, None),
        Normalization::Certificate(c) => (cleaned, Some(c)),
    };
    let params = template
        .match_exponents(class.semigroup(), &zariski)
        .ok_or_else(mismatch)?;
    Ok(NormalForm {
        case,
        params,
        param,
        zariski,
        certificate,
    })
}

/// Bound used when instantiating a template: room for every term plus a margin.
pub fn template_trunc(template: &Template, params: &Params) -> TruncationOrder {
    let n = template.n;
    let base = 2 * (n + template.lambda1.total());
    let top = template
        .exponents(params)
        .iter()
        .map(|e| e.total() + 6)
        .max()
        .unwrap_or(0);
    TruncationOrder::new(base.max(top) as u32).expect("positive")
}

/// The normal form of a case as a parameterization.
pub fn instantiate(
    template: &Template,
    params: &Params,
    trunc: TruncationOrder,
) -> Result<Parameterization, ClassifyError> {
    let s = template.series(params, trunc);
    validate(2, template.n, s).map_err(|e| ClassifyError::InvalidClass(e.to_string()))
}

/// One census line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub n: i64,
    pub lambda1: Exponent,
    pub quasi_simple: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectionReason>,
    pub can_admit_three: bool,
    /// Quasi-simple rows admit no three exponents, and every witness checks.
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Normalized classes with `2 <= n <= n_max` and coordinates at most `bound`.
pub fn census_classes(n_max: i64, bound: i64) -> Vec<TopClass> {
    let mut keys = Vec::new();
    for n in 2..=n_max {
        for l1 in 1..=bound {
            for l2 in 0..=l1 {
                keys.push((n, l1, l2));
            }
        }
    }
    keys.into_iter()
        .filter_map(|(n, l1, l2)| {
            let c = TopClass::new(n, &Exponent::new([l1, l2])).ok()?;
            c.normalized.then_some(c)
        })
        .collect()
}

pub fn census_row(class: &TopClass) -> CensusRow {
    let v = is_quasi_simple(class);
    let witness = can_admit_three(class.semigroup()).ok().flatten();
    let admits = witness.is_some();
    let consistent = !(v.quasi_simple && admits) && witness.as_ref().is_none_or(|w| w.verified);
    let note = match (v.case, class.lambda1.coords()) {
        (Some(CaseLabel::F), _) | (Some(CaseLabel::E), [3, 1]) => {
            Some("side condition also stated with the roles of a and b exchanged".to_string())
        }
        _ => None,
    };
    CensusRow {
        n: v.n,
        lambda1: v.lambda1,
        quasi_simple: v.quasi_simple,
        case: v.case,
        reason: v.reason,
        can_admit_three: admits,
        consistent,
        note,
    }
}

/// Classify every class in the box, in `(n, lambda_1)` order.
pub fn census(n_max: i64, bound: i64) -> Vec<CensusRow> {
    census_classes(n_max, bound).par_iter().map(census_row).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[i64]) -> Exponent {
        Exponent::new(v.iter().copied())
    }

    fn class(n: i64, l: &[i64]) -> TopClass {
        TopClass::new(n, &e(l)).unwrap()
    }

    #[test]
    fn verdict_examples() {
        let v = is_quasi_simple(&class(5, &[5, 1]));
        assert!(!v.quasi_simple);
        assert_eq!(v.reason, Some(RejectionReason::TwoExponentModuli));
        let v = is_quasi_simple(&class(6, &[2, 1]));
        assert_eq!(v.case, Some(CaseLabel::F));
        let v = is_quasi_simple(&class(3, &[12, 1]));
        assert!(matches!(
            v.reason,
            Some(RejectionReason::ThreeExponentCondition {
                condition: 1,
                verified: true,
                ..
            })
        ));
        assert_eq!(is_quasi_simple(&class(2, &[7, 3])).case, Some(CaseLabel::A));
        assert_eq!(is_quasi_simple(&class(7, &[1, 1])).case, Some(CaseLabel::B));
    }

    #[test]
    fn invalid_classes() {
        assert!(matches!(
            TopClass::new(3, &e(&[3, 3])),
            Err(ClassifyError::InvalidClass(_))
        ));
        assert!(matches!(
            TopClass::new(4, &e(&[3, 0])),
            Err(ClassifyError::InvalidClass(_))
        ));
        let c = TopClass::new(3, &e(&[1, 4])).unwrap();
        assert!(!c.normalized());
        assert_eq!(c.lambda1(), &e(&[4, 1]));
    }

    #[test]
    fn template_exponents() {
        let t = Template::for_case(CaseLabel::F, 6, &e(&[2, 1]));
        let p = Params {
            a: Some(1),
            b: Some(1),
            i: Some(0),
            j: Some(2),
            ..Params::default()
        };
        assert_eq!(t.exponents(&p), vec![e(&[4, 5]), e(&[2, 16])]);
        assert!(t.allows(&p));
        let q = Params {
            j: Some(0),
            ..p.clone()
        };
        assert!(!t.allows(&q));
        let sg = class(6, &[2, 1]).semigroup().clone();
        assert_eq!(t.match_exponents(&sg, &[e(&[4, 5]), e(&[2, 16])]), Some(p));
    }

    #[test]
    fn instance_counts() {
        let t = Template::for_case(CaseLabel::D1, 4, &e(&[3, 1]));
        // a = 0, or a = 1 with i in 0..=3
        assert_eq!(t.instances(3).len(), 5);
        let t = Template::for_case(CaseLabel::D2, 4, &e(&[3, 2]));
        // (a=1) + (b,c free over 0..=3 each, including absent)
        assert_eq!(t.instances(3).len(), 1 + 5 * 5);
    }

    #[test]
    fn eliminable_term_in_case_f() {
        let d = TruncationOrder::new(24).unwrap();
        let s = FracSeries::from_terms(2, d, [(e(&[2, 1]), int(1)), (e(&[8, 4]), int(1))]).unwrap();
        let p = validate(2, 6, s).unwrap();
        let nf = normal_form(&p).unwrap();
        assert_eq!(nf.case, CaseLabel::F);
        assert_eq!(
            nf.params,
            Params {
                a: Some(0),
                b: Some(0),
                ..Params::default()
            }
        );
        assert_eq!(nf.series().terms().len(), 1);
    }

    #[test]
    fn n_two_normal_form() {
        let d = TruncationOrder::new(20).unwrap();
        let s =
            FracSeries::from_terms(2, d, [(e(&[3, 1]), int(2)), (e(&[5, 1]), int(1)), (e(&[4, 6]), int(3))]).unwrap();
        let nf = normal_form(&validate(2, 2, s).unwrap()).unwrap();
        assert_eq!(nf.case, CaseLabel::A);
        assert_eq!(nf.series().terms().len(), 1);
        assert_eq!(nf.series().coeff(&e(&[3, 1])), int(1));
    }

    #[test]
    fn example_class_is_rejected() {
        let d = TruncationOrder::new(30).unwrap();
        let s = FracSeries::from_terms(2, d, [(e(&[5, 1]), int(1)), (e(&[5, 8]), int(1))]).unwrap();
        let err = normal_form(&validate(2, 5, s).unwrap()).unwrap_err();
        assert!(matches!(err, ClassifyError::NotQuasiSimple(_)));
    }

    #[test]
    fn small_census() {
        let rows = census(4, 6);
        assert!(rows.iter().all(|r| r.consistent));
        assert!(rows.iter().filter(|r| r.n == 2).all(|r| r.case == Some(CaseLabel::A)));
        let row = rows.iter().find(|r| r.n == 4 && r.lambda1 == e(&[3, 2])).unwrap();
        assert_eq!(row.case, Some(CaseLabel::D2));
    }
}
