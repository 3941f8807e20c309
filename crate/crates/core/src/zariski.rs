//! Generalized Zariski exponents and the three-exponent criterion.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::branch::{is_normalized, NormalizationIssue, Parameterization};
use crate::lattice::{minimal_antichain, Exponent};
use crate::reduce::{quasi_short_reduce, ReduceError};
use crate::semigroup::SemigroupData;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZariskiError {
    #[error("normalization required: {0:?}")]
    NormalizationRequired(Vec<NormalizationIssue>),
    #[error("unsupported class: r = {r}, g = {g}")]
    UnsupportedClass { r: usize, g: usize },
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

/// `E_Z` with its context. An empty `exponents` is the `{inf}` case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZariskiResult {
    #[serde(rename = "zariski")]
    pub exponents: Vec<Exponent>,
    pub empty: bool,
    #[serde(rename = "quasi_short")]
    pub is_quasi_short: bool,
    /// Eliminable support exponents of the input.
    pub violations: Vec<Exponent>,
    /// The minima read directly from the input, when a reduction was used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<Vec<Exponent>>,
}

/// Minimal non-eliminable exponents of the tail, read without reduction.
pub fn direct_exponents(p: &Parameterization) -> Vec<Exponent> {
    let sg = p.semigroup();
    let tail: Vec<Exponent> = p.tail().into_iter().filter(|e| !sg.eliminable_set_member(e)).collect();
    minimal_antichain(&tail)
}

pub fn zariski_exponents(p: &Parameterization) -> Result<ZariskiResult, ZariskiError> {
    let issues: Vec<_> = is_normalized(p)
        .issues
        .into_iter()
        .filter(|i| *i != NormalizationIssue::LeadingCoefficient)
        .collect();
    if !issues.is_empty() {
        return Err(ZariskiError::NormalizationRequired(issues));
    }
    let violations = p.semigroup().quasi_short_violations(&p.tail());
    let direct = direct_exponents(p);
    if violations.is_empty() || p.g() != 1 {
        return Ok(ZariskiResult {
            empty: direct.is_empty(),
            exponents: direct,
            is_quasi_short: violations.is_empty(),
            violations,
            direct: None,
        });
    }
    let reduced = quasi_short_reduce(p)?;
    let exponents = direct_exponents(&reduced.param);
    Ok(ZariskiResult {
        empty: exponents.is_empty(),
        exponents,
        is_quasi_short: false,
        violations,
        direct: Some(direct),
    })
}

/// A triple of candidate exponents for one of the three conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// 1, 2 or 3.
    pub condition: u8,
    pub triple: [Exponent; 3],
    /// Each element is above `lambda_1`, non-eliminable, and the three are
    /// pairwise incomparable.
    pub verified: bool,
}

fn require_surface(sg: &SemigroupData) -> Result<(), ZariskiError> {
    if sg.r() != 2 || sg.g() != 1 {
        return Err(ZariskiError::UnsupportedClass { r: sg.r(), g: sg.g() });
    }
    Ok(())
}

/// Which of the three inequalities hold, in order.
pub fn three_exponent_conditions(n: i64, lambda1: &Exponent) -> [bool; 3] {
    let (l1, l2) = (lambda1.coords()[0], lambda1.coords()[1]);
    let m = n - 2;
    if m <= 0 {
        return [false; 3];
    }
    [l1 * m >= 4 * n, l2 * m >= 2 * n, l2 * m >= n && l1 * m >= 3 * n]
}

/// Shifts `n * v` added to `(n - 1) lambda_1` for each condition.
const WITNESS_SHIFTS: [[[i64; 2]; 3]; 3] = [
    [[-4, 2], [-3, 1], [-2, 0]],
    [[-2, 0], [0, -2], [-1, -1]],
    [[-3, 1], [-2, 0], [-1, -1]],
];

pub fn witness_triple(sg: &SemigroupData, condition: u8) -> [Exponent; 3] {
    let n = sg.n();
    let base = sg.lambda1().scale(n - 1);
    WITNESS_SHIFTS[(condition - 1) as usize].map(|v| &base + &Exponent::new(v.map(|x| x * n)))
}

pub fn verify_triple(sg: &SemigroupData, triple: &[Exponent]) -> bool {
    let l1 = sg.lambda1();
    let each = triple.iter().all(|e| l1.lt_product(e) && !sg.eliminable_set_member(e));
    let pairwise = (0..triple.len()).all(|i| (i + 1..triple.len()).all(|j| !triple[i].comparable(&triple[j])));
    each && pairwise
}

/// The first condition that holds, with its triple. `None` when none holds
/// (always for `n <= 2`).
pub fn can_admit_three(sg: &SemigroupData) -> Result<Option<Witness>, ZariskiError> {
    require_surface(sg)?;
    let conds = three_exponent_conditions(sg.n(), sg.lambda1());
    let Some(k) = conds.iter().position(|&c| c) else {
        return Ok(None);
    };
    let condition = k as u8 + 1;
    let triple = witness_triple(sg, condition);
    let verified = verify_triple(sg, &triple);
    Ok(Some(Witness {
        condition,
        triple,
        verified,
    }))
}

/// Default box for the candidate search.
pub fn default_search_bound(sg: &SemigroupData) -> i64 {
    2 * (sg.n() + sg.lambda1().total())
}

/// Every point of the top lattice above `lambda_1` with total degree at most
/// `bound` that is not eliminable, sorted.
pub fn candidate_zariski_search(sg: &SemigroupData, bound: i64) -> Result<Vec<Exponent>, ZariskiError> {
    if sg.r() != 2 {
        return Err(ZariskiError::UnsupportedClass { r: sg.r(), g: sg.g() });
    }
    let l1 = sg.lambda1().clone();
    let top = &sg.lattices()[sg.g()];
    let mut out: Vec<Exponent> = (l1.total() + 1..=bound)
        .into_par_iter()
        .flat_map_iter(|total| {
            let l1 = l1.clone();
            (0..=total).filter_map(move |x| {
                let e = Exponent::new([x, total - x]);
                (l1.lt_product(&e) && top.contains(&e) && !sg.eliminable_set_member(&e)).then_some(e)
            })
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Three pairwise incomparable points of `set` in the plane, if any.
pub fn find_antichain3(set: &[Exponent]) -> Option<[Exponent; 3]> {
    let mut pts: Vec<&Exponent> = set.iter().collect();
    pts.sort_by_key(|e| (e.coords()[0], e.coords()[1]));
    pts.dedup();
    // longest strictly decreasing second coordinate along strictly
    // increasing first coordinate, capped at 3
    let mut best: Vec<(usize, Option<usize>)> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        let mut entry = (1, None);
        for j in 0..i {
            let (a, b) = (pts[j].coords(), pts[i].coords());
            if a[0] < b[0] && a[1] > b[1] && best[j].0 + 1 > entry.0 {
                entry = (best[j].0 + 1, Some(j));
                if entry.0 == 3 {
                    break;
                }
            }
        }
        if entry.0 == 3 {
            let j = entry.1.expect("chain");
            let k = best[j].1.expect("chain");
            return Some([pts[k].clone(), pts[j].clone(), pts[i].clone()]);
        }
        best.push(entry);
    }
    None
}
