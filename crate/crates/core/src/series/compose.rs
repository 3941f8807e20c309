//! Composition with diagonal maps `t_i -> t_i * unit_i` and their inverses.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{FracSeries, Rational, SeriesError, TruncationOrder};
use crate::lattice::Exponent;

struct Diagonal {
    c: Vec<Rational>,
    w: Vec<FracSeries>,
    units: Vec<FracSeries>,
    trunc: TruncationOrder,
}

fn split_maps(r: usize, maps: &[FracSeries]) -> Result<Diagonal, SeriesError> {
    if maps.len() != r {
        return Err(SeriesError::Dimension(r, maps.len()));
    }
    let trunc = maps
        .iter()
        .map(FracSeries::trunc)
        .min()
        .unwrap_or(TruncationOrder(u32::MAX));
    let mut c = Vec::with_capacity(r);
    let mut w = Vec::with_capacity(r);
    let mut units = Vec::with_capacity(r);
    for (i, m) in maps.iter().enumerate() {
        if m.r() != r {
            return Err(SeriesError::Dimension(r, m.r()));
        }
        let unit = m
            .div_monomial(&Exponent::unit(r, i))
            .ok_or(SeriesError::NonDiagonal(i))?;
        let ci = unit.constant_term();
        if ci.is_zero() {
            return Err(SeriesError::NonDiagonal(i));
        }
        let wi = unit.scale(&ci.recip()).sub(&FracSeries::one(r, unit.trunc()));
        c.push(ci);
        w.push(wi);
        units.push(unit);
    }
    Ok(Diagonal { c, w, units, trunc })
}

fn pascal(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![BigInt::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// `s(map_1(t), ..., map_r(t))` for maps of the form `t_i * unit_i`.
///
/// Writing `map_i = c_i t_i (1 + w_i)`, the result is
/// `sum_k B_k(s_c) * prod_i w_i^{k_i}` where `s_c(t) = s(c t)` and `B_k`
/// multiplies the coefficient of `t^e` by `prod_i binom(e_i, k_i)`.
pub fn substitute_diagonal(s: &FracSeries, maps: &[FracSeries]) -> Result<FracSeries, SeriesError> {
    let r = s.r();
    let diag = split_maps(r, maps)?;
    let d = s.trunc().min(diag.trunc);
    Ok(substitute_split(s, &diag.c, &diag.w, d))
}

fn substitute_split(s: &FracSeries, c: &[Rational], w: &[FracSeries], d: TruncationOrder) -> FracSeries {
    let r = s.r();
    let dd = d.as_i64();
    let mut sc = FracSeries::zero(r, d);
    let mut maxe = vec![0i64; r];
    for (e, b) in s.iter() {
        if e.total() > dd {
            continue;
        }
        let mut k = b.clone();
        for (i, &ei) in e.coords().iter().enumerate() {
            if ei > 0 && !c[i].is_one() {
                k *= num_traits::pow(c[i].clone(), ei as usize);
            }
            maxe[i] = maxe[i].max(ei);
        }
        sc.add_term(e.clone(), k);
    }
    if sc.is_zero() || w.iter().all(FracSeries::is_zero) {
        return sc;
    }
    let base_ord = sc.order().unwrap_or(0);
    let orders: Vec<Option<i64>> = w.iter().map(FracSeries::order).collect();
    let table = pascal(maxe.iter().copied().max().unwrap_or(0) as usize);
    let mut out = FracSeries::zero(r, d);
    let mut k = vec![0usize; r];
    let one = FracSeries::one(r, d);
    walk(
        0,
        &mut k,
        one,
        0,
        &Ctx {
            sc: &sc,
            w,
            orders: &orders,
            maxe: &maxe,
            base_ord,
            d,
            table: &table,
        },
        &mut out,
    );
    out
}

struct Ctx<'a> {
    sc: &'a FracSeries,
    w: &'a [FracSeries],
    orders: &'a [Option<i64>],
    maxe: &'a [i64],
    base_ord: i64,
    d: TruncationOrder,
    table: &'a [Vec<BigInt>],
}

fn walk(i: usize, k: &mut Vec<usize>, wprod: FracSeries, wdeg: i64, cx: &Ctx<'_>, out: &mut FracSeries) {
    let r = k.len();
    let dd = cx.d.as_i64();
    if i == r {
        let ksum: i64 = k.iter().map(|&x| x as i64).sum();
        if cx.base_ord.max(ksum) + wdeg > dd {
            return;
        }
        let mut b = FracSeries::zero(r, cx.d);
        for (e, coef) in cx.sc.iter() {
            let mut f = coef.clone();
            let mut ok = true;
            for (j, &kj) in k.iter().enumerate() {
                let ej = e.coords()[j] as usize;
                if ej < kj {
                    ok = false;
                    break;
                }
                if kj > 0 {
                    f *= Rational::from_integer(cx.table[ej][kj].clone());
                }
            }
            if ok {
                b.add_term(e.clone(), f);
            }
        }
        if b.is_zero() {
            return;
        }
        let part = if wdeg == 0 { b } else { b.mul_to(&wprod, cx.d) };
        *out = out.add(&part);
        return;
    }
    let Some(m) = cx.orders[i] else {
        k[i] = 0;
        walk(i + 1, k, wprod, wdeg, cx, out);
        return;
    };
    let mut cur = wprod;
    let mut deg = wdeg;
    let mut ki = 0usize;
    loop {
        k[i] = ki;
        let ksum: i64 = k[..=i].iter().map(|&x| x as i64).sum();
        if cx.base_ord.max(ksum) + deg > dd || ki as i64 > cx.maxe[i] {
            break;
        }
        walk(i + 1, k, cur.clone(), deg, cx, out);
        ki += 1;
        deg += m;
        let budget = dd - cx.base_ord.max(ksum + 1);
        if budget < deg {
            break;
        }
        cur = cur.mul_to(&cx.w[i], TruncationOrder(budget.max(0) as u32));
        if cur.is_zero() {
            break;
        }
    }
    k[i] = 0;
}

/// Compositional inverse of a diagonal map, by the fixed point
/// `psi_i = t_i / unit_i(psi)`. Each pass gains at least the order of the
/// nonconstant part of the units, and later passes run at higher bounds.
pub fn invert_diagonal(maps: &[FracSeries]) -> Result<Vec<FracSeries>, SeriesError> {
    let r = maps.len();
    let diag = split_maps(r, maps)?;
    let d = diag.trunc;
    let mut psi: Vec<FracSeries> = (0..r)
        .map(|i| FracSeries::monomial(r, d, Exponent::unit(r, i), diag.c[i].recip()))
        .collect();
    let Some(m) = diag.w.iter().filter_map(FracSeries::order).min() else {
        return Ok(psi);
    };
    let mut prec: i64 = 1;
    while prec < d.as_i64() {
        let dk = (prec + m).min(d.as_i64());
        let inner = TruncationOrder((dk - 1) as u32);
        let arg: Vec<FracSeries> = psi.iter().map(|p| p.with_trunc(TruncationOrder(dk as u32))).collect();
        let mut next = Vec::with_capacity(r);
        for i in 0..r {
            let unit = diag.units[i].truncate(inner).with_trunc(inner);
            let ui = substitute_diagonal(&unit, &arg)?;
            let inv = ui.inverse()?;
            next.push(
                inv.with_trunc(TruncationOrder(dk as u32))
                    .mul_monomial(&Exponent::unit(r, i), &Rational::one()),
            );
        }
        psi = next;
        prec = dk;
    }
    Ok(psi.into_iter().map(|p| p.with_trunc(d)).collect())
}
