//! Acceptance criteria 1-10, one PASS/FAIL line each.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use qord::branch::{h_star, psi, RForm};
use qord::classify::{
    census, census_classes, instantiate, is_quasi_simple, normal_form, template_trunc, Template, TopClass,
};
use qord::reduce::{apply_change, quasi_short_reduce, random_admissible_change, RandomChangeOptions};
use qord::semigroup::build_semigroup;
use qord::series::{int, FracSeries, Poly, Rational};
use qord::zariski::{three_exponent_conditions, witness_triple, zariski_exponents};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    for c in ["0", "1", "7/3"] {
        let mut terms = vec![
            r#"{"exp":[5,1],"coef":"1"}"#,
            r#"{"exp":[5,8],"coef":"1"}"#,
            r#"{"exp":[10,4],"coef":"1"}"#,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        if c != "0" {
            terms.push(format!(r#"{{"exp":[5,9],"coef":"{c}"}}"#));
        }
        let input = format!(r#"{{"r":2,"n":5,"terms":[{}]}}"#, terms.join(","));
        let (code, out, err) = qord::cli::run_captured(["qord", "zariski", input.as_str()]);
        ensure(code == 0, || format!("c = {c}: exit {code}: {err}"))?;
        let v: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
        ensure(v["zariski"] == serde_json::json!([[5, 8], [10, 4]]), || {
            format!("c = {c}: {out}")
        })?;
        ensure(v["quasi_short"] == serde_json::json!(true), || {
            format!("c = {c}: not quasi-short")
        })?;
    }
    Ok("E_Z = {(5,8),(10,4)} for c in {0, 1, 7/3}".into())
}

fn collapse(cases: Vec<qord::branch::Parameterization>) -> Result<usize, String> {
    let count = cases.len();
    for p in cases {
        let red = quasi_short_reduce(&p).map_err(|e| format!("{}: {e}", p.s()))?;
        let want = FracSeries::monomial(2, red.param.trunc(), p.lambda1().clone(), int(1));
        ensure(red.param.s() == &want, || {
            format!("{} reduced to {}", p.s(), red.param.s())
        })?;
    }
    Ok(count)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = Vec::new();
    while cases.len() < 20 {
        let l = (rng.gen_range(1..=9), rng.gen_range(0..=9));
        if !normalized_pair(2, l) {
            continue;
        }
        let k = rng.gen_range(1..=4);
        cases.push(random_one_exponent(&mut rng, 2, l, 40, k, 8));
    }
    let k = collapse(cases)?;
    Ok(format!("{k} random n = 2 cases reduce to t^lambda_1 at trunc 40"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = (0..20)
        .map(|_| {
            let n = rng.gen_range(3..=7);
            let k = rng.gen_range(1..=4);
            random_one_exponent(&mut rng, n, (1, 1), 30, k, 9)
        })
        .collect();
    let k = collapse(cases)?;
    Ok(format!("{k} random lambda_1 = (1,1) cases reduce to t1 t2"))
}

fn random_poly<R: Rng>(rng: &mut R) -> Poly {
    let mut p = Poly::zero(3);
    for _ in 0..rng.gen_range(1..=4) {
        let m = e(&[rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2)]);
        p.add_term(m, random_rational(rng));
    }
    p
}

fn random_class<R: Rng>(rng: &mut R, n_max: i64, bound: i64) -> (i64, (i64, i64)) {
    loop {
        let n = rng.gen_range(2..=n_max);
        let l = (rng.gen_range(1..=bound), rng.gen_range(0..=bound));
        if normalized_pair(n, l) {
            return (n, l);
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for _ in 0..5 {
        let (n, l) = random_class(&mut rng, 7, 6);
        let p = random_one_exponent(&mut rng, n, l, 24, 3, 6);
        let terms: Vec<_> = p.s().iter().map(|(x, c)| (x.clone(), c.clone())).collect();
        for _ in 0..20 {
            let p3 = random_poly(&mut rng);
            let omega = RForm::new(vec![Poly::zero(3), Poly::zero(3), p3.clone()]);
            let got = psi(&p, &omega).map_err(|e| e.to_string())?;
            let d = got.trunc().as_i64();
            ensure(d >= p.trunc().as_i64(), || {
                format!("valid degree {d} below input bound")
            })?;
            // reference with the polynomial S read as exact up to the reported degree
            let exact = param(n, d as u32, &terms);
            let want = h_star(&exact, &p3).mul_monomial(&e(&[n, n]), &int(n * n));
            ensure(got.agrees_up_to(&want, d), || format!("P3 = {p3:?} on {}", p.s()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} forms agree with n^2 H*(P3) t^(n,n)"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 10 {
        let (n, l) = random_class(&mut rng, 7, 6);
        let v = (rng.gen_range(0..=2 * n), rng.gen_range(0..=2 * n));
        if v == (0, 0) || !in_q1(n, l, v) {
            continue;
        }
        let delta = e(&[l.0 + v.0, l.1 + v.1]);
        let a = random_rational(&mut rng);
        let mut terms = vec![(e(&[l.0, l.1]), int(1)), (delta.clone(), a.clone())];
        // a t^delta u with u = 1 + unit tail
        for _ in 0..rng.gen_range(0..=2) {
            let w = (rng.gen_range(0..=n), rng.gen_range(0..=n));
            if w == (0, 0) || !in_q1(n, l, w) {
                continue;
            }
            let x = &delta + &e(&[w.0, w.1]);
            if terms.iter().all(|(y, _)| *y != x) {
                terms.push((x, &a * random_rational(&mut rng)));
            }
        }
        let p = param(n, 40, &terms);
        let (s1, s2) = (random_rational(&mut rng), random_rational(&mut rng));
        let got = psi(&p, &RForm::omega0(n, p.lambda1(), &s1, &s2)).map_err(|e| e.to_string())?;
        let at = &delta + &e(&[n, n]);
        ensure(at.total() <= got.trunc().as_i64(), || {
            format!("{at} beyond valid degree")
        })?;
        let want = (&s2 * int(delta.coords()[1] - l.1) - &s1 * int(delta.coords()[0] - l.0)) * &a;
        ensure(got.coeff(&at) == want, || {
            format!("n = {n}, S = {}: got {} want {want}", p.s(), got.coeff(&at))
        })?;
        done += 1;
    }
    Ok(format!("{done} leading coefficients of psi(omega_0) match"))
}

/// Classes of the case table with their templates, for random sampling.
fn family_templates(n_max: i64, bound: i64) -> Vec<Template> {
    census_classes(n_max, bound)
        .iter()
        .filter_map(|c| {
            let case = is_quasi_simple(c).case?;
            Some(Template::for_case(case, c.n(), c.lambda1()))
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let templates = family_templates(7, 12);
    let mut labels: Vec<_> = templates.iter().map(|t| t.case).collect();
    labels.sort();
    labels.dedup();
    let (d, margin) = (30u32, 25i64);
    let mut trials = 0;
    let mut nonempty = 0;
    while trials < 50 {
        // uniform over case labels, then over classes with that label
        let case = labels[rng.gen_range(0..labels.len())];
        let same: Vec<&Template> = templates.iter().filter(|t| t.case == case).collect();
        let t = same[rng.gen_range(0..same.len())];
        let instances: Vec<_> = t
            .instances(3)
            .into_iter()
            .filter(|ps| t.exponents(ps).iter().all(|x| x.total() <= margin))
            .collect();
        if instances.is_empty() {
            continue;
        }
        let ps = &instances[rng.gen_range(0..instances.len())];
        let p = instantiate(t, ps, trunc(d)).map_err(|e| e.to_string())?;
        let before = zariski_exponents(&p).map_err(|e| e.to_string())?;
        ensure(before.is_quasi_short, || {
            format!("template {} {ps} not quasi-short", t.case)
        })?;
        let change = random_admissible_change(&p, &mut rng, RandomChangeOptions::default());
        let q = apply_change(&p, &change).map_err(|e| e.to_string())?;
        let after = zariski_exponents(&q).map_err(|e| format!("{} {ps}: {e}", t.case))?;
        let (b, a) = (up_to(&before.exponents, margin), up_to(&after.exponents, margin));
        ensure(a == b, || format!("{} n = {} {ps}: {b:?} became {a:?}", t.case, t.n))?;
        nonempty += usize::from(!b.is_empty());
        trials += 1;
    }
    Ok(format!(
        "{trials} trials, {nonempty} with nonempty E_Z, invariant within degree {margin}"
    ))
}

fn criterion_7() -> Outcome {
    let mut count = 0usize;
    let mut semigroups = 0;
    for n in 2..=7 {
        for l0 in 0..=12 {
            for l1 in 0..=12 {
                let Ok(sg) = build_semigroup(2, n, &[e(&[l0, l1])]) else {
                    continue;
                };
                semigroups += 1;
                let gens = [(n, 0), (0, n), (l0, l1)];
                for total in 0..=60 {
                    for x in 0..=total {
                        let g = (x, total - x);
                        let want = brute_combination(&gens, g);
                        ensure(sg.gamma_member(&e(&[g.0, g.1])) == want, || {
                            format!("n = {n}, lambda_1 = ({l0},{l1}), gamma = {g:?}")
                        })?;
                        count += 1;
                    }
                }
            }
        }
    }
    let sg = build_semigroup(2, 4, &[e(&[2, 2]), e(&[3, 3])]).map_err(|e| e.to_string())?;
    let gens = [(4, 0), (0, 4), (2, 2), (5, 5)];
    let nus: Vec<(i64, i64)> = sg.nus().iter().map(pair).collect();
    ensure(nus == gens, || format!("generators {nus:?}"))?;
    semigroups += 1;
    for total in 0..=60 {
        for x in 0..=total {
            let g = (x, total - x);
            ensure(sg.gamma_member(&e(&[g.0, g.1])) == brute_combination(&gens, g), || {
                format!("g = 2 at {g:?}")
            })?;
            count += 1;
        }
    }
    Ok(format!("{semigroups} semigroups, {count} memberships agree"))
}

/// The three inequalities, written with rational thresholds.
fn three_exponent_inequalities(n: i64, l: (i64, i64)) -> [bool; 3] {
    if n <= 2 {
        return [false; 3];
    }
    let t = |k: i64| Rational::new((k * n).into(), (n - 2).into());
    let (a, b) = (int(l.0), int(l.1));
    [a >= t(4), b >= t(2), a >= t(3) && b >= t(1)]
}

const TRIPLES: [[(i64, i64); 3]; 3] = [
    [(-4, 2), (-3, 1), (-2, 0)],
    [(-2, 0), (0, -2), (-1, -1)],
    [(-3, 1), (-2, 0), (-1, -1)],
];

fn criterion_8() -> Outcome {
    let mut checked = 0;
    for class in census_classes(10, 14) {
        let n = class.n();
        let l = pair(class.lambda1());
        let conds = three_exponent_inequalities(n, l);
        ensure(conds == three_exponent_conditions(n, class.lambda1()), || {
            format!("conditions differ at n = {n}, {l:?}")
        })?;
        for (k, _) in conds.iter().enumerate().filter(|(_, &c)| c) {
            let stated: Vec<(i64, i64)> = TRIPLES[k]
                .iter()
                .map(|v| ((n - 1) * l.0 + n * v.0, (n - 1) * l.1 + n * v.1))
                .collect();
            let computed: Vec<(i64, i64)> = witness_triple(class.semigroup(), k as u8 + 1)
                .iter()
                .map(pair)
                .collect();
            ensure(stated == computed, || format!("triple differs at n = {n}, {l:?}"))?;
            for &x in &stated {
                ensure(x.0 >= l.0 && x.1 >= l.1 && x != l, || {
                    format!("{x:?} not above {l:?} (n = {n})")
                })?;
                ensure(!brute_eliminable(n, l, x), || {
                    format!("{x:?} eliminable (n = {n}, {l:?})")
                })?;
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    let (x, y) = (stated[i], stated[j]);
                    let comparable = (x.0 <= y.0 && x.1 <= y.1) || (y.0 <= x.0 && y.1 <= x.1);
                    ensure(!comparable, || format!("{x:?}, {y:?} comparable (n = {n}, {l:?})"))?;
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} witness triples verified"))
}

fn criterion_9() -> Outcome {
    let rows = census(7, 12);
    for row in &rows {
        ensure(!(row.quasi_simple && row.can_admit_three), || {
            format!("n = {}, {}", row.n, row.lambda1)
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total = 0;
    for t in family_templates(7, 12) {
        for ps in t.instances(3) {
            let p = instantiate(&t, &ps, template_trunc(&t, &ps)).map_err(|e| e.to_string())?;
            let change = random_admissible_change(&p, &mut rng, RandomChangeOptions::default());
            let q = apply_change(&p, &change).map_err(|e| e.to_string())?;
            let nf = normal_form(&q).map_err(|e| format!("{} n = {} {}: {e}", t.case, t.n, t.lambda1))?;
            ensure(nf.case == t.case && nf.params == ps, || {
                format!(
                    "{} n = {} {} {ps} came back as {} {}",
                    t.case, t.n, t.lambda1, nf.case, nf.params
                )
            })?;
            total += 1;
        }
    }
    Ok(format!(
        "{} classes consistent, {total} normal forms round-trip",
        rows.len()
    ))
}

/// The case list, one range per case, transcribed by hand.
fn hand_case_list(n_max: i64, bound: i64) -> BTreeMap<(i64, i64, i64), &'static str> {
    let mut m = BTreeMap::new();
    let mut put = |n: i64, l: (i64, i64), label: &'static str| {
        if n <= n_max && l.0 <= bound && l.1 <= bound && normalized_pair(n, l) {
            m.entry((n, l.0, l.1)).or_insert(label);
        }
    };
    for l0 in 1..=bound {
        for l1 in 0..=l0 {
            put(2, (l0, l1), "a");
        }
    }
    for n in 3..=n_max {
        put(n, (1, 1), "b");
    }
    for l0 in 2..=5 {
        for l1 in 1..=l0 {
            if (l0, l1) != (3, 3) {
                put(3, (l0, l1), "c1");
            }
        }
    }
    for l0 in 6..=8 {
        for l1 in 1..=5 {
            if (l0, l1) != (6, 3) {
                put(3, (l0, l1), "c2");
            }
        }
    }
    for l0 in 9..=11 {
        for l1 in 0..=2 {
            if (l0, l1) != (9, 0) {
                put(3, (l0, l1), "c3");
            }
        }
    }
    put(4, (2, 1), "d1");
    put(4, (3, 1), "d1");
    for l in [(3, 2), (3, 3)] {
        put(4, l, "d2");
    }
    for l0 in 4..=5 {
        for l1 in 1..=3 {
            if (l0, l1) != (4, 2) {
                put(4, (l0, l1), "d3");
            }
        }
    }
    for l0 in 6..=7 {
        for l1 in 0..=1 {
            if (l0, l1) != (6, 0) {
                put(4, (l0, l1), "d4");
            }
        }
    }
    for l in [(2, 1), (3, 1), (2, 2)] {
        put(5, l, "e");
    }
    put(6, (2, 1), "f");
    put(7, (2, 1), "f");
    m
}

fn criterion_10() -> Outcome {
    let golden = include_str!("golden/census_n7_box12.jsonl");
    let rows = census(7, 12);
    let lines: Vec<String> = rows.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    let golden_lines: Vec<&str> = golden.lines().collect();
    ensure(lines.len() == golden_lines.len(), || {
        format!("{} rows, golden has {}", lines.len(), golden_lines.len())
    })?;
    for (a, b) in lines.iter().zip(&golden_lines) {
        ensure(a == b, || format!("census row {a} differs from golden {b}"))?;
    }
    let hand = hand_case_list(7, 12);
    let mut from_golden = BTreeMap::new();
    for line in &golden_lines {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if v["quasi_simple"] == serde_json::json!(true) {
            let l = &v["lambda1"];
            let key = (v["n"].as_i64().unwrap(), l[0].as_i64().unwrap(), l[1].as_i64().unwrap());
            from_golden.insert(key, v["case"].as_str().unwrap().to_string());
        }
    }
    let hand: BTreeMap<_, String> = hand.into_iter().map(|(k, v)| (k, v.to_string())).collect();
    for (k, v) in &hand {
        ensure(from_golden.get(k) == Some(v), || {
            format!("{k:?}: case list says {v}, golden {:?}", from_golden.get(k))
        })?;
    }
    for (k, v) in &from_golden {
        ensure(hand.contains_key(k), || {
            format!("{k:?}: golden says {v}, absent from case list")
        })?;
    }
    let valid = census_classes(7, 12)
        .iter()
        .all(|c| TopClass::new(c.n(), c.lambda1()).is_ok());
    ensure(valid, || "census contains an invalid class".into())?;
    Ok(format!(
        "{} golden rows, {} quasi-simple rows match the case list",
        golden_lines.len(),
        hand.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(10)),
        (3, criterion_3, Duration::from_secs(10)),
        (4, criterion_4, Duration::from_secs(5)),
        (5, criterion_5, Duration::from_secs(5)),
        (6, criterion_6, Duration::from_secs(60)),
        (7, criterion_7, Duration::from_secs(30)),
        (8, criterion_8, Duration::from_secs(30)),
        (9, criterion_9, Duration::from_secs(300)),
        (10, criterion_10, Duration::from_secs(60)),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (k, f, limit) in criteria {
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit:?} limit")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {k:>2}: {} ({:.2?} / {:?}) {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            limit
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
