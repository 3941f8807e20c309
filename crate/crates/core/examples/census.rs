// Tabulate the quasi-simple classes in a box.

use std::collections::BTreeMap;

use qord::classify::census;

fn main() {
    let rows = census(7, 12);
    let mut by_case: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for r in &rows {
        if let Some(c) = r.case {
            by_case
                .entry(c.as_str())
                .or_default()
                .push(format!("({}, {})", r.n, r.lambda1));
        }
    }
    for (case, classes) in &by_case {
        println!("{case:>3}: {}", classes.join(" "));
    }
    let rejected = rows.iter().filter(|r| !r.quasi_simple).count();
    println!(
        "{} classes, {rejected} not quasi-simple, all consistent: {}",
        rows.len(),
        rows.iter().all(|r| r.consistent)
    );
}
