// Make the leading and Zariski coefficients equal to 1 with a rational
// homothety, or explain why none exists.

use qord::branch::validate;
use qord::lattice::Exponent;
use qord::reduce::{normalize_coefficients, Normalization};
use qord::series::{int, rat, FracSeries, Rational, TruncationOrder};

fn run(n: i64, terms: &[([i64; 2], Rational)], targets: &[[i64; 2]]) {
    let d = TruncationOrder::new(30).unwrap();
    let s = FracSeries::from_terms(2, d, terms.iter().map(|(x, c)| (Exponent::from(*x), c.clone()))).unwrap();
    let p = validate(2, n, s).unwrap();
    let targets: Vec<Exponent> = targets.iter().map(|&t| Exponent::from(t)).collect();
    match normalize_coefficients(&p, &targets).unwrap() {
        Normalization::Normalized { param, change } => {
            println!(
                "S = {}  (roots {:?})",
                param.s(),
                change.roots.iter().map(ToString::to_string).collect::<Vec<_>>()
            )
        }
        Normalization::Certificate(c) => println!("no rational homothety: {}", serde_json::to_string(&c).unwrap()),
    }
}

fn main() {
    run(3, &[([4, 3], rat(2, 1)), ([7, 6], rat(1, 4))], &[[7, 6]]);
    run(6, &[([2, 1], int(1)), ([4, 5], int(3))], &[[4, 5]]);
}
