// Validate parameterizations and read off their characteristic exponents.

use qord::branch::{is_normalized, validate};
use qord::lattice::Exponent;
use qord::series::{int, rat, FracSeries, TruncationOrder};

fn series(d: u32, terms: &[([i64; 2], qord::series::Rational)]) -> FracSeries {
    FracSeries::from_terms(
        2,
        TruncationOrder::new(d).unwrap(),
        terms.iter().map(|(x, c)| (Exponent::from(*x), c.clone())),
    )
    .unwrap()
}

fn main() {
    let hc = series(
        30,
        &[
            ([5, 1], int(1)),
            ([5, 8], int(1)),
            ([5, 9], rat(7, 3)),
            ([10, 4], int(1)),
        ],
    );
    let p = validate(2, 5, hc).expect("valid");
    println!("S = {}", p.s());
    println!("characteristic exponents: {:?}", p.semigroup().lambdas());
    println!("normalized: {:?}", is_normalized(&p));

    let two = series(30, &[([2, 2], int(1)), ([3, 3], int(1))]);
    let q = validate(2, 4, two).expect("valid");
    println!("g = {}, exponents {:?}", q.g(), q.semigroup().lambdas());

    let bad = series(10, &[([3, 0], int(1)), ([0, 2], int(1))]);
    match validate(2, 6, bad) {
        Ok(_) => println!("unexpectedly valid"),
        Err(r) => println!("{r}"),
    }
}
