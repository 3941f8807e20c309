// Generalized Zariski exponents, with and without a preliminary reduction.

use qord::branch::validate;
use qord::lattice::Exponent;
use qord::series::{int, rat, FracSeries, TruncationOrder};
use qord::zariski::{can_admit_three, zariski_exponents};

fn main() {
    let d = TruncationOrder::new(30).unwrap();
    for c in [int(0), int(1), rat(7, 3)] {
        let terms = [
            ([5, 1], int(1)),
            ([5, 8], int(1)),
            ([5, 9], c.clone()),
            ([10, 4], int(1)),
        ];
        let s = FracSeries::from_terms(2, d, terms.map(|(x, k)| (Exponent::from(x), k))).unwrap();
        let z = zariski_exponents(&validate(2, 5, s).unwrap()).unwrap();
        println!("c = {c}: E_Z = {:?}, quasi-short {}", z.exponents, z.is_quasi_short);
    }

    // an eliminable term in the tail forces a reduction first
    let terms = [([4, 3], int(1)), ([8, 6], int(2)), ([7, 6], int(1))];
    let s = FracSeries::from_terms(2, d, terms.map(|(x, k)| (Exponent::from(x), k))).unwrap();
    let p = validate(2, 3, s).unwrap();
    let z = zariski_exponents(&p).unwrap();
    println!(
        "violations {:?}, read directly {:?}, after reduction {:?}",
        z.violations, z.direct, z.exponents
    );

    let sg = qord::semigroup::build_semigroup(2, 3, &[Exponent::new([12, 1])]).unwrap();
    println!("(3, (12,1)) admits three: {:?}", can_admit_three(&sg).unwrap());
}
