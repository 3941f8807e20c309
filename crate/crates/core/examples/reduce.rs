// Apply a random admissible coordinate change, then reduce back to a
// quasi-short parameterization.

use qord::branch::validate;
use qord::lattice::Exponent;
use qord::reduce::{apply_change, monic, quasi_short_reduce, random_admissible_change, RandomChangeOptions};
use qord::series::{int, FracSeries, TruncationOrder};
use rand::SeedableRng;

fn main() {
    let d = TruncationOrder::new(24).unwrap();
    let s = FracSeries::from_terms(2, d, [(Exponent::new([3, 1]), int(1))]).unwrap();
    let p = validate(2, 2, s).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let change = random_admissible_change(&p, &mut rng, RandomChangeOptions::default());
    println!("change: {}", serde_json::to_string(&change.to_json()).unwrap());
    let q = apply_change(&p, &change).unwrap();
    println!("after the change: {} terms", q.s().len());
    let red = quasi_short_reduce(&monic(&q)).unwrap();
    println!("reduced with {} changes: S = {}", red.changes.len(), red.param.s());
}
