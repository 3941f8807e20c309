// Quasi-simplicity verdicts and normal forms.

use qord::classify::{
    instantiate, is_quasi_simple, normal_form, template_trunc, CaseLabel, Params, Template, TopClass,
};
use qord::lattice::Exponent;
use qord::reduce::{apply_change, random_admissible_change, RandomChangeOptions};
use rand::SeedableRng;

fn main() {
    for (n, l) in [(3, [4, 2]), (4, [5, 3]), (5, [5, 1]), (3, [12, 1]), (8, [3, 2])] {
        let class = TopClass::new(n, &Exponent::from(l)).unwrap();
        println!("{}", is_quasi_simple(&class));
    }

    // disguise a normal form of case f and recover it
    let l = Exponent::new([2, 1]);
    let t = Template::for_case(CaseLabel::F, 7, &l);
    let params = Params {
        a: Some(1),
        i: Some(1),
        b: Some(1),
        j: Some(2),
        ..Default::default()
    };
    let p = instantiate(&t, &params, template_trunc(&t, &params)).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let q = apply_change(
        &p,
        &random_admissible_change(&p, &mut rng, RandomChangeOptions::default()),
    )
    .unwrap();
    println!("disguised: {} terms", q.s().len());
    let nf = normal_form(&q).unwrap();
    println!("case {}, {}: {}", nf.case, nf.params, nf.series());
}
