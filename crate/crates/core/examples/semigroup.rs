// Semigroup generators, standard representations and the eliminable set.

use qord::lattice::Exponent;
use qord::semigroup::build_semigroup;

fn main() {
    let sg = build_semigroup(2, 5, &[Exponent::new([5, 1])]).unwrap();
    println!("{:?}", sg.summary());
    for g in [[10, 2], [5, 8], [10, 4], [15, 3]] {
        let g = Exponent::from(g);
        println!(
            "{g}: standard representation {:?}, in Gamma {}, eliminable {}",
            sg.standard_representation(&g, sg.g()),
            sg.gamma_member(&g),
            sg.eliminable_set_member(&g)
        );
    }

    let two = build_semigroup(2, 4, &[Exponent::new([2, 2]), Exponent::new([3, 3])]).unwrap();
    println!("generators {:?}, indices {:?}", two.nus(), two.indices());
}
