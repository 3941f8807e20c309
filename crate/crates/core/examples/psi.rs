// Evaluate the form map on the coordinate form and on the Euler-type form.

use qord::branch::{h_star, psi, validate, RForm};
use qord::lattice::Exponent;
use qord::series::{int, rat, FracSeries, Poly, TruncationOrder};

fn main() {
    let d = TruncationOrder::new(30).unwrap();
    let terms = [([4, 3], int(1)), ([7, 6], rat(2, 5)), ([10, 6], int(-1))];
    let s = FracSeries::from_terms(2, d, terms.map(|(x, c)| (Exponent::from(x), c))).unwrap();
    let p = validate(2, 3, s).unwrap();

    let p3 = Poly::var(3, 2).add(&Poly::var(3, 0));
    let omega = RForm::new(vec![Poly::zero(3), Poly::zero(3), p3.clone()]);
    let got = psi(&p, &omega).unwrap();
    println!("psi(P3 dX1^dX2), valid to degree {}: {}", got.trunc().get(), got);
    println!(
        "n^2 H*(P3) t^(n,n) = {}",
        h_star(&p, &p3).mul_monomial(&Exponent::new([3, 3]), &int(9))
    );

    let w0 = RForm::omega0(3, p.lambda1(), &int(1), &int(2));
    let got = psi(&p, &w0).unwrap();
    println!("psi(omega_0) = {got}");
}
