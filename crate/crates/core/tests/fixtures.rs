//! Fixed instances with hand-derived expected values.

use frobexp::arith::{Mat, Poly};
use frobexp::exponential::{
    exp_matrix, extract_tuple, one_param_from_tuple, tuple_to_infinitesimal, CommutingTuple,
};
use frobexp::morphisms::OneParamSubgroup;
use frobexp::oracle::{enumerate_commuting_tuples, enumerate_morphisms, DEFAULT_BUDGET};
use frobexp::unipotent::make_group;

fn unit(p: u64, n: usize, i: usize, j: usize) -> Mat<frobexp::arith::Fp> {
    let g = make_group(&vec![1; n], p).unwrap();
    Mat::unit(g.modulus(), n, i, j)
}

#[test]
fn heisenberg_exp_has_halved_corner() {
    let x = unit(5, 3, 0, 1).add(&unit(5, 3, 1, 2));
    let t = Poly::t(x.modulus());
    let e = exp_matrix(&x, &t).unwrap();
    assert_eq!(e.get(0, 2).coeffs(), &[0, 0, 3]);
    assert_eq!(e.get(0, 1).coeffs(), &[0, 1]);
}

#[test]
fn twisted_product_and_its_peel() {
    let g = make_group(&[1, 1, 1], 5).unwrap();
    let tuple = CommutingTuple::new(&g, vec![unit(5, 3, 0, 1), unit(5, 3, 0, 2)]).unwrap();
    let psi = one_param_from_tuple(&tuple).unwrap();
    let expected =
        OneParamSubgroup::from_coeffs(&g, &[vec![0, 1], vec![], vec![0, 0, 0, 0, 0, 1]]).unwrap();
    assert_eq!(psi, expected);
    assert_eq!(extract_tuple(&expected).unwrap(), tuple);
    let phi = tuple_to_infinitesimal(&tuple, 2).unwrap();
    assert_eq!(phi.lift().unwrap(), psi);
}

#[test]
fn zero_tuple_gives_trivial_morphism() {
    let g = make_group(&[1, 2, 1], 5).unwrap();
    let phi = tuple_to_infinitesimal(&CommutingTuple::zero(&g, 2), 2).unwrap();
    assert!(phi.is_trivial());
    assert!(extract_tuple(&phi.lift().unwrap()).unwrap().is_empty());
}

#[test]
fn small_instance_counts() {
    // Abelian U of rank m: m coordinates per tuple entry, p^{m r} tuples and morphisms.
    for (blocks, r, count) in [
        (&[1, 1][..], 3, 27),
        (&[2, 1][..], 1, 9),
        (&[2, 1][..], 2, 81),
        (&[1, 2][..], 2, 81),
    ] {
        let g = make_group(blocks, 3).unwrap();
        assert_eq!(
            enumerate_commuting_tuples(&g, r, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            count
        );
        assert_eq!(
            enumerate_morphisms(&g, r, DEFAULT_BUDGET).unwrap().len(),
            count
        );
    }
    let h = make_group(&[1, 1, 1], 3).unwrap();
    assert_eq!(
        enumerate_morphisms(&h, 1, DEFAULT_BUDGET).unwrap().len(),
        27
    );
    // Height 2 over F_5: 145 commuting pairs in F_5^2, times 25 for the centre.
    let h5 = make_group(&[1, 1, 1], 5).unwrap();
    assert_eq!(
        enumerate_commuting_tuples(&h5, 2, DEFAULT_BUDGET)
            .unwrap()
            .len(),
        3625
    );
    assert_eq!(
        enumerate_morphisms(&h5, 2, DEFAULT_BUDGET).unwrap().len(),
        3625
    );
}
