use hecke_core::presentation::{AlgebraElement, HeckeAlgebra};
use hecke_core::tensor::{ProductElement, TensorAlgebra};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn algebra() -> TensorAlgebra {
    TensorAlgebra::new(vec![
        HeckeAlgebra::with_params(2, 2, 1, 0).unwrap(),
        HeckeAlgebra::with_params(3, 2, 1, 0).unwrap(),
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn slot_embedding_is_multiplicative(slot in 0usize..2, seed: u64) {
        let t = algebra();
        let alg = &t.factors()[slot];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = AlgebraElement::basis(alg.random_word(2, 1, &mut rng));
        let b = AlgebraElement::basis(alg.random_word(2, 1, &mut rng));
        let lhs = t.tensor_mul(&t.embed(slot, &a).unwrap(), &t.embed(slot, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, t.embed(slot, &alg.mul(&a, &b).unwrap()).unwrap());
    }

    #[test]
    fn disjoint_slots_commute(seed: u64) {
        let t = algebra();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = AlgebraElement::basis(t.factors()[0].random_word(2, 1, &mut rng));
        let b = AlgebraElement::basis(t.factors()[1].random_word(1, 1, &mut rng));
        let (x, y) = (t.embed(0, &a).unwrap(), t.embed(1, &b).unwrap());
        let xy = t.tensor_mul(&x, &y).unwrap();
        prop_assert_eq!(&xy, &t.tensor_mul(&y, &x).unwrap());
        prop_assert_eq!(xy, ProductElement::pure(&[a, b]));
    }
}

#[test]
fn unit_is_neutral() {
    let t = algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = AlgebraElement::basis(t.factors()[0].random_word(2, 1, &mut rng));
    let b = AlgebraElement::basis(t.factors()[1].random_word(2, 1, &mut rng));
    let x = ProductElement::pure(&[a, b]);
    assert_eq!(t.tensor_mul(&t.unit(), &x).unwrap(), x);
    assert_eq!(t.tensor_mul(&x, &t.unit()).unwrap(), x);
}
