use std::collections::BTreeSet;

use hecke_core::residue::{bruhat_product, factor_unipotent, residue_bruhat, Field, ResidueMatrix, Unipotent};
use hecke_core::weyl::{all_perms, positive_roots, root_sets, Perm, Root, Tau};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = (usize, u32, u32)> {
    prop_oneof![Just((2, 2, 1)), Just((3, 2, 1)), Just((3, 3, 1)), Just((4, 2, 1)), Just((3, 2, 2))]
}

proptest! {
    #[test]
    fn factor_round_trip((m, p, f) in params(), seed: u64) {
        let k = Field::new(p, f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all: BTreeSet<Root> = positive_roots(m).into_iter().collect();
        let u = Unipotent::random_on(m, &all, &k, &mut rng);
        for w in all_perms(m) {
            let s1 = w.inverse().inversion_set();
            let s2: BTreeSet<Root> = all.difference(&s1).copied().collect();
            let (a, b) = factor_unipotent(&u, &s1, &s2, &k).unwrap();
            prop_assert!(a.support().is_subset(&s1) && b.support().is_subset(&s2));
            prop_assert_eq!(a.mul(&b, &k).unwrap(), u.clone());
        }
    }

    #[test]
    fn perm_conjugation_is_an_action((m, p, f) in params(), seed: u64, i in 0usize..24, j in 0usize..24) {
        let k = Field::new(p, f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perms = all_perms(m);
        let (w1, w2) = (&perms[i % perms.len()], &perms[j % perms.len()]);
        let g = ResidueMatrix::random_invertible(m, &k, &mut rng);
        prop_assert_eq!(g.conj_by_perm(w2).conj_by_perm(w1), g.conj_by_perm(&w1.compose(w2)));
    }

    #[test]
    fn bruhat_round_trip((m, p, f) in params(), seed: u64) {
        let k = Field::new(p, f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ResidueMatrix::random_invertible(m, &k, &mut rng);
        let (u1, t, w, u2) = residue_bruhat(&g, &k).unwrap();
        prop_assert!(u1.is_upper() && u2.is_upper());
        prop_assert_eq!(bruhat_product(&u1, &t, &w, &u2, &k), g);
    }
}

/// Conjugation by `tau` permutes `U_{Phi_P(tau)}` and is trivial when untwisted.
#[test]
fn levi_conjugation_is_bijective() {
    for (p, f, sigma) in [(2, 1, 0), (3, 1, 0), (2, 2, 1), (2, 2, 0)] {
        let k = Field::new(p, f).unwrap();
        let m = 3;
        for tau in [Tau::from_exponents(vec![0, 1]), Tau::from_exponents(vec![2, 0]), Tau::zero(3)] {
            let (levi, _) = root_sets(m, tau.p_set());
            let pos: BTreeSet<Root> = levi.into_iter().filter(|r| r.is_positive()).collect();
            let all = Unipotent::enumerate_on(m, &pos, &k);
            let images: BTreeSet<Unipotent> = all
                .iter()
                .map(|u| u.conj_by_varpi_diag(&tau.diagonal(), sigma, &k).unwrap())
                .collect();
            assert_eq!(images.len(), all.len());
            assert!(images.iter().all(|u| u.support().is_subset(&pos)));
            if sigma == 0 {
                assert!(all.iter().all(|u| images.contains(u)));
                for u in &all {
                    assert_eq!(&u.conj_by_varpi_diag(&tau.diagonal(), 0, &k).unwrap(), u);
                }
            }
        }
    }
}

#[test]
fn elementary_matrices_under_simple_reflections() {
    let k = Field::new(3, 1).unwrap();
    let u = Unipotent::elementary(3, Root::new(0, 1), 2);
    let s = Perm::simple(3, 1);
    assert_eq!(u.conj_by_perm(&s).support(), BTreeSet::from([Root::new(0, 2)]));
    assert!(ResidueMatrix::identity(3).is_invertible(&k));
}
