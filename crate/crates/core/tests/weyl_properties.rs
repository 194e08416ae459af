use std::collections::BTreeSet;

use hecke_core::weyl::{
    all_perms, all_subsets, is_min_right, min_decomp_right, pq_sets, tau_conj, Perm, Root, SignedTau, SimpleSubset,
    Tau,
};
use proptest::prelude::*;

fn perm(max_m: usize) -> impl Strategy<Value = Perm> {
    (1..=max_m).prop_flat_map(|m| proptest::sample::select(all_perms(m)))
}

fn perm_pair(max_m: usize) -> impl Strategy<Value = (Perm, Perm)> {
    (1..=max_m).prop_flat_map(|m| {
        let ps = all_perms(m);
        (proptest::sample::select(ps.clone()), proptest::sample::select(ps))
    })
}

proptest! {
    #[test]
    fn length_is_inversion_count(w in perm(6)) {
        prop_assert_eq!(w.length(), w.inversion_set().len());
    }

    #[test]
    fn simple_reflection_changes_length_by_one(w in perm(6), k in 0usize..5) {
        let m = w.m();
        prop_assume!(k + 1 < m);
        let ws = w.compose(&Perm::simple(m, k));
        let up = w.act(Root::simple(k)).is_positive();
        prop_assert_eq!(ws.length() as i64, w.length() as i64 + if up { 1 } else { -1 });
    }

    #[test]
    fn inversion_set_of_product((w1, w2) in perm_pair(5)) {
        let n12 = w1.compose(&w2).inversion_set();
        let n2 = w2.inversion_set();
        let moved: BTreeSet<Root> = w1.inversion_set().into_iter().map(|r| w2.inverse().act(r)).collect();
        let union: BTreeSet<Root> = n2.union(&moved).copied().filter(|r| r.is_positive()).collect();
        prop_assert!(n12.iter().all(|r| union.contains(r)));
        let additive = w1.compose(&w2).length() == w1.length() + w2.length();
        let disjoint_equal = n2.is_disjoint(&moved) && n12 == n2.union(&moved).copied().collect();
        prop_assert_eq!(additive, disjoint_equal);
    }

    #[test]
    fn minimal_right_representative((w, bits) in perm(5).prop_flat_map(|w| (Just(w), 0u32..16))) {
        let m = w.m();
        let p = SimpleSubset::from_indices((0..m.saturating_sub(1)).filter(|k| bits >> k & 1 == 1));
        let (u, v) = min_decomp_right(p, &w);
        prop_assert!(is_min_right(p, &v));
        for x in all_perms(m).iter().filter(|x| x.in_parabolic(p)) {
            let other = x.compose(&v);
            if other != v {
                prop_assert!(other.length() > v.length());
            }
        }
        prop_assert_eq!(u.compose(&v), w);
    }
}

#[test]
fn pq_identity_exhaustive() {
    for m in 2..=5 {
        for w in all_perms(m) {
            for k in 0..m - 1 {
                let r = pq_sets(&w, k);
                let lhs = SignedTau::from_diagonal(&Tau::of_subset(m, r.p).diagonal())
                    .add(&tau_conj(&w, &Tau::generator(m, k)));
                assert_eq!(lhs, SignedTau::of_index_set(m, &r.q), "{w} k={k}");
            }
        }
    }
}

#[test]
fn subsets_enumerated_once() {
    for m in 1..=5 {
        let s: BTreeSet<Vec<usize>> = all_subsets(m).into_iter().map(|p| p.indices(m)).collect();
        assert_eq!(s.len(), 1 << (m - 1));
    }
}
