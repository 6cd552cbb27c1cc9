use hamming_ent::entropy::entropy_from_spectrum;
use hamming_ent::heun::ball_spectrum_via_heun;
use hamming_ent::model::ground_state_correlation_weight;
use hamming_ent::special::{binomial_exact, krawtchouk, krawtchouk_integer, krawtchouk_series};
use hamming_ent::subgraph::{subgraph_correlation_spectrum, SubgraphSpec};
use hamming_ent::terwilliger::{
    ball_spectrum_direct, enumerate_modules, neighborhood_dimension, neighborhood_spectrum, total_module_dimension,
};
use hamming_ent::tridiag::TridiagonalOperator;
use hamming_ent::{CorrelationSpectrum, GraphSpec, LevelSet};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = GraphSpec> {
    (1u32..=14, 2u32..=5).prop_map(|(d, q)| GraphSpec::new(d, q).unwrap())
}

fn level_set(d: u32) -> impl Strategy<Value = LevelSet> {
    proptest::collection::btree_set(0..=d, 0..=(d as usize + 1)).prop_map(LevelSet::new)
}

fn graph_with_sea() -> impl Strategy<Value = (GraphSpec, LevelSet)> {
    graph().prop_flat_map(|s| (Just(s), level_set(s.d)))
}

fn check_entropy_bounds(spec: &CorrelationSpectrum) -> Result<(), TestCaseError> {
    let s = entropy_from_spectrum(spec).unwrap();
    let size = spec.total_degeneracy().to_f64().unwrap();
    prop_assert!(s >= 0.0);
    prop_assert!(s <= std::f64::consts::LN_2 * size * (1.0 + 1e-12));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn krawtchouk_recurrence_matches_series(n in 1u32..=20, i in 0u32..=20, x in 0u32..=20, p in 0.05f64..0.95) {
        prop_assume!(i <= n && x <= n);
        let a = krawtchouk(i, f64::from(x), p, n).unwrap();
        let b = krawtchouk_series(i, f64::from(x), p, f64::from(n)).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn integer_krawtchouk_reciprocity(n in 1u32..=30, a in 0u32..=30, x in 0u32..=30, q in 2u32..=7) {
        prop_assume!(a <= n && x <= n);
        let w = |k: u32| binomial_exact(i64::from(n), i64::from(k)) * num_traits::pow(BigUint::from(q - 1), k as usize);
        let lhs = krawtchouk_integer(a, x, n, q) * num_bigint::BigInt::from(w(x));
        let rhs = krawtchouk_integer(x, a, n, q) * num_bigint::BigInt::from(w(a));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn modules_fill_the_space(d in 1u32..=60, q in 2u32..=6) {
        let s = GraphSpec::new(d, q).unwrap();
        prop_assert_eq!(total_module_dimension(&s), s.vertex_count());
        let i = d / 2;
        prop_assert_eq!(neighborhood_dimension(&s, i), s.neighborhood_size(i));
        prop_assert!(enumerate_modules(&s).iter().all(|m| m.twice_j <= m.n && m.n <= d));
    }

    #[test]
    fn complementary_sea_complements_spectrum((s, se) in graph_with_sea(), pick in 0u32..=14) {
        let i = pick % (s.d + 1);
        let a = neighborhood_spectrum(&s, i, &se).unwrap();
        let b = neighborhood_spectrum(&s, i, &se.complement(s.d)).unwrap();
        prop_assert!(b.max_deviation(&a.complement()).unwrap() <= 1e-10);
        let (sa, sb) = (entropy_from_spectrum(&a).unwrap(), entropy_from_spectrum(&b).unwrap());
        prop_assert!((sa - sb).abs() <= 1e-9 * sa.max(1.0));
        let sub = SubgraphSpec::new(s, i).unwrap();
        let a = subgraph_correlation_spectrum(&sub, &se).unwrap();
        let b = subgraph_correlation_spectrum(&sub, &se.complement(s.d)).unwrap();
        prop_assert!(b.max_deviation(&a.complement()).unwrap() <= 1e-10);
    }

    #[test]
    fn trace_and_size_rules((s, se) in graph_with_sea(), pick in 0u32..=14) {
        let l = pick % (s.d + 1);
        let w = ground_state_correlation_weight(s, &se).unwrap();
        let sub = subgraph_correlation_spectrum(&SubgraphSpec::new(s, l).unwrap(), &se).unwrap();
        let size = num_traits::pow(BigUint::from(s.q), l as usize);
        prop_assert_eq!(sub.total_degeneracy(), size.clone());
        let want = size.to_f64().unwrap() * w;
        prop_assert!((sub.trace() - want).abs() <= 1e-10 * want.max(1.0));
        check_entropy_bounds(&sub)?;

        let nb = neighborhood_spectrum(&s, l, &se).unwrap();
        prop_assert_eq!(nb.total_degeneracy(), s.neighborhood_size(l));
        let want = s.neighborhood_size(l).to_f64().unwrap() * w;
        prop_assert!((nb.trace() - want).abs() <= 1e-9 * want.max(1.0));
        check_entropy_bounds(&nb)?;
    }

    #[test]
    fn heun_route_matches_direct(s in graph(), n in 0u32..=14, k0 in 0u32..=14) {
        let (n, k0) = (n % (s.d + 1), k0 % (s.d + 1));
        let heun = ball_spectrum_via_heun(&s, n, k0).unwrap();
        let direct = ball_spectrum_direct(&s, n, &LevelSet::up_to(k0)).unwrap();
        prop_assert!(heun.spectrum.max_deviation(&direct).unwrap() <= 1e-9);
        let size: BigUint = (0..=n).map(|i| s.neighborhood_size(i)).sum();
        prop_assert_eq!(heun.spectrum.total_degeneracy(), size);
    }

    #[test]
    fn tridiagonal_eigenvalues_match_dense(diag in proptest::collection::vec(-5.0f64..5.0, 1..40), seed in any::<u64>()) {
        let n = diag.len();
        let off: Vec<f64> = (0..n.saturating_sub(1))
            .map(|k| ((seed.wrapping_mul(2654435761).wrapping_add(k as u64 * 40503)) % 1000) as f64 / 250.0 - 2.0)
            .collect();
        let t = TridiagonalOperator::new(diag, off);
        let mut dense: Vec<f64> = t.to_dense().symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let fast = t.eigenvalues().unwrap();
        let scale = t.max_abs().max(1.0);
        for (a, b) in fast.iter().zip(&dense) {
            prop_assert!((a - b).abs() <= 1e-11 * scale);
        }
        prop_assert_eq!(t.count_below(f64::INFINITY), n);
    }
}
