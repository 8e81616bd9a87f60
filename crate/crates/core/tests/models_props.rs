use pardpp::models::{Constraint, CountingOracle, DppModel, Memoized};
use pardpp::numerics::{det, principal_submatrix, EnsembleMatrix};
use pardpp::rng::stream;
use pardpp::validation::generators::{random_npsd, random_partition, random_symmetric_psd};
use proptest::prelude::*;
use rand::Rng;

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

fn brute_count(model: &DppModel, t: &[usize]) -> f64 {
    let n = model.ground_size();
    subsets(n)
        .filter(|s| t.iter().all(|e| s.contains(e)) && model.admits(s))
        .map(|s| det(&principal_submatrix(model.ensemble().matrix(), &s)))
        .sum()
}

fn random_model(seed: u64, n: usize, variant: u8) -> Option<DppModel> {
    let mut rng = stream(seed, &[]);
    let l = if variant.is_multiple_of(2) {
        random_symmetric_psd(n, 0.1, 10.0, &mut rng).unwrap()
    } else {
        random_npsd(n, 0.1, 10.0, 1.0, &mut rng).unwrap()
    };
    let constraint = match variant / 2 {
        0 => Constraint::None,
        1 => Constraint::Cardinality { k: rng.random_range(0..=n) },
        _ => {
            let (blocks, quotas) = random_partition(n, rng.random_range(1..=3.min(n)), &mut rng);
            Constraint::Partition { blocks, quotas }
        }
    };
    DppModel::new(l, constraint).ok()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300) || (a == 0.0 && b.abs() < 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counting_matches_enumeration(seed in any::<u64>(), n in 1usize..=8, variant in 0u8..6) {
        let Some(model) = random_model(seed, n, variant) else { return Ok(()) };
        for t in subsets(n) {
            let want = brute_count(&model, &t);
            let got = model.count(&t).unwrap();
            prop_assert!(rel_close(got, want, 1e-7), "T={t:?}: {got} vs {want}");
        }
    }

    #[test]
    fn conditioning_commutes_with_counting(seed in any::<u64>(), n in 2usize..=7, variant in 0u8..6) {
        let Some(model) = random_model(seed, n, variant) else { return Ok(()) };
        for t in subsets(n).filter(|t| !t.is_empty()) {
            let Ok(state) = model.condition(&t) else {
                prop_assert_eq!(model.count(&t).unwrap(), 0.0);
                continue;
            };
            let dt = det(&principal_submatrix(model.ensemble().matrix(), &t));
            for f in subsets(state.index_map.len()) {
                let mut joint = t.clone();
                joint.extend(state.to_original(&f));
                let want = model.count(&joint).unwrap();
                let got = state.residual.count(&f).unwrap() * dt;
                prop_assert!(rel_close(got, want, 1e-7), "T={t:?} F={f:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn chain_rule(seed in any::<u64>(), n in 1usize..=7, variant in 0u8..6) {
        let Some(model) = random_model(seed, n, variant) else { return Ok(()) };
        let z = model.count(&[]).unwrap();
        let mut rng = stream(seed, &[1]);
        for s in subsets(n).filter(|s| model.admits(s)) {
            let mass = det(&principal_submatrix(model.ensemble().matrix(), &s));
            if mass <= 1e-9 {
                continue;
            }
            let mut order = s.clone();
            for i in (1..order.len()).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            // Sequential inclusion probabilities, then the probability that nothing else joins.
            let mut p = 1.0;
            for j in 0..order.len() {
                p *= model.marginal(order[j], &order[..j]).unwrap();
            }
            let exclusive = mass / model.count(&s).unwrap();
            prop_assert!(rel_close(p * exclusive, mass / z, 1e-7));
        }
    }

    #[test]
    fn marginal_vector_matches_single_marginals(seed in any::<u64>(), n in 1usize..=7, variant in 0u8..6) {
        let Some(model) = random_model(seed, n, variant) else { return Ok(()) };
        for given in subsets(n).filter(|g| g.len() <= 2) {
            if model.count(&given).unwrap() <= 0.0 {
                continue;
            }
            let v = model.marginals(&given).unwrap();
            let memo = Memoized::new(&model).marginals(&given).unwrap();
            for i in (0..n).filter(|i| !given.contains(i)) {
                let single = model.marginal(i, &given).unwrap();
                prop_assert!((v[i] - single).abs() <= 1e-9, "{} vs {single}", v[i]);
                prop_assert_eq!(memo[i], v[i]);
            }
        }
    }

    #[test]
    fn negative_correlation(seed in any::<u64>(), n in 1usize..=8, k in 0usize..=8) {
        let l = random_symmetric_psd(n, 0.0, 5.0, &mut stream(seed, &[])).unwrap();
        let model = if k <= n { DppModel::k_dpp(l.clone(), k).unwrap_or(DppModel::plain(l).unwrap()) } else { DppModel::plain(l).unwrap() };
        let z = model.count(&[]).unwrap();
        let p: Vec<f64> = (0..n).map(|i| model.count(&[i]).unwrap() / z).collect();
        for t in subsets(n) {
            let joint = model.count(&t).unwrap() / z;
            let prod: f64 = t.iter().map(|&i| p[i]).product();
            prop_assert!(joint <= prod + 1e-10);
        }
    }

    #[test]
    fn size_distribution_sums_to_one(seed in any::<u64>(), n in 0usize..=12) {
        let l = random_npsd(n, 0.0, 4.0, 1.0, &mut stream(seed, &[])).unwrap();
        let p = DppModel::plain(l).unwrap().size_distribution().unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn residual_mass_law() {
    let l = EnsembleMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
    let state = DppModel::k_dpp(l, 2).unwrap().condition(&[2]).unwrap();
    let r = &state.residual;
    assert!((r.mass(&[1]).unwrap() / r.mass(&[0]).unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(state.to_original(&[0, 1]), vec![0, 1]);
}

#[test]
fn memoized_oracle_is_transparent() {
    let l = random_symmetric_psd(6, 0.1, 3.0, &mut stream(5, &[])).unwrap();
    let model = DppModel::k_dpp(l, 3).unwrap();
    let memo = Memoized::new(&model);
    for t in subsets(6) {
        assert_eq!(memo.log_count(&t).unwrap(), model.log_count(&t).unwrap());
        assert_eq!(memo.log_count(&t).unwrap(), model.log_count(&t).unwrap());
    }
}
