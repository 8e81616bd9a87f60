use nalgebra::DMatrix;
use pardpp::numerics::*;
use pardpp::rng::stream;
use pardpp::validation::generators::{random_kernel, random_symmetric_psd};
use proptest::prelude::*;

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

fn minor(m: &DMatrix<f64>, s: &[usize]) -> f64 {
    det(&principal_submatrix(m, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_roundtrip(seed in any::<u64>(), n in 1usize..=12) {
        let l = random_symmetric_psd(n, 0.1, 10.0, &mut stream(seed, &[])).unwrap();
        let back = ensemble_from_kernel(&kernel_from_ensemble(&l).unwrap()).unwrap();
        prop_assert!((back.matrix() - l.matrix()).amax() <= 1e-9 * l.matrix().amax().max(1.0));
    }

    #[test]
    fn kernel_is_contraction_with_marginal_diagonal(seed in any::<u64>(), n in 1usize..=8) {
        let l = random_symmetric_psd(n, 0.0, 5.0, &mut stream(seed, &[])).unwrap();
        let k = kernel_from_ensemble(&l).unwrap();
        let eig = symmetric_eigenvalues(k.matrix());
        prop_assert!(eig.iter().all(|&e| (-PSD_TOL..=1.0 + PSD_TOL).contains(&e)));
        let z = det(&(DMatrix::identity(n, n) + l.matrix()));
        for i in 0..n {
            let inc: f64 = subsets(n).filter(|s| s.contains(&i)).map(|s| minor(l.matrix(), &s)).sum::<f64>() / z;
            prop_assert!((k.matrix()[(i, i)] - inc).abs() <= 1e-9);
        }
    }

    #[test]
    fn conditioning_identity(seed in any::<u64>(), n in 2usize..=8) {
        let l = random_symmetric_psd(n, 0.1, 10.0, &mut stream(seed, &[])).unwrap();
        for t in subsets(n).filter(|t| !t.is_empty() && t.len() < n) {
            let r = schur_complement(&l, &t).unwrap();
            let rest: Vec<usize> = (0..n).filter(|i| !t.contains(i)).collect();
            let dt = minor(l.matrix(), &t);
            for f in subsets(rest.len()) {
                let joint: Vec<usize> = t.iter().copied().chain(f.iter().map(|&a| rest[a])).collect();
                let want = minor(l.matrix(), &joint);
                let got = minor(r.matrix(), &f) * dt;
                prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn char_poly_matches_minor_sums(seed in any::<u64>(), n in 1usize..=10) {
        let l = random_symmetric_psd(n, 0.1, 10.0, &mut stream(seed, &[])).unwrap();
        let c = char_poly_coeffs(&l).unwrap();
        let mut want = vec![0.0; n + 1];
        for s in subsets(n) {
            want[s.len()] += minor(l.matrix(), &s);
        }
        for j in 0..=n {
            prop_assert!((c[j] - want[j]).abs() <= 1e-8 * want[j].abs(), "e_{j}: {} vs {}", c[j], want[j]);
        }
        let total: f64 = c.iter().sum();
        let z = det(&(DMatrix::identity(n, n) + l.matrix()));
        prop_assert!((total - z).abs() <= 1e-9 * z);
    }

    #[test]
    fn hadamard_bound(seed in any::<u64>(), n in 1usize..=8) {
        let k = random_kernel(n, 1.0, &mut stream(seed, &[])).unwrap();
        for t in subsets(n) {
            let prod: f64 = t.iter().map(|&i| k.matrix()[(i, i)]).product();
            prop_assert!(minor(k.matrix(), &t) <= prod + 1e-12);
        }
    }

    #[test]
    fn principal_minors_nonnegative(seed in any::<u64>(), n in 1usize..=10) {
        let l = pardpp::validation::generators::random_npsd(n, 0.0, 3.0, 1.0, &mut stream(seed, &[])).unwrap();
        prop_assert_ne!(l.kind(), MatrixKind::Unclassified);
        for s in subsets(n) {
            prop_assert!(minor(l.matrix(), &s) >= -MINOR_TOL);
        }
    }
}
