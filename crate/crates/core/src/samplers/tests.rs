use super::*;
use crate::models::DppModel;
use crate::numerics::{EnsembleMatrix, MarginalKernel};

fn diag_k_dpp(d: &[f64], k: usize) -> DppModel {
    DppModel::k_dpp(EnsembleMatrix::diagonal(d).unwrap(), k).unwrap()
}

#[test]
fn sequential_meters_one_round_per_element() {
    let m = diag_k_dpp(&[1.0, 2.0, 3.0, 4.0], 3);
    let r = sequential_sample(&m, 3, 7).unwrap();
    assert_eq!(r.sample.len(), 3);
    assert_eq!(r.meter.adaptive_rounds, 3);
    assert_eq!(r.status, Status::Exact);
    let empty = diag_k_dpp(&[1.0, 2.0], 0);
    let r = sequential_sample(&empty, 0, 7).unwrap();
    assert!(r.sample.is_empty());
    assert_eq!(r.meter.adaptive_rounds, 0);
}

#[test]
fn symmetric_single_batch_for_k_one() {
    let m = diag_k_dpp(&[1.0, 2.0, 3.0], 1);
    let r = sample_symmetric(&m, 1, &SamplerConfig::with_seed(3)).unwrap();
    assert_eq!(r.sample.len(), 1);
    assert_eq!(r.meter.adaptive_rounds, 1);
}

#[test]
fn symmetric_t1_acceptance_is_below_one() {
    let m = diag_k_dpp(&[1.0, 2.0, 3.0, 0.5], 2);
    let batch = SymmetricBatch::new(&m, &[], 1, 1e-9).unwrap();
    for i in 0..4 {
        let a = batch.acceptance_probability(&[i]).unwrap();
        assert!(a > 0.0 && a <= 1.0 + 1e-9);
    }
}

#[test]
fn identical_vectors_have_zero_acceptance() {
    // Gram matrix of e_1, e_1, e_2, e_2, ..., e_k, e_k.
    let k = 9;
    let n = 2 * k;
    let l = nalgebra::DMatrix::from_fn(n, n, |a, b| if a / 2 == b / 2 { 1.0 } else { 0.0 });
    let m = DppModel::k_dpp(EnsembleMatrix::new(l).unwrap(), k).unwrap();
    let t = symmetric_batch_size(k);
    let batch = SymmetricBatch::new(&m, &[], t, 1e-9).unwrap();
    assert_eq!(batch.acceptance_probability(&[0, 1, 4]).unwrap(), 0.0);
    assert_eq!(batch.acceptance_probability(&[6, 2, 7]).unwrap(), 0.0);
    assert!(batch.acceptance_probability(&[0, 2, 4]).unwrap() > 0.0);
}

#[test]
fn symmetric_requires_negative_correlation() {
    let l = EnsembleMatrix::from_rows(&[vec![1.0, 1.0], vec![-1.0, 1.0]]).unwrap();
    let m = DppModel::k_dpp(l, 1).unwrap();
    assert!(matches!(SymmetricBatch::new(&m, &[], 1, 1e-9), Err(Error::InvalidModel(_))));
}

#[test]
fn ei_single_element_ratio_is_one() {
    let m = diag_k_dpp(&[1.0, 2.0, 3.0, 4.0], 2);
    let config = SamplerConfig { beta: Some(0.25), ..SamplerConfig::default() };
    let batch = EiBatch::new(&m, &[], 1, 0.01, &config).unwrap();
    let u = batch.transform().total_copies() as f64;
    let want = u.powf(-config.ratio_exponent());
    for i in 0..4 {
        let a = batch.acceptance_probability(&[i]).unwrap();
        assert!((a / want - 1.0).abs() < 1e-9, "{a} vs {want}");
    }
}

#[test]
fn ei_meters_batches() {
    let m = diag_k_dpp(&[1.0; 12], 4);
    let r = sample_ei(&m, 4, &SamplerConfig::with_seed(5)).unwrap();
    assert_eq!(r.sample.len(), 4);
    assert_eq!(r.meter.adaptive_rounds, 4);
    assert_eq!(r.status, Status::Approximate { eps: 0.01 });
}

#[test]
fn zero_ensemble_gives_empty_sets() {
    let m = DppModel::plain(EnsembleMatrix::zeros(4)).unwrap();
    let prepared = PreparedModel::new(m.clone()).unwrap();
    for kind in [SamplerKind::Sequential, SamplerKind::BatchedSymmetric, SamplerKind::Ei, SamplerKind::Filtered] {
        for seed in 0..5 {
            let r = prepared.sample(kind, &SamplerConfig::with_seed(seed)).unwrap();
            assert!(r.sample.is_empty(), "{kind}");
        }
    }
    let r = filtered_sample(&m, &SamplerConfig::default()).unwrap();
    assert_eq!(r.meter.adaptive_rounds, 0);
    let r = one_step_bernoulli_sample(&MarginalKernel::new(nalgebra::DMatrix::zeros(3, 3)).unwrap(), &SamplerConfig::default())
        .unwrap();
    assert!(r.sample.is_empty());
}

#[test]
fn auto_dispatch() {
    let sym_k = PreparedModel::new(diag_k_dpp(&[1.0, 2.0, 3.0], 2)).unwrap();
    assert_eq!(sym_k.resolve(SamplerKind::Auto).unwrap(), SamplerKind::BatchedSymmetric);
    let l = EnsembleMatrix::from_rows(&[vec![1.0, 1.0], vec![-1.0, 1.0]]).unwrap();
    let npsd = PreparedModel::new(DppModel::plain(l).unwrap()).unwrap();
    assert_eq!(npsd.resolve(SamplerKind::Auto).unwrap(), SamplerKind::Ei);
    assert!(npsd.resolve(SamplerKind::Filtered).is_err());
    assert!(npsd.resolve(SamplerKind::BatchedSymmetric).is_err());
    // A flat spectrum has λ√n ≤ √tr(K); one dominant eigenvalue reverses it.
    let flat = PreparedModel::new(DppModel::plain(EnsembleMatrix::identity(9)).unwrap()).unwrap();
    assert_eq!(flat.resolve(SamplerKind::Auto).unwrap(), SamplerKind::Filtered);
    let mut d = vec![0.001; 9];
    d[0] = 9.0;
    let spiked = PreparedModel::new(DppModel::plain(EnsembleMatrix::diagonal(&d).unwrap()).unwrap()).unwrap();
    assert_eq!(spiked.resolve(SamplerKind::Auto).unwrap(), SamplerKind::BatchedSymmetric);
    assert_eq!("batched-sym".parse::<SamplerKind>().unwrap(), SamplerKind::BatchedSymmetric);
}

#[test]
fn results_ignore_worker_count() {
    let m = diag_k_dpp(&[1.0, 2.0, 3.0, 0.5, 0.7, 1.5, 2.5, 0.2], 4);
    let prepared = PreparedModel::new(m).unwrap();
    for kind in [SamplerKind::Sequential, SamplerKind::BatchedSymmetric, SamplerKind::Ei] {
        for seed in 0..20 {
            let one = prepared.sample(kind, &SamplerConfig::with_seed(seed)).unwrap();
            let four = prepared.sample(kind, &SamplerConfig { workers: 4, ..SamplerConfig::with_seed(seed) }).unwrap();
            assert_eq!(one, four);
            assert_eq!(one.sample.len(), 4);
        }
    }
}

#[test]
fn cardinality_reduction_counts_the_size_draw() {
    let m = DppModel::plain(EnsembleMatrix::identity(5)).unwrap();
    let r = sample_dpp_via_cardinality(&m, &SamplerConfig::with_seed(11), |km, k, c| {
        assert_eq!(km.sample_size(), Some(k));
        sample_symmetric(km, k, c)
    })
    .unwrap();
    assert!(r.meter.adaptive_rounds >= 1);
    assert_eq!(r.status, Status::Exact);
}
