//! Random test models.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::numerics::{symmetrize, EnsembleMatrix, MarginalKernel};

pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

fn with_spectrum<R: Rng>(eigs: &[f64], rng: &mut R) -> DMatrix<f64> {
    let n = eigs.len();
    let q = random_orthogonal(n, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigs));
    symmetrize(&(&q * d * q.transpose()))
}

/// Symmetric PSD ensemble with eigenvalues uniform in `[lo, hi]`.
pub fn random_symmetric_psd<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<EnsembleMatrix> {
    let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    EnsembleMatrix::new(with_spectrum(&eigs, rng))
}

/// Nonsymmetric PSD ensemble: symmetric part with eigenvalues in `[lo, hi]`
/// plus a random skew part of entry scale `skew`.
pub fn random_npsd<R: Rng>(n: usize, lo: f64, hi: f64, skew: f64, rng: &mut R) -> Result<EnsembleMatrix> {
    let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let s = with_spectrum(&eigs, rng);
    let a = DMatrix::from_fn(n, n, |_, _| skew * rng.sample::<f64, _>(StandardNormal));
    EnsembleMatrix::new(s + (&a - a.transpose()) * 0.5)
}

/// Symmetric marginal kernel with eigenvalues uniform in `[0, max]`, the
/// largest pinned to `max`.
pub fn random_kernel<R: Rng>(n: usize, max: f64, rng: &mut R) -> Result<MarginalKernel> {
    let mut eigs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=max)).collect();
    if let Some(first) = eigs.first_mut() {
        *first = max;
    }
    MarginalKernel::new(with_spectrum(&eigs, rng))
}

/// Random partition of `0..n` into `r` nonempty blocks with random quotas.
pub fn random_partition<R: Rng>(n: usize, r: usize, rng: &mut R) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut blocks = vec![Vec::new(); r];
    for (pos, &e) in perm.iter().enumerate() {
        let b = if pos < r { pos } else { rng.random_range(0..r) };
        blocks[b].push(e);
    }
    blocks.iter_mut().for_each(|b| b.sort_unstable());
    let quotas = blocks.iter().map(|b| rng.random_range(0..=b.len())).collect();
    (blocks, quotas)
}

/// Edges of a random stacked triangulation on `n` vertices (each new vertex
/// placed in a random face and joined to its three corners), each edge kept
/// with probability `keep`. Always planar.
pub fn random_planar_edges<R: Rng>(n: usize, keep: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    if n >= 2 {
        edges.push((0, 1));
    }
    if n >= 3 {
        edges.extend([(0, 2), (1, 2)]);
    }
    let mut faces = vec![[0, 1, 2], [0, 1, 2]];
    for v in 3..n {
        let f = rng.random_range(0..faces.len());
        let [a, b, c] = faces.swap_remove(f);
        edges.extend([(a, v), (b, v), (c, v)]);
        faces.extend([[a, b, v], [b, c, v], [a, c, v]]);
    }
    edges.retain(|_| rng.random::<f64>() < keep);
    edges
}
