use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{det, monomial_from_integer_nodes};

/// Coefficients at most this fraction of the largest grid value are roundoff.
const ZERO_RTOL: f64 = 1e-11;
/// Negative coefficients beyond this fraction signal a real failure.
const NEGATIVE_RTOL: f64 = 1e-7;

/// `ln` of the coefficient of `Π x_i^{c_i}` in `det(I + X R)` with
/// `X = diag(x_{block(j)})`, by evaluation on the grid `Π {0..|V_i|}` and
/// per-variable Newton interpolation.
pub(crate) fn log_partition_coefficient(r: &DMatrix<f64>, block_of: &[usize], quotas: &[usize]) -> Result<f64> {
    let blocks = quotas.len();
    let mut sizes = vec![0usize; blocks];
    for &b in block_of {
        sizes[b] += 1;
    }
    if quotas.iter().zip(&sizes).any(|(c, d)| c > d) {
        return Ok(f64::NEG_INFINITY);
    }
    let n = r.nrows();
    let scales = block_scales(r, block_of, quotas, &sizes);
    let dims: Vec<usize> = sizes.iter().map(|d| d + 1).collect();
    let total: usize = dims.iter().product();
    // Row-major grid, last block fastest.
    let mut values = Vec::with_capacity(total);
    let mut point = vec![0usize; blocks];
    let mut m = DMatrix::zeros(n, n);
    for _ in 0..total {
        for i in 0..n {
            let x = point[block_of[i]] as f64 * scales[block_of[i]];
            for j in 0..n {
                m[(i, j)] = x * r[(i, j)] + if i == j { 1.0 } else { 0.0 };
            }
        }
        values.push(det(&m));
        for axis in (0..blocks).rev() {
            point[axis] += 1;
            if point[axis] < dims[axis] {
                break;
            }
            point[axis] = 0;
        }
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for axis in (0..blocks).rev() {
        values = values
            .chunks(dims[axis])
            .map(|line| monomial_from_integer_nodes(line)[quotas[axis]])
            .collect();
    }
    let v = values[0];
    if v < -NEGATIVE_RTOL * scale {
        return Err(Error::NegativeMass(v / scale));
    }
    if v <= ZERO_RTOL * scale {
        return Ok(f64::NEG_INFINITY);
    }
    let shift: f64 = quotas.iter().zip(&scales).map(|(&c, s)| c as f64 * s.ln()).sum();
    Ok(v.ln() - shift)
}

/// Per-block substitution `x_i → s_i x_i` that makes the target coefficient
/// dominate at the largest node: solves `Σ_j r_jj y/(1 + r_jj y) = c_i` for
/// `y = s_i d_i`, using the diagonal as a proxy for the spectrum.
fn block_scales(r: &DMatrix<f64>, block_of: &[usize], quotas: &[usize], sizes: &[usize]) -> Vec<f64> {
    (0..quotas.len())
        .map(|b| {
            if sizes[b] == 0 {
                return 1.0;
            }
            let diag: Vec<f64> =
                (0..r.nrows()).filter(|&i| block_of[i] == b).map(|i| r[(i, i)].abs().max(1e-300)).collect();
            let target = (quotas[b] as f64).clamp(0.25, sizes[b] as f64 - 0.25);
            let expected = |y: f64| diag.iter().map(|&d| d * y / (1.0 + d * y)).sum::<f64>();
            let (mut lo, mut hi) = (1e-12f64, 1e12f64);
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if expected(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo * hi).sqrt() / sizes[b] as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_two_blocks() {
        let r = DMatrix::identity(4, 4);
        let v = log_partition_coefficient(&r, &[0, 0, 1, 1], &[1, 1]).unwrap();
        assert!((v.exp() - 4.0).abs() < 1e-9);
        let v = log_partition_coefficient(&r, &[0, 0, 1, 1], &[0, 1]).unwrap();
        assert!((v.exp() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_quota() {
        let r = DMatrix::identity(2, 2);
        assert_eq!(log_partition_coefficient(&r, &[0, 1], &[2, 0]).unwrap(), f64::NEG_INFINITY);
    }
}
