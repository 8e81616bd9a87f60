use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element subdivision that makes all copy marginals nearly equal.
///
/// Element `i` becomes `copies[i] = ⌈(n/(βk))·p_i⌉` interchangeable copies,
/// each with marginal `p_i / copies[i]`. Counting on the subdivided measure
/// delegates to the original one, so no copy-level matrix is ever built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicTransform {
    pub k: usize,
    pub beta: f64,
    pub marginals: Vec<f64>,
    pub copies: Vec<u64>,
    /// Whether the copies of element `i` lie in the retained set.
    pub retained: Vec<bool>,
}

impl IsotropicTransform {
    /// `|U|`, the number of copies.
    pub fn total_copies(&self) -> u64 {
        self.copies.iter().sum()
    }

    pub fn copy_marginal(&self, i: usize) -> f64 {
        if self.copies[i] == 0 {
            0.0
        } else {
            self.marginals[i] / self.copies[i] as f64
        }
    }
}

pub fn isotropic_transform(marginals: &[f64], k: usize, beta: f64) -> Result<IsotropicTransform> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("β = {beta} must lie in (0, 1)")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("subdivision needs k ≥ 1".into()));
    }
    let n = marginals.len() as f64;
    let scale = n / (beta * k as f64);
    let copies = marginals
        .iter()
        .map(|&p| {
            let x = scale * p.max(0.0);
            // Absorb roundoff just above an integer.
            (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as u64
        })
        .collect();
    let floor = beta.sqrt() * k as f64 / n;
    let retained = marginals.iter().map(|&p| p >= floor).collect();
    Ok(IsotropicTransform { k, beta, marginals: marginals.to_vec(), copies, retained })
}
