use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::distribution::{brute_force_distribution, downsample_distribution, ExactDistribution};
use crate::error::{Error, Result};
use crate::models::DppModel;
use crate::rng::stream;

/// Ground-set cap for entropic-independence spot checks.
pub const MAX_EI_CHECK_N: usize = 12;

/// `Σ q_i ln(q_i / p_i)` with `0 ln 0 = 0`.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::SupportMismatch);
    }
    let mut total = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi > 0.0 {
            if !(pi > 0.0) {
                return Err(Error::SupportMismatch);
            }
            total += qi * (qi / pi).ln();
        }
    }
    Ok(total.max(0.0))
}

/// `D_λ(q‖p) = Σ q_i^λ p_i^{1-λ}`, i.e. `E_p[(q/p)^λ]`.
pub fn renyi_divergence(q: &[f64], p: &[f64], lambda: f64) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::SupportMismatch);
    }
    if !(lambda >= 1.0) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} must be at least 1")));
    }
    let mut total = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi > 0.0 {
            if !(pi > 0.0) {
                return Err(Error::SupportMismatch);
            }
            total += qi.powf(lambda) * pi.powf(1.0 - lambda);
        }
    }
    Ok(total)
}

/// Upper bound on `D_λ(q‖p)` when every `p_i ∈ [1/(Cn), C/n]`:
/// `C^{λ-1}(1 + n^{λ-1} λ(λ-1)(KL + ln C))`.
pub fn klrenyi_bound(kl: f64, n: usize, c: f64, lambda: f64) -> f64 {
    c.powf(lambda - 1.0) * (1.0 + (n as f64).powf(lambda - 1.0) * lambda * (lambda - 1.0) * (kl + c.ln()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EiReport {
    pub trials: usize,
    /// Largest observed `KL(ν₁‖μ₁) / KL(ν‖μ)`.
    pub worst_ratio: f64,
    /// `1/(αk)`.
    pub bound: f64,
    pub passed: bool,
}

/// Checks `KL(ν₁‖μ₁) ≤ KL(ν‖μ)/(αk)` on random `ν` supported inside the
/// support of the model's law.
pub fn ei_spot_check(model: &DppModel, alpha: f64, trials: usize, seed: u64) -> Result<EiReport> {
    let n = model.ground_size();
    if n > MAX_EI_CHECK_N {
        return Err(Error::GroundSetTooLarge { n, cap: MAX_EI_CHECK_N });
    }
    ei_spot_check_distribution(&brute_force_distribution(model)?, alpha, trials, seed)
}

/// As [`ei_spot_check`] for an explicit distribution over equal-size sets.
/// Trials cycle through point masses, sparse mixtures and dense reweightings.
pub fn ei_spot_check_distribution(mu: &ExactDistribution, alpha: f64, trials: usize, seed: u64) -> Result<EiReport> {
    let support: Vec<Vec<usize>> = mu.support().cloned().collect();
    let k = support.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::InvalidModel("entropic independence needs sets of positive size".into()));
    }
    let mu1 = downsample_distribution(mu, 1)?;
    let singles: Vec<Vec<usize>> = mu1.support().cloned().collect();
    let mu_p: Vec<f64> = support.iter().map(|s| mu.probability(s)).collect();
    let mu1_p: Vec<f64> = singles.iter().map(|s| mu1.probability(s)).collect();
    let bound = 1.0 / (alpha * k as f64);
    let mut worst = 0.0f64;
    let mut passed = true;
    for trial in 0..trials {
        let mut rng = stream(seed, &[trial as u64]);
        let weights: Vec<f64> = match trial % 3 {
            0 => {
                let hit = rng.random_range(0..support.len());
                (0..support.len()).map(|i| if i == hit { 1.0 } else { 0.0 }).collect()
            }
            1 => support
                .iter()
                .map(|_| if rng.random_bool(0.3) { Exp1.sample(&mut rng) } else { 0.0 })
                .collect(),
            _ => mu_p.iter().map(|&p| p * (2.0 * rng.random::<f64>() - 1.0).exp2().powi(3)).collect(),
        };
        let Ok(nu) = ExactDistribution::from_weights(support.iter().cloned().zip(weights)) else {
            continue;
        };
        let nu_p: Vec<f64> = support.iter().map(|s| nu.probability(s)).collect();
        let nu1 = downsample_distribution(&nu, 1)?;
        let nu1_p: Vec<f64> = singles.iter().map(|s| nu1.probability(s)).collect();
        let lhs = kl_divergence(&nu1_p, &mu1_p)?;
        let rhs = kl_divergence(&nu_p, &mu_p)?;
        if lhs > rhs * bound + 1e-9 {
            passed = false;
        }
        if rhs > 1e-12 {
            worst = worst.max(lhs / rhs);
        }
    }
    Ok(EiReport { trials, worst_ratio: worst, bound, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_examples() {
        let p = [0.25, 0.75];
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!((renyi_divergence(&p, &p, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::SupportMismatch));
    }

    #[test]
    fn non_ei_mixture_is_flagged() {
        let delta = 1e-3;
        let mu = ExactDistribution::from_weights(vec![(vec![0, 1], 1.0 - delta), (vec![2, 3], delta)]).unwrap();
        let report = ei_spot_check_distribution(&mu, 1.0, 30, 1).unwrap();
        assert!(!report.passed);
        assert!(report.worst_ratio > 0.5);
    }
}
