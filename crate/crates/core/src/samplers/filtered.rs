//! Filtered sampler for symmetric DPPs with a small top kernel eigenvalue.
//!
//! Each iteration draws from the DPP with kernel `αK⁽ⁱ⁾`, which has
//! eigenvalues at most `n^{-1/2}` and so is close to a product of
//! independent coins. Chosen elements are then conditioned into the scaled
//! ensemble `(1-α)L⁽ⁱ⁾`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fanout::{self, Plan, RatioTarget};
use super::{RoundMeter, SampleResult, SamplerConfig, Status};
use crate::error::{Error, Result};
use crate::models::{Constraint, DppModel};
use crate::numerics::{
    complement, inverse, largest_symmetric_eigenvalue, log_abs_det, principal_submatrix, schur_parts,
    symmetrize, MarginalKernel, PSD_TOL,
};
use crate::rng::{tag, StreamRng};

/// Per-iteration record of a filtered run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterTrace {
    pub alpha: f64,
    /// `λ_max(K⁽⁰⁾)`.
    pub lambda: f64,
    /// `λ_max(K⁽ⁱ⁾)` at the start of each iteration that ran.
    pub lambdas: Vec<f64>,
    pub iterations: usize,
}

/// One-step target: the DPP with marginal kernel `K`, proposal independent
/// `Bernoulli(K_ii)` coins, restricted to sets of size at most `cutoff`.
struct OneStep {
    kernel: DMatrix<f64>,
    diag: Vec<f64>,
    /// `K (I - K)^{-1}`.
    ensemble: DMatrix<f64>,
    ln_det_complement: f64,
    ln_all_absent: f64,
    cutoff: f64,
}

impl OneStep {
    fn new(kernel: &DMatrix<f64>, cutoff: f64) -> Result<Self> {
        let n = kernel.nrows();
        let diag: Vec<f64> = (0..n).map(|i| kernel[(i, i)].clamp(0.0, 1.0)).collect();
        let complement = DMatrix::identity(n, n) - kernel;
        let (sign, ln_det_complement) = log_abs_det(&complement);
        if !(sign > 0.0) {
            return Err(Error::SingularMatrix);
        }
        let ensemble = kernel * inverse(&complement)?;
        let ln_all_absent = diag.iter().map(|&d| (1.0 - d).ln()).sum();
        Ok(Self { kernel: kernel.clone(), diag, ensemble, ln_det_complement, ln_all_absent, cutoff })
    }

    fn ratio(&self, set: &[usize]) -> Option<f64> {
        if set.is_empty() {
            return Some(self.ln_det_complement - self.ln_all_absent);
        }
        let (sign, ln_det) = log_abs_det(&principal_submatrix(&self.ensemble, set));
        if !(sign > 0.0) {
            return None;
        }
        let ln_q: f64 = set.iter().map(|&i| self.diag[i].ln() - (1.0 - self.diag[i]).ln()).sum();
        Some(ln_det + self.ln_det_complement - self.ln_all_absent - ln_q)
    }
}

impl RatioTarget for OneStep {
    type Draw = Vec<usize>;

    fn propose(&self, rng: &mut StreamRng) -> Result<Vec<usize>> {
        Ok((0..self.diag.len()).filter(|&i| rng.random::<f64>() < self.diag[i]).collect())
    }

    fn log_ratio(&self, set: &Vec<usize>) -> Result<Option<f64>> {
        Ok(self.ratio(set))
    }

    fn admissible(&self, set: &Vec<usize>) -> bool {
        set.len() as f64 <= self.cutoff
    }

    fn draw_target(&self, rng: &mut StreamRng) -> Result<(Vec<usize>, Option<f64>)> {
        let set = sample_kernel_sequentially(&self.kernel, rng);
        let ratio = self.ratio(&set);
        Ok((set, ratio))
    }
}

/// Exact DPP draw by deciding elements in order, updating the kernel by
/// conditioning on each inclusion or exclusion.
fn sample_kernel_sequentially(kernel: &DMatrix<f64>, rng: &mut StreamRng) -> Vec<usize> {
    let n = kernel.nrows();
    let mut k = kernel.clone();
    let mut out = Vec::new();
    for i in 0..n {
        let p = k[(i, i)].clamp(0.0, 1.0);
        let include = rng.random::<f64>() < p;
        let pivot = if include { p } else { p - 1.0 };
        if include {
            out.push(i);
        }
        if pivot.abs() > 0.0 {
            for a in i + 1..n {
                let f = k[(a, i)] / pivot;
                if f == 0.0 {
                    continue;
                }
                for b in i + 1..n {
                    k[(a, b)] -= f * k[(i, b)];
                }
            }
        }
    }
    out
}

/// One round of the one-step sampler on kernel `K` with accuracy `eps`.
fn one_step_round(
    kernel: &DMatrix<f64>,
    eps: f64,
    config: &SamplerConfig,
    key: &[u64],
    meter: &mut RoundMeter,
) -> Result<Option<Vec<usize>>> {
    let n = kernel.nrows();
    let log_inv_eps = (1.0 / eps).ln().max(1.0);
    let c_s = config.size_cutoff_constant;
    let target = OneStep::new(kernel, c_s * (n as f64 * log_inv_eps).sqrt())?;
    let plan = Plan { log_bound: c_s * log_inv_eps.sqrt(), attempts: log_inv_eps.ceil(), strict: false };
    fanout::run_round(&target, &plan, config, key, meter)
}

/// Approximate sampler for a DPP given by its marginal kernel, valid when
/// `λ_max(K) ≤ n^{-1/2}`: Bernoulli proposals corrected by modified
/// rejection.
pub fn one_step_bernoulli_sample(kernel: &MarginalKernel, config: &SamplerConfig) -> Result<SampleResult> {
    config.validate()?;
    let n = kernel.dim();
    let lambda = largest_symmetric_eigenvalue(kernel.matrix());
    if n > 0 && lambda > 1.0 / (n as f64).sqrt() + PSD_TOL {
        return Err(Error::InvalidArgument(format!("λ_max(K) = {lambda} exceeds n^(-1/2)")));
    }
    let mut meter = RoundMeter::default();
    let status = Status::Approximate { eps: config.eps };
    Ok(match one_step_round(kernel.matrix(), config.eps, config, &[tag::ROUND, 0], &mut meter)? {
        Some(sample) => SampleResult { sample, meter, status },
        None => SampleResult { sample: Vec::new(), meter, status: Status::Failed },
    })
}

/// Filtered sampler for a plain symmetric DPP.
pub fn filtered_sample(model: &DppModel, config: &SamplerConfig) -> Result<SampleResult> {
    Ok(filtered_sample_traced(model, config)?.0)
}

pub fn filtered_sample_traced(model: &DppModel, config: &SamplerConfig) -> Result<(SampleResult, FilterTrace)> {
    config.validate()?;
    if !model.is_symmetric() || *model.constraint() != Constraint::None {
        return Err(Error::InvalidModel("filtered sampling needs a plain symmetric DPP".into()));
    }
    let n = model.ground_size();
    let status = Status::Approximate { eps: config.eps };
    let lambda = largest_symmetric_eigenvalue(model.kernel().matrix()).max(0.0);
    let mut trace = FilterTrace { lambda, ..FilterTrace::default() };
    let mut meter = RoundMeter::default();
    if n == 0 || lambda <= 0.0 {
        return Ok((SampleResult { sample: Vec::new(), meter, status }, trace));
    }
    let alpha = 1.0 / (lambda * (n as f64).sqrt());
    trace.alpha = alpha;
    if alpha >= 1.0 {
        trace.lambdas.push(lambda);
        trace.iterations = 1;
        let result = one_step_round(model.kernel().matrix(), config.eps, config, &[tag::ROUND, 0], &mut meter)?;
        let (sample, status) = match result {
            Some(s) => (s, status),
            None => (Vec::new(), Status::Failed),
        };
        return Ok((SampleResult { sample, meter, status }, trace));
    }
    let iterations = (config.filter_rounds_constant / alpha * (n as f64 / config.eps).ln()).ceil() as usize;
    let eps_step = config.eps / iterations as f64;
    let mut l = model.ensemble().matrix().clone();
    let mut index: Vec<usize> = (0..n).collect();
    let mut chosen = Vec::new();
    for i in 0..iterations {
        if index.is_empty() {
            break;
        }
        let m = index.len();
        let kernel = DMatrix::identity(m, m) - inverse(&(DMatrix::identity(m, m) + &l))?;
        trace.lambdas.push(largest_symmetric_eigenvalue(&kernel));
        trace.iterations += 1;
        let Some(t) = one_step_round(&(kernel * alpha), eps_step, config, &[tag::ROUND, i as u64], &mut meter)? else {
            chosen.sort_unstable();
            return Ok((SampleResult { sample: chosen, meter, status: Status::Failed }, trace));
        };
        l *= 1.0 - alpha;
        if !t.is_empty() {
            chosen.extend(t.iter().map(|&r| index[r]));
            let (residual, _) = schur_parts(&l, &t)?.ok_or(Error::SingularBlock)?;
            l = symmetrize(&residual);
            index = complement(&t, m).into_iter().map(|r| index[r]).collect();
        }
    }
    chosen.sort_unstable();
    Ok((SampleResult { sample: chosen, meter, status }, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::validation::{kernel_distribution, tv_distance, ExactDistribution};

    #[test]
    fn sequential_kernel_sampler_is_exact() {
        let k = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.2, 0.4, 0.0, 0.1, 0.0, 0.3]);
        let exact = kernel_distribution(&k).unwrap();
        let draws: Vec<Vec<usize>> =
            (0..40_000u64).map(|s| sample_kernel_sequentially(&k, &mut stream(s, &[]))).collect();
        let emp = ExactDistribution::empirical(draws.iter().map(|d| Some(d.as_slice()))).unwrap();
        assert!(tv_distance(&emp, &exact) < 0.02);
    }

    #[test]
    fn ratio_is_normalized() {
        let k = DMatrix::from_row_slice(3, 3, &[0.3, 0.1, 0.0, 0.1, 0.2, 0.05, 0.0, 0.05, 0.25]);
        let target = OneStep::new(&k, f64::INFINITY).unwrap();
        let exact = kernel_distribution(&k).unwrap();
        for mask in 0u32..8 {
            let set: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            let nu: f64 = (0..3).map(|i| if set.contains(&i) { k[(i, i)] } else { 1.0 - k[(i, i)] }).product();
            let r = target.ratio(&set).unwrap().exp();
            assert!((r * nu - exact.probability(&set)).abs() < 1e-12);
        }
    }
}
