//! DPP variants with exact counting oracles, marginals, conditioning and
//! cardinality distributions.

mod oracle;
mod partition;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use oracle::{CountingOracle, Memoized};

use crate::error::{Error, Result};
use crate::numerics::{
    check_index_set, clamp_probability, complement, kernel_from_ensemble, log_abs_det,
    schur_complement, schur_parts, symmetric_eigen, EnsembleMatrix, MarginalKernel,
    MatrixKind, SpectralEsp, MINOR_TOL,
};

/// Most partition blocks a model may carry.
pub const R_MAX: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Constraint {
    None,
    Cardinality { k: usize },
    Partition { blocks: Vec<Vec<usize>>, quotas: Vec<usize> },
}

/// A DPP: `μ(S) ∝ det(L_S)` restricted by an optional constraint.
#[derive(Clone, Debug)]
pub struct DppModel {
    l: EnsembleMatrix,
    constraint: Constraint,
    kernel: MarginalKernel,
    block_of: Vec<usize>,
}

/// A partially built sample and the model of what remains.
#[derive(Clone, Debug)]
pub struct ConditionedState {
    pub chosen: Vec<usize>,
    pub residual: DppModel,
    /// `index_map[r]` is the original index of residual element `r`.
    pub index_map: Vec<usize>,
}

impl ConditionedState {
    pub fn to_original(&self, residual_set: &[usize]) -> Vec<usize> {
        residual_set.iter().map(|&r| self.index_map[r]).collect()
    }
}

impl DppModel {
    pub fn new(l: EnsembleMatrix, constraint: Constraint) -> Result<Self> {
        let n = l.dim();
        if l.kind() == MatrixKind::Unclassified {
            return Err(Error::InvalidModel("ensemble matrix is neither PSD nor nPSD".into()));
        }
        let mut block_of = Vec::new();
        match &constraint {
            Constraint::None => {}
            Constraint::Cardinality { k } => {
                if *k > n {
                    return Err(Error::InvalidModel(format!("k = {k} exceeds n = {n}")));
                }
            }
            Constraint::Partition { blocks, quotas } => {
                if blocks.len() != quotas.len() {
                    return Err(Error::InvalidModel("blocks and quotas differ in length".into()));
                }
                if blocks.len() > R_MAX {
                    return Err(Error::InvalidModel(format!("{} blocks exceed the cap of {R_MAX}", blocks.len())));
                }
                block_of = vec![usize::MAX; n];
                for (b, block) in blocks.iter().enumerate() {
                    for &e in block {
                        if e >= n || block_of[e] != usize::MAX {
                            return Err(Error::InvalidModel(format!("element {e} out of range or in two blocks")));
                        }
                        block_of[e] = b;
                    }
                    if quotas[b] > block.len() {
                        return Err(Error::InvalidModel(format!("quota {} exceeds block size", quotas[b])));
                    }
                }
                if block_of.contains(&usize::MAX) {
                    return Err(Error::InvalidModel("blocks do not cover the ground set".into()));
                }
            }
        }
        let kernel = kernel_from_ensemble(&l)?;
        let model = Self { l, constraint, kernel, block_of };
        if model.log_count(&[])? == f64::NEG_INFINITY {
            return Err(Error::ZeroMass);
        }
        Ok(model)
    }

    pub fn plain(l: EnsembleMatrix) -> Result<Self> {
        Self::new(l, Constraint::None)
    }

    pub fn k_dpp(l: EnsembleMatrix, k: usize) -> Result<Self> {
        Self::new(l, Constraint::Cardinality { k })
    }

    pub fn partition(l: EnsembleMatrix, blocks: Vec<Vec<usize>>, quotas: Vec<usize>) -> Result<Self> {
        Self::new(l, Constraint::Partition { blocks, quotas })
    }

    /// The same ensemble with the constraint replaced by `|S| = k`.
    pub fn with_cardinality(&self, k: usize) -> Result<Self> {
        Ok(Self {
            l: self.l.clone(),
            constraint: Constraint::Cardinality { k },
            kernel: self.kernel.clone(),
            block_of: Vec::new(),
        })
        .and_then(|m| if m.log_count(&[])? == f64::NEG_INFINITY { Err(Error::ZeroMass) } else { Ok(m) })
    }

    pub fn ground_size(&self) -> usize {
        self.l.dim()
    }

    pub fn ensemble(&self) -> &EnsembleMatrix {
        &self.l
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn kernel(&self) -> &MarginalKernel {
        &self.kernel
    }

    pub fn is_symmetric(&self) -> bool {
        self.l.is_symmetric()
    }

    pub fn sample_size(&self) -> Option<usize> {
        match &self.constraint {
            Constraint::None => None,
            Constraint::Cardinality { k } => Some(*k),
            Constraint::Partition { quotas, .. } => Some(quotas.iter().sum()),
        }
    }

    /// Whether `s` satisfies the constraint.
    pub fn admits(&self, s: &[usize]) -> bool {
        match &self.constraint {
            Constraint::None => true,
            Constraint::Cardinality { k } => s.len() == *k,
            Constraint::Partition { quotas, .. } => {
                let mut hits = vec![0usize; quotas.len()];
                for &e in s {
                    hits[self.block_of[e]] += 1;
                }
                hits == *quotas
            }
        }
    }

    /// Unnormalized mass `det(L_S)·[constraint holds]`.
    pub fn mass(&self, s: &[usize]) -> Result<f64> {
        let s = check_index_set(s, self.ground_size())?;
        if !self.admits(&s) {
            return Ok(0.0);
        }
        let d = crate::numerics::det(&self.l.principal(&s));
        if d < -MINOR_TOL {
            return Err(Error::NegativeMass(d));
        }
        Ok(d.max(0.0))
    }

    /// `ln Σ_{S ⊇ T} μ(S)`, `-inf` when no admissible superset has mass.
    pub fn log_count(&self, t: &[usize]) -> Result<f64> {
        let n = self.ground_size();
        let t = check_index_set(t, n)?;
        if let Some(k) = self.sample_size() {
            if t.len() > k {
                return Ok(f64::NEG_INFINITY);
            }
        }
        let residual_quotas = match &self.constraint {
            Constraint::Partition { quotas, .. } => {
                let mut q: Vec<i64> = quotas.iter().map(|&c| c as i64).collect();
                for &e in &t {
                    q[self.block_of[e]] -= 1;
                }
                if q.iter().any(|&c| c < 0) {
                    return Ok(f64::NEG_INFINITY);
                }
                q.into_iter().map(|c| c as usize).collect()
            }
            _ => Vec::new(),
        };
        let Some((r, log_det_t)) = schur_parts(self.l.matrix(), &t)? else {
            return Ok(f64::NEG_INFINITY);
        };
        let rest = r.nrows();
        let tail = match &self.constraint {
            Constraint::None => {
                let (sign, log) = log_abs_det(&(DMatrix::identity(rest, rest) + &r));
                if sign <= 0.0 {
                    return Err(Error::NegativeMass(sign));
                }
                log
            }
            Constraint::Cardinality { k } => {
                let need = k - t.len();
                SpectralEsp::of_matrix(&r, self.l.is_symmetric(), need).ln(need)?
            }
            Constraint::Partition { .. } => {
                let block_of: Vec<usize> = complement(&t, n).iter().map(|&e| self.block_of[e]).collect();
                partition::log_partition_coefficient(&r, &block_of, &residual_quotas)?
            }
        };
        Ok(log_det_t + tail)
    }

    pub fn count(&self, t: &[usize]) -> Result<f64> {
        Ok(self.log_count(t)?.exp())
    }

    /// `P[i ∈ S | given ⊆ S]`.
    pub fn marginal(&self, i: usize, given: &[usize]) -> Result<f64> {
        if given.contains(&i) {
            return Err(Error::InvalidArgument(format!("element {i} is already in the conditioning set")));
        }
        let base = self.log_count(given)?;
        if base == f64::NEG_INFINITY {
            return Err(Error::ZeroConditional);
        }
        let mut joint = given.to_vec();
        joint.push(i);
        let top = self.log_count(&joint)?;
        if top == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        clamp_probability((top - base).exp())
    }

    /// Conditional marginals of every element given `given ⊆ S`.
    pub fn marginals(&self, given: &[usize]) -> Result<Vec<f64>> {
        let n = self.ground_size();
        let g = check_index_set(given, n)?;
        let base = self.log_count(&g)?;
        if base == f64::NEG_INFINITY {
            return Err(Error::ZeroConditional);
        }
        let rest = complement(&g, n);
        let mut out = vec![1.0; n];
        match &self.constraint {
            Constraint::None => {
                let (r, _) = schur_parts(self.l.matrix(), &g)?.ok_or(Error::ZeroConditional)?;
                let inv = crate::numerics::inverse(&(DMatrix::identity(rest.len(), rest.len()) + &r))?;
                for (a, &e) in rest.iter().enumerate() {
                    out[e] = clamp_probability(1.0 - inv[(a, a)])?;
                }
            }
            Constraint::Cardinality { k } if self.l.is_symmetric() => {
                let (r, _) = schur_parts(self.l.matrix(), &g)?.ok_or(Error::ZeroConditional)?;
                let p = symmetric_k_marginals(&r, k - g.len())?;
                for (a, &e) in rest.iter().enumerate() {
                    out[e] = p[a];
                }
            }
            _ => {
                let mut joint = g.clone();
                joint.push(0);
                for &e in &rest {
                    *joint.last_mut().unwrap() = e;
                    let top = self.log_count(&joint)?;
                    out[e] = if top == f64::NEG_INFINITY { 0.0 } else { clamp_probability((top - base).exp())? };
                }
            }
        }
        Ok(out)
    }

    /// Condition on `T ⊆ S`.
    pub fn condition(&self, t: &[usize]) -> Result<ConditionedState> {
        let n = self.ground_size();
        let sorted = check_index_set(t, n)?;
        if self.log_count(&sorted)? == f64::NEG_INFINITY {
            return Err(Error::ZeroMassCondition);
        }
        let index_map = complement(&sorted, n);
        let l = if sorted.is_empty() { self.l.clone() } else { schur_complement(&self.l, &sorted)? };
        let constraint = match &self.constraint {
            Constraint::None => Constraint::None,
            Constraint::Cardinality { k } => Constraint::Cardinality { k: k - sorted.len() },
            Constraint::Partition { blocks, quotas } => {
                let mut position = vec![usize::MAX; n];
                for (r, &e) in index_map.iter().enumerate() {
                    position[e] = r;
                }
                let mut quotas = quotas.clone();
                for &e in &sorted {
                    quotas[self.block_of[e]] -= 1;
                }
                let blocks = blocks
                    .iter()
                    .map(|b| b.iter().filter(|&&e| position[e] != usize::MAX).map(|&e| position[e]).collect())
                    .collect();
                Constraint::Partition { blocks, quotas }
            }
        };
        let residual = Self::new(l, constraint).map_err(|e| match e {
            Error::ZeroMass => Error::ZeroMassCondition,
            other => other,
        })?;
        Ok(ConditionedState { chosen: t.to_vec(), residual, index_map })
    }

    /// `P[|S| = j]` for `j = 0..n`, from `e_j(L)/det(I+L)`.
    pub fn size_distribution(&self) -> Result<Vec<f64>> {
        if self.constraint != Constraint::None {
            return Err(Error::InvalidModel("size distribution needs an unconstrained model".into()));
        }
        let n = self.ground_size();
        let esp = SpectralEsp::of_matrix(self.l.matrix(), self.l.is_symmetric(), n);
        let logs: Vec<f64> = (0..=n).map(|j| esp.ln(j)).collect::<Result<_>>()?;
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        Ok(weights.into_iter().map(|w| w / z).collect())
    }
}

/// Marginals of the `k`-DPP with symmetric ensemble `r`:
/// `p_i = Σ_j V_ij² λ_j e_{k-1}(λ_{-j}) / e_k(λ)`.
fn symmetric_k_marginals(r: &DMatrix<f64>, k: usize) -> Result<Vec<f64>> {
    let n = r.nrows();
    if k == 0 {
        return Ok(vec![0.0; n]);
    }
    let (vals, vecs) = symmetric_eigen(r);
    let s = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let lam: Vec<f64> = vals.iter().map(|v| if v.abs() <= crate::numerics::SPECTRAL_RTOL * s { 0.0 } else { v / s }).collect();
    // prefix[j][a] = e_a(λ_0..λ_{j-1}), suffix[j][a] = e_a(λ_j..λ_{n-1}).
    let mut prefix = vec![vec![0.0; k + 1]; n + 1];
    prefix[0][0] = 1.0;
    for j in 0..n {
        let (head, tail) = prefix.split_at_mut(j + 1);
        tail[0].copy_from_slice(&head[j]);
        for a in 1..=k {
            tail[0][a] += lam[j] * head[j][a - 1];
        }
    }
    let mut suffix = vec![vec![0.0; k + 1]; n + 1];
    suffix[n][0] = 1.0;
    for j in (0..n).rev() {
        let (head, tail) = suffix.split_at_mut(j + 1);
        head[j].copy_from_slice(&tail[0]);
        for a in 1..=k {
            head[j][a] += lam[j] * tail[0][a - 1];
        }
    }
    let ek = prefix[n][k];
    if !(ek > 0.0) {
        return Err(Error::ZeroConditional);
    }
    let weights: Vec<f64> = (0..n)
        .map(|j| {
            let without: f64 = (0..k).map(|a| prefix[j][a] * suffix[j + 1][k - 1 - a]).sum();
            lam[j] * without / ek
        })
        .collect();
    (0..n)
        .map(|i| clamp_probability((0..n).map(|j| vecs[(i, j)] * vecs[(i, j)] * weights[j]).sum()))
        .collect()
}

impl CountingOracle for DppModel {
    fn ground_size(&self) -> usize {
        DppModel::ground_size(self)
    }

    fn sample_size(&self) -> Option<usize> {
        DppModel::sample_size(self)
    }

    fn log_count(&self, given: &[usize]) -> Result<f64> {
        DppModel::log_count(self, given)
    }

    fn marginals(&self, given: &[usize]) -> Result<Vec<f64>> {
        DppModel::marginals(self, given)
    }

    fn negatively_correlated(&self) -> bool {
        self.is_symmetric() && !matches!(self.constraint, Constraint::Partition { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag123() -> EnsembleMatrix {
        EnsembleMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn count_examples() {
        let plain = DppModel::plain(EnsembleMatrix::identity(2)).unwrap();
        assert!(close(plain.count(&[]).unwrap(), 4.0));
        let two = DppModel::k_dpp(diag123(), 2).unwrap();
        assert!(close(two.count(&[]).unwrap(), 11.0));
        let part = DppModel::partition(EnsembleMatrix::identity(4), vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        assert!(close(part.count(&[]).unwrap(), 4.0));
    }

    #[test]
    fn marginal_examples() {
        let plain = DppModel::plain(EnsembleMatrix::identity(3)).unwrap();
        assert!(close(plain.marginal(0, &[]).unwrap(), 0.5));
        let two = DppModel::k_dpp(diag123(), 2).unwrap();
        assert!(close(two.marginal(0, &[]).unwrap(), 5.0 / 11.0));
        assert!(matches!(two.marginal(1, &[1]), Err(Error::InvalidArgument(_))));
        let fast = two.marginals(&[]).unwrap();
        for (p, want) in fast.iter().zip([5.0 / 11.0, 8.0 / 11.0, 9.0 / 11.0]) {
            assert!(close(*p, want), "{fast:?}");
        }
    }

    #[test]
    fn condition_examples() {
        let s = DppModel::plain(EnsembleMatrix::identity(3)).unwrap().condition(&[0]).unwrap();
        assert_eq!(s.residual.ensemble().matrix(), &DMatrix::identity(2, 2));
        assert_eq!(s.index_map, vec![1, 2]);

        let s = DppModel::k_dpp(diag123(), 2).unwrap().condition(&[2]).unwrap();
        assert_eq!(s.residual.constraint(), &Constraint::Cardinality { k: 1 });
        let (a, b) = (s.residual.count(&[0]).unwrap(), s.residual.count(&[1]).unwrap());
        assert!(close(b / a, 2.0));

        let part = DppModel::partition(EnsembleMatrix::identity(4), vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        let s = part.condition(&[0]).unwrap();
        assert_eq!(
            s.residual.constraint(),
            &Constraint::Partition { blocks: vec![vec![0], vec![1, 2]], quotas: vec![0, 1] }
        );
        assert_eq!(s.residual.marginal(0, &[]).unwrap(), 0.0);
        assert!(matches!(part.condition(&[0, 1]), Err(Error::ZeroMassCondition)));
    }

    #[test]
    fn size_distribution_examples() {
        let p = DppModel::plain(EnsembleMatrix::identity(2)).unwrap().size_distribution().unwrap();
        for (a, b) in p.iter().zip([0.25, 0.5, 0.25]) {
            assert!(close(*a, b));
        }
        let p = DppModel::plain(EnsembleMatrix::zeros(3)).unwrap().size_distribution().unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0]);
        let p = DppModel::plain(diag123()).unwrap().size_distribution().unwrap();
        for (a, b) in p.iter().zip([1.0, 6.0, 11.0, 6.0]) {
            assert!(close(*a, b / 24.0));
        }
    }

    #[test]
    fn zero_mass_count() {
        let l = EnsembleMatrix::diagonal(&[0.0, 1.0]).unwrap();
        let m = DppModel::plain(l).unwrap();
        assert_eq!(m.count(&[0]).unwrap(), 0.0);
        assert!(matches!(m.condition(&[0]), Err(Error::ZeroMassCondition)));
    }
}
