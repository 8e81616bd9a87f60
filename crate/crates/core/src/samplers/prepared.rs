use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::cardinality::sample_size_then;
use super::ei::sample_ei;
use super::filtered::filtered_sample;
use super::sequential::sequential_sample;
use super::symmetric::sample_symmetric;
use super::{SampleResult, SamplerConfig};
use crate::error::{Error, Result};
use crate::models::{Constraint, DppModel, Memoized};
use crate::numerics::largest_symmetric_eigenvalue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Sequential,
    #[serde(rename = "batched-sym")]
    BatchedSymmetric,
    Ei,
    Filtered,
    Auto,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 5] =
        [Self::Sequential, Self::BatchedSymmetric, Self::Ei, Self::Filtered, Self::Auto];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sequential => "sequential",
            Self::BatchedSymmetric => "batched-sym",
            Self::Ei => "ei",
            Self::Filtered => "filtered",
            Self::Auto => "auto",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sampler '{s}'")))
    }
}

/// A model with the caches every sampler wants across repeated draws:
/// memoized oracles for the model and for each cardinality of a plain DPP.
pub struct PreparedModel {
    model: DppModel,
    oracle: Memoized<DppModel>,
    sizes: Option<Vec<f64>>,
    by_size: Vec<OnceLock<Memoized<DppModel>>>,
}

impl PreparedModel {
    pub fn new(model: DppModel) -> Result<Self> {
        let plain = *model.constraint() == Constraint::None;
        let sizes = if plain { Some(model.size_distribution()?) } else { None };
        let by_size = if plain { (0..=model.ground_size()).map(|_| OnceLock::new()).collect() } else { Vec::new() };
        Ok(Self { oracle: Memoized::new(model.clone()), model, sizes, by_size })
    }

    pub fn model(&self) -> &DppModel {
        &self.model
    }

    /// Resolves `auto` and checks that `kind` applies to this model.
    pub fn resolve(&self, kind: SamplerKind) -> Result<SamplerKind> {
        let symmetric = self.model.is_symmetric();
        let partition = matches!(self.model.constraint(), Constraint::Partition { .. });
        let plain = self.sizes.is_some();
        match kind {
            SamplerKind::Auto => Ok(if !symmetric || partition {
                SamplerKind::Ei
            } else if plain && self.prefers_filter() {
                SamplerKind::Filtered
            } else {
                SamplerKind::BatchedSymmetric
            }),
            SamplerKind::BatchedSymmetric if !symmetric || partition => Err(Error::InvalidModel(
                "batched-sym needs a symmetric model without a partition constraint".into(),
            )),
            SamplerKind::Filtered if !symmetric || !plain => {
                Err(Error::InvalidModel("filtered needs a plain symmetric DPP".into()))
            }
            other => Ok(other),
        }
    }

    /// Compares the two bounded-eigenvalue estimates `λ_max(K)√n` and `√tr(K)`.
    fn prefers_filter(&self) -> bool {
        let k = self.model.kernel();
        let lambda = largest_symmetric_eigenvalue(k.matrix());
        let trace: f64 = k.diagonal().iter().sum();
        lambda * (self.model.ground_size() as f64).sqrt() <= trace.max(0.0).sqrt()
    }

    fn sized(&self, k: usize) -> Result<&Memoized<DppModel>> {
        let slot = &self.by_size[k];
        if let Some(m) = slot.get() {
            return Ok(m);
        }
        let m = Memoized::new(self.model.with_cardinality(k)?);
        Ok(slot.get_or_init(|| m))
    }

    pub fn sample(&self, kind: SamplerKind, config: &SamplerConfig) -> Result<SampleResult> {
        config.validate()?;
        let kind = self.resolve(kind)?;
        if kind == SamplerKind::Filtered {
            return filtered_sample(&self.model, config);
        }
        let run = |oracle: &Memoized<DppModel>, k: usize| match kind {
            SamplerKind::Sequential => sequential_sample(oracle, k, config.seed),
            SamplerKind::BatchedSymmetric => sample_symmetric(oracle, k, config),
            _ => sample_ei(oracle, k, config),
        };
        match &self.sizes {
            Some(sizes) => sample_size_then(sizes, config, |k| run(self.sized(k)?, k)),
            None => run(&self.oracle, self.model.sample_size().unwrap_or(0)),
        }
    }
}
