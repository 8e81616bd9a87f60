use super::{draw, weighted_index, RoundMeter, SampleResult, SamplerConfig};
use crate::error::{Error, Result};
use crate::models::{Constraint, DppModel};
use crate::rng::{stream, tag};

/// Draws a size from `sizes` (one adaptive round), then runs `inner` on it.
pub fn sample_size_then(
    sizes: &[f64],
    config: &SamplerConfig,
    inner: impl FnOnce(usize) -> Result<SampleResult>,
) -> Result<SampleResult> {
    let mut rng = stream(config.seed, &[tag::SIZE]);
    let j = draw(&weighted_index(sizes)?, &mut rng);
    let mut meter = RoundMeter::default();
    meter.record_round(1);
    meter.proposals_evaluated += 1;
    let result = inner(j)?;
    meter.merge_sequential(&result.meter);
    Ok(SampleResult { sample: result.sample, meter, status: result.status })
}

/// Samples a plain DPP by drawing its cardinality and running a sampler for
/// the corresponding k-DPP.
pub fn sample_dpp_via_cardinality<F>(model: &DppModel, config: &SamplerConfig, inner: F) -> Result<SampleResult>
where
    F: FnOnce(&DppModel, usize, &SamplerConfig) -> Result<SampleResult>,
{
    if *model.constraint() != Constraint::None {
        return Err(Error::InvalidModel("cardinality reduction needs an unconstrained DPP".into()));
    }
    let sizes = model.size_distribution()?;
    sample_size_then(&sizes, config, |k| inner(&model.with_cardinality(k)?, k, config))
}
