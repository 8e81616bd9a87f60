//! Ground-truth oracles and statistical instruments: exhaustive
//! distributions, TV distance, divergences, entropic-independence spot
//! checks, the paired hard instance and a perfect-matching enumerator.

mod distribution;
mod divergence;
pub mod generators;
mod hard_instance;
mod matchings;
mod report;

pub use distribution::{
    brute_force_distribution, downsample_distribution, for_each_combination, kernel_distribution,
    statistical_tolerance, thinned_distribution, tv_distance, ExactDistribution, FAILURE_KEY, MAX_BRUTE_FORCE_N,
};
pub use divergence::{
    ei_spot_check, ei_spot_check_distribution, kl_divergence, klrenyi_bound, renyi_divergence, EiReport,
    MAX_EI_CHECK_N,
};
pub use hard_instance::{
    binomial_u128, duplicate_probability, duplicate_scaling_report, duplicate_subset_count, DuplicateRatio,
    DuplicateRow, DuplicateScalingReport, HardConditioned, HardInstance,
};
pub use matchings::enumerate_perfect_matchings;
pub use report::CriterionReport;
