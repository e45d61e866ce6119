/// Tunable bounds shared across modules. Every operation that can recurse or
/// search takes these explicitly so the CLI can surface them as flags.
#[derive(Debug, Clone)]
pub struct Config {
    /// Maximum number of tower levels accepted when building a field tower.
    pub tower_depth_max: usize,
    /// Maximum absolute degree accepted for factorization / enumeration.
    pub degree_max: usize,
    /// Maximum refinement depth (chain length) for extension enumeration.
    pub refinement_limit: usize,
    /// Cap on the approximant value exponent in element-value computation;
    /// exceeding it raises PRECISION_EXHAUSTED.
    pub value_cap: u32,
    /// Cap on the modulus exponent for Hensel lifting (p^cap).
    pub hensel_cap: u32,
    /// Seed for the randomized equal-degree splitting step.
    pub factor_seed: u64,
    /// Candidate budget for small-height element searches (weak approximation,
    /// separating elements).
    pub search_cap: usize,
    /// Degree ceiling for towers built by the simulators.
    pub sim_degree_max: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tower_depth_max: 6,
            degree_max: 64,
            refinement_limit: 8,
            value_cap: 256,
            hensel_cap: 512,
            factor_seed: 0x76616c5f6c616221,
            search_cap: 200_000,
            sim_degree_max: 16,
        }
    }
}
