//! Configuration-driven experiment runner for the repeated-interaction
//! simulator: a TOML file describes one model and one run mode, and the
//! runner writes a self-describing CSV (metadata lines prefixed with `#`,
//! then a header row and data rows).
//!
//! The binary exposes five subcommands mapping onto the library's
//! capabilities: `evolve` (master-equation time series with work
//! bookkeeping), `steady` (stationary state at one operating point),
//! `sweep` (steady-state observables over one or two parameter axes),
//! `montecarlo` (stochastic collision trajectories against the generator),
//! and `compare` (every kick convention against the stochastic oracle).

pub mod config;
pub mod output;
pub mod run;

/// Bundled preset configurations, each reproducing one figure-style data
/// set. The first comment line of each file describes it.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
];

/// Look up a bundled preset by name.
pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Failure classes mapped to process exit codes: configuration problems
/// exit with 1, numerical failures during a simulation exit with 2.
#[derive(Debug)]
pub enum Failure {
    /// Unusable configuration, CLI input, or I/O problem (exit code 1).
    Config(String),
    /// A simulation step failed validation or linear algebra (exit code 2).
    Numeric(String),
}

impl Failure {
    /// Classify a library error: parameter and shape problems trace back
    /// to the configuration, anything that broke mid-computation is
    /// numerical.
    pub fn from_lib(e: repint::Error) -> Self {
        use repint::Error::*;
        match e {
            DimensionMismatch(_) | InvalidSpin(_) | InvalidParameter(_) => {
                Failure::Config(e.to_string())
            }
            NotHermitian(_) | InvalidState(_) | Numerical(_) | Linalg(_) => {
                Failure::Numeric(e.to_string())
            }
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "configuration error: {msg}"),
            Failure::Numeric(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}
