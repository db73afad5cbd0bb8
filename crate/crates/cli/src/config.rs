use std::path::Path;

use relp::closure::DEFAULT_CLOSURE_CAP;
use relp::oracle::OracleCaps;
use relp::solver::SolverOptions;
use serde::Deserialize;

/// Settings read from the file named by `RELP_CONFIG`, e.g.
///
/// ```text
/// closure_cap = 20000
/// max_iterations = 500000
/// tolerance = 1e-9
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub closure_cap: usize,
    pub oracle_max_members: usize,
    pub oracle_max_len: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for Config {
    fn default() -> Self {
        let caps = OracleCaps::default();
        Config {
            closure_cap: DEFAULT_CLOSURE_CAP,
            oracle_max_members: caps.max_members,
            oracle_max_len: caps.max_len,
            max_iterations: SolverOptions::default().max_iterations,
            tolerance: 1e-9,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Config::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// The file named by `RELP_CONFIG`, or defaults when unset.
    pub fn from_env() -> Result<Config, String> {
        match std::env::var_os("RELP_CONFIG") {
            Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
            _ => Ok(Config::default()),
        }
    }

    pub fn oracle_caps(&self) -> OracleCaps {
        OracleCaps { max_members: self.oracle_max_members, max_len: self.oracle_max_len, partitions_only: false }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { max_iterations: self.max_iterations, ..SolverOptions::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_keep_defaults() {
        let c = Config::parse("closure_cap = 50\ntolerance = 0.01\n").unwrap();
        assert_eq!(c.closure_cap, 50);
        assert_eq!(c.tolerance, 0.01);
        assert_eq!(c.oracle_max_members, 8);
        assert!(Config::parse("bogus = 1").is_err());
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }
}
