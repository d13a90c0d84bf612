//! Flat `key = value` config: check tolerances and the guard radius.
//!
//! ```text
//! # comments and blank lines are ignored
//! guard = 1e-6
//! tol.gaussmap = 1e-8
//! ```

use std::collections::BTreeMap;

use lagmin_core::tolerances as tol;

pub const CHECKS: [&str; 6] = ["biharmonic", "gaussmap", "ruling", "curvature", "stationarity", "tangency"];

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub guard: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for Config {
    fn default() -> Self {
        let tolerances = CHECKS
            .iter()
            .zip([tol::BIHARMONIC, tol::GAUSSMAP, tol::RULING, tol::CURVATURE_REL, tol::STATIONARITY_RATIO, tol::TANGENCY])
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Config { guard: lagmin_core::biharmonic::DEFAULT_GUARD, tolerances }
    }
}

impl Config {
    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances[check]
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, line: &str) -> Result<(), String> {
        let (k, v) = line.split_once('=').ok_or_else(|| format!("expected key=value, got `{line}`"))?;
        let (k, v) = (k.trim(), v.trim());
        let x: f64 = v.parse().map_err(|_| format!("`{k}`: `{v}` is not a number"))?;
        if !(x.is_finite() && x > 0.0) {
            return Err(format!("`{k}` must be positive"));
        }
        match k.strip_prefix("tol.") {
            None if k == "guard" => self.guard = x,
            Some(c) if CHECKS.contains(&c) => {
                self.tolerances.insert(c.to_string(), x);
            }
            _ => return Err(format!("unknown config key `{k}`")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut c = Config::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            c.set(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let c = Config::parse("# x\nguard = 1e-4\ntol.gaussmap=2e-8 # looser\n\n").unwrap();
        assert_eq!(c.guard, 1e-4);
        assert_eq!(c.tolerance("gaussmap"), 2e-8);
        assert_eq!(c.tolerance("ruling"), tol::RULING);
        assert!(Config::parse("tol.nope = 1").is_err());
        assert!(Config::parse("guard = -1").is_err());
        assert!(Config::parse("guard").is_err());
    }
}
