//! Session parameters shared by all CLI subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::characters::DEFAULT_CHAR_CAP;
use crate::error::{Error, Result};
use crate::group_ring::GroupRing;
use crate::padic::ipow;
use crate::towers::DEFAULT_CHAIN_CAP;

/// Largest ambient module dimension `g * p^{dm}` a tower computation may use.
pub const DEFAULT_MODULE_CAP: usize = 512;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SessionConfig {
    pub p: u64,
    pub d: usize,
    #[serde(rename = "N")]
    pub prec: u32,
    pub m: u32,
    pub char_cap: usize,
    pub module_cap: usize,
    pub chain_cap: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            p: 2,
            d: 1,
            prec: 3,
            m: 2,
            char_cap: DEFAULT_CHAR_CAP,
            module_cap: DEFAULT_MODULE_CAP,
            chain_cap: DEFAULT_CHAIN_CAP,
        }
    }
}

/// Optional settings read from a `key = value` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: Option<u64>,
    pub d: Option<usize>,
    #[serde(alias = "N", alias = "prec")]
    pub n: Option<u32>,
    #[serde(alias = "level")]
    pub m: Option<u32>,
    pub char_cap: Option<usize>,
    pub module_cap: Option<usize>,
    pub chain_cap: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fills the fields that are set in the file.
    pub fn apply(&self, cfg: &mut SessionConfig) {
        cfg.p = self.p.unwrap_or(cfg.p);
        cfg.d = self.d.unwrap_or(cfg.d);
        cfg.prec = self.n.unwrap_or(cfg.prec);
        cfg.m = self.m.unwrap_or(cfg.m);
        cfg.char_cap = self.char_cap.unwrap_or(cfg.char_cap);
        cfg.module_cap = self.module_cap.unwrap_or(cfg.module_cap);
        cfg.chain_cap = self.chain_cap.unwrap_or(cfg.chain_cap);
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if ![2, 3, 5].contains(&self.p) {
            return Err(Error::Config(format!("p = {} must be 2, 3 or 5", self.p)));
        }
        if !(1..=3).contains(&self.d) {
            return Err(Error::Config(format!("d = {} must be in 1..=3", self.d)));
        }
        if !(1..=6).contains(&self.prec) {
            return Err(Error::Config(format!("N = {} must be in 1..=6", self.prec)));
        }
        if self.m > 4 {
            return Err(Error::Config(format!("m = {} must be in 0..=4", self.m)));
        }
        let chars = ipow(self.p, self.d as u32 * self.m) as u128;
        if chars > self.char_cap as u128 {
            return Err(Error::CapExceeded { needed: chars, cap: self.char_cap as u128 });
        }
        Ok(())
    }

    pub fn ring(&self) -> Result<GroupRing> {
        self.validate()?;
        GroupRing::new(self.p, self.d, self.m, self.prec)
    }

    /// Up-front size check for a module with `generators` generators.
    pub fn check_module(&self, generators: usize) -> Result<()> {
        let dim = generators as u128 * ipow(self.p, self.d as u32 * self.m) as u128;
        if dim > self.module_cap as u128 {
            return Err(Error::CapExceeded { needed: dim, cap: self.module_cap as u128 });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        assert!(SessionConfig::default().validate().is_ok());
        let bad = SessionConfig { p: 7, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let big = SessionConfig { p: 5, d: 3, m: 2, ..Default::default() };
        assert!(matches!(big.validate(), Err(Error::CapExceeded { .. })));
        let cfg = SessionConfig { p: 3, d: 2, m: 3, ..Default::default() };
        assert!(cfg.check_module(1).is_err());
    }

    #[test]
    fn config_file() {
        let f = ConfigFile::parse("p = 3\nd = 2\nN = 4\nm = 2\n").unwrap();
        let mut cfg = SessionConfig::default();
        f.apply(&mut cfg);
        assert_eq!((cfg.p, cfg.d, cfg.prec, cfg.m), (3, 2, 4, 2));
        assert!(ConfigFile::parse("q = 1").is_err());
    }
}
