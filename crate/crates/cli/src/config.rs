//! TOML run configuration.

use std::path::Path;

use phaseless_core::scene::SceneConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// File-level configuration. Every key is optional; missing keys take the
/// defaults of [`SceneConfig`] and [`RunConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub a: f64,
    pub tau: f64,
    pub m: usize,
    #[serde(rename = "N")]
    pub n_trunc: usize,
    pub rho: f64,
    pub n_boundary: usize,
    pub lambda_star: f64,
    pub seed: u64,
    pub noise_level: f64,
    /// Seeds averaged by `tables`.
    pub seeds: u64,
    /// Side of the reconstruction evaluation grid.
    pub n_eval: usize,
    /// First quadrature level, in cells per side.
    pub n_src: usize,
    /// When set, noisy runs use `2 ceil(eps^{-1/3})` instead of `N`.
    pub noise_truncation: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SceneConfig::default();
        Self {
            a: s.a,
            tau: s.tau,
            m: s.m,
            n_trunc: s.n_trunc,
            rho: s.rho,
            n_boundary: s.n_boundary,
            lambda_star: s.lambda_star,
            seed: 0,
            noise_level: 0.0,
            seeds: 10,
            n_eval: 800,
            n_src: 256,
            noise_truncation: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scene().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(0.0..1.0).contains(&self.noise_level) {
            return Err(CliError::Config("noise_level must lie in [0, 1)".into()));
        }
        if self.seeds == 0 || self.n_eval == 0 || self.n_src == 0 {
            return Err(CliError::Config("seeds, n_eval and n_src must be positive".into()));
        }
        Ok(())
    }

    pub fn scene(&self) -> SceneConfig {
        SceneConfig {
            a: self.a,
            tau: self.tau,
            m: self.m,
            n_trunc: self.n_trunc,
            rho: self.rho,
            n_boundary: self.n_boundary,
            lambda_star: self.lambda_star,
        }
    }

    /// Fourier truncation used at noise level `eps`.
    pub fn truncation_for(&self, eps: f64) -> Result<usize, CliError> {
        if eps > 0.0 && self.noise_truncation {
            let n = phaseless_core::pipeline::truncation_for_noise(eps)?;
            if n > self.n_trunc {
                return Err(CliError::Config(format!(
                    "noise level {eps} needs N = {n} but wavenumbers are only set up to N = {}",
                    self.n_trunc
                )));
            }
            Ok(n)
        } else {
            Ok(self.n_trunc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys() {
        let cfg = RunConfig::parse("a = 0.3\ntau = 7.0\nm = 12\nN = 6\nrho = 1.5\nn_boundary = 480\nseed = 4\nnoise_level = 0.02\n").unwrap();
        assert_eq!(cfg.n_trunc, 6);
        assert_eq!(cfg.m, 12);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.scene().n_boundary, 480);
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(RunConfig::parse("tau = 5.0"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("noise_level = 1.5"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("bogus = 1"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("m = \"ten\""), Err(CliError::Config(_))));
    }

    #[test]
    fn truncation_follows_noise() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.truncation_for(0.0).unwrap(), 10);
        assert_eq!(cfg.truncation_for(0.01).unwrap(), 10);
        assert_eq!(cfg.truncation_for(0.05).unwrap(), 6);
        assert!(cfg.truncation_for(0.001).is_err());
    }
}
