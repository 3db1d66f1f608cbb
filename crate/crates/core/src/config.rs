//! Key-value parameter files (TOML or JSON).
//!
//! | key          | meaning                                   | default |
//! |--------------|-------------------------------------------|---------|
//! | `chi`        | sets `chi1` and `chi2`                    | 0.01    |
//! | `chi1`,`chi2`| individual nonlinearities                 | `chi`   |
//! | `gamma`      | loss rate of all six modes                | 1       |
//! | `gammas`     | six individual loss rates                 | `gamma` |
//! | `eps`        | sets both pump amplitudes                 | 0       |
//! | `eps_ratio`  | both pumps as a multiple of `ε_c`         | unset   |
//! | `eps1`,`eps2`| individual pump amplitudes                | `eps`   |
//! | `eps3`       | injected signal on mode 3                 | 0       |
//!
//! Unknown keys are rejected. `eps` and `eps_ratio` are mutually exclusive.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{critical_pump_symmetric, SystemParams, NUM_MODES};
use crate::scalar::Real;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub chi: Option<f64>,
    pub chi1: Option<f64>,
    pub chi2: Option<f64>,
    pub gamma: Option<f64>,
    pub gammas: Option<[f64; NUM_MODES]>,
    pub eps: Option<f64>,
    pub eps_ratio: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub eps3: Option<f64>,
}

pub const DEFAULT_CHI: f64 = 0.01;
pub const DEFAULT_GAMMA: f64 = 1.0;

impl ParamsFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load by extension: `.json` is JSON, anything else TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    /// Apply `other` on top of `self`; keys set in `other` win.
    pub fn merged(mut self, other: &ParamsFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(chi, chi1, chi2, gamma, gammas, eps, eps_ratio, eps1, eps2, eps3);
        if other.eps.is_some() {
            self.eps_ratio = None;
        }
        if other.eps_ratio.is_some() {
            self.eps = None;
        }
        self
    }

    pub fn resolve<T: Real>(&self) -> Result<SystemParams<T>> {
        if self.eps.is_some() && self.eps_ratio.is_some() {
            return Err(Error::Config("`eps` and `eps_ratio` are mutually exclusive".into()));
        }
        let chi = self.chi.unwrap_or(DEFAULT_CHI);
        let gamma = self.gamma.unwrap_or(DEFAULT_GAMMA);
        let gammas = self.gammas.unwrap_or([gamma; NUM_MODES]);
        let chi1 = self.chi1.unwrap_or(chi);
        let chi2 = self.chi2.unwrap_or(chi);
        let eps = match self.eps_ratio {
            Some(ratio) => ratio * critical_pump_symmetric(chi, gamma),
            None => self.eps.unwrap_or(0.0),
        };
        let params = SystemParams {
            chi1: T::lit(chi1),
            chi2: T::lit(chi2),
            gamma: gammas.map(T::lit),
            eps1: T::lit(self.eps1.unwrap_or(eps)),
            eps2: T::lit(self.eps2.unwrap_or(eps)),
            eps3_injected: T::lit(self.eps3.unwrap_or(0.0)),
        };
        params.validate()?;
        Ok(params)
    }
}
