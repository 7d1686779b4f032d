//! Path-independent loss at the sources and detectors: per-port efficiency
//! tables and the product weights they induce on photon configurations.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::patterns::{InputPattern, OutputPattern};

/// Per-port efficiencies: `input_eff[i]` applies to input port i+1,
/// `output_eff[j]` to output port j+1. All values in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossProfile {
    input_eff: Vec<f64>,
    output_eff: Vec<f64>,
}

impl LossProfile {
    pub fn new(input_eff: Vec<f64>, output_eff: Vec<f64>) -> Result<Self> {
        for &v in input_eff.iter().chain(&output_eff) {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::EfficiencyRange { value: v });
            }
        }
        Ok(Self { input_eff, output_eff })
    }

    /// Constant efficiency xi over n_in input ports and eps over m output ports.
    pub fn uniform(m: usize, n_in: usize, xi: f64, eps: f64) -> Result<Self> {
        Self::new(vec![xi; n_in], vec![eps; m])
    }

    /// Lossless profile covering m ports on both sides.
    pub fn lossless(m: usize) -> Self {
        Self {
            input_eff: vec![1.0; m],
            output_eff: vec![1.0; m],
        }
    }

    pub fn input_eff(&self) -> &[f64] {
        &self.input_eff
    }

    pub fn output_eff(&self) -> &[f64] {
        &self.output_eff
    }

    /// prod_{sigma in S} xi_sigma
    pub fn input_weight(&self, s: &InputPattern) -> Result<f64> {
        let mut w = 1.0;
        for &port in s.ports() {
            let xi = self.input_eff.get(port - 1).ok_or(Error::IndexOutOfRange {
                what: "input efficiency",
                index: port,
                size: self.input_eff.len(),
            })?;
            w *= xi;
        }
        Ok(w)
    }

    /// prod_{sigma in S'} eps_sigma, a port of multiplicity mu contributing eps^mu.
    pub fn output_weight(&self, s: &OutputPattern) -> Result<f64> {
        let mut w = 1.0;
        for &port in s.ports() {
            let eps = self.output_eff.get(port - 1).ok_or(Error::IndexOutOfRange {
                what: "output efficiency",
                index: port,
                size: self.output_eff.len(),
            })?;
            w *= eps;
        }
        Ok(w)
    }

    /// Hex SHA-256 of the canonical JSON encoding; recorded in metadata
    /// sidecars so distribution files are traceable to their loss model.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("profile serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn write_profile(path: &Path, profile: &LossProfile) -> Result<()> {
    std::fs::write(path, serde_json::to_string(profile)?)?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<LossProfile> {
    let text = std::fs::read_to_string(path)?;
    let raw: LossProfile = serde_json::from_str(&text)?;
    // re-validate ranges
    LossProfile::new(raw.input_eff, raw.output_eff)
}
