//! Count-rate model for lossy runs: the combinatorial speedup factor and a
//! binomial-survival projection of absolute rates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::patterns::binomial;

/// Hardware parameters for rate projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// Pulsed excitation rate, Hz.
    pub rep_rate_hz: f64,
    /// Per-photon source efficiency.
    pub eta_source: f64,
    /// Interferometer transmission.
    pub eta_interferometer: f64,
    /// Detector efficiency.
    pub eta_detector: f64,
    /// Fraction of pulses routed per input port by the demultiplexer.
    pub demux_duty: f64,
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_source", self.eta_source),
            ("eta_interferometer", self.eta_interferometer),
            ("eta_detector", self.eta_detector),
            ("demux_duty", self.demux_duty),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(crate::error::Error::InvalidParameter(format!(
                    "{name} = {v} outside (0, 1]"
                )));
            }
        }
        if self.rep_rate_hz <= 0.0 {
            return Err(crate::error::Error::InvalidParameter(format!(
                "rep_rate_hz = {} must be positive",
                self.rep_rate_hz
            )));
        }
        Ok(())
    }

    /// End-to-end per-photon efficiency.
    pub fn eta(&self) -> f64 {
        self.eta_source * self.eta_interferometer * self.eta_detector
    }

    pub fn attempt_rate_hz(&self) -> f64 {
        self.rep_rate_hz * self.demux_duty
    }
}

/// Exact combinatorial speedup of detecting n of n + k photons: C(n + k, n).
pub fn speedup_factor(n: usize, k: usize) -> u128 {
    assert!(n >= 1, "need at least one detected photon");
    binomial(n + k, n)
}

/// Projected n-fold coincidence rate with k photons lost, under the
/// binomial-survival model
///
/// ```text
/// rate = attempt_rate * C(n + k, k) * eta^n * (1 - eta)^k
/// ```
///
/// The model is an explicit assumption: it captures the combinatorial
/// speedup C(n + k, k) exactly and absolute magnitudes only qualitatively,
/// since the attempt-rate normalization of a real demultiplexed experiment
/// is hardware-specific.
pub fn projected_rate(params: &RateParams, n: usize, k: usize) -> f64 {
    let eta = params.eta();
    params.attempt_rate_hz()
        * speedup_factor(n, k) as f64
        * eta.powi(n as i32)
        * (1.0 - eta).powi(k as i32)
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub k: usize,
    pub factor: u128,
    pub rate_hz: f64,
}

pub fn rate_table(params: &RateParams, n: usize, k_max: usize) -> Vec<RateRow> {
    (0..=k_max)
        .map(|k| RateRow {
            n,
            k,
            factor: speedup_factor(n, k),
            rate_hz: projected_rate(params, n, k),
        })
        .collect()
}

/// CSV rows `n,k,factor,rate_hz`.
pub fn write_rate_csv(path: &Path, rows: &[RateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "k", "factor", "rate_hz"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.factor.to_string(),
            r.rate_hz.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speedup_factors() {
        assert_eq!(speedup_factor(3, 1), 4);
        assert_eq!(speedup_factor(3, 2), 10);
        assert_eq!(speedup_factor(3, 3), 20);
        assert_eq!(speedup_factor(3, 4), 35);
        assert_eq!(speedup_factor(5, 0), 1);
        assert_eq!(speedup_factor(5, 2), 21);
        assert_eq!(speedup_factor(30, 30), 118264581564861424);
    }

    fn params() -> RateParams {
        RateParams {
            rep_rate_hz: 76e6,
            eta_source: 0.8,
            eta_interferometer: 0.9,
            eta_detector: 0.9,
            demux_duty: 1.0 / 7.0,
        }
    }

    #[test]
    fn k_zero_reduces_to_survival_power() {
        let p = params();
        let r = projected_rate(&p, 4, 0);
        let expected = p.attempt_rate_hz() * p.eta().powi(4);
        assert!((r - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn rate_ratio_identity() {
        let p = params();
        for n in [3usize, 10, 50] {
            for k in 1..=5usize {
                let ratio = projected_rate(&p, n, k) / projected_rate(&p, n, 0);
                let expected = speedup_factor(n, k) as f64 * (1.0 - p.eta()).powi(k as i32);
                assert!(
                    (ratio - expected).abs() <= 1e-12 * expected,
                    "ratio mismatch at n={n}, k={k}"
                );
            }
        }
    }

    #[test]
    fn fifty_photon_rate_grows_with_k() {
        let p = params();
        assert!((p.eta() - 0.648).abs() < 1e-12);
        let mut last = projected_rate(&p, 50, 0);
        for k in 1..=5 {
            let r = projected_rate(&p, 50, k);
            assert!(r > last, "rate must increase with k at n=50: k={k}");
            last = r;
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params();
        p.eta_detector = 0.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.rep_rate_hz = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rate_csv_written() {
        let p = params();
        let rows = rate_table(&p, 3, 4);
        assert_eq!(rows.len(), 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.csv");
        write_rate_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,k,factor,rate_hz"));
        assert_eq!(text.lines().count(), 6);
    }
}
