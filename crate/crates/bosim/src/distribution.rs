//! Exact output probability tables for every sampler model: standard,
//! lossy (source / detector / both), distinguishable-photon, and uniform.
//!
//! All experiment-facing tables are post-selected onto the no-collision
//! detected patterns and renormalized over that support, so uniform
//! prefactors such as 1/|S| drop out.

use std::path::Path;


use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossProfile;
use crate::patterns::{
    enumerate_multisets, enumerate_no_collision, lost_port_completions, InputPattern,
    OutputPattern,
};
use crate::permanent::{perm_ryser, submatrix};
use crate::interferometer::UnitaryMatrix;

/// How collision modes inside lost-photon completions are normalized.
///
/// `Literal` weights every completion term by just the efficiency product.
/// `Physical` additionally divides each term by the factorial of each lost
/// port's added multiplicity, which makes detector-side loss exactly
/// equivalent to source-side loss under uniform efficiencies. The two modes
/// coincide whenever at most one photon is lost after the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionNorm {
    Literal,
    #[default]
    Physical,
}

/// Normalized (or raw, see `normalized`) probability table over an ordered
/// pattern support.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    m: usize,
    photon_count: usize,
    support: Vec<OutputPattern>,
    probs: Vec<f64>,
    normalized: bool,
}

impl Distribution {
    fn from_weights(
        m: usize,
        photon_count: usize,
        support: Vec<OutputPattern>,
        weights: Vec<f64>,
        renormalize: bool,
    ) -> Result<Self> {
        debug_assert_eq!(support.len(), weights.len());
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidParameter(
                "probability weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if renormalize {
            if total <= 0.0 {
                return Err(Error::InvalidParameter(
                    "cannot normalize an all-zero table".into(),
                ));
            }
            let probs = weights.iter().map(|w| w / total).collect();
            Ok(Self { m, photon_count, support, probs, normalized: true })
        } else {
            let normalized = (total - 1.0).abs() <= 1e-12;
            Ok(Self { m, photon_count, support, probs: weights, normalized })
        }
    }

    /// Assemble a table from already-computed parts. The support must be
    /// strictly ascending and the probabilities nonnegative; when
    /// `normalized` is set the sum must be 1 within 1e-12.
    pub(crate) fn from_parts(
        m: usize,
        photon_count: usize,
        support: Vec<OutputPattern>,
        probs: Vec<f64>,
        normalized: bool,
    ) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::LengthMismatch(format!(
                "{} patterns vs {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidPattern(
                "support must be strictly ascending".into(),
            ));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        if normalized {
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized);
            }
        }
        Ok(Self { m, photon_count, support, probs, normalized })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn photon_count(&self) -> usize {
        self.photon_count
    }

    pub fn support(&self) -> &[OutputPattern] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Index of a pattern within the support.
    pub fn index_of(&self, pattern: &OutputPattern) -> Option<usize> {
        self.support.binary_search(pattern).ok()
    }

    pub fn prob(&self, pattern: &OutputPattern) -> Option<f64> {
        self.index_of(pattern).map(|i| self.probs[i])
    }

    /// Total variation distance D = (1/2) sum_i |q_i - p_i|.
    pub fn tvd(&self, other: &Self) -> Result<f64> {
        if self.support != other.support {
            return Err(Error::SupportMismatch);
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }

    /// Similarity F = sum_i sqrt(q_i p_i).
    pub fn similarity(&self, other: &Self) -> Result<f64> {
        if self.support != other.support {
            return Err(Error::SupportMismatch);
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| (p * q).sqrt())
            .sum())
    }
}

fn check_ports_in_range(max_port: usize, m: usize) -> Result<()> {
    if max_port > m {
        return Err(Error::IndexOutOfRange {
            what: "mode",
            index: max_port,
            size: m,
        });
    }
    Ok(())
}

/// |Perm(U[S, T])|^2
fn perm_sq(u: &UnitaryMatrix, s: &InputPattern, t: &OutputPattern) -> Result<f64> {
    let a = submatrix(u.matrix(), s, t)?;
    Ok(perm_ryser(&a)?.norm_sqr())
}

/// Perm(|U[S, T]|^2), the distinguishable-photon weight.
fn perm_abs_sq(u: &UnitaryMatrix, s: &InputPattern, t: &OutputPattern) -> Result<f64> {
    let a = submatrix(u.matrix(), s, t)?.abs_sq();
    Ok(perm_ryser(&a)?.re)
}

/// Factorial correction for a completion relative to the detected pattern:
/// the product of lambda! over the multiplicities lambda of the added ports.
fn added_multiplicity_factorial(completion: &OutputPattern, detected: &OutputPattern) -> f64 {
    let mut fact = 1.0;
    for (port, mu) in completion.multiplicities() {
        let lambda = mu - detected.multiplicity(port);
        fact *= (1..=lambda).map(|x| x as f64).product::<f64>();
    }
    fact
}

fn build_over_no_collision<F>(m: usize, n: usize, weight_of: F) -> Result<Distribution>
where
    F: Fn(&OutputPattern) -> Result<f64> + Sync,
{
    let support: Vec<OutputPattern> = enumerate_no_collision(m, n)?
        .into_iter()
        .map(|p| p.to_output_pattern())
        .collect();
    let weights: Vec<f64> = support
        .par_iter()
        .map(|t| weight_of(t))
        .collect::<Result<_>>()?;
    Distribution::from_weights(m, n, support, weights, true)
}

/// Ideal n-photon distribution for input pattern `s`.
///
/// With `no_collision_only` the table is post-selected and renormalized over
/// the C(m, n) no-collision patterns. Otherwise it spans all multisets with
/// p(T) = |Perm(U[S, T])|^2 / prod_j t_j! and is left unnormalized (the sum
/// equals 1 up to floating error when U is unitary).
pub fn standard_distribution(
    u: &UnitaryMatrix,
    s: &InputPattern,
    no_collision_only: bool,
) -> Result<Distribution> {
    let m = u.dim();
    let n = s.len();
    check_ports_in_range(s.max_port(), m)?;
    if n > m {
        return Err(Error::PhotonCount(format!("{n} photons exceed {m} modes")));
    }
    if no_collision_only {
        build_over_no_collision(m, n, |t| perm_sq(u, s, t))
    } else {
        let support = enumerate_multisets(m, n)?;
        let weights: Vec<f64> = support
            .par_iter()
            .map(|t| Ok(perm_sq(u, s, t)? / t.multiplicity_factorial()))
            .collect::<Result<_>>()?;
        Distribution::from_weights(m, n, support, weights, false)
    }
}

/// Photons lost before the network: n + k enter at `inputs`, n are detected.
/// p(T) is the input-weighted sum over all size-n sub-patterns of `inputs`,
/// renormalized over the no-collision detected support.
pub fn lossy_source_distribution(
    u: &UnitaryMatrix,
    inputs: &InputPattern,
    detect: usize,
    profile: &LossProfile,
) -> Result<Distribution> {
    let m = u.dim();
    check_ports_in_range(inputs.max_port(), m)?;
    if detect > inputs.len() || detect == 0 {
        return Err(Error::PhotonCount(format!(
            "cannot detect {detect} of {} input photons",
            inputs.len()
        )));
    }
    let subs = inputs.sub_patterns(detect);
    let weighted: Vec<(f64, InputPattern)> = subs
        .into_iter()
        .map(|s| Ok((profile.input_weight(&s)?, s)))
        .collect::<Result<_>>()?;
    build_over_no_collision(m, detect, |t| {
        let mut total = 0.0;
        for (w, s) in &weighted {
            total += w * perm_sq(u, s, t)?;
        }
        Ok(total)
    })
}

/// Photons lost after the network: all of `s` traverse it, detect = |s| - k
/// are registered. p(T) sums the output-weighted permanents over every
/// lost-port completion of T, with `mode` fixing the collision normalization.
pub fn lossy_detector_distribution(
    u: &UnitaryMatrix,
    s: &InputPattern,
    detect: usize,
    profile: &LossProfile,
    mode: CollisionNorm,
) -> Result<Distribution> {
    let m = u.dim();
    check_ports_in_range(s.max_port(), m)?;
    if detect > s.len() || detect == 0 {
        return Err(Error::PhotonCount(format!(
            "cannot detect {detect} of {} photons",
            s.len()
        )));
    }
    let k = s.len() - detect;
    build_over_no_collision(m, detect, |t| {
        let mut total = 0.0;
        for completion in lost_port_completions(t, m, k)? {
            let mut term = profile.output_weight(&completion)? * perm_sq(u, s, &completion)?;
            if mode == CollisionNorm::Physical {
                term /= added_multiplicity_factorial(&completion, t);
            }
            total += term;
        }
        Ok(total)
    })
}

/// Loss on both sides: k1 photons lost before the network, k2 after.
pub fn lossy_both_distribution(
    u: &UnitaryMatrix,
    inputs: &InputPattern,
    k1: usize,
    k2: usize,
    profile: &LossProfile,
    mode: CollisionNorm,
) -> Result<Distribution> {
    let m = u.dim();
    check_ports_in_range(inputs.max_port(), m)?;
    let n_in = inputs.len();
    if k1 + k2 >= n_in {
        return Err(Error::InconsistentLoss(format!(
            "k1 + k2 = {} photons lost leaves nothing of {n_in} to detect",
            k1 + k2
        )));
    }
    let detect = n_in - k1 - k2;
    let traversing = n_in - k1;
    let subs = inputs.sub_patterns(traversing);
    let weighted: Vec<(f64, InputPattern)> = subs
        .into_iter()
        .map(|s| Ok((profile.input_weight(&s)?, s)))
        .collect::<Result<_>>()?;
    build_over_no_collision(m, detect, |t| {
        let mut total = 0.0;
        for completion in lost_port_completions(t, m, k2)? {
            let mut w_out = profile.output_weight(&completion)?;
            if mode == CollisionNorm::Physical {
                w_out /= added_multiplicity_factorial(&completion, t);
            }
            for (w_in, s) in &weighted {
                total += w_in * w_out * perm_sq(u, s, &completion)?;
            }
        }
        Ok(total)
    })
}

/// Fully distinguishable photons with source-side loss: the permanent of the
/// entrywise |.|^2 submatrix replaces |Perm|^2.
pub fn distinguishable_distribution(
    u: &UnitaryMatrix,
    inputs: &InputPattern,
    detect: usize,
    profile: &LossProfile,
) -> Result<Distribution> {
    let m = u.dim();
    check_ports_in_range(inputs.max_port(), m)?;
    if detect > inputs.len() || detect == 0 {
        return Err(Error::PhotonCount(format!(
            "cannot detect {detect} of {} input photons",
            inputs.len()
        )));
    }
    let subs = inputs.sub_patterns(detect);
    let weighted: Vec<(f64, InputPattern)> = subs
        .into_iter()
        .map(|s| Ok((profile.input_weight(&s)?, s)))
        .collect::<Result<_>>()?;
    build_over_no_collision(m, detect, |t| {
        let mut total = 0.0;
        for (w, s) in &weighted {
            total += w * perm_abs_sq(u, s, t)?;
        }
        Ok(total)
    })
}

/// Equal weight on every no-collision pattern.
pub fn uniform_distribution(m: usize, n: usize) -> Result<Distribution> {
    let support: Vec<OutputPattern> = enumerate_no_collision(m, n)?
        .into_iter()
        .map(|p| p.to_output_pattern())
        .collect();
    let w = 1.0 / support.len() as f64;
    let probs = vec![w; support.len()];
    Ok(Distribution {
        m,
        photon_count: n,
        support,
        probs,
        normalized: true,
    })
}

/// Sidecar describing how a distribution table was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionMeta {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub mode: String,
    pub seed: Option<u64>,
    pub loss_profile_hash: Option<String>,
}

/// Write `pattern,probability` rows in support order.
pub fn write_distribution_csv(path: &Path, dist: &Distribution) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["pattern", "probability"])?;
    for (pat, p) in dist.support().iter().zip(dist.probs()) {
        w.write_record([pat.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_distribution_csv(path: &Path) -> Result<Distribution> {
    let mut r = csv::Reader::from_path(path)?;
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for record in r.records() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "expected 2 columns, got {}",
                record.len()
            )));
        }
        let pat: OutputPattern = record[0].parse()?;
        let p: f64 = record[1]
            .parse()
            .map_err(|e| Error::Parse(format!("bad probability {:?}: {e}", &record[1])))?;
        support.push(pat);
        probs.push(p);
    }
    if support.is_empty() {
        return Err(Error::Parse("empty distribution file".into()));
    }
    if !support.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Parse(
            "distribution support must be strictly ascending".into(),
        ));
    }
    let m = support.iter().map(|p| p.max_port()).max().unwrap_or(0);
    let n = support[0].len();
    if support.iter().any(|p| p.len() != n) {
        return Err(Error::Parse("mixed photon counts in support".into()));
    }
    let total: f64 = probs.iter().sum();
    let normalized = (total - 1.0).abs() <= 1e-9;
    Ok(Distribution {
        m,
        photon_count: n,
        support,
        probs,
        normalized,
    })
}

pub fn write_distribution_meta(path: &Path, meta: &DistributionMeta) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}
