//! Statistical tests that discriminate genuine (lossy) boson-sampler logs
//! from distinguishable-photon and uniform samplers.
//!
//! Both tests fold a per-event estimator into an integer counter; the sign
//! of the final counter is the verdict. Estimator tables are precomputed
//! over the no-collision support, so a run is deterministic in the log.

use std::path::Path;

use serde::Serialize;

use crate::distribution::{distinguishable_distribution, lossy_source_distribution};
use crate::error::{Error, Result};
use crate::interferometer::UnitaryMatrix;
use crate::loss::LossProfile;
use crate::patterns::{enumerate_no_collision, InputPattern, OutputPattern};
use crate::permanent::submatrix;
use crate::sampler::EventLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Lr,
    Rne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Boson,
    Distinguishable,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TestParams {
    Lr { a1: f64, a2: f64 },
    Rne { threshold: f64 },
}

/// Counter value after each event, with the test's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterTrace {
    pub test: TestKind,
    pub values: Vec<i64>,
    pub params: TestParams,
}

impl CounterTrace {
    pub fn final_value(&self) -> i64 {
        self.values.last().copied().unwrap_or(0)
    }

    /// A nonnegative final counter decides for the boson-sampler hypothesis;
    /// a negative one for the test's alternative.
    pub fn verdict(&self) -> Verdict {
        if self.final_value() >= 0 {
            Verdict::Boson
        } else {
            match self.test {
                TestKind::Lr => Verdict::Distinguishable,
                TestKind::Rne => Verdict::Uniform,
            }
        }
    }
}

fn check_log_geometry(log: &EventLog, u: &UnitaryMatrix, detect: usize) -> Result<()> {
    if log.photon_count != detect {
        return Err(Error::PhotonCount(format!(
            "log holds {}-photon events, test expects {detect}",
            log.photon_count
        )));
    }
    if log.m != u.dim() {
        return Err(Error::LengthMismatch(format!(
            "log declares {} modes, unitary has {}",
            log.m,
            u.dim()
        )));
    }
    Ok(())
}

/// Counter update for one likelihood ratio, following the printed case order:
/// unchanged, +1, +2, -1, -2. Boundaries compare as written, so an exact tie
/// resolves to the first matching case.
fn lr_step(ratio: f64, a1: f64, a2: f64) -> i64 {
    if a1 < ratio && ratio < 1.0 / a1 {
        0
    } else if 1.0 / a1 <= ratio && ratio < a2 {
        1
    } else if ratio >= a2 {
        2
    } else if 1.0 / a2 <= ratio && ratio < a1 {
        -1
    } else {
        -2
    }
}

/// Same case order with the comparison done on logs; used for n > 6 where
/// the per-event probabilities may be too small to divide safely.
fn lr_step_log(log_ratio: f64, a1: f64, a2: f64) -> i64 {
    let (la1, la2) = (a1.ln(), a2.ln());
    if la1 < log_ratio && log_ratio < -la1 {
        0
    } else if -la1 <= log_ratio && log_ratio < la2 {
        1
    } else if log_ratio >= la2 {
        2
    } else if -la2 <= log_ratio && log_ratio < la1 {
        -1
    } else {
        -2
    }
}

/// Extended likelihood ratio test against the distinguishable-photon
/// hypothesis. Per event the estimator is the ratio of the two post-selected
/// probabilities (indistinguishable over distinguishable), built from the
/// same lossy input-combination sums as the distribution module —
/// efficiency-weighted when a profile is given, unweighted otherwise.
pub fn lr_test(
    log: &EventLog,
    u: &UnitaryMatrix,
    inputs: &InputPattern,
    detect: usize,
    profile: Option<&LossProfile>,
    a1: f64,
    a2: f64,
) -> Result<CounterTrace> {
    if !(0.0 < a1 && a1 < 1.0 && a2 > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "thresholds need 0 < a1 < 1 < a2, got a1={a1}, a2={a2}"
        )));
    }
    check_log_geometry(log, u, detect)?;
    let lossless;
    let profile = match profile {
        Some(p) => p,
        None => {
            lossless = LossProfile::lossless(u.dim());
            &lossless
        }
    };
    let p_indis = lossy_source_distribution(u, inputs, detect, profile)?;
    let p_dis = distinguishable_distribution(u, inputs, detect, profile)?;

    let use_logs = detect > 6;
    let mut counter = 0i64;
    let mut values = Vec::with_capacity(log.len());
    for ev in &log.events {
        let i = p_indis
            .index_of(ev)
            .ok_or_else(|| Error::EventOutsideSupport(ev.to_string()))?;
        counter += if use_logs {
            lr_step_log(p_indis.probs()[i].ln() - p_dis.probs()[i].ln(), a1, a2)
        } else {
            lr_step(p_indis.probs()[i] / p_dis.probs()[i], a1, a2)
        };
        values.push(counter);
    }
    Ok(CounterTrace {
        test: TestKind::Lr,
        values,
        params: TestParams::Lr { a1, a2 },
    })
}

/// Row-norm estimator table: for each no-collision pattern T, the weighted
/// mean over input combinations S of prod_{t in T} sum_{s in S} |U[s, t]|^2.
/// Returned as log values.
fn rne_log_table(
    u: &UnitaryMatrix,
    inputs: &InputPattern,
    detect: usize,
    profile: Option<&LossProfile>,
    support: &[OutputPattern],
) -> Result<Vec<f64>> {
    let subs = inputs.sub_patterns(detect);
    let weights: Vec<f64> = match profile {
        Some(p) => subs
            .iter()
            .map(|s| p.input_weight(s))
            .collect::<Result<_>>()?,
        None => vec![1.0; subs.len()],
    };
    let total_weight: f64 = weights.iter().sum();
    let mut table = Vec::with_capacity(support.len());
    for t in support {
        // log-sum-exp over subsets of (ln w + sum_t ln column mass)
        let mut log_terms = Vec::with_capacity(subs.len());
        for (s, w) in subs.iter().zip(&weights) {
            let a = submatrix(u.matrix(), s, t)?;
            let mut log_prod = 0.0;
            for j in 0..a.cols() {
                let col_mass: f64 = (0..a.rows()).map(|i| a.get(i, j).norm_sqr()).sum();
                log_prod += col_mass.ln();
            }
            log_terms.push(w.ln() + log_prod);
        }
        let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_terms.iter().map(|&l| (l - max).exp()).sum();
        table.push(max + sum.ln() - total_weight.ln());
    }
    Ok(table)
}

/// Extended row-norm estimator test against the uniform-sampler hypothesis.
/// The counter gains one whenever the event's estimator exceeds (n/m)^n and
/// loses one otherwise; comparisons are done on logs.
///
/// When n = m the support is a single pattern with estimator exactly at the
/// threshold 1, so the counter decreases on every event.
pub fn rne_test(
    log: &EventLog,
    u: &UnitaryMatrix,
    inputs: &InputPattern,
    detect: usize,
    profile: Option<&LossProfile>,
) -> Result<CounterTrace> {
    check_log_geometry(log, u, detect)?;
    if detect == 0 || detect > inputs.len() {
        return Err(Error::PhotonCount(format!(
            "cannot detect {detect} of {} input photons",
            inputs.len()
        )));
    }
    let m = u.dim();
    let n = detect;
    let support: Vec<OutputPattern> = enumerate_no_collision(m, n)?
        .into_iter()
        .map(|p| p.to_output_pattern())
        .collect();
    let table = rne_log_table(u, inputs, detect, profile, &support)?;
    let log_threshold = n as f64 * (n as f64 / m as f64).ln();

    let mut counter = 0i64;
    let mut values = Vec::with_capacity(log.len());
    for ev in &log.events {
        let i = support
            .binary_search(ev)
            .map_err(|_| Error::EventOutsideSupport(ev.to_string()))?;
        counter += if table[i] > log_threshold { 1 } else { -1 };
        values.push(counter);
    }
    Ok(CounterTrace {
        test: TestKind::Rne,
        values,
        params: TestParams::Rne {
            threshold: (n as f64 / m as f64).powi(n as i32),
        },
    })
}

/// CSV rows `event_index,counter`, 1-based indices.
pub fn write_trace_csv(path: &Path, trace: &CounterTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["event_index", "counter"])?;
    for (i, v) in trace.values.iter().enumerate() {
        w.write_record([(i + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    test: TestKind,
    final_counter: i64,
    verdict: Verdict,
    params: &'a TestParams,
}

pub fn write_verdict_json(path: &Path, trace: &CounterTrace) -> Result<()> {
    let file = VerdictFile {
        test: trace.test,
        final_counter: trace.final_value(),
        verdict: trace.verdict(),
        params: &trace.params,
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}
