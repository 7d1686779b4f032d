//! Synthetic event generation: inverse-CDF draws from a distribution and the
//! empirical table built back from an event log.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::patterns::OutputPattern;

/// RNG identifier recorded in logs so they are self-describing.
pub const RNG_NAME: &str = "chacha12";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceLabel {
    Boson,
    Distinguishable,
    Uniform,
    External,
}

/// Ordered sequence of detected patterns plus the metadata needed to
/// regenerate or audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub m: usize,
    pub photon_count: usize,
    pub events: Vec<OutputPattern>,
    pub seed: u64,
    pub source: SourceLabel,
    pub rng_name: String,
}

impl EventLog {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Draw `count` independent events by inverse CDF over the lexicographic
/// support. Deterministic for a fixed (distribution, count, seed).
pub fn sample(dist: &Distribution, count: usize, seed: u64, source: SourceLabel) -> Result<EventLog> {
    if !dist.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if count == 0 {
        return Err(Error::InvalidParameter("need at least one event".into()));
    }
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in dist.probs() {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let last = dist.len() - 1;
    let events = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            dist.support()[idx].clone()
        })
        .collect();
    Ok(EventLog {
        m: dist.m(),
        photon_count: dist.photon_count(),
        events,
        seed,
        source,
        rng_name: RNG_NAME.to_string(),
    })
}

/// Frequency table of the log over the support of `reference`; zero for
/// unseen patterns. Errors if any event falls outside the support.
pub fn empirical_distribution(log: &EventLog, reference: &Distribution) -> Result<Distribution> {
    if log.is_empty() {
        return Err(Error::InvalidParameter("empty event log".into()));
    }
    let mut counts = vec![0u64; reference.len()];
    for ev in &log.events {
        let idx = reference
            .index_of(ev)
            .ok_or_else(|| Error::EventOutsideSupport(ev.to_string()))?;
        counts[idx] += 1;
    }
    let n = log.len() as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    Distribution::from_parts(
        reference.m(),
        reference.photon_count(),
        reference.support().to_vec(),
        probs,
        true,
    )
}

#[derive(Serialize, Deserialize)]
struct LogHeader {
    m: usize,
    n: usize,
    seed: u64,
    source: SourceLabel,
    rng: String,
}

/// JSON Lines: a metadata object, then one ascending port array per event.
pub fn write_event_log(path: &Path, log: &EventLog) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let header = LogHeader {
        m: log.m,
        n: log.photon_count,
        seed: log.seed,
        source: log.source,
        rng: log.rng_name.clone(),
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    for ev in &log.events {
        writeln!(w, "{}", serde_json::to_string(ev.ports())?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_event_log(path: &Path) -> Result<EventLog> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Parse("event log is empty".into()))??;
    let header: LogHeader = serde_json::from_str(&header_line)?;
    let mut events = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ports: Vec<usize> = serde_json::from_str(&line)?;
        let pattern = OutputPattern::new(ports)?;
        if pattern.len() != header.n {
            return Err(Error::PhotonCount(format!(
                "event {pattern} has {} photons, log declares {}",
                pattern.len(),
                header.n
            )));
        }
        if pattern.max_port() > header.m {
            return Err(Error::IndexOutOfRange {
                what: "mode",
                index: pattern.max_port(),
                size: header.m,
            });
        }
        if pattern.has_collision() {
            return Err(Error::InvalidPattern(format!(
                "event {pattern} has a collision; logs hold no-collision events"
            )));
        }
        events.push(pattern);
    }
    if events.is_empty() {
        return Err(Error::Parse("event log has a header but no events".into()));
    }
    Ok(EventLog {
        m: header.m,
        photon_count: header.n,
        events,
        seed: header.seed,
        source: header.source,
        rng_name: header.rng,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::uniform_distribution;
    use crate::interferometer::haar_random;
    use crate::loss::LossProfile;
    use crate::patterns::InputPattern;

    #[test]
    fn point_mass_sampling() {
        let d = uniform_distribution(3, 3).unwrap(); // single pattern
        let log = sample(&d, 50, 1, SourceLabel::Uniform).unwrap();
        assert!(log.events.iter().all(|e| e.ports() == [1, 2, 3]));
    }

    #[test]
    fn deterministic_per_seed() {
        let d = uniform_distribution(6, 2).unwrap();
        let a = sample(&d, 200, 42, SourceLabel::Uniform).unwrap();
        let b = sample(&d, 200, 42, SourceLabel::Uniform).unwrap();
        let c = sample(&d, 200, 43, SourceLabel::Uniform).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_frequencies_within_binomial_bounds() {
        let d = uniform_distribution(16, 3).unwrap();
        let n = 56_000;
        let log = sample(&d, n, 7, SourceLabel::Uniform).unwrap();
        let emp = empirical_distribution(&log, &d).unwrap();
        let p = 1.0 / 560.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        for &q in emp.probs() {
            assert!(
                (q - p).abs() <= 5.0 * sigma,
                "frequency {q} outside 5 sigma of {p}"
            );
        }
    }

    #[test]
    fn empirical_converges_with_n() {
        let u = haar_random(8, 9).unwrap();
        let inputs = InputPattern::new(vec![1, 2, 3]).unwrap();
        let d = crate::distribution::lossy_source_distribution(
            &u,
            &inputs,
            2,
            &LossProfile::lossless(8),
        )
        .unwrap();
        let mut last = f64::INFINITY;
        for &n in &[1_000usize, 10_000, 100_000] {
            let log = sample(&d, n, 5, SourceLabel::Boson).unwrap();
            let emp = empirical_distribution(&log, &d).unwrap();
            let tvd = emp.tvd(&d).unwrap();
            assert!(tvd < last, "tvd {tvd} did not decrease (n = {n})");
            last = tvd;
        }
    }

    #[test]
    fn event_outside_support_errors() {
        let d = uniform_distribution(4, 2).unwrap();
        let log = EventLog {
            m: 6,
            photon_count: 2,
            events: vec![OutputPattern::new(vec![5, 6]).unwrap()],
            seed: 0,
            source: SourceLabel::External,
            rng_name: RNG_NAME.into(),
        };
        assert!(matches!(
            empirical_distribution(&log, &d),
            Err(Error::EventOutsideSupport(_))
        ));
    }

    #[test]
    fn log_file_roundtrip() {
        let d = uniform_distribution(5, 2).unwrap();
        let log = sample(&d, 100, 3, SourceLabel::Uniform).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        write_event_log(&path, &log).unwrap();
        let back = read_event_log(&path).unwrap();
        assert_eq!(log, back);
    }

    #[test]
    fn log_rejects_collision_events() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"m\":4,\"n\":2,\"seed\":0,\"source\":\"external\",\"rng\":\"chacha12\"}\n[1,1]\n",
        )
        .unwrap();
        assert!(read_event_log(&path).is_err());
    }
}
