//! Experiment configuration: a TOML file whose every field can be overridden
//! from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use bosim::distribution::CollisionNorm;
use bosim::{haar_random, InputPattern, LossProfile, UnitaryMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Boson,
    Distinguishable,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossLocation {
    Source,
    Detector,
    Both,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitarySection {
    /// "haar" (default) or "file".
    pub source: Option<String>,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    pub location: Option<LossLocation>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    /// Uniform per-port input efficiency; ignored when profile_path is set.
    pub input_eff: Option<f64>,
    pub output_eff: Option<f64>,
    pub profile_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub events: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub a1: Option<f64>,
    pub a2: Option<f64>,
}

/// Raw configuration file contents.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub m: Option<usize>,
    pub inputs: Option<Vec<usize>>,
    pub detect: Option<usize>,
    pub model: Option<Model>,
    pub collision_norm: Option<String>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub unitary: UnitarySection,
    #[serde(default)]
    pub loss: LossSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub validate: ValidateSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(cfg)
    }
}

/// Command-line overrides shared by the experiment commands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Mode count of the interferometer.
    #[arg(long)]
    pub m: Option<usize>,
    /// Occupied input ports, e.g. "1,2,3,4".
    #[arg(long, value_delimiter = ',')]
    pub inputs: Option<Vec<usize>>,
    /// Detected photon number (post-selected coincidence order).
    #[arg(long)]
    pub detect: Option<usize>,
    /// Sampler model: boson | distinguishable | uniform.
    #[arg(long)]
    pub model: Option<String>,
    /// Collision normalization: physical | literal.
    #[arg(long)]
    pub collision_norm: Option<String>,
    /// Haar seed for the unitary.
    #[arg(long)]
    pub haar_seed: Option<u64>,
    /// Read the unitary from this matrix file instead of drawing it.
    #[arg(long)]
    pub unitary: Option<PathBuf>,
    /// Where photons are lost: source | detector | both.
    #[arg(long)]
    pub loss_location: Option<String>,
    /// Photons lost before the network (location = both).
    #[arg(long)]
    pub k1: Option<usize>,
    /// Photons lost after the network (location = both).
    #[arg(long)]
    pub k2: Option<usize>,
    /// Uniform input efficiency in (0, 1].
    #[arg(long)]
    pub input_eff: Option<f64>,
    /// Uniform output efficiency in (0, 1].
    #[arg(long)]
    pub output_eff: Option<f64>,
    /// Per-port loss profile file.
    #[arg(long)]
    pub loss_profile: Option<PathBuf>,
    /// Number of events to sample.
    #[arg(long)]
    pub events: Option<usize>,
    /// Lower likelihood-ratio threshold.
    #[arg(long)]
    pub a1: Option<f64>,
    /// Upper likelihood-ratio threshold.
    #[arg(long)]
    pub a2: Option<f64>,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub m: usize,
    pub inputs: InputPattern,
    pub detect: usize,
    pub model: Model,
    pub collision_norm: CollisionNorm,
    pub unitary_source: UnitarySource,
    pub loss_location: LossLocation,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub profile: LossProfile,
    pub profile_from_file: bool,
    pub events: usize,
    pub sample_seed: u64,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone)]
pub enum UnitarySource {
    Haar { seed: u64 },
    File { path: PathBuf },
}

impl Experiment {
    /// Merge config file and overrides; check mutual consistency.
    pub fn resolve(file: &FileConfig, over: &Overrides, seed_flag: Option<u64>) -> Result<Self> {
        let m = over.m.or(file.m).context("mode count `m` not set")?;
        let input_ports = over
            .inputs
            .clone()
            .or_else(|| file.inputs.clone())
            .context("input ports not set")?;
        let inputs = InputPattern::new(input_ports).context("bad input ports")?;
        let detect = over.detect.or(file.detect).context("`detect` not set")?;

        let model = match &over.model {
            Some(s) => parse_model(s)?,
            None => file.model.unwrap_or(Model::Boson),
        };
        let collision_norm = match over
            .collision_norm
            .as_deref()
            .or(file.collision_norm.as_deref())
        {
            None => CollisionNorm::Physical,
            Some("physical") => CollisionNorm::Physical,
            Some("literal") => CollisionNorm::Literal,
            Some(other) => bail!("unknown collision_norm {other:?} (physical | literal)"),
        };

        let unitary_source = if let Some(path) = over.unitary.clone().or(file.unitary.path.clone())
        {
            if file.unitary.source.as_deref() == Some("haar") && over.unitary.is_none() {
                UnitarySource::Haar {
                    seed: over
                        .haar_seed
                        .or(seed_flag)
                        .or(file.unitary.seed)
                        .unwrap_or(0),
                }
            } else {
                UnitarySource::File { path }
            }
        } else {
            UnitarySource::Haar {
                seed: over
                    .haar_seed
                    .or(seed_flag)
                    .or(file.unitary.seed)
                    .unwrap_or(0),
            }
        };

        let loss_location = match over.loss_location.as_deref() {
            Some("source") => LossLocation::Source,
            Some("detector") => LossLocation::Detector,
            Some("both") => LossLocation::Both,
            Some(other) => bail!("unknown loss location {other:?} (source | detector | both)"),
            None => file.loss.location.unwrap_or(LossLocation::Source),
        };
        let k1 = over.k1.or(file.loss.k1);
        let k2 = over.k2.or(file.loss.k2);

        let profile_path = over.loss_profile.clone().or(file.loss.profile_path.clone());
        let (profile, profile_from_file) = match profile_path {
            Some(path) => (
                bosim::loss::read_profile(&path)
                    .with_context(|| format!("cannot read loss profile {}", path.display()))?,
                true,
            ),
            None => {
                let xi = over.input_eff.or(file.loss.input_eff).unwrap_or(1.0);
                let eps = over.output_eff.or(file.loss.output_eff).unwrap_or(1.0);
                (LossProfile::uniform(m, m, xi, eps)?, false)
            }
        };

        let events = over.events.or(file.sampling.events).unwrap_or(1000);
        let sample_seed = seed_flag.or(file.sampling.seed).unwrap_or(0);
        let a1 = over.a1.or(file.validate.a1).unwrap_or(0.9);
        let a2 = over.a2.or(file.validate.a2).unwrap_or(1.5);

        let exp = Self {
            m,
            inputs,
            detect,
            model,
            collision_norm,
            unitary_source,
            loss_location,
            k1,
            k2,
            profile,
            profile_from_file,
            events,
            sample_seed,
            a1,
            a2,
        };
        exp.check()?;
        Ok(exp)
    }

    fn check(&self) -> Result<()> {
        if self.detect == 0 {
            bail!("detect must be at least 1");
        }
        if self.detect > self.inputs.len() {
            bail!(
                "cannot detect {} photons from {} inputs",
                self.detect,
                self.inputs.len()
            );
        }
        if self.inputs.max_port() > self.m {
            bail!(
                "input port {} exceeds mode count {}",
                self.inputs.max_port(),
                self.m
            );
        }
        let k = self.lost();
        if self.loss_location == LossLocation::Both {
            let (k1, k2) = (
                self.k1.context("loss.k1 required for location = both")?,
                self.k2.context("loss.k2 required for location = both")?,
            );
            if k1 + k2 != k {
                bail!("k1 + k2 = {} but inputs - detect = {k}", k1 + k2);
            }
        }
        Ok(())
    }

    pub fn lost(&self) -> usize {
        self.inputs.len() - self.detect
    }

    pub fn haar_seed(&self) -> Option<u64> {
        match &self.unitary_source {
            UnitarySource::Haar { seed } => Some(*seed),
            UnitarySource::File { .. } => None,
        }
    }

    pub fn load_unitary(&self) -> Result<UnitaryMatrix> {
        match &self.unitary_source {
            UnitarySource::Haar { seed } => Ok(haar_random(self.m, *seed)?),
            UnitarySource::File { path } => {
                let raw = bosim::matrix::read_matrix(path)
                    .with_context(|| format!("cannot read unitary {}", path.display()))?;
                if raw.rows() != self.m {
                    bail!(
                        "unitary file is {}x{}, config says m = {}",
                        raw.rows(),
                        raw.cols(),
                        self.m
                    );
                }
                Ok(UnitaryMatrix::from_matrix(raw)?)
            }
        }
    }

    /// Human-readable model tag for metadata sidecars.
    pub fn mode_tag(&self) -> String {
        match self.model {
            Model::Uniform => "uniform".into(),
            Model::Distinguishable => "distinguishable".into(),
            Model::Boson => {
                if self.lost() == 0 {
                    "standard".into()
                } else {
                    let loc = match self.loss_location {
                        LossLocation::Source => "source",
                        LossLocation::Detector => "detector",
                        LossLocation::Both => "both",
                    };
                    let norm = match self.collision_norm {
                        CollisionNorm::Physical => "physical",
                        CollisionNorm::Literal => "literal",
                    };
                    match self.loss_location {
                        LossLocation::Source => format!("boson-{loc}"),
                        _ => format!("boson-{loc}-{norm}"),
                    }
                }
            }
        }
    }
}

fn parse_model(s: &str) -> Result<Model> {
    match s {
        "boson" => Ok(Model::Boson),
        "distinguishable" => Ok(Model::Distinguishable),
        "uniform" => Ok(Model::Uniform),
        other => bail!("unknown model {other:?} (boson | distinguishable | uniform)"),
    }
}
