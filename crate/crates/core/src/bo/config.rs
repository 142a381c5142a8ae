//! Run configuration, read from TOML.

use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionConfig;
use crate::error::{Error, Result};
use crate::gp::KernelFamily;

/// The metamodel refitted at every iteration. Coordinate lists are
/// one-based in files and zero-based in memory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurrogateSpec {
    /// Anisotropic GP on some coordinates (all of them when absent).
    Plain {
        #[serde(default, with = "one_based_opt")]
        coords: Option<Vec<usize>>,
    },
    /// Additive GP; the active set is fixed or reselected from the data.
    Additive {
        #[serde(default, with = "one_based_opt")]
        active: Option<Vec<usize>>,
    },
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec::Additive { active: None }
    }
}

/// Where the initial Latin hypercube is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoeSpace {
    /// Covering box of the coordinates, mapped back through pre-images.
    #[default]
    Coordinates,
    /// Box of the design parameters.
    Design,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoSettings {
    pub n0: usize,
    pub iterations: usize,
    /// Taken from the top-level seed of a [`RunConfig`].
    #[serde(skip)]
    pub seed: u64,
    pub kernel: KernelFamily,
    pub surrogate: SurrogateSpec,
    pub acquisition: AcquisitionConfig,
    pub replication: bool,
    /// Reselect the active set every this many iterations.
    pub selection_every: usize,
    pub doe: DoeSpace,
    pub fit_starts: usize,
}

impl Default for BoSettings {
    fn default() -> Self {
        Self {
            n0: 20,
            iterations: 80,
            seed: 0,
            kernel: KernelFamily::Matern52,
            surrogate: SurrogateSpec::default(),
            acquisition: AcquisitionConfig::default(),
            replication: true,
            selection_every: 1,
            doe: DoeSpace::Coordinates,
            fit_starts: 5,
        }
    }
}

impl BoSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n0 < 2 {
            return Err(Error::InvalidArgument(format!("n0 must be at least 2, got {}", self.n0)));
        }
        if self.selection_every == 0 || self.fit_starts == 0 {
            return Err(Error::InvalidArgument("selection_every and fit_starts must be positive".into()));
        }
        self.acquisition.validate()
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    /// chi, sdf or contour; the family default when absent.
    #[serde(default)]
    pub mapping: Option<String>,
    /// Database size.
    #[serde(default = "default_database_size")]
    pub database_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub runs: Option<usize>,
    #[serde(flatten)]
    pub settings: BoSettings,
}

fn default_database_size() -> usize {
    5000
}

#[derive(Deserialize)]
struct SeedCheck {
    seed: Option<toml::Value>,
}

impl RunConfig {
    /// Parses a config; the top-level seed is mandatory.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let check: SeedCheck = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if check.seed.is_none() {
            return Err(Error::Parse("config is missing the mandatory 'seed'".into()));
        }
        let mut cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.settings.seed = cfg.seed;
        cfg.settings.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

mod one_based_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<usize>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.iter().map(|i| i + 1).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<usize>>, D::Error> {
        let v: Option<Vec<usize>> = Option::deserialize(d)?;
        match v {
            Some(v) if v.contains(&0) => Err(serde::de::Error::custom("coordinates are numbered from 1")),
            Some(mut v) => {
                v.iter_mut().for_each(|i| *i -= 1);
                v.sort_unstable();
                v.dedup();
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }
}
