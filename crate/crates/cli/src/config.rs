//! Experiment configuration: a JSON document, overridden by flags.

use std::path::{Path, PathBuf};

use gffmax_core::extremes::Tolerances;
use gffmax_core::DEFAULT_DENSE_CAP;
use serde::{Deserialize, Serialize};

use crate::exit::Failure;

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub inequality: Option<f64>,
    pub point: Option<f64>,
}

/// Every field is optional in the file.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_min: Option<u32>,
    pub n_max: Option<u32>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub dense_cutoff: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    /// Increment threshold `K` of the subsequence detector.
    pub threshold: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::missing(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n_min: u32,
    pub n_max: u32,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub dense_cutoff: usize,
    pub out: PathBuf,
    pub tolerances: Tolerances,
    pub threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 6,
            samples: 10_000,
            seed: 1,
            workers: 1,
            dense_cutoff: DEFAULT_DENSE_CAP,
            out: PathBuf::from("gffmax-out"),
            tolerances: Tolerances::default(),
            threshold: 2.0,
        }
    }
}

impl ExperimentConfig {
    /// Defaults, then the file, then `flags`.
    pub fn resolve(file: Option<&ConfigFile>, flags: &ConfigFile) -> Result<Self, Failure> {
        let mut c = Self::default();
        for layer in file.into_iter().chain(std::iter::once(flags)) {
            c.n_min = layer.n_min.unwrap_or(c.n_min);
            c.n_max = layer.n_max.unwrap_or(c.n_max);
            c.samples = layer.samples.unwrap_or(c.samples);
            c.seed = layer.seed.unwrap_or(c.seed);
            c.workers = layer.workers.unwrap_or(c.workers);
            c.dense_cutoff = layer.dense_cutoff.unwrap_or(c.dense_cutoff);
            if let Some(out) = &layer.out {
                c.out = out.clone();
            }
            c.tolerances.inequality = layer.tolerances.inequality.unwrap_or(c.tolerances.inequality);
            c.tolerances.point = layer.tolerances.point.unwrap_or(c.tolerances.point);
            c.threshold = layer.threshold.unwrap_or(c.threshold);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |msg: String| Err(Failure::usage(msg));
        if self.n_min < 1 {
            return bad("n_min must be at least 1".into());
        }
        if self.n_max < self.n_min {
            return bad(format!("n_max {} is below n_min {}", self.n_max, self.n_min));
        }
        if self.n_max > gffmax_core::lattice::MAX_LEVEL {
            return bad(format!(
                "n_max {} exceeds {}",
                self.n_max,
                gffmax_core::lattice::MAX_LEVEL
            ));
        }
        if self.samples < gffmax_core::extremes::MIN_SAMPLES {
            return bad(format!(
                "samples must be at least {}, got {}",
                gffmax_core::extremes::MIN_SAMPLES,
                self.samples
            ));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        let t = self.tolerances;
        for (name, v) in [("inequality", t.inequality), ("point", t.point), ("threshold", self.threshold)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} tolerance must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"n_min": 2, "n_max": 5, "samples": 500, "tolerances": {"point": 4.0}}"#).unwrap();
        let flags = ConfigFile {
            samples: Some(200),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(Some(&file), &flags).unwrap();
        assert_eq!((c.n_min, c.n_max, c.samples), (2, 5, 200));
        assert_eq!(c.tolerances.point, 4.0);
        assert_eq!(c.tolerances.inequality, 2.0);
    }

    #[test]
    fn invariants_are_checked() {
        let flags = |f: ConfigFile| ExperimentConfig::resolve(None, &f);
        assert!(flags(ConfigFile { n_min: Some(0), ..Default::default() }).is_err());
        assert!(flags(ConfigFile { samples: Some(99), ..Default::default() }).is_err());
        assert!(flags(ConfigFile { n_min: Some(4), n_max: Some(3), ..Default::default() }).is_err());
        let negative = ConfigFile {
            tolerances: ToleranceOverrides { inequality: Some(-1.0), point: None },
            ..Default::default()
        };
        assert!(flags(negative).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"levels": 3}"#).is_err());
    }
}
