//! Gateway configuration: file locations, listen address and the engine
//! tunables. Loaded from the JSON file named by `TUTOR_CONFIG`, then
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tutor_core::kb::load_course_with;
use tutor_core::learner::Questionnaire;
use tutor_core::{CourseGraph, TutorConfig};

use crate::error::GatewayError;

pub const CONFIG_ENV: &str = "TUTOR_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub course: PathBuf,
    pub profiler: PathBuf,
    pub data_dir: PathBuf,
    pub listen: String,
    /// Flush every log append to disk before acknowledging it.
    pub fsync: bool,
    /// Root of every session seed the gateway hands out.
    pub seed: u64,
    pub tutor: TutorConfig,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            course: PathBuf::from("course.json"),
            profiler: PathBuf::from("profiler.json"),
            data_dir: PathBuf::from("data"),
            listen: "127.0.0.1:8080".into(),
            fsync: true,
            seed: 0,
            tutor: TutorConfig::default(),
        }
    }
}

impl GatewayConfig {
    pub fn from_file(path: &Path) -> Result<Self, GatewayError> {
        let bytes = std::fs::read(path)
            .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))
    }

    /// The file named by `TUTOR_CONFIG`, or the defaults when unset.
    pub fn from_env() -> Result<Self, GatewayError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => Self::from_file(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }

    pub fn load_course(&self) -> Result<CourseGraph, GatewayError> {
        let bytes = std::fs::read(&self.course)
            .map_err(|e| GatewayError::Config(format!("{}: {e}", self.course.display())))?;
        Ok(load_course_with(&bytes, self.tutor.validation_rules())?)
    }

    pub fn load_profiler(&self) -> Result<Questionnaire, GatewayError> {
        let bytes = std::fs::read(&self.profiler)
            .map_err(|e| GatewayError::Config(format!("{}: {e}", self.profiler.display())))?;
        Ok(Questionnaire::from_json(&bytes)?)
    }
}
