//! Engine tunables. Every field has a default; deployments override them
//! through the gateway configuration file.

use serde::{Deserialize, Serialize};

use crate::assessment::{default_count, DifficultyBands};
use crate::kb::{MethodMatrix, ValidationRules, DEFAULT_MIN_QUESTIONS_PER_CELL};
use crate::learner::KnowledgeLevel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TutorConfig {
    /// Extra learning rounds after a failed post-test.
    pub max_repeats: u32,
    pub min_questions_per_cell: usize,
    /// Lowest post-test level that completes a concept.
    pub pass_level: KnowledgeLevel,
    /// Lowest pre-test level that skips a concept.
    pub skip_level: KnowledgeLevel,
    /// `None` means [`default_count`] of the concept's section count.
    pub pretest_count: Option<usize>,
    pub posttest_count: Option<usize>,
    pub difficulty_bands: DifficultyBands,
    pub method_matrix: MethodMatrix,
}

impl Default for TutorConfig {
    fn default() -> Self {
        Self {
            max_repeats: 2,
            min_questions_per_cell: DEFAULT_MIN_QUESTIONS_PER_CELL,
            pass_level: KnowledgeLevel::Good,
            skip_level: KnowledgeLevel::Excellent,
            pretest_count: None,
            posttest_count: None,
            difficulty_bands: DifficultyBands::default(),
            method_matrix: MethodMatrix::default(),
        }
    }
}

impl TutorConfig {
    pub fn validation_rules(&self) -> ValidationRules {
        ValidationRules {
            min_questions_per_cell: self.min_questions_per_cell,
        }
    }

    pub fn pretest_count(&self, sections: usize) -> usize {
        self.pretest_count.unwrap_or_else(|| default_count(sections)).max(sections)
    }

    pub fn posttest_count(&self, sections: usize) -> usize {
        self.posttest_count.unwrap_or_else(|| default_count(sections)).max(sections)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.difficulty_bands.validate()?;
        if self.pretest_count == Some(0) || self.posttest_count == Some(0) {
            return Err("test counts must be positive".into());
        }
        if self.pass_level > self.skip_level {
            return Err("pass_level must not exceed skip_level".into());
        }
        Ok(())
    }
}
