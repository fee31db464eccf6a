//! Question bank, rule-based test planning and grading.
//!
//! A test plan for one concept obeys four rules:
//!
//! * no question the learner has ever been asked is reused;
//! * sections receive counts that differ by at most one, extra slots going
//!   to the most important sections first;
//! * difficulties come from the learner's band, and inside the band every
//!   available difficulty is used before any difficulty repeats;
//! * items are ordered round-robin across sections, easiest first within a
//!   section.
//!
//! The seed only decides which of several equally eligible questions is
//! taken; it never changes the per-section counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{ConceptId, QuestionId, SectionId};
use crate::kb::Concept;
use crate::learner::{KnowledgeLevel, LearnerLevel, LearnerModel, PhaseScore, Tally};
use crate::seed;

pub const DIFFICULTIES: [u8; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Conceptual,
    Objective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: QuestionId,
    pub concept_id: ConceptId,
    pub section_id: SectionId,
    pub difficulty: u8,
    pub points: u8,
    pub scope: Scope,
    pub prompt: String,
    pub choices: Vec<String>,
    pub correct: usize,
}

#[derive(Debug, Clone, Default)]
pub struct QuestionBank {
    questions: Vec<Question>,
    by_id: HashMap<QuestionId, usize>,
    by_cell: HashMap<(ConceptId, SectionId, u8), Vec<usize>>,
    by_concept: HashMap<ConceptId, Vec<usize>>,
}

impl QuestionBank {
    pub fn new(questions: Vec<Question>) -> Self {
        let mut bank = Self {
            questions,
            ..Self::default()
        };
        for (i, q) in bank.questions.iter().enumerate() {
            bank.by_id.entry(q.id.clone()).or_insert(i);
            bank.by_cell
                .entry((q.concept_id.clone(), q.section_id.clone(), q.difficulty))
                .or_default()
                .push(i);
            bank.by_concept.entry(q.concept_id.clone()).or_default().push(i);
        }
        bank
    }

    pub fn get(&self, id: &QuestionId) -> Option<&Question> {
        self.by_id.get(id).map(|&i| &self.questions[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Question> {
        self.questions.iter()
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn in_cell<'a>(
        &'a self,
        concept: &ConceptId,
        section: &SectionId,
        difficulty: u8,
    ) -> impl Iterator<Item = &'a Question> + 'a {
        self.by_cell
            .get(&(concept.clone(), section.clone(), difficulty))
            .into_iter()
            .flatten()
            .map(|&i| &self.questions[i])
    }

    pub fn of_concept<'a>(&'a self, concept: &ConceptId) -> impl Iterator<Item = &'a Question> + 'a {
        self.by_concept
            .get(concept)
            .into_iter()
            .flatten()
            .map(|&i| &self.questions[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    PreTest,
    PostTest,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Self::PreTest => "Pre-test",
            Self::PostTest => "Post-test",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Self::PreTest => 1,
            Self::PostTest => 2,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestPlan {
    pub phase: Phase,
    pub concept_id: ConceptId,
    pub items: Vec<QuestionId>,
    pub seed: u64,
}

/// Difficulty values allowed for each learner level. `unlevelled` applies
/// before a learner's first pre-test has set a level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyBands {
    pub weak: BTreeSet<u8>,
    pub slow_learner: BTreeSet<u8>,
    pub smart: BTreeSet<u8>,
    pub genius: BTreeSet<u8>,
    pub unlevelled: BTreeSet<u8>,
}

impl Default for DifficultyBands {
    fn default() -> Self {
        Self {
            weak: [1, 2].into(),
            slow_learner: [2, 3].into(),
            smart: [3, 4].into(),
            genius: [4, 5].into(),
            unlevelled: [2, 3, 4].into(),
        }
    }
}

impl DifficultyBands {
    pub fn band(&self, level: Option<LearnerLevel>) -> &BTreeSet<u8> {
        match level {
            None => &self.unlevelled,
            Some(LearnerLevel::Weak) => &self.weak,
            Some(LearnerLevel::SlowLearner) => &self.slow_learner,
            Some(LearnerLevel::Smart) => &self.smart,
            Some(LearnerLevel::Genius) => &self.genius,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let rows = [
            ("weak", &self.weak),
            ("slow_learner", &self.slow_learner),
            ("smart", &self.smart),
            ("genius", &self.genius),
            ("unlevelled", &self.unlevelled),
        ];
        for (name, band) in rows {
            if band.is_empty() || band.iter().any(|d| !DIFFICULTIES.contains(d)) {
                return Err(format!("difficulty band {name} must be a non-empty subset of 1..=5"));
            }
        }
        Ok(())
    }
}

/// Default band for a learner level.
pub fn difficulty_band(level: LearnerLevel) -> BTreeSet<u8> {
    DifficultyBands::default().band(Some(level)).clone()
}

/// Default number of questions per test: two per section, at most ten, but
/// never fewer than one per section.
pub fn default_count(sections: usize) -> usize {
    (sections * 2).min(10).max(sections)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error(
        "not enough questions for section {section} in difficulty band {band:?}: need {needed}, have {available}"
    )]
    InsufficientQuestions {
        section: SectionId,
        band: Vec<u8>,
        needed: usize,
        available: usize,
    },
    #[error("test of {count} question(s) cannot cover {sections} section(s)")]
    CountTooSmall { count: usize, sections: usize },
}

/// Per-section question counts for a test of `count` items, in section
/// order. Remainder slots go to sections by descending importance weight,
/// then by section order.
pub fn section_counts(concept: &Concept, count: usize) -> Vec<usize> {
    let k = concept.sections.len();
    if k == 0 {
        return vec![];
    }
    let mut counts = vec![count / k; k];
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(concept.sections[i].importance_weight), i));
    for &i in order.iter().take(count % k) {
        counts[i] += 1;
    }
    counts
}

/// Plans a test for `m` using the band for the learner's current level.
pub fn plan_test(
    bank: &QuestionBank,
    concept: &Concept,
    m: &LearnerModel,
    phase: Phase,
    count: usize,
    seed: u64,
    bands: &DifficultyBands,
) -> Result<TestPlan, PlanError> {
    plan_with_band(
        bank,
        concept,
        &m.asked_questions,
        bands.band(m.learner_level),
        phase,
        count,
        seed,
    )
}

pub fn plan_with_band(
    bank: &QuestionBank,
    concept: &Concept,
    asked: &BTreeSet<QuestionId>,
    band: &BTreeSet<u8>,
    phase: Phase,
    count: usize,
    seed: u64,
) -> Result<TestPlan, PlanError> {
    let k = concept.sections.len();
    if count < k || count == 0 {
        return Err(PlanError::CountTooSmall { count, sections: k });
    }
    let counts = section_counts(concept, count);
    let phase_seed = seed::derive(seed, phase.tag());

    let mut per_section: Vec<Vec<&Question>> = Vec::with_capacity(k);
    for (si, section) in concept.sections.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(phase_seed, si as u64));
        let mut pools: Vec<Vec<&Question>> = band
            .iter()
            .map(|&d| {
                let mut pool: Vec<&Question> = bank
                    .in_cell(&concept.id, &section.id, d)
                    .filter(|q| !asked.contains(&q.id))
                    .collect();
                pool.sort_by(|a, b| a.id.cmp(&b.id));
                pool.shuffle(&mut rng);
                pool
            })
            .collect();
        let available: usize = pools.iter().map(Vec::len).sum();
        let needed = counts[si];
        if available < needed {
            return Err(PlanError::InsufficientQuestions {
                section: section.id.clone(),
                band: band.iter().copied().collect(),
                needed,
                available,
            });
        }
        // Round-robin over ascending difficulty until the quota is met.
        let mut picked = Vec::with_capacity(needed);
        let mut depth = 0;
        while picked.len() < needed {
            for pool in &mut pools {
                if picked.len() == needed {
                    break;
                }
                if let Some(q) = pool.get(depth) {
                    picked.push(*q);
                }
            }
            depth += 1;
        }
        picked.sort_by_key(|q| q.difficulty);
        per_section.push(picked);
    }

    let rounds = per_section.iter().map(Vec::len).max().unwrap_or(0);
    let mut items = Vec::with_capacity(count);
    for r in 0..rounds {
        for section in &per_section {
            if let Some(q) = section.get(r) {
                items.push(q.id.clone());
            }
        }
    }
    Ok(TestPlan {
        phase,
        concept_id: concept.id.clone(),
        items,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedAnswer {
    pub question_id: QuestionId,
    pub chosen: usize,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentOutcome {
    pub phase: Phase,
    pub score: u8,
    pub level: KnowledgeLevel,
    pub conceptual_level: KnowledgeLevel,
    pub objective_level: KnowledgeLevel,
    pub per_section: BTreeMap<SectionId, Tally>,
    pub answers: Vec<GradedAnswer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradeError {
    #[error("plan has {expected} item(s) but {got} answer(s) were given")]
    LengthMismatch { expected: usize, got: usize },
    #[error("question {0} is not in the bank")]
    UnknownQuestion(QuestionId),
    #[error("choice {chosen} out of range for question {question} with {choices} choices")]
    ChoiceOutOfRange {
        question: QuestionId,
        chosen: usize,
        choices: usize,
    },
    #[error("plan has no items")]
    EmptyPlan,
}

pub fn grade(
    plan: &TestPlan,
    bank: &QuestionBank,
    answers: &[usize],
) -> Result<AssessmentOutcome, GradeError> {
    if answers.len() != plan.items.len() {
        return Err(GradeError::LengthMismatch {
            expected: plan.items.len(),
            got: answers.len(),
        });
    }
    let mut overall = Tally::default();
    let mut conceptual = Tally::default();
    let mut objective = Tally::default();
    let mut per_section: BTreeMap<SectionId, Tally> = BTreeMap::new();
    let mut graded = Vec::with_capacity(answers.len());
    for (id, &chosen) in plan.items.iter().zip(answers) {
        let q = bank
            .get(id)
            .ok_or_else(|| GradeError::UnknownQuestion(id.clone()))?;
        if chosen >= q.choices.len() {
            return Err(GradeError::ChoiceOutOfRange {
                question: id.clone(),
                chosen,
                choices: q.choices.len(),
            });
        }
        let correct = chosen == q.correct;
        let points = u32::from(q.points);
        overall.add(points, correct);
        match q.scope {
            Scope::Conceptual => conceptual.add(points, correct),
            Scope::Objective => objective.add(points, correct),
        }
        per_section
            .entry(q.section_id.clone())
            .or_default()
            .add(points, correct);
        graded.push(GradedAnswer {
            question_id: id.clone(),
            chosen,
            correct,
        });
    }
    let s = PhaseScore::from_tallies(overall, conceptual, objective).ok_or(GradeError::EmptyPlan)?;
    Ok(AssessmentOutcome {
        phase: plan.phase,
        score: s.score,
        level: s.level,
        conceptual_level: s.conceptual_level,
        objective_level: s.objective_level,
        per_section,
        answers: graded,
    })
}
