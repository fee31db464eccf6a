//! Simulated learners and cohort runs.
//!
//! A simulated learner answers item `q` correctly with probability
//!
//! ```text
//! p = g + (1 - g) * logistic(ability + bonus - (difficulty - 3)),   g = 1 / |choices|
//! ```
//!
//! where `bonus` is the learner's match bonus during a post-test whose
//! preceding content used the learner's favourite method, and zero otherwise.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use tutor_core::assessment::{Question, QuestionBank, TestPlan};
use tutor_core::learner::{percent_score, ProfileError, Questionnaire};
use tutor_core::seed;
use tutor_core::session::{FinalStatus, Input, LearnerState, Prompt, SessionError, SessionState, Tutor};
use tutor_core::{ConceptId, CourseGraph, LearnerId, LearningStyle, Method, MethodMatrix, SectionId, TutorConfig};

pub const ABILITY_MIN: f64 = -3.0;
pub const ABILITY_MAX: f64 = 3.0;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Probability of a correct answer.
pub fn p_correct(ability: f64, bonus: f64, difficulty: u8, choices: usize) -> f64 {
    let g = 1.0 / choices as f64;
    g + (1.0 - g) * logistic(ability + bonus - (f64::from(difficulty) - 3.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedLearner {
    /// Ability per (concept, section), logit scale.
    pub abilities: BTreeMap<(ConceptId, SectionId), f64>,
    /// Used for sections missing from `abilities`.
    pub default_ability: f64,
    pub style: LearningStyle,
    pub match_bonus: f64,
    pub rng_seed: u64,
}

impl SimulatedLearner {
    pub fn uniform(ability: f64, style: LearningStyle, match_bonus: f64, rng_seed: u64) -> Self {
        Self {
            abilities: BTreeMap::new(),
            default_ability: ability.clamp(ABILITY_MIN, ABILITY_MAX),
            style,
            match_bonus,
            rng_seed,
        }
    }

    pub fn ability(&self, q: &Question) -> f64 {
        self.abilities
            .get(&(q.concept_id.clone(), q.section_id.clone()))
            .copied()
            .unwrap_or(self.default_ability)
    }

    /// `matched` says whether the content just delivered used the learner's
    /// favourite method.
    pub fn p_correct(&self, q: &Question, matched: bool) -> f64 {
        let bonus = if matched { self.match_bonus } else { 0.0 };
        p_correct(self.ability(q), bonus, q.difficulty, q.choices.len())
    }

    /// Draws a choice index for `q`.
    pub fn answer(&self, q: &Question, matched: bool, rng: &mut impl Rng) -> usize {
        if rng.random::<f64>() < self.p_correct(q, matched) {
            return q.correct;
        }
        let k = rng.random_range(0..q.choices.len() - 1);
        if k >= q.correct {
            k + 1
        } else {
            k
        }
    }
}

/// Exact distribution of the percent score of a test whose items carry
/// `(points, p_correct)`. Returned as probabilities indexed by score 0..=100.
pub fn score_distribution(items: &[(u32, f64)]) -> Vec<f64> {
    let max: u32 = items.iter().map(|(pts, _)| pts).sum();
    let mut earned = vec![0.0; max as usize + 1];
    earned[0] = 1.0;
    for &(pts, p) in items {
        for e in (0..=max as usize).rev() {
            let stay = earned[e] * (1.0 - p);
            let from = if e >= pts as usize { earned[e - pts as usize] * p } else { 0.0 };
            earned[e] = stay + from;
        }
    }
    let mut by_score = vec![0.0; 101];
    for (e, pr) in earned.iter().enumerate() {
        by_score[percent_score(e as u32, max) as usize] += pr;
    }
    by_score
}

pub fn mean_score(dist: &[f64]) -> f64 {
    dist.iter().enumerate().map(|(s, p)| s as f64 * p).sum()
}

/// `(points, p_correct)` of every item in a plan.
pub fn plan_items(plan: &TestPlan, bank: &QuestionBank, learner: &SimulatedLearner, matched: bool) -> Vec<(u32, f64)> {
    plan.items
        .iter()
        .filter_map(|id| bank.get(id))
        .map(|q| (u32::from(q.points), learner.p_correct(q, matched)))
        .collect()
}

/// One simulated sitting of a fixed plan.
pub fn sample_score(plan: &TestPlan, bank: &QuestionBank, learner: &SimulatedLearner, matched: bool, rng: &mut impl Rng) -> u8 {
    let (mut earned, mut max) = (0u32, 0u32);
    for q in plan.items.iter().filter_map(|id| bank.get(id)) {
        max += u32::from(q.points);
        if learner.answer(q, matched, rng) == q.correct {
            earned += u32::from(q.points);
        }
    }
    percent_score(earned, max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortSpec {
    pub learners: usize,
    pub ability_mean: f64,
    /// Standard deviation of per-section ability around the mean.
    pub ability_spread: f64,
    pub match_bonus: f64,
    /// Serve content by the learner's style, or by the reversed ranking.
    pub style_match: bool,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            learners: 100,
            ability_mean: 0.0,
            ability_spread: 0.5,
            match_bonus: 1.0,
            style_match: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionTrace {
    pub concept_id: ConceptId,
    pub status: FinalStatus,
    pub attempts: u32,
    pub pretest_score: u8,
    pub posttest_scores: Vec<u8>,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnerTrace {
    pub index: usize,
    pub seed: u64,
    pub style: LearningStyle,
    pub sessions: Vec<SessionTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortSummary {
    pub learners: usize,
    pub sessions: usize,
    /// Mean of each session's last post-test score; `None` when no session
    /// reached a post-test.
    pub mean_posttest_score: Option<f64>,
    pub completion_rate: f64,
    /// Mean learning rounds over sessions that were not skipped.
    pub mean_attempts: Option<f64>,
    pub skip_rate: f64,
    pub defer_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortReport {
    pub spec: CohortSpec,
    pub summary: CohortSummary,
    pub traces: Vec<LearnerTrace>,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("a cohort needs at least one learner")]
    EmptyCohort,
    #[error("learner {learner}: {source}")]
    Profile {
        learner: usize,
        #[source]
        source: ProfileError,
    },
    #[error("learner {learner}, concept {concept}: {source}")]
    Session {
        learner: usize,
        concept: ConceptId,
        #[source]
        source: SessionError,
    },
}

/// Drives one session to its end. `truth` is the matrix describing what
/// the learner actually responds to.
pub fn run_session(
    tutor: &Tutor,
    state: &mut LearnerState,
    learner: &SimulatedLearner,
    truth: &MethodMatrix,
    concept: &ConceptId,
    session_seed: u64,
    rng: &mut impl Rng,
) -> Result<SessionTrace, SessionError> {
    let favourite = truth.favourite(learner.style);
    let bank = tutor.course().questions();
    let (_, mut prompt) = state.start(tutor, concept, session_seed)?;
    loop {
        let session = state.session.as_ref().expect("session started");
        if session.state.is_terminal() {
            break;
        }
        let input = match &prompt {
            Prompt::Question { question_id, .. } => {
                let q = bank
                    .get(question_id)
                    .ok_or_else(|| SessionError::Internal(format!("question {question_id} missing")))?;
                let matched =
                    session.state == SessionState::PostTest && session.methods_delivered.last() == Some(&favourite);
                Input::Answer(learner.answer(q, matched, rng))
            }
            _ => Input::Next,
        };
        let (_, prompts) = state.submit(tutor, input)?;
        prompt = prompts.into_iter().last().expect("every input yields a prompt");
    }
    let s = state.session.as_ref().expect("session started");
    Ok(SessionTrace {
        concept_id: concept.clone(),
        status: s.final_status().expect("terminal"),
        attempts: s.attempt,
        pretest_score: s.outcomes[0].score,
        posttest_scores: s.outcomes[1..].iter().map(|o| o.score).collect(),
        methods: s.methods_delivered.clone(),
    })
}

fn run_learner(
    tutor: &Tutor,
    profiler: &Questionnaire,
    truth: &MethodMatrix,
    spec: &CohortSpec,
    index: usize,
) -> Result<LearnerTrace, SimError> {
    let lseed = seed::derive(spec.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(lseed);
    let style = LearningStyle::ALL[rng.random_range(0..LearningStyle::ALL.len())];
    let mut learner = SimulatedLearner::uniform(spec.ability_mean, style, spec.match_bonus, lseed);
    if spec.ability_spread > 0.0 {
        let noise = Normal::new(0.0, spec.ability_spread).expect("spread is finite and positive");
        for c in tutor.course().concepts() {
            for s in &c.sections {
                let a = (spec.ability_mean + noise.sample(&mut rng)).clamp(ABILITY_MIN, ABILITY_MAX);
                learner.abilities.insert((c.id.clone(), s.id.clone()), a);
            }
        }
    }

    let mut state = LearnerState::new(LearnerId::new(format!("sim-{index}")));
    state
        .submit_profile(&profiler.answers_for(style), profiler)
        .map_err(|source| SimError::Profile { learner: index, source })?;

    let mut sessions = Vec::new();
    let mut visited = std::collections::BTreeSet::new();
    while let Some(concept) = tutor.eligible(&state.model).into_iter().find(|c| !visited.contains(c)) {
        visited.insert(concept.clone());
        let sseed = seed::derive(lseed, 1000 + sessions.len() as u64);
        let trace = run_session(tutor, &mut state, &learner, truth, &concept, sseed, &mut rng).map_err(|source| {
            SimError::Session {
                learner: index,
                concept: concept.clone(),
                source,
            }
        })?;
        sessions.push(trace);
    }
    Ok(LearnerTrace {
        index,
        seed: lseed,
        style,
        sessions,
    })
}

pub fn summarize(learners: usize, traces: &[LearnerTrace]) -> CohortSummary {
    let sessions: Vec<&SessionTrace> = traces.iter().flat_map(|t| &t.sessions).collect();
    let n = sessions.len();
    let count = |st: FinalStatus| sessions.iter().filter(|s| s.status == st).count();
    let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let post: Vec<f64> = sessions
        .iter()
        .filter_map(|s| s.posttest_scores.last())
        .map(|&s| f64::from(s))
        .collect();
    let attempts: Vec<f64> = sessions
        .iter()
        .filter(|s| s.status != FinalStatus::Skipped)
        .map(|s| f64::from(s.attempts))
        .collect();
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    CohortSummary {
        learners,
        sessions: n,
        mean_posttest_score: mean(&post),
        completion_rate: rate(count(FinalStatus::Completed) + count(FinalStatus::Skipped)),
        mean_attempts: mean(&attempts),
        skip_rate: rate(count(FinalStatus::Skipped)),
        defer_rate: rate(count(FinalStatus::Deferred)),
    }
}

/// Runs a cohort. Learners run in parallel; the report only depends on
/// the inputs.
pub fn run_cohort(
    course: Arc<CourseGraph>,
    config: &TutorConfig,
    profiler: &Questionnaire,
    spec: &CohortSpec,
) -> Result<CohortReport, SimError> {
    if spec.learners == 0 {
        return Err(SimError::EmptyCohort);
    }
    let truth = config.method_matrix.clone();
    let mut served = config.clone();
    if !spec.style_match {
        served.method_matrix = truth.reversed();
    }
    let tutor = Tutor::new(course, served);
    let traces = (0..spec.learners)
        .into_par_iter()
        .map(|i| run_learner(&tutor, profiler, &truth, spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CohortReport {
        spec: spec.clone(),
        summary: summarize(spec.learners, &traces),
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_anchor() {
        // Mid ability on a mid item: chance-adjusted one half.
        assert!((p_correct(0.0, 0.0, 3, 4) - 0.625).abs() < 1e-12);
        assert!((p_correct(1.0, 0.0, 4, 2) - 0.75).abs() < 1e-12);
        for a in [-3.0, 0.0, 3.0] {
            for d in 1..=5 {
                let p = p_correct(a, 1.0, d, 3);
                assert!(p > 0.0 && p < 1.0);
            }
        }
    }

    #[test]
    fn distribution_by_enumeration() {
        let items = [(1, 0.3), (2, 0.6), (4, 0.9)];
        let dist = score_distribution(&items);
        let mut brute = vec![0.0; 101];
        for mask in 0u32..8 {
            let mut pr = 1.0;
            let mut e = 0;
            for (i, &(pts, p)) in items.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    pr *= p;
                    e += pts;
                } else {
                    pr *= 1.0 - p;
                }
            }
            brute[percent_score(e, 7) as usize] += pr;
        }
        for s in 0..=100 {
            assert!((dist[s] - brute[s]).abs() < 1e-12, "score {s}");
        }
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Expected earned points 0.3 + 1.2 + 3.6 = 5.1 of 7; rounding moves
        // the percent mean only slightly.
        assert!((mean_score(&dist) - 510.0 / 7.0).abs() < 0.5);
    }

    #[test]
    fn wrong_answers_never_pick_the_key() {
        let q = Question {
            id: "q".into(),
            concept_id: "c".into(),
            section_id: "s".into(),
            difficulty: 5,
            points: 1,
            scope: tutor_core::Scope::Conceptual,
            prompt: "?".into(),
            choices: vec!["a".into(), "b".into(), "c".into()],
            correct: 1,
        };
        let l = SimulatedLearner::uniform(-3.0, LearningStyle::SS, 0.0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [0usize; 3];
        for _ in 0..3000 {
            seen[l.answer(&q, false, &mut rng)] += 1;
        }
        let p = l.p_correct(&q, false);
        assert!((seen[1] as f64 / 3000.0 - p).abs() < 0.03);
        assert!(seen[0] > 0 && seen[2] > 0);
    }
}
