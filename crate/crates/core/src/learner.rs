//! Learner model: learning-style profiling, knowledge-level bands, learner
//! level derivation and per-answer tallies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::{Question, Scope};
use crate::ids::{ConceptId, LearnerId, QuestionId};

/// Jackson's five learning styles. Declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LearningStyle {
    /// Sensation seeking.
    SS,
    /// Goal oriented achiever.
    GOA,
    /// Emotionally intelligent achiever.
    EIA,
    /// Conscientious achiever.
    CA,
    /// Deep learning achiever.
    DLA,
}

impl LearningStyle {
    pub const ALL: [LearningStyle; 5] = [Self::SS, Self::GOA, Self::EIA, Self::CA, Self::DLA];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::SS => "Sensation Seeking",
            Self::GOA => "Goal Oriented Achiever",
            Self::EIA => "Emotionally Intelligent Achiever",
            Self::CA => "Conscientious Achiever",
            Self::DLA => "Deep Learning Achiever",
        }
    }
}

impl fmt::Display for LearningStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleProfile {
    pub weights: BTreeMap<LearningStyle, f64>,
    pub dominant: LearningStyle,
}

impl StyleProfile {
    /// Profile of a learner who has not answered the questionnaire.
    pub fn uniform() -> Self {
        Self::from_tallies([0; 5])
    }

    /// A profile concentrated entirely on one style.
    pub fn pure(style: LearningStyle) -> Self {
        let mut tallies = [0; 5];
        tallies[style.index()] = 1;
        Self::from_tallies(tallies)
    }

    /// Builds a normalized profile from integer tallies indexed by
    /// [`LearningStyle::index`]. An all-zero tally yields uniform weights.
    pub fn from_tallies(tallies: [u64; 5]) -> Self {
        let total: u64 = tallies.iter().sum();
        let weights = LearningStyle::ALL
            .iter()
            .map(|&s| {
                let w = if total == 0 {
                    0.2
                } else {
                    tallies[s.index()] as f64 / total as f64
                };
                (s, w)
            })
            .collect();
        // First maximum in canonical order wins ties.
        let mut dominant = LearningStyle::SS;
        for s in LearningStyle::ALL {
            if tallies[s.index()] > tallies[dominant.index()] {
                dominant = s;
            }
        }
        Self { weights, dominant }
    }
}

impl Default for StyleProfile {
    fn default() -> Self {
        Self::uniform()
    }
}

/// Profiler questionnaire, loaded from deployment data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Questionnaire {
    pub items: Vec<ProfilerItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilerItem {
    pub id: String,
    pub prompt: String,
    pub options: Vec<ProfilerOption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilerOption {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub increments: BTreeMap<LearningStyle, u32>,
}

/// One questionnaire answer: item id and chosen option id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfilerAnswer {
    pub item: String,
    pub option: String,
}

impl ProfilerAnswer {
    pub fn new(item: impl Into<String>, option: impl Into<String>) -> Self {
        Self {
            item: item.into(),
            option: option.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("unknown profiler item {0:?}")]
    UnknownItem(String),
    #[error("unknown option {option:?} for profiler item {item:?}")]
    UnknownOption { item: String, option: String },
    #[error("profiler item {0:?} answered more than once")]
    DuplicateAnswer(String),
    #[error("malformed questionnaire: {0}")]
    Malformed(String),
}

impl ProfileError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownItem(_) => "UnknownItem",
            Self::UnknownOption { .. } => "UnknownOption",
            Self::DuplicateAnswer(_) => "DuplicateAnswer",
            Self::Malformed(_) => "MalformedQuestionnaire",
        }
    }
}

impl Questionnaire {
    pub fn from_json(bytes: &[u8]) -> Result<Self, ProfileError> {
        let q: Questionnaire =
            serde_json::from_slice(bytes).map_err(|e| ProfileError::Malformed(e.to_string()))?;
        let mut seen = BTreeSet::new();
        for item in &q.items {
            if !seen.insert(item.id.as_str()) {
                return Err(ProfileError::Malformed(format!("duplicate item id {:?}", item.id)));
            }
            let mut opts = BTreeSet::new();
            for o in &item.options {
                if !opts.insert(o.id.as_str()) {
                    return Err(ProfileError::Malformed(format!(
                        "duplicate option {:?} in item {:?}",
                        o.id, item.id
                    )));
                }
            }
        }
        Ok(q)
    }

    fn option(&self, item: &str, option: &str) -> Result<&ProfilerOption, ProfileError> {
        let it = self
            .items
            .iter()
            .find(|i| i.id == item)
            .ok_or_else(|| ProfileError::UnknownItem(item.to_owned()))?;
        it.options
            .iter()
            .find(|o| o.id == option)
            .ok_or_else(|| ProfileError::UnknownOption {
                item: item.to_owned(),
                option: option.to_owned(),
            })
    }

    /// The answer sheet a learner of a single style would fill in: for every
    /// item, the option that favours `style` most over the other styles.
    pub fn answers_for(&self, style: LearningStyle) -> Vec<ProfilerAnswer> {
        self.items
            .iter()
            .filter_map(|item| {
                let best = item.options.iter().max_by_key(|o| {
                    let own = i64::from(o.increments.get(&style).copied().unwrap_or(0));
                    let rest: i64 = o
                        .increments
                        .iter()
                        .filter(|(s, _)| **s != style)
                        .map(|(_, v)| i64::from(*v))
                        .sum();
                    (own - rest, std::cmp::Reverse(o.id.clone()))
                })?;
                Some(ProfilerAnswer::new(item.id.clone(), best.id.clone()))
            })
            .collect()
    }
}

/// Scores questionnaire answers into a normalized style profile.
pub fn profile_styles(
    answers: &[ProfilerAnswer],
    questionnaire: &Questionnaire,
) -> Result<StyleProfile, ProfileError> {
    let mut seen = BTreeSet::new();
    let mut tallies = [0u64; 5];
    for a in answers {
        let opt = questionnaire.option(&a.item, &a.option)?;
        if !seen.insert(a.item.as_str()) {
            return Err(ProfileError::DuplicateAnswer(a.item.clone()));
        }
        for (style, inc) in &opt.increments {
            tallies[style.index()] += u64::from(*inc);
        }
    }
    Ok(StyleProfile::from_tallies(tallies))
}

/// Five-band categorization of a 0–100 score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KnowledgeLevel {
    Weak,
    Average,
    Good,
    VeryGood,
    Excellent,
}

impl KnowledgeLevel {
    pub const ALL: [KnowledgeLevel; 5] = [
        Self::Weak,
        Self::Average,
        Self::Good,
        Self::VeryGood,
        Self::Excellent,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Weak => "Weak",
            Self::Average => "Average",
            Self::Good => "Good",
            Self::VeryGood => "Very good",
            Self::Excellent => "Excellent",
        }
    }

    /// Inclusive score range of the band.
    pub fn range(self) -> (u8, u8) {
        match self {
            Self::Weak => (0, 30),
            Self::Average => (31, 50),
            Self::Good => (51, 70),
            Self::VeryGood => (71, 85),
            Self::Excellent => (86, 100),
        }
    }
}

impl fmt::Display for KnowledgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("score {0} is outside 0..=100")]
pub struct OutOfRange(pub u32);

pub fn classify_knowledge(score: u32) -> Result<KnowledgeLevel, OutOfRange> {
    Ok(match score {
        86..=100 => KnowledgeLevel::Excellent,
        71..=85 => KnowledgeLevel::VeryGood,
        51..=70 => KnowledgeLevel::Good,
        31..=50 => KnowledgeLevel::Average,
        0..=30 => KnowledgeLevel::Weak,
        _ => return Err(OutOfRange(score)),
    })
}

/// `round_half_up(100 * earned / max)`, computed in integers.
pub fn percent_score(earned: u32, max: u32) -> u8 {
    assert!(max > 0 && earned <= max, "percent_score({earned}, {max})");
    let (e, m) = (u64::from(earned), u64::from(max));
    ((200 * e + m) / (2 * m)) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LearnerLevel {
    Weak,
    SlowLearner,
    Smart,
    Genius,
}

impl LearnerLevel {
    pub const ALL: [LearnerLevel; 4] = [Self::Weak, Self::SlowLearner, Self::Smart, Self::Genius];

    pub fn rank(self) -> usize {
        self as usize
    }

    fn from_rank(r: usize) -> Self {
        Self::ALL[r.min(3)]
    }
}

impl fmt::Display for LearnerLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Weak => "weak",
            Self::SlowLearner => "slow learner",
            Self::Smart => "smart",
            Self::Genius => "genius",
        })
    }
}

/// Maps a pre-test knowledge level onto a learner level. With a prior level
/// the result moves at most one step away from it.
pub fn derive_learner_level(pretest: KnowledgeLevel, prior: Option<LearnerLevel>) -> LearnerLevel {
    let target = match pretest {
        KnowledgeLevel::Excellent => LearnerLevel::Genius,
        KnowledgeLevel::VeryGood | KnowledgeLevel::Good => LearnerLevel::Smart,
        KnowledgeLevel::Average => LearnerLevel::SlowLearner,
        KnowledgeLevel::Weak => LearnerLevel::Weak,
    };
    match prior {
        None => target,
        Some(p) => {
            let (t, p) = (target.rank(), p.rank());
            LearnerLevel::from_rank(if t > p { p + 1 } else if t < p { p - 1 } else { p })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ConceptStatus {
    #[default]
    NotStarted,
    InProgress,
    Completed,
    Skipped,
    Deferred,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConceptRecord {
    pub status: ConceptStatus,
    pub attempts: u32,
    pub conceptual_level: Option<KnowledgeLevel>,
    pub objective_level: Option<KnowledgeLevel>,
    /// Overall level of the most recently finalized phase.
    pub level: Option<KnowledgeLevel>,
    pub last_score: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub earned: u32,
    pub max: u32,
}

impl Tally {
    pub fn add(&mut self, points: u32, correct: bool) {
        self.max += points;
        if correct {
            self.earned += points;
        }
    }
}

/// In-phase running tally.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunningTally {
    pub earned: u32,
    pub max: u32,
    pub conceptual: Tally,
    pub objective: Tally,
    pub recorded: Vec<QuestionId>,
}

/// Result of closing a phase tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseScore {
    pub earned: u32,
    pub max: u32,
    pub score: u8,
    pub level: KnowledgeLevel,
    pub conceptual_level: KnowledgeLevel,
    pub objective_level: KnowledgeLevel,
}

impl PhaseScore {
    /// Scores an overall tally plus its per-scope split. A scope without
    /// questions inherits the overall level.
    pub fn from_tallies(overall: Tally, conceptual: Tally, objective: Tally) -> Option<Self> {
        if overall.max == 0 {
            return None;
        }
        let score = percent_score(overall.earned, overall.max);
        let level = band(score);
        let sub = |t: Tally| {
            if t.max == 0 {
                level
            } else {
                band(percent_score(t.earned, t.max))
            }
        };
        Some(Self {
            earned: overall.earned,
            max: overall.max,
            score,
            level,
            conceptual_level: sub(conceptual),
            objective_level: sub(objective),
        })
    }
}

fn band(score: u8) -> KnowledgeLevel {
    classify_knowledge(u32::from(score)).expect("percent_score is within 0..=100")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("no assessment phase is active")]
    NoActivePhase,
    #[error("question {0} already answered in this phase")]
    AlreadyRecorded(QuestionId),
    #[error("phase has no scored questions")]
    EmptyPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerModel {
    pub learner_id: LearnerId,
    #[serde(default)]
    pub name: Option<String>,
    pub style_profile: StyleProfile,
    pub learner_level: Option<LearnerLevel>,
    pub concept_records: BTreeMap<ConceptId, ConceptRecord>,
    /// Every question ever put to this learner.
    pub asked_questions: BTreeSet<QuestionId>,
    pub running: Option<RunningTally>,
    pub sessions_started: u32,
}

impl LearnerModel {
    pub fn new(learner_id: LearnerId) -> Self {
        Self {
            learner_id,
            name: None,
            style_profile: StyleProfile::uniform(),
            learner_level: None,
            concept_records: BTreeMap::new(),
            asked_questions: BTreeSet::new(),
            running: None,
            sessions_started: 0,
        }
    }

    pub fn record(&self, concept: &ConceptId) -> Option<&ConceptRecord> {
        self.concept_records.get(concept)
    }

    pub fn record_mut(&mut self, concept: &ConceptId) -> &mut ConceptRecord {
        self.concept_records.entry(concept.clone()).or_default()
    }

    pub fn status(&self, concept: &ConceptId) -> ConceptStatus {
        self.record(concept).map(|r| r.status).unwrap_or_default()
    }

    /// Concepts the learner no longer needs: completed or skipped on mastery.
    pub fn finished_concepts(&self) -> BTreeSet<ConceptId> {
        self.concept_records
            .iter()
            .filter(|(_, r)| matches!(r.status, ConceptStatus::Completed | ConceptStatus::Skipped))
            .map(|(c, _)| c.clone())
            .collect()
    }

    pub fn deferred_concepts(&self) -> Vec<ConceptId> {
        self.concept_records
            .iter()
            .filter(|(_, r)| r.status == ConceptStatus::Deferred)
            .map(|(c, _)| c.clone())
            .collect()
    }

    pub fn active_concept(&self) -> Option<&ConceptId> {
        self.concept_records
            .iter()
            .find(|(_, r)| r.status == ConceptStatus::InProgress)
            .map(|(c, _)| c)
    }

    /// Opens a fresh running tally, discarding any unfinished one.
    pub fn begin_phase(&mut self) {
        self.running = Some(RunningTally::default());
    }

    pub fn update_on_answer(&mut self, q: &Question, correct: bool) -> Result<(), LearnerError> {
        let tally = self.running.as_mut().ok_or(LearnerError::NoActivePhase)?;
        if tally.recorded.contains(&q.id) {
            return Err(LearnerError::AlreadyRecorded(q.id.clone()));
        }
        let points = u32::from(q.points);
        tally.max += points;
        if correct {
            tally.earned += points;
        }
        match q.scope {
            Scope::Conceptual => tally.conceptual.add(points, correct),
            Scope::Objective => tally.objective.add(points, correct),
        }
        tally.recorded.push(q.id.clone());
        self.asked_questions.insert(q.id.clone());
        Ok(())
    }

    /// Closes the running tally and records the resulting levels on the
    /// concept record.
    pub fn finalize_phase(&mut self, concept: &ConceptId) -> Result<PhaseScore, LearnerError> {
        let tally = self.running.as_ref().ok_or(LearnerError::NoActivePhase)?;
        let overall = Tally {
            earned: tally.earned,
            max: tally.max,
        };
        let score = PhaseScore::from_tallies(overall, tally.conceptual, tally.objective)
            .ok_or(LearnerError::EmptyPhase)?;
        self.running = None;
        let rec = self.record_mut(concept);
        rec.conceptual_level = Some(score.conceptual_level);
        rec.objective_level = Some(score.objective_level);
        rec.level = Some(score.level);
        rec.last_score = Some(score.score);
        Ok(score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::SectionId;

    fn q(id: &str, points: u8, scope: Scope) -> Question {
        Question {
            id: QuestionId::new(id),
            concept_id: ConceptId::new("c1"),
            section_id: SectionId::new("s1"),
            difficulty: 3,
            points,
            scope,
            prompt: "?".into(),
            choices: vec!["a".into(), "b".into()],
            correct: 0,
        }
    }

    /// Band table written out entry by entry.
    fn table_oracle(score: u32) -> KnowledgeLevel {
        let mut table = [KnowledgeLevel::Weak; 101];
        for (lo, hi, lvl) in [
            (86, 100, KnowledgeLevel::Excellent),
            (71, 85, KnowledgeLevel::VeryGood),
            (51, 70, KnowledgeLevel::Good),
            (31, 50, KnowledgeLevel::Average),
        ] {
            table[lo..=hi].fill(lvl);
        }
        table[score as usize]
    }

    #[test]
    fn classify_band_edges() {
        use KnowledgeLevel::*;
        for (s, want) in [
            (86, Excellent),
            (100, Excellent),
            (71, VeryGood),
            (85, VeryGood),
            (51, Good),
            (70, Good),
            (31, Average),
            (50, Average),
            (30, Weak),
            (0, Weak),
        ] {
            assert_eq!(classify_knowledge(s), Ok(want), "score {s}");
        }
        assert_eq!(classify_knowledge(101), Err(OutOfRange(101)));
        for s in 0..=100 {
            assert_eq!(classify_knowledge(s).unwrap(), table_oracle(s));
            let (lo, hi) = classify_knowledge(s).unwrap().range();
            assert!((u32::from(lo)..=u32::from(hi)).contains(&s));
        }
    }

    #[test]
    fn percent_rounds_half_up() {
        assert_eq!(percent_score(7, 10), 70);
        assert_eq!(percent_score(1, 8), 13); // 12.5
        assert_eq!(percent_score(1, 3), 33);
        assert_eq!(percent_score(2, 3), 67);
        assert_eq!(percent_score(0, 5), 0);
        assert_eq!(percent_score(5, 5), 100);
    }

    #[test]
    fn learner_level_table_and_smoothing() {
        use KnowledgeLevel as K;
        use LearnerLevel as L;
        assert_eq!(derive_learner_level(K::Excellent, None), L::Genius);
        assert_eq!(derive_learner_level(K::Good, None), L::Smart);
        assert_eq!(derive_learner_level(K::Weak, Some(L::Genius)), L::Smart);
        // Hand fold: Average -> SlowLearner; Average stays; Excellent moves one step to Smart.
        let mut prior = None;
        let mut seen = vec![];
        for k in [K::Average, K::Average, K::Excellent] {
            let next = derive_learner_level(k, prior);
            seen.push(next);
            prior = Some(next);
        }
        assert_eq!(seen, vec![L::SlowLearner, L::SlowLearner, L::Smart]);
    }

    #[test]
    fn answer_tally_arithmetic() {
        let mut m = LearnerModel::new(LearnerId::new("L1"));
        assert_eq!(
            m.update_on_answer(&q("x", 5, Scope::Conceptual), true),
            Err(LearnerError::NoActivePhase)
        );
        m.begin_phase();
        m.update_on_answer(&q("a", 5, Scope::Conceptual), true).unwrap();
        let t = m.running.as_ref().unwrap();
        assert_eq!((t.earned, t.max), (5, 5));

        m.begin_phase();
        m.update_on_answer(&q("b", 5, Scope::Conceptual), false).unwrap();
        let t = m.running.as_ref().unwrap();
        assert_eq!((t.earned, t.max), (0, 5));

        m.begin_phase();
        m.update_on_answer(&q("c", 2, Scope::Conceptual), true).unwrap();
        m.update_on_answer(&q("d", 3, Scope::Objective), false).unwrap();
        m.update_on_answer(&q("e", 5, Scope::Objective), true).unwrap();
        assert_eq!(
            m.update_on_answer(&q("e", 5, Scope::Objective), true),
            Err(LearnerError::AlreadyRecorded(QuestionId::new("e")))
        );
        let t = m.running.as_ref().unwrap();
        assert_eq!((t.earned, t.max), (7, 10));
        let s = m.finalize_phase(&ConceptId::new("c1")).unwrap();
        assert_eq!((s.score, s.level), (70, KnowledgeLevel::Good));
        // conceptual 2/2 = 100, objective 5/8 = 62.5 -> 63
        assert_eq!(s.conceptual_level, KnowledgeLevel::Excellent);
        assert_eq!(s.objective_level, KnowledgeLevel::Good);
        assert!(m.running.is_none());
        assert_eq!(m.asked_questions.len(), 5);
        let rec = m.record(&ConceptId::new("c1")).unwrap();
        assert_eq!(rec.last_score, Some(70));
    }

    #[test]
    fn finalize_edges() {
        let c = ConceptId::new("c1");
        let mut m = LearnerModel::new(LearnerId::new("L1"));
        m.begin_phase();
        assert_eq!(m.finalize_phase(&c), Err(LearnerError::EmptyPhase));
        m.update_on_answer(&q("a", 4, Scope::Objective), true).unwrap();
        let s = m.finalize_phase(&c).unwrap();
        assert_eq!((s.score, s.level), (100, KnowledgeLevel::Excellent));
        // no conceptual questions: inherits overall
        assert_eq!(s.conceptual_level, KnowledgeLevel::Excellent);
        m.begin_phase();
        m.update_on_answer(&q("b", 4, Scope::Objective), false).unwrap();
        let s = m.finalize_phase(&c).unwrap();
        assert_eq!((s.score, s.level), (0, KnowledgeLevel::Weak));
    }

    fn questionnaire() -> Questionnaire {
        Questionnaire::from_json(include_bytes!("../fixtures/profiler.json")).unwrap()
    }

    #[test]
    fn profile_single_style_and_ties() {
        let q = Questionnaire {
            items: vec![ProfilerItem {
                id: "i1".into(),
                prompt: "p".into(),
                options: vec![
                    ProfilerOption {
                        id: "a".into(),
                        label: "a".into(),
                        increments: [(LearningStyle::SS, 3)].into(),
                    },
                    ProfilerOption {
                        id: "b".into(),
                        label: "b".into(),
                        increments: [(LearningStyle::SS, 2), (LearningStyle::GOA, 2)].into(),
                    },
                ],
            }],
        };
        let p = profile_styles(&[ProfilerAnswer::new("i1", "a")], &q).unwrap();
        assert_eq!(p.weights[&LearningStyle::SS], 1.0);
        assert_eq!(p.weights[&LearningStyle::DLA], 0.0);
        assert_eq!(p.dominant, LearningStyle::SS);

        let p = profile_styles(&[ProfilerAnswer::new("i1", "b")], &q).unwrap();
        assert_eq!(p.dominant, LearningStyle::SS);
        assert_eq!(p.weights[&LearningStyle::GOA], 0.5);

        let p = profile_styles(&[], &q).unwrap();
        assert!(p.weights.values().all(|&w| w == 0.2));
        assert_eq!(p.dominant, LearningStyle::SS);
    }

    #[test]
    fn profile_errors() {
        let q = questionnaire();
        assert_eq!(
            profile_styles(&[ProfilerAnswer::new("zz", "a")], &q),
            Err(ProfileError::UnknownItem("zz".into()))
        );
        assert!(matches!(
            profile_styles(&[ProfilerAnswer::new("q1", "zz")], &q),
            Err(ProfileError::UnknownOption { .. })
        ));
        assert_eq!(
            profile_styles(&[ProfilerAnswer::new("q1", "a"), ProfilerAnswer::new("q1", "b")], &q),
            Err(ProfileError::DuplicateAnswer("q1".into()))
        );
    }

    #[test]
    fn profile_matches_independent_tally() {
        let q = questionnaire();
        assert_eq!(q.items.len(), 10);
        // Mixed sheet: option index (n * 3) % 5 on item n.
        let answers: Vec<_> = q
            .items
            .iter()
            .enumerate()
            .map(|(n, it)| ProfilerAnswer::new(it.id.clone(), it.options[(n * 3) % 5].id.clone()))
            .collect();
        // Independent tally over the raw JSON increment table.
        let raw: serde_json::Value =
            serde_json::from_slice(include_bytes!("../fixtures/profiler.json")).unwrap();
        let names = ["SS", "GOA", "EIA", "CA", "DLA"];
        let mut tally = [0i64; 5];
        for (n, item) in raw["items"].as_array().unwrap().iter().enumerate() {
            let opt = &item["options"][(n * 3) % 5];
            for (k, name) in names.iter().enumerate() {
                tally[k] += opt["increments"][name].as_i64().unwrap_or(0);
            }
        }
        let best = (0..5).fold(0, |b, k| if tally[k] > tally[b] { k } else { b });
        let p = profile_styles(&answers, &q).unwrap();
        assert_eq!(p.dominant, LearningStyle::ALL[best]);
        let total: i64 = tally.iter().sum();
        for (k, s) in LearningStyle::ALL.iter().enumerate() {
            assert!((p.weights[s] - tally[k] as f64 / total as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn answers_for_style_lead_to_that_style() {
        let q = questionnaire();
        for s in LearningStyle::ALL {
            let p = profile_styles(&q.answers_for(s), &q).unwrap();
            assert_eq!(p.dominant, s);
        }
    }
}
