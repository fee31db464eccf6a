//! Course knowledge base: concepts, sections, content variants and the
//! question bank, plus validation, scheduling and variant selection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::{Question, QuestionBank, DIFFICULTIES};
use crate::channel::is_printable;
use crate::ids::{ConceptId, SectionId};
use crate::learner::{LearnerLevel, LearnerModel, LearningStyle};

/// Current course file format version.
pub const COURSE_VERSION: u32 = 1;

/// Default minimum number of questions per (section, difficulty) cell.
pub const DEFAULT_MIN_QUESTIONS_PER_CELL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Text,
    Film,
    DynamicView,
    Game,
}

impl Method {
    pub const ALL: [Method; 4] = [Self::Text, Self::Film, Self::DynamicView, Self::Game];

    pub fn label(self) -> &'static str {
        match self {
            Self::Text => "text",
            Self::Film => "film",
            Self::DynamicView => "dynamic view",
            Self::Game => "game",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub id: SectionId,
    pub title: String,
    pub importance_weight: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concept {
    pub id: ConceptId,
    pub title: String,
    #[serde(default)]
    pub prerequisites: Vec<ConceptId>,
    pub sections: Vec<Section>,
}

impl Concept {
    pub fn section(&self, id: &SectionId) -> Option<&Section> {
        self.sections.iter().find(|s| &s.id == id)
    }
}

/// One presentation of a concept (or of one of its sections). For `Text`
/// the body is a list of pages; for the media methods each entry is an
/// opaque media reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentVariant {
    pub concept_id: ConceptId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section_id: Option<SectionId>,
    pub method: Method,
    #[serde(default)]
    pub style_affinity: BTreeSet<LearningStyle>,
    /// Learner levels this variant targets; empty means every level.
    #[serde(default)]
    pub level_band: BTreeSet<LearnerLevel>,
    pub body: Vec<String>,
}

impl ContentVariant {
    pub fn suits_level(&self, level: Option<LearnerLevel>) -> bool {
        match level {
            _ if self.level_band.is_empty() => true,
            Some(l) => self.level_band.contains(&l),
            None => false,
        }
    }

    pub fn covers(&self, section: &SectionId) -> bool {
        self.section_id.as_ref().is_none_or(|s| s == section)
    }
}

/// Position of a variant in the course file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariantRef(pub usize);

/// Per-style ranking of presentation methods, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<LearningStyle, Vec<Method>>", into = "BTreeMap<LearningStyle, Vec<Method>>")]
pub struct MethodMatrix {
    rows: [[Method; 4]; 5],
}

impl MethodMatrix {
    pub fn new(rows: [[Method; 4]; 5]) -> Result<Self, String> {
        for (i, row) in rows.iter().enumerate() {
            let distinct: BTreeSet<_> = row.iter().collect();
            if distinct.len() != 4 {
                return Err(format!(
                    "preference row for {} is not a permutation of the four methods",
                    LearningStyle::ALL[i]
                ));
            }
        }
        Ok(Self { rows })
    }

    pub fn preference(&self, style: LearningStyle) -> &[Method; 4] {
        &self.rows[style.index()]
    }

    /// 0 for the most preferred method.
    pub fn rank(&self, style: LearningStyle, method: Method) -> usize {
        self.rows[style.index()]
            .iter()
            .position(|&m| m == method)
            .expect("rows are permutations")
    }

    pub fn favourite(&self, style: LearningStyle) -> Method {
        self.rows[style.index()][0]
    }

    /// Every row reversed, so each style is served its least preferred
    /// method first.
    pub fn reversed(&self) -> Self {
        let mut rows = self.rows;
        for r in &mut rows {
            r.reverse();
        }
        Self { rows }
    }
}

impl Default for MethodMatrix {
    fn default() -> Self {
        use Method::*;
        Self {
            rows: [
                [Game, DynamicView, Film, Text],  // SS
                [DynamicView, Text, Film, Game],  // GOA
                [Film, DynamicView, Text, Game],  // EIA
                [Text, DynamicView, Film, Game],  // CA
                [Text, Film, DynamicView, Game],  // DLA
            ],
        }
    }
}

impl TryFrom<BTreeMap<LearningStyle, Vec<Method>>> for MethodMatrix {
    type Error = String;

    fn try_from(map: BTreeMap<LearningStyle, Vec<Method>>) -> Result<Self, String> {
        let mut rows = [[Method::Text; 4]; 5];
        for s in LearningStyle::ALL {
            let row = map.get(&s).ok_or_else(|| format!("missing preference row for {s}"))?;
            rows[s.index()] = row
                .as_slice()
                .try_into()
                .map_err(|_| format!("preference row for {s} must list exactly four methods"))?;
        }
        Self::new(rows)
    }
}

impl From<MethodMatrix> for BTreeMap<LearningStyle, Vec<Method>> {
    fn from(m: MethodMatrix) -> Self {
        LearningStyle::ALL
            .iter()
            .map(|&s| (s, m.rows[s.index()].to_vec()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseMeta {
    pub version: u32,
}

/// On-disk shape of a course file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseFile {
    pub meta: CourseMeta,
    pub concepts: Vec<Concept>,
    pub variants: Vec<ContentVariant>,
    pub questions: Vec<Question>,
}

/// Loaded course. Immutable once built.
#[derive(Debug, Clone)]
pub struct CourseGraph {
    meta: CourseMeta,
    concepts: Vec<Concept>,
    concept_index: HashMap<ConceptId, usize>,
    variants: Vec<ContentVariant>,
    questions: QuestionBank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Version,
    DuplicateId,
    NoSections,
    WeightRange,
    SelfPrerequisite,
    UnknownReference,
    Cycle,
    EmptyBody,
    NonPrintable,
    FallbackMissing,
    DifficultyRange,
    PointsRange,
    ChoiceCount,
    CorrectIndex,
    CoverageCell,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Self::Version => "version",
            Self::DuplicateId => "duplicate-id",
            Self::NoSections => "no-sections",
            Self::WeightRange => "weight-range",
            Self::SelfPrerequisite => "self-prerequisite",
            Self::UnknownReference => "unknown-reference",
            Self::Cycle => "cycle",
            Self::EmptyBody => "empty-body",
            Self::NonPrintable => "non-printable",
            Self::FallbackMissing => "fallback-missing",
            Self::DifficultyRange => "difficulty-range",
            Self::PointsRange => "points-range",
            Self::ChoiceCount => "choice-count",
            Self::CorrectIndex => "correct-index",
            Self::CoverageCell => "coverage-cell",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub entity: String,
    pub detail: String,
}

impl Violation {
    fn new(rule: Rule, entity: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            rule,
            entity: entity.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.entity, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CourseError {
    #[error("course file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("course failed validation with {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRules {
    pub min_questions_per_cell: usize,
}

impl Default for ValidationRules {
    fn default() -> Self {
        Self {
            min_questions_per_cell: DEFAULT_MIN_QUESTIONS_PER_CELL,
        }
    }
}

/// Parses and validates a course file with the default rules.
pub fn load_course(bytes: &[u8]) -> Result<CourseGraph, CourseError> {
    load_course_with(bytes, ValidationRules::default())
}

pub fn load_course_with(bytes: &[u8], rules: ValidationRules) -> Result<CourseGraph, CourseError> {
    let file = parse_course_file(bytes)?;
    let graph = CourseGraph::from_file(file);
    let violations = validate_course(&graph, rules);
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(CourseError::Invalid(violations))
    }
}

pub fn parse_course_file(bytes: &[u8]) -> Result<CourseFile, CourseError> {
    serde_json::from_slice(bytes).map_err(|e| CourseError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl CourseGraph {
    /// Builds the graph without validating it.
    pub fn from_file(file: CourseFile) -> Self {
        let mut concept_index = HashMap::new();
        for (i, c) in file.concepts.iter().enumerate() {
            concept_index.entry(c.id.clone()).or_insert(i);
        }
        Self {
            meta: file.meta,
            concepts: file.concepts,
            concept_index,
            variants: file.variants,
            questions: QuestionBank::new(file.questions),
        }
    }

    pub fn to_file(&self) -> CourseFile {
        CourseFile {
            meta: self.meta.clone(),
            concepts: self.concepts.clone(),
            variants: self.variants.clone(),
            questions: self.questions.iter().cloned().collect(),
        }
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, id: &ConceptId) -> Option<&Concept> {
        self.concept_index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn variants(&self) -> &[ContentVariant] {
        &self.variants
    }

    pub fn variant(&self, r: VariantRef) -> Option<&ContentVariant> {
        self.variants.get(r.0)
    }

    pub fn questions(&self) -> &QuestionBank {
        &self.questions
    }

    /// Variants of `concept` in file order.
    pub fn variants_of<'a>(
        &'a self,
        concept: &'a ConceptId,
    ) -> impl Iterator<Item = (VariantRef, &'a ContentVariant)> + 'a {
        self.variants
            .iter()
            .enumerate()
            .filter(move |(_, v)| &v.concept_id == concept)
            .map(|(i, v)| (VariantRef(i), v))
    }

    pub fn available_methods(&self, concept: &ConceptId) -> BTreeSet<Method> {
        self.variants_of(concept).map(|(_, v)| v.method).collect()
    }

    /// Eligible concepts in course order: not finished, prerequisites all
    /// finished. Deferred concepts go to the back of the queue.
    pub fn next_concepts(
        &self,
        completed: &BTreeSet<ConceptId>,
        deferred: &[ConceptId],
    ) -> Vec<ConceptId> {
        let eligible = self.concepts.iter().filter(|c| {
            !completed.contains(&c.id) && c.prerequisites.iter().all(|p| completed.contains(p))
        });
        let (later, mut now): (Vec<_>, Vec<_>) = eligible
            .map(|c| c.id.clone())
            .partition(|id| deferred.contains(id));
        let mut later = later;
        later.sort_by_key(|id| deferred.iter().position(|d| d == id));
        now.extend(later);
        now
    }

    /// Picks the presentation of `concept` for learner `m`.
    ///
    /// Among variants whose method is not excluded and whose level band fits
    /// the learner, the method ranked highest for the dominant style wins,
    /// then style affinity, then whole-concept over per-section, then file
    /// order. Without such a candidate the Text variant is returned, even
    /// when Text itself is excluded.
    pub fn select_variant(
        &self,
        concept: &ConceptId,
        m: &LearnerModel,
        exclude: &BTreeSet<Method>,
        matrix: &MethodMatrix,
    ) -> Option<VariantRef> {
        let style = m.style_profile.dominant;
        let level = m.learner_level;
        let primary = self
            .variants_of(concept)
            .filter(|(_, v)| !exclude.contains(&v.method) && v.suits_level(level))
            .min_by_key(|(r, v)| {
                (
                    matrix.rank(style, v.method),
                    !v.style_affinity.contains(&style),
                    v.section_id.is_some(),
                    r.0,
                )
            });
        if let Some((r, _)) = primary {
            return Some(r);
        }
        self.variants_of(concept)
            .filter(|(_, v)| v.method == Method::Text)
            .min_by_key(|(r, v)| {
                (
                    exclude.contains(&v.method),
                    !v.suits_level(level),
                    v.section_id.is_some(),
                    r.0,
                )
            })
            .map(|(r, _)| r)
    }

    /// Best variant with the given method, if the concept has one.
    pub fn variant_with_method(
        &self,
        concept: &ConceptId,
        m: &LearnerModel,
        method: Method,
    ) -> Option<VariantRef> {
        let style = m.style_profile.dominant;
        self.variants_of(concept)
            .filter(|(_, v)| v.method == method)
            .min_by_key(|(r, v)| {
                (
                    !v.suits_level(m.learner_level),
                    !v.style_affinity.contains(&style),
                    v.section_id.is_some(),
                    r.0,
                )
            })
            .map(|(r, _)| r)
    }
}

/// Checks every course invariant. An empty result means the course is valid.
pub fn validate_course(g: &CourseGraph, rules: ValidationRules) -> Vec<Violation> {
    let mut out = Vec::new();
    if g.meta.version != COURSE_VERSION {
        out.push(Violation::new(
            Rule::Version,
            "meta.version",
            format!("unsupported version {}, expected {COURSE_VERSION}", g.meta.version),
        ));
    }

    let mut concept_ids = BTreeSet::new();
    for c in &g.concepts {
        if !concept_ids.insert(&c.id) {
            out.push(Violation::new(Rule::DuplicateId, c.id.as_str(), "concept id repeated"));
        }
        if c.sections.is_empty() {
            out.push(Violation::new(Rule::NoSections, c.id.as_str(), "concept has no sections"));
        }
        let mut section_ids = BTreeSet::new();
        for s in &c.sections {
            let entity = format!("{}/{}", c.id, s.id);
            if !section_ids.insert(&s.id) {
                out.push(Violation::new(Rule::DuplicateId, &entity, "section id repeated"));
            }
            if !(1..=10).contains(&s.importance_weight) {
                out.push(Violation::new(
                    Rule::WeightRange,
                    &entity,
                    format!("importance_weight {} outside 1..=10", s.importance_weight),
                ));
            }
        }
        for p in &c.prerequisites {
            if p == &c.id {
                out.push(Violation::new(
                    Rule::SelfPrerequisite,
                    c.id.as_str(),
                    "concept lists itself as prerequisite",
                ));
            } else if g.concept(p).is_none() {
                out.push(Violation::new(
                    Rule::UnknownReference,
                    c.id.as_str(),
                    format!("unknown prerequisite {p}"),
                ));
            }
        }
    }

    for cycle in find_cycles(g) {
        let names: Vec<_> = cycle.iter().map(|c| c.as_str()).collect();
        out.push(Violation::new(
            Rule::Cycle,
            names.join("<->"),
            "prerequisite cycle",
        ));
    }

    for (i, v) in g.variants.iter().enumerate() {
        let entity = format!("variant#{i}");
        let Some(c) = g.concept(&v.concept_id) else {
            out.push(Violation::new(
                Rule::UnknownReference,
                &entity,
                format!("unknown concept {}", v.concept_id),
            ));
            continue;
        };
        if let Some(s) = &v.section_id {
            if c.section(s).is_none() {
                out.push(Violation::new(
                    Rule::UnknownReference,
                    &entity,
                    format!("unknown section {}/{s}", c.id),
                ));
            }
        }
        if v.body.is_empty() || v.body.iter().any(|p| p.is_empty()) {
            out.push(Violation::new(Rule::EmptyBody, &entity, "body must have non-empty pages"));
        }
        if v.method == Method::Text && v.body.iter().any(|p| !p.chars().all(is_printable)) {
            out.push(Violation::new(
                Rule::NonPrintable,
                &entity,
                "text pages must be printable 7-bit characters",
            ));
        }
    }

    for c in &g.concepts {
        for s in &c.sections {
            let covered = g
                .variants_of(&c.id)
                .any(|(_, v)| v.method == Method::Text && v.covers(&s.id));
            if !covered {
                out.push(Violation::new(
                    Rule::FallbackMissing,
                    format!("{}/{}", c.id, s.id),
                    "no text variant covers this section",
                ));
            }
        }
    }

    let mut qids = BTreeSet::new();
    for q in g.questions.iter() {
        let entity = q.id.as_str();
        if !qids.insert(&q.id) {
            out.push(Violation::new(Rule::DuplicateId, entity, "question id repeated"));
        }
        match g.concept(&q.concept_id) {
            None => out.push(Violation::new(
                Rule::UnknownReference,
                entity,
                format!("unknown concept {}", q.concept_id),
            )),
            Some(c) if c.section(&q.section_id).is_none() => out.push(Violation::new(
                Rule::UnknownReference,
                entity,
                format!("unknown section {}/{}", c.id, q.section_id),
            )),
            Some(_) => {}
        }
        if !DIFFICULTIES.contains(&q.difficulty) {
            out.push(Violation::new(
                Rule::DifficultyRange,
                entity,
                format!("difficulty {} outside 1..=5", q.difficulty),
            ));
        }
        if !(1..=10).contains(&q.points) {
            out.push(Violation::new(
                Rule::PointsRange,
                entity,
                format!("points {} outside 1..=10", q.points),
            ));
        }
        if !(2..=4).contains(&q.choices.len()) {
            out.push(Violation::new(
                Rule::ChoiceCount,
                entity,
                format!("{} choices, expected 2 to 4", q.choices.len()),
            ));
        }
        if q.correct >= q.choices.len() {
            out.push(Violation::new(
                Rule::CorrectIndex,
                entity,
                format!("correct index {} out of range", q.correct),
            ));
        }
        let texts = std::iter::once(&q.prompt).chain(&q.choices);
        if texts.into_iter().any(|t| t.is_empty() || !t.chars().all(is_printable)) {
            out.push(Violation::new(
                Rule::NonPrintable,
                entity,
                "prompt and choices must be non-empty printable 7-bit text",
            ));
        }
    }

    for c in &g.concepts {
        for s in &c.sections {
            for d in DIFFICULTIES {
                let n = g.questions.in_cell(&c.id, &s.id, d).count();
                if n < rules.min_questions_per_cell {
                    out.push(Violation::new(
                        Rule::CoverageCell,
                        format!("{}/{}/{d}", c.id, s.id),
                        format!("{n} question(s), need {}", rules.min_questions_per_cell),
                    ));
                }
            }
        }
    }
    out
}

/// Strongly connected components of the prerequisite graph that contain a
/// cycle, each listed in course order.
fn find_cycles(g: &CourseGraph) -> Vec<Vec<ConceptId>> {
    // Tarjan over concept indices; edges point from a concept to its prerequisites.
    struct Tarjan {
        adj: Vec<Vec<usize>>,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    impl Tarjan {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for i in 0..self.adj[v].len() {
                let w = self.adj[v][i];
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    Some(_) => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                if comp.len() > 1 {
                    comp.sort_unstable();
                    self.out.push(comp);
                }
            }
        }
    }

    let n = g.concepts.len();
    let adj = g
        .concepts
        .iter()
        .map(|c| {
            c.prerequisites
                .iter()
                .filter(|p| *p != &c.id)
                .filter_map(|p| g.concept_index.get(p).copied())
                .collect()
        })
        .collect();
    let mut t = Tarjan {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let mut comps = t.out;
    comps.sort();
    comps
        .into_iter()
        .map(|c| c.into_iter().map(|i| g.concepts[i].id.clone()).collect())
        .collect()
}
