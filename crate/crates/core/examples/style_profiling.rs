//! Scores profiler answers into a style profile and shows how the dominant
//! style picks a content variant.

use std::collections::BTreeSet;

use tutor_core::learner::{profile_styles, ProfilerAnswer, Questionnaire};
use tutor_core::{load_course, ConceptId, LearnerId, LearnerModel, LearningStyle, TutorConfig};

fn main() {
    let q = Questionnaire::from_json(include_bytes!("../fixtures/profiler.json")).unwrap();
    let course = load_course(include_bytes!("../fixtures/sample_course.json")).unwrap();
    let matrix = TutorConfig::default().method_matrix;

    // Mostly game-oriented with a few simulation answers.
    let answers: Vec<ProfilerAnswer> = (1..=10)
        .map(|i| ProfilerAnswer::new(format!("q{i}"), if i <= 7 { "b" } else { "a" }))
        .collect();
    let profile = profile_styles(&answers, &q).unwrap();
    println!("weights {:?}", profile.weights);
    println!("dominant {}", profile.dominant);

    let intro = ConceptId::new("intro");
    for style in LearningStyle::ALL {
        let mut m = LearnerModel::new(LearnerId::new("demo"));
        m.style_profile = profile_styles(&q.answers_for(style), &q).unwrap();
        let r = course.select_variant(&intro, &m, &BTreeSet::new(), &matrix).unwrap();
        let v = course.variant(r).unwrap();
        println!("{:<33} prefers {:?}, gets {}", style.name(), matrix.preference(style), v.method.label());
    }
}
