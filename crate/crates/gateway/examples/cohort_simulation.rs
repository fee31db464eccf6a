//! Runs matched and mismatched cohorts at a few ability levels and prints
//! their summaries, next to the exact expected score of one fixed plan.
//!
//! cargo run --release -p tutor-gateway --example cohort_simulation

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use tutor_core::assessment::plan_with_band;
use tutor_core::learner::Questionnaire;
use tutor_core::{load_course, ConceptId, LearningStyle, Phase, TutorConfig};
use tutor_gateway::sim::{mean_score, plan_items, run_cohort, score_distribution, CohortSpec, SimulatedLearner};

fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)).unwrap()
}

fn main() {
    let course = Arc::new(load_course(&fixture("sample_course.json")).unwrap());
    let profiler = Questionnaire::from_json(&fixture("profiler.json")).unwrap();
    let cfg = TutorConfig::default();

    let concept = course.concept(&ConceptId::new("intro")).unwrap();
    let band = cfg.difficulty_bands.band(None);
    let plan = plan_with_band(course.questions(), concept, &BTreeSet::new(), band, Phase::PreTest, 4, 1).unwrap();
    for ability in [-2.0, 0.0, 2.0] {
        let learner = SimulatedLearner::uniform(ability, LearningStyle::SS, 0.0, 0);
        let dist = score_distribution(&plan_items(&plan, course.questions(), &learner, false));
        println!("ability {ability:+.1}: expected pre-test score {:.2}", mean_score(&dist));
    }

    println!("{:>7} {:>11} {:>9} {:>10} {:>9} {:>7} {:>7}", "ability", "arm", "mean_post", "completion", "attempts", "skip", "defer");
    for ability_mean in [-1.0, 0.0, 2.0] {
        for style_match in [true, false] {
            let spec = CohortSpec {
                learners: 300,
                ability_mean,
                style_match,
                seed: 7,
                ..CohortSpec::default()
            };
            let s = run_cohort(course.clone(), &cfg, &profiler, &spec).unwrap().summary;
            println!(
                "{ability_mean:>+7.1} {:>11} {:>9.2} {:>10.3} {:>9.3} {:>7.3} {:>7.3}",
                if style_match { "matched" } else { "mismatched" },
                s.mean_posttest_score.unwrap_or(f64::NAN),
                s.completion_rate,
                s.mean_attempts.unwrap_or(f64::NAN),
                s.skip_rate,
                s.defer_rate
            );
        }
    }
}
