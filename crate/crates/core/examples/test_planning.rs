//! Plans a pre-test and successive post-tests for one concept, showing the
//! difficulty band per learner level and that no item is asked twice.

use std::collections::BTreeSet;

use tutor_core::assessment::{plan_with_band, DifficultyBands};
use tutor_core::{load_course, ConceptId, LearnerLevel, Phase};

fn main() {
    let course = load_course(include_bytes!("../fixtures/sample_course.json")).unwrap();
    let bank = course.questions();
    let concept = course.concept(&ConceptId::new("mixed")).unwrap();
    let bands = DifficultyBands::default();

    let count = 2 * concept.sections.len();
    let pre = plan_with_band(bank, concept, &BTreeSet::new(), bands.band(None), Phase::PreTest, count, 42).unwrap();
    let show = |label: &str, items: &[tutor_core::QuestionId]| {
        let desc: Vec<String> = items
            .iter()
            .map(|id| {
                let q = bank.get(id).unwrap();
                format!("{}({}, d{})", q.id, q.section_id, q.difficulty)
            })
            .collect();
        println!("{label:<22} {}", desc.join(" "));
    };
    show("pre-test, unlevelled", &pre.items);

    for level in LearnerLevel::ALL {
        let mut asked: BTreeSet<_> = pre.items.iter().cloned().collect();
        for attempt in 1..=3u64 {
            match plan_with_band(bank, concept, &asked, bands.band(Some(level)), Phase::PostTest, count, 42 + attempt) {
                Ok(plan) => {
                    show(&format!("{level} #{attempt}"), &plan.items);
                    asked.extend(plan.items);
                }
                Err(e) => {
                    println!("{:<22} {e}", format!("{level} #{attempt}"));
                    break;
                }
            }
        }
    }
}
