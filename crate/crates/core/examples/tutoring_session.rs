//! Walks one learner through a full session on the first concept: a weak
//! pre-test, content pages, then post-tests until the concept closes.

use std::sync::Arc;

use tutor_core::channel::render_prompt;
use tutor_core::session::{Input, LearnerState, Prompt, Tutor};
use tutor_core::{load_course, ConceptId, LearnerId, LearningStyle, StyleProfile, TutorConfig};

fn main() {
    let course = load_course(include_bytes!("../fixtures/sample_course.json")).unwrap();
    let tutor = Tutor::new(Arc::new(course), TutorConfig::default());
    let mut st = LearnerState::new(LearnerId::new("demo"));
    st.model.style_profile = StyleProfile::pure(LearningStyle::GOA);

    let (_, mut prompt) = st.start(&tutor, &ConceptId::new("intro"), 7).unwrap();
    let mut n = 0;
    while st.active_session().is_some() {
        println!("> {}", render_prompt(&prompt).replace('\n', " | "));
        let input = match &prompt {
            Prompt::Question { question_id, choices, .. } => {
                let key = tutor.course().questions().get(question_id).unwrap().correct;
                // Wrong on every first-round item, right afterwards.
                n += 1;
                Input::Answer(if n <= 4 { (key + 1) % choices.len() } else { key })
            }
            _ => Input::Next,
        };
        let (events, prompts) = st.submit(&tutor, input).unwrap();
        for e in &events {
            if !e.is_input() {
                println!("  event {}", e.kind());
            }
        }
        for p in &prompts[..prompts.len() - 1] {
            println!("> {}", render_prompt(p));
        }
        prompt = prompts.last().unwrap().clone();
    }
    println!("> {}", render_prompt(&prompt));
    let s = st.session.as_ref().unwrap();
    println!("methods delivered: {:?}", s.methods_delivered);
    println!("learner level now {:?}", st.model.learner_level);
}
