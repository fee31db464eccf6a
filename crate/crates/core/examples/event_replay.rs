//! Persists a learner's events to an append-only log, snapshots, keeps
//! going, then rebuilds the learner three ways and compares.

use std::sync::Arc;

use tutor_core::learner::Questionnaire;
use tutor_core::session::{Input, LearnerState, Prompt, SessionState, Tutor};
use tutor_core::store::EventStore;
use tutor_core::{load_course, LearnerId, LearningStyle, TutorConfig};

/// Runs one session to the end on the first eligible concept. Pre-test
/// answers are all wrong so the learner sees content; post-test answers
/// are all right.
fn one_session(t: &Tutor, store: &EventStore, st: &mut LearnerState, seed: u64) {
    let lid = st.model.learner_id.clone();
    let concept = t.eligible(&st.model)[0].clone();
    let (ev, mut prompt) = st.start(t, &concept, seed).unwrap();
    store.append_batch(&lid, None, &ev).unwrap();
    while st.active_session().is_some() {
        let input = match &prompt {
            Prompt::Question { question_id, choices, .. } => {
                let key = t.course().questions().get(question_id).unwrap().correct;
                let pre = st.session.as_ref().unwrap().state == SessionState::PreTest;
                Input::Answer(if pre { (key + 1) % choices.len() } else { key })
            }
            _ => Input::Next,
        };
        let (ev, prompts) = st.submit(t, input).unwrap();
        store.append_batch(&lid, None, &ev).unwrap();
        prompt = prompts.last().unwrap().clone();
    }
    println!("{concept}: {:?}", st.session.as_ref().unwrap().final_status().unwrap());
}

fn main() {
    let tutor = Tutor::new(
        Arc::new(load_course(include_bytes!("../fixtures/sample_course.json")).unwrap()),
        TutorConfig::default(),
    );
    let q = Questionnaire::from_json(include_bytes!("../fixtures/profiler.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let store = EventStore::open(dir.path()).unwrap();
    let lid = LearnerId::new("L000001");

    let mut st = LearnerState::new(lid.clone());
    store.append_batch(&lid, Some(1), &st.register("Ada")).unwrap();
    let (_, ev) = st.submit_profile(&q.answers_for(LearningStyle::EIA), &q).unwrap();
    store.append_batch(&lid, None, &ev).unwrap();
    one_session(&tutor, &store, &mut st, 1);
    let snap = store.snapshot(&tutor, &lid).unwrap();
    println!("snapshot as of sequence {}", snap.as_of_seq);
    one_session(&tutor, &store, &mut st, 2);

    for line in store.read_lines(&lid).unwrap().iter().take(3) {
        println!("{line}");
    }
    println!("... {} lines in {}", store.read_lines(&lid).unwrap().len(), store.log_path(&lid).display());

    let genesis = store.load_from_genesis(&tutor, &lid).unwrap();
    let fast = store.load_learner(&tutor, &lid).unwrap();
    println!("genesis replay equals memory: {}", genesis == st);
    println!("snapshot plus tail equals genesis: {}", fast == genesis);
}
