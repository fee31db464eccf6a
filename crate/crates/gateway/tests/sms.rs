mod common;

use tutor_core::channel::{reassemble, Segment, SEGMENT_LIMIT};
use tutor_core::session::{Input, LearnerState};
use tutor_core::{ConceptId, LearnerId, Prompt, SessionId};
use tutor_gateway::Gateway;

/// The letter that answers the pending question, right or wrong.
fn letter(gw: &Gateway, sid: &SessionId, right: bool) -> (String, usize) {
    let (prompt, _) = gw.session_prompt(sid).unwrap();
    let Prompt::Question { question_id, .. } = prompt else { panic!("no question pending") };
    let key = gw.tutor().course().questions().get(&question_id).unwrap().correct;
    let idx = if right { key } else { (key + 1) % 2 };
    (((b'A' + idx as u8) as char).to_string(), idx)
}

#[test]
fn scripted_conversation_completes_a_concept() {
    let dir = tempfile::tempdir().unwrap();
    let gw = common::gateway(dir.path());
    let from = "+15550100";
    let lid = Gateway::sms_learner(from).unwrap();
    let sid = SessionId::for_learner(&lid, 1);
    let mut inputs = vec![];
    let mut all_out = vec![];
    let mut send = |text: &str| {
        let out = gw.sms_inbound(from, text).unwrap();
        assert!(out.iter().all(|s| s.chars().count() <= SEGMENT_LIMIT), "{out:?}");
        all_out.extend(out.clone());
        out
    };

    let help = send("help");
    assert_eq!(reassemble(&help.iter().map(|p| Segment::from_wire(p)).collect::<Vec<_>>()).unwrap(), tutor_core::channel::HELP_TEXT);
    let first = send("START");
    assert!(first[0].ends_with("Reply A-D"), "{first:?}");

    // Pre-test: every answer wrong.
    let mut points_post = vec![];
    loop {
        let (l, i) = letter(&gw, &sid, false);
        inputs.push(Input::Answer(i));
        let out = send(&l.to_lowercase());
        if out[0].starts_with("Pre-test:") {
            assert_eq!(out[0], "Pre-test: 0/100 (Weak)");
            break;
        }
    }
    // Content pages until the post-test begins.
    loop {
        inputs.push(Input::Next);
        let out = send(" next ");
        if out.last().unwrap().ends_with("Reply A-D") {
            break;
        }
    }
    // Post-test: first item wrong, the rest right.
    let mut first_item = true;
    let last = loop {
        let (prompt, _) = gw.session_prompt(&sid).unwrap();
        let Prompt::Question { question_id, .. } = prompt else { unreachable!() };
        points_post.push((gw.tutor().course().questions().get(&question_id).unwrap().points as u32, !first_item));
        let (l, i) = letter(&gw, &sid, !first_item);
        first_item = false;
        inputs.push(Input::Answer(i));
        let out = send(&l);
        if out[0].starts_with("Post-test:") {
            break out;
        }
    };
    // Hand grading: earned over total, rounded half up.
    let total: u32 = points_post.iter().map(|p| p.0).sum();
    let earned: u32 = points_post.iter().filter(|p| p.1).map(|p| p.0).sum();
    let score = (200 * earned + total) / (2 * total);
    let label = match score {
        86..=100 => "Excellent",
        71..=85 => "Very good",
        51..=70 => "Good",
        31..=50 => "Average",
        _ => "Weak",
    };
    assert_eq!(last[0], format!("Post-test: {score}/100 ({label})"));
    assert!(score >= 51, "script should pass the post-test, scored {score}");
    assert_eq!(last, vec![format!("Post-test: {score}/100 ({label})"), format!("Result: concept completed ({label})")]);

    let status = send("status");
    assert!(status[0].starts_with("Level: "), "{status:?}");
    let stray = send("B");
    assert_eq!(stray, vec!["No concept in progress. Reply START to begin."]);

    // The stored log equals the same inputs sent straight to the engine.
    let mut direct = LearnerState::new(LearnerId::new(lid.as_str()));
    let mut trace = direct.register(from);
    let (ev, _) = direct
        .start(gw.tutor(), &ConceptId::new("intro"), gw.session_seed(&sid))
        .unwrap();
    trace.extend(ev);
    for i in inputs {
        trace.extend(direct.submit(gw.tutor(), i).unwrap().0);
    }
    let stored: Vec<_> = gw.store().read_log(&lid).unwrap().into_iter().map(|r| r.body).collect();
    assert_eq!(stored, trace);
}

#[test]
fn odd_messages_get_replies() {
    let dir = tempfile::tempdir().unwrap();
    let gw = common::gateway(dir.path());
    let from = "555-0199";
    assert_eq!(gw.sms_inbound(from, "hello").unwrap(), vec!["Unknown command. Reply HELP for the list."]);
    assert_eq!(gw.sms_inbound(from, "START nowhere").unwrap(), vec!["Unknown concept NOWHERE."]);
    assert_eq!(gw.sms_inbound(from, "START 2").unwrap(), vec!["Concept sums is not available yet."]);
    let q = gw.sms_inbound(from, "start intro").unwrap();
    assert!(q.last().unwrap().ends_with("Reply A-D"));
    assert_eq!(gw.sms_inbound(from, "NEXT").unwrap(), vec!["Reply with a letter to answer."]);
    let again = gw.sms_inbound(from, "START").unwrap();
    assert_eq!(again[0], "A concept is already in progress.");
    assert_eq!(again[1..], q[..]);
    assert!(gw.sms_inbound("nobody", "HELP").is_err());
}
