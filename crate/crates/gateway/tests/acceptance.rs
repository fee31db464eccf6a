//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed or overran its time budget.
//!
//! `cargo test -p tutor-gateway --test acceptance`

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;
use tutor_core::assessment::{plan_with_band, DifficultyBands, PlanError, Question, QuestionBank, Scope, TestPlan};
use tutor_core::channel::{reassemble, segment_text, Segment, SEGMENT_LIMIT};
use tutor_core::kb::{Concept, Section};
use tutor_core::learner::classify_knowledge;
use tutor_core::session::{FinalStatus, Input, LearnerState, Prompt, SessionState, Tutor};
use tutor_core::store::EventStore;
use tutor_core::{
    ConceptId, KnowledgeLevel, LearnerId, LearnerLevel, LearningStyle, Phase, QuestionId, SectionId, SessionId, StyleProfile,
    TutorConfig,
};
use tutor_gateway::http::router;
use tutor_gateway::sim::{mean_score, plan_items, run_cohort, sample_score, score_distribution, CohortSpec, SimulatedLearner};
use tutor_gateway::Gateway;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tutor() -> Tutor {
    Tutor::new(common::course(), TutorConfig::default())
}

// ---------------------------------------------------------------- AC-1

/// Expected level for every score 0..=100, twenty per row.
const LEVELS: [&str; 6] = [
    "WWWWWWWWWWWWWWWWWWWW", // 0
    "WWWWWWWWWWWAAAAAAAAA", // 20
    "AAAAAAAAAAAGGGGGGGGG", // 40
    "GGGGGGGGGGGVVVVVVVVV", // 60
    "VVVVVVEEEEEEEEEEEEEE", // 80
    "E",                    // 100
];

fn ac1() -> Outcome {
    let table: Vec<char> = LEVELS.concat().chars().collect();
    ensure(table.len() == 101, || format!("table has {} entries", table.len()))?;
    for (score, code) in table.iter().enumerate() {
        let want = match code {
            'W' => KnowledgeLevel::Weak,
            'A' => KnowledgeLevel::Average,
            'G' => KnowledgeLevel::Good,
            'V' => KnowledgeLevel::VeryGood,
            'E' => KnowledgeLevel::Excellent,
            _ => unreachable!(),
        };
        let got = classify_knowledge(score as u32).map_err(|e| format!("{score}: {e}"))?;
        ensure(got == want, || format!("score {score}: {got:?}, expected {want:?}"))?;
    }
    for bad in [101, 150, u32::MAX] {
        ensure(classify_knowledge(bad).is_err(), || format!("{bad} accepted"))?;
    }
    Ok("101/101 scores match, out-of-range rejected".into())
}

// ---------------------------------------------------------------- AC-2

struct Case {
    weights: Vec<u8>,
    questions: Vec<(usize, u8)>,
    asked: Vec<bool>,
    level: Option<LearnerLevel>,
    count: usize,
    seed: u64,
}

fn random_case(rng: &mut ChaCha8Rng, max_questions: usize) -> Case {
    let k = rng.random_range(1..=3);
    let n = rng.random_range(0..=max_questions);
    let level = match rng.random_range(0..5) {
        4 => None,
        i => Some(LearnerLevel::ALL[i]),
    };
    Case {
        weights: (0..k).map(|_| rng.random_range(1..=10)).collect(),
        questions: (0..n).map(|_| (rng.random_range(0..k), rng.random_range(1..=5))).collect(),
        asked: (0..n).map(|_| rng.random_bool(0.3)).collect(),
        level,
        count: k + rng.random_range(0..=3),
        seed: rng.random(),
    }
}

fn build(c: &Case) -> (Concept, QuestionBank, BTreeSet<QuestionId>) {
    let concept = Concept {
        id: ConceptId::new("c"),
        title: "c".into(),
        prerequisites: vec![],
        sections: c
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Section {
                id: SectionId::new(format!("s{i}")),
                title: format!("s{i}"),
                importance_weight: w,
            })
            .collect(),
    };
    let questions: Vec<Question> = c
        .questions
        .iter()
        .enumerate()
        .map(|(n, &(s, d))| Question {
            id: QuestionId::new(format!("q{n:02}")),
            concept_id: ConceptId::new("c"),
            section_id: SectionId::new(format!("s{s}")),
            difficulty: d,
            points: 1 + (n % 4) as u8,
            scope: if n % 2 == 0 { Scope::Conceptual } else { Scope::Objective },
            prompt: format!("q{n}"),
            choices: vec!["x".into(), "y".into(), "z".into()],
            correct: n % 3,
        })
        .collect();
    let asked = questions.iter().zip(&c.asked).filter(|(_, a)| **a).map(|(q, _)| q.id.clone()).collect();
    (concept, QuestionBank::new(questions), asked)
}

fn quota(weights: &[u8], count: usize) -> Vec<usize> {
    let k = weights.len();
    let mut rank: Vec<usize> = (0..k).collect();
    rank.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut q = vec![count / k; k];
    for &i in &rank[..count % k] {
        q[i] += 1;
    }
    q
}

fn section_index(q: &Question) -> usize {
    q.section_id.as_str()[1..].parse().unwrap()
}

fn check_plan(
    plan: &TestPlan,
    bank: &QuestionBank,
    asked: &BTreeSet<QuestionId>,
    band: &BTreeSet<u8>,
    weights: &[u8],
    count: usize,
) -> Result<(), String> {
    let items: Vec<&Question> = plan
        .items
        .iter()
        .map(|id| bank.get(id).ok_or(format!("{id} not in bank")))
        .collect::<Result<_, _>>()?;
    ensure(items.len() == count, || format!("{} items, wanted {count}", items.len()))?;
    ensure(plan.items.iter().collect::<BTreeSet<_>>().len() == count, || "repeated item".into())?;
    if let Some(q) = items.iter().find(|q| asked.contains(&q.id)) {
        return Err(format!("{} was already asked", q.id));
    }
    if let Some(q) = items.iter().find(|q| !band.contains(&q.difficulty)) {
        return Err(format!("{} has difficulty {} outside {band:?}", q.id, q.difficulty));
    }
    let mut per: Vec<Vec<&Question>> = vec![vec![]; weights.len()];
    for q in &items {
        per[section_index(q)].push(q);
    }
    let counts: Vec<usize> = per.iter().map(Vec::len).collect();
    let mx = *counts.iter().max().unwrap();
    let mn = *counts.iter().min().unwrap();
    ensure(mx - mn <= 1, || format!("section counts {counts:?} spread more than 1"))?;
    ensure(counts == quota(weights, count), || format!("section counts {counts:?} ignore importance"))?;
    for (s, picked) in per.iter().enumerate() {
        let mut by_d: BTreeMap<u8, usize> = BTreeMap::new();
        for q in picked {
            *by_d.entry(q.difficulty).or_default() += 1;
        }
        let top = by_d.values().copied().max().unwrap_or(0);
        for &d in band {
            let offered = bank
                .iter()
                .filter(|q| section_index(q) == s && q.difficulty == d && !asked.contains(&q.id))
                .count();
            let used = by_d.get(&d).copied().unwrap_or(0);
            ensure(used >= offered.min(top.saturating_sub(1)), || {
                format!("section {s}: difficulty {d} underused while others repeat")
            })?;
        }
        ensure(picked.windows(2).all(|w| w[0].difficulty <= w[1].difficulty), || {
            format!("section {s} not in ascending difficulty")
        })?;
    }
    let mut expected = vec![];
    for r in 0..mx {
        for p in &per {
            if let Some(q) = p.get(r) {
                expected.push(q.id.clone());
            }
        }
    }
    ensure(expected == plan.items, || "items are not interleaved section by section".into())
}

fn feasible(bank: &QuestionBank, asked: &BTreeSet<QuestionId>, band: &BTreeSet<u8>, weights: &[u8], count: usize) -> bool {
    let all: Vec<&Question> = bank.iter().collect();
    let want = quota(weights, count);
    (0u32..1 << all.len()).any(|mask| {
        if mask.count_ones() as usize != count {
            return false;
        }
        let mut got = vec![0; weights.len()];
        for (i, q) in all.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if asked.contains(&q.id) || !band.contains(&q.difficulty) {
                    return false;
                }
                got[section_index(q)] += 1;
            }
        }
        got == want
    })
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac2);
    let bands = DifficultyBands::default();
    let (mut planned, mut refused) = (0, 0);
    for i in 0..1500 {
        // Small banks are checked against exhaustive search, larger ones
        // against the rules only.
        let small = i < 1000;
        let c = random_case(&mut rng, if small { 12 } else { 40 });
        let (concept, bank, asked) = build(&c);
        let band = bands.band(c.level);
        let result = plan_with_band(&bank, &concept, &asked, band, Phase::PreTest, c.count, c.seed);
        let oracle = small.then(|| feasible(&bank, &asked, band, &c.weights, c.count));
        match result {
            Ok(plan) => {
                planned += 1;
                ensure(oracle != Some(false), || format!("case {i}: planned where search found nothing"))?;
                check_plan(&plan, &bank, &asked, band, &c.weights, c.count).map_err(|e| format!("case {i}: {e}"))?;
                let again = plan_with_band(&bank, &concept, &asked, band, Phase::PreTest, c.count, c.seed).unwrap();
                ensure(again == plan, || format!("case {i}: same seed, different plan"))?;
            }
            Err(PlanError::InsufficientQuestions { .. }) => {
                refused += 1;
                ensure(oracle != Some(true), || format!("case {i}: refused although search found a plan"))?;
            }
            Err(e) => return Err(format!("case {i}: unexpected {e}")),
        }
    }
    Ok(format!("1500 cases, {planned} planned, {refused} refused, 1000 checked exhaustively"))
}

// ---------------------------------------------------------------- AC-3

fn states_through(from: SessionState, to: SessionState, prompts: &[Prompt]) -> Vec<SessionState> {
    let mut path = vec![from];
    for p in prompts {
        let last = *path.last().unwrap();
        match p {
            Prompt::ContentPage { .. } if last != SessionState::Learning => path.push(SessionState::Learning),
            Prompt::Question { .. } if last == SessionState::Learning => path.push(SessionState::PostTest),
            _ => {}
        }
    }
    if *path.last().unwrap() != to {
        path.push(to);
    }
    path
}

fn ac3() -> Outcome {
    let t = tutor();
    let (mut steps, mut sessions, mut rejected, mut skips, mut completions) = (0usize, 0usize, 0usize, 0, 0);
    let mut seed = 0u64;
    while steps < 10_000 || sessions < 100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        seed += 1;
        let mut st = LearnerState::new(LearnerId::new(format!("F{seed}")));
        st.model.style_profile = StyleProfile::pure(LearningStyle::ALL[rng.random_range(0..5)]);
        let skill: f64 = rng.random();
        let mut visited = BTreeSet::new();
        while let Some(concept) = t.eligible(&st.model).into_iter().find(|c| !visited.contains(c)) {
            visited.insert(concept.clone());
            let (_, mut prompt) = st.start(&t, &concept, rng.random()).map_err(|e| e.to_string())?;
            sessions += 1;
            let (mut content, mut pre, mut post) = (false, None, None);
            while !st.session.as_ref().unwrap().state.is_terminal() {
                let input = match rng.random_range(0..10) {
                    0 => Input::Next,
                    1 => Input::Answer(rng.random_range(0..6)),
                    _ => match &prompt {
                        Prompt::Question { question_id, choices, .. } => {
                            let q = t.course().questions().get(question_id).unwrap();
                            Input::Answer(if rng.random::<f64>() < skill { q.correct } else { rng.random_range(0..choices.len()) })
                        }
                        _ => Input::Next,
                    },
                };
                let before = st.clone();
                steps += 1;
                match st.submit(&t, input) {
                    Ok((_, prompts)) => {
                        let from = before.session.as_ref().unwrap().state;
                        let to = st.session.as_ref().unwrap().state;
                        for w in states_through(from, to, &prompts).windows(2) {
                            ensure(w[0].can_transition(w[1]), || format!("illegal {:?} -> {:?}", w[0], w[1]))?;
                        }
                        for p in &prompts {
                            match p {
                                Prompt::ContentPage { .. } => content = true,
                                Prompt::PhaseResult { phase: Phase::PreTest, score, .. } => pre = Some(*score),
                                Prompt::PhaseResult { phase: Phase::PostTest, level, .. } => post = Some(*level),
                                _ => {}
                            }
                        }
                        prompt = prompts.last().unwrap().clone();
                    }
                    Err(_) => {
                        rejected += 1;
                        ensure(st == before, || "rejected input changed state".into())?;
                    }
                }
            }
            let status = st.session.as_ref().unwrap().final_status().unwrap();
            if pre.is_some_and(|s| s >= 86) {
                ensure(status == FinalStatus::Skipped && !content, || format!("pre-test {pre:?} ended {status:?}"))?;
                skips += 1;
            }
            if post.is_some_and(|l| l >= KnowledgeLevel::Good) {
                ensure(status == FinalStatus::Completed, || format!("post-test {post:?} ended {status:?}"))?;
                completions += 1;
            }
        }
    }
    ensure(skips > 0 && completions > 0 && rejected > 0, || {
        format!("fuzz never reached a skip ({skips}), a pass ({completions}) or a rejection ({rejected})")
    })?;
    Ok(format!("{steps} steps, {sessions} sessions, {rejected} rejected inputs, 0 illegal transitions"))
}

// ---------------------------------------------------------------- AC-4

fn play(t: &Tutor, store: &EventStore, lid: &LearnerId, seed: u64, snapshot_after: usize) -> Result<(LearnerState, usize), String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = LearnerState::new(lid.clone());
    store.append_batch(lid, Some(1), &st.register("acceptance")).map_err(|e| err(&e))?;
    let q = common::profiler();
    let (_, ev) = st
        .submit_profile(&q.answers_for(LearningStyle::ALL[rng.random_range(0..5)]), &q)
        .map_err(|e| err(&e))?;
    store.append_batch(lid, None, &ev).map_err(|e| err(&e))?;
    let skill: f64 = rng.random();
    let mut sessions = 0;
    loop {
        // A concept whose bank cannot serve the learner's band is refused
        // up front; try the next one.
        let seed = rng.random();
        let Some((ev, mut prompt)) = t.eligible(&st.model).iter().find_map(|c| st.start(t, c, seed).ok()) else {
            break;
        };
        store.append_batch(lid, None, &ev).map_err(|e| err(&e))?;
        while st.active_session().is_some() {
            let input = match &prompt {
                Prompt::Question { question_id, choices, .. } => {
                    let key = t.course().questions().get(question_id).unwrap().correct;
                    Input::Answer(if rng.random::<f64>() < skill { key } else { rng.random_range(0..choices.len()) })
                }
                _ => Input::Next,
            };
            let (ev, prompts) = st.submit(t, input).map_err(|e| err(&e))?;
            store.append_batch(lid, None, &ev).map_err(|e| err(&e))?;
            prompt = prompts.last().unwrap().clone();
        }
        sessions += 1;
        if sessions == snapshot_after {
            store.snapshot(t, lid).map_err(|e| err(&e))?;
        }
        if sessions >= 4 {
            break;
        }
    }
    Ok((st, sessions))
}

fn ac4() -> Outcome {
    let t = tutor();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut expected = vec![];
    let mut sessions = 0;
    let mut i = 0u64;
    {
        let store = EventStore::open(dir.path()).map_err(|e| e.to_string())?.with_fsync(false);
        while sessions < 100 {
            let lid = LearnerId::new(format!("L{i:06}"));
            let (st, n) = play(&t, &store, &lid, 0xac4 + i, 1 + i as usize % 3)?;
            sessions += n;
            expected.push((lid, st));
            i += 1;
        }
    }
    let store = EventStore::open(dir.path()).map_err(|e| e.to_string())?;
    let listed = store.list_learners().map_err(|e| e.to_string())?;
    ensure(listed.len() == expected.len(), || format!("{} learners listed, {} written", listed.len(), expected.len()))?;
    for (lid, want) in &expected {
        let genesis = store.load_from_genesis(&t, lid).map_err(|e| format!("{lid}: {e}"))?;
        ensure(&genesis == want, || format!("{lid}: replay from genesis differs from memory"))?;
        let fast = store.load_learner(&t, lid).map_err(|e| format!("{lid}: {e}"))?;
        ensure(fast == genesis, || format!("{lid}: snapshot plus tail differs from genesis"))?;
    }
    Ok(format!("{} learners, {sessions} sessions replayed, snapshot plus tail agrees", expected.len()))
}

// ---------------------------------------------------------------- AC-5

fn ac5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac5);
    let printable: Vec<char> = (' '..='~').chain(['\n']).collect();
    let mut segments = 0;
    for i in 0..2000 {
        // Every length around the header boundaries, then spread to 15000.
        let len = if i < 600 { 1 + i } else { rng.random_range(1..=15_000) };
        let text: String = (0..len).map(|_| printable[rng.random_range(0..printable.len())]).collect();
        let segs = segment_text(&text, SEGMENT_LIMIT).map_err(|e| format!("length {len}: {e}"))?;
        segments += segs.len();
        ensure(segs.iter().all(|s| s.payload.chars().count() <= SEGMENT_LIMIT), || format!("length {len}: oversized segment"))?;
        // Receivers see wire text only, possibly out of order.
        let mut wire: Vec<Segment> = segs.iter().map(|s| Segment::from_wire(&s.payload)).collect();
        wire.reverse();
        let back = reassemble(&wire).map_err(|e| format!("length {len}: {e}"))?;
        ensure(back == text, || format!("length {len}: round trip changed the text"))?;
    }
    let text: String = (0..161).map(|i| printable[i % 95]).collect();
    let segs = segment_text(&text, SEGMENT_LIMIT).map_err(|e| e.to_string())?;
    let bodies: Vec<usize> = segs.iter().map(|s| s.body().len()).collect();
    ensure(bodies == [156, 5], || format!("161 characters split as {bodies:?}"))?;
    ensure(segs[0].payload.starts_with("1/2 ") && segs[1].payload.starts_with("2/2 "), || "bad headers".into())?;
    Ok(format!("2000 texts, {segments} segments, 161 chars split 156/5"))
}

// ---------------------------------------------------------------- AC-6

fn ac6() -> Outcome {
    let t = tutor();
    let bank = t.course().questions();
    let bands = DifficultyBands::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac6);
    let mut worst: f64 = 0.0;
    let mut plans = 0;
    for concept in t.course().concepts() {
        for (ability, level) in [(-2.0, None), (0.0, Some(LearnerLevel::SlowLearner)), (1.5, Some(LearnerLevel::Genius))] {
            let count = 2 * concept.sections.len();
            let Ok(plan) = plan_with_band(bank, concept, &BTreeSet::new(), bands.band(level), Phase::PostTest, count, rng.random())
            else {
                continue;
            };
            let learner = SimulatedLearner::uniform(ability, LearningStyle::SS, 1.0, 0);
            for matched in [false, true] {
                let analytic = mean_score(&score_distribution(&plan_items(&plan, bank, &learner, matched)));
                let n = 10_000;
                let total: u64 = (0..n).map(|_| sample_score(&plan, bank, &learner, matched, &mut rng) as u64).sum();
                let observed = total as f64 / n as f64;
                let gap = (observed - analytic).abs();
                worst = worst.max(gap);
                ensure(gap <= 2.0, || {
                    format!("{} ability {ability}: analytic {analytic:.2}, sampled {observed:.2}", concept.id)
                })?;
                plans += 1;
            }
        }
    }
    ensure(plans > 0, || "no plan to check".into())?;

    let cfg = TutorConfig::default();
    let profiler = common::profiler();
    let cohort = |mean: f64| {
        run_cohort(
            common::course(),
            &cfg,
            &profiler,
            &CohortSpec {
                learners: 200,
                ability_mean: mean,
                seed: 7,
                ..CohortSpec::default()
            },
        )
        .map_err(|e| e.to_string())
    };
    let strong = cohort(2.0)?.summary.mean_posttest_score.ok_or("strong cohort took no post-test")?;
    let weak = cohort(-1.0)?.summary.mean_posttest_score.ok_or("weak cohort took no post-test")?;
    ensure(strong > weak, || format!("mean post-test +2.0: {strong:.2}, -1.0: {weak:.2}"))?;
    Ok(format!(
        "{plans} plans x 10000 samples, worst gap {worst:.3}; cohort +2.0 {strong:.2} > -1.0 {weak:.2}"
    ))
}

// ---------------------------------------------------------------- AC-7

fn ac7() -> Outcome {
    let cfg = TutorConfig::default();
    let profiler = common::profiler();
    let arm = |style_match: bool| {
        run_cohort(
            common::course(),
            &cfg,
            &profiler,
            &CohortSpec {
                learners: 500,
                ability_mean: -0.5,
                ability_spread: 0.5,
                match_bonus: 1.0,
                style_match,
                seed: 7,
            },
        )
        .map_err(|e| e.to_string())
    };
    let matched = arm(true)?.summary.mean_attempts.ok_or("matched arm took no post-test")?;
    let mismatched = arm(false)?.summary.mean_attempts.ok_or("mismatched arm took no post-test")?;
    let margin = mismatched - matched;
    ensure(margin >= 0.15, || format!("attempts matched {matched:.3}, mismatched {mismatched:.3}, margin {margin:.3}"))?;
    Ok(format!("attempts matched {matched:.3}, mismatched {mismatched:.3}, margin {margin:.3}"))
}

// ---------------------------------------------------------------- AC-8

async fn sms(app: &axum::Router, from: &str, text: &str) -> Result<Vec<String>, String> {
    let req = Request::builder()
        .method("POST")
        .uri("/sms/inbound")
        .header("content-type", "application/json")
        .body(Body::from(json!({"from": from, "text": text}).to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.map_err(|e| e.to_string())?;
    let status = resp.status();
    let bytes = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes();
    let v: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    ensure(status == StatusCode::OK, || format!("{text:?}: {status} {v}"))?;
    serde_json::from_value(v["outbound"].clone()).map_err(|e| e.to_string())
}

async fn ac8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gw = Arc::new(common::gateway(dir.path()));
    let app = router(gw.clone());
    let from = "+15550142";
    let lid = Gateway::sms_learner(from).map_err(|e| e.to_string())?;
    let sid = SessionId::for_learner(&lid, 1);
    let mut inputs = vec![];
    let mut outbound = vec![];
    let mut out = sms(&app, from, "START").await?;
    outbound.extend(out.clone());
    let mut steps = 0;
    // Answer every pre-test item wrong so the learner sees the content,
    // then every post-test item right.
    while !out.iter().any(|s| s.starts_with("Result:")) {
        steps += 1;
        ensure(steps < 200, || "conversation did not finish".into())?;
        let (prompt, state) = gw.session_prompt(&sid).map_err(|e| e.to_string())?;
        let (text, input) = match prompt {
            Prompt::Question { question_id, choices, .. } => {
                let key = gw.tutor().course().questions().get(&question_id).unwrap().correct;
                let pick = if state == SessionState::PreTest { (key + 1) % choices.len() } else { key };
                (((b'A' + pick as u8) as char).to_string(), Input::Answer(pick))
            }
            _ => ("NEXT".to_string(), Input::Next),
        };
        inputs.push(input);
        out = sms(&app, from, &text).await?;
        outbound.extend(out.clone());
    }
    let last = out.last().unwrap();
    ensure(last.starts_with("Result: concept completed"), || format!("ended with {last:?}"))?;
    ensure(outbound.iter().any(|s| s.starts_with("Pre-test: 0/100")), || "pre-test result missing".into())?;
    let longest = outbound.iter().map(|s| s.chars().count()).max().unwrap_or(0);
    ensure(longest <= SEGMENT_LIMIT, || format!("outbound segment of {longest} characters"))?;

    let mut direct = LearnerState::new(lid.clone());
    let mut trace = direct.register(from);
    let (ev, _) = direct
        .start(gw.tutor(), &ConceptId::new("intro"), gw.session_seed(&sid))
        .map_err(|e| e.to_string())?;
    trace.extend(ev);
    for i in inputs {
        trace.extend(direct.submit(gw.tutor(), i).map_err(|e| e.to_string())?.0);
    }
    let stored: Vec<_> = gw.store().read_log(&lid).map_err(|e| e.to_string())?.into_iter().map(|r| r.body).collect();
    ensure(stored == trace, || format!("stored log ({} events) differs from the direct trace ({})", stored.len(), trace.len()))?;
    Ok(format!("{} messages, {} outbound segments, longest {longest}, log matches", steps + 1, outbound.len()))
}

// ----------------------------------------------------------------

fn report(name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {}s budget", budget.as_secs())),
        Err(e) => (false, e),
    };
    println!(
        "{name} {} {detail} ({:.2}s / {}s)",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn main() {
    let secs = Duration::from_secs;
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let results = [
        report("AC-1", secs(1), ac1),
        report("AC-2", secs(30), ac2),
        report("AC-3", secs(30), ac3),
        report("AC-4", secs(30), ac4),
        report("AC-5", secs(10), ac5),
        report("AC-6", secs(60), ac6),
        report("AC-7", secs(120), ac7),
        report("AC-8", secs(10), || rt.block_on(ac8())),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
