//! A scripted SMS conversation against the gateway, printed as a
//! transcript.

use std::path::PathBuf;

use tutor_core::Prompt;
use tutor_gateway::{Gateway, GatewayConfig};

fn main() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let dir = tempfile::tempdir().unwrap();
    let cfg = GatewayConfig {
        course: fixtures.join("sample_course.json"),
        profiler: fixtures.join("profiler.json"),
        data_dir: dir.path().to_path_buf(),
        fsync: false,
        ..GatewayConfig::default()
    };
    let gw = Gateway::from_config(&cfg).unwrap();
    let from = "+15550123";
    let lid = Gateway::sms_learner(from).unwrap();

    let send = |text: &str| {
        println!(">> {text}");
        let out = gw.sms_inbound(from, text).unwrap();
        for seg in &out {
            println!("<< {}", seg.replace('\n', "\n   "));
        }
        out
    };
    send("HELP");
    send("START");
    let sid = tutor_core::SessionId::for_learner(&lid, 1);
    let mut n = 0;
    while let Ok((prompt, state)) = gw.session_prompt(&sid) {
        if state.is_terminal() {
            break;
        }
        // Cheat by peeking at the key: wrong on the first two items.
        let reply = match prompt {
            Prompt::Question { question_id, .. } => {
                n += 1;
                let key = gw.tutor().course().questions().get(&question_id).unwrap().correct;
                let pick = if n <= 2 { (key + 1) % 2 } else { key };
                ((b'A' + pick as u8) as char).to_string()
            }
            _ => "NEXT".to_string(),
        };
        send(&reply);
    }
    send("STATUS");
    send("START");
}
