//! Segments long messages into 160-character SMS payloads and puts them
//! back together, and shows how replies are parsed.

use tutor_core::channel::{parse_command, reassemble, segment_text, Segment, SEGMENT_LIMIT};

fn main() {
    for len in [160, 161, 450] {
        let text: String = "The quick brown fox jumps over the lazy dog. ".chars().cycle().take(len).collect();
        let segs = segment_text(&text, SEGMENT_LIMIT).unwrap();
        let sizes: Vec<usize> = segs.iter().map(|s| s.payload.len()).collect();
        println!("{len} chars -> {} segments {sizes:?}", segs.len());
        for s in &segs {
            println!("  [{}]", &s.payload[..s.payload.len().min(24)]);
        }
        let mut wire: Vec<Segment> = segs.iter().map(|s| Segment::from_wire(&s.payload)).collect();
        wire.reverse();
        assert_eq!(reassemble(&wire).unwrap(), text);
    }

    println!("{:?}", segment_text("tab\there", SEGMENT_LIMIT).unwrap_err());
    for reply in ["b", " next ", "START 2", "start sums", "status", "maybe"] {
        println!("{reply:?} -> {:?}", parse_command(reply));
    }
}
