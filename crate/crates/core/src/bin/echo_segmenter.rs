//! Test double for the external segmenter protocol.
//!
//! Usage: `echo-segmenter [MODE]`, where MODE is one of
//!
//! * `pos` (default): answer with the positive plane
//! * `prev`: answer with the previous-mask plane
//! * `wrong-dims`: answer with a mask one pixel too wide
//! * `garbage`: answer with a line that is not JSON
//! * `hang`: never answer
//! * `exit`: exit with status 3 on the first request
//! * `error`: answer with an error message

use std::io::{self, BufRead, Write};
use std::thread;
use std::time::Duration;

use contoursim::segmenter::wire::{WireRequest, WireResponse};
use contoursim::ProbabilityMask;

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "pos".to_string());
    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let reply = match WireRequest::from_line(&line).and_then(|r| Ok((r.id, r.to_query()?))) {
            Err(e) => WireResponse {
                id: 0,
                mask: None,
                error: Some(e.to_string()),
            }
            .to_line(),
            Ok((id, query)) => {
                let enc = &query.encoding;
                match mode.as_str() {
                    "pos" => WireResponse::from_mask(id, &enc.positive.to_probability())
                        .unwrap()
                        .to_line(),
                    "prev" => WireResponse::from_mask(id, &enc.previous).unwrap().to_line(),
                    "wrong-dims" => {
                        let (w, h) = enc.dims();
                        WireResponse::from_mask(id, &ProbabilityMask::zeros(w + 1, h))
                            .unwrap()
                            .to_line()
                    }
                    "garbage" => "this is not json".to_string(),
                    "hang" => loop {
                        thread::sleep(Duration::from_secs(3600));
                    },
                    "exit" => std::process::exit(3),
                    "error" => WireResponse {
                        id,
                        mask: None,
                        error: Some("model failure".into()),
                    }
                    .to_line(),
                    other => {
                        eprintln!("echo-segmenter: unknown mode {other:?}");
                        std::process::exit(64);
                    }
                }
            }
        };
        if writeln!(stdout, "{reply}").and_then(|_| stdout.flush()).is_err() {
            break;
        }
    }
}
