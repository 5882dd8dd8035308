//! Test-only helpers.

use std::io::{Read, Write};
use std::net::TcpListener;

/// One-shot HTTP stub: accepts one connection per scripted reply on a random
/// local port, replying with the canned status and body. A scripted status
/// of 0 means "accept, read, then hang without replying" so callers can
/// exercise client timeouts. Returns the endpoint URL and a handle yielding
/// the raw request bodies seen.
pub fn stub_server(replies: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}/", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let mut seen = Vec::new();
        for (status, body) in replies {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = vec![0u8; 65536];
            let mut text = String::new();
            loop {
                let n = stream.read(&mut buf).unwrap();
                text.push_str(&String::from_utf8_lossy(&buf[..n]));
                if let Some(head_end) = text.find("\r\n\r\n") {
                    let length = text
                        .lines()
                        .find(|l| l.to_ascii_lowercase().starts_with("content-length:"))
                        .and_then(|l| l.split(':').nth(1))
                        .and_then(|v| v.trim().parse::<usize>().ok())
                        .unwrap_or(0);
                    if text.len() >= head_end + 4 + length {
                        seen.push(text[head_end + 4..].to_string());
                        break;
                    }
                }
                if n == 0 {
                    break;
                }
            }
            if status == 0 {
                std::thread::sleep(std::time::Duration::from_millis(1500));
                continue;
            }
            let reason = if status == 200 { "OK" } else { "ERR" };
            write!(
                stream,
                "HTTP/1.1 {status} {reason}\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
        seen
    });
    (endpoint, handle)
}
