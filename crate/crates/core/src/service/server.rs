//! Line-oriented TCP front end: one request per line, one response per line.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use super::Service;

fn serve_connection(service: &Service, stream: TcpStream) -> std::io::Result<()> {
    let mut out = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut response = service.handle_line(&line);
        response.push('\n');
        out.write_all(response.as_bytes())?;
        out.flush()?;
    }
    Ok(())
}

/// Accepts connections forever, one thread each.
pub fn run(listener: TcpListener, service: Arc<Service>) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                eprintln!("accept failed: {e}");
                continue;
            }
        };
        let service = Arc::clone(&service);
        thread::spawn(move || {
            if let Err(e) = serve_connection(&service, stream) {
                eprintln!("connection closed: {e}");
            }
        });
    }
    Ok(())
}
