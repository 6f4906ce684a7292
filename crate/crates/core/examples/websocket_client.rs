//! Start the session service on a free port, connect a WebSocket client,
//! create a session and shut the service down.

use sketchmech::session::server::Server;
use sketchmech::session::ServiceConfig;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use tungstenite::Message;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ServiceConfig {
        listen: "127.0.0.1:0".into(),
        ..ServiceConfig::default()
    };
    let server = Server::bind(config)?;
    let addr = server.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let handle = {
        let stop = Arc::clone(&stop);
        std::thread::spawn(move || server.run(stop))
    };

    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}"))?;
    ws.send(Message::text(
        r#"{"seq":1,"command":{"type":"create_session"}}"#,
    ))?;
    loop {
        if let Message::Text(t) = ws.read()? {
            println!("<- {t}");
            break;
        }
    }
    ws.close(None)?;
    stop.store(true, Ordering::SeqCst);
    handle.join().unwrap()?;
    Ok(())
}
