//! WebSocket transport. One thread per connection; all sessions live in a
//! shared [`Registry`]. Each text frame carries one command envelope and
//! each event goes out as its own text frame.

use super::config::ServiceConfig;
use super::protocol::{Event, EventEnvelope};
use super::session::Registry;
use crate::error::{Error, Result};
use log::{debug, info, warn};
use std::collections::BTreeSet;
use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};
use tungstenite::{Bytes, Message, WebSocket};

/// A bound, not yet running, service.
pub struct Server {
    listener: TcpListener,
    config: ServiceConfig,
    registry: Arc<Mutex<Registry>>,
}

impl Server {
    pub fn bind(config: ServiceConfig) -> Result<Server> {
        let listener = TcpListener::bind(&config.listen)
            .map_err(|e| Error::Io(format!("cannot bind {}: {e}", config.listen)))?;
        listener.set_nonblocking(true)?;
        let mut registry = Registry::new();
        registry.recognition = config.recognition;
        registry.solver = config.solver;
        Ok(Server {
            listener,
            config,
            registry: Arc::new(Mutex::new(registry)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    pub fn registry(&self) -> Arc<Mutex<Registry>> {
        Arc::clone(&self.registry)
    }

    /// Accept connections until `shutdown` is set, then stop every run at
    /// its step boundary, close connections and log sessions that were never
    /// saved.
    pub fn run(self, shutdown: Arc<AtomicBool>) -> Result<()> {
        info!("listening on ws://{}", self.local_addr()?);
        let mut workers = Vec::new();
        while !shutdown.load(Ordering::SeqCst) {
            match self.listener.accept() {
                Ok((stream, peer)) => {
                    debug!("connection from {peer}");
                    let registry = Arc::clone(&self.registry);
                    let config = self.config.clone();
                    let stop = Arc::clone(&shutdown);
                    workers.push(thread::spawn(move || {
                        if let Err(e) = connection(stream, registry, &config, stop) {
                            debug!("connection {peer} ended: {e}");
                        }
                    }));
                    workers.retain(|w| !w.is_finished());
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => {
                    thread::sleep(Duration::from_millis(20))
                }
                Err(e) => warn!("accept failed: {e}"),
            }
        }
        info!("shutting down");
        for w in workers {
            let _ = w.join();
        }
        let mut registry = self.registry.lock().unwrap_or_else(|p| p.into_inner());
        for s in registry.sessions_mut() {
            s.pause_all();
        }
        for s in registry.sessions() {
            if s.has_unsaved_changes() {
                warn!(
                    "session {} has unsaved changes (revision {})",
                    s.id,
                    s.revision()
                );
            }
        }
        Ok(())
    }
}

fn send(ws: &mut WebSocket<TcpStream>, events: &[EventEnvelope]) -> tungstenite::Result<()> {
    for e in events {
        ws.send(Message::text(e.to_json()))?;
    }
    Ok(())
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut))
}

fn connection(
    stream: TcpStream,
    registry: Arc<Mutex<Registry>>,
    config: &ServiceConfig,
    shutdown: Arc<AtomicBool>,
) -> tungstenite::Result<()> {
    let tick = Duration::from_secs_f64(1.0 / config.throttle_hz);
    stream.set_nonblocking(false)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => tungstenite::Error::ConnectionClosed,
    })?;
    ws.get_mut().set_read_timeout(Some(tick))?;
    let heartbeat = Duration::from_secs(config.heartbeat_secs);
    let timeout = Duration::from_secs(config.timeout_secs);

    // sessions whose simulations stream over this connection
    let mut owned: BTreeSet<String> = BTreeSet::new();
    let mut last_seen = Instant::now();
    let mut last_ping = Instant::now();
    let mut last_tick = Instant::now();

    loop {
        if shutdown.load(Ordering::SeqCst) {
            let mut reg = registry.lock().unwrap_or_else(|p| p.into_inner());
            for id in &owned {
                if let Some(s) = reg.session_mut(id) {
                    s.pause_all();
                }
            }
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
        match ws.read() {
            Ok(Message::Text(text)) => {
                last_seen = Instant::now();
                let events = registry
                    .lock()
                    .unwrap_or_else(|p| p.into_inner())
                    .handle_text(text.as_str());
                for e in &events {
                    if let (Some(id), Event::SessionCreated) = (&e.session, &e.event) {
                        owned.insert(id.clone());
                    } else if let Some(id) = &e.session {
                        owned.insert(id.clone());
                    }
                }
                send(&mut ws, &events)?;
            }
            Ok(Message::Binary(_)) => {
                last_seen = Instant::now();
                send(
                    &mut ws,
                    &[EventEnvelope::error(
                        None,
                        None,
                        0,
                        "BadEnvelope",
                        "binary frames are not accepted",
                    )],
                )?;
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => last_seen = Instant::now(),
            Err(e) if is_timeout(&e) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                return Ok(())
            }
            Err(e) => return Err(e),
        }

        let now = Instant::now();
        if now - last_tick >= tick {
            let elapsed = (now - last_tick).as_secs_f64();
            last_tick = now;
            let mut events = Vec::new();
            {
                let mut reg = registry.lock().unwrap_or_else(|p| p.into_inner());
                for id in &owned {
                    if let Some(s) = reg.session_mut(id) {
                        if let Some(dt) = s.running_dt() {
                            // simulated time follows wall-clock time
                            let steps = ((elapsed / dt).round() as usize).clamp(1, 10_000);
                            events.extend(s.advance(steps));
                        }
                    }
                }
            }
            send(&mut ws, &events)?;
        }
        if now - last_ping >= heartbeat {
            last_ping = now;
            ws.send(Message::Ping(Bytes::from_static(b"hb")))?;
        }
        if now - last_seen >= timeout {
            warn!("client silent for {}s, closing", timeout.as_secs());
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
    }
}
