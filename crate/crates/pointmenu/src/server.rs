//! WebSocket broadcast of snapshots and overlay frames, plus live tuning.
//!
//! Each processed frame becomes one text message (snapshot JSON) followed by
//! one binary message (FRME framing). Clients may send `{"set": {...}}`; the
//! frame loop applies accepted patches at its next frame boundary.

use std::io::{self, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde_json::json;
use tungstenite::{Message, WebSocket};

use crate::config::TuningPatch;
use crate::queue::DropOldestQueue;

/// Frames buffered per client before the oldest is dropped.
pub const CLIENT_QUEUE_FRAMES: usize = 8;
const READ_POLL: Duration = Duration::from_millis(10);
const WRITE_TIMEOUT: Duration = Duration::from_secs(1);
const TUNING_REPLY_TIMEOUT: Duration = Duration::from_secs(2);

/// One frame's worth of outbound messages.
#[derive(Debug)]
pub struct Broadcast {
    pub snapshot_json: String,
    pub frame_message: Vec<u8>,
}

/// A validated-syntax patch waiting for the frame loop.
pub struct TuningRequest {
    pub patch: TuningPatch,
    reply: Sender<Result<(), String>>,
}

impl TuningRequest {
    pub fn new(patch: TuningPatch) -> (Self, Receiver<Result<(), String>>) {
        let (reply, rx) = mpsc::channel();
        (TuningRequest { patch, reply }, rx)
    }

    pub fn respond(self, result: Result<(), String>) {
        let _ = self.reply.send(result);
    }
}

struct ClientSlot {
    queue: DropOldestQueue<Arc<Broadcast>>,
    alive: AtomicBool,
}

struct Shared {
    latest: Mutex<Option<Arc<Broadcast>>>,
    clients: Mutex<Vec<Arc<ClientSlot>>>,
    tuning: Mutex<Sender<TuningRequest>>,
    stop: AtomicBool,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

pub struct BroadcastServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    accept: Option<JoinHandle<()>>,
}

impl BroadcastServer {
    /// Binds `addr` and starts accepting clients. Tuning requests arrive on the returned receiver.
    pub fn bind(addr: &str) -> io::Result<(Self, Receiver<TuningRequest>)> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let local = listener.local_addr()?;
        let (tx, rx) = mpsc::channel();
        let shared = Arc::new(Shared {
            latest: Mutex::new(None),
            clients: Mutex::new(Vec::new()),
            tuning: Mutex::new(tx),
            stop: AtomicBool::new(false),
            workers: Mutex::new(Vec::new()),
        });
        let accept = {
            let shared = Arc::clone(&shared);
            thread::Builder::new()
                .name("ws-accept".into())
                .spawn(move || accept_loop(listener, shared))?
        };
        log::info!("broadcasting on ws://{local}");
        Ok((
            BroadcastServer {
                addr: local,
                shared,
                accept: Some(accept),
            },
            rx,
        ))
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Queues one frame for every client. Never blocks on the network.
    pub fn publish(&self, snapshot_json: String, frame_message: Vec<u8>) {
        let item = Arc::new(Broadcast {
            snapshot_json,
            frame_message,
        });
        let mut latest = self.shared.latest.lock().unwrap();
        *latest = Some(Arc::clone(&item));
        let mut clients = self.shared.clients.lock().unwrap();
        clients.retain(|c| c.alive.load(Ordering::Relaxed));
        for c in clients.iter() {
            c.queue.push(Arc::clone(&item));
        }
    }

    pub fn client_count(&self) -> usize {
        let clients = self.shared.clients.lock().unwrap();
        clients.iter().filter(|c| c.alive.load(Ordering::Relaxed)).count()
    }

    /// Stops accepting, disconnects clients and joins all server threads.
    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        self.shared.stop.store(true, Ordering::Relaxed);
        for c in self.shared.clients.lock().unwrap().iter() {
            c.queue.close();
        }
        if let Some(a) = self.accept.take() {
            let _ = a.join();
        }
        let workers: Vec<_> = self.shared.workers.lock().unwrap().drain(..).collect();
        for w in workers {
            let _ = w.join();
        }
    }
}

impl Drop for BroadcastServer {
    fn drop(&mut self) {
        self.stop_and_join();
    }
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    while !shared.stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                let worker = {
                    let shared = Arc::clone(&shared);
                    thread::Builder::new().name(format!("ws-{peer}")).spawn(move || {
                        if let Err(e) = serve_client(stream, &shared) {
                            log::debug!("client {peer} dropped: {e}");
                        }
                    })
                };
                match worker {
                    Ok(handle) => shared.workers.lock().unwrap().push(handle),
                    Err(e) => log::error!("cannot spawn client thread: {e}"),
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(10)),
            Err(e) => {
                log::error!("accept failed: {e}");
                thread::sleep(Duration::from_millis(50));
            }
        }
    }
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut))
}

fn serve_client(stream: TcpStream, shared: &Shared) -> Result<(), Box<dyn std::error::Error>> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    stream.set_write_timeout(Some(WRITE_TIMEOUT))?;
    stream.set_nodelay(true)?;
    let mut ws: WebSocket<TcpStream> = tungstenite::accept(stream).map_err(|e| e.to_string())?;
    ws.get_ref().set_read_timeout(Some(READ_POLL))?;

    let slot = Arc::new(ClientSlot {
        queue: DropOldestQueue::new(CLIENT_QUEUE_FRAMES),
        alive: AtomicBool::new(true),
    });
    {
        // Holding `latest` orders registration against concurrent publishes,
        // so the first item a client sees is a complete, current frame.
        let latest = shared.latest.lock().unwrap();
        if let Some(item) = latest.as_ref() {
            slot.queue.push(Arc::clone(item));
        }
        shared.clients.lock().unwrap().push(Arc::clone(&slot));
    }
    let tuning = shared.tuning.lock().unwrap().clone();

    let result = client_loop(&mut ws, &slot, &tuning, shared);
    slot.alive.store(false, Ordering::Relaxed);
    let _ = ws.close(None);
    let _ = ws.flush();
    result
}

fn client_loop(
    ws: &mut WebSocket<TcpStream>,
    slot: &ClientSlot,
    tuning: &Sender<TuningRequest>,
    shared: &Shared,
) -> Result<(), Box<dyn std::error::Error>> {
    while !shared.stop.load(Ordering::Relaxed) {
        while let Some(item) = slot.queue.try_pop() {
            ws.send(Message::Text(item.snapshot_json.clone()))?;
            ws.send(Message::Binary(item.frame_message.clone()))?;
        }
        match ws.read() {
            Ok(Message::Text(text)) => {
                let reply = handle_control(&text, tuning);
                ws.send(Message::Text(reply))?;
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(e) if is_timeout(&e) => {}
            Err(tungstenite::Error::ConnectionClosed) => return Ok(()),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn handle_control(text: &str, tuning: &Sender<TuningRequest>) -> String {
    let outcome = TuningPatch::parse_request(text).and_then(|patch| {
        let (request, reply) = TuningRequest::new(patch);
        tuning.send(request).map_err(|_| "pipeline is not running".to_owned())?;
        reply
            .recv_timeout(TUNING_REPLY_TIMEOUT)
            .map_err(|_| "pipeline did not reach a frame boundary in time".to_owned())?
    });
    match outcome {
        Ok(()) => json!({"ok": true}).to_string(),
        Err(error) => json!({"ok": false, "error": error}).to_string(),
    }
}
