//! Player command channel: newline-delimited JSON over a local stream socket.
//!
//! Client line: `{"action":"<name>","seq":<n>}`. Player reply:
//! `{"seq":<n>,"ok":true|false}`. Sequence numbers increase strictly per
//! client, including across a reconnect.

use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use pointmenu_core::{encode_command, PlayerAction};
use serde::{Deserialize, Serialize};

use crate::queue::DropOldestQueue;

#[cfg(unix)]
pub(crate) type Stream = std::os::unix::net::UnixStream;
#[cfg(not(unix))]
pub(crate) type Stream = std::net::TcpStream;

#[cfg(unix)]
pub(crate) fn connect_stream(path: &Path) -> io::Result<Stream> {
    Stream::connect(path)
}

#[cfg(not(unix))]
pub(crate) fn connect_stream(path: &Path) -> io::Result<Stream> {
    Err(io::Error::new(
        io::ErrorKind::Unsupported,
        format!(
            "local player sockets are not supported on this platform ({})",
            path.display()
        ),
    ))
}

pub const DEFAULT_REPLY_TIMEOUT: Duration = Duration::from_millis(500);
/// Selection events waiting for the dispatcher.
pub const DISPATCH_QUEUE_CAPACITY: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandRecord {
    pub action: PlayerAction,
    pub seq: u64,
    /// Milliseconds since the client was created.
    pub sent_at_ms: u64,
    pub acked: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ControlError {
    #[error("no reply to seq {} within {timeout:?}", record.seq)]
    Timeout { record: CommandRecord, timeout: Duration },
    #[error("player connection failed after retry: {source}")]
    Transport {
        record: Option<CommandRecord>,
        #[source]
        source: io::Error,
    },
    #[error("protocol error: {reason} (raw reply {raw:?})")]
    Protocol {
        record: CommandRecord,
        reason: String,
        raw: String,
    },
}

impl ControlError {
    /// The unacknowledged record, when the command reached the wire.
    pub fn record(&self) -> Option<&CommandRecord> {
        match self {
            ControlError::Timeout { record, .. } | ControlError::Protocol { record, .. } => Some(record),
            ControlError::Transport { record, .. } => record.as_ref(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reply {
    pub seq: u64,
    pub ok: bool,
}

struct Connection {
    writer: Stream,
    reader: BufReader<Stream>,
}

enum Attempt {
    Reply(String),
    TimedOut,
    Broken(io::Error),
}

/// Synchronous client for one player socket.
pub struct PlayerClient {
    path: PathBuf,
    conn: Option<Connection>,
    seq: u64,
    timeout: Duration,
    epoch: Instant,
    partial: Vec<u8>,
    /// Replies still owed for commands that timed out.
    stale: u64,
}

impl PlayerClient {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        PlayerClient {
            path: path.into(),
            conn: None,
            seq: 0,
            timeout: DEFAULT_REPLY_TIMEOUT,
            epoch: Instant::now(),
            partial: Vec::new(),
            stale: 0,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn last_seq(&self) -> u64 {
        self.seq
    }

    fn connect(&mut self) -> io::Result<&mut Connection> {
        if self.conn.is_none() {
            let stream = connect_stream(&self.path)?;
            stream.set_read_timeout(Some(self.timeout))?;
            stream.set_write_timeout(Some(self.timeout))?;
            let reader = BufReader::new(stream.try_clone()?);
            self.partial.clear();
            self.stale = 0;
            self.conn = Some(Connection { writer: stream, reader });
        }
        Ok(self.conn.as_mut().expect("just connected"))
    }

    fn attempt(&mut self, line: &[u8]) -> Attempt {
        let timeout = self.timeout;
        let conn = match self.connect() {
            Ok(c) => c,
            Err(e) => return Attempt::Broken(e),
        };
        if let Err(e) = conn.writer.write_all(line).and_then(|_| conn.writer.flush()) {
            return Attempt::Broken(e);
        }
        let deadline = Instant::now() + timeout;
        loop {
            let conn = self.conn.as_mut().expect("connected");
            match conn.reader.read_until(b'\n', &mut self.partial) {
                Ok(0) => {
                    return Attempt::Broken(io::Error::new(
                        io::ErrorKind::UnexpectedEof,
                        "player closed the connection",
                    ))
                }
                Ok(_) if self.partial.ends_with(b"\n") => {
                    let raw = String::from_utf8_lossy(&self.partial).trim_end().to_owned();
                    self.partial.clear();
                    return Attempt::Reply(raw);
                }
                Ok(_) => {
                    return Attempt::Broken(io::Error::new(io::ErrorKind::UnexpectedEof, "player closed mid-line"))
                }
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                    if Instant::now() >= deadline {
                        return Attempt::TimedOut;
                    }
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Attempt::Broken(e),
            }
        }
    }

    /// Sends one command and waits for its acknowledgement.
    ///
    /// A broken connection is re-opened and the command retried once under a
    /// fresh sequence number.
    pub fn dispatch(&mut self, action: PlayerAction) -> Result<CommandRecord, ControlError> {
        let mut retried = false;
        loop {
            self.seq += 1;
            let record = CommandRecord {
                action,
                seq: self.seq,
                sent_at_ms: self.epoch.elapsed().as_millis() as u64,
                acked: false,
            };
            match self.attempt(&encode_command(action, record.seq)) {
                Attempt::Broken(source) => {
                    self.conn = None;
                    if retried {
                        return Err(ControlError::Transport {
                            record: Some(record),
                            source,
                        });
                    }
                    log::warn!("player connection broken ({source}); reconnecting");
                    retried = true;
                }
                Attempt::TimedOut => {
                    self.stale += 1;
                    return Err(ControlError::Timeout {
                        record,
                        timeout: self.timeout,
                    });
                }
                Attempt::Reply(raw) => return self.check_reply(record, raw),
            }
        }
    }

    fn check_reply(&mut self, mut record: CommandRecord, mut raw: String) -> Result<CommandRecord, ControlError> {
        loop {
            let reply: Reply = match serde_json::from_str(&raw) {
                Ok(r) => r,
                Err(e) => {
                    return Err(ControlError::Protocol {
                        record,
                        reason: format!("malformed reply: {e}"),
                        raw,
                    })
                }
            };
            if reply.seq < record.seq && self.stale > 0 {
                // Late answer to a command that already timed out.
                self.stale -= 1;
                raw = match self.attempt(b"") {
                    Attempt::Reply(next) => next,
                    Attempt::TimedOut => {
                        self.stale += 1;
                        return Err(ControlError::Timeout {
                            record,
                            timeout: self.timeout,
                        });
                    }
                    Attempt::Broken(source) => {
                        self.conn = None;
                        return Err(ControlError::Transport {
                            record: Some(record),
                            source,
                        });
                    }
                };
                continue;
            }
            if reply.seq != record.seq {
                return Err(ControlError::Protocol {
                    reason: format!("reply seq {} does not match command seq {}", reply.seq, record.seq),
                    record,
                    raw,
                });
            }
            record.acked = reply.ok;
            return Ok(record);
        }
    }
}

/// Background worker that drains selections into a [`PlayerClient`].
///
/// The frame loop only ever calls [`Dispatcher::submit`], which never blocks;
/// on overflow the oldest pending action is dropped with a warning.
pub struct Dispatcher {
    queue: Arc<DropOldestQueue<PlayerAction>>,
    last: Arc<Mutex<Option<CommandRecord>>>,
    worker: Option<JoinHandle<DispatchStats>>,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct DispatchStats {
    pub sent: u64,
    pub acked: u64,
    pub errors: u64,
}

impl Dispatcher {
    pub fn spawn(client: PlayerClient) -> Self {
        let queue = Arc::new(DropOldestQueue::new(DISPATCH_QUEUE_CAPACITY));
        let last = Arc::new(Mutex::new(None));
        let worker = {
            let queue = Arc::clone(&queue);
            let last = Arc::clone(&last);
            let mut client = client;
            thread::Builder::new()
                .name("dispatcher".into())
                .spawn(move || {
                    let mut stats = DispatchStats::default();
                    while let Some(action) = queue.pop() {
                        stats.sent += 1;
                        let record = match client.dispatch(action) {
                            Ok(record) => {
                                if record.acked {
                                    stats.acked += 1;
                                } else {
                                    log::warn!("player refused {action} (seq {})", record.seq);
                                }
                                Some(record)
                            }
                            Err(e) => {
                                stats.errors += 1;
                                log::error!("dispatch {action}: {e}");
                                e.record().cloned()
                            }
                        };
                        if let Some(r) = record {
                            *last.lock().unwrap() = Some(r);
                        }
                    }
                    stats
                })
                .expect("spawn dispatcher thread")
        };
        Dispatcher {
            queue,
            last,
            worker: Some(worker),
        }
    }

    pub fn submit(&self, action: PlayerAction) {
        if let Some(dropped) = self.queue.push(action) {
            log::warn!("dispatch queue full; dropped pending {dropped}");
        }
    }

    pub fn last_command(&self) -> Option<CommandRecord> {
        self.last.lock().unwrap().clone()
    }

    /// Delivers everything already queued, then stops the worker.
    pub fn finish(mut self) -> DispatchStats {
        self.queue.close();
        self.worker
            .take()
            .map(|w| w.join().expect("dispatcher panicked"))
            .unwrap_or_default()
    }
}

impl Drop for Dispatcher {
    fn drop(&mut self) {
        self.queue.close();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
