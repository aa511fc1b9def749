//! In-process stand-in for a media player listening on a local socket.

use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use pointmenu_core::PlayerAction;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MockFaults {
    /// Read and record commands but never answer.
    pub drop_replies: bool,
    /// Close each connection after answering this many commands.
    pub close_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockEntry {
    Command {
        action: PlayerAction,
        seq: u64,
        received_ms: u64,
    },
    ProtocolViolation {
        raw: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCommand {
    action: String,
    seq: u64,
}

/// Parses one client line; inverse of `encode_command`.
pub fn parse_command(line: &str) -> Result<(PlayerAction, u64), String> {
    let cmd: WireCommand = serde_json::from_str(line.trim_end()).map_err(|e| e.to_string())?;
    let action = PlayerAction::from_wire_name(&cmd.action).ok_or_else(|| format!("unknown action {:?}", cmd.action))?;
    Ok((action, cmd.seq))
}

type Entries = Arc<Mutex<Vec<MockEntry>>>;

/// Handle to a running mock player. Dropping it stops the listener and removes the socket.
pub struct MockPlayer {
    path: PathBuf,
    entries: Entries,
    stop: Arc<AtomicBool>,
    worker: Option<JoinHandle<()>>,
}

impl MockPlayer {
    #[cfg(unix)]
    pub fn spawn(path: impl Into<PathBuf>, faults: MockFaults) -> io::Result<Self> {
        use std::os::unix::net::UnixListener;

        let path = path.into();
        let listener = UnixListener::bind(&path)?;
        listener.set_nonblocking(true)?;
        let entries: Entries = Arc::default();
        let stop = Arc::new(AtomicBool::new(false));
        let worker = {
            let entries = Arc::clone(&entries);
            let stop = Arc::clone(&stop);
            thread::Builder::new().name("mock-player".into()).spawn(move || {
                let epoch = Instant::now();
                while !stop.load(Ordering::Relaxed) {
                    match listener.accept() {
                        Ok((stream, _)) => {
                            if let Err(e) = serve(stream, faults, &entries, &stop, epoch) {
                                log::debug!("mock player connection ended: {e}");
                            }
                        }
                        Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(2)),
                        Err(e) => {
                            log::error!("mock player accept: {e}");
                            return;
                        }
                    }
                }
            })?
        };
        Ok(MockPlayer {
            path,
            entries,
            stop,
            worker: Some(worker),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn entries(&self) -> Vec<MockEntry> {
        self.entries.lock().unwrap().clone()
    }

    /// Recorded actions in arrival order.
    pub fn actions(&self) -> Vec<PlayerAction> {
        self.entries()
            .into_iter()
            .filter_map(|e| match e {
                MockEntry::Command { action, .. } => Some(action),
                MockEntry::ProtocolViolation { .. } => None,
            })
            .collect()
    }

    /// Waits until `n` commands were recorded or `timeout` passes.
    pub fn wait_for(&self, n: usize, timeout: Duration) -> Vec<PlayerAction> {
        let deadline = Instant::now() + timeout;
        loop {
            let got = self.actions();
            if got.len() >= n || Instant::now() >= deadline {
                return got;
            }
            thread::sleep(Duration::from_millis(5));
        }
    }
}

impl Drop for MockPlayer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
        let _ = std::fs::remove_file(&self.path);
    }
}

#[cfg(unix)]
fn serve(
    stream: std::os::unix::net::UnixStream,
    faults: MockFaults,
    entries: &Entries,
    stop: &AtomicBool,
    epoch: Instant,
) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(Duration::from_millis(20)))?;
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut line = Vec::new();
    let mut answered = 0usize;
    while !stop.load(Ordering::Relaxed) {
        match reader.read_until(b'\n', &mut line) {
            Ok(0) => return Ok(()),
            Ok(_) => {}
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
            Err(e) => return Err(e),
        }
        if !line.ends_with(b"\n") {
            return Ok(());
        }
        let raw = String::from_utf8_lossy(&line).trim_end().to_owned();
        line.clear();
        let reply = match parse_command(&raw) {
            Ok((action, seq)) => {
                entries.lock().unwrap().push(MockEntry::Command {
                    action,
                    seq,
                    received_ms: epoch.elapsed().as_millis() as u64,
                });
                format!("{{\"seq\":{seq},\"ok\":true}}\n")
            }
            Err(_) => {
                let seq = serde_json::from_str::<serde_json::Value>(&raw)
                    .ok()
                    .and_then(|v| v.get("seq").and_then(|s| s.as_u64()))
                    .unwrap_or(0);
                entries.lock().unwrap().push(MockEntry::ProtocolViolation { raw });
                format!("{{\"seq\":{seq},\"ok\":false}}\n")
            }
        };
        if !faults.drop_replies {
            writer.write_all(reply.as_bytes())?;
            writer.flush()?;
        }
        answered += 1;
        if faults.close_after.is_some_and(|k| answered >= k) {
            return Ok(());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pointmenu_core::encode_command;

    #[test]
    fn parser_inverts_encoder() {
        for (i, a) in PlayerAction::ALL.into_iter().enumerate() {
            let line = encode_command(a, i as u64 + 40);
            assert_eq!(
                parse_command(std::str::from_utf8(&line).unwrap()),
                Ok((a, i as u64 + 40))
            );
        }
        assert!(parse_command("{\"action\":\"eject\",\"seq\":1}").is_err());
        assert!(parse_command("{\"action\":\"stop\"}").is_err());
        assert!(parse_command("{\"action\":\"stop\",\"seq\":1,\"x\":0}").is_err());
        assert!(parse_command("stop").is_err());
    }
}
