#![cfg(unix)]

use std::io::{BufRead, BufReader, Write};
use std::os::unix::net::UnixListener;
use std::thread;
use std::time::{Duration, Instant};

use pointmenu::control::{ControlError, Dispatcher, PlayerClient, DEFAULT_REPLY_TIMEOUT};
use pointmenu::mock::{MockEntry, MockFaults, MockPlayer};
use pointmenu_core::PlayerAction;

fn socket(dir: &tempfile::TempDir) -> std::path::PathBuf {
    dir.path().join("player.sock")
}

#[test]
fn acknowledged_command() {
    let dir = tempfile::tempdir().unwrap();
    let mock = MockPlayer::spawn(socket(&dir), MockFaults::default()).unwrap();
    let mut client = PlayerClient::new(mock.path());
    let rec = client.dispatch(PlayerAction::PlayPause).unwrap();
    assert!(rec.acked);
    assert_eq!(rec.seq, 1);
    assert_eq!(mock.actions(), [PlayerAction::PlayPause]);
}

#[test]
fn sequence_numbers_increase() {
    let dir = tempfile::tempdir().unwrap();
    let mock = MockPlayer::spawn(socket(&dir), MockFaults::default()).unwrap();
    let mut client = PlayerClient::new(mock.path());
    for a in PlayerAction::ALL {
        client.dispatch(a).unwrap();
    }
    let seqs: Vec<u64> = mock
        .entries()
        .into_iter()
        .map(|e| match e {
            MockEntry::Command { seq, .. } => seq,
            other => panic!("unexpected {other:?}"),
        })
        .collect();
    assert_eq!(seqs, (1..=7).collect::<Vec<_>>());
}

#[test]
fn silent_player_times_out() {
    let dir = tempfile::tempdir().unwrap();
    let faults = MockFaults {
        drop_replies: true,
        ..MockFaults::default()
    };
    let mock = MockPlayer::spawn(socket(&dir), faults).unwrap();
    let mut client = PlayerClient::new(mock.path());
    let t = Instant::now();
    let err = client.dispatch(PlayerAction::Stop).unwrap_err();
    let waited = t.elapsed();
    assert!(matches!(err, ControlError::Timeout { .. }), "{err}");
    assert_eq!(err.record().unwrap().action, PlayerAction::Stop);
    assert!(
        waited >= DEFAULT_REPLY_TIMEOUT && waited < DEFAULT_REPLY_TIMEOUT + Duration::from_millis(400),
        "{waited:?}"
    );
    assert_eq!(mock.wait_for(1, Duration::from_secs(1)), [PlayerAction::Stop]);
}

#[test]
fn late_reply_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = socket(&dir);
    let listener = UnixListener::bind(&path).unwrap();
    let server = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut w = stream;
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        thread::sleep(Duration::from_millis(150));
        writeln!(w, r#"{{"seq":1,"ok":true}}"#).unwrap();
        line.clear();
        reader.read_line(&mut line).unwrap();
        writeln!(w, r#"{{"seq":2,"ok":true}}"#).unwrap();
    });
    let mut client = PlayerClient::new(&path).with_timeout(Duration::from_millis(100));
    assert!(matches!(
        client.dispatch(PlayerAction::Next),
        Err(ControlError::Timeout { .. })
    ));
    let rec = client.dispatch(PlayerAction::Prev).unwrap();
    assert_eq!((rec.seq, rec.acked), (2, true));
    server.join().unwrap();
}

#[test]
fn mismatched_seq_is_a_protocol_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = socket(&dir);
    let listener = UnixListener::bind(&path).unwrap();
    let server = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        let mut w = stream;
        writeln!(w, r#"{{"seq":99,"ok":true}}"#).unwrap();
        line
    });
    let mut client = PlayerClient::new(&path);
    let err = client.dispatch(PlayerAction::Mute).unwrap_err();
    match &err {
        ControlError::Protocol { record, raw, .. } => {
            assert_eq!(record.seq, 1);
            assert!(raw.contains("99"));
        }
        other => panic!("expected protocol error, got {other}"),
    }
    assert_eq!(server.join().unwrap(), "{\"action\":\"mute\",\"seq\":1}\n");
}

#[test]
fn malformed_command_is_rejected_by_mock() {
    let dir = tempfile::tempdir().unwrap();
    let mock = MockPlayer::spawn(socket(&dir), MockFaults::default()).unwrap();
    let mut s = std::os::unix::net::UnixStream::connect(mock.path()).unwrap();
    s.write_all(b"{\"action\":\"explode\",\"seq\":4}\n").unwrap();
    let mut reply = String::new();
    BufReader::new(&s).read_line(&mut reply).unwrap();
    assert!(reply.contains("\"ok\":false"), "{reply}");
    assert!(matches!(
        mock.entries().as_slice(),
        [MockEntry::ProtocolViolation { .. }]
    ));
}

#[test]
fn reconnects_after_player_closes() {
    let dir = tempfile::tempdir().unwrap();
    let faults = MockFaults {
        close_after: Some(1),
        ..MockFaults::default()
    };
    let mock = MockPlayer::spawn(socket(&dir), faults).unwrap();
    let mut client = PlayerClient::new(mock.path());
    let first = client.dispatch(PlayerAction::VolUp).unwrap();
    let second = client.dispatch(PlayerAction::VolDown).unwrap();
    assert!(first.acked && second.acked);
    assert!(second.seq > first.seq);
    assert_eq!(mock.actions(), [PlayerAction::VolUp, PlayerAction::VolDown]);
}

#[test]
fn missing_player_is_a_transport_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut client = PlayerClient::new(socket(&dir));
    assert!(matches!(
        client.dispatch(PlayerAction::Stop),
        Err(ControlError::Transport { .. })
    ));
}

#[test]
fn dispatcher_preserves_order() {
    let dir = tempfile::tempdir().unwrap();
    let mock = MockPlayer::spawn(socket(&dir), MockFaults::default()).unwrap();
    let d = Dispatcher::spawn(PlayerClient::new(mock.path()));
    d.submit(PlayerAction::PlayPause);
    d.submit(PlayerAction::Stop);
    let stats = d.finish();
    assert_eq!((stats.sent, stats.acked, stats.errors), (2, 2, 0));
    assert_eq!(mock.actions(), [PlayerAction::PlayPause, PlayerAction::Stop]);
}

#[test]
fn every_selection_delivered_exactly_once() {
    let dir = tempfile::tempdir().unwrap();
    let mock = MockPlayer::spawn(socket(&dir), MockFaults::default()).unwrap();
    let d = Dispatcher::spawn(PlayerClient::new(mock.path()));
    let sent: Vec<PlayerAction> = (0..1000).map(|i| PlayerAction::ALL[i % 7]).collect();
    for (i, &a) in sent.iter().enumerate() {
        // Stay well below the queue capacity so nothing is shed.
        while (i as u64) >= d.last_command().map_or(0, |c| c.seq) + 16 {
            thread::sleep(Duration::from_micros(100));
        }
        d.submit(a);
    }
    let stats = d.finish();
    assert_eq!(stats.errors, 0);
    assert_eq!(mock.actions(), sent);
}
