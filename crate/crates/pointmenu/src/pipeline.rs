//! The frame loop: recognition, command dispatch, snapshots and sinks.

use std::collections::VecDeque;
use std::io;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::Receiver;
use std::time::{Duration, Instant};

use pointmenu_core::{render_overlay, Frame, OverlaySpec, PlayerAction, Recognizer, Stage, StageClock, StepOutput};

use crate::config::PipelineConfig;
use crate::control::{DispatchStats, Dispatcher, PlayerClient};
use crate::ppm::write_ppm;
use crate::server::{BroadcastServer, TuningRequest};
use crate::snapshot::{encode_frame_message, BlobSummary, StageLatencies, StateSnapshot, RECENT_EVENTS};
use crate::source::{FrameSource, SourceError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("frame source failed: {0}")]
    Source(#[from] SourceError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("frame {seq}: {source}")]
    Frame {
        seq: u64,
        #[source]
        source: pointmenu_core::Error,
    },
    #[error("cannot write {path}: {source}")]
    Dump {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Called with every snapshot, after the other sinks.
pub type SnapshotHook<'a> = Box<dyn FnMut(&StateSnapshot) + 'a>;

/// Where processed frames go besides the player.
#[derive(Default)]
pub struct Sinks<'a> {
    pub server: Option<&'a BroadcastServer>,
    pub tuning: Option<Receiver<TuningRequest>>,
    /// Overlay frames are written here as `frame_%06d.ppm`.
    pub dump_dir: Option<PathBuf>,
    pub on_snapshot: Option<SnapshotHook<'a>>,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct RunSummary {
    pub frames: u64,
    /// Every selection handed to the dispatcher, in order.
    pub selections: Vec<PlayerAction>,
    pub dispatch: Option<DispatchStats>,
}

/// Stage timer backed by `Instant`.
pub struct InstantClock {
    last: Instant,
    pub latencies: StageLatencies,
}

impl InstantClock {
    pub fn start() -> Self {
        InstantClock {
            last: Instant::now(),
            latencies: StageLatencies::default(),
        }
    }
}

impl StageClock for InstantClock {
    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        let us = now.duration_since(self.last).as_micros() as u64;
        self.last = now;
        let l = &mut self.latencies;
        match stage {
            Stage::Blur => l.blur = us,
            Stage::Threshold => l.threshold = us,
            Stage::Label => l.label = us,
            Stage::Select => l.select = us,
            Stage::Track => l.track = us,
        }
        l.total += us;
    }
}

/// Runs until the source ends or `shutdown` is raised.
///
/// Control failures are logged and never stop the loop; a source failure
/// ends the run after pending commands are flushed.
pub fn run_pipeline(
    config: &PipelineConfig,
    source: &mut dyn FrameSource,
    mut sinks: Sinks<'_>,
    shutdown: &AtomicBool,
) -> Result<RunSummary, PipelineError> {
    config.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut config = config.clone();
    let mut recognizer = Recognizer::new(config.recognizer_params(), config.menu.resolve())
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    if let Some(dir) = &sinks.dump_dir {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Dump {
            path: dir.clone(),
            source,
        })?;
    }
    let dispatcher = config
        .player_socket_path
        .as_ref()
        .map(|path| Dispatcher::spawn(PlayerClient::new(path)));

    let mut summary = RunSummary::default();
    let mut recent: VecDeque<_> = VecDeque::with_capacity(RECENT_EVENTS);
    let frame_interval = config.fps_cap.map(|fps| Duration::from_secs_f64(1.0 / fps));
    let mut failure = None;

    while !shutdown.load(Ordering::Relaxed) {
        let frame = match source.next_frame() {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(e) => {
                log::error!("{e}");
                failure = Some(PipelineError::Source(e));
                break;
            }
        };
        let started = Instant::now();
        let seq = summary.frames;

        if let Some(rx) = &sinks.tuning {
            while let Ok(request) = rx.try_recv() {
                apply_tuning(request, &mut config, &mut recognizer, &frame);
            }
        }

        let mut clock = InstantClock::start();
        let out = match recognizer.step(&frame, &mut clock) {
            Ok(out) => out,
            Err(source) => {
                failure = Some(PipelineError::Frame { seq, source });
                break;
            }
        };

        for &action in &out.selections {
            log::info!("frame {seq}: selected {action}");
            summary.selections.push(action);
            if let Some(d) = &dispatcher {
                d.submit(action);
            }
        }
        for e in &out.events {
            if recent.len() == RECENT_EVENTS {
                recent.pop_front();
            }
            recent.push_back(e.clone());
        }

        let snapshot = build_snapshot(
            seq,
            &frame,
            &out,
            &recent,
            dispatcher.as_ref().and_then(|d| d.last_command()),
            clock.latencies,
            &config,
        );

        if sinks.server.is_some() || sinks.dump_dir.is_some() {
            let overlay = overlay_frame(&frame, &out, &recognizer);
            if let Some(server) = sinks.server {
                server.publish(snapshot.to_json(), encode_frame_message(&overlay, seq));
            }
            if let Some(dir) = &sinks.dump_dir {
                let path = dir.join(format!("frame_{seq:06}.ppm"));
                if let Err(source) = write_ppm(&path, &overlay) {
                    failure = Some(PipelineError::Dump { path, source });
                    break;
                }
            }
        }
        if let Some(cb) = sinks.on_snapshot.as_mut() {
            cb(&snapshot);
        }
        summary.frames += 1;

        if let Some(interval) = frame_interval {
            let spent = started.elapsed();
            if spent < interval {
                std::thread::sleep(interval - spent);
            }
        }
    }

    summary.dispatch = dispatcher.map(Dispatcher::finish);
    match failure {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

fn apply_tuning(request: TuningRequest, config: &mut PipelineConfig, recognizer: &mut Recognizer, frame: &Frame) {
    let result = request.patch.apply_to(config).and_then(|next| {
        let limit = frame.width().min(frame.height()) / 2;
        if next.blur_radius > limit {
            return Err(format!(
                "blur_radius {} exceeds {limit} for {}x{} frames",
                next.blur_radius,
                frame.width(),
                frame.height()
            ));
        }
        recognizer
            .set_params(next.recognizer_params())
            .map_err(|e| e.to_string())?;
        Ok(next)
    });
    match result {
        Ok(next) => {
            log::info!("applied tuning {:?}", request.patch);
            *config = next;
            request.respond(Ok(()));
        }
        Err(e) => {
            log::warn!("rejected tuning: {e}");
            request.respond(Err(e));
        }
    }
}

pub fn overlay_frame(frame: &Frame, out: &StepOutput, recognizer: &Recognizer) -> Frame {
    let boxes: Vec<_> = out.blobs.iter().map(|b| b.bbox).collect();
    let spec = OverlaySpec {
        menu: recognizer.menu(),
        pointer: out.pointer.present.then_some(out.pointer.position),
        hovered: out.hovered.as_deref(),
        dwell_progress: out.dwell_progress,
        blobs: &boxes,
    };
    render_overlay(frame, &spec)
}

fn build_snapshot(
    seq: u64,
    frame: &Frame,
    out: &StepOutput,
    recent: &VecDeque<pointmenu_core::GestureEvent>,
    last_command: Option<crate::control::CommandRecord>,
    latencies: StageLatencies,
    config: &PipelineConfig,
) -> StateSnapshot {
    StateSnapshot {
        frame_seq: seq,
        timestamp_ms: frame.timestamp_ms,
        width: frame.width(),
        height: frame.height(),
        blobs: out.blobs.iter().map(BlobSummary::from).collect(),
        pointer: out
            .pointer
            .present
            .then_some([out.pointer.position.0, out.pointer.position.1]),
        hovered: out.hovered.clone(),
        dwell_progress: out.dwell_progress,
        recent_events: recent.iter().cloned().collect(),
        last_command,
        latencies_us: latencies,
        config: config.tunables(),
    }
}
