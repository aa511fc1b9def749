use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use pointmenu::bench::run_bench;
use pointmenu::server::BroadcastServer;
use pointmenu::source::{open_source, CaptureMode, SourceSpec};
use pointmenu::{run_pipeline, PipelineConfig, Sinks};

#[derive(Parser)]
#[command(
    name = "pointmenu",
    version,
    about = "Point at a virtual menu to control a media player"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the recognition loop.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// synthetic:<script.json> | dir:<path> | camera:<id or device path>
        #[arg(long)]
        source: String,
        /// Do not start the WebSocket server even if the config names one.
        #[arg(long)]
        headless: bool,
        /// Write every overlay frame to this directory as frame_NNNNNN.ppm.
        #[arg(long)]
        dump_frames: Option<PathBuf>,
        /// Overrides listen_address from the config.
        #[arg(long)]
        listen: Option<String>,
        /// Frame rate for directory replay and camera capture.
        #[arg(long, default_value_t = 30)]
        fps: u32,
    },
    /// Validate a config file and print it with defaults filled in.
    CheckConfig { file: PathBuf },
    /// Time each pipeline stage over a synthetic sweep.
    Bench {
        #[arg(long, default_value_t = 300)]
        frames: usize,
        /// WIDTHxHEIGHT
        #[arg(long, default_value = "640x480", value_parser = parse_size)]
        size: (usize, usize),
    },
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: usize = w.parse().map_err(|_| format!("bad width {w:?}"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("width and height must be positive".into());
    }
    Ok((w, h))
}

/// Failures the user can fix by changing arguments or config; exit code 2.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<E: Into<anyhow::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(UsageError(e.into()))
}

fn run(
    config: PathBuf,
    source: String,
    headless: bool,
    dump_frames: Option<PathBuf>,
    listen: Option<String>,
    fps: u32,
) -> Result<()> {
    let mut config = PipelineConfig::load(&config).map_err(usage)?;
    if let Some(addr) = listen {
        config.listen_address = Some(addr);
        config.validate().map_err(usage)?;
    }
    let spec: SourceSpec = source.parse().map_err(usage)?;
    let mode = CaptureMode {
        fps,
        ..CaptureMode::default()
    };
    let mut source = open_source(&spec, mode)?;

    let shutdown = Arc::new(AtomicBool::new(false));
    {
        let shutdown = Arc::clone(&shutdown);
        ctrlc::set_handler(move || shutdown.store(true, Ordering::Relaxed))
            .map_err(|e| anyhow::anyhow!("cannot install signal handler: {e}"))?;
    }

    let server = match (&config.listen_address, headless) {
        (Some(addr), false) => {
            Some(BroadcastServer::bind(addr).map_err(|e| anyhow::anyhow!("cannot listen on {addr}: {e}"))?)
        }
        _ => None,
    };
    let (server, tuning) = match server {
        Some((s, rx)) => (Some(s), Some(rx)),
        None => (None, None),
    };
    let sinks = Sinks {
        server: server.as_ref(),
        tuning,
        dump_dir: dump_frames,
        on_snapshot: None,
    };
    let summary = run_pipeline(&config, source.as_mut(), sinks, &shutdown)?;
    if let Some(s) = server {
        s.shutdown();
    }
    log::info!(
        "processed {} frames, {} selections",
        summary.frames,
        summary.selections.len()
    );
    if let Some(stats) = summary.dispatch {
        log::info!(
            "dispatched {} commands, {} acked, {} errors",
            stats.sent,
            stats.acked,
            stats.errors
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            source,
            headless,
            dump_frames,
            listen,
            fps,
        } => run(config, source, headless, dump_frames, listen, fps),
        Command::CheckConfig { file } => PipelineConfig::load(&file).map_err(usage).map(|c| {
            println!("{}", c.to_normalized_json());
        }),
        Command::Bench { frames, size } => (|| {
            if frames == 0 {
                bail!(usage(anyhow::anyhow!("--frames must be positive")));
            }
            let report = run_bench(frames, size.0, size.1)?;
            print!("{report}");
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let is_usage = e.chain().any(|c| c.is::<UsageError>());
            log::error!("{e}");
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}
