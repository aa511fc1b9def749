#![allow(dead_code)]

use std::path::Path;
use std::sync::atomic::AtomicBool;

use pointmenu::source::synthetic_source;
use pointmenu::{run_pipeline, PipelineConfig, RunSummary, Sinks};
use pointmenu_core::{default_menu, Jitter, Keyframe, PlayerAction, SyntheticScript};

pub const SCENARIO_EXPECTED: [PlayerAction; 2] = [PlayerAction::PlayPause, PlayerAction::VolUp];

/// A green disk that rests on play_pause, returns to the middle, then rests
/// on vol_up, each for 1.2 s.
pub fn scenario_script(jitter: Option<Jitter>) -> SyntheticScript {
    let menu = default_menu();
    let at = |id: &str| menu.region(id).unwrap().rect.center();
    let mid = (0.5, 0.5);
    let key = |t_ms, center| Keyframe {
        t_ms,
        center,
        radius: 25.0,
        disk_rgb: [0, 255, 0],
    };
    SyntheticScript {
        width: 640,
        height: 480,
        fps: 30,
        duration_ms: 5500,
        background_rgb: [40, 40, 40],
        keyframes: vec![
            key(0, mid),
            key(400, mid),
            key(500, at("play_pause")),
            key(1700, at("play_pause")),
            key(1800, mid),
            key(3400, mid),
            key(3500, at("vol_up")),
            key(4700, at("vol_up")),
            key(4800, mid),
        ],
        jitter,
    }
}

pub fn scenario_config(player: &Path) -> PipelineConfig {
    PipelineConfig {
        player_socket_path: Some(player.to_owned()),
        ..PipelineConfig::default()
    }
}

pub fn run_script(config: &PipelineConfig, script: SyntheticScript, sinks: Sinks<'_>) -> RunSummary {
    let mut source = synthetic_source(script).unwrap();
    run_pipeline(config, &mut source, sinks, &AtomicBool::new(false)).unwrap()
}
