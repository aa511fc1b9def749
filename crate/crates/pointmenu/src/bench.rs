//! Per-stage latency benchmark over a synthetic sweep.

use std::fmt;
use std::time::Instant;

use pointmenu_core::{default_menu, Keyframe, Recognizer, RecognizerParams, SyntheticScript, SyntheticSource};

use crate::pipeline::{overlay_frame, InstantClock};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percentiles {
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

impl Percentiles {
    /// Nearest-rank percentiles of microsecond samples.
    pub fn from_micros(samples: &[u64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_unstable();
        let rank = |p: f64| {
            if s.is_empty() {
                return 0.0;
            }
            let i = ((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1;
            s[i] as f64 / 1000.0
        };
        Percentiles {
            p50_ms: rank(0.50),
            p95_ms: rank(0.95),
            max_ms: rank(1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    /// Stage name and its latency distribution; `total` covers blur through tracking.
    pub rows: Vec<(&'static str, Percentiles)>,
}

impl BenchReport {
    pub fn row(&self, name: &str) -> Option<Percentiles> {
        self.rows.iter().find(|(n, _)| *n == name).map(|(_, p)| *p)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "frames: {}  size: {}x{}", self.frames, self.width, self.height)?;
        writeln!(f, "{:<10} {:>9} {:>9} {:>9}", "stage", "p50_ms", "p95_ms", "max_ms")?;
        for (name, p) in &self.rows {
            writeln!(f, "{:<10} {:>9.3} {:>9.3} {:>9.3}", name, p.p50_ms, p.p95_ms, p.max_ms)?;
        }
        Ok(())
    }
}

/// A green disk sweeping across the frame and over the menu strip.
pub fn sweep_script(frames: usize, width: usize, height: usize) -> SyntheticScript {
    let duration_ms = (frames as u64 * 1000).div_ceil(30);
    let radius = (width.min(height) as f64 / 20.0).max(2.0);
    let key = |t_ms, x, y| Keyframe {
        t_ms,
        center: (x, y),
        radius,
        disk_rgb: [20, 230, 40],
    };
    SyntheticScript {
        width,
        height,
        fps: 30,
        duration_ms,
        background_rgb: [60, 50, 45],
        keyframes: vec![
            key(0, 0.8, 0.2),
            key(duration_ms / 3, 0.08, 0.1),
            key(2 * duration_ms / 3, 0.08, 0.8),
            key(duration_ms, 0.6, 0.6),
        ],
        jitter: None,
    }
}

pub fn run_bench(frames: usize, width: usize, height: usize) -> Result<BenchReport, pointmenu_core::Error> {
    let source = SyntheticSource::new(sweep_script(frames, width, height))?;
    let mut recognizer = Recognizer::new(RecognizerParams::default(), default_menu())?;
    let mut stages: [Vec<u64>; 5] = Default::default();
    let mut total = Vec::with_capacity(frames);
    let mut overlay = Vec::with_capacity(frames);
    for frame in source.take(frames) {
        let mut clock = InstantClock::start();
        let out = recognizer.step(&frame, &mut clock)?;
        let l = clock.latencies;
        for (samples, v) in stages.iter_mut().zip([l.blur, l.threshold, l.label, l.select, l.track]) {
            samples.push(v);
        }
        total.push(l.total);
        let t = Instant::now();
        std::hint::black_box(overlay_frame(&frame, &out, &recognizer));
        overlay.push(t.elapsed().as_micros() as u64);
    }
    let names = ["blur", "threshold", "label", "select", "track"];
    let mut rows: Vec<(&'static str, Percentiles)> = names
        .iter()
        .zip(&stages)
        .map(|(n, s)| (*n, Percentiles::from_micros(s)))
        .collect();
    rows.push(("total", Percentiles::from_micros(&total)));
    rows.push(("overlay", Percentiles::from_micros(&overlay)));
    Ok(BenchReport {
        frames: total.len(),
        width,
        height,
        rows,
    })
}
