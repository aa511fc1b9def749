//! Deterministic frame scripts: a filled disk moving over a flat background.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::{Frame, Rgb};
use crate::num::{floor, round_half_up};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Keyframe {
    pub t_ms: u64,
    /// Normalized disk centre.
    pub center: (f64, f64),
    /// Pixels.
    pub radius: f64,
    pub disk_rgb: Rgb,
}

/// Per-frame uniform offset of the disk centre in `[-amplitude_px, amplitude_px]` on each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Jitter {
    pub amplitude_px: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SyntheticScript {
    pub width: usize,
    pub height: usize,
    pub fps: u32,
    pub duration_ms: u64,
    pub background_rgb: Rgb,
    /// Sorted by `t_ms`; disk parameters are linearly interpolated between them.
    pub keyframes: Vec<Keyframe>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub jitter: Option<Jitter>,
}

impl SyntheticScript {
    pub fn validate(&self) -> Result<(), Error> {
        let invalid = |detail| Error::Invalid {
            what: "synthetic script",
            detail,
        };
        if self.width == 0 || self.height == 0 {
            return Err(Error::EmptyDimensions);
        }
        if !(1..=1000).contains(&self.fps) {
            return Err(invalid(format!("fps {} must be in 1..=1000", self.fps)));
        }
        if self.keyframes.is_empty() {
            return Err(invalid("at least one keyframe is required".into()));
        }
        for (i, k) in self.keyframes.iter().enumerate() {
            if !(k.radius.is_finite() && k.radius > 0.0) {
                return Err(invalid(format!("keyframe {i}: radius {} must be > 0", k.radius)));
            }
            let (x, y) = k.center;
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(invalid(format!("keyframe {i}: center ({x}, {y}) outside [0,1]²")));
            }
            if i > 0 && self.keyframes[i - 1].t_ms > k.t_ms {
                return Err(invalid(format!("keyframe {i}: keyframes are not sorted by t_ms")));
            }
        }
        if let Some(j) = self.jitter {
            if !(j.amplitude_px.is_finite() && j.amplitude_px >= 0.0) {
                return Err(invalid(format!("jitter amplitude {} must be >= 0", j.amplitude_px)));
            }
        }
        Ok(())
    }

    /// `ceil(duration_ms * fps / 1000)`.
    pub fn frame_count(&self) -> u64 {
        (self.duration_ms * u64::from(self.fps)).div_ceil(1000)
    }

    pub fn timestamp_of(&self, index: u64) -> u64 {
        index * 1000 / u64::from(self.fps)
    }

    /// Disk centre (pixels), radius and colour at `t_ms`, before jitter.
    pub fn disk_at(&self, t_ms: u64) -> ((f64, f64), f64, Rgb) {
        let keys = &self.keyframes;
        let after = keys.partition_point(|k| k.t_ms <= t_ms);
        let (a, b, s) = if after == 0 {
            (&keys[0], &keys[0], 0.0)
        } else if after == keys.len() {
            (&keys[after - 1], &keys[after - 1], 0.0)
        } else {
            let (a, b) = (&keys[after - 1], &keys[after]);
            let s = (t_ms - a.t_ms) as f64 / (b.t_ms - a.t_ms) as f64;
            (a, b, s)
        };
        let lerp = |p: f64, q: f64| p + (q - p) * s;
        let center = (
            lerp(a.center.0, b.center.0) * self.width as f64,
            lerp(a.center.1, b.center.1) * self.height as f64,
        );
        let color =
            core::array::from_fn(|c| round_half_up(lerp(f64::from(a.disk_rgb[c]), f64::from(b.disk_rgb[c]))) as u8);
        (center, lerp(a.radius, b.radius), color)
    }
}

/// Fills every pixel whose centre lies within `radius` of `center`.
pub fn draw_disk(frame: &mut Frame, center: (f64, f64), radius: f64, color: Rgb) {
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let (cx, cy) = center;
    let x0 = (floor(cx - radius) as i64 - 1).max(0);
    let x1 = (floor(cx + radius) as i64 + 1).min(w - 1);
    let y0 = (floor(cy - radius) as i64 - 1).max(0);
    let y1 = (floor(cy + radius) as i64 + 1).min(h - 1);
    let r2 = radius * radius;
    for py in y0..=y1 {
        let dy = py as f64 + 0.5 - cy;
        for px in x0..=x1 {
            let dx = px as f64 + 0.5 - cx;
            if dx * dx + dy * dy <= r2 {
                frame.set_pixel(px as usize, py as usize, color);
            }
        }
    }
}

/// Frame stream rendered from a [`SyntheticScript`]. Same script, same bytes.
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    script: SyntheticScript,
    next_index: u64,
    rng: ChaCha8Rng,
}

impl SyntheticSource {
    pub fn new(script: SyntheticScript) -> Result<Self, Error> {
        script.validate()?;
        let seed = script.jitter.map_or(0, |j| j.seed);
        Ok(SyntheticSource {
            script,
            next_index: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn script(&self) -> &SyntheticScript {
        &self.script
    }

    pub fn fps(&self) -> u32 {
        self.script.fps
    }

    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl Iterator for SyntheticSource {
    type Item = Frame;

    fn next(&mut self) -> Option<Frame> {
        if self.next_index >= self.script.frame_count() {
            return None;
        }
        let t = self.script.timestamp_of(self.next_index);
        self.next_index += 1;
        let ((mut cx, mut cy), radius, color) = self.script.disk_at(t);
        if let Some(j) = self.script.jitter {
            cx += j.amplitude_px * (2.0 * self.unit() - 1.0);
            cy += j.amplitude_px * (2.0 * self.unit() - 1.0);
        }
        let s = &self.script;
        let mut frame = Frame::filled(s.width, s.height, s.background_rgb, t).expect("validated dimensions");
        draw_disk(&mut frame, (cx, cy), radius, color);
        Some(frame)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.script.frame_count() - self.next_index) as usize;
        (left, Some(left))
    }
}
