//! Pixel kernels: box blur, RGB to HSV, HSV band thresholding.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::frame::{BinaryMask, Frame};
use crate::Error;

/// Uniform `(2r+1)²` mean filter with edge replication.
///
/// Every output channel is the window sum divided by the window size,
/// rounded half-up, so results are bit-exact across platforms. Radius 0
/// returns a copy of the input.
pub fn box_blur(frame: &Frame, radius: usize) -> Result<Frame, Error> {
    let (w, h) = (frame.width(), frame.height());
    let limit = w.min(h) / 2;
    if radius > limit {
        return Err(Error::BlurRadius { radius, limit });
    }
    if radius == 0 {
        return Ok(frame.clone());
    }

    let src = frame.as_bytes();
    let r = radius as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    // Horizontal window sums per channel, edges replicated.
    let mut rows = vec![0u32; w * h * 3];
    for y in 0..h {
        let line = &src[y * w * 3..(y + 1) * w * 3];
        let out = &mut rows[y * w * 3..(y + 1) * w * 3];
        let mut acc = [0u32; 3];
        for dx in -r..=r {
            let sx = clamp(dx, w);
            for c in 0..3 {
                acc[c] += u32::from(line[sx * 3 + c]);
            }
        }
        for x in 0..w {
            out[x * 3..x * 3 + 3].copy_from_slice(&acc);
            let leaving = clamp(x as isize - r, w);
            let entering = clamp(x as isize + r + 1, w);
            for c in 0..3 {
                acc[c] = acc[c] + u32::from(line[entering * 3 + c]) - u32::from(line[leaving * 3 + c]);
            }
        }
    }

    // Vertical pass over the row sums.
    let n = ((2 * radius + 1) * (2 * radius + 1)) as u32;
    let mut dst = vec![0u8; w * h * 3];
    let stride = w * 3;
    let mut acc = vec![0u32; stride];
    for dy in -r..=r {
        let sy = clamp(dy, h);
        for (a, v) in acc.iter_mut().zip(&rows[sy * stride..(sy + 1) * stride]) {
            *a += v;
        }
    }
    for y in 0..h {
        for (d, &a) in dst[y * stride..(y + 1) * stride].iter_mut().zip(&acc) {
            *d = ((2 * a + n) / (2 * n)) as u8;
        }
        let leaving = clamp(y as isize - r, h) * stride;
        let entering = clamp(y as isize + r + 1, h) * stride;
        for i in 0..stride {
            acc[i] = acc[i] + rows[entering + i] - rows[leaving + i];
        }
    }

    Frame::from_rgb(w, h, dst, frame.timestamp_ms)
}

/// A colour in hexcone HSV: hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone conversion. Achromatic pixels get hue 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = f64::from(max) / 255.0;
    if max == min {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let delta = f64::from(max - min);
    let s = delta / f64::from(max);
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let sector = if max as f64 == r {
        (g - b) / delta
    } else if max as f64 == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h < 0.0 {
        h += 360.0;
    }
    HsvPixel { h, s, v }
}

/// Inclusive HSV band. `h_lo > h_hi` selects the hue interval that wraps through 0°.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HsvRange {
    pub h_lo: f64,
    pub h_hi: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl HsvRange {
    pub fn new(h: (f64, f64), s: (f64, f64), v: (f64, f64)) -> Result<Self, Error> {
        let range = HsvRange {
            h_lo: h.0,
            h_hi: h.1,
            s_lo: s.0,
            s_hi: s.1,
            v_lo: v.0,
            v_hi: v.1,
        };
        range.validate()?;
        Ok(range)
    }

    /// Accepts every pixel.
    pub fn full() -> Self {
        HsvRange {
            h_lo: 0.0,
            h_hi: 360f64.next_down(),
            s_lo: 0.0,
            s_hi: 1.0,
            v_lo: 0.0,
            v_hi: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (field, value) in [("h_lo", self.h_lo), ("h_hi", self.h_hi)] {
            if !(0.0..360.0).contains(&value) {
                return Err(Error::OutOfRange {
                    field,
                    detail: format!("{value} is not in [0, 360)"),
                });
            }
        }
        for (field, lo, hi) in [("s", self.s_lo, self.s_hi), ("v", self.v_lo, self.v_hi)] {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
                return Err(Error::OutOfRange {
                    field,
                    detail: format!("bounds [{lo}, {hi}] must lie in [0, 1]"),
                });
            }
            if lo > hi {
                return Err(Error::OutOfRange {
                    field,
                    detail: format!("lower bound {lo} exceeds upper bound {hi}"),
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn is_wrapped(&self) -> bool {
        self.h_lo > self.h_hi
    }

    #[inline]
    pub fn contains(&self, p: HsvPixel) -> bool {
        let hue = if self.is_wrapped() {
            p.h >= self.h_lo || p.h <= self.h_hi
        } else {
            p.h >= self.h_lo && p.h <= self.h_hi
        };
        hue && p.s >= self.s_lo && p.s <= self.s_hi && p.v >= self.v_lo && p.v <= self.v_hi
    }
}

/// Marks every pixel whose HSV value falls inside `range`.
pub fn threshold_hsv(frame: &Frame, range: &HsvRange) -> BinaryMask {
    let bits: Vec<bool> = frame
        .pixels()
        .map(|[r, g, b]| range.contains(rgb_to_hsv(r, g, b)))
        .collect();
    BinaryMask::new(frame.width(), frame.height(), bits).expect("mask matches frame dimensions")
}
