//! Allocation-only core of the pointmenu pipeline.
//!
//! Everything here is a pure function of its inputs: box blur, RGB to HSV
//! conversion and band thresholding, connected-component labeling, pointer
//! smoothing with dwell-to-select, the virtual menu and its overlay renderer,
//! deterministic synthetic frames, and the player command encoding. IO,
//! sockets, clocks and configuration files live in the `pointmenu` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod action;
pub mod blob;
pub mod error;
pub mod frame;
pub mod gesture;
pub mod menu;
mod num;
pub mod pixelops;
pub mod recognizer;
pub mod synthetic;

pub use action::{encode_command, PlayerAction};
pub use blob::{filter_blobs, label_components, largest_blob, Blob, Connectivity};
pub use error::Error;
pub use frame::{BinaryMask, Frame, Rgb};
pub use gesture::{update_dwell, update_pointer, DwellParams, DwellTracker, GestureEvent, GestureKind, PointerState};
pub use menu::{default_menu, hit_test, render_overlay, MenuModel, MenuRegion, OverlaySpec, Rect};
pub use pixelops::{box_blur, rgb_to_hsv, threshold_hsv, HsvPixel, HsvRange};
pub use recognizer::{Recognizer, RecognizerParams, Stage, StageClock, StepOutput};
pub use synthetic::{Jitter, Keyframe, SyntheticScript, SyntheticSource};
