//! One frame through the whole recognition chain:
//! blur, HSV threshold, labeling, blob selection, pointer and dwell tracking.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::action::PlayerAction;
use crate::blob::{filter_blobs, label_components, largest_blob, Blob, Connectivity};
use crate::frame::Frame;
use crate::gesture::{
    update_dwell, update_pointer, DwellParams, DwellTracker, GestureEvent, GestureKind, PointerState,
};
use crate::menu::MenuModel;
use crate::pixelops::{box_blur, threshold_hsv, HsvRange};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Blur,
    Threshold,
    Label,
    Select,
    Track,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Blur, Stage::Threshold, Stage::Label, Stage::Select, Stage::Track];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Blur => "blur",
            Stage::Threshold => "threshold",
            Stage::Label => "label",
            Stage::Select => "select",
            Stage::Track => "track",
        }
    }
}

/// Called once at the end of each stage. The core has no clock of its own.
pub trait StageClock {
    fn lap(&mut self, stage: Stage);
}

impl StageClock for () {
    fn lap(&mut self, _: Stage) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecognizerParams {
    pub blur_radius: usize,
    pub hsv_range: HsvRange,
    pub min_area: usize,
    pub connectivity: Connectivity,
    /// EMA weight of the newest observation, in `(0, 1]`.
    pub alpha: f64,
    pub lost_timeout_ms: u64,
    pub dwell: DwellParams,
}

impl Default for RecognizerParams {
    fn default() -> Self {
        RecognizerParams {
            blur_radius: 1,
            hsv_range: HsvRange {
                h_lo: 80.0,
                h_hi: 160.0,
                s_lo: 0.45,
                s_hi: 1.0,
                v_lo: 0.25,
                v_hi: 1.0,
            },
            min_area: 200,
            connectivity: Connectivity::Eight,
            alpha: 0.4,
            lost_timeout_ms: 250,
            dwell: DwellParams::default(),
        }
    }
}

impl RecognizerParams {
    pub fn validate(&self) -> Result<(), Error> {
        self.hsv_range.validate()?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::OutOfRange {
                field: "alpha",
                detail: format!("{} is not in (0, 1]", self.alpha),
            });
        }
        if self.min_area == 0 {
            return Err(Error::OutOfRange {
                field: "min_area",
                detail: "must be at least 1".into(),
            });
        }
        if self.dwell.dwell_ms == 0 {
            return Err(Error::OutOfRange {
                field: "dwell_ms",
                detail: "must be at least 1".into(),
            });
        }
        let m = self.dwell.hysteresis_margin;
        if !(0.0..=0.5).contains(&m) {
            return Err(Error::OutOfRange {
                field: "hysteresis_margin",
                detail: format!("{m} is not in [0, 0.5]"),
            });
        }
        Ok(())
    }
}

/// Everything one frame produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Blobs that passed the area filter, in label order.
    pub blobs: Vec<Blob>,
    /// Label of the blob used as the pointer observation.
    pub pointer_blob: Option<u32>,
    pub pointer: PointerState,
    pub events: Vec<GestureEvent>,
    /// One entry per `Selected` event, in order.
    pub selections: Vec<PlayerAction>,
    pub hovered: Option<String>,
    pub dwell_progress: f64,
}

/// Owns the recognition state of one stream.
#[derive(Debug, Clone)]
pub struct Recognizer {
    params: RecognizerParams,
    menu: MenuModel,
    pointer: PointerState,
    tracker: DwellTracker,
    last_timestamp_ms: Option<u64>,
}

impl Recognizer {
    pub fn new(params: RecognizerParams, menu: MenuModel) -> Result<Self, Error> {
        params.validate()?;
        Ok(Recognizer {
            params,
            menu,
            pointer: PointerState::default(),
            tracker: DwellTracker::default(),
            last_timestamp_ms: None,
        })
    }

    pub fn params(&self) -> &RecognizerParams {
        &self.params
    }

    /// Swaps in new tunables; takes effect on the next [`Recognizer::step`].
    pub fn set_params(&mut self, params: RecognizerParams) -> Result<(), Error> {
        params.validate()?;
        self.params = params;
        Ok(())
    }

    pub fn menu(&self) -> &MenuModel {
        &self.menu
    }

    pub fn pointer(&self) -> &PointerState {
        &self.pointer
    }

    pub fn tracker(&self) -> &DwellTracker {
        &self.tracker
    }

    pub fn step(&mut self, frame: &Frame, clock: &mut impl StageClock) -> Result<StepOutput, Error> {
        let p = self.params;
        let now = frame.timestamp_ms;
        let dt = self.last_timestamp_ms.map_or(0, |last| now.saturating_sub(last));

        let blurred = box_blur(frame, p.blur_radius)?;
        clock.lap(Stage::Blur);

        let mask = threshold_hsv(&blurred, &p.hsv_range);
        clock.lap(Stage::Threshold);

        let blobs = label_components(&mask, p.connectivity);
        clock.lap(Stage::Label);

        let blobs = filter_blobs(blobs, p.min_area);
        let chosen = largest_blob(&blobs);
        let pointer_blob = chosen.map(|b| b.label);
        // Pixel indices to continuous coordinates (pixel centres at +0.5).
        let observation = chosen.map(|b| (b.centroid.0 + 0.5, b.centroid.1 + 0.5));
        clock.lap(Stage::Select);

        let prev = self.pointer;
        let pointer = update_pointer(&prev, observation, p.alpha, now, p.lost_timeout_ms);
        let mut events = Vec::new();
        if pointer.present && (!prev.present || pointer.position != prev.position) {
            events.push(GestureEvent::new(GestureKind::PointerMoved, now));
        }
        let (tracker, dwell_events) = update_dwell(
            &self.tracker,
            &pointer,
            (frame.width(), frame.height()),
            &self.menu,
            dt,
            &p.dwell,
            now,
        );
        events.extend(dwell_events);
        clock.lap(Stage::Track);

        let selections = events
            .iter()
            .filter(|e| e.kind == GestureKind::Selected)
            .filter_map(|e| e.region.as_deref().and_then(|id| self.menu.region(id)))
            .map(|r| r.action)
            .collect();
        let dwell_progress = events.iter().rev().find_map(|e| e.progress).unwrap_or(0.0);

        self.pointer = pointer;
        self.tracker = tracker;
        self.last_timestamp_ms = Some(now);

        Ok(StepOutput {
            blobs,
            pointer_blob,
            pointer,
            events,
            selections,
            hovered: self.tracker.hovered_region.clone(),
            dwell_progress,
        })
    }
}
