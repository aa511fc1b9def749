//! Pointer smoothing and dwell-to-select.
//!
//! Both halves are pure transitions `(state, input) -> (state, events)`.
//! Nothing is learned or stored beyond [`PointerState`] and [`DwellTracker`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::menu::{hit_test, MenuModel};

/// Smoothed pointer in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointerState {
    pub present: bool,
    /// Meaningful only while `present`.
    pub position: (f64, f64),
    pub last_seen_ms: u64,
}

/// Exponential smoothing of the observed blob position.
///
/// Without an observation the last position is held until more than
/// `lost_timeout_ms` has passed since it was seen.
pub fn update_pointer(
    prev: &PointerState,
    observation: Option<(f64, f64)>,
    alpha: f64,
    now_ms: u64,
    lost_timeout_ms: u64,
) -> PointerState {
    match observation {
        Some(obs) => {
            let position = if prev.present {
                (
                    alpha * obs.0 + (1.0 - alpha) * prev.position.0,
                    alpha * obs.1 + (1.0 - alpha) * prev.position.1,
                )
            } else {
                obs
            };
            PointerState {
                present: true,
                position,
                last_seen_ms: now_ms,
            }
        }
        None if prev.present && now_ms.saturating_sub(prev.last_seen_ms) > lost_timeout_ms => PointerState {
            present: false,
            ..*prev
        },
        None => *prev,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum GestureKind {
    PointerMoved,
    PointerLost,
    HoverStarted,
    HoverProgress,
    Selected,
    HoverCancelled,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GestureEvent {
    pub kind: GestureKind,
    pub region: Option<String>,
    /// Set on `HoverProgress` only.
    pub progress: Option<f64>,
    pub timestamp_ms: u64,
}

impl GestureEvent {
    pub fn new(kind: GestureKind, timestamp_ms: u64) -> Self {
        GestureEvent {
            kind,
            region: None,
            progress: None,
            timestamp_ms,
        }
    }

    fn for_region(kind: GestureKind, region: &str, timestamp_ms: u64) -> Self {
        GestureEvent {
            kind,
            region: Some(region.to_string()),
            progress: None,
            timestamp_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellParams {
    pub dwell_ms: u64,
    pub cooldown_ms: u64,
    /// Growth of the hovered region on every side, as a fraction of the frame dimension.
    pub hysteresis_margin: f64,
}

impl Default for DwellParams {
    fn default() -> Self {
        DwellParams {
            dwell_ms: 800,
            cooldown_ms: 1500,
            hysteresis_margin: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DwellTracker {
    pub hovered_region: Option<String>,
    /// Zero whenever `hovered_region` is `None`; never above the dwell threshold.
    pub hover_elapsed_ms: u64,
    pub cooldown_remaining_ms: u64,
    /// `PointerLost` has been reported for the current absence.
    pub pointer_lost: bool,
}

/// Advances the dwell state machine by `dt_ms`.
///
/// The interval of the update on which a region is entered already counts
/// toward its dwell. Cooldown ticks down on every call and only suppresses
/// `Selected`; hover events keep flowing while it runs.
pub fn update_dwell(
    tracker: &DwellTracker,
    pointer: &PointerState,
    frame_size: (usize, usize),
    menu: &MenuModel,
    dt_ms: u64,
    params: &DwellParams,
    now_ms: u64,
) -> (DwellTracker, Vec<GestureEvent>) {
    let mut next = tracker.clone();
    let mut events = Vec::new();
    next.cooldown_remaining_ms = next.cooldown_remaining_ms.saturating_sub(dt_ms);

    if !pointer.present {
        if let Some(id) = next.hovered_region.take() {
            events.push(GestureEvent::for_region(GestureKind::HoverCancelled, &id, now_ms));
            next.hover_elapsed_ms = 0;
        }
        if !next.pointer_lost {
            events.push(GestureEvent::new(GestureKind::PointerLost, now_ms));
            next.pointer_lost = true;
        }
        return (next, events);
    }
    next.pointer_lost = false;

    let normalized = (
        pointer.position.0 / frame_size.0 as f64,
        pointer.position.1 / frame_size.1 as f64,
    );
    let hit = hit_test(
        menu,
        normalized,
        params.hysteresis_margin,
        next.hovered_region.as_deref(),
    )
    .map(|r| r.id.as_str());

    if next.hovered_region.as_deref() != hit {
        if let Some(old) = next.hovered_region.take() {
            events.push(GestureEvent::for_region(GestureKind::HoverCancelled, &old, now_ms));
        }
        next.hover_elapsed_ms = 0;
        if let Some(id) = hit {
            events.push(GestureEvent::for_region(GestureKind::HoverStarted, id, now_ms));
            next.hovered_region = Some(id.to_string());
        }
    }

    let Some(id) = hit else {
        return (next, events);
    };

    next.hover_elapsed_ms = (next.hover_elapsed_ms + dt_ms).min(params.dwell_ms);
    let progress = if params.dwell_ms == 0 {
        1.0
    } else {
        next.hover_elapsed_ms as f64 / params.dwell_ms as f64
    };
    events.push(GestureEvent {
        progress: Some(progress),
        ..GestureEvent::for_region(GestureKind::HoverProgress, id, now_ms)
    });
    if next.hover_elapsed_ms >= params.dwell_ms && next.cooldown_remaining_ms == 0 {
        events.push(GestureEvent::for_region(GestureKind::Selected, id, now_ms));
        next.hover_elapsed_ms = 0;
        next.cooldown_remaining_ms = params.cooldown_ms;
    }
    (next, events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::menu::{default_menu, MenuRegion, Rect};
    use crate::PlayerAction;
    use alloc::vec;
    use proptest::prelude::*;

    const SIZE: (usize, usize) = (640, 480);

    fn at(x: f64, y: f64) -> PointerState {
        PointerState {
            present: true,
            position: (x * SIZE.0 as f64, y * SIZE.1 as f64),
            last_seen_ms: 0,
        }
    }

    fn play_center() -> PointerState {
        let (x, y) = default_menu().region("play_pause").unwrap().rect.center();
        at(x, y)
    }

    /// Runs `steps` updates of `dt` with a fixed pointer; returns all events.
    fn hold(
        tracker: &mut DwellTracker,
        pointer: &PointerState,
        steps: usize,
        dt: u64,
        params: &DwellParams,
        t0: u64,
    ) -> Vec<(usize, GestureEvent)> {
        let menu = default_menu();
        let mut out = Vec::new();
        for i in 0..steps {
            let (next, ev) = update_dwell(tracker, pointer, SIZE, &menu, dt, params, t0 + (i as u64 + 1) * dt);
            *tracker = next;
            out.extend(ev.into_iter().map(|e| (i + 1, e)));
        }
        out
    }

    fn kinds(events: &[(usize, GestureEvent)], kind: GestureKind) -> Vec<usize> {
        events.iter().filter(|(_, e)| e.kind == kind).map(|(i, _)| *i).collect()
    }

    #[test]
    fn pointer_bootstrap_and_smoothing() {
        let p = update_pointer(&PointerState::default(), Some((100.0, 200.0)), 0.4, 10, 250);
        assert_eq!(
            p,
            PointerState {
                present: true,
                position: (100.0, 200.0),
                last_seen_ms: 10
            }
        );

        let prev = PointerState {
            present: true,
            position: (0.0, 0.0),
            last_seen_ms: 0,
        };
        let p = update_pointer(&prev, Some((10.0, 20.0)), 0.5, 33, 250);
        assert_eq!(p.position, (5.0, 10.0));
    }

    #[test]
    fn pointer_timeout_boundary() {
        let prev = PointerState {
            present: true,
            position: (1.0, 2.0),
            last_seen_ms: 0,
        };
        assert!(update_pointer(&prev, None, 0.4, 250, 250).present);
        assert!(!update_pointer(&prev, None, 0.4, 300, 250).present);
    }

    #[test]
    fn selects_on_eighth_update() {
        let params = DwellParams {
            dwell_ms: 800,
            ..DwellParams::default()
        };
        let mut t = DwellTracker::default();
        let ev = hold(&mut t, &play_center(), 12, 100, &params, 0);
        assert_eq!(kinds(&ev, GestureKind::HoverStarted), [1]);
        assert_eq!(kinds(&ev, GestureKind::Selected), [8]);
        let sel = ev.iter().find(|(_, e)| e.kind == GestureKind::Selected).unwrap();
        assert_eq!(sel.1.region.as_deref(), Some("play_pause"));
        let progress: Vec<f64> = ev.iter().filter_map(|(_, e)| e.progress).collect();
        assert_eq!(progress[..8], [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0]);
    }

    #[test]
    fn idle_outside_regions_is_silent() {
        let t = DwellTracker::default();
        let (next, ev) = update_dwell(
            &t,
            &at(0.5, 0.5),
            SIZE,
            &default_menu(),
            33,
            &DwellParams::default(),
            33,
        );
        assert!(ev.is_empty());
        assert_eq!(next, t);
    }

    #[test]
    fn cooldown_blocks_second_selection() {
        let params = DwellParams {
            dwell_ms: 800,
            cooldown_ms: 1500,
            ..DwellParams::default()
        };
        let mut t = DwellTracker::default();
        let first = hold(&mut t, &play_center(), 8, 100, &params, 0);
        assert_eq!(kinds(&first, GestureKind::Selected), [8]);
        let after = hold(&mut t, &play_center(), 10, 100, &params, 800);
        assert!(kinds(&after, GestureKind::Selected).is_empty());
        assert_eq!(kinds(&after, GestureKind::HoverProgress).len(), 10);
        assert!(t.hover_elapsed_ms <= params.dwell_ms);
        // Re-arms once the cooldown has fully elapsed.
        let later = hold(&mut t, &play_center(), 5, 100, &params, 1800);
        assert_eq!(kinds(&later, GestureKind::Selected), [5]);
    }

    #[test]
    fn leaving_cancels_and_lost_pointer_reports_once() {
        let params = DwellParams::default();
        let menu = default_menu();
        let (t, _) = update_dwell(&DwellTracker::default(), &play_center(), SIZE, &menu, 33, &params, 33);
        let (t, ev) = update_dwell(&t, &at(0.5, 0.5), SIZE, &menu, 33, &params, 66);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, GestureKind::HoverCancelled);
        assert_eq!(t.hovered_region, None);
        assert_eq!(t.hover_elapsed_ms, 0);

        let (t, _) = update_dwell(&t, &play_center(), SIZE, &menu, 33, &params, 99);
        let gone = PointerState::default();
        let (t, ev) = update_dwell(&t, &gone, SIZE, &menu, 33, &params, 132);
        assert_eq!(
            ev.iter().map(|e| e.kind).collect::<Vec<_>>(),
            [GestureKind::HoverCancelled, GestureKind::PointerLost]
        );
        let (_, ev) = update_dwell(&t, &gone, SIZE, &menu, 33, &params, 165);
        assert!(ev.is_empty());
    }

    #[test]
    fn moving_between_abutting_regions() {
        let mk = |id: &str, x0: f64, x1: f64| MenuRegion {
            id: id.to_string(),
            action: PlayerAction::Next,
            rect: Rect {
                x0,
                y0: 0.0,
                x1,
                y1: 1.0,
            },
            caption: String::new(),
        };
        let menu = MenuModel::new(vec![mk("a", 0.0, 0.5), mk("b", 0.5, 1.0)]).unwrap();
        let params = DwellParams {
            hysteresis_margin: 0.0,
            ..DwellParams::default()
        };
        let (t, _) = update_dwell(&DwellTracker::default(), &at(0.25, 0.5), SIZE, &menu, 10, &params, 10);
        let (t, ev) = update_dwell(&t, &at(0.75, 0.5), SIZE, &menu, 10, &params, 20);
        let seq: Vec<(GestureKind, Option<&str>)> = ev.iter().map(|e| (e.kind, e.region.as_deref())).collect();
        assert_eq!(
            seq,
            [
                (GestureKind::HoverCancelled, Some("a")),
                (GestureKind::HoverStarted, Some("b")),
                (GestureKind::HoverProgress, Some("b")),
            ]
        );
        assert_eq!(t.hover_elapsed_ms, 10);
    }

    #[test]
    fn tracker_size_is_fixed() {
        // The whole recognition state is two fixed-size values; a long run
        // must not grow the hovered id beyond the longest menu id.
        let params = DwellParams::default();
        let menu = default_menu();
        let longest = menu.regions().iter().map(|r| r.id.len()).max().unwrap();
        let mut t = DwellTracker::default();
        let mut p = PointerState::default();
        for i in 0..20_000u64 {
            let x = ((i * 7919) % 1000) as f64 / 1000.0 * 640.0;
            let y = ((i * 104729) % 1000) as f64 / 1000.0 * 480.0;
            let obs = if i % 97 < 5 { None } else { Some((x, y)) };
            p = update_pointer(&p, obs, 0.4, i * 33, 250);
            t = update_dwell(&t, &p, SIZE, &menu, 33, &params, i * 33).0;
            assert!(t.hovered_region.as_ref().map_or(0, |s| s.len()) <= longest);
            assert!(t.hover_elapsed_ms <= params.dwell_ms);
        }
    }

    /// Pointer path samples: `None` means no pointer this update.
    fn arb_path() -> impl Strategy<Value = Vec<Option<(f64, f64)>>> {
        proptest::collection::vec(
            prop_oneof![
                1 => Just(None),
                8 => (0.0..0.2f64, 0.0..1.0f64).prop_map(Some),
                2 => (0.0..1.0f64, 0.0..1.0f64).prop_map(Some),
            ],
            1..300,
        )
    }

    fn run(path: &[Option<(f64, f64)>], dt: u64, params: &DwellParams) -> (Vec<GestureEvent>, DwellTracker) {
        let menu = default_menu();
        let mut t = DwellTracker::default();
        let mut all = Vec::new();
        for (i, p) in path.iter().enumerate() {
            let pointer = match p {
                Some((x, y)) => at(*x, *y),
                None => PointerState::default(),
            };
            let (next, ev) = update_dwell(&t, &pointer, SIZE, &menu, dt, params, i as u64 * dt);
            t = next;
            all.extend(ev);
        }
        (all, t)
    }

    proptest! {
        #[test]
        fn events_are_well_nested(path in arb_path(), dt in 1u64..200) {
            let params = DwellParams::default();
            let (events, _) = run(&path, dt, &params);
            let mut open: Option<String> = None;
            let mut last_selected: Option<u64> = None;
            for e in &events {
                match e.kind {
                    GestureKind::HoverStarted => {
                        prop_assert!(open.is_none());
                        open = e.region.clone();
                    }
                    GestureKind::HoverCancelled => {
                        prop_assert_eq!(&open, &e.region);
                        open = None;
                    }
                    GestureKind::Selected => {
                        prop_assert!(e.region.is_some());
                        prop_assert_eq!(&open, &e.region);
                        if let Some(prev) = last_selected {
                            prop_assert!(e.timestamp_ms - prev >= params.cooldown_ms);
                        }
                        last_selected = Some(e.timestamp_ms);
                    }
                    GestureKind::HoverProgress => {
                        let p = e.progress.unwrap();
                        prop_assert!((0.0..=1.0).contains(&p));
                        prop_assert_eq!(&open, &e.region);
                    }
                    GestureKind::PointerLost | GestureKind::PointerMoved => {
                        prop_assert!(e.region.is_none());
                    }
                }
            }
        }

        #[test]
        fn deterministic(path in arb_path(), dt in 1u64..200) {
            let params = DwellParams::default();
            prop_assert_eq!(run(&path, dt, &params), run(&path, dt, &params));
        }

        #[test]
        fn hysteresis_holds_inside_inflated_rect(
            offsets in proptest::collection::vec((-0.0199..0.0199f64, -0.0199..0.0199f64), 1..100),
        ) {
            let params = DwellParams::default();
            let menu = default_menu();
            let rect = menu.region("vol_up").unwrap().rect;
            let (cx, cy) = rect.center();
            let (t, _) = update_dwell(&DwellTracker::default(), &at(cx, cy), SIZE, &menu, 33, &params, 0);
            let mut t = t;
            for (i, (dx, dy)) in offsets.iter().enumerate() {
                // Points on or just outside the plain rect edges, within the margin.
                let x = if *dx >= 0.0 { rect.x1 + dx } else { rect.x0 + dx };
                let y = cy + dy;
                let (next, ev) = update_dwell(&t, &at(x, y), SIZE, &menu, 33, &params, i as u64 * 33);
                prop_assert!(ev.iter().all(|e| e.kind != GestureKind::HoverCancelled));
                t = next;
            }
            prop_assert_eq!(t.hovered_region.as_deref(), Some("vol_up"));
        }

        #[test]
        fn continuous_hover_fires_once_per_cooldown_window(
            steps in 1usize..200,
            dt in 1u64..120,
            dwell in 100u64..1500,
            cooldown in 0u64..3000,
        ) {
            let params = DwellParams { dwell_ms: dwell, cooldown_ms: cooldown, hysteresis_margin: 0.02 };
            let path = vec![Some(default_menu().region("mute").unwrap().rect.center()); steps];
            let (events, _) = run(&path, dt, &params);
            let selected = events.iter().filter(|e| e.kind == GestureKind::Selected).count();
            let held = steps as u64 * dt;
            if held < dwell {
                prop_assert_eq!(selected, 0);
            } else {
                prop_assert!(selected >= 1);
                // After the first selection, re-arming needs both cooldown and dwell.
                let gap = cooldown.max(dwell);
                prop_assert!(selected as u64 <= 1 + (held - dwell) / gap);
            }
        }
    }
}
