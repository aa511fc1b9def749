//! Virtual menu: action regions in normalized frame coordinates, hit-testing
//! and the overlay renderer.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::action::PlayerAction;
use crate::frame::{Frame, Rgb};
use crate::num::{floor, round_half_up};
use crate::Error;

pub const OUTLINE_COLOR: Rgb = [255, 255, 255];
pub const CAPTION_TICK_COLOR: Rgb = [0, 255, 255];
pub const HOVER_COLOR: Rgb = [0, 255, 0];
pub const CROSSHAIR_COLOR: Rgb = [255, 0, 0];
pub const BLOB_BOX_COLOR: Rgb = [255, 255, 0];

/// Crosshair arm length in pixels, excluding the centre.
pub const CROSSHAIR_ARM: i64 = 6;
/// Rows of the dwell progress bar.
pub const PROGRESS_BAR_ROWS: usize = 3;
/// Caption anchor tick length along the top edge.
const CAPTION_TICK_LEN: usize = 4;

/// Axis-aligned rectangle `[x0, x1) × [y0, y1)` in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "[f64; 4]", into = "[f64; 4]"))]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for Rect {
    fn from([x0, y0, x1, y1]: [f64; 4]) -> Self {
        Rect { x0, y0, x1, y1 }
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x0, r.y0, r.x1, r.y1]
    }
}

impl Rect {
    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    /// Half-open containment, after growing every side by `margin`.
    #[inline]
    pub fn contains(&self, (x, y): (f64, f64), margin: f64) -> bool {
        x >= self.x0 - margin && x < self.x1 + margin && y >= self.y0 - margin && y < self.y1 + margin
    }

    fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    /// Pixel bounds `[px0, px1) × [py0, py1)` on a `width × height` raster.
    pub fn to_pixels(&self, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let sx = |v: f64| round_half_up(v * width as f64).clamp(0, width as i64) as usize;
        let sy = |v: f64| round_half_up(v * height as f64).clamp(0, height as i64) as usize;
        (sx(self.x0), sy(self.y0), sx(self.x1), sy(self.y1))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MenuRegion {
    pub id: String,
    pub action: PlayerAction,
    pub rect: Rect,
    #[cfg_attr(feature = "serde", serde(default))]
    pub caption: String,
}

/// Validated list of non-overlapping regions with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<MenuRegion>", into = "Vec<MenuRegion>"))]
pub struct MenuModel {
    regions: Vec<MenuRegion>,
}

impl TryFrom<Vec<MenuRegion>> for MenuModel {
    type Error = Error;

    fn try_from(regions: Vec<MenuRegion>) -> Result<Self, Error> {
        MenuModel::new(regions)
    }
}

impl From<MenuModel> for Vec<MenuRegion> {
    fn from(m: MenuModel) -> Self {
        m.regions
    }
}

impl MenuModel {
    pub fn new(regions: Vec<MenuRegion>) -> Result<Self, Error> {
        let invalid = |detail: String| Error::Invalid { what: "menu", detail };
        for (i, r) in regions.iter().enumerate() {
            if r.id.is_empty() {
                return Err(invalid(format!("region {i} has an empty id")));
            }
            let Rect { x0, y0, x1, y1 } = r.rect;
            let in_unit = [x0, y0, x1, y1].iter().all(|v| (0.0..=1.0).contains(v));
            if !in_unit || x0 >= x1 || y0 >= y1 {
                return Err(invalid(format!(
                    "region '{}' rect [{x0}, {y0}, {x1}, {y1}] must satisfy 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1",
                    r.id
                )));
            }
            for other in &regions[..i] {
                if other.id == r.id {
                    return Err(invalid(format!("duplicate region id '{}'", r.id)));
                }
                if other.rect.overlaps(&r.rect) {
                    return Err(invalid(format!("regions '{}' and '{}' overlap", other.id, r.id)));
                }
            }
        }
        Ok(MenuModel { regions })
    }

    pub fn regions(&self) -> &[MenuRegion] {
        &self.regions
    }

    pub fn region(&self, id: &str) -> Option<&MenuRegion> {
        self.regions.iter().find(|r| r.id == id)
    }
}

/// Seven buttons stacked down the left edge, top to bottom.
pub fn default_menu() -> MenuModel {
    const X0: f64 = 0.02;
    const X1: f64 = 0.14;
    const TOP: f64 = 0.04;
    const BOTTOM: f64 = 0.96;
    const GAP: f64 = 0.02;
    let layout = [
        (PlayerAction::PlayPause, "Play/Pause"),
        (PlayerAction::Stop, "Stop"),
        (PlayerAction::Prev, "Prev"),
        (PlayerAction::Next, "Next"),
        (PlayerAction::VolDown, "Vol -"),
        (PlayerAction::VolUp, "Vol +"),
        (PlayerAction::Mute, "Mute"),
    ];
    let n = layout.len() as f64;
    let height = (BOTTOM - TOP - GAP * (n - 1.0)) / n;
    let regions = layout
        .iter()
        .enumerate()
        .map(|(i, &(action, caption))| {
            let y0 = TOP + i as f64 * (height + GAP);
            MenuRegion {
                id: action.wire_name().to_string(),
                action,
                rect: Rect {
                    x0: X0,
                    y0,
                    x1: X1,
                    y1: y0 + height,
                },
                caption: caption.to_string(),
            }
        })
        .collect();
    MenuModel::new(regions).expect("default layout is valid")
}

/// Region under `point`, if any.
///
/// The region named by `hovered` is tested first with every side grown by
/// `inflate`; all other regions use their plain half-open rectangles.
pub fn hit_test<'m>(
    menu: &'m MenuModel,
    point: (f64, f64),
    inflate: f64,
    hovered: Option<&str>,
) -> Option<&'m MenuRegion> {
    if let Some(active) = hovered.and_then(|id| menu.region(id)) {
        if active.rect.contains(point, inflate) {
            return Some(active);
        }
    }
    menu.regions.iter().find(|r| r.rect.contains(point, 0.0))
}

/// What to draw on top of a frame.
#[derive(Debug, Clone, Copy)]
pub struct OverlaySpec<'a> {
    pub menu: &'a MenuModel,
    /// Pointer in continuous pixel coordinates.
    pub pointer: Option<(f64, f64)>,
    pub hovered: Option<&'a str>,
    pub dwell_progress: f64,
    /// Inclusive pixel bounding boxes.
    pub blobs: &'a [(usize, usize, usize, usize)],
}

struct Canvas<'f> {
    frame: &'f mut Frame,
}

impl Canvas<'_> {
    fn put(&mut self, x: i64, y: i64, rgb: Rgb) {
        let (w, h) = (self.frame.width() as i64, self.frame.height() as i64);
        if (0..w).contains(&x) && (0..h).contains(&y) {
            self.frame.set_pixel(x as usize, y as usize, rgb);
        }
    }

    /// 1-px outline of the inclusive box.
    fn outline(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, rgb: Rgb) {
        if x1 < x0 || y1 < y0 {
            return;
        }
        for x in x0..=x1 {
            self.put(x, y0, rgb);
            self.put(x, y1, rgb);
        }
        for y in y0..=y1 {
            self.put(x0, y, rgb);
            self.put(x1, y, rgb);
        }
    }
}

/// Draws the menu, hover feedback, pointer crosshair and blob boxes onto a copy of `frame`.
///
/// Pixels not covered by a primitive keep their input values.
pub fn render_overlay(frame: &Frame, spec: &OverlaySpec<'_>) -> Frame {
    let mut out = frame.clone();
    let (w, h) = (frame.width(), frame.height());
    let mut canvas = Canvas { frame: &mut out };

    for &(x0, y0, x1, y1) in spec.blobs {
        canvas.outline(x0 as i64, y0 as i64, x1 as i64, y1 as i64, BLOB_BOX_COLOR);
    }

    for region in spec.menu.regions() {
        let (px0, py0, px1, py1) = region.rect.to_pixels(w, h);
        if px1 <= px0 || py1 <= py0 {
            continue;
        }
        let hovered = spec.hovered == Some(region.id.as_str());
        let color = if hovered { HOVER_COLOR } else { OUTLINE_COLOR };
        let (x0, y0, x1, y1) = (px0 as i64, py0 as i64, px1 as i64 - 1, py1 as i64 - 1);
        canvas.outline(x0, y0, x1, y1, color);

        if !region.caption.is_empty() {
            let len = CAPTION_TICK_LEN.min(px1 - px0) as i64;
            let start = x0 + (x1 - x0 + 1 - len) / 2;
            for x in start..start + len {
                canvas.put(x, y0, CAPTION_TICK_COLOR);
            }
        }

        if hovered {
            let inner_w = (px1 - px0).saturating_sub(2);
            let inner_h = (py1 - py0).saturating_sub(2);
            let progress = spec.dwell_progress.clamp(0.0, 1.0);
            let filled = (round_half_up(progress * inner_w as f64) as usize).min(inner_w);
            let rows = PROGRESS_BAR_ROWS.min(inner_h);
            for row in 0..rows {
                let y = y1 - 1 - row as i64;
                for x in 0..filled {
                    canvas.put(x0 + 1 + x as i64, y, HOVER_COLOR);
                }
            }
        }
    }

    if let Some((px, py)) = spec.pointer {
        if px.is_finite() && py.is_finite() {
            let cx = floor(px.clamp(0.0, w as f64 - 1.0)) as i64;
            let cy = floor(py.clamp(0.0, h as f64 - 1.0)) as i64;
            for d in -CROSSHAIR_ARM..=CROSSHAIR_ARM {
                canvas.put(cx + d, cy, CROSSHAIR_COLOR);
                canvas.put(cx, cy + d, CROSSHAIR_COLOR);
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn region(id: &str, rect: [f64; 4]) -> MenuRegion {
        MenuRegion {
            id: id.to_string(),
            action: PlayerAction::Stop,
            rect: rect.into(),
            caption: String::new(),
        }
    }

    #[test]
    fn hit_test_examples() {
        let menu = MenuModel::new(vec![region("a", [0.0, 0.4, 0.1, 0.6])]).unwrap();
        assert_eq!(
            hit_test(&menu, (0.05, 0.5), 0.0, None).map(|r| r.id.as_str()),
            Some("a")
        );
        assert!(hit_test(&menu, (0.5, 0.5), 0.0, None).is_none());

        let abutting = MenuModel::new(vec![
            region("left", [0.0, 0.0, 0.1, 1.0]),
            region("right", [0.1, 0.0, 0.2, 1.0]),
        ])
        .unwrap();
        assert_eq!(
            hit_test(&abutting, (0.1, 0.5), 0.0, None).map(|r| r.id.as_str()),
            Some("right")
        );
    }

    #[test]
    fn inflation_applies_only_to_hovered() {
        let menu = MenuModel::new(vec![
            region("a", [0.2, 0.2, 0.4, 0.4]),
            region("b", [0.6, 0.2, 0.8, 0.4]),
        ])
        .unwrap();
        assert_eq!(
            hit_test(&menu, (0.41, 0.3), 0.02, Some("a")).map(|r| r.id.as_str()),
            Some("a")
        );
        assert!(hit_test(&menu, (0.59, 0.3), 0.02, Some("a")).is_none());
        assert!(hit_test(&menu, (0.41, 0.3), 0.02, None).is_none());
    }

    #[test]
    fn menu_validation() {
        assert!(MenuModel::new(vec![
            region("a", [0.0, 0.0, 0.5, 0.5]),
            region("a", [0.5, 0.5, 0.9, 0.9])
        ])
        .is_err());
        assert!(MenuModel::new(vec![
            region("a", [0.0, 0.0, 0.5, 0.5]),
            region("b", [0.4, 0.4, 0.9, 0.9])
        ])
        .is_err());
        assert!(MenuModel::new(vec![region("a", [0.5, 0.0, 0.5, 0.5])]).is_err());
        assert!(MenuModel::new(vec![region("a", [0.5, 0.0, 1.2, 0.5])]).is_err());
        assert!(MenuModel::new(vec![region("", [0.0, 0.0, 0.1, 0.1])]).is_err());
        // Shared edges are fine.
        assert!(MenuModel::new(vec![
            region("a", [0.0, 0.0, 0.5, 0.5]),
            region("b", [0.5, 0.0, 1.0, 0.5])
        ])
        .is_ok());
    }

    #[test]
    fn default_menu_layout() {
        let menu = default_menu();
        let ids: Vec<&str> = menu.regions().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(
            ids,
            ["play_pause", "stop", "prev", "next", "vol_down", "vol_up", "mute"]
        );
        for r in menu.regions() {
            assert_eq!((r.rect.x0, r.rect.x1), (0.02, 0.14));
            assert_eq!(PlayerAction::from_wire_name(&r.id), Some(r.action));
            let c = r.rect.center();
            assert_eq!(
                hit_test(&menu, c, 0.0, None).map(|h| h.id.as_str()),
                Some(r.id.as_str())
            );
        }
        let heights: Vec<f64> = menu.regions().iter().map(|r| r.rect.y1 - r.rect.y0).collect();
        assert!(heights.iter().all(|h| (h - heights[0]).abs() < 1e-12));
        for pair in menu.regions().windows(2) {
            assert!(pair[1].rect.y0 > pair[0].rect.y1, "gap between buttons");
        }
    }

    fn black(w: usize, h: usize) -> Frame {
        Frame::filled(w, h, [0, 0, 0], 0).unwrap()
    }

    fn changed(a: &Frame, b: &Frame) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for y in 0..a.height() {
            for x in 0..a.width() {
                if a.pixel(x, y) != b.pixel(x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    }

    #[test]
    fn empty_spec_is_identity() {
        let f = Frame::filled(16, 9, [10, 20, 30], 5).unwrap();
        let menu = MenuModel::default();
        let spec = OverlaySpec {
            menu: &menu,
            pointer: None,
            hovered: None,
            dwell_progress: 0.0,
            blobs: &[],
        };
        assert_eq!(render_overlay(&f, &spec), f);
    }

    #[test]
    fn single_region_changes_only_outline() {
        let f = black(100, 50);
        let mut r = region("a", [0.1, 0.2, 0.5, 0.8]);
        r.caption = "A".to_string();
        let menu = MenuModel::new(vec![r]).unwrap();
        let spec = OverlaySpec {
            menu: &menu,
            pointer: None,
            hovered: None,
            dwell_progress: 0.0,
            blobs: &[],
        };
        let out = render_overlay(&f, &spec);
        // Scaled rect: columns 10..50, rows 10..40 (exclusive).
        let (pw, ph) = (40, 30);
        let diff = changed(&f, &out);
        assert_eq!(diff.len(), 2 * (pw + ph) - 4);
        for (x, y) in diff {
            assert!(x == 10 || x == 49 || y == 10 || y == 39, "({x},{y}) not on outline");
        }
    }

    #[test]
    fn full_progress_fills_inner_width() {
        let f = black(100, 50);
        let menu = MenuModel::new(vec![region("a", [0.1, 0.2, 0.5, 0.8])]).unwrap();
        let spec = OverlaySpec {
            menu: &menu,
            pointer: None,
            hovered: Some("a"),
            dwell_progress: 1.0,
            blobs: &[],
        };
        let out = render_overlay(&f, &spec);
        let bar_row = 38;
        let lit: Vec<usize> = (0..100).filter(|&x| out.pixel(x, bar_row) == HOVER_COLOR).collect();
        // Outline columns 10 and 49 plus the 38 inner columns.
        assert_eq!(lit, (10..50).collect::<Vec<_>>());
        assert_eq!(out.pixel(10, 10), HOVER_COLOR);

        let half = OverlaySpec {
            dwell_progress: 0.5,
            ..spec
        };
        let out = render_overlay(&f, &half);
        let inner = (11..49).filter(|&x| out.pixel(x, bar_row) == HOVER_COLOR).count();
        assert_eq!(inner, 19);
    }

    #[test]
    fn crosshair_and_blob_box_colors() {
        let f = black(40, 40);
        let menu = MenuModel::default();
        let boxes = [(2, 2, 5, 5)];
        let spec = OverlaySpec {
            menu: &menu,
            pointer: Some((20.5, 20.5)),
            hovered: None,
            dwell_progress: 0.0,
            blobs: &boxes,
        };
        let out = render_overlay(&f, &spec);
        assert_eq!(out.pixel(20, 20), CROSSHAIR_COLOR);
        assert_eq!(out.pixel(26, 20), CROSSHAIR_COLOR);
        assert_eq!(out.pixel(27, 20), [0, 0, 0]);
        assert_eq!(out.pixel(2, 4), BLOB_BOX_COLOR);
        assert_eq!(out.pixel(3, 3), [0, 0, 0]);
        assert_eq!(changed(&f, &out).len(), 4 * CROSSHAIR_ARM as usize + 1 + 12);
    }

    proptest! {
        #[test]
        fn at_most_one_region_contains_any_point(
            cuts in proptest::collection::vec(0.0..1.0f64, 1..6),
            x in 0.0..1.0f64,
            y in 0.0..1.0f64,
        ) {
            // Random vertical strips that tile [0,1] with shared edges.
            let mut edges = cuts.clone();
            edges.push(0.0);
            edges.push(1.0);
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges.dedup();
            let regions: Vec<MenuRegion> = edges
                .windows(2)
                .enumerate()
                .map(|(i, e)| region(&format!("r{i}"), [e[0], 0.0, e[1], 1.0]))
                .collect();
            let menu = MenuModel::new(regions).unwrap();
            let containing = menu.regions().iter().filter(|r| r.rect.contains((x, y), 0.0)).count();
            prop_assert_eq!(containing, 1);
            prop_assert!(hit_test(&menu, (x, y), 0.0, None).is_some());
        }

        #[test]
        fn overlay_is_bounded_and_pure(
            w in 1usize..40,
            h in 1usize..40,
            px in -1e6..1e6f64,
            py in -1e6..1e6f64,
            progress in 0.0..=1.0f64,
            bx in 0usize..80,
            by in 0usize..80,
        ) {
            let f = Frame::filled(w, h, [9, 9, 9], 0).unwrap();
            let menu = default_menu();
            let boxes = [(bx.min(w - 1), by.min(h - 1), (bx + 3).min(w - 1), (by + 3).min(h - 1))];
            let spec = OverlaySpec {
                menu: &menu,
                pointer: Some((px, py)),
                hovered: Some("stop"),
                dwell_progress: progress,
                blobs: &boxes,
            };
            let a = render_overlay(&f, &spec);
            let b = render_overlay(&f, &spec);
            prop_assert_eq!(a.width(), w);
            prop_assert_eq!(a.height(), h);
            prop_assert_eq!(a, b);
        }
    }
}
