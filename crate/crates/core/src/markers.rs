//! Four-color marker detection, cursor mapping and pointer-action synthesis.
//!
//! Each marker color has an HSV range. Per frame, every color is thresholded
//! into its own mask and the largest qualifying blob gives that marker's
//! centroid. The cursor follows one marker (green by default) through an
//! affine video-to-screen map:
//!
//! ```text
//! X' = alpha * cx * screen_w / video_w + delta
//! Y' = beta  * cy * screen_h / video_h + gamma
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{threshold_mask, ChannelRange, HsvFrame};
use crate::segmentation::{label_components, largest_blob_with_area};

pub const DEFAULT_MIN_MARKER_AREA: usize = 25;
pub const DEFAULT_DRAG_HOLD_FRAMES: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum MarkerError {
    #[error("mapping scale factors must be positive, got alpha={alpha} beta={beta}")]
    NonPositiveScale { alpha: f64, beta: f64 },
    #[error("screen and video sizes must be at least 1")]
    ZeroSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerColor {
    Red,
    Blue,
    Yellow,
    Green,
}

impl MarkerColor {
    pub const ALL: [MarkerColor; 4] = [
        MarkerColor::Red,
        MarkerColor::Blue,
        MarkerColor::Yellow,
        MarkerColor::Green,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// HSV ranges per marker color.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerPalette {
    ranges: [ChannelRange; 4],
}

impl Default for MarkerPalette {
    /// The calibrated ranges, `(H, S, V)` with hue in `[0, 180)`. The yellow
    /// and green hue bands are kept as calibrated even though they sit in
    /// the opposite order from the usual hue wheel (yellow ~30, green ~60).
    fn default() -> Self {
        let r = |min, max| ChannelRange::hsv(min, max).expect("palette ranges are ordered");
        Self {
            ranges: [
                r([0, 135, 110], [6, 255, 255]),
                r([112, 53, 10], [119, 255, 255]),
                r([68, 59, 80], [85, 255, 255]),
                r([20, 165, 165], [36, 255, 255]),
            ],
        }
    }
}

impl MarkerPalette {
    pub fn range(&self, color: MarkerColor) -> &ChannelRange {
        &self.ranges[color.index()]
    }

    pub fn with_range(mut self, color: MarkerColor, range: ChannelRange) -> Self {
        self.ranges[color.index()] = range;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerDetection {
    pub centroid: (f64, f64),
    pub area: usize,
}

/// At most one detection per color for one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkerSet {
    pub frame: u64,
    detections: [Option<MarkerDetection>; 4],
}

impl MarkerSet {
    pub fn empty(frame: u64) -> Self {
        Self {
            frame,
            detections: [None; 4],
        }
    }

    pub fn get(&self, color: MarkerColor) -> Option<&MarkerDetection> {
        self.detections[color.index()].as_ref()
    }

    pub fn set(&mut self, color: MarkerColor, detection: Option<MarkerDetection>) {
        self.detections[color.index()] = detection;
    }

    pub fn is_empty(&self) -> bool {
        self.detections.iter().all(Option::is_none)
    }
}

pub fn detect_markers(frame: &HsvFrame, palette: &MarkerPalette, min_area: usize, frame_index: u64) -> MarkerSet {
    let mut set = MarkerSet::empty(frame_index);
    for color in MarkerColor::ALL {
        let mask = threshold_mask(frame, palette.range(color)).expect("palette ranges are HSV");
        let blobs = label_components(&mask);
        set.set(
            color,
            largest_blob_with_area(&blobs, min_area).map(|b| MarkerDetection {
                centroid: b.centroid,
                area: b.area,
            }),
        );
    }
    set
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: i64,
    pub delta: i64,
    pub screen_width: u32,
    pub screen_height: u32,
    pub video_width: u32,
    pub video_height: u32,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0,
            delta: 0,
            screen_width: 1920,
            screen_height: 1080,
            video_width: 640,
            video_height: 480,
        }
    }
}

impl MappingConfig {
    pub fn validate(&self) -> Result<(), MarkerError> {
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(MarkerError::NonPositiveScale {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        if self.screen_width == 0 || self.screen_height == 0 || self.video_width == 0 || self.video_height == 0 {
            return Err(MarkerError::ZeroSize);
        }
        Ok(())
    }
}

/// Real-valued screen position before rounding and clamping.
pub fn map_cursor_exact(centroid: (f64, f64), cfg: &MappingConfig) -> (f64, f64) {
    let x = cfg.alpha * centroid.0 * cfg.screen_width as f64 / cfg.video_width as f64 + cfg.delta as f64;
    let y = cfg.beta * centroid.1 * cfg.screen_height as f64 / cfg.video_height as f64 + cfg.gamma as f64;
    (x, y)
}

/// Screen pixel for a centroid: rounded half up, clamped to the screen.
pub fn map_cursor(centroid: (f64, f64), cfg: &MappingConfig) -> (i64, i64) {
    let (x, y) = map_cursor_exact(centroid, cfg);
    let clamp = |v: f64, size: u32| ((v + 0.5).floor() as i64).clamp(0, size as i64 - 1);
    (clamp(x, cfg.screen_width), clamp(y, cfg.screen_height))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointerKind {
    Move,
    LeftClick,
    RightClick,
    Scroll(i64),
    DragStart,
    DragEnd,
}

impl PointerKind {
    pub fn name(&self) -> &'static str {
        match self {
            PointerKind::Move => "move",
            PointerKind::LeftClick => "left_click",
            PointerKind::RightClick => "right_click",
            PointerKind::Scroll(_) => "scroll",
            PointerKind::DragStart => "drag_start",
            PointerKind::DragEnd => "drag_end",
        }
    }
}

/// Serialized as `{"frame":n,"kind":"move","x":X,"y":Y}`; scroll events
/// carry an extra `"amount"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PointerRecord", try_from = "PointerRecord")]
pub struct PointerEvent {
    pub frame: u64,
    pub kind: PointerKind,
    pub x: i64,
    pub y: i64,
}

#[derive(Serialize, Deserialize)]
struct PointerRecord {
    frame: u64,
    kind: String,
    x: i64,
    y: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    amount: Option<i64>,
}

impl From<PointerEvent> for PointerRecord {
    fn from(e: PointerEvent) -> Self {
        Self {
            frame: e.frame,
            kind: e.kind.name().to_owned(),
            x: e.x,
            y: e.y,
            amount: match e.kind {
                PointerKind::Scroll(a) => Some(a),
                _ => None,
            },
        }
    }
}

impl TryFrom<PointerRecord> for PointerEvent {
    type Error = String;

    fn try_from(r: PointerRecord) -> Result<Self, String> {
        let kind = match (r.kind.as_str(), r.amount) {
            ("move", _) => PointerKind::Move,
            ("left_click", _) => PointerKind::LeftClick,
            ("right_click", _) => PointerKind::RightClick,
            ("scroll", Some(a)) => PointerKind::Scroll(a),
            ("scroll", None) => return Err("scroll event without amount".into()),
            ("drag_start", _) => PointerKind::DragStart,
            ("drag_end", _) => PointerKind::DragEnd,
            (other, _) => return Err(format!("unknown pointer kind {other:?}")),
        };
        Ok(Self {
            frame: r.frame,
            kind,
            x: r.x,
            y: r.y,
        })
    }
}

/// Which marker drives which pointer control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionRules {
    pub cursor: MarkerColor,
    pub left_click: MarkerColor,
    pub right_click: MarkerColor,
    pub scroll: MarkerColor,
}

impl Default for ActionRules {
    fn default() -> Self {
        Self {
            cursor: MarkerColor::Green,
            left_click: MarkerColor::Red,
            right_click: MarkerColor::Blue,
            scroll: MarkerColor::Yellow,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerConfig {
    pub mapping: MappingConfig,
    pub rules: ActionRules,
    /// Screen pixels scrolled per video pixel of vertical scroll-marker motion.
    pub scroll_scale: f64,
    /// Consecutive frames the left-click marker must be held before cursor
    /// motion becomes a drag.
    pub drag_hold_frames: usize,
}

impl Default for PointerConfig {
    fn default() -> Self {
        Self {
            mapping: MappingConfig::default(),
            rules: ActionRules::default(),
            scroll_scale: 1.0,
            drag_hold_frames: DEFAULT_DRAG_HOLD_FRAMES,
        }
    }
}

/// Frame-to-frame pointer state.
///
/// Per frame, events come out in this order:
/// - `move` whenever the cursor marker is visible;
/// - `drag_end` when the left-click marker disappears during a drag;
/// - `left_click` / `right_click` when their marker appears (absent to present);
/// - `drag_start` when the left-click marker has been held for
///   `drag_hold_frames` frames and the cursor moved this frame;
/// - `scroll` when the scroll marker is visible in both frames and its
///   vertical motion rounds to a nonzero amount (`-dy * scroll_scale`).
///
/// Clicks and scrolls are placed at the cursor's last mapped position.
#[derive(Debug, Clone)]
pub struct PointerTracker {
    cfg: PointerConfig,
    previous: MarkerSet,
    cursor: (i64, i64),
    held: usize,
    dragging: bool,
}

impl PointerTracker {
    pub fn new(cfg: PointerConfig) -> Self {
        Self {
            cfg,
            previous: MarkerSet::empty(0),
            cursor: (0, 0),
            held: 0,
            dragging: false,
        }
    }

    pub fn config(&self) -> &PointerConfig {
        &self.cfg
    }

    pub fn is_dragging(&self) -> bool {
        self.dragging
    }

    pub fn update(&mut self, current: &MarkerSet) -> Vec<PointerEvent> {
        let rules = self.cfg.rules;
        let frame = current.frame;
        let mut events = Vec::new();
        let mut emit = |kind, (x, y): (i64, i64)| events.push(PointerEvent { frame, kind, x, y });

        let previous_cursor = self.cursor;
        let mut cursor_moved = false;
        if let Some(marker) = current.get(rules.cursor) {
            self.cursor = map_cursor(marker.centroid, &self.cfg.mapping);
            cursor_moved = self.previous.get(rules.cursor).is_some() && self.cursor != previous_cursor;
            emit(PointerKind::Move, self.cursor);
        }

        let appeared = |c| current.get(c).is_some() && self.previous.get(c).is_none();
        let left_present = current.get(rules.left_click).is_some();

        if self.dragging && !left_present {
            self.dragging = false;
            emit(PointerKind::DragEnd, self.cursor);
        }
        if appeared(rules.left_click) {
            emit(PointerKind::LeftClick, self.cursor);
        }
        if appeared(rules.right_click) {
            emit(PointerKind::RightClick, self.cursor);
        }

        self.held = if left_present { self.held + 1 } else { 0 };
        if !self.dragging && self.held >= self.cfg.drag_hold_frames && cursor_moved {
            self.dragging = true;
            emit(PointerKind::DragStart, self.cursor);
        }

        if let (Some(now), Some(before)) = (current.get(rules.scroll), self.previous.get(rules.scroll)) {
            let amount = (-(now.centroid.1 - before.centroid.1) * self.cfg.scroll_scale + 0.5).floor() as i64;
            if amount != 0 {
                emit(PointerKind::Scroll(amount), self.cursor);
            }
        }

        self.previous = current.clone();
        events
    }
}
