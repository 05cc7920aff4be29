//! Frame-sequence orchestration.
//!
//! Gesture path, per frame: RGB to YCbCr, skin threshold, largest blob,
//! 50x50 crop, classifier, debounce queue, rising-edge event.
//!
//! Marker path, per frame: RGB to HSV, four color masks, marker centroids,
//! pointer actions.
//!
//! Frames are numbered by their 0-based position in the source.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc::SyncSender;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{ClassScores, ClassifierError, Network};
use crate::debounce::{Debouncer, EdgeTrigger, DEFAULT_CONFIDENCE, DEFAULT_QUEUE_LEN};
use crate::imaging::{
    decode_netpbm, rgb_to_hsv, rgb_to_ycbcr, threshold_mask, ChannelRange, Frame, ImageError, YCbCrMode,
};
use crate::markers::{
    detect_markers, MarkerPalette, PointerConfig, PointerEvent, PointerTracker, DEFAULT_MIN_MARKER_AREA,
};
use crate::segmentation::{
    crop_resize_50, label_components, largest_blob_with_area, DEFAULT_MIN_GESTURE_AREA, SAMPLE_LEN,
};

pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("decoding {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: ImageError,
    },
    #[error("frame {frame} is {actual:?}, earlier frames are {expected:?}")]
    DimensionDrift {
        frame: u64,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("two frame files share number {0}")]
    DuplicateFrameNumber(u64),
    #[error("network takes {0} inputs, the gesture path produces {SAMPLE_LEN}")]
    NetworkInput(usize),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("event consumer hung up")]
    Disconnected,
}

#[derive(Debug, Clone)]
enum FrameRef {
    File(PathBuf),
    Memory(Frame),
}

/// An ordered sequence of frames with a nominal frame rate.
#[derive(Debug, Clone)]
pub struct FrameSource {
    frames: Vec<FrameRef>,
    fps: f64,
}

/// Trailing decimal digits of a file stem, e.g. `frame_000012` -> 12.
fn frame_number(path: &Path) -> Option<u64> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    if !matches!(ext.as_str(), "ppm" | "pgm" | "pnm") {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return None;
    }
    stem[stem.len() - digits..].parse().ok()
}

impl FrameSource {
    /// Every `*.ppm` / `*.pgm` / `*.pnm` file in `dir` whose name ends in a
    /// number, ordered by that number. Other files are ignored.
    pub fn open_dir(dir: impl AsRef<Path>, fps: f64) -> Result<Self, PipelineError> {
        let dir = dir.as_ref();
        let io = |source| PipelineError::Io {
            path: dir.to_owned(),
            source,
        };
        let mut numbered = Vec::new();
        for entry in fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path();
            if let Some(n) = frame_number(&path) {
                numbered.push((n, path));
            }
        }
        numbered.sort();
        if let Some(w) = numbered.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(PipelineError::DuplicateFrameNumber(w[0].0));
        }
        Ok(Self {
            frames: numbered.into_iter().map(|(_, p)| FrameRef::File(p)).collect(),
            fps,
        })
    }

    pub fn from_frames(frames: Vec<Frame>, fps: f64) -> Self {
        Self {
            frames: frames.into_iter().map(FrameRef::Memory).collect(),
            fps,
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Frames in order, loaded lazily. Dimension drift is reported as an error
    /// at the first offending frame.
    pub fn frames(&self) -> impl Iterator<Item = Result<(u64, Frame), PipelineError>> + '_ {
        let mut dims = None;
        self.frames.iter().enumerate().map(move |(i, r)| {
            let frame = match r {
                FrameRef::Memory(f) => f.clone(),
                FrameRef::File(path) => {
                    let bytes = fs::read(path).map_err(|source| PipelineError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    decode_netpbm(&bytes).map_err(|source| PipelineError::Decode {
                        path: path.clone(),
                        source,
                    })?
                }
            };
            let expected = *dims.get_or_insert(frame.dimensions());
            if frame.dimensions() != expected {
                return Err(PipelineError::DimensionDrift {
                    frame: i as u64,
                    expected,
                    actual: frame.dimensions(),
                });
            }
            Ok((i as u64, frame))
        })
    }
}

/// Everything the engine emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EngineEvent {
    GestureEvent { g: u8, frame: u64 },
    PointerEvent(PointerEvent),
    MotionAlert { changed: usize, frame: u64 },
    EntryRequest { id: u64, image_b64: String },
}

impl EngineEvent {
    pub fn frame(&self) -> Option<u64> {
        match self {
            EngineEvent::GestureEvent { frame, .. } | EngineEvent::MotionAlert { frame, .. } => Some(*frame),
            EngineEvent::PointerEvent(p) => Some(p.frame),
            EngineEvent::EntryRequest { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureConfig {
    pub mode: YCbCrMode,
    pub skin: ChannelRange,
    pub min_blob_area: usize,
    pub queue_len: usize,
    pub confidence: f64,
}

impl Default for GestureConfig {
    fn default() -> Self {
        Self {
            mode: YCbCrMode::Verbatim,
            skin: ChannelRange::skin(),
            min_blob_area: DEFAULT_MIN_GESTURE_AREA,
            queue_len: DEFAULT_QUEUE_LEN,
            confidence: DEFAULT_CONFIDENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobTrace {
    pub area: usize,
    /// `[min_x, min_y, max_x, max_y]`, inclusive.
    pub bbox: [usize; 4],
    pub centroid: [f64; 2],
}

/// Per-frame record of every gesture-path decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureTrace {
    pub frame: u64,
    pub skin_pixels: usize,
    pub blob: Option<BlobTrace>,
    pub num: Option<u8>,
    pub num_prob: Option<f64>,
    pub enqueued: u8,
    pub ges_num: u8,
    pub event: Option<u8>,
}

/// Stateful gesture path for one frame stream.
pub struct GesturePipeline<'a> {
    net: &'a Network,
    cfg: GestureConfig,
    debouncer: Debouncer,
    edges: EdgeTrigger,
}

impl<'a> GesturePipeline<'a> {
    pub fn new(net: &'a Network, cfg: GestureConfig) -> Result<Self, PipelineError> {
        if net.arch().inputs() != SAMPLE_LEN {
            return Err(PipelineError::NetworkInput(net.arch().inputs()));
        }
        Ok(Self {
            net,
            debouncer: Debouncer::new(cfg.queue_len, cfg.confidence),
            edges: EdgeTrigger::new(),
            cfg,
        })
    }

    pub fn process(&mut self, frame_index: u64, frame: &Frame) -> Result<GestureTrace, PipelineError> {
        let ycbcr = rgb_to_ycbcr(frame, self.cfg.mode)?;
        let mask = threshold_mask(&ycbcr, &self.cfg.skin)?;
        let blobs = label_components(&mask);
        let blob = largest_blob_with_area(&blobs, self.cfg.min_blob_area);
        let scores: Option<ClassScores> = match blob {
            Some(b) => Some(self.net.classify(&crop_resize_50(&mask, &b.bbox))?),
            None => None,
        };
        let ges_num = self.debouncer.push(scores.as_ref());
        let enqueued = self.debouncer.queue().last().unwrap_or(0);
        Ok(GestureTrace {
            frame: frame_index,
            skin_pixels: mask.foreground_count(),
            blob: blob.map(|b| BlobTrace {
                area: b.area,
                bbox: [b.bbox.min_x, b.bbox.min_y, b.bbox.max_x, b.bbox.max_y],
                centroid: [b.centroid.0, b.centroid.1],
            }),
            num: scores.as_ref().map(ClassScores::num),
            num_prob: scores.as_ref().map(ClassScores::num_prob),
            enqueued,
            ges_num,
            event: self.edges.update(ges_num),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct GestureRun {
    pub events: Vec<EngineEvent>,
    pub trace: Vec<GestureTrace>,
}

pub fn run_gesture_pipeline(
    source: &FrameSource,
    net: &Network,
    cfg: &GestureConfig,
) -> Result<GestureRun, PipelineError> {
    let mut pipeline = GesturePipeline::new(net, cfg.clone())?;
    let mut run = GestureRun::default();
    for item in source.frames() {
        let (index, frame) = item?;
        let trace = pipeline.process(index, &frame)?;
        if let Some(g) = trace.event {
            run.events.push(EngineEvent::GestureEvent { g, frame: index });
        }
        run.trace.push(trace);
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerConfig {
    pub palette: MarkerPalette,
    pub min_area: usize,
    pub pointer: PointerConfig,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        Self {
            palette: MarkerPalette::default(),
            min_area: DEFAULT_MIN_MARKER_AREA,
            pointer: PointerConfig::default(),
        }
    }
}

/// Stateful marker path for one frame stream.
pub struct MarkerPipeline {
    palette: MarkerPalette,
    min_area: usize,
    tracker: PointerTracker,
}

impl MarkerPipeline {
    pub fn new(cfg: MarkerConfig) -> Self {
        Self {
            palette: cfg.palette,
            min_area: cfg.min_area,
            tracker: PointerTracker::new(cfg.pointer),
        }
    }

    pub fn process(&mut self, frame_index: u64, frame: &Frame) -> Result<Vec<PointerEvent>, PipelineError> {
        let hsv = rgb_to_hsv(frame)?;
        let markers = detect_markers(&hsv, &self.palette, self.min_area, frame_index);
        Ok(self.tracker.update(&markers))
    }
}

pub fn run_marker_pipeline(source: &FrameSource, cfg: &MarkerConfig) -> Result<Vec<PointerEvent>, PipelineError> {
    let mut pipeline = MarkerPipeline::new(cfg.clone());
    let mut log = Vec::new();
    for item in source.frames() {
        let (index, frame) = item?;
        log.extend(pipeline.process(index, &frame)?);
    }
    Ok(log)
}

/// Runs both paths in one pass and sends events into a bounded channel, so
/// a slow consumer applies back-pressure. Within a frame, gesture events
/// precede pointer events.
pub fn stream_events(
    source: &FrameSource,
    net: &Network,
    gesture: &GestureConfig,
    marker: &MarkerConfig,
    sink: &SyncSender<EngineEvent>,
) -> Result<(), PipelineError> {
    let mut gestures = GesturePipeline::new(net, gesture.clone())?;
    let mut markers = MarkerPipeline::new(marker.clone());
    for item in source.frames() {
        let (index, frame) = item?;
        let trace = gestures.process(index, &frame)?;
        let mut batch = Vec::new();
        if let Some(g) = trace.event {
            batch.push(EngineEvent::GestureEvent { g, frame: index });
        }
        batch.extend(
            markers
                .process(index, &frame)?
                .into_iter()
                .map(EngineEvent::PointerEvent),
        );
        for event in batch {
            sink.send(event).map_err(|_| PipelineError::Disconnected)?;
        }
    }
    Ok(())
}

/// Stable merge by frame index; on equal frames `first` wins.
pub fn merge_events(first: Vec<EngineEvent>, second: Vec<EngineEvent>) -> Vec<EngineEvent> {
    let mut all: Vec<(u64, usize, EngineEvent)> = first
        .into_iter()
        .map(|e| (0, e))
        .chain(second.into_iter().map(|e| (1, e)))
        .map(|(rank, e)| (e.frame().unwrap_or(0), rank, e))
        .collect();
    all.sort_by_key(|(frame, rank, _)| (*frame, *rank));
    all.into_iter().map(|(_, _, e)| e).collect()
}

/// One JSON object per line.
pub fn to_json_lines<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("event serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::NetworkArch;
    use crate::markers::PointerKind;

    #[test]
    fn frame_numbers_from_names() {
        assert_eq!(frame_number(Path::new("frame_000012.ppm")), Some(12));
        assert_eq!(frame_number(Path::new("x7.PGM")), Some(7));
        assert_eq!(frame_number(Path::new("frame.ppm")), None);
        assert_eq!(frame_number(Path::new("frame_1.png")), None);
    }

    #[test]
    fn blank_frames_no_events() {
        let net = Network::init(NetworkArch::desk(), 0);
        let source = FrameSource::from_frames(vec![Frame::filled_rgb(32, 24, [0, 0, 0]); 8], DEFAULT_FPS);
        let run = run_gesture_pipeline(&source, &net, &GestureConfig::default()).unwrap();
        assert!(run.events.is_empty());
        assert_eq!(run.trace.len(), 8);
        assert!(run.trace.iter().all(|t| t.blob.is_none() && t.ges_num == 0));
    }

    #[test]
    fn dimension_drift_is_an_error() {
        let net = Network::init(NetworkArch::desk(), 0);
        let source = FrameSource::from_frames(
            vec![Frame::filled_rgb(8, 8, [0, 0, 0]), Frame::filled_rgb(8, 9, [0, 0, 0])],
            DEFAULT_FPS,
        );
        assert!(matches!(
            run_gesture_pipeline(&source, &net, &GestureConfig::default()),
            Err(PipelineError::DimensionDrift { frame: 1, .. })
        ));
    }

    #[test]
    fn rejects_wrong_network_width() {
        let net = Network::init(NetworkArch::sigmoid(&[4, 3, 2]).unwrap(), 0);
        assert!(matches!(
            GesturePipeline::new(&net, GestureConfig::default()),
            Err(PipelineError::NetworkInput(4))
        ));
    }

    #[test]
    fn merge_orders_by_frame_then_source() {
        let g = |frame| EngineEvent::GestureEvent { g: 1, frame };
        let p = |frame| {
            EngineEvent::PointerEvent(PointerEvent {
                frame,
                kind: PointerKind::Move,
                x: 0,
                y: 0,
            })
        };
        let merged = merge_events(vec![g(2), g(5)], vec![p(1), p(2), p(5)]);
        assert_eq!(merged, vec![p(1), g(2), p(2), g(5), p(5)]);
    }

    #[test]
    fn event_json_shapes() {
        let e = EngineEvent::GestureEvent { g: 3, frame: 9 };
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"type":"gesture_event","g":3,"frame":9}"#
        );
        let p = EngineEvent::PointerEvent(PointerEvent {
            frame: 1,
            kind: PointerKind::LeftClick,
            x: 2,
            y: 3,
        });
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(
            text,
            r#"{"type":"pointer_event","frame":1,"kind":"left_click","x":2,"y":3}"#
        );
        assert_eq!(serde_json::from_str::<EngineEvent>(&text).unwrap(), p);
    }
}
