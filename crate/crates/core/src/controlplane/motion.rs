use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::imaging::Frame;

/// Per-pixel mean intensity over the first `required` frames.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    required: usize,
    count: usize,
    sums: Vec<f64>,
}

impl BackgroundModel {
    pub fn new(width: usize, height: usize, required: usize) -> Self {
        assert!(required >= 1, "background needs at least one frame");
        Self {
            width,
            height,
            required,
            count: 0,
            sums: vec![0.0; width * height],
        }
    }

    pub fn is_ready(&self) -> bool {
        self.count >= self.required
    }

    pub fn frames_used(&self) -> usize {
        self.count
    }

    fn check(&self, frame: &Frame) -> Result<(), ControlError> {
        if frame.dimensions() != (self.width, self.height) {
            return Err(ControlError::DimensionMismatch {
                expected: (self.width, self.height),
                actual: frame.dimensions(),
            });
        }
        Ok(())
    }

    /// Fold a frame into the mean. Frames after the first `required` are
    /// ignored; returns whether this frame was used.
    pub fn update(&mut self, frame: &Frame) -> Result<bool, ControlError> {
        self.check(frame)?;
        if self.is_ready() {
            return Ok(false);
        }
        for (s, &v) in self.sums.iter_mut().zip(frame.to_gray().data()) {
            *s += v as f64;
        }
        self.count += 1;
        Ok(true)
    }

    pub fn mean(&self, x: usize, y: usize) -> f64 {
        self.sums[y * self.width + x] / self.count as f64
    }

    /// Pixels whose intensity differs from the mean by more than `tau`.
    pub fn changed_pixels(&self, frame: &Frame, tau: f64) -> Result<usize, ControlError> {
        self.check(frame)?;
        let count = self.count as f64;
        Ok(frame
            .to_gray()
            .data()
            .iter()
            .zip(&self.sums)
            .filter(|(&v, &s)| (v as f64 - s / count).abs() > tau)
            .count())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionConfig {
    /// Frames averaged into the background before detection starts.
    pub background_frames: usize,
    /// Intensity delta above which a pixel counts as changed.
    pub tau: f64,
    /// Fraction of the frame that must change to raise an alert.
    pub rho: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            background_frames: 30,
            tau: 25.0,
            rho: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionReport {
    pub frame: u64,
    pub changed: usize,
    pub alert: bool,
    /// The frame went into the background model; no detection ran.
    pub learning: bool,
}

/// Background learning followed by pixel-count change detection.
#[derive(Debug, Clone)]
pub struct MotionDetector {
    cfg: MotionConfig,
    model: Option<BackgroundModel>,
}

impl MotionDetector {
    pub fn new(cfg: MotionConfig) -> Self {
        Self { cfg, model: None }
    }

    pub fn config(&self) -> &MotionConfig {
        &self.cfg
    }

    pub fn model(&self) -> Option<&BackgroundModel> {
        self.model.as_ref()
    }

    /// Alert iff `changed > rho * width * height`.
    pub fn process(&mut self, frame_index: u64, frame: &Frame) -> Result<MotionReport, ControlError> {
        let model = self
            .model
            .get_or_insert_with(|| BackgroundModel::new(frame.width(), frame.height(), self.cfg.background_frames));
        if !model.is_ready() {
            model.update(frame)?;
            return Ok(MotionReport {
                frame: frame_index,
                changed: 0,
                alert: false,
                learning: true,
            });
        }
        let changed = model.changed_pixels(frame, self.cfg.tau)?;
        let limit = self.cfg.rho * (frame.width() * frame.height()) as f64;
        Ok(MotionReport {
            frame: frame_index,
            changed,
            alert: changed as f64 > limit,
            learning: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(block: usize) -> Frame {
        let mut f = Frame::filled_gray(100, 100, 20);
        for i in 0..block {
            f.set_gray(10 + i % 10, 10 + i / 10, 200);
        }
        f
    }

    fn detector() -> MotionDetector {
        MotionDetector::new(MotionConfig {
            background_frames: 5,
            tau: 25.0,
            rho: 0.005,
        })
    }

    #[test]
    fn learns_then_detects() {
        let mut d = detector();
        for i in 0..5 {
            let r = d.process(i, &scene(0)).unwrap();
            assert!(r.learning && !r.alert);
        }
        let r = d.process(5, &scene(100)).unwrap();
        assert_eq!(r.changed, 100);
        assert!(r.alert);
    }

    #[test]
    fn small_block_under_limit() {
        let mut d = detector();
        for i in 0..5 {
            d.process(i, &scene(0)).unwrap();
        }
        let r = d.process(5, &scene(40)).unwrap();
        assert_eq!(r.changed, 40);
        assert!(!r.alert);
    }

    #[test]
    fn static_scene_is_quiet() {
        let mut d = detector();
        for i in 0..50 {
            let r = d.process(i, &scene(0)).unwrap();
            assert_eq!(r.changed, 0);
            assert!(!r.alert);
        }
    }

    #[test]
    fn model_freezes_after_n_frames() {
        let mut m = BackgroundModel::new(100, 100, 2);
        assert!(m.update(&scene(0)).unwrap());
        assert!(m.update(&scene(0)).unwrap());
        assert!(!m.update(&scene(100)).unwrap());
        assert_eq!(m.mean(10, 10), 20.0);
        assert_eq!(m.frames_used(), 2);
    }

    #[test]
    fn rgb_frames_are_reduced_to_luma() {
        let mut m = BackgroundModel::new(2, 1, 1);
        m.update(&Frame::filled_rgb(2, 1, [100, 100, 100])).unwrap();
        assert_eq!(m.mean(0, 0), 100.0);
    }

    #[test]
    fn dimension_mismatch() {
        let mut d = detector();
        d.process(0, &scene(0)).unwrap();
        assert!(matches!(
            d.process(1, &Frame::filled_gray(5, 5, 0)),
            Err(ControlError::DimensionMismatch { .. })
        ));
    }
}
