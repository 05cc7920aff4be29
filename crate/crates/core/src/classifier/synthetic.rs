//! Procedural hand-like silhouettes, one shape family per gesture class.
//!
//! Every instance is rendered on a square canvas with jittered rotation,
//! scale, offset and stroke sizes, then cropped to its bounding box and
//! resampled to 50x50 through the same path the live pipeline uses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ClassifierError, LabeledSample, MAX_CLASSES};
use crate::imaging::BinaryMask;
use crate::segmentation::{crop_resize_50, foreground_bbox};

const CANVAS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeFamily {
    Fist,
    /// Palm with 1 to 5 raised fingers spread in a fan.
    Fingers(u8),
    Ring,
    Plus,
    Ell,
    Triangle,
}

/// Families in class order: class `k` is `SHAPE_FAMILIES[k - 1]`.
pub const SHAPE_FAMILIES: [ShapeFamily; MAX_CLASSES] = [
    ShapeFamily::Fist,
    ShapeFamily::Fingers(1),
    ShapeFamily::Fingers(2),
    ShapeFamily::Fingers(3),
    ShapeFamily::Fingers(4),
    ShapeFamily::Fingers(5),
    ShapeFamily::Ring,
    ShapeFamily::Plus,
    ShapeFamily::Ell,
    ShapeFamily::Triangle,
];

/// Pose and stroke jitter for one rendered instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    /// Radians, counter-clockwise.
    pub rotation: f64,
    /// Fraction of the canvas side.
    pub scale: f64,
    /// Centre offset as a fraction of the canvas side.
    pub offset: (f64, f64),
    /// Multiplier on stroke widths and radii.
    pub thickness: f64,
    /// Multiplier on finger and arm lengths.
    pub length: f64,
}

impl ShapeParams {
    pub fn neutral() -> Self {
        Self {
            rotation: 0.0,
            scale: 0.9,
            offset: (0.0, 0.0),
            thickness: 1.0,
            length: 1.0,
        }
    }

    pub fn jittered(rng: &mut impl Rng) -> Self {
        Self {
            rotation: rng.random_range(-0.12..=0.12),
            scale: rng.random_range(0.7..=0.95),
            offset: (rng.random_range(-0.05..=0.05), rng.random_range(-0.05..=0.05)),
            thickness: rng.random_range(0.9..=1.1),
            length: rng.random_range(0.9..=1.1),
        }
    }
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

fn in_disc(p: (f64, f64), c: (f64, f64), r: f64) -> bool {
    (p.0 - c.0).powi(2) + (p.1 - c.1).powi(2) <= r * r
}

fn in_triangle(p: (f64, f64), v: [(f64, f64); 3]) -> bool {
    let cross = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let (d0, d1, d2) = (cross(v[0], v[1]), cross(v[1], v[2]), cross(v[2], v[0]));
    let neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    let pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    !(neg && pos)
}

impl ShapeFamily {
    /// Membership test in shape-local coordinates, roughly `[-0.5, 0.5]^2`
    /// with `y` pointing down.
    fn contains(&self, p: (f64, f64), t: f64, len: f64) -> bool {
        match *self {
            ShapeFamily::Fist => in_disc(p, (0.0, 0.0), 0.3 * t),
            ShapeFamily::Fingers(k) => {
                let palm = (0.0, 0.15);
                if in_disc(p, palm, 0.2 * t) {
                    return true;
                }
                let spread = 1.4_f64;
                (0..k).any(|i| {
                    let angle = if k == 1 {
                        0.0
                    } else {
                        -spread / 2.0 + spread * i as f64 / (k - 1) as f64
                    };
                    let tip = (palm.0 + 0.48 * len * angle.sin(), palm.1 - 0.48 * len * angle.cos());
                    dist_to_segment(p, palm, tip) <= 0.05 * t
                })
            }
            ShapeFamily::Ring => {
                let d2 = p.0 * p.0 + p.1 * p.1;
                let (inner, outer) = (0.17 * t, 0.32 * t);
                d2 <= outer * outer && d2 >= inner * inner
            }
            ShapeFamily::Plus => {
                let arm = 0.36 * len;
                dist_to_segment(p, (-arm, 0.0), (arm, 0.0)) <= 0.08 * t
                    || dist_to_segment(p, (0.0, -arm), (0.0, arm)) <= 0.08 * t
            }
            ShapeFamily::Ell => {
                let corner = (-0.2, 0.3);
                dist_to_segment(p, corner, (-0.2, 0.3 - 0.6 * len)) <= 0.08 * t
                    || dist_to_segment(p, corner, (-0.2 + 0.45 * len, 0.3)) <= 0.08 * t
            }
            ShapeFamily::Triangle => {
                let h = 0.36 * t;
                in_triangle(p, [(0.0, -h), (-h, h * 0.8), (h, h * 0.8)])
            }
        }
    }

    /// Render into a `width x height` mask. The shape is sized against the
    /// shorter side and centred, shifted by `params.offset`.
    pub fn render(&self, params: &ShapeParams, width: usize, height: usize) -> BinaryMask {
        let side = width.min(height) as f64;
        let centre = (
            width as f64 / 2.0 + params.offset.0 * side,
            height as f64 / 2.0 + params.offset.1 * side,
        );
        let (sin, cos) = params.rotation.sin_cos();
        let unit = params.scale * side;
        BinaryMask::from_fn(width, height, |x, y| {
            let dx = (x as f64 + 0.5 - centre.0) / unit;
            let dy = (y as f64 + 0.5 - centre.1) / unit;
            // Inverse rotation into shape-local coordinates.
            let local = (cos * dx + sin * dy, -sin * dx + cos * dy);
            self.contains(local, params.thickness, params.length)
        })
    }
}

/// Render class `label` (1-based) into a `width x height` mask.
pub fn render_gesture_mask(label: usize, params: &ShapeParams, width: usize, height: usize) -> BinaryMask {
    SHAPE_FAMILIES[label - 1].render(params, width, height)
}

/// `per_class` jittered instances of each of the first `classes` shape
/// families, class-major, labels `1..=classes`.
pub fn generate_synthetic_dataset(
    seed: u64,
    classes: usize,
    per_class: usize,
) -> Result<Vec<LabeledSample>, ClassifierError> {
    if classes == 0 || classes > MAX_CLASSES {
        return Err(ClassifierError::InvalidConfig(format!(
            "classes must be in 1..={MAX_CLASSES}, got {classes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(classes * per_class);
    for label in 1..=classes {
        for _ in 0..per_class {
            let params = ShapeParams::jittered(&mut rng);
            let mask = render_gesture_mask(label, &params, CANVAS, CANVAS);
            let bbox = foreground_bbox(&mask).expect("rendered shape is never empty");
            out.push(LabeledSample {
                input: crop_resize_50(&mask, &bbox).into_values(),
                label,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::label_components;

    #[test]
    fn deterministic_and_counted() {
        let a = generate_synthetic_dataset(3, 10, 4).unwrap();
        assert_eq!(a, generate_synthetic_dataset(3, 10, 4).unwrap());
        assert_ne!(a, generate_synthetic_dataset(4, 10, 4).unwrap());
        for label in 1..=10 {
            assert_eq!(a.iter().filter(|s| s.label == label).count(), 4);
        }
        assert!(a.iter().all(|s| s.input.len() == 2500));
    }

    #[test]
    fn too_many_classes_rejected() {
        assert!(generate_synthetic_dataset(0, 11, 1).is_err());
    }

    #[test]
    fn every_instance_is_one_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for family in SHAPE_FAMILIES {
            for _ in 0..20 {
                let mask = family.render(&ShapeParams::jittered(&mut rng), CANVAS, CANVAS);
                assert_eq!(label_components(&mask).len(), 1, "{family:?} split apart");
            }
        }
    }
}
