//! Connected-component blobs over binary masks and the 50x50 gesture crop.

use crate::imaging::BinaryMask;

/// Side length of the classifier input grid.
pub const SAMPLE_SIDE: usize = 50;
/// Number of classifier inputs.
pub const SAMPLE_LEN: usize = SAMPLE_SIDE * SAMPLE_SIDE;
/// Smallest blob accepted as a hand candidate.
pub const DEFAULT_MIN_GESTURE_AREA: usize = 100;

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x as f64 && x <= self.max_x as f64 && y >= self.min_y as f64 && y <= self.max_y as f64
    }
}

/// An 8-connected foreground region.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    /// 1-based position in the sorted blob list.
    pub label: u32,
    pub area: usize,
    pub bbox: BBox,
    /// Mean `(x, y)` of member pixels.
    pub centroid: (f64, f64),
}

impl Blob {
    fn order_key(&self) -> (std::cmp::Reverse<usize>, usize, usize) {
        (std::cmp::Reverse(self.area), self.bbox.min_y, self.bbox.min_x)
    }
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        let next = parent[i as usize];
        parent[i as usize] = parent[next as usize];
        i = next;
    }
    i
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

struct Accum {
    area: usize,
    sum_x: u64,
    sum_y: u64,
    bbox: BBox,
}

/// Label 8-connected foreground components. The result is sorted by area
/// descending, ties broken by the bbox top-left `(min_y, min_x)`.
pub fn label_components(mask: &BinaryMask) -> Vec<Blob> {
    let (w, h) = (mask.width(), mask.height());
    // Provisional labels, 0 = background. parent[0] is unused.
    let mut labels = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0];

    for y in 0..h {
        for x in 0..w {
            if !mask.is_foreground(x, y) {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            if x > 0 {
                neighbours[n] = labels[y * w + x - 1];
                n += 1;
            }
            if y > 0 {
                let row = (y - 1) * w;
                if x > 0 {
                    neighbours[n] = labels[row + x - 1];
                    n += 1;
                }
                neighbours[n] = labels[row + x];
                n += 1;
                if x + 1 < w {
                    neighbours[n] = labels[row + x + 1];
                    n += 1;
                }
            }
            let mut assigned = 0;
            for &l in neighbours[..n].iter().filter(|&&l| l != 0) {
                if assigned == 0 {
                    assigned = l;
                } else {
                    union(&mut parent, assigned, l);
                }
            }
            if assigned == 0 {
                assigned = parent.len() as u32;
                parent.push(assigned);
            }
            labels[y * w + x] = assigned;
        }
    }

    let mut slots: Vec<Option<Accum>> = (0..parent.len()).map(|_| None).collect();
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == 0 {
                continue;
            }
            let root = find(&mut parent, l) as usize;
            let acc = slots[root].get_or_insert(Accum {
                area: 0,
                sum_x: 0,
                sum_y: 0,
                bbox: BBox {
                    min_x: x,
                    min_y: y,
                    max_x: x,
                    max_y: y,
                },
            });
            acc.area += 1;
            acc.sum_x += x as u64;
            acc.sum_y += y as u64;
            acc.bbox.min_x = acc.bbox.min_x.min(x);
            acc.bbox.max_x = acc.bbox.max_x.max(x);
            acc.bbox.max_y = y;
        }
    }

    let mut blobs: Vec<Blob> = slots
        .into_iter()
        .flatten()
        .map(|acc| Blob {
            label: 0,
            area: acc.area,
            bbox: acc.bbox,
            centroid: (acc.sum_x as f64 / acc.area as f64, acc.sum_y as f64 / acc.area as f64),
        })
        .collect();
    blobs.sort_by_key(Blob::order_key);
    for (i, blob) in blobs.iter_mut().enumerate() {
        blob.label = i as u32 + 1;
    }
    blobs
}

/// The first blob under the area-descending, top-left-ascending order.
pub fn largest_blob(blobs: &[Blob]) -> Option<&Blob> {
    blobs.iter().min_by_key(|b| b.order_key())
}

/// Largest blob whose area reaches `min_area`.
pub fn largest_blob_with_area(blobs: &[Blob], min_area: usize) -> Option<&Blob> {
    largest_blob(blobs).filter(|b| b.area >= min_area)
}

/// A 50x50 grid of values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureSample {
    values: Vec<f64>,
}

impl GestureSample {
    pub fn from_values(values: Vec<f64>) -> Option<Self> {
        (values.len() == SAMPLE_LEN && values.iter().all(|v| (0.0..=1.0).contains(v))).then_some(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * SAMPLE_SIDE + x]
    }

    /// Render as a 50x50 mask, values at or above 0.5 marking foreground.
    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask::from_fn(SAMPLE_SIDE, SAMPLE_SIDE, |x, y| self.get(x, y) >= 0.5)
    }
}

/// Nearest-neighbour resample of the mask's bbox window onto the 50x50 grid.
/// Output cell `o` reads source offset `o * extent / 50` along each axis.
pub fn crop_resize_50(mask: &BinaryMask, bbox: &BBox) -> GestureSample {
    let (bw, bh) = (bbox.width(), bbox.height());
    let mut values = Vec::with_capacity(SAMPLE_LEN);
    for oy in 0..SAMPLE_SIDE {
        let sy = bbox.min_y + oy * bh / SAMPLE_SIDE;
        for ox in 0..SAMPLE_SIDE {
            let sx = bbox.min_x + ox * bw / SAMPLE_SIDE;
            values.push(if mask.is_foreground(sx, sy) { 1.0 } else { 0.0 });
        }
    }
    GestureSample { values }
}

/// Bounding box of every foreground pixel, if any.
pub fn foreground_bbox(mask: &BinaryMask) -> Option<BBox> {
    let mut bbox: Option<BBox> = None;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.is_foreground(x, y) {
                let b = bbox.get_or_insert(BBox {
                    min_x: x,
                    min_y: y,
                    max_x: x,
                    max_y: y,
                });
                b.min_x = b.min_x.min(x);
                b.max_x = b.max_x.max(x);
                b.max_y = y;
            }
        }
    }
    bbox
}
