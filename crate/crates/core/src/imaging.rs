//! Pixel-level primitives: raster frames, NetPBM I/O, color-space conversion
//! and per-channel threshold masks.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("frame data has {actual} samples, expected {expected} for {width}x{height}x{channels}")]
    DataLength {
        width: usize,
        height: usize,
        channels: usize,
        expected: usize,
        actual: usize,
    },
    #[error("unsupported channel count {0}, expected 1 or 3")]
    UnsupportedChannels(usize),
    #[error("expected a {expected}-channel frame, got {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("color space mismatch: range is {range}, frame is {frame}")]
    ColorSpaceMismatch { range: ColorSpace, frame: ColorSpace },
    #[error("invalid range for {channel}: min {min} > max {max}")]
    InvalidRange { channel: &'static str, min: u8, max: u8 },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("netpbm decode error at byte {offset}: {kind}")]
    Decode { offset: usize, kind: DecodeErrorKind },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeErrorKind {
    BadMagic,
    UnexpectedEof,
    BadNumber,
    ZeroDimension,
    UnsupportedMaxval(u32),
    MissingSeparator,
    Truncated { expected: usize, actual: usize },
}

impl fmt::Display for DecodeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeErrorKind::BadMagic => write!(f, "expected magic P5 or P6"),
            DecodeErrorKind::UnexpectedEof => write!(f, "unexpected end of header"),
            DecodeErrorKind::BadNumber => write!(f, "malformed header number"),
            DecodeErrorKind::ZeroDimension => write!(f, "zero width or height"),
            DecodeErrorKind::UnsupportedMaxval(v) => write!(f, "unsupported maxval {v}, only 255"),
            DecodeErrorKind::MissingSeparator => {
                write!(f, "header must end with a single whitespace byte")
            }
            DecodeErrorKind::Truncated { expected, actual } => {
                write!(f, "body truncated: {actual} of {expected} bytes")
            }
        }
    }
}

/// A decoded 8-bit raster, row-major, interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if channels != 1 && channels != 3 {
            return Err(ImageError::UnsupportedChannels(channels));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(ImageError::DataLength {
                width,
                height,
                channels,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A frame filled with a single RGB color.
    pub fn filled_rgb(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self {
            width,
            height,
            channels: 3,
            data,
        }
    }

    pub fn filled_gray(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            channels: 1,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        debug_assert_eq!(self.channels, 3);
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_rgb(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        debug_assert_eq!(self.channels, 3);
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn gray(&self, x: usize, y: usize) -> u8 {
        debug_assert_eq!(self.channels, 1);
        self.data[y * self.width + x]
    }

    pub fn set_gray(&mut self, x: usize, y: usize, value: u8) {
        debug_assert_eq!(self.channels, 1);
        self.data[y * self.width + x] = value;
    }

    fn require_rgb(&self) -> Result<(), ImageError> {
        if self.channels != 3 {
            return Err(ImageError::ChannelMismatch {
                expected: 3,
                actual: self.channels,
            });
        }
        Ok(())
    }

    /// Grayscale view of the frame. RGB frames use integer BT.601 luma
    /// `(299 R + 587 G + 114 B + 500) / 1000`; gray frames are cloned.
    pub fn to_gray(&self) -> Frame {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8)
            .collect();
        Frame {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

fn decode_err(offset: usize, kind: DecodeErrorKind) -> ImageError {
    ImageError::Decode { offset, kind }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<u32, ImageError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        if start >= self.bytes.len() {
            return Err(decode_err(start, DecodeErrorKind::UnexpectedEof));
        }
        let mut value: u32 = 0;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((self.bytes[self.pos] - b'0') as u32))
                .ok_or_else(|| decode_err(start, DecodeErrorKind::BadNumber))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(decode_err(start, DecodeErrorKind::BadNumber));
        }
        Ok(value)
    }
}

/// Decode a binary NetPBM image (`P5` grayscale or `P6` RGB, maxval 255).
/// Bytes after the declared body are ignored.
pub fn decode_netpbm(bytes: &[u8]) -> Result<Frame, ImageError> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(decode_err(0, DecodeErrorKind::BadMagic)),
    };
    let mut reader = HeaderReader { bytes, pos: 2 };
    let width = reader.number()? as usize;
    let height = reader.number()? as usize;
    if width == 0 || height == 0 {
        return Err(decode_err(reader.pos, DecodeErrorKind::ZeroDimension));
    }
    let maxval_offset = reader.pos;
    let maxval = reader.number()?;
    if maxval != 255 {
        return Err(decode_err(maxval_offset, DecodeErrorKind::UnsupportedMaxval(maxval)));
    }
    match bytes.get(reader.pos) {
        Some(b) if b.is_ascii_whitespace() => reader.pos += 1,
        Some(_) => return Err(decode_err(reader.pos, DecodeErrorKind::MissingSeparator)),
        None => return Err(decode_err(reader.pos, DecodeErrorKind::UnexpectedEof)),
    }
    let body_start = reader.pos;
    let expected = width * height * channels;
    let available = bytes.len() - body_start;
    if available < expected {
        return Err(decode_err(
            bytes.len(),
            DecodeErrorKind::Truncated {
                expected,
                actual: available,
            },
        ));
    }
    Frame::new(
        width,
        height,
        channels,
        bytes[body_start..body_start + expected].to_vec(),
    )
}

/// Encode with a canonical header: `P6\n<w> <h>\n255\n` followed by the body.
pub fn encode_netpbm(frame: &Frame) -> Vec<u8> {
    let magic = if frame.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.data);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    YCbCr,
    Hsv,
}

impl fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColorSpace::YCbCr => f.write_str("YCbCr"),
            ColorSpace::Hsv => f.write_str("HSV"),
        }
    }
}

/// Which RGB to YCbCr transform to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YCbCrMode {
    /// The skin-detection transform with its printed coefficients, kept as is.
    /// Gray does not map to Cb = Cr = 128 under it.
    #[default]
    Verbatim,
    /// BT.601 studio swing: Y in [16, 235], Cb/Cr in [16, 240].
    Standard,
}

/// A three-component frame in a derived color space. Components are stored
/// interleaved, one `[u8; 3]` per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorFrame {
    space: ColorSpace,
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

/// Per-pixel `(Y, Cb, Cr)`.
pub type YCbCrFrame = ColorFrame;
/// Per-pixel `(H, S, V)` with `H` in `[0, 180)`.
pub type HsvFrame = ColorFrame;

impl ColorFrame {
    pub fn from_pixels(
        space: ColorSpace,
        width: usize,
        height: usize,
        pixels: Vec<[u8; 3]>,
    ) -> Result<Self, ImageError> {
        if pixels.len() != width * height {
            return Err(ImageError::DataLength {
                width,
                height,
                channels: 3,
                expected: width * height * 3,
                actual: pixels.len() * 3,
            });
        }
        if space == ColorSpace::Hsv {
            debug_assert!(pixels.iter().all(|p| p[0] < 180));
        }
        Ok(Self {
            space,
            width,
            height,
            pixels,
        })
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

fn round_clamp(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Convert one RGB pixel to `(Y, Cb, Cr)`: double precision, round half up, clamp.
pub fn ycbcr_pixel(rgb: [u8; 3], mode: YCbCrMode) -> [u8; 3] {
    let (r, g, b) = (rgb[0] as f64, rgb[1] as f64, rgb[2] as f64);
    let (y, cb, cr) = match mode {
        YCbCrMode::Verbatim => {
            let luma = 219.0 / 255.0;
            let chroma = 224.0 / 255.0;
            // Divisors 1.18556 and 1.8556 and the 0.05 blue term are intentional.
            let y = 0.2126 * luma * r + 0.7152 * luma * g + 0.0722 * luma * b + 16.0;
            let cb = -0.2126 / 1.18556 * chroma * r - 0.7152 / 1.8556 * chroma * g + 0.05 * luma * b + 128.0;
            let cr = 0.5 * chroma * r - 0.7152 / 1.5748 * chroma * g + 0.0722 / 1.5748 * luma * b + 128.0;
            (y, cb, cr)
        }
        YCbCrMode::Standard => {
            let y = 16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
            let cb = 128.0 + (-37.797 * r - 74.203 * g + 112.0 * b) / 255.0;
            let cr = 128.0 + (112.0 * r - 93.786 * g - 18.214 * b) / 255.0;
            (y, cb, cr)
        }
    };
    [round_clamp(y), round_clamp(cb), round_clamp(cr)]
}

pub fn rgb_to_ycbcr(frame: &Frame, mode: YCbCrMode) -> Result<YCbCrFrame, ImageError> {
    frame.require_rgb()?;
    let pixels = frame
        .data
        .chunks_exact(3)
        .map(|p| ycbcr_pixel([p[0], p[1], p[2]], mode))
        .collect();
    ColorFrame::from_pixels(ColorSpace::YCbCr, frame.width, frame.height, pixels)
}

/// Convert one RGB pixel to `(H, S, V)` with hue halved into `[0, 180)` and
/// saturation/value in `[0, 255]`. Achromatic pixels get hue 0.
pub fn hsv_pixel(rgb: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (rgb[0] as f64, rgb[1] as f64, rgb[2] as f64);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max * 255.0 } else { 0.0 };
    let mut h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * (g - b) / delta
    } else if max == g {
        120.0 + 60.0 * (b - r) / delta
    } else {
        240.0 + 60.0 * (r - g) / delta
    };
    if h < 0.0 {
        h += 360.0;
    }
    let mut h = round_clamp(h / 2.0);
    if h >= 180 {
        h -= 180;
    }
    [h, round_clamp(s), max as u8]
}

pub fn rgb_to_hsv(frame: &Frame) -> Result<HsvFrame, ImageError> {
    frame.require_rgb()?;
    let pixels = frame
        .data
        .chunks_exact(3)
        .map(|p| hsv_pixel([p[0], p[1], p[2]]))
        .collect();
    ColorFrame::from_pixels(ColorSpace::Hsv, frame.width, frame.height, pixels)
}

/// Inclusive per-channel bounds in one color space. `None` leaves a channel
/// untested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelRange {
    space: ColorSpace,
    bounds: [Option<(u8, u8)>; 3],
}

impl ChannelRange {
    pub fn new(space: ColorSpace, bounds: [Option<(u8, u8)>; 3]) -> Result<Self, ImageError> {
        let names = match space {
            ColorSpace::YCbCr => ["Y", "Cb", "Cr"],
            ColorSpace::Hsv => ["H", "S", "V"],
        };
        for (name, bound) in names.iter().zip(bounds) {
            if let Some((min, max)) = bound {
                if min > max {
                    return Err(ImageError::InvalidRange {
                        channel: name,
                        min,
                        max,
                    });
                }
            }
        }
        Ok(Self { space, bounds })
    }

    /// Skin rule: `Cb in [80, 135]`, `Cr in [130, 185]`, luma ignored.
    pub fn skin() -> Self {
        Self {
            space: ColorSpace::YCbCr,
            bounds: [None, Some((80, 135)), Some((130, 185))],
        }
    }

    /// A range testing all three HSV channels between `min` and `max`.
    pub fn hsv(min: [u8; 3], max: [u8; 3]) -> Result<Self, ImageError> {
        Self::new(
            ColorSpace::Hsv,
            [Some((min[0], max[0])), Some((min[1], max[1])), Some((min[2], max[2]))],
        )
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn bounds(&self) -> [Option<(u8, u8)>; 3] {
        self.bounds
    }

    pub fn contains(&self, pixel: [u8; 3]) -> bool {
        self.bounds
            .iter()
            .zip(pixel)
            .all(|(bound, v)| bound.is_none_or(|(lo, hi)| (lo..=hi).contains(&v)))
    }
}

pub const FOREGROUND: u8 = 255;
pub const BACKGROUND: u8 = 0;

/// Image whose pixels are exactly 0 or 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![BACKGROUND; width * height],
        }
    }

    /// Build from booleans, `true` marking foreground.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(if f(x, y) { FOREGROUND } else { BACKGROUND });
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == FOREGROUND
    }

    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.data[y * self.width + x] = if on { FOREGROUND } else { BACKGROUND };
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v == FOREGROUND).count()
    }

    /// As a single-channel frame, e.g. for writing out as PGM.
    pub fn to_frame(&self) -> Frame {
        Frame {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.data.clone(),
        }
    }
}

pub fn threshold_mask(frame: &ColorFrame, range: &ChannelRange) -> Result<BinaryMask, ImageError> {
    if frame.space != range.space {
        return Err(ImageError::ColorSpaceMismatch {
            range: range.space,
            frame: frame.space,
        });
    }
    let data = frame
        .pixels
        .iter()
        .map(|&p| if range.contains(p) { FOREGROUND } else { BACKGROUND })
        .collect();
    Ok(BinaryMask {
        width: frame.width,
        height: frame.height,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_p6() {
        let mut bytes = b"P6 2 1 255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let frame = decode_netpbm(&bytes).unwrap();
        assert_eq!(frame.dimensions(), (2, 1));
        assert_eq!(frame.channels(), 3);
        assert_eq!(frame.data(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn decodes_p5_single_sample() {
        let frame = decode_netpbm(b"P5 1 1 255\n\x80").unwrap();
        assert_eq!(frame.channels(), 1);
        assert_eq!(frame.data(), &[128]);
    }

    #[test]
    fn skips_header_comments() {
        let frame = decode_netpbm(b"P5\n# made by hand\n2 # width\n1\n255\n\x01\x02").unwrap();
        assert_eq!(frame.data(), &[1, 2]);
    }

    #[test]
    fn truncated_body_reports_offset() {
        let err = decode_netpbm(b"P6 2 1 255\n\x00\x00\x00").unwrap_err();
        assert_eq!(
            err,
            ImageError::Decode {
                offset: 14,
                kind: DecodeErrorKind::Truncated { expected: 6, actual: 3 }
            }
        );
    }

    #[test]
    fn rejects_bad_headers() {
        let kind = |bytes: &[u8]| match decode_netpbm(bytes).unwrap_err() {
            ImageError::Decode { kind, .. } => kind,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(kind(b"P3 1 1 255\n1 2 3"), DecodeErrorKind::BadMagic);
        assert_eq!(
            kind(b"P5 1 1 65535\n\x00\x00"),
            DecodeErrorKind::UnsupportedMaxval(65535)
        );
        assert_eq!(kind(b"P5 x 1 255\n\x00"), DecodeErrorKind::BadNumber);
        assert_eq!(kind(b"P5 1 1"), DecodeErrorKind::UnexpectedEof);
        assert_eq!(kind(b"P5 0 1 255\n"), DecodeErrorKind::ZeroDimension);
        assert_eq!(kind(b"P5 1 1 255"), DecodeErrorKind::UnexpectedEof);
    }

    #[test]
    fn maxval_error_names_its_offset() {
        match decode_netpbm(b"P5 1 1 15\n\x00").unwrap_err() {
            ImageError::Decode { offset, .. } => assert_eq!(offset, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn black_maps_to_offsets() {
        assert_eq!(ycbcr_pixel([0, 0, 0], YCbCrMode::Verbatim), [16, 128, 128]);
        assert_eq!(ycbcr_pixel([0, 0, 0], YCbCrMode::Standard), [16, 128, 128]);
    }

    #[test]
    fn white_luma_is_235() {
        assert_eq!(ycbcr_pixel([255, 255, 255], YCbCrMode::Verbatim)[0], 235);
        assert_eq!(ycbcr_pixel([255, 255, 255], YCbCrMode::Standard), [235, 128, 128]);
    }

    #[test]
    fn white_chroma_verbatim() {
        // Hand evaluation of the printed chroma rows at R = G = B = 255:
        // Cb = -0.2126/1.18556*224 - 0.7152/1.8556*224 + 0.05*219 + 128
        //    = -40.1687... - 86.3371... + 10.95 + 128 = 12.444 -> 12
        // Cr = 0.5*224 - 0.7152/1.5748*224 + 0.0722/1.5748*219 + 128
        //    = 112 - 101.7313... + 10.0405... + 128 = 148.309 -> 148
        assert_eq!(ycbcr_pixel([255, 255, 255], YCbCrMode::Verbatim), [235, 12, 148]);
    }

    #[test]
    fn ycbcr_rejects_gray() {
        let gray = Frame::filled_gray(2, 2, 7);
        assert_eq!(
            rgb_to_ycbcr(&gray, YCbCrMode::Verbatim).unwrap_err(),
            ImageError::ChannelMismatch { expected: 3, actual: 1 }
        );
        assert!(rgb_to_hsv(&gray).is_err());
    }

    #[test]
    fn hsv_examples() {
        assert_eq!(hsv_pixel([255, 0, 0]), [0, 255, 255]);
        assert_eq!(hsv_pixel([0, 0, 0]), [0, 0, 0]);
        let gray = hsv_pixel([128, 128, 128]);
        assert_eq!((gray[1], gray[2]), (0, 128));
        assert_eq!(hsv_pixel([0, 255, 0]), [60, 255, 255]);
        assert_eq!(hsv_pixel([0, 0, 255]), [120, 255, 255]);
        // 357.6 degrees halves to 178.8; 359.1 halves and rounds to 180, which wraps.
        assert_eq!(hsv_pixel([255, 0, 10])[0], 179);
        assert_eq!(hsv_pixel([255, 0, 4])[0], 0);
    }

    #[test]
    fn skin_threshold_examples() {
        let skin = ChannelRange::skin();
        assert!(skin.contains([90, 100, 150]));
        assert!(!skin.contains([90, 79, 150]));
        assert!(skin.contains([0, 80, 185]));
        assert!(!skin.contains([0, 80, 186]));
        let red = ChannelRange::hsv([0, 135, 110], [6, 255, 255]).unwrap();
        assert!(red.contains([3, 200, 200]));
    }

    #[test]
    fn threshold_checks_color_space() {
        let hsv = rgb_to_hsv(&Frame::filled_rgb(2, 2, [1, 2, 3])).unwrap();
        assert!(matches!(
            threshold_mask(&hsv, &ChannelRange::skin()),
            Err(ImageError::ColorSpaceMismatch { .. })
        ));
    }

    #[test]
    fn invalid_range_rejected() {
        assert!(ChannelRange::hsv([10, 0, 0], [5, 255, 255]).is_err());
    }

    #[test]
    fn encode_is_canonical() {
        let frame = decode_netpbm(b"P5 # c\n2 1\n255\n\x05\x06").unwrap();
        assert_eq!(encode_netpbm(&frame), b"P5\n2 1\n255\n\x05\x06");
    }
}
