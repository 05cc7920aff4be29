use std::collections::VecDeque;
use std::sync::mpsc::sync_channel;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sixsense::classifier::{Network, NetworkArch};
use sixsense::debounce::{Debouncer, EdgeTrigger};
use sixsense::imaging::{rgb_to_hsv, rgb_to_ycbcr, threshold_mask, BinaryMask, ChannelRange, Frame, HsvFrame};
use sixsense::markers::{
    detect_markers, map_cursor, map_cursor_exact, MappingConfig, MarkerColor, MarkerDetection, MarkerPalette,
    MarkerSet, PointerConfig, PointerKind, PointerTracker,
};
use sixsense::pipeline::{
    merge_events, run_gesture_pipeline, run_marker_pipeline, stream_events, to_json_lines, EngineEvent, FrameSource,
    GestureConfig, MarkerConfig, DEFAULT_FPS,
};
use sixsense::segmentation::{crop_resize_50, label_components, largest_blob_with_area};

const GREEN: [u8; 3] = [220, 200, 0];
const RED: [u8; 3] = [230, 20, 20];
const BLUE: [u8; 3] = [40, 60, 230];
const YELLOW: [u8; 3] = [30, 220, 120];
const SKIN: [u8; 3] = [150, 60, 40];
const BACKDROP: [u8; 3] = [40, 40, 40];

fn paint(f: &mut Frame, rgb: [u8; 3], x0: usize, y0: usize, w: usize, h: usize) {
    for y in y0..(y0 + h).min(f.height()) {
        for x in x0..(x0 + w).min(f.width()) {
            f.set_rgb(x, y, rgb);
        }
    }
}

#[test]
fn palette_colours_land_in_their_bands() {
    let p = MarkerPalette::default();
    for (rgb, color) in [
        (GREEN, MarkerColor::Green),
        (RED, MarkerColor::Red),
        (BLUE, MarkerColor::Blue),
        (YELLOW, MarkerColor::Yellow),
    ] {
        let px = sixsense::imaging::hsv_pixel(rgb);
        for other in MarkerColor::ALL {
            assert_eq!(p.range(other).contains(px), other == color, "{rgb:?} as {other:?}");
        }
    }
}

type Candidate = (usize, (usize, usize), (f64, f64));

/// Largest blob of at least `min_area` in a mask, found by flood fill.
fn oracle_marker(mask: &BinaryMask, min_area: usize) -> Option<MarkerDetection> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    // (area, top-left corner, centroid)
    let mut best: Option<Candidate> = None;
    for y0 in 0..h {
        for x0 in 0..w {
            if seen[y0 * w + x0] || !mask.is_foreground(x0, y0) {
                continue;
            }
            seen[y0 * w + x0] = true;
            let mut stack = vec![(x0, y0)];
            let (mut n, mut sx, mut sy, mut min_x) = (0, 0, 0, x0);
            while let Some((x, y)) = stack.pop() {
                n += 1;
                sx += x;
                sy += y;
                min_x = min_x.min(x);
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        if !seen[ny * w + nx] && mask.is_foreground(nx, ny) {
                            seen[ny * w + nx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            // Raster order reaches each blob first on its top row.
            let corner = (y0, min_x);
            let c = (sx as f64 / n as f64, sy as f64 / n as f64);
            let better = best.is_none_or(|(a, k, _)| n > a || (n == a && corner < k));
            if n >= min_area && better {
                best = Some((n, corner, c));
            }
        }
    }
    best.map(|(area, _, centroid)| MarkerDetection { centroid, area })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detect_markers_matches_threshold_and_flood_fill(seed in any::<u64>(), min_area in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = Frame::filled_rgb(48, 36, BACKDROP);
        for _ in 0..rng.random_range(0..10) {
            let rgb = [GREEN, RED, BLUE, YELLOW][rng.random_range(0..4)];
            let (x, y) = (rng.random_range(0..48), rng.random_range(0..36));
            paint(&mut f, rgb, x, y, rng.random_range(1..12), rng.random_range(1..12));
        }
        let hsv: HsvFrame = rgb_to_hsv(&f).unwrap();
        let palette = MarkerPalette::default();
        let set = detect_markers(&hsv, &palette, min_area, 7);
        prop_assert_eq!(set.frame, 7);
        for color in MarkerColor::ALL {
            let mask = threshold_mask(&hsv, palette.range(color)).unwrap();
            let want = oracle_marker(&mask, min_area);
            prop_assert_eq!(set.get(color).cloned(), want, "{:?}", color);
        }
    }

    #[test]
    fn mapping_is_affine(
        alpha in 0.1f64..3.0, beta in 0.1f64..3.0,
        gamma in -50i64..50, delta in -50i64..50,
        a in (0.0f64..640.0, 0.0f64..480.0), b in (0.0f64..640.0, 0.0f64..480.0),
    ) {
        let cfg = MappingConfig { alpha, beta, gamma, delta, ..MappingConfig::default() };
        let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        let (ma, mb, mm) = (map_cursor_exact(a, &cfg), map_cursor_exact(b, &cfg), map_cursor_exact(mid, &cfg));
        prop_assert!((mm.0 - (ma.0 + mb.0) / 2.0).abs() < 1e-9);
        prop_assert!((mm.1 - (ma.1 + mb.1) / 2.0).abs() < 1e-9);
        let (ra, rb, rm) = (map_cursor(a, &cfg), map_cursor(b, &cfg), map_cursor(mid, &cfg));
        let inside = |p: (f64, f64)| p.0 >= 0.0 && p.1 >= 0.0 && p.0 < 1919.5 && p.1 < 1079.5;
        if inside(ma) && inside(mb) && inside(mm) {
            prop_assert!((2 * rm.0 - ra.0 - rb.0).abs() <= 2);
            prop_assert!((2 * rm.1 - ra.1 - rb.1).abs() <= 2);
        }
    }

    #[test]
    fn at_most_one_click_per_appearance(presence in prop::collection::vec(any::<[bool; 4]>(), 1..40)) {
        let mut tracker = PointerTracker::new(PointerConfig::default());
        let mut prev = [false; 4];
        for (i, p) in presence.iter().enumerate() {
            let mut set = MarkerSet::empty(i as u64);
            for (c, color) in MarkerColor::ALL.into_iter().enumerate() {
                if p[c] {
                    set.set(color, Some(MarkerDetection { centroid: (i as f64, 2.0 * i as f64), area: 50 }));
                }
            }
            let events = tracker.update(&set);
            let count = |k: PointerKind| events.iter().filter(|e| e.kind == k).count();
            // Red is index 0, blue index 1 in MarkerColor::ALL.
            prop_assert_eq!(count(PointerKind::LeftClick), usize::from(p[0] && !prev[0]));
            prop_assert_eq!(count(PointerKind::RightClick), usize::from(p[1] && !prev[1]));
            prop_assert!(count(PointerKind::Move) <= 1);
            prev = *p;
        }
    }
}

fn marker_sequence() -> Vec<Frame> {
    (0..10)
        .map(|i| {
            let mut f = Frame::filled_rgb(64, 48, BACKDROP);
            paint(&mut f, GREEN, 5 + 4 * i, 10, 8, 8);
            if i == 4 || i == 5 {
                paint(&mut f, RED, 40, 30, 6, 6);
            }
            f
        })
        .collect()
}

#[test]
fn moving_cursor_and_red_blink() {
    let source = FrameSource::from_frames(marker_sequence(), DEFAULT_FPS);
    let mut cfg = MarkerConfig::default();
    cfg.pointer.mapping.video_width = 64;
    cfg.pointer.mapping.video_height = 48;
    let events = run_marker_pipeline(&source, &cfg).unwrap();
    let moves: Vec<_> = events.iter().filter(|e| e.kind == PointerKind::Move).collect();
    assert_eq!(moves.len(), 10);
    // Centroid (8.5 + 4i, 13.5) on 64x48 scaled by 30 and 22.5.
    for (i, m) in moves.iter().enumerate() {
        assert_eq!((m.x, m.y), (255 + 120 * i as i64, 304));
    }
    let clicks: Vec<_> = events.iter().filter(|e| e.kind == PointerKind::LeftClick).collect();
    assert_eq!(clicks.len(), 1);
    assert_eq!(clicks[0].frame, 4);
    assert_eq!((clicks[0].x, clicks[0].y), (moves[4].x, moves[4].y));
    assert!(events
        .iter()
        .all(|e| !matches!(e.kind, PointerKind::RightClick | PointerKind::Scroll(_))));
    let again = run_marker_pipeline(&source, &cfg).unwrap();
    assert_eq!(to_json_lines(&events), to_json_lines(&again));
}

#[test]
fn no_markers_no_events() {
    let source = FrameSource::from_frames(vec![Frame::filled_rgb(32, 32, BACKDROP); 5], DEFAULT_FPS);
    assert!(run_marker_pipeline(&source, &MarkerConfig::default())
        .unwrap()
        .is_empty());
}

fn gesture_sequence(seed: u64) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..25)
        .map(|_| {
            let mut f = Frame::filled_rgb(80, 60, [0, 0, 0]);
            if rng.random_bool(0.8) {
                let (x, y) = (rng.random_range(0..40), rng.random_range(0..30));
                paint(&mut f, SKIN, x, y, rng.random_range(8..30), rng.random_range(8..30));
            }
            for _ in 0..20 {
                let (x, y) = (rng.random_range(0..80), rng.random_range(0..60));
                f.set_rgb(x, y, SKIN);
            }
            f
        })
        .collect()
}

/// The pipeline is the module operations composed by hand.
#[test]
fn gesture_pipeline_equals_manual_composition() {
    let net = Network::init(NetworkArch::desk(), 3);
    let cfg = GestureConfig {
        confidence: 0.5,
        queue_len: 3,
        ..GestureConfig::default()
    };
    let frames = gesture_sequence(21);
    let run = run_gesture_pipeline(&FrameSource::from_frames(frames.clone(), DEFAULT_FPS), &net, &cfg).unwrap();
    let mut debouncer = Debouncer::new(cfg.queue_len, cfg.confidence);
    let mut edges = EdgeTrigger::new();
    let mut queue = VecDeque::from(vec![0u8; cfg.queue_len]);
    for (frame, trace) in frames.iter().zip(&run.trace) {
        let mask = threshold_mask(&rgb_to_ycbcr(frame, cfg.mode).unwrap(), &ChannelRange::skin()).unwrap();
        assert_eq!(trace.skin_pixels, mask.foreground_count());
        let blobs = label_components(&mask);
        let blob = largest_blob_with_area(&blobs, cfg.min_blob_area);
        assert_eq!(trace.blob.as_ref().map(|b| b.area), blob.map(|b| b.area));
        let scores = blob.map(|b| net.classify(&crop_resize_50(&mask, &b.bbox)).unwrap());
        assert_eq!(trace.num, scores.as_ref().map(|s| s.num()));
        assert_eq!(trace.num_prob, scores.as_ref().map(|s| s.num_prob()));
        let accepted = scores
            .as_ref()
            .filter(|s| s.num_prob() > cfg.confidence)
            .map_or(0, |s| s.num());
        queue.pop_front();
        queue.push_back(accepted);
        assert_eq!(trace.enqueued, accepted);
        let g = debouncer.push(scores.as_ref());
        assert_eq!(trace.ges_num, g);
        assert_eq!(trace.event, edges.update(g));
    }
    assert!(run.trace.iter().any(|t| t.blob.is_some()));
    let again = run_gesture_pipeline(&FrameSource::from_frames(frames, DEFAULT_FPS), &net, &cfg).unwrap();
    assert_eq!(to_json_lines(&run.trace), to_json_lines(&again.trace));
}

#[test]
fn streamed_events_equal_merged_batch() {
    let net = Network::init(NetworkArch::desk(), 3);
    let gcfg = GestureConfig {
        confidence: 0.5,
        queue_len: 2,
        ..GestureConfig::default()
    };
    let mut frames = gesture_sequence(5);
    for (f, m) in frames.iter_mut().zip(marker_sequence().iter().cycle()) {
        for y in 0..48 {
            for x in 0..60 {
                if m.rgb(x, y) != BACKDROP {
                    f.set_rgb(x, y, m.rgb(x, y));
                }
            }
        }
    }
    let source = FrameSource::from_frames(frames, DEFAULT_FPS);
    let mcfg = MarkerConfig::default();
    let gestures = run_gesture_pipeline(&source, &net, &gcfg).unwrap().events;
    let pointers = run_marker_pipeline(&source, &mcfg)
        .unwrap()
        .into_iter()
        .map(EngineEvent::PointerEvent)
        .collect();
    let batch = merge_events(gestures, pointers);

    // A one-slot channel forces the producer to wait on the consumer.
    let (tx, rx) = sync_channel(1);
    let streamed = std::thread::scope(|s| {
        let consumer = s.spawn(move || rx.iter().collect::<Vec<_>>());
        stream_events(&source, &net, &gcfg, &mcfg, &tx).unwrap();
        drop(tx);
        consumer.join().unwrap()
    });
    assert_eq!(streamed, batch);
    assert!(!batch.is_empty());
}

#[test]
fn frame_directory_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let write = |name: &str, v: u8| {
        std::fs::write(
            dir.join(name),
            sixsense::imaging::encode_netpbm(&Frame::filled_gray(2, 2, v)),
        )
        .unwrap()
    };
    write("f10.pgm", 10);
    write("f2.pgm", 2);
    write("f1.pgm", 1);
    std::fs::write(dir.join("notes.txt"), "ignored").unwrap();
    let source = FrameSource::open_dir(dir, DEFAULT_FPS).unwrap();
    let values: Vec<u8> = source.frames().map(|r| r.unwrap().1.gray(0, 0)).collect();
    assert_eq!(values, vec![1, 2, 10]);
}
