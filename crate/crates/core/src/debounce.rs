//! Fixed-length confidence queue that holds back gesture actions until the
//! classifier has agreed with itself for `Q` consecutive confident frames.

use std::collections::VecDeque;

use crate::classifier::ClassScores;

pub const DEFAULT_QUEUE_LEN: usize = 5;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Rolling window of the last `Q` accepted gesture numbers, `0` meaning
/// "nothing confident this frame".
#[derive(Debug, Clone, PartialEq)]
pub struct Debouncer {
    queue: VecDeque<u8>,
    capacity: usize,
    threshold: f64,
}

impl Default for Debouncer {
    fn default() -> Self {
        Self::new(DEFAULT_QUEUE_LEN, DEFAULT_CONFIDENCE)
    }
}

impl Debouncer {
    /// The queue starts full of zeros, so nothing fires for the first `Q - 1` frames.
    pub fn new(capacity: usize, threshold: f64) -> Self {
        assert!(capacity >= 1, "queue length must be at least 1");
        Self {
            queue: std::iter::repeat_n(0, capacity).collect(),
            capacity,
            threshold,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn queue(&self) -> impl Iterator<Item = u8> + '_ {
        self.queue.iter().copied()
    }

    /// Feed one frame's classification (`None` when no hand was found) and
    /// return the debounced gesture number for this frame.
    pub fn push(&mut self, scores: Option<&ClassScores>) -> u8 {
        self.push_raw(scores.map(|s| (s.num(), s.num_prob())))
    }

    /// As [`Debouncer::push`] with the `(num, num_prob)` pair given directly.
    pub fn push_raw(&mut self, classification: Option<(u8, f64)>) -> u8 {
        let accepted = match classification {
            Some((num, prob)) if prob > self.threshold => num,
            _ => 0,
        };
        self.queue.pop_front();
        self.queue.push_back(accepted);
        self.current()
    }

    /// Common value of the queue when uniform and nonzero, else 0.
    pub fn current(&self) -> u8 {
        let first = self.queue[0];
        if first != 0 && self.queue.iter().all(|&g| g == first) {
            first
        } else {
            0
        }
    }
}

/// Turns the per-frame debounced value into rising-edge gesture events.
#[derive(Debug, Clone, Default)]
pub struct EdgeTrigger {
    last: u8,
}

impl EdgeTrigger {
    pub fn new() -> Self {
        Self::default()
    }

    /// `Some(g)` exactly when the value changes to a nonzero `g`.
    pub fn update(&mut self, ges_num: u8) -> Option<u8> {
        let fired = (ges_num != 0 && ges_num != self.last).then_some(ges_num);
        self.last = ges_num;
        fired
    }
}

/// Indices and gesture numbers of the rising edges in a per-frame stream.
pub fn edge_events(stream: impl IntoIterator<Item = u8>) -> Vec<(usize, u8)> {
    let mut trigger = EdgeTrigger::new();
    stream
        .into_iter()
        .enumerate()
        .filter_map(|(i, g)| trigger.update(g).map(|g| (i, g)))
        .collect()
}
