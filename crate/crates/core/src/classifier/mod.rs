//! Fully connected sigmoid network used as the gesture classifier.
//!
//! Weights are stored per layer as row-major matrices with one row per
//! destination neuron. Each neuron also has a bias weight fed by a constant
//! input of 1; biases are trained like any other parameter.
//!
//! The loss is the squared error `0.5 * sum_k (a_k - t_k)^2` against one-hot
//! targets, averaged over the samples of a batch. Output activations are
//! reported raw (no softmax), so the winning activation can be compared
//! against a fixed confidence threshold.

mod synthetic;
mod train;
mod weights;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use synthetic::{generate_synthetic_dataset, render_gesture_mask, ShapeFamily, ShapeParams, SHAPE_FAMILIES};
pub use train::{train, LabeledSample, Loss, TrainingConfig, TrainingReport};
pub use weights::{load_weights, save_weights};

use crate::segmentation::{GestureSample, SAMPLE_LEN};

/// Maximum number of gesture classes; gesture numbers run `1..=10`.
pub const MAX_CLASSES: usize = 10;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("invalid architecture: {0}")]
    InvalidArch(String),
    #[error("input has length {actual}, network expects {expected}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("label {label} outside 1..={classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("unsupported activation {0:?}")]
    UnsupportedActivation(String),
    #[error("malformed weights file: {0}")]
    Weights(#[from] serde_json::Error),
    #[error("weights do not match declared architecture: {0}")]
    WeightsShape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Sigmoid,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ClassifierError> {
        match name {
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(ClassifierError::UnsupportedActivation(other.to_owned())),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Layer sizes from input to output plus the activation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkArch {
    sizes: Vec<usize>,
    activation: Activation,
}

impl NetworkArch {
    pub fn new(sizes: Vec<usize>, activation: Activation) -> Result<Self, ClassifierError> {
        if sizes.len() < 3 {
            return Err(ClassifierError::InvalidArch(format!(
                "need at least 3 layers, got {}",
                sizes.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(ClassifierError::InvalidArch("layer sizes must be at least 1".into()));
        }
        Ok(Self { sizes, activation })
    }

    pub fn sigmoid(sizes: &[usize]) -> Result<Self, ClassifierError> {
        Self::new(sizes.to_vec(), Activation::Sigmoid)
    }

    /// 2500 inputs, hidden layers of 2500 and 1200, 10 outputs.
    pub fn full() -> Self {
        Self {
            sizes: vec![SAMPLE_LEN, 2500, 1200, MAX_CLASSES],
            activation: Activation::Sigmoid,
        }
    }

    /// Reduced hidden layers that train in seconds.
    pub fn desk() -> Self {
        Self {
            sizes: vec![SAMPLE_LEN, 64, 32, MAX_CLASSES],
            activation: Activation::Sigmoid,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn parameter_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// One fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    /// `outputs x inputs`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn from_parts(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, ClassifierError> {
        if weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(ClassifierError::WeightsShape(format!(
                "layer {inputs}->{outputs} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }

    pub fn row(&self, out: usize) -> &[f64] {
        &self.weights[out * self.inputs..(out + 1) * self.inputs]
    }

    fn activate(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(i, b)| {
            let dot: f64 = self.row(i).iter().zip(input).map(|(w, x)| w * x).sum();
            sigmoid(dot + b)
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: NetworkArch,
    layers: Vec<Layer>,
}

/// Per-class output activations. Gesture numbers are the 1-based argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    activations: Vec<f64>,
}

impl ClassScores {
    pub fn new(activations: Vec<f64>) -> Self {
        assert!(!activations.is_empty(), "class scores need at least one class");
        Self { activations }
    }

    pub fn activations(&self) -> &[f64] {
        &self.activations
    }

    fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &a) in self.activations.iter().enumerate() {
            if a > self.activations[best] {
                best = i;
            }
        }
        best
    }

    /// Predicted gesture number in `1..=classes`; the first maximum wins ties.
    pub fn num(&self) -> u8 {
        self.argmax() as u8 + 1
    }

    /// The winning raw activation.
    pub fn num_prob(&self) -> f64 {
        self.activations[self.argmax()]
    }
}

/// Gradient of the loss with respect to every weight and bias, shaped like
/// the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += scale * y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += scale * y);
        }
    }
}

impl Network {
    /// Uniform Glorot initialisation: each weight from `[-r, r]` with
    /// `r = sqrt(6 / (fan_in + fan_out))`; biases start at zero.
    pub fn init(arch: NetworkArch, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = arch
            .sizes
            .windows(2)
            .map(|w| {
                let r = glorot_bound(w[0], w[1]);
                let mut layer = Layer::zeros(w[0], w[1]);
                layer.weights.iter_mut().for_each(|v| *v = rng.random_range(-r..=r));
                layer
            })
            .collect();
        Self { arch, layers }
    }

    /// A network with every parameter zero.
    pub fn zeros(arch: NetworkArch) -> Self {
        let layers = arch.sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Self { arch, layers }
    }

    pub fn from_layers(arch: NetworkArch, layers: Vec<Layer>) -> Result<Self, ClassifierError> {
        if layers.len() != arch.sizes.len() - 1 {
            return Err(ClassifierError::WeightsShape(format!(
                "arch has {} weight layers, got {}",
                arch.sizes.len() - 1,
                layers.len()
            )));
        }
        for (i, (layer, w)) in layers.iter().zip(arch.sizes.windows(2)).enumerate() {
            if layer.inputs != w[0] || layer.outputs != w[1] {
                return Err(ClassifierError::WeightsShape(format!(
                    "layer {i} is {}->{}, arch says {}->{}",
                    layer.inputs, layer.outputs, w[0], w[1]
                )));
            }
        }
        Ok(Self { arch, layers })
    }

    pub fn arch(&self) -> &NetworkArch {
        &self.arch
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    fn check_input(&self, len: usize) -> Result<(), ClassifierError> {
        if len != self.arch.inputs() {
            return Err(ClassifierError::ShapeMismatch {
                expected: self.arch.inputs(),
                actual: len,
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<ClassScores, ClassifierError> {
        self.check_input(input.len())?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.activate(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        Ok(ClassScores::new(current))
    }

    pub fn classify(&self, sample: &GestureSample) -> Result<ClassScores, ClassifierError> {
        self.forward(sample.values())
    }

    /// Activations of every layer, input first.
    fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.activate(acts.last().unwrap(), &mut out);
            acts.push(out);
        }
        acts
    }

    /// Loss of one sample against its target vector.
    pub fn loss(&self, input: &[f64], target: &[f64]) -> Result<f64, ClassifierError> {
        let scores = self.forward(input)?;
        self.check_target(target.len())?;
        Ok(squared_error(scores.activations(), target))
    }

    fn check_target(&self, len: usize) -> Result<(), ClassifierError> {
        if len != self.arch.outputs() {
            return Err(ClassifierError::ShapeMismatch {
                expected: self.arch.outputs(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Exact loss gradients for one `(input, target)` pair.
    pub fn backprop_gradients(&self, input: &[f64], target: &[f64]) -> Result<Gradients, ClassifierError> {
        self.check_input(input.len())?;
        self.check_target(target.len())?;
        let mut grads = Gradients::zeros_like(self);
        self.accumulate_gradients(input, target, 1.0, &mut grads);
        Ok(grads)
    }

    /// Adds `scale * dL/dtheta` into `grads` and returns the sample loss.
    fn accumulate_gradients(&self, input: &[f64], target: &[f64], scale: f64, grads: &mut Gradients) -> f64 {
        let acts = self.forward_trace(input);
        let output = acts.last().unwrap();
        let loss = squared_error(output, target);
        let mut delta: Vec<f64> = output
            .iter()
            .zip(target)
            .map(|(&a, &t)| (a - t) * a * (1.0 - a))
            .collect();

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let prev = &acts[l];
            let g = &mut grads.layers[l];
            for (i, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let sd = scale * d;
                g.bias[i] += sd;
                let row = &mut g.weights[i * layer.inputs..(i + 1) * layer.inputs];
                for (gw, &x) in row.iter_mut().zip(prev) {
                    *gw += sd * x;
                }
            }
            if l > 0 {
                let mut back = vec![0.0; layer.inputs];
                for (i, &d) in delta.iter().enumerate() {
                    for (b, &w) in back.iter_mut().zip(layer.row(i)) {
                        *b += w * d;
                    }
                }
                delta = back.into_iter().zip(prev).map(|(b, &a)| b * a * (1.0 - a)).collect();
            }
        }
        loss
    }

    /// Gradient step `theta -= learning_rate * grads`.
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            layer
                .weights
                .iter_mut()
                .zip(&g.weights)
                .for_each(|(w, d)| *w -= learning_rate * d);
            layer
                .bias
                .iter_mut()
                .zip(&g.bias)
                .for_each(|(b, d)| *b -= learning_rate * d);
        }
    }

    /// All parameters in layer order, weights before biases.
    pub fn flatten_parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    /// Mutable access to parameter `index` in [`Network::flatten_parameters`] order.
    pub fn parameter_mut(&mut self, mut index: usize) -> &mut f64 {
        for layer in &mut self.layers {
            let nw = layer.weights.len();
            if index < nw {
                return &mut layer.weights[index];
            }
            index -= nw;
            if index < layer.bias.len() {
                return &mut layer.bias[index];
            }
            index -= layer.bias.len();
        }
        panic!("parameter index out of range");
    }
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn squared_error(output: &[f64], target: &[f64]) -> f64 {
    0.5 * output.iter().zip(target).map(|(a, t)| (a - t) * (a - t)).sum::<f64>()
}

/// One-hot target for a 1-based label.
pub fn one_hot(label: usize, classes: usize) -> Vec<f64> {
    let mut t = vec![0.0; classes];
    t[label - 1] = 1.0;
    t
}
