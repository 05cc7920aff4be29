use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{one_hot, ClassifierError, Gradients, Network};

/// An input vector with its 1-based class label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub input: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    /// Half squared error against one-hot targets.
    #[default]
    Mse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: Loss,
}

impl Default for TrainingConfig {
    /// Learning rate 1e-5 for 5000 epochs, mini-batches of 32.
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            epochs: 5000,
            batch_size: 32,
            seed: 0,
            loss: Loss::Mse,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ClassifierError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(ClassifierError::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(ClassifierError::InvalidConfig("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub network: Network,
    /// Mean per-sample loss seen during each epoch.
    pub loss_history: Vec<f64>,
}

/// Mini-batch gradient descent. Sample order is reshuffled every epoch from
/// a generator seeded with `cfg.seed`, so runs are bit-reproducible.
pub fn train(
    mut net: Network,
    dataset: &[LabeledSample],
    cfg: &TrainingConfig,
) -> Result<TrainingReport, ClassifierError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let classes = net.arch().outputs();
    for sample in dataset {
        net.check_input(sample.input.len())?;
        if sample.label == 0 || sample.label > classes {
            return Err(ClassifierError::LabelOutOfRange {
                label: sample.label,
                classes,
            });
        }
    }
    let targets: Vec<Vec<f64>> = dataset.iter().map(|s| one_hot(s.label, classes)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut grads = Gradients::zeros_like(&net);
    let mut loss_history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.layers.iter_mut().for_each(|l| {
                l.weights.fill(0.0);
                l.bias.fill(0.0);
            });
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                epoch_loss += net.accumulate_gradients(&dataset[i].input, &targets[i], scale, &mut grads);
            }
            net.apply_gradients(&grads, cfg.learning_rate);
        }
        loss_history.push(epoch_loss / dataset.len() as f64);
    }
    Ok(TrainingReport {
        network: net,
        loss_history,
    })
}

impl Network {
    /// Fraction of samples whose argmax matches the label.
    pub fn accuracy(&self, samples: &[LabeledSample]) -> Result<f64, ClassifierError> {
        if samples.is_empty() {
            return Err(ClassifierError::EmptyDataset);
        }
        let mut correct = 0usize;
        for s in samples {
            if self.forward(&s.input)?.num() as usize == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / samples.len() as f64)
    }
}

impl Gradients {
    /// `self += other`, used when summing per-sample gradients by hand.
    pub fn accumulate(&mut self, other: &Gradients) {
        self.add_scaled(other, 1.0);
    }
}
