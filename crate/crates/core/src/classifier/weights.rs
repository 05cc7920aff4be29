//! JSON weights file:
//! `{"arch":[...],"activation":"sigmoid","layers":[{"w":[[...],...],"b":[...]}]}`
//! where each `w` row holds the incoming weights of one destination neuron.

use serde::{Deserialize, Serialize};

use super::{Activation, ClassifierError, Layer, Network, NetworkArch};

#[derive(Serialize, Deserialize)]
struct WeightsFile {
    arch: Vec<usize>,
    activation: String,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

pub fn save_weights(net: &Network) -> Vec<u8> {
    let file = WeightsFile {
        arch: net.arch().sizes().to_vec(),
        activation: net.arch().activation().name().to_owned(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerFile {
                w: l.weights().chunks(l.inputs()).map(<[f64]>::to_vec).collect(),
                b: l.bias().to_vec(),
            })
            .collect(),
    };
    serde_json::to_vec(&file).expect("weights serialize")
}

pub fn load_weights(bytes: &[u8]) -> Result<Network, ClassifierError> {
    let file: WeightsFile = serde_json::from_slice(bytes)?;
    let activation = Activation::from_name(&file.activation)?;
    let arch = NetworkArch::new(file.arch, activation)?;
    if file.layers.len() != arch.sizes().len() - 1 {
        return Err(ClassifierError::WeightsShape(format!(
            "arch declares {} weight layers, file has {}",
            arch.sizes().len() - 1,
            file.layers.len()
        )));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, (lf, dims)) in file.layers.into_iter().zip(arch.sizes().windows(2)).enumerate() {
        let (inputs, outputs) = (dims[0], dims[1]);
        if lf.w.len() != outputs || lf.w.iter().any(|row| row.len() != inputs) {
            return Err(ClassifierError::WeightsShape(format!(
                "layer {i} weight matrix is not {outputs}x{inputs}"
            )));
        }
        if lf.b.len() != outputs {
            return Err(ClassifierError::WeightsShape(format!(
                "layer {i} has {} biases, expected {outputs}",
                lf.b.len()
            )));
        }
        let weights = lf.w.into_iter().flatten().collect();
        layers.push(Layer::from_parts(inputs, outputs, weights, lf.b)?);
    }
    Network::from_layers(arch, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn file_layout() {
        let arch = NetworkArch::sigmoid(&[2, 1, 1]).unwrap();
        let l0 = Layer::from_parts(2, 1, vec![0.25, -1.5], vec![0.5]).unwrap();
        let l1 = Layer::from_parts(1, 1, vec![3.0], vec![-0.125]).unwrap();
        let net = Network::from_layers(arch, vec![l0, l1]).unwrap();
        assert_eq!(
            String::from_utf8(save_weights(&net)).unwrap(),
            r#"{"arch":[2,1,1],"activation":"sigmoid","layers":[{"w":[[0.25,-1.5]],"b":[0.5]},{"w":[[3.0]],"b":[-0.125]}]}"#
        );
    }

    #[test]
    fn truncated_file_fails() {
        let bytes = save_weights(&Network::init(NetworkArch::sigmoid(&[3, 2, 2]).unwrap(), 1));
        assert!(matches!(
            load_weights(&bytes[..bytes.len() / 2]),
            Err(ClassifierError::Weights(_))
        ));
    }

    #[test]
    fn arch_mismatch_fails() {
        let bad =
            br#"{"arch":[2,1,1],"activation":"sigmoid","layers":[{"w":[[1.0]],"b":[0.0]},{"w":[[1.0]],"b":[0.0]}]}"#;
        assert!(matches!(load_weights(bad), Err(ClassifierError::WeightsShape(_))));
        let missing_layer = br#"{"arch":[1,1,1],"activation":"sigmoid","layers":[{"w":[[1.0]],"b":[0.0]}]}"#;
        assert!(matches!(
            load_weights(missing_layer),
            Err(ClassifierError::WeightsShape(_))
        ));
        let relu = br#"{"arch":[1,1,1],"activation":"relu","layers":[]}"#;
        assert!(matches!(
            load_weights(relu),
            Err(ClassifierError::UnsupportedActivation(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            seed in any::<u64>(),
            params in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 17),
        ) {
            // 3-2-3 net has 6 + 2 + 6 + 3 = 17 parameters.
            let mut net = Network::init(NetworkArch::sigmoid(&[3, 2, 3]).unwrap(), seed);
            for (i, p) in params.iter().enumerate() {
                *net.parameter_mut(i) = *p;
            }
            let loaded = load_weights(&save_weights(&net)).unwrap();
            let bits = |n: &Network| n.flatten_parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&loaded), bits(&net));
            prop_assert_eq!(loaded.arch(), net.arch());
        }
    }
}
