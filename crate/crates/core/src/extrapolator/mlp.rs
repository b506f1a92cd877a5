use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::TrainingDataset;
use crate::error::{Error, Result};

/// Scalar input, two ReLU hidden layers of 512 and 1024 units, linear output.
/// One row of values per batch sample.
type LayerBatch = Vec<Vec<f64>>;

pub const DEFAULT_LAYER_SIZES: [usize; 4] = [1, 512, 1024, 1];

/// Fully connected ReLU network. `weights[l]` is a row-major
/// `layer_sizes[l+1] x layer_sizes[l]` matrix; the last layer is linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpParameters {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Same shapes as [`MlpParameters`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &MlpParameters) -> Self {
        Self {
            weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

fn check_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::invalid(
            "network needs at least an input and an output layer",
        ));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::invalid(format!(
            "layer sizes must be positive: {layer_sizes:?}"
        )));
    }
    Ok(())
}

impl MlpParameters {
    /// Builds parameters from explicit arrays, checking every shape.
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_sizes(&layer_sizes)?;
        let layers = layer_sizes.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::invalid(format!(
                "expected {layers} weight and bias arrays, got {} and {}",
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..layers {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            if weights[l].len() != fan_in * fan_out {
                return Err(Error::DimensionMismatch {
                    expected: fan_in * fan_out,
                    actual: weights[l].len(),
                });
            }
            if biases[l].len() != fan_out {
                return Err(Error::DimensionMismatch {
                    expected: fan_out,
                    actual: biases[l].len(),
                });
            }
        }
        let p = Self {
            layer_sizes,
            weights,
            biases,
        };
        if !p.is_finite() {
            return Err(Error::Numeric("non-finite network parameter".into()));
        }
        Ok(p)
    }

    /// All-zero network.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        check_sizes(layer_sizes)?;
        let pairs = layer_sizes.windows(2);
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights: pairs.clone().map(|w| vec![0.0; w[0] * w[1]]).collect(),
            biases: pairs.map(|w| vec![0.0; w[1]]).collect(),
        })
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .all(|x| x.is_finite())
    }

    fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    /// Forward pass over a batch of input vectors. Returns the activations of
    /// every layer (input first) and the pre-activations of every layer after
    /// the input.
    fn forward_trace(&self, inputs: Vec<Vec<f64>>) -> (Vec<LayerBatch>, Vec<LayerBatch>) {
        let batch = inputs.len();
        let mut acts = vec![inputs];
        let mut pre = Vec::with_capacity(self.n_layers());
        for l in 0..self.n_layers() {
            let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let w = &self.weights[l];
            let b = &self.biases[l];
            let prev = &acts[l];
            let mut z = vec![vec![0.0; fan_out]; batch];
            for i in 0..fan_out {
                let row = &w[i * fan_in..(i + 1) * fan_in];
                for (zs, a) in z.iter_mut().zip(prev) {
                    zs[i] = dot(row, a) + b[i];
                }
            }
            let a = if l + 1 == self.n_layers() {
                z.clone()
            } else {
                z.iter()
                    .map(|zs| zs.iter().map(|&x| x.max(0.0)).collect())
                    .collect()
            };
            pre.push(z);
            acts.push(a);
        }
        (acts, pre)
    }

    /// Output vector for one input vector.
    pub fn forward_vec(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: input.len(),
            });
        }
        let (mut acts, _) = self.forward_trace(vec![input.to_vec()]);
        let out = acts.pop().and_then(|mut a| a.pop()).expect("one sample");
        if out.iter().any(|y| !y.is_finite()) {
            return Err(Error::Numeric("network output is not finite".into()));
        }
        Ok(out)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
pub fn init_mlp(layer_sizes: &[usize], seed: u64) -> Result<MlpParameters> {
    let mut params = MlpParameters::zeros(layer_sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (l, w) in params.weights.iter_mut().enumerate() {
        let limit = (6.0 / (layer_sizes[l] + layer_sizes[l + 1]) as f64).sqrt();
        for x in w.iter_mut() {
            *x = rng.random_range(-limit..=limit);
        }
    }
    Ok(params)
}

/// Scalar-in, scalar-out evaluation `W3·relu(W2·relu(W1·x + b1) + b2) + b3`
/// (for the default depth).
pub fn forward(params: &MlpParameters, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("network input {x} is not finite")));
    }
    check_scalar_io(params)?;
    Ok(params.forward_vec(&[x])?[0])
}

/// Network output at zero noise.
pub fn predict_zero_noise(params: &MlpParameters) -> Result<f64> {
    forward(params, 0.0)
}

fn check_scalar_io(params: &MlpParameters) -> Result<()> {
    if params.input_dim() != 1 || params.output_dim() != 1 {
        return Err(Error::invalid(format!(
            "expected a scalar-in scalar-out network, got {:?}",
            params.layer_sizes
        )));
    }
    Ok(())
}

/// `(1/N) Σ (y - ŷ)^2`.
pub fn mse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::invalid("mse of an empty batch"));
    }
    Ok(predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (a - p).powi(2))
        .sum::<f64>()
        / predicted.len() as f64)
}

/// Batch MSE and its exact gradient with respect to every parameter. The
/// ReLU derivative at 0 is taken as 0.
pub fn backward(params: &MlpParameters, batch: &[(f64, f64)]) -> Result<(f64, Gradients)> {
    check_scalar_io(params)?;
    if batch.is_empty() {
        return Err(Error::invalid("gradient of an empty batch"));
    }
    let n = batch.len() as f64;
    let (acts, pre) = params.forward_trace(batch.iter().map(|&(x, _)| vec![x]).collect());
    let outputs: Vec<f64> = acts
        .last()
        .expect("output layer")
        .iter()
        .map(|a| a[0])
        .collect();
    let targets: Vec<f64> = batch.iter().map(|&(_, y)| y).collect();
    let loss = mse(&outputs, &targets)?;

    let mut grads = Gradients::zeros_like(params);
    let mut delta: Vec<Vec<f64>> = outputs
        .iter()
        .zip(&targets)
        .map(|(yhat, y)| vec![2.0 * (yhat - y) / n])
        .collect();

    for l in (0..params.n_layers()).rev() {
        let (fan_in, fan_out) = (params.layer_sizes[l], params.layer_sizes[l + 1]);
        let w = &params.weights[l];
        let gw = &mut grads.weights[l];
        let gb = &mut grads.biases[l];
        let need_prev = l > 0;
        let mut prev_delta = vec![vec![0.0; fan_in]; if need_prev { delta.len() } else { 0 }];
        for i in 0..fan_out {
            let row = &w[i * fan_in..(i + 1) * fan_in];
            let grow = &mut gw[i * fan_in..(i + 1) * fan_in];
            for (s, d) in delta.iter().enumerate() {
                let d = d[i];
                if d == 0.0 {
                    continue;
                }
                gb[i] += d;
                axpy(d, &acts[l][s], grow);
                if need_prev {
                    axpy(d, row, &mut prev_delta[s]);
                }
            }
        }
        if need_prev {
            for (pd, z) in prev_delta.iter_mut().zip(&pre[l - 1]) {
                for (g, &zj) in pd.iter_mut().zip(z) {
                    if zj <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = prev_delta;
        }
    }
    Ok((loss, grads))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            epochs: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetrics {
    /// Full-batch loss at the start of each epoch, before its update.
    pub losses: Vec<f64>,
    /// Loss after the last update.
    pub final_loss: f64,
    pub epochs: usize,
}

/// Full-batch Adam: one gradient step per epoch over the whole dataset.
pub fn train(
    dataset: &TrainingDataset,
    params: MlpParameters,
    config: &TrainConfig,
) -> Result<(MlpParameters, TrainingMetrics)> {
    config.adam.validate()?;
    let batch = dataset.pairs();
    let mut params = params;
    let mut state = AdamState::new(&params);
    let mut losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, grads) = backward(&params, &batch)?;
        if !loss.is_finite() {
            return Err(Error::Training { epoch, loss });
        }
        losses.push(loss);
        adam_step(&mut params, &grads, &mut state, &config.adam)?;
        if !params.is_finite() {
            return Err(Error::Training {
                epoch,
                loss: f64::NAN,
            });
        }
    }
    let predicted = batch
        .iter()
        .map(|&(x, _)| forward(&params, x))
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<f64> = batch.iter().map(|&(_, y)| y).collect();
    let final_loss = mse(&predicted, &targets)?;
    if !final_loss.is_finite() {
        return Err(Error::Training {
            epoch: config.epochs,
            loss: final_loss,
        });
    }
    Ok((
        params,
        TrainingMetrics {
            losses,
            final_loss,
            epochs: config.epochs,
        },
    ))
}
