//! Small fully connected network with tanh hidden layers, trained by Adam.
//!
//! The same network serves as a softmax classifier and as a scalar
//! regressor (linear output, squared error).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MlpOutput {
    Softmax,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Dense {
    /// out x in
    w: Array2<f64>,
    b: Array1<f64>,
}

/// Gradient of one layer: weights, bias.
type LayerGrad = (Array2<f64>, Array1<f64>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
    output: MlpOutput,
}

#[derive(Clone, Copy, Debug)]
pub enum MlpTarget<'a> {
    Classes(&'a [usize]),
    Values(&'a [f64]),
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct MlpTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
}

impl Mlp {
    /// Xavier-uniform initialization.
    pub fn new(inputs: usize, hidden: &[usize], outputs: usize, output: MlpOutput, rng: &mut ChaCha8Rng) -> Mlp {
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        let layers = sizes
            .windows(2)
            .map(|io| {
                let (fan_in, fan_out) = (io[0], io[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-limit..limit));
                Dense {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        Mlp { layers, output }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.w.nrows()).unwrap_or(0)
    }

    /// Activations of every layer for a batch; the last entry is the raw
    /// output (logits or values).
    fn forward(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts = vec![x.to_owned()];
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = acts[i].dot(&layer.w.t()) + &layer.b;
            if i < last {
                z.mapv_inplace(f64::tanh);
            }
            acts.push(z);
        }
        acts
    }

    /// Class probabilities (softmax) or the regression output vector.
    pub fn output(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let batch = x.insert_axis(Axis(0));
        let raw = self.forward(batch).pop().expect("network has layers");
        let raw = raw.row(0).to_owned();
        match self.output {
            MlpOutput::Linear => raw,
            MlpOutput::Softmax => softmax(raw.view()),
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flattened parameters, layer by layer, weights (row-major) then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            p.extend(l.w.iter());
            p.extend(l.b.iter());
        }
        p
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.num_params(), "parameter count mismatch");
        let mut it = params.iter();
        for l in &mut self.layers {
            l.w.iter_mut().for_each(|v| *v = *it.next().unwrap());
            l.b.iter_mut().for_each(|v| *v = *it.next().unwrap());
        }
    }

    /// Weighted mean loss plus `l2 / 2 * sum(W^2)` over weight matrices, and
    /// its gradient in [`Mlp::params`] order.
    pub fn loss_and_gradient(
        &self,
        x: ArrayView2<f64>,
        target: MlpTarget<'_>,
        weights: &[f64],
        l2: f64,
    ) -> (f64, Vec<f64>) {
        let (loss, grads) = self.backprop(x, target, weights, l2);
        let mut flat = Vec::with_capacity(self.num_params());
        for (gw, gb) in grads {
            flat.extend(gw.iter());
            flat.extend(gb.iter());
        }
        (loss, flat)
    }

    fn backprop(&self, x: ArrayView2<f64>, target: MlpTarget<'_>, weights: &[f64], l2: f64) -> (f64, Vec<LayerGrad>) {
        let acts = self.forward(x);
        let n = x.nrows();
        let total_w: f64 = weights.iter().sum();
        let raw = acts.last().unwrap();
        let mut delta = Array2::zeros(raw.raw_dim());
        let mut loss = 0.0;
        for i in 0..n {
            let s = weights[i] / total_w;
            match (self.output, target) {
                (MlpOutput::Softmax, MlpTarget::Classes(y)) => {
                    let p = softmax(raw.row(i));
                    loss -= s * p[y[i]].max(1e-300).ln();
                    for c in 0..p.len() {
                        let indicator = if c == y[i] { 1.0 } else { 0.0 };
                        delta[[i, c]] = s * (p[c] - indicator);
                    }
                }
                (MlpOutput::Linear, MlpTarget::Values(v)) => {
                    let r = raw[[i, 0]] - v[i];
                    loss += s * 0.5 * r * r;
                    delta[[i, 0]] = s * r;
                }
                _ => panic!("target kind does not match network output"),
            }
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &acts[li];
            let gw = delta.t().dot(input) + &(&layer.w * l2);
            let gb = delta.sum_axis(Axis(0));
            loss += 0.5 * l2 * layer.w.iter().map(|w| w * w).sum::<f64>();
            if li > 0 {
                let mut back = delta.dot(&layer.w);
                // tanh'(z) = 1 - tanh(z)^2, and acts[li] holds tanh(z)
                back.zip_mut_with(input, |d, a| *d *= 1.0 - a * a);
                delta = back;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        (loss, grads)
    }

    pub(crate) fn train(
        &mut self,
        x: ArrayView2<f64>,
        target: MlpTarget<'_>,
        weights: &[f64],
        config: &MlpTrainConfig,
        rng: &mut ChaCha8Rng,
    ) {
        let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
        let mut m: Vec<(Array2<f64>, Array1<f64>)> = self
            .layers
            .iter()
            .map(|l| (Array2::zeros(l.w.raw_dim()), Array1::zeros(l.b.len())))
            .collect();
        let mut v = m.clone();
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        let batch = config.batch_size.max(1);
        let mut step = 0i32;
        let mut batch_y_cls = Vec::with_capacity(batch);
        let mut batch_y_val = Vec::with_capacity(batch);
        let mut batch_w = Vec::with_capacity(batch);
        for _ in 0..config.epochs {
            order.shuffle(rng);
            for chunk in order.chunks(batch) {
                let xb = x.select(Axis(0), chunk);
                batch_w.clear();
                batch_w.extend(chunk.iter().map(|&i| weights[i]));
                let tb = match target {
                    MlpTarget::Classes(y) => {
                        batch_y_cls.clear();
                        batch_y_cls.extend(chunk.iter().map(|&i| y[i]));
                        MlpTarget::Classes(&batch_y_cls)
                    }
                    MlpTarget::Values(y) => {
                        batch_y_val.clear();
                        batch_y_val.extend(chunk.iter().map(|&i| y[i]));
                        MlpTarget::Values(&batch_y_val)
                    }
                };
                let (_, grads) = self.backprop(xb.view(), tb, &batch_w, config.l2);
                step += 1;
                let c1 = 1.0 - beta1.powi(step);
                let c2 = 1.0 - beta2.powi(step);
                let lr = config.learning_rate;
                for ((layer, (gw, gb)), ((mw, mb), (vw, vb))) in
                    self.layers.iter_mut().zip(grads).zip(m.iter_mut().zip(v.iter_mut()))
                {
                    adam(&mut layer.w, &gw, mw, vw, lr, beta1, beta2, eps, c1, c2);
                    adam(&mut layer.b, &gb, mb, vb, lr, beta1, beta2, eps, c1, c2);
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn adam<D: ndarray::Dimension>(
    param: &mut ndarray::Array<f64, D>,
    grad: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    c1: f64,
    c2: f64,
) {
    ndarray::Zip::from(param)
        .and(grad)
        .and(m)
        .and(v)
        .for_each(|p, &g, m, v| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        });
}

pub(crate) fn softmax(z: ArrayView1<f64>) -> Array1<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.mapv(|v| (v - max).exp());
    let total = e.sum();
    e / total
}
