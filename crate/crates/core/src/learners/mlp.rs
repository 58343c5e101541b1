//! Fully connected network: equal-width ReLU hidden layers, one sigmoid output,
//! cross-entropy loss, trained with Adam on mini-batches.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::hyperparams::MlpParams;
use super::logistic::sigmoid;
use crate::error::Result;
use crate::seed;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// Layer widths from input to the single output unit.
    pub sizes: Vec<usize>,
    /// Per layer: weights (row-major, out × in) followed by biases.
    pub params: Vec<f64>,
}

impl Mlp {
    /// He-initialised network; biases start at zero.
    pub fn init(n_features: usize, params: &MlpParams, seed: u64) -> Self {
        let mut sizes = vec![n_features];
        sizes.extend(std::iter::repeat_n(
            params.neurons_per_layer,
            params.n_hidden_layers,
        ));
        sizes.push(1);
        let mut rng = seed::stream(seed);
        let mut p = Vec::new();
        for w in sizes.windows(2) {
            let normal = Normal::new(0.0, (2.0 / w[0] as f64).sqrt()).expect("positive width");
            p.extend((0..w[0] * w[1]).map(|_| normal.sample(&mut rng)));
            p.extend(std::iter::repeat_n(0.0, w[1]));
        }
        Mlp { sizes, params: p }
    }

    pub fn fit(params: &MlpParams, data: &Dataset, seed: u64) -> Result<Self> {
        data.require_both_classes()?;
        let mut net = Mlp::init(data.n_features(), params, seed);
        let mut rng = seed::derived_stream(seed, &[1]);
        let n = data.n_rows();
        let targets = data.targets();
        let mut order: Vec<usize> = (0..n).collect();
        let mut grad = vec![0.0; net.params.len()];
        let mut m = vec![0.0; net.params.len()];
        let mut v = vec![0.0; net.params.len()];
        let mut step = 0i32;
        let mut scratch = Scratch::new(&net.sizes);
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(params.batch_size) {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let rows = batch.iter().map(|&i| (data.x().row(i), targets[i]));
                net.accumulate(rows, batch.len(), params.l2, &mut grad, &mut scratch);
                step += 1;
                let c1 = 1.0 - BETA1.powi(step);
                let c2 = 1.0 - BETA2.powi(step);
                for (((w, g), m), v) in net.params.iter_mut().zip(&grad).zip(&mut m).zip(&mut v) {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *w -= params.learning_rate * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                }
            }
        }
        Ok(net)
    }

    /// Mean cross-entropy plus `l2 / (2n) ‖W‖²` over `data`, and its gradient
    /// with respect to [`Mlp::params`].
    pub fn loss_and_gradient(&self, data: &Dataset, l2: f64) -> (f64, Vec<f64>) {
        let targets = data.targets();
        let mut grad = vec![0.0; self.params.len()];
        let mut scratch = Scratch::new(&self.sizes);
        let rows = data.x().iter_rows().zip(targets.iter().copied());
        let loss = self.accumulate(rows, data.n_rows(), l2, &mut grad, &mut scratch);
        (loss, grad)
    }

    fn accumulate<'a>(
        &self,
        rows: impl Iterator<Item = (&'a [f64], f64)>,
        n: usize,
        l2: f64,
        grad: &mut [f64],
        s: &mut Scratch,
    ) -> f64 {
        let inv_n = 1.0 / n as f64;
        let layers = self.sizes.len() - 1;
        let mut loss = 0.0;
        for (x, t) in rows {
            let z = self.forward(x, s);
            loss += softplus(z) - t * z;
            // Backward pass; `delta` holds dL/d(pre-activation) of layer l+1.
            s.delta[layers - 1].clear();
            s.delta[layers - 1].push((sigmoid(z) - t) * inv_n);
            let mut offset = self.params.len();
            for l in (0..layers).rev() {
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                offset -= n_in * n_out + n_out;
                let input: &[f64] = if l == 0 { x } else { &s.act[l - 1] };
                let (w, b) = grad[offset..offset + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                for (k, &dk) in s.delta[l].iter().enumerate() {
                    b[k] += dk;
                    for (g, a) in w[k * n_in..(k + 1) * n_in].iter_mut().zip(input) {
                        *g += dk * a;
                    }
                }
                if l > 0 {
                    let weights = &self.params[offset..offset + n_in * n_out];
                    let (lower, upper) = s.delta.split_at_mut(l);
                    let prev = &mut lower[l - 1];
                    prev.clear();
                    prev.resize(n_in, 0.0);
                    for (k, &dk) in upper[0].iter().enumerate() {
                        for (p, wkj) in prev.iter_mut().zip(&weights[k * n_in..(k + 1) * n_in]) {
                            *p += wkj * dk;
                        }
                    }
                    for (p, a) in prev.iter_mut().zip(&s.act[l - 1]) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                }
            }
        }
        loss *= inv_n;
        if l2 > 0.0 {
            let mut offset = 0;
            for w in self.sizes.windows(2) {
                let nw = w[0] * w[1];
                for (g, p) in grad[offset..offset + nw]
                    .iter_mut()
                    .zip(&self.params[offset..offset + nw])
                {
                    loss += 0.5 * l2 * inv_n * p * p;
                    *g += l2 * inv_n * p;
                }
                offset += nw + w[1];
            }
        }
        loss
    }

    /// Output logit; hidden activations are left in `s.act`.
    fn forward(&self, x: &[f64], s: &mut Scratch) -> f64 {
        let layers = self.sizes.len() - 1;
        let mut offset = 0;
        let mut z = 0.0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let (before, after) = s.act.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &before[l - 1] };
            if l + 1 == layers {
                z = b[0] + crate::linalg::dot(w, input);
            } else {
                let out = &mut after[0];
                out.clear();
                out.extend((0..n_out).map(|k| {
                    let v = b[k] + crate::linalg::dot(&w[k * n_in..(k + 1) * n_in], input);
                    v.max(0.0)
                }));
            }
        }
        z
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut s = Scratch::new(&self.sizes);
        sigmoid(self.forward(x, &mut s))
    }

    pub fn n_features(&self) -> usize {
        self.sizes[0]
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Scratch {
    act: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(sizes: &[usize]) -> Self {
        let layers = sizes.len() - 1;
        Scratch {
            act: (1..sizes.len())
                .map(|l| Vec::with_capacity(sizes[l]))
                .collect(),
            delta: (0..layers)
                .map(|l| Vec::with_capacity(sizes[l + 1]))
                .collect(),
        }
    }
}
