//! Batched multilayer perceptron over a flat parameter slice.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(x),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Fully connected network with a linear output layer. Weights of layer `k`
/// are stored row-major `[out][in]`, followed by its biases, starting at
/// `offset` in the shared parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub activation: Activation,
    pub offset: usize,
}

/// Layer outputs kept for the backward pass; `layers[0]` is the input.
#[derive(Clone, Debug, Default)]
pub struct MlpCache {
    pub batch: usize,
    pub layers: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.layers.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

impl Mlp {
    pub fn new(sizes: Vec<usize>, activation: Activation, offset: usize) -> Self {
        assert!(sizes.len() >= 2);
        Mlp { sizes, activation, offset }
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn layer_offsets(&self) -> Vec<(usize, usize)> {
        let mut off = self.offset;
        self.sizes
            .windows(2)
            .map(|w| {
                let weights = off;
                off += w[0] * w[1];
                let bias = off;
                off += w[1];
                (weights, bias)
            })
            .collect()
    }

    pub fn forward(&self, params: &[f64], x: &[f64], batch: usize) -> MlpCache {
        debug_assert_eq!(x.len(), batch * self.input_dim());
        let nl = self.sizes.len() - 1;
        let mut layers = Vec::with_capacity(nl + 1);
        layers.push(x.to_vec());
        for (k, (wo, bo)) in self.layer_offsets().into_iter().enumerate() {
            let (n_in, n_out) = (self.sizes[k], self.sizes[k + 1]);
            let w = &params[wo..wo + n_in * n_out];
            let b = &params[bo..bo + n_out];
            let input = &layers[k];
            let mut out = vec![0.0; batch * n_out];
            let hidden = k + 1 < nl;
            for s in 0..batch {
                let xi = &input[s * n_in..(s + 1) * n_in];
                let yo = &mut out[s * n_out..(s + 1) * n_out];
                for j in 0..n_out {
                    let row = &w[j * n_in..(j + 1) * n_in];
                    let z = b[j] + row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
                    yo[j] = if hidden { self.activation.apply(z) } else { z };
                }
            }
            layers.push(out);
        }
        MlpCache { batch, layers }
    }

    /// Accumulates parameter gradients for upstream gradient `dout` on the
    /// output and returns the gradient with respect to the input.
    pub fn backward(&self, params: &[f64], cache: &MlpCache, dout: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let batch = cache.batch;
        let nl = self.sizes.len() - 1;
        let offsets = self.layer_offsets();
        let mut delta = dout.to_vec();
        for k in (0..nl).rev() {
            let (n_in, n_out) = (self.sizes[k], self.sizes[k + 1]);
            let (wo, bo) = offsets[k];
            if k + 1 < nl {
                let y = &cache.layers[k + 1];
                for (d, &yv) in delta.iter_mut().zip(y) {
                    *d *= self.activation.grad_from_output(yv);
                }
            }
            let input = &cache.layers[k];
            let w = &params[wo..wo + n_in * n_out];
            let mut dx = vec![0.0; batch * n_in];
            for s in 0..batch {
                let xi = &input[s * n_in..(s + 1) * n_in];
                let ds = &delta[s * n_out..(s + 1) * n_out];
                let dxi = &mut dx[s * n_in..(s + 1) * n_in];
                for j in 0..n_out {
                    let g = ds[j];
                    if g == 0.0 {
                        continue;
                    }
                    grads[bo + j] += g;
                    let gw = &mut grads[wo + j * n_in..wo + (j + 1) * n_in];
                    for (gwi, &xv) in gw.iter_mut().zip(xi) {
                        *gwi += g * xv;
                    }
                    let row = &w[j * n_in..(j + 1) * n_in];
                    for (d, &wv) in dxi.iter_mut().zip(row) {
                        *d += g * wv;
                    }
                }
            }
            delta = dx;
        }
        delta
    }

    /// Orthogonal initialization: each weight matrix gets orthonormal rows or
    /// columns scaled by its gain; biases start at zero.
    pub fn init_orthogonal<R: Rng>(&self, params: &mut [f64], gains: &[f64], rng: &mut R) {
        for (k, (wo, bo)) in self.layer_offsets().into_iter().enumerate() {
            let (n_in, n_out) = (self.sizes[k], self.sizes[k + 1]);
            let m = orthogonal(n_out, n_in, gains[k], rng);
            params[wo..wo + n_in * n_out].copy_from_slice(&m);
            params[bo..bo + n_out].iter_mut().for_each(|b| *b = 0.0);
        }
    }
}

/// `rows x cols` row-major matrix with orthonormal rows (if rows <= cols) or
/// columns, times `gain`. Modified Gram-Schmidt on Gaussian samples.
pub fn orthogonal<R: Rng>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    let (n, len) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
    while vecs.len() < n {
        let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        for u in &vecs {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            vecs.push(v);
        }
    }
    let mut m = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            m[i * cols + j] = gain * if rows <= cols { vecs[i][j] } else { vecs[j][i] };
        }
    }
    m
}
