//! Small dense networks with hand-written backpropagation.
//!
//! The policy and critic are two-hidden-layer tanh perceptrons in f64. The
//! backward pass is exact, which lets the test suite validate every gradient
//! against central finite differences, and Adam is implemented directly so
//! training is bit-reproducible from a seed.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Fully connected network: tanh on hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// Layer widths, input first.
    pub dims: Vec<usize>,
    /// `weights[l]` has shape (dims[l+1], dims[l]).
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Gradients in the same layout as [`Mlp`].
#[derive(Debug, Clone)]
pub struct MlpGrad {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpGrad {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Cached activations from a batched forward pass: `layers[0]` is the input,
/// `layers[last]` the linear output.
pub struct ForwardCache {
    pub layers: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.layers.last().expect("forward cache is never empty")
    }
}

/// Orthonormalize the rows (or columns, whichever is shorter) of a Gaussian
/// matrix by Gram-Schmidt and scale by `gain`.
fn orthogonal_init(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let transpose = rows < cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    // n >= m: orthonormalize m columns of an n x m Gaussian matrix.
    let mut a = Array2::from_shape_fn((n, m), |_| rng.sample::<f64, _>(StandardNormal));
    for j in 0..m {
        for k in 0..j {
            let proj = a.column(j).dot(&a.column(k));
            let col_k = a.column(k).to_owned();
            a.column_mut(j).zip_mut_with(&col_k, |x, &y| *x -= proj * y);
        }
        let norm = a.column(j).dot(&a.column(j)).sqrt().max(1e-12);
        a.column_mut(j).mapv_inplace(|x| x / norm);
    }
    let q = if transpose {
        // Keep standard (row-major) layout so flat parameter views work.
        a.t().as_standard_layout().to_owned()
    } else {
        a
    };
    q * gain
}

impl Mlp {
    /// Orthogonally initialized network. Hidden layers use gain sqrt(2);
    /// the output layer uses `head_gain`.
    pub fn init(dims: &[usize], head_gain: f64, rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "network needs at least one layer");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..dims.len() - 1 {
            let gain = if l == dims.len() - 2 { head_gain } else { std::f64::consts::SQRT_2 };
            weights.push(orthogonal_init(dims[l + 1], dims[l], gain, rng));
            biases.push(Array1::zeros(dims[l + 1]));
        }
        Self {
            dims: dims.to_vec(),
            weights,
            biases,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Batched forward pass; rows of `x` are samples.
    pub fn forward(&self, x: &Array2<f64>) -> ForwardCache {
        let mut layers = Vec::with_capacity(self.n_layers() + 1);
        layers.push(x.clone());
        for l in 0..self.n_layers() {
            let z = layers[l].dot(&self.weights[l].t()) + &self.biases[l];
            let a = if l + 1 < self.n_layers() { z.mapv(f64::tanh) } else { z };
            layers.push(a);
        }
        ForwardCache { layers }
    }

    /// Single-sample forward pass without caching, for rollout hot loops.
    pub fn forward_one(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dims[0]);
        let mut a: Vec<f64> = x.to_vec();
        for l in 0..self.n_layers() {
            let w = &self.weights[l];
            let mut next = vec![0.0; self.dims[l + 1]];
            for (j, out) in next.iter_mut().enumerate() {
                let row = w.row(j);
                let mut acc = self.biases[l][j];
                for (wi, ai) in row.iter().zip(a.iter()) {
                    acc += wi * ai;
                }
                *out = if l + 1 < self.n_layers() { acc.tanh() } else { acc };
            }
            a = next;
        }
        a
    }

    /// Backpropagate `grad_out` (d loss / d output, same shape as the output)
    /// through the cached forward pass.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Array2<f64>) -> MlpGrad {
        let mut grad = MlpGrad::zeros_like(self);
        let mut delta = grad_out.clone();
        for l in (0..self.n_layers()).rev() {
            grad.weights[l] = delta.t().dot(&cache.layers[l]);
            grad.biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let upstream = delta.dot(&self.weights[l]);
                // d tanh(z) = 1 - tanh(z)^2, with tanh(z) cached as the activation.
                delta = upstream * &cache.layers[l].mapv(|a| 1.0 - a * a);
            }
        }
        grad
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Flat read access to parameters, weight-then-bias per layer.
    pub fn get_param(&self, mut idx: usize) -> f64 {
        for l in 0..self.n_layers() {
            if idx < self.weights[l].len() {
                return *self.weights[l].as_slice().unwrap().get(idx).unwrap();
            }
            idx -= self.weights[l].len();
            if idx < self.biases[l].len() {
                return self.biases[l][idx];
            }
            idx -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    /// Flat write access to parameters, mirroring [`Mlp::get_param`].
    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for l in 0..self.n_layers() {
            if idx < self.weights[l].len() {
                self.weights[l].as_slice_mut().unwrap()[idx] = value;
                return;
            }
            idx -= self.weights[l].len();
            if idx < self.biases[l].len() {
                self.biases[l][idx] = value;
                return;
            }
            idx -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    /// Flatten a gradient into the same order as the flat parameter indexing.
    pub fn flat_grad(grad: &MlpGrad) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..grad.weights.len() {
            out.extend_from_slice(grad.weights[l].as_slice().unwrap());
            out.extend(grad.biases[l].iter());
        }
        out
    }
}

/// Adam optimizer state for one tensor stored as a flat slice.
#[derive(Debug, Clone)]
struct AdamSlot {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Adam with bias correction; one slot per registered tensor.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    slots: Vec<AdamSlot>,
}

impl Adam {
    pub fn new(learning_rate: f64, tensor_sizes: &[usize]) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            slots: tensor_sizes
                .iter()
                .map(|&n| AdamSlot {
                    m: vec![0.0; n],
                    v: vec![0.0; n],
                })
                .collect(),
        }
    }

    /// Advance the shared step counter; call once per optimizer step before
    /// updating the tensors.
    pub fn begin_step(&mut self) {
        self.t += 1;
    }

    /// Apply one Adam update to `params` using `grad` (gradient of the loss
    /// to minimize).
    pub fn update(&mut self, slot: usize, params: &mut [f64], grad: &[f64]) {
        let s = &mut self.slots[slot];
        debug_assert_eq!(params.len(), s.m.len());
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            s.m[i] = self.beta1 * s.m[i] + (1.0 - self.beta1) * grad[i];
            s.v[i] = self.beta2 * s.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = s.m[i] / bc1;
            let v_hat = s.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
