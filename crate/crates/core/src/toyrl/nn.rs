//! Dense networks with manual backpropagation, generic over `f32`/`f64`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Axis, LinalgScalar, ScalarOperand, Zip};
use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

pub trait Scalar:
    LinalgScalar + Float + FromPrimitive + ScalarOperand + std::ops::AddAssign + std::fmt::Debug + Send + Sync
{
}
impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

/// Elementwise `f(param, grad, m, v)`; a flat loop when all four share the
/// standard layout.
fn adam_zip<D: ndarray::Dimension>(
    p: &mut ndarray::Array<f32, D>,
    g: &ndarray::Array<f32, D>,
    m: &mut ndarray::Array<f32, D>,
    v: &mut ndarray::Array<f32, D>,
    f: impl Fn(&mut f32, f32, &mut f32, &mut f32),
) {
    match (p.as_slice_mut(), g.as_slice(), m.as_slice_mut(), v.as_slice_mut()) {
        (Some(p), Some(g), Some(m), Some(v)) => {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m).zip(v) {
                f(p, g, m, v);
            }
        }
        _ => Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| f(p, g, m, v)),
    }
}

fn all_finite<F: Scalar>(values: Option<&[F]>) -> bool {
    values.expect("contiguous parameters").iter().fold(true, |ok, v| ok & v.is_finite())
}

/// Fully connected network; hidden layers use `activation`, the last layer
/// `output`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<F> {
    pub weights: Vec<Array2<F>>,
    pub biases: Vec<Array1<F>>,
    pub activation: Activation,
    pub output: Activation,
}

/// Parameter-shaped gradient buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<F> {
    pub weights: Vec<Array2<F>>,
    pub biases: Vec<Array1<F>>,
}

fn cast<A: Scalar, B: Scalar>(v: A) -> B {
    B::from(v).expect("float cast")
}

impl<F: Scalar> Mlp<F> {
    /// Uniform `±1/sqrt(fan_in)` weights, zero biases; the output layer uses
    /// `±out_scale` when given.
    pub fn init(sizes: &[usize], activation: Activation, output: Activation, out_scale: Option<f64>, g: &mut Rng) -> Self {
        assert!(sizes.len() >= 2, "network needs at least one layer");
        let layers = sizes.len() - 1;
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = match out_scale {
                Some(b) if l + 1 == layers => b,
                _ => 1.0 / (fan_in as f64).sqrt(),
            };
            let w = Array2::from_shape_simple_fn((fan_in, fan_out), || {
                F::from_f64(g.uniform_range(-bound, bound)).expect("float cast")
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Self {
            weights,
            biases,
            activation,
            output,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            activation: self.activation,
            output: self.output,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().expect("non-empty").ncols()
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn cast<G: Scalar>(&self) -> Mlp<G> {
        Mlp {
            weights: self.weights.iter().map(|w| w.mapv(cast)).collect(),
            biases: self.biases.iter().map(|b| b.mapv(cast)).collect(),
            activation: self.activation,
            output: self.output,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| all_finite(w.as_slice_memory_order()))
            && self.biases.iter().all(|b| all_finite(b.as_slice_memory_order()))
    }

    /// Activations of every layer; the first entry is the input, the last the output.
    pub fn forward(&self, x: &Array2<F>) -> Vec<Array2<F>> {
        let layers = self.weights.len();
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.clone());
        for l in 0..layers {
            let mut z = acts[l].dot(&self.weights[l]);
            z += &self.biases[l];
            let act = if l + 1 < layers { self.activation } else { self.output };
            if act == Activation::Tanh {
                z.mapv_inplace(|v| v.tanh());
            }
            acts.push(z);
        }
        acts
    }

    pub fn predict(&self, x: &Array2<F>) -> Array2<F> {
        self.forward(x).pop().expect("non-empty")
    }

    /// Parameter gradients for an upstream gradient on the output, plus the
    /// gradient with respect to input columns `input_cols` when requested.
    pub fn backward(
        &self,
        acts: &[Array2<F>],
        grad_out: Array2<F>,
        input_cols: Option<std::ops::Range<usize>>,
    ) -> (Grads<F>, Option<Array2<F>>) {
        self.backprop(acts, grad_out, true, input_cols)
    }

    /// Gradient with respect to input columns `cols` only.
    pub fn input_grad(&self, acts: &[Array2<F>], grad_out: Array2<F>, cols: std::ops::Range<usize>) -> Array2<F> {
        self.backprop(acts, grad_out, false, Some(cols)).1.expect("requested")
    }

    fn backprop(
        &self,
        acts: &[Array2<F>],
        grad_out: Array2<F>,
        params: bool,
        input_cols: Option<std::ops::Range<usize>>,
    ) -> (Grads<F>, Option<Array2<F>>) {
        let layers = self.weights.len();
        let mut gw = Vec::with_capacity(layers);
        let mut gb = Vec::with_capacity(layers);
        let mut delta = grad_out;
        let mut act = self.output;
        for l in (0..layers).rev() {
            if act == Activation::Tanh {
                delta.zip_mut_with(&acts[l + 1], |d, &a| *d = *d * (F::one() - a * a));
            }
            if params {
                // Written into a row-major buffer so optimizer loops stay flat.
                let mut g = Array2::zeros((acts[l].ncols(), delta.ncols()));
                general_mat_mul(F::one(), &acts[l].t(), &delta, F::zero(), &mut g);
                gw.push(g);
                gb.push(delta.sum_axis(Axis(0)));
            }
            if l > 0 {
                delta = delta.dot(&self.weights[l].t());
                act = self.activation;
            }
        }
        gw.reverse();
        gb.reverse();
        let input = input_cols.map(|cols| delta.dot(&self.weights[0].slice(s![cols, ..]).t()));
        (
            Grads {
                weights: gw,
                biases: gb,
            },
            input,
        )
    }

    /// `self ← self + tau · (online − self)`.
    pub fn soft_update(&mut self, online: &Self, tau: F) {
        for (t, o) in self.weights.iter_mut().zip(&online.weights) {
            Zip::from(t).and(o).for_each(|t, &o| *t = *t + tau * (o - *t));
        }
        for (t, o) in self.biases.iter_mut().zip(&online.biases) {
            Zip::from(t).and(o).for_each(|t, &o| *t = *t + tau * (o - *t));
        }
    }
}

impl<F: Scalar> Grads<F> {
    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| all_finite(w.as_slice_memory_order()))
            && self.biases.iter().all(|b| all_finite(b.as_slice_memory_order()))
    }
}

/// Adam with bias correction. Moment buffers are created lazily and are not
/// serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub steps: u64,
    #[serde(skip)]
    moments: Option<(Grads<f32>, Grads<f32>)>,
}

impl Default for Adam {
    fn default() -> Self {
        Self::new(1e-4)
    }
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            steps: 0,
            moments: None,
        }
    }

    pub fn step(&mut self, net: &mut Mlp<f32>, grads: &Grads<f32>) {
        let (m, v) = self.moments.get_or_insert_with(|| {
            let z = net.zeros_like();
            let g = Grads {
                weights: z.weights,
                biases: z.biases,
            };
            (g.clone(), g)
        });
        self.steps += 1;
        let t = self.steps as i32;
        let step = (self.lr * (1.0 - self.beta2.powi(t)).sqrt() / (1.0 - self.beta1.powi(t))) as f32;
        let (b1, b2, eps) = (self.beta1 as f32, self.beta2 as f32, self.eps as f32);
        let update = |p: &mut f32, g: f32, m: &mut f32, v: &mut f32| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= step * *m / (v.sqrt() + eps);
        };
        for l in 0..net.weights.len() {
            adam_zip(&mut net.weights[l], &grads.weights[l], &mut m.weights[l], &mut v.weights[l], update);
            adam_zip(&mut net.biases[l], &grads.biases[l], &mut m.biases[l], &mut v.biases[l], update);
        }
    }
}
