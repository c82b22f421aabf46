//! Fully connected network with ReLU hidden activations and an affine output.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::Uniform;
use serde::{Deserialize, Serialize};

use crate::error::{dimension, Error, Result};

/// Number of affine layers.
pub const LAYERS: usize = 5;

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `out x in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { weight: Array2::zeros((outputs, inputs)), bias: Array1::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    /// Checks that layer dimensions chain and every entry is finite.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(dimension("network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.outputs() {
                return Err(dimension(format!("layer {i}: bias {} vs {} outputs", l.bias.len(), l.outputs())));
            }
            if i > 0 && layers[i - 1].outputs() != l.inputs() {
                return Err(dimension(format!("layer {i} expects {} inputs, previous gives {}", l.inputs(), layers[i - 1].outputs())));
            }
        }
        let p = Self { layers };
        if !p.is_finite() {
            return Err(Error::Numerical("non-finite parameter".into()));
        }
        Ok(p)
    }

    /// Uniform `±√(1/fan_in)` initialisation. `widths` lists every layer
    /// boundary, input first.
    pub fn init<R: Rng>(widths: &[usize], rng: &mut R) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(dimension(format!("invalid widths {widths:?}")));
        }
        let layers = widths
            .windows(2)
            .map(|w| {
                let bound = (1.0 / w[0] as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
                Layer {
                    weight: Array2::from_shape_simple_fn((w[1], w[0]), || rng.sample(dist)),
                    bias: Array1::from_shape_simple_fn(w[1], || rng.sample(dist)),
                }
            })
            .collect();
        Self::from_layers(layers)
    }

    /// The default shape: five layers, all of width `2P`.
    pub fn init_default<R: Rng>(width: usize, rng: &mut R) -> Result<Self> {
        Self::init(&[width; LAYERS + 1], rng)
    }

    pub fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(|l| Layer::zeros(l.inputs(), l.outputs())).collect() }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_width()).chain(self.layers.iter().map(Layer::outputs)).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    /// All parameters in layer order, weights (row-major) before biases.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn flat_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weight.iter_mut().chain(l.bias.iter_mut()))
    }

    fn check_input(&self, width: usize) -> Result<()> {
        if width != self.input_width() {
            return Err(dimension(format!("input width {width}, network expects {}", self.input_width())));
        }
        Ok(())
    }
}

/// Row-batched forward pass; also returns the pre-activations of every
/// layer for the backward pass.
fn forward_cached(params: &MlpParams, input: ArrayView2<f64>) -> (Vec<Array2<f64>>, Array2<f64>) {
    let last = params.layers.len() - 1;
    let mut pre = Vec::with_capacity(params.layers.len());
    let mut act = input.to_owned();
    for (i, l) in params.layers.iter().enumerate() {
        let z = act.dot(&l.weight.t()) + &l.bias;
        act = if i < last { z.mapv(relu) } else { z.clone() };
        pre.push(z);
    }
    (pre, act)
}

/// Forward pass for a batch of row vectors.
pub fn forward_batch(params: &MlpParams, input: ArrayView2<f64>) -> Result<Array2<f64>> {
    params.check_input(input.ncols())?;
    Ok(forward_cached(params, input).1)
}

pub fn forward(params: &MlpParams, input: ArrayView1<f64>) -> Result<Array1<f64>> {
    let batch = input.insert_axis(Axis(0));
    Ok(forward_batch(params, batch)?.index_axis_move(Axis(0), 0))
}

/// `(1/D) Σ (z - y)²` with `D = 2P` the vector width.
pub fn loss(z: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    if z.len() != y.len() || z.is_empty() {
        return Err(dimension(format!("loss on lengths {} and {}", z.len(), y.len())));
    }
    Ok(Zip::from(&z).and(&y).fold(0.0, |acc, a, b| acc + (a - b) * (a - b)) / z.len() as f64)
}

/// Mean of [`loss`] over the rows of a batch.
pub fn batch_loss(z: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    if z.dim() != y.dim() || z.is_empty() {
        return Err(dimension(format!("batch loss on shapes {:?} and {:?}", z.dim(), y.dim())));
    }
    Ok(Zip::from(&z).and(&y).fold(0.0, |acc, a, b| acc + (a - b) * (a - b)) / z.len() as f64)
}

/// Gradient of the batch-mean loss with respect to every parameter, and the
/// loss itself.
pub fn backward_batch(params: &MlpParams, input: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<(MlpParams, f64)> {
    let (grads, out) = backward_with_output(params, input, target)?;
    Ok((grads, batch_loss(out.view(), target)?))
}

/// [`backward_batch`] returning the network output instead of the loss.
pub(crate) fn backward_with_output(
    params: &MlpParams,
    input: ArrayView2<f64>,
    target: ArrayView2<f64>,
) -> Result<(MlpParams, Array2<f64>)> {
    params.check_input(input.ncols())?;
    if target.ncols() != params.output_width() || target.nrows() != input.nrows() {
        return Err(dimension(format!("target shape {:?} does not match batch", target.dim())));
    }
    let (pre, out) = forward_cached(params, input);

    let scale = 2.0 / out.len() as f64;
    let mut delta = (&out - &target) * scale;
    let mut grads = Vec::with_capacity(params.layers.len());
    for i in (0..params.layers.len()).rev() {
        let prev_act = if i == 0 { input.to_owned() } else { pre[i - 1].mapv(relu) };
        let gw = delta.t().dot(&prev_act);
        let gb = delta.sum_axis(Axis(0));
        if i > 0 {
            let mut back = delta.dot(&params.layers[i].weight);
            Zip::from(&mut back).and(&pre[i - 1]).for_each(|d, &z| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = back;
        }
        grads.push(Layer { weight: gw, bias: gb });
    }
    grads.reverse();
    Ok((MlpParams { layers: grads }, out))
}

pub fn backward(params: &MlpParams, input: ArrayView1<f64>, target: ArrayView1<f64>) -> Result<MlpParams> {
    Ok(backward_batch(params, input.insert_axis(Axis(0)), target.insert_axis(Axis(0)))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use ndarray::array;

    #[test]
    fn relu_cases() {
        assert_eq!(relu(-1.0), 0.0);
        assert_eq!(relu(2.0), 2.0);
        assert_eq!(relu(0.0), 0.0);
    }

    #[test]
    fn zero_network_gives_zero() {
        let p = MlpParams::init_default(6, &mut seed::rng(1)).unwrap().zeros_like();
        let out = forward(&p, array![1.0, -2.0, 3.0, 0.5, 0.0, 1.0].view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer() {
        let p = MlpParams::from_layers(vec![Layer { weight: Array2::eye(3), bias: Array1::zeros(3) }]).unwrap();
        let x = array![-1.0, 0.5, 2.0];
        assert_eq!(forward(&p, x.view()).unwrap(), x);
    }

    #[test]
    fn loss_arithmetic() {
        assert_eq!(loss(array![1.0, 0.0].view(), array![0.0, 0.0].view()).unwrap(), 0.5);
        assert_eq!(loss(array![1.0, 2.0].view(), array![1.0, 2.0].view()).unwrap(), 0.0);
        assert!(loss(array![1.0].view(), array![1.0, 2.0].view()).is_err());
    }

    #[test]
    fn single_layer_gradient_closed_form() {
        let w = array![[0.5, -1.0], [2.0, 0.25]];
        let b = array![0.1, -0.2];
        let p = MlpParams::from_layers(vec![Layer { weight: w.clone(), bias: b.clone() }]).unwrap();
        let x = array![1.5, -0.5];
        let y = array![0.3, 0.7];
        let g = backward(&p, x.view(), y.view()).unwrap();
        let r = w.dot(&x) + &b - &y;
        for i in 0..2 {
            assert!((g.layers[0].bias[i] - r[i]).abs() < 1e-14);
            for j in 0..2 {
                assert!((g.layers[0].weight[(i, j)] - r[i] * x[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let p = MlpParams::init(&[4, 3, 2], &mut seed::rng(2)).unwrap();
        assert!(forward(&p, array![1.0, 2.0].view()).is_err());
        assert!(backward(&p, array![1.0, 2.0, 3.0, 4.0].view(), array![1.0].view()).is_err());
        let broken = vec![Layer::zeros(4, 3), Layer::zeros(2, 2)];
        assert!(MlpParams::from_layers(broken).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = seed::rng(9);
        let p = MlpParams::init(&[6, 8, 8, 6], &mut rng).unwrap();
        let x = Array2::from_shape_fn((3, 6), |(i, j)| ((i * 7 + j) as f64 * 0.37).sin());
        let y = Array2::from_shape_fn((3, 6), |(i, j)| ((i + 2 * j) as f64 * 0.61).cos());
        let (g, _) = backward_batch(&p, x.view(), y.view()).unwrap();
        let analytic = g.flat();
        let h = 1e-6;
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for (k, &a) in analytic.iter().enumerate() {
            let mut plus = p.clone();
            let mut minus = p.clone();
            *plus.flat_mut().nth(k).unwrap() += h;
            *minus.flat_mut().nth(k).unwrap() -= h;
            let lp = batch_loss(forward_batch(&plus, x.view()).unwrap().view(), y.view()).unwrap();
            let lm = batch_loss(forward_batch(&minus, x.view()).unwrap().view(), y.view()).unwrap();
            let fd = (lp - lm) / (2.0 * h);
            err += (a - fd).powi(2);
            norm += a.powi(2).max(fd.powi(2));
        }
        assert!((err / norm).sqrt() < 1e-6, "relative error {}", (err / norm).sqrt());
    }
}
