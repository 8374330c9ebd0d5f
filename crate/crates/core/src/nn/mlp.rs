use ndarray::{Array1, Array2, ArrayView2, Axis, NdFloat};
use rand::Rng;

use super::NnError;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer<F> {
    /// `(inputs, outputs)`; rows of the batch multiply on the left.
    pub weights: Array2<F>,
    pub bias: Array1<F>,
}

/// A feed-forward network; hidden layers use ReLU, the output is linear.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<F> {
    layers: Vec<Layer<F>>,
}

/// Per-layer inputs and pre-activations kept for the backward pass.
pub struct ForwardCache<F> {
    inputs: Vec<Array2<F>>,
    pre_activations: Vec<Array2<F>>,
    pub output: Array2<F>,
}

/// Gradients with the same layout as the network's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<F> {
    pub layers: Vec<Layer<F>>,
}

impl<F: NdFloat> Gradients<F> {
    pub fn zeros_like(net: &Mlp<F>) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients<F>) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
    }

    pub fn scale(&mut self, factor: F) {
        for l in &mut self.layers {
            l.weights.mapv_inplace(|x| x * factor);
            l.bias.mapv_inplace(|x| x * factor);
        }
    }

    pub fn norm(&self) -> F {
        self.layers
            .iter()
            .map(|l| {
                l.weights.iter().map(|&x| x * x).fold(F::zero(), |a, b| a + b)
                    + l.bias.iter().map(|&x| x * x).fold(F::zero(), |a, b| a + b)
            })
            .fold(F::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Rescales so the global norm is at most `max_norm`.
    pub fn clip_norm(&mut self, max_norm: F) {
        let norm = self.norm();
        if norm > max_norm {
            self.scale(max_norm / norm);
        }
    }

    pub fn flatten(&self) -> Vec<F> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }
}

impl<F: NdFloat> Mlp<F> {
    /// He-uniform initialisation for every layer.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self, NnError> {
        Self::check_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / w[0] as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_simple_fn((w[0], w[1]), || {
                        F::from(rng.gen_range(-limit..limit)).unwrap()
                    }),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self, NnError> {
        Self::check_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| Layer {
                weights: Array2::zeros((w[0], w[1])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Layer<F>>) -> Result<Self, NnError> {
        if layers.is_empty() {
            return Err(NnError::TooFewLayers);
        }
        Ok(Self { layers })
    }

    fn check_sizes(sizes: &[usize]) -> Result<(), NnError> {
        if sizes.len() < 2 {
            Err(NnError::TooFewLayers)
        } else {
            Ok(())
        }
    }

    pub fn layers(&self) -> &[Layer<F>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<F>] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_size()];
        sizes.extend(self.layers.iter().map(|l| l.bias.len()));
        sizes
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().unwrap().bias.len()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    fn check_input(&self, input: &ArrayView2<F>) -> Result<(), NnError> {
        if input.ncols() != self.input_size() {
            return Err(NnError::InputWidth {
                expected: self.input_size(),
                actual: input.ncols(),
            });
        }
        Ok(())
    }

    /// Batched forward pass; rows are examples.
    pub fn forward(&self, input: ArrayView2<F>) -> Result<Array2<F>, NnError> {
        self.check_input(&input)?;
        let last = self.layers.len() - 1;
        let mut act = input.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            act = act.dot(&layer.weights) + &layer.bias;
            if i < last {
                act.mapv_inplace(relu);
            }
        }
        Ok(act)
    }

    pub fn forward_one(&self, input: &[F]) -> Result<Vec<F>, NnError> {
        let view = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        Ok(self.forward(view)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_cached(&self, input: ArrayView2<F>) -> Result<ForwardCache<F>, NnError> {
        self.check_input(&input)?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut act = input.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = act.dot(&layer.weights) + &layer.bias;
            inputs.push(act);
            act = if i < last { z.mapv(relu) } else { z.clone() };
            pre_activations.push(z);
        }
        Ok(ForwardCache {
            inputs,
            pre_activations,
            output: act,
        })
    }

    /// Parameter gradients of `sum(upstream * output)` summed over the batch,
    /// where `upstream` is dLoss/dOutput.
    pub fn backward(
        &self,
        cache: &ForwardCache<F>,
        upstream: ArrayView2<F>,
    ) -> Result<Gradients<F>, NnError> {
        if upstream.dim() != cache.output.dim() {
            return Err(NnError::UpstreamShape {
                expected: cache.output.dim(),
                actual: upstream.dim(),
            });
        }
        let mut grads: Vec<Layer<F>> = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.to_owned();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            grads.push(Layer {
                weights: cache.inputs[i].t().dot(&delta),
                bias: delta.sum_axis(Axis(0)),
            });
            if i > 0 {
                let mut prev = delta.dot(&layer.weights.t());
                prev.zip_mut_with(&cache.pre_activations[i - 1], |d, &z| {
                    if z <= F::zero() {
                        *d = F::zero();
                    }
                });
                delta = prev;
            }
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    /// Gradients for a single example.
    pub fn gradients(&self, input: &[F], upstream: &[F]) -> Result<Gradients<F>, NnError> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        let cache = self.forward_cached(x)?;
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).map_err(|_| {
            NnError::UpstreamShape {
                expected: (1, self.output_size()),
                actual: (1, upstream.len()),
            }
        })?;
        self.backward(&cache, up)
    }

    /// Weights then bias, layer by layer, row-major.
    pub fn flatten(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    pub fn set_flat(&mut self, params: &[F]) -> Result<(), NnError> {
        if params.len() != self.param_count() {
            return Err(NnError::ParamCount {
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = it.next().unwrap();
            }
            for b in l.bias.iter_mut() {
                *b = it.next().unwrap();
            }
        }
        Ok(())
    }

    /// Converts parameters to another float width.
    pub fn cast<G: NdFloat>(&self) -> Mlp<G> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weights: l.weights.mapv(|x| G::from(x).unwrap()),
                    bias: l.bias.mapv(|x| G::from(x).unwrap()),
                })
                .collect(),
        }
    }
}

fn relu<F: NdFloat>(x: F) -> F {
    if x > F::zero() {
        x
    } else {
        F::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_output_bias() {
        let mut net = Mlp::<f64>::zeros(&[4, 3, 2]).unwrap();
        net.layers_mut()[1].bias = Array1::from(vec![0.5, -1.5]);
        let out = net.forward_one(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(out, vec![0.5, -1.5]);
    }

    #[test]
    fn forward_is_pure_and_sized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f32>::new(&[28, 16, 200], &mut rng).unwrap();
        assert_eq!(net.param_count(), 28 * 16 + 16 + 16 * 200 + 200);
        let x = vec![0.3f32; 28];
        let a = net.forward_one(&x).unwrap();
        assert_eq!(a, net.forward_one(&x).unwrap());
        assert_eq!(a.len(), 200);
        assert!(a.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn shape_errors() {
        let net = Mlp::<f32>::zeros(&[3, 2]).unwrap();
        assert!(matches!(
            net.forward_one(&[1.0]),
            Err(NnError::InputWidth { .. })
        ));
        assert!(net.gradients(&[1.0, 2.0, 3.0], &[1.0]).is_err());
        assert!(Mlp::<f32>::zeros(&[3]).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::<f32>::new(&[5, 4, 3], &mut rng).unwrap();
        let mut other = Mlp::<f32>::zeros(&[5, 4, 3]).unwrap();
        other.set_flat(&net.flatten()).unwrap();
        assert_eq!(other, net);
    }

    #[test]
    fn batch_gradient_is_sum_of_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::<f64>::new(&[3, 5, 2], &mut rng).unwrap();
        let xs = Array2::from_shape_vec((2, 3), vec![0.1, -0.2, 0.3, 0.5, 0.4, -0.6]).unwrap();
        let up = Array2::from_shape_vec((2, 2), vec![1.0, 0.5, -0.3, 2.0]).unwrap();
        let batch = net
            .backward(&net.forward_cached(xs.view()).unwrap(), up.view())
            .unwrap();
        let mut summed = net
            .gradients(xs.row(0).as_slice().unwrap(), up.row(0).as_slice().unwrap())
            .unwrap();
        summed.add_assign(
            &net.gradients(xs.row(1).as_slice().unwrap(), up.row(1).as_slice().unwrap())
                .unwrap(),
        );
        for (a, b) in batch.flatten().iter().zip(summed.flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
