use ndarray::NdFloat;

use super::mlp::{Gradients, Mlp};

/// Adam with bias correction; `step` descends along the given gradients.
#[derive(Clone, Debug)]
pub struct Adam<F> {
    pub lr: F,
    pub beta1: F,
    pub beta2: F,
    pub eps: F,
    m: Gradients<F>,
    v: Gradients<F>,
    t: i32,
}

impl<F: NdFloat> Adam<F> {
    pub fn new(net: &Mlp<F>, lr: F) -> Self {
        Self {
            lr,
            beta1: F::from(0.9).unwrap(),
            beta2: F::from(0.999).unwrap(),
            eps: F::from(1e-8).unwrap(),
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, net: &mut Mlp<F>, grads: &Gradients<F>) {
        self.t += 1;
        let one = F::one();
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = one - b1.powi(self.t);
        let c2 = one - b2.powi(self.t);
        let step = self.lr * c2.sqrt() / c1;
        let eps = self.eps;
        for (((layer, g), m), v) in net
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.m.layers)
            .zip(&mut self.v.layers)
        {
            ndarray::Zip::from(&mut layer.weights)
                .and(&g.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .for_each(|w, &g, m, v| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    *w -= step * *m / (v.sqrt() + eps);
                });
            ndarray::Zip::from(&mut layer.bias)
                .and(&g.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .for_each(|w, &g, m, v| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    *w -= step * *m / (v.sqrt() + eps);
                });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn zero_learning_rate_keeps_params() {
        let net0 = Mlp::<f64>::zeros(&[2, 2]).unwrap();
        let mut net = net0.clone();
        let mut opt = Adam::new(&net, 0.0);
        let g = net.gradients(&[1.0, 1.0], &[1.0, -1.0]).unwrap();
        opt.step(&mut net, &g);
        assert_eq!(net, net0);
    }

    #[test]
    fn fits_a_linear_map() {
        let mut rng = rand::rngs::mock::StepRng::new(1, 7);
        let mut net = Mlp::<f64>::new(&[1, 1], &mut rng).unwrap();
        let mut opt = Adam::new(&net, 0.05);
        let xs = Array2::from_shape_vec((4, 1), vec![-1.0, 0.0, 1.0, 2.0]).unwrap();
        let ys = xs.mapv(|x| 3.0 * x - 1.0);
        for _ in 0..2000 {
            let cache = net.forward_cached(xs.view()).unwrap();
            let up = (&cache.output - &ys) * 0.5;
            let g = net.backward(&cache, up.view()).unwrap();
            opt.step(&mut net, &g);
        }
        let out = net.forward(xs.view()).unwrap();
        for (a, b) in out.iter().zip(ys.iter()) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }
}
