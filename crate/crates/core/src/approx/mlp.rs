use rand::Rng;

use super::Matrix;
use crate::error::{Error, Result};

/// Output nonlinearity of the last layer. Hidden layers always use ReLU.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputActivation {
    Identity,
    /// `scale_i * tanh(z_i)`, bounding output `i` to `[-scale_i, scale_i]`.
    Tanh { scale: Vec<f64> },
}

/// Fully connected feed-forward network with parameters in one flat vector.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs and owns a
/// row-major `out x in` weight block followed by `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    output: OutputActivation,
}

/// Activations recorded by [`Mlp::forward_cached`] for a backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `acts[0]` is the input; `acts[l + 1]` the post-activation of layer `l`.
    acts: Vec<Matrix>,
    /// Unscaled `tanh` of the output layer when the output is bounded.
    squashed: Option<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.acts.last().expect("cache holds at least the input")
    }

    pub fn input(&self) -> &Matrix {
        &self.acts[0]
    }
}

pub fn parameter_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Uniform fan-in initialisation, `U(-1/sqrt(in), 1/sqrt(in))`.
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        output: OutputActivation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(sizes, output)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let n = w[0] * w[1] + w[1];
            for p in &mut net.params[offset..offset + n] {
                *p = rng.random_range(-bound..bound);
            }
            offset += n;
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Result<Self> {
        Self::from_params(sizes, output, vec![0.0; parameter_count(sizes)])
    }

    pub fn from_params(sizes: &[usize], output: OutputActivation, params: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config(format!("invalid layer sizes {sizes:?}")));
        }
        if params.len() != parameter_count(sizes) {
            return Err(Error::shape(
                format!("{} parameters", parameter_count(sizes)),
                params.len(),
            ));
        }
        if let OutputActivation::Tanh { scale } = &output {
            if scale.len() != *sizes.last().unwrap() {
                return Err(Error::shape(
                    format!("{} output scales", sizes.last().unwrap()),
                    scale.len(),
                ));
            }
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                context: "network parameters".into(),
            });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
            output,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> &OutputActivation {
        &self.output
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// `(weight_offset, bias_offset)` of layer `l`.
    pub fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let w = parameter_count(&self.sizes[..=l]);
        (w, w + self.sizes[l] * self.sizes[l + 1])
    }

    /// Multiplies the last layer's weights and biases by `k`.
    pub fn scale_last_layer(&mut self, k: f64) {
        let (w, _) = self.layer_offsets(self.num_layers() - 1);
        for p in &mut self.params[w..] {
            *p *= k;
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = Matrix::from_vec(1, x.len(), x.to_vec())?;
        Ok(self.forward_batch(&m)?.into_vec())
    }

    pub fn forward_batch(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut h = x.clone();
        for l in 0..self.num_layers() {
            h = self.affine(l, &h);
            if l + 1 < self.num_layers() {
                relu(&mut h);
            }
        }
        if let OutputActivation::Tanh { scale } = &self.output {
            for i in 0..h.rows() {
                for (v, s) in h.row_mut(i).iter_mut().zip(scale) {
                    *v = s * v.tanh();
                }
            }
        }
        Ok(h)
    }

    pub fn forward_cached(&self, x: Matrix) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x);
        for l in 0..self.num_layers() {
            let mut h = self.affine(l, acts.last().unwrap());
            if l + 1 < self.num_layers() {
                relu(&mut h);
            }
            acts.push(h);
        }
        let mut squashed = None;
        if let OutputActivation::Tanh { scale } = &self.output {
            let out = acts.last_mut().unwrap();
            let mut t = out.clone();
            for i in 0..out.rows() {
                for ((v, tv), s) in out.row_mut(i).iter_mut().zip(t.row_mut(i)).zip(scale) {
                    *tv = v.tanh();
                    *v = s * *tv;
                }
            }
            squashed = Some(t);
        }
        Ok(ForwardCache { acts, squashed })
    }

    /// Reverse-mode pass. `upstream` is dLoss/dOutput per sample; parameter
    /// gradients are summed over the batch and added into `grad`. Returns
    /// dLoss/dInput when `want_input` is set.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &Matrix,
        grad: &mut [f64],
        want_input: bool,
    ) -> Result<Option<Matrix>> {
        let out = cache.output();
        if upstream.rows() != out.rows() || upstream.cols() != out.cols() {
            return Err(Error::shape(
                format!("{}x{} upstream gradient", out.rows(), out.cols()),
                format!("{}x{}", upstream.rows(), upstream.cols()),
            ));
        }
        if grad.len() != self.params.len() {
            return Err(Error::shape(
                format!("{} gradient slots", self.params.len()),
                grad.len(),
            ));
        }
        let mut delta = upstream.clone();
        if let (OutputActivation::Tanh { scale }, Some(t)) = (&self.output, &cache.squashed) {
            for i in 0..delta.rows() {
                for ((d, tv), s) in delta.row_mut(i).iter_mut().zip(t.row(i)).zip(scale) {
                    *d *= s * (1.0 - tv * tv);
                }
            }
        }
        for l in (0..self.num_layers()).rev() {
            let (in_dim, out_dim) = (self.sizes[l], self.sizes[l + 1]);
            let (w_off, b_off) = self.layer_offsets(l);
            let input = &cache.acts[l];
            {
                let (gw, gb) = grad[w_off..b_off + out_dim].split_at_mut(in_dim * out_dim);
                for r in 0..delta.rows() {
                    let x = input.row(r);
                    for (o, &d) in delta.row(r).iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        gb[o] += d;
                        for (g, xi) in gw[o * in_dim..(o + 1) * in_dim].iter_mut().zip(x) {
                            *g += d * xi;
                        }
                    }
                }
            }
            if l == 0 && !want_input {
                return Ok(None);
            }
            let weights = &self.params[w_off..b_off];
            let mut prev = Matrix::zeros(delta.rows(), in_dim);
            for r in 0..delta.rows() {
                let dst = prev.row_mut(r);
                for (o, &d) in delta.row(r).iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (p, w) in dst.iter_mut().zip(&weights[o * in_dim..(o + 1) * in_dim]) {
                        *p += d * w;
                    }
                }
            }
            if l > 0 {
                // ReLU mask from the stored post-activation.
                for r in 0..prev.rows() {
                    for (p, a) in prev.row_mut(r).iter_mut().zip(input.row(r)) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                }
            }
            delta = prev;
        }
        Ok(Some(delta))
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::shape(
                format!("input of width {}", self.input_dim()),
                x.cols(),
            ));
        }
        Ok(())
    }

    fn affine(&self, l: usize, x: &Matrix) -> Matrix {
        let (in_dim, out_dim) = (self.sizes[l], self.sizes[l + 1]);
        let (w_off, b_off) = self.layer_offsets(l);
        let weights = &self.params[w_off..b_off];
        let bias = &self.params[b_off..b_off + out_dim];
        let mut out = Matrix::zeros(x.rows(), out_dim);
        for r in 0..x.rows() {
            let xr = x.row(r);
            for (o, y) in out.row_mut(r).iter_mut().enumerate() {
                *y = bias[o] + dot(&weights[o * in_dim..(o + 1) * in_dim], xr);
            }
        }
        out
    }
}

fn relu(m: &mut Matrix) {
    for v in m.as_mut_slice() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorise
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..a.len() {
        s += a[j] * b[j];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_weights_give_output_bias() {
        let mut net = Mlp::zeros(&[3, 4, 2], OutputActivation::Identity).unwrap();
        let (_, b) = net.layer_offsets(1);
        net.params_mut()[b] = 0.7;
        net.params_mut()[b + 1] = -1.2;
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.7, -1.2]);
    }

    #[test]
    fn single_linear_layer_matches_hand_product() {
        // W = [[1, 2], [3, 4]], b = [0.5, -0.5], x = [1, -1]
        let net = Mlp::from_params(
            &[2, 2],
            OutputActivation::Identity,
            vec![1.0, 2.0, 3.0, 4.0, 0.5, -0.5],
        )
        .unwrap();
        assert_eq!(net.forward(&[1.0, -1.0]).unwrap(), vec![-0.5, -1.5]);
    }

    #[test]
    fn dead_relu_layer_passes_only_output_bias() {
        // hidden pre-activations are all negative for positive inputs
        let mut params = vec![-1.0; 2 * 3];
        params.extend([-0.1; 3]);
        params.extend([0.4; 3]);
        params.push(2.5);
        let net = Mlp::from_params(&[2, 3, 1], OutputActivation::Identity, params).unwrap();
        assert_eq!(net.forward(&[0.3, 0.9]).unwrap(), vec![2.5]);
    }

    #[test]
    fn shape_errors() {
        let net = Mlp::zeros(&[3, 2], OutputActivation::Identity).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Shape { .. })));
        assert!(Mlp::from_params(&[3, 2], OutputActivation::Identity, vec![0.0; 5]).is_err());
        assert!(Mlp::zeros(
            &[3, 2],
            OutputActivation::Tanh { scale: vec![1.0] }
        )
        .is_err());
        let cache = net.forward_cached(Matrix::zeros(1, 3)).unwrap();
        let mut g = vec![0.0; 8];
        assert!(net
            .backward(&cache, &Matrix::zeros(1, 3), &mut g, false)
            .is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = Mlp::new(&[3, 5, 2], OutputActivation::Identity, &mut seeded(1)).unwrap();
        let cache = net.forward_cached(Matrix::from_rows(&[[0.1, 0.2, 0.3]]).unwrap()).unwrap();
        let mut g = vec![0.0; net.params().len()];
        let dx = net
            .backward(&cache, &Matrix::zeros(1, 2), &mut g, true)
            .unwrap()
            .unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        assert!(dx.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_weight_gradient_is_outer_product() {
        let net = Mlp::new(&[3, 2], OutputActivation::Identity, &mut seeded(2)).unwrap();
        let x = [0.5, -1.0, 2.0];
        let up = [0.3, -0.7];
        let cache = net.forward_cached(Matrix::from_rows(&[x]).unwrap()).unwrap();
        let mut g = vec![0.0; net.params().len()];
        net.backward(&cache, &Matrix::from_rows(&[up]).unwrap(), &mut g, false)
            .unwrap();
        for o in 0..2 {
            for i in 0..3 {
                assert_eq!(g[o * 3 + i], up[o] * x[i]);
            }
            assert_eq!(g[6 + o], up[o]);
        }
    }

    #[test]
    fn tanh_output_is_bounded() {
        let net = Mlp::new(
            &[2, 8, 2],
            OutputActivation::Tanh {
                scale: vec![2.0, 0.5],
            },
            &mut seeded(3),
        )
        .unwrap();
        let y = net.forward(&[100.0, -100.0]).unwrap();
        assert!(y[0].abs() <= 2.0 && y[1].abs() <= 0.5);
    }
}
