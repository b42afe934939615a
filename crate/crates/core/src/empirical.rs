//! Finite-width Gaussian ReLU networks and their tangent kernel at initialization.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights W^1..W^L (hidden) and the output row W^{L+1}.
#[derive(Debug, Clone)]
pub struct Network {
    pub input_dim: usize,
    pub width: usize,
    /// hidden layers first, then the 1 x n output row
    pub weights: Vec<DMatrix<f64>>,
    pub seed: Option<u64>,
}

impl Network {
    /// Hidden entries ~ N(0, 2/n), output entries ~ N(0, 1), drawn layer by layer from one seed.
    pub fn gaussian(depth: usize, width: usize, input_dim: usize, seed: u64) -> Result<Self> {
        if depth == 0 || width == 0 || input_dim == 0 {
            return Err(Error::domain("depth, width and input dimension must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = Normal::new(0.0, (2.0 / width as f64).sqrt()).expect("valid normal");
        let output = Normal::new(0.0, 1.0).expect("valid normal");
        let mut weights = Vec::with_capacity(depth + 1);
        for l in 0..depth {
            let cols = if l == 0 { input_dim } else { width };
            // row-major draw order keeps the stream layout independent of storage order
            let mut w = DMatrix::zeros(width, cols);
            for i in 0..width {
                for j in 0..cols {
                    w[(i, j)] = hidden.sample(&mut rng);
                }
            }
            weights.push(w);
        }
        let mut out = DMatrix::zeros(1, width);
        for j in 0..width {
            out[(0, j)] = output.sample(&mut rng);
        }
        weights.push(out);
        Ok(Network { input_dim, width, weights, seed: Some(seed) })
    }

    /// Hand-set weights; the last matrix must be a single output row.
    pub fn from_weights(weights: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = weights.first() else {
            return Err(Error::domain("no layers"));
        };
        let input_dim = first.ncols();
        let width = first.nrows();
        for pair in weights.windows(2) {
            if pair[1].ncols() != pair[0].nrows() {
                return Err(Error::domain("layer shapes do not chain"));
            }
        }
        if weights.last().unwrap().nrows() != 1 {
            return Err(Error::domain("output layer must have one row"));
        }
        Ok(Network { input_dim, width, weights, seed: None })
    }

    pub fn depth(&self) -> usize {
        self.weights.len() - 1
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::domain(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Forward features alpha^0 = x, ..., alpha^L as columns, one column per input.
    fn features(&self, inputs: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut alphas = vec![inputs.clone()];
        for w in &self.weights[..self.depth()] {
            let pre = w * alphas.last().unwrap();
            alphas.push(pre.map(|v| v.max(0.0)));
        }
        alphas
    }

    /// Backward features beta^1..beta^L (beta^{L+1} = 1 is implicit), one column per input.
    fn backward(&self, alphas: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let depth = self.depth();
        let cols = alphas[0].ncols();
        let mut betas = vec![DMatrix::zeros(0, 0); depth];
        let mut upstream = DMatrix::from_fn(self.width, cols, |i, _| self.weights[depth][(0, i)]);
        for l in (0..depth).rev() {
            // support of layer l+1: strictly positive activations
            let mask = alphas[l + 1].map(|v| if v > 0.0 { 1.0 } else { 0.0 });
            let beta = upstream.component_mul(&mask);
            if l > 0 {
                upstream = self.weights[l].transpose() * &beta;
            }
            betas[l] = beta;
        }
        betas
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let a = self.features(&DMatrix::from_column_slice(x.len(), 1, x));
        Ok((&self.weights[self.depth()] * a.last().unwrap())[(0, 0)])
    }

    /// Outputs for many inputs.
    pub fn forward_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let m = self.stack(xs)?;
        let a = self.features(&m);
        Ok((&self.weights[self.depth()] * a.last().unwrap()).iter().copied().collect())
    }

    fn stack(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        for x in xs {
            self.check_input(x)?;
        }
        Ok(DMatrix::from_fn(self.input_dim, xs.len(), |i, j| xs[j][i]))
    }

    /// Gram matrix of the tangent kernel over the inputs.
    pub fn ntk_gram(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let m = self.stack(xs)?;
        let alphas = self.features(&m);
        let betas = self.backward(&alphas);
        let depth = self.depth();
        let mut gram = alphas[depth].transpose() * &alphas[depth];
        for l in 0..depth {
            let bb = betas[l].transpose() * &betas[l];
            let aa = alphas[l].transpose() * &alphas[l];
            gram += bb.component_mul(&aa);
        }
        Ok(0.5 * (&gram + gram.transpose()))
    }

    /// Full parameter gradient of f at x, layer by layer in row-major order.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let alphas = self.features(&DMatrix::from_column_slice(x.len(), 1, x));
        let betas = self.backward(&alphas);
        let mut g = Vec::new();
        for (l, beta) in betas.iter().enumerate() {
            for i in 0..beta.nrows() {
                for j in 0..alphas[l].nrows() {
                    g.push(beta[(i, 0)] * alphas[l][(j, 0)]);
                }
            }
        }
        g.extend(alphas[self.depth()].iter().copied());
        Ok(g)
    }
}

/// <grad f(x), grad f(x')> through the formal gradients.
pub fn empirical_ntk(net: &Network, x: &[f64], y: &[f64]) -> Result<f64> {
    let g = net.ntk_gram(&[x.to_vec(), y.to_vec()])?;
    Ok(g[(0, 1)])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Zeta0Sample {
    /// f_theta - f* at the nodes
    pub zeta0: Vec<f64>,
    /// -f* + mean of f_theta: the piecewise-constant approximation
    pub zeta: Vec<f64>,
    /// sup |zeta0 - zeta|
    pub deviation: f64,
    pub mean_output: f64,
}

/// Initial error of a sampled network on labeled points with probability weights.
pub fn sampled_zeta0(net: &Network, points: &[Vec<f64>], labels: &[f64], weights: &[f64]) -> Result<Zeta0Sample> {
    if points.len() != labels.len() || points.len() != weights.len() {
        return Err(Error::domain("points, labels and weights differ in length"));
    }
    let f = net.forward_many(points)?;
    let total: f64 = weights.iter().sum();
    let mean_output = f.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / total;
    let zeta0: Vec<f64> = f.iter().zip(labels).map(|(a, l)| a - l).collect();
    let zeta: Vec<f64> = labels.iter().map(|l| mean_output - l).collect();
    let deviation = zeta0.iter().zip(&zeta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Zeta0Sample { zeta0, zeta, deviation, mean_output })
}

/// Deterministic points in the cap of angular radius `radius` around the last axis.
///
/// Polar angles grow like the square root of the index (uniform area) and directions
/// follow a Fibonacci layout on the unit sphere of the remaining coordinates.
pub fn cap_grid(dim: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    assert!(dim >= 3, "dimension must be at least 3");
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let theta = radius * ((i as f64 + 0.5) / count as f64).sqrt();
            // direction on S^{dim-2}: Fibonacci on the first three, then a fixed tilt pattern
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let az = golden * i as f64;
            let mut u = vec![0.0; dim - 1];
            u[0] = rho * az.cos();
            u[1] = rho * az.sin();
            if dim > 3 {
                u[2] = z;
            } else {
                u[0] = az.cos();
                u[1] = az.sin();
            }
            for (k, v) in u.iter_mut().enumerate().skip(3) {
                *v = 0.3 * ((k + 1) as f64 * az).sin();
            }
            let u = unit(&u);
            let mut x: Vec<f64> = u.iter().map(|v| theta.sin() * v).collect();
            x.push(theta.cos());
            x
        })
        .collect()
}

/// Normalizes a vector.
pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = DVector::from_column_slice(v).norm();
    v.iter().map(|x| x / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_set_single_relu() {
        let w1 = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let w2 = DMatrix::from_row_slice(1, 1, &[1.0]);
        let net = Network::from_weights(vec![w1, w2]).unwrap();
        assert_eq!(net.forward(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(net.forward(&[-1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(net.forward(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn zero_network() {
        let mut net = Network::gaussian(3, 8, 4, 1).unwrap();
        for w in &mut net.weights {
            w.fill(0.0);
        }
        let x = unit(&[1.0, 2.0, 0.0, 1.0]);
        assert_eq!(net.forward(&x).unwrap(), 0.0);
        let z = sampled_zeta0(&net, &[x.clone(), x], &[1.0, -1.0], &[0.5, 0.5]).unwrap();
        assert_eq!(z.zeta0, vec![-1.0, 1.0]);
    }

    #[test]
    fn gram_matches_gradient_inner_products() {
        let net = Network::gaussian(3, 16, 4, 7).unwrap();
        let x = unit(&[1.0, 0.2, -0.3, 0.5]);
        let y = unit(&[0.4, 1.0, 0.1, -0.2]);
        let gx = net.gradient(&x).unwrap();
        let gy = net.gradient(&y).unwrap();
        let ip: f64 = gx.iter().zip(&gy).map(|(a, b)| a * b).sum();
        let k = empirical_ntk(&net, &x, &y).unwrap();
        assert!((ip - k).abs() < 1e-12 * ip.abs().max(1.0));
        assert_eq!(k, empirical_ntk(&net, &y, &x).unwrap());
    }

    #[test]
    fn seed_is_reproducible() {
        let a = Network::gaussian(2, 8, 3, 99).unwrap();
        let b = Network::gaussian(2, 8, 3, 99).unwrap();
        assert_eq!(a.weights, b.weights);
        let c = Network::gaussian(2, 8, 3, 100).unwrap();
        assert_ne!(a.weights, c.weights);
    }
}
