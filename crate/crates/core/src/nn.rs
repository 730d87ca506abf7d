//! The synthetic model: a fully connected network with optional residual
//! blocks, hand-written reverse mode, and Adam.
//!
//! Parameters live in one flat vector (`MlpParams`) whose layout is derived
//! from the architecture, so optimizers, perturbation probes and checkpoints
//! can treat `Θ` as a plain array.
//!
//! Plain network, `L` hidden layers:
//!
//! ```text
//! h_0 = x,  h_k = σ(A_k h_{k−1} + b_k),  y = W h_L
//! ```
//!
//! Residual network (every block maps back to the input width):
//!
//! ```text
//! h_0 = x,  h_k = W_k σ(A_k h_{k−1} + b_k) + h_{k−1},  y = R h_L
//! ```
//!
//! Neither output map carries a bias.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the output `a = σ(z)`. The ReLU
    /// derivative at 0 is 0.
    #[inline]
    fn derivative(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }

    /// Variance of the initial weight distribution for a layer with
    /// `fan_in` inputs.
    fn init_variance(self, fan_in: usize) -> f64 {
        match self {
            Activation::Relu => 2.0 / fan_in as f64,
            Activation::Tanh => 1.0 / fan_in as f64,
        }
    }
}

/// Initial hidden-layer biases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasInit {
    Zero,
    /// `U(−1/√fan_in, 1/√fan_in)`.
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArch {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub residual: bool,
    #[serde(default)]
    pub bias_init: BiasInit,
}

impl MlpArch {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::invalid(
                "arch",
                "input and output dims must be positive",
            ));
        }
        if self.hidden.contains(&0) {
            return Err(Error::invalid("arch", "hidden widths must be positive"));
        }
        if self.residual && self.hidden.is_empty() {
            return Err(Error::invalid(
                "arch",
                "a residual net needs at least one block",
            ));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        Layout::of(self).total
    }
}

/// Flat parameter vector `Θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub values: Vec<f64>,
}

/// Offset and shape of one dense map inside the flat vector.
#[derive(Debug, Clone, Copy)]
struct Dense {
    rows: usize,
    cols: usize,
    weight: usize,
    bias: Option<usize>,
}

/// One hidden stage: `inner` is `A_k, b_k`; `outer` is `W_k` for residual
/// blocks.
#[derive(Debug, Clone, Copy)]
struct Stage {
    inner: Dense,
    outer: Option<Dense>,
}

#[derive(Debug, Clone)]
struct Layout {
    stages: Vec<Stage>,
    head: Dense,
    total: usize,
}

impl Layout {
    fn of(arch: &MlpArch) -> Self {
        let mut offset = 0;
        let mut dense = |rows: usize, cols: usize, bias: bool| {
            let weight = offset;
            offset += rows * cols;
            let bias = bias.then(|| {
                let b = offset;
                offset += rows;
                b
            });
            Dense {
                rows,
                cols,
                weight,
                bias,
            }
        };
        let mut stages = Vec::with_capacity(arch.hidden.len());
        let mut width = arch.input_dim;
        for &w in &arch.hidden {
            if arch.residual {
                let inner = dense(w, arch.input_dim, true);
                let outer = dense(arch.input_dim, w, false);
                stages.push(Stage {
                    inner,
                    outer: Some(outer),
                });
            } else {
                stages.push(Stage {
                    inner: dense(w, width, true),
                    outer: None,
                });
                width = w;
            }
        }
        let head = dense(arch.output_dim, width, false);
        Layout {
            stages,
            head,
            total: offset,
        }
    }
}

/// `Θ` with weights drawn from `N(0, 2/fan_in)` (ReLU) or `N(0, 1/fan_in)`
/// (tanh) and biases per `arch.bias_init`; deterministic in `seed`.
pub fn mlp_init(arch: &MlpArch, seed: u64) -> MlpParams {
    let layout = Layout::of(arch);
    let mut values = vec![0.0; layout.total];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fill = |d: &Dense| {
        let normal = Normal::new(0.0, arch.activation.init_variance(d.cols).sqrt())
            .expect("finite variance");
        for v in &mut values[d.weight..d.weight + d.rows * d.cols] {
            *v = normal.sample(&mut rng);
        }
        if let (Some(b), BiasInit::Uniform) = (d.bias, arch.bias_init) {
            let r = 1.0 / (d.cols as f64).sqrt();
            for v in &mut values[b..b + d.rows] {
                *v = rng.random_range(-r..r);
            }
        }
    };
    for stage in &layout.stages {
        fill(&stage.inner);
        if let Some(outer) = &stage.outer {
            fill(outer);
        }
    }
    fill(&layout.head);
    MlpParams { values }
}

/// `C = X · Dᵀ (+ b)` for a batch `X` of `n` rows.
fn dense_forward(theta: &[f64], d: &Dense, x: &[f64], n: usize, out: &mut [f64]) {
    if let Some(b) = d.bias {
        let bias = &theta[b..b + d.rows];
        for row in out.chunks_exact_mut(d.rows) {
            row.copy_from_slice(bias);
        }
    }
    let beta = if d.bias.is_some() { 1.0 } else { 0.0 };
    let w = &theta[d.weight..d.weight + d.rows * d.cols];
    // SAFETY: slices are sized n×cols, rows×cols and n×rows and the strides
    // describe row-major storage (the weight is read transposed).
    unsafe {
        matrixmultiply::dgemm(
            n,
            d.cols,
            d.rows,
            1.0,
            x.as_ptr(),
            d.cols as isize,
            1,
            w.as_ptr(),
            1,
            d.cols as isize,
            beta,
            out.as_mut_ptr(),
            d.rows as isize,
            1,
        );
    }
}

/// Accumulates `∂W += Gᵀ·X`, `∂b += Σ G`, and optionally writes
/// `∂X = G·W` (overwriting or accumulating).
fn dense_backward(
    theta: &[f64],
    d: &Dense,
    x: &[f64],
    g: &[f64],
    n: usize,
    grad: &mut [f64],
    dx: Option<(&mut [f64], bool)>,
) {
    let gw = &mut grad[d.weight..d.weight + d.rows * d.cols];
    // SAFETY: G is n×rows, X is n×cols, ∂W is rows×cols, all row-major.
    unsafe {
        matrixmultiply::dgemm(
            d.rows,
            n,
            d.cols,
            1.0,
            g.as_ptr(),
            1,
            d.rows as isize,
            x.as_ptr(),
            d.cols as isize,
            1,
            1.0,
            gw.as_mut_ptr(),
            d.cols as isize,
            1,
        );
    }
    if let Some(b) = d.bias {
        let gb = &mut grad[b..b + d.rows];
        for row in g.chunks_exact(d.rows) {
            for (acc, v) in gb.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
    if let Some((dx, accumulate)) = dx {
        let w = &theta[d.weight..d.weight + d.rows * d.cols];
        let beta = if accumulate { 1.0 } else { 0.0 };
        // SAFETY: G is n×rows, W is rows×cols, ∂X is n×cols.
        unsafe {
            matrixmultiply::dgemm(
                n,
                d.rows,
                d.cols,
                1.0,
                g.as_ptr(),
                d.rows as isize,
                1,
                w.as_ptr(),
                d.cols as isize,
                1,
                beta,
                dx.as_mut_ptr(),
                d.cols as isize,
                1,
            );
        }
    }
}

/// Intermediates of a forward pass, consumed by [`mlp_backward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    n: usize,
    /// Stage inputs `h_{k−1}`, then the head input `h_L`. Left empty where
    /// the input is the previous stage's activation.
    states: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl ForwardCache {
    fn input_of(&self, k: usize) -> &[f64] {
        if self.states[k].is_empty() && k > 0 {
            &self.post[k - 1]
        } else {
            &self.states[k]
        }
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn batch_len(&self) -> usize {
        self.n
    }
}

fn check_shapes(theta: &MlpParams, arch: &MlpArch, inputs: &[f64]) -> Result<usize> {
    let layout_len = arch.param_count();
    if theta.values.len() != layout_len {
        return Err(Error::Shape(alloc::format!(
            "Θ has {} entries, architecture needs {layout_len}",
            theta.values.len()
        )));
    }
    if !inputs.len().is_multiple_of(arch.input_dim) {
        return Err(Error::Shape(alloc::format!(
            "{} input values is not a multiple of input_dim {}",
            inputs.len(),
            arch.input_dim
        )));
    }
    Ok(inputs.len() / arch.input_dim)
}

/// Forward pass keeping the intermediates needed for reverse mode.
pub fn mlp_forward_cached(
    theta: &MlpParams,
    arch: &MlpArch,
    inputs: &[f64],
) -> Result<ForwardCache> {
    let n = check_shapes(theta, arch, inputs)?;
    let layout = Layout::of(arch);
    let t = &theta.values;
    let act = arch.activation;
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(layout.stages.len() + 1);
    let mut post: Vec<Vec<f64>> = Vec::with_capacity(layout.stages.len());
    states.push(inputs.to_vec());
    for (k, stage) in layout.stages.iter().enumerate() {
        let h: &[f64] = if k == 0 || !states[k].is_empty() {
            &states[k]
        } else {
            &post[k - 1]
        };
        let mut a = vec![0.0; n * stage.inner.rows];
        dense_forward(t, &stage.inner, h, n, &mut a);
        a.iter_mut().for_each(|v| *v = act.apply(*v));
        let next = match &stage.outer {
            Some(outer) => {
                let mut r = vec![0.0; n * outer.rows];
                dense_forward(t, outer, &a, n, &mut r);
                for (r, h) in r.iter_mut().zip(h) {
                    *r += h;
                }
                r
            }
            None => Vec::new(),
        };
        states.push(next);
        post.push(a);
    }
    let last = layout.stages.len();
    let mut output = vec![0.0; n * arch.output_dim];
    let h: &[f64] = if last == 0 || !states[last].is_empty() {
        &states[last]
    } else {
        &post[last - 1]
    };
    dense_forward(t, &layout.head, h, n, &mut output);
    Ok(ForwardCache {
        n,
        states,
        post,
        output,
    })
}

/// Outputs for a row-major batch of inputs (`n × input_dim` → `n × output_dim`).
pub fn mlp_forward(theta: &MlpParams, arch: &MlpArch, inputs: &[f64]) -> Result<Vec<f64>> {
    Ok(mlp_forward_cached(theta, arch, inputs)?.output)
}

/// Gradient of `Σ_i ⟨y_i, g_i⟩` over `Θ`, recomputing the forward pass.
pub fn mlp_backward(
    theta: &MlpParams,
    arch: &MlpArch,
    inputs: &[f64],
    upstream: &[f64],
) -> Result<Vec<f64>> {
    let cache = mlp_forward_cached(theta, arch, inputs)?;
    mlp_backward_cached(theta, arch, &cache, upstream)
}

pub fn mlp_backward_cached(
    theta: &MlpParams,
    arch: &MlpArch,
    cache: &ForwardCache,
    upstream: &[f64],
) -> Result<Vec<f64>> {
    let n = cache.n;
    if upstream.len() != n * arch.output_dim {
        return Err(Error::Shape(alloc::format!(
            "upstream gradient has {} entries, expected {}",
            upstream.len(),
            n * arch.output_dim
        )));
    }
    let layout = Layout::of(arch);
    let t = &theta.values;
    let mut grad = vec![0.0; layout.total];
    let last = cache.states.len() - 1;
    let mut dh = vec![0.0; n * layout.head.cols];
    dense_backward(
        t,
        &layout.head,
        cache.input_of(last),
        upstream,
        n,
        &mut grad,
        Some((&mut dh, false)),
    );

    for (k, stage) in layout.stages.iter().enumerate().rev() {
        let a = &cache.post[k];
        let h_in = cache.input_of(k);
        let mut dz = match &stage.outer {
            Some(outer) => {
                let mut da = vec![0.0; n * outer.cols];
                dense_backward(t, outer, a, &dh, n, &mut grad, Some((&mut da, false)));
                da
            }
            None => dh.clone(),
        };
        for (d, &a) in dz.iter_mut().zip(a) {
            *d *= arch.activation.derivative(a);
        }
        match &stage.outer {
            // Skip connection: ∂h_{k−1} = ∂h_k + ∂z·A_k.
            Some(_) => dense_backward(
                t,
                &stage.inner,
                h_in,
                &dz,
                n,
                &mut grad,
                Some((&mut dh, true)),
            ),
            None if k > 0 => {
                let mut next = vec![0.0; n * stage.inner.cols];
                dense_backward(
                    t,
                    &stage.inner,
                    h_in,
                    &dz,
                    n,
                    &mut grad,
                    Some((&mut next, false)),
                );
                dh = next;
            }
            None => dense_backward(t, &stage.inner, h_in, &dz, n, &mut grad, None),
        }
    }
    Ok(grad)
}

/// Bias-corrected Adam state for a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update of `params` in place. A gradient with any non-finite
/// entry is rejected and leaves both `params` and `state` untouched.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != grads.len() {
        return Err(Error::Shape(
            "Adam parameter, gradient and moment lengths differ".into(),
        ));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn arch(hidden: &[usize], act: Activation, residual: bool, inp: usize, out: usize) -> MlpArch {
        MlpArch {
            input_dim: inp,
            output_dim: out,
            hidden: hidden.to_vec(),
            activation: act,
            residual,
            bias_init: BiasInit::Zero,
        }
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = arch(&[16, 8], Activation::Relu, false, 3, 2);
        let p = mlp_init(&a, 11);
        assert_eq!(p, mlp_init(&a, 11));
        assert_ne!(p, mlp_init(&a, 12));
        let layout = Layout::of(&a);
        for s in &layout.stages {
            let b = s.inner.bias.unwrap();
            assert!(p.values[b..b + s.inner.rows].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn uniform_biases_stay_in_range() {
        let a = MlpArch {
            bias_init: BiasInit::Uniform,
            ..arch(&[400, 400], Activation::Relu, true, 3, 2)
        };
        let p = mlp_init(&a, 5);
        let layout = Layout::of(&a);
        for s in &layout.stages {
            let b = s.inner.bias.unwrap();
            let r = 1.0 / (s.inner.cols as f64).sqrt();
            let bias = &p.values[b..b + s.inner.rows];
            assert!(bias.iter().all(|v| v.abs() < r));
            let mean = bias.iter().sum::<f64>() / bias.len() as f64;
            let var = bias.iter().map(|v| v * v).sum::<f64>() / bias.len() as f64;
            assert!(
                mean.abs() < 4.0 * (r * r / 3.0 / bias.len() as f64).sqrt(),
                "mean {mean}"
            );
            assert!((var - r * r / 3.0).abs() < 0.35 * r * r / 3.0, "var {var}");
        }
        // Weights are drawn before biases, so they match the zero-bias init.
        let z = mlp_init(
            &MlpArch {
                bias_init: BiasInit::Zero,
                ..a.clone()
            },
            5,
        );
        let d = layout.stages[0].inner;
        assert_eq!(
            p.values[d.weight..d.weight + d.rows * d.cols],
            z.values[d.weight..d.weight + d.rows * d.cols]
        );
    }

    #[test]
    fn relu_init_variance() {
        let a = arch(&[256, 256], Activation::Relu, false, 2, 1);
        let p = mlp_init(&a, 3);
        let layout = Layout::of(&a);
        let d = layout.stages[1].inner;
        let w = &p.values[d.weight..d.weight + d.rows * d.cols];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64;
        let target = 2.0 / 256.0;
        assert!((var - target).abs() < 0.2 * target, "variance {var}");
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let a = arch(&[5, 4], Activation::Relu, false, 2, 1);
        let p = MlpParams {
            values: vec![0.0; a.param_count()],
        };
        let y = mlp_forward(&p, &a, &[0.3, -1.0, 2.0, 5.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn single_unit_by_hand() {
        // relu(2·1 + (−1))·3 = 3
        let a = arch(&[1], Activation::Relu, false, 1, 1);
        let p = MlpParams {
            values: vec![2.0, -1.0, 3.0],
        };
        assert_eq!(mlp_forward(&p, &a, &[1.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn residual_block_by_hand() {
        // h1 = W σ(A x + b) + x, y = R h1 with 1-d state and one hidden unit.
        let a = arch(&[1], Activation::Relu, true, 1, 1);
        // layout: A(1×1), b(1), W(1×1), R(1×1)
        let p = MlpParams {
            values: vec![2.0, 0.5, -3.0, 4.0],
        };
        let x = 1.5;
        let expected = 4.0 * (-3.0 * (2.0 * x + 0.5f64).max(0.0) + x);
        assert_eq!(mlp_forward(&p, &a, &[x]).unwrap(), vec![expected]);
    }

    #[test]
    fn batch_equals_per_sample() {
        let a = arch(&[7, 9], Activation::Tanh, false, 3, 2);
        let p = mlp_init(&a, 5);
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let batch = mlp_forward(&p, &a, &xs).unwrap();
        for (i, x) in xs.chunks(3).enumerate() {
            let single = mlp_forward(&p, &a, x).unwrap();
            assert_eq!(&batch[2 * i..2 * i + 2], &single[..]);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = arch(&[4], Activation::Tanh, false, 2, 1);
        let p = mlp_init(&a, 1);
        assert!(matches!(
            mlp_forward(&p, &a, &[1.0, 2.0, 3.0]),
            Err(Error::Shape(_))
        ));
        let short = MlpParams {
            values: vec![0.0; 3],
        };
        assert!(mlp_forward(&short, &a, &[1.0, 2.0]).is_err());
        assert!(mlp_backward(&p, &a, &[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let a = arch(&[6, 6], Activation::Relu, true, 2, 1);
        let p = mlp_init(&a, 2);
        let g = mlp_backward(&p, &a, &[0.1, 0.2, -0.3, 0.4], &[0.0, 0.0]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adam_behaviour() {
        let mut theta = vec![1.0, -2.0];
        let mut st = AdamState::new(2);
        adam_step(&mut theta, &[0.0, 0.0], &mut st, 0.1).unwrap();
        assert_eq!(theta, vec![1.0, -2.0]);
        assert_eq!(st.step, 1);

        adam_step(&mut theta, &[0.5, -3.0], &mut st, 0.01).unwrap();
        assert!(theta[0] < 1.0 && theta[1] > -2.0);

        let before = (theta.clone(), st.clone());
        assert_eq!(
            adam_step(&mut theta, &[f64::NAN, 1.0], &mut st, 0.01),
            Err(Error::NonFiniteGradient)
        );
        assert_eq!((theta, st), before);
    }

    #[test]
    fn adam_minimizes_scalar_quadratic() {
        // Reference: the same recurrence written out for one scalar.
        let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8, 0.1);
        let (mut x, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for t in 1..=200 {
            let g = x;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            x -= lr * (m / (1.0 - b1.powi(t))) / ((v / (1.0 - b2.powi(t))).sqrt() + eps);
        }
        let mut theta = vec![1.0];
        let mut st = AdamState::new(1);
        for _ in 0..200 {
            let g = vec![theta[0]];
            adam_step(&mut theta, &g, &mut st, lr).unwrap();
        }
        assert!(theta[0].abs() < 1e-2, "θ = {}", theta[0]);
        assert!((theta[0] - x).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences_on_small_nets() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (hidden, residual) in [(vec![5, 4], false), (vec![6, 3], true)] {
            let a = arch(&hidden, Activation::Tanh, residual, 3, 2);
            let p = mlp_init(&a, 4);
            let xs: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let grad = mlp_backward(&p, &a, &xs, &g).unwrap();
            let obj = |theta: &MlpParams| -> f64 {
                let y = mlp_forward(theta, &a, &xs).unwrap();
                y.iter().zip(&g).map(|(y, g)| y * g).sum()
            };
            for i in 0..p.values.len() {
                let h = 1e-5;
                let mut plus = p.clone();
                plus.values[i] += h;
                let mut minus = p.clone();
                minus.values[i] -= h;
                let fd = (obj(&plus) - obj(&minus)) / (2.0 * h);
                assert!(
                    (fd - grad[i]).abs() < 1e-7 * (1.0 + fd.abs()),
                    "coord {i}: {fd} vs {}",
                    grad[i]
                );
            }
        }
    }
}
