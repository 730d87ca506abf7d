#![allow(dead_code)]

use hyco_core::experiments::{Dataset, Provenance};
use hyco_core::grid::{Domain2D, GridField2D, Point, Rect};
use hyco_core::hyco::{Bounds, InputMap, PhysicalModel, SyntheticModel};
use hyco_core::nn::{mlp_init, Activation, BiasInit, MlpArch, MlpParams};
use hyco_core::solvers::{solve_dirichlet, Solution, SolverConfig};
use hyco_core::{Error, Result};

/// `u(x, y) = λ₀·x + λ₁·y` on `[−1, 1]²`, exactly representable by a
/// bias-free linear network.
pub struct AffineModel {
    pub domain: Domain2D,
    /// Solves with `λ₀` above this fail.
    pub fail_above: f64,
}

impl AffineModel {
    pub fn new() -> Self {
        AffineModel {
            domain: Domain2D::square(-1.0, 1.0, 9).unwrap(),
            fail_above: f64::INFINITY,
        }
    }
}

impl PhysicalModel for AffineModel {
    fn param_names(&self) -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            space: self.domain.rect(),
            time: None,
        }
    }

    fn solve(&self, lambda: &[f64]) -> Result<Solution> {
        if lambda[0] > self.fail_above {
            return Err(Error::Divergence { step: 0 });
        }
        let (a, b) = (lambda[0], lambda[1]);
        Ok(Solution::Static(GridField2D::from_fn(
            self.domain,
            |x, y| [a * x + b * y],
        )))
    }
}

/// `−Δu + u = s·sin x sin y` on `[−π, π]²`: the solution is linear in the
/// source amplitude `s`.
pub struct SourceModel {
    pub cfg: SolverConfig,
}

impl SourceModel {
    pub fn new(n: usize) -> Self {
        let pi = std::f64::consts::PI;
        SourceModel {
            cfg: SolverConfig::stationary(Domain2D::square(-pi, pi, n).unwrap()),
        }
    }
}

impl PhysicalModel for SourceModel {
    fn param_names(&self) -> Vec<String> {
        vec!["s".into()]
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            space: self.cfg.domain.rect(),
            time: None,
        }
    }

    fn solve(&self, lambda: &[f64]) -> Result<Solution> {
        let d = &self.cfg.domain;
        let ones = vec![1.0; d.node_count()];
        let f: Vec<f64> = d
            .nodes()
            .map(|(x, y)| lambda[0] * x.sin() * y.sin())
            .collect();
        Ok(Solution::Static(solve_dirichlet(
            &self.cfg,
            &ones,
            Some(&ones),
            &f,
        )?))
    }
}

pub fn dataset(points: Vec<Point>, values: Vec<f64>, components: usize) -> Dataset {
    Dataset {
        points,
        values,
        components,
        provenance: Provenance {
            scenario: "test".into(),
            region: Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            seed: 0,
            noise: 0.0,
        },
    }
}

pub fn arch(hidden: &[usize], activation: Activation, inputs: usize, outputs: usize) -> MlpArch {
    MlpArch {
        input_dim: inputs,
        output_dim: outputs,
        hidden: hidden.to_vec(),
        activation,
        residual: false,
        bias_init: BiasInit::Uniform,
    }
}

/// Bias-free linear network `u = θ₀·x + θ₁·y`.
pub fn linear_net(theta: [f64; 2]) -> SyntheticModel {
    SyntheticModel::new(
        arch(&[], Activation::Tanh, 2, 1),
        MlpParams {
            values: theta.to_vec(),
        },
        InputMap::identity(2),
    )
    .unwrap()
}

pub fn tanh_net(hidden: &[usize], outputs: usize, seed: u64) -> SyntheticModel {
    let a = arch(hidden, Activation::Tanh, 2, outputs);
    let theta = mlp_init(&a, seed);
    SyntheticModel::new(a, theta, InputMap::identity(2)).unwrap()
}

pub fn grid_points(r: &Rect, n: usize) -> Vec<Point> {
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let s = i as f64 / (n - 1) as f64;
            let t = j as f64 / (n - 1) as f64;
            let (x, y) = r.lerp(s, t);
            pts.push(Point::xy(x, y));
        }
    }
    pts
}
