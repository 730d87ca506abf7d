//! Finite-difference forward solvers producing the physical prediction for a
//! given parameter set.

mod grayscott;
mod heat;
pub mod linear;

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    darcy_kappa, helmholtz_coeffs, helmholtz_forcing, DarcyParams, HelmholtzParams,
};
use crate::grid::{Domain2D, GridField2D, Point, SpaceTimeField};
use crate::{Error, Result};

pub use grayscott::{grayscott_step_bound, simulate_grayscott, simulate_grayscott_from};
pub use heat::{heat_step_bound, simulate_heat, simulate_heat_from};
pub use linear::DirichletOperator;

/// Any nodal value above this magnitude aborts time stepping.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub domain: Domain2D,
    /// Number of time steps from 0 to `t_end` (dynamic problems).
    pub time_steps: usize,
    pub t_end: f64,
    /// Every `store_stride`-th step is kept as a frame.
    pub store_stride: usize,
    pub linear_tol: f64,
    pub max_lin_iters: usize,
}

impl SolverConfig {
    pub fn stationary(domain: Domain2D) -> Self {
        SolverConfig {
            domain,
            time_steps: 2,
            t_end: 1.0,
            store_stride: 1,
            linear_tol: 1e-10,
            max_lin_iters: 20_000,
        }
    }

    pub fn dynamic(domain: Domain2D, t_end: f64, time_steps: usize, store_stride: usize) -> Self {
        SolverConfig {
            time_steps,
            t_end,
            store_stride,
            ..Self::stationary(domain)
        }
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.time_steps as f64
    }

    pub fn validate(&self, dynamic: bool) -> Result<()> {
        self.domain.validate()?;
        if !(self.linear_tol > 0.0) {
            return Err(Error::invalid("linear_tol", "must be positive"));
        }
        if self.max_lin_iters == 0 {
            return Err(Error::invalid("max_lin_iters", "must be positive"));
        }
        if dynamic {
            if self.time_steps < 2 {
                return Err(Error::invalid("time_steps", "at least 2 steps required"));
            }
            if !(self.t_end > 0.0) {
                return Err(Error::invalid("t_end", "must be positive"));
            }
            if self.store_stride == 0 || !self.time_steps.is_multiple_of(self.store_stride) {
                return Err(Error::invalid(
                    "store_stride",
                    "must be positive and divide time_steps",
                ));
            }
        }
        Ok(())
    }
}

/// Output of a forward solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Static(GridField2D),
    Dynamic(SpaceTimeField),
}

impl Solution {
    pub fn components(&self) -> usize {
        match self {
            Solution::Static(f) => f.components(),
            Solution::Dynamic(s) => s.components(),
        }
    }

    pub fn domain(&self) -> &Domain2D {
        match self {
            Solution::Static(f) => f.domain(),
            Solution::Dynamic(s) => s.domain(),
        }
    }

    /// Interpolated value at `p` (time ignored for static solutions).
    pub fn sample_into(&self, p: &Point, out: &mut [f64]) -> Result<()> {
        match self {
            Solution::Static(f) => f.sample_into(p.x, p.y, out),
            Solution::Dynamic(s) => s.sample_into(p.x, p.y, p.t, out),
        }
    }

    /// Values at all `points`, flattened point-major.
    pub fn sample_points(&self, points: &[Point]) -> Result<Vec<f64>> {
        let k = self.components();
        let mut out = vec![0.0; points.len() * k];
        for (p, o) in points.iter().zip(out.chunks_exact_mut(k)) {
            self.sample_into(p, o)?;
        }
        Ok(out)
    }
}

/// Nodal values of `f` over the whole grid.
pub(crate) fn nodal(domain: &Domain2D, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    domain.nodes().map(|(x, y)| f(x, y)).collect()
}

/// Solves `−∇·(κ∇u) + r·u = f` with homogeneous Dirichlet data; `kappa`,
/// `reaction` and `forcing` are nodal.
pub fn solve_dirichlet(
    cfg: &SolverConfig,
    kappa: &[f64],
    reaction: Option<&[f64]>,
    forcing: &[f64],
) -> Result<GridField2D> {
    let d = &cfg.domain;
    let op = DirichletOperator::new(d, kappa, reaction);
    let mut rhs = Vec::with_capacity(op.unknowns());
    for j in 1..d.ny - 1 {
        for i in 1..d.nx - 1 {
            rhs.push(forcing[d.index(i, j)]);
        }
    }
    let interior = op.solve(&rhs, cfg.linear_tol, cfg.max_lin_iters)?;
    let mut u = GridField2D::zeros(*d, 1);
    let nxi = d.nx - 2;
    let values = u.values_mut();
    for (p, v) in interior.iter().enumerate() {
        values[d.index(p % nxi + 1, p / nxi + 1)] = *v;
    }
    Ok(u)
}

/// `−∇·(κ∇u) + η²u = f` with the fixed manufactured forcing.
pub fn solve_helmholtz(p: &HelmholtzParams, cfg: &SolverConfig) -> Result<GridField2D> {
    solve_helmholtz_with(p, cfg, helmholtz_forcing)
}

pub fn solve_helmholtz_with(
    p: &HelmholtzParams,
    cfg: &SolverConfig,
    forcing: impl Fn(f64, f64) -> f64,
) -> Result<GridField2D> {
    cfg.validate(false)?;
    let d = &cfg.domain;
    let kappa = nodal(d, |x, y| helmholtz_coeffs(x, y, p).0);
    let eta2 = nodal(d, |x, y| helmholtz_coeffs(x, y, p).1.powi(2));
    let f = nodal(d, forcing);
    solve_dirichlet(cfg, &kappa, Some(&eta2), &f)
}

/// `−∇·(κ∇u) = 1` with homogeneous Dirichlet data.
pub fn solve_darcy(p: &DarcyParams, cfg: &SolverConfig) -> Result<GridField2D> {
    cfg.validate(false)?;
    let d = &cfg.domain;
    let kappa = nodal(d, |x, y| darcy_kappa(x, y, p));
    let f = vec![1.0; d.node_count()];
    solve_dirichlet(cfg, &kappa, None, &f)
}
