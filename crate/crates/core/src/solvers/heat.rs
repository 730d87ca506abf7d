use alloc::vec;
use alloc::vec::Vec;

use super::{nodal, SolverConfig, DIVERGENCE_THRESHOLD};
use crate::coefficients::{heat_initial, heat_kappa, HeatParams};
use crate::grid::{Domain2D, GridField2D, SpaceTimeField};
use crate::solvers::linear::DirichletOperator;
use crate::{Error, Result};

/// Extent of the classical RK4 stability region on the negative real axis.
const RK4_REAL_STABILITY: f64 = 2.785;

/// Largest stable RK4 step for the diffusion operator, from the Gershgorin
/// bound `λ_max ≤ 2·max(diag)`.
pub fn heat_step_bound(domain: &Domain2D, kappa: &[f64]) -> f64 {
    let op = DirichletOperator::new(domain, kappa, None);
    let max_diag = op.diagonal().iter().copied().fold(0.0, f64::max);
    RK4_REAL_STABILITY / (2.0 * max_diag)
}

/// `u_t = ∇·(κ∇u)` with `u = 0` on the boundary and the two-bump initial
/// datum, integrated by classical RK4.
pub fn simulate_heat(p: &HeatParams, cfg: &SolverConfig) -> Result<SpaceTimeField> {
    let kappa = nodal(&cfg.domain, |x, y| heat_kappa(x, y, p));
    let u0 = nodal(&cfg.domain, heat_initial);
    simulate_heat_from(&kappa, &u0, cfg)
}

/// Same integrator for arbitrary nodal `κ` and initial values. Boundary
/// entries of `u0` are ignored (forced to zero).
pub fn simulate_heat_from(kappa: &[f64], u0: &[f64], cfg: &SolverConfig) -> Result<SpaceTimeField> {
    cfg.validate(true)?;
    let d = cfg.domain;
    let dt = cfg.dt();
    let bound = heat_step_bound(&d, kappa);
    if dt > bound {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let op = DirichletOperator::new(&d, kappa, None).padded();
    let n = d.node_count();
    let mut u = u0.to_vec();
    for (idx, v) in u.iter_mut().enumerate() {
        if d.is_boundary(idx % d.nx, idx / d.nx) {
            *v = 0.0;
        }
    }

    let mut frames = Vec::with_capacity(cfg.time_steps / cfg.store_stride + 1);
    frames.push(GridField2D::from_values(d, 1, u.clone())?);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut stage = vec![0.0; n];
    for step in 1..=cfg.time_steps {
        // k = −A·u
        op.apply(&u, &mut k1);
        for i in 0..n {
            stage[i] = u[i] - 0.5 * dt * k1[i];
        }
        op.apply(&stage, &mut k2);
        for i in 0..n {
            stage[i] = u[i] - 0.5 * dt * k2[i];
        }
        op.apply(&stage, &mut k3);
        for i in 0..n {
            stage[i] = u[i] - dt * k3[i];
        }
        op.apply(&stage, &mut k4);
        let mut peak = 0.0f64;
        for i in 0..n {
            u[i] -= dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            peak = peak.max(u[i].abs());
        }
        if !(peak <= DIVERGENCE_THRESHOLD) {
            return Err(Error::Divergence { step });
        }
        if step % cfg.store_stride == 0 {
            frames.push(GridField2D::from_values(d, 1, u.clone())?);
        }
    }
    SpaceTimeField::new(0.0, cfg.t_end, frames)
}
