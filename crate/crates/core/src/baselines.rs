//! Comparison methods: physics-only fitting, a data-only network, and a PINN
//! whose derivatives are finite differences of network evaluations.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    darcy_kappa, grayscott_initial, heat_initial, heat_kappa, helmholtz_coeffs, helmholtz_forcing,
    DarcyParams, TwoBumpParams,
};
use crate::experiments::{Dataset, Reference, Scenario, ScenarioKind};
use crate::grid::Point;
use crate::hyco::{
    mse, physical_grad_fd, stopping_check, stream, synthetic_update, Clock, EpochRecord, Method,
    PhysOptimizer, PhysicalModel, SyntheticModel, Timings, TrainConfig, TrainResult, STREAM_BATCH,
    STREAM_COLLOCATION,
};
use crate::nn::{adam_step, mlp_backward_cached, mlp_forward_cached, AdamState};
use crate::{Error, Result};

fn empty_record(epoch: usize) -> EpochRecord {
    EpochRecord {
        epoch,
        l_syn: None,
        l_phy: None,
        l_int: None,
        lambda: Vec::new(),
        e_d: None,
        e_s: None,
        e_p: None,
        e_d_syn: None,
        e_s_syn: None,
    }
}

/// Classical parameter fitting: Adam (or gradient descent) on `L_phy` alone,
/// with the same finite-difference gradients and stopping rule as the
/// cooperative engine.
pub fn fit_physics_only(
    model: &dyn PhysicalModel,
    data: &Dataset,
    cfg: &TrainConfig,
    lambda0: &[f64],
    reference: Option<&Reference>,
    clock: &dyn Clock,
) -> Result<TrainResult> {
    cfg.validate()?;
    if data.components != model.output_dim() {
        return Err(Error::Shape("dataset and model output dims differ".into()));
    }
    let start = clock.seconds();
    let names = model.param_names();
    let scale = model.param_scale();
    let k = data.components;
    let mut lambda = lambda0.to_vec();
    model.project(&mut lambda);
    let mut solution = model.solve(&lambda)?;
    let mut adam = AdamState::new(lambda.len());
    let mut window: Vec<Vec<f64>> = vec![lambda.iter().map(|v| v / scale).collect()];
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut timings = Timings::default();
    let (mut stop_epoch, mut aborted) = (None, None);

    for epoch in 1..=cfg.epochs {
        let step = (|| -> Result<_> {
            let l_phy = mse(&solution.sample_points(&data.points)?, &data.values, k);
            let t0 = clock.seconds();
            let mut z: Vec<f64> = lambda.iter().map(|v| v / scale).collect();
            let grad = physical_grad_fd(&z, &names, cfg.fd_rel_step, cfg.parallel, |w| {
                let l: Vec<f64> = w.iter().map(|v| v * scale).collect();
                let sol = model.solve(&l)?;
                let loss = mse(&sol.sample_points(&data.points)?, &data.values, k);
                if loss.is_finite() {
                    Ok(loss)
                } else {
                    Err(Error::NonFiniteGradient)
                }
            })?;
            let mut adam_next = adam.clone();
            match cfg.phy_optimizer {
                PhysOptimizer::Adam => adam_step(&mut z, &grad, &mut adam_next, cfg.lr_phy)?,
                PhysOptimizer::Gd => z
                    .iter_mut()
                    .zip(&grad)
                    .for_each(|(z, g)| *z -= cfg.lr_phy * g),
            }
            let mut next: Vec<f64> = z.iter().map(|v| v * scale).collect();
            model.project(&mut next);
            let t1 = clock.seconds();
            let sol = if next != lambda {
                Some(model.solve(&next)?)
            } else {
                None
            };
            let t2 = clock.seconds();
            Ok((l_phy, next, sol, adam_next, t1 - t0, t2 - t1))
        })();
        let (l_phy, next, sol, adam_next, t_step, t_solve) = match step {
            Ok(v) => v,
            Err(e) => {
                aborted = Some(e.to_string());
                break;
            }
        };
        timings.lambda_step += t_step;
        timings.solve += t_solve;
        lambda = next;
        adam = adam_next;
        if let Some(s) = sol {
            solution = s;
        }

        let mut rec = empty_record(epoch);
        rec.l_phy = Some(l_phy);
        rec.lambda = lambda.clone();
        window.push(lambda.iter().map(|v| v / scale).collect());
        if window.len() > cfg.stop_window + 1 {
            window.remove(0);
        }
        let stop = cfg.early_stop && stopping_check(&window, cfg.stop_window, cfg.stop_tol);
        let t = clock.seconds();
        rec.e_d = Some(mse(&solution.sample_points(&data.points)?, &data.values, k));
        if let Some(r) = reference {
            rec.e_p = Some(r.parameter_error(&lambda));
            if epoch % cfg.eval_every == 0 || epoch == cfg.epochs || stop {
                rec.e_s = Some(r.solution_error(&solution.sample_points(&r.points)?));
            }
        }
        timings.eval += clock.seconds() - t;
        history.push(rec);
        if stop {
            stop_epoch = Some(epoch);
            break;
        }
    }
    let physical = reference
        .map(|r| r.metrics(|p| solution.sample_points(p), Some(&lambda), data))
        .transpose()?;
    timings.total = clock.seconds() - start;
    Ok(TrainResult {
        method: Method::PhysicsOnly,
        history,
        lambda: Some(lambda),
        synthetic: None,
        stop_epoch,
        physical,
        synthetic_metrics: None,
        timings,
        aborted,
    })
}

/// The network alone, trained by Adam on `α·L_syn`. History rows carry the
/// network's own `e_d`/`e_s`.
pub fn train_nn_only(
    mut syn: SyntheticModel,
    data: &Dataset,
    cfg: &TrainConfig,
    reference: Option<&Reference>,
    clock: &dyn Clock,
) -> Result<TrainResult> {
    cfg.validate()?;
    let start = clock.seconds();
    let k = data.components;
    let mut adam = AdamState::new(syn.theta.values.len());
    let mut rng = stream(cfg.seed, STREAM_BATCH);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut timings = Timings::default();
    let mut aborted = None;
    for epoch in 1..=cfg.epochs {
        let t0 = clock.seconds();
        let (points, values) = match cfg.batch_size {
            Some(b) if b < data.len() => {
                let idx = rand::seq::index::sample(&mut rng, data.len(), b);
                let pts: Vec<Point> = idx.iter().map(|i| data.points[i]).collect();
                let vals: Vec<f64> = idx
                    .iter()
                    .flat_map(|i| data.value(i).iter().copied())
                    .collect();
                (pts, vals)
            }
            _ => (data.points.clone(), data.values.clone()),
        };
        let mut next = syn.clone();
        let mut adam_next = adam.clone();
        match synthetic_update(
            &mut next,
            &mut adam_next,
            cfg.lr_syn,
            &points,
            &values,
            cfg.alpha,
        ) {
            Ok(l) if l.is_finite() => {
                syn = next;
                adam = adam_next;
                let mut rec = empty_record(epoch);
                rec.l_syn = Some(l);
                timings.theta_step += clock.seconds() - t0;
                if epoch % cfg.eval_every == 0 || epoch == cfg.epochs {
                    let t = clock.seconds();
                    let pred = syn.predict(&data.points)?;
                    rec.e_d = Some(mse(&pred, &data.values, k));
                    if let Some(r) = reference {
                        rec.e_s = Some(r.solution_error(&syn.predict(&r.points)?));
                    }
                    timings.eval += clock.seconds() - t;
                }
                history.push(rec);
            }
            Ok(_) => {
                aborted = Some(Error::NonFiniteLoss { epoch }.to_string());
                break;
            }
            Err(e) => {
                aborted = Some(e.to_string());
                break;
            }
        }
    }
    let synthetic_metrics = reference
        .map(|r| r.metrics(|p| syn.predict(p), None, data))
        .transpose()?;
    timings.total = clock.seconds() - start;
    Ok(TrainResult {
        method: Method::NnOnly,
        history,
        lambda: None,
        synthetic: Some(syn),
        stop_epoch: None,
        physical: None,
        synthetic_metrics,
        timings,
        aborted,
    })
}

/// The PDE whose residual the PINN penalizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Pde {
    /// `−∇·(κ∇u) + η²u = f`.
    Helmholtz,
    /// `−∇·(κ∇u) = 1`.
    Darcy,
    /// `u_t − ∇·(κ∇u) = 0`.
    Heat,
    /// Standard-sign Gray–Scott with diffusivities in `Λ`.
    Grayscott { feed: f64, kill: f64 },
}

impl Pde {
    pub fn of(scenario: &Scenario) -> Self {
        match scenario.kind {
            ScenarioKind::Helmholtz => Pde::Helmholtz,
            ScenarioKind::Darcy => Pde::Darcy,
            ScenarioKind::Heat => Pde::Heat,
            ScenarioKind::Grayscott => Pde::Grayscott {
                feed: scenario.feed,
                kill: scenario.kill,
            },
        }
    }

    fn components(self) -> usize {
        match self {
            Pde::Grayscott { .. } => 2,
            _ => 1,
        }
    }

    fn dynamic(self) -> bool {
        matches!(self, Pde::Heat | Pde::Grayscott { .. })
    }

    /// Stencil size: centre, east, west, north, south, and for dynamic
    /// problems later and earlier time.
    fn stencil_len(self) -> usize {
        if self.dynamic() {
            7
        } else {
            5
        }
    }
}

/// Collocation points of the PINN residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationSet {
    /// Points where the PDE residual is evaluated; each lies at least one
    /// differencing step inside the domain.
    pub interior: Vec<Point>,
    /// Boundary (and initial-time) points with their target values.
    pub boundary: Vec<Point>,
    pub boundary_values: Vec<f64>,
    /// Differencing steps `(h_x, h_y, h_t)`.
    pub h: [f64; 3],
}

impl CollocationSet {
    /// Uniform interior points, Dirichlet boundary points for bounded
    /// problems and initial-time points for dynamic ones.
    pub fn draw(scenario: &Scenario, seed: u64) -> Self {
        let mut rng = stream(seed, STREAM_COLLOCATION);
        let b = scenario.bounds();
        let r = b.space;
        let rel = scenario.pinn.h_rel;
        let (wx, wy) = (r.x_max - r.x_min, r.y_max - r.y_min);
        let h = [
            rel * wx,
            rel * wy,
            b.time.map_or(0.0, |(t0, t1)| rel * (t1 - t0)),
        ];
        let mut interior = Vec::with_capacity(scenario.pinn.interior);
        for _ in 0..scenario.pinn.interior {
            let x = r.x_min + h[0] + rng.random::<f64>() * (wx - 2.0 * h[0]);
            let y = r.y_min + h[1] + rng.random::<f64>() * (wy - 2.0 * h[1]);
            let t = b.time.map_or(0.0, |(t0, t1)| {
                t0 + h[2] + rng.random::<f64>() * (t1 - t0 - 2.0 * h[2])
            });
            interior.push(Point::xyt(x, y, t));
        }
        let mut boundary = Vec::with_capacity(scenario.pinn.boundary);
        let mut boundary_values = Vec::new();
        let perimeter = |rng: &mut rand_chacha::ChaCha8Rng| {
            let s = rng.random::<f64>();
            match rng.random_range(0..4) {
                0 => r.lerp(s, 0.0),
                1 => r.lerp(s, 1.0),
                2 => r.lerp(0.0, s),
                _ => r.lerp(1.0, s),
            }
        };
        for q in 0..scenario.pinn.boundary {
            match scenario.kind {
                ScenarioKind::Helmholtz | ScenarioKind::Darcy => {
                    let (x, y) = perimeter(&mut rng);
                    boundary.push(Point::xy(x, y));
                    boundary_values.push(0.0);
                }
                ScenarioKind::Heat if q % 2 == 0 => {
                    let (x, y) = perimeter(&mut rng);
                    let t = rng.random::<f64>() * scenario.t_end;
                    boundary.push(Point::xyt(x, y, t));
                    boundary_values.push(0.0);
                }
                ScenarioKind::Heat => {
                    let (x, y) = r.lerp(rng.random(), rng.random());
                    boundary.push(Point::xyt(x, y, 0.0));
                    boundary_values.push(heat_initial(x, y));
                }
                ScenarioKind::Grayscott => {
                    let (x, y) = r.lerp(rng.random(), rng.random());
                    boundary.push(Point::xyt(x, y, 0.0));
                    let (u, v) = grayscott_initial(x, y);
                    boundary_values.extend_from_slice(&[u, v]);
                }
            }
        }
        CollocationSet {
            interior,
            boundary,
            boundary_values,
            h,
        }
    }

    /// Interior stencil points followed by the boundary points.
    fn evaluation_points(&self, pde: Pde) -> Vec<Point> {
        let [hx, hy, ht] = self.h;
        let mut pts =
            Vec::with_capacity(self.interior.len() * pde.stencil_len() + self.boundary.len());
        for p in &self.interior {
            pts.push(*p);
            pts.push(Point::xyt(p.x + hx, p.y, p.t));
            pts.push(Point::xyt(p.x - hx, p.y, p.t));
            pts.push(Point::xyt(p.x, p.y + hy, p.t));
            pts.push(Point::xyt(p.x, p.y - hy, p.t));
            if pde.dynamic() {
                pts.push(Point::xyt(p.x, p.y, p.t + ht));
                pts.push(Point::xyt(p.x, p.y, p.t - ht));
            }
        }
        pts.extend_from_slice(&self.boundary);
        pts
    }
}

/// Residual at one interior point from the network values on its stencil
/// (`vals[s*k + c]`). Writes `r` and, when given, `∂r_c/∂vals[j]` into
/// `jac[c*len + j]`.
fn point_residual(
    pde: Pde,
    lambda: &[f64],
    p: &Point,
    h: [f64; 3],
    vals: &[f64],
    r: &mut [f64],
    jac: Option<&mut [f64]>,
) {
    let [hx, hy, ht] = h;
    let (ihx2, ihy2) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    let (x, y) = (p.x, p.y);
    // Divergence-form diffusion with κ at the faces: −∇·(κ∇u) ≈ Σ w_j u_j.
    let diffusion = |kappa: &dyn Fn(f64, f64) -> f64| {
        let (ke, kw) = (kappa(x + 0.5 * hx, y), kappa(x - 0.5 * hx, y));
        let (kn, ks) = (kappa(x, y + 0.5 * hy), kappa(x, y - 0.5 * hy));
        [
            (ke + kw) * ihx2 + (kn + ks) * ihy2,
            -ke * ihx2,
            -kw * ihx2,
            -kn * ihy2,
            -ks * ihy2,
        ]
    };
    match pde {
        Pde::Helmholtz | Pde::Darcy | Pde::Heat => {
            let mut w = [0.0; 7];
            let mut source = 0.0;
            match pde {
                Pde::Helmholtz => {
                    let q = TwoBumpParams::from_slice(lambda);
                    w[..5].copy_from_slice(&diffusion(&|x, y| helmholtz_coeffs(x, y, &q).0));
                    let eta = helmholtz_coeffs(x, y, &q).1;
                    w[0] += eta * eta;
                    source = helmholtz_forcing(x, y);
                }
                Pde::Darcy => {
                    let q = DarcyParams::from_slice(lambda);
                    w[..5].copy_from_slice(&diffusion(&|x, y| darcy_kappa(x, y, &q)));
                    source = 1.0;
                }
                _ => {
                    let q = TwoBumpParams::from_slice(lambda);
                    w[..5].copy_from_slice(&diffusion(&|x, y| heat_kappa(x, y, &q)));
                    w[5] = 0.5 / ht;
                    w[6] = -0.5 / ht;
                }
            }
            let n = pde.stencil_len();
            r[0] = w[..n].iter().zip(vals).map(|(w, v)| w * v).sum::<f64>() - source;
            if let Some(j) = jac {
                j[..n].copy_from_slice(&w[..n]);
            }
        }
        Pde::Grayscott { feed, kill } => {
            let (du, dv) = (lambda[0], lambda[1]);
            let lap = [-2.0 * (ihx2 + ihy2), ihx2, ihx2, ihy2, ihy2];
            let (u, v) = (vals[0], vals[1]);
            let mut lap_u = 0.0;
            let mut lap_v = 0.0;
            for s in 0..5 {
                lap_u += lap[s] * vals[2 * s];
                lap_v += lap[s] * vals[2 * s + 1];
            }
            let u_t = (vals[10] - vals[12]) * 0.5 / ht;
            let v_t = (vals[11] - vals[13]) * 0.5 / ht;
            r[0] = u_t - du * lap_u + u * v * v - feed * (1.0 - u);
            r[1] = v_t - dv * lap_v - u * v * v + (feed + kill) * v;
            if let Some(j) = jac {
                let len = 14;
                j.iter_mut().for_each(|v| *v = 0.0);
                for s in 0..5 {
                    j[2 * s] = -du * lap[s];
                    j[len + 2 * s + 1] = -dv * lap[s];
                }
                j[0] += v * v + feed;
                j[1] += 2.0 * u * v;
                j[len] += -v * v;
                j[len + 1] += -2.0 * u * v + feed + kill;
                j[10] += 0.5 / ht;
                j[12] -= 0.5 / ht;
                j[len + 11] += 0.5 / ht;
                j[len + 13] -= 0.5 / ht;
            }
        }
    }
}

/// Residual term given network values at all evaluation points.
fn residual_from_values(pde: Pde, lambda: &[f64], colloc: &CollocationSet, out: &[f64]) -> f64 {
    let k = pde.components();
    let sl = pde.stencil_len() * k;
    let mut r = [0.0; 2];
    let mut interior = 0.0;
    for (i, p) in colloc.interior.iter().enumerate() {
        point_residual(
            pde,
            lambda,
            p,
            colloc.h,
            &out[i * sl..(i + 1) * sl],
            &mut r[..k],
            None,
        );
        interior += r[..k].iter().map(|v| v * v).sum::<f64>();
    }
    let off = colloc.interior.len() * sl;
    let boundary = mse(&out[off..], &colloc.boundary_values, k);
    interior / colloc.interior.len().max(1) as f64 + boundary
}

/// PINN residual term: mean squared PDE residual at the interior points plus
/// mean squared boundary/initial mismatch. Derivatives are second-order
/// central differences of network evaluations.
pub fn pinn_residual(
    syn: &SyntheticModel,
    lambda: &[f64],
    colloc: &CollocationSet,
    pde: Pde,
) -> Result<f64> {
    let out = syn.predict(&colloc.evaluation_points(pde))?;
    Ok(residual_from_values(pde, lambda, colloc, &out))
}

/// Joint Adam on `(Θ, Λ)` minimizing `L_data + γ·R`. `Θ` gradients flow
/// through the stencil by reverse mode; `Λ` gradients are central
/// differences of `R` with the network values held fixed.
pub fn train_pinn(
    scenario: &Scenario,
    mut syn: SyntheticModel,
    data: &Dataset,
    colloc: &CollocationSet,
    cfg: &TrainConfig,
    reference: Option<&Reference>,
    clock: &dyn Clock,
) -> Result<TrainResult> {
    cfg.validate()?;
    let start = clock.seconds();
    let pde = Pde::of(scenario);
    let k = pde.components();
    let sl = pde.stencil_len() * k;
    let scale = scenario.kind.param_scale();
    let names = scenario.kind.param_names();
    let mut lambda = scenario.init.clone();
    let mut adam_theta = AdamState::new(syn.theta.values.len());
    let mut adam_lambda = AdamState::new(lambda.len());
    let colloc_points = colloc.evaluation_points(pde);
    let mut inputs = syn.input_map.encode(&data.points);
    inputs.extend(syn.input_map.encode(&colloc_points));
    let m = data.len();
    let n_int = colloc.interior.len().max(1) as f64;
    let n_bnd = colloc.boundary.len();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut timings = Timings::default();
    let mut aborted = None;

    for epoch in 1..=cfg.epochs {
        let t0 = clock.seconds();
        let step = (|| -> Result<_> {
            let cache = mlp_forward_cached(&syn.theta, &syn.arch, &inputs)?;
            let out = cache.output();
            let (data_out, col_out) = out.split_at(m * k);
            let l_data = mse(data_out, &data.values, k);
            let mut upstream = vec![0.0; out.len()];
            if m > 0 {
                for i in 0..m * k {
                    upstream[i] = 2.0 / m as f64 * (data_out[i] - data.values[i]);
                }
            }
            let mut residual = 0.0;
            let mut lambda_grad = vec![0.0; lambda.len()];
            if cfg.gamma > 0.0 {
                let mut r = [0.0; 2];
                let mut jac = vec![0.0; k * sl];
                let up = &mut upstream[m * k..];
                for (i, p) in colloc.interior.iter().enumerate() {
                    let vals = &col_out[i * sl..(i + 1) * sl];
                    point_residual(pde, &lambda, p, colloc.h, vals, &mut r[..k], Some(&mut jac));
                    for c in 0..k {
                        residual += r[c] * r[c] / n_int;
                        let coef = 2.0 * cfg.gamma * r[c] / n_int;
                        for j in 0..sl {
                            up[i * sl + j] += coef * jac[c * sl + j];
                        }
                    }
                }
                let off = colloc.interior.len() * sl;
                if n_bnd > 0 {
                    residual += mse(&col_out[off..], &colloc.boundary_values, k);
                    for j in 0..n_bnd * k {
                        up[off + j] += 2.0 * cfg.gamma / n_bnd as f64
                            * (col_out[off + j] - colloc.boundary_values[j]);
                    }
                }
                let z: Vec<f64> = lambda.iter().map(|v| v / scale).collect();
                lambda_grad = physical_grad_fd(&z, &names, cfg.fd_rel_step, false, |w| {
                    let l: Vec<f64> = w.iter().map(|v| v * scale).collect();
                    Ok(cfg.gamma * residual_from_values(pde, &l, colloc, col_out))
                })?;
            }
            let grad = mlp_backward_cached(&syn.theta, &syn.arch, &cache, &upstream)?;
            let mut theta = syn.theta.values.clone();
            let mut at = adam_theta.clone();
            adam_step(&mut theta, &grad, &mut at, cfg.lr_syn)?;
            let mut z: Vec<f64> = lambda.iter().map(|v| v / scale).collect();
            let mut al = adam_lambda.clone();
            if cfg.gamma > 0.0 {
                adam_step(&mut z, &lambda_grad, &mut al, cfg.lr_phy)?;
            }
            let loss = l_data + cfg.gamma * residual;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            Ok((l_data, residual, theta, at, z, al))
        })();
        match step {
            Ok((l_data, residual, theta, at, z, al)) => {
                syn.theta.values = theta;
                adam_theta = at;
                adam_lambda = al;
                lambda = z.iter().map(|v| v * scale).collect();
                scenario.project(&mut lambda);
                let mut rec = empty_record(epoch);
                rec.l_syn = Some(l_data);
                rec.l_phy = Some(residual);
                rec.lambda = lambda.clone();
                timings.theta_step += clock.seconds() - t0;
                if let Some(r) = reference {
                    rec.e_p = Some(r.parameter_error(&lambda));
                    if epoch % cfg.eval_every == 0 || epoch == cfg.epochs {
                        let t = clock.seconds();
                        rec.e_d = Some(mse(&syn.predict(&data.points)?, &data.values, k));
                        rec.e_s = Some(r.solution_error(&syn.predict(&r.points)?));
                        timings.eval += clock.seconds() - t;
                    }
                }
                history.push(rec);
            }
            Err(e) => {
                aborted = Some(e.to_string());
                break;
            }
        }
    }
    let physical = reference
        .map(|r| r.metrics(|p| syn.predict(p), Some(&lambda), data))
        .transpose()?;
    timings.total = clock.seconds() - start;
    Ok(TrainResult {
        method: Method::Pinn,
        history,
        lambda: Some(lambda),
        synthetic: Some(syn),
        stop_epoch: None,
        physical,
        synthetic_metrics: None,
        timings,
        aborted,
    })
}
