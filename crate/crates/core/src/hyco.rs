//! The cooperative training engine.
//!
//! The physical player owns `Λ` and minimizes `L1 = β·L_phy + w·L_int`; the
//! synthetic player owns `Θ` and minimizes `L2 = α·L_syn + w·L_int`, where
//! `w` is the interaction weight (1 unless a baseline disables coupling).
//! Each epoch performs one Adam step per player. `Λ` gradients come from
//! central finite differences through the solver, `Θ` gradients from
//! reverse mode through the network.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::experiments::{Dataset, Metrics, Reference};
use crate::grid::{Point, Rect};
use crate::nn::{
    adam_step, mlp_backward_cached, mlp_forward, mlp_forward_cached, AdamState, MlpArch, MlpParams,
};
use crate::solvers::Solution;
use crate::{Error, Result};

/// Space(-time) box where ghost points are drawn and where the network is
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub space: Rect,
    /// `(t0, t1)` for dynamic problems.
    pub time: Option<(f64, f64)>,
}

impl Bounds {
    pub fn input_dim(&self) -> usize {
        if self.time.is_some() {
            3
        } else {
            2
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.space.contains(p.x, p.y) && self.time.is_none_or(|(t0, t1)| p.t >= t0 && p.t <= t1)
    }

    /// Uniform draw from the box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let (x, y) = self.space.lerp(rng.random(), rng.random());
        let t = match self.time {
            Some((t0, t1)) => t0 + rng.random::<f64>() * (t1 - t0),
            None => 0.0,
        };
        Point { x, y, t }
    }
}

/// A parameterized forward model: `Λ ↦ u_phy`.
pub trait PhysicalModel: Sync {
    fn param_names(&self) -> Vec<String>;

    /// Typical magnitude of the parameters. The optimizer, the
    /// finite-difference probes and the stopping rule all work on `Λ/scale`.
    fn param_scale(&self) -> f64 {
        1.0
    }

    fn output_dim(&self) -> usize;

    fn bounds(&self) -> Bounds;

    fn solve(&self, lambda: &[f64]) -> Result<Solution>;

    /// Moves `lambda` back into the admissible set; returns whether it
    /// changed.
    fn project(&self, _lambda: &mut [f64]) -> bool {
        false
    }
}

/// Affine map from physical coordinates to network inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputMap {
    pub dims: usize,
    pub offset: [f64; 3],
    pub scale: [f64; 3],
}

impl InputMap {
    pub fn identity(dims: usize) -> Self {
        InputMap {
            dims,
            offset: [0.0; 3],
            scale: [1.0; 3],
        }
    }

    /// Space onto `[−1, 1]²`, time onto `[0, 1]`.
    pub fn normalizing(b: &Bounds) -> Self {
        let r = &b.space;
        let half = |lo: f64, hi: f64| {
            let w = 0.5 * (hi - lo);
            (0.5 * (lo + hi), if w > 0.0 { 1.0 / w } else { 1.0 })
        };
        let (ox, sx) = half(r.x_min, r.x_max);
        let (oy, sy) = half(r.y_min, r.y_max);
        let (ot, st) = match b.time {
            Some((t0, t1)) if t1 > t0 => (t0, 1.0 / (t1 - t0)),
            _ => (0.0, 1.0),
        };
        InputMap {
            dims: b.input_dim(),
            offset: [ox, oy, ot],
            scale: [sx, sy, st],
        }
    }

    pub fn encode(&self, points: &[Point]) -> Vec<f64> {
        let mut out = Vec::with_capacity(points.len() * self.dims);
        for p in points {
            let c = [p.x, p.y, p.t];
            for d in 0..self.dims {
                out.push((c[d] - self.offset[d]) * self.scale[d]);
            }
        }
        out
    }
}

/// The network together with its input normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModel {
    pub arch: MlpArch,
    pub theta: MlpParams,
    pub input_map: InputMap,
}

impl SyntheticModel {
    pub fn new(arch: MlpArch, theta: MlpParams, input_map: InputMap) -> Result<Self> {
        arch.validate()?;
        if theta.values.len() != arch.param_count() {
            return Err(Error::Shape(
                "Θ length does not match the architecture".into(),
            ));
        }
        if input_map.dims != arch.input_dim {
            return Err(Error::Shape(
                "input map and architecture disagree on input_dim".into(),
            ));
        }
        Ok(SyntheticModel {
            arch,
            theta,
            input_map,
        })
    }

    /// Predictions at `points`, point-major.
    pub fn predict(&self, points: &[Point]) -> Result<Vec<f64>> {
        mlp_forward(&self.theta, &self.arch, &self.input_map.encode(points))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhostMode {
    PerEpoch,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostSet {
    pub points: Vec<Point>,
    pub mode: GhostMode,
}

impl GhostSet {
    pub fn draw<R: Rng>(bounds: &Bounds, count: usize, mode: GhostMode, rng: &mut R) -> Self {
        GhostSet {
            points: (0..count).map(|_| bounds.sample(rng)).collect(),
            mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    /// The `Θ` step sees the freshly updated `Λ`.
    GaussSeidel,
    /// Both steps read the epoch-start snapshot.
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhysOptimizer {
    Adam,
    Gd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub alpha: f64,
    pub beta: f64,
    /// PINN residual weight.
    pub gamma: f64,
    /// Weight of `L_int` in both players' losses.
    pub interaction_weight: f64,
    pub lr_phy: f64,
    pub lr_syn: f64,
    pub epochs: usize,
    /// Number of ghost points `H`.
    pub ghosts: usize,
    pub ghost_mode: GhostMode,
    /// Window `Z` of the stopping rule.
    pub stop_window: usize,
    /// Tolerance `ε` of the stopping rule.
    pub stop_tol: f64,
    pub early_stop: bool,
    /// Relative central-difference step: `h_i = fd_rel_step·(1 + |λ_i|)`.
    pub fd_rel_step: f64,
    pub update_order: UpdateOrder,
    pub phy_optimizer: PhysOptimizer,
    pub train_physical: bool,
    pub train_synthetic: bool,
    /// Data records per `Θ` step; all of them when absent.
    pub batch_size: Option<usize>,
    /// Full metrics are evaluated every `eval_every` epochs and at the end.
    pub eval_every: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 1.0,
            beta: 1.0,
            gamma: 100.0,
            interaction_weight: 1.0,
            lr_phy: 5e-3,
            lr_syn: 1e-3,
            epochs: 3000,
            ghosts: 200,
            ghost_mode: GhostMode::PerEpoch,
            stop_window: 200,
            stop_tol: 5e-3,
            early_stop: true,
            fd_rel_step: 1e-4,
            update_order: UpdateOrder::GaussSeidel,
            phy_optimizer: PhysOptimizer::Adam,
            train_physical: true,
            train_synthetic: true,
            batch_size: None,
            eval_every: 50,
            seed: 0,
            parallel: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("interaction_weight", self.interaction_weight),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        let positive = [
            ("lr_phy", self.lr_phy),
            ("lr_syn", self.lr_syn),
            ("stop_tol", self.stop_tol),
            ("fd_rel_step", self.fd_rel_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and positive"));
            }
        }
        if self.ghosts == 0 {
            return Err(Error::invalid("ghosts", "H must be at least 1"));
        }
        if self.stop_window == 0 {
            return Err(Error::invalid("stop_window", "Z must be at least 1"));
        }
        if self.eval_every == 0 {
            return Err(Error::invalid("eval_every", "must be at least 1"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Source of wall-clock time in seconds.
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// A clock that never advances; timings come out as zero.
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
pub struct WallClock(std::time::Instant);

#[cfg(feature = "std")]
impl WallClock {
    pub fn start() -> Self {
        WallClock(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Cumulative seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    /// `Λ` steps, finite-difference probes included.
    pub lambda_step: f64,
    /// Refresh solves at the updated `Λ`.
    pub solve: f64,
    pub theta_step: f64,
    pub eval: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub l_syn: Option<f64>,
    pub l_phy: Option<f64>,
    pub l_int: Option<f64>,
    /// `Λ` after the epoch's update (empty when there is no physical model).
    pub lambda: Vec<f64>,
    pub e_d: Option<f64>,
    pub e_s: Option<f64>,
    pub e_p: Option<f64>,
    pub e_d_syn: Option<f64>,
    pub e_s_syn: Option<f64>,
}

impl EpochRecord {
    fn new(epoch: usize) -> Self {
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hyco,
    PhysicsOnly,
    NnOnly,
    Pinn,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Hyco,
        Method::PhysicsOnly,
        Method::NnOnly,
        Method::Pinn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hyco => "hyco",
            Method::PhysicsOnly => "physics_only",
            Method::NnOnly => "nn_only",
            Method::Pinn => "pinn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainResult {
    pub method: Method,
    pub history: Vec<EpochRecord>,
    /// Final `Λ` for methods that identify parameters.
    pub lambda: Option<Vec<f64>>,
    pub synthetic: Option<SyntheticModel>,
    /// Epoch at which the stopping rule fired.
    pub stop_epoch: Option<usize>,
    /// Metrics of the physical model (or of the PINN) at the end.
    pub physical: Option<Metrics>,
    pub synthetic_metrics: Option<Metrics>,
    pub timings: Timings,
    /// Set when training was cut short by a failure; everything else
    /// reflects the last good state.
    pub aborted: Option<String>,
}

impl TrainResult {
    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }
}

/// Mean over records of the squared Euclidean distance between two
/// point-major arrays with `k` components. Zero for empty input.
pub fn mse(a: &[f64], b: &[f64], k: usize) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() / k.max(1);
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum();
    sum / n as f64
}

/// `L_syn`: data misfit of the network.
pub fn loss_syn(syn: &SyntheticModel, data: &Dataset) -> Result<f64> {
    let pred = syn.predict(&data.points)?;
    Ok(mse(&pred, &data.values, data.components))
}

/// `L_phy`: data misfit of the solution at `lambda`.
pub fn loss_phy(model: &dyn PhysicalModel, lambda: &[f64], data: &Dataset) -> Result<f64> {
    let sol = model.solve(lambda)?;
    Ok(mse(
        &sol.sample_points(&data.points)?,
        &data.values,
        data.components,
    ))
}

/// `L_int`: mean squared disagreement of the two models at the ghost points.
pub fn loss_int(
    syn: &SyntheticModel,
    model: &dyn PhysicalModel,
    lambda: &[f64],
    ghosts: &GhostSet,
) -> Result<f64> {
    let sol = model.solve(lambda)?;
    let phy = sol.sample_points(&ghosts.points)?;
    let s = syn.predict(&ghosts.points)?;
    Ok(mse(&s, &phy, model.output_dim()))
}

/// Central finite-difference gradient of `loss` at `z`, with step
/// `rel_step·(1 + |z_i|)` per coordinate. A failed probe is reported with the
/// name of the perturbed coordinate.
pub fn physical_grad_fd<F>(
    z: &[f64],
    names: &[String],
    rel_step: f64,
    parallel: bool,
    loss: F,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let probe = |i: usize| -> Result<f64> {
        let h = rel_step * (1.0 + z[i].abs());
        let mut w = z.to_vec();
        w[i] = z[i] + h;
        let plus = loss(&w);
        w[i] = z[i] - h;
        let minus = loss(&w);
        let wrap = |e: Error| Error::Probe {
            name: names
                .get(i)
                .cloned()
                .unwrap_or_else(|| alloc::format!("#{i}")),
            source: Box::new(e),
        };
        let (plus, minus) = (plus.map_err(wrap)?, minus.map_err(wrap)?);
        let g = (plus - minus) / (2.0 * h);
        if g.is_finite() {
            Ok(g)
        } else {
            Err(wrap(Error::NonFiniteGradient))
        }
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..z.len()).into_par_iter().map(probe).collect();
    }
    let _ = parallel;
    (0..z.len()).map(probe).collect()
}

/// Stopping rule: `‖Λ⁽ᵏ⁾ − mean(Λ⁽ᵏ⁻ᶻ⁾ … Λ⁽ᵏ⁻¹⁾)‖ < ε`, where `Λ⁽ᵏ⁾` is the
/// last entry of `history`. False while fewer than `Z + 1` entries exist.
pub fn stopping_check<L: AsRef<[f64]>>(history: &[L], window: usize, tol: f64) -> bool {
    if window == 0 || history.len() < window + 1 {
        return false;
    }
    let k = history.len() - 1;
    let current = history[k].as_ref();
    let mut dist2 = 0.0;
    for (d, &c) in current.iter().enumerate() {
        let mean = history[k - window..k]
            .iter()
            .map(|l| l.as_ref()[d])
            .sum::<f64>()
            / window as f64;
        dist2 += (c - mean) * (c - mean);
    }
    dist2.sqrt() < tol
}

/// Gradient-step options for the synthetic player.
struct ThetaStep<'a> {
    data_points: &'a [Point],
    data_values: &'a [f64],
    ghost_points: &'a [Point],
    ghost_targets: &'a [f64],
    alpha: f64,
    weight: f64,
}

/// One Adam step on `α·L_syn + w·L_int` over `Θ`. Returns `L_syn` at the
/// pre-step `Θ` (zero when there are no data points).
fn theta_step(
    syn: &mut SyntheticModel,
    adam: &mut AdamState,
    lr: f64,
    s: &ThetaStep,
) -> Result<f64> {
    let k = syn.arch.output_dim;
    let (m, h) = (s.data_points.len(), s.ghost_points.len());
    let use_data = s.alpha > 0.0 && m > 0;
    let use_ghosts = s.weight > 0.0 && h > 0;
    let mut points = Vec::with_capacity(m + h);
    points.extend_from_slice(s.data_points);
    if use_ghosts {
        points.extend_from_slice(s.ghost_points);
    }
    let cache = mlp_forward_cached(&syn.theta, &syn.arch, &syn.input_map.encode(&points))?;
    let out = cache.output();
    let l_syn = mse(&out[..m * k], s.data_values, k);
    let mut upstream = vec![0.0; out.len()];
    if use_data {
        let c = 2.0 * s.alpha / m as f64;
        for i in 0..m * k {
            upstream[i] = c * (out[i] - s.data_values[i]);
        }
    }
    if use_ghosts {
        let c = 2.0 * s.weight / h as f64;
        for i in 0..h * k {
            upstream[m * k + i] = c * (out[m * k + i] - s.ghost_targets[i]);
        }
    }
    let grad = mlp_backward_cached(&syn.theta, &syn.arch, &cache, &upstream)?;
    adam_step(&mut syn.theta.values, &grad, adam, lr)?;
    Ok(l_syn)
}

/// Training state that evolves epoch by epoch.
#[derive(Debug, Clone)]
pub struct HycoState {
    pub epoch: usize,
    /// Current `Λ` in physical units.
    pub lambda: Vec<f64>,
    pub synthetic: SyntheticModel,
    pub adam_phy: AdamState,
    pub adam_syn: AdamState,
    pub ghosts: GhostSet,
    /// Solution at `lambda`.
    pub solution: Solution,
    rng: ChaCha8Rng,
    scaled_history: VecDeque<Vec<f64>>,
}

impl HycoState {
    /// Current `Λ` divided by the model's parameter scale.
    pub fn scaled_lambda(&self, scale: f64) -> Vec<f64> {
        self.lambda.iter().map(|v| v / scale).collect()
    }
}

/// Deterministic seeds for independent random streams of one run.
pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub(crate) const STREAM_GHOSTS: u64 = 1;
pub(crate) const STREAM_BATCH: u64 = 2;
pub(crate) const STREAM_PROBES: u64 = 3;
pub(crate) const STREAM_COLLOCATION: u64 = 4;

/// Borrowed inputs of a cooperative run.
pub struct Hyco<'a> {
    pub model: &'a dyn PhysicalModel,
    pub data: &'a Dataset,
    pub cfg: &'a TrainConfig,
    pub reference: Option<&'a Reference>,
}

impl<'a> Hyco<'a> {
    pub fn new(model: &'a dyn PhysicalModel, data: &'a Dataset, cfg: &'a TrainConfig) -> Self {
        Hyco {
            model,
            data,
            cfg,
            reference: None,
        }
    }

    pub fn with_reference(mut self, reference: &'a Reference) -> Self {
        self.reference = Some(reference);
        self
    }

    fn scale(&self) -> f64 {
        self.model.param_scale()
    }

    pub fn init(&self, lambda0: &[f64], synthetic: SyntheticModel) -> Result<HycoState> {
        self.cfg.validate()?;
        let names = self.model.param_names();
        if lambda0.len() != names.len() {
            return Err(Error::Shape(alloc::format!(
                "Λ has {} entries, the model has {} parameters",
                lambda0.len(),
                names.len()
            )));
        }
        if synthetic.arch.output_dim != self.model.output_dim() {
            return Err(Error::Shape(
                "network and physical model output dims differ".into(),
            ));
        }
        if self.data.components != self.model.output_dim() {
            return Err(Error::Shape(
                "dataset and physical model output dims differ".into(),
            ));
        }
        let mut lambda = lambda0.to_vec();
        self.model.project(&mut lambda);
        let solution = self.model.solve(&lambda)?;
        let mut rng = stream(self.cfg.seed, STREAM_GHOSTS);
        let ghosts = GhostSet::draw(
            &self.model.bounds(),
            self.cfg.ghosts,
            self.cfg.ghost_mode,
            &mut rng,
        );
        let n_theta = synthetic.theta.values.len();
        let mut state = HycoState {
            epoch: 0,
            adam_phy: AdamState::new(lambda.len()),
            adam_syn: AdamState::new(n_theta),
            scaled_history: VecDeque::new(),
            lambda,
            synthetic,
            ghosts,
            solution,
            rng,
        };
        let z = state.scaled_lambda(self.scale());
        state.scaled_history.push_back(z);
        Ok(state)
    }

    /// `L1 = β·L_phy + w·L_int` at `lambda`, with fixed network predictions
    /// at the ghosts.
    fn l1_from_solution(&self, sol: &Solution, ghosts: &[Point], syn_ghost: &[f64]) -> Result<f64> {
        let k = self.model.output_dim();
        let mut l = 0.0;
        if self.cfg.beta > 0.0 && !self.data.is_empty() {
            l += self.cfg.beta * mse(&sol.sample_points(&self.data.points)?, &self.data.values, k);
        }
        if self.cfg.interaction_weight > 0.0 {
            l += self.cfg.interaction_weight * mse(syn_ghost, &sol.sample_points(ghosts)?, k);
        }
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::NonFiniteGradient)
        }
    }

    /// Gradient of `L1` over the scaled parameters `Λ/scale`.
    pub fn lambda_gradient(&self, state: &HycoState) -> Result<Vec<f64>> {
        let syn_ghost = state.synthetic.predict(&state.ghosts.points)?;
        let scale = self.scale();
        let z = state.scaled_lambda(scale);
        physical_grad_fd(
            &z,
            &self.model.param_names(),
            self.cfg.fd_rel_step,
            self.cfg.parallel,
            |w| {
                let lambda: Vec<f64> = w.iter().map(|v| v * scale).collect();
                let sol = self.model.solve(&lambda)?;
                self.l1_from_solution(&sol, &state.ghosts.points, &syn_ghost)
            },
        )
    }

    /// Physical-player update; returns the new `Λ` (physical units).
    fn lambda_update(&self, state: &HycoState, adam: &mut AdamState) -> Result<Vec<f64>> {
        let scale = self.scale();
        let grad = self.lambda_gradient(state)?;
        let mut z = state.scaled_lambda(scale);
        match self.cfg.phy_optimizer {
            PhysOptimizer::Adam => adam_step(&mut z, &grad, adam, self.cfg.lr_phy)?,
            PhysOptimizer::Gd => {
                for (z, g) in z.iter_mut().zip(&grad) {
                    *z -= self.cfg.lr_phy * g;
                }
            }
        }
        let mut lambda: Vec<f64> = z.iter().map(|v| v * scale).collect();
        self.model.project(&mut lambda);
        Ok(lambda)
    }

    /// One epoch. On error `state` is left as it was.
    pub fn epoch(
        &self,
        state: &mut HycoState,
        timings: &mut Timings,
        clock: &dyn Clock,
    ) -> Result<EpochRecord> {
        let cfg = self.cfg;
        let k = self.model.output_dim();
        let epoch = state.epoch + 1;
        let mut rec = EpochRecord::new(epoch);

        let mut rng = state.rng.clone();
        let ghosts = match cfg.ghost_mode {
            GhostMode::PerEpoch if epoch > 1 => {
                GhostSet::draw(&self.model.bounds(), cfg.ghosts, cfg.ghost_mode, &mut rng)
            }
            _ => state.ghosts.clone(),
        };
        let snapshot = HycoState {
            ghosts,
            rng,
            ..state.clone()
        };

        let phy_ghost = snapshot.solution.sample_points(&snapshot.ghosts.points)?;
        let syn_ghost = snapshot.synthetic.predict(&snapshot.ghosts.points)?;
        let l_phy = mse(
            &snapshot.solution.sample_points(&self.data.points)?,
            &self.data.values,
            k,
        );
        let l_int = mse(&syn_ghost, &phy_ghost, k);
        if !(l_phy.is_finite() && l_int.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
        rec.l_phy = Some(l_phy);
        rec.l_int = Some(l_int);

        let mut next = snapshot.clone();
        let t0 = clock.seconds();
        if cfg.train_physical {
            next.lambda = self.lambda_update(&snapshot, &mut next.adam_phy)?;
        }
        let t1 = clock.seconds();
        if next.lambda != snapshot.lambda {
            next.solution = self.model.solve(&next.lambda)?;
        }
        let t2 = clock.seconds();

        if cfg.train_synthetic {
            let targets = match cfg.update_order {
                UpdateOrder::GaussSeidel if next.lambda != snapshot.lambda => {
                    next.solution.sample_points(&snapshot.ghosts.points)?
                }
                _ => phy_ghost,
            };
            let (points, values) = self.data_batch(&mut next.rng);
            let l_syn = theta_step(
                &mut next.synthetic,
                &mut next.adam_syn,
                cfg.lr_syn,
                &ThetaStep {
                    data_points: &points,
                    data_values: &values,
                    ghost_points: &snapshot.ghosts.points,
                    ghost_targets: &targets,
                    alpha: cfg.alpha,
                    weight: cfg.interaction_weight,
                },
            )?;
            if !l_syn.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            rec.l_syn = Some(l_syn);
        } else {
            rec.l_syn = Some(loss_syn(&next.synthetic, self.data)?);
        }
        let t3 = clock.seconds();

        next.epoch = epoch;
        next.scaled_history
            .push_back(next.scaled_lambda(self.scale()));
        while next.scaled_history.len() > cfg.stop_window + 1 {
            next.scaled_history.pop_front();
        }
        rec.lambda = next.lambda.clone();
        *state = next;

        timings.lambda_step += t1 - t0;
        timings.solve += t2 - t1;
        timings.theta_step += t3 - t2;
        Ok(rec)
    }

    /// Data records used by one `Θ` step.
    fn data_batch(&self, rng: &mut ChaCha8Rng) -> (Vec<Point>, Vec<f64>) {
        let k = self.data.components;
        match self.cfg.batch_size {
            Some(b) if b < self.data.len() => {
                let idx = rand::seq::index::sample(rng, self.data.len(), b);
                let mut pts = Vec::with_capacity(b);
                let mut vals = Vec::with_capacity(b * k);
                for i in idx.iter() {
                    pts.push(self.data.points[i]);
                    vals.extend_from_slice(&self.data.values[i * k..(i + 1) * k]);
                }
                (pts, vals)
            }
            _ => (self.data.points.clone(), self.data.values.clone()),
        }
    }

    /// Whether the stopping rule fires for the current state.
    pub fn should_stop(&self, state: &HycoState) -> bool {
        let hist: Vec<&Vec<f64>> = state.scaled_history.iter().collect();
        let hist: Vec<&[f64]> = hist.iter().map(|v| v.as_slice()).collect();
        stopping_check(&hist, self.cfg.stop_window, self.cfg.stop_tol)
    }

    fn physical_metrics(&self, state: &HycoState, full: bool) -> Result<(Option<Metrics>, f64)> {
        let e_d = mse(
            &state.solution.sample_points(&self.data.points)?,
            &self.data.values,
            self.data.components,
        );
        let Some(r) = self.reference else {
            return Ok((None, e_d));
        };
        if !full {
            return Ok((None, e_d));
        }
        let m = r.metrics(
            |p| state.solution.sample_points(p),
            Some(&state.lambda),
            self.data,
        )?;
        Ok((Some(m), e_d))
    }

    fn fill_metrics(&self, state: &HycoState, rec: &mut EpochRecord, full: bool) -> Result<()> {
        let (phys, e_d) = self.physical_metrics(state, full)?;
        rec.e_d = Some(e_d);
        if let Some(r) = self.reference {
            rec.e_p = Some(r.parameter_error(&state.lambda));
        }
        if let Some(m) = phys {
            rec.e_s = Some(m.e_s);
            let syn = r_syn_metrics(self.reference, &state.synthetic, self.data)?;
            if let Some(s) = syn {
                rec.e_d_syn = Some(s.e_d);
                rec.e_s_syn = Some(s.e_s);
            }
        }
        Ok(())
    }

    /// Runs up to `cfg.epochs` epochs from `state`, honoring the stopping
    /// rule.
    pub fn run(&self, mut state: HycoState, clock: &dyn Clock) -> TrainResult {
        let start = clock.seconds();
        let mut timings = Timings::default();
        let mut history = Vec::with_capacity(self.cfg.epochs);
        let mut stop_epoch = None;
        let mut aborted = None;
        let check_stop = self.cfg.early_stop && self.cfg.train_physical;
        for e in 1..=self.cfg.epochs {
            let mut rec = match self.epoch(&mut state, &mut timings, clock) {
                Ok(r) => r,
                Err(err) => {
                    aborted = Some(err.to_string());
                    break;
                }
            };
            let stop = check_stop && self.should_stop(&state);
            let full = e % self.cfg.eval_every == 0 || e == self.cfg.epochs || stop;
            let t = clock.seconds();
            if let Err(err) = self.fill_metrics(&state, &mut rec, full) {
                aborted = Some(err.to_string());
                history.push(rec);
                break;
            }
            timings.eval += clock.seconds() - t;
            history.push(rec);
            if stop {
                stop_epoch = Some(e);
                break;
            }
        }
        let t = clock.seconds();
        let physical = self
            .reference
            .map(|r| {
                r.metrics(
                    |p| state.solution.sample_points(p),
                    Some(&state.lambda),
                    self.data,
                )
            })
            .transpose();
        let synthetic_metrics = r_syn_metrics(self.reference, &state.synthetic, self.data);
        let (physical, synthetic_metrics) = match (physical, synthetic_metrics) {
            (Ok(p), Ok(s)) => (p, s),
            (Err(e), _) | (_, Err(e)) => {
                aborted.get_or_insert(e.to_string());
                (None, None)
            }
        };
        timings.eval += clock.seconds() - t;
        timings.total = clock.seconds() - start;
        TrainResult {
            method: Method::Hyco,
            history,
            lambda: Some(state.lambda),
            synthetic: Some(state.synthetic),
            stop_epoch,
            physical,
            synthetic_metrics,
            timings,
            aborted,
        }
    }

    /// `(L1, L2)` at the given pair with the state's current ghosts.
    pub fn player_losses(
        &self,
        lambda: &[f64],
        syn: &SyntheticModel,
        ghosts: &[Point],
    ) -> Result<(f64, f64)> {
        let k = self.model.output_dim();
        let sol = self.model.solve(lambda)?;
        let phy_ghost = sol.sample_points(ghosts)?;
        let syn_ghost = syn.predict(ghosts)?;
        let l_int = self.cfg.interaction_weight * mse(&syn_ghost, &phy_ghost, k);
        let l_phy = mse(&sol.sample_points(&self.data.points)?, &self.data.values, k);
        let l_syn = loss_syn(syn, self.data)?;
        Ok((
            self.cfg.beta * l_phy + l_int,
            self.cfg.alpha * l_syn + l_int,
        ))
    }

    /// Largest improvement either player can obtain by a random unilateral
    /// move of size `probe_step` (scaled `Λ` for the physical player, `Θ`
    /// for the synthetic one). Each probe tries `±δ`. Both gaps are `≥ 0`.
    pub fn nash_gap(
        &self,
        state: &HycoState,
        probe_step: f64,
        n_probes: usize,
    ) -> Result<(f64, f64)> {
        let ghosts = &state.ghosts.points;
        let (l1, l2) = self.player_losses(&state.lambda, &state.synthetic, ghosts)?;
        let mut rng = stream(self.cfg.seed, STREAM_PROBES);
        let scale = self.scale();
        let (mut gap1, mut gap2) = (0.0f64, 0.0f64);
        for _ in 0..n_probes {
            let d = unit_direction(&mut rng, state.lambda.len());
            for sign in [1.0, -1.0] {
                let lambda: Vec<f64> = state
                    .lambda
                    .iter()
                    .zip(&d)
                    .map(|(l, d)| l + sign * probe_step * d * scale)
                    .collect();
                let (p1, _) = self.player_losses(&lambda, &state.synthetic, ghosts)?;
                gap1 = gap1.max(l1 - p1);
            }
            let d = unit_direction(&mut rng, state.synthetic.theta.values.len());
            for sign in [1.0, -1.0] {
                let mut syn = state.synthetic.clone();
                for (t, d) in syn.theta.values.iter_mut().zip(&d) {
                    *t += sign * probe_step * d;
                }
                let (_, p2) = self.player_losses(&state.lambda, &syn, ghosts)?;
                gap2 = gap2.max(l2 - p2);
            }
        }
        Ok((gap1, gap2))
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        d.iter_mut().for_each(|v| *v /= norm);
    }
    d
}

fn r_syn_metrics(
    reference: Option<&Reference>,
    syn: &SyntheticModel,
    data: &Dataset,
) -> Result<Option<Metrics>> {
    reference
        .map(|r| r.metrics(|p| syn.predict(p), None, data))
        .transpose()
}

/// Convenience wrapper: initialize and run a full cooperative training.
pub fn train_hyco(
    model: &dyn PhysicalModel,
    data: &Dataset,
    cfg: &TrainConfig,
    lambda0: &[f64],
    synthetic: SyntheticModel,
    reference: Option<&Reference>,
    clock: &dyn Clock,
) -> Result<TrainResult> {
    let mut engine = Hyco::new(model, data, cfg);
    engine.reference = reference;
    let state = engine.init(lambda0, synthetic)?;
    Ok(engine.run(state, clock))
}

/// `Adam` (or plain gradient descent) on `α·L_syn + w·L_int`, exposed for the
/// baselines.
pub(crate) fn synthetic_update(
    syn: &mut SyntheticModel,
    adam: &mut AdamState,
    lr: f64,
    data_points: &[Point],
    data_values: &[f64],
    alpha: f64,
) -> Result<f64> {
    theta_step(
        syn,
        adam,
        lr,
        &ThetaStep {
            data_points,
            data_values,
            ghost_points: &[],
            ghost_targets: &[],
            alpha,
            weight: 0.0,
        },
    )
}
