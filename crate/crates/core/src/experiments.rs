//! Benchmark scenarios, synthetic observations, error metrics and the named
//! presets.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    project_two_bump, DarcyParams, GrayScottParams, TwoBumpParams, DARCY_TRUTH, GRAYSCOTT_TRUTH,
    HEAT_KAPPA_OFFSET, HEAT_TRUTH, HELMHOLTZ_TRUTH,
};
use crate::grid::{Domain2D, Point, Rect};
use crate::hyco::{
    mse, stream, Bounds, GhostMode, InputMap, PhysicalModel, SyntheticModel, TrainConfig,
};
use crate::nn::{mlp_init, Activation, BiasInit, MlpArch};
use crate::solvers::{
    simulate_grayscott, simulate_heat, solve_darcy, solve_helmholtz, Solution, SolverConfig,
};
use crate::{Error, Result};

/// Random stream ids for data generation.
const STREAM_SENSORS: u64 = 11;
const STREAM_NOISE: u64 = 12;

/// Lower bound on each Gray–Scott diffusivity, in units of the parameter
/// scale.
const DIFFUSIVITY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Helmholtz,
    Heat,
    Grayscott,
    Darcy,
}

impl ScenarioKind {
    pub fn is_dynamic(self) -> bool {
        matches!(self, ScenarioKind::Heat | ScenarioKind::Grayscott)
    }

    pub fn output_dim(self) -> usize {
        match self {
            ScenarioKind::Grayscott => 2,
            _ => 1,
        }
    }

    pub fn param_names(self) -> Vec<String> {
        let names: &[&str] = match self {
            ScenarioKind::Helmholtz | ScenarioKind::Heat => &TwoBumpParams::NAMES,
            ScenarioKind::Grayscott => &["du", "dv"],
            ScenarioKind::Darcy => &DarcyParams::NAMES,
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Optimization units of `Λ`.
    pub fn param_scale(self) -> f64 {
        match self {
            ScenarioKind::Grayscott => 1e-6,
            _ => 1.0,
        }
    }
}

/// Settings of the PINN baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnSettings {
    pub arch: MlpArch,
    pub interior: usize,
    pub boundary: usize,
    /// Differencing step as a fraction of the domain width (and of the time
    /// span for time derivatives).
    pub h_rel: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    /// Ground-truth `Λ` in physical units.
    pub truth: Vec<f64>,
    /// Initial guess for `Λ`.
    pub init: Vec<f64>,
    /// Grid of the physical model.
    pub domain: Domain2D,
    /// Where sensors are placed.
    pub region: Rect,
    /// Sensors per dataset (static, continuous space-time) or per time
    /// slice.
    pub sensors: usize,
    /// Observation time slices; `0` draws times uniformly instead.
    pub slices: usize,
    /// Nodes per axis of the reference solve for static problems.
    pub reference_n: usize,
    pub t_end: f64,
    pub time_steps: usize,
    pub store_stride: usize,
    /// Gray–Scott feed and kill rates.
    pub feed: f64,
    pub kill: f64,
    /// Multiplicative noise level `γ`.
    pub noise: f64,
    pub data_seed: u64,
    /// Frames of a dynamic reference used by `e_s`.
    pub eval_frames: usize,
    pub network: MlpArch,
    pub pinn: PinnSettings,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.region.validate()?;
        if !self.domain.rect().contains_rect(&self.region) {
            return Err(Error::invalid("region", "must lie inside the domain"));
        }
        let n = self.kind.param_names().len();
        if self.truth.len() != n || self.init.len() != n {
            return Err(Error::invalid(
                "truth/init",
                alloc::format!("expected {n} parameters"),
            ));
        }
        if self.truth.iter().chain(&self.init).any(|v| !v.is_finite()) {
            return Err(Error::invalid("truth/init", "must be finite"));
        }
        if self.sensors == 0 {
            return Err(Error::invalid("sensors", "M must be at least 1"));
        }
        if self.reference_n < 3 {
            return Err(Error::invalid("reference_n", "at least 3 nodes per axis"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::invalid("noise", "must be non-negative"));
        }
        if self.kind.is_dynamic() {
            self.solver_config().validate(true)?;
            if self.eval_frames < 2 {
                return Err(Error::invalid("eval_frames", "at least 2 frames"));
            }
        }
        for (field, arch) in [("network", &self.network), ("pinn.arch", &self.pinn.arch)] {
            arch.validate()?;
            if arch.input_dim != self.bounds().input_dim()
                || arch.output_dim != self.kind.output_dim()
            {
                return Err(Error::invalid(
                    field,
                    "input/output dims do not match the scenario",
                ));
            }
        }
        if !(self.pinn.h_rel > 0.0 && self.pinn.h_rel < 0.5) {
            return Err(Error::invalid("pinn.h_rel", "must lie in (0, 0.5)"));
        }
        if self.pinn.interior == 0 {
            return Err(Error::invalid("pinn.interior", "must be at least 1"));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        if self.kind.is_dynamic() {
            SolverConfig::dynamic(self.domain, self.t_end, self.time_steps, self.store_stride)
        } else {
            SolverConfig::stationary(self.domain)
        }
    }

    fn grayscott(&self, lambda: &[f64]) -> GrayScottParams {
        GrayScottParams {
            du: lambda[0],
            dv: lambda[1],
            feed: self.feed,
            kill: self.kill,
        }
    }

    /// Forward solve on an explicit configuration.
    pub fn solve_with(&self, lambda: &[f64], cfg: &SolverConfig) -> Result<Solution> {
        Ok(match self.kind {
            ScenarioKind::Helmholtz => {
                Solution::Static(solve_helmholtz(&TwoBumpParams::from_slice(lambda), cfg)?)
            }
            ScenarioKind::Darcy => {
                Solution::Static(solve_darcy(&DarcyParams::from_slice(lambda), cfg)?)
            }
            ScenarioKind::Heat => {
                Solution::Dynamic(simulate_heat(&TwoBumpParams::from_slice(lambda), cfg)?)
            }
            ScenarioKind::Grayscott => {
                Solution::Dynamic(simulate_grayscott(&self.grayscott(lambda), cfg)?)
            }
        })
    }

    /// Configuration of the ground-truth solve that generates data and the
    /// `e_s` reference.
    pub fn reference_config(&self) -> SolverConfig {
        if self.kind.is_dynamic() {
            self.solver_config()
        } else {
            SolverConfig::stationary(
                self.domain
                    .with_resolution(self.reference_n, self.reference_n),
            )
        }
    }

    pub fn ground_truth(&self) -> Result<Solution> {
        self.solve_with(&self.truth, &self.reference_config())
    }

    /// A freshly initialized network for this scenario.
    pub fn synthetic(&self, arch: &MlpArch, seed: u64) -> SyntheticModel {
        SyntheticModel {
            arch: arch.clone(),
            theta: mlp_init(arch, seed),
            input_map: InputMap::normalizing(&self.bounds()),
        }
    }
}

impl PhysicalModel for Scenario {
    fn param_names(&self) -> Vec<String> {
        self.kind.param_names()
    }

    fn param_scale(&self) -> f64 {
        self.kind.param_scale()
    }

    fn output_dim(&self) -> usize {
        self.kind.output_dim()
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            space: self.domain.rect(),
            time: self.kind.is_dynamic().then_some((0.0, self.t_end)),
        }
    }

    fn solve(&self, lambda: &[f64]) -> Result<Solution> {
        self.solve_with(lambda, &self.solver_config())
    }

    fn project(&self, lambda: &mut [f64]) -> bool {
        match self.kind {
            ScenarioKind::Heat => {
                let mut p = TwoBumpParams::from_slice(lambda);
                let changed = project_two_bump(&mut p, HEAT_KAPPA_OFFSET, &self.domain);
                lambda.copy_from_slice(&p.to_array());
                changed
            }
            ScenarioKind::Grayscott => {
                let floor = DIFFUSIVITY_FLOOR * self.kind.param_scale();
                let mut changed = false;
                for d in lambda.iter_mut() {
                    if !(*d >= floor) {
                        *d = floor;
                        changed = true;
                    }
                }
                changed
            }
            // The Darcy ground truth itself is indefinite and the Helmholtz
            // coefficients carry no sign constraint.
            ScenarioKind::Helmholtz | ScenarioKind::Darcy => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: String,
    pub region: Rect,
    pub seed: u64,
    pub noise: f64,
}

/// Observation records, point-major values with `components` entries each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub components: usize,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.components..(i + 1) * self.components]
    }

    pub fn empty(components: usize) -> Self {
        Dataset {
            points: Vec::new(),
            values: Vec::new(),
            components,
            provenance: Provenance {
                scenario: String::new(),
                region: Rect::new((0.0, 0.0), (0.0, 0.0)),
                seed: 0,
                noise: 0.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components == 0 || self.values.len() != self.points.len() * self.components {
            return Err(Error::Shape(
                "dataset values do not match its points".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset", "non-finite observation"));
        }
        Ok(())
    }
}

/// Draws sensor coordinates in the scenario's region and reads `truth` there.
pub fn generate_dataset_from(scenario: &Scenario, truth: &Solution, seed: u64) -> Result<Dataset> {
    let mut rng = stream(seed, STREAM_SENSORS);
    let region = scenario.region;
    let draw_xy = |rng: &mut rand_chacha::ChaCha8Rng| region.lerp(rng.random(), rng.random());
    let mut points = Vec::new();
    match truth {
        Solution::Static(_) => {
            for _ in 0..scenario.sensors {
                let (x, y) = draw_xy(&mut rng);
                points.push(Point::xy(x, y));
            }
        }
        Solution::Dynamic(series) if scenario.slices > 0 => {
            // Mobile sampling: fresh sensor positions at every slice.
            for j in 1..=scenario.slices {
                let target = scenario.t_end * j as f64 / scenario.slices as f64;
                let t = series.frame_time(series.nearest_frame(target));
                for _ in 0..scenario.sensors {
                    let (x, y) = draw_xy(&mut rng);
                    points.push(Point::xyt(x, y, t));
                }
            }
        }
        Solution::Dynamic(series) => {
            for _ in 0..scenario.sensors {
                let (x, y) = draw_xy(&mut rng);
                let t = series.t0() + rng.random::<f64>() * (series.t1() - series.t0());
                points.push(Point::xyt(x, y, t));
            }
        }
    }
    let values = truth.sample_points(&points)?;
    Ok(Dataset {
        points,
        values,
        components: truth.components(),
        provenance: Provenance {
            scenario: scenario.name.clone(),
            region,
            seed,
            noise: 0.0,
        },
    })
}

/// Noiseless observations of the ground truth; deterministic in `seed`.
pub fn generate_dataset(scenario: &Scenario, seed: u64) -> Result<Dataset> {
    scenario.validate()?;
    generate_dataset_from(scenario, &scenario.ground_truth()?, seed)
}

/// Multiplies each record by `1 + ε_i`, `ε_i ~ U(0, γ)` i.i.d.
pub fn apply_noise(data: &Dataset, gamma: f64, seed: u64) -> Result<Dataset> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("noise", "γ must be non-negative"));
    }
    let mut out = data.clone();
    out.provenance.noise = gamma;
    if gamma == 0.0 {
        return Ok(out);
    }
    let mut rng = stream(seed, STREAM_NOISE);
    for rec in out.values.chunks_exact_mut(data.components) {
        let factor = 1.0 + gamma * rng.random::<f64>();
        rec.iter_mut().for_each(|v| *v *= factor);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean squared misfit over the dataset.
    pub e_d: f64,
    /// Normalized discrete L² error against the reference solution.
    pub e_s: f64,
    /// Normalized Euclidean parameter error; absent for pure networks.
    pub e_p: Option<f64>,
}

/// Reference values for `e_s` and the true `Λ` for `e_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub components: usize,
    pub truth: Vec<f64>,
}

impl Reference {
    /// All nodes of a static reference, or all nodes of `frames` evenly
    /// spaced frames (first and last included) of a dynamic one.
    pub fn from_solution(truth_solution: &Solution, truth: &[f64], frames: usize) -> Self {
        let mut points = Vec::new();
        let mut values = Vec::new();
        match truth_solution {
            Solution::Static(f) => {
                for (x, y) in f.domain().nodes() {
                    points.push(Point::xy(x, y));
                }
                values.extend_from_slice(f.values());
            }
            Solution::Dynamic(s) => {
                let nt = s.nt();
                let frames = frames.clamp(2, nt);
                let mut last = usize::MAX;
                for q in 0..frames {
                    let k = (q * (nt - 1) + (frames - 1) / 2) / (frames - 1);
                    if k == last {
                        continue;
                    }
                    last = k;
                    let t = s.frame_time(k);
                    for (x, y) in s.domain().nodes() {
                        points.push(Point::xyt(x, y, t));
                    }
                    values.extend_from_slice(s.frames()[k].values());
                }
            }
        }
        Reference {
            points,
            values,
            components: truth_solution.components(),
            truth: truth.to_vec(),
        }
    }

    pub fn solution_error(&self, predicted: &[f64]) -> f64 {
        let num: f64 = predicted
            .iter()
            .zip(&self.values)
            .map(|(p, v)| (p - v) * (p - v))
            .sum();
        let den: f64 = self.values.iter().map(|v| v * v).sum();
        (num / den).sqrt()
    }

    pub fn parameter_error(&self, lambda: &[f64]) -> f64 {
        let num: f64 = lambda
            .iter()
            .zip(&self.truth)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = self.truth.iter().map(|v| v * v).sum();
        (num / den).sqrt()
    }

    /// Metrics of a model given its prediction accessor.
    pub fn metrics(
        &self,
        predict: impl Fn(&[Point]) -> Result<Vec<f64>>,
        lambda: Option<&[f64]>,
        data: &Dataset,
    ) -> Result<Metrics> {
        let e_d = mse(&predict(&data.points)?, &data.values, data.components);
        let e_s = self.solution_error(&predict(&self.points)?);
        Ok(Metrics {
            e_d,
            e_s,
            e_p: lambda.map(|l| self.parameter_error(l)),
        })
    }
}

/// `e_d`, `e_s` and (when `lambda` is given) `e_p` for one model.
pub fn compute_metrics(
    predict: impl Fn(&[Point]) -> Result<Vec<f64>>,
    lambda: Option<&[f64]>,
    reference: &Reference,
    data: &Dataset,
) -> Result<Metrics> {
    reference.metrics(predict, lambda, data)
}

/// Everything needed to start a run: the scenario, its observations and the
/// reference for metrics.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    pub reference: Reference,
}

/// Ground-truth solve, sensor sampling, noise and reference in one call.
pub fn prepare(scenario: &Scenario) -> Result<Prepared> {
    scenario.validate()?;
    let truth = scenario.ground_truth()?;
    let clean = generate_dataset_from(scenario, &truth, scenario.data_seed)?;
    let dataset = apply_noise(&clean, scenario.noise, scenario.data_seed)?;
    let reference = Reference::from_solution(&truth, &scenario.truth, scenario.eval_frames);
    Ok(Prepared { dataset, reference })
}

/// A scenario with its training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub scenario: Scenario,
    pub train: TrainConfig,
}

/// `Q1 = [−π/2, π]²`.
pub const Q1: Rect = Rect::new((-PI / 2.0, PI), (-PI / 2.0, PI));
/// `Q2 = [0, π]²`.
pub const Q2: Rect = Rect::new((0.0, PI), (0.0, PI));
pub const OMEGA: Rect = Rect::new((-PI, PI), (-PI, PI));

pub const PRESET_NAMES: [&str; 20] = [
    "helmholtz_paper",
    "helmholtz_q1_paper",
    "helmholtz_q2_paper",
    "helmholtz_desk",
    "helmholtz_q1_desk",
    "helmholtz_q2_desk",
    "heat_paper",
    "heat_q1_paper",
    "heat_q2_paper",
    "heat_desk",
    "heat_q1_desk",
    "heat_q2_desk",
    "grayscott_paper",
    "grayscott_desk",
    "darcy_paper",
    "darcy_n10_paper",
    "darcy_n20_paper",
    "darcy_desk",
    "darcy_n10_desk",
    "darcy_n20_desk",
];

fn residual_net(input_dim: usize) -> MlpArch {
    MlpArch {
        input_dim,
        output_dim: 1,
        hidden: vec![256, 256],
        activation: Activation::Relu,
        residual: true,
        bias_init: BiasInit::Uniform,
    }
}

fn tanh_of(arch: &MlpArch) -> MlpArch {
    MlpArch {
        activation: Activation::Tanh,
        ..arch.clone()
    }
}

fn square18() -> Domain2D {
    Domain2D::square(-PI, PI, 18).expect("valid grid")
}

fn helmholtz(region: Rect) -> Preset {
    let network = residual_net(2);
    Preset {
        scenario: Scenario {
            name: String::new(),
            kind: ScenarioKind::Helmholtz,
            truth: HELMHOLTZ_TRUTH.to_array().to_vec(),
            init: vec![2.41, 0.19, 0.42, 1.12, 0.50, 0.49],
            domain: square18(),
            region,
            sensors: 25,
            slices: 0,
            reference_n: 129,
            t_end: 1.0,
            time_steps: 2,
            store_stride: 1,
            feed: 0.0,
            kill: 0.0,
            noise: 0.0,
            data_seed: 1,
            eval_frames: 2,
            pinn: PinnSettings {
                arch: tanh_of(&network),
                interior: 400,
                boundary: 400,
                h_rel: 1e-3,
                epochs: 3000,
            },
            network,
        },
        train: TrainConfig {
            epochs: 3000,
            ghosts: 200,
            ..TrainConfig::default()
        },
    }
}

fn heat(region: Rect) -> Preset {
    let network = residual_net(3);
    let pinn = MlpArch {
        residual: false,
        ..tanh_of(&network)
    };
    Preset {
        scenario: Scenario {
            name: String::new(),
            kind: ScenarioKind::Heat,
            truth: HEAT_TRUTH.to_array().to_vec(),
            init: vec![1.0, -2.0, -1.1, 1.0, 1.4, -1.3],
            domain: square18(),
            region,
            sensors: 60,
            slices: 100,
            reference_n: 18,
            t_end: 1.0,
            time_steps: 1000,
            store_stride: 10,
            feed: 0.0,
            kill: 0.0,
            noise: 0.0,
            data_seed: 1,
            eval_frames: 101,
            pinn: PinnSettings {
                arch: pinn,
                interior: 400,
                boundary: 400,
                h_rel: 1e-3,
                epochs: 3000,
            },
            network,
        },
        train: TrainConfig {
            epochs: 3000,
            ghosts: 200,
            ..TrainConfig::default()
        },
    }
}

fn grayscott(n: usize, t_end: f64, steps: usize, sensors: usize, ghosts: usize) -> Preset {
    let network = MlpArch {
        input_dim: 3,
        output_dim: 2,
        hidden: vec![128; 4],
        activation: Activation::Relu,
        residual: false,
        bias_init: BiasInit::Uniform,
    };
    Preset {
        scenario: Scenario {
            name: String::new(),
            kind: ScenarioKind::Grayscott,
            truth: vec![GRAYSCOTT_TRUTH.du, GRAYSCOTT_TRUTH.dv],
            init: vec![1e-6, 0.5e-6],
            // n cells per axis plus the periodic image node.
            domain: Domain2D::square(0.0, 1.0, n + 1).expect("valid grid"),
            region: Rect::new((0.0, 1.0), (0.0, 1.0)),
            sensors,
            slices: 0,
            reference_n: n + 1,
            t_end,
            time_steps: steps,
            store_stride: steps / 100,
            feed: GRAYSCOTT_TRUTH.feed,
            kill: GRAYSCOTT_TRUTH.kill,
            noise: 0.0,
            data_seed: 1,
            eval_frames: 21,
            pinn: PinnSettings {
                arch: tanh_of(&network),
                interior: 50_000,
                boundary: 5_000,
                h_rel: 1e-3,
                epochs: 3500,
            },
            network,
        },
        train: TrainConfig {
            beta: 0.0,
            epochs: 600,
            ghosts,
            lr_phy: 1e-2,
            ..TrainConfig::default()
        },
    }
}

fn darcy(noise: f64) -> Preset {
    let network = residual_net(2);
    Preset {
        scenario: Scenario {
            name: String::new(),
            kind: ScenarioKind::Darcy,
            truth: DARCY_TRUTH.to_array().to_vec(),
            init: vec![
                0.098, 0.211, 0.785, 4.031, 4.877, -0.131, 0.066, -1.031, -3.014, 0.932,
            ],
            domain: square18(),
            region: OMEGA,
            sensors: 50,
            slices: 0,
            // κ changes sign, so solves do not converge under refinement;
            // data and reference live on the model grid.
            reference_n: 18,
            t_end: 1.0,
            time_steps: 2,
            store_stride: 1,
            feed: 0.0,
            kill: 0.0,
            noise,
            data_seed: 1,
            eval_frames: 2,
            pinn: PinnSettings {
                arch: tanh_of(&network),
                interior: 400,
                boundary: 400,
                h_rel: 1e-3,
                epochs: 2000,
            },
            network,
        },
        train: TrainConfig {
            epochs: 2000,
            ghosts: 300,
            ..TrainConfig::default()
        },
    }
}

/// Adjustments of the desk variants relative to the full-size variants.
fn desk(mut p: Preset) -> Preset {
    match p.scenario.kind {
        ScenarioKind::Grayscott => {
            let g = grayscott(32, 600.0, 1200, 1500, 400);
            p.scenario = Scenario {
                pinn: PinnSettings {
                    interior: 2000,
                    boundary: 500,
                    epochs: 600,
                    ..g.scenario.pinn.clone()
                },
                ..g.scenario
            };
        }
        ScenarioKind::Helmholtz | ScenarioKind::Heat | ScenarioKind::Darcy => {}
    }
    p
}

/// A named preset: exact printed values for `*_paper`, reduced resolution
/// or tuned variants for `*_desk`.
pub fn preset(name: &str) -> Result<Preset> {
    let (base, is_desk) = match (name.strip_suffix("_paper"), name.strip_suffix("_desk")) {
        (Some(b), _) => (b, false),
        (_, Some(b)) => (b, true),
        _ => return Err(Error::UnknownPreset(name.into())),
    };
    let mut p = match base {
        "helmholtz" => helmholtz(OMEGA),
        "helmholtz_q1" => helmholtz(Q1),
        "helmholtz_q2" => helmholtz(Q2),
        "heat" => heat(OMEGA),
        "heat_q1" => heat(Q1),
        "heat_q2" => heat(Q2),
        "grayscott" => grayscott(64, 2000.0, 5000, 5000, 1000),
        "darcy" => darcy(0.0),
        "darcy_n10" => darcy(0.1),
        "darcy_n20" => darcy(0.2),
        _ => return Err(Error::UnknownPreset(name.into())),
    };
    if is_desk {
        p = desk(p);
    }
    p.scenario.name = name.into();
    p.train.ghost_mode = GhostMode::PerEpoch;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        assert_eq!(preset("helmholtz_paper").unwrap().scenario.sensors, 25);
        assert_eq!(preset("grayscott_paper").unwrap().train.ghosts, 1000);
        assert_eq!(preset("darcy_paper").unwrap().scenario.init[0], 0.098);
        assert!(matches!(preset("nope_paper"), Err(Error::UnknownPreset(_))));
        assert!(matches!(preset("helmholtz"), Err(Error::UnknownPreset(_))));
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            p.scenario.validate().unwrap();
            p.train.validate().unwrap();
        }
    }

    #[test]
    fn noise_bounds() {
        let mut d = Dataset::empty(1);
        d.points = vec![Point::xy(0.0, 0.0); 1000];
        d.values = (0..1000).map(|i| 1.0 + i as f64).collect();
        assert_eq!(apply_noise(&d, 0.0, 3).unwrap().values, d.values);
        let noisy = apply_noise(&d, 0.2, 3).unwrap();
        let ratios: Vec<f64> = noisy
            .values
            .iter()
            .zip(&d.values)
            .map(|(a, b)| a / b)
            .collect();
        assert!(ratios.iter().all(|r| (1.0..=1.2).contains(r)));
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        // U(0, 0.2) has standard deviation 0.2/√12.
        let se = 0.2 / 12f64.sqrt() / (ratios.len() as f64).sqrt();
        assert!((mean - 1.1).abs() < 3.0 * se, "mean ratio {mean}");
        assert_eq!(noisy, apply_noise(&d, 0.2, 3).unwrap());
    }

    #[test]
    fn parameter_error_normalization() {
        let r = Reference {
            points: vec![],
            values: vec![1.0],
            components: 1,
            truth: HELMHOLTZ_TRUTH.to_array().to_vec(),
        };
        assert_eq!(r.parameter_error(&[0.0; 6]), 1.0);
        // Printed initial guess against the printed truth.
        let init = [2.41, 0.19, 0.42, 1.12, 0.50, 0.49];
        let truth = [4.0, -1.0, -1.0, 1.0, 2.0, 1.0];
        let num: f64 = init
            .iter()
            .zip(&truth)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        let den: f64 = truth.iter().map(|b| b * b).sum::<f64>();
        assert!((r.parameter_error(&init) - (num / den).sqrt()).abs() < 1e-15);
        assert!((r.parameter_error(&init) - 0.5946).abs() < 1e-3);
    }
}
