//! One training run from a resolved preset to a populated run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hyco_core::baselines::{fit_physics_only, train_nn_only, train_pinn, CollocationSet};
use hyco_core::experiments::{prepare, Prepared, Preset, Reference};
use hyco_core::hyco::{train_hyco, Clock, Method, PhysicalModel, TrainResult};

use crate::io::{
    region_label, write_dataset, write_field, write_history, write_json, write_theta, Summary,
};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub preset: Preset,
    pub method: Method,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub result: TrainResult,
    pub summary: Summary,
}

/// Trains `spec.method` and writes the run directory. A run that aborts
/// part-way still writes its outputs before reporting the failure.
pub fn execute(spec: &RunSpec, clock: &dyn Clock) -> Result<RunOutcome, CliError> {
    let p = &spec.preset;
    crate::config::validate(p)?;
    let scenario = &p.scenario;
    let fields_dir = spec.out.join("fields");
    fs::create_dir_all(&fields_dir).map_err(|e| CliError::io(&fields_dir, e))?;

    let Prepared { dataset, reference } = prepare(scenario)?;
    let dynamic = scenario.kind.is_dynamic();
    write_dataset(&spec.out, &dataset, dynamic)?;

    let cfg = &p.train;
    let result = match spec.method {
        Method::Hyco => {
            let syn = scenario.synthetic(&scenario.network, cfg.seed);
            train_hyco(
                scenario,
                &dataset,
                cfg,
                &scenario.init,
                syn,
                Some(&reference),
                clock,
            )?
        }
        Method::PhysicsOnly => fit_physics_only(
            scenario,
            &dataset,
            cfg,
            &scenario.init,
            Some(&reference),
            clock,
        )?,
        Method::NnOnly => {
            let syn = scenario.synthetic(&scenario.network, cfg.seed);
            train_nn_only(syn, &dataset, cfg, Some(&reference), clock)?
        }
        Method::Pinn => {
            let syn = scenario.synthetic(&scenario.pinn.arch, cfg.seed);
            let colloc = CollocationSet::draw(scenario, cfg.seed);
            let mut pinn_cfg = cfg.clone();
            pinn_cfg.epochs = scenario.pinn.epochs;
            train_pinn(
                scenario,
                syn,
                &dataset,
                &colloc,
                &pinn_cfg,
                Some(&reference),
                clock,
            )?
        }
    };

    let names = scenario.param_names();
    write_history(&spec.out.join("history.csv"), &names, &result.history)?;
    if let Some(syn) = &result.synthetic {
        write_theta(&spec.out.join("theta.json"), syn)?;
    }
    write_fields(&fields_dir, spec.method, &result, &reference, p, dynamic)?;

    let headline = match spec.method {
        Method::NnOnly => result.synthetic_metrics.or(result.physical),
        _ => result.physical,
    };
    let summary = Summary {
        method: spec.method.name().to_string(),
        scenario: scenario.name.clone(),
        region: region_label(&scenario.region, &scenario.domain.rect(), scenario.noise),
        seed: cfg.seed,
        epochs_run: result.epochs_run(),
        stop_epoch: result.stop_epoch,
        time_s: result.timings.total,
        timings: result.timings,
        metrics: headline.map(Into::into),
        synthetic_metrics: match spec.method {
            Method::Hyco => result.synthetic_metrics.map(Into::into),
            _ => None,
        },
        lambda: match spec.method {
            Method::NnOnly => None,
            _ => result.lambda.as_ref().map(|l| {
                names
                    .iter()
                    .cloned()
                    .zip(l.iter().copied())
                    .collect::<BTreeMap<_, _>>()
            }),
        },
        aborted: result.aborted.clone(),
        config: p.clone(),
    };
    write_json(&spec.out.join("summary.json"), &summary)?;
    if let Some(reason) = &result.aborted {
        return Err(CliError::Runtime(format!(
            "{} aborted after {} epochs: {reason}",
            spec.method.name(),
            result.epochs_run()
        )));
    }
    Ok(RunOutcome { result, summary })
}

fn write_fields(
    dir: &Path,
    method: Method,
    result: &TrainResult,
    reference: &Reference,
    p: &Preset,
    dynamic: bool,
) -> Result<(), CliError> {
    let k = reference.components;
    let pts = &reference.points;
    write_field(&dir.join("truth.csv"), pts, &reference.values, k, dynamic)?;
    if matches!(method, Method::Hyco | Method::PhysicsOnly) {
        if let Some(lambda) = &result.lambda {
            // A final Λ that the solver rejects simply has no field.
            if let Ok(values) = p.scenario.solve(lambda).and_then(|s| s.sample_points(pts)) {
                write_field(&dir.join("physical.csv"), pts, &values, k, dynamic)?;
            }
        }
    }
    if let Some(syn) = &result.synthetic {
        let values = syn.predict(pts)?;
        write_field(&dir.join("synthetic.csv"), pts, &values, k, dynamic)?;
    }
    Ok(())
}
