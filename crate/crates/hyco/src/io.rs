//! CSV and JSON readers and writers for run directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hyco_core::experiments::{Dataset, Metrics, Preset, Provenance, OMEGA, Q1, Q2};
use hyco_core::grid::{Point, Rect};
use hyco_core::hyco::{EpochRecord, SyntheticModel, Timings};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn component_names(k: usize) -> Vec<String> {
    match k {
        1 => vec!["u".into()],
        2 => vec!["u".into(), "v".into()],
        _ => (0..k).map(|c| format!("u{c}")).collect(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Runtime(format!("{}: {other:?}", path.display())),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `epoch, l_syn, l_phy, l_int, <Λ names>, e_d, e_s, e_p, e_d_syn, e_s_syn`;
/// missing values are empty cells.
pub fn write_history(
    path: &Path,
    param_names: &[String],
    history: &[EpochRecord],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = ["epoch", "l_syn", "l_phy", "l_int"]
        .map(String::from)
        .to_vec();
    header.extend(param_names.iter().cloned());
    header.extend(["e_d", "e_s", "e_p", "e_d_syn", "e_s_syn"].map(String::from));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in history {
        let mut row = vec![
            r.epoch.to_string(),
            cell(r.l_syn),
            cell(r.l_phy),
            cell(r.l_int),
        ];
        for i in 0..param_names.len() {
            row.push(cell(r.lambda.get(i).copied()));
        }
        row.extend([r.e_d, r.e_s, r.e_p, r.e_d_syn, r.e_s_syn].map(cell));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per point: `x, y, [t,] <components>`.
pub fn write_field(
    path: &Path,
    points: &[Point],
    values: &[f64],
    k: usize,
    dynamic: bool,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["x".to_string(), "y".to_string()];
    if dynamic {
        header.push("t".into());
    }
    header.extend(component_names(k));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (p, v) in points.iter().zip(values.chunks_exact(k)) {
        let mut row = vec![p.x.to_string(), p.y.to_string()];
        if dynamic {
            row.push(p.t.to_string());
        }
        row.extend(v.iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub provenance: Provenance,
    pub components: usize,
    pub dynamic: bool,
    pub len: usize,
}

/// `dataset.csv` (`x, y, [t,] <components>, noisy`) plus `dataset.json`.
pub fn write_dataset(dir: &Path, data: &Dataset, dynamic: bool) -> Result<(), CliError> {
    let path = dir.join("dataset.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    let mut header = vec!["x".to_string(), "y".to_string()];
    if dynamic {
        header.push("t".into());
    }
    header.extend(component_names(data.components));
    header.push("noisy".into());
    w.write_record(&header).map_err(|e| csv_err(&path, e))?;
    let noisy = if data.provenance.noise > 0.0 {
        "1"
    } else {
        "0"
    };
    for (i, p) in data.points.iter().enumerate() {
        let mut row = vec![p.x.to_string(), p.y.to_string()];
        if dynamic {
            row.push(p.t.to_string());
        }
        row.extend(data.value(i).iter().map(f64::to_string));
        row.push(noisy.into());
        w.write_record(&row).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    let meta = DatasetMeta {
        provenance: data.provenance.clone(),
        components: data.components,
        dynamic,
        len: data.len(),
    };
    write_json(&dir.join("dataset.json"), &meta)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset, CliError> {
    let meta: DatasetMeta = read_json(&dir.join("dataset.json"))?;
    let path = dir.join("dataset.csv");
    let mut r = csv::Reader::from_path(&path).map_err(|e| csv_err(&path, e))?;
    let k = meta.components;
    let lead = if meta.dynamic { 3 } else { 2 };
    let mut points = Vec::with_capacity(meta.len);
    let mut values = Vec::with_capacity(meta.len * k);
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(&path, e))?;
        if rec.len() != lead + k + 1 {
            return Err(CliError::Runtime(format!(
                "{}: row has {} cells",
                path.display(),
                rec.len()
            )));
        }
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i].parse().map_err(|_| {
                CliError::Runtime(format!("{}: bad number `{}`", path.display(), &rec[i]))
            })
        };
        let t = if meta.dynamic { num(2)? } else { 0.0 };
        points.push(Point::xyt(num(0)?, num(1)?, t));
        for c in 0..k {
            values.push(num(lead + c)?);
        }
    }
    let data = Dataset {
        points,
        values,
        components: k,
        provenance: meta.provenance,
    };
    data.validate()?;
    Ok(data)
}

pub fn write_theta(path: &Path, model: &SyntheticModel) -> Result<(), CliError> {
    write_json(path, model)
}

pub fn read_theta(path: &Path) -> Result<SyntheticModel, CliError> {
    let m: SyntheticModel = read_json(path)?;
    SyntheticModel::new(m.arch, m.theta, m.input_map).map_err(CliError::from)
}

/// Metrics as written to `summary.json`; `e_p` is omitted for pure networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsOut {
    pub e_d: f64,
    pub e_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_p: Option<f64>,
}

impl From<Metrics> for MetricsOut {
    fn from(m: Metrics) -> Self {
        MetricsOut {
            e_d: m.e_d,
            e_s: m.e_s,
            e_p: m.e_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub scenario: String,
    pub region: String,
    pub seed: u64,
    pub epochs_run: usize,
    pub stop_epoch: Option<usize>,
    pub time_s: f64,
    pub timings: Timings,
    /// Headline metrics: the physical model for methods that identify `Λ`,
    /// the network otherwise.
    pub metrics: Option<MetricsOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_metrics: Option<MetricsOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<BTreeMap<String, f64>>,
    pub aborted: Option<String>,
    pub config: Preset,
}

/// `omega`, `q1`, `q2` or a coordinate box, with `_n<percent>` appended for
/// noisy data.
pub fn region_label(region: &Rect, domain: &Rect, noise: f64) -> String {
    let base = if *region == Q1 {
        "q1".to_string()
    } else if *region == Q2 {
        "q2".to_string()
    } else if *region == OMEGA || region == domain {
        "omega".to_string()
    } else {
        format!(
            "[{},{}]x[{},{}]",
            region.x_min, region.x_max, region.y_min, region.y_max
        )
    };
    if noise > 0.0 {
        format!("{base}_n{}", (noise * 100.0).round() as i64)
    } else {
        base
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn read_summary(dir: &Path) -> Result<Summary, CliError> {
    read_json(&dir.join("summary.json"))
}

/// Merged comparison table, one row per run. The lowest `e_s` within each
/// region is flagged with a trailing ` *`.
pub fn write_compare(path: &Path, runs: &[Summary]) -> Result<(), CliError> {
    let e_s = |s: &Summary| s.metrics.map(|m| m.e_s);
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for s in runs {
        if let Some(v) = e_s(s).filter(|v| v.is_finite()) {
            let b = best.entry(&s.region).or_insert(v);
            *b = b.min(v);
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["method", "region", "time_s", "e_p", "e_s", "e_d"])
        .map_err(|e| csv_err(path, e))?;
    for s in runs {
        let mut es = cell(e_s(s));
        if e_s(s).is_some() && e_s(s) == best.get(s.region.as_str()).copied() {
            es.push_str(" *");
        }
        let row = [
            s.method.clone(),
            s.region.clone(),
            format!("{:.3}", s.time_s),
            cell(s.metrics.and_then(|m| m.e_p)),
            es,
            cell(s.metrics.map(|m| m.e_d)),
        ];
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyco_core::experiments::{generate_dataset, preset};

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["helmholtz_q1_desk", "heat_desk"] {
            let p = preset(name).unwrap();
            let data = generate_dataset(&p.scenario, 3).unwrap();
            write_dataset(dir.path(), &data, p.scenario.kind.is_dynamic()).unwrap();
            assert_eq!(read_dataset(dir.path()).unwrap(), data);
        }
    }

    #[test]
    fn theta_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = preset("heat_desk").unwrap();
        let syn = p.scenario.synthetic(&p.scenario.network, 11);
        let path = dir.path().join("theta.json");
        write_theta(&path, &syn).unwrap();
        let back = read_theta(&path).unwrap();
        assert_eq!(back, syn);
        assert!(back
            .theta
            .values
            .iter()
            .zip(&syn.theta.values)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn region_labels() {
        assert_eq!(region_label(&Q1, &OMEGA, 0.0), "q1");
        assert_eq!(region_label(&Q2, &OMEGA, 0.0), "q2");
        assert_eq!(region_label(&OMEGA, &OMEGA, 0.2), "omega_n20");
        let unit = Rect::new((0.0, 1.0), (0.0, 1.0));
        assert_eq!(region_label(&unit, &unit, 0.1), "omega_n10");
    }

    #[test]
    fn metrics_without_parameters_omit_e_p() {
        let m = MetricsOut::from(Metrics {
            e_d: 1.0,
            e_s: 0.5,
            e_p: None,
        });
        let text = serde_json::to_string(&m).unwrap();
        assert!(!text.contains("e_p"), "{text}");
    }
}
