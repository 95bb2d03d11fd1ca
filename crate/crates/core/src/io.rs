//! File formats: measure/plan/model JSON, cost CSV, chain checkpoints and
//! JSONL traces. Floats are written with shortest round-trip formatting, so
//! readers recover the exact bits and repeated runs produce byte-identical
//! artifacts.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::nmf::{EpochReport, NmfModel};
use crate::plan::{PlanSource, TransportPlan};
use crate::rng::RngKey;
use crate::sampler::ChainState;
use crate::schedule::TemperatureSchedule;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let text = fs::read_to_string(path)?;
    let raw: DiscreteMeasure =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    // revalidate through the constructor so floors and checks apply
    DiscreteMeasure::new(raw.weights, raw.support)
}

pub fn write_measure(path: &Path, measure: &DiscreteMeasure) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(measure)?)?;
    Ok(())
}

/// Row-major CSV, no header.
pub fn read_cost_csv(path: &Path) -> Result<CostMatrix> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: empty cost matrix", path.display())));
    }
    CostMatrix::from_rows(rows)
}

pub fn write_cost_csv(path: &Path, cost: &CostMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..cost.rows() {
        let row: Vec<String> = cost.row(i).iter().map(|c| format!("{c}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Dense matrix as CSV (heatmap emission).
pub fn write_matrix_csv(path: &Path, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    let mut out = String::new();
    for i in 0..rows {
        let row: Vec<String> = data[i * cols..(i + 1) * cols].iter().map(|c| format!("{c}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    triples: Vec<(usize, usize, f64)>,
    shape: (usize, usize),
    source: PlanSource,
}

pub fn write_plan(path: &Path, plan: &TransportPlan) -> Result<()> {
    let triples = match &plan.entries {
        crate::plan::PlanEntries::Sparse(t) => t.clone(),
        crate::plan::PlanEntries::Dense(d) => {
            let mut t = Vec::new();
            for i in 0..plan.rows {
                for j in 0..plan.cols {
                    let m = d[i * plan.cols + j];
                    if m != 0.0 {
                        t.push((i, j, m));
                    }
                }
            }
            t
        }
    };
    let file = PlanFile { triples, shape: (plan.rows, plan.cols), source: plan.source };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn read_plan(path: &Path) -> Result<TransportPlan> {
    let text = fs::read_to_string(path)?;
    let file: PlanFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    TransportPlan::sparse(file.shape.0, file.shape.1, file.triples, file.source)
}

/// Chain checkpoint; field names are the wire contract.
#[derive(Serialize, Deserialize)]
pub struct Checkpoint {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    #[serde(rename = "U")]
    pub upper: Vec<f64>,
    #[serde(rename = "L")]
    pub lower: Vec<f64>,
    pub t: u64,
    pub rng_key: CheckpointKey,
    pub schedule_state: Option<TemperatureSchedule>,
    pub argmin_col: Vec<usize>,
    pub argmax_row: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub struct CheckpointKey {
    pub seed: u64,
    pub stream: u64,
    pub half_steps: u64,
}

impl Checkpoint {
    pub fn from_state(state: &ChainState, schedule: Option<&TemperatureSchedule>) -> Self {
        Checkpoint {
            g: state.dual_row.clone(),
            h: state.dual_col.clone(),
            upper: state.upper.clone(),
            lower: state.lower.clone(),
            t: state.sweeps,
            rng_key: CheckpointKey {
                seed: state.key.seed,
                stream: state.key.stream,
                half_steps: state.half_steps,
            },
            schedule_state: schedule.cloned(),
            argmin_col: state.argmin_col.clone(),
            argmax_row: state.argmax_row.clone(),
        }
    }

    pub fn into_state(self) -> (ChainState, Option<TemperatureSchedule>) {
        let state = ChainState {
            dual_row: self.g,
            dual_col: self.h,
            upper: self.upper,
            lower: self.lower,
            argmin_col: self.argmin_col,
            argmax_row: self.argmax_row,
            sweeps: self.t,
            half_steps: self.rng_key.half_steps,
            key: RngKey::new(self.rng_key.seed, self.rng_key.stream),
        };
        (state, self.schedule_state)
    }
}

pub fn write_checkpoint(
    path: &Path,
    state: &ChainState,
    schedule: Option<&TemperatureSchedule>,
) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&Checkpoint::from_state(state, schedule))?)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(ChainState, Option<TemperatureSchedule>)> {
    let text = fs::read_to_string(path)?;
    let ck: Checkpoint =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(ck.into_state())
}

/// One solver trace row (JSONL).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: u64,
    #[serde(rename = "T")]
    pub temp: f64,
    #[serde(rename = "V_z")]
    pub v_z: f64,
    #[serde(rename = "V_gh")]
    pub v_gh: f64,
    pub feas: f64,
}

/// One per-sweep analysis row (JSONL).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub n: u64,
    #[serde(rename = "T")]
    pub temp: f64,
    pub phi_dot_q: f64,
    pub psi_dot_p: f64,
    #[serde(rename = "D_odd")]
    pub d_odd: f64,
    #[serde(rename = "D_even")]
    pub d_even: f64,
    pub drift: f64,
    #[serde(rename = "T_crit")]
    pub t_crit: f64,
    pub r: f64,
}

/// One NMF trace row (JSONL).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NmfTraceRecord {
    pub epoch: u32,
    #[serde(rename = "T")]
    pub temp: f64,
    pub objective_proxy: f64,
    pub exact_objective: Option<f64>,
    pub sweeps_total: u64,
}

impl From<&EpochReport> for NmfTraceRecord {
    fn from(r: &EpochReport) -> Self {
        NmfTraceRecord {
            epoch: r.epoch,
            temp: r.temperature,
            objective_proxy: r.objective_proxy,
            exact_objective: r.exact_objective,
            sweeps_total: r.sweeps_total,
        }
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for row in rows {
        serde_json::to_writer(&mut file, row)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))?,
        );
    }
    Ok(rows)
}

/// Model file: `{shared_support, components, memberships, T, epoch}`.
#[derive(Serialize, Deserialize)]
pub struct ModelFile {
    pub shared_support: Vec<Vec<f64>>,
    pub components: Vec<Vec<f64>>,
    pub memberships: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub epoch: u32,
}

pub fn write_model(path: &Path, model: &NmfModel, shared_support: &[Vec<f64>]) -> Result<()> {
    let file = ModelFile {
        shared_support: shared_support.to_vec(),
        components: model.components.clone(),
        memberships: model.memberships.clone(),
        temperature: model.temperature,
        epoch: model.epoch,
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}
