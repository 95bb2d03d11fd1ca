//! Wasserstein NMF through the sampler oracle.
//!
//! Data: discrete measures with their own supports. Model: `k` component
//! weight vectors on a shared, pre-fixed support, plus one membership vector
//! per instance. Each epoch runs, per instance, a warm-started chain on the
//! transport problem between the mixed model measure and the instance, then
//! applies entropic mirror-descent updates (plain MD on the components,
//! accelerated MD with gradient restarts on the memberships) and finally
//! decays the temperature by `1 - sqrt(1 / (m + mean instance size))`.
//!
//! Instances can be visited sequentially (default: each sees the model as
//! updated by its predecessors) or in batch (all oracles run against the
//! epoch-start model, in parallel, with updates then applied in instance
//! order, which keeps results independent of scheduling).

use crate::analysis::{self, Half};
use crate::cost::{euclidean_cost, CostMatrix};
use crate::error::{Error, Result};
use crate::exact::solve_exact;
use crate::measure::DiscreteMeasure;
use crate::parallel;
use crate::rng::RngKey;
use crate::sampler::{init_chain_with_stream, run_until_mixed, ChainState, MixReport, OtProblem};
use serde::{Deserialize, Serialize};

/// Stream-id offsets separating RNG domains under one master seed.
const STREAM_COMPONENT_INIT: u64 = 1 << 40;
const STREAM_TEMP_SCRATCH: u64 = 1 << 41;

#[derive(Clone, Debug)]
pub struct NmfDataset {
    pub instances: Vec<DiscreteMeasure>,
    /// support points of the model-side measures
    pub shared_support: Vec<Vec<f64>>,
}

impl NmfDataset {
    pub fn new(instances: Vec<DiscreteMeasure>, shared_support: Vec<Vec<f64>>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::InvalidParameter("dataset has no instances".into()));
        }
        if shared_support.is_empty() {
            return Err(Error::InvalidParameter("shared support is empty".into()));
        }
        for (i, inst) in instances.iter().enumerate() {
            if inst.support.is_none() {
                return Err(Error::InvalidParameter(format!(
                    "instance {i} carries no support points"
                )));
            }
        }
        Ok(NmfDataset { instances, shared_support })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Mean instance support size.
    pub fn mean_support_size(&self) -> f64 {
        let total: usize = self.instances.iter().map(DiscreteMeasure::len).sum();
        total as f64 / self.instances.len() as f64
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NmfModel {
    /// k weight vectors on the shared support
    pub components: Vec<Vec<f64>>,
    /// one membership vector per instance
    pub memberships: Vec<Vec<f64>>,
    pub temperature: f64,
    pub epoch: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    Sequential,
    Batch,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub k: usize,
    /// mirror-descent step size
    pub gamma: f64,
    pub epochs: u32,
    pub seed: u64,
    /// mixing-diagnostic lag
    pub tau: u32,
    /// starting temperature; derived from the critical temperature when None
    pub initial_temp: Option<f64>,
    /// sweep cap per oracle call
    pub max_sweeps: u32,
    pub update_mode: UpdateMode,
    /// epochs between exact-objective checkpoints (0 = never)
    pub exact_every: u32,
}

impl TrainConfig {
    pub fn new(k: usize, gamma: f64, epochs: u32, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma {gamma} must be positive")));
        }
        Ok(TrainConfig {
            k,
            gamma,
            epochs,
            seed,
            tau: 5,
            initial_temp: None,
            max_sweeps: 200,
            update_mode: UpdateMode::Sequential,
            exact_every: 5,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: u32,
    pub temperature: f64,
    /// sum of the per-instance surrogate energies at oracle exit
    pub objective_proxy: f64,
    /// exact transport objective, present on checkpoint epochs
    pub exact_objective: Option<f64>,
    pub sweeps_total: u64,
    pub per_instance_v: Vec<f64>,
    pub per_instance_sweeps: Vec<u32>,
}

/// Entropic mirror-descent step on the simplex:
/// `v'_i ∝ v_i * exp(-gamma * grad_i)`. Computed in the log domain with the
/// max exponent subtracted, so constant gradient shifts cancel exactly.
pub fn md_step(v: &[f64], grad: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if grad.len() != v.len() {
        return Err(Error::DimensionMismatch("gradient length".into()));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("non-finite gradient entry".into()));
    }
    let logits: Vec<f64> = v.iter().zip(grad).map(|(&vi, &gi)| vi.ln() - gamma * gi).collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logits.iter().map(|&x| (x - top).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(unnorm.into_iter().map(|x| x / total).collect())
}

/// Accelerated mirror descent on the simplex with gradient restarts.
///
/// Keeps an averaged iterate `beta` and an aggressive mirror sequence `aux`;
/// momentum resets (`steps = 0`, `aux = beta`) whenever the step still
/// correlates positively with the gradient.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmdState {
    pub beta: Vec<f64>,
    aux: Vec<f64>,
    steps: u32,
}

const AMD_R: f64 = 3.0;

impl AmdState {
    pub fn new(k: usize) -> Self {
        let beta = vec![1.0 / k as f64; k];
        AmdState { aux: beta.clone(), beta, steps: 0 }
    }

    pub fn step(&mut self, grad: &[f64], gamma: f64) -> Result<()> {
        if grad.len() != self.beta.len() {
            return Err(Error::DimensionMismatch("gradient length".into()));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("non-finite gradient entry".into()));
        }
        self.steps += 1;
        let k = self.steps as f64;
        let lambda = AMD_R / (AMD_R + k);
        self.aux = md_step(&self.aux, grad, gamma * k / AMD_R)?;
        let new_beta: Vec<f64> = self
            .beta
            .iter()
            .zip(&self.aux)
            .map(|(&b, &z)| (1.0 - lambda) * b + lambda * z)
            .collect();
        let descent: f64 = grad.iter().zip(new_beta.iter().zip(&self.beta)).map(|(&g, (&n, &o))| g * (n - o)).sum();
        if descent > 0.0 {
            self.steps = 0;
            self.aux.clone_from(&new_beta);
        }
        self.beta = new_beta;
        Ok(())
    }
}

/// The trainer: model, per-instance chains and momentum states, cached cost
/// matrices (supports are fixed, so each is built once).
pub struct WassersteinNmf {
    pub dataset: NmfDataset,
    pub model: NmfModel,
    pub config: TrainConfig,
    chains: Vec<ChainState>,
    amd: Vec<AmdState>,
    costs: Vec<CostMatrix>,
}

impl WassersteinNmf {
    /// Seeded initialization: components are floored uniform-random positives
    /// normalized onto the simplex, memberships uniform. The starting
    /// temperature defaults to a small share of the mean critical
    /// temperature across instances (measured on scratch chains after one
    /// hot sweep, since the fresh state on shared supports is slack-free
    /// and would give zero).
    pub fn new(dataset: NmfDataset, config: TrainConfig) -> Result<Self> {
        let m = dataset.shared_support.len();
        let key = RngKey::new(config.seed, STREAM_COMPONENT_INIT);
        let mut components = Vec::with_capacity(config.k);
        for k in 0..config.k {
            let raw: Vec<f64> =
                (0..m).map(|i| key.unit_open(k as u64, i as u64).max(1e-6)).collect();
            let total: f64 = raw.iter().sum();
            components.push(raw.into_iter().map(|x| x / total).collect());
        }
        let memberships = vec![vec![1.0 / config.k as f64; config.k]; dataset.len()];
        let mut model =
            NmfModel { components, memberships, temperature: f64::NAN, epoch: 0 };

        let costs: Vec<CostMatrix> = dataset
            .instances
            .iter()
            .map(|inst| {
                euclidean_cost(
                    &dataset.shared_support,
                    inst.support.as_ref().expect("validated support"),
                    2.0,
                )
            })
            .collect::<Result<_>>()?;
        let chains: Vec<ChainState> = (0..dataset.len())
            .map(|i| {
                let p = mixed_weights(&model, i)?;
                let problem = OtProblem::new(&p, &dataset.instances[i], &costs[i])?;
                Ok(init_chain_with_stream(&problem, config.seed, i as u64))
            })
            .collect::<Result<_>>()?;
        let amd = vec![AmdState::new(config.k); dataset.len()];

        model.temperature = match config.initial_temp {
            Some(t) if t > 0.0 => t,
            _ => derive_initial_temperature(&dataset, &model, &costs, config.seed)?,
        };
        Ok(WassersteinNmf { dataset, model, config, chains, amd, costs })
    }

    /// `sum_k beta_k * v_k` for instance `i`, floored back onto the strictly
    /// positive simplex.
    pub fn mixed_weights(&self, i: usize) -> Result<DiscreteMeasure> {
        mixed_weights(&self.model, i)
    }

    /// Runs the warm-started oracle for instance `i` at temperature `temp`;
    /// returns the model-side gradient (the chain's `upper`) and the mixing
    /// report. The chain advances in place.
    pub fn oracle_step(&mut self, i: usize, temp: f64) -> Result<(Vec<f64>, MixReport)> {
        if i >= self.dataset.len() {
            return Err(Error::InvalidParameter(format!("instance {i} out of range")));
        }
        let p = mixed_weights(&self.model, i)?;
        let problem = OtProblem::new(&p, &self.dataset.instances[i], &self.costs[i])?;
        let report = run_until_mixed(
            &mut self.chains[i],
            &problem,
            temp,
            self.config.tau,
            self.config.max_sweeps,
        );
        Ok((self.chains[i].upper.clone(), report))
    }

    fn apply_updates(&mut self, i: usize, grad_p: &[f64]) -> Result<()> {
        let gamma = self.config.gamma;
        for k in 0..self.config.k {
            let scale = self.model.memberships[i][k];
            let grad: Vec<f64> = grad_p.iter().map(|&u| scale * u).collect();
            self.model.components[k] = md_step(&self.model.components[k], &grad, gamma)?;
        }
        let grad_beta: Vec<f64> = self
            .model
            .components
            .iter()
            .map(|v| v.iter().zip(grad_p).map(|(&a, &b)| a * b).sum())
            .collect();
        self.amd[i].step(&grad_beta, gamma)?;
        self.model.memberships[i].clone_from(&self.amd[i].beta);
        Ok(())
    }

    /// One training epoch; returns the report (exact objective filled on
    /// checkpoint epochs).
    pub fn epoch(&mut self) -> Result<EpochReport> {
        let n = self.dataset.len();
        let temp = self.model.temperature;
        let mut per_instance_v = vec![0.0; n];
        let mut per_instance_sweeps = vec![0u32; n];
        match self.config.update_mode {
            UpdateMode::Sequential => {
                for i in 0..n {
                    let (grad, report) = self.oracle_step(i, temp)?;
                    per_instance_v[i] = report.final_v;
                    per_instance_sweeps[i] = report.sweeps_used;
                    self.apply_updates(i, &grad)?;
                }
            }
            UpdateMode::Batch => {
                // all oracles against the epoch-start model, then ordered updates
                let model = &self.model;
                let dataset = &self.dataset;
                let costs = &self.costs;
                let tau = self.config.tau;
                let cap = self.config.max_sweeps;
                let results: Vec<Result<(ChainState, Vec<f64>, MixReport)>> =
                    parallel::map_indexed(n, |i| {
                        let p = mixed_weights(model, i)?;
                        let problem = OtProblem::new(&p, &dataset.instances[i], &costs[i])?;
                        let mut chain = self.chains[i].clone();
                        let report = run_until_mixed(&mut chain, &problem, temp, tau, cap);
                        let grad = chain.upper.clone();
                        Ok((chain, grad, report))
                    });
                let mut grads = Vec::with_capacity(n);
                for (i, res) in results.into_iter().enumerate() {
                    let (chain, grad, report) = res?;
                    self.chains[i] = chain;
                    per_instance_v[i] = report.final_v;
                    per_instance_sweeps[i] = report.sweeps_used;
                    grads.push(grad);
                }
                for (i, grad) in grads.iter().enumerate() {
                    self.apply_updates(i, grad)?;
                }
            }
        }
        let m = self.dataset.shared_support.len() as f64;
        let mbar = self.dataset.mean_support_size();
        self.model.temperature *= 1.0 - (1.0 / (m + mbar)).sqrt();
        self.model.epoch += 1;
        let exact_objective = if self.config.exact_every > 0
            && (self.model.epoch == 1 || self.model.epoch % self.config.exact_every == 0)
        {
            Some(self.exact_objective()?)
        } else {
            None
        };
        Ok(EpochReport {
            epoch: self.model.epoch,
            temperature: self.model.temperature,
            objective_proxy: per_instance_v.iter().sum(),
            exact_objective,
            sweeps_total: per_instance_sweeps.iter().map(|&s| s as u64).sum(),
            per_instance_v,
            per_instance_sweeps,
        })
    }

    /// `sum_i W(mixed_i, instance_i)` evaluated with the exact solver.
    pub fn exact_objective(&self) -> Result<f64> {
        let per_instance: Vec<Result<f64>> = parallel::map_indexed(self.dataset.len(), |i| {
            let p = mixed_weights(&self.model, i)?;
            Ok(solve_exact(&p, &self.dataset.instances[i], &self.costs[i])?.cost)
        });
        let mut total = 0.0;
        for r in per_instance {
            total += r?;
        }
        Ok(total)
    }
}

fn mixed_weights(model: &NmfModel, i: usize) -> Result<DiscreteMeasure> {
    let beta = model
        .memberships
        .get(i)
        .ok_or_else(|| Error::InvalidParameter(format!("instance {i} out of range")))?;
    let m = model.components[0].len();
    let mut mix = vec![0.0; m];
    for (k, v) in model.components.iter().enumerate() {
        let b = beta[k];
        for (slot, &vi) in mix.iter_mut().zip(v) {
            *slot += b * vi;
        }
    }
    DiscreteMeasure::new(mix, None)
}

/// Share of the critical temperature used for the derived starting
/// temperature. Cool starts descend from the first epoch; hot ones spend
/// early epochs optimizing the smoothed surrogate at the expense of the
/// exact objective.
const NMF_TEMP_ETA: f64 = 0.1;

/// `NMF_TEMP_ETA` times the mean critical temperature across instances,
/// measured after one sweep at a crude hot temperature on scratch chains
/// (dedicated RNG streams, so real chains are untouched). The fresh state
/// itself is slack-free whenever supports coincide, which would give zero.
fn derive_initial_temperature(
    dataset: &NmfDataset,
    model: &NmfModel,
    costs: &[CostMatrix],
    seed: u64,
) -> Result<f64> {
    let n = dataset.len();
    let per_instance: Vec<Result<f64>> = parallel::map_indexed(n, |i| {
        let p = mixed_weights(model, i)?;
        let problem = OtProblem::new(&p, &dataset.instances[i], &costs[i])?;
        let mut scratch = init_chain_with_stream(&problem, seed, STREAM_TEMP_SCRATCH + i as u64);
        let tc = analysis::critical_temperature(&scratch, &problem, Half::ColUpdate)?;
        if tc > 0.0 {
            return Ok(tc);
        }
        let hot = costs[i].mean().max(1e-6);
        scratch.sweep(&problem, hot, hot);
        analysis::critical_temperature(&scratch, &problem, Half::ColUpdate)
    });
    let mut total = 0.0;
    for r in per_instance {
        total += r?;
    }
    let derived = NMF_TEMP_ETA * total / n as f64;
    if derived > 0.0 {
        Ok(derived)
    } else {
        Err(Error::InvalidParameter(
            "could not derive a positive initial temperature".into(),
        ))
    }
}

/// Trains a model from scratch; deterministic in `(dataset, config)`.
pub fn fit(dataset: NmfDataset, config: TrainConfig) -> Result<(NmfModel, Vec<EpochReport>)> {
    let mut trainer = WassersteinNmf::new(dataset, config)?;
    let mut reports = Vec::with_capacity(trainer.config.epochs as usize);
    for _ in 0..trainer.config.epochs {
        reports.push(trainer.epoch()?);
    }
    Ok((trainer.model, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::make_measure;

    fn grid_support(side: usize) -> Vec<Vec<f64>> {
        let mut pts = Vec::with_capacity(side * side);
        for r in 0..side {
            for c in 0..side {
                pts.push(vec![(c as f64 + 0.5) / side as f64, (r as f64 + 0.5) / side as f64]);
            }
        }
        pts
    }

    fn tiny_dataset() -> NmfDataset {
        let support = grid_support(3);
        let key = RngKey::new(99, 0);
        let instances = (0..4)
            .map(|i| {
                let raw: Vec<f64> = (0..9).map(|j| key.unit_open(i, j as u64)).collect();
                make_measure(raw, Some(support.clone())).unwrap()
            })
            .collect();
        NmfDataset::new(instances, support).unwrap()
    }

    #[test]
    fn mixed_weights_trivial_cases() {
        let model = NmfModel {
            components: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            memberships: vec![vec![0.5, 0.5]],
            temperature: 1.0,
            epoch: 0,
        };
        let mix = mixed_weights(&model, 0).unwrap();
        assert!((mix.weights[0] - 0.5).abs() < 1e-9);
        assert!((mix.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let single = NmfModel {
            components: vec![vec![0.25, 0.75]],
            memberships: vec![vec![1.0]],
            temperature: 1.0,
            epoch: 0,
        };
        let mix = mixed_weights(&single, 0).unwrap();
        assert!((mix.weights[1] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn md_step_examples() {
        let v = vec![0.5, 0.5];
        assert_eq!(md_step(&v, &[0.0, 0.0], 2.0).unwrap(), v);
        let shifted = md_step(&v, &[3.0, 3.0], 2.0).unwrap();
        assert!((shifted[0] - 0.5).abs() < 1e-15 && (shifted[1] - 0.5).abs() < 1e-15);
        // closed form: exp(-ln 2) halves the first coordinate's weight
        let out = md_step(&v, &[1.0, 0.0], (2.0f64).ln()).unwrap();
        assert!((out[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((out[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!(md_step(&v, &[f64::NAN, 0.0], 1.0).is_err());
    }

    #[test]
    fn amd_degenerate_and_shift_invariance() {
        let mut one = AmdState::new(1);
        one.step(&[2.5], 2.0).unwrap();
        assert_eq!(one.beta, vec![1.0]);

        let mut state = AmdState::new(3);
        for _ in 0..4 {
            state.step(&[0.7, 0.7, 0.7], 2.0).unwrap();
        }
        for &b in &state.beta {
            assert!((b - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(state.steps > 0, "momentum advanced without restarting");
    }

    #[test]
    fn amd_converges_under_strict_domination() {
        // the averaged iterate approaches the dominating vertex polynomially
        let mut state = AmdState::new(2);
        for _ in 0..200 {
            state.step(&[0.0, 1.0], 2.0).unwrap();
        }
        assert!(state.beta[0] > 1.0 - 1e-4, "beta {:?}", state.beta);
    }

    #[test]
    fn simplex_preserved_through_training() {
        let config = TrainConfig::new(2, 2.0, 3, 7).unwrap();
        let (model, reports) = fit(tiny_dataset(), config).unwrap();
        assert_eq!(reports.len(), 3);
        for v in model.components.iter().chain(model.memberships.iter()) {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(v.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn epoch_temperature_decay_is_exact() {
        let config = TrainConfig::new(2, 2.0, 2, 7).unwrap();
        let mut trainer = WassersteinNmf::new(tiny_dataset(), config).unwrap();
        let m = trainer.dataset.shared_support.len() as f64;
        let mbar = trainer.dataset.mean_support_size();
        let t0 = trainer.model.temperature;
        let factor = 1.0 - (1.0 / (m + mbar)).sqrt();
        let report = trainer.epoch().unwrap();
        assert_eq!(report.temperature.to_bits(), (t0 * factor).to_bits());
    }

    #[test]
    fn zero_epochs_leaves_the_model_at_initialization() {
        let config = TrainConfig::new(2, 2.0, 0, 7).unwrap();
        let (model, reports) = fit(tiny_dataset(), config.clone()).unwrap();
        assert!(reports.is_empty());
        assert_eq!(model.epoch, 0);
        let again = WassersteinNmf::new(tiny_dataset(), config).unwrap();
        assert_eq!(model.components, again.model.components);
    }

    #[test]
    fn fit_is_deterministic_per_seed() {
        let config = TrainConfig::new(2, 2.0, 3, 11).unwrap();
        let (a, ra) = fit(tiny_dataset(), config.clone()).unwrap();
        let (b, rb) = fit(tiny_dataset(), config).unwrap();
        assert_eq!(a.components, b.components);
        assert_eq!(a.memberships, b.memberships);
        assert_eq!(a.temperature.to_bits(), b.temperature.to_bits());
        let proxy_a: Vec<u64> = ra.iter().map(|r| r.objective_proxy.to_bits()).collect();
        let proxy_b: Vec<u64> = rb.iter().map(|r| r.objective_proxy.to_bits()).collect();
        assert_eq!(proxy_a, proxy_b);
    }

    #[test]
    fn sequential_and_batch_modes_both_descend() {
        let dataset = crate::presets::two_blob_corpus(6, 8, 5).unwrap();
        for mode in [UpdateMode::Sequential, UpdateMode::Batch] {
            let mut config = TrainConfig::new(2, 2.0, 10, 5).unwrap();
            config.update_mode = mode;
            config.exact_every = 10;
            let (_, reports) = fit(dataset.clone(), config).unwrap();
            let first = reports.first().unwrap().exact_objective.unwrap();
            let last = reports.last().unwrap().exact_objective.unwrap();
            assert!(last < first, "{mode:?}: exact objective went {first} -> {last}");
        }
    }

    #[test]
    fn scalar_support_mixes_immediately() {
        // one shared support point: the oracle chain is 1x1 and the mixing
        // diagnostic fires at its lag floor
        let support = vec![vec![0.5, 0.5]];
        let instance = make_measure(vec![1.0], Some(support.clone())).unwrap();
        let dataset = NmfDataset::new(vec![instance], support).unwrap();
        let mut config = TrainConfig::new(1, 2.0, 1, 0).unwrap();
        config.initial_temp = Some(0.1);
        config.exact_every = 0;
        let mut trainer = WassersteinNmf::new(dataset, config).unwrap();
        let (grad, report) = trainer.oracle_step(0, 0.1).unwrap();
        assert_eq!(grad.len(), 1);
        assert!(report.mixed);
        assert!(report.sweeps_used <= trainer.config.tau + 1);
    }

    #[test]
    fn one_component_per_instance_reduces_every_objective() {
        // two well-separated instances with k = 2: each instance's exact
        // transport objective drops below its starting value
        let support = grid_support(8);
        let key = RngKey::new(12, 0);
        let mut instances = Vec::new();
        for (cx, cy) in [(0.25, 0.25), (0.75, 0.75)] {
            let raw: Vec<f64> = support
                .iter()
                .enumerate()
                .map(|(idx, pt)| {
                    let d2 = (pt[0] - cx).powi(2) + (pt[1] - cy).powi(2);
                    (-d2 / 0.02).exp() * (0.9 + 0.2 * key.unit_open(0, idx as u64))
                })
                .collect();
            instances.push(make_measure(raw, Some(support.clone())).unwrap());
        }
        let dataset = NmfDataset::new(instances.clone(), support).unwrap();
        let mut config = TrainConfig::new(2, 2.0, 20, 6).unwrap();
        config.exact_every = 0;
        let mut trainer = WassersteinNmf::new(dataset, config).unwrap();
        let per_instance = |t: &WassersteinNmf| -> Vec<f64> {
            (0..2)
                .map(|i| {
                    let p = t.mixed_weights(i).unwrap();
                    let cost = crate::cost::euclidean_cost(
                        &t.dataset.shared_support,
                        t.dataset.instances[i].support.as_ref().unwrap(),
                        2.0,
                    )
                    .unwrap();
                    solve_exact(&p, &t.dataset.instances[i], &cost).unwrap().cost
                })
                .collect()
        };
        let before = per_instance(&trainer);
        for _ in 0..20 {
            trainer.epoch().unwrap();
        }
        let after = per_instance(&trainer);
        for i in 0..2 {
            assert!(
                after[i] < before[i],
                "instance {i}: objective went {} -> {}",
                before[i],
                after[i]
            );
        }
    }

    #[test]
    fn warm_oracle_calls_use_no_more_sweeps_than_cold_ones() {
        // unchanged model, back-to-back oracle calls: the warm chain starts
        // at equilibrium, so it mixes at least as fast on average and in a
        // clear majority of trials (per-trial comparisons carry the
        // geometric tail of the mixing rule at its lag floor)
        let mut no_worse = 0;
        let mut cold_total = 0u32;
        let mut warm_total = 0u32;
        for seed in 0..50u64 {
            let dataset = crate::presets::two_blob_corpus(1, 8, seed).unwrap();
            let config = TrainConfig::new(2, 2.0, 1, seed).unwrap();
            let mut trainer = WassersteinNmf::new(dataset, config).unwrap();
            let temp = trainer.model.temperature;
            let (grad, cold) = trainer.oracle_step(0, temp).unwrap();
            assert_eq!(grad.len(), trainer.dataset.shared_support.len());
            let (_, warm) = trainer.oracle_step(0, temp).unwrap();
            if warm.sweeps_used <= cold.sweeps_used {
                no_worse += 1;
            }
            cold_total += cold.sweeps_used;
            warm_total += warm.sweeps_used;
        }
        assert!(warm_total <= cold_total, "warm {warm_total} vs cold {cold_total} total sweeps");
        assert!(no_worse >= 30, "warm call cheaper in only {no_worse}/50 trials");
    }

    #[test]
    fn single_component_recovers_a_single_instance() {
        // With one instance supported on the shared grid, the minimizer of
        // W(instance, component) over the component is the instance itself;
        // fifty desk-scale epochs shrink both the transport objective and
        // the total-variation gap by a wide margin.
        let support = grid_support(8);
        let key = RngKey::new(4, 0);
        let raw: Vec<f64> = (0..64).map(|j| 0.2 + key.unit_open(0, j as u64)).collect();
        let target = make_measure(raw, Some(support.clone())).unwrap();
        let dataset = NmfDataset::new(vec![target.clone()], support).unwrap();
        let mut config = TrainConfig::new(1, 2.0, 100, 3).unwrap();
        config.exact_every = 0;
        let mut trainer = WassersteinNmf::new(dataset, config).unwrap();
        let tv_of = |v: &[f64]| {
            v.iter().zip(&target.weights).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
        };
        let tv0 = tv_of(&trainer.model.components[0]);
        let mut w1 = f64::NAN;
        for e in 0..100 {
            trainer.epoch().unwrap();
            if e == 0 {
                w1 = trainer.exact_objective().unwrap();
            }
        }
        let tv = tv_of(&trainer.model.components[0]);
        let w = trainer.exact_objective().unwrap();
        assert!(tv < 0.5 * tv0, "total variation went {tv0} -> {tv}");
        assert!(w < 0.75 * w1, "exact objective went {w1} -> {w}");
    }
}
