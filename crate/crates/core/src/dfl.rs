//! Round-based decentralized federated learning under an attack plan.
//!
//! Each round every node trains on its own data, then receives the freshly
//! trained models of neighbours whose transmissions reach it, and replaces
//! its model with the uniform average of its own and the received models.
//! Every node model is scored on the pooled test set after averaging.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::AttackPlan;
use crate::error::{Error, Result};
use crate::fnn::{self, FnnSpec, LabeledData, ModelParams, RmsProp, TrainConfig};
use crate::graph::{NodeId, Topology};
use crate::seed::{node_stream, round_stream, Purpose};
use crate::signal::{to_labeled, Datasets};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub epsilon: f64,
    pub window_m: usize,
    pub max_rounds: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            epsilon: 0.01,
            window_m: 100,
            max_rounds: 1000,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if self.window_m == 0 {
            return Err(Error::config("window_m", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceTime {
    /// 1-based round after which the best average stopped improving.
    Converged(usize),
    NotConverged,
}

/// Whether the best average stays within `epsilon` of `best[t]` for the `m`
/// rounds after `t` (1-based).
fn window_closes(best: &[f64], t: usize, config: &ConvergenceConfig) -> bool {
    let m = config.window_m;
    if t == 0 || t + m > best.len() {
        return false;
    }
    let base = best[t - 1];
    (1..=m).all(|k| best[t - 1 + k] - base < config.epsilon)
}

/// Smallest round `t` with `best(t+k) - best(t) < ε` for every `k` in
/// `1..=m`, considering only windows that end by `max_rounds`.
pub fn convergence_time(best: &[f64], config: &ConvergenceConfig) -> ConvergenceTime {
    let horizon = best.len().min(config.max_rounds);
    let series = &best[..horizon];
    (1..=horizon)
        .find(|&t| window_closes(series, t, config))
        .map_or(ConvergenceTime::NotConverged, ConvergenceTime::Converged)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    pub node_accuracy: Vec<f64>,
    pub average: f64,
    pub minimum: f64,
    /// Running maximum of `average` up to this round.
    pub best_average: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub convergence: ConvergenceTime,
    /// First round at which the best average was reached.
    pub best_round: usize,
    pub minimum_accuracy: f64,
    pub average_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rounds: Vec<RoundMetrics>,
    pub convergence: ConvergenceTime,
    pub max_rounds: usize,
}

impl ExperimentResult {
    pub fn best_average_series(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.best_average).collect()
    }

    /// Convergence time with minimum and average accuracy taken at the round
    /// that first achieved the best average. `None` if no round ran.
    pub fn summary(&self) -> Option<ExperimentSummary> {
        let best = self.rounds.iter().map(|r| r.average).fold(f64::NEG_INFINITY, f64::max);
        let at = self.rounds.iter().find(|r| r.average == best)?;
        Some(ExperimentSummary {
            convergence: self.convergence,
            best_round: at.round,
            minimum_accuracy: at.minimum,
            average_accuracy: at.average,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    pub round: usize,
    pub models: Vec<ModelParams>,
    pub optimizers: Vec<RmsProp>,
    /// Accuracy of each node model on the pooled test set.
    pub accuracies: Vec<f64>,
}

/// Neighbours whose models `node` receives under `plan`, ascending.
pub fn effective_neighbors(node: NodeId, topology: &Topology, plan: &AttackPlan) -> Vec<NodeId> {
    topology
        .neighbors(node)
        .iter()
        .copied()
        .filter(|&u| !plan.blocks(u, node))
        .collect()
}

/// Everything fixed for the duration of one DFL run.
#[derive(Debug, Clone)]
pub struct Experiment<'a> {
    topology: &'a Topology,
    plan: &'a AttackPlan,
    train: Vec<LabeledData>,
    pooled_test: LabeledData,
    spec: FnnSpec,
    train_config: TrainConfig,
    master_seed: u64,
    inbound: Vec<Vec<NodeId>>,
}

impl<'a> Experiment<'a> {
    pub fn new(
        topology: &'a Topology,
        plan: &'a AttackPlan,
        train: Vec<LabeledData>,
        pooled_test: LabeledData,
        spec: FnnSpec,
        train_config: TrainConfig,
        master_seed: u64,
    ) -> Result<Self> {
        spec.validate()?;
        train_config.validate()?;
        if train.len() != topology.node_count() {
            return Err(Error::Dimension {
                expected: topology.node_count(),
                got: train.len(),
            });
        }
        if pooled_test.is_empty() {
            return Err(Error::Empty("pooled test set"));
        }
        let inbound = (0..topology.node_count())
            .map(|v| effective_neighbors(v, topology, plan))
            .collect();
        Ok(Experiment {
            topology,
            plan,
            train,
            pooled_test,
            spec,
            train_config,
            master_seed,
            inbound,
        })
    }

    pub fn from_datasets(
        topology: &'a Topology,
        plan: &'a AttackPlan,
        datasets: &Datasets,
        spec: FnnSpec,
        train_config: TrainConfig,
        master_seed: u64,
    ) -> Result<Self> {
        let train = datasets.nodes.iter().map(|d| to_labeled(&d.train)).collect();
        Self::new(
            topology,
            plan,
            train,
            to_labeled(&datasets.pooled_test),
            spec,
            train_config,
            master_seed,
        )
    }

    pub fn topology(&self) -> &Topology {
        self.topology
    }

    pub fn plan(&self) -> &AttackPlan {
        self.plan
    }

    pub fn inbound(&self, node: NodeId) -> &[NodeId] {
        &self.inbound[node]
    }

    fn score(&self, models: &[ModelParams]) -> Result<Vec<f64>> {
        models.par_iter().map(|m| fnn::evaluate(m, &self.pooled_test)).collect()
    }

    /// Round 0: independent random models per node, fresh optimizers.
    pub fn initial_state(&self) -> Result<RoundState> {
        let models: Vec<ModelParams> = (0..self.topology.node_count())
            .map(|v| fnn::init(&self.spec, &mut node_stream(self.master_seed, Purpose::Init, v)))
            .collect();
        let optimizers = models.iter().map(RmsProp::new).collect();
        let accuracies = self.score(&models)?;
        Ok(RoundState {
            round: 0,
            models,
            optimizers,
            accuracies,
        })
    }

    /// Train, exchange, average, score. Each node averages its own trained
    /// model with those it received, summed in ascending node order.
    pub fn run_round(&self, state: RoundState) -> Result<RoundState> {
        let round = state.round + 1;
        let trained: Vec<(ModelParams, RmsProp)> = state
            .models
            .into_par_iter()
            .zip(state.optimizers.into_par_iter())
            .enumerate()
            .map(|(v, (model, mut opt))| {
                let mut rng = round_stream(self.master_seed, v, round);
                let next = fnn::train_local(
                    &self.spec,
                    &model,
                    &mut opt,
                    &self.train[v],
                    &self.train_config,
                    &mut rng,
                )?;
                Ok((next, opt))
            })
            .collect::<Result<_>>()?;
        let (trained, optimizers): (Vec<ModelParams>, Vec<RmsProp>) = trained.into_iter().unzip();

        let models = (0..trained.len())
            .into_par_iter()
            .map(|v| {
                // sum in ascending node order so nodes with equal inbound sets agree exactly
                let mut members = self.inbound[v].clone();
                let at = members.partition_point(|&u| u < v);
                members.insert(at, v);
                fnn::federated_average(members.iter().map(|&u| &trained[u]))
            })
            .collect::<Result<Vec<_>>>()?;
        let accuracies = self.score(&models)?;
        Ok(RoundState {
            round,
            models,
            optimizers,
            accuracies,
        })
    }

    pub fn run(&self, convergence: &ConvergenceConfig) -> Result<ExperimentResult> {
        self.run_with(convergence, |_, _| {}).map(|(result, _)| result)
    }

    /// Runs until the convergence window closes or `max_rounds` is reached,
    /// calling `observe` after every round. Returns the final state as well.
    pub fn run_with(
        &self,
        convergence: &ConvergenceConfig,
        mut observe: impl FnMut(&RoundState, &RoundMetrics),
    ) -> Result<(ExperimentResult, RoundState)> {
        convergence.validate()?;
        let mut state = self.initial_state()?;
        let mut rounds: Vec<RoundMetrics> = Vec::new();
        let mut best_series: Vec<f64> = Vec::new();
        let mut verdict = ConvergenceTime::NotConverged;
        let mut best = f64::NEG_INFINITY;
        while state.round < convergence.max_rounds {
            state = self.run_round(state)?;
            let n = state.accuracies.len() as f64;
            let average = state.accuracies.iter().sum::<f64>() / n;
            let minimum = state.accuracies.iter().copied().fold(f64::INFINITY, f64::min);
            best = best.max(average);
            best_series.push(best);
            let metrics = RoundMetrics {
                round: state.round,
                node_accuracy: state.accuracies.clone(),
                average,
                minimum,
                best_average: best,
            };
            observe(&state, &metrics);
            rounds.push(metrics);
            // windows for earlier t were checked in earlier rounds
            if let Some(t) = state.round.checked_sub(convergence.window_m) {
                if window_closes(&best_series, t, convergence) {
                    verdict = ConvergenceTime::Converged(t);
                    break;
                }
            }
        }
        Ok((
            ExperimentResult {
                rounds,
                convergence: verdict,
                max_rounds: convergence.max_rounds,
            },
            state,
        ))
    }
}

/// One full DFL run on generated datasets.
pub fn run_experiment(
    topology: &Topology,
    plan: &AttackPlan,
    datasets: &Datasets,
    spec: &FnnSpec,
    train_config: &TrainConfig,
    convergence: &ConvergenceConfig,
    master_seed: u64,
) -> Result<ExperimentResult> {
    Experiment::from_datasets(
        topology,
        plan,
        datasets,
        spec.clone(),
        train_config.clone(),
        master_seed,
    )?
    .run(convergence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{attack_all, mcba_s2, ndba_s1, no_attack, JammerPlacement};
    use crate::graph::{build_topology, LayoutParams, Link, Position, TopologyKind};
    use crate::seed::{node_stream, Purpose};

    fn conv(m: usize, max: usize) -> ConvergenceConfig {
        ConvergenceConfig {
            epsilon: 0.01,
            window_m: m,
            max_rounds: max,
        }
    }

    #[test]
    fn constant_series_converges_at_one() {
        assert_eq!(
            convergence_time(&[0.7; 200], &conv(100, 1000)),
            ConvergenceTime::Converged(1)
        );
    }

    #[test]
    fn rising_series_never_converges() {
        let s: Vec<f64> = (0..1000).map(|i| 0.02 * i as f64).collect();
        assert_eq!(convergence_time(&s, &conv(100, 1000)), ConvergenceTime::NotConverged);
    }

    #[test]
    fn step_series_converges_at_step() {
        let s: Vec<f64> = (1..=200).map(|r| if r <= 50 { 0.5 } else { 0.9 }).collect();
        assert_eq!(convergence_time(&s, &conv(100, 1000)), ConvergenceTime::Converged(51));
    }

    #[test]
    fn short_series_is_undecided() {
        assert_eq!(
            convergence_time(&[0.5; 100], &conv(100, 1000)),
            ConvergenceTime::NotConverged
        );
        assert_eq!(convergence_time(&[], &conv(100, 1000)), ConvergenceTime::NotConverged);
        assert_eq!(
            convergence_time(&[0.5; 101], &conv(100, 1000)),
            ConvergenceTime::Converged(1)
        );
    }

    #[test]
    fn effective_neighbor_rules() {
        let line = build_topology(
            TopologyKind::Line,
            &LayoutParams::default(),
            &mut node_stream(0, Purpose::Topology, 0),
        )
        .unwrap();
        let all = attack_all(&line);
        assert!((0..5).all(|v| effective_neighbors(v, &line, &all).is_empty()));
        let none = no_attack();
        assert_eq!(effective_neighbors(2, &line, &none), vec![1, 3]);

        let s1 = ndba_s1(&line, 1);
        assert!(s1.jammed_links.contains(&Link::new(0, 1)));
        assert!(effective_neighbors(0, &line, &s1).is_empty());
        assert_eq!(effective_neighbors(1, &line, &s1), vec![2]);

        let jam = [JammerPlacement {
            position: line.position(1),
            range: 10.0,
        }];
        let s2 = mcba_s2(&line, &jam, 1).unwrap();
        assert_eq!(effective_neighbors(1, &line, &s2), vec![2]);
        assert_eq!(effective_neighbors(0, &line, &s2), vec![1]);
    }

    fn toy_data(n: usize, offset: f64) -> LabeledData {
        let rows: Vec<(Vec<f64>, usize)> = (0..n)
            .map(|i| {
                let label = i % 2;
                let sign = if label == 0 { -1.0 } else { 1.0 };
                let f = (0..4)
                    .map(|k| sign * (1.0 + 0.1 * ((i * 7 + k) % 5) as f64) + offset)
                    .collect();
                (f, label)
            })
            .collect();
        LabeledData::from_rows(rows.iter().map(|(f, l)| (f.as_slice(), *l)), 4).unwrap()
    }

    fn toy_spec() -> FnnSpec {
        FnnSpec {
            input_size: 4,
            hidden_sizes: vec![8],
            output_size: 2,
            dropout_rate: 0.2,
        }
    }

    fn complete(n: usize) -> Topology {
        let pos = (0..n).map(|i| Position::new(i as f64, 0.0)).collect();
        let links = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| Link::new(a, b)));
        Topology::with_links(pos, 1.0, links).unwrap()
    }

    #[test]
    fn complete_graph_models_agree_after_a_round() {
        let topo = complete(4);
        let plan = no_attack();
        let train = vec![toy_data(40, 0.0); 4];
        let exp = Experiment::new(
            &topo,
            &plan,
            train,
            toy_data(20, 0.0),
            toy_spec(),
            TrainConfig::default(),
            3,
        )
        .unwrap();
        let s0 = exp.initial_state().unwrap();
        let spread = |s: &RoundState| {
            (1..s.models.len())
                .map(|v| s.models[0].distance_sq(&s.models[v]))
                .fold(0.0, f64::max)
        };
        let mut prev = spread(&s0);
        assert!(prev > 0.0);
        let mut s = s0;
        for _ in 0..3 {
            s = exp.run_round(s).unwrap();
            let d = spread(&s);
            assert!(d <= prev);
            assert_eq!(d, 0.0);
            prev = d;
        }
    }

    #[test]
    fn identical_start_stays_identical_on_complete_graph() {
        let topo = complete(5);
        let plan = no_attack();
        let exp = Experiment::new(
            &topo,
            &plan,
            vec![toy_data(40, 0.0); 5],
            toy_data(20, 0.0),
            toy_spec(),
            TrainConfig::default(),
            9,
        )
        .unwrap();
        let mut s0 = exp.initial_state().unwrap();
        let shared = s0.models[0].clone();
        s0.models.iter_mut().for_each(|m| *m = shared.clone());
        let s1 = exp.run_round(s0).unwrap();
        assert!(s1.models.iter().all(|m| *m == s1.models[0]));
        assert_ne!(s1.models[0], shared);
    }

    #[test]
    fn isolated_node_keeps_its_trained_model() {
        let topo = complete(3);
        let plan = attack_all(&topo);
        let exp = Experiment::new(
            &topo,
            &plan,
            vec![toy_data(16, 0.0); 3],
            toy_data(8, 0.0),
            toy_spec(),
            TrainConfig::default(),
            1,
        )
        .unwrap();
        let s0 = exp.initial_state().unwrap();
        let s1 = exp.run_round(s0.clone()).unwrap();
        for v in 0..3 {
            let mut opt = s0.optimizers[v].clone();
            let solo = fnn::train_local(
                &toy_spec(),
                &s0.models[v],
                &mut opt,
                &toy_data(16, 0.0),
                &TrainConfig::default(),
                &mut round_stream(1, v, 1),
            )
            .unwrap();
            assert_eq!(s1.models[v], solo);
            assert_eq!(s1.optimizers[v], opt);
        }
    }

    #[test]
    fn experiment_is_deterministic_and_monotone() {
        let topo = complete(3);
        let plan = no_attack();
        let exp = Experiment::new(
            &topo,
            &plan,
            vec![toy_data(32, 0.0); 3],
            toy_data(16, 0.0),
            toy_spec(),
            TrainConfig::default(),
            8,
        )
        .unwrap();
        let cfg = conv(5, 40);
        let a = exp.run(&cfg).unwrap();
        assert_eq!(a, exp.run(&cfg).unwrap());
        let best = a.best_average_series();
        assert!(best.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.convergence, convergence_time(&best, &cfg));
        assert!(matches!(a.convergence, ConvergenceTime::Converged(_)));
        // stopped as soon as the window closed
        if let ConvergenceTime::Converged(t) = a.convergence {
            assert_eq!(a.rounds.len(), t + cfg.window_m);
        }
        let s = a.summary().unwrap();
        assert!(s.average_accuracy >= 0.95);
        assert!(s.minimum_accuracy <= s.average_accuracy);
    }

    #[test]
    fn zero_rounds() {
        let topo = complete(2);
        let plan = no_attack();
        let exp = Experiment::new(
            &topo,
            &plan,
            vec![toy_data(8, 0.0); 2],
            toy_data(8, 0.0),
            toy_spec(),
            TrainConfig::default(),
            0,
        )
        .unwrap();
        let r = exp.run(&conv(100, 0)).unwrap();
        assert!(r.rounds.is_empty());
        assert_eq!(r.convergence, ConvergenceTime::NotConverged);
        assert!(r.summary().is_none());
    }

    #[test]
    fn wrong_dataset_count() {
        let topo = complete(3);
        let plan = no_attack();
        assert!(Experiment::new(
            &topo,
            &plan,
            vec![toy_data(8, 0.0); 2],
            toy_data(8, 0.0),
            toy_spec(),
            TrainConfig::default(),
            0
        )
        .is_err());
    }
}
