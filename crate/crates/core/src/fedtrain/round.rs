use rayon::prelude::*;

use crate::data::{draw_budget, partition, ClientShard, Dataset};
use crate::error::{contract, Result};
use crate::models::{mlp_logits, proto_predict, ModelSpec, ParamVector};
use crate::numeric::{argmax, Rng};

use super::{
    aggregate, aggregate_weighted, local_train, Aggregation, Direction, FedConfig, GaussianNoise, IdentityTransform,
    LocalOutcome, RoundMetrics, Transfer, TransformKind, UpdateTransform,
};

const INIT_STREAM: u64 = 0x494E_4954; // "INIT"
const LOCAL_STREAM: u64 = 0x4C4F_4341; // "LOCA"
const EVAL_CHUNK: usize = 2000;

/// Outcome of one round, including per-client work for the edge simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub metrics: RoundMetrics,
    /// Samples each client processed this round (0 for non-participants).
    pub client_samples: Vec<u64>,
}

/// Server-side state of a federated training run.
pub struct Federation<'a> {
    config: FedConfig,
    train: &'a Dataset,
    test: &'a Dataset,
    shards: Vec<ClientShard>,
    transform: Option<Box<dyn UpdateTransform>>,
    params: ParamVector,
    round: usize,
    comm: u64,
    comp: u64,
    last_budgets: Vec<Vec<usize>>,
}

impl<'a> Federation<'a> {
    pub fn new(config: FedConfig, train: &'a Dataset, test: &'a Dataset) -> Result<Self> {
        config.validate()?;
        let dim = config.model.input_dim();
        if train.dim() != dim || test.dim() != dim {
            return Err(contract(format!(
                "model expects {dim} features, data has {} (train) and {} (test)",
                train.dim(),
                test.dim()
            )));
        }
        let shards = partition(train.len(), &config.shard_sizes, config.seed)?
            .into_iter()
            .enumerate()
            .map(|(c, s)| s.with_budget(config.client_budget(c), config.sampling))
            .collect::<Result<Vec<_>>>()?;
        let params = config.model.init_params(&mut Rng::keyed(&[config.seed, INIT_STREAM]));
        let transform: Box<dyn UpdateTransform> = match config.transform {
            TransformKind::Identity => Box::new(IdentityTransform),
            TransformKind::GaussianNoise { sigma } => Box::new(GaussianNoise {
                sigma,
                seed: config.seed,
            }),
        };
        Ok(Federation {
            last_budgets: vec![Vec::new(); config.clients],
            config,
            train,
            test,
            shards,
            transform: Some(transform),
            params,
            round: 0,
            comm: 0,
            comp: 0,
        })
    }

    /// Replaces the transfer transform; `None` sends parameters untouched.
    pub fn set_transform(&mut self, transform: Option<Box<dyn UpdateTransform>>) {
        self.transform = transform;
    }

    pub fn config(&self) -> &FedConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamVector {
        &self.params
    }

    pub fn into_params(self) -> ParamVector {
        self.params
    }

    pub fn shards(&self) -> &[ClientShard] {
        &self.shards
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    fn send(&self, params: &ParamVector, client: usize, direction: Direction) -> ParamVector {
        match &self.transform {
            Some(t) => {
                let transfer = Transfer {
                    round: self.round,
                    client,
                    direction,
                };
                t.decode(&t.encode(params, transfer), transfer)
            }
            None => params.clone(),
        }
    }

    pub fn run_round(&mut self) -> Result<RoundMetrics> {
        let everyone = vec![true; self.config.clients];
        Ok(self.run_round_with(&everyone)?.metrics)
    }

    /// Broadcast, local training, collection and aggregation over the clients
    /// flagged in `participants`.
    pub fn run_round_with(&mut self, participants: &[bool]) -> Result<RoundOutcome> {
        if participants.len() != self.config.clients {
            return Err(contract("participant mask length differs from client count"));
        }
        let active: Vec<usize> = (0..self.config.clients).filter(|&c| participants[c]).collect();
        if active.is_empty() {
            return Err(contract("a round needs at least one participating client"));
        }
        let cfg = &self.config;
        let round = self.round;
        let budgets: Vec<Vec<usize>> = active
            .iter()
            .map(|&c| draw_budget(&self.shards[c], round, cfg.seed))
            .collect();
        let outcomes: Vec<LocalOutcome> = active
            .par_iter()
            .zip(budgets.par_iter())
            .map(|(&c, budget)| {
                let received = self.send(&self.params, c, Direction::Down);
                let mut rng = Rng::keyed(&[cfg.seed, LOCAL_STREAM, round as u64, c as u64]);
                let mut out = local_train(
                    &cfg.model,
                    &received,
                    self.train,
                    budget,
                    cfg.update_freq[c],
                    cfg.batch_size,
                    cfg.lr,
                    &mut rng,
                )?;
                out.params = self.send(&out.params, c, Direction::Up);
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;

        let updates: Vec<ParamVector> = outcomes.iter().map(|o| o.params.clone()).collect();
        self.params = match cfg.aggregation {
            Aggregation::Unweighted => aggregate(&updates)?,
            Aggregation::ShardWeighted => {
                let weights: Vec<f64> = active.iter().map(|&c| self.shards[c].len() as f64).collect();
                aggregate_weighted(&updates, &weights)?
            }
        };

        let param_count = cfg.model.param_count() as u64;
        self.comm += active.len() as u64 * 2 * param_count;
        let mut client_samples = vec![0u64; cfg.clients];
        for (&c, o) in active.iter().zip(&outcomes) {
            client_samples[c] = o.samples_processed;
            self.comp += o.samples_processed;
        }
        let loss = outcomes.iter().map(|o| o.mean_loss).sum::<f64>() / outcomes.len() as f64;
        for (&c, b) in active.iter().zip(budgets) {
            self.last_budgets[c] = b;
        }
        self.round += 1;
        let accuracy = self.evaluate()?;
        Ok(RoundOutcome {
            metrics: RoundMetrics {
                round: self.round,
                accuracy,
                loss,
                comm_cumulative: self.comm,
                comp_cumulative: self.comp,
            },
            client_samples,
        })
    }

    /// Test accuracy of the global parameters. Prototype models build their
    /// prototypes from the clients' most recent training budgets.
    pub fn evaluate(&self) -> Result<f64> {
        let n = self.test.len();
        if n == 0 {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        match &self.config.model {
            ModelSpec::Mlp(spec) => {
                let rows: Vec<usize> = (0..n).collect();
                for chunk in rows.chunks(EVAL_CHUNK) {
                    let batch = self.test.batch(chunk);
                    let logits = mlp_logits(spec, &self.params, &batch.inputs)?;
                    correct += (0..logits.rows())
                        .filter(|&i| argmax(logits.row(i)) == batch.labels[i])
                        .count();
                }
            }
            ModelSpec::Proto(spec) => {
                let reference: Vec<usize> = self.last_budgets.iter().flatten().copied().collect();
                if reference.is_empty() {
                    return Ok(0.0);
                }
                let reference = self.train.batch(&reference);
                let predictions = proto_predict(spec, &self.params, &reference, &self.test.images)?;
                correct = predictions
                    .iter()
                    .zip(&self.test.labels)
                    .filter(|(p, l)| p == l)
                    .count();
            }
        }
        Ok(correct as f64 / n as f64)
    }
}

/// Parameters and per-round metrics of a complete run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub metrics: Vec<RoundMetrics>,
    pub params: ParamVector,
}

pub fn run_experiment(config: &FedConfig, train: &Dataset, test: &Dataset) -> Result<Experiment> {
    let mut fed = Federation::new(config.clone(), train, test)?;
    let mut metrics = Vec::with_capacity(config.rounds);
    for _ in 0..config.rounds {
        metrics.push(fed.run_round()?);
    }
    Ok(Experiment {
        metrics,
        params: fed.into_params(),
    })
}
