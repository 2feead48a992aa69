use std::io::Write;

use crate::data::Dataset;
use crate::error::{contract, Error, Result};
use crate::fedtrain::{FedConfig, Federation, RoundMetrics};

use super::{
    drain_energy, round_time, Controller, HostedWork, NodeKind, PlacementDecision, Qos, ResourceReport, TaskRequest,
    Topology,
};

pub const EVENT_HEADER: [&str; 7] = [
    "round",
    "task",
    "node",
    "predicted_latency",
    "round_time",
    "node",
    "battery_remaining",
];

/// Edge deployment of a federated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub topology: Topology,
    /// Topology node of each federated client.
    pub client_nodes: Vec<usize>,
    /// Requirements of each federated client's task.
    pub qos: Vec<Qos>,
    pub latency_threshold: f64,
}

/// One placement decision and what came of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub round: usize,
    pub task: u64,
    /// `None` when no node could host the task.
    pub node: Option<usize>,
    pub predicted_latency: Option<f64>,
    pub round_time: f64,
    pub battery_remaining: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRound {
    pub metrics: RoundMetrics,
    pub round_time: f64,
    /// Seconds since the start of the run.
    pub wall_clock: f64,
    /// Battery of every node after the round; `None` is unlimited.
    pub battery: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub rounds: Vec<SimRound>,
    pub events: Vec<Event>,
}

impl SimConfig {
    fn validate(&self, fed: &FedConfig) -> Result<()> {
        if self.client_nodes.len() != fed.clients || self.qos.len() != fed.clients {
            return Err(contract(format!(
                "edge deployment lists {} client nodes and {} QoS entries for {} clients",
                self.client_nodes.len(),
                self.qos.len(),
                fed.clients
            )));
        }
        for (c, &n) in self.client_nodes.iter().enumerate() {
            if self.topology.node(n)?.kind != NodeKind::Client {
                return Err(Error::Registry(format!("client {c} maps to non-client node {n}")));
            }
            if self.client_nodes[..c].contains(&n) {
                return Err(Error::Registry(format!("node {n} hosts two federated clients")));
            }
        }
        Ok(())
    }
}

/// Runs `fed` on the edge deployment: each round places every client's task,
/// trains the placed clients, then charges time and energy.
pub fn simulate(fed: &FedConfig, sim: &SimConfig, train: &Dataset, test: &Dataset) -> Result<Simulation> {
    sim.validate(fed)?;
    let param_count = fed.model.param_count();
    let mut federation = Federation::new(fed.clone(), train, test)?;
    let mut topology = sim.topology.clone();
    let mut controller = Controller::new(topology.clone(), param_count, sim.latency_threshold);
    let mut rounds = Vec::with_capacity(fed.rounds);
    let mut events = Vec::new();
    let mut wall_clock = 0.0;

    for round in 0..fed.rounds {
        for node in &topology.nodes {
            controller.ingest_report(ResourceReport {
                node: node.id,
                timestamp: round as f64,
                compute_rate: node.compute_rate,
                battery: node.battery,
                link_bandwidth: Vec::new(),
            })?;
        }
        for (c, &client) in sim.client_nodes.iter().enumerate() {
            controller.submit_request(TaskRequest {
                task_id: (round * fed.clients + c) as u64,
                client,
                qos: sim.qos[c].clone(),
            })?;
        }
        let decisions = controller.place()?;
        let mut host = vec![None; fed.clients];
        for d in &decisions {
            if let PlacementDecision::Placed(p) = d {
                let c = sim
                    .client_nodes
                    .iter()
                    .position(|&n| n == p.client)
                    .expect("mapped client");
                host[c] = Some(p.node);
            }
        }
        let participants: Vec<bool> = host.iter().map(Option::is_some).collect();
        if !participants.contains(&true) {
            return Err(Error::Exhausted {
                round: round + 1,
                detail: "no client task could be placed".into(),
            });
        }

        let outcome = federation.run_round_with(&participants)?;
        let work: Vec<HostedWork> = (0..fed.clients)
            .filter_map(|c| {
                host[c].map(|h| HostedWork {
                    client: c,
                    host: h,
                    samples: outcome.client_samples[c] as f64,
                })
            })
            .collect();
        let timing = round_time(&topology, &work, param_count)?;
        for w in &work {
            topology.nodes[w.host] = drain_energy(&topology.nodes[w.host], w.samples, 2.0 * param_count as f64);
        }
        wall_clock += timing.total;

        for d in decisions {
            let (node, predicted) = match &d {
                PlacementDecision::Placed(p) => (Some(p.node), Some(p.predicted_latency)),
                PlacementDecision::Failed { .. } => (None, None),
            };
            events.push(Event {
                round: round + 1,
                task: d.task_id(),
                node,
                predicted_latency: predicted,
                round_time: timing.total,
                battery_remaining: node.and_then(|n| topology.nodes[n].battery),
            });
        }
        rounds.push(SimRound {
            metrics: outcome.metrics,
            round_time: timing.total,
            wall_clock,
            battery: topology.nodes.iter().map(|n| n.battery).collect(),
        });
    }
    Ok(Simulation { rounds, events })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the placement log. Unplaced tasks leave node and latency blank;
/// unlimited batteries are written as `inf`.
pub fn write_events<W: Write>(out: W, events: &[Event]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENT_HEADER)?;
    for e in events {
        let battery = match (e.node, e.battery_remaining) {
            (None, _) => String::new(),
            (Some(_), None) => "inf".to_string(),
            (Some(_), Some(b)) => b.to_string(),
        };
        w.write_record([
            e.round.to_string(),
            e.task.to_string(),
            opt(e.node),
            opt(e.predicted_latency),
            e.round_time.to_string(),
            opt(e.node),
            battery,
        ])?;
    }
    w.flush()?;
    Ok(())
}
