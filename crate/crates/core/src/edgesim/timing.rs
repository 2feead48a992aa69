use crate::error::{contract, Result};

use super::{round_energy, Node, Topology};

/// Where one client's work ran and how much of it there was.
#[derive(Debug, Clone, PartialEq)]
pub struct HostedWork {
    pub client: usize,
    pub host: usize,
    pub samples: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTiming {
    /// Download + compute + upload per hosted task, in input order.
    pub per_task: Vec<f64>,
    pub aggregation: f64,
    /// Slowest task plus aggregation.
    pub total: f64,
}

/// Wall-clock time of a synchronous round. Tasks sharing a host split its
/// compute rate evenly.
pub fn round_time(topology: &Topology, work: &[HostedWork], param_count: usize) -> Result<RoundTiming> {
    if work.is_empty() {
        return Err(contract("round time needs at least one hosted task"));
    }
    let p = param_count as f64;
    let mut sharing = vec![0usize; topology.nodes.len()];
    for w in work {
        topology.node(w.host)?;
        sharing[w.host] += 1;
    }
    let mut per_task = Vec::with_capacity(work.len());
    for w in work {
        let route = topology.route(topology.aggregator, w.host)?;
        let transfer = route.transfer_time(p);
        let rate = topology.nodes[w.host].compute_rate / sharing[w.host] as f64;
        let compute = if w.samples == 0.0 { 0.0 } else { w.samples / rate };
        per_task.push(2.0 * transfer + compute);
    }
    let aggregation = if topology.aggregation_rate.is_infinite() {
        0.0
    } else {
        work.len() as f64 * p / topology.aggregation_rate
    };
    let slowest = per_task.iter().copied().fold(0.0, f64::max);
    Ok(RoundTiming {
        per_task,
        aggregation,
        total: slowest + aggregation,
    })
}

/// Node after spending one round of `samples` and `params` worth of energy.
/// Battery floors at zero, which marks the node depleted.
pub fn drain_energy(node: &Node, samples: f64, params: f64) -> Node {
    let mut out = node.clone();
    if let Some(b) = out.battery.as_mut() {
        *b = (*b - round_energy(node, samples, params)).max(0.0);
    }
    out
}
