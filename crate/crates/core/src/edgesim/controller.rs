use std::collections::HashSet;

use crate::error::{contract, Error, Result};

use super::{NodeKind, Topology};

/// Live status a node pushes to the controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub node: usize,
    pub timestamp: f64,
    /// Samples per second currently available.
    pub compute_rate: f64,
    pub battery: Option<f64>,
    /// `(link index, available bandwidth)` for links the node observes.
    pub link_bandwidth: Vec<(usize, f64)>,
}

/// Service requirements of one client's training task.
#[derive(Debug, Clone, PartialEq)]
pub struct Qos {
    /// Seconds.
    pub max_latency: f64,
    /// Parameters per second between the client and its host.
    pub min_bandwidth: f64,
    /// Higher is served first.
    pub priority: i64,
    /// Training samples per round.
    pub compute_demand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRequest {
    pub task_id: u64,
    pub client: usize,
    pub qos: Qos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub task_id: u64,
    pub client: usize,
    pub node: usize,
    pub predicted_latency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlacementDecision {
    Placed(Placement),
    Failed { task_id: u64, client: usize },
}

impl PlacementDecision {
    pub fn task_id(&self) -> u64 {
        match self {
            PlacementDecision::Placed(p) => p.task_id,
            PlacementDecision::Failed { task_id, .. } => *task_id,
        }
    }

    pub fn client(&self) -> usize {
        match self {
            PlacementDecision::Placed(p) => p.client,
            PlacementDecision::Failed { client, .. } => *client,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Status {
    timestamp: f64,
    compute_rate: f64,
    battery: Option<f64>,
}

/// Energy one round of `samples` and `params` costs on `node`.
pub fn round_energy(node: &super::Node, samples: f64, params: f64) -> f64 {
    samples * node.energy_per_sample + params * node.energy_per_param
}

/// Residual state a placement pass works against.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub compute_rate: Vec<f64>,
    pub battery: Vec<Option<f64>>,
    pub link_bandwidth: Vec<f64>,
}

/// Predicted round latency of a task of `qos` from `client` hosted on `host`,
/// or `None` when the host fails any feasibility condition.
pub fn evaluate_host(
    topology: &Topology,
    residual: &Residual,
    param_count: usize,
    client: usize,
    host: usize,
    qos: &Qos,
) -> Result<Option<f64>> {
    let node = topology.node(host)?;
    let rate = residual.compute_rate[host];
    if rate <= 0.0 {
        return Ok(None);
    }
    if let Some(b) = residual.battery[host] {
        let need = round_energy(node, qos.compute_demand, 2.0 * param_count as f64);
        if b <= 0.0 || b < need {
            return Ok(None);
        }
    }
    let route = match topology.route_with(client, host, &residual.link_bandwidth) {
        Ok(r) => r,
        Err(Error::Topology(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if route.bandwidth < qos.min_bandwidth {
        return Ok(None);
    }
    let latency = 2.0 * route.transfer_time(param_count as f64) + qos.compute_demand / rate;
    Ok((latency <= qos.max_latency).then_some(latency))
}

/// Central scheduler: collects resource reports, queues task requests and
/// places each task on a feasible node.
#[derive(Debug, Clone)]
pub struct Controller {
    topology: Topology,
    param_count: usize,
    /// Tasks with a tighter latency bound than this minimize latency; the
    /// rest go to the node with the most spare compute.
    latency_threshold: f64,
    status: Vec<Status>,
    link_status: Vec<(f64, f64)>,
    queue: Vec<(u64, TaskRequest)>,
    next_seq: u64,
    seen: HashSet<u64>,
}

impl Controller {
    pub fn new(topology: Topology, param_count: usize, latency_threshold: f64) -> Self {
        let status = topology
            .nodes
            .iter()
            .map(|n| Status {
                timestamp: f64::NEG_INFINITY,
                compute_rate: n.compute_rate,
                battery: n.battery,
            })
            .collect();
        let link_status = topology
            .links
            .iter()
            .map(|l| (f64::NEG_INFINITY, l.bandwidth))
            .collect();
        Controller {
            topology,
            param_count,
            latency_threshold,
            status,
            link_status,
            queue: Vec::new(),
            next_seq: 0,
            seen: HashSet::new(),
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Latest reported compute rate of `node`.
    pub fn compute_rate(&self, node: usize) -> f64 {
        self.status[node].compute_rate
    }

    /// Latest reported battery of `node`.
    pub fn battery(&self, node: usize) -> Option<f64> {
        self.status[node].battery
    }

    /// Records a report. Older reports than the latest one seen are ignored.
    pub fn ingest_report(&mut self, report: ResourceReport) -> Result<()> {
        let node = self.topology.node(report.node)?.clone();
        if !(report.compute_rate >= 0.0) || report.compute_rate > node.compute_rate {
            return Err(Error::Registry(format!(
                "node {} reports compute_rate {} beyond capacity {}",
                node.id, report.compute_rate, node.compute_rate
            )));
        }
        match (node.battery, report.battery) {
            (None, None) => {}
            (Some(_), Some(b)) if b.is_finite() => {}
            _ => {
                return Err(Error::Registry(format!(
                    "node {} reports a battery inconsistent with its registration",
                    node.id
                )))
            }
        }
        for &(li, bw) in &report.link_bandwidth {
            let Some(link) = self.topology.links.get(li) else {
                return Err(Error::Registry(format!("node {} reports unknown link {li}", node.id)));
            };
            if !(bw > 0.0) || bw > link.bandwidth {
                return Err(Error::Registry(format!(
                    "node {} reports bandwidth {bw} on link {li} beyond capacity {}",
                    node.id, link.bandwidth
                )));
            }
        }
        if report.timestamp >= self.status[node.id].timestamp {
            self.status[node.id] = Status {
                timestamp: report.timestamp,
                compute_rate: report.compute_rate,
                battery: report.battery,
            };
        }
        for (li, bw) in report.link_bandwidth {
            if report.timestamp >= self.link_status[li].0 {
                self.link_status[li] = (report.timestamp, bw);
            }
        }
        Ok(())
    }

    /// Queues a request; served by priority, then arrival order.
    pub fn submit_request(&mut self, request: TaskRequest) -> Result<()> {
        let node = self.topology.node(request.client)?;
        if node.kind != NodeKind::Client {
            return Err(Error::Registry(format!(
                "task {} names node {} which is not a client",
                request.task_id, request.client
            )));
        }
        let q = &request.qos;
        if !(q.max_latency > 0.0) || !(q.min_bandwidth >= 0.0) || !(q.compute_demand >= 0.0) {
            return Err(Error::Registry(format!(
                "task {} has invalid QoS bounds",
                request.task_id
            )));
        }
        if !self.seen.insert(request.task_id) {
            return Err(Error::Registry(format!("duplicate task id {}", request.task_id)));
        }
        self.queue.push((self.next_seq, request));
        self.next_seq += 1;
        Ok(())
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Residual capacities as of the latest reports.
    pub fn residual(&self) -> Residual {
        Residual {
            compute_rate: self.status.iter().map(|s| s.compute_rate).collect(),
            battery: self.status.iter().map(|s| s.battery).collect(),
            link_bandwidth: self.link_status.iter().map(|&(_, bw)| bw).collect(),
        }
    }

    /// Places every queued task, in priority order, debiting residual capacity
    /// as it goes. Tasks with no feasible host are reported as failures.
    pub fn place(&mut self) -> Result<Vec<PlacementDecision>> {
        if self.queue.is_empty() {
            return Err(contract("placement needs at least one queued request"));
        }
        let mut queue = std::mem::take(&mut self.queue);
        queue.sort_by(|(sa, a), (sb, b)| b.qos.priority.cmp(&a.qos.priority).then(sa.cmp(sb)));
        let mut residual = self.residual();
        let mut decisions = Vec::with_capacity(queue.len());
        for (_, req) in queue {
            let decision = place_one(
                &self.topology,
                &mut residual,
                self.param_count,
                self.latency_threshold,
                &req,
            )?;
            decisions.push(decision);
        }
        Ok(decisions)
    }
}

/// Hosts a task may run on: its own client node, then every edge and cloud
/// node.
pub fn candidates(topology: &Topology, client: usize) -> Vec<usize> {
    topology
        .nodes
        .iter()
        .filter(|n| n.id == client || n.kind != NodeKind::Client)
        .map(|n| n.id)
        .collect()
}

fn place_one(
    topology: &Topology,
    residual: &mut Residual,
    param_count: usize,
    latency_threshold: f64,
    req: &TaskRequest,
) -> Result<PlacementDecision> {
    let minimize_latency = req.qos.max_latency < latency_threshold;
    let mut best: Option<(usize, f64)> = None;
    for host in candidates(topology, req.client) {
        let Some(latency) = evaluate_host(topology, residual, param_count, req.client, host, &req.qos)? else {
            continue;
        };
        let better = match best {
            None => true,
            Some((b, bl)) => {
                if minimize_latency {
                    latency < bl
                } else {
                    residual.compute_rate[host] > residual.compute_rate[b]
                }
            }
        };
        if better {
            best = Some((host, latency));
        }
    }
    let Some((node, predicted_latency)) = best else {
        return Ok(PlacementDecision::Failed {
            task_id: req.task_id,
            client: req.client,
        });
    };
    residual.compute_rate[node] = (residual.compute_rate[node] - req.qos.compute_demand / req.qos.max_latency).max(0.0);
    if let Some(b) = residual.battery[node].as_mut() {
        let spent = round_energy(&topology.nodes[node], req.qos.compute_demand, 2.0 * param_count as f64);
        *b = (*b - spent).max(0.0);
    }
    Ok(PlacementDecision::Placed(Placement {
        task_id: req.task_id,
        client: req.client,
        node,
        predicted_latency,
    }))
}

#[cfg(test)]
mod tests {
    use super::super::topology::tests::node;
    use super::super::Link;
    use super::*;

    fn star() -> Topology {
        // clients 0,1 -- edge 2 -- cloud 3
        Topology::new(
            vec![
                node(0, NodeKind::Client, 100.0, Some(1000.0)),
                node(1, NodeKind::Client, 100.0, Some(1000.0)),
                node(2, NodeKind::Edge, 1000.0, None),
                node(3, NodeKind::Cloud, 10_000.0, None),
            ],
            vec![
                Link {
                    a: 0,
                    b: 2,
                    latency: 0.01,
                    bandwidth: 1e6,
                },
                Link {
                    a: 1,
                    b: 2,
                    latency: 0.01,
                    bandwidth: 1e6,
                },
                Link {
                    a: 2,
                    b: 3,
                    latency: 0.1,
                    bandwidth: 1e7,
                },
            ],
            3,
            f64::INFINITY,
        )
        .unwrap()
    }

    fn qos(max_latency: f64, priority: i64) -> Qos {
        Qos {
            max_latency,
            min_bandwidth: 0.0,
            priority,
            compute_demand: 250.0,
        }
    }

    fn req(id: u64, client: usize, q: Qos) -> TaskRequest {
        TaskRequest {
            task_id: id,
            client,
            qos: q,
        }
    }

    #[test]
    fn later_report_wins() {
        let mut c = Controller::new(star(), 100, 1.0);
        let r = |t: f64, rate: f64| ResourceReport {
            node: 2,
            timestamp: t,
            compute_rate: rate,
            battery: None,
            link_bandwidth: vec![],
        };
        c.ingest_report(r(1.0, 500.0)).unwrap();
        c.ingest_report(r(2.0, 700.0)).unwrap();
        assert_eq!(c.compute_rate(2), 700.0);
        c.ingest_report(r(1.5, 300.0)).unwrap();
        assert_eq!(c.compute_rate(2), 700.0);
    }

    #[test]
    fn registry_errors() {
        let mut c = Controller::new(star(), 100, 1.0);
        let unknown = ResourceReport {
            node: 9,
            timestamp: 0.0,
            compute_rate: 1.0,
            battery: None,
            link_bandwidth: vec![],
        };
        assert!(matches!(c.ingest_report(unknown), Err(Error::Registry(_))));
        let over = ResourceReport {
            node: 2,
            timestamp: 0.0,
            compute_rate: 2000.0,
            battery: None,
            link_bandwidth: vec![],
        };
        assert!(matches!(c.ingest_report(over), Err(Error::Registry(_))));
        let over_link = ResourceReport {
            node: 2,
            timestamp: 0.0,
            compute_rate: 1.0,
            battery: None,
            link_bandwidth: vec![(0, 2e6)],
        };
        assert!(matches!(c.ingest_report(over_link), Err(Error::Registry(_))));
        c.submit_request(req(1, 0, qos(1.0, 0))).unwrap();
        assert!(matches!(
            c.submit_request(req(1, 1, qos(1.0, 0))),
            Err(Error::Registry(_))
        ));
        assert!(matches!(
            c.submit_request(req(2, 2, qos(1.0, 0))),
            Err(Error::Registry(_))
        ));
    }

    #[test]
    fn empty_queue_is_a_contract_error() {
        let mut c = Controller::new(star(), 100, 1.0);
        assert!(matches!(c.place(), Err(Error::Contract(_))));
    }

    #[test]
    fn tight_latency_goes_to_fastest_host() {
        // Local: 250/100 = 2.5 s. Edge: 2*(0.01+1e-4)+0.25 = 0.2702. Cloud:
        // 2*(0.11+1e-4)+0.025 = 0.2452.
        let mut c = Controller::new(star(), 100, 1.0);
        c.submit_request(req(1, 0, qos(0.5, 0))).unwrap();
        let d = c.place().unwrap();
        let PlacementDecision::Placed(p) = &d[0] else {
            panic!("{d:?}")
        };
        assert_eq!(p.node, 3);
        assert!((p.predicted_latency - (2.0 * (0.11 + 1e-4) + 0.025)).abs() < 1e-12);
    }

    #[test]
    fn loose_latency_goes_to_most_spare_compute() {
        let mut c = Controller::new(star(), 100, 1.0);
        c.ingest_report(ResourceReport {
            node: 3,
            timestamp: 0.0,
            compute_rate: 50.0,
            battery: None,
            link_bandwidth: vec![],
        })
        .unwrap();
        c.submit_request(req(1, 0, qos(10.0, 0))).unwrap();
        let d = c.place().unwrap();
        assert!(matches!(&d[0], PlacementDecision::Placed(p) if p.node == 2));
    }

    #[test]
    fn priority_then_fifo() {
        let mut c = Controller::new(star(), 100, 1.0);
        c.submit_request(req(10, 0, qos(10.0, 0))).unwrap();
        c.submit_request(req(11, 1, qos(10.0, 5))).unwrap();
        c.submit_request(req(12, 0, qos(10.0, 0))).unwrap();
        let order: Vec<u64> = c.place().unwrap().iter().map(|d| d.task_id()).collect();
        assert_eq!(order, vec![11, 10, 12]);
        assert_eq!(c.pending(), 0);
    }

    #[test]
    fn infeasible_task_fails() {
        let mut c = Controller::new(star(), 100, 1.0);
        c.submit_request(req(1, 0, qos(0.01, 0))).unwrap();
        assert!(matches!(
            c.place().unwrap()[0],
            PlacementDecision::Failed { task_id: 1, client: 0 }
        ));
    }

    #[test]
    fn bandwidth_floor_excludes_remote_hosts() {
        let mut c = Controller::new(star(), 100, 1.0);
        let mut q = qos(10.0, 0);
        q.min_bandwidth = 2e6;
        c.submit_request(req(1, 0, q)).unwrap();
        assert!(matches!(&c.place().unwrap()[0], PlacementDecision::Placed(p) if p.node == 0));
    }

    #[test]
    fn residual_is_debited() {
        // Each loose task reserves 250/10 = 25 samples/s on its host.
        let mut c = Controller::new(star(), 100, 1.0);
        for id in 0..3 {
            c.submit_request(req(id, 0, qos(10.0, 0))).unwrap();
        }
        let d = c.place().unwrap();
        assert!(d
            .iter()
            .all(|d| matches!(d, PlacementDecision::Placed(p) if p.node == 3)));
        let mut c = Controller::new(star(), 100, 1.0);
        c.ingest_report(ResourceReport {
            node: 3,
            timestamp: 0.0,
            compute_rate: 1010.0,
            battery: None,
            link_bandwidth: vec![],
        })
        .unwrap();
        c.submit_request(req(0, 0, qos(10.0, 0))).unwrap();
        c.submit_request(req(1, 1, qos(10.0, 0))).unwrap();
        let nodes: Vec<usize> = c
            .place()
            .unwrap()
            .iter()
            .map(|d| match d {
                PlacementDecision::Placed(p) => p.node,
                _ => usize::MAX,
            })
            .collect();
        // 1010 -> 985 after the first task, below the edge's 1000.
        assert_eq!(nodes, vec![3, 2]);
    }
}
