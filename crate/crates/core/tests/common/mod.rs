//! Shared oracles for the integration tests and the acceptance run.
#![allow(dead_code)]

use edgelearn::edgesim::{
    Controller, Link, Node, NodeKind, PlacementDecision, Qos, ResourceReport, TaskRequest, Topology,
};
use edgelearn::models::ParamVector;
use edgelearn::numeric::{Matrix, Rng};

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.uniform(0.0, 1.0)).collect()).unwrap()
}

/// `||analytic - numeric|| / (||analytic|| + ||numeric||)` with central
/// differences on every coordinate.
pub fn gradient_error(params: &ParamVector, analytic: &ParamVector, loss: impl Fn(&ParamVector) -> f64) -> f64 {
    let h = 1e-5;
    let mut diff = 0.0;
    let mut norm_a = 0.0;
    let mut norm_n = 0.0;
    let mut p = params.clone();
    for i in 0..params.len() {
        let orig = p.values()[i];
        p.values_mut()[i] = orig + h;
        let up = loss(&p);
        p.values_mut()[i] = orig - h;
        let down = loss(&p);
        p.values_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let a = analytic.values()[i];
        diff += (a - numeric).powi(2);
        norm_a += a * a;
        norm_n += numeric * numeric;
    }
    diff.sqrt() / (norm_a.sqrt() + norm_n.sqrt()).max(1e-300)
}

/// A random placement problem: topology, reports, queued tasks.
#[derive(Debug, Clone)]
pub struct PlacementInstance {
    pub topology: Topology,
    pub param_count: usize,
    pub threshold: f64,
    pub reports: Vec<ResourceReport>,
    pub tasks: Vec<TaskRequest>,
}

pub fn random_instance(seed: u64) -> PlacementInstance {
    let mut rng = Rng::keyed(&[seed, 0x504C_4143]);
    let n = 3 + rng.below(6);
    let clients = 1 + rng.below(n - 1);
    let nodes: Vec<Node> = (0..n)
        .map(|id| {
            let kind = if id < clients {
                NodeKind::Client
            } else if rng.below(2) == 0 {
                NodeKind::Edge
            } else {
                NodeKind::Cloud
            };
            let battery = match kind {
                NodeKind::Client => Some(rng.uniform(0.0, 20.0)),
                NodeKind::Edge if rng.below(3) == 0 => Some(rng.uniform(0.0, 50.0)),
                _ => None,
            };
            Node {
                id,
                kind,
                compute_rate: rng.uniform(10.0, 2000.0),
                battery,
                energy_per_sample: rng.uniform(0.0, 0.02),
                energy_per_param: rng.uniform(0.0, 1e-3),
            }
        })
        .collect();
    let mut links = Vec::new();
    // Random spanning tree, then a few extra links.
    for b in 1..n {
        let a = rng.below(b);
        links.push(random_link(&mut rng, a, b));
    }
    for _ in 0..rng.below(n) {
        let a = rng.below(n);
        let b = rng.below(n);
        if a != b {
            links.push(random_link(&mut rng, a, b));
        }
    }
    let topology = Topology::new(nodes, links, n - 1, f64::INFINITY).unwrap();
    let mut reports = Vec::new();
    for node in &topology.nodes {
        if rng.below(2) == 0 {
            let mut link_bandwidth = Vec::new();
            for (i, l) in topology.links.iter().enumerate() {
                if (l.a == node.id || l.b == node.id) && rng.below(2) == 0 {
                    link_bandwidth.push((i, l.bandwidth * rng.uniform(0.1, 1.0)));
                }
            }
            reports.push(ResourceReport {
                node: node.id,
                timestamp: rng.uniform(0.0, 10.0),
                compute_rate: node.compute_rate * rng.uniform(0.2, 1.0),
                battery: node.battery.map(|b| b * rng.uniform(0.0, 1.0)),
                link_bandwidth,
            });
        }
    }
    let tasks = (0..1 + rng.below(6))
        .map(|t| TaskRequest {
            task_id: 100 + t as u64,
            client: rng.below(clients),
            qos: Qos {
                max_latency: rng.uniform(0.05, 3.0),
                min_bandwidth: if rng.below(3) == 0 { 0.0 } else { rng.uniform(0.0, 5e6) },
                priority: rng.below(3) as i64,
                compute_demand: rng.uniform(10.0, 500.0),
            },
        })
        .collect();
    PlacementInstance {
        topology,
        param_count: 100 + rng.below(10_000),
        threshold: rng.uniform(0.1, 2.0),
        reports,
        tasks,
    }
}

fn random_link(rng: &mut Rng, a: usize, b: usize) -> Link {
    Link {
        a,
        b,
        latency: rng.uniform(0.001, 0.1),
        bandwidth: rng.uniform(1e4, 1e7),
    }
}

pub fn greedy(inst: &PlacementInstance) -> Vec<PlacementDecision> {
    let mut c = Controller::new(inst.topology.clone(), inst.param_count, inst.threshold);
    for r in &inst.reports {
        c.ingest_report(r.clone()).unwrap();
    }
    for t in &inst.tasks {
        c.submit_request(t.clone()).unwrap();
    }
    c.place().unwrap()
}

/// Lowest-latency simple path by exhaustive enumeration; ties go to fewer
/// hops. Returns (latency, bottleneck bandwidth).
fn best_path(topo: &Topology, bw: &[f64], from: usize, to: usize) -> Option<(f64, f64)> {
    if from == to {
        return Some((0.0, f64::INFINITY));
    }
    let mut best: Option<(f64, usize, f64)> = None;
    let mut visited = vec![false; topo.nodes.len()];
    visited[from] = true;
    #[allow(clippy::too_many_arguments)]
    fn walk(
        topo: &Topology,
        bw: &[f64],
        at: usize,
        to: usize,
        lat: f64,
        hops: usize,
        min_bw: f64,
        visited: &mut [bool],
        best: &mut Option<(f64, usize, f64)>,
    ) {
        if at == to {
            let better = match best {
                None => true,
                Some((l, h, _)) => lat < *l || (lat == *l && hops < *h),
            };
            if better {
                *best = Some((lat, hops, min_bw));
            }
            return;
        }
        for (li, l) in topo.links.iter().enumerate() {
            let next = if l.a == at {
                l.b
            } else if l.b == at {
                l.a
            } else {
                continue;
            };
            if visited[next] {
                continue;
            }
            visited[next] = true;
            walk(
                topo,
                bw,
                next,
                to,
                lat + l.latency,
                hops + 1,
                min_bw.min(bw[li]),
                visited,
                best,
            );
            visited[next] = false;
        }
    }
    walk(topo, bw, from, to, 0.0, 0, f64::INFINITY, &mut visited, &mut best);
    best.map(|(l, _, b)| (l, b))
}

/// Reference placement: for each task in (priority desc, arrival) order,
/// score every candidate node from scratch and keep the best feasible one.
pub fn brute_force(inst: &PlacementInstance) -> Vec<PlacementDecision> {
    let topo = &inst.topology;
    let n = topo.nodes.len();
    let mut rate: Vec<f64> = topo.nodes.iter().map(|x| x.compute_rate).collect();
    let mut battery: Vec<Option<f64>> = topo.nodes.iter().map(|x| x.battery).collect();
    let mut bw: Vec<f64> = topo.links.iter().map(|l| l.bandwidth).collect();
    let mut node_ts = vec![f64::NEG_INFINITY; n];
    let mut link_ts = vec![f64::NEG_INFINITY; topo.links.len()];
    for r in &inst.reports {
        if r.timestamp >= node_ts[r.node] {
            node_ts[r.node] = r.timestamp;
            rate[r.node] = r.compute_rate;
            battery[r.node] = r.battery;
        }
        for &(li, b) in &r.link_bandwidth {
            if r.timestamp >= link_ts[li] {
                link_ts[li] = r.timestamp;
                bw[li] = b;
            }
        }
    }
    let mut order: Vec<usize> = (0..inst.tasks.len()).collect();
    order.sort_by_key(|&i| (-inst.tasks[i].qos.priority, i));
    let p = inst.param_count as f64;
    let mut out = Vec::new();
    for i in order {
        let t = &inst.tasks[i];
        let q = &t.qos;
        let mut scored = Vec::new();
        for host in 0..n {
            let node = &topo.nodes[host];
            if host != t.client && node.kind == NodeKind::Client {
                continue;
            }
            if rate[host] <= 0.0 {
                continue;
            }
            let energy = q.compute_demand * node.energy_per_sample + 2.0 * p * node.energy_per_param;
            if let Some(b) = battery[host] {
                if b <= 0.0 || b < energy {
                    continue;
                }
            }
            let Some((lat, path_bw)) = best_path(topo, &bw, t.client, host) else {
                continue;
            };
            if path_bw < q.min_bandwidth {
                continue;
            }
            let predicted = 2.0 * (lat + p / path_bw) + q.compute_demand / rate[host];
            if predicted > q.max_latency {
                continue;
            }
            let objective = if q.max_latency < inst.threshold {
                predicted
            } else {
                -rate[host]
            };
            scored.push((objective, host, predicted));
        }
        // Exhaustive minimum; equal objectives fall to the lowest id.
        let best = scored
            .iter()
            .copied()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match best {
            None => out.push(PlacementDecision::Failed {
                task_id: t.task_id,
                client: t.client,
            }),
            Some((_, host, predicted)) => {
                rate[host] = (rate[host] - q.compute_demand / q.max_latency).max(0.0);
                if let Some(b) = battery[host].as_mut() {
                    let node = &topo.nodes[host];
                    *b = (*b - (q.compute_demand * node.energy_per_sample + 2.0 * p * node.energy_per_param)).max(0.0);
                }
                out.push(PlacementDecision::Placed(edgelearn::edgesim::Placement {
                    task_id: t.task_id,
                    client: t.client,
                    node: host,
                    predicted_latency: predicted,
                }));
            }
        }
    }
    out
}

/// Compares decisions; predicted latencies agree to a relative 1e-12.
pub fn same_decisions(a: &[PlacementDecision], b: &[PlacementDecision]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| match (x, y) {
            (PlacementDecision::Placed(p), PlacementDecision::Placed(q)) => {
                p.task_id == q.task_id
                    && p.node == q.node
                    && (p.predicted_latency - q.predicted_latency).abs() <= 1e-12 * p.predicted_latency.abs().max(1.0)
            }
            (x, y) => x == y,
        })
}
