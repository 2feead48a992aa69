use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Client,
    Edge,
    Cloud,
}

/// A compute participant. `battery = None` means mains-powered.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    /// Samples per second.
    pub compute_rate: f64,
    /// Joules remaining.
    pub battery: Option<f64>,
    pub energy_per_sample: f64,
    pub energy_per_param: f64,
}

impl Node {
    pub fn is_depleted(&self) -> bool {
        matches!(self.battery, Some(b) if b <= 0.0)
    }
}

/// Undirected link.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    /// Seconds.
    pub latency: f64,
    /// Parameters per second; may be infinite.
    pub bandwidth: f64,
}

/// Lowest-latency route between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub latency: f64,
    /// Bottleneck bandwidth along the route (infinite for a node to itself).
    pub bandwidth: f64,
    pub links: Vec<usize>,
}

impl Route {
    /// Time to move `params` parameters along the route.
    pub fn transfer_time(&self, params: f64) -> f64 {
        if params == 0.0 {
            self.latency
        } else {
            self.latency + params / self.bandwidth
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    /// Node that aggregates and broadcasts.
    pub aggregator: usize,
    /// Parameters per second the aggregator merges; infinite means free.
    pub aggregation_rate: f64,
}

#[derive(PartialEq)]
struct Frontier {
    latency: f64,
    hops: usize,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Min-heap on (latency, hops, node id).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .latency
            .total_cmp(&self.latency)
            .then(other.hops.cmp(&self.hops))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Topology {
    pub fn new(nodes: Vec<Node>, links: Vec<Link>, aggregator: usize, aggregation_rate: f64) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::Registry(format!("node at position {i} has id {}", n.id)));
            }
            if !(n.compute_rate > 0.0) {
                return Err(Error::Registry(format!("node {i} compute_rate must be positive")));
            }
            if matches!(n.battery, Some(b) if !(b >= 0.0)) {
                return Err(Error::Registry(format!("node {i} battery must be non-negative")));
            }
            if n.kind == NodeKind::Cloud && n.battery.is_some() {
                return Err(Error::Registry(format!("cloud node {i} must have unlimited battery")));
            }
            if !(n.energy_per_sample >= 0.0 && n.energy_per_param >= 0.0) {
                return Err(Error::Registry(format!(
                    "node {i} energy coefficients must be non-negative"
                )));
            }
        }
        for (i, l) in links.iter().enumerate() {
            if l.a >= nodes.len() || l.b >= nodes.len() || l.a == l.b {
                return Err(Error::Topology(format!("link {i} joins {} and {}", l.a, l.b)));
            }
            if !(l.latency >= 0.0) || !(l.bandwidth > 0.0) {
                return Err(Error::Topology(format!(
                    "link {i} needs latency >= 0 and bandwidth > 0"
                )));
            }
        }
        if aggregator >= nodes.len() {
            return Err(Error::Registry(format!("aggregator {aggregator} is not a node")));
        }
        if !(aggregation_rate > 0.0) {
            return Err(Error::Topology("aggregation_rate must be positive".into()));
        }
        Ok(Topology {
            nodes,
            links,
            aggregator,
            aggregation_rate,
        })
    }

    pub fn node(&self, id: usize) -> Result<&Node> {
        self.nodes
            .get(id)
            .ok_or_else(|| Error::Registry(format!("unknown node {id}")))
    }

    /// Lowest-latency route using static link bandwidths.
    pub fn route(&self, from: usize, to: usize) -> Result<Route> {
        let bw: Vec<f64> = self.links.iter().map(|l| l.bandwidth).collect();
        self.route_with(from, to, &bw)
    }

    /// Lowest-latency route (ties: fewer hops, then lower node ids) with the
    /// given per-link bandwidths.
    pub fn route_with(&self, from: usize, to: usize, bandwidth: &[f64]) -> Result<Route> {
        self.node(from)?;
        self.node(to)?;
        if from == to {
            return Ok(Route {
                latency: 0.0,
                bandwidth: f64::INFINITY,
                links: Vec::new(),
            });
        }
        let n = self.nodes.len();
        let mut best = vec![(f64::INFINITY, usize::MAX); n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        best[from] = (0.0, 0);
        heap.push(Frontier {
            latency: 0.0,
            hops: 0,
            node: from,
        });
        while let Some(Frontier { latency, hops, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            if node == to {
                break;
            }
            for (li, l) in self.links.iter().enumerate() {
                let next = if l.a == node {
                    l.b
                } else if l.b == node {
                    l.a
                } else {
                    continue;
                };
                let cand = (latency + l.latency, hops + 1);
                let cur = best[next];
                if !done[next] && (cand.0 < cur.0 || (cand.0 == cur.0 && cand.1 < cur.1)) {
                    best[next] = cand;
                    via[next] = Some(li);
                    heap.push(Frontier {
                        latency: cand.0,
                        hops: cand.1,
                        node: next,
                    });
                }
            }
        }
        if !done[to] {
            return Err(Error::Topology(format!("no path from node {from} to node {to}")));
        }
        let mut links = Vec::new();
        let mut at = to;
        while at != from {
            let li = via[at].expect("reached nodes have a predecessor");
            links.push(li);
            let l = &self.links[li];
            at = if l.a == at { l.b } else { l.a };
        }
        links.reverse();
        Ok(Route {
            latency: best[to].0,
            bandwidth: links.iter().map(|&li| bandwidth[li]).fold(f64::INFINITY, f64::min),
            links,
        })
    }
}
