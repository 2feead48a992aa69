//! Simulated serverless edge deployment: nodes and links, a controller that
//! places each client's training task under QoS bounds, and per-round time
//! and energy accounting around federated rounds.

mod controller;
mod sim;
mod timing;
mod topology;

pub use controller::{
    candidates, evaluate_host, round_energy, Controller, Placement, PlacementDecision, Qos, Residual, ResourceReport,
    TaskRequest,
};
pub use sim::{simulate, write_events, Event, SimConfig, SimRound, Simulation, EVENT_HEADER};
pub use timing::{drain_energy, round_time, HostedWork, RoundTiming};
pub use topology::{Link, Node, NodeKind, Route, Topology};
