use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::data::{SamplingStrategy, MNIST_TRAIN_RECORDS};
use crate::edgesim::{Link, Node, NodeKind, Qos, SimConfig, Topology};
use crate::error::{Error, Result};
use crate::fedtrain::{Aggregation, FedConfig, TransformKind};
use crate::models::{MlpSpec, ModelSpec, ProtoSpec, MNIST_CLASSES, MNIST_INPUT};

/// Checked-in experiment configurations, addressable by name.
pub const PRESETS: [(&str, &str); 4] = [
    ("sampling-fig3", include_str!("../../presets/sampling-fig3.toml")),
    ("staleness-fig4", include_str!("../../presets/staleness-fig4.toml")),
    ("table1", include_str!("../../presets/table1.toml")),
    ("edgesim-demo", include_str!("../../presets/edgesim-demo.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mlp,
    Proto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SamplingName {
    Fixed,
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AggregationName {
    Unweighted,
    ShardWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Mnist,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindName {
    Client,
    Edge,
    Cloud,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<RawData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    defaults: Option<RawArm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arm: Option<Vec<RawArm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edgesim: Option<RawEdge>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<DataSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    synthetic_train_per_class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    synthetic_test_per_class: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArm {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layers: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feature_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    support: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    query: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clients: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shard_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    update_freq: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampling: Option<SamplingName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregation: Option<AggregationName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    #[serde(skip_serializing_if = "Option::is_none")]
    latency_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregator: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregation_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clients: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node: Option<Vec<RawNode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    link: Option<Vec<RawLink>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    qos: Option<Vec<RawQos>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    kind: KindName,
    compute_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    battery: Option<f64>,
    #[serde(default)]
    energy_per_sample: f64,
    #[serde(default)]
    energy_per_param: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    a: usize,
    b: usize,
    latency: f64,
    bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQos {
    max_latency: f64,
    #[serde(default)]
    min_bandwidth: f64,
    #[serde(default)]
    priority: i64,
    /// Defaults to the samples the client processes per round.
    #[serde(skip_serializing_if = "Option::is_none")]
    compute_demand: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub source: DataSource,
    pub dir: PathBuf,
    pub synthetic_train_per_class: usize,
    pub synthetic_test_per_class: usize,
}

/// One configuration under comparison. `fed.seed` is set per run.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub name: String,
    pub fed: FedConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeConfig {
    pub topology: Topology,
    pub client_nodes: Vec<usize>,
    pub latency_threshold: f64,
    qos: Vec<RawQos>,
}

impl EdgeConfig {
    /// Deployment for one arm; unset compute demands become the arm's
    /// per-round samples.
    pub fn sim_config(&self, fed: &FedConfig) -> SimConfig {
        SimConfig {
            topology: self.topology.clone(),
            client_nodes: self.client_nodes.clone(),
            qos: self
                .qos
                .iter()
                .enumerate()
                .map(|(c, q)| Qos {
                    max_latency: q.max_latency,
                    min_bandwidth: q.min_bandwidth,
                    priority: q.priority,
                    compute_demand: q.compute_demand.unwrap_or(fed.client_samples(c) as f64),
                })
                .collect(),
            latency_threshold: self.latency_threshold,
        }
    }
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub rounds: usize,
    pub seeds: Vec<u64>,
    pub baseline: String,
    pub data: DataConfig,
    pub arms: Vec<Arm>,
    pub edgesim: Option<EdgeConfig>,
    resolved: String,
}

impl ExperimentConfig {
    /// The configuration with presets merged and defaults applied to every arm.
    pub fn resolved_toml(&self) -> &str {
        &self.resolved
    }

    pub fn arm(&self, name: &str) -> Option<&Arm> {
        self.arms.iter().find(|a| a.name == name)
    }
}

/// Finds where a key is written so errors can point at it.
struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    /// 1-based line of `key` inside the `index`-th occurrence of `section`
    /// (or anywhere when `section` is empty); 0 when the key is not in the
    /// text, e.g. because it came from a preset.
    fn line(&self, section: &str, index: usize, key: &str) -> usize {
        let mut in_section = section.is_empty();
        let mut seen = 0;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                if !section.is_empty() {
                    in_section = line == section && {
                        seen += 1;
                        seen == index + 1
                    };
                }
                if key.is_empty() && in_section && !section.is_empty() {
                    return i + 1;
                }
                continue;
            }
            if in_section && !key.is_empty() {
                if let Some(rest) = line.strip_prefix(key) {
                    if rest.trim_start().starts_with('=') {
                        return i + 1;
                    }
                }
            }
        }
        0
    }
}

fn invalid(key: impl Into<String>, line: usize, message: impl Into<String>) -> Error {
    Error::Validation {
        key: key.into(),
        line,
        message: message.into(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn schema_error(text: &str, err: toml::de::Error) -> Error {
    let Some(span) = err.span() else {
        return invalid("<document>", 0, err.message().trim());
    };
    let line = line_of(text, span.start);
    let source_line = text.lines().nth(line - 1).unwrap_or("").trim();
    let key = match source_line.split_once('=') {
        Some((k, _)) if !source_line.starts_with('[') => k.trim().to_string(),
        _ => text[span.clone()].trim().to_string(),
    };
    invalid(key, line, err.message().trim())
}

/// Tables merge key by key; everything else, arrays included, is replaced.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses and validates an experiment config. A `preset = "name"` key pulls
/// in that preset and overlays the rest of the file on it.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let user: Table = toml::from_str(text).map_err(|e| schema_error(text, e))?;
    let _: RawConfig = toml::from_str(text).map_err(|e| schema_error(text, e))?;

    let merged = match user.get("preset") {
        Some(Value::String(name)) => {
            let base_text = preset(name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                invalid(
                    "preset",
                    Locator { text }.line("", 0, "preset"),
                    format!("unknown preset `{name}`; available: {}", names.join(", ")),
                )
            })?;
            let mut base: Table = toml::from_str(base_text).expect("presets are valid TOML");
            let mut over = user;
            over.remove("preset");
            merge(&mut base, over);
            base
        }
        _ => user,
    };
    let raw: RawConfig = Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| invalid("<merged>", 0, e.message().trim()))?;
    resolve(raw, &Locator { text })
}

/// Loads a preset by name, or a config file by path.
pub fn load_config(preset_or_path: &str) -> Result<ExperimentConfig> {
    if let Some(text) = preset(preset_or_path) {
        return parse_config(text);
    }
    let path = Path::new(preset_or_path);
    if !path.exists() {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        return Err(invalid(
            "<config>",
            0,
            format!(
                "`{preset_or_path}` is neither a preset ({}) nor a readable file",
                names.join(", ")
            ),
        ));
    }
    parse_config(&std::fs::read_to_string(path)?)
}

fn require<T: Clone>(v: &Option<T>, key: &str, loc: &Locator) -> Result<T> {
    v.clone()
        .ok_or_else(|| invalid(key, loc.line("", 0, key), "missing required key"))
}

fn resolve(raw: RawConfig, loc: &Locator) -> Result<ExperimentConfig> {
    let name = require(&raw.name, "name", loc)?;
    if !safe_name(&name) {
        return Err(invalid(
            "name",
            loc.line("", 0, "name"),
            "use letters, digits, '-' or '_'",
        ));
    }
    let rounds = require(&raw.rounds, "rounds", loc)?;
    if rounds == 0 {
        return Err(invalid(
            "rounds",
            loc.line("", 0, "rounds"),
            "at least one round is required",
        ));
    }
    let seeds = require(&raw.seeds, "seeds", loc)?;
    if seeds.is_empty() || seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
        return Err(invalid(
            "seeds",
            loc.line("", 0, "seeds"),
            "give one or more distinct seeds",
        ));
    }

    let rd = raw.data.clone().unwrap_or_default();
    let data = DataConfig {
        source: rd.source.unwrap_or(DataSource::Mnist),
        dir: rd.dir.unwrap_or_else(|| PathBuf::from("data/mnist")),
        synthetic_train_per_class: rd.synthetic_train_per_class.unwrap_or(5500),
        synthetic_test_per_class: rd.synthetic_test_per_class.unwrap_or(1000),
    };
    for (key, v) in [
        ("synthetic_train_per_class", data.synthetic_train_per_class),
        ("synthetic_test_per_class", data.synthetic_test_per_class),
    ] {
        if v == 0 {
            return Err(invalid(
                format!("data.{key}"),
                loc.line("[data]", 0, key),
                "must be at least 1",
            ));
        }
    }

    let defaults = raw.defaults.clone().unwrap_or_default();
    let raw_arms = raw.arm.clone().unwrap_or_default();
    if raw_arms.is_empty() {
        return Err(invalid("arm", 0, "at least one [[arm]] is required"));
    }
    let mut arms = Vec::new();
    let mut resolved_arms = Vec::new();
    for (i, a) in raw_arms.iter().enumerate() {
        let (arm, filled) = resolve_arm(i, a, &defaults, &data, loc)?;
        if arms.iter().any(|x: &Arm| x.name == arm.name) {
            return Err(invalid(
                "arm.name",
                loc.line("[[arm]]", i, "name"),
                format!("duplicate arm `{}`", arm.name),
            ));
        }
        arms.push(arm);
        resolved_arms.push(filled);
    }
    let baseline = raw.baseline.clone().unwrap_or_else(|| arms[0].name.clone());
    if !arms.iter().any(|a| a.name == baseline) {
        return Err(invalid(
            "baseline",
            loc.line("", 0, "baseline"),
            format!("no arm is named `{baseline}`"),
        ));
    }

    let edgesim = match &raw.edgesim {
        Some(e) => Some(resolve_edge(e, &arms, loc)?),
        None => None,
    };

    let echo = RawConfig {
        preset: None,
        name: Some(name.clone()),
        rounds: Some(rounds),
        seeds: Some(seeds.clone()),
        baseline: Some(baseline.clone()),
        data: Some(RawData {
            source: Some(data.source),
            dir: Some(data.dir.clone()),
            synthetic_train_per_class: Some(data.synthetic_train_per_class),
            synthetic_test_per_class: Some(data.synthetic_test_per_class),
        }),
        defaults: None,
        arm: Some(resolved_arms),
        edgesim: raw.edgesim.clone(),
    };
    let resolved = toml::to_string(&echo).expect("config serializes");

    let mut cfg = ExperimentConfig {
        name,
        rounds,
        seeds,
        baseline,
        data,
        arms,
        edgesim,
        resolved,
    };
    for arm in &mut cfg.arms {
        arm.fed.rounds = rounds;
    }
    Ok(cfg)
}

fn safe_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn resolve_arm(i: usize, a: &RawArm, d: &RawArm, data: &DataConfig, loc: &Locator) -> Result<(Arm, RawArm)> {
    // Point at the arm's own line when it sets the key, else at [defaults].
    let at = |key: &str| {
        let own = loc.line("[[arm]]", i, key);
        if own > 0 {
            own
        } else {
            loc.line("[defaults]", 0, key)
        }
    };
    macro_rules! pick {
        ($field:ident) => {
            a.$field.clone().or_else(|| d.$field.clone())
        };
    }
    macro_rules! need {
        ($field:ident) => {
            pick!($field).ok_or_else(|| {
                invalid(
                    concat!("arm.", stringify!($field)),
                    loc.line("[[arm]]", i, ""),
                    format!(
                        "arm {} sets no `{}` and [defaults] has none",
                        i + 1,
                        stringify!($field)
                    ),
                )
            })?
        };
    }
    let name = a
        .name
        .clone()
        .ok_or_else(|| invalid("arm.name", loc.line("[[arm]]", i, ""), "every [[arm]] needs a name"))?;
    if !safe_name(&name) {
        return Err(invalid("arm.name", at("name"), "use letters, digits, '-' or '_'"));
    }
    let model_kind = need!(model);
    let clients = need!(clients);
    let shard_sizes = need!(shard_sizes);
    let budget = need!(budget);
    let update_freq = need!(update_freq);
    let batch_size = need!(batch_size);
    let lr = need!(lr);
    let sampling = need!(sampling);
    let aggregation = need!(aggregation);
    let noise_sigma = pick!(noise_sigma).unwrap_or(0.0);

    let model = match model_kind {
        ModelKind::Mlp => {
            let layers = need!(layers);
            if layers.first() != Some(&MNIST_INPUT) || layers.last() != Some(&MNIST_CLASSES) {
                return Err(invalid(
                    "layers",
                    at("layers"),
                    format!("layers must start at {MNIST_INPUT} inputs and end at {MNIST_CLASSES} classes"),
                ));
            }
            let spec = MlpSpec::relu(&layers).map_err(|e| invalid("layers", at("layers"), e.to_string()))?;
            ModelSpec::Mlp(spec)
        }
        ModelKind::Proto => {
            let feature_dim = need!(feature_dim);
            let support = need!(support);
            let query = need!(query);
            let spec = ProtoSpec::new(MNIST_INPUT, feature_dim, support, query)
                .map_err(|e| invalid("feature_dim", at("feature_dim"), e.to_string()))?;
            ModelSpec::Proto(spec)
        }
    };

    if clients == 0 {
        return Err(invalid("clients", at("clients"), "at least one client is required"));
    }
    if update_freq.len() != clients {
        return Err(invalid(
            "update_freq",
            at("update_freq"),
            format!("{} entries for {clients} clients", update_freq.len()),
        ));
    }
    if update_freq.contains(&0) {
        return Err(invalid(
            "update_freq",
            at("update_freq"),
            "every entry must be at least 1",
        ));
    }
    if shard_sizes.len() != clients {
        return Err(invalid(
            "shard_sizes",
            at("shard_sizes"),
            format!("{} entries for {clients} clients", shard_sizes.len()),
        ));
    }
    if shard_sizes.contains(&0) {
        return Err(invalid(
            "shard_sizes",
            at("shard_sizes"),
            "every shard needs at least one sample",
        ));
    }
    let available = match data.source {
        DataSource::Mnist => MNIST_TRAIN_RECORDS,
        DataSource::Synthetic => data.synthetic_train_per_class * MNIST_CLASSES,
    };
    let total: usize = shard_sizes.iter().sum();
    if total > available {
        return Err(invalid(
            "shard_sizes",
            at("shard_sizes"),
            format!("shards need {total} samples but the training set has {available}"),
        ));
    }
    let smallest = *shard_sizes.iter().min().expect("clients >= 1");
    if budget > smallest {
        return Err(invalid(
            "budget",
            at("budget"),
            format!("budget {budget} exceeds the smallest shard ({smallest}); use 0 for whole shards"),
        ));
    }
    if batch_size == 0 {
        return Err(invalid("batch_size", at("batch_size"), "must be at least 1"));
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(invalid("lr", at("lr"), "must be positive and finite"));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(invalid(
            "noise_sigma",
            at("noise_sigma"),
            "must be finite and non-negative",
        ));
    }

    let fed = FedConfig {
        model,
        clients,
        rounds: 0,
        shard_sizes: shard_sizes.clone(),
        budget: (budget > 0).then_some(budget),
        update_freq: update_freq.clone(),
        batch_size,
        lr,
        sampling: match sampling {
            SamplingName::Fixed => SamplingStrategy::FixedOnce,
            SamplingName::Resample => SamplingStrategy::ResamplePerRound,
        },
        aggregation: match aggregation {
            AggregationName::Unweighted => Aggregation::Unweighted,
            AggregationName::ShardWeighted => Aggregation::ShardWeighted,
        },
        transform: if noise_sigma > 0.0 {
            TransformKind::GaussianNoise { sigma: noise_sigma }
        } else {
            TransformKind::Identity
        },
        seed: 0,
    };
    fed.validate()
        .map_err(|e| invalid(format!("arm.{name}"), loc.line("[[arm]]", i, ""), e.to_string()))?;

    let (layers, feature_dim, support, query) = match &fed.model {
        ModelSpec::Mlp(s) => (Some(s.layer_sizes().to_vec()), None, None, None),
        ModelSpec::Proto(s) => (
            None,
            Some(s.feature_dim),
            Some(s.support_per_class),
            Some(s.query_per_class),
        ),
    };
    let filled = RawArm {
        name: Some(name.clone()),
        model: Some(model_kind),
        layers,
        feature_dim,
        support,
        query,
        clients: Some(clients),
        shard_sizes: Some(shard_sizes),
        budget: Some(budget),
        update_freq: Some(update_freq),
        batch_size: Some(batch_size),
        lr: Some(lr),
        sampling: Some(sampling),
        aggregation: Some(aggregation),
        noise_sigma: Some(noise_sigma),
    };
    Ok((Arm { name, fed }, filled))
}

fn resolve_edge(e: &RawEdge, arms: &[Arm], loc: &Locator) -> Result<EdgeConfig> {
    let at = |key: &str| loc.line("[edgesim]", 0, key);
    let need = |v: Option<()>, key: &str| {
        v.ok_or_else(|| {
            invalid(
                format!("edgesim.{key}"),
                loc.line("[edgesim]", 0, ""),
                "missing required key",
            )
        })
    };
    need(e.latency_threshold.map(|_| ()), "latency_threshold")?;
    need(e.aggregator.map(|_| ()), "aggregator")?;
    need(e.clients.as_ref().map(|_| ()), "clients")?;
    need(e.node.as_ref().map(|_| ()), "node")?;
    let latency_threshold = e.latency_threshold.unwrap_or_default();
    if !(latency_threshold >= 0.0) {
        return Err(invalid(
            "edgesim.latency_threshold",
            at("latency_threshold"),
            "must be non-negative",
        ));
    }
    let nodes: Vec<Node> = e
        .node
        .iter()
        .flatten()
        .enumerate()
        .map(|(id, n)| Node {
            id,
            kind: match n.kind {
                KindName::Client => NodeKind::Client,
                KindName::Edge => NodeKind::Edge,
                KindName::Cloud => NodeKind::Cloud,
            },
            compute_rate: n.compute_rate,
            battery: n.battery,
            energy_per_sample: n.energy_per_sample,
            energy_per_param: n.energy_per_param,
        })
        .collect();
    let links: Vec<Link> = e
        .link
        .iter()
        .flatten()
        .map(|l| Link {
            a: l.a,
            b: l.b,
            latency: l.latency,
            bandwidth: l.bandwidth,
        })
        .collect();
    let topology = Topology::new(
        nodes,
        links,
        e.aggregator.unwrap_or_default(),
        e.aggregation_rate.unwrap_or(f64::INFINITY),
    )
    .map_err(|err| invalid("edgesim", loc.line("[edgesim]", 0, ""), err.to_string()))?;
    for from in 0..topology.nodes.len() {
        topology
            .route(from, topology.aggregator)
            .map_err(|err| invalid("edgesim.link", loc.line("[[edgesim.link]]", 0, ""), err.to_string()))?;
    }
    let client_nodes = e.clients.clone().unwrap_or_default();
    let qos = e.qos.clone().unwrap_or_default();
    for arm in arms {
        if client_nodes.len() != arm.fed.clients {
            return Err(invalid(
                "edgesim.clients",
                at("clients"),
                format!(
                    "{} nodes for arm `{}` with {} clients",
                    client_nodes.len(),
                    arm.name,
                    arm.fed.clients
                ),
            ));
        }
        if qos.len() != arm.fed.clients {
            return Err(invalid(
                "edgesim.qos",
                loc.line("[[edgesim.qos]]", 0, ""),
                format!(
                    "{} QoS entries for arm `{}` with {} clients",
                    qos.len(),
                    arm.name,
                    arm.fed.clients
                ),
            ));
        }
    }
    for (c, &n) in client_nodes.iter().enumerate() {
        let ok = topology.nodes.get(n).is_some_and(|x| x.kind == NodeKind::Client);
        if !ok || client_nodes[..c].contains(&n) {
            return Err(invalid(
                "edgesim.clients",
                at("clients"),
                format!("entry {c} must name a distinct client node, got {n}"),
            ));
        }
    }
    for (i, q) in qos.iter().enumerate() {
        let line = loc.line("[[edgesim.qos]]", i, "");
        if !(q.max_latency > 0.0) || !(q.min_bandwidth >= 0.0) {
            return Err(invalid(
                "edgesim.qos",
                line,
                "max_latency must be positive and min_bandwidth non-negative",
            ));
        }
        if matches!(q.compute_demand, Some(d) if !(d > 0.0)) {
            return Err(invalid("edgesim.qos.compute_demand", line, "must be positive"));
        }
    }
    Ok(EdgeConfig {
        topology,
        client_nodes,
        latency_threshold,
        qos,
    })
}
