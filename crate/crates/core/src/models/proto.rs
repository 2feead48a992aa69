//! Prototype network: a single affine + ReLU feature extractor, class
//! prototypes as per-class feature means, and a softmax over negative squared
//! distances to the prototypes.

use std::collections::BTreeMap;

use crate::error::{contract, Error, Result};
use crate::numeric::{argmax, gemm, pairwise_sq_dist, xent_in_place, Matrix, View};

use super::{Batch, LossGrad, ParamVector, ProtoSpec};

/// Per-class mean feature vectors. `classes` is sorted ascending and row `k`
/// of `centers` belongs to `classes[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototypes {
    pub classes: Vec<usize>,
    pub centers: Matrix,
}

impl Prototypes {
    pub fn position(&self, class: usize) -> Option<usize> {
        self.classes.binary_search(&class).ok()
    }
}

fn check_params(spec: &ProtoSpec, params: &ParamVector) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(contract(format!(
            "{} parameters for an extractor needing {}",
            params.len(),
            spec.param_count()
        )));
    }
    Ok(())
}

/// Pre-activations `X W^T + b`.
fn pre_activations(spec: &ProtoSpec, params: &ParamVector, samples: &Matrix) -> Matrix {
    let p = params.values();
    let split = spec.input_dim * spec.feature_dim;
    let mut z = Matrix::zeros(samples.rows(), spec.feature_dim);
    for i in 0..samples.rows() {
        z.row_mut(i).copy_from_slice(&p[split..]);
    }
    let w = View::of(spec.feature_dim, spec.input_dim, &p[..split]);
    gemm(samples.view(), w.t(), 1.0, z.data_mut());
    z
}

/// Feature vectors `relu(X W^T + b)`, one row per sample.
pub fn embed(spec: &ProtoSpec, params: &ParamVector, samples: &Matrix) -> Result<Matrix> {
    check_params(spec, params)?;
    if samples.cols() != spec.input_dim {
        return Err(contract(format!(
            "samples have {} features, extractor expects {}",
            samples.cols(),
            spec.input_dim
        )));
    }
    let mut z = pre_activations(spec, params, samples);
    z.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(z)
}

pub fn compute_prototypes(features: &Matrix, labels: &[usize]) -> Result<Prototypes> {
    if features.rows() != labels.len() {
        return Err(contract(format!(
            "{} feature rows but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    let mut groups: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        let entry = groups.entry(label).or_insert_with(|| (vec![0.0; features.cols()], 0));
        for (acc, v) in entry.0.iter_mut().zip(features.row(i)) {
            *acc += v;
        }
        entry.1 += 1;
    }
    let classes: Vec<usize> = groups.keys().copied().collect();
    let mut data = Vec::with_capacity(classes.len() * features.cols());
    for (sum, count) in groups.into_values() {
        data.extend(sum.into_iter().map(|s| s / count as f64));
    }
    Ok(Prototypes {
        centers: Matrix::from_vec(classes.len(), features.cols(), data),
        classes,
    })
}

/// Logits `-||f - c_k||^2` and the predicted class of each feature row. Ties
/// resolve to the lowest class index.
pub fn proto_classify(features: &Matrix, prototypes: &Prototypes) -> Result<(Matrix, Vec<usize>)> {
    if prototypes.classes.is_empty() {
        return Err(Error::MissingClass("no prototypes to classify against".into()));
    }
    let mut logits = pairwise_sq_dist(features, &prototypes.centers)?;
    logits.data_mut().iter_mut().for_each(|d| *d = -*d);
    let predictions = (0..logits.rows())
        .map(|i| prototypes.classes[argmax(logits.row(i))])
        .collect();
    Ok((logits, predictions))
}

/// Predicts classes for `queries` using prototypes built from `reference`.
pub fn proto_predict(
    spec: &ProtoSpec,
    params: &ParamVector,
    reference: &Batch,
    queries: &Matrix,
) -> Result<Vec<usize>> {
    let support = embed(spec, params, &reference.inputs)?;
    let prototypes = compute_prototypes(&support, &reference.labels)?;
    let features = embed(spec, params, queries)?;
    Ok(proto_classify(&features, &prototypes)?.1)
}

/// Episode loss: prototypes from `support`, cross-entropy of the
/// distance-softmax on `query`. Gradients flow through both the query
/// embeddings and the support-derived prototypes.
pub fn proto_episode_loss_grad(
    spec: &ProtoSpec,
    params: &ParamVector,
    support: &Batch,
    query: &Batch,
) -> Result<LossGrad> {
    check_params(spec, params)?;
    for b in [support, query] {
        if b.inputs.cols() != spec.input_dim {
            return Err(contract(format!(
                "episode samples have {} features, extractor expects {}",
                b.inputs.cols(),
                spec.input_dim
            )));
        }
    }
    if support.is_empty() {
        return Err(Error::MissingClass("empty support set".into()));
    }
    let d = spec.feature_dim;
    let zs = pre_activations(spec, params, &support.inputs);
    let zq = pre_activations(spec, params, &query.inputs);
    let relu = |z: &Matrix| {
        let mut f = z.clone();
        f.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        f
    };
    let fs = relu(&zs);
    let fq = relu(&zq);
    let protos = compute_prototypes(&fs, &support.labels)?;
    let targets = query
        .labels
        .iter()
        .map(|&c| {
            protos
                .position(c)
                .ok_or_else(|| Error::MissingClass(format!("query class {c} has no support samples")))
        })
        .collect::<Result<Vec<_>>>()?;

    let k = protos.classes.len();
    let nq = query.len();
    let mut dfq = Matrix::zeros(nq, d);
    let mut dc = Matrix::zeros(k, d);
    let mut loss = 0.0;
    let mut correct = 0;
    let (logits, _) = proto_classify(&fq, &protos)?;
    for (j, &t) in targets.iter().enumerate() {
        let mut g = logits.row(j).to_vec();
        if argmax(&g) == t {
            correct += 1;
        }
        loss += xent_in_place(&mut g, t);
        let f = fq.row(j);
        for (c, &gjc) in g.iter().enumerate() {
            let gjc = gjc / nq as f64;
            let center = protos.centers.row(c);
            // logit = -||f - c||^2: d/df = -2 (f - c), d/dc = 2 (f - c)
            for m in 0..d {
                let diff = f[m] - center[m];
                dfq.row_mut(j)[m] -= 2.0 * gjc * diff;
                dc.row_mut(c)[m] += 2.0 * gjc * diff;
            }
        }
    }
    if nq > 0 {
        loss /= nq as f64;
    }

    let mut counts = vec![0usize; k];
    let positions: Vec<usize> = support
        .labels
        .iter()
        .map(|&c| protos.position(c).expect("support class has a prototype"))
        .collect();
    for &p in &positions {
        counts[p] += 1;
    }
    let mut dfs = Matrix::zeros(support.len(), d);
    for (i, &p) in positions.iter().enumerate() {
        let scale = 1.0 / counts[p] as f64;
        for (out, g) in dfs.row_mut(i).iter_mut().zip(dc.row(p)) {
            *out = g * scale;
        }
    }

    let mut grads = ParamVector::zeros(params.len());
    let split = spec.input_dim * d;
    let g = grads.values_mut();
    for (mut delta, z, x) in [(dfs, &zs, &support.inputs), (dfq, &zq, &query.inputs)] {
        for (dv, zv) in delta.data_mut().iter_mut().zip(z.data()) {
            if *zv <= 0.0 {
                *dv = 0.0;
            }
        }
        gemm(delta.t(), x.view(), 1.0, &mut g[..split]);
        for i in 0..delta.rows() {
            for (acc, v) in g[split..].iter_mut().zip(delta.row(i)) {
                *acc += v;
            }
        }
    }
    Ok(LossGrad { loss, grads, correct })
}

/// Splits an episode batch into support and query positions. Within each
/// class, samples keep batch order and the first
/// `max(1, floor(n * support / (support + query)))` go to the support set.
pub fn split_episode(labels: &[usize], spec: &ProtoSpec) -> (Vec<usize>, Vec<usize>) {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let total = spec.support_per_class + spec.query_per_class;
    let mut support = Vec::new();
    let mut query = Vec::new();
    for members in by_class.values() {
        let take = (members.len() * spec.support_per_class / total).max(1);
        support.extend_from_slice(&members[..take]);
        query.extend_from_slice(&members[take..]);
    }
    support.sort_unstable();
    query.sort_unstable();
    (support, query)
}
