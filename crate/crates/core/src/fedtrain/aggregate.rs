use crate::error::{contract, Result};
use crate::models::ParamVector;

fn check(updates: &[ParamVector]) -> Result<usize> {
    let first = updates.first().ok_or_else(|| contract("nothing to aggregate"))?;
    if let Some(bad) = updates.iter().find(|u| u.len() != first.len()) {
        return Err(contract(format!(
            "update lengths differ: {} vs {}",
            first.len(),
            bad.len()
        )));
    }
    Ok(first.len())
}

/// Sums `terms` in ascending order so the result does not depend on the
/// order clients were listed in.
fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// Sorts `column` and returns its common value if every entry is equal, so
/// averaging identical updates is exact.
fn uniform_value(column: &mut [f64]) -> Option<f64> {
    column.sort_unstable_by(f64::total_cmp);
    let (first, last) = (column[0], column[column.len() - 1]);
    (first.to_bits() == last.to_bits()).then_some(first)
}

/// Unweighted elementwise mean of the client updates.
pub fn aggregate(updates: &[ParamVector]) -> Result<ParamVector> {
    let len = check(updates)?;
    let n = updates.len() as f64;
    let mut column = vec![0.0; updates.len()];
    let out = (0..len)
        .map(|j| {
            for (slot, u) in column.iter_mut().zip(updates) {
                *slot = u.values()[j];
            }
            uniform_value(&mut column).unwrap_or_else(|| ordered_sum(&mut column) / n)
        })
        .collect();
    Ok(ParamVector::new(out))
}

/// Elementwise mean weighted by `weights` (typically shard sizes).
pub fn aggregate_weighted(updates: &[ParamVector], weights: &[f64]) -> Result<ParamVector> {
    let len = check(updates)?;
    if weights.len() != updates.len() {
        return Err(contract(format!(
            "{} weights for {} updates",
            weights.len(),
            updates.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(contract("weights must be finite and non-negative"));
    }
    let total = ordered_sum(&mut weights.to_vec());
    if total <= 0.0 {
        return Err(contract("weights sum to zero"));
    }
    let mut column = vec![0.0; updates.len()];
    let out = (0..len)
        .map(|j| {
            for (slot, u) in column.iter_mut().zip(updates) {
                *slot = u.values()[j];
            }
            if let Some(v) = uniform_value(&mut column) {
                return v;
            }
            for ((slot, u), w) in column.iter_mut().zip(updates).zip(weights) {
                *slot = w * u.values()[j];
            }
            ordered_sum(&mut column) / total
        })
        .collect();
    Ok(ParamVector::new(out))
}
