use rand::seq::index;

use super::graph::{Graph, Node, ParamId, ParamStore};
use crate::error::Result;
use crate::rng;

/// Minimum number of coordinates probed when the model is large enough.
pub const MIN_COORDINATES: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// `(parameter name, flat index)` of the worst coordinate.
    pub worst: Option<(String, usize)>,
    /// Analytic and numeric derivative at the worst coordinate.
    pub worst_values: (f64, f64),
    pub coordinates: usize,
}

/// Compares analytic gradients against central differences with step `eps`.
///
/// Every parameter tensor contributes up to four coordinates; the remainder up
/// to [`MIN_COORDINATES`] is drawn uniformly with a fixed seed. The error per
/// coordinate is `|a - n| / max(1e-8, |a| + |n|)`.
pub fn grad_check<F>(params: &mut ParamStore, eps: f64, build: F) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph) -> Result<Node>,
{
    let analytic = {
        let mut g = Graph::new(params);
        let loss = build(&mut g)?;
        g.backward(loss)?
    };

    let coords = select_coordinates(params);
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: None,
        worst_values: (0.0, 0.0),
        coordinates: coords.len(),
    };
    for (id, i) in coords {
        let original = params.get(id).data()[i];
        params.get_mut(id).data_mut()[i] = original + eps;
        let plus = eval(params, &build)?;
        params.get_mut(id).data_mut()[i] = original - eps;
        let minus = eval(params, &build)?;
        params.get_mut(id).data_mut()[i] = original;

        // Differencing summand by summand avoids cancellation against the
        // full loss value when the derivative is tiny.
        let diff: f64 = plus.iter().zip(&minus).map(|(p, m)| p - m).sum();
        let numeric = diff / (2.0 * eps);
        let a = analytic.get(id).data()[i];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        if rel > report.max_relative_error || report.worst.is_none() {
            report.max_relative_error = report.max_relative_error.max(rel);
            report.worst = Some((params.name(id).to_string(), i));
            report.worst_values = (a, numeric);
        }
    }
    Ok(report)
}

fn eval<F>(params: &ParamStore, build: &F) -> Result<Vec<f64>>
where
    F: Fn(&mut Graph) -> Result<Node>,
{
    let mut g = Graph::new(params);
    let loss = build(&mut g)?;
    Ok(match g.loss_terms(loss) {
        Some(terms) => terms.to_vec(),
        None => vec![g.scalar(loss)],
    })
}

fn select_coordinates(params: &ParamStore) -> Vec<(ParamId, usize)> {
    let total = params.total_size();
    let mut flat: Vec<(ParamId, usize)> = Vec::new();
    let mut chosen = vec![false; total];
    let mut offset = 0;
    let mut offsets = Vec::new();
    for (id, _, t) in params.iter() {
        offsets.push(offset);
        let n = t.len();
        let take = n.min(4);
        for j in 0..take {
            // Spread the guaranteed picks across the tensor.
            let i = j * n / take;
            chosen[offset + i] = true;
            flat.push((id, i));
        }
        offset += n;
    }
    let want = MIN_COORDINATES.min(total);
    if flat.len() < want {
        let mut rng = rng::seeded(0x6772_6164);
        for k in index::sample(&mut rng, total, total).into_iter() {
            if flat.len() >= want {
                break;
            }
            if chosen[k] {
                continue;
            }
            chosen[k] = true;
            let p = offsets.partition_point(|&o| o <= k) - 1;
            flat.push((ParamId(p), k - offsets[p]));
        }
    }
    flat
}
