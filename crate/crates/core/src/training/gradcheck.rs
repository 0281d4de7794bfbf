//! Central finite-difference verification of the analytic gradients.
//!
//! The checker only evaluates the forward loss, so it is independent of the
//! backward code it audits.

use super::{loss_and_grad, HyperParams};
use crate::corpus::McItem;
use crate::embeddings::EmbeddingTable;
use crate::error::Result;
use crate::models::ModelParams;

pub const FD_STEP: f64 = 1e-5;

/// Denominator floor so that gradients near zero are judged on absolute error.
pub const REL_ERR_FLOOR: f64 = 1e-4;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR)
}

pub fn central_difference(f_plus: f64, f_minus: f64, h: f64) -> f64 {
    (f_plus - f_minus) / (2.0 * h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    /// (tensor, flat index, analytic, numeric) of the worst entry.
    pub worst: Option<(String, usize, f64, f64)>,
    /// A perturbation flipped a pooling winner, attention selection or hinge;
    /// the point is not smooth and should be re-drawn.
    pub kinked: bool,
}

/// Compares every analytic gradient entry of one loss against central
/// differences with step [`FD_STEP`].
pub fn check_gradients(
    item: &McItem,
    question: usize,
    positive: usize,
    negatives: &[usize],
    table: &EmbeddingTable,
    params: &ModelParams,
    hp: &HyperParams,
) -> Result<GradCheckReport> {
    let base = loss_and_grad(item, question, positive, negatives, table, params, hp)?;
    let mut p = params.clone();
    let mut report = GradCheckReport {
        checked: 0,
        max_rel_error: 0.0,
        worst: None,
        kinked: false,
    };

    for t in 0..crate::models::PARAM_NAMES.len() {
        let (name, analytic) = {
            let (n, g) = &base.grads.tensors()[t];
            (n.to_string(), g.iter().copied().collect::<Vec<f64>>())
        };
        for (i, &a) in analytic.iter().enumerate() {
            let orig = set(&mut p, t, i, None);
            set(&mut p, t, i, Some(orig + FD_STEP));
            let plus = loss_and_grad(item, question, positive, negatives, table, &p, hp)?;
            set(&mut p, t, i, Some(orig - FD_STEP));
            let minus = loss_and_grad(item, question, positive, negatives, table, &p, hp)?;
            set(&mut p, t, i, Some(orig));
            if plus.decisions != base.decisions || minus.decisions != base.decisions {
                report.kinked = true;
                return Ok(report);
            }
            let n = central_difference(plus.total, minus.total, FD_STEP);
            let err = relative_error(a, n);
            report.checked += 1;
            if report.worst.is_none() || err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some((name.clone(), i, a, n));
            }
        }
    }
    Ok(report)
}

/// Reads element `i` of tensor `t`, optionally overwriting it; returns the old value.
fn set(p: &mut ModelParams, t: usize, i: usize, value: Option<f64>) -> f64 {
    let mut tensors = p.blocks.tensors_mut();
    let slice = tensors[t]
        .1
        .as_slice_mut()
        .expect("parameters are contiguous");
    let old = slice[i];
    if let Some(v) = value {
        slice[i] = v;
    }
    old
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((relative_error(1e-9, 0.0) - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn central_difference_of_cubic() {
        let f = |x: f64| x * x * x;
        let d = central_difference(f(2.0 + FD_STEP), f(2.0 - FD_STEP), FD_STEP);
        assert!((d - 12.0).abs() < 1e-8);
    }
}
