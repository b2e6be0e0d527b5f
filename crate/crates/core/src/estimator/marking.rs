//! Bulk (Dörfler) marking.

use crate::error::{Error, Result};

/// Relative slack on the bulk criterion so that `theta = 1` is reachable
/// despite rounding in the running sum.
const SLACK: f64 = 1e-12;

/// Smallest set of triangles whose indicators (squared) sum to at least
/// `theta` times the total. Greedy on descending indicators, ties broken by
/// the lower index. Returned sorted ascending.
pub fn doerfler_mark(indicators: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("marking fraction {theta} not in (0, 1]")));
    }
    if let Some(bad) = indicators.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "indicator {bad} is {}",
            indicators[bad]
        )));
    }
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&i| indicators[i]).sum();
    let target = theta * total * (1.0 - SLACK);
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for i in order {
        if acc >= target || indicators[i] == 0.0 {
            break;
        }
        acc += indicators[i];
        marked.push(i);
    }
    marked.sort_unstable();
    Ok(marked)
}
