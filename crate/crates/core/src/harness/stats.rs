use serde::Serialize;

/// One row of a per-method aggregate table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub k: usize,
    pub mean_rel_objective: f64,
    pub p05: f64,
    pub p95: f64,
    pub theory_bound: f64,
    pub runs: usize,
}

/// Linearly interpolated percentile of sorted data, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let w = pos - lo as f64;
            sorted[lo] + w * (sorted[hi] - sorted[lo])
        }
    }
}

/// Mean and 5th/95th percentile band of the series at every `k`.
///
/// Runs that stopped early hold their last value. The band is widened to
/// contain the mean where a skewed sample would put the mean outside it.
pub fn aggregate(series: &[Vec<f64>], theory: impl Fn(usize) -> f64) -> Vec<AggregateRow> {
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(len);
    let mut column = Vec::with_capacity(series.len());
    for k in 0..len {
        column.clear();
        column.extend(series.iter().filter(|s| !s.is_empty()).map(|s| s[k.min(s.len() - 1)]));
        column.sort_by(f64::total_cmp);
        let mean = column.iter().sum::<f64>() / column.len() as f64;
        rows.push(AggregateRow {
            k,
            mean_rel_objective: mean,
            p05: percentile(&column, 0.05).min(mean),
            p95: percentile(&column, 0.95).max(mean),
            theory_bound: theory(k),
            runs: column.len(),
        });
    }
    rows
}
