use std::path::Path;

use serde::Serialize;

use super::run::{run, RunOptions};
use super::{with_fixed_step, ExperimentSpec, MethodSpec};
use crate::error::{config, Result};

/// Summary of one method at one time step, first seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: String,
    pub tau: f64,
    pub final_objective: f64,
    pub final_rel_objective: f64,
    /// No increase of the objective along the trace.
    pub monotone: bool,
    pub max_increase: f64,
    pub failed: bool,
}

/// Re-runs every method of the spec with each fixed `τ`, one experiment per step.
pub fn tau_sweep(spec: &ExperimentSpec, taus: &[f64], out: Option<&Path>, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0)) {
        return config("sweep needs positive time steps");
    }
    let mut rows = Vec::new();
    for &tau in taus {
        let mut s = spec.clone();
        s.methods = spec
            .methods
            .iter()
            .map(|m| {
                Ok(MethodSpec { label: Some(m.label()), method: with_fixed_step(&m.method, tau)? })
            })
            .collect::<Result<_>>()?;
        let opts = RunOptions {
            out: out.map(|d| d.join(format!("tau_{tau:e}"))),
            threads,
            dry_run: out.is_none(),
        };
        let outcome = run(&s, &opts)?;
        for m in &s.methods {
            let label = m.label();
            let t = outcome.traces.iter().find(|t| t.label == label).expect("every method ran");
            let (objs, failed) = match &t.outcome {
                Ok(tr) => (tr.objectives(), tr.failed()),
                Err(_) => (Vec::new(), true),
            };
            let max_increase = objs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            rows.push(SweepRow {
                method: label,
                tau,
                final_objective: objs.last().copied().unwrap_or(f64::NAN),
                final_rel_objective: t.rel_objective.last().copied().unwrap_or(f64::NAN),
                monotone: !failed && max_increase <= 0.0,
                max_increase,
                failed,
            });
        }
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(rows)
}
