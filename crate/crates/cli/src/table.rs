//! Long-format CSV tables. Floats carry 17 significant digits so that every
//! value reads back bit-exactly.

use std::io::Write;

use aim_core::sim::TailStats;
use aim_core::AggregateCurve;

pub const REGRET_HEADER: [&str; 5] = ["policy", "t", "mean_regret", "sem", "runs"];
pub const SURVIVAL_HEADER: [&str; 3] = ["policy", "r", "survival"];
pub const SCATTER_HEADER: [&str; 3] = ["policy", "gap", "nmin_fraction"];

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_regret<W: Write>(out: W, curves: &[AggregateCurve]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGRET_HEADER)?;
    for curve in curves {
        for p in &curve.points {
            w.write_record([curve.policy.clone(), p.t.to_string(), float(p.mean), float(p.sem), p.runs.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Survival and scatter tables, one block per policy.
pub fn write_tail<W: Write>(survival: W, scatter: W, tails: &[(String, TailStats)]) -> csv::Result<()> {
    let mut s = csv::Writer::from_writer(survival);
    let mut g = csv::Writer::from_writer(scatter);
    s.write_record(SURVIVAL_HEADER)?;
    g.write_record(SCATTER_HEADER)?;
    for (policy, tail) in tails {
        for &(r, p) in &tail.survival {
            s.write_record([policy.as_str(), &float(r), &float(p)])?;
        }
        for &(gap, frac) in &tail.scatter {
            g.write_record([policy.as_str(), &float(gap), &float(frac)])?;
        }
    }
    s.flush()?;
    g.flush()?;
    Ok(())
}
