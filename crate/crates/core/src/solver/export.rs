use std::io::Write;

use super::{momentum_column, Trajectory};
use crate::error::{Error, Result};

fn io(e: impl std::fmt::Display) -> Error {
    Error::Configuration(format!("write failed: {e}"))
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn seed_line<W: Write>(w: &mut W, seed: Option<u64>) -> Result<()> {
    match seed {
        Some(s) => writeln!(w, "# seed={s}").map_err(io),
        None => Ok(()),
    }
}

/// One row per snapshot and node: `t, node, phi…, P…, eta[, F01]`. A
/// `# seed=` comment line precedes the header when a seed is given.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    seed: Option<u64>,
) -> Result<()> {
    seed_line(&mut w, seed)?;
    let first = &traj.snapshots[0];
    let mut header = vec!["t".to_string(), "node".to_string()];
    header.extend((0..first.fields.len()).map(|a| format!("phi{a}")));
    header.extend(first.momenta.iter().map(|(l, _)| momentum_column(l)));
    header.push("eta".into());
    if first.f01.is_some() {
        header.push("F01".into());
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&header).map_err(io)?;
    for s in &traj.snapshots {
        for j in 0..s.nodes() {
            let mut row = vec![num(s.t), j.to_string()];
            row.extend(s.fields.iter().map(|f| num(f[j])));
            row.extend(s.momenta.iter().map(|(_, p)| num(p[j])));
            row.push(num(s.eta[j]));
            if let Some(f) = &s.f01 {
                row.push(num(f[j]));
            }
            out.write_record(&row).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

/// One row per step: `t, energy, max_eta, probe[, F01_spread, F01_mean]`.
pub fn write_diagnostics_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    seed: Option<u64>,
) -> Result<()> {
    seed_line(&mut w, seed)?;
    let ed = traj.diagnostics[0].f01_spread.is_some();
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t", "energy", "max_eta", "probe"];
    if ed {
        header.extend(["F01_spread", "F01_mean"]);
    }
    out.write_record(&header).map_err(io)?;
    for d in &traj.diagnostics {
        let mut row = vec![num(d.t), num(d.energy), num(d.max_eta), num(d.probe)];
        if ed {
            row.push(num(d.f01_spread.unwrap_or(f64::NAN)));
            row.push(num(d.f01_mean.unwrap_or(f64::NAN)));
        }
        out.write_record(&row).map_err(io)?;
    }
    out.flush().map_err(io)
}
