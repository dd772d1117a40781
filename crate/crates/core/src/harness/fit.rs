use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::run::read_sweep_csv;
use crate::diagnostics::{fit_scaling_exponent, ScalingFit, SweepRow};
use crate::error::{Error, Result};

/// Log-log slopes against `nu` for one `(delta, mode)` group of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupFit {
    pub delta: f64,
    pub mode: String,
    pub n: usize,
    pub time_integrated_diss: ScalingFit,
    pub final_wall_ke: ScalingFit,
    pub weak_diss: ScalingFit,
    /// `-delta / 2`, the envelope for the wall-energy slope.
    pub wall_envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub groups: Vec<GroupFit>,
}

impl ScalingReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            let _ = writeln!(out, "delta = {}, mode = {}, {} viscosities", g.delta, g.mode, g.n);
            for (name, f) in [
                ("time-integrated dissipation", &g.time_integrated_diss),
                ("final wall energy", &g.final_wall_ke),
                ("weak dissipation", &g.weak_diss),
            ] {
                let _ = writeln!(out, "  {name:<28} slope {:+.3}  r^2 {:.4}", f.slope, f.r_squared);
            }
            let _ = writeln!(out, "  wall-energy envelope        {:+.3}", g.wall_envelope);
        }
        out
    }
}

/// Groups with fewer than three viscosities are skipped; a sweep with no
/// group large enough is an error.
pub fn fit_rows(rows: &[SweepRow]) -> Result<ScalingReport> {
    let mut keys: Vec<(f64, String)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(d, m)| *d == r.delta && *m == r.mode) {
            keys.push((r.delta, r.mode.clone()));
        }
    }
    let mut groups = Vec::new();
    for (delta, mode) in keys {
        let g: Vec<&SweepRow> = rows.iter().filter(|r| r.delta == delta && r.mode == mode).collect();
        if g.len() < 3 {
            continue;
        }
        let fit = |f: fn(&SweepRow) -> f64| {
            let pairs: Vec<(f64, f64)> = g.iter().map(|r| (r.nu, f(r))).collect();
            fit_scaling_exponent(&pairs)
        };
        groups.push(GroupFit {
            delta,
            mode,
            n: g.len(),
            time_integrated_diss: fit(|r| r.time_integrated_diss)?,
            final_wall_ke: fit(|r| r.final_wall_ke)?,
            weak_diss: fit(|r| r.weak_diss)?,
            wall_envelope: -0.5 * delta,
        });
    }
    if groups.is_empty() {
        return Err(Error::domain("no (delta, mode) group has three or more viscosities"));
    }
    Ok(ScalingReport { groups })
}

pub fn fit_report(sweep_csv: &Path) -> Result<ScalingReport> {
    let rows = read_sweep_csv(sweep_csv)?;
    fit_rows(&rows).map_err(|e| Error::Parse {
        path: sweep_csv.to_path_buf(),
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn row(nu: f64, mode: &str, diss: f64, wall: f64) -> SweepRow {
        SweepRow {
            nu,
            delta: 0.75,
            mode: mode.into(),
            time_integrated_diss: diss,
            final_wall_ke: wall,
            final_ke: 1.0,
            weak_diss: nu,
        }
    }

    #[test]
    fn synthetic_sweeps() {
        let nus = [0.5, 0.25, 0.1, 0.075, 0.05];
        let rows: Vec<SweepRow> = nus.iter().map(|&n| row(n, "node_iid", 1.0, n.powf(-0.375))).collect();
        let rep = fit_rows(&rows).unwrap();
        let g = &rep.groups[0];
        assert!(g.time_integrated_diss.slope.abs() < 1e-12);
        assert_relative_eq!(g.final_wall_ke.slope, -0.375, max_relative = 1e-12);
        assert_relative_eq!(g.weak_diss.slope, 1.0, max_relative = 1e-12);
        assert_eq!(g.wall_envelope, -0.375);
        assert!(rep.to_text().contains("-0.375"));
    }

    #[test]
    fn small_groups_are_skipped() {
        let mut rows: Vec<SweepRow> = [0.5, 0.25, 0.1].iter().map(|&n| row(n, "node_iid", 2.0, 1.0)).collect();
        rows.push(row(0.1, "deterministic", 1.0, 1.0));
        assert_eq!(fit_rows(&rows).unwrap().groups.len(), 1);
        assert!(fit_rows(&rows[..2]).is_err());
    }

    #[test]
    fn report_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sweep.csv");
        std::fs::write(
            &p,
            "# schema=slipflow-sweep/1\nnu,delta,mode,time_integrated_diss,final_wall_ke,final_ke,weak_diss\n0.5,0.75,node_iid,1,1,1,0.5\n0.25,0.75,node_iid,1,1.2,1,0.25\n0.1,0.75,node_iid,1,1.5,1,0.1\n",
        )
        .unwrap();
        assert_eq!(fit_report(&p).unwrap().groups[0].n, 3);
        std::fs::write(&p, "nu,delta,mode,time_integrated_diss,final_wall_ke,final_ke,weak_diss\n0.5,0.75,node_iid,1,1,1,0.5\n").unwrap();
        assert!(matches!(fit_report(&p), Err(Error::Parse { .. })));
    }
}
