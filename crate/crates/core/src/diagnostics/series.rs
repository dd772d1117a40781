use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled observables of one realization. Energies are per unit plate area
/// over the half-space.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub time: Vec<f64>,
    /// `|z|^2_{L^2(D)}`.
    pub kinetic_energy: Vec<f64>,
    /// `nu |grad z|^2_{L^2(D)}`.
    pub dissipation_rate: Vec<f64>,
    /// `|z|^2_{L^2(wall)}`.
    pub wall_energy: Vec<f64>,
    /// `nu (|grad z|^2 + alpha |z|^2_wall)`.
    pub slip_norm: Vec<f64>,
    /// Left Riemann sum of `dissipation_rate` over every step up to the sample.
    pub cumulative_dissipation: Vec<f64>,
    /// Same for `slip_norm`.
    pub cumulative_slip: Vec<f64>,
}

impl DiagnosticsSeries {
    pub fn with_capacity(n: usize) -> Self {
        DiagnosticsSeries {
            time: Vec::with_capacity(n),
            kinetic_energy: Vec::with_capacity(n),
            dissipation_rate: Vec::with_capacity(n),
            wall_energy: Vec::with_capacity(n),
            slip_norm: Vec::with_capacity(n),
            cumulative_dissipation: Vec::with_capacity(n),
            cumulative_slip: Vec::with_capacity(n),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(&mut self, time: f64, ke: f64, diss: f64, wall: f64, slip: f64, cum_diss: f64, cum_slip: f64) {
        self.time.push(time);
        self.kinetic_energy.push(ke);
        self.dissipation_rate.push(diss);
        self.wall_energy.push(wall);
        self.slip_norm.push(slip);
        self.cumulative_dissipation.push(cum_diss);
        self.cumulative_slip.push(cum_slip);
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    fn channels(&self) -> [&[f64]; 6] {
        [
            &self.kinetic_energy,
            &self.dissipation_rate,
            &self.wall_energy,
            &self.slip_norm,
            &self.cumulative_dissipation,
            &self.cumulative_slip,
        ]
    }
}

/// Mean and standard error of one channel at each sample time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
}

impl ChannelStats {
    pub fn last_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn last_sem(&self) -> f64 {
        self.sem.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub time: Vec<f64>,
    pub kinetic_energy: ChannelStats,
    pub dissipation_rate: ChannelStats,
    pub wall_energy: ChannelStats,
    pub slip_norm: ChannelStats,
    pub cumulative_dissipation: ChannelStats,
    pub cumulative_slip: ChannelStats,
}

/// Per-sample means and standard errors (`sd / sqrt(N)` with the `N - 1`
/// sample deviation; zero for a single series). Sums run in slice order.
pub fn accumulate_ensemble(series: &[DiagnosticsSeries]) -> Result<EnsembleStats> {
    let first = series
        .first()
        .ok_or_else(|| Error::domain("cannot average an empty ensemble"))?;
    let len = first.len();
    for s in series {
        if s.len() != len {
            return Err(Error::Shape {
                expected: len,
                got: s.len(),
            });
        }
        if let Some(index) = s.time.iter().zip(&first.time).position(|(a, b)| a != b) {
            return Err(Error::TimeMismatch { index });
        }
    }
    let n = series.len();
    let stats = |c: usize| {
        let mut mean = vec![0.0; len];
        for s in series {
            for (m, x) in mean.iter_mut().zip(s.channels()[c]) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut sem = vec![0.0; len];
        if n > 1 {
            for s in series {
                for ((v, x), m) in sem.iter_mut().zip(s.channels()[c]).zip(&mean) {
                    *v += (x - m) * (x - m);
                }
            }
            sem.iter_mut()
                .for_each(|v| *v = (*v / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt());
        }
        ChannelStats { mean, sem }
    };
    Ok(EnsembleStats {
        n,
        time: first.time.clone(),
        kinetic_energy: stats(0),
        dissipation_rate: stats(1),
        wall_energy: stats(2),
        slip_norm: stats(3),
        cumulative_dissipation: stats(4),
        cumulative_slip: stats(5),
    })
}

/// Ensemble summary of one variant of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nu: f64,
    pub delta: f64,
    pub mode: String,
    pub time_integrated_diss: f64,
    pub final_wall_ke: f64,
    pub final_ke: f64,
    pub weak_diss: f64,
}

impl SweepRow {
    pub fn from_stats(nu: f64, delta: f64, mode: impl Into<String>, stats: &EnsembleStats) -> Self {
        SweepRow {
            nu,
            delta,
            mode: mode.into(),
            time_integrated_diss: stats.cumulative_dissipation.last_mean(),
            final_wall_ke: stats.wall_energy.last_mean(),
            final_ke: stats.kinetic_energy.last_mean(),
            weak_diss: super::weak_dissipation_value(stats, nu),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a row; a second row for the same `(nu, delta, mode)` is rejected.
    pub fn push(&mut self, row: SweepRow) -> Result<()> {
        if self
            .rows
            .iter()
            .any(|r| r.nu == row.nu && r.delta == row.delta && r.mode == row.mode)
        {
            return Err(Error::config(format!(
                "duplicate sweep row (nu = {}, delta = {}, mode = {})",
                row.nu, row.delta, row.mode
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    /// Rows of one mode at one delta, ordered by decreasing `nu`.
    pub fn select(&self, delta: f64, mode: &str) -> Vec<&SweepRow> {
        let mut rows: Vec<&SweepRow> = self
            .rows
            .iter()
            .filter(|r| r.delta == delta && r.mode == mode)
            .collect();
        rows.sort_by(|a, b| b.nu.total_cmp(&a.nu));
        rows
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;

    fn series(values: &[f64]) -> DiagnosticsSeries {
        let mut s = DiagnosticsSeries::default();
        for (i, &v) in values.iter().enumerate() {
            s.push(i as f64, v, v, v, v, v, v);
        }
        s
    }

    #[test]
    fn identical_series_have_zero_error() {
        let s = series(&[1.0, 2.5, 3.0]);
        let st = accumulate_ensemble(&vec![s.clone(); 7]).unwrap();
        assert_eq!(st.n, 7);
        assert_eq!(st.kinetic_energy.mean, s.kinetic_energy);
        assert!(st.wall_energy.sem.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn two_point_ensemble() {
        let st = accumulate_ensemble(&[series(&[0.0]), series(&[2.0])]).unwrap();
        assert_eq!(st.dissipation_rate.mean, vec![1.0]);
        assert_relative_eq!(st.dissipation_rate.sem[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn single_series_has_zero_error() {
        let st = accumulate_ensemble(&[series(&[4.0, 5.0])]).unwrap();
        assert_eq!(st.slip_norm.sem, vec![0.0, 0.0]);
    }

    #[test]
    fn standard_error_of_unit_variance_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let ens: Vec<DiagnosticsSeries> = (0..250)
            .map(|_| {
                let v: Vec<f64> = (0..40).map(|_| StandardNormal.sample(&mut rng)).collect();
                series(&v)
            })
            .collect();
        let st = accumulate_ensemble(&ens).unwrap();
        for &e in &st.kinetic_energy.sem {
            assert!((e / (1.0 / 250f64.sqrt()) - 1.0).abs() < 0.2, "sem {e}");
        }
    }

    #[test]
    fn mismatched_series_are_rejected() {
        assert!(matches!(
            accumulate_ensemble(&[series(&[1.0, 2.0]), series(&[1.0])]),
            Err(Error::Shape { .. })
        ));
        let mut b = series(&[1.0, 2.0]);
        b.time[1] = 1.5;
        assert!(matches!(
            accumulate_ensemble(&[series(&[1.0, 2.0]), b]),
            Err(Error::TimeMismatch { index: 1 })
        ));
        assert!(accumulate_ensemble(&[]).is_err());
    }

    #[test]
    fn sweep_rows_are_unique_per_variant() {
        let st = accumulate_ensemble(&[series(&[1.0, 3.0])]).unwrap();
        let mut t = SweepTable::new();
        t.push(SweepRow::from_stats(0.1, 0.75, "node_iid", &st)).unwrap();
        t.push(SweepRow::from_stats(0.5, 0.75, "node_iid", &st)).unwrap();
        t.push(SweepRow::from_stats(0.1, 0.75, "deterministic", &st)).unwrap();
        assert!(t.push(SweepRow::from_stats(0.1, 0.75, "node_iid", &st)).is_err());
        let rows = t.select(0.75, "node_iid");
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].nu, 0.5);
        assert_relative_eq!(rows[1].weak_diss, 0.3, max_relative = 1e-15);
        assert_eq!(rows[1].time_integrated_diss, 3.0);
    }
}
