//! Experiment grids: run every (axis value × variant × run index) cell of a
//! sweep and tabulate the four headline metrics.
//!
//! Cells are independent and run in a rayon pool. Each cell's seed is derived
//! from (master seed, axis value, run index) — deliberately not from the
//! variant, so the ablation arms of a run see identical placement, mobility,
//! roles and traffic, and re-running any single cell reproduces its row.
//!
//! Tables mirror the experiment-report layout: first column is the axis value,
//! then one column per variant; every metric gets a mean table and a
//! standard-deviation companion.

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run_scenario, RunError};
use crate::metrics::MetricsReport;
use crate::sim::rng::cell_seed;
use crate::variant::VariantSpec;
use crate::workload::ScenarioConfig;

/// Which scenario dimension the grid walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Network size, 50–500 in the full grid.
    NodeCount,
    /// Designated-flow packet budget, 10–100 in the full grid.
    PacketCount,
}

impl SweepAxis {
    /// Name of the table's first column.
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::NodeCount => "nodes",
            SweepAxis::PacketCount => "packets",
        }
    }

    /// The ten-value grid the experiment tables use.
    pub fn full_grid_values(self) -> Vec<u32> {
        match self {
            SweepAxis::NodeCount => (1..=10).map(|i| i * 50).collect(),
            SweepAxis::PacketCount => (1..=10).map(|i| i * 10).collect(),
        }
    }

    fn apply(self, base: &ScenarioConfig, value: u32) -> ScenarioConfig {
        let mut config = base.clone();
        match self {
            SweepAxis::NodeCount => config.nodes = value as u16,
            SweepAxis::PacketCount => config.flows.designated_packets = Some(value),
        }
        config
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.column())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nodes" => Ok(SweepAxis::NodeCount),
            "packets" => Ok(SweepAxis::PacketCount),
            other => Err(format!("unknown sweep axis `{other}` (use nodes|packets)")),
        }
    }
}

/// A grid to run: axis values × variants × seeded repetitions.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    /// Strictly ascending, nonempty.
    pub values: Vec<u32>,
    /// At least one.
    pub variants: Vec<VariantSpec>,
    /// Repetitions per cell, at least one.
    pub runs: u32,
}

impl SweepSpec {
    /// The full experiment grid on `axis`: ten values, all three variants,
    /// ten runs per cell.
    pub fn full_grid(axis: SweepAxis) -> Self {
        SweepSpec {
            axis,
            values: axis.full_grid_values(),
            variants: vec![
                VariantSpec::Wtmrd,
                VariantSpec::NoClassification,
                VariantSpec::FixedThreshold { tau: 1.0 },
            ],
            runs: 10,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::NoValues);
        }
        for pair in self.values.windows(2) {
            if pair[1] <= pair[0] {
                return Err(SweepError::UnsortedValues {
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        if self.variants.is_empty() {
            return Err(SweepError::NoVariants);
        }
        if self.runs == 0 {
            return Err(SweepError::NoRuns);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least one axis value")]
    NoValues,
    #[error("axis values must be strictly ascending, got {prev} then {next}")]
    UnsortedValues { prev: u32, next: u32 },
    #[error("sweep needs at least one variant")]
    NoVariants,
    #[error("sweep needs at least one run per cell")]
    NoRuns,
    #[error("cell ({axis} {value}, {variant}, run {run}) failed: {source}")]
    Cell {
        axis: SweepAxis,
        value: u32,
        variant: VariantSpec,
        run: u32,
        #[source]
        source: RunError,
    },
}

/// The four tabulated metrics, in report order.
pub const METRICS: [(&str, fn(&MetricsReport) -> f64); 4] = [
    ("adr", |r| r.adr_percent),
    ("adt", |r| r.adt_millis),
    ("dsl", |r| r.dsl_percent),
    ("delay", |r| r.delay_millis),
];

/// Completed sweep: every cell's report, addressable by
/// `[value index][variant index][run index]`.
#[derive(Debug)]
pub struct SweepResult {
    pub spec: SweepSpec,
    reports: Vec<Vec<Vec<MetricsReport>>>,
}

impl SweepResult {
    pub fn reports(&self, value_idx: usize, variant_idx: usize) -> &[MetricsReport] {
        &self.reports[value_idx][variant_idx]
    }

    /// Mean table for one metric extractor.
    pub fn mean_csv(&self, metric: fn(&MetricsReport) -> f64) -> String {
        self.table(metric, |values| mean(values))
    }

    /// Sample standard-deviation companion.
    pub fn std_csv(&self, metric: fn(&MetricsReport) -> f64) -> String {
        self.table(metric, |values| std_dev(values))
    }

    /// `(file stem, mean CSV, std CSV)` for each of the four metrics.
    pub fn tables(&self) -> Vec<(&'static str, String, String)> {
        METRICS
            .iter()
            .map(|&(stem, metric)| (stem, self.mean_csv(metric), self.std_csv(metric)))
            .collect()
    }

    fn table(&self, metric: fn(&MetricsReport) -> f64, fold: fn(&[f64]) -> f64) -> String {
        let mut out = String::from(self.spec.axis.column());
        for v in &self.spec.variants {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
        for (vi, value) in self.spec.values.iter().enumerate() {
            out.push_str(&value.to_string());
            for (ci, _) in self.spec.variants.iter().enumerate() {
                let samples: Vec<f64> = self.reports[vi][ci].iter().map(metric).collect();
                out.push_str(&format!(",{:.4}", fold(&samples)));
            }
            out.push('\n');
        }
        out
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Run every cell of `spec` against `base` and collect the reports. Any
/// failing cell aborts the sweep, named in the error.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;

    // Flatten the grid so rayon can schedule cells freely.
    let mut cells: Vec<(usize, usize, u32)> = Vec::new();
    for vi in 0..spec.values.len() {
        for ci in 0..spec.variants.len() {
            for run in 0..spec.runs {
                cells.push((vi, ci, run));
            }
        }
    }

    let outcomes: Vec<(usize, usize, u32, Result<MetricsReport, RunError>)> = cells
        .into_par_iter()
        .map(|(vi, ci, run)| {
            let value = spec.values[vi];
            let variant = spec.variants[ci];
            let config = spec.axis.apply(base, value);
            let seed = cell_seed(base.seed, value as u64, run);
            let report = run_scenario(&config, variant, seed, false).map(|out| out.report);
            (vi, ci, run, report)
        })
        .collect();

    let mut reports: Vec<Vec<Vec<MetricsReport>>> =
        vec![vec![Vec::with_capacity(spec.runs as usize); spec.variants.len()]; spec.values.len()];
    for (vi, ci, run, outcome) in outcomes {
        match outcome {
            Ok(report) => reports[vi][ci].push(report),
            Err(source) => {
                return Err(SweepError::Cell {
                    axis: spec.axis,
                    value: spec.values[vi],
                    variant: spec.variants[ci],
                    run,
                    source,
                })
            }
        }
    }

    Ok(SweepResult {
        spec: spec.clone(),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_base() -> ScenarioConfig {
        ScenarioConfig {
            sim_time_s: 30,
            ..ScenarioConfig::default()
        }
    }

    fn tiny_spec() -> SweepSpec {
        SweepSpec {
            axis: SweepAxis::NodeCount,
            values: vec![40, 60],
            variants: vec![VariantSpec::Wtmrd, VariantSpec::NoClassification],
            runs: 2,
        }
    }

    #[test]
    fn grid_shape_matches_spec() {
        let result = run_sweep(&tiny_base(), &tiny_spec()).unwrap();
        for vi in 0..2 {
            for ci in 0..2 {
                assert_eq!(result.reports(vi, ci).len(), 2);
            }
        }
        let csv = result.mean_csv(METRICS[0].1);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "nodes,wtmrd,noclass");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("40,"));
        assert!(lines[2].starts_with("60,"));
        assert_eq!(lines[1].split(',').count(), 3);
    }

    #[test]
    fn variants_of_a_cell_share_their_seed() {
        // The undefended arm must see the same topology and roles as the
        // defended arm: with classification off, ADR collapses to the share
        // of honest nodes, which pins the role draw.
        let result = run_sweep(&tiny_base(), &tiny_spec()).unwrap();
        for vi in 0..2 {
            let noclass = &result.reports(vi, 1)[0];
            assert_eq!(
                noclass.correct_detected,
                noclass.total_nodes - (noclass.total_nodes as f64 * 0.2).round() as u64
            );
        }
    }

    #[test]
    fn rerunning_a_sweep_reproduces_every_row() {
        let a = run_sweep(&tiny_base(), &tiny_spec()).unwrap();
        let b = run_sweep(&tiny_base(), &tiny_spec()).unwrap();
        // All metrics except the wall-clock-derived detection time.
        for &(stem, metric) in &METRICS {
            if stem == "adt" {
                continue;
            }
            assert_eq!(a.mean_csv(metric), b.mean_csv(metric), "{stem} means differ");
            assert_eq!(a.std_csv(metric), b.std_csv(metric), "{stem} stds differ");
        }
    }

    #[test]
    fn packet_axis_caps_the_designated_flow() {
        let spec = SweepSpec {
            axis: SweepAxis::PacketCount,
            values: vec![10, 20],
            variants: vec![VariantSpec::Wtmrd],
            runs: 1,
        };
        let result = run_sweep(&tiny_base(), &spec).unwrap();
        assert_eq!(result.reports(0, 0)[0].total_packets, 10);
        assert_eq!(result.reports(1, 0)[0].total_packets, 20);
    }

    #[test]
    fn degenerate_specs_are_rejected() {
        let mut spec = tiny_spec();
        spec.values.clear();
        assert!(matches!(spec.validate(), Err(SweepError::NoValues)));

        let mut spec = tiny_spec();
        spec.values = vec![60, 40];
        assert!(matches!(
            spec.validate(),
            Err(SweepError::UnsortedValues { prev: 60, next: 40 })
        ));

        let mut spec = tiny_spec();
        spec.variants.clear();
        assert!(matches!(spec.validate(), Err(SweepError::NoVariants)));

        let mut spec = tiny_spec();
        spec.runs = 0;
        assert!(matches!(spec.validate(), Err(SweepError::NoRuns)));
    }

    #[test]
    fn std_dev_is_zero_for_singletons_and_exact_for_pairs() {
        assert_eq!(std_dev(&[5.0]), 0.0);
        assert_eq!(std_dev(&[1.0, 3.0]), std::f64::consts::SQRT_2);
    }
}
