//! Registered experiments for `reproduce`.

use std::path::PathBuf;

use iga_gap_core::spectral_analysis::GapReport;

use crate::commands::{cmd_gap_sweep, cmd_pack, cmd_symbol, gap_table, Context};
use crate::config::{ExperimentConfig, Outputs};
use crate::csv::Table;
use crate::error::{CliError, Result};

pub const TARGETS: [&str; 10] = [
    "table1",
    "fig2",
    "fig3",
    "fig-gap-dist",
    "test4",
    "test5",
    "test6",
    "test7",
    "test8",
    "test9",
];

pub const TABLE1_N: [usize; 11] = [50, 99, 200, 300, 400, 500, 600, 700, 800, 900, 1600];

fn sweep_n() -> Vec<usize> {
    (1..=16).map(|i| 25 * i).collect()
}

/// Settings shared by every registered run.
#[derive(Debug, Clone)]
pub struct Shared {
    pub svg: bool,
    pub dump_matrices: bool,
    pub quad_tol: Option<f64>,
    pub outlier_tol: Option<f64>,
}

impl Shared {
    fn config(&self, name: &str, p: &[usize], n: Vec<usize>, phis: &[&str]) -> Result<ExperimentConfig> {
        let specs: Vec<String> = phis.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::build(
            name.to_string(),
            p.to_vec(),
            n,
            &specs,
            Outputs {
                csv: true,
                svg: self.svg,
                dump_matrices: self.dump_matrices,
            },
            self.quad_tol,
            self.outlier_tol,
        )
    }
}

/// Runs several gap sweeps into one directory and writes a single combined table.
fn combined_sweep(ctx: &Context, configs: Vec<ExperimentConfig>) -> Result<(Vec<PathBuf>, Vec<GapReport>)> {
    let mut written = Vec::new();
    let mut reports = Vec::new();
    for mut cfg in configs {
        cfg.outputs.csv = false;
        let (w, r) = cmd_gap_sweep(ctx, &cfg)?;
        written.extend(w);
        reports.extend(r);
    }
    written.push(gap_table(&reports).write(&ctx.path("gap_sweep.csv"))?);
    Ok((written, reports))
}

/// First `n` of each map's sweep with `|δ - π| / π < band`.
fn band_table(reports: &[GapReport], labels: &[String], band: f64) -> Table {
    let pi = std::f64::consts::PI;
    let mut t = Table::new(&["phi", "first_n_within_band", "band", "last_n", "last_rel_error"]);
    for label in labels {
        let rows: Vec<&GapReport> = reports.iter().filter(|g| &g.phi_label == label).collect();
        let first = rows.iter().find(|g| (g.delta - pi).abs() / pi < band).map(|g| g.n);
        let last = rows.last();
        t.row(vec![
            label.as_str().into(),
            first.into(),
            band.into(),
            last.map(|g| g.n).into(),
            last.map(|g| (g.delta - pi).abs() / pi).into(),
        ]);
    }
    t
}

pub fn reproduce(target: &str, out_root: &std::path::Path, shared: &Shared, log_x: bool, log_y: bool) -> Result<Vec<PathBuf>> {
    if !TARGETS.contains(&target) {
        return Err(CliError::Usage(format!(
            "unknown target '{target}'; known targets: {}",
            TARGETS.join(", ")
        )));
    }
    let ctx = Context {
        out: out_root.join(target),
        log_x,
        log_y,
    };
    let sweep = |name: &str, p: &[usize], phis: &[&str]| shared.config(name, p, sweep_n(), phis);
    let written = match target {
        "table1" => {
            let cfg = shared.config(target, &[1], TABLE1_N.to_vec(), &["phi1", "phi2", "phi3:theta=0.01"])?;
            let (mut written, reports) = cmd_gap_sweep(&ctx, &cfg)?;
            let mut t = Table::new(&["n", "m_phi1", "m_phi2", "m_phi3"]);
            for &n in &TABLE1_N {
                let m = |label: &str| reports.iter().find(|g| g.n == n && g.phi_label == label).map(|g| g.m_of_n);
                t.row(vec![n.into(), m("phi1").into(), m("phi2").into(), m("phi3:theta=0.01").into()]);
            }
            written.push(t.write(&ctx.path("table1.csv"))?);
            written
        }
        "fig2" => {
            let cfg = shared.config(target, &[1], vec![50, 100, 200, 400, 800, 1600], &["phi1"])?;
            let (mut written, reports) = cmd_gap_sweep(&ctx, &cfg)?;
            written.push(band_table(&reports, &["phi1".into()], 0.05).write(&ctx.path("band.csv"))?);
            written
        }
        "fig3" => cmd_symbol(&ctx, &shared.config(target, &[1], vec![100, 400], &["phi1"])?)?,
        "fig-gap-dist" => cmd_pack(&ctx, &shared.config(target, &[1], vec![1000], &["phi1"])?, 0.0, None, 10)?,
        "test4" => cmd_gap_sweep(&ctx, &sweep(target, &[2], &["phi1"])?)?.0,
        "test5" => cmd_gap_sweep(&ctx, &sweep(target, &[2], &["phi2"])?)?.0,
        "test6" => cmd_gap_sweep(&ctx, &sweep(target, &[2], &["phi3:theta=0.01", "phi3:theta=1"])?)?.0,
        "test7" => cmd_gap_sweep(&ctx, &sweep(target, &[3], &["phi1", "phi2", "phi3:theta=0.01"])?)?.0,
        "test8" => {
            let configs = (2..=5)
                .map(|p| sweep(target, &[p], &[format!("Phi:p={p},theta=0.01").as_str()]))
                .collect::<Result<Vec<_>>>()?;
            combined_sweep(&ctx, configs)?.0
        }
        "test9" => {
            let specs = ["Phi:p=4,theta=0.01", "Phi:p=4,theta=0.1", "Phi:p=4,theta=1"];
            let cfg = sweep(target, &[4], &specs)?;
            let labels: Vec<String> = cfg.phis.iter().map(|p| p.label().to_string()).collect();
            let (mut written, reports) = cmd_gap_sweep(&ctx, &cfg)?;
            written.push(band_table(&reports, &labels, 0.05).write(&ctx.path("band.csv"))?);
            written
        }
        _ => unreachable!(),
    };
    Ok(written)
}
