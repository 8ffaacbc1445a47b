use std::collections::HashMap;
use std::path::PathBuf;

use iga_gap_core::assembly::{assemble_mass, assemble_stiffness, QuadratureConfig};
use iga_gap_core::eigensolve::{generalized_eig, Spectrum};
use iga_gap_core::reparam::{validate, Reparametrization};
use iga_gap_core::spectral_analysis::{
    compare_orderings, compute_gap, outlier_count_formula, pack_counts, weyl_statistic, xi_sqrt_increasing,
    GapReport, OrderReport, WeylReport,
};
use iga_gap_core::symbol::{rearrange, EpSymbol, RearrangedSymbol};

use crate::config::ExperimentConfig;
use crate::csv::{slug, write_file, Table};
use crate::error::Result;
use crate::svg::{Plot, Series, Style};

pub const SYMBOL_POINTS: usize = 512;

/// Where and how a command writes its files.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
    pub log_x: bool,
    pub log_y: bool,
}

impl Context {
    pub fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    fn plot(&self, title: &str, x: &str, y: &str) -> Plot {
        Plot::new(title, x, y).log_axes(self.log_x, self.log_y)
    }

    fn write_svg(&self, file: &str, plot: &Plot, written: &mut Vec<PathBuf>) -> Result<()> {
        written.push(write_file(&self.path(file), &plot.render())?);
        Ok(())
    }
}

fn case_name(p: usize, n: usize, phi: &Reparametrization) -> String {
    format!("p{p}_n{n}_{}", slug(phi.label()))
}

fn progress(cfg: &ExperimentConfig, p: usize, n: usize, phi: &Reparametrization) {
    eprintln!("[{}] p={p} n={n} phi={} done", cfg.name, phi.label());
}

/// Caches `Ψ` per `(p, φ)`.
#[derive(Default)]
struct Symbols(HashMap<(usize, String), RearrangedSymbol>);

impl Symbols {
    fn get(&mut self, phi: &Reparametrization, p: usize) -> Result<&RearrangedSymbol> {
        let key = (p, phi.label().to_string());
        if !self.0.contains_key(&key) {
            let rs = rearrange(phi, &EpSymbol::new(p)?)?;
            self.0.insert(key.clone(), rs);
        }
        Ok(&self.0[&key])
    }
}

fn solve_case(
    ctx: &Context,
    cfg: &ExperimentConfig,
    phi: &Reparametrization,
    p: usize,
    n: usize,
    written: &mut Vec<PathBuf>,
) -> Result<Spectrum> {
    let m = assemble_mass(phi, p, n, &cfg.quad)?;
    let k = assemble_stiffness(phi, p, n, &cfg.quad)?;
    if cfg.outputs.dump_matrices {
        let case = case_name(p, n, phi);
        written.push(write_file(&ctx.path(&format!("mass_{case}.txt")), &m.to_text())?);
        written.push(write_file(&ctx.path(&format!("stiffness_{case}.txt")), &k.to_text())?);
    }
    let mut s = generalized_eig(&k, &m, false)?;
    s.p = p;
    s.n = n;
    s.phi_label = phi.label().to_string();
    Ok(s)
}

fn cases(cfg: &ExperimentConfig) -> Vec<(usize, &Reparametrization, usize)> {
    let mut v = Vec::new();
    for &p in &cfg.p_list {
        for phi in &cfg.phis {
            for &n in &cfg.n_list {
                v.push((p, phi, n));
            }
        }
    }
    v
}

/// Rows `(kind, x_or_k, value)`: the rearranged symbol `√ξ` on a uniform grid and the
/// normalized square-root eigenvalues at `k/(N+1)`.
pub fn cmd_symbol(ctx: &Context, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut symbols = Symbols::default();
    let mut deviations = Table::new(&["p", "n", "phi", "max_deviation"]);
    for &p in &cfg.p_list {
        for phi in &cfg.phis {
            let rs = symbols.get(phi, p)?.clone();
            let xs: Vec<f64> = (0..SYMBOL_POINTS).map(|i| i as f64 / (SYMBOL_POINTS - 1) as f64).collect();
            let curve = xi_sqrt_increasing(&rs, &xs)?;
            let mut plot = ctx
                .plot(&format!("symbol and eigenvalues, p={p}, {}", phi.label()), "x", "sqrt(xi), sqrt(lambda_k)/n")
                .with(Series::new("sqrt(xi)", xs.iter().copied().zip(curve.iter().copied()).collect(), Style::Line));
            for &n in &cfg.n_list {
                let s = solve_case(ctx, cfg, phi, p, n, &mut written)?;
                let roots = s.sqrt_normalized();
                let big_n = roots.len();
                let mut t = Table::new(&["kind", "x_or_k", "value"]);
                for (x, y) in xs.iter().zip(&curve) {
                    t.row(vec!["symbol".into(), (*x).into(), (*y).into()]);
                }
                let grid: Vec<f64> = (1..=big_n).map(|k| k as f64 / (big_n + 1) as f64).collect();
                for (x, y) in grid.iter().zip(&roots) {
                    t.row(vec!["eigen".into(), (*x).into(), (*y).into()]);
                }
                if cfg.outputs.csv {
                    written.push(t.write(&ctx.path(&format!("symbol_{}.csv", case_name(p, n, phi))))?);
                }
                let keep = big_n - outlier_count_formula(p).min(big_n);
                let sampled = xi_sqrt_increasing(&rs, &grid[..keep])?;
                let dev = roots.iter().zip(&sampled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                deviations.row(vec![p.into(), n.into(), phi.label().into(), dev.into()]);
                plot = plot.with(Series::new(
                    format!("n={n}"),
                    grid.into_iter().zip(roots).collect(),
                    Style::Points,
                ));
                progress(cfg, p, n, phi);
            }
            if cfg.outputs.svg {
                ctx.write_svg(&format!("symbol_p{p}_{}.svg", slug(phi.label())), &plot, &mut written)?;
            }
        }
    }
    if cfg.outputs.csv {
        written.push(deviations.write(&ctx.path("symbol_deviation.csv"))?);
    }
    Ok(written)
}

pub fn cmd_eig(ctx: &Context, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (p, phi, n) in cases(cfg) {
        let s = solve_case(ctx, cfg, phi, p, n, &mut written)?;
        let mut t = Table::new(&["k", "lambda", "sqrt_normalized"]);
        for (k, (l, r)) in s.eigenvalues.iter().zip(s.sqrt_normalized()).enumerate() {
            t.row(vec![(k + 1).into(), (*l).into(), r.into()]);
        }
        if cfg.outputs.csv {
            written.push(t.write(&ctx.path(&format!("eig_{}.csv", case_name(p, n, phi))))?);
        }
        progress(cfg, p, n, phi);
    }
    Ok(written)
}

pub const GAP_HEADER: [&str; 9] = [
    "p", "n", "phi", "delta", "m_of_n", "delta_out", "gamma", "out_formula", "out_observed",
];

pub fn gap_table(reports: &[GapReport]) -> Table {
    let mut t = Table::new(&GAP_HEADER);
    for g in reports {
        t.row(vec![
            g.p.into(),
            g.n.into(),
            g.phi_label.as_str().into(),
            g.delta.into(),
            g.m_of_n.into(),
            g.delta_out.into(),
            g.gamma.into(),
            g.out_count_formula.into(),
            g.out_count_observed.into(),
        ]);
    }
    t
}

pub fn cmd_gap_sweep(ctx: &Context, cfg: &ExperimentConfig) -> Result<(Vec<PathBuf>, Vec<GapReport>)> {
    let mut written = Vec::new();
    let mut symbols = Symbols::default();
    let mut reports = Vec::new();
    for (p, phi, n) in cases(cfg) {
        let s = solve_case(ctx, cfg, phi, p, n, &mut written)?;
        let g = compute_gap(&s, symbols.get(phi, p)?, cfg.outlier_tol)?;
        progress(cfg, p, n, phi);
        reports.push(g);
    }
    if cfg.outputs.csv {
        written.push(gap_table(&reports).write(&ctx.path("gap_sweep.csv"))?);
    }
    if cfg.outputs.svg {
        for &p in &cfg.p_list {
            for phi in &cfg.phis {
                let rows: Vec<&GapReport> =
                    reports.iter().filter(|g| g.p == p && g.phi_label == phi.label()).collect();
                let name = format!("p{p}_{}", slug(phi.label()));
                let gap = ctx
                    .plot(&format!("gap vs n, p={p}, {}", phi.label()), "n", "delta")
                    .with(Series::new("delta", rows.iter().map(|g| (g.n as f64, g.delta)).collect(), Style::Line))
                    .with(Series::new(
                        "pi",
                        rows.iter().map(|g| (g.n as f64, std::f64::consts::PI)).collect(),
                        Style::Line,
                    ));
                ctx.write_svg(&format!("gap_{name}.svg"), &gap, &mut written)?;
                let m = ctx
                    .plot(&format!("m(n), p={p}, {}", phi.label()), "n", "m(n)")
                    .with(Series::new("m(n)", rows.iter().map(|g| (g.n as f64, g.m_of_n as f64)).collect(), Style::Points));
                ctx.write_svg(&format!("m_{name}.svg"), &m, &mut written)?;
            }
        }
    }
    Ok((written, reports))
}

pub const WEYL_HEADER: [&str; 8] = [
    "p",
    "n",
    "phi",
    "sup_G_error",
    "sampling_sup_error",
    "weighted_sup_error",
    "avg_gap_lhs",
    "avg_gap_rhs",
];

pub fn cmd_weyl(ctx: &Context, cfg: &ExperimentConfig, grid_size: usize) -> Result<(Vec<PathBuf>, Vec<WeylReport>)> {
    let mut written = Vec::new();
    let mut symbols = Symbols::default();
    let mut reports = Vec::new();
    let mut t = Table::new(&WEYL_HEADER);
    for (p, phi, n) in cases(cfg) {
        let s = solve_case(ctx, cfg, phi, p, n, &mut written)?;
        let w = weyl_statistic(&s, symbols.get(phi, p)?, grid_size)?;
        t.row(vec![
            p.into(),
            n.into(),
            phi.label().into(),
            w.sup_g_error.into(),
            w.sampling_sup_error.into(),
            w.weighted_sup_error.into(),
            w.avg_gap_lhs.into(),
            w.avg_gap_rhs.into(),
        ]);
        progress(cfg, p, n, phi);
        reports.push(w);
    }
    if cfg.outputs.csv {
        written.push(t.write(&ctx.path("weyl.csv"))?);
    }
    Ok((written, reports))
}

/// Bin counts of `√(λ_k/n²)` with the counts predicted by `Ψ`, plus the per-`k` gaps
/// `√λ_{k+1} - √λ_k`.
pub fn cmd_pack(
    ctx: &Context,
    cfg: &ExperimentConfig,
    y0: f64,
    yr: Option<f64>,
    bins: usize,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut symbols = Symbols::default();
    for (p, phi, n) in cases(cfg) {
        let s = solve_case(ctx, cfg, phi, p, n, &mut written)?;
        let rs = symbols.get(phi, p)?;
        let top = yr.unwrap_or_else(|| rs.range_max());
        let rep = pack_counts(&s, y0, top, bins)?;
        let scale = (s.len() + 1) as f64 / std::f64::consts::PI;
        let mut t = Table::new(&["bin_lo", "bin_hi", "count", "expected"]);
        for (w, c) in rep.bin_edges.windows(2).zip(&rep.counts) {
            let expected = scale * (rs.psi(w[1].min(rs.range_max()))? - rs.psi(w[0].min(rs.range_max()))?);
            t.row(vec![w[0].into(), w[1].into(), (*c).into(), expected.into()]);
        }
        let roots: Vec<f64> = s.eigenvalues.iter().map(|l| l.sqrt()).collect();
        let mut g = Table::new(&["k", "gap"]);
        let gaps: Vec<(f64, f64)> = roots.windows(2).enumerate().map(|(k, w)| ((k + 1) as f64, w[1] - w[0])).collect();
        for &(k, d) in &gaps {
            g.row(vec![(k as usize).into(), d.into()]);
        }
        let case = case_name(p, n, phi);
        if cfg.outputs.csv {
            written.push(t.write(&ctx.path(&format!("pack_{case}.csv")))?);
            written.push(g.write(&ctx.path(&format!("gaps_{case}.csv")))?);
        }
        if cfg.outputs.svg {
            let centers: Vec<(f64, f64)> = rep
                .bin_edges
                .windows(2)
                .zip(&rep.counts)
                .map(|(w, &c)| (0.5 * (w[0] + w[1]), c as f64))
                .collect();
            let bars = ctx
                .plot(&format!("eigenvalue counts per bin, {case}"), "sqrt(lambda)/n", "count")
                .with(Series::new("count", centers, Style::Bars));
            ctx.write_svg(&format!("pack_{case}.svg"), &bars, &mut written)?;
            let line = ctx
                .plot(&format!("consecutive gaps, {case}"), "k", "sqrt(lambda_k+1) - sqrt(lambda_k)")
                .with(Series::new("gap", gaps, Style::Line));
            ctx.write_svg(&format!("gaps_{case}.svg"), &line, &mut written)?;
        }
        progress(cfg, p, n, phi);
    }
    Ok(written)
}

pub fn cmd_compare(
    ctx: &Context,
    phi_a: &Reparametrization,
    phi_b: &Reparametrization,
    p: usize,
    ns: &[usize],
    interval: (f64, f64),
    quad: &QuadratureConfig,
) -> Result<(Vec<PathBuf>, Vec<OrderReport>)> {
    let mut written = Vec::new();
    let mut summary = Table::new(&[
        "p",
        "n",
        "phi_a",
        "phi_b",
        "interval_lo",
        "interval_hi",
        "psi_margin",
        "pairs",
        "ordering_holds",
    ]);
    let mut pairs = Table::new(&["n", "k", "diff"]);
    let mut reports = Vec::new();
    for &n in ns {
        let r = compare_orderings(phi_a, phi_b, p, n, interval, quad)?;
        summary.row(vec![
            p.into(),
            n.into(),
            phi_a.label().into(),
            phi_b.label().into(),
            interval.0.into(),
            interval.1.into(),
            r.psi_margin.into(),
            r.pairs.len().into(),
            r.ordering_holds.into(),
        ]);
        for &(k, d) in &r.pairs {
            pairs.row(vec![n.into(), k.into(), d.into()]);
        }
        eprintln!("[compare] p={p} n={n} done");
        reports.push(r);
    }
    let first = reports.iter().find(|r| r.ordering_holds).map(|r| r.n);
    let mut first_t = Table::new(&["p", "phi_a", "phi_b", "first_ordered_n"]);
    first_t.row(vec![p.into(), phi_a.label().into(), phi_b.label().into(), first.into()]);
    written.push(summary.write(&ctx.path("compare.csv"))?);
    written.push(pairs.write(&ctx.path("compare_pairs.csv"))?);
    written.push(first_t.write(&ctx.path("compare_first_n.csv"))?);
    Ok((written, reports))
}

/// Validation text for every map, and whether all of them passed.
pub fn cmd_validate(phis: &[Reparametrization]) -> (String, bool) {
    let mut text = String::new();
    let mut ok = true;
    for phi in phis {
        let r = validate(phi);
        ok &= r.all_passed();
        text.push_str(&r.to_string());
        if !text.ends_with('\n') {
            text.push('\n');
        }
    }
    (text, ok)
}
