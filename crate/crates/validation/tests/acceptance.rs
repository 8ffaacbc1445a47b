//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::*;
use iga_gap_core::assembly::QuadratureConfig;
use iga_gap_core::eigensolve::{solve_reparametrized, Spectrum};
use iga_gap_core::reparam::{make_big_phi, make_identity, make_phi1, make_phi2, make_phi3, Reparametrization};
use iga_gap_core::spectral_analysis::{
    compute_gap, outlier_count_formula, outlier_count_observed, weyl_statistic, GapReport,
};
use iga_gap_core::symbol::{g_p, gamma_slope, psi_prime_p1, psi_sqrt_p1_closed, rearrange, EpSymbol, RearrangedSymbol};

struct Suite {
    quad: QuadratureConfig,
    spectra: HashMap<(usize, usize, String), Spectrum>,
    symbols: HashMap<(usize, String), RearrangedSymbol>,
    failures: usize,
}

impl Suite {
    fn spectrum(&mut self, phi: &Reparametrization, p: usize, n: usize) -> Spectrum {
        let key = (p, n, phi.label().to_string());
        if !self.spectra.contains_key(&key) {
            let s = solve_reparametrized(phi, p, n, &self.quad, false).expect("eigensolve");
            self.spectra.insert(key.clone(), s);
        }
        self.spectra[&key].clone()
    }

    fn rearranged(&mut self, phi: &Reparametrization, p: usize) -> RearrangedSymbol {
        self.symbols
            .entry((p, phi.label().to_string()))
            .or_insert_with(|| rearrange(phi, &EpSymbol::new(p).unwrap()).expect("rearrange"))
            .clone()
    }

    fn gap(&mut self, phi: &Reparametrization, p: usize, n: usize, tol: f64) -> GapReport {
        let s = self.spectrum(phi, p, n);
        let rs = self.rearranged(phi, p);
        compute_gap(&s, &rs, tol).expect("gap")
    }

    fn report(&mut self, id: usize, name: &str, elapsed: Duration, result: Result<String, String>) {
        let secs = elapsed.as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:>2} {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL {id:>2} {name} ({secs:.2}s): {detail}");
            }
        }
    }

    fn run(&mut self, id: usize, name: &str, f: impl FnOnce(&mut Suite) -> Result<String, String>) {
        let start = Instant::now();
        let result = f(self);
        self.report(id, name, start.elapsed(), result);
    }
}

fn sweep_maps() -> Vec<Reparametrization> {
    vec![make_phi1(), make_phi2(), make_phi3(0.01).unwrap()]
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn closed_form(_: &mut Suite) -> Result<String, String> {
    let start = Instant::now();
    let phi = make_identity();
    let mut worst = 0.0_f64;
    for n in [8, 16, 32, 64] {
        let s = solve_reparametrized(&phi, 1, n, &QuadratureConfig::default(), false).map_err(|e| e.to_string())?;
        for (a, b) in s.eigenvalues.iter().zip(linear_identity_eigenvalues(n)) {
            worst = worst.max((a - b).abs() / b);
        }
    }
    let t = start.elapsed().as_secs_f64();
    let detail = format!("max relative error {worst:.2e} (tol 1e-9), runtime {t:.3}s (limit 1s)");
    if worst <= 1e-9 && t < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const SWEEP_N: [usize; 11] = [50, 99, 200, 300, 400, 500, 600, 700, 800, 900, 1600];

fn min_gap_index_sweep(s: &mut Suite) -> Result<String, String> {
    let mut bad = Vec::new();
    for phi in sweep_maps() {
        for n in SWEEP_N {
            let g = s.gap(&phi, 1, n, iga_gap_core::spectral_analysis::DEFAULT_OUTLIER_TOL);
            let (d, m) = brute_force_gap(&s.spectrum(&phi, 1, n).eigenvalues);
            if g.m_of_n != 1 || m != 1 || d != g.delta {
                bad.push(format!("{} n={n}: m(n)={}", phi.label(), g.m_of_n));
            }
        }
    }
    if bad.is_empty() {
        Ok("m(n) = 1 in all 33 cells".into())
    } else {
        Err(bad.join("; "))
    }
}

fn gap_convergence(s: &mut Suite) -> Result<String, String> {
    let phi = make_phi1();
    let mut worst = 0.0_f64;
    let mut deltas = Vec::new();
    for n in SWEEP_N.iter().copied().filter(|&n| n >= 400) {
        let g = s.gap(&phi, 1, n, iga_gap_core::spectral_analysis::DEFAULT_OUTLIER_TOL);
        worst = worst.max((g.delta - PI).abs() / PI);
        deltas.push((n, g.delta));
    }
    let d400 = (deltas[0].1 - PI).abs();
    let d1600 = (deltas.last().unwrap().1 - PI).abs();
    let detail = format!(
        "max |δ-π|/π over n>=400 = {worst:.4} (tol 0.05); |δ-π| at n=400 {d400:.3e}, at n=1600 {d1600:.3e}"
    );
    if worst < 0.05 && d1600 < d400 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gamma(s: &mut Suite) -> Result<String, String> {
    let mut notes = Vec::new();
    let mut ok = true;
    for phi in sweep_maps() {
        let g = gamma_slope(&s.rearranged(&phi, 1));
        if (g - PI).abs() > 1e-6 {
            ok = false;
            notes.push(format!("p=1 {}: γ={g}", phi.label()));
        }
    }
    let mut worst_p1 = 0.0_f64;
    for phi in sweep_maps() {
        worst_p1 = worst_p1.max((gamma_slope(&s.rearranged(&phi, 1)) - PI).abs());
    }
    notes.push(format!("p=1 max |γ-π| = {worst_p1:.2e}"));
    for p in 2..=6 {
        let lo = PI * (2.0 / PI).powf((p as f64 - 1.0) / 2.0);
        let hi = PI * (PI / 2.0).powf((p as f64 + 1.0) / 2.0);
        for phi in sweep_maps() {
            let g = gamma_slope(&s.rearranged(&phi, p));
            if !(lo..=hi).contains(&g) {
                ok = false;
                notes.push(format!("p={p} {}: γ={g} outside [{lo:.4}, {hi:.4}]", phi.label()));
            }
        }
    }
    notes.push("p=2..6 inside bounds for all maps".into());
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn symbol_identities(_: &mut Suite) -> Result<String, String> {
    let grid: Vec<f64> = (0..2001).map(|i| PI * i as f64 / 2000.0).collect();
    let mut failed = Vec::new();
    let mut notes = Vec::new();
    let mut sup_errors = Vec::new();
    for p in 1..=8 {
        let sym = EpSymbol::new(p).unwrap();
        if sym.e(0.0) != 0.0 {
            failed.push(format!("e_{p}(0) = {}", sym.e(0.0)));
        }
        if grid.windows(2).any(|w| sym.e(w[1]) < sym.e(w[0])) {
            failed.push(format!("e_{p} decreases on the grid"));
        }
        let lo = (4.0 / (PI * PI)).powi(p as i32 + 1);
        if grid.iter().any(|&t| !(lo..=1.0).contains(&g_p(p, t))) {
            failed.push(format!("g_{p} leaves [(4/π²)^{}, 1]", p + 1));
        }
        sup_errors.push(grid.iter().map(|&t| (sym.e(t) - t * t).abs()).fold(0.0, f64::max));
    }
    if !strictly_decreasing(&sup_errors) {
        failed.push(format!("sup|e_p-θ²| not strictly decreasing: {}", fmt_list(&sup_errors)));
    }
    let mut worst_pm2 = 0.0_f64;
    let mut worst_pm1 = 0.0_f64;
    for p in 2..=5 {
        let sym = EpSymbol::new(p).unwrap();
        for &t in &grid[1..] {
            let e = sym.e(t);
            let two = 2.0 - 2.0 * t.cos();
            let pm2 = two * g_p(p - 2, t) / g_p(p, t);
            let pm1 = two * g_p(p - 1, t) / g_p(p, t);
            worst_pm2 = worst_pm2.max((e - pm2).abs());
            worst_pm1 = worst_pm1.max((e - pm1).abs());
        }
    }
    if worst_pm2 > 1e-12 {
        failed.push(format!(
            "e_p = (2-2cosθ)g_(p-2)/g_p fails: max deviation {worst_pm2:.4} (tol 1e-12)"
        ));
    }
    notes.push(format!("e_p = (2-2cosθ)g_(p-1)/g_p holds to {worst_pm1:.1e}"));
    notes.push(format!("sup|e_p-θ²| p=1..8: {}", fmt_list(&sup_errors)));
    if failed.is_empty() {
        Ok(notes.join("; "))
    } else {
        failed.extend(notes);
        Err(failed.join("; "))
    }
}

fn psi_cross_oracle(s: &mut Suite) -> Result<String, String> {
    let mut worst = 0.0_f64;
    let mut worst_slope = 0.0_f64;
    for phi in sweep_maps() {
        let rs = s.rearranged(&phi, 1);
        for i in 1..=50 {
            let y = rs.range_max() * i as f64 / 51.0;
            let a = rs.psi(y).map_err(|e| e.to_string())?;
            let b = psi_sqrt_p1_closed(&phi, y).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs());
        }
        let d = psi_prime_p1(&phi, 0.0).map_err(|e| e.to_string())?;
        worst_slope = worst_slope.max((d - 1.0).abs());
    }
    let detail = format!("max |Ψ-Ψ_closed| = {worst:.2e} (tol 1e-8); max |Ψ′(0+)-1| = {worst_slope:.2e} (tol 1e-6)");
    if worst <= 1e-8 && worst_slope <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn outliers(s: &mut Suite) -> Result<String, String> {
    let mut bad = Vec::new();
    let maps = [make_phi1(), make_phi3(0.01).unwrap()];
    for p in 1..=5 {
        for n in [64, 128] {
            for phi in &maps {
                let spec = s.spectrum(phi, p, n);
                let rs = s.rearranged(phi, p);
                let observed = outlier_count_observed(&spec, &rs, 1e-6);
                let formula = outlier_count_formula(p);
                if observed != formula {
                    bad.push(format!("p={p} n={n} {}: observed {observed}, formula {formula}", phi.label()));
                }
            }
        }
    }
    if bad.is_empty() {
        Ok("observed count equals 2⌊(p-1)/2⌋ in all 20 cases".into())
    } else {
        Err(bad.join("; "))
    }
}

fn weyl(s: &mut Suite) -> Result<String, String> {
    let phi = make_phi1();
    let mut failed = Vec::new();
    let mut notes = Vec::new();
    for p in [1, 2] {
        let rs = s.rearranged(&phi, p);
        let reports: Vec<_> = [100, 200, 400]
            .iter()
            .map(|&n| weyl_statistic(&s.spectrum(&phi, p, n), &rs, 2001))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let series = [
            ("sup_G_error", reports.iter().map(|r| r.sup_g_error).collect::<Vec<_>>()),
            ("sampling_sup_error", reports.iter().map(|r| r.sampling_sup_error).collect()),
            ("weighted_sup_error", reports.iter().map(|r| r.weighted_sup_error).collect()),
        ];
        for (name, v) in &series {
            if !strictly_decreasing(v) {
                failed.push(format!("p={p} {name} {}", fmt_list(v)));
            }
        }
        let (d100, d400) = (reports[0].avg_gap_difference(), reports[2].avg_gap_difference());
        if d400 >= d100 {
            failed.push(format!("p={p} avg-gap difference {d100:.4} -> {d400:.4}"));
        }
        notes.push(format!(
            "p={p}: sup_G {}, avg-gap diff {d100:.4} -> {d400:.4}",
            fmt_list(&series[0].1)
        ));
    }
    if failed.is_empty() {
        Ok(notes.join("; "))
    } else {
        failed.extend(notes);
        Err(failed.join("; "))
    }
}

fn big_phi_gap(s: &mut Suite) -> Result<String, String> {
    let mut failed = Vec::new();
    let mut notes = Vec::new();
    for p in 3..=5 {
        let phi = make_big_phi(p, 0.01).unwrap();
        let mut deltas = Vec::new();
        for n in [200, 400, 800] {
            let g = s.gap(&phi, p, n, iga_gap_core::spectral_analysis::DEFAULT_OUTLIER_TOL);
            if g.m_of_n != 1 {
                failed.push(format!("p={p} n={n}: m(n)={}", g.m_of_n));
            }
            deltas.push(g.delta);
        }
        if !strictly_increasing(&deltas) {
            failed.push(format!("p={p}: δ not increasing {}", fmt_list(&deltas)));
        }
        notes.push(format!("p={p} δ {}", fmt_list(&deltas)));
    }
    if failed.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failed.join("; "))
    }
}

fn negative_control(s: &mut Suite) -> Result<String, String> {
    let phi = make_phi1();
    let deltas: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| s.gap(&phi, 3, n, iga_gap_core::spectral_analysis::DEFAULT_OUTLIER_TOL).delta)
        .collect();
    let detail = format!("δ over n=200,400,800: {}", fmt_list(&deltas));
    if strictly_decreasing(&deltas) {
        Ok(detail)
    } else {
        Err(format!("δ not decreasing: {detail}"))
    }
}

fn property_suites(_: &mut Suite) -> Result<String, String> {
    let start = Instant::now();
    let checks: [(&str, fn() -> Check); 6] = [
        ("partition of unity", check_partition_of_unity),
        ("band structure", check_band_structure),
        ("SPD", check_spd),
        ("quadrature doubling", check_quadrature_doubling),
        ("rearrangement round-trip", check_rearrangement_round_trip),
        ("brute-force gap oracle", check_gap_oracle),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        if let Err(e) = check() {
            failed.push(format!("{name}: {e}"));
        }
    }
    let t = start.elapsed().as_secs_f64();
    if t >= 30.0 {
        failed.push(format!("runtime {t:.1}s exceeds 30s"));
    }
    if failed.is_empty() {
        Ok(format!("6 suites passed in {t:.2}s (limit 30s)"))
    } else {
        Err(failed.join("; "))
    }
}

fn main() {
    let mut suite = Suite {
        quad: QuadratureConfig::default(),
        spectra: HashMap::new(),
        symbols: HashMap::new(),
        failures: 0,
    };
    suite.run(1, "closed-form oracle", closed_form);
    suite.run(2, "m(n) = 1 sweep for p=1", min_gap_index_sweep);
    suite.run(3, "gap convergence regression (phi1)", gap_convergence);
    suite.run(4, "gamma slope", gamma);
    suite.run(5, "symbol identities", symbol_identities);
    suite.run(6, "Psi cross-oracle", psi_cross_oracle);
    suite.run(7, "outlier count", outliers);
    suite.run(8, "uniform Weyl / sampling convergence", weyl);
    suite.run(9, "optimal gap for Phi_p", big_phi_gap);
    suite.run(10, "negative control p=3 phi1", negative_control);
    suite.run(11, "property suites on the small grid", property_suites);
    println!("{} of 11 criteria failed", suite.failures);
    if suite.failures > 0 {
        std::process::exit(1);
    }
}
