use std::path::Path;

use iga_gap_core::assembly::QuadratureConfig;
use iga_gap_core::reparam::{parse_phi, Reparametrization};
use iga_gap_core::spectral_analysis::DEFAULT_OUTLIER_TOL;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub name: Option<String>,
    pub p_list: Option<Vec<usize>>,
    pub n_list: Option<Vec<usize>>,
    pub phi_specs: Option<Vec<String>>,
    #[serde(default)]
    pub outputs: FileOutputs,
    #[serde(default)]
    pub tolerances: FileTolerances,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileOutputs {
    pub csv: Option<bool>,
    pub svg: Option<bool>,
    pub dump_matrices: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileTolerances {
    pub quadrature: Option<f64>,
    pub outlier: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub csv: bool,
    pub svg: bool,
    pub dump_matrices: bool,
}

/// A fully resolved experiment: file values overridden by command-line flags.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub p_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub phis: Vec<Reparametrization>,
    pub outputs: Outputs,
    pub quad: QuadratureConfig,
    pub outlier_tol: f64,
}

/// Values given on the command line; `None` or empty means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub p_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub phi_specs: Vec<String>,
    pub svg: bool,
    pub dump_matrices: bool,
    pub quad_tol: Option<f64>,
    pub outlier_tol: Option<f64>,
}

fn pick<T: Clone>(flag: &[T], file: &Option<Vec<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.clone().unwrap_or_default()
    } else {
        flag.to_vec()
    }
}

impl ExperimentConfig {
    pub fn resolve(name: &str, file: &FileConfig, flags: &Overrides) -> Result<Self> {
        let p_list = pick(&flags.p_list, &file.p_list);
        let n_list = pick(&flags.n_list, &file.n_list);
        let phi_specs = pick(&flags.phi_specs, &file.phi_specs);
        Self::build(
            file.name.clone().unwrap_or_else(|| name.to_string()),
            p_list,
            n_list,
            &phi_specs,
            Outputs {
                csv: file.outputs.csv.unwrap_or(true),
                svg: flags.svg || file.outputs.svg.unwrap_or(false),
                dump_matrices: flags.dump_matrices || file.outputs.dump_matrices.unwrap_or(false),
            },
            flags.quad_tol.or(file.tolerances.quadrature),
            flags.outlier_tol.or(file.tolerances.outlier),
        )
    }

    pub fn build(
        name: String,
        p_list: Vec<usize>,
        n_list: Vec<usize>,
        phi_specs: &[String],
        outputs: Outputs,
        quad_tol: Option<f64>,
        outlier_tol: Option<f64>,
    ) -> Result<Self> {
        if p_list.is_empty() {
            return Err(CliError::Usage("p_list is empty".into()));
        }
        if n_list.is_empty() {
            return Err(CliError::Usage("n_list is empty".into()));
        }
        if phi_specs.is_empty() {
            return Err(CliError::Usage("phi_specs is empty".into()));
        }
        for &p in &p_list {
            if p < 1 {
                return Err(CliError::Usage(format!("degree p must be >= 1, got {p}")));
            }
            if let Some(&n) = n_list.iter().find(|&&n| n < p + 1) {
                return Err(CliError::Usage(format!("n must be >= p + 1, got n={n} for p={p}")));
            }
        }
        let phis = phi_specs.iter().map(|s| parse_phi(s)).collect::<iga_gap_core::Result<Vec<_>>>()?;
        let mut quad = QuadratureConfig::default();
        if let Some(t) = quad_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("quadrature tolerance must be positive, got {t}")));
            }
            quad.rel_tol = t;
        }
        let outlier_tol = outlier_tol.unwrap_or(DEFAULT_OUTLIER_TOL);
        if !(outlier_tol >= 0.0 && outlier_tol.is_finite()) {
            return Err(CliError::Usage(format!("outlier tolerance must be >= 0, got {outlier_tol}")));
        }
        Ok(ExperimentConfig {
            name,
            p_list,
            n_list,
            phis,
            outputs,
            quad,
            outlier_tol,
        })
    }
}
