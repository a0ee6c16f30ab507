//! The JSON run configuration and its translation into core types.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ustat_boot_core::experiments::{CellConfig, ReferenceCenter};
use ustat_boot_core::kernels::Kernel;
use ustat_boot_core::lrv::normal_cdf;
use ustat_boot_core::procgen::ProcessSpec;
use ustat_boot_core::resample::{CenterPolicy, SchemeKind};

/// One `(n, l)` table row request. A missing `l` defaults to the integer
/// approximation of n^(1/3).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CellSpec {
    pub n: usize,
    #[serde(default)]
    pub l: Option<usize>,
}

impl CellSpec {
    pub fn block_length(&self) -> usize {
        self.l
            .unwrap_or_else(|| ((self.n as f64).cbrt().round() as usize).max(1))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessConfig {
    /// `"ar1"` or `"iid_normal"`.
    pub kind: String,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelConfig {
    /// `"variance"` or `"indicator"`.
    pub name: String,
    /// Indicator threshold.
    #[serde(default)]
    pub t: Option<f64>,
}

/// A whole table run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub cells: Vec<CellSpec>,
    pub reps: usize,
    pub boot_reps: usize,
    pub ref_reps: usize,
    pub scheme: String,
    pub process: ProcessConfig,
    pub kernel: KernelConfig,
    pub seed: u64,
    /// `"mean"` (default) recenters the reference at its draw mean,
    /// matching the published distances; `"theta"` keeps the raw
    /// `sqrt(n) (U_n - theta)` draws, which carry the finite-n bias of
    /// `U_n` under dependence.
    #[serde(default = "default_reference_center")]
    pub reference_center: String,
}

fn default_reference_center() -> String {
    "mean".into()
}

impl RunConfig {
    /// The default study: AR(1) with phi = 1/2, variance kernel, block
    /// lengths near n^(1/3), 1000 realizations against 10^4-replicate
    /// distributions.
    pub fn default_table() -> Self {
        RunConfig {
            cells: [(24, 3), (48, 4), (100, 5), (200, 6), (500, 8)]
                .into_iter()
                .map(|(n, l)| CellSpec { n, l: Some(l) })
                .collect(),
            reps: 1000,
            boot_reps: 10_000,
            ref_reps: 10_000,
            scheme: "circular".into(),
            process: ProcessConfig {
                kind: "ar1".into(),
                phi: Some(0.5),
                sd: Some(1.0),
            },
            kernel: KernelConfig {
                name: "variance".into(),
                t: None,
            },
            seed: 42,
            reference_center: default_reference_center(),
        }
    }

    /// Parses a config, keeping serde's line/column diagnostics in the
    /// error chain.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed run configuration")
    }

    pub fn scheme_kind(&self) -> Result<SchemeKind> {
        parse_scheme(&self.scheme)
    }

    pub fn reference_center_kind(&self) -> Result<ReferenceCenter> {
        Ok(match self.reference_center.as_str() {
            "mean" => ReferenceCenter::MonteCarloMean,
            "theta" => ReferenceCenter::TrueTheta,
            other => bail!("unknown reference center {other:?} (mean|theta)"),
        })
    }

    /// Expands into per-cell core configurations.
    pub fn cell_configs(&self) -> Result<Vec<CellConfig>> {
        let scheme = self.scheme_kind()?;
        let reference_center = self.reference_center_kind()?;
        let process = build_process(&self.process)?;
        let kernel = build_kernel(&self.kernel)?;
        let theta_true = theta_for(&self.process, &self.kernel)?;
        Ok(self
            .cells
            .iter()
            .map(|cell| CellConfig {
                n: cell.n,
                block_length: cell.block_length(),
                reps: self.reps,
                boot_reps: self.boot_reps,
                ref_reps: self.ref_reps,
                scheme,
                center: CenterPolicy::Exact,
                reference_center,
                process: process.clone(),
                kernel: kernel.clone(),
                theta_true,
            })
            .collect())
    }
}

pub fn parse_scheme(name: &str) -> Result<SchemeKind> {
    Ok(match name {
        "circular" => SchemeKind::Circular,
        "moving" => SchemeKind::Moving,
        "nonoverlapping" => SchemeKind::NonOverlapping,
        other => bail!("unknown scheme {other:?} (circular|moving|nonoverlapping)"),
    })
}

pub fn build_process(cfg: &ProcessConfig) -> Result<ProcessSpec> {
    let sd = cfg.sd.unwrap_or(1.0);
    let spec = match cfg.kind.as_str() {
        "ar1" => ProcessSpec::Ar1 {
            phi: cfg.phi.unwrap_or(0.5),
            innovation_sd: sd,
        },
        "iid_normal" => ProcessSpec::IidNormal { sd },
        other => bail!("unknown process {other:?} (ar1|iid_normal)"),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn build_kernel(cfg: &KernelConfig) -> Result<Kernel> {
    Ok(match cfg.name.as_str() {
        "variance" => Kernel::variance(),
        "indicator" => {
            let t = cfg.t.context("indicator kernel needs a threshold t")?;
            Kernel::indicator(t)?
        }
        other => bail!("unknown kernel {other:?} (variance|indicator)"),
    })
}

/// Closed-form `theta = E h(X, Y)` for independent copies of the process
/// marginal. Both supported processes have Gaussian marginals, so the
/// indicator value is `P(|X - Y| < t)` with `X - Y ~ N(0, 2 s2)`.
pub fn theta_for(process: &ProcessConfig, kernel: &KernelConfig) -> Result<f64> {
    let sd = process.sd.unwrap_or(1.0);
    let marginal_var = match process.kind.as_str() {
        "ar1" => {
            let phi = process.phi.unwrap_or(0.5);
            sd * sd / (1.0 - phi * phi)
        }
        "iid_normal" => sd * sd,
        other => bail!("unknown process {other:?}"),
    };
    Ok(match kernel.name.as_str() {
        "variance" => marginal_var,
        "indicator" => {
            let t = kernel.t.context("indicator kernel needs a threshold t")?;
            2.0 * normal_cdf(t / (2.0 * marginal_var).sqrt()) - 1.0
        }
        other => bail!("unknown kernel {other:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_matches_the_study_layout() {
        let cfg = RunConfig::default_table();
        assert_eq!(cfg.cells.len(), 5);
        assert_eq!((cfg.cells[0].n, cfg.cells[0].block_length()), (24, 3));
        assert_eq!((cfg.cells[4].n, cfg.cells[4].block_length()), (500, 8));
        let cells = cfg.cell_configs().unwrap();
        assert!((cells[0].theta_true - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn omitted_block_length_defaults_to_cube_root() {
        for (n, expect) in [(27usize, 3usize), (24, 3), (100, 5), (200, 6), (500, 8)] {
            let cell = CellSpec { n, l: None };
            assert_eq!(cell.block_length(), expect, "n = {n}");
        }
        let text = r#"{
            "cells": [{"n": 27}],
            "reps": 2, "boot_reps": 8, "ref_reps": 8,
            "scheme": "circular",
            "process": {"kind": "ar1", "phi": 0.5, "sd": 1.0},
            "kernel": {"name": "variance"},
            "seed": 1
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.cell_configs().unwrap()[0].block_length, 3);
    }

    #[test]
    fn parse_round_trip() {
        let cfg = RunConfig::default_table();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back.cells.len(), 5);
        assert_eq!(back.seed, 42);
    }

    #[test]
    fn malformed_config_reports_position() {
        let err = RunConfig::from_json("{\n  \"cells\": [,]\n}").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("line 2"), "missing diagnostics: {msg}");
    }

    #[test]
    fn indicator_theta_uses_the_gaussian_difference_law() {
        // iid N(0,1): X - Y ~ N(0,2); t = 1 gives 2 Phi(1/sqrt(2)) - 1.
        let process = ProcessConfig {
            kind: "iid_normal".into(),
            phi: None,
            sd: Some(1.0),
        };
        let kernel = KernelConfig {
            name: "indicator".into(),
            t: Some(1.0),
        };
        let theta = theta_for(&process, &kernel).unwrap();
        let expect = 2.0 * normal_cdf(1.0 / 2.0f64.sqrt()) - 1.0;
        assert!((theta - expect).abs() < 1e-15);
        assert!(theta > 0.5 && theta < 0.55);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(parse_scheme("stationary").is_err());
        assert!(build_process(&ProcessConfig {
            kind: "garch".into(),
            phi: None,
            sd: None
        })
        .is_err());
        assert!(build_kernel(&KernelConfig {
            name: "cramer".into(),
            t: None
        })
        .is_err());
    }
}
