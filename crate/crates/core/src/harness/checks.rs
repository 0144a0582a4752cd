//! Threshold checks applied to a finished table by `--check`.

use crate::harness::config::{Experiment, ExperimentConfig};
use crate::harness::csv::Table;
use crate::harness::experiments::{gray_pam4_overlaps, sumcomp_pam4_overlaps};
use crate::nomographic::PresetName;

/// Standard errors allowed between an empirical mean and its reference.
pub const STDERR_TOLERANCE: f64 = 3.0;
/// Analytic MSE below this is not compared.
pub const MSE_FLOOR: f64 = 1e-3;
/// SNR from which SumComp must beat both baselines in NMSE.
pub const NMSE_DOMINANCE_FROM_DB: f64 = -5.0;
pub const MEAN_GAP_DB: f64 = 10.0;
pub const GEOMETRIC_GAP_AT_DB: f64 = 19.0;
pub const GEOMETRIC_GAP_DB: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, failures: Vec<String>, checked: usize) -> Self {
        let detail = if failures.is_empty() {
            format!("{checked} points checked")
        } else {
            failures.join("; ")
        };
        CheckOutcome {
            name: name.to_string(),
            passed: failures.is_empty(),
            detail,
        }
    }
}

fn col(table: &Table, name: &str) -> Vec<f64> {
    table
        .values(name)
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect()
}

fn db_gap(worse: f64, better: f64) -> f64 {
    10.0 * (worse / better).log10()
}

/// `empirical <= reference + tol * stderr` (or `|empirical - reference|`
/// within tolerance when `two_sided`) on every row where `keep` holds.
fn within_stderr(
    name: &str,
    table: &Table,
    empirical: &str,
    reference: &str,
    two_sided: bool,
    keep: impl Fn(f64) -> bool,
) -> CheckOutcome {
    let (snr, emp, refv, se) = (col(table, "snr_db"), col(table, empirical), col(table, reference), col(table, "stderr"));
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..snr.len() {
        if !keep(refv[i]) {
            continue;
        }
        checked += 1;
        let excess = if two_sided { (emp[i] - refv[i]).abs() } else { emp[i] - refv[i] };
        if !(excess <= STDERR_TOLERANCE * se[i]) {
            failures.push(format!("{} dB: {} vs {} (stderr {})", snr[i], emp[i], refv[i], se[i]));
        }
    }
    CheckOutcome::new(name, failures, checked)
}

/// Checks that apply to `table` as produced from `cfg`. Experiments or
/// functions without a threshold yield no outcomes.
pub fn check_table(cfg: &ExperimentConfig, table: &Table) -> Vec<CheckOutcome> {
    match cfg.experiment {
        Experiment::MseSweep => vec![within_stderr(
            "mse matches analytic",
            table,
            "mse_empirical",
            "mse_analytic",
            true,
            |a| a > MSE_FLOOR,
        )],
        Experiment::MaeSweep => vec![within_stderr(
            "mae below bound",
            table,
            "mae_empirical",
            "mae_bound",
            false,
            |_| true,
        )],
        Experiment::NmseCompare => nmse_checks(cfg, table),
        Experiment::OverlapDemo => {
            let gray = gray_pam4_overlaps().collisions().len();
            let sumcomp = sumcomp_pam4_overlaps().collisions().len();
            let mut failures = Vec::new();
            if gray != 3 {
                failures.push(format!("gray collisions {gray}, expected 3"));
            }
            if sumcomp != 0 {
                failures.push(format!("sumcomp collisions {sumcomp}, expected 0"));
            }
            vec![CheckOutcome::new("overlap counts", failures, 2)]
        }
        Experiment::AnalyticTable => {
            let (sigma, mse, mae) = (col(table, "sigma"), col(table, "mse_analytic"), col(table, "mae_bound"));
            let failures = (0..sigma.len())
                .filter(|&i| sigma[i] == 0.0 && (mse[i] != 0.0 || mae[i] != 0.0))
                .map(|i| format!("row {i}: noiseless errors {} / {}", mse[i], mae[i]))
                .collect();
            vec![CheckOutcome::new("noiseless rows are zero", failures, sigma.len())]
        }
    }
}

fn nmse_checks(cfg: &ExperimentConfig, table: &Table) -> Vec<CheckOutcome> {
    let snr = col(table, "snr_db");
    let (sc, air, ofdma) = (col(table, "nmse_sumcomp"), col(table, "nmse_aircomp"), col(table, "nmse_ofdma"));
    let mut out = Vec::new();

    if cfg.function == PresetName::ArithmeticMean {
        let mut failures = Vec::new();
        let mut checked = 0;
        for i in 0..snr.len() {
            if snr[i] < NMSE_DOMINANCE_FROM_DB {
                continue;
            }
            checked += 1;
            if !(sc[i] <= air[i] && sc[i] <= ofdma[i]) {
                failures.push(format!("{} dB: sumcomp {} aircomp {} ofdma {}", snr[i], sc[i], air[i], ofdma[i]));
            }
        }
        out.push(CheckOutcome::new("sumcomp dominates baselines", failures, checked));
    }

    let gap_at = |name: &str, at: f64, need: f64| {
        let row = snr.iter().position(|&s| s == at);
        let failures = match row {
            None => vec![format!("grid has no {at} dB point")],
            Some(i) => {
                let gap = db_gap(air[i], sc[i]);
                if gap >= need {
                    vec![]
                } else {
                    vec![format!("gap {gap:.2} dB at {at} dB, need {need} dB")]
                }
            }
        };
        CheckOutcome::new(name, failures, 1)
    };
    match cfg.function {
        PresetName::ArithmeticMean => {
            out.push(gap_at("aircomp gap", NMSE_DOMINANCE_FROM_DB, MEAN_GAP_DB));
        }
        PresetName::GeometricMean => {
            out.push(gap_at("aircomp gap", GEOMETRIC_GAP_AT_DB, GEOMETRIC_GAP_DB));
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::csv::Cell;

    fn mse_table(rows: &[(f64, f64, f64, f64)]) -> Table {
        let mut t = Table::new(&["snr_db", "sigma", "mse_empirical", "mse_analytic", "stderr", "trials"]);
        for &(snr, emp, an, se) in rows {
            t.push(vec![snr.into(), 1.0.into(), emp.into(), an.into(), se.into(), Cell::Int(10)]);
        }
        t
    }

    #[test]
    fn mse_tolerance() {
        let cfg = ExperimentConfig::defaults(Experiment::MseSweep);
        let ok = mse_table(&[(0.0, 1.0, 1.2, 0.1), (10.0, 5e-4, 0.0, 0.0)]);
        assert!(check_table(&cfg, &ok)[0].passed);
        let bad = mse_table(&[(0.0, 1.0, 1.4, 0.1)]);
        let outcome = &check_table(&cfg, &bad)[0];
        assert!(!outcome.passed);
        assert!(outcome.detail.contains("0 dB"));
    }

    #[test]
    fn overlap_check_passes() {
        let cfg = ExperimentConfig::defaults(Experiment::OverlapDemo);
        let t = crate::harness::experiments::run_overlap_demo();
        assert!(check_table(&cfg, &t).iter().all(|c| c.passed));
    }

    #[test]
    fn missing_gap_point_fails() {
        let cfg = ExperimentConfig::defaults(Experiment::NmseCompare);
        let mut t = Table::new(&["snr_db", "nmse_sumcomp", "nmse_aircomp", "nmse_ofdma"]);
        t.push(vec![0.0.into(), 0.01.into(), 1.0.into(), 1.0.into()]);
        let out = check_table(&cfg, &t);
        assert!(out[0].passed);
        assert!(!out[1].passed);
    }
}
