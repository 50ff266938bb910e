//! Statistical and exact verification of simulated paths.
//!
//! Reports collect named checks of the form `statistic <= threshold`.
//! Statistical checks use 4-sigma thresholds so that a full suite of a
//! few dozen probes fails spuriously with probability well under 1%.
//! The crossing test is exact, not statistical: paths are closed-form
//! within each grid interval, so the no-crossing-without-meeting property
//! reduces to sign checks at jump instants.

use crate::error::{MartfitError, Result};
use crate::extremal::{extremal_chain, ExtremalSurface};
use crate::marginal::{CallSurface, MarginalDistribution, CALL_TOL};
use crate::skorokhod::{path_left_limit, path_value, SurfaceSampler};

/// One named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Non-negative statistic compared against the threshold.
    pub stat: f64,
    pub thresh: f64,
    pub pass: bool,
    /// Sample size behind the statistic (0 for exact checks).
    pub n: usize,
    pub stderr: f64,
}

/// A collection of checks with line and CSV serializations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub checks: Vec<CheckResult>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, name: impl Into<String>, stat: f64, thresh: f64, n: usize, stderr: f64) {
        self.checks.push(CheckResult {
            name: name.into(),
            pass: stat <= thresh,
            stat,
            thresh,
            n,
            stderr,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn merge(&mut self, other: DiagnosticsReport) {
        self.checks.extend(other.checks);
    }

    /// One line per check: `check <name> stat <v> thresh <v> pass <0|1>`.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "check {} stat {:.16e} thresh {:.16e} pass {}\n",
                c.name,
                c.stat,
                c.thresh,
                u8::from(c.pass)
            ));
        }
        out
    }

    /// Inverse of [`DiagnosticsReport::to_lines`] (sample sizes and
    /// standard errors are not part of the line format).
    pub fn from_lines(text: &str) -> Result<Self> {
        let mut report = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || MartfitError::Parse {
                line: i + 1,
                msg: format!("malformed check line: {line}"),
            };
            if parts.len() != 8
                || parts[0] != "check"
                || parts[2] != "stat"
                || parts[4] != "thresh"
                || parts[6] != "pass"
            {
                return Err(bad());
            }
            let stat: f64 = parts[3].parse().map_err(|_| bad())?;
            let thresh: f64 = parts[5].parse().map_err(|_| bad())?;
            let pass = match parts[7] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            report.checks.push(CheckResult {
                name: parts[1].to_string(),
                stat,
                thresh,
                pass,
                n: 0,
                stderr: 0.0,
            });
        }
        Ok(report)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,stat,thresh,pass,n,stderr\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{},{:.16e}\n",
                c.name,
                c.stat,
                c.thresh,
                u8::from(c.pass),
                c.n,
                c.stderr
            ));
        }
        out
    }
}

/// Sample mean and standard error of `(X_i - x)_+`.
pub fn empirical_call(samples: &[f64], x: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(MartfitError::Domain("empty sample list".into()));
    }
    let n = samples.len() as f64;
    let payoffs: Vec<f64> = samples.iter().map(|&s| (s - x).max(0.0)).collect();
    let mean = payoffs.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return Ok((mean, 0.0));
    }
    let var = payoffs.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// z-tests of `E[(X_t - X_s) 1{X_s <= c}] = 0` at each cut level.
pub fn martingale_test(
    matrix: &[Vec<f64>],
    s_col: usize,
    t_col: usize,
    cuts: &[f64],
) -> Result<DiagnosticsReport> {
    let width = matrix.first().map_or(0, |r| r.len());
    if matrix.is_empty() || s_col >= width || t_col >= width {
        return Err(MartfitError::Domain(format!(
            "columns {s_col}, {t_col} not available in a {width}-column matrix"
        )));
    }
    let n = matrix.len() as f64;
    let mut report = DiagnosticsReport::default();
    for (i, &c) in cuts.iter().enumerate() {
        let terms: Vec<f64> = matrix
            .iter()
            .map(|r| {
                if r[s_col] <= c {
                    r[t_col] - r[s_col]
                } else {
                    0.0
                }
            })
            .collect();
        let mean = terms.iter().sum::<f64>() / n;
        let var = terms.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let stderr = (var / n).sqrt();
        let z = if stderr > 0.0 {
            (mean / stderr).abs()
        } else if mean.abs() <= CALL_TOL {
            0.0
        } else {
            f64::INFINITY
        };
        report.push(format!("martingale_cut_{i}"), z, 4.0, matrix.len(), stderr);
    }
    Ok(report)
}

/// Exact test of the no-crossing-without-meeting property on sampled path
/// pairs.
///
/// Within each interval both paths of a pair ride the same continuous
/// ceiling until their jumps, so a crossing without an intermediate
/// meeting can only happen across a jump instant: the signed difference
/// must flip strictly between the left limit and the value at that
/// instant. The violation count is the statistic and must be zero.
pub fn crossing_test(surface: &CallSurface, n_pairs: usize, seed: u64) -> Result<DiagnosticsReport> {
    let sampler = SurfaceSampler::new(surface)?;
    let paths = sampler.sample_paths(2 * n_pairs, seed)?;
    let mut violations = 0usize;
    for pair in paths.chunks_exact(2) {
        let (y, z) = (&pair[0], &pair[1]);
        for (k, barrier) in sampler.barriers().iter().enumerate() {
            let (t0, _) = barrier.interval();
            let mut events = vec![y.transitions[k].jump_time, z.transitions[k].jump_time];
            events.sort_by(f64::total_cmp);
            events.dedup();
            for t in events {
                if t <= t0 {
                    // a jump at the interval open is a continuation of the
                    // previous landing, not a discontinuity
                    continue;
                }
                let dl = path_left_limit(&y.transitions[k], barrier, t)?
                    - path_left_limit(&z.transitions[k], barrier, t)?;
                let dr = path_value(&y.transitions[k], barrier, t)?
                    - path_value(&z.transitions[k], barrier, t)?;
                if (dl > 0.0 && dr < 0.0) || (dl < 0.0 && dr > 0.0) {
                    violations += 1;
                }
            }
        }
    }
    let mut report = DiagnosticsReport::default();
    report.push("crossings_without_meeting", violations as f64, 0.0, n_pairs, 0.0);
    Ok(report)
}

/// Residuals of empirical calls against the interpolated surface at the
/// given `(time, level)` probes, in standard-error units.
pub fn fit_report(
    matrix: &[Vec<f64>],
    query_times: &[f64],
    surface: &CallSurface,
    probes: &[Vec<f64>],
) -> Result<DiagnosticsReport> {
    if query_times.len() != probes.len() {
        return Err(MartfitError::Domain(format!(
            "{} probe lists for {} query times",
            probes.len(),
            query_times.len()
        )));
    }
    if matrix.iter().any(|r| r.len() != query_times.len()) {
        return Err(MartfitError::Domain(
            "path matrix width does not match query times".into(),
        ));
    }
    let chain = extremal_chain(surface)?;
    fit_report_against(matrix, query_times, &chain, probes)
}

/// As [`fit_report`], with the interpolator supplied by the caller.
pub fn fit_report_against(
    matrix: &[Vec<f64>],
    query_times: &[f64],
    chain: &ExtremalSurface,
    probes: &[Vec<f64>],
) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::default();
    for (col, (&t, levels)) in query_times.iter().zip(probes).enumerate() {
        let samples: Vec<f64> = matrix.iter().map(|r| r[col]).collect();
        for &x in levels {
            let (est, stderr) = empirical_call(&samples, x)?;
            let target = chain.eval(t, x)?;
            let resid = (est - target).abs();
            let stat = if stderr > 0.0 {
                resid / stderr
            } else if resid <= CALL_TOL {
                0.0
            } else {
                f64::INFINITY
            };
            report.push(
                format!("fit_t{t}_x{x}"),
                stat,
                4.0,
                samples.len(),
                stderr,
            );
        }
    }
    Ok(report)
}

/// Empirical marginal of a sample column: one atom per distinct value.
pub fn empirical_marginal(samples: &[f64]) -> Result<MarginalDistribution> {
    if samples.is_empty() {
        return Err(MartfitError::Domain("empty sample list".into()));
    }
    let w = 1.0 / samples.len() as f64;
    MarginalDistribution::from_weighted(&samples.iter().map(|&s| (s, w)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skorokhod::simulate_paths;

    fn pair_a_surface() -> CallSurface {
        CallSurface::new(
            vec![0.0, 1.0],
            vec![
                MarginalDistribution::dirac(0.0),
                MarginalDistribution::from_weighted(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn pair_b_surface() -> CallSurface {
        CallSurface::new(
            vec![0.0, 1.0],
            vec![
                MarginalDistribution::dirac(0.0),
                MarginalDistribution::from_weighted(&[
                    (-1.0, 1.0 / 3.0),
                    (0.0, 1.0 / 3.0),
                    (1.0, 1.0 / 3.0),
                ])
                .unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empirical_call_examples() {
        assert_eq!(empirical_call(&[1.0, 1.0, 1.0], 0.0).unwrap(), (1.0, 0.0));
        assert_eq!(empirical_call(&[-1.0, 1.0], 0.0).unwrap(), (0.5, 0.5));
        assert!(empirical_call(&[], 0.0).is_err());
    }

    #[test]
    fn empirical_call_translation_equivariant() {
        // dyadic fixture so the shifted payoffs are bitwise identical
        let samples = [0.25, -1.5, 2.5, 0.0, 0.75];
        let shifted: Vec<f64> = samples.iter().map(|s| s + 1.75).collect();
        assert_eq!(
            empirical_call(&samples, 0.5).unwrap(),
            empirical_call(&shifted, 0.5 + 1.75).unwrap()
        );
    }

    #[test]
    fn empirical_call_on_pair_a_terminal() {
        let m = simulate_paths(&pair_a_surface(), 100_000, 42, &[1.0]).unwrap();
        let samples: Vec<f64> = m.iter().map(|r| r[0]).collect();
        let (est, _) = empirical_call(&samples, 0.0).unwrap();
        assert!((est - 0.5).abs() < 0.006, "{est}");
    }

    #[test]
    fn martingale_constant_paths_exact_zero() {
        let matrix = vec![vec![1.0, 1.0]; 50];
        let report = martingale_test(&matrix, 0, 1, &[0.0, 2.0]).unwrap();
        assert!(report.checks.iter().all(|c| c.stat == 0.0 && c.pass));
    }

    #[test]
    fn martingale_pair_a_passes() {
        let m = simulate_paths(&pair_a_surface(), 100_000, 11, &[0.25, 1.0]).unwrap();
        let report = martingale_test(&m, 0, 1, &[-0.5, 0.0, 0.5]).unwrap();
        assert!(report.all_pass(), "{}", report.to_lines());
    }

    #[test]
    fn martingale_detects_drift() {
        let matrix: Vec<Vec<f64>> = (0..1000)
            .map(|i| {
                let x = if i % 2 == 0 { -1.0 } else { 1.0 };
                vec![x, x + 1.0]
            })
            .collect();
        let report = martingale_test(&matrix, 0, 1, &[0.0]).unwrap();
        assert!(!report.all_pass());
    }

    #[test]
    fn martingale_rejects_bad_columns() {
        let matrix = vec![vec![0.0, 1.0]; 3];
        assert!(martingale_test(&matrix, 0, 5, &[0.0]).is_err());
    }

    #[test]
    fn crossing_identical_marginals_no_violations() {
        let pb = pair_b_surface().marginals()[1].clone();
        let surface = CallSurface::new(vec![0.0, 1.0], vec![pb.clone(), pb]).unwrap();
        let report = crossing_test(&surface, 500, 7).unwrap();
        assert_eq!(report.checks[0].stat, 0.0);
    }

    #[test]
    fn crossing_pair_a_and_b_no_violations() {
        for surface in [pair_a_surface(), pair_b_surface()] {
            let report = crossing_test(&surface, 2000, 19).unwrap();
            assert_eq!(report.checks[0].stat, 0.0, "{}", report.to_lines());
        }
    }

    #[test]
    fn fit_report_pair_b_grid_times() {
        let m = simulate_paths(&pair_b_surface(), 100_000, 23, &[0.5, 1.0]).unwrap();
        let probes = vec![vec![-1.0, -0.5, 0.0, 0.5, 1.0], vec![-1.0, 0.0, 1.0]];
        let report = fit_report(&m, &[0.5, 1.0], &pair_b_surface(), &probes).unwrap();
        assert!(report.all_pass(), "{}", report.to_lines());
    }

    #[test]
    fn fit_report_zero_variance_exact() {
        let surface =
            CallSurface::new(vec![0.0], vec![MarginalDistribution::dirac(0.0)]).unwrap();
        let matrix = vec![vec![0.0]; 10];
        let report = fit_report(&matrix, &[0.0], &surface, &[vec![-1.0, 0.0, 1.0]]).unwrap();
        assert!(report.checks.iter().all(|c| c.stat == 0.0));
    }

    #[test]
    fn empirical_convex_order_holds() {
        let m = simulate_paths(&pair_b_surface(), 50_000, 31, &[0.3, 0.7, 1.0]).unwrap();
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|c| m.iter().map(|r| r[c]).collect())
            .collect();
        let margs: Vec<MarginalDistribution> = cols
            .iter()
            .map(|c| empirical_marginal(c).unwrap())
            .collect();
        for k in 1..margs.len() {
            // calls must be increasing in time within 4 stderr at probes
            for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let (lo, se_lo) = empirical_call(&cols[k - 1], x).unwrap();
                let (hi, se_hi) = empirical_call(&cols[k], x).unwrap();
                let slack = 4.0 * (se_lo.powi(2) + se_hi.powi(2)).sqrt();
                assert!(lo <= hi + slack, "x = {x}: {lo} vs {hi}");
            }
            assert!((margs[k].mean() - margs[k - 1].mean()).abs() < 0.05);
        }
    }

    #[test]
    fn report_lines_round_trip() {
        let mut report = DiagnosticsReport::default();
        report.push("alpha", 1.25, 4.0, 100, 0.3);
        report.push("beta", 9.5, 4.0, 10, 0.0);
        let parsed = DiagnosticsReport::from_lines(&report.to_lines()).unwrap();
        assert_eq!(parsed.to_lines(), report.to_lines());
        assert!(!parsed.checks[1].pass);
        assert!(DiagnosticsReport::from_lines("chk x 1").is_err());
    }

    #[test]
    fn report_csv_shape() {
        let mut report = DiagnosticsReport::default();
        report.push("gamma", 0.5, 4.0, 7, 0.1);
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "name,stat,thresh,pass,n,stderr");
        assert!(lines.next().unwrap().starts_with("gamma,"));
    }
}
