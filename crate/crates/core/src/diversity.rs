//! Diversity order: predictions and measured log-log slopes.
//!
//! With relay powers scaled as `P_i/σ² = (P_t/σ²)^k`, a scenario in which
//! `α` of the `m` selected relays fail contributes `SNR^-(km + 1 + α(1-k))`,
//! so the outage decays with the smallest such exponent.

use crate::error::{Error, Result};
use crate::netmodel::{LinkGains, RelayId};
use crate::outage::{asymptotic_outage, monte_carlo_with_gains, AsymptoticInputs};
use crate::rng::derive_seed;
use crate::sccode::{CodingConfig, ThresholdRates};
use crate::select::{PowerConstraints, Selection};

/// Points with fewer outage events than this are left out of the fit.
pub const MIN_FIT_EVENTS: u64 = 100;

/// `min_{α ∈ 0..=m} km + 1 + α(1 - k)`.
pub fn predicted_diversity(m: usize, k: f64) -> f64 {
    (0..=m)
        .map(|alpha| k * (m - alpha) as f64 + alpha as f64 + 1.0)
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `-log10 p` against `log10 SNR`.
pub fn slope_fit(snr_db: &[f64], outage: &[f64]) -> Result<f64> {
    if snr_db.len() != outage.len() {
        return Err(Error::contract("SNR and outage lists differ in length"));
    }
    if snr_db.len() < 2 {
        return Err(Error::domain("a slope needs at least two points"));
    }
    if let Some(p) = outage.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::domain(format!("outage {p} cannot be fitted; increase trials")));
    }
    let n = snr_db.len() as f64;
    let xs: Vec<f64> = snr_db.iter().map(|db| db / 10.0).collect();
    let ys: Vec<f64> = outage.iter().map(|p| -p.log10()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("SNR grid has no spread"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    MonteCarlo,
    ClosedForm,
}

/// Fixed geometry and layer rates for a sweep. All relays in `gains` form
/// the selected set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityScenario {
    pub gains: LinkGains,
    pub rates: ThresholdRates,
    pub beta: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversitySweep {
    pub k: f64,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub mode: SweepMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityPoint {
    pub snr_db: f64,
    pub p1: f64,
    pub p2: f64,
    /// Monte Carlo trials, absent for closed-form points.
    pub trials: Option<u64>,
    pub ci95_p1: Option<f64>,
    pub ci95_p2: Option<f64>,
    /// Whether each layer's point entered its fit.
    pub fitted1: bool,
    pub fitted2: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    pub m: usize,
    pub k: f64,
    pub snr_grid_db: Vec<f64>,
    pub points: Vec<DiversityPoint>,
    /// `None` when fewer than two points qualified.
    pub measured_slope_1: Option<f64>,
    pub measured_slope_2: Option<f64>,
    pub predicted: f64,
}

impl DiversitySweep {
    fn check(&self) -> Result<()> {
        if self.snr_grid_db.len() < 2 {
            return Err(Error::domain("diversity sweep needs at least two SNR points"));
        }
        if !self.snr_grid_db.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("SNR grid must be strictly increasing"));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::domain("k must be positive"));
        }
        if self.mode == SweepMode::MonteCarlo && self.trials == 0 {
            return Err(Error::domain("at least one trial is required"));
        }
        Ok(())
    }
}

/// Measures outage over `sweep.snr_grid_db` with `P_t = σ² SNR` and every
/// relay at `P_i = σ² SNR^k`, holding the layer rates fixed.
pub fn diversity_sweep(scenario: &DiversityScenario, sweep: &DiversitySweep) -> Result<DiversityReport> {
    sweep.check()?;
    let m = scenario.gains.relay_count();
    let mut points = Vec::with_capacity(sweep.snr_grid_db.len());
    for (idx, &db) in sweep.snr_grid_db.iter().enumerate() {
        let snr = 10f64.powf(db / 10.0);
        let p_t = scenario.sigma2 * snr;
        let p_i = scenario.sigma2 * snr.powf(sweep.k);
        let config = CodingConfig::for_rates(p_t, scenario.sigma2, scenario.beta, scenario.rates)?;
        let constraints = PowerConstraints::new((m as f64 * p_i).max(f64::MIN_POSITIVE))?;
        let selection = Selection::new((0..m).map(RelayId).collect(), vec![p_i; m], &constraints)?;
        let point = match sweep.mode {
            SweepMode::ClosedForm => {
                let inputs = AsymptoticInputs::from_selection(&scenario.gains, &selection, &config, scenario.rates);
                let p1 = asymptotic_outage(1, &inputs)?;
                let p2 = asymptotic_outage(2, &inputs)?;
                DiversityPoint {
                    snr_db: db,
                    p1,
                    p2,
                    trials: None,
                    ci95_p1: None,
                    ci95_p2: None,
                    fitted1: p1 > 0.0,
                    fitted2: p2 > 0.0,
                }
            }
            SweepMode::MonteCarlo => {
                let seed = derive_seed(sweep.seed, idx as u64);
                let est = monte_carlo_with_gains(&scenario.gains, &config, &selection, sweep.trials, seed)?;
                let events = |p: f64| (p * est.trials as f64).round() as u64;
                DiversityPoint {
                    snr_db: db,
                    p1: est.p1,
                    p2: est.p2,
                    trials: Some(est.trials),
                    ci95_p1: Some(est.ci95_p1),
                    ci95_p2: Some(est.ci95_p2),
                    fitted1: events(est.p1) >= MIN_FIT_EVENTS,
                    fitted2: events(est.p2) >= MIN_FIT_EVENTS,
                }
            }
        };
        points.push(point);
    }
    let fit = |level: u8| -> Result<Option<f64>> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|p| if level == 1 { p.fitted1 } else { p.fitted2 })
            .map(|p| (p.snr_db, if level == 1 { p.p1 } else { p.p2 }))
            .unzip();
        if xs.len() < 2 {
            return Ok(None);
        }
        slope_fit(&xs, &ys).map(Some)
    };
    Ok(DiversityReport {
        m,
        k: sweep.k,
        snr_grid_db: sweep.snr_grid_db.clone(),
        measured_slope_1: fit(1)?,
        measured_slope_2: fit(2)?,
        predicted: predicted_diversity(m, sweep.k),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{dbm_to_linear, PathLossModel, Topology};
    use crate::outage::{asymptotic_line, LineAsymptoticParams, LineNetwork};
    use proptest::prelude::*;

    #[test]
    fn predicted_order_examples() {
        assert_eq!(predicted_diversity(1, 1.0), 2.0);
        assert_eq!(predicted_diversity(2, 0.5), 2.0);
        assert_eq!(predicted_diversity(2, 2.0), 3.0);
        for m in 1..=8 {
            assert_eq!(predicted_diversity(m, 1.0), m as f64 + 1.0);
        }
    }

    #[test]
    fn slope_of_exact_power_law() {
        let db = [40.0, 50.0, 60.0];
        let p: Vec<f64> = db.iter().map(|d| 10f64.powf(-2.0 * d / 10.0)).collect();
        assert!((slope_fit(&db, &p).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(slope_fit(&db, &[0.3, 0.3, 0.3]).unwrap(), 0.0);
        assert!(matches!(slope_fit(&db, &[0.1, 0.0, 0.01]), Err(Error::Domain(_))));
        assert!(slope_fit(&[10.0], &[0.1]).is_err());
        assert!(slope_fit(&[10.0, 10.0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn closed_form_line_slope_is_two() {
        let model = PathLossModel::from_carrier(2.4e9, 1.0, 3.0).unwrap();
        let rates = ThresholdRates { r1: 1.08, r2: 1.41 };
        let p: Vec<f64> = [60.0, 80.0]
            .iter()
            .map(|db| {
                let cfg = CodingConfig::for_rates(10f64.powf(db / 10.0), 1.0, 0.75, rates).unwrap();
                let params = LineAsymptoticParams::new(&cfg, &rates).unwrap();
                let net = LineNetwork::new(100.0, &model, 1.0, params).unwrap();
                asymptotic_line(1, 45.0, &net).unwrap()
            })
            .collect();
        assert!((slope_fit(&[60.0, 80.0], &p).unwrap() - 2.0).abs() < 1e-6);
    }

    fn line_scenario(m: usize) -> DiversityScenario {
        let xs: Vec<f64> = (0..m).map(|i| 30.0 + 15.0 * i as f64).collect();
        let topo = Topology::line(100.0, &xs).unwrap();
        let model = PathLossModel::from_carrier(2.4e9, 1.0, 3.0).unwrap();
        DiversityScenario {
            gains: LinkGains::from_topology(&topo, &model).unwrap(),
            rates: ThresholdRates {
                r1: 1.080_912_711_568_768_7,
                r2: 1.417_066_019_786_644_3,
            },
            beta: 0.75,
            sigma2: dbm_to_linear(-104.0),
        }
    }

    fn closed_sweep(k: f64, grid: Vec<f64>) -> DiversitySweep {
        DiversitySweep {
            k,
            snr_grid_db: grid,
            trials: 0,
            seed: 0,
            mode: SweepMode::ClosedForm,
        }
    }

    #[test]
    fn closed_form_slopes_match_predicted_order() {
        for m in 1..=3 {
            let r = diversity_sweep(&line_scenario(m), &closed_sweep(1.0, vec![130.0, 150.0])).unwrap();
            let want = m as f64 + 1.0;
            assert!((r.measured_slope_1.unwrap() - want).abs() < 1e-6);
            assert!((r.measured_slope_2.unwrap() - want).abs() < 1e-6);
            assert_eq!(r.predicted, want);
        }
    }

    #[test]
    fn closed_form_slopes_follow_k_law() {
        let grid = vec![200.0, 220.0];
        for (m, k) in [(2, 2.0), (1, 4.0), (2, 0.5), (3, 0.25)] {
            let r = diversity_sweep(&line_scenario(m), &closed_sweep(k, grid.clone())).unwrap();
            let want = predicted_diversity(m, k);
            assert!((r.measured_slope_1.unwrap() - want).abs() < 0.05, "m {m} k {k}: {r:?}");
        }
    }

    #[test]
    fn monte_carlo_sweep_is_in_range() {
        let sweep = DiversitySweep {
            k: 1.0,
            snr_grid_db: vec![113.0, 116.0, 119.0],
            trials: 400_000,
            seed: 3,
            mode: SweepMode::MonteCarlo,
        };
        let r = diversity_sweep(&line_scenario(1), &sweep).unwrap();
        assert!(r.points.iter().all(|p| p.fitted1));
        let s = r.measured_slope_1.unwrap();
        assert!((s - 2.0).abs() < 0.75, "{s}");
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let sc = line_scenario(1);
        assert!(diversity_sweep(&sc, &closed_sweep(1.0, vec![60.0])).is_err());
        assert!(diversity_sweep(&sc, &closed_sweep(1.0, vec![60.0, 50.0])).is_err());
        assert!(diversity_sweep(&sc, &closed_sweep(0.0, vec![50.0, 60.0])).is_err());
    }

    proptest! {
        #[test]
        fn prediction_is_monotone(m in 1usize..10, k in 0.05f64..6.0, dk in 0.0f64..2.0) {
            prop_assert!(predicted_diversity(m + 1, k) >= predicted_diversity(m, k));
            prop_assert!(predicted_diversity(m, k + dk) >= predicted_diversity(m, k));
            let expected = if k <= 1.0 { k * m as f64 + 1.0 } else { m as f64 + 1.0 };
            prop_assert!((predicted_diversity(m, k) - expected).abs() < 1e-12);
        }

        #[test]
        fn slope_ignores_constant_factor(
            ps in prop::collection::vec(1e-8f64..1.0, 3),
            c in 1e-3f64..1e3,
        ) {
            let db = [10.0, 17.0, 31.0];
            let scaled: Vec<f64> = ps.iter().map(|p| p * c).collect();
            let (a, b) = (slope_fit(&db, &ps).unwrap(), slope_fit(&db, &scaled).unwrap());
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
