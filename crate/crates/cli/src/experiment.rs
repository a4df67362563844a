//! Experiment runners.
//!
//! Each runner is a pure function of the configuration: every random
//! quantity comes from a seed derived from `experiment.seed` and a fixed
//! cell label, and rows are sorted before output.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use relaysel::diversity::{diversity_sweep, DiversityReport, DiversityScenario, DiversitySweep, SweepMode};
use relaysel::netmodel::{dbm_to_linear, linear_to_dbm};
use relaysel::outage::{
    asymptotic_outage, asymptotic_rate, monte_carlo_with_gains, AsymptoticInputs, OutageCounts,
};
use relaysel::placement::{general_optimum, line_optimum, line_rate, GeneralPlacementProblem, LinePlacementProblem};
use relaysel::rng::{derive_seed, tag_of};
use relaysel::sccode::threshold_rates;
use relaysel::select::{
    allocate_power, closed_form_loss, multiple_fan_out, single_fan_out, BestGains, RandomRelays,
};
use relaysel::{
    CodingConfig, LinkGains, NodePosition, OutageEstimate, PathLossModel, PowerAllocation,
    PowerConstraints, RelayChooser, RelayId, RelayRegion, Selection, Topology,
};

use crate::config::{Algorithm, BetaSplitMode, DiversityMode, Layout, ScenarioConfig};

const TAG_TOPOLOGY: u64 = 1;
const TAG_RATE_VS_M: u64 = 2;
const TAG_POWER_ALLOC: u64 = 3;
const TAG_SNR_SWEEP: u64 = 4;
const TAG_DIVERSITY: u64 = 5;
const TAG_PLACEMENT: u64 = 6;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The configuration does not fit the requested experiment.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] relaysel::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    RateVsM,
    PowerAlloc,
    SnrPowerRatio,
    SnrBetaSplit,
    Diversity,
    Place,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::RateVsM,
        ExperimentKind::PowerAlloc,
        ExperimentKind::SnrPowerRatio,
        ExperimentKind::SnrBetaSplit,
        ExperimentKind::Diversity,
        ExperimentKind::Place,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::RateVsM => "rate_vs_m",
            ExperimentKind::PowerAlloc => "power_alloc",
            ExperimentKind::SnrPowerRatio => "snr_power_ratio",
            ExperimentKind::SnrBetaSplit => "snr_beta_split",
            ExperimentKind::Diversity => "diversity",
            ExperimentKind::Place => "place",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExperimentKind {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| RunError::Usage(format!("unknown experiment kind `{s}`")))
    }
}

/// One measured point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub kind: ExperimentKind,
    pub algorithm: String,
    pub m: usize,
    pub snr_db: Option<f64>,
    pub k: Option<f64>,
    pub beta_relay: Option<f64>,
    pub p1: f64,
    pub p2: f64,
    pub ci95_p1: Option<f64>,
    pub ci95_p2: Option<f64>,
    pub rate_nats: f64,
    /// Half-width of the expected-rate interval.
    pub ci95_rate: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl ResultRow {
    fn from_estimate(kind: ExperimentKind, algorithm: String, m: usize, est: &OutageEstimate, seed: u64) -> Self {
        ResultRow {
            kind,
            algorithm,
            m,
            snr_db: None,
            k: None,
            beta_relay: None,
            p1: est.p1,
            p2: est.p2,
            ci95_p1: Some(est.ci95_p1),
            ci95_p2: Some(est.ci95_p2),
            rate_nats: est.expected_rate,
            ci95_rate: Some(est.ci95_rate()),
            trials: Some(est.trials),
            seed: Some(seed),
        }
    }

    fn closed_form(kind: ExperimentKind, algorithm: String, m: usize, inputs: &AsymptoticInputs) -> relaysel::Result<Self> {
        Ok(ResultRow {
            kind,
            algorithm,
            m,
            snr_db: None,
            k: None,
            beta_relay: None,
            p1: asymptotic_outage(1, inputs)?.min(1.0),
            p2: asymptotic_outage(2, inputs)?.min(1.0),
            ci95_p1: None,
            ci95_p2: None,
            rate_nats: asymptotic_rate(inputs)?,
            ci95_rate: None,
            trials: None,
            seed: None,
        })
    }

    pub fn rate_bits(&self) -> f64 {
        self.rate_nats / std::f64::consts::LN_2
    }
}

/// A relay position reported by the placement runner.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementRow {
    /// `line` for the single-relay optimum, `general` otherwise.
    pub algorithm: String,
    pub m: usize,
    pub point: usize,
    pub a: f64,
    pub b: f64,
    pub rate_nats: f64,
    pub seed: Option<u64>,
}

/// Equal and optimal allocations on one random topology.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationInstance {
    pub m: usize,
    pub instance: usize,
    pub equal_powers: Vec<f64>,
    pub optimal_powers: Vec<f64>,
    /// Closed-form expected rates.
    pub equal_objective: f64,
    pub optimal_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResultsTable {
    Rates(Vec<ResultRow>),
    Placement(Vec<PlacementRow>),
}

impl ResultsTable {
    pub fn len(&self) -> usize {
        match self {
            ResultsTable::Rates(r) => r.len(),
            ResultsTable::Placement(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rates(&self) -> &[ResultRow] {
        match self {
            ResultsTable::Rates(r) => r,
            ResultsTable::Placement(_) => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: ResultsTable,
    /// Human-readable lines for the terminal (fitted slopes and the like).
    pub summary: Vec<String>,
    pub allocations: Vec<AllocationInstance>,
    pub diversity: Vec<DiversityReport>,
}

impl ExperimentOutput {
    fn rates(rows: Vec<ResultRow>) -> Self {
        ExperimentOutput {
            table: ResultsTable::Rates(rows),
            summary: vec![],
            allocations: vec![],
            diversity: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Use the high-SNR closed forms instead of Monte Carlo.
    pub closed_form: bool,
}

/// Runs experiment `kind` under `config`.
pub fn run_experiment(kind: ExperimentKind, config: &ScenarioConfig, opts: RunOptions) -> Result<ExperimentOutput, RunError> {
    match kind {
        ExperimentKind::RateVsM => run_rate_vs_m(config, opts),
        ExperimentKind::PowerAlloc => run_power_alloc(config, opts),
        ExperimentKind::SnrPowerRatio => run_snr_sweep(config, opts, SweepAxis::PowerRatio),
        ExperimentKind::SnrBetaSplit => run_snr_sweep(config, opts, SweepAxis::BetaSplit),
        ExperimentKind::Diversity => run_diversity(config, opts),
        ExperimentKind::Place => run_place(config),
    }
}

/// Geometry shared by all cells of a run.
struct Network {
    topology: Topology,
    model: PathLossModel,
    gains: LinkGains,
}

fn region(config: &ScenarioConfig) -> RelayRegion {
    RelayRegion::between(config.topology.d_tr, config.topology.region_half_width)
}

impl Network {
    fn build(config: &ScenarioConfig) -> relaysel::Result<Self> {
        let t = &config.topology;
        let topology = match t.layout {
            Layout::Explicit => Topology::new(
                NodePosition::new(0.0, 0.0),
                NodePosition::new(t.d_tr, 0.0),
                t.relay_x.iter().zip(&t.relay_y).map(|(&x, &y)| NodePosition::new(x, y)).collect(),
            )?,
            Layout::Random => {
                let seed = t.seed.unwrap_or_else(|| derive_seed(config.experiment.seed, TAG_TOPOLOGY));
                let mut rng = relaysel::rng::substream(seed, 0);
                Topology::random(t.d_tr, t.k_r, region(config), &mut rng)?
            }
        };
        let model = config.path_loss()?;
        let gains = LinkGains::from_topology(&topology, &model)?;
        Ok(Network { topology, model, gains })
    }

    fn check_m(&self, m: usize) -> Result<(), RunError> {
        let k = self.topology.relay_count();
        if m > k {
            return Err(RunError::Usage(format!("m = {m} exceeds the {k} available relays")));
        }
        Ok(())
    }

    /// Single-relay line optimum with the whole budget on that relay.
    fn d_bar(&self, coding: &CodingConfig, p_max: f64) -> relaysel::Result<f64> {
        let problem = LinePlacementProblem::from_scenario(self.topology.span(), &self.model, coding, p_max)?;
        line_optimum(&problem)
    }

    fn general_targets(&self, config: &ScenarioConfig, m: usize, coding: &CodingConfig, p_max: f64) -> relaysel::Result<Vec<NodePosition>> {
        let mut problem = GeneralPlacementProblem::new(
            m,
            self.topology.span(),
            self.model,
            *coding,
            p_max,
            derive_seed(config.experiment.seed, tag_of(&[TAG_PLACEMENT, m as u64])),
        )?;
        problem.starts = config.experiment.placement_starts;
        Ok(general_optimum(&problem)?.points)
    }
}

/// Selection rule resolved for one cell.
enum Chooser {
    Fixed(Selection),
    Best(BestGains),
    Random(RandomRelays),
}

impl Chooser {
    fn as_dyn(&self) -> &dyn RelayChooser {
        match self {
            Chooser::Fixed(s) => s,
            Chooser::Best(b) => b,
            Chooser::Random(r) => r,
        }
    }

    fn fixed(&self) -> Option<&Selection> {
        match self {
            Chooser::Fixed(s) => Some(s),
            _ => None,
        }
    }
}

fn make_chooser(
    algorithm: Algorithm,
    net: &Network,
    config: &ScenarioConfig,
    m: usize,
    coding: &CodingConfig,
    constraints: &PowerConstraints,
) -> relaysel::Result<Chooser> {
    Ok(match algorithm {
        Algorithm::BestGains => Chooser::Best(BestGains {
            m,
            constraints: constraints.clone(),
        }),
        Algorithm::Random => Chooser::Random(RandomRelays::new(net.topology.relay_count(), m, constraints.clone())?),
        Algorithm::SingleFanOut => {
            let d_bar = net.d_bar(coding, constraints.p_max)?;
            Chooser::Fixed(single_fan_out(&net.topology, m, d_bar, constraints)?)
        }
        Algorithm::MultipleFanOut => {
            let targets = net.general_targets(config, m, coding, constraints.p_max)?;
            Chooser::Fixed(multiple_fan_out(&net.topology, m, &targets, constraints)?)
        }
    })
}

fn closed_form_unavailable(algorithm: Algorithm) -> RunError {
    RunError::Usage(format!(
        "{} selects per channel draw and has no closed form; drop it from experiment.algorithms or run without --closed-form",
        algorithm.label()
    ))
}

/// Measures one cell, by Monte Carlo or by the closed form.
#[allow(clippy::too_many_arguments)]
fn measure(
    kind: ExperimentKind,
    label: String,
    m: usize,
    algorithm: Algorithm,
    chooser: &Chooser,
    gains: &LinkGains,
    coding: &CodingConfig,
    trials: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<ResultRow, RunError> {
    if opts.closed_form {
        let sel = chooser.fixed().ok_or_else(|| closed_form_unavailable(algorithm))?;
        let inputs = AsymptoticInputs::from_selection(gains, sel, coding, threshold_rates(coding));
        Ok(ResultRow::closed_form(kind, label, m, &inputs)?)
    } else {
        let est = monte_carlo_with_gains(gains, coding, chooser.as_dyn(), trials, seed)?;
        Ok(ResultRow::from_estimate(kind, label, m, &est, seed))
    }
}

fn sorted(mut rows: Vec<ResultRow>) -> Vec<ResultRow> {
    rows.sort_by(crate::output::row_order);
    rows
}

/// Expected rate against the number of selected relays, all algorithms.
///
/// Cells with the same `m` share a seed, so algorithms are compared on
/// common channel draws.
pub fn run_rate_vs_m(config: &ScenarioConfig, opts: RunOptions) -> Result<ExperimentOutput, RunError> {
    let net = Network::build(config)?;
    let coding = config.coding()?;
    let constraints = config.constraints()?;
    let e = &config.experiment;
    for &m in &e.m {
        net.check_m(m)?;
    }
    let cells: Vec<(Algorithm, usize)> = e
        .algorithms
        .iter()
        .flat_map(|&a| e.m.iter().map(move |&m| (a, m)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(algorithm, m)| {
            let chooser = make_chooser(algorithm, &net, config, m, &coding, &constraints)?;
            let seed = derive_seed(e.seed, tag_of(&[TAG_RATE_VS_M, m as u64]));
            let mut row = measure(
                ExperimentKind::RateVsM,
                algorithm.label().to_string(),
                m,
                algorithm,
                &chooser,
                &net.gains,
                &coding,
                e.trials,
                seed,
                opts,
            )?;
            row.beta_relay = Some(coding.beta_relay);
            Ok(row)
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(ExperimentOutput::rates(sorted(rows)))
}

fn pooled(estimates: &[OutageEstimate]) -> OutageEstimate {
    let counts = estimates
        .iter()
        .map(|e| {
            let n = e.trials as f64;
            OutageCounts {
                trials: e.trials,
                fail_x1: (e.p1 * n).round() as u64,
                fail_x2: (e.p2 * n).round() as u64,
                fail_joint: (e.p2_joint * n).round() as u64,
            }
        })
        .fold(OutageCounts::default(), |a, b| a + b);
    OutageEstimate::from_counts(counts, estimates[0].rates)
}

/// Equal against optimal power allocation on fresh random `m`-relay
/// topologies. Emits pooled Monte Carlo rows and mean closed-form rows.
pub fn run_power_alloc(config: &ScenarioConfig, opts: RunOptions) -> Result<ExperimentOutput, RunError> {
    let e = &config.experiment;
    if e.power_alloc_instances == 0 {
        return Err(RunError::Usage("experiment.power_alloc_instances must be at least 1".into()));
    }
    let coding = config.coding()?;
    let model = config.path_loss()?;
    let constraints = PowerConstraints::new(dbm_to_linear(config.p_max_dbm()))?;
    let rates = threshold_rates(&coding);
    let cells: Vec<(usize, usize)> = e
        .m
        .iter()
        .flat_map(|&m| (0..e.power_alloc_instances).map(move |i| (m, i)))
        .collect();

    struct Cell {
        record: AllocationInstance,
        equal: Option<OutageEstimate>,
        optimal: Option<OutageEstimate>,
        /// Closed-form `(p1, p2)` of the equal and optimal allocations.
        outage: [(f64, f64); 2],
    }

    let results = cells
        .par_iter()
        .map(|&(m, i)| -> Result<Cell, RunError> {
            let tag = tag_of(&[TAG_POWER_ALLOC, m as u64, i as u64]);
            let mut rng = relaysel::rng::substream(derive_seed(e.seed, tag), 0);
            let topology = Topology::random(config.topology.d_tr, m, region(config), &mut rng)?;
            let gains = LinkGains::from_topology(&topology, &model)?;
            let all = Selection::new(
                (0..m).map(RelayId).collect(),
                vec![constraints.p_max / m as f64; m],
                &constraints,
            )?;
            let equal = allocate_power(PowerAllocation::Equal, &gains, &all, &constraints, &coding)?;
            let optimal = allocate_power(PowerAllocation::Optimal, &gains, &all, &constraints, &coding)?;
            let objective = |s: &Selection| closed_form_loss(&gains, s, &coding).map(|l| rates.total() - l);
            let outage = |s: &Selection| -> relaysel::Result<(f64, f64)> {
                let inputs = AsymptoticInputs::from_selection(&gains, s, &coding, rates);
                Ok((asymptotic_outage(1, &inputs)?.min(1.0), asymptotic_outage(2, &inputs)?.min(1.0)))
            };
            let record = AllocationInstance {
                m,
                instance: i,
                equal_powers: equal.powers().to_vec(),
                optimal_powers: optimal.powers().to_vec(),
                equal_objective: objective(&equal)?,
                optimal_objective: objective(&optimal)?,
            };
            let seed = derive_seed(e.seed, tag_of(&[TAG_POWER_ALLOC, m as u64, i as u64, 1]));
            let (eq, op) = if opts.closed_form {
                (None, None)
            } else {
                (
                    Some(monte_carlo_with_gains(&gains, &coding, &equal, e.trials, seed)?),
                    Some(monte_carlo_with_gains(&gains, &coding, &optimal, e.trials, seed)?),
                )
            };
            Ok(Cell {
                outage: [outage(&equal)?, outage(&optimal)?],
                record,
                equal: eq,
                optimal: op,
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;

    let mut rows = Vec::new();
    for &m in &e.m {
        let cells: Vec<&Cell> = results.iter().filter(|c| c.record.m == m).collect();
        let n = cells.len() as f64;
        let mean = |f: &dyn Fn(&Cell) -> f64| cells.iter().map(|c| f(c)).sum::<f64>() / n;
        for (j, label, objective) in [
            (0, "equal_closed_form", mean(&|c| c.record.equal_objective)),
            (1, "optimal_closed_form", mean(&|c| c.record.optimal_objective)),
        ] {
            rows.push(ResultRow {
                kind: ExperimentKind::PowerAlloc,
                algorithm: label.to_string(),
                m,
                snr_db: None,
                k: None,
                beta_relay: Some(coding.beta_relay),
                p1: mean(&|c| c.outage[j].0),
                p2: mean(&|c| c.outage[j].1),
                ci95_p1: None,
                ci95_p2: None,
                rate_nats: objective,
                ci95_rate: None,
                trials: None,
                seed: None,
            });
        }
        if !opts.closed_form {
            let seed = derive_seed(e.seed, tag_of(&[TAG_POWER_ALLOC, m as u64]));
            for (label, pick) in [
                ("equal", (|c: &Cell| c.equal) as fn(&Cell) -> Option<OutageEstimate>),
                ("optimal", |c: &Cell| c.optimal),
            ] {
                let ests: Vec<OutageEstimate> = cells.iter().filter_map(|c| pick(c)).collect();
                let est = pooled(&ests);
                let mut row = ResultRow::from_estimate(ExperimentKind::PowerAlloc, label.to_string(), m, &est, seed);
                row.beta_relay = Some(coding.beta_relay);
                rows.push(row);
            }
        }
    }
    let mut out = ExperimentOutput::rates(sorted(rows));
    out.allocations = results.into_iter().map(|c| c.record).collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepAxis {
    PowerRatio,
    BetaSplit,
}

/// Source powers (dBm) of the received-SNR axis and their SNR labels.
fn snr_axis(config: &ScenarioConfig, model: &PathLossModel) -> relaysel::Result<Vec<(f64, f64)>> {
    let e = &config.experiment;
    let g = model.mean_gain(config.topology.d_tr)?;
    let sigma2 = dbm_to_linear(config.coding.sigma2_dbm);
    let to_snr = |p_t_dbm: f64| 10.0 * (g * dbm_to_linear(p_t_dbm) / sigma2).log10();
    Ok(if e.received_snr_db_grid.is_empty() {
        e.p_t_dbm_grid.iter().map(|&p| (p, to_snr(p))).collect()
    } else {
        e.received_snr_db_grid
            .iter()
            .map(|&s| (linear_to_dbm(10f64.powf(s / 10.0) * sigma2 / g), s))
            .collect()
    })
}

/// Expected rate over the received-SNR axis, crossed with either relay
/// power ratios or relay power splits.
fn run_snr_sweep(config: &ScenarioConfig, opts: RunOptions, axis: SweepAxis) -> Result<ExperimentOutput, RunError> {
    let net = Network::build(config)?;
    let e = &config.experiment;
    let m = e.sweep_relays;
    net.check_m(m)?;
    let points = snr_axis(config, &net.model)?;
    if points.is_empty() {
        return Err(RunError::Usage("the received-SNR axis is empty".into()));
    }
    let (kind, values) = match axis {
        SweepAxis::PowerRatio => (ExperimentKind::SnrPowerRatio, &e.power_ratios),
        SweepAxis::BetaSplit => (ExperimentKind::SnrBetaSplit, &e.beta_splits),
    };
    if values.is_empty() {
        return Err(RunError::Usage(format!("{kind} needs a nonempty value list")));
    }
    let cells: Vec<(usize, f64)> = (0..points.len())
        .flat_map(|i| values.iter().map(move |&v| (i, v)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(i, v)| -> Result<ResultRow, RunError> {
            let (p_t_dbm, snr_db) = points[i];
            let p_t = dbm_to_linear(p_t_dbm);
            let configured = config.constraints.p_max_dbm.map(dbm_to_linear);
            let (coding, p_max, label) = match axis {
                SweepAxis::PowerRatio => {
                    let coding = config.coding_at(p_t_dbm)?;
                    let p_max = configured.unwrap_or(v * p_t * m as f64);
                    (coding, p_max, format!("{}:ratio={v}", e.sweep_selector.label()))
                }
                SweepAxis::BetaSplit => {
                    let base = config.coding_at(p_t_dbm)?;
                    let coding = match e.beta_split_mode {
                        BetaSplitMode::Code => CodingConfig::new(base.p_t, base.sigma2, v, base.h1_thresh, base.h2_thresh)?
                            .with_beta_relay(v)?,
                        BetaSplitMode::Relay => base.with_beta_relay(v)?,
                    };
                    (coding, configured.unwrap_or(p_t), e.sweep_selector.label().to_string())
                }
            };
            let constraints = config.constraints_with(p_max)?;
            let chooser = make_chooser(e.sweep_selector, &net, config, m, &coding, &constraints)?;
            let seed = derive_seed(e.seed, tag_of(&[TAG_SNR_SWEEP, i as u64]));
            let mut row = measure(kind, label, m, e.sweep_selector, &chooser, &net.gains, &coding, e.trials, seed, opts)?;
            row.snr_db = Some(snr_db);
            row.beta_relay = Some(coding.beta_relay);
            Ok(row)
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(ExperimentOutput::rates(sorted(rows)))
}

/// Outage slopes over the transmit-SNR grid for the Single Fan Out relays
/// of the configured topology.
pub fn run_diversity(config: &ScenarioConfig, opts: RunOptions) -> Result<ExperimentOutput, RunError> {
    let net = Network::build(config)?;
    let e = &config.experiment;
    if e.diversity_m.is_empty() {
        return Err(RunError::Usage("experiment.diversity_m is empty".into()));
    }
    if e.snr_db.len() < 2 {
        return Err(RunError::Usage("experiment.snr_db needs at least two points".into()));
    }
    let coding = config.coding()?;
    let constraints = config.constraints()?;
    let d_bar = net.d_bar(&coding, constraints.p_max)?;
    let closed = opts.closed_form || e.diversity_mode == DiversityMode::ClosedForm;
    let mode = if closed { SweepMode::ClosedForm } else { SweepMode::MonteCarlo };
    let label = if closed { "closed_form" } else { "monte_carlo" };
    let rates = threshold_rates(&coding);
    let reports = e
        .diversity_m
        .par_iter()
        .map(|&m| -> Result<(DiversityReport, u64), RunError> {
            net.check_m(m)?;
            let sel = single_fan_out(&net.topology, m, d_bar, &constraints)?;
            let ids = sel.relay_ids();
            let gains = LinkGains::from_parts(
                net.gains.sd,
                ids.iter().map(|id| net.gains.sr[id.index()]).collect(),
                ids.iter().map(|id| net.gains.rd[id.index()]).collect(),
            )?;
            let scenario = DiversityScenario {
                gains,
                rates,
                beta: coding.beta,
                sigma2: coding.sigma2,
            };
            let seed = derive_seed(e.seed, tag_of(&[TAG_DIVERSITY, m as u64]));
            let sweep = DiversitySweep {
                k: e.k,
                snr_grid_db: e.snr_db.clone(),
                trials: e.trials,
                seed,
                mode,
            };
            Ok((diversity_sweep(&scenario, &sweep)?, seed))
        })
        .collect::<Result<Vec<_>, RunError>>()?;

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (report, seed) in &reports {
        for p in &report.points {
            let rate = relaysel::outage::expected_rate(p.p1.min(1.0), p.p2.min(1.0), &rates)?;
            rows.push(ResultRow {
                kind: ExperimentKind::Diversity,
                algorithm: label.to_string(),
                m: report.m,
                snr_db: Some(p.snr_db),
                k: Some(report.k),
                beta_relay: Some(coding.beta),
                p1: p.p1,
                p2: p.p2,
                ci95_p1: p.ci95_p1,
                ci95_p2: p.ci95_p2,
                rate_nats: rate,
                ci95_rate: None,
                trials: p.trials,
                seed: p.trials.map(|_| *seed),
            });
        }
        let show = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        summary.push(format!(
            "m={} k={}: slope p1 {} p2 {} predicted {}",
            report.m,
            report.k,
            show(report.measured_slope_1),
            show(report.measured_slope_2),
            report.predicted
        ));
    }
    let mut out = ExperimentOutput::rates(sorted(rows));
    out.summary = summary;
    out.diversity = reports.into_iter().map(|(r, _)| r).collect();
    Ok(out)
}

/// Single-relay line optimum and the general `m`-relay optimum per `m`.
pub fn run_place(config: &ScenarioConfig) -> Result<ExperimentOutput, RunError> {
    let net = Network::build(config)?;
    let coding = config.coding()?;
    let p_max = dbm_to_linear(config.p_max_dbm());
    let d_tr = net.topology.span();
    let line = LinePlacementProblem::from_scenario(d_tr, &net.model, &coding, p_max)?;
    let d_bar = line_optimum(&line)?;
    let mut rows = vec![PlacementRow {
        algorithm: "line".into(),
        m: 1,
        point: 1,
        a: d_bar,
        b: 0.0,
        rate_nats: line_rate(d_bar, &line)?,
        seed: None,
    }];
    let mut summary = vec![format!("line optimum d_bar = {d_bar:.6} m")];
    let general = config
        .experiment
        .m
        .par_iter()
        .map(|&m| -> Result<(usize, u64, relaysel::placement::GeneralOptimum), RunError> {
            let seed = derive_seed(config.experiment.seed, tag_of(&[TAG_PLACEMENT, m as u64]));
            let mut problem = GeneralPlacementProblem::new(m, d_tr, net.model, coding, p_max, seed)?;
            problem.starts = config.experiment.placement_starts;
            Ok((m, seed, general_optimum(&problem)?))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    for (m, seed, opt) in general {
        summary.push(format!("m={m}: closed-form rate {:.6} nats", opt.rate));
        for (j, p) in opt.points.iter().enumerate() {
            rows.push(PlacementRow {
                algorithm: "general".into(),
                m,
                point: j + 1,
                a: p.x,
                b: p.y,
                rate_nats: opt.rate,
                seed: Some(seed),
            });
        }
    }
    rows.sort_by(crate::output::placement_order);
    Ok(ExperimentOutput {
        table: ResultsTable::Placement(rows),
        summary,
        allocations: vec![],
        diversity: vec![],
    })
}
