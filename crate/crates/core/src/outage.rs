//! Outage probabilities and expected rate.
//!
//! Two routes are provided. [`monte_carlo_outage`] samples fading
//! realizations and counts decode failures at the destination.
//! [`asymptotic_outage`] and [`asymptotic_line`] evaluate the high-SNR
//! closed forms, where every probability is replaced by its leading-order
//! term in `1 / SNR`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netmodel::{ChannelDraw, LinkGains, PathLossModel, RelayId, Topology};
use crate::rng::{substream, SimRng};
use crate::sccode::{
    classify_gain, destination_decode, threshold_rates, CodingConfig, RelayMode, ThresholdRates,
};
use crate::select::Selection;

/// Trials per random substream.
pub const BLOCK_TRIALS: u64 = 1 << 14;

/// Fewer failure events than this and an estimate is flagged unreliable.
pub const MIN_RELIABLE_EVENTS: u64 = 10;

/// Normal-approximation 95% half-width of a binomial proportion.
pub fn ci95(p: f64, trials: u64) -> f64 {
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Expected rate `(1 - p1) R1 + (1 - p1)(1 - p2) R2`.
pub fn expected_rate(p1: f64, p2: f64, rates: &ThresholdRates) -> Result<f64> {
    for (name, p) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("{name} = {p} is not a probability")));
        }
    }
    Ok((1.0 - p1) * rates.r1 + (1.0 - p1) * (1.0 - p2) * rates.r2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    /// Destination fails to decode `x1`.
    pub p1: f64,
    /// Destination fails the combined second-layer test.
    pub p2: f64,
    /// Destination fails to decode both layers (joint event).
    pub p2_joint: f64,
    pub expected_rate: f64,
    pub trials: u64,
    pub ci95_p1: f64,
    pub ci95_p2: f64,
    pub rates: ThresholdRates,
    /// Too few failure events for the normal approximation.
    pub unreliable: bool,
}

impl OutageEstimate {
    pub fn from_counts(counts: OutageCounts, rates: ThresholdRates) -> Self {
        let n = counts.trials;
        let p1 = counts.fail_x1 as f64 / n as f64;
        let p2 = counts.fail_x2 as f64 / n as f64;
        let p2_joint = counts.fail_joint as f64 / n as f64;
        let few = |c: u64| c < MIN_RELIABLE_EVENTS;
        OutageEstimate {
            p1,
            p2,
            p2_joint,
            expected_rate: (1.0 - p1) * rates.r1 + (1.0 - p1) * (1.0 - p2) * rates.r2,
            trials: n,
            ci95_p1: ci95(p1, n),
            ci95_p2: ci95(p2, n),
            rates,
            unreliable: few(counts.fail_x1) || few(counts.fail_x2),
        }
    }

    /// Delta-method half-width of the expected rate, treating the two
    /// layer estimates as independent.
    pub fn ci95_rate(&self) -> f64 {
        let d1 = self.rates.r1 + (1.0 - self.p2) * self.rates.r2;
        let d2 = (1.0 - self.p1) * self.rates.r2;
        (d1 * d1 * self.ci95_p1 * self.ci95_p1 + d2 * d2 * self.ci95_p2 * self.ci95_p2).sqrt()
    }
}

/// Integer event tallies; summing them is order independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutageCounts {
    pub trials: u64,
    pub fail_x1: u64,
    pub fail_x2: u64,
    pub fail_joint: u64,
}

impl std::ops::Add for OutageCounts {
    type Output = OutageCounts;

    fn add(self, o: OutageCounts) -> OutageCounts {
        OutageCounts {
            trials: self.trials + o.trials,
            fail_x1: self.fail_x1 + o.fail_x1,
            fail_x2: self.fail_x2 + o.fail_x2,
            fail_joint: self.fail_joint + o.fail_joint,
        }
    }
}

/// Chooses the transmitting relay set for one fading realization.
///
/// Geometry-based rules ignore the draw; channel-aware rules read it.
/// Randomized rules draw from `rng`, which is the trial's own substream.
pub trait RelayChooser: Sync {
    fn choose<'a>(
        &'a self,
        draw: &ChannelDraw,
        modes: &[RelayMode],
        rng: &mut SimRng,
        scratch: &'a mut Selection,
    ) -> &'a Selection;
}

impl RelayChooser for Selection {
    fn choose<'a>(
        &'a self,
        _draw: &ChannelDraw,
        _modes: &[RelayMode],
        _rng: &mut SimRng,
        _scratch: &'a mut Selection,
    ) -> &'a Selection {
        self
    }
}

/// Monte Carlo estimate for a topology.
pub fn monte_carlo_outage<C: RelayChooser + ?Sized>(
    topology: &Topology,
    model: &PathLossModel,
    config: &CodingConfig,
    chooser: &C,
    trials: u64,
    seed: u64,
) -> Result<OutageEstimate> {
    let gains = LinkGains::from_topology(topology, model)?;
    monte_carlo_with_gains(&gains, config, chooser, trials, seed)
}

/// Monte Carlo estimate from precomputed mean gains.
///
/// Trial `t` uses substream `t / BLOCK_TRIALS` of `seed`, so the result is
/// bit-identical for a given seed regardless of thread count.
pub fn monte_carlo_with_gains<C: RelayChooser + ?Sized>(
    gains: &LinkGains,
    config: &CodingConfig,
    chooser: &C,
    trials: u64,
    seed: u64,
) -> Result<OutageEstimate> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    config.validate()?;
    let rates = threshold_rates(config);
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            run_block(gains, config, &rates, chooser, seed, b, n)
        })
        .try_reduce(OutageCounts::default, |a, b| Ok(a + b))?;
    Ok(OutageEstimate::from_counts(counts, rates))
}

fn run_block<C: RelayChooser + ?Sized>(
    gains: &LinkGains,
    config: &CodingConfig,
    rates: &ThresholdRates,
    chooser: &C,
    seed: u64,
    block: u64,
    n: u64,
) -> Result<OutageCounts> {
    let mut rng = substream(seed, block);
    let mut draw = ChannelDraw::default();
    let mut modes = Vec::with_capacity(gains.relay_count());
    let mut selected_modes = Vec::new();
    let mut scratch = Selection::empty();
    let mut counts = OutageCounts::default();
    for _ in 0..n {
        gains.sample_into(&mut draw, &mut rng);
        modes.clear();
        modes.extend(draw.g_sr.iter().map(|&g| classify_gain(g, config)));
        let sel = chooser.choose(&draw, &modes, &mut rng, &mut scratch);
        selected_modes.clear();
        selected_modes.extend(sel.relay_ids().iter().map(|id| modes[id.index()]));
        let out = destination_decode(&draw, sel.relay_ids(), &selected_modes, sel.powers(), config, rates)?;
        counts.trials += 1;
        counts.fail_x1 += u64::from(!out.decodes_x1);
        counts.fail_x2 += u64::from(!out.x2_layer_test);
        counts.fail_joint += u64::from(!out.decodes_x2);
    }
    Ok(counts)
}

/// Which selected relays failed to decode `x1` (Δ) and which decoded `x1`
/// but not `x2` (Θ).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DecodeSetScenario {
    pub delta: Vec<RelayId>,
    pub theta: Vec<RelayId>,
}

impl DecodeSetScenario {
    pub fn new(delta: Vec<RelayId>, theta: Vec<RelayId>) -> Result<Self> {
        if delta.iter().any(|d| theta.contains(d)) {
            return Err(Error::domain("decode sets overlap"));
        }
        Ok(DecodeSetScenario { delta, theta })
    }

    pub fn alpha(&self) -> usize {
        self.delta.len()
    }

    pub fn xi(&self) -> usize {
        self.theta.len()
    }
}

/// Per-scenario tallies from [`monte_carlo_by_scenario`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScenarioTally {
    pub trials: u64,
    pub fail_x1: u64,
    pub fail_x2: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioBreakdown {
    pub trials: u64,
    pub cells: BTreeMap<DecodeSetScenario, ScenarioTally>,
}

impl ScenarioBreakdown {
    /// Reassembles `(p1, p2)` as `Σ P̂(scenario) · P̂(fail | scenario)`.
    pub fn combined(&self) -> (f64, f64) {
        let n = self.trials as f64;
        self.cells.values().fold((0.0, 0.0), |(a, b), t| {
            let w = t.trials as f64 / n;
            let c = t.trials as f64;
            (a + w * t.fail_x1 as f64 / c, b + w * t.fail_x2 as f64 / c)
        })
    }
}

/// Monte Carlo for a fixed selection, stratified by the realized decode sets.
pub fn monte_carlo_by_scenario(
    gains: &LinkGains,
    config: &CodingConfig,
    selection: &Selection,
    trials: u64,
    seed: u64,
) -> Result<ScenarioBreakdown> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let rates = threshold_rates(config);
    let mut out = ScenarioBreakdown::default();
    let mut draw = ChannelDraw::default();
    let ids = selection.relay_ids();
    for b in 0..trials.div_ceil(BLOCK_TRIALS) {
        let mut rng = substream(seed, b);
        for _ in 0..BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS) {
            gains.sample_into(&mut draw, &mut rng);
            let modes: Vec<RelayMode> =
                ids.iter().map(|id| classify_gain(draw.g_sr[id.index()], config)).collect();
            let pick = |m: RelayMode| {
                ids.iter()
                    .zip(&modes)
                    .filter(|(_, &x)| x == m)
                    .map(|(&id, _)| id)
                    .collect()
            };
            let scenario = DecodeSetScenario {
                delta: pick(RelayMode::Idle),
                theta: pick(RelayMode::ForwardX1),
            };
            let res = destination_decode(&draw, ids, &modes, selection.powers(), config, &rates)?;
            let cell = out.cells.entry(scenario).or_default();
            cell.trials += 1;
            cell.fail_x1 += u64::from(!res.decodes_x1);
            cell.fail_x2 += u64::from(!res.x2_layer_test);
            out.trials += 1;
        }
    }
    Ok(out)
}

/// Inputs of the high-SNR closed forms for a selected relay set `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticInputs {
    /// `G²_{t,r}`.
    pub g_sd: f64,
    /// `G²_{t,ν}` per selected relay.
    pub g_sr: Vec<f64>,
    /// `G²_{ν,r}` per selected relay.
    pub g_rd: Vec<f64>,
    /// `P_ν / P_t` per selected relay.
    pub power_ratio: Vec<f64>,
    /// `P_t / σ²`.
    pub snr: f64,
    pub beta: f64,
    pub rates: ThresholdRates,
}

/// Largest relay set the closed forms will enumerate.
pub const MAX_ASYMPTOTIC_RELAYS: usize = 20;

impl AsymptoticInputs {
    /// Selected relays with zero power are left out of `A`.
    pub fn from_selection(
        gains: &LinkGains,
        selection: &Selection,
        config: &CodingConfig,
        rates: ThresholdRates,
    ) -> Self {
        let mut inputs = AsymptoticInputs {
            g_sd: gains.sd,
            g_sr: vec![],
            g_rd: vec![],
            power_ratio: vec![],
            snr: config.snr(),
            beta: config.beta,
            rates,
        };
        for (&id, &p) in selection.relay_ids().iter().zip(selection.powers()) {
            if p > 0.0 {
                inputs.g_sr.push(gains.sr[id.index()]);
                inputs.g_rd.push(gains.rd[id.index()]);
                inputs.power_ratio.push(p / config.p_t);
            }
        }
        inputs
    }

    pub fn relay_count(&self) -> usize {
        self.g_sr.len()
    }

    /// Normalized outage threshold of one layer: `P(|h|² < x·G²⁻¹·G²) ≈ x/G²`.
    pub fn level_threshold(&self, level: u8) -> Result<f64> {
        let beta_bar = 1.0 - self.beta;
        match level {
            1 => {
                let e = self.rates.r1.exp();
                let valid = 1.0 - beta_bar * e;
                if !(valid > 0.0) {
                    return Err(Error::domain("1 - β̄ exp(R1) must be positive"));
                }
                Ok((e - 1.0) / (self.snr * valid))
            }
            2 if self.rates.r2 == 0.0 => Ok(0.0),
            2 if beta_bar > 0.0 => Ok(self.rates.r2.exp_m1() / (beta_bar * self.snr)),
            2 => Err(Error::domain("R2 > 0 needs beta < 1")),
            _ => Err(Error::domain(format!("no coding level {level}"))),
        }
    }

    fn check(&self) -> Result<()> {
        let m = self.relay_count();
        if self.g_rd.len() != m || self.power_ratio.len() != m {
            return Err(Error::contract("per-relay inputs differ in length"));
        }
        if m > MAX_ASYMPTOTIC_RELAYS {
            return Err(Error::domain(format!("{m} relays is too many to enumerate")));
        }
        let pos = |g: &f64| *g > 0.0 && g.is_finite();
        if !pos(&self.g_sd)
            || !self.g_sr.iter().all(pos)
            || !self.g_rd.iter().all(pos)
            || !self.power_ratio.iter().all(pos)
        {
            return Err(Error::domain("mean gains and powers must be positive"));
        }
        if !(self.snr > 0.0) {
            return Err(Error::domain("SNR must be positive"));
        }
        Ok(())
    }

    /// Destination-combining factor shared by every scenario with the relays
    /// outside Δ given by `forwarding`:
    /// `x^(n+1) / (n+1)! / G²_{t,r} · Π 1 / ((P_ν/P_t) G²_{ν,r})`.
    fn combining_term(&self, x: f64, forwarding: impl Iterator<Item = usize>) -> f64 {
        let mut n = 0;
        let mut prod = 1.0;
        for v in forwarding {
            n += 1;
            prod /= self.power_ratio[v] * self.g_rd[v];
        }
        let factorial: f64 = (1..=n + 1).map(|k| k as f64).product();
        x.powi(n + 1) / factorial / self.g_sd * prod
    }
}

/// High-SNR outage of layer `level` for the relay set in `inputs`.
///
/// Sums over the relays that fail `x1` (level 1) or `x2` (level 2). Each
/// such relay contributes `x / G²_{t,δ}`; the remaining `n` relays feed the
/// destination's combined test. At level 1 each of those `n` relays can be
/// in either forwarding mode with leading-order probability one, which
/// multiplies the term by `2^n`.
pub fn asymptotic_outage(level: u8, inputs: &AsymptoticInputs) -> Result<f64> {
    inputs.check()?;
    let x = inputs.level_threshold(level)?;
    let m = inputs.relay_count();
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let fail: f64 = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| x / inputs.g_sr[i])
            .product();
        let rest = (0..m).filter(|i| mask >> i & 1 == 0);
        let n = m - mask.count_ones() as usize;
        let multiplicity = if level == 1 { (1u64 << n) as f64 } else { 1.0 };
        total += multiplicity * fail * inputs.combining_term(x, rest);
    }
    Ok(total)
}

/// Rate shortfall `R1 + R2 - E[rate]` with the closed-form outages, each
/// capped at one. Computed directly so it keeps precision when the outages
/// are far below machine epsilon relative to the rate.
pub fn asymptotic_rate_loss(inputs: &AsymptoticInputs) -> Result<f64> {
    let p1 = asymptotic_outage(1, inputs)?.min(1.0);
    let p2 = asymptotic_outage(2, inputs)?.min(1.0);
    let r = inputs.rates;
    Ok(r.r1 * p1 + r.r2 * (p1 + p2 - p1 * p2))
}

/// Expected rate with the closed-form outages, each capped at one.
pub fn asymptotic_rate(inputs: &AsymptoticInputs) -> Result<f64> {
    Ok(inputs.rates.total() - asymptotic_rate_loss(inputs)?)
}

/// One summand of the closed form, keyed by its decode-set scenario.
/// Relay ids index into the `inputs` vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTerm {
    pub scenario: DecodeSetScenario,
    pub value: f64,
}

/// Every scenario term of [`asymptotic_outage`], one per disjoint `(Δ, Θ)`
/// at level 1 and one per `Δ` at level 2.
pub fn asymptotic_outage_terms(level: u8, inputs: &AsymptoticInputs) -> Result<Vec<ScenarioTerm>> {
    inputs.check()?;
    let x = inputs.level_threshold(level)?;
    let m = inputs.relay_count();
    if m > 12 {
        return Err(Error::domain("term listing is limited to 12 relays"));
    }
    let mut terms = Vec::new();
    // Base-3 digit per relay: 0 = forwards both, 1 = Δ, 2 = Θ.
    let states: u32 = if level == 1 { 3 } else { 2 };
    for code in 0..states.pow(m as u32) {
        let digits: Vec<u32> = (0..m).map(|i| code / states.pow(i as u32) % states).collect();
        let ids = |d: u32| (0..m).filter(|&i| digits[i] == d).map(RelayId).collect::<Vec<_>>();
        let scenario = DecodeSetScenario {
            delta: ids(1),
            theta: if level == 1 { ids(2) } else { vec![] },
        };
        let fail: f64 = scenario.delta.iter().map(|d| x / inputs.g_sr[d.0]).product();
        let rest = (0..m).filter(|&i| digits[i] != 1);
        terms.push(ScenarioTerm {
            value: fail * inputs.combining_term(x, rest),
            scenario,
        });
    }
    Ok(terms)
}

/// Normalized thresholds `G1`, `G2` of the line-network closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineAsymptoticParams {
    pub g1: f64,
    pub g2: f64,
}

impl LineAsymptoticParams {
    pub fn new(config: &CodingConfig, rates: &ThresholdRates) -> Result<Self> {
        let inputs = AsymptoticInputs {
            g_sd: 1.0,
            g_sr: vec![],
            g_rd: vec![],
            power_ratio: vec![],
            snr: config.snr(),
            beta: config.beta,
            rates: *rates,
        };
        Ok(LineAsymptoticParams {
            g1: inputs.level_threshold(1)?,
            g2: inputs.level_threshold(2)?,
        })
    }
}

/// Three-node line network: source at 0, destination at `d_tr`, one relay
/// in between transmitting at `P_1 = P_t / power_ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineNetwork {
    pub d_tr: f64,
    pub mu: f64,
    pub chi: f64,
    /// `P_t / P_1`.
    pub power_ratio: f64,
    pub params: LineAsymptoticParams,
}

impl LineNetwork {
    pub fn new(
        d_tr: f64,
        model: &PathLossModel,
        power_ratio: f64,
        params: LineAsymptoticParams,
    ) -> Result<Self> {
        if !(d_tr > 0.0) {
            return Err(Error::domain("d_tr must be positive"));
        }
        if !(power_ratio >= 0.0) {
            return Err(Error::domain("power ratio must be nonnegative"));
        }
        Ok(LineNetwork {
            d_tr,
            mu: model.mu(),
            chi: model.chi(),
            power_ratio,
            params,
        })
    }

    /// Coefficients `G_l² χ⁻² d_tr^μ` in front of the distance polynomial.
    pub fn scale(&self, level: u8) -> f64 {
        let g = if level == 1 { self.params.g1 } else { self.params.g2 };
        g * g / (self.chi * self.chi) * self.d_tr.powf(self.mu)
    }

    /// Relay-position polynomial of layer `level`:
    /// `d^μ + w (P_t/P_1)(d_tr - d)^μ`, with `w = 1` for `x1` and `½` for `x2`.
    pub fn shape(&self, level: u8, d: f64) -> f64 {
        let w = if level == 1 { 1.0 } else { 0.5 };
        d.powf(self.mu) + w * self.power_ratio * (self.d_tr - d).powf(self.mu)
    }
}

/// High-SNR outage of the three-node line network with the relay at `d`.
pub fn asymptotic_line(level: u8, d: f64, network: &LineNetwork) -> Result<f64> {
    if !(level == 1 || level == 2) {
        return Err(Error::domain(format!("no coding level {level}")));
    }
    if !(d > 0.0 && d < network.d_tr) {
        return Err(Error::domain(format!(
            "relay position {d} outside (0, {})",
            network.d_tr
        )));
    }
    Ok(network.scale(level) * network.shape(level, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::dbm_to_linear;
    use crate::select::PowerConstraints;

    fn sym_inputs(snr: f64) -> AsymptoticInputs {
        AsymptoticInputs {
            g_sd: 1.0,
            g_sr: vec![2.0, 2.0],
            g_rd: vec![3.0, 3.0],
            power_ratio: vec![1.0, 1.0],
            snr,
            beta: 0.75,
            rates: ThresholdRates { r1: 1.0, r2: 1.0 },
        }
    }

    #[test]
    fn expected_rate_examples() {
        let r = ThresholdRates { r1: 1.0, r2: 1.0 };
        assert_eq!(expected_rate(0.0, 0.0, &r).unwrap(), 2.0);
        assert_eq!(expected_rate(1.0, 0.3, &r).unwrap(), 0.0);
        assert_eq!(expected_rate(0.5, 0.5, &r).unwrap(), 0.75);
        assert!(expected_rate(1.1, 0.0, &r).is_err());
        assert!(expected_rate(0.0, -0.1, &r).is_err());
    }

    #[test]
    fn expected_rate_is_monotone() {
        let r = ThresholdRates { r1: 0.7, r2: 1.3 };
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                assert!(expected_rate(w[1], a, &r).unwrap() <= expected_rate(w[0], a, &r).unwrap());
                assert!(expected_rate(a, w[1], &r).unwrap() <= expected_rate(a, w[0], &r).unwrap());
            }
        }
    }

    #[test]
    fn empty_relay_set_is_direct_link() {
        let mut inputs = sym_inputs(1e6);
        inputs.g_sr.clear();
        inputs.g_rd.clear();
        inputs.power_ratio.clear();
        inputs.g_sd = 0.5;
        for level in [1, 2] {
            let x = inputs.level_threshold(level).unwrap();
            let p = asymptotic_outage(level, &inputs).unwrap();
            assert!((p - x / 0.5).abs() <= 1e-15 * p);
        }
        let p6 = asymptotic_outage(1, &inputs).unwrap();
        inputs.snr *= 10.0;
        assert!((p6 / asymptotic_outage(1, &inputs).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_pair_golden_value() {
        // Hand-assembled scenario sum at 70 dB.
        let inputs = sym_inputs(1e7);
        let p1 = asymptotic_outage(1, &inputs).unwrap();
        let p2 = asymptotic_outage(2, &inputs).unwrap();
        assert!((p1 / 1.013_724_947_161_790_5e-19 - 1.0).abs() < 1e-12, "{p1}");
        assert!((p2 / 1.412_984_078_538_216_8e-19 - 1.0).abs() < 1e-12, "{p2}");
    }

    #[test]
    fn term_listing_sums_to_total() {
        let inputs = AsymptoticInputs {
            g_sd: 0.7,
            g_sr: vec![1.0, 2.5, 0.4],
            g_rd: vec![3.0, 0.2, 1.1],
            power_ratio: vec![0.5, 1.0, 2.0],
            snr: 1e5,
            beta: 0.6,
            rates: ThresholdRates { r1: 0.5, r2: 0.8 },
        };
        for level in [1, 2] {
            let terms = asymptotic_outage_terms(level, &inputs).unwrap();
            assert_eq!(terms.len(), if level == 1 { 27 } else { 8 });
            let sum: f64 = terms.iter().map(|t| t.value).sum();
            let total = asymptotic_outage(level, &inputs).unwrap();
            assert!((sum / total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_scaling_acts_per_scenario() {
        let base = AsymptoticInputs {
            g_sd: 0.7,
            g_sr: vec![1.0, 2.5, 0.4],
            g_rd: vec![3.0, 0.2, 1.1],
            power_ratio: vec![0.5, 1.0, 2.0],
            snr: 1e5,
            beta: 0.6,
            rates: ThresholdRates { r1: 0.5, r2: 0.8 },
        };
        let c: f64 = 3.7;
        let mut scaled = base.clone();
        scaled.power_ratio.iter_mut().for_each(|p| *p *= c);
        for level in [1, 2] {
            let a = asymptotic_outage_terms(level, &base).unwrap();
            let b = asymptotic_outage_terms(level, &scaled).unwrap();
            for (ta, tb) in a.iter().zip(&b) {
                assert_eq!(ta.scenario, tb.scenario);
                let n = 3 - ta.scenario.alpha();
                assert!((tb.value / ta.value - c.powi(-(n as i32))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn validity_is_enforced() {
        let mut inputs = sym_inputs(1e6);
        inputs.rates.r1 = 2.0; // exp(2) * 0.25 > 1
        assert!(matches!(asymptotic_outage(1, &inputs), Err(Error::Domain(_))));
        assert!(asymptotic_outage(3, &sym_inputs(1.0)).is_err());
    }

    fn line_network(power_ratio: f64) -> LineNetwork {
        let model = PathLossModel::from_carrier(2.4e9, 1.0, 3.0).unwrap();
        let cfg = CodingConfig::new(
            dbm_to_linear(6.0),
            dbm_to_linear(-104.0),
            0.75,
            7.4e-11f64.sqrt(),
            1.25e-10f64.sqrt(),
        )
        .unwrap();
        let params = LineAsymptoticParams::new(&cfg, &threshold_rates(&cfg)).unwrap();
        LineNetwork::new(100.0, &model, power_ratio, params).unwrap()
    }

    #[test]
    fn line_golden_values() {
        let net = line_network(1.0);
        // G1, G2 collapse to the squared thresholds.
        assert!((net.params.g1 / 7.4e-11 - 1.0).abs() < 1e-9);
        assert!((net.params.g2 / 1.25e-10 - 1.0).abs() < 1e-9);
        let p1 = asymptotic_line(1, 50.0, &net).unwrap();
        let p2 = asymptotic_line(2, 50.0, &net).unwrap();
        assert!((p1 / 0.140_218_416_849_559_95 - 1.0).abs() < 1e-9, "{p1}");
        assert!((p2 / 0.300_070_228_717_271_86 - 1.0).abs() < 1e-9, "{p2}");
    }

    #[test]
    fn line_symmetric_plug_in() {
        let mut net = line_network(1.0);
        net.mu = 2.0;
        let p = asymptotic_line(1, 50.0, &net).unwrap();
        let expected = net.params.g1.powi(2) / net.chi.powi(2) * 100f64.powi(2) * (100f64.powi(2) / 2.0);
        assert!((p / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_scales_as_inverse_square_snr() {
        let rates = ThresholdRates { r1: 0.9, r2: 1.1 };
        let model = PathLossModel::from_carrier(2.4e9, 1.0, 3.0).unwrap();
        let at = |snr: f64| {
            let cfg = CodingConfig::for_rates(snr, 1.0, 0.75, rates).unwrap();
            let params = LineAsymptoticParams::new(&cfg, &rates).unwrap();
            let net = LineNetwork::new(100.0, &model, 1.0, params).unwrap();
            (asymptotic_line(1, 40.0, &net).unwrap(), asymptotic_line(2, 40.0, &net).unwrap())
        };
        let (a1, a2) = at(1e9);
        let (b1, b2) = at(2e9);
        assert!((b1 / a1 - 0.25).abs() < 1e-9);
        assert!((b2 / a2 - 0.25).abs() < 1e-9);
    }

    #[test]
    fn line_rejects_endpoints() {
        let net = line_network(1.0);
        assert!(asymptotic_line(1, 0.0, &net).is_err());
        assert!(asymptotic_line(1, 100.0, &net).is_err());
        assert!(asymptotic_line(3, 50.0, &net).is_err());
    }

    #[test]
    fn single_relay_sum_matches_line_form() {
        let model = PathLossModel::from_carrier(2.4e9, 1.0, 3.0).unwrap();
        let cfg = CodingConfig::new(
            dbm_to_linear(6.0),
            dbm_to_linear(-104.0),
            0.75,
            7.4e-11f64.sqrt(),
            1.25e-10f64.sqrt(),
        )
        .unwrap();
        let rates = threshold_rates(&cfg);
        for (d, p1_mw) in [(20.0, cfg.p_t), (50.0, cfg.p_t / 2.0), (83.0, 3.0 * cfg.p_t)] {
            let topo = Topology::line(100.0, &[d]).unwrap();
            let gains = LinkGains::from_topology(&topo, &model).unwrap();
            let constraints = PowerConstraints::new(p1_mw).unwrap();
            let sel = Selection::new(vec![RelayId(0)], vec![p1_mw], &constraints).unwrap();
            let inputs = AsymptoticInputs::from_selection(&gains, &sel, &cfg, rates);
            let params = LineAsymptoticParams::new(&cfg, &rates).unwrap();
            let net = LineNetwork::new(100.0, &model, cfg.p_t / p1_mw, params).unwrap();
            for level in [1, 2] {
                let a = asymptotic_outage(level, &inputs).unwrap();
                let b = asymptotic_line(level, d, &net).unwrap();
                assert!((a / b - 1.0).abs() < 1e-12, "level {level} d {d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn monte_carlo_rejects_zero_trials() {
        let topo = Topology::line(100.0, &[]).unwrap();
        let model = PathLossModel::from_carrier(2.4e9, 1.0, 3.0).unwrap();
        let cfg = CodingConfig::new(1.0, 1.0, 0.75, 0.1, 0.2).unwrap();
        let r = monte_carlo_outage(&topo, &model, &cfg, &Selection::empty(), 0, 1);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
