//! Relay selection and power allocation.
//!
//! Two geometry-based rules pick relays nearest to precomputed target
//! locations ([`multiple_fan_out`], [`single_fan_out`]); [`best_gains`]
//! reads the instantaneous relay-destination gains of relays that decoded
//! `x1`; [`random_relays`] is the baseline. All ties go to the lowest relay
//! index.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::netmodel::{distance, ChannelDraw, LinkGains, NodePosition, RelayId, Topology};
use crate::outage::{asymptotic_rate_loss, AsymptoticInputs, RelayChooser};
use crate::rng::{substream, SimRng};
use crate::sccode::{threshold_rates, CodingConfig, RelayMode};

/// Relative slack on the total-power budget.
pub const POWER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerConstraints {
    pub p_max: f64,
    /// Per-relay caps; relays not listed are uncapped.
    pub per_relay_max: BTreeMap<RelayId, f64>,
}

impl PowerConstraints {
    pub fn new(p_max: f64) -> Result<Self> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::domain(format!("P_max = {p_max} must be positive")));
        }
        Ok(PowerConstraints {
            p_max,
            per_relay_max: BTreeMap::new(),
        })
    }

    pub fn with_cap(mut self, id: RelayId, cap: f64) -> Result<Self> {
        if !(cap >= 0.0) {
            return Err(Error::domain(format!("power cap of relay {id} is negative")));
        }
        self.per_relay_max.insert(id, cap);
        Ok(self)
    }

    pub fn cap(&self, id: RelayId) -> f64 {
        self.per_relay_max.get(&id).copied().unwrap_or(f64::INFINITY)
    }

    /// `share` clipped to the relay's cap.
    fn capped(&self, id: RelayId, share: f64) -> f64 {
        share.min(self.cap(id))
    }
}

/// Chosen relay set `A` with the power of each member, in selection order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    relay_ids: Vec<RelayId>,
    powers: Vec<f64>,
}

impl Selection {
    pub fn new(relay_ids: Vec<RelayId>, powers: Vec<f64>, constraints: &PowerConstraints) -> Result<Self> {
        let sel = Selection { relay_ids, powers };
        sel.check(constraints)?;
        Ok(sel)
    }

    pub fn empty() -> Self {
        Selection::default()
    }

    pub fn relay_ids(&self) -> &[RelayId] {
        &self.relay_ids
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.relay_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relay_ids.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn power_of(&self, id: RelayId) -> Option<f64> {
        self.relay_ids.iter().position(|&r| r == id).map(|i| self.powers[i])
    }

    /// Verifies the power-constraint invariants.
    pub fn check(&self, constraints: &PowerConstraints) -> Result<()> {
        if self.relay_ids.len() != self.powers.len() {
            return Err(Error::contract(format!(
                "{} relays but {} powers",
                self.relay_ids.len(),
                self.powers.len()
            )));
        }
        for (i, id) in self.relay_ids.iter().enumerate() {
            if self.relay_ids[..i].contains(id) {
                return Err(Error::contract(format!("relay {id} selected twice")));
            }
        }
        let slack = 1.0 + POWER_TOLERANCE;
        for (&id, &p) in self.relay_ids.iter().zip(&self.powers) {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::constraint(format!("relay {id} has power {p}")));
            }
            if p > constraints.cap(id) * slack {
                return Err(Error::constraint(format!("relay {id} exceeds its power cap")));
            }
        }
        if self.total_power() > constraints.p_max * slack {
            return Err(Error::constraint(format!(
                "total power {} exceeds P_max = {}",
                self.total_power(),
                constraints.p_max
            )));
        }
        Ok(())
    }

    fn assign_equal(&mut self, constraints: &PowerConstraints, divisor: usize) {
        let share = constraints.p_max / divisor as f64;
        self.powers.clear();
        self.powers
            .extend(self.relay_ids.iter().map(|&id| constraints.capped(id, share)));
    }
}

fn check_m(m: usize, k_r: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    if m > k_r {
        return Err(Error::domain(format!("cannot select {m} of {k_r} relays")));
    }
    Ok(())
}

/// Index of the unselected relay nearest to `target`, lowest index on ties.
fn nearest_unselected(topology: &Topology, target: NodePosition, taken: &[RelayId]) -> Option<RelayId> {
    let mut best: Option<(f64, RelayId)> = None;
    for id in topology.relay_ids() {
        if taken.contains(&id) {
            continue;
        }
        let d = distance(topology.relay(id), target);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, id));
        }
    }
    best.map(|(_, id)| id)
}

/// Nearest unselected relay to each target in turn, `P_max / m` each.
pub fn multiple_fan_out(
    topology: &Topology,
    m: usize,
    targets: &[NodePosition],
    constraints: &PowerConstraints,
) -> Result<Selection> {
    check_m(m, topology.relay_count())?;
    if targets.len() != m {
        return Err(Error::contract(format!("{} targets for m = {m}", targets.len())));
    }
    let mut sel = Selection::empty();
    for &target in targets {
        let id = nearest_unselected(topology, target, &sel.relay_ids)
            .ok_or_else(|| Error::domain("ran out of relays"))?;
        sel.relay_ids.push(id);
    }
    sel.assign_equal(constraints, m);
    sel.check(constraints)?;
    Ok(sel)
}

/// Point at distance `d_bar` from the source toward the destination.
pub fn line_target(topology: &Topology, d_bar: f64) -> NodePosition {
    let (s, t) = (topology.source, topology.destination);
    let f = d_bar / topology.span();
    NodePosition::new(s.x + f * (t.x - s.x), s.y + f * (t.y - s.y))
}

/// The `m` relays nearest to the single-relay line optimum, `P_max / m` each.
pub fn single_fan_out(
    topology: &Topology,
    m: usize,
    d_bar: f64,
    constraints: &PowerConstraints,
) -> Result<Selection> {
    check_m(m, topology.relay_count())?;
    let target = line_target(topology, d_bar);
    let mut order: Vec<(f64, RelayId)> = topology
        .relay_ids()
        .map(|id| (distance(topology.relay(id), target), id))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut sel = Selection {
        relay_ids: order.into_iter().take(m).map(|(_, id)| id).collect(),
        powers: vec![],
    };
    sel.assign_equal(constraints, m);
    sel.check(constraints)?;
    Ok(sel)
}

/// Up to `m` non-idle relays with the strongest relay-destination gains.
/// If fewer than `m` qualify, the budget is split among those found; none
/// yields the empty selection.
pub fn best_gains(draw: &ChannelDraw, modes: &[RelayMode], m: usize, constraints: &PowerConstraints) -> Selection {
    let mut sel = Selection::empty();
    best_gains_into(draw, modes, m, constraints, &mut sel);
    sel
}

/// [`best_gains`] writing into an existing selection.
pub fn best_gains_into(
    draw: &ChannelDraw,
    modes: &[RelayMode],
    m: usize,
    constraints: &PowerConstraints,
    out: &mut Selection,
) {
    out.relay_ids.clear();
    while out.relay_ids.len() < m {
        let mut best: Option<usize> = None;
        for (i, (&g, &mode)) in draw.g_rd.iter().zip(modes).enumerate() {
            if mode == RelayMode::Idle || out.relay_ids.contains(&RelayId(i)) {
                continue;
            }
            if best.is_none_or(|b| g > draw.g_rd[b]) {
                best = Some(i);
            }
        }
        match best {
            Some(i) => out.relay_ids.push(RelayId(i)),
            None => break,
        }
    }
    let divisor = out.relay_ids.len().max(1);
    out.assign_equal(constraints, divisor);
}

/// `m` relays drawn uniformly without replacement, `P_max / m` each.
pub fn random_relays<R: Rng + ?Sized>(
    k_r: usize,
    m: usize,
    rng: &mut R,
    constraints: &PowerConstraints,
) -> Result<Selection> {
    check_m(m, k_r)?;
    let mut sel = Selection::empty();
    random_relays_into(k_r, m, rng, constraints, &mut sel);
    sel.check(constraints)?;
    Ok(sel)
}

fn random_relays_into<R: Rng + ?Sized>(
    k_r: usize,
    m: usize,
    rng: &mut R,
    constraints: &PowerConstraints,
    out: &mut Selection,
) {
    out.relay_ids.clear();
    out.relay_ids
        .extend(index::sample(rng, k_r, m).into_iter().map(RelayId));
    out.assign_equal(constraints, m);
}

/// Per-realization Best Gains chooser for the Monte Carlo engine.
#[derive(Debug, Clone, PartialEq)]
pub struct BestGains {
    pub m: usize,
    pub constraints: PowerConstraints,
}

impl RelayChooser for BestGains {
    fn choose<'a>(
        &'a self,
        draw: &ChannelDraw,
        modes: &[RelayMode],
        _rng: &mut SimRng,
        scratch: &'a mut Selection,
    ) -> &'a Selection {
        best_gains_into(draw, modes, self.m, &self.constraints, scratch);
        scratch
    }
}

/// Per-realization random chooser for the Monte Carlo engine.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomRelays {
    pub k_r: usize,
    pub m: usize,
    pub constraints: PowerConstraints,
}

impl RandomRelays {
    pub fn new(k_r: usize, m: usize, constraints: PowerConstraints) -> Result<Self> {
        check_m(m, k_r)?;
        Ok(RandomRelays { k_r, m, constraints })
    }
}

impl RelayChooser for RandomRelays {
    fn choose<'a>(
        &'a self,
        _draw: &ChannelDraw,
        _modes: &[RelayMode],
        rng: &mut SimRng,
        scratch: &'a mut Selection,
    ) -> &'a Selection {
        random_relays_into(self.k_r, self.m, rng, &self.constraints, scratch);
        scratch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerAllocation {
    Equal,
    Optimal,
}

/// Closed-form rate shortfall of `selection`; see [`asymptotic_rate_loss`].
pub fn closed_form_loss(gains: &LinkGains, selection: &Selection, config: &CodingConfig) -> Result<f64> {
    let inputs = AsymptoticInputs::from_selection(gains, selection, config, threshold_rates(config));
    asymptotic_rate_loss(&inputs)
}

/// Closed-form expected rate of `selection`.
pub fn closed_form_rate(gains: &LinkGains, selection: &Selection, config: &CodingConfig) -> Result<f64> {
    Ok(threshold_rates(config).total() - closed_form_loss(gains, selection, config)?)
}

/// Reassigns the powers of `selection`.
///
/// `Optimal` minimizes the closed-form rate shortfall over the capped
/// simplex by projected ascent from several starts, one of them the equal
/// split, so it never does worse than `Equal`.
pub fn allocate_power(
    mode: PowerAllocation,
    gains: &LinkGains,
    selection: &Selection,
    constraints: &PowerConstraints,
    config: &CodingConfig,
) -> Result<Selection> {
    let mut sel = Selection {
        relay_ids: selection.relay_ids.clone(),
        powers: vec![],
    };
    if let Some(id) = sel.relay_ids.iter().find(|id| id.index() >= gains.relay_count()) {
        return Err(Error::contract(format!("relay {id} not in the network")));
    }
    match mode {
        PowerAllocation::Equal => sel.assign_equal(constraints, sel.len().max(1)),
        PowerAllocation::Optimal => {
            if sel.is_empty() {
                return Err(Error::contract("optimal allocation needs a nonempty selection"));
            }
            let caps: Vec<f64> = sel.relay_ids.iter().map(|&id| constraints.cap(id)).collect();
            if caps.iter().all(|&c| c == 0.0) {
                return Err(Error::constraint("every selected relay has a zero power cap"));
            }
            sel.powers = optimal_powers(gains, &sel.relay_ids, &caps, constraints.p_max, config)?;
        }
    }
    sel.check(constraints)?;
    Ok(sel)
}

/// Euclidean projection onto `{0 ≤ p_i ≤ caps_i, Σ p_i ≤ budget}`.
fn project(p: &[f64], caps: &[f64], budget: f64) -> Vec<f64> {
    let shifted = |tau: f64| -> Vec<f64> {
        p.iter().zip(caps).map(|(&x, &c)| (x - tau).clamp(0.0, c)).collect()
    };
    let base = shifted(0.0);
    if base.iter().sum::<f64>() <= budget {
        return base;
    }
    let (mut lo, mut hi) = (0.0, p.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shifted(mid).iter().sum::<f64>() > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shifted(hi)
}

fn optimal_powers(
    gains: &LinkGains,
    ids: &[RelayId],
    caps: &[f64],
    budget: f64,
    config: &CodingConfig,
) -> Result<Vec<f64>> {
    let n = ids.len();
    let rates = threshold_rates(config);
    let inputs = AsymptoticInputs {
        g_sd: gains.sd,
        g_sr: ids.iter().map(|id| gains.sr[id.index()]).collect(),
        g_rd: ids.iter().map(|id| gains.rd[id.index()]).collect(),
        power_ratio: vec![0.0; n],
        snr: config.snr(),
        beta: config.beta,
        rates,
    };
    let mut loss = |p: &[f64]| -> Result<f64> {
        // Zero-power relays leave the set.
        let keep: Vec<usize> = (0..n).filter(|&i| p[i] > 0.0).collect();
        let sub = AsymptoticInputs {
            g_sr: keep.iter().map(|&i| inputs.g_sr[i]).collect(),
            g_rd: keep.iter().map(|&i| inputs.g_rd[i]).collect(),
            power_ratio: keep.iter().map(|&i| p[i] / config.p_t).collect(),
            ..inputs.clone()
        };
        asymptotic_rate_loss(&sub)
    };

    if n == 1 {
        return Ok(vec![budget.min(caps[0])]);
    }

    let mut starts = vec![project(&vec![budget / n as f64; n], caps, budget)];
    for i in 0..n {
        let mut p = vec![0.1 * budget / (n - 1) as f64; n];
        p[i] = 0.9 * budget;
        starts.push(project(&p, caps, budget));
    }
    let mut rng = substream(0x5eed_a110c, n as u64);
    for _ in 0..4 {
        let w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
        let s: f64 = w.iter().sum();
        starts.push(project(&w.iter().map(|x| budget * x / s).collect::<Vec<_>>(), caps, budget));
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        let (l, p) = descend(&mut loss, start, caps, budget)?;
        if best.as_ref().is_none_or(|(bl, _)| l < *bl) {
            best = Some((l, p));
        }
    }
    Ok(best.map(|(_, p)| p).unwrap_or_default())
}

/// Projected descent with sup-normalized finite-difference gradients and an
/// adaptive step; only improving moves are accepted.
fn descend(
    loss: &mut impl FnMut(&[f64]) -> Result<f64>,
    start: Vec<f64>,
    caps: &[f64],
    budget: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = start.len();
    let mut p = start;
    let mut f = loss(&p)?;
    let mut step = 0.1 * budget;
    let h = 1e-7 * budget;
    let mut grad = vec![0.0; n];
    let mut fresh = false;
    for _ in 0..2000 {
        if step < 1e-10 * budget {
            break;
        }
        if !fresh {
            for i in 0..n {
                let mut q = p.clone();
                q[i] = p[i] + h;
                let up = loss(&q)?;
                if p[i] > h {
                    q[i] = p[i] - h;
                    grad[i] = (up - loss(&q)?) / (2.0 * h);
                } else {
                    grad[i] = (up - f) / h;
                }
            }
            fresh = true;
        }
        let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if !(scale > 0.0) {
            break;
        }
        let trial: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x - step * g / scale).collect();
        let cand = project(&trial, caps, budget);
        let fc = loss(&cand)?;
        if fc < f {
            p = cand;
            f = fc;
            step = (step * 1.5).min(budget);
            fresh = false;
        } else {
            step *= 0.5;
        }
    }
    Ok((f, p))
}

/// Largest candidate pool [`exhaustive_best_subset`] accepts.
pub const MAX_EXHAUSTIVE_RELAYS: usize = 12;

/// Best equal-power subset by closed-form rate, searching every subset
/// (of size `m` when given). Ties go to the subset found first in
/// increasing bitmask order.
pub fn exhaustive_best_subset(
    gains: &LinkGains,
    config: &CodingConfig,
    constraints: &PowerConstraints,
    m: Option<usize>,
) -> Result<Selection> {
    let k = gains.relay_count();
    if k > MAX_EXHAUSTIVE_RELAYS {
        return Err(Error::domain(format!("exhaustive search limited to {MAX_EXHAUSTIVE_RELAYS} relays")));
    }
    let mut best: Option<(f64, Selection)> = None;
    for mask in 0u32..(1 << k) {
        if m.is_some_and(|m| mask.count_ones() as usize != m) {
            continue;
        }
        let mut sel = Selection {
            relay_ids: (0..k).filter(|i| mask >> i & 1 == 1).map(RelayId).collect(),
            powers: vec![],
        };
        sel.assign_equal(constraints, sel.len().max(1));
        let loss = closed_form_loss(gains, &sel, config)?;
        if best.as_ref().is_none_or(|(bl, _)| loss < *bl) {
            best = Some((loss, sel));
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::domain("no subset of the requested size"))
}
