//! Two-level superposition coding.
//!
//! The source sends `x1 + x2` with powers `βP_t` and `β̄P_t`. A receiver with
//! power gain `g` decodes `x1` at rate `C1(g)` treating `x2` as noise, then
//! `x2` at rate `C2(g)`. The thresholds `|h1| ≤ |h2|` fix the layer rates
//! `R1 = C1(|h1|²)` and `R2 = C2(|h2|²)`; everything downstream is a
//! rate-threshold event, no waveforms are simulated.

use crate::error::{Error, Result};
use crate::netmodel::{ChannelDraw, RelayId};

/// Powers in mW, thresholds as channel amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingConfig {
    pub p_t: f64,
    pub sigma2: f64,
    pub beta: f64,
    /// Layer split used by relays when forwarding both layers.
    pub beta_relay: f64,
    pub h1_thresh: f64,
    pub h2_thresh: f64,
}

impl CodingConfig {
    /// Config with `beta_relay = beta`.
    pub fn new(p_t: f64, sigma2: f64, beta: f64, h1_thresh: f64, h2_thresh: f64) -> Result<Self> {
        let config = CodingConfig {
            p_t,
            sigma2,
            beta,
            beta_relay: beta,
            h1_thresh,
            h2_thresh,
        };
        config.validate()?;
        Ok(config)
    }

    /// Config whose thresholds realize the given layer rates at this power.
    pub fn for_rates(p_t: f64, sigma2: f64, beta: f64, rates: ThresholdRates) -> Result<Self> {
        let beta_bar = 1.0 - beta;
        let snr = p_t / sigma2;
        let e1 = rates.r1.exp();
        let valid = 1.0 - beta_bar * e1;
        if !(valid > 0.0) {
            return Err(Error::domain(format!(
                "R1 = {} is not achievable with beta = {beta}",
                rates.r1
            )));
        }
        let h1_sq = (e1 - 1.0) / (snr * valid);
        let h2_sq = if rates.r2 == 0.0 {
            h1_sq
        } else if beta_bar > 0.0 {
            rates.r2.exp_m1() / (beta_bar * snr)
        } else {
            return Err(Error::domain("R2 > 0 needs beta < 1"));
        };
        CodingConfig::new(p_t, sigma2, beta, h1_sq.sqrt(), h2_sq.sqrt())
    }

    pub fn with_beta_relay(mut self, beta_relay: f64) -> Result<Self> {
        self.beta_relay = beta_relay;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_t > 0.0 && self.p_t.is_finite()) {
            return Err(Error::domain("P_t must be positive"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::domain("noise variance must be positive"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::domain(format!("beta = {} outside [0, 1]", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.beta_relay) {
            return Err(Error::domain(format!(
                "beta_relay = {} outside [0, 1]",
                self.beta_relay
            )));
        }
        if !(self.h1_thresh >= 0.0 && self.h1_thresh.is_finite() && self.h2_thresh.is_finite()) {
            return Err(Error::domain("thresholds must be finite and nonnegative"));
        }
        if self.h1_thresh > self.h2_thresh {
            return Err(Error::domain("threshold |h1| exceeds |h2|"));
        }
        Ok(())
    }

    pub fn beta_bar(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn beta_relay_bar(&self) -> f64 {
        1.0 - self.beta_relay
    }

    /// Transmit SNR `P_t / σ²`.
    pub fn snr(&self) -> f64 {
        self.p_t / self.sigma2
    }

    /// `|h1|²`, the smallest power gain that decodes `x1`.
    pub fn h1_power(&self) -> f64 {
        self.h1_thresh * self.h1_thresh
    }

    /// `|h2|²`, the smallest power gain that decodes both layers.
    pub fn h2_power(&self) -> f64 {
        self.h2_thresh * self.h2_thresh
    }
}

/// Layer rates in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRates {
    pub r1: f64,
    pub r2: f64,
}

impl ThresholdRates {
    pub fn total(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Rate of the first layer, `x2` treated as noise.
pub fn c1(g: f64, config: &CodingConfig) -> f64 {
    let p = config.p_t;
    (g * config.beta * p / (g * config.beta_bar() * p + config.sigma2)).ln_1p()
}

/// Rate of the second layer once `x1` is removed.
pub fn c2(g: f64, config: &CodingConfig) -> f64 {
    (g * config.beta_bar() * config.p_t / config.sigma2).ln_1p()
}

/// `C1` or `C2` selected by `level`.
pub fn c_level(level: u8, g: f64, config: &CodingConfig) -> Result<f64> {
    if !(g >= 0.0) {
        return Err(Error::domain(format!("gain must be nonnegative, got {g}")));
    }
    match level {
        1 => Ok(c1(g, config)),
        2 => Ok(c2(g, config)),
        _ => Err(Error::domain(format!("no coding level {level}"))),
    }
}

pub fn threshold_rates(config: &CodingConfig) -> ThresholdRates {
    let rates = ThresholdRates {
        r1: c1(config.h1_power(), config),
        r2: c2(config.h2_power(), config),
    };
    // The margin is exactly βσ² / (|h1|²β̄P_t + σ²), zero only when β = 0.
    debug_assert!(config.beta == 0.0 || 1.0 - config.beta_bar() * rates.r1.exp() > 0.0);
    rates
}

/// What a relay forwards in the second slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelayMode {
    /// Could not decode `x1`; stays silent.
    Idle,
    /// Decoded `x1` only.
    ForwardX1,
    /// Decoded both layers.
    ForwardBoth,
}

impl RelayMode {
    pub fn transmits(self) -> bool {
        self != RelayMode::Idle
    }
}

/// Classifies a relay from its source-link amplitude `|h_{t,i}|`.
/// Ties go to the better mode.
pub fn classify_relay(amp: f64, config: &CodingConfig) -> RelayMode {
    if amp >= config.h2_thresh {
        RelayMode::ForwardBoth
    } else if amp >= config.h1_thresh {
        RelayMode::ForwardX1
    } else {
        RelayMode::Idle
    }
}

/// Same as [`classify_relay`] for a power gain `|h_{t,i}|²`.
pub fn classify_gain(g: f64, config: &CodingConfig) -> RelayMode {
    if g >= config.h2_power() {
        RelayMode::ForwardBoth
    } else if g >= config.h1_power() {
        RelayMode::ForwardX1
    } else {
        RelayMode::Idle
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOutcome {
    pub decodes_x1: bool,
    pub decodes_x2: bool,
    /// The combined second-layer test on its own, regardless of `x1`.
    pub x2_layer_test: bool,
    pub received_rate: f64,
}

/// Decides what the destination recovers after both slots.
///
/// `relays`, `modes` and `powers` are parallel. Idle relays are silent
/// whatever power they were assigned. `x1` is decoded when
///
/// `ln(1 + (g_sd βP_t + Σ_F g βᵢP) / (g_sd β̄P_t + Σ_F g β̄ᵢP + σ²) + Σ_Θ g P / σ²) ≥ R1`
///
/// with `F` the relays forwarding both layers and `Θ` those forwarding `x1`
/// only; `x2` additionally needs `C2(g_sd + Σ_F g P / P_t) ≥ R2`.
pub fn destination_decode(
    draw: &ChannelDraw,
    relays: &[RelayId],
    modes: &[RelayMode],
    powers: &[f64],
    config: &CodingConfig,
    rates: &ThresholdRates,
) -> Result<DecodeOutcome> {
    if relays.len() != modes.len() || relays.len() != powers.len() {
        return Err(Error::contract(format!(
            "{} relays but {} modes and {} powers",
            relays.len(),
            modes.len(),
            powers.len()
        )));
    }
    let p_t = config.p_t;
    let mut both_gain = 0.0;
    let mut x1_only = 0.0;
    for ((&id, &mode), &power) in relays.iter().zip(modes).zip(powers) {
        if !(power >= 0.0) {
            return Err(Error::contract(format!("relay {id} has negative power")));
        }
        let g = *draw
            .g_rd
            .get(id.index())
            .ok_or_else(|| Error::contract(format!("relay {id} missing from channel draw")))?;
        match mode {
            RelayMode::Idle => {}
            RelayMode::ForwardX1 => x1_only += g * power,
            RelayMode::ForwardBoth => both_gain += g * power,
        }
    }

    let signal = draw.g_sd * config.beta * p_t + both_gain * config.beta_relay;
    let interference =
        draw.g_sd * config.beta_bar() * p_t + both_gain * config.beta_relay_bar() + config.sigma2;
    let rate1 = (signal / interference + x1_only / config.sigma2).ln_1p();
    let decodes_x1 = rate1 >= rates.r1;
    let x2_layer_test = c2(draw.g_sd + both_gain / p_t, config) >= rates.r2;
    let decodes_x2 = decodes_x1 && x2_layer_test;

    let received_rate = match (decodes_x1, decodes_x2) {
        (true, true) => rates.r1 + rates.r2,
        (true, false) => rates.r1,
        _ => 0.0,
    };
    Ok(DecodeOutcome {
        decodes_x1,
        decodes_x2,
        x2_layer_test,
        received_rate,
    })
}
