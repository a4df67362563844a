//! Scenario configuration.
//!
//! Documents are flat `key = value` lines grouped under `[section]` headers,
//! with `#` comments. Every key is optional; omitted keys take the
//! reference scenario values (source at the origin, destination 100 m away,
//! 2.4 GHz carrier, `μ = 3`, `σ² = -104 dBm`, `P_t = P_max = 6 dBm`,
//! `β = 0.75`, 20 random relays).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use toml::de::{DeTable, DeValue};

use relaysel::netmodel::dbm_to_linear;
use relaysel::{CodingConfig, PathLossModel, PowerConstraints, RelayId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    /// `section.key`, or empty for document-level problems.
    pub key: String,
    /// One-based line, when the offending text is in the document.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.key.is_empty(), self.line) {
            (true, Some(l)) => write!(f, "line {l}: {}", self.message),
            (true, None) => write!(f, "{}", self.message),
            (false, Some(l)) => write!(f, "line {l}: {}: {}", self.key, self.message),
            (false, None) => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Random,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdUnits {
    /// Thresholds are `|h|²`.
    Power,
    /// Thresholds are `|h|`.
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BestGains,
    MultipleFanOut,
    SingleFanOut,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::BestGains,
        Algorithm::MultipleFanOut,
        Algorithm::SingleFanOut,
        Algorithm::Random,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::BestGains => "best_gains",
            Algorithm::MultipleFanOut => "multiple_fan_out",
            Algorithm::SingleFanOut => "single_fan_out",
            Algorithm::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSplitMode {
    /// Source and relays share the split `β_i`; the layer rates follow it.
    Code,
    /// Only the relays' forwarded mix uses `β_i`.
    Relay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityMode {
    MonteCarlo,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    pub layout: Layout,
    /// Destination at `(d_tr, 0)`; the source is at the origin.
    pub d_tr: f64,
    pub k_r: usize,
    /// Random relays fill `0 < x < d_tr`, `|y| ≤ region_half_width`.
    pub region_half_width: f64,
    /// Placement seed; derived from the master seed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub relay_x: Vec<f64>,
    pub relay_y: Vec<f64>,
}

impl Default for TopologySection {
    fn default() -> Self {
        TopologySection {
            layout: Layout::Random,
            d_tr: 100.0,
            k_r: 20,
            region_half_width: 25.0,
            seed: None,
            relay_x: vec![],
            relay_y: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossSection {
    pub f_c: f64,
    /// Overrides `f_c` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_c: Option<f64>,
    pub d0: f64,
    pub mu: f64,
}

impl Default for PathLossSection {
    fn default() -> Self {
        PathLossSection {
            f_c: 2.4e9,
            lambda_c: None,
            d0: 1.0,
            mu: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodingSection {
    pub p_t_dbm: f64,
    pub sigma2_dbm: f64,
    pub beta: f64,
    /// Defaults to `beta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_relay: Option<f64>,
    pub h1_thresh: f64,
    pub h2_thresh: f64,
    pub threshold_units: ThresholdUnits,
}

impl Default for CodingSection {
    fn default() -> Self {
        CodingSection {
            p_t_dbm: 6.0,
            sigma2_dbm: -104.0,
            beta: 0.75,
            beta_relay: None,
            h1_thresh: 7.4e-11,
            h2_thresh: 1.25e-10,
            threshold_units: ThresholdUnits::Power,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintsSection {
    /// Defaults to `p_t_dbm`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max_dbm: Option<f64>,
    /// One cap per relay; empty for no caps.
    pub per_relay_max_dbm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub algorithms: Vec<Algorithm>,
    pub m: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    /// Source powers of the received-SNR sweeps.
    pub p_t_dbm_grid: Vec<f64>,
    /// Alternative axis: average received SNR at the destination, dB.
    /// Takes precedence over `p_t_dbm_grid` when nonempty.
    pub received_snr_db_grid: Vec<f64>,
    /// `P_i / P_t` values of the power-ratio sweep.
    pub power_ratios: Vec<f64>,
    /// Selector and relay count of the received-SNR sweeps.
    pub sweep_selector: Algorithm,
    pub sweep_relays: usize,
    pub beta_splits: Vec<f64>,
    pub beta_split_mode: BetaSplitMode,
    /// Random topologies per `m` in the power-allocation comparison.
    pub power_alloc_instances: usize,
    /// Transmit SNR grid `P_t/σ²` of the diversity sweep, dB.
    pub snr_db: Vec<f64>,
    pub k: f64,
    pub diversity_m: Vec<usize>,
    pub diversity_mode: DiversityMode,
    /// Random starts of the general placement search.
    pub placement_starts: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            algorithms: Algorithm::ALL.to_vec(),
            m: (1..=6).collect(),
            trials: 1_000_000,
            seed: 1,
            p_t_dbm_grid: vec![-6.0, -4.0, -2.0],
            received_snr_db_grid: vec![],
            power_ratios: vec![1.0, 0.5, 0.25],
            sweep_selector: Algorithm::SingleFanOut,
            sweep_relays: 3,
            beta_splits: vec![0.75, 0.6, 0.45],
            beta_split_mode: BetaSplitMode::Code,
            power_alloc_instances: 20,
            snr_db: vec![113.0, 116.0, 119.0],
            k: 1.0,
            diversity_m: vec![1, 2, 3],
            diversity_mode: DiversityMode::MonteCarlo,
            placement_starts: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: TopologySection,
    pub pathloss: PathLossSection,
    pub coding: CodingSection,
    pub constraints: ConstraintsSection,
    pub experiment: ExperimentSection,
}

/// One-based line of each `section.key` in a document.
fn key_lines(text: &str) -> Result<HashMap<String, usize>, ConfigError> {
    let doc = DeTable::parse(text).map_err(|e| ConfigError {
        key: String::new(),
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let mut out = HashMap::new();
    for (section, value) in doc.get_ref() {
        let name = section.get_ref().to_string();
        out.insert(name.clone(), line_of(text, section.span().start));
        if let DeValue::Table(table) = value.get_ref() {
            for (key, _) in table {
                out.insert(format!("{name}.{}", key.get_ref()), line_of(text, key.span().start));
            }
        }
    }
    Ok(out)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses, defaults and validates a configuration document.
pub fn load_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let lines = key_lines(text)?;
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError {
        key: String::new(),
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    config.validate().map_err(|(key, message)| ConfigError {
        line: lines.get(key).copied(),
        key: key.to_string(),
        message,
    })?;
    Ok(config)
}

/// Serializes a configuration in the document format.
pub fn to_document(config: &ScenarioConfig) -> String {
    toml::to_string(config).expect("configuration values are always representable")
}

type Invalid = (&'static str, String);

fn require(ok: bool, key: &'static str, msg: impl Into<String>) -> Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err((key, msg.into()))
    }
}

impl ScenarioConfig {
    /// Checks every invariant; errors name the offending `section.key`.
    pub fn validate(&self) -> Result<(), Invalid> {
        let t = &self.topology;
        require(t.d_tr > 0.0 && t.d_tr.is_finite(), "topology.d_tr", "must be positive")?;
        require(
            t.region_half_width >= 0.0 && t.region_half_width.is_finite(),
            "topology.region_half_width",
            "must be nonnegative",
        )?;
        if t.layout == Layout::Explicit {
            require(
                t.relay_x.len() == t.relay_y.len(),
                "topology.relay_y",
                format!("has {} entries but relay_x has {}", t.relay_y.len(), t.relay_x.len()),
            )?;
            require(
                t.relay_x.iter().chain(&t.relay_y).all(|v| v.is_finite()),
                "topology.relay_x",
                "coordinates must be finite",
            )?;
        }

        let p = &self.pathloss;
        require(p.f_c > 0.0 && p.f_c.is_finite(), "pathloss.f_c", "must be positive")?;
        if let Some(l) = p.lambda_c {
            require(l > 0.0 && l.is_finite(), "pathloss.lambda_c", "must be positive")?;
        }
        require(p.d0 > 0.0 && p.d0.is_finite(), "pathloss.d0", "must be positive")?;
        require(p.mu > 0.0 && p.mu.is_finite(), "pathloss.mu", "must be positive")?;

        let c = &self.coding;
        require(c.p_t_dbm.is_finite(), "coding.p_t_dbm", "must be finite")?;
        require(c.sigma2_dbm.is_finite(), "coding.sigma2_dbm", "must be finite")?;
        require((0.0..=1.0).contains(&c.beta), "coding.beta", format!("{} is outside [0, 1]", c.beta))?;
        if let Some(b) = c.beta_relay {
            require((0.0..=1.0).contains(&b), "coding.beta_relay", format!("{b} is outside [0, 1]"))?;
        }
        require(c.h1_thresh >= 0.0 && c.h1_thresh.is_finite(), "coding.h1_thresh", "must be nonnegative")?;
        require(c.h2_thresh.is_finite(), "coding.h2_thresh", "must be finite")?;
        require(c.h1_thresh <= c.h2_thresh, "coding.h2_thresh", "must not be below h1_thresh")?;

        let k = &self.constraints;
        if let Some(pm) = k.p_max_dbm {
            require(pm.is_finite(), "constraints.p_max_dbm", "must be finite")?;
        }
        if !k.per_relay_max_dbm.is_empty() {
            let n = self.relay_count();
            require(
                k.per_relay_max_dbm.len() == n,
                "constraints.per_relay_max_dbm",
                format!("needs one entry per relay ({n})"),
            )?;
        }

        let e = &self.experiment;
        require(!e.algorithms.is_empty(), "experiment.algorithms", "must not be empty")?;
        require(!e.m.is_empty() && !e.m.contains(&0), "experiment.m", "entries must be at least 1")?;
        require(e.trials > 0, "experiment.trials", "must be at least 1")?;
        require(
            e.p_t_dbm_grid.iter().all(|v| v.is_finite()),
            "experiment.p_t_dbm_grid",
            "must be finite",
        )?;
        require(
            e.received_snr_db_grid.iter().all(|v| v.is_finite()),
            "experiment.received_snr_db_grid",
            "must be finite",
        )?;
        require(
            e.power_ratios.iter().all(|&r| r > 0.0 && r.is_finite()),
            "experiment.power_ratios",
            "must be positive",
        )?;
        require(e.sweep_relays > 0, "experiment.sweep_relays", "must be at least 1")?;
        require(
            e.beta_splits.iter().all(|b| (0.0..=1.0).contains(b)),
            "experiment.beta_splits",
            "must lie in [0, 1]",
        )?;
        require(
            e.snr_db.windows(2).all(|w| w[0] < w[1]),
            "experiment.snr_db",
            "must be strictly increasing",
        )?;
        require(e.k > 0.0 && e.k.is_finite(), "experiment.k", "must be positive")?;
        require(
            !e.diversity_m.contains(&0),
            "experiment.diversity_m",
            "entries must be at least 1",
        )?;
        require(e.placement_starts >= 16, "experiment.placement_starts", "must be at least 16")?;
        Ok(())
    }

    pub fn relay_count(&self) -> usize {
        match self.topology.layout {
            Layout::Random => self.topology.k_r,
            Layout::Explicit => self.topology.relay_x.len(),
        }
    }

    pub fn path_loss(&self) -> relaysel::Result<PathLossModel> {
        let p = &self.pathloss;
        match p.lambda_c {
            Some(l) => PathLossModel::new(l, p.d0, p.mu),
            None => PathLossModel::from_carrier(p.f_c, p.d0, p.mu),
        }
    }

    /// Linear-unit coding configuration at source power `p_t_dbm`.
    pub fn coding_at(&self, p_t_dbm: f64) -> relaysel::Result<CodingConfig> {
        let c = &self.coding;
        let (h1, h2) = match c.threshold_units {
            ThresholdUnits::Power => (c.h1_thresh.sqrt(), c.h2_thresh.sqrt()),
            ThresholdUnits::Amplitude => (c.h1_thresh, c.h2_thresh),
        };
        CodingConfig::new(dbm_to_linear(p_t_dbm), dbm_to_linear(c.sigma2_dbm), c.beta, h1, h2)?
            .with_beta_relay(c.beta_relay.unwrap_or(c.beta))
    }

    pub fn coding(&self) -> relaysel::Result<CodingConfig> {
        self.coding_at(self.coding.p_t_dbm)
    }

    pub fn p_max_dbm(&self) -> f64 {
        self.constraints.p_max_dbm.unwrap_or(self.coding.p_t_dbm)
    }

    /// Constraints with total budget `p_max` (mW) and the configured caps.
    pub fn constraints_with(&self, p_max: f64) -> relaysel::Result<PowerConstraints> {
        let mut c = PowerConstraints::new(p_max)?;
        for (i, &cap) in self.constraints.per_relay_max_dbm.iter().enumerate() {
            c = c.with_cap(RelayId(i), dbm_to_linear(cap))?;
        }
        Ok(c)
    }

    pub fn constraints(&self) -> relaysel::Result<PowerConstraints> {
        self.constraints_with(dbm_to_linear(self.p_max_dbm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference_scenario() {
        let cfg = load_config("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.topology.d_tr, 100.0);
        assert_eq!(cfg.topology.k_r, 20);
        assert_eq!(cfg.pathloss.f_c, 2.4e9);
        assert_eq!(cfg.pathloss.d0, 1.0);
        assert_eq!(cfg.pathloss.mu, 3.0);
        assert_eq!(cfg.coding.sigma2_dbm, -104.0);
        assert_eq!(cfg.coding.p_t_dbm, 6.0);
        assert_eq!(cfg.p_max_dbm(), 6.0);
        assert_eq!(cfg.coding.beta, 0.75);
        assert_eq!(cfg.coding.h1_thresh, 7.4e-11);
        assert_eq!(cfg.coding.h2_thresh, 1.25e-10);
        let coding = cfg.coding().unwrap();
        assert_eq!(coding.beta_relay, 0.75);
        assert!((coding.h1_power() - 7.4e-11).abs() < 1e-24);
    }

    #[test]
    fn out_of_range_beta_names_key_and_line() {
        let err = load_config("# split\n[coding]\nbeta=1.5\n").unwrap_err();
        assert_eq!(err.key, "coding.beta");
        assert_eq!(err.line, Some(3));
        assert!(err.to_string().contains("coding.beta"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load_config("[coding]\nbeta = 0.5\nbogus = 1\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("bogus"), "{err}");
        let err = load_config("[nonsense]\nx = 1\n").unwrap_err();
        assert!(err.message.contains("nonsense"), "{err}");
    }

    #[test]
    fn malformed_document_reports_line() {
        let err = load_config("[coding]\nbeta = = 2\n").unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn document_round_trips() {
        let text = "[topology]\nlayout = \"explicit\"\nrelay_x = [10.0, 55.5]\nrelay_y = [0.0, -3.25]\n\
                    [coding]\nbeta_relay = 0.6\nthreshold_units = \"amplitude\"\n\
                    [constraints]\np_max_dbm = 3.0\n\
                    [experiment]\nalgorithms = [\"random\", \"best_gains\"]\nm = [2, 4]\ntrials = 5000\n";
        let cfg = load_config(text).unwrap();
        let again = load_config(&to_document(&cfg)).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(load_config(&to_document(&ScenarioConfig::default())).unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn explicit_layout_checks_lengths() {
        let err = load_config("[topology]\nlayout = \"explicit\"\nrelay_x = [1.0]\nrelay_y = []\n").unwrap_err();
        assert_eq!(err.key, "topology.relay_y");
        let err = load_config("[constraints]\nper_relay_max_dbm = [0.0]\n").unwrap_err();
        assert_eq!(err.key, "constraints.per_relay_max_dbm");
    }

    #[test]
    fn amplitude_units_keep_thresholds() {
        let cfg = load_config("[coding]\nthreshold_units = \"amplitude\"\n").unwrap();
        assert_eq!(cfg.coding().unwrap().h1_thresh, 7.4e-11);
    }
}
