//! Geometry, log-distance path loss and Rayleigh channel sampling.
//!
//! Mean power gains follow `G² = (λ_c / 4π d0)² (d / d0)^-μ = χ d^-μ`. Under
//! Rayleigh fading the squared magnitude `|h|²` of each link is exponential
//! with that mean, so draws are taken directly at the `|h|²` level.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Speed of light in m/s, used to turn a carrier frequency into a wavelength.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePosition {
    pub x: f64,
    pub y: f64,
}

impl NodePosition {
    pub const fn new(x: f64, y: f64) -> Self {
        NodePosition { x, y }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance between two nodes.
pub fn distance(p: NodePosition, q: NodePosition) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Index of a candidate relay within a [`Topology`].
///
/// Stored zero-based; displayed one-based to match the usual `1..K_r` labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelayId(pub usize);

impl RelayId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for RelayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

/// Axis-aligned rectangle used to scatter relays at random.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl RelayRegion {
    /// The strip strictly between source `(0,0)` and destination `(d_tr,0)`,
    /// `half_width` meters either side of the axis.
    pub fn between(d_tr: f64, half_width: f64) -> Self {
        RelayRegion {
            x_min: 0.0,
            x_max: d_tr,
            y_min: -half_width,
            y_max: half_width,
        }
    }
}

/// Source, destination and the ordered list of candidate relays.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub source: NodePosition,
    pub destination: NodePosition,
    pub relays: Vec<NodePosition>,
}

impl Topology {
    pub fn new(
        source: NodePosition,
        destination: NodePosition,
        relays: Vec<NodePosition>,
    ) -> Result<Self> {
        if !source.is_finite() || !destination.is_finite() {
            return Err(Error::domain("source and destination must be finite"));
        }
        if source == destination {
            return Err(Error::domain("source and destination coincide"));
        }
        if let Some(i) = relays.iter().position(|r| !r.is_finite()) {
            return Err(Error::domain(format!("relay {} has a non-finite coordinate", i + 1)));
        }
        Ok(Topology {
            source,
            destination,
            relays,
        })
    }

    /// Source at the origin, destination at `(d_tr, 0)`, relays on the axis.
    pub fn line(d_tr: f64, relay_positions: &[f64]) -> Result<Self> {
        Topology::new(
            NodePosition::new(0.0, 0.0),
            NodePosition::new(d_tr, 0.0),
            relay_positions
                .iter()
                .map(|&x| NodePosition::new(x, 0.0))
                .collect(),
        )
    }

    /// Source at the origin, destination at `(d_tr, 0)` and `k_r` relays
    /// placed uniformly in `region`.
    pub fn random<R: Rng + ?Sized>(
        d_tr: f64,
        k_r: usize,
        region: RelayRegion,
        rng: &mut R,
    ) -> Result<Self> {
        if !(region.x_max > region.x_min && region.y_max >= region.y_min) {
            return Err(Error::domain("relay region is empty"));
        }
        let relays = (0..k_r)
            .map(|_| {
                let x = rng.gen_range(region.x_min..region.x_max);
                let y = if region.y_max > region.y_min {
                    rng.gen_range(region.y_min..region.y_max)
                } else {
                    region.y_min
                };
                NodePosition::new(x, y)
            })
            .collect();
        Topology::new(
            NodePosition::new(0.0, 0.0),
            NodePosition::new(d_tr, 0.0),
            relays,
        )
    }

    pub fn relay_count(&self) -> usize {
        self.relays.len()
    }

    pub fn relay(&self, id: RelayId) -> NodePosition {
        self.relays[id.0]
    }

    pub fn relay_ids(&self) -> impl Iterator<Item = RelayId> {
        (0..self.relays.len()).map(RelayId)
    }

    /// Source-to-destination distance `d_{t,r}`.
    pub fn span(&self) -> f64 {
        distance(self.source, self.destination)
    }
}

/// Log-distance path-loss model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    lambda_c: f64,
    d0: f64,
    mu: f64,
    chi: f64,
}

impl PathLossModel {
    pub fn new(lambda_c: f64, d0: f64, mu: f64) -> Result<Self> {
        if !(lambda_c > 0.0 && lambda_c.is_finite()) {
            return Err(Error::domain("carrier wavelength must be positive"));
        }
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(Error::domain("reference distance must be positive"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain("path loss exponent must be positive"));
        }
        let chi = (lambda_c / (4.0 * PI * d0)).powi(2) * d0.powf(mu);
        Ok(PathLossModel {
            lambda_c,
            d0,
            mu,
            chi,
        })
    }

    /// Model for carrier frequency `f_c` in Hz.
    pub fn from_carrier(f_c: f64, d0: f64, mu: f64) -> Result<Self> {
        if !(f_c > 0.0) {
            return Err(Error::domain("carrier frequency must be positive"));
        }
        PathLossModel::new(SPEED_OF_LIGHT / f_c, d0, mu)
    }

    pub fn lambda_c(&self) -> f64 {
        self.lambda_c
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `χ = (λ_c / 4π d0)² d0^μ`, so that `G² = χ d^-μ`.
    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn mean_gain(&self, d: f64) -> Result<f64> {
        mean_gain(self, d)
    }
}

/// Mean power gain `E|h|²` of a link of length `d`.
pub fn mean_gain(model: &PathLossModel, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("link length must be positive, got {d}")));
    }
    Ok((model.lambda_c / (4.0 * PI * model.d0)).powi(2) * (d / model.d0).powf(-model.mu))
}

/// One fading realization: `|h|²` for the direct link and for every
/// source-relay and relay-destination link, indexed by [`RelayId`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelDraw {
    pub g_sd: f64,
    pub g_sr: Vec<f64>,
    pub g_rd: Vec<f64>,
}

impl ChannelDraw {
    pub fn relay_count(&self) -> usize {
        self.g_sr.len()
    }
}

/// Per-link mean power gains, precomputed once per topology.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub sd: f64,
    pub sr: Vec<f64>,
    pub rd: Vec<f64>,
}

impl LinkGains {
    pub fn from_topology(topology: &Topology, model: &PathLossModel) -> Result<Self> {
        let sd = mean_gain(model, topology.span())?;
        let mut sr = Vec::with_capacity(topology.relay_count());
        let mut rd = Vec::with_capacity(topology.relay_count());
        for (i, &relay) in topology.relays.iter().enumerate() {
            let (a, b) = (distance(topology.source, relay), distance(relay, topology.destination));
            if a == 0.0 || b == 0.0 {
                return Err(Error::domain(format!(
                    "relay {} coincides with an endpoint",
                    i + 1
                )));
            }
            sr.push(mean_gain(model, a)?);
            rd.push(mean_gain(model, b)?);
        }
        Ok(LinkGains { sd, sr, rd })
    }

    /// Builds gains directly, bypassing geometry.
    pub fn from_parts(sd: f64, sr: Vec<f64>, rd: Vec<f64>) -> Result<Self> {
        if sr.len() != rd.len() {
            return Err(Error::contract("source-relay and relay-destination gains differ in length"));
        }
        let ok = |g: f64| g > 0.0 && g.is_finite();
        if !ok(sd) || !sr.iter().chain(rd.iter()).all(|&g| ok(g)) {
            return Err(Error::domain("mean gains must be positive and finite"));
        }
        Ok(LinkGains { sd, sr, rd })
    }

    pub fn relay_count(&self) -> usize {
        self.sr.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelDraw {
        let mut draw = ChannelDraw::default();
        self.sample_into(&mut draw, rng);
        draw
    }

    /// Fills `draw` in place: direct link first, then all source-relay
    /// links, then all relay-destination links.
    pub fn sample_into<R: Rng + ?Sized>(&self, draw: &mut ChannelDraw, rng: &mut R) {
        draw.g_sd = self.sd * rng.sample::<f64, _>(Exp1);
        draw.g_sr.clear();
        draw.g_sr
            .extend(self.sr.iter().map(|&m| m * rng.sample::<f64, _>(Exp1)));
        draw.g_rd.clear();
        draw.g_rd
            .extend(self.rd.iter().map(|&m| m * rng.sample::<f64, _>(Exp1)));
    }
}

/// Draws one channel realization for `topology`.
pub fn sample_channels<R: Rng + ?Sized>(
    topology: &Topology,
    model: &PathLossModel,
    rng: &mut R,
) -> Result<ChannelDraw> {
    Ok(LinkGains::from_topology(topology, model)?.sample(rng))
}

pub fn dbm_to_linear(p_dbm: f64) -> f64 {
    10f64.powf(p_dbm / 10.0)
}

pub fn linear_to_dbm(p_mw: f64) -> f64 {
    10.0 * p_mw.log10()
}
