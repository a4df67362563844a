//! Rate-maximizing relay locations.
//!
//! On the three-node line the high-SNR expected rate is a polynomial of
//! degree `2μ` in the relay position `d`. For `μ = 2` its stationary points
//! are the real roots of a cubic, solved in closed form; other exponents use
//! a dense grid with golden-section refinement. The general problem places
//! `m` relays anywhere in the upper half-strip and is solved by multi-start
//! pattern search on the closed-form objective.

use rayon::prelude::*;
use rand::Rng;

use crate::error::{Error, Result};
use crate::netmodel::{LinkGains, NodePosition, PathLossModel, Topology};
use crate::outage::{asymptotic_rate_loss, AsymptoticInputs, LineAsymptoticParams, LineNetwork};
use crate::rng::substream;
use crate::sccode::{threshold_rates, CodingConfig, ThresholdRates};

/// Grid size used by [`line_optimum`] when no closed form applies.
pub const LINE_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePlacementProblem {
    pub d_tr: f64,
    pub mu: u32,
    pub params: LineAsymptoticParams,
    /// `P_t / P_1`.
    pub power_ratio: f64,
    pub rates: ThresholdRates,
    pub chi: f64,
}

impl LinePlacementProblem {
    pub fn new(
        d_tr: f64,
        mu: u32,
        params: LineAsymptoticParams,
        power_ratio: f64,
        rates: ThresholdRates,
        chi: f64,
    ) -> Result<Self> {
        if !(d_tr > 0.0 && d_tr.is_finite()) {
            return Err(Error::domain("d_tr must be positive"));
        }
        if mu == 0 {
            return Err(Error::domain("mu must be a positive integer"));
        }
        if !(power_ratio >= 0.0) || !(chi > 0.0) {
            return Err(Error::domain("power ratio and chi must be positive"));
        }
        if !(params.g1 >= 0.0 && params.g2 >= 0.0) {
            return Err(Error::domain("G1 and G2 must be nonnegative"));
        }
        Ok(LinePlacementProblem {
            d_tr,
            mu,
            params,
            power_ratio,
            rates,
            chi,
        })
    }

    /// Problem for one relay at power `p1` between the endpoints of a
    /// scenario with the given span.
    pub fn from_scenario(d_tr: f64, model: &PathLossModel, config: &CodingConfig, p1: f64) -> Result<Self> {
        let mu = model.mu();
        if mu.fract() != 0.0 || mu < 1.0 {
            return Err(Error::domain(format!("line placement needs an integer mu, got {mu}")));
        }
        if !(p1 > 0.0) {
            return Err(Error::domain("relay power must be positive"));
        }
        let rates = threshold_rates(config);
        let params = LineAsymptoticParams::new(config, &rates)?;
        LinePlacementProblem::new(d_tr, mu as u32, params, config.p_t / p1, rates, model.chi())
    }

    pub fn network(&self) -> LineNetwork {
        LineNetwork {
            d_tr: self.d_tr,
            mu: self.mu as f64,
            chi: self.chi,
            power_ratio: self.power_ratio,
            params: self.params,
        }
    }

    /// Rate as a polynomial in `d`, lowest degree first.
    pub fn rate_polynomial(&self) -> Vec<f64> {
        let net = self.network();
        let a1 = outage_polynomial(self, net.scale(1), 1.0);
        let a2 = outage_polynomial(self, net.scale(2), 0.5);
        let (r1, r2) = (self.rates.r1, self.rates.r2);
        // R1 (1 - a1) + R2 (1 - a1)(1 - a2)
        let one_minus = |p: &[f64]| {
            let mut q: Vec<f64> = p.iter().map(|c| -c).collect();
            q[0] += 1.0;
            q
        };
        let (b1, b2) = (one_minus(&a1), one_minus(&a2));
        let prod = poly_mul(&b1, &b2);
        let mut out = vec![0.0; prod.len()];
        for (i, c) in b1.iter().enumerate() {
            out[i] += r1 * c;
        }
        for (i, c) in prod.iter().enumerate() {
            out[i] += r2 * c;
        }
        out
    }
}

/// `scale · (d^μ + w·ratio·(d_tr − d)^μ)` expanded in powers of `d`.
fn outage_polynomial(p: &LinePlacementProblem, scale: f64, w: f64) -> Vec<f64> {
    let mu = p.mu as usize;
    let mut c = vec![0.0; mu + 1];
    c[mu] = 1.0;
    let mut binom = 1.0;
    for k in 0..=mu {
        // C(μ,k) d_tr^(μ-k) (-d)^k
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[k] += w * p.power_ratio * binom * p.d_tr.powi((mu - k) as i32) * sign;
        binom = binom * (mu - k) as f64 / (k + 1) as f64;
    }
    c.iter().map(|x| x * scale).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &k)| i as f64 * k).collect()
}

/// Real roots of a polynomial of degree at most three, lowest degree first.
/// Leading coefficients negligible against the rest are dropped.
pub fn real_roots_upto_cubic(c: &[f64]) -> Vec<f64> {
    let mut c = c.to_vec();
    let size = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    while c.len() > 1 && c.last().is_some_and(|x| x.abs() <= 1e-14 * size) {
        c.pop();
    }
    match c.len() {
        0 | 1 => vec![],
        2 => vec![-c[0] / c[1]],
        3 => {
            let (a, b, k) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * k;
            if disc < 0.0 {
                return vec![];
            }
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let mut r = vec![];
            if q != 0.0 {
                r.push(q / a);
                r.push(k / q);
            } else {
                r.push(0.0);
            }
            r
        }
        _ => {
            let (a, b, k, d) = (c[3], c[2], c[1], c[0]);
            let (b, k, d) = (b / a, k / a, d / a);
            // Depressed cubic t³ + pt + q with x = t − b/3.
            let p = k - b * b / 3.0;
            let q = 2.0 * b * b * b / 27.0 - b * k / 3.0 + d;
            let shift = -b / 3.0;
            let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
            let mut roots = if disc > 0.0 {
                let s = disc.sqrt();
                vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
            } else if p == 0.0 {
                vec![shift]
            } else {
                let r = 2.0 * (-p / 3.0).sqrt();
                let phi = ((3.0 * q) / (p * r)).clamp(-1.0, 1.0).acos() / 3.0;
                (0..3)
                    .map(|j| r * (phi - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos() + shift)
                    .collect()
            };
            // One Newton step against cancellation.
            let dc = poly_derivative(&c);
            for x in roots.iter_mut() {
                let slope = poly_eval(&dc, *x);
                if slope != 0.0 {
                    *x -= poly_eval(&c, *x) / slope;
                }
            }
            roots
        }
    }
}

/// High-SNR expected rate with the relay at `d`, including the cross term
/// between layers, outages uncapped.
pub fn line_rate(d: f64, problem: &LinePlacementProblem) -> Result<f64> {
    if !(d > 0.0 && d < problem.d_tr) {
        return Err(Error::domain(format!("relay position {d} outside (0, {})", problem.d_tr)));
    }
    let net = problem.network();
    let a1 = net.scale(1) * net.shape(1, d);
    let a2 = net.scale(2) * net.shape(2, d);
    let r = problem.rates;
    Ok(r.r1 * (1.0 - a1) + r.r2 * (1.0 - a1) * (1.0 - a2))
}

/// Interior grid `d_tr · i / n`, `i = 1..n-1`, and its argmax (lowest on ties).
fn grid_argmax(problem: &LinePlacementProblem, n: usize) -> Result<(usize, f64)> {
    let mut best = (1, f64::NEG_INFINITY);
    for i in 1..n {
        let v = line_rate(problem.d_tr * i as f64 / n as f64, problem)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// Maximizes `f` on `[lo, hi]`, assuming it is unimodal there.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Rate-maximizing relay position `d̄` in `(0, d_tr)`.
///
/// When the supremum sits at an endpoint, the best interior grid point is
/// returned instead.
pub fn line_optimum(problem: &LinePlacementProblem) -> Result<f64> {
    let d_tr = problem.d_tr;
    let n = LINE_GRID;
    let step = d_tr / n as f64;
    let (gi, gv) = grid_argmax(problem, n)?;
    let mut best = (gi as f64 * step, gv);
    let poly = problem.rate_polynomial();
    if problem.mu == 2 {
        for r in real_roots_upto_cubic(&poly_derivative(&poly)) {
            if r > 0.0 && r < d_tr {
                let v = line_rate(r, problem)?;
                if v >= best.1 {
                    best = (r, v);
                }
            }
        }
    } else if gi > 1 && gi < n - 1 {
        let f = |d: f64| line_rate(d, problem).unwrap_or(f64::NEG_INFINITY);
        let d = golden_max(f, (gi - 1) as f64 * step, (gi + 1) as f64 * step, 1e-10 * d_tr);
        let v = f(d);
        if v >= best.1 {
            best = (d, v);
        }
    }
    // The supremum can sit at an endpoint inside the last grid cell.
    let (lo, hi) = (poly_eval(&poly, 0.0), poly_eval(&poly, d_tr));
    if lo.max(hi) > best.1 {
        return Ok(if lo >= hi { step } else { d_tr - step });
    }
    Ok(best.0)
}

/// `m` relays sharing `P_max` equally, placed anywhere with `0 < a < d_tr`
/// and `b > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralPlacementProblem {
    pub m: usize,
    pub d_tr: f64,
    pub model: PathLossModel,
    pub config: CodingConfig,
    pub p_max: f64,
    /// Random starts; at least [`MIN_STARTS`].
    pub starts: usize,
    pub seed: u64,
}

pub const MIN_STARTS: usize = 16;

/// Lower bound of `b` (and margin of `a`) relative to `d_tr`.
pub const BOX_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralOptimum {
    pub points: Vec<NodePosition>,
    /// Closed-form expected rate at `points`.
    pub rate: f64,
    /// Closed-form expected rate at each start.
    pub start_rates: Vec<f64>,
}

impl GeneralPlacementProblem {
    pub fn new(
        m: usize,
        d_tr: f64,
        model: PathLossModel,
        config: CodingConfig,
        p_max: f64,
        seed: u64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("m must be at least 1"));
        }
        if !(d_tr > 0.0) || !(p_max > 0.0) {
            return Err(Error::domain("d_tr and P_max must be positive"));
        }
        config.validate()?;
        Ok(GeneralPlacementProblem {
            m,
            d_tr,
            model,
            config,
            p_max,
            starts: MIN_STARTS,
            seed,
        })
    }

    /// Search box `[lo, hi]` for `a` and `b`.
    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let e = BOX_MARGIN * self.d_tr;
        ((e, self.d_tr - e), (e, self.d_tr))
    }

    fn rates(&self) -> ThresholdRates {
        threshold_rates(&self.config)
    }

    /// Closed-form rate shortfall with relays at `coords = [a1, b1, a2, ...]`.
    pub fn loss(&self, coords: &[f64]) -> Result<f64> {
        if coords.len() != 2 * self.m {
            return Err(Error::contract("coordinate vector has the wrong length"));
        }
        let relays = coords.chunks(2).map(|c| NodePosition::new(c[0], c[1])).collect();
        let topo = Topology::new(NodePosition::new(0.0, 0.0), NodePosition::new(self.d_tr, 0.0), relays)?;
        let gains = LinkGains::from_topology(&topo, &self.model)?;
        let ratio = self.p_max / self.m as f64 / self.config.p_t;
        let inputs = AsymptoticInputs {
            g_sd: gains.sd,
            g_sr: gains.sr,
            g_rd: gains.rd,
            power_ratio: vec![ratio; self.m],
            snr: self.config.snr(),
            beta: self.config.beta,
            rates: self.rates(),
        };
        asymptotic_rate_loss(&inputs)
    }

    pub fn rate(&self, coords: &[f64]) -> Result<f64> {
        Ok(self.rates().total() - self.loss(coords)?)
    }
}

/// Coordinate pattern search from `x` inside the box; accepts only strict
/// improvements.
fn pattern_search(problem: &GeneralPlacementProblem, mut x: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    let ((alo, ahi), (blo, bhi)) = problem.bounds();
    let clamp = |i: usize, v: f64| if i.is_multiple_of(2) { v.clamp(alo, ahi) } else { v.clamp(blo, bhi) };
    let mut f = problem.loss(&x)?;
    let mut step = 0.1 * problem.d_tr;
    let stop = 1e-9 * problem.d_tr;
    while step > stop {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = clamp(i, x[i] + dir * step);
                if y[i] == x[i] {
                    continue;
                }
                let fy = problem.loss(&y)?;
                if fy < f {
                    // Keep going in the same direction while it pays.
                    let mut z = y.clone();
                    loop {
                        z[i] = clamp(i, z[i] + dir * step);
                        let fz = problem.loss(&z)?;
                        if fz < fy.min(f) && z[i] != y[i] {
                            y = z.clone();
                            f = fz;
                        } else {
                            break;
                        }
                    }
                    f = f.min(fy);
                    x = y;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((f, x))
}

/// Axis starts of [`general_optimum`]: all relays together at evenly
/// spaced points between source and destination.
pub const AXIS_STARTS: usize = 8;

/// Multi-start search for the rate-maximizing relay locations.
///
/// Starts are the [`AXIS_STARTS`] axis points followed by `problem.starts`
/// uniform draws from the box. The best of all locally refined starts is
/// returned; ties go to the earliest start.
pub fn general_optimum(problem: &GeneralPlacementProblem) -> Result<GeneralOptimum> {
    let ((alo, ahi), (blo, bhi)) = problem.bounds();
    let axis = (1..=AXIS_STARTS).map(|j| {
        let a = problem.d_tr * j as f64 / (AXIS_STARTS + 1) as f64;
        (0..problem.m).flat_map(|_| [a, blo]).collect::<Vec<f64>>()
    });
    let random = (0..problem.starts.max(MIN_STARTS)).map(|k| {
        let mut rng = substream(problem.seed, k as u64);
        (0..problem.m)
            .flat_map(|_| [rng.gen_range(alo..ahi), rng.gen_range(blo..bhi)])
            .collect::<Vec<f64>>()
    });
    let starts: Vec<Vec<f64>> = axis.chain(random).collect();
    let start_rates = starts
        .iter()
        .map(|s| problem.rate(s))
        .collect::<Result<Vec<_>>>()?;
    let refined = starts
        .into_par_iter()
        .map(|s| pattern_search(problem, s))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in refined.iter().enumerate() {
        if r.0 < refined[best].0 {
            best = i;
        }
    }
    let (loss, x) = &refined[best];
    Ok(GeneralOptimum {
        points: x.chunks(2).map(|c| NodePosition::new(c[0], c[1])).collect(),
        rate: problem.rates().total() - loss,
        start_rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::dbm_to_linear;
    use crate::rng::SimRng;

    fn default_config() -> CodingConfig {
        CodingConfig::new(
            dbm_to_linear(6.0),
            dbm_to_linear(-104.0),
            0.75,
            7.4e-11f64.sqrt(),
            1.25e-10f64.sqrt(),
        )
        .unwrap()
    }

    fn default_model() -> PathLossModel {
        PathLossModel::from_carrier(2.4e9, 1.0, 3.0).unwrap()
    }

    fn default_line() -> LinePlacementProblem {
        let cfg = default_config();
        LinePlacementProblem::from_scenario(100.0, &default_model(), &cfg, cfg.p_t).unwrap()
    }

    fn synthetic(d_tr: f64, mu: u32, g1: f64, g2: f64, ratio: f64, rates: ThresholdRates) -> LinePlacementProblem {
        LinePlacementProblem::new(d_tr, mu, LineAsymptoticParams { g1, g2 }, ratio, rates, 1.0).unwrap()
    }

    /// `G` that puts the level-`l` outage near `target` at mid-span.
    fn g_for(target: f64, d_tr: f64, mu: u32) -> f64 {
        (target / (d_tr.powi(mu as i32) * (d_tr / 2.0).powi(mu as i32))).sqrt()
    }

    #[test]
    fn zero_outage_limit() {
        let rates = ThresholdRates { r1: 0.6, r2: 0.9 };
        let p = synthetic(100.0, 3, 0.0, 0.0, 1.0, rates);
        for d in [1.0, 30.0, 99.0] {
            assert_eq!(line_rate(d, &p).unwrap(), 1.5);
        }
    }

    #[test]
    fn symmetric_first_layer_only() {
        let rates = ThresholdRates { r1: 1.0, r2: 0.0 };
        let p = synthetic(100.0, 2, g_for(0.1, 100.0, 2), 0.0, 1.0, rates);
        for d in [10.0, 25.0, 40.0] {
            let (a, b) = (line_rate(d, &p).unwrap(), line_rate(100.0 - d, &p).unwrap());
            assert!((a - b).abs() < 1e-12);
        }
        assert!((line_optimum(&p).unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn default_line_golden_values() {
        let p = default_line();
        let r = line_rate(30.0, &p).unwrap();
        assert!((r - 1.622_844_340_137_362_8).abs() < 1e-9, "{r}");
        let d = line_optimum(&p).unwrap();
        assert!((d - 45.354_574_990_730_026).abs() < 1e-6, "{d}");
    }

    #[test]
    fn polynomial_matches_direct_evaluation() {
        for mu in 1..=5 {
            let rates = ThresholdRates { r1: 0.7, r2: 1.1 };
            let p = synthetic(80.0, mu, g_for(0.05, 80.0, mu), g_for(0.08, 80.0, mu), 1.7, rates);
            let poly = p.rate_polynomial();
            assert_eq!(poly.len(), 2 * mu as usize + 1);
            for d in [3.0, 17.5, 40.0, 79.0] {
                let a = poly_eval(&poly, d);
                let b = line_rate(d, &p).unwrap();
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "mu {mu} d {d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rate_has_degree_two_mu() {
        // The (2μ+1)-th divided difference of a degree-2μ polynomial vanishes
        // while the 2μ-th equals the leading coefficient.
        for mu in 1..=4u32 {
            let rates = ThresholdRates { r1: 0.7, r2: 1.1 };
            let p = synthetic(1.0, mu, g_for(0.2, 1.0, mu), g_for(0.3, 1.0, mu), 1.3, rates);
            let n = 2 * mu as usize + 1;
            let xs: Vec<f64> = (0..=n).map(|i| 0.05 + 0.9 * i as f64 / n as f64).collect();
            let mut dd: Vec<f64> = xs.iter().map(|&x| line_rate(x, &p).unwrap()).collect();
            let mut lead = 0.0;
            for order in 1..=n {
                dd = (0..dd.len() - 1)
                    .map(|i| (dd[i + 1] - dd[i]) / (xs[i + order] - xs[i]))
                    .collect();
                if order == n - 1 {
                    lead = dd[0];
                }
            }
            let top = *p.rate_polynomial().last().unwrap();
            assert!((lead - top).abs() < 1e-6 * top.abs(), "mu {mu}: {lead} vs {top}");
            assert!(dd[0].abs() < 1e-6 * top.abs(), "mu {mu}: residual {}", dd[0]);
        }
    }

    #[test]
    fn cubic_solver_examples() {
        let mut r = real_roots_upto_cubic(&[-6.0, 11.0, -6.0, 1.0]);
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = real_roots_upto_cubic(&[-8.0, 0.0, 0.0, 1.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-12);
        assert_eq!(real_roots_upto_cubic(&[1.0, 0.0, 1.0]), Vec::<f64>::new());
        assert_eq!(real_roots_upto_cubic(&[-3.0, 1.5]), vec![2.0]);
    }

    #[test]
    fn closed_form_and_grid_agree_for_square_law() {
        let mut rng: SimRng = substream(5, 0);
        for _ in 0..50 {
            let d_tr = rng.gen_range(20.0..200.0);
            let rates = ThresholdRates {
                r1: rng.gen_range(0.2..1.5),
                r2: rng.gen_range(0.0..1.5),
            };
            let p = synthetic(
                d_tr,
                2,
                g_for(rng.gen_range(1e-3..0.2), d_tr, 2),
                g_for(rng.gen_range(1e-3..0.2), d_tr, 2),
                rng.gen_range(0.25..4.0),
                rates,
            );
            let d = line_optimum(&p).unwrap();
            let (gi, _) = grid_argmax(&p, 100_000).unwrap();
            let g = d_tr * gi as f64 / 100_000.0;
            assert!((d - g).abs() <= 1e-3 * d_tr, "{d} vs {g}");
        }
    }

    #[test]
    fn strong_relay_limit_goes_to_source() {
        let rates = ThresholdRates { r1: 1.0, r2: 1.0 };
        for mu in [2, 3] {
            let p = synthetic(100.0, mu, g_for(0.1, 100.0, mu), g_for(0.1, 100.0, mu), 0.0, rates);
            let d = line_optimum(&p).unwrap();
            assert!(d > 0.0 && d <= 100.0 / LINE_GRID as f64 + 1e-12, "{d}");
        }
    }

    #[test]
    fn optimum_invariant_under_length_rescaling() {
        let rates = ThresholdRates { r1: 0.9, r2: 1.2 };
        for mu in [2u32, 3, 4] {
            let base = synthetic(100.0, mu, g_for(0.05, 100.0, mu), g_for(0.1, 100.0, mu), 1.5, rates);
            let s: f64 = 3.7;
            let scaled = LinePlacementProblem {
                d_tr: base.d_tr * s,
                chi: base.chi * s.powi(mu as i32),
                ..base
            };
            let (a, b) = (line_optimum(&base).unwrap(), line_optimum(&scaled).unwrap());
            assert!((a / base.d_tr - b / scaled.d_tr).abs() < 1e-6, "mu {mu}: {a} vs {b}");
        }
    }

    #[test]
    fn line_rejects_bad_inputs() {
        let p = default_line();
        assert!(line_rate(0.0, &p).is_err());
        assert!(line_rate(100.0, &p).is_err());
        let model = PathLossModel::from_carrier(2.4e9, 1.0, 2.5).unwrap();
        assert!(LinePlacementProblem::from_scenario(100.0, &model, &default_config(), 1.0).is_err());
    }

    fn general(m: usize) -> GeneralPlacementProblem {
        let cfg = default_config();
        GeneralPlacementProblem::new(m, 100.0, default_model(), cfg, cfg.p_t, 7).unwrap()
    }

    #[test]
    fn single_relay_general_matches_line() {
        let opt = general_optimum(&general(1)).unwrap();
        let d_bar = line_optimum(&default_line()).unwrap();
        let a = opt.points[0].x;
        assert!((a - d_bar).abs() < 0.02 * d_bar, "{a} vs {d_bar}");
    }

    #[test]
    fn general_optimum_dominates_starts_and_probe() {
        let p = general(2);
        let opt = general_optimum(&p).unwrap();
        assert!(opt.start_rates.len() >= MIN_STARTS);
        assert!(opt.start_rates.iter().all(|&r| opt.rate >= r));
        let probe = p.rate(&[50.0, 1.0, 50.0, 1.0]).unwrap();
        assert!(opt.rate >= probe);
        let ((alo, ahi), (blo, bhi)) = p.bounds();
        for q in &opt.points {
            assert!(q.x >= alo && q.x <= ahi && q.y >= blo && q.y <= bhi);
        }
    }

    #[test]
    fn six_relay_optimum_does_not_depend_on_seed() {
        // Random starts alone can all land on the saturated plateau.
        let rates: Vec<f64> = (0..6)
            .map(|seed| {
                let mut p = general(6);
                p.seed = seed;
                general_optimum(&p).unwrap().rate
            })
            .collect();
        for r in &rates {
            assert!((r - rates[0]).abs() < 1e-9 && *r > 2.4, "{rates:?}");
        }
    }

    #[test]
    fn two_relay_optimum_coincides() {
        let opt = general_optimum(&general(2)).unwrap();
        let (a, b) = (opt.points[0], opt.points[1]);
        assert!(crate::netmodel::distance(a, b) < 1.0, "{a:?} {b:?}");
    }
}
