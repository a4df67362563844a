//! Fixtures shared by the benchmarks: the reference scenario with relays on
//! the source-destination axis.

use relaysel::netmodel::dbm_to_linear;
use relaysel::{CodingConfig, LinkGains, PathLossModel, PowerConstraints, RelayId, Selection, Topology};

pub fn model() -> PathLossModel {
    PathLossModel::from_carrier(2.4e9, 1.0, 3.0).expect("reference path loss")
}

pub fn coding() -> CodingConfig {
    CodingConfig::new(dbm_to_linear(6.0), dbm_to_linear(-104.0), 0.75, 7.4e-11f64.sqrt(), 1.25e-10f64.sqrt())
        .expect("reference coding")
}

/// `m` relays evenly spaced over the middle of a 100 m span, sharing `P_t`.
pub fn line_selection(m: usize) -> (LinkGains, Selection) {
    let xs: Vec<f64> = (0..m).map(|i| 30.0 + 40.0 * i as f64 / m.max(2) as f64).collect();
    let topo = Topology::line(100.0, &xs).expect("line topology");
    let gains = LinkGains::from_topology(&topo, &model()).expect("gains");
    let p_t = coding().p_t;
    let c = PowerConstraints::new(p_t).expect("budget");
    let sel = Selection::new((0..m).map(RelayId).collect(), vec![p_t / m as f64; m], &c).expect("selection");
    (gains, sel)
}
