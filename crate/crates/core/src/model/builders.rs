use super::graph::{bounded_rate_graph, complete_graph, packet_drop_graph, ring_graph, single_mode_graph, SwitchingGraph};
use super::plant::{PlantMode, SwitchedPlant, SwitchedSystem};
use super::realization::ModeRealization;
use crate::linalg::{blkdiag, eye, scalar, shift, unit, zeros, Mat};
use crate::{Error, Result};

/// Shift-register delay line with modes for delays `0..=h_max`.
/// Mode `r` (0-based) realizes delay `r`. The graph is a complete graph
/// placeholder; attach the intended one with [`SwitchedSystem::new`].
pub fn build_delay_system(h_max: usize) -> SwitchedSystem {
    let modes = delay_modes(h_max);
    let graph = if h_max == 0 { single_mode_graph() } else { complete_graph(h_max + 1).expect("nonempty") };
    SwitchedSystem { modes, graph }
}

pub fn delay_modes(h_max: usize) -> Vec<ModeRealization> {
    if h_max == 0 {
        return vec![ModeRealization::static_gain(scalar(1.0))];
    }
    let a = shift(h_max);
    let b = unit(h_max, 0);
    (0..=h_max)
        .map(|r| {
            if r == 0 {
                ModeRealization { a: a.clone(), b: b.clone(), c: zeros(1, h_max), d: scalar(1.0) }
            } else {
                ModeRealization { a: a.clone(), b: b.clone(), c: unit(h_max, r - 1).transpose(), d: scalar(0.0) }
            }
        })
        .collect()
}

/// Network with a delay line between the algorithm output `u` and the oracle
/// input `z`; the gradient returns undelayed (`y = w`).
pub fn delay_plant(h_max: usize, graph: SwitchingGraph) -> Result<SwitchedPlant> {
    if graph.num_modes() != h_max + 1 {
        return Err(Error::Dimension(format!(
            "delay bound {h_max} needs {} modes, graph has {}",
            h_max + 1,
            graph.num_modes()
        )));
    }
    let modes = delay_modes(h_max)
        .into_iter()
        .map(|m| {
            let n = m.states();
            PlantMode {
                a: m.a,
                b1: zeros(n, 1),
                b2: m.b,
                c1: m.c,
                c2: zeros(1, n),
                d11: zeros(1, 1),
                d12: m.d,
                d21: eye(1),
                d22: zeros(1, 1),
            }
        })
        .collect();
    SwitchedPlant::new(modes, graph)
}

/// Delay plant on the packet-drop graph (single self-loop mode when `h_max = 0`).
pub fn packet_drop_delay_plant(h_max: usize) -> Result<SwitchedPlant> {
    let g = if h_max == 0 { single_mode_graph() } else { packet_drop_graph(h_max, false)? };
    delay_plant(h_max, g)
}

/// `z = u`, `y = w`, no state.
pub fn trivial_plant() -> SwitchedPlant {
    delay_plant(0, single_mode_graph()).expect("trivial plant is well formed")
}

/// `k / (z − a)`.
pub fn first_order_tf(gain: f64, pole: f64) -> ModeRealization {
    ModeRealization { a: scalar(pole), b: scalar(1.0), c: scalar(gain), d: scalar(0.0) }
}

pub fn const_tf(gain: f64) -> ModeRealization {
    ModeRealization::static_gain(scalar(gain))
}

/// Two-input two-output realization from a grid of SISO entries.
/// States are stacked column by column: entries (1,1), (2,1), (1,2), (2,2).
pub fn block_assemble(entries: [[&ModeRealization; 2]; 2]) -> Result<ModeRealization> {
    let order = [(0, 0), (1, 0), (0, 1), (1, 1)];
    for &(i, j) in &order {
        let e = entries[i][j];
        e.check()?;
        if e.inputs() != 1 || e.outputs() != 1 {
            return Err(Error::Dimension(format!("grid entry ({}, {}) is not SISO", i + 1, j + 1)));
        }
    }
    let blocks: Vec<&Mat> = order.iter().map(|&(i, j)| &entries[i][j].a).collect();
    let a = blkdiag(&blocks);
    let n = a.nrows();
    let mut b = zeros(n, 2);
    let mut c = zeros(2, n);
    let mut d = zeros(2, 2);
    let mut off = 0;
    for &(i, j) in &order {
        let e = entries[i][j];
        let k = e.states();
        b.view_mut((off, j), (k, 1)).copy_from(&e.b);
        c.view_mut((i, off), (1, k)).copy_from(&e.c);
        d[(i, j)] = e.d[(0, 0)];
        off += k;
    }
    Ok(ModeRealization { a, b, c, d })
}

/// Parameters of one ring-network mode: `[[0, 1/(z−a)], [−b/(z−c), d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingMode {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub const RING_MODES: [RingMode; 4] = [
    RingMode { a: 0.2, b: 1.0, c: 0.0, d: 0.0 },
    RingMode { a: 0.9, b: 0.5, c: 0.2, d: 3.0 },
    RingMode { a: -0.5, b: 0.5, c: 0.3, d: 0.0 },
    RingMode { a: -0.2, b: 1.0, c: 1.2, d: 3.0 },
];

pub fn ring_mode(p: RingMode) -> PlantMode {
    let r = block_assemble([
        [&const_tf(0.0), &first_order_tf(1.0, p.a)],
        [&first_order_tf(-p.b, p.c), &const_tf(p.d)],
    ])
    .expect("SISO grid");
    PlantMode::from_realization(&r, 1).expect("2x2 partition")
}

/// The four-mode ring network on the ring graph.
pub fn ring_plant() -> SwitchedPlant {
    SwitchedPlant::new(RING_MODES.iter().map(|&p| ring_mode(p)).collect(), ring_graph(4).expect("n = 4"))
        .expect("ring plant is well formed")
}

/// Switching scenarios over delays `0..=h_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Delay changes by at most one per step.
    RateOne,
    /// Delay changes by at most two per step.
    RateTwo,
    /// Delay grows by one or snaps back to zero.
    Snap,
    /// Any delay at any time.
    Arbitrary,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::RateOne, Scenario::RateTwo, Scenario::Snap, Scenario::Arbitrary];

    pub fn graph(self, h_max: usize) -> Result<SwitchingGraph> {
        let delays: Vec<i64> = (0..=h_max as i64).collect();
        match self {
            Scenario::RateOne => bounded_rate_graph(&delays, 1),
            Scenario::RateTwo => bounded_rate_graph(&delays, 2),
            Scenario::Snap => packet_drop_graph(h_max, false),
            Scenario::Arbitrary => complete_graph(h_max + 1)?.with_labels(delays),
        }
    }

    /// Arbitrary switching only admits a common storage function.
    pub fn requires_common_storage(self) -> bool {
        self == Scenario::Arbitrary
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::RateOne => "rate-1",
            Scenario::RateTwo => "rate-2",
            Scenario::Snap => "snap",
            Scenario::Arbitrary => "arbitrary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

pub fn scenario_plant(scenario: Scenario, h_max: usize) -> Result<SwitchedPlant> {
    delay_plant(h_max, scenario.graph(h_max)?)
}
