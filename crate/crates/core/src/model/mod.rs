//! Switched state-space systems, switching graphs, interconnections and
//! example networks.

mod builders;
mod graph;
mod plant;
mod realization;

pub use builders::{
    block_assemble, build_delay_system, const_tf, delay_modes, delay_plant, first_order_tf,
    packet_drop_delay_plant, ring_mode, ring_plant, scenario_plant, trivial_plant, RingMode, Scenario,
    RING_MODES,
};
pub use graph::{
    bounded_rate_graph, complete_graph, packet_drop_graph, ring_graph, single_mode_graph,
    GraphDiagnostic, SwitchingGraph,
};
pub use plant::{PlantDims, PlantMode, SwitchedPlant, SwitchedSystem, SwitchingPath};
pub use realization::ModeRealization;
