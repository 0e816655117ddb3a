//! Success-function algebra for ALOHA receivers with successive interference
//! cancellation, Poisson receivers, density evolution, Rayleigh capture and a
//! Monte Carlo simulator.

pub mod capture;
pub mod degree;
pub mod density;
pub mod error;
pub mod evaluator;
pub mod laws;
pub mod load;
pub mod maxsum;
pub mod numeric;
pub mod poisson;
pub mod properties;
pub mod receivers;
pub mod sim;
pub mod table;
pub mod topology;

pub use capture::{
    at_least_r_prob, capture_psuc, db_to_linear, expected_decoded, ordered_capture_prob, rayleigh_model, CaptureParams,
};
pub use degree::DegreeDistribution;
pub use density::{density_evolution, DeStep, DeTrace};
pub use error::{Error, Result};
pub use evaluator::{Evaluator, Flags};
pub use load::{LoadVector, VerificationBox};
pub use maxsum::{build_success_table, max_sum_decode};
pub use poisson::{induce, route, throughput, InduceMode, PoissonReceiver, SharedReceiver};
pub use properties::{certify, verify_properties, PropertyReport};
pub use receivers::{cooperative, d_fold, multiplex, near_far, packet_code, slotted_aloha, tandem};
pub use sim::{simulate, RunStats, Scenario};
pub use table::SuccessTable;
pub use topology::{split_bipartite, BipartiteTopology};
