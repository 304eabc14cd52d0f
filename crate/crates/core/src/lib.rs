//! Distances between finite sets of timestamped trajectories.

pub mod assignment;
pub mod comp;
pub mod counterexamples;
pub mod error;
pub mod exact;
pub mod io;
pub mod matrix;
pub mod permutation;
pub mod result;
pub mod switch_cost;
pub mod synth;
pub mod trajectory;
pub mod verify;

pub use comp::tradeoff::{auc, lower_left_hull, tradeoff_curve, TradeoffCurve, TradeoffPoint};
pub use comp::{d_comp, Backend, CompParams, DoublyStochasticSequence, NormKind};
pub use error::{Error, Result};
pub use exact::{d_nat_bruteforce, motp, ospa};
pub use matrix::SquareMatrix;
pub use permutation::{Permutation, PermutationSequence};
pub use result::{Association, MetricResult};
pub use switch_cost::{Cost, SwitchCost, SwitchCostKind};
pub use trajectory::{
    d_plus, distance_matrices, extend_pair, pair_distances, BaseMetric, DistanceMatrixSequence, ExtendedMetricParams,
    ExtendedPair, ExtendedTrajectory, StatePoint, Trajectory, TrajectorySet,
};
