//! Finite stage game, strategies, payoffs and feasible-set geometry.

pub mod assumptions;
pub mod game;
pub mod geometry;
pub mod payoff;
pub mod strategy;

pub use assumptions::{check_assumptions, AssumptionReport};
pub use game::{FiniteCheapTalkGame, GameFile, PROB_TOL};
pub use geometry::{feasible_set, feasible_set_with, FeasibleSet, FrontierPoint, GEOM_TOL};
pub use payoff::{
    action_distribution, expected_payoffs, is_stage_nash, minmax, receiver_best_response, revelation_transform,
    sender_best_response, MinmaxPayoffs, PayoffProfile,
};
pub use strategy::{Kernel, ReceiverStrategy, SenderStrategy, StrategyFile};
