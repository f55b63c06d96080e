//! Three-phase automata for the repeated game and a seeded path simulator.

mod automaton;
mod sim;

pub use automaton::{
    AutomatonFile, GameRef, KernelPair, Phase, PhaseRanking, Player, SpeMargin, SpeReport, ThreePhaseAutomaton,
    TransitionRule,
};
pub use sim::{
    run_path, run_seeds, run_summary, DeviationEvent, PeriodRecord, ScriptedDeviation, SimSummary, SimTrace,
    DEVIATION_TOL,
};
