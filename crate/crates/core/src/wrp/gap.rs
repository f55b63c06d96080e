use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::geometry::{feasible_hull, GEOM_TOL};
use crate::model::{
    check_assumptions, expected_payoffs, minmax, sender_best_response, FiniteCheapTalkGame, ReceiverStrategy,
    SenderStrategy,
};
use crate::wrp::punish::find_sender_punishment;
use crate::wrp::scan::max_sender_given_receiver;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapPoint {
    #[serde(rename = "vR")]
    pub v_r: f64,
    /// Smallest Sender deviation cap `D(vR)` of a punishment holding the
    /// Receiver at `vR`.
    pub min_cap: f64,
    #[serde(rename = "maxFrontierVS")]
    pub max_frontier_vs: f64,
    pub wrp_possible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapReport {
    /// `u_R(τ, β)`
    pub receiver_optimum: f64,
    /// `u_S(τ, β)`
    pub sender_at_optimum: f64,
    /// `max_σ' u_S(σ', β)`
    pub sender_deviation_at_optimum: f64,
    pub grid_points: Vec<GapPoint>,
    /// Receiver optimum minus the largest scanned vR where a WRP payoff is
    /// not ruled out.
    pub eta_estimate: f64,
    pub assumptions_violated: bool,
}

/// Scans vR downward from the Receiver optimum to the Receiver minmax and
/// compares the cheapest Sender punishment with the best feasible vS.
pub fn receiver_gap(game: &FiniteCheapTalkGame, grid_size: usize, exec: Exec) -> Result<GapReport> {
    if grid_size == 0 {
        return Err(Error::invalid_at("grid size must be positive", "gridSize"));
    }
    let tau = SenderStrategy::truthful(game);
    let beta = ReceiverStrategy::believing(game);
    let at_opt = expected_payoffs(game, &tau, &beta);
    let deviation = sender_best_response(game, &beta).1;
    let floor = minmax(game).receiver;
    let top = at_opt.receiver;
    let hull = feasible_hull(game);
    let points = exec.map(grid_size + 1, |k| -> Result<GapPoint> {
        let v_r = top - k as f64 * (top - floor) / grid_size as f64;
        let min_cap = find_sender_punishment(game, v_r)?.cap;
        let max_frontier_vs = max_sender_given_receiver(&hull, v_r).unwrap_or(f64::NEG_INFINITY);
        Ok(GapPoint { v_r, min_cap, max_frontier_vs, wrp_possible: min_cap <= max_frontier_vs + GEOM_TOL })
    });
    let grid_points = points.into_iter().collect::<Result<Vec<_>>>()?;
    let eta_estimate = grid_points.iter().find(|p| p.wrp_possible).map_or(top - floor, |p| top - p.v_r);
    Ok(GapReport {
        receiver_optimum: top,
        sender_at_optimum: at_opt.sender,
        sender_deviation_at_optimum: deviation,
        grid_points,
        eta_estimate,
        assumptions_violated: !check_assumptions(game).all_hold(),
    })
}
