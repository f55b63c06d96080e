use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::model::FiniteCheapTalkGame;

use super::ContinuumSpec;

/// Finite approximation: states at the midpoints of `n_states` equal cells
/// with the prior mass of each cell, actions on a uniform grid over
/// `[-b, 1 + b]`.
pub fn discretize(spec: &ContinuumSpec, n_states: usize, n_actions: usize) -> Result<FiniteCheapTalkGame> {
    if n_states < 2 {
        return Err(Error::invalid_at("at least two states are required", "nStates"));
    }
    if n_actions < 2 {
        return Err(Error::invalid_at("at least two actions are required", "nActions"));
    }
    let b = spec.bias();
    let width = 1.0 / n_states as f64;
    let states: Vec<f64> = (0..n_states).map(|i| (i as f64 + 0.5) * width).collect();
    let mut prior = (0..n_states)
        .map(|i| spec.prior_mass(i as f64 * width, (i + 1) as f64 * width))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = prior.iter().sum();
    prior.iter_mut().for_each(|p| *p /= total);
    let step = (1.0 + 2.0 * b) / (n_actions - 1) as f64;
    let actions: Vec<f64> = (0..n_actions).map(|j| -b + j as f64 * step).collect();
    let table = |u: &dyn Fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
        states.iter().map(|&t| actions.iter().map(|&a| u(a, t)).collect()).collect()
    };
    let u_s = table(&|a, t| spec.u_sender(a, t));
    let u_r = table(&|a, t| spec.u_receiver(a, t));
    FiniteCheapTalkGame::new(
        states.iter().map(|&t| fmt_sig(t)).collect(),
        prior,
        actions.iter().map(|&a| fmt_sig(a)).collect(),
        u_s,
        u_r,
    )
}
