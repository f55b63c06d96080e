use crate::error::{Error, Result};

use super::ContinuumSpec;

/// Receiver response on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Response {
    /// The same action for the cell's message.
    Const(f64),
    /// Action `m + c` for a revealed report `m`.
    Offset(f64),
}

/// One interval `[lo, hi)` of a step-function profile. A pooled cell sends a
/// single message; a revealed cell reports the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
    pub pooled: bool,
    pub response: Response,
}

impl Cell {
    fn action(&self, theta: f64) -> f64 {
        match self.response {
            Response::Const(a) => a,
            Response::Offset(c) => theta + c,
        }
    }

    fn breakpoints(&self) -> [f64; 2] {
        [self.lo, self.hi]
    }
}

/// A Sender step function paired with the Receiver's step response on the
/// messages it uses.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    cells: Vec<Cell>,
}

impl StepProfile {
    /// Cells must tile `[0, 1]` in order; pooled cells need a constant
    /// response.
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::invalid_at("at least one cell is required", "cells"));
        }
        let mut edge = 0.0;
        for (i, c) in cells.iter().enumerate() {
            if (c.lo - edge).abs() > 1e-15 || c.hi < c.lo {
                return Err(Error::invalid_at("cells must tile [0, 1] in increasing order", format!("cells[{i}]")));
            }
            if c.pooled && matches!(c.response, Response::Offset(_)) {
                return Err(Error::invalid_at("a pooled cell sends one message and needs a constant action", format!("cells[{i}]")));
            }
            edge = c.hi;
        }
        if (edge - 1.0).abs() > 1e-15 {
            return Err(Error::invalid_at("cells must end at 1", "cells"));
        }
        Ok(StepProfile { cells })
    }

    /// Pool `[0, y]` on the Sender-optimal action; reveal and answer
    /// `m + b` above.
    pub fn pooling(spec: &ContinuumSpec, y: f64) -> Result<Self> {
        let b = spec.bias();
        let a = spec.pooled_action(0.0, y, b)?;
        Self::new(vec![
            Cell { lo: 0.0, hi: y, pooled: true, response: Response::Const(a) },
            Cell { lo: y, hi: 1.0, pooled: false, response: Response::Offset(b) },
        ])
    }

    /// Pool each interval between consecutive breakpoints, answered with the
    /// cell's Sender-optimal action.
    pub fn partition(spec: &ContinuumSpec, breaks: &[f64]) -> Result<Self> {
        let mut edges = vec![0.0];
        edges.extend(breaks.iter().copied().filter(|&t| t > 0.0 && t < 1.0));
        edges.push(1.0);
        let cells = edges
            .windows(2)
            .map(|w| {
                let a = spec.pooled_action(w[0], w[1], spec.bias())?;
                Ok(Cell { lo: w[0], hi: w[1], pooled: true, response: Response::Const(a) })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cells)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
}

/// Returns `(u_R(σ, ρ - b), u_S(σ, ρ))`: shifting every action down by the
/// bias turns the Sender's payoff into the Receiver's.
pub fn shift_check(spec: &ContinuumSpec, profile: &StepProfile) -> Result<(f64, f64)> {
    let b = spec.bias();
    for (i, c) in profile.cells.iter().enumerate() {
        let ends = [c.action(c.lo), c.action(c.hi)];
        if ends.iter().any(|&a| !(-1e-12..=1.0 + b + 1e-12).contains(&a)) {
            return Err(Error::invalid_at(
                format!("actions must lie in [0, 1 + b] so the shifted actions stay feasible, got {ends:?}"),
                format!("cells[{i}]"),
            ));
        }
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for c in &profile.cells {
        lhs += spec.expect(|t| spec.u_receiver(c.action(t) - b, t), c.lo, c.hi, &c.breakpoints())?;
        rhs += spec.expect(|t| spec.u_sender(c.action(t), t), c.lo, c.hi, &c.breakpoints())?;
    }
    Ok((lhs, rhs))
}
