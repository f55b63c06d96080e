use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::game::{FiniteCheapTalkGame, PROB_TOL};

/// Row-stochastic matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// On-disk strategy layout: `{"kernel": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub kernel: Vec<Vec<f64>>,
}

impl Kernel {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::invalid_at("kernel needs at least one row", "kernel"));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid_at(
                    format!("kernel row has {} entries, expected {cols}", row.len()),
                    format!("kernel[{i}]"),
                ));
            }
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                    return Err(Error::invalid_at(
                        format!("kernel entries must lie in [0, 1], got {p}"),
                        format!("kernel[{i}][{j}]"),
                    ));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::invalid_at(
                    format!("kernel rows must sum to 1 within {PROB_TOL:e}, sums to {sum}"),
                    format!("kernel[{i}]"),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Kernel { rows: n_rows, cols, data })
    }

    /// Every row is the point mass `choice[row]`.
    pub fn pure(choices: &[usize], cols: usize) -> Self {
        let mut data = vec![0.0; choices.len() * cols];
        for (i, &c) in choices.iter().enumerate() {
            data[i * cols + c] = 1.0;
        }
        Kernel { rows: choices.len(), cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::pure(&(0..n).collect::<Vec<_>>(), n)
    }

    pub fn constant(rows: usize, cols: usize, column: usize) -> Self {
        Self::pure(&vec![column; rows], cols)
    }

    /// Convex combination `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &Kernel, weight: f64) -> Kernel {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "kernel shapes differ");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| weight * a + (1.0 - weight) * b)
            .collect();
        Kernel { rows: self.rows, cols: self.cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Entry-wise comparison within `tol`.
    pub fn approx_eq(&self, other: &Kernel, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// True when every row is the same distribution.
    pub fn is_constant_rows(&self, tol: f64) -> bool {
        (1..self.rows).all(|i| self.row(i).iter().zip(self.row(0)).all(|(a, b)| (a - b).abs() <= tol))
    }
}

/// Sender behavioral strategy: kernel indexed `[state][message]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SenderStrategy(Kernel);

/// Receiver behavioral strategy: kernel indexed `[message][action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverStrategy(Kernel);

impl SenderStrategy {
    pub fn new(game: &FiniteCheapTalkGame, kernel: Kernel) -> Result<Self> {
        if kernel.rows() != game.num_states() || kernel.cols() != game.num_messages() {
            return Err(Error::invalid_at(
                format!(
                    "sender kernel is {}x{}, game needs {}x{} (states x messages)",
                    kernel.rows(),
                    kernel.cols(),
                    game.num_states(),
                    game.num_messages()
                ),
                "kernel",
            ));
        }
        Ok(SenderStrategy(kernel))
    }

    pub fn from_rows(game: &FiniteCheapTalkGame, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(game, Kernel::from_rows(rows)?)
    }

    /// Truth-telling: report the realized state.
    pub fn truthful(game: &FiniteCheapTalkGame) -> Self {
        SenderStrategy(Kernel::identity(game.num_states()))
    }

    /// Send `message` in every state.
    pub fn constant(game: &FiniteCheapTalkGame, message: usize) -> Self {
        SenderStrategy(Kernel::constant(game.num_states(), game.num_messages(), message))
    }

    pub fn pure(game: &FiniteCheapTalkGame, messages: &[usize]) -> Result<Self> {
        if messages.len() != game.num_states() || messages.iter().any(|&m| m >= game.num_messages()) {
            return Err(Error::invalid("pure sender strategy needs one valid message per state"));
        }
        Ok(SenderStrategy(Kernel::pure(messages, game.num_messages())))
    }

    pub fn mix(&self, other: &SenderStrategy, weight: f64) -> Self {
        SenderStrategy(self.0.mix(&other.0, weight))
    }

    pub fn kernel(&self) -> &Kernel {
        &self.0
    }

    #[inline]
    pub fn prob(&self, state: usize, message: usize) -> f64 {
        self.0.get(state, message)
    }
}

impl ReceiverStrategy {
    pub fn new(game: &FiniteCheapTalkGame, kernel: Kernel) -> Result<Self> {
        if kernel.rows() != game.num_messages() || kernel.cols() != game.num_actions() {
            return Err(Error::invalid_at(
                format!(
                    "receiver kernel is {}x{}, game needs {}x{} (messages x actions)",
                    kernel.rows(),
                    kernel.cols(),
                    game.num_messages(),
                    game.num_actions()
                ),
                "kernel",
            ));
        }
        Ok(ReceiverStrategy(kernel))
    }

    pub fn from_rows(game: &FiniteCheapTalkGame, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(game, Kernel::from_rows(rows)?)
    }

    /// Play `action` regardless of the message.
    pub fn constant(game: &FiniteCheapTalkGame, action: usize) -> Self {
        ReceiverStrategy(Kernel::constant(game.num_messages(), game.num_actions(), action))
    }

    pub fn pure(game: &FiniteCheapTalkGame, actions: &[usize]) -> Result<Self> {
        if actions.len() != game.num_messages() || actions.iter().any(|&a| a >= game.num_actions()) {
            return Err(Error::invalid("pure receiver strategy needs one valid action per message"));
        }
        Ok(ReceiverStrategy(Kernel::pure(actions, game.num_actions())))
    }

    /// Believing: each message is taken at face value and answered with the
    /// Receiver-optimal action for that state (lowest index on ties).
    pub fn believing(game: &FiniteCheapTalkGame) -> Self {
        let actions: Vec<usize> = (0..game.num_states())
            .map(|s| crate::model::game::argmax(game.receiver_table()[s].iter().copied()))
            .collect();
        ReceiverStrategy(Kernel::pure(&actions, game.num_actions()))
    }

    pub fn mix(&self, other: &ReceiverStrategy, weight: f64) -> Self {
        ReceiverStrategy(self.0.mix(&other.0, weight))
    }

    pub fn kernel(&self) -> &Kernel {
        &self.0
    }

    #[inline]
    pub fn prob(&self, message: usize, action: usize) -> f64 {
        self.0.get(message, action)
    }
}
