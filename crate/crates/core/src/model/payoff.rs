use serde::{Deserialize, Serialize};

use crate::model::game::{argmax, argmin, FiniteCheapTalkGame};
use crate::model::strategy::{Kernel, ReceiverStrategy, SenderStrategy};

/// Ex-ante expected payoffs `(vS, vR)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffProfile {
    #[serde(rename = "vS")]
    pub sender: f64,
    #[serde(rename = "vR")]
    pub receiver: f64,
}

impl PayoffProfile {
    pub const fn new(sender: f64, receiver: f64) -> Self {
        PayoffProfile { sender, receiver }
    }

    /// Point-wise convex combination.
    pub fn lerp(self, other: PayoffProfile, t: f64) -> PayoffProfile {
        PayoffProfile {
            sender: (1.0 - t) * self.sender + t * other.sender,
            receiver: (1.0 - t) * self.receiver + t * other.receiver,
        }
    }

    pub fn max_abs_diff(self, other: PayoffProfile) -> f64 {
        (self.sender - other.sender).abs().max((self.receiver - other.receiver).abs())
    }

    /// True when `self` is strictly better than `other` for both players.
    pub fn strictly_dominates(self, other: PayoffProfile, tol: f64) -> bool {
        self.sender > other.sender + tol && self.receiver > other.receiver + tol
    }
}

/// Minmax values with their constant-kernel witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct MinmaxPayoffs {
    pub sender: f64,
    pub receiver: f64,
    /// Constant messaging function that holds the Receiver to `receiver`.
    pub sender_witness: SenderStrategy,
    /// Constant Sender-worst action that holds the Sender to `sender`.
    pub receiver_witness: ReceiverStrategy,
}

/// Per-state action distribution induced by `(σ, ρ)`, indexed `[state][action]`.
pub fn action_distribution(game: &FiniteCheapTalkGame, sigma: &SenderStrategy, rho: &ReceiverStrategy) -> Vec<Vec<f64>> {
    let (ns, na) = (game.num_states(), game.num_actions());
    let mut dist = vec![vec![0.0; na]; ns];
    for (s, row) in dist.iter_mut().enumerate() {
        for m in 0..game.num_messages() {
            let p = sigma.prob(s, m);
            if p == 0.0 {
                continue;
            }
            for (a, cell) in row.iter_mut().enumerate() {
                *cell += p * rho.prob(m, a);
            }
        }
    }
    dist
}

pub fn expected_payoffs(game: &FiniteCheapTalkGame, sigma: &SenderStrategy, rho: &ReceiverStrategy) -> PayoffProfile {
    let dist = action_distribution(game, sigma, rho);
    let mut out = PayoffProfile::new(0.0, 0.0);
    for (s, row) in dist.iter().enumerate() {
        let mu = game.prior()[s];
        for (a, &p) in row.iter().enumerate() {
            out.sender += mu * p * game.u_sender(s, a);
            out.receiver += mu * p * game.u_receiver(s, a);
        }
    }
    out
}

/// Pure Receiver best response; zero-probability messages get the babbling
/// action.
pub fn receiver_best_response(game: &FiniteCheapTalkGame, sigma: &SenderStrategy) -> (ReceiverStrategy, f64) {
    let babble = game.babbling_action();
    let mut choices = Vec::with_capacity(game.num_messages());
    let mut value = 0.0;
    for m in 0..game.num_messages() {
        let mass: f64 = (0..game.num_states()).map(|s| game.prior()[s] * sigma.prob(s, m)).sum();
        if mass <= 0.0 {
            choices.push(babble);
            continue;
        }
        // Unnormalized posterior expectation; the argmax is scale-free.
        let scores: Vec<f64> = (0..game.num_actions())
            .map(|a| {
                (0..game.num_states())
                    .map(|s| game.prior()[s] * sigma.prob(s, m) * game.u_receiver(s, a))
                    .sum()
            })
            .collect();
        let best = argmax(scores.iter().copied());
        value += scores[best];
        choices.push(best);
    }
    let rho = ReceiverStrategy::pure(game, &choices).expect("choices are in range");
    (rho, value)
}

/// Pure Sender best response: in each state send the message whose action
/// lottery pays the Sender most.
pub fn sender_best_response(game: &FiniteCheapTalkGame, rho: &ReceiverStrategy) -> (SenderStrategy, f64) {
    let mut choices = Vec::with_capacity(game.num_states());
    let mut value = 0.0;
    for s in 0..game.num_states() {
        let scores = (0..game.num_messages())
            .map(|m| (0..game.num_actions()).map(|a| rho.prob(m, a) * game.u_sender(s, a)).sum::<f64>());
        let scores: Vec<f64> = scores.collect();
        let best = argmax(scores.iter().copied());
        value += game.prior()[s] * scores[best];
        choices.push(best);
    }
    let sigma = SenderStrategy::pure(game, &choices).expect("choices are in range");
    (sigma, value)
}

/// Closed-form minmax values: the Receiver is held to his best uninformed
/// action, the Sender to her worst ex-ante action.
pub fn minmax(game: &FiniteCheapTalkGame) -> MinmaxPayoffs {
    let na = game.num_actions();
    let receiver = (0..na).map(|a| game.ex_ante_receiver(a)).fold(f64::NEG_INFINITY, f64::max);
    let worst = argmin((0..na).map(|a| game.ex_ante_sender(a)));
    MinmaxPayoffs {
        sender: game.ex_ante_sender(worst),
        receiver,
        sender_witness: SenderStrategy::constant(game, 0),
        receiver_witness: ReceiverStrategy::constant(game, worst),
    }
}

/// Composes `ρ ∘ σ` into a Receiver kernel indexed by the (truthful) state
/// report, so that `(τ, ρ')` induces the same per-state action lottery.
pub fn revelation_transform(game: &FiniteCheapTalkGame, sigma: &SenderStrategy, rho: &ReceiverStrategy) -> ReceiverStrategy {
    let rows = action_distribution(game, sigma, rho);
    let kernel = renormalized(rows);
    ReceiverStrategy::new(game, kernel).expect("composition has receiver shape")
}

// Rounding in the composition can leave rows a few ulps off 1.
fn renormalized(rows: Vec<Vec<f64>>) -> Kernel {
    let rows = rows
        .into_iter()
        .map(|r| {
            let sum: f64 = r.iter().sum();
            r.into_iter().map(|v| (v / sum).clamp(0.0, 1.0)).collect()
        })
        .collect();
    Kernel::from_rows(rows).expect("composed kernel is stochastic")
}

/// True when `(σ, ρ)` is a stage Nash equilibrium within `tol`.
pub fn is_stage_nash(game: &FiniteCheapTalkGame, sigma: &SenderStrategy, rho: &ReceiverStrategy, tol: f64) -> bool {
    let v = expected_payoffs(game, sigma, rho);
    sender_best_response(game, rho).1 <= v.sender + tol && receiver_best_response(game, sigma).1 <= v.receiver + tol
}
